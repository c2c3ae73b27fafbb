//! Tropical signomials `max_i (a_i + <s_i, x>)` and their differences.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::rational::{dot, Rational, RationalVector, Sign};

/// One affine term `a + <s, x>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub a: Rational,
    pub s: RationalVector,
}

impl Term {
    pub fn new(a: Rational, s: RationalVector) -> Term {
        Term { a, s }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        &self.a + dot(&self.s, x)
    }
}

/// A tropical signomial with at least one term, all exponents of length `dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signomial {
    terms: Vec<Term>,
    dim: usize,
}

/// Value of a signomial at a point together with every maximizing term (0-based, ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Rational,
    pub argmax: Vec<usize>,
}

impl Signomial {
    pub fn new(terms: Vec<Term>) -> Result<Signomial> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Precondition("a signomial needs at least one term".into()))?;
        let dim = first.s.len();
        for t in &terms {
            check_dim(dim, t.s.len())?;
        }
        Ok(Signomial { terms, dim })
    }

    pub fn from_pairs(pairs: Vec<(Rational, RationalVector)>) -> Result<Signomial> {
        Signomial::new(pairs.into_iter().map(|(a, s)| Term::new(a, s)).collect())
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Evaluation> {
        check_dim(self.dim, x.len())?;
        let mut best: Option<Rational> = None;
        let mut argmax = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            let v = t.eval(x);
            match &best {
                Some(b) if v < *b => {}
                Some(b) if v == *b => argmax.push(i),
                _ => {
                    best = Some(v);
                    argmax.clear();
                    argmax.push(i);
                }
            }
        }
        Ok(Evaluation { value: best.expect("nonempty"), argmax })
    }

    pub fn value(&self, x: &[Rational]) -> Result<Rational> {
        self.eval(x).map(|e| e.value)
    }

    /// Concatenation of term lists: the tropical sum `self ⊕ other`.
    pub fn tropical_sum(&self, other: &Signomial) -> Result<Signomial> {
        check_dim(self.dim, other.dim)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Signomial { terms, dim: self.dim })
    }

    /// Pairwise sums of terms: the tropical product `self ⊙ other`.
    pub fn tropical_product(&self, other: &Signomial) -> Result<Signomial> {
        check_dim(self.dim, other.dim)?;
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for t in &self.terms {
            for u in &other.terms {
                let s = t.s.iter().zip(&u.s).map(|(x, y)| x + y).collect();
                terms.push(Term::new(&t.a + &u.a, s));
            }
        }
        Ok(Signomial { terms, dim: self.dim })
    }
}

/// Parameters of `g ⊘ h`: numerator terms (a_i, s_i) then denominator terms (b_j, t_j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropicalRational {
    pub num: Signomial,
    pub den: Signomial,
}

impl TropicalRational {
    pub fn new(num: Signomial, den: Signomial) -> Result<TropicalRational> {
        check_dim(num.dim(), den.dim())?;
        Ok(TropicalRational { num, den })
    }

    pub fn dim(&self) -> usize {
        self.num.dim()
    }

    pub fn n(&self) -> usize {
        self.num.len()
    }

    pub fn m(&self) -> usize {
        self.den.len()
    }

    /// Dimension `(n+m)(d+1)` of the parameter space.
    pub fn ambient_dim(&self) -> usize {
        (self.n() + self.m()) * (self.dim() + 1)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        Ok(self.num.value(x)? - self.den.value(x)?)
    }

    pub fn classify(&self, p: &[Rational]) -> Result<Sign> {
        self.eval(p).map(|v| Sign::of(&v))
    }

    /// Numerator terms followed by denominator terms, as one signomial with `n + m` terms.
    pub fn merged(&self) -> Signomial {
        self.num.tropical_sum(&self.den).expect("dimensions checked at construction")
    }

    /// Flat parameter vector `(a_1, s_1, ..., b_m, t_m)`.
    pub fn flat(&self) -> RationalVector {
        flatten(self.merged().terms())
    }

    /// Rebuilds parameters from a flat vector with the given split.
    pub fn from_flat(flat: &[Rational], n: usize, m: usize, dim: usize) -> Result<TropicalRational> {
        let terms = unflatten(flat, n + m, dim)?;
        let (num, den) = terms.split_at(n);
        TropicalRational::new(Signomial::new(num.to_vec())?, Signomial::new(den.to_vec())?)
    }

    /// Swaps numerator and denominator, negating the function.
    pub fn swapped(&self) -> TropicalRational {
        TropicalRational { num: self.den.clone(), den: self.num.clone() }
    }
}

pub fn flatten(terms: &[Term]) -> RationalVector {
    let mut out = Vec::new();
    for t in terms {
        out.push(t.a.clone());
        out.extend(t.s.iter().cloned());
    }
    out
}

pub fn unflatten(flat: &[Rational], count: usize, dim: usize) -> Result<Vec<Term>> {
    check_dim(count * (dim + 1), flat.len())?;
    Ok(flat
        .chunks(dim + 1)
        .map(|c| Term::new(c[0].clone(), c[1..].to_vec()))
        .collect())
}

/// A signomial read directly from a flat parameter vector.
pub fn signomial_from_flat(flat: &[Rational], count: usize, dim: usize) -> Result<Signomial> {
    Signomial::new(unflatten(flat, count, dim)?)
}
