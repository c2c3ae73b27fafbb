//! ReLU networks and their exact rewriting as a difference of two tropical signomials.
//!
//! Every neuron output is carried as a pair `(g, h)` of convex signomials with value `g − h`.
//! For a layer with weights `W = W⁺ − W⁻` and bias `c`,
//!
//! ```text
//! convex  = Σ_j W⁺_ij g_j + W⁻_ij h_j
//! concave = Σ_j W⁺_ij h_j + W⁻_ij g_j
//! relu(W(g − h) + c)_i = max(convex + c_i, concave) − concave
//! ```
//!
//! where sums of signomials are tropical products and nonnegative multiples scale every term.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{lp_feasible, ConstraintSystem};
use crate::rational::{dot, integer_row, Rational, RationalVector};
use crate::simplex::{maximize_eq, Outcome};
use crate::tropical::{Signomial, Term, TropicalRational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    /// One row per output neuron.
    pub weights: Vec<RationalVector>,
    pub biases: RationalVector,
}

impl Layer {
    pub fn new(weights: Vec<RationalVector>, biases: RationalVector) -> Result<Layer> {
        check_dim(weights.len(), biases.len())?;
        if weights.is_empty() {
            return Err(Error::Precondition("a layer needs at least one neuron".into()));
        }
        let width = weights[0].len();
        for row in &weights {
            check_dim(width, row.len())?;
        }
        Ok(Layer { weights, biases })
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.len()
    }

    /// Entrywise nonnegative parts `(W⁺, W⁻)` with disjoint support and `W⁺ − W⁻ = W`.
    pub fn split(&self) -> (Vec<RationalVector>, Vec<RationalVector>) {
        let pos = |v: &Rational| if v.is_positive() { v.clone() } else { Rational::zero() };
        let neg = |v: &Rational| if v.is_negative() { -v } else { Rational::zero() };
        (
            self.weights.iter().map(|r| r.iter().map(pos).collect()).collect(),
            self.weights.iter().map(|r| r.iter().map(neg).collect()).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReluNetwork {
    layers: Vec<Layer>,
}

impl ReluNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<ReluNetwork> {
        if layers.is_empty() {
            return Err(Error::Precondition("a network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[1].input_dim() != pair[0].output_dim() {
                return Err(Error::DimensionMismatch { expected: pair[0].output_dim(), found: pair[1].input_dim() });
            }
        }
        Ok(ReluNetwork { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").output_dim()
    }

    /// `d_0, d_1, …, d_L`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Layer::output_dim));
        dims
    }

    /// Forward pass with ReLU after every layer, the last one included.
    pub fn forward(&self, x: &[Rational]) -> Result<RationalVector> {
        check_dim(self.input_dim(), x.len())?;
        let mut v = x.to_vec();
        for layer in &self.layers {
            v = layer
                .weights
                .iter()
                .zip(&layer.biases)
                .map(|(row, c)| {
                    let z = dot(row, &v) + c;
                    if z.is_positive() {
                        z
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
        }
        Ok(v)
    }
}

/// Scalar output of a network with one output neuron.
pub fn net_eval(net: &ReluNetwork, x: &[Rational]) -> Result<Rational> {
    check_dim(1, net.output_dim())?;
    Ok(net.forward(x)?.pop().expect("one output"))
}

/// Term counts of one layer: nominal counts of the product expansion, and the actual counts
/// per neuron after merging identical terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTrace {
    pub nominal_n: BigUint,
    pub nominal_m: BigUint,
    pub num_terms: Vec<usize>,
    pub den_terms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionResult {
    pub theta: TropicalRational,
    /// Nominal counts with no merging; `n == 2m`.
    pub n: BigUint,
    pub m: BigUint,
    pub trace: Vec<LayerTrace>,
}

fn constant_zero(dim: usize) -> Signomial {
    Signomial::new(vec![Term::new(Rational::zero(), vec![Rational::zero(); dim])]).expect("one term")
}

fn scaled(sig: &Signomial, w: &Rational) -> Vec<Term> {
    sig.terms().iter().map(|t| Term::new(&t.a * w, t.s.iter().map(|v| v * w).collect())).collect()
}

fn dedup(terms: Vec<Term>) -> Vec<Term> {
    let mut seen = BTreeSet::new();
    terms.into_iter().filter(|t| seen.insert(t.clone())).collect()
}

fn check_cap(len: usize, cap: Option<usize>) -> Result<()> {
    match cap {
        Some(cap) if len > cap => Err(Error::CapExceeded { cap, what: "terms" }),
        _ => Ok(()),
    }
}

/// Tropical product of `w_j ⊙ sig_j` over `j`, merging identical terms after every factor.
fn weighted_product(factors: &[(&Signomial, &Rational)], dim: usize, cap: Option<usize>) -> Result<Signomial> {
    let mut acc = constant_zero(dim);
    for &(sig, w) in factors {
        if w.is_zero() {
            continue;
        }
        check_cap(acc.len() * sig.len(), cap)?;
        let factor = Signomial::new(scaled(sig, w))?;
        acc = Signomial::new(dedup(acc.tropical_product(&factor)?.terms().to_vec()))?;
    }
    Ok(acc)
}

pub fn net_to_tropical(net: &ReluNetwork) -> Result<ConversionResult> {
    net_to_tropical_capped(net, None)
}

/// Converts a network into `θ` with `g(x) − h(x) == net_eval(net, x)`, failing if any signomial
/// would exceed `cap` terms.
pub fn net_to_tropical_capped(net: &ReluNetwork, cap: Option<usize>) -> Result<ConversionResult> {
    check_dim(1, net.output_dim())?;
    let dim = net.input_dim();
    let mut pairs: Vec<(Signomial, Signomial)> = (0..dim)
        .map(|j| {
            let mut e = vec![Rational::zero(); dim];
            e[j] = Rational::one();
            (Signomial::new(vec![Term::new(Rational::zero(), e)]).expect("one term"), constant_zero(dim))
        })
        .collect();
    let mut nominal: Vec<(BigUint, BigUint)> = vec![(BigUint::one(), BigUint::one()); dim];
    let mut trace = Vec::with_capacity(net.layers().len());

    for layer in net.layers() {
        let (plus, minus) = layer.split();
        // every neuron expands the same product shape, so nominal counts are shared
        let m_next: BigUint = nominal.iter().map(|(n, m)| n * m).product();
        let n_next = &m_next * 2u32;
        let mut next = Vec::with_capacity(layer.output_dim());
        for i in 0..layer.output_dim() {
            let mut convex = Vec::with_capacity(2 * pairs.len());
            let mut concave = Vec::with_capacity(2 * pairs.len());
            for (j, (g, h)) in pairs.iter().enumerate() {
                convex.push((g, &plus[i][j]));
                convex.push((h, &minus[i][j]));
                concave.push((h, &plus[i][j]));
                concave.push((g, &minus[i][j]));
            }
            let convex = weighted_product(&convex, dim, cap)?;
            let concave = weighted_product(&concave, dim, cap)?;
            let c = &layer.biases[i];
            let mut num: Vec<Term> = convex.terms().iter().map(|t| Term::new(&t.a + c, t.s.clone())).collect();
            num.extend(concave.terms().iter().cloned());
            let num = dedup(num);
            check_cap(num.len(), cap)?;
            next.push((Signomial::new(num)?, concave));
        }
        trace.push(LayerTrace {
            nominal_n: n_next.clone(),
            nominal_m: m_next.clone(),
            num_terms: next.iter().map(|(g, _)| g.len()).collect(),
            den_terms: next.iter().map(|(_, h)| h.len()).collect(),
        });
        nominal = vec![(n_next, m_next); layer.output_dim()];
        pairs = next;
    }
    let (g, h) = pairs.pop().expect("one output");
    let (n, m) = nominal.pop().expect("one output");
    Ok(ConversionResult { theta: TropicalRational::new(g, h)?, n, m, trace })
}

/// `2^e` with `e = Σ_{k=1}^{L−1} 2^{L−1−k} ∏_{l=k}^{L−1} d_l`, where `hidden` lists `d_1, …, d_{L−1}`.
pub fn bound_m(hidden: &[usize]) -> BigUint {
    let layers = hidden.len() + 1;
    let mut exponent = BigUint::zero();
    for k in 1..layers {
        let width: BigUint = hidden[k - 1..].iter().map(|&d| BigUint::from(d)).product();
        exponent += width << (layers - 1 - k);
    }
    let e = u32::try_from(&exponent).expect("bound exponent fits in 32 bits");
    BigUint::one() << e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Numerator,
    Denominator,
}

/// Proof that `removed` never strictly exceeds all other terms: nonnegative weights, not all
/// zero, with `Σ w_j (s_removed − s_j) = 0` and `Σ w_j (a_removed − a_j) ≤ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalCertificate {
    pub part: Part,
    pub removed: Term,
    pub weights: Vec<(Term, Rational)>,
}

impl RemovalCertificate {
    pub fn verify(&self) -> bool {
        let dim = self.removed.s.len();
        let mut slope = vec![Rational::zero(); dim];
        let mut offset = Rational::zero();
        let mut total = Rational::zero();
        for (t, w) in &self.weights {
            if w.is_negative() || t.s.len() != dim {
                return false;
            }
            for (acc, (a, b)) in slope.iter_mut().zip(self.removed.s.iter().zip(&t.s)) {
                *acc += w * (a - b);
            }
            offset += w * (&self.removed.a - &t.a);
            total += w;
        }
        total.is_positive() && slope.iter().all(Zero::is_zero) && !offset.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneResult {
    pub theta: TropicalRational,
    pub certificates: Vec<RemovalCertificate>,
}

/// Homogenized difference `(a_i − a_j, s_i − s_j)` as a form in `(λ, x)`.
fn difference(t: &Term, u: &Term) -> RationalVector {
    let mut row = vec![&t.a - &u.a];
    row.extend(t.s.iter().zip(&u.s).map(|(a, b)| a - b));
    row
}

/// A point where term `i` strictly beats every term in `rivals`, if there is one.
fn beating_point(terms: &[Term], i: usize, rivals: &[usize]) -> Result<Option<RationalVector>> {
    let dim = terms[i].s.len();
    let mut sys = ConstraintSystem::new(dim + 1);
    let mut lambda = vec![Rational::zero(); dim + 1];
    lambda[0] = Rational::one();
    sys.push_strict(lambda);
    for &j in rivals.iter().filter(|&&j| j != i) {
        sys.push_strict(difference(&terms[i], &terms[j]));
    }
    Ok(lp_feasible(&sys)?.map(|h| h[1..].iter().map(|y| y / &h[0]).collect()))
}

/// The term that is the unique maximum at `p`, if any.
fn unique_winner(terms: &[Term], p: &[Rational]) -> Option<usize> {
    let values: Vec<Rational> = terms.iter().map(|t| t.eval(p)).collect();
    let best = values.iter().max()?;
    let mut winners = (0..values.len()).filter(|&i| &values[i] == best);
    match (winners.next(), winners.next()) {
        (Some(i), None) => Some(i),
        _ => None,
    }
}

/// Alternative-theorem multipliers over `rivals` for a term that never strictly beats all of them.
fn certificate(terms: &[Term], i: usize, rivals: &[usize], part: Part) -> RemovalCertificate {
    let dim = terms[i].s.len();
    let others: Vec<usize> = rivals.iter().copied().filter(|&j| j != i).collect();
    // columns: one weight per other term, then the weight of λ > 0
    let cols = others.len() + 1;
    let mut rows: Vec<Vec<Rational>> = vec![vec![Rational::zero(); cols]; dim + 2];
    for (c, &j) in others.iter().enumerate() {
        for (r, v) in difference(&terms[i], &terms[j]).into_iter().enumerate() {
            rows[r][c] = v;
        }
        rows[dim + 1][c] = Rational::one();
    }
    rows[0][cols - 1] = Rational::one();
    rows[dim + 1][cols - 1] = Rational::one();
    let a: Vec<_> = rows.iter().map(|r| integer_row(r)).collect();
    let mut b = vec![num_bigint::BigInt::zero(); dim + 1];
    b.push(num_bigint::BigInt::one());
    let c = vec![num_bigint::BigInt::zero(); cols];
    let x = match maximize_eq(&a, &b, &c) {
        Outcome::Optimal { x, .. } => x,
        other => panic!("strictly infeasible system must have multipliers, got {other:?}"),
    };
    let weights = others.iter().zip(&x).map(|(&j, w)| (terms[j].clone(), w.clone())).collect();
    RemovalCertificate { part, removed: terms[i].clone(), weights }
}

/// Terms that are the unique maximum at one of a few fixed probe points.
fn probe_winners(terms: &[Term]) -> Vec<bool> {
    let dim = terms[0].s.len();
    let mut points = vec![vec![Rational::zero(); dim]];
    for k in 0..dim {
        for scale in [1i64, 10, 1000] {
            for sign in [1i64, -1] {
                let mut p = vec![Rational::zero(); dim];
                p[k] = Rational::from_integer((sign * scale).into());
                points.push(p);
            }
        }
    }
    let mut won = vec![false; terms.len()];
    for p in &points {
        if let Some(i) = unique_winner(terms, p) {
            won[i] = true;
        }
    }
    won
}

fn prune_signomial(sig: &Signomial, part: Part, certificates: &mut Vec<RemovalCertificate>) -> Result<Signomial> {
    let mut terms: Vec<Term> = Vec::with_capacity(sig.len());
    for t in sig.terms() {
        if let Some(kept) = terms.iter().find(|u| *u == t) {
            certificates.push(RemovalCertificate {
                part,
                removed: t.clone(),
                weights: vec![(kept.clone(), Rational::one())],
            });
        } else {
            terms.push(t.clone());
        }
    }
    // A term that never beats the confirmed winners cannot beat all terms, so the small system
    // settles most removals; the full system runs only when it is inconclusive.
    let all: Vec<usize> = (0..terms.len()).collect();
    let mut winners: Vec<usize> = Vec::new();
    let mut keep = vec![false; terms.len()];
    for (i, won) in probe_winners(&terms).into_iter().enumerate() {
        if won {
            keep[i] = true;
            winners.push(i);
        }
    }
    for i in 0..terms.len() {
        // every point found either confirms `i` or reveals another winner, so this loop is finite
        while !keep[i] {
            match beating_point(&terms, i, &winners)? {
                None => {
                    certificates.push(certificate(&terms, i, &winners, part));
                    break;
                }
                Some(p) => match unique_winner(&terms, &p) {
                    Some(j) if !keep[j] => {
                        keep[j] = true;
                        winners.push(j);
                    }
                    _ => {
                        if beating_point(&terms, i, &all)?.is_some() {
                            keep[i] = true;
                            winners.push(i);
                        } else {
                            certificates.push(certificate(&terms, i, &all, part));
                        }
                        break;
                    }
                },
            }
        }
    }
    let keep: Vec<Term> = terms.iter().zip(&keep).filter(|(_, &k)| k).map(|(t, _)| t.clone()).collect();
    if keep.is_empty() {
        return Err(Error::Precondition(format!("pruning removed every term of a {} -term signomial", sig.len())));
    }
    Signomial::new(keep)
}

/// Drops every term that is nowhere the unique maximum of its signomial, with a certificate per removal.
pub fn prune_with_certificates(theta: &TropicalRational) -> Result<PruneResult> {
    let mut certificates = Vec::new();
    let num = prune_signomial(&theta.num, Part::Numerator, &mut certificates)?;
    let den = prune_signomial(&theta.den, Part::Denominator, &mut certificates)?;
    Ok(PruneResult { theta: TropicalRational::new(num, den)?, certificates })
}

pub fn prune_terms(theta: &TropicalRational) -> Result<TropicalRational> {
    prune_with_certificates(theta).map(|r| r.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int, ints};
    use proptest::prelude::*;

    fn net(layers: &[(&[&[i64]], &[i64])]) -> ReluNetwork {
        ReluNetwork::new(
            layers.iter().map(|(w, c)| Layer::new(w.iter().map(|r| ints(r)).collect(), ints(c)).unwrap()).collect(),
        )
        .unwrap()
    }

    fn sig(pairs: &[(i64, &[i64])]) -> Signomial {
        Signomial::from_pairs(pairs.iter().map(|(a, s)| (int(*a), ints(s))).collect()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(net_eval(&net(&[(&[&[1]], &[0])]), &[int(-2)]).unwrap(), int(0));
        let n = net(&[(&[&[2, -3]], &[1])]);
        assert_eq!(net_eval(&n, &[int(0), int(0)]).unwrap(), int(1));
        assert_eq!(net_eval(&n, &[int(1), int(1)]).unwrap(), int(0));
        assert!(net_eval(&n, &[int(1)]).is_err());
    }

    #[test]
    fn single_neuron_conversion() {
        let out = net_to_tropical(&net(&[(&[&[2, -3]], &[1])])).unwrap();
        assert_eq!(out.theta.num, sig(&[(1, &[2, 0]), (0, &[0, 3])]));
        assert_eq!(out.theta.den, sig(&[(0, &[0, 3])]));
        assert_eq!((out.n, out.m), (BigUint::from(2u32), BigUint::one()));
    }

    #[test]
    fn two_layer_counts() {
        let n = net(&[(&[&[1, -2], &[-1, 3]], &[1, -1]), (&[&[2, -1]], &[0])]);
        let out = net_to_tropical(&n).unwrap();
        assert_eq!(out.m, BigUint::from(4u32));
        assert_eq!(out.n, BigUint::from(8u32));
        assert!(out.m <= bound_m(&[2]));
        assert!(out.theta.num.len() <= 8 && out.theta.den.len() <= 4);
    }

    #[test]
    fn zero_network() {
        let n = net(&[(&[&[0, 0], &[0, 0]], &[0, 0]), (&[&[0, 0]], &[0])]);
        let out = net_to_tropical(&n).unwrap();
        for x in [[int(3), int(-7)], [frac(1, 2), int(0)]] {
            assert_eq!(out.theta.eval(&x).unwrap(), int(0));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let n = net(&[(&[&[1, -2], &[-1, 3]], &[1, -1]), (&[&[2, -1]], &[0])]);
        assert!(matches!(net_to_tropical_capped(&n, Some(2)), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn bounds() {
        assert_eq!(bound_m(&[]), BigUint::one());
        assert_eq!(bound_m(&[2]), BigUint::from(4u32));
        // 2·(2·2) + 2 = 10
        assert_eq!(bound_m(&[2, 2]), BigUint::from(1024u32));
    }

    #[test]
    fn prune_dominated_term() {
        let f = TropicalRational::new(sig(&[(0, &[1]), (-1, &[1])]), sig(&[(0, &[0])])).unwrap();
        let pruned = prune_with_certificates(&f).unwrap();
        assert_eq!(pruned.theta.num, sig(&[(0, &[1])]));
        assert_eq!(pruned.certificates.len(), 1);
        assert!(pruned.certificates.iter().all(RemovalCertificate::verify));
        assert_eq!(prune_terms(&pruned.theta).unwrap(), pruned.theta);
    }

    #[test]
    fn prune_middle_term_of_three() {
        // max(-x, 1, x) keeps all; max(-x, 0, x) drops the constant
        let keep = TropicalRational::new(sig(&[(0, &[-1]), (1, &[0]), (0, &[1])]), sig(&[(0, &[0])])).unwrap();
        assert_eq!(prune_terms(&keep).unwrap(), keep);
        let drop = TropicalRational::new(sig(&[(0, &[-1]), (0, &[0]), (0, &[1])]), sig(&[(0, &[0])])).unwrap();
        let r = prune_with_certificates(&drop).unwrap();
        assert_eq!(r.theta.num.len(), 2);
        assert!(r.certificates[0].verify());
    }

    fn small_net() -> impl Strategy<Value = ReluNetwork> {
        let layer = |inp: usize, out: usize| {
            (prop::collection::vec(prop::collection::vec(-3i64..=3, inp), out), prop::collection::vec(-3i64..=3, out))
        };
        (1usize..=2, 1usize..=3)
            .prop_flat_map(move |(d0, d1)| (layer(d0, d1), layer(d1, 1)))
            .prop_map(|((w1, c1), (w2, c2))| {
                let mk = |w: Vec<Vec<i64>>, c: Vec<i64>| {
                    Layer::new(w.iter().map(|r| ints(r)).collect(), ints(&c)).unwrap()
                };
                ReluNetwork::new(vec![mk(w1, c1), mk(w2, c2)]).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn conversion_is_pointwise_exact(n in small_net(), xs in prop::collection::vec((-20i64..=20, 1i64..=5), 2)) {
            let out = net_to_tropical(&n).unwrap();
            prop_assert_eq!(&out.n, &(&out.m * 2u32));
            let hidden: Vec<usize> = n.dims()[1..n.dims().len() - 1].to_vec();
            prop_assert!(out.m <= bound_m(&hidden));
            let x: Vec<Rational> = xs.iter().take(n.input_dim()).map(|&(p, q)| frac(p, q)).collect();
            prop_assert_eq!(out.theta.eval(&x).unwrap(), net_eval(&n, &x).unwrap());
            let pruned = prune_with_certificates(&out.theta).unwrap();
            prop_assert!(pruned.certificates.iter().all(RemovalCertificate::verify));
            prop_assert_eq!(pruned.theta.eval(&x).unwrap(), net_eval(&n, &x).unwrap());
            prop_assert_eq!(prune_terms(&pruned.theta).unwrap(), pruned.theta.clone());
        }

        #[test]
        fn split_is_disjoint(w in prop::collection::vec(prop::collection::vec(-5i64..=5, 3), 2)) {
            let layer = Layer::new(w.iter().map(|r| ints(r)).collect(), ints(&[0, 0])).unwrap();
            let (p, m) = layer.split();
            for i in 0..2 {
                for j in 0..3 {
                    prop_assert!(!p[i][j].is_negative() && !m[i][j].is_negative());
                    prop_assert!(p[i][j].is_zero() || m[i][j].is_zero());
                    prop_assert_eq!(&p[i][j] - &m[i][j], layer.weights[i][j].clone());
                }
            }
        }
    }
}
