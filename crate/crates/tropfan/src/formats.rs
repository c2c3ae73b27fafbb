//! JSON file formats. Rationals are strings (`"3"`, `"-1/2"`, `"0.25"`); plain JSON numbers are
//! accepted on input. Term and pattern indices are 1-based in every file.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use tropfan_core::activation::{ActivationPattern, Dataset};
use tropfan_core::classification::{Dichotomy, LevelSetReport};
use tropfan_core::dual::DualEdge;
use tropfan_core::matroid::{AxiomReport, Status, Witness};
use tropfan_core::rational::{format_rational, parse_rational};
use tropfan_core::relu::{ConversionResult, Layer, ReluNetwork};
use tropfan_core::{Rational, Signomial, Term, TropicalRational};

/// An exact rational carried as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let text = match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(de::Error::custom(format!("expected a rational, got {other}"))),
        };
        parse_rational(&text).map(Q).map_err(de::Error::custom)
    }
}

fn qs(v: &[Rational]) -> Vec<Q> {
    v.iter().cloned().map(Q).collect()
}

fn unq(v: Vec<Q>) -> Vec<Rational> {
    v.into_iter().map(|q| q.0).collect()
}

/// `{"points": [["0","0"], ["1","0"]]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFile {
    pub points: Vec<Vec<Q>>,
}

impl DataFile {
    pub fn to_dataset(self) -> tropfan_core::Result<Dataset> {
        Dataset::new(self.points.into_iter().map(unq).collect())
    }

    pub fn from_dataset(data: &Dataset) -> DataFile {
        DataFile { points: data.points().iter().map(|p| qs(p)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub a: Q,
    pub s: Vec<Q>,
}

/// `{"terms": [{"a": "0", "s": ["-1", "1"]}, ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignomialJson {
    pub terms: Vec<TermJson>,
}

impl SignomialJson {
    pub fn from_signomial(sig: &Signomial) -> SignomialJson {
        SignomialJson { terms: sig.terms().iter().map(|t| TermJson { a: Q(t.a.clone()), s: qs(&t.s) }).collect() }
    }

    pub fn to_signomial(self) -> tropfan_core::Result<Signomial> {
        Signomial::new(self.terms.into_iter().map(|t| Term::new(t.a.0, unq(t.s))).collect())
    }
}

/// `{"num": {...}, "den": {...}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaJson {
    pub num: SignomialJson,
    pub den: SignomialJson,
}

impl ThetaJson {
    pub fn from_rational(f: &TropicalRational) -> ThetaJson {
        ThetaJson { num: SignomialJson::from_signomial(&f.num), den: SignomialJson::from_signomial(&f.den) }
    }

    pub fn to_rational(self) -> tropfan_core::Result<TropicalRational> {
        TropicalRational::new(self.num.to_signomial()?, self.den.to_signomial()?)
    }
}

/// A parameter file: either a difference `num − den` or a single signomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaFile {
    Rational(ThetaJson),
    Signomial(SignomialJson),
}

/// `{"neighbors": [[1, 2], [3]]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternJson {
    pub neighbors: Vec<Vec<usize>>,
}

impl PatternJson {
    pub fn from_pattern(p: &ActivationPattern) -> PatternJson {
        PatternJson { neighbors: p.one_based() }
    }

    pub fn to_pattern(&self, n_terms: usize) -> tropfan_core::Result<ActivationPattern> {
        ActivationPattern::from_one_based(n_terms, &self.neighbors)
    }
}

/// `{"layers": [{"W": [["2", "-3"]], "c": ["1"]}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub layers: Vec<LayerJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerJson {
    #[serde(rename = "W")]
    pub weights: Vec<Vec<Q>>,
    pub c: Vec<Q>,
}

impl NetworkJson {
    pub fn to_network(self) -> tropfan_core::Result<ReluNetwork> {
        let layers = self
            .layers
            .into_iter()
            .map(|l| Layer::new(l.weights.into_iter().map(unq).collect(), unq(l.c)))
            .collect::<tropfan_core::Result<Vec<_>>>()?;
        ReluNetwork::new(layers)
    }

    pub fn from_network(net: &ReluNetwork) -> NetworkJson {
        NetworkJson {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerJson { weights: l.weights.iter().map(|r| qs(r)).collect(), c: qs(&l.biases) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub value: Q,
    pub sign: String,
    pub num_argmax: Vec<usize>,
    pub den_argmax: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalReport {
    pub points: Vec<EvalPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeJson {
    pub neighbors: Vec<Vec<usize>>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanReport {
    pub n_terms: usize,
    pub points: usize,
    pub ambient_dim: usize,
    pub lineality: usize,
    pub maximal_count: usize,
    pub cones: Vec<ConeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub size: usize,
    /// Indices into the level's sorted pattern list.
    pub members: Vec<usize>,
    pub patterns: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyJson {
    pub i: usize,
    pub j: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    pub k: usize,
    pub count: usize,
    pub components: Vec<ComponentJson>,
    pub adjacency: Vec<AdjacencyJson>,
}

impl LevelJson {
    pub fn from_report(r: &LevelSetReport) -> LevelJson {
        LevelJson {
            k: r.k,
            count: r.count(),
            components: r
                .components
                .iter()
                .map(|c| ComponentJson {
                    size: c.len(),
                    members: c.clone(),
                    patterns: c.iter().map(|&i| r.patterns[i].one_based()).collect(),
                })
                .collect(),
            adjacency: r.adjacency.iter().map(|&(i, j, dim)| AdjacencyJson { i, j, dim }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelsReport {
    pub n: usize,
    pub m: usize,
    pub target: String,
    /// Number of maximal cones at each loss, present when no `--k` was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub levels: Vec<LevelJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomiesReport {
    pub n: usize,
    pub m: usize,
    pub count: usize,
    pub dichotomies: Vec<String>,
}

impl DichotomiesReport {
    pub fn new(n: usize, m: usize, list: &[Dichotomy]) -> DichotomiesReport {
        DichotomiesReport { n, m, count: list.len(), dichotomies: list.iter().map(|d| d.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub i: usize,
    pub j: usize,
    pub sign_mixed: bool,
    pub cell_dim: usize,
}

impl EdgeJson {
    pub fn from_edge(e: &DualEdge) -> EdgeJson {
        EdgeJson { i: e.i + 1, j: e.j + 1, sign_mixed: e.sign_mixed, cell_dim: e.cell_dim }
    }
}

/// `{"edges": [{"i": 1, "j": 3, "sign_mixed": true, "cell_dim": 1}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgesReport {
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerTraceJson {
    pub layer: usize,
    pub nominal_n: String,
    pub nominal_m: String,
    pub num_terms: Vec<usize>,
    pub den_terms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedJson {
    pub theta: ThetaJson,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub theta: ThetaJson,
    /// Nominal term counts as decimal integers.
    pub n: String,
    pub m: String,
    pub bound_m: String,
    pub trace: Vec<LayerTraceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruned: Option<PrunedJson>,
}

impl ConversionReport {
    pub fn new(result: &ConversionResult, bound: String) -> ConversionReport {
        ConversionReport {
            theta: ThetaJson::from_rational(&result.theta),
            n: result.n.to_string(),
            m: result.m.to_string(),
            bound_m: bound,
            trace: result
                .trace
                .iter()
                .enumerate()
                .map(|(l, t)| LayerTraceJson {
                    layer: l + 1,
                    nominal_n: t.nominal_n.to_string(),
                    nominal_m: t.nominal_m.to_string(),
                    num_terms: t.num_terms.clone(),
                    den_terms: t.den_terms.clone(),
                })
                .collect(),
            pruned: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub patterns: Vec<PatternJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covectors: Vec<String>,
    /// 1-based point or coordinate index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// 1-based image of each term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Vec<usize>>,
}

impl WitnessJson {
    pub fn from_witness(w: &Witness) -> WitnessJson {
        let mut out = WitnessJson { kind: String::new(), patterns: vec![], covectors: vec![], index: None, perm: None };
        match w {
            Witness::MissingCovector(c) => {
                out.kind = "missing_covector".into();
                out.covectors = vec![c.to_string()];
            }
            Witness::CovectorComposition { first, second } => {
                out.kind = "covector_composition".into();
                out.covectors = vec![first.to_string(), second.to_string()];
            }
            Witness::CovectorElimination { first, second, index } => {
                out.kind = "covector_elimination".into();
                out.covectors = vec![first.to_string(), second.to_string()];
                out.index = Some(index + 1);
            }
            Witness::MissingPattern(p) => {
                out.kind = "missing_pattern".into();
                out.patterns = vec![PatternJson::from_pattern(p)];
            }
            Witness::Relabeling { pattern, perm } => {
                out.kind = "relabeling".into();
                out.patterns = vec![PatternJson::from_pattern(pattern)];
                out.perm = Some(perm.iter().map(|i| i + 1).collect());
            }
            Witness::PatternComposition { first, second } => {
                out.kind = "pattern_composition".into();
                out.patterns = vec![PatternJson::from_pattern(first), PatternJson::from_pattern(second)];
            }
            Witness::PatternElimination { first, second, point } => {
                out.kind = "pattern_elimination".into();
                out.patterns = vec![PatternJson::from_pattern(first), PatternJson::from_pattern(second)];
                out.index = Some(point + 1);
            }
            Witness::Comparability { first, second, point } => {
                out.kind = "comparability".into();
                out.patterns = vec![PatternJson::from_pattern(first), PatternJson::from_pattern(second)];
                out.index = Some(point + 1);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomJson {
    pub axiom: String,
    pub name: String,
    /// `pass`, `fail` or `skipped`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
}

pub fn axioms_json(report: &AxiomReport) -> Vec<AxiomJson> {
    report
        .checks
        .iter()
        .map(|c| AxiomJson {
            axiom: c.axiom.to_string(),
            name: c.name.to_string(),
            status: match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Skipped => "skipped",
            }
            .to_string(),
            witness: c.witness.as_ref().map(WitnessJson::from_witness),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomsReport {
    pub n_terms: usize,
    pub patterns: usize,
    pub pattern_axioms: Vec<AxiomJson>,
    /// Only for two terms, where patterns are sign vectors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covector_axioms: Vec<AxiomJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathReport {
    pub steps: usize,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

/// Written to standard error on failure: `{"error": {"kind": "...", "message": "..."}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}
