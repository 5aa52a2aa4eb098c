//! Local discrimination of product-state ensembles.
//!
//! Protocols are adaptive trees in which every party measures at most once,
//! drawing from a finite list of allowed measurements, and all outcomes are
//! broadcast. Two inference models score a protocol:
//!
//! * [`InferenceModel::Eliminative`]: an outcome only tells the parties
//!   which states it rules out (those with zero likelihood). A state counts
//!   as identified when every leaf it can reach guesses it. The optimum is
//!   the largest prior mass of a sub-ensemble the protocol discriminates
//!   perfectly. This is the class in which the pentagon gap of 1/8 lives.
//! * [`InferenceModel::Bayesian`]: outcome likelihoods are used in full and
//!   leaves guess the most likely state. The optimum is the recursion
//!   `V(L, R) = max_{a∈R, M} Σ_o V(L ⊙ p(o|·), R∖{a})`,
//!   `V(L, ∅) = max_i L_i`, started from the priors.
//!
//! Both models agree whenever the likelihoods are 0/1 on the ensemble.

mod bayes;
mod elimination;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use crate::catalog::{load_measurement, search_perfect_separable, Ensemble, DEFAULT_SEARCH_BOUND};
use crate::composition::{product_prob, SeparableMeasurement};
use crate::error::{NweError, Result};
use crate::format::sig10;
use crate::gpt::{Measurement, DEFAULT_EPS};

pub use tree::{party_letter, ProtocolTree};

/// Default bound on solver work (recursion nodes or subset checks).
pub const DEFAULT_NODE_BOUND: u128 = 50_000_000;

/// Tolerance used to break ties between equal-valued candidates.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InferenceModel {
    #[default]
    Eliminative,
    Bayesian,
}

impl fmt::Display for InferenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Eliminative => "eliminative",
            Self::Bayesian => "bayesian",
        })
    }
}

impl FromStr for InferenceModel {
    type Err = NweError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eliminative" | "elim" => Ok(Self::Eliminative),
            "bayesian" | "bayes" => Ok(Self::Bayesian),
            _ => Err(NweError::InvalidParameter(format!(
                "unknown inference model `{s}`"
            ))),
        }
    }
}

/// What the optimizer may do.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Allowed measurements per party. An empty list keeps a party idle.
    pub allowed: Vec<Vec<Measurement>>,
    /// Adaptive party order; otherwise parties go in index order (leader first).
    pub adaptive: bool,
    /// Party forced to measure first.
    pub leader: Option<usize>,
    /// Measurement index the leader must open with.
    pub opening: Option<usize>,
    pub model: InferenceModel,
    pub eps: f64,
    pub node_bound: u128,
}

impl SearchConfig {
    pub fn new(allowed: Vec<Vec<Measurement>>) -> Self {
        Self {
            allowed,
            adaptive: true,
            leader: None,
            opening: None,
            model: InferenceModel::default(),
            eps: DEFAULT_EPS,
            node_bound: DEFAULT_NODE_BOUND,
        }
    }

    /// Every party gets its system's binary extremal measurements; Bloch
    /// circle parties get the `Z` and `X` basis measurements.
    pub fn extremal(ens: &Ensemble) -> Result<Self> {
        let allowed = ens
            .composite
            .parts()
            .iter()
            .map(|sys| {
                if sys.is_polygon() {
                    Ok(sys.extremal_measurements().to_vec())
                } else {
                    Ok(vec![
                        sys.basis_measurement(0.0)?,
                        sys.basis_measurement(std::f64::consts::FRAC_PI_2)?,
                    ])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(allowed))
    }

    pub fn with_leader(mut self, leader: usize) -> Self {
        self.leader = Some(leader);
        self
    }

    pub fn with_opening(mut self, measurement: usize) -> Self {
        self.opening = Some(measurement);
        self
    }

    pub fn with_model(mut self, model: InferenceModel) -> Self {
        self.model = model;
        self
    }

    pub fn fixed_order(mut self) -> Self {
        self.adaptive = false;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_node_bound(mut self, bound: u128) -> Self {
        self.node_bound = bound;
        self
    }

    /// Party order used when `adaptive` is off.
    pub(crate) fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = Vec::with_capacity(self.allowed.len());
        order.extend(self.leader);
        order.extend((0..self.allowed.len()).filter(|&a| Some(a) != self.leader));
        order
    }

    /// `(party, measurement)` moves available with `remaining` parties.
    pub(crate) fn moves(&self, remaining: u32, root: bool) -> Vec<(usize, usize)> {
        if root {
            if let Some(l) = self.leader {
                return match self.opening {
                    Some(m) => vec![(l, m)],
                    None => (0..self.allowed[l].len()).map(|m| (l, m)).collect(),
                };
            }
        }
        let usable = |a: usize| remaining & (1 << a) != 0 && !self.allowed[a].is_empty();
        let parties: Vec<usize> = if self.adaptive {
            (0..self.allowed.len()).filter(|&a| usable(a)).collect()
        } else {
            self.order()
                .into_iter()
                .find(|&a| usable(a))
                .into_iter()
                .collect()
        };
        parties
            .into_iter()
            .flat_map(|a| (0..self.allowed[a].len()).map(move |m| (a, m)))
            .collect()
    }

    pub fn validate(&self, ens: &Ensemble) -> Result<()> {
        if self.allowed.len() != ens.arity() {
            return Err(NweError::ArityMismatch {
                expected: ens.arity(),
                got: self.allowed.len(),
            });
        }
        if ens.arity() > 16 {
            return Err(NweError::Unsupported(format!("{} parties", ens.arity())));
        }
        for (a, list) in self.allowed.iter().enumerate() {
            let sys = ens.composite.part(a)?;
            for m in list {
                if m.effects.len() < 2 {
                    return Err(NweError::IncompleteMeasurement(format!(
                        "{} for party {} has fewer than two outcomes",
                        m.label,
                        party_letter(a)
                    )));
                }
                if !m.is_complete(&sys.unit().vector, self.eps) {
                    return Err(NweError::IncompleteMeasurement(format!(
                        "{} for party {} does not sum to the unit effect",
                        m.label,
                        party_letter(a)
                    )));
                }
            }
        }
        if let Some(l) = self.leader {
            if l >= ens.arity() {
                return Err(NweError::InvalidParameter(format!(
                    "leader {l} out of range"
                )));
            }
            if self.allowed[l].is_empty() {
                return Err(NweError::InvalidParameter(format!(
                    "leader {} has no allowed measurement",
                    party_letter(l)
                )));
            }
            if let Some(m) = self.opening {
                if m >= self.allowed[l].len() {
                    return Err(NweError::InvalidParameter(format!(
                        "opening measurement {m} out of range for party {}",
                        party_letter(l)
                    )));
                }
            }
        } else if self.opening.is_some() {
            return Err(NweError::InvalidParameter(
                "an opening measurement needs a leader".into(),
            ));
        }
        Ok(())
    }
}

/// `entries[i][j] = p(E_i | φ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols())
            .map(|j| self.entries.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Largest deviation from the identity; `None` if not square.
    pub fn identity_error(&self) -> Option<f64> {
        if self.rows() != self.cols() {
            return None;
        }
        Some(
            self.entries
                .iter()
                .enumerate()
                .flat_map(|(i, r)| {
                    r.iter()
                        .enumerate()
                        .map(move |(j, v)| (v - f64::from(u8::from(i == j))).abs())
                })
                .fold(0.0, f64::max),
        )
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.identity_error().is_some_and(|e| e <= tol)
    }

    /// True if rows are a permutation of the identity's rows.
    pub fn is_permuted_identity(&self, tol: f64) -> bool {
        if self.rows() != self.cols() {
            return false;
        }
        let mut seen = vec![false; self.cols()];
        for r in &self.entries {
            let ones: Vec<usize> = (0..r.len())
                .filter(|&j| (r[j] - 1.0).abs() <= tol)
                .collect();
            if ones.len() != 1 || seen[ones[0]] {
                return false;
            }
            if r.iter()
                .enumerate()
                .any(|(j, v)| j != ones[0] && v.abs() > tol)
            {
                return false;
            }
            seen[ones[0]] = true;
        }
        true
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row
                .iter()
                .map(|&v| {
                    if v.abs() < 5e-13 {
                        "0".to_string()
                    } else {
                        sig10(v)
                    }
                })
                .collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

pub fn confusion_matrix(m: &SeparableMeasurement, ens: &Ensemble) -> Result<ConfusionMatrix> {
    let entries = m
        .effects
        .iter()
        .map(|e| {
            ens.states
                .iter()
                .map(|s| product_prob(e, s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfusionMatrix { entries })
}

/// Result of an optimal local search.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationReport {
    pub success: f64,
    pub delta: f64,
    pub tree: ProtocolTree,
    pub leader: Option<usize>,
    pub opening: Option<usize>,
    pub model: InferenceModel,
    /// States identified with certainty (eliminative model only).
    pub identified: Option<Vec<usize>>,
}

impl DiscriminationReport {
    /// Line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("model {}\n", self.model));
        if let Some(l) = self.leader {
            out.push_str(&format!("leader {}\n", party_letter(l)));
        }
        if let Some(m) = self.opening {
            out.push_str(&format!("opening {m}\n"));
        }
        out.push_str(&format!("success {}\n", sig10(self.success)));
        out.push_str(&format!("delta {}\n", sig10(self.delta)));
        if let Some(ids) = &self.identified {
            let list: Vec<String> = ids.iter().map(|i| (i + 1).to_string()).collect();
            out.push_str(&format!("identified {}\n", list.join(",")));
        }
        out.push_str(&format!("tree {}\n", self.tree));
        out
    }
}

/// `table[party][measurement][outcome][state]`, negative rounding noise
/// clipped to zero.
pub(crate) struct Likelihoods {
    table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Likelihoods {
    pub(crate) fn build(ens: &Ensemble, cfg: &SearchConfig) -> Result<Self> {
        let table = cfg
            .allowed
            .iter()
            .enumerate()
            .map(|(a, list)| {
                list.iter()
                    .map(|m| {
                        m.effects
                            .iter()
                            .map(|e| {
                                ens.states
                                    .iter()
                                    .map(|s| {
                                        let v = e.vector.dot(&s.factors[a].vector)?;
                                        if v < -cfg.eps || v > 1.0 + cfg.eps {
                                            return Err(NweError::InvalidEffectStatePair {
                                                value: v,
                                            });
                                        }
                                        Ok(v.max(0.0))
                                    })
                                    .collect::<Result<Vec<_>>>()
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { table })
    }

    pub(crate) fn outcomes(&self, party: usize, m: usize) -> Option<usize> {
        self.table.get(party)?.get(m).map(|o| o.len())
    }

    pub(crate) fn get(&self, party: usize, m: usize, outcome: usize) -> &[f64] {
        &self.table[party][m][outcome]
    }
}

/// Success probability of a fixed protocol under `cfg.model`.
///
/// Bayesian: `Σ_leaves prior[guess] · Π_path p(outcome | factor of guess)`.
/// Eliminative: prior mass of states all of whose reachable leaves guess them.
pub fn eval_tree(tree: &ProtocolTree, ens: &Ensemble, cfg: &SearchConfig) -> Result<f64> {
    cfg.validate(ens)?;
    let lik = Likelihoods::build(ens, cfg)?;
    tree.validate(ens.arity(), ens.len(), &|a, m| lik.outcomes(a, m))?;
    let score = |i: usize| match cfg.model {
        InferenceModel::Bayesian => reach_probability(tree, i, &lik),
        InferenceModel::Eliminative => {
            f64::from(u8::from(surely_identified(tree, i, &lik, cfg.eps)))
        }
    };
    Ok((0..ens.len()).map(|i| ens.priors[i] * score(i)).sum())
}

fn reach_probability(tree: &ProtocolTree, state: usize, lik: &Likelihoods) -> f64 {
    match tree {
        ProtocolTree::Leaf { guess } => f64::from(u8::from(*guess == state)),
        ProtocolTree::Node {
            party,
            measurement,
            children,
        } => children
            .iter()
            .enumerate()
            .map(|(o, c)| {
                lik.get(*party, *measurement, o)[state] * reach_probability(c, state, lik)
            })
            .sum(),
    }
}

fn surely_identified(tree: &ProtocolTree, state: usize, lik: &Likelihoods, eps: f64) -> bool {
    match tree {
        ProtocolTree::Leaf { guess } => *guess == state,
        ProtocolTree::Node {
            party,
            measurement,
            children,
        } => children.iter().enumerate().all(|(o, c)| {
            lik.get(*party, *measurement, o)[state] <= eps || surely_identified(c, state, lik, eps)
        }),
    }
}

/// Optimal protocol within the configured class.
///
/// Ties go to the lowest party index, then the lowest measurement index,
/// then the lowest guess index.
pub fn optimal_local(ens: &Ensemble, cfg: &SearchConfig) -> Result<DiscriminationReport> {
    cfg.validate(ens)?;
    let lik = Likelihoods::build(ens, cfg)?;
    let (success, tree, identified) = match cfg.model {
        InferenceModel::Bayesian => {
            let (v, t) = bayes::BayesSolver::new(ens, cfg, &lik)?.solve()?;
            (v, t, None)
        }
        InferenceModel::Eliminative => {
            let mut solver = elimination::Eliminator::new(ens, cfg, &lik)?;
            let (v, t, mask) = solver.solve()?;
            (
                v,
                t,
                Some((0..ens.len()).filter(|&i| mask & (1 << i) != 0).collect()),
            )
        }
    };
    Ok(DiscriminationReport {
        success,
        delta: 1.0 - success,
        tree,
        leader: cfg.leader,
        opening: cfg.opening,
        model: cfg.model,
        identified,
    })
}

/// Whether the listed states can be discriminated perfectly by a protocol
/// from the configured class.
pub fn perfectly_discriminable(
    ens: &Ensemble,
    states: &[usize],
    cfg: &SearchConfig,
) -> Result<bool> {
    cfg.validate(ens)?;
    let lik = Likelihoods::build(ens, cfg)?;
    let mut solver = elimination::Eliminator::new(ens, cfg, &lik)?;
    let mut mask = 0u64;
    for &i in states {
        if i >= ens.len() {
            return Err(NweError::IndexOutOfRange {
                index: i,
                len: ens.len(),
            });
        }
        mask |= 1 << i;
    }
    solver.root_perfect(mask)
}

/// Local gap together with a check that the ensemble is globally
/// perfectly discriminable.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub delta: f64,
    pub report: DiscriminationReport,
    /// False when no perfect separable measurement was found; `delta` is
    /// then not a nonlocality gap.
    pub global_perfect: bool,
}

pub fn delta(ens: &Ensemble, cfg: &SearchConfig) -> Result<DeltaReport> {
    let report = optimal_local(ens, cfg)?;
    let global_perfect = global_measurement(ens)?.is_some();
    Ok(DeltaReport {
        delta: report.delta,
        report,
        global_perfect,
    })
}

/// A perfect separable measurement: the cataloged one when available,
/// otherwise whatever the brute-force search finds.
pub fn global_measurement(ens: &Ensemble) -> Result<Option<SeparableMeasurement>> {
    if let Some(id) = ens.id.filter(|id| id.has_measurement()) {
        let m = load_measurement(id)?;
        if confusion_matrix(&m, ens)?.is_identity(1e-9) && ens.composite.check_complete(&m) {
            return Ok(Some(m));
        }
    }
    search_perfect_separable(ens, DEFAULT_SEARCH_BOUND)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{load, EnsembleId, PriorFamily};

    fn s(id: EnsembleId) -> Ensemble {
        load(id, PriorFamily::Uniform).unwrap()
    }

    #[test]
    fn catalog_confusion_matrices_are_identity() {
        for id in [EnsembleId::S5, EnsembleId::S6, EnsembleId::S7] {
            let cm = confusion_matrix(&load_measurement(id).unwrap(), &s(id)).unwrap();
            assert!(cm.is_identity(1e-9), "{id}: {cm}");
            assert!(cm.column_sums().iter().all(|c| (c - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn swapped_rows_give_permuted_identity() {
        let mut m = load_measurement(EnsembleId::S5).unwrap();
        m.effects.swap(0, 1);
        let cm = confusion_matrix(&m, &s(EnsembleId::S5)).unwrap();
        assert!(!cm.is_identity(1e-9));
        assert!(cm.is_permuted_identity(1e-9));
    }

    #[test]
    fn blind_guess_tree() {
        let ens = s(EnsembleId::S5);
        let cfg = SearchConfig::extremal(&ens).unwrap();
        for model in [InferenceModel::Eliminative, InferenceModel::Bayesian] {
            let v =
                eval_tree(&ProtocolTree::leaf(0), &ens, &cfg.clone().with_model(model)).unwrap();
            assert!((v - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn tree_on_squit_pairs() {
        // Alice M1 = {e1, e3}: e1 keeps φ3, φ4; e3 keeps φ1, φ2.
        // Bob then separates ω0/ω1 with M1 and ω0/ω3 with M0.
        let ens = s(EnsembleId::S4);
        let cfg = SearchConfig::extremal(&ens).unwrap();
        let tree: ProtocolTree = "(A:1 (B:1 [4] [3]) (B:0 [1] [2]))".parse().unwrap();
        for model in [InferenceModel::Eliminative, InferenceModel::Bayesian] {
            let v = eval_tree(&tree, &ens, &cfg.clone().with_model(model)).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{model}: {v}");
        }
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let ens = s(EnsembleId::S4);
        let cfg = SearchConfig::extremal(&ens).unwrap();
        for bad in [
            "(A:2 [1] [2])",
            "(C:0 [1] [2])",
            "(A:0 [1] [2] [3])",
            "(A:0 (A:1 [1] [1]) [2])",
            "[5]",
        ] {
            let t: ProtocolTree = bad.parse().unwrap();
            assert!(
                matches!(eval_tree(&t, &ens, &cfg), Err(NweError::MalformedTree(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn config_validation() {
        let ens = s(EnsembleId::S5);
        let cfg = SearchConfig::extremal(&ens).unwrap();
        assert!(cfg.clone().with_opening(0).validate(&ens).is_err());
        assert!(cfg.clone().with_leader(3).validate(&ens).is_err());
        assert!(cfg
            .clone()
            .with_leader(0)
            .with_opening(5)
            .validate(&ens)
            .is_err());
        let mut broken = cfg.clone();
        broken.allowed[0][0].effects.pop();
        assert!(matches!(
            broken.validate(&ens),
            Err(NweError::IncompleteMeasurement(_))
        ));
        let mut short = cfg;
        short.allowed.pop();
        assert!(matches!(
            short.validate(&ens),
            Err(NweError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn model_parsing() {
        assert_eq!(
            "bayes".parse::<InferenceModel>().unwrap(),
            InferenceModel::Bayesian
        );
        assert_eq!(
            "eliminative".parse::<InferenceModel>().unwrap(),
            InferenceModel::Eliminative
        );
        assert!("other".parse::<InferenceModel>().is_err());
    }

    #[test]
    fn fixed_order_moves() {
        let ens = s(EnsembleId::S5);
        let cfg = SearchConfig::extremal(&ens)
            .unwrap()
            .with_leader(1)
            .fixed_order();
        assert_eq!(cfg.order(), vec![1, 0, 2]);
        let moves = cfg.moves(0b101, false);
        assert!(moves.iter().all(|&(a, _)| a == 0));
        let root = cfg.moves(0b111, true);
        assert!(root.iter().all(|&(a, _)| a == 1));
    }
}
