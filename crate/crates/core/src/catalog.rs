//! Named product-state ensembles, their separable measurements, and a
//! brute-force search for perfect separable measurements.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::composition::{
    kron, product_prob, CompositeSystem, ProductEffect, ProductState, SeparableMeasurement,
};
use crate::error::{NweError, Result};
use crate::gpt::{Effect, GptSystem, RealVec, State, DEFAULT_EPS};

/// Default node budget for [`search_perfect_separable`].
pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnsembleId {
    /// Four squit product states, discriminable only when Alice starts.
    S4,
    /// Eight pentagon product states.
    S5,
    /// Eight hexagon product states.
    S6,
    /// Eight heptagon product states.
    S7,
    /// Eight three-qubit product states on the XZ Bloch circle.
    Q3,
}

impl EnsembleId {
    pub const ALL: [EnsembleId; 5] = [Self::S4, Self::S5, Self::S6, Self::S7, Self::Q3];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::S4 => "s4",
            Self::S5 => "s5",
            Self::S6 => "s6",
            Self::S7 => "s7",
            Self::Q3 => "q3",
        }
    }

    /// Whether a separable measurement for this set is cataloged.
    pub fn has_measurement(self) -> bool {
        matches!(self, Self::S5 | Self::S6 | Self::S7)
    }
}

impl fmt::Display for EnsembleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnsembleId {
    type Err = NweError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| NweError::InvalidParameter(format!("unknown ensemble id `{s}`")))
    }
}

/// Prior distributions over the eight-state sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorFamily {
    Uniform,
    /// `p` on φ3 and φ4 (1-based), `(1 - 2p)/6` on the other six.
    Biased(f64),
}

impl PriorFamily {
    pub fn weights(&self, n_states: usize) -> Result<Vec<f64>> {
        match *self {
            PriorFamily::Uniform => {
                if n_states == 0 {
                    return Err(NweError::Empty("ensemble states"));
                }
                Ok(vec![1.0 / n_states as f64; n_states])
            }
            PriorFamily::Biased(p) => {
                if !(p > 0.0 && p < 0.5) {
                    return Err(NweError::InvalidParameter(format!(
                        "biased prior needs p in (0, 1/2), got {p}"
                    )));
                }
                if n_states != 8 {
                    return Err(NweError::InvalidParameter(format!(
                        "biased priors are defined on eight-state sets, got {n_states}"
                    )));
                }
                let rest = (1.0 - 2.0 * p) / 6.0;
                Ok((0..8)
                    .map(|i| if i == 2 || i == 3 { p } else { rest })
                    .collect())
            }
        }
    }
}

impl FromStr for PriorFamily {
    type Err = NweError;

    /// `uniform`, `biased:<p>` or `biased=<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(Self::Uniform);
        }
        let p = s
            .strip_prefix("biased:")
            .or_else(|| s.strip_prefix("biased="))
            .ok_or_else(|| NweError::InvalidParameter(format!("unknown prior `{s}`")))?;
        let p: f64 = p
            .parse()
            .map_err(|_| NweError::InvalidParameter(format!("bad bias value `{p}`")))?;
        if !(p > 0.0 && p < 0.5) {
            return Err(NweError::InvalidParameter(format!(
                "biased prior needs p in (0, 1/2), got {p}"
            )));
        }
        Ok(Self::Biased(p))
    }
}

/// Prior probabilities paired with product states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub id: Option<EnsembleId>,
    pub composite: CompositeSystem,
    pub states: Vec<ProductState>,
    pub priors: Vec<f64>,
}

impl Ensemble {
    pub fn new(
        composite: CompositeSystem,
        states: Vec<ProductState>,
        priors: Vec<f64>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(NweError::Empty("ensemble states"));
        }
        if states.len() != priors.len() {
            return Err(NweError::InvalidParameter(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        for s in &states {
            if s.arity() != composite.arity() {
                return Err(NweError::ArityMismatch {
                    expected: composite.arity(),
                    got: s.arity(),
                });
            }
            for (f, sys) in s.factors.iter().zip(composite.parts()) {
                if f.vector.len() != sys.dim() {
                    return Err(NweError::DimensionMismatch {
                        expected: sys.dim(),
                        got: f.vector.len(),
                    });
                }
            }
        }
        check_priors(&priors)?;
        Ok(Self {
            id: None,
            composite,
            states,
            priors,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.composite.arity()
    }

    pub fn max_prior(&self) -> f64 {
        self.priors.iter().copied().fold(0.0, f64::max)
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self> {
        if priors.len() != self.states.len() {
            return Err(NweError::InvalidParameter(
                "prior count differs from state count".into(),
            ));
        }
        check_priors(&priors)?;
        self.priors = priors;
        Ok(self)
    }

    /// Sub-ensemble on the given state indices with renormalized priors
    /// (uniform when all selected priors vanish).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(NweError::Empty("subset indices"));
        }
        let mut states = Vec::with_capacity(indices.len());
        let mut priors = Vec::with_capacity(indices.len());
        for &i in indices {
            let s = self.states.get(i).ok_or(NweError::IndexOutOfRange {
                index: i,
                len: self.states.len(),
            })?;
            states.push(s.clone());
            priors.push(self.priors[i]);
        }
        let total: f64 = priors.iter().sum();
        if total > 0.0 {
            priors.iter_mut().for_each(|p| *p /= total);
        } else {
            let k = priors.len() as f64;
            priors.iter_mut().for_each(|p| *p = 1.0 / k);
        }
        Ensemble::new(self.composite.clone(), states, priors)
    }
}

fn check_priors(priors: &[f64]) -> Result<()> {
    if priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(NweError::InvalidParameter(
            "priors must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(NweError::InvalidParameter(format!(
            "priors sum to {total}, not 1"
        )));
    }
    Ok(())
}

const S4_INDICES: [[usize; 2]; 4] = [[0, 0], [0, 3], [1, 0], [2, 1]];

const S5_INDICES: [[usize; 3]; 8] = [
    [0, 0, 0],
    [2, 2, 2],
    [1, 0, 2],
    [4, 0, 2],
    [0, 2, 1],
    [0, 2, 4],
    [2, 1, 0],
    [2, 4, 0],
];

// Shared by the hexagon and heptagon sets.
const S67_INDICES: [[usize; 3]; 8] = [
    [0, 0, 0],
    [3, 3, 3],
    [1, 0, 3],
    [5, 0, 3],
    [0, 3, 1],
    [0, 3, 5],
    [3, 1, 0],
    [3, 5, 0],
];

// Bloch angles: |0⟩ → 0, |1⟩ → π, |+⟩ → π/2, |-⟩ → 3π/2.
const ZERO: f64 = 0.0;
const ONE: f64 = PI;
const PLUS: f64 = PI / 2.0;
const MINUS: f64 = 3.0 * PI / 2.0;
const Q3_ANGLES: [[f64; 3]; 8] = [
    [ZERO, ZERO, ZERO],
    [ONE, ONE, ONE],
    [PLUS, ZERO, ONE],
    [MINUS, ZERO, ONE],
    [ZERO, ONE, PLUS],
    [ZERO, ONE, MINUS],
    [ONE, PLUS, ZERO],
    [ONE, MINUS, ZERO],
];

#[derive(Clone, Copy)]
enum Tok {
    Ray(usize),
    Comp(usize),
}

use Tok::{Comp as C, Ray as R};

const S5_MEASUREMENT: [[Tok; 3]; 8] = [
    [R(0), R(0), R(0)],
    [C(0), C(0), C(0)],
    [R(1), R(0), C(0)],
    [C(1), R(0), C(0)],
    [R(0), C(0), R(1)],
    [R(0), C(0), C(1)],
    [C(0), R(1), R(0)],
    [C(0), C(1), R(0)],
];

// Indices under the (2i+1)π/n even-n effect convention.
const S6_MEASUREMENT: [[Tok; 3]; 8] = [
    [R(0), R(0), R(0)],
    [R(3), R(3), R(3)],
    [R(1), R(0), R(3)],
    [R(4), R(0), R(3)],
    [R(0), R(3), R(1)],
    [R(0), R(3), R(4)],
    [R(3), R(1), R(0)],
    [R(3), R(4), R(0)],
];

/// Loads a named ensemble with the requested priors.
pub fn load(id: EnsembleId, priors: PriorFamily) -> Result<Ensemble> {
    let (composite, states) = match id {
        EnsembleId::S4 => polygon_states(4, S4_INDICES.iter().map(|r| r.as_slice()))?,
        EnsembleId::S5 => polygon_states(5, S5_INDICES.iter().map(|r| r.as_slice()))?,
        EnsembleId::S6 => polygon_states(6, S67_INDICES.iter().map(|r| r.as_slice()))?,
        EnsembleId::S7 => polygon_states(7, S67_INDICES.iter().map(|r| r.as_slice()))?,
        EnsembleId::Q3 => {
            let circle = GptSystem::bloch_circle();
            let states = Q3_ANGLES
                .iter()
                .map(|angles| {
                    angles
                        .iter()
                        .map(|&a| circle.state_at(a))
                        .collect::<Result<Vec<State>>>()
                        .map(ProductState::new)
                })
                .collect::<Result<Vec<_>>>()?;
            (CompositeSystem::homogeneous(circle, 3)?, states)
        }
    };
    let weights = priors.weights(states.len())?;
    let mut ens = Ensemble::new(composite, states, weights)?;
    ens.id = Some(id);
    Ok(ens)
}

fn polygon_states<'a>(
    n: usize,
    rows: impl Iterator<Item = &'a [usize]>,
) -> Result<(CompositeSystem, Vec<ProductState>)> {
    let sys = GptSystem::polygon(n)?;
    let rows: Vec<&[usize]> = rows.collect();
    let arity = rows[0].len();
    let states = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|&i| sys.pure_state(i).cloned())
                .collect::<Result<Vec<_>>>()
                .map(ProductState::new)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((CompositeSystem::homogeneous(sys, arity)?, states))
}

/// The cataloged eight-effect separable measurement for S5, S6 or S7.
pub fn load_measurement(id: EnsembleId) -> Result<SeparableMeasurement> {
    let (n, table) = match id {
        EnsembleId::S5 => (5, &S5_MEASUREMENT),
        EnsembleId::S6 => (6, &S6_MEASUREMENT),
        EnsembleId::S7 => (7, &S5_MEASUREMENT),
        other => return Err(NweError::NoCatalogedMeasurement(other.to_string())),
    };
    let sys = GptSystem::polygon(n)?;
    let effects = table
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| match *t {
                    Tok::Ray(i) => sys.ray_effect(i).cloned(),
                    Tok::Comp(i) => sys.complement(i).cloned(),
                })
                .collect::<Result<Vec<_>>>()
                .map(ProductEffect::new)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparableMeasurement::new(effects))
}

/// Candidate single-party effects for the separable search.
fn candidate_effects(ens: &Ensemble, party: usize) -> Result<Vec<Effect>> {
    let sys = ens.composite.part(party)?;
    let mut out: Vec<Effect> = Vec::new();
    let mut push = |e: Effect| {
        let dup = out.iter().any(|o| {
            o.vector
                .max_abs_diff(&e.vector)
                .map(|d| d < 1e-12)
                .unwrap_or(false)
        });
        if !dup {
            out.push(e);
        }
    };
    if sys.is_polygon() {
        sys.ray_effects().iter().cloned().for_each(&mut push);
        sys.complement_effects().iter().cloned().for_each(&mut push);
    } else {
        // projectors aligned with the factors that occur, and their antipodes
        for s in &ens.states {
            let c = s.factors[party].vector.coords();
            let angle = c[1].atan2(c[0]);
            push(sys.effect_at(angle)?);
            push(sys.effect_at(angle + PI)?);
        }
    }
    push(sys.unit().clone());
    Ok(out)
}

/// Test states used to prune partial sums: all products of pure states for
/// polygons, the occurring factors and their antipodes on the circle.
fn pruning_states(ens: &Ensemble) -> Result<Vec<RealVec>> {
    let mut per_party: Vec<Vec<RealVec>> = Vec::new();
    for a in 0..ens.arity() {
        let sys = ens.composite.part(a)?;
        if sys.is_polygon() {
            per_party.push(sys.pure_states().iter().map(|w| w.vector.clone()).collect());
        } else {
            let mut v = Vec::new();
            for s in &ens.states {
                let c = s.factors[a].vector.coords();
                let angle = c[1].atan2(c[0]);
                v.push(sys.state_at(angle)?.vector);
                v.push(sys.state_at(angle + PI)?.vector);
            }
            per_party.push(v);
        }
    }
    let mut out: Vec<Vec<&RealVec>> = vec![Vec::new()];
    for party in &per_party {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                party.iter().map(move |w| {
                    let mut p = prefix.clone();
                    p.push(w);
                    p
                })
            })
            .collect();
    }
    out.iter().map(|f| kron(f)).collect()
}

/// Depth-first search for a complete separable measurement with one product
/// effect per state and identity confusion matrix.
///
/// Each party draws from its ray-extremal effects, their complements and
/// the unit effect (on the Bloch circle: projectors along the occurring
/// factors). Partial sums are pruned once `u⊗…⊗u − Σ` turns negative on a
/// product of pure states. Returns `Ok(None)` if the space is exhausted.
pub fn search_perfect_separable(
    ens: &Ensemble,
    node_bound: u64,
) -> Result<Option<SeparableMeasurement>> {
    let arity = ens.arity();
    if arity > 3 {
        return Err(NweError::Unsupported(format!(
            "separable search supports at most three parties, got {arity}"
        )));
    }
    let eps = DEFAULT_EPS;
    let cands: Vec<Vec<Effect>> = (0..arity)
        .map(|a| candidate_effects(ens, a))
        .collect::<Result<_>>()?;
    let combos: u128 = cands.iter().map(|c| c.len() as u128).product();
    let screen_cost = combos * ens.len() as u128;
    if screen_cost > node_bound as u128 {
        return Err(NweError::SearchSpaceTooLarge {
            estimated: screen_cost,
            bound: node_bound as u128,
        });
    }

    // per-state candidate product effects with the right 0/1 column
    let mut per_state: Vec<Vec<(ProductEffect, RealVec)>> = vec![Vec::new(); ens.len()];
    let mut idx = vec![0usize; arity];
    'outer: loop {
        let effect = ProductEffect::new(
            idx.iter()
                .enumerate()
                .map(|(a, &i)| cands[a][i].clone())
                .collect(),
        );
        let mut column = Vec::with_capacity(ens.len());
        for s in &ens.states {
            column.push(product_prob(&effect, s)?);
        }
        let ones: Vec<usize> = (0..ens.len())
            .filter(|&j| (column[j] - 1.0).abs() <= eps)
            .collect();
        if ones.len() == 1
            && column
                .iter()
                .enumerate()
                .all(|(j, v)| j == ones[0] || v.abs() <= eps)
        {
            let k = effect.kron()?;
            per_state[ones[0]].push((effect, k));
        }
        for a in (0..arity).rev() {
            idx[a] += 1;
            if idx[a] < cands[a].len() {
                continue 'outer;
            }
            idx[a] = 0;
        }
        break;
    }
    if per_state.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }

    let tests = pruning_states(ens)?;
    let unit = ens.composite.unit_product();
    let mut search = Dfs {
        per_state: &per_state,
        tests: &tests,
        unit: &unit,
        chosen: Vec::new(),
        visited: 0,
        bound: node_bound,
    };
    let zero = RealVec::from_raw(vec![0.0; unit.len()]);
    match search.run(0, &zero)? {
        true => Ok(Some(SeparableMeasurement::new(
            search
                .chosen
                .iter()
                .enumerate()
                .map(|(j, &c)| per_state[j][c].0.clone())
                .collect(),
        ))),
        false => Ok(None),
    }
}

struct Dfs<'a> {
    per_state: &'a [Vec<(ProductEffect, RealVec)>],
    tests: &'a [RealVec],
    unit: &'a RealVec,
    chosen: Vec<usize>,
    visited: u64,
    bound: u64,
}

impl Dfs<'_> {
    fn run(&mut self, j: usize, partial: &RealVec) -> Result<bool> {
        self.visited += 1;
        if self.visited > self.bound {
            return Err(NweError::SearchSpaceTooLarge {
                estimated: self.visited as u128,
                bound: self.bound as u128,
            });
        }
        let rest = self.unit.sub(partial)?;
        for t in self.tests {
            if rest.dot(t)? < -DEFAULT_EPS {
                return Ok(false);
            }
        }
        if j == self.per_state.len() {
            return Ok(rest
                .coords()
                .iter()
                .all(|c| c.abs() <= crate::gpt::COMPLETENESS_TOL));
        }
        for c in 0..self.per_state[j].len() {
            let next = partial.add(&self.per_state[j][c].1)?;
            self.chosen.push(c);
            if self.run(j + 1, &next)? {
                return Ok(true);
            }
            self.chosen.pop();
        }
        Ok(false)
    }
}
