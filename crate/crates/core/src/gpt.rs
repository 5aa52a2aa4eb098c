//! Elementary systems: regular-polygon models and the Bloch circle.
//!
//! States and effects live in ℝ³. A normalized state has third coordinate 1,
//! the unit effect is `(0, 0, 1)` and outcome probabilities are plain inner
//! products. For a polygon with `n` vertices the pure states sit on a circle
//! of radius `r_n = sqrt(sec(π/n))`:
//!
//! ```text
//! ω_i = (r_n cos(2πi/n), r_n sin(2πi/n), 1)
//! e_i = ½ (r_n cos((2i+1)π/n), r_n sin((2i+1)π/n), 1)          n even
//! e_i = (r_n cos(2πi/n), r_n sin(2πi/n), 1) / (1 + r_n²)        n odd
//! ```
//!
//! For even `n` the complement of `e_i` is the antipodal ray effect
//! `e_{i+n/2}`; for odd `n` it is the non-ray-extremal `ē_i = u - e_i`.
//!
//! The Bloch circle is the XZ great circle of the qubit. It uses the same
//! vector form with `state_at(φ) = (cos φ, sin φ, 1)` and
//! `effect_at(θ) = ½ (cos θ, sin θ, 1)`, so `p = ½ (1 + cos(θ - φ))`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{NweError, Result};

/// Zero/one classification tolerance.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Tolerance for sums that are exact in real arithmetic.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// A finite real vector representing a state or an effect.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVec(Vec<f64>);

impl RealVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(NweError::Empty("vector coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(NweError::InvalidParameter(
                "vector has a non-finite coordinate".into(),
            ));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &RealVec) -> Result<f64> {
        if self.len() != other.len() {
            return Err(NweError::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &RealVec) -> Result<RealVec> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealVec) -> Result<RealVec> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> RealVec {
        RealVec(self.0.iter().map(|c| c * factor).collect())
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &RealVec) -> Result<f64> {
        Ok(self
            .zip_with(other, |a, b| (a - b).abs())?
            .0
            .into_iter()
            .fold(0.0, f64::max))
    }

    fn zip_with(&self, other: &RealVec, f: impl Fn(f64, f64) -> f64) -> Result<RealVec> {
        if self.len() != other.len() {
            return Err(NweError::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(RealVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }
}

/// A labeled state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub label: String,
    pub vector: RealVec,
}

/// A labeled effect vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    pub label: String,
    pub vector: RealVec,
}

impl Effect {
    pub fn new(label: impl Into<String>, vector: RealVec) -> Self {
        Self {
            label: label.into(),
            vector,
        }
    }
}

/// A list of effects meant to sum to the unit effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub effects: Vec<Effect>,
}

impl Measurement {
    pub fn new(label: impl Into<String>, effects: Vec<Effect>) -> Self {
        Self {
            label: label.into(),
            effects,
        }
    }

    /// True when the effects sum to `unit` within `tol` per component.
    pub fn is_complete(&self, unit: &RealVec, tol: f64) -> bool {
        let Some(first) = self.effects.first() else {
            return false;
        };
        let mut sum = first.vector.clone();
        for e in &self.effects[1..] {
            match sum.add(&e.vector) {
                Ok(s) => sum = s,
                Err(_) => return false,
            }
        }
        matches!(sum.max_abs_diff(unit), Ok(d) if d <= tol)
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Polygon(usize),
    BlochCircle,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::Polygon(n) => write!(f, "polygon({n})"),
            SystemKind::BlochCircle => write!(f, "bloch-circle"),
        }
    }
}

/// Which pure states an effect accepts with certainty, rejects with
/// certainty, or passes only probabilistically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroOneProfile {
    pub effect_index: usize,
    pub ones: Vec<usize>,
    pub zeros: Vec<usize>,
    pub fractional: Vec<usize>,
}

/// An elementary GPT system. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GptSystem {
    kind: SystemKind,
    pure_states: Vec<State>,
    ray_effects: Vec<Effect>,
    complements: Vec<Effect>,
    unit: Effect,
    measurements: Vec<Measurement>,
    eps: f64,
}

impl GptSystem {
    /// Regular polygon model with `n ≥ 3` pure states.
    pub fn polygon(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(NweError::InvalidParameter(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        let nf = n as f64;
        let r = (1.0 / (PI / nf).cos()).sqrt();
        let unit = Effect::new("u", RealVec::from_raw(vec![0.0, 0.0, 1.0]));

        let pure_states = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / nf;
                State {
                    label: format!("ω{i}"),
                    vector: RealVec::from_raw(vec![r * a.cos(), r * a.sin(), 1.0]),
                }
            })
            .collect();

        let (ray_effects, complements, measurements) = if n.is_multiple_of(2) {
            let rays: Vec<Effect> = (0..n)
                .map(|i| {
                    let a = (2 * i + 1) as f64 * PI / nf;
                    Effect::new(
                        format!("e{i}"),
                        RealVec::from_raw(vec![0.5 * r * a.cos(), 0.5 * r * a.sin(), 0.5]),
                    )
                })
                .collect();
            let comps: Vec<Effect> = (0..n).map(|i| rays[(i + n / 2) % n].clone()).collect();
            let meas = (0..n / 2)
                .map(|i| {
                    Measurement::new(
                        format!("M{i}"),
                        vec![rays[i].clone(), rays[i + n / 2].clone()],
                    )
                })
                .collect();
            (rays, comps, meas)
        } else {
            let norm = 1.0 + r * r;
            let rays: Vec<Effect> = (0..n)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / nf;
                    Effect::new(
                        format!("e{i}"),
                        RealVec::from_raw(vec![r * a.cos() / norm, r * a.sin() / norm, 1.0 / norm]),
                    )
                })
                .collect();
            let comps: Vec<Effect> = rays
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    Effect::new(
                        format!("ē{i}"),
                        unit.vector.sub(&e.vector).expect("both vectors are in R^3"),
                    )
                })
                .collect();
            let meas = (0..n)
                .map(|i| Measurement::new(format!("M{i}"), vec![rays[i].clone(), comps[i].clone()]))
                .collect();
            (rays, comps, meas)
        };

        Ok(Self {
            kind: SystemKind::Polygon(n),
            pure_states,
            ray_effects,
            complements,
            unit,
            measurements,
            eps: DEFAULT_EPS,
        })
    }

    /// The XZ great circle of the qubit Bloch sphere.
    ///
    /// Its pure states and effects are continuous families, so the listed
    /// pure-state and extremal-effect collections are empty; use
    /// [`GptSystem::state_at`] and [`GptSystem::effect_at`] instead.
    pub fn bloch_circle() -> Self {
        Self {
            kind: SystemKind::BlochCircle,
            pure_states: Vec::new(),
            ray_effects: Vec::new(),
            complements: Vec::new(),
            unit: Effect::new("u", RealVec::from_raw(vec![0.0, 0.0, 1.0])),
            measurements: Vec::new(),
            eps: DEFAULT_EPS,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        3
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self.kind, SystemKind::Polygon(_))
    }

    pub fn pure_states(&self) -> &[State] {
        &self.pure_states
    }

    pub fn ray_effects(&self) -> &[Effect] {
        &self.ray_effects
    }

    pub fn complement_effects(&self) -> &[Effect] {
        &self.complements
    }

    pub fn unit(&self) -> &Effect {
        &self.unit
    }

    /// Binary extremal measurements: `{e_i, ē_i}` for odd `n`, the `n/2`
    /// antipodal pairs `{e_i, e_{i+n/2}}` for even `n`.
    pub fn extremal_measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn pure_state(&self, i: usize) -> Result<&State> {
        self.pure_states.get(i).ok_or(NweError::IndexOutOfRange {
            index: i,
            len: self.pure_states.len(),
        })
    }

    pub fn ray_effect(&self, i: usize) -> Result<&Effect> {
        self.ray_effects.get(i).ok_or(NweError::IndexOutOfRange {
            index: i,
            len: self.ray_effects.len(),
        })
    }

    pub fn complement(&self, i: usize) -> Result<&Effect> {
        self.complements.get(i).ok_or(NweError::IndexOutOfRange {
            index: i,
            len: self.complements.len(),
        })
    }

    /// Pure state of the Bloch circle at angle `phi`.
    pub fn state_at(&self, phi: f64) -> Result<State> {
        self.require_circle()?;
        Ok(State {
            label: angle_label(phi),
            vector: RealVec::from_raw(vec![phi.cos(), phi.sin(), 1.0]),
        })
    }

    /// Projective effect of the Bloch circle pointing at angle `theta`.
    pub fn effect_at(&self, theta: f64) -> Result<Effect> {
        self.require_circle()?;
        Ok(Effect::new(
            format!("P{}", angle_label(theta)),
            RealVec::from_raw(vec![0.5 * theta.cos(), 0.5 * theta.sin(), 0.5]),
        ))
    }

    /// The basis measurement `{effect_at(θ), effect_at(θ+π)}`.
    pub fn basis_measurement(&self, theta: f64) -> Result<Measurement> {
        Ok(Measurement::new(
            format!("B{}", angle_label(theta)),
            vec![self.effect_at(theta)?, self.effect_at(theta + PI)?],
        ))
    }

    fn require_circle(&self) -> Result<()> {
        match self.kind {
            SystemKind::BlochCircle => Ok(()),
            k => Err(NweError::Unsupported(format!(
                "angle constructors are only defined on the Bloch circle, not {k}"
            ))),
        }
    }

    /// Outcome probability, snapped into `[0, 1]` when within `eps` of it.
    pub fn prob(&self, effect: &RealVec, state: &RealVec) -> Result<f64> {
        prob(effect, state, self.eps)
    }

    /// True iff `effect` gives a probability in `[-eps, 1+eps]` on every
    /// pure state.
    pub fn validate_effect(&self, effect: &RealVec) -> bool {
        if effect.len() != self.dim() {
            return false;
        }
        let lo = -self.eps;
        let hi = 1.0 + self.eps;
        match self.kind {
            SystemKind::Polygon(_) => self.pure_states.iter().all(|w| {
                let v = effect.dot(&w.vector).unwrap_or(f64::NAN);
                v >= lo && v <= hi
            }),
            SystemKind::BlochCircle => {
                // extremes of e_z + e_x cos φ + e_y sin φ over φ
                let c = effect.coords();
                let radius = c[0].hypot(c[1]);
                c[2] - radius >= lo && c[2] + radius <= hi
            }
        }
    }

    /// Searches the ray-extremal effects and their complements for an `e`
    /// with `p(e|a) = 1` and `p(e|b) = 0`; returns `{e, u - e}`.
    pub fn find_pair_discriminator(&self, a: &RealVec, b: &RealVec) -> Option<Measurement> {
        self.ray_effects
            .iter()
            .chain(self.complements.iter())
            .find(|e| {
                let pa = e.vector.dot(a).unwrap_or(f64::NAN);
                let pb = e.vector.dot(b).unwrap_or(f64::NAN);
                (pa - 1.0).abs() <= self.eps && pb.abs() <= self.eps
            })
            .map(|e| {
                let rest = Effect::new(
                    format!("u-{}", e.label),
                    self.unit.vector.sub(&e.vector).expect("same dimension"),
                );
                Measurement::new(format!("D[{}]", e.label), vec![e.clone(), rest])
            })
    }

    /// Classifies each pure state under ray effect `effect_index`.
    pub fn zero_one_profile(&self, effect_index: usize) -> Result<ZeroOneProfile> {
        if !self.is_polygon() {
            return Err(NweError::Unsupported(
                "zero/one profiles need a finite pure-state list".into(),
            ));
        }
        let e = self.ray_effect(effect_index)?;
        let mut profile = ZeroOneProfile {
            effect_index,
            ones: Vec::new(),
            zeros: Vec::new(),
            fractional: Vec::new(),
        };
        for (j, w) in self.pure_states.iter().enumerate() {
            let v = e.vector.dot(&w.vector)?;
            if (v - 1.0).abs() <= self.eps {
                profile.ones.push(j);
            } else if v.abs() <= self.eps {
                profile.zeros.push(j);
            } else {
                profile.fractional.push(j);
            }
        }
        Ok(profile)
    }

    /// Checks the structural invariants of a polygon system: normalization,
    /// probability bounds, complement sums and (odd `n`) self-dual pairing.
    pub fn check_invariants(&self) -> Result<()> {
        let eps = self.eps;
        let u = &self.unit.vector;
        for w in &self.pure_states {
            let v = u.dot(&w.vector)?;
            if (v - 1.0).abs() > eps {
                return Err(NweError::InvariantViolation(format!(
                    "unit effect gives {v} on {}",
                    w.label
                )));
            }
        }
        for e in self.ray_effects.iter().chain(&self.complements) {
            if !self.validate_effect(&e.vector) {
                return Err(NweError::InvariantViolation(format!(
                    "effect {} leaves [0, 1] on some pure state",
                    e.label
                )));
            }
        }
        for (i, (e, c)) in self.ray_effects.iter().zip(&self.complements).enumerate() {
            let d = e.vector.add(&c.vector)?.max_abs_diff(u)?;
            if d > eps {
                return Err(NweError::InvariantViolation(format!(
                    "e{i} plus its complement misses u by {d}"
                )));
            }
        }
        if let SystemKind::Polygon(n) = self.kind {
            if n % 2 == 1 {
                for (i, (e, w)) in self.ray_effects.iter().zip(&self.pure_states).enumerate() {
                    let v = e.vector.dot(&w.vector)?;
                    if (v - 1.0).abs() > eps {
                        return Err(NweError::InvariantViolation(format!(
                            "p(e{i}|ω{i}) = {v}, expected 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Inner-product probability. Values within `eps` outside `[0, 1]` are
/// snapped onto the interval; anything further out is an error.
pub fn prob(effect: &RealVec, state: &RealVec, eps: f64) -> Result<f64> {
    let v = effect.dot(state)?;
    if v < -eps || v > 1.0 + eps {
        return Err(NweError::InvalidEffectStatePair { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Human-readable label for a Bloch-circle angle; multiples of π/2 map to
/// the usual kets (`0` at 0, `+` at π/2, `1` at π, `-` at 3π/2).
pub fn angle_label(angle: f64) -> String {
    let t = angle.rem_euclid(2.0 * PI);
    let quarter = t / (PI / 2.0);
    let k = quarter.round();
    if (quarter - k).abs() < 1e-12 {
        match (k as i64) % 4 {
            0 => "|0⟩".into(),
            1 => "|+⟩".into(),
            2 => "|1⟩".into(),
            _ => "|-⟩".into(),
        }
    } else {
        format!("|{t:.6}⟩")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(sys: &GptSystem, e: &Effect, w: usize) -> f64 {
        sys.prob(&e.vector, &sys.pure_state(w).unwrap().vector)
            .unwrap()
    }

    #[test]
    fn rejects_degenerate_polygons() {
        assert!(matches!(
            GptSystem::polygon(2),
            Err(NweError::InvalidParameter(_))
        ));
        assert!(GptSystem::polygon(3).is_ok());
    }

    #[test]
    fn pentagon_reference_probabilities() {
        let s = GptSystem::polygon(5).unwrap();
        let e0 = s.ray_effect(0).unwrap();
        assert!((p(&s, e0, 0) - 1.0).abs() < 1e-12);
        assert!(p(&s, e0, 2).abs() < 1e-12);
        // (1 + sec(π/5) cos(2π/5)) / (1 + sec(π/5))
        let sec = 1.0 / (PI / 5.0).cos();
        let expected = (1.0 + sec * (2.0 * PI / 5.0).cos()) / (1.0 + sec);
        assert!((p(&s, e0, 1) - expected).abs() < 1e-12);
        assert!((p(&s, e0, 1) - 0.6180340).abs() < 1e-7);
        let eb0 = s.complement(0).unwrap();
        assert!((p(&s, eb0, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squit_reference_probabilities() {
        let s = GptSystem::polygon(4).unwrap();
        let e0 = s.ray_effect(0).unwrap();
        assert!((p(&s, e0, 0) - 1.0).abs() < 1e-12);
        assert!(p(&s, e0, 2).abs() < 1e-12);
        assert_eq!(s.extremal_measurements().len(), 2);
        assert_eq!(s.complement(0).unwrap().label, "e2");
    }

    #[test]
    fn odd_and_even_measurement_counts() {
        assert_eq!(
            GptSystem::polygon(5).unwrap().extremal_measurements().len(),
            5
        );
        assert_eq!(
            GptSystem::polygon(6).unwrap().extremal_measurements().len(),
            3
        );
        assert_eq!(
            GptSystem::polygon(7).unwrap().extremal_measurements().len(),
            7
        );
    }

    #[test]
    fn bloch_circle_probabilities() {
        let b = GptSystem::bloch_circle();
        let pr = |th: f64, ph: f64| {
            b.prob(
                &b.effect_at(th).unwrap().vector,
                &b.state_at(ph).unwrap().vector,
            )
            .unwrap()
        };
        assert!((pr(0.0, 0.0) - 1.0).abs() < 1e-15);
        for th in [0.1, 0.7, 1.3, 2.9] {
            assert!((pr(th, PI) - 0.5 * (1.0 - th.cos())).abs() < 1e-12);
            assert!((pr(th, 1.5 * PI) - 0.5 * (1.0 - th.sin())).abs() < 1e-12);
        }
        assert!(b.state_at(0.0).is_ok());
        assert!(GptSystem::polygon(5).unwrap().state_at(0.0).is_err());
    }

    #[test]
    fn prob_snaps_and_rejects() {
        let u = RealVec::new(vec![0.0, 0.0, 1.0]).unwrap();
        let w = RealVec::new(vec![0.3, 0.2, 1.0 + 5e-10]).unwrap();
        assert_eq!(prob(&u, &w, 1e-9).unwrap(), 1.0);
        let far = RealVec::new(vec![0.0, 0.0, 1.1]).unwrap();
        assert!(matches!(
            prob(&u, &far, 1e-9),
            Err(NweError::InvalidEffectStatePair { .. })
        ));
        let short = RealVec::new(vec![1.0]).unwrap();
        assert!(matches!(
            prob(&u, &short, 1e-9),
            Err(NweError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn validate_effect_cases() {
        let s5 = GptSystem::polygon(5).unwrap();
        assert!(s5.validate_effect(&s5.unit().vector));
        assert!(!s5.validate_effect(&s5.ray_effect(0).unwrap().vector.scale(2.0)));
        let s4 = GptSystem::polygon(4).unwrap();
        assert!(s4.validate_effect(&s4.ray_effect(0).unwrap().vector));
        let b = GptSystem::bloch_circle();
        assert!(b.validate_effect(&b.effect_at(0.4).unwrap().vector));
        assert!(!b.validate_effect(&b.effect_at(0.4).unwrap().vector.scale(1.5)));
    }

    #[test]
    fn pair_discriminators() {
        let s4 = GptSystem::polygon(4).unwrap();
        let w = |s: &GptSystem, i| s.pure_state(i).unwrap().vector.clone();
        assert!(s4.find_pair_discriminator(&w(&s4, 0), &w(&s4, 1)).is_some());
        let s5 = GptSystem::polygon(5).unwrap();
        assert!(s5.find_pair_discriminator(&w(&s5, 0), &w(&s5, 1)).is_none());
        let m = s5.find_pair_discriminator(&w(&s5, 1), &w(&s5, 4)).unwrap();
        assert_eq!(m.effects[0].label, "e1");
        assert!(m.is_complete(&s5.unit().vector, COMPLETENESS_TOL));
    }

    #[test]
    fn zero_one_profiles() {
        let s7 = GptSystem::polygon(7).unwrap();
        let pr = s7.zero_one_profile(0).unwrap();
        assert_eq!(pr.ones, vec![0]);
        assert_eq!(pr.zeros, vec![3, 4]);
        assert_eq!(pr.fractional, vec![1, 2, 5, 6]);

        let s5 = GptSystem::polygon(5).unwrap();
        let pr = s5.zero_one_profile(0).unwrap();
        assert_eq!(pr.ones, vec![0]);
        assert_eq!(pr.zeros, vec![2, 3]);
        assert_eq!(pr.fractional, vec![1, 4]);

        let s4 = GptSystem::polygon(4).unwrap();
        let pr = s4.zero_one_profile(0).unwrap();
        assert_eq!(pr.ones.len(), 2);
        assert_eq!(pr.zeros.len(), 2);
        assert!(pr.fractional.is_empty());

        assert!(matches!(
            s5.zero_one_profile(5),
            Err(NweError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn invariants_hold_for_small_polygons() {
        for n in 3..=12 {
            GptSystem::polygon(n).unwrap().check_invariants().unwrap();
        }
    }

    #[test]
    fn angle_labels() {
        assert_eq!(angle_label(0.0), "|0⟩");
        assert_eq!(angle_label(PI), "|1⟩");
        assert_eq!(angle_label(PI / 2.0), "|+⟩");
        assert_eq!(angle_label(-PI / 2.0), "|-⟩");
    }
}
