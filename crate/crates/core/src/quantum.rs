//! One-way quantum θ-protocols on the three-qubit set and the comparison
//! curves against the pentagon.
//!
//! The leader measures `{P|θ⟩, P|θ+π⟩}` on their Bloch-circle factor and
//! announces which of two groups the state belongs to; the other parties
//! then identify the state inside the group with `Z`/`X` measurements. For a
//! state whose leader factor sits at angle `φ`, the wrong-side probability
//! is `½(1 - cos(θ - φ))` in the first group and `½(1 + cos(θ - φ))` in the
//! second, so the total error has the form `c - a cosθ - b sinθ`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::catalog::{load, Ensemble, EnsembleId, PriorFamily};
use crate::discrimination::{optimal_local, party_letter, perfectly_discriminable, SearchConfig};
use crate::error::{NweError, Result};
use crate::format::sig10;
use crate::optimize::{bisect, golden_section};

/// Golden-section interval width.
pub const THETA_TOL: f64 = 1e-10;

/// The two biased-prior protocols compared along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Alice leads.
    A,
    /// Bob leads.
    B,
}

impl Protocol {
    pub fn leader(self) -> usize {
        match self {
            Protocol::A => 0,
            Protocol::B => 1,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::A => "a",
            Protocol::B => "b",
        })
    }
}

/// A leader, a two-cell grouping and the error coefficients it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProtocol {
    pub leader: usize,
    /// States announced on the `θ` outcome.
    pub first: Vec<usize>,
    /// States announced on the `θ + π` outcome.
    pub second: Vec<usize>,
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl ThetaProtocol {
    /// Error probability at leader angle `theta`.
    pub fn error(&self, theta: f64) -> f64 {
        self.c - self.a * theta.cos() - self.b * theta.sin()
    }

    /// Stationary point `atan2(b, a)`, where the error is smallest.
    pub fn stationary_theta(&self) -> f64 {
        self.b.atan2(self.a)
    }

    /// `c - √(a² + b²)`.
    pub fn closed_form_min(&self) -> f64 {
        self.c - self.a.hypot(self.b)
    }

    fn from_groups(ens: &Ensemble, leader: usize, angles: &[f64], first_mask: u64) -> Self {
        let (mut c, mut a, mut b) = (0.0, 0.0, 0.0);
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for (i, (&phi, &w)) in angles.iter().zip(&ens.priors).enumerate() {
            let sign = if first_mask & (1 << i) != 0 {
                first.push(i);
                1.0
            } else {
                second.push(i);
                -1.0
            };
            c += 0.5 * w;
            a += sign * 0.5 * w * phi.cos();
            b += sign * 0.5 * w * phi.sin();
        }
        Self {
            leader,
            first,
            second,
            c,
            a,
            b,
        }
    }

    /// Best grouping for `leader` on a Bloch-circle ensemble.
    ///
    /// Every bipartition with state 0 in the first cell is tried; a cell is
    /// admissible when the remaining parties discriminate it perfectly with
    /// `Z` and `X` measurements. Among admissible groupings the smallest
    /// closed-form error wins; ties prefer an optimal angle in `[0, π/2]`,
    /// then the lowest bitmask.
    pub fn derive(ens: &Ensemble, leader: usize) -> Result<Self> {
        if leader >= ens.arity() {
            return Err(NweError::InvalidParameter(format!(
                "leader {leader} out of range"
            )));
        }
        let circle = ens.composite.part(leader)?;
        if circle.is_polygon() {
            return Err(NweError::Unsupported(
                "θ-protocols need a Bloch-circle leader".into(),
            ));
        }
        let n = ens.len();
        if n > 20 {
            return Err(NweError::Unsupported(format!(
                "{n} states is too many for grouping enumeration"
            )));
        }
        let angles: Vec<f64> = ens
            .states
            .iter()
            .map(|s| {
                let v = s.factors[leader].vector.coords();
                v[1].atan2(v[0])
            })
            .collect();

        let mut cfg = SearchConfig::extremal(ens)?;
        cfg.allowed[leader].clear();

        let all = (1u64 << n) - 1;
        let mut best: Option<(ThetaProtocol, u64)> = None;
        for mask in (1..=all).filter(|m| m & 1 == 1) {
            let first: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let second: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
            if !perfectly_discriminable(ens, &first, &cfg)?
                || !perfectly_discriminable(ens, &second, &cfg)?
            {
                continue;
            }
            let cand = Self::from_groups(ens, leader, &angles, mask);
            let better = match &best {
                None => true,
                Some((cur, _)) => {
                    let (x, y) = (cand.closed_form_min(), cur.closed_form_min());
                    x < y - 1e-12
                        || ((x - y).abs() <= 1e-12
                            && in_first_quadrant(&cand)
                            && !in_first_quadrant(cur))
                }
            };
            if better {
                best = Some((cand, mask));
            }
        }
        best.map(|(p, _)| p).ok_or_else(|| {
            NweError::InvariantViolation(format!(
                "no admissible grouping for leader {}",
                party_letter(leader)
            ))
        })
    }
}

fn in_first_quadrant(p: &ThetaProtocol) -> bool {
    let t = p.stationary_theta();
    (-1e-12..=FRAC_PI_2 + 1e-12).contains(&t)
}

/// Error of the optimal-grouping θ-protocol at angle `theta`.
pub fn qt_perr(ens: &Ensemble, leader: usize, theta: f64) -> Result<f64> {
    Ok(ThetaProtocol::derive(ens, leader)?.error(theta))
}

/// Numeric optimum `(θ*, Δ)`: golden-section search on each quadrant of
/// `[-π, π)` (a sinusoid is unimodal on any quarter period) and the best of
/// the four.
pub fn qt_optimize(ens: &Ensemble, leader: usize) -> Result<(f64, f64)> {
    let proto = ThetaProtocol::derive(ens, leader)?;
    let f = |t: f64| proto.error(t);
    let best = (0..4)
        .map(|k| {
            let lo = -PI + k as f64 * FRAC_PI_2;
            golden_section(f, lo, lo + FRAC_PI_2, THETA_TOL)
        })
        .fold((0.0, f64::INFINITY), |acc, cur| {
            if cur.1 < acc.1 - 1e-15 {
                cur
            } else {
                acc
            }
        });
    Ok(best)
}

/// Closed-form quantum gaps for the biased three-qubit set.
pub fn qt_delta_closed(p: f64, protocol: Protocol) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(NweError::InvalidParameter(format!(
            "p must lie in (0, 1/2), got {p}"
        )));
    }
    Ok(match protocol {
        Protocol::A => 0.5 * (1.0 - (1.0 - 4.0 * p + 8.0 * p * p).sqrt()),
        Protocol::B => 0.5 * (1.0 - (5.0 + 4.0 * p + 8.0 * p * p).sqrt() / 3.0),
    })
}

/// Closed-form optimal leader angle.
pub fn qt_theta_closed(p: f64, protocol: Protocol) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(NweError::InvalidParameter(format!(
            "p must lie in (0, 1/2), got {p}"
        )));
    }
    Ok(match protocol {
        Protocol::A => (2.0 * p / (1.0 - 2.0 * p)).atan(),
        Protocol::B => ((1.0 - 2.0 * p) / (2.0 * (1.0 + p))).atan(),
    })
}

/// Pentagon gap for a protocol at bias `p`: the named leader opens with
/// the first extremal measurement and the rest of the protocol is optimal.
pub fn polygon_protocol_delta(p: f64, protocol: Protocol) -> Result<f64> {
    let ens = load(EnsembleId::S5, PriorFamily::Biased(p))?;
    let cfg = SearchConfig::extremal(&ens)?
        .with_leader(protocol.leader())
        .with_opening(0);
    Ok(optimal_local(&ens, &cfg)?.delta)
}

/// Numeric quantum gap for a protocol at bias `p`.
pub fn quantum_protocol_delta(p: f64, protocol: Protocol) -> Result<f64> {
    let ens = load(EnsembleId::Q3, PriorFamily::Biased(p))?;
    Ok(qt_optimize(&ens, protocol.leader())?.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub p: f64,
    pub delta_poly_a: f64,
    pub delta_poly_b: f64,
    pub delta_poly: f64,
    pub delta_qt_a: f64,
    pub delta_qt_b: f64,
    pub delta_qt: f64,
}

impl CurvePoint {
    pub fn at(p: f64) -> Result<Self> {
        let delta_poly_a = polygon_protocol_delta(p, Protocol::A)?;
        let delta_poly_b = polygon_protocol_delta(p, Protocol::B)?;
        let delta_qt_a = quantum_protocol_delta(p, Protocol::A)?;
        let delta_qt_b = quantum_protocol_delta(p, Protocol::B)?;
        Ok(Self {
            p,
            delta_poly_a,
            delta_poly_b,
            delta_poly: delta_poly_a.min(delta_poly_b),
            delta_qt_a,
            delta_qt_b,
            delta_qt: delta_qt_a.min(delta_qt_b),
        })
    }

    /// `delta_poly - delta_qt`.
    pub fn gap(&self) -> f64 {
        self.delta_poly - self.delta_qt
    }
}

/// `steps` evenly spaced points from `p_min` to `p_max` inclusive.
pub fn curve(p_min: f64, p_max: f64, steps: usize) -> Result<Vec<CurvePoint>> {
    if !(p_min > 0.0 && p_min < p_max && p_max < 0.5) {
        return Err(NweError::InvalidParameter(format!(
            "need 0 < p_min < p_max < 1/2, got [{p_min}, {p_max}]"
        )));
    }
    if steps < 2 {
        return Err(NweError::InvalidParameter(
            "curve needs at least two steps".into(),
        ));
    }
    let h = (p_max - p_min) / (steps - 1) as f64;
    (0..steps)
        .map(|k| {
            let p = if k == steps - 1 {
                p_max
            } else {
                p_min + k as f64 * h
            };
            CurvePoint::at(p)
        })
        .collect()
}

/// Bias at which pentagon protocols (a) and (b) tie, by bisection on
/// `[lo, hi]`.
pub fn polygon_crossover(lo: f64, hi: f64, tol: f64) -> Result<Option<f64>> {
    let diff = |p: f64| -> Result<f64> {
        Ok(polygon_protocol_delta(p, Protocol::A)? - polygon_protocol_delta(p, Protocol::B)?)
    };
    // Surface engine errors before bisecting on a plain closure.
    diff(lo)?;
    diff(hi)?;
    Ok(bisect(|p| diff(p).unwrap_or(f64::NAN), lo, hi, tol))
}

pub const CSV_HEADER: &str =
    "p,delta_poly_a,delta_poly_b,delta_poly,delta_qt_a,delta_qt_b,delta_qt";

pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for pt in points {
        let cells = [
            pt.p,
            pt.delta_poly_a,
            pt.delta_poly_b,
            pt.delta_poly,
            pt.delta_qt_a,
            pt.delta_qt_b,
            pt.delta_qt,
        ];
        let row: Vec<String> = cells.iter().map(|&v| sig10(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3(priors: PriorFamily) -> Ensemble {
        load(EnsembleId::Q3, priors).unwrap()
    }

    #[test]
    fn uniform_alice_matches_closed_form() {
        let ens = q3(PriorFamily::Uniform);
        for theta in [0.0, 0.3, 1.0, FRAC_PI_2] {
            let expected =
                0.125 * 2.0 * (3.0 * 0.5 * (1.0 - f64::cos(theta)) + 0.5 * (1.0 - f64::sin(theta)));
            assert!((qt_perr(&ens, 0, theta).unwrap() - expected).abs() < 1e-12);
        }
        assert!((qt_perr(&ens, 0, 0.0).unwrap() - 0.125).abs() < 1e-15);
        let (theta, delta) = qt_optimize(&ens, 0).unwrap();
        assert!((theta - (1.0f64 / 3.0).atan()).abs() < 1e-7);
        assert!((delta - (4.0 - 10f64.sqrt()) / 8.0).abs() < 1e-9);
    }

    #[test]
    fn alice_grouping() {
        let proto = ThetaProtocol::derive(&q3(PriorFamily::Uniform), 0).unwrap();
        assert_eq!(proto.first, vec![0, 2, 4, 5]);
        assert_eq!(proto.second, vec![1, 3, 6, 7]);
    }

    #[test]
    fn biased_numeric_matches_closed_forms() {
        for p in [0.03, 0.125, 0.2, 0.37, 0.48] {
            for prot in [Protocol::A, Protocol::B] {
                let ens = q3(PriorFamily::Biased(p));
                let (theta, d) = qt_optimize(&ens, prot.leader()).unwrap();
                assert!(
                    (d - qt_delta_closed(p, prot).unwrap()).abs() < 1e-9,
                    "{p} {prot}"
                );
                assert!(
                    (theta - qt_theta_closed(p, prot).unwrap()).abs() < 1e-6,
                    "{p} {prot}"
                );
            }
        }
    }

    #[test]
    fn closed_form_edge_values() {
        let uniform = (4.0 - 10f64.sqrt()) / 8.0;
        assert!((qt_delta_closed(0.125, Protocol::A).unwrap() - uniform).abs() < 1e-12);
        assert!((qt_delta_closed(0.125, Protocol::B).unwrap() - uniform).abs() < 1e-12);
        assert!(
            (qt_delta_closed(1e-12, Protocol::B).unwrap() - 0.5 * (1.0 - 5f64.sqrt() / 3.0)).abs()
                < 1e-9
        );
        assert!(qt_delta_closed(0.5, Protocol::A).is_err());
        assert!(qt_delta_closed(0.0, Protocol::B).is_err());
    }

    #[test]
    fn curve_shape_and_csv() {
        let pts = curve(0.1, 0.15, 3).unwrap();
        assert_eq!(pts.len(), 3);
        assert!((pts[1].p - 0.125).abs() < 1e-15);
        assert!((pts[1].delta_poly_a - 0.125).abs() < 1e-9);
        assert!((pts[1].delta_poly_b - 0.125).abs() < 1e-9);
        assert!(pts.iter().all(|pt| pt.delta_qt < pt.delta_poly));
        let csv = curve_to_csv(&pts);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(curve(0.3, 0.2, 4).is_err());
        assert!(curve(0.1, 0.2, 1).is_err());
    }
}
