//! Minimal tensor product composites.
//!
//! Composite states and effects are kept in factored form, one vector per
//! party. The Kronecker product is only materialized for completeness
//! checks and cross-validation.

use std::sync::Arc;

use crate::error::{NweError, Result};
use crate::gpt::{Effect, GptSystem, RealVec, State, COMPLETENESS_TOL};

/// Kronecker product of a nonempty list of vectors.
pub fn kron(vectors: &[&RealVec]) -> Result<RealVec> {
    let (first, rest) = vectors
        .split_first()
        .ok_or(NweError::Empty("kron needs at least one vector"))?;
    let mut out: Vec<f64> = first.coords().to_vec();
    for v in rest {
        out = out
            .iter()
            .flat_map(|a| v.coords().iter().map(move |b| a * b))
            .collect();
    }
    Ok(RealVec::from_raw(out))
}

/// Ordered parties of a minimal-tensor-product composite.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSystem {
    parts: Vec<Arc<GptSystem>>,
}

impl CompositeSystem {
    pub fn new(parts: Vec<Arc<GptSystem>>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(NweError::InvalidParameter(format!(
                "a composite needs at least two parties, got {}",
                parts.len()
            )));
        }
        Ok(Self { parts })
    }

    /// `arity` copies of the same elementary system.
    pub fn homogeneous(system: GptSystem, arity: usize) -> Result<Self> {
        let shared = Arc::new(system);
        Self::new(vec![shared; arity])
    }

    pub fn arity(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Arc<GptSystem>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> Result<&GptSystem> {
        self.parts
            .get(i)
            .map(|p| p.as_ref())
            .ok_or(NweError::IndexOutOfRange {
                index: i,
                len: self.parts.len(),
            })
    }

    /// `u ⊗ u ⊗ … ⊗ u` over all parties.
    pub fn unit_product(&self) -> RealVec {
        let units: Vec<&RealVec> = self.parts.iter().map(|p| &p.unit().vector).collect();
        kron(&units).expect("composite has at least two parties")
    }

    /// True iff the Kronecker sum of the measurement's effects equals the
    /// product of unit effects within 1e-12 per component.
    pub fn check_complete(&self, m: &SeparableMeasurement) -> bool {
        self.completeness_residual(m)
            .map(|r| r <= COMPLETENESS_TOL)
            .unwrap_or(false)
    }

    /// Largest componentwise deviation of `Σ E_i` from the unit product.
    pub fn completeness_residual(&self, m: &SeparableMeasurement) -> Result<f64> {
        let mut sum = vec![0.0; self.unit_product().len()];
        for e in &m.effects {
            if e.arity() != self.arity() {
                return Err(NweError::ArityMismatch {
                    expected: self.arity(),
                    got: e.arity(),
                });
            }
            let v = e.kron()?;
            if v.len() != sum.len() {
                return Err(NweError::DimensionMismatch {
                    expected: sum.len(),
                    got: v.len(),
                });
            }
            for (s, x) in sum.iter_mut().zip(v.coords()) {
                *s += x;
            }
        }
        RealVec::from_raw(sum).max_abs_diff(&self.unit_product())
    }
}

/// `ω_A ⊗ ω_B ⊗ …` stored factorwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub factors: Vec<State>,
}

impl ProductState {
    pub fn new(factors: Vec<State>) -> Self {
        Self { factors }
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn label(&self) -> String {
        join_labels(self.factors.iter().map(|f| f.label.as_str()))
    }

    pub fn kron(&self) -> Result<RealVec> {
        let v: Vec<&RealVec> = self.factors.iter().map(|f| &f.vector).collect();
        kron(&v)
    }
}

/// `e_A ⊗ e_B ⊗ …` stored factorwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductEffect {
    pub factors: Vec<Effect>,
}

impl ProductEffect {
    pub fn new(factors: Vec<Effect>) -> Self {
        Self { factors }
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn label(&self) -> String {
        join_labels(self.factors.iter().map(|f| f.label.as_str()))
    }

    pub fn kron(&self) -> Result<RealVec> {
        let v: Vec<&RealVec> = self.factors.iter().map(|f| &f.vector).collect();
        kron(&v)
    }
}

/// A measurement whose effects are all product effects.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableMeasurement {
    pub effects: Vec<ProductEffect>,
}

impl SeparableMeasurement {
    pub fn new(effects: Vec<ProductEffect>) -> Self {
        Self { effects }
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Effect labels, sorted, for comparisons up to relabeling.
    pub fn sorted_labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self.effects.iter().map(|e| e.label()).collect();
        l.sort();
        l
    }
}

fn join_labels<'a>(labels: impl Iterator<Item = &'a str>) -> String {
    labels.collect::<Vec<_>>().join("⊗")
}

/// `p(E|φ)` as the product of per-party probabilities.
pub fn product_prob(effect: &ProductEffect, state: &ProductState) -> Result<f64> {
    if effect.arity() != state.arity() {
        return Err(NweError::ArityMismatch {
            expected: state.arity(),
            got: effect.arity(),
        });
    }
    effect
        .factors
        .iter()
        .zip(&state.factors)
        .try_fold(1.0, |acc, (e, s)| {
            let v = e.vector.dot(&s.vector)?;
            if !(-crate::gpt::DEFAULT_EPS..=1.0 + crate::gpt::DEFAULT_EPS).contains(&v) {
                return Err(NweError::InvalidEffectStatePair { value: v });
            }
            Ok(acc * v)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec3(a: f64, b: f64, c: f64) -> RealVec {
        RealVec::new(vec![a, b, c]).unwrap()
    }

    #[test]
    fn kron_shapes() {
        let u = vec3(0.0, 0.0, 1.0);
        let k = kron(&[&u, &u]).unwrap();
        assert_eq!(k.len(), 9);
        assert_eq!(k.coords()[8], 1.0);
        assert_eq!(k.coords().iter().filter(|&&x| x != 0.0).count(), 1);
        assert!(matches!(kron(&[]), Err(NweError::Empty(_))));
        let a = RealVec::new(vec![1.0, 2.0]).unwrap();
        let b = RealVec::new(vec![3.0, 4.0, 5.0]).unwrap();
        assert_eq!(
            kron(&[&a, &b]).unwrap().coords(),
            &[3.0, 4.0, 5.0, 6.0, 8.0, 10.0]
        );
    }

    #[test]
    fn kron_matches_factor_probabilities() {
        let sq = GptSystem::polygon(4).unwrap();
        let w0 = &sq.pure_state(0).unwrap().vector;
        let e0 = &sq.ray_effect(0).unwrap().vector;
        let v = kron(&[w0, w0])
            .unwrap()
            .dot(&kron(&[e0, e0]).unwrap())
            .unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let pg = GptSystem::polygon(5).unwrap();
        let e = kron(&[
            &pg.ray_effect(0).unwrap().vector,
            &pg.complement(0).unwrap().vector,
        ])
        .unwrap();
        let w = kron(&[
            &pg.pure_state(0).unwrap().vector,
            &pg.pure_state(2).unwrap().vector,
        ])
        .unwrap();
        assert!((e.dot(&w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_prob_factorwise() {
        let pg = GptSystem::polygon(5).unwrap();
        let e0 = pg.ray_effect(0).unwrap().clone();
        let eff = ProductEffect::new(vec![e0.clone(), e0.clone(), e0]);
        let st = |i: usize, j: usize, k: usize| {
            ProductState::new(vec![
                pg.pure_state(i).unwrap().clone(),
                pg.pure_state(j).unwrap().clone(),
                pg.pure_state(k).unwrap().clone(),
            ])
        };
        assert!((product_prob(&eff, &st(0, 0, 0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(product_prob(&eff, &st(4, 0, 2)).unwrap().abs() < 1e-12);

        let short = ProductEffect::new(eff.factors[..2].to_vec());
        assert!(matches!(
            product_prob(&short, &st(0, 0, 0)),
            Err(NweError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn composite_needs_two_parties() {
        assert!(CompositeSystem::homogeneous(GptSystem::polygon(5).unwrap(), 1).is_err());
        let c = CompositeSystem::homogeneous(GptSystem::polygon(5).unwrap(), 3).unwrap();
        assert_eq!(c.arity(), 3);
        assert_eq!(c.unit_product().len(), 27);
    }
}
