use super::{Likelihoods, ProtocolTree, SearchConfig, TIE_TOL};
use crate::catalog::Ensemble;
use crate::error::{NweError, Result};

/// Exhaustive recursion over unnormalized likelihood weights.
pub(super) struct BayesSolver<'a> {
    cfg: &'a SearchConfig,
    lik: &'a Likelihoods,
    priors: Vec<f64>,
    arity: usize,
}

impl<'a> BayesSolver<'a> {
    pub(super) fn new(ens: &Ensemble, cfg: &'a SearchConfig, lik: &'a Likelihoods) -> Result<Self> {
        let solver = Self {
            cfg,
            lik,
            priors: ens.priors.clone(),
            arity: ens.arity(),
        };
        let estimated = solver.estimate((1u32 << solver.arity) - 1, true);
        if estimated > cfg.node_bound {
            return Err(NweError::SearchSpaceTooLarge {
                estimated,
                bound: cfg.node_bound,
            });
        }
        Ok(solver)
    }

    /// Upper bound on recursion nodes.
    fn estimate(&self, remaining: u32, root: bool) -> u128 {
        let mut total: u128 = 1;
        for (a, m) in self.cfg.moves(remaining, root) {
            let outcomes = self.lik.outcomes(a, m).unwrap_or(0) as u128;
            total = total.saturating_add(
                outcomes.saturating_mul(self.estimate(remaining & !(1 << a), false)),
            );
        }
        total
    }

    pub(super) fn solve(&self) -> Result<(f64, ProtocolTree)> {
        let full = (1u32 << self.arity) - 1;
        Ok(self.value(&self.priors.clone(), full, true))
    }

    fn value(&self, weights: &[f64], remaining: u32, root: bool) -> (f64, ProtocolTree) {
        let (leaf_value, guess) = argmax(weights);
        let forced = root && self.cfg.leader.is_some();
        let mut best: Option<(f64, ProtocolTree)> = if forced {
            None
        } else {
            Some((leaf_value, ProtocolTree::leaf(guess)))
        };

        for (a, m) in self.cfg.moves(remaining, root) {
            let rest = remaining & !(1 << a);
            let n_out = self.lik.outcomes(a, m).unwrap_or(0);
            let mut total = 0.0;
            let mut children = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let col = self.lik.get(a, m, o);
                let next: Vec<f64> = weights.iter().zip(col).map(|(w, l)| w * l).collect();
                if next.iter().all(|&w| w <= 0.0) {
                    children.push(ProtocolTree::leaf(0));
                    continue;
                }
                let (v, t) = self.value(&next, rest, false);
                total += v;
                children.push(t);
            }
            let improves = match &best {
                None => true,
                Some((b, _)) => total > b + TIE_TOL,
            };
            if improves {
                best = Some((total, ProtocolTree::node(a, m, children)));
            }
        }
        best.unwrap_or((leaf_value, ProtocolTree::leaf(guess)))
    }
}

/// Largest weight and the lowest index attaining it.
fn argmax(weights: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &w) in weights.iter().enumerate() {
        if w > best.0 + TIE_TOL {
            best = (w, i);
        }
    }
    best
}
