use std::collections::HashMap;

use super::{Likelihoods, ProtocolTree, SearchConfig, TIE_TOL};
use crate::catalog::Ensemble;
use crate::error::{NweError, Result};

/// Solver for the eliminative model.
///
/// A set `T` of states is locally perfect from `remaining` parties if it has
/// at most one member, or some allowed move splits it into outcome supports
/// `T ∩ supp(o)` that are each locally perfect from the remaining parties.
/// States with fractional likelihood fall into several supports. Perfection
/// is monotone under taking subsets, which the max-weight search exploits.
pub(super) struct Eliminator<'a> {
    cfg: &'a SearchConfig,
    /// `supports[party][measurement][outcome]` as state bitmasks.
    supports: Vec<Vec<Vec<u64>>>,
    priors: Vec<f64>,
    arity: usize,
    memo: HashMap<(u64, u32), bool>,
    work: u128,
}

impl<'a> Eliminator<'a> {
    pub(super) fn new(ens: &Ensemble, cfg: &'a SearchConfig, lik: &Likelihoods) -> Result<Self> {
        if ens.len() > 64 {
            return Err(NweError::Unsupported(format!(
                "eliminative search handles at most 64 states, got {}",
                ens.len()
            )));
        }
        let supports = cfg
            .allowed
            .iter()
            .enumerate()
            .map(|(a, list)| {
                (0..list.len())
                    .map(|m| {
                        (0..lik.outcomes(a, m).unwrap_or(0))
                            .map(|o| {
                                lik.get(a, m, o)
                                    .iter()
                                    .enumerate()
                                    .filter(|(_, &p)| p > cfg.eps)
                                    .fold(0u64, |mask, (i, _)| mask | (1 << i))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            cfg,
            supports,
            priors: ens.priors.clone(),
            arity: ens.arity(),
            memo: HashMap::new(),
            work: 0,
        })
    }

    fn full(&self) -> u32 {
        (1u32 << self.arity) - 1
    }

    fn tick(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > self.cfg.node_bound {
            return Err(NweError::SearchSpaceTooLarge {
                estimated: self.work,
                bound: self.cfg.node_bound,
            });
        }
        Ok(())
    }

    fn splits(&mut self, set: u64, party: usize, m: usize, remaining: u32) -> Result<bool> {
        let rest = remaining & !(1 << party);
        for o in 0..self.supports[party][m].len() {
            let part = set & self.supports[party][m][o];
            if !self.perfect(part, rest)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn perfect(&mut self, set: u64, remaining: u32) -> Result<bool> {
        if set.count_ones() <= 1 {
            return Ok(true);
        }
        if let Some(&v) = self.memo.get(&(set, remaining)) {
            return Ok(v);
        }
        self.tick()?;
        let mut found = false;
        for (a, m) in self.cfg.moves(remaining, false) {
            if self.splits(set, a, m, remaining)? {
                found = true;
                break;
            }
        }
        self.memo.insert((set, remaining), found);
        Ok(found)
    }

    /// Perfection with the leader and opening constraints applied.
    pub(super) fn root_perfect(&mut self, set: u64) -> Result<bool> {
        if set.count_ones() <= 1 {
            return Ok(true);
        }
        if self.cfg.leader.is_none() {
            let full = self.full();
            return self.perfect(set, full);
        }
        let full = self.full();
        for (a, m) in self.cfg.moves(full, true) {
            if self.splits(set, a, m, full)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Max-weight locally perfect subset and a protocol that realizes it.
    pub(super) fn solve(&mut self) -> Result<(f64, ProtocolTree, u64)> {
        let n = self.priors.len();
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + self.priors[i];
        }
        let mut best = (f64::NEG_INFINITY, 0u64);
        self.search(0, 0, 0.0, &suffix, &mut best)?;
        let everyone = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let full = self.full();
        let tree = self.build(best.1, everyone, full, true)?;
        Ok((best.0, tree, best.1))
    }

    fn search(
        &mut self,
        i: usize,
        set: u64,
        weight: f64,
        suffix: &[f64],
        best: &mut (f64, u64),
    ) -> Result<()> {
        if weight > best.0 + TIE_TOL {
            *best = (weight, set);
        }
        if i == self.priors.len() || weight + suffix[i] <= best.0 + TIE_TOL {
            return Ok(());
        }
        let with = set | (1 << i);
        if self.root_perfect(with)? {
            self.search(i + 1, with, weight + self.priors[i], suffix, best)?;
        }
        self.search(i + 1, set, weight, suffix, best)
    }

    /// Protocol that discriminates `target`; `alive` tracks every state still
    /// compatible with the outcomes so far, for guesses at empty leaves.
    fn build(
        &mut self,
        target: u64,
        alive: u64,
        remaining: u32,
        root: bool,
    ) -> Result<ProtocolTree> {
        let forced = root && self.cfg.leader.is_some();
        if target.count_ones() <= 1 && !forced {
            return Ok(ProtocolTree::leaf(guess(target, alive)));
        }
        for (a, m) in self.cfg.moves(remaining, root) {
            if target.count_ones() <= 1 || self.splits(target, a, m, remaining)? {
                let rest = remaining & !(1 << a);
                let outcomes = self.supports[a][m].clone();
                let children = outcomes
                    .iter()
                    .map(|&sup| self.build(target & sup, alive & sup, rest, false))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(ProtocolTree::node(a, m, children));
            }
        }
        Err(NweError::MalformedTree(format!(
            "no move discriminates state set {target:#b}"
        )))
    }
}

fn guess(target: u64, alive: u64) -> usize {
    if target != 0 {
        target.trailing_zeros() as usize
    } else if alive != 0 {
        alive.trailing_zeros() as usize
    } else {
        0
    }
}
