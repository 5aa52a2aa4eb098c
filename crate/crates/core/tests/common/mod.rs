//! Brute-force reference for small local-discrimination instances.
//!
//! Enumerates every protocol tree explicitly and scores it straight from
//! the raw vectors, sharing no code with the library's solvers.

#![allow(dead_code)]

use nwe_core::{Ensemble, SearchConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// `lik[party][measurement][outcome][state]`.
pub type Table = Vec<Vec<Vec<Vec<f64>>>>;

pub fn likelihoods(ens: &Ensemble, cfg: &SearchConfig) -> Table {
    cfg.allowed
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
                                    let ev = e.vector.coords();
                                    let sv = s.factors[a].vector.coords();
                                    ev.iter().zip(sv).map(|(x, y)| x * y).sum::<f64>().max(0.0)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum Tree {
    Leaf(usize),
    Node(usize, usize, Vec<Tree>),
}

/// Every tree using each party in `remaining` at most once.
pub fn all_trees(lik: &Table, n_states: usize, remaining: &[usize]) -> Vec<Tree> {
    let mut out: Vec<Tree> = (0..n_states).map(Tree::Leaf).collect();
    for &a in remaining {
        let rest: Vec<usize> = remaining.iter().copied().filter(|&b| b != a).collect();
        let subtrees = all_trees(lik, n_states, &rest);
        for (m, per_outcome) in lik[a].iter().enumerate() {
            let outcomes = per_outcome.len();
            let mut idx = vec![0usize; outcomes];
            loop {
                out.push(Tree::Node(
                    a,
                    m,
                    idx.iter().map(|&k| subtrees[k].clone()).collect(),
                ));
                let mut pos = 0;
                while pos < outcomes {
                    idx[pos] += 1;
                    if idx[pos] < subtrees.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == outcomes {
                    break;
                }
            }
        }
    }
    out
}

pub fn bayes_score(t: &Tree, lik: &Table, priors: &[f64]) -> f64 {
    (0..priors.len())
        .map(|i| priors[i] * reach(t, lik, i))
        .sum()
}

fn reach(t: &Tree, lik: &Table, i: usize) -> f64 {
    match t {
        Tree::Leaf(g) => {
            if *g == i {
                1.0
            } else {
                0.0
            }
        }
        Tree::Node(a, m, ch) => ch
            .iter()
            .enumerate()
            .map(|(o, c)| lik[*a][*m][o][i] * reach(c, lik, i))
            .sum(),
    }
}

pub fn elim_score(t: &Tree, lik: &Table, priors: &[f64], eps: f64) -> f64 {
    (0..priors.len())
        .filter(|&i| sure(t, lik, i, eps))
        .map(|i| priors[i])
        .sum()
}

fn sure(t: &Tree, lik: &Table, i: usize, eps: f64) -> bool {
    match t {
        Tree::Leaf(g) => *g == i,
        Tree::Node(a, m, ch) => ch
            .iter()
            .enumerate()
            .all(|(o, c)| lik[*a][*m][o][i] <= eps || sure(c, lik, i, eps)),
    }
}

/// Best `(bayesian, eliminative)` success over all trees, optionally
/// restricted to a root party.
pub fn brute_force(ens: &Ensemble, cfg: &SearchConfig, root: Option<usize>) -> (f64, f64) {
    let lik = likelihoods(ens, cfg);
    let parties: Vec<usize> = (0..ens.arity()).collect();
    let trees = all_trees(&lik, ens.len(), &parties);
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for t in &trees {
        if let Some(r) = root {
            if !matches!(t, Tree::Node(a, _, _) if *a == r) {
                continue;
            }
        }
        best.0 = best.0.max(bayes_score(t, &lik, &ens.priors));
        best.1 = best.1.max(elim_score(t, &lik, &ens.priors, cfg.eps));
    }
    best
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random priors summing to one.
pub fn random_priors(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}
