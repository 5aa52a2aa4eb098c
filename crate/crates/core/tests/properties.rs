mod common;

use nwe_core::catalog::{load, EnsembleId, PriorFamily};
use nwe_core::composition::ProductState;
use nwe_core::discrimination::{eval_tree, optimal_local, InferenceModel, SearchConfig};
use nwe_core::gpt::GptSystem;
use nwe_core::quantum::{qt_delta_closed, qt_optimize, Protocol, ThetaProtocol};
use nwe_core::signaling::{certify_polygon, in_classical_polytope, Channel, Membership};
use nwe_core::Ensemble;
use proptest::prelude::*;

const MODELS: [InferenceModel; 2] = [InferenceModel::Eliminative, InferenceModel::Bayesian];

fn success(ens: &Ensemble, cfg: &SearchConfig) -> f64 {
    optimal_local(ens, cfg).unwrap().success
}

fn biased(id: EnsembleId, p: f64) -> Ensemble {
    load(id, PriorFamily::Biased(p)).unwrap()
}

#[test]
fn more_measurements_never_hurt() {
    let ens = load(EnsembleId::S5, PriorFamily::Uniform).unwrap();
    let full = SearchConfig::extremal(&ens).unwrap();
    let mut two = full.clone();
    for list in &mut two.allowed {
        list.truncate(2);
    }
    for model in MODELS {
        let s2 = success(&ens, &two.clone().with_model(model));
        let s5 = success(&ens, &full.clone().with_model(model));
        assert!(s5 >= s2 - 1e-12, "{model}: {s5} < {s2}");
    }
}

#[test]
fn biased_polygon_values() {
    for p in [0.05, 0.125, 0.2, 0.3, 0.45] {
        let ens = biased(EnsembleId::S5, p);
        let cfg = SearchConfig::extremal(&ens).unwrap();
        let alice = optimal_local(&ens, &cfg.clone().with_leader(0).with_opening(0))
            .unwrap()
            .delta;
        assert!((alice - p).abs() < 1e-9, "p={p}: alice {alice}");
        for other in [1, 2] {
            let d = optimal_local(&ens, &cfg.clone().with_leader(other).with_opening(0))
                .unwrap()
                .delta;
            assert!(
                (d - (1.0 - 2.0 * p) / 6.0).abs() < 1e-9,
                "p={p}: leader {other} gives {d}"
            );
        }
        let free = optimal_local(&ens, &cfg).unwrap().delta;
        assert!((free - p.min((1.0 - 2.0 * p) / 6.0)).abs() < 1e-9);
    }
}

#[test]
fn alice_opening_protocol_replays() {
    let ens = load(EnsembleId::S5, PriorFamily::Uniform).unwrap();
    let cfg = SearchConfig::extremal(&ens)
        .unwrap()
        .with_leader(0)
        .with_opening(0);
    let r = optimal_local(&ens, &cfg).unwrap();
    assert_eq!(r.tree.root_party(), Some(0));
    assert!((eval_tree(&r.tree, &ens, &cfg).unwrap() - 0.875).abs() < 1e-12);
    // The Bayesian score of the same tree is at least as large.
    let b = eval_tree(
        &r.tree,
        &ens,
        &cfg.clone().with_model(InferenceModel::Bayesian),
    )
    .unwrap();
    assert!(b >= 0.875 - 1e-12);
}

#[test]
fn fixed_order_is_no_better_than_adaptive() {
    for id in [EnsembleId::S5, EnsembleId::S6] {
        let ens = load(id, PriorFamily::Uniform).unwrap();
        let cfg = SearchConfig::extremal(&ens).unwrap();
        for model in MODELS {
            let adaptive = success(&ens, &cfg.clone().with_model(model));
            let fixed = success(&ens, &cfg.clone().with_model(model).fixed_order());
            assert!(fixed <= adaptive + 1e-12);
        }
    }
}

#[test]
fn one_state_has_no_gap() {
    let ens = load(EnsembleId::S5, PriorFamily::Uniform)
        .unwrap()
        .subset(&[3])
        .unwrap();
    let cfg = SearchConfig::extremal(&ens).unwrap();
    let d = nwe_core::delta(&ens, &cfg).unwrap();
    assert_eq!(d.delta, 0.0);
    assert!(d.global_perfect);
}

#[test]
fn groupings_are_locally_perfect() {
    for prior in [PriorFamily::Uniform, PriorFamily::Biased(0.3)] {
        let ens = load(EnsembleId::Q3, prior).unwrap();
        for leader in 0..3 {
            let proto = ThetaProtocol::derive(&ens, leader).unwrap();
            for cell in [&proto.first, &proto.second] {
                let sub = ens.subset(cell).unwrap();
                let mut cfg = SearchConfig::extremal(&sub).unwrap();
                cfg.allowed[leader].clear();
                for model in MODELS {
                    let s = success(&sub, &cfg.clone().with_model(model));
                    assert!(
                        (s - 1.0).abs() < 1e-12,
                        "leader {leader}, cell {cell:?}: {s}"
                    );
                }
            }
        }
    }
}

#[test]
fn stationarity_matches_numeric_optimum() {
    for p in [0.02, 0.125, 0.33] {
        let ens = load(EnsembleId::Q3, PriorFamily::Biased(p)).unwrap();
        for leader in 0..2 {
            let proto = ThetaProtocol::derive(&ens, leader).unwrap();
            let (theta, _) = qt_optimize(&ens, leader).unwrap();
            assert!((theta - proto.b.atan2(proto.a)).abs() < 1e-7);
            assert!(proto.a > 0.0 && proto.b > 0.0);
        }
    }
}

#[test]
fn one_eighth_collapses_all_formulas() {
    let uniform = (4.0 - 10f64.sqrt()) / 8.0;
    for prot in [Protocol::A, Protocol::B] {
        assert!((qt_delta_closed(0.125, prot).unwrap() - uniform).abs() < 1e-12);
    }
    let ens = load(EnsembleId::Q3, PriorFamily::Biased(0.125)).unwrap();
    for leader in 0..2 {
        assert!((qt_optimize(&ens, leader).unwrap().1 - uniform).abs() < 1e-12);
    }
}

#[test]
fn numeric_matches_closed_on_fifty_biases() {
    for k in 0..50 {
        let p = 0.005 + 0.49 * k as f64 / 50.0;
        let ens = load(EnsembleId::Q3, PriorFamily::Biased(p)).unwrap();
        for prot in [Protocol::A, Protocol::B] {
            let d = qt_optimize(&ens, prot.leader()).unwrap().1;
            assert!(
                (d - qt_delta_closed(p, prot).unwrap()).abs() <= 1e-9,
                "p={p} {prot}"
            );
        }
    }
}

#[test]
fn polygon_channels_are_two_simulable() {
    for n in 4..=7 {
        for m in 1..=4 {
            let r = certify_polygon(n, m, 2, 2).unwrap();
            assert!(r.all_inside(), "n={n} m={m}");
            assert!(r.max_residual <= 1e-7);
        }
    }
}

#[test]
fn polygon_invariants_hold_for_many_orders() {
    for n in 3..=12 {
        GptSystem::polygon(n).unwrap().check_invariants().unwrap();
    }
}

fn rotate_parties(ens: &Ensemble, shift: usize) -> Ensemble {
    let k = ens.arity();
    let states = ens
        .states
        .iter()
        .map(|s| ProductState::new((0..k).map(|a| s.factors[(a + shift) % k].clone()).collect()))
        .collect();
    Ensemble::new(ens.composite.clone(), states, ens.priors.clone()).unwrap()
}

fn arb_channel() -> impl Strategy<Value = Channel> {
    (1usize..=3, 2usize..=3).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), m).prop_map(|rows| {
            Channel::new(
                rows.into_iter()
                    .map(|r| {
                        let s: f64 = r.iter().sum();
                        let mut r: Vec<f64> = r.into_iter().map(|v| v / s).collect();
                        let tail: f64 = r[..r.len() - 1].iter().sum();
                        *r.last_mut().unwrap() = 1.0 - tail;
                        r
                    })
                    .collect(),
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn party_rotation_preserves_optimum(
        which in 0usize..3,
        shift in 1usize..3,
        raw in prop::collection::vec(0.05f64..1.0, 8),
        bayes in any::<bool>(),
    ) {
        let id = [EnsembleId::S5, EnsembleId::S6, EnsembleId::S7][which];
        let total: f64 = raw.iter().sum();
        let priors: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let ens = load(id, PriorFamily::Uniform).unwrap().with_priors(priors).unwrap();
        let model = if bayes { InferenceModel::Bayesian } else { InferenceModel::Eliminative };
        let cfg = SearchConfig::extremal(&ens).unwrap().with_model(model);
        let rotated = rotate_parties(&ens, shift);
        let a = success(&ens, &cfg);
        let b = success(&rotated, &cfg);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn optimum_is_bracketed(
        which in 0usize..5,
        raw in prop::collection::vec(0.05f64..1.0, 8),
        bayes in any::<bool>(),
    ) {
        let id = EnsembleId::ALL[which];
        let base = load(id, PriorFamily::Uniform).unwrap();
        let n = base.len();
        let total: f64 = raw[..n].iter().sum();
        let ens = base.with_priors(raw[..n].iter().map(|v| v / total).collect()).unwrap();
        let model = if bayes { InferenceModel::Bayesian } else { InferenceModel::Eliminative };
        let s = success(&ens, &SearchConfig::extremal(&ens).unwrap().with_model(model));
        prop_assert!(s >= ens.max_prior() - 1e-12 && s <= 1.0 + 1e-12);
    }

    #[test]
    fn bayesian_dominates_eliminative(which in 0usize..5, raw in prop::collection::vec(0.05f64..1.0, 8)) {
        let base = load(EnsembleId::ALL[which], PriorFamily::Uniform).unwrap();
        let n = base.len();
        let total: f64 = raw[..n].iter().sum();
        let ens = base.with_priors(raw[..n].iter().map(|v| v / total).collect()).unwrap();
        let cfg = SearchConfig::extremal(&ens).unwrap();
        let e = success(&ens, &cfg);
        let b = success(&ens, &cfg.clone().with_model(InferenceModel::Bayesian));
        prop_assert!(b >= e - 1e-12);
    }

    #[test]
    fn leader_constraint_matches_oracle(seed in any::<u64>(), leader in 0usize..2) {
        let mut rng = common::rng(seed);
        let base = load(EnsembleId::S4, PriorFamily::Uniform).unwrap();
        let ens = base.clone().with_priors(common::random_priors(&mut rng, 4)).unwrap();
        let cfg = SearchConfig::extremal(&ens).unwrap().with_leader(leader);
        let (b, e) = common::brute_force(&ens, &cfg, Some(leader));
        prop_assert!((success(&ens, &cfg) - e).abs() < 1e-12);
        prop_assert!((success(&ens, &cfg.clone().with_model(InferenceModel::Bayesian)) - b).abs() < 1e-12);
    }

    #[test]
    fn membership_is_monotone_in_d(ch in arb_channel()) {
        let top = ch.inputs().min(ch.outputs());
        let mut was_inside = false;
        for d in 1..=top {
            match in_classical_polytope(&ch, d) {
                Ok(Membership::Inside(cert)) => {
                    prop_assert!(cert.residual <= 1e-7);
                    let total: f64 = cert.terms.iter().map(|(_, w)| w).sum();
                    prop_assert!((total - 1.0).abs() < 1e-9);
                    was_inside = true;
                }
                Ok(Membership::Outside(w)) => {
                    prop_assert!(!was_inside);
                    prop_assert!(w.violation() >= 1e-9);
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
        prop_assert!(was_inside, "d = min(m, n) must suffice");
    }

    #[test]
    fn bloch_probabilities_are_cosines(theta in -10.0f64..10.0, phi in -10.0f64..10.0) {
        let circle = GptSystem::bloch_circle();
        let e = circle.effect_at(theta).unwrap();
        let s = circle.state_at(phi).unwrap();
        let p = circle.prob(&e.vector, &s.vector).unwrap();
        prop_assert!((p - 0.5 * (1.0 + (theta - phi).cos())).abs() < 1e-12);
    }
}
