//! Exact laws against simulation and against each other.

use levydraw::exact::{tail_exp_horizons, tail_exp_q_infinite_s, underline_ustar_fixed_t};
use levydraw::model::{JumpComponent, LevyModel};
use levydraw::sim::mc::{occupation_atom, representation_exponential_tails, sample_exponential_horizons, SimConfig};
use levydraw::sim::FunctionalKind;
use proptest::prelude::*;

/// Negative mean, for the future-drawup kinds.
fn jump_model() -> LevyModel {
    LevyModel::new(0.2, 0.4, None, Some(JumpComponent::exponential(1.0, 0.5))).unwrap()
}

/// Positive mean, for the future-drawdown kinds.
fn rising_model() -> LevyModel {
    LevyModel::new(0.8, 0.4, None, Some(JumpComponent::exponential(1.0, 0.5))).unwrap()
}

fn model_for(kind: FunctionalKind) -> LevyModel {
    if kind.is_future_drawdown() {
        rising_model()
    } else {
        jump_model()
    }
}

#[test]
fn underline_atom_matches_occupation_time() {
    let m = LevyModel::brownian(-0.5, 1.0).unwrap();
    let t = 1.0;
    let atom = 1.0 - underline_ustar_fixed_t(&m, t, 0.0).unwrap();
    let est = occupation_atom(&m, t, 4000, 21, &SimConfig::default()).unwrap();
    assert!(est.agrees_with(atom, 4.0), "{atom} vs {est:?}");
}

#[test]
fn infinite_lookahead_laws_match_direct_simulation() {
    let m = jump_model();
    let xs = [0.25, 1.0];
    let kinds = [FunctionalKind::OverlineUStar, FunctionalKind::UnderlineUStar];
    let rep = sample_exponential_horizons(&m, 1.0, None, &kinds, &xs, 3000, 5, &SimConfig::default()).unwrap();
    for (kind, x, est) in &rep.tails {
        let want = tail_exp_q_infinite_s(&m, *kind, 1.0, *x).unwrap();
        assert!(est.agrees_with(want, 4.0), "{kind:?} x={x}: {want} vs {est:?}");
    }
}

#[test]
fn finite_lookahead_laws_match_the_representation() {
    let xs = [0.25, 1.0];
    for kind in [FunctionalKind::OverlineUStar, FunctionalKind::UnderlineDStar] {
        let m = model_for(kind);
        let est = representation_exponential_tails(&m, kind, 1.0, 2.0, &xs, 3000, 9, &SimConfig::default()).unwrap();
        for (x, e) in xs.iter().zip(&est) {
            let want = tail_exp_horizons(&m, kind, 1.0, 2.0, *x).unwrap();
            assert!(e.agrees_with(want, 4.0), "{kind:?} x={x}: {want} vs {e:?}");
        }
    }
}

#[test]
fn infinite_lookahead_is_the_beta_limit() {
    for kind in [FunctionalKind::OverlineUStar, FunctionalKind::UnderlineUStar, FunctionalKind::OverlineDStar] {
        let m = model_for(kind);
        let a = tail_exp_q_infinite_s(&m, kind, 1.5, 0.7).unwrap();
        let b = tail_exp_horizons(&m, kind, 1.5, 1e-7, 0.7).unwrap();
        assert!((a - b).abs() < 1e-5, "{kind:?}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn brownian_tails_are_survival_functions(
        drift in -1.5f64..-0.1,
        sigma in 0.3f64..2.0,
        q in 0.1f64..4.0,
        beta in 0.1f64..4.0,
        x in 0.0f64..5.0,
    ) {
        let m = LevyModel::brownian(drift, sigma).unwrap();
        for kind in [FunctionalKind::OverlineUStar, FunctionalKind::UnderlineUStar] {
            let p0 = tail_exp_horizons(&m, kind, q, beta, x).unwrap();
            let p1 = tail_exp_horizons(&m, kind, q, beta, x + 0.5).unwrap();
            prop_assert!((0.0..=1.0).contains(&p0));
            prop_assert!(p1 <= p0 + 1e-12);
        }
    }
}
