use proptest::prelude::*;
use schelling_core::model::ActivationEvent;
use schelling_core::{
    run, run_observed, Group, GroupAssignment, ModelParams, ModelState, Network, Wiring,
};

fn params(t1: f64, t2: f64, s: f64) -> ModelParams {
    ModelParams::new(t1, t2, s).unwrap()
}

fn cross_edges(net: &Network, groups: &GroupAssignment) -> usize {
    net.edges()
        .into_iter()
        .filter(|&(a, b)| groups.group(a) != groups.group(b))
        .count()
}

#[test]
fn low_tolerance_is_happy_after_one_step() {
    let mut state = ModelState::new(params(0.3, 0.3, 0.5), 1).unwrap();
    let report = state.step();
    assert!(report.all_happy_after);
    assert_eq!((report.breaks, report.adds), (0, 0));
}

#[test]
fn full_intolerance_is_not_happy_after_one_step() {
    let mut state = ModelState::new(params(1.0, 1.0, 0.5), 1).unwrap();
    let report = state.step();
    assert!(!report.all_happy_after);
    assert!(report.breaks <= report.unhappy_before);
    assert_eq!(report.breaks, 1000);
}

#[test]
fn quarter_tolerance_run() {
    let r = run(&params(0.25, 0.25, 0.5), 3).unwrap();
    assert_eq!(r.stabilisation_step, Some(1));
    assert!((r.similarity.overall - 0.5).abs() < 0.01);
    assert_eq!(r.similarity.happy_count, 1000);
}

#[test]
fn full_intolerance_separates_the_groups() {
    let r = run(&params(1.0, 1.0, 0.5), 4).unwrap();
    assert!(r.stabilised());
    assert_eq!(r.similarity.overall, 1.0);
    assert_eq!(cross_edges(&r.network, &r.groups), 0);
}

#[test]
fn tiny_intolerant_minority_never_settles() {
    let r = run(&params(0.95, 0.95, 0.05), 5).unwrap();
    assert!(!r.stabilised());
    assert_eq!(r.steps_run, 1000);
    assert!(r.similarity.happy_count < 1000);
}

#[test]
fn minority_similarity_at_half_tolerance() {
    let r = run(&params(0.5, 0.5, 0.15), 6).unwrap();
    assert!(r.stabilised());
    assert!(
        (r.similarity.group1 - 0.51).abs() <= 0.02,
        "{}",
        r.similarity.group1
    );
    assert!(
        (r.similarity.group2 - 0.97).abs() <= 0.01,
        "{}",
        r.similarity.group2
    );
    let n1 = r.groups.count(Group::One) as f64;
    let weighted = (n1 * r.similarity.group1 + (1000.0 - n1) * r.similarity.group2) / 1000.0;
    assert!((weighted - r.similarity.overall).abs() < 1e-12);
}

#[test]
fn exact_mean_wiring_starts_from_the_requested_edge_count() {
    let p = ModelParams {
        wiring: Wiring::ExactMean,
        ..params(0.3, 0.3, 0.5)
    };
    let state = ModelState::new(p, 2).unwrap();
    assert_eq!(state.network().edge_count(), 40_000);
    let q = params(0.3, 0.3, 0.5);
    let per_agent = ModelState::new(q, 2).unwrap();
    assert!((0..1000).all(|a| per_agent.network().degree(a) >= 80));
}

fn small(t1: u32, t2: u32, s: f64, max_steps: u32) -> ModelParams {
    ModelParams {
        n: 60,
        initial_degree: 8,
        degree_floor: 6,
        max_steps,
        ..ModelParams::new(t1 as f64 / 20.0, t2 as f64 / 20.0, s).unwrap()
    }
}

/// Checks one activation against the graph it left behind.
fn check_event(
    net: &Network,
    groups: &GroupAssignment,
    ev: &ActivationEvent,
    floor: usize,
) -> Result<(), String> {
    let a = ev.agent;
    if ev.happy {
        if ev.dropped.is_some() || ev.adds > 0 || ev.edges_after != ev.edges_before {
            return Err(format!("happy agent {a} changed the graph"));
        }
        if net.neighbor_stats(groups, a) != ev.before {
            return Err(format!("happy agent {a} has different neighbours"));
        }
        return Ok(());
    }
    if let Some(b) = ev.dropped {
        if groups.group(a) == groups.group(b) {
            return Err(format!("same-group edge {a}-{b} removed"));
        }
        if net.has_edge(a, b) && ev.adds == 0 {
            return Err(format!("edge {a}-{b} still present"));
        }
    }
    let deg = net.degree(a);
    if !ev.saturated && deg < floor {
        return Err(format!("agent {a} left at degree {deg}"));
    }
    if deg > ev.before.total.max(floor) {
        return Err(format!("agent {a} grew from {} to {deg}", ev.before.total));
    }
    if net.edge_count() != ev.edges_after {
        return Err("edge count mismatch".into());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn activations_respect_the_rule(t1 in 0u32..=20, t2 in 0u32..=20, s in 0.1f64..0.5, seed in any::<u64>()) {
        let p = small(t1, t2, s, 40);
        let mut failure = None;
        let r = run_observed(&p, seed, |net, groups, ev| {
            if failure.is_none() {
                if let Err(e) = check_event(net, groups, ev, p.degree_floor) {
                    failure = Some(e);
                }
            }
        }).unwrap();
        prop_assert!(failure.is_none(), "{}", failure.unwrap());
        prop_assert!(r.network.audit().is_ok());
        if r.stabilised() {
            prop_assert_eq!(r.similarity.happy_count, 60);
        }
    }

    #[test]
    fn runs_are_deterministic(t in 0u32..=20, s in 0.1f64..0.5, seed in any::<u64>()) {
        let p = small(t, t, s, 30);
        let a = run(&p, seed).unwrap();
        let b = run(&p, seed).unwrap();
        prop_assert_eq!(a.network.to_edge_list(), b.network.to_edge_list());
        prop_assert_eq!(a.stabilisation_step, b.stabilisation_step);
        prop_assert_eq!(a.similarity.overall.to_bits(), b.similarity.overall.to_bits());
        let c = run_observed(&p, seed, |_, _, _| {}).unwrap();
        prop_assert_eq!(a.network, c.network);
    }
}
