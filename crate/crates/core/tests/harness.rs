use qhlab::harness::{
    anchors, infeasibility_search, run_commuting_chain, run_parallel_chain, run_soliton_chain,
    ChainConfig, ChainReport, Constraint, ConstraintSet, SearchConfig, SearchSpace, Verdict,
};

fn cfg(restarts: usize) -> ChainConfig {
    ChainConfig {
        restarts,
        seed: 42,
        tol: 1e-8,
    }
}

fn assert_golden(report: &ChainReport) {
    let golden = anchors(&report.theorem);
    let names: Vec<&str> = report.steps.iter().map(|s| s.name.as_str()).collect();
    let expected: Vec<&str> = golden.iter().map(|(s, _)| *s).collect();
    assert_eq!(names, expected);
    for (step, (_, anchor)) in report.steps.iter().zip(golden) {
        assert_eq!(step.anchor, *anchor);
        assert!(
            step.value.is_finite() || step.verdict == Verdict::Fail,
            "{}",
            step.name
        );
    }
}

#[test]
fn chain_steps_follow_the_golden_anchor_lists() {
    assert_golden(&run_commuting_chain(3, &cfg(2)).unwrap());
    assert_golden(&run_parallel_chain(3, &cfg(1)).unwrap());
    assert_golden(&run_soliton_chain(4, &cfg(2)).unwrap());
}

#[test]
fn chain_reports_are_reproducible() {
    let a = run_commuting_chain(3, &cfg(4)).unwrap();
    let b = run_commuting_chain(3, &cfg(4)).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        qhlab::report::to_json(&a).unwrap(),
        qhlab::report::to_json(&b).unwrap()
    );
}

#[test]
fn hopf_ablation_reaches_tolerance() {
    let r = run_commuting_chain(3, &cfg(20)).unwrap();
    let step = r.step("hopf_ablation").unwrap();
    assert_eq!(step.verdict, Verdict::Pass, "{step:?}");
}

#[test]
fn parallel_degenerate_point_is_exact() {
    let r = run_parallel_chain(3, &cfg(1)).unwrap();
    let step = r.step("degenerate_point").unwrap();
    assert_eq!(step.value, 0.0);
    assert!(step.gating);
    assert!(r.step("degenerate_point_hopf").unwrap().value > 0.1);
}

#[test]
fn soliton_chain_lambda_forcing_and_principal_floor() {
    let r = run_soliton_chain(3, &cfg(4)).unwrap();
    assert_eq!(r.step("lambda_forcing").unwrap().verdict, Verdict::Pass);
    // S phi S = phi and S phi S = 0 are incompatible: the floor is |phi| in Frobenius norm
    let floor = r.step("principal_subbranch").unwrap().value;
    assert!(floor > 1.0, "{floor}");
    assert!(r.gating_failures().is_empty());
}

#[test]
fn ablation_never_raises_the_floor() {
    let space = SearchSpace::hopf(3, 9);
    let full = ConstraintSet::new(
        "all",
        [
            Constraint::Hopf,
            Constraint::CommutingStarRicci,
            Constraint::IsometricReeb,
        ],
    );
    let search = SearchConfig {
        restarts: 6,
        seed: 1,
        ..Default::default()
    };
    let best = infeasibility_search(&full, &space, &search).unwrap();
    let base = full.residual_at(&space, &best.argmin).unwrap();
    assert!((base - best.best_residual).abs() < 1e-12);
    for name in ["hopf", "commuting_star_ricci", "isometric_reeb"] {
        let ablated = full.without(name);
        // the ablated floor is bounded by its value at the full argmin
        let at_argmin = ablated.residual_at(&space, &best.argmin).unwrap();
        assert!(at_argmin <= base + 1e-12, "{name}: {at_argmin} > {base}");
        let floor = infeasibility_search(&ablated, &space, &search)
            .unwrap()
            .best_residual;
        assert!(floor.is_finite());
    }
}

#[test]
fn search_breakdown_is_per_constraint() {
    let space = SearchSpace::hopf(3, 2);
    let set =
        ConstraintSet::new("w", [Constraint::Hopf, Constraint::IsometricReeb]).with_weight(1, 4.0);
    let r = infeasibility_search(
        &set,
        &space,
        &SearchConfig {
            restarts: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.breakdown.len(), 2);
    assert_eq!(r.breakdown[1].weight, 4.0);
    let total: f64 = r.breakdown.iter().map(|c| c.weight * c.norm * c.norm).sum();
    assert!((total.sqrt() - r.best_residual).abs() < 1e-9 * (1.0 + r.best_residual));
}
