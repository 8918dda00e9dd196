use latticeplan::codec::Side;
use latticeplan::gridmap::OccupancyGrid;
use latticeplan::objective::PathObjective;
use latticeplan::optimizers::*;
use latticeplan::rng::RandomStream;

fn all_configs(seed: u64) -> impl Iterator<Item = OptimizerConfig> {
    OptimizerKind::ALL.into_iter().map(move |k| OptimizerConfig::new(k).with_seed(seed))
}

#[test]
fn budget_is_exact_for_every_kind() {
    let g = OccupancyGrid::empty(25, "e");
    for cfg in all_configs(3) {
        for budget in [0, 1, 9, 10, 11, 57, 500] {
            let r = run_on_grid(&g, Side::Above, true, &cfg, budget).unwrap();
            assert_eq!(r.evaluations, budget, "{} with {budget}", cfg.kind);
            assert_eq!(r.trace.len(), budget);
            assert!(r.trace.is_monotone());
            if budget == 0 {
                assert!(r.best_fitness.is_none());
            }
        }
    }
}

#[test]
fn same_seed_same_result_different_seed_differs() {
    let g = OccupancyGrid::empty(40, "e");
    for cfg in all_configs(17) {
        let a = run_on_grid(&g, Side::Above, true, &cfg, 400).unwrap();
        let b = run_on_grid(&g, Side::Above, true, &cfg, 400).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best_alpha, b.best_alpha);
        let c = run_on_grid(&g, Side::Above, true, &cfg.clone().with_seed(18), 400).unwrap();
        assert_ne!(a.trace, c.trace, "{}", cfg.kind);
    }
}

#[test]
fn empty_map_reaches_near_staircase() {
    let g = OccupancyGrid::empty(50, "e");
    for cfg in all_configs(5) {
        let r = run_on_grid(&g, Side::Above, true, &cfg, 1000).unwrap();
        let best = r.best_fitness.unwrap();
        assert!(best <= 75.0, "{}: {best}", cfg.kind);
        assert!(best >= 2.0 + 48.0 * 2f64.sqrt() - 1e-9);
        let inc = r.incumbent.unwrap();
        assert_eq!(inc.length, best);
        assert!(SearchDomain::default().contains(inc.alpha));
    }
}

#[test]
fn blocked_map_gives_penalty_trace() {
    let g = OccupancyGrid::from_fn(20, "wall", |x, y| y == 18 && x <= 18).unwrap();
    for cfg in all_configs(0) {
        let r = run_on_grid(&g, Side::Above, true, &cfg, 120).unwrap();
        assert!(r.incumbent.is_none());
        assert!(r.trace.values().iter().all(|&v| v == 200.0));
        assert_eq!(r.best_fitness, Some(200.0));
    }
}

#[test]
fn below_side_runs() {
    let g = OccupancyGrid::from_fn(30, "upper", |x, y| y > x && y >= 2).unwrap();
    for cfg in all_configs(1) {
        let above = run_on_grid(&g, Side::Above, true, &cfg, 100).unwrap();
        assert!(above.incumbent.is_none());
        let below = run_on_grid(&g, Side::Below, true, &cfg, 100).unwrap();
        assert_eq!(below.incumbent.unwrap().path.side(), Side::Below);
    }
}

#[test]
fn config_validation() {
    let mut cfg = OptimizerConfig::new(OptimizerKind::Sade);
    cfg.population = 5;
    assert!(matches!(cfg.validate(), Err(ConfigError::PopulationTooSmall { .. })));
    let mut cfg = OptimizerConfig::new(OptimizerKind::DeRand);
    cfg.population = 3;
    assert!(cfg.validate().is_err());
    let mut cfg = OptimizerConfig::new(OptimizerKind::Rbde);
    cfg.beta = 1.0;
    assert!(cfg.validate().is_err());
    let mut cfg = OptimizerConfig::new(OptimizerKind::Pso);
    cfg.cr = 1.5;
    assert!(cfg.validate().is_err());
    assert!("ga".parse::<OptimizerKind>().is_err());
    assert_eq!("debest".parse::<OptimizerKind>().unwrap(), OptimizerKind::DeBest);
    let json = r#"{"kind":"sade","population":12}"#;
    let cfg: OptimizerConfig = serde_json::from_str(json).unwrap();
    assert_eq!(cfg.population, 12);
    assert_eq!(cfg.f, 0.7);
}

#[test]
fn optimize_accepts_prebuilt_objective() {
    let g = OccupancyGrid::empty(20, "e");
    let obj = PathObjective::new(&g, Side::Above, RandomStream::new(4), 64).with_penalty(1000.0);
    let r = optimize(&OptimizerConfig::new(OptimizerKind::Pso), obj).unwrap();
    assert_eq!(r.evaluations, 64);
    assert!(r.best_fitness.unwrap() < 1000.0);
}
