use poledyn::experiments::{
    density_estimate, disjointness_sweep, hitting_scaling_study, logsq_conjecture_probe, uniform_sample,
};
use poledyn::orbit::first_hit;
use poledyn::pullback::pullback;
use poledyn::{BigFloat, DisjointnessConfig, Error, ExperimentConfig, MapDef, MapSpec, PrecisionPolicy, Real};

fn in_pool<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(op)
}

#[test]
fn density_payload_is_independent_of_thread_count() {
    let config = ExperimentConfig::new(MapDef::graham(), 9, 60, &["5", "10"]);
    let one = in_pool(1, || density_estimate(&config).unwrap().payload_json());
    let four = in_pool(4, || density_estimate(&config).unwrap().payload_json());
    assert_eq!(one, four);
    let again = density_estimate(&config).unwrap().payload_json();
    assert_eq!(one, again);
    let mut other = config.clone();
    other.seed = 10;
    assert_ne!(one, density_estimate(&other).unwrap().payload_json());
}

#[test]
fn density_report_invariants() {
    let config = ExperimentConfig::new(MapDef::graham(), 42, 100, &["3", "20"]);
    let report = density_estimate(&config).unwrap();
    for cell in &report.cells {
        assert!((0.0..=1.0).contains(&cell.fraction));
        assert!(cell.wilson_lo <= cell.fraction && cell.fraction <= cell.wilson_hi);
        assert_eq!(cell.members + cell.non_members + cell.excluded(), cell.samples);
        if let (Some(a), Some(b), Some(c)) = (cell.hit_step_p10, cell.hit_step_p50, cell.hit_step_p90) {
            assert!(a <= b && b <= c);
        }
    }
    assert_eq!(report.config["seed"], 42);
    assert_eq!(report.config["c1"], "2");
    assert!(report.constants["budget"].contains("x^2"));
}

#[test]
fn logsq_probe_reports_fractions() {
    let config = ExperimentConfig::new(MapDef::graham(), 42, 100, &["10", "20"]);
    let report = logsq_conjecture_probe(&config).unwrap();
    assert_eq!(report.experiment, "probe-logsq");
    assert_eq!(report.cells.len(), 2);
    assert!(report.cells.iter().all(|c| (0.0..=1.0).contains(&c.fraction)));
    assert!(report.constants["budget"].contains("ln"));
}

/// With a fixed target radius and budget `k`, the first-hit predicate is membership in `I_1 ∪ … ∪ I_k`.
#[test]
fn hit_predicate_matches_pullback_union() {
    let bits = 256;
    let spec: MapSpec<BigFloat> = MapDef::graham().instantiate(bits).unwrap();
    let policy = PrecisionPolicy::big_float(bits).unwrap();
    let eps = BigFloat::from_rational(&rug::Rational::from((1, 10)), bits);
    let k = 6;
    let levels = pullback(&spec, &eps, k, &policy).unwrap();
    let eight = BigFloat::with_val(bits, 8);
    let mut compared = 0;
    for i in 0..500 {
        let x = spec.scalar(&uniform_sample(77, 0, i, -5.0, 5.0));
        let ulp = x.next_up() - x.clone();
        let near = levels[1..]
            .iter()
            .any(|l| l.boundary_distance(&x).is_some_and(|d| d <= ulp.clone() * eight.clone()));
        if near {
            continue;
        }
        let hit = first_hit(&spec, &x, &eps, k, &policy).unwrap().n_hit().is_some();
        let member = levels[1..].iter().any(|l| l.contains(&x));
        assert_eq!(hit, member, "sample {i}: {x}");
        compared += 1;
    }
    assert!(compared > 490);
}

#[test]
fn sweep_windows_grow_as_eps_shrinks() {
    let config = DisjointnessConfig {
        map: MapDef::graham(),
        eps: vec!["0.05".into(), "0.02".into()],
        k_max: 8,
        policy: PrecisionPolicy::big_float(256).unwrap(),
    };
    let report = disjointness_sweep(&config).unwrap();
    assert!(report.cells[0].window >= 4);
    assert!(report.cells[1].window >= report.cells[0].window);
    assert!(report.summary.monotone);
    assert_eq!(report.summary.matrices[0].len(), 9);
    assert!(report.cells.iter().all(|c| c.merge_events == 0 && c.max_measure_drift < 1e-20));
    let csv = report.to_csv().unwrap();
    assert!(csv.starts_with("eps,k_max,window"));
}

#[test]
fn scaling_rejects_near_starts_and_fits_two_pole_rate() {
    let two = MapDef::parse(&["1", "1"], &["-1", "1"]).unwrap();
    let bad = ExperimentConfig::new(two.clone(), 0, 1, &["5"]);
    assert!(matches!(hitting_scaling_study(&bad), Err(Error::InvariantViolation { .. })));
    let report = hitting_scaling_study(&ExperimentConfig::new(two, 0, 1, &["10", "-20", "40"])).unwrap();
    assert!((report.summary.rate_ratio - 1.0).abs() < 0.25);
    assert!(report.cells.iter().all(|c| c.entered));
    assert!(report.cells[1].exit_value >= -2.0);
}
