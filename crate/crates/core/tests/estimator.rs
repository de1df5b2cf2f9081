use hoqmc::estimator::{Method, CSV_HEADER};
use hoqmc::{builtin_integrand, Base, Construction, Estimator, EstimatorConfig, ScrambleKind};

fn estimator(name: &str, config: EstimatorConfig) -> Estimator {
    Estimator::new(builtin_integrand(name).unwrap(), config).unwrap()
}

#[test]
fn scrambled_estimates_are_unbiased() {
    let config = EstimatorConfig::default().with_d(2).with_replications(300).with_seed(5);
    let res = estimator("example1", config).run_replications(10).unwrap();
    let z = (res.estimate - 1.0) / res.std_error;
    assert!(z.abs() < 4.0, "z = {z}, {}", res.estimate);
}

#[test]
fn rmse_is_consistent_across_seeds() {
    let rmse = |seed| {
        let config = EstimatorConfig::default().with_d(2).with_replications(200).with_seed(seed);
        estimator("example1", config).run_replications(8).unwrap()
    };
    let (a, b) = (rmse(1), rmse(2));
    let gap = (a.rmse.unwrap() - b.rmse.unwrap()).abs();
    let se = a.rmse_stderr.unwrap().hypot(b.rmse_stderr.unwrap());
    assert!(gap < 4.0 * se, "{} vs {}", a.rmse.unwrap(), b.rmse.unwrap());
}

#[test]
fn owen_and_linear_scrambles_agree_in_mean() {
    let run = |kind| {
        let config = EstimatorConfig::default().with_scramble(kind).with_replications(200);
        estimator("example2", config).run_replications(6).unwrap()
    };
    let (owen, linear) = (run(ScrambleKind::Owen), run(ScrambleKind::Linear));
    let se = owen.std_error.hypot(linear.std_error);
    assert!((owen.estimate - linear.estimate).abs() < 4.0 * se);
    assert!((linear.estimate - 1.0).abs() < 4.0 * linear.std_error);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let config = EstimatorConfig::default().with_d(2).with_replications(24).with_seed(77);
    let est = estimator("example2", config);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| est.run_replications(7).unwrap())
    };
    let (one, three) = (run(1), run(3));
    assert_eq!(one, three);
    assert_eq!(one.estimates.iter().map(|e| e.to_bits()).collect::<Vec<_>>(),
               three.estimates.iter().map(|e| e.to_bits()).collect::<Vec<_>>());
    assert_eq!(est.estimate(7, 5).unwrap().to_bits(), one.estimates[5].to_bits());
}

#[test]
fn error_shrinks_with_more_points() {
    for d in [1, 2] {
        let config = EstimatorConfig::default().with_d(d).with_replications(100);
        let table = estimator("example1", config).convergence([3, 6, 9]).unwrap();
        let r: Vec<f64> = table.rows.iter().map(|r| r.rmse).collect();
        assert!(r[0] > r[1] && r[1] > r[2], "d = {d}: {r:?}");
    }
}

#[test]
fn higher_order_beats_plain_scrambling() {
    let rmse = |d| {
        let config = EstimatorConfig::default().with_d(d).with_replications(100);
        estimator("example1", config).run_replications(10).unwrap().rmse.unwrap()
    };
    assert!(rmse(2) < rmse(1) / 10.0);
}

#[test]
fn monte_carlo_baseline_converges_at_half_order() {
    let config = EstimatorConfig::default().with_method(Method::MonteCarlo).with_replications(400);
    let table = estimator("example1", config).convergence(4..=10).unwrap();
    assert!((table.slope() + 0.5).abs() < 0.2, "{}", table.slope());
}

#[test]
fn points_live_in_the_unit_cube() {
    let config = EstimatorConfig::default()
        .with_d(2)
        .with_base(Base::new(5).unwrap())
        .with_construction(Construction::Faure);
    let pts = estimator("example2", config).points(4, 0).unwrap();
    assert_eq!(pts.len(), 625);
    assert!(pts.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
}

#[test]
fn csv_has_header_and_one_row_per_m() {
    let config = EstimatorConfig::default().with_replications(10);
    let table = estimator("linear", config).convergence([2, 3, 4]).unwrap();
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,2,4,"));
    assert!(lines[1].ends_with(",owen,42,linear"));
}

#[test]
fn integrals_need_exact_values_for_rmse() {
    let f = hoqmc::Integrand::new("noexact", 1, |x| x[0]);
    let est = Estimator::new(f, EstimatorConfig::default().with_replications(4)).unwrap();
    assert!(est.convergence([2, 3]).is_err());
    assert!(est.run_replications(3).unwrap().rmse.is_none());
}
