use proptest::prelude::*;

use fracvexp::exponents::{validate_p1, validate_p2};
use fracvexp::field::Negated;
use fracvexp::{
    eval_plap, kernel, ExponentSpec, ExteriorRule, Grid, PlaneGeometry, QuadratureConfig, RunConfig, SampledFunction,
};

fn bump(grid: Grid, center: f64, radius: f64, amplitude: f64) -> SampledFunction {
    SampledFunction::from_fn(grid, ExteriorRule::ZeroOutsideBox, 2, move |x| {
        let t = ((x[0] - center) / radius).powi(2);
        amplitude * (1.0 - t).max(0.0).powi(3)
    })
    .unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reflection_is_an_isometric_involution(
        angle in 0.0..std::f64::consts::TAU,
        offset in -2.0..2.0f64,
        x in prop::array::uniform2(-3.0..3.0f64),
        y in prop::array::uniform2(-3.0..3.0f64),
    ) {
        let plane = PlaneGeometry::new(&[angle.cos(), angle.sin()], offset).unwrap();
        let back = plane.reflect(&plane.reflect(&x));
        prop_assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        let d = |a: &[f64], b: &[f64]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        prop_assert!((d(&plane.reflect(&x), &plane.reflect(&y)) - d(&x, &y)).abs() < 1e-10);
        prop_assert!((plane.signed_distance(&plane.reflect(&x)) + plane.signed_distance(&x)).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_symmetric_and_positive(
        p in 2.5..4.0f64,
        s in 0.2..0.9f64,
        x in prop::array::uniform2(-2.0..2.0f64),
        y in prop::array::uniform2(-2.0..2.0f64),
    ) {
        prop_assume!((x[0] - y[0]).abs() + (x[1] - y[1]).abs() > 1e-6);
        let spec = ExponentSpec::constant(2, s, 0.5, p).unwrap();
        let k = kernel(&spec, &x, &y).unwrap();
        prop_assert!(k > 0.0 && k.is_finite());
        prop_assert_eq!(k, kernel(&spec, &y, &x).unwrap());
    }

    #[test]
    fn constant_exponents_above_the_log_bound_satisfy_monotonicity(p in 2.45..6.0f64, s in 0.05..0.15f64) {
        let spec = ExponentSpec::constant(1, s, 0.5, p).unwrap();
        prop_assert!(validate_p2(&spec, 200).unwrap().passed);
        prop_assert_eq!(validate_p1(&spec, 200).unwrap().passed, s * p < 1.0);
    }

    #[test]
    fn operator_is_odd(
        center in -0.4..0.4f64,
        radius in 0.3..0.8f64,
        amplitude in 0.1..2.0f64,
        x in -1.2..1.2f64,
    ) {
        let spec = ExponentSpec::example_ii(1, 0.6, 0.5).unwrap();
        let u = bump(Grid::new(1, 81, 1.5).unwrap(), center, radius, amplitude);
        let cfg = QuadratureConfig::default();
        let a = eval_plap(&spec, &u, &[x], &cfg).unwrap();
        let b = eval_plap(&spec, &Negated(&u), &[x], &cfg).unwrap();
        prop_assert!(close(a, -b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn constant_exponent_operator_is_homogeneous(
        p in 2.5..3.5f64,
        scale in 0.2..5.0f64,
        center in -0.3..0.3f64,
        x in -1.0..1.0f64,
    ) {
        let spec = ExponentSpec::constant(1, 0.6, 0.5, p).unwrap();
        let grid = Grid::new(1, 81, 1.5).unwrap();
        // The truncation radius adapts to the amplitude; pin it so both
        // evaluations use the same nodes.
        let cfg = QuadratureConfig { tail_radius: 1e4, tail_tolerance: 1.0, ..QuadratureConfig::default() };
        let a = eval_plap(&spec, &bump(grid, center, 0.7, 1.0), &[x], &cfg).unwrap();
        let b = eval_plap(&spec, &bump(grid, center, 0.7, scale), &[x], &cfg).unwrap();
        // Paired terms cancel near the diagonal, so rounding is relative to the
        // O(1) size of the unit bump's operator, not to the value itself.
        let c = scale.powf(p - 1.0);
        prop_assert!((b - c * a).abs() <= 1e-9 * c * a.abs().max(1.0), "{b} vs {}", c * a);
    }

    #[test]
    fn sampled_csv_round_trips(values in prop::collection::vec(-1e6..1e6f64, 9 * 9), c in -5.0..5.0f64) {
        let grid = Grid::new(2, 9, 1.25).unwrap();
        let u = SampledFunction::new(grid, values, ExteriorRule::Constant(c), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        fracvexp::report::write_sampled_csv(&path, &u).unwrap();
        let v = fracvexp::report::read_sampled_csv(&path).unwrap();
        prop_assert_eq!(v.values(), u.values());
        prop_assert_eq!(v.exterior().label(), u.exterior().label());
    }

    #[test]
    fn config_round_trips_through_toml(seed in 0..=i64::MAX as u64, nodes in 11usize..400, order in 0.05..0.95f64) {
        let mut cfg = RunConfig::default();
        cfg.seed = seed;
        cfg.solver.nodes = nodes;
        cfg.exponent.order = order;
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back.seed, seed);
    }
}

#[test]
fn seeds_beyond_the_toml_range_are_rejected() {
    let mut cfg = RunConfig::default();
    cfg.seed = u64::MAX;
    assert!(cfg.validate().is_err());
    assert!(RunConfig::parse(r#"{"seed": 18446744073709551615}"#).is_err());
}
