//! Acceptance run: one pass/fail line per criterion, exit status 1 if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use fracvexp::max_principles::Verdict;
use fracvexp::pipeline::{self, Status};
use fracvexp::RunConfig;

struct Outcome {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(id: u8, name: &'static str, budget_s: u64, f: impl FnOnce() -> Result<(bool, String), String>) -> Outcome {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = t.elapsed();
    let budget = Duration::from_secs(budget_s);
    Outcome {
        id,
        name,
        passed: passed && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

fn check(cond: bool, what: &str, fails: &mut Vec<String>) {
    if !cond {
        fails.push(what.to_string());
    }
}

fn verdict(fails: Vec<String>, detail: String) -> Result<(bool, String), String> {
    if fails.is_empty() {
        Ok((true, detail))
    } else {
        Ok((false, format!("{detail}; failed: {}", fails.join(", "))))
    }
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .expect("output directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).expect("readable"),
            )
        })
        .collect()
}

fn main() {
    let cfg = RunConfig::default();
    let quad = cfg.quadrature.clone();
    let mut out = Vec::new();

    out.push(run(1, "operator accuracy against oracles", 300, || {
        let r = pipeline::operator_accuracy(&cfg).map_err(|e| e.to_string())?;
        let mut fails = Vec::new();
        let n1 = r
            .cases
            .iter()
            .filter(|c| c.dimension == 1 && c.exponent == "example_ii")
            .count();
        let n2 = r.cases.iter().filter(|c| c.dimension == 2).count();
        check(n1 == 5 && n2 == 2, "function count", &mut fails);
        check(
            r.cases
                .iter()
                .filter(|c| c.dimension == 2)
                .all(|c| c.points.len() == 25),
            "2D point count",
            &mut fails,
        );
        for c in &r.cases {
            let err = c
                .computed
                .iter()
                .zip(&c.reference)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let scale = c.reference.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            check(
                err <= 1e-2 * scale,
                &format!("{} N={} {}", c.function, c.dimension, c.exponent),
                &mut fails,
            );
        }
        check(r.constant_cases.len() == 5, "constant cross-check count", &mut fails);
        for c in &r.constant_cases {
            let err = c
                .computed
                .iter()
                .zip(&c.reference)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let scale = c.reference.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            check(err <= 1e-3 * scale, &format!("constant {}", c.function), &mut fails);
        }
        verdict(
            fails,
            format!(
                "max rel {:.2e}, constant-exponent max rel {:.2e}",
                r.max_rel_error, r.max_constant_rel_error
            ),
        )
    }));

    out.push(run(2, "annihilation and oddness", 60, || {
        let r = pipeline::annihilation_and_oddness(cfg.seed, 1000, &quad).map_err(|e| e.to_string())?;
        let mut fails = Vec::new();
        check(
            r.constant_max_abs == 0.0,
            "constants not annihilated exactly",
            &mut fails,
        );
        check(r.oddness_cases == 1000, "case count", &mut fails);
        check(r.max_ulps <= 8, "oddness beyond 8 ulps", &mut fails);
        verdict(
            fails,
            format!(
                "{} constant cases, |L c| max {:e}; {} oddness cases, max {} ulps",
                r.constant_cases, r.constant_max_abs, r.oddness_cases, r.max_ulps
            ),
        )
    }));

    let lemma_cfg = {
        let mut c = cfg.clone();
        c.lemmas.mean_value_samples = 100_000;
        c.lemmas.kernel_samples = 10_000;
        c.lemmas.g_prime_samples = 100_000;
        c
    };
    out.push(run(3, "mean-value constant suite", 30, || {
        let r = fracvexp::lemmas::mean_value_suite(lemma_cfg.seed, lemma_cfg.lemmas.mean_value_samples);
        let mut fails = Vec::new();
        check(r.samples == 100_000 && r.failures == 0, "bound violated", &mut fails);
        check(r.max_error <= 1e-10, "mean-value residual above 1e-10", &mut fails);
        verdict(
            fails,
            format!(
                "{} samples, min margin {:.3e}, max residual {:.2e}",
                r.samples, r.min_margin, r.max_error
            ),
        )
    }));

    out.push(run(4, "kernel monotonicity suite", 30, || {
        let r = fracvexp::lemmas::kernel_monotone_suite(lemma_cfg.seed + 1, lemma_cfg.lemmas.kernel_samples);
        let mut fails = Vec::new();
        check(r.samples == 10_000 && r.failures == 0, "kappa not positive", &mut fails);
        check(r.min_margin > 0.0, "nonpositive kappa", &mut fails);
        check(r.max_error <= 1e-10, "boundary kappa not zero", &mut fails);
        verdict(
            fails,
            format!(
                "{} samples, min kappa {:.3e}, boundary |kappa| rel {:.2e}",
                r.samples, r.min_margin, r.max_error
            ),
        )
    }));

    out.push(run(5, "g' sign suite", 30, || {
        let spec = cfg.exponent.build().map_err(|e| e.to_string())?;
        let r = fracvexp::lemmas::g_prime_suite(
            lemma_cfg.seed + 2,
            lemma_cfg.lemmas.g_prime_samples,
            spec.m_bound(),
            spec.p_plus(),
        )
        .map_err(|e| e.to_string())?;
        let mut fails = Vec::new();
        check(
            r.samples == 100_000 && r.failures == 0,
            "inequality violated",
            &mut fails,
        );
        check(r.min_margin >= 0.0, "negative difference", &mut fails);
        verdict(
            fails,
            format!("{} samples, min difference {:.3e}", r.samples, r.min_margin),
        )
    }));

    out.push(run(6, "strong maximum principle", 120, || {
        let r = pipeline::strong_mp_suite(cfg.seed, 20, &quad).map_err(|e| e.to_string())?;
        let mut fails = Vec::new();
        check(r.cases.len() == 20, "function count", &mut fails);
        for (k, c) in r.cases.iter().enumerate() {
            check(
                c.verdict == Verdict::Holds,
                &format!("bump {k} verdict {:?}", c.verdict),
                &mut fails,
            );
            check(
                c.exterior_max < 0.0 && c.exterior_nodes > 0,
                &format!("bump {k} exterior max {:e}", c.exterior_max),
                &mut fails,
            );
        }
        let ce = &r.counterexample;
        check(
            ce.verdict == Verdict::Violated,
            "counterexample not violated",
            &mut fails,
        );
        check(
            ce.witness_value < 0.0,
            "counterexample minimum not negative",
            &mut fails,
        );
        check(
            ce.witness_operator_value.is_some_and(|v| v < 0.0),
            "operator not negative at minimiser",
            &mut fails,
        );
        let worst = r.cases.iter().map(|c| c.exterior_max).fold(f64::NEG_INFINITY, f64::max);
        verdict(
            fails,
            format!(
                "20 bumps hold, largest exterior L u {:.3e}; counterexample L u = {:.3e} at min {:.3e}",
                worst,
                ce.witness_operator_value.unwrap_or(f64::NAN),
                ce.witness_value
            ),
        )
    }));

    let mut solved = None;
    out.push(run(7, "manufactured solve", 120, || {
        let r = pipeline::manufactured_solve(&cfg).map_err(|e| e.to_string())?;
        let s = &r.summary;
        let mut fails = Vec::new();
        check(
            s.nodes == 201 && s.profile_exponent == 0.5 && s.amplitude == 0.5,
            "setup",
            &mut fails,
        );
        check(s.report.converged, "not converged", &mut fails);
        check(s.final_error <= 5e-3, "sup error above 5e-3", &mut fails);
        check(
            s.initial_error > 1e-2,
            "perturbation too small to be meaningful",
            &mut fails,
        );
        let last: Vec<f64> = s
            .report
            .history
            .iter()
            .rev()
            .take(10)
            .filter_map(|c| c.error_sup)
            .collect();
        check(
            last.len() == 10 && last.windows(2).all(|w| w[0] <= w[1]),
            "error not monotone over last 10 checkpoints",
            &mut fails,
        );
        check(
            s.recomputed_residual <= cfg.solver.tol_res,
            "recomputed residual above tolerance",
            &mut fails,
        );
        let detail = format!(
            "{} iterations, residual {:.2e} (recomputed {:.2e}), sup error {:.2e} from {:.2e}",
            s.report.iterations, s.report.final_residual_sup, s.recomputed_residual, s.final_error, s.initial_error
        );
        solved = Some(r);
        verdict(fails, detail)
    }));

    out.push(run(8, "moving-planes symmetry", 120, || {
        let r = solved.as_ref().ok_or("no recovered solution")?;
        let d = pipeline::symmetry_diagnostic(&cfg, &r.solution, &r.u_star).map_err(|e| e.to_string())?;
        let mut fails = Vec::new();
        check(d.recovered.sweeps.len() == 8, "direction count", &mut fails);
        for (k, s) in d.recovered.sweeps.iter().enumerate() {
            let step = (s.refined_grid.get(1).zip(s.refined_grid.first()).map(|(a, b)| a - b)).unwrap_or(1e-3);
            let l0 = s.lambda0_estimate.unwrap_or(f64::NEG_INFINITY);
            check(
                l0 >= -2.0 * step - 1e-12,
                &format!("direction {k}: lambda0 {l0}"),
                &mut fails,
            );
        }
        check(
            d.recovered.radial.tol <= 1e-4 && d.recovered.radial.passed,
            "radial profile check",
            &mut fails,
        );
        check(
            !d.translated.symmetric_verdict,
            "translated field judged symmetric",
            &mut fails,
        );
        let worst = d
            .recovered
            .sweeps
            .iter()
            .filter_map(|s| s.lambda0_estimate)
            .fold(f64::INFINITY, f64::min);
        let shifted = d
            .translated
            .sweeps
            .iter()
            .filter_map(|s| s.lambda0_estimate)
            .fold(f64::INFINITY, f64::min);
        verdict(
            fails,
            format!(
                "recovered lambda0 min {worst:.4}, min w {:.2e}; translated lambda0 min {shifted:.4}",
                d.recovered_min_w
            ),
        )
    }));

    out.push(run(9, "boundary estimate probe", 60, || {
        let r = solved.as_ref().ok_or("no manufactured field")?;
        let p = pipeline::boundary_probe(&cfg, &r.u_star).map_err(|e| e.to_string())?;
        let mut fails = Vec::new();
        let expected: Vec<f64> = (3..=10).map(|k| 2f64.powi(-k)).collect();
        check(
            p.probe
                .deltas
                .iter()
                .zip(&expected)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
                && p.probe.deltas.len() == 8,
            "delta sequence",
            &mut fails,
        );
        check(p.probe.ratios.iter().all(|r| *r < 0.0), "nonnegative ratio", &mut fails);
        let tail_max = p
            .probe
            .ratios
            .iter()
            .rev()
            .take(4)
            .fold(f64::NEG_INFINITY, |m, r| m.max(*r));
        check(
            p.probe.margin > 0.0 && tail_max <= -p.probe.margin,
            "margin",
            &mut fails,
        );
        verdict(
            fails,
            format!(
                "ratios in [{:.3}, {:.3}], margin {:.3}",
                p.probe.ratios.iter().fold(f64::INFINITY, |m, r| m.min(*r)),
                tail_max,
                p.probe.margin
            ),
        )
    }));

    out.push(run(10, "deterministic reproduce-all", 900, || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (a, b) = (dir.path().join("run_a"), dir.path().join("run_b"));
        let sa = pipeline::reproduce_all(&cfg, &a).map_err(|e| e.to_string())?;
        pipeline::reproduce_all(&cfg, &b).map_err(|e| e.to_string())?;
        let (fa, fb) = (files(&a), files(&b));
        let mut fails = Vec::new();
        check(
            !fa.is_empty() && fa.keys().eq(fb.keys()),
            "different file sets",
            &mut fails,
        );
        for (name, bytes) in &fa {
            check(fb.get(name) == Some(bytes), &format!("{name} differs"), &mut fails);
        }
        let summary = String::from_utf8_lossy(&fa["summary.json"]).into_owned();
        check(
            summary.contains(&cfg.hash()) && summary.contains(&format!("\"seed\": {}", cfg.seed)),
            "summary lacks hash or seed",
            &mut fails,
        );
        check(
            sa.criteria.iter().all(|c| c.status != Status::Fail),
            "pipeline reports a failing criterion",
            &mut fails,
        );
        verdict(fails, format!("{} files byte-identical across two runs", fa.len()))
    }));

    let mut all = true;
    for o in &out {
        all &= o.passed;
        println!(
            "criterion {:>2} {:<34} {}  ({:.1}s / {}s)  {}",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.budget.as_secs(),
            o.detail
        );
    }
    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILURES" });
    if !all {
        std::process::exit(1);
    }
}
