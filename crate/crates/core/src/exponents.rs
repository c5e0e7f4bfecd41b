//! Variable exponents of the form `p(x, y) = Q(|x - y|)` and sampled checks of
//! the standing hypotheses on them.
//!
//! Two hypotheses are checked:
//!
//! * the *bounds* hypothesis: `Q` takes values in `(2, ∞)`, its infimum is at
//!   least `1 - 1/ln(m)` and `s·p⁺ < N`;
//! * the *radial monotonicity* hypothesis: `Q` is nondecreasing and
//!   `t ↦ t^{Q(t)}` is strictly increasing.
//!
//! Both quantify over a continuum, so they are checked on a dense
//! deterministic sample of `[0, T_max]`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper end of the sampled interval for hypothesis checks.
pub const DEFAULT_T_MAX: f64 = 100.0;
/// Default number of equispaced samples for hypothesis checks.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Slack allowed when comparing declared bounds against sampled extrema.
pub const BOUND_SLACK: f64 = 1e-12;

/// The radial profile `Q` of the exponent.
#[derive(Clone)]
pub enum QFunction {
    Constant(f64),
    /// `t·χ[0,1] + (arctan t − π/4)·χ[1,∞) + 1 − 1/ln m`, taken verbatim
    /// (both indicator functions are closed at `t = 1`).
    ExampleI {
        m: f64,
    },
    /// `1/(1+e^{-t}) + 1/2 − 1/ln m`.
    ExampleII {
        m: f64,
    },
    /// Piecewise-linear interpolation of `(t, Q)` pairs, constant beyond the
    /// last breakpoint.
    Table(Vec<(f64, f64)>),
    /// Arbitrary profile; bounds must be declared by the caller.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for QFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QFunction::Constant(c) => write!(f, "Constant({c})"),
            QFunction::ExampleI { m } => write!(f, "ExampleI {{ m: {m} }}"),
            QFunction::ExampleII { m } => write!(f, "ExampleII {{ m: {m} }}"),
            QFunction::Table(t) => write!(f, "Table({t:?})"),
            QFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// `1 − 1/ln(m)`, the lower bound on `p⁻` tied to `m`.
pub fn log_m_bound(m: f64) -> f64 {
    1.0 - 1.0 / m.ln()
}

impl QFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            QFunction::Constant(c) => *c,
            QFunction::ExampleI { m } => {
                let mut q = 0.0;
                if (0.0..=1.0).contains(&t) {
                    q += t;
                }
                if t >= 1.0 {
                    q += t.atan() - FRAC_PI_4;
                }
                q + (1.0 - 1.0 / m.ln())
            }
            QFunction::ExampleII { m } => (1.0 / (1.0 + (-t).exp()) + 0.5) + (-1.0 / m.ln()),
            QFunction::Table(pts) => table_eval(pts, t),
            QFunction::Custom(f) => f(t),
        }
    }

    /// Closed-form infimum and supremum over `[0, ∞)`, when known.
    pub fn closed_form_bounds(&self) -> Option<(f64, f64)> {
        match self {
            QFunction::Constant(c) => Some((*c, *c)),
            QFunction::ExampleI { m } => {
                let c = log_m_bound(*m);
                Some((c, 1.0 + c))
            }
            QFunction::ExampleII { m } => {
                let k = -1.0 / m.ln();
                Some((1.0 + k, 1.5 + k))
            }
            QFunction::Table(pts) => {
                let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
                Some((lo, hi))
            }
            QFunction::Custom(_) => None,
        }
    }

    /// Short identifier used in reports and config files.
    pub fn kind(&self) -> &'static str {
        match self {
            QFunction::Constant(_) => "constant",
            QFunction::ExampleI { .. } => "example_i",
            QFunction::ExampleII { .. } => "example_ii",
            QFunction::Table(_) => "table",
            QFunction::Custom(_) => "custom",
        }
    }
}

fn table_eval(pts: &[(f64, f64)], t: f64) -> f64 {
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let k = pts.partition_point(|p| p.0 <= t);
    let (a, b) = (pts[k - 1], pts[k]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// The data defining the operator's exponent: dimension `N`, order `s`,
/// profile `Q`, declared bounds `p⁻ ≤ Q ≤ p⁺` and the constant `m`.
#[derive(Clone, Debug)]
pub struct ExponentSpec {
    dimension: usize,
    order: f64,
    q: QFunction,
    p_minus: f64,
    p_plus: f64,
    m_bound: f64,
}

impl ExponentSpec {
    /// Builds a spec whose bounds are taken from the profile's closed form.
    pub fn new(dimension: usize, order: f64, m_bound: f64, q: QFunction) -> Result<Self> {
        let (lo, hi) = q
            .closed_form_bounds()
            .ok_or_else(|| Error::invalid("custom exponent profiles need declared bounds; use with_bounds"))?;
        Self::with_bounds(dimension, order, m_bound, q, lo, hi)
    }

    pub fn with_bounds(
        dimension: usize,
        order: f64,
        m_bound: f64,
        q: QFunction,
        p_minus: f64,
        p_plus: f64,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(order > 0.0 && order < 1.0) {
            return Err(Error::invalid(format!("order s = {order} must lie in (0, 1)")));
        }
        if !(m_bound > 0.0 && m_bound < 1.0) {
            return Err(Error::invalid(format!("m = {m_bound} must lie in (0, 1)")));
        }
        if !(p_minus.is_finite() && p_plus.is_finite() && p_minus <= p_plus) {
            return Err(Error::invalid(format!(
                "declared bounds [{p_minus}, {p_plus}] are not a finite interval"
            )));
        }
        if let QFunction::Table(pts) = &q {
            if pts.is_empty() {
                return Err(Error::invalid("exponent table is empty"));
            }
            if pts.windows(2).any(|w| w[1].0 <= w[0].0) || pts[0].0 < 0.0 {
                return Err(Error::invalid(
                    "exponent table abscissae must be nonnegative and strictly increasing",
                ));
            }
        }
        let q0 = q.eval(0.0);
        if !q0.is_finite() {
            return Err(Error::Evaluation { t: 0.0 });
        }
        Ok(ExponentSpec {
            dimension,
            order,
            q,
            p_minus,
            p_plus,
            m_bound,
        })
    }

    pub fn constant(dimension: usize, order: f64, m_bound: f64, p: f64) -> Result<Self> {
        Self::new(dimension, order, m_bound, QFunction::Constant(p))
    }

    pub fn example_i(dimension: usize, order: f64, m: f64) -> Result<Self> {
        Self::new(dimension, order, m, QFunction::ExampleI { m })
    }

    pub fn example_ii(dimension: usize, order: f64, m: f64) -> Result<Self> {
        Self::new(dimension, order, m, QFunction::ExampleII { m })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn order(&self) -> f64 {
        self.order
    }
    pub fn q_function(&self) -> &QFunction {
        &self.q
    }
    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    #[inline]
    pub fn q(&self, t: f64) -> f64 {
        self.q.eval(t)
    }

    /// `Q(t)` with a finiteness check.
    pub fn q_checked(&self, t: f64) -> Result<f64> {
        let v = self.q.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { t })
        }
    }
}

/// Euclidean distance; symmetric in its arguments bit for bit.
#[inline]
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `p(x, y) = Q(|x − y|)`.
pub fn eval_p(spec: &ExponentSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.q_checked(distance(x, y))
}

/// Outcome of one sub-condition of a hypothesis check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    /// First sample at which the condition failed.
    pub witness_t: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hypothesis: String,
    pub passed: bool,
    pub sample_count: usize,
    pub t_max: f64,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    fn from_checks(hypothesis: &str, sample_count: usize, t_max: f64, checks: Vec<ConditionCheck>) -> Self {
        ValidationReport {
            hypothesis: hypothesis.to_string(),
            passed: checks.iter().all(|c| c.passed),
            sample_count,
            t_max,
            checks,
        }
    }
}

fn check(name: &str, passed: bool, witness_t: Option<f64>, detail: String) -> ConditionCheck {
    ConditionCheck {
        name: name.into(),
        passed,
        witness_t,
        detail,
    }
}

/// Equispaced samples of `[0, t_max]`, both endpoints included.
pub fn sample_points(sample_count: usize, t_max: f64) -> Vec<f64> {
    let n = sample_count.max(2);
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn sampled_values(spec: &ExponentSpec, ts: &[f64]) -> Result<Vec<f64>> {
    ts.iter().map(|&t| spec.q_checked(t)).collect()
}

/// Checks the bounds hypothesis on `[0, DEFAULT_T_MAX]`.
pub fn validate_p1(spec: &ExponentSpec, sample_count: usize) -> Result<ValidationReport> {
    validate_p1_on(spec, sample_count, DEFAULT_T_MAX)
}

pub fn validate_p1_on(spec: &ExponentSpec, sample_count: usize, t_max: f64) -> Result<ValidationReport> {
    if sample_count < 2 {
        return Err(Error::invalid("sample_count must be at least 2"));
    }
    let ts = sample_points(sample_count, t_max);
    let qs = sampled_values(spec, &ts)?;
    let mut checks = Vec::new();

    let below = ts.iter().zip(&qs).find(|(_, &q)| q <= 2.0);
    checks.push(check(
        "codomain_above_two",
        below.is_none() && spec.p_minus > 2.0,
        below.map(|(&t, _)| t),
        match below {
            Some((t, q)) => format!("Q({t}) = {q} is not above 2"),
            None => format!("p- = {} > 2", spec.p_minus),
        },
    ));

    // The radial-monotonicity argument only uses `p ≥ 1 − 1/ln m`, and both
    // example profiles attain this value at t = 0, so the bound is inclusive.
    let lb = log_m_bound(spec.m_bound);
    let at_lb = ts.iter().zip(&qs).find(|(_, &q)| q < lb - BOUND_SLACK);
    checks.push(check(
        "log_m_lower_bound",
        at_lb.is_none() && spec.p_minus >= lb - BOUND_SLACK,
        at_lb.map(|(&t, _)| t),
        format!("1 - 1/ln(m) = {lb}, p- = {}", spec.p_minus),
    ));

    let sp = spec.order * spec.p_plus;
    checks.push(check(
        "sp_plus_below_dimension",
        sp < spec.dimension as f64,
        None,
        format!("s*p+ = {sp}, N = {}", spec.dimension),
    ));

    let outside = ts
        .iter()
        .zip(&qs)
        .find(|(_, &q)| q < spec.p_minus - BOUND_SLACK || q > spec.p_plus + BOUND_SLACK);
    let (lo, hi) = qs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| (a.min(q), b.max(q)));
    checks.push(check(
        "declared_bounds",
        outside.is_none(),
        outside.map(|(&t, _)| t),
        format!(
            "sampled range [{lo}, {hi}], declared [{}, {}]",
            spec.p_minus, spec.p_plus
        ),
    ));

    Ok(ValidationReport::from_checks("P1", sample_count, t_max, checks))
}

/// Checks the radial monotonicity hypothesis on `[0, DEFAULT_T_MAX]`.
pub fn validate_p2(spec: &ExponentSpec, sample_count: usize) -> Result<ValidationReport> {
    validate_p2_on(spec, sample_count, DEFAULT_T_MAX)
}

pub fn validate_p2_on(spec: &ExponentSpec, sample_count: usize, t_max: f64) -> Result<ValidationReport> {
    if sample_count < 2 {
        return Err(Error::invalid("sample_count must be at least 2"));
    }
    let ts = sample_points(sample_count, t_max);
    let qs = sampled_values(spec, &ts)?;
    let mut checks = Vec::new();

    let decreasing = (1..ts.len()).find(|&i| qs[i] < qs[i - 1]);
    checks.push(check(
        "q_nondecreasing",
        decreasing.is_none(),
        decreasing.map(|i| ts[i - 1]),
        match decreasing {
            Some(i) => format!("Q({}) = {} > Q({}) = {}", ts[i - 1], qs[i - 1], ts[i], qs[i]),
            None => "Q nondecreasing on all consecutive samples".into(),
        },
    ));

    // Compare t^Q(t) through Q(t)·ln t to stay clear of overflow.
    let log_pow: Vec<f64> = ts.iter().zip(&qs).skip(1).map(|(&t, &q)| q * t.ln()).collect();
    let flat = (1..log_pow.len()).find(|&i| log_pow[i] <= log_pow[i - 1]);
    checks.push(check(
        "t_pow_q_increasing",
        flat.is_none(),
        flat.map(|i| ts[i]),
        match flat {
            Some(i) => format!("t^Q(t) does not increase between t = {} and t = {}", ts[i], ts[i + 1]),
            None => "t^Q(t) strictly increasing on all consecutive samples".into(),
        },
    ));

    Ok(ValidationReport::from_checks("P2", sample_count, t_max, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_i_passes_bounds_hypothesis() {
        let spec = ExponentSpec::example_i(2, 0.4, 0.5).unwrap();
        assert!((log_m_bound(0.5) - 2.442695040888963).abs() < 1e-12);
        let r = validate_p1(&spec, 1000).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn example_i_is_not_monotone_at_one() {
        // Q jumps from 1 + c down to c across t = 1.
        let spec = ExponentSpec::example_i(2, 0.4, 0.5).unwrap();
        let r = validate_p2(&spec, 1000).unwrap();
        assert!(!r.passed);
        assert!(!r.checks[0].passed);
        let w = r.checks[0].witness_t.unwrap();
        assert!((0.9..=1.1).contains(&w));
    }

    #[test]
    fn example_i_value_at_one_is_sup() {
        let spec = ExponentSpec::example_i(2, 0.4, 0.5).unwrap();
        assert_eq!(spec.q(1.0), spec.p_plus());
    }

    #[test]
    fn constant_three() {
        let spec = ExponentSpec::constant(2, 0.5, 0.5, 3.0).unwrap();
        assert!(validate_p1(&spec, 1000).unwrap().passed);
        assert!(validate_p2(&spec, 1000).unwrap().passed);

        let spec = ExponentSpec::constant(2, 0.9, 0.5, 3.0).unwrap();
        let r = validate_p1(&spec, 1000).unwrap();
        assert!(!r.passed);
        let failing: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failing, vec!["sp_plus_below_dimension"]);
    }

    #[test]
    fn example_ii_passes_monotonicity() {
        for m in [0.4, 0.5, 0.9] {
            let spec = ExponentSpec::example_ii(2, 0.4, m).unwrap();
            assert!(validate_p2(&spec, 1000).unwrap().passed);
        }
    }

    #[test]
    fn decreasing_table_fails_monotonicity() {
        let spec = ExponentSpec::new(2, 0.4, 0.5, QFunction::Table(vec![(0.0, 3.0), (1.0, 2.0)])).unwrap();
        let r = validate_p2(&spec, 1000).unwrap();
        assert!(!r.checks[0].passed);
        assert_eq!(r.checks[0].witness_t, Some(0.0));
    }

    #[test]
    fn eval_p_examples() {
        let spec = ExponentSpec::constant(2, 0.5, 0.5, 3.0).unwrap();
        assert_eq!(eval_p(&spec, &[0.3, 1.0], &[-2.0, 0.1]).unwrap(), 3.0);
        let spec = ExponentSpec::example_ii(1, 0.5, (-1.0f64).exp()).unwrap();
        assert_eq!(eval_p(&spec, &[0.25], &[0.25]).unwrap(), spec.q(0.0));
        let v = eval_p(&spec, &[0.0], &[1.0]).unwrap();
        let expected = 1.0 / (1.0 + (-1.0f64).exp()) + 0.5 + 1.0;
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 2.2311).abs() < 1e-4);
    }

    #[test]
    fn non_finite_profile_is_reported() {
        let q = QFunction::Custom(Arc::new(|t: f64| if t > 50.0 { f64::NAN } else { 3.0 }));
        let spec = ExponentSpec::with_bounds(2, 0.4, 0.5, q, 3.0, 3.0).unwrap();
        match validate_p1(&spec, 1000) {
            Err(Error::Evaluation { t }) => assert!(t > 50.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn declared_bounds_must_be_sound() {
        let spec = ExponentSpec::with_bounds(2, 0.4, 0.5, QFunction::ExampleII { m: 0.5 }, 2.5, 3.0).unwrap();
        let r = validate_p1(&spec, 1000).unwrap();
        let c = r.checks.iter().find(|c| c.name == "declared_bounds").unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn table_interpolates_linearly() {
        let q = QFunction::Table(vec![(0.0, 2.5), (1.0, 3.5), (2.0, 3.5)]);
        assert_eq!(q.eval(0.5), 3.0);
        assert_eq!(q.eval(7.0), 3.5);
    }
}
