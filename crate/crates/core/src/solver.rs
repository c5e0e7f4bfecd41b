//! Desk-scale solver for `(−Δ)^s_{p(x,·)} u = g(x, u)` in the unit ball with
//! `u = 0` outside, by damped pseudo-time iteration
//! `u ← clip(u − τ r(u), 0, 1 − η)` with an adaptive step.
//!
//! The operator is applied through an [`OperatorPlan`] built once for the
//! nodes inside the ball, so each iteration costs one sparse pass over the
//! precompiled quadrature.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSpec;
use crate::field::{norm_sq, ExteriorRule, Grid, SampledFunction};
use crate::operator::{eval_plap_field, OperatorPlan, QuadratureConfig};

/// A scalar function with a display name.
pub struct NamedFn<A: ?Sized> {
    pub name: String,
    pub f: Arc<dyn Fn(&A) -> f64 + Send + Sync>,
}

impl<A: ?Sized> Clone for NamedFn<A> {
    fn clone(&self) -> Self {
        NamedFn {
            name: self.name.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<A: ?Sized> std::fmt::Debug for NamedFn<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NamedFn({})", self.name)
    }
}

impl<A: ?Sized> NamedFn<A> {
    pub fn new(name: impl Into<String>, f: impl Fn(&A) -> f64 + Send + Sync + 'static) -> Self {
        NamedFn {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

/// The exponent `q(x)` of the power nonlinearity.
#[derive(Clone, Debug)]
pub enum QField {
    Constant(f64),
    Callable(NamedFn<[f64]>),
}

impl QField {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            QField::Constant(q) => *q,
            QField::Callable(g) => (g.f)(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            QField::Constant(q) => format!("{q}"),
            QField::Callable(g) => g.name.clone(),
        }
    }
}

/// Right-hand side of the equation.
#[derive(Clone, Debug)]
pub enum RhsMode {
    /// `u^{q(x)}`.
    Power,
    /// A fixed field on the interior nodes.
    Manufactured(Vec<f64>),
    /// `f(u)` with its derivative.
    GeneralF { f: NamedFn<f64>, df: NamedFn<f64> },
}

impl RhsMode {
    pub fn label(&self) -> &'static str {
        match self {
            RhsMode::Power => "power",
            RhsMode::Manufactured(_) => "manufactured",
            RhsMode::GeneralF { .. } => "general_f",
        }
    }
}

/// Samples at which `f′ ≤ 0` is checked on `[0, 1]`.
pub const F_PRIME_SAMPLES: usize = 1001;

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    exponent: ExponentSpec,
    q: QField,
    grid: Grid,
    rhs: RhsMode,
    interior: Vec<usize>,
}

impl ProblemSpec {
    /// Validates `q > 1` on the nodes of the ball, `f′ ≤ 0` on `[0, 1]` and
    /// the length of a manufactured right-hand side.
    pub fn new(exponent: ExponentSpec, q: QField, grid: Grid, rhs: RhsMode) -> Result<Self> {
        if grid.dimension != exponent.dimension() {
            return Err(Error::invalid("grid and exponent dimensions differ"));
        }
        if grid.half_width <= 1.0 {
            return Err(Error::invalid("the grid box must contain the closed unit ball"));
        }
        let interior: Vec<usize> = (0..grid.len()).filter(|&i| norm_sq(&grid.node(i)) < 1.0).collect();
        for &i in &interior {
            let x = grid.node(i);
            let qx = q.eval(&x);
            if !(qx > 1.0 && qx.is_finite()) {
                return Err(Error::precondition(format!(
                    "q must exceed 1 on the ball; q({x:?}) = {qx}"
                )));
            }
        }
        match &rhs {
            RhsMode::Manufactured(h) if h.len() != interior.len() => {
                return Err(Error::invalid(format!(
                    "manufactured right-hand side has {} values for {} interior nodes",
                    h.len(),
                    interior.len()
                )));
            }
            RhsMode::GeneralF { df, .. } => {
                for k in 0..F_PRIME_SAMPLES {
                    let t = k as f64 / (F_PRIME_SAMPLES - 1) as f64;
                    let d = (df.f)(&t);
                    if !(d <= 0.0) {
                        return Err(Error::precondition(format!("f′({t}) = {d} is not ≤ 0")));
                    }
                }
            }
            _ => {}
        }
        Ok(ProblemSpec {
            exponent,
            q,
            grid,
            rhs,
            interior,
        })
    }

    pub fn power(exponent: ExponentSpec, q: QField, grid: Grid) -> Result<Self> {
        Self::new(exponent, q, grid, RhsMode::Power)
    }

    pub fn exponent(&self) -> &ExponentSpec {
        &self.exponent
    }

    pub fn q(&self) -> &QField {
        &self.q
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rhs(&self) -> &RhsMode {
        &self.rhs
    }

    /// Node indices strictly inside the unit ball, in grid order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    fn rhs_values(&self, values: &[f64]) -> Vec<f64> {
        self.interior
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let v = values[i];
                match &self.rhs {
                    RhsMode::Power => v.max(0.0).powf(self.q.eval(&self.grid.node(i))),
                    RhsMode::Manufactured(h) => h[k],
                    RhsMode::GeneralF { f, .. } => (f.f)(&v),
                }
            })
            .collect()
    }

    fn check_field(&self, u: &SampledFunction) -> Result<()> {
        if u.grid() != &self.grid {
            return Err(Error::invalid("field grid differs from the problem grid"));
        }
        if !matches!(u.exterior(), ExteriorRule::ZeroOutsideBall) {
            return Err(Error::precondition(
                "the field must use the zero_outside_ball exterior rule",
            ));
        }
        Ok(())
    }
}

/// `L u − g(u)` on the interior nodes, evaluated point by point.
pub fn residual(problem: &ProblemSpec, u: &SampledFunction, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    problem.check_field(u)?;
    if let Some(v) = u.values().iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
        return Err(Error::precondition(format!("u must take values in [0, 1); found {v}")));
    }
    let points: Vec<Vec<f64>> = problem.interior.iter().map(|&i| problem.grid.node(i)).collect();
    let lu = eval_plap_field(&problem.exponent, u, &points, cfg)?;
    Ok(lu
        .iter()
        .zip(problem.rhs_values(u.values()))
        .map(|(a, b)| a - b)
        .collect())
}

/// `u* = a(1 − |x|²)₊^β` and its operator image on the interior nodes.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub u_star: SampledFunction,
    pub h: Vec<f64>,
    pub amplitude: f64,
    pub exponent: f64,
}

pub fn manufacture(
    exponent: &ExponentSpec,
    grid: Grid,
    amplitude: f64,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<Manufactured> {
    if !(amplitude > 0.0 && amplitude < 1.0) || !(beta > 0.0) {
        return Err(Error::invalid("need 0 < a < 1 and a positive profile exponent"));
    }
    let u_star = SampledFunction::from_fn(grid, ExteriorRule::ZeroOutsideBall, 2, |x| {
        amplitude * (1.0 - norm_sq(x)).max(0.0).powf(beta)
    })?;
    let points: Vec<Vec<f64>> = (0..grid.len())
        .filter(|&i| norm_sq(&grid.node(i)) < 1.0)
        .map(|i| grid.node(i))
        .collect();
    let plan = OperatorPlan::build(exponent, &u_star, &points, cfg)?;
    let h = plan.apply(u_star.values())?;
    Ok(Manufactured {
        u_star,
        h,
        amplitude,
        exponent: beta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_res: f64,
    pub max_iters: usize,
    /// Clip ceiling is `1 − eta`.
    pub eta: f64,
    /// Initial step; `None` uses `0.1 h^{s p⁻}`.
    pub tau0: Option<f64>,
    /// Accepted iterations between recorded checkpoints.
    pub checkpoint_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_res: 1e-4,
            max_iters: 50_000,
            eta: 1e-3,
            tau0: None,
            checkpoint_every: 25,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_res > 0.0) || self.max_iters == 0 || self.checkpoint_every == 0 {
            return Err(Error::invalid(
                "tol_res > 0, max_iters ≥ 1 and checkpoint_every ≥ 1 required",
            ));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid("eta must lie in (0, 1)"));
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("tau0 must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub residual_sup: f64,
    pub tau: f64,
    /// `‖u − u*‖_sup` when a reference is supplied.
    pub error_sup: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Stalled,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub rejected_steps: usize,
    pub final_residual_sup: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// All values in `(0, 1)` on the ball.
    pub range_ok: bool,
    /// Power mode ended at `u ≡ 0`.
    pub trivial_limit: bool,
    pub final_tau: f64,
    pub history: Vec<Checkpoint>,
    #[serde(skip)]
    pub solution: SampledFunction,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Runs the iteration from `initial`; `reference` (if given) is used only to
/// record errors at checkpoints.
pub fn solve(
    problem: &ProblemSpec,
    initial: &SampledFunction,
    reference: Option<&SampledFunction>,
    quad: &QuadratureConfig,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    problem.check_field(initial)?;
    let ceiling = 1.0 - cfg.eta;
    if let Some(v) = initial.values().iter().find(|v| !(**v >= 0.0 && **v <= ceiling)) {
        return Err(Error::precondition(format!(
            "initial guess must lie in [0, 1 − η]; found {v}"
        )));
    }
    let grid = problem.grid;
    let points: Vec<Vec<f64>> = problem.interior.iter().map(|&i| grid.node(i)).collect();
    let plan = OperatorPlan::build(&problem.exponent, initial, &points, quad)?;
    let eval = |values: &[f64], iteration: usize| -> Result<Vec<f64>> {
        let lu = plan
            .apply(values)
            .map_err(|e| Error::numeric(format!("iteration {iteration}: {e}")))?;
        let r: Vec<f64> = lu.iter().zip(problem.rhs_values(values)).map(|(a, b)| a - b).collect();
        if let Some(k) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "iteration {iteration}: non-finite residual at node {}",
                problem.interior[k]
            )));
        }
        Ok(r)
    };
    let error_of =
        |values: &[f64]| reference.map(|r| sup(&values.iter().zip(r.values()).map(|(a, b)| a - b).collect::<Vec<_>>()));

    let h = grid.step();
    let tau0 = cfg
        .tau0
        .unwrap_or(0.1 * h.powf(problem.exponent.order() * problem.exponent.p_minus()));
    let tau_floor = tau0 * 1e-12;
    let mut tau = tau0;
    let mut values = initial.values().to_vec();
    let mut r = eval(&values, 0)?;
    let mut rsup = sup(&r);
    let mut history = vec![Checkpoint {
        iteration: 0,
        residual_sup: rsup,
        tau,
        error_sup: error_of(&values),
    }];
    let mut iterations = 0;
    let mut rejected = 0;
    let mut stop = StopReason::MaxIterations;
    let mut trial = values.clone();
    while iterations < cfg.max_iters {
        if rsup <= cfg.tol_res {
            stop = StopReason::Converged;
            break;
        }
        for (k, &i) in problem.interior.iter().enumerate() {
            trial[i] = (values[i] - tau * r[k]).clamp(0.0, ceiling);
        }
        let rt = eval(&trial, iterations + 1)?;
        let rtsup = sup(&rt);
        if rtsup > rsup {
            rejected += 1;
            tau *= 0.5;
            if tau < tau_floor {
                stop = StopReason::Stalled;
                break;
            }
            continue;
        }
        iterations += 1;
        std::mem::swap(&mut values, &mut trial);
        r = rt;
        rsup = rtsup;
        tau *= 1.2;
        if let Some(k) = problem
            .interior
            .iter()
            .find(|&&i| !(values[i] >= 0.0 && values[i] <= ceiling))
        {
            return Err(Error::numeric(format!(
                "iteration {iterations}: iterate left [0, 1 − η] at node {k}"
            )));
        }
        if iterations % cfg.checkpoint_every == 0 {
            history.push(Checkpoint {
                iteration: iterations,
                residual_sup: rsup,
                tau,
                error_sup: error_of(&values),
            });
        }
    }
    if rsup <= cfg.tol_res {
        stop = StopReason::Converged;
    }
    if history.last().is_none_or(|c| c.iteration != iterations) {
        history.push(Checkpoint {
            iteration: iterations,
            residual_sup: rsup,
            tau,
            error_sup: error_of(&values),
        });
    }
    let solution = initial.with_values(values)?;
    let ball: Vec<f64> = problem.interior.iter().map(|&i| solution.values()[i]).collect();
    Ok(SolveReport {
        iterations,
        rejected_steps: rejected,
        final_residual_sup: rsup,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        range_ok: ball.iter().all(|&v| v > 0.0 && v < 1.0),
        trivial_limit: matches!(problem.rhs, RhsMode::Power) && ball.iter().all(|&v| v == 0.0),
        final_tau: tau,
        history,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExponentSpec {
        ExponentSpec::example_ii(1, 0.5, 0.5).unwrap()
    }

    #[test]
    fn zero_is_a_trivial_fixed_point() {
        let g = Grid::new(1, 61, 1.5).unwrap();
        let p = ProblemSpec::power(spec(), QField::Constant(2.0), g).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, |_| 0.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert!(sup(&residual(&p, &u, &cfg).unwrap()) == 0.0);
        let rep = solve(&p, &u, None, &cfg, &SolverConfig::default()).unwrap();
        assert!(rep.converged && rep.trivial_limit && rep.iterations == 0);
        assert!(!rep.range_ok);
    }

    #[test]
    fn manufactured_residual_vanishes_at_u_star() {
        let g = Grid::new(1, 81, 1.5).unwrap();
        let cfg = QuadratureConfig::default();
        let m = manufacture(&spec(), g, 0.5, 0.5, &cfg).unwrap();
        assert_eq!(m.u_star.values()[40], 0.5);
        let p = ProblemSpec::new(spec(), QField::Constant(2.0), g, RhsMode::Manufactured(m.h.clone())).unwrap();
        assert!(sup(&residual(&p, &m.u_star, &cfg).unwrap()) == 0.0);
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let g = Grid::new(1, 41, 1.5).unwrap();
        assert!(ProblemSpec::power(spec(), QField::Constant(1.0), g).is_err());
        let bad = RhsMode::GeneralF {
            f: NamedFn::new("t", |t: &f64| *t),
            df: NamedFn::new("1", |_: &f64| 1.0),
        };
        assert!(ProblemSpec::new(spec(), QField::Constant(2.0), g, bad).is_err());
        assert!(ProblemSpec::new(spec(), QField::Constant(2.0), g, RhsMode::Manufactured(vec![0.0; 3])).is_err());
        let small = Grid::new(1, 41, 1.0).unwrap();
        assert!(ProblemSpec::power(spec(), QField::Constant(2.0), small).is_err());
    }
}
