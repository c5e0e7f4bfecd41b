//! Reference values for the operator, computed along code paths that share
//! nothing with [`crate::operator`] beyond the exponent function itself.
//!
//! [`brute_force_plap`] applies an ε-cutoff to an analytic function, integrates
//! the remaining region on a dense mesh that is uniform in `ln r`, and removes
//! the cutoff error by Richardson extrapolation over a sequence of ε.
//! [`constant_exponent_plap_1d`] handles only constant `p` in one dimension,
//! flattening the singularity with the substitution `r = ρ t^β`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::ExponentSpec;
use crate::quadrature::GaussRule;

/// Analytic function with compact support in the ball `|y − center| ≤ radius`.
pub struct CompactFunction<'a> {
    pub center: Vec<f64>,
    pub radius: f64,
    pub f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

impl CompactFunction<'_> {
    fn eval(&self, y: &[f64]) -> f64 {
        let d2: f64 = y.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 >= self.radius * self.radius {
            0.0
        } else {
            (self.f)(y)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleConfig {
    /// Cutoff radii as multiples of the reference length `h`.
    pub cutoff_factors: Vec<f64>,
    /// Simpson intervals per factor-of-two in `r`.
    pub steps_per_octave: usize,
    /// Angles per circle in 2D.
    pub angular_nodes: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cutoff_factors: (3..=7).map(|k| 2f64.powi(-k)).collect(),
            steps_per_octave: 256,
            angular_nodes: 256,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleValue {
    pub value: f64,
    /// `(ε, I(ε))` for every cutoff.
    pub cutoffs: Vec<(f64, f64)>,
    /// Exponent `a` in the model `I(ε) = I(0) + c ε^a`.
    pub exponent: f64,
    /// Difference between the last two extrapolants.
    pub spread: f64,
}

fn pow_odd(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

fn simpson(a: f64, b: f64, n: usize, mut g: impl FnMut(f64) -> f64) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut s = g(a) + g(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_{|y−x|>ε} f(u(x) − u(y)) K(x, y) dy` extrapolated to `ε → 0`, for
/// `ε = factor · h` over the configured factors.
pub fn brute_force_plap(
    spec: &ExponentSpec,
    u: &CompactFunction<'_>,
    x: &[f64],
    h: f64,
    cfg: &OracleConfig,
) -> Result<OracleValue> {
    let n = spec.dimension();
    if !(1..=2).contains(&n) || x.len() != n || u.center.len() != n {
        return Err(Error::invalid("oracle supports matching N = 1 or N = 2 inputs"));
    }
    if cfg.cutoff_factors.len() < 2 {
        return Err(Error::invalid("at least two cutoffs are needed"));
    }
    let s = spec.order();
    let ux = u.eval(x);
    let dist: f64 = x
        .iter()
        .zip(&u.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let rho = dist + u.radius;

    // ring(r) = r^N ∫_{S} f(u(x) − u(x + rω)) K(r) dω, the integrand in t = ln r.
    let ring = |r: f64| -> f64 {
        let q = spec.q(r);
        let k = r.powf(-(n as f64) - s * q);
        let sphere = if n == 1 {
            pow_odd(ux - u.eval(&[x[0] + r]), q) + pow_odd(ux - u.eval(&[x[0] - r]), q)
        } else {
            let m = cfg.angular_nodes;
            let dth = 2.0 * PI / m as f64;
            let mut acc = 0.0;
            for j in 0..m {
                let th = j as f64 * dth;
                acc += pow_odd(ux - u.eval(&[x[0] + r * th.cos(), x[1] + r * th.sin()]), q);
            }
            acc * dth
        };
        sphere * k * r.powi(n as i32)
    };

    let mut eps: Vec<f64> = cfg.cutoff_factors.iter().map(|c| c * h).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps[0] >= rho {
        return Err(Error::invalid("cutoff exceeds the support reach"));
    }
    let octave = 2f64.ln();
    let top_steps = ((rho / eps[0]).ln() / octave * cfg.steps_per_octave as f64).ceil() as usize;
    let mut acc = simpson(eps[0].ln(), rho.ln(), top_steps, |t| ring(t.exp()));

    // Far zone: u = 0, integrand ω_N f(u(x)) r^{−1−sQ(r)} in t = ln(r/ρ).
    let omega = if n == 1 { 2.0 } else { 2.0 * PI };
    let t_max = 40.0;
    let far = simpson(0.0, t_max, 64 * t_max as usize, |t| {
        let r = rho * t.exp();
        let q = spec.q(r);
        omega * pow_odd(ux, q) * r.powf(-s * q)
    });
    let r_end = rho * t_max.exp();
    let q_end = spec.q(r_end);
    let far = far + omega * pow_odd(ux, q_end) * r_end.powf(-s * q_end) / (s * q_end);

    let mut cutoffs = vec![(eps[0], acc + far)];
    for w in eps.windows(2) {
        let steps = ((w[0] / w[1]).ln() / octave * cfg.steps_per_octave as f64).ceil() as usize;
        acc += simpson(w[1].ln(), w[0].ln(), steps, |t| ring(t.exp()));
        cutoffs.push((w[1], acc + far));
    }

    let a = spec.q(0.0) * (1.0 - s);
    let extrapolants: Vec<f64> = cutoffs
        .windows(2)
        .map(|w| {
            let ratio = (w[0].0 / w[1].0).powf(a);
            (ratio * w[1].1 - w[0].1) / (ratio - 1.0)
        })
        .collect();
    let value = *extrapolants.last().unwrap();
    let spread = if extrapolants.len() > 1 {
        (value - extrapolants[extrapolants.len() - 2]).abs()
    } else {
        0.0
    };
    if !value.is_finite() {
        return Err(Error::numeric("oracle produced a non-finite value"));
    }
    Ok(OracleValue {
        value,
        cutoffs,
        exponent: a,
        spread,
    })
}

/// Constant-exponent one-dimensional reference:
/// `∫_0^∞ [f(u(x) − u(x+r)) + f(u(x) − u(x−r))] r^{−1−sp} dr`.
///
/// The singular range `[0, ρ]` is mapped by `r = ρ t^β` with `β = 2/(p(1 − s))`,
/// which turns the `r^{p(1−s)−1}` behaviour of the paired integrand into a
/// smooth function of `t`; the range beyond `ρ`, where `u` vanishes on both
/// sides, is integrated in closed form.
pub fn constant_exponent_plap_1d(p: f64, s: f64, u: &CompactFunction<'_>, x: f64, panels: usize) -> Result<f64> {
    if u.center.len() != 1 || !(p > 1.0 && s > 0.0 && s < 1.0) {
        return Err(Error::invalid(
            "constant-exponent reference needs N = 1, p > 1, s ∈ (0, 1)",
        ));
    }
    let ux = u.eval(&[x]);
    let rho = (x - u.center[0]).abs() + u.radius;
    let beta = 2.0 / (p * (1.0 - s));
    let rule = GaussRule::new(10);
    let dt = 1.0 / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let (a, b) = (i as f64 * dt, (i + 1) as f64 * dt);
        total += rule.integrate(a, b, |t| {
            let r = rho * t.powf(beta);
            if r == 0.0 {
                return 0.0;
            }
            let g = pow_odd(ux - u.eval(&[x + r]), p) + pow_odd(ux - u.eval(&[x - r]), p);
            g * r.powf(-1.0 - s * p) * rho * beta * t.powf(beta - 1.0)
        });
    }
    total += 2.0 * pow_odd(ux, p) * rho.powf(-s * p) / (s * p);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_agree_for_constant_exponent() {
        let spec = ExponentSpec::constant(1, 0.3, 0.5, 3.0).unwrap();
        let f = |y: &[f64]| 0.5 * (1.0 - y[0] * y[0]).powi(4);
        let u = CompactFunction {
            center: vec![0.0],
            radius: 1.0,
            f: &f,
        };
        for x in [-0.4, 0.1, 0.8, 1.3] {
            let a = brute_force_plap(&spec, &u, &[x], 0.0075, &OracleConfig::default()).unwrap();
            let b = constant_exponent_plap_1d(3.0, 0.3, &u, x, 4000).unwrap();
            assert!(
                (a.value - b).abs() <= 1e-4 * b.abs().max(1e-3),
                "x={x}: {} vs {b}",
                a.value
            );
        }
    }
}
