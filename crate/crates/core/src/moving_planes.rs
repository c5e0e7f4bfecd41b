//! Moving-plane diagnostics: sweeps of `min w_λ` over `Ω_λ`, the critical
//! position `λ₀`, radial symmetry and monotonicity of profiles, the mean value
//! linearisation of the power nonlinearity and the narrow-region estimate.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{distance, ExponentSpec};
use crate::field::{norm_sq, Field, SampledFunction};
use crate::lemmas::C0Case;
use crate::max_principles::w_lambda;
use crate::operator::QuadratureConfig;
use crate::plane::PlaneGeometry;
use crate::quadrature::{gauss_rule, geometric_panels, sphere_measure, uniform_panels};
use crate::solver::QField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// `Ω_λ = H_λ ∩ B₁`, planes in `[−1, 0]`.
    Ball,
    /// The whole space truncated to the ball of radius `L/2`, planes in
    /// `[−L/4, L/4]`; requires a decay certificate on the box boundary.
    WholeSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda_points: usize,
    /// Sub-steps per coarse step in the refinement pass.
    pub refine_factor: usize,
    /// Tolerance on `min w_λ`.
    pub tol: f64,
    /// Tolerance on `λ₀`; `None` means two refined steps.
    pub tol_lambda: Option<f64>,
    /// Overrides the default plane range of the mode.
    pub lambda_range: Option<(f64, f64)>,
    /// Bound on `|u|` over the outer tenth of the box (whole-space mode).
    pub decay_tol: f64,
    /// Tolerance of the radial profile check.
    pub radial_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambda_points: 101,
            refine_factor: 10,
            tol: 1e-5,
            tol_lambda: None,
            lambda_range: None,
            decay_tol: 1e-4,
            radial_tol: 1e-4,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_points < 2 || self.refine_factor == 0 {
            return Err(Error::invalid("need at least two planes and a positive refine factor"));
        }
        if !(self.tol >= 0.0 && self.decay_tol >= 0.0 && self.radial_tol >= 0.0) {
            return Err(Error::invalid("tolerances must be nonnegative"));
        }
        if let Some((a, b)) = self.lambda_range {
            if !(a < b && a.is_finite() && b.is_finite()) {
                return Err(Error::invalid("lambda range must be increasing"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub shell_max: f64,
    pub decay_tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub direction: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Minimum of `w_λ` over the nodes of `Ω_λ`; `None` when `Ω_λ` has no nodes.
    pub min_w: Vec<Option<f64>>,
    pub refined_grid: Vec<f64>,
    pub refined_min_w: Vec<Option<f64>>,
    /// Largest plane with `min w_μ ≥ −tol` for all grid planes `μ ≤ λ`.
    pub lambda0_estimate: Option<f64>,
    pub tol: f64,
    pub tol_lambda: f64,
    /// Whole-space mode: `λ₀` of the opposite direction.
    pub opposite_lambda0: Option<f64>,
    pub decay: Option<DecayCertificate>,
    pub symmetric_verdict: bool,
    pub monotone_verdict: Option<bool>,
}

fn lambda_range(u: &SampledFunction, mode: SweepMode, cfg: &SweepConfig) -> (f64, f64) {
    cfg.lambda_range.unwrap_or_else(|| match mode {
        SweepMode::Ball => (-1.0, 0.0),
        SweepMode::WholeSpace => {
            let l = u.grid().half_width;
            (-0.25 * l, 0.25 * l)
        }
    })
}

fn region_radius(u: &SampledFunction, mode: SweepMode) -> f64 {
    match mode {
        SweepMode::Ball => 1.0,
        SweepMode::WholeSpace => 0.5 * u.grid().half_width,
    }
}

/// `min w_λ` over the nodes of `H_λ` inside the region ball.
pub fn min_w(u: &SampledFunction, plane: &PlaneGeometry, radius: f64) -> Result<Option<f64>> {
    let grid = u.grid();
    let mut best: Option<f64> = None;
    for i in 0..grid.len() {
        let x = grid.node(i);
        if plane.in_half_space(&x) && norm_sq(&x) < radius * radius {
            let w = w_lambda(u, plane, &x).map_err(|e| match e {
                Error::Domain { point, .. } => {
                    Error::domain(&point, "reflection leaves the sampled box; use a larger box")
                }
                e => e,
            })?;
            best = Some(best.map_or(w, |b: f64| b.min(w)));
        }
    }
    Ok(best)
}

fn minima(u: &SampledFunction, e: &[f64], lambdas: &[f64], radius: f64) -> Result<Vec<Option<f64>>> {
    let plane = PlaneGeometry::new(e, 0.0)?;
    lambdas
        .par_iter()
        .map(|&l| min_w(u, &plane.with_offset(l), radius))
        .collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

struct Scan {
    grid: Vec<f64>,
    min_w: Vec<Option<f64>>,
    refined_grid: Vec<f64>,
    refined_min_w: Vec<Option<f64>>,
    lambda0: Option<f64>,
    refined_step: f64,
}

fn scan(u: &SampledFunction, e: &[f64], range: (f64, f64), radius: f64, cfg: &SweepConfig) -> Result<Scan> {
    let grid = linspace(range.0, range.1, cfg.lambda_points);
    let mw = minima(u, e, &grid, radius)?;
    let ok = |m: &Option<f64>| m.is_none_or(|v| v >= -cfg.tol);
    let step = (range.1 - range.0) / (cfg.lambda_points - 1) as f64;
    let refined_step = step / cfg.refine_factor as f64;
    let (mut refined_grid, mut refined_min_w) = (Vec::new(), Vec::new());
    let lambda0 = match mw.iter().position(|m| !ok(m)) {
        None => Some(range.1),
        Some(0) => None,
        Some(j) => {
            refined_grid = linspace(grid[j - 1], grid[j], cfg.refine_factor + 1);
            refined_min_w = minima(u, e, &refined_grid, radius)?;
            let k = refined_min_w.iter().position(|m| !ok(m)).unwrap_or(cfg.refine_factor);
            Some(refined_grid[k.max(1) - 1])
        }
    };
    Ok(Scan {
        grid,
        min_w: mw,
        refined_grid,
        refined_min_w,
        lambda0,
        refined_step,
    })
}

/// Decay certificate: `max |u|` over nodes with `|x|_∞ ≥ 0.9 L`.
pub fn decay_certificate(u: &SampledFunction, decay_tol: f64) -> DecayCertificate {
    let grid = u.grid();
    let edge = 0.9 * grid.half_width;
    let shell_max = (0..grid.len())
        .filter(|&i| grid.node(i).iter().any(|c| c.abs() >= edge))
        .map(|i| u.values()[i].abs())
        .fold(0.0, f64::max);
    DecayCertificate {
        shell_max,
        decay_tol,
        passed: shell_max <= decay_tol,
    }
}

/// Sweeps planes orthogonal to `direction` and estimates `λ₀`.
///
/// Ball mode: symmetric iff `λ₀ ≥ −tol_λ`, monotone from the radial profile
/// check about the origin. Whole-space mode: the opposite direction is swept
/// as well and `u` is symmetric about a plane iff `|λ₀(e) + λ₀(−e)| ≤ tol_λ`
/// and the decay certificate holds.
pub fn sweep(u: &SampledFunction, direction: &[f64], mode: SweepMode, cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let plane = PlaneGeometry::new(direction, 0.0)?;
    if plane.dimension() != u.grid().dimension {
        return Err(Error::invalid("direction and grid dimensions differ"));
    }
    let e = plane.direction().to_vec();
    let range = lambda_range(u, mode, cfg);
    let radius = region_radius(u, mode);
    let s = scan(u, &e, range, radius, cfg)?;
    let tol_lambda = cfg.tol_lambda.unwrap_or(2.0 * s.refined_step);
    let (opposite_lambda0, decay, symmetric, monotone) = match mode {
        SweepMode::Ball => {
            let sym = s.lambda0.is_some_and(|l| l >= -tol_lambda);
            let mono = radial_profile_check(u, &vec![0.0; e.len()], cfg.radial_tol)?.passed;
            (None, None, sym, Some(mono))
        }
        SweepMode::WholeSpace => {
            let neg: Vec<f64> = e.iter().map(|c| -c).collect();
            let o = scan(u, &neg, range, radius, cfg)?;
            let cert = decay_certificate(u, cfg.decay_tol);
            let sym = cert.passed
                && matches!((s.lambda0, o.lambda0), (Some(a), Some(b)) if (a + b).abs() <= tol_lambda && a < range.1 && b < range.1);
            (o.lambda0, Some(cert), sym, None)
        }
    };
    Ok(SweepReport {
        mode,
        direction: e,
        lambda_grid: s.grid,
        min_w: s.min_w,
        refined_grid: s.refined_grid,
        refined_min_w: s.refined_min_w,
        lambda0_estimate: s.lambda0,
        tol: cfg.tol,
        tol_lambda,
        opposite_lambda0,
        decay,
        symmetric_verdict: symmetric,
        monotone_verdict: monotone,
    })
}

/// `k` seeded unit directions. In one dimension the two directions `±1`
/// alternate so that both sides are always tested.
pub fn random_directions(dimension: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    if dimension == 1 {
        return (0..k).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            vec![t.cos(), t.sin()]
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiSweepReport {
    pub mode: SweepMode,
    pub sweeps: Vec<SweepReport>,
    /// Whole-space mode: least-squares centre from the per-direction planes of symmetry.
    pub center_estimate: Option<Vec<f64>>,
    pub radial: RadialCheck,
    pub symmetric_verdict: bool,
    pub monotone_verdict: bool,
}

/// Sweeps along every direction and checks the radial profile about the
/// origin (ball) or the estimated centre (whole space).
pub fn sweep_directions(
    u: &SampledFunction,
    directions: &[Vec<f64>],
    mode: SweepMode,
    cfg: &SweepConfig,
) -> Result<MultiSweepReport> {
    if directions.is_empty() {
        return Err(Error::invalid("at least one direction is required"));
    }
    let sweeps: Vec<SweepReport> = directions
        .iter()
        .map(|d| sweep(u, d, mode, cfg))
        .collect::<Result<_>>()?;
    let dim = u.grid().dimension;
    let center = match mode {
        SweepMode::Ball => None,
        SweepMode::WholeSpace => Some(least_squares_center(&sweeps, dim)),
    };
    let c = center.clone().unwrap_or_else(|| vec![0.0; dim]);
    let radial = radial_profile_check(u, &c, cfg.radial_tol)?;
    Ok(MultiSweepReport {
        mode,
        symmetric_verdict: sweeps.iter().all(|s| s.symmetric_verdict),
        monotone_verdict: radial.passed,
        sweeps,
        center_estimate: center,
        radial,
    })
}

fn least_squares_center(sweeps: &[SweepReport], dim: usize) -> Vec<f64> {
    let mut a = [[0.0; 2]; 2];
    let mut b = [0.0; 2];
    for s in sweeps {
        if let (Some(l), Some(o)) = (s.lambda0_estimate, s.opposite_lambda0) {
            let off = 0.5 * (l - o);
            for i in 0..dim {
                b[i] += s.direction[i] * off;
                for j in 0..dim {
                    a[i][j] += s.direction[i] * s.direction[j];
                }
            }
        }
    }
    if dim == 1 {
        return vec![if a[0][0] > 0.0 { b[0] / a[0][0] } else { 0.0 }];
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-12 {
        // directions do not span the plane: fall back to the projection
        let n = a[0][0] + a[1][1];
        return if n > 0.0 {
            vec![b[0] / n, b[1] / n]
        } else {
            vec![0.0, 0.0]
        };
    }
    vec![
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfilePair {
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
    /// `u(outer) − u(inner)`.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialCheck {
    pub center: Vec<f64>,
    pub tol: f64,
    pub nodes: usize,
    pub monotone: bool,
    pub symmetric: bool,
    pub passed: bool,
    /// Largest increase of `u` along increasing radius.
    pub worst_pair: Option<ProfilePair>,
    /// Largest spread of values on a shell of equal radius.
    pub max_shell_spread: f64,
}

/// `(|x − c|, u(x))` over the nodes of the largest ball about `c` inside the
/// box, sorted by radius.
pub fn radial_profile(u: &SampledFunction, center: &[f64]) -> Result<Vec<(f64, f64)>> {
    let grid = u.grid();
    if center.len() != grid.dimension || !grid.contains_strictly(center) {
        return Err(Error::precondition("the centre must lie inside the grid box"));
    }
    let reach = grid.half_width - center.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut out: Vec<(f64, usize)> = (0..grid.len())
        .map(|i| (distance(&grid.node(i), center), i))
        .filter(|&(r, _)| r <= reach)
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(out.into_iter().map(|(r, i)| (r, u.values()[i])).collect())
}

/// Checks `u(x₁) ≥ u(x₂) − tol` whenever `|x₁ − c| ≤ |x₂ − c|` and that values
/// on shells of equal radius differ by at most `tol`, over the nodes of the
/// largest ball about `c` inside the box.
pub fn radial_profile_check(u: &SampledFunction, center: &[f64], tol: f64) -> Result<RadialCheck> {
    let grid = u.grid();
    if center.len() != grid.dimension || !grid.contains_strictly(center) {
        return Err(Error::precondition("the centre must lie inside the grid box"));
    }
    let reach = grid.half_width - center.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut nodes: Vec<(f64, usize)> = (0..grid.len())
        .map(|i| (distance(&grid.node(i), center), i))
        .filter(|&(r, _)| r <= reach)
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let v = u.values();
    let scale = grid.step() * 1e-9;

    // shells of equal radius
    let mut max_spread = 0.0f64;
    let mut start = 0;
    while start < nodes.len() {
        let mut end = start + 1;
        while end < nodes.len() && nodes[end].0 - nodes[start].0 <= scale {
            end += 1;
        }
        let (lo, hi) = nodes[start..end]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, i)| {
                (lo.min(v[i]), hi.max(v[i]))
            });
        max_spread = max_spread.max(hi - lo);
        start = end;
    }

    // largest increase outward: suffix maxima over strictly larger radii
    let mut worst: Option<(f64, usize, usize)> = None;
    let mut best_outer: Option<(f64, usize)> = None;
    let mut k = nodes.len();
    while k > 0 {
        let mut j = k - 1;
        while j > 0 && nodes[k - 1].0 - nodes[j - 1].0 <= scale {
            j -= 1;
        }
        if let Some((vo, io)) = best_outer {
            for &(_, i) in &nodes[j..k] {
                let excess = vo - v[i];
                if worst.is_none_or(|(w, _, _)| excess > w) {
                    worst = Some((excess, i, io));
                }
            }
        }
        for &(_, i) in &nodes[j..k] {
            if best_outer.is_none_or(|(b, _)| v[i] > b) {
                best_outer = Some((v[i], i));
            }
        }
        k = j;
    }
    let monotone = worst.is_none_or(|(w, _, _)| w <= tol);
    let symmetric = max_spread <= tol;
    Ok(RadialCheck {
        center: center.to_vec(),
        tol,
        nodes: nodes.len(),
        monotone,
        symmetric,
        passed: monotone && symmetric,
        worst_pair: worst.map(|(excess, i, o)| ProfilePair {
            inner: grid.node(i),
            outer: grid.node(o),
            excess,
        }),
        max_shell_spread: max_spread,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearizationProbe {
    pub node: Vec<f64>,
    pub u: f64,
    pub u_lambda: f64,
    pub q: f64,
    /// Value between `u(x)` and `u_λ(x)` with `u_λ^q − u^q = q ξ^{q−1}(u_λ − u)`.
    pub xi: f64,
    /// `q ξ^{q−1}`.
    pub coefficient: f64,
    /// Defect of the defining identity.
    pub residual: f64,
}

/// The mean value point `ξ` for `t ↦ t^q` between `a` and `b`, by bisection.
pub fn linearization_xi(a: f64, b: f64, q: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
        return Err(Error::precondition(format!("values must lie in (0, 1); got {a}, {b}")));
    }
    if !(q > 1.0) {
        return Err(Error::invalid("q must exceed 1"));
    }
    if a == b {
        return Ok(a);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let slope = (hi.powf(q) - lo.powf(q)) / (hi - lo);
    let (mut l, mut h) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (l + h);
        if q * mid.powf(q - 1.0) < slope {
            l = mid;
        } else {
            h = mid;
        }
        if h - l <= f64::EPSILON * h {
            break;
        }
    }
    Ok(0.5 * (l + h))
}

pub fn linearization_probe(
    u: &SampledFunction,
    plane: &PlaneGeometry,
    q: &QField,
    x: &[f64],
) -> Result<LinearizationProbe> {
    let uv = u.value_at(x);
    let ul = u.value_at(&plane.reflect(x));
    let qx = q.eval(x);
    let xi = linearization_xi(uv, ul, qx)?;
    let coefficient = qx * xi.powf(qx - 1.0);
    let residual = (ul.powf(qx) - uv.powf(qx) - coefficient * (ul - uv)).abs();
    Ok(LinearizationProbe {
        node: x.to_vec(),
        u: uv,
        u_lambda: ul,
        q: qx,
        xi,
        coefficient,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthProbe {
    pub point: Vec<f64>,
    /// `δ = λ + 1`.
    pub delta: f64,
    pub u_x0: f64,
    /// Smallest of the three mean value constants.
    pub c0: f64,
    /// `c₀ (p⁻ − 1) ∫_D |u(x⁰)|^{p(x⁰, y_λ) − 2} K(x⁰, y_λ) dy`, `D = H_λ ∖ B₁`.
    pub integral: f64,
    /// `min(|u(x⁰)|^{p⁺−2}, |u(x⁰)|^{p⁻−2}) / δ^{sp⁻}`.
    pub reference: f64,
    /// `integral / reference`; the estimate asks for a positive lower bound.
    pub ratio: f64,
    pub tail_bound: f64,
}

/// Narrow-region estimate at `x⁰ ∈ Ω_λ = H_λ ∩ B₁` for the plane `λ` along `e`.
///
/// The integral is taken over the reflected set `{z : ⟨z, e⟩ > λ, |z_λ| ≥ 1}`
/// in polar coordinates about `x⁰`.
pub fn width_estimate_probe(
    spec: &ExponentSpec,
    u: &SampledFunction,
    plane: &PlaneGeometry,
    x0: &[f64],
    cfg: &QuadratureConfig,
) -> Result<WidthProbe> {
    let dim = spec.dimension();
    if plane.dimension() != dim || x0.len() != dim {
        return Err(Error::invalid("dimension mismatch in width probe"));
    }
    let delta = plane.offset() + 1.0;
    if !(delta > 0.0) {
        return Err(Error::domain(x0, "the width λ + 1 must be positive"));
    }
    if !plane.in_half_space(x0) || norm_sq(x0) >= 1.0 {
        return Err(Error::precondition("x⁰ must lie in Ω_λ = H_λ ∩ B₁"));
    }
    let u0 = u.value_at(x0);
    if !(u0 > 0.0) {
        return Err(Error::precondition("u(x⁰) must be positive"));
    }
    let (pm, pp, s) = (spec.p_minus(), spec.p_plus(), spec.order());
    let c0 = [C0Case::SameSignClose, C0Case::OppositeSign, C0Case::FarApart]
        .iter()
        .map(|c| c.constant(pm, pp))
        .fold(f64::INFINITY, f64::min);
    let d = -plane.signed_distance(x0);
    let e = plane.direction();
    let nd = dim as f64;
    let integrand = |z: &[f64]| -> Result<f64> {
        if plane.signed_distance(z) <= 0.0 || norm_sq(&plane.reflect(z)) < 1.0 {
            return Ok(0.0);
        }
        let r = distance(x0, z);
        let p = spec.q_checked(r)?;
        Ok(u0.powf(p - 2.0) * r.powf(-nd - s * p))
    };
    let point = |r: f64, phi: f64| -> Vec<f64> {
        if dim == 1 {
            vec![x0[0] + r * e[0]]
        } else {
            let (sn, cs) = phi.sin_cos();
            vec![x0[0] + r * (cs * e[0] - sn * e[1]), x0[1] + r * (cs * e[1] + sn * e[0])]
        }
    };
    let amp = u0.powf(pm - 2.0).max(u0.powf(pp - 2.0));
    let mut radius = cfg.tail_radius.max(4.0);
    let bound = |r: f64| sphere_measure(dim) * amp * r.powf(-s * pm) / (s * pm);
    while bound(radius) > cfg.tail_tolerance && radius * 2.0 <= cfg.max_tail_radius {
        radius *= 2.0;
    }
    let width = cfg.mid_panel_width.unwrap_or(u.grid().step()).min(0.25);
    let rule = gauss_rule(cfg.nodes_per_level);
    let mut total = 0.0;
    let mut panels = uniform_panels(d, 3.0, width);
    panels.extend(geometric_panels(3.0, radius));
    for (lo, hi) in panels {
        for (r, w) in rule.on(lo, hi) {
            if dim == 1 {
                total += w * integrand(&point(r, 0.0))?;
                continue;
            }
            // arc of directions reaching the far side of the plane
            let half = (d / r).min(1.0).acos();
            let n = ((2.0 * half * r / width).ceil() as usize).max(cfg.angular_nodes);
            let dphi = 2.0 * half / n as f64;
            let mut acc = 0.0;
            for j in 0..n {
                acc += integrand(&point(r, -half + (j as f64 + 0.5) * dphi))?;
            }
            total += w * r * dphi * acc;
        }
    }
    let integral = c0 * (pm - 1.0) * total;
    let reference = u0.powf(pp - 2.0).min(u0.powf(pm - 2.0)) / delta.powf(s * pm);
    Ok(WidthProbe {
        point: x0.to_vec(),
        delta,
        u_x0: u0,
        c0,
        integral,
        reference,
        ratio: integral / reference,
        tail_bound: c0 * (pm - 1.0) * bound(radius),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ExteriorRule, Grid};

    fn bump(g: Grid, shift: f64) -> SampledFunction {
        let rule = if shift == 0.0 {
            ExteriorRule::ZeroOutsideBall
        } else {
            ExteriorRule::ZeroOutsideBox
        };
        SampledFunction::from_fn(g, rule, 2, move |x| {
            let mut d = (x[0] - shift).powi(2);
            if x.len() > 1 {
                d += x[1] * x[1];
            }
            0.5 * (1.0 - d).max(0.0).powf(0.5)
        })
        .unwrap()
    }

    #[test]
    fn linearization_examples() {
        assert_eq!(linearization_xi(0.5, 0.5, 2.0).unwrap(), 0.5);
        assert!((linearization_xi(0.25, 0.75, 2.0).unwrap() - 0.5).abs() < 1e-14);
        let xi = linearization_xi(0.2, 0.4, 3.0).unwrap();
        assert!((xi - ((0.4f64.powi(3) - 0.2f64.powi(3)) / 0.6).sqrt()).abs() < 1e-14);
        assert!((3.0 * xi * xi - 0.28).abs() < 1e-2);
        assert!(linearization_xi(0.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn radial_bump_is_symmetric_in_every_direction() {
        let g = Grid::new(1, 101, 1.5).unwrap();
        let u = bump(g, 0.0);
        let rep = sweep_directions(
            &u,
            &random_directions(1, 4, 1),
            SweepMode::Ball,
            &SweepConfig::default(),
        )
        .unwrap();
        assert!(rep.symmetric_verdict && rep.monotone_verdict);
        for s in &rep.sweeps {
            assert!(s.min_w.iter().flatten().all(|&m| m >= -1e-8));
            assert_eq!(s.lambda0_estimate, Some(0.0));
        }
    }

    #[test]
    fn translated_bump_is_not_symmetric() {
        let g = Grid::new(1, 101, 1.5).unwrap();
        let u = bump(g, 0.2);
        let rep = sweep_directions(
            &u,
            &random_directions(1, 2, 1),
            SweepMode::Ball,
            &SweepConfig::default(),
        )
        .unwrap();
        assert!(!rep.symmetric_verdict);
        assert!(!rep.monotone_verdict);
        let l0 = rep.sweeps[1].lambda0_estimate.unwrap();
        assert!(l0 < -0.1, "{l0}");
    }

    #[test]
    fn zero_function_passes_degenerately() {
        let g = Grid::new(2, 21, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, |_| 0.0).unwrap();
        let rep = sweep(&u, &[0.6, 0.8], SweepMode::Ball, &SweepConfig::default()).unwrap();
        assert!(rep.symmetric_verdict);
        assert_eq!(rep.lambda0_estimate, Some(0.0));
    }

    #[test]
    fn whole_space_locates_the_centre() {
        let g = Grid::new(1, 241, 3.0).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBox, 2, |x| {
            0.5 * (1.0 - (x[0] - 0.25).powi(2)).max(0.0).powi(3)
        })
        .unwrap();
        let rep = sweep_directions(
            &u,
            &random_directions(1, 2, 1),
            SweepMode::WholeSpace,
            &SweepConfig::default(),
        )
        .unwrap();
        assert!(rep.symmetric_verdict);
        assert!(rep.monotone_verdict);
        assert!((rep.center_estimate.unwrap()[0] - 0.25).abs() < 0.02);
    }

    #[test]
    fn radial_check_finds_tilt() {
        let g = Grid::new(2, 41, 1.5).unwrap();
        let u = bump(g, 0.0)
            .map_values(|x, v| v + 0.05 * x[0] * (1.0 - norm_sq(x)).max(0.0))
            .unwrap();
        let rep = radial_profile_check(&u, &[0.0, 0.0], 1e-4).unwrap();
        assert!(!rep.passed && rep.worst_pair.is_some());
        assert!(radial_profile_check(&bump(g, 0.0), &[0.0, 0.0], 1e-12).unwrap().passed);
    }

    #[test]
    fn width_probe_grows_as_the_region_narrows() {
        let spec = ExponentSpec::constant(1, 0.5, 0.5, 3.0).unwrap();
        let g = Grid::new(1, 201, 1.5).unwrap();
        let u = bump(g, 0.0);
        let cfg = QuadratureConfig::default();
        let a = width_estimate_probe(&spec, &u, &PlaneGeometry::axis(1, -0.9), &[-0.95], &cfg).unwrap();
        assert!(a.ratio > 0.0 && a.integral > 0.0);
        assert!(width_estimate_probe(&spec, &u, &PlaneGeometry::axis(1, -1.1), &[-0.95], &cfg).is_err());
    }
}
