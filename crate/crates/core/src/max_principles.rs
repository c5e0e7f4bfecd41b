//! Discrete checks of the strong maximum principle, the maximum principle for
//! antisymmetric functions and the boundary (Hopf-type) estimate.
//!
//! Each check scans grid nodes exhaustively, evaluates the operator where the
//! hypothesis requires it and returns a [`MPReport`] whose verdict is
//! `holds`, `violated` (with a witness node) or `inconclusive` (hypothesis not
//! met). Reflected functions `u_λ(x) = u(x_λ)` are always views, never
//! resampled.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{distance, ExponentSpec};
use crate::field::{norm_sq, ExteriorRule, FarField, Field, Reflected, SampledFunction};
use crate::operator::{collect_indexed, eval_plap, f_power, reach, tail_bound, QuadratureConfig};
use crate::plane::PlaneGeometry;
use crate::quadrature::{dyadic_panels, gauss_rule, geometric_panels, uniform_panels};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MpTolerances {
    /// Slack on operator inequalities taken as hypotheses.
    pub hypothesis: f64,
    /// Slack on the asserted conclusions.
    pub conclusion: f64,
}

impl Default for MpTolerances {
    fn default() -> Self {
        MpTolerances {
            hypothesis: 1e-6,
            conclusion: 1e-5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// Whether the operator inequality in a hypothesis is evaluated or taken as given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisMode {
    Computed,
    Claimed,
}

/// `Γ(x⁰) = L u_λ(x⁰) − L u(x⁰)` split over the half-space `H_λ` into the
/// kernel-difference part `J₁` and the folded remainder `J₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSpaceSplit {
    pub point: Vec<f64>,
    pub j1: f64,
    pub j2: f64,
    /// Direct difference of two operator evaluations.
    pub gamma: f64,
    /// `|J₁ + J₂ − Γ|`.
    pub folding_error: f64,
    /// Bound on the part of `J₁ + J₂` beyond the truncation radius.
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MPReport {
    pub check: String,
    pub verdict: Verdict,
    pub witness_point: Option<Vec<f64>>,
    /// Minimum of the monitored quantity (`u` or `w_λ`).
    pub witness_value: f64,
    /// Operator value (or `Γ`) at the witness.
    pub witness_operator_value: Option<f64>,
    pub hypothesis_mode: HypothesisMode,
    pub hypothesis_satisfied: Option<bool>,
    /// Smallest operator value (or `Γ`) over the hypothesis nodes.
    pub hypothesis_min: Option<f64>,
    /// The zero branch ("vanishes identically") was exercised.
    pub degenerate_branch: bool,
    pub nodes_checked: usize,
    pub diagnostics: Option<HalfSpaceSplit>,
    pub tolerances: MpTolerances,
    pub detail: String,
}

impl MPReport {
    fn new(check: &str, mode: HypothesisMode, tol: MpTolerances) -> Self {
        MPReport {
            check: check.into(),
            verdict: Verdict::Inconclusive,
            witness_point: None,
            witness_value: 0.0,
            witness_operator_value: None,
            hypothesis_mode: mode,
            hypothesis_satisfied: None,
            hypothesis_min: None,
            degenerate_branch: false,
            nodes_checked: 0,
            diagnostics: None,
            tolerances: tol,
            detail: String::new(),
        }
    }
}

/// `u(x_λ) − u(x)`.
///
/// Points off the grid are only accepted when the exterior rule pins the
/// value down independently of the box (zero outside the unit ball).
pub fn w_lambda(u: &SampledFunction, plane: &PlaneGeometry, x: &[f64]) -> Result<f64> {
    let xl = plane.reflect(x);
    if !matches!(u.exterior(), ExteriorRule::ZeroOutsideBall) {
        let l = u.grid().half_width;
        for pt in [x, &xl[..]] {
            if pt.iter().any(|c| c.abs() > l) {
                return Err(Error::domain(pt, "outside the sampled box"));
            }
        }
    }
    Ok(u.value_at(&xl) - u.value_at(x))
}

fn first_min(values: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best
}

fn strictly_inside(u: &SampledFunction, x: &[f64]) -> bool {
    u.interior_distance(x).is_some_and(|d| d > 0.0)
}

/// Strong maximum principle: if `L u ≥ 0` on `Ω` and `u ≥ 0` outside `Ω`,
/// then `u ≥ 0` in `Ω`, and `u` vanishing at an interior point forces `u ≡ 0`.
///
/// `domain_mask[i]` marks the nodes of `Ω`.
pub fn check_strong_mp(
    spec: &ExponentSpec,
    u: &SampledFunction,
    domain_mask: &[bool],
    mode: HypothesisMode,
    cfg: &QuadratureConfig,
    tol: MpTolerances,
) -> Result<MPReport> {
    let grid = u.grid();
    if domain_mask.len() != grid.len() {
        return Err(Error::invalid("domain mask does not match the grid"));
    }
    let mut outside_negative = Vec::new();
    for (i, (&inside, &v)) in domain_mask.iter().zip(u.values()).enumerate() {
        if !inside && v < -tol.hypothesis {
            outside_negative.push(i);
        }
    }
    let exterior_negative = match u.exterior() {
        ExteriorRule::Constant(c) => *c < 0.0,
        ExteriorRule::Callable(_) => false,
        _ => false,
    };
    if !outside_negative.is_empty() || exterior_negative {
        return Err(Error::precondition(format!(
            "u must be nonnegative outside the domain; negative at nodes {:?}{}",
            &outside_negative[..outside_negative.len().min(10)],
            if exterior_negative {
                " and in the exterior rule"
            } else {
                ""
            }
        )));
    }

    let interior: Vec<usize> = (0..grid.len())
        .filter(|&i| domain_mask[i] && strictly_inside(u, &grid.node(i)))
        .collect();
    let mut rep = MPReport::new("strong_maximum_principle", mode, tol);
    rep.nodes_checked = interior.len();
    if interior.is_empty() {
        rep.detail = "the domain contains no interior nodes".into();
        return Ok(rep);
    }

    if mode == HypothesisMode::Computed {
        let points: Vec<Vec<f64>> = interior.iter().map(|&i| grid.node(i)).collect();
        let lu = crate::operator::eval_plap_field(spec, u, &points, cfg)?;
        let (k, min) = first_min(lu.iter().copied().enumerate()).expect("nonempty");
        rep.hypothesis_min = Some(min);
        rep.hypothesis_satisfied = Some(min >= -tol.hypothesis);
        if min < -tol.hypothesis {
            rep.detail = format!("hypothesis fails: operator value {min:.3e} at {:?}", points[k]);
            return Ok(rep);
        }
    }

    let (imin, umin) = first_min(interior.iter().map(|&i| (i, u.values()[i]))).expect("nonempty");
    rep.witness_value = umin;
    if umin < -tol.conclusion {
        let x = grid.node(imin);
        rep.verdict = Verdict::Violated;
        rep.witness_operator_value = Some(eval_plap(spec, u, &x, cfg)?);
        rep.detail = format!("negative interior minimum {umin:.3e}");
        rep.witness_point = Some(x);
        return Ok(rep);
    }
    if let Some(&iz) = interior.iter().find(|&&i| u.values()[i].abs() <= tol.conclusion) {
        rep.degenerate_branch = true;
        if let Some(j) = (0..grid.len()).find(|&j| u.values()[j] > tol.conclusion) {
            rep.verdict = Verdict::Violated;
            rep.witness_point = Some(grid.node(iz));
            rep.witness_value = u.values()[iz];
            rep.detail = format!(
                "u vanishes at an interior node but is {:.3e} at node {j}",
                u.values()[j]
            );
            return Ok(rep);
        }
        rep.detail = "u vanishes at an interior node and on the whole grid".into();
    }
    rep.verdict = Verdict::Holds;
    Ok(rep)
}

/// Configuration giving `u` and `u_λ` identical quadrature nodes at `x`.
fn matched_config<F: Field + ?Sized>(
    u: &F,
    plane: &PlaneGeometry,
    x: &[f64],
    cfg: &QuadratureConfig,
) -> QuadratureConfig {
    let mut out = cfg.clone();
    let ul = Reflected::new(u, plane);
    if out.pairing_radius.is_none() {
        let d = [u.interior_distance(x), ul.interior_distance(x)]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        if d.is_finite() && d > 0.0 {
            out.pairing_radius = Some(0.25f64.min(0.5 * d));
        }
    }
    let far = reach(u, x).max(reach(&ul, x)).max(cfg.far_radius.unwrap_or(0.0));
    out.far_radius = Some(far);
    out
}

/// `Γ(x) = L u_λ(x) − L u(x)`, with both evaluations on the same nodes.
pub fn gamma<F: Field + ?Sized>(
    spec: &ExponentSpec,
    u: &F,
    plane: &PlaneGeometry,
    x: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let c = matched_config(u, plane, x, cfg);
    let ul = Reflected::new(u, plane);
    Ok(eval_plap(spec, &ul, x, &c)? - eval_plap(spec, u, x, &c)?)
}

/// `J₁` and `J₂` at `x⁰ ∈ H_λ` by polar quadrature over the half-space, with
/// the `J₁` singularity handled by pairing inside `B_d(x⁰)`, `d` the distance
/// to the plane. The field must vanish outside a ball.
pub fn half_space_split<F: Field + ?Sized>(
    spec: &ExponentSpec,
    u: &F,
    plane: &PlaneGeometry,
    x0: &[f64],
    cfg: &QuadratureConfig,
) -> Result<HalfSpaceSplit> {
    let dim = spec.dimension();
    if u.dimension() != dim || x0.len() != dim || plane.dimension() != dim {
        return Err(Error::invalid("dimension mismatch in half-space split"));
    }
    let d = -plane.signed_distance(x0);
    if !(d > 0.0) {
        return Err(Error::precondition("x⁰ must lie in the open half-space H_λ"));
    }
    if !matches!(u.far_field(), FarField::Zero { .. }) {
        return Err(Error::invalid(
            "half-space split needs a field vanishing outside a ball",
        ));
    }
    let gamma_direct = gamma(spec, u, plane, x0, cfg)?;
    let mcfg = matched_config(u, plane, x0, cfg);
    let delta = mcfg.pairing_radius.unwrap_or(0.25).min(d);
    let width = cfg
        .mid_panel_width
        .or_else(|| u.resolution())
        .unwrap_or(0.25 * delta)
        .min(delta);
    let r_far = mcfg.far_radius.unwrap_or(0.0).max(delta);

    let xl0 = plane.reflect(x0);
    let a = u.value_at(&xl0);
    let b = u.value_at(x0);
    let s = spec.order();
    let nd = dim as f64;
    let e = plane.direction().to_vec();
    let eperp = if dim == 2 { vec![-e[1], e[0]] } else { vec![0.0] };

    // beyond r_far both u and u_λ vanish; |J₁| + |J₂| integrands are then at
    // most 6 |f(A)| K with A = max(|a|, |b|)
    let amp = a.abs().max(b.abs());
    let mut radius = cfg.tail_radius.max(2.0 * r_far);
    let bound = |r: f64| {
        if amp == 0.0 {
            0.0
        } else {
            6.0 * tail_bound(spec, amp, r)
        }
    };
    while bound(radius) > cfg.tail_tolerance && radius * 2.0 <= cfg.max_tail_radius {
        radius *= 2.0;
    }

    let integrand = |y: &[f64]| -> Result<(f64, f64)> {
        let r = distance(x0, y);
        let yl = plane.reflect(y);
        let rl = distance(x0, &yl);
        let p = spec.q_checked(r)?;
        let ps = spec.q_checked(rl)?;
        let k = r.powf(-nd - s * p);
        let kl = rl.powf(-nd - s * ps);
        let u_y = u.value_at(y);
        let ul_y = u.value_at(&yl);
        let fa = f_power(a - ul_y, p) - f_power(b - u_y, p);
        Ok(((k - kl) * fa, kl * (fa + f_power(a - u_y, ps) - f_power(b - ul_y, ps))))
    };
    let point = |r: f64, phi: f64| -> Vec<f64> {
        if dim == 1 {
            vec![x0[0] + r * phi.cos().signum() * e[0]]
        } else {
            let (sn, cs) = phi.sin_cos();
            vec![
                x0[0] + r * (cs * e[0] + sn * eperp[0]),
                x0[1] + r * (cs * e[1] + sn * eperp[1]),
            ]
        }
    };

    let (mut j1, mut j2) = (0.0, 0.0);
    // paired zone: the whole ball B_δ(x⁰) lies in H_λ
    let rule = gauss_rule(cfg.nodes_per_level);
    for (lo, hi) in dyadic_panels(delta, cfg.graded_levels) {
        for (r, w) in rule.on(lo, hi) {
            let n = if dim == 1 {
                2
            } else {
                (((2.0 * PI * r / width).ceil() as usize).max(cfg.angular_nodes) + 1) & !1
            };
            let dphi = 2.0 * PI / n as f64;
            let jac = if dim == 1 { 1.0 } else { r * dphi };
            for j in 0..n / 2 {
                let phi = if dim == 1 { 0.0 } else { (j as f64 + 0.5) * dphi };
                let (p1, q1) = integrand(&point(r, phi))?;
                let (p2, q2) = integrand(&point(r, phi + PI))?;
                j1 += w * jac * (p1 + p2);
                j2 += w * jac * (q1 + q2);
            }
        }
    }

    // arcs of the circles |y − x⁰| = r inside H_λ
    let mut shells = |panels: Vec<(f64, f64)>, nodes: usize, far: bool| -> Result<()> {
        let rule = gauss_rule(nodes);
        for (lo, hi) in panels {
            for (r, w) in rule.on(lo, hi) {
                if dim == 1 {
                    for phi in [0.0, PI] {
                        let y = point(r, phi);
                        if plane.signed_distance(&y) < 0.0 {
                            let (p1, q1) = integrand(&y)?;
                            j1 += w * p1;
                            j2 += w * q1;
                        }
                    }
                    continue;
                }
                let phi0 = if r <= d { 0.0 } else { (d / r).acos() };
                let len = 2.0 * PI - 2.0 * phi0;
                let n = if far {
                    4 * cfg.angular_nodes
                } else {
                    ((len * r / width).ceil() as usize).max(cfg.angular_nodes)
                };
                let dphi = len / n as f64;
                for j in 0..n {
                    let (p1, q1) = integrand(&point(r, phi0 + (j as f64 + 0.5) * dphi))?;
                    j1 += w * r * dphi * p1;
                    j2 += w * r * dphi * q1;
                }
            }
        }
        Ok(())
    };
    shells(uniform_panels(delta, r_far, width), cfg.mid_nodes, false)?;
    if amp > 0.0 {
        shells(geometric_panels(r_far, radius), cfg.nodes_per_level, true)?;
    }

    Ok(HalfSpaceSplit {
        point: x0.to_vec(),
        j1,
        j2,
        gamma: gamma_direct,
        folding_error: (j1 + j2 - gamma_direct).abs(),
        tail_bound: bound(radius),
    })
}

/// Maximum principle for antisymmetric functions on `Ω_λ = H_λ ∩ B_ρ(0)`:
/// if `L u_λ − L u ≥ 0` on `Ω_λ`, `w_λ ≥ 0` on `H_λ ∖ B_ρ` and `0 < u < m` in
/// the ball, then `w_λ ≥ 0` on `H_λ`, and `w_λ` vanishing at an interior node
/// forces `w_λ ≡ 0`.
#[allow(clippy::too_many_arguments)]
pub fn check_antisym_mp(
    spec: &ExponentSpec,
    u: &SampledFunction,
    plane: &PlaneGeometry,
    ball_radius: f64,
    m_bound: f64,
    mode: HypothesisMode,
    cfg: &QuadratureConfig,
    tol: MpTolerances,
) -> Result<MPReport> {
    let grid = u.grid();
    if plane.dimension() != grid.dimension {
        return Err(Error::invalid("plane and grid dimensions differ"));
    }
    if !(ball_radius > 0.0) || !(m_bound > 0.0 && m_bound < 1.0) {
        return Err(Error::invalid("need a positive ball radius and 0 < m < 1"));
    }
    let h = grid.step();
    let nodes = grid.nodes();
    let in_ball = |x: &[f64]| norm_sq(x) < ball_radius * ball_radius;

    let bad_range: Vec<usize> = (0..grid.len())
        .filter(|&i| in_ball(&nodes[i]) && !(u.values()[i] > 0.0 && u.values()[i] < m_bound))
        .collect();
    let half: Vec<usize> = (0..grid.len()).filter(|&i| plane.in_half_space(&nodes[i])).collect();
    let w: Vec<f64> = half
        .iter()
        .map(|&i| w_lambda(u, plane, &nodes[i]))
        .collect::<Result<_>>()?;
    let bad_exterior: Vec<usize> = half
        .iter()
        .zip(&w)
        .filter(|(&i, &wi)| !in_ball(&nodes[i]) && wi < -tol.hypothesis)
        .map(|(&i, _)| i)
        .collect();
    if !bad_range.is_empty() || !bad_exterior.is_empty() {
        return Err(Error::precondition(format!(
            "u ∉ (0, m) at ball nodes {:?}; w_λ < 0 outside the ball at nodes {:?}",
            &bad_range[..bad_range.len().min(10)],
            &bad_exterior[..bad_exterior.len().min(10)]
        )));
    }

    let omega: Vec<usize> = half
        .iter()
        .copied()
        .filter(|&i| in_ball(&nodes[i]) && strictly_inside(u, &nodes[i]))
        .collect();
    let mut rep = MPReport::new("antisymmetric_maximum_principle", mode, tol);
    rep.nodes_checked = half.len();
    if omega.is_empty() {
        rep.detail = "Ω_λ contains no nodes".into();
        return Ok(rep);
    }

    if mode == HypothesisMode::Computed {
        let results: Vec<Result<f64>> = omega
            .par_iter()
            .map(|&i| gamma(spec, u, plane, &nodes[i], cfg))
            .collect();
        let g = collect_indexed(results)?;
        let (k, min) = first_min(g.iter().copied().enumerate()).expect("nonempty");
        rep.hypothesis_min = Some(min);
        rep.hypothesis_satisfied = Some(min >= -tol.hypothesis);
        if min < -tol.hypothesis {
            rep.detail = format!("hypothesis fails: Γ = {min:.3e} at {:?}", nodes[omega[k]]);
            return Ok(rep);
        }
    }

    // diagnostics at the minimiser of w_λ over Ω_λ
    let pos: std::collections::HashMap<usize, usize> = half.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let (iomega, _) = first_min(omega.iter().map(|&i| (i, w[pos[&i]]))).expect("nonempty");
    rep.diagnostics = Some(half_space_split(spec, u, plane, &nodes[iomega], cfg)?);

    let (ih, wmin) = first_min(half.iter().copied().zip(w.iter().copied())).expect("nonempty");
    rep.witness_value = wmin;
    if wmin < -tol.conclusion {
        rep.verdict = Verdict::Violated;
        let x = nodes[ih].clone();
        if strictly_inside(u, &x) {
            rep.witness_operator_value = Some(gamma(spec, u, plane, &x, cfg)?);
            if ih != iomega {
                rep.diagnostics = Some(half_space_split(spec, u, plane, &x, cfg)?);
            }
        }
        rep.detail = format!("w_λ = {wmin:.3e} < 0");
        rep.witness_point = Some(x);
        return Ok(rep);
    }

    // zero branch, away from the plane and the sphere
    let margin = 2.0 * h;
    let zero = omega.iter().copied().find(|&i| {
        let x = &nodes[i];
        -plane.signed_distance(x) >= margin
            && ball_radius - norm_sq(x).sqrt() >= margin
            && w[pos[&i]].abs() <= tol.conclusion
    });
    if let Some(iz) = zero {
        rep.degenerate_branch = true;
        if let Some(k) = w.iter().position(|wi| wi.abs() > tol.conclusion) {
            rep.verdict = Verdict::Violated;
            rep.witness_point = Some(nodes[iz].clone());
            rep.witness_value = w[pos[&iz]];
            rep.detail = format!("w_λ vanishes inside Ω_λ but is {:.3e} at node {}", w[k], half[k]);
            return Ok(rep);
        }
        rep.detail = "w_λ vanishes identically on H_λ".into();
    }
    rep.verdict = Verdict::Holds;
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub verdict: Verdict,
    pub deltas: Vec<f64>,
    /// `Γ_k / δ_k`.
    pub ratios: Vec<f64>,
    pub window: usize,
    /// Maximum of the last `window` ratios.
    pub window_max: f64,
    /// `−window_max`; positive when the estimate holds.
    pub margin: f64,
    pub detail: String,
}

/// Boundary estimate: for `x_k → x⁰ ∈ T_{λ₀}` and planes `λ_k → λ₀` with
/// `δ_k = |λ_k − ⟨x_k, e⟩|` decreasing, `limsup Γ_k / δ_k < 0` whenever
/// `w_{λ₀} > 0` in `H_{λ₀}`.
///
/// Positivity of `w_{λ₀}` is checked on the nodes of `H_{λ₀}` where `u` or
/// `u_{λ₀}` is nonzero.
pub fn boundary_estimate_probe(
    spec: &ExponentSpec,
    u: &SampledFunction,
    planes: &[PlaneGeometry],
    points: &[Vec<f64>],
    limit: &PlaneGeometry,
    cfg: &QuadratureConfig,
) -> Result<ProbeReport> {
    const WINDOW: usize = 4;
    if planes.is_empty() || planes.len() != points.len() {
        return Err(Error::invalid("need equally many planes and points"));
    }
    let deltas: Vec<f64> = planes
        .iter()
        .zip(points)
        .map(|(pl, x)| pl.signed_distance(x).abs())
        .collect();
    if let Some(k) = deltas.iter().position(|&d| d == 0.0) {
        return Err(Error::invalid(format!("δ_{k} = 0: the point lies on its plane")));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("δ_k must be strictly decreasing"));
    }

    let grid = u.grid();
    let mut relevant = 0;
    let mut worst = f64::INFINITY;
    for i in 0..grid.len() {
        let x = grid.node(i);
        if !limit.in_half_space(&x) {
            continue;
        }
        let xl = limit.reflect(&x);
        if u.value_at(&x) == 0.0 && u.value_at(&xl) == 0.0 {
            continue;
        }
        relevant += 1;
        worst = worst.min(u.value_at(&xl) - u.value_at(&x));
    }
    if relevant == 0 || worst <= 0.0 {
        return Ok(ProbeReport {
            verdict: Verdict::Inconclusive,
            deltas,
            ratios: Vec::new(),
            window: WINDOW,
            window_max: f64::NAN,
            margin: f64::NAN,
            detail: format!("w_λ₀ is not positive on H_λ₀ (minimum {worst:.3e} over {relevant} nodes)"),
        });
    }

    let results: Vec<Result<f64>> = planes
        .par_iter()
        .zip(points.par_iter())
        .zip(deltas.par_iter())
        .map(|((pl, x), &d)| gamma(spec, u, pl, x, cfg).map(|g| g / d))
        .collect();
    let ratios = collect_indexed(results)?;
    let tail = &ratios[ratios.len().saturating_sub(WINDOW)..];
    let window_max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let all_negative = ratios.iter().all(|&r| r < 0.0);
    let margin = -window_max;
    let verdict = if all_negative && margin > 0.0 {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok(ProbeReport {
        verdict,
        deltas,
        ratios,
        window: WINDOW,
        window_max,
        margin,
        detail: format!("w_λ₀ > 0 on {relevant} nodes (minimum {worst:.3e})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn profile(a: f64, s: f64) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| a * (1.0 - norm_sq(x)).max(0.0).powf(s)
    }

    #[test]
    fn w_lambda_of_affine_function() {
        let g = Grid::new(1, 31, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBox, 2, |x| x[0]).unwrap();
        let pl = PlaneGeometry::axis(1, 0.2);
        let w = w_lambda(&u, &pl, &[-0.3]).unwrap();
        assert!((w - 2.0 * (0.2 + 0.3)).abs() < 1e-12);
        assert!(w_lambda(&u, &pl, &[-1.4]).is_err());
    }

    #[test]
    fn strong_mp_on_zero_function() {
        let spec = ExponentSpec::constant(1, 0.3, 0.5, 3.0).unwrap();
        let g = Grid::new(1, 41, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, |_| 0.0).unwrap();
        let mask: Vec<bool> = g.nodes().iter().map(|x| x[0].abs() < 1.0).collect();
        let rep = check_strong_mp(
            &spec,
            &u,
            &mask,
            HypothesisMode::Computed,
            &QuadratureConfig::default(),
            MpTolerances::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.degenerate_branch);
        assert!(rep.witness_point.is_none());
    }

    #[test]
    fn strong_mp_rejects_negative_exterior() {
        let spec = ExponentSpec::constant(1, 0.3, 0.5, 3.0).unwrap();
        let g = Grid::new(1, 41, 1.5).unwrap();
        let u = SampledFunction::from_fn(
            g,
            ExteriorRule::ZeroOutsideBox,
            2,
            |x| if x[0] > 1.2 { -0.1 } else { 0.0 },
        )
        .unwrap();
        let mask: Vec<bool> = g.nodes().iter().map(|x| x[0].abs() < 1.0).collect();
        let err = check_strong_mp(
            &spec,
            &u,
            &mask,
            HypothesisMode::Claimed,
            &QuadratureConfig::default(),
            MpTolerances::default(),
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn antisym_mp_symmetric_plane_is_degenerate() {
        let spec = ExponentSpec::example_ii(1, 0.3, 0.5).unwrap();
        let g = Grid::new(1, 101, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, profile(0.45, 0.5)).unwrap();
        let pl = PlaneGeometry::axis(1, 0.0);
        let rep = check_antisym_mp(
            &spec,
            &u,
            &pl,
            1.0,
            0.5,
            HypothesisMode::Computed,
            &QuadratureConfig::default(),
            MpTolerances::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{rep:?}");
        assert!(rep.degenerate_branch);
    }

    #[test]
    fn folding_identity_in_1d() {
        let spec = ExponentSpec::example_ii(1, 0.3, 0.5).unwrap();
        let g = Grid::new(1, 201, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, profile(0.45, 2.0)).unwrap();
        let pl = PlaneGeometry::axis(1, -0.5);
        let sp = half_space_split(&spec, &u, &pl, &[-0.7], &QuadratureConfig::default()).unwrap();
        assert!(sp.folding_error < 1e-4 * sp.gamma.abs().max(1.0), "{sp:?}");
    }

    #[test]
    fn probe_rejects_bad_sequences() {
        let spec = ExponentSpec::example_ii(1, 0.3, 0.5).unwrap();
        let g = Grid::new(1, 101, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, profile(0.45, 0.5)).unwrap();
        let pl = PlaneGeometry::axis(1, -0.5);
        let cfg = QuadratureConfig::default();
        let planes = vec![pl.clone(), pl.clone()];
        assert!(boundary_estimate_probe(&spec, &u, &planes, &[vec![-0.6], vec![-0.55]], &pl, &cfg).is_ok());
        assert!(boundary_estimate_probe(&spec, &u, &planes, &[vec![-0.55], vec![-0.6]], &pl, &cfg).is_err());
        assert!(boundary_estimate_probe(&spec, &u, &planes, &[vec![-0.6], vec![-0.5]], &pl, &cfg).is_err());
        let zero = u.with_values(vec![0.0; g.len()]).unwrap();
        let rep = boundary_estimate_probe(&spec, &zero, &planes, &[vec![-0.6], vec![-0.55]], &pl, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }
}
