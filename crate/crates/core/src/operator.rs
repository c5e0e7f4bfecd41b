//! Pointwise evaluation of the fractional p(x,·)-Laplacian
//!
//! ```text
//! (−Δ)^s_{p(x,·)} u(x) = p.v. ∫ |u(x) − u(y)|^{p(x,y)−2} (u(x) − u(y)) |x − y|^{−(N + s p(x,y))} dy
//! ```
//!
//! with `p(x, y) = Q(|x − y|)`. The integral is split around `x` into three
//! zones. Inside `B_δ(x)` points are taken in pairs `y, 2x − y` on a dyadically
//! graded radial mesh, so the odd leading part of the integrand cancels before
//! it is integrated. Between `δ` and the far radius the integrand is sampled on
//! uniform Gauss panels. Beyond the far radius the field is either zero (and
//! the integrand reduces to `f(u(x)) K`) or given by a bounded exterior rule;
//! this zone is truncated at a radius where a rigorous bound on the remainder
//! drops below the tail tolerance.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{distance, ExponentSpec};
use crate::field::{norm_sq, FarField, Field, SampledFunction, Stencil};
use crate::quadrature::{dyadic_panels, gauss_rule, geometric_panels, sphere_measure, uniform_panels};

/// `|t|^{p−2} t`.
#[inline]
pub fn f_power(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(p - 2.0) * t
    }
}

/// `|x − y|^{−(N + s Q(|x − y|))}`.
pub fn kernel(spec: &ExponentSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let r = distance(x, y);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    kernel_at(spec, r)
}

/// The kernel as a function of the distance `r > 0`.
pub fn kernel_at(spec: &ExponentSpec, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Singularity);
    }
    let q = spec.q_checked(r)?;
    Ok(r.powf(-(spec.dimension() as f64 + spec.order() * q)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Radius of the paired region; `None` picks `min(0.25, d/2)` with `d`
    /// the distance to the edge of the sampled box.
    pub pairing_radius: Option<f64>,
    pub graded_levels: usize,
    /// Gauss nodes per dyadic panel.
    pub nodes_per_level: usize,
    /// Minimum number of angles on a circle (2D).
    pub angular_nodes: usize,
    /// Gauss nodes per panel outside the paired region.
    pub mid_nodes: usize,
    /// Panel width outside the paired region; defaults to the grid step.
    pub mid_panel_width: Option<f64>,
    /// Lower bound for the radius where the far zone starts; used to give
    /// two fields identical quadrature nodes.
    pub far_radius: Option<f64>,
    /// Initial truncation radius, raised automatically.
    pub tail_radius: f64,
    pub max_tail_radius: f64,
    pub tail_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            pairing_radius: None,
            graded_levels: 12,
            nodes_per_level: 8,
            angular_nodes: 16,
            mid_nodes: 4,
            mid_panel_width: None,
            far_radius: None,
            tail_radius: 4.0,
            max_tail_radius: 1e12,
            tail_tolerance: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.pairing_radius {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::invalid(format!("pairing radius must lie in (0, 1], got {d}")));
            }
        }
        if let Some(w) = self.mid_panel_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid("panel width must be positive"));
            }
        }
        if self.graded_levels > 60 || self.nodes_per_level == 0 || self.mid_nodes == 0 {
            return Err(Error::invalid("graded_levels ≤ 60 and node counts ≥ 1 required"));
        }
        if self.angular_nodes < 2 || self.angular_nodes % 2 == 1 {
            return Err(Error::invalid("angular_nodes must be even and at least 2"));
        }
        if let Some(r) = self.far_radius {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::invalid("far radius must be finite and nonnegative"));
            }
        }
        if !(self.tail_radius > 1.0 && self.max_tail_radius >= self.tail_radius) {
            return Err(Error::invalid(
                "tail radius must exceed 1 and not exceed max_tail_radius",
            ));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::invalid("tail tolerance must be positive"));
        }
        Ok(())
    }
}

/// Contributions of the individual zones to one evaluation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlapBreakdown {
    pub value: f64,
    pub paired: f64,
    pub middle: f64,
    pub far: f64,
    /// Part of the integral over `|y − x| < 1`.
    pub within_unit: f64,
    /// Part of the integral over `|y − x| ≥ 1` (excluding the discarded tail).
    pub beyond_unit: f64,
    pub pairing_radius: f64,
    pub tail_radius: f64,
    pub tail_bound: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum FarMode {
    /// Nothing to integrate past the far radius.
    Empty,
    /// Field vanishes: the integrand is `f(u(x)) K(r)`.
    Radial,
    /// Exterior rule sampled on circles.
    Angular,
}

#[derive(Clone, Debug)]
struct Layout {
    dimension: usize,
    delta: f64,
    width: f64,
    r_far: f64,
    radius: f64,
    tail_bound: f64,
    far: FarMode,
    /// Field value beyond the far radius in [`FarMode::Radial`].
    far_value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Zone {
    Paired,
    Middle,
    Far,
}

enum Term<'a> {
    Pair {
        a: &'a [f64],
        b: &'a [f64],
        weight: f64,
        p: f64,
        r: f64,
    },
    Single {
        zone: Zone,
        y: &'a [f64],
        weight: f64,
        p: f64,
        r: f64,
    },
    Radial {
        weight: f64,
        p: f64,
        r: f64,
    },
}

/// Bound on `∫_{|y−x|>R} |f(u(x) − u(y))| K dy` for `|u(x) − u(y)| ≤ amplitude`.
pub fn tail_bound(spec: &ExponentSpec, amplitude: f64, radius: f64) -> f64 {
    if amplitude == 0.0 {
        return 0.0;
    }
    let sp = spec.order() * spec.p_minus();
    let growth = amplitude
        .powf(spec.p_minus() - 1.0)
        .max(amplitude.powf(spec.p_plus() - 1.0));
    growth * sphere_measure(spec.dimension()) * radius.powf(-sp) / sp
}

pub(crate) fn reach<F: Field + ?Sized>(u: &F, x: &[f64]) -> f64 {
    let far = u.far_field();
    distance(x, far.center()) + far.radius()
}

fn layout<F: Field + ?Sized>(
    spec: &ExponentSpec,
    u: &F,
    x: &[f64],
    cfg: &QuadratureConfig,
    amplitude: Option<f64>,
    ux: f64,
) -> Result<Layout> {
    let dimension = spec.dimension();
    if u.dimension() != dimension || x.len() != dimension {
        return Err(Error::invalid(format!(
            "dimension mismatch: spec N = {dimension}, field N = {}, point has {} coordinates",
            u.dimension(),
            x.len()
        )));
    }
    if !(1..=2).contains(&dimension) {
        return Err(Error::invalid("the operator is implemented for N = 1 and N = 2"));
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain(x, "non-finite coordinates"));
    }
    let mut delta = cfg.pairing_radius.unwrap_or(0.25);
    if let Some(d) = u.interior_distance(x) {
        if d <= 0.0 {
            return Err(Error::domain(x, "not strictly inside the grid box"));
        }
        if cfg.pairing_radius.is_none() {
            delta = delta.min(0.5 * d);
        }
    }
    let width = cfg
        .mid_panel_width
        .or_else(|| u.resolution())
        .unwrap_or(0.25 * delta)
        .min(delta);

    let far = u.far_field();
    let reach = reach(u, x);
    let r_far = reach.max(delta).max(cfg.far_radius.unwrap_or(0.0));
    let radial = |c: f64| {
        let a = match amplitude {
            Some(a) => (a + c.abs()).max(1.0),
            None if ux == c => 0.0,
            None => (ux - c).abs().max(1.0),
        };
        (if a == 0.0 { FarMode::Empty } else { FarMode::Radial }, a, c)
    };
    let (mode, amplitude, far_value) = match far {
        FarField::Zero { .. } => radial(0.0),
        FarField::Constant { value, .. } => radial(value),
        FarField::Bounded { bound, .. } => (FarMode::Angular, amplitude.unwrap_or(ux.abs()) + bound, 0.0),
    };

    let mut radius = cfg.tail_radius.max(2.0 * r_far);
    let mut bound = tail_bound(spec, amplitude, radius);
    if mode == FarMode::Empty {
        radius = r_far;
        bound = 0.0;
    }
    while bound > cfg.tail_tolerance {
        if radius * 2.0 > cfg.max_tail_radius {
            return Err(Error::Tail {
                bound,
                tolerance: cfg.tail_tolerance,
                radius,
            });
        }
        radius *= 2.0;
        bound = tail_bound(spec, amplitude, radius);
    }
    Ok(Layout {
        dimension,
        delta,
        width,
        r_far,
        radius,
        tail_bound: bound,
        far: mode,
        far_value,
    })
}

fn angular_count(r: f64, width: f64, min_nodes: usize) -> usize {
    let n = ((2.0 * PI * r / width).ceil() as usize).max(min_nodes);
    n + n % 2
}

/// Emits the quadrature terms for `x` in a fixed order.
fn visit_terms(
    spec: &ExponentSpec,
    x: &[f64],
    lay: &Layout,
    cfg: &QuadratureConfig,
    mut visit: impl FnMut(Term<'_>),
) -> Result<()> {
    let dim = lay.dimension;
    let mut ya = [0.0; 2];
    let mut yb = [0.0; 2];

    let rule = gauss_rule(cfg.nodes_per_level);
    for (lo, hi) in dyadic_panels(lay.delta, cfg.graded_levels) {
        for (r, w) in rule.on(lo, hi) {
            let p = spec.q_checked(r)?;
            let k = r.powf(-(dim as f64 + spec.order() * p));
            if dim == 1 {
                visit(Term::Pair {
                    a: &[x[0] + r],
                    b: &[x[0] - r],
                    weight: w * k,
                    p,
                    r,
                });
            } else {
                let n = angular_count(r, lay.width, cfg.angular_nodes);
                let dth = 2.0 * PI / n as f64;
                for j in 0..n / 2 {
                    let th = (j as f64 + 0.5) * dth;
                    let (sn, cs) = th.sin_cos();
                    ya[0] = x[0] + r * cs;
                    ya[1] = x[1] + r * sn;
                    yb[0] = x[0] - r * cs;
                    yb[1] = x[1] - r * sn;
                    visit(Term::Pair {
                        a: &ya,
                        b: &yb,
                        weight: w * k * r * dth,
                        p,
                        r,
                    });
                }
            }
        }
    }

    let rule = gauss_rule(cfg.mid_nodes);
    visit_shells(
        spec,
        x,
        lay,
        cfg,
        &rule,
        &uniform_panels(lay.delta, lay.r_far, lay.width),
        Zone::Middle,
        &mut visit,
    )?;

    match lay.far {
        FarMode::Empty => {}
        FarMode::Radial => {
            let rule = gauss_rule(cfg.nodes_per_level);
            let omega = sphere_measure(dim);
            for (lo, hi) in geometric_panels(lay.r_far, lay.radius) {
                for (r, w) in rule.on(lo, hi) {
                    let p = spec.q_checked(r)?;
                    let k = r.powf(-(dim as f64 + spec.order() * p));
                    visit(Term::Radial {
                        weight: w * omega * r.powi(dim as i32 - 1) * k,
                        p,
                        r,
                    });
                }
            }
        }
        FarMode::Angular => {
            let rule = gauss_rule(cfg.nodes_per_level);
            visit_shells(
                spec,
                x,
                lay,
                cfg,
                &rule,
                &geometric_panels(lay.r_far, lay.radius),
                Zone::Far,
                &mut visit,
            )?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn visit_shells(
    spec: &ExponentSpec,
    x: &[f64],
    lay: &Layout,
    cfg: &QuadratureConfig,
    rule: &crate::quadrature::GaussRule,
    panels: &[(f64, f64)],
    zone: Zone,
    visit: &mut impl FnMut(Term<'_>),
) -> Result<()> {
    let dim = lay.dimension;
    let mut y = [0.0; 2];
    for &(lo, hi) in panels {
        for (r, w) in rule.on(lo, hi) {
            let p = spec.q_checked(r)?;
            let k = r.powf(-(dim as f64 + spec.order() * p));
            if dim == 1 {
                visit(Term::Single {
                    zone,
                    y: &[x[0] + r],
                    weight: w * k,
                    p,
                    r,
                });
                visit(Term::Single {
                    zone,
                    y: &[x[0] - r],
                    weight: w * k,
                    p,
                    r,
                });
            } else {
                // far shells are sampled with a fixed angular density
                let n = match zone {
                    Zone::Far => 4 * cfg.angular_nodes,
                    _ => angular_count(r, lay.width, cfg.angular_nodes),
                };
                let dth = 2.0 * PI / n as f64;
                for j in 0..n {
                    let th = (j as f64 + 0.5) * dth;
                    let (sn, cs) = th.sin_cos();
                    y[0] = x[0] + r * cs;
                    y[1] = x[1] + r * sn;
                    visit(Term::Single {
                        zone,
                        y: &y,
                        weight: w * k * r * dth,
                        p,
                        r,
                    });
                }
            }
        }
    }
    Ok(())
}

#[derive(Default)]
struct Sums {
    paired: f64,
    middle: f64,
    far: f64,
    within_unit: f64,
    beyond_unit: f64,
    samples: usize,
}

impl Sums {
    #[inline]
    fn add(&mut self, zone: Zone, r: f64, v: f64) {
        match zone {
            Zone::Paired => self.paired += v,
            Zone::Middle => self.middle += v,
            Zone::Far => self.far += v,
        }
        if r < 1.0 {
            self.within_unit += v;
        } else {
            self.beyond_unit += v;
        }
        self.samples += 1;
    }

    fn total(&self) -> f64 {
        self.paired + self.middle + self.far
    }
}

/// Evaluates the operator at `x` and reports the zone contributions.
pub fn eval_plap_detailed<F: Field + ?Sized>(
    spec: &ExponentSpec,
    u: &F,
    x: &[f64],
    cfg: &QuadratureConfig,
) -> Result<PlapBreakdown> {
    cfg.validate()?;
    let ux = u.value_at(x);
    if !ux.is_finite() {
        return Err(Error::numeric(format!("field is not finite at {x:?}")));
    }
    let lay = layout(spec, u, x, cfg, None, ux)?;
    let mut sums = Sums::default();
    visit_terms(spec, x, &lay, cfg, |t| match t {
        Term::Pair { a, b, weight, p, r } => {
            let v = weight * (f_power(ux - u.value_at(a), p) + f_power(ux - u.value_at(b), p));
            sums.add(Zone::Paired, r, v);
        }
        Term::Single { zone, y, weight, p, r } => sums.add(zone, r, weight * f_power(ux - u.value_at(y), p)),
        Term::Radial { weight, p, r } => sums.add(Zone::Far, r, weight * f_power(ux - lay.far_value, p)),
    })?;
    let value = sums.total();
    if !value.is_finite() {
        return Err(Error::numeric(format!("operator value is not finite at {x:?}")));
    }
    Ok(PlapBreakdown {
        value,
        paired: sums.paired,
        middle: sums.middle,
        far: sums.far,
        within_unit: sums.within_unit,
        beyond_unit: sums.beyond_unit,
        pairing_radius: lay.delta,
        tail_radius: lay.radius,
        tail_bound: lay.tail_bound,
        samples: sums.samples,
    })
}

/// `(−Δ)^s_{p(x,·)} u(x)`.
pub fn eval_plap<F: Field + ?Sized>(spec: &ExponentSpec, u: &F, x: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    eval_plap_detailed(spec, u, x, cfg).map(|b| b.value)
}

/// Evaluates at every point (in parallel); errors are collected with their
/// point indices.
pub fn eval_plap_field<F: Field + ?Sized>(
    spec: &ExponentSpec,
    u: &F,
    points: &[Vec<f64>],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = points.par_iter().map(|x| eval_plap(spec, u, x, cfg)).collect();
    collect_indexed(results)
}

pub(crate) fn collect_indexed(results: Vec<Result<f64>>) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => failures.push((i, Box::new(e))),
        }
    }
    if failures.is_empty() {
        Ok(values)
    } else {
        Err(Error::Field { failures })
    }
}

#[derive(Clone, Copy, Debug)]
enum CompactStencil {
    Exterior(f64),
    Nodes { reference: u32, start: u32, len: u32 },
}

#[derive(Clone, Copy, Debug)]
enum PlanTerm {
    Pair { a: u32, b: u32, weight: f64, p: f64 },
    Single { zone: Zone, s: u32, weight: f64, p: f64 },
    Radial { weight: f64, p: f64 },
}

#[derive(Clone, Debug)]
struct PointPlan {
    center: u32,
    far_value: f64,
    terms: Vec<PlanTerm>,
}

/// Precompiled quadrature for a fixed grid, exterior rule and set of points.
///
/// For fields that vanish outside the grid, applying a plan to nodal values
/// gives bit-for-bit the same result as [`eval_plap`] on the corresponding
/// [`SampledFunction`], provided `|u(x)| ≤ 1` at the evaluation points (the
/// tail radius is fixed for that amplitude).
#[derive(Clone, Debug)]
pub struct OperatorPlan {
    node_count: usize,
    stencils: Vec<CompactStencil>,
    idx: Vec<u32>,
    weights: Vec<f64>,
    points: Vec<PointPlan>,
    amplitude: f64,
}

impl OperatorPlan {
    pub fn build(
        spec: &ExponentSpec,
        u: &SampledFunction,
        points: &[Vec<f64>],
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let amplitude = 1.0;
        let mut plan = OperatorPlan {
            node_count: u.grid().len(),
            stencils: Vec::new(),
            idx: Vec::new(),
            weights: Vec::new(),
            points: Vec::with_capacity(points.len()),
            amplitude,
        };
        for x in points {
            let lay = layout(spec, u, x, cfg, Some(amplitude), amplitude)?;
            let center = plan.push_stencil(u.stencil(x));
            let mut terms = Vec::new();
            visit_terms(spec, x, &lay, cfg, |t| match t {
                Term::Pair { a, b, weight, p, .. } => {
                    let a = plan.push_stencil(u.stencil(a));
                    let b = plan.push_stencil(u.stencil(b));
                    terms.push(PlanTerm::Pair { a, b, weight, p });
                }
                Term::Single { zone, y, weight, p, .. } => {
                    let s = plan.push_stencil(u.stencil(y));
                    terms.push(PlanTerm::Single { zone, s, weight, p });
                }
                Term::Radial { weight, p, .. } => terms.push(PlanTerm::Radial { weight, p }),
            })?;
            plan.points.push(PointPlan {
                center,
                far_value: lay.far_value,
                terms,
            });
        }
        Ok(plan)
    }

    fn push_stencil(&mut self, s: Stencil) -> u32 {
        let id = self.stencils.len() as u32;
        match s {
            Stencil::Exterior(v) => self.stencils.push(CompactStencil::Exterior(v)),
            Stencil::Nodes(n) => {
                let start = self.idx.len() as u32;
                for (i, w) in n.terms() {
                    self.idx.push(i as u32);
                    self.weights.push(w);
                }
                self.stencils.push(CompactStencil::Nodes {
                    reference: n.reference as u32,
                    start,
                    len: n.len as u32,
                });
            }
        }
        id
    }

    #[inline]
    fn value(&self, id: u32, values: &[f64]) -> f64 {
        match self.stencils[id as usize] {
            CompactStencil::Exterior(v) => v,
            CompactStencil::Nodes { reference, start, len } => {
                let v0 = values[reference as usize];
                let mut acc = 0.0;
                for k in start as usize..(start + len) as usize {
                    acc += self.weights[k] * (values[self.idx[k] as usize] - v0);
                }
                v0 + acc
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn apply_at(&self, i: usize, values: &[f64]) -> Result<f64> {
        let pt = &self.points[i];
        let ux = self.value(pt.center, values);
        if !ux.is_finite() || ux.abs() > self.amplitude {
            return Err(Error::numeric(format!(
                "value {ux} at plan point {i} exceeds the planned amplitude {}",
                self.amplitude
            )));
        }
        let mut sums = Sums::default();
        for t in &pt.terms {
            match *t {
                PlanTerm::Pair { a, b, weight, p } => {
                    let v = weight * (f_power(ux - self.value(a, values), p) + f_power(ux - self.value(b, values), p));
                    sums.paired += v;
                }
                PlanTerm::Single { zone, s, weight, p } => {
                    let v = weight * f_power(ux - self.value(s, values), p);
                    match zone {
                        Zone::Far => sums.far += v,
                        _ => sums.middle += v,
                    }
                }
                PlanTerm::Radial { weight, p } => sums.far += weight * f_power(ux - pt.far_value, p),
            }
        }
        Ok(sums.total())
    }

    /// Operator values at all planned points.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.node_count {
            return Err(Error::invalid("value vector does not match the planned grid"));
        }
        let results: Vec<Result<f64>> = (0..self.points.len())
            .into_par_iter()
            .map(|i| self.apply_at(i, values))
            .collect();
        collect_indexed(results)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    Decaying,
    Inconclusive,
}

/// Numerical evidence that `u` lies in the weighted tail space at `x`.
#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub radii: Vec<f64>,
    /// `∫_{|y|<R_k} |u|^{p(x,y)−1} / (1 + |y|^{N+sp(x,y)}) dy`.
    pub integrals: Vec<f64>,
    pub increments: Vec<f64>,
    pub tolerance: f64,
    pub verdict: TailVerdict,
    /// Operator contribution from `|y − x| < 1`, when `x` is evaluable.
    pub i1: Option<f64>,
    /// Operator contribution from `|y − x| ≥ 1`.
    pub i2: Option<f64>,
}

pub const TAIL_INCREMENT_TOLERANCE: f64 = 1e-6;

/// Shell-by-shell estimate of the tail-space integral around the origin.
pub fn tail_integrability_check<F: Field + ?Sized>(
    spec: &ExponentSpec,
    u: &F,
    x: &[f64],
    radii: &[f64],
    cfg: &QuadratureConfig,
) -> Result<TailReport> {
    let dim = spec.dimension();
    if u.dimension() != dim || x.len() != dim || !(1..=2).contains(&dim) {
        return Err(Error::invalid("dimension mismatch in tail check"));
    }
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii must be positive and strictly increasing"));
    }
    let width = u.resolution().unwrap_or(0.05).min(0.05);
    let rule = gauss_rule(cfg.nodes_per_level.max(8));
    let nexp = dim as f64;
    let integrand = |y: &[f64]| -> Result<f64> {
        let p = spec.q_checked(distance(x, y))?;
        let v = u.value_at(y).abs();
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(v.powf(p - 1.0) / (1.0 + norm_sq(y).sqrt().powf(nexp + spec.order() * p)))
    };

    let mut integrals = Vec::with_capacity(radii.len());
    let mut increments = Vec::with_capacity(radii.len());
    let mut total = 0.0;
    let mut lo = 0.0;
    for &hi in radii {
        let split = hi.min(4.0).max(lo);
        let mut panels = uniform_panels(lo, split, width);
        panels.extend(geometric_panels(split.max(lo), hi));
        let mut shell = 0.0;
        let mut y = [0.0; 2];
        for (a, b) in panels {
            for (r, w) in rule.on(a, b) {
                if dim == 1 {
                    shell += w * (integrand(&[r])? + integrand(&[-r])?);
                } else {
                    let n = angular_count(r, width, 64);
                    let dth = 2.0 * PI / n as f64;
                    let mut ring = 0.0;
                    for j in 0..n {
                        let th = (j as f64 + 0.5) * dth;
                        y[0] = r * th.cos();
                        y[1] = r * th.sin();
                        ring += integrand(&y)?;
                    }
                    shell += w * r * dth * ring;
                }
            }
        }
        total += shell;
        integrals.push(total);
        increments.push(shell);
        lo = hi;
    }

    let last = *increments.last().unwrap_or(&0.0);
    let tail = &increments[increments.len() / 2..];
    let settling = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let verdict = if last.abs() <= TAIL_INCREMENT_TOLERANCE && settling {
        TailVerdict::Decaying
    } else {
        TailVerdict::Inconclusive
    };
    let (i1, i2) = match eval_plap_detailed(spec, u, x, cfg) {
        Ok(b) => (Some(b.within_unit), Some(b.beyond_unit)),
        Err(_) => (None, None),
    };
    Ok(TailReport {
        radii: radii.to_vec(),
        integrals,
        increments,
        tolerance: TAIL_INCREMENT_TOLERANCE,
        verdict,
        i1,
        i2,
    })
}
