//! Discrete and analytic functions the operator can be applied to.
//!
//! A [`SampledFunction`] stores nodal values on a tensor grid over
//! `[-L, L]^N` together with an exterior rule describing the function off the
//! grid. Off-node values come from a local Lagrange interpolant (quadratic or
//! cubic) written in reference-difference form, `v_ref + Σ w_k (v_k − v_ref)`,
//! so constant data is reproduced exactly.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::PlaneGeometry;

/// Describes a field far away from the origin.
#[derive(Clone, Debug, PartialEq)]
pub enum FarField {
    /// The field vanishes outside the ball `|y − center| < radius`.
    Zero { center: Vec<f64>, radius: f64 },
    /// The field equals `value` outside the ball.
    Constant { center: Vec<f64>, radius: f64, value: f64 },
    /// Outside `|y − center| < radius` the field is given by an exterior rule
    /// bounded in absolute value by `bound`.
    Bounded { center: Vec<f64>, radius: f64, bound: f64 },
}

impl FarField {
    pub fn center(&self) -> &[f64] {
        match self {
            FarField::Zero { center, .. } | FarField::Constant { center, .. } | FarField::Bounded { center, .. } => {
                center
            }
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            FarField::Zero { radius, .. } | FarField::Constant { radius, .. } | FarField::Bounded { radius, .. } => {
                *radius
            }
        }
    }
}

/// A real function on `R^N` that the operator can sample.
pub trait Field: Sync {
    fn dimension(&self) -> usize;

    fn value_at(&self, y: &[f64]) -> f64;

    fn far_field(&self) -> FarField;

    /// Distance from `x` to the edge of the sampled region (nonpositive when
    /// `x` is not strictly inside); `None` for fields defined everywhere.
    fn interior_distance(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Length scale of the underlying discretisation, if any.
    fn resolution(&self) -> Option<f64> {
        None
    }
}

/// Callable exterior values together with a bound on their magnitude.
#[derive(Clone)]
pub struct ExteriorFn {
    pub name: String,
    pub f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub bound: f64,
}

impl fmt::Debug for ExteriorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExteriorFn {{ name: {:?}, bound: {} }}", self.name, self.bound)
    }
}

/// How a sampled function continues outside its grid.
#[derive(Clone, Debug)]
pub enum ExteriorRule {
    /// Zero for `|y| ≥ 1`; nodes outside the unit ball must carry zero.
    ZeroOutsideBall,
    /// Zero outside the grid box.
    ZeroOutsideBox,
    /// A constant outside the grid box.
    Constant(f64),
    /// A user function outside the grid box.
    Callable(ExteriorFn),
}

impl ExteriorRule {
    /// Serialised name, e.g. `zero_outside_ball` or `constant:0.5`.
    pub fn label(&self) -> String {
        match self {
            ExteriorRule::ZeroOutsideBall => "zero_outside_ball".into(),
            ExteriorRule::ZeroOutsideBox => "zero_outside_box".into(),
            ExteriorRule::Constant(c) => format!("constant:{c}"),
            ExteriorRule::Callable(f) => format!("callable:{}", f.name),
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        match label.trim() {
            "zero_outside_ball" => Ok(ExteriorRule::ZeroOutsideBall),
            "zero_outside_box" => Ok(ExteriorRule::ZeroOutsideBox),
            other => {
                if let Some(c) = other.strip_prefix("constant:") {
                    let c: f64 = c
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad constant exterior value {c:?}")))?;
                    Ok(ExteriorRule::Constant(c))
                } else {
                    Err(Error::Parse(format!(
                        "unknown or non-serialisable exterior rule {other:?}"
                    )))
                }
            }
        }
    }
}

/// Tensor grid with `n` equispaced nodes per axis on `[-L, L]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dimension: usize,
    pub nodes_per_axis: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(dimension: usize, nodes_per_axis: usize, half_width: f64) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(Error::invalid(format!("grids are 1D or 2D, got N = {dimension}")));
        }
        if nodes_per_axis < 5 {
            return Err(Error::invalid("a grid needs at least 5 nodes per axis"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid("grid half-width must be positive"));
        }
        Ok(Grid {
            dimension,
            nodes_per_axis,
            half_width,
        })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.nodes_per_axis - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of node `i` along an axis. Exactly antisymmetric:
    /// `axis_node(n − 1 − i) == −axis_node(i)`.
    #[inline]
    pub fn axis_node(&self, i: usize) -> f64 {
        let k = 2 * i as i64 - (self.nodes_per_axis as i64 - 1);
        self.half_width * k as f64 / (self.nodes_per_axis - 1) as f64
    }

    /// Multi-index of a flat node index (first axis fastest).
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        let n = self.nodes_per_axis;
        match self.dimension {
            1 => [idx, 0],
            _ => [idx % n, idx / n],
        }
    }

    pub fn flat_index(&self, mi: [usize; 2]) -> usize {
        match self.dimension {
            1 => mi[0],
            _ => mi[0] + self.nodes_per_axis * mi[1],
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mi = self.multi_index(idx);
        (0..self.dimension).map(|a| self.axis_node(mi[a])).collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Flat index of the node mirrored through the origin along every axis.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let n = self.nodes_per_axis;
        let mi = self.multi_index(idx);
        self.flat_index([n - 1 - mi[0], if self.dimension > 1 { n - 1 - mi[1] } else { 0 }])
    }

    pub fn contains_strictly(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() < self.half_width)
    }
}

/// Largest stencil size (cubic tensor stencil in 2D).
pub const MAX_STENCIL: usize = 16;

/// Interpolation stencil in reference-difference form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stencil {
    /// Value fixed by the exterior rule.
    Exterior(f64),
    Nodes(NodeStencil),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeStencil {
    pub reference: usize,
    pub len: usize,
    pub idx: [usize; MAX_STENCIL],
    pub weights: [f64; MAX_STENCIL],
}

impl NodeStencil {
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx[..self.len]
            .iter()
            .copied()
            .zip(self.weights[..self.len].iter().copied())
    }
}

impl Stencil {
    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Stencil::Exterior(v) => *v,
            Stencil::Nodes(s) => {
                let v0 = values[s.reference];
                let mut acc = 0.0;
                for k in 0..s.len {
                    acc += s.weights[k] * (values[s.idx[k]] - v0);
                }
                v0 + acc
            }
        }
    }
}

/// One-axis Lagrange weights: (first node index, weights, reference offset).
fn axis_weights(grid: &Grid, y: f64, order: usize) -> (usize, [f64; 4], usize, usize) {
    let n = grid.nodes_per_axis;
    let h = grid.step();
    let s = (y + grid.half_width) / h;
    match order {
        3 => {
            let b = (s.floor().max(1.0) as usize).min(n - 3);
            let t = (y - grid.axis_node(b)) / h;
            let w = [
                -t * (t - 1.0) * (t - 2.0) / 6.0,
                (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                -(t + 1.0) * t * (t - 2.0) / 2.0,
                (t + 1.0) * t * (t - 1.0) / 6.0,
            ];
            (b - 1, w, 1, 4)
        }
        _ => {
            // mean of the quadratics through {b−1, b, b+1} and {b, b+1, b+2}:
            // still quadratic on the cell, and continuous across cells
            let b = (s.floor().max(1.0) as usize).min(n - 3);
            let t = (y - grid.axis_node(b)) / h;
            let w = [
                t * (t - 1.0) / 4.0,
                (1.0 - t * t) / 2.0 + (t - 1.0) * (t - 2.0) / 4.0,
                t * (t + 1.0) / 4.0 + t * (2.0 - t) / 2.0,
                t * (t - 1.0) / 4.0,
            ];
            (b - 1, w, 1, 4)
        }
    }
}

/// A discrete function on a [`Grid`] with an exterior rule.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    exterior: ExteriorRule,
    smoothness: usize,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>, exterior: ExteriorRule, smoothness: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if !(2..=3).contains(&smoothness) {
            return Err(Error::invalid("smoothness hint must be 2 or 3"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at node {i}")));
        }
        if matches!(exterior, ExteriorRule::ZeroOutsideBall) {
            for (i, v) in values.iter().enumerate() {
                let x = grid.node(i);
                if norm_sq(&x) >= 1.0 && *v != 0.0 {
                    return Err(Error::invalid(format!(
                        "node {i} at {x:?} lies outside the unit ball but carries {v}"
                    )));
                }
            }
        }
        Ok(SampledFunction {
            grid,
            values,
            exterior,
            smoothness,
        })
    }

    /// Samples `f` at the nodes; nodes outside the unit ball are set to zero
    /// under [`ExteriorRule::ZeroOutsideBall`].
    pub fn from_fn(grid: Grid, exterior: ExteriorRule, smoothness: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let ball = matches!(exterior, ExteriorRule::ZeroOutsideBall);
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                if ball && norm_sq(&x) >= 1.0 {
                    0.0
                } else {
                    f(&x)
                }
            })
            .collect();
        Self::new(grid, values, exterior, smoothness)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn exterior(&self) -> &ExteriorRule {
        &self.exterior
    }
    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    /// Same grid and rules, new nodal values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, values, self.exterior.clone(), self.smoothness)
    }

    pub fn map_values(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(&self.grid.node(i), v))
            .collect();
        self.with_values(values)
    }

    fn exterior_value(&self, y: &[f64]) -> f64 {
        match &self.exterior {
            ExteriorRule::ZeroOutsideBall | ExteriorRule::ZeroOutsideBox => 0.0,
            ExteriorRule::Constant(c) => *c,
            ExteriorRule::Callable(f) => (f.f)(y),
        }
    }

    /// The interpolation stencil used for the value at `y`.
    pub fn stencil(&self, y: &[f64]) -> Stencil {
        if matches!(self.exterior, ExteriorRule::ZeroOutsideBall) && norm_sq(y) >= 1.0 {
            return Stencil::Exterior(0.0);
        }
        if y.iter().any(|c| c.abs() > self.grid.half_width) {
            return Stencil::Exterior(self.exterior_value(y));
        }
        let g = &self.grid;
        let (b0, w0, r0, l0) = axis_weights(g, y[0], self.smoothness);
        let mut st = NodeStencil {
            reference: 0,
            len: 0,
            idx: [0; MAX_STENCIL],
            weights: [0.0; MAX_STENCIL],
        };
        if g.dimension == 1 {
            st.reference = b0 + r0;
            st.len = l0;
            for i in 0..l0 {
                st.idx[i] = b0 + i;
                st.weights[i] = w0[i];
            }
            return Stencil::Nodes(st);
        }
        let (b1, w1, r1, l1) = axis_weights(g, y[1], self.smoothness);
        st.reference = g.flat_index([b0 + r0, b1 + r1]);
        for j in 0..l1 {
            for i in 0..l0 {
                st.idx[st.len] = g.flat_index([b0 + i, b1 + j]);
                st.weights[st.len] = w0[i] * w1[j];
                st.len += 1;
            }
        }
        Stencil::Nodes(st)
    }

    /// Largest nodal magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let g = &self.grid;
        let h = g.step();
        let mut mi = [0usize; 2];
        for (a, c) in x.iter().enumerate().take(g.dimension) {
            let k = ((c + g.half_width) / h)
                .round()
                .clamp(0.0, (g.nodes_per_axis - 1) as f64);
            mi[a] = k as usize;
        }
        g.flat_index(mi)
    }
}

impl Field for SampledFunction {
    fn dimension(&self) -> usize {
        self.grid.dimension
    }

    fn value_at(&self, y: &[f64]) -> f64 {
        self.stencil(y).apply(&self.values)
    }

    fn far_field(&self) -> FarField {
        let center = vec![0.0; self.grid.dimension];
        let box_radius = self.grid.half_width * (self.grid.dimension as f64).sqrt();
        match &self.exterior {
            ExteriorRule::ZeroOutsideBall => FarField::Zero { center, radius: 1.0 },
            ExteriorRule::ZeroOutsideBox => FarField::Zero {
                center,
                radius: box_radius,
            },
            ExteriorRule::Constant(c) => FarField::Constant {
                center,
                radius: box_radius,
                value: *c,
            },
            ExteriorRule::Callable(f) => FarField::Bounded {
                center,
                radius: box_radius,
                bound: f.bound,
            },
        }
    }

    fn interior_distance(&self, x: &[f64]) -> Option<f64> {
        Some(
            x.iter()
                .map(|c| self.grid.half_width - c.abs())
                .fold(f64::INFINITY, f64::min),
        )
    }

    fn resolution(&self) -> Option<f64> {
        Some(self.grid.step())
    }
}

/// A closed-form field.
#[derive(Clone)]
pub struct AnalyticField {
    dimension: usize,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    far: FarField,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AnalyticField {{ dimension: {}, far: {:?} }}",
            self.dimension, self.far
        )
    }
}

impl AnalyticField {
    pub fn new(dimension: usize, far: FarField, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticField {
            dimension,
            f: Arc::new(f),
            far,
        }
    }

    /// A function supported in the closed unit ball.
    pub fn in_unit_ball(dimension: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let far = FarField::Zero {
            center: vec![0.0; dimension],
            radius: 1.0,
        };
        Self::new(dimension, far, f)
    }

    pub fn constant(dimension: usize, c: f64) -> Self {
        let far = FarField::Constant {
            center: vec![0.0; dimension],
            radius: 0.0,
            value: c,
        };
        Self::new(dimension, far, move |_| c)
    }
}

impl Field for AnalyticField {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value_at(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
    fn far_field(&self) -> FarField {
        self.far.clone()
    }
}

/// `u_λ(y) = u(y_λ)`: a field pre-composed with a reflection, never resampled.
pub struct Reflected<'a, F: Field + ?Sized> {
    inner: &'a F,
    plane: &'a PlaneGeometry,
}

impl<'a, F: Field + ?Sized> Reflected<'a, F> {
    pub fn new(inner: &'a F, plane: &'a PlaneGeometry) -> Self {
        Reflected { inner, plane }
    }
}

impl<F: Field + ?Sized> Field for Reflected<'_, F> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn value_at(&self, y: &[f64]) -> f64 {
        self.inner.value_at(&self.plane.reflect(y))
    }
    fn far_field(&self) -> FarField {
        match self.inner.far_field() {
            FarField::Zero { center, radius } => FarField::Zero {
                center: self.plane.reflect(&center),
                radius,
            },
            FarField::Constant { center, radius, value } => FarField::Constant {
                center: self.plane.reflect(&center),
                radius,
                value,
            },
            FarField::Bounded { center, radius, bound } => FarField::Bounded {
                center: self.plane.reflect(&center),
                radius,
                bound,
            },
        }
    }
    fn interior_distance(&self, x: &[f64]) -> Option<f64> {
        self.inner.interior_distance(&self.plane.reflect(x))
    }
    fn resolution(&self) -> Option<f64> {
        self.inner.resolution()
    }
}

/// `−u`, used to check oddness of the operator.
pub struct Negated<'a, F: Field + ?Sized>(pub &'a F);

impl<F: Field + ?Sized> Field for Negated<'_, F> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }
    fn value_at(&self, y: &[f64]) -> f64 {
        -self.0.value_at(y)
    }
    fn far_field(&self) -> FarField {
        self.0.far_field()
    }
    fn interior_distance(&self, x: &[f64]) -> Option<f64> {
        self.0.interior_distance(x)
    }
    fn resolution(&self) -> Option<f64> {
        self.0.resolution()
    }
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_exactly_symmetric() {
        let g = Grid::new(1, 201, 1.5).unwrap();
        for i in 0..201 {
            assert_eq!(g.axis_node(200 - i), -g.axis_node(i));
        }
        assert_eq!(g.axis_node(100), 0.0);
        assert_eq!(g.axis_node(0), -1.5);
    }

    #[test]
    fn interpolation_reproduces_quadratics_and_cubics() {
        let g = Grid::new(1, 41, 2.0).unwrap();
        let q =
            SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBox, 2, |x| 1.0 + x[0] - 2.0 * x[0] * x[0]).unwrap();
        let c = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBox, 3, |x| x[0].powi(3) - x[0]).unwrap();
        for y in [-1.93, -0.31, 0.0, 0.77, 1.99] {
            assert!((q.value_at(&[y]) - (1.0 + y - 2.0 * y * y)).abs() < 1e-12);
            assert!((c.value_at(&[y]) - (y.powi(3) - y)).abs() < 1e-12);
        }
        assert_eq!(q.value_at(&[2.5]), 0.0);
    }

    #[test]
    fn tensor_interpolation_in_2d() {
        let g = Grid::new(2, 21, 1.5).unwrap();
        let f = |x: &[f64]| 0.5 + x[0] * x[1] - x[1] * x[1];
        let u = SampledFunction::from_fn(g, ExteriorRule::Constant(0.25), 2, f).unwrap();
        let y = [0.123, -0.456];
        assert!((u.value_at(&y) - f(&y)).abs() < 1e-12);
        assert_eq!(u.value_at(&[1.6, 0.0]), 0.25);
    }

    #[test]
    fn constants_are_reproduced_exactly() {
        let g = Grid::new(2, 11, 1.0).unwrap();
        let c = 0.1 + 0.2;
        let u = SampledFunction::from_fn(g, ExteriorRule::Constant(c), 3, |_| c).unwrap();
        for y in [[0.0137, -0.7], [0.333, 0.999], [-0.5, 0.25]] {
            assert_eq!(u.value_at(&y), c);
        }
    }

    #[test]
    fn ball_rule_forces_zero_outside() {
        let g = Grid::new(1, 21, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, |_| 1.0).unwrap();
        assert_eq!(u.value_at(&[1.0]), 0.0);
        assert_eq!(u.value_at(&[-1.2]), 0.0);
        assert!(SampledFunction::new(g, vec![1.0; 21], ExteriorRule::ZeroOutsideBall, 2).is_err());
    }

    #[test]
    fn exterior_labels_round_trip() {
        for r in [
            ExteriorRule::ZeroOutsideBall,
            ExteriorRule::ZeroOutsideBox,
            ExteriorRule::Constant(-0.5),
        ] {
            assert_eq!(ExteriorRule::parse(&r.label()).unwrap().label(), r.label());
        }
        assert!(ExteriorRule::parse("callable:foo").is_err());
    }
}
