//! Small quadrature helpers shared by the operator and the checkers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let n = n.max(1);
        let rule = GaussLegendre::new(n.try_into().expect("n >= 1"));
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Shared, lazily built rule with `n` nodes.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n.max(1))
        .or_insert_with(|| Arc::new(GaussRule::new(n)))
        .clone()
}

/// Splits `[a, b]` into `ceil((b − a)/width)` equal panels.
pub fn uniform_panels(a: f64, b: f64, width: f64) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| (a + i as f64 * h, if i + 1 == n { b } else { a + (i + 1) as f64 * h }))
        .collect()
}

/// Geometric panels `[a, 2a], [2a, 4a], …` truncated at `b`.
pub fn geometric_panels(a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = a;
    while lo < b {
        let hi = (2.0 * lo).min(b);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Dyadic panels `[δ/2^{k+1}, δ/2^k]` for `k < levels`, innermost first,
/// preceded by the residual panel `[0, δ/2^levels]`.
pub fn dyadic_panels(delta: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(levels + 1);
    let inner = delta / 2f64.powi(levels as i32);
    out.push((0.0, inner));
    for k in (0..levels).rev() {
        let hi = delta / 2f64.powi(k as i32);
        out.push((0.5 * hi, hi));
    }
    out
}

/// Measure of the unit sphere `S^{N−1}` for `N = 1, 2, 3`.
pub fn sphere_measure(dimension: usize) -> f64 {
    match dimension {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("unsupported dimension {dimension}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        let g = GaussRule::new(4);
        let v = g.integrate(0.0, 2.0, |x| x.powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn panels_cover_interval() {
        let p = dyadic_panels(0.25, 12);
        assert_eq!(p.len(), 13);
        assert_eq!(p[0].0, 0.0);
        assert_eq!(p.last().unwrap().1, 0.25);
        assert!(p.windows(2).all(|w| w[0].1 == w[1].0));

        let g = geometric_panels(3.0, 100.0);
        assert_eq!(g.last().unwrap().1, 100.0);
        let u = uniform_panels(0.0, 1.0, 0.3);
        assert_eq!(u.len(), 4);
        assert_eq!(u.last().unwrap().1, 1.0);
    }
}
