//! Sampled certification of the auxiliary inequalities behind the maximum
//! principles: the mean-value bound for `f(t) = |t|^{p−2} t`, monotonicity of
//! the kernel across a reflecting plane, positivity of the weight ratio
//! `|x − y|^{N+sp} / (1 + |y|^{N+sp})`, and the sign of
//! `h(p₁) − h(p₂)` with `h(t) = (t − 1)|t₀|^{t−2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{distance, log_m_bound, ExponentSpec};
use crate::operator::{f_power, kernel};
use crate::plane::PlaneGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Case {
    /// `|t_small| ≥ |t_big|/2`, same sign.
    SameSignClose,
    /// `|t_small| ≥ |t_big|/2`, opposite signs.
    OppositeSign,
    /// `|t_small| < |t_big|/2`.
    FarApart,
}

impl C0Case {
    pub fn classify(t1: f64, t2: f64) -> Self {
        let (small, big) = if t1.abs() <= t2.abs() { (t1, t2) } else { (t2, t1) };
        if small.abs() >= 0.5 * big.abs() {
            if small * big >= 0.0 {
                C0Case::SameSignClose
            } else {
                C0Case::OppositeSign
            }
        } else {
            C0Case::FarApart
        }
    }

    pub fn constant(self, p_minus: f64, p_plus: f64) -> f64 {
        match self {
            C0Case::SameSignClose => 2f64.powf(2.0 - p_plus),
            C0Case::OppositeSign => 1.0 / (2.0 * (p_plus - 1.0)),
            C0Case::FarApart => (2f64.powf(p_minus - 1.0) - 1.0) / (2f64.powf(p_minus) * (p_plus - 1.0)),
        }
    }
}

/// A mean-value point `α` for `f(t₂) − f(t₁) = f′(α)(t₂ − t₁)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanValueWitness {
    pub t1: f64,
    pub t2: f64,
    pub p: f64,
    pub alpha: f64,
    pub c0_case: C0Case,
    /// Case constant with `p⁻ = p⁺ = p`.
    pub c0: f64,
    /// `|f(t₂) − f(t₁) − f′(α)(t₂ − t₁)|`.
    pub residual: f64,
}

pub const MEAN_VALUE_RESIDUAL: f64 = 1e-10;

fn f_prime(a: f64, p: f64) -> f64 {
    (p - 1.0) * a.abs().powf(p - 2.0)
}

/// Solves the mean-value equation for `f(t) = |t|^{p−2} t` by bisection on `|α|`.
///
/// `f′` is even and increasing in `|α|`, so the equation has one root in `|α|`.
/// For endpoints of opposite sign both sign branches may contain it; the
/// nonnegative branch is taken then.
pub fn mean_value_alpha(t1: f64, t2: f64, p: f64) -> Result<MeanValueWitness> {
    if !(p > 2.0 && p.is_finite()) || !t1.is_finite() || !t2.is_finite() {
        return Err(Error::invalid(format!(
            "mean value needs p > 2 and finite endpoints, got p = {p}"
        )));
    }
    let c0_case = C0Case::classify(t1, t2);
    let c0 = c0_case.constant(p, p);
    if t1 == t2 {
        return Ok(MeanValueWitness {
            t1,
            t2,
            p,
            alpha: t1,
            c0_case,
            c0,
            residual: 0.0,
        });
    }
    let df = f_power(t2, p) - f_power(t1, p);
    let slope = df / (t2 - t1);
    let (lo, hi) = (t1.min(t2), t1.max(t2));
    let (sign, a_lo, a_hi) = if lo >= 0.0 {
        (1.0, lo, hi)
    } else if hi <= 0.0 {
        (-1.0, -hi, -lo)
    } else {
        let target = (slope / (p - 1.0)).powf(1.0 / (p - 2.0));
        if target <= hi {
            (1.0, 0.0, hi)
        } else {
            (-1.0, 0.0, -lo)
        }
    };
    let g = |a: f64| f_prime(a, p) - slope;
    let (mut a, mut b) = (a_lo, a_hi);
    let (ga, gb) = (g(a), g(b));
    // allow the bracket to close within rounding of the slope
    let slack = 64.0 * f64::EPSILON * slope.abs().max(1.0);
    if ga > slack || gb < -slack {
        return Err(Error::numeric(format!(
            "no mean-value bracket for t1 = {t1}, t2 = {t2}, p = {p}: g({a}) = {ga:.3e}, g({b}) = {gb:.3e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let alpha = sign * 0.5 * (a + b);
    let residual = (df - f_prime(alpha, p) * (t2 - t1)).abs();
    Ok(MeanValueWitness {
        t1,
        t2,
        p,
        alpha,
        c0_case,
        c0,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub passed: bool,
    pub c0: f64,
    /// `|α|^{p−2} − c₀ max(|t₁|^{p−2}, |t₂|^{p−2})`.
    pub margin: f64,
}

/// `|α|^{p−2} ≥ c₀ max(|t₁|^{p−2}, |t₂|^{p−2})` with `c₀` from `p⁻ ≤ p ≤ p⁺`.
pub fn check_c0_bound(w: &MeanValueWitness, p_minus: f64, p_plus: f64) -> Result<BoundCheck> {
    if !(2.0 < p_minus && p_minus <= w.p && w.p <= p_plus) {
        return Err(Error::invalid(format!(
            "need 2 < p⁻ ≤ p ≤ p⁺, got {p_minus}, {}, {p_plus}",
            w.p
        )));
    }
    let e = w.p - 2.0;
    let c0 = w.c0_case.constant(p_minus, p_plus);
    let margin = w.alpha.abs().powf(e) - c0 * w.t1.abs().powf(e).max(w.t2.abs().powf(e));
    Ok(BoundCheck {
        passed: margin >= 0.0,
        c0,
        margin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelCheck {
    /// `K(x⁰, y) − K(x⁰, y_λ)`.
    pub kappa: f64,
    /// `x⁰` or `y` lies on the plane, where `κ = 0` and no strict claim is made.
    pub boundary: bool,
    pub passed: bool,
}

/// Sign of `κ(x⁰, y) = K(x⁰, y) − K(x⁰, y_λ)` for `x⁰ ∈ H̄_λ`, `y ∈ H̄_λ`.
pub fn check_kernel_monotone(spec: &ExponentSpec, plane: &PlaneGeometry, x0: &[f64], y: &[f64]) -> Result<KernelCheck> {
    if plane.signed_distance(x0) > 0.0 || plane.signed_distance(y) > 0.0 {
        return Err(Error::precondition(
            "x⁰ and y must lie in the closed half-space ⟨·, e⟩ ≤ λ",
        ));
    }
    let yl = plane.reflect(y);
    let kappa = kernel(spec, x0, y)? - kernel(spec, x0, &yl)?;
    let boundary = plane.on_plane(x0) || plane.on_plane(y);
    let passed = if boundary {
        kappa.abs() <= 1e-10 * kernel(spec, x0, y)?
    } else {
        kappa > 0.0
    };
    Ok(KernelCheck {
        kappa,
        boundary,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfimumReport {
    pub infimum: f64,
    /// Sample attaining the infimum.
    pub argmin: Vec<f64>,
    pub samples: usize,
    /// `(|y|, ratio)` far out along the sampled rays.
    pub far_field: Vec<(f64, f64)>,
    pub margin: f64,
    pub passed: bool,
}

pub const CX_MARGIN: f64 = 1e-6;

fn weight_ratio(spec: &ExponentSpec, x: &[f64], y: &[f64]) -> f64 {
    let d = distance(x, y);
    let e = spec.dimension() as f64 + spec.order() * spec.q(d);
    let ny = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    d.powf(e) / (1.0 + ny.powf(e))
}

/// Sampled infimum over `|x − y| > 1` of `|x − y|^{N+sp(x,y)} / (1 + |y|^{N+sp(x,y)})`.
pub fn check_cx_positive(spec: &ExponentSpec, x: &[f64], sample_radius: f64, samples: usize) -> Result<InfimumReport> {
    let n = spec.dimension();
    if x.len() != n || !(1..=2).contains(&n) {
        return Err(Error::invalid("point dimension does not match the spec"));
    }
    if x.iter().all(|c| *c == 0.0) {
        return Err(Error::precondition("the weight bound is stated for x ≠ 0"));
    }
    if samples == 0 || !(sample_radius > 0.0) {
        return Err(Error::invalid("need at least one sample and a positive radius"));
    }
    let directions: Vec<Vec<f64>> = if n == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..16)
            .map(|k| {
                let th = k as f64 * std::f64::consts::PI / 8.0;
                vec![th.cos(), th.sin()]
            })
            .collect()
    };
    let per_ray = samples.div_ceil(directions.len()).max(1);
    let mut offsets = vec![1e-6];
    offsets.extend((1..=per_ray).map(|i| sample_radius * i as f64 / per_ray as f64));

    let mut infimum = f64::INFINITY;
    let mut argmin = x.to_vec();
    let mut count = 0;
    for e in &directions {
        for &o in &offsets {
            let y: Vec<f64> = x.iter().zip(e).map(|(a, b)| a + (1.0 + o) * b).collect();
            let r = weight_ratio(spec, x, &y);
            count += 1;
            if r < infimum {
                infimum = r;
                argmin = y;
            }
        }
    }
    let far_field = [1e3, 1e6, 1e9]
        .iter()
        .map(|&big| {
            let y: Vec<f64> = x.iter().zip(&directions[0]).map(|(a, b)| a + big * b).collect();
            let ny = y.iter().map(|c| c * c).sum::<f64>().sqrt();
            (ny, weight_ratio(spec, x, &y))
        })
        .collect::<Vec<_>>();
    let far_min = far_field.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    Ok(InfimumReport {
        infimum,
        argmin,
        samples: count,
        margin: CX_MARGIN,
        passed: infimum > CX_MARGIN && far_min > CX_MARGIN,
        far_field,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GPrimeSample {
    /// `h(p₁) − h(p₂)` with `h(t) = (t − 1)|t₀|^{t−2}`.
    pub difference: f64,
    pub passed: bool,
}

/// Sign of `(p₁ − 1)|t₀|^{p₁−2} − (p₂ − 1)|t₀|^{p₂−2}` for `|t₀| ∈ (0, m)` and
/// `1 − 1/ln m ≤ p₁ ≤ p₂`.
pub fn check_g_prime(t0: f64, p1: f64, p2: f64, m: f64) -> Result<GPrimeSample> {
    if !(m > 0.0 && m < 1.0) || !(t0 != 0.0 && t0.abs() < m) {
        return Err(Error::invalid("need 0 < |t₀| < m < 1"));
    }
    if !(log_m_bound(m) <= p1 && p1 <= p2) {
        return Err(Error::invalid(format!("need 1 − 1/ln m ≤ p₁ ≤ p₂, got {p1}, {p2}")));
    }
    let a = t0.abs();
    let h = |t: f64| (t - 1.0) * a.powf(t - 2.0);
    let difference = h(p1) - h(p2);
    Ok(GPrimeSample {
        difference,
        passed: difference >= 0.0,
    })
}

/// Outcome of a seeded randomized suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub failures: usize,
    /// Smallest margin seen (the quantity asserted nonnegative or positive).
    pub min_margin: f64,
    /// Largest auxiliary error (mean-value residual, boundary |κ|), if any.
    pub max_error: f64,
    pub passed: bool,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    fn new(name: &str, seed: u64) -> Self {
        SuiteReport {
            name: name.into(),
            seed,
            samples: 0,
            failures: 0,
            min_margin: f64::INFINITY,
            max_error: 0.0,
            passed: true,
            first_failure: None,
        }
    }

    fn fail(&mut self, what: String) {
        self.failures += 1;
        self.passed = false;
        if self.first_failure.is_none() {
            self.first_failure = Some(what);
        }
    }
}

/// Random `(t₁, t₂) ∈ [−1, 1]²`, `p ∈ (2, 6]`, `p⁻ ∈ (2, p]`, `p⁺ ∈ [p, 6]`.
pub fn mean_value_suite(seed: u64, samples: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("mean_value_bound", seed);
    for _ in 0..samples {
        let t1 = rng.random_range(-1.0..=1.0);
        let t2 = rng.random_range(-1.0..=1.0);
        let p = 6.0 - 4.0 * rng.random::<f64>();
        let p_minus = p - (p - 2.0) * rng.random::<f64>();
        let p_plus = p + (6.0 - p) * rng.random::<f64>();
        rep.samples += 1;
        let w = match mean_value_alpha(t1, t2, p) {
            Ok(w) => w,
            Err(e) => {
                rep.fail(format!("t1={t1}, t2={t2}, p={p}: {e}"));
                continue;
            }
        };
        let tol = MEAN_VALUE_RESIDUAL * (f_power(t2, p) - f_power(t1, p)).abs().max(1.0);
        rep.max_error = rep.max_error.max(w.residual);
        let between = w.alpha >= t1.min(t2) && w.alpha <= t1.max(t2);
        let check = check_c0_bound(&w, p_minus, p_plus).expect("sampled exponents are ordered");
        rep.min_margin = rep.min_margin.min(check.margin);
        if w.residual > tol || !between || !check.passed {
            rep.fail(format!("{w:?} with p⁻={p_minus}, p⁺={p_plus}: margin {}", check.margin));
        }
    }
    rep
}

/// Exponent specs satisfying the radial monotonicity hypotheses, used by the
/// kernel suite.
pub fn monotone_exponent_specs() -> Vec<ExponentSpec> {
    let mut out = Vec::new();
    for (n, s, m) in [(1, 0.3, 0.5), (2, 0.4, 0.5), (2, 0.5, 0.3), (1, 0.2, 0.8)] {
        out.push(ExponentSpec::example_ii(n, s, m).expect("valid example"));
    }
    out.push(ExponentSpec::constant(2, 0.5, 0.5, 3.0).expect("valid constant"));
    out.push(ExponentSpec::constant(1, 0.25, 0.5, 3.5).expect("valid constant"));
    out
}

/// Random `(x⁰, y, λ)` with `x⁰ ∈ H̄_λ`, `y ∈ H_λ`, plane distances in `(10⁻³, 2)`.
pub fn kernel_monotone_suite(seed: u64, samples: usize) -> SuiteReport {
    let specs = monotone_exponent_specs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("kernel_monotone", seed);
    for i in 0..samples {
        let spec = &specs[i % specs.len()];
        let n = spec.dimension();
        let lambda = rng.random_range(-1.0..1.0);
        let plane = if n == 1 {
            PlaneGeometry::axis(1, lambda)
        } else {
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            PlaneGeometry::new(&[th.cos(), th.sin()], lambda).expect("unit direction")
        };
        let e = plane.direction().to_vec();
        let place = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let depth = rng.random_range(1e-3..2.0);
            let along = if n == 2 { rng.random_range(-2.0..2.0) } else { 0.0 };
            let mut p: Vec<f64> = e.iter().map(|c| (lambda - depth) * c).collect();
            if n == 2 {
                p[0] += -e[1] * along;
                p[1] += e[0] * along;
            }
            p
        };
        let x0 = place(&mut rng);
        let y = place(&mut rng);
        rep.samples += 1;
        match check_kernel_monotone(spec, &plane, &x0, &y) {
            Ok(k) => {
                rep.min_margin = rep.min_margin.min(k.kappa);
                if !k.passed || k.boundary {
                    rep.fail(format!("x0={x0:?}, y={y:?}, λ={lambda}: κ = {}", k.kappa));
                }
            }
            Err(err) => rep.fail(format!("x0={x0:?}, y={y:?}, λ={lambda}: {err}")),
        }
        // reflection fixed point: y on the plane gives κ = 0
        let mut yb: Vec<f64> = e.iter().map(|c| lambda * c).collect();
        if n == 2 {
            let along = rng.random_range(-1.0..1.0);
            yb[0] += -e[1] * along;
            yb[1] += e[0] * along;
        }
        if distance(&x0, &yb) > 0.0 {
            let yl = plane.reflect(&yb);
            match (kernel(spec, &x0, &yb), kernel(spec, &x0, &yl)) {
                (Ok(a), Ok(b)) => {
                    let rel = (a - b).abs() / a;
                    rep.max_error = rep.max_error.max(rel);
                    if rel > 1e-10 {
                        rep.fail(format!("boundary sample y={yb:?}: κ = {}", a - b));
                    }
                }
                (Err(err), _) | (_, Err(err)) => rep.fail(format!("boundary sample: {err}")),
            }
        }
    }
    rep
}

/// Random `|t₀| ∈ (0, m)`, `1 − 1/ln m ≤ p₁ ≤ p₂ ≤ p⁺`.
pub fn g_prime_suite(seed: u64, samples: usize, m: f64, p_plus: f64) -> Result<SuiteReport> {
    let lower = log_m_bound(m);
    if !(p_plus >= lower) {
        return Err(Error::invalid("p⁺ must be at least 1 − 1/ln m"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("g_prime_sign", seed);
    for _ in 0..samples {
        let mag = m * (1.0 - rng.random::<f64>());
        let mag = if mag >= m { m * 0.5 } else { mag };
        let t0 = if rng.random::<bool>() { mag } else { -mag };
        let a = rng.random_range(lower..=p_plus);
        let b = rng.random_range(lower..=p_plus);
        let (p1, p2) = (a.min(b), a.max(b));
        rep.samples += 1;
        let g = check_g_prime(t0, p1, p2, m)?;
        rep.min_margin = rep.min_margin.min(g.difference);
        if !g.passed {
            rep.fail(format!("t0={t0}, p1={p1}, p2={p2}: difference {}", g.difference));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_endpoints() {
        let w = mean_value_alpha(0.3, 0.3, 3.0).unwrap();
        assert_eq!(w.alpha, 0.3);
        assert!(check_c0_bound(&w, 3.0, 3.0).unwrap().passed);
    }

    #[test]
    fn square_on_positive_axis() {
        let w = mean_value_alpha(1.0, 2.0, 3.0).unwrap();
        assert!((w.alpha - 1.5).abs() < 1e-12);
        assert_eq!(w.c0_case, C0Case::SameSignClose);
        assert_eq!(w.c0, 0.5);
        assert!(check_c0_bound(&w, 3.0, 3.0).unwrap().passed);
    }

    #[test]
    fn cube_across_zero() {
        let w = mean_value_alpha(-1.0, 1.0, 4.0).unwrap();
        assert!((w.alpha - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(w.c0_case, C0Case::OppositeSign);
        assert!((w.c0 - 1.0 / 6.0).abs() < 1e-15);
        let c = check_c0_bound(&w, 4.0, 4.0).unwrap();
        assert!(c.passed && (c.margin - (1.0 / 3.0 - 1.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn far_apart_negative_branch() {
        let w = mean_value_alpha(0.1, -1.0, 3.5).unwrap();
        assert_eq!(w.c0_case, C0Case::FarApart);
        assert!(w.alpha < 0.0 && w.alpha >= -1.0);
        assert!(w.residual < 1e-12);
    }

    #[test]
    fn kernel_difference_across_plane() {
        let spec = ExponentSpec::constant(1, 0.5, 0.5, 3.0).unwrap();
        let plane = PlaneGeometry::axis(1, 0.0);
        let k = check_kernel_monotone(&spec, &plane, &[-0.5], &[-1.0]).unwrap();
        assert!((k.kappa - (0.5f64.powf(-2.5) - 1.5f64.powf(-2.5))).abs() < 1e-12);
        assert!(k.passed && !k.boundary);
        let k = check_kernel_monotone(&spec, &plane, &[-0.5], &[0.0]).unwrap();
        assert!(k.boundary && k.kappa == 0.0);
        assert!(check_kernel_monotone(&spec, &plane, &[0.5], &[-1.0]).is_err());
    }

    #[test]
    fn weight_ratio_is_positive() {
        let spec = ExponentSpec::constant(1, 0.5, 0.5, 3.0).unwrap();
        let r = check_cx_positive(&spec, &[2.0], 10.0, 200).unwrap();
        assert!(r.passed && r.infimum > 0.0);
        assert!((r.far_field[2].1 - 1.0).abs() < 1e-6);
        assert!(check_cx_positive(&spec, &[0.0], 10.0, 10).is_err());
    }

    #[test]
    fn g_prime_sign() {
        let g = check_g_prime(0.3, 2.5, 3.0, 0.5).unwrap();
        assert!(g.passed && g.difference > 0.0);
        assert!(check_g_prime(0.6, 2.5, 3.0, 0.5).is_err());
    }

    #[test]
    fn small_suites_pass() {
        assert!(mean_value_suite(7, 2000).passed);
        assert!(kernel_monotone_suite(7, 600).passed);
        assert!(g_prime_suite(7, 2000, 0.5, 6.0).unwrap().passed);
    }
}
