use serde::Serialize;

use crate::error::{Error, Result};

/// Hyperplane `T_λ = {⟨x, e⟩ = λ}` with unit normal `e`.
///
/// `H_λ = {⟨x, e⟩ < λ}` is the open half-space behind the plane and
/// `x_λ = x − 2(⟨x, e⟩ − λ)e` the mirror image of `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneGeometry {
    direction: Vec<f64>,
    offset: f64,
}

impl PlaneGeometry {
    /// Normalises `direction`; fails for a zero or non-finite vector.
    pub fn new(direction: &[f64], offset: f64) -> Result<Self> {
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) || !offset.is_finite() {
            return Err(Error::invalid(
                "plane needs a nonzero finite direction and a finite offset",
            ));
        }
        let direction = if (norm - 1.0).abs() <= 1e-15 {
            direction.to_vec()
        } else {
            direction.iter().map(|c| c / norm).collect()
        };
        Ok(PlaneGeometry { direction, offset })
    }

    /// The plane `x₁ = λ`.
    pub fn axis(dimension: usize, offset: f64) -> Self {
        let mut direction = vec![0.0; dimension];
        direction[0] = 1.0;
        PlaneGeometry { direction, offset }
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dimension(&self) -> usize {
        self.direction.len()
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        PlaneGeometry {
            direction: self.direction.clone(),
            offset,
        }
    }

    /// `⟨x, e⟩`.
    #[inline]
    pub fn coordinate(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.direction).map(|(a, b)| a * b).sum()
    }

    /// Signed distance `⟨x, e⟩ − λ`; negative inside `H_λ`.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.coordinate(x) - self.offset
    }

    pub fn reflect(&self, x: &[f64]) -> Vec<f64> {
        let d = 2.0 * self.signed_distance(x);
        x.iter().zip(&self.direction).map(|(a, e)| a - d * e).collect()
    }

    pub fn in_half_space(&self, x: &[f64]) -> bool {
        self.signed_distance(x) < 0.0
    }

    pub fn in_closed_half_space(&self, x: &[f64]) -> bool {
        self.signed_distance(x) <= 0.0
    }

    pub fn on_plane(&self, x: &[f64]) -> bool {
        self.signed_distance(x) == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflects_across_offset_plane() {
        let p = PlaneGeometry::new(&[1.0, 0.0], -0.1).unwrap();
        let r = p.reflect(&[-0.3, 0.2]);
        assert!((r[0] - 0.1).abs() < 1e-15 && r[1] == 0.2);
        assert_eq!(p.reflect(&[-0.1, 0.7]), vec![-0.1, 0.7]);
    }

    #[test]
    fn direction_is_normalised() {
        let p = PlaneGeometry::new(&[3.0, 4.0], 0.0).unwrap();
        let n: f64 = p.direction().iter().map(|c| c * c).sum();
        assert!((n - 1.0).abs() < 1e-14);
        assert!(PlaneGeometry::new(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn reflection_is_an_involution() {
        let p = PlaneGeometry::new(&[0.6, -0.8], 0.37).unwrap();
        for x in [[0.1, 0.2], [-3.0, 1.5], [0.9, -0.9]] {
            let back = p.reflect(&p.reflect(&x));
            assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
        }
    }
}
