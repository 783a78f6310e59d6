use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centred grid on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    cells: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, cells: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!("half width must be positive, got {half_width}")));
        }
        if cells < 16 {
            return Err(Error::Domain(format!("grid needs at least 16 cells, got {cells}")));
        }
        Ok(Self { half_width, cells })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    /// Samples `f` at every cell centre.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.cells).map(|i| f(self.center(i))).collect()
    }
}

/// Constant states continuing the grid function beyond `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub left: f64,
    pub right: f64,
}

impl FarField {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::Domain("far-field states must be finite".into()));
        }
        Ok(Self { left, right })
    }

    pub fn uniform(value: f64) -> Self {
        Self { left: value, right: value }
    }

    pub fn zero() -> Self {
        Self::uniform(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_centers() {
        let g = Grid1D::new(10.0, 64).unwrap();
        assert!((g.spacing() * 64.0 - 20.0).abs() < 1e-12);
        assert!((g.center(0) + 10.0 - 0.5 * g.spacing()).abs() < 1e-12);
        assert!((g.center(63) - 10.0 + 0.5 * g.spacing()).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid1D::new(1.0, 8).is_err());
        assert!(Grid1D::new(0.0, 64).is_err());
        assert!(FarField::new(f64::NAN, 0.0).is_err());
    }
}
