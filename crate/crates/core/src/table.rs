use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Size of a monotonicity or range violation that is silently repaired.
pub const REPAIR_TOLERANCE: f64 = 1e-9;

/// CDF (and optionally density) values on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<T> {
    grid: Vec<T>,
    cdf: Vec<T>,
    pdf: Option<Vec<T>>,
    warnings: Vec<String>,
}

/// Checks that a grid is non-empty, finite and strictly increasing.
pub fn validate_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Grid("grid contains non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if n == 0 || (n > 1 && !(hi > lo)) {
        return Err(Error::Grid(format!("need n ≥ 1 and lo < hi, got {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / T::of_usize(n - 1);
    let mut g: Vec<T> = (0..n).map(|i| lo + step * T::of_usize(i)).collect();
    g[n - 1] = hi;
    Ok(g)
}

impl<T: Scalar> DistributionTable<T> {
    /// Builds a table, repairing monotonicity and [0, 1] excursions no
    /// larger than [`REPAIR_TOLERANCE`] and recording larger ones as
    /// warnings (they are repaired too).
    pub fn new(grid: Vec<T>, cdf: Vec<T>, pdf: Option<Vec<T>>) -> Result<Self> {
        validate_grid(&grid)?;
        if cdf.len() != grid.len() || pdf.as_ref().is_some_and(|p| p.len() != grid.len()) {
            return Err(Error::Grid("value columns must match the grid length".into()));
        }
        let mut table = DistributionTable { grid, cdf, pdf, warnings: Vec::new() };
        table.repair();
        Ok(table)
    }

    fn repair(&mut self) {
        let tol = T::lit(REPAIR_TOLERANCE);
        let mut worst_drop = T::zero();
        let mut worst_range = T::zero();
        let mut running = T::zero();
        for v in self.cdf.iter_mut() {
            if *v > T::one() {
                worst_range = worst_range.max(*v - T::one());
                *v = T::one();
            }
            if *v < T::zero() {
                worst_range = worst_range.max(-*v);
                *v = T::zero();
            }
            if *v < running {
                worst_drop = worst_drop.max(running - *v);
                *v = running;
            }
            running = *v;
        }
        if worst_drop > tol {
            self.warnings.push(format!("cdf decreased by up to {:e} before repair", worst_drop.as_f64()));
        }
        if worst_range > tol {
            self.warnings.push(format!("cdf left [0, 1] by up to {:e} before clamping", worst_range.as_f64()));
        }
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn cdf(&self) -> &[T] {
        &self.cdf
    }

    pub fn pdf(&self) -> Option<&[T]> {
        self.pdf.as_deref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn push_warning(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// First CDF value ≤ 0.001 and last ≥ 0.999.
    pub fn covers_bulk(&self) -> bool {
        self.cdf[0] <= T::lit(0.001) && self.cdf[self.cdf.len() - 1] >= T::lit(0.999)
    }

    /// Linear interpolation of the CDF, constant beyond the grid ends.
    pub fn cdf_at(&self, x: T) -> T {
        let g = &self.grid;
        if x <= g[0] {
            return self.cdf[0];
        }
        if x >= g[g.len() - 1] {
            return self.cdf[g.len() - 1];
        }
        let i = g.partition_point(|v| *v <= x);
        let (x0, x1) = (g[i - 1], g[i]);
        let w = (x - x0) / (x1 - x0);
        self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
    }

    /// Trapezoid integral of the density column.
    pub fn pdf_integral(&self) -> Option<T> {
        let p = self.pdf.as_ref()?;
        Some(
            self.grid
                .windows(2)
                .zip(p.windows(2))
                .map(|(x, f)| (x[1] - x[0]) * (f[0] + f[1]) * T::lit(0.5))
                .sum(),
        )
    }

    /// (mean, variance, third central moment) of the tabulated law, treating
    /// each CDF increment as a point mass at the cell midpoint.
    pub fn moments(&self) -> (T, T, T) {
        let g = &self.grid;
        let masses: Vec<(T, T)> = g
            .windows(2)
            .zip(self.cdf.windows(2))
            .map(|(x, f)| ((x[0] + x[1]) * T::lit(0.5), f[1] - f[0]))
            .collect();
        let total: T = masses.iter().map(|m| m.1).sum();
        let mean = masses.iter().map(|(x, p)| *x * *p).sum::<T>() / total;
        let central = |k: i32| masses.iter().map(|(x, p)| (*x - mean).powi(k) * *p).sum::<T>() / total;
        (mean, central(2), central(3))
    }

    /// sup |F − G| over the common grid.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::Grid("tables are on different grids".into()));
        }
        Ok(self
            .cdf
            .iter()
            .zip(&other.cdf)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repairs_small_drops_silently() {
        let t = DistributionTable::new(vec![0.0f64, 1.0, 2.0], vec![0.1, 0.1 - 1e-12, 0.9], None).unwrap();
        assert!(t.warnings().is_empty());
        assert_eq!(t.cdf()[1], 0.1);
    }

    #[test]
    fn large_drops_warn() {
        let t = DistributionTable::new(vec![0.0f64, 1.0, 2.0], vec![0.5, 0.4, 1.2], None).unwrap();
        assert_eq!(t.warnings().len(), 2);
        assert_eq!(t.cdf(), &[0.5, 0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(DistributionTable::new(vec![0.0f64, 0.0], vec![0.0, 1.0], None).is_err());
        assert!(DistributionTable::new(vec![0.0f64, 1.0], vec![0.0], None).is_err());
        assert!(linspace(1.0f64, 0.0, 5).is_err());
        assert_eq!(linspace(-1.0f64, 1.0, 5).unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn interpolation() {
        let t = DistributionTable::new(vec![0.0f64, 1.0, 3.0], vec![0.0, 0.5, 1.0], None).unwrap();
        assert_eq!(t.cdf_at(-1.0), 0.0);
        assert_eq!(t.cdf_at(0.5), 0.25);
        assert_eq!(t.cdf_at(2.0), 0.75);
        assert_eq!(t.cdf_at(9.0), 1.0);
    }
}
