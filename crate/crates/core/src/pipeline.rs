//! F_Z(x) = ∫ F_{X_M}(x − y) f_{Y_M}(y) dy with the exact head law and an
//! Edgeworth density for the tail.

use rayon::prelude::*;

use crate::cumulants::{cumulants, sigma_m};
use crate::edgeworth::{build_expansion, EdgeworthExpansion};
use crate::error::{Error, Result};
use crate::finite_sum::{invert_to_table, HeadCf};
use crate::scalar::Scalar;
use crate::table::{linspace, validate_grid, DistributionTable};
use crate::weights::GammaSumSpec;

pub const DEFAULT_QUAD_POINTS: usize = 4001;
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Half-width of the tail quadrature range, in units of σ_M.
const TAIL_HALF_WIDTH: f64 = 10.0;

/// Largest negative mass of the tail density accepted without a warning.
pub const NEGATIVE_MASS_WARNING: f64 = 1e-3;

// Finest head interpolation table built for one convolution.
const MAX_HEAD_POINTS: usize = 400_000;

/// How the tail Y_M enters the convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailModel {
    /// Edgeworth density of order N, rescaled by σ_M.
    #[default]
    Edgeworth,
    /// A unit point mass at 0, i.e. Y_M dropped; F_Z then equals F_{X_M}.
    PointMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    pub spec: GammaSumSpec<T>,
    pub m: usize,
    pub order: usize,
    pub grid: Vec<T>,
    pub quad_points: usize,
    pub tail: TailModel,
}

impl<T: Scalar> PipelineConfig<T> {
    /// Default grid: ±8 total standard deviations (Var Z = (1/r) Σλₙ²) with
    /// [`DEFAULT_GRID_POINTS`] points; [`DEFAULT_QUAD_POINTS`] tail nodes.
    pub fn new(spec: GammaSumSpec<T>, m: usize, order: usize) -> Result<Self> {
        let sd = (spec.tail_power_sum(1, 2)? / spec.r()).sqrt();
        let grid = linspace(-sd * T::lit(8.0), sd * T::lit(8.0), DEFAULT_GRID_POINTS)?;
        Ok(PipelineConfig { spec, m, order, grid, quad_points: DEFAULT_QUAD_POINTS, tail: TailModel::Edgeworth })
    }

    pub fn with_grid(mut self, grid: Vec<T>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_quad_points(mut self, q: usize) -> Self {
        self.quad_points = q;
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("truncation index M starts at 1".into()));
        }
        if self.order < 2 {
            return Err(Error::Domain(format!("Edgeworth order must be at least 2, got {}", self.order)));
        }
        if self.quad_points < 3 {
            return Err(Error::Domain("at least 3 tail quadrature points are required".into()));
        }
        validate_grid(&self.grid)
    }
}

/// The tail expansion for a config: σ_M and the order-N expansion of Ỹ_M.
pub fn tail_expansion<T: Scalar>(cfg: &PipelineConfig<T>) -> Result<(T, EdgeworthExpansion<T>)> {
    let sigma = sigma_m(&cfg.spec, cfg.m)?;
    let tc = cumulants(&cfg.spec, cfg.m, cfg.order.max(3))?;
    Ok((sigma, build_expansion(&tc, cfg.order)?))
}

// Head CDF (and density) on a uniform grid, interpolated cubically with the
// density as slope when the density is bounded, linearly otherwise.
struct HeadInterpolant<T> {
    lo: T,
    step: T,
    cdf: Vec<T>,
    pdf: Option<Vec<T>>,
}

impl<T: Scalar> HeadInterpolant<T> {
    fn build(head: &HeadCf<T>, lo: T, hi: T, step: T) -> Result<Self> {
        let lo = lo.max(head.lower_support());
        let hi = hi.max(lo + step);
        let n = ((hi - lo) / step).ceil().to_usize().unwrap_or(usize::MAX).saturating_add(1);
        let n = n.clamp(2, MAX_HEAD_POINTS);
        let step = (hi - lo) / T::of_usize(n - 1);
        let grid: Vec<T> = (0..n).map(|i| lo + step * T::of_usize(i)).collect();
        let table = invert_to_table(head, &grid)?;
        Ok(HeadInterpolant {
            lo,
            step,
            cdf: table.cdf().to_vec(),
            pdf: table.pdf().map(|p| p.to_vec()),
        })
    }

    fn locate(&self, x: T) -> Option<(usize, T)> {
        let pos = (x - self.lo) / self.step;
        if pos <= T::zero() {
            return None;
        }
        let i = pos.floor().to_usize().unwrap_or(usize::MAX);
        if i + 1 >= self.cdf.len() {
            return None;
        }
        Some((i, pos - T::of_usize(i)))
    }

    fn cdf(&self, x: T) -> T {
        let Some((i, t)) = self.locate(x) else {
            return if x <= self.lo { T::zero() } else { self.cdf[self.cdf.len() - 1] };
        };
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        match &self.pdf {
            Some(p) => {
                let (d0, d1) = (p[i] * self.step, p[i + 1] * self.step);
                let t2 = t * t;
                let t3 = t2 * t;
                let two = T::lit(2.0);
                let three = T::lit(3.0);
                (two * t3 - three * t2 + T::one()) * f0
                    + (t3 - two * t2 + t) * d0
                    + (three * t2 - two * t3) * f1
                    + (t3 - t2) * d1
            }
            None => f0 + t * (f1 - f0),
        }
    }

    fn pdf(&self, x: T) -> Option<T> {
        let p = self.pdf.as_ref()?;
        Some(match self.locate(x) {
            Some((i, t)) => p[i] + t * (p[i + 1] - p[i]),
            None => T::zero(),
        })
    }
}

/// CDF of Z on `cfg.grid`.
///
/// The tail density σ_M^{-1} g(y/σ_M), g the Edgeworth density, is
/// integrated by the trapezoid rule on `quad_points` nodes over ±10 σ_M.
/// Negative tail density is integrated as-is; a warning is attached when
/// its mass exceeds [`NEGATIVE_MASS_WARNING`].
pub fn z_cdf<T: Scalar>(cfg: &PipelineConfig<T>) -> Result<DistributionTable<T>> {
    cfg.validate()?;
    let head = HeadCf::new(&cfg.spec, cfg.m)?;
    let grid = cfg.grid.clone();

    if cfg.tail == TailModel::PointMass {
        return invert_to_table(&head, &grid);
    }

    let (sigma, expansion) = tail_expansion(cfg)?;
    let mut warnings = Vec::new();

    if head.is_empty() {
        let points: Vec<_> = grid.iter().map(|&x| expansion.evaluate(x / sigma)).collect();
        if points.iter().any(|p| p.out_of_range) {
            warnings.push("Edgeworth CDF or density left its valid range on the grid".to_string());
        }
        let cdf = points.iter().map(|p| p.cdf).collect();
        let pdf = points.iter().map(|p| p.pdf / sigma).collect();
        return finish(grid, cdf, Some(pdf), warnings);
    }

    let q = cfg.quad_points;
    let half = sigma * T::lit(TAIL_HALF_WIDTH);
    let h = half * T::lit(2.0) / T::of_usize(q - 1);
    let nodes: Vec<(T, T)> = (0..q)
        .map(|j| {
            let y = -half + h * T::of_usize(j);
            let trap = if j == 0 || j == q - 1 { T::lit(0.5) } else { T::one() };
            (y, trap * h * expansion.pdf(y / sigma) / sigma)
        })
        .collect();
    let negative: T = nodes.iter().filter(|n| n.1 < T::zero()).map(|n| -n.1).sum();
    if negative > T::lit(NEGATIVE_MASS_WARNING) {
        warnings.push(format!("Edgeworth tail density has negative mass {:e}", negative.as_f64()));
    }

    let x_lo = grid[0] - half;
    let x_hi = grid[grid.len() - 1] + half;
    let interp = HeadInterpolant::build(&head, x_lo, x_hi, h)?;

    let values: Vec<(T, Option<T>)> = grid
        .par_iter()
        .map(|&x| {
            let mut f = T::zero();
            let mut d = interp.pdf.as_ref().map(|_| T::zero());
            for &(y, w) in &nodes {
                f = f + w * interp.cdf(x - y);
                if let Some(acc) = d.as_mut() {
                    *acc = *acc + w * interp.pdf(x - y).unwrap_or_else(T::zero);
                }
            }
            (f, d)
        })
        .collect();
    let cdf = values.iter().map(|v| v.0).collect();
    let pdf = values.iter().map(|v| v.1).collect::<Option<Vec<T>>>();
    finish(grid, cdf, pdf, warnings)
}

fn finish<T: Scalar>(grid: Vec<T>, cdf: Vec<T>, pdf: Option<Vec<T>>, warnings: Vec<String>) -> Result<DistributionTable<T>> {
    let mut table = DistributionTable::new(grid, cdf, pdf)?;
    for w in warnings {
        table.push_warning(w);
    }
    if !table.covers_bulk() {
        table.push_warning("grid does not cover the bulk: F(first) > 0.001 or F(last) < 0.999");
    }
    Ok(table)
}

/// max over the grid of the largest pairwise |F_Z| difference across the
/// truncation levels `ms`, all else equal.
pub fn m_robustness<T: Scalar>(cfg_base: &PipelineConfig<T>, ms: &[usize]) -> Result<T> {
    Ok(m_robustness_tables(cfg_base, ms)?.0)
}

/// [`m_robustness`] together with the table for each truncation level.
pub fn m_robustness_tables<T: Scalar>(
    cfg_base: &PipelineConfig<T>,
    ms: &[usize],
) -> Result<(T, Vec<DistributionTable<T>>)> {
    if ms.len() < 2 {
        return Err(Error::Domain("robustness needs at least two truncation levels".into()));
    }
    let tables = ms
        .iter()
        .map(|&m| z_cdf(&cfg_base.clone().with_m(m)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = T::zero();
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            worst = worst.max(tables[i].sup_distance(&tables[j])?);
        }
    }
    Ok((worst, tables))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_cdf;
    use crate::weights::make_power_law_normalized;

    fn reference_spec() -> GammaSumSpec<f64> {
        make_power_law_normalized(0.75, 0.5).unwrap()
    }

    #[test]
    fn m_one_order_two_is_standard_normal() {
        let cfg = PipelineConfig::new(reference_spec(), 1, 2).unwrap();
        let t = z_cdf(&cfg).unwrap();
        for (x, f) in t.grid().iter().zip(t.cdf()) {
            assert!((f - norm_cdf(*x)).abs() < 1e-15);
        }
    }

    #[test]
    fn point_mass_tail_reproduces_head() {
        let grid = linspace(-1.5, 3.0, 41).unwrap();
        let cfg = PipelineConfig::new(reference_spec(), 6, 4).unwrap().with_grid(grid.clone()).with_tail(TailModel::PointMass);
        let z = z_cdf(&cfg).unwrap();
        let head = HeadCf::new(&reference_spec(), 6).unwrap();
        for (x, f) in grid.iter().zip(z.cdf()) {
            assert!((f - head.cdf(*x)).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_configs() {
        let cfg = PipelineConfig::new(reference_spec(), 5, 4).unwrap();
        assert!(z_cdf(&cfg.clone().with_m(0)).is_err());
        assert!(z_cdf(&cfg.clone().with_order(1)).is_err());
        assert!(z_cdf(&cfg.clone().with_grid(vec![1.0, 0.0])).is_err());
        assert!(m_robustness(&cfg, &[5]).is_err());
    }

    #[test]
    fn identical_levels_are_robust() {
        let cfg = PipelineConfig::new(reference_spec(), 10, 5).unwrap().with_grid(linspace(-4.0, 6.0, 101).unwrap());
        assert_eq!(m_robustness(&cfg, &[10, 10]).unwrap(), 0.0);
    }
}
