//! Exact law of the finite head X_M = Σ_{n<M} λₙ(ηₙ − 1).
//!
//! The characteristic function is a finite product of gamma factors,
//! (1 − iuλ/r)^{−r} e^{−iuλ}. Because X_M + L ≥ 0 with L = Σ_{n<M} λₙ, the
//! CDF and density are recovered from the Laplace transform
//! Π (1 + sλ/r)^{−r} by fixed-Talbot contour inversion. Gil-Pelaez
//! inversion along the real axis is provided as a second route for heads
//! whose characteristic function decays fast enough.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::Scalar;
use crate::table::{linspace, validate_grid};
use crate::weights::GammaSumSpec;

pub use crate::table::DistributionTable;

/// Default number of points in [`HeadCf::default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Characteristic function of X_M, kept as its gamma factors.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadCf<T> {
    r: T,
    m: usize,
    /// λ₁, …, λ_{M−1}, zero weights dropped.
    weights: Vec<T>,
}

/// Head CDF and density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadPoint<T> {
    pub cdf: T,
    pub pdf: T,
}

fn talbot_nodes<T: Scalar>() -> usize {
    // ~0.6 digits per node, capped by the e^{0.4 n} roundoff amplification
    let digits = -T::epsilon().log10().as_f64();
    (1.5 * digits).round().max(6.0) as usize
}

impl<T: Scalar> HeadCf<T> {
    /// Head of `spec` at truncation `m` (m = 1 gives the empty head X_1 = 0).
    pub fn new(spec: &GammaSumSpec<T>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("truncation index M starts at 1".into()));
        }
        let weights = (1..m).map(|n| spec.weight(n)).filter(|w| *w > T::zero()).collect();
        Ok(HeadCf { r: spec.r(), m, weights })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// −Σ λₙ, the left end of the support.
    pub fn lower_support(&self) -> T {
        -self.weights.iter().copied().sum::<T>()
    }

    /// Var X_M = (1/r) Σ λₙ².
    pub fn variance(&self) -> T {
        self.weights.iter().map(|l| *l * *l).sum::<T>() / self.r
    }

    /// E X_M³ = 2 r^{−2} Σ λₙ³.
    pub fn third_central_moment(&self) -> T {
        T::lit(2.0) * self.weights.iter().map(|l| l.powi(3)).sum::<T>() / (self.r * self.r)
    }

    /// r·(M − 1): the density is bounded exactly when this exceeds 1.
    pub fn total_shape(&self) -> T {
        self.r * T::of_usize(self.weights.len())
    }

    pub fn has_bounded_density(&self) -> bool {
        self.total_shape() > T::one()
    }

    /// E e^{iuX_M} = Π (1 − iuλ/r)^{−r} e^{−iuλ}.
    ///
    /// Each factor 1 − iuλ/r has positive real part, so principal logs sum
    /// without branch ambiguity.
    pub fn cf(&self, u: T) -> Complex<T> {
        let r = self.r;
        let log = self.weights.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &l| {
            let z = Complex::new(T::one(), -u * l / r);
            acc - z.ln() * r - Complex::new(T::zero(), u * l)
        });
        log.exp()
    }

    /// |cf(u)| = Π (1 + u²λ²/r²)^{−r/2}.
    pub fn modulus(&self, u: T) -> T {
        let r = self.r;
        self.weights
            .iter()
            .map(|l| (T::one() + (u * *l / r).powi(2)).powf(-r * T::lit(0.5)))
            .fold(T::one(), |a, b| a * b)
    }

    /// E e^{−s(X_M + L)} = Π (1 + sλ/r)^{−r}.
    pub fn shifted_laplace(&self, s: Complex<T>) -> Complex<T> {
        let r = self.r;
        let log = self.weights.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &l| {
            acc - (s * (l / r) + T::one()).ln() * r
        });
        log.exp()
    }

    /// CDF and density of X_M at `x` by fixed-Talbot inversion. The density
    /// is infinite or undefined at the support edge when r(M−1) ≤ 1.
    pub fn evaluate(&self, x: T) -> HeadPoint<T> {
        if self.is_empty() {
            let cdf = if x >= T::zero() { T::one() } else { T::zero() };
            return HeadPoint { cdf, pdf: T::zero() };
        }
        let y = x - self.lower_support();
        if y <= T::zero() {
            return HeadPoint { cdf: T::zero(), pdf: T::zero() };
        }
        let n = talbot_nodes::<T>();
        let nt = T::of_usize(n);
        let rho = T::lit(2.0) * nt / (T::lit(5.0) * y);
        let one = Complex::new(T::one(), T::zero());
        let s0 = Complex::new(rho, T::zero());
        let psi0 = self.shifted_laplace(s0);
        let e0 = (rho * y).exp();
        let mut cdf = (psi0 / s0).re * e0 * T::lit(0.5);
        let mut pdf = psi0.re * e0 * T::lit(0.5);
        for k in 1..n {
            let theta = T::of_usize(k) * T::PI() / nt;
            let cot = theta.cos() / theta.sin();
            let s = Complex::new(rho * theta * cot, rho * theta);
            let sigma = theta + (theta * cot - T::one()) * cot;
            let w = (s * y).exp() * (one + Complex::new(T::zero(), sigma));
            let psi = self.shifted_laplace(s);
            cdf = cdf + (w * psi / s).re;
            pdf = pdf + (w * psi).re;
        }
        let scale = rho / nt;
        HeadPoint { cdf: cdf * scale, pdf: pdf * scale }
    }

    pub fn cdf(&self, x: T) -> T {
        self.evaluate(x).cdf
    }

    pub fn pdf(&self, x: T) -> T {
        self.evaluate(x).pdf
    }

    /// Gil-Pelaez: F(x) = 1/2 − (1/π) ∫₀^∞ Im[e^{−iux} cf(u)] / u du.
    ///
    /// The integral is truncated where the modulus bound drops below 1e-10
    /// (single precision: 1e-5) and integrated in panels of width
    /// π / (|x| + L). Fails when the truncation point would exceed 1e6,
    /// i.e. for heads with r(M−1) too small.
    pub fn gil_pelaez_cdf(&self, x: T) -> Result<T> {
        if self.is_empty() {
            return Ok(self.evaluate(x).cdf);
        }
        let target = T::lit(1e-10).max(T::epsilon().sqrt() * T::lit(0.1));
        let limit = T::lit(1e6);
        let mut cutoff = T::one();
        while self.modulus(cutoff) > target {
            cutoff = cutoff * T::lit(2.0);
            if cutoff > limit {
                return Err(Error::Numerical { what: "Gil-Pelaez truncation", achieved: self.modulus(limit).as_f64() });
            }
        }
        let width = T::PI() / (x.abs() - self.lower_support()).max(T::one());
        let panels = (cutoff / width).ceil().to_usize().unwrap_or(1).max(1);
        let tol = Tolerance::new(target / T::of_usize(panels).max(T::one()), T::epsilon() * T::lit(100.0));
        let integrand = |u: T| {
            let v = Complex::new(T::zero(), -u * x).exp() * self.cf(u);
            v.im / u
        };
        let mut total = T::zero();
        for p in 0..panels {
            let a = width * T::of_usize(p);
            total = total + integrate(integrand, a, a + width, tol)?.value;
        }
        Ok(T::lit(0.5) - total / T::PI())
    }

    /// mean ± 8 standard deviations with [`DEFAULT_GRID_POINTS`] points.
    pub fn default_grid(&self) -> Result<Vec<T>> {
        let sd = self.variance().sqrt();
        if self.is_empty() {
            return Err(Error::Grid("the empty head has no spread; supply a grid".into()));
        }
        let lo = (-sd * T::lit(8.0)).max(self.lower_support());
        linspace(lo, sd * T::lit(8.0), DEFAULT_GRID_POINTS)
    }
}

/// Tabulates the head CDF (and density, when bounded) on `grid`.
///
/// For r(M−1) ≤ 1 the density is unbounded or discontinuous at the left
/// support edge; it is then omitted and a warning is attached.
pub fn invert_to_table<T: Scalar>(cf: &HeadCf<T>, grid: &[T]) -> Result<DistributionTable<T>> {
    validate_grid(grid)?;
    let points: Vec<HeadPoint<T>> = grid.par_iter().map(|&x| cf.evaluate(x)).collect();
    let cdf = points.iter().map(|p| p.cdf).collect();
    let bounded = cf.has_bounded_density();
    let pdf = bounded.then(|| points.iter().map(|p| p.pdf.max(T::zero())).collect());
    let mut table = DistributionTable::new(grid.to_vec(), cdf, pdf)?;
    if !bounded {
        table.push_warning(format!(
            "density omitted: r(M-1) = {} ≤ 1 gives an unbounded density at the support edge",
            cf.total_shape()
        ));
    }
    Ok(table)
}
