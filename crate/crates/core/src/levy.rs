//! Lévy density of the normalized tail Ỹ_M and two analytic cross-checks:
//! cumulants as moments of the Lévy density, and the log-sum form of the
//! real part of the log-characteristic function.

use crate::cumulants::sigma_m;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_from_zero, integrate_to_infinity, Tolerance};
use crate::scalar::Scalar;
use crate::special::upper_gamma;
use crate::weights::{hurwitz_zeta, GammaSumSpec, WeightSequence};

/// Terms summed directly before the Euler-Maclaurin remainder takes over
/// (multiplied by ⌈γ⌉ for steep power laws).
const DIRECT_TERMS: usize = 4096;

// exp(-745) underflows in f64
const EXP_CUTOFF: f64 = 745.0;

/// ν̃^{(M)}(x) = (r/x) Σ_{n≥M} exp(−r x σ_M / λₙ), x > 0.
#[derive(Debug, Clone)]
pub struct LevyTailDensity<T> {
    r: T,
    m: usize,
    sigma_m: T,
    /// 1/λₙ for the directly summed indices.
    inv_weights: Vec<T>,
    /// (γ, C, first index) of the power-law remainder.
    remainder: Option<(T, T, usize)>,
}

impl<T: Scalar> LevyTailDensity<T> {
    pub fn new(spec: &GammaSumSpec<T>, m: usize) -> Result<Self> {
        let sigma = sigma_m(spec, m)?;
        let (inv_weights, remainder) = match spec.weights() {
            WeightSequence::Explicit { values } => (values[m - 1..].iter().map(|v| v.recip()).collect(), None),
            WeightSequence::PowerLaw { gamma, scale } => {
                let count = DIRECT_TERMS * gamma.ceil().to_usize().unwrap_or(1).max(1);
                let inv = (m..m + count).map(|n| spec.weight(n).recip()).collect();
                (inv, Some((*gamma, *scale, m + count)))
            }
        };
        Ok(LevyTailDensity { r: spec.r(), m, sigma_m: sigma, inv_weights, remainder })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma_m(&self) -> T {
        self.sigma_m
    }

    /// Number of terms summed explicitly before any analytic remainder.
    pub fn series_cutoff(&self) -> usize {
        self.inv_weights.len()
    }

    /// Decay rate r σ_M / λ_M of the density as x → ∞.
    pub fn decay_rate(&self) -> T {
        self.r * self.sigma_m * self.inv_weights[0]
    }

    /// ν̃^{(M)}(x).
    pub fn density(&self, x: T) -> Result<T> {
        if !(x > T::zero()) || !x.is_finite() {
            return Err(Error::Domain(format!("Lévy density is supported on (0, ∞), got x = {x}")));
        }
        Ok(self.r / x * self.series(x))
    }

    // Σ_{n≥M} exp(−r x σ_M / λₙ)
    fn series(&self, x: T) -> T {
        let b = self.r * x * self.sigma_m;
        let cutoff = T::lit(EXP_CUTOFF);
        let mut sum = T::zero();
        for &inv in &self.inv_weights {
            let e = b * inv;
            if e > cutoff {
                return sum;
            }
            sum = sum + (-e).exp();
        }
        match self.remainder {
            Some((gamma, scale, start)) => sum + power_law_remainder(b / scale, gamma, start),
            None => sum,
        }
    }
}

/// Σ_{n≥a} exp(−b n^γ) by Euler-Maclaurin through the f‴ term, with the
/// integral in closed form: ∫_a^∞ exp(−b t^γ) dt = γ^{-1} b^{-1/γ} Γ(1/γ, b a^γ).
fn power_law_remainder<T: Scalar>(b: T, gamma: T, a: usize) -> T {
    let a = T::of_usize(a);
    let g = b * a.powf(gamma);
    if g > T::lit(EXP_CUTOFF) {
        return T::zero();
    }
    let f = (-g).exp();
    let s = gamma.recip();
    let integral = s * b.powf(-s) * upper_gamma(s, g);
    let g1 = gamma * g / a;
    let g2 = g1 * (gamma - T::one()) / a;
    let g3 = g2 * (gamma - T::lit(2.0)) / a;
    let f3 = (-g1 * g1 * g1 + T::lit(3.0) * g1 * g2 - g3) * f;
    integral + f * T::lit(0.5) + g1 * f / T::lit(12.0) + f3 / T::lit(720.0)
}

fn quad_tolerance<T: Scalar>() -> Tolerance<T> {
    Tolerance::new(T::lit(1e-13).max(T::epsilon() * T::lit(10.0)), T::lit(1e-11).max(T::epsilon() * T::lit(100.0)))
}

/// κ_{k,M} = ∫₀^∞ xᵏ ν̃^{(M)}(x) dx by adaptive quadrature.
///
/// Independent of the closed form in [`crate::cumulants::cumulants`]; the two
/// are used to check each other.
pub fn cumulant_via_integral<T: Scalar>(spec: &GammaSumSpec<T>, m: usize, k: u32) -> Result<T> {
    if k < 2 {
        return Err(Error::Domain(format!("cumulant order must be at least 2, got {k}")));
    }
    let density = LevyTailDensity::new(spec, m)?;
    integrate_moment(&density, |x| x.powi(k as i32))
}

/// A_M(u) = (r/2) Σ_{n≥M} log(1 + u² λₙ² / (r² σ_M²)).
///
/// This is −Re log φ^{(M)}(u), with φ^{(M)} the characteristic function of
/// Ỹ_M; the returned value is non-negative.
pub fn re_log_cf<T: Scalar>(spec: &GammaSumSpec<T>, m: usize, u: T) -> Result<T> {
    let sigma = sigma_m(spec, m)?;
    let r = spec.r();
    if u == T::zero() {
        return Ok(T::zero());
    }
    let a = (u / (r * sigma)).powi(2);
    let sum = match spec.weights() {
        WeightSequence::Explicit { values } => values[m - 1..].iter().rev().map(|l| (a * *l * *l).ln_1p()).sum(),
        WeightSequence::PowerLaw { gamma, scale } => {
            // direct while aλₙ² > 0.1, then log1p's power series summed
            // termwise with Hurwitz zeta tails.
            let mut n = m;
            let mut head = T::zero();
            loop {
                let c = a * spec.weight(n).powi(2);
                if c <= T::lit(0.1) {
                    break;
                }
                head = head + c.ln_1p();
                n += 1;
            }
            let ac2 = a * *scale * *scale;
            let mut tail = T::zero();
            let mut power = T::one();
            for j in 1..200u32 {
                power = power * ac2;
                let jt = T::from_u32(j).unwrap();
                let term = power * hurwitz_zeta(T::lit(2.0) * jt * *gamma, T::of_usize(n))? / jt;
                tail = if j % 2 == 1 { tail + term } else { tail - term };
                if term.abs() <= T::epsilon() * T::lit(0.1) * (head + tail).abs() {
                    break;
                }
            }
            head + tail
        }
    };
    Ok(r * T::lit(0.5) * sum)
}

/// ∫₀^∞ (1 − cos u x) ν̃^{(M)}(x) dx by adaptive quadrature; equals
/// [`re_log_cf`] analytically.
pub fn re_log_cf_via_integral<T: Scalar>(spec: &GammaSumSpec<T>, m: usize, u: T) -> Result<T> {
    let density = LevyTailDensity::new(spec, m)?;
    integrate_moment(&density, |x| {
        let s = (u * x * T::lit(0.5)).sin();
        T::lit(2.0) * s * s
    })
}

// ∫₀^∞ w(x) ν̃(x) dx split at x = 1.
fn integrate_moment<T: Scalar, W: Fn(T) -> T>(density: &LevyTailDensity<T>, weight: W) -> Result<T> {
    let tol = quad_tolerance();
    let integrand = |x: T| weight(x) * density.density(x).unwrap_or_else(|_| T::zero());
    let near = integrate_from_zero(integrand, T::one(), 4, tol)?;
    let c = density.decay_rate() * T::lit(0.5);
    let far = integrate_to_infinity(integrand, T::one(), c, tol)?;
    Ok(near.value + far.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::cumulants;
    use crate::weights::make_power_law_normalized;

    fn reference_spec() -> GammaSumSpec<f64> {
        make_power_law_normalized(0.75, 0.5).unwrap()
    }

    #[test]
    fn single_weight_density() {
        let spec = GammaSumSpec::new(1.0f64, WeightSequence::explicit(vec![1.0]).unwrap()).unwrap();
        let d = LevyTailDensity::new(&spec, 1).unwrap();
        assert_eq!(d.sigma_m(), 1.0);
        assert!((d.density(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        assert!(d.density(0.0).is_err());
        assert!(d.density(-2.0).is_err());
    }

    // Brute-force Σ over n with the same normalization.
    fn long_sum(spec: &GammaSumSpec<f64>, m: usize, x: f64, terms: usize) -> f64 {
        let sigma = sigma_m(spec, m).unwrap();
        let r = spec.r();
        let s: f64 = (m..m + terms).rev().map(|n| (-r * x * sigma / spec.weight(n)).exp()).sum();
        r / x * s
    }

    #[test]
    fn power_law_density_matches_long_sum() {
        let spec = reference_spec();
        let d = LevyTailDensity::new(&spec, 1).unwrap();
        let v = d.density(0.5).unwrap();
        assert!((v - long_sum(&spec, 1, 0.5, 1_000_000)).abs() < 1e-10);
    }

    #[test]
    fn remainder_engages_at_small_x() {
        // Terms are still O(1) beyond the direct window here, so the
        // Euler-Maclaurin remainder carries most of the sum.
        let spec = reference_spec();
        let d = LevyTailDensity::new(&spec, 3).unwrap();
        let x = 2e-3;
        let v = d.density(x).unwrap();
        let oracle = long_sum(&spec, 3, x, 10_000_000);
        assert!(((v - oracle) / oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn density_decays() {
        let spec = reference_spec();
        let d = LevyTailDensity::new(&spec, 10).unwrap();
        let v = d.density(50.0).unwrap();
        assert!((0.0..1e-40).contains(&v));
    }

    #[test]
    fn second_moment_is_one() {
        let spec = reference_spec();
        let k2 = cumulant_via_integral(&spec, 4, 2).unwrap();
        assert!((k2 - 1.0).abs() < 1e-8, "{k2}");
    }

    #[test]
    fn third_cumulant_oracle_pair() {
        let spec = reference_spec();
        let closed = cumulants(&spec, 10, 3).unwrap().kappa(3).unwrap();
        let quad = cumulant_via_integral(&spec, 10, 3).unwrap();
        assert!(((quad - closed) / closed).abs() < 1e-7, "{quad} vs {closed}");
    }

    #[test]
    fn last_explicit_weight() {
        let (lambda, r) = (0.3f64, 0.7);
        let spec = GammaSumSpec::new(r, WeightSequence::explicit(vec![1.0, 0.5, lambda]).unwrap()).unwrap();
        let k3 = cumulant_via_integral(&spec, 3, 3).unwrap();
        assert!((k3 - 2.0 / r.sqrt()).abs() < 1e-9, "{k3}");
    }

    #[test]
    fn log_cf_basics() {
        let spec = reference_spec();
        assert_eq!(re_log_cf(&spec, 5, 0.0).unwrap(), 0.0);
        let a1 = re_log_cf(&spec, 5, 1.0).unwrap();
        let a2 = re_log_cf(&spec, 5, 2.0).unwrap();
        assert!(0.0 < a1 && a1 < a2);
        assert!((-a2).exp() <= 1.0);
    }

    #[test]
    fn log_cf_series_matches_direct_sum() {
        let spec = reference_spec();
        let m = 5;
        let u = 2.0;
        let sigma = sigma_m(&spec, m).unwrap();
        let a = (u / (0.5 * sigma)).powi(2);
        let direct: f64 = (m..20_000_000).rev().map(|n| (a * spec.weight(n).powi(2)).ln_1p()).sum::<f64>() * 0.25;
        // omitted tail ≈ 0.25 a C² ∫ n^{-3/2} = 0.5 a C² / √N
        let c2 = spec.weight(1).powi(2);
        let direct = direct + 0.5 * a * c2 / (2e7f64).sqrt();
        let v = re_log_cf(&spec, m, u).unwrap();
        assert!((v - direct).abs() < 1e-9, "{v} vs {direct}");
    }

    #[test]
    fn log_cf_quadrature_identity() {
        let spec = reference_spec();
        let a = re_log_cf(&spec, 5, 2.0).unwrap();
        let q = re_log_cf_via_integral(&spec, 5, 2.0).unwrap();
        assert!((a - q).abs() < 1e-7, "{a} vs {q}");
    }
}
