//! Standard deviation and cumulants of the tail Y_M = Σ_{n≥M} λₙ(ηₙ − 1),
//! and the Berry-Esseen bound for its normalization Ỹ_M = Y_M / σ_M.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::factorial;
use crate::weights::{GammaSumSpec, WeightSequence};

/// Berry-Esseen constant used in sup |P[Ỹ_M ≤ x] − Φ(x)| ≤ 0.7056 κ_{3,M}.
pub const BERRY_ESSEEN_CONSTANT: f64 = 0.7056;

/// Largest cumulant order computed.
pub const MAX_CUMULANT_ORDER: usize = 20;

/// σ_M and κ_{2,M}, …, κ_{K,M} of the normalized tail Ỹ_M.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCumulants<T> {
    m: usize,
    sigma_m: T,
    /// kappa[0] is κ_{2,M}.
    kappa: Vec<T>,
}

impl<T: Scalar> TailCumulants<T> {
    /// Assembles cumulants from raw values, `kappa[0]` being κ₂.
    ///
    /// Intended for tests and synthetic expansions; [`cumulants`] is the
    /// usual constructor.
    pub fn from_parts(m: usize, sigma_m: T, kappa: Vec<T>) -> Self {
        TailCumulants { m, sigma_m, kappa }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma_m(&self) -> T {
        self.sigma_m
    }

    /// κ_{k,M} if computed.
    pub fn kappa(&self, k: usize) -> Option<T> {
        k.checked_sub(2).and_then(|i| self.kappa.get(i).copied())
    }

    /// Highest order available.
    pub fn max_order(&self) -> usize {
        self.kappa.len() + 1
    }

    /// (κ₂, κ₃, …).
    pub fn as_slice(&self) -> &[T] {
        &self.kappa
    }
}

fn non_degenerate_tail<T: Scalar>(spec: &GammaSumSpec<T>, m: usize) -> Result<T> {
    let s2 = spec.tail_power_sum(m, 2)?;
    if !(s2 > T::zero()) {
        return Err(Error::DegenerateTail { m });
    }
    Ok(s2)
}

/// σ_M = ((1/r) Σ_{n≥M} λₙ²)^{1/2}.
pub fn sigma_m<T: Scalar>(spec: &GammaSumSpec<T>, m: usize) -> Result<T> {
    Ok((non_degenerate_tail(spec, m)? / spec.r()).sqrt())
}

/// κ_{k,M} = (k−1)! r^{−(k−1)} σ_M^{−k} Σ_{n≥M} λₙᵏ for k = 2..=K.
pub fn cumulants<T: Scalar>(spec: &GammaSumSpec<T>, m: usize, max_order: usize) -> Result<TailCumulants<T>> {
    if !(3..=MAX_CUMULANT_ORDER).contains(&max_order) {
        return Err(Error::Domain(format!(
            "cumulant order K must lie in 3..={MAX_CUMULANT_ORDER}, got {max_order}"
        )));
    }
    let sigma = sigma_m(spec, m)?;
    let r = spec.r();
    let kappa = (2..=max_order)
        .map(|k| {
            let sum = spec.tail_power_sum(m, k as u32)?;
            let k_i = k as i32;
            Ok(factorial::<T>(k - 1) * sum / (r.powi(k_i - 1) * sigma.powi(k_i)))
        })
        .collect::<Result<Vec<T>>>()?;
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    if (kappa[0] - T::one()).abs() > tol {
        return Err(Error::Numerical { what: "κ₂ normalization", achieved: (kappa[0] - T::one()).abs().as_f64() });
    }
    Ok(TailCumulants { m, sigma_m: sigma, kappa })
}

/// 0.7056 · κ_{3,M}.
pub fn berry_esseen_bound<T: Scalar>(spec: &GammaSumSpec<T>, m: usize) -> Result<T> {
    let tc = cumulants(spec, m, 3)?;
    Ok(T::lit(BERRY_ESSEEN_CONSTANT) * tc.kappa(3).expect("order 3 computed"))
}

/// Σ_{n≥M} λₙ³ / (Σ_{n≥M} λₙ²)^{3/2}; tends to 0 exactly when the
/// Berry-Esseen bound does.
pub fn be_condition_ratio<T: Scalar>(spec: &GammaSumSpec<T>, m: usize) -> Result<T> {
    let s2 = non_degenerate_tail(spec, m)?;
    let s3 = spec.tail_power_sum(m, 3)?;
    Ok(s3 / (s2 * s2.sqrt()))
}

/// Lower end of the support of Ỹ_M, −Σ_{n≥M} λₙ / σ_M, when Σλₙ converges.
///
/// Returns `None` for power laws with γ ≤ 1, whose tails are unbounded below.
pub fn normalized_lower_bound<T: Scalar>(spec: &GammaSumSpec<T>, m: usize) -> Result<Option<T>> {
    let sigma = sigma_m(spec, m)?;
    match spec.weights() {
        WeightSequence::PowerLaw { gamma, .. } if *gamma <= T::one() => Ok(None),
        _ => Ok(Some(-spec.tail_power_sum(m, 1)? / sigma)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_power_law_normalized, WeightSequence};

    fn geometric(r: f64) -> GammaSumSpec<f64> {
        let values = (1..=20).map(|n| 2f64.powi(-(n + 1))).collect();
        GammaSumSpec::new(r, WeightSequence::explicit(values).unwrap()).unwrap()
    }

    #[test]
    fn normalized_spec_has_unit_sigma_at_one() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        assert!((sigma_m(&spec, 1).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn geometric_sigma_closed_form() {
        let spec = geometric(1.0);
        let expected = (1.0 / 12.0 * (1.0 - 4f64.powi(-20))).sqrt();
        assert!((sigma_m(&spec, 1).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn kappa_two_is_one() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        for m in [1, 2, 7, 50, 1000] {
            let tc = cumulants(&spec, m, 6).unwrap();
            assert!((tc.kappa(2).unwrap() - 1.0).abs() < 1e-10);
            assert!(tc.as_slice().iter().all(|k| *k > 0.0));
        }
    }

    #[test]
    fn order_limits() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        assert!(cumulants(&spec, 1, 2).is_err());
        assert!(cumulants(&spec, 1, 21).is_err());
        assert_eq!(cumulants(&spec, 1, 20).unwrap().max_order(), 20);
    }

    #[test]
    fn degenerate_tail_rejected() {
        let spec = GammaSumSpec::new(1.0f64, WeightSequence::explicit(vec![1.0]).unwrap()).unwrap();
        assert_eq!(sigma_m(&spec, 2), Err(Error::DegenerateTail { m: 2 }));
        assert!(cumulants(&spec, 3, 4).is_err());
        assert!(berry_esseen_bound(&spec, 2).is_err());
        assert!(be_condition_ratio(&spec, 2).is_err());
    }

    #[test]
    fn single_term_ratio_is_one() {
        let spec = GammaSumSpec::new(1.0f64, WeightSequence::explicit(vec![1.0]).unwrap()).unwrap();
        assert_eq!(be_condition_ratio(&spec, 1).unwrap(), 1.0);
    }

    #[test]
    fn bound_is_constant_times_kappa3() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        let k3 = cumulants(&spec, 10, 3).unwrap().kappa(3).unwrap();
        assert_eq!(berry_esseen_bound(&spec, 10).unwrap(), 0.7056 * k3);
    }

    #[test]
    fn power_law_has_no_lower_bound() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        assert_eq!(normalized_lower_bound(&spec, 3).unwrap(), None);
        let spec = make_power_law_normalized(1.5f64, 0.5).unwrap();
        assert!(normalized_lower_bound(&spec, 3).unwrap().unwrap() < 0.0);
    }
}
