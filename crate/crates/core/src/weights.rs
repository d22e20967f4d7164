//! Weight sequences λₙ, the model Z = Σ λₙ(ηₙ − 1), and exact tail power
//! sums Σ_{n≥M} λₙᵏ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// B₂, B₄, …, B₁₄.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Riemann zeta function ζ(s) for real s > 1.
pub fn zeta<T: Scalar>(s: T) -> Result<T> {
    hurwitz_zeta(s, T::one())
}

/// Hurwitz zeta ζ(s, a) = Σ_{n≥0} (a + n)^{-s} for s > 1, a > 0.
///
/// Sums max(20, ⌈10 s⌉) terms directly and adds the Euler-Maclaurin
/// remainder through B₁₄.
pub fn hurwitz_zeta<T: Scalar>(s: T, a: T) -> Result<T> {
    if !(s > T::one()) {
        return Err(Error::Domain(format!("zeta requires s > 1, got {s}")));
    }
    if !(a > T::zero()) {
        return Err(Error::Domain(format!("hurwitz zeta requires a > 0, got {a}")));
    }
    let n_direct = 20usize.max((s * T::lit(10.0)).ceil().to_usize().unwrap_or(20));
    let x = a + T::of_usize(n_direct);
    let x_pow = x.powf(-s);
    let mut tail = x * x_pow / (s - T::one()) + x_pow * T::lit(0.5);
    // rising factorial (s)_{2j-1} and x^{-s-2j+1}
    let mut rising = s;
    let mut xp = x_pow / x;
    let mut fact = T::lit(2.0);
    let x2 = x * x;
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate() {
        tail = tail + T::lit(b) / fact * rising * xp;
        let m = T::of_usize(2 * j + 1);
        rising = rising * (s + m) * (s + m + T::one());
        xp = xp / x2;
        fact = fact * T::of_usize(2 * j + 3) * T::of_usize(2 * j + 4);
    }
    let direct: T = (0..n_direct).rev().map(|n| (a + T::of_usize(n)).powf(-s)).sum();
    Ok(direct + tail)
}

/// A non-increasing sequence of positive weights.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSequence<T> {
    /// λₙ = scale · n^{-gamma}, n ≥ 1.
    PowerLaw { gamma: T, scale: T },
    /// λ₁, …, λ_L listed explicitly; λₙ = 0 for n > L.
    Explicit { values: Vec<T> },
}

impl<T: Scalar> WeightSequence<T> {
    pub fn power_law(gamma: T, scale: T) -> Result<Self> {
        if !(gamma > T::lit(0.5)) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "power-law exponent must exceed 1/2 for Σλₙ² to converge, got {gamma}"
            )));
        }
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::Domain(format!("power-law scale must be positive, got {scale}")));
        }
        Ok(WeightSequence::PowerLaw { gamma, scale })
    }

    pub fn explicit(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("explicit weight list is empty".into()));
        }
        if values.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::Domain("explicit weights must be positive and finite".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Domain("explicit weights must be non-increasing".into()));
        }
        Ok(WeightSequence::Explicit { values })
    }

    /// λₙ for n ≥ 1 (zero past the end of an explicit list).
    pub fn weight(&self, n: usize) -> T {
        assert!(n >= 1, "weights are indexed from 1");
        match self {
            WeightSequence::PowerLaw { gamma, scale } => *scale * T::of_usize(n).powf(-*gamma),
            WeightSequence::Explicit { values } => values.get(n - 1).copied().unwrap_or_else(T::zero),
        }
    }

    /// Number of non-zero weights, or `None` for an infinite sequence.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            WeightSequence::PowerLaw { .. } => None,
            WeightSequence::Explicit { values } => Some(values.len()),
        }
    }

    /// Σ_{n≥M} λₙᵏ.
    ///
    /// For power laws this is Cᵏ ζ(kγ, M), i.e. Cᵏ (ζ(kγ) − Σ_{n<M} n^{-kγ})
    /// evaluated without the cancellation of the difference form.
    pub fn tail_power_sum(&self, m: usize, k: u32) -> Result<T> {
        if m == 0 {
            return Err(Error::Domain("truncation index M starts at 1".into()));
        }
        if k == 0 {
            return Err(Error::Domain("power k must be positive".into()));
        }
        match self {
            WeightSequence::PowerLaw { gamma, scale } => {
                let s = *gamma * T::from_u32(k).unwrap();
                if !(s > T::one()) {
                    return Err(Error::Domain(format!(
                        "Σλₙ^{k} diverges for γ = {gamma} (need kγ > 1)"
                    )));
                }
                Ok(scale.powi(k as i32) * hurwitz_zeta(s, T::of_usize(m))?)
            }
            WeightSequence::Explicit { values } => Ok(values
                .iter()
                .skip(m - 1)
                .rev()
                .map(|v| v.powi(k as i32))
                .sum()),
        }
    }
}

/// Shape parameter r and weights: Z = Σ λₙ(ηₙ − 1) with ηₙ ~ Gamma(r, 1/r).
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSumSpec<T> {
    r: T,
    weights: WeightSequence<T>,
    normalized: bool,
}

impl<T: Scalar> GammaSumSpec<T> {
    /// Builds a spec; `normalized` records whether (1/r) Σλₙ² = 1 holds to
    /// 1e-12 relative (or to the precision of `T`, whichever is coarser).
    pub fn new(r: T, weights: WeightSequence<T>) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("shape r must be positive, got {r}")));
        }
        let total = weights.tail_power_sum(1, 2)? / r;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        let normalized = (total - T::one()).abs() <= tol;
        Ok(GammaSumSpec { r, weights, normalized })
    }

    /// Rescales explicit weights so that (1/r) Σλₙ² = 1.
    pub fn normalized_explicit(r: T, values: Vec<T>) -> Result<Self> {
        let raw = WeightSequence::explicit(values)?;
        let c = (raw.tail_power_sum(1, 2)? / r).sqrt().recip();
        let WeightSequence::Explicit { values } = raw else { unreachable!() };
        let mut spec = Self::new(r, WeightSequence::Explicit { values: values.into_iter().map(|v| v * c).collect() })?;
        spec.normalized = true;
        Ok(spec)
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn weights(&self) -> &WeightSequence<T> {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn weight(&self, n: usize) -> T {
        self.weights.weight(n)
    }

    pub fn tail_power_sum(&self, m: usize, k: u32) -> Result<T> {
        self.weights.tail_power_sum(m, k)
    }
}

/// λₙ = C n^{-γ} with C = (ζ(2γ)/r)^{-1/2}, so that (1/r) Σλₙ² = 1.
pub fn make_power_law_normalized<T: Scalar>(gamma: T, r: T) -> Result<GammaSumSpec<T>> {
    if !(gamma > T::lit(0.5)) {
        return Err(Error::Domain(format!("power-law exponent must exceed 1/2, got {gamma}")));
    }
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("shape r must be positive, got {r}")));
    }
    let scale = (zeta(T::lit(2.0) * gamma)? / r).sqrt().recip();
    let weights = WeightSequence::power_law(gamma, scale)?;
    Ok(GammaSumSpec { r, weights, normalized: true })
}

/// JSON form of a [`GammaSumSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub r: f64,
    pub weights: WeightsFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightsFile {
    /// A missing `scale` means "normalize": C = (ζ(2γ)/r)^{-1/2}.
    PowerLaw {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
    Explicit { values: Vec<f64> },
}

impl SpecFile {
    pub fn to_spec<T: Scalar>(&self) -> Result<GammaSumSpec<T>> {
        let r = T::lit(self.r);
        match &self.weights {
            WeightsFile::PowerLaw { gamma, scale: None } => make_power_law_normalized(T::lit(*gamma), r),
            WeightsFile::PowerLaw { gamma, scale: Some(c) } => {
                GammaSumSpec::new(r, WeightSequence::power_law(T::lit(*gamma), T::lit(*c))?)
            }
            WeightsFile::Explicit { values } => {
                GammaSumSpec::new(r, WeightSequence::explicit(values.iter().map(|&v| T::lit(v)).collect())?)
            }
        }
    }

    pub fn from_spec<T: Scalar>(spec: &GammaSumSpec<T>) -> Self {
        let weights = match spec.weights() {
            WeightSequence::PowerLaw { gamma, scale } => WeightsFile::PowerLaw {
                gamma: gamma.as_f64(),
                scale: Some(scale.as_f64()),
            },
            WeightSequence::Explicit { values } => WeightsFile::Explicit {
                values: values.iter().map(|v| v.as_f64()).collect(),
            },
        };
        SpecFile { r: spec.r().as_f64(), weights }
    }
}
