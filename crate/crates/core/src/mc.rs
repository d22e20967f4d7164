//! Monte-Carlo ground truth: samples of truncated Z, of the head X_M and
//! of the normalized tail Ỹ_M, and the Kolmogorov-Smirnov distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};
use rayon::prelude::*;

use crate::cumulants::sigma_m;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weights::GammaSumSpec;

/// Name of the generator recorded in every batch.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), one stream per 65536-sample chunk";

const CHUNK: usize = 1 << 16;

/// Neglected standard deviation below which plain truncation is accepted.
pub const NEGLECTED_SIGMA: f64 = 1e-4;

/// With normal completion, the truncation point is chosen so that the third
/// cumulant of the neglected part is below this fraction of the target's
/// σ³. The completion matches the first two moments exactly, so the third
/// cumulant is the leading error.
pub const NEGLECTED_SKEW_FRACTION: f64 = 1e-3;

// Hard cap on terms per sample.
const MAX_TERMS: usize = 1_000_000;

/// 99% asymptotic KS critical value factor: D_n < 1.63/√n.
pub const KS_99: f64 = 1.63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Sum the first `n_terms` terms only.
    Truncate,
    /// Add an independent N(0, σ²) draw for the neglected terms.
    NormalTail,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncate" => Ok(SampleMode::Truncate),
            "normal_tail" => Ok(SampleMode::NormalTail),
            other => Err(Error::Domain(format!("unknown sample mode {other:?}"))),
        }
    }
}

/// Which random variable is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Z = Σ_{n≥1} λₙ(ηₙ − 1).
    Full,
    /// X_M = Σ_{n<M} λₙ(ηₙ − 1), sampled exactly.
    Head(usize),
    /// Ỹ_M = σ_M^{-1} Σ_{n≥M} λₙ(ηₙ − 1).
    NormalizedTail(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T> {
    pub values: Vec<T>,
    pub seed: u64,
    /// Number of gamma terms summed per sample.
    pub n_terms: usize,
    pub n_samples: usize,
    pub mode: SampleMode,
    /// Standard deviation of the neglected terms (before normalization).
    pub neglected_sigma: T,
    pub rng_algorithm: &'static str,
}

/// Draws Gamma(r, 1/r), mean 1. Half-integer shapes r = k/2 use χ²_k / (2r)
/// from k squared normals; other shapes use Marsaglia-Tsang with the
/// U^{1/r} boost for r < 1.
#[derive(Debug, Clone, Copy)]
pub enum GammaSampler<T: Scalar>
where
    StandardNormal: Distribution<T>,
    Exp1: Distribution<T>,
    Open01: Distribution<T>,
{
    ChiSquared { k: usize, scale: T },
    General(Gamma<T>),
}

impl<T: Scalar> GammaSampler<T>
where
    StandardNormal: Distribution<T>,
    Exp1: Distribution<T>,
    Open01: Distribution<T>,
{
    pub fn new(r: T) -> Result<Self> {
        let twice = r * T::lit(2.0);
        if twice.fract() == T::zero() && twice <= T::lit(8.0) {
            let k = twice.to_usize().expect("small integer");
            return Ok(GammaSampler::ChiSquared { k, scale: twice.recip() });
        }
        Self::general(r)
    }

    /// Always the rejection sampler, whatever the shape.
    pub fn general(r: T) -> Result<Self> {
        Gamma::new(r, r.recip())
            .map(GammaSampler::General)
            .map_err(|e| Error::Domain(format!("gamma sampler: {e}")))
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            GammaSampler::ChiSquared { k, scale } => {
                let mut s = T::zero();
                for _ in 0..*k {
                    let z: T = StandardNormal.sample(rng);
                    s = s + z * z;
                }
                s * *scale
            }
            GammaSampler::General(g) => g.sample(rng),
        }
    }
}

/// Index range [first, last) of summed terms and the neglected σ for a
/// target starting at `first`.
fn choose_terms<T: Scalar>(spec: &GammaSumSpec<T>, first: usize, mode: SampleMode, scale: T) -> Result<(usize, T)> {
    let r = spec.r();
    let neglected = |end: usize| -> Result<T> { Ok((spec.tail_power_sum(end, 2)? / r).sqrt()) };
    if let Some(len) = spec.weights().len() {
        let end = len + 1;
        return Ok((end.max(first), T::zero()));
    }
    let sigma_ok = |end: usize| -> Result<bool> { Ok(neglected(end)? < T::lit(NEGLECTED_SIGMA)) };
    let skew_ok = |end: usize| -> Result<bool> {
        let k3 = T::lit(2.0) * spec.tail_power_sum(end, 3)? / (r * r);
        Ok(k3 < T::lit(NEGLECTED_SKEW_FRACTION) * scale.powi(3))
    };
    let ok = |end: usize| -> Result<bool> {
        Ok(sigma_ok(end)? || (mode == SampleMode::NormalTail && skew_ok(end)?))
    };
    let mut end = first + 64;
    while !ok(end)? {
        end *= 2;
        if end - first > MAX_TERMS {
            return Err(Error::Domain(format!(
                "plain truncation would need more than {MAX_TERMS} terms; use normal_tail mode or an explicit term count"
            )));
        }
    }
    // bisect down to the smallest acceptable end
    let (mut lo, mut hi) = (first + 1, end);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok((hi, neglected(hi)?))
}

/// Samples `target`. `n_terms` overrides the automatic truncation rule
/// (neglected σ < 1e-4, or with normal completion a neglected third
/// cumulant below 1e-3 of the target's σ³).
pub fn sample<T: Scalar>(
    spec: &GammaSumSpec<T>,
    target: Target,
    mode: SampleMode,
    n_samples: usize,
    seed: u64,
    n_terms: Option<usize>,
) -> Result<SampleBatch<T>>
where
    StandardNormal: Distribution<T>,
    Exp1: Distribution<T>,
    Open01: Distribution<T>,
{
    if n_samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let (first, norm, exact_end) = match target {
        Target::Full => (1, T::one(), None),
        Target::Head(m) if m >= 1 => (1, T::one(), Some(m)),
        Target::NormalizedTail(m) if m >= 1 => (m, sigma_m(spec, m)?, None),
        _ => return Err(Error::Domain("truncation index M starts at 1".into())),
    };
    let scale = match target {
        Target::Full => (spec.tail_power_sum(1, 2)? / spec.r()).sqrt(),
        _ => norm,
    };
    let (end, neglected) = match (exact_end, n_terms) {
        (Some(m), _) => (m, T::zero()),
        (None, Some(n)) => {
            let end = first + n;
            (end, (spec.tail_power_sum(end, 2)? / spec.r()).sqrt())
        }
        (None, None) => choose_terms(spec, first, mode, scale)?,
    };
    let add_normal = mode == SampleMode::NormalTail && neglected > T::zero() && exact_end.is_none();
    let weights: Vec<T> = (first..end).map(|n| spec.weight(n)).collect();
    let gamma = GammaSampler::new(spec.r())?;

    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n_samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let mut z = weights.iter().fold(T::zero(), |acc, &l| acc + l * (gamma.draw(&mut rng) - T::one()));
                    if add_normal {
                        let g: T = StandardNormal.sample(&mut rng);
                        z = z + neglected * g;
                    }
                    z / norm
                })
                .collect()
        })
        .collect();
    Ok(SampleBatch {
        values: chunks.concat(),
        seed,
        n_terms: weights.len(),
        n_samples,
        mode,
        neglected_sigma: neglected,
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// Samples of Z = Σ λₙ(ηₙ − 1).
pub fn sample_z<T: Scalar>(spec: &GammaSumSpec<T>, mode: SampleMode, n_samples: usize, seed: u64) -> Result<SampleBatch<T>>
where
    StandardNormal: Distribution<T>,
    Exp1: Distribution<T>,
    Open01: Distribution<T>,
{
    sample(spec, Target::Full, mode, n_samples, seed, None)
}

/// Two-sided KS statistic sup |F_emp − F| of `values` against a continuous CDF.
pub fn ks_distance<T: Scalar, F: Fn(T) -> T>(values: &[T], cdf: F) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Domain("KS distance of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples are not NaN"));
    let n = T::of_usize(sorted.len());
    Ok(sorted.iter().enumerate().fold(T::zero(), |d, (i, &x)| {
        let f = cdf(x);
        let above = T::of_usize(i + 1) / n - f;
        let below = f - T::of_usize(i) / n;
        d.max(above).max(below)
    }))
}

/// 1.63/√n, the 99% KS band for n samples.
pub fn ks_band(n: usize) -> f64 {
    KS_99 / (n as f64).sqrt()
}

/// Empirical CDF of a sample (right-continuous step function).
#[derive(Debug, Clone)]
pub struct EmpiricalCdf<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> EmpiricalCdf<T> {
    pub fn new(values: &[T]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples are not NaN"));
        EmpiricalCdf { sorted }
    }

    pub fn eval(&self, x: T) -> T {
        T::of_usize(self.sorted.partition_point(|v| *v <= x)) / T::of_usize(self.sorted.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_power_law_normalized, WeightSequence};

    #[test]
    fn same_seed_same_batch() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        let a = sample(&spec, Target::Full, SampleMode::NormalTail, 1000, 42, Some(50)).unwrap();
        let b = sample(&spec, Target::Full, SampleMode::NormalTail, 1000, 42, Some(50)).unwrap();
        assert_eq!(a, b);
        let c = sample(&spec, Target::Full, SampleMode::NormalTail, 1000, 43, Some(50)).unwrap();
        assert_ne!(a.values, c.values);
        assert_eq!(a.rng_algorithm, RNG_ALGORITHM);
    }

    #[test]
    fn single_weight_mean() {
        let (lambda, r, n) = (0.7f64, 0.5f64, 200_000usize);
        let spec = GammaSumSpec::new(r, WeightSequence::explicit(vec![lambda]).unwrap()).unwrap();
        let batch = sample_z(&spec, SampleMode::Truncate, n, 7).unwrap();
        assert_eq!(batch.n_terms, 1);
        let mean = batch.values.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 * lambda / (r * n as f64).sqrt());
    }

    #[test]
    fn truncation_rules() {
        let spec = make_power_law_normalized(0.75f64, 0.5).unwrap();
        assert!(sample_z(&spec, SampleMode::Truncate, 10, 1).is_err());
        let fast = make_power_law_normalized(3.0f64, 1.0).unwrap();
        let b = sample_z(&fast, SampleMode::Truncate, 10, 1).unwrap();
        assert!(b.neglected_sigma < 1e-4);
        let (end, neg) = choose_terms(&spec, 1, SampleMode::NormalTail, 1.0).unwrap();
        let k3 = 2.0 * spec.tail_power_sum(end, 3).unwrap() / 0.25;
        assert!(k3 < 1e-3 && neg > 0.0);
        let k3_before = 2.0 * spec.tail_power_sum(end - 1, 3).unwrap() / 0.25;
        assert!(k3_before >= 1e-3);
    }

    #[test]
    fn ks_against_own_steps() {
        let values: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let ecdf = EmpiricalCdf::new(&values);
        let d = ks_distance(&values, |x| ecdf.eval(x)).unwrap();
        assert!((d - 1.0 / 100.0).abs() < 1e-12);
        assert!(ks_distance::<f64, _>(&[], |x| x).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("normal_tail".parse::<SampleMode>().unwrap(), SampleMode::NormalTail);
        assert!("gauss".parse::<SampleMode>().is_err());
    }
}
