//! Order-N Edgeworth expansion of the normalized tail Ỹ_M.
//!
//! P[Ỹ_M ≤ x] ≈ Φ(x) − φ(x) Σ_{k ∈ η(N)} [Π_{m=3}^N (κ_{m,M}/m!)^{k_m} / k_m!] H_{Σ m k_m − 1}(x),
//! where η(N) is the set of tuples (k₃, …, k_N) ≥ 0 with
//! 1 ≤ Σ (m − 2) k_m ≤ N − 2.

use num_rational::Ratio;

use crate::cumulants::TailCumulants;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{factorial, norm_cdf, norm_pdf};

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 20;

/// A tuple (k₃, …, k_N) indexing one term of the expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVector {
    order: usize,
    /// k[i] is k_{i+3}.
    k: Vec<u32>,
}

impl IndexVector {
    /// Builds (k₃, …, k_N) for order N = k.len() + 2.
    pub fn new(k: Vec<u32>) -> Self {
        IndexVector { order: k.len() + 2, k }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// k_m for 3 ≤ m ≤ N, zero otherwise.
    pub fn k(&self, m: usize) -> u32 {
        m.checked_sub(3).and_then(|i| self.k.get(i).copied()).unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.k
    }

    /// Σ (m − 2) k_m.
    pub fn weighted_sum(&self) -> usize {
        self.entries().map(|(m, km)| (m - 2) * km as usize).sum()
    }

    /// Hermite degree Σ m k_m − 1.
    pub fn hermite_degree(&self) -> usize {
        self.entries().map(|(m, km)| m * km as usize).sum::<usize>() - 1
    }

    /// The exact factor 1 / Π k_m! (m!)^{k_m} multiplying Π κ_m^{k_m}.
    pub fn rational_prefactor(&self) -> Ratio<u128> {
        let denom = self
            .entries()
            .filter(|&(_, km)| km > 0)
            .fold(1u128, |acc, (m, km)| {
                let m_fact: u128 = (2..=m as u128).product();
                let km_fact: u128 = (2..=km as u128).product();
                acc.checked_mul(km_fact)
                    .and_then(|a| a.checked_mul(m_fact.checked_pow(km)?))
                    .expect("prefactor denominator fits in u128 for N ≤ 20")
            });
        Ratio::new(1, denom)
    }

    /// Π (κ_m / m!)^{k_m} / k_m!.
    pub fn coefficient<T: Scalar>(&self, tc: &TailCumulants<T>) -> Result<T> {
        self.entries().filter(|&(_, km)| km > 0).try_fold(T::one(), |acc, (m, km)| {
            let kappa = tc
                .kappa(m)
                .ok_or(Error::InsufficientCumulants { needed: m, available: tc.max_order() })?;
            let base = kappa / factorial::<T>(m);
            Ok(acc * base.powi(km as i32) / factorial::<T>(km as usize))
        })
    }

    fn entries(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.k.iter().enumerate().map(|(i, &km)| (i + 3, km))
    }
}

fn check_order(n: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&n) {
        return Err(Error::Domain(format!("Edgeworth order must lie in 2..={MAX_ORDER}, got {n}")));
    }
    Ok(())
}

// Depth-first, ascending at each position: yields lexicographic order.
fn enumerate_weighted(order: usize, lo: usize, hi: usize) -> Vec<IndexVector> {
    fn go(pos: usize, len: usize, used: usize, bounds: (usize, usize), cur: &mut Vec<u32>, out: &mut Vec<IndexVector>) {
        if pos == len {
            if used >= bounds.0 {
                out.push(IndexVector::new(cur.clone()));
            }
            return;
        }
        let step = pos + 1; // m − 2 for m = pos + 3
        let mut km = 0;
        while used + km * step <= bounds.1 {
            cur.push(km as u32);
            go(pos + 1, len, used + km * step, bounds, cur, out);
            cur.pop();
            km += 1;
        }
    }
    let len = order.saturating_sub(2);
    let mut out = Vec::new();
    go(0, len, 0, (lo, hi), &mut Vec::with_capacity(len), &mut out);
    out
}

/// η(N): all (k₃, …, k_N) with 1 ≤ Σ (m − 2) k_m ≤ N − 2, lexicographic.
pub fn enumerate_eta(n: usize) -> Result<Vec<IndexVector>> {
    check_order(n)?;
    if n == 2 {
        return Ok(Vec::new());
    }
    Ok(enumerate_weighted(n, 1, n - 2))
}

/// Tuples of order N with Σ (m − 2) k_m = level − 2 exactly: the terms
/// that first appear when the order is raised to `level`. Their union over
/// level = 3..=N is η(N).
pub fn enumerate_eta_level(level: usize, n: usize) -> Result<Vec<IndexVector>> {
    check_order(n)?;
    if !(3..=n).contains(&level) {
        return Err(Error::Domain(format!("level must lie in 3..={n}, got {level}")));
    }
    Ok(enumerate_weighted(n, level - 2, level - 2))
}

/// Probabilists' Hermite polynomial H_k(x), via H_{k+1} = x H_k − k H_{k−1}.
pub fn hermite<T: Scalar>(k: usize, x: T) -> T {
    let mut prev = T::one();
    if k == 0 {
        return prev;
    }
    let mut cur = x;
    for j in 1..k {
        let next = x * cur - T::of_usize(j) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// H_0(x), …, H_max(x).
pub fn hermite_all<T: Scalar>(max: usize, x: T) -> Vec<T> {
    let mut h = Vec::with_capacity(max + 1);
    h.push(T::one());
    if max >= 1 {
        h.push(x);
    }
    for j in 1..max {
        let next = x * h[j] - T::of_usize(j) * h[j - 1];
        h.push(next);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeworthTerm<T> {
    pub index: IndexVector,
    pub coefficient: T,
    pub hermite_degree: usize,
}

/// CDF and density of the expansion at one point. `out_of_range` is set
/// when the CDF leaves [0, 1] or the density is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeworthPoint<T> {
    pub cdf: T,
    pub pdf: T,
    pub out_of_range: bool,
}

/// An Edgeworth expansion of Ỹ_M of fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeworthExpansion<T> {
    order: usize,
    terms: Vec<EdgeworthTerm<T>>,
    cumulants: TailCumulants<T>,
    max_degree: usize,
}

/// One term per element of η(N), in lexicographic order.
pub fn build_expansion<T: Scalar>(tc: &TailCumulants<T>, n: usize) -> Result<EdgeworthExpansion<T>> {
    check_order(n)?;
    if n > 2 && tc.max_order() < n {
        return Err(Error::InsufficientCumulants { needed: n, available: tc.max_order() });
    }
    let terms = enumerate_eta(n)?
        .into_iter()
        .map(|index| {
            Ok(EdgeworthTerm {
                coefficient: index.coefficient(tc)?,
                hermite_degree: index.hermite_degree(),
                index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_degree = terms.iter().map(|t| t.hermite_degree).max().unwrap_or(0);
    Ok(EdgeworthExpansion { order: n, terms, cumulants: tc.clone(), max_degree })
}

impl<T: Scalar> EdgeworthExpansion<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[EdgeworthTerm<T>] {
        &self.terms
    }

    pub fn cumulants(&self) -> &TailCumulants<T> {
        &self.cumulants
    }

    /// Φ(x) − φ(x) Σ c H_deg(x). Not clamped to [0, 1].
    pub fn cdf(&self, x: T) -> T {
        self.evaluate(x).cdf
    }

    /// φ(x) (1 + Σ c H_{deg+1}(x)). May be negative in the tails.
    pub fn pdf(&self, x: T) -> T {
        self.evaluate(x).pdf
    }

    pub fn evaluate(&self, x: T) -> EdgeworthPoint<T> {
        let phi = norm_pdf(x);
        let (mut cdf_corr, mut pdf_corr) = (T::zero(), T::zero());
        if !self.terms.is_empty() {
            let h = hermite_all(self.max_degree + 1, x);
            for t in &self.terms {
                cdf_corr = cdf_corr + t.coefficient * h[t.hermite_degree];
                pdf_corr = pdf_corr + t.coefficient * h[t.hermite_degree + 1];
            }
        }
        let cdf = norm_cdf(x) - phi * cdf_corr;
        let pdf = phi * (T::one() + pdf_corr);
        let out_of_range = cdf < T::zero() || cdf > T::one() || pdf < T::zero();
        EdgeworthPoint { cdf, pdf, out_of_range }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuples(n: usize) -> Vec<Vec<u32>> {
        enumerate_eta(n).unwrap().into_iter().map(|iv| iv.as_slice().to_vec()).collect()
    }

    #[test]
    fn small_orders() {
        assert!(tuples(2).is_empty());
        assert_eq!(tuples(3), vec![vec![1]]);
        assert_eq!(tuples(4), vec![vec![0, 1], vec![1, 0], vec![2, 0]]);
        let five = tuples(5);
        assert_eq!(five.len(), 6);
        for t in [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 0], [2, 0, 0], [3, 0, 0]] {
            assert!(five.contains(&t.to_vec()), "{t:?}");
        }
    }

    #[test]
    fn order_out_of_range() {
        assert!(enumerate_eta(1).is_err());
        assert!(enumerate_eta(21).is_err());
        assert!(enumerate_eta_level(2, 5).is_err());
    }

    #[test]
    fn hermite_closed_forms() {
        assert_eq!(hermite(0, 3.7f64), 1.0);
        assert_eq!(hermite(2, 2.0f64), 3.0);
        assert_eq!(hermite(5, 1.0f64), 6.0);
        let x = 0.37f64;
        assert!((hermite(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-15);
        assert!((hermite(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-15);
        for (k, h) in hermite_all(9, x).iter().enumerate() {
            assert_eq!(*h, hermite(k, x));
        }
    }

    #[test]
    fn prefactors() {
        assert_eq!(IndexVector::new(vec![1]).rational_prefactor(), Ratio::new(1, 6));
        assert_eq!(IndexVector::new(vec![2, 0]).rational_prefactor(), Ratio::new(1, 72));
        assert_eq!(IndexVector::new(vec![3, 0, 0]).rational_prefactor(), Ratio::new(1, 1296));
        let mut top = vec![0; 18];
        top[17] = 1;
        assert_eq!(IndexVector::new(top).rational_prefactor(), Ratio::new(1, 2_432_902_008_176_640_000));
    }

    #[test]
    fn third_order_at_origin() {
        let tc = TailCumulants::from_parts(1, 1.0f64, vec![1.0, 0.2]);
        let exp = build_expansion(&tc, 3).unwrap();
        let expected = 0.5 + 0.2 / 6.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((exp.cdf(0.0) - expected).abs() < 1e-15);
        assert!((exp.cdf(0.0) - 0.513_298_076).abs() < 1e-9);
    }

    #[test]
    fn insufficient_cumulants() {
        let tc = TailCumulants::from_parts(1, 1.0f64, vec![1.0, 0.2]);
        assert_eq!(
            build_expansion(&tc, 4).unwrap_err(),
            Error::InsufficientCumulants { needed: 4, available: 3 }
        );
        assert!(build_expansion(&tc, 2).is_ok());
    }

    #[test]
    fn order_two_is_normal() {
        let tc = TailCumulants::from_parts(1, 1.0f64, vec![1.0]);
        let exp = build_expansion(&tc, 2).unwrap();
        assert!(exp.terms().is_empty());
        assert_eq!(exp.pdf(0.0), norm_pdf(0.0));
        assert_eq!(exp.cdf(1.3), norm_cdf(1.3));
    }

    #[test]
    fn flags_negative_density() {
        let tc = TailCumulants::from_parts(1, 1.0f64, vec![1.0, 3.0]);
        let exp = build_expansion(&tc, 3).unwrap();
        assert!((-120..120).any(|i| exp.evaluate(i as f64 * 0.05).out_of_range));
    }
}
