//! Special functions: error function, normal law, log-gamma and the
//! incomplete gamma function.

use crate::scalar::Scalar;

const MAX_ITER: usize = 500;

/// Complementary error function, accurate to a few ulps of 1 in absolute
/// terms and to ~1e-14 relative on the right tail for `f64`.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::lit(1.5) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

pub fn erf<T: Scalar>(x: T) -> T {
    T::one() - erfc(x)
}

// erf(x) = 2/√π e^{-x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!, all terms positive.
fn erf_series<T: Scalar>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let two = T::lit(2.0);
    for n in 1..MAX_ITER {
        term = term * two * x2 / T::of_usize(2 * n + 1);
        sum = sum + term;
        if term <= sum * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    two / T::PI().sqrt() * (-x2).exp() * sum
}

// erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …)))), modified Lentz.
fn erfc_continued_fraction<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for k in 1..MAX_ITER {
        let a = T::of_usize(k) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

/// Standard normal CDF Φ.
pub fn norm_cdf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * erfc(-x / T::SQRT_2())
}

/// Standard normal density φ.
pub fn norm_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) * T::lit(0.5)).exp() / (T::TAU()).sqrt()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x < T::lit(0.5) {
        // reflection
        return (T::PI() / (T::PI() * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(p) / (x + T::of_usize(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (x + T::lit(0.5)) * t.ln() - t + a.ln()
}

/// Upper incomplete gamma function Γ(s, z) = ∫_z^∞ t^{s-1} e^{-t} dt, s > 0, z ≥ 0.
pub fn upper_gamma<T: Scalar>(s: T, z: T) -> T {
    if z <= T::zero() {
        return ln_gamma(s).exp();
    }
    if z < s + T::one() {
        let lower = lower_gamma_series(s, z);
        ln_gamma(s).exp() - lower
    } else {
        upper_gamma_continued_fraction(s, z)
    }
}

/// Regularized upper incomplete gamma Q(s, z) = Γ(s, z) / Γ(s).
pub fn gamma_q<T: Scalar>(s: T, z: T) -> T {
    if z <= T::zero() {
        return T::one();
    }
    if z < s + T::one() {
        T::one() - lower_gamma_series(s, z) / ln_gamma(s).exp()
    } else {
        upper_gamma_continued_fraction(s, z) / ln_gamma(s).exp()
    }
}

/// Regularized lower incomplete gamma P(s, z).
pub fn gamma_p<T: Scalar>(s: T, z: T) -> T {
    if z <= T::zero() {
        return T::zero();
    }
    if z < s + T::one() {
        lower_gamma_series(s, z) / ln_gamma(s).exp()
    } else {
        T::one() - upper_gamma_continued_fraction(s, z) / ln_gamma(s).exp()
    }
}

// γ(s, z) by its power series; used for z < s + 1.
fn lower_gamma_series<T: Scalar>(s: T, z: T) -> T {
    let mut ap = s;
    let mut del = s.recip();
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * z / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (-z + s * z.ln()).exp()
}

// Γ(s, z) by Legendre's continued fraction; used for z ≥ s + 1.
fn upper_gamma_continued_fraction<T: Scalar>(s: T, z: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut b = z + T::one() - s;
    let mut c = tiny.recip();
    let mut d = b.recip();
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = T::of_usize(i);
        let an = -i * (i - s);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-z + s * z.ln()).exp() * h
}

/// n! as a float; exact for n ≤ 22 in `f64`.
pub fn factorial<T: Scalar>(n: usize) -> T {
    (2..=n).fold(T::one(), |acc, k| acc * T::of_usize(k))
}
