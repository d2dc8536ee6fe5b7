//! Gamma function and the two-parameter Mittag-Leffler function
//! E_{ρ,μ}(z) = Σ zⁿ / Γ(ρn + μ) for real arguments.
//!
//! Negative arguments are evaluated in one of three regimes selected by the
//! natural scale `w = |z|^{1/ρ}`:
//!
//! * `w ≤ 1`: the defining power series (compensated summation),
//! * `1 < w < 40`: inverse Laplace transform of `s^{ρ-μ} / (s^ρ - z)` along a
//!   parabolic Hankel contour with the trapezoidal rule,
//! * `w ≥ 40`: the algebraic asymptotic expansion truncated at its smallest
//!   term.
//!
//! Order ρ = 1 has its own path built from the exponential and Kummer's
//! transformation `₁F₁(1; μ; -x) = e^{-x} ₁F₁(μ-1; μ; x)`, whose series has
//! no cancellation for `x > 0`.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Upper end of the power-series regime, in units of `w = |z|^{1/ρ}`.
pub const SERIES_MAX_W: f64 = 1.0;
/// Lower end of the asymptotic regime, in units of `w = |z|^{1/ρ}`.
pub const ASYMPTOTIC_MIN_W: f64 = 40.0;
/// Relative error above which evaluation is reported as failed.
pub const ML_TOLERANCE: f64 = 1e-10;

const MAX_SERIES_TERMS: usize = 200_000;

/// Lanczos approximation, g = 7, n = 9 (the coefficient set used by the GNU
/// Scientific Library).
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos sum for `x ∈ [0.5, 2.5)`.
fn lanczos<T: Scalar>(x: T) -> T {
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    // t^{z+1/2} split in two halves keeps the power away from overflow.
    let half = t.powf((z + T::lit(0.5)) / T::lit(2.0));
    (T::TAU()).sqrt() * (half * (-t).exp()) * half * acc
}

/// `sin(πx)` with argument reduction done before multiplying by π.
pub(crate) fn sin_pi<T: Scalar>(x: T) -> T {
    let two = T::lit(2.0);
    let r = x - two * (x / two).round();
    let half = T::lit(0.5);
    if r > half {
        (T::PI() * (T::one() - r)).sin()
    } else if r < -half {
        -(T::PI() * (T::one() + r)).sin()
    } else {
        (T::PI() * r).sin()
    }
}

/// Γ(x) for finite `x > 0`; returns `+∞` past the overflow threshold.
fn gamma_positive<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        return T::PI() / (sin_pi(x) * lanczos(T::one() - x));
    }
    let upper = T::lit(2.5);
    if x < upper {
        if x == T::one() || x == T::lit(2.0) {
            return T::one();
        }
        return lanczos(x);
    }
    if x > T::lit(172.0) {
        return T::infinity();
    }
    if x == x.round() {
        // (x-1)! exactly while the partial products stay representable.
        let n = x.to_usize().unwrap_or(0);
        return (2..n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k));
    }
    // Γ(x) = (x-1)(x-2)…(x-n) Γ(x-n) with x - n ∈ [1.5, 2.5).
    let mut y = x;
    let mut prod = T::one();
    while y >= upper {
        y = y - T::one();
        prod = prod * y;
    }
    prod * lanczos(y)
}

/// Euler's gamma function for `x > 0`.
pub fn gamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("gamma requires a finite positive argument, got {x}")));
    }
    Ok(gamma_positive(x))
}

/// 1/Γ(x) on the whole real line (zero at the poles of Γ).
pub fn recip_gamma<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        return gamma_positive(x).recip();
    }
    if x == x.round() {
        return T::zero();
    }
    // Reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π.
    sin_pi(x) * gamma_positive(T::one() - x) / T::PI()
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires a finite positive argument, got {x}")));
    }
    if x < T::lit(12.0) {
        return Ok(gamma_positive(x).ln());
    }
    // Stirling series.
    let inv = x.recip();
    let inv2 = inv * inv;
    const C: [f64; 7] =
        [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360_360.0, 1.0 / 156.0];
    let mut series = T::zero();
    for &c in C.iter().rev() {
        series = series * inv2 + T::lit(c);
    }
    series = series * inv;
    Ok((x - T::lit(0.5)) * x.ln() - x + T::lit(0.5) * T::TAU().ln() + series)
}

/// Parameters (ρ, μ) of E_{ρ,μ}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MLParams<T> {
    rho: T,
    mu: T,
}

impl<T: Scalar> MLParams<T> {
    /// Requires `ρ ∈ (0, 1]` and `μ > 0`.
    pub fn new(rho: T, mu: T) -> Result<Self> {
        if !(rho > T::zero() && rho <= T::one()) {
            return Err(domain(format!("Mittag-Leffler order rho must lie in (0, 1], got {rho}")));
        }
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(domain(format!("Mittag-Leffler parameter mu must be positive, got {mu}")));
        }
        Ok(Self { rho, mu })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn mu(&self) -> T {
        self.mu
    }
}

/// Which algorithm [`ml_eval`] uses for a given argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlRegime {
    /// z = 0 or order one closed forms.
    Exact,
    Series,
    Contour,
    Asymptotic,
}

/// Regime selection for `ml_eval`, exposed for diagnostics and tests.
pub fn ml_regime<T: Scalar>(params: MLParams<T>, z: T) -> MlRegime {
    if z == T::zero() || params.rho == T::one() {
        return MlRegime::Exact;
    }
    if z > T::zero() {
        return MlRegime::Series;
    }
    let w = (-z).powf(params.rho.recip());
    if w <= T::lit(SERIES_MAX_W) {
        MlRegime::Series
    } else if w < T::lit(ASYMPTOTIC_MIN_W) {
        MlRegime::Contour
    } else {
        MlRegime::Asymptotic
    }
}

/// Evaluates E_{ρ,μ}(z) for real `z`.
pub fn ml_eval<T: Scalar>(params: MLParams<T>, z: T) -> Result<T> {
    if z.is_nan() {
        return Err(domain("Mittag-Leffler argument is NaN"));
    }
    if z == T::zero() {
        return Ok(recip_gamma(params.mu));
    }
    if params.rho == T::one() {
        return ml_order_one(params.mu, z);
    }
    if z > T::zero() {
        return ml_series_positive(params, z);
    }
    match ml_regime(params, z) {
        MlRegime::Series => ml_series(params, z),
        MlRegime::Contour => Ok(ml_contour(params, z)),
        _ => ml_asymptotic(params, -z),
    }
}

/// Leading asymptotic term `t⁻¹ / Γ(μ - ρ)` of E_{ρ,μ}(-t).
pub fn ml_asymptotic_leading<T: Scalar>(params: MLParams<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(domain(format!("asymptotic argument must be positive, got {t}")));
    }
    let a = params.mu - params.rho;
    if a <= T::zero() && a == a.round() {
        return Err(domain(format!("Gamma pole at mu - rho = {a}")));
    }
    Ok(recip_gamma(a) / t)
}

/// Power series with compensated summation. Accurate while the largest term
/// stays close to the result, i.e. `|z|^{1/ρ}` of order one.
pub fn ml_series<T: Scalar>(params: MLParams<T>, z: T) -> Result<T> {
    let MLParams { rho, mu } = params;
    let eps = T::epsilon();
    let mut acc = CompensatedSum::new();
    let mut zpow = T::one();
    let mut prev_mag = T::infinity();
    for n in 0..MAX_SERIES_TERMS {
        let arg = rho * T::from_usize_lossy(n) + mu;
        let term = zpow * recip_gamma(arg);
        acc.add(term);
        let mag = term.abs();
        // Past the maximum of 1/Γ the terms decay monotonically; bound the
        // tail by a geometric series with the observed ratio.
        if arg > T::lit(2.5) && mag <= prev_mag {
            let ratio = if prev_mag.is_finite() && prev_mag > T::zero() { mag / prev_mag } else { T::zero() };
            let tail = if ratio < T::one() { mag / (T::one() - ratio) } else { T::infinity() };
            if tail <= eps * acc.value().abs() || mag == T::zero() {
                return Ok(acc.value());
            }
        }
        prev_mag = mag;
        zpow = zpow * z;
        if !zpow.is_finite() {
            break;
        }
    }
    Err(Error::Accuracy {
        context: format!("Mittag-Leffler series (rho={rho}, mu={mu}, z={z})"),
        estimate: prev_mag.to_f64_lossy(),
    })
}

/// Series for `z > 0` with terms formed in log space; every term is positive.
fn ml_series_positive<T: Scalar>(params: MLParams<T>, z: T) -> Result<T> {
    let MLParams { rho, mu } = params;
    let eps = T::epsilon();
    let lnz = z.ln();
    let mut sum = T::zero();
    let mut prev = T::zero();
    for n in 0..MAX_SERIES_TERMS {
        let nf = T::from_usize_lossy(n);
        let arg = rho * nf + mu;
        let term = if arg < T::lit(12.0) { z.powf(nf) * recip_gamma(arg) } else { (nf * lnz - ln_gamma(arg)?).exp() };
        sum = sum + term;
        if !sum.is_finite() {
            return Err(Error::Overflow(format!(
                "Mittag-Leffler function at positive argument (rho={rho}, mu={mu}, z={z})"
            )));
        }
        if arg > T::lit(2.5) && term < prev {
            let ratio = term / prev;
            if term / (T::one() - ratio) <= eps * sum {
                return Ok(sum);
            }
        }
        prev = term;
    }
    Err(Error::Accuracy {
        context: format!("Mittag-Leffler positive series (rho={rho}, mu={mu}, z={z})"),
        estimate: prev.to_f64_lossy(),
    })
}

/// Number of trapezoidal nodes on the half contour for the working precision.
fn contour_nodes<T: Scalar>() -> usize {
    let digits = -T::epsilon().to_f64_lossy().ln();
    (digits / 1.65).ceil() as usize
}

/// Inverse Laplace transform of `s^{ρ-μ}/(s^ρ - z)` at time one, on the
/// parabola `s(u) = m (1 + iu)²`. For `z < 0` and `ρ < 1` the transform is
/// analytic off the negative real axis, so no residues are collected.
pub fn ml_contour<T: Scalar>(params: MLParams<T>, z: T) -> T {
    let MLParams { rho, mu } = params;
    let n = contour_nodes::<T>();
    let nf = T::from_usize_lossy(n);
    let h = T::lit(3.0) / nf;
    let m = T::PI() * nf / T::lit(12.0);
    let one = Complex::new(T::one(), T::zero());
    let mut acc = CompensatedSum::new();
    for j in 0..=n {
        let u = h * T::from_usize_lossy(j);
        let w = one + Complex::new(T::zero(), u);
        let s = w * w * m;
        let value = s.exp() * s.powf(rho - mu) / (s.powf(rho) - z) * w;
        let weight = if j == 0 { T::one() } else { T::lit(2.0) };
        acc.add(weight * value.re);
    }
    h * m / T::PI() * acc.value()
}

/// Asymptotic expansion E_{ρ,μ}(-x) ~ Σ_{k≥1} (-1)^{k+1} x^{-k} / Γ(μ - ρk),
/// truncated at the smallest term.
pub fn ml_asymptotic<T: Scalar>(params: MLParams<T>, x: T) -> Result<T> {
    let MLParams { rho, mu } = params;
    let eps = T::epsilon();
    let mut acc = CompensatedSum::<T>::new();
    let mut xinv_pow = T::one();
    let mut best = T::infinity();
    // Terms with μ - ρk > -1 are not yet on the factorially growing branch.
    let settle = ((mu + T::one()) / rho).ceil().to_usize().unwrap_or(usize::MAX);
    for k in 1..MAX_SERIES_TERMS {
        xinv_pow = xinv_pow / x;
        let kf = T::from_usize_lossy(k);
        let arg = mu - rho * kf;
        let sign = if k % 2 == 1 { T::one() } else { -T::one() };
        let rg = recip_gamma(arg);
        let term = sign * xinv_pow * rg;
        // Γ(1 - arg) / (π x^k) bounds |term| for arg < 1 and does not vanish
        // near the poles of Γ.
        let envelope = if arg < T::one() { xinv_pow * gamma_positive(T::one() - arg) / T::PI() } else { term.abs() };
        if k > settle && envelope > best {
            let sum = acc.value();
            let rel = best / sum.abs().max(T::min_positive_value());
            if rel <= T::lit(ML_TOLERANCE) {
                return Ok(sum);
            }
            return Err(Error::Accuracy {
                context: format!("Mittag-Leffler asymptotic expansion (rho={rho}, mu={mu}, x={x})"),
                estimate: rel.to_f64_lossy(),
            });
        }
        acc.add(term);
        best = best.min(envelope);
        let sum = acc.value();
        if k > settle && envelope <= eps * sum.abs() {
            return Ok(sum);
        }
        if xinv_pow == T::zero() {
            return Ok(sum);
        }
    }
    Err(Error::Accuracy {
        context: format!("Mittag-Leffler asymptotic expansion (rho={rho}, mu={mu}, x={x})"),
        estimate: best.to_f64_lossy(),
    })
}

/// Order one: E_{1,μ}(z).
fn ml_order_one<T: Scalar>(mu: T, z: T) -> Result<T> {
    if mu == T::one() {
        return Ok(z.exp());
    }
    let params = MLParams { rho: T::one(), mu };
    if z > T::zero() {
        return ml_series_positive(params, z);
    }
    let x = -z;
    if x >= T::lit(ASYMPTOTIC_MIN_W) {
        return ml_asymptotic(params, x);
    }
    // E_{1,μ}(-x) = e^{-x}/Γ(μ) Σ_n (μ-1)/(μ-1+n) xⁿ/n!
    let a = mu - T::one();
    let eps = T::epsilon();
    let mut power = T::one();
    let mut acc = CompensatedSum::new();
    for n in 0..MAX_SERIES_TERMS {
        let nf = T::from_usize_lossy(n);
        if n > 0 {
            power = power * x / nf;
        }
        let coeff = if n == 0 { T::one() } else { a / (a + nf) };
        let term = coeff * power;
        acc.add(term);
        if nf > x && term.abs() <= eps * acc.value().abs() {
            return Ok((-x).exp() * recip_gamma(mu) * acc.value());
        }
    }
    Err(Error::Accuracy { context: format!("Kummer series for E_(1,{mu})({z})"), estimate: power.to_f64_lossy() })
}
