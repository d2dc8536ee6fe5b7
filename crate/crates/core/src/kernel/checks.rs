//! Quadrature cross-checks of the kernel identities and the empirical
//! `λ_k |p_k|` boundedness profile.

use super::quadrature::{integrate_adaptive, integrate_power_weighted, QuadratureRule};
use super::{convolve_source_direct, decay, decay_integral, ml, p_k, validate_mode, TimeProfile};
use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// `(∫₀ᵗ η^{β-1} E_{ρ,β}(λ η^ρ) dη, t^β E_{ρ,β+1}(λ t^ρ))` for `λ ≤ 0`.
pub fn ml_integral_identity_check<T: Scalar>(
    rho: T,
    beta: T,
    lambda: T,
    t: T,
    rule: &QuadratureRule<T>,
) -> Result<(T, T)> {
    validate_mode(rho, T::one())?;
    if !(beta > T::zero()) || !(lambda <= T::zero()) || !(t > T::zero()) {
        return Err(domain(format!("identity check needs beta > 0, lambda <= 0, t > 0 (got {beta}, {lambda}, {t})")));
    }
    let rhs = t.powf(beta) * ml(rho, beta + T::one(), lambda * t.powf(rho))?;
    let lhs = integrate_power_weighted(
        |s| ml(rho, beta, lambda * s.powf(rho)),
        t,
        beta - T::one(),
        rule,
        rule.grading_for(rho),
        T::zero(),
        "identity check integral",
    )?;
    Ok((lhs, rhs))
}

/// `(∫₀ᵀ E_{ρ,1}(-λ t^ρ) dt, T E_{ρ,2}(-λ T^ρ))`.
pub fn decay_integral_check<T: Scalar>(rho: T, lambda: T, horizon: T, rule: &QuadratureRule<T>) -> Result<(T, T)> {
    let rhs = decay_integral(rho, lambda, horizon)?;
    let lhs = integrate_adaptive(
        |t| decay(rho, lambda, t),
        horizon,
        rule,
        rule.grading_for(rho),
        T::zero(),
        "decay integral",
    )?;
    Ok((lhs, rhs))
}

/// `(lhs, rhs)` with `lhs = ∫₀ᵀ ∫₀ᵗ K(t-η) g(η) dη dt` by nested brute-force
/// quadrature and `rhs = p_{k,ρ}(T)`.
pub fn double_integral_identity_check<T: Scalar>(
    rho: T,
    lambda: T,
    g: &TimeProfile<T>,
    horizon: T,
    rule: &QuadratureRule<T>,
) -> Result<(T, T)> {
    let rhs = p_k(rho, lambda, g, horizon, rule)?;
    let scale = g.sup_norm() * super::source_kernel_second_integral(rho, lambda, horizon)?;
    let lhs = integrate_adaptive(
        |t| convolve_source_direct(rho, lambda, g, t, rule),
        horizon,
        rule,
        rule.grading_for(rho),
        scale,
        "double integral",
    )?;
    Ok((lhs, rhs))
}

/// `λ_k |p_{k,ρ}(T)|` over a list of eigenvalues, with the first index from
/// which the values stay inside a band of ratio `band`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundProfile<T> {
    pub p: Vec<T>,
    pub scaled: Vec<T>,
    /// One-based index `k₀`; `None` if no tail (not even the last mode) fits.
    pub k0: Option<usize>,
    /// max/min of the scaled values over `k ≥ k₀`.
    pub band_ratio: T,
    /// Geometric mean of the first window over that of the last window of
    /// `k ≥ k₀`, as a ratio ≥ 1.
    pub drift: T,
    pub band: T,
}

impl<T: Scalar> BoundProfile<T> {
    pub fn min_max_tail(&self) -> (T, T) {
        let start = self.k0.map_or(self.scaled.len(), |k| k - 1);
        let tail = &self.scaled[start..];
        let lo = tail.iter().copied().fold(T::infinity(), T::min);
        let hi = tail.iter().copied().fold(T::zero(), T::max);
        (lo, hi)
    }
}

/// Computes `p_k` for every eigenvalue and locates `k₀`. `window` sets the
/// number of modes in the drift comparison (capped at half the tail).
pub fn bound_profile<T: Scalar>(
    rho: T,
    eigenvalues: &[T],
    g: &TimeProfile<T>,
    horizon: T,
    rule: &QuadratureRule<T>,
    band: T,
    window: usize,
) -> Result<BoundProfile<T>> {
    let p = eigenvalues.iter().map(|&lambda| p_k(rho, lambda, g, horizon, rule)).collect::<Result<Vec<_>>>()?;
    bound_profile_from_values(eigenvalues, p, band, window)
}

/// [`bound_profile`] for already computed kernel values.
pub fn bound_profile_from_values<T: Scalar>(
    eigenvalues: &[T],
    p: Vec<T>,
    band: T,
    window: usize,
) -> Result<BoundProfile<T>> {
    if !(band > T::one()) {
        return Err(domain(format!("band ratio must exceed 1, got {band}")));
    }
    if eigenvalues.len() != p.len() {
        return Err(crate::error::Error::Shape { what: "kernel values", expected: eigenvalues.len(), got: p.len() });
    }
    let scaled: Vec<T> = eigenvalues.iter().zip(&p).map(|(l, v)| *l * v.abs()).collect();
    let mut k0 = None;
    let (mut lo, mut hi) = (T::infinity(), T::zero());
    let mut band_ratio = T::nan();
    for i in (0..scaled.len()).rev() {
        let nlo = lo.min(scaled[i]);
        let nhi = hi.max(scaled[i]);
        if !(nlo > T::zero()) || nhi / nlo > band {
            break;
        }
        lo = nlo;
        hi = nhi;
        k0 = Some(i + 1);
        band_ratio = hi / lo;
    }
    let drift = match k0 {
        Some(k) => {
            let tail = &scaled[k - 1..];
            let w = window.min(tail.len() / 2).max(1);
            let gm = |xs: &[T]| (xs.iter().map(|x| x.ln()).sum::<T>() / T::from_usize_lossy(xs.len())).exp();
            let r = gm(&tail[..w]) / gm(&tail[tail.len() - w..]);
            r.max(r.recip())
        }
        None => T::infinity(),
    };
    Ok(BoundProfile { p, scaled, k0, band_ratio, drift, band })
}
