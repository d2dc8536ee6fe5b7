//! Scalar time kernels of the mode-wise solution.
//!
//! With `K(s) = s^{ρ-1} E_{ρ,ρ}(-λ s^ρ)` and its antiderivatives
//! `J(s) = s^ρ E_{ρ,ρ+1}(-λ s^ρ)` and `J₂(s) = s^{ρ+1} E_{ρ,ρ+2}(-λ s^ρ)`,
//!
//! * [`convolve_source`] computes `∫₀ᵗ K(t-η) g(η) dη`,
//! * [`p_k`] computes `∫₀ᵀ J(T-η) g(η) dη`.
//!
//! Both integrals are evaluated as `g(t)·J(t) + ∫₀ᵗ K(s)[g(t-s) - g(t)] ds`
//! (and the analogue with `J`, `J₂`), so the exactly integrated part carries
//! the endpoint singularity and the mass concentration of stiff modes, and
//! the quadrature only sees a remainder that vanishes at `s = 0`.

mod checks;
pub mod profile;
pub mod quadrature;

pub use checks::{
    bound_profile, bound_profile_from_values, decay_integral_check, double_integral_identity_check,
    ml_integral_identity_check, BoundProfile,
};
pub use profile::{NaturalSpline, TimeProfile};
pub use quadrature::{default_grading, gauss_legendre, QuadratureRule};

use crate::error::{domain, Result};
use crate::scalar::Scalar;
use crate::special::{ml_eval, MLParams};
use quadrature::{integrate_adaptive, integrate_power_weighted};

/// Below this value of `λs` the order-one `J₂` uses the series path.
const ORDER_ONE_J2_SWITCH: f64 = 0.5;

fn ml<T: Scalar>(rho: T, mu: T, z: T) -> Result<T> {
    ml_eval(MLParams::new(rho, mu)?, z)
}

pub(crate) fn validate_mode<T: Scalar>(rho: T, lambda: T) -> Result<()> {
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(domain(format!("rho out of (0,1]: {rho}")));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(domain(format!("eigenvalue must be positive and finite, got {lambda}")));
    }
    Ok(())
}

fn validate_time<T: Scalar>(t: T, g: &TimeProfile<T>) -> Result<()> {
    let horizon = g.horizon();
    let slack = horizon * T::lit(1e-12);
    if !(t > T::zero() && t <= horizon + slack) {
        return Err(domain(format!("time {t} outside (0, {horizon}]")));
    }
    Ok(())
}

/// `K(s) = s^{ρ-1} E_{ρ,ρ}(-λ s^ρ)`, `s > 0`.
pub fn source_kernel<T: Scalar>(rho: T, lambda: T, s: T) -> Result<T> {
    if rho == T::one() {
        return Ok((-lambda * s).exp());
    }
    let sr = s.powf(rho);
    Ok(sr / s * ml(rho, rho, -lambda * sr)?)
}

/// `J(s) = s^ρ E_{ρ,ρ+1}(-λ s^ρ) = ∫₀ˢ K`.
pub fn source_kernel_integral<T: Scalar>(rho: T, lambda: T, s: T) -> Result<T> {
    if s == T::zero() {
        return Ok(T::zero());
    }
    if rho == T::one() {
        return Ok(-(-lambda * s).exp_m1() / lambda);
    }
    let sr = s.powf(rho);
    Ok(sr * ml(rho, rho + T::one(), -lambda * sr)?)
}

/// `J₂(s) = s^{ρ+1} E_{ρ,ρ+2}(-λ s^ρ) = ∫₀ˢ J`.
pub fn source_kernel_second_integral<T: Scalar>(rho: T, lambda: T, s: T) -> Result<T> {
    if s == T::zero() {
        return Ok(T::zero());
    }
    if rho == T::one() && lambda * s >= T::lit(ORDER_ONE_J2_SWITCH) {
        let j = -(-lambda * s).exp_m1() / lambda;
        return Ok((s - j) / lambda);
    }
    let sr = s.powf(rho);
    Ok(sr * s * ml(rho, rho + T::lit(2.0), -lambda * sr)?)
}

/// `∫₀ᵀ E_{ρ,1}(-λ t^ρ) dt = T E_{ρ,2}(-λ T^ρ)`.
pub fn decay_integral<T: Scalar>(rho: T, lambda: T, horizon: T) -> Result<T> {
    validate_mode(rho, lambda)?;
    if horizon == T::zero() {
        return Ok(T::zero());
    }
    if rho == T::one() {
        return Ok(-(-lambda * horizon).exp_m1() / lambda);
    }
    Ok(horizon * ml(rho, T::lit(2.0), -lambda * horizon.powf(rho))?)
}

/// `E_{ρ,1}(-λ t^ρ)`, the free decay of one mode.
pub fn decay<T: Scalar>(rho: T, lambda: T, t: T) -> Result<T> {
    if t == T::zero() {
        return Ok(T::one());
    }
    if rho == T::one() {
        return Ok((-lambda * t).exp());
    }
    ml(rho, T::one(), -lambda * t.powf(rho))
}

/// `∫₀ᵗ (t-η)^{ρ-1} E_{ρ,ρ}(-λ(t-η)^ρ) g(η) dη` for `0 < t ≤ T`.
pub fn convolve_source<T: Scalar>(rho: T, lambda: T, g: &TimeProfile<T>, t: T, rule: &QuadratureRule<T>) -> Result<T> {
    validate_mode(rho, lambda)?;
    validate_time(t, g)?;
    let gt = g.value(t);
    let mass = source_kernel_integral(rho, lambda, t)?;
    if g.is_constant() {
        return Ok(gt * mass);
    }
    let scale = g.sup_norm() * mass;
    let rest = integrate_adaptive(
        |s| Ok(source_kernel(rho, lambda, s)? * (g.value(t - s) - gt)),
        t,
        rule,
        rule.grading_for(rho),
        scale,
        "source convolution",
    )?;
    Ok(gt * mass + rest)
}

/// Brute-force variant of [`convolve_source`]: the full integrand
/// `K(t-η) g(η)` with no exactly integrated part.
pub fn convolve_source_direct<T: Scalar>(
    rho: T,
    lambda: T,
    g: &TimeProfile<T>,
    t: T,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    validate_mode(rho, lambda)?;
    validate_time(t, g)?;
    let scale = g.sup_norm() * source_kernel_integral(rho, lambda, t)?;
    if rho == T::one() {
        return integrate_adaptive(
            |s| Ok((-lambda * s).exp() * g.value(t - s)),
            t,
            rule,
            rule.grading_for(rho),
            scale,
            "direct source convolution",
        );
    }
    // The weight s^{ρ-1} is absorbed by the substitution; what remains is
    // E_{ρ,ρ}(-λ s^ρ) g(t - s).
    let params = MLParams::new(rho, rho)?;
    integrate_power_weighted(
        |s| Ok(ml_eval(params, -lambda * s.powf(rho))? * g.value(t - s)),
        t,
        rho - T::one(),
        rule,
        rule.grading_for(rho),
        scale,
        "direct source convolution",
    )
}

/// `p_{k,ρ}(T) = ∫₀ᵀ g(η) (T-η)^ρ E_{ρ,ρ+1}(-λ(T-η)^ρ) dη`.
pub fn p_k<T: Scalar>(rho: T, lambda: T, g: &TimeProfile<T>, horizon: T, rule: &QuadratureRule<T>) -> Result<T> {
    validate_mode(rho, lambda)?;
    validate_time(horizon, g)?;
    let g_end = g.value(horizon);
    let mass = source_kernel_second_integral(rho, lambda, horizon)?;
    if g.is_constant() {
        return Ok(g_end * mass);
    }
    let scale = g.sup_norm() * mass;
    let rest = integrate_adaptive(
        |s| Ok(source_kernel_integral(rho, lambda, s)? * (g.value(horizon - s) - g_end)),
        horizon,
        rule,
        rule.grading_for(rho),
        scale,
        "overdetermination kernel",
    )?;
    Ok(g_end * mass + rest)
}

/// `ψ_k = φ_k T E_{ρ,2}(-λ T^ρ) + f_k p_{k,ρ}(T)`, the exact time integral of
/// one mode of the forward solution.
#[allow(clippy::too_many_arguments)]
pub fn psi_coefficient<T: Scalar>(
    rho: T,
    lambda: T,
    horizon: T,
    phi_k: T,
    f_k: T,
    g: &TimeProfile<T>,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let mut psi = T::zero();
    if phi_k != T::zero() {
        psi = psi + phi_k * decay_integral(rho, lambda, horizon)?;
    } else {
        validate_mode(rho, lambda)?;
    }
    if f_k != T::zero() {
        psi = psi + f_k * p_k(rho, lambda, g, horizon, rule)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rule() -> QuadratureRule<f64> {
        QuadratureRule::default()
    }

    fn one(h: f64) -> TimeProfile<f64> {
        TimeProfile::constant(1.0, h).unwrap()
    }

    #[test]
    fn order_one_fast_path_matches_ml_path() {
        for &lambda in &[1e-3, 0.7, 9.0, 350.0, 4e5] {
            for &s in &[1e-6, 0.01, 0.3, 1.0, 2.5] {
                let x = -lambda * s;
                let k = ml(1.0, 1.0, x).unwrap();
                let j = s * ml(1.0, 2.0, x).unwrap();
                let j2 = s * s * ml(1.0, 3.0, x).unwrap();
                assert_relative_eq!(source_kernel(1.0, lambda, s).unwrap(), k, max_relative = 1e-10);
                assert_relative_eq!(source_kernel_integral(1.0, lambda, s).unwrap(), j, max_relative = 1e-10);
                assert_relative_eq!(source_kernel_second_integral(1.0, lambda, s).unwrap(), j2, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn convolution_examples() {
        let g = one(1.0);
        let v = convolve_source(1.0, 1.0, &g, 1.0, &rule()).unwrap();
        assert_relative_eq!(v, 1.0 - (-1.0f64).exp(), max_relative = 1e-12);
        let v = convolve_source(0.5, 1.0, &g, 1.0, &rule()).unwrap();
        assert_relative_eq!(v, ml(0.5, 1.5, -1.0).unwrap(), max_relative = 1e-12);
        let zero = TimeProfile::constant(0.0, 1.0).unwrap();
        assert_eq!(convolve_source(0.3, 5.0, &zero, 0.5, &rule()).unwrap(), 0.0);
    }

    #[test]
    fn convolution_of_linear_profile_has_closed_form() {
        // g(η) = η: ∫₀ᵗ K(t-η) η dη = ∫₀ᵗ J(s) ds = J₂(t)
        let g = TimeProfile::linear(0.0, 1.0, 1.0).unwrap();
        for &(rho, lambda) in &[(0.3, 2.0), (0.7, 40.0), (1.0, 5.0), (0.5, 1e4)] {
            let v = convolve_source(rho, lambda, &g, 0.8, &rule()).unwrap();
            let exact = source_kernel_second_integral(rho, lambda, 0.8).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-9);
            let d = convolve_source_direct(rho, lambda.min(100.0), &g, 0.8, &rule()).unwrap();
            let exact = source_kernel_second_integral(rho, lambda.min(100.0), 0.8).unwrap();
            assert_relative_eq!(d, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn p_k_examples() {
        let g = one(1.0);
        assert_relative_eq!(p_k(1.0, 1.0, &g, 1.0, &rule()).unwrap(), (-1.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(
            p_k(0.5, 4.0, &g, 1.0, &rule()).unwrap(),
            ml(0.5, 2.5, -4.0).unwrap(),
            max_relative = 1e-12
        );
        let zero = TimeProfile::constant(0.0, 1.0).unwrap();
        assert_eq!(p_k(0.5, 4.0, &zero, 1.0, &rule()).unwrap(), 0.0);
    }

    #[test]
    fn p_k_quadrature_path_matches_constant_path() {
        let c = one(1.5);
        let looks_varying = TimeProfile::closed_form("one", 1.5, |_| 1.0).unwrap();
        let linear = TimeProfile::linear(1.0, 0.0, 1.5).unwrap();
        for &(rho, lambda) in &[(0.2, 3.0), (0.6, 90.0), (1.0, 1e3)] {
            let a = p_k(rho, lambda, &c, 1.5, &rule()).unwrap();
            let b = p_k(rho, lambda, &looks_varying, 1.5, &rule()).unwrap();
            let l = p_k(rho, lambda, &linear, 1.5, &rule()).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
            assert_relative_eq!(a, l, max_relative = 1e-12);
        }
    }

    #[test]
    fn psi_coefficient_examples() {
        let g = one(1.0);
        let r = rule();
        let e = (-1.0f64).exp();
        assert_relative_eq!(psi_coefficient(1.0, 1.0, 1.0, 1.0, 0.0, &g, &r).unwrap(), 1.0 - e, max_relative = 1e-14);
        assert_eq!(psi_coefficient(1.0, 1.0, 1.0, 0.0, 0.0, &g, &r).unwrap(), 0.0);
        assert_relative_eq!(psi_coefficient(1.0, 1.0, 1.0, 0.0, 1.0, &g, &r).unwrap(), e, max_relative = 1e-12);
    }

    #[test]
    fn time_and_parameter_validation() {
        let g = one(1.0);
        assert!(convolve_source(0.5, 1.0, &g, 0.0, &rule()).is_err());
        assert!(convolve_source(0.5, 1.0, &g, 1.5, &rule()).is_err());
        assert!(convolve_source(1.5, 1.0, &g, 0.5, &rule()).is_err());
        assert!(p_k(0.5, -1.0, &g, 1.0, &rule()).is_err());
    }

    #[test]
    fn decay_integral_order_one() {
        assert_relative_eq!(
            decay_integral(1.0, 4.0, 1.0).unwrap(),
            (1.0 - (-4.0f64).exp()) / 4.0,
            max_relative = 1e-15
        );
        assert_eq!(decay(0.5, 3.0, 0.0).unwrap(), 1.0);
    }
}
