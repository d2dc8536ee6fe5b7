//! Forward problem `D_t^ρ u + A u = g(t) f`, `u(0) = φ`, solved mode by mode:
//! `u_k(t) = φ_k E_{ρ,1}(-λ_k t^ρ) + f_k ∫₀ᵗ K_k(t-η) g(η) dη`.

use std::io::Write;

use crate::error::{domain, Error, Result};
use crate::kernel::quadrature::integrate_adaptive;
use crate::kernel::{convolve_source, decay, psi_coefficient, QuadratureRule, TimeProfile};
use crate::scalar::{CompensatedSum, Scalar};
use crate::special::recip_gamma;
use crate::spectral::{reconstruct, SpectralOperator, SpectralVector};

/// Number of points of the default trajectory grid on `[0, T]`.
pub const DEFAULT_TIME_POINTS: usize = 129;

/// Default lower end of the residual window, as a fraction of `T`.
pub const RESIDUAL_WINDOW_START: f64 = 0.25;

/// Data of a forward solve.
#[derive(Clone, Debug)]
pub struct ForwardProblem<T> {
    pub rho: T,
    pub horizon: T,
    pub operator: SpectralOperator<T>,
    pub phi: SpectralVector<T>,
    pub f: SpectralVector<T>,
    pub g: TimeProfile<T>,
    pub rule: QuadratureRule<T>,
}

pub(crate) fn validate_common<T: Scalar>(
    rho: T,
    horizon: T,
    operator: &SpectralOperator<T>,
    vectors: &[(&'static str, &SpectralVector<T>)],
    g: &TimeProfile<T>,
) -> Result<()> {
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(domain(format!("rho out of (0,1]: {rho}")));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(domain(format!("final time must be positive, got {horizon}")));
    }
    for (what, v) in vectors {
        if v.len() != operator.len() {
            return Err(Error::Shape { what, expected: operator.len(), got: v.len() });
        }
    }
    let mismatch = (g.horizon() - horizon).abs();
    if mismatch > horizon * T::lit(1e-12) {
        return Err(domain(format!("source profile is defined on [0, {}], problem on [0, {horizon}]", g.horizon())));
    }
    Ok(())
}

impl<T: Scalar> ForwardProblem<T> {
    pub fn new(
        rho: T,
        horizon: T,
        operator: SpectralOperator<T>,
        phi: SpectralVector<T>,
        f: SpectralVector<T>,
        g: TimeProfile<T>,
    ) -> Result<Self> {
        validate_common(rho, horizon, &operator, &[("phi", &phi), ("f", &f)], &g)?;
        Ok(Self { rho, horizon, operator, phi, f, g, rule: QuadratureRule::default() })
    }

    pub fn with_rule(mut self, rule: QuadratureRule<T>) -> Result<Self> {
        rule.validate()?;
        self.rule = rule;
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.operator.len()
    }

    /// `u_k(t)` for one-based `k`.
    pub fn mode_value(&self, k: usize, t: T) -> Result<T> {
        if t < T::zero() || t > self.horizon * (T::one() + T::lit(1e-12)) {
            return Err(domain(format!("time {t} outside [0, {}]", self.horizon)));
        }
        let phi_k = self.phi.get(k);
        let f_k = self.f.get(k);
        if t == T::zero() {
            return Ok(phi_k);
        }
        let lambda = self.operator.eigenvalues()[k - 1];
        let mut u = T::zero();
        if phi_k != T::zero() {
            u = u + phi_k * decay(self.rho, lambda, t)?;
        }
        if f_k != T::zero() {
            u = u + f_k * convolve_source(self.rho, lambda, &self.g, t, &self.rule)?;
        }
        Ok(u)
    }
}

/// Coefficients of `u(t)` and optionally field values on a spatial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub coeffs: SpectralVector<T>,
    /// `(x_j, u(t, x_j))`.
    pub field: Option<Vec<(T, T)>>,
}

/// Uniform grid of `points` times on `[0, T]`.
pub fn uniform_times<T: Scalar>(horizon: T, points: usize) -> Vec<T> {
    let n = points.max(2) - 1;
    (0..=n).map(|i| horizon * T::from_usize_lossy(i) / T::from_usize_lossy(n)).collect()
}

/// `u(t)` at each requested time.
pub fn solve_forward<T: Scalar>(problem: &ForwardProblem<T>, times: &[T]) -> Result<Vec<TrajectorySample<T>>> {
    times
        .iter()
        .map(|&t| {
            let coeffs = (1..=problem.modes()).map(|k| problem.mode_value(k, t)).collect::<Result<Vec<_>>>()?;
            Ok(TrajectorySample { t, coeffs: SpectralVector::new(coeffs)?, field: None })
        })
        .collect()
}

/// Fills `field` by evaluating the eigenfunction expansion at `xs`.
pub fn attach_field<T: Scalar>(
    operator: &SpectralOperator<T>,
    samples: &mut [TrajectorySample<T>],
    xs: &[T],
) -> Result<()> {
    for s in samples {
        let field = xs.iter().map(|&x| Ok((x, reconstruct(operator, &s.coeffs, x)?))).collect::<Result<Vec<_>>>()?;
        s.field = Some(field);
    }
    Ok(())
}

/// `∫₀ᵀ u dt` from the closed-form time integrals of each mode.
pub fn integrate_trajectory<T: Scalar>(problem: &ForwardProblem<T>) -> Result<SpectralVector<T>> {
    let coeffs = (1..=problem.modes())
        .map(|k| {
            psi_coefficient(
                problem.rho,
                problem.operator.eigenvalues()[k - 1],
                problem.horizon,
                problem.phi.get(k),
                problem.f.get(k),
                &problem.g,
                &problem.rule,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralVector::new(coeffs)
}

/// `∫₀ᵀ u dt` by graded quadrature in time of the trajectory itself.
pub fn integrate_trajectory_by_quadrature<T: Scalar>(
    problem: &ForwardProblem<T>,
    time_rule: &QuadratureRule<T>,
) -> Result<SpectralVector<T>> {
    let horizon = problem.horizon;
    let coeffs = (1..=problem.modes())
        .map(|k| {
            if problem.phi.get(k) == T::zero() && problem.f.get(k) == T::zero() {
                return Ok(T::zero());
            }
            let scale = (problem.phi.get(k).abs()
                + problem.f.get(k).abs() * problem.g.sup_norm() / problem.operator.eigenvalues()[k - 1])
                * horizon;
            integrate_adaptive(
                |t| problem.mode_value(k, t),
                horizon,
                time_rule,
                time_rule.grading_for(problem.rho),
                scale,
                "trajectory time integral",
            )
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralVector::new(coeffs)
}

/// Caputo derivative of order `ρ` of samples on a uniform grid.
///
/// For `ρ < 1` this is the L1 scheme; the value at the first node is 0 (the
/// limit for continuously differentiable data). For `ρ = 1` it is the
/// second-order central difference, one-sided at the ends.
pub fn caputo_l1<T: Scalar>(times: &[T], values: &[T], rho: T) -> Result<Vec<T>> {
    if times.len() != values.len() {
        return Err(Error::Shape { what: "sample values", expected: times.len(), got: values.len() });
    }
    let n = times.len();
    if n < 3 {
        return Err(domain(format!("Caputo discretisation needs at least 3 points, got {n}")));
    }
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(domain(format!("rho out of (0,1]: {rho}")));
    }
    let h = (times[n - 1] - times[0]) / T::from_usize_lossy(n - 1);
    if !(h > T::zero()) {
        return Err(domain("time grid must be increasing"));
    }
    for i in 1..n {
        let step = times[i] - times[i - 1];
        if (step - h).abs() > h * T::lit(1e-9) {
            return Err(domain(format!("time grid is not uniform at node {i}")));
        }
    }
    if rho == T::one() {
        let two_h = T::lit(2.0) * h;
        let mut d = Vec::with_capacity(n);
        d.push((T::lit(-3.0) * values[0] + T::lit(4.0) * values[1] - values[2]) / two_h);
        for i in 1..n - 1 {
            d.push((values[i + 1] - values[i - 1]) / two_h);
        }
        d.push((T::lit(3.0) * values[n - 1] - T::lit(4.0) * values[n - 2] + values[n - 3]) / two_h);
        return Ok(d);
    }
    let e = T::one() - rho;
    let b: Vec<T> = (0..n).map(|j| T::from_usize_lossy(j + 1).powf(e) - T::from_usize_lossy(j).powf(e)).collect();
    let factor = h.powf(-rho) * recip_gamma(T::lit(2.0) - rho);
    let mut d = vec![T::zero(); n];
    for (m, slot) in d.iter_mut().enumerate().skip(1) {
        let mut acc = CompensatedSum::new();
        for j in 0..m {
            acc.add(b[j] * (values[m - j] - values[m - j - 1]));
        }
        *slot = factor * acc.value();
    }
    Ok(d)
}

/// Per-mode `max_i |D^ρ u_k(t_i) + λ_k u_k(t_i) - f_k g(t_i)|` over interior
/// nodes of a uniform grid with `grid_size` intervals and `t_i ≥ T/4`.
pub fn residual<T: Scalar>(problem: &ForwardProblem<T>, grid_size: usize) -> Result<Vec<T>> {
    residual_in_window(problem, grid_size, problem.horizon * T::lit(RESIDUAL_WINDOW_START))
}

/// As [`residual`], over interior nodes with `t_i ≥ t_min`.
pub fn residual_in_window<T: Scalar>(problem: &ForwardProblem<T>, grid_size: usize, t_min: T) -> Result<Vec<T>> {
    if grid_size < 16 {
        return Err(domain(format!("residual grid needs at least 16 intervals, got {grid_size}")));
    }
    let times = uniform_times(problem.horizon, grid_size + 1);
    let gvals: Vec<T> = times.iter().map(|&t| problem.g.value(t)).collect();
    (1..=problem.modes())
        .map(|k| {
            let lambda = problem.operator.eigenvalues()[k - 1];
            let f_k = problem.f.get(k);
            if problem.phi.get(k) == T::zero() && f_k == T::zero() {
                return Ok(T::zero());
            }
            let u = times.iter().map(|&t| problem.mode_value(k, t)).collect::<Result<Vec<_>>>()?;
            let d = caputo_l1(&times, &u, problem.rho)?;
            let mut worst = T::zero();
            for i in 1..grid_size {
                if times[i] >= t_min {
                    worst = worst.max((d[i] + lambda * u[i] - f_k * gvals[i]).abs());
                }
            }
            Ok(worst)
        })
        .collect()
}

/// Long-format `t,k,u_k` table.
pub fn write_trajectory_csv<T: Scalar, W: Write>(samples: &[TrajectorySample<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "k", "u_k"])?;
    for s in samples {
        for (i, c) in s.coeffs.coeffs().iter().enumerate() {
            w.write_record([s.t.to_csv(), (i + 1).to_string(), c.to_csv()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,x,u` table for samples that carry field values.
pub fn write_field_csv<T: Scalar, W: Write>(samples: &[TrajectorySample<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u"])?;
    for s in samples {
        let field = s.field.as_ref().ok_or(Error::Missing("field values"))?;
        for (x, u) in field {
            w.write_record([s.t.to_csv(), x.to_csv(), u.to_csv()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_mode(rho: f64, lambda: f64, phi: f64, f: f64, g: TimeProfile<f64>) -> ForwardProblem<f64> {
        let op = SpectralOperator::explicit(vec![lambda], "single").unwrap();
        ForwardProblem::new(
            rho,
            g.horizon(),
            op,
            SpectralVector::new(vec![phi]).unwrap(),
            SpectralVector::new(vec![f]).unwrap(),
            g,
        )
        .unwrap()
    }

    #[test]
    fn forward_examples() {
        let one = TimeProfile::constant(1.0, 1.0).unwrap();
        let p = single_mode(1.0, 1.0, 1.0, 0.0, one.clone());
        let s = solve_forward(&p, &[0.0, 1.0]).unwrap();
        assert_eq!(s[0].coeffs.get(1), 1.0);
        assert_relative_eq!(s[1].coeffs.get(1), (-1.0f64).exp(), max_relative = 1e-14);
        let p = single_mode(1.0, 1.0, 0.0, 1.0, one.clone());
        let s = solve_forward(&p, &[1.0]).unwrap();
        assert_relative_eq!(s[0].coeffs.get(1), 1.0 - (-1.0f64).exp(), max_relative = 1e-13);
        let p = single_mode(0.5, 1.0, 0.0, 0.0, one);
        assert!(solve_forward(&p, &uniform_times(1.0, 5)).unwrap().iter().all(|s| s.coeffs.is_zero()));
        assert!(solve_forward(&p, &[1.5]).is_err());
    }

    #[test]
    fn problem_validation() {
        let op = SpectralOperator::explicit(vec![1.0, 2.0], "e").unwrap();
        let g = TimeProfile::constant(1.0, 1.0).unwrap();
        let v2 = SpectralVector::zeros(2);
        let v1 = SpectralVector::zeros(1);
        assert!(ForwardProblem::new(1.5, 1.0, op.clone(), v2.clone(), v2.clone(), g.clone()).is_err());
        assert!(ForwardProblem::new(0.5, 1.0, op.clone(), v1, v2.clone(), g.clone()).is_err());
        assert!(ForwardProblem::new(0.5, 2.0, op, v2.clone(), v2, g).is_err());
    }

    #[test]
    fn caputo_examples() {
        let times = uniform_times(1.0, 65);
        let c = caputo_l1(&times, &vec![3.0; 65], 0.5).unwrap();
        assert!(c.iter().all(|v| *v == 0.0));
        // L1 is exact for piecewise-linear data
        let lin: Vec<f64> = times.clone();
        let c = caputo_l1(&times, &lin, 0.5).unwrap();
        for (t, d) in times.iter().zip(&c).skip(1) {
            assert_relative_eq!(*d, 2.0 * (t / std::f64::consts::PI).sqrt(), max_relative = 1e-12);
        }
        let sq: Vec<f64> = times.iter().map(|t| t * t).collect();
        let c = caputo_l1(&times, &sq, 0.5).unwrap();
        let g25 = crate::special::gamma(2.5).unwrap();
        assert!((c[64] - 2.0 / g25).abs() < 5e-3);
        assert!(caputo_l1(&times[..2], &sq[..2], 0.5).is_err());
        assert!(caputo_l1(&[0.0, 0.1, 0.3], &[0.0; 3], 0.5).is_err());
    }

    #[test]
    fn order_one_residual_converges_quadratically() {
        let g = TimeProfile::constant(0.0, 1.0).unwrap();
        let p = single_mode(1.0, 1.0, 1.0, 0.0, g);
        let r64 = residual(&p, 64).unwrap()[0];
        let r128 = residual(&p, 128).unwrap()[0];
        assert!((r64 / r128 - 4.0).abs() < 0.2, "ratio {}", r64 / r128);
        assert!(residual(&p, 8).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let g = TimeProfile::constant(1.0, 1.0).unwrap();
        let p = single_mode(1.0, 1.0, 1.0, 0.0, g);
        let s = solve_forward(&p, &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,k,u_k\n0.0,1,1.0\n0.5,1,"), "{text}");
        assert!(write_field_csv(&s, Vec::new()).is_err());
    }
}
