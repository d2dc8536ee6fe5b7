//! Built-in property checks of the kernel identities and the solvers.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subdiff_core::kernel::{
    bound_profile, decay_integral_check, ml_integral_identity_check, source_kernel_second_integral,
};
use subdiff_core::{
    double_integral_identity_check, integrate_trajectory, ml_eval, partition_modes, residual, solve_inverse,
    ForwardProblem64, InverseProblem64, MLParams64, QuadratureRule64, SpectralOperator64, SpectralVector64,
    TimeProfile64,
};

/// Seed of the random draws, fixed so that every run checks the same cases.
pub const SELFTEST_SEED: u64 = 20_240_617;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({})", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check { name, passed: worst <= tol, detail: format!("worst {worst:.3e}, tolerance {tol:.0e}") }
}

fn failed(name: &'static str, e: impl fmt::Display) -> Check {
    Check { name, passed: false, detail: format!("error: {e}") }
}

fn run_check<F>(name: &'static str, tol: f64, body: F) -> Check
where
    F: FnOnce() -> subdiff_core::Result<f64>,
{
    match body() {
        Ok(worst) => check(name, worst, tol),
        Err(e) => failed(name, e),
    }
}

fn ml(rho: f64, mu: f64, z: f64) -> subdiff_core::Result<f64> {
    ml_eval(MLParams64::new(rho, mu)?, z)
}

/// All checks; `quick` uses fewer random draws and skips the slower ones.
pub fn run_selftest(quick: bool) -> Vec<Check> {
    let draws = if quick { 20 } else { 100 };
    let rule = QuadratureRule64::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SELFTEST_SEED);
    let mut out = Vec::new();

    out.push(run_check("mittag-leffler closed forms", 1e-10, || {
        let mut worst = 0.0f64;
        let mut z = -700.0;
        while z <= 10.0 {
            worst = worst.max((ml(1.0, 1.0, z)? / z.exp() - 1.0).abs());
            z += 0.5;
        }
        worst = worst.max((ml(1.0, 2.0, -1.0)? / (1.0 - (-1.0f64).exp()) - 1.0).abs());
        // e·erfc(1)
        worst = worst.max((ml(0.5, 1.0, -1.0)? / 0.427_583_576_155_807 - 1.0).abs());
        Ok(worst)
    }));

    let cases: Vec<[f64; 4]> = (0..draws)
        .map(|_| {
            [rng.gen_range(0.1..=1.0), rng.gen_range(0.2..3.0), -rng.gen_range(0.0..100.0), rng.gen_range(0.01..2.0)]
        })
        .collect();
    out.push(run_check("integration identity", 1e-6, || {
        let mut worst = 0.0f64;
        for [rho, beta, lambda, t] in &cases {
            let (lhs, rhs) = ml_integral_identity_check(*rho, *beta, *lambda, *t, &rule)?;
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
        Ok(worst)
    }));
    out.push(run_check("decay integral identity", 1e-6, || {
        let mut worst = 0.0f64;
        for [rho, _, lambda, t] in &cases {
            let (lhs, rhs) = decay_integral_check(*rho, -*lambda * 10.0 + 0.01, *t, &rule)?;
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
        Ok(worst)
    }));

    out.push(run_check("double integral identity", 1e-6, || {
        let brute = rule.with_tolerance(1e-9);
        let samples = (0..=100).map(|i| 1.0 + 0.5 * (i as f64 * 0.07).sin()).collect();
        let mut profiles = vec![
            (0.7, 10.0, TimeProfile64::linear(1.0, -1.0, 1.0)?),
            (0.4, 50.0, TimeProfile64::cosine(1.0, 2.0, 0.0, 1.0)?),
            (1.0, 5.0, TimeProfile64::exp_decay(1.0, 1.0, 1.0)?),
        ];
        if !quick {
            profiles.push((0.5, 3.0, TimeProfile64::sampled(samples, 1.0)?));
            profiles.push((0.2, 200.0, TimeProfile64::linear(2.0, -3.0, 1.0)?));
        }
        let mut worst = 0.0f64;
        for (rho, lambda, g) in &profiles {
            let (lhs, rhs) = double_integral_identity_check(*rho, *lambda, g, 1.0, &brute)?;
            let scale = g.sup_norm() * source_kernel_second_integral(*rho, *lambda, 1.0)?;
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        Ok(worst)
    }));

    out.push(match kernel_band(&rule) {
        Ok((ratio, k0)) => Check {
            name: "scaled kernel band",
            passed: ratio <= 50.0 && k0 <= 20,
            detail: format!("worst band ratio {ratio:.3}, worst k0 {k0}"),
        },
        Err(e) => failed("scaled kernel band", e),
    });

    out.push(run_check("spectral roundtrip", 1e-10, || {
        let op = SpectralOperator64::dirichlet_laplacian_1d(1.0, 16)?;
        let g = TimeProfile64::exp_decay(1.0, 1.0, 1.0)?.declare_sign_constant(true)?;
        let mut worst = 0.0f64;
        for rho in [0.5, 1.0] {
            let phi = SpectralVector64::new(op.eigenvalues().iter().map(|l| rng.gen_range(-1.0..1.0) / l).collect())?;
            let f = SpectralVector64::new(op.eigenvalues().iter().map(|l| rng.gen_range(-1.0..1.0) / l).collect())?;
            let fp = ForwardProblem64::new(rho, 1.0, op.clone(), phi.clone(), f.clone(), g.clone())?;
            let psi = integrate_trajectory(&fp)?;
            let ip = InverseProblem64::new(rho, 1.0, op.clone(), phi, psi, g.clone())?;
            let part = partition_modes(&ip, subdiff_core::inverse::DEFAULT_EPS_B)?;
            let sol = solve_inverse(&ip, &part, None, None)?;
            let rec = sol.f.ok_or(subdiff_core::Error::Missing("recovered source"))?;
            worst = worst.max(rec.relative_error(&f)?);
        }
        Ok(worst)
    }));

    if !quick {
        out.push(match residual_order() {
            Ok(q) => Check {
                name: "caputo residual order",
                passed: (q - 1.5).abs() <= 0.2,
                detail: format!("observed {q:.3}, expected 1.5 ± 0.2"),
            },
            Err(e) => failed("caputo residual order", e),
        });
    }
    out
}

fn kernel_band(rule: &QuadratureRule64) -> subdiff_core::Result<(f64, usize)> {
    let eigs: Vec<f64> = (1..=200).map(|k| (k as f64 * PI).powi(2)).collect();
    let g = TimeProfile64::constant(1.0, 1.0)?;
    let mut worst = (0.0f64, 0usize);
    for rho in [0.3, 0.7, 1.0] {
        let b = bound_profile(rho, &eigs, &g, 1.0, rule, 50.0, 20)?;
        let k0 = b.k0.unwrap_or(usize::MAX);
        worst = (worst.0.max(b.band_ratio), worst.1.max(k0));
    }
    Ok(worst)
}

/// L1 residual order of the free decay of one mode at ρ = 1/2.
fn residual_order() -> subdiff_core::Result<f64> {
    let op = SpectralOperator64::explicit(vec![1.0], "single")?;
    let one = SpectralVector64::new(vec![1.0])?;
    let p = ForwardProblem64::new(0.5, 1.0, op, one, SpectralVector64::zeros(1), TimeProfile64::constant(0.0, 1.0)?)?;
    let r1 = residual(&p, 128)?[0];
    let r2 = residual(&p, 256)?[0];
    Ok((r1 / r2).log2())
}
