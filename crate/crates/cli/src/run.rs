//! Execution of forward, inverse and roundtrip configs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use subdiff_core::forward::{attach_field, write_field_csv, write_trajectory_csv};
use subdiff_core::inverse::{diagnostics_report, write_solution_csv, DEFAULT_EPS_B};
use subdiff_core::spectral::domain_tail_diagnostic;
use subdiff_core::{
    integrate_trajectory, integrate_trajectory_by_quadrature, partition_modes, reconstruct_u, residual, solve_forward,
    solve_inverse, ForwardProblem64, InverseProblem64, InverseSolution64, Scalar as _, SpectralVector64,
};

use crate::config::{Mode, PsiPath, RunConfig};
use crate::CliError;

/// Files written by a successful run and the headline numbers.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Vec<(String, String)>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        self.files.push(path);
        Ok(())
    }

    fn csv<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> subdiff_core::Result<()>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }
}

/// Runs `config` in `mode`, writing into `out_dir`. Any failure after the
/// directory exists leaves a `diagnostics.txt` with `status = error`.
pub fn run(config: &RunConfig, mode: Mode, out_dir: &Path) -> Result<RunOutcome, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io { path: out_dir.to_path_buf(), source: e })?;
    let mut w = Writer { dir: out_dir.to_path_buf(), files: Vec::new() };
    let result = match mode {
        Mode::Forward => run_forward(config, &mut w),
        Mode::Inverse => run_inverse(config, &mut w),
        Mode::Roundtrip => run_roundtrip(config, &mut w),
    };
    match result {
        Ok(summary) => Ok(RunOutcome { out_dir: out_dir.to_path_buf(), files: w.files, summary }),
        Err(e) => {
            if !matches!(e, CliError::Unsolvable(_)) {
                let text =
                    format!("mode = {}\nstatus = error\nexit_code = {}\nerror = {e}\n", mode.name(), e.exit_code());
                let _ = fs::write(out_dir.join("diagnostics.txt"), text);
            }
            Err(e)
        }
    }
}

fn setup_err(e: CliError) -> CliError {
    match e {
        CliError::Core(inner) => CliError::Config(inner.to_string()),
        other => other,
    }
}

fn forward_problem(config: &RunConfig, f: SpectralVector64) -> Result<ForwardProblem64, CliError> {
    let build = || -> Result<ForwardProblem64, CliError> {
        let rule = config.rule()?;
        let op = config.operator()?;
        let g = config.profile(&op, &rule)?;
        let phi = config.vector("phi", &op)?.expect("phi defaults to zero");
        Ok(ForwardProblem64::new(config.rho, config.horizon, op, phi, f, g)?.with_rule(rule)?)
    };
    build().map_err(setup_err)
}

fn header(config: &RunConfig, mode: Mode, op_label: &str, g_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode = {}", mode.name());
    let _ = writeln!(s, "operator = {op_label}");
    let _ = writeln!(s, "modes = {}", config.modes);
    let _ = writeln!(s, "rho = {}", config.rho.to_csv());
    let _ = writeln!(s, "T = {}", config.horizon.to_csv());
    let _ = writeln!(s, "g = {g_name}");
    s
}

fn run_forward(config: &RunConfig, w: &mut Writer) -> Result<Vec<(String, String)>, CliError> {
    let f = {
        let op = config.operator().map_err(setup_err)?;
        config.vector("f", &op).map_err(setup_err)?.expect("checked by validate")
    };
    let problem = forward_problem(config, f)?;
    let mut samples = solve_forward(&problem, &config.times())?;
    w.csv("trajectory.csv", |b| write_trajectory_csv(&samples, b))?;
    if config.output.field_points > 0 {
        let (lo, hi) = problem.operator.eigenfunctions().expect("checked by validate").domain();
        let n = config.output.field_points.max(2) - 1;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        attach_field(&problem.operator, &mut samples, &xs)?;
        w.csv("field.csv", |b| write_field_csv(&samples, b))?;
    }
    let psi = integrate_trajectory(&problem)?;
    w.csv("psi.csv", |b| psi.write_csv(b))?;

    let mut report = header(config, Mode::Forward, problem.operator.label(), problem.g.name());
    let _ = writeln!(report, "psi_norm = {}", psi.norm().to_csv());
    let _ = writeln!(
        report,
        "phi_tail_ratio = {}",
        domain_tail_diagnostic(&problem.operator, &problem.phi)?.tail_ratio.to_csv()
    );
    let mut summary = vec![("psi_norm".to_string(), psi.norm().to_csv())];
    if let Some(grid) = config.output.residual_grid {
        let tr = config.horizon.powf(config.rho);
        let res = residual(&problem, grid)?;
        let worst = res
            .iter()
            .zip(problem.operator.eigenvalues())
            .filter(|(_, l)| **l * tr <= 100.0)
            .map(|(r, _)| *r)
            .fold(0.0, f64::max);
        let _ = writeln!(report, "residual_grid = {grid}");
        let _ = writeln!(report, "residual_max = {}", worst.to_csv());
        summary.push(("residual_max".into(), worst.to_csv()));
    }
    let _ = writeln!(report, "status = ok");
    w.write("diagnostics.txt", report.as_bytes())?;
    Ok(summary)
}

fn solve(config: &RunConfig, problem: &InverseProblem64) -> Result<InverseSolution64, CliError> {
    let eps_b = config.inverse.eps_b.unwrap_or(DEFAULT_EPS_B);
    let partition = partition_modes(problem, eps_b)?;
    let free = config.free_values()?;
    let free = if free.is_empty() { None } else { Some(&free) };
    Ok(solve_inverse(problem, &partition, free, config.inverse.tol_solv)?)
}

fn unsolvable(solution: &InverseSolution64) -> CliError {
    let list: Vec<String> =
        solution.violation_report.violations().map(|v| format!("k={} residual={}", v.k, v.residual)).collect();
    CliError::Unsolvable(list.join(", "))
}

fn inverse_report(mode: Mode, problem: &InverseProblem64, solution: &InverseSolution64) -> Result<String, CliError> {
    let mut report = format!("mode = {}\n", mode.name());
    report.push_str(&diagnostics_report(problem, solution)?);
    Ok(report)
}

fn run_inverse(config: &RunConfig, w: &mut Writer) -> Result<Vec<(String, String)>, CliError> {
    let problem = {
        let fp = forward_problem(config, SpectralVector64::zeros(config.modes))?;
        let psi = config.vector("psi", &fp.operator).map_err(setup_err)?.expect("checked by validate");
        InverseProblem64::new(fp.rho, fp.horizon, fp.operator, fp.phi, psi, fp.g)
            .and_then(|p| p.with_rule(fp.rule))
            .map_err(|e| setup_err(e.into()))?
    };
    let solution = solve(config, &problem)?;
    w.csv("f.csv", |b| write_solution_csv(&solution, b))?;
    let mut report = inverse_report(Mode::Inverse, &problem, &solution)?;
    if !solution.solvable {
        let _ = writeln!(report, "status = unsolvable");
        w.write("diagnostics.txt", report.as_bytes())?;
        return Err(unsolvable(&solution));
    }
    if config.output.trajectory {
        let samples = reconstruct_u(&problem, &solution, &config.times())?;
        w.csv("trajectory.csv", |b| write_trajectory_csv(&samples, b))?;
    }
    let _ = writeln!(report, "status = ok");
    w.write("diagnostics.txt", report.as_bytes())?;
    let f = solution.f.as_ref().expect("solvable");
    Ok(vec![("f_norm".into(), f.norm().to_csv()), ("b_zero".into(), format!("{:?}", solution.free_indices))])
}

fn run_roundtrip(config: &RunConfig, w: &mut Writer) -> Result<Vec<(String, String)>, CliError> {
    let f_true = {
        let op = config.operator().map_err(setup_err)?;
        config.vector("f", &op).map_err(setup_err)?.expect("checked by validate")
    };
    let fp = forward_problem(config, f_true.clone())?;
    let path = config.output.psi_path.unwrap_or_default();
    let psi = match path {
        PsiPath::Spectral => integrate_trajectory(&fp)?,
        PsiPath::Quadrature => integrate_trajectory_by_quadrature(&fp, &fp.rule)?,
    };
    let problem =
        InverseProblem64::new(fp.rho, fp.horizon, fp.operator, fp.phi, psi.clone(), fp.g)?.with_rule(fp.rule)?;
    let solution = solve(config, &problem)?;
    w.csv("f_true.csv", |b| f_true.write_csv(b))?;
    w.csv("psi.csv", |b| psi.write_csv(b))?;
    w.csv("f.csv", |b| write_solution_csv(&solution, b))?;
    let mut report = inverse_report(Mode::Roundtrip, &problem, &solution)?;
    if !solution.solvable {
        let _ = writeln!(report, "status = unsolvable");
        w.write("diagnostics.txt", report.as_bytes())?;
        return Err(unsolvable(&solution));
    }
    let _ = writeln!(report, "status = ok");
    w.write("diagnostics.txt", report.as_bytes())?;

    let f = solution.f.as_ref().expect("solvable");
    let diff = f.sub(&f_true)?;
    let rel = if f_true.is_zero() { diff.norm() } else { diff.norm() / f_true.norm() };
    let max_abs = diff.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let psi_name = match path {
        PsiPath::Spectral => "spectral",
        PsiPath::Quadrature => "quadrature",
    };
    let mut recovery = String::new();
    let _ = writeln!(recovery, "psi_path = {psi_name}");
    let _ = writeln!(recovery, "modes = {}", config.modes);
    let _ = writeln!(recovery, "f_true_norm = {}", f_true.norm().to_csv());
    let _ = writeln!(recovery, "recovery_max_abs_error = {}", max_abs.to_csv());
    let _ = writeln!(recovery, "recovery_rel_error = {}", rel.to_csv());
    w.write("recovery.txt", recovery.as_bytes())?;
    Ok(vec![("recovery_rel_error".into(), rel.to_csv()), ("psi_path".into(), psi_name.into())])
}
