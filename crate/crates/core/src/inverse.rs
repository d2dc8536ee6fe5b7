//! Recovery of the spatial source `f` from `φ`, `g` and `ψ = ∫₀ᵀ u dt`.
//!
//! Mode by mode `f_k p_{k,ρ}(T) = ψ_k - φ_k T E_{ρ,2}(-λ_k T^ρ)`. Modes whose
//! kernel `p_{k,ρ}(T)` is numerically zero form the set `B₀`; for them the
//! right-hand side must vanish (the solvability condition) and `f_k` is free.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{domain, Error, Result};
use crate::forward::{solve_forward, validate_common, ForwardProblem, TrajectorySample};
use crate::kernel::{
    bound_profile_from_values, convolve_source, decay_integral, p_k, BoundProfile, QuadratureRule, TimeProfile,
};
use crate::scalar::Scalar;
use crate::spectral::{domain_tail_diagnostic, DomainDiagnostic, SpectralOperator, SpectralVector};

/// Default relative threshold of the zero-kernel classification.
pub const DEFAULT_EPS_B: f64 = 1e-9;
/// Band ratio used by the kernel boundedness diagnostic.
pub const BOUND_BAND: f64 = 50.0;
/// Relative agreement required between the two forms of `u` in
/// [`reconstruct_u`].
const FORM_AGREEMENT: f64 = 1e-8;

/// Data of an inverse solve.
#[derive(Clone, Debug)]
pub struct InverseProblem<T> {
    pub rho: T,
    pub horizon: T,
    pub operator: SpectralOperator<T>,
    pub phi: SpectralVector<T>,
    pub psi: SpectralVector<T>,
    pub g: TimeProfile<T>,
    pub rule: QuadratureRule<T>,
}

impl<T: Scalar> InverseProblem<T> {
    pub fn new(
        rho: T,
        horizon: T,
        operator: SpectralOperator<T>,
        phi: SpectralVector<T>,
        psi: SpectralVector<T>,
        g: TimeProfile<T>,
    ) -> Result<Self> {
        validate_common(rho, horizon, &operator, &[("phi", &phi), ("psi", &psi)], &g)?;
        Ok(Self { rho, horizon, operator, phi, psi, g, rule: QuadratureRule::default() })
    }

    pub fn with_rule(mut self, rule: QuadratureRule<T>) -> Result<Self> {
        rule.validate()?;
        self.rule = rule;
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.operator.len()
    }

    /// `T E_{ρ,2}(-λ_k T^ρ)` for one-based `k`.
    pub fn decay_integral(&self, k: usize) -> Result<T> {
        decay_integral(self.rho, self.operator.eigenvalues()[k - 1], self.horizon)
    }

    /// `ψ_k - φ_k T E_{ρ,2}(-λ_k T^ρ)`.
    pub fn source_datum(&self, k: usize) -> Result<T> {
        let phi_k = self.phi.get(k);
        let free = if phi_k == T::zero() { T::zero() } else { phi_k * self.decay_integral(k)? };
        Ok(self.psi.get(k) - free)
    }

    /// `D(A)` tail diagnostic of `ψ`.
    pub fn psi_diagnostic(&self) -> Result<DomainDiagnostic<T>> {
        domain_tail_diagnostic(&self.operator, &self.psi)
    }

    /// `1e-8 (1 + ‖ψ‖)`.
    pub fn default_tol_solv(&self) -> T {
        T::lit(1e-8) * (T::one() + self.psi.norm())
    }
}

/// Split of the modes into `B_ρ` (non-zero kernel) and `B₀` (zero kernel).
#[derive(Clone, Debug, PartialEq)]
pub struct ModePartition<T> {
    /// One-based indices with `|p_k| > threshold_k`.
    pub b_rho: Vec<usize>,
    /// One-based indices with `|p_k| ≤ threshold_k`.
    pub b_zero: Vec<usize>,
    /// `p_{k,ρ}(T)` for every mode.
    pub p: Vec<T>,
    /// `eps_b T^{ρ+1} / (1 + λ_k T^ρ)` for every mode.
    pub thresholds: Vec<T>,
    pub eps_b: T,
}

impl<T: Scalar> ModePartition<T> {
    pub fn in_kernel(&self, k: usize) -> bool {
        self.b_zero.binary_search(&k).is_ok()
    }
}

/// Classifies each mode by comparing `|p_{k,ρ}(T)|` with a threshold that
/// scales like the kernel's own size `T^{ρ+1}/(1 + λ_k T^ρ)`.
pub fn partition_modes<T: Scalar>(problem: &InverseProblem<T>, eps_b: T) -> Result<ModePartition<T>> {
    if !(eps_b > T::zero()) {
        return Err(domain(format!("eps_b must be positive, got {eps_b}")));
    }
    let (rho, horizon) = (problem.rho, problem.horizon);
    let tr = horizon.powf(rho);
    let mut partition = ModePartition {
        b_rho: Vec::new(),
        b_zero: Vec::new(),
        p: Vec::with_capacity(problem.modes()),
        thresholds: Vec::with_capacity(problem.modes()),
        eps_b,
    };
    for (i, &lambda) in problem.operator.eigenvalues().iter().enumerate() {
        let p = p_k(rho, lambda, &problem.g, horizon, &problem.rule)?;
        let threshold = eps_b * tr * horizon / (T::one() + lambda * tr);
        if p.abs() > threshold {
            partition.b_rho.push(i + 1);
        } else {
            partition.b_zero.push(i + 1);
        }
        partition.p.push(p);
        partition.thresholds.push(threshold);
    }
    Ok(partition)
}

/// Which form of the solvability condition a zero-kernel mode satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// `φ_k = ψ_k = 0`.
    Orthogonality,
    /// `|ψ_k - φ_k T E_{ρ,2}(-λ_k T^ρ)| ≤ tol`.
    General,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViolationEntry<T> {
    pub k: usize,
    pub residual: T,
    pub criterion: Criterion,
}

/// Solvability residuals of the zero-kernel modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport<T> {
    pub entries: Vec<ViolationEntry<T>>,
    pub tolerance: T,
}

impl<T: Scalar> ViolationReport<T> {
    pub fn is_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.criterion != Criterion::Violated)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ViolationEntry<T>> {
        self.entries.iter().filter(|e| e.criterion == Criterion::Violated)
    }

    pub fn residual(&self, k: usize) -> Option<T> {
        self.entries.iter().find(|e| e.k == k).map(|e| e.residual)
    }
}

/// `|ψ_k - φ_k T E_{ρ,2}(-λ_k T^ρ)|` for every `k ∈ B₀`.
pub fn check_solvability<T: Scalar>(
    problem: &InverseProblem<T>,
    partition: &ModePartition<T>,
    tol_solv: T,
) -> Result<ViolationReport<T>> {
    if !(tol_solv > T::zero()) {
        return Err(domain(format!("tol_solv must be positive, got {tol_solv}")));
    }
    let entries = partition
        .b_zero
        .iter()
        .map(|&k| {
            let residual = problem.source_datum(k)?.abs();
            let criterion = if problem.phi.get(k) == T::zero() && problem.psi.get(k) == T::zero() {
                Criterion::Orthogonality
            } else if residual <= tol_solv {
                Criterion::General
            } else {
                Criterion::Violated
            };
            Ok(ViolationEntry { k, residual, criterion })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ViolationReport { entries, tolerance: tol_solv })
}

/// Result of [`solve_inverse`].
#[derive(Clone, Debug, PartialEq)]
pub struct InverseSolution<T> {
    /// Recovered source; `None` when the instance is not solvable.
    pub f: Option<SpectralVector<T>>,
    /// `B₀`, the indices whose coefficient is free.
    pub free_indices: Vec<usize>,
    /// The values used for the free coefficients.
    pub free_values: BTreeMap<usize, T>,
    pub solvable: bool,
    pub violation_report: ViolationReport<T>,
    pub partition: ModePartition<T>,
}

/// `f_k = [ψ_k - φ_k T E_{ρ,2}(-λ_k T^ρ)] / p_{k,ρ}(T)` on `B_ρ`; on `B₀`
/// the solvability condition is checked and `f_k` is taken from
/// `free_values` (default 0). `tol_solv` defaults to `1e-8 (1 + ‖ψ‖)`.
pub fn solve_inverse<T: Scalar>(
    problem: &InverseProblem<T>,
    partition: &ModePartition<T>,
    free_values: Option<&BTreeMap<usize, T>>,
    tol_solv: Option<T>,
) -> Result<InverseSolution<T>> {
    if partition.p.len() != problem.modes() {
        return Err(Error::Shape { what: "partition", expected: problem.modes(), got: partition.p.len() });
    }
    if let Some(fv) = free_values {
        if let Some(k) = fv.keys().find(|k| !partition.in_kernel(**k)) {
            return Err(Error::Usage(format!("free value given for mode {k}, which is not in the zero-kernel set")));
        }
    }
    let tol = tol_solv.unwrap_or_else(|| problem.default_tol_solv());
    let report = check_solvability(problem, partition, tol)?;
    let chosen: BTreeMap<usize, T> = partition
        .b_zero
        .iter()
        .map(|&k| (k, free_values.and_then(|fv| fv.get(&k).copied()).unwrap_or(T::zero())))
        .collect();
    let solvable = report.is_satisfied();
    let f = if solvable {
        let mut coeffs = vec![T::zero(); problem.modes()];
        for &k in &partition.b_rho {
            coeffs[k - 1] = problem.source_datum(k)? / partition.p[k - 1];
        }
        for (&k, &v) in &chosen {
            coeffs[k - 1] = v;
        }
        Some(SpectralVector::new(coeffs)?)
    } else {
        None
    };
    Ok(InverseSolution {
        f,
        free_indices: partition.b_zero.clone(),
        free_values: chosen,
        solvable,
        violation_report: report,
        partition: partition.clone(),
    })
}

/// The forward problem with the recovered source.
pub fn forward_problem<T: Scalar>(
    problem: &InverseProblem<T>,
    solution: &InverseSolution<T>,
) -> Result<ForwardProblem<T>> {
    let f = solution
        .f
        .clone()
        .ok_or_else(|| Error::Usage("inverse instance is not solvable; there is no source to use".into()))?;
    ForwardProblem::new(
        problem.rho,
        problem.horizon,
        problem.operator.clone(),
        problem.phi.clone(),
        f,
        problem.g.clone(),
    )?
    .with_rule(problem.rule)
}

/// `u(t)` with the recovered source, for every mode. On `B_ρ` the source
/// term is also formed as `[ψ_k - φ_k T E_{ρ,2}] · conv_k(t) / p_k(T)` and the
/// two forms are required to agree.
pub fn reconstruct_u<T: Scalar>(
    problem: &InverseProblem<T>,
    solution: &InverseSolution<T>,
    times: &[T],
) -> Result<Vec<TrajectorySample<T>>> {
    let fp = forward_problem(problem, solution)?;
    let samples = solve_forward(&fp, times)?;
    let f = solution.f.as_ref().expect("checked by forward_problem");
    for s in &samples {
        if s.t == T::zero() {
            continue;
        }
        for &k in &solution.partition.b_rho {
            let f_k = f.get(k);
            if f_k == T::zero() {
                continue;
            }
            let lambda = problem.operator.eigenvalues()[k - 1];
            let conv = convolve_source(problem.rho, lambda, &problem.g, s.t, &problem.rule)?;
            let ratio_form = problem.source_datum(k)? * conv / solution.partition.p[k - 1];
            let direct = f_k * conv;
            let diff = (ratio_form - direct).abs();
            if diff > T::lit(FORM_AGREEMENT) * direct.abs().max(T::min_positive_value()) {
                return Err(Error::Accuracy {
                    context: format!("source term forms disagree at mode {k}, t = {}", s.t),
                    estimate: (diff / direct.abs()).to_f64_lossy(),
                });
            }
        }
    }
    Ok(samples)
}

/// `k,f_k,in_kernel,solvability_residual`; `f_k` is empty when unsolvable and
/// the residual is empty outside `B₀`.
pub fn write_solution_csv<T: Scalar, W: Write>(solution: &InverseSolution<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "f_k", "in_kernel", "solvability_residual"])?;
    for k in 1..=solution.partition.p.len() {
        let f_k = solution.f.as_ref().map(|f| f.get(k).to_csv()).unwrap_or_default();
        let in_kernel = solution.partition.in_kernel(k);
        let residual = solution.violation_report.residual(k).map(|r| r.to_csv()).unwrap_or_default();
        w.write_record([k.to_string(), f_k, in_kernel.to_string(), residual])?;
    }
    w.flush()?;
    Ok(())
}

/// Kernel boundedness statistics of a partition (`λ_k |p_k|`).
pub fn partition_bound_profile<T: Scalar>(
    problem: &InverseProblem<T>,
    partition: &ModePartition<T>,
) -> Result<BoundProfile<T>> {
    bound_profile_from_values(problem.operator.eigenvalues(), partition.p.clone(), T::lit(BOUND_BAND), 20)
}

/// Human-readable report of the partition, thresholds, kernel statistics and
/// solvability outcome.
pub fn diagnostics_report<T: Scalar>(problem: &InverseProblem<T>, solution: &InverseSolution<T>) -> Result<String> {
    let partition = &solution.partition;
    let bound = partition_bound_profile(problem, partition)?;
    let psi_diag = problem.psi_diagnostic()?;
    let mut s = String::new();
    let _ = writeln!(s, "operator = {}", problem.operator.label());
    let _ = writeln!(s, "modes = {}", problem.modes());
    let _ = writeln!(s, "rho = {}", problem.rho.to_csv());
    let _ = writeln!(s, "T = {}", problem.horizon.to_csv());
    let _ = writeln!(s, "g = {}", problem.g.name());
    let _ = writeln!(s, "eps_b = {}", partition.eps_b.to_csv());
    let _ =
        writeln!(s, "threshold_min = {}", partition.thresholds.iter().copied().fold(T::infinity(), T::min).to_csv());
    let _ = writeln!(s, "threshold_max = {}", partition.thresholds.iter().copied().fold(T::zero(), T::max).to_csv());
    let _ = writeln!(s, "b_rho_size = {}", partition.b_rho.len());
    let _ = writeln!(s, "b_zero = {:?}", partition.b_zero);
    let (lo, hi) = bound.min_max_tail();
    match bound.k0 {
        Some(k0) => {
            let _ = writeln!(s, "kernel_bound_k0 = {k0}");
            let _ = writeln!(s, "kernel_bound_min = {}", lo.to_csv());
            let _ = writeln!(s, "kernel_bound_max = {}", hi.to_csv());
            let _ = writeln!(s, "kernel_bound_band_ratio = {}", bound.band_ratio.to_csv());
            let _ = writeln!(s, "kernel_bound_drift = {}", bound.drift.to_csv());
        }
        None => {
            let _ = writeln!(s, "kernel_bound_k0 = none");
        }
    }
    let _ = writeln!(s, "psi_tail_ratio = {}", psi_diag.tail_ratio.to_csv());
    if !psi_diag.resolved {
        let _ = writeln!(s, "warning: psi coefficients do not decay like an element of D(A)");
    }
    let high: Vec<usize> = partition.b_zero.iter().copied().filter(|&k| 2 * k > problem.modes()).collect();
    if !high.is_empty() {
        let _ = writeln!(s, "warning: high modes in zero-kernel set: {high:?}");
    }
    let _ = writeln!(s, "tol_solv = {}", solution.violation_report.tolerance.to_csv());
    for e in &solution.violation_report.entries {
        let _ = writeln!(s, "solvability k={} residual={} criterion={:?}", e.k, e.residual.to_csv(), e.criterion);
    }
    let _ = writeln!(s, "solvable = {}", solution.solvable);
    Ok(s)
}
