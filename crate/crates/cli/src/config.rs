//! TOML run configuration.
//!
//! ```toml
//! rho = 0.5
//! T = 1.0
//! K = 32
//! seed = 7
//!
//! [operator]
//! kind = "dirichlet_1d"
//! length = 1.0
//!
//! [g]
//! kind = "exp_decay"
//! a = 1.0
//! b = 1.0
//! sign_constant = true
//!
//! [phi]
//! function = "parabola"
//!
//! [f]
//! random = true
//! decay = 2.0
//! ```
//!
//! Relative file paths are resolved against the directory of the config
//! file.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use subdiff_core::spectral::project;
use subdiff_core::{QuadratureRule64, SpectralOperator64, SpectralVector64, TimeProfile64};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Forward,
    Inverse,
    Roundtrip,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Forward => "forward",
            Mode::Inverse => "inverse",
            Mode::Roundtrip => "roundtrip",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must match the subcommand when given.
    pub mode: Option<Mode>,
    pub rho: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "K")]
    pub modes: usize,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub operator: OperatorSpec,
    pub g: ProfileSpec,
    pub phi: Option<VectorSpec>,
    pub f: Option<VectorSpec>,
    pub psi: Option<VectorSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub inverse: InverseSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum OperatorSpec {
    #[serde(rename = "dirichlet_1d")]
    Dirichlet1d { length: f64 },
    #[serde(rename = "explicit")]
    Explicit { eigenvalues: Option<Vec<f64>>, file: Option<PathBuf> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Const,
    Linear,
    ExpDecay,
    Cosine,
    AffineExp,
    Samples,
}

/// Source time profile. Parameters: `const` (value), `linear` (a, b),
/// `exp_decay` (a, b), `cosine` (a, omega, phase), `affine_exp` (beta or
/// null_mode), `samples` (values or file).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub value: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub omega: Option<f64>,
    pub phase: Option<f64>,
    pub beta: Option<f64>,
    /// For `affine_exp`: choose β so that this mode's kernel vanishes.
    pub null_mode: Option<usize>,
    pub values: Option<Vec<f64>>,
    pub file: Option<PathBuf>,
    pub sign_constant: Option<bool>,
}

/// Exactly one of `coeffs`, `file`, `function`, `random`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub coeffs: Option<Vec<f64>>,
    pub file: Option<PathBuf>,
    /// Value column of `file`; defaults to `coeff`, then `f_k`.
    pub column: Option<String>,
    /// `zero`, or a function on the operator's domain to project:
    /// `parabola`, `bump`, `sine`, `gaussian`.
    pub function: Option<String>,
    pub quad_nodes: Option<usize>,
    /// `λ_k^{-decay} U(-1, 1)` draws; needs `seed`.
    pub random: Option<bool>,
    pub decay: Option<f64>,
    pub scale: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub panels: Option<usize>,
    pub nodes_per_panel: Option<usize>,
    pub grading_exponent: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_doublings: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSpec {
    pub eps_b: Option<f64>,
    pub tol_solv: Option<f64>,
    /// Mode index (as a string key) to value.
    #[serde(default)]
    pub free_values: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiPath {
    #[default]
    Spectral,
    Quadrature,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub times: Option<Vec<f64>>,
    pub time_points: Option<usize>,
    /// Spatial points of `field.csv` (needs eigenfunctions); 0 disables it.
    #[serde(default)]
    pub field_points: usize,
    /// Grid of the Caputo residual check in forward mode; off when absent.
    pub residual_grid: Option<usize>,
    /// Write the reconstructed trajectory in inverse mode.
    #[serde(default)]
    pub trajectory: bool,
    /// How roundtrip mode manufactures ψ.
    pub psi_path: Option<PsiPath>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Reads and validates a config for `mode`.
pub fn parse_config(path: &Path, mode: Mode) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let mut config = parse_str(&text, mode).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(config)
}

/// [`parse_config`] on a string; relative paths resolve against the working
/// directory.
pub fn parse_str(text: &str, mode: Mode) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string().trim_end().to_string()))?;
    config.validate(mode)?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(bad(format!("config declares mode = \"{}\" but was run as {}", m.name(), mode.name())));
            }
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(bad(format!("rho out of (0,1]: {}", self.rho)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(bad(format!("T must be positive and finite: {}", self.horizon)));
        }
        if self.modes == 0 {
            return Err(bad("K must be at least 1"));
        }
        match &self.operator {
            OperatorSpec::Dirichlet1d { length } => {
                if !(*length > 0.0 && length.is_finite()) {
                    return Err(bad(format!("operator.length must be positive: {length}")));
                }
            }
            OperatorSpec::Explicit { eigenvalues, file } => match (eigenvalues, file) {
                (Some(e), None) => {
                    if e.len() != self.modes {
                        return Err(bad(format!("operator.eigenvalues has {} entries, K = {}", e.len(), self.modes)));
                    }
                }
                (None, Some(_)) => {}
                _ => return Err(bad("explicit operator needs exactly one of operator.eigenvalues, operator.file")),
            },
        }
        self.validate_profile()?;

        let (needs, forbids) = match mode {
            Mode::Forward | Mode::Roundtrip => ("f", "psi"),
            Mode::Inverse => ("psi", "f"),
        };
        let field = |name: &str| match name {
            "f" => self.f.as_ref(),
            _ => self.psi.as_ref(),
        };
        if field(needs).is_none() {
            return Err(bad(format!("{} mode needs field `{needs}`", mode.name())));
        }
        if field(forbids).is_some() {
            return Err(bad(format!("field `{forbids}` is not used by {} mode", mode.name())));
        }
        for (name, spec) in [("phi", &self.phi), ("f", &self.f), ("psi", &self.psi)] {
            if let Some(spec) = spec {
                self.validate_vector(name, spec)?;
            }
        }

        if let Some(eps) = self.inverse.eps_b {
            if eps.is_nan() || eps <= 0.0 {
                return Err(bad(format!("inverse.eps_b must be positive: {eps}")));
            }
        }
        if let Some(tol) = self.inverse.tol_solv {
            if tol.is_nan() || tol <= 0.0 {
                return Err(bad(format!("inverse.tol_solv must be positive: {tol}")));
            }
        }
        self.free_values()?;
        if mode == Mode::Forward
            && (self.inverse.eps_b.is_some() || self.inverse.tol_solv.is_some() || !self.inverse.free_values.is_empty())
        {
            return Err(bad("section `inverse` is not used by forward mode"));
        }
        if self.output.psi_path.is_some() && mode != Mode::Roundtrip {
            return Err(bad("output.psi_path is only used by roundtrip mode"));
        }
        if let Some(times) = &self.output.times {
            if self.output.time_points.is_some() {
                return Err(bad("give at most one of output.times, output.time_points"));
            }
            if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && **t <= self.horizon)) {
                return Err(bad(format!("output.times entry {t} outside [0, T]")));
            }
        }
        if let Some(n) = self.output.time_points {
            if n < 2 {
                return Err(bad("output.time_points must be at least 2"));
            }
        }
        if let Some(n) = self.output.residual_grid {
            if n < 16 {
                return Err(bad("output.residual_grid must be at least 16"));
            }
        }
        if self.output.field_points > 0 && !matches!(self.operator, OperatorSpec::Dirichlet1d { .. }) {
            return Err(bad("output.field_points needs an operator with eigenfunctions (dirichlet_1d)"));
        }
        self.rule()?;
        Ok(())
    }

    fn validate_profile(&self) -> Result<(), CliError> {
        let g = &self.g;
        let allowed: &[&str] = match g.kind {
            ProfileKind::Const => &["value"],
            ProfileKind::Linear => &["a", "b"],
            ProfileKind::ExpDecay => &["a", "b"],
            ProfileKind::Cosine => &["a", "omega", "phase"],
            ProfileKind::AffineExp => &["beta", "null_mode"],
            ProfileKind::Samples => &["values", "file"],
        };
        let present = [
            ("value", g.value.is_some()),
            ("a", g.a.is_some()),
            ("b", g.b.is_some()),
            ("omega", g.omega.is_some()),
            ("phase", g.phase.is_some()),
            ("beta", g.beta.is_some()),
            ("null_mode", g.null_mode.is_some()),
            ("values", g.values.is_some()),
            ("file", g.file.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(bad(format!("g.{name} is not a parameter of g.kind = {:?}", g.kind)));
            }
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| bad(format!("g.{name} is required for g.kind = {:?}", g.kind)))
        };
        match g.kind {
            ProfileKind::Const | ProfileKind::ExpDecay => {}
            ProfileKind::Linear => {
                need("a", g.a)?;
                need("b", g.b)?;
            }
            ProfileKind::Cosine => {
                need("omega", g.omega)?;
            }
            ProfileKind::AffineExp => match (g.beta, g.null_mode) {
                (Some(_), None) => {}
                (None, Some(k)) if k >= 1 && k <= self.modes => {}
                (None, Some(k)) => return Err(bad(format!("g.null_mode = {k} outside 1..={}", self.modes))),
                _ => return Err(bad("affine_exp needs exactly one of g.beta, g.null_mode")),
            },
            ProfileKind::Samples => match (&g.values, &g.file) {
                (Some(v), None) if v.len() >= 2 => {}
                (Some(_), None) => return Err(bad("g.values needs at least 2 samples")),
                (None, Some(_)) => {}
                _ => return Err(bad("samples profile needs exactly one of g.values, g.file")),
            },
        }
        for (name, v) in
            [("value", g.value), ("a", g.a), ("b", g.b), ("omega", g.omega), ("phase", g.phase), ("beta", g.beta)]
        {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(bad(format!("g.{name} must be finite")));
                }
            }
        }
        Ok(())
    }

    fn validate_vector(&self, name: &str, spec: &VectorSpec) -> Result<(), CliError> {
        let sources = [spec.coeffs.is_some(), spec.file.is_some(), spec.function.is_some(), spec.random == Some(true)];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(bad(format!("{name} needs exactly one of coeffs, file, function, random = true")));
        }
        if let Some(c) = &spec.coeffs {
            if c.len() != self.modes {
                return Err(bad(format!("{name}.coeffs has {} entries, K = {}", c.len(), self.modes)));
            }
        }
        if spec.column.is_some() && spec.file.is_none() {
            return Err(bad(format!("{name}.column only applies to {name}.file")));
        }
        if let Some(f) = &spec.function {
            if !FUNCTIONS.contains(&f.as_str()) {
                return Err(bad(format!("{name}.function = {f:?} is not one of {FUNCTIONS:?}")));
            }
            if f != "zero" && !matches!(self.operator, OperatorSpec::Dirichlet1d { .. }) {
                return Err(bad(format!("{name}.function needs an operator with eigenfunctions (dirichlet_1d)")));
            }
        } else if spec.quad_nodes.is_some() {
            return Err(bad(format!("{name}.quad_nodes only applies to {name}.function")));
        }
        if spec.random == Some(true) {
            if self.seed.is_none() {
                return Err(bad(format!("{name}.random needs a top-level `seed`")));
            }
        } else if spec.decay.is_some() {
            return Err(bad(format!("{name}.decay only applies to {name}.random")));
        }
        if let Some(s) = spec.scale {
            if !s.is_finite() {
                return Err(bad(format!("{name}.scale must be finite")));
            }
        }
        Ok(())
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn rule(&self) -> Result<QuadratureRule64, CliError> {
        let q = &self.quadrature;
        let mut rule = QuadratureRule64::default();
        rule.panels = q.panels.unwrap_or(rule.panels);
        rule.nodes_per_panel = q.nodes_per_panel.unwrap_or(rule.nodes_per_panel);
        rule.grading_exponent = q.grading_exponent.or(rule.grading_exponent);
        rule.tolerance = q.tolerance.unwrap_or(rule.tolerance);
        rule.max_doublings = q.max_doublings.unwrap_or(rule.max_doublings);
        rule.validate().map_err(|e| bad(format!("quadrature: {e}")))?;
        Ok(rule)
    }

    /// Parsed `inverse.free_values`.
    pub fn free_values(&self) -> Result<BTreeMap<usize, f64>, CliError> {
        self.inverse
            .free_values
            .iter()
            .map(|(k, v)| match k.parse::<usize>() {
                Ok(i) if i >= 1 && i <= self.modes => Ok((i, *v)),
                _ => Err(bad(format!("inverse.free_values key {k:?} is not a mode index in 1..={}", self.modes))),
            })
            .collect()
    }

    pub fn operator(&self) -> Result<SpectralOperator64, CliError> {
        let op = match &self.operator {
            OperatorSpec::Dirichlet1d { length } => SpectralOperator64::dirichlet_laplacian_1d(*length, self.modes)?,
            OperatorSpec::Explicit { eigenvalues: Some(e), .. } => SpectralOperator64::explicit(e.clone(), "explicit")?,
            OperatorSpec::Explicit { file: Some(path), .. } => {
                let path = self.resolve(path);
                let file = fs::File::open(&path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
                let op = SpectralOperator64::read_csv(BufReader::new(file))?;
                if op.len() != self.modes {
                    return Err(bad(format!("{} holds {} eigenvalues, K = {}", path.display(), op.len(), self.modes)));
                }
                op
            }
            OperatorSpec::Explicit { .. } => unreachable!("checked by validate"),
        };
        Ok(op)
    }

    /// The source profile; `affine_exp` with `null_mode` needs the operator
    /// and rule to place the zero.
    pub fn profile(&self, op: &SpectralOperator64, rule: &QuadratureRule64) -> Result<TimeProfile64, CliError> {
        let g = &self.g;
        let t = self.horizon;
        let profile = match g.kind {
            ProfileKind::Const => TimeProfile64::constant(g.value.unwrap_or(1.0), t)?,
            ProfileKind::Linear => TimeProfile64::linear(g.a.unwrap(), g.b.unwrap(), t)?,
            ProfileKind::ExpDecay => TimeProfile64::exp_decay(g.a.unwrap_or(1.0), g.b.unwrap_or(1.0), t)?,
            ProfileKind::Cosine => {
                TimeProfile64::cosine(g.a.unwrap_or(1.0), g.omega.unwrap(), g.phase.unwrap_or(0.0), t)?
            }
            ProfileKind::AffineExp => {
                let beta = match (g.beta, g.null_mode) {
                    (Some(b), _) => b,
                    (None, Some(k)) => null_beta(self.rho, op.eigenvalues()[k - 1], t, rule)?,
                    _ => unreachable!("checked by validate"),
                };
                TimeProfile64::affine_exp(beta, t)?
            }
            ProfileKind::Samples => {
                let values = match (&g.values, &g.file) {
                    (Some(v), _) => v.clone(),
                    (None, Some(path)) => read_samples(&self.resolve(path))?,
                    _ => unreachable!("checked by validate"),
                };
                TimeProfile64::sampled(values, t)?
            }
        };
        match g.sign_constant {
            Some(flag) => profile.declare_sign_constant(flag).map_err(|e| bad(format!("g: {e}"))),
            None => Ok(profile),
        }
    }

    /// Builds one of `phi`, `f`, `psi`; an absent `phi` is zero.
    pub fn vector(&self, name: &str, op: &SpectralOperator64) -> Result<Option<SpectralVector64>, CliError> {
        let spec = match name {
            "phi" => &self.phi,
            "f" => &self.f,
            "psi" => &self.psi,
            _ => return Err(bad(format!("unknown vector field {name}"))),
        };
        let Some(spec) = spec else {
            return Ok(if name == "phi" { Some(SpectralVector64::zeros(self.modes)) } else { None });
        };
        let v = if let Some(c) = &spec.coeffs {
            SpectralVector64::new(c.clone())?
        } else if let Some(path) = &spec.file {
            let v = read_vector(&self.resolve(path), spec.column.as_deref())?;
            if v.len() != self.modes {
                return Err(bad(format!("{} holds {} coefficients, K = {}", path.display(), v.len(), self.modes)));
            }
            v
        } else if let Some(function) = &spec.function {
            project_named(function, op, spec.quad_nodes.unwrap_or(8 * self.modes.max(64)))?
        } else {
            // Separate, reproducible streams per field.
            let stream = match name {
                "phi" => 1,
                "f" => 2,
                _ => 3,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed.expect("checked by validate"));
            rng.set_stream(stream);
            let decay = spec.decay.unwrap_or(2.0);
            let coeffs = op.eigenvalues().iter().map(|l| l.powf(-decay) * rng.gen_range(-1.0..1.0)).collect();
            SpectralVector64::new(coeffs)?
        };
        Ok(Some(match spec.scale {
            Some(s) => v.scaled(s),
            None => v,
        }))
    }

    /// Uniform or listed trajectory times.
    pub fn times(&self) -> Vec<f64> {
        match &self.output.times {
            Some(t) => t.clone(),
            None => subdiff_core::forward::uniform_times(
                self.horizon,
                self.output.time_points.unwrap_or(subdiff_core::forward::DEFAULT_TIME_POINTS),
            ),
        }
    }
}

const FUNCTIONS: &[&str] = &["zero", "parabola", "bump", "sine", "gaussian"];

fn project_named(name: &str, op: &SpectralOperator64, nodes: usize) -> Result<SpectralVector64, CliError> {
    if name == "zero" {
        return Ok(SpectralVector64::zeros(op.len()));
    }
    let (lo, hi) = op.eigenfunctions().map(|e| e.domain()).ok_or_else(|| bad("operator has no eigenfunctions"))?;
    let len = hi - lo;
    let h: Box<dyn Fn(f64) -> f64> = match name {
        "parabola" => Box::new(move |x| (x - lo) * (hi - x) / (len * len)),
        "bump" => Box::new(move |x| {
            let s = (x - lo) * (hi - x) / (len * len);
            16.0 * s * s
        }),
        "sine" => Box::new(move |x| (std::f64::consts::PI * (x - lo) / len).sin()),
        "gaussian" => Box::new(move |x| {
            let s = (x - 0.5 * (lo + hi)) / (0.1 * len);
            (-s * s).exp()
        }),
        _ => unreachable!("checked by validate"),
    };
    Ok(project(op, h, nodes)?)
}

/// β with `p_k(T) = 0` for `g = 1 + β eᵗ` (the kernel is affine in β).
pub fn null_beta(rho: f64, lambda: f64, horizon: f64, rule: &QuadratureRule64) -> Result<f64, CliError> {
    let one = TimeProfile64::constant(1.0, horizon)?;
    let exp = TimeProfile64::closed_form_with_derivative("exp", horizon, f64::exp, f64::exp)?;
    let p1 = subdiff_core::p_k(rho, lambda, &one, horizon, rule)?;
    let pe = subdiff_core::p_k(rho, lambda, &exp, horizon, rule)?;
    Ok(-p1 / pe)
}

/// One value per row (last column), optional header.
fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && i == 0 => {}
            Err(_) => return Err(bad(format!("{}:{}: not a number: {field:?}", path.display(), i + 1))),
        }
    }
    if out.len() < 2 {
        return Err(bad(format!("{}: need at least 2 samples", path.display())));
    }
    Ok(out)
}

/// A `k,<column>` table, rows in mode order.
pub fn read_vector(path: &Path, column: Option<&str>) -> Result<SpectralVector64, CliError> {
    let io = |e: csv::Error| bad(format!("{}: {e}", path.display()));
    let mut reader =
        csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
            other => bad(format!("{}: {other:?}", path.display())),
        })?;
    let headers = reader.headers().map_err(io)?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let k_col = find("k").ok_or_else(|| bad(format!("{}: no `k` column", path.display())))?;
    let col = match column {
        Some(c) => find(c).ok_or_else(|| bad(format!("{}: no `{c}` column", path.display())))?,
        None => find("coeff")
            .or_else(|| find("f_k"))
            .ok_or_else(|| bad(format!("{}: no `coeff` or `f_k` column; set `column`", path.display())))?,
    };
    let mut coeffs = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(io)?;
        let k: usize =
            rec[k_col].parse().map_err(|_| bad(format!("{}: row {}: bad index", path.display(), row + 2)))?;
        if k != row + 1 {
            return Err(bad(format!("{}: row {}: expected k = {}, got {k}", path.display(), row + 2, row + 1)));
        }
        let v: f64 = rec[col]
            .parse()
            .map_err(|_| bad(format!("{}: row {}: not a number: {:?}", path.display(), row + 2, &rec[col])))?;
        coeffs.push(v);
    }
    Ok(SpectralVector64::new(coeffs)?)
}
