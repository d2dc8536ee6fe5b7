//! Coefficient-space representation of a self-adjoint positive operator by
//! its eigenpairs, and of elements of the Hilbert space by truncated Fourier
//! coefficients.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::kernel::{gauss_legendre, NaturalSpline};
use crate::scalar::{CompensatedSum, Scalar};

/// Tail ratio above which a vector is reported as not resolved in `D(A)`.
pub const DOMAIN_TAIL_WARN: f64 = 1e-6;

/// Gauss points per panel in [`project`].
const PROJECT_PANEL_NODES: usize = 16;

type EigenFn<T> = Arc<dyn Fn(usize, T) -> T + Send + Sync>;

/// Eigenfunction evaluator `(k, x) ↦ v_k(x)` (one-based `k`) on an interval.
#[derive(Clone)]
pub struct Eigenfunctions<T> {
    lower: T,
    upper: T,
    eval: EigenFn<T>,
}

impl<T: Scalar> Eigenfunctions<T> {
    pub fn new<F>(lower: T, upper: T, eval: F) -> Result<Self>
    where
        F: Fn(usize, T) -> T + Send + Sync + 'static,
    {
        if !(upper > lower) {
            return Err(domain(format!("empty eigenfunction domain [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper, eval: Arc::new(eval) })
    }

    pub fn domain(&self) -> (T, T) {
        (self.lower, self.upper)
    }

    pub fn eval(&self, k: usize, x: T) -> T {
        (self.eval)(k, x)
    }
}

/// Eigenvalues `0 < λ₁ ≤ λ₂ ≤ … ≤ λ_K`, an optional eigenfunction evaluator
/// and a label.
#[derive(Clone)]
pub struct SpectralOperator<T> {
    eigenvalues: Vec<T>,
    eigenfunctions: Option<Eigenfunctions<T>>,
    label: String,
}

impl<T: fmt::Debug> fmt::Debug for SpectralOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("label", &self.label)
            .field("eigenvalues", &self.eigenvalues)
            .field("has_eigenfunctions", &self.eigenfunctions.is_some())
            .finish()
    }
}

impl<T: Scalar> SpectralOperator<T> {
    /// Operator given by its eigenvalues only.
    pub fn explicit(eigenvalues: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(domain("operator needs at least one eigenvalue"));
        }
        for (i, &l) in eigenvalues.iter().enumerate() {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(domain(format!("eigenvalue {} must be positive and finite, got {l}", i + 1)));
            }
            if i > 0 && l < eigenvalues[i - 1] {
                return Err(domain(format!("eigenvalues must be non-decreasing (index {})", i + 1)));
            }
        }
        Ok(Self { eigenvalues, eigenfunctions: None, label: label.into() })
    }

    /// `-d²/dx²` on `(0, length)` with Dirichlet conditions:
    /// `λ_k = (kπ/L)²`, `v_k(x) = √(2/L) sin(kπx/L)`.
    pub fn dirichlet_laplacian_1d(length: T, modes: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(domain(format!("interval length must be positive, got {length}")));
        }
        if modes == 0 {
            return Err(domain("number of modes must be at least 1"));
        }
        let eigenvalues = (1..=modes)
            .map(|k| {
                let w = T::from_usize_lossy(k) * T::PI() / length;
                w * w
            })
            .collect();
        let norm = (T::lit(2.0) / length).sqrt();
        let eval = move |k: usize, x: T| norm * (T::from_usize_lossy(k) * T::PI() * x / length).sin();
        Ok(Self {
            eigenvalues,
            eigenfunctions: Some(Eigenfunctions::new(T::zero(), length, eval)?),
            label: format!("dirichlet_1d(length={length})"),
        })
    }

    /// Attaches an evaluator after checking discrete orthonormality of the
    /// first `K` eigenfunctions to `tolerance` with `quad_nodes` points.
    pub fn with_eigenfunctions(
        mut self,
        eigenfunctions: Eigenfunctions<T>,
        quad_nodes: usize,
        tolerance: T,
    ) -> Result<Self> {
        let (xs, ws) = composite_nodes(eigenfunctions.domain(), quad_nodes);
        let k = self.eigenvalues.len();
        let table: Vec<Vec<T>> = (1..=k).map(|i| xs.iter().map(|&x| eigenfunctions.eval(i, x)).collect()).collect();
        for i in 0..k {
            for j in i..k {
                let mut acc = CompensatedSum::new();
                for q in 0..xs.len() {
                    acc.add(ws[q] * table[i][q] * table[j][q]);
                }
                let expected = if i == j { T::one() } else { T::zero() };
                if (acc.value() - expected).abs() > tolerance {
                    return Err(domain(format!(
                        "eigenfunctions {} and {} are not orthonormal: inner product {}",
                        i + 1,
                        j + 1,
                        acc.value()
                    )));
                }
            }
        }
        self.eigenfunctions = Some(eigenfunctions);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eigenfunctions(&self) -> Option<&Eigenfunctions<T>> {
        self.eigenfunctions.as_ref()
    }

    /// `v_k(x)`, one-based `k`.
    pub fn eigenfunction(&self, k: usize, x: T) -> Result<T> {
        let ef = self.eigenfunctions.as_ref().ok_or(Error::Missing("eigenfunction evaluator"))?;
        if k == 0 || k > self.len() {
            return Err(domain(format!("mode index {k} outside 1..={}", self.len())));
        }
        Ok(ef.eval(k, x))
    }

    fn check_len(&self, v: &SpectralVector<T>) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Shape { what: "coefficient vector", expected: self.len(), got: v.len() });
        }
        Ok(())
    }

    /// Writes `# label: …` followed by a `k,lambda` table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# label: {}", self.label)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "lambda"])?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            w.write_record([(i + 1).to_string(), l.to_csv()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv); the operator has no
    /// eigenfunction evaluator.
    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let label = first
            .trim_end()
            .strip_prefix("# label: ")
            .ok_or_else(|| Error::Parse("operator CSV must start with a '# label: ' line".into()))?
            .to_string();
        let values = read_indexed_column(input, "lambda")?;
        Self::explicit(values, label)
    }
}

/// Truncated Fourier coefficients `h_1 … h_K` (stored zero-based).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVector<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> SpectralVector<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("coefficient vector must not be empty"));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(domain(format!("coefficient {} is not finite", i + 1)));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(len: usize) -> Self {
        Self { coeffs: vec![T::zero(); len.max(1)] }
    }

    /// `e_k`, one-based `k`.
    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.coeffs[k - 1] = T::one();
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of mode `k`, one-based.
    pub fn get(&self, k: usize) -> T {
        self.coeffs[k - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }

    /// Euclidean (H) norm.
    pub fn norm(&self) -> T {
        let scale = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let s: T = self.coeffs.iter().map(|c| (*c / scale) * (*c / scale)).sum();
        scale * s.sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| *x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(T, T) -> T) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Shape { what: "coefficient vector", expected: self.len(), got: other.len() });
        }
        Ok(Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| op(*a, *b)).collect() })
    }

    /// `‖self - reference‖ / ‖reference‖` (absolute when the reference is zero).
    pub fn relative_error(&self, reference: &Self) -> Result<T> {
        let diff = self.sub(reference)?.norm();
        let r = reference.norm();
        Ok(if r == T::zero() { diff } else { diff / r })
    }

    /// Writes a `k,coeff` table.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "coeff"])?;
        for (i, c) in self.coeffs.iter().enumerate() {
            w.write_record([(i + 1).to_string(), c.to_csv()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        Self::new(read_indexed_column(input, "coeff")?)
    }
}

/// Reads a two-column `k,<name>` table with `k = 1, 2, …` in order.
fn read_indexed_column<T: Scalar, R: BufRead>(input: R, name: &str) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "k" || &headers[1] != name {
        return Err(Error::Parse(format!(
            "expected header 'k,{name}', got '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let k: usize = rec[0].parse().map_err(|_| Error::Parse(format!("line {line}: bad index '{}'", &rec[0])))?;
        if k != row + 1 {
            return Err(Error::Parse(format!("line {line}: expected index {}, got {k}", row + 1)));
        }
        let v: f64 = rec[1].parse().map_err(|_| Error::Parse(format!("line {line}: bad number '{}'", &rec[1])))?;
        out.push(T::lit(v));
    }
    Ok(out)
}

/// Composite Gauss-Legendre nodes and weights with at least `nodes` points.
fn composite_nodes<T: Scalar>((lower, upper): (T, T), nodes: usize) -> (Vec<T>, Vec<T>) {
    let panels = nodes.div_ceil(PROJECT_PANEL_NODES).max(1);
    let (gx, gw) = gauss_legendre::<T>(PROJECT_PANEL_NODES);
    let width = (upper - lower) / T::from_usize_lossy(panels);
    let half = width / T::lit(2.0);
    let mut xs = Vec::with_capacity(panels * PROJECT_PANEL_NODES);
    let mut ws = Vec::with_capacity(panels * PROJECT_PANEL_NODES);
    for p in 0..panels {
        let mid = lower + width * T::from_usize_lossy(p) + half;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + half * *x);
            ws.push(half * *w);
        }
    }
    (xs, ws)
}

/// `h_k = ∫ h v_k dx` by composite Gauss-Legendre with (at least)
/// `quad_nodes` points.
pub fn project<T: Scalar, F>(op: &SpectralOperator<T>, h: F, quad_nodes: usize) -> Result<SpectralVector<T>>
where
    F: Fn(T) -> T,
{
    let ef = op.eigenfunctions().ok_or(Error::Missing("eigenfunction evaluator"))?;
    if quad_nodes < 2 * op.len() {
        log::warn!("projection with {quad_nodes} nodes for {} modes may alias high modes", op.len());
    }
    let (xs, ws) = composite_nodes(ef.domain(), quad_nodes);
    let hv: Vec<T> = xs.iter().map(|&x| h(x)).collect();
    if let Some(i) = hv.iter().position(|v| !v.is_finite()) {
        return Err(domain(format!("projected function is not finite at x = {}", xs[i])));
    }
    let coeffs = (1..=op.len())
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for q in 0..xs.len() {
                acc.add(ws[q] * hv[q] * ef.eval(k, xs[q]));
            }
            acc.value()
        })
        .collect();
    SpectralVector::new(coeffs)
}

/// Projects uniform samples over the eigenfunction domain, interpolated by a
/// natural cubic spline.
pub fn project_samples<T: Scalar>(
    op: &SpectralOperator<T>,
    samples: Vec<T>,
    quad_nodes: usize,
) -> Result<SpectralVector<T>> {
    let ef = op.eigenfunctions().ok_or(Error::Missing("eigenfunction evaluator"))?;
    let (lower, upper) = ef.domain();
    let spline = NaturalSpline::uniform(samples, upper - lower)?;
    project(op, |x| spline.value(x - lower), quad_nodes)
}

/// `Σ h_k v_k(x)`.
pub fn reconstruct<T: Scalar>(op: &SpectralOperator<T>, v: &SpectralVector<T>, x: T) -> Result<T> {
    op.check_len(v)?;
    let ef = op.eigenfunctions().ok_or(Error::Missing("eigenfunction evaluator"))?;
    let mut acc = CompensatedSum::new();
    for (i, c) in v.coeffs().iter().enumerate() {
        if *c != T::zero() {
            acc.add(*c * ef.eval(i + 1, x));
        }
    }
    Ok(acc.value())
}

/// `A^τ v`: coefficients `λ_k^τ h_k`.
pub fn apply_power<T: Scalar>(op: &SpectralOperator<T>, tau: T, v: &SpectralVector<T>) -> Result<SpectralVector<T>> {
    op.check_len(v)?;
    if tau == T::zero() {
        return Ok(v.clone());
    }
    let coeffs = v.coeffs().iter().zip(op.eigenvalues()).map(|(h, l)| *h * l.powf(tau)).collect();
    SpectralVector::new(coeffs)
}

/// `(Σ λ_k^{2τ} h_k²)^{1/2}`.
pub fn norm_tau<T: Scalar>(op: &SpectralOperator<T>, tau: T, v: &SpectralVector<T>) -> Result<T> {
    op.check_len(v)?;
    if tau == T::zero() {
        return Ok(v.norm());
    }
    let weighted: Vec<T> = v.coeffs().iter().zip(op.eigenvalues()).map(|(h, l)| *h * l.powf(tau)).collect();
    Ok(SpectralVector { coeffs: weighted }.norm())
}

/// Tail diagnostic for membership in `D(A)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainDiagnostic<T> {
    /// `λ_K² h_K² / max_k λ_k² h_k²` (zero for the zero vector).
    pub tail_ratio: T,
    pub resolved: bool,
}

pub fn domain_tail_diagnostic<T: Scalar>(
    op: &SpectralOperator<T>,
    v: &SpectralVector<T>,
) -> Result<DomainDiagnostic<T>> {
    op.check_len(v)?;
    let weighted: Vec<T> = v.coeffs().iter().zip(op.eigenvalues()).map(|(h, l)| (*h * *l) * (*h * *l)).collect();
    let max = weighted.iter().copied().fold(T::zero(), T::max);
    let tail_ratio = if max == T::zero() { T::zero() } else { weighted[weighted.len() - 1] / max };
    let resolved = tail_ratio <= T::lit(DOMAIN_TAIL_WARN);
    if !resolved {
        log::warn!("coefficient tail not resolved in D(A): ratio {tail_ratio}");
    }
    Ok(DomainDiagnostic { tail_ratio, resolved })
}
