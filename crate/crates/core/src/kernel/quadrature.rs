//! Composite Gauss-Legendre quadrature on meshes graded toward one endpoint.

use crate::error::{domain, Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Work in f64 (or better) and convert; the rule itself is exact data.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule description: `panels` graded panels with
/// `nodes_per_panel` Gauss points each, refined by panel doubling until two
/// successive levels agree to `tolerance` relative to the problem scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Mesh grading exponent; `None` picks `max(2, ⌈3/ρ⌉)` from the order.
    pub grading_exponent: Option<T>,
    pub tolerance: T,
    pub max_doublings: u32,
}

impl<T: Scalar> Default for QuadratureRule<T> {
    fn default() -> Self {
        Self { panels: 16, nodes_per_panel: 12, grading_exponent: None, tolerance: T::lit(1e-11), max_doublings: 7 }
    }
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn new(panels: usize, nodes_per_panel: usize, grading_exponent: Option<T>) -> Result<Self> {
        let rule = Self { panels, nodes_per_panel, grading_exponent, ..Self::default() };
        rule.validate()?;
        Ok(rule)
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(domain("quadrature needs at least one panel"));
        }
        if self.nodes_per_panel < 2 {
            return Err(domain("quadrature needs at least two nodes per panel"));
        }
        if let Some(q) = self.grading_exponent {
            if !(q >= T::one()) {
                return Err(domain(format!("grading exponent must be >= 1, got {q}")));
            }
        }
        if !(self.tolerance > T::zero()) {
            return Err(domain("quadrature tolerance must be positive"));
        }
        Ok(())
    }

    /// Grading exponent used for an endpoint singularity governed by `rho`.
    pub fn grading_for(&self, rho: T) -> T {
        self.grading_exponent.unwrap_or_else(|| default_grading(rho))
    }
}

/// `max(2, ⌈3/ρ⌉)`.
pub fn default_grading<T: Scalar>(rho: T) -> T {
    (T::lit(3.0) / rho).ceil().max(T::lit(2.0))
}

/// Fixed graded rule: ∫₀ᴸ f(s) ds with breakpoints `L (j/P)^q`, dense near
/// `s = 0`. The integrand receives the distance `s` from the graded endpoint.
pub fn integrate_graded<T: Scalar, F>(
    f: &mut F,
    length: T,
    panels: usize,
    gauss: &(Vec<T>, Vec<T>),
    grading: T,
) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let pf = T::from_usize_lossy(panels);
    let half = T::lit(0.5);
    let mut acc = CompensatedSum::new();
    let mut left = T::zero();
    for j in 1..=panels {
        let right = length * (T::from_usize_lossy(j) / pf).powf(grading);
        let mid = half * (left + right);
        let rad = half * (right - left);
        if rad > T::zero() {
            let mut panel = CompensatedSum::new();
            for (&x, &w) in gauss.0.iter().zip(&gauss.1) {
                panel.add(w * f(mid + rad * x)?);
            }
            acc.add(rad * panel.value());
        }
        left = right;
    }
    Ok(acc.value())
}

/// Panel-doubling driver around [`integrate_graded`]. Converged when two
/// successive levels differ by at most `rule.tolerance * max(|Q|, scale)`.
pub fn integrate_adaptive<T: Scalar, F>(
    mut f: F,
    length: T,
    rule: &QuadratureRule<T>,
    grading: T,
    scale: T,
    context: &str,
) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    rule.validate()?;
    if length == T::zero() {
        return Ok(T::zero());
    }
    let gauss = gauss_legendre::<T>(rule.nodes_per_panel);
    let mut panels = rule.panels;
    let mut coarse = integrate_graded(&mut f, length, panels, &gauss, grading)?;
    let mut diff = T::infinity();
    for _ in 0..rule.max_doublings {
        panels *= 2;
        let fine = integrate_graded(&mut f, length, panels, &gauss, grading)?;
        diff = (fine - coarse).abs();
        let reference = fine.abs().max(scale.abs());
        if diff <= rule.tolerance * reference || (diff == T::zero()) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Accuracy { context: context.to_string(), estimate: diff.to_f64_lossy() })
}

/// `∫₀ᴸ s^α f(s) ds` for `α > -1`, after the substitution `s = L v^{1/(1+α)}`
/// which absorbs the weight: `L^{1+α}/(1+α) ∫₀¹ f(L v^{1/(1+α)}) dv`.
pub fn integrate_power_weighted<T: Scalar, F>(
    mut f: F,
    length: T,
    alpha: T,
    rule: &QuadratureRule<T>,
    grading: T,
    scale: T,
    context: &str,
) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    if !(alpha > -T::one()) {
        return Err(domain(format!("weight exponent must exceed -1, got {alpha}")));
    }
    if length == T::zero() {
        return Ok(T::zero());
    }
    let a1 = alpha + T::one();
    let factor = length.powf(a1) / a1;
    let gamma = a1.recip();
    let inner = integrate_adaptive(|v: T| f(length * v.powf(gamma)), T::one(), rule, grading, scale / factor, context)?;
    Ok(factor * inner)
}
