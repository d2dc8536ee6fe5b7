//! The scalar source modulation g(t) on `[0, T]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::scalar::Scalar;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Natural cubic spline through samples on a uniform grid.
#[derive(Clone, Debug)]
pub struct NaturalSpline<T> {
    step: T,
    values: Vec<T>,
    second: Vec<T>,
}

impl<T: Scalar> NaturalSpline<T> {
    /// Samples at `x_i = i · length / (n - 1)`; needs at least two samples.
    pub fn uniform(values: Vec<T>, length: T) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(domain("spline needs at least two samples"));
        }
        if !(length > T::zero()) {
            return Err(domain("spline length must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("spline samples must be finite"));
        }
        let step = length / T::from_usize_lossy(n - 1);
        let mut second = vec![T::zero(); n];
        if n > 2 {
            // Tridiagonal system (1, 4, 1) M = 6/h² Δ² y for interior nodes.
            let m = n - 2;
            let six_h2 = T::lit(6.0) / (step * step);
            let mut diag = vec![T::lit(4.0); m];
            let mut rhs: Vec<T> =
                (1..n - 1).map(|i| six_h2 * (values[i + 1] - T::lit(2.0) * values[i] + values[i - 1])).collect();
            for i in 1..m {
                let factor = T::one() / diag[i - 1];
                diag[i] = diag[i] - factor;
                rhs[i] = rhs[i] - factor * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - second[i + 2]) / diag[i];
            }
        }
        Ok(Self { step, values, second })
    }

    fn locate(&self, x: T) -> (usize, T) {
        let n = self.values.len();
        let pos = (x / self.step).max(T::zero());
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        (i, x - self.step * T::from_usize_lossy(i))
    }

    pub fn value(&self, x: T) -> T {
        let (i, dx) = self.locate(x);
        let h = self.step;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let six = T::lit(6.0);
        let a = (y1 - y0) / h - h * (T::lit(2.0) * m0 + m1) / six;
        y0 + dx * (a + dx * (m0 / T::lit(2.0) + dx * (m1 - m0) / (six * h)))
    }

    pub fn derivative(&self, x: T) -> T {
        let (i, dx) = self.locate(x);
        let h = self.step;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let six = T::lit(6.0);
        let a = (y1 - y0) / h - h * (T::lit(2.0) * m0 + m1) / six;
        a + dx * (m0 + dx * (m1 - m0) / (T::lit(2.0) * h))
    }

    pub fn samples(&self) -> &[T] {
        &self.values
    }
}

#[derive(Clone)]
enum Shape<T> {
    Constant(T),
    ClosedForm { value: ScalarFn<T>, derivative: Option<ScalarFn<T>> },
    Sampled(NaturalSpline<T>),
}

/// g(t) on `[0, horizon]`: a constant, a closed-form evaluator (optionally with
/// its derivative), or uniform samples interpolated by a natural cubic spline.
#[derive(Clone)]
pub struct TimeProfile<T> {
    name: String,
    horizon: T,
    shape: Shape<T>,
    sign_constant: Option<bool>,
    sup_norm: T,
}

/// Number of uniform points used for sup-norm and sign checks.
const CHECK_GRID: usize = 1025;

impl<T: fmt::Debug> fmt::Debug for TimeProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeProfile")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .field("sign_constant", &self.sign_constant)
            .finish()
    }
}

impl<T: Scalar> TimeProfile<T> {
    fn build(name: impl Into<String>, horizon: T, shape: Shape<T>) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(domain(format!("time horizon must be positive, got {horizon}")));
        }
        let mut profile = Self { name: name.into(), horizon, shape, sign_constant: None, sup_norm: T::zero() };
        let mut sup = T::zero();
        for t in profile.check_grid() {
            let v = profile.value(t);
            if !v.is_finite() {
                return Err(domain(format!("profile {} is not finite at t = {t}", profile.name)));
            }
            sup = sup.max(v.abs());
        }
        profile.sup_norm = sup;
        Ok(profile)
    }

    fn check_grid(&self) -> impl Iterator<Item = T> + '_ {
        let last = T::from_usize_lossy(CHECK_GRID - 1);
        (0..CHECK_GRID).map(move |i| self.horizon * T::from_usize_lossy(i) / last)
    }

    pub fn constant(value: T, horizon: T) -> Result<Self> {
        Self::build("const", horizon, Shape::Constant(value))
    }

    /// Closed-form evaluator without a derivative.
    pub fn closed_form<F>(name: impl Into<String>, horizon: T, value: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        Self::build(name, horizon, Shape::ClosedForm { value: Arc::new(value), derivative: None })
    }

    /// Closed-form evaluator with its derivative.
    pub fn closed_form_with_derivative<F, D>(
        name: impl Into<String>,
        horizon: T,
        value: F,
        derivative: D,
    ) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
    {
        Self::build(name, horizon, Shape::ClosedForm { value: Arc::new(value), derivative: Some(Arc::new(derivative)) })
    }

    /// Uniform samples `g(i T/(n-1))`, `n ≥ 2`.
    pub fn sampled(values: Vec<T>, horizon: T) -> Result<Self> {
        let spline = NaturalSpline::uniform(values, horizon)?;
        Self::build("sampled", horizon, Shape::Sampled(spline))
    }

    /// `a + b t`
    pub fn linear(a: T, b: T, horizon: T) -> Result<Self> {
        Self::closed_form_with_derivative("linear", horizon, move |t| a + b * t, move |_| b)
    }

    /// `a e^{-b t}`
    pub fn exp_decay(a: T, b: T, horizon: T) -> Result<Self> {
        Self::closed_form_with_derivative(
            "exp_decay",
            horizon,
            move |t| a * (-b * t).exp(),
            move |t| -a * b * (-b * t).exp(),
        )
    }

    /// `a cos(ω t + φ)`
    pub fn cosine(a: T, omega: T, phase: T, horizon: T) -> Result<Self> {
        Self::closed_form_with_derivative(
            "cosine",
            horizon,
            move |t| a * (omega * t + phase).cos(),
            move |t| -a * omega * (omega * t + phase).sin(),
        )
    }

    /// `1 + β eᵗ`
    pub fn affine_exp(beta: T, horizon: T) -> Result<Self> {
        Self::closed_form_with_derivative(
            "affine_exp",
            horizon,
            move |t| T::one() + beta * t.exp(),
            move |t| beta * t.exp(),
        )
    }

    /// Records the sign-constancy flag, checking `min |g| > 0` on the check
    /// grid when the flag is `true`.
    pub fn declare_sign_constant(mut self, flag: bool) -> Result<Self> {
        if flag {
            let min = self.min_abs();
            if !(min > T::zero()) {
                return Err(domain(format!(
                    "profile {} declared sign-constant but min|g| = {min} on the check grid",
                    self.name
                )));
            }
            let first = self.value(T::zero()).signum();
            if self.check_grid().any(|t| self.value(t).signum() != first) {
                return Err(domain(format!("profile {} changes sign", self.name)));
            }
        }
        self.sign_constant = Some(flag);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn sign_constant(&self) -> Option<bool> {
        self.sign_constant
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, Shape::Constant(_))
    }

    pub fn value(&self, t: T) -> T {
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::ClosedForm { value, .. } => value(t),
            Shape::Sampled(s) => s.value(t),
        }
    }

    /// g′(t) when available (constant, closed form with derivative, spline).
    pub fn derivative(&self, t: T) -> Option<T> {
        match &self.shape {
            Shape::Constant(_) => Some(T::zero()),
            Shape::ClosedForm { derivative, .. } => derivative.as_ref().map(|d| d(t)),
            Shape::Sampled(s) => Some(s.derivative(t)),
        }
    }

    /// max |g| on the check grid.
    pub fn sup_norm(&self) -> T {
        self.sup_norm
    }

    /// min |g| on the check grid.
    pub fn min_abs(&self) -> T {
        self.check_grid().map(|t| self.value(t).abs()).fold(T::infinity(), T::min)
    }

    /// Whether g takes both signs on the check grid.
    pub fn changes_sign(&self) -> bool {
        let mut pos = false;
        let mut neg = false;
        for t in self.check_grid() {
            let v = self.value(t);
            pos |= v > T::zero();
            neg |= v < T::zero();
        }
        pos && neg
    }
}
