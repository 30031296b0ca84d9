use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BaseFunction, Boundedness, CylinderFunction};
use crate::hilbert::SelfAdjointOp;
use crate::{Error, Result};

/// `f(y) = y`.
#[derive(Debug, Clone, Copy)]
pub struct Linear;

impl BaseFunction for Linear {
    fn arity(&self) -> usize {
        1
    }
    fn value(&self, y: &[f64]) -> f64 {
        y[0]
    }
    fn gradient(&self, _y: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }
    fn hessian(&self, _y: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::PolynomialGrowth
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(1)
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `f(y) = ½ yᵀ A y` with `A` symmetric.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: DMatrix<f64>,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let op = SelfAdjointOp::from_matrix(&a)?;
        Ok(Self { a: op.matrix().clone() })
    }
}

impl BaseFunction for Quadratic {
    fn arity(&self) -> usize {
        self.a.nrows()
    }
    fn value(&self, y: &[f64]) -> f64 {
        let m = self.arity();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += y[i] * self.a[(i, j)] * y[j];
            }
        }
        0.5 * s
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        let m = self.arity();
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..m).map(|j| self.a[(i, j)] * y[j]).sum();
        }
    }
    fn hessian(&self, _y: &[f64], out: &mut DMatrix<f64>) {
        out.copy_from(&self.a);
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::PolynomialGrowth
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(2)
    }
}

/// `f(y) = A cos(ω y + φ)`.
#[derive(Debug, Clone, Copy)]
pub struct Trig {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl BaseFunction for Trig {
    fn arity(&self) -> usize {
        1
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.amplitude * (self.frequency * y[0] + self.phase).cos()
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        out[0] = -self.amplitude * self.frequency * (self.frequency * y[0] + self.phase).sin();
    }
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>) {
        out[(0, 0)] = -self.amplitude * self.frequency * self.frequency * (self.frequency * y[0] + self.phase).cos();
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::Bounded
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(self.amplitude.abs())
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        Some((self.amplitude * self.frequency).abs())
    }
}

/// `f(y) = cos(y₀) sin(y₁)`.
#[derive(Debug, Clone, Copy)]
pub struct CosSinProduct;

impl BaseFunction for CosSinProduct {
    fn arity(&self) -> usize {
        2
    }
    fn value(&self, y: &[f64]) -> f64 {
        y[0].cos() * y[1].sin()
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        out[0] = -y[0].sin() * y[1].sin();
        out[1] = y[0].cos() * y[1].cos();
    }
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>) {
        let (s0, c0, s1, c1) = (y[0].sin(), y[0].cos(), y[1].sin(), y[1].cos());
        out[(0, 0)] = -c0 * s1;
        out[(0, 1)] = -s0 * c1;
        out[(1, 0)] = -s0 * c1;
        out[(1, 1)] = -c0 * s1;
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::Bounded
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Smooth compactly supported bump `exp(1 − 1/(1 − |y|²/ρ²))` on `|y| < ρ`,
/// normalised to peak value 1.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub arity: usize,
    pub radius: f64,
}

impl BaseFunction for Bump {
    fn arity(&self) -> usize {
        self.arity
    }
    fn value(&self, y: &[f64]) -> f64 {
        let s = y.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if s < 1.0 {
            (1.0 - 1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        let r2 = self.radius * self.radius;
        let s = y.iter().map(|v| v * v).sum::<f64>() / r2;
        if s >= 1.0 {
            out.fill(0.0);
            return;
        }
        let u = 1.0 / (1.0 - s);
        let f = (1.0 - u).exp();
        for (o, yi) in out.iter_mut().zip(y) {
            *o = -f * u * u * 2.0 * yi / r2;
        }
    }
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>) {
        let r2 = self.radius * self.radius;
        let s = y.iter().map(|v| v * v).sum::<f64>() / r2;
        out.fill(0.0);
        if s >= 1.0 {
            return;
        }
        let u = 1.0 / (1.0 - s);
        let f = (1.0 - u).exp();
        let c = (4.0 * u.powi(3) - 2.0 * u.powi(4)) / r2;
        for i in 0..self.arity {
            for j in 0..self.arity {
                let d = if i == j { u * u } else { 0.0 };
                out[(i, j)] = -2.0 * f / r2 * (d + c * y[i] * y[j]);
            }
        }
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::Bounded
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Saturated quadratic `q / (1 + q)` with `q = |y|²/s²`.
#[derive(Debug, Clone, Copy)]
pub struct Saturation {
    pub arity: usize,
    pub scale: f64,
}

impl BaseFunction for Saturation {
    fn arity(&self) -> usize {
        self.arity
    }
    fn value(&self, y: &[f64]) -> f64 {
        let q = y.iter().map(|v| v * v).sum::<f64>() / (self.scale * self.scale);
        q / (1.0 + q)
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        let s2 = self.scale * self.scale;
        let q = y.iter().map(|v| v * v).sum::<f64>() / s2;
        let d = 1.0 / ((1.0 + q) * (1.0 + q));
        for (o, yi) in out.iter_mut().zip(y) {
            *o = d * 2.0 * yi / s2;
        }
    }
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>) {
        let s2 = self.scale * self.scale;
        let q = y.iter().map(|v| v * v).sum::<f64>() / s2;
        let d1 = 1.0 / ((1.0 + q) * (1.0 + q));
        let d2 = -2.0 / (1.0 + q).powi(3);
        for i in 0..self.arity {
            for j in 0..self.arity {
                let diag = if i == j { d1 * 2.0 / s2 } else { 0.0 };
                out[(i, j)] = d2 * (2.0 * y[i] / s2) * (2.0 * y[j] / s2) + diag;
            }
        }
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::Bounded
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `f(y) = min(1, |y|)^α`: Hölder of exponent `α` with seminorm 1, not
/// differentiable at 0 or at `|y| = 1`.
#[derive(Debug, Clone, Copy)]
pub struct HolderCusp {
    pub alpha: f64,
}

impl BaseFunction for HolderCusp {
    fn arity(&self) -> usize {
        1
    }
    fn value(&self, y: &[f64]) -> f64 {
        y[0].abs().min(1.0).powf(self.alpha)
    }
    // derivative where it exists, 0 at the kinks
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        let a = y[0].abs();
        out[0] = if a > 0.0 && a < 1.0 {
            self.alpha * a.powf(self.alpha - 1.0) * y[0].signum()
        } else {
            0.0
        };
    }
    fn hessian(&self, _y: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
    }
    fn smoothness(&self) -> usize {
        0
    }
    fn boundedness(&self) -> Boundedness {
        Boundedness::Bounded
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `Σₜ cₜ Πᵢ yᵢ^{eₜᵢ}`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    arity: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(arity: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidArgument("polynomial arity must be positive".into()));
        }
        for (_, e) in &terms {
            if e.len() != arity {
                return Err(Error::DimensionMismatch {
                    expected: arity,
                    got: e.len(),
                });
            }
        }
        Ok(Self { arity, terms })
    }

    fn monomial(y: &[f64], e: &[u32], skip: Option<(usize, u32)>, skip2: Option<(usize, u32)>) -> f64 {
        let mut p = 1.0;
        for (i, (&yi, &ei)) in y.iter().zip(e).enumerate() {
            let mut ei = ei as i32;
            if let Some((k, d)) = skip {
                if k == i {
                    ei -= d as i32;
                }
            }
            if let Some((k, d)) = skip2 {
                if k == i {
                    ei -= d as i32;
                }
            }
            if ei < 0 {
                return 0.0;
            }
            p *= yi.powi(ei);
        }
        p
    }
}

impl BaseFunction for Polynomial {
    fn arity(&self) -> usize {
        self.arity
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * Self::monomial(y, e, None, None)).sum()
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .terms
                .iter()
                .filter(|(_, e)| e[i] > 0)
                .map(|(c, e)| c * e[i] as f64 * Self::monomial(y, e, Some((i, 1)), None))
                .sum();
        }
    }
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>) {
        for i in 0..self.arity {
            for j in 0..self.arity {
                out[(i, j)] = self
                    .terms
                    .iter()
                    .map(|(c, e)| {
                        let f = if i == j {
                            e[i] as f64 * (e[i] as f64 - 1.0)
                        } else {
                            e[i] as f64 * e[j] as f64
                        };
                        if f == 0.0 {
                            0.0
                        } else {
                            c * f * Self::monomial(y, e, Some((i, 1)), Some((j, 1)))
                        }
                    })
                    .sum();
            }
        }
    }
    fn boundedness(&self) -> Boundedness {
        if self.polynomial_degree() == Some(0) {
            Boundedness::Bounded
        } else {
            Boundedness::PolynomialGrowth
        }
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(
            self.terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(_, e)| e.iter().sum::<u32>() as usize)
                .max()
                .unwrap_or(0),
        )
    }
    fn sup_bound(&self) -> Option<f64> {
        match self.polynomial_degree() {
            Some(0) => Some(self.terms.iter().map(|(c, _)| c).sum::<f64>().abs()),
            _ => None,
        }
    }
}

/// Scalar outer functions for compositions `g ∘ f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outer {
    Tanh,
    Exp,
    Sin,
    Square,
}

impl Outer {
    /// `(g(s), g'(s), g''(s))`.
    pub fn eval(self, s: f64) -> (f64, f64, f64) {
        match self {
            Outer::Tanh => {
                let t = s.tanh();
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
            Outer::Exp => {
                let e = s.exp();
                (e, e, e)
            }
            Outer::Sin => (s.sin(), s.cos(), -s.sin()),
            Outer::Square => (s * s, 2.0 * s, 2.0),
        }
    }
}

/// `g ∘ f` for a scalar outer `g`.
#[derive(Debug, Clone)]
pub struct Composed {
    outer: Outer,
    inner: Arc<dyn BaseFunction>,
    smoothness: usize,
}

impl Composed {
    pub fn new(outer: Outer, inner: Arc<dyn BaseFunction>) -> Self {
        let smoothness = inner.smoothness();
        Self {
            outer,
            inner,
            smoothness,
        }
    }

    /// Caps the advertised smoothness order.
    pub fn with_smoothness(mut self, order: usize) -> Self {
        self.smoothness = order.min(self.inner.smoothness());
        self
    }
}

impl BaseFunction for Composed {
    fn arity(&self) -> usize {
        self.inner.arity()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.outer.eval(self.inner.value(y)).0
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        let (_, d, _) = self.outer.eval(self.inner.value(y));
        self.inner.gradient(y, out);
        for o in out.iter_mut() {
            *o *= d;
        }
    }
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>) {
        let (_, d1, d2) = self.outer.eval(self.inner.value(y));
        let mut g = vec![0.0; self.arity()];
        self.inner.gradient(y, &mut g);
        self.inner.hessian(y, out);
        for i in 0..self.arity() {
            for j in 0..self.arity() {
                out[(i, j)] = d1 * out[(i, j)] + d2 * g[i] * g[j];
            }
        }
    }
    fn smoothness(&self) -> usize {
        self.smoothness
    }
    fn boundedness(&self) -> Boundedness {
        match self.outer {
            Outer::Tanh | Outer::Sin => Boundedness::Bounded,
            _ => self.inner.boundedness(),
        }
    }
    fn sup_bound(&self) -> Option<f64> {
        match self.outer {
            Outer::Tanh | Outer::Sin => Some(1.0),
            _ => None,
        }
    }
}

/// `ξ ↦ f(L ξ)`: re-expresses a profile in new coordinates.
#[derive(Debug, Clone)]
pub struct LinearPullback {
    inner: Arc<dyn BaseFunction>,
    l: DMatrix<f64>,
}

impl LinearPullback {
    /// `l` has shape `inner.arity() × k`.
    pub fn new(inner: Arc<dyn BaseFunction>, l: DMatrix<f64>) -> Result<Self> {
        if l.nrows() != inner.arity() {
            return Err(Error::DimensionMismatch {
                expected: inner.arity(),
                got: l.nrows(),
            });
        }
        Ok(Self { inner, l })
    }

    fn map(&self, xi: &[f64]) -> Vec<f64> {
        (&self.l * DVector::from_column_slice(xi)).as_slice().to_vec()
    }
}

impl BaseFunction for LinearPullback {
    fn arity(&self) -> usize {
        self.l.ncols()
    }
    fn value(&self, xi: &[f64]) -> f64 {
        self.inner.value(&self.map(xi))
    }
    fn gradient(&self, xi: &[f64], out: &mut [f64]) {
        let y = self.map(xi);
        let mut g = vec![0.0; y.len()];
        self.inner.gradient(&y, &mut g);
        let pulled = self.l.tr_mul(&DVector::from_vec(g));
        out.copy_from_slice(pulled.as_slice());
    }
    fn hessian(&self, xi: &[f64], out: &mut DMatrix<f64>) {
        let y = self.map(xi);
        let mut h = DMatrix::zeros(y.len(), y.len());
        self.inner.hessian(&y, &mut h);
        out.copy_from(&(self.l.transpose() * h * &self.l));
    }
    fn smoothness(&self) -> usize {
        self.inner.smoothness()
    }
    fn boundedness(&self) -> Boundedness {
        self.inner.boundedness()
    }
    fn polynomial_degree(&self) -> Option<usize> {
        self.inner.polynomial_degree()
    }
    fn sup_bound(&self) -> Option<f64> {
        self.inner.sup_bound()
    }
}

/// Monomial term of a polynomial test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Test function referenced by name and parameters from an experiment
/// configuration. Directions are given as basis indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `⟨x, a⟩`, with `a = e_direction` or an explicit vector.
    Linear {
        #[serde(default)]
        direction: Option<usize>,
        #[serde(default)]
        vector: Option<Vec<f64>>,
    },
    /// `‖x‖²/2`.
    NormSqHalf,
    /// `⟨Ax, x⟩/2` with `A = U diag(eigenvalues) Uᵀ`, `U` Haar-random from
    /// `rotation_seed` (identity frame when absent).
    QuadraticForm {
        eigenvalues: Vec<f64>,
        #[serde(default)]
        rotation_seed: Option<u64>,
    },
    /// `cos(ω⟨x, e_direction⟩ + φ)`.
    CosCylinder {
        direction: usize,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `sin(ω⟨x, e_direction⟩)`.
    SinCylinder {
        direction: usize,
        #[serde(default = "one")]
        frequency: f64,
    },
    /// `cos(x_first) sin(x_second)`.
    CosSinProduct { first: usize, second: usize },
    Bump {
        directions: Vec<usize>,
        #[serde(default = "two")]
        radius: f64,
    },
    Saturation {
        directions: Vec<usize>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `min(1, |x_direction|)^α`.
    HolderCusp { direction: usize, alpha: f64 },
    Polynomial {
        directions: Vec<usize>,
        terms: Vec<PolyTerm>,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn basis(dim: usize, i: usize) -> Result<DVector<f64>> {
    if i >= dim {
        return Err(Error::Config(format!("direction index {i} out of range for dimension {dim}")));
    }
    let mut e = DVector::zeros(dim);
    e[i] = 1.0;
    Ok(e)
}

fn bases(dim: usize, idx: &[usize]) -> Result<Vec<DVector<f64>>> {
    if idx.is_empty() {
        return Err(Error::Config("at least one direction index is required".into()));
    }
    idx.iter().map(|&i| basis(dim, i)).collect()
}

impl FunctionSpec {
    pub fn build(&self, dim: usize) -> Result<CylinderFunction> {
        match self {
            FunctionSpec::Linear { direction, vector } => {
                let a = match (direction, vector) {
                    (Some(i), None) => basis(dim, *i)?,
                    (None, Some(v)) => {
                        if v.len() != dim {
                            return Err(Error::DimensionMismatch {
                                expected: dim,
                                got: v.len(),
                            });
                        }
                        DVector::from_column_slice(v)
                    }
                    _ => return Err(Error::Config("linear needs exactly one of `direction` or `vector`".into())),
                };
                CylinderFunction::new("linear", vec![a], Arc::new(Linear))
            }
            FunctionSpec::NormSqHalf => {
                let dirs = (0..dim).map(|i| basis(dim, i)).collect::<Result<Vec<_>>>()?;
                CylinderFunction::new("norm_sq_half", dirs, Arc::new(Quadratic::new(DMatrix::identity(dim, dim))?))
            }
            FunctionSpec::QuadraticForm {
                eigenvalues,
                rotation_seed,
            } => {
                if eigenvalues.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: eigenvalues.len(),
                    });
                }
                let a = match rotation_seed {
                    Some(s) => SelfAdjointOp::rotated(eigenvalues, *s)?,
                    None => SelfAdjointOp::diagonal(eigenvalues)?,
                };
                let dirs = (0..dim).map(|i| basis(dim, i)).collect::<Result<Vec<_>>>()?;
                CylinderFunction::new("quadratic_form", dirs, Arc::new(Quadratic::new(a.matrix().clone())?))
            }
            FunctionSpec::CosCylinder {
                direction,
                frequency,
                phase,
            } => CylinderFunction::new(
                "cos_cylinder",
                vec![basis(dim, *direction)?],
                Arc::new(Trig {
                    amplitude: 1.0,
                    frequency: *frequency,
                    phase: *phase,
                }),
            ),
            FunctionSpec::SinCylinder { direction, frequency } => CylinderFunction::new(
                "sin_cylinder",
                vec![basis(dim, *direction)?],
                Arc::new(Trig {
                    amplitude: 1.0,
                    frequency: *frequency,
                    phase: -std::f64::consts::FRAC_PI_2,
                }),
            ),
            FunctionSpec::CosSinProduct { first, second } => CylinderFunction::new(
                "cos_sin_product",
                vec![basis(dim, *first)?, basis(dim, *second)?],
                Arc::new(CosSinProduct),
            ),
            FunctionSpec::Bump { directions, radius } => {
                if *radius <= 0.0 {
                    return Err(Error::Config("bump radius must be positive".into()));
                }
                CylinderFunction::new(
                    "bump",
                    bases(dim, directions)?,
                    Arc::new(Bump {
                        arity: directions.len(),
                        radius: *radius,
                    }),
                )
            }
            FunctionSpec::Saturation { directions, scale } => {
                if *scale <= 0.0 {
                    return Err(Error::Config("saturation scale must be positive".into()));
                }
                CylinderFunction::new(
                    "saturation",
                    bases(dim, directions)?,
                    Arc::new(Saturation {
                        arity: directions.len(),
                        scale: *scale,
                    }),
                )
            }
            FunctionSpec::HolderCusp { direction, alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::Config(format!("holder_cusp alpha must lie in (0,1), got {alpha}")));
                }
                CylinderFunction::new(
                    "holder_cusp",
                    vec![basis(dim, *direction)?],
                    Arc::new(HolderCusp { alpha: *alpha }),
                )
            }
            FunctionSpec::Polynomial { directions, terms } => {
                let poly = Polynomial::new(
                    directions.len(),
                    terms.iter().map(|t| (t.coef, t.powers.clone())).collect(),
                )?;
                CylinderFunction::new("polynomial", bases(dim, directions)?, Arc::new(poly))
            }
        }
    }
}

/// Smooth test functions used by the gradient suites (ambient dimension ≥ 2).
pub fn standard_battery_specs(dim: usize) -> Vec<FunctionSpec> {
    let a: Vec<f64> = (0..dim)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / (1.0 + i as f64))
        .collect();
    let eig: Vec<f64> = (0..dim).map(|i| 1.5 / (1.0 + i as f64)).collect();
    let second = 1.min(dim - 1);
    vec![
        FunctionSpec::Linear {
            direction: None,
            vector: Some(a),
        },
        FunctionSpec::QuadraticForm {
            eigenvalues: eig,
            rotation_seed: Some(7),
        },
        FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        },
        FunctionSpec::SinCylinder {
            direction: second,
            frequency: 0.7,
        },
        FunctionSpec::CosSinProduct { first: 0, second },
        FunctionSpec::Bump {
            directions: vec![0, second],
            radius: 2.0,
        },
        FunctionSpec::Saturation {
            directions: vec![0, second],
            scale: 1.0,
        },
    ]
}

/// The built [`standard_battery_specs`].
pub fn standard_battery(dim: usize) -> Result<Vec<CylinderFunction>> {
    if dim < 2 {
        return Err(Error::InvalidArgument("the standard battery needs dimension ≥ 2".into()));
    }
    standard_battery_specs(dim).iter().map(|s| s.build(dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{fd_gradient, fd_jacobian_of_gradient, FDConfig};

    fn check_derivatives(f: &CylinderFunction, x: &DVector<f64>) {
        let cfg = FDConfig::default();
        let g = f.grad_full(x).unwrap();
        let fd = fd_gradient(f, x, &cfg).unwrap();
        assert!((&g - &fd).amax() < 1e-7, "{}: grad {g} vs fd {fd}", f.name());
        let h = f.hess_full(x).unwrap();
        let fdh = fd_jacobian_of_gradient(f, x, &cfg).unwrap();
        assert!((&h - &fdh).amax() < 1e-6, "{}: hess mismatch", f.name());
    }

    #[test]
    fn battery_derivatives_match_fd() {
        let fs = standard_battery(4).unwrap();
        let x = DVector::from_column_slice(&[0.3, -0.4, 0.9, 0.1]);
        for f in &fs {
            check_derivatives(f, &x);
        }
    }

    #[test]
    fn polynomial_and_pullback_derivatives() {
        let p = Polynomial::new(2, vec![(1.5, vec![3, 1]), (-2.0, vec![0, 2]), (0.5, vec![1, 0])]).unwrap();
        assert_eq!(p.polynomial_degree(), Some(4));
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]);
        let pb = LinearPullback::new(Arc::new(p), l).unwrap();
        let f = CylinderFunction::new(
            "pb",
            vec![DVector::from_column_slice(&[1.0, 0.0, 0.0]), DVector::from_column_slice(&[0.0, 0.6, 0.8])],
            Arc::new(pb),
        )
        .unwrap();
        check_derivatives(&f, &DVector::from_column_slice(&[0.7, -0.2, 0.4]));
    }

    #[test]
    fn composed_chain_rule() {
        for outer in [Outer::Tanh, Outer::Exp, Outer::Sin, Outer::Square] {
            let f = CylinderFunction::new(
                "g∘bump",
                vec![DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[0.0, 1.0])],
                Arc::new(Composed::new(outer, Arc::new(Bump { arity: 2, radius: 2.0 }))),
            )
            .unwrap();
            check_derivatives(&f, &DVector::from_column_slice(&[0.4, -0.9]));
        }
    }

    #[test]
    fn spec_parsing() {
        let s: FunctionSpec = toml::from_str("kind = \"cos_cylinder\"\ndirection = 1\nfrequency = 2.0").unwrap();
        assert_eq!(
            s,
            FunctionSpec::CosCylinder {
                direction: 1,
                frequency: 2.0,
                phase: 0.0
            }
        );
        assert!(s.build(1).is_err());
        assert!(s.build(2).is_ok());
    }
}
