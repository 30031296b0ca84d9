//! Cylinder functions `F(x) = f(⟨x,h₁⟩ + o₁, …, ⟨x,hₘ⟩ + oₘ)` with analytic
//! derivatives, a library of test functions, and a finite-difference engine
//! used as an independent oracle.

mod fd;
mod library;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use fd::{
    central_directional, central_gradient, fd_directional, fd_gradient, fd_hessian, fd_jacobian_of_gradient, FDConfig,
};
pub use library::{
    standard_battery, standard_battery_specs, Bump, Composed, CosSinProduct, FunctionSpec, HolderCusp, Linear, LinearPullback, Outer,
    PolyTerm, Polynomial, Quadratic, Saturation, Trig,
};

use crate::hilbert::check_dim;
use crate::{Error, Result};

/// Growth class of a base function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundedness {
    Bounded,
    PolynomialGrowth,
}

/// The finite-dimensional profile `f: ℝᵐ → ℝ` of a cylinder function.
///
/// Implementations must be pure: evaluation may happen concurrently from
/// several threads.
pub trait BaseFunction: Send + Sync + fmt::Debug {
    fn arity(&self) -> usize;

    fn value(&self, y: &[f64]) -> f64;

    /// Writes `∂f/∂yᵢ` into `out`. Only called when `smoothness() ≥ 1`.
    fn gradient(&self, y: &[f64], out: &mut [f64]);

    /// Writes `∂²f/∂yᵢ∂yⱼ` into `out`. Only called when `smoothness() ≥ 2`.
    fn hessian(&self, y: &[f64], out: &mut DMatrix<f64>);

    /// 0 (continuous only), 1 or 2.
    fn smoothness(&self) -> usize {
        2
    }

    fn boundedness(&self) -> Boundedness;

    /// Total degree when `f` is a polynomial.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }

    /// Known bound on `sup |f|`.
    fn sup_bound(&self) -> Option<f64> {
        None
    }

    /// Known Lipschitz constant of `f` with respect to the Euclidean norm of `y`.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }
}

/// `F(x) = f(⟨x,h₁⟩ + o₁, …, ⟨x,hₘ⟩ + oₘ)`.
#[derive(Clone)]
pub struct CylinderFunction {
    name: String,
    directions: DMatrix<f64>,
    offsets: Vec<f64>,
    base: Arc<dyn BaseFunction>,
}

impl fmt::Debug for CylinderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderFunction")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("arity", &self.arity())
            .field("base", &self.base)
            .finish()
    }
}

impl CylinderFunction {
    /// `directions[i]` is `hᵢ`; all must share the ambient dimension.
    pub fn new(name: impl Into<String>, directions: Vec<DVector<f64>>, base: Arc<dyn BaseFunction>) -> Result<Self> {
        let m = directions.len();
        if m == 0 {
            return Err(Error::InvalidArgument("a cylinder function needs at least one direction".into()));
        }
        if base.arity() != m {
            return Err(Error::DimensionMismatch {
                expected: base.arity(),
                got: m,
            });
        }
        let n = directions[0].len();
        for d in &directions {
            check_dim(n, d.len())?;
        }
        let mut h = DMatrix::zeros(n, m);
        for (j, d) in directions.iter().enumerate() {
            h.set_column(j, d);
        }
        Ok(Self {
            name: name.into(),
            directions: h,
            offsets: vec![0.0; m],
            base,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.directions.nrows()
    }

    pub fn arity(&self) -> usize {
        self.directions.ncols()
    }

    /// `n × m` matrix whose columns are the directions.
    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn base(&self) -> &Arc<dyn BaseFunction> {
        &self.base
    }

    pub fn smoothness(&self) -> usize {
        self.base.smoothness()
    }

    pub fn boundedness(&self) -> Boundedness {
        self.base.boundedness()
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.base.sup_bound()
    }

    /// `x ↦ F(x + v)`.
    pub fn shifted(&self, v: &DVector<f64>) -> Result<Self> {
        check_dim(self.dim(), v.len())?;
        let mut out = self.clone();
        let proj = self.directions.tr_mul(v);
        for (o, p) in out.offsets.iter_mut().zip(proj.iter()) {
            *o += p;
        }
        Ok(out)
    }

    pub fn projections(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.projections_unchecked(x))
    }

    fn projections_unchecked(&self, x: &DVector<f64>) -> Vec<f64> {
        let m = self.arity();
        let mut y = vec![0.0; m];
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.directions.column(j).dot(x) + self.offsets[j];
        }
        y
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.value(x))
    }

    /// Evaluation without the dimension check (panics on mismatch).
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.base.value(&self.projections_unchecked(x))
    }

    fn require(&self, need: usize) -> Result<()> {
        if self.smoothness() < need {
            Err(Error::Smoothness {
                name: self.name.clone(),
                have: self.smoothness(),
                need,
            })
        } else {
            Ok(())
        }
    }

    /// Partial derivatives of the profile at the projections of `x`.
    pub fn base_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.require(1)?;
        check_dim(self.dim(), x.len())?;
        let y = self.projections_unchecked(x);
        let mut g = vec![0.0; self.arity()];
        self.base.gradient(&y, &mut g);
        Ok(DVector::from_vec(g))
    }

    /// `∇F(x) = Σᵢ ∂ᵢf · hᵢ`.
    pub fn grad_full(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.base_gradient(x)?;
        Ok(&self.directions * g)
    }

    /// `∇²F(x) = Σᵢⱼ ∂ᵢⱼf · hᵢ ⊗ hⱼ`.
    pub fn hess_full(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.require(2)?;
        check_dim(self.dim(), x.len())?;
        let y = self.projections_unchecked(x);
        let m = self.arity();
        let mut h = DMatrix::zeros(m, m);
        self.base.hessian(&y, &mut h);
        let full = &self.directions * h * self.directions.transpose();
        let t = full.transpose();
        Ok((full + t) * 0.5)
    }
}

/// `F(x)`.
pub fn evaluate(f: &CylinderFunction, x: &DVector<f64>) -> Result<f64> {
    f.evaluate(x)
}

/// Full Fréchet gradient `∇F(x)`.
pub fn grad_full(f: &CylinderFunction, x: &DVector<f64>) -> Result<DVector<f64>> {
    f.grad_full(x)
}

/// Full Hessian `∇²F(x)`.
pub fn hess_full(f: &CylinderFunction, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    f.hess_full(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn evaluate_examples() {
        let lin = FunctionSpec::Linear {
            direction: None,
            vector: Some(vec![1.0, 1.0]),
        }
        .build(2)
        .unwrap();
        assert_abs_diff_eq!(lin.evaluate(&v(&[1.0, 1.0])).unwrap(), 2.0);

        let c = FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        }
        .build(2)
        .unwrap();
        assert_abs_diff_eq!(c.evaluate(&v(&[0.0, 0.0])).unwrap(), 1.0);

        // (⟨·,e₁⟩)² ⟨·,e₂⟩
        let p = CylinderFunction::new(
            "x1^2 x2",
            vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])],
            Arc::new(Polynomial::new(2, vec![(1.0, vec![2, 1])]).unwrap()),
        )
        .unwrap();
        assert_abs_diff_eq!(p.evaluate(&v(&[2.0, 3.0])).unwrap(), 12.0);
    }

    #[test]
    fn dimension_mismatch() {
        let c = FunctionSpec::NormSqHalf.build(3).unwrap();
        assert!(matches!(
            c.evaluate(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn grad_and_hess_examples() {
        let a = v(&[0.5, -2.0, 1.0]);
        let lin = FunctionSpec::Linear {
            direction: None,
            vector: Some(a.iter().copied().collect()),
        }
        .build(3)
        .unwrap();
        let x = v(&[0.3, 0.1, -4.0]);
        assert_abs_diff_eq!(lin.grad_full(&x).unwrap(), a, epsilon = 1e-15);
        assert_abs_diff_eq!(lin.hess_full(&x).unwrap(), DMatrix::zeros(3, 3), epsilon = 1e-15);

        let q = FunctionSpec::NormSqHalf.build(3).unwrap();
        assert_abs_diff_eq!(q.grad_full(&x).unwrap(), x, epsilon = 1e-15);
        assert_abs_diff_eq!(q.hess_full(&x).unwrap(), DMatrix::identity(3, 3), epsilon = 1e-15);

        let c = FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        }
        .build(2)
        .unwrap();
        let h = c.hess_full(&v(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(h, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn cos_sin_gradient_vanishes() {
        let f = FunctionSpec::CosSinProduct { first: 0, second: 1 }.build(2).unwrap();
        let x = v(&[std::f64::consts::FRAC_PI_2, 0.0]);
        let g = f.grad_full(&x).unwrap();
        assert_abs_diff_eq!(g, v(&[0.0, 0.0]), epsilon = 1e-15);
        let fd = fd_gradient(&f, &x, &FDConfig::default()).unwrap();
        assert_abs_diff_eq!(fd, v(&[0.0, 0.0]), epsilon = 1e-9);
    }

    #[test]
    fn smoothness_errors() {
        let cusp = FunctionSpec::HolderCusp {
            direction: 0,
            alpha: 0.5,
        }
        .build(2)
        .unwrap();
        assert!(matches!(cusp.grad_full(&v(&[0.1, 0.0])), Err(Error::Smoothness { need: 1, .. })));
        let sat = CylinderFunction::new(
            "lin",
            vec![v(&[1.0, 0.0])],
            Arc::new(Composed::new(Outer::Tanh, Arc::new(Linear)).with_smoothness(1)),
        )
        .unwrap();
        assert!(sat.grad_full(&v(&[0.1, 0.0])).is_ok());
        assert!(matches!(sat.hess_full(&v(&[0.1, 0.0])), Err(Error::Smoothness { need: 2, .. })));
    }

    #[test]
    fn shift_moves_argument() {
        let f = FunctionSpec::CosSinProduct { first: 0, second: 1 }.build(3).unwrap();
        let s = v(&[0.2, -0.7, 5.0]);
        let g = f.shifted(&s).unwrap();
        let x = v(&[1.0, 0.5, -0.3]);
        assert_abs_diff_eq!(g.value(&x), f.value(&(&x + &s)), epsilon = 1e-15);
    }
}
