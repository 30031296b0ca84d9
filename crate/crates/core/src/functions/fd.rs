use nalgebra::{DMatrix, DVector};

use super::CylinderFunction;
use crate::hilbert::check_dim;
use crate::Result;

/// Central-difference settings. With `step = None` the step is chosen as
/// `ε^{1/3}(1 + ‖x‖)` for first derivatives and `ε^{1/4}(1 + ‖x‖)` for
/// second derivatives of values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FDConfig {
    pub step: Option<f64>,
}

impl FDConfig {
    pub fn with_step(step: f64) -> Self {
        Self { step: Some(step) }
    }

    fn first(&self, x: &DVector<f64>) -> f64 {
        self.step.unwrap_or_else(|| f64::EPSILON.cbrt() * (1.0 + x.norm()))
    }

    fn second(&self, x: &DVector<f64>) -> f64 {
        self.step
            .unwrap_or_else(|| f64::EPSILON.sqrt().sqrt() * (1.0 + x.norm()))
    }
}

/// `(g(x + hv) − g(x − hv)) / 2h` for any scalar map `g`.
pub fn central_directional<G: Fn(&DVector<f64>) -> f64>(g: G, x: &DVector<f64>, v: &DVector<f64>, cfg: &FDConfig) -> f64 {
    let vn = v.norm();
    if vn == 0.0 {
        return 0.0;
    }
    let h = match cfg.step {
        Some(h) => h,
        None => cfg.first(x) / vn,
    };
    (g(&(x + v * h)) - g(&(x - v * h))) / (2.0 * h)
}

/// Central-difference gradient of any scalar map.
pub fn central_gradient<G: Fn(&DVector<f64>) -> f64>(g: G, x: &DVector<f64>, cfg: &FDConfig) -> DVector<f64> {
    let h = cfg.first(x);
    let mut xp = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = g(&xp);
        xp[i] = xi - h;
        let fm = g(&xp);
        xp[i] = xi;
        (fp - fm) / (2.0 * h)
    })
}

/// `D_v F(x)` by central differences.
pub fn fd_directional(f: &CylinderFunction, x: &DVector<f64>, v: &DVector<f64>, cfg: &FDConfig) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), v.len())?;
    Ok(central_directional(|y| f.value(y), x, v, cfg))
}

/// `∇F(x)` by central differences along the standard basis.
pub fn fd_gradient(f: &CylinderFunction, x: &DVector<f64>, cfg: &FDConfig) -> Result<DVector<f64>> {
    check_dim(f.dim(), x.len())?;
    Ok(central_gradient(|y| f.value(y), x, cfg))
}

/// `∇²F(x)` from values only (four-point mixed differences).
pub fn fd_hessian(f: &CylinderFunction, x: &DVector<f64>, cfg: &FDConfig) -> Result<DMatrix<f64>> {
    check_dim(f.dim(), x.len())?;
    let n = x.len();
    let h = cfg.second(x);
    let mut out = DMatrix::zeros(n, n);
    let mut y = x.clone();
    let f0 = f.value(x);
    for i in 0..n {
        y[i] = x[i] + h;
        let fp = f.value(&y);
        y[i] = x[i] - h;
        let fm = f.value(&y);
        y[i] = x[i];
        out[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * h;
                let v = f.value(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// `∇²F(x)` as the central-difference Jacobian of the analytic gradient,
/// symmetrised. More accurate than [`fd_hessian`] when `F` is `C¹`.
pub fn fd_jacobian_of_gradient(f: &CylinderFunction, x: &DVector<f64>, cfg: &FDConfig) -> Result<DMatrix<f64>> {
    check_dim(f.dim(), x.len())?;
    let n = x.len();
    let h = cfg.first(x);
    let mut out = DMatrix::zeros(n, n);
    let mut y = x.clone();
    for i in 0..n {
        y[i] = x[i] + h;
        let gp = f.grad_full(&y)?;
        y[i] = x[i] - h;
        let gm = f.grad_full(&y)?;
        y[i] = x[i];
        out.set_column(i, &((gp - gm) / (2.0 * h)));
    }
    let t = out.transpose();
    Ok((out + t) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionSpec;

    #[test]
    fn value_hessian_of_quadratic() {
        let f = FunctionSpec::QuadraticForm {
            eigenvalues: vec![2.0, 1.0, -0.5],
            rotation_seed: Some(3),
        }
        .build(3)
        .unwrap();
        let x = DVector::from_column_slice(&[0.2, -1.0, 0.7]);
        let h = fd_hessian(&f, &x, &FDConfig::default()).unwrap();
        let exact = f.hess_full(&x).unwrap();
        assert!((h - exact).amax() < 1e-5);
    }

    #[test]
    fn directional_matches_gradient() {
        let f = FunctionSpec::CosSinProduct { first: 0, second: 2 }.build(3).unwrap();
        let x = DVector::from_column_slice(&[0.4, 0.0, -1.1]);
        let v = DVector::from_column_slice(&[3.0, 1.0, -2.0]);
        let d = fd_directional(&f, &x, &v, &FDConfig::default()).unwrap();
        let exact = f.grad_full(&x).unwrap().dot(&v);
        assert!((d - exact).abs() < 1e-8);
    }
}
