//! Subspace gradients along a self-adjoint `R`.
//!
//! * `∇_R F(x) = R ∇F(x)`, the Riesz representative in `H` of `v ↦ D_{Rv}F(x)`.
//! * `∇_{H_R} F(x) = R² ∇F(x)`, the Riesz representative in `H_R`.
//!
//! Second-order versions are `R ∇²F R` on `H` and `R² ∇²F` on `H_R`. The
//! transport `Tₙ A = R A(R⁻¹·, …, R⁻¹·)` carries forms over `(ker R)^⊥` to
//! forms over `H_R` isometrically. Everything is computed from `∇F`, `∇²F`;
//! the finite-difference checks in [`verify_relations`] are the oracle.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::functions::{central_directional, CylinderFunction, FDConfig};
use crate::hilbert::{check_dim, CameronMartinStructure};
use crate::sampling::NormalStream;
use crate::{Error, Result};

/// Convergence threshold of the power iteration in [`MultilinearForm::norm`].
pub const POWER_TOLERANCE: f64 = 1e-10;
/// Random restarts of the power iteration.
pub const POWER_RESTARTS: usize = 10;
const POWER_MAX_ITER: usize = 5000;
/// Relative kernel mass accepted by [`transport_tn`].
pub const KERNEL_SUPPORT_TOLERANCE: f64 = 1e-8;

/// Inner-product structure a form is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Euclidean `H` (or the subspace `(ker R)^⊥` with the same norm).
    Ambient,
    /// `H_R` with `⟨x, y⟩ = ⟨R⁻¹x, R⁻¹y⟩`.
    CameronMartin,
}

/// `k`-linear map `Hᵏ → H`, `k ≤ 2`, stored densely.
///
/// Entry `(o, i₁, …, i_k)` lives at `o + n·i₁ + n²·i₂`. Order 0 is a vector,
/// order 1 a matrix (`o` is the row), order 2 an `n × n × n` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearForm {
    order: usize,
    dim: usize,
    data: Vec<f64>,
    geometry: Geometry,
}

impl MultilinearForm {
    pub fn vector(v: DVector<f64>, geometry: Geometry) -> Self {
        Self {
            order: 0,
            dim: v.len(),
            data: v.as_slice().to_vec(),
            geometry,
        }
    }

    pub fn matrix(m: DMatrix<f64>, geometry: Geometry) -> Result<Self> {
        check_dim(m.nrows(), m.ncols())?;
        Ok(Self {
            order: 1,
            dim: m.nrows(),
            data: m.as_slice().to_vec(),
            geometry,
        })
    }

    /// Order-2 form from `f(o, i, j)`.
    pub fn tensor3(dim: usize, geometry: Geometry, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim * dim];
        for j in 0..dim {
            for i in 0..dim {
                for o in 0..dim {
                    data[o + dim * i + dim * dim * j] = f(o, i, j);
                }
            }
        }
        Self {
            order: 2,
            dim,
            data,
            geometry,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn as_vector(&self) -> Option<DVector<f64>> {
        (self.order == 0).then(|| DVector::from_column_slice(&self.data))
    }

    pub fn as_matrix(&self) -> Option<DMatrix<f64>> {
        (self.order == 1).then(|| DMatrix::from_column_slice(self.dim, self.dim, &self.data))
    }

    /// Entry `(o, i, j)` of an order-2 form.
    pub fn entry3(&self, o: usize, i: usize, j: usize) -> f64 {
        self.data[o + self.dim * i + self.dim * self.dim * j]
    }

    /// `A(v₁, …, v_k)`.
    pub fn apply(&self, args: &[&DVector<f64>]) -> Result<DVector<f64>> {
        if args.len() != self.order {
            return Err(Error::InvalidArgument(format!(
                "form of order {} applied to {} arguments",
                self.order,
                args.len()
            )));
        }
        for a in args {
            check_dim(self.dim, a.len())?;
        }
        Ok(match self.order {
            0 => self.as_vector().unwrap(),
            1 => self.as_matrix().unwrap() * args[0],
            _ => self.contract2(args[0], args[1]),
        })
    }

    fn contract2(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for j in 0..n {
            for i in 0..n {
                let w = u[i] * v[j];
                if w != 0.0 {
                    for o in 0..n {
                        out[o] += self.data[o + n * i + n * n * j] * w;
                    }
                }
            }
        }
        out
    }

    /// Largest deviation from symmetry in the arguments (order 2 only; 0
    /// otherwise). Order-1 forms are endomorphisms and need not be symmetric.
    pub fn asymmetry(&self) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        let n = self.dim;
        let mut worst = 0.0_f64;
        for o in 0..n {
            for i in 0..n {
                for j in 0..i {
                    worst = worst.max((self.entry3(o, i, j) - self.entry3(o, j, i)).abs());
                }
            }
        }
        worst
    }

    /// `|A|_F` (Frobenius norm of the coefficient array).
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius mass of `A` on `ker R` in any slot, relative to `|A|_F`.
    pub fn kernel_mass(&self, cm: &CameronMartinStructure) -> f64 {
        let total = self.frobenius();
        if total == 0.0 {
            return 0.0;
        }
        let p = cm.ker_proj();
        let mut worst = 0.0_f64;
        for slot in 0..=self.order {
            worst = worst.max(self.contract_slot(p, slot).frobenius());
        }
        worst / total
    }

    /// Applies `m` to slot `slot` (0 = output, `s ≥ 1` = argument `s`),
    /// i.e. `(mᵀ)` on arguments, `m` on the output.
    fn contract_slot(&self, m: &DMatrix<f64>, slot: usize) -> MultilinearForm {
        let n = self.dim;
        let mut out = self.clone();
        match (self.order, slot) {
            (0, _) => {
                out.data = (m * self.as_vector().unwrap()).as_slice().to_vec();
            }
            (1, 0) => out.data = (m * self.as_matrix().unwrap()).as_slice().to_vec(),
            (1, _) => out.data = (self.as_matrix().unwrap() * m).as_slice().to_vec(),
            _ => {
                out = MultilinearForm::tensor3(n, self.geometry, |o, i, j| {
                    (0..n)
                        .map(|k| match slot {
                            0 => m[(o, k)] * self.entry3(k, i, j),
                            1 => self.entry3(o, k, j) * m[(k, i)],
                            _ => self.entry3(o, i, k) * m[(k, j)],
                        })
                        .sum()
                });
            }
        }
        out
    }

    /// Coordinate version `C` with `‖A‖ = sup |C(c₁,…)|` over Euclidean unit
    /// `cᵢ`: arguments are parametrised isometrically and outputs are mapped
    /// to isometric coordinates.
    fn coordinates(&self, cm: Option<&CameronMartinStructure>) -> Result<(MultilinearForm, DMatrix<f64>)> {
        let n = self.dim;
        match (self.geometry, cm) {
            (Geometry::Ambient, _) => Ok((self.clone(), DMatrix::identity(n, n))),
            (Geometry::CameronMartin, None) => Err(Error::InvalidArgument(
                "a Cameron-Martin form needs the structure to measure its norm".into(),
            )),
            (Geometry::CameronMartin, Some(cm)) => {
                check_dim(cm.dim(), n)?;
                let out = self.contract_slot(cm.pinv(), 0);
                Ok((out, cm.embedding()))
            }
        }
    }

    /// Operator norm `sup ‖A(v₁,…,v_k)‖` over unit `vᵢ` in the form's
    /// geometry: the top singular value for order 1; for order 2 alternating
    /// maximisation with [`POWER_RESTARTS`] random restarts and relative
    /// convergence threshold [`POWER_TOLERANCE`]. `cm` is required for
    /// [`Geometry::CameronMartin`].
    pub fn norm(&self, cm: Option<&CameronMartinStructure>, seed: u64) -> Result<f64> {
        let (c, emb) = self.coordinates(cm)?;
        let k = emb.ncols();
        if k == 0 {
            return Ok(if self.order == 0 { c.frobenius() } else { 0.0 });
        }
        Ok(match self.order {
            0 => c.frobenius(),
            1 => {
                let m = c.as_matrix().unwrap() * &emb;
                m.singular_values().max()
            }
            _ => power_norm_bilinear(&c, &emb, seed),
        })
    }
}

fn power_norm_bilinear(c: &MultilinearForm, emb: &DMatrix<f64>, seed: u64) -> f64 {
    let k = emb.ncols();
    let n = c.dim();
    // slice matrices in coordinates: M_v = C(·, E v) E, M_u = C(E u, ·) E
    let apply_fixed = |fixed: &DVector<f64>, second: bool| -> DMatrix<f64> {
        let x = emb * fixed;
        let mut m = DMatrix::zeros(n, k);
        for col in 0..k {
            let e = emb.column(col).into_owned();
            let y = if second { c.contract2(&e, &x) } else { c.contract2(&x, &e) };
            m.set_column(col, &y);
        }
        m
    };
    let mut stream = NormalStream::new(seed);
    let mut best = 0.0_f64;
    for _ in 0..POWER_RESTARTS {
        let mut u = stream.unit_vector(k);
        let mut v = stream.unit_vector(k);
        let mut value = 0.0;
        for _ in 0..POWER_MAX_ITER {
            let mv = apply_fixed(&v, true);
            u = top_right_singular(&mv, &u);
            let mu = apply_fixed(&u, false);
            v = top_right_singular(&mu, &v);
            let next = (&mu * &v).norm();
            let done = (next - value).abs() <= POWER_TOLERANCE * next.max(f64::MIN_POSITIVE);
            value = next;
            if done {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

/// Right singular vector of the largest singular value, signed to agree
/// with `start`.
fn top_right_singular(m: &DMatrix<f64>, start: &DVector<f64>) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let v = vt.row(i).transpose();
    if v.dot(start) < 0.0 {
        -v
    } else {
        v
    }
}

/// `∇_R F(x) = R ∇F(x)`.
pub fn grad_r(f: &CylinderFunction, x: &DVector<f64>, cm: &CameronMartinStructure) -> Result<DVector<f64>> {
    check_dim(cm.dim(), f.dim())?;
    Ok(cm.apply_r(&f.grad_full(x)?))
}

/// `∇_{H_R} F(x) = R² ∇F(x)`.
pub fn grad_hr(f: &CylinderFunction, x: &DVector<f64>, cm: &CameronMartinStructure) -> Result<DVector<f64>> {
    check_dim(cm.dim(), f.dim())?;
    Ok(cm.apply_r(&cm.apply_r(&f.grad_full(x)?)))
}

/// `∇²_R F(x) = R ∇²F(x) R` as an order-1 form on `H`.
pub fn hess_r(f: &CylinderFunction, x: &DVector<f64>, cm: &CameronMartinStructure) -> Result<MultilinearForm> {
    check_dim(cm.dim(), f.dim())?;
    let r = cm.r_matrix();
    let h = f.hess_full(x)?;
    let m = r * h * r;
    let t = m.transpose();
    MultilinearForm::matrix((m + t) * 0.5, Geometry::Ambient)
}

/// `∇²_{H_R} F(x) = R² ∇²F(x)` restricted to `H_R` (zero on `ker R`), as an
/// order-1 form on `H_R`.
pub fn hess_hr(f: &CylinderFunction, x: &DVector<f64>, cm: &CameronMartinStructure) -> Result<MultilinearForm> {
    check_dim(cm.dim(), f.dim())?;
    let r = cm.r_matrix();
    let m = r * r * f.hess_full(x)? * cm.range_proj();
    MultilinearForm::matrix(m, Geometry::CameronMartin)
}

/// `∇²_{H_R} F(x)` assembled from central differences of [`grad_hr`] along
/// an `H_R`-orthonormal frame of the range.
pub fn fd_hess_hr(f: &CylinderFunction, x: &DVector<f64>, cm: &CameronMartinStructure, cfg: &FDConfig) -> Result<MultilinearForm> {
    let e = cm.embedding();
    let n = cm.dim();
    let rank = e.ncols();
    let mut cols = DMatrix::zeros(n, rank);
    for j in 0..rank {
        let dir = e.column(j).into_owned();
        let h = match cfg.step {
            Some(h) => h,
            None => f64::EPSILON.cbrt() * (1.0 + x.norm()) / dir.norm(),
        };
        let gp = grad_hr(f, &(x + &dir * h), cm)?;
        let gm = grad_hr(f, &(x - &dir * h), cm)?;
        cols.set_column(j, &((gp - gm) / (2.0 * h)));
    }
    // coordinates of v ∈ H_R in the frame E are Λ⁻¹ Uᵣᵀ v
    let mut coord = cm.range_basis().transpose();
    for (j, &l) in cm.range_eigenvalues().iter().enumerate() {
        coord.row_mut(j).scale_mut(1.0 / l);
    }
    MultilinearForm::matrix(cols * coord, Geometry::CameronMartin)
}

/// `(Tₙ A)(v₁,…,vₙ) = R A(R⁻¹v₁,…,R⁻¹vₙ)` for `n = A.order() ∈ {0,1,2}`.
///
/// `A` must live on `(ker R)^⊥` in every slot; the result is measured in
/// `H_R` and `‖TₙA‖_{H_R} = ‖A‖_H`.
pub fn transport_tn(a: &MultilinearForm, cm: &CameronMartinStructure) -> Result<MultilinearForm> {
    check_dim(cm.dim(), a.dim())?;
    let ratio = a.kernel_mass(cm);
    if ratio > KERNEL_SUPPORT_TOLERANCE {
        return Err(Error::KernelSupport { ratio });
    }
    let mut out = a.contract_slot(cm.r_matrix(), 0);
    for slot in 1..=a.order() {
        out = out.contract_slot(cm.pinv(), slot);
    }
    Ok(out.with_geometry(Geometry::CameronMartin))
}

/// Residuals of every relation between the two gradients at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationResiduals {
    /// `max(|∇_{H_R} − R∇_R|, |∇_{H_R} − R²∇F|)` relative to `|∇_{H_R}| + 1`.
    pub chain: f64,
    /// `|‖∇_R‖_H − ‖∇_{H_R}‖_{H_R}|`.
    pub norm_equality: f64,
    /// `max_v |⟨∇_R, v⟩ − ⟨R⁻¹∇_{H_R}, v⟩|` over random unit `v`.
    pub duality: f64,
    /// `|T₀(∇_R) − ∇_{H_R}|`.
    pub transport0: f64,
    /// `|‖T₀∇_R‖_{H_R} − ‖∇_R‖_H|`.
    pub isometry0: f64,
    /// `|‖T₁∇²_R‖_{H_R} − ‖∇²_R‖_H|` (0 when `F` is only `C¹`).
    pub isometry1: f64,
    /// `|T₁(∇²_R) − ∇²_{H_R}|` against the analytic `R²∇²F`.
    pub transport1: f64,
    /// `|T₁(∇²_R) − FD ∇²_{H_R}|` relative to `1 + |∇²_{H_R}|`.
    pub transport1_fd: f64,
    /// `max_v |D_{Rv}F(x) − ⟨∇_R, v⟩|` (central FD quotient).
    pub quotient_fd: f64,
    /// `max_h |D_hF(x) − ⟨∇_{H_R}, h⟩_{H_R}|`, `h ∈ H_R` unit.
    pub cm_quotient_fd: f64,
    /// `max_{v ∈ ker R} |⟨∇_R, v⟩| + |∇²_R v|` (exact, by construction).
    pub kernel_exact: f64,
    /// `max_{v ∈ ker R} |D_{Rv}F|` and `|D_{Rv}∇F·R|` by FD.
    pub kernel_fd: f64,
}

impl RelationResiduals {
    /// Largest analytic residual.
    pub fn analytic(&self) -> f64 {
        self.chain
            .max(self.norm_equality)
            .max(self.duality)
            .max(self.transport0)
            .max(self.isometry0)
            .max(self.isometry1)
            .max(self.transport1)
    }

    /// Largest finite-difference residual.
    pub fn fd(&self) -> f64 {
        self.transport1_fd.max(self.quotient_fd).max(self.cm_quotient_fd)
    }
}

/// Evaluates [`RelationResiduals`] for `F` at `x`, drawing `probes` random
/// test directions from `seed`.
pub fn verify_relations(
    f: &CylinderFunction,
    x: &DVector<f64>,
    cm: &CameronMartinStructure,
    probes: usize,
    seed: u64,
) -> Result<RelationResiduals> {
    let n = cm.dim();
    let cfg = FDConfig::default();
    let g = f.grad_full(x)?;
    let gr = grad_r(f, x, cm)?;
    let ghr = grad_hr(f, x, cm)?;
    let scale = 1.0 + ghr.norm();
    let chain = ((&ghr - cm.apply_r(&gr)).norm()).max((&ghr - cm.apply_r(&cm.apply_r(&g))).norm()) / scale;
    let norm_equality = (gr.norm() - cm.cm_norm(&ghr)?).abs();

    let mut stream = NormalStream::new(seed);
    let pinv_ghr = cm.apply_pinv(&ghr);
    let emb = cm.embedding();
    let value = |y: &DVector<f64>| f.value(y);
    let mut duality = 0.0_f64;
    let mut quotient_fd = 0.0_f64;
    let mut cm_quotient_fd = 0.0_f64;
    for _ in 0..probes {
        let v = stream.unit_vector(n);
        duality = duality.max((gr.dot(&v) - pinv_ghr.dot(&v)).abs());
        let rv = cm.apply_r(&v);
        let q = central_directional(value, x, &rv, &cfg);
        quotient_fd = quotient_fd.max((q - gr.dot(&v)).abs() / (1.0 + rv.norm()));
        if emb.ncols() > 0 {
            let h = &emb * stream.unit_vector(emb.ncols());
            let q = central_directional(value, x, &h, &cfg);
            cm_quotient_fd = cm_quotient_fd.max((q - cm.cm_inner(&ghr, &h)?).abs() / (1.0 + h.norm()));
        }
    }

    let t0 = transport_tn(&MultilinearForm::vector(gr.clone(), Geometry::Ambient), cm)?;
    let t0v = t0.as_vector().unwrap();
    let transport0 = (&t0v - &ghr).norm() / scale;
    let isometry0 = (t0.norm(Some(cm), seed)? - gr.norm()).abs();

    let mut kernel_exact = 0.0_f64;
    let mut kernel_fd = 0.0_f64;
    let ker = cm.ker_proj();
    let kernel_probe = |stream: &mut NormalStream| {
        let v = ker * stream.normal_vector(n);
        let nv = v.norm();
        (nv > 1e-12).then(|| v / nv)
    };

    let (isometry1, transport1, transport1_fd) = if f.smoothness() >= 2 {
        let hr = hess_r(f, x, cm)?;
        let t1 = transport_tn(&hr, cm)?;
        let hhr = hess_hr(f, x, cm)?;
        let fd = fd_hess_hr(f, x, cm, &cfg)?;
        let t1m = t1.as_matrix().unwrap();
        let hscale = 1.0 + hhr.as_matrix().unwrap().norm();
        let iso = (t1.norm(Some(cm), seed)? - hr.norm(None, seed)?).abs();
        let tr = (&t1m - hhr.as_matrix().unwrap()).norm() / hscale;
        let trfd = (&t1m - fd.as_matrix().unwrap()).norm() / hscale;
        let hm = hr.as_matrix().unwrap();
        for _ in 0..probes.min(16) {
            if let Some(v) = kernel_probe(&mut stream) {
                kernel_exact = kernel_exact.max((&hm * &v).norm());
                // D_{Rv} of ∇_R F by central differences
                let rv = cm.apply_r(&v);
                for k in 0..n {
                    let ek = cm.apply_r(&DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }));
                    let d = central_directional(|y| f.grad_full(y).map(|g| g.dot(&ek)).unwrap_or(f64::NAN), x, &rv, &cfg);
                    kernel_fd = kernel_fd.max(d.abs());
                }
            }
        }
        (iso, tr, trfd)
    } else {
        (0.0, 0.0, 0.0)
    };

    for _ in 0..probes.min(16) {
        if let Some(v) = kernel_probe(&mut stream) {
            kernel_exact = kernel_exact.max(gr.dot(&v).abs());
            let rv = cm.apply_r(&v);
            kernel_fd = kernel_fd.max(central_directional(value, x, &rv, &cfg).abs());
        }
    }

    Ok(RelationResiduals {
        chain,
        norm_equality,
        duality,
        transport0,
        isometry0,
        isometry1,
        transport1,
        transport1_fd,
        quotient_fd,
        cm_quotient_fd,
        kernel_exact,
        kernel_fd,
    })
}

/// Defining-quotient errors `|(F(x + sRv) − F(x))/s − ⟨∇_R F(x), v⟩|` for each
/// `s` in `steps`, and the least-squares slope of `log err` against `log s`.
pub fn quotient_convergence(
    f: &CylinderFunction,
    x: &DVector<f64>,
    v: &DVector<f64>,
    cm: &CameronMartinStructure,
    steps: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let gr = grad_r(f, x, cm)?;
    check_dim(cm.dim(), v.len())?;
    let rv = cm.apply_r(v);
    let target = gr.dot(v);
    let fx = f.value(x);
    let errs: Vec<f64> = steps
        .iter()
        .map(|&s| ((f.value(&(x + &rv * s)) - fx) / s - target).abs())
        .collect();
    Ok((errs.clone(), loglog_slope(steps, &errs)))
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
