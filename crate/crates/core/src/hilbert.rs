//! Finite-dimensional Hilbert space, self-adjoint operators stored
//! spectrally, the Cameron–Martin structure `H_R = R(H)` of a self-adjoint
//! `R`, and the white-noise / hat maps of a centred Gaussian measure.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::sampling::random_orthonormal;
use crate::{Error, Result};

/// Eigenvalues with `|λ| ≤ SPECTRAL_CUTOFF · max|λ|` are set to zero.
pub const SPECTRAL_CUTOFF: f64 = 1e-10;
/// Relative asymmetry accepted by [`SelfAdjointOp::from_matrix`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Relative kernel component accepted for range membership.
pub const RANGE_TOLERANCE: f64 = 1e-10;

/// `ℝⁿ` with the Euclidean inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteHilbert {
    dim: usize,
}

impl FiniteHilbert {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(x.dot(y))
    }

    pub fn norm(&self, x: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        Ok(x.norm())
    }

    pub fn check(&self, x: &DVector<f64>) -> Result<()> {
        check_dim(self.dim, x.len())
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim);
        e[i] = 1.0;
        e
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Symmetric operator on `ℝⁿ` stored as `U diag(λ) Uᵀ`.
///
/// Eigenvalues are sorted in decreasing order and tiny ones are truncated to
/// zero (see [`SPECTRAL_CUTOFF`]), which makes kernel and range decidable.
#[derive(Debug, Clone)]
pub struct SelfAdjointOp {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    matrix: DMatrix<f64>,
    nonnegative: bool,
    injective: bool,
}

/// JSON layout `{ "dim": n, "eigenvalues": [...], "eigenvectors": [[...]] }`.
///
/// `eigenvectors` is row-major: row `i` holds component `i` of every
/// eigenvector, so column `j` is the eigenvector of `eigenvalues[j]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SelfAdjointOp {
    pub fn from_matrix(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument(format!(
                "operator matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_dim_positive(a.nrows())?;
        let scale = a.norm();
        let asym = (a - a.transpose()).norm();
        let rel = if scale > 0.0 { asym / scale } else { 0.0 };
        if rel > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric {
                asymmetry: rel,
                tolerance: SYMMETRY_TOLERANCE,
            });
        }
        let sym = (a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        Ok(Self::assemble(eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors))
    }

    /// Builds `U diag(λ) Uᵀ` from eigenvalues and a frame whose columns are
    /// the eigenvectors.
    pub fn from_spectrum(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        check_dim_positive(n)?;
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: eigenvectors.nrows().max(eigenvectors.ncols()),
            });
        }
        let residual = (eigenvectors.transpose() * &eigenvectors - DMatrix::identity(n, n)).norm();
        if residual > 1e-10 {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self::assemble(eigenvalues, eigenvectors))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        check_dim_positive(n)?;
        Ok(Self::assemble(values.to_vec(), DMatrix::identity(n, n)))
    }

    pub fn identity(n: usize) -> Self {
        Self::assemble(vec![1.0; n], DMatrix::identity(n, n))
    }

    /// `U diag(values) Uᵀ` for a Haar-random frame `U` drawn from `seed`.
    pub fn rotated(values: &[f64], seed: u64) -> Result<Self> {
        let n = values.len();
        check_dim_positive(n)?;
        Ok(Self::assemble(values.to_vec(), random_orthonormal(n, seed)))
    }

    fn assemble(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Self {
        let n = eigenvalues.len();
        let max_abs = eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]).then(i.cmp(&j)));
        let mut values = Vec::with_capacity(n);
        let mut frame = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let l = eigenvalues[i];
            values.push(if l.abs() <= SPECTRAL_CUTOFF * max_abs { 0.0 } else { l });
            frame.set_column(col, &eigenvectors.column(i));
        }
        let diag = DMatrix::from_diagonal(&DVector::from_vec(values.clone()));
        let mut matrix = &frame * diag * frame.transpose();
        // exact symmetry of the cached matrix
        let t = matrix.transpose();
        matrix = (matrix + t) * 0.5;
        let nonnegative = values.iter().all(|&l| l >= 0.0);
        let injective = values.iter().all(|&l| l != 0.0);
        Self {
            eigenvalues: values,
            eigenvectors: frame,
            matrix,
            nonnegative,
            injective,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are the eigenvectors, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l != 0.0).count()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `Σᵢ ⟨A bᵢ, bᵢ⟩` over the columns of `basis`.
    pub fn trace_in_basis(&self, basis: &DMatrix<f64>) -> f64 {
        (0..basis.ncols())
            .map(|i| {
                let b = basis.column(i);
                (&self.matrix * b).dot(&b)
            })
            .sum()
    }

    pub fn op_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(&self.matrix * x)
    }

    /// Operator `U diag(f(λ)) Uᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Self::assemble(values, self.eigenvectors.clone())
    }

    /// Non-negative square root; requires a non-negative operator.
    pub fn sqrt(&self) -> Result<Self> {
        if let Some(&l) = self.eigenvalues.iter().find(|&&l| l < 0.0) {
            return Err(Error::NotNonNegative { value: l });
        }
        Ok(self.map_spectrum(f64::sqrt))
    }

    /// Spectral pseudo-inverse `U diag(λ⁺) Uᵀ`, `λ⁺ = 1/λ` off the kernel.
    pub fn pinv_matrix(&self) -> DMatrix<f64> {
        self.spectral_matrix(|l| if l != 0.0 { 1.0 / l } else { 0.0 })
    }

    pub fn kernel_projector(&self) -> DMatrix<f64> {
        self.spectral_matrix(|l| if l == 0.0 { 1.0 } else { 0.0 })
    }

    fn spectral_matrix(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| f(l)));
        let m = &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.transpose();
        let t = m.transpose();
        (m + t) * 0.5
    }

    pub fn to_json(&self) -> OperatorJson {
        let n = self.dim();
        OperatorJson {
            dim: n,
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: (0..n)
                .map(|i| (0..n).map(|j| self.eigenvectors[(i, j)]).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<Self> {
        let n = json.dim;
        check_dim(n, json.eigenvalues.len())?;
        check_dim(n, json.eigenvectors.len())?;
        for row in &json.eigenvectors {
            check_dim(n, row.len())?;
        }
        let frame = DMatrix::from_fn(n, n, |i, j| json.eigenvectors[i][j]);
        Self::from_spectrum(json.eigenvalues.clone(), frame)
    }
}

fn check_dim_positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The subspace `H_R = R(H)` with `⟨x, y⟩_{H_R} = ⟨R⁻¹x, R⁻¹y⟩_H`, where
/// `R⁻¹` is the pseudo-inverse (zero on `ker R`).
#[derive(Debug, Clone)]
pub struct CameronMartinStructure {
    r: SelfAdjointOp,
    pinv: DMatrix<f64>,
    ker_proj: DMatrix<f64>,
    range_proj: DMatrix<f64>,
    /// Eigenvectors with non-zero eigenvalue, as columns.
    range_basis: DMatrix<f64>,
    range_eigenvalues: Vec<f64>,
}

/// Builds the Cameron–Martin structure of `R`.
pub fn pseudo_inverse(r: &SelfAdjointOp) -> CameronMartinStructure {
    CameronMartinStructure::new(r.clone())
}

impl CameronMartinStructure {
    pub fn new(r: SelfAdjointOp) -> Self {
        let n = r.dim();
        let pinv = r.pinv_matrix();
        let ker_proj = r.kernel_projector();
        let range_proj = DMatrix::identity(n, n) - &ker_proj;
        let cols: Vec<usize> = (0..n).filter(|&j| r.eigenvalues()[j] != 0.0).collect();
        let mut range_basis = DMatrix::zeros(n, cols.len());
        for (k, &j) in cols.iter().enumerate() {
            range_basis.set_column(k, &r.eigenvectors().column(j));
        }
        let range_eigenvalues = cols.iter().map(|&j| r.eigenvalues()[j]).collect();
        Self {
            r,
            pinv,
            ker_proj,
            range_proj,
            range_basis,
            range_eigenvalues,
        }
    }

    pub fn from_matrix(r: &DMatrix<f64>) -> Result<Self> {
        Ok(Self::new(SelfAdjointOp::from_matrix(r)?))
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn rank(&self) -> usize {
        self.range_eigenvalues.len()
    }

    pub fn r(&self) -> &SelfAdjointOp {
        &self.r
    }

    pub fn r_matrix(&self) -> &DMatrix<f64> {
        self.r.matrix()
    }

    pub fn pinv(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    pub fn ker_proj(&self) -> &DMatrix<f64> {
        &self.ker_proj
    }

    pub fn range_proj(&self) -> &DMatrix<f64> {
        &self.range_proj
    }

    pub fn range_basis(&self) -> &DMatrix<f64> {
        &self.range_basis
    }

    pub fn range_eigenvalues(&self) -> &[f64] {
        &self.range_eigenvalues
    }

    /// `‖P_ker x‖ / ‖x‖` (zero for `x = 0`).
    pub fn kernel_ratio(&self, x: &DVector<f64>) -> f64 {
        let n = x.norm();
        if n == 0.0 {
            0.0
        } else {
            (&self.ker_proj * x).norm() / n
        }
    }

    pub fn check_in_range(&self, name: &str, x: &DVector<f64>) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        let ratio = self.kernel_ratio(x);
        if ratio > RANGE_TOLERANCE {
            return Err(Error::NotInRange {
                name: name.to_string(),
                ratio,
                tolerance: RANGE_TOLERANCE,
            });
        }
        Ok(())
    }

    pub fn apply_r(&self, x: &DVector<f64>) -> DVector<f64> {
        self.r.matrix() * x
    }

    pub fn apply_pinv(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.pinv * x
    }

    /// `⟨x, y⟩_{H_R}`; both arguments must lie in `R(H)`.
    pub fn cm_inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_in_range("x", x)?;
        self.check_in_range("y", y)?;
        Ok(self.apply_pinv(x).dot(&self.apply_pinv(y)))
    }

    pub fn cm_norm(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_in_range("x", x)?;
        Ok(self.apply_pinv(x).norm())
    }

    /// Isometric coordinates `c ↦ Σ cⱼ λⱼ uⱼ` from `ℝ^rank` onto `H_R`, so
    /// that `‖embed(c)‖_{H_R} = |c|`.
    pub fn embedding(&self) -> DMatrix<f64> {
        let mut e = self.range_basis.clone();
        for (j, &l) in self.range_eigenvalues.iter().enumerate() {
            e.column_mut(j).scale_mut(l);
        }
        e
    }
}

/// Relative residuals of the pseudo-inverse identities of a structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoInverseResiduals {
    /// `‖U diag(λ) Uᵀ − R‖ / ‖R‖` against the stored matrix.
    pub spectral: f64,
    /// `‖R R⁻¹ R − R‖ / ‖R‖`.
    pub r_pinv_r: f64,
    /// `‖R⁻¹ R − (Id − P_ker)‖`.
    pub pinv_r: f64,
    /// `‖R R⁻¹ − (Id − P_ker)‖`.
    pub r_pinv: f64,
    /// `‖R⁻¹ R R⁻¹ − R⁻¹‖ / ‖R⁻¹‖`.
    pub pinv_r_pinv: f64,
}

impl PseudoInverseResiduals {
    pub fn max(&self) -> f64 {
        self.spectral
            .max(self.r_pinv_r)
            .max(self.pinv_r)
            .max(self.r_pinv)
            .max(self.pinv_r_pinv)
    }
}

impl CameronMartinStructure {
    /// Residuals of the defining identities, computed by plain matrix
    /// products. `original` is the matrix `R` was built from.
    pub fn identity_residuals(&self, original: &DMatrix<f64>) -> PseudoInverseResiduals {
        let r = self.r_matrix();
        let rel = |m: DMatrix<f64>, scale: f64| if scale > 0.0 { m.norm() / scale } else { m.norm() };
        let rn = r.norm();
        let pn = self.pinv.norm();
        PseudoInverseResiduals {
            spectral: rel(r - original, original.norm()),
            r_pinv_r: rel(r * &self.pinv * r - r, rn),
            pinv_r: (&self.pinv * r - &self.range_proj).norm(),
            r_pinv: (r * &self.pinv - &self.range_proj).norm(),
            pinv_r_pinv: rel(&self.pinv * r * &self.pinv - &self.pinv, pn),
        }
    }
}

/// `⟨x, y⟩_{H_R}` for the structure `cm`.
pub fn cm_inner(cm: &CameronMartinStructure, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    cm.cm_inner(x, y)
}

/// Centred Gaussian measure `N(0, Q)` with its Cameron–Martin space
/// `K = Q^{1/2}(H)`.
#[derive(Debug, Clone)]
pub struct GaussianSpace {
    q: SelfAdjointOp,
    sqrt_q: SelfAdjointOp,
    cm: CameronMartinStructure,
}

impl GaussianSpace {
    pub fn new(q: SelfAdjointOp) -> Result<Self> {
        let sqrt_q = q.sqrt()?;
        let cm = CameronMartinStructure::new(sqrt_q.clone());
        Ok(Self { q, sqrt_q, cm })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn q(&self) -> &SelfAdjointOp {
        &self.q
    }

    pub fn sqrt_q(&self) -> &SelfAdjointOp {
        &self.sqrt_q
    }

    /// Cameron–Martin structure with `R = Q^{1/2}`.
    pub fn cameron_martin(&self) -> &CameronMartinStructure {
        &self.cm
    }

    pub fn is_degenerate(&self) -> bool {
        !self.q.is_injective()
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::Degenerate {
                kernel_dim: self.dim() - self.q.rank(),
                hint: "the white-noise map needs ker Q = {0}; use hat() on the Cameron-Martin range",
            })
        } else {
            Ok(())
        }
    }

    /// Vector `d` with `W_z(x) = ⟨x, d⟩`, namely `d = Q^{-1/2} z`.
    pub fn white_noise_direction(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_nondegenerate()?;
        check_dim(self.dim(), z.len())?;
        Ok(self.cm.apply_pinv(z))
    }

    /// `W_z(x) = ⟨Q^{-1/2} x, z⟩`.
    pub fn white_noise(&self, z: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.white_noise_direction(z)?.dot(x))
    }

    /// Vector `d` with `ĥ(x) = ⟨x, d⟩`, namely `d = (Q^{1/2})⁺(Q^{1/2})⁺ h`.
    pub fn hat_direction(&self, h: &DVector<f64>) -> Result<DVector<f64>> {
        self.cm.check_in_range("h", h)?;
        let p = self.cm.apply_pinv(h);
        Ok(self.cm.apply_pinv(&p))
    }

    /// `ĥ(x) = W_{Q^{-1/2}h}(x)` for `h ∈ Q^{1/2}(H)`; defined for degenerate
    /// `Q` as well, since samples of `N(0, Q)` lie in the range.
    pub fn hat(&self, h: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.hat_direction(h)?.dot(x))
    }
}

/// `W_z(x)` for the Gaussian measure with covariance `q`.
pub fn white_noise(q: &SelfAdjointOp, z: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    GaussianSpace::new(q.clone())?.white_noise(z, x)
}

/// `ĥ(x)` for the Gaussian measure with covariance `q`.
pub fn hat(q: &SelfAdjointOp, h: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    GaussianSpace::new(q.clone())?.hat(h, x)
}
