//! Malliavin derivative of smooth cylinder random variables in the two
//! pictures, Wiener-chaos expansion, Sobolev norms and integration by parts.
//!
//! A [`SmoothRandomVariable`] is `F = f(W(z₁), …, W(zₘ))` with directions
//! orthonormal in the indexing space `𝓗`:
//!
//! * [`Picture::Cdp`]: `𝓗 = H`, `W = W_z`, and `DF = Q^{1/2}∇F`;
//! * [`Picture::Gross`]: `𝓗 = Q^{1/2}(H)` with the Cameron–Martin product,
//!   `W(h) = ĥ`, and `DF = Q∇F`.
//!
//! The same `F` written in both pictures (`h = Q^{1/2}z`) has
//! `D_Gross F = Q^{1/2} D_Cdp F`.

mod chaos;
mod hermite;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use chaos::{
    chaos_project, domain_check, multi_indices, nodes_per_axis, ChaosCoefficient, ChaosExpansion, DomainCheck, ANALYTIC_TAIL_FLAG,
    MAX_ARITY, MAX_DEGREE, POLYNOMIAL_TAIL_FLAG,
};
pub use hermite::{gauss_hermite, hermite_values, GaussHermite};

use crate::functions::{BaseFunction, CylinderFunction, LinearPullback};
use crate::hilbert::{check_dim, GaussianSpace};
use crate::sampling::{monte_carlo, Estimate, GaussianSampler};
use crate::{Error, Result};

/// Gram residual accepted for orthonormal directions.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    /// Cannarsa–Da Prato: `𝓗 = H`, white-noise map `W_z`.
    Cdp,
    /// Gross: `𝓗 = Q^{1/2}(H)`, map `h ↦ ĥ`.
    Gross,
}

/// `F(x) = f(W(z₁)(x), …, W(zₘ)(x))` over `x ~ N(0, Q)`.
#[derive(Debug, Clone)]
pub struct SmoothRandomVariable {
    space: Arc<GaussianSpace>,
    picture: Picture,
    directions: Vec<DVector<f64>>,
    base: Arc<dyn BaseFunction>,
    cylinder: CylinderFunction,
}

impl SmoothRandomVariable {
    /// Directions must be orthonormal in `𝓗` (Gram residual at most
    /// [`ORTHONORMAL_TOLERANCE`]).
    pub fn new(
        name: impl Into<String>,
        space: Arc<GaussianSpace>,
        picture: Picture,
        directions: Vec<DVector<f64>>,
        base: Arc<dyn BaseFunction>,
    ) -> Result<Self> {
        if directions.len() != base.arity() {
            return Err(Error::DimensionMismatch {
                expected: base.arity(),
                got: directions.len(),
            });
        }
        let mut noise = Vec::with_capacity(directions.len());
        for z in &directions {
            check_dim(space.dim(), z.len())?;
            noise.push(noise_direction(&space, picture, z)?);
        }
        let m = directions.len();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..=i {
                let g = h_inner(&space, picture, &directions[i], &directions[j])?;
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - e).abs());
            }
        }
        if worst > ORTHONORMAL_TOLERANCE {
            return Err(Error::DirectionsNotOrthonormal { residual: worst });
        }
        let cylinder = CylinderFunction::new(name, noise, base.clone())?;
        Ok(Self {
            space,
            picture,
            directions,
            base,
            cylinder,
        })
    }

    /// `f(W(h₁), …, W(hₖ))` for arbitrary directions: they are
    /// orthonormalised by modified Gram–Schmidt in `𝓗` and `f` is pulled back
    /// along the triangular change of variables (dependent directions are
    /// dropped).
    pub fn from_general(
        name: impl Into<String>,
        space: Arc<GaussianSpace>,
        picture: Picture,
        directions: &[DVector<f64>],
        base: Arc<dyn BaseFunction>,
    ) -> Result<Self> {
        let k = directions.len();
        if k != base.arity() {
            return Err(Error::DimensionMismatch {
                expected: base.arity(),
                got: k,
            });
        }
        let mut basis: Vec<DVector<f64>> = Vec::new();
        // coeff[(i, j)] = ⟨hᵢ, zⱼ⟩ so that hᵢ = Σⱼ coeff[(i, j)] zⱼ
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);
        for h in directions {
            check_dim(space.dim(), h.len())?;
            let scale = h_inner(&space, picture, h, h)?.sqrt();
            let mut w = h.clone();
            let mut row = Vec::new();
            for z in &basis {
                let c = h_inner(&space, picture, &w, z)?;
                w -= z * c;
                row.push(c);
            }
            let nw = h_inner(&space, picture, &w, &w)?.max(0.0).sqrt();
            if nw > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                row.push(nw);
                basis.push(w / nw);
            }
            rows.push(row);
        }
        if basis.is_empty() {
            return Err(Error::InvalidArgument("all directions vanish in the indexing space".into()));
        }
        let r = basis.len();
        let l = DMatrix::from_fn(k, r, |i, j| rows[i].get(j).copied().unwrap_or(0.0));
        let pulled = LinearPullback::new(base, l)?;
        Self::new(name, space, picture, basis, Arc::new(pulled))
    }

    pub fn name(&self) -> &str {
        self.cylinder.name()
    }

    pub fn space(&self) -> &Arc<GaussianSpace> {
        &self.space
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn arity(&self) -> usize {
        self.directions.len()
    }

    /// Orthonormal directions in `𝓗`, as vectors of `H`.
    pub fn directions(&self) -> &[DVector<f64>] {
        &self.directions
    }

    pub fn base(&self) -> &Arc<dyn BaseFunction> {
        &self.base
    }

    /// `F` as a cylinder function on `H`: `F(x) = f(⟨x, d₁⟩, …)` with `dᵢ`
    /// the vector representing `W(zᵢ)`.
    pub fn as_cylinder(&self) -> &CylinderFunction {
        &self.cylinder
    }

    /// `(W(z₁)(x), …, W(zₘ)(x))`.
    pub fn noise(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        self.cylinder.projections(x)
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.cylinder.evaluate(x)
    }

    /// `DF(x) = Σᵢ ∂ᵢf(W(z)(x)) zᵢ ∈ 𝓗`.
    pub fn malliavin_d(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.cylinder.base_gradient(x)?;
        let mut out = DVector::zeros(self.space.dim());
        for (gi, z) in g.iter().zip(&self.directions) {
            out.axpy(*gi, z, 1.0);
        }
        Ok(out)
    }

    /// `‖v‖_𝓗`.
    pub fn h_norm(&self, v: &DVector<f64>) -> Result<f64> {
        Ok(h_inner(&self.space, self.picture, v, v)?.max(0.0).sqrt())
    }

    /// `⟨u, v⟩_𝓗`.
    pub fn h_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        h_inner(&self.space, self.picture, u, v)
    }

    /// `W(h)(x)` in this picture.
    pub fn white_noise(&self, h: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.space.dim(), x.len())?;
        Ok(noise_direction(&self.space, self.picture, h)?.dot(x))
    }

    /// The same random variable written in `picture`: `h = Q^{1/2}z` from
    /// CDP to Gross, `z = Q^{-1/2}h` back (needs `ker Q = {0}`).
    pub fn in_picture(&self, picture: Picture) -> Result<Self> {
        if picture == self.picture {
            return Ok(self.clone());
        }
        let directions = match picture {
            Picture::Gross => self
                .directions
                .iter()
                .map(|z| self.space.sqrt_q().apply(z))
                .collect::<Result<Vec<_>>>()?,
            Picture::Cdp => self
                .directions
                .iter()
                .map(|h| {
                    self.space.cameron_martin().check_in_range("h", h)?;
                    self.space.white_noise_direction(h)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Self::new(self.name().to_string(), self.space.clone(), picture, directions, self.base.clone())
    }

    fn sampler(&self, seed: u64) -> Result<GaussianSampler> {
        GaussianSampler::new(self.space.q(), seed)
    }
}

fn h_inner(space: &GaussianSpace, picture: Picture, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_dim(space.dim(), u.len())?;
    check_dim(space.dim(), v.len())?;
    match picture {
        Picture::Cdp => Ok(u.dot(v)),
        Picture::Gross => space.cameron_martin().cm_inner(u, v),
    }
}

fn noise_direction(space: &GaussianSpace, picture: Picture, z: &DVector<f64>) -> Result<DVector<f64>> {
    match picture {
        Picture::Cdp => space.white_noise_direction(z),
        Picture::Gross => space.hat_direction(z),
    }
}

/// Monte-Carlo integration-by-parts check `E⟨DF, h⟩_𝓗 = E[F W(h)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpCheck {
    /// `E⟨DF, h⟩_𝓗`.
    pub derivative_side: Estimate,
    /// `E[F W(h)]`.
    pub noise_side: Estimate,
    /// Paired difference `⟨DF, h⟩ − F W(h)`; its mean is the residual.
    pub difference: Estimate,
    pub pass: bool,
}

impl IbpCheck {
    pub fn residual(&self) -> f64 {
        self.difference.mean
    }

    /// `|residual| / std_error` of the paired difference.
    pub fn z_score(&self) -> f64 {
        self.difference.z_score(0.0)
    }
}

/// Passes when `|residual| ≤ 3 σ` of the paired difference.
pub fn ibp_check(f: &SmoothRandomVariable, h: &DVector<f64>, samples: usize, seed: u64) -> Result<IbpCheck> {
    let sampler = f.sampler(seed)?;
    let coupling: Vec<f64> = f
        .directions
        .iter()
        .map(|z| f.h_inner(z, h))
        .collect::<Result<_>>()?;
    let wh = noise_direction(&f.space, f.picture, h)?;
    // smoothness is checked once here; the sample loop cannot fail
    f.cylinder.base_gradient(&DVector::zeros(f.space.dim()))?;
    let base = f.base.clone();
    let cyl = &f.cylinder;
    let m = f.arity();
    let sums = monte_carlo(&sampler, samples, 3, |x, out| {
        let y = cyl.projections(x).expect("dimension checked");
        let mut g = vec![0.0; m];
        base.gradient(&y, &mut g);
        let lhs: f64 = g.iter().zip(&coupling).map(|(a, b)| a * b).sum();
        let rhs = base.value(&y) * wh.dot(x);
        out[0] = lhs;
        out[1] = rhs;
        out[2] = lhs - rhs;
    })?;
    let difference = sums.estimate(2);
    Ok(IbpCheck {
        derivative_side: sums.estimate(0),
        noise_side: sums.estimate(1),
        difference,
        pass: difference.mean.abs() <= 3.0 * difference.std_error + 1e-12,
    })
}

/// Monte-Carlo estimate of `E|F|^p + E‖DF‖_𝓗^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevNorm {
    pub p: f64,
    pub picture: Picture,
    /// `E|F|^p + E‖DF‖^p`.
    pub value: Estimate,
    /// `value^{1/p}`.
    pub norm: f64,
    pub function_term: Estimate,
    pub gradient_term: Estimate,
}

/// `‖F‖^p_{𝔻^{1,p}}` in `picture`, converting `F` when needed.
pub fn sobolev_norm(f: &SmoothRandomVariable, p: f64, picture: Picture, samples: usize, seed: u64) -> Result<SobolevNorm> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("Sobolev exponent must lie in [1, ∞), got {p}")));
    }
    let g = f.in_picture(picture)?;
    g.cylinder.base_gradient(&DVector::zeros(g.space.dim()))?;
    let sampler = g.sampler(seed)?;
    let sums = monte_carlo(&sampler, samples, 3, |x, out| {
        let fx = g.cylinder.value(x);
        let d = g.malliavin_d(x).expect("checked above");
        let dn = g.h_norm(&d).unwrap_or(f64::NAN);
        let a = fx.abs().powf(p);
        let b = dn.powf(p);
        out[0] = a + b;
        out[1] = a;
        out[2] = b;
    })?;
    let value = sums.estimate(0);
    Ok(SobolevNorm {
        p,
        picture,
        value,
        norm: value.mean.max(0.0).powf(1.0 / p),
        function_term: sums.estimate(1),
        gradient_term: sums.estimate(2),
    })
}

/// Pointwise comparison of the two pictures of one random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PictureComparison {
    /// `max |D_Gross F(x) − Q^{1/2} D_Cdp F(x)|_∞`.
    pub componentwise: f64,
    /// `max |‖D_Gross F(x)‖_K − ‖D_Cdp F(x)‖_H|`.
    pub norm: f64,
    /// `max |D_Gross F(x) − Q∇F(x)| + |D_Cdp F(x) − Q^{1/2}∇F(x)|`.
    pub gradient_relation: f64,
}

/// Compares both pictures of `f` at `points` samples of `N(0, Q)`.
pub fn compare_pictures(f: &SmoothRandomVariable, points: usize, seed: u64) -> Result<PictureComparison> {
    let cdp = f.in_picture(Picture::Cdp)?;
    let gross = f.in_picture(Picture::Gross)?;
    let sampler = f.sampler(seed)?;
    let sq = f.space.sqrt_q();
    let q = f.space.q();
    let mut out = PictureComparison {
        componentwise: 0.0,
        norm: 0.0,
        gradient_relation: 0.0,
    };
    for x in sampler.sample_batch(points, 0) {
        let dc = cdp.malliavin_d(&x)?;
        let dg = gross.malliavin_d(&x)?;
        out.componentwise = out.componentwise.max((&dg - sq.apply(&dc)?).amax());
        out.norm = out.norm.max((gross.h_norm(&dg)? - cdp.h_norm(&dc)?).abs());
        let grad = cdp.cylinder.grad_full(&x)?;
        let rel = (&dg - q.apply(&grad)?).amax() + (&dc - sq.apply(&grad)?).amax();
        out.gradient_relation = out.gradient_relation.max(rel);
    }
    Ok(out)
}
