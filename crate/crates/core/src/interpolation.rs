//! K-functional of the pair `(BUC(H), Lip_{b,R}(H))`,
//!
//! ```text
//! K(r, φ) = inf { ‖a‖_∞ + r (‖b‖_∞ + [b]_R) : φ = a + b },
//! ```
//!
//! bounded from above by three explicit splittings: `(φ, 0)`, `(0, φ)` and
//! the Lasry–Lions split `(φ − S^R(t)φ, S^R(t)φ)` with `t = r^{2−α}`. In one
//! dimension a pairwise dual argument gives a lower bound to compare with.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::functions::{Boundedness, CylinderFunction};
use crate::hilbert::{check_dim, CameronMartinStructure};
use crate::lasry_lions::{
    c_alpha, holder_seminorm, lasry_lions_s, lipschitz_seminorm, EnvelopeConfig, HolderSampling, HolderWitness,
};
use crate::sampling::{derive_seed, NormalStream};
use crate::{Error, Result};

/// Sampling and optimiser settings for the K-functional estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpConfig {
    /// Points for sup norms of `φ`.
    pub phi_samples: usize,
    /// Points for sup norms involving `S^R(t)φ` (each costs an LL solve).
    pub s_samples: usize,
    pub envelope: EnvelopeConfig,
    pub holder: HolderSampling,
    pub seed: u64,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            phi_samples: 10_000,
            s_samples: 256,
            envelope: EnvelopeConfig::default(),
            holder: HolderSampling::default(),
            seed: 0,
        }
    }
}

/// `r_k = 10^{-3 + 6k/(count−1)}`, log-spaced over `[1e-3, 1e3]` by default.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Default `r` grid: 25 log-spaced points in `[1e-3, 1e3]`.
pub fn default_r_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 25)
}

/// Stratified points for sup-norm estimation: radii stratified up to the
/// 99.9% Gaussian radius, uniform directions, plus points hitting a grid of
/// projection values of `φ`.
pub fn sup_sample_points(f: &CylinderFunction, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let n = f.dim();
    let m = f.arity();
    let h = f.directions();
    let mut pts = Vec::with_capacity(count + 9usize.pow(m.min(3) as u32) + 1);
    pts.push(DVector::zeros(n));
    // x = H (HᵀH)⁺ y puts the projections exactly at y
    let gram = h.transpose() * h;
    if let Ok(pinv) = gram.clone().pseudo_inverse(1e-12) {
        let lift = h * pinv;
        let levels: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
        let mut idx = vec![0usize; m];
        if m <= 3 {
            loop {
                let y = DVector::from_fn(m, |j, _| levels[idx[j]] - f.offsets()[j]);
                pts.push(&lift * y);
                let mut k = 0;
                while k < m {
                    idx[k] += 1;
                    if idx[k] < levels.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
    }
    let radius = 3.3 + (n as f64).sqrt();
    let mut s = NormalStream::new(seed);
    for i in 0..count {
        let u = (i as f64 + s.uniform()) / count as f64;
        pts.push(s.unit_vector(n) * (radius * u));
    }
    pts
}

/// `‖φ‖_∞`: the analytic bound when the profile provides one (`certified`),
/// otherwise the maximum over [`sup_sample_points`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    pub certified: bool,
}

pub fn sup_norm(f: &CylinderFunction, samples: usize, seed: u64) -> SupNorm {
    match f.sup_bound() {
        Some(v) => SupNorm {
            value: v,
            certified: true,
        },
        None => SupNorm {
            value: sup_sample_points(f, samples, seed)
                .par_iter()
                .map(|x| f.value(x).abs())
                .reduce(|| 0.0, f64::max),
            certified: false,
        },
    }
}

/// `[φ]_R`: `Lip(f)·‖HᵀR‖` when the profile has a Lipschitz constant
/// (`certified`), otherwise a sampled lower estimate.
pub fn lipschitz_r(f: &CylinderFunction, cm: &CameronMartinStructure, plan: &HolderSampling) -> Result<SupNorm> {
    check_dim(cm.dim(), f.dim())?;
    if let Some(l) = f.base().lipschitz_bound() {
        let m: DMatrix<f64> = f.directions().transpose() * cm.r_matrix();
        let op = m.singular_values().max();
        return Ok(SupNorm {
            value: l * op,
            certified: true,
        });
    }
    Ok(SupNorm {
        value: lipschitz_seminorm(f, cm, plan)?.seminorm,
        certified: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    /// `a = φ, b = 0`.
    Bounded,
    /// `a = 0, b = φ`.
    Lipschitz,
    /// `a = φ − S^R(t)φ, b = S^R(t)φ`, `t = r^{2−α}`.
    LasryLions,
}

/// One splitting `φ = a + b` with norm estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub r: f64,
    pub kind: DecompositionKind,
    /// `t` of the Lasry–Lions split (0 otherwise).
    pub t: f64,
    pub a_sup: f64,
    pub b_sup: f64,
    pub b_lip: f64,
    /// Sample points whose LL solve did not converge.
    pub flagged: usize,
}

impl Decomposition {
    /// `‖a‖_∞ + r (‖b‖_∞ + [b]_R)`.
    pub fn value(&self) -> f64 {
        self.a_sup + self.r * (self.b_sup + self.b_lip)
    }
}

/// Pointwise evaluator of the Lasry–Lions split.
#[derive(Debug, Clone, Copy)]
pub struct LlSplit<'a> {
    pub phi: &'a CylinderFunction,
    pub cm: &'a CameronMartinStructure,
    pub t: f64,
    pub envelope: EnvelopeConfig,
}

impl LlSplit<'_> {
    /// `(a(x), b(x))` with `a + b = φ`; the flag reports LL convergence.
    pub fn parts(&self, x: &DVector<f64>) -> Result<(f64, f64, bool)> {
        let s = lasry_lions_s(self.phi, x, self.t, self.cm, &self.envelope)?;
        Ok((self.phi.evaluate(x)? - s.value, s.value, s.converged))
    }
}

/// Upper bound on `K(r, φ)` and the splitting achieving it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KUpper {
    pub r: f64,
    pub value: f64,
    pub best: Decomposition,
    pub candidates: Vec<Decomposition>,
}

/// Norms of `φ` shared by every `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiNorms {
    pub alpha: f64,
    pub sup: SupNorm,
    pub lipschitz: SupNorm,
    /// Lower estimate of `[φ]_{R,α}`.
    pub holder: f64,
}

impl PhiNorms {
    pub fn estimate(phi: &CylinderFunction, alpha: f64, cm: &CameronMartinStructure, cfg: &InterpConfig) -> Result<Self> {
        if phi.boundedness() != Boundedness::Bounded {
            return Err(Error::InvalidArgument(format!("`{}` is not bounded", phi.name())));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("α must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            alpha,
            sup: sup_norm(phi, cfg.phi_samples, cfg.seed),
            lipschitz: lipschitz_r(phi, cm, &cfg.holder)?,
            holder: holder_seminorm(phi, alpha, cm, &cfg.holder)?.seminorm,
        })
    }

    /// `k₁ = c_α [φ]^{2/(2−α)}`.
    pub fn k1(&self) -> f64 {
        c_alpha(self.alpha) * self.holder.powf(2.0 / (2.0 - self.alpha))
    }

    /// `k₂ = ‖φ‖_∞ + 2 (2 k₁)^{1/2}`.
    pub fn k2(&self) -> f64 {
        self.sup.value + 2.0 * (2.0 * self.k1()).sqrt()
    }
}

/// `K(r, φ)` from above: the best of the trivial splittings and, for
/// `r < 1`, the Lasry–Lions split.
pub fn k_functional_upper(
    phi: &CylinderFunction,
    r: f64,
    norms: &PhiNorms,
    cm: &CameronMartinStructure,
    cfg: &InterpConfig,
) -> Result<KUpper> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let mut candidates = vec![
        Decomposition {
            r,
            kind: DecompositionKind::Bounded,
            t: 0.0,
            a_sup: norms.sup.value,
            b_sup: 0.0,
            b_lip: 0.0,
            flagged: 0,
        },
        Decomposition {
            r,
            kind: DecompositionKind::Lipschitz,
            t: 0.0,
            a_sup: 0.0,
            b_sup: norms.sup.value,
            b_lip: norms.lipschitz.value,
            flagged: 0,
        },
    ];
    if r < 1.0 {
        let t = r.powf(2.0 - norms.alpha);
        let envelope = cfg.envelope.with_holder(norms.alpha, norms.holder.max(1e-12));
        let seed = derive_seed(cfg.seed, 7, r.to_bits());
        let pts = sup_sample_points(phi, cfg.s_samples, seed);
        let (a_sup, b_lip, flagged) = ll_sup_estimates(phi, t, cm, &envelope, &pts, seed)?;
        candidates.push(Decomposition {
            r,
            kind: DecompositionKind::LasryLions,
            t,
            a_sup,
            // ‖S^R(t)φ‖_∞ ≤ ‖φ‖_∞
            b_sup: norms.sup.value,
            b_lip,
            flagged,
        });
    }
    let best = *candidates
        .iter()
        .min_by(|a, b| a.value().total_cmp(&b.value()))
        .expect("two trivial splittings");
    Ok(KUpper {
        r,
        value: best.value(),
        best,
        candidates,
    })
}

/// `(sup |φ − S|, sup |∇S|, unconverged count)` over `pts`, with the best
/// points of each quantity refined by a compass search.
fn ll_sup_estimates(
    phi: &CylinderFunction,
    t: f64,
    cm: &CameronMartinStructure,
    envelope: &EnvelopeConfig,
    pts: &[DVector<f64>],
    seed: u64,
) -> Result<(f64, f64, usize)> {
    let eval = |x: &DVector<f64>| -> Result<Option<(f64, f64)>> {
        let s = lasry_lions_s(phi, x, t, cm, envelope)?;
        Ok(s.converged.then(|| ((phi.value(x) - s.value).abs(), s.gradient_norm)))
    };
    let evals = pts.par_iter().map(eval).collect::<Result<Vec<_>>>()?;
    let flagged = evals.iter().filter(|e| e.is_none()).count();
    let scored: Vec<(usize, f64, f64)> = evals
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|(a, g)| (i, a, g)))
        .collect();
    let mut a_sup = scored.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut b_lip = scored.iter().map(|s| s.2).fold(0.0, f64::max);

    // search directions: the cylinder directions, plus a random one when
    // they do not span H
    let n = phi.dim();
    let mut dirs: Vec<DVector<f64>> = (0..phi.arity())
        .map(|j| phi.directions().column(j).normalize())
        .collect();
    if phi.arity() < n {
        dirs.push(NormalStream::new(derive_seed(seed, 3, 0)).unit_vector(n));
    }

    let mut starts = Vec::new();
    for key in 0..2 {
        let mut by: Vec<&(usize, f64, f64)> = scored.iter().collect();
        by.sort_by(|p, q| if key == 0 { q.1.total_cmp(&p.1) } else { q.2.total_cmp(&p.2) });
        starts.extend(by.iter().take(REFINE_STARTS).map(|p| (key, p.0)));
    }
    let refined = starts
        .par_iter()
        .map(|&(key, i)| -> Result<f64> {
            let pick = |v: (f64, f64)| if key == 0 { v.0 } else { v.1 };
            let mut x = pts[i].clone();
            let mut best = evals[i].map(pick).unwrap_or(0.0);
            let first = t.sqrt().max(1e-3);
            let mut step = first;
            for _ in 0..REFINE_ITERATIONS {
                let mut moved = false;
                for d in &dirs {
                    for sign in [1.0, -1.0] {
                        let y = &x + d * (sign * step);
                        if let Some(v) = eval(&y)? {
                            if pick(v) > best {
                                best = pick(v);
                                x = y;
                                moved = true;
                            }
                        }
                    }
                }
                if !moved {
                    step *= 0.5;
                    if step < 1e-3 * first {
                        break;
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    for (&(key, _), v) in starts.iter().zip(refined) {
        if key == 0 {
            a_sup = a_sup.max(v);
        } else {
            b_lip = b_lip.max(v);
        }
    }
    Ok((a_sup, b_lip, flagged))
}

const REFINE_STARTS: usize = 3;
const REFINE_ITERATIONS: usize = 30;

/// `sup_r r^{−α} K(r, φ)` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpNorm {
    pub norms: PhiNorms,
    /// Upper bounds per grid point, made non-decreasing in `r` by a running
    /// minimum from the right.
    pub rows: Vec<KUpper>,
    /// `max_i r_i^{−α} K_upper(r_i)`.
    pub grid_sup: f64,
    /// `max_i r_i^{−α} K_upper(r_{i+1})` together with the tails
    /// `r_0^{1−α}‖φ‖_{Lip}` and `r_N^{−α}‖φ‖_∞`: bounds the supremum over all
    /// `r > 0` given the grid values.
    pub bracket: f64,
}

pub fn interp_norm(
    phi: &CylinderFunction,
    alpha: f64,
    r_grid: &[f64],
    cm: &CameronMartinStructure,
    cfg: &InterpConfig,
) -> Result<InterpNorm> {
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("r grid must be nonempty".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let norms = PhiNorms::estimate(phi, alpha, cm, cfg)?;
    let mut rows = grid
        .iter()
        .map(|&r| k_functional_upper(phi, r, &norms, cm, cfg))
        .collect::<Result<Vec<_>>>()?;
    // K(r) ≤ K(r') for r ≤ r'
    for i in (0..rows.len().saturating_sub(1)).rev() {
        if rows[i + 1].value < rows[i].value {
            rows[i].value = rows[i + 1].value;
        }
    }
    let grid_sup = rows.iter().map(|k| k.r.powf(-alpha) * k.value).fold(0.0, f64::max);
    let mut bracket = 0.0_f64;
    for w in rows.windows(2) {
        bracket = bracket.max(w[0].r.powf(-alpha) * w[1].value);
    }
    let first = grid[0];
    let last = *grid.last().unwrap();
    bracket = bracket
        .max(first.powf(1.0 - alpha) * (norms.sup.value + norms.lipschitz.value))
        .max(last.powf(-alpha) * norms.sup.value)
        .max(grid_sup);
    Ok(InterpNorm {
        norms,
        rows,
        grid_sup,
        bracket,
    })
}

/// `[φ]_{R,α} ≤ 3 ‖φ‖_{α,∞}` with a sampled lower estimate on the left and
/// the interpolation-norm bracket on the right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    pub seminorm: f64,
    pub interp_upper: f64,
    /// `3 · interp_upper − seminorm`.
    pub slack: f64,
    pub pass: bool,
}

pub fn embedding_check(norm: &InterpNorm) -> EmbeddingCheck {
    let seminorm = norm.norms.holder;
    let rhs = 3.0 * norm.bracket;
    EmbeddingCheck {
        seminorm,
        interp_upper: norm.bracket,
        slack: rhs - seminorm,
        pass: seminorm <= rhs * (1.0 + 1e-9),
    }
}

/// `[φ]_{R,α}` against `[φ∘R]_α` (identity structure), estimated from
/// independent samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComposeCheck {
    pub along_r: HolderWitness,
    pub composed: HolderWitness,
    pub relative_gap: f64,
    pub pass: bool,
}

/// Relative tolerance of [`holder_compose_check`].
pub const COMPOSE_TOLERANCE: f64 = 0.05;

pub fn holder_compose_check(phi: &CylinderFunction, alpha: f64, cm: &CameronMartinStructure, plan: &HolderSampling) -> Result<ComposeCheck> {
    check_dim(cm.dim(), phi.dim())?;
    if !cm.r().is_injective() {
        return Err(Error::Degenerate {
            kernel_dim: cm.dim() - cm.rank(),
            hint: "the composition identity needs ker R = {0}",
        });
    }
    // φ(R y) = f(⟨y, R hᵢ⟩ + oᵢ)
    let dirs = (0..phi.arity())
        .map(|j| cm.apply_r(&phi.directions().column(j).into_owned()))
        .collect();
    let composed_fn = CylinderFunction::new(format!("{}∘R", phi.name()), dirs, phi.base().clone())?;
    let offsets = DVector::from_column_slice(phi.offsets());
    let composed_fn = if offsets.iter().any(|&o| o != 0.0) {
        // offsets are carried by a shift along the directions
        let h = phi.directions();
        let gram = h.transpose() * cm.r_matrix() * cm.r_matrix() * h;
        let shift = cm.r_matrix() * h * gram.pseudo_inverse(1e-12).map_err(|e| Error::InvalidArgument(e.into()))? * offsets;
        composed_fn.shifted(&shift)?
    } else {
        composed_fn
    };
    let identity = CameronMartinStructure::new(crate::hilbert::SelfAdjointOp::identity(cm.dim()));
    let along_r = holder_seminorm(phi, alpha, cm, plan)?;
    let other = HolderSampling {
        seed: derive_seed(plan.seed, 11, 0),
        ..*plan
    };
    let composed = holder_seminorm(&composed_fn, alpha, &identity, &other)?;
    let scale = along_r.seminorm.max(composed.seminorm);
    let relative_gap = if scale > 0.0 {
        (along_r.seminorm - composed.seminorm).abs() / scale
    } else {
        0.0
    };
    Ok(ComposeCheck {
        pass: relative_gap <= COMPOSE_TOLERANCE,
        along_r,
        composed,
        relative_gap,
    })
}

/// Lower bound on `K(r, φ)` for `H = ℝ`, `R = ρ`.
///
/// For any splitting and any pair `x, x + d` with `D = |φ(x+d) − φ(x)|`:
/// `[b]_R ≥ (D − 2‖a‖_∞)⁺ |ρ| / |d|` and `‖b‖_∞ ≥ (M − ‖a‖_∞)⁺` with
/// `M ≤ ‖φ‖_∞`. Minimising `A + r (M − A)⁺ + r|ρ|(D − 2A)⁺/|d|` over
/// `A = ‖a‖_∞ ≥ 0` (piecewise linear, so only the breakpoints matter) and
/// maximising over pairs gives the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct OneDimLowerBound {
    /// `(d, max_x |φ(x + d) − φ(x)|)` on the increment grid.
    pub increments: Vec<(f64, f64)>,
    /// `max_x |φ(x)|` on the point grid.
    pub sup: f64,
    pub rho: f64,
}

impl OneDimLowerBound {
    /// Scans `x ∈ [−half_width, half_width]` with `points` nodes and
    /// `increments` log-spaced `d ∈ [1e-4, 1e2]`.
    pub fn new(phi: &CylinderFunction, cm: &CameronMartinStructure, half_width: f64, points: usize, increments: usize) -> Result<Self> {
        check_dim(1, phi.dim())?;
        check_dim(1, cm.dim())?;
        let rho = cm.r_matrix()[(0, 0)];
        let xs: Vec<f64> = (0..points)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
            .collect();
        let val = |x: f64| phi.value(&DVector::from_element(1, x));
        let sup = xs.iter().map(|&x| val(x).abs()).fold(0.0, f64::max);
        let ds = log_grid(1e-4, 1e2, increments);
        let incs = ds
            .par_iter()
            .map(|&d| {
                let worst = xs.iter().map(|&x| (val(x + d) - val(x)).abs()).fold(0.0, f64::max);
                (d, worst)
            })
            .collect();
        Ok(Self {
            increments: incs,
            sup,
            rho,
        })
    }

    pub fn at(&self, r: f64) -> f64 {
        let m = self.sup;
        let mut best = 0.0_f64;
        for &(d, dd) in &self.increments {
            let slope = r * self.rho.abs() / d;
            let cost = |a: f64| a + r * (m - a).max(0.0) + slope * (dd - 2.0 * a).max(0.0);
            let lower = [0.0, dd / 2.0, m].into_iter().map(cost).fold(f64::INFINITY, f64::min);
            best = best.max(lower);
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{FunctionSpec, PolyTerm};
    use crate::hilbert::SelfAdjointOp;

    fn quick() -> InterpConfig {
        InterpConfig {
            phi_samples: 2000,
            s_samples: 48,
            ..InterpConfig::default()
        }
    }

    fn constant(c: f64, dim: usize) -> CylinderFunction {
        FunctionSpec::Polynomial {
            directions: vec![0],
            terms: vec![PolyTerm { coef: c, powers: vec![0] }],
        }
        .build(dim)
        .unwrap()
    }

    #[test]
    fn constant_interp_norm() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::identity(2));
        let phi = constant(2.0, 2);
        let grid = log_grid(1e-2, 1e2, 41);
        let n = interp_norm(&phi, 0.5, &grid, &cm, &quick()).unwrap();
        // sup_r r^{-α} min(c, r c) = c at r = 1
        assert!((n.grid_sup - 2.0).abs() < 1e-9, "{}", n.grid_sup);
        let zero = interp_norm(&constant(0.0, 2), 0.5, &grid, &cm, &quick()).unwrap();
        assert_eq!(zero.grid_sup, 0.0);
        assert!(embedding_check(&n).pass);
    }

    #[test]
    fn k_upper_is_monotone_and_bounded() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
        let phi = FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        }
        .build(1)
        .unwrap();
        let grid = log_grid(1e-3, 1e3, 13);
        let n = interp_norm(&phi, 0.5, &grid, &cm, &quick()).unwrap();
        for w in n.rows.windows(2) {
            assert!(w[0].value <= w[1].value);
        }
        for k in &n.rows {
            assert!(k.value <= 1.0 + 1e-12);
            assert!(k.value <= (n.norms.k1() + n.norms.k2()) * k.r.powf(0.5));
        }
        let lower = OneDimLowerBound::new(&phi, &cm, 8.0, 4001, 120).unwrap();
        for k in &n.rows {
            let lo = lower.at(k.r);
            assert!(lo <= k.value * (1.0 + 1e-9), "r={} lo={lo} up={}", k.r, k.value);
        }
        assert!(embedding_check(&n).pass);
    }

    #[test]
    fn compose_identity() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::diagonal(&[2.0, 1.0]).unwrap());
        let phi = FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        }
        .build(2)
        .unwrap();
        let c = holder_compose_check(&phi, 0.5, &cm, &HolderSampling::default()).unwrap();
        assert!(c.pass, "{c:?}");
        let deg = CameronMartinStructure::new(SelfAdjointOp::diagonal(&[1.0, 0.0]).unwrap());
        assert!(matches!(
            holder_compose_check(&phi, 0.5, &deg, &HolderSampling::default()),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn ll_split_is_additive() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::rotated(&[1.0, 0.5, 0.0], 3).unwrap());
        let phi = FunctionSpec::CosSinProduct { first: 0, second: 2 }.build(3).unwrap();
        let split = LlSplit {
            phi: &phi,
            cm: &cm,
            t: 0.05,
            envelope: EnvelopeConfig::default().with_holder(0.5, 2.0),
        };
        let mut s = NormalStream::new(1);
        for _ in 0..5 {
            let x = s.normal_vector(3);
            let (a, b, _) = split.parts(&x).unwrap();
            assert!((a + b - phi.value(&x)).abs() <= 1e-12);
        }
    }
}
