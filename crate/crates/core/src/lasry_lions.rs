//! Lasry–Lions approximants along `H_R`:
//!
//! ```text
//! S^R(t)f(x) = sup_{h ∈ H_R} [ inf_{k ∈ H_R} { f(x − h + k) + ‖k‖²/(2t) } − ‖h‖²/t ]
//! ```
//!
//! Both problems are solved in the isometric coordinates `c ↦ Ec` of `H_R`
//! (see [`CameronMartinStructure::embedding`]), so norms are Euclidean.
//! The inner problem is non-convex in general and uses multistart projected
//! gradient descent; the outer objective is concave and uses one ascent run
//! whose gradient `c*/t − 2d/t` comes from the inner minimiser.
//!
//! With a Hölder estimate `[f]_{R,α}` the searches are confined to balls of
//! `ρ` times the a-priori bounds
//! `‖k*‖² ≤ (2−α) α^{α/(2−α)} 2^{2/(2−α)} [f]^{2/(2−α)} t^{2/(2−α)}` and
//! `‖h*‖² ≤ 2 c_α [f]^{2/(2−α)} t^{2/(2−α)}`.
//!
//! Gradient steps overshoot the narrow basins of a cusp, so profiles with
//! `smoothness() == 0` take another route. Both objectives depend on `c`
//! only through its component in the span of `EᵀH` (at most `arity`
//! dimensions) and the rest only adds to `‖c‖²`, so the optimisers lie in
//! that span. There each problem is scanned on a uniform grid over a ball
//! that contains the optimiser, and the best nodes are polished by compass
//! search.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::functions::{CylinderFunction, Quadratic};
use crate::gradients::loglog_slope;
use crate::hilbert::{check_dim, CameronMartinStructure};
use crate::sampling::{derive_seed, NormalStream};
use crate::{Error, Result};

/// `c_α = ((2−α) α^{α/(2−α)} 2^{2/(2−α)})^{α/2}`.
pub fn c_alpha(alpha: f64) -> f64 {
    k_factor(alpha).powf(alpha / 2.0)
}

/// `(2−α) α^{α/(2−α)} 2^{2/(2−α)}`.
fn k_factor(alpha: f64) -> f64 {
    let e = 2.0 - alpha;
    e * alpha.powf(alpha / e) * 2f64.powf(2.0 / e)
}

/// Known Hölder regularity of the function being regularised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderInfo {
    pub alpha: f64,
    pub seminorm: f64,
}

impl HolderInfo {
    /// A-priori radius of the inner minimiser.
    pub fn inner_radius(&self, t: f64) -> f64 {
        let e = 2.0 - self.alpha;
        (k_factor(self.alpha) * self.seminorm.powf(2.0 / e) * t.powf(2.0 / e)).sqrt()
    }

    /// A-priori radius of the outer maximiser.
    pub fn outer_radius(&self, t: f64) -> f64 {
        let e = 2.0 - self.alpha;
        (2.0 * c_alpha(self.alpha) * self.seminorm.powf(2.0 / e) * t.powf(2.0 / e)).sqrt()
    }

    /// `c_α [f]^{2/(2−α)} t^{α/(2−α)}`.
    pub fn approximation_bound(&self, t: f64) -> f64 {
        let e = 2.0 - self.alpha;
        c_alpha(self.alpha) * self.seminorm.powf(2.0 / e) * t.powf(self.alpha / e)
    }

    /// `2 (2 c_α [f]^{2/(2−α)})^{1/2} t^{(α−1)/(2−α)}`.
    pub fn lipschitz_bound(&self, t: f64) -> f64 {
        let e = 2.0 - self.alpha;
        2.0 * (2.0 * c_alpha(self.alpha) * self.seminorm.powf(2.0 / e)).sqrt() * t.powf((self.alpha - 1.0) / e)
    }
}

/// Optimiser settings shared by the inner and outer problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConfig {
    /// Search radius as a multiple of the a-priori bound (≥ 1).
    pub rho: f64,
    /// Starts of the inner problem: zero, a warm start, and random points.
    pub multistart: usize,
    pub max_iter: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
    pub holder: Option<HolderInfo>,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            rho: 2.0,
            multistart: 8,
            max_iter: 500,
            step_tol: 1e-8,
            value_tol: 1e-10,
            seed: 0,
            holder: None,
        }
    }
}

impl EnvelopeConfig {
    pub fn with_holder(mut self, alpha: f64, seminorm: f64) -> Self {
        self.holder = Some(HolderInfo { alpha, seminorm });
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
        }
        if !(self.rho >= 1.0) {
            return Err(Error::InvalidArgument(format!("search radius factor must be ≥ 1, got {}", self.rho)));
        }
        if self.multistart == 0 || self.max_iter == 0 {
            return Err(Error::InvalidArgument("multistart and max_iter must be positive".into()));
        }
        if let Some(h) = self.holder {
            if !(h.alpha > 0.0 && h.alpha < 1.0) || !(h.seminorm >= 0.0) {
                return Err(Error::InvalidArgument(format!("invalid Hölder data {h:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Minimum {
    point: Vec<f64>,
    value: f64,
    converged: bool,
}

fn project(c: &mut [f64], radius: Option<f64>) {
    if let Some(r) = radius {
        let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > r {
            for v in c.iter_mut() {
                *v *= r / n;
            }
        }
    }
}

fn norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Projected gradient descent with Barzilai–Borwein steps and Armijo
/// backtracking on `obj`, which returns value and gradient.
fn descend(obj: &mut dyn FnMut(&[f64]) -> (f64, Vec<f64>), start: &[f64], radius: Option<f64>, initial_step: f64, cfg: &EnvelopeConfig) -> Minimum {
    let mut c = start.to_vec();
    project(&mut c, radius);
    let (mut v, mut g) = obj(&c);
    let mut step = initial_step;
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = c.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            project(&mut trial, radius);
            let s2: f64 = trial.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            let (tv, tg) = obj(&trial);
            if tv <= v - 1e-4 / step * s2 || s2 == 0.0 {
                accepted = Some((trial, tv, tg, s2));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, tv, tg, s2)) = accepted else {
            break;
        };
        let sy: f64 = trial
            .iter()
            .zip(&c)
            .zip(tg.iter().zip(&g))
            .map(|((a, b), (ga, gb))| (a - b) * (ga - gb))
            .sum();
        let dv = (v - tv).abs();
        let small_step = s2.sqrt() <= cfg.step_tol * (1.0 + norm(&c));
        let small_value = dv <= cfg.value_tol * (1.0 + v.abs());
        c = trial;
        v = tv;
        g = tg;
        if small_step || (small_value && s2.sqrt() <= cfg.step_tol.sqrt() * (1.0 + norm(&c))) {
            converged = true;
            break;
        }
        step = if sy > 0.0 { (s2 / sy).clamp(1e-12, 1e12) } else { (step * 2.0).min(1e12) };
    }
    Minimum { point: c, value: v, converged }
}

/// Result of the inner infimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerResult {
    pub value: f64,
    /// Minimiser `k* ∈ H_R` (ambient coordinates).
    pub minimizer: Vec<f64>,
    pub converged: bool,
}

/// Inner problem in coordinates: `min_c f(w + Ec) + |c|²/(2t)` for a
/// differentiable profile.
struct Inner<'a> {
    f: &'a CylinderFunction,
    e: &'a DMatrix<f64>,
    t: f64,
}

impl Inner<'_> {
    fn eval(&self, w: &DVector<f64>, c: &[f64]) -> (f64, Vec<f64>) {
        let cv = DVector::from_column_slice(c);
        let y = w + self.e * &cv;
        let c2 = cv.norm_squared();
        let value = self.f.value(&y) + c2 / (2.0 * self.t);
        let g = self.f.grad_full(&y).expect("smoothness checked");
        let grad = self.e.tr_mul(&g) + &cv / self.t;
        (value, grad.as_slice().to_vec())
    }

    fn solve(&self, w: &DVector<f64>, warm: Option<&[f64]>, cfg: &EnvelopeConfig, seed: u64) -> Minimum {
        let r = self.e.ncols();
        let radius = cfg.holder.map(|h| cfg.rho * h.inner_radius(self.t));
        let spread = radius.unwrap_or(cfg.rho * (1.0 + self.t.sqrt()));
        let mut starts = vec![vec![0.0; r]];
        if let Some(w) = warm {
            starts.push(w.to_vec());
        }
        let mut stream = NormalStream::new(seed);
        while starts.len() < cfg.multistart.max(1) {
            let u = stream.unit_vector(r);
            let s = spread * stream.uniform().powf(1.0 / r as f64);
            starts.push(u.iter().map(|v| v * s).collect());
        }
        let mut best: Option<Minimum> = None;
        let mut obj = |c: &[f64]| self.eval(w, c);
        for s in &starts {
            let m = descend(&mut obj, s, radius, self.t, cfg);
            best = match best {
                Some(b) if b.value <= m.value => Some(b),
                _ => Some(m),
            };
        }
        best.expect("at least one start")
    }
}

fn prepare(f: &CylinderFunction, x: &DVector<f64>, cm: &CameronMartinStructure) -> Result<()> {
    check_dim(cm.dim(), f.dim())?;
    check_dim(cm.dim(), x.len())?;
    if cm.rank() == 0 {
        return Err(Error::InvalidArgument("R = 0 has a trivial Cameron-Martin space".into()));
    }
    Ok(())
}

/// `inf_{k ∈ H_R} f(w + k) + ‖k‖²_{H_R}/(2t)`.
pub fn moreau_inner(f: &CylinderFunction, w: &DVector<f64>, t: f64, cm: &CameronMartinStructure, cfg: &EnvelopeConfig) -> Result<InnerResult> {
    cfg.validate(t)?;
    prepare(f, w, cm)?;
    let e = cm.embedding();
    if f.smoothness() == 0 {
        let rough = Rough::new(f, &e, t, cfg);
        let m = rough.inner(&f.projections(w)?);
        return Ok(InnerResult {
            value: m.value,
            minimizer: (&rough.eb * DVector::from_column_slice(&m.point)).as_slice().to_vec(),
            converged: m.converged,
        });
    }
    let inner = Inner { f, e: &e, t };
    let m = inner.solve(w, None, cfg, cfg.seed);
    let k = &e * DVector::from_column_slice(&m.point);
    Ok(InnerResult {
        value: m.value,
        minimizer: k.as_slice().to_vec(),
        converged: m.converged,
    })
}

/// Value of `S^R(t)f(x)` together with the optimisers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlValue {
    pub value: f64,
    /// Outer maximiser `h* ∈ H_R` (ambient coordinates).
    pub outer: Vec<f64>,
    /// Inner minimiser `k*` at `h*`.
    pub inner: Vec<f64>,
    /// `‖∇_{H_R} S^R(t)f(x)‖_{H_R} = 2‖h*‖_{H_R}/t` where `S` is differentiable.
    pub gradient_norm: f64,
    pub converged: bool,
}

/// `S^R(t)f(x)`.
pub fn lasry_lions_s(f: &CylinderFunction, x: &DVector<f64>, t: f64, cm: &CameronMartinStructure, cfg: &EnvelopeConfig) -> Result<LlValue> {
    cfg.validate(t)?;
    prepare(f, x, cm)?;
    let e = cm.embedding();
    if f.smoothness() == 0 {
        return Ok(Rough::new(f, &e, t, cfg).envelope(x));
    }
    let inner = Inner { f, e: &e, t };
    let radius = cfg.holder.map(|h| cfg.rho * h.outer_radius(t));
    let mut warm: Option<Vec<f64>> = None;
    let mut inner_ok = true;
    let mut calls = 0u64;
    let mut last_inner: Vec<f64> = vec![0.0; e.ncols()];
    // minimise −ψ(d) = −inner(x − Ed) + |d|²/t
    let mut obj = |d: &[f64]| {
        let dv = DVector::from_column_slice(d);
        let w = x - &e * &dv;
        let m = inner.solve(&w, warm.as_deref(), cfg, derive_seed(cfg.seed, 1, calls));
        calls += 1;
        inner_ok = m.converged;
        warm = Some(m.point.clone());
        last_inner = m.point.clone();
        let d2 = dv.norm_squared();
        let grad: Vec<f64> = m.point.iter().zip(d).map(|(c, d)| -(c / t - 2.0 * d / t)).collect();
        (-(m.value) + d2 / t, grad)
    };
    let start = vec![0.0; e.ncols()];
    let outer = descend(&mut obj, &start, radius, t / 2.0, cfg);
    // re-solve at the final point so the reported inner data matches it
    let (neg, _) = obj(&outer.point);
    let d = DVector::from_column_slice(&outer.point);
    Ok(LlValue {
        value: -neg,
        outer: (&e * &d).as_slice().to_vec(),
        inner: (&e * DVector::from_column_slice(&last_inner)).as_slice().to_vec(),
        gradient_norm: 2.0 * d.norm() / t,
        converged: outer.converged && inner_ok,
    })
}

/// Grid nodes per scan of the inner and the outer problem.
const INNER_GRID: usize = 256;
const OUTER_GRID: usize = 64;
/// Grid nodes polished by compass search.
const GRID_STARTS: usize = 3;
/// Final compass steps relative to `1 + ‖c‖`. A cusp of order `α` in the
/// inner problem costs about the step to the power `α`; the outer error is
/// linear in the step.
const INNER_MIN_STEP: f64 = 1e-14;
const OUTER_MIN_STEP: f64 = 1e-10;

/// The grid route for profiles without derivatives. Everything is done on
/// the projections `y = Hᵀx + o`, which move by `G c` with `G = HᵀEB`.
struct Rough<'a> {
    f: &'a CylinderFunction,
    /// `E B`, where the columns of `B` span `EᵀH` orthonormally.
    eb: DMatrix<f64>,
    g: DMatrix<f64>,
    t: f64,
    inner_radius: f64,
    outer_radius: f64,
    max_iter: usize,
}

impl<'a> Rough<'a> {
    fn new(f: &'a CylinderFunction, e: &DMatrix<f64>, t: f64, cfg: &EnvelopeConfig) -> Self {
        let a = e.tr_mul(f.directions());
        let svd = a.svd(true, false);
        let u = svd.u.expect("requested");
        let top = svd.singular_values.max();
        let cols: Vec<_> = (0..svd.singular_values.len())
            .filter(|&i| top > 0.0 && svd.singular_values[i] > 1e-12 * top)
            .map(|i| u.column(i).into_owned())
            .collect();
        let b = if cols.is_empty() {
            DMatrix::zeros(e.ncols(), 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        // |k|²/(2t) ≤ osc f and |h|²/t ≤ osc f, with osc f ≤ 2‖f‖∞
        let by_sup = f.sup_bound().map(|m| ((4.0 * t * m).sqrt(), (2.0 * t * m).sqrt()));
        let by_holder = cfg.holder.map(|h| (cfg.rho * h.inner_radius(t), cfg.rho * h.outer_radius(t)));
        let (inner_radius, outer_radius) = match (by_sup, by_holder) {
            (Some(s), Some(h)) => (s.0.min(h.0), s.1.min(h.1)),
            (Some(r), None) | (None, Some(r)) => r,
            (None, None) => {
                let r = cfg.rho * (1.0 + t.sqrt());
                (r, r)
            }
        };
        let eb = e * b;
        Self {
            f,
            g: f.directions().tr_mul(&eb),
            eb,
            t,
            inner_radius,
            outer_radius,
            max_iter: cfg.max_iter,
        }
    }

    /// `y ← p + sign · G c`.
    fn shift(&self, p: &[f64], c: &[f64], sign: f64, y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = p[j] + sign * c.iter().enumerate().map(|(i, ci)| self.g[(j, i)] * ci).sum::<f64>();
        }
    }

    /// Inner problem at projections `p`.
    fn inner(&self, p: &[f64]) -> Minimum {
        let base = self.f.base();
        let mut y = vec![0.0; p.len()];
        let mut obj = |c: &[f64]| {
            self.shift(p, c, 1.0, &mut y);
            base.value(&y) + norm(c).powi(2) / (2.0 * self.t)
        };
        grid_minimise(&mut obj, self.g.ncols(), self.inner_radius, INNER_GRID, INNER_MIN_STEP, self.max_iter)
    }

    fn envelope(&self, x: &DVector<f64>) -> LlValue {
        let px = self.f.projections(x).expect("dimension checked");
        let mut p = px.clone();
        let mut obj = |d: &[f64]| {
            self.shift(&px, d, -1.0, &mut p);
            -(self.inner(&p).value - norm(d).powi(2) / self.t)
        };
        let outer = grid_minimise(&mut obj, self.g.ncols(), self.outer_radius, OUTER_GRID, OUTER_MIN_STEP, self.max_iter);
        let mut p = px.clone();
        self.shift(&px, &outer.point, -1.0, &mut p);
        let m = self.inner(&p);
        let d = DVector::from_column_slice(&outer.point);
        LlValue {
            value: m.value - d.norm_squared() / self.t,
            outer: (&self.eb * &d).as_slice().to_vec(),
            inner: (&self.eb * DVector::from_column_slice(&m.point)).as_slice().to_vec(),
            gradient_norm: 2.0 * d.norm() / self.t,
            converged: outer.converged && m.converged,
        }
    }
}

/// Uniform scan of `[−radius, radius]^dim` with about `budget` nodes, then
/// compass search from the best few local minima of the scan (distinct
/// basins, where the best nodes overall would crowd into one).
fn grid_minimise(obj: &mut dyn FnMut(&[f64]) -> f64, dim: usize, radius: f64, budget: usize, min_step: f64, max_iter: usize) -> Minimum {
    if dim == 0 {
        return Minimum {
            point: Vec::new(),
            value: obj(&[]),
            converged: true,
        };
    }
    // odd so that the origin is a node
    let per_axis = ((budget as f64).powf(1.0 / dim as f64).floor() as usize).max(3) | 1;
    let spacing = 2.0 * radius / (per_axis - 1) as f64;
    let total = per_axis.pow(dim as u32);
    let coords = |mut flat: usize| -> Vec<f64> {
        (0..dim)
            .map(|_| {
                let i = flat % per_axis;
                flat /= per_axis;
                -radius + spacing * i as f64
            })
            .collect()
    };
    let values: Vec<f64> = (0..total).map(|k| obj(&coords(k))).collect();
    let mut minima: Vec<usize> = (0..total)
        .filter(|&k| {
            let mut stride = 1;
            (0..dim).all(|_| {
                let i = (k / stride) % per_axis;
                let ok = (i == 0 || values[k - stride] >= values[k]) && (i + 1 == per_axis || values[k + stride] >= values[k]);
                stride *= per_axis;
                ok
            })
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    minima
        .into_iter()
        .take(GRID_STARTS)
        .map(|k| compass(obj, coords(k), values[k], spacing, min_step, max_iter))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("a finite grid has a minimum")
}

/// Coordinate pattern search: move to the first improving `±step eᵢ`,
/// otherwise halve the step.
fn compass(obj: &mut dyn FnMut(&[f64]) -> f64, mut point: Vec<f64>, mut value: f64, mut step: f64, min_step: f64, max_iter: usize) -> Minimum {
    let mut converged = false;
    for _ in 0..max_iter {
        if step <= min_step * (1.0 + norm(&point)) {
            converged = true;
            break;
        }
        let mut moved = false;
        'dirs: for i in 0..point.len() {
            for sign in [1.0, -1.0] {
                point[i] += sign * step;
                let v = obj(&point);
                if v < value {
                    value = v;
                    moved = true;
                    break 'dirs;
                }
                point[i] -= sign * step;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Minimum { point, value, converged }
}

/// Sampling plan for the seminorm estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderSampling {
    /// Stratified `(x, v)` pairs.
    pub samples: usize,
    /// Standard deviation of the base points `x`.
    pub x_scale: f64,
    /// Witnesses refined by hill climbing.
    pub refine: usize,
    /// Hill-climbing steps per refined witness.
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for HolderSampling {
    fn default() -> Self {
        Self {
            samples: 4096,
            x_scale: 2.0,
            refine: 8,
            refine_steps: 300,
            seed: 0,
        }
    }
}

/// One `(x, v)` pair and its quotient `|f(x + Rv) − f(x)| / ‖v‖^α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub quotient: f64,
}

/// Lower estimate of `[f]_{R,α}` (or of the Lipschitz seminorm `[f]_R` when
/// `α = 1`) with the pairs that realise it, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderWitness {
    pub alpha: f64,
    pub seminorm: f64,
    pub witnesses: Vec<Witness>,
}

const LOG_V_MIN: f64 = -4.0 * std::f64::consts::LN_10;
const LOG_V_MAX: f64 = 2.0 * std::f64::consts::LN_10;

fn quotient(f: &CylinderFunction, cm: &CameronMartinStructure, x: &DVector<f64>, v: &DVector<f64>, alpha: f64) -> f64 {
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    (f.value(&(x + cm.apply_r(v))) - f.value(x)).abs() / nv.powf(alpha)
}

/// Maximises the quotient over a stratified sample (`log ‖v‖` uniform on
/// `[log 1e-4, log 1e2]`, one stratum per sample, `v ∈ (ker R)^⊥`) and
/// refines the best pairs by hill climbing.
pub fn holder_seminorm(f: &CylinderFunction, alpha: f64, cm: &CameronMartinStructure, plan: &HolderSampling) -> Result<HolderWitness> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    check_dim(cm.dim(), f.dim())?;
    let n = cm.dim();
    let basis = cm.range_basis();
    let r = basis.ncols();
    if r == 0 || plan.samples == 0 {
        return Ok(HolderWitness {
            alpha,
            seminorm: 0.0,
            witnesses: Vec::new(),
        });
    }
    let mut stream = NormalStream::new(plan.seed);
    let mut pool: Vec<Witness> = (0..plan.samples)
        .map(|i| {
            let x = stream.normal_vector(n) * plan.x_scale;
            let u = (i as f64 + stream.uniform()) / plan.samples as f64;
            let len = (LOG_V_MIN + u * (LOG_V_MAX - LOG_V_MIN)).exp();
            let v = basis * stream.unit_vector(r) * len;
            Witness {
                quotient: quotient(f, cm, &x, &v, alpha),
                x: x.as_slice().to_vec(),
                v: v.as_slice().to_vec(),
            }
        })
        .collect();
    pool.sort_by(|a, b| b.quotient.total_cmp(&a.quotient));
    pool.truncate(plan.refine.max(1));

    let refined: Vec<Witness> = pool
        .into_par_iter()
        .enumerate()
        .map(|(k, w)| {
            let mut s = NormalStream::new(derive_seed(plan.seed, 2, k as u64));
            let mut x = DVector::from_column_slice(&w.x);
            let mut v = DVector::from_column_slice(&w.v);
            let mut q = w.quotient;
            let mut scale = 0.5;
            for _ in 0..plan.refine_steps {
                let len = v.norm();
                let dir_c = basis.tr_mul(&v) / len;
                let new_dir = (&dir_c + s.normal_vector(r) * scale).normalize();
                let new_len = (len.ln() + s.next_normal() * scale).clamp(LOG_V_MIN, LOG_V_MAX).exp();
                let nx = &x + s.normal_vector(n) * (scale * plan.x_scale);
                let nv = basis * new_dir * new_len;
                let nq = quotient(f, cm, &nx, &nv, alpha);
                if nq > q {
                    q = nq;
                    x = nx;
                    v = nv;
                } else {
                    scale = (scale * 0.97).max(1e-6);
                }
            }
            Witness {
                x: x.as_slice().to_vec(),
                v: v.as_slice().to_vec(),
                quotient: q,
            }
        })
        .collect();
    let mut witnesses = refined;
    witnesses.sort_by(|a, b| b.quotient.total_cmp(&a.quotient));
    Ok(HolderWitness {
        alpha,
        seminorm: witnesses.first().map_or(0.0, |w| w.quotient),
        witnesses,
    })
}

/// Lower estimate of `[f]_R = sup |f(x + Rv) − f(x)| / ‖v‖`.
pub fn lipschitz_seminorm(f: &CylinderFunction, cm: &CameronMartinStructure, plan: &HolderSampling) -> Result<HolderWitness> {
    holder_seminorm(f, 1.0, cm, plan)
}

/// `a ‖x‖²_{H_R}` (kernel components ignored), as the quadratic form with
/// matrix `2a R⁺R⁺`.
pub fn cm_quadratic(cm: &CameronMartinStructure, a: f64) -> Result<CylinderFunction> {
    let n = cm.dim();
    let m = cm.pinv() * cm.pinv() * (2.0 * a);
    let dirs = (0..n)
        .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    CylinderFunction::new("cm_quadratic", dirs, Arc::new(Quadratic::new(m)?))
}

/// Closed form `S^R(t)(a‖·‖²_{H_R})(x) = a/(1 + at) ‖x‖²_{H_R}`.
pub fn cm_quadratic_envelope(cm: &CameronMartinStructure, a: f64, t: f64, x: &DVector<f64>) -> f64 {
    a / (1.0 + a * t) * cm.apply_pinv(x).norm_squared()
}

/// Per-point outcome of [`verify_ll_bounds`]. Slacks are `bound − observed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlRow {
    pub t: f64,
    pub x_id: usize,
    pub s_value: f64,
    pub f_value: f64,
    /// `‖f‖_∞ − |S(x)|`.
    pub bound1_slack: f64,
    /// `c_α [f]^{2/(2−α)} t^{α/(2−α)} − (f(x) − S(x))`.
    pub bound2_slack: f64,
    /// Lipschitz bound minus the largest observed difference quotient.
    pub bound3_slack: f64,
    /// `f(x) − S(x) ≥ −tolerance`.
    pub monotone: bool,
    pub converged: bool,
}

/// Summary of the bound checks over a `(t, x)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlBoundReport {
    pub alpha: f64,
    pub seminorm: f64,
    pub sup_norm: f64,
    pub rows: Vec<LlRow>,
    /// Bound failures among converged points.
    pub violations: usize,
    /// Points excluded because an optimiser did not converge.
    pub flagged: usize,
    /// Slope of `log max_x (f − S)` against `log t`.
    pub decay_slope: f64,
    /// `α/(2−α)`.
    pub predicted_slope: f64,
}

/// Absolute tolerance on bound slacks (optimiser accuracy).
pub const BOUND_TOLERANCE: f64 = 1e-7;

/// Checks the sup bound, the approximation bound and the Lipschitz bound of
/// `S^R(t)f` at every `(t, x)`; `seminorm` is `[f]_{R,α}` (estimated or
/// exact) and `sup_norm` is `‖f‖_∞`.
#[allow(clippy::too_many_arguments)]
pub fn verify_ll_bounds(
    f: &CylinderFunction,
    alpha: f64,
    seminorm: f64,
    sup_norm: f64,
    t_grid: &[f64],
    xs: &[DVector<f64>],
    cm: &CameronMartinStructure,
    cfg: &EnvelopeConfig,
) -> Result<LlBoundReport> {
    let info = HolderInfo { alpha, seminorm };
    let base_cfg = EnvelopeConfig {
        holder: Some(info),
        ..*cfg
    };
    base_cfg.validate(1.0)?;
    let e = cm.embedding();
    let jobs: Vec<(usize, usize)> = (0..t_grid.len()).flat_map(|i| (0..xs.len()).map(move |j| (i, j))).collect();
    let rows: Vec<Result<LlRow>> = jobs
        .par_iter()
        .map(|&(ti, xi)| {
            let t = t_grid[ti];
            let x = &xs[xi];
            let cfg = base_cfg.with_seed(derive_seed(cfg.seed, ti as u64, xi as u64));
            let s = lasry_lions_s(f, x, t, cm, &cfg)?;
            let fx = f.evaluate(x)?;
            // difference quotients: steepest direction and one random direction
            let mut stream = NormalStream::new(derive_seed(cfg.seed, 3, xi as u64));
            // ∇S(x) ∝ h*, whose coordinates are Λ⁻¹Uᵣᵀh*
            let coords = cm.range_basis().tr_mul(&cm.apply_pinv(&DVector::from_column_slice(&s.outer)));
            let steep = if coords.norm() > 0.0 {
                coords.normalize()
            } else {
                stream.unit_vector(e.ncols())
            };
            let delta = 1e-3 * t.sqrt().min(1.0);
            let random_len = stream.uniform().max(1e-3);
            let random_dir = stream.unit_vector(e.ncols());
            let mut converged = s.converged;
            let mut worst_excess = f64::NEG_INFINITY;
            for (dir, len, central) in [(steep, delta, true), (random_dir, random_len, false)] {
                let h = &e * dir * len;
                let sp = lasry_lions_s(f, &(x + &h), t, cm, &cfg)?;
                converged &= sp.converged;
                let (diff, span) = if central {
                    let sm = lasry_lions_s(f, &(x - &h), t, cm, &cfg)?;
                    converged &= sm.converged;
                    ((sp.value - sm.value).abs(), 2.0 * len)
                } else {
                    ((sp.value - s.value).abs(), len)
                };
                // |S(x+h) − S(x)| ≤ ‖h‖²/t + ‖h‖·L(t)
                let bound = span * span / t + span * info.lipschitz_bound(t);
                worst_excess = worst_excess.max((diff - bound) / span);
            }
            let gap = fx - s.value;
            Ok(LlRow {
                t,
                x_id: xi,
                s_value: s.value,
                f_value: fx,
                bound1_slack: sup_norm - s.value.abs(),
                bound2_slack: info.approximation_bound(t) - gap,
                bound3_slack: -worst_excess,
                monotone: gap >= -BOUND_TOLERANCE,
                converged,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    let mut flagged = 0;
    for r in &rows {
        if !r.converged {
            flagged += 1;
            continue;
        }
        if !r.monotone || r.bound1_slack < -BOUND_TOLERANCE || r.bound2_slack < -BOUND_TOLERANCE || r.bound3_slack < -BOUND_TOLERANCE {
            violations += 1;
        }
    }
    let gaps: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            rows.iter()
                .filter(|r| r.t == t && r.converged)
                .map(|r| r.f_value - r.s_value)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(LlBoundReport {
        alpha,
        seminorm,
        sup_norm,
        violations,
        flagged,
        decay_slope: loglog_slope(t_grid, &gaps),
        predicted_slope: alpha / (2.0 - alpha),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{BaseFunction, Boundedness, FunctionSpec};
    use crate::hilbert::SelfAdjointOp;
    use std::sync::Arc;

    fn cos1(dim: usize) -> CylinderFunction {
        FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        }
        .build(dim)
        .unwrap()
    }

    fn cm_quadratic(cm: &CameronMartinStructure, a: f64) -> CylinderFunction {
        super::cm_quadratic(cm, a).unwrap()
    }

    #[test]
    fn constant_c_alpha() {
        assert!((c_alpha(0.5) - 3f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn constant_function_is_fixed() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::identity(2));
        let f = FunctionSpec::Polynomial {
            directions: vec![0],
            terms: vec![crate::functions::PolyTerm { coef: 3.0, powers: vec![0] }],
        }
        .build(2)
        .unwrap();
        let x = DVector::from_column_slice(&[0.4, 1.0]);
        let s = lasry_lions_s(&f, &x, 0.3, &cm, &EnvelopeConfig::default()).unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
        let m = moreau_inner(&f, &x, 0.3, &cm, &EnvelopeConfig::default()).unwrap();
        assert!((m.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_closed_form() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::rotated(&[1.5, 0.8, 0.0], 4).unwrap());
        let x = DVector::from_column_slice(&[0.3, -0.8, 1.2]);
        let xr = cm.range_proj() * &x;
        let n2 = cm.cm_norm(&xr).unwrap().powi(2);
        for a in [0.5, 2.0] {
            for t in [0.01, 1.0] {
                let f = cm_quadratic(&cm, a);
                let inner = moreau_inner(&f, &x, t, &cm, &EnvelopeConfig::default()).unwrap();
                let fx_ker = f.value(&x) - a * n2;
                assert!((inner.value - fx_ker - a * n2 / (1.0 + 2.0 * a * t)).abs() < 1e-8);
                let s = lasry_lions_s(&f, &x, t, &cm, &EnvelopeConfig::default()).unwrap();
                assert!(s.converged);
                assert!((s.value - fx_ker - a / (1.0 + a * t) * n2).abs() < 1e-6, "a={a} t={t}: {}", s.value);
            }
        }
    }

    #[test]
    fn cos_inner_matches_grid() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
        let f = cos1(1);
        let t = 0.1;
        let x = DVector::from_column_slice(&[0.0]);
        let m = moreau_inner(&f, &x, t, &cm, &EnvelopeConfig::default()).unwrap();
        let grid = (-40_000..=40_000)
            .map(|i| {
                let k = i as f64 * 1e-4;
                k.cos() + k * k / (2.0 * t)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((m.value - grid).abs() < 1e-4);
    }

    /// `cos(y₀) + sin(y₁)`.
    #[derive(Debug)]
    struct CosPlusSin;

    impl crate::functions::BaseFunction for CosPlusSin {
        fn arity(&self) -> usize {
            2
        }
        fn value(&self, y: &[f64]) -> f64 {
            y[0].cos() + y[1].sin()
        }
        fn gradient(&self, y: &[f64], out: &mut [f64]) {
            out[0] = -y[0].sin();
            out[1] = y[1].cos();
        }
        fn hessian(&self, y: &[f64], out: &mut nalgebra::DMatrix<f64>) {
            out.fill(0.0);
            out[(0, 0)] = -y[0].cos();
            out[(1, 1)] = -y[1].sin();
        }
        fn boundedness(&self) -> crate::functions::Boundedness {
            crate::functions::Boundedness::Bounded
        }
    }

    #[test]
    fn degenerate_r_ignores_kernel() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::diagonal(&[1.0, 0.0]).unwrap());
        let dirs = vec![DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[0.0, 1.0])];
        let f = CylinderFunction::new("cos+sin", dirs, Arc::new(CosPlusSin)).unwrap();
        let cfg = EnvelopeConfig::default().with_holder(0.5, 2f64.sqrt());
        let mut gaps = Vec::new();
        for x2 in [-1.0, 0.4, 2.0] {
            let x = DVector::from_column_slice(&[0.7, x2]);
            let s = lasry_lions_s(&f, &x, 0.1, &cm, &cfg).unwrap();
            assert!(s.outer[1].abs() < 1e-15);
            gaps.push(f.value(&x) - s.value);
        }
        assert!((gaps[0] - gaps[1]).abs() < 1e-8 && (gaps[0] - gaps[2]).abs() < 1e-8, "{gaps:?}");
    }

    #[test]
    fn cusp_basin_is_found() {
        // √|w + k| + k²/0.2 at w = −0.3: the cusp at k = 0.3 (value 0.45)
        // beats the smooth local minimum near k = 0.117 (value ≈ 0.496)
        let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
        let f = FunctionSpec::HolderCusp { direction: 0, alpha: 0.5 }.build(1).unwrap();
        let m = moreau_inner(&f, &DVector::from_element(1, -0.3), 0.1, &cm, &EnvelopeConfig::default()).unwrap();
        assert!(m.converged);
        assert!((m.value - 0.45).abs() < 1e-6, "{m:?}");
        assert!((m.minimizer[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn rough_route_agrees_with_descent() {
        // a smooth profile declared non-smooth must give the same envelope
        #[derive(Debug)]
        struct RoughCos;
        impl BaseFunction for RoughCos {
            fn arity(&self) -> usize {
                1
            }
            fn value(&self, y: &[f64]) -> f64 {
                y[0].cos()
            }
            fn gradient(&self, _: &[f64], _: &mut [f64]) {
                unreachable!()
            }
            fn hessian(&self, _: &[f64], _: &mut nalgebra::DMatrix<f64>) {
                unreachable!()
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
        let cm = CameronMartinStructure::new(SelfAdjointOp::rotated(&[1.5, 0.5, 0.0], 4).unwrap());
        let h = DVector::from_column_slice(&[0.6, -0.8, 0.3]);
        let rough = CylinderFunction::new("rough", vec![h.clone()], Arc::new(RoughCos)).unwrap();
        let cos = cos1(1).base().clone();
        let smooth = CylinderFunction::new("smooth", vec![h], cos).unwrap();
        let cfg = EnvelopeConfig::default();
        for x in [[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]] {
            let x = DVector::from_column_slice(&x);
            let a = lasry_lions_s(&rough, &x, 0.05, &cm, &cfg).unwrap().value;
            let b = lasry_lions_s(&smooth, &x, 0.05, &cm, &cfg).unwrap().value;
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn seminorm_estimates() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::rotated(&[1.3, 0.6, 0.2], 5).unwrap());
        let a = DVector::from_column_slice(&[0.5, -1.0, 0.25]);
        let lin = FunctionSpec::Linear {
            direction: None,
            vector: Some(a.as_slice().to_vec()),
        }
        .build(3)
        .unwrap();
        let w = lipschitz_seminorm(&lin, &cm, &HolderSampling::default()).unwrap();
        let exact = cm.apply_r(&a).norm();
        assert!(w.seminorm <= exact * (1.0 + 1e-12) && w.seminorm >= 0.99 * exact, "{} vs {exact}", w.seminorm);

        let cusp = FunctionSpec::HolderCusp { direction: 0, alpha: 0.5 }.build(3).unwrap();
        let id = CameronMartinStructure::new(SelfAdjointOp::identity(3));
        let w = holder_seminorm(&cusp, 0.5, &id, &HolderSampling::default()).unwrap();
        assert!(w.seminorm >= 0.9 && w.seminorm <= 1.0 + 1e-12, "{}", w.seminorm);
    }

    #[test]
    fn cos_bounds_hold() {
        let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
        let f = cos1(1);
        let xs: Vec<_> = [-2.0, -0.5, 0.3, 1.0, 2.5].iter().map(|&v| DVector::from_column_slice(&[v])).collect();
        // [cos]_{1/2} ≤ 2^{1/2}; the value only needs to dominate the true seminorm
        let rep = verify_ll_bounds(&f, 0.5, 2f64.sqrt(), 1.0, &[0.1, 0.01, 0.001], &xs, &cm, &EnvelopeConfig::default()).unwrap();
        assert_eq!(rep.violations, 0, "{rep:#?}");
        assert!(rep.decay_slope >= rep.predicted_slope - 0.1);
    }
}
