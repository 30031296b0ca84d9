//! Verification suites behind `malliavin-kit run`.
//!
//! Each suite is a sequence of parts; every part appends rows (and optionally
//! tables) to an [`ExperimentReport`]. Seeds derive from the configured seed
//! via `derive_seed(seed, part, index)`.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::functions::{BaseFunction, Boundedness, CylinderFunction, FunctionSpec, Polynomial, Trig};
use crate::gradients::verify_relations;
use crate::hilbert::{CameronMartinStructure, GaussianSpace, SelfAdjointOp};
use crate::interpolation::{holder_compose_check, interp_norm, sup_norm, InterpConfig, OneDimLowerBound};
use crate::lasry_lions::{
    cm_quadratic, cm_quadratic_envelope, holder_seminorm, lasry_lions_s, verify_ll_bounds, EnvelopeConfig, HolderSampling,
};
use crate::malliavin::{chaos_project, compare_pictures, domain_check, ibp_check, sobolev_norm, Picture, SmoothRandomVariable};
use crate::report::{table, ExperimentReport, Row};
use crate::sampling::{derive_seed, monte_carlo, Estimate, GaussianSampler, NormalStream};
use crate::{Error, Result};

/// Tolerances pinned by the suites.
pub mod tol {
    /// Relative residual of the pseudo-inverse identities.
    pub const PINV: f64 = 1e-12;
    /// Analytic gradient relations.
    pub const ANALYTIC: f64 = 1e-10;
    /// Finite-difference oracles.
    pub const FD: f64 = 1e-6;
    /// Kernel annihilation by construction.
    pub const KERNEL_EXACT: f64 = 1e-12;
    /// Componentwise Gross vs `Q^{1/2}·CDP`.
    pub const PICTURE: f64 = 1e-12;
    /// Monte-Carlo z-score.
    pub const Z: f64 = 3.0;
    /// Domain identity for polynomials (quadrature exact).
    pub const CHAOS_POLYNOMIAL: f64 = 1e-8;
    /// Domain identity and coefficients for `cos(W_z)`.
    pub const CHAOS_ANALYTIC: f64 = 1e-4;
    /// Quadratic closed form of the envelope.
    pub const LL_QUADRATIC: f64 = 1e-4;
    /// Allowed shortfall of the decay slope below `α/(2−α)`.
    pub const LL_SLOPE: f64 = 0.1;
    /// `[φ]_{R,α}` vs `[φ∘R]_α`.
    pub const COMPOSE: f64 = crate::interpolation::COMPOSE_TOLERANCE;
    /// `K_upper / K_lower` in one dimension.
    pub const K_RATIO: f64 = 5.0;
}

/// Operators and functions shared by all parts.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: ExperimentConfig,
    pub cm: CameronMartinStructure,
    pub space: Arc<GaussianSpace>,
    pub battery: Vec<CylinderFunction>,
}

impl Context {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cm: CameronMartinStructure::new(cfg.r_operator()?),
            space: Arc::new(GaussianSpace::new(cfg.q_operator()?)?),
            battery: cfg.battery()?,
            cfg: cfg.clone(),
        })
    }

    fn seed(&self, part: u64, index: u64) -> u64 {
        derive_seed(self.cfg.seed, part, index)
    }

    fn bounded(&self) -> impl Iterator<Item = &CylinderFunction> {
        self.battery.iter().filter(|f| f.boundedness() == Boundedness::Bounded)
    }
}

/// Runs the configured suite (or all of them, in order).
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ctx = Context::new(cfg)?;
    let echo = serde_json::to_value(cfg)?;
    let mut report = ExperimentReport::new(&cfg.suite, cfg.seed, echo);
    for name in cfg.suite_names() {
        run_suite(name, &ctx, &mut report)?;
    }
    Ok(report)
}

pub fn run_suite(name: &str, ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    match name {
        "gradcheck" => {
            pinv_identities(ctx, rep)?;
            gradient_relations(ctx, rep)
        }
        "malliavin" => pictures(ctx, rep),
        "ibp" => integration_by_parts(ctx, rep),
        "chaos" => chaos(ctx, rep),
        "lasry-lions" => {
            ll_quadratic(ctx, rep)?;
            ll_bounds(ctx, rep)
        }
        "interp" => {
            interp_battery(ctx, rep)?;
            interp_one_dim(ctx, rep)
        }
        other => Err(Error::Config(format!("unknown suite `{other}`"))),
    }
}

#[derive(Serialize)]
struct OperatorRow {
    index: usize,
    rank: usize,
    spectral: f64,
    r_pinv_r: f64,
    pinv_r: f64,
    r_pinv: f64,
    pinv_r_pinv: f64,
}

/// Pseudo-inverse identities on `gradcheck.operators` random self-adjoint
/// operators (every other one rank-deficient), each rebuilt from its matrix.
pub fn pinv_identities(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let n = ctx.cfg.dim;
    let count = ctx.cfg.gradcheck.operators;
    let rows = (0..count)
        .into_par_iter()
        .map(|k| -> Result<OperatorRow> {
            let seed = ctx.seed(1, k as u64);
            let mut s = NormalStream::new(seed);
            let mut vals: Vec<f64> = (0..n).map(|_| 0.1 + 3.0 * s.uniform()).collect();
            if k % 2 == 0 {
                let zeros = 1 + k / 2 % n.max(1);
                for v in vals.iter_mut().take(zeros.min(n)) {
                    *v = 0.0;
                }
            }
            let op = SelfAdjointOp::rotated(&vals, seed)?;
            let cm = CameronMartinStructure::from_matrix(op.matrix())?;
            let r = cm.identity_residuals(op.matrix());
            Ok(OperatorRow {
                index: k,
                rank: cm.rank(),
                spectral: r.spectral,
                r_pinv_r: r.r_pinv_r,
                pinv_r: r.pinv_r,
                r_pinv: r.r_pinv,
                pinv_r_pinv: r.pinv_r_pinv,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows
        .iter()
        .map(|r| r.spectral.max(r.r_pinv_r).max(r.pinv_r).max(r.r_pinv).max(r.pinv_r_pinv))
        .fold(0.0, f64::max);
    let configured = ctx.cm.identity_residuals(ctx.cm.r_matrix()).max();
    rep.push(Row::check(
        "gradcheck",
        "pinv_identities",
        &format!("{count} random operators"),
        worst,
        tol::PINV,
    ));
    rep.push(Row::check("gradcheck", "pinv_identities", "configured R", configured, tol::PINV));
    rep.add_table("operators", table(&rows)?);
    Ok(())
}

#[derive(Serialize, Default, Clone, Copy)]
struct RelationRow<'a> {
    function: &'a str,
    analytic: f64,
    fd: f64,
    kernel_exact: f64,
    kernel_fd: f64,
}

/// Gradient relations, transports and kernel annihilation over the battery at
/// `gradcheck.points` standard normal points.
pub fn gradient_relations(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let points = ctx.cfg.gradcheck.points;
    let probes = ctx.cfg.gradcheck.probes;
    let mut rows = Vec::new();
    for (fi, f) in ctx.battery.iter().enumerate() {
        let per = (0..points)
            .into_par_iter()
            .map(|p| {
                let seed = ctx.seed(2, (fi * points + p) as u64);
                let x = NormalStream::new(seed).normal_vector(ctx.cfg.dim);
                verify_relations(f, &x, &ctx.cm, probes, seed)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut row = RelationRow {
            function: f.name(),
            ..Default::default()
        };
        for r in &per {
            row.analytic = row.analytic.max(r.analytic());
            row.fd = row.fd.max(r.fd());
            row.kernel_exact = row.kernel_exact.max(r.kernel_exact);
            row.kernel_fd = row.kernel_fd.max(r.kernel_fd);
        }
        rep.push(Row::check("gradcheck", "relations_analytic", f.name(), row.analytic, tol::ANALYTIC));
        rep.push(Row::check("gradcheck", "relations_fd", f.name(), row.fd, tol::FD));
        rep.push(Row::check("gradcheck", "kernel_exact", f.name(), row.kernel_exact, tol::KERNEL_EXACT));
        rep.push(Row::check("gradcheck", "kernel_fd", f.name(), row.kernel_fd, tol::FD));
        rows.push(row);
    }
    rep.add_table("relations", table(&rows)?);
    Ok(())
}

/// `F(x) = f(⟨x, h₁⟩, …)` as a CDP random variable: `W(Q^{1/2}h)(x) = ⟨h, x⟩`.
pub fn random_variable(f: &CylinderFunction, space: &Arc<GaussianSpace>) -> Result<SmoothRandomVariable> {
    if f.offsets().iter().any(|&o| o != 0.0) {
        return Err(Error::InvalidArgument("shifted cylinder functions have no CDP form".into()));
    }
    let sq = space.sqrt_q();
    let dirs = (0..f.arity())
        .map(|j| sq.apply(&f.directions().column(j).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    SmoothRandomVariable::from_general(f.name(), space.clone(), Picture::Cdp, &dirs, f.base().clone())
}

#[derive(Serialize)]
struct PictureRow<'a> {
    function: &'a str,
    componentwise: f64,
    norm: f64,
    gradient_relation: f64,
    cdp_norm: Estimate,
    gross_norm: Estimate,
}

/// Gross derivative against `Q^{1/2}·(CDP derivative)` and the two `p = 2`
/// Sobolev norms (independent samples) over the battery.
pub fn pictures(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let mut rows = Vec::new();
    for (fi, f) in ctx.battery.iter().enumerate() {
        let rv = random_variable(f, &ctx.space)?;
        let cmp = compare_pictures(&rv, ctx.cfg.malliavin.points, ctx.seed(3, fi as u64))?;
        let samples = ctx.cfg.malliavin.samples;
        let a = sobolev_norm(&rv, 2.0, Picture::Cdp, samples, ctx.seed(4, fi as u64))?.value;
        let b = sobolev_norm(&rv, 2.0, Picture::Gross, samples, ctx.seed(5, fi as u64))?.value;
        let diff = Estimate {
            mean: a.mean - b.mean,
            std_error: a.std_error.hypot(b.std_error),
            samples,
        };
        rep.push(Row::check("malliavin", "gross_vs_cdp", f.name(), cmp.componentwise, tol::PICTURE));
        rep.push(Row::check("malliavin", "gradient_relation", f.name(), cmp.gradient_relation, tol::PICTURE));
        rep.push(Row::monte_carlo("malliavin", "sobolev_p2_agreement", f.name(), diff, 0.0, tol::Z));
        rows.push(PictureRow {
            function: f.name(),
            componentwise: cmp.componentwise,
            norm: cmp.norm,
            gradient_relation: cmp.gradient_relation,
            cdp_norm: a,
            gross_norm: b,
        });
    }
    rep.add_table("pictures", table(&rows)?);
    Ok(())
}

/// `E⟨DF, h⟩ = E[F W(h)]` for every battery function against two directions,
/// plus `F = W(h)³` and the moments `E W(h)² = ‖h‖²`, `E W(h)⁴ = 3‖h‖⁴`.
pub fn integration_by_parts(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let n = ctx.cfg.dim;
    let samples = ctx.cfg.ibp.samples;
    let e0 = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let h = NormalStream::new(ctx.seed(6, 0)).unit_vector(n) * 1.5;
    let mut rows = Vec::new();
    let mut record = |rep: &mut ExperimentReport, subject: String, rv: &SmoothRandomVariable, h: &DVector<f64>, k: u64| -> Result<()> {
        let c = ibp_check(rv, h, samples, ctx.seed(7, k))?;
        rep.push(Row::monte_carlo("ibp", "integration_by_parts", &subject, c.difference, 0.0, tol::Z));
        rows.push(serde_json::json!({
            "subject": subject,
            "derivative_side": c.derivative_side.mean,
            "noise_side": c.noise_side.mean,
            "difference": c.difference.mean,
            "std_error": c.difference.std_error,
            "z_score": c.z_score(),
        }));
        Ok(())
    };
    let mut k = 0;
    for f in &ctx.battery {
        let rv = random_variable(f, &ctx.space)?;
        for (label, dir) in [("e0", &e0), ("h", &h)] {
            record(rep, format!("{} / {label}", f.name()), &rv, dir, k)?;
            k += 1;
        }
    }
    let unit = h.normalize();
    let cube = SmoothRandomVariable::new(
        "W^3",
        ctx.space.clone(),
        Picture::Cdp,
        vec![unit.clone()],
        Arc::new(Polynomial::new(1, vec![(1.0, vec![3])])?),
    )?;
    record(rep, "W(z)^3 / h".into(), &cube, &h, k)?;
    rep.add_table("ibp", rows);

    let wh = ctx.space.white_noise_direction(&h)?;
    let sampler = GaussianSampler::new(ctx.space.q(), ctx.seed(8, 0))?;
    let sums = monte_carlo(&sampler, samples, 2, |x, out| {
        let w = wh.dot(x);
        out[0] = w * w;
        out[1] = w * w * w * w;
    })?;
    let hn2 = h.norm_squared();
    rep.push(Row::monte_carlo("ibp", "gaussian_moment_2", "W(h)", sums.estimate(0), hn2, tol::Z));
    rep.push(Row::monte_carlo("ibp", "gaussian_moment_4", "W(h)", sums.estimate(1), 3.0 * hn2 * hn2, tol::Z));
    Ok(())
}

/// Orthonormal-Hermite coefficient of `cos ξ` at level `n`:
/// `e^{−1/2} (−1)^{n/2} / √n!` for even `n`, zero otherwise.
pub fn cos_chaos_coefficient(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    sign * (-0.5f64).exp() / fact.sqrt()
}

/// Polynomials of degree ≤ 6 in ≤ 3 variables used by the chaos suite.
pub fn chaos_polynomials() -> Vec<(&'static str, Polynomial)> {
    let p = |arity, terms| Polynomial::new(arity, terms).expect("valid polynomial");
    vec![
        ("x^6", p(1, vec![(1.0, vec![6])])),
        ("x^2 y^3 + xy/2 - 1", p(2, vec![(1.0, vec![2, 3]), (0.5, vec![1, 1]), (-1.0, vec![0, 0])])),
        ("xyz + x^4 - 2y^2z^2", p(3, vec![(1.0, vec![1, 1, 1]), (1.0, vec![4, 0, 0]), (-2.0, vec![0, 2, 2])])),
        ("x^2 y^2 z^2", p(3, vec![(1.0, vec![2, 2, 2])])),
    ]
}

/// Domain identity `E‖DF‖² = Σ n‖JₙF‖²` for polynomials and for `cos(W_z)`,
/// whose coefficients are also compared to the closed form.
pub fn chaos(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let n = ctx.cfg.dim;
    let level = ctx.cfg.chaos.level;
    let basis = |i: usize| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
    let mut rows = Vec::new();
    for (name, poly) in chaos_polynomials() {
        let arity = poly.arity();
        if arity > n {
            continue;
        }
        let degree = poly.polynomial_degree().unwrap_or(0);
        let rv = SmoothRandomVariable::new(name, ctx.space.clone(), Picture::Cdp, (0..arity).map(basis).collect(), Arc::new(poly))?;
        let d = domain_check(&rv, level.max(degree))?;
        rep.push(Row::check("chaos", "domain_identity", name, d.relative_gap, tol::CHAOS_POLYNOMIAL));
        rows.push(serde_json::json!({"function": name, "lhs": d.lhs, "rhs": d.rhs, "relative_gap": d.relative_gap, "tail_gap": d.tail_gap}));
    }
    let cos = SmoothRandomVariable::new(
        "cos(W_z)",
        ctx.space.clone(),
        Picture::Cdp,
        vec![basis(0)],
        Arc::new(Trig {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        }),
    )?;
    let d = domain_check(&cos, level)?;
    let e = chaos_project(&cos, level)?;
    let coeff_err = (0..=level)
        .map(|k| (e.coefficient(&[k]).unwrap_or(0.0) - cos_chaos_coefficient(k)).abs())
        .fold(0.0, f64::max);
    // E sin²(ξ) = (1 − e^{−2}) / 2
    let exact = (1.0 - (-2.0f64).exp()) / 2.0;
    rep.push(Row::check("chaos", "domain_identity", "cos(W_z)", d.relative_gap, tol::CHAOS_ANALYTIC));
    rep.push(Row::check(
        "chaos",
        "gradient_moment",
        "cos(W_z)",
        (d.lhs - exact).abs() / exact,
        tol::CHAOS_ANALYTIC,
    ));
    rep.push(Row::check("chaos", "coefficients", "cos(W_z)", coeff_err, tol::CHAOS_ANALYTIC));
    rows.push(serde_json::json!({"function": "cos(W_z)", "lhs": d.lhs, "rhs": d.rhs, "relative_gap": d.relative_gap, "tail_gap": d.tail_gap}));
    rep.add_table("chaos", rows);
    Ok(())
}

#[derive(Serialize)]
struct QuadraticRow {
    a: f64,
    t: f64,
    point: usize,
    computed: f64,
    closed_form: f64,
    error: f64,
    converged: bool,
}

/// `S^R(t)(a‖·‖²_{H_R}) = a/(1+at) ‖·‖²_{H_R}` over `a ∈ {1/2, 1, 2}`,
/// `t ∈ {0.01, 0.1, 1}` and `lasry_lions.oracle_points` points.
pub fn ll_quadratic(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let points = ctx.cfg.lasry_lions.oracle_points;
    let jobs: Vec<(f64, f64, usize)> = [0.5, 1.0, 2.0]
        .into_iter()
        .flat_map(|a| [0.01, 0.1, 1.0].into_iter().flat_map(move |t| (0..points).map(move |p| (a, t, p))))
        .collect();
    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(a, t, p))| -> Result<QuadraticRow> {
            let f = cm_quadratic(&ctx.cm, a)?;
            let x = NormalStream::new(ctx.seed(9, p as u64)).normal_vector(ctx.cfg.dim);
            let s = lasry_lions_s(&f, &x, t, &ctx.cm, &EnvelopeConfig::default().with_seed(ctx.seed(10, k as u64)))?;
            let exact = cm_quadratic_envelope(&ctx.cm, a, t, &x);
            Ok(QuadraticRow {
                a,
                t,
                point: p,
                computed: s.value,
                closed_form: exact,
                error: (s.value - exact).abs(),
                converged: s.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    rep.push(Row::check("lasry-lions", "quadratic_closed_form", "a‖x‖²_{H_R}", worst, tol::LL_QUADRATIC));
    rep.add_table("ll_quadratic", table(&rows)?);
    Ok(())
}

/// Sup, approximation and Lipschitz bounds of `S^R(t)f` for the bounded
/// battery on `lasry_lions.t_grid`, and the decay slope of `max_x (f − S)`.
pub fn ll_bounds(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let c = &ctx.cfg.lasry_lions;
    let mut summary = Vec::new();
    let mut detail = Vec::new();
    for (fi, f) in ctx.bounded().enumerate() {
        let plan = HolderSampling {
            seed: ctx.seed(11, fi as u64),
            ..HolderSampling::default()
        };
        let semi = holder_seminorm(f, c.alpha, &ctx.cm, &plan)?.seminorm;
        let sup = sup_norm(f, 10_000, ctx.seed(12, fi as u64)).value;
        let mut s = NormalStream::new(ctx.seed(13, fi as u64));
        let xs: Vec<DVector<f64>> = (0..c.points).map(|_| s.normal_vector(ctx.cfg.dim) * 1.5).collect();
        let env = EnvelopeConfig::default().with_seed(ctx.seed(14, fi as u64));
        let r = verify_ll_bounds(f, c.alpha, semi, sup, &c.t_grid, &xs, &ctx.cm, &env)?;
        rep.push(Row::check("lasry-lions", "envelope_bounds", f.name(), r.violations as f64, 0.0));
        rep.push(Row::check(
            "lasry-lions",
            "decay_slope",
            f.name(),
            (r.predicted_slope - r.decay_slope).max(0.0),
            tol::LL_SLOPE,
        ));
        summary.push(serde_json::json!({
            "function": f.name(),
            "seminorm": semi,
            "sup_norm": sup,
            "violations": r.violations,
            "flagged": r.flagged,
            "decay_slope": r.decay_slope,
            "predicted_slope": r.predicted_slope,
        }));
        for row in &r.rows {
            let mut v = serde_json::to_value(row)?;
            v["function"] = f.name().into();
            detail.push(v);
        }
    }
    rep.add_table("ll_bounds", summary);
    rep.add_table("ll_points", detail);
    Ok(())
}

fn interp_config(ctx: &Context, index: u64) -> InterpConfig {
    let seed = ctx.seed(15, index);
    InterpConfig {
        phi_samples: ctx.cfg.interp.phi_samples,
        s_samples: ctx.cfg.interp.s_samples,
        envelope: EnvelopeConfig::default().with_seed(seed),
        holder: HolderSampling {
            seed,
            ..HolderSampling::default()
        },
        seed,
    }
}

/// K-functional bound `K_upper(r) ≤ (k₁+k₂) r^α`, the embedding
/// `[φ]_{R,α} ≤ 3‖φ‖_{α,∞}` and `[φ]_{R,α} = [φ∘R]_α` for the bounded
/// battery. The composition check runs on `R + P_ker` when `R` is not
/// injective.
pub fn interp_battery(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let alpha = ctx.cfg.interp.alpha;
    let injective = if ctx.cm.r().is_injective() {
        ctx.cm.clone()
    } else {
        CameronMartinStructure::from_matrix(&(ctx.cm.r_matrix() + ctx.cm.ker_proj()))?
    };
    let mut grid_rows = Vec::new();
    for (fi, f) in ctx.bounded().enumerate() {
        let icfg = interp_config(ctx, fi as u64);
        let norm = interp_norm(f, alpha, &ctx.cfg.interp.r_grid, &ctx.cm, &icfg)?;
        let k = norm.norms.k1() + norm.norms.k2();
        let mut excess = 0.0_f64;
        for row in &norm.rows {
            let bound = k * row.r.powf(alpha);
            excess = excess.max(row.value - bound);
            grid_rows.push(serde_json::json!({
                "function": f.name(),
                "r": row.r,
                "k_upper": row.value,
                "scaled": row.value * row.r.powf(-alpha),
                "decomposition": row.best.kind,
                "ll_bound": bound,
                "slack": bound - row.value,
            }));
        }
        rep.push(Row::check("interp", "k_upper_bound", f.name(), excess.max(0.0), 0.0));
        let emb = crate::interpolation::embedding_check(&norm);
        rep.push(Row::check("interp", "embedding", f.name(), (-emb.slack).max(0.0), 0.0));
        let c = holder_compose_check(f, alpha, &injective, &icfg.holder)?;
        rep.push(Row::check("interp", "holder_compose", f.name(), c.relative_gap, tol::COMPOSE));
    }
    rep.add_table("interp_grid", grid_rows);
    Ok(())
}

/// Functions compared against the brute-force lower bound on `H = ℝ`.
pub fn one_dim_functions(alpha: f64) -> Vec<FunctionSpec> {
    vec![
        FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        },
        FunctionSpec::HolderCusp { direction: 0, alpha },
    ]
}

/// On `H = ℝ`, `R = Id`: the largest ratio `K_upper(r) / K_lower(r)` over the
/// `r` grid.
pub fn interp_one_dim(ctx: &Context, rep: &mut ExperimentReport) -> Result<()> {
    let alpha = ctx.cfg.interp.alpha;
    let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
    let mut rows = Vec::new();
    for (fi, spec) in one_dim_functions(alpha).iter().enumerate() {
        let f = spec.build(1)?;
        let icfg = interp_config(ctx, 100 + fi as u64);
        let norm = interp_norm(&f, alpha, &ctx.cfg.interp.r_grid, &cm, &icfg)?;
        let lower = OneDimLowerBound::new(&f, &cm, 8.0, 16_001, 300)?;
        let mut worst = 0.0_f64;
        for row in &norm.rows {
            let lo = lower.at(row.r);
            let ratio = if lo > 0.0 { row.value / lo } else if row.value > 0.0 { f64::INFINITY } else { 1.0 };
            worst = worst.max(ratio);
            rows.push(serde_json::json!({
                "function": f.name(),
                "r": row.r,
                "k_upper": row.value,
                "k_lower": lo,
                "ratio": ratio,
                "decomposition": row.best.kind,
            }));
        }
        rep.push(Row::check("interp", "k_ratio_1d", f.name(), worst, tol::K_RATIO));
    }
    rep.add_table("interp_1d", rows);
    Ok(())
}
