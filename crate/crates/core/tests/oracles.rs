//! Library routines against independent references: Monte-Carlo moments,
//! closed-form chaos coefficients and brute-force grids.

mod common;

use std::sync::Arc;

use malliavin_kit::functions::FunctionSpec;
use malliavin_kit::hilbert::{CameronMartinStructure, GaussianSpace, SelfAdjointOp};
use malliavin_kit::interpolation::{interp_norm, InterpConfig, OneDimLowerBound};
use malliavin_kit::lasry_lions::{lasry_lions_s, EnvelopeConfig};
use malliavin_kit::malliavin::{chaos_project, Picture, SmoothRandomVariable};
use malliavin_kit::sampling::{monte_carlo, GaussianSampler};
use nalgebra::DVector;

const MAX_Z: f64 = 4.0;

fn degenerate_space() -> GaussianSpace {
    GaussianSpace::new(SelfAdjointOp::rotated(&[2.0, 0.7, 0.3, 0.0], 17).unwrap()).unwrap()
}

#[test]
fn sampler_covariance_matches_q() {
    let space = degenerate_space();
    let q = space.q().matrix().clone();
    let n = space.dim();
    let sampler = GaussianSampler::new(space.q(), 5).unwrap();
    let sums = monte_carlo(&sampler, 200_000, n * n, |x, out| {
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = x[i] * x[j];
            }
        }
    })
    .unwrap();
    for i in 0..n {
        for j in 0..n {
            let e = sums.estimate(i * n + j);
            // a kernel direction has exactly zero variance
            if q[(i, j)].abs() < 1e-12 && e.std_error < 1e-12 {
                assert!(e.mean.abs() < 1e-12);
                continue;
            }
            assert!(e.z_score(q[(i, j)]).abs() < MAX_Z, "Q[{i},{j}] = {} vs {e:?}", q[(i, j)]);
        }
    }
}

#[test]
fn hat_map_is_isometric() {
    let space = degenerate_space();
    let cm = space.cameron_martin();
    let h1 = cm.range_proj() * DVector::from_vec(vec![1.0, -0.5, 0.3, 0.8]);
    let h2 = cm.range_proj() * DVector::from_vec(vec![0.2, 0.9, -1.1, 0.4]);
    let d1 = space.hat_direction(&h1).unwrap();
    let d2 = space.hat_direction(&h2).unwrap();
    let sampler = GaussianSampler::new(space.q(), 9).unwrap();
    let sums = monte_carlo(&sampler, 200_000, 3, |x, out| {
        let (a, b) = (x.dot(&d1), x.dot(&d2));
        out[0] = a * a;
        out[1] = b * b;
        out[2] = a * b;
    })
    .unwrap();
    let targets = [
        cm.cm_inner(&h1, &h1).unwrap(),
        cm.cm_inner(&h2, &h2).unwrap(),
        cm.cm_inner(&h1, &h2).unwrap(),
    ];
    for (i, t) in targets.iter().enumerate() {
        let e = sums.estimate(i);
        assert!(e.z_score(*t).abs() < MAX_Z, "stat {i}: {e:?} vs {t}");
    }
}

/// `E[cos ξ Ĥₙ(ξ)]` for `ξ ~ N(0,1)` and normalised Hermite `Ĥₙ`.
fn cos_coefficient(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let trig = [1.0, 0.0, -1.0, 0.0][n % 4];
    (-0.5f64).exp() * trig / fact.sqrt()
}

/// Same for `sin ξ`.
fn sin_coefficient(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let trig = [0.0, 1.0, 0.0, -1.0][n % 4];
    (-0.5f64).exp() * trig / fact.sqrt()
}

#[test]
fn product_chaos_coefficients_factorise() {
    let space = Arc::new(GaussianSpace::new(SelfAdjointOp::diagonal(&[1.5, 0.5]).unwrap()).unwrap());
    let f = FunctionSpec::CosSinProduct { first: 0, second: 1 }.build(2).unwrap();
    // unit directions of H, so W(zᵢ) are independent standard normals
    let dirs = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0])];
    let rv = SmoothRandomVariable::new("cos⊗sin", space, Picture::Cdp, dirs, f.base().clone()).unwrap();
    let exp = chaos_project(&rv, 10).unwrap();
    for c in &exp.coeffs {
        let want = cos_coefficient(c.alpha[0]) * sin_coefficient(c.alpha[1]);
        assert!((c.c - want).abs() < 1e-10, "{:?}: {} vs {want}", c.alpha, c.c);
    }
    // Σ c² → E[cos²ξ] E[sin²η] = (1 + e⁻²)(1 − e⁻²)/4
    let e2 = (-2.0f64).exp();
    let total: f64 = exp.level_norms().iter().sum();
    assert!((total + exp.tail_gap - (1.0 + e2) * (1.0 - e2) / 4.0).abs() < 1e-10);
    assert!(exp.tail_gap.abs() < 1e-4);
}

/// `S(t)f(x)` for `f(y) = min(|y|, 1)^α` on `ℝ`, `R = Id`. The inner
/// minimum is taken over a fine grid that also contains the breakpoints
/// `k = −w` and `k = ±1 − w` exactly; a coarse grid misses the narrow basin
/// at the cusp. The outer maximum is refined once around the best node.
fn cusp_envelope(alpha: f64, x: f64, t: f64) -> f64 {
    let f = |y: f64| y.abs().min(1.0).powf(alpha);
    let reach = (4.0 * t).sqrt();
    let inner = |w: f64| {
        let q = |k: f64| f(w + k) + k * k / (2.0 * t);
        let grid = (0..=4000).map(|i| -reach + 2.0 * reach * i as f64 / 4000.0);
        grid.chain([-w, 1.0 - w, -1.0 - w]).map(q).fold(f64::INFINITY, f64::min)
    };
    let psi = |h: f64| inner(x - h) - h * h / t;
    let outer = (2.0 * t).sqrt();
    let coarse = 2.0 * outer / 1000.0;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for i in 0..=1000 {
        let h = -outer + coarse * i as f64;
        let v = psi(h);
        if v > best {
            (best, arg) = (v, h);
        }
    }
    (0..=400).map(|i| psi(arg - coarse + coarse * i as f64 / 200.0)).fold(best, f64::max)
}

#[test]
fn envelope_of_cusp_matches_brute_force() {
    let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
    let alpha = 0.5;
    let f = FunctionSpec::HolderCusp { direction: 0, alpha }.build(1).unwrap();
    let cfg = EnvelopeConfig::default().with_holder(alpha, 1.0).with_seed(3);
    for &t in &[0.1, 0.01] {
        for &x in &[-1.3, -0.2, 0.0, 0.05, 0.6, 2.0] {
            let s = lasry_lions_s(&f, &DVector::from_element(1, x), t, &cm, &cfg).unwrap();
            let want = cusp_envelope(alpha, x, t);
            assert!(s.converged);
            assert!((s.value - want).abs() < 1e-5, "t={t} x={x}: {} vs {want}", s.value);
        }
    }
}

#[test]
fn k_lower_bound_never_exceeds_upper() {
    let cm = CameronMartinStructure::new(SelfAdjointOp::diagonal(&[0.5]).unwrap());
    let grid = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0];
    let specs = [
        FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 2.0,
            phase: 0.4,
        },
        FunctionSpec::HolderCusp { direction: 0, alpha: 0.5 },
    ];
    let cfg = InterpConfig {
        phi_samples: 2000,
        s_samples: 64,
        ..InterpConfig::default()
    };
    for spec in &specs {
        let f = spec.build(1).unwrap();
        let upper = interp_norm(&f, 0.5, &grid, &cm, &cfg).unwrap();
        let lower = OneDimLowerBound::new(&f, &cm, 8.0, 8001, 200).unwrap();
        for row in &upper.rows {
            let lo = lower.at(row.r);
            assert!(lo <= row.value * (1.0 + 1e-9), "{} r={}: lower {lo} > upper {}", f.name(), row.r, row.value);
            assert!(lo > 0.0);
        }
    }
}

#[test]
fn envelope_of_cos_battery_matches_nested_grid_for_scaled_r() {
    // R = 2 stretches the Cameron-Martin ball; rescaling t by 1/4 maps back to R = 1
    let cm = CameronMartinStructure::new(SelfAdjointOp::diagonal(&[2.0]).unwrap());
    let cfg = EnvelopeConfig::default().with_seed(11);
    let specs = [
        FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 1.0,
            phase: 0.0,
        },
        FunctionSpec::SinCylinder { direction: 0, frequency: 0.7 },
        FunctionSpec::CosCylinder {
            direction: 0,
            frequency: 2.0,
            phase: 0.3,
        },
    ];
    for (fi, (spec, (name, g))) in specs.iter().zip(common::cos_battery()).enumerate() {
        let f = spec.build(1).unwrap();
        for &t in &[0.05, 0.005] {
            let x = -1.0 + 0.7 * fi as f64;
            let s = lasry_lions_s(&f, &DVector::from_element(1, x), t, &cm, &cfg).unwrap();
            let grid = common::nested_grid_ll(g, x, 4.0 * t, 24.0 * t + 0.2, 401);
            assert!((s.value - grid).abs() < 1e-6, "{name} t={t}: {} vs {grid}", s.value);
        }
    }
}
