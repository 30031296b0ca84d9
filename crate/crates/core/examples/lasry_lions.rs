//! Lasry-Lions regularisation along a degenerate `R`: the envelope of a
//! Hölder cusp, its approximation rate, and the a-priori bounds.
//!
//! ```text
//! cargo run --release --example lasry_lions
//! ```

use malliavin_kit::hilbert::{CameronMartinStructure, SelfAdjointOp};
use malliavin_kit::lasry_lions::{holder_seminorm, lasry_lions_s, EnvelopeConfig, HolderInfo, HolderSampling};
use malliavin_kit::FunctionSpec;
use nalgebra::DVector;

fn main() -> malliavin_kit::Result<()> {
    let alpha = 0.5;
    let cm = CameronMartinStructure::new(SelfAdjointOp::diagonal(&[1.0, 0.5, 0.0])?);
    // min(1, |x₀|)^α: Hölder but not Lipschitz at the origin
    let f = FunctionSpec::HolderCusp { direction: 0, alpha }.build(3)?;
    let semi = holder_seminorm(&f, alpha, &cm, &HolderSampling::default())?.seminorm;
    println!("[f]_(R,α) ≈ {semi:.4}");

    let info = HolderInfo { alpha, seminorm: semi };
    let cfg = EnvelopeConfig::default().with_holder(alpha, semi);
    // the gap f − S is largest on the slopes of the cusp
    let points: Vec<DVector<f64>> = [0.02, 0.1, 0.3, 0.7].iter().map(|&a| DVector::from_vec(vec![a, 0.2, -1.0])).collect();
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "t", "max f − S", "bound", "max ‖∇S‖", "bound");
    for t in [1e-1, 1e-2, 1e-3, 1e-4] {
        let (mut gap, mut grad) = (0.0_f64, 0.0_f64);
        for x in &points {
            let s = lasry_lions_s(&f, x, t, &cm, &cfg)?;
            gap = gap.max(f.value(x) - s.value);
            grad = grad.max(s.gradient_norm);
        }
        println!(
            "{t:>8.0e} {gap:>12.6} {:>12.6} {grad:>12.4} {:>12.4}",
            info.approximation_bound(t),
            info.lipschitz_bound(t)
        );
    }

    let x = points[1].clone();

    // moving along ker R changes nothing
    let shifted = &x + DVector::from_vec(vec![0.0, 0.0, 5.0]);
    let a = lasry_lions_s(&f, &x, 0.01, &cm, &cfg)?.value;
    let b = lasry_lions_s(&f, &shifted, 0.01, &cm, &cfg)?.value;
    println!("S(x) = {a:.10}, S(x + v) = {b:.10} for v ∈ ker R");
    Ok(())
}
