//! Upper bounds on the K-functional between bounded and `R`-Lipschitz
//! functions, the resulting interpolation norm, and a one-dimensional lower
//! bound to compare against.
//!
//! ```text
//! cargo run --release --example interpolation
//! ```

use malliavin_kit::hilbert::{CameronMartinStructure, SelfAdjointOp};
use malliavin_kit::interpolation::{embedding_check, interp_norm, log_grid, InterpConfig, OneDimLowerBound};
use malliavin_kit::FunctionSpec;

fn main() -> malliavin_kit::Result<()> {
    let alpha = 0.5;
    let cm = CameronMartinStructure::new(SelfAdjointOp::identity(1));
    let f = FunctionSpec::HolderCusp { direction: 0, alpha }.build(1)?;
    let grid = log_grid(1e-3, 1e1, 9);
    let norm = interp_norm(&f, alpha, &grid, &cm, &InterpConfig::default())?;
    let lower = OneDimLowerBound::new(&f, &cm, 8.0, 16_001, 300)?;

    println!("‖φ‖∞ = {:.3}, [φ]_α ≈ {:.4}", norm.norms.sup.value, norm.norms.holder);
    println!("{:>8} {:>10} {:>10} {:>8}  split", "r", "K upper", "K lower", "ratio");
    for row in &norm.rows {
        let lo = lower.at(row.r);
        println!("{:>8.0e} {:>10.5} {:>10.5} {:>8.3}  {:?}", row.r, row.value, lo, row.value / lo, row.best.kind);
    }
    let emb = embedding_check(&norm);
    println!("sup_r r^(−α) K(r) ≤ {:.4}", norm.bracket);
    println!("[φ]_α = {:.4} ≤ 3 · {:.4}: {}", emb.seminorm, emb.interp_upper, emb.pass);
    println!("k₁ + k₂ = {:.4}", norm.norms.k1() + norm.norms.k2());
    Ok(())
}
