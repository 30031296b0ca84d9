//! Wiener chaos expansion of a smooth random variable and the identity
//! `E‖DF‖² = Σₙ n‖JₙF‖²`.
//!
//! ```text
//! cargo run --release --example malliavin_chaos
//! ```

use std::sync::Arc;

use malliavin_kit::hilbert::{GaussianSpace, SelfAdjointOp};
use malliavin_kit::malliavin::{chaos_project, domain_check, Picture, SmoothRandomVariable};
use malliavin_kit::FunctionSpec;
use nalgebra::DVector;

fn main() -> malliavin_kit::Result<()> {
    let space = Arc::new(GaussianSpace::new(SelfAdjointOp::diagonal(&[1.0, 0.5, 0.25])?)?);
    // F = cos(W(z₁)) sin(W(z₂)) for orthonormal z₁, z₂
    let f = FunctionSpec::CosSinProduct { first: 0, second: 1 }.build(2)?;
    let dirs = vec![DVector::from_vec(vec![1.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 0.6, 0.8])];
    let rv = SmoothRandomVariable::new("cos·sin", space, Picture::Cdp, dirs, f.base().clone())?;

    let exp = chaos_project(&rv, 10)?;
    println!("level  ‖JₙF‖²");
    for (n, v) in exp.level_norms().iter().enumerate() {
        println!("{n:>5}  {v:.3e}");
    }
    println!("truncation error E[F²] − Σ c² = {:.2e}", exp.tail_gap);
    for alpha in [[0, 1], [2, 1], [0, 3]] {
        println!("c_{alpha:?} = {:+.8}", exp.coefficient(&alpha).unwrap_or(0.0));
    }

    let d = domain_check(&rv, 12)?;
    println!("E‖DF‖² = {:.10}   Σ n‖JₙF‖² = {:.10}   gap {:.1e}", d.lhs, d.rhs, d.relative_gap);
    Ok(())
}
