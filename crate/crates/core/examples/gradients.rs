//! The gradient along `R` and the Cameron-Martin gradient of a cylinder
//! function, the relations between them, and what happens on `ker R`.
//!
//! ```text
//! cargo run --example gradients
//! ```

use malliavin_kit::gradients::{grad_hr, grad_r, hess_hr, hess_r, verify_relations};
use malliavin_kit::hilbert::{CameronMartinStructure, SelfAdjointOp};
use malliavin_kit::FunctionSpec;
use nalgebra::DVector;

fn main() -> malliavin_kit::Result<()> {
    let cm = CameronMartinStructure::new(SelfAdjointOp::rotated(&[2.0, 1.0, 0.5, 0.0], 11)?);
    let f = FunctionSpec::CosSinProduct { first: 0, second: 2 }.build(4)?;
    let x = DVector::from_vec(vec![0.4, -0.3, 1.1, 0.7]);

    let gr = grad_r(&f, &x, &cm)?;
    let ghr = grad_hr(&f, &x, &cm)?;
    println!("F = {}  F(x) = {:.6}", f.name(), f.value(&x));
    println!("∇_R F(x)     = {:.6?}", gr.as_slice());
    println!("∇_(H_R) F(x) = {:.6?}", ghr.as_slice());
    println!("‖∇_R F‖_H = {:.12}   ‖∇_(H_R) F‖_(H_R) = {:.12}", gr.norm(), cm.cm_norm(&ghr)?);

    let h2 = hess_r(&f, &x, &cm)?;
    let h2cm = hess_hr(&f, &x, &cm)?;
    println!("‖∇²_R F‖ = {:.6}   ‖∇²_(H_R) F‖ = {:.6}", h2.norm(None, 1)?, h2cm.norm(Some(&cm), 1)?);

    // both gradients ignore ker R
    let v = cm.ker_proj() * DVector::from_element(4, 1.0);
    println!("⟨∇_R F, v⟩ for v ∈ ker R: {:.1e}", gr.dot(&v));

    let res = verify_relations(&f, &x, &cm, 8, 3)?;
    println!("relations: analytic {:.2e}, finite-difference {:.2e}, kernel {:.2e}", res.analytic(), res.fd(), res.kernel_exact);
    Ok(())
}
