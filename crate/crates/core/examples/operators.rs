//! Build a rank-deficient operator `R`, inspect its pseudo-inverse and the
//! Cameron-Martin space `H_R = R(H)`.
//!
//! ```text
//! cargo run --example operators
//! ```

use malliavin_kit::hilbert::{CameronMartinStructure, SelfAdjointOp};
use nalgebra::DVector;

fn main() -> malliavin_kit::Result<()> {
    // eigenvalues 1, 1/2, 1/3 and a one-dimensional kernel, in a random frame
    let r = SelfAdjointOp::rotated(&[1.0, 0.5, 1.0 / 3.0, 0.0], 7)?;
    let cm = CameronMartinStructure::new(r.clone());
    println!("dim {}  rank {}  ‖R‖ {:.4}  tr R {:.4}", cm.dim(), cm.rank(), r.op_norm(), r.trace());

    let res = cm.identity_residuals(r.matrix());
    println!("pseudo-inverse identities (relative residuals):");
    println!("  R R⁺ R = R        {:.2e}", res.r_pinv_r);
    println!("  R⁺ R = Id − P_ker {:.2e}", res.pinv_r);
    println!("  R R⁺ = Id − P_ker {:.2e}", res.r_pinv);
    println!("  R⁺ R R⁺ = R⁺      {:.2e}", res.pinv_r_pinv);

    // x = R v lies in H_R and ‖x‖_{H_R} = ‖(Id − P_ker) v‖
    let v = DVector::from_vec(vec![0.3, -1.2, 0.8, 0.5]);
    let x = cm.apply_r(&v);
    let projected = cm.range_proj() * &v;
    println!("‖Rv‖_(H_R) = {:.12}, ‖(Id − P_ker)v‖ = {:.12}", cm.cm_norm(&x)?, projected.norm());
    println!("embedding: ‖x‖ = {:.4} ≤ ‖R‖ ‖x‖_(H_R) = {:.4}", x.norm(), r.op_norm() * cm.cm_norm(&x)?);

    // a vector with a kernel component has no H_R norm
    let outside = cm.ker_proj() * DVector::from_element(4, 1.0) + &x;
    match cm.cm_norm(&outside) {
        Ok(n) => println!("unexpected norm {n}"),
        Err(e) => println!("kernel component rejected: {e}"),
    }
    Ok(())
}
