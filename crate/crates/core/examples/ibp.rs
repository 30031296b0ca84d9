//! Monte-Carlo integration by parts `E⟨DF, h⟩ = E[F W(h)]` in both pictures,
//! and the Sobolev norm of one random variable computed in each.
//!
//! ```text
//! cargo run --release --example ibp
//! ```

use std::sync::Arc;

use malliavin_kit::hilbert::{GaussianSpace, SelfAdjointOp};
use malliavin_kit::malliavin::{compare_pictures, ibp_check, sobolev_norm, Picture};
use malliavin_kit::suites::random_variable;
use malliavin_kit::FunctionSpec;
use nalgebra::DVector;

fn main() -> malliavin_kit::Result<()> {
    let q = SelfAdjointOp::rotated(&[1.0, 0.5, 1.0 / 3.0, 0.25], 3)?;
    let space = Arc::new(GaussianSpace::new(q)?);
    let f = FunctionSpec::SinCylinder {
        direction: 0,
        frequency: 1.5,
    }
    .build(4)?;
    let cdp = random_variable(&f, &space)?;
    let h = DVector::from_vec(vec![0.5, -1.0, 0.25, 0.75]);

    for picture in [Picture::Cdp, Picture::Gross] {
        let rv = cdp.in_picture(picture)?;
        // in the Gross picture h must lie in the Cameron-Martin space Q^{1/2}(H)
        let dir = match picture {
            Picture::Cdp => h.clone(),
            Picture::Gross => space.sqrt_q().apply(&h)?,
        };
        let c = ibp_check(&rv, &dir, 400_000, 1)?;
        println!(
            "{picture:?}: E⟨DF,h⟩ = {:+.5} ± {:.1e}, E[F W(h)] = {:+.5} ± {:.1e}, z = {:+.2}",
            c.derivative_side.mean,
            c.derivative_side.std_error,
            c.noise_side.mean,
            c.noise_side.std_error,
            c.z_score()
        );
    }

    let cmp = compare_pictures(&cdp, 200, 2)?;
    println!("D_Gross F = Q^(1/2) D_CDP F up to {:.1e}", cmp.componentwise);
    for picture in [Picture::Cdp, Picture::Gross] {
        let s = sobolev_norm(&cdp, 2.0, picture, 200_000, 4)?;
        println!("{picture:?}: ‖F‖_(D^1,2) = {:.5} (E‖DF‖² = {:.5} ± {:.1e})", s.norm, s.gradient_term.mean, s.gradient_term.std_error);
    }
    Ok(())
}
