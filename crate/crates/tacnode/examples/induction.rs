//! Integrating the level-n volume over the cone of a level-(n+1) pair
//! reproduces the level-(n+1) volume.

use tacnode::cone::induction_step_check;
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    let z = [1.6, 0.4, -0.7];
    let w = [1.1, -0.2, -1.5];
    for (n, rho) in [(1, 1), (2, 1), (2, 2)] {
        let p = ModelParams::new(n, rho, 0.0)?;
        let (z, w) = (&z[..n + 1], &w[..n + 1]);
        let r = induction_step_check(&p, z, w, 12)?;
        println!("n={n}->{} rho={rho}: integral {:.12}, closed form {:.12}, residual {:.1e}", n + 1, r.integral, r.closed_form, r.residual);
    }
    Ok(())
}
