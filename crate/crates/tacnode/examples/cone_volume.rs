//! Closed-form double-cone volume by both linear-algebra routes, against a
//! Monte Carlo estimate.

use tacnode::cone::mc_volume;
use tacnode::density::TwoLevelWorkspace;
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    let x = [1.4, 0.3, -0.8];
    let y = [0.9, -0.4, -1.6];
    for rho in 1..=3 {
        let p = ModelParams::new(3, rho, 0.0)?;
        let ws = TwoLevelWorkspace::new(p, &x, &y)?;
        let (g, route) = ws.gamma_with_route()?;
        let gh = ws.gamma_hermite_system()?;
        let (mc, se) = mc_volume(&p, &x, &y, 1_000_000, 42)?;
        println!("rho={rho}: gamma {g:.10} ({route:?}), hermite route {gh:.10}, MC {mc:.5} ± {se:.5}");
    }
    Ok(())
}
