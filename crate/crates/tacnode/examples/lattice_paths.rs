//! Nonintersecting lattice paths: the binomial determinant against brute
//! force, and the scaled count converging to the cone volume.

use tacnode::cone::{enumerate_path_families, lattice_path_count, lattice_volume_limit};
use tacnode::density::TwoLevelWorkspace;
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    for (x, y, rho) in [(vec![4, 1], vec![2, 0], 2), (vec![6, 3, 1], vec![4, 2, 0], 3)] {
        println!("x={x:?} y={y:?} rho={rho}: det {} brute force {}", lattice_path_count(&x, &y, rho), enumerate_path_families(&x, &y, rho));
    }
    let (x, y) = ([1.5, 0.25], [0.75, -0.5]);
    let g = TwoLevelWorkspace::new(ModelParams::new(2, 2, 0.0)?, &x, &y)?.gamma()?;
    for t in [5, 10, 20, 40] {
        println!("t={t:>3}: extrapolated count {:.10}  (gamma {g:.10})", lattice_volume_limit(&x, &y, 2, t));
    }
    Ok(())
}
