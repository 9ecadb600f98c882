//! One-level densities against the kernel determinant, and the joint law of
//! the two top levels.

use tacnode::density::{one_level_density, JointDensity};
use tacnode::kernel::{LevelPoint, TacnodeKernel};
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    let p = ModelParams::new(3, 2, 0.4)?;
    let k = TacnodeKernel::new(p)?;
    let points: [(i32, &[f64]); 4] = [(-1, &[1.1, 0.2, -0.9]), (0, &[0.4, -0.6]), (1, &[0.9, -0.3]), (3, &[1.5, 0.0, -1.2])];
    for (u, z) in points {
        let d = one_level_density(&p, u, z)?;
        let pts: Vec<LevelPoint> = z.iter().map(|&v| LevelPoint::new(u, v)).collect();
        println!("u={u:>2} z={z:?}: density {d:.12e}, det K {:.12e}", k.correlation_det(&pts));
    }
    let jd = JointDensity::new(ModelParams::new(2, 1, 0.3)?)?;
    println!("\njoint density of (x, y) at x=(1.0,-0.2), y=(0.5,-1.0): {:.10}", jd.eval(&[1.0, -0.2], &[0.5, -1.0])?);
    Ok(())
}
