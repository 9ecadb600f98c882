//! The tacnode kernel: diagonal values across levels and the level traces,
//! which count particles per level.

use tacnode::kernel::{minor_kernel, LevelPoint, TacnodeKernel};
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    let p = ModelParams::new(3, 2, 0.5)?;
    let k = TacnodeKernel::new(p)?;
    print!("{:>6}", "z \\ u");
    for u in p.levels() {
        print!("{u:>12}");
    }
    println!();
    for i in 0..=8 {
        let z = -2.0 + 0.5 * i as f64;
        print!("{z:>6.2}");
        for u in p.levels() {
            let pt = LevelPoint::new(u, z);
            print!("{:>12.6}", k.eval(pt, pt));
        }
        println!();
    }
    println!("\nlevel traces (particle counts):");
    for u in p.levels() {
        println!("  u={u:>2}: trace {:.8}, expected {}", k.level_trace(u), p.level_size(u));
    }
    let o = LevelPoint::new(1, 0.0);
    println!("\nminor kernel at (1,0;1,0), beta=0: {:.15}", minor_kernel(o, o, 0.0));
    Ok(())
}
