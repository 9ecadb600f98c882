//! Finite-n look at the tacnode limit: rescaled dots on the overlap line of
//! a double diamond against the kernel's one-point density.

use tacnode::aztec::{build_region, extract_dots, run_chains, scaling_weight, unscale_point, ChainSchedule};
use tacnode::kernel::{LevelPoint, TacnodeKernel};
use tacnode::quad::integrate_split;
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    let (n, rho, u) = (16usize, 2usize, 1i32);
    let r = build_region(n, rho)?;
    let a = scaling_weight(n, 0.0);
    let cells = r.len() as u64;
    let line = (n as i32 - u) as usize;
    let sched = ChainSchedule { chains: 4, burn_in: 4000 * cells, samples: 100, thin: 20 * cells };
    let parts = run_chains(&r, a, sched, 5, |t, acc: &mut Vec<f64>| {
        if let Ok(d) = extract_dots(&r, t) {
            acc.extend(d.lines[line].iter().map(|d| unscale_point(n, 2 * line as i32, d.eta).z));
        }
    })?;
    let ys: Vec<f64> = parts.into_iter().flatten().collect();
    let samples = (sched.chains * sched.samples) as f64;
    let k = TacnodeKernel::new(ModelParams::new(n, rho, 0.0)?)?;
    let f = |z: f64| k.eval(LevelPoint::new(u, z), LevelPoint::new(u, z));
    // a dot at η stands for y in [k/√t, (k+1)/√t), t = ⌊n/2⌋
    let step = 1.0 / ((n / 2) as f64).sqrt();
    println!("{:>18} {:>10} {:>10}", "cell", "dots/cfg", "kernel");
    for k in -6..6 {
        let (lo, hi) = (k as f64 * step, (k + 1) as f64 * step);
        let count = ys.iter().filter(|&&y| (y - lo).abs() < 1e-9).count() as f64 / samples;
        println!("[{lo:>7.4},{hi:>7.4}) {count:>10.4} {:>10.4}", integrate_split(&f, lo, hi, &[], 12));
    }
    Ok(())
}
