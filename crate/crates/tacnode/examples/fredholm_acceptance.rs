//! Probability that independent shifted GUE minors satisfy the coupling
//! constraints: the finite determinant against rejection sampling.

use tacnode::gue::acceptance_rate;
use tacnode::kernel::fredholm_det;
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    println!("{:>4} {:>6} {:>12} {:>12} {:>10} {:>8}", "rho", "beta", "det", "rate", "stderr", "z");
    for rho in 1..=3 {
        for beta in [0.0, 0.5, 1.0, 1.5] {
            let det = fredholm_det(&ModelParams::new(rho, rho, beta)?);
            let est = acceptance_rate(rho, beta, 200_000, 7 + rho as u64)?;
            let z = (est.rate - det) / est.stderr.max(1e-300);
            println!("{rho:>4} {beta:>6.2} {det:>12.6} {:>12.6} {:>10.2e} {z:>8.2}", est.rate, est.stderr);
        }
    }
    Ok(())
}
