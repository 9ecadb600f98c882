//! Hermite family, the erf pair and the Φ/Ψ integrals on a few points,
//! with Φ checked against direct quadrature.

use tacnode::special::{erf_pair, hermite, hermite_tilde, p_poly, phi_fn, phi_integral, psi_fn, q_poly};

fn main() {
    println!("{:>4} {:>8} {:>14} {:>14} {:>14} {:>14}", "m", "x", "H_m", "H~_m", "P_m", "Q_m");
    for m in 0..=4 {
        let x = 0.7;
        println!("{m:>4} {x:>8.2} {:>14.6} {:>14.6} {:>14.6} {:>14.6}", hermite(m, x), hermite_tilde(m, x), p_poly(m, x), q_poly(m, x));
    }
    let (f, g) = erf_pair(0.3);
    println!("\nF(0.3) = {f:.12}, G(0.3) = {g:.12}, F+G = {:.1}", f + g);

    println!("\n{:>4} {:>6} {:>20} {:>12} {:>20}", "m", "eta", "Phi_m", "|quad diff|", "Psi_m");
    for m in [-3, -1, 0, 2, 5] {
        for eta in [-1.5, 0.0, 2.0] {
            let phi = phi_fn(m, eta);
            println!("{m:>4} {eta:>6.1} {phi:>20.14} {:>12.1e} {:>20.14}", (phi - phi_integral(m, eta)).abs(), psi_fn(m, eta));
        }
    }
}
