//! Glauber dynamics on a double diamond; writes the final tiling as SVG.
//!
//! cargo run --release --example aztec_glauber -- out.svg

use tacnode::aztec::{build_region, extract_dots, rescale_particles, sample_tiling_mcmc, scaling_weight, tiling_svg};
use tacnode::rng::substream;

fn main() -> tacnode::Result<()> {
    let (n, rho) = (8, 3);
    let r = build_region(n, rho)?;
    let a = scaling_weight(n, 0.5);
    let mut rng = substream(99, 0);
    let t = sample_tiling_mcmc(&r, a, 4000 * r.len() as u64, &mut rng)?;
    let dots = extract_dots(&r, &t)?;
    dots.to_chain()?.validate(0.0)?;
    println!("a = {a:.4}, {} cells, {} vertical dominoes", r.len(), t.weight_exponent);
    for (pt, color) in rescale_particles(&dots).iter().filter(|(p, _)| p.u == 1) {
        println!("  overlap line dot: y = {:7.4} ({color:?})", pt.z);
    }
    let path = std::env::args().nth(1).unwrap_or_else(|| "tiling.svg".into());
    std::fs::write(&path, tiling_svg(&r, &t)?).expect("write svg");
    println!("wrote {path}");
    Ok(())
}
