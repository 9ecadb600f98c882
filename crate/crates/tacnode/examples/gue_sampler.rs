//! One accepted coupled pair and the interlacing chain built from it.

use tacnode::gue::{assemble_chain, sample_coupled_pair, DEFAULT_ATTEMPT_CAP};
use tacnode::rng::substream;
use tacnode::ModelParams;

fn main() -> tacnode::Result<()> {
    let p = ModelParams::new(4, 2, 0.3)?;
    let mut rng = substream(2024, 0);
    let pair = sample_coupled_pair(&p, &mut rng, DEFAULT_ATTEMPT_CAP)?;
    println!("accepted after {} attempts", pair.attempts);
    let chain = assemble_chain(&p, &pair)?;
    chain.validate(1e-12)?;
    for (u, level) in chain.levels.iter().rev() {
        let vals: Vec<String> = level.values().iter().map(|v| format!("{v:8.4}")).collect();
        println!("u={u:>3}  {}", vals.join(" "));
    }
    Ok(())
}
