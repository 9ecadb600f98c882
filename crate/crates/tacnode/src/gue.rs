//! Shifted GUE matrices, minor spectra and the rejection-coupled pair.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::run_chunks;
use crate::spectrum::{interlaces, InterlacingChain, SpectrumVector};

pub const DEFAULT_ATTEMPT_CAP: u64 = 10_000_000;

const HERMITIAN_TOL: f64 = 1e-10;
const INTERLACE_TOL: f64 = 1e-9;

/// shift·𝟙 + GUE(n): diagonal N(shift, ½), off-diagonal real and imaginary
/// parts N(0, ¼).
pub fn sample_shifted_gue<R: Rng + ?Sized>(n: usize, shift: f64, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if n < 1 {
        return Err(Error::InvalidParams("matrix size must be at least 1".into()));
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m[(i, i)] = Complex64::new(shift + d * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for j in 0..i {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(0.5 * re, 0.5 * im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(m)
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
    }
    let scale = m.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if worst > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(worst));
    }
    Ok(())
}

fn minor_eigenvalues(m: &DMatrix<Complex64>, k: usize) -> Vec<f64> {
    match k {
        1 => vec![m[(0, 0)].re],
        2 => {
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let mid = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + m[(1, 0)].norm_sqr()).sqrt();
            vec![mid + r, mid - r]
        }
        _ => {
            let mut v: Vec<f64> = m.view((0, 0), (k, k)).clone_owned().symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
    }
}

/// Spectra of the leading k×k minors, k = 1..=levels, each decreasing.
fn minor_spectra_upto(m: &DMatrix<Complex64>, levels: usize) -> Result<Vec<SpectrumVector>> {
    let mut out: Vec<SpectrumVector> = Vec::with_capacity(levels);
    for k in 1..=levels {
        let s = SpectrumVector::new(minor_eigenvalues(m, k), k as i32)?;
        if let Some(prev) = out.last() {
            if !interlaces(prev.values(), s.values(), INTERLACE_TOL * (1.0 + s.max().abs().max(s.min().abs()))) {
                return Err(Error::Interlacing(format!("minor {} does not interlace minor {k}", k - 1)));
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Spectra of all leading principal minors, levels 1..n.
pub fn minor_spectra(m: &DMatrix<Complex64>) -> Result<Vec<SpectrumVector>> {
    check_hermitian(m)?;
    minor_spectra_upto(m, m.nrows())
}

/// First i in 1..=ρ with max y^(i) > min x^(ρ−i+1), if any.
pub fn constraint_violation(x_chain: &[SpectrumVector], y_chain: &[SpectrumVector], rho: usize) -> Option<usize> {
    (1..=rho).find(|&i| y_chain[i - 1].max() > x_chain[rho - i].min())
}

#[derive(Debug, Clone, Serialize)]
pub struct CoupledPairSample {
    pub x_chain: Vec<SpectrumVector>,
    pub y_chain: Vec<SpectrumVector>,
    pub accepted: bool,
    pub attempts: u64,
}

/// Draws A ∈ β𝟙+GUE(n), B ∈ −β𝟙+GUE(n) until the ρ constraints hold.
/// Only the first ρ minors are diagonalized for rejected draws.
pub fn sample_coupled_pair<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R, cap: u64) -> Result<CoupledPairSample> {
    let (n, rho) = (params.n, params.rho);
    for attempt in 1..=cap {
        let a = sample_shifted_gue(n, params.beta, rng)?;
        let b = sample_shifted_gue(n, -params.beta, rng)?;
        let xs = minor_spectra_upto(&a, rho)?;
        let ys = minor_spectra_upto(&b, rho)?;
        if constraint_violation(&xs, &ys, rho).is_some() {
            continue;
        }
        return Ok(CoupledPairSample {
            x_chain: minor_spectra_upto(&a, n)?,
            y_chain: minor_spectra_upto(&b, n)?,
            accepted: true,
            attempts: attempt,
        });
    }
    Err(Error::BudgetExhausted(cap))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AcceptanceEstimate {
    pub trials: u64,
    pub accepted: u64,
    pub rate: f64,
    pub stderr: f64,
}

/// Monte Carlo probability that independent ρ×ρ minors satisfy the
/// constraints. Larger levels never enter the test.
pub fn acceptance_rate(rho: usize, beta: f64, trials: u64, seed: u64) -> Result<AcceptanceEstimate> {
    if rho < 1 || trials == 0 {
        return Err(Error::InvalidParams("need ρ ≥ 1 and trials > 0".into()));
    }
    let hits = run_chunks(trials, 1 << 14, seed, |rng, len| -> Result<u64> {
        let mut acc = 0;
        for _ in 0..len {
            let xs = minor_spectra_upto(&sample_shifted_gue(rho, beta, rng)?, rho)?;
            let ys = minor_spectra_upto(&sample_shifted_gue(rho, -beta, rng)?, rho)?;
            if constraint_violation(&xs, &ys, rho).is_none() {
                acc += 1;
            }
        }
        Ok(acc)
    });
    let accepted = hits.into_iter().sum::<Result<u64>>()?;
    let rate = accepted as f64 / trials as f64;
    Ok(AcceptanceEstimate { trials, accepted, rate, stderr: (rate * (1.0 - rate) / trials as f64).sqrt() })
}

/// Collects `count` accepted pairs, chunked over seeded substreams.
pub fn collect_accepted(params: &ModelParams, count: u64, seed: u64, cap: u64) -> Result<Vec<CoupledPairSample>> {
    let chunks = run_chunks(count, 2048, seed, |rng, len| -> Result<Vec<CoupledPairSample>> {
        (0..len).map(|_| sample_coupled_pair(params, rng, cap)).collect()
    });
    let mut out = Vec::with_capacity(count as usize);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Levels u ∈ [ρ−n, n] of an accepted pair: x^(u) above ρ, y^(ρ−u) below 0,
/// and y^(ρ−u) ∪ x^(u) in between.
pub fn assemble_chain(params: &ModelParams, pair: &CoupledPairSample) -> Result<InterlacingChain> {
    let (n, rho) = (params.n, params.rho);
    if pair.x_chain.len() != n || pair.y_chain.len() != n {
        return Err(Error::Dimension { expected: n, got: pair.x_chain.len().min(pair.y_chain.len()) });
    }
    if let Some(i) = constraint_violation(&pair.x_chain, &pair.y_chain, rho) {
        return Err(Error::Constraint(i));
    }
    let mut levels = BTreeMap::new();
    for u in params.levels() {
        let v = if u >= rho as i32 {
            pair.x_chain[u as usize - 1].values().to_vec()
        } else if u <= 0 {
            pair.y_chain[(rho as i32 - u) as usize - 1].values().to_vec()
        } else {
            let mut v = pair.y_chain[rho - u as usize - 1].values().to_vec();
            v.extend_from_slice(pair.x_chain[u as usize - 1].values());
            v
        };
        levels.insert(u, SpectrumVector::from_unsorted(v, u));
    }
    let chain = InterlacingChain { params: *params, levels };
    chain.validate(INTERLACE_TOL)?;
    Ok(chain)
}

/// Binned particle counts of one level over accepted samples.
#[derive(Debug, Clone, Serialize)]
pub struct LevelHistogram {
    pub level: i32,
    pub edges: Vec<f64>,
    /// all particles of the level
    pub counts: Vec<u64>,
    /// counts[j][b]: the j-th largest particle in bin b
    pub order_counts: Vec<Vec<u64>>,
    pub trials: u64,
    pub accepted: u64,
    /// mean particle number per bin and accepted sample, with standard errors
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

fn bin_of(edges: &[f64], v: f64) -> Option<usize> {
    if v < edges[0] || v >= edges[edges.len() - 1] {
        return None;
    }
    Some(edges.partition_point(|&e| e <= v) - 1)
}

/// Runs `trials` rejection draws and bins level u of the accepted ones.
pub fn empirical_level_histogram(params: &ModelParams, u: i32, trials: u64, edges: &[f64], seed: u64) -> Result<LevelHistogram> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("bin edges must be increasing".into()));
    }
    if !params.levels().contains(&u) {
        return Err(Error::IndexOutOfRange { index: u as i64, lo: params.levels().start().to_owned() as i64, hi: *params.levels().end() as i64 });
    }
    let bins = edges.len() - 1;
    let size = params.level_size(u);
    type Partial = (u64, Vec<Vec<u64>>, Vec<f64>);
    let parts = run_chunks(trials, 1 << 12, seed, |rng, len| -> Result<Partial> {
        let mut acc = 0;
        let mut oc = vec![vec![0u64; bins]; size];
        let mut sq = vec![0.0; bins];
        for _ in 0..len {
            let pair = match sample_coupled_pair(params, rng, 1) {
                Ok(p) => p,
                Err(Error::BudgetExhausted(_)) => continue,
                Err(e) => return Err(e),
            };
            acc += 1;
            let chain = assemble_chain(params, &pair)?;
            let mut per = vec![0u64; bins];
            for (j, &v) in chain.levels[&u].values().iter().enumerate() {
                if let Some(b) = bin_of(edges, v) {
                    oc[j][b] += 1;
                    per[b] += 1;
                }
            }
            for b in 0..bins {
                sq[b] += (per[b] * per[b]) as f64;
            }
        }
        Ok((acc, oc, sq))
    });
    let mut accepted = 0;
    let mut order_counts = vec![vec![0u64; bins]; size];
    let mut sq = vec![0.0; bins];
    for part in parts {
        let (a, oc, s) = part?;
        accepted += a;
        for j in 0..size {
            for b in 0..bins {
                order_counts[j][b] += oc[j][b];
            }
        }
        for b in 0..bins {
            sq[b] += s[b];
        }
    }
    if accepted == 0 {
        return Err(Error::NoSamples);
    }
    let counts: Vec<u64> = (0..bins).map(|b| order_counts.iter().map(|r| r[b]).sum()).collect();
    let na = accepted as f64;
    let mean: Vec<f64> = counts.iter().map(|&c| c as f64 / na).collect();
    let stderr = (0..bins).map(|b| ((sq[b] / na - mean[b] * mean[b]).max(0.0) / na).sqrt()).collect();
    Ok(LevelHistogram { level: u, edges: edges.to_vec(), counts, order_counts, trials, accepted, mean, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::fredholm_det;
    use crate::rng::substream;
    use crate::stats::{chi_square, mean_stderr};

    #[test]
    fn entry_variance_is_half() {
        let mut rng = substream(11, 0);
        let v: Vec<f64> = (0..200_000).map(|_| sample_shifted_gue(1, 0.0, &mut rng).unwrap()[(0, 0)].re).collect();
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        // var of x² for N(0, ½) is 2·¼
        let se = (0.5f64 / v.len() as f64).sqrt();
        assert!((var - 0.5).abs() < 4.0 * se, "var {var}");
        let below = v.iter().filter(|&&x| x <= 0.0).count() as f64 / v.len() as f64;
        assert!((below - 0.5).abs() < 4.0 * (0.25 / v.len() as f64).sqrt());
    }

    #[test]
    fn trace_mean_follows_shift() {
        let mut rng = substream(12, 0);
        let t: Vec<f64> = (0..50_000).map(|_| {
            let m = sample_shifted_gue(2, 0.7, &mut rng).unwrap();
            m[(0, 0)].re + m[(1, 1)].re
        }).collect();
        let (m, se) = mean_stderr(&t);
        assert!((m - 1.4).abs() < 4.0 * se);
    }

    #[test]
    fn diagonal_and_identity_spectra() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(3.0, 0.0), Complex64::new(1.0, 0.0)]));
        let s = minor_spectra(&d).unwrap();
        assert_eq!(s[0].values(), &[3.0]);
        assert_eq!(s[1].values(), &[3.0, 1.0]);
        let id = DMatrix::<Complex64>::identity(3, 3);
        for lvl in minor_spectra(&id).unwrap() {
            assert!(lvl.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn random_minors_interlace() {
        let mut rng = substream(13, 0);
        for _ in 0..200 {
            let m = sample_shifted_gue(4, 0.3, &mut rng).unwrap();
            let s = minor_spectra(&m).unwrap();
            for k in 1..4 {
                assert!(interlaces(s[k - 1].values(), s[k].values(), 1e-9));
            }
            let full: f64 = s[3].values().iter().sum();
            let tr: f64 = (0..4).map(|i| m[(i, i)].re).sum();
            assert!((full - tr).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(minor_spectra(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn acceptance_symmetric_case() {
        let est = acceptance_rate(1, 0.0, 100_000, 5).unwrap();
        assert!((est.rate - 0.5).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn acceptance_matches_fredholm_rho2() {
        let p = ModelParams::new(2, 2, 0.3).unwrap();
        let est = acceptance_rate(2, 0.3, 100_000, 6).unwrap();
        let f = fredholm_det(&p);
        assert!((est.rate - f).abs() < 3.0 * est.stderr, "{est:?} vs {f}");
    }

    #[test]
    fn acceptance_increases_with_beta() {
        let rates: Vec<f64> = [0.0, 0.5, 1.0, 2.0].iter().map(|&b| acceptance_rate(1, b, 40_000, 9).unwrap().rate).collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
    }

    #[test]
    fn acceptance_is_shift_invariant() {
        let mut r1 = substream(21, 0);
        let mut r2 = substream(21, 0);
        for _ in 0..500 {
            let a = sample_shifted_gue(3, 0.4, &mut r1).unwrap();
            let b = sample_shifted_gue(3, -0.4, &mut r1).unwrap();
            let a2 = sample_shifted_gue(3, 0.4 + 1.7, &mut r2).unwrap();
            let b2 = sample_shifted_gue(3, -0.4 + 1.7, &mut r2).unwrap();
            let ok = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| {
                constraint_violation(&minor_spectra(a).unwrap(), &minor_spectra(b).unwrap(), 2).is_none()
            };
            assert_eq!(ok(&a, &b), ok(&a2, &b2));
        }
    }

    #[test]
    fn chain_for_single_level_pair() {
        let p = ModelParams::new(1, 1, 0.0).unwrap();
        let pair = sample_coupled_pair(&p, &mut substream(3, 0), DEFAULT_ATTEMPT_CAP).unwrap();
        let c = assemble_chain(&p, &pair).unwrap();
        assert_eq!(c.levels.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
        assert!(c.levels[&0].max() <= c.levels[&1].min());
    }

    #[test]
    fn chain_union_level_and_mixed_order() {
        let p = ModelParams::new(3, 3, 0.5).unwrap();
        let pair = sample_coupled_pair(&p, &mut substream(4, 0), DEFAULT_ATTEMPT_CAP).unwrap();
        let c = assemble_chain(&p, &pair).unwrap();
        let mut want: Vec<f64> = pair.y_chain[1].values().iter().chain(pair.x_chain[0].values()).copied().collect();
        want.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(c.levels[&1].values(), &want[..]);

        let p = ModelParams::new(4, 2, 0.2).unwrap();
        let mut rng = substream(5, 0);
        for _ in 0..50 {
            let pair = sample_coupled_pair(&p, &mut rng, DEFAULT_ATTEMPT_CAP).unwrap();
            let c = assemble_chain(&p, &pair).unwrap();
            for u in 0..2 {
                let (z, zp) = (c.levels[&u].values(), c.levels[&(u + 1)].values());
                for j in 0..2 {
                    assert!(zp[j] >= z[j]);
                    if j + 1 < 2 {
                        assert!(z[j] >= zp[j + 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn violated_pair_is_refused() {
        let p = ModelParams::new(1, 1, 0.0).unwrap();
        let pair = CoupledPairSample {
            x_chain: vec![SpectrumVector::new(vec![0.0], 1).unwrap()],
            y_chain: vec![SpectrumVector::new(vec![1.0], 1).unwrap()],
            accepted: true,
            attempts: 1,
        };
        assert!(matches!(assemble_chain(&p, &pair), Err(Error::Constraint(1))));
    }

    // given (x^(2), y^(2)), the pair (y^(1), x^(1)) is uniform on a box
    #[test]
    fn conditional_uniformity_rho2() {
        let p = ModelParams::new(2, 2, 0.0).unwrap();
        let pairs = collect_accepted(&p, 40_000, 8, DEFAULT_ATTEMPT_CAP).unwrap();
        let k = 5;
        let mut obs = vec![0.0; k * k];
        for s in &pairs {
            let (x2, y2) = (s.x_chain[1].values(), s.y_chain[1].values());
            let (ylo, yhi) = (y2[1], y2[0].min(x2[1]));
            let (xlo, xhi) = (x2[1].max(y2[0]), x2[0]);
            let a = ((s.y_chain[0].max() - ylo) / (yhi - ylo) * k as f64).floor().clamp(0.0, k as f64 - 1.0) as usize;
            let b = ((s.x_chain[0].max() - xlo) / (xhi - xlo) * k as f64).floor().clamp(0.0, k as f64 - 1.0) as usize;
            obs[a * k + b] += 1.0;
        }
        let exp = vec![pairs.len() as f64 / (k * k) as f64; k * k];
        let chi = chi_square(&obs, &exp, 5.0);
        assert!(chi.p_value > 0.01, "{chi:?}");
    }

    #[test]
    fn histogram_errors() {
        let p = ModelParams::new(1, 1, 0.0).unwrap();
        assert!(empirical_level_histogram(&p, 1, 0, &[-1.0, 0.0, 1.0], 1).is_err());
        let h = empirical_level_histogram(&p, 1, 2000, &[-4.0, 0.0, 4.0], 1).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), h.accepted);
    }
}
