use serde_json::json;

use tacnode::aztec::{self, ChainSchedule, DiamondRegion, TilingState};
use tacnode::cone::{induction_step_check, mc_volume};
use tacnode::density::{one_level_density, JointDensity, TwoLevelWorkspace};
use tacnode::gue::{assemble_chain, collect_accepted, sample_coupled_pair, DEFAULT_ATTEMPT_CAP};
use tacnode::kernel::{fredholm_det, minor_kernel, LevelPoint, TacnodeKernel};
use tacnode::rng::substream;
use tacnode::ModelParams;

use crate::output::{join, Cell, Table};
use crate::{KernelChoice, LabError};

/// Parses "min,max,count" into an evenly spaced grid.
pub fn parse_grid(arg: &str) -> Result<Vec<f64>, LabError> {
    let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(LabError::Usage(format!("grid '{arg}' is not min,max,count")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| LabError::Usage(format!("bad grid minimum '{}'", parts[0])))?;
    let hi: f64 = parts[1].parse().map_err(|_| LabError::Usage(format!("bad grid maximum '{}'", parts[1])))?;
    let count: usize = parts[2].parse().map_err(|_| LabError::Usage(format!("bad grid count '{}'", parts[2])))?;
    if count < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(LabError::Usage(format!("grid '{arg}' needs finite min < max and count >= 2")));
    }
    Ok((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect())
}

/// Parses "lo:hi" (inclusive) or a single level.
pub fn parse_levels(arg: &str) -> Result<Vec<i32>, LabError> {
    let bad = || LabError::Usage(format!("bad level range '{arg}'"));
    let (lo, hi) = match arg.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let u = arg.trim().parse().map_err(|_| bad())?;
            (u, u)
        }
    };
    if hi < lo {
        return Err(LabError::Usage(format!("level range '{arg}' is empty")));
    }
    Ok((lo..=hi).collect())
}

pub fn parse_vector(arg: &str) -> Result<Vec<f64>, LabError> {
    arg.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| LabError::Usage(format!("bad number '{s}' in '{arg}'"))))
        .collect()
}

pub fn kernel_grid(p: ModelParams, kernel: KernelChoice, levels: &[i32], zs: &[f64]) -> Result<Table, LabError> {
    let valid = match kernel {
        KernelChoice::Tac => p.levels(),
        KernelChoice::Minor => 1..=p.n as i32,
    };
    if let Some(u) = levels.iter().find(|u| !valid.contains(u)) {
        return Err(LabError::Usage(format!("level {u} outside {}..={}", valid.start(), valid.end())));
    }
    let tac = match kernel {
        KernelChoice::Tac => Some(TacnodeKernel::new(p)?),
        KernelChoice::Minor => None,
    };
    let mut t = Table::new(&["u1", "z1", "u2", "z2", "value"]);
    for &u1 in levels {
        for &z1 in zs {
            for &u2 in levels {
                for &z2 in zs {
                    let (a, b) = (LevelPoint::new(u1, z1), LevelPoint::new(u2, z2));
                    let v = match &tac {
                        Some(k) => k.eval(a, b),
                        None => minor_kernel(a, b, p.beta),
                    };
                    t.push(vec![u1.into(), z1.into(), u2.into(), z2.into(), v.into()]);
                }
            }
        }
    }
    t.summary = json!({ "kernel": kernel, "levels": levels, "points": zs.len(), "rows": t.rows.len() });
    Ok(t)
}

pub fn sample_gue(p: ModelParams, samples: u64, seed: u64, cap: u64) -> Result<Table, LabError> {
    let pairs = collect_accepted(&p, samples, seed, cap)?;
    let attempts: u64 = pairs.iter().map(|s| s.attempts).sum();
    let mut t = Table::new(&["sample", "u", "index", "value"]);
    let mut means = std::collections::BTreeMap::new();
    for (k, pair) in pairs.iter().enumerate() {
        let chain = assemble_chain(&p, pair)?;
        for (&u, level) in &chain.levels {
            for (i, &v) in level.values().iter().enumerate() {
                t.push(vec![k.into(), u.into(), i.into(), v.into()]);
            }
            let e: &mut (f64, usize) = means.entry(u).or_default();
            e.0 += level.values().iter().sum::<f64>();
            e.1 += level.len();
        }
    }
    let level_means: Vec<_> =
        means.iter().map(|(u, (s, c))| json!({ "u": u, "mean_position": s / *c as f64 })).collect();
    let rate = samples as f64 / attempts.max(1) as f64;
    t.summary = json!({
        "accepted": samples,
        "attempts": attempts,
        "acceptance_rate": rate,
        "fredholm_det": fredholm_det(&p),
        "levels": level_means,
    });
    Ok(t)
}

fn aztec_samples(region: &DiamondRegion, a: f64, count: u64, steps: u64, seed: u64) -> Result<Vec<TilingState>, LabError> {
    let sched = ChainSchedule { chains: count, burn_in: steps, samples: 1, thin: 0 };
    let parts = aztec::run_chains(region, a, sched, seed, |t, acc: &mut Option<TilingState>| *acc = Some(t.clone()))?;
    Ok(parts.into_iter().flatten().collect())
}

pub struct AztecOutput {
    pub table: Table,
    pub svgs: Vec<String>,
}

pub fn sample_aztec(p: ModelParams, a: f64, count: u64, steps: Option<u64>, seed: u64) -> Result<AztecOutput, LabError> {
    let region = aztec::build_region(p.n, p.rho)?;
    let steps = steps.unwrap_or(2000 * region.len() as u64);
    let tilings = aztec_samples(&region, a, count, steps, seed)?;
    let mut t = Table::new(&["sample", "line", "u", "eta", "color", "y"]);
    let mut svgs = Vec::new();
    let mut vertical = 0u64;
    for (k, tiling) in tilings.iter().enumerate() {
        let dots = aztec::extract_dots(&region, tiling)?;
        for (s, line) in dots.lines.iter().enumerate() {
            for d in line {
                let pt = aztec::unscale_point(p.n, 2 * s as i32, d.eta);
                t.push(vec![k.into(), s.into(), pt.u.into(), d.eta.into(), color_name(d.color).into(), pt.z.into()]);
            }
        }
        vertical += tiling.weight_exponent as u64;
        svgs.push(aztec::tiling_svg(&region, tiling)?);
    }
    t.summary = json!({
        "a": a,
        "cells": region.len(),
        "steps_per_chain": steps,
        "samples": tilings.len(),
        "mean_vertical_dominoes": vertical as f64 / tilings.len().max(1) as f64,
    });
    Ok(AztecOutput { table: t, svgs })
}

pub fn enumerate_aztec(p: ModelParams, a: f64, index: Option<usize>) -> Result<AztecOutput, LabError> {
    let region = aztec::build_region(p.n, p.rho)?;
    let tilings = aztec::enumerate_tilings(&region, a)?;
    let z: f64 = tilings.iter().map(|(_, w)| w).sum();
    let mut t = Table::new(&["tiling", "vertical", "weight", "probability", "strict", "dots"]);
    let mut svgs = Vec::new();
    for (k, (tiling, w)) in tilings.iter().enumerate() {
        let dots = aztec::extract_dots(&region, tiling)?;
        let strict = aztec::strict_inequalities(&dots.to_chain()?);
        let key: Vec<String> = dots
            .lines
            .iter()
            .map(|l| l.iter().map(|d| format!("{}{}", d.eta, if d.color == aztec::DotColor::Red { "r" } else { "b" })).collect::<Vec<_>>().join(" "))
            .collect();
        t.push(vec![
            k.into(),
            (tiling.weight_exponent as u64).into(),
            (*w).into(),
            (w / z).into(),
            strict.into(),
            key.join("|").into(),
        ]);
        if index.is_none_or(|i| i == k) {
            svgs.push(aztec::tiling_svg(&region, tiling)?);
        }
    }
    if let Some(i) = index {
        if i >= tilings.len() {
            return Err(LabError::Usage(format!("tiling index {i} out of range (0..{})", tilings.len())));
        }
    }
    let uni = aztec::verify_uniformity(&region)?;
    t.summary = json!({
        "a": a,
        "tilings": tilings.len(),
        "partition_function": z,
        "uniform_per_boundary": uni.uniform,
        "power_law": uni.power_law,
        "power_law_constant": uni.power_law_constant,
    });
    Ok(AztecOutput { table: t, svgs })
}

fn color_name(c: aztec::DotColor) -> &'static str {
    match c {
        aztec::DotColor::Blue => "blue",
        aztec::DotColor::Red => "red",
    }
}

/// Lays several standalone SVG documents out on one sheet.
pub fn contact_sheet(svgs: &[String], columns: usize, meta: &str) -> String {
    let size = |s: &str, key: &str| -> f64 {
        let tag = format!(" {key}=\"");
        s.find(&tag)
            .and_then(|i| s[i + tag.len()..].split('"').next())
            .and_then(|v| v.parse().ok())
            .unwrap_or(0.0)
    };
    let (w, h) = svgs.first().map(|s| (size(s, "width"), size(s, "height"))).unwrap_or((0.0, 0.0));
    let gap = 10.0;
    let cols = columns.clamp(1, svgs.len().max(1));
    let rows = svgs.len().div_ceil(cols);
    let (tw, th) = (cols as f64 * (w + gap) + gap, rows as f64 * (h + gap) + gap);
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{tw}\" height=\"{th}\" viewBox=\"0 0 {tw} {th}\">\n<metadata>{}</metadata>\n",
        xml_escape(meta)
    );
    for (k, s) in svgs.iter().enumerate() {
        let (x, y) = (gap + (k % cols) as f64 * (w + gap), gap + (k / cols) as f64 * (h + gap));
        let body = s.lines().filter(|l| !l.starts_with("<?xml")).collect::<Vec<_>>().join("\n");
        out.push_str(&body.replacen("<svg ", &format!("<svg x=\"{x}\" y=\"{y}\" "), 1));
        out.push('\n');
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn density(p: ModelParams, u: i32, zs: &[Vec<f64>], xy: Option<(Vec<f64>, Vec<f64>)>) -> Result<Table, LabError> {
    let mut t = Table::new(&["kind", "u", "point", "density", "kernel_det", "gamma"]);
    if !zs.is_empty() {
        if !p.levels().contains(&u) {
            return Err(LabError::Usage(format!("level {u} outside {}..={}", p.levels().start(), p.levels().end())));
        }
        let k = TacnodeKernel::new(p)?;
        for z in zs {
            let mut z = z.clone();
            z.sort_by(|a, b| b.total_cmp(a));
            let d = one_level_density(&p, u, &z)?;
            let pts: Vec<LevelPoint> = z.iter().map(|&v| LevelPoint::new(u, v)).collect();
            t.push(vec!["one-level".into(), u.into(), join(&z).into(), d.into(), k.correlation_det(&pts).into(), Cell::Empty]);
        }
    }
    if let Some((x, y)) = xy {
        let jd = JointDensity::new(p)?;
        let ws = TwoLevelWorkspace::new(p, &x, &y)?;
        let d = jd.eval_with(&ws, &y)?;
        let g = ws.gamma()?;
        t.push(vec!["two-level".into(), (p.n as i32).into(), format!("{}|{}", join(&x), join(&y)).into(), d.into(), Cell::Empty, g.into()]);
    }
    if t.rows.is_empty() {
        return Err(LabError::Usage("density needs --z (one level) or --x with --y (two levels)".into()));
    }
    t.summary = json!({ "fredholm_det": fredholm_det(&p) });
    Ok(t)
}

fn feasible_pairs(p: &ModelParams, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>, LabError> {
    let mut rng = substream(seed, 0);
    (0..count)
        .map(|_| {
            let s = sample_coupled_pair(p, &mut rng, DEFAULT_ATTEMPT_CAP)?;
            Ok((s.x_chain[p.n - 1].values().to_vec(), s.y_chain[p.n - 1].values().to_vec()))
        })
        .collect()
}

pub fn volume(
    p: ModelParams,
    xy: Option<(Vec<f64>, Vec<f64>)>,
    pairs: usize,
    samples: u64,
    seed: u64,
) -> Result<Table, LabError> {
    let list = match xy {
        Some(pair) => vec![pair],
        None => feasible_pairs(&p, pairs, seed)?,
    };
    let mut t = Table::new(&["pair", "x", "y", "gamma", "gamma_hermite", "mc", "stderr", "z"]);
    for (k, (x, y)) in list.iter().enumerate() {
        let ws = TwoLevelWorkspace::new(p, x, y)?;
        let g = ws.gamma()?;
        let gh = ws.gamma_hermite_system()?;
        let (mc, se) = mc_volume(&p, x, y, samples, seed ^ (0x5eed + k as u64))?;
        let scale = se.hypot(1e-10 * g.abs()).max(f64::MIN_POSITIVE);
        t.push(vec![k.into(), join(x).into(), join(y).into(), g.into(), gh.into(), mc.into(), se.into(), ((g - mc) / scale).into()]);
    }
    t.summary = json!({ "pairs": list.len(), "mc_samples": samples });
    Ok(t)
}

pub fn induction(p: ModelParams, pairs: usize, order: usize, seed: u64) -> Result<Table, LabError> {
    let upper = ModelParams::new(p.n + 1, p.rho, p.beta)?;
    let mut t = Table::new(&["pair", "z", "w", "integral", "closed_form", "residual"]);
    let mut worst = 0.0f64;
    for (k, (z, w)) in feasible_pairs(&upper, pairs, seed)?.iter().enumerate() {
        let r = induction_step_check(&p, z, w, order)?;
        worst = worst.max(r.residual);
        t.push(vec![k.into(), join(z).into(), join(w).into(), r.integral.into(), r.closed_form.into(), r.residual.into()]);
    }
    t.summary = json!({ "from_n": p.n, "to_n": p.n + 1, "order": order, "max_residual": worst });
    Ok(t)
}
