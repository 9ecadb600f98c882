//! The acceptance criteria as runnable checks with structured reports.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aztec::{self, ChainSchedule};
use crate::cone::{induction_step_check, mc_volume};
use crate::density::{gamma_delta_one, gamma_overlap_full, one_level_density, JointDensity, TwoLevelWorkspace};
use crate::error::{Error, Result};
use crate::gue::{acceptance_rate, collect_accepted, sample_coupled_pair, DEFAULT_ATTEMPT_CAP};
use crate::kernel::{fredholm_det, minor_kernel, LevelPoint, TacnodeKernel};
use crate::params::ModelParams;
use crate::quad::{panels, rule};
use crate::rng::substream;
use crate::special::{
    coeff_a, factorial, hermite_matrix, hermite_matrix_constant, hermite_tilde, p_poly, phi_closed_form, phi_fn,
    phi_integral, psi_fn, psi_integral, toeplitz_flipped, toeplitz_lower, vandermonde, CoeffTables, FRAC_1_SQRT_PI,
};
use crate::stats::{chi_square, ks_distance};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriterionInfo {
    pub id: u8,
    pub title: &'static str,
    pub hard: bool,
}

pub const CRITERIA: [CriterionInfo; 11] = [
    CriterionInfo { id: 1, title: "special-function identities", hard: true },
    CriterionInfo { id: 2, title: "Phi/Psi against quadrature", hard: true },
    CriterionInfo { id: 3, title: "acceptance rate equals Fredholm determinant", hard: true },
    CriterionInfo { id: 4, title: "kernel anchors and level traces", hard: true },
    CriterionInfo { id: 5, title: "kernel involution", hard: true },
    CriterionInfo { id: 6, title: "one-level density against kernel determinant", hard: true },
    CriterionInfo { id: 7, title: "two-level volume identity", hard: true },
    CriterionInfo { id: 8, title: "induction identity", hard: true },
    CriterionInfo { id: 9, title: "sampled pairs against joint density", hard: true },
    CriterionInfo { id: 10, title: "Aztec combinatorics", hard: true },
    CriterionInfo { id: 11, title: "finite-n tacnode comparison", hard: false },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// flips the sign of every closed-form volume
    GammaSign,
}

impl std::str::FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma-sign" => Ok(Fault::GammaSign),
            _ => Err(Error::InvalidParams(format!("unknown fault '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20240601, fault: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Below,
    Above,
    Flag,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// set when the failure is a documented property of the model
    pub known_deviation: Option<&'static str>,
}

impl Check {
    /// Passes when measured < tolerance.
    fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::Below, measured, tolerance, passed: measured < tolerance, known_deviation: None }
    }

    /// Passes when measured > tolerance (p-values).
    fn above(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::Above, measured, tolerance, passed: measured > tolerance, known_deviation: None }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), kind: CheckKind::Flag, measured: f64::from(u8::from(ok)), tolerance: 1.0, passed: ok, known_deviation: None }
    }

    fn info(name: impl Into<String>, measured: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::Info, measured, tolerance: f64::NAN, passed: true, known_deviation: None }
    }

    /// One aligned line: status, name, value and bound.
    pub fn line(&self) -> String {
        let mark = match (self.passed, self.known_deviation) {
            (true, _) => "ok   ",
            (false, Some(_)) => "known",
            (false, None) => "BAD  ",
        };
        let value = match self.kind {
            CheckKind::Below => format!("{:>11.4e} < {:.1e}", self.measured, self.tolerance),
            CheckKind::Above => format!("{:>11.4e} > {:.1e}", self.measured, self.tolerance),
            CheckKind::Flag => (if self.passed { "yes" } else { "no" }).to_string(),
            CheckKind::Info => format!("{:>11.4e}", self.measured),
        };
        format!("{mark} {:<58} {value}", self.name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub hard: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl CriterionReport {
    /// Failing checks that are not documented deviations.
    pub fn unexpected_failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed && c.known_deviation.is_none()).collect()
    }

    pub fn summary(&self) -> String {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| if c.known_deviation.is_some() { format!("{} [known deviation]", c.name) } else { c.name.clone() })
            .collect();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let kind = if self.hard { "" } else { " [informational]" };
        if failed.is_empty() {
            format!("{verdict} {:>2} {}{kind} ({} checks, {:.1}s)", self.id, self.title, self.checks.len(), self.seconds)
        } else {
            format!("{verdict} {:>2} {}{kind} (failed: {})", self.id, self.title, failed.join("; "))
        }
    }
}

pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> Result<CriterionReport> {
    let info = CRITERIA.iter().find(|c| c.id == id).ok_or(Error::IndexOutOfRange { index: id as i64, lo: 1, hi: 11 })?;
    let start = Instant::now();
    let mut checks = match id {
        1 => special_identities(cfg)?,
        2 => phi_psi_oracle()?,
        3 => fredholm_identity(cfg)?,
        4 => kernel_anchors()?,
        5 => involution(cfg)?,
        6 => one_level(cfg)?,
        7 => two_level_volume(cfg)?,
        8 => induction(cfg)?,
        9 => sampler_vs_density(cfg)?,
        10 => aztec_combinatorics(cfg)?,
        _ => tacnode_experiment(cfg)?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = match id {
        1 => Some(10.0),
        3 => Some(300.0),
        8 => Some(120.0),
        _ => None,
    };
    if let Some(b) = budget {
        checks.push(Check::below("runtime seconds", seconds, b));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CriterionReport { id, title: info.title, hard: info.hard, passed, checks, seconds })
}

pub fn run_suite(ids: &[u8], cfg: &SuiteConfig) -> Result<Vec<CriterionReport>> {
    ids.iter().map(|&id| run_criterion(id, cfg)).collect()
}

fn gamma_fault(cfg: &SuiteConfig, g: f64) -> f64 {
    if cfg.fault == Some(Fault::GammaSign) {
        -g
    } else {
        g
    }
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

// complex H̃_k(z) for k = 0..=m
fn htilde_c(m: usize, z: Complex64) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(1.0, 0.0); m + 1];
    if m >= 1 {
        h[1] = 2.0 * z;
    }
    for k in 1..m {
        h[k + 1] = (2.0 * z * h[k] - 2.0 * h[k - 1]) / (k as f64 + 1.0);
    }
    h
}

// P_k(z) = H̃_k(iz)/i^k
fn p_c(m: usize, z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    htilde_c(m, i * z)[m] / i.powi(m as i32)
}

fn random_c<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    Complex64::new(rng.random_range(-r..r), rng.random_range(-r..r))
}

fn decreasing<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn special_identities(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    const TOL: f64 = 1e-9;
    let mut rng = substream(cfg.seed, 1);
    let mut checks = Vec::new();
    let i = Complex64::new(0.0, 1.0);
    for (case, label) in [(0, "addition formula b²+c²=1"), (1, "addition formula b²+c²=−1"), (2, "addition formula b²+c²=0")] {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let m = rng.random_range(0..=12usize);
            let b = random_c(&mut rng, 0.8);
            let c = match case {
                0 => (1.0 - b * b).sqrt(),
                1 => (-1.0 - b * b).sqrt(),
                _ => i * b,
            };
            let (u, v) = (random_c(&mut rng, 1.2), random_c(&mut rng, 1.2));
            let (hu, hv) = (htilde_c(m, u), htilde_c(m, v));
            let lhs: Complex64 = (0..=m).map(|k| b.powi(k as i32) * c.powi((m - k) as i32) * hu[k] * hv[m - k]).sum();
            let s = b * u + c * v;
            let rhs = match case {
                0 => htilde_c(m, s)[m],
                1 => p_c(m, s),
                _ => 2f64.powi(m as i32) * s.powi(m as i32) / factorial(m as u32),
            };
            worst = worst.max((lhs - rhs).norm());
        }
        checks.push(Check::below(label, worst, TOL));
    }

    let (mut inv, mut explicit, mut flipped) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let beta = rng.random_range(0.0..1.5);
        let alpha = rng.random_range(1..=12usize);
        let t = CoeffTables::new(beta, 12)?;
        let prod = toeplitz_lower(t.c_slice(), alpha) * toeplitz_lower(t.a_slice(), alpha);
        inv = inv.max((prod - DMatrix::<f64>::identity(alpha, alpha)).amax());
        explicit = explicit.max(max_abs((0..=12).map(|k| (t.a(k) - coeff_a(k as i32, beta)).abs())));
        // C↺⁻¹ has a_{i+j−α+1} on and below the anti-diagonal
        let up_inv = DMatrix::from_fn(alpha, alpha, |r, s| {
            let k = r as i64 + s as i64 - alpha as i64 + 1;
            if k >= 0 { t.a(k) } else { 0.0 }
        });
        let y = rng.random_range(-2.0..2.0);
        let hv = nalgebra::DVector::from_fn(alpha, |r, _| hermite_tilde((alpha - 1 - r) as i32, y + beta));
        let pv = nalgebra::DVector::from_fn(alpha, |r, _| p_poly(r as i32, y - beta));
        flipped = flipped.max((&up_inv * hv - pv).amax());
        flipped = flipped.max((toeplitz_flipped(t.c_slice(), alpha) * &up_inv - DMatrix::<f64>::identity(alpha, alpha)).amax());
    }
    checks.push(Check::below("C·A = identity", inv, TOL));
    checks.push(Check::below("a_k recursion vs explicit form", explicit, TOL));
    checks.push(Check::below("flipped inverse maps H̃ to P", flipped, TOL));

    let mut hermid = [0.0f64; 3];
    for _ in 0..100 {
        let m = rng.random_range(0..=10i32);
        let (y, beta) = (rng.random_range(-2.0..2.0), rng.random_range(0.0..1.5));
        let (u, v) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let t = CoeffTables::new(beta, 10)?;
        let s1: f64 = (0..=m).map(|p| t.c(p as i64) * p_poly(m - p, y - beta)).sum();
        hermid[0] = hermid[0].max((s1 - hermite_tilde(m, y + beta)).abs());
        let s2: f64 = (0..=m).map(|p| t.a(p as i64) * hermite_tilde(m - p, -y + beta)).sum();
        hermid[1] = hermid[1].max((s2 - p_poly(m, -y - beta)).abs());
        let s3: f64 = (0..=m).map(|k| hermite_tilde(k, -u) * p_poly(m - k, v)).sum();
        hermid[2] = hermid[2].max((s3 - 2f64.powi(m) * (v - u).powi(m) / factorial(m as u32)).abs());
    }
    checks.push(Check::below("Σ c_p P_q(y−β) = H̃_m(y+β)", hermid[0], TOL));
    checks.push(Check::below("Σ a_p H̃_q(β−y) = P_m(−y−β)", hermid[1], TOL));
    checks.push(Check::below("Σ H̃_k(−u) P_l(v) = 2^m (v−u)^m/m!", hermid[2], TOL));

    let (mut hp, mut hdet) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(1..=6usize);
        let x = decreasing(&mut rng, n, -1.5, 1.5);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let h = hermite_matrix(&neg);
        let pm = DMatrix::from_fn(n, n, |r, s| p_poly(r as i32, y[s]));
        let want = DMatrix::from_fn(n, n, |r, s| (2.0 * (y[s] - x[r])).powi(n as i32 - 1) / factorial(n as u32 - 1));
        hp = hp.max((&h * pm - want).amax());
        hdet = hdet.max((h.determinant() - hermite_matrix_constant(n) * vandermonde(&x)).abs());
    }
    checks.push(Check::below("H̃(−x)·P(y) matrix identity", hp, TOL));
    checks.push(Check::below("det H̃(−x) = c′_n Δ_n(x)", hdet, TOL));
    Ok(checks)
}

fn phi_psi_oracle() -> Result<Vec<Check>> {
    let etas: Vec<f64> = (0..=32).map(|k| -4.0 + 0.25 * k as f64).collect();
    let rows: Vec<(f64, f64, f64)> = (-6..=8)
        .into_par_iter()
        .map(|m| {
            let mut w = (0.0f64, 0.0f64, 0.0f64);
            for &eta in &etas {
                let phi = phi_integral(m, eta);
                w.0 = w.0.max((phi_closed_form(m, eta) - phi).abs());
                w.1 = w.1.max((phi_fn(m, eta) - phi).abs());
                w.2 = w.2.max((psi_fn(m, eta) - psi_integral(m, eta)).abs());
            }
            w
        })
        .collect();
    Ok(vec![
        Check::below("closed branches of Phi vs quadrature", max_abs(rows.iter().map(|r| r.0)), 1e-9),
        Check::below("library Phi vs quadrature", max_abs(rows.iter().map(|r| r.1)), 1e-9),
        Check::below("library Psi vs quadrature", max_abs(rows.iter().map(|r| r.2)), 1e-9),
    ])
}

fn fredholm_identity(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for rho in 1..=3usize {
        for (bi, beta) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            let trials = 1_000_000;
            let est = acceptance_rate(rho, beta, trials, cfg.seed ^ (0x300 + 16 * rho as u64 + bi as u64))?;
            let f = fredholm_det(&ModelParams::new(rho, rho, beta)?);
            let z = (est.rate - f).abs() / est.stderr;
            checks.push(Check::below(format!("rho={rho} beta={beta}: rate {:.5} vs det {f:.5}, |z|", est.rate), z, 3.0));
        }
    }
    Ok(checks)
}

fn kernel_anchors() -> Result<Vec<Check>> {
    let worst = max_abs((0..=40).map(|k| {
        let z = -4.0 + 0.2 * k as f64;
        let p = LevelPoint::new(1, z);
        (minor_kernel(p, p, 0.0) - (-z * z).exp() * FRAC_1_SQRT_PI).abs()
    }));
    let mut checks = vec![Check::below("minor kernel diagonal at level 1", worst, 1e-12)];
    for rho in 1..=2usize {
        let k = TacnodeKernel::new(ModelParams::new(3, rho, 0.0)?)?;
        let mut levels = vec![-1, 0, 1, rho as i32];
        levels.dedup();
        for u in levels {
            let want = crate::params::level_size(rho, u) as f64;
            checks.push(Check::below(format!("rho={rho} u={u} trace vs {want}"), (k.level_trace(u) - want).abs(), 1e-5));
        }
    }
    Ok(checks)
}

fn involution(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut rng = substream(cfg.seed, 5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let rho = rng.random_range(1..=3usize);
        let beta = rng.random_range(0.0..1.5);
        let k = TacnodeKernel::new(ModelParams::new(4, rho, beta)?)?;
        let p1 = LevelPoint::new(rng.random_range(-3..=4), rng.random_range(-2.5..2.5));
        let p2 = LevelPoint::new(rng.random_range(-3..=4), rng.random_range(-2.5..2.5));
        let (a, b) = (k.eval(p1, p2), k.eval_involution(p1, p2));
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
    }
    Ok(vec![Check::below("max relative gap between the two forms", worst, 1e-8)])
}

fn one_level(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut rng = substream(cfg.seed, 6);
    let n = 3;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rho = rng.random_range(1..=3usize);
        let beta = rng.random_range(0.0..1.0);
        let p = ModelParams::new(n, rho, beta)?;
        let u = rng.random_range(rho as i32 - n as i32..=n as i32);
        let z = decreasing(&mut rng, p.level_size(u), -2.0, 2.0);
        let d = one_level_density(&p, u, &z)?;
        let pts: Vec<LevelPoint> = z.iter().map(|&v| LevelPoint::new(u, v)).collect();
        let kd = TacnodeKernel::new(p)?.correlation_det(&pts);
        worst = worst.max((d - kd).abs() / kd.abs().max(1e-300));
    }
    let mut checks = vec![Check::below("density vs kernel determinant, max relative error", worst, 1e-7)];
    let beta = 0.4;
    let mut mass_err = 0.0f64;
    for rho in 1..=3usize {
        let p = ModelParams::new(n, rho, beta)?;
        for u in p.levels() {
            let mass = level_mass(&p, u)?;
            mass_err = mass_err.max((mass - 1.0).abs());
        }
    }
    checks.push(Check::below("densities integrate to 1 (n=3, all rho, all levels)", mass_err, 1e-5));
    Ok(checks)
}

// ∫ over the ordered region = ∫ over the cube / N!, the density being symmetric
fn level_mass(p: &ModelParams, u: i32) -> Result<f64> {
    let size = p.level_size(u);
    let half = 7.0 + p.beta;
    let r = rule(12);
    let nodes: Vec<(f64, f64)> = panels(-half, half, &[-half / 2.0, 0.0, half / 2.0])
        .windows(2)
        .flat_map(|w| r.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect();
    let total: Result<f64> = (0..nodes.len().pow(size as u32 - 1).max(1))
        .into_par_iter()
        .map(|outer| {
            let mut idx = vec![0usize; size];
            let mut o = outer;
            for slot in idx.iter_mut().skip(1) {
                *slot = o % nodes.len();
                o /= nodes.len();
            }
            let mut acc = 0.0;
            for &(t0, w0) in &nodes {
                let mut z = Vec::with_capacity(size);
                let mut w = w0;
                z.push(t0);
                for &k in idx.iter().skip(1) {
                    z.push(nodes[k].0);
                    w *= nodes[k].1;
                }
                z.sort_by(|a, b| b.total_cmp(a));
                acc += w * one_level_density(p, u, &z)?;
            }
            Ok(acc)
        })
        .sum();
    Ok(total? / factorial(size as u32))
}

fn feasible_pairs(p: &ModelParams, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut rng = substream(seed, 0);
    (0..count)
        .map(|_| {
            let s = sample_coupled_pair(p, &mut rng, DEFAULT_ATTEMPT_CAP)?;
            Ok((s.x_chain[p.n - 1].values().to_vec(), s.y_chain[p.n - 1].values().to_vec()))
        })
        .collect()
}

fn two_level_volume(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let configs: Vec<(usize, usize)> = (1..=3).flat_map(|n| (1..=n).map(move |r| (n, r))).collect();
    let beta = 0.6;
    // 50 pairs in total, spread over the (n, ρ) grid
    let mut jobs = Vec::new();
    for k in 0..50usize {
        let (n, rho) = configs[k % configs.len()];
        jobs.push((k, n, rho));
    }
    let mut routes = 0.0f64;
    let mut beta_dep = 0.0f64;
    let mut worst_z = 0.0f64;
    for &(k, n, rho) in &jobs {
        let p = ModelParams::new(n, rho, beta)?;
        let (x, y) = feasible_pairs(&p, 1, cfg.seed ^ (0x700 + k as u64))?.remove(0);
        let ws = TwoLevelWorkspace::new(p, &x, &y)?;
        let g = gamma_fault(cfg, ws.gamma()?);
        let g_h = gamma_fault(cfg, ws.gamma_hermite_system()?);
        routes = routes.max((g - g_h).abs() / g.abs().max(1e-300));
        let other = TwoLevelWorkspace::new(ModelParams::new(n, rho, 1.7)?, &x, &y)?.gamma()?;
        beta_dep = beta_dep.max((gamma_fault(cfg, other) - g).abs() / g.abs().max(1e-300));
        let (mc, se) = mc_volume(&p, &x, &y, 1_000_000, cfg.seed ^ (0x7100 + k as u64))?;
        // when the cone constraint never binds the estimator is exact up to roundoff
        let scale = se.hypot(1e-10 * g.abs()).max(f64::MIN_POSITIVE);
        let z = (g - mc).abs() / scale;
        worst_z = worst_z.max(z);
    }
    let mut checks = vec![
        Check::below("L-matrix route vs Hermite route, relative", routes, 1e-7),
        Check::below("beta independence, relative", beta_dep, 1e-8),
        Check::below("formula vs Monte Carlo volume, max |z| over 50 pairs", worst_z, 3.0),
    ];
    let mut rng = substream(cfg.seed, 7);
    let (mut d0, mut d1) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(1..=4usize);
        let x = decreasing(&mut rng, n, -2.0, 2.0);
        let y = decreasing(&mut rng, n, -2.0, 2.0);
        let g0 = gamma_fault(cfg, TwoLevelWorkspace::new(ModelParams::new(n, n, beta)?, &x, &y)?.gamma()?);
        d0 = d0.max((g0 - gamma_overlap_full(&x, &y)).abs());
        let m = n + 1;
        let x = decreasing(&mut rng, m, -2.0, 2.0);
        let y = decreasing(&mut rng, m, -2.0, 2.0);
        let p = ModelParams::new(m, m - 1, beta)?;
        let g1 = gamma_fault(cfg, TwoLevelWorkspace::new(p, &x, &y)?.gamma()?);
        d1 = d1.max((g1 - gamma_delta_one(&p, &x, &y)?).abs());
    }
    checks.push(Check::below("delta=0 reduction", d0, 1e-9));
    checks.push(Check::below("delta=1 reduction", d1, 1e-9));
    Ok(checks)
}

fn induction(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (n, tol) in [(1usize, 1e-6), (2, 1e-5)] {
        for rho in 1..=n {
            let p = ModelParams::new(n, rho, 0.3)?;
            let upper = ModelParams::new(n + 1, rho, 0.3)?;
            let mut worst = 0.0f64;
            for (z, w) in feasible_pairs(&upper, 3, cfg.seed ^ (0x800 + 8 * n as u64 + rho as u64))? {
                worst = worst.max(induction_step_check(&p, &z, &w, 12)?.residual);
            }
            checks.push(Check::below(format!("n={n}->{} rho={rho} residual", n + 1), worst, tol));
        }
    }
    Ok(checks)
}

fn unit_breaks(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (lo.ceil() as i64..=hi.floor() as i64).map(|k| k as f64)
}

/// Probability that (min x, max y) of the pair falls in the box a × b.
fn bin_probability(jd: &JointDensity, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
    let n = jd.params.n;
    let outer = rule(6);
    let inner = rule(10);
    let reach = 9.0;
    let mut total = 0.0;
    for (av, aw) in outer.mapped(a.0, a.1) {
        for piece in panels(b.0, b.1, &[av]).windows(2) {
            for (bv, bw) in outer.mapped(piece[0], piece[1]) {
                let w = aw * bw;
                if n == 1 {
                    total += w * jd.eval(&[av], &[bv])?;
                    continue;
                }
                let mut s = 0.0;
                let xb: Vec<f64> = unit_breaks(av, av + reach).chain([bv]).collect();
                for xp in panels(av, av + reach, &xb).windows(2) {
                    for (x1, xw) in inner.mapped(xp[0], xp[1]) {
                        let ws = TwoLevelWorkspace::new(jd.params, &[x1, av], &[bv, bv])?;
                        let yb: Vec<f64> = unit_breaks(bv - reach, bv).chain([av, x1]).collect();
                        for yp in panels(bv - reach, bv, &yb).windows(2) {
                            for (y2, yw) in inner.mapped(yp[0], yp[1]) {
                                s += xw * yw * jd.eval_with(&ws, &[bv, y2])?;
                            }
                        }
                    }
                }
                total += w * s;
            }
        }
    }
    Ok(total)
}

fn sampler_vs_density(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let beta = 0.3;
    for (n, rho) in [(1usize, 1usize), (2, 2), (2, 1)] {
        let p = ModelParams::new(n, rho, beta)?;
        let jd = JointDensity::new(p)?;
        let bins = if n == 1 { 12 } else { 10 };
        let (lo, hi) = (-2.5, 2.5);
        let edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
        let cells: Vec<(usize, usize)> = (0..bins).flat_map(|i| (0..bins).map(move |j| (i, j))).collect();
        let probs: Vec<f64> = cells
            .par_iter()
            .map(|&(i, j)| bin_probability(&jd, (edges[i], edges[i + 1]), (edges[j], edges[j + 1])))
            .collect::<Result<_>>()?;
        let samples = collect_accepted(&p, 100_000, cfg.seed ^ (0x900 + 4 * n as u64 + rho as u64), DEFAULT_ATTEMPT_CAP)?;
        let mut obs = vec![0.0; cells.len() + 1];
        let locate = |v: f64| (v >= lo && v < hi).then(|| (((v - lo) / (hi - lo)) * bins as f64) as usize);
        for s in &samples {
            let a = s.x_chain[n - 1].min();
            let b = s.y_chain[n - 1].max();
            match (locate(a), locate(b)) {
                (Some(i), Some(j)) => obs[i * bins + j] += 1.0,
                _ => obs[cells.len()] += 1.0,
            }
        }
        let total = samples.len() as f64;
        let inside: f64 = probs.iter().sum();
        let mut exp: Vec<f64> = probs.iter().map(|q| q * total).collect();
        exp.push((1.0 - inside).max(0.0) * total);
        // order by expectation so pooling merges like with like
        let mut order: Vec<usize> = (0..exp.len()).collect();
        order.sort_by(|&i, &j| exp[i].total_cmp(&exp[j]));
        let o: Vec<f64> = order.iter().map(|&i| obs[i]).collect();
        let e: Vec<f64> = order.iter().map(|&i| exp[i]).collect();
        let chi = chi_square(&o, &e, 5.0);
        checks.push(Check::above(format!("n={n} rho={rho}: chi-square p-value ({} dof)", chi.dof), chi.p_value, 0.01));
        checks.push(Check::info(format!("n={n} rho={rho}: binned mass inside the window"), inside));
    }
    Ok(checks)
}

const UNIFORMITY_NOTE: &str =
    "tiling multiplicity per dot configuration is K·2^(strict interlacing inequalities), not constant";

fn aztec_combinatorics(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let configs: Vec<(usize, usize)> = (1..=3).flat_map(|n| (1..=n).map(move |r| (n, r))).collect();
    for (idx, &(n, rho)) in configs.iter().enumerate() {
        let region = aztec::build_region(n, rho)?;
        let tilings = aztec::enumerate_tilings(&region, 1.0)?;
        let mut counts_ok = true;
        let mut interlace_ok = true;
        for (t, _) in &tilings {
            match aztec::extract_dots(&region, t) {
                Ok(cfg) => {
                    counts_ok &= cfg.lines.iter().enumerate().all(|(s, l)| {
                        let (red, blue) = aztec::table_counts(n, rho, s);
                        l.iter().filter(|d| d.color == aztec::DotColor::Red).count() == red && l.len() == red + blue
                    });
                    interlace_ok &= cfg.to_chain().and_then(|c| c.validate(0.0)).is_ok();
                }
                Err(_) => counts_ok = false,
            }
        }
        let tag = format!("n={n} rho={rho}");
        checks.push(Check::flag(format!("{tag}: dot table on all {} tilings", tilings.len()), counts_ok));
        checks.push(Check::flag(format!("{tag}: interlacing"), interlace_ok));
        let rep = aztec::verify_uniformity(&region)?;
        let mut uni = Check::flag(format!("{tag}: equal multiplicity per boundary group"), rep.uniform);
        if !rep.uniform {
            uni.known_deviation = Some(UNIFORMITY_NOTE);
        }
        checks.push(uni);
        checks.push(Check::flag(format!("{tag}: multiplicity = K*2^strict"), rep.power_law));
        for (ai, a) in [1.0, 2.0].into_iter().enumerate() {
            let weighted = aztec::enumerate_tilings(&region, a)?;
            let z: f64 = weighted.iter().map(|(_, w)| w).sum();
            let cells = region.len() as u64;
            let sched = ChainSchedule { chains: 16, burn_in: 400 * cells, samples: 3000, thin: 20 * cells };
            let seen = aztec::mcmc_tiling_counts(&region, a, sched, cfg.seed ^ (0xA00 + 8 * idx as u64 + ai as u64))?;
            let total = (sched.chains * sched.samples) as f64;
            let mut pairs: Vec<(f64, f64)> = weighted
                .iter()
                .map(|(t, w)| (*seen.get(&t.partner).unwrap_or(&0) as f64, total * w / z))
                .collect();
            pairs.sort_by(|p, q| p.1.total_cmp(&q.1));
            let (o, e): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let chi = chi_square(&o, &e, 5.0);
            checks.push(Check::above(format!("{tag} a={a}: MCMC chi-square p-value"), chi.p_value, 0.01));
        }
    }
    Ok(checks)
}

fn tacnode_experiment(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (n, rho, u) = (24usize, 2usize, 1i32);
    let region = aztec::build_region(n, rho)?;
    let a = aztec::scaling_weight(n, 0.0);
    let cells = region.len() as u64;
    let sched = ChainSchedule { chains: 8, burn_in: 8000 * cells, samples: 100, thin: 40 * cells };
    let line = (n as i32 - u) as usize;
    let parts = aztec::run_chains(&region, a, sched, cfg.seed ^ 0xB00, |t, acc: &mut Vec<f64>| {
        if let Ok(dots) = aztec::extract_dots(&region, t) {
            acc.extend(dots.lines[line].iter().map(|d| aztec::unscale_point(n, 2 * line as i32, d.eta).z));
        }
    })?;
    let ys: Vec<f64> = parts.into_iter().flatten().collect();
    let k = TacnodeKernel::new(ModelParams::new(n, rho, 0.0)?)?;
    let (lo, hi) = (-9.0, 9.0);
    let grid: Vec<f64> = (0..=720).map(|i| lo + (hi - lo) * i as f64 / 720.0).collect();
    let r = rule(8);
    let mut cum = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        let f = |z: f64| k.eval(LevelPoint::new(u, z), LevelPoint::new(u, z));
        cum[i] = cum[i - 1] + r.integrate(&f, grid[i - 1], grid[i]);
    }
    let mass = cum[cum.len() - 1];
    let cdf = |y: f64| {
        if y <= lo {
            return 0.0;
        }
        if y >= hi {
            return 1.0;
        }
        let t = (y - lo) / (hi - lo) * 720.0;
        let i = (t as usize).min(719);
        let frac = t - i as f64;
        (cum[i] + frac * (cum[i + 1] - cum[i])) / mass
    };
    let ks = if ys.is_empty() { f64::NAN } else { ks_distance(&ys, cdf) };
    Ok(vec![
        Check::info(format!("KS distance at u={u} over {} dots", ys.len()), ks),
        Check::info("kernel level mass", mass),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_ids_are_dense() {
        for (k, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, k + 1);
        }
        assert!(run_criterion(12, &SuiteConfig::default()).is_err());
    }

    #[test]
    fn quick_criteria_pass() {
        let cfg = SuiteConfig::default();
        for id in [1, 2, 4, 5] {
            let rep = run_criterion(id, &cfg).unwrap();
            assert!(rep.passed, "{}", rep.summary());
        }
    }

    #[test]
    fn gamma_sign_fault_breaks_volume_check() {
        let cfg = SuiteConfig { seed: 1, fault: Some(Fault::GammaSign) };
        let rep = run_criterion(7, &cfg).unwrap();
        assert!(!rep.passed);
        assert!(!rep.unexpected_failures().is_empty());
    }
}
