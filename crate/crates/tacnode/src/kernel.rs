//! GUE-minor kernel, the 𝒦^β block with its resolvent, the 𝒜/ℬ functions
//! and the edge-tacnode kernel.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::integrate_adaptive;
use crate::special::{
    hermite, hermite_tilde, heaviside_pow, p_poly, phi_fn, psi_fn, CoeffTables, FRAC_1_SQRT_PI,
};

/// A kernel argument (u, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub u: i32,
    pub z: f64,
}

impl LevelPoint {
    pub fn new(u: i32, z: f64) -> Self {
        Self { u, z }
    }
}

/// (g_y(k), h_y(k)) = (Φ_k(y−β), H̃_{−k−1}(β−y)).
pub fn gh_funcs(y: f64, k: i32, beta: f64) -> (f64, f64) {
    (phi_fn(k, y - beta), hermite_tilde(-k - 1, beta - y))
}

/// 𝕂^minor from its finite-sum form (the doubled value).
pub fn minor_kernel(p1: LevelPoint, p2: LevelPoint, beta: f64) -> f64 {
    let mut half = 0.0;
    if p1.u > p2.u {
        half -= heaviside_pow((p1.u - p2.u) as u32, 2.0 * (p2.z - p1.z));
    }
    for lam in 0..p1.u.max(0) {
        half += hermite_tilde(p1.u - lam - 1, beta - p1.z) * phi_fn(lam - p2.u, p2.z - beta);
    }
    2.0 * half
}

/// The ρ×ρ window of 𝒦^β and its resolvent.
#[derive(Debug, Clone)]
pub struct KBetaBlock {
    pub rho: usize,
    pub beta: f64,
    pub matrix: DMatrix<f64>,
    pub resolvent: DMatrix<f64>,
    coeffs: CoeffTables,
}

impl KBetaBlock {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let rho = params.rho;
        let coeffs = CoeffTables::new(params.beta, 2 * rho as i64 + 8)?;
        let matrix = DMatrix::from_fn(rho, rho, |l, k| kscrip_entry(&coeffs, rho, l as i64, k as i64));
        let one_minus = DMatrix::identity(rho, rho) - &matrix;
        let det = one_minus.determinant();
        if det.abs() < 1e-14 {
            return Err(Error::Singular(format!("1 - K has determinant {det:e}")));
        }
        let resolvent = one_minus
            .try_inverse()
            .ok_or_else(|| Error::Singular("1 - K not invertible".into()))?;
        Ok(Self { rho, beta: params.beta, matrix, resolvent, coeffs })
    }

    pub fn coeffs(&self) -> &CoeffTables {
        &self.coeffs
    }

    /// 𝒦^β(λ−ρ, κ−ρ) for any λ, κ ≥ 0; zero for κ ≥ ρ.
    pub fn entry(&self, lambda: i64, kappa: i64) -> f64 {
        kscrip_entry(&self.coeffs, self.rho, lambda, kappa)
    }

    /// det(1 − 𝒦) on the window.
    pub fn window_det(&self) -> f64 {
        (DMatrix::identity(self.rho, self.rho) - &self.matrix).determinant()
    }

    /// (1 − 𝒦)^{-1} v for v indexed by λ = 0..v.len(). The operator is
    /// block lower triangular, so rows past the window pick up the
    /// off-window block 𝒦(λ, κ<ρ) applied to the window solution.
    pub fn apply_resolvent(&self, v: &[f64]) -> Vec<f64> {
        let rho = self.rho;
        let mut out = vec![0.0; v.len()];
        let w = rho.min(v.len());
        for i in 0..w {
            out[i] = (0..w).map(|j| self.resolvent[(i, j)] * v[j]).sum();
        }
        for lam in rho..v.len() {
            out[lam] = v[lam] + (0..rho).map(|k| self.entry(lam as i64, k as i64) * out[k]).sum::<f64>();
        }
        out
    }
}

fn kscrip_entry(c: &CoeffTables, rho: usize, lambda: i64, kappa: i64) -> f64 {
    let r = rho as i64;
    if kappa >= r {
        return 0.0;
    }
    (0..=(r - 1 - kappa))
        .map(|al| c.c(r - kappa - al - 1) * c.c_tilde(lambda - r + al + 1))
        .sum()
}

pub fn kbeta_block(params: &ModelParams) -> Result<KBetaBlock> {
    KBetaBlock::new(params)
}

/// det(1 − 𝒦^β) on the window through the Toeplitz form with entries
/// a_{i−j}·1_{i≥j} − c̃_{i−j}.
pub fn fredholm_det(params: &ModelParams) -> f64 {
    let rho = params.rho;
    let c = CoeffTables::new(params.beta, rho as i64).expect("nonnegative index");
    DMatrix::from_fn(rho, rho, |i, j| {
        let d = i as i64 - j as i64;
        c.a(d) - c.c_tilde(d)
    })
    .determinant()
}

/// 𝒜^{β,y−β}_u(κ−ρ) on its stated domain 0 ≤ κ ≤ max(ρ−u−1, ρ−1).
pub fn a_func(params: &ModelParams, u: i32, y: f64, kappa: i64) -> Result<f64> {
    let r = params.rho as i64;
    let hi = (r - u as i64 - 1).max(r - 1);
    if kappa < 0 || kappa > hi {
        return Err(Error::IndexOutOfRange { index: kappa, lo: 0, hi });
    }
    let c = CoeffTables::new(params.beta, 2 * r + 8)?;
    Ok(a_eval(&c, params.rho, u, y, kappa))
}

// Same closed form without the domain check; the kernel sum reaches κ past
// the stated range when u₂ < min(u₁, 0).
fn a_eval(c: &CoeffTables, rho: usize, u: i32, y: f64, kappa: i64) -> f64 {
    let beta = c.beta;
    let shift = kappa as i32 - rho as i32 + u;
    let mut v = phi_fn(shift, -y - beta);
    for al in 0..u.max(0) {
        v -= c.c_tilde((shift - al) as i64) * hermite_tilde(al, beta - y);
    }
    v
}

/// The Gaussian form of 𝒜 valid for u ≤ 0.
pub fn a_func_gaussian(params: &ModelParams, u: i32, y: f64, kappa: i64) -> f64 {
    let s = y + params.beta;
    let k = params.rho as i32 - kappa as i32 - u;
    (-s * s).exp() * FRAC_1_SQRT_PI * hermite(k - 1, s) / 2f64.powi(k)
}

/// ℬ^{β,y−β}_u(λ−ρ) in its four-case form.
pub fn b_func(params: &ModelParams, u: i32, y: f64, lambda: i64) -> f64 {
    let c = CoeffTables::new(params.beta, 2 * params.rho as i64 + 8).expect("nonnegative index");
    b_eval(&c, params.rho, u, y, lambda)
}

fn b_eval(c: &CoeffTables, rho: usize, u: i32, y: f64, lambda: i64) -> f64 {
    let beta = c.beta;
    let r = rho as i64;
    let gap = r - lambda;
    if gap <= 0 {
        return if u <= 0 { hermite_tilde((gap - u as i64 - 1) as i32, y + beta) } else { 0.0 };
    }
    let mut v: f64 = (1..=gap)
        .map(|al| c.c(gap - al) * psi_fn((al - u as i64 - 1) as i32, y - beta))
        .sum();
    if u <= -1 {
        for al in u as i64..=-1 {
            v += c.c(gap - al - 1) * p_poly((al - u as i64) as i32, y - beta);
        }
    }
    v
}

/// ℬ before simplification: H̃_{ρ−λ−u−1}(y+β) − Σ c_{ρ−λ−α−1} Φ_{α−u}(y−β).
pub fn b_func_unsimplified(params: &ModelParams, u: i32, y: f64, lambda: i64) -> f64 {
    let c = CoeffTables::new(params.beta, 2 * params.rho as i64 + 8).expect("nonnegative index");
    let gap = params.rho as i64 - lambda;
    let mut v = hermite_tilde((gap - u as i64 - 1) as i32, y + params.beta);
    for al in 0..gap.max(0) {
        v -= c.c(gap - al - 1) * phi_fn((al - u as i64) as i32, y - params.beta);
    }
    v
}

/// 𝕂^TAC for fixed (ρ, β).
#[derive(Debug, Clone)]
pub struct TacnodeKernel {
    pub params: ModelParams,
    block: KBetaBlock,
}

impl TacnodeKernel {
    pub fn new(params: ModelParams) -> Result<Self> {
        Ok(Self { block: KBetaBlock::new(&params)?, params })
    }

    pub fn block(&self) -> &KBetaBlock {
        &self.block
    }

    /// Form (*): minor kernel plus the rank-ρ resolvent perturbation.
    pub fn eval(&self, p1: LevelPoint, p2: LevelPoint) -> f64 {
        let rho = self.params.rho as i64;
        let top = (rho - 1).max(rho - 1 - p2.u as i64);
        let c = self.block.coeffs();
        let a: Vec<f64> = (0..=top).map(|k| a_eval(c, self.params.rho, p1.u, p1.z, k)).collect();
        let ra = self.block.apply_resolvent(&a);
        let pert: f64 = (0..=top)
            .map(|l| ra[l as usize] * b_eval(c, self.params.rho, p2.u, p2.z, l))
            .sum();
        minor_kernel(p1, p2, self.params.beta) + 2.0 * pert
    }

    /// Form (**), through the involution (u, z) ↦ (ρ−u, −z) with swapped arguments.
    pub fn eval_involution(&self, p1: LevelPoint, p2: LevelPoint) -> f64 {
        let r = self.params.rho as i32;
        self.eval(LevelPoint::new(r - p2.u, -p2.z), LevelPoint::new(r - p1.u, -p1.z))
    }

    /// det[𝕂(p_i, p_j)]; 1 for no points.
    pub fn correlation_det(&self, points: &[LevelPoint]) -> f64 {
        let k = points.len();
        if k == 0 {
            return 1.0;
        }
        DMatrix::from_fn(k, k, |i, j| self.eval(points[i], points[j])).determinant()
    }

    /// ∫ 𝕂(u, z; u, z) dz, the expected number of particles on level u.
    pub fn level_trace(&self, u: i32) -> f64 {
        let half = 8f64.max(4.0 + 2.0 * (u.unsigned_abs() as f64).sqrt()) + self.params.beta;
        let f = |z: f64| self.eval(LevelPoint::new(u, z), LevelPoint::new(u, z));
        integrate_adaptive(&f, -half, half, 1e-11)
    }
}

pub fn tacnode_kernel(p1: LevelPoint, p2: LevelPoint, params: &ModelParams) -> Result<f64> {
    Ok(TacnodeKernel::new(*params)?.eval(p1, p2))
}

pub fn correlation_det(points: &[LevelPoint], params: &ModelParams) -> Result<f64> {
    Ok(TacnodeKernel::new(*params)?.correlation_det(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: usize, beta: f64) -> ModelParams {
        ModelParams::new(rho.max(1), rho, beta).unwrap()
    }

    #[test]
    fn minor_kernel_anchors() {
        for y in [-1.2, 0.0, 0.7] {
            let v = minor_kernel(LevelPoint::new(1, y), LevelPoint::new(1, y), 0.0);
            assert!((v - (-y * y).exp() * FRAC_1_SQRT_PI).abs() < 1e-15);
        }
        assert_eq!(minor_kernel(LevelPoint::new(0, 0.3), LevelPoint::new(1, -0.4), 0.2), 0.0);
        // u1=2, u2=1 at the origin: -2ℍ¹(0) + 2[H̃_1(0)Φ_{-1}(0) + H̃_0(0)Φ_0(0)]
        let v = minor_kernel(LevelPoint::new(2, 0.0), LevelPoint::new(1, 0.0), 0.0);
        assert!((v - (-2.0 + 2.0 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn gh_examples() {
        assert!((gh_funcs(0.0, 0, 0.0).0 - 0.5).abs() < 1e-16);
        assert_eq!(gh_funcs(0.4, -1, 0.1).1, 1.0);
        assert_eq!(gh_funcs(0.4, 0, 0.1).1, 0.0);
    }

    #[test]
    fn block_examples() {
        let b = kbeta_block(&params(1, 0.0)).unwrap();
        assert!((b.matrix[(0, 0)] - 0.5).abs() < 1e-16);
        let b2 = kbeta_block(&params(2, 0.0)).unwrap();
        for l in 0..6 {
            assert_eq!(b2.entry(l, 2), 0.0);
            assert_eq!(b2.entry(l, 5), 0.0);
        }
        let b3 = kbeta_block(&params(2, 1.0)).unwrap();
        let id = (DMatrix::identity(2, 2) - &b3.matrix) * &b3.resolvent;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn fredholm_anchors() {
        assert!((fredholm_det(&params(1, 0.0)) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for beta in [0.0, 1.0, 2.0, 4.0] {
            let d = fredholm_det(&params(1, beta));
            assert!(d > prev && d <= 1.0);
            prev = d;
        }
        assert!((prev - 1.0).abs() < 1e-9);
        let p = params(2, 0.5);
        assert!((fredholm_det(&p) - kbeta_block(&p).unwrap().window_det()).abs() < 1e-10);
    }

    #[test]
    fn a_func_examples() {
        assert!(a_func(&params(1, 0.0), -1, 0.0, 0).unwrap().abs() < 1e-16);
        let v = a_func(&params(1, 0.0), 0, 0.0, 0).unwrap();
        assert!((v - 0.5 * FRAC_1_SQRT_PI).abs() < 1e-16);
        assert!(a_func(&params(1, 0.0), 2, 0.0, 1).is_err());
        for beta in [0.0, 0.7] {
            let p = params(2, beta);
            for y in [-1.1, 0.3, 0.9] {
                for k in 0..=3 {
                    let g = a_func(&p, -2, y, k).unwrap();
                    assert!((g - a_func_gaussian(&p, -2, y, k)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn b_func_examples() {
        let p1 = params(1, 0.0);
        assert_eq!(b_func(&p1, 1, 0.3, 1), 0.0);
        // ρ−λ−u−1 = 0 here, so the value is H̃_0 = 1
        assert!((b_func(&p1, -1, 0.4, 1) - 1.0).abs() < 1e-15);
        assert!((b_func(&p1, -2, 0.4, 1) - 0.8).abs() < 1e-15);
        for beta in [0.0, 0.6] {
            for rho in 1..=3 {
                let p = params(rho, beta);
                for u in -3..=4 {
                    for l in 0..(rho as i64 + 3) {
                        for y in [-1.3, 0.2, 1.4] {
                            let a = b_func(&p, u, y, l);
                            let b = b_func_unsimplified(&p, u, y, l);
                            assert!((a - b).abs() < 1e-10, "rho={rho} u={u} l={l} y={y}: {a} vs {b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn resolvent_tail_includes_off_window_block() {
        let b = kbeta_block(&params(2, 0.4)).unwrap();
        let v = [0.3, -0.2, 0.5, 0.1];
        let out = b.apply_resolvent(&v);
        // (1 - 𝒦) out = v on all four rows
        for l in 0..4 {
            let k_out: f64 = (0..4).map(|k| b.entry(l as i64, k as i64) * out[k]).sum();
            assert!((out[l] - k_out - v[l]).abs() < 1e-13);
        }
    }

    #[test]
    fn correlation_det_edge_cases() {
        let k = TacnodeKernel::new(params(1, 0.0)).unwrap();
        assert_eq!(k.correlation_det(&[]), 1.0);
        let p = LevelPoint::new(1, 0.2);
        assert!(k.correlation_det(&[p, p]).abs() < 1e-10);
    }

    #[test]
    fn level_one_trace_is_one() {
        let k = TacnodeKernel::new(params(1, 0.0)).unwrap();
        assert!((k.level_trace(1) - 1.0).abs() < 1e-6);
    }
}
