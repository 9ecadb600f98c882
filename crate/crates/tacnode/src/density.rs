//! One-level densities, the two-level determinant Γ and the joint and
//! conditional laws built on it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cone::{in_double_cone, DoubleConePoint};
use crate::error::{Error, Result};
use crate::kernel::fredholm_det;
use crate::params::ModelParams;
use crate::special::{
    factorial, hermite_matrix, hermite_tilde, heaviside_pow, p_poly, phi_fn,
    vandermonde, vandermonde_ext, Shift, FRAC_1_SQRT_PI,
};

/// c_{ρ,δ} = ∏_{l=1}^{δ−1} (2^l/l!) / det(1 − 𝒦^β).
pub fn density_constant(rho: usize, delta: usize, beta: f64) -> f64 {
    let p = ModelParams { n: rho, rho, beta };
    let prod: f64 = (1..delta as u32).map(|l| 2f64.powi(l as i32) / factorial(l)).product();
    prod / fredholm_det(&p)
}

fn gauss(t: f64) -> f64 {
    (-t * t).exp() * FRAC_1_SQRT_PI
}

/// Density of the ordered level vector z^(u) (z decreasing).
pub fn one_level_density(params: &ModelParams, u: i32, z: &[f64]) -> Result<f64> {
    let (rho, beta) = (params.rho, params.beta);
    let expected = params.level_size(u);
    if z.len() != expected {
        return Err(Error::Dimension { expected, got: z.len() });
    }
    let r = rho as i32;
    if u > r {
        // above the overlap: c Δ̃^{β+} Δ ∏ e^{−(z−β)²}/√π
        let c = density_constant(rho, (u - r) as usize, beta);
        let weight: f64 = z.iter().map(|&t| gauss(t - beta)).product();
        return Ok(c * vandermonde_ext(z, rho, beta, Shift::Plus) * vandermonde(z) * weight);
    }
    let neg = (-u).max(0) as usize;
    let pos = u.max(0) as usize;
    let size = z.len();
    let first = DMatrix::from_fn(size, size, |k, j| {
        if k < neg {
            z[j].powi(k as i32)
        } else {
            phi_fn(k as i32 - neg as i32 - u, beta - z[j])
        }
    });
    let lead = (r - u).max(0) as usize;
    let second = DMatrix::from_fn(size, size, |k, j| {
        if k < lead {
            z[j].powi(k as i32) * gauss(z[j] + beta)
        } else {
            phi_fn((k - lead) as i32, beta + z[j])
        }
    });
    let parity = rho * (rho - 1) / 2 + rho * neg;
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    let c = density_constant(rho, neg, beta) * 2f64.powi(pos as i32) * sign;
    Ok(c * first.determinant() * second.determinant())
}

// Polynomials as coefficient vectors, lowest degree first.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        p = next;
    }
    p
}

fn poly_deriv(p: &[f64], times: usize) -> Vec<f64> {
    let mut q = p.to_vec();
    for _ in 0..times {
        if q.len() <= 1 {
            return vec![0.0];
        }
        q = q.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
    }
    q
}

fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn min_gap(x: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            g = g.min((x[i] - x[j]).abs());
        }
    }
    g
}

/// ℒ from the R, R̂ polynomials. Identity for δ = 0.
pub fn build_l(params: &ModelParams, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    if n != params.n {
        return Err(Error::Dimension { expected: params.n, got: n });
    }
    let d = params.delta();
    if d == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    if min_gap(x) == 0.0 {
        return Err(Error::Singular("repeated x entries in L".into()));
    }
    let beta = params.beta;
    let roots: Vec<f64> = x.iter().map(|&v| v - beta).collect();
    let r = poly_from_roots(&roots);
    let r1 = poly_deriv(&r, 1);
    let rd = poly_deriv(&r, d + 1);
    let sgn = if d % 2 == 0 { 1.0 } else { -1.0 };
    let rp: Vec<f64> = roots.iter().map(|&t| poly_eval(&r1, t)).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            sgn / (d + 1) as f64 * poly_eval(&rd, roots[i]) / rp[i]
        } else {
            let others: Vec<f64> = (0..n).filter(|&k| k != i && k != j).map(|k| roots[k]).collect();
            let rhat = poly_deriv(&poly_from_roots(&others), d - 1);
            sgn * d as f64 * poly_eval(&rhat, roots[i]) / rp[j]
        }
    }))
}

/// ℒ_ik = 2^δ Σ_{α=1}^{ρ} H̃_{ρ−α}(β−x_i) [(H̃^{(β−x)})^{-1}]_{α,k}.
pub fn build_l_hermite(params: &ModelParams, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let (rho, beta) = (params.rho, params.beta);
    let v: Vec<f64> = x.iter().map(|&t| beta - t).collect();
    let inv = hermite_matrix(&v)
        .try_inverse()
        .ok_or_else(|| Error::Singular("Hermite matrix of x".into()))?;
    let scale = 2f64.powi(params.delta() as i32);
    Ok(DMatrix::from_fn(n, n, |i, k| {
        scale * (1..=rho).map(|al| hermite_tilde((rho - al) as i32, v[i]) * inv[(al - 1, k)]).sum::<f64>()
    }))
}

/// f_0..f_{ρ−1} solving Σ_λ H̃_{n−λ−1}(−x_i) f_λ = −ℍ^{ρ+2δ}(2(y−x_i)).
pub fn solve_f(params: &ModelParams, x: &[f64], y: f64) -> Result<Vec<f64>> {
    let full = solve_f_all(params, x, y)?;
    Ok(full[..params.rho].to_vec())
}

fn solve_f_all(params: &ModelParams, x: &[f64], y: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if n != params.n {
        return Err(Error::Dimension { expected: params.n, got: n });
    }
    let m = hermite_matrix(&x.iter().map(|&t| -t).collect::<Vec<_>>());
    let order = (params.rho + 2 * params.delta()) as u32;
    let rhs = DVector::from_fn(n, |i, _| -heaviside_pow(order, 2.0 * (y - x[i])));
    let sol = m.lu().solve(&rhs).ok_or_else(|| Error::Singular("Hermite matrix of -x".into()))?;
    Ok(sol.iter().copied().collect())
}

/// f by Cramer's rule, column k replaced by the right-hand side.
pub fn solve_f_cramer(params: &ModelParams, x: &[f64], y: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let m = hermite_matrix(&x.iter().map(|&t| -t).collect::<Vec<_>>());
    let det = m.determinant();
    if det == 0.0 {
        return Err(Error::Singular("Hermite matrix of -x".into()));
    }
    let order = (params.rho + 2 * params.delta()) as u32;
    Ok((0..params.rho)
        .map(|k| {
            let mut mk = m.clone();
            for i in 0..n {
                mk[(i, k)] = heaviside_pow(order, 2.0 * (y - x[i]));
            }
            -mk.determinant() / det
        })
        .collect())
}

/// Which formula produced Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GammaRoute {
    /// det[(y−x)^{n−1}/(n−1)! − ℒ ℍ^{n+δ}(y−x)].
    LMatrix,
    /// H̃-determinant times the P/f determinant (used for near-coincident x).
    HermiteSystem,
}

/// Fixed (x, y) pair with everything Γ needs.
#[derive(Debug, Clone)]
pub struct TwoLevelWorkspace {
    pub params: ModelParams,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub l: Option<DMatrix<f64>>,
}

impl TwoLevelWorkspace {
    pub fn new(params: ModelParams, x: &[f64], y: &[f64]) -> Result<Self> {
        for v in [x, y] {
            if v.len() != params.n {
                return Err(Error::Dimension { expected: params.n, got: v.len() });
            }
            if v.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::InvalidParams("x and y must be decreasing".into()));
            }
        }
        let l = if min_gap(x) >= 1e-6 { Some(build_l(&params, x)?) } else { None };
        Ok(Self { params, x: x.to_vec(), y: y.to_vec(), l })
    }

    pub fn gamma(&self) -> Result<f64> {
        Ok(self.gamma_with_route()?.0)
    }

    pub fn gamma_with_route(&self) -> Result<(f64, GammaRoute)> {
        self.gamma_for(&self.y)
    }

    /// Γ for the stored x against another y of the same size.
    pub fn gamma_for(&self, y: &[f64]) -> Result<(f64, GammaRoute)> {
        match &self.l {
            Some(l) => Ok((gamma_l_matrix(&self.params, &self.x, y, l), GammaRoute::LMatrix)),
            None => Ok((self.hermite_system(y)?, GammaRoute::HermiteSystem)),
        }
    }

    /// Γ through the H̃ and P/f determinants.
    pub fn gamma_hermite_system(&self) -> Result<f64> {
        self.hermite_system(&self.y)
    }

    fn hermite_system(&self, y: &[f64]) -> Result<f64> {
        let p = &self.params;
        let (n, d, beta) = (p.n, p.delta(), p.beta);
        let xs: Vec<f64> = self.x.iter().map(|&t| t - beta).collect();
        let mut rows = DMatrix::zeros(n, n);
        for (j, &yj) in y.iter().enumerate() {
            let f = solve_f(p, &xs, yj - beta)?;
            for i in 0..n {
                rows[(i, j)] = p_poly(i as i32, yj - beta) + if i >= d { f[i - d] } else { 0.0 };
            }
        }
        let hx = hermite_matrix(&self.x.iter().map(|&t| beta - t).collect::<Vec<_>>()).determinant();
        Ok(hx / 2f64.powi((n * (n - 1)) as i32) * rows.determinant())
    }
}

fn gamma_l_matrix(p: &ModelParams, x: &[f64], y: &[f64], l: &DMatrix<f64>) -> f64 {
    let n = p.n;
    let order = (n + p.delta()) as u32;
    let fact = factorial(n as u32 - 1);
    DMatrix::from_fn(n, n, |i, j| {
        (y[j] - x[i]).powi(n as i32 - 1) / fact
            - (0..n).map(|k| l[(i, k)] * heaviside_pow(order, y[j] - x[k])).sum::<f64>()
    })
    .determinant()
}

pub fn two_level_gamma(ws: &TwoLevelWorkspace) -> Result<f64> {
    ws.gamma()
}

/// δ = 0 reduction: det[(x_i − y_j)^{n−1}/(n−1)! · 1_{y_j<x_i}].
pub fn gamma_overlap_full(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let fact = factorial(n as u32 - 1);
    DMatrix::from_fn(n, n, |i, j| {
        if y[j] < x[i] {
            (x[i] - y[j]).powi(n as i32 - 1) / fact
        } else {
            0.0
        }
    })
    .determinant()
}

/// δ = 1 reduction: (−1)^n det[(Σ_k ℒ_ik (x_k−y_j)^n 1_{y_j<x_k} − R′(x_i−β))/n!].
pub fn gamma_delta_one(params: &ModelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if params.delta() != 1 {
        return Err(Error::InvalidParams("delta must be 1".into()));
    }
    let n = params.n;
    let l = build_l(params, x)?;
    let roots: Vec<f64> = x.iter().map(|&v| v - params.beta).collect();
    let r1 = poly_deriv(&poly_from_roots(&roots), 1);
    let fact = factorial(n as u32);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let s: f64 = (0..n)
            .filter(|&k| y[j] < x[k])
            .map(|k| l[(i, k)] * (x[k] - y[j]).powi(n as i32))
            .sum();
        (s - poly_eval(&r1, roots[i])) / fact
    });
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * m.determinant())
}

/// ρ_n^GUE(x) = c_n Δ_n(x)² ∏ e^{−x_i²} for ordered x.
pub fn gue_density(x: &[f64]) -> f64 {
    let n = x.len();
    let fact: f64 = (1..n as u32).map(factorial).product();
    let c = 2f64.powf((n * n) as f64 / 2.0) / ((2.0 * std::f64::consts::PI).powf(n as f64 / 2.0) * fact);
    let d = vandermonde(x);
    c * d * d * x.iter().map(|t| (-t * t).exp()).product::<f64>()
}

/// Vol(𝒞_x) = Δ_n(x)/∏_{k<n} k!.
pub fn single_cone_volume(x: &[f64]) -> f64 {
    let fact: f64 = (1..x.len() as u32).map(factorial).product();
    vandermonde(x) / fact
}

/// Joint density of (x, y) on levels n and ρ−n.
pub fn joint_two_level_density(ws: &TwoLevelWorkspace) -> Result<f64> {
    JointDensity::new(ws.params)?.eval_with(ws, &ws.y)
}

/// The joint density with its Fredholm normalization computed once.
#[derive(Debug, Clone, Copy)]
pub struct JointDensity {
    pub params: ModelParams,
    pub fred: f64,
}

impl JointDensity {
    pub fn new(params: ModelParams) -> Result<Self> {
        let fred = fredholm_det(&params);
        if fred <= 0.0 {
            return Err(Error::Singular(format!("Fredholm determinant {fred}")));
        }
        Ok(Self { params, fred })
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.eval_with(&TwoLevelWorkspace::new(self.params, x, y)?, y)
    }

    /// Density at (ws.x, y), reusing the x-dependent part of `ws`.
    pub fn eval_with(&self, ws: &TwoLevelWorkspace, y: &[f64]) -> Result<f64> {
        let p = &self.params;
        let (gamma, _) = ws.gamma_for(y)?;
        let scale = ws.x.iter().chain(y).fold(1.0f64, |m, v| m.max(v.abs())).powi((p.n * (p.n - 1)) as i32);
        if gamma < -1e-9 * scale {
            return Err(Error::NegativeVolume(gamma));
        }
        let vx = single_cone_volume(&ws.x);
        let vy = single_cone_volume(y);
        if vx <= 0.0 || vy <= 0.0 {
            return Ok(0.0);
        }
        let xs: Vec<f64> = ws.x.iter().map(|t| t - p.beta).collect();
        let ys: Vec<f64> = y.iter().map(|t| t + p.beta).collect();
        Ok(gue_density(&xs) * gue_density(&ys) * gamma.max(0.0) / (self.fred * vx * vy))
    }
}

/// 1/Vol(𝒞_xy) inside the double cone, 0 outside. The cone of n = ρ = 1
/// has no interior coordinates and volume 1_{x>y}.
pub fn conditional_cone_density(params: &ModelParams, x: &[f64], y: &[f64], point: &DoubleConePoint) -> Result<f64> {
    if !in_double_cone(point, x, y)? {
        return Ok(0.0);
    }
    let gamma = TwoLevelWorkspace::new(*params, x, y)?.gamma()?;
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{LevelPoint, TacnodeKernel};

    fn p(n: usize, rho: usize, beta: f64) -> ModelParams {
        ModelParams::new(n, rho, beta).unwrap()
    }

    #[test]
    fn overlap_density_matches_kernel_det() {
        let params = p(2, 2, 0.0);
        let k = TacnodeKernel::new(params).unwrap();
        let z = [1.0, -1.0];
        let pts = [LevelPoint::new(1, z[0]), LevelPoint::new(1, z[1])];
        let kd = k.correlation_det(&pts);
        let d = one_level_density(&params, 1, &z).unwrap();
        assert!((d - kd).abs() < 1e-8 * kd.abs(), "{d} vs {kd}");
    }

    // the columns of ℒ add up to zero
    #[test]
    fn l_columns_sum_to_zero() {
        for (n, rho) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
            let x = &[1.3, 0.1, -0.9, -1.7][..n];
            let l = build_l(&p(n, rho, 0.4), x).unwrap();
            assert!(l.column_sum().amax() < 1e-12, "n={n} rho={rho}");
        }
    }

    #[test]
    fn l_examples() {
        assert_eq!(build_l(&p(3, 3, 0.2), &[2.0, 1.0, 0.0]).unwrap(), DMatrix::identity(3, 3));
        let l = build_l(&p(2, 1, 0.4), &[1.3, -0.2]).unwrap();
        assert!(l.trace().abs() < 1e-10);
        let l3 = build_l(&p(3, 2, 0.4), &[1.3, 0.1, -0.9]).unwrap();
        let sv = l3.clone().svd(false, false).singular_values;
        assert_eq!(sv.iter().filter(|&&s| s > 1e-8).count(), 2);
        let alt = build_l_hermite(&p(3, 2, 0.4), &[1.3, 0.1, -0.9]).unwrap();
        assert!((l3 - alt).amax() < 1e-10);
    }

    #[test]
    fn f_examples() {
        let params = p(3, 2, 0.3);
        let x = [1.2, 0.4, -0.7];
        assert!(solve_f(&params, &x, -1.0).unwrap().iter().all(|v| v.abs() < 1e-15));
        let f1 = solve_f(&p(1, 1, 0.0), &[0.5], 0.7).unwrap();
        assert_eq!(f1, vec![-1.0]);
        let f = solve_f(&params, &x, 0.1).unwrap();
        let g = solve_f_cramer(&params, &x, 0.1).unwrap();
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma_anchor() {
        let ws = TwoLevelWorkspace::new(p(2, 2, 0.0), &[2.0, 1.0], &[1.5, 0.5]).unwrap();
        assert!((ws.gamma().unwrap() - 0.25).abs() < 1e-12);
        assert!((ws.gamma_hermite_system().unwrap() - 0.25).abs() < 1e-12);
        assert!((gamma_overlap_full(&[2.0, 1.0], &[1.5, 0.5]) - 0.25).abs() < 1e-15);
        let one = TwoLevelWorkspace::new(p(1, 1, 0.0), &[0.3], &[-0.2]).unwrap();
        assert!((one.gamma().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_delta_one_matches() {
        let params = p(2, 1, 0.7);
        let (x, y) = ([1.1, -0.4], [0.6, -1.3]);
        let ws = TwoLevelWorkspace::new(params, &x, &y).unwrap();
        let g = ws.gamma().unwrap();
        assert!((g - gamma_delta_one(&params, &x, &y).unwrap()).abs() < 1e-9);
        assert!((g - ws.gamma_hermite_system().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn single_cone_examples() {
        assert_eq!(single_cone_volume(&[1.0, 0.0]), 1.0);
        assert_eq!(single_cone_volume(&[2.0, 1.0, 0.0]), 1.0);
        assert_eq!(single_cone_volume(&[1.0, 1.0]), 0.0);
    }

    #[test]
    fn gue_density_n1() {
        assert!((gue_density(&[0.3]) - (-0.09f64).exp() * FRAC_1_SQRT_PI).abs() < 1e-15);
    }
}
