//! Hermite-type polynomials, the error-function pair and the Φ/Ψ family,
//! plus the coefficient sequences and Toeplitz blocks built from them.

use nalgebra::DMatrix;
use libm::erfc;

use crate::error::{Error, Result};

pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Physicists' Hermite polynomial, zero for negative degree.
pub fn hermite(m: i32, x: f64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..m {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// H_m(x)/m!, via the scaled recurrence so large degrees do not overflow.
pub fn hermite_tilde(m: i32, x: f64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..m {
        let next = (2.0 * x * cur - 2.0 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// P_m(x) = H_m(ix)/(m! i^m), from m P_m = 2x P_{m-1} + 2 P_{m-2}.
pub fn p_poly(m: i32, x: f64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 1..=m {
        let next = (2.0 * x * cur + 2.0 * prev) / k as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Q_m: Q_0 = 1, Q_{-1} = 0, ½(m+1) Q_m = η Q_{m-1} + Q_{m-2} upward,
/// and Q_{-k}(η) = H_{k-2}(-η)/2^{k-1} for k ≥ 2.
pub fn q_poly(m: i32, eta: f64) -> f64 {
    if m == -1 {
        return 0.0;
    }
    if m < -1 {
        let k = -m;
        return hermite(k - 2, -eta) / 2f64.powi(k - 1);
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 1..=m {
        let next = 2.0 * (eta * cur + prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// (F, G) with F the Gaussian distribution function e^{-ξ²}/√π and G = 1 − F.
pub fn erf_pair(y: f64) -> (f64, f64) {
    (0.5 * erfc(-y), 0.5 * erfc(y))
}

fn gauss(eta: f64) -> f64 {
    (-eta * eta).exp() * FRAC_1_SQRT_PI
}

/// F·P_m + F′·Q_{m−1} evaluated literally. Accurate for η ≳ −1; loses
/// digits to cancellation further left.
pub fn phi_closed_form(m: i32, eta: f64) -> f64 {
    let (f, _) = erf_pair(eta);
    f * p_poly(m, eta) + gauss(eta) * q_poly(m - 1, eta)
}

/// Φ_m(η) = (2^m/(√π m!)) ∫_0^∞ ξ^m e^{−(ξ−η)²} dξ for m ≥ 0, with the
/// Gaussian closed branch for m ≤ −1.
pub fn phi_fn(m: i32, eta: f64) -> f64 {
    if m < 0 {
        let k = -m;
        return gauss(eta) * hermite(k - 1, -eta) / 2f64.powi(k);
    }
    if eta >= -1.0 || m == 0 {
        return phi_closed_form(m, eta);
    }
    phi_by_ratios(m, eta)
}

// Backward continued fraction for r_k = kΦ_k/(2Φ_{k−1}) from the three-term
// recurrence (k+1)Φ_{k+1} = 2ηΦ_k + 2Φ_{k−1}; Φ_0 = F is exact.
fn phi_by_ratios(m: i32, eta: f64) -> f64 {
    let depth = m as usize + 400;
    let mut ratios = vec![0.0; m as usize + 1];
    let mut r = (depth as f64 / 2.0).sqrt();
    for k in (1..=depth).rev() {
        r = (k as f64 / 2.0) / (r - eta);
        if k <= m as usize {
            ratios[k] = r;
        }
    }
    let (mut val, _) = erf_pair(eta);
    for (k, r) in ratios.iter().enumerate().skip(1) {
        val *= 2.0 * r / k as f64;
    }
    val
}

/// Ψ_m(η) = G·P_m + G′·Q_{m−1}; equals −Φ_m for m ≤ −1 and (−1)^m Φ_m(−η).
pub fn psi_fn(m: i32, eta: f64) -> f64 {
    if m < 0 {
        return -phi_fn(m, eta);
    }
    if eta <= 1.0 {
        let (_, g) = erf_pair(eta);
        g * p_poly(m, eta) - gauss(eta) * q_poly(m - 1, eta)
    } else {
        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
        s * phi_fn(m, -eta)
    }
}

/// ℍ^m(z) = 1_{z≥0} z^{m−1}/(m−1)! for m ≥ 1.
pub fn heaviside_pow(m: u32, z: f64) -> f64 {
    assert!(m >= 1, "heaviside_pow needs m >= 1");
    if z < 0.0 {
        return 0.0;
    }
    let mut v = 1.0;
    for j in 1..m {
        v *= z / j as f64;
    }
    v
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Coefficients c_k, c̃_k and the inverse sequence a_k for a fixed β.
#[derive(Debug, Clone)]
pub struct CoeffTables {
    pub beta: f64,
    pub max_index: usize,
    c: Vec<f64>,
    a: Vec<f64>,
    // c̃_k for k in -max_index..=max_index
    c_tilde: Vec<f64>,
}

impl CoeffTables {
    pub fn new(beta: f64, max_index: i64) -> Result<Self> {
        if max_index < 0 {
            return Err(Error::InvalidParams(format!("max_index must be >= 0, got {max_index}")));
        }
        let k_max = max_index as usize;
        let arg = beta * std::f64::consts::SQRT_2;
        let c: Vec<f64> = (0..=k_max as i32).map(|k| coeff_c(k, arg)).collect();
        // a from the convolution recursion; c_0 = 1
        let mut a = vec![0.0; k_max + 1];
        a[0] = 1.0;
        for m in 1..=k_max {
            a[m] = -(1..=m).map(|q| c[q] * a[m - q]).sum::<f64>();
        }
        let c_tilde = (-(k_max as i32)..=k_max as i32).map(|k| coeff_c_tilde(k, arg)).collect();
        Ok(Self { beta, max_index: k_max, c, a, c_tilde })
    }

    /// c_k, zero for k < 0.
    pub fn c(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if (k as usize) <= self.max_index {
            self.c[k as usize]
        } else {
            coeff_c(k as i32, self.beta * std::f64::consts::SQRT_2)
        }
    }

    /// a_k, zero for k < 0.
    pub fn a(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if (k as usize) <= self.max_index {
            self.a[k as usize]
        } else {
            coeff_a(k as i32, self.beta)
        }
    }

    pub fn c_tilde(&self, k: i64) -> f64 {
        if k.unsigned_abs() as usize <= self.max_index {
            self.c_tilde[(k + self.max_index as i64) as usize]
        } else {
            coeff_c_tilde(k as i32, self.beta * std::f64::consts::SQRT_2)
        }
    }

    pub fn c_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn a_slice(&self) -> &[f64] {
        &self.a
    }
}

fn coeff_c(k: i32, arg: f64) -> f64 {
    2f64.powf(k as f64 / 2.0) * hermite_tilde(k, arg)
}

fn coeff_c_tilde(k: i32, arg: f64) -> f64 {
    2f64.powf(k as f64 / 2.0) * phi_fn(k, -arg)
}

/// The explicit form a_k = 2^{k/2} (−1)^k P_k(β√2).
pub fn coeff_a(k: i32, beta: f64) -> f64 {
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    s * 2f64.powf(k as f64 / 2.0) * p_poly(k, beta * std::f64::consts::SQRT_2)
}

/// C_α with C[i][j] = c_{i−j} on and below the diagonal.
pub fn toeplitz_lower(coeffs: &[f64], alpha: usize) -> DMatrix<f64> {
    DMatrix::from_fn(alpha, alpha, |i, j| if i >= j { coeffs[i - j] } else { 0.0 })
}

/// C_α written upside down.
pub fn toeplitz_flipped(coeffs: &[f64], alpha: usize) -> DMatrix<f64> {
    let lower = toeplitz_lower(coeffs, alpha);
    DMatrix::from_fn(alpha, alpha, |i, j| lower[(alpha - 1 - i, j)])
}

/// Δ_n(x) = ∏_{i<j}(x_i − x_j), positive for strictly decreasing x.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            v *= x[i] - x[j];
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Plus,
    Minus,
}

/// Δ̃^{β±}_{n,ρ}(x): rows 1, x, …, x^{n−ρ−1}, Φ_{n−ρ}(β±x), …, Φ_{n−1}(β±x),
/// normalized so that ρ = 0 gives Δ_n(x) in the decreasing convention.
pub fn vandermonde_ext(x: &[f64], rho: usize, beta: f64, shift: Shift) -> f64 {
    let n = x.len();
    assert!(rho <= n, "rho exceeds the vector length");
    let sgn = match shift {
        Shift::Plus => 1.0,
        Shift::Minus => -1.0,
    };
    let m = DMatrix::from_fn(n, n, |k, j| {
        if k < n - rho {
            x[j].powi(k as i32)
        } else {
            phi_fn(k as i32, beta + sgn * x[j])
        }
    });
    ordering_sign(n) * m.determinant()
}

/// (−1)^{n(n−1)/2}: det[x_j^k] = ordering_sign(n)·Δ_n(x).
pub fn ordering_sign(n: usize) -> f64 {
    if (n * n.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The matrix (H̃_{n−j}(v_i))_{1≤i,j≤n}.
pub fn hermite_matrix(v: &[f64]) -> DMatrix<f64> {
    let n = v.len();
    DMatrix::from_fn(n, n, |i, j| hermite_tilde((n - 1 - j) as i32, v[i]))
}

/// c′_n = (−2)^{n(n−1)/2}/∏_{j<n} j!, so det H̃^{(−x)} = c′_n Δ_n(x).
pub fn hermite_matrix_constant(n: usize) -> f64 {
    let e = (n * n.saturating_sub(1) / 2) as i32;
    let den: f64 = (1..n as u32).map(factorial).product();
    (-2f64).powi(e) / den
}

/// Φ_m(η) from its defining integral, for use as an oracle. For m ≥ 0 the
/// half-line moment (2^m/(√π m!))∫_0^∞ ξ^m e^{−(ξ−η)²} dξ; for m = −k < 0
/// the transform 2^{−k}π^{−1}∫_0^∞ t^{k−1} e^{−t²/4} cos(ηt + (k−1)π/2) dt.
pub fn phi_integral(m: i32, eta: f64) -> f64 {
    if m >= 0 {
        let upper = eta.max(0.0) + 12.0;
        let scale = 2f64.powi(m) * FRAC_1_SQRT_PI / factorial(m as u32);
        let f = |xi: f64| xi.powi(m) * (-(xi - eta).powi(2)).exp();
        let rough = crate::quad::integrate_split(&f, 0.0, upper, &[], 40);
        scale * crate::quad::integrate_adaptive(&f, 0.0, upper, 1e-15 * rough.abs())
    } else {
        let k = -m;
        let phase = (k - 1) as f64 * std::f64::consts::FRAC_PI_2;
        let f = |t: f64| t.powi(k - 1) * (-t * t / 4.0).exp() * (eta * t + phase).cos();
        2f64.powi(-k) / std::f64::consts::PI * crate::quad::integrate_adaptive(&f, 0.0, 16.0 + 2.0 * k as f64, 1e-15)
    }
}

/// Ψ_m(η) by quadrature: the moment over (−∞, 0] for m ≥ 0, −Φ_m for m < 0.
pub fn psi_integral(m: i32, eta: f64) -> f64 {
    if m < 0 {
        return -phi_integral(m, eta);
    }
    let lower = eta.min(0.0) - 12.0;
    let scale = 2f64.powi(m) * FRAC_1_SQRT_PI / factorial(m as u32);
    let f = |xi: f64| xi.powi(m) * (-(xi - eta).powi(2)).exp();
    let rough = crate::quad::integrate_split(&f, lower, 0.0, &[], 40);
    scale * crate::quad::integrate_adaptive(&f, lower, 0.0, 1e-15 * rough.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.7), 1.0);
        assert_eq!(hermite(-2, 1.0), 0.0);
        assert!(close(hermite(3, 0.5), -5.0, 1e-14));
        for &x in &[-1.3, 0.2, 2.5] {
            assert!(close(hermite_tilde(5, x), hermite(5, x) / 120.0, 1e-12));
            assert!(close(hermite(3, x), 8.0 * x * x * x - 12.0 * x, 1e-12));
        }
    }

    #[test]
    fn p_and_q_values() {
        assert_eq!(p_poly(0, -2.0), 1.0);
        assert!(close(p_poly(2, 1.0), 3.0, 1e-15));
        assert_eq!(p_poly(-1, 0.3), 0.0);
        assert_eq!(q_poly(-1, 5.0), 0.0);
        assert!(close(q_poly(-2, 1.5), 0.5, 1e-15));
        assert!(close(q_poly(1, 1.0), 1.0, 1e-15));
    }

    #[test]
    fn erf_pair_basics() {
        assert_eq!(erf_pair(0.0), (0.5, 0.5));
        let (f, g) = erf_pair(20.0);
        assert!(close(f, 1.0, 1e-15) && g.abs() < 1e-15);
        for &y in &[-2.0, 0.3, 1.7] {
            assert!(close(erf_pair(-y).0, erf_pair(y).1, 1e-16));
        }
    }

    #[test]
    fn phi_examples() {
        assert!(close(phi_fn(0, 0.0), 0.5, 1e-16));
        assert!(close(phi_fn(-1, 0.0), 0.5 * FRAC_1_SQRT_PI, 1e-16));
        assert!(close(phi_fn(2, 1.3), phi_integral(2, 1.3), 1e-10));
    }

    #[test]
    fn ratio_branch_matches_quadrature_far_left() {
        for m in [1, 4, 10] {
            for eta in [-1.5, -3.0, -6.0] {
                let (got, want) = (phi_fn(m, eta), phi_integral(m, eta));
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "m={m} eta={eta} {got} {want} {}", phi_closed_form(m, eta));
            }
        }
    }

    #[test]
    fn both_branches_match_quadrature() {
        for m in -6..=8 {
            for &eta in &[-4.0, -1.3, 0.0, 0.6, 2.2, 4.0] {
                assert!(close(phi_fn(m, eta), phi_integral(m, eta), 1e-11), "phi m={m} eta={eta}");
                assert!(close(psi_fn(m, eta), psi_integral(m, eta), 1e-11), "psi m={m} eta={eta}");
            }
        }
    }

    #[test]
    fn psi_reflection() {
        assert!(close(psi_fn(-1, 0.7), -phi_fn(-1, 0.7), 1e-16));
        assert!(close(psi_fn(0, 0.0), 0.5, 1e-16));
        assert!(close(psi_fn(3, -0.4), -phi_fn(3, 0.4), 1e-14));
    }

    #[test]
    fn heaviside_examples() {
        assert_eq!(heaviside_pow(1, 0.0), 1.0);
        assert!(close(heaviside_pow(3, 2.0), 2.0, 1e-15));
        assert_eq!(heaviside_pow(5, -0.1), 0.0);
    }

    #[test]
    fn coefficient_examples() {
        let t = CoeffTables::new(0.5, 6).unwrap();
        assert!(close(t.c(1), 2.0, 1e-14));
        assert_eq!((t.c(0), t.a(0)), (1.0, 1.0));
        let t0 = CoeffTables::new(0.0, 4).unwrap();
        assert!(close(t0.c_tilde(0), 0.5, 1e-16));
        assert!(CoeffTables::new(0.3, -1).is_err());
        for k in 0..=6 {
            assert!(close(t.a(k), coeff_a(k as i32, 0.5), 1e-12));
        }
    }

    #[test]
    fn toeplitz_examples() {
        let t = CoeffTables::new(0.7, 8).unwrap();
        assert_eq!(toeplitz_lower(t.c_slice(), 1)[(0, 0)], 1.0);
        let prod = toeplitz_lower(t.c_slice(), 6) * toeplitz_lower(t.a_slice(), 6);
        assert!((prod - DMatrix::identity(6, 6)).amax() < 1e-12);
        let f = toeplitz_flipped(t.c_slice(), 3);
        assert_eq!(f[(0, 0)], t.c(2));
        assert_eq!(f[(2, 0)], 1.0);
        assert_eq!(f[(2, 1)], 0.0);
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&[1.0, 0.0]), 1.0);
        let x = [2.1, 0.4, -0.3, -1.7];
        assert!(close(vandermonde_ext(&x, 0, 0.3, Shift::Plus), vandermonde(&x), 1e-10));
        assert!(close(vandermonde_ext(&[0.0], 1, 0.0, Shift::Plus), 0.5, 1e-16));
    }
}
