//! Double-cone membership, Monte Carlo volumes, the induction integral and
//! the lattice-path count behind the volume formula.

use rand::Rng;
use serde::Serialize;

use crate::density::TwoLevelWorkspace;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::{panels, rule};
use crate::rng::run_chunks;
use crate::spectrum::{interlaces, intertwines, InterlacingChain};

/// Interior coordinates of a double cone point.
#[derive(Debug, Clone, Serialize)]
pub struct DoubleConePoint {
    pub params: ModelParams,
    /// x^(ρ), …, x^(n−1)
    pub x_levels: Vec<Vec<f64>>,
    /// y^(ρ), …, y^(n−1)
    pub y_levels: Vec<Vec<f64>>,
    /// z^(1), …, z^(ρ−1)
    pub mixed_levels: Vec<Vec<f64>>,
}

impl DoubleConePoint {
    pub fn coordinate_count(&self) -> usize {
        self.x_levels.iter().chain(&self.y_levels).chain(&self.mixed_levels).map(Vec::len).sum()
    }

    /// Reads the interior levels off a full chain: z^(u) for u = ρ..n−1 are
    /// the x levels and z^(ρ−k) for k = ρ..n−1 the y levels.
    pub fn from_chain(chain: &InterlacingChain) -> Self {
        let p = chain.params;
        let (n, r) = (p.n as i32, p.rho as i32);
        let get = |u: i32| chain.levels[&u].values().to_vec();
        Self {
            params: p,
            x_levels: (r..n).map(get).collect(),
            y_levels: (r..n).map(|k| get(r - k)).collect(),
            mixed_levels: (1..r).map(get).collect(),
        }
    }
}

const TOL: f64 = 0.0;

/// Membership in 𝒞^(n)_{x,y}, all inequalities weak.
pub fn in_double_cone(point: &DoubleConePoint, x: &[f64], y: &[f64]) -> Result<bool> {
    let p = point.params;
    let (n, rho) = (p.n, p.rho);
    if x.len() != n || y.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len().min(y.len()) });
    }
    if point.x_levels.len() != n - rho || point.y_levels.len() != n - rho || point.mixed_levels.len() != rho - 1 {
        return Err(Error::Dimension { expected: n * (n - 1), got: point.coordinate_count() });
    }
    for (k, lv) in point.x_levels.iter().chain(&point.y_levels).enumerate() {
        let want = rho + k % (n - rho).max(1);
        if lv.len() != want {
            return Err(Error::Dimension { expected: want, got: lv.len() });
        }
    }
    if point.mixed_levels.iter().any(|z| z.len() != rho) {
        return Err(Error::Dimension { expected: rho, got: 0 });
    }
    // x^(ρ) ≺ … ≺ x^(n−1) ≺ x, and the same for y
    for (levels, top) in [(&point.x_levels, x), (&point.y_levels, y)] {
        let mut chain: Vec<&[f64]> = levels.iter().map(Vec::as_slice).collect();
        chain.push(top);
        if chain.windows(2).any(|w| !interlaces(w[0], w[1], TOL)) {
            return Ok(false);
        }
    }
    let x_rho: &[f64] = point.x_levels.first().map_or(x, Vec::as_slice);
    let y_rho: &[f64] = point.y_levels.first().map_or(y, Vec::as_slice);
    let mut mixed: Vec<&[f64]> = vec![y_rho];
    mixed.extend(point.mixed_levels.iter().map(Vec::as_slice));
    mixed.push(x_rho);
    if mixed.windows(2).any(|w| !intertwines(w[0], w[1], TOL)) {
        return Ok(false);
    }
    // max y^(i) ≤ min x^(ρ−i+1), with the small levels read off the z's
    for i in 1..=rho {
        let y_max = mixed[rho - i][rho - i];
        let x_min = mixed[rho - i + 1][rho - i];
        if y_max > x_min {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Volume estimate by sampling each level of both Gelfand–Tsetlin patterns
/// uniformly in its interlacing box and weighting by the box volume.
pub fn mc_volume(params: &ModelParams, x: &[f64], y: &[f64], samples: u64, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be positive".into()));
    }
    let n = params.n;
    if x.len() != n || y.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len().min(y.len()) });
    }
    let rho = params.rho;
    let parts = run_chunks(samples, 1 << 16, seed, |rng, len| {
        let (mut s, mut s2) = (0.0, 0.0);
        let mut xs: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
        let mut ys: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
        xs[n] = x.to_vec();
        ys[n] = y.to_vec();
        for _ in 0..len {
            let mut w = 1.0;
            for lev in (1..n).rev() {
                for pat in [&mut xs, &mut ys] {
                    let (lo_hi, cur) = pat.split_at_mut(lev + 1);
                    let parent = &cur[0];
                    let child = &mut lo_hi[lev];
                    child.clear();
                    for i in 0..lev {
                        let (hi, lo) = (parent[i], parent[i + 1]);
                        w *= hi - lo;
                        child.push(lo + (hi - lo) * rng.random::<f64>());
                    }
                }
            }
            let ok = (1..=rho).all(|i| {
                let ymax = ys[i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let xmin = xs[rho - i + 1].iter().copied().fold(f64::INFINITY, f64::min);
                ymax <= xmin
            });
            let v = if ok { w } else { 0.0 };
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (s, s2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = s / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    Ok((m, (var / samples as f64).sqrt()))
}

/// Result of the induction check ∫∫ Γ^(n) = Γ^(n+1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InductionResidual {
    pub integral: f64,
    pub closed_form: f64,
    pub residual: f64,
}

/// Integrates Γ^(n)_{xy} over x_i ∈ [z_{i+1}, z_i], y_i ∈ [w_{i+1}, w_i] by
/// nested Gauss–Legendre split at the kinks and compares with Γ^(n+1)_{zw}.
pub fn induction_step_check(params: &ModelParams, z: &[f64], w: &[f64], order: usize) -> Result<InductionResidual> {
    let n = params.n;
    if n > 3 {
        return Err(Error::CostGuard(format!("induction check limited to n <= 3, got {n}")));
    }
    if z.len() != n + 1 || w.len() != n + 1 {
        return Err(Error::Dimension { expected: n + 1, got: z.len().min(w.len()) });
    }
    let upper = ModelParams::new(n + 1, params.rho, params.beta)?;
    let closed_form = TwoLevelWorkspace::new(upper, z, w)?.gamma()?;
    let r = rule(order);
    let mut x = vec![0.0; n];
    let integral = integrate_x(params, z, w, &mut x, 0, r)?;
    let residual = (integral - closed_form).abs() / closed_form.abs().max(1.0);
    Ok(InductionResidual { integral, closed_form, residual })
}

fn integrate_x(p: &ModelParams, z: &[f64], w: &[f64], x: &mut Vec<f64>, i: usize, r: &crate::quad::Rule) -> Result<f64> {
    let n = p.n;
    if i == n {
        let ws = TwoLevelWorkspace::new(*p, x, &vec![0.0; n])?;
        let mut y = vec![0.0; n];
        return integrate_y(&ws, w, &mut y, 0, r);
    }
    let mut total = 0.0;
    for pair in panels(z[i + 1], z[i], w).windows(2) {
        for (t, wt) in r.mapped(pair[0], pair[1]) {
            x[i] = t;
            total += wt * integrate_x(p, z, w, x, i + 1, r)?;
        }
    }
    Ok(total)
}

fn integrate_y(ws: &TwoLevelWorkspace, w: &[f64], y: &mut Vec<f64>, j: usize, r: &crate::quad::Rule) -> Result<f64> {
    let n = ws.params.n;
    if j == n {
        return Ok(ws.gamma_for(y)?.0);
    }
    let mut total = 0.0;
    for pair in panels(w[j + 1], w[j], &ws.x).windows(2) {
        for (t, wt) in r.mapped(pair[0], pair[1]) {
            y[j] = t;
            total += wt * integrate_y(ws, w, y, j + 1, r)?;
        }
    }
    Ok(total)
}

fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 || n < k {
        return 0;
    }
    let mut b: i128 = 1;
    for i in 0..k {
        b = b * (n - i) as i128 / (i + 1) as i128;
    }
    b
}

/// Exact integer determinant by fraction-free elimination.
fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// det[C(x_i − y_j + ρ − 1, ρ − 1)·1_{x_i ≥ y_j}]: nonintersecting path
/// families from heights y to heights x across ρ levels.
pub fn lattice_path_count(x: &[i64], y: &[i64], rho: usize) -> i128 {
    let k = rho as i64 - 1;
    let m = x
        .iter()
        .map(|&xi| y.iter().map(|&yj| if xi >= yj { binomial(xi - yj + k, k) } else { 0 }).collect())
        .collect();
    bareiss_det(m)
}

/// Brute-force count of vertex-disjoint families: path i climbs levels
/// 0..ρ−1, running at level ℓ from a_{ℓ−1} to a_ℓ with a_{−1} = y_i and
/// a_{ρ−1} = x_i.
pub fn enumerate_path_families(x: &[i64], y: &[i64], rho: usize) -> u64 {
    fn cells(path: &[i64]) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for l in 0..path.len() - 1 {
            for t in path[l]..=path[l + 1] {
                out.push((l, t));
            }
        }
        out
    }
    fn paths(from: i64, to: i64, steps: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if steps == 0 {
            prefix.push(to);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in from..=to {
            prefix.push(a);
            paths(a, to, steps - 1, prefix, out);
            prefix.pop();
        }
    }
    fn go(all: &[Vec<Vec<i64>>], i: usize, used: &mut Vec<(usize, i64)>) -> u64 {
        if i == all.len() {
            return 1;
        }
        let mut count = 0;
        for p in &all[i] {
            let c = cells(p);
            if c.iter().any(|v| used.contains(v)) {
                continue;
            }
            let mark = used.len();
            used.extend(c);
            count += go(all, i + 1, used);
            used.truncate(mark);
        }
        count
    }
    let mut all = Vec::new();
    for (&xi, &yi) in x.iter().zip(y) {
        let mut out = Vec::new();
        if xi >= yi {
            // a_{−1} = y_i, then ρ−1 free heights, the last equal to x_i
            let mut prefix = vec![yi];
            paths(yi, xi, rho - 1, &mut prefix, &mut out);
        }
        all.push(out);
    }
    go(&all, 0, &mut Vec::new())
}

/// Richardson limit of count(tx, ty)/t^{ρ(ρ−1)} from t, 2t, 4t.
pub fn lattice_volume_limit(x: &[f64], y: &[f64], rho: usize, t: i64) -> f64 {
    let scaled = |s: i64| {
        let xi: Vec<i64> = x.iter().map(|v| (v * s as f64).round() as i64).collect();
        let yi: Vec<i64> = y.iter().map(|v| (v * s as f64).round() as i64).collect();
        lattice_path_count(&xi, &yi, rho) as f64 / (s as f64).powi((rho * (rho - 1)) as i32)
    };
    let (v1, v2, v4) = (scaled(t), scaled(2 * t), scaled(4 * t));
    (8.0 * v4 - 6.0 * v2 + v1) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, rho: usize) -> ModelParams {
        ModelParams::new(n, rho, 0.0).unwrap()
    }

    fn point(n: usize, rho: usize, mixed: Vec<Vec<f64>>) -> DoubleConePoint {
        DoubleConePoint { params: p(n, rho), x_levels: vec![], y_levels: vec![], mixed_levels: mixed }
    }

    #[test]
    fn membership_examples() {
        let (x, y) = ([2.0, 1.0], [1.5, 0.5]);
        // needs 2 ≥ 1.7 ≥ 1 ≥ 0.8 and 1.7 ≥ 1.5 ≥ 0.8 ≥ 0.5
        assert!(in_double_cone(&point(2, 2, vec![vec![1.7, 0.8]]), &x, &y).unwrap());
        assert!(!in_double_cone(&point(2, 2, vec![vec![1.7, 1.2]]), &x, &y).unwrap());
        assert!(!in_double_cone(&point(2, 2, vec![vec![1.4, 0.8]]), &x, &y).unwrap());
        assert!(in_double_cone(&point(2, 2, vec![vec![2.0, 1.0]]), &x, &y).unwrap());
        let above = [3.0, 2.5];
        assert!(!in_double_cone(&point(2, 2, vec![vec![1.2, 0.8]]), &x, &above).unwrap());
    }

    #[test]
    fn mc_examples() {
        let one = p(1, 1);
        assert_eq!(mc_volume(&one, &[0.4], &[0.1], 10, 1).unwrap().0, 1.0);
        assert_eq!(mc_volume(&one, &[0.1], &[0.4], 10, 1).unwrap().0, 0.0);
        let (v, se) = mc_volume(&p(2, 2), &[2.0, 1.0], &[1.5, 0.5], 200_000, 3).unwrap();
        assert!((v - 0.25).abs() < 3.0 * se + 1e-12, "{v} ± {se}");
        assert!(mc_volume(&one, &[0.4], &[0.1], 0, 1).is_err());
    }

    #[test]
    fn induction_small() {
        let r = induction_step_check(&p(1, 1), &[1.0, -0.5], &[0.7, -1.2], 12).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        let empty = induction_step_check(&p(1, 1), &[0.0, -1.0], &[3.0, 2.0], 12).unwrap();
        assert!(empty.integral.abs() < 1e-14 && empty.closed_form.abs() < 1e-14);
        assert!(induction_step_check(&p(4, 1), &[0.0; 5], &[0.0; 5], 12).is_err());
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(lattice_path_count(&[3], &[0], 1), 1);
        assert_eq!(lattice_path_count(&[2, 0], &[1, -1], 2), 4);
        assert_eq!(enumerate_path_families(&[2, 0], &[1, -1], 2), 4);
        assert_eq!(lattice_path_count(&[0, -1], &[3, 2], 2), 0);
        assert_eq!(bareiss_det(vec![vec![2, 1], vec![7, 4]]), 1);
    }
}
