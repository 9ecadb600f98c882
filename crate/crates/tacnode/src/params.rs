use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The triple (n, ρ, β) shared by every formula, with δ = n − ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub rho: usize,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(n: usize, rho: usize, beta: f64) -> Result<Self> {
        if rho < 1 || rho > n {
            return Err(Error::InvalidParams(format!("need 1 <= rho <= n, got n={n}, rho={rho}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("need finite beta >= 0, got {beta}")));
        }
        Ok(Self { n, rho, beta })
    }

    pub fn delta(&self) -> usize {
        self.n - self.rho
    }

    /// Number of particles on level u of the chain.
    pub fn level_size(&self, u: i32) -> usize {
        level_size(self.rho, u)
    }

    /// Levels ρ−n..=n in increasing order.
    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        (self.rho as i32 - self.n as i32)..=(self.n as i32)
    }
}

/// |z^(u)| = u above the overlap and max(ρ−u, ρ) below it.
pub fn level_size(rho: usize, u: i32) -> usize {
    let r = rho as i32;
    if u >= r {
        u as usize
    } else {
        (r - u).max(r) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_triples() {
        assert!(ModelParams::new(2, 3, 0.0).is_err());
        assert!(ModelParams::new(2, 0, 0.0).is_err());
        assert!(ModelParams::new(2, 1, -0.1).is_err());
        assert!(ModelParams::new(2, 1, f64::NAN).is_err());
        assert_eq!(ModelParams::new(5, 2, 0.3).unwrap().delta(), 3);
    }

    #[test]
    fn level_sizes_follow_the_chain() {
        let p = ModelParams::new(3, 2, 0.0).unwrap();
        let sizes: Vec<usize> = p.levels().map(|u| p.level_size(u)).collect();
        // u = -1, 0, 1, 2, 3
        assert_eq!(sizes, vec![3, 2, 2, 2, 3]);
    }
}
