//! Level vectors, interlacing relations and full interlacing chains.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Weakly decreasing particle positions on one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumVector {
    values: Vec<f64>,
    pub level: i32,
}

impl SpectrumVector {
    pub fn new(values: Vec<f64>, level: i32) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite entry in spectrum".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams("spectrum must be weakly decreasing".into()));
        }
        Ok(Self { values, level })
    }

    pub fn from_unsorted(mut values: Vec<f64>, level: i32) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values, level }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// `short ≺ long`: long_j ≥ short_j ≥ long_{j+1}, both decreasing.
pub fn interlaces(short: &[f64], long: &[f64], tol: f64) -> bool {
    long.len() == short.len() + 1
        && short
            .iter()
            .enumerate()
            .all(|(j, &s)| long[j] + tol >= s && s + tol >= long[j + 1])
}

/// `z ⪯ z′` for equal-length decreasing vectors: z′_j ≥ z_j ≥ z′_{j+1},
/// the last inequality z′_ρ ≥ z_ρ included.
pub fn intertwines(z: &[f64], zp: &[f64], tol: f64) -> bool {
    z.len() == zp.len()
        && z.iter().enumerate().all(|(j, &v)| {
            zp[j] + tol >= v && zp.get(j + 1).map_or(true, |&next| v + tol >= next)
        })
}

/// The levels z^(u), u ∈ [ρ−n, n], of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct InterlacingChain {
    pub params: ModelParams,
    pub levels: BTreeMap<i32, SpectrumVector>,
}

impl InterlacingChain {
    pub fn level(&self, u: i32) -> Option<&SpectrumVector> {
        self.levels.get(&u)
    }

    /// Checks sizes, the ≺ chains on both sides and the ⪯ chain through
    /// the overlap.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let p = &self.params;
        let rho = p.rho as i32;
        for u in p.levels() {
            let z = self
                .levels
                .get(&u)
                .ok_or_else(|| Error::Interlacing(format!("missing level {u}")))?;
            if z.len() != p.level_size(u) {
                return Err(Error::Dimension { expected: p.level_size(u), got: z.len() });
            }
        }
        let get = |u: i32| self.levels[&u].values();
        for u in rho..p.n as i32 {
            if !interlaces(get(u), get(u + 1), tol) {
                return Err(Error::Interlacing(format!("z^({u}) does not interlace z^({})", u + 1)));
            }
        }
        for u in (rho - p.n as i32 + 1)..=0 {
            if !interlaces(get(u), get(u - 1), tol) {
                return Err(Error::Interlacing(format!("z^({u}) does not interlace z^({})", u - 1)));
            }
        }
        for u in 0..rho {
            if !intertwines(get(u), get(u + 1), tol) {
                return Err(Error::Interlacing(format!("z^({u}) not intertwined with z^({})", u + 1)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interlacing_relations() {
        assert!(interlaces(&[1.5], &[2.0, 1.0], 0.0));
        assert!(interlaces(&[2.0], &[2.0, 1.0], 0.0));
        assert!(!interlaces(&[2.5], &[2.0, 1.0], 0.0));
        assert!(interlaces(&[], &[0.3], 0.0));
        // ⪯ needs the top entries ordered too
        assert!(intertwines(&[1.7, 0.8], &[2.0, 1.0], 0.0));
        assert!(!intertwines(&[1.7, 1.2], &[2.0, 1.0], 0.0));
        assert!(!intertwines(&[2.1, 0.8], &[2.0, 1.0], 0.0));
    }

    #[test]
    fn spectrum_vector_rejects_increasing() {
        assert!(SpectrumVector::new(vec![0.0, 1.0], 2).is_err());
        let s = SpectrumVector::from_unsorted(vec![0.0, 1.0, -1.0], 3);
        assert_eq!(s.values(), &[1.0, 0.0, -1.0]);
        assert_eq!((s.max(), s.min()), (1.0, -1.0));
    }
}
