//! Double Aztec diamonds: region, tilings, flip dynamics and dot particles.
//!
//! Cells are unit squares indexed by (ξ, η) with ξ+η odd; two cells are
//! adjacent when they differ by (±1, ±1). A square is black when ξ is even.
//! Under x = (ξ−η)/2, y = (ξ+η)/2 the picture becomes the usual square grid,
//! and a domino is vertical when its cells differ by ±(1, 1).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::LevelPoint;
use crate::params::ModelParams;
use crate::rng::run_chunks;
use crate::spectrum::{InterlacingChain, SpectrumVector};

pub const ENUMERATION_GUARD: usize = 60;

const DIRS: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, -1), (-1, 1)];

#[derive(Debug, Clone)]
pub struct DiamondRegion {
    /// diamond size and overlap; both 0 for free-form regions
    pub n: usize,
    pub rho: usize,
    cells: Vec<(i32, i32)>,
    index: HashMap<(i32, i32), usize>,
    neighbors: Vec<[Option<usize>; 4]>,
}

impl DiamondRegion {
    /// Any set of cells with ξ+η odd.
    pub fn from_cells(mut cells: Vec<(i32, i32)>) -> Result<Self> {
        cells.sort();
        cells.dedup();
        if cells.iter().any(|&(x, e)| (x + e).rem_euclid(2) != 1) {
            return Err(Error::InvalidParams("cells need ξ+η odd".into()));
        }
        let index: HashMap<_, _> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let neighbors = cells
            .iter()
            .map(|&(x, e)| DIRS.map(|(dx, de)| index.get(&(x + dx, e + de)).copied()))
            .collect();
        Ok(Self { n: 0, rho: 0, cells, index, neighbors })
    }

    /// A size-n diamond with its corner at (ξ0, η0).
    fn diamond_cells(n: usize, xi0: i32, eta0: i32) -> impl Iterator<Item = (i32, i32)> {
        let m = 2 * n as i32;
        (0..=m).flat_map(move |a| (0..=m).map(move |b| (xi0 + a, eta0 + b))).filter(|&(x, e)| (x + e).rem_euclid(2) == 1)
    }

    pub fn single_diamond(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams("diamond size must be at least 1".into()));
        }
        Self::from_cells(Self::diamond_cells(n, 0, 0).collect())
    }

    pub fn cells(&self) -> &[(i32, i32)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, cell: (i32, i32)) -> Option<usize> {
        self.index.get(&cell).copied()
    }

    pub fn is_black(&self, i: usize) -> bool {
        self.cells[i].0.rem_euclid(2) == 0
    }

    pub fn black_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_black(i)).count()
    }

    /// Number of lines ξ = 2s, s = 0..=2n−ρ.
    pub fn black_line_count(&self) -> usize {
        2 * self.n + 1 - self.rho
    }

    /// Black squares on line ξ = 2s, by increasing η.
    pub fn line_cells(&self, s: usize) -> Vec<usize> {
        let xi = 2 * s as i32;
        let lo = self.cells.partition_point(|&(x, _)| x < xi);
        let hi = self.cells.partition_point(|&(x, _)| x <= xi);
        (lo..hi).collect()
    }
}

/// A = [0, 2n]², B = [2n−2ρ+1, 4n−2ρ+1] × [−1, 2n−1]. The overlap holds the
/// black lines ξ = 2(n−ρ+1)..2n, and B's lines carry one more square.
pub fn build_region(n: usize, rho: usize) -> Result<DiamondRegion> {
    if rho < 1 || rho > n {
        return Err(Error::InvalidParams(format!("overlap ρ={rho} must lie in [1, {n}]")));
    }
    let b0 = 2 * (n - rho) as i32 + 1;
    let cells = DiamondRegion::diamond_cells(n, 0, 0).chain(DiamondRegion::diamond_cells(n, b0, -1)).collect();
    let mut r = DiamondRegion::from_cells(cells)?;
    r.n = n;
    r.rho = rho;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DominoClass {
    North,
    South,
    East,
    West,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Domino {
    pub black: (i32, i32),
    pub white: (i32, i32),
    pub orientation: Orientation,
    pub class: DominoClass,
}

/// Class from the white partner's offset relative to the black square.
fn classify(black: (i32, i32), white: (i32, i32)) -> (Orientation, DominoClass) {
    match (white.0 - black.0, white.1 - black.1) {
        (1, 1) => (Orientation::Vertical, DominoClass::East),
        (1, -1) => (Orientation::Horizontal, DominoClass::South),
        (-1, -1) => (Orientation::Vertical, DominoClass::West),
        _ => (Orientation::Horizontal, DominoClass::North),
    }
}

fn is_vertical(a: (i32, i32), b: (i32, i32)) -> bool {
    a.0 - b.0 == a.1 - b.1
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TilingState {
    /// partner[i] is the cell sharing a domino with cell i
    pub partner: Vec<u32>,
    pub weight_exponent: u32,
}

impl TilingState {
    fn from_partner(region: &DiamondRegion, partner: Vec<u32>) -> Self {
        let weight_exponent = (0..partner.len())
            .filter(|&i| region.is_black(i) && is_vertical(region.cells[i], region.cells[partner[i] as usize]))
            .count() as u32;
        Self { partner, weight_exponent }
    }

    pub fn dominoes(&self, region: &DiamondRegion) -> Vec<Domino> {
        (0..self.partner.len())
            .filter(|&i| region.is_black(i))
            .map(|i| {
                let (black, white) = (region.cells[i], region.cells[self.partner[i] as usize]);
                let (orientation, class) = classify(black, white);
                Domino { black, white, orientation, class }
            })
            .collect()
    }

    pub fn is_perfect_cover(&self, region: &DiamondRegion) -> bool {
        self.partner.len() == region.len()
            && (0..region.len()).all(|i| {
                let j = self.partner[i] as usize;
                j < region.len() && j != i && self.partner[j] as usize == i && region.neighbors[i].contains(&Some(j))
            })
    }

    pub fn weight(&self, a: f64) -> f64 {
        a.powi(self.weight_exponent as i32)
    }
}

/// Every tiling with its weight a^{#vertical}.
pub fn enumerate_tilings(region: &DiamondRegion, a: f64) -> Result<Vec<(TilingState, f64)>> {
    if region.len() > ENUMERATION_GUARD {
        return Err(Error::EnumerationGuard { cells: region.len(), limit: ENUMERATION_GUARD });
    }
    let mut partner = vec![u32::MAX; region.len()];
    let mut out = Vec::new();
    fn rec(region: &DiamondRegion, idx: usize, partner: &mut [u32], out: &mut Vec<Vec<u32>>) {
        let Some(i) = (idx..partner.len()).find(|&i| partner[i] == u32::MAX) else {
            out.push(partner.to_vec());
            return;
        };
        for j in region.neighbors[i].iter().flatten().copied() {
            if partner[j] == u32::MAX {
                partner[i] = j as u32;
                partner[j] = i as u32;
                rec(region, i + 1, partner, out);
                partner[i] = u32::MAX;
                partner[j] = u32::MAX;
            }
        }
    }
    let mut raw = Vec::new();
    rec(region, 0, &mut partner, &mut raw);
    for p in raw {
        let t = TilingState::from_partner(region, p);
        let w = t.weight(a);
        out.push((t, w));
    }
    Ok(out)
}

/// Perfect-matching count as the permanent of the black×white adjacency
/// matrix (Ryser with Gray-code updates). Independent of the enumerator.
pub fn matching_count_permanent(region: &DiamondRegion) -> Result<u128> {
    let blacks: Vec<usize> = (0..region.len()).filter(|&i| region.is_black(i)).collect();
    let whites: Vec<usize> = (0..region.len()).filter(|&i| !region.is_black(i)).collect();
    if blacks.len() != whites.len() {
        return Ok(0);
    }
    let m = blacks.len();
    if m > 26 {
        return Err(Error::CostGuard(format!("permanent of a {m}×{m} matrix")));
    }
    if m == 0 {
        return Ok(1);
    }
    let col: HashMap<usize, usize> = whites.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    let adj: Vec<Vec<i64>> = blacks
        .iter()
        .map(|&b| {
            let mut row = vec![0i64; m];
            for j in region.neighbors[b].iter().flatten() {
                row[col[j]] = 1;
            }
            row
        })
        .collect();
    // Σ_S (−1)^{m−|S|} ∏_i Σ_{j∈S} a_ij
    let mut sums = vec![0i64; m];
    let mut total: i128 = 0;
    for k in 1u64..(1 << m) {
        let bit = k.trailing_zeros() as usize;
        let g = k ^ (k >> 1);
        let add = g & (1 << bit) != 0;
        for (i, s) in sums.iter_mut().enumerate() {
            if add {
                *s += adj[i][bit];
            } else {
                *s -= adj[i][bit];
            }
        }
        let prod: i128 = sums.iter().map(|&s| s as i128).product();
        let sign = if (m - g.count_ones() as usize) % 2 == 0 { 1 } else { -1 };
        total += sign * prod;
    }
    Ok(total as u128)
}

/// Deterministic starting tiling from augmenting paths.
pub fn initial_tiling(region: &DiamondRegion) -> Result<TilingState> {
    let nb = region.len();
    let mut matched = vec![usize::MAX; nb];
    fn augment(region: &DiamondRegion, b: usize, seen: &mut [bool], matched: &mut [usize]) -> bool {
        for w in region.neighbors[b].iter().flatten().copied() {
            if !seen[w] {
                seen[w] = true;
                if matched[w] == usize::MAX || augment(region, matched[w], seen, matched) {
                    matched[w] = b;
                    matched[b] = w;
                    return true;
                }
            }
        }
        false
    }
    if region.black_count() * 2 != nb {
        return Err(Error::NotTileable);
    }
    for b in (0..nb).filter(|&i| region.is_black(i)) {
        let mut seen = vec![false; nb];
        if !augment(region, b, &mut seen, &mut matched) {
            return Err(Error::NotTileable);
        }
    }
    Ok(TilingState::from_partner(region, matched.into_iter().map(|j| j as u32).collect()))
}

/// One Metropolis flip attempt on the 2×2 block whose lowest cell is drawn
/// uniformly. Returns true if the tiling changed.
fn flip_step<R: Rng + ?Sized>(region: &DiamondRegion, t: &mut TilingState, a: f64, rng: &mut R) -> bool {
    let c = rng.random_range(0..region.len());
    let (xi, eta) = region.cells[c];
    let (Some(p), Some(q), Some(r)) =
        (region.index_of((xi + 1, eta - 1)), region.index_of((xi + 1, eta + 1)), region.index_of((xi + 2, eta)))
    else {
        return false;
    };
    let pt = &mut t.partner;
    let horizontal = pt[c] as usize == p && pt[q] as usize == r;
    let vertical = pt[c] as usize == q && pt[p] as usize == r;
    if !horizontal && !vertical {
        return false;
    }
    let ratio = if horizontal { a * a } else { 1.0 / (a * a) };
    if ratio < 1.0 && rng.random::<f64>() >= ratio {
        return false;
    }
    let (c, p, q, r) = (c as u32, p as u32, q as u32, r as u32);
    if horizontal {
        (pt[c as usize], pt[q as usize], pt[p as usize], pt[r as usize]) = (q, c, r, p);
        t.weight_exponent += 2;
    } else {
        (pt[c as usize], pt[p as usize], pt[q as usize], pt[r as usize]) = (p, c, r, q);
        t.weight_exponent -= 2;
    }
    true
}

/// Flip dynamics for `steps` attempts from the deterministic start.
pub fn sample_tiling_mcmc<R: Rng + ?Sized>(region: &DiamondRegion, a: f64, steps: u64, rng: &mut R) -> Result<TilingState> {
    if a <= 0.0 {
        return Err(Error::InvalidParams("weight a must be positive".into()));
    }
    let mut t = initial_tiling(region)?;
    for _ in 0..steps {
        flip_step(region, &mut t, a, rng);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainSchedule {
    pub chains: u64,
    pub burn_in: u64,
    pub samples: u64,
    pub thin: u64,
}

/// Runs independent chains and calls `observe` on every thinned state;
/// per-chain results come back in chain order.
pub fn run_chains<T, F>(region: &DiamondRegion, a: f64, sched: ChainSchedule, seed: u64, observe: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&TilingState, &mut T) + Sync,
    T: Default,
{
    if a <= 0.0 {
        return Err(Error::InvalidParams("weight a must be positive".into()));
    }
    let start = initial_tiling(region)?;
    Ok(run_chunks(sched.chains, 1, seed, |rng, _| {
        let mut t = start.clone();
        let mut acc = T::default();
        for _ in 0..sched.burn_in {
            flip_step(region, &mut t, a, rng);
        }
        for _ in 0..sched.samples {
            for _ in 0..sched.thin {
                flip_step(region, &mut t, a, rng);
            }
            observe(&t, &mut acc);
        }
        acc
    }))
}

/// Visit counts per tiling over all chains.
pub fn mcmc_tiling_counts(region: &DiamondRegion, a: f64, sched: ChainSchedule, seed: u64) -> Result<HashMap<Vec<u32>, u64>> {
    let parts = run_chains(region, a, sched, seed, |t, acc: &mut HashMap<Vec<u32>, u64>| {
        *acc.entry(t.partner.clone()).or_default() += 1;
    })?;
    let mut total = HashMap::new();
    for p in parts {
        for (k, v) in p {
            *total.entry(k).or_default() += v;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DotRule {
    /// dot iff the black square's partner sits at ξ+1 (East or South)
    PartnerRight,
    /// dot iff the partner sits at ξ−1 (West or North)
    PartnerLeft,
}

impl DotRule {
    fn has_dot(self, black: (i32, i32), white: (i32, i32)) -> bool {
        match self {
            DotRule::PartnerRight => white.0 == black.0 + 1,
            DotRule::PartnerLeft => white.0 == black.0 - 1,
        }
    }
}

/// Picks the candidate rule under which line 0 carries n dots in every
/// tiling of the (n, ρ) instance.
pub fn calibrate_dot_rule(n: usize, rho: usize) -> Result<DotRule> {
    let region = build_region(n, rho)?;
    let tilings = enumerate_tilings(&region, 1.0)?;
    let line0 = region.line_cells(0);
    let fits = |rule: DotRule| {
        tilings.iter().all(|(t, _)| {
            line0.iter().filter(|&&i| rule.has_dot(region.cells[i], region.cells[t.partner[i] as usize])).count() == n
        })
    };
    match (fits(DotRule::PartnerRight), fits(DotRule::PartnerLeft)) {
        (true, false) => Ok(DotRule::PartnerRight),
        (false, true) => Ok(DotRule::PartnerLeft),
        _ => Err(Error::Calibration),
    }
}

fn calibrated_rule() -> Result<DotRule> {
    static RULE: OnceLock<Option<DotRule>> = OnceLock::new();
    RULE.get_or_init(|| calibrate_dot_rule(2, 1).ok()).ok_or(Error::Calibration)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DotColor {
    Blue,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dot {
    pub eta: i32,
    pub color: DotColor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DotConfiguration {
    pub n: usize,
    pub rho: usize,
    /// lines[s]: dots on ξ = 2s by increasing η
    pub lines: Vec<Vec<Dot>>,
}

/// (red, blue) dot counts on line s.
pub fn table_counts(n: usize, rho: usize, s: usize) -> (usize, usize) {
    let blue = n.saturating_sub(s);
    let red = (rho + s).saturating_sub(n);
    (red, blue)
}

pub fn extract_dots(region: &DiamondRegion, t: &TilingState) -> Result<DotConfiguration> {
    let rule = calibrated_rule()?;
    let (n, rho) = (region.n, region.rho);
    if n == 0 {
        return Err(Error::InvalidParams("dots need a double diamond".into()));
    }
    let mut lines = Vec::with_capacity(region.black_line_count());
    for s in 0..region.black_line_count() {
        let etas: Vec<i32> = region
            .line_cells(s)
            .into_iter()
            .filter(|&i| rule.has_dot(region.cells[i], region.cells[t.partner[i] as usize]))
            .map(|i| region.cells[i].1)
            .collect();
        let (red, blue) = table_counts(n, rho, s);
        if etas.len() != red + blue {
            return Err(Error::Calibration);
        }
        lines.push(
            etas.into_iter()
                .enumerate()
                .map(|(k, eta)| Dot { eta, color: if k < red { DotColor::Red } else { DotColor::Blue } })
                .collect(),
        );
    }
    Ok(DotConfiguration { n, rho, lines })
}

impl DotConfiguration {
    /// Level u = n − s holds the η positions of line s.
    pub fn to_chain(&self) -> Result<InterlacingChain> {
        let params = ModelParams::new(self.n, self.rho, 0.0)?;
        let levels = self
            .lines
            .iter()
            .enumerate()
            .map(|(s, dots)| {
                let u = self.n as i32 - s as i32;
                (u, SpectrumVector::from_unsorted(dots.iter().map(|d| d.eta as f64).collect(), u))
            })
            .collect();
        Ok(InterlacingChain { params, levels })
    }

    fn key(&self, lines: std::ops::Range<usize>) -> Vec<i32> {
        let mut k = Vec::new();
        for s in lines {
            k.extend(self.lines[s].iter().map(|d| d.eta));
            k.push(i32::MIN);
        }
        k
    }
}

/// Number of strict inequalities among the interlacing relations of a chain.
pub fn strict_inequalities(chain: &InterlacingChain) -> usize {
    let rho = chain.params.rho as i32;
    let n = chain.params.n as i32;
    let get = |u: i32| chain.levels[&u].values();
    let mut count = 0;
    let mut pair = |short: &[f64], long: &[f64]| {
        for (j, &s) in short.iter().enumerate() {
            count += usize::from(long[j] > s);
            if let Some(&next) = long.get(j + 1) {
                count += usize::from(s > next);
            }
        }
    };
    for u in rho..n {
        pair(get(u), get(u + 1));
    }
    for u in (rho - n + 1)..=0 {
        pair(get(u), get(u - 1));
    }
    for u in 0..rho {
        pair(get(u), get(u + 1));
    }
    count
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityGroup {
    pub configurations: usize,
    pub min_multiplicity: u64,
    pub max_multiplicity: u64,
    /// multiplicity / 2^{strict} is the same for every configuration
    pub power_law_constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub n: usize,
    pub rho: usize,
    pub tilings: usize,
    pub groups: Vec<UniformityGroup>,
    /// every group has equal multiplicities
    pub uniform: bool,
    /// multiplicity = K·2^{strict} with one K for the whole region (K is a
    /// power of two, often below 1)
    pub power_law: bool,
    pub power_law_constant: Option<f64>,
}

/// Groups all a = 1 tilings by the dots on the two outer lines and checks
/// whether every interior dot configuration has the same tiling count.
pub fn verify_uniformity(region: &DiamondRegion) -> Result<UniformityReport> {
    let tilings = enumerate_tilings(region, 1.0)?;
    let last = region.black_line_count() - 1;
    let mut groups: BTreeMap<Vec<i32>, BTreeMap<Vec<i32>, (u64, usize)>> = BTreeMap::new();
    for (t, _) in &tilings {
        let cfg = extract_dots(region, t)?;
        let mut boundary = cfg.key(0..1);
        boundary.extend(cfg.key(last..last + 1));
        let strict = strict_inequalities(&cfg.to_chain()?);
        let e = groups.entry(boundary).or_default().entry(cfg.key(1..last)).or_insert((0, strict));
        e.0 += 1;
    }
    let mut out = Vec::new();
    let mut global: Option<Option<f64>> = None;
    for configs in groups.values() {
        let mults: Vec<u64> = configs.values().map(|v| v.0).collect();
        // exact in f64: small integers over powers of two
        let ks: Vec<Option<f64>> = configs.values().map(|&(m, s)| Some(m as f64 / (s as f64).exp2())).collect();
        let k = if ks.iter().all(|k| k.is_some() && *k == ks[0]) { ks[0] } else { None };
        global = Some(match global {
            None => k,
            Some(g) if g == k => g,
            _ => None,
        });
        out.push(UniformityGroup {
            configurations: configs.len(),
            min_multiplicity: *mults.iter().min().unwrap_or(&0),
            max_multiplicity: *mults.iter().max().unwrap_or(&0),
            power_law_constant: k,
        });
    }
    let power_law_constant = global.flatten();
    Ok(UniformityReport {
        n: region.n,
        rho: region.rho,
        tilings: tilings.len(),
        uniform: out.iter().all(|g| g.min_multiplicity == g.max_multiplicity),
        power_law: power_law_constant.is_some(),
        power_law_constant,
        groups: out,
    })
}

/// a = 1 − β/√(n/2).
pub fn scaling_weight(n: usize, beta: f64) -> f64 {
    1.0 - beta / (n as f64 / 2.0).sqrt()
}

/// (u, y) ↦ (ξ, η) = (4t+2ε−2u, 2t + 2⌊y√t⌋ − 1) with n = 2t+ε.
pub fn scale_point(n: usize, u: i32, y: f64) -> (i32, i32) {
    let t = (n / 2) as i32;
    let st = (t as f64).sqrt();
    (2 * n as i32 - 2 * u, 2 * t + 2 * (y * st).floor() as i32 - 1)
}

/// Inverse of [`scale_point`] on the lattice.
pub fn unscale_point(n: usize, xi: i32, eta: i32) -> LevelPoint {
    let t = (n / 2) as f64;
    LevelPoint::new(n as i32 - xi / 2, (eta as f64 + 1.0 - 2.0 * t) / (2.0 * t.sqrt()))
}

pub fn rescale_particles(config: &DotConfiguration) -> Vec<(LevelPoint, DotColor)> {
    config
        .lines
        .iter()
        .enumerate()
        .flat_map(|(s, dots)| dots.iter().map(move |d| (unscale_point(config.n, 2 * s as i32, d.eta), d.color)))
        .collect()
}

fn class_color(c: DominoClass) -> &'static str {
    match c {
        DominoClass::North => "#d95f02",
        DominoClass::South => "#1b9e77",
        DominoClass::East => "#7570b3",
        DominoClass::West => "#e6ab02",
    }
}

/// Standalone SVG 1.1, dominoes ordered by black square, then dots.
pub fn tiling_svg(region: &DiamondRegion, t: &TilingState) -> Result<String> {
    const S: f64 = 20.0;
    let to_xy = |(xi, eta): (i32, i32)| ((xi - eta) as f64 / 2.0, (xi + eta) as f64 / 2.0);
    let pts: Vec<(f64, f64)> = region.cells.iter().map(|&c| to_xy(c)).collect();
    let (xmin, xmax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ymin, ymax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (w, h) = ((xmax - xmin + 1.0) * S, (ymax - ymin + 1.0) * S);
    // flip y so larger y is drawn higher
    let px = |x: f64| (x - xmin + 0.5) * S;
    let py = |y: f64| (ymax - y + 0.5) * S;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for d in t.dominoes(region) {
        let (a, b) = (to_xy(d.black), to_xy(d.white));
        let (x0, x1) = (a.0.min(b.0) - 0.5, a.0.max(b.0) + 0.5);
        let (y0, y1) = (a.1.min(b.1) - 0.5, a.1.max(b.1) + 0.5);
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="black" stroke-width="1"/>"#,
            px(x0),
            py(y1),
            (x1 - x0) * S,
            (y1 - y0) * S,
            class_color(d.class)
        );
    }
    if region.n > 0 {
        let cfg = extract_dots(region, t)?;
        for (s, dots) in cfg.lines.iter().enumerate() {
            for d in dots {
                let (x, y) = to_xy((2 * s as i32, d.eta));
                let fill = if d.color == DotColor::Blue { "blue" } else { "red" };
                let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#, px(x), py(y), 0.25 * S);
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn region_shape() {
        let r = build_region(7, 3).unwrap();
        assert_eq!(r.black_line_count(), 12);
        assert_eq!(r.black_count() * 2, r.len());
        let r = build_region(1, 1).unwrap();
        assert_eq!(r.len() % 2, 0);
        assert!(build_region(2, 0).is_err());
        assert!(build_region(2, 3).is_err());
        let r = build_region(3, 3).unwrap();
        assert_eq!(r.black_count() * 2, r.len());
    }

    #[test]
    fn toy_counts() {
        let domino = DiamondRegion::from_cells(vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(enumerate_tilings(&domino, 1.0).unwrap().len(), 1);
        let d2 = DiamondRegion::single_diamond(2).unwrap();
        assert_eq!(enumerate_tilings(&d2, 1.0).unwrap().len(), 8);
        let d3 = DiamondRegion::single_diamond(3).unwrap();
        assert_eq!(enumerate_tilings(&d3, 1.0).unwrap().len(), 64);
    }

    #[test]
    fn double_diamond_counts_match_permanent() {
        let want = [((1, 1), 3), ((2, 1), 44), ((2, 2), 13), ((3, 3), 63)];
        for ((n, rho), count) in want {
            let r = build_region(n, rho).unwrap();
            let e = enumerate_tilings(&r, 1.0).unwrap();
            assert_eq!(e.len(), count, "n={n} rho={rho}");
            assert_eq!(matching_count_permanent(&r).unwrap(), count as u128);
            assert!(e.iter().all(|(t, _)| t.is_perfect_cover(&r)));
        }
    }

    #[test]
    fn guard_rejects_large_regions() {
        let r = build_region(4, 1).unwrap();
        assert!(matches!(enumerate_tilings(&r, 1.0), Err(Error::EnumerationGuard { .. })));
    }

    #[test]
    fn calibration_picks_partner_right() {
        assert_eq!(calibrate_dot_rule(2, 1).unwrap(), DotRule::PartnerRight);
    }

    #[test]
    fn dots_follow_table_and_interlace() {
        for (n, rho) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)] {
            let r = build_region(n, rho).unwrap();
            for (t, _) in enumerate_tilings(&r, 1.0).unwrap() {
                let cfg = extract_dots(&r, &t).unwrap();
                assert_eq!(cfg.lines[0].len(), n);
                for s in n - rho..=n {
                    assert_eq!(cfg.lines[s].len(), rho);
                }
                cfg.to_chain().unwrap().validate(0.0).unwrap();
            }
        }
    }

    #[test]
    fn uniformity_fails_but_power_law_holds() {
        for (n, rho) in [(2, 1), (2, 2)] {
            let rep = verify_uniformity(&build_region(n, rho).unwrap()).unwrap();
            assert!(!rep.uniform, "{rep:?}");
            assert!(rep.power_law, "{rep:?}");
            assert_eq!(rep.power_law_constant, Some(if rho == 1 { 0.5 } else { 0.25 }));
        }
    }

    #[test]
    fn zero_steps_returns_start() {
        let r = build_region(2, 1).unwrap();
        let t = sample_tiling_mcmc(&r, 1.0, 0, &mut substream(1, 0)).unwrap();
        assert_eq!(t, initial_tiling(&r).unwrap());
        assert!(t.is_perfect_cover(&r));
    }

    #[test]
    fn flips_keep_a_perfect_cover() {
        let r = build_region(3, 2).unwrap();
        let mut rng = substream(2, 0);
        let mut t = initial_tiling(&r).unwrap();
        for _ in 0..20_000 {
            flip_step(&r, &mut t, 2.0, &mut rng);
        }
        assert!(t.is_perfect_cover(&r));
        assert_eq!(t, TilingState::from_partner(&r, t.partner.clone()));
    }

    // 2×3 block: three tilings, exponents 0, 2 and 3 verticals
    #[test]
    fn detailed_balance_on_toy_region() {
        let cells: Vec<(i32, i32)> = (0..3).flat_map(|x| (0..2).map(move |y| (x + y, y - x + 1))).collect();
        let r = DiamondRegion::from_cells(cells).unwrap();
        let all = enumerate_tilings(&r, 2.0).unwrap();
        assert_eq!(all.len(), 3);
        let z: f64 = all.iter().map(|(_, w)| w).sum();
        let sched = ChainSchedule { chains: 8, burn_in: 100, samples: 20_000, thin: 5 };
        let counts = mcmc_tiling_counts(&r, 2.0, sched, 3).unwrap();
        let total: u64 = counts.values().sum();
        for (t, w) in &all {
            let f = *counts.get(&t.partner).unwrap_or(&0) as f64 / total as f64;
            assert!((f - w / z).abs() < 0.02, "{f} vs {}", w / z);
        }
    }

    #[test]
    fn scaling_map_round_trip() {
        let n = 24;
        assert_eq!(unscale_point(n, 2 * n as i32, 23).u, 0);
        assert_eq!(unscale_point(n, 2 * n as i32, 23).z, 0.0);
        for &(u, y) in &[(0, 0.3), (2, -1.2), (-1, 2.5)] {
            let (xi, eta) = scale_point(n, u, y);
            let p = unscale_point(n, xi, eta);
            assert_eq!(p.u, u);
            assert!((p.z - y).abs() <= 1.0 / (12f64).sqrt());
        }
    }

    #[test]
    fn svg_is_deterministic() {
        let r = build_region(2, 1).unwrap();
        let t = initial_tiling(&r).unwrap();
        let a = tiling_svg(&r, &t).unwrap();
        assert_eq!(a, tiling_svg(&r, &t).unwrap());
        assert_eq!(a.matches("<rect").count(), r.len() / 2);
        assert_eq!(a.matches("<circle").count(), 2 + 1 + 1 + 2);
    }
}
