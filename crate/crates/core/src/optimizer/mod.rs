//! Estimation of the Ptolemy constant `P(J) = sup p` over strictly ordered
//! quadruples on a curve.
//!
//! The search runs in three stages:
//!
//! 1. [`grid_search`] evaluates every quadruple of a uniform grid.
//! 2. The best distinct grid tuples, plus as many pseudo-random tuples, are
//!    refined by [`refine_local`]: Nelder–Mead on `(t1, g1, g2, g3)` with the
//!    gaps clamped to `[gap_floor, 1 − gap_floor]`.
//! 3. Refinements that end with gaps pinned at the floor while the ratio is
//!    still growing are reported as [`Status::DegenerateLimit`], with the
//!    value extrapolated to zero gap.

mod grid;
mod limit;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{cyclic_distance, is_strict_cyclic_order, wrap_unit, Curve};
use crate::nelder_mead::{self, Settings};
use crate::ratio::{ratio_at, QuadParams, RatioError};

pub use grid::GridResult;
pub use limit::ExtrapolationDetail;

/// Edge length of the simplex used for the second pass of every refinement.
const RESTART_SCALE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("seed {0:?} is not in strict counterclockwise cyclic order")]
    InvalidSeed([f64; 4]),
    #[error("ratio undefined at the seed: {0}")]
    UndefinedAtSeed(RatioError),
    #[error("all {0} refinements failed")]
    AllRefinementsFailed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Grid resolution per curve; `C(n, 4)` quadruples are evaluated.
    pub grid_points: usize,
    /// Number of grid seeds refined, and again of random seeds.
    pub starts: usize,
    /// Iteration cap per Nelder–Mead pass. Zero skips refinement entirely.
    pub max_iterations: usize,
    pub value_tolerance: f64,
    /// Smallest admissible cyclic gap, in t-units.
    pub gap_floor: f64,
    pub rng_seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            grid_points: 48,
            starts: 16,
            max_iterations: 2000,
            value_tolerance: 1e-12,
            gap_floor: 1e-9,
            rng_seed: 0,
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |msg: String| Err(OptimizeError::InvalidOptions(msg));
        if self.grid_points < 8 {
            return bad(format!("grid_points must be at least 8, got {}", self.grid_points));
        }
        if self.grid_points > u32::MAX as usize {
            return bad(format!("grid_points too large: {}", self.grid_points));
        }
        if self.starts < 1 {
            return bad("starts must be at least 1".into());
        }
        if !(self.value_tolerance >= 0.0 && self.value_tolerance.is_finite()) {
            return bad(format!("value_tolerance must be finite and non-negative, got {}", self.value_tolerance));
        }
        // the probe ray reaches gap_floor·2^10 per cluster gap
        if !(self.gap_floor > 0.0 && self.gap_floor * 2f64.powi(limit::RAY_STEPS) < 0.05) {
            return bad(format!("gap_floor must be positive and below ~5e-5, got {}", self.gap_floor));
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings { max_iterations: self.max_iterations, value_tolerance: self.value_tolerance }
    }

    /// Gaps at or below this count as collapsed.
    fn collapse_threshold(&self) -> f64 {
        self.gap_floor * 2f64.powi(limit::RAY_STEPS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// A non-degenerate quadruple attains the value.
    InteriorMaximum,
    /// The value is approached only as some gaps shrink to zero.
    DegenerateLimit,
    /// No refinement ran; the value is the grid maximum.
    GridOnly,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub argmax: QuadParams,
    pub status: Status,
    pub grid_best: f64,
    pub refinements_run: usize,
    pub extrapolation_detail: Option<ExtrapolationDetail>,
}

/// Brute-force maximum over all quadruples of the grid `{k/n}`.
pub fn grid_search(curve: &Curve, n: usize) -> Result<GridResult, OptimizeError> {
    if n < 8 {
        return Err(OptimizeError::InvalidOptions(format!("grid needs at least 8 points, got {n}")));
    }
    Ok(grid::enumerate(curve, n).0)
}

/// `(t1, g1, g2, g3)` from four ordered parameters.
fn reduce(t: &[f64; 4]) -> [f64; 4] {
    [t[0], wrap_unit(t[1] - t[0]), wrap_unit(t[2] - t[1]), wrap_unit(t[3] - t[2])]
}

/// Unwrapped parameters `t1 ≤ t2 ≤ t3 ≤ t4 < t1 + 1`.
fn expand(x: &[f64]) -> [f64; 4] {
    let t2 = x[0] + x[1];
    let t3 = t2 + x[2];
    [x[0], t2, t3, t3 + x[3]]
}

fn all_gaps(x: &[f64]) -> [f64; 4] {
    [x[1], x[2], x[3], 1.0 - x[1] - x[2] - x[3]]
}

/// Clamps the three explicit gaps to `≥ floor` and their sum to `≤ 1 − floor`.
fn clamp_gaps(x: &mut [f64], floor: f64) {
    for g in &mut x[1..4] {
        *g = g.max(floor);
    }
    let budget = 1.0 - 4.0 * floor;
    let excess: f64 = x[1..4].iter().map(|g| g - floor).sum();
    if excess > budget {
        let shrink = budget / excess;
        for g in &mut x[1..4] {
            *g = floor + (*g - floor) * shrink;
        }
    }
}

fn canonical_params(t: &[f64; 4]) -> Option<QuadParams> {
    QuadParams::from_array(*t).ok().map(|q| q.canonical())
}

/// Maximizes the ratio from `seed` by clamped Nelder–Mead, then checks
/// whether the maximum is only reached as gaps collapse.
pub fn refine_local(curve: &Curve, seed: [f64; 4], opts: &OptimizeOptions) -> Result<EstimateResult, OptimizeError> {
    opts.validate()?;
    if !is_strict_cyclic_order(seed[0], seed[1], seed[2], seed[3]) {
        return Err(OptimizeError::InvalidSeed(seed));
    }
    let start = reduce(&seed);
    let seed_value = ratio_at(curve, &expand(&start)).map_err(OptimizeError::UndefinedAtSeed)?;
    let floor = opts.gap_floor;
    let objective = |x: &[f64]| ratio_at(curve, &expand(x)).ok();
    let project = |x: &mut [f64]| clamp_gaps(x, floor);
    let settings = opts.settings();

    let first = nelder_mead::maximize(objective, project, &start, 1.0 / opts.grid_points as f64, settings);
    let second = nelder_mead::maximize(objective, project, &first.x, RESTART_SCALE, settings);
    let (best_x, best_value) = if second.value >= seed_value {
        (second.x, second.value)
    } else {
        (start.to_vec(), seed_value)
    };
    let params = expand(&best_x);
    let gaps = all_gaps(&best_x);

    let mut result = EstimateResult {
        value: best_value,
        argmax: canonical_params(&params).ok_or(OptimizeError::InvalidSeed(params))?,
        status: Status::InteriorMaximum,
        grid_best: f64::NAN,
        refinements_run: 1,
        extrapolation_detail: None,
    };
    if let Some(analysis) = limit::analyze(curve, &params, &gaps, floor, opts.collapse_threshold(), settings) {
        // probe values carry rounding noise of order 1e-8 at the floor, so
        // the fitted intercept is reported rather than the best probe
        if analysis.increasing && analysis.detail.slope > 0.0 && analysis.detail.limit >= seed_value {
            result.value = analysis.detail.limit;
            result.status = Status::DegenerateLimit;
            if let Some(q) = canonical_params(&analysis.params) {
                result.argmax = q;
            }
            result.extrapolation_detail = Some(analysis.detail);
        }
    }
    Ok(result)
}

/// SplitMix64 stream mapped to `[0, 1)` with 53 random bits.
struct UnitStream(SplitMix64);

impl UnitStream {
    fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// `count` sorted uniform quadruples with every cyclic gap at least `floor`.
fn random_tuples(seed: u64, count: usize, floor: f64) -> Vec<[f64; 4]> {
    let mut stream = UnitStream::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut t = [stream.next(), stream.next(), stream.next(), stream.next()];
        t.sort_by(f64::total_cmp);
        let ok = is_strict_cyclic_order(t[0], t[1], t[2], t[3])
            && QuadParams::from_array(t).is_ok_and(|q| q.min_gap() >= floor);
        if ok {
            out.push(t);
        }
    }
    out
}

/// L∞ distance in `(t1, g1, g2, g3)` with `t1` compared cyclically.
fn seed_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let (ra, rb) = (reduce(a), reduce(b));
    let mut d = cyclic_distance(ra[0], rb[0]);
    for i in 1..4 {
        d = d.max((ra[i] - rb[i]).abs());
    }
    d
}

/// `true` if `a` should replace `b` as the reported optimum.
fn better(a: &EstimateResult, b: &EstimateResult) -> bool {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let (pa, pb) = (a.argmax.params(), b.argmax.params());
            pa.iter().zip(&pb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)
        }
    }
}

/// Global estimate of the Ptolemy constant of `curve`.
///
/// Deterministic for a fixed `(curve, opts)`: refinements may run in
/// parallel but are merged in seed order.
pub fn estimate_ptolemy_constant(curve: &Curve, opts: &OptimizeOptions) -> Result<EstimateResult, OptimizeError> {
    opts.validate()?;
    let n = opts.grid_points;
    let (grid, candidates) = grid::enumerate(curve, n);

    if opts.max_iterations == 0 {
        return Ok(EstimateResult {
            value: grid.value,
            argmax: grid.argmax,
            status: Status::GridOnly,
            grid_best: grid.value,
            refinements_run: 0,
            extrapolation_detail: None,
        });
    }

    let radius = 2.0 / n as f64;
    let mut seeds: Vec<[f64; 4]> = Vec::with_capacity(2 * opts.starts);
    for cand in &candidates {
        if seeds.len() == opts.starts {
            break;
        }
        let t = cand.params(n);
        if seeds.iter().all(|s| seed_distance(s, &t) > radius) {
            seeds.push(t);
        }
    }
    seeds.extend(random_tuples(opts.rng_seed, opts.starts, opts.gap_floor));

    let outcomes: Vec<_> = seeds.par_iter().map(|s| refine_local(curve, *s, opts)).collect();
    let attempted = outcomes.len();
    let best = outcomes
        .into_iter()
        .filter_map(Result::ok)
        .reduce(|acc, r| if better(&r, &acc) { r } else { acc });
    let mut best = best.ok_or(OptimizeError::AllRefinementsFailed(attempted))?;
    best.grid_best = grid.value;
    best.refinements_run = attempted;
    Ok(best)
}
