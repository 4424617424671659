//! Suprema reached only as boundary points coalesce.
//!
//! When refinement ends with some cyclic gaps pinned at the floor, the
//! points joined by those gaps form clusters. Each cluster is rescaled about
//! an anchor (the curve corner it sits on, or its own midpoint on smooth
//! arcs) while the remaining points stay put. At every scale the cluster
//! shape is re-optimized, and the best values are extrapolated linearly to
//! zero scale.

use serde::{Deserialize, Serialize};

use crate::curves::Curve;
use crate::nelder_mead::{self, Settings};
use crate::ratio::ratio_at;

/// Scales probed are `gap_floor·2^k` for `k = RAY_STEPS..=0`.
pub(crate) const RAY_STEPS: i32 = 10;
/// Number of smallest scales used by the linear fit.
const FIT_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationDetail {
    /// Smallest cluster gap at each probe, largest first.
    pub gaps: Vec<f64>,
    /// Best ratio found at each probe.
    pub values: Vec<f64>,
    /// Intercept `L` of the fit `value(δ) = L − m·δ`.
    pub limit: f64,
    /// Slope `m` of the fit.
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<usize>,
    anchor: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LimitAnalysis {
    pub detail: ExtrapolationDetail,
    /// Configuration at the smallest scale (unwrapped parameters).
    pub params: [f64; 4],
    /// Whether the best value still grew as the clusters shrank.
    pub increasing: bool,
}

/// Splits the four points into clusters joined by gaps at most `threshold`.
/// `gaps[i]` runs from point `i` to point `i+1` (mod 4).
fn clusters(params: &[f64; 4], gaps: &[f64; 4], threshold: f64, corners: &[f64]) -> Vec<Cluster> {
    let active = gaps.map(|g| g <= threshold);
    let Some(start) = (0..4).find(|&i| !active[(i + 3) % 4]) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut members = vec![start];
    for step in 0..4 {
        let i = (start + step) % 4;
        if step < 3 && active[i] {
            members.push((i + 1) % 4);
            continue;
        }
        if members.len() > 1 {
            out.push(std::mem::take(&mut members));
        }
        members = vec![(i + 1) % 4];
    }
    out.into_iter()
        .map(|members| {
            let first = params[members[0]];
            let span: f64 = members[..members.len() - 1].iter().map(|&m| gaps[m]).sum();
            let mid = first + 0.5 * span;
            let anchor = corners
                .iter()
                .map(|&c| c + (mid - c).round())
                .filter(|&c| c >= first - threshold && c <= first + span + threshold)
                .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
                .unwrap_or(mid);
            Cluster { members, anchor }
        })
        .collect()
}

/// Least-squares line through `(x, y)`; returns (intercept, slope, rms residual).
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (intercept, slope, rms)
}

/// Runs the shrinking-cluster probe. `params` are unwrapped and increasing,
/// `gaps` the four cyclic gaps. Returns `None` when no gap is below
/// `threshold`.
pub(crate) fn analyze(
    curve: &Curve,
    params: &[f64; 4],
    gaps: &[f64; 4],
    gap_floor: f64,
    threshold: f64,
    settings: Settings,
) -> Option<LimitAnalysis> {
    let clusters = clusters(params, gaps, threshold, curve.corners());
    if clusters.is_empty() {
        return None;
    }
    let min_active = gaps.iter().copied().filter(|&g| g <= threshold).fold(f64::INFINITY, f64::min);
    let unit = min_active.max(gap_floor);

    // offsets of cluster members from their anchor, in units of the probe scale
    let mut shape: Vec<f64> = Vec::new();
    for c in &clusters {
        let mut pos = params[c.members[0]];
        shape.push((pos - c.anchor) / unit);
        for &m in &c.members[..c.members.len() - 1] {
            pos += gaps[m];
            shape.push((pos - c.anchor) / unit);
        }
    }

    let place = |u: &[f64], delta: f64| -> [f64; 4] {
        let mut t = *params;
        let mut k = 0;
        for c in &clusters {
            for &m in &c.members {
                t[m] = c.anchor + delta * u[k];
                k += 1;
            }
        }
        t
    };
    let project = |u: &mut [f64]| {
        let mut k = 0;
        for c in &clusters {
            for j in 1..c.members.len() {
                u[k + j] = u[k + j].max(u[k + j - 1] + 1.0);
            }
            k += c.members.len();
        }
    };

    let mut probe_gaps = Vec::with_capacity(RAY_STEPS as usize + 1);
    let mut values = Vec::with_capacity(RAY_STEPS as usize + 1);
    let mut smallest = *params;
    for k in (0..=RAY_STEPS).rev() {
        let delta = gap_floor * 2f64.powi(k);
        let objective = |u: &[f64]| ratio_at(curve, &place(u, delta)).ok();
        let first = nelder_mead::maximize(objective, project, &shape, 0.5, settings);
        let polished = nelder_mead::maximize(objective, project, &first.x, 0.05, settings);
        shape = polished.x;
        probe_gaps.push(delta);
        values.push(polished.value);
        smallest = place(&shape, delta);
    }

    let n = values.len();
    let (limit, slope, residual) = fit_line(&probe_gaps[n - FIT_POINTS..], &values[n - FIT_POINTS..]);
    let increasing = values[n - 1] - values[0] > settings.value_tolerance.max(1e-14);
    Some(LimitAnalysis {
        detail: ExtrapolationDetail {
            gaps: probe_gaps,
            values,
            limit,
            slope: -slope,
            residual,
        },
        params: smallest,
        increasing,
    })
}
