//! Records and reports produced by the `ptolemy` command-line tool.
//!
//! Everything here is plain data plus the functions that compute it; the
//! binary only parses arguments and chooses where output goes.

use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    ellipse_bounds, ellipse_constant, rectangle_constant, rectangle_limit_family, rectangle_threshold,
    rectangle_wide_branch, AnalyticError,
};
use crate::curves::{Curve, CurveError, CurveSpec, Eccentricity};
use crate::optimizer::{estimate_ptolemy_constant, EstimateResult, OptimizeError, OptimizeOptions, Status};
use crate::ratio::{
    classify_with_floor, ellipse_hessian_closed_form, finite_difference_noise, gradient_fd, hessian_fd,
    ratio_on_curve, CriticalPointKind, Matrix4, QuadParams, RatioError,
};

/// Column order of sweep CSV files.
pub const SWEEP_HEADER: [&str; 14] = [
    "curve",
    "eps",
    "estimate",
    "closed_form",
    "lower_bound",
    "upper_bound",
    "abs_error",
    "status",
    "t1",
    "t2",
    "t3",
    "t4",
    "grid_best",
    "seconds",
];

/// Spread across seeds above which an open-case estimate is flagged.
pub const STABILITY_TOLERANCE: f64 = 1e-5;

/// Step used for the gradient in the Hessian report, in radians.
pub const GRADIENT_STEP: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Ratio(#[from] RatioError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    /// 2 for anything the caller got wrong, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Optimize(OptimizeError::InvalidOptions(_) | OptimizeError::InvalidSeed(_)) => 2,
            ExperimentError::Optimize(_) | ExperimentError::Ratio(_) => 3,
            _ => 2,
        }
    }
}

/// Formats `x` with 10 significant digits, plain for moderate magnitudes and
/// in exponent form otherwise.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    let exponent = rounded.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Known values for a curve, where the curve has them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Reference {
    pub closed_form: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
}

/// Closed form and bounds for ellipses and rectangles; nothing otherwise.
/// The rectangle constant doubles as its lower bound; no upper bound is
/// available for rectangles.
pub fn reference_values(spec: &CurveSpec) -> Result<Reference, AnalyticError> {
    Ok(match *spec {
        CurveSpec::Ellipse { eccentricity } => {
            let bounds = ellipse_bounds(eccentricity)?;
            Reference {
                closed_form: Some(ellipse_constant(eccentricity)?),
                lower_bound: Some(bounds.lower),
                upper_bound: Some(bounds.upper),
            }
        }
        CurveSpec::Rectangle { eccentricity } => {
            let value = rectangle_constant(eccentricity)?;
            Reference { closed_form: Some(value), lower_bound: Some(value), upper_bound: None }
        }
        _ => Reference::default(),
    })
}

fn eccentricity_of(spec: &CurveSpec) -> Option<f64> {
    match *spec {
        CurveSpec::Ellipse { eccentricity } | CurveSpec::Rectangle { eccentricity } => Some(eccentricity),
        _ => None,
    }
}

/// One row of a sweep, or the flat summary of any single estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub curve: String,
    pub eps: Option<f64>,
    pub estimate: f64,
    pub closed_form: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    /// `|estimate − closed_form|` when a closed form is known.
    pub abs_error: Option<f64>,
    pub status: String,
    pub argmax_t: [f64; 4],
    pub grid_best: f64,
    pub seconds: f64,
}

impl SweepRecord {
    pub fn new(spec: &CurveSpec, result: &EstimateResult, reference: Reference, seconds: f64) -> Self {
        Self {
            curve: spec.to_string(),
            eps: eccentricity_of(spec),
            estimate: result.value,
            closed_form: reference.closed_form,
            lower_bound: reference.lower_bound,
            upper_bound: reference.upper_bound,
            abs_error: reference.closed_form.map(|c| (result.value - c).abs()),
            status: result.status.to_string(),
            argmax_t: result.argmax.params(),
            grid_best: result.grid_best,
            seconds,
        }
    }

    /// CSV fields in [`SWEEP_HEADER`] order, 10 significant digits.
    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        let mut fields = vec![
            self.curve.clone(),
            opt(self.eps),
            fmt_sig(self.estimate),
            opt(self.closed_form),
            opt(self.lower_bound),
            opt(self.upper_bound),
            opt(self.abs_error),
            self.status.clone(),
        ];
        fields.extend(self.argmax_t.iter().map(|&t| fmt_sig(t)));
        fields.push(fmt_sig(self.grid_best));
        fields.push(fmt_sig(self.seconds));
        fields
    }

    pub fn from_csv_fields(record: &csv::StringRecord) -> Result<Self, ExperimentError> {
        if record.len() != SWEEP_HEADER.len() {
            return Err(ExperimentError::InvalidArgument(format!(
                "expected {} columns, found {}",
                SWEEP_HEADER.len(),
                record.len()
            )));
        }
        let num = |i: usize| -> Result<f64, ExperimentError> {
            record[i].parse().map_err(|_| {
                ExperimentError::InvalidArgument(format!("column {}: `{}` is not a number", SWEEP_HEADER[i], &record[i]))
            })
        };
        let opt = |i: usize| -> Result<Option<f64>, ExperimentError> {
            if record[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        Ok(Self {
            curve: record[0].to_string(),
            eps: opt(1)?,
            estimate: num(2)?,
            closed_form: opt(3)?,
            lower_bound: opt(4)?,
            upper_bound: opt(5)?,
            abs_error: opt(6)?,
            status: record[7].to_string(),
            argmax_t: [num(8)?, num(9)?, num(10)?, num(11)?],
            grid_best: num(12)?,
            seconds: num(13)?,
        })
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRecord], out: W) -> Result<(), ExperimentError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(SWEEP_HEADER)?;
    for row in rows {
        writer.write_record(row.csv_fields())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>, ExperimentError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(ExperimentError::InvalidArgument("unexpected sweep header".into()));
    }
    reader.records().map(|r| SweepRecord::from_csv_fields(&r?)).collect()
}

/// JSON body of the `estimate` command.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub curve: String,
    #[serde(flatten)]
    pub result: EstimateResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
    pub seconds: f64,
}

impl EstimateReport {
    pub fn record(&self, spec: &CurveSpec) -> SweepRecord {
        let reference = Reference {
            closed_form: self.closed_form,
            lower_bound: self.lower_bound,
            upper_bound: self.upper_bound,
        };
        SweepRecord::new(spec, &self.result, reference, self.seconds)
    }
}

pub fn estimate(spec: &CurveSpec, opts: &OptimizeOptions) -> Result<EstimateReport, ExperimentError> {
    let curve = Curve::new(spec.clone())?;
    let reference = reference_values(spec)?;
    let start = Instant::now();
    let result = estimate_ptolemy_constant(&curve, opts)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(EstimateReport {
        curve: spec.to_string(),
        abs_error: reference.closed_form.map(|c| (result.value - c).abs()),
        result,
        closed_form: reference.closed_form,
        lower_bound: reference.lower_bound,
        upper_bound: reference.upper_bound,
        seconds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFamily {
    Ellipse,
    Rectangle,
}

impl CurveFamily {
    pub fn spec(self, eps: f64) -> CurveSpec {
        match self {
            CurveFamily::Ellipse => CurveSpec::Ellipse { eccentricity: eps },
            CurveFamily::Rectangle => CurveSpec::Rectangle { eccentricity: eps },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRecord>,
    pub max_abs_error: Option<f64>,
    /// Branch values for rectangle rows within 1e−6 of the 2×1 threshold.
    pub notes: Vec<String>,
}

/// `steps` eccentricities evenly spaced over `[eps_min, eps_max]`, endpoints
/// included.
pub fn sweep_grid(eps_min: f64, eps_max: f64, steps: usize) -> Result<Vec<f64>, ExperimentError> {
    if steps == 0 {
        return Err(ExperimentError::InvalidArgument("steps must be at least 1".into()));
    }
    if !(0.0 <= eps_min && eps_min <= eps_max && eps_max < 1.0) {
        return Err(ExperimentError::InvalidArgument(format!(
            "need 0 <= eps_min <= eps_max < 1, got [{eps_min}, {eps_max}]"
        )));
    }
    if steps == 1 {
        return Ok(vec![eps_min]);
    }
    let span = eps_max - eps_min;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                eps_max
            } else {
                eps_min + span * k as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

pub fn sweep(
    family: CurveFamily,
    eps_min: f64,
    eps_max: f64,
    steps: usize,
    opts: &OptimizeOptions,
) -> Result<SweepOutput, ExperimentError> {
    let grid = sweep_grid(eps_min, eps_max, steps)?;
    let rows = grid
        .par_iter()
        .map(|&eps| {
            let spec = family.spec(eps);
            estimate(&spec, opts).map(|report| report.record(&spec))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_abs_error = rows.iter().filter_map(|r| r.abs_error).reduce(f64::max);
    let mut notes = Vec::new();
    if family == CurveFamily::Rectangle {
        for &eps in &grid {
            if (eps - rectangle_threshold()).abs() <= 1e-6 {
                let b = Eccentricity::new(eps)?.minor();
                notes.push(format!(
                    "eps={}: first branch {}, second branch {}",
                    fmt_sig(eps),
                    fmt_sig(std::f64::consts::SQRT_2),
                    fmt_sig(rectangle_wide_branch(b))
                ));
            }
        }
    }
    Ok(SweepOutput { rows, max_abs_error, notes })
}

/// JSON body of the `hessian` command.
#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    pub eps: f64,
    pub step: f64,
    pub ratio_at_critical_point: f64,
    pub closed_form: Matrix4,
    pub finite_difference: Matrix4,
    pub max_diff: f64,
    pub gradient: [f64; 4],
    pub gradient_norm: f64,
    pub closed_form_classification: CriticalPointKind,
    pub finite_difference_classification: CriticalPointKind,
}

/// Closed-form and finite-difference Hessians of the ellipse ratio at
/// `(0, π/2, π, 3π/2)`. `step` is in radians.
pub fn hessian_report(eps: f64, step: f64) -> Result<HessianReport, ExperimentError> {
    let e = Eccentricity::new(eps)?;
    let curve = Curve::ellipse(eps)?;
    let q = QuadParams::quarter_turns();
    let value = ratio_on_curve(&curve, &q)?;
    let closed_form = ellipse_hessian_closed_form(e);
    let finite_difference = hessian_fd(&curve, &q, step)?;
    let gradient = gradient_fd(&curve, &q, GRADIENT_STEP)?;
    Ok(HessianReport {
        eps,
        step,
        ratio_at_critical_point: value,
        max_diff: closed_form.max_abs_diff(&finite_difference),
        gradient,
        gradient_norm: gradient.iter().fold(0.0, |m, g| m.max(g.abs())),
        closed_form_classification: classify_with_floor(&closed_form, 0.0),
        finite_difference_classification: classify_with_floor(&finite_difference, finite_difference_noise(value, step)),
        closed_form,
        finite_difference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub delta: f64,
    pub ratio: f64,
    pub gap: f64,
}

/// JSON body of the `limit` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTable {
    pub eps: f64,
    pub target: f64,
    pub rows: Vec<LimitRow>,
    /// Whether `gap` strictly decreases from row to row.
    pub monotone: bool,
    /// Least-squares slope of `ln gap` against `ln δ`.
    pub fitted_order: Option<f64>,
}

/// Evaluates the rectangle corner-collapse family at `δ = start·factorᵏ`.
pub fn limit_table(eps: f64, delta_start: f64, factor: f64, count: usize) -> Result<LimitTable, ExperimentError> {
    if count == 0 {
        return Err(ExperimentError::InvalidArgument("count must be at least 1".into()));
    }
    if !(factor > 0.0 && factor < 1.0) {
        return Err(ExperimentError::InvalidArgument(format!("factor must lie in (0, 1), got {factor}")));
    }
    let target = rectangle_constant(eps)?;
    let rows = (0..count)
        .map(|k| {
            let delta = delta_start * factor.powi(k as i32);
            let ratio = rectangle_limit_family(eps, delta)?;
            Ok(LimitRow { delta, ratio, gap: (ratio - target).abs() })
        })
        .collect::<Result<Vec<_>, AnalyticError>>()?;
    let monotone = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let logs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.gap > 0.0)
        .map(|r| (r.delta.ln(), r.gap.ln()))
        .collect();
    let fitted_order = (logs.len() >= 2).then(|| {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(LimitTable { eps, target, rows, monotone, fitted_order })
}

/// JSON body of the `open` command.
#[derive(Debug, Clone, Serialize)]
pub struct OpenReport {
    pub curve: String,
    pub rng_seeds: Vec<u64>,
    pub values: Vec<f64>,
    pub statuses: Vec<Status>,
    pub spread: f64,
    pub unstable: bool,
    pub best: EstimateResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
}

/// Repeats the estimate under `seeds` consecutive rng seeds starting at
/// `opts.rng_seed` and reports the spread.
pub fn open_report(spec: &CurveSpec, seeds: usize, opts: &OptimizeOptions) -> Result<OpenReport, ExperimentError> {
    if seeds == 0 {
        return Err(ExperimentError::InvalidArgument("seeds must be at least 1".into()));
    }
    let curve = Curve::new(spec.clone())?;
    let rng_seeds: Vec<u64> = (0..seeds as u64).map(|i| opts.rng_seed.wrapping_add(i)).collect();
    let results = rng_seeds
        .iter()
        .map(|&rng_seed| {
            let o = OptimizeOptions { rng_seed, ..opts.clone() };
            estimate_ptolemy_constant(&curve, &o)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    let best = results
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("at least one seed");
    Ok(OpenReport {
        curve: spec.to_string(),
        rng_seeds,
        statuses: results.iter().map(|r| r.status).collect(),
        values,
        spread,
        unstable: spread > STABILITY_TOLERANCE,
        best,
        closed_form: reference_values(spec)?.closed_form,
    })
}
