//! Inverse temperature and free energy from the forward/backward work ratio.
//!
//! For each matching pair of peaks `ln[P^F(W) / P^B(−W)] = βW − βΔF`, so a
//! straight-line fit of the log-ratios against `W` gives `β` as its slope and
//! `−βΔF` as its intercept.

use crate::error::{Error, Result};
use crate::workstats::WorkDistribution;

/// Absolute tolerance for matching work values, `h·kHz`.
pub const WORK_MATCH_TOL: f64 = 1e-6;
/// Probabilities at or below this are treated as zero.
pub const MIN_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRatioPoint {
    /// Forward work `W`, `h·kHz`.
    pub work: f64,
    /// `ln[P^F(W) / P^B(−W)]`.
    pub log_ratio: f64,
    /// Variance of `log_ratio`, propagated as `(δp/p)²` from both peaks.
    pub variance: Option<f64>,
}

impl LogRatioPoint {
    pub fn weight(&self) -> f64 {
        match self.variance {
            Some(v) if v > 0.0 => 1.0 / v,
            _ => 1.0,
        }
    }
}

struct MergedPeak {
    work: f64,
    probability: f64,
    variance: Option<f64>,
}

/// Collapses peaks that sit at the same work value, e.g. the two zero-work
/// peaks of a protocol with equal endpoint frequencies.
fn merge(wd: &WorkDistribution) -> Vec<MergedPeak> {
    let mut out: Vec<MergedPeak> = Vec::with_capacity(wd.peaks.len());
    for p in &wd.peaks {
        let var = p.uncertainty.map(|u| u * u);
        match out.last_mut() {
            Some(last) if (last.work - p.work).abs() < WORK_MATCH_TOL => {
                last.probability += p.probability;
                last.variance = match (last.variance, var) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
            }
            _ => out.push(MergedPeak { work: p.work, probability: p.probability, variance: var }),
        }
    }
    out
}

/// Pairs every forward peak at `+W` with the backward peak at `−W`. With
/// `inner_only` only `|W| = |ν_τ − ν_0|` is kept.
pub fn log_ratio_points(
    wd_f: &WorkDistribution,
    wd_b: &WorkDistribution,
    inner_only: bool,
) -> Result<Vec<LogRatioPoint>> {
    let fwd = merge(wd_f);
    let bwd = merge(wd_b);
    if fwd.len() != bwd.len() {
        return Err(Error::Support(format!(
            "forward has {} distinct work values, backward has {}",
            fwd.len(),
            bwd.len()
        )));
    }
    let (nu_start, nu_end) = wd_f.protocol.endpoint_frequencies();
    let inner = (nu_end - nu_start).abs();

    let mut points = Vec::new();
    for f in &fwd {
        let b = bwd
            .iter()
            .find(|b| (b.work + f.work).abs() < WORK_MATCH_TOL)
            .ok_or_else(|| {
                Error::Support(format!("no backward peak at W = {} h·kHz", -f.work))
            })?;
        if inner_only && (f.work.abs() - inner).abs() >= WORK_MATCH_TOL {
            continue;
        }
        if f.probability <= MIN_PROBABILITY || b.probability <= MIN_PROBABILITY {
            return Err(Error::Domain(format!(
                "vanishing probability at W = {} (forward {}, backward {})",
                f.work, f.probability, b.probability
            )));
        }
        let variance = match (f.variance, b.variance) {
            (Some(vf), Some(vb)) => {
                Some(vf / (f.probability * f.probability) + vb / (b.probability * b.probability))
            }
            _ => None,
        };
        points.push(LogRatioPoint {
            work: f.work,
            log_ratio: (f.probability / b.probability).ln(),
            variance,
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrooksFitResult {
    /// Slope, `(h·kHz)⁻¹`.
    pub beta_est: f64,
    /// Minus the intercept.
    pub beta_delta_f_est: f64,
    /// `h·kHz`.
    pub delta_f_est: f64,
    pub stderr_slope: f64,
    pub stderr_intercept: f64,
    /// `(W, log_ratio)` pairs the line was fitted to.
    pub points_used: Vec<(f64, f64)>,
    /// Largest absolute residual.
    pub max_residual: f64,
}

impl CrooksFitResult {
    pub fn intercept(&self) -> f64 {
        -self.beta_delta_f_est
    }

    /// Work where the fitted line crosses zero, i.e. `P^F(W) = P^B(−W)`.
    pub fn crossing_point(&self) -> f64 {
        self.delta_f_est
    }
}

/// Least-squares line through the points. Inverse-variance weights are used
/// when every point carries a positive variance; otherwise ordinary least
/// squares with standard errors scaled by the residual variance.
pub fn fit_line(points: &[LogRatioPoint]) -> Result<CrooksFitResult> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 points, got {}", points.len())));
    }
    let weighted = points.iter().all(|p| matches!(p.variance, Some(v) if v > 0.0));
    let w = |p: &LogRatioPoint| if weighted { p.weight() } else { 1.0 };

    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let wi = w(p);
        sw += wi;
        sx += wi * p.work;
        sxx += wi * p.work * p.work;
        sy += wi * p.log_ratio;
        sxy += wi * p.work * p.log_ratio;
    }
    // centred form keeps the determinant accurate
    let mean_x = sx / sw;
    let sxx_c: f64 = points.iter().map(|p| w(p) * (p.work - mean_x).powi(2)).sum();
    let spread = points.iter().map(|p| p.work.abs()).fold(0.0, f64::max).max(1.0);
    if !(sxx_c > 1e-24 * sw * spread * spread) {
        return Err(Error::DegenerateFit("all work values coincide".into()));
    }
    let slope = (sxy - mean_x * sy) / sxx_c;
    let intercept = (sy - slope * sx) / sw;

    let residuals: Vec<f64> = points
        .iter()
        .map(|p| p.log_ratio - (slope * p.work + intercept))
        .collect();
    let max_residual = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);

    let mut var_slope = 1.0 / sxx_c;
    let mut var_intercept = sxx / (sw * sxx_c);
    if !weighted {
        let dof = points.len() - 2;
        let s2 = if dof == 0 {
            0.0
        } else {
            residuals.iter().map(|r| r * r).sum::<f64>() / dof as f64
        };
        var_slope *= s2;
        var_intercept *= s2;
    }

    Ok(CrooksFitResult {
        beta_est: slope,
        beta_delta_f_est: -intercept,
        delta_f_est: -intercept / slope,
        stderr_slope: var_slope.max(0.0).sqrt(),
        stderr_intercept: var_intercept.max(0.0).sqrt(),
        points_used: points.iter().map(|p| (p.work, p.log_ratio)).collect(),
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// One line per quench duration.
    PerTau,
    /// One line through the points of every duration.
    Pooled,
}

/// Log-ratio points from one quench duration.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationGroup {
    /// Seconds.
    pub tau: f64,
    pub points: Vec<LogRatioPoint>,
}

/// Fits each group separately or all groups together. Pooled mode returns one result.
pub fn fit_durations(groups: &[DurationGroup], mode: FitMode) -> Result<Vec<CrooksFitResult>> {
    match mode {
        FitMode::PerTau => groups.iter().map(|g| fit_line(&g.points)).collect(),
        FitMode::Pooled => {
            let all: Vec<LogRatioPoint> = groups.iter().flat_map(|g| g.points.iter().copied()).collect();
            Ok(vec![fit_line(&all)?])
        }
    }
}
