//! Two-point-measurement work statistics and entropy production.
//!
//! Work is `W = ε̄_m − ε_n`, the difference between the final and initial
//! energy-measurement outcomes. For a qubit this gives four peaks with
//! probabilities `p_n · p_{m|n}`, where `p_{m|n} = |⟨m_τ|U_τ|n_0⟩|²`.
//! Energy levels are indexed in ascending order (0 = ground).

use crate::error::{Error, Result};
use crate::qubit::{
    kl_divergence, vn_entropy, DensityMatrix, InverseTemperature,
};
use crate::quench::{
    initial_state, propagator, propagators_at, Direction, PropagationSettings, QuenchProtocol,
};

/// Normalization tolerance for probability distributions.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// `p_{m|n}` indexed as `[m][n]` (final level, initial level).
pub type TransitionMatrix = [[f64; 2]; 2];

/// Conditional transition probabilities between the eigenbases of the initial
/// and final energy operators of the protocol (in its own direction).
pub fn transition_matrix(p: &QuenchProtocol, s: &PropagationSettings) -> Result<TransitionMatrix> {
    let u = propagator(p, p.tau(), s)?;
    let start = p.initial_energy_operator().eigen();
    let end = p.final_energy_operator().eigen();
    let mut t = [[0.0; 2]; 2];
    for n in 0..2 {
        // U |n_0⟩
        let evolved = crate::matrix::apply(u.matrix(), &start.vectors[n]);
        for (m, row) in t.iter_mut().enumerate() {
            row[n] = end.overlap_sq(m, &evolved);
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkPeak {
    /// Work in `h·kHz`.
    pub work: f64,
    pub probability: f64,
    /// Index `n` of the initial energy level.
    pub initial_level: usize,
    /// Index `m` of the final energy level.
    pub final_level: usize,
    /// Standard error of `probability`, when it was estimated from data.
    pub uncertainty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    /// Sorted by ascending work.
    pub peaks: Vec<WorkPeak>,
    pub protocol: QuenchProtocol,
}

impl WorkDistribution {
    pub fn new(mut peaks: Vec<WorkPeak>, protocol: QuenchProtocol) -> Result<Self> {
        if peaks.iter().any(|p| !p.probability.is_finite() || !p.work.is_finite()) {
            return Err(Error::Validation("non-finite work peak".into()));
        }
        peaks.sort_by(|a, b| a.work.total_cmp(&b.work));
        Ok(WorkDistribution { peaks, protocol })
    }

    pub fn direction(&self) -> Direction {
        self.protocol.direction()
    }

    pub fn total_probability(&self) -> f64 {
        self.peaks.iter().map(|p| p.probability).sum()
    }

    /// Checks non-negativity and unit normalization.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.peaks.iter().find(|p| p.probability < -NORMALIZATION_TOL) {
            return Err(Error::Validation(format!("negative probability {}", p.probability)));
        }
        let total = self.total_probability();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn mean_work(&self) -> f64 {
        self.peaks.iter().map(|p| p.probability * p.work).sum()
    }

    /// Equilibrium free-energy difference between the end points of this direction.
    pub fn free_energy_difference(&self, beta: InverseTemperature) -> f64 {
        let (start, end) = self.protocol.endpoint_frequencies();
        free_energy_difference(beta, start, end)
    }
}

/// Work peaks `(W, n, m)` expected for a protocol, from the endpoint spectra.
pub fn expected_peaks(p: &QuenchProtocol) -> Vec<(f64, usize, usize)> {
    let start = p.initial_energy_operator().eigen().values;
    let end = p.final_energy_operator().eigen().values;
    let mut out = Vec::with_capacity(4);
    for (m, e_end) in end.iter().enumerate() {
        for (n, e_start) in start.iter().enumerate() {
            out.push((e_end - e_start, n, m));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Gibbs populations of a spectrum, ascending-energy order.
pub fn gibbs_populations(levels: [f64; 2], beta: InverseTemperature) -> [f64; 2] {
    let w1 = (-beta.value() * (levels[1] - levels[0])).exp();
    [1.0 / (1.0 + w1), w1 / (1.0 + w1)]
}

/// The two-point-measurement work distribution of the protocol in its own direction.
pub fn tpm_work_distribution(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    s: &PropagationSettings,
) -> Result<WorkDistribution> {
    let start = p.initial_energy_operator().eigen().values;
    let end = p.final_energy_operator().eigen().values;
    let pops = gibbs_populations(start, beta);
    let t = transition_matrix(p, s)?;
    let mut peaks = Vec::with_capacity(4);
    for m in 0..2 {
        for n in 0..2 {
            peaks.push(WorkPeak {
                work: end[m] - start[n],
                probability: pops[n] * t[m][n],
                initial_level: n,
                final_level: m,
                uncertainty: None,
            });
        }
    }
    let wd = WorkDistribution::new(peaks, *p)?;
    wd.validate()?;
    Ok(wd)
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        // cosh x − 1 = 2 sinh²(x/2), no cancellation near 0
        (2.0 * (0.5 * a).sinh().powi(2)).ln_1p()
    } else {
        a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
    }
}

/// `ΔF = β⁻¹ ln[cosh(βν_start) / cosh(βν_end)]` in `h·kHz` (qubit partition
/// function `Z = 2 cosh βν`). Returns the limit 0 at `β = 0`.
pub fn free_energy_difference(beta: InverseTemperature, nu_start: f64, nu_end: f64) -> f64 {
    let b = beta.value();
    if b == 0.0 {
        return 0.0;
    }
    (ln_cosh(b * nu_start) - ln_cosh(b * nu_end)) / b
}

/// `ln ⟨e^{−βW}⟩`, evaluated with a shift for stability.
fn log_mean_exp(wd: &WorkDistribution, beta: f64) -> f64 {
    let shift = wd
        .peaks
        .iter()
        .map(|p| -beta * p.work)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = wd
        .peaks
        .iter()
        .map(|p| p.probability * (-beta * p.work - shift).exp())
        .sum();
    shift + sum.ln()
}

/// Free-energy difference from the Jarzynski equality, `−β⁻¹ ln ⟨e^{−βW}⟩`.
/// At `β = 0` the limit `⟨W⟩` is returned.
pub fn jarzynski_delta_f(wd: &WorkDistribution, beta: InverseTemperature) -> f64 {
    let b = beta.value();
    if b == 0.0 {
        return wd.mean_work();
    }
    -log_mean_exp(wd, b) / b
}

/// `⟨e^{−βW}⟩ e^{βΔF}`, which equals one for any unitary protocol.
pub fn jarzynski_ratio(wd: &WorkDistribution, beta: InverseTemperature) -> f64 {
    let b = beta.value();
    (log_mean_exp(wd, b) + b * wd.free_energy_difference(beta)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPoint {
    /// Dimensionless entropy production `β(W − ΔF)`.
    pub sigma: f64,
    pub probability: f64,
    pub work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProductionDistribution {
    pub points: Vec<EntropyPoint>,
    pub beta: InverseTemperature,
    /// `h·kHz`.
    pub delta_f: f64,
}

/// Maps each work peak to `Σ = β(W − ΔF)`.
pub fn entropy_distribution(
    wd: &WorkDistribution,
    beta: InverseTemperature,
    delta_f: f64,
) -> EntropyProductionDistribution {
    let b = beta.value();
    let points = wd
        .peaks
        .iter()
        .map(|p| EntropyPoint {
            sigma: b * (p.work - delta_f),
            probability: p.probability,
            work: p.work,
        })
        .collect();
    EntropyProductionDistribution { points, beta, delta_f }
}

pub fn mean_sigma(ed: &EntropyProductionDistribution) -> f64 {
    ed.points.iter().map(|p| p.probability * p.sigma).sum()
}

/// Work cumulants `κ_1 … κ_{n_max}`.
///
/// Higher cumulants come from central moments through
/// `κ_n = μ_n − Σ_{j=2}^{n−2} C(n−1, j−1) κ_j μ_{n−j}`, which avoids the
/// cancellation of the raw-moment form.
pub fn work_cumulants(wd: &WorkDistribution, n_max: usize) -> Result<Vec<f64>> {
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    let mean = wd.mean_work();
    let central: Vec<f64> = (0..=n_max)
        .map(|k| {
            wd.peaks
                .iter()
                .map(|p| p.probability * (p.work - mean).powi(k as i32))
                .sum()
        })
        .collect();
    let mut kappa = vec![0.0; n_max + 1];
    kappa[1] = mean;
    for n in 2..=n_max {
        let mut k = central[n];
        let mut binom = 1.0; // C(n−1, j−1), starting at j = 1
        for j in 2..n.saturating_sub(1) {
            binom *= (n - j + 1) as f64 / (j - 1) as f64;
            k -= binom * kappa[j] * central[n - j];
        }
        kappa[n] = k;
    }
    Ok(kappa[1..].to_vec())
}

/// Truncated cumulant expansion `Σ_{n=2}^{n_max} (−1)ⁿ κ_n βⁿ / n!` of `⟨Σ⟩`.
pub fn cumulant_series_sigma(
    wd: &WorkDistribution,
    beta: InverseTemperature,
    n_max: usize,
) -> Result<f64> {
    let kappa = work_cumulants(wd, n_max)?;
    let b = beta.value();
    let mut term_scale = b; // βⁿ/n!, built incrementally
    let mut sum = 0.0;
    for n in 2..=n_max {
        term_scale *= b / n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * kappa[n - 1] * term_scale;
    }
    Ok(sum)
}

/// Linear-response estimate `β² κ₂ / 2`.
pub fn linear_response_sigma(wd: &WorkDistribution, beta: InverseTemperature) -> f64 {
    let mean = wd.mean_work();
    let var: f64 = wd
        .peaks
        .iter()
        .map(|p| p.probability * (p.work - mean).powi(2))
        .sum();
    let b = beta.value();
    0.5 * b * b * var
}

/// `⟨Σ⟩ = β(⟨W⟩ − ΔF)` from the TPM distribution with the closed-form `ΔF`.
pub fn mean_entropy_production(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    s: &PropagationSettings,
) -> Result<f64> {
    let wd = tpm_work_distribution(p, beta, s)?;
    let df = wd.free_energy_difference(beta);
    Ok(mean_sigma(&entropy_distribution(&wd, beta, df)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub t: f64,
    /// `S(ρF_t ‖ ρB_{τ−t})`.
    pub kl_forward_backward: f64,
}

/// Cross-check of the mean entropy production against relative entropies.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub protocol: QuenchProtocol,
    /// `β⟨W⟩ − βΔF` from the TPM statistics.
    pub mean_sigma: f64,
    /// `S(ρF_τ ‖ ρ^eq_τ)`.
    pub kl_final_vs_eq: f64,
    /// `S(ρF_τ ‖ ρ^eq_τ) + S_vN(ρF_τ) − S_vN(ρ^eq_0)`.
    pub entropy_decomposition: f64,
    pub rows: Vec<IdentityRow>,
    /// Largest pairwise difference among all the quantities above.
    pub max_deviation: f64,
}

/// Evaluates `⟨Σ⟩` three ways: from the work statistics, from the forward/backward
/// relative entropy at every grid time, and from the final state against the final
/// equilibrium state. The grid must be non-decreasing and inside `[0, τ]`.
pub fn sigma_equals_kl_check(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    s: &PropagationSettings,
    t_grid: &[f64],
) -> Result<IdentityReport> {
    let fwd = p.forward();
    let bwd = p.backward();
    let tau = p.tau();
    let sigma = mean_entropy_production(&fwd, beta, s)?;

    let rho_eq0 = initial_state(&fwd, beta);
    let rho_eq_tau = initial_state(&bwd, beta);

    let mut times: Vec<f64> = t_grid.to_vec();
    if times.last().is_none_or(|&t| t < tau) {
        times.push(tau);
    }
    let us = propagators_at(&fwd, &times, s)?;
    let reversed: Vec<f64> = times.iter().rev().map(|t| tau - t).collect();
    let vs = propagators_at(&bwd, &reversed, s)?;

    let rho_final = rho_eq0.evolve(us.last().expect("non-empty"))?;
    let kl_final = kl_divergence(&rho_final, &rho_eq_tau)?;
    let decomposition = kl_final + vn_entropy(&rho_final) - vn_entropy(&rho_eq0);

    let mut rows = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        let rho_f: DensityMatrix = rho_eq0.evolve(&us[k])?;
        let rho_b = rho_eq_tau.evolve(&vs[times.len() - 1 - k])?;
        rows.push(IdentityRow { t, kl_forward_backward: kl_divergence(&rho_f, &rho_b)? });
    }

    let mut values = vec![sigma, kl_final, decomposition];
    values.extend(rows.iter().map(|r| r.kl_forward_backward));
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);

    Ok(IdentityReport {
        protocol: fwd,
        mean_sigma: sigma,
        kl_final_vs_eq: kl_final,
        entropy_decomposition: decomposition,
        rows,
        max_deviation: hi - lo,
    })
}
