//! Ancilla-assisted measurement of the work characteristic function.
//!
//! `χ(u) = Σ_{m,n} p_n p_{m|n} e^{iu(ε̄_m − ε_n)}` is evaluated two ways: directly
//! from the trace formula `tr[(U e^{−iuH_0}) ρ (e^{−iuH_τ} U)†]`, and by simulating
//! the controlled evolution of an ancilla ⊗ system register and reading out the
//! ancilla transverse magnetization. The sampled series is then inverted by a
//! discrete Fourier transform or fitted by linear least squares at the expected
//! peak frequencies.
//!
//! `u` is in seconds; energies enter the phases as angular frequencies
//! `2π · 1e3 · (E/h in kHz)`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::matrix::{Mat2, C64};
use crate::qubit::{DensityMatrix, HermitianOperator2, InverseTemperature, Unitary2};
use crate::quench::{
    initial_state, propagator, Direction, PropagationSettings, QuenchProtocol,
    PHASE_PER_KHZ_SECOND,
};
use crate::workstats::{expected_peaks, WorkDistribution, WorkPeak};

/// Scalar coupling between the ancilla and system spins in the NMR realization, Hz.
/// Only relates `s` to the physical free-evolution delay; not used in the simulation.
pub const SCALAR_COUPLING_HZ: f64 = 215.1;

/// Default number of samples of the characteristic function.
pub const DEFAULT_SAMPLES: usize = 360;
/// Default total span of the `u` grid, seconds. Gives a 0.4 kHz frequency bin,
/// which puts the standard protocol's peaks at ±0.8 and ±2.8 kHz exactly on bins.
pub const DEFAULT_U_SPAN: f64 = 2.5e-3;
/// Smallest grid accepted by [`simulate_ramsey`].
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UGrid {
    pub n_samples: usize,
    /// `n_samples · Δu`, seconds.
    pub u_span: f64,
}

impl Default for UGrid {
    fn default() -> Self {
        UGrid { n_samples: DEFAULT_SAMPLES, u_span: DEFAULT_U_SPAN }
    }
}

impl UGrid {
    pub fn spacing(&self) -> f64 {
        self.u_span / self.n_samples as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let du = self.spacing();
        (0..self.n_samples).map(|k| k as f64 * du).collect()
    }

    /// Frequency resolution of the grid in `h·kHz`.
    pub fn bin_width_khz(&self) -> f64 {
        1.0 / self.u_span / 1e3
    }
}

/// Additive Gaussian noise on the real and imaginary parts of each sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
    /// Independent stream of the seeded generator; give each worker its own.
    pub stream: u64,
}

/// Dimensionless label `s = 2π ν0 u` (ν0 in Hz).
pub fn s_parameter(nu0_khz: f64, u: f64) -> f64 {
    PHASE_PER_KHZ_SECOND * nu0_khz * u
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharFuncSeries {
    pub u_grid: Vec<f64>,
    pub samples: Vec<C64>,
    pub s_parameter: Vec<f64>,
    pub protocol: QuenchProtocol,
}

impl CharFuncSeries {
    pub fn direction(&self) -> Direction {
        self.protocol.direction()
    }

    /// Grid spacing; errors unless the grid is uniform and increasing.
    pub fn spacing(&self) -> Result<f64> {
        if self.u_grid.len() < 2 || self.u_grid.len() != self.samples.len() {
            return Err(Error::Grid("series needs at least two samples on its grid".into()));
        }
        let du = (self.u_grid[self.u_grid.len() - 1] - self.u_grid[0])
            / (self.u_grid.len() - 1) as f64;
        if !(du > 0.0) {
            return Err(Error::Grid("u grid must be strictly increasing".into()));
        }
        for w in self.u_grid.windows(2) {
            if ((w[1] - w[0]) - du).abs() > 1e-9 * du {
                return Err(Error::Grid("u grid is not uniform".into()));
            }
        }
        Ok(du)
    }
}

/// `exp(−i u H)` with `H` in kHz, `u` in seconds.
fn energy_phase(h: &HermitianOperator2, u: f64) -> Mat2 {
    let (a0, a) = h.pauli_coefficients();
    let c = PHASE_PER_KHZ_SECOND * u;
    let global = C64::from_polar(1.0, -c * a0);
    Mat2::su2_exp([c * a[0], c * a[1], c * a[2]]).scale(global)
}

fn to_na(m: &Mat2) -> Matrix2<C64> {
    Matrix2::new(m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1])
}

/// Everything the characteristic function needs, computed once per protocol.
#[derive(Debug, Clone)]
pub struct CharFunctionModel {
    protocol: QuenchProtocol,
    u_tau: Unitary2,
    rho: DensityMatrix,
    h_start: HermitianOperator2,
    h_end: HermitianOperator2,
}

impl CharFunctionModel {
    pub fn new(p: &QuenchProtocol, beta: InverseTemperature, s: &PropagationSettings) -> Result<Self> {
        Ok(CharFunctionModel {
            protocol: *p,
            u_tau: propagator(p, p.tau(), s)?,
            rho: initial_state(p, beta),
            h_start: p.initial_energy_operator(),
            h_end: p.final_energy_operator(),
        })
    }

    pub fn protocol(&self) -> &QuenchProtocol {
        &self.protocol
    }

    /// The two branches of the controlled evolution:
    /// `U e^{−iuH_0}` (ancilla |0⟩) and `e^{−iuH_τ} U` (ancilla |1⟩).
    fn branches(&self, u: f64) -> (Mat2, Mat2) {
        let ut = *self.u_tau.matrix();
        (
            ut * energy_phase(&self.h_start, u),
            energy_phase(&self.h_end, u) * ut,
        )
    }

    /// Trace formula `tr[(U e^{−iuH_0}) ρ (e^{−iuH_τ} U)†]`.
    pub fn direct(&self, u: f64) -> C64 {
        let (a0, a1) = self.branches(u);
        (a0 * *self.rho.matrix() * a1.adjoint()).trace()
    }

    /// Interferometric readout: the register `|+⟩⟨+| ⊗ ρ` evolves under
    /// `G(u) = |0⟩⟨0| ⊗ A_0 + |1⟩⟨1| ⊗ A_1`; the system is traced out and
    /// `χ = ⟨σx⟩ − i⟨σy⟩` is formed from the ancilla.
    pub fn ramsey(&self, u: f64) -> C64 {
        let (a0, a1) = self.branches(u);
        let half = C64::new(0.5, 0.0);
        let plus = Matrix2::from_element(half);
        let joint: Matrix4<C64> = plus.kronecker(&to_na(self.rho.matrix()));

        let mut g = Matrix4::<C64>::zeros();
        g.fixed_view_mut::<2, 2>(0, 0).copy_from(&to_na(&a0));
        g.fixed_view_mut::<2, 2>(2, 2).copy_from(&to_na(&a1));
        let out = g * joint * g.adjoint();

        let mut ancilla = Matrix2::<C64>::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for s in 0..2 {
                    ancilla[(a, b)] += out[(2 * a + s, 2 * b + s)];
                }
            }
        }
        let i = C64::new(0.0, 1.0);
        let sigma_x = Matrix2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let sigma_y = Matrix2::new(C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0));
        let mx = (ancilla * sigma_x).trace().re;
        let my = (ancilla * sigma_y).trace().re;
        C64::new(mx, -my)
    }
}

/// `χ(u)` from the trace formula, with a freshly simulated `U_τ`.
pub fn char_function_direct(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    u: f64,
    s: &PropagationSettings,
) -> Result<C64> {
    Ok(CharFunctionModel::new(p, beta, s)?.direct(u))
}

/// Samples `χ(u)` through the simulated interferometer on a uniform grid starting
/// at `u = 0`, optionally adding Gaussian noise.
pub fn simulate_ramsey(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    grid: &UGrid,
    noise: Option<&NoiseModel>,
    s: &PropagationSettings,
) -> Result<CharFuncSeries> {
    if grid.n_samples < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            grid.n_samples
        )));
    }
    if !(grid.u_span > 0.0) || !grid.u_span.is_finite() {
        return Err(Error::Config(format!("u span must be positive, got {}", grid.u_span)));
    }
    let model = CharFunctionModel::new(p, beta, s)?;
    let u_grid = grid.points();
    let mut samples: Vec<C64> = u_grid.iter().map(|&u| model.ramsey(u)).collect();

    if let Some(noise) = noise {
        if !(noise.sigma >= 0.0) || !noise.sigma.is_finite() {
            return Err(Error::Config(format!("noise sigma must be non-negative, got {}", noise.sigma)));
        }
        if noise.sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(noise.stream);
            let normal = Normal::new(0.0, noise.sigma).expect("valid sigma");
            for z in &mut samples {
                let re = normal.sample(&mut rng);
                let im = normal.sample(&mut rng);
                *z += C64::new(re, im);
            }
        }
    }

    let nu0 = p.nu0();
    Ok(CharFuncSeries {
        s_parameter: u_grid.iter().map(|&u| s_parameter(nu0, u)).collect(),
        u_grid,
        samples,
        protocol: *p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBin {
    /// Bin centre, `h·kHz`.
    pub work: f64,
    pub amplitude: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DftEstimate {
    /// Full spectrum, ascending in work.
    pub bins: Vec<SpectrumBin>,
    pub bin_width: f64,
    /// Indices into `bins` of the bins nearest each expected peak.
    pub peak_bins: Vec<usize>,
    /// Real parts of the peak bins as a work distribution.
    pub distribution: WorkDistribution,
}

impl DftEstimate {
    /// Total modulus of the spectrum outside the peak bins.
    pub fn off_peak_mass(&self) -> f64 {
        self.bins
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.peak_bins.contains(k))
            .map(|(_, b)| b.amplitude.norm())
            .sum()
    }
}

/// Inverse DFT `P_j = (1/N) Σ_k χ(u_k) e^{−2πi f_j u_k}` onto bins of width
/// `1/(N Δu)`, plus the bins nearest the peaks expected for the protocol.
pub fn inverse_dft(series: &CharFuncSeries) -> Result<DftEstimate> {
    let du = series.spacing()?;
    let n = series.samples.len();
    let mut buf = series.samples.clone();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / n as f64;
    let bin_width = 1.0 / (n as f64 * du) / 1e3;

    // bin index j ↔ frequency j (j < N/2 rounded up) or j − N
    let lowest = -((n / 2) as i64);
    let highest = lowest + n as i64 - 1;
    let bins: Vec<SpectrumBin> = (lowest..=highest)
        .map(|j| {
            let idx = j.rem_euclid(n as i64) as usize;
            SpectrumBin { work: j as f64 * bin_width, amplitude: buf[idx] * norm }
        })
        .collect();

    let mut peak_bins = Vec::with_capacity(4);
    let mut peaks = Vec::with_capacity(4);
    for (w, level_n, level_m) in expected_peaks(&series.protocol) {
        let j = (w / bin_width).round() as i64;
        if j < lowest || j > highest || (w - j as f64 * bin_width).abs() > 0.5 * bin_width * (1.0 + 1e-9) {
            return Err(Error::Grid(format!(
                "expected peak at {w} h·kHz lies outside the resolvable band ±{}",
                0.5 * n as f64 * bin_width
            )));
        }
        let k = (j - lowest) as usize;
        peak_bins.push(k);
        peaks.push(WorkPeak {
            work: w,
            probability: bins[k].amplitude.re,
            initial_level: level_n,
            final_level: level_m,
            uncertainty: None,
        });
    }
    Ok(DftEstimate {
        bins,
        bin_width,
        peak_bins,
        distribution: WorkDistribution::new(peaks, series.protocol)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFitResult {
    /// `h·kHz`.
    pub locations: [f64; 4],
    pub amplitudes: [f64; 4],
    /// Standard errors of the amplitudes, scaled by the residual noise floor.
    pub std_errors: [f64; 4],
    pub residual_norm: f64,
    /// Residual RMS per real component, an estimate of the sample noise.
    pub noise_floor: f64,
}

impl PeakFitResult {
    /// The fitted model `Σ_k a_k e^{iω_k u}`; evaluating it on the grid removes
    /// all other frequency content.
    pub fn model_at(&self, u: f64) -> C64 {
        self.locations
            .iter()
            .zip(&self.amplitudes)
            .map(|(w, a)| C64::from_polar(*a, PHASE_PER_KHZ_SECOND * w * u))
            .sum()
    }

    /// Copy of `series` with each sample replaced by the fitted model.
    pub fn filtered(&self, series: &CharFuncSeries) -> CharFuncSeries {
        CharFuncSeries {
            samples: series.u_grid.iter().map(|&u| self.model_at(u)).collect(),
            ..series.clone()
        }
    }
}

/// Linear least squares of the sampled `χ(u)` on the columns `e^{iω_k u}`.
/// Real and imaginary parts are stacked so the amplitudes come out real.
pub fn fit_peaks(series: &CharFuncSeries, expected_locations: [f64; 4]) -> Result<PeakFitResult> {
    series.spacing()?;
    for i in 0..4 {
        if !expected_locations[i].is_finite() {
            return Err(Error::Domain("peak locations must be finite".into()));
        }
        for j in 0..i {
            if expected_locations[i] == expected_locations[j] {
                return Err(Error::Domain(format!(
                    "duplicate expected peak location {}",
                    expected_locations[i]
                )));
            }
        }
    }
    let n = series.samples.len();
    let rows = 2 * n;
    let mut a = DMatrix::<f64>::zeros(rows, 4);
    let mut y = DVector::<f64>::zeros(rows);
    for (k, (&u, z)) in series.u_grid.iter().zip(&series.samples).enumerate() {
        for (c, w) in expected_locations.iter().enumerate() {
            let (s, co) = (PHASE_PER_KHZ_SECOND * w * u).sin_cos();
            a[(2 * k, c)] = co;
            a[(2 * k + 1, c)] = s;
        }
        y[2 * k] = z.re;
        y[2 * k + 1] = z.im;
    }

    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::SingularFit(format!(
            "design matrix condition {:e}; expected frequencies alias on this grid",
            smax / smin
        )));
    }
    let coef = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::SingularFit(e.to_string()))?;
    let resid = &y - &a * &coef;
    let rss = resid.norm_squared();
    let dof = rows.saturating_sub(4).max(1) as f64;
    let noise_floor = (rss / dof).sqrt();

    // (AᵀA)⁻¹ = V Σ⁻² Vᵀ
    let v_t = svd.v_t.as_ref().expect("computed");
    let mut std_errors = [0.0; 4];
    for (c, se) in std_errors.iter_mut().enumerate() {
        let var: f64 = (0..4).map(|k| (v_t[(k, c)] / sv[k]).powi(2)).sum();
        *se = noise_floor * var.sqrt();
    }

    let mut amplitudes = [0.0; 4];
    for c in 0..4 {
        amplitudes[c] = coef[c];
    }
    Ok(PeakFitResult {
        locations: expected_locations,
        amplitudes,
        std_errors,
        residual_norm: rss.sqrt(),
        noise_floor,
    })
}

/// Turns a peak fit into a work distribution labelled with the protocol's
/// energy levels; the fit's standard errors become peak uncertainties.
pub fn fitted_distribution(fit: &PeakFitResult, protocol: &QuenchProtocol) -> Result<WorkDistribution> {
    let expected = expected_peaks(protocol);
    let mut peaks = Vec::with_capacity(4);
    for (k, &loc) in fit.locations.iter().enumerate() {
        let &(w, n, m) = expected
            .iter()
            .find(|(w, _, _)| (w - loc).abs() < 1e-9)
            .ok_or_else(|| Error::Support(format!("fitted location {loc} is not a peak of the protocol")))?;
        peaks.push(WorkPeak {
            work: w,
            probability: fit.amplitudes[k],
            initial_level: n,
            final_level: m,
            uncertainty: Some(fit.std_errors[k]),
        });
    }
    WorkDistribution::new(peaks, *protocol)
}

/// Expected peak locations of the protocol, ascending, as a fixed array.
pub fn expected_locations(p: &QuenchProtocol) -> [f64; 4] {
    let e = expected_peaks(p);
    [e[0].0, e[1].0, e[2].0, e[3].0]
}

/// Full measurement chain: simulate the interferometer, fit the four peaks, and
/// return the resulting work distribution together with the raw series and fit.
pub fn measure_work_distribution(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    grid: &UGrid,
    noise: Option<&NoiseModel>,
    s: &PropagationSettings,
) -> Result<(CharFuncSeries, PeakFitResult, WorkDistribution)> {
    let series = simulate_ramsey(p, beta, grid, noise, s)?;
    let fit = fit_peaks(&series, expected_locations(p))?;
    let wd = fitted_distribution(&fit, p)?;
    Ok((series, fit, wd))
}
