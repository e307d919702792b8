//! The transverse-field quench protocol, its forward and time-reversed
//! propagators, and the state trajectories they generate.
//!
//! The forward Hamiltonian is `ν(t)·[σx cos φ(t) + σy sin φ(t)]` with a linear
//! frequency ramp `ν(t) = ν0 (1 − t/τ) + ντ t/τ` and phase `φ(t) = φ_sweep·t/τ`
//! (`φ_sweep = π/2` for the standard protocol). The backward protocol is driven by
//! `H^B_t = −H^F_{τ−t}`, i.e. `d/dt V_t = i H^F_{τ−t} V_t`.

use std::f64::consts::{FRAC_PI_2, TAU as TWO_PI};

use crate::error::{Error, Result};
use crate::matrix::{cross, Mat2};
use crate::qubit::{
    bloch_vector, gibbs_state, unitarity_defect, DensityMatrix, HermitianOperator2,
    InverseTemperature, Unitary2, UNITARITY_TOL,
};

/// Converts `(E/h in kHz) × (t in s)` into a phase in radians.
pub const PHASE_PER_KHZ_SECOND: f64 = TWO_PI * 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn label(&self) -> &'static str {
        match self {
            Direction::Forward => "F",
            Direction::Backward => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    nu0: f64,
    nu_tau: f64,
    tau: f64,
    phase_sweep: f64,
    direction: Direction,
}

impl QuenchProtocol {
    /// Forward protocol ramping `nu0 → nu_tau` (kHz) over `tau` seconds, with the
    /// field rotating from `x` to `y`.
    pub fn new(nu0: f64, nu_tau: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("nu0", nu0), ("nu_tau", nu_tau), ("tau", tau)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(QuenchProtocol {
            nu0,
            nu_tau,
            tau,
            phase_sweep: FRAC_PI_2,
            direction: Direction::Forward,
        })
    }

    /// Overrides the total rotation of the field axis (radians). A sweep of zero
    /// together with `nu0 == nu_tau` gives the trivial (identity) protocol.
    pub fn with_phase_sweep(mut self, phase_sweep: f64) -> Result<Self> {
        if !phase_sweep.is_finite() {
            return Err(Error::Domain("phase sweep must be finite".into()));
        }
        self.phase_sweep = phase_sweep;
        Ok(self)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn forward(self) -> Self {
        self.with_direction(Direction::Forward)
    }

    pub fn backward(self) -> Self {
        self.with_direction(Direction::Backward)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        let p = QuenchProtocol::new(self.nu0, self.nu_tau, tau)?;
        Ok(QuenchProtocol { phase_sweep: self.phase_sweep, direction: self.direction, ..p })
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn nu_tau(&self) -> f64 {
        self.nu_tau
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn phase_sweep(&self) -> f64 {
        self.phase_sweep
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Field strength of the forward schedule, kHz.
    pub fn frequency_at(&self, t: f64) -> f64 {
        let x = t / self.tau;
        self.nu0 * (1.0 - x) + self.nu_tau * x
    }

    /// Field angle of the forward schedule, radians.
    pub fn phase_at(&self, t: f64) -> f64 {
        self.phase_sweep * t / self.tau
    }

    /// Pauli vector of the forward Hamiltonian `H^F_t`.
    pub fn forward_field(&self, t: f64) -> [f64; 3] {
        let (s, c) = self.phase_at(t).sin_cos();
        let nu = self.frequency_at(t);
        [nu * c, nu * s, 0.0]
    }

    /// Pauli vector of the Hamiltonian driving this protocol's direction.
    fn driving_field(&self, t: f64) -> [f64; 3] {
        match self.direction {
            Direction::Forward => self.forward_field(t),
            Direction::Backward => {
                let f = self.forward_field(self.tau - t);
                [-f[0], -f[1], -f[2]]
            }
        }
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.tau;
        if !t.is_finite() || t < -slack || t > self.tau + slack {
            return Err(Error::Domain(format!(
                "time {t:e} s outside [0, {:e}] s",
                self.tau
            )));
        }
        Ok(t.clamp(0.0, self.tau))
    }

    /// `H^F_t` for the forward direction, `H^B_t = −H^F_{τ−t}` for the backward one.
    pub fn hamiltonian_at(&self, t: f64) -> Result<HermitianOperator2> {
        let t = self.check_time(t)?;
        Ok(HermitianOperator2::from_pauli(0.0, self.driving_field(t)))
    }

    /// Hamiltonian whose Gibbs state starts the protocol and whose eigenbasis is
    /// measured first: `H^F_0` forward, `H^F_τ` backward.
    pub fn initial_energy_operator(&self) -> HermitianOperator2 {
        let t = match self.direction {
            Direction::Forward => 0.0,
            Direction::Backward => self.tau,
        };
        HermitianOperator2::from_pauli(0.0, self.forward_field(t))
    }

    /// Hamiltonian measured at the end: `H^F_τ` forward, `H^F_0` backward.
    pub fn final_energy_operator(&self) -> HermitianOperator2 {
        let t = match self.direction {
            Direction::Forward => self.tau,
            Direction::Backward => 0.0,
        };
        HermitianOperator2::from_pauli(0.0, self.forward_field(t))
    }

    /// Field strengths `(start, end)` in kHz for this direction.
    pub fn endpoint_frequencies(&self) -> (f64, f64) {
        match self.direction {
            Direction::Forward => (self.nu0, self.nu_tau),
            Direction::Backward => (self.nu_tau, self.nu0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exponential of the midpoint Hamiltonian on each step (second order).
    Midpoint,
    /// Two-point Gauss–Legendre Magnus step with the commutator correction
    /// (fourth order).
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    /// Steps per full protocol duration τ.
    pub n_steps: usize,
    pub unitarity_tol: f64,
    pub scheme: Scheme,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        PropagationSettings {
            n_steps: 2000,
            unitarity_tol: UNITARITY_TOL,
            scheme: Scheme::Magnus4,
        }
    }
}

impl PropagationSettings {
    pub fn with_steps(n_steps: usize) -> Self {
        PropagationSettings { n_steps, ..Default::default() }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if !(self.unitarity_tol > 0.0) {
            return Err(Error::Config("unitarity_tol must be positive".into()));
        }
        Ok(())
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6
const MAGNUS_COMMUTATOR: f64 = 0.144_337_567_297_406_44; // √3/12

/// One exact exponential step of length `h` starting at `t0`.
fn step(p: &QuenchProtocol, t0: f64, h: f64, scheme: Scheme) -> Mat2 {
    let c = PHASE_PER_KHZ_SECOND;
    let x = match scheme {
        Scheme::Midpoint => {
            let a = p.driving_field(t0 + 0.5 * h);
            [c * h * a[0], c * h * a[1], c * h * a[2]]
        }
        Scheme::Magnus4 => {
            let a = p.driving_field(t0 + (0.5 - GAUSS_OFFSET) * h);
            let b = p.driving_field(t0 + (0.5 + GAUSS_OFFSET) * h);
            // Ω = −i x·σ with x = c h (a+b)/2 + 2 (√3/12) (c h)² (b × a)
            let k = 2.0 * MAGNUS_COMMUTATOR * (c * h) * (c * h);
            let ba = cross(b, a);
            [
                0.5 * c * h * (a[0] + b[0]) + k * ba[0],
                0.5 * c * h * (a[1] + b[1]) + k * ba[1],
                0.5 * c * h * (a[2] + b[2]) + k * ba[2],
            ]
        }
    };
    Mat2::su2_exp(x)
}

/// Splits `t` into whole steps of `dt` plus a remainder.
fn split_time(t: f64, dt: f64, max_steps: usize) -> (usize, f64) {
    let x = t / dt;
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        let k = (nearest as usize).min(max_steps);
        return (k, 0.0);
    }
    let k = (x.floor() as usize).min(max_steps);
    (k, t - k as f64 * dt)
}

/// Propagators of `p` (forward `U_t` or backward `V_t`, according to its direction)
/// at each of the non-decreasing `times`, from a single sweep over the step grid.
///
/// Each entry equals what [`propagator`] returns for that time alone.
pub fn propagators_at(
    p: &QuenchProtocol,
    times: &[f64],
    s: &PropagationSettings,
) -> Result<Vec<Unitary2>> {
    s.validate()?;
    let dt = p.tau / s.n_steps as f64;
    let mut u = Mat2::identity();
    let mut done = 0usize;
    let mut last = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let t = p.check_time(t)?;
        if t < last {
            return Err(Error::Domain("propagation times must be non-decreasing".into()));
        }
        last = t;
        let (k, rem) = split_time(t, dt, s.n_steps);
        while done < k {
            u = step(p, done as f64 * dt, dt, s.scheme) * u;
            done += 1;
        }
        let result = if rem > 0.0 {
            step(p, k as f64 * dt, rem, s.scheme) * u
        } else {
            u
        };
        let defect = unitarity_defect(&result);
        if !(defect <= s.unitarity_tol) {
            return Err(Error::Tolerance(format!(
                "propagator unitarity defect {defect:e} at t = {t:e} s"
            )));
        }
        out.push(Unitary2::from_matrix_unchecked(result));
    }
    Ok(out)
}

/// Time-ordered propagator from 0 to `t` for the protocol's own direction.
pub fn propagator(p: &QuenchProtocol, t: f64, s: &PropagationSettings) -> Result<Unitary2> {
    Ok(propagators_at(p, &[t], s)?.remove(0))
}

/// `V_t`, integrated from the backward generator `d/dt V = i H^F_{τ−t} V`.
pub fn backward_propagator(
    p: &QuenchProtocol,
    t: f64,
    s: &PropagationSettings,
) -> Result<Unitary2> {
    propagator(&p.backward(), t, s)
}

/// Equilibrium state the protocol starts from (`ρ^eq_0` forward, `ρ^eq_τ` backward).
pub fn initial_state(p: &QuenchProtocol, beta: InverseTemperature) -> DensityMatrix {
    gibbs_state(&p.initial_energy_operator(), beta)
}

/// `ρ^F_t = U_t ρ^eq_0 U_t†`.
pub fn forward_state(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    t: f64,
    s: &PropagationSettings,
) -> Result<DensityMatrix> {
    let p = p.forward();
    initial_state(&p, beta).evolve(&propagator(&p, t, s)?)
}

/// `ρ^B_t = V_t ρ^eq_τ V_t†`, `t` being the time elapsed in the backward protocol.
pub fn backward_state(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    t: f64,
    s: &PropagationSettings,
) -> Result<DensityMatrix> {
    let p = p.backward();
    initial_state(&p, beta).evolve(&propagator(&p, t, s)?)
}

/// States of the protocol (in its own direction) at the given non-decreasing times.
pub fn states_at(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    times: &[f64],
    s: &PropagationSettings,
) -> Result<Vec<DensityMatrix>> {
    let rho0 = initial_state(p, beta);
    propagators_at(p, times, s)?
        .iter()
        .map(|u| rho0.evolve(u))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectory {
    /// Seconds, strictly increasing over `[0, τ]`.
    pub times: Vec<f64>,
    pub vectors: Vec<[f64; 3]>,
    pub protocol: QuenchProtocol,
}

/// `n` uniformly spaced times covering `[0, τ]`, with the end point exact.
pub fn uniform_grid(tau: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| if k + 1 == n { tau } else { tau * k as f64 / (n - 1) as f64 })
        .collect()
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::Config(format!("trajectory needs at least 2 samples, got {n_samples}")));
    }
    Ok(())
}

/// Bloch vectors along the protocol in its own direction.
pub fn trajectory(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    n_samples: usize,
    s: &PropagationSettings,
) -> Result<BlochTrajectory> {
    check_samples(n_samples)?;
    let times = uniform_grid(p.tau, n_samples);
    let vectors = states_at(p, beta, &times, s)?.iter().map(bloch_vector).collect();
    Ok(BlochTrajectory { times, vectors, protocol: *p })
}

/// The `τ → ∞` reference path: populations stay at their initial Gibbs values
/// while the state follows the instantaneous eigenbasis, so the Bloch vector keeps
/// magnitude `tanh(βν_start)` and points against the instantaneous field.
pub fn quasistatic_trajectory(
    p: &QuenchProtocol,
    beta: InverseTemperature,
    n_samples: usize,
) -> Result<BlochTrajectory> {
    check_samples(n_samples)?;
    let times = uniform_grid(p.tau, n_samples);
    let (nu_start, _) = p.endpoint_frequencies();
    let magnitude = (beta.value() * nu_start).tanh();
    let vectors = times
        .iter()
        .map(|&t| {
            let forward_t = match p.direction {
                Direction::Forward => t,
                Direction::Backward => p.tau - t,
            };
            let (s, c) = p.phase_at(forward_t).sin_cos();
            [-magnitude * c, -magnitude * s, 0.0]
        })
        .collect();
    Ok(BlochTrajectory { times, vectors, protocol: *p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{kl_divergence, vn_entropy, SPIN_TEMPERATURE_KHZ};
    use approx::assert_abs_diff_eq;

    const STANDARD_TAUS_US: [f64; 7] = [100.0, 200.0, 260.0, 320.0, 420.0, 500.0, 700.0];

    fn beta() -> InverseTemperature {
        InverseTemperature::from_spin_temperature_khz(SPIN_TEMPERATURE_KHZ).unwrap()
    }

    fn protocol(tau: f64) -> QuenchProtocol {
        QuenchProtocol::new(1.0, 1.8, tau).unwrap()
    }

    #[test]
    fn hamiltonian_endpoints() {
        let p = protocol(100e-6);
        let h0 = p.hamiltonian_at(0.0).unwrap();
        assert!(h0.matrix().max_abs_diff(&Mat2::from_pauli(0.0, [1.0, 0.0, 0.0])) < 1e-15);
        assert_eq!(h0.eigen().values, [-1.0, 1.0]);
        let ht = p.hamiltonian_at(100e-6).unwrap();
        assert!(ht.matrix().max_abs_diff(&Mat2::from_pauli(0.0, [0.0, 1.8, 0.0])) < 1e-15);
        let ev = ht.eigen().values;
        assert_abs_diff_eq!(ev[0], -1.8, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 1.8, epsilon = 1e-15);
        assert_eq!(h0.trace(), 0.0);
    }

    #[test]
    fn backward_hamiltonian_is_negated_reverse() {
        let f = protocol(100e-6);
        let b = f.backward();
        for t in uniform_grid(f.tau(), 21) {
            let hb = b.hamiltonian_at(t).unwrap();
            let hf = f.hamiltonian_at(f.tau() - t).unwrap();
            assert!(hb.matrix().max_abs_diff(&(-*hf.matrix())) < 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        let p = protocol(100e-6);
        assert!(matches!(p.hamiltonian_at(-1e-6), Err(Error::Domain(_))));
        assert!(matches!(p.hamiltonian_at(2e-4), Err(Error::Domain(_))));
        assert!(QuenchProtocol::new(1.0, 1.8, 0.0).is_err());
        assert!(QuenchProtocol::new(-1.0, 1.8, 1e-4).is_err());
        assert!(QuenchProtocol::new(1.0, f64::INFINITY, 1e-4).is_err());
        assert!(propagator(&p, 1e-4, &PropagationSettings::with_steps(0)).is_err());
    }

    #[test]
    fn propagator_identity_at_zero() {
        let p = protocol(100e-6);
        let s = PropagationSettings::default();
        assert_eq!(propagator(&p, 0.0, &s).unwrap(), Unitary2::identity());
        assert_eq!(backward_propagator(&p, 0.0, &s).unwrap(), Unitary2::identity());
    }

    #[test]
    fn step_doubling_converged() {
        let p = protocol(100e-6);
        let a = propagator(&p, p.tau(), &PropagationSettings::with_steps(2000)).unwrap();
        let b = propagator(&p, p.tau(), &PropagationSettings::with_steps(4000)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8, "{:e}", a.max_abs_diff(&b));
    }

    #[test]
    fn midpoint_is_second_order() {
        let p = protocol(100e-6);
        let reference = propagator(&p, p.tau(), &PropagationSettings::with_steps(16000)).unwrap();
        let err = |n| {
            let s = PropagationSettings::with_steps(n).with_scheme(Scheme::Midpoint);
            propagator(&p, p.tau(), &s).unwrap().max_abs_diff(&reference)
        };
        let ratio = err(2000) / err(4000);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        // against the midpoint scheme's own 16000-step reference, as a cross-check
        let own = propagator(
            &p,
            p.tau(),
            &PropagationSettings::with_steps(16000).with_scheme(Scheme::Midpoint),
        )
        .unwrap();
        let e = |n| {
            let s = PropagationSettings::with_steps(n).with_scheme(Scheme::Midpoint);
            propagator(&p, p.tau(), &s).unwrap().max_abs_diff(&own)
        };
        let r = e(2000) / e(4000);
        assert!(r > 3.5 && r < 4.5, "ratio {r}");
    }

    #[test]
    fn magnus4_is_fourth_order() {
        let p = protocol(700e-6);
        let reference = propagator(&p, p.tau(), &PropagationSettings::with_steps(4000)).unwrap();
        let err = |n| {
            propagator(&p, p.tau(), &PropagationSettings::with_steps(n))
                .unwrap()
                .max_abs_diff(&reference)
        };
        let ratio = err(100) / err(200);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn sudden_limit_is_identity() {
        // |U − 1| ≈ 2π·|∫ν(t)e^{iφ(t)}dt| ≈ 7.9e-6 at 1 ns, shrinking linearly with τ
        let dev = |tau: f64| {
            let p = protocol(tau);
            propagator(&p, p.tau(), &PropagationSettings::default())
                .unwrap()
                .max_abs_diff(&Unitary2::identity())
        };
        assert!(dev(1e-9) < 1e-5);
        assert!(dev(1e-10) < 1e-6);
        assert_abs_diff_eq!(dev(1e-9) / dev(1e-10), 10.0, epsilon = 1e-3);
    }

    #[test]
    fn reversal_identity() {
        let s = PropagationSettings::default();
        for tau_us in STANDARD_TAUS_US {
            let p = protocol(tau_us * 1e-6);
            let grid = uniform_grid(p.tau(), 21);
            let us = propagators_at(&p, &grid, &s).unwrap();
            let u_tau = *us.last().unwrap();
            let back_times: Vec<f64> = grid.iter().rev().map(|t| p.tau() - t).collect();
            let vs = propagators_at(&p.backward(), &back_times, &s).unwrap();
            for (k, u_t) in us.iter().enumerate() {
                let v = vs[grid.len() - 1 - k];
                let predicted = *u_t * u_tau.adjoint();
                assert!(v.max_abs_diff(&predicted) < 1e-8);
            }
            let v_tau = backward_propagator(&p, p.tau(), &s).unwrap();
            assert!(v_tau.max_abs_diff(&u_tau.adjoint()) < 1e-8);
        }
    }

    #[test]
    fn reversal_identity_midpoint() {
        let s = PropagationSettings::default().with_scheme(Scheme::Midpoint);
        let p = protocol(100e-6);
        for t in [0.0, 25e-6, 50e-6, 75e-6, 100e-6] {
            let u_t = propagator(&p, t, &s).unwrap();
            let u_tau = propagator(&p, p.tau(), &s).unwrap();
            let v = backward_propagator(&p, p.tau() - t, &s).unwrap();
            assert!(v.max_abs_diff(&(u_t * u_tau.adjoint())) < 1e-8);
        }
    }

    #[test]
    fn batched_matches_single() {
        let p = protocol(260e-6);
        let s = PropagationSettings::default();
        let times = [0.0, 1.234e-5, 1.3e-5, 2.6e-4];
        let batch = propagators_at(&p, &times, &s).unwrap();
        for (t, u) in times.iter().zip(&batch) {
            assert_eq!(*u, propagator(&p, *t, &s).unwrap());
        }
        assert!(propagators_at(&p, &[1e-5, 0.0], &s).is_err());
    }

    #[test]
    fn unitarity_along_grid() {
        let p = protocol(500e-6);
        let s = PropagationSettings::default();
        for u in propagators_at(&p, &uniform_grid(p.tau(), 21), &s).unwrap() {
            assert!(unitarity_defect(u.matrix()) < 1e-10);
        }
    }

    #[test]
    fn state_endpoints() {
        let p = protocol(100e-6);
        let s = PropagationSettings::default();
        let rho0 = forward_state(&p, beta(), 0.0, &s).unwrap();
        assert_eq!(rho0, gibbs_state(&p.hamiltonian_at(0.0).unwrap(), beta()));
        let rb = backward_state(&p, beta(), 0.0, &s).unwrap();
        assert_eq!(rb, gibbs_state(&p.hamiltonian_at(p.tau()).unwrap(), beta()));
    }

    #[test]
    fn entropy_constant_along_trajectory() {
        let p = protocol(100e-6);
        let s = PropagationSettings::default();
        let states = states_at(&p, beta(), &uniform_grid(p.tau(), 21), &s).unwrap();
        let s0 = vn_entropy(&states[0]);
        for rho in &states {
            assert!((vn_entropy(rho) - s0).abs() < 1e-10);
        }
    }

    #[test]
    fn kl_time_invariance() {
        let s = PropagationSettings::default();
        let b = beta();
        for tau_us in STANDARD_TAUS_US {
            let p = protocol(tau_us * 1e-6);
            let grid = uniform_grid(p.tau(), 21);
            let fwd = states_at(&p, b, &grid, &s).unwrap();
            let eq_tau = initial_state(&p.backward(), b);
            let reference = kl_divergence(fwd.last().unwrap(), &eq_tau).unwrap();
            for (t, rho_f) in grid.iter().zip(&fwd) {
                let rho_b = backward_state(&p, b, p.tau() - t, &s).unwrap();
                let d = kl_divergence(rho_f, &rho_b).unwrap();
                assert!((d - reference).abs() < 1e-8, "tau {tau_us} t {t}: {d} vs {reference}");
            }
        }
    }

    #[test]
    fn trajectory_examples() {
        let p = protocol(100e-6);
        let s = PropagationSettings::default();
        let tr = trajectory(&p, beta(), 21, &s).unwrap();
        assert_eq!(tr.times.len(), 21);
        assert_eq!(tr.vectors.len(), 21);
        for (k, t) in tr.times.iter().enumerate() {
            assert_abs_diff_eq!(*t * 1e6, 5.0 * k as f64, epsilon = 1e-9);
        }
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        let r0 = tr.vectors[0];
        assert_abs_diff_eq!(r0[0], -0.56560, epsilon = 5e-6);
        assert_abs_diff_eq!(r0[1], 0.0, epsilon = 1e-15);
        let n0 = crate::matrix::norm3(r0);
        for r in &tr.vectors {
            assert!((crate::matrix::norm3(*r) - n0).abs() < 1e-10);
        }
        assert!(trajectory(&p, beta(), 1, &s).is_err());
    }

    #[test]
    fn quasistatic_examples() {
        let p = protocol(100e-6);
        let s = PropagationSettings::default();
        let q = quasistatic_trajectory(&p, beta(), 21).unwrap();
        let tr = trajectory(&p, beta(), 21, &s).unwrap();
        assert_abs_diff_eq!(q.vectors[0][0], tr.vectors[0][0], epsilon = 1e-15);
        assert_abs_diff_eq!(q.vectors[0][1], tr.vectors[0][1], epsilon = 1e-15);
        let end = q.vectors[20];
        assert_abs_diff_eq!(end[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(end[1], -0.56560, epsilon = 5e-6);
        assert!(q.vectors.iter().all(|r| r[2] == 0.0));
        // a very slow quench tracks the quasistatic path
        let slow = protocol(50e-3);
        let tr = trajectory(&slow, beta(), 21, &s).unwrap();
        let q = quasistatic_trajectory(&slow, beta(), 21).unwrap();
        for (a, b) in tr.vectors.iter().zip(&q.vectors) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 5e-3);
            }
        }
    }

    #[test]
    fn backward_trajectory_starts_at_final_gibbs() {
        let p = protocol(100e-6).backward();
        let tr = trajectory(&p, beta(), 21, &PropagationSettings::default()).unwrap();
        let r0 = tr.vectors[0];
        assert_abs_diff_eq!(r0[1], -(1.8f64 / 1.56).tanh(), epsilon = 1e-14);
        let q = quasistatic_trajectory(&p, beta(), 21).unwrap();
        assert_abs_diff_eq!(q.vectors[0][1], r0[1], epsilon = 1e-14);
        assert_abs_diff_eq!(q.vectors[20][0], -(1.8f64 / 1.56).tanh(), epsilon = 1e-14);
    }
}
