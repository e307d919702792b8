//! Shared fixtures for the benchmarks.

use qarrow_core::{InverseTemperature, QuenchProtocol};

pub const TAUS_US: [f64; 7] = [100.0, 200.0, 260.0, 320.0, 420.0, 500.0, 700.0];

pub fn standard_protocol(tau_us: f64) -> QuenchProtocol {
    QuenchProtocol::new(1.0, 1.8, tau_us * 1e-6).expect("valid protocol")
}

pub fn standard_beta() -> InverseTemperature {
    InverseTemperature::from_spin_temperature_khz(1.56).expect("positive temperature")
}
