//! Driven-qubit quench simulation: forward and backward dynamics, two-point
//! measurement work statistics, interferometric characteristic functions and
//! fluctuation-relation fits.
//!
//! Energies are `E/h` in kHz, times in seconds, and the inverse temperature is
//! stored as `βh` in kHz⁻¹.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crooksfit;
pub mod error;
pub mod export;
pub mod interferometer;
pub mod matrix;
pub mod qubit;
pub mod quench;
pub mod workstats;

pub use crooksfit::{fit_durations, fit_line, log_ratio_points, CrooksFitResult, FitMode, LogRatioPoint};
pub use error::{Error, Result};
pub use interferometer::{
    char_function_direct, fit_peaks, inverse_dft, simulate_ramsey, CharFuncSeries, NoiseModel,
    PeakFitResult, UGrid,
};
pub use matrix::{Mat2, C64};
pub use qubit::{DensityMatrix, HermitianOperator2, InverseTemperature, Unitary2};
pub use quench::{Direction, PropagationSettings, QuenchProtocol, Scheme};
pub use workstats::{
    tpm_work_distribution, EntropyProductionDistribution, IdentityReport, WorkDistribution, WorkPeak,
};
