//! Qubit operators, states and information-theoretic quantities.
//!
//! Energies are stored as `E/h` in kHz and the inverse temperature as `βh`
//! in kHz⁻¹, so every `β·E` product is dimensionless. Entropies are in nats.

use crate::error::{Error, Result};
use crate::matrix::{HermitianEigen, Mat2, C64};

/// Entrywise tolerance for hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_CLIP, 0)` are treated as round-off and clipped to zero.
pub const EIGEN_CLIP: f64 = 1e-12;
/// Default unitarity tolerance.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Spin temperature `k_B T / h` used throughout the experiment, in kHz.
pub const SPIN_TEMPERATURE_KHZ: f64 = 1.56;

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Converts a spin temperature given as `k_B T / h` in kHz into nanokelvin.
/// `1.56 kHz` corresponds to roughly 74.9 nK.
pub fn temperature_nanokelvin(kbt_over_h_khz: f64) -> f64 {
    kbt_over_h_khz * 1e3 * PLANCK / BOLTZMANN * 1e9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Hermitian 2×2 operator, energies in units of `h·kHz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOperator2(Mat2);

impl HermitianOperator2 {
    pub fn new(m: Mat2) -> Result<Self> {
        let dev = m.max_abs_diff(&m.adjoint());
        if !dev.is_finite() || dev > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "operator is not Hermitian (max |M - M†| = {dev:e})"
            )));
        }
        Ok(HermitianOperator2(m.hermitian_part()))
    }

    pub fn from_pauli(a0: f64, a: [f64; 3]) -> Self {
        HermitianOperator2(Mat2::from_pauli(a0, a))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        self.0.pauli_coefficients()
    }

    pub fn eigen(&self) -> HermitianEigen {
        self.0.hermitian_eigen()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator2(self.0.scale_re(s))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

impl std::ops::Neg for HermitianOperator2 {
    type Output = HermitianOperator2;
    fn neg(self) -> Self {
        HermitianOperator2(-self.0)
    }
}

/// 2×2 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(Mat2);

impl Unitary2 {
    pub fn identity() -> Self {
        Unitary2(Mat2::identity())
    }

    pub fn new(m: Mat2, tol: f64) -> Result<Self> {
        let dev = unitarity_defect(&m);
        if !dev.is_finite() || dev > tol {
            return Err(Error::Tolerance(format!(
                "matrix is not unitary (max |U U† - I| = {dev:e}, tol {tol:e})"
            )));
        }
        Ok(Unitary2(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat2) -> Self {
        Unitary2(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Unitary2(self.0.adjoint())
    }

    pub fn compose(&self, next: &Unitary2) -> Self {
        Unitary2(next.0 * self.0)
    }

    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

impl std::ops::Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2(self.0 * rhs.0)
    }
}

/// `max |U U† − I|`.
pub fn unitarity_defect(m: &Mat2) -> f64 {
    (*m * m.adjoint()).max_abs_diff(&Mat2::identity())
}

/// Unit-trace, positive semidefinite 2×2 state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        let herm = m.max_abs_diff(&m.adjoint());
        if !herm.is_finite() || herm > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Validation(format!("density matrix trace is {tr}")));
        }
        let h = m.hermitian_part();
        let low = h.hermitian_eigen().values[0];
        if low < -EIGEN_CLIP {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {low:e}"
            )));
        }
        Ok(DensityMatrix(h))
    }

    /// `(I + r·σ)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        DensityMatrix::new(Mat2::from_pauli(0.5, [0.5 * r[0], 0.5 * r[1], 0.5 * r[2]]))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::diag(0.5, 0.5))
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector is normalized first.
    pub fn pure(psi: [C64; 2]) -> Result<Self> {
        let n = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Validation("zero state vector".into()));
        }
        let (a, b) = (psi[0] / n, psi[1] / n);
        DensityMatrix::new(Mat2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Eigenvalues, ascending, with round-off negatives clipped to zero.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = self.0.hermitian_eigen();
        [e.values[0].max(0.0), e.values[1].max(0.0)]
    }

    pub fn eigen(&self) -> HermitianEigen {
        self.0.hermitian_eigen()
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &Unitary2) -> Result<Self> {
        DensityMatrix::new(self.0.conjugate_by(u.matrix()).hermitian_part())
    }

    /// `tr(ρ A)` for a Hermitian observable.
    pub fn expectation(&self, obs: &HermitianOperator2) -> f64 {
        (self.0 * *obs.matrix()).trace().re
    }
}

/// Standard Pauli matrix.
pub fn pauli(axis: Axis) -> HermitianOperator2 {
    match axis {
        Axis::X => HermitianOperator2::from_pauli(0.0, [1.0, 0.0, 0.0]),
        Axis::Y => HermitianOperator2::from_pauli(0.0, [0.0, 1.0, 0.0]),
        Axis::Z => HermitianOperator2::from_pauli(0.0, [0.0, 0.0, 1.0]),
    }
}

/// Inverse temperature `βh` in kHz⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InverseTemperature(f64);

impl InverseTemperature {
    pub fn new(beta_h: f64) -> Result<Self> {
        if !beta_h.is_finite() || beta_h < 0.0 {
            return Err(Error::Domain(format!(
                "inverse temperature must be finite and non-negative, got {beta_h}"
            )));
        }
        Ok(InverseTemperature(beta_h))
    }

    /// From `k_B T / h` in kHz.
    pub fn from_spin_temperature_khz(kbt_over_h: f64) -> Result<Self> {
        if !kbt_over_h.is_finite() || kbt_over_h <= 0.0 {
            return Err(Error::Domain(format!(
                "spin temperature must be positive, got {kbt_over_h}"
            )));
        }
        InverseTemperature::new(1.0 / kbt_over_h)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Thermal state `e^{−βH} / tr e^{−βH}`. The Boltzmann weights are taken
/// relative to the ground energy so large `β·‖H‖` cannot overflow.
pub fn gibbs_state(h: &HermitianOperator2, beta: InverseTemperature) -> DensityMatrix {
    let eig = h.eigen();
    let ground = eig.values[0];
    let w0 = 1.0;
    let w1 = (-beta.value() * (eig.values[1] - ground)).exp();
    let z = w0 + w1;
    DensityMatrix(
        (eig.projector(0).scale_re(w0 / z) + eig.projector(1).scale_re(w1 / z)).hermitian_part(),
    )
}

fn xlogx(p: f64) -> f64 {
    if p < 1e-15 {
        0.0
    } else {
        p * p.ln()
    }
}

/// Von Neumann entropy `−tr ρ ln ρ` in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    let [a, b] = rho.eigenvalues();
    -(xlogx(a) + xlogx(b))
}

/// Relative entropy `S(ρ‖σ) = tr[ρ (ln ρ − ln σ)]` in nats.
///
/// `tr ρ ln σ` is evaluated in the eigenbasis of `σ`. An eigenvalue of `σ`
/// at or below `1e-12` is only admissible when `ρ` carries no weight on the
/// corresponding eigenvector; otherwise the divergence is infinite and
/// [`Error::Support`] is returned.
pub fn kl_divergence(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho == sigma {
        return Ok(0.0);
    }
    let se = sigma.eigen();
    let mut cross = 0.0;
    for k in 0..2 {
        let lambda = se.values[k];
        let weight = se.expectation(k, rho.matrix());
        if lambda <= EIGEN_CLIP {
            if weight > EIGEN_CLIP {
                return Err(Error::Support(format!(
                    "reference eigenvalue {lambda:e} carries weight {weight:e}"
                )));
            }
            continue;
        }
        cross += weight * lambda.ln();
    }
    Ok(-vn_entropy(rho) - cross)
}

/// `(tr ρσx, tr ρσy, tr ρσz)`.
pub fn bloch_vector(rho: &DensityMatrix) -> [f64; 3] {
    let (_, a) = rho.matrix().pauli_coefficients();
    [2.0 * a[0], 2.0 * a[1], 2.0 * a[2]]
}

/// Trace distance `½ tr|ρ − σ|`, from the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let diff = *rho.matrix() - *sigma.matrix();
    let e = diff.hermitian_eigen();
    0.5 * (e.values[0].abs() + e.values[1].abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn standard_beta() -> InverseTemperature {
        InverseTemperature::from_spin_temperature_khz(SPIN_TEMPERATURE_KHZ).unwrap()
    }

    #[test]
    fn pauli_matrices() {
        let z = pauli(Axis::Z);
        assert_eq!(*z.matrix(), Mat2::diag(1.0, -1.0));
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let p = *pauli(axis).matrix();
            assert!((p * p).max_abs_diff(&Mat2::identity()) < 1e-15);
            assert_eq!(pauli(axis).trace(), 0.0);
        }
        let xy = *pauli(Axis::X).matrix() * *pauli(Axis::Y).matrix();
        assert!(xy.trace().norm() < 1e-15);
    }

    #[test]
    fn gibbs_infinite_temperature() {
        let h = HermitianOperator2::from_pauli(0.0, [0.3, 1.0, -2.0]);
        let rho = gibbs_state(&h, InverseTemperature::new(0.0).unwrap());
        assert!(rho.matrix().max_abs_diff(&Mat2::diag(0.5, 0.5)) < 1e-15);
    }

    #[test]
    fn gibbs_populations_at_standard_temperature() {
        let h = pauli(Axis::X);
        let rho = gibbs_state(&h, standard_beta());
        let eig = h.eigen();
        let p_ground = eig.expectation(0, rho.matrix());
        let p_excited = eig.expectation(1, rho.matrix());
        assert_abs_diff_eq!(p_ground, 0.78280, epsilon = 5e-6);
        assert_abs_diff_eq!(p_excited, 0.21720, epsilon = 5e-6);
        // closed form
        let x: f64 = 1.0 / 1.56;
        assert_abs_diff_eq!(p_ground, x.exp() / (2.0 * x.cosh()), epsilon = 1e-14);
    }

    #[test]
    fn gibbs_ground_state_limit_and_overflow_guard() {
        let rho = gibbs_state(&pauli(Axis::Z), InverseTemperature::new(700.0).unwrap());
        assert!(rho.matrix().max_abs_diff(&Mat2::diag(0.0, 1.0)) < 1e-15);
        let rho = gibbs_state(&pauli(Axis::Z).scale(350.0), InverseTemperature::new(2.0).unwrap());
        assert!(rho.matrix().max_abs_diff(&Mat2::diag(0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn gibbs_commutes_with_hamiltonian() {
        let h = HermitianOperator2::from_pauli(0.2, [0.4, -1.1, 0.6]);
        let rho = gibbs_state(&h, InverseTemperature::new(0.9).unwrap());
        assert!(rho.matrix().commutator(h.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(vn_entropy(&DensityMatrix::maximally_mixed()), 2f64.ln(), epsilon = 1e-15);
        let pure = DensityMatrix::pure([C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        assert_abs_diff_eq!(vn_entropy(&pure), 0.0, epsilon = 1e-12);
        let rho = gibbs_state(&pauli(Axis::X), standard_beta());
        let p: f64 = 0.782_800_5;
        let binary = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        assert_abs_diff_eq!(vn_entropy(&rho), binary, epsilon = 1e-5);
        assert_abs_diff_eq!(vn_entropy(&rho), 0.523, epsilon = 5e-4);
    }

    #[test]
    fn kl_examples() {
        let a = DensityMatrix::new(Mat2::diag(0.9, 0.1)).unwrap();
        let b = DensityMatrix::new(Mat2::diag(0.5, 0.5)).unwrap();
        let classical = 0.9 * (0.9f64 / 0.5).ln() + 0.1 * (0.1f64 / 0.5).ln();
        assert_abs_diff_eq!(kl_divergence(&a, &b).unwrap(), classical, epsilon = 1e-14);
        // the commonly quoted 0.368074 is off in the fifth digit
        assert_abs_diff_eq!(kl_divergence(&a, &b).unwrap(), 0.368064, epsilon = 1e-6);
        assert_eq!(kl_divergence(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn kl_support_error() {
        let pure0 = DensityMatrix::new(Mat2::diag(1.0, 0.0)).unwrap();
        let mixed = DensityMatrix::maximally_mixed();
        assert!(matches!(kl_divergence(&mixed, &pure0), Err(Error::Support(_))));
        // ρ inside the support of σ: finite
        assert_abs_diff_eq!(kl_divergence(&pure0, &mixed).unwrap(), 2f64.ln(), epsilon = 1e-14);
        let near = DensityMatrix::new(Mat2::diag(1.0, 0.0)).unwrap();
        assert_eq!(kl_divergence(&near, &pure0).unwrap(), 0.0);
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(bloch_vector(&DensityMatrix::maximally_mixed()), [0.0, 0.0, 0.0]);
        let up = DensityMatrix::new(Mat2::diag(1.0, 0.0)).unwrap();
        assert_eq!(bloch_vector(&up), [0.0, 0.0, 1.0]);
        let r = bloch_vector(&gibbs_state(&pauli(Axis::X), standard_beta()));
        assert_abs_diff_eq!(r[0], -0.56560, epsilon = 5e-6);
        assert_abs_diff_eq!(r[0], -(1.0f64 / 1.56).tanh(), epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        let a = DensityMatrix::new(Mat2::diag(0.9, 0.1)).unwrap();
        let b = DensityMatrix::new(Mat2::diag(0.87, 0.13)).unwrap();
        assert_abs_diff_eq!(trace_distance(&a, &b), 0.03, epsilon = 1e-14);
        assert_eq!(trace_distance(&a, &a), 0.0);
        let up = DensityMatrix::new(Mat2::diag(1.0, 0.0)).unwrap();
        let down = DensityMatrix::new(Mat2::diag(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(trace_distance(&up, &down), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn validation_rejects_bad_states() {
        assert!(DensityMatrix::new(Mat2::diag(0.6, 0.6)).is_err());
        assert!(DensityMatrix::new(Mat2::diag(1.1, -0.1)).is_err());
        let non_herm = Mat2::new(C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(0.5, 0.0));
        assert!(DensityMatrix::new(non_herm).is_err());
        // round-off negativity is tolerated and clipped
        let rho = DensityMatrix::new(Mat2::diag(1.0 + 5e-13, -5e-13)).unwrap();
        assert_eq!(rho.eigenvalues()[0], 0.0);
        assert!(InverseTemperature::new(f64::NAN).is_err());
        assert!(InverseTemperature::new(-1.0).is_err());
        assert!(Unitary2::new(Mat2::diag(1.0, 2.0), 1e-10).is_err());
    }

    #[test]
    fn effective_temperature_constant() {
        assert_abs_diff_eq!(temperature_nanokelvin(SPIN_TEMPERATURE_KHZ), 74.87, epsilon = 0.01);
    }

    fn bloch_in_ball(max_r: f64) -> impl Strategy<Value = [f64; 3]> {
        (0.0..max_r, -1.0f64..1.0, 0.0..std::f64::consts::TAU).prop_map(|(r, cz, phi)| {
            let s = (1.0 - cz * cz).sqrt();
            [r * s * phi.cos(), r * s * phi.sin(), r * cz]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn klein_inequality(r in bloch_in_ball(1.0), q in bloch_in_ball(0.999)) {
            let rho = DensityMatrix::from_bloch(r).unwrap();
            let sigma = DensityMatrix::from_bloch(q).unwrap();
            let d = kl_divergence(&rho, &sigma).unwrap();
            prop_assert!(d >= -1e-12);
            if trace_distance(&rho, &sigma) > 1e-6 {
                prop_assert!(d > 0.0);
            }
        }

        #[test]
        fn entropy_bounds(r in bloch_in_ball(1.0)) {
            let s = vn_entropy(&DensityMatrix::from_bloch(r).unwrap());
            prop_assert!(s >= 0.0 && s <= 2f64.ln() + 1e-15);
        }

        #[test]
        fn bloch_roundtrip_and_linearity(r in bloch_in_ball(1.0), q in bloch_in_ball(1.0), w in 0.0f64..1.0) {
            let rho = DensityMatrix::from_bloch(r).unwrap();
            let back = bloch_vector(&rho);
            for k in 0..3 { prop_assert!((back[k] - r[k]).abs() < 1e-12); }
            let sigma = DensityMatrix::from_bloch(q).unwrap();
            let mix = DensityMatrix::new(rho.matrix().scale_re(w) + sigma.matrix().scale_re(1.0 - w)).unwrap();
            let bm = bloch_vector(&mix);
            for k in 0..3 { prop_assert!((bm[k] - (w * r[k] + (1.0 - w) * q[k])).abs() < 1e-12); }
        }

        #[test]
        fn gibbs_commutes(a in bloch_in_ball(3.0), beta in 0.0f64..5.0) {
            let h = HermitianOperator2::from_pauli(0.0, a);
            let rho = gibbs_state(&h, InverseTemperature::new(beta).unwrap());
            prop_assert!(rho.matrix().commutator(h.matrix()).max_abs() < 1e-12);
        }
    }
}
