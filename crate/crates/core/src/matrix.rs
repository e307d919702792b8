//! Dense 2×2 complex matrices and the closed-form spectral tools built on
//! the Pauli decomposition `M = a0·I + a·σ`.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[C64::new(a, 0.0), ZERO], [ZERO, C64::new(b, 0.0)]])
    }

    /// `a0·I + ax·σx + ay·σy + az·σz`.
    pub fn from_pauli(a0: f64, a: [f64; 3]) -> Self {
        Mat2([
            [C64::new(a0 + a[2], 0.0), C64::new(a[0], -a[1])],
            [C64::new(a[0], a[1]), C64::new(a0 - a[2], 0.0)],
        ])
    }

    /// Coefficients of the Hermitian part in the Pauli basis: `(a0, [ax, ay, az])`
    /// with `a0 = tr(M)/2` and `ak = tr(M σk)/2`.
    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let a0 = 0.5 * (m[0][0].re + m[1][1].re);
        let ax = 0.5 * (m[0][1].re + m[1][0].re);
        let ay = 0.5 * (m[1][0].im - m[0][1].im);
        let az = 0.5 * (m[0][0].re - m[1][1].re);
        (a0, [ax, ay, az])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let d = *self - *other;
        d.0.iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Mat2::zero())
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &Mat2) -> Self {
        *u * *self * u.adjoint()
    }

    /// `exp(−i x·σ)` in closed form: `cos|x|·I − i sin|x|·x̂·σ`.
    pub fn su2_exp(x: [f64; 3]) -> Self {
        let theta = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if theta == 0.0 {
            return Mat2::identity();
        }
        let (s, c) = theta.sin_cos();
        let k = s / theta;
        // −i·k·(x·σ) added to c·I
        let xs = Mat2::from_pauli(0.0, [x[0] * k, x[1] * k, x[2] * k]);
        Mat2::identity().scale_re(c) + xs.scale(-I)
    }

    /// Eigendecomposition of the Hermitian part of the matrix.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let (a0, a) = self.pauli_coefficients();
        HermitianEigen::from_pauli(a0, a)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Spectral decomposition of a 2×2 Hermitian matrix. Eigenvalues are in
/// ascending order; `vectors[k]` is the normalized eigenvector of `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigen {
    pub values: [f64; 2],
    pub vectors: [[C64; 2]; 2],
}

impl HermitianEigen {
    pub fn from_pauli(a0: f64, a: [f64; 3]) -> Self {
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if r == 0.0 {
            return HermitianEigen {
                values: [a0, a0],
                vectors: [[ONE, ZERO], [ZERO, ONE]],
            };
        }
        let (nx, ny, nz) = (a[0] / r, a[1] / r, a[2] / r);
        // +1 eigenvector of n·σ, choosing the branch that avoids cancellation
        let up = if nz >= 0.0 {
            let norm = (2.0 * (1.0 + nz)).sqrt();
            [C64::new((1.0 + nz) / norm, 0.0), C64::new(nx / norm, ny / norm)]
        } else {
            let norm = (2.0 * (1.0 - nz)).sqrt();
            [C64::new(nx / norm, -ny / norm), C64::new((1.0 - nz) / norm, 0.0)]
        };
        let down = [-up[1].conj(), up[0].conj()];
        HermitianEigen {
            values: [a0 - r, a0 + r],
            vectors: [down, up],
        }
    }

    /// `|v_k⟩⟨v_k|`.
    pub fn projector(&self, k: usize) -> Mat2 {
        let v = &self.vectors[k];
        Mat2([
            [v[0] * v[0].conj(), v[0] * v[1].conj()],
            [v[1] * v[0].conj(), v[1] * v[1].conj()],
        ])
    }

    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        self.projector(0).scale_re(f(self.values[0])) + self.projector(1).scale_re(f(self.values[1]))
    }

    /// `⟨v_k| M |v_k⟩` (real part; exact for Hermitian `M`).
    pub fn expectation(&self, k: usize, m: &Mat2) -> f64 {
        let v = &self.vectors[k];
        let mut acc = ZERO;
        for r in 0..2 {
            for c in 0..2 {
                acc += v[r].conj() * m.0[r][c] * v[c];
            }
        }
        acc.re
    }

    /// `|⟨v_k|w⟩|²` for an arbitrary vector `w`.
    pub fn overlap_sq(&self, k: usize, w: &[C64; 2]) -> f64 {
        let v = &self.vectors[k];
        (v[0].conj() * w[0] + v[1].conj() * w[1]).norm_sqr()
    }
}

/// Column `k` of a matrix as a vector.
pub fn column(m: &Mat2, k: usize) -> [C64; 2] {
    [m.0[0][k], m.0[1][k]]
}

/// `M |v⟩`.
pub fn apply(m: &Mat2, v: &[C64; 2]) -> [C64; 2] {
    [
        m.0[0][0] * v[0] + m.0[0][1] * v[1],
        m.0[1][0] * v[0] + m.0[1][1] * v[1],
    ]
}

/// Cross product, used to evaluate Pauli commutators: `[a·σ, b·σ] = 2i (a×b)·σ`.
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_mats() -> [Mat2; 3] {
        [
            Mat2::new(ZERO, ONE, ONE, ZERO),
            Mat2::new(ZERO, -I, I, ZERO),
            Mat2::diag(1.0, -1.0),
        ]
    }

    #[test]
    fn pauli_roundtrip() {
        let m = Mat2::from_pauli(0.3, [0.1, -0.7, 0.25]);
        let (a0, a) = m.pauli_coefficients();
        assert!((a0 - 0.3).abs() < 1e-15);
        assert!((a[0] - 0.1).abs() < 1e-15);
        assert!((a[1] + 0.7).abs() < 1e-15);
        assert!((a[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn commutator_matches_cross_product() {
        let s = pauli_mats();
        let a = [0.3, -1.2, 0.5];
        let b = [2.0, 0.1, -0.4];
        let ha = Mat2::from_pauli(0.0, a);
        let hb = Mat2::from_pauli(0.0, b);
        let c = cross(a, b);
        let expected = (s[0].scale_re(c[0]) + s[1].scale_re(c[1]) + s[2].scale_re(c[2]))
            .scale(C64::new(0.0, 2.0));
        assert!(ha.commutator(&hb).max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn su2_exp_is_unitary_and_matches_series() {
        let x = [0.4, -0.2, 0.9];
        let u = Mat2::su2_exp(x);
        assert!((u * u.adjoint()).max_abs_diff(&Mat2::identity()) < 1e-14);
        // Taylor series of exp(−i H) as an independent check.
        let h = Mat2::from_pauli(0.0, x).scale(-I);
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..40 {
            term = (term * h).scale_re(1.0 / k as f64);
            sum = sum + term;
        }
        assert!(u.max_abs_diff(&sum) < 1e-14);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        for a in [
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0],
            [0.3, -0.8, -0.2],
            [1e-9, 0.0, -3.0],
        ] {
            let m = Mat2::from_pauli(0.7, a);
            let e = m.hermitian_eigen();
            assert!(e.values[0] <= e.values[1]);
            assert!(e.map(|x| x).max_abs_diff(&m) < 1e-14);
            let p = e.projector(0) + e.projector(1);
            assert!(p.max_abs_diff(&Mat2::identity()) < 1e-14);
        }
    }

    #[test]
    fn degenerate_eigen() {
        let e = Mat2::identity().scale_re(2.0).hermitian_eigen();
        assert_eq!(e.values, [2.0, 2.0]);
    }
}
