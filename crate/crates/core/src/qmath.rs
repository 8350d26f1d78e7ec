//! Minimal complex linear algebra for one-, two- and three-qubit systems.
//!
//! Amplitude ordering is fixed throughout the crate: basis kets are indexed
//! big-endian in the party order A, B, C with `H = 0` and `V = 1`, so for three
//! qubits the index of `|abc>` is `4a + 2b + c` (`|HHH> = 0`, ..., `|VVV> = 7`).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances;

pub type CMatrix = DMatrix<Complex64>;

/// A pure quantum state on `k` qubits, `k` in 1..=3.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Build a state from raw amplitudes. The length must be 2, 4 or 8 and the
    /// amplitudes must be normalized.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if ![2, 4, 8].contains(&amps.len()) {
            return Err(Error::DimensionMismatch {
                context: "state vector length must be 2^k, k in 1..=3",
                expected: 8,
                got: amps.len(),
            });
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > tolerances::ALGEBRAIC {
            return Err(Error::InvalidState(format!(
                "state vector is not normalized: |psi|^2 = {norm2}"
            )));
        }
        Ok(StateVector { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rank-one projector |psi><psi| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let n = self.dim();
        let m = CMatrix::from_fn(n, n, |i, j| self.amps[i] * self.amps[j].conj());
        // A projector built from a normalized vector satisfies the invariants
        // by construction.
        DensityMatrix { m }
    }
}

/// Which of the four GHZ ket pairs a branch state is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GhzIndex {
    /// `(|HHH> ± |VVV>)/sqrt(2)`
    G1,
    /// `(|HHV> ± |VVH>)/sqrt(2)`
    G2,
    /// `(|HVH> ± |VHV>)/sqrt(2)`
    G3,
    /// `(|HVV> ± |VHH>)/sqrt(2)`
    G4,
}

impl GhzIndex {
    pub const ALL: [GhzIndex; 4] = [GhzIndex::G1, GhzIndex::G2, GhzIndex::G3, GhzIndex::G4];

    /// Computational-basis indices of the two kets in the superposition,
    /// first ket listed first.
    fn ket_pair(self) -> (usize, usize) {
        match self {
            GhzIndex::G1 => (0b000, 0b111),
            GhzIndex::G2 => (0b001, 0b110),
            GhzIndex::G3 => (0b010, 0b101),
            GhzIndex::G4 => (0b011, 0b100),
        }
    }
}

/// Relative sign between the two kets of a GHZ branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One of the eight GHZ branch states, as an 8-amplitude vector in the
/// computational ordering `|HHH>, |HHV>, ..., |VVV>`.
pub fn ghz_state(index: GhzIndex, sign: Sign) -> StateVector {
    let (first, second) = index.ket_pair();
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    let a = std::f64::consts::FRAC_1_SQRT_2;
    amps[first] = Complex64::new(a, 0.0);
    amps[second] = Complex64::new(sign.factor() * a, 0.0);
    StateVector { amps }
}

/// A density matrix on `k` qubits, validated to be Hermitian, unit-trace and
/// positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validate a candidate matrix against the density-matrix invariants.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || ![2, 4, 8].contains(&m.nrows()) {
            return Err(Error::DimensionMismatch {
                context: "density matrix must be 2^k x 2^k, k in 1..=3",
                expected: 8,
                got: m.nrows(),
            });
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > tolerances::ALGEBRAIC {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i},{j}): asymmetry {d:.3e}"
                    )));
                }
            }
        }
        let tr: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
        if (tr.re - 1.0).abs() > tolerances::ALGEBRAIC || tr.im.abs() > tolerances::ALGEBRAIC {
            return Err(Error::InvalidState(format!("trace = {tr} instead of 1")));
        }
        let min_eig = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tolerances::SPECTRAL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { m })
    }

    /// Pure-state density matrix |psi><psi|.
    pub fn pure(psi: &StateVector) -> Self {
        psi.projector()
    }

    /// Convex mixture of density matrices. Weights must be nonnegative and sum
    /// to 1 within the algebraic tolerance.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("empty mixture".into()));
        }
        let n = parts[0].1.dim();
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if (total - 1.0).abs() > tolerances::ALGEBRAIC {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        let mut m = CMatrix::zeros(n, n);
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::range("mixture weight", *w, 0.0, 1.0));
            }
            if rho.dim() != n {
                return Err(Error::DimensionMismatch {
                    context: "mixture parts",
                    expected: n,
                    got: rho.dim(),
                });
            }
            m += rho.matrix() * Complex64::new(*w, 0.0);
        }
        Ok(DensityMatrix { m })
    }

    /// Maximally mixed state I / 2^k.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if ![2, 4, 8].contains(&dim) {
            return Err(Error::DimensionMismatch {
                context: "maximally mixed state dimension",
                expected: 8,
                got: dim,
            });
        }
        let m = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Ok(DensityMatrix { m })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

/// A ±1-valued qubit observable `cos(angle)·σx + sin(angle)·σy` in the Bloch
/// X-Y plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableXy {
    angle: f64,
}

impl ObservableXy {
    pub fn new(angle: f64) -> Self {
        ObservableXy { angle }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The 2x2 Hermitian matrix `[[0, e^{-iθ}], [e^{iθ}, 0]]`; traceless with
    /// eigenvalues exactly ±1.
    pub fn matrix(&self) -> CMatrix {
        let e = Complex64::from_polar(1.0, self.angle);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                e.conj(),
                e,
                Complex64::new(0.0, 0.0),
            ],
        )
    }

    /// Projector onto the ±1 eigenstate `(|H> ± e^{iθ}|V>)/sqrt(2)`.
    pub fn projector(&self, outcome_plus: bool) -> CMatrix {
        let s = if outcome_plus { 1.0 } else { -1.0 };
        let e = Complex64::from_polar(s * 0.5, self.angle);
        CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.5, 0.0), e.conj(), e, Complex64::new(0.5, 0.0)],
        )
    }
}

/// Kronecker product `a ⊗ b ⊗ c` of three 2x2 matrices, consistent with the
/// crate's big-endian A,B,C amplitude ordering.
pub fn tensor3(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    for (m, name) in [(a, "a"), (b, "b"), (c, "c")] {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                context: match name {
                    "a" => "tensor3 first factor",
                    "b" => "tensor3 second factor",
                    _ => "tensor3 third factor",
                },
                expected: 2,
                got: m.nrows(),
            });
        }
    }
    Ok(a.kronecker(b).kronecker(c))
}

/// `Tr(ρ · obs)` for a Hermitian observable. The imaginary part must vanish
/// within the spectral tolerance; the result of a ±1-valued observable is
/// clamped to [-1, 1].
pub fn expectation(rho: &DensityMatrix, obs: &CMatrix) -> Result<f64> {
    if obs.nrows() != rho.dim() || obs.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "expectation value operands",
            expected: rho.dim(),
            got: obs.nrows(),
        });
    }
    let n = rho.dim();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += rho.m[(i, k)] * obs[(k, i)];
        }
    }
    if tr.im.abs() > tolerances::SPECTRAL {
        return Err(Error::InvalidState(format!(
            "expectation value has imaginary part {:.3e}",
            tr.im
        )));
    }
    Ok(tr.re.clamp(-1.0, 1.0))
}

/// Pauli σx as a 2x2 complex matrix.
pub fn sigma_x() -> CMatrix {
    ObservableXy::new(0.0).matrix()
}

/// Pauli σy as a 2x2 complex matrix.
pub fn sigma_y() -> CMatrix {
    ObservableXy::new(std::f64::consts::FRAC_PI_2).matrix()
}

/// 2x2 identity.
pub fn identity2() -> CMatrix {
    CMatrix::identity(2, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{rngs::StdRng, Rng as _, SeedableRng as _};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ghz_plus_one_is_hhh_vvv() {
        let psi = ghz_state(GhzIndex::G1, Sign::Plus);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(psi.amplitudes()[0].re, a, epsilon = 1e-15);
        assert_relative_eq!(psi.amplitudes()[7].re, a, epsilon = 1e-15);
        for i in 1..7 {
            assert_eq!(psi.amplitudes()[i], c(0.0, 0.0));
        }
    }

    #[test]
    fn ghz_four_minus_signs() {
        // (|HVV> - |VHH>)/sqrt(2): +amp at index 3, -amp at index 4.
        let psi = ghz_state(GhzIndex::G4, Sign::Minus);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(psi.amplitudes()[3].re, a, epsilon = 1e-15);
        assert_relative_eq!(psi.amplitudes()[4].re, -a, epsilon = 1e-15);
    }

    #[test]
    fn ghz_states_normalized() {
        for idx in GhzIndex::ALL {
            for sign in Sign::ALL {
                assert_relative_eq!(ghz_state(idx, sign).norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn observable_angle_zero_is_sigma_x() {
        let m = ObservableXy::new(0.0).matrix();
        assert_relative_eq!(m[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m[(1, 0)].re, 1.0, epsilon = 1e-15);
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn observable_half_pi_is_sigma_y() {
        let m = ObservableXy::new(std::f64::consts::FRAC_PI_2).matrix();
        assert_relative_eq!(m[(0, 1)].im, -1.0, epsilon = 1e-15);
        assert_relative_eq!(m[(1, 0)].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn observable_minus_half_pi_is_negated_sigma_y() {
        let m = ObservableXy::new(-std::f64::consts::FRAC_PI_2).matrix();
        let y = sigma_y();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] + y[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor3_identity() {
        let i2 = identity2();
        let m = tensor3(&i2, &i2, &i2).unwrap();
        assert_eq!(m, CMatrix::identity(8, 8));
    }

    /// Independent route: apply sigma_x per qubit at the amplitude level and
    /// compute <psi|O|psi> by explicit summation, then compare with the
    /// matrix pipeline.
    #[test]
    fn xxx_expectation_on_ghz_matches_amplitude_oracle() {
        let psi = ghz_state(GhzIndex::G1, Sign::Plus);
        // sigma_x^{⊗3} |abc> = |~a ~b ~c>, so <psi|O|psi> = sum_i conj(a_i) a_{7-i}
        let amps = psi.amplitudes();
        let mut oracle = c(0.0, 0.0);
        for i in 0..8 {
            oracle += amps[i].conj() * amps[7 - i];
        }
        assert_relative_eq!(oracle.re, 1.0, epsilon = 1e-12);

        let x = sigma_x();
        let obs = tensor3(&x, &x, &x).unwrap();
        let rho = DensityMatrix::pure(&psi);
        assert_relative_eq!(expectation(&rho, &obs).unwrap(), oracle.re, epsilon = 1e-12);
    }

    #[test]
    fn traceless_observable_on_maximally_mixed_is_zero() {
        let rho = DensityMatrix::maximally_mixed(8).unwrap();
        let obs = tensor3(&sigma_x(), &sigma_x(), &sigma_x()).unwrap();
        assert_relative_eq!(expectation(&rho, &obs).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn expectation_rejects_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(8).unwrap();
        assert!(expectation(&rho, &sigma_x()).is_err());
    }

    #[test]
    fn trace_is_linear_in_state() {
        let obs = tensor3(&sigma_x(), &sigma_x(), &sigma_x()).unwrap();
        let p = DensityMatrix::pure(&ghz_state(GhzIndex::G1, Sign::Plus));
        let mixed = DensityMatrix::maximally_mixed(8).unwrap();
        let half = DensityMatrix::mixture(&[(0.5, &p), (0.5, &mixed)]).unwrap();
        let lhs = expectation(&half, &obs).unwrap();
        let rhs = 0.5 * expectation(&p, &obs).unwrap() + 0.5 * expectation(&mixed, &obs).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn mixture_validation() {
        let p = DensityMatrix::pure(&ghz_state(GhzIndex::G1, Sign::Plus));
        assert!(DensityMatrix::mixture(&[(0.7, &p), (0.7, &p)]).is_err());
    }

    /// Random density matrices from random pure-state mixtures.
    fn random_density(rng: &mut StdRng) -> DensityMatrix {
        let k = 3;
        let dim = 1usize << k;
        let n_parts = rng.gen_range(1..=4);
        let mut weights: Vec<f64> = (0..n_parts).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mut m = CMatrix::zeros(dim, dim);
        for w in weights {
            let mut amps: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let psi = StateVector::new(amps).unwrap();
            m += psi.projector().matrix() * c(w, 0.0);
        }
        DensityMatrix::from_matrix(m).expect("random mixture must satisfy invariants")
    }

    #[test]
    fn random_densities_pass_invariants_and_bounded_expectations() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let rho = random_density(&mut rng);
            let oa = ObservableXy::new(rng.gen_range(-3.2..3.2)).matrix();
            let ob = ObservableXy::new(rng.gen_range(-3.2..3.2)).matrix();
            let oc = ObservableXy::new(rng.gen_range(-3.2..3.2)).matrix();
            let obs = tensor3(&oa, &ob, &oc).unwrap();
            let e = expectation(&rho, &obs).unwrap();
            assert!((-1.0..=1.0).contains(&e), "expectation {e} out of [-1,1]");
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn observable_squares_to_identity(angle in -10.0f64..10.0) {
            let m = ObservableXy::new(angle).matrix();
            let sq = &m * &m;
            let id = identity2();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((sq[(i,j)] - id[(i,j)]).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn observable_is_traceless_hermitian(angle in -10.0f64..10.0) {
            let m = ObservableXy::new(angle).matrix();
            prop_assert!((m[(0,0)] + m[(1,1)]).norm() < 1e-15);
            prop_assert!((m[(0,1)] - m[(1,0)].conj()).norm() < 1e-15);
        }

        #[test]
        fn tensor3_matches_pairwise_kronecker_and_is_bilinear(
            a0 in -1.0f64..1.0, a1 in -1.0f64..1.0,
            b0 in -1.0f64..1.0, b1 in -1.0f64..1.0,
            scale in 0.1f64..2.0,
        ) {
            let a = ObservableXy::new(a0).matrix() * c(a1, 0.3);
            let b = ObservableXy::new(b0).matrix() * c(b1, -0.2);
            let cc = ObservableXy::new(a0 * b0).matrix();
            let direct = tensor3(&a, &b, &cc).unwrap();
            let pairwise = a.kronecker(&b).kronecker(&cc);
            prop_assert!((&direct - &pairwise).norm() < 1e-12);

            // bilinearity in the first argument
            let scaled = tensor3(&(a.clone() * c(scale, 0.0)), &b, &cc).unwrap();
            prop_assert!((&scaled - &(direct * c(scale, 0.0))).norm() < 1e-10);
        }
    }
}
