//! CHSH and Svetlichny polynomials on the noise model, and the closed-form
//! QBER predictions.
//!
//! With the protocol's bases, conditioning the Alice-Bob CHSH polynomial
//! `S_AB = <a1b2> + <a2b2> + <a1b3> - <a2b3>` on Charlie's σx outcome and its
//! variant `S'_AB = <a2b3> + <a2b2> + <a1b3> - <a1b2>` on Charlie's -σy
//! outcome reproduces the full Svetlichny polynomial as the sum of the two
//! conditioned values. (Pairing `S_AB` with Charlie's second basis instead
//! yields identically zero on the ideal GHZ state, as direct computation
//! shows, so the conditioning used here is the one consistent with maximal
//! violation.)

use crate::error::{check_range, Error, Result};
use crate::qmath::{expectation, tensor3, DensityMatrix, GhzIndex, Sign};
use crate::states::{
    alice_observable, bob_observable, charlie_observable, noisy_ghz, outcome_distribution,
    BasisChoice,
};

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;
pub const SVETLICHNY_MAX: f64 = 4.0 * std::f64::consts::SQRT_2;

/// Bell-test summary of a protocol instance.
///
/// `s_ab` is the Alice-Bob CHSH value signed by Charlie's first-basis
/// outcome, `s_ab_prime` the variant signed by his second-basis outcome,
/// `s_abc` the Svetlichny polynomial (their sum) and `s_effective` the single
/// CHSH value used by the security analysis (their average).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellReport {
    pub s_ab: f64,
    pub s_ab_prime: f64,
    pub s_abc: f64,
    pub s_effective: f64,
}

/// Three-party correlator `<a_i b_j c_k>` from the postselected outcome
/// distribution.
fn correlator(fidelity: f64, eta: f64, i: u8, j: u8, k: u8) -> Result<f64> {
    let d = outcome_distribution(fidelity, eta, BasisChoice::new(i, j, k)?)?;
    Ok(d.postselect().correlator())
}

/// Assemble the CHSH/Svetlichny report from postselected outcome
/// distributions over the eight Bell basis combinations.
pub fn chsh_pair(fidelity: f64, eta: f64) -> Result<BellReport> {
    check_range("fidelity", fidelity, 0.0, 1.0)?;
    check_range("eta", eta, 0.0, 1.0)?;

    let t = |i: u8, j: u8, k: u8| correlator(fidelity, eta, i, j, k);

    // <S_AB c1> and <S'_AB c2>
    let s_ab = t(1, 2, 1)? + t(2, 2, 1)? + t(1, 3, 1)? - t(2, 3, 1)?;
    let s_ab_prime = t(2, 3, 2)? + t(2, 2, 2)? + t(1, 3, 2)? - t(1, 2, 2)?;
    let s_abc = s_ab + s_ab_prime;
    let s_effective = 0.5 * s_abc;

    // Guard the closed form the model must satisfy.
    let closed = TSIRELSON * fidelity * eta.powi(3);
    if (s_effective - closed).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "assembled S = {s_effective} deviates from closed form {closed}"
        )));
    }

    Ok(BellReport {
        s_ab,
        s_ab_prime,
        s_abc,
        s_effective,
    })
}

/// Closed-form QBER decomposition of the postselected protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberModel {
    /// White-noise error on triple-click rounds, `(1-F)/2`.
    pub q1: f64,
    /// Loss-induced error from coin-assigned no-clicks, `(1-eta^3)/2`.
    pub q2: f64,
    /// Total QBER, `1/2 - eta^3 F / 2`.
    pub delta: f64,
}

/// QBER closed forms for given fidelity and global detection efficiency.
pub fn qber_model(fidelity: f64, eta: f64) -> Result<QberModel> {
    check_range("fidelity", fidelity, 0.0, 1.0)?;
    check_range("eta", eta, 0.0, 1.0)?;
    let eta3 = eta.powi(3);
    let q1 = 0.5 * (1.0 - fidelity);
    let q2 = 0.5 * (1.0 - eta3);
    QberModel {
        q1,
        q2,
        delta: q1 * eta3 + q2,
    }
    .validated()
}

impl QberModel {
    fn validated(self) -> Result<Self> {
        debug_assert!((self.delta - (0.5 - 0.5 * (1.0 - 2.0 * self.q1) * (1.0 - 2.0 * self.q2))).abs() < 1e-12);
        Ok(self)
    }
}

/// QBER after Alice's deliberate flipping: `q + (1-2q)·delta`.
pub fn preprocessed_qber(delta: f64, q: f64) -> Result<f64> {
    check_range("delta", delta, 0.0, 0.5)?;
    check_range("q", q, 0.0, 0.5)?;
    Ok(q + (1.0 - 2.0 * q) * delta)
}

/// Whether a GHZ branch state violates the key rule `K_A = K_B xor K_C` under
/// one of the two key basis combinations. Computed from the state algebra, not
/// a lookup table.
pub fn qber_per_branch(index: GhzIndex, sign: Sign, bases: BasisChoice) -> Result<bool> {
    if !bases.is_key_combination() {
        return Err(Error::InvalidArgument(format!(
            "branch QBER is defined only on key basis combinations, got ({}, {}, {})",
            bases.alice, bases.bob, bases.charlie
        )));
    }
    let psi = crate::qmath::ghz_state(index, sign);
    let rho = DensityMatrix::pure(&psi);
    let obs = tensor3(
        &alice_observable(bases.alice)?.matrix(),
        &bob_observable(bases.bob)?.matrix(),
        &charlie_observable(bases.charlie)?.matrix(),
    )?;
    // Each branch is an eigenstate of the key-basis product observable with
    // eigenvalue ±1; -1 means every round errs.
    let e = expectation(&rho, &obs)?;
    if (e.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "branch product expectation {e} is not ±1"
        )));
    }
    Ok(e < 0.0)
}

/// Difference between the postselected key-rule failure probability and the
/// closed-form delta; used as a model self-check.
pub fn qber_from_distributions(fidelity: f64, eta: f64) -> Result<f64> {
    let mut failure = 0.0;
    for bases in [BasisChoice::new(1, 1, 1)?, BasisChoice::new(2, 1, 2)?] {
        let ps = outcome_distribution(fidelity, eta, bases)?.postselect();
        failure += 0.5 * (1.0 - ps.prob_key_rule_holds());
    }
    Ok(failure)
}

/// Svetlichny expectation of the ideal GHZ state measured with arbitrary
/// X-Y-plane observables; used by tests as an independent route.
pub fn ghz_correlator(fidelity: f64, i: u8, j: u8, k: u8) -> Result<f64> {
    let rho = noisy_ghz(fidelity)?;
    let obs = tensor3(
        &alice_observable(i)?.matrix(),
        &bob_observable(j)?.matrix(),
        &charlie_observable(k)?.matrix(),
    )?;
    expectation(&rho, &obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{rngs::StdRng, Rng as _, SeedableRng as _};

    #[test]
    fn ideal_state_reaches_maximal_violation() {
        let r = chsh_pair(1.0, 1.0).unwrap();
        assert_relative_eq!(r.s_abc, SVETLICHNY_MAX, epsilon = 1e-10);
        assert_relative_eq!(r.s_effective, TSIRELSON, epsilon = 1e-10);
        assert_relative_eq!(r.s_ab, TSIRELSON, epsilon = 1e-10);
        assert_relative_eq!(r.s_ab_prime, TSIRELSON, epsilon = 1e-10);
    }

    #[test]
    fn maximally_mixed_state_has_no_correlations() {
        let r = chsh_pair(0.0, 1.0).unwrap();
        assert_relative_eq!(r.s_effective, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.s_abc, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_spot_value() {
        let r = chsh_pair(0.9, 0.95).unwrap();
        let expected = TSIRELSON * 0.9 * 0.95f64.powi(3);
        assert_relative_eq!(r.s_effective, expected, epsilon = 1e-9);
        assert!((r.s_effective - 2.1824).abs() < 1e-3);
    }

    #[test]
    fn closed_form_holds_over_random_parameters() {
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..25 {
            let f: f64 = rng.gen();
            let eta: f64 = rng.gen();
            let r = chsh_pair(f, eta).unwrap();
            assert_relative_eq!(
                r.s_effective,
                TSIRELSON * f * eta.powi(3),
                epsilon = 1e-9
            );
            assert!(r.s_ab.abs() <= TSIRELSON + 1e-9);
            assert!(r.s_ab_prime.abs() <= TSIRELSON + 1e-9);
            assert!(r.s_abc.abs() <= SVETLICHNY_MAX + 1e-9);
        }
    }

    /// Conditioning route: compute the CHSH values from conditional
    /// distributions given Charlie's outcome, with his sign applied, and
    /// compare with the product-correlator route.
    #[test]
    fn conditioning_rule_consistency() {
        for (f, eta) in [(1.0, 1.0), (0.9, 0.8), (0.7, 1.0)] {
            let r = chsh_pair(f, eta).unwrap();

            let cond = |i: u8, j: u8, k: u8, c_sign: i8| -> f64 {
                let ps = outcome_distribution(f, eta, BasisChoice::new(i, j, k).unwrap())
                    .unwrap()
                    .postselect();
                ps.ab_product_with_charlie(c_sign)
            };
            // S_AB conditioned on c1 = +1 and on c1 = -1, sign applied:
            let via_c1: f64 = [(1u8, 2u8, 1.0f64), (2, 2, 1.0), (1, 3, 1.0), (2, 3, -1.0)]
                .iter()
                .map(|&(i, j, w)| {
                    w * (cond(i, j, 1, 1) - cond(i, j, 1, -1))
                })
                .sum();
            // S'_AB conditioned on c2:
            let via_c2: f64 = [(2u8, 3u8, 1.0f64), (2, 2, 1.0), (1, 3, 1.0), (1, 2, -1.0)]
                .iter()
                .map(|&(i, j, w)| {
                    w * (cond(i, j, 2, 1) - cond(i, j, 2, -1))
                })
                .sum();
            assert_relative_eq!(via_c1, r.s_ab, epsilon = 1e-9);
            assert_relative_eq!(via_c2, r.s_ab_prime, epsilon = 1e-9);
            assert_relative_eq!(via_c1.abs(), r.s_effective.abs(), epsilon = 1e-9);
            assert_relative_eq!(via_c2.abs(), r.s_effective.abs(), epsilon = 1e-9);
        }
    }

    #[test]
    fn qber_closed_forms() {
        let m = qber_model(1.0, 1.0).unwrap();
        assert_eq!((m.q1, m.q2, m.delta), (0.0, 0.0, 0.0));

        let m = qber_model(0.92, 1.0).unwrap();
        assert_relative_eq!(m.q1, 0.04, epsilon = 1e-12);
        assert_relative_eq!(m.delta, 0.04, epsilon = 1e-12);

        let m = qber_model(1.0, 0.9).unwrap();
        assert_relative_eq!(m.delta, (1.0 - 0.729) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn qber_model_matches_distribution_route() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let f: f64 = rng.gen();
            let eta: f64 = rng.gen();
            let from_dist = qber_from_distributions(f, eta).unwrap();
            let closed = qber_model(f, eta).unwrap().delta;
            assert_relative_eq!(from_dist, closed, epsilon = 1e-9);
        }
    }

    #[test]
    fn effective_s_links_to_delta() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..25 {
            let f: f64 = rng.gen();
            let eta: f64 = rng.gen();
            let r = chsh_pair(f, eta).unwrap();
            let m = qber_model(f, eta).unwrap();
            assert_relative_eq!(
                r.s_effective,
                TSIRELSON * (1.0 - 2.0 * m.delta),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn preprocessed_qber_values() {
        assert_relative_eq!(preprocessed_qber(0.05, 0.0).unwrap(), 0.05);
        assert_relative_eq!(preprocessed_qber(0.0, 0.2).unwrap(), 0.2);
        assert_relative_eq!(preprocessed_qber(0.05, 0.2).unwrap(), 0.23, epsilon = 1e-15);
        assert!(preprocessed_qber(0.6, 0.0).is_err());
        assert!(preprocessed_qber(0.1, 0.6).is_err());
    }

    #[test]
    fn branch_errors_first_key_basis() {
        let bases = BasisChoice::new(1, 1, 1).unwrap();
        // the four minus-sign branches err
        for idx in GhzIndex::ALL {
            assert!(!qber_per_branch(idx, Sign::Plus, bases).unwrap());
            assert!(qber_per_branch(idx, Sign::Minus, bases).unwrap());
        }
    }

    #[test]
    fn branch_errors_second_key_basis() {
        let bases = BasisChoice::new(2, 1, 2).unwrap();
        let violators = [
            (GhzIndex::G1, Sign::Minus),
            (GhzIndex::G2, Sign::Plus),
            (GhzIndex::G3, Sign::Minus),
            (GhzIndex::G4, Sign::Plus),
        ];
        let mut count = 0;
        for idx in GhzIndex::ALL {
            for sign in Sign::ALL {
                let errs = qber_per_branch(idx, sign, bases).unwrap();
                if errs {
                    count += 1;
                    assert!(violators.contains(&(idx, sign)));
                }
            }
        }
        assert_eq!(count, 4);
    }

    #[test]
    fn four_of_eight_branches_err_per_key_basis() {
        for bases in [
            BasisChoice::new(1, 1, 1).unwrap(),
            BasisChoice::new(2, 1, 2).unwrap(),
        ] {
            let violators: usize = GhzIndex::ALL
                .iter()
                .flat_map(|&i| Sign::ALL.iter().map(move |&s| (i, s)))
                .filter(|&(i, s)| qber_per_branch(i, s, bases).unwrap())
                .count();
            assert_eq!(violators, 4);
        }
    }

    #[test]
    fn branch_qber_rejects_bell_bases() {
        let bases = BasisChoice::new(1, 2, 1).unwrap();
        assert!(qber_per_branch(GhzIndex::G1, Sign::Plus, bases).is_err());
    }
}
