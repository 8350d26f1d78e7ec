//! Protocol states and their measurement statistics.
//!
//! Builds the white-noise GHZ mixture and the joint outcome distribution of
//! the three parties under independent per-party photon loss, including the
//! no-click outcome and its random ±1 reassignment.

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::qmath::{
    expectation, identity2, tensor3, DensityMatrix, GhzIndex, ObservableXy, Sign,
};
use crate::tolerances;

/// Channel and strategy parameters of a protocol instance.
///
/// `fidelity` is the weight of the ideal GHZ projector in the white-noise
/// mixture, `eta` the global per-party detection efficiency, `p` the
/// probability that Alice (Charlie) picks her first basis, and `q` Alice's
/// deliberate flip probability on key rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    fidelity: f64,
    eta: f64,
    p: f64,
    q: f64,
}

impl NoiseParams {
    pub fn new(fidelity: f64, eta: f64, p: f64, q: f64) -> Result<Self> {
        check_range("fidelity", fidelity, 0.0, 1.0)?;
        check_range("eta", eta, 0.0, 1.0)?;
        check_range("p", p, 0.0, 1.0)?;
        check_range("q", q, 0.0, 0.5)?;
        Ok(NoiseParams {
            fidelity,
            eta,
            p,
            q,
        })
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Mixing weight of the first key basis combination,
    /// `lambda = p^2 / (p^2 + (1-p)^2)`.
    pub fn lambda(&self) -> f64 {
        let pb = 1.0 - self.p;
        self.p * self.p / (self.p * self.p + pb * pb)
    }
}

/// Measurement settings. Alice and Charlie pick index 1 or 2, Bob 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisChoice {
    pub alice: u8,
    pub bob: u8,
    pub charlie: u8,
}

impl BasisChoice {
    pub fn new(alice: u8, bob: u8, charlie: u8) -> Result<Self> {
        if !(1..=2).contains(&alice) {
            return Err(Error::InvalidArgument(format!(
                "Alice basis index {alice} not in 1..=2"
            )));
        }
        if !(1..=3).contains(&bob) {
            return Err(Error::InvalidArgument(format!(
                "Bob basis index {bob} not in 1..=3"
            )));
        }
        if !(1..=2).contains(&charlie) {
            return Err(Error::InvalidArgument(format!(
                "Charlie basis index {charlie} not in 1..=2"
            )));
        }
        Ok(BasisChoice {
            alice,
            bob,
            charlie,
        })
    }

    /// The two combinations that generate key bits.
    pub fn is_key_combination(&self) -> bool {
        self.bob == 1
            && ((self.alice == 1 && self.charlie == 1) || (self.alice == 2 && self.charlie == 2))
    }

    /// The two combinations whose results are discarded.
    pub fn is_discard_combination(&self) -> bool {
        self.bob == 1 && !self.is_key_combination()
    }

    /// Rounds used for the Bell test (Bob picked B2 or B3).
    pub fn is_bell_combination(&self) -> bool {
        self.bob >= 2
    }
}

/// Alice's observable for basis index 1 or 2 (σx, σy).
pub fn alice_observable(index: u8) -> Result<ObservableXy> {
    match index {
        1 => Ok(ObservableXy::new(0.0)),
        2 => Ok(ObservableXy::new(std::f64::consts::FRAC_PI_2)),
        _ => Err(Error::InvalidArgument(format!(
            "Alice basis index {index} not in 1..=2"
        ))),
    }
}

/// Bob's observable for basis index 1..=3 (σx, (σx-σy)/√2, (σx+σy)/√2).
pub fn bob_observable(index: u8) -> Result<ObservableXy> {
    match index {
        1 => Ok(ObservableXy::new(0.0)),
        2 => Ok(ObservableXy::new(-std::f64::consts::FRAC_PI_4)),
        3 => Ok(ObservableXy::new(std::f64::consts::FRAC_PI_4)),
        _ => Err(Error::InvalidArgument(format!(
            "Bob basis index {index} not in 1..=3"
        ))),
    }
}

/// Charlie's observable for basis index 1 or 2 (σx, -σy).
pub fn charlie_observable(index: u8) -> Result<ObservableXy> {
    match index {
        1 => Ok(ObservableXy::new(0.0)),
        2 => Ok(ObservableXy::new(-std::f64::consts::FRAC_PI_2)),
        _ => Err(Error::InvalidArgument(format!(
            "Charlie basis index {index} not in 1..=2"
        ))),
    }
}

/// A single party's round outcome: a ±1 click or the no-click event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
    NoClick,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::NoClick];

    /// ±1 value of a click; no-click has no value.
    pub fn value(self) -> Option<i8> {
        match self {
            Outcome::Plus => Some(1),
            Outcome::Minus => Some(-1),
            Outcome::NoClick => None,
        }
    }

    fn code(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::NoClick => 2,
        }
    }
}

/// Joint distribution over the 27 outcome triples `{+1,-1,⊥}^3` for one basis
/// combination.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    bases: BasisChoice,
    /// Indexed by `9*code(a) + 3*code(b) + code(c)`.
    probs: [f64; 27],
}

impl OutcomeDistribution {
    fn index(a: Outcome, b: Outcome, c: Outcome) -> usize {
        9 * a.code() + 3 * b.code() + c.code()
    }

    pub fn bases(&self) -> BasisChoice {
        self.bases
    }

    pub fn prob(&self, a: Outcome, b: Outcome, c: Outcome) -> f64 {
        self.probs[Self::index(a, b, c)]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Outcome, Outcome, Outcome), f64)> + '_ {
        Outcome::ALL.into_iter().flat_map(move |a| {
            Outcome::ALL.into_iter().flat_map(move |b| {
                Outcome::ALL
                    .into_iter()
                    .map(move |c| ((a, b, c), self.prob(a, b, c)))
            })
        })
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Cumulative table for sampling; order matches [`Self::iter`].
    pub(crate) fn cumulative(&self) -> [f64; 27] {
        let mut cum = [0.0; 27];
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            cum[i] = acc;
        }
        cum
    }

    pub(crate) fn outcome_by_flat_index(i: usize) -> (Outcome, Outcome, Outcome) {
        (
            Outcome::ALL[i / 9],
            Outcome::ALL[(i / 3) % 3],
            Outcome::ALL[i % 3],
        )
    }

    /// Replace every no-click by an unbiased ±1 coin, independently per party,
    /// yielding a distribution over the 8 sign triples.
    pub fn postselect(&self) -> PostselectedDistribution {
        let mut probs = [0.0f64; 8];
        for ((a, b, c), p) in self.iter() {
            if p == 0.0 {
                continue;
            }
            let split = |o: Outcome| -> &'static [(usize, f64)] {
                match o {
                    Outcome::Plus => &[(0, 1.0)],
                    Outcome::Minus => &[(1, 1.0)],
                    Outcome::NoClick => &[(0, 0.5), (1, 0.5)],
                }
            };
            for &(ia, wa) in split(a) {
                for &(ib, wb) in split(b) {
                    for &(ic, wc) in split(c) {
                        probs[4 * ia + 2 * ib + ic] += p * wa * wb * wc;
                    }
                }
            }
        }
        PostselectedDistribution {
            bases: self.bases,
            probs,
        }
    }
}

/// Distribution over ±1 triples after the no-click reassignment.
#[derive(Debug, Clone)]
pub struct PostselectedDistribution {
    bases: BasisChoice,
    /// Indexed by `4*bit(a) + 2*bit(b) + bit(c)` with `+1 -> 0`, `-1 -> 1`.
    probs: [f64; 8],
}

impl PostselectedDistribution {
    pub fn bases(&self) -> BasisChoice {
        self.bases
    }

    pub fn prob_signs(&self, a: i8, b: i8, c: i8) -> f64 {
        let bit = |s: i8| usize::from(s < 0);
        self.probs[4 * bit(a) + 2 * bit(b) + bit(c)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Expectation of the product a·b·c.
    pub fn correlator(&self) -> f64 {
        let mut e = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            let sign = if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            e += sign * p;
        }
        e
    }

    /// Probability that the key rule `K_A = K_B xor K_C` holds, i.e. that the
    /// outcome product is +1.
    pub fn prob_key_rule_holds(&self) -> f64 {
        0.5 * (1.0 + self.correlator())
    }

    /// Expectation of the two-party product a·b restricted by Charlie's sign.
    /// Returns `E[a·b·1{c=sign}]` (unnormalized conditional).
    pub fn ab_product_with_charlie(&self, charlie_sign: i8) -> f64 {
        let mut e = 0.0;
        for a in [1i8, -1] {
            for b in [1i8, -1] {
                e += f64::from(a) * f64::from(b) * self.prob_signs(a, b, charlie_sign);
            }
        }
        e
    }
}

/// White-noise GHZ mixture: `F` times the ideal GHZ projector plus `(1-F)/8`
/// times the identity (the equal mixture of all eight GHZ branches).
pub fn noisy_ghz(fidelity: f64) -> Result<DensityMatrix> {
    check_range("fidelity", fidelity, 0.0, 1.0)?;
    let pure = DensityMatrix::pure(&crate::qmath::ghz_state(GhzIndex::G1, Sign::Plus));
    let mixed = DensityMatrix::maximally_mixed(8)?;
    DensityMatrix::mixture(&[(fidelity, &pure), (1.0 - fidelity, &mixed)])
}

/// Joint outcome distribution for one basis combination under independent
/// per-party loss: each party registers a click with probability `eta`, and a
/// click's ±1 value follows the Born rule on [`noisy_ghz`]. Undetected parties
/// are marginalized, which reproduces the partial-loss branches of the lossy
/// channel state without assembling a vacuum-extended density matrix.
pub fn outcome_distribution(fidelity: f64, eta: f64, bases: BasisChoice) -> Result<OutcomeDistribution> {
    check_range("eta", eta, 0.0, 1.0)?;
    let rho = noisy_ghz(fidelity)?;
    let oa = alice_observable(bases.alice)?;
    let ob = bob_observable(bases.bob)?;
    let oc = charlie_observable(bases.charlie)?;

    let mut probs = [0.0f64; 27];
    for a in Outcome::ALL {
        for b in Outcome::ALL {
            for c in Outcome::ALL {
                let factor = |o: Outcome, obs: &ObservableXy| -> (f64, crate::qmath::CMatrix) {
                    match o {
                        Outcome::Plus => (eta, obs.projector(true)),
                        Outcome::Minus => (eta, obs.projector(false)),
                        Outcome::NoClick => (1.0 - eta, identity2()),
                    }
                };
                let (wa, ma) = factor(a, &oa);
                let (wb, mb) = factor(b, &ob);
                let (wc, mc) = factor(c, &oc);
                let weight = wa * wb * wc;
                if weight == 0.0 {
                    probs[OutcomeDistribution::index(a, b, c)] = 0.0;
                    continue;
                }
                let op = tensor3(&ma, &mb, &mc)?;
                // The tensor of projectors/identities is Hermitian PSD, so the
                // trace against rho is a genuine probability.
                let p = expectation_unclamped(&rho, &op)?;
                probs[OutcomeDistribution::index(a, b, c)] = weight * p.max(0.0);
            }
        }
    }
    let dist = OutcomeDistribution { bases, probs };
    debug_assert!((dist.total() - 1.0).abs() < tolerances::PROBABILITY);
    Ok(dist)
}

/// Trace against an observable without the ±1 clamp (probabilities of
/// projective outcomes live in [0, 1], not [-1, 1]).
fn expectation_unclamped(rho: &DensityMatrix, obs: &crate::qmath::CMatrix) -> Result<f64> {
    let n = rho.dim();
    if obs.nrows() != n || obs.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "trace operands",
            expected: n,
            got: obs.nrows(),
        });
    }
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += rho.matrix()[(i, k)] * obs[(k, i)];
        }
    }
    if tr.im.abs() > tolerances::SPECTRAL {
        return Err(Error::InvalidState(format!(
            "probability has imaginary part {:.3e}",
            tr.im
        )));
    }
    Ok(tr.re)
}
