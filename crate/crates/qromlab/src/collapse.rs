//! Collapsing-relation games.
//!
//! A relation R between finite sets X' and Y' is *collapsing* when an
//! adversary that prepares a superposition of related pairs cannot tell
//! whether the X' register was measured. The game: the adversary prepares a
//! joint state, the challenger coherently evaluates R and measures the
//! result bit r, then measures Y' always and X' only in the "measured"
//! variant, and finally the adversary's circuit runs and outputs a guess
//! bit b. The advantage is |Pr[r = b = 1 | X' measured] - Pr[r = b = 1 |
//! X' unmeasured]|.
//!
//! When every y has at most one valid partner x, the X' measurement is
//! determined by the Y' outcome and the advantage vanishes identically;
//! this module verifies that by exact amplitude computation, not sampling.
//! A Σ-protocol has *quantum computationally unique responses* exactly
//! when the relation "response z is valid for commitment/challenge pair
//! (a, c)" is collapsing from the response side; [`qcur_relation`] builds
//! that relation so the same games apply.

use serde::Serialize;

use crate::adversary::{apply_ops, StepOp};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, KahanSum, C64, C_ZERO};
use crate::qsim::{Permutation, Projector, Reg, RegisterLayout, StateVector, Unitary};
use crate::sigma::SigmaProtocol;
use crate::tol;
use crate::trial_rng;
use rand::Rng;

/// A finite relation table between an X' side (measured only in the
/// "measured" game variant) and a Y' side (measured in both variants).
#[derive(Clone, Debug)]
pub struct CollapsingRelation {
    x_count: usize,
    y_count: usize,
    /// Row-major: entry `x * y_count + y`.
    table: Vec<bool>,
}

impl CollapsingRelation {
    pub fn new(x_count: usize, y_count: usize, table: Vec<bool>) -> Result<Self> {
        if x_count == 0 || y_count == 0 {
            return Err(Error::InvalidArgument("empty relation side".into()));
        }
        if table.len() != x_count * y_count {
            return Err(Error::InvalidArgument(format!(
                "relation table has {} entries, expected {}",
                table.len(),
                x_count * y_count
            )));
        }
        Ok(CollapsingRelation {
            x_count,
            y_count,
            table,
        })
    }

    pub fn from_fn(
        x_count: usize,
        y_count: usize,
        f: impl Fn(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(x_count * y_count);
        for x in 0..x_count {
            for y in 0..y_count {
                table.push(f(x, y));
            }
        }
        Self::new(x_count, y_count, table)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }

    pub fn holds(&self, x: usize, y: usize) -> bool {
        self.table[x * self.y_count + y]
    }

    /// Number of related pairs.
    pub fn valid_pairs(&self) -> u64 {
        self.table.iter().filter(|&&b| b).count() as u64
    }

    /// True when every y has at most one related x. In that case the
    /// collapsing advantage is identically zero.
    pub fn has_unique_partners(&self) -> bool {
        (0..self.y_count).all(|y| (0..self.x_count).filter(|&x| self.holds(x, y)).count() <= 1)
    }

    fn check_layout(&self, layout: RegisterLayout) -> Result<()> {
        if layout.dim(Reg::X) != self.x_count || layout.dim(Reg::Y) != self.y_count {
            return Err(Error::InvalidArgument(format!(
                "layout registers ({}, {}) do not match relation sides ({}, {})",
                layout.dim(Reg::X),
                layout.dim(Reg::Y),
                self.x_count,
                self.y_count
            )));
        }
        Ok(())
    }

    /// Mask projector onto the related subspace of the given layout.
    pub fn projector(&self, layout: RegisterLayout) -> Result<Projector> {
        self.check_layout(layout)?;
        Ok(Projector::from_mask_fn(layout, |idx| {
            let x = layout.digit(idx, Reg::X);
            let y = layout.digit(idx, Reg::Y);
            self.holds(x, y)
        }))
    }
}

/// The pair relation: x partners y exactly when `x / 2 == y`, so every y
/// has the two partners 2y and 2y+1. The natural distinguisher applies
/// the two-dimensional Fourier involution inside each pair.
pub fn fourier_pair_relation(pairs: usize) -> Result<CollapsingRelation> {
    CollapsingRelation::from_fn(2 * pairs, pairs, |x, y| x / 2 == y)
}

/// The graph of a function from X' to Y': x partners f(x) only. Injective
/// functions give unique partners.
pub fn function_relation(
    x_count: usize,
    y_count: usize,
    f: impl Fn(usize) -> usize,
) -> Result<CollapsingRelation> {
    CollapsingRelation::from_fn(x_count, y_count, |x, y| f(x) == y)
}

/// An adversary for the collapsing game: a prepared joint state over
/// (X', Y', output bit, memory) and a guessing circuit whose output is
/// read from the bit register.
#[derive(Clone, Debug)]
pub struct CollapsingAdversary {
    initial: StateVector,
    circuit: Vec<StepOp>,
}

impl CollapsingAdversary {
    pub fn new(initial: StateVector, circuit: Vec<StepOp>) -> Result<Self> {
        if initial.layout().dim(Reg::Z) != 2 {
            return Err(Error::InvalidArgument(
                "collapsing adversary needs a binary output register".into(),
            ));
        }
        Ok(CollapsingAdversary { initial, circuit })
    }

    /// Prepares the uniform superposition over all related pairs, output
    /// bit and memory at zero, with the given guessing circuit.
    pub fn uniform_over(relation: &CollapsingRelation, circuit: Vec<StepOp>) -> Result<Self> {
        let layout = RegisterLayout::new(relation.x_count(), relation.y_count(), 2, 1)?;
        let pairs = relation.valid_pairs();
        if pairs == 0 {
            return Err(Error::InvalidArgument("relation has no valid pairs".into()));
        }
        let amp = C64::new(1.0 / (pairs as f64).sqrt(), 0.0);
        let mut amps = vec![C_ZERO; layout.total_dim()];
        for x in 0..relation.x_count() {
            for y in 0..relation.y_count() {
                if relation.holds(x, y) {
                    amps[layout.index(x, y, 0, 0)] = amp;
                }
            }
        }
        let initial = StateVector::from_amplitudes(layout, amps)?.state;
        CollapsingAdversary::new(initial, circuit)
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn layout(&self) -> RegisterLayout {
        self.initial.layout()
    }
}

/// Hadamard inside each consecutive pair {2k, 2k+1} of the X' register,
/// then copy the low X' bit into the output register. Against a pair
/// relation this reads off the relative phase the X' measurement destroys.
pub fn pair_fourier_circuit(layout: RegisterLayout) -> Result<Vec<StepOp>> {
    let dx = layout.dim(Reg::X);
    if dx % 2 != 0 {
        return Err(Error::InvalidArgument(
            "pair circuit needs an even X' register".into(),
        ));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = CMatrix::from_fn(dx, dx, |i, j| {
        if i / 2 != j / 2 {
            C_ZERO
        } else if i % 2 == 1 && j % 2 == 1 {
            C64::new(-h, 0.0)
        } else {
            C64::new(h, 0.0)
        }
    });
    let mark = Permutation::from_digit_map(layout, |x, y, z, e| (x, y, (z + x % 2) % 2, e))?;
    Ok(vec![
        StepOp::unitary(vec![Reg::X], Unitary::new(m)?),
        StepOp::Permutation(mark),
    ])
}

/// Full discrete Fourier transform on the X' register, then mark whether
/// the transformed value is zero in the output register. A generic
/// phase-sensitive circuit for exercising the game on any relation.
pub fn dft_marker_circuit(layout: RegisterLayout) -> Result<Vec<StepOp>> {
    let dx = layout.dim(Reg::X);
    let scale = 1.0 / (dx as f64).sqrt();
    let m = CMatrix::from_fn(dx, dx, |i, j| {
        let angle = 2.0 * std::f64::consts::PI * (i * j) as f64 / dx as f64;
        C64::new(scale * angle.cos(), scale * angle.sin())
    });
    let mark = Permutation::from_digit_map(layout, |x, y, z, e| {
        (x, y, (z + usize::from(x == 0)) % 2, e)
    })?;
    Ok(vec![
        StepOp::unitary(vec![Reg::X], Unitary::new(m)?),
        StepOp::Permutation(mark),
    ])
}

/// A circuit that ignores its input and always answers 1. The two game
/// variants then agree exactly, whatever the relation.
pub fn constant_guess_circuit(layout: RegisterLayout) -> Result<Vec<StepOp>> {
    let flip = Permutation::from_digit_map(layout, |x, y, z, e| (x, y, (z + 1) % 2, e))?;
    Ok(vec![StepOp::Permutation(flip)])
}

/// Exact joint frequencies Pr[r = b = 1] for both game variants.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactCollapsingReport {
    pub joint_measured: f64,
    pub joint_unmeasured: f64,
    pub advantage: f64,
}

/// Computes both game variants by exact amplitude enumeration: for each
/// surviving (x, y) branch of the relation-projected state, run the
/// circuit and accumulate the output-bit mass. Branches of exactly zero
/// mass are skipped, so for unique-partner relations the two variants sum
/// the same terms in the same order and the advantage is exactly zero.
pub fn collapsing_advantage_exact(
    relation: &CollapsingRelation,
    adversary: &CollapsingAdversary,
) -> Result<ExactCollapsingReport> {
    let layout = adversary.layout();
    relation.check_layout(layout)?;
    let related = relation.projector(layout)?.apply(adversary.initial())?;
    let guess_one = Projector::basis_state(layout, Reg::Z, 1)?;

    let mut measured = KahanSum::new();
    let mut unmeasured = KahanSum::new();
    for y in 0..relation.y_count() {
        let y_branch = Projector::basis_state(layout, Reg::Y, y)?.apply(&related)?;
        if y_branch.norm2() == 0.0 {
            continue;
        }
        let run = apply_ops(&y_branch, &adversary.circuit)?;
        unmeasured.add(guess_one.apply(&run)?.norm2());
        for x in 0..relation.x_count() {
            let xy_branch = Projector::basis_state(layout, Reg::X, x)?.apply(&y_branch)?;
            if xy_branch.norm2() == 0.0 {
                continue;
            }
            let run = apply_ops(&xy_branch, &adversary.circuit)?;
            measured.add(guess_one.apply(&run)?.norm2());
        }
    }
    let joint_measured = measured.value();
    let joint_unmeasured = unmeasured.value();
    Ok(ExactCollapsingReport {
        joint_measured,
        joint_unmeasured,
        advantage: (joint_measured - joint_unmeasured).abs(),
    })
}

/// Sampled joint frequencies for both game variants.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CollapsingGameReport {
    pub trials: u64,
    pub joint_measured: f64,
    pub stderr_measured: f64,
    pub joint_unmeasured: f64,
    pub stderr_unmeasured: f64,
    pub advantage: f64,
    /// Combined standard error of the advantage estimate.
    pub sigma: f64,
}

fn run_trial(
    relation_projector: &Projector,
    adversary: &CollapsingAdversary,
    measure_x: bool,
    rng: &mut impl Rng,
) -> Result<bool> {
    let (related, state) = adversary.initial().measure_projector(relation_projector, rng)?;
    let state = if measure_x {
        state.measure_register(Reg::X, rng)?.1
    } else {
        state
    };
    let state = state.measure_register(Reg::Y, rng)?.1;
    let state = apply_ops(&state, &adversary.circuit)?;
    let (bit, _) = state.measure_register(Reg::Z, rng)?;
    Ok(related && bit == 1)
}

/// Runs both game variants for `trials` rounds each on independent
/// deterministic streams and reports the estimated advantage.
pub fn collapsing_game_sampled(
    relation: &CollapsingRelation,
    adversary: &CollapsingAdversary,
    trials: u64,
    master_seed: u64,
) -> Result<CollapsingGameReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let layout = adversary.layout();
    relation.check_layout(layout)?;
    let projector = relation.projector(layout)?;
    let mut hits_measured = 0u64;
    let mut hits_unmeasured = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        if run_trial(&projector, adversary, true, &mut rng)? {
            hits_measured += 1;
        }
        let mut rng = trial_rng(master_seed, (1u64 << 32) + t);
        if run_trial(&projector, adversary, false, &mut rng)? {
            hits_unmeasured += 1;
        }
    }
    let n = trials as f64;
    let joint_measured = hits_measured as f64 / n;
    let joint_unmeasured = hits_unmeasured as f64 / n;
    let stderr_measured = (joint_measured * (1.0 - joint_measured) / n).sqrt();
    let stderr_unmeasured = (joint_unmeasured * (1.0 - joint_unmeasured) / n).sqrt();
    Ok(CollapsingGameReport {
        trials,
        joint_measured,
        stderr_measured,
        joint_unmeasured,
        stderr_unmeasured,
        advantage: (joint_measured - joint_unmeasured).abs(),
        sigma: (stderr_measured * stderr_measured + stderr_unmeasured * stderr_unmeasured)
            .sqrt(),
    })
}

/// The unique-responses relation of a Σ-protocol at a fixed instance:
/// X' side indexes responses z, Y' side indexes (commitment, challenge)
/// pairs, and (z, (a, c)) is related exactly when the verifier accepts.
/// The protocol has quantum computationally unique responses exactly when
/// this relation is collapsing.
pub fn qcur_relation<P: SigmaProtocol + ?Sized>(
    protocol: &P,
    instance: u64,
) -> Result<CollapsingRelation> {
    let commitments = protocol.commitment_values();
    let challenges = protocol.challenge_count();
    let responses = protocol.response_count();
    let x_count = usize::try_from(responses)
        .map_err(|_| Error::InvalidArgument("response space too large".into()))?;
    let y_count = commitments.len() * challenges as usize;
    let entries = (x_count as u64) * (y_count as u64);
    if entries > tol::DEFAULT_TABLE_CAP {
        return Err(Error::Capacity {
            what: "unique-responses relation table",
            requested: entries,
            cap: tol::DEFAULT_TABLE_CAP,
        });
    }
    let mut table = Vec::with_capacity(x_count * y_count);
    for z in 0..responses {
        for &a in &commitments {
            for c in 0..challenges {
                table.push(protocol.verify(instance, a, c, z));
            }
        }
    }
    CollapsingRelation::new(x_count, y_count, table)
}

/// Result of checking a Σ-protocol's response register for collapsing.
#[derive(Clone, Debug, Serialize)]
pub struct QcurReport {
    pub protocol: String,
    pub instance: u64,
    pub response_values: usize,
    pub pair_values: usize,
    pub valid_cells: u64,
    /// Structural check: every (commitment, challenge) cell admits at
    /// most one accepting response.
    pub unique_responses: bool,
    pub joint_measured: f64,
    pub joint_unmeasured: f64,
    pub advantage: f64,
}

/// Builds the unique-responses relation, runs the exact collapsing game
/// against the given guessing circuit on the uniform related
/// superposition, and reports the advantage together with the structural
/// uniqueness check.
pub fn qcur_check_exact<P: SigmaProtocol + ?Sized>(
    protocol: &P,
    instance: u64,
    circuit_for: impl FnOnce(RegisterLayout) -> Result<Vec<StepOp>>,
) -> Result<QcurReport> {
    let relation = qcur_relation(protocol, instance)?;
    let layout = RegisterLayout::new(relation.x_count(), relation.y_count(), 2, 1)?;
    let adversary = CollapsingAdversary::uniform_over(&relation, circuit_for(layout)?)?;
    let exact = collapsing_advantage_exact(&relation, &adversary)?;
    Ok(QcurReport {
        protocol: protocol.name().to_string(),
        instance,
        response_values: relation.x_count(),
        pair_values: relation.y_count(),
        valid_cells: relation.valid_pairs(),
        unique_responses: relation.has_unique_partners(),
        joint_measured: exact.joint_measured,
        joint_unmeasured: exact.joint_unmeasured,
        advantage: exact.advantage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{DlogGroup, DlogProtocol, TwoResponseProtocol};

    fn tiny_hashed_protocol() -> DlogProtocol {
        let group = DlogGroup::new(23, 2).unwrap();
        DlogProtocol::with_challenge_bits(group, 3).unwrap()
    }

    #[test]
    fn pair_relation_fourier_distinguisher_has_advantage_one_half() {
        let relation = fourier_pair_relation(4).unwrap();
        assert!(!relation.has_unique_partners());
        let layout = RegisterLayout::new(8, 4, 2, 1).unwrap();
        let adversary =
            CollapsingAdversary::uniform_over(&relation, pair_fourier_circuit(layout).unwrap())
                .unwrap();
        let exact = collapsing_advantage_exact(&relation, &adversary).unwrap();
        // Measuring X' collapses each pair superposition, leaving the low
        // bit uniform after the pair Fourier step; unmeasured branches
        // interfere back to even values and the guess bit stays zero.
        assert!((exact.joint_measured - 0.5).abs() < 1e-12);
        assert_eq!(exact.joint_unmeasured, 0.0);
        assert!((exact.advantage - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unique_partner_relations_have_exactly_zero_advantage() {
        // A bijection and a strict injection; both leave at most one
        // partner per y, so the X' measurement is redundant and the two
        // variants agree term by term.
        let bijection = function_relation(6, 6, |x| (5 * x + 2) % 6).unwrap();
        let injection = function_relation(5, 9, |x| (2 * x + 1) % 9).unwrap();
        for relation in [bijection, injection] {
            assert!(relation.has_unique_partners());
            let layout =
                RegisterLayout::new(relation.x_count(), relation.y_count(), 2, 1).unwrap();
            let adversary = CollapsingAdversary::uniform_over(
                &relation,
                dft_marker_circuit(layout).unwrap(),
            )
            .unwrap();
            let exact = collapsing_advantage_exact(&relation, &adversary).unwrap();
            assert_eq!(exact.advantage, 0.0);
            assert!(exact.joint_measured > 0.0);
        }
    }

    #[test]
    fn constant_guess_makes_both_variants_agree() {
        let relation = fourier_pair_relation(3).unwrap();
        let layout = RegisterLayout::new(6, 3, 2, 1).unwrap();
        let adversary =
            CollapsingAdversary::uniform_over(&relation, constant_guess_circuit(layout).unwrap())
                .unwrap();
        let exact = collapsing_advantage_exact(&relation, &adversary).unwrap();
        assert!((exact.joint_measured - 1.0).abs() < 1e-12);
        assert!((exact.joint_unmeasured - 1.0).abs() < 1e-12);
        assert!(exact.advantage < 1e-12);
    }

    #[test]
    fn sampled_game_matches_the_exact_advantage() {
        let relation = fourier_pair_relation(4).unwrap();
        let layout = RegisterLayout::new(8, 4, 2, 1).unwrap();
        let adversary =
            CollapsingAdversary::uniform_over(&relation, pair_fourier_circuit(layout).unwrap())
                .unwrap();
        let exact = collapsing_advantage_exact(&relation, &adversary).unwrap();
        let sampled = collapsing_game_sampled(&relation, &adversary, 4000, 977).unwrap();
        assert!(
            (sampled.advantage - exact.advantage).abs() <= tol::SIGMA_FACTOR * sampled.sigma,
            "sampled {} vs exact {} (sigma {})",
            sampled.advantage,
            exact.advantage,
            sampled.sigma
        );
    }

    #[test]
    fn discrete_log_responses_are_unique_and_collapsing() {
        let protocol = tiny_hashed_protocol();
        // Instance 16 = g^4 lies in the subgroup.
        let report = qcur_check_exact(&protocol, 16, dft_marker_circuit).unwrap();
        assert!(report.unique_responses);
        assert_eq!(report.advantage, 0.0);
        // Every (commitment, challenge) cell has exactly one valid z.
        assert_eq!(report.valid_cells, 11 * 8);
    }

    #[test]
    fn two_response_protocol_is_not_collapsing() {
        let protocol = TwoResponseProtocol::new(4).unwrap();
        let report = qcur_check_exact(&protocol, 0, pair_fourier_circuit).unwrap();
        assert!(!report.unique_responses);
        assert!((report.advantage - 0.5).abs() < 1e-12);
        assert_eq!(report.valid_cells, 8);
    }

    #[test]
    fn malformed_relations_are_rejected() {
        assert!(CollapsingRelation::new(0, 3, vec![]).is_err());
        assert!(CollapsingRelation::new(2, 2, vec![true; 3]).is_err());
        // Layout mismatch.
        let relation = fourier_pair_relation(2).unwrap();
        let wrong = RegisterLayout::new(3, 2, 2, 1).unwrap();
        assert!(relation.projector(wrong).is_err());
    }
}
