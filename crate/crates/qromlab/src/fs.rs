//! The Fiat-Shamir transformation and its reduction to interactive play.
//!
//! Non-interactive proofs replace the verifier's challenge with an oracle
//! value at the point (statement, commitment). Two harnesses live here:
//!
//! * classical prove/verify against a tabulated oracle, with a retry loop
//!   for protocols whose prover aborts, and
//! * the reduction: an interactive prover that runs a quantum proof-forging
//!   algorithm through the two-stage simulator, so the interactive success
//!   is bounded below by the forger's success divided by the reduction
//!   constant.
//!
//! The concrete forger used in tests and in the command-line harness is an
//! honest prover lifted to a single-query oracle algorithm: it queries the
//! oracle on a uniform superposition of commitments, writes the response
//! into the answer register, and uncomputes the query register from the
//! response — so the reduction's guarantee can be checked against its
//! known success probability.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryStep, OracleAlgorithm, StepOp};
use crate::error::{Error, Result};
use crate::linalg::KahanSum;
use crate::oracle::{FiniteFunction, KWiseFamilyMember};
use crate::qsim::{
    Permutation, QuantumPredicate, Reg, RegisterLayout, StateVector,
};
use crate::reprogram::{stage_one, stage_two_state, BoundReport};
use crate::sigma::{GameReport, SigmaProtocol};
use crate::tol;
use crate::trial_rng;

/// An ordered product of value lists, used as an oracle domain. The first
/// factor is the most significant mixed-radix digit.
#[derive(Clone, Debug)]
pub struct ProductDomain {
    factors: Vec<Vec<u64>>,
}

impl ProductDomain {
    pub fn new(factors: Vec<Vec<u64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("empty domain product".into()));
        }
        for factor in &factors {
            if factor.is_empty() {
                return Err(Error::InvalidArgument("empty domain factor".into()));
            }
            let mut sorted = factor.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != factor.len() {
                return Err(Error::InvalidArgument(
                    "domain factor has duplicate values".into(),
                ));
            }
        }
        Ok(ProductDomain { factors })
    }

    pub fn size(&self) -> usize {
        self.factors.iter().map(Vec::len).product()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// Mixed-radix index of a value tuple.
    pub fn encode(&self, values: &[u64]) -> Result<usize> {
        if values.len() != self.factors.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} domain components, got {}",
                self.factors.len(),
                values.len()
            )));
        }
        let mut idx = 0usize;
        for (factor, &v) in self.factors.iter().zip(values) {
            let pos = factor
                .iter()
                .position(|&f| f == v)
                .ok_or(Error::OutOfRange {
                    what: "domain component",
                    value: v,
                    bound: factor.len() as u64,
                })?;
            idx = idx * factor.len() + pos;
        }
        Ok(idx)
    }

    /// Inverse of [`ProductDomain::encode`].
    pub fn decode(&self, mut point: usize) -> Result<Vec<u64>> {
        if point >= self.size() {
            return Err(Error::OutOfRange {
                what: "domain point",
                value: point as u64,
                bound: self.size() as u64,
            });
        }
        let mut out = vec![0u64; self.factors.len()];
        for (slot, factor) in out.iter_mut().zip(&self.factors).rev() {
            *slot = factor[point % factor.len()];
            point /= factor.len();
        }
        Ok(out)
    }
}

/// Oracle domain hashing (statement, commitment) pairs.
pub fn statement_commitment_domain(protocol: &impl SigmaProtocol) -> Result<ProductDomain> {
    ProductDomain::new(vec![
        protocol.instance_values(),
        protocol.commitment_values(),
    ])
}

/// Oracle domain for proofs about one fixed statement: the commitments
/// alone index the oracle.
pub fn fixed_statement_domain(
    protocol: &impl SigmaProtocol,
    instance: u64,
) -> Result<ProductDomain> {
    ProductDomain::new(vec![vec![instance], protocol.commitment_values()])
}

/// Number of oracle output bits needed for the protocol's challenge space,
/// which must be a power of two.
pub fn challenge_bits(protocol: &impl SigmaProtocol) -> Result<u32> {
    let count = protocol.challenge_count();
    if !count.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "challenge space {count} is not a power of two; restrict it before hashing"
        )));
    }
    Ok(count.trailing_zeros())
}

/// A non-interactive proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsProof {
    pub commitment: u64,
    pub response: u64,
}

fn check_oracle_shape(
    protocol: &impl SigmaProtocol,
    domain: &ProductDomain,
    h: &FiniteFunction,
) -> Result<()> {
    if h.domain_size() != domain.size() {
        return Err(Error::InvalidArgument(format!(
            "oracle domain {} does not match the proof domain {}",
            h.domain_size(),
            domain.size()
        )));
    }
    let bits = challenge_bits(protocol)?;
    if h.range_bits() != bits {
        return Err(Error::InvalidArgument(format!(
            "oracle range 2^{} does not match the challenge space 2^{bits}",
            h.range_bits()
        )));
    }
    Ok(())
}

/// Produces a proof by hashing the commitment into a challenge, retrying
/// with fresh commitments when the prover aborts.
pub fn fs_prove(
    protocol: &impl SigmaProtocol,
    domain: &ProductDomain,
    h: &FiniteFunction,
    instance: u64,
    witness: u64,
    rng: &mut impl Rng,
    max_attempts: u32,
) -> Result<FsProof> {
    check_oracle_shape(protocol, domain, h)?;
    for _ in 0..max_attempts {
        let (commitment, state) = protocol.commit(instance, witness, rng)?;
        let point = domain.encode(&[instance, commitment])?;
        let challenge = h.evaluate(point)?;
        if let Some(response) = protocol.respond(&state, challenge)? {
            return Ok(FsProof {
                commitment,
                response,
            });
        }
    }
    Err(Error::ProofSearchExhausted {
        iterations: max_attempts,
    })
}

/// As [`fs_prove`], additionally reporting how many attempts were spent.
pub fn fs_prove_counted(
    protocol: &impl SigmaProtocol,
    domain: &ProductDomain,
    h: &FiniteFunction,
    instance: u64,
    witness: u64,
    rng: &mut impl Rng,
    max_attempts: u32,
) -> Result<(FsProof, u32)> {
    check_oracle_shape(protocol, domain, h)?;
    for attempt in 1..=max_attempts {
        let (commitment, state) = protocol.commit(instance, witness, rng)?;
        let point = domain.encode(&[instance, commitment])?;
        let challenge = h.evaluate(point)?;
        if let Some(response) = protocol.respond(&state, challenge)? {
            return Ok((
                FsProof {
                    commitment,
                    response,
                },
                attempt,
            ));
        }
    }
    Err(Error::ProofSearchExhausted {
        iterations: max_attempts,
    })
}

/// Verifies a proof; malformed proofs are rejections, not errors.
pub fn fs_verify(
    protocol: &impl SigmaProtocol,
    domain: &ProductDomain,
    h: &FiniteFunction,
    instance: u64,
    proof: &FsProof,
) -> bool {
    if check_oracle_shape(protocol, domain, h).is_err() {
        return false;
    }
    let Ok(point) = domain.encode(&[instance, proof.commitment]) else {
        return false;
    };
    let Ok(challenge) = h.evaluate(point) else {
        return false;
    };
    protocol.verify(instance, proof.commitment, challenge, proof.response)
}

/// The verification predicate as a cell family over (domain point, oracle
/// value): cell (p, theta) accepts the Z values that are valid responses
/// for the decoded statement and commitment under challenge theta.
pub fn verification_predicate<P>(protocol: P, domain: ProductDomain) -> QuantumPredicate
where
    P: SigmaProtocol + Send + Sync + 'static,
{
    QuantumPredicate::classical(move |point, theta, z| {
        let Ok(pair) = domain.decode(point) else {
            return false;
        };
        protocol.verify(pair[0], pair[1], theta, z as u64)
    })
}

/// Lifts an honest prover for a fixed statement to a single-query oracle
/// algorithm. The X register indexes the oracle domain (the commitment,
/// since the statement is fixed), Y carries the oracle response, Z the
/// protocol response.
///
/// The run: prepare a uniform superposition of masking exponents y with
/// X = index of g^y; query, so Y holds the challenge; add y + c w into Z;
/// recompute c from (commitment, response) and subtract it from Y. The
/// final state has Y = 0 and an accepting (commitment, response) pair for
/// the challenge the oracle chose. Uncomputing the challenge needs w to be
/// invertible, so a zero witness is rejected.
pub fn honest_prover_algorithm(
    protocol: &crate::sigma::DlogProtocol,
    instance: u64,
    witness: u64,
) -> Result<OracleAlgorithm> {
    let group = protocol.group().clone();
    if !protocol.relation_holds(instance, witness) {
        return Err(Error::InvalidArgument(
            "honest prover needs a valid witness".into(),
        ));
    }
    if witness == 0 {
        return Err(Error::InvalidArgument(
            "the lifted prover uncomputes challenges through the witness; w = 0 is excluded"
        .into()));
    }
    let r = group.order();
    let challenge_count = protocol.challenge_count();
    let bits = challenge_bits(protocol)?;
    let dim_x = r as usize; // one domain point per commitment g^y
    let dim_y = 1usize << bits;
    let dim_z = r as usize;
    let layout = RegisterLayout::new_capped(
        dim_x,
        dim_y,
        dim_z,
        1,
        dim_x * dim_y * dim_z,
    )?;

    let amp = Complex64::new(1.0 / (dim_x as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for y in 0..dim_x {
        amps[layout.index(y, 0, 0, 0)] = amp;
    }
    let initial = StateVector::from_amplitudes(layout, amps)?.state;

    // Response write: Z += y + c w (mod r). The X digit is the masking
    // exponent because commitments are listed in exponent order.
    let respond = Permutation::from_digit_map(layout, |x, y, z, e| {
        let c = y as u64;
        let masked = (x as u64 + c * witness) % r;
        (x, y, (z as u64 + masked) as usize % r as usize, e)
    })?;
    // Challenge uncompute: Y -= c(commitment, response) where
    // c(a, z) = (z - y_a) / w mod r, reduced into the oracle range.
    let w_inv = group
        .invert_mod_order(witness)
        .expect("nonzero witness in a prime-order group");
    let uncompute = Permutation::from_digit_map(layout, |x, y, z, e| {
        let recovered = (z as u64 + r - x as u64 % r) % r * w_inv % r % challenge_count;
        let ny = (y as u64 + challenge_count - recovered) % challenge_count;
        (x, ny as usize, z, e)
    })?;

    Ok(OracleAlgorithm::new(
        initial,
        vec![AdversaryStep {
            ops: vec![StepOp::Permutation(respond), StepOp::Permutation(uncompute)],
        }],
    ))
}

/// One interactive round played by the reduction and its outcome.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReductionRound {
    pub statement: u64,
    pub commitment: u64,
    pub challenge: u64,
    pub response: u64,
    pub accepted: bool,
}

/// Drives a proof-forging oracle algorithm through the two-stage simulator
/// as an interactive prover for a fixed statement.
pub struct SimulatedProver<'a, P: SigmaProtocol> {
    pub protocol: &'a P,
    pub domain: &'a ProductDomain,
    pub forger: &'a OracleAlgorithm,
}

impl<'a, P: SigmaProtocol> SimulatedProver<'a, P> {
    /// Plays one interactive round: draw the forger's oracle from the
    /// 4-wise family, run stage one to commit, feed the verifier's
    /// challenge into stage two, and measure the response.
    pub fn play_round(&self, rng: &mut impl Rng) -> Result<ReductionRound> {
        let bits = challenge_bits(self.protocol)?;
        let member = KWiseFamilyMember::sample(
            2 * (self.forger.query_count() as u32 + 1),
            self.domain.size(),
            bits,
            rng,
        )?;
        let h = member.materialize()?;
        let checkpoint = stage_one(self.forger, &h, rng)?;
        let challenge = rng.gen_range(0..self.protocol.challenge_count());
        let replay = rng.gen::<bool>();
        let final_state = stage_two_state(self.forger, &checkpoint, challenge, replay)?;
        let (z, _) = final_state.measure_register(Reg::Z, rng)?;
        let pair = self.domain.decode(checkpoint.measured_x)?;
        let accepted = self
            .protocol
            .verify(pair[0], pair[1], challenge, z as u64);
        Ok(ReductionRound {
            statement: pair[0],
            commitment: pair[1],
            challenge,
            response: z as u64,
            accepted,
        })
    }
}

/// Accumulated result of the reduction game.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub q: usize,
    pub challenge_space: u64,
    pub trials: u64,
    pub game: GameReport,
    /// Forger success divided by 2 (q+1) (2q+3), minus the query-mass term
    /// 1 / (2 (q+1) |C|): the guaranteed interactive success.
    pub guaranteed: f64,
    pub forger_success: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Plays the reduction game `trials` times and compares the acceptance
/// frequency against the guarantee computed from the forger's known
/// success probability.
pub fn reduction_game<P: SigmaProtocol>(
    prover: &SimulatedProver<'_, P>,
    forger_success: f64,
    trials: u64,
    master_seed: u64,
) -> Result<ReductionReport> {
    let q = prover.forger.query_count();
    let challenge_space = prover.protocol.challenge_count();
    let mut successes = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        if prover.play_round(&mut rng)?.accepted {
            successes += 1;
        }
    }
    let game = GameReport::from_counts(trials, successes);
    let constant = crate::reprogram::reduction_constant(q);
    let guaranteed = forger_success / constant
        - 1.0 / (2.0 * (q as f64 + 1.0) * challenge_space as f64);
    let holds = game.frequency
        >= guaranteed - tol::SIGMA_FACTOR * game.stderr - tol::INEQUALITY_SLACK;
    Ok(ReductionReport {
        q,
        challenge_space,
        trials,
        game,
        guaranteed,
        forger_success,
        constant,
        holds,
    })
}

/// Exact pointwise bound reports for a forger over one sampled family
/// member, one report per domain point with nonzero query mass.
pub fn pointwise_reports(
    forger: &OracleAlgorithm,
    predicate: &QuantumPredicate,
    h: &FiniteFunction,
    points: &[usize],
) -> Result<Vec<BoundReport>> {
    points
        .iter()
        .map(|&x0| crate::reprogram::check_success_bound(forger, h, x0, predicate))
        .collect()
}

/// The forger's exact acceptance probability in the reduction game,
/// averaged over the family draw, slot, coin, and challenge, with the
/// verifier's check applied to the measured (commitment, response) only.
/// Like the simulator-success cells but without the final X projection,
/// so it dominates the summed pointwise left-hand sides.
pub fn reduction_success_exact<P: SigmaProtocol>(
    prover: &SimulatedProver<'_, P>,
    h: &FiniteFunction,
) -> Result<f64> {
    let forger = prover.forger;
    let layout = forger.layout();
    let q = forger.query_count();
    let challenge_count = prover.protocol.challenge_count();
    let mut acc = KahanSum::new();
    let mut prefix = forger.initial_state().clone();
    let dim_x = layout.dim(Reg::X);
    for i in 0..=q {
        if i > 0 {
            prefix = forger.run_segment(h, i - 1, i, &prefix)?;
        }
        for x0 in 0..dim_x {
            let checkpoint = crate::reprogram::SimulatorCheckpoint {
                query_index: i,
                measured_x: x0,
                outcome_prob: 1.0,
                state: match prefix.measure_register_forced(Reg::X, x0) {
                    Ok((_, post)) => post,
                    Err(Error::ZeroProbabilityBranch { .. }) => continue,
                    Err(e) => return Err(e),
                },
                h: h.clone(),
            };
            let mass = prefix.register_distribution(Reg::X)[x0];
            let pair = prover.domain.decode(x0)?;
            for replay in [false, true] {
                for challenge in 0..challenge_count {
                    let final_state =
                        stage_two_state(forger, &checkpoint, challenge, replay)?;
                    let z_masses = final_state.register_distribution(Reg::Z);
                    let mut cell = KahanSum::new();
                    for (z, m) in z_masses.iter().enumerate() {
                        if prover.protocol.verify(pair[0], pair[1], challenge, z as u64) {
                            cell.add(*m);
                        }
                    }
                    acc.add(mass * cell.value());
                }
            }
        }
    }
    Ok(acc.value() / ((q + 1) as f64 * 2.0 * challenge_count as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{DlogProtocol, RejectingProtocol};

    #[test]
    fn product_domain_round_trips() {
        let d = ProductDomain::new(vec![vec![7, 9], vec![4, 5, 6]]).unwrap();
        assert_eq!(d.size(), 6);
        for p in 0..6 {
            let values = d.decode(p).unwrap();
            assert_eq!(d.encode(&values).unwrap(), p);
        }
        assert_eq!(d.encode(&[9, 4]).unwrap(), 3);
        assert!(d.encode(&[8, 4]).is_err());
        assert!(d.encode(&[9]).is_err());
        assert!(d.decode(6).is_err());
        assert!(ProductDomain::new(vec![vec![1, 1]]).is_err());
        assert!(ProductDomain::new(vec![]).is_err());
    }

    #[test]
    fn proofs_round_trip_against_a_tabulated_oracle() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let domain = statement_commitment_domain(&protocol).unwrap();
        let h = FiniteFunction::sample_uniform(domain.size(), 6, 5).unwrap();
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let (x, w) = protocol.generate(&mut rng).unwrap();
            let proof = fs_prove(&protocol, &domain, &h, x, w, &mut rng, 16).unwrap();
            assert!(fs_verify(&protocol, &domain, &h, x, &proof));
            // Tampered proofs are rejected.
            let bad = FsProof {
                response: (proof.response + 1) % 67,
                ..proof
            };
            assert!(!fs_verify(&protocol, &domain, &h, x, &bad));
            let malformed = FsProof {
                commitment: 268, // not a subgroup element for this group
                response: proof.response,
            };
            assert!(!fs_verify(&protocol, &domain, &h, x, &malformed));
        }
    }

    #[test]
    fn retry_loop_spends_the_expected_attempts() {
        // Abort probability 1/4 per attempt: the attempt count is
        // geometric with mean 4/3.
        let inner = DlogProtocol::lab_default().unwrap();
        let protocol = RejectingProtocol::new(inner, 1, 4).unwrap();
        let domain = statement_commitment_domain(&protocol).unwrap();
        let h = FiniteFunction::sample_uniform(domain.size(), 6, 77).unwrap();
        let mut rng = trial_rng(2, 0);
        let trials = 20_000u32;
        let mut total_attempts = 0u64;
        for _ in 0..trials {
            let (x, w) = protocol.generate(&mut rng).unwrap();
            let (proof, attempts) =
                fs_prove_counted(&protocol, &domain, &h, x, w, &mut rng, 64).unwrap();
            assert!(fs_verify(&protocol, &domain, &h, x, &proof));
            total_attempts += u64::from(attempts);
        }
        let mean = total_attempts as f64 / f64::from(trials);
        // Var of a geometric(3/4) attempt count is (1/4)/(9/16) = 4/9.
        let se = (4.0 / 9.0 / f64::from(trials)).sqrt();
        assert!(
            (mean - 4.0 / 3.0).abs() <= tol::SIGMA_FACTOR * se,
            "mean attempts {mean}"
        );
    }

    #[test]
    fn prover_abort_budget_exhaustion_is_an_error() {
        let inner = DlogProtocol::lab_default().unwrap();
        let protocol = RejectingProtocol::new(inner, 3, 4).unwrap();
        let domain = statement_commitment_domain(&protocol).unwrap();
        let h = FiniteFunction::sample_uniform(domain.size(), 6, 78).unwrap();
        let mut rng = trial_rng(3, 0);
        let (x, w) = protocol.generate(&mut rng).unwrap();
        let mut saw_exhaustion = false;
        for _ in 0..200 {
            if matches!(
                fs_prove(&protocol, &domain, &h, x, w, &mut rng, 1),
                Err(Error::ProofSearchExhausted { .. })
            ) {
                saw_exhaustion = true;
                break;
            }
        }
        assert!(saw_exhaustion);
    }

    #[test]
    fn lifted_prover_is_a_single_query_domain_copier() {
        // On each commitment branch the lifted prover behaves like the
        // classical copy adversary: it learns the challenge at the
        // queried point, answers it, and restores Y to zero.
        let protocol = DlogProtocol::lab_default().unwrap();
        let mut rng = trial_rng(4, 0);
        let (x, w) = {
            let mut pair = protocol.generate(&mut rng).unwrap();
            while pair.1 == 0 {
                pair = protocol.generate(&mut rng).unwrap();
            }
            pair
        };
        let forger = honest_prover_algorithm(&protocol, x, w).unwrap();
        assert_eq!(forger.query_count(), 1);
        let domain = fixed_statement_domain(&protocol, x).unwrap();
        let h = FiniteFunction::sample_uniform(domain.size(), 6, 9).unwrap();
        let final_state = forger.run(&h).unwrap();

        // Every (commitment index, response) branch verifies under the
        // challenge the oracle assigned to that commitment.
        let layout = forger.layout();
        let commitments = protocol.commitment_values();
        let mut verified_mass = KahanSum::new();
        for (idx, amp) in final_state.amplitudes().iter().enumerate() {
            let m = amp.norm_sqr();
            if m < 1e-20 {
                continue;
            }
            let (xi, y, z, _) = layout.unindex(idx);
            assert_eq!(y, 0);
            let c = h.evaluate(xi).unwrap();
            assert!(protocol.verify(x, commitments[xi], c, z as u64));
            verified_mass.add(m);
        }
        assert!((verified_mass.value() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lifted_prover_rejects_zero_witnesses() {
        let protocol = DlogProtocol::lab_default().unwrap();
        assert!(honest_prover_algorithm(&protocol, 1, 0).is_err());
        assert!(honest_prover_algorithm(&protocol, 5, 3).is_err()); // wrong witness
    }

    #[test]
    fn reduction_round_outcomes_are_well_formed() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let x = protocol.group().power_of_g(13);
        let forger = honest_prover_algorithm(&protocol, x, 13).unwrap();
        let domain = fixed_statement_domain(&protocol, x).unwrap();
        let prover = SimulatedProver {
            protocol: &protocol,
            domain: &domain,
            forger: &forger,
        };
        let mut rng = trial_rng(6, 0);
        let round = prover.play_round(&mut rng).unwrap();
        assert_eq!(round.statement, x);
        assert!(round.challenge < 64);
    }

    fn tiny_hashed_protocol() -> DlogProtocol {
        // p = 23, g = 2 (order 11), challenges cut to three bits so the
        // oracle range fits: |C| = 8.
        let group = crate::sigma::DlogGroup::new(23, 2).unwrap();
        DlogProtocol::with_challenge_bits(group, 3).unwrap()
    }

    #[test]
    fn reduction_success_matches_the_per_branch_hand_computation() {
        // The lifted prover accepts with probability 1 when the slot-0
        // coin reprograms before the query, and with probability 1/|C|
        // in the three other (slot, coin) cells: (1 + 3/|C|)/4.
        let protocol = tiny_hashed_protocol();
        let x = protocol.group().power_of_g(4);
        let forger = honest_prover_algorithm(&protocol, x, 4).unwrap();
        let domain = fixed_statement_domain(&protocol, x).unwrap();
        let prover = SimulatedProver {
            protocol: &protocol,
            domain: &domain,
            forger: &forger,
        };
        let h = FiniteFunction::sample_uniform(domain.size(), 3, 31).unwrap();
        let exact = reduction_success_exact(&prover, &h).unwrap();
        let want = 0.25 * (1.0 + 3.0 / 8.0);
        assert!((exact - want).abs() < 1e-9, "exact {exact}, want {want}");
    }

    #[test]
    fn reduction_game_beats_the_guarantee() {
        let protocol = tiny_hashed_protocol();
        let x = protocol.group().power_of_g(7);
        let forger = honest_prover_algorithm(&protocol, x, 7).unwrap();
        let domain = fixed_statement_domain(&protocol, x).unwrap();
        let prover = SimulatedProver {
            protocol: &protocol,
            domain: &domain,
            forger: &forger,
        };
        let report = reduction_game(&prover, 1.0, 2_000, 12).unwrap();
        assert!(report.holds);
        // Guarantee is 1/20 - 1/32 for a one-query forger with |C| = 8.
        assert!((report.guaranteed - (0.05 - 1.0 / 32.0)).abs() < 1e-12);
        // The observed frequency should be near (1 + 3/8)/4, far above.
        let want = 0.25 * (1.0 + 3.0 / 8.0);
        assert!(
            report.game.consistent_with(want, tol::SIGMA_FACTOR),
            "freq {} vs {want}",
            report.game.frequency
        );
    }
}
