//! Three-move public-coin proof systems over small integer spaces.
//!
//! Everything here is desk scale: instances, commitments, challenges and
//! responses are plain `u64` values drawn from enumerable sets, so games
//! can be played exhaustively and witnesses checked by brute force. The
//! concrete protocols are a discrete-log protocol over a prime-order
//! subgroup of Z_p^* (honest-verifier zero knowledge is not modelled, only
//! completeness and special soundness), a rejection-sampling wrapper whose
//! prover refuses a fixed fraction of challenges, and a gadget protocol
//! with two valid responses per challenge used to exercise extractors on
//! non-unique response sets.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ExtractFailure, Result};
use crate::linalg::KahanSum;
use crate::trial_rng;

/// One accepted or rejected conversation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub commitment: u64,
    pub challenge: u64,
    pub response: u64,
}

/// Prover-side secret state between the commit and response moves.
#[derive(Clone, Copy, Debug)]
pub struct ProverState {
    pub instance: u64,
    pub witness: u64,
    /// Commit-phase randomness (the masking exponent for discrete log).
    pub randomness: u64,
    /// Extra per-attempt randomness for protocols that abort.
    pub aux: u64,
}

/// A three-move public-coin protocol with enumerable message spaces.
///
/// Challenges are the integers `0..challenge_count()` and responses live in
/// `0..response_count()`; both bounds are small enough to enumerate.
pub trait SigmaProtocol {
    fn name(&self) -> &'static str;

    /// Every statement the protocol can be asked about, valid or not.
    fn instance_values(&self) -> Vec<u64>;

    /// Every commitment an honest prover can send, in a fixed order. The
    /// position of a commitment in this list is its index in oracle
    /// domains.
    fn commitment_values(&self) -> Vec<u64>;

    fn challenge_count(&self) -> u64;

    fn response_count(&self) -> u64;

    /// Number of accepting transcripts on one commitment, with pairwise
    /// distinct challenges, from which a witness can be computed.
    fn soundness_t(&self) -> usize;

    fn relation_holds(&self, instance: u64, witness: u64) -> bool;

    fn instance_in_language(&self, instance: u64) -> bool;

    /// Samples a true statement together with a witness.
    fn generate(&self, rng: &mut dyn RngCore) -> Result<(u64, u64)>;

    fn commit(
        &self,
        instance: u64,
        witness: u64,
        rng: &mut dyn RngCore,
    ) -> Result<(u64, ProverState)>;

    /// `None` models a prover abort (rejection sampling); callers retry
    /// with a fresh commitment.
    fn respond(&self, state: &ProverState, challenge: u64) -> Result<Option<u64>>;

    fn verify(&self, instance: u64, commitment: u64, challenge: u64, response: u64) -> bool;

    /// All responses the verifier accepts for a fixed first two moves.
    fn valid_responses(&self, instance: u64, commitment: u64, challenge: u64) -> Vec<u64> {
        (0..self.response_count())
            .filter(|&z| self.verify(instance, commitment, challenge, z))
            .collect()
    }

    /// Computes a witness from accepting transcripts on one commitment.
    fn extract_witness(&self, instance: u64, transcripts: &[Transcript]) -> Result<u64>;
}

/// A prime-order cyclic subgroup of Z_p^*.
#[derive(Clone, Debug)]
pub struct DlogGroup {
    modulus: u64,
    generator: u64,
    order: u64,
    /// elements[k] = generator^k mod modulus.
    elements: Vec<u64>,
    /// exponent_of[v] = Some(k) iff v = generator^k.
    exponent_of: Vec<Option<u32>>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl DlogGroup {
    /// Builds the subgroup generated by `generator` mod the prime
    /// `modulus`. The subgroup order must itself be prime so challenge
    /// differences are invertible.
    pub fn new(modulus: u64, generator: u64) -> Result<Self> {
        if modulus >= 1 << 31 {
            return Err(Error::InvalidGroup(format!(
                "modulus {modulus} too large for overflow-free arithmetic"
            )));
        }
        if !is_prime(modulus) {
            return Err(Error::InvalidGroup(format!("modulus {modulus} is not prime")));
        }
        if generator < 2 || generator >= modulus {
            return Err(Error::InvalidGroup(format!(
                "generator {generator} outside 2..{modulus}"
            )));
        }
        let mut elements = vec![1u64];
        let mut v = generator;
        while v != 1 {
            elements.push(v);
            v = v * generator % modulus;
            if elements.len() as u64 > modulus {
                return Err(Error::InvalidGroup("generator order overflow".into()));
            }
        }
        let order = elements.len() as u64;
        if !is_prime(order) {
            return Err(Error::InvalidGroup(format!(
                "generator order {order} is not prime"
            )));
        }
        let mut exponent_of = vec![None; modulus as usize];
        for (k, &e) in elements.iter().enumerate() {
            exponent_of[e as usize] = Some(k as u32);
        }
        Ok(DlogGroup {
            modulus,
            generator,
            order,
            elements,
            exponent_of,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Prime order of the generator.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Subgroup elements in exponent order.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a % self.modulus * (b % self.modulus) % self.modulus
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut base = base % self.modulus;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.modulus;
            }
            base = base * base % self.modulus;
            exp >>= 1;
        }
        acc
    }

    /// Generator power, via the precomputed table.
    pub fn power_of_g(&self, exp: u64) -> u64 {
        self.elements[(exp % self.order) as usize]
    }

    /// Discrete log base the generator, when the value is in the subgroup.
    pub fn dlog(&self, value: u64) -> Option<u64> {
        if value >= self.modulus {
            return None;
        }
        self.exponent_of[value as usize].map(u64::from)
    }

    /// Inverse of `value` mod the subgroup order (value must be nonzero
    /// mod the order).
    pub fn invert_mod_order(&self, value: u64) -> Option<u64> {
        let v = value % self.order;
        if v == 0 {
            return None;
        }
        // The order is prime, so Fermat inversion applies.
        let mut acc = 1u64;
        let mut base = v;
        let mut exp = self.order - 2;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.order;
            }
            base = base * base % self.order;
            exp >>= 1;
        }
        Some(acc)
    }

    /// Some element of Z_p^* outside the subgroup, if one exists; these are
    /// the false statements of the discrete-log language.
    pub fn element_outside_subgroup(&self) -> Option<u64> {
        (1..self.modulus).find(|&v| self.exponent_of[v as usize].is_none())
    }
}

/// The discrete-log protocol: statement x, witness w with x = g^w; the
/// prover sends a = g^y, receives a challenge c, and answers
/// z = y + c w mod r; the verifier accepts iff g^z = a x^c.
#[derive(Clone, Debug)]
pub struct DlogProtocol {
    group: DlogGroup,
    challenge_count: u64,
}

impl DlogProtocol {
    /// Challenge space Z_r (the full subgroup order).
    pub fn new(group: DlogGroup) -> Self {
        let challenge_count = group.order();
        DlogProtocol {
            group,
            challenge_count,
        }
    }

    /// Challenge space restricted to `0..2^bits`, as required when the
    /// challenge is produced by an oracle with bit-string outputs.
    pub fn with_challenge_bits(group: DlogGroup, bits: u32) -> Result<Self> {
        let count = 1u64
            .checked_shl(bits)
            .filter(|&c| c <= group.order())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "challenge space 2^{bits} exceeds the group order {}",
                    group.order()
                ))
            })?;
        Ok(DlogProtocol {
            group,
            challenge_count: count,
        })
    }

    pub fn group(&self) -> &DlogGroup {
        &self.group
    }

    /// The standard desk-scale parameters: p = 269, g = 16 of order 67,
    /// challenges restricted to six bits.
    pub fn lab_default() -> Result<Self> {
        let group = DlogGroup::new(269, 16)?;
        DlogProtocol::with_challenge_bits(group, 6)
    }

    /// A deliberately tiny group (p = 23, g = 2 of order 11) for
    /// exhaustive sweeps.
    pub fn tiny() -> Result<Self> {
        Ok(DlogProtocol::new(DlogGroup::new(23, 2)?))
    }
}

impl SigmaProtocol for DlogProtocol {
    fn name(&self) -> &'static str {
        "dlog"
    }

    fn instance_values(&self) -> Vec<u64> {
        (1..self.group.modulus()).collect()
    }

    fn commitment_values(&self) -> Vec<u64> {
        self.group.elements().to_vec()
    }

    fn challenge_count(&self) -> u64 {
        self.challenge_count
    }

    fn response_count(&self) -> u64 {
        self.group.order()
    }

    fn soundness_t(&self) -> usize {
        2
    }

    fn relation_holds(&self, instance: u64, witness: u64) -> bool {
        instance < self.group.modulus() && self.group.power_of_g(witness) == instance
    }

    fn instance_in_language(&self, instance: u64) -> bool {
        self.group.dlog(instance).is_some()
    }

    fn generate(&self, rng: &mut dyn RngCore) -> Result<(u64, u64)> {
        let witness = rng.gen_range(0..self.group.order());
        Ok((self.group.power_of_g(witness), witness))
    }

    fn commit(
        &self,
        instance: u64,
        witness: u64,
        rng: &mut dyn RngCore,
    ) -> Result<(u64, ProverState)> {
        if !self.relation_holds(instance, witness) {
            return Err(Error::InvalidArgument(
                "honest prover needs a valid witness".into(),
            ));
        }
        let randomness = rng.gen_range(0..self.group.order());
        Ok((
            self.group.power_of_g(randomness),
            ProverState {
                instance,
                witness,
                randomness,
                aux: 0,
            },
        ))
    }

    fn respond(&self, state: &ProverState, challenge: u64) -> Result<Option<u64>> {
        if challenge >= self.challenge_count {
            return Err(Error::OutOfRange {
                what: "challenge",
                value: challenge,
                bound: self.challenge_count,
            });
        }
        let r = self.group.order();
        Ok(Some((state.randomness + challenge % r * (state.witness % r)) % r))
    }

    fn verify(&self, instance: u64, commitment: u64, challenge: u64, response: u64) -> bool {
        if instance == 0
            || instance >= self.group.modulus()
            || commitment == 0
            || commitment >= self.group.modulus()
            || challenge >= self.challenge_count
            || response >= self.group.order()
        {
            return false;
        }
        let lhs = self.group.power_of_g(response);
        let rhs = self.group.mul(commitment, self.group.pow(instance, challenge));
        lhs == rhs
    }

    fn extract_witness(&self, instance: u64, transcripts: &[Transcript]) -> Result<u64> {
        if transcripts.len() < 2 {
            return Err(Error::Extraction(ExtractFailure::TooFewTranscripts {
                got: transcripts.len(),
                need: 2,
            }));
        }
        let first = transcripts[0];
        let second = transcripts
            .iter()
            .skip(1)
            .find(|t| t.challenge != first.challenge && t.commitment == first.commitment)
            .copied()
            .ok_or(Error::Extraction(ExtractFailure::ChallengeCollision))?;
        for t in [first, second] {
            if !self.verify(instance, t.commitment, t.challenge, t.response) {
                return Err(Error::Extraction(ExtractFailure::RejectedTranscript));
            }
        }
        let r = self.group.order();
        let dz = (first.response + r - second.response % r) % r;
        let dc = (first.challenge % r + r - second.challenge % r) % r;
        let inv = self
            .group
            .invert_mod_order(dc)
            .ok_or(Error::Extraction(ExtractFailure::ChallengeCollision))?;
        Ok(dz * inv % r)
    }
}

/// Wraps a protocol with a prover that aborts on a `deny_numerator /
/// deny_denominator` fraction of (attempt, challenge) pairs, uniformly in
/// the per-attempt randomness. Verification is unchanged.
#[derive(Clone, Debug)]
pub struct RejectingProtocol<P> {
    inner: P,
    deny_numerator: u64,
    deny_denominator: u64,
}

impl<P: SigmaProtocol> RejectingProtocol<P> {
    pub fn new(inner: P, deny_numerator: u64, deny_denominator: u64) -> Result<Self> {
        if deny_denominator == 0 || deny_numerator >= deny_denominator {
            return Err(Error::InvalidArgument(
                "abort fraction must be a proper fraction".into(),
            ));
        }
        Ok(RejectingProtocol {
            inner,
            deny_numerator,
            deny_denominator,
        })
    }

    /// Probability that one attempt aborts.
    pub fn abort_probability(&self) -> f64 {
        self.deny_numerator as f64 / self.deny_denominator as f64
    }
}

impl<P: SigmaProtocol> SigmaProtocol for RejectingProtocol<P> {
    fn name(&self) -> &'static str {
        "rejecting"
    }

    fn instance_values(&self) -> Vec<u64> {
        self.inner.instance_values()
    }

    fn commitment_values(&self) -> Vec<u64> {
        self.inner.commitment_values()
    }

    fn challenge_count(&self) -> u64 {
        self.inner.challenge_count()
    }

    fn response_count(&self) -> u64 {
        self.inner.response_count()
    }

    fn soundness_t(&self) -> usize {
        self.inner.soundness_t()
    }

    fn relation_holds(&self, instance: u64, witness: u64) -> bool {
        self.inner.relation_holds(instance, witness)
    }

    fn instance_in_language(&self, instance: u64) -> bool {
        self.inner.instance_in_language(instance)
    }

    fn generate(&self, rng: &mut dyn RngCore) -> Result<(u64, u64)> {
        self.inner.generate(rng)
    }

    fn commit(
        &self,
        instance: u64,
        witness: u64,
        rng: &mut dyn RngCore,
    ) -> Result<(u64, ProverState)> {
        let (commitment, mut state) = self.inner.commit(instance, witness, rng)?;
        state.aux = rng.gen_range(0..self.deny_denominator);
        Ok((commitment, state))
    }

    fn respond(&self, state: &ProverState, challenge: u64) -> Result<Option<u64>> {
        if (state.aux + challenge) % self.deny_denominator < self.deny_numerator {
            return Ok(None);
        }
        self.inner.respond(state, challenge)
    }

    fn verify(&self, instance: u64, commitment: u64, challenge: u64, response: u64) -> bool {
        self.inner.verify(instance, commitment, challenge, response)
    }

    fn extract_witness(&self, instance: u64, transcripts: &[Transcript]) -> Result<u64> {
        self.inner.extract_witness(instance, transcripts)
    }
}

/// A gadget protocol whose verifier accepts exactly two responses per
/// challenge (2c and 2c + 1) plus two response values that are never
/// valid. The relation is trivially satisfiable, so this protocol proves
/// nothing; its non-unique response sets are what extractor experiments
/// need.
#[derive(Clone, Copy, Debug)]
pub struct TwoResponseProtocol {
    challenge_count: u64,
}

impl TwoResponseProtocol {
    pub fn new(challenge_count: u64) -> Result<Self> {
        if challenge_count == 0 {
            return Err(Error::InvalidArgument("empty challenge space".into()));
        }
        Ok(TwoResponseProtocol { challenge_count })
    }
}

impl SigmaProtocol for TwoResponseProtocol {
    fn name(&self) -> &'static str {
        "two-response"
    }

    fn instance_values(&self) -> Vec<u64> {
        vec![0]
    }

    fn commitment_values(&self) -> Vec<u64> {
        vec![0]
    }

    fn challenge_count(&self) -> u64 {
        self.challenge_count
    }

    fn response_count(&self) -> u64 {
        2 * self.challenge_count + 2
    }

    fn soundness_t(&self) -> usize {
        2
    }

    fn relation_holds(&self, instance: u64, witness: u64) -> bool {
        instance == 0 && witness == 0
    }

    fn instance_in_language(&self, instance: u64) -> bool {
        instance == 0
    }

    fn generate(&self, _rng: &mut dyn RngCore) -> Result<(u64, u64)> {
        Ok((0, 0))
    }

    fn commit(
        &self,
        instance: u64,
        witness: u64,
        _rng: &mut dyn RngCore,
    ) -> Result<(u64, ProverState)> {
        if !self.relation_holds(instance, witness) {
            return Err(Error::InvalidArgument(
                "honest prover needs a valid witness".into(),
            ));
        }
        Ok((
            0,
            ProverState {
                instance,
                witness,
                randomness: 0,
                aux: 0,
            },
        ))
    }

    fn respond(&self, _state: &ProverState, challenge: u64) -> Result<Option<u64>> {
        if challenge >= self.challenge_count {
            return Err(Error::OutOfRange {
                what: "challenge",
                value: challenge,
                bound: self.challenge_count,
            });
        }
        Ok(Some(2 * challenge))
    }

    fn verify(&self, instance: u64, commitment: u64, challenge: u64, response: u64) -> bool {
        instance == 0
            && commitment == 0
            && challenge < self.challenge_count
            && (response == 2 * challenge || response == 2 * challenge + 1)
    }

    fn extract_witness(&self, _instance: u64, _transcripts: &[Transcript]) -> Result<u64> {
        Err(Error::Extraction(ExtractFailure::Unsupported))
    }
}

/// Success counts for a repeated game.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GameReport {
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
    pub stderr: f64,
}

impl GameReport {
    pub fn from_counts(trials: u64, successes: u64) -> Self {
        let n = trials as f64;
        let frequency = successes as f64 / n;
        let stderr = (frequency * (1.0 - frequency) / n).sqrt();
        GameReport {
            trials,
            successes,
            frequency,
            stderr,
        }
    }

    /// |frequency - target| within the sigma budget.
    pub fn consistent_with(&self, target: f64, sigma_factor: f64) -> bool {
        (self.frequency - target).abs() <= sigma_factor * self.stderr + crate::tol::INEQUALITY_SLACK
    }
}

/// A (possibly cheating) interactive prover for the soundness game.
pub trait InteractiveProver {
    /// The statement the prover claims, chosen before any interaction.
    fn pick_instance(&self, rng: &mut dyn RngCore) -> u64;

    /// First move. The returned memory word is handed back to `respond`.
    fn commit_move(&self, instance: u64, rng: &mut dyn RngCore) -> (u64, u64);

    /// Third move.
    fn respond_move(&self, instance: u64, memory: u64, challenge: u64) -> u64;
}

/// Honest prover: plays the protocol with its witness.
pub struct HonestProver<'a, P: SigmaProtocol> {
    pub protocol: &'a P,
    pub instance: u64,
    pub witness: u64,
}

impl<'a, P: SigmaProtocol> InteractiveProver for HonestProver<'a, P> {
    fn pick_instance(&self, _rng: &mut dyn RngCore) -> u64 {
        self.instance
    }

    fn commit_move(&self, instance: u64, rng: &mut dyn RngCore) -> (u64, u64) {
        // Memory is the masking exponent; the protocols used with this
        // prover keep their whole state in `randomness`.
        let (commitment, state) = self
            .protocol
            .commit(instance, self.witness, rng)
            .expect("honest prover owns a valid witness");
        (commitment, state.randomness)
    }

    fn respond_move(&self, instance: u64, memory: u64, challenge: u64) -> u64 {
        let state = ProverState {
            instance,
            witness: self.witness,
            randomness: memory,
            aux: 0,
        };
        self.protocol
            .respond(&state, challenge)
            .ok()
            .flatten()
            .unwrap_or(u64::MAX)
    }
}

/// Cheating prover for the discrete-log protocol: guesses the challenge
/// c*, picks a uniform response z, and commits to a = g^z x^(-c*). It wins
/// exactly when the verifier's challenge equals the guess.
pub struct ChallengeGuessingProver<'a> {
    pub protocol: &'a DlogProtocol,
    pub instance: u64,
}

impl<'a> InteractiveProver for ChallengeGuessingProver<'a> {
    fn pick_instance(&self, _rng: &mut dyn RngCore) -> u64 {
        self.instance
    }

    fn commit_move(&self, instance: u64, rng: &mut dyn RngCore) -> (u64, u64) {
        let group = self.protocol.group();
        let guess = rng.gen_range(0..self.protocol.challenge_count());
        let z = rng.gen_range(0..group.order());
        // a = g^z * x^(-c*); inverse via Fermat in Z_p^*.
        let x_pow = group.pow(instance, guess);
        let x_pow_inv = group.pow(x_pow, group.modulus() - 2);
        let commitment = group.mul(group.power_of_g(z), x_pow_inv);
        (commitment, (guess << 32) | z)
    }

    fn respond_move(&self, _instance: u64, memory: u64, _challenge: u64) -> u64 {
        memory & 0xffff_ffff
    }
}

/// Plays the interactive game `trials` times against a fixed statement.
pub fn soundness_game_static(
    protocol: &impl SigmaProtocol,
    prover: &impl InteractiveProver,
    instance: u64,
    trials: u64,
    master_seed: u64,
) -> GameReport {
    let mut successes = 0;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        let (commitment, memory) = prover.commit_move(instance, &mut rng);
        let challenge = rng.gen_range(0..protocol.challenge_count());
        let response = prover.respond_move(instance, memory, challenge);
        if protocol.verify(instance, commitment, challenge, response) {
            successes += 1;
        }
    }
    GameReport::from_counts(trials, successes)
}

/// Plays the game with the prover choosing its statement each trial. Wins
/// only count on statements outside the language.
pub fn soundness_game_adaptive(
    protocol: &impl SigmaProtocol,
    prover: &impl InteractiveProver,
    trials: u64,
    master_seed: u64,
) -> GameReport {
    let mut successes = 0;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        let instance = prover.pick_instance(&mut rng);
        let (commitment, memory) = prover.commit_move(instance, &mut rng);
        let challenge = rng.gen_range(0..protocol.challenge_count());
        let response = prover.respond_move(instance, memory, challenge);
        if !protocol.instance_in_language(instance)
            && protocol.verify(instance, commitment, challenge, response)
        {
            successes += 1;
        }
    }
    GameReport::from_counts(trials, successes)
}

/// Exhaustive soundness error of a statement: the best success probability
/// over all commitment/response strategies, computed cell by cell as
/// mean over challenges of [some response is accepted], maximized over the
/// commitment.
pub fn exhaustive_soundness_error(protocol: &impl SigmaProtocol, instance: u64) -> f64 {
    let challenges = protocol.challenge_count();
    let mut best = 0.0f64;
    for commitment in protocol.commitment_values() {
        let mut acc = KahanSum::new();
        for c in 0..challenges {
            if !protocol.valid_responses(instance, commitment, c).is_empty() {
                acc.add(1.0);
            }
        }
        best = best.max(acc.value() / challenges as f64);
    }
    best
}

/// Brute-force discrete log used as an independent check on extracted
/// witnesses.
pub fn brute_force_dlog(group: &DlogGroup, value: u64) -> Option<u64> {
    (0..group.order()).find(|&w| group.power_of_g(w) == value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;

    #[test]
    fn lab_group_has_the_documented_shape() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let group = protocol.group();
        assert_eq!(group.modulus(), 269);
        assert_eq!(group.generator(), 16);
        assert_eq!(group.order(), 67);
        assert_eq!(protocol.challenge_count(), 64);
        assert_eq!(group.elements().len(), 67);
        // 16 has order 67, so some residues lie outside the subgroup.
        assert!(group.element_outside_subgroup().is_some());
    }

    #[test]
    fn group_construction_rejects_bad_parameters() {
        assert!(DlogGroup::new(24, 2).is_err()); // composite modulus
        assert!(DlogGroup::new(23, 1).is_err()); // trivial generator
        assert!(DlogGroup::new(23, 5).is_err()); // order 22 not prime
        assert!(DlogGroup::new(23, 2).is_ok()); // order 11
        assert!(DlogProtocol::with_challenge_bits(DlogGroup::new(23, 2).unwrap(), 4).is_err());
        assert!(DlogProtocol::with_challenge_bits(DlogGroup::new(23, 2).unwrap(), 3).is_ok());
    }

    #[test]
    fn honest_runs_verify_for_every_challenge() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let mut rng = trial_rng(7, 0);
        for _ in 0..20 {
            let (x, w) = protocol.generate(&mut rng).unwrap();
            let (a, state) = protocol.commit(x, w, &mut rng).unwrap();
            for c in 0..protocol.challenge_count() {
                let z = protocol.respond(&state, c).unwrap().unwrap();
                assert!(protocol.verify(x, a, c, z));
            }
        }
    }

    #[test]
    fn every_cell_has_a_unique_valid_response_on_true_statements() {
        let protocol = DlogProtocol::tiny().unwrap();
        for x in protocol.group().elements() {
            for &a in protocol.group().elements() {
                for c in 0..protocol.challenge_count() {
                    let valid = protocol.valid_responses(*x, a, c);
                    assert_eq!(valid.len(), 1, "x={x} a={a} c={c}");
                }
            }
        }
    }

    #[test]
    fn extraction_recovers_the_witness_exhaustively() {
        // Tiny group: every commitment exponent and every distinct
        // challenge pair, honest responses.
        let protocol = DlogProtocol::tiny().unwrap();
        let group = protocol.group();
        let r = group.order();
        for w in 0..r {
            let x = group.power_of_g(w);
            for y in 0..r {
                let a = group.power_of_g(y);
                for c1 in 0..r {
                    for c2 in 0..r {
                        if c1 == c2 {
                            continue;
                        }
                        let t1 = Transcript {
                            commitment: a,
                            challenge: c1,
                            response: (y + c1 * w) % r,
                        };
                        let t2 = Transcript {
                            commitment: a,
                            challenge: c2,
                            response: (y + c2 * w) % r,
                        };
                        let got = protocol.extract_witness(x, &[t1, t2]).unwrap();
                        assert_eq!(got, w);
                    }
                }
            }
        }
    }

    #[test]
    fn extraction_reports_collisions_and_rejections() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let mut rng = trial_rng(11, 0);
        let (x, w) = protocol.generate(&mut rng).unwrap();
        let (a, state) = protocol.commit(x, w, &mut rng).unwrap();
        let z = protocol.respond(&state, 5).unwrap().unwrap();
        let t = Transcript {
            commitment: a,
            challenge: 5,
            response: z,
        };
        assert!(matches!(
            protocol.extract_witness(x, &[t]),
            Err(Error::Extraction(ExtractFailure::TooFewTranscripts { .. }))
        ));
        assert!(matches!(
            protocol.extract_witness(x, &[t, t]),
            Err(Error::Extraction(ExtractFailure::ChallengeCollision))
        ));
        let bad = Transcript {
            challenge: 6,
            ..t
        };
        assert!(matches!(
            protocol.extract_witness(x, &[t, bad]),
            Err(Error::Extraction(ExtractFailure::RejectedTranscript))
        ));
    }

    #[test]
    fn honest_prover_always_wins_the_static_game() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let mut rng = trial_rng(3, 0);
        let (x, w) = protocol.generate(&mut rng).unwrap();
        let prover = HonestProver {
            protocol: &protocol,
            instance: x,
            witness: w,
        };
        let report = soundness_game_static(&protocol, &prover, x, 500, 42);
        assert_eq!(report.successes, report.trials);
    }

    #[test]
    fn challenge_guesser_wins_at_one_over_challenge_count() {
        let protocol = DlogProtocol::lab_default().unwrap();
        let bad_instance = protocol.group().element_outside_subgroup().unwrap();
        assert!(!protocol.instance_in_language(bad_instance));
        let prover = ChallengeGuessingProver {
            protocol: &protocol,
            instance: bad_instance,
        };
        let trials = 20_000;
        let report = soundness_game_adaptive(&protocol, &prover, trials, 7);
        let target = 1.0 / protocol.challenge_count() as f64;
        assert!(
            report.consistent_with(target, tol::SIGMA_FACTOR),
            "frequency {} vs target {target}",
            report.frequency
        );
    }

    #[test]
    fn adaptive_game_decomposes_over_static_instances() {
        // With a statically chosen statement, the adaptive and static
        // harnesses agree exactly on the same seeds: adaptive play is the
        // instance-average of static play.
        let protocol = DlogProtocol::lab_default().unwrap();
        let bad_instance = protocol.group().element_outside_subgroup().unwrap();
        let prover = ChallengeGuessingProver {
            protocol: &protocol,
            instance: bad_instance,
        };
        let adaptive = soundness_game_adaptive(&protocol, &prover, 4_000, 19);
        let static_report =
            soundness_game_static(&protocol, &prover, bad_instance, 4_000, 19);
        assert_eq!(adaptive.successes, static_report.successes);
    }

    #[test]
    fn exhaustive_soundness_error_matches_the_challenge_count() {
        // A response exists iff a x^c stays in the subgroup. The subgroup
        // of p = 23, g = 2 is the set of quadratic residues, and x = 5 is
        // a non-residue, so a x^c is a residue exactly when c is even:
        // six of the eleven challenges, soundness error 6/11 for every
        // commitment.
        let protocol = DlogProtocol::tiny().unwrap();
        let x = 5;
        assert!(!protocol.instance_in_language(x));
        let error = exhaustive_soundness_error(&protocol, x);
        assert!((error - 6.0 / 11.0).abs() < 1e-12, "error {error}");
        // True statements are answerable for every challenge.
        let error = exhaustive_soundness_error(&protocol, protocol.group().power_of_g(3));
        assert!((error - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejecting_protocol_aborts_at_the_configured_rate() {
        let inner = DlogProtocol::lab_default().unwrap();
        let protocol = RejectingProtocol::new(inner, 1, 4).unwrap();
        assert!((protocol.abort_probability() - 0.25).abs() < 1e-12);
        let mut rng = trial_rng(5, 0);
        let (x, w) = protocol.generate(&mut rng).unwrap();
        let mut aborts = 0u64;
        let trials = 40_000u64;
        for _ in 0..trials {
            let (_, state) = protocol.commit(x, w, &mut rng).unwrap();
            let c = rng.gen_range(0..protocol.challenge_count());
            if protocol.respond(&state, c).unwrap().is_none() {
                aborts += 1;
            }
        }
        let report = GameReport::from_counts(trials, aborts);
        assert!(report.consistent_with(0.25, tol::SIGMA_FACTOR));
    }

    #[test]
    fn two_response_protocol_has_exactly_two_valid_responses() {
        let protocol = TwoResponseProtocol::new(8).unwrap();
        assert_eq!(protocol.response_count(), 18);
        for c in 0..8 {
            let valid = protocol.valid_responses(0, 0, c);
            assert_eq!(valid, vec![2 * c, 2 * c + 1]);
        }
        // The top two response values are never valid.
        for c in 0..8 {
            assert!(!protocol.verify(0, 0, c, 16));
            assert!(!protocol.verify(0, 0, c, 17));
        }
        assert!(matches!(
            protocol.extract_witness(0, &[]),
            Err(Error::Extraction(ExtractFailure::Unsupported))
        ));
    }

    #[test]
    fn brute_force_dlog_agrees_with_the_table() {
        let group = DlogGroup::new(269, 16).unwrap();
        for w in [0, 1, 13, 66] {
            let x = group.power_of_g(w);
            assert_eq!(brute_force_dlog(&group, x), Some(w));
            assert_eq!(group.dlog(x), Some(w));
        }
        let outside = group.element_outside_subgroup().unwrap();
        assert_eq!(brute_force_dlog(&group, outside), None);
    }
}
