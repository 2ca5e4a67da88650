//! Signatures from a Σ-protocol via the hash-for-challenge transformation,
//! plus their unforgeability game harnesses.
//!
//! A key pair is a relation pair (x, w); a signature on message m is a
//! proof whose challenge is the oracle value at the composite point
//! (x, m, a). Messages are short byte strings embedded into one oracle
//! coordinate, so the whole triple indexes a single finite-function input.
//!
//! The games: EUF-NMA hands the forger the public key and oracle access
//! only; sEUF-CMA adds a classical signing oracle and refuses to count any
//! forgery that replays a logged (message, signature) pair bit for bit.
//! Desk-scale keys are brute-forceable by design — the point is not
//! hardness but the mechanism, so [`nma_extraction_pipeline`] wires a
//! forger through the oracle-reduction and the rewinding extractor and
//! reports the implied knowledge-extraction rate next to the measured one.

use std::cell::Cell;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{pok_game, PokReport, ReducedProverAdapter};
use crate::fs::{
    challenge_bits, fixed_statement_domain, honest_prover_algorithm, reduction_game,
    ProductDomain, ReductionReport, SimulatedProver,
};
use crate::oracle::FiniteFunction;
use crate::sigma::{DlogProtocol, GameReport, SigmaProtocol};
use crate::tol;
use crate::trial_rng;

/// Maximum message length in bytes.
pub const MESSAGE_MAX_LEN: usize = 1;

/// Signing retries before giving up (only rejecting protocols retry).
pub const MAX_SIGN_ATTEMPTS: u32 = 64;

/// A message: a byte string of length at most [`MESSAGE_MAX_LEN`],
/// embedded into one oracle-domain coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Message(Vec<u8>);

impl Message {
    pub fn new(bytes: &[u8]) -> Result<Self> {
        if bytes.len() > MESSAGE_MAX_LEN {
            return Err(Error::InvalidArgument(format!(
                "message of {} bytes exceeds the {MESSAGE_MAX_LEN}-byte limit",
                bytes.len()
            )));
        }
        Ok(Message(bytes.to_vec()))
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    /// Injective embedding into 0..[`Message::value_count`]: the empty
    /// string maps to 0 and the single byte b to 1 + b.
    pub fn index(&self) -> u64 {
        match self.0.as_slice() {
            [] => 0,
            [b] => 1 + u64::from(*b),
            _ => unreachable!("length checked on construction"),
        }
    }

    pub fn from_index(index: u64) -> Result<Self> {
        if index >= Self::value_count() {
            return Err(Error::OutOfRange {
                what: "message index",
                value: index,
                bound: Self::value_count(),
            });
        }
        if index == 0 {
            Ok(Message(Vec::new()))
        } else {
            Ok(Message(vec![(index - 1) as u8]))
        }
    }

    /// Number of distinct messages: the empty string plus every byte.
    pub fn value_count() -> u64 {
        257
    }

    pub fn random(rng: &mut dyn RngCore) -> Message {
        let index = rng.gen_range(0..Self::value_count());
        Self::from_index(index).expect("index drawn in range")
    }

    /// A uniformly random single-byte message.
    pub fn random_single_byte(rng: &mut dyn RngCore) -> Message {
        Message(vec![rng.gen::<u8>()])
    }
}

/// A relation pair: the public half is the statement, the secret half the
/// witness. Sanity-ceiling forgers may read the witness; attacking
/// forgers must restrict themselves to `public`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPair {
    pub public: u64,
    pub witness: u64,
}

/// A signature: the proof pair, serialized as `{"a": .., "z": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub a: u64,
    pub z: u64,
}

/// The signature scheme: a Σ-protocol together with the composite oracle
/// domain (statement, message, commitment).
#[derive(Clone, Debug)]
pub struct SignatureScheme<P: SigmaProtocol> {
    protocol: P,
    statements: Vec<u64>,
    domain: ProductDomain,
    challenge_bits: u32,
}

impl<P: SigmaProtocol> SignatureScheme<P> {
    /// Builds the scheme over the given statement space (the range of the
    /// key generator; statements outside it cannot be hashed and verify
    /// as false).
    pub fn new(protocol: P, statements: Vec<u64>) -> Result<Self> {
        let bits = challenge_bits(&protocol)?;
        let messages: Vec<u64> = (0..Message::value_count()).collect();
        let domain = ProductDomain::new(vec![
            statements.clone(),
            messages,
            protocol.commitment_values(),
        ])?;
        Ok(SignatureScheme {
            protocol,
            statements,
            domain,
            challenge_bits: bits,
        })
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn statements(&self) -> &[u64] {
        &self.statements
    }

    pub fn challenge_bits(&self) -> u32 {
        self.challenge_bits
    }

    /// Rejects oracles whose shape does not match the hash domain.
    pub fn check_oracle(&self, h: &FiniteFunction) -> Result<()> {
        if h.domain_size() != self.domain.size() || h.range_bits() != self.challenge_bits {
            return Err(Error::InvalidArgument(format!(
                "oracle shape ({}, {} bits) does not match the scheme ({}, {} bits)",
                h.domain_size(),
                h.range_bits(),
                self.domain.size(),
                self.challenge_bits
            )));
        }
        Ok(())
    }

    /// Draws the scheme's random oracle.
    pub fn sample_oracle(&self, rng: &mut impl Rng) -> Result<FiniteFunction> {
        FiniteFunction::sample_with(self.domain.size(), self.challenge_bits, rng)
    }

    fn hash_point(&self, public: u64, message: &Message, commitment: u64) -> Result<usize> {
        self.domain.encode(&[public, message.index(), commitment])
    }

    /// Draws a key pair, redrawing the rare degenerate keys whose
    /// statement is trivial (for the discrete-log relation: witness 0,
    /// whose statement is the identity and verifies under every
    /// challenge). Real key generators exclude the zero scalar for the
    /// same reason; at desk scale the redraw keeps the game rates at
    /// their documented values.
    pub fn keygen(&self, rng: &mut dyn RngCore) -> Result<KeyPair> {
        for _ in 0..MAX_SIGN_ATTEMPTS {
            let (public, witness) = self.protocol.generate(rng)?;
            if witness == 0 {
                continue;
            }
            if !self.statements.contains(&public) {
                return Err(Error::InvalidArgument(
                    "key generator produced a statement outside the scheme's statement space"
                        .into(),
                ));
            }
            return Ok(KeyPair { public, witness });
        }
        Err(Error::ProofSearchExhausted {
            iterations: MAX_SIGN_ATTEMPTS,
        })
    }

    pub fn sign(
        &self,
        h: &FiniteFunction,
        key: &KeyPair,
        message: &Message,
        rng: &mut dyn RngCore,
    ) -> Result<Signature> {
        self.check_oracle(h)?;
        for _ in 0..MAX_SIGN_ATTEMPTS {
            let (a, state) = self.protocol.commit(key.public, key.witness, rng)?;
            let point = self.hash_point(key.public, message, a)?;
            let challenge = h.evaluate(point)?;
            if let Some(z) = self.protocol.respond(&state, challenge)? {
                return Ok(Signature { a, z });
            }
        }
        Err(Error::ProofSearchExhausted {
            iterations: MAX_SIGN_ATTEMPTS,
        })
    }

    /// Pure verification; any malformed input verifies as false.
    pub fn verify(
        &self,
        h: &FiniteFunction,
        public: u64,
        message: &Message,
        signature: &Signature,
    ) -> bool {
        if self.check_oracle(h).is_err() {
            return false;
        }
        let Ok(point) = self.hash_point(public, message, signature.a) else {
            return false;
        };
        let Ok(challenge) = h.evaluate(point) else {
            return false;
        };
        self.protocol
            .verify(public, signature.a, challenge, signature.z)
    }
}

impl SignatureScheme<DlogProtocol> {
    /// The lab-sized discrete-log scheme: modulus 269, generator 16,
    /// 64 challenges.
    pub fn lab() -> Result<Self> {
        let protocol = DlogProtocol::lab_default()?;
        let statements = protocol.group().elements().to_vec();
        SignatureScheme::new(protocol, statements)
    }

    /// A miniature scheme over the order-11 subgroup mod 23 with 8
    /// challenges, for fast tests.
    pub fn tiny() -> Result<Self> {
        let group = crate::sigma::DlogGroup::new(23, 2)?;
        let protocol = DlogProtocol::with_challenge_bits(group, 3)?;
        let statements = protocol.group().elements().to_vec();
        SignatureScheme::new(protocol, statements)
    }
}

/// Counting wrapper around the oracle, handed to forgers so their query
/// budget is observable.
pub struct OracleTap<'a> {
    h: &'a FiniteFunction,
    queries: Cell<u64>,
}

impl<'a> OracleTap<'a> {
    pub fn new(h: &'a FiniteFunction) -> Self {
        OracleTap {
            h,
            queries: Cell::new(0),
        }
    }

    pub fn query(&self, point: usize) -> Result<u64> {
        self.queries.set(self.queries.get() + 1);
        self.h.evaluate(point)
    }

    pub fn queries(&self) -> u64 {
        self.queries.get()
    }
}

/// The classical signing oracle of the chosen-message game. Every answer
/// is logged; the game later refuses to count logged pairs as forgeries.
pub struct SigningOracle<'a, P: SigmaProtocol> {
    scheme: &'a SignatureScheme<P>,
    h: &'a FiniteFunction,
    key: &'a KeyPair,
    rng: ChaCha12Rng,
    budget: u32,
    log: Vec<(Message, Signature)>,
}

impl<'a, P: SigmaProtocol> SigningOracle<'a, P> {
    pub fn sign(&mut self, message: &Message) -> Result<Signature> {
        if self.log.len() as u32 >= self.budget {
            return Err(Error::OutOfRange {
                what: "signing query",
                value: self.log.len() as u64,
                bound: u64::from(self.budget),
            });
        }
        let signature = self.scheme.sign(self.h, self.key, message, &mut self.rng)?;
        self.log.push((message.clone(), signature));
        Ok(signature)
    }

    pub fn log(&self) -> &[(Message, Signature)] {
        &self.log
    }
}

/// A no-message forger: sees the key pair (attacks must use only the
/// public half; the ceiling forger reads the witness) and the counted
/// oracle.
pub trait NmaForger<P: SigmaProtocol> {
    fn forge(
        &self,
        scheme: &SignatureScheme<P>,
        oracle: &OracleTap<'_>,
        key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)>;
}

/// A chosen-message forger: additionally drives the signing oracle.
pub trait CmaForger<P: SigmaProtocol> {
    fn forge(
        &self,
        scheme: &SignatureScheme<P>,
        oracle: &OracleTap<'_>,
        signer: &mut SigningOracle<'_, P>,
        key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)>;
}

/// Outcome of a repeated forgery game.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ForgeryGameReport {
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
    pub stderr: f64,
    pub mean_oracle_queries: f64,
    pub mean_sign_queries: f64,
    /// Valid forgeries discarded because they replayed a signing-oracle
    /// answer bit for bit (always zero in the no-message game).
    pub replays_excluded: u64,
}

fn forgery_report(
    trials: u64,
    successes: u64,
    oracle_queries: u64,
    sign_queries: u64,
    replays_excluded: u64,
) -> ForgeryGameReport {
    let n = trials as f64;
    let frequency = successes as f64 / n;
    ForgeryGameReport {
        trials,
        successes,
        frequency,
        stderr: (frequency * (1.0 - frequency) / n).sqrt(),
        mean_oracle_queries: oracle_queries as f64 / n,
        mean_sign_queries: sign_queries as f64 / n,
        replays_excluded,
    }
}

/// Runs the no-message game: fresh oracle and key per trial, forger sees
/// the public key and the counted oracle, success is a verifying pair.
pub fn nma_game<P: SigmaProtocol>(
    scheme: &SignatureScheme<P>,
    forger: &impl NmaForger<P>,
    trials: u64,
    master_seed: u64,
) -> Result<ForgeryGameReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let mut successes = 0u64;
    let mut oracle_queries = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        let h = scheme.sample_oracle(&mut rng)?;
        let key = scheme.keygen(&mut rng)?;
        let tap = OracleTap::new(&h);
        let (message, signature) = forger.forge(scheme, &tap, &key, &mut rng)?;
        oracle_queries += tap.queries();
        if scheme.verify(&h, key.public, &message, &signature) {
            successes += 1;
        }
    }
    Ok(forgery_report(trials, successes, oracle_queries, 0, 0))
}

/// Runs the chosen-message game. A verifying forgery only counts when the
/// (message, signature) pair differs from every signing-oracle answer.
pub fn cma_game<P: SigmaProtocol>(
    scheme: &SignatureScheme<P>,
    forger: &impl CmaForger<P>,
    max_sign_queries: u32,
    trials: u64,
    master_seed: u64,
) -> Result<ForgeryGameReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let mut successes = 0u64;
    let mut oracle_queries = 0u64;
    let mut sign_queries = 0u64;
    let mut replays_excluded = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        let h = scheme.sample_oracle(&mut rng)?;
        let key = scheme.keygen(&mut rng)?;
        let tap = OracleTap::new(&h);
        let mut signer = SigningOracle {
            scheme,
            h: &h,
            key: &key,
            rng: ChaCha12Rng::seed_from_u64(rng.gen::<u64>()),
            budget: max_sign_queries,
            log: Vec::new(),
        };
        let (message, signature) = forger.forge(scheme, &tap, &mut signer, &key, &mut rng)?;
        oracle_queries += tap.queries();
        sign_queries += signer.log().len() as u64;
        let valid = scheme.verify(&h, key.public, &message, &signature);
        let replayed = signer
            .log()
            .iter()
            .any(|(m, s)| m == &message && s == &signature);
        if valid && !replayed {
            successes += 1;
        } else if valid && replayed {
            replays_excluded += 1;
        }
    }
    Ok(forgery_report(
        trials,
        successes,
        oracle_queries,
        sign_queries,
        replays_excluded,
    ))
}

/// Correctness game: keygen, sign a random message, verify.
pub fn correctness_game<P: SigmaProtocol>(
    scheme: &SignatureScheme<P>,
    trials: u64,
    master_seed: u64,
) -> Result<GameReport> {
    let mut accepted = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        let h = scheme.sample_oracle(&mut rng)?;
        let key = scheme.keygen(&mut rng)?;
        let message = Message::random(&mut rng);
        let signature = scheme.sign(&h, &key, &message, &mut rng)?;
        if scheme.verify(&h, key.public, &message, &signature) {
            accepted += 1;
        }
    }
    Ok(GameReport::from_counts(trials, accepted))
}

/// Guesses the challenge before hashing: picks (z, c*) and computes the
/// commitment g^z · pk^(−c*), which verifies exactly when the oracle hits
/// c* at the fresh point. Each attempt uses a distinct message so the
/// oracle values are independent; success ≈ attempts / |C|.
pub struct ChallengeGuessForger {
    pub attempts: u32,
}

impl NmaForger<DlogProtocol> for ChallengeGuessForger {
    fn forge(
        &self,
        scheme: &SignatureScheme<DlogProtocol>,
        oracle: &OracleTap<'_>,
        key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)> {
        let group = scheme.protocol().group();
        let order = group.order();
        let challenges = scheme.protocol().challenge_count();
        let base = rng.gen_range(0u64..256);
        let mut last = None;
        for i in 0..u64::from(self.attempts.max(1)) {
            let message = Message::from_index(1 + (base + i) % 256)?;
            let z = rng.gen_range(0..order);
            let guess = rng.gen_range(0..challenges);
            let a = group.mul(
                group.power_of_g(z),
                group.pow(key.public, order - guess % order),
            );
            let point = scheme.hash_point(key.public, &message, a)?;
            let hit = oracle.query(point)? == guess;
            last = Some((message, Signature { a, z }));
            if hit {
                break;
            }
        }
        Ok(last.expect("at least one attempt"))
    }
}

/// Outputs a uniformly random well-formed triple without querying the
/// oracle. Exactly one challenge makes the equation hold, so the success
/// rate is 1 / group order.
pub struct JunkForger;

impl NmaForger<DlogProtocol> for JunkForger {
    fn forge(
        &self,
        scheme: &SignatureScheme<DlogProtocol>,
        _oracle: &OracleTap<'_>,
        _key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)> {
        let group = scheme.protocol().group();
        let elements = group.elements();
        let a = elements[rng.gen_range(0..elements.len())];
        let z = rng.gen_range(0..group.order());
        Ok((Message::random(rng), Signature { a, z }))
    }
}

/// Sanity ceiling: signs honestly with the witness it can see, querying
/// the oracle once. Succeeds always.
pub struct HonestCeilingForger;

impl<P: SigmaProtocol> NmaForger<P> for HonestCeilingForger {
    fn forge(
        &self,
        scheme: &SignatureScheme<P>,
        oracle: &OracleTap<'_>,
        key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)> {
        let message = Message::random(rng);
        for _ in 0..MAX_SIGN_ATTEMPTS {
            let (a, state) = scheme.protocol().commit(key.public, key.witness, rng)?;
            let point = scheme.hash_point(key.public, &message, a)?;
            let challenge = oracle.query(point)?;
            if let Some(z) = scheme.protocol().respond(&state, challenge)? {
                return Ok((message, Signature { a, z }));
            }
        }
        Err(Error::ProofSearchExhausted {
            iterations: MAX_SIGN_ATTEMPTS,
        })
    }
}

/// Asks the signer for one signature and returns it unchanged. Always
/// valid, never counted: the strongness bookkeeping must exclude it.
pub struct ReplayForger;

impl<P: SigmaProtocol> CmaForger<P> for ReplayForger {
    fn forge(
        &self,
        _scheme: &SignatureScheme<P>,
        _oracle: &OracleTap<'_>,
        signer: &mut SigningOracle<'_, P>,
        _key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)> {
        let message = Message::random(rng);
        let signature = signer.sign(&message)?;
        Ok((message, signature))
    }
}

/// Asks the signer for a signature and shifts the response by one. The
/// shifted pair is fresh but the verification equation pins the response
/// uniquely, so it never verifies.
pub struct RerandomizeForger;

impl<P: SigmaProtocol> CmaForger<P> for RerandomizeForger {
    fn forge(
        &self,
        scheme: &SignatureScheme<P>,
        _oracle: &OracleTap<'_>,
        signer: &mut SigningOracle<'_, P>,
        _key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)> {
        let message = Message::random(rng);
        let signature = signer.sign(&message)?;
        let bumped = (signature.z + 1) % scheme.protocol().response_count();
        Ok((
            message,
            Signature {
                a: signature.a,
                z: bumped,
            },
        ))
    }
}

/// Sanity ceiling for the chosen-message game: queries the signer on one
/// message, then signs a different message itself with the witness.
pub struct FreshMessageCeilingForger;

impl<P: SigmaProtocol> CmaForger<P> for FreshMessageCeilingForger {
    fn forge(
        &self,
        scheme: &SignatureScheme<P>,
        oracle: &OracleTap<'_>,
        signer: &mut SigningOracle<'_, P>,
        key: &KeyPair,
        rng: &mut dyn RngCore,
    ) -> Result<(Message, Signature)> {
        let queried = Message::random(rng);
        signer.sign(&queried)?;
        let fresh_index = (queried.index() + 1) % Message::value_count();
        let fresh = Message::from_index(fresh_index)?;
        for _ in 0..MAX_SIGN_ATTEMPTS {
            let (a, state) = scheme.protocol().commit(key.public, key.witness, rng)?;
            let point = scheme.hash_point(key.public, &fresh, a)?;
            let challenge = oracle.query(point)?;
            if let Some(z) = scheme.protocol().respond(&state, challenge)? {
                return Ok((fresh, Signature { a, z }));
            }
        }
        Err(Error::ProofSearchExhausted {
            iterations: MAX_SIGN_ATTEMPTS,
        })
    }
}

/// Which component a mutation touched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MutatedField {
    Message,
    Commitment,
    Response,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FieldMutationStats {
    pub field: MutatedField,
    pub mutants: u64,
    pub accepted: u64,
    pub frequency: f64,
}

/// Outcome of the single-byte mutation sweep.
#[derive(Clone, Debug, Serialize)]
pub struct MutationReport {
    pub signatures: u64,
    pub mutants: u64,
    pub accepted: u64,
    pub overall_frequency: f64,
    /// The tolerated acceptance rate, 2 / |C|.
    pub limit: f64,
    pub within_limit: bool,
    pub per_field: Vec<FieldMutationStats>,
}

/// Signs single-byte messages and tries every single-byte change to the
/// message and to the 8-byte little-endian encodings of the commitment
/// and the response. Valid mutants can only slip through by hitting a
/// fresh oracle value, so the acceptance rate must stay under 2 / |C|.
pub fn mutation_sweep<P: SigmaProtocol>(
    scheme: &SignatureScheme<P>,
    signatures: u64,
    master_seed: u64,
) -> Result<MutationReport> {
    if signatures == 0 {
        return Err(Error::InvalidArgument(
            "mutation sweep needs at least one signature".into(),
        ));
    }
    let mut counts = [(0u64, 0u64); 3]; // (mutants, accepted) per field
    for t in 0..signatures {
        let mut rng = trial_rng(master_seed, t);
        let h = scheme.sample_oracle(&mut rng)?;
        let key = scheme.keygen(&mut rng)?;
        let message = Message::random_single_byte(&mut rng);
        let signature = scheme.sign(&h, &key, &message, &mut rng)?;
        if !scheme.verify(&h, key.public, &message, &signature) {
            return Err(Error::InvalidArgument(
                "honest signature failed verification during the sweep".into(),
            ));
        }

        let original_byte = message.bytes()[0];
        for value in 0..=255u8 {
            if value == original_byte {
                continue;
            }
            let mutated = Message::new(&[value])?;
            counts[0].0 += 1;
            if scheme.verify(&h, key.public, &mutated, &signature) {
                counts[0].1 += 1;
            }
        }

        for (slot, field) in [(signature.a, 1usize), (signature.z, 2usize)] {
            let bytes = slot.to_le_bytes();
            for position in 0..8 {
                for value in 0..=255u8 {
                    if value == bytes[position] {
                        continue;
                    }
                    let mut mutated_bytes = bytes;
                    mutated_bytes[position] = value;
                    let mutated = u64::from_le_bytes(mutated_bytes);
                    let candidate = if field == 1 {
                        Signature {
                            a: mutated,
                            z: signature.z,
                        }
                    } else {
                        Signature {
                            a: signature.a,
                            z: mutated,
                        }
                    };
                    counts[field].0 += 1;
                    if scheme.verify(&h, key.public, &message, &candidate) {
                        counts[field].1 += 1;
                    }
                }
            }
        }
    }

    let fields = [
        MutatedField::Message,
        MutatedField::Commitment,
        MutatedField::Response,
    ];
    let per_field: Vec<FieldMutationStats> = fields
        .iter()
        .zip(counts.iter())
        .map(|(&field, &(mutants, accepted))| FieldMutationStats {
            field,
            mutants,
            accepted,
            frequency: accepted as f64 / mutants as f64,
        })
        .collect();
    let mutants: u64 = counts.iter().map(|&(m, _)| m).sum();
    let accepted: u64 = counts.iter().map(|&(_, a)| a).sum();
    let limit = 2.0 / scheme.protocol().challenge_count() as f64;
    let overall_frequency = accepted as f64 / mutants as f64;
    let within_limit = overall_frequency <= limit
        && per_field.iter().all(|f| f.frequency <= limit);
    Ok(MutationReport {
        signatures,
        mutants,
        accepted,
        overall_frequency,
        limit,
        within_limit,
        per_field,
    })
}

/// The forger-to-witness pipeline, reported per run: an honest-prover
/// no-message forger (forgery rate exactly 1) is reduced to an
/// interactive prover, whose guaranteed success feeds the knowledge
/// bound: extraction rate ≥ guaranteed^(2t−1).
#[derive(Clone, Debug, Serialize)]
pub struct NmaPipelineReport {
    pub reduction: ReductionReport,
    pub pok: PokReport,
    /// The knowledge exponent 2t − 1.
    pub knowledge_exponent: i32,
    /// max(guaranteed, 0) raised to the knowledge exponent.
    pub implied_rate: f64,
    /// Three standard errors of the measured extraction rate.
    pub extraction_slack: f64,
    pub consistent: bool,
}

/// Wires a forger through the oracle reduction and the rewinding
/// extractor for the statement g^witness. The message coordinate stays
/// fixed throughout (the forger targets one message), so the oracle
/// domain is the single-statement slice.
pub fn nma_extraction_pipeline(
    protocol: &DlogProtocol,
    witness: u64,
    reduction_trials: u64,
    pok_trials: u64,
    master_seed: u64,
) -> Result<NmaPipelineReport> {
    let instance = protocol.group().power_of_g(witness);
    let forger = honest_prover_algorithm(protocol, instance, witness)?;
    let domain = fixed_statement_domain(protocol, instance)?;
    let prover = SimulatedProver {
        protocol,
        domain: &domain,
        forger: &forger,
    };
    // The wrapped forger is the honest prover, whose forgery always
    // verifies, so its standalone success rate is exactly 1.
    let reduction = reduction_game(&prover, 1.0, reduction_trials, master_seed)?;
    let adapter = ReducedProverAdapter { reduction: &prover };
    let pok = pok_game(protocol, &adapter, pok_trials, master_seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let t = protocol.soundness_t() as i32;
    let exponent = 2 * t - 1;
    let implied_rate = reduction.guaranteed.max(0.0).powi(exponent);
    let extraction_slack = tol::SIGMA_FACTOR * pok.extraction.stderr;
    let consistent =
        pok.extraction.frequency >= implied_rate - extraction_slack - tol::INEQUALITY_SLACK;
    Ok(NmaPipelineReport {
        reduction,
        pok,
        knowledge_exponent: exponent,
        implied_rate,
        extraction_slack,
        consistent,
    })
}
