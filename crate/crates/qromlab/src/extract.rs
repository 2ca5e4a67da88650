//! Rewinding extraction from quantum provers.
//!
//! A rewindable prover commits once, then exposes a reversible
//! challenge-response map: applying the map for challenge c moves the
//! committed state to one where the response register can be measured, and
//! because the map is unitary it can be undone exactly after the
//! measurement collapses the state. The extractor draws all its challenges
//! up front, plays measure-and-rewind rounds, and combines accepting
//! transcripts into a witness.
//!
//! The checked guarantee: with t transcripts needed, single-round
//! acceptance V and challenge space C, extraction succeeds with
//! probability at least `V^(2t-1) - t^2 / |C|` — the sequential-projection
//! lower bound degraded by challenge collisions.
//!
//! The prover library spans the spectrum the bound has to survive: an
//! always-valid prover, a prover valid on a challenge subset, and a prover
//! that rotates an answer in and out of validity so its per-challenge
//! operations do not commute. A fourth prover leaks coherence between two
//! valid responses of the same challenge; it separates full response
//! measurement from merely measuring whether the response is valid, which
//! is also exposed here.

use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fs::SimulatedProver;
use crate::linalg::CMatrix;
use crate::qsim::{Projector, Reg, RegisterLayout, StateVector, Unitary};
use crate::reprogram::stage_one;
use crate::sigma::{
    DlogProtocol, GameReport, SigmaProtocol, Transcript, TwoResponseProtocol,
};
use crate::tol;
use crate::trial_rng;

type ChallengeMap<'a> = Box<dyn Fn(u64, &StateVector) -> Result<StateVector> + 'a>;

/// A committed prover that can be driven forward for a challenge, measured,
/// and driven back.
pub struct ProverSession<'a> {
    pub instance: u64,
    pub commitment: u64,
    state: StateVector,
    apply: ChallengeMap<'a>,
    unapply: ChallengeMap<'a>,
}

impl<'a> ProverSession<'a> {
    pub fn new(
        instance: u64,
        commitment: u64,
        state: StateVector,
        apply: ChallengeMap<'a>,
        unapply: ChallengeMap<'a>,
    ) -> Self {
        ProverSession {
            instance,
            commitment,
            state,
            apply,
            unapply,
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn apply_challenge(&mut self, challenge: u64) -> Result<()> {
        self.state = (self.apply)(challenge, &self.state)?;
        Ok(())
    }

    pub fn unapply_challenge(&mut self, challenge: u64) -> Result<()> {
        self.state = (self.unapply)(challenge, &self.state)?;
        Ok(())
    }

    /// Measures the response register, collapsing the session state.
    pub fn measure_response(&mut self, rng: &mut impl Rng) -> Result<u64> {
        let (z, post) = self.state.measure_register(Reg::Z, rng)?;
        self.state = post;
        Ok(z as u64)
    }

    /// Measures only whether the response register holds a valid response
    /// for the given challenge, collapsing the session state accordingly.
    pub fn measure_validity(
        &mut self,
        protocol: &impl SigmaProtocol,
        challenge: u64,
        rng: &mut impl Rng,
    ) -> Result<bool> {
        let layout = self.state.layout();
        let instance = self.instance;
        let commitment = self.commitment;
        let mask = Projector::from_mask_fn(layout, |idx| {
            let z = layout.digit(idx, Reg::Z) as u64;
            protocol.verify(instance, commitment, challenge, z)
        });
        let (fired, post) = self.state.measure_projector(&mask, rng)?;
        self.state = post;
        Ok(fired)
    }
}

/// Something that can commit and hand out rewindable sessions.
pub trait RewindableProver {
    fn challenge_count(&self) -> u64;

    fn begin(&self, rng: &mut dyn RngCore) -> Result<ProverSession<'_>>;
}

/// One measure-and-rewind round.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RoundOutcome {
    pub challenge: u64,
    pub response: u64,
    pub accepted: bool,
}

/// Result of one extraction attempt.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractionRun {
    pub commitment: u64,
    pub rounds: Vec<RoundOutcome>,
    pub witness: Option<u64>,
    /// Why no witness came out, when one didn't.
    pub failure: Option<String>,
}

/// Runs measure-and-rewind rounds for pre-drawn challenges and combines
/// the accepting transcripts. Challenges must be drawn before any
/// measurement so that comparison harnesses can share them.
pub fn rewind_extract(
    protocol: &impl SigmaProtocol,
    session: &mut ProverSession<'_>,
    challenges: &[u64],
    rng: &mut impl Rng,
) -> Result<ExtractionRun> {
    let mut rounds = Vec::with_capacity(challenges.len());
    let mut transcripts = Vec::new();
    for &challenge in challenges {
        session.apply_challenge(challenge)?;
        let response = session.measure_response(rng)?;
        let accepted =
            protocol.verify(session.instance, session.commitment, challenge, response);
        if accepted {
            transcripts.push(Transcript {
                commitment: session.commitment,
                challenge,
                response,
            });
        }
        rounds.push(RoundOutcome {
            challenge,
            response,
            accepted,
        });
        session.unapply_challenge(challenge)?;
    }
    let (witness, failure) = match protocol.extract_witness(session.instance, &transcripts) {
        Ok(w) => (Some(w), None),
        Err(Error::Extraction(reason)) => (None, Some(reason.to_string())),
        Err(other) => return Err(other),
    };
    Ok(ExtractionRun {
        commitment: session.commitment,
        rounds,
        witness,
        failure,
    })
}

/// As [`rewind_extract`] but each round only measures response validity,
/// never the response itself. Returns the per-round accept flags.
pub fn rewind_validity_rounds(
    protocol: &impl SigmaProtocol,
    session: &mut ProverSession<'_>,
    challenges: &[u64],
    rng: &mut impl Rng,
) -> Result<Vec<bool>> {
    let mut accepts = Vec::with_capacity(challenges.len());
    for &challenge in challenges {
        session.apply_challenge(challenge)?;
        accepts.push(session.measure_validity(protocol, challenge, rng)?);
        session.unapply_challenge(challenge)?;
    }
    Ok(accepts)
}

/// Dense rotation by `angle` in the plane spanned by two orthonormal
/// vectors given sparsely: image(w) = sin * v + cos * w,
/// image(v) = cos * v - sin * w, identity on the complement.
fn plane_rotation(
    dim: usize,
    v_entries: &[(usize, f64)],
    w_entries: &[(usize, f64)],
    angle: f64,
) -> Result<Unitary> {
    let mut v = vec![0.0; dim];
    for &(i, a) in v_entries {
        v[i] = a;
    }
    let mut w = vec![0.0; dim];
    for &(i, a) in w_entries {
        w[i] = a;
    }
    let (sin, cos) = angle.sin_cos();
    let mut m = CMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            if v[j] == 0.0 && w[j] == 0.0 && v[i] == 0.0 && w[i] == 0.0 {
                continue;
            }
            let delta = if i == j { 1.0 } else { 0.0 };
            let entry = delta + (cos - 1.0) * (v[i] * v[j] + w[i] * w[j]) + sin * (v[i] * w[j] - w[i] * v[j]);
            m.set(i, j, Complex64::new(entry, 0.0));
        }
    }
    Unitary::new(m)
}

/// A discrete-log prover whose response sits in superposition between the
/// valid answer and a never-valid resting value, with a per-challenge
/// rotation angle. Angle pi/2 everywhere is the honest prover; angles in
/// {0, pi/2} give a subset prover; a varying schedule gives non-commuting
/// challenge maps. Acceptance for challenge c is sin^2(angle[c]).
pub struct RotationScheduleProver {
    protocol: DlogProtocol,
    instance: u64,
    witness: u64,
    angles: Vec<f64>,
}

impl RotationScheduleProver {
    pub fn new(
        protocol: DlogProtocol,
        instance: u64,
        witness: u64,
        angles: Vec<f64>,
    ) -> Result<Self> {
        if !protocol.relation_holds(instance, witness) {
            return Err(Error::InvalidArgument(
                "rotation prover plays from a valid witness".into(),
            ));
        }
        if witness == 0 {
            return Err(Error::InvalidArgument(
                "zero witness leaves no never-valid resting response".into(),
            ));
        }
        if protocol.challenge_count() >= protocol.group().order() {
            return Err(Error::InvalidArgument(
                "the resting response needs a challenge space smaller than the group order"
                    .into(),
            ));
        }
        if angles.len() as u64 != protocol.challenge_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} angles, got {}",
                protocol.challenge_count(),
                angles.len()
            )));
        }
        Ok(RotationScheduleProver {
            protocol,
            instance,
            witness,
            angles,
        })
    }

    pub fn honest(protocol: DlogProtocol, instance: u64, witness: u64) -> Result<Self> {
        let n = protocol.challenge_count() as usize;
        Self::new(
            protocol,
            instance,
            witness,
            vec![std::f64::consts::FRAC_PI_2; n],
        )
    }

    /// Valid exactly on challenges below the threshold.
    pub fn subset(
        protocol: DlogProtocol,
        instance: u64,
        witness: u64,
        valid_below: u64,
    ) -> Result<Self> {
        let n = protocol.challenge_count();
        if valid_below > n {
            return Err(Error::OutOfRange {
                what: "subset threshold",
                value: valid_below,
                bound: n + 1,
            });
        }
        let angles = (0..n)
            .map(|c| {
                if c < valid_below {
                    std::f64::consts::FRAC_PI_2
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(protocol, instance, witness, angles)
    }

    /// A strictly increasing angle schedule, never fully valid or invalid.
    pub fn ramp(protocol: DlogProtocol, instance: u64, witness: u64) -> Result<Self> {
        let n = protocol.challenge_count();
        let angles = (0..n)
            .map(|c| std::f64::consts::FRAC_PI_2 * (c + 1) as f64 / (n + 1) as f64)
            .collect();
        Self::new(protocol, instance, witness, angles)
    }

    /// Exact single-round acceptance probability: the mean of sin^2 over
    /// the schedule.
    pub fn acceptance_exact(&self) -> f64 {
        let mut acc = crate::linalg::KahanSum::new();
        for &a in &self.angles {
            acc.add(a.sin().powi(2));
        }
        acc.value() / self.angles.len() as f64
    }

    /// Exact two-round extraction probability with full measurement, over
    /// uniform independent challenge pairs: the first round contributes
    /// sin^4 (accept, then survive the rewind), the second sin^2, and
    /// equal challenge pairs are collisions.
    pub fn two_round_extraction_exact(&self) -> f64 {
        let n = self.angles.len() as f64;
        let mut acc = crate::linalg::KahanSum::new();
        for (c1, a1) in self.angles.iter().enumerate() {
            for (c2, a2) in self.angles.iter().enumerate() {
                if c1 == c2 {
                    continue;
                }
                acc.add(a1.sin().powi(4) * a2.sin().powi(2));
            }
        }
        acc.value() / (n * n)
    }

    fn session_layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new(1, 1, self.protocol.group().order() as usize, 1)
    }
}

impl RewindableProver for RotationScheduleProver {
    fn challenge_count(&self) -> u64 {
        self.protocol.challenge_count()
    }

    fn begin(&self, rng: &mut dyn RngCore) -> Result<ProverSession<'_>> {
        let group = self.protocol.group();
        let r = group.order();
        let masking = rng.gen_range(0..r);
        let commitment = group.power_of_g(masking);
        // Valid response for challenge c is masking + c w; the resting
        // value is the c = |C| continuation, which no challenge accepts.
        let resting = (masking + self.protocol.challenge_count() * self.witness) % r;
        let layout = self.session_layout()?;
        let state = StateVector::basis(layout, 0, 0, resting as usize, 0)?;
        let witness = self.witness;
        let angles = self.angles.clone();
        let challenge_count = self.protocol.challenge_count();
        let dim = r as usize;
        let rotation = move |challenge: u64, sign: f64| -> Result<Unitary> {
            if challenge >= challenge_count {
                return Err(Error::OutOfRange {
                    what: "challenge",
                    value: challenge,
                    bound: challenge_count,
                });
            }
            let valid = ((masking + challenge * witness) % r) as usize;
            plane_rotation(
                dim,
                &[(valid, 1.0)],
                &[(resting as usize, 1.0)],
                sign * angles[challenge as usize],
            )
        };
        let rot_fwd = rotation.clone();
        let apply: ChallengeMap<'_> = Box::new(move |c, s| {
            s.apply_unitary(&rot_fwd(c, 1.0)?, &[Reg::Z])
        });
        let unapply: ChallengeMap<'_> = Box::new(move |c, s| {
            s.apply_unitary(&rotation(c, -1.0)?, &[Reg::Z])
        });
        Ok(ProverSession::new(
            self.instance,
            commitment,
            state,
            apply,
            unapply,
        ))
    }
}

/// A prover for the two-valid-responses protocol that rotates its resting
/// state into the coherent superposition of both valid responses. Full
/// response measurement destroys that coherence; validity measurement
/// preserves it, so the two measurement styles give different multi-round
/// acceptance.
pub struct CoherentPairProver {
    protocol: TwoResponseProtocol,
    angle: f64,
}

impl CoherentPairProver {
    pub fn new(protocol: TwoResponseProtocol, angle: f64) -> Self {
        CoherentPairProver { protocol, angle }
    }

    /// Two-round all-accept probability with validity-only measurement on
    /// distinct challenges: accept (sin^2), rewind through the coherent
    /// valid pair (sin^2 resting mass survives), accept again (sin^2).
    pub fn validity_pair_exact(&self) -> f64 {
        self.angle.sin().powi(6)
    }

    /// Two-round all-accept probability with full measurement on distinct
    /// challenges: collapsing onto one of the two valid responses halves
    /// the resting-state mass recovered by the rewind.
    pub fn full_pair_exact(&self) -> f64 {
        self.angle.sin().powi(6) / 2.0
    }
}

impl RewindableProver for CoherentPairProver {
    fn challenge_count(&self) -> u64 {
        self.protocol.challenge_count()
    }

    fn begin(&self, _rng: &mut dyn RngCore) -> Result<ProverSession<'_>> {
        let m = self.protocol.challenge_count();
        let dim = self.protocol.response_count() as usize;
        let resting = (2 * m) as usize; // first never-valid slot
        let layout = RegisterLayout::new(1, 1, dim, 1)?;
        let state = StateVector::basis(layout, 0, 0, resting, 0)?;
        let angle = self.angle;
        let rotation = move |challenge: u64, sign: f64| -> Result<Unitary> {
            if challenge >= m {
                return Err(Error::OutOfRange {
                    what: "challenge",
                    value: challenge,
                    bound: m,
                });
            }
            let half = 0.5f64.sqrt();
            plane_rotation(
                dim,
                &[(2 * challenge as usize, half), (2 * challenge as usize + 1, half)],
                &[(resting, 1.0)],
                sign * angle,
            )
        };
        let rot_fwd = rotation.clone();
        let apply: ChallengeMap<'_> =
            Box::new(move |c, s| s.apply_unitary(&rot_fwd(c, 1.0)?, &[Reg::Z]));
        let unapply: ChallengeMap<'_> =
            Box::new(move |c, s| s.apply_unitary(&rotation(c, -1.0)?, &[Reg::Z]));
        Ok(ProverSession::new(0, 0, state, apply, unapply))
    }
}

/// Lifts the simulated Fiat-Shamir reduction prover into a rewindable
/// prover: stage one commits, and the challenge map is the reprogrammed
/// stage-two suffix, which is unitary and hence rewindable.
pub struct ReducedProverAdapter<'a, P: SigmaProtocol> {
    pub reduction: &'a SimulatedProver<'a, P>,
}

impl<'a, P: SigmaProtocol> RewindableProver for ReducedProverAdapter<'a, P> {
    fn challenge_count(&self) -> u64 {
        self.reduction.protocol.challenge_count()
    }

    fn begin(&self, mut rng: &mut dyn RngCore) -> Result<ProverSession<'_>> {
        let forger = self.reduction.forger;
        let q = forger.query_count();
        let bits = crate::fs::challenge_bits(self.reduction.protocol)?;
        let member = crate::oracle::KWiseFamilyMember::sample(
            2 * (q as u32 + 1),
            self.reduction.domain.size(),
            bits,
            &mut rng,
        )?;
        let h = member.materialize()?;
        let checkpoint = stage_one(forger, &h, &mut rng)?;
        let replay = rng.gen::<bool>();
        let i = checkpoint.query_index;
        let mut state = checkpoint.state;
        if replay && i < q {
            state = forger.run_segment(&h, i, i + 1, &state)?;
        }
        let resume = (i + usize::from(replay)).min(q);
        let pair = self.reduction.domain.decode(checkpoint.measured_x)?;
        let measured_x = checkpoint.measured_x;
        let h_fwd = h.clone();
        let apply: ChallengeMap<'_> = Box::new(move |c, s| {
            let reprogrammed = h_fwd.reprogram(measured_x, c)?;
            forger.run_segment(&reprogrammed, resume, q, s)
        });
        let unapply: ChallengeMap<'_> = Box::new(move |c, s| {
            let reprogrammed = h.reprogram(measured_x, c)?;
            forger.run_segment_inverse(&reprogrammed, resume, q, s)
        });
        Ok(ProverSession::new(pair[0], pair[1], state, apply, unapply))
    }
}

/// Result of the proof-of-knowledge game: single-round acceptance,
/// extraction success, and the sequential bound connecting them.
#[derive(Clone, Debug, Serialize)]
pub struct PokReport {
    pub trials: u64,
    pub transcripts_needed: usize,
    pub challenge_space: u64,
    /// Single-round acceptance frequency (the prover's success).
    pub acceptance: GameReport,
    /// Extraction success frequency: a witness came out and satisfies the
    /// relation.
    pub extraction: GameReport,
    pub witnesses_returned: u64,
    pub witnesses_valid: u64,
    /// `acceptance^(2t-1) - t^2 / |C|`.
    pub bound: f64,
    /// Three combined standard errors, propagated through the power.
    pub sigma_budget: f64,
    pub holds: bool,
}

/// Plays the proof-of-knowledge game: estimates single-round acceptance
/// and extraction success on independent trial streams, then checks
/// extraction against the sequential bound.
pub fn pok_game(
    protocol: &impl SigmaProtocol,
    prover: &impl RewindableProver,
    trials: u64,
    master_seed: u64,
) -> Result<PokReport> {
    let t = protocol.soundness_t();
    let challenge_space = prover.challenge_count();

    let mut accepts = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(master_seed, trial);
        let mut session = prover.begin(&mut rng)?;
        let challenge = rng.gen_range(0..challenge_space);
        session.apply_challenge(challenge)?;
        let response = session.measure_response(&mut rng)?;
        if protocol.verify(session.instance, session.commitment, challenge, response) {
            accepts += 1;
        }
    }
    let acceptance = GameReport::from_counts(trials, accepts);

    let mut successes = 0u64;
    let mut witnesses_returned = 0u64;
    let mut witnesses_valid = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(master_seed, (1u64 << 32) + trial);
        let mut session = prover.begin(&mut rng)?;
        let challenges: Vec<u64> = (0..t)
            .map(|_| rng.gen_range(0..challenge_space))
            .collect();
        let run = rewind_extract(protocol, &mut session, &challenges, &mut rng)?;
        if let Some(w) = run.witness {
            witnesses_returned += 1;
            if protocol.relation_holds(session.instance, w) {
                witnesses_valid += 1;
                successes += 1;
            }
        }
    }
    let extraction = GameReport::from_counts(trials, successes);

    let exponent = 2 * t as i32 - 1;
    let v = acceptance.frequency;
    let bound = v.powi(exponent) - (t * t) as f64 / challenge_space as f64;
    let dv = exponent as f64 * v.powi(exponent - 1) * acceptance.stderr;
    let sigma_budget = tol::SIGMA_FACTOR * (dv * dv + extraction.stderr * extraction.stderr).sqrt();
    let holds = extraction.frequency >= bound - sigma_budget - tol::INEQUALITY_SLACK;
    Ok(PokReport {
        trials,
        transcripts_needed: t,
        challenge_space,
        acceptance,
        extraction,
        witnesses_returned,
        witnesses_valid,
        bound,
        sigma_budget,
        holds,
    })
}

/// Compares all-rounds acceptance between full response measurement and
/// validity-only measurement, sharing the per-trial seed (and therefore
/// the commitment draw and challenge sequence) between the two styles.
#[derive(Clone, Debug, Serialize)]
pub struct MeasurementComparison {
    pub trials: u64,
    pub rounds: usize,
    pub full: GameReport,
    pub validity_only: GameReport,
    /// Frequencies differ by more than the combined sigma budget.
    pub diverges: bool,
}

pub fn compare_measurement_styles(
    protocol: &impl SigmaProtocol,
    prover: &impl RewindableProver,
    rounds: usize,
    trials: u64,
    master_seed: u64,
) -> Result<MeasurementComparison> {
    let challenge_space = prover.challenge_count();
    let mut full_hits = 0u64;
    let mut validity_hits = 0u64;
    for trial in 0..trials {
        let draw_challenges = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<u64> {
            (0..rounds).map(|_| rng.gen_range(0..challenge_space)).collect()
        };

        let mut rng = trial_rng(master_seed, trial);
        let mut session = prover.begin(&mut rng)?;
        let challenges = draw_challenges(&mut rng);
        let run = rewind_extract(protocol, &mut session, &challenges, &mut rng)?;
        if run.rounds.iter().all(|r| r.accepted) {
            full_hits += 1;
        }

        let mut rng = trial_rng(master_seed, trial);
        let mut session = prover.begin(&mut rng)?;
        let challenges = draw_challenges(&mut rng);
        let accepts = rewind_validity_rounds(protocol, &mut session, &challenges, &mut rng)?;
        if accepts.iter().all(|&a| a) {
            validity_hits += 1;
        }
    }
    let full = GameReport::from_counts(trials, full_hits);
    let validity_only = GameReport::from_counts(trials, validity_hits);
    let spread = tol::SIGMA_FACTOR
        * (full.stderr.powi(2) + validity_only.stderr.powi(2)).sqrt()
        + tol::INEQUALITY_SLACK;
    let diverges = (full.frequency - validity_only.frequency).abs() > spread;
    Ok(MeasurementComparison {
        trials,
        rounds,
        full,
        validity_only,
        diverges,
    })
}
