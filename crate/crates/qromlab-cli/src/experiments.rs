//! One function per subcommand. Each builds the harness from the parsed
//! flags, runs it, and returns a [`RunOutput`] with the summary JSON, the
//! CSV detail rows (columns documented per experiment), and the
//! conjunction of every asserted inequality.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use qromlab::adversary::{
    classical_query_adversary, guessing_adversary, random_single_query_adversary,
    random_two_query_adversary, superposed_query_adversary, two_query_chain_adversary,
    OracleAlgorithm,
};
use qromlab::bounds::{
    check_sequential_bound, check_two_part_bound, random_sequential_instance,
    random_two_part_instance,
};
use qromlab::collapse::{
    collapsing_advantage_exact, collapsing_game_sampled, dft_marker_circuit,
    fourier_pair_relation, function_relation, pair_fourier_circuit, qcur_check_exact,
    qcur_relation, CollapsingAdversary, CollapsingRelation,
};
use qromlab::extract::{pok_game, PokReport, ReducedProverAdapter, RotationScheduleProver};
use qromlab::fs::{fixed_statement_domain, honest_prover_algorithm, reduction_game, SimulatedProver};
use qromlab::oracle::FiniteFunction;
use qromlab::qsim::{QuantumPredicate, RegisterLayout};
use qromlab::reprogram::{check_aggregate_bound, check_success_bound, AggregateConfig};
use qromlab::sigma::{
    exhaustive_soundness_error, soundness_game_static, ChallengeGuessingProver, DlogGroup,
    DlogProtocol, HonestProver, SigmaProtocol,
};
use qromlab::sign::{
    cma_game as run_cma_game, nma_game as run_nma_game, ChallengeGuessForger,
    FreshMessageCeilingForger, HonestCeilingForger, JunkForger, KeyPair, Message, ReplayForger,
    RerandomizeForger, Signature, SignatureScheme,
};
use qromlab::{tol, trial_rng};

use crate::{
    AdversaryKind, BoundLemma, BoundsArgs, CmaForgerKind, CmaGameArgs, CollapseGameArgs,
    ExtractProverKind, FsreduceArgs, KeygenArgs, Lemma1Args, NmaForgerKind, NmaGameArgs,
    PredicateKind, ProtocolKind, QcurArgs, QcurMode, RelationKind, RunOutput, RunProverKind,
    SigmaExtractArgs, SigmaRunArgs, SignArgs, Thm1Args, VerifyArgs,
};

/// Salt mixed into the master seed when no oracle seed is given, so the
/// oracle table and the trial stream never share a generator.
const ORACLE_SEED_SALT: u64 = 0x6f72_6163;

/// Env var overriding the default state-vector dimension cap.
const DIM_CAP_VAR: &str = "QROMLAB_STATE_DIM_CAP";

fn state_dim_cap() -> Result<usize> {
    match std::env::var(DIM_CAP_VAR) {
        Ok(text) => text
            .parse::<usize>()
            .with_context(|| format!("{DIM_CAP_VAR} must be a positive integer, got {text:?}")),
        Err(_) => Ok(tol::DEFAULT_STATE_DIM_CAP),
    }
}

fn to_value<T: serde::Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).context("report serialization")
}

fn summary(experiment: &str, config: Value, constants: Value, results: Value, all_hold: bool) -> Value {
    json!({
        "schema_version": 1,
        "experiment": experiment,
        "config": config,
        "constants": constants,
        "results": results,
        "all_hold": all_hold,
    })
}

/// Prefixes a serialized report with extra identifying fields. Keys are
/// emitted in sorted order, so the prefix merges rather than prepends.
fn tagged(tags: &[(&str, Value)], report: Value) -> Value {
    let mut map = serde_json::Map::new();
    for (key, value) in tags {
        map.insert((*key).to_string(), value.clone());
    }
    if let Value::Object(fields) = report {
        map.extend(fields);
    }
    Value::Object(map)
}

fn range_size(n: u32) -> Result<usize> {
    1usize
        .checked_shl(n)
        .filter(|&dy| dy <= tol::DEFAULT_STATE_DIM_CAP)
        .with_context(|| format!("range of 2^{n} values is out of reach"))
}

fn layout_for(kind: AdversaryKind, x_size: usize, n: u32) -> Result<RegisterLayout> {
    let dy = range_size(n)?;
    // The chained adversary stores both answers; everyone else copies a
    // single answer, and the randomized single-query wrapper needs the
    // work register to match the answer register exactly.
    let dz = match kind {
        AdversaryKind::TwoQueryChain => dy
            .checked_mul(dy)
            .with_context(|| format!("work register of {dy}^2 values is out of reach"))?,
        _ => dy,
    };
    Ok(RegisterLayout::new_capped(x_size, dy, dz, 1, state_dim_cap()?)?)
}

fn build_adversary(
    kind: AdversaryKind,
    layout: RegisterLayout,
    guess: usize,
    seed: u64,
) -> Result<OracleAlgorithm> {
    let x_size = layout.dim(qromlab::qsim::Reg::X);
    let adversary = match kind {
        AdversaryKind::ClassicalQuery => classical_query_adversary(layout, 0)?,
        AdversaryKind::Superposed => {
            let weights = vec![1.0 / x_size as f64; x_size];
            superposed_query_adversary(layout, &weights)?
        }
        AdversaryKind::Guessing => guessing_adversary(layout, 0, guess)?,
        AdversaryKind::TwoQueryChain => two_query_chain_adversary(layout, 0, |answer| answer)?,
        AdversaryKind::RandomSingle => {
            random_single_query_adversary(layout, &mut trial_rng(seed, 0))?
        }
        AdversaryKind::RandomDouble => {
            random_two_query_adversary(layout, &mut trial_rng(seed, 0))?
        }
    };
    Ok(adversary)
}

fn build_predicate(kind: PredicateKind, dy: usize) -> QuantumPredicate {
    match kind {
        PredicateKind::ResponseEq => QuantumPredicate::response_equals_theta(),
        PredicateKind::AlwaysTrue => QuantumPredicate::always_true(),
        PredicateKind::Xor => {
            let modulus = dy as u64;
            QuantumPredicate::classical(move |x, theta, z| ((z ^ x) as u64) == theta % modulus)
        }
    }
}

fn check_query_count(expected: Option<usize>, actual: usize) -> Result<()> {
    if let Some(q) = expected {
        if q != actual {
            bail!("--q {q} does not match the adversary's query count {actual}");
        }
    }
    Ok(())
}

/// Loads a pinned oracle or samples one from the salted seed. Returns the
/// table plus the config fragment echoing where it came from.
fn resolve_oracle(
    file: Option<&PathBuf>,
    oracle_seed: Option<u64>,
    master_seed: u64,
    domain_size: usize,
    range_bits: u32,
) -> Result<(FiniteFunction, Value)> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading oracle file {}", path.display()))?;
        let h: FiniteFunction =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if h.domain_size() != domain_size || h.range_bits() != range_bits {
            bail!(
                "oracle file is {}x{} bits, experiment needs {domain_size}x{range_bits} bits",
                h.domain_size(),
                h.range_bits()
            );
        }
        let echo = json!({ "oracle_file": path.display().to_string() });
        return Ok((h, echo));
    }
    let seed = oracle_seed.unwrap_or(master_seed ^ ORACLE_SEED_SALT);
    let h = FiniteFunction::sample_uniform(domain_size, range_bits, seed)?;
    Ok((h, json!({ "oracle_seed": seed })))
}

fn protocol_for(kind: ProtocolKind) -> Result<DlogProtocol> {
    let protocol = match kind {
        ProtocolKind::Lab => DlogProtocol::lab_default()?,
        // Challenges restricted to three bits so the space is hashable.
        ProtocolKind::Tiny => DlogProtocol::with_challenge_bits(DlogGroup::new(23, 2)?, 3)?,
    };
    Ok(protocol)
}

fn scheme_for(kind: ProtocolKind) -> Result<SignatureScheme<DlogProtocol>> {
    let scheme = match kind {
        ProtocolKind::Lab => SignatureScheme::lab()?,
        ProtocolKind::Tiny => SignatureScheme::tiny()?,
    };
    Ok(scheme)
}

fn parse_hex_message(text: &str) -> Result<Message> {
    if text.len() % 2 != 0 {
        bail!("hex message must have an even number of digits, got {:?}", text);
    }
    let bytes = (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&text[i..i + 2], 16))
        .collect::<std::result::Result<Vec<u8>, _>>()
        .with_context(|| format!("hex message {text:?}"))?;
    Ok(Message::new(&bytes)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {what} file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} file {}", path.display()))
}

pub fn lemma1(args: &Lemma1Args) -> Result<RunOutput> {
    check_query_count(args.q, args.adversary.query_count())?;
    let layout = layout_for(args.adversary, args.x_size, args.n)?;
    let dy = range_size(args.n)?;
    let adversary = build_adversary(args.adversary, layout, args.guess, args.common.seed)?;
    let predicate = build_predicate(args.predicate, dy);
    let (h, oracle_echo) = resolve_oracle(
        args.oracle_file.as_ref(),
        args.oracle_seed,
        args.common.seed,
        args.x_size,
        args.n,
    )?;

    let points: Vec<usize> = match args.x0 {
        Some(x0) => {
            if x0 >= args.x_size {
                bail!("--x0 {x0} is outside the input space of {} points", args.x_size);
            }
            vec![x0]
        }
        None => (0..args.x_size).collect(),
    };

    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut all_hold = true;
    let q = adversary.query_count();
    for &x0 in &points {
        let report = check_success_bound(&adversary, &h, x0, &predicate)?;
        all_hold &= report.holds;
        let ratio = report
            .ratio
            .map_or_else(|| "NA".to_string(), |r| r.to_string());
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            args.adversary.name(),
            report.q,
            report.x_space,
            report.y_space,
            report.x0,
            report.lhs,
            report.term1,
            report.term2,
            report.bound,
            report.holds,
            ratio
        ));
        results.push(tagged(
            &[("adversary", json!(args.adversary.name()))],
            to_value(&report)?,
        ));
    }

    let denominator = 2 * (q + 1) * (2 * q + 3);
    let config = tagged(
        &[
            ("adversary", json!(args.adversary.name())),
            ("x_size", json!(args.x_size)),
            ("range_bits", json!(args.n)),
            ("predicate", json!(args.predicate.name())),
            ("guess", json!(args.guess)),
            ("x0", args.x0.map_or(json!("all"), |v| json!(v))),
            ("seed", json!(args.common.seed)),
        ],
        oracle_echo,
    );
    let constants = json!({
        "reduction_denominator": denominator,
        "mass_denominator": 2 * (q + 1) * dy,
    });
    Ok(RunOutput {
        summary: summary("lemma1", config, constants, Value::Array(results), all_hold),
        csv_header: "adversary,q,x_space,y_space,x0,lhs,term1,term2,bound,holds,ratio",
        csv_rows: rows,
        extra_files: Vec::new(),
        all_hold,
    })
}

pub fn thm1(args: &Thm1Args) -> Result<RunOutput> {
    check_query_count(args.q, args.adversary.query_count())?;
    let layout = layout_for(args.adversary, args.x_size, args.n)?;
    let dy = range_size(args.n)?;
    let adversary = build_adversary(args.adversary, layout, args.guess, args.common.seed)?;
    let predicate = build_predicate(args.predicate, dy);
    let cfg = AggregateConfig {
        family_samples: args.family_samples,
        uniform_samples: args.uniform_samples,
        enumeration_cap: tol::DEFAULT_ENUMERATION_CAP,
        master_seed: args.common.seed,
    };
    let report = check_aggregate_bound(&adversary, &predicate, args.n, &cfg)?;
    let all_hold = report.holds && report.family_matches_uniform;

    let rows = report
        .per_point
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                p.x0,
                p.simulator.mean,
                p.native_family.mean,
                p.native_family.stderr,
                p.native_family.draws,
                p.native_uniform.mean,
                p.native_uniform.stderr,
                p.native_uniform.draws,
                p.family_matches_uniform
            )
        })
        .collect();

    let config = json!({
        "adversary": args.adversary.name(),
        "x_size": args.x_size,
        "range_bits": args.n,
        "predicate": args.predicate.name(),
        "guess": args.guess,
        "family_samples": args.family_samples,
        "uniform_samples": args.uniform_samples,
        "seed": args.common.seed,
    });
    let constants = json!({
        "reduction_constant": report.constant,
        "additive_term": report.additive,
        "family_k": report.family_k,
    });
    Ok(RunOutput {
        summary: summary("thm1", config, constants, to_value(&report)?, all_hold),
        csv_header: "x0,simulator_mean,family_mean,family_stderr,family_draws,uniform_mean,uniform_stderr,uniform_draws,family_matches_uniform",
        csv_rows: rows,
        extra_files: Vec::new(),
        all_hold,
    })
}

pub fn fsreduce(args: &FsreduceArgs) -> Result<RunOutput> {
    let protocol = protocol_for(args.protocol)?;
    let instance = protocol.group().power_of_g(args.witness);
    let forger = honest_prover_algorithm(&protocol, instance, args.witness)?;
    let domain = fixed_statement_domain(&protocol, instance)?;
    let prover = SimulatedProver {
        protocol: &protocol,
        domain: &domain,
        forger: &forger,
    };
    // The wrapped forger is the lifted honest prover; its standalone
    // forgery succeeds with probability exactly 1.
    let report = reduction_game(&prover, 1.0, args.trials, args.common.seed)?;
    let all_hold = report.holds;

    let row = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        report.q,
        report.challenge_space,
        report.trials,
        report.game.successes,
        report.game.frequency,
        report.game.stderr,
        report.forger_success,
        report.constant,
        report.guaranteed,
        report.holds
    );
    let config = json!({
        "protocol": args.protocol.name(),
        "witness": args.witness,
        "instance": instance,
        "trials": args.trials,
        "seed": args.common.seed,
    });
    let constants = json!({
        "reduction_constant": report.constant,
        "challenge_space": report.challenge_space,
    });
    Ok(RunOutput {
        summary: summary("fsreduce", config, constants, to_value(&report)?, all_hold),
        csv_header: "q,challenge_space,trials,successes,frequency,stderr,forger_success,constant,guaranteed,holds",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold,
    })
}

pub fn sigma_run(args: &SigmaRunArgs) -> Result<RunOutput> {
    let protocol = protocol_for(args.protocol)?;
    let challenge_count = protocol.challenge_count();
    let (prover_name, instance, target, game) = match args.prover {
        RunProverKind::Honest => {
            let instance = args
                .instance
                .unwrap_or_else(|| protocol.group().power_of_g(args.witness));
            if !protocol.relation_holds(instance, args.witness) {
                bail!("witness {} does not open statement {instance}", args.witness);
            }
            let prover = HonestProver {
                protocol: &protocol,
                instance,
                witness: args.witness,
            };
            let game =
                soundness_game_static(&protocol, &prover, instance, args.trials, args.common.seed);
            ("honest", instance, 1.0, game)
        }
        RunProverKind::Guess => {
            let instance = match args.instance {
                Some(instance) => instance,
                None => protocol
                    .group()
                    .element_outside_subgroup()
                    .context("the whole group is the subgroup; pass --instance")?,
            };
            let prover = ChallengeGuessingProver {
                protocol: &protocol,
                instance,
            };
            let game =
                soundness_game_static(&protocol, &prover, instance, args.trials, args.common.seed);
            ("guess", instance, 1.0 / challenge_count as f64, game)
        }
    };
    let holds = match args.prover {
        RunProverKind::Honest => game.frequency == 1.0,
        RunProverKind::Guess => game.consistent_with(target, tol::SIGMA_FACTOR),
    };

    let row = format!(
        "{},{},{},{},{},{},{},{}",
        prover_name, instance, game.trials, game.successes, game.frequency, game.stderr, target, holds
    );
    let config = json!({
        "protocol": args.protocol.name(),
        "prover": prover_name,
        "witness": args.witness,
        "instance": instance,
        "trials": args.trials,
        "seed": args.common.seed,
    });
    let constants = json!({
        "challenge_count": challenge_count,
        "target": target,
        "exhaustive_soundness_error": exhaustive_soundness_error(&protocol, instance),
    });
    let results = tagged(&[("target", json!(target)), ("holds", json!(holds))], to_value(&game)?);
    Ok(RunOutput {
        summary: summary("sigma-run", config, constants, results, holds),
        csv_header: "prover,instance,trials,successes,frequency,stderr,target,holds",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold: holds,
    })
}

fn pok_row(prover: &str, report: &PokReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        prover,
        report.trials,
        report.challenge_space,
        report.transcripts_needed,
        report.acceptance.frequency,
        report.extraction.frequency,
        report.witnesses_returned,
        report.witnesses_valid,
        report.bound,
        report.sigma_budget,
        report.holds
    )
}

pub fn sigma_extract(args: &SigmaExtractArgs) -> Result<RunOutput> {
    let protocol = protocol_for(args.protocol)?;
    let instance = protocol.group().power_of_g(args.witness);
    let challenge_count = protocol.challenge_count();
    let valid_below = args.valid_below.unwrap_or(3 * challenge_count / 4);

    let report = match args.prover {
        ExtractProverKind::Honest => {
            let prover =
                RotationScheduleProver::honest(protocol_for(args.protocol)?, instance, args.witness)?;
            pok_game(&protocol, &prover, args.trials, args.common.seed)?
        }
        ExtractProverKind::Subset => {
            let prover = RotationScheduleProver::subset(
                protocol_for(args.protocol)?,
                instance,
                args.witness,
                valid_below,
            )?;
            pok_game(&protocol, &prover, args.trials, args.common.seed)?
        }
        ExtractProverKind::Ramp => {
            let prover =
                RotationScheduleProver::ramp(protocol_for(args.protocol)?, instance, args.witness)?;
            pok_game(&protocol, &prover, args.trials, args.common.seed)?
        }
        ExtractProverKind::Reduced => {
            let forger = honest_prover_algorithm(&protocol, instance, args.witness)?;
            let domain = fixed_statement_domain(&protocol, instance)?;
            let reduction = SimulatedProver {
                protocol: &protocol,
                domain: &domain,
                forger: &forger,
            };
            let adapter = ReducedProverAdapter {
                reduction: &reduction,
            };
            pok_game(&protocol, &adapter, args.trials, args.common.seed)?
        }
    };
    let all_hold = report.holds && report.witnesses_returned == report.witnesses_valid;

    let config = json!({
        "protocol": args.protocol.name(),
        "prover": args.prover.name(),
        "witness": args.witness,
        "instance": instance,
        "valid_below": if args.prover == ExtractProverKind::Subset { json!(valid_below) } else { Value::Null },
        "trials": args.trials,
        "seed": args.common.seed,
    });
    let constants = json!({
        "challenge_space": report.challenge_space,
        "transcripts_needed": report.transcripts_needed,
        "bound_exponent": 2 * report.transcripts_needed - 1,
    });
    let row = pok_row(args.prover.name(), &report);
    Ok(RunOutput {
        summary: summary("sigma-extract", config, constants, to_value(&report)?, all_hold),
        csv_header: "prover,trials,challenge_space,transcripts_needed,acceptance_frequency,extraction_frequency,witnesses_returned,witnesses_valid,bound,sigma_budget,holds",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold,
    })
}

pub fn keygen(args: &KeygenArgs) -> Result<RunOutput> {
    let scheme = scheme_for(args.protocol)?;
    let key = scheme.keygen(&mut trial_rng(args.common.seed, 0))?;
    // Self-check: sign and verify a probe message under a throwaway
    // oracle before handing the key out.
    let h = scheme.sample_oracle(&mut trial_rng(args.common.seed, 1))?;
    let probe = Message::new(&[])?;
    let signature = scheme.sign(&h, &key, &probe, &mut trial_rng(args.common.seed, 2))?;
    let accepted = scheme.verify(&h, key.public, &probe, &signature);
    let relation = scheme.protocol().relation_holds(key.public, key.witness);
    let all_hold = accepted && relation;

    let key_json = format!("{}\n", serde_json::to_string_pretty(&key)?);
    let config = json!({
        "protocol": args.protocol.name(),
        "seed": args.common.seed,
    });
    let constants = json!({
        "statement_count": scheme.statements().len(),
        "challenge_count": 1u64 << scheme.challenge_bits(),
    });
    let results = json!({
        "key": to_value(&key)?,
        "relation_holds": relation,
        "probe_accepted": accepted,
    });
    let row = format!("{},{},{},{}", key.public, key.witness, relation, accepted);
    Ok(RunOutput {
        summary: summary("keygen", config, constants, results, all_hold),
        csv_header: "public,witness,relation_holds,probe_accepted",
        csv_rows: vec![row],
        extra_files: vec![("key.json".to_string(), key_json)],
        all_hold,
    })
}

pub fn sign(args: &SignArgs) -> Result<RunOutput> {
    let scheme = scheme_for(args.protocol)?;
    let key: KeyPair = read_json(&args.key, "key")?;
    if !scheme.protocol().relation_holds(key.public, key.witness) {
        bail!("key file does not hold a valid witness for {}", args.protocol.name());
    }
    let message = parse_hex_message(&args.message)?;
    let (h, oracle_echo) = resolve_scheme_oracle(&scheme, args.oracle_file.as_ref(), args.oracle_seed, args.common.seed)?;
    let signature = scheme.sign(&h, &key, &message, &mut trial_rng(args.common.seed, 1))?;
    let accepted = scheme.verify(&h, key.public, &message, &signature);

    let signature_json = format!("{}\n", serde_json::to_string_pretty(&signature)?);
    let config = tagged(
        &[
            ("protocol", json!(args.protocol.name())),
            ("key_file", json!(args.key.display().to_string())),
            ("message", json!(args.message)),
            ("seed", json!(args.common.seed)),
        ],
        oracle_echo,
    );
    let results = json!({
        "a": signature.a,
        "z": signature.z,
        "accepted": accepted,
    });
    let row = format!(
        "{},{},{},{},{}",
        args.message, key.public, signature.a, signature.z, accepted
    );
    Ok(RunOutput {
        summary: summary("sign", config, json!({}), results, accepted),
        csv_header: "message,public,a,z,accepted",
        csv_rows: vec![row],
        extra_files: vec![("signature.json".to_string(), signature_json)],
        all_hold: accepted,
    })
}

pub fn verify(args: &VerifyArgs) -> Result<RunOutput> {
    let scheme = scheme_for(args.protocol)?;
    let key: KeyPair = read_json(&args.key, "key")?;
    let signature: Signature = read_json(&args.signature, "signature")?;
    let message = parse_hex_message(&args.message)?;
    let (h, oracle_echo) = resolve_scheme_oracle(&scheme, args.oracle_file.as_ref(), args.oracle_seed, args.common.seed)?;
    let accepted = scheme.verify(&h, key.public, &message, &signature);

    let config = tagged(
        &[
            ("protocol", json!(args.protocol.name())),
            ("key_file", json!(args.key.display().to_string())),
            ("signature_file", json!(args.signature.display().to_string())),
            ("message", json!(args.message)),
            ("seed", json!(args.common.seed)),
        ],
        oracle_echo,
    );
    let results = json!({
        "public": key.public,
        "a": signature.a,
        "z": signature.z,
        "accepted": accepted,
    });
    let row = format!(
        "{},{},{},{},{}",
        args.message, key.public, signature.a, signature.z, accepted
    );
    Ok(RunOutput {
        summary: summary("verify", config, json!({}), results, accepted),
        csv_header: "message,public,a,z,accepted",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold: accepted,
    })
}

/// Oracle resolution for the signature commands, where the shape comes
/// from the scheme's composite hash domain.
fn resolve_scheme_oracle(
    scheme: &SignatureScheme<DlogProtocol>,
    file: Option<&PathBuf>,
    oracle_seed: Option<u64>,
    master_seed: u64,
) -> Result<(FiniteFunction, Value)> {
    if let Some(path) = file {
        let h: FiniteFunction = read_json(path, "oracle")?;
        scheme.check_oracle(&h)?;
        let echo = json!({ "oracle_file": path.display().to_string() });
        return Ok((h, echo));
    }
    let seed = oracle_seed.unwrap_or(master_seed ^ ORACLE_SEED_SALT);
    let h = scheme.sample_oracle(&mut trial_rng(seed, 0))?;
    Ok((h, json!({ "oracle_seed": seed })))
}

pub fn nma_game(args: &NmaGameArgs) -> Result<RunOutput> {
    let scheme = scheme_for(args.protocol)?;
    let challenge_count = (1u64 << scheme.challenge_bits()) as f64;
    let order = scheme.protocol().group().order() as f64;
    let report = match args.forger {
        NmaForgerKind::ChallengeGuess => run_nma_game(
            &scheme,
            &ChallengeGuessForger {
                attempts: args.attempts,
            },
            args.trials,
            args.common.seed,
        )?,
        NmaForgerKind::Junk => run_nma_game(&scheme, &JunkForger, args.trials, args.common.seed)?,
        NmaForgerKind::HonestCeiling => {
            run_nma_game(&scheme, &HonestCeilingForger, args.trials, args.common.seed)?
        }
    };
    let target = match args.forger {
        NmaForgerKind::ChallengeGuess => {
            1.0 - (1.0 - 1.0 / challenge_count).powi(args.attempts as i32)
        }
        NmaForgerKind::Junk => 1.0 / order,
        NmaForgerKind::HonestCeiling => 1.0,
    };
    let holds = match args.forger {
        NmaForgerKind::HonestCeiling => report.frequency == 1.0,
        _ => {
            (report.frequency - target).abs()
                <= tol::SIGMA_FACTOR * report.stderr + tol::INEQUALITY_SLACK
        }
    };

    let config = json!({
        "protocol": args.protocol.name(),
        "forger": args.forger.name(),
        "attempts": args.attempts,
        "trials": args.trials,
        "seed": args.common.seed,
    });
    let constants = json!({
        "challenge_count": challenge_count,
        "group_order": order,
        "target": target,
    });
    let results = tagged(&[("target", json!(target)), ("holds", json!(holds))], to_value(&report)?);
    let row = format!(
        "{},{},{},{},{},{},{},{}",
        args.forger.name(),
        report.trials,
        report.successes,
        report.frequency,
        report.stderr,
        target,
        report.mean_oracle_queries,
        holds
    );
    Ok(RunOutput {
        summary: summary("nma-game", config, constants, results, holds),
        csv_header: "forger,trials,successes,frequency,stderr,target,mean_oracle_queries,holds",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold: holds,
    })
}

pub fn cma_game(args: &CmaGameArgs) -> Result<RunOutput> {
    let scheme = scheme_for(args.protocol)?;
    let report = match args.forger {
        CmaForgerKind::Replay => {
            run_cma_game(&scheme, &ReplayForger, args.budget, args.trials, args.common.seed)?
        }
        CmaForgerKind::Rerandomize => run_cma_game(
            &scheme,
            &RerandomizeForger,
            args.budget,
            args.trials,
            args.common.seed,
        )?,
        CmaForgerKind::FreshCeiling => run_cma_game(
            &scheme,
            &FreshMessageCeilingForger,
            args.budget,
            args.trials,
            args.common.seed,
        )?,
    };
    let (target, holds) = match args.forger {
        CmaForgerKind::Replay => (
            0.0,
            report.successes == 0 && report.replays_excluded == report.trials,
        ),
        CmaForgerKind::Rerandomize => (0.0, report.successes == 0),
        CmaForgerKind::FreshCeiling => (1.0, report.frequency == 1.0),
    };

    let config = json!({
        "protocol": args.protocol.name(),
        "forger": args.forger.name(),
        "budget": args.budget,
        "trials": args.trials,
        "seed": args.common.seed,
    });
    let results = tagged(&[("target", json!(target)), ("holds", json!(holds))], to_value(&report)?);
    let row = format!(
        "{},{},{},{},{},{},{},{},{}",
        args.forger.name(),
        report.trials,
        report.successes,
        report.frequency,
        report.stderr,
        report.replays_excluded,
        report.mean_sign_queries,
        target,
        holds
    );
    Ok(RunOutput {
        summary: summary("cma-game", config, json!({ "target": target }), results, holds),
        csv_header: "forger,trials,successes,frequency,stderr,replays_excluded,mean_sign_queries,target,holds",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold: holds,
    })
}

pub fn bounds(args: &BoundsArgs) -> Result<RunOutput> {
    let mut rows = Vec::with_capacity(args.trials as usize);
    let mut violations = 0u64;
    let mut min_margin = f64::INFINITY;

    let (csv_header, lemma_name, max_dim) = match args.lemma {
        BoundLemma::Fvsv => {
            if args.t == 0 {
                bail!("--t must be at least 1");
            }
            let max_dim = args.max_dim.unwrap_or(16);
            for i in 0..args.trials {
                let mut rng = trial_rng(args.common.seed, i);
                let (projectors, state) = random_sequential_instance(&mut rng, max_dim, args.max_family);
                let report = check_sequential_bound(i, &projectors, &state, args.t as usize)?;
                violations += u64::from(!report.holds);
                min_margin = min_margin.min(report.f - report.bound);
                rows.push(format!(
                    "{},{},{},{},{},{},{},{}",
                    report.instance_id,
                    report.dim,
                    report.family_size,
                    report.t,
                    report.v,
                    report.f,
                    report.bound,
                    report.holds
                ));
            }
            (
                "instance,dim,family_size,t,v,f,bound,holds",
                "fvsv",
                max_dim,
            )
        }
        BoundLemma::Fvsv2 => {
            let max_dim = args.max_dim.unwrap_or(8);
            for i in 0..args.trials {
                let mut rng = trial_rng(args.common.seed, i);
                let (projectors, state) =
                    random_two_part_instance(&mut rng, max_dim, args.max_outer, args.max_inner);
                let report = check_two_part_bound(i, &projectors, &state)?;
                violations += u64::from(!report.holds);
                min_margin = min_margin.min(report.f - report.bound);
                rows.push(format!(
                    "{},{},{},{},{},{},{},{}",
                    report.instance_id,
                    report.dim,
                    report.outer_size,
                    report.inner_size,
                    report.v,
                    report.f,
                    report.bound,
                    report.holds
                ));
            }
            (
                "instance,dim,outer_size,inner_size,v,f,bound,holds",
                "fvsv2",
                max_dim,
            )
        }
    };
    let all_hold = violations == 0;

    let config = json!({
        "lemma": lemma_name,
        "t": if args.lemma == BoundLemma::Fvsv { json!(args.t) } else { Value::Null },
        "trials": args.trials,
        "max_dim": max_dim,
        "max_family": args.max_family,
        "max_outer": args.max_outer,
        "max_inner": args.max_inner,
        "seed": args.common.seed,
    });
    let exponent = match args.lemma {
        BoundLemma::Fvsv => 2 * args.t as i64 - 1,
        BoundLemma::Fvsv2 => 6,
    };
    let constants = json!({ "bound_exponent": exponent });
    let results = json!({
        "checked": args.trials,
        "violations": violations,
        "min_margin": if rows.is_empty() { Value::Null } else { json!(min_margin) },
    });
    Ok(RunOutput {
        summary: summary("bounds", config, constants, results, all_hold),
        csv_header,
        csv_rows: rows,
        extra_files: Vec::new(),
        all_hold,
    })
}

pub fn collapse_game(args: &CollapseGameArgs) -> Result<RunOutput> {
    let (relation, adversary, relation_name, expected): (CollapsingRelation, CollapsingAdversary, &str, f64) =
        match args.relation {
            RelationKind::UniqueBijection => {
                if args.x_size == 0 {
                    bail!("--x must be positive");
                }
                let x = args.x_size;
                let relation = function_relation(x, x, move |v| (v + 1) % x)?;
                let layout = RegisterLayout::new(x, x, 2, 1)?;
                let adversary =
                    CollapsingAdversary::uniform_over(&relation, dft_marker_circuit(layout)?)?;
                (relation, adversary, "unique-bijection", 0.0)
            }
            RelationKind::FourierPairs => {
                let relation = fourier_pair_relation(args.pairs)?;
                let layout = RegisterLayout::new(2 * args.pairs, args.pairs, 2, 1)?;
                let adversary =
                    CollapsingAdversary::uniform_over(&relation, pair_fourier_circuit(layout)?)?;
                (relation, adversary, "fourier-pairs", 0.5)
            }
        };

    let exact = collapsing_advantage_exact(&relation, &adversary)?;
    let exact_holds = match args.relation {
        RelationKind::UniqueBijection => exact.advantage == 0.0,
        RelationKind::FourierPairs => (exact.advantage - expected).abs() <= tol::INEQUALITY_SLACK,
    };
    let mut rows = vec![format!(
        "exact,0,{},{},{},0",
        exact.joint_measured, exact.joint_unmeasured, exact.advantage
    )];

    let mut sampled_value = Value::Null;
    let mut sampled_holds = true;
    if args.trials > 0 {
        let sampled = collapsing_game_sampled(&relation, &adversary, args.trials, args.common.seed)?;
        sampled_holds = (sampled.advantage - exact.advantage).abs()
            <= tol::SIGMA_FACTOR * sampled.sigma + tol::INEQUALITY_SLACK;
        rows.push(format!(
            "sampled,{},{},{},{},{}",
            sampled.trials,
            sampled.joint_measured,
            sampled.joint_unmeasured,
            sampled.advantage,
            sampled.sigma
        ));
        sampled_value = to_value(&sampled)?;
    }
    let all_hold = exact_holds && sampled_holds;

    let config = json!({
        "relation": relation_name,
        "x_size": if args.relation == RelationKind::UniqueBijection { json!(args.x_size) } else { Value::Null },
        "pairs": if args.relation == RelationKind::FourierPairs { json!(args.pairs) } else { Value::Null },
        "trials": args.trials,
        "seed": args.common.seed,
    });
    let constants = json!({
        "expected_advantage": expected,
        "valid_pairs": relation.valid_pairs(),
        "unique_partners": relation.has_unique_partners(),
    });
    let results = json!({
        "exact": to_value(&exact)?,
        "sampled": sampled_value,
        "exact_holds": exact_holds,
        "sampled_holds": sampled_holds,
    });
    Ok(RunOutput {
        summary: summary("collapse-game", config, constants, results, all_hold),
        csv_header: "game,trials,p1,p2,advantage,stderr",
        csv_rows: rows,
        extra_files: Vec::new(),
        all_hold,
    })
}

/// Exact amplitude games above this total dimension are declined in auto
/// mode; the structural uniqueness check runs instead.
const QCUR_EXACT_DIM_LIMIT: usize = 1 << 16;

pub fn qcur(args: &QcurArgs) -> Result<RunOutput> {
    let protocol = protocol_for(args.protocol)?;
    let instance = protocol.group().power_of_g(args.witness);
    let relation = qcur_relation(&protocol, instance)?;
    let game_dim = relation.x_count() * relation.y_count() * 2;
    let exact = match args.mode {
        QcurMode::Exact => true,
        QcurMode::Structural => false,
        QcurMode::Auto => game_dim <= QCUR_EXACT_DIM_LIMIT,
    };

    let (mode_name, results, all_hold, row) = if exact {
        let report = qcur_check_exact(&protocol, instance, dft_marker_circuit)?;
        let all_hold = report.unique_responses && report.advantage == 0.0;
        let row = format!(
            "exact,{},{},{},{},{},{},{}",
            report.protocol,
            report.instance,
            report.response_values,
            report.pair_values,
            report.valid_cells,
            report.unique_responses,
            report.advantage
        );
        ("exact", to_value(&report)?, all_hold, row)
    } else {
        let unique = relation.has_unique_partners();
        let results = json!({
            "protocol": protocol.name(),
            "instance": instance,
            "response_values": relation.x_count(),
            "pair_values": relation.y_count(),
            "valid_cells": relation.valid_pairs(),
            "unique_responses": unique,
            "advantage": Value::Null,
        });
        let row = format!(
            "structural,{},{},{},{},{},{},NA",
            protocol.name(),
            instance,
            relation.x_count(),
            relation.y_count(),
            relation.valid_pairs(),
            unique
        );
        ("structural", results, unique, row)
    };

    let config = json!({
        "protocol": args.protocol.name(),
        "witness": args.witness,
        "instance": instance,
        "mode": mode_name,
        "seed": args.common.seed,
    });
    let constants = json!({
        "game_dimension": game_dim,
        "exact_dimension_limit": QCUR_EXACT_DIM_LIMIT,
    });
    Ok(RunOutput {
        summary: summary("qcur", config, constants, results, all_hold),
        csv_header: "mode,protocol,instance,response_values,pair_values,valid_cells,unique_responses,advantage",
        csv_rows: vec![row],
        extra_files: Vec::new(),
        all_hold,
    })
}
