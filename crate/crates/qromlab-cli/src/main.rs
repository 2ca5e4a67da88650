//! Batch experiment runner: every verification harness in the library,
//! behind one binary with seeded reproducibility and machine-readable
//! reports.
//!
//! Every subcommand takes a mandatory `--seed` and an optional `--out`
//! directory. With `--out` the run writes `summary.json` plus
//! `detail.csv` (and, for key/signature commands, the corresponding JSON
//! artifacts); without it the summary JSON goes to stdout. Reports are
//! byte-identical across runs with the same configuration and seed. The
//! process exits 0 exactly when every inequality asserted by the run
//! holds, 1 when one fails, and 2 on usage or input errors.

mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "qromlab", about = "Seeded numerical experiments on oracle reprogramming, proof systems, and signatures", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every experiment.
#[derive(Args)]
struct Common {
    /// Master seed; per-trial generators are split from it by a counter.
    #[arg(long)]
    seed: u64,
    /// Report directory; created if missing. Without it the summary JSON
    /// is printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdversaryKind {
    /// Measures the input register, queries once, copies the answer.
    ClassicalQuery,
    /// Queries once on a superposition over the input register.
    Superposed,
    /// Never queries; outputs a fixed response guess.
    Guessing,
    /// Two queries, the second input driven by the first answer.
    TwoQueryChain,
    /// One query wrapped in seeded Haar-random unitaries.
    RandomSingle,
    /// Two queries wrapped in seeded Haar-random unitaries.
    RandomDouble,
}

impl AdversaryKind {
    fn name(self) -> &'static str {
        match self {
            AdversaryKind::ClassicalQuery => "classical-query",
            AdversaryKind::Superposed => "superposed",
            AdversaryKind::Guessing => "guessing",
            AdversaryKind::TwoQueryChain => "two-query-chain",
            AdversaryKind::RandomSingle => "random-single",
            AdversaryKind::RandomDouble => "random-double",
        }
    }

    fn query_count(self) -> usize {
        match self {
            AdversaryKind::Guessing => 0,
            AdversaryKind::ClassicalQuery
            | AdversaryKind::Superposed
            | AdversaryKind::RandomSingle => 1,
            AdversaryKind::TwoQueryChain | AdversaryKind::RandomDouble => 2,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredicateKind {
    /// Accepts when the response equals the reprogrammed target value.
    ResponseEq,
    /// Accepts everything.
    AlwaysTrue,
    /// Accepts when response XOR input matches the target modulo the
    /// response-register size.
    Xor,
}

impl PredicateKind {
    fn name(self) -> &'static str {
        match self {
            PredicateKind::ResponseEq => "response-eq",
            PredicateKind::AlwaysTrue => "always-true",
            PredicateKind::Xor => "xor",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolKind {
    /// Discrete log mod 269, subgroup order 67, 64 challenges.
    Lab,
    /// Discrete log mod 23, subgroup order 11, 8 challenges.
    Tiny,
}

impl ProtocolKind {
    fn name(self) -> &'static str {
        match self {
            ProtocolKind::Lab => "lab",
            ProtocolKind::Tiny => "tiny",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunProverKind {
    /// Plays the protocol with the witness.
    Honest,
    /// Guesses the challenge and backsolves the commitment.
    Guess,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtractProverKind {
    /// Valid response on every challenge.
    Honest,
    /// Valid response only below a challenge threshold.
    Subset,
    /// Acceptance amplitude ramping linearly across challenges.
    Ramp,
    /// The oracle forger wrapped by the non-interactive reduction.
    Reduced,
}

impl ExtractProverKind {
    fn name(self) -> &'static str {
        match self {
            ExtractProverKind::Honest => "honest",
            ExtractProverKind::Subset => "subset",
            ExtractProverKind::Ramp => "ramp",
            ExtractProverKind::Reduced => "reduced",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NmaForgerKind {
    /// Guesses challenges for a few distinct messages.
    ChallengeGuess,
    /// Outputs uniform junk without querying.
    Junk,
    /// Reads the witness and signs honestly (sanity ceiling).
    HonestCeiling,
}

impl NmaForgerKind {
    fn name(self) -> &'static str {
        match self {
            NmaForgerKind::ChallengeGuess => "challenge-guess",
            NmaForgerKind::Junk => "junk",
            NmaForgerKind::HonestCeiling => "honest-ceiling",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CmaForgerKind {
    /// Replays a signing-oracle answer verbatim.
    Replay,
    /// Shifts the response of a signing-oracle answer.
    Rerandomize,
    /// Queries the signer, forges on a fresh message (sanity ceiling).
    FreshCeiling,
}

impl CmaForgerKind {
    fn name(self) -> &'static str {
        match self {
            CmaForgerKind::Replay => "replay",
            CmaForgerKind::Rerandomize => "rerandomize",
            CmaForgerKind::FreshCeiling => "fresh-ceiling",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundLemma {
    /// Sequential survival against the 2t-1 power of the average.
    Fvsv,
    /// Two-part family survival against the sixth power.
    Fvsv2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelationKind {
    /// A cyclic-shift bijection: every image has exactly one preimage.
    UniqueBijection,
    /// Consecutive preimage pairs, distinguished by a pairwise transform.
    FourierPairs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QcurMode {
    /// Exact when the game state fits the cap, structural otherwise.
    Auto,
    /// Always run the amplitude-exact game.
    Exact,
    /// Only check that each commitment/challenge cell has at most one
    /// accepted response.
    Structural,
}

#[derive(Subcommand)]
enum Command {
    /// Check the reprogramming success bound for one adversary.
    Lemma1(Lemma1Args),
    /// Check the aggregate bound under the 2(q+1)-wise oracle family.
    Thm1(Thm1Args),
    /// Reduce a non-interactive prover to the interactive game.
    Fsreduce(FsreduceArgs),
    /// Play interactive completeness/soundness games.
    SigmaRun(SigmaRunArgs),
    /// Play the rewinding proof-of-knowledge game.
    SigmaExtract(SigmaExtractArgs),
    /// Generate a key pair.
    Keygen(KeygenArgs),
    /// Sign a hex message under a pinned oracle.
    Sign(SignArgs),
    /// Verify a signature file under a pinned oracle.
    Verify(VerifyArgs),
    /// Play the no-message forgery game.
    NmaGame(NmaGameArgs),
    /// Play the chosen-message forgery game.
    CmaGame(CmaGameArgs),
    /// Sample random projection-bound instances and check them.
    Bounds(BoundsArgs),
    /// Play the measured-vs-unmeasured relation game.
    CollapseGame(CollapseGameArgs),
    /// Check unique responses of a protocol as a relation game.
    Qcur(QcurArgs),
}

#[derive(Args)]
struct Lemma1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "classical-query")]
    adversary: AdversaryKind,
    /// Input-register size.
    #[arg(long = "X", default_value_t = 2)]
    x_size: usize,
    /// Range bits; the oracle outputs n-bit strings.
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Expected query count; must match the chosen adversary.
    #[arg(long)]
    q: Option<usize>,
    /// Reprogrammed point; all points are swept when omitted.
    #[arg(long)]
    x0: Option<usize>,
    #[arg(long, value_enum, default_value = "response-eq")]
    predicate: PredicateKind,
    /// Response guess for the guessing adversary.
    #[arg(long, default_value_t = 0)]
    guess: usize,
    /// Seed for sampling the oracle table (defaults to a salt of --seed).
    #[arg(long, conflicts_with = "oracle_file")]
    oracle_seed: Option<u64>,
    /// JSON file with a pinned oracle table.
    #[arg(long)]
    oracle_file: Option<PathBuf>,
}

#[derive(Args)]
struct Thm1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "classical-query")]
    adversary: AdversaryKind,
    #[arg(long = "X", default_value_t = 2)]
    x_size: usize,
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_enum, default_value = "response-eq")]
    predicate: PredicateKind,
    #[arg(long, default_value_t = 0)]
    guess: usize,
    /// Family draws when the polynomial family is too large to enumerate.
    #[arg(long, default_value_t = 200)]
    family_samples: u64,
    /// Uniform-oracle draws when the function space is too large.
    #[arg(long, default_value_t = 200)]
    uniform_samples: u64,
}

#[derive(Args)]
struct FsreduceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    /// Witness for the lifted honest prover; the statement is g^witness.
    #[arg(long, default_value_t = 4)]
    witness: u64,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args)]
struct SigmaRunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    #[arg(long, value_enum, default_value = "honest")]
    prover: RunProverKind,
    /// Witness for the honest prover.
    #[arg(long, default_value_t = 4)]
    witness: u64,
    /// Statement override; defaults to g^witness for the honest prover
    /// and to an element outside the subgroup for the guessing prover.
    #[arg(long)]
    instance: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args)]
struct SigmaExtractArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    #[arg(long, value_enum, default_value = "honest")]
    prover: ExtractProverKind,
    #[arg(long, default_value_t = 4)]
    witness: u64,
    /// Challenge threshold for the subset prover; defaults to three
    /// quarters of the challenge space.
    #[arg(long)]
    valid_below: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
}

#[derive(Args)]
struct SignArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    /// Key-pair JSON file, as written by keygen.
    #[arg(long)]
    key: PathBuf,
    /// Message as a hex byte string; empty for the empty message.
    #[arg(long, default_value = "")]
    message: String,
    /// Seed for sampling the hash oracle; sign and verify must agree.
    #[arg(long, conflicts_with = "oracle_file")]
    oracle_seed: Option<u64>,
    /// JSON file with a pinned oracle table.
    #[arg(long)]
    oracle_file: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    /// Key-pair JSON file; only the public half is used.
    #[arg(long)]
    key: PathBuf,
    #[arg(long, default_value = "")]
    message: String,
    /// Signature JSON file, as written by sign.
    #[arg(long)]
    signature: PathBuf,
    #[arg(long, conflicts_with = "oracle_file")]
    oracle_seed: Option<u64>,
    #[arg(long)]
    oracle_file: Option<PathBuf>,
}

#[derive(Args)]
struct NmaGameArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    #[arg(long, value_enum, default_value = "challenge-guess")]
    forger: NmaForgerKind,
    /// Oracle guesses spent by the challenge-guess forger.
    #[arg(long, default_value_t = 4)]
    attempts: u32,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args)]
struct CmaGameArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "lab")]
    protocol: ProtocolKind,
    #[arg(long, value_enum, default_value = "replay")]
    forger: CmaForgerKind,
    /// Signing-oracle budget per trial.
    #[arg(long, default_value_t = 4)]
    budget: u32,
    #[arg(long, default_value_t = 500)]
    trials: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "fvsv")]
    lemma: BoundLemma,
    /// Sequential depth (fvsv only).
    #[arg(long, default_value_t = 2)]
    t: u32,
    /// Random instances to draw.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// State-space dimension ceiling per instance.
    #[arg(long)]
    max_dim: Option<usize>,
    /// Projector-family size ceiling (fvsv).
    #[arg(long, default_value_t = 6)]
    max_family: usize,
    /// Outer-index ceiling (fvsv2).
    #[arg(long, default_value_t = 3)]
    max_outer: usize,
    /// Inner-index ceiling (fvsv2).
    #[arg(long, default_value_t = 3)]
    max_inner: usize,
}

#[derive(Args)]
struct CollapseGameArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "fourier-pairs")]
    relation: RelationKind,
    /// Domain size for the unique-bijection relation.
    #[arg(long = "x", default_value_t = 6)]
    x_size: usize,
    /// Pair count for the fourier-pairs relation.
    #[arg(long, default_value_t = 8)]
    pairs: usize,
    /// Sampled game trials; 0 runs only the exact amplitude game.
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args)]
struct QcurArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "tiny")]
    protocol: ProtocolKind,
    #[arg(long, default_value_t = 4)]
    witness: u64,
    #[arg(long, value_enum, default_value = "auto")]
    mode: QcurMode,
}

/// Everything a finished experiment hands back for reporting.
pub struct RunOutput {
    pub summary: Value,
    pub csv_header: &'static str,
    pub csv_rows: Vec<String>,
    /// Extra artifacts (file name, contents), e.g. key and signature
    /// files; written only when --out is given.
    pub extra_files: Vec<(String, String)>,
    pub all_hold: bool,
}

fn write_output(out_dir: Option<&PathBuf>, output: &RunOutput) -> anyhow::Result<()> {
    let summary_text = format!("{}\n", serde_json::to_string_pretty(&output.summary)?);
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("summary.json"), &summary_text)?;
            let mut csv = String::with_capacity(
                output.csv_header.len() + 1 + output.csv_rows.iter().map(|r| r.len() + 1).sum::<usize>(),
            );
            csv.push_str(output.csv_header);
            csv.push('\n');
            for row in &output.csv_rows {
                csv.push_str(row);
                csv.push('\n');
            }
            std::fs::write(dir.join("detail.csv"), csv)?;
            for (name, contents) in &output.extra_files {
                std::fs::write(dir.join(name), contents)?;
            }
            println!(
                "wrote {} ({} detail rows, all_hold={})",
                dir.display(),
                output.csv_rows.len(),
                output.all_hold
            );
        }
        None => print!("{summary_text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Lemma1(args) => (&args.common, experiments::lemma1(args)),
        Command::Thm1(args) => (&args.common, experiments::thm1(args)),
        Command::Fsreduce(args) => (&args.common, experiments::fsreduce(args)),
        Command::SigmaRun(args) => (&args.common, experiments::sigma_run(args)),
        Command::SigmaExtract(args) => (&args.common, experiments::sigma_extract(args)),
        Command::Keygen(args) => (&args.common, experiments::keygen(args)),
        Command::Sign(args) => (&args.common, experiments::sign(args)),
        Command::Verify(args) => (&args.common, experiments::verify(args)),
        Command::NmaGame(args) => (&args.common, experiments::nma_game(args)),
        Command::CmaGame(args) => (&args.common, experiments::cma_game(args)),
        Command::Bounds(args) => (&args.common, experiments::bounds(args)),
        Command::CollapseGame(args) => (&args.common, experiments::collapse_game(args)),
        Command::Qcur(args) => (&args.common, experiments::qcur(args)),
    };
    match result {
        Ok(output) => {
            if let Err(e) = write_output(common.out.as_ref(), &output) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if output.all_hold {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
