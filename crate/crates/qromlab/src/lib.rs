//! Desk-scale statevector laboratory for quantum-accessible random oracles.
//!
//! The crate simulates, with dense complex amplitudes, the interaction of
//! small query algorithms with a tabulated random oracle, and numerically
//! checks the guarantees of a measure-and-reprogram simulator:
//!
//! * [`oracle`] — tabulated finite functions, adaptive reprogramming, and a
//!   k-wise independent polynomial hash family over GF(2^m);
//! * [`qsim`] — register layouts, state vectors, oracle/unitary application,
//!   projectors, and Born-rule measurements;
//! * [`adversary`] — oracle algorithms (unitary steps interleaved with
//!   superposition queries) and a small library of reference adversaries;
//! * [`reprogram`] — the two-stage measure-and-reprogram simulator together
//!   with exact and sampled checks of its success-probability bound;
//! * [`sigma`] — three-move proof protocols (Schnorr over a prime-order
//!   subgroup, a rejection-sampling wrapper, a two-response gadget) with
//!   soundness and proof-of-knowledge game harnesses;
//! * [`fs`] — the Fiat-Shamir transform, its oracle-domain encodings, and the
//!   reduction turning an oracle forger into an interactive prover;
//! * [`sign`] — the derived signature scheme with EUF-NMA and sEUF-CMA games;
//! * [`extract`] — the t-transcript rewinding extractor over unitary
//!   second stages;
//! * [`bounds`] — sequential-projection inequalities used by the extractor
//!   analysis;
//! * [`collapse`] — collapsing-relation games and the unique-response check
//!   for protocol verifiers.
//!
//! Everything is deterministic given a master seed: per-trial generators are
//! derived with [`trial_rng`], and all enumerations sum in a fixed order with
//! compensated accumulation.

pub mod adversary;
pub mod bounds;
pub mod collapse;
pub mod error;
pub mod extract;
pub mod fs;
pub mod gf2m;
pub mod linalg;
pub mod oracle;
pub mod qsim;
pub mod reprogram;
pub mod sigma;
pub mod sign;
pub mod tol;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derives the generator for one trial from a master seed.
///
/// The master seed selects the ChaCha key; the trial index selects the
/// stream. Distinct streams of the same key are independent, so trials can
/// be enumerated (or distributed across workers) without coordination while
/// staying bit-reproducible.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
