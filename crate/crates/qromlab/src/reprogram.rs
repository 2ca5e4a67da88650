//! The two-stage measure-and-reprogram simulator and its success bound.
//!
//! Given a q-query oracle algorithm A, the simulator picks one of the q+1
//! query slots (the final output counts as a slot), runs A up to that slot,
//! measures the X register to learn the point x, and finishes the run with
//! the oracle reprogrammed at x to an externally supplied value theta. A
//! fair coin decides whether the measured query itself still sees the old
//! oracle. The guarantee checked here: for every point x0 and every
//! predicate cell family, the simulator's average success probability is at
//! least
//!
//! ```text
//!   E_theta |G (A reprogrammed run)|^2 / (2 (q+1) (2q+3))
//!     - |X_x0 (final state)|^2 / (2 (q+1) |Y|)
//! ```
//!
//! and the run-level aggregate over all x0 reproduces the same bound with
//! an additive term 1/(2 q |Y|). Exact values come from full enumeration of
//! (theta, slot, coin) cells; operational values come from Born-sampled
//! stage one / stage two runs; both are compared in the tests.

use rand::Rng;
use serde::Serialize;

use crate::adversary::OracleAlgorithm;
use crate::error::{Error, Result};
use crate::linalg::KahanSum;
use crate::oracle::{
    all_functions, enumerate_family, FiniteFunction, KWiseFamilyMember,
};
use crate::qsim::{success_projector, Projector, QuantumPredicate, Reg, StateVector};
use crate::tol;
use crate::trial_rng;

/// Post-measurement state of the simulator after stage one.
#[derive(Clone, Debug)]
pub struct SimulatorCheckpoint {
    /// Which of the q+1 slots was measured (q means the final output).
    pub query_index: usize,
    /// Outcome of the X measurement at that slot.
    pub measured_x: usize,
    /// Probability of that outcome.
    pub outcome_prob: f64,
    /// Collapsed, renormalized state right after the measurement.
    pub state: StateVector,
    /// The oracle used for the prefix (and, on one coin outcome, for the
    /// measured query itself).
    pub h: FiniteFunction,
}

/// Stage one: pick a uniform slot i in {0, .., q}, run the first i queries
/// against `h`, and measure X.
pub fn stage_one(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    rng: &mut impl Rng,
) -> Result<SimulatorCheckpoint> {
    let q = algorithm.query_count();
    let i = rng.gen_range(0..=q);
    let prefix = algorithm.run_segment(h, 0, i, algorithm.initial_state())?;
    let (measured_x, state) = prefix.measure_register(Reg::X, rng)?;
    let outcome_prob = Projector::basis_state(algorithm.layout(), Reg::X, measured_x)?
        .prob(&prefix)?;
    Ok(SimulatorCheckpoint {
        query_index: i,
        measured_x,
        outcome_prob,
        state,
        h: h.clone(),
    })
}

/// Deterministic stage one for harnesses: fixes the slot and forces the X
/// outcome. Errors when the forced branch has zero probability.
pub fn stage_one_forced(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    query_index: usize,
    measured_x: usize,
) -> Result<SimulatorCheckpoint> {
    let q = algorithm.query_count();
    if query_index > q {
        return Err(Error::OutOfRange {
            what: "query slot",
            value: query_index as u64,
            bound: q as u64 + 1,
        });
    }
    let prefix = algorithm.run_segment(h, 0, query_index, algorithm.initial_state())?;
    let (outcome_prob, state) = prefix.measure_register_forced(Reg::X, measured_x)?;
    Ok(SimulatorCheckpoint {
        query_index,
        measured_x,
        outcome_prob,
        state,
        h: h.clone(),
    })
}

/// Stage two: finish the run from a checkpoint with the oracle reprogrammed
/// at the measured point to `theta`. With `replay_original_query` set, the
/// measured query itself is still answered by the original oracle before
/// the reprogrammed one takes over (the coin of the simulator). At the
/// final slot (i = q) there is nothing left to run and the coin is
/// irrelevant; the returned state is the checkpoint state itself.
pub fn stage_two_state(
    algorithm: &OracleAlgorithm,
    checkpoint: &SimulatorCheckpoint,
    theta: u64,
    replay_original_query: bool,
) -> Result<StateVector> {
    let q = algorithm.query_count();
    let i = checkpoint.query_index;
    let reprogrammed = checkpoint.h.reprogram(checkpoint.measured_x, theta)?;
    let b = usize::from(replay_original_query);
    let mid = if replay_original_query && i < q {
        algorithm.run_segment(&checkpoint.h, i, i + 1, &checkpoint.state)?
    } else {
        checkpoint.state.clone()
    };
    algorithm.run_segment(&reprogrammed, (i + b).min(q), q, &mid)
}

/// Stage two followed by the success projector for the measured point:
/// returns the measured x and the probability that X still holds it and
/// the predicate cell (x, theta) accepts Z.
pub fn stage_two(
    algorithm: &OracleAlgorithm,
    checkpoint: &SimulatorCheckpoint,
    theta: u64,
    replay_original_query: bool,
    predicate: &QuantumPredicate,
) -> Result<(usize, f64)> {
    let state = stage_two_state(algorithm, checkpoint, theta, replay_original_query)?;
    let g = success_projector(
        predicate,
        checkpoint.measured_x,
        theta,
        algorithm.layout(),
    )?;
    Ok((checkpoint.measured_x, g.prob(&state)?))
}

/// Exact simulator success at the point `x0`: the average over theta, slot,
/// and coin of the squared norm of the success projector applied to the
/// spliced run, with the slot-i state projected (not renormalized) onto
/// X = x0. This is the quantity the simulator's sampled runs estimate.
pub fn simulator_success_exact(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    x0: usize,
    predicate: &QuantumPredicate,
) -> Result<f64> {
    simulator_success_exact_capped(algorithm, h, x0, predicate, tol::DEFAULT_CELL_CAP)
}

pub fn simulator_success_exact_capped(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    x0: usize,
    predicate: &QuantumPredicate,
    cell_cap: usize,
) -> Result<f64> {
    let layout = algorithm.layout();
    let q = algorithm.query_count();
    let dim_y = layout.dim(Reg::Y);
    let cells = dim_y * (q + 1) * 2;
    if cells > cell_cap {
        return Err(Error::Capacity {
            what: "simulator cell enumeration",
            requested: cells as u64,
            cap: cell_cap as u64,
        });
    }
    let project_x = Projector::basis_state(layout, Reg::X, x0)?;

    let mut acc = KahanSum::new();
    let mut prefix = algorithm.initial_state().clone();
    for i in 0..=q {
        if i > 0 {
            prefix = algorithm.run_segment(h, i - 1, i, &prefix)?;
        }
        let pinned = project_x.apply(&prefix)?;
        if pinned.norm2() <= 1e-300 {
            continue; // this slot never queries x0; cells contribute zero
        }
        for replay in [false, true] {
            let mid = if replay && i < q {
                algorithm.run_segment(h, i, i + 1, &pinned)?
            } else {
                pinned.clone()
            };
            let resume = (i + usize::from(replay)).min(q);
            for theta in 0..dim_y as u64 {
                let reprogrammed = h.reprogram(x0, theta)?;
                let finished = algorithm.run_segment(&reprogrammed, resume, q, &mid)?;
                let g = success_projector(predicate, x0, theta, layout)?;
                acc.add(g.prob(&finished)?);
            }
        }
    }
    Ok(acc.value() / cells as f64)
}

/// Monte Carlo estimate of [`simulator_success_exact`] through the
/// operational stages: Born-sample stage one, draw (theta, coin) uniformly,
/// and score stage two when the measured point is `x0`. Returns the mean
/// and its standard error.
pub fn simulator_success_sampled(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    x0: usize,
    predicate: &QuantumPredicate,
    trials: u64,
    master_seed: u64,
) -> Result<(f64, f64)> {
    let dim_y = algorithm.layout().dim(Reg::Y) as u64;
    let mut sum = KahanSum::new();
    let mut sum_sq = KahanSum::new();
    for t in 0..trials {
        let mut rng = trial_rng(master_seed, t);
        let cp = stage_one(algorithm, h, &mut rng)?;
        let theta = rng.gen_range(0..dim_y);
        let replay = rng.gen::<bool>();
        let value = if cp.measured_x == x0 {
            stage_two(algorithm, &cp, theta, replay, predicate)?.1
        } else {
            0.0
        };
        sum.add(value);
        sum_sq.add(value * value);
    }
    let n = trials as f64;
    let mean = sum.value() / n;
    let var = (sum_sq.value() / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// The adversary's success at `x0` when run against the oracle reprogrammed
/// at x0 to theta, averaged over theta. Numerator of the bound.
pub fn reprogrammed_success(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    x0: usize,
    predicate: &QuantumPredicate,
) -> Result<f64> {
    let layout = algorithm.layout();
    let dim_y = layout.dim(Reg::Y);
    let mut acc = KahanSum::new();
    for theta in 0..dim_y as u64 {
        let reprogrammed = h.reprogram(x0, theta)?;
        let finished = algorithm.run(&reprogrammed)?;
        let g = success_projector(predicate, x0, theta, layout)?;
        acc.add(g.prob(&finished)?);
    }
    Ok(acc.value() / dim_y as f64)
}

/// The adversary's native success at `x0` against `h` itself: X holds x0
/// and the predicate cell (x0, h(x0)) accepts.
pub fn native_success(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    x0: usize,
    predicate: &QuantumPredicate,
) -> Result<f64> {
    let final_state = algorithm.run(h)?;
    let theta = h.evaluate(x0)?;
    success_projector(predicate, x0, theta, algorithm.layout())?.prob(&final_state)
}

/// Squared mass on X = x0 at the end of the unreprogrammed run.
pub fn query_mass(algorithm: &OracleAlgorithm, h: &FiniteFunction, x0: usize) -> Result<f64> {
    let final_state = algorithm.run(h)?;
    Projector::basis_state(algorithm.layout(), Reg::X, x0)?.prob(&final_state)
}

/// The reduction constant 2 (q+1) (2q+3).
pub fn reduction_constant(q: usize) -> f64 {
    2.0 * (q as f64 + 1.0) * (2.0 * q as f64 + 3.0)
}

/// Both sides of the pointwise success bound for one (adversary, oracle,
/// point, predicate) cell.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub q: usize,
    pub x_space: usize,
    pub y_space: usize,
    pub x0: usize,
    /// Exact simulator success (left-hand side).
    pub lhs: f64,
    /// Reprogrammed adversary success averaged over theta.
    pub term1: f64,
    /// Squared query mass on x0 in the unreprogrammed final state.
    pub term2: f64,
    /// `term1 / (2 (q+1) (2q+3)) - term2 / (2 (q+1) |Y|)`.
    pub bound: f64,
    /// `lhs >= bound - slack`.
    pub holds: bool,
    /// `lhs / bound` when the bound is positive.
    pub ratio: Option<f64>,
}

/// Checks the pointwise bound exactly for one oracle.
pub fn check_success_bound(
    algorithm: &OracleAlgorithm,
    h: &FiniteFunction,
    x0: usize,
    predicate: &QuantumPredicate,
) -> Result<BoundReport> {
    let layout = algorithm.layout();
    let q = algorithm.query_count();
    let dim_y = layout.dim(Reg::Y);
    let lhs = simulator_success_exact(algorithm, h, x0, predicate)?;
    let term1 = reprogrammed_success(algorithm, h, x0, predicate)?;
    let term2 = query_mass(algorithm, h, x0)?;
    let qf = q as f64;
    let bound = term1 / reduction_constant(q) - term2 / (2.0 * (qf + 1.0) * dim_y as f64);
    let holds = lhs >= bound - tol::INEQUALITY_SLACK;
    let ratio = (bound > 0.0).then(|| lhs / bound);
    Ok(BoundReport {
        q,
        x_space: layout.dim(Reg::X),
        y_space: dim_y,
        x0,
        lhs,
        term1,
        term2,
        bound,
        holds,
        ratio,
    })
}

/// How oracles are averaged in a run-level check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AverageMode {
    /// Full enumeration; the reported standard error is zero.
    Exhaustive,
    /// Monte Carlo over the recorded number of draws.
    Sampled,
}

/// A mean with its standard error and how it was obtained.
#[derive(Clone, Debug, Serialize)]
pub struct Averaged {
    pub mean: f64,
    pub stderr: f64,
    pub mode: AverageMode,
    pub draws: u64,
}

fn averaged(values: &[f64], mode: AverageMode) -> Averaged {
    let n = values.len() as f64;
    let mut sum = KahanSum::new();
    let mut sum_sq = KahanSum::new();
    for &v in values {
        sum.add(v);
        sum_sq.add(v * v);
    }
    let mean = sum.value() / n;
    let stderr = match mode {
        AverageMode::Exhaustive => 0.0,
        AverageMode::Sampled => {
            let var = (sum_sq.value() / n - mean * mean).max(0.0);
            (var / n).sqrt()
        }
    };
    Averaged {
        mean,
        stderr,
        mode,
        draws: values.len() as u64,
    }
}

/// Per-point comparison inside a run-level report.
#[derive(Clone, Debug, Serialize)]
pub struct PointComparison {
    pub x0: usize,
    /// Simulator success averaged over the hash family.
    pub simulator: Averaged,
    /// Native adversary success averaged over the hash family.
    pub native_family: Averaged,
    /// Native adversary success averaged over uniform oracles.
    pub native_uniform: Averaged,
    /// |native_family - native_uniform| within three combined standard
    /// errors (exact equality when both sides are exhaustive).
    pub family_matches_uniform: bool,
}

/// Run-level report: the aggregate bound over all points, with the
/// simulator using the 2(q+1)-wise family and the adversary baseline using
/// uniform oracles.
#[derive(Clone, Debug, Serialize)]
pub struct AggregateReport {
    pub q: usize,
    pub x_space: usize,
    pub y_space: usize,
    pub family_k: u32,
    pub constant: f64,
    /// Additive term: 1 / (2 q |Y|) for q >= 1, and the exact aggregate
    /// term 1 / (2 (q+1) |Y|) for q = 0 where the usual form is undefined.
    pub additive: f64,
    pub per_point: Vec<PointComparison>,
    pub aggregate_lhs: f64,
    pub aggregate_native: f64,
    pub aggregate_bound: f64,
    pub holds: bool,
    pub family_matches_uniform: bool,
}

/// Configuration for [`check_aggregate_bound`].
#[derive(Clone, Copy, Debug)]
pub struct AggregateConfig {
    /// Family draws when the family is too large to enumerate.
    pub family_samples: u64,
    /// Uniform draws when the function space is too large to enumerate.
    pub uniform_samples: u64,
    /// Cap on exhaustive enumeration sizes.
    pub enumeration_cap: u64,
    pub master_seed: u64,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        AggregateConfig {
            family_samples: 200,
            uniform_samples: 200,
            enumeration_cap: tol::DEFAULT_ENUMERATION_CAP,
            master_seed: 0,
        }
    }
}

fn family_oracles(
    k: u32,
    domain: usize,
    range_bits: u32,
    cfg: &AggregateConfig,
) -> Result<(Vec<FiniteFunction>, AverageMode)> {
    let field_bits = crate::oracle::family_field_bits(domain, range_bits) as u64;
    let size_bits = field_bits.saturating_mul(k as u64);
    if size_bits < 63 && (1u64 << size_bits) <= cfg.enumeration_cap {
        let all = enumerate_family(k, domain, range_bits)?
            .iter()
            .map(|m| m.materialize())
            .collect::<Result<Vec<_>>>()?;
        Ok((all, AverageMode::Exhaustive))
    } else {
        let mut out = Vec::with_capacity(cfg.family_samples as usize);
        for t in 0..cfg.family_samples {
            let mut rng = trial_rng(cfg.master_seed, t);
            let member = KWiseFamilyMember::sample(k, domain, range_bits, &mut rng)?;
            out.push(member.materialize()?);
        }
        Ok((out, AverageMode::Sampled))
    }
}

fn uniform_oracles(
    domain: usize,
    range_bits: u32,
    cfg: &AggregateConfig,
) -> Result<(Vec<FiniteFunction>, AverageMode)> {
    let space_bits = (range_bits as u64).saturating_mul(domain as u64);
    if space_bits < 63 && (1u64 << space_bits) <= cfg.enumeration_cap {
        Ok((all_functions(domain, range_bits)?, AverageMode::Exhaustive))
    } else {
        let mut out = Vec::with_capacity(cfg.uniform_samples as usize);
        for t in 0..cfg.uniform_samples {
            // Offset the stream so uniform draws never reuse family streams.
            let mut rng = trial_rng(cfg.master_seed, (1u64 << 32) + t);
            out.push(FiniteFunction::sample_with(domain, range_bits, &mut rng)?);
        }
        Ok((out, AverageMode::Sampled))
    }
}

/// Checks the run-level aggregate bound: the simulator draws its oracle
/// from the 2(q+1)-wise family; the adversary baseline runs against
/// uniform oracles; family and uniform averages of the native success are
/// compared pointwise.
pub fn check_aggregate_bound(
    algorithm: &OracleAlgorithm,
    predicate: &QuantumPredicate,
    range_bits: u32,
    cfg: &AggregateConfig,
) -> Result<AggregateReport> {
    let layout = algorithm.layout();
    let dim_x = layout.dim(Reg::X);
    let dim_y = layout.dim(Reg::Y);
    if dim_y != 1usize << range_bits {
        return Err(Error::InvalidArgument(format!(
            "range_bits {range_bits} does not match Y dimension {dim_y}"
        )));
    }
    let q = algorithm.query_count();
    let k = 2 * (q as u32 + 1);
    let (family, family_mode) = family_oracles(k, dim_x, range_bits, cfg)?;
    let (uniform, uniform_mode) = uniform_oracles(dim_x, range_bits, cfg)?;

    let mut per_point = Vec::with_capacity(dim_x);
    let mut aggregate_lhs = KahanSum::new();
    let mut aggregate_native = KahanSum::new();
    let mut all_match = true;
    for x0 in 0..dim_x {
        let sim_vals = family
            .iter()
            .map(|h| simulator_success_exact(algorithm, h, x0, predicate))
            .collect::<Result<Vec<_>>>()?;
        let native_family_vals = family
            .iter()
            .map(|h| native_success(algorithm, h, x0, predicate))
            .collect::<Result<Vec<_>>>()?;
        let native_uniform_vals = uniform
            .iter()
            .map(|h| native_success(algorithm, h, x0, predicate))
            .collect::<Result<Vec<_>>>()?;
        let simulator = averaged(&sim_vals, family_mode);
        let native_family = averaged(&native_family_vals, family_mode);
        let native_uniform = averaged(&native_uniform_vals, uniform_mode);
        let spread = tol::SIGMA_FACTOR
            * (native_family.stderr.powi(2) + native_uniform.stderr.powi(2)).sqrt()
            + tol::INEQUALITY_SLACK;
        let family_matches_uniform =
            (native_family.mean - native_uniform.mean).abs() <= spread;
        all_match &= family_matches_uniform;
        aggregate_lhs.add(simulator.mean);
        aggregate_native.add(native_uniform.mean);
        per_point.push(PointComparison {
            x0,
            simulator,
            native_family,
            native_uniform,
            family_matches_uniform,
        });
    }

    let qf = q as f64;
    let additive = if q >= 1 {
        1.0 / (2.0 * qf * dim_y as f64)
    } else {
        1.0 / (2.0 * (qf + 1.0) * dim_y as f64)
    };
    let aggregate_lhs = aggregate_lhs.value();
    let aggregate_native = aggregate_native.value();
    let constant = reduction_constant(q);
    let aggregate_bound = aggregate_native / constant - additive;
    let holds = aggregate_lhs >= aggregate_bound - tol::INEQUALITY_SLACK;
    Ok(AggregateReport {
        q,
        x_space: dim_x,
        y_space: dim_y,
        family_k: k,
        constant,
        additive,
        per_point,
        aggregate_lhs,
        aggregate_native,
        aggregate_bound,
        holds,
        family_matches_uniform: all_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{
        classical_query_adversary, guessing_adversary, superposed_query_adversary,
        two_query_chain_adversary,
    };
    use crate::qsim::RegisterLayout;

    /// Independent closed form for the single-query copy adversary with the
    /// predicate "Z equals theta": slot 0 with a reprogrammed query always
    /// succeeds; the three other cells succeed only when theta happens to
    /// equal h(x0). Mean over the four (slot, coin) cells:
    /// (1 + 3/|Y|) / 4.
    fn copy_adversary_expected_lhs(dim_y: f64) -> f64 {
        0.25 * (1.0 + 3.0 / dim_y)
    }

    #[test]
    fn copy_adversary_matches_the_closed_form_small() {
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        for seed in 0..4 {
            let h = FiniteFunction::sample_uniform(2, 2, seed).unwrap();
            let lhs = simulator_success_exact(&a, &h, 0, &v).unwrap();
            assert!((lhs - copy_adversary_expected_lhs(4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn copy_adversary_matches_the_frozen_value_at_64() {
        // |Y| = 64: expected simulator success 1/4 + 3/256 = 0.26171875,
        // bound 1/20 - 1/256 = 0.04609375.
        let l = RegisterLayout::new(2, 64, 64, 1).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        let h = FiniteFunction::sample_uniform(2, 6, 17).unwrap();
        let report = check_success_bound(&a, &h, 0, &v).unwrap();
        assert!((report.lhs - 0.26171875).abs() < 1e-12, "lhs {}", report.lhs);
        assert!((report.term1 - 1.0).abs() < 1e-12);
        assert!((report.term2 - 1.0).abs() < 1e-12);
        assert!((report.bound - 0.04609375).abs() < 1e-12);
        assert!(report.holds);
        assert!(report.ratio.unwrap() > 1.0);
    }

    #[test]
    fn guessing_adversary_sits_at_the_trivial_corner() {
        // q = 0: simulator success is exactly 1/|Y|; the bound is negative
        // (1/(6 |Y|) - 1/(2 |Y|)).
        let l = RegisterLayout::new(2, 8, 8, 1).unwrap();
        let a = guessing_adversary(l, 1, 3).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        let h = FiniteFunction::sample_uniform(2, 3, 2).unwrap();
        let report = check_success_bound(&a, &h, 1, &v).unwrap();
        assert!((report.lhs - 1.0 / 8.0).abs() < 1e-12);
        assert!((report.term1 - 1.0 / 8.0).abs() < 1e-12);
        assert!((report.term2 - 1.0).abs() < 1e-12);
        let want_bound = 1.0 / 48.0 - 1.0 / 16.0;
        assert!((report.bound - want_bound).abs() < 1e-12);
        assert!(report.bound < 0.0);
        assert!(report.holds);
        assert!(report.ratio.is_none());
    }

    #[test]
    fn stage_two_cells_match_hand_derivation() {
        // Copy adversary, slot 0. Reprogram-before-query: success 1 for
        // every theta. Replay-original-query: success only at
        // theta = h(x0). Final slot: same as replay.
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        let h = FiniteFunction::from_table(2, 2, vec![2, 1]).unwrap();
        let cp = stage_one_forced(&a, &h, 0, 0).unwrap();
        assert!((cp.outcome_prob - 1.0).abs() < 1e-12);
        for theta in 0..4 {
            let (x, p) = stage_two(&a, &cp, theta, false, &v).unwrap();
            assert_eq!(x, 0);
            assert!((p - 1.0).abs() < 1e-12, "theta {theta}: {p}");
            let (_, p) = stage_two(&a, &cp, theta, true, &v).unwrap();
            let want = if theta == 2 { 1.0 } else { 0.0 };
            assert!((p - want).abs() < 1e-12, "replay theta {theta}: {p}");
        }
        let cp = stage_one_forced(&a, &h, 1, 0).unwrap();
        for theta in 0..4 {
            let want = if theta == 2 { 1.0 } else { 0.0 };
            let (_, p) = stage_two(&a, &cp, theta, false, &v).unwrap();
            assert!((p - want).abs() < 1e-12);
            let (_, p) = stage_two(&a, &cp, theta, true, &v).unwrap();
            assert!((p - want).abs() < 1e-12);
        }
    }

    #[test]
    fn stage_one_rejects_impossible_forced_outcomes() {
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let h = FiniteFunction::zero(2, 2).unwrap();
        assert!(matches!(
            stage_one_forced(&a, &h, 0, 1),
            Err(Error::ZeroProbabilityBranch { .. })
        ));
        assert!(stage_one_forced(&a, &h, 2, 0).is_err());
    }

    #[test]
    fn bound_holds_for_every_oracle_and_library_adversary_at_small_size() {
        // Exhaustive sweep: |X| = 2, n = 2, all 16 oracles, q <= 2.
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let l_chain = RegisterLayout::new(2, 4, 16, 1).unwrap();
        let predicates = [
            QuantumPredicate::response_equals_theta(),
            QuantumPredicate::always_true(),
            QuantumPredicate::classical(|x, theta, z| (z as u64 ^ x as u64) == theta % 4),
        ];
        let adversaries: Vec<OracleAlgorithm> = vec![
            classical_query_adversary(l, 0).unwrap(),
            classical_query_adversary(l, 1).unwrap(),
            superposed_query_adversary(l, &[0.5, 0.5]).unwrap(),
            guessing_adversary(l, 0, 2).unwrap(),
            two_query_chain_adversary(l_chain, 0, |ans| ans).unwrap(),
        ];
        for h in all_functions(2, 2).unwrap() {
            for a in &adversaries {
                for v in &predicates {
                    for x0 in 0..2 {
                        let report = check_success_bound(a, &h, x0, v).unwrap();
                        assert!(
                            report.holds,
                            "violated at q={} x0={x0}: lhs={} bound={}",
                            report.q, report.lhs, report.bound
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_simulator_success_is_consistent_with_exact() {
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let a = superposed_query_adversary(l, &[0.25, 0.75]).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        let h = FiniteFunction::sample_uniform(2, 2, 23).unwrap();
        let exact = simulator_success_exact(&a, &h, 1, &v).unwrap();
        let (mean, se) = simulator_success_sampled(&a, &h, 1, &v, 100_000, 99).unwrap();
        assert!(
            (mean - exact).abs() <= tol::SIGMA_FACTOR * se + 1e-9,
            "exact {exact}, sampled {mean} +- {se}"
        );
    }

    #[test]
    fn aggregate_bound_is_exact_for_the_enumerable_family() {
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        let cfg = AggregateConfig::default();
        let report = check_aggregate_bound(&a, &v, 2, &cfg).unwrap();
        assert_eq!(report.family_k, 4);
        assert!(report.holds);
        assert!(report.family_matches_uniform);
        for point in &report.per_point {
            assert_eq!(point.simulator.mode, AverageMode::Exhaustive);
            assert_eq!(point.native_uniform.mode, AverageMode::Exhaustive);
            // Exact agreement between the family and uniform averages.
            assert!(
                (point.native_family.mean - point.native_uniform.mean).abs() < 1e-9,
                "family {} vs uniform {}",
                point.native_family.mean,
                point.native_uniform.mean
            );
        }
        // The copy adversary queries x0 = 0 with certainty: its native
        // success at x0 = 0 is 1 for every oracle.
        assert!((report.per_point[0].native_uniform.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_bound_handles_the_zero_query_corner() {
        let l = RegisterLayout::new(2, 4, 4, 1).unwrap();
        let a = guessing_adversary(l, 0, 1).unwrap();
        let v = QuantumPredicate::response_equals_theta();
        let report = check_aggregate_bound(&a, &v, 2, &AggregateConfig::default()).unwrap();
        assert!((report.additive - 1.0 / 8.0).abs() < 1e-12);
        assert!(report.holds);
    }
}
