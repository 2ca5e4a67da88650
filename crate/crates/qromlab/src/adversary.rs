//! Oracle algorithms: unitary steps interleaved with superposition queries.
//!
//! A q-query algorithm is an initial state followed by q steps; running it
//! against an oracle H applies `O_H` then the step's unitaries, q times:
//! `A_q O_H ... A_1 O_H |init>`. Segments of that product (queries i+1..=j)
//! can be run separately, which is what the measure-and-reprogram simulator
//! needs to splice oracles mid-run.
//!
//! Library convention: every adversary returns the Y register to |0> at the
//! end of a full run, for any oracle. Single-query adversaries absorb the
//! response by swapping Y into a zeroed Z; two-query adversaries either
//! absorb twice or keep their middle step block-diagonal in Y so the second
//! query uncomputes the first.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, KahanSum};
use crate::oracle::FiniteFunction;
use crate::qsim::{
    success_projector, Permutation, QuantumPredicate, Reg, RegisterLayout, StateVector, Unitary,
};
use crate::tol;

/// One primitive operation inside an adversary step.
#[derive(Clone, Debug)]
pub enum StepOp {
    /// Dense unitary on an ordered subset of registers.
    Unitary { regs: Vec<Reg>, u: Unitary },
    /// Basis permutation of the full index space.
    Permutation(Permutation),
}

impl StepOp {
    pub fn unitary(regs: Vec<Reg>, u: Unitary) -> Self {
        StepOp::Unitary { regs, u }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        match self {
            StepOp::Unitary { regs, u } => state.apply_unitary(u, regs),
            StepOp::Permutation(p) => state.apply_permutation(p),
        }
    }

    pub fn apply_inverse(&self, state: &StateVector) -> Result<StateVector> {
        match self {
            StepOp::Unitary { regs, u } => state.apply_unitary(&u.inverse(), regs),
            StepOp::Permutation(p) => state.apply_permutation(&p.inverse()),
        }
    }
}

/// Applies a sequence of ops in order.
pub fn apply_ops(state: &StateVector, ops: &[StepOp]) -> Result<StateVector> {
    let mut s = state.clone();
    for op in ops {
        s = op.apply(&s)?;
    }
    Ok(s)
}

/// Applies the inverse of a sequence (reversed order, inverted ops).
pub fn apply_ops_inverse(state: &StateVector, ops: &[StepOp]) -> Result<StateVector> {
    let mut s = state.clone();
    for op in ops.iter().rev() {
        s = op.apply_inverse(&s)?;
    }
    Ok(s)
}

/// One adversary step: the unitary applied after one oracle query.
#[derive(Clone, Debug)]
pub struct AdversaryStep {
    pub ops: Vec<StepOp>,
}

/// A q-query oracle algorithm.
#[derive(Clone, Debug)]
pub struct OracleAlgorithm {
    layout: RegisterLayout,
    initial: StateVector,
    steps: Vec<AdversaryStep>,
}

impl OracleAlgorithm {
    pub fn new(initial: StateVector, steps: Vec<AdversaryStep>) -> Self {
        OracleAlgorithm {
            layout: initial.layout(),
            initial,
            steps,
        }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    /// Number of oracle queries q.
    pub fn query_count(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, i: usize) -> &AdversaryStep {
        &self.steps[i]
    }

    /// Runs the segment `A_j O_H ... A_{i+1} O_H` on a given state: queries
    /// i+1 through j, each followed by its step. Identity when `j <= i`.
    pub fn run_segment(
        &self,
        h: &FiniteFunction,
        i: usize,
        j: usize,
        state: &StateVector,
    ) -> Result<StateVector> {
        if j > self.steps.len() {
            return Err(Error::OutOfRange {
                what: "segment end",
                value: j as u64,
                bound: self.steps.len() as u64 + 1,
            });
        }
        let mut s = state.clone();
        if j <= i {
            return Ok(s);
        }
        for step in &self.steps[i..j] {
            s = s.apply_oracle(h)?;
            s = apply_ops(&s, &step.ops)?;
        }
        Ok(s)
    }

    /// Inverts [`OracleAlgorithm::run_segment`].
    pub fn run_segment_inverse(
        &self,
        h: &FiniteFunction,
        i: usize,
        j: usize,
        state: &StateVector,
    ) -> Result<StateVector> {
        if j > self.steps.len() {
            return Err(Error::OutOfRange {
                what: "segment end",
                value: j as u64,
                bound: self.steps.len() as u64 + 1,
            });
        }
        let mut s = state.clone();
        if j <= i {
            return Ok(s);
        }
        for step in self.steps[i..j].iter().rev() {
            s = apply_ops_inverse(&s, &step.ops)?;
            s = s.apply_oracle(h)?; // the XOR oracle is self-inverse
        }
        Ok(s)
    }

    /// Full run against `h`, enforcing the Y-register convention: the final
    /// state must carry (up to [`tol::Y_CONVENTION_TOLERANCE`]) no mass
    /// outside Y = 0.
    pub fn run(&self, h: &FiniteFunction) -> Result<StateVector> {
        let state = self.run_segment(h, 0, self.steps.len(), &self.initial)?;
        let mut stray = KahanSum::new();
        let l = self.layout;
        for (idx, a) in state.amplitudes().iter().enumerate() {
            if l.digit(idx, Reg::Y) != 0 {
                stray.add(a.norm_sqr());
            }
        }
        if stray.value() > tol::Y_CONVENTION_TOLERANCE {
            return Err(Error::ResponseConvention {
                mass: stray.value(),
            });
        }
        Ok(state)
    }

    /// Probability that, after a full run against `h`, the X register holds
    /// `x` and the predicate cell (x, theta) accepts the Z register.
    pub fn success_prob(
        &self,
        h: &FiniteFunction,
        predicate: &QuantumPredicate,
        x: usize,
        theta: u64,
    ) -> Result<f64> {
        let state = self.run(h)?;
        success_projector(predicate, x, theta, self.layout)?.prob(&state)
    }
}

/// Single-query adversary that queries the basis point `x0`, moves the
/// response into Z (resetting Y), and outputs `x0`. Requires dim_z = dim_y.
pub fn classical_query_adversary(layout: RegisterLayout, x0: usize) -> Result<OracleAlgorithm> {
    let initial = StateVector::basis(layout, x0, 0, 0, 0)?;
    let absorb = Permutation::swap_y_z(layout)?;
    Ok(OracleAlgorithm::new(
        initial,
        vec![AdversaryStep {
            ops: vec![StepOp::Permutation(absorb)],
        }],
    ))
}

/// Single-query adversary querying a weighted superposition of all domain
/// points. `weights` are probabilities and must sum to 1.
pub fn superposed_query_adversary(
    layout: RegisterLayout,
    weights: &[f64],
) -> Result<OracleAlgorithm> {
    if weights.len() != layout.dim(Reg::X) {
        return Err(Error::InvalidArgument(format!(
            "{} weights for X dimension {}",
            weights.len(),
            layout.dim(Reg::X)
        )));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidArgument("negative weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol::NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm2: total });
    }
    let mut amps = vec![linalg::C_ZERO; layout.total_dim()];
    for (x, &w) in weights.iter().enumerate() {
        amps[layout.index(x, 0, 0, 0)] = linalg::C64::new(w.sqrt(), 0.0);
    }
    let initial = StateVector::from_amplitudes(layout, amps)?.state;
    let absorb = Permutation::swap_y_z(layout)?;
    Ok(OracleAlgorithm::new(
        initial,
        vec![AdversaryStep {
            ops: vec![StepOp::Permutation(absorb)],
        }],
    ))
}

/// Zero-query adversary that outputs a fixed guess (x0, z_guess) without
/// ever touching the oracle.
pub fn guessing_adversary(
    layout: RegisterLayout,
    x0: usize,
    z_guess: usize,
) -> Result<OracleAlgorithm> {
    let initial = StateVector::basis(layout, x0, 0, z_guess, 0)?;
    Ok(OracleAlgorithm::new(initial, vec![]))
}

/// Two-query adversary whose second query point depends on the first
/// answer: it queries `x0`, stores the answer in the first half of Z,
/// jumps to `x0 + jump(answer) mod dim_x`, queries again, and stores that
/// answer in the second half of Z. Requires dim_z = dim_y^2.
pub fn two_query_chain_adversary(
    layout: RegisterLayout,
    x0: usize,
    jump: impl Fn(usize) -> usize,
) -> Result<OracleAlgorithm> {
    let dy = layout.dim(Reg::Y);
    let dx = layout.dim(Reg::X);
    if layout.dim(Reg::Z) != dy * dy {
        return Err(Error::InvalidArgument(
            "chain adversary needs dim_z = dim_y^2".into(),
        ));
    }
    let initial = StateVector::basis(layout, x0, 0, 0, 0)?;
    // Step 1: swap Y into Z's first slot, then shift X by jump(answer).
    let absorb_first = Permutation::from_digit_map(layout, move |x, y, z, e| {
        let (z1, z2) = (z / dy, z % dy);
        (x, z1, y * dy + z2, e)
    })?;
    let shift_x = Permutation::from_digit_map(layout, move |x, y, z, e| {
        let z1 = z / dy;
        ((x + jump(z1) % dx) % dx, y, z, e)
    })?;
    // Step 2: swap Y into Z's second slot.
    let absorb_second = Permutation::from_digit_map(layout, move |x, y, z, e| {
        let (z1, z2) = (z / dy, z % dy);
        (x, z2, z1 * dy + y, e)
    })?;
    Ok(OracleAlgorithm::new(
        initial,
        vec![
            AdversaryStep {
                ops: vec![
                    StepOp::Permutation(absorb_first),
                    StepOp::Permutation(shift_x),
                ],
            },
            AdversaryStep {
                ops: vec![StepOp::Permutation(absorb_second)],
            },
        ],
    ))
}

/// Random single-query adversary: a random initial superposition on X, an
/// absorb swap, then a Haar-random unitary on (X, Z). Requires
/// dim_z = dim_y.
pub fn random_single_query_adversary(
    layout: RegisterLayout,
    rng: &mut impl Rng,
) -> Result<OracleAlgorithm> {
    let dx = layout.dim(Reg::X);
    let dz = layout.dim(Reg::Z);
    let mut amps = vec![linalg::C_ZERO; layout.total_dim()];
    let x_state = linalg::random_state(dx, rng);
    for (x, a) in x_state.iter().enumerate() {
        amps[layout.index(x, 0, 0, 0)] = *a;
    }
    let initial = StateVector::from_amplitudes(layout, amps)?.state;
    let absorb = Permutation::swap_y_z(layout)?;
    let process = Unitary::new(linalg::random_unitary(dx * dz, rng))?;
    Ok(OracleAlgorithm::new(
        initial,
        vec![AdversaryStep {
            ops: vec![
                StepOp::Permutation(absorb),
                StepOp::unitary(vec![Reg::X, Reg::Z], process),
            ],
        }],
    ))
}

/// Random two-query adversary using the uncompute pairing: the middle step
/// applies a random unitary on Z controlled by the Y basis (so the second
/// query at an unchanged X returns Y to |0>), and the final step applies a
/// random unitary on (X, Z).
pub fn random_two_query_adversary(
    layout: RegisterLayout,
    rng: &mut impl Rng,
) -> Result<OracleAlgorithm> {
    let dx = layout.dim(Reg::X);
    let dy = layout.dim(Reg::Y);
    let dz = layout.dim(Reg::Z);
    let mut amps = vec![linalg::C_ZERO; layout.total_dim()];
    let x_state = linalg::random_state(dx, rng);
    for (x, a) in x_state.iter().enumerate() {
        amps[layout.index(x, 0, 0, 0)] = *a;
    }
    let initial = StateVector::from_amplitudes(layout, amps)?.state;
    let blocks: Vec<CMatrix> = (0..dy).map(|_| linalg::random_unitary(dz, rng)).collect();
    let controlled = Unitary::new(CMatrix::block_diag(&blocks)?)?;
    let process = Unitary::new(linalg::random_unitary(dx * dz, rng))?;
    Ok(OracleAlgorithm::new(
        initial,
        vec![
            AdversaryStep {
                ops: vec![StepOp::unitary(vec![Reg::Y, Reg::Z], controlled)],
            },
            AdversaryStep {
                ops: vec![StepOp::unitary(vec![Reg::X, Reg::Z], process)],
            },
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial_rng;

    fn layout_2_4() -> RegisterLayout {
        RegisterLayout::new(2, 4, 4, 1).unwrap()
    }

    #[test]
    fn classical_query_copies_the_answer_and_resets_y() {
        let l = layout_2_4();
        let h = FiniteFunction::from_table(2, 2, vec![3, 1]).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let out = a.run(&h).unwrap();
        let expect = StateVector::basis(l, 0, 0, 3, 0).unwrap();
        assert!((out.overlap2(&expect) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superposed_query_weights_must_be_normalized() {
        let l = layout_2_4();
        assert!(superposed_query_adversary(l, &[0.5, 0.6]).is_err());
        assert!(superposed_query_adversary(l, &[0.5, -0.5]).is_err());
        assert!(superposed_query_adversary(l, &[0.5]).is_err());
        let a = superposed_query_adversary(l, &[0.25, 0.75]).unwrap();
        assert_eq!(a.query_count(), 1);
    }

    #[test]
    fn superposed_query_entangles_x_with_the_answer() {
        let l = layout_2_4();
        let h = FiniteFunction::from_table(2, 2, vec![2, 1]).unwrap();
        let a = superposed_query_adversary(l, &[0.25, 0.75]).unwrap();
        let out = a.run(&h).unwrap();
        // Expect sqrt(.25)|0,0,2> + sqrt(.75)|1,0,1>.
        let b0 = StateVector::basis(l, 0, 0, 2, 0).unwrap();
        let b1 = StateVector::basis(l, 1, 0, 1, 0).unwrap();
        assert!((out.overlap2(&b0) - 0.25).abs() < 1e-12);
        assert!((out.overlap2(&b1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn guessing_adversary_makes_no_queries() {
        let l = layout_2_4();
        let a = guessing_adversary(l, 1, 2).unwrap();
        assert_eq!(a.query_count(), 0);
        let h = FiniteFunction::sample_uniform(2, 2, 3).unwrap();
        let out = a.run(&h).unwrap();
        let expect = StateVector::basis(l, 1, 0, 2, 0).unwrap();
        assert!((out.overlap2(&expect) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_adversary_queries_adaptively_and_resets_y() {
        // dim_x = 4, dim_y = 4, dim_z = 16: second point = x0 + H(x0).
        let l = RegisterLayout::new(4, 4, 16, 1).unwrap();
        let h = FiniteFunction::from_table(4, 2, vec![2, 0, 3, 1]).unwrap();
        let a = two_query_chain_adversary(l, 0, |ans| ans).unwrap();
        let out = a.run(&h).unwrap();
        // H(0) = 2, second point = 2, H(2) = 3; Z holds (2, 3).
        let expect = StateVector::basis(l, 2, 0, 2 * 4 + 3, 0).unwrap();
        assert!((out.overlap2(&expect) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_adversaries_satisfy_the_response_convention() {
        let mut rng = trial_rng(77, 0);
        let l1 = RegisterLayout::new(2, 8, 8, 1).unwrap();
        let l2 = RegisterLayout::new(2, 8, 4, 1).unwrap();
        for _ in 0..3 {
            let a = random_single_query_adversary(l1, &mut rng).unwrap();
            let h = FiniteFunction::sample_with(2, 3, &mut rng).unwrap();
            a.run(&h).expect("single-query convention");
            let a = random_two_query_adversary(l2, &mut rng).unwrap();
            let h = FiniteFunction::sample_with(2, 3, &mut rng).unwrap();
            a.run(&h).expect("two-query convention");
        }
    }

    #[test]
    fn run_detects_response_convention_violations() {
        // An adversary that leaves the oracle answer in Y.
        let l = layout_2_4();
        let initial = StateVector::basis(l, 0, 0, 0, 0).unwrap();
        let bad = OracleAlgorithm::new(initial, vec![AdversaryStep { ops: vec![] }]);
        let h = FiniteFunction::from_table(2, 2, vec![1, 0]).unwrap();
        assert!(matches!(
            bad.run(&h),
            Err(Error::ResponseConvention { .. })
        ));
        // With H(0) = 0 the same adversary is fine.
        let h = FiniteFunction::zero(2, 2).unwrap();
        assert!(bad.run(&h).is_ok());
    }

    #[test]
    fn segments_compose_to_the_full_run() {
        let l = RegisterLayout::new(4, 4, 16, 1).unwrap();
        let h = FiniteFunction::sample_uniform(4, 2, 5).unwrap();
        let a = two_query_chain_adversary(l, 1, |ans| 2 * ans + 1).unwrap();
        let full = a.run(&h).unwrap();
        let mid = a.run_segment(&h, 0, 1, a.initial_state()).unwrap();
        let composed = a.run_segment(&h, 1, 2, &mid).unwrap();
        assert!((composed.overlap2(&full) - 1.0).abs() < 1e-12);
        // Inverse segment returns to the middle state.
        let back = a.run_segment_inverse(&h, 1, 2, &composed).unwrap();
        assert!((back.overlap2(&mid) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segments_ignore_oracle_values_outside_the_support() {
        // A state supported on X = 0 only cannot distinguish oracles that
        // agree at 0.
        let l = layout_2_4();
        let h1 = FiniteFunction::from_table(2, 2, vec![2, 0]).unwrap();
        let h2 = FiniteFunction::from_table(2, 2, vec![2, 3]).unwrap();
        let a = classical_query_adversary(l, 0).unwrap();
        let s1 = a.run_segment(&h1, 0, 1, a.initial_state()).unwrap();
        let s2 = a.run_segment(&h2, 0, 1, a.initial_state()).unwrap();
        assert!((s1.overlap2(&s2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn success_prob_sums_to_one_for_trivial_predicate() {
        let l = layout_2_4();
        let h = FiniteFunction::sample_uniform(2, 2, 8).unwrap();
        let a = superposed_query_adversary(l, &[0.3, 0.7]).unwrap();
        let v = QuantumPredicate::always_true();
        let mut total = 0.0;
        for x in 0..2 {
            total += a.success_prob(&h, &v, x, 0).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-10);
    }
}
