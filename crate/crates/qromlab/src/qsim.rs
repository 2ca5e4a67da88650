//! Dense statevector simulation over four named registers.
//!
//! A state lives on registers X (query input), Y (query response),
//! Z (output/work), and E (environment), with amplitudes indexed as
//! `((x * dim_y + y) * dim_z + z) * dim_e + e`. The oracle acts as the
//! XOR unitary `|x>|y> -> |x>|y xor H(x)>`; everything else is built from
//! explicit unitary matrices on register subsets, basis permutations, and
//! projectors.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, KahanSum, C64, C_ONE, C_ZERO};
use crate::oracle::FiniteFunction;
use crate::tol;

/// The four registers of the simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reg {
    X,
    Y,
    Z,
    E,
}

pub const ALL_REGS: [Reg; 4] = [Reg::X, Reg::Y, Reg::Z, Reg::E];

/// Register dimensions. `dim_y` must equal `2^range_bits` of any oracle the
/// state is queried against (XOR needs a power of two); the other registers
/// are free.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    dim_x: usize,
    dim_y: usize,
    dim_z: usize,
    dim_e: usize,
}

impl RegisterLayout {
    pub fn new(dim_x: usize, dim_y: usize, dim_z: usize, dim_e: usize) -> Result<Self> {
        Self::new_capped(dim_x, dim_y, dim_z, dim_e, tol::DEFAULT_STATE_DIM_CAP)
    }

    /// As [`RegisterLayout::new`] with an explicit total-dimension cap.
    pub fn new_capped(
        dim_x: usize,
        dim_y: usize,
        dim_z: usize,
        dim_e: usize,
        cap: usize,
    ) -> Result<Self> {
        if dim_x == 0 || dim_y == 0 || dim_z == 0 || dim_e == 0 {
            return Err(Error::InvalidArgument(
                "register dimensions must be positive".into(),
            ));
        }
        let total = dim_x
            .checked_mul(dim_y)
            .and_then(|t| t.checked_mul(dim_z))
            .and_then(|t| t.checked_mul(dim_e))
            .ok_or(Error::Capacity {
                what: "state dimension",
                requested: u64::MAX,
                cap: cap as u64,
            })?;
        if total > cap {
            return Err(Error::Capacity {
                what: "state dimension",
                requested: total as u64,
                cap: cap as u64,
            });
        }
        Ok(RegisterLayout {
            dim_x,
            dim_y,
            dim_z,
            dim_e,
        })
    }

    pub fn dim(&self, reg: Reg) -> usize {
        match reg {
            Reg::X => self.dim_x,
            Reg::Y => self.dim_y,
            Reg::Z => self.dim_z,
            Reg::E => self.dim_e,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dim_x * self.dim_y * self.dim_z * self.dim_e
    }

    pub fn stride(&self, reg: Reg) -> usize {
        match reg {
            Reg::X => self.dim_y * self.dim_z * self.dim_e,
            Reg::Y => self.dim_z * self.dim_e,
            Reg::Z => self.dim_e,
            Reg::E => 1,
        }
    }

    pub fn index(&self, x: usize, y: usize, z: usize, e: usize) -> usize {
        debug_assert!(x < self.dim_x && y < self.dim_y && z < self.dim_z && e < self.dim_e);
        ((x * self.dim_y + y) * self.dim_z + z) * self.dim_e + e
    }

    pub fn unindex(&self, idx: usize) -> (usize, usize, usize, usize) {
        let e = idx % self.dim_e;
        let rest = idx / self.dim_e;
        let z = rest % self.dim_z;
        let rest = rest / self.dim_z;
        let y = rest % self.dim_y;
        let x = rest / self.dim_y;
        (x, y, z, e)
    }

    /// Digit of one register within a flat index.
    pub fn digit(&self, idx: usize, reg: Reg) -> usize {
        (idx / self.stride(reg)) % self.dim(reg)
    }
}

/// Outcome of preparing a state from raw amplitudes.
#[derive(Clone, Debug)]
pub struct InitOutcome {
    pub state: StateVector,
    /// True when the input deviated from unit norm by more than
    /// [`tol::NORM_TOLERANCE`] and was renormalized.
    pub renormalized: bool,
    pub original_norm2: f64,
}

/// Dense state over a [`RegisterLayout`]. Projection leaves states
/// sub-normalized on purpose; `norm2` reports the retained mass.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state |x, y, z, e>.
    pub fn basis(layout: RegisterLayout, x: usize, y: usize, z: usize, e: usize) -> Result<Self> {
        for (reg, v) in ALL_REGS.iter().zip([x, y, z, e]) {
            if v >= layout.dim(*reg) {
                return Err(Error::OutOfRange {
                    what: "basis index",
                    value: v as u64,
                    bound: layout.dim(*reg) as u64,
                });
            }
        }
        let mut amps = vec![C_ZERO; layout.total_dim()];
        amps[layout.index(x, y, z, e)] = C_ONE;
        Ok(StateVector { layout, amps })
    }

    /// Prepares a state from raw amplitudes, renormalizing (and reporting
    /// that it did) when the squared norm strays beyond the tolerance.
    /// A zero vector cannot be repaired and is rejected.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<InitOutcome> {
        if amps.len() != layout.total_dim() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {} does not match layout dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let n2 = linalg::norm2(&amps);
        if n2 < 1e-300 {
            return Err(Error::NotNormalized { norm2: n2 });
        }
        let renormalized = (n2 - 1.0).abs() > tol::NORM_TOLERANCE;
        let mut state = StateVector { layout, amps };
        if renormalized {
            let scale = 1.0 / n2.sqrt();
            for a in state.amps.iter_mut() {
                *a *= scale;
            }
        }
        Ok(InitOutcome {
            state,
            renormalized,
            original_norm2: n2,
        })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm2(&self) -> f64 {
        linalg::norm2(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm2() - 1.0).abs() <= tol::NORM_TOLERANCE
    }

    fn require_normalized(&self) -> Result<()> {
        let n2 = self.norm2();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm2: n2 });
        }
        Ok(())
    }

    /// Squared overlap |<other|self>|^2.
    pub fn overlap2(&self, other: &StateVector) -> f64 {
        linalg::inner(&other.amps, &self.amps).norm_sqr()
    }

    /// Applies the XOR oracle for `h`: |x>|y> -> |x>|y xor h(x)>.
    pub fn apply_oracle(&self, h: &FiniteFunction) -> Result<StateVector> {
        if h.domain_size() != self.layout.dim_x {
            return Err(Error::InvalidArgument(format!(
                "oracle domain {} does not match X dimension {}",
                h.domain_size(),
                self.layout.dim_x
            )));
        }
        if h.range_size() != self.layout.dim_y as u64 {
            return Err(Error::InvalidArgument(format!(
                "oracle range {} does not match Y dimension {}",
                h.range_size(),
                self.layout.dim_y
            )));
        }
        let l = self.layout;
        let mut out = vec![C_ZERO; self.amps.len()];
        let ze = l.dim_z * l.dim_e;
        for x in 0..l.dim_x {
            let hx = h.evaluate(x)? as usize;
            for y in 0..l.dim_y {
                let src = (x * l.dim_y + y) * ze;
                let dst = (x * l.dim_y + (y ^ hx)) * ze;
                out[dst..dst + ze].copy_from_slice(&self.amps[src..src + ze]);
            }
        }
        Ok(StateVector {
            layout: l,
            amps: out,
        })
    }

    /// Applies a validated unitary acting on an ordered subset of registers
    /// (identity elsewhere).
    pub fn apply_unitary(&self, u: &Unitary, regs: &[Reg]) -> Result<StateVector> {
        let plan = SubsetPlan::new(self.layout, regs)?;
        if u.dim() != plan.joint_dim {
            return Err(Error::InvalidArgument(format!(
                "unitary dimension {} does not match register subset dimension {}",
                u.dim(),
                plan.joint_dim
            )));
        }
        let mut out = self.amps.clone();
        let mut gathered = vec![C_ZERO; plan.joint_dim];
        for base in plan.fiber_bases() {
            for (slot, off) in plan.offsets.iter().enumerate() {
                gathered[slot] = self.amps[base + off];
            }
            let transformed = u.matrix().mul_vec(&gathered);
            for (slot, off) in plan.offsets.iter().enumerate() {
                out[base + off] = transformed[slot];
            }
        }
        Ok(StateVector {
            layout: self.layout,
            amps: out,
        })
    }

    /// Applies a basis permutation of the full index space.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<StateVector> {
        if p.len() != self.amps.len() {
            return Err(Error::InvalidArgument(format!(
                "permutation over {} indices applied to dimension {}",
                p.len(),
                self.amps.len()
            )));
        }
        let mut out = vec![C_ZERO; self.amps.len()];
        for (src, &dst) in p.table().iter().enumerate() {
            out[dst] = self.amps[src];
        }
        Ok(StateVector {
            layout: self.layout,
            amps: out,
        })
    }

    /// Born measurement of one register in the computational basis.
    /// Requires a normalized state; returns the outcome and the collapsed,
    /// renormalized post-measurement state.
    pub fn measure_register(&self, reg: Reg, rng: &mut impl Rng) -> Result<(usize, StateVector)> {
        self.require_normalized()?;
        let probs = self.register_distribution(reg);
        let outcome = sample_index(&probs, rng);
        let (_, post) = self.collapse_register(reg, outcome)?;
        Ok((outcome, post))
    }

    /// Forces a register measurement outcome (test harness hook). Errors if
    /// the requested branch has zero probability.
    pub fn measure_register_forced(&self, reg: Reg, outcome: usize) -> Result<(f64, StateVector)> {
        self.require_normalized()?;
        self.collapse_register(reg, outcome)
    }

    /// Marginal distribution of one register.
    pub fn register_distribution(&self, reg: Reg) -> Vec<f64> {
        let mut acc = vec![KahanSum::new(); self.layout.dim(reg)];
        for (idx, a) in self.amps.iter().enumerate() {
            acc[self.layout.digit(idx, reg)].add(a.norm_sqr());
        }
        acc.into_iter().map(|k| k.value()).collect()
    }

    fn collapse_register(&self, reg: Reg, outcome: usize) -> Result<(f64, StateVector)> {
        if outcome >= self.layout.dim(reg) {
            return Err(Error::OutOfRange {
                what: "measurement outcome",
                value: outcome as u64,
                bound: self.layout.dim(reg) as u64,
            });
        }
        let mut mass = KahanSum::new();
        let mut amps = vec![C_ZERO; self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            if self.layout.digit(idx, reg) == outcome {
                amps[idx] = *a;
                mass.add(a.norm_sqr());
            }
        }
        let p = mass.value();
        if p <= 1e-300 {
            return Err(Error::ZeroProbabilityBranch { outcome });
        }
        let scale = 1.0 / p.sqrt();
        for a in amps.iter_mut() {
            *a *= scale;
        }
        Ok((
            p,
            StateVector {
                layout: self.layout,
                amps,
            },
        ))
    }

    /// Binary Born measurement of an orthogonal projector. Returns whether
    /// the projector fired and the renormalized post-measurement state.
    pub fn measure_projector(
        &self,
        p: &Projector,
        rng: &mut impl Rng,
    ) -> Result<(bool, StateVector)> {
        self.require_normalized()?;
        let inside = p.apply(self)?;
        let prob = inside.norm2();
        let fired = rng.gen::<f64>() < prob;
        let mut amps;
        let mass;
        if fired {
            amps = inside.amps;
            mass = prob;
        } else {
            amps = self
                .amps
                .iter()
                .zip(inside.amps.iter())
                .map(|(a, b)| a - b)
                .collect();
            mass = 1.0 - prob;
        }
        if mass <= 1e-300 {
            return Err(Error::ZeroProbabilityBranch {
                outcome: usize::from(fired),
            });
        }
        let scale = 1.0 / mass.sqrt();
        for a in amps.iter_mut() {
            *a *= scale;
        }
        Ok((
            fired,
            StateVector {
                layout: self.layout,
                amps,
            },
        ))
    }

    /// Renormalizes a sub-normalized state, returning the prior mass.
    pub fn renormalized(&self) -> Result<(f64, StateVector)> {
        let n2 = self.norm2();
        if n2 <= 1e-300 {
            return Err(Error::NotNormalized { norm2: n2 });
        }
        let scale = 1.0 / n2.sqrt();
        let amps = self.amps.iter().map(|a| a * scale).collect();
        Ok((
            n2,
            StateVector {
                layout: self.layout,
                amps,
            },
        ))
    }
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen::<f64>();
    let mut cdf = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cdf += p;
        if u < cdf {
            return i;
        }
    }
    // Rounding pushed the total below u; return the last nonzero bin.
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Iteration plan for applying an operator on a register subset.
struct SubsetPlan {
    joint_dim: usize,
    /// Offsets of the subset's basis states relative to a fiber base.
    offsets: Vec<usize>,
    /// Dimensions and strides of the complement registers.
    complement: Vec<(usize, usize)>,
}

impl SubsetPlan {
    fn new(layout: RegisterLayout, regs: &[Reg]) -> Result<Self> {
        if regs.is_empty() {
            return Err(Error::InvalidArgument("empty register subset".into()));
        }
        for (i, r) in regs.iter().enumerate() {
            if regs[..i].contains(r) {
                return Err(Error::InvalidArgument(format!(
                    "register {r:?} listed twice"
                )));
            }
        }
        let joint_dim: usize = regs.iter().map(|r| layout.dim(*r)).product();
        // Offsets in mixed-radix order: the first register is the most
        // significant digit of the operator's index space.
        let mut offsets = vec![0usize; joint_dim];
        for (slot, off) in offsets.iter_mut().enumerate() {
            let mut rest = slot;
            let mut acc = 0usize;
            for r in regs.iter().rev() {
                let d = layout.dim(*r);
                acc += (rest % d) * layout.stride(*r);
                rest /= d;
            }
            *off = acc;
        }
        let complement = ALL_REGS
            .iter()
            .filter(|r| !regs.contains(r))
            .map(|r| (layout.dim(*r), layout.stride(*r)))
            .collect();
        Ok(SubsetPlan {
            joint_dim,
            offsets,
            complement,
        })
    }

    fn fiber_bases(&self) -> impl Iterator<Item = usize> + '_ {
        let total: usize = self.complement.iter().map(|(d, _)| d).product();
        (0..total).map(move |mut k| {
            let mut base = 0usize;
            for (d, s) in self.complement.iter().rev() {
                base += (k % d) * s;
                k /= d;
            }
            base
        })
    }
}

/// A unitary matrix validated at construction; application sites can then
/// skip per-call re-validation.
#[derive(Clone, Debug)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::InvalidArgument("unitary must be square".into()));
        }
        let dev = matrix.unitarity_deviation();
        if dev > tol::UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Unitary { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The inverse (adjoint) unitary.
    pub fn inverse(&self) -> Unitary {
        Unitary {
            matrix: self.matrix.adjoint(),
        }
    }
}

/// A basis permutation of the full index space, validated as a bijection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    table: Vec<usize>,
}

impl Permutation {
    pub fn new(table: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; table.len()];
        for &dst in &table {
            if dst >= table.len() || seen[dst] {
                return Err(Error::NotPermutation { index: dst });
            }
            seen[dst] = true;
        }
        Ok(Permutation { table })
    }

    /// Builds a permutation from a map on register digits.
    pub fn from_digit_map(
        layout: RegisterLayout,
        f: impl Fn(usize, usize, usize, usize) -> (usize, usize, usize, usize),
    ) -> Result<Self> {
        let mut table = vec![0usize; layout.total_dim()];
        for (idx, slot) in table.iter_mut().enumerate() {
            let (x, y, z, e) = layout.unindex(idx);
            let (nx, ny, nz, ne) = f(x, y, z, e);
            for (reg, v) in ALL_REGS.iter().zip([nx, ny, nz, ne]) {
                if v >= layout.dim(*reg) {
                    return Err(Error::OutOfRange {
                        what: "permutation image digit",
                        value: v as u64,
                        bound: layout.dim(*reg) as u64,
                    });
                }
            }
            *slot = layout.index(nx, ny, nz, ne);
        }
        Self::new(table)
    }

    /// Swap of the Y and Z registers (requires equal dimensions).
    pub fn swap_y_z(layout: RegisterLayout) -> Result<Self> {
        if layout.dim(Reg::Y) != layout.dim(Reg::Z) {
            return Err(Error::InvalidArgument(
                "Y/Z swap needs equal register dimensions".into(),
            ));
        }
        Self::from_digit_map(layout, |x, y, z, e| (x, z, y, e))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0usize; self.table.len()];
        for (src, &dst) in self.table.iter().enumerate() {
            inv[dst] = src;
        }
        Permutation { table: inv }
    }
}

/// A rule assigning each (x, theta) cell a projector on the Z register.
/// The common case is a classical relation lifted to a diagonal 0/1 mask;
/// explicitly projective cells are supported for non-classical predicates.
#[derive(Clone)]
pub enum QuantumPredicate {
    /// `accepts(x, theta, z)` lifted to a diagonal projector on Z.
    Classical(Arc<dyn Fn(usize, u64, usize) -> bool + Send + Sync>),
    /// Explicit projector on Z per cell; `None` marks an undefined cell.
    Projective(Arc<dyn Fn(usize, u64) -> Option<CMatrix> + Send + Sync>),
}

impl std::fmt::Debug for QuantumPredicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuantumPredicate::Classical(_) => write!(f, "QuantumPredicate::Classical"),
            QuantumPredicate::Projective(_) => write!(f, "QuantumPredicate::Projective"),
        }
    }
}

impl QuantumPredicate {
    pub fn classical(f: impl Fn(usize, u64, usize) -> bool + Send + Sync + 'static) -> Self {
        QuantumPredicate::Classical(Arc::new(f))
    }

    pub fn projective(
        f: impl Fn(usize, u64) -> Option<CMatrix> + Send + Sync + 'static,
    ) -> Self {
        QuantumPredicate::Projective(Arc::new(f))
    }

    /// The predicate that accepts a Z value equal to the reprogrammed
    /// response (requires dim_z >= dim_y at use sites).
    pub fn response_equals_theta() -> Self {
        Self::classical(|_x, theta, z| z as u64 == theta)
    }

    pub fn always_true() -> Self {
        Self::classical(|_, _, _| true)
    }
}

/// Kinds of projector supported on the simulator.
#[derive(Clone, Debug)]
enum ProjectorKind {
    /// Diagonal 0/1 mask over the full index space.
    Mask(Vec<bool>),
    /// Projector on Z, optionally restricted to one X basis value, identity
    /// on the remaining registers.
    ZBlock { x_sel: Option<usize>, pi: CMatrix },
}

/// An orthogonal projector compatible with a layout.
#[derive(Clone, Debug)]
pub struct Projector {
    layout: RegisterLayout,
    kind: ProjectorKind,
}

impl Projector {
    /// Diagonal projector from a predicate over basis indices.
    pub fn from_mask_fn(layout: RegisterLayout, f: impl Fn(usize) -> bool) -> Self {
        let mask = (0..layout.total_dim()).map(f).collect();
        Projector {
            layout,
            kind: ProjectorKind::Mask(mask),
        }
    }

    /// Projector onto one basis value of one register.
    pub fn basis_state(layout: RegisterLayout, reg: Reg, value: usize) -> Result<Self> {
        if value >= layout.dim(reg) {
            return Err(Error::OutOfRange {
                what: "projector basis value",
                value: value as u64,
                bound: layout.dim(reg) as u64,
            });
        }
        Ok(Self::from_mask_fn(layout, |idx| {
            layout.digit(idx, reg) == value
        }))
    }

    /// Builds `pi` on Z (optionally under an X basis restriction), identity
    /// on Y and E. `pi` must pass the projector check.
    pub fn z_block(layout: RegisterLayout, x_sel: Option<usize>, pi: CMatrix) -> Result<Self> {
        if pi.rows() != layout.dim(Reg::Z) || pi.cols() != layout.dim(Reg::Z) {
            return Err(Error::InvalidArgument(format!(
                "Z projector is {}x{}, register has dimension {}",
                pi.rows(),
                pi.cols(),
                layout.dim(Reg::Z)
            )));
        }
        let dev = pi.projector_deviation();
        if dev > tol::PROJECTOR_TOLERANCE {
            return Err(Error::NotProjector { deviation: dev });
        }
        if let Some(x) = x_sel {
            if x >= layout.dim(Reg::X) {
                return Err(Error::OutOfRange {
                    what: "projector X restriction",
                    value: x as u64,
                    bound: layout.dim(Reg::X) as u64,
                });
            }
        }
        Ok(Projector {
            layout,
            kind: ProjectorKind::ZBlock { x_sel, pi },
        })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    /// Applies the projector; the result is sub-normalized in general.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.layout != self.layout {
            return Err(Error::InvalidArgument(
                "projector layout does not match state layout".into(),
            ));
        }
        match &self.kind {
            ProjectorKind::Mask(mask) => {
                let amps = state
                    .amps
                    .iter()
                    .zip(mask.iter())
                    .map(|(a, &keep)| if keep { *a } else { C_ZERO })
                    .collect();
                Ok(StateVector {
                    layout: self.layout,
                    amps,
                })
            }
            ProjectorKind::ZBlock { x_sel, pi } => {
                let l = self.layout;
                let mut out = vec![C_ZERO; state.amps.len()];
                let mut fiber = vec![C_ZERO; l.dim_z];
                for x in 0..l.dim_x {
                    let keep_x = x_sel.map_or(true, |sel| sel == x);
                    if !keep_x {
                        continue; // projected away
                    }
                    for y in 0..l.dim_y {
                        for e in 0..l.dim_e {
                            for z in 0..l.dim_z {
                                fiber[z] = state.amps[l.index(x, y, z, e)];
                            }
                            let transformed = pi.mul_vec(&fiber);
                            for z in 0..l.dim_z {
                                out[l.index(x, y, z, e)] = transformed[z];
                            }
                        }
                    }
                }
                Ok(StateVector {
                    layout: l,
                    amps: out,
                })
            }
        }
    }

    /// Squared norm after projection, `|P psi|^2`.
    pub fn prob(&self, state: &StateVector) -> Result<f64> {
        match &self.kind {
            ProjectorKind::Mask(mask) => {
                if state.layout != self.layout {
                    return Err(Error::InvalidArgument(
                        "projector layout does not match state layout".into(),
                    ));
                }
                let mut acc = KahanSum::new();
                for (a, &keep) in state.amps.iter().zip(mask.iter()) {
                    if keep {
                        acc.add(a.norm_sqr());
                    }
                }
                Ok(acc.value())
            }
            ProjectorKind::ZBlock { .. } => Ok(self.apply(state)?.norm2()),
        }
    }

    /// Intersects a diagonal projector with a basis restriction on a
    /// register. Only defined for mask projectors (the Z-block form carries
    /// its own X restriction).
    pub fn restricted_to(&self, reg: Reg, value: usize) -> Result<Self> {
        match &self.kind {
            ProjectorKind::Mask(mask) => {
                let l = self.layout;
                let mask = mask
                    .iter()
                    .enumerate()
                    .map(|(idx, &keep)| keep && l.digit(idx, reg) == value)
                    .collect();
                Ok(Projector {
                    layout: l,
                    kind: ProjectorKind::Mask(mask),
                })
            }
            ProjectorKind::ZBlock { x_sel, pi } => {
                if reg != Reg::X {
                    return Err(Error::InvalidArgument(
                        "dense Z-block projectors only support X restrictions".into(),
                    ));
                }
                if let Some(sel) = x_sel {
                    if *sel != value {
                        return Err(Error::InvalidArgument(
                            "conflicting X restrictions on projector".into(),
                        ));
                    }
                }
                Projector::z_block(self.layout, Some(value), pi.clone())
            }
        }
    }
}

/// The projector `1 (x) 1 (x) Pi_{x,theta} (x) 1` encoding a predicate cell
/// on the Z register (no X restriction).
pub fn predicate_projector(
    predicate: &QuantumPredicate,
    x: usize,
    theta: u64,
    layout: RegisterLayout,
) -> Result<Projector> {
    match predicate {
        QuantumPredicate::Classical(accepts) => Ok(Projector::from_mask_fn(layout, |idx| {
            accepts(x, theta, layout.digit(idx, Reg::Z))
        })),
        QuantumPredicate::Projective(cell) => {
            let pi = cell(x, theta).ok_or(Error::UndefinedPredicateCell {
                x,
                theta: theta as usize,
            })?;
            Projector::z_block(layout, None, pi)
        }
    }
}

/// The success projector `|x><x| (x) 1 (x) Pi_{x,theta} (x) 1`: the
/// predicate cell together with the X register holding the measured point.
pub fn success_projector(
    predicate: &QuantumPredicate,
    x: usize,
    theta: u64,
    layout: RegisterLayout,
) -> Result<Projector> {
    match predicate {
        QuantumPredicate::Classical(accepts) => Ok(Projector::from_mask_fn(layout, |idx| {
            layout.digit(idx, Reg::X) == x && accepts(x, theta, layout.digit(idx, Reg::Z))
        })),
        QuantumPredicate::Projective(cell) => {
            let pi = cell(x, theta).ok_or(Error::UndefinedPredicateCell {
                x,
                theta: theta as usize,
            })?;
            Projector::z_block(layout, Some(x), pi)
        }
    }
}
