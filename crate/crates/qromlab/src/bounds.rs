//! Sequential projection lower bounds.
//!
//! For projectors P_1..P_n and a unit state, let V be the average accept
//! probability of a uniformly chosen projector and F the average squared
//! norm after applying a uniform sequence of t projectors. Measuring a
//! random projector can destroy later acceptance, but not arbitrarily:
//!
//! * plain form: `F >= V^(2t-1)`;
//! * two-part form, for a doubly indexed family P_(i,j) applied in the
//!   pattern (i1,j1), (i2,j2), (i2,j3) with all five indices uniform:
//!   `F >= V^6`.
//!
//! These inequalities are what make measure-and-rewind extraction work, so
//! they are checked here directly at the linear-algebra level: exact
//! enumeration of all index sequences, dense projectors, no sampling.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, KahanSum};
use crate::tol;

fn check_family(projectors: &[CMatrix], dim: usize) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::InvalidArgument("empty projector family".into()));
    }
    for p in projectors {
        if p.rows() != dim || p.cols() != dim {
            return Err(Error::InvalidArgument(format!(
                "projector is {}x{}, state has dimension {dim}",
                p.rows(),
                p.cols()
            )));
        }
        let dev = p.projector_deviation();
        if dev > tol::PROJECTOR_TOLERANCE {
            return Err(Error::NotProjector { deviation: dev });
        }
    }
    Ok(())
}

fn check_state(state: &[Complex64]) -> Result<()> {
    let n2 = linalg::norm2(state);
    if (n2 - 1.0).abs() > tol::NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm2: n2 });
    }
    Ok(())
}

/// Average single-projector accept probability.
pub fn average_accept(projectors: &[CMatrix], state: &[Complex64]) -> Result<f64> {
    let dim = state.len();
    check_family(projectors, dim)?;
    check_state(state)?;
    let mut acc = KahanSum::new();
    for p in projectors {
        acc.add(linalg::norm2(&p.mul_vec(state)));
    }
    Ok(acc.value() / projectors.len() as f64)
}

/// Average squared norm after a uniform sequence of `t` projectors,
/// enumerated exactly over all n^t sequences.
pub fn sequential_survival(
    projectors: &[CMatrix],
    state: &[Complex64],
    t: usize,
) -> Result<f64> {
    let dim = state.len();
    check_family(projectors, dim)?;
    check_state(state)?;
    if t == 0 {
        return Err(Error::InvalidArgument("sequence length must be positive".into()));
    }
    let n = projectors.len();
    let sequences = (n as u64).checked_pow(t as u32).ok_or(Error::Capacity {
        what: "projector sequence enumeration",
        requested: u64::MAX,
        cap: tol::DEFAULT_ENUMERATION_CAP,
    })?;
    if sequences > tol::DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "projector sequence enumeration",
            requested: sequences,
            cap: tol::DEFAULT_ENUMERATION_CAP,
        });
    }
    // Depth-first over sequences, sharing prefixes.
    fn recurse(
        projectors: &[CMatrix],
        current: &[Complex64],
        remaining: usize,
        acc: &mut KahanSum,
    ) {
        if remaining == 0 {
            acc.add(linalg::norm2(current));
            return;
        }
        for p in projectors {
            let next = p.mul_vec(current);
            if linalg::norm2(&next) < 1e-300 {
                // A zero branch stays zero for every continuation.
                continue;
            }
            recurse(projectors, &next, remaining - 1, acc);
        }
    }
    let mut acc = KahanSum::new();
    recurse(projectors, state, t, &mut acc);
    Ok(acc.value() / sequences as f64)
}

/// One checked instance of the plain sequential bound.
#[derive(Clone, Debug, Serialize)]
pub struct SequentialBoundReport {
    pub instance_id: u64,
    pub dim: usize,
    pub family_size: usize,
    pub t: usize,
    pub v: f64,
    pub f: f64,
    /// `v^(2t-1)`.
    pub bound: f64,
    pub holds: bool,
}

pub fn check_sequential_bound(
    instance_id: u64,
    projectors: &[CMatrix],
    state: &[Complex64],
    t: usize,
) -> Result<SequentialBoundReport> {
    let v = average_accept(projectors, state)?;
    let f = sequential_survival(projectors, state, t)?;
    let bound = v.powi(2 * t as i32 - 1);
    Ok(SequentialBoundReport {
        instance_id,
        dim: state.len(),
        family_size: projectors.len(),
        t,
        v,
        f,
        bound,
        holds: f >= bound - tol::INEQUALITY_SLACK,
    })
}

/// Average squared norm for the two-part pattern: apply P_(i1,j1), then
/// P_(i2,j2), then P_(i2,j3), averaging over all n^2 m^3 index choices.
pub fn two_part_survival(
    projectors: &[Vec<CMatrix>],
    state: &[Complex64],
) -> Result<f64> {
    let dim = state.len();
    let n = projectors.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty projector family".into()));
    }
    let m = projectors[0].len();
    for row in projectors {
        if row.len() != m {
            return Err(Error::InvalidArgument(
                "ragged two-part projector family".into(),
            ));
        }
        check_family(row, dim)?;
    }
    check_state(state)?;
    let sequences = (n * n) as u64 * (m * m * m) as u64;
    if sequences > tol::DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "two-part sequence enumeration",
            requested: sequences,
            cap: tol::DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut acc = KahanSum::new();
    for row1 in projectors {
        for p1 in row1 {
            let after1 = p1.mul_vec(state);
            if linalg::norm2(&after1) < 1e-300 {
                continue;
            }
            for row2 in projectors {
                for p2 in row2 {
                    let after2 = p2.mul_vec(&after1);
                    if linalg::norm2(&after2) < 1e-300 {
                        continue;
                    }
                    for p3 in row2 {
                        acc.add(linalg::norm2(&p3.mul_vec(&after2)));
                    }
                }
            }
        }
    }
    Ok(acc.value() / sequences as f64)
}

/// Average accept over the whole doubly indexed family.
pub fn two_part_average_accept(
    projectors: &[Vec<CMatrix>],
    state: &[Complex64],
) -> Result<f64> {
    let mut acc = KahanSum::new();
    let mut count = 0usize;
    for row in projectors {
        for p in row {
            acc.add(linalg::norm2(&p.mul_vec(state)));
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidArgument("empty projector family".into()));
    }
    check_state(state)?;
    Ok(acc.value() / count as f64)
}

/// One checked instance of the two-part bound.
#[derive(Clone, Debug, Serialize)]
pub struct TwoPartBoundReport {
    pub instance_id: u64,
    pub dim: usize,
    pub outer_size: usize,
    pub inner_size: usize,
    pub v: f64,
    pub f: f64,
    /// `v^6`.
    pub bound: f64,
    pub holds: bool,
}

pub fn check_two_part_bound(
    instance_id: u64,
    projectors: &[Vec<CMatrix>],
    state: &[Complex64],
) -> Result<TwoPartBoundReport> {
    let v = two_part_average_accept(projectors, state)?;
    let f = two_part_survival(projectors, state)?;
    let bound = v.powi(6);
    Ok(TwoPartBoundReport {
        instance_id,
        dim: state.len(),
        outer_size: projectors.len(),
        inner_size: projectors[0].len(),
        v,
        f,
        bound,
        holds: f >= bound - tol::INEQUALITY_SLACK,
    })
}

/// Draws a random instance: Haar-random projector subspaces of random
/// ranks over a random dimension, and a Haar-random state.
pub fn random_sequential_instance(
    rng: &mut impl Rng,
    max_dim: usize,
    max_family: usize,
) -> (Vec<CMatrix>, Vec<Complex64>) {
    let dim = rng.gen_range(2..=max_dim.max(2));
    let n = rng.gen_range(2..=max_family.max(2));
    let projectors = (0..n)
        .map(|_| {
            let rank = rng.gen_range(1..=dim - 1);
            linalg::random_projector(dim, rank, rng)
        })
        .collect();
    let state = linalg::random_state(dim, rng);
    (projectors, state)
}

/// Draws a random doubly indexed instance.
pub fn random_two_part_instance(
    rng: &mut impl Rng,
    max_dim: usize,
    max_outer: usize,
    max_inner: usize,
) -> (Vec<Vec<CMatrix>>, Vec<Complex64>) {
    let dim = rng.gen_range(2..=max_dim.max(2));
    let n = rng.gen_range(2..=max_outer.max(2));
    let m = rng.gen_range(2..=max_inner.max(2));
    let projectors = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let rank = rng.gen_range(1..=dim - 1);
                    linalg::random_projector(dim, rank, rng)
                })
                .collect()
        })
        .collect();
    let state = linalg::random_state(dim, rng);
    (projectors, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial_rng;
    use proptest::prelude::*;

    const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn basis_projector(dim: usize, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        m.set(k, k, Complex64::new(1.0, 0.0));
        m
    }

    #[test]
    fn two_basis_projectors_give_one_half_and_one_quarter() {
        // The frozen hand case: dimension 2, the two basis projectors,
        // the uniform state, t = 2.
        let projectors = vec![basis_projector(2, 0), basis_projector(2, 1)];
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let state = vec![inv, inv];
        let report = check_sequential_bound(0, &projectors, &state, 2).unwrap();
        assert!((report.v - 0.5).abs() < 1e-12);
        assert!((report.f - 0.25).abs() < 1e-12);
        assert!((report.bound - 0.125).abs() < 1e-12);
        assert!(report.holds);
    }

    #[test]
    fn rank_one_orthogonal_two_part_family_gives_one_quarter_and_one_thirty_second() {
        // The frozen two-part hand case: four orthogonal rank-one
        // projectors arranged 2x2 over dimension 4, uniform state.
        let projectors: Vec<Vec<CMatrix>> = (0..2)
            .map(|i| (0..2).map(|j| basis_projector(4, 2 * i + j)).collect())
            .collect();
        let half = Complex64::new(0.5, 0.0);
        let state = vec![half; 4];
        let report = check_two_part_bound(0, &projectors, &state).unwrap();
        assert!((report.v - 0.25).abs() < 1e-12);
        assert!((report.f - 1.0 / 32.0).abs() < 1e-12);
        assert!((report.bound - 0.25f64.powi(6)).abs() < 1e-12);
        assert!(report.holds);
    }

    #[test]
    fn identity_projectors_achieve_equality_at_one() {
        let projectors = vec![CMatrix::identity(3), CMatrix::identity(3)];
        let mut state = vec![C_ZERO; 3];
        state[1] = Complex64::new(1.0, 0.0);
        let report = check_sequential_bound(0, &projectors, &state, 3).unwrap();
        assert!((report.v - 1.0).abs() < 1e-12);
        assert!((report.f - 1.0).abs() < 1e-12);
        assert!(report.holds);
    }

    #[test]
    fn random_instances_never_violate_the_sequential_bound() {
        for trial in 0..300 {
            let mut rng = trial_rng(42, trial);
            let (projectors, state) = random_sequential_instance(&mut rng, 8, 4);
            for t in [2, 3] {
                let report =
                    check_sequential_bound(trial, &projectors, &state, t).unwrap();
                assert!(
                    report.holds,
                    "violation at trial {trial} t={t}: f={} bound={}",
                    report.f, report.bound
                );
            }
        }
    }

    #[test]
    fn random_instances_never_violate_the_two_part_bound() {
        for trial in 0..150 {
            let mut rng = trial_rng(43, trial);
            let (projectors, state) = random_two_part_instance(&mut rng, 6, 3, 3);
            let report = check_two_part_bound(trial, &projectors, &state).unwrap();
            assert!(
                report.holds,
                "violation at trial {trial}: f={} bound={}",
                report.f, report.bound
            );
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let projectors: Vec<CMatrix> = vec![];
        let state = vec![Complex64::new(1.0, 0.0)];
        assert!(average_accept(&projectors, &state).is_err());
        // Non-projector matrix.
        let mut m = CMatrix::zeros(2, 2);
        m.set(0, 1, Complex64::new(1.0, 0.0));
        let state = vec![Complex64::new(1.0, 0.0), C_ZERO];
        assert!(matches!(
            average_accept(&[m], &state),
            Err(Error::NotProjector { .. })
        ));
        // Unnormalized state.
        let p = vec![basis_projector(2, 0)];
        let state = vec![Complex64::new(0.5, 0.0), C_ZERO];
        assert!(matches!(
            average_accept(&p, &state),
            Err(Error::NotNormalized { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sequential_bound_survives_property_search(seed in 0u64..1 << 32, t in 2usize..4) {
            let mut rng = trial_rng(seed, 7);
            let (projectors, state) = random_sequential_instance(&mut rng, 6, 3);
            let report = check_sequential_bound(seed, &projectors, &state, t).unwrap();
            prop_assert!(report.holds);
        }
    }
}
