//! Dense complex matrices and small numeric helpers.
//!
//! Dimensions in this crate stay desk-scale (a few hundred at most for
//! dense operators), so a row-major `Vec<Complex64>` with straightforward
//! O(n^2)/O(n^3) kernels is both fast enough and easy to audit.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

pub const C_ZERO: C64 = Complex64::new(0.0, 0.0);
pub const C_ONE: C64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CMatrix({}x{})", self.rows, self.cols)
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C_ONE);
        }
        m
    }

    /// Builds a matrix from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Block-diagonal matrix from equally-sized square blocks.
    pub fn block_diag(blocks: &[CMatrix]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidArgument("no blocks".into()));
        };
        let b = first.rows;
        if blocks.iter().any(|m| m.rows != b || m.cols != b) {
            return Err(Error::InvalidArgument(
                "blocks must be square and equally sized".into(),
            ));
        }
        let n = b * blocks.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, blk) in blocks.iter().enumerate() {
            for r in 0..b {
                for c in 0..b {
                    out.set(k * b + r, k * b + c, blk.get(r, c));
                }
            }
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = vec![C_ZERO; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = C_ZERO;
            for (a, b) in row.iter().zip(v.iter()) {
                acc += a * b;
            }
            out[r] = acc;
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix-matrix dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == C_ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// Largest entry-wise absolute difference to another matrix.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation of `self† self` from the identity (requires square).
    pub fn unitarity_deviation(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        self.adjoint().mul(self).max_abs_diff(&CMatrix::identity(self.rows))
    }

    /// Deviation from being an orthogonal projector: max of the deviations
    /// from self-adjointness and idempotence.
    pub fn projector_deviation(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let sym = self.max_abs_diff(&self.adjoint());
        let idem = self.mul(self).max_abs_diff(self);
        sym.max(idem)
    }
}

/// Squared Euclidean norm of a complex vector.
pub fn norm2(v: &[C64]) -> f64 {
    let mut acc = KahanSum::new();
    for a in v {
        acc.add(a.norm_sqr());
    }
    acc.value()
}

/// Hermitian inner product `<a, b>` (conjugate-linear in the first slot).
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    let mut acc = C_ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

/// Compensated (Kahan) accumulator, used wherever sums must not depend on
/// floating-point association order at the tolerance scale.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// One standard-normal sample via Box-Muller.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>();
        if u > f64::MIN_POSITIVE {
            let v: f64 = rng.gen::<f64>();
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

fn gaussian_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
        .collect()
}

/// Haar-ish random unitary: modified Gram-Schmidt on a complex Gaussian
/// matrix, with one re-orthogonalization pass. Columns of a Gaussian matrix
/// are almost surely in general position at these dimensions; the caller's
/// unitarity validation is the backstop.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = (0..n).map(|_| gaussian_vector(n, rng)).collect();
    orthonormalize(&mut cols);
    let mut m = CMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            m.set(r, c, *v);
        }
    }
    m
}

/// In-place modified Gram-Schmidt with a second pass per vector.
fn orthonormalize(cols: &mut [Vec<C64>]) {
    let n = cols.len();
    for i in 0..n {
        for _pass in 0..2 {
            for j in 0..i {
                let coeff = {
                    let (head, tail) = cols.split_at(i);
                    inner(&head[j], &tail[0])
                };
                let (head, tail) = cols.split_at_mut(i);
                for (t, h) in tail[0].iter_mut().zip(head[j].iter()) {
                    *t -= coeff * h;
                }
            }
        }
        let nrm = norm2(&cols[i]).sqrt();
        assert!(nrm > 1e-12, "degenerate vector during orthonormalization");
        for v in cols[i].iter_mut() {
            *v /= nrm;
        }
    }
}

/// Completes a unit vector to a unitary matrix with that vector as its
/// first column.
pub fn unitary_with_first_column(first: &[C64]) -> Result<CMatrix> {
    let n = first.len();
    let nn = norm2(first);
    if (nn - 1.0).abs() > tol::NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm2: nn });
    }
    let mut cols: Vec<Vec<C64>> = vec![first.to_vec()];
    // Greedily extend with standard basis vectors, skipping any that become
    // numerically dependent on the span collected so far.
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand = vec![C_ZERO; n];
        cand[k] = C_ONE;
        for col in &cols {
            let coeff = inner(col, &cand);
            for (c, v) in cand.iter_mut().zip(col.iter()) {
                *c -= coeff * v;
            }
        }
        let nrm = norm2(&cand).sqrt();
        if nrm > 1e-6 {
            for v in cand.iter_mut() {
                *v /= nrm;
            }
            cols.push(cand);
        }
    }
    if cols.len() != n {
        return Err(Error::InvalidArgument(
            "could not complete vector to a basis".into(),
        ));
    }
    let mut m = CMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            m.set(r, c, *v);
        }
    }
    Ok(m)
}

/// Random rank-`rank` orthogonal projector `U diag(1..1, 0..0) U†`.
pub fn random_projector(dim: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rank <= dim);
    let u = random_unitary(dim, rng);
    let mut p = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = C_ZERO;
            for k in 0..rank {
                acc += u.get(r, k) * u.get(c, k).conj();
            }
            p.set(r, c, acc);
        }
    }
    p
}

/// Random normalized state vector.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v = gaussian_vector(dim, rng);
    let nrm = norm2(&v).sqrt();
    for a in v.iter_mut() {
        *a /= nrm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn identity_is_unitary_and_projector() {
        let id = CMatrix::identity(5);
        assert!(id.unitarity_deviation() < 1e-15);
        assert!(id.projector_deviation() < 1e-15);
    }

    #[test]
    fn random_unitaries_pass_validation() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for n in [1, 2, 3, 8, 32, 128] {
            let u = random_unitary(n, &mut rng);
            assert!(
                u.unitarity_deviation() < tol::UNITARY_TOLERANCE,
                "dimension {n}: deviation {}",
                u.unitarity_deviation()
            );
        }
    }

    #[test]
    fn random_projectors_pass_validation() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for (dim, rank) in [(2, 1), (4, 2), (8, 3), (16, 16), (5, 0)] {
            let p = random_projector(dim, rank, &mut rng);
            assert!(p.projector_deviation() < tol::PROJECTOR_TOLERANCE);
            // Trace equals the rank.
            let tr: f64 = (0..dim).map(|i| p.get(i, i).re).sum();
            assert!((tr - rank as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn first_column_completion_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for dim in [2, 3, 7, 16] {
            let v = random_state(dim, &mut rng);
            let u = unitary_with_first_column(&v).unwrap();
            assert!(u.unitarity_deviation() < tol::UNITARY_TOLERANCE);
            for (r, want) in v.iter().enumerate() {
                assert!((u.get(r, 0) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kahan_sum_handles_small_increments() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-9)).abs() < 1e-12);
    }

    #[test]
    fn mul_vec_matches_manual_expansion() {
        let m = CMatrix::from_fn(2, 2, |r, c| C64::new((r + 2 * c) as f64, 1.0));
        let v = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let out = m.mul_vec(&v);
        let want0 = m.get(0, 0) * v[0] + m.get(0, 1) * v[1];
        let want1 = m.get(1, 0) * v[0] + m.get(1, 1) * v[1];
        assert!((out[0] - want0).norm() < 1e-15);
        assert!((out[1] - want1).norm() < 1e-15);
    }
}
