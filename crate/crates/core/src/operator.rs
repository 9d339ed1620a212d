//! Operator applicators.
//!
//! Recursions only ever need `U·v` and `U†·v` (or `H·v`), so models that live
//! on `2^L`-dimensional spaces implement these traits matrix-free.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, C64};

pub trait Unitary {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64], out: &mut [C64]);
    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]);

    fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![linalg::ZERO; self.dim()];
        self.apply(v, &mut out);
        out
    }

    fn apply_adjoint_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![linalg::ZERO; self.dim()];
        self.apply_adjoint(v, &mut out);
        out
    }

    /// Dense matrix built column by column.
    fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![linalg::ZERO; d];
        let mut col = vec![linalg::ZERO; d];
        for j in 0..d {
            e[j] = linalg::ONE;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = linalg::ZERO;
        }
        m
    }

    /// `max(‖U†U v − v‖, |‖Uv‖ − ‖v‖|)` over a few random vectors.
    fn unitarity_spot_check(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let v = linalg::random_state(self.dim(), &mut rng);
            let uv = self.apply_vec(&v);
            let back = self.apply_adjoint_vec(&uv);
            worst = worst
                .max(linalg::max_abs_diff(&back, &v))
                .max((linalg::norm(&uv) - 1.0).abs());
        }
        worst
    }
}

pub trait Hermitian {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64], out: &mut [C64]);

    fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![linalg::ZERO; self.dim()];
        self.apply(v, &mut out);
        out
    }

    /// `max |⟨u|Hv⟩ − conj⟨v|Hu⟩|` over random pairs.
    fn symmetry_spot_check(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let u = linalg::random_state(self.dim(), &mut rng);
            let v = linalg::random_state(self.dim(), &mut rng);
            let a = linalg::dot(&u, &self.apply_vec(&v));
            let b = linalg::dot(&v, &self.apply_vec(&u)).conj();
            worst = worst.max((a - b).norm());
        }
        worst
    }
}

impl<T: Unitary + ?Sized> Unitary for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        (**self).apply(v, out)
    }
    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        (**self).apply_adjoint(v, out)
    }
}

impl<T: Hermitian + ?Sized> Hermitian for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        (**self).apply(v, out)
    }
}

/// Dense column-major matrix. Serves as either a unitary or a Hermitian
/// applicator; which contract holds is the caller's claim.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator must be square");
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }
}

impl From<DMatrix<C64>> for DenseOperator {
    fn from(matrix: DMatrix<C64>) -> Self {
        Self::new(matrix)
    }
}

impl Unitary for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        linalg::matvec(&self.matrix, v, out)
    }
    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        linalg::matvec_adjoint(&self.matrix, v, out)
    }
    fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.clone()
    }
}

impl Hermitian for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        linalg::matvec(&self.matrix, v, out)
    }
}

/// Unitary given by a pair of closures.
pub struct FnUnitary<F, G> {
    dim: usize,
    forward: F,
    adjoint: G,
}

impl<F, G> FnUnitary<F, G>
where
    F: Fn(&[C64], &mut [C64]),
    G: Fn(&[C64], &mut [C64]),
{
    pub fn new(dim: usize, forward: F, adjoint: G) -> Self {
        Self {
            dim,
            forward,
            adjoint,
        }
    }
}

impl<F, G> Unitary for FnUnitary<F, G>
where
    F: Fn(&[C64], &mut [C64]),
    G: Fn(&[C64], &mut [C64]),
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        (self.forward)(v, out)
    }
    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        (self.adjoint)(v, out)
    }
}

/// `U^k` for a positive power, applied by repetition.
pub struct Power<U> {
    inner: U,
    exponent: usize,
}

impl<U: Unitary> Power<U> {
    pub fn new(inner: U, exponent: usize) -> Self {
        Self { inner, exponent }
    }
}

impl<U: Unitary> Unitary for Power<U> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        out.copy_from_slice(v);
        let mut tmp = vec![linalg::ZERO; v.len()];
        for _ in 0..self.exponent {
            self.inner.apply(out, &mut tmp);
            out.copy_from_slice(&tmp);
        }
    }
    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        out.copy_from_slice(v);
        let mut tmp = vec![linalg::ZERO; v.len()];
        for _ in 0..self.exponent {
            self.inner.apply_adjoint(out, &mut tmp);
            out.copy_from_slice(&tmp);
        }
    }
}
