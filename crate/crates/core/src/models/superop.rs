//! Operator evolution `O ↦ U†OU` on vectorized operators.
//!
//! `|O⟩` stores `O_{ij}/√d` at index `i·d + j`, so the plain inner product of
//! two vectors is `tr(A†B)/d`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::ising::{kicked_ising, KickedIsingParams};
use super::sector::Axis;
use crate::error::{Error, Result};
use crate::krylov::{cmv_build, KrylovOptions, VerblunskySequence};
use crate::linalg::{self, C64};
use crate::operator::Unitary;

/// `|O⟩` for a `d × d` operator.
pub fn vectorize(o: &DMatrix<C64>) -> Vec<C64> {
    let d = o.nrows();
    let s = 1.0 / libm::sqrt(d as f64);
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            v.push(o[(i, j)] * s);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64]) -> DMatrix<C64> {
    let d = libm::sqrt(v.len() as f64) as usize;
    let s = libm::sqrt(d as f64);
    DMatrix::from_fn(d, d, |i, j| v[i * d + j] * s)
}

/// Matrix-free superoperator `𝒰|O⟩ = |U†OU⟩`; its adjoint is `|UOU†⟩`.
#[derive(Debug, Clone)]
pub struct Superoperator<U> {
    pub inner: U,
}

impl<U: Unitary> Superoperator<U> {
    pub fn new(inner: U) -> Self {
        Self { inner }
    }

    /// `out = |A O A†⟩` where `A` acts through `left` and `A†` through the
    /// conjugated action of `left` on rows.
    fn conjugate(&self, dagger_first: bool, v: &[C64], out: &mut [C64]) {
        let d = self.inner.dim();
        let act = |x: &[C64], y: &mut [C64]| {
            if dagger_first {
                self.inner.apply_adjoint(x, y)
            } else {
                self.inner.apply(x, y)
            }
        };
        // W = A·O, column by column
        let mut w = vec![linalg::ZERO; d * d];
        let mut col = vec![linalg::ZERO; d];
        let mut img = vec![linalg::ZERO; d];
        for j in 0..d {
            for i in 0..d {
                col[i] = v[i * d + j];
            }
            act(&col, &mut img);
            for i in 0..d {
                w[i * d + j] = img[i];
            }
        }
        // row i of W·A† is conj(A·conj(row i of W))
        for i in 0..d {
            for j in 0..d {
                col[j] = w[i * d + j].conj();
            }
            act(&col, &mut img);
            for j in 0..d {
                out[i * d + j] = img[j].conj();
            }
        }
    }
}

impl<U: Unitary> Unitary for Superoperator<U> {
    fn dim(&self) -> usize {
        let d = self.inner.dim();
        d * d
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        self.conjugate(true, v, out)
    }

    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        self.conjugate(false, v, out)
    }
}

/// The superoperator of `u` together with the normalized `|O⟩`.
pub fn vectorize_superoperator<U: Unitary>(
    u: U,
    o: &DMatrix<C64>,
) -> Result<(Superoperator<U>, Vec<C64>)> {
    if o.nrows() != u.dim() || o.ncols() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: o.nrows(),
        });
    }
    let mut v = vectorize(o);
    if linalg::normalize(&mut v) == 0.0 {
        return Err(Error::ZeroSeed);
    }
    Ok((Superoperator::new(u), v))
}

/// Dense `d² × d²` superoperator, `S[(i,j),(k,l)] = conj(U_{ki}) U_{lj}`.
pub fn dense_superoperator(u: &DMatrix<C64>) -> DMatrix<C64> {
    let d = u.nrows();
    DMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        let (k, l) = (c / d, c % d);
        u[(k, i)].conj() * u[(l, j)]
    })
}

/// Pauli matrix on one site of an `L`-qubit register (site = bit).
pub fn site_pauli(sites: usize, site: usize, axis: Axis) -> DMatrix<C64> {
    let d = 1usize << sites;
    let bit = 1usize << site;
    DMatrix::from_fn(d, d, |r, c| {
        if (r ^ c) & !bit != 0 {
            return linalg::ZERO;
        }
        let (a, b) = ((r & bit != 0) as usize, (c & bit != 0) as usize);
        match axis {
            Axis::X => C64::new((a != b) as u8 as f64, 0.0),
            Axis::Y => match (a, b) {
                (0, 1) => C64::new(0.0, -1.0),
                (1, 0) => C64::new(0.0, 1.0),
                _ => linalg::ZERO,
            },
            Axis::Z => match (a, b) {
                (0, 0) => linalg::ONE,
                (1, 1) => -linalg::ONE,
                _ => linalg::ZERO,
            },
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpreading {
    pub sequence: VerblunskySequence,
    /// First index with `|α_n|` above the threshold, if any.
    pub first_nonzero: Option<usize>,
    pub threshold: f64,
}

impl OperatorSpreading {
    /// Mean `|α_n|²` over `n ∈ [from, to)` (clipped to the sequence).
    pub fn plateau(&self, from: usize, to: usize) -> f64 {
        let a = self.sequence.alphas();
        let to = to.min(a.len());
        if from >= to {
            return f64::NAN;
        }
        a[from..to].iter().map(|x| x.norm_sqr()).sum::<f64>() / (to - from) as f64
    }
}

/// Verblunsky coefficients of a single-site Pauli under kicked-Ising
/// operator evolution, with the first index where `|α_n| > threshold`.
pub fn operator_spreading(
    params: KickedIsingParams,
    site: usize,
    axis: Axis,
    opts: &KrylovOptions,
    threshold: f64,
) -> Result<OperatorSpreading> {
    if site >= params.sites {
        return Err(Error::InvalidParameter(alloc::format!(
            "seed site {site} outside a chain of {} sites",
            params.sites
        )));
    }
    let u = kicked_ising(params)?;
    let o = site_pauli(params.sites, site, axis);
    let (s, v) = vectorize_superoperator(u, &o)?;
    let opts = KrylovOptions {
        keep_basis: false,
        ..opts.clone()
    };
    let (sequence, _) = cmv_build(&s, &v, &opts)?;
    let first_nonzero = sequence.alphas().iter().position(|a| a.norm() > threshold);
    Ok(OperatorSpreading {
        sequence,
        first_nonzero,
        threshold,
    })
}

/// [`operator_spreading`] at the self-dual point with a `σ^z_0` seed.
pub fn dual_unitary_experiment(
    sites: usize,
    h: f64,
    opts: &KrylovOptions,
) -> Result<OperatorSpreading> {
    operator_spreading(
        KickedIsingParams::dual_unitary(sites, h),
        0,
        Axis::Z,
        opts,
        1e-8,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::szego;
    use crate::operator::DenseOperator;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn roundtrip_and_inner_product() {
        let mut r = rng(1);
        let a = linalg::random_hermitian(5, &mut r);
        let b = linalg::haar_unitary(5, &mut r);
        assert!(linalg::max_abs(&(unvectorize(&vectorize(&a)) - &a)) < 1e-13);
        let ip = linalg::dot(&vectorize(&a), &vectorize(&b));
        let want = (a.adjoint() * &b).trace() / C64::new(5.0, 0.0);
        assert!((ip - want).norm() < 1e-13);
    }

    #[test]
    fn matrix_free_matches_dense() {
        let mut r = rng(2);
        let u = linalg::haar_unitary(4, &mut r);
        let o = linalg::random_hermitian(4, &mut r);
        let s = Superoperator::new(DenseOperator::new(u.clone()));
        let dense = dense_superoperator(&u);
        assert!(linalg::max_abs(&(s.to_dense() - &dense)) < 1e-12);
        let want = vectorize(&(u.adjoint() * &o * &u));
        assert!(linalg::max_abs_diff(&s.apply_vec(&vectorize(&o)), &want) < 1e-12);
        assert!(s.unitarity_spot_check(2, 4) < 1e-12);
    }

    #[test]
    fn coefficients_agree_with_dense_oracle() {
        let mut r = rng(3);
        let u = linalg::haar_unitary(4, &mut r);
        let o = linalg::haar_unitary(4, &mut r);
        let (s, v) = vectorize_superoperator(DenseOperator::new(u.clone()), &o).unwrap();
        let opts = KrylovOptions::default();
        let (free, _) = cmv_build(&s, &v, &opts).unwrap();
        let (dense, _) =
            cmv_build(&DenseOperator::new(dense_superoperator(&u)), &v, &opts).unwrap();
        assert_eq!(free.len(), dense.len());
        for (a, b) in free.alphas().iter().zip(dense.alphas()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn hermitian_seed_gives_real_coefficients() {
        let mut r = rng(4);
        let u = linalg::haar_unitary(5, &mut r);
        let o = linalg::random_hermitian(5, &mut r);
        let (s, v) = vectorize_superoperator(DenseOperator::new(u), &o).unwrap();
        let (seq, _) = szego(&s, &v, &KrylovOptions::default()).unwrap();
        assert!(seq.max_imag() < 1e-8);
    }

    #[test]
    fn identity_is_stationary() {
        let mut r = rng(5);
        let u = linalg::haar_unitary(3, &mut r);
        let (s, v) = vectorize_superoperator(DenseOperator::new(u), &linalg::identity(3)).unwrap();
        let (seq, _) = cmv_build(&s, &v, &KrylovOptions::default()).unwrap();
        assert_eq!(seq.krylov_dim(), 1);
        assert!((seq.alphas()[0] - linalg::ONE).norm() < 1e-12);
    }

    #[test]
    fn dual_point_has_vanishing_early_coefficients() {
        let run =
            dual_unitary_experiment(4, 0.6, &KrylovOptions::default().with_max_dim(40)).unwrap();
        let first = run.first_nonzero.unwrap();
        assert!(first >= 2, "first nonzero at {first}");
        assert!(run.sequence.max_imag() < 1e-8);
    }
}
