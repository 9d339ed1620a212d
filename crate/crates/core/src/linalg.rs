//! Small dense helpers shared by the recursions and the model builders.
//!
//! Vectors are plain `[C64]` slices; dense matrices are column-major
//! `nalgebra::DMatrix<C64>`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `⟨a|b⟩`, antilinear in the first argument.
#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

#[inline]
pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    libm::sqrt(norm_sqr(a))
}

/// `y += s * x`
#[inline]
pub fn axpy(s: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[inline]
pub fn scale(s: C64, x: &mut [C64]) {
    for xi in x.iter_mut() {
        *xi *= s;
    }
}

/// Divides by the norm and returns it. Zero vectors are left untouched.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        let inv = 1.0 / n;
        for xi in x.iter_mut() {
            *xi *= inv;
        }
    }
    n
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Two passes of classical Gram–Schmidt against an orthonormal set.
pub fn project_out<'a, I>(basis: I, v: &mut [C64])
where
    I: IntoIterator<Item = &'a [C64]> + Clone,
{
    for _ in 0..2 {
        for q in basis.clone() {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    normalize(&mut v);
    v
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal pushed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `V f(λ) V†` for the spectral decomposition of a Hermitian generator.
pub fn hermitian_function<F>(values: &[f64], vectors: &DMatrix<C64>, f: F) -> DMatrix<C64>
where
    F: Fn(f64) -> C64,
{
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let s = f(l);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (values, vectors) = eigh(h);
    hermitian_function(&values, &vectors, |l| C64::from_polar(1.0, -t * l))
}

/// Spectral decomposition of a (numerically) unitary matrix.
///
/// The complex Schur form of a normal matrix is diagonal, so the Schur vectors
/// are eigenvectors. Returns eigenvalues and the unitary eigenvector matrix.
pub fn unitary_eigen(u: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>) {
    let (q, t) = schur(u);
    let values = (0..u.nrows()).map(|k| t[(k, k)]).collect();
    (values, q)
}

/// Eigenvalues only, for oracles that do not need the vectors.
pub fn unitary_eigenvalues(u: &DMatrix<C64>) -> Vec<C64> {
    let t = schur(u).1;
    (0..u.nrows()).map(|k| t[(k, k)]).collect()
}

/// Complex Schur form `(Q, T)`. With a deflation threshold at machine
/// epsilon the QR sweeps can stall on exactly degenerate spectra, so the
/// threshold is loosened stepwise under an iteration cap.
fn schur(u: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let cap = 100 * u.nrows().max(10);
    for eps in [4.0 * f64::EPSILON, 1e-14, 1e-13, 1e-12] {
        if let Some(s) = u.clone().try_schur(eps, cap) {
            return s.unpack();
        }
    }
    u.clone().schur().unpack()
}

pub fn matvec(m: &DMatrix<C64>, v: &[C64], out: &mut [C64]) {
    out.iter_mut().for_each(|x| *x = ZERO);
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        axpy(vj, m.column(j).as_slice(), out);
    }
}

pub fn matvec_adjoint(m: &DMatrix<C64>, v: &[C64], out: &mut [C64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(m.column(i).as_slice(), v);
    }
}

/// `max |M†M - 1|` entrywise.
pub fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let p = m.adjoint() * m;
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

pub fn basis_vector(dim: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[k] = ONE;
    v
}

/// Principal argument in `(-π, π]`.
#[inline]
pub fn arg(z: C64) -> f64 {
    libm::atan2(z.im, z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(20, &mut rng);
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn unitary_eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = haar_unitary(12, &mut rng);
        let (vals, vecs) = unitary_eigen(&u);
        let mut d = vecs.clone();
        for (j, l) in vals.iter().enumerate() {
            for x in d.column_mut(j).iter_mut() {
                *x *= l;
            }
        }
        let back = d * vecs.adjoint();
        assert!(max_abs(&(back - &u)) < 1e-10);
        assert!(vals.iter().all(|l| (l.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn projection_removes_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(16, &mut rng);
        let cols: Vec<Vec<C64>> = (0..5)
            .map(|j| u.column(j).iter().copied().collect())
            .collect();
        let mut v = random_state(16, &mut rng);
        project_out(cols.iter().map(|c| c.as_slice()), &mut v);
        for c in &cols {
            assert!(dot(c, &v).norm() < 1e-14);
        }
    }
}
