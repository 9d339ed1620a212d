//! Krylov bases and their recurrence coefficients.
//!
//! * [`lanczos`] — Hermitian generators, tridiagonal `(a_n, b_n)`.
//! * [`szego`] — unitary generators, the two-sequence recursion producing the
//!   orthonormal `Φ_n` together with the companion states `Φ̃_n`.
//! * [`cmv_build`] — the same Verblunsky coefficients obtained directly in the
//!   CMV basis `P_n`, in which `U` is five-diagonal.
//!
//! All recursions reorthogonalize each new vector against the stored basis
//! (two-pass classical Gram–Schmidt) unless told otherwise, and stop when the
//! norm of the next unnormalized vector falls below the breakdown tolerance.

mod cmv;
mod forms;
mod lanczos;
mod szego;

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::operator::Unitary;

pub use cmv::cmv_build;
pub(crate) use forms::theta_block;
pub use forms::{cmv_factorization, hessenberg_matrix, CmvForm};
pub use lanczos::{lanczos, lanczos_weighted, LanczosCoefficients};
pub use szego::szego;

#[cfg(test)]
pub(crate) use forms::dense_orbit;

/// Tolerance for deciding that a stored `|α|` equals one.
pub const UNIMODULAR_TOL: f64 = 1e-10;

/// Above this dimension full reorthogonalization is off unless requested.
pub const REORTH_DIM_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOptions {
    /// Absolute breakdown threshold; `None` means `1e-12·√d`.
    pub breakdown_tol: Option<f64>,
    /// `None` means "on for d ≤ 4096".
    pub reorthogonalize: Option<bool>,
    /// Stop after this many basis vectors even without breakdown.
    pub max_dim: Option<usize>,
    /// How far `|α|` may exceed one before the run is aborted.
    pub disk_tol: f64,
    /// Spot-check hermiticity before running Lanczos.
    pub check_hermitian: bool,
    /// Keep the basis vectors in the result. Reorthogonalization stores them
    /// regardless while running.
    pub keep_basis: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            breakdown_tol: None,
            reorthogonalize: None,
            max_dim: None,
            disk_tol: 1e-8,
            check_hermitian: false,
            keep_basis: true,
        }
    }
}

impl KrylovOptions {
    pub fn breakdown_tolerance(&self, dim: usize) -> f64 {
        self.breakdown_tol
            .unwrap_or_else(|| 1e-12 * libm::sqrt(dim as f64))
    }

    pub fn reorthogonalizes(&self, dim: usize) -> bool {
        self.reorthogonalize.unwrap_or(dim <= REORTH_DIM_LIMIT)
    }

    pub fn dimension_cap(&self, dim: usize) -> usize {
        self.max_dim.map_or(dim, |m| m.min(dim)).max(1)
    }

    pub fn with_max_dim(mut self, max_dim: usize) -> Self {
        self.max_dim = Some(max_dim);
        self
    }

    pub fn without_basis(mut self) -> Self {
        self.keep_basis = false;
        self
    }
}

/// Verblunsky coefficients `α_0..α_{D−1}` with their `ρ_n = √(1 − |α_n|²)`.
///
/// The convention `α_{−1} = −1`, `ρ_{−1} = 0` is available through
/// [`alpha`](Self::alpha) and [`rho`](Self::rho) with index `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    alphas: Vec<C64>,
    rhos: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct SequenceRepr {
    alphas: Vec<C64>,
    #[serde(default)]
    rhos: Option<Vec<f64>>,
}

#[cfg(feature = "serde")]
impl serde::Serialize for VerblunskySequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        SequenceRepr {
            alphas: self.alphas.clone(),
            rhos: Some(self.rhos.clone()),
        }
        .serialize(s)
    }
}

/// Validated through [`VerblunskySequence::new`]. Stored `ρ_n` are kept when
/// they agree with `√(1 − |α_n|²)` to `1e−8`.
#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for VerblunskySequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let repr = SequenceRepr::deserialize(d)?;
        let seq = VerblunskySequence::new(repr.alphas).map_err(serde::de::Error::custom)?;
        match repr.rhos {
            Some(rhos)
                if rhos.len() == seq.len()
                    && rhos.iter().zip(&seq.rhos).all(|(r, want)| {
                        r.is_finite() && *r >= 0.0 && (r - want).abs() <= 1e-8
                    }) =>
            {
                Ok(Self::from_parts(seq.alphas, rhos))
            }
            Some(_) => Err(serde::de::Error::custom("rhos inconsistent with alphas")),
            None => Ok(seq),
        }
    }
}

impl VerblunskySequence {
    /// Validates `|α_n| ≤ 1` and derives `ρ_n`. Moduli within
    /// [`UNIMODULAR_TOL`] of one are snapped onto the circle with `ρ_n = 0`.
    pub fn new(alphas: Vec<C64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut alphas = alphas;
        for (index, a) in alphas.iter_mut().enumerate() {
            let m = a.norm();
            if !m.is_finite() || m > 1.0 + UNIMODULAR_TOL {
                return Err(Error::OutsideUnitDisk { index, modulus: m });
            }
            if (m - 1.0).abs() <= UNIMODULAR_TOL {
                *a /= m;
            }
        }
        let rhos = alphas.iter().map(|a| rho_of(*a)).collect();
        Ok(Self { alphas, rhos })
    }

    /// Coefficients together with independently measured `ρ_n`
    /// (e.g. residual norms), which are more accurate than `√(1−|α|²)` when
    /// `ρ_n` is small.
    pub(crate) fn from_parts(alphas: Vec<C64>, rhos: Vec<f64>) -> Self {
        debug_assert_eq!(alphas.len(), rhos.len());
        Self { alphas, rhos }
    }

    /// A sequence of `len` zeros closed by a unimodular `cap`.
    pub fn free(len: usize, cap: C64) -> Self {
        let mut alphas = alloc::vec![linalg::ZERO; len];
        if let Some(last) = alphas.last_mut() {
            *last = cap / cap.norm();
        }
        Self::new(alphas).expect("free chain is valid")
    }

    pub fn alphas(&self) -> &[C64] {
        &self.alphas
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn krylov_dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `α_n` with `α_{−1} = −1` and zeros past the end.
    pub fn alpha(&self, n: isize) -> C64 {
        if n == -1 {
            -linalg::ONE
        } else if n < -1 || n as usize >= self.alphas.len() {
            linalg::ZERO
        } else {
            self.alphas[n as usize]
        }
    }

    /// `ρ_n` with `ρ_{−1} = 0` and zeros past the end.
    pub fn rho(&self, n: isize) -> f64 {
        if n < 0 || n as usize >= self.rhos.len() {
            0.0
        } else {
            self.rhos[n as usize]
        }
    }

    /// Whether the final coefficient is unimodular, i.e. the chain is a
    /// finite unitary.
    pub fn is_closed(&self) -> bool {
        self.alphas
            .last()
            .is_some_and(|a| (a.norm() - 1.0).abs() <= UNIMODULAR_TOL)
    }

    /// Interior indices where `ρ_n` vanishes, splitting the chain.
    pub fn decouplings(&self) -> Vec<usize> {
        let d = self.alphas.len();
        (0..d.saturating_sub(1))
            .filter(|&n| self.rhos[n] <= UNIMODULAR_TOL)
            .collect()
    }

    /// Largest `|Im α_n|`.
    pub fn max_imag(&self) -> f64 {
        self.alphas.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }

    /// Appends unimodular padding so the chain has length `len`.
    pub fn padded(&self, len: usize, pad: C64) -> Self {
        let mut alphas = self.alphas.clone();
        let mut rhos = self.rhos.clone();
        while alphas.len() < len {
            alphas.push(pad / pad.norm());
            rhos.push(0.0);
        }
        Self { alphas, rhos }
    }

    /// Truncates to `len` coefficients and forces the last one onto the
    /// unit circle (keeping its phase, or `1` if it vanishes).
    pub fn closed_at(&self, len: usize) -> Self {
        let len = len.clamp(1, self.alphas.len());
        let mut alphas = self.alphas[..len].to_vec();
        let mut rhos = self.rhos[..len].to_vec();
        let last = alphas[len - 1];
        alphas[len - 1] = if last.norm() > 0.0 {
            last / last.norm()
        } else {
            linalg::ONE
        };
        rhos[len - 1] = 0.0;
        Self { alphas, rhos }
    }
}

fn rho_of(a: C64) -> f64 {
    if 1.0 - a.norm() <= UNIMODULAR_TOL {
        return 0.0;
    }
    libm::sqrt((1.0 - a.norm_sqr()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Lanczos,
    Szego,
    Cmv,
}

/// Ordered orthonormal Krylov states. Szegő bases also carry the companion
/// states `Φ̃_n`, which are normalized but not mutually orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovBasis {
    pub kind: BasisKind,
    pub vectors: Vec<Vec<C64>>,
    pub companions: Vec<Vec<C64>>,
}

impl KrylovBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn as_slices(&self) -> impl Iterator<Item = &[C64]> + Clone {
        self.vectors.iter().map(|v| v.as_slice())
    }

    /// `(max_{m≠n} |⟨b_m|b_n⟩|, max_n |‖b_n‖ − 1|)`
    pub fn orthonormality_defect(&self) -> (f64, f64) {
        let mut off: f64 = 0.0;
        let mut diag: f64 = 0.0;
        for (m, bm) in self.vectors.iter().enumerate() {
            diag = diag.max((linalg::norm(bm) - 1.0).abs());
            for bn in &self.vectors[m + 1..] {
                off = off.max(linalg::dot(bm, bn).norm());
            }
        }
        (off, diag)
    }

    /// `⟨b_m|U|b_n⟩` as a dense `D×D` matrix (row `m`, column `n`).
    pub fn matrix_elements<U: Unitary>(&self, u: &U) -> DMatrix<C64> {
        let d = self.vectors.len();
        let images: Vec<Vec<C64>> = self.vectors.iter().map(|v| u.apply_vec(v)).collect();
        DMatrix::from_fn(d, d, |m, n| linalg::dot(&self.vectors[m], &images[n]))
    }

    /// Coordinates `⟨b_n|v⟩`.
    pub fn coordinates(&self, v: &[C64]) -> Vec<C64> {
        self.vectors.iter().map(|b| linalg::dot(b, v)).collect()
    }
}

/// Projects `v` onto the orthogonal complement of an orthonormal basis
/// (two-pass classical Gram–Schmidt).
pub fn reorthogonalize(basis: &KrylovBasis, v: &[C64]) -> Vec<C64> {
    let mut out = v.to_vec();
    linalg::project_out(basis.as_slices(), &mut out);
    out
}

pub(crate) fn normalized_seed(psi: &[C64], dim: usize) -> Result<Vec<C64>> {
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    let mut v = psi.to_vec();
    let n = linalg::normalize(&mut v);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroSeed);
    }
    Ok(v)
}

pub(crate) fn check_disk(index: usize, alpha: C64, tol: f64) -> Result<()> {
    let m = alpha.norm();
    if !m.is_finite() || m > 1.0 + tol {
        Err(Error::OutsideUnitDisk { index, modulus: m })
    } else {
        Ok(())
    }
}

/// `|α|` within [`UNIMODULAR_TOL`] of one ends a recursion. Once the Krylov
/// space is exhausted the residual can still carry rounding noise well above
/// the breakdown tolerance (amplified from directions the seed never reached),
/// while `|α|` itself is accurate.
pub(crate) fn closes(alpha: C64) -> bool {
    1.0 - alpha.norm() <= UNIMODULAR_TOL
}

pub(crate) fn unimodular(alpha: C64) -> C64 {
    let m = alpha.norm();
    if m > 0.0 {
        alpha / m
    } else {
        linalg::ONE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sequence_rejects_outside_disk() {
        let err = VerblunskySequence::new(vec![C64::new(1.5, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::OutsideUnitDisk { index: 0, .. }));
        assert_eq!(
            VerblunskySequence::new(vec![]).unwrap_err(),
            Error::EmptySequence
        );
    }

    #[test]
    fn sequence_conventions() {
        let s = VerblunskySequence::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 1.0)]).unwrap();
        assert_eq!(s.alpha(-1), C64::new(-1.0, 0.0));
        assert_eq!(s.rho(-1), 0.0);
        assert!((s.rho(0) - 0.8).abs() < 1e-15);
        assert!(s.is_closed());
        assert!(s.decouplings().is_empty());
        for (a, r) in s.alphas().iter().zip(s.rhos()) {
            assert!((a.norm_sqr() + r * r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reorthogonalize_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = linalg::haar_unitary(64, &mut rng);
        let basis = KrylovBasis {
            kind: BasisKind::Lanczos,
            vectors: (0..20)
                .map(|j| u.column(j).iter().copied().collect())
                .collect(),
            companions: vec![],
        };
        // already orthogonal
        let w: Vec<C64> = u.column(40).iter().copied().collect();
        assert!(linalg::max_abs_diff(&reorthogonalize(&basis, &w), &w) < 1e-14);
        // a basis vector is annihilated
        assert!(linalg::norm(&reorthogonalize(&basis, &basis.vectors[3])) < 1e-10);
        // random vector
        let v = linalg::random_state(64, &mut rng);
        let p = reorthogonalize(&basis, &v);
        for b in &basis.vectors {
            assert!(linalg::dot(b, &p).norm() < 1e-12);
        }
    }
}
