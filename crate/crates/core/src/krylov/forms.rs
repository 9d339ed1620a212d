#[cfg(test)]
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::VerblunskySequence;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Upper Hessenberg matrix `⟨Φ_m|U|Φ_n⟩`:
///
/// ```text
/// −ᾱ_n α_{m−1} Π_{k=m}^{n−1} ρ_k   m ≤ n
/// ρ_n                               m = n + 1
/// 0                                 m > n + 1
/// ```
pub fn hessenberg_matrix(seq: &VerblunskySequence) -> Result<DMatrix<C64>> {
    let d = seq.len();
    if d == 0 {
        return Err(Error::EmptySequence);
    }
    let mut h = DMatrix::zeros(d, d);
    for n in 0..d {
        let abar_n = seq.alpha(n as isize).conj();
        // walk m = n, n−1, …, 0 accumulating Π_{k=m}^{n−1} ρ_k
        let mut prod = 1.0;
        for m in (0..=n).rev() {
            if m < n {
                prod *= seq.rho(m as isize);
            }
            h[(m, n)] = -abar_n * seq.alpha(m as isize - 1) * prod;
        }
        if n + 1 < d {
            h[(n + 1, n)] = C64::new(seq.rho(n as isize), 0.0);
        }
    }
    Ok(h)
}

/// Five-diagonal CMV unitary in factorized form.
///
/// With blocks `Θ_k = [[ᾱ_k, ρ_k], [ρ_k, −α_k]]` acting on sites `(k, k+1)`:
///
/// * `L = 1 ⊕ Θ_1 ⊕ Θ_3 ⊕ ⋯`
/// * `M = Θ_0 ⊕ Θ_2 ⊕ ⋯`
///
/// and `⟨P_m|U|P_n⟩ = (M·L)_{mn}`, i.e. a step applies `L` first. A block
/// whose second site falls off the end of the chain reduces to the scalar
/// `ᾱ_{D−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmvForm {
    seq: VerblunskySequence,
    decouplings: Vec<usize>,
}

impl CmvForm {
    pub fn dim(&self) -> usize {
        self.seq.len()
    }

    pub fn sequence(&self) -> &VerblunskySequence {
        &self.seq
    }

    /// Interior sites `n` with `ρ_n = 0`: the chain splits after `n`.
    pub fn decouplings(&self) -> &[usize] {
        &self.decouplings
    }

    /// `Θ_n` as a row-major 2×2 array.
    pub fn theta(&self, n: usize) -> [[C64; 2]; 2] {
        theta_block(self.seq.alphas()[n], self.seq.rhos()[n])
    }

    /// Block list of one factor: `(first site, block)`, where a block on the
    /// last site is 1×1 and stored in `[0][0]`.
    fn blocks(&self, odd: bool) -> impl Iterator<Item = (usize, [[C64; 2]; 2], bool)> + '_ {
        let d = self.dim();
        let start = if odd { 1 } else { 0 };
        (start..d)
            .step_by(2)
            .map(move |k| (k, self.theta(k), k + 1 < d))
    }

    fn apply_factor(&self, odd: bool, adjoint: bool, v: &[C64], out: &mut [C64]) {
        if odd {
            out[0] = v[0];
        }
        for (k, t, full) in self.blocks(odd) {
            let t = if adjoint { dagger(&t) } else { t };
            if full {
                let (x, y) = (v[k], v[k + 1]);
                out[k] = t[0][0] * x + t[0][1] * y;
                out[k + 1] = t[1][0] * x + t[1][1] * y;
            } else {
                out[k] = t[0][0] * v[k];
            }
        }
    }

    /// `out = L v`
    pub fn apply_l(&self, v: &[C64], out: &mut [C64]) {
        self.apply_factor(true, false, v, out)
    }

    /// `out = M v`
    pub fn apply_m(&self, v: &[C64], out: &mut [C64]) {
        self.apply_factor(false, false, v, out)
    }

    /// One time step `v ↦ M L v` in `O(D)`; `scratch` must have length `D`.
    pub fn step(&self, v: &[C64], scratch: &mut [C64], out: &mut [C64]) {
        self.apply_l(v, scratch);
        self.apply_m(scratch, out);
    }

    /// `v ↦ L† M† v`
    pub fn step_adjoint(&self, v: &[C64], scratch: &mut [C64], out: &mut [C64]) {
        self.apply_factor(false, true, v, scratch);
        self.apply_factor(true, true, scratch, out);
    }

    pub fn l_factor(&self) -> DMatrix<C64> {
        self.factor_matrix(true)
    }

    pub fn m_factor(&self) -> DMatrix<C64> {
        self.factor_matrix(false)
    }

    fn factor_matrix(&self, odd: bool) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        if odd {
            m[(0, 0)] = linalg::ONE;
        }
        for (k, t, full) in self.blocks(odd) {
            m[(k, k)] = t[0][0];
            if full {
                m[(k, k + 1)] = t[0][1];
                m[(k + 1, k)] = t[1][0];
                m[(k + 1, k + 1)] = t[1][1];
            }
        }
        m
    }

    /// Dense `M·L`.
    pub fn to_dense(&self) -> DMatrix<C64> {
        self.m_factor() * self.l_factor()
    }

    /// Largest entry of the dense matrix beyond the second off-diagonals.
    pub fn bandwidth_defect(&self) -> f64 {
        let c = self.to_dense();
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..d {
            for n in 0..d {
                if m.abs_diff(n) > 2 {
                    worst = worst.max(c[(m, n)].norm());
                }
            }
        }
        worst
    }
}

pub(crate) fn theta_block(alpha: C64, rho: f64) -> [[C64; 2]; 2] {
    let r = C64::new(rho, 0.0);
    [[alpha.conj(), r], [r, -alpha]]
}

fn dagger(t: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [
        [t[0][0].conj(), t[1][0].conj()],
        [t[0][1].conj(), t[1][1].conj()],
    ]
}

/// Factorizes a closed sequence (`|α_{D−1}| = 1`). Interior unimodular
/// coefficients are kept; they make the corresponding `Θ_n` diagonal, which
/// splits the chain into independent pieces listed in
/// [`CmvForm::decouplings`].
pub fn cmv_factorization(seq: &VerblunskySequence) -> Result<CmvForm> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !seq.is_closed() {
        return Err(Error::NotClosed {
            modulus: seq.alphas()[seq.len() - 1].norm(),
        });
    }
    let decouplings = seq.decouplings();
    Ok(CmvForm {
        seq: seq.clone(),
        decouplings,
    })
}

#[cfg(test)]
pub(crate) fn dense_orbit(form: &CmvForm, start: &[C64], steps: usize) -> Vec<Vec<C64>> {
    let c = form.to_dense();
    let mut out = vec![start.to_vec()];
    let mut cur = start.to_vec();
    let mut next = vec![linalg::ZERO; start.len()];
    for _ in 0..steps {
        linalg::matvec(&c, &cur, &mut next);
        core::mem::swap(&mut cur, &mut next);
        out.push(cur.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::{cmv_build, szego, KrylovOptions};
    use crate::operator::DenseOperator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phase(x: f64) -> C64 {
        C64::from_polar(1.0, x)
    }

    #[test]
    fn one_by_one() {
        let a = phase(0.7);
        let s = VerblunskySequence::new(vec![a]).unwrap();
        let h = hessenberg_matrix(&s).unwrap();
        assert!((h[(0, 0)] - a.conj()).norm() < 1e-15);
        let f = cmv_factorization(&s).unwrap();
        assert!((f.to_dense()[(0, 0)] - a.conj()).norm() < 1e-15);
    }

    #[test]
    fn two_by_two_forms_agree() {
        let s = VerblunskySequence::new(vec![linalg::ZERO, linalg::ONE]).unwrap();
        let h = hessenberg_matrix(&s).unwrap();
        // [[0, 1], [1, 0]] up to the sign of the corner
        assert!(h[(0, 0)].norm() < 1e-15 && h[(1, 1)].norm() < 1e-15);
        assert!((h[(1, 0)] - linalg::ONE).norm() < 1e-15);
        assert!((h[(0, 1)].norm() - 1.0).abs() < 1e-15);
        assert!(linalg::unitarity_defect(&h) < 1e-14);
        let c = cmv_factorization(&s).unwrap().to_dense();
        assert!(linalg::max_abs(&(c - h)) < 1e-14);
    }

    #[test]
    fn hessenberg_matches_szego_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let u = DenseOperator::new(linalg::haar_unitary(24, &mut rng));
        let psi = linalg::random_state(24, &mut rng);
        let (s, b) = szego(&u, &psi, &KrylovOptions::default()).unwrap();
        let direct = b.matrix_elements(&u);
        let h = hessenberg_matrix(&s).unwrap();
        assert!(linalg::max_abs(&(direct - &h)) < 1e-8);
        assert!(linalg::unitarity_defect(&h) < 1e-10);
    }

    #[test]
    fn factorization_matches_cmv_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u = DenseOperator::new(linalg::haar_unitary(32, &mut rng));
        let psi = linalg::random_state(32, &mut rng);
        let (s, b) = cmv_build(&u, &psi, &KrylovOptions::default()).unwrap();
        let direct = b.matrix_elements(&u);
        let form = cmv_factorization(&s).unwrap();
        let err = linalg::max_abs(&(direct - form.to_dense()));
        assert!(err < 1e-8, "{err}");
        assert!(form.bandwidth_defect() < 1e-8);
        assert!(linalg::unitarity_defect(&form.to_dense()) < 1e-10);
    }

    #[test]
    fn odd_dimension_and_banded_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = DenseOperator::new(linalg::haar_unitary(7, &mut rng));
        let psi = linalg::random_state(7, &mut rng);
        let (s, b) = cmv_build(&u, &psi, &KrylovOptions::default()).unwrap();
        let form = cmv_factorization(&s).unwrap();
        assert!(linalg::max_abs(&(b.matrix_elements(&u) - form.to_dense())) < 1e-8);
        let v = linalg::random_state(7, &mut rng);
        let mut scratch = vec![linalg::ZERO; 7];
        let mut out = vec![linalg::ZERO; 7];
        form.step(&v, &mut scratch, &mut out);
        let mut back = vec![linalg::ZERO; 7];
        form.step_adjoint(&out, &mut scratch, &mut back);
        assert!(linalg::max_abs_diff(&back, &v) < 1e-13);
    }

    #[test]
    fn free_chain_moves_one_site_then_two() {
        let s = VerblunskySequence::free(12, linalg::ONE);
        let form = cmv_factorization(&s).unwrap();
        let orbit = dense_orbit(&form, &linalg::basis_vector(12, 0), 4);
        for (t, v) in orbit.iter().enumerate() {
            let site = if t == 0 { 0 } else { 2 * t - 1 };
            assert!((v[site].norm() - 1.0).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn open_sequence_is_rejected_and_decoupling_reported() {
        let s = VerblunskySequence::new(vec![phase(0.1) * 0.5, phase(0.3) * 0.2]).unwrap();
        assert!(matches!(
            cmv_factorization(&s).unwrap_err(),
            Error::NotClosed { .. }
        ));
        let s = VerblunskySequence::new(vec![
            phase(0.1) * 0.5,
            phase(1.0),
            phase(0.3) * 0.2,
            linalg::ONE,
        ])
        .unwrap();
        let f = cmv_factorization(&s).unwrap();
        assert_eq!(f.decouplings(), &[1]);
        assert!(linalg::unitarity_defect(&f.to_dense()) < 1e-14);
    }
}
