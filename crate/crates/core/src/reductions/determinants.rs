//! Determinant (moment) forms of the Szegő and Lanczos bases, used as
//! oracles for the recursions.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::krylov::normalized_seed;
use crate::linalg::{self, C64};
use crate::operator::{Hermitian, Unitary};

/// Below this `Δ_n/Δ_{n−1}` (squared norm of the monic polynomial) the
/// moment matrix is treated as singular.
const SINGULAR_RATIO: f64 = 1e-20;

/// `c_n = ⟨ψ|U^n|ψ⟩` for `|n| ≤ order`, with `c_{−n} = conj(c_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMoments {
    c: Vec<C64>,
}

impl UnitaryMoments {
    pub fn compute<U: Unitary>(u: &U, psi: &[C64], order: usize) -> Result<Self> {
        let psi = normalized_seed(psi, u.dim())?;
        let mut c = Vec::with_capacity(order + 1);
        let mut v = psi.clone();
        let mut next = vec![linalg::ZERO; v.len()];
        for n in 0..=order {
            if n > 0 {
                u.apply(&v, &mut next);
                core::mem::swap(&mut v, &mut next);
            }
            c.push(linalg::dot(&psi, &v));
        }
        Ok(Self { c })
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn get(&self, n: isize) -> C64 {
        if n >= 0 {
            self.c[n as usize]
        } else {
            self.c[(-n) as usize].conj()
        }
    }

    /// Toeplitz matrix `[c_{j−r}]_{r,j ≤ n}`.
    pub fn toeplitz(&self, n: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n + 1, n + 1, |r, j| self.get(j as isize - r as isize))
    }

    /// `Δ_n`, with `Δ_{−1} = 1`.
    pub fn toeplitz_determinant(&self, n: isize) -> f64 {
        if n < 0 {
            1.0
        } else {
            self.toeplitz(n as usize).determinant().re
        }
    }
}

/// `μ_n = ⟨ψ|H^n|ψ⟩` for `n ≤ order`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMoments {
    mu: Vec<f64>,
}

impl HamiltonianMoments {
    pub fn compute<H: Hermitian>(h: &H, psi: &[C64], order: usize) -> Result<Self> {
        let psi = normalized_seed(psi, h.dim())?;
        // powers up to ⌈order/2⌉, moments as ⟨H^a ψ|H^b ψ⟩
        let half = order.div_ceil(2);
        let mut powers = vec![psi];
        for k in 0..half {
            let next = h.apply_vec(&powers[k]);
            powers.push(next);
        }
        let mu = (0..=order)
            .map(|n| {
                let a = n / 2;
                linalg::dot(&powers[a], &powers[n - a]).re
            })
            .collect();
        Ok(Self { mu })
    }

    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.mu[n]
    }

    /// Hankel matrix `[μ_{r+j}]_{r,j ≤ n}`.
    pub fn hankel(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n + 1, n + 1, |r, j| self.mu[r + j])
    }

    /// `D_n`, with `D_{−1} = 1`.
    pub fn hankel_determinant(&self, n: isize) -> f64 {
        if n < 0 {
            1.0
        } else {
            self.hankel(n as usize).determinant()
        }
    }
}

/// `det` of the moment rows stacked on an operator-valued last row
/// `(v_0, …, v_n)`, expanded along that row by cofactors.
fn cofactor_expand(rows: &DMatrix<C64>, last: &[Vec<C64>]) -> Vec<C64> {
    let n = rows.nrows();
    let dim = last[0].len();
    let mut out = vec![linalg::ZERO; dim];
    for (j, v) in last.iter().enumerate() {
        let minor = rows.clone().remove_column(j);
        let sign = if (n + j) % 2 == 0 { 1.0 } else { -1.0 };
        let cof = if n == 0 {
            linalg::ONE
        } else {
            minor.determinant() * sign
        };
        linalg::axpy(cof, v, &mut out);
    }
    out
}

fn check_ratio(order: usize, num: f64, den: f64) -> Result<()> {
    if !(num.is_finite() && den > 0.0 && num / den > SINGULAR_RATIO) {
        return Err(Error::SingularMoments { order });
    }
    Ok(())
}

/// `Φ_n` from the Toeplitz determinant form, normalized by
/// `1/√(Δ_n Δ_{n−1})`.
pub fn toeplitz_determinant_basis<U: Unitary>(u: &U, psi: &[C64], n: usize) -> Result<Vec<C64>> {
    let moments = UnitaryMoments::compute(u, psi, n)?;
    let psi = normalized_seed(psi, u.dim())?;
    let mut powers = vec![psi];
    for k in 0..n {
        let next = u.apply_vec(&powers[k]);
        powers.push(next);
    }
    let mut d_prev = 1.0;
    for k in 0..=n as isize {
        let d = moments.toeplitz_determinant(k);
        check_ratio(k as usize, d, d_prev)?;
        if k < n as isize {
            d_prev = d;
        }
    }
    let dn = moments.toeplitz_determinant(n as isize);
    let rows = DMatrix::from_fn(n, n + 1, |r, j| moments.get(j as isize - r as isize));
    let mut v = cofactor_expand(&rows, &powers);
    linalg::scale(C64::new(1.0 / libm::sqrt(dn * d_prev), 0.0), &mut v);
    Ok(v)
}

/// `Ψ_n` from the Hankel determinant form, normalized by `1/√(D_n D_{n−1})`.
pub fn hankel_determinant_basis<H: Hermitian>(h: &H, psi: &[C64], n: usize) -> Result<Vec<C64>> {
    let moments = HamiltonianMoments::compute(h, psi, 2 * n)?;
    let psi = normalized_seed(psi, h.dim())?;
    let mut powers = vec![psi];
    for k in 0..n {
        let next = h.apply_vec(&powers[k]);
        powers.push(next);
    }
    let mut d_prev = 1.0;
    for k in 0..=n as isize {
        let d = moments.hankel_determinant(k);
        check_ratio(k as usize, d, d_prev)?;
        if k < n as isize {
            d_prev = d;
        }
    }
    let dn = moments.hankel_determinant(n as isize);
    let rows = DMatrix::from_fn(n, n + 1, |r, j| C64::new(moments.get(r + j), 0.0));
    let mut v = cofactor_expand(&rows, &powers);
    linalg::scale(C64::new(1.0 / libm::sqrt(dn * d_prev), 0.0), &mut v);
    Ok(v)
}

/// `min_φ ‖a − e^{iφ} b‖`: zero iff the vectors agree up to a phase.
pub fn phase_free_distance(a: &[C64], b: &[C64]) -> f64 {
    let overlap = linalg::dot(b, a);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        linalg::ONE
    };
    let d2: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum();
    libm::sqrt(d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::{lanczos, szego, KrylovOptions};
    use crate::operator::DenseOperator;
    use rand::SeedableRng;

    #[test]
    fn zeroth_element_is_the_seed() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let u = DenseOperator::new(linalg::haar_unitary(4, &mut rng));
        let psi = linalg::random_state(4, &mut rng);
        let phi0 = toeplitz_determinant_basis(&u, &psi, 0).unwrap();
        assert!(linalg::max_abs_diff(&phi0, &psi) < 1e-14);
    }

    #[test]
    fn toeplitz_matches_szego() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for d in [4, 12, 32] {
            let u = DenseOperator::new(linalg::haar_unitary(d, &mut rng));
            let psi = linalg::random_state(d, &mut rng);
            let (_, basis) = szego(&u, &psi, &KrylovOptions::default()).unwrap();
            for n in 0..=(d - 1).min(8) {
                let phi = toeplitz_determinant_basis(&u, &psi, n).unwrap();
                assert!((linalg::norm(&phi) - 1.0).abs() < 1e-8, "d={d} n={n}");
                assert!(
                    phase_free_distance(&phi, &basis.vectors[n]) < 1e-8,
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn hankel_matches_lanczos() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in [6, 20] {
            let h = DenseOperator::new(linalg::random_hermitian(d, &mut rng));
            let psi = linalg::random_state(d, &mut rng);
            let (_, basis) = lanczos(&h, &psi, &KrylovOptions::default()).unwrap();
            for n in 0..=5 {
                let psi_n = hankel_determinant_basis(&h, &psi, n).unwrap();
                assert!(
                    phase_free_distance(&psi_n, &basis.vectors[n]) < 1e-8,
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn breakdown_is_reported() {
        let u = DenseOperator::new(linalg::identity(3));
        let psi = linalg::basis_vector(3, 0);
        assert!(matches!(
            toeplitz_determinant_basis(&u, &psi, 1),
            Err(Error::SingularMoments { order: 1 })
        ));
    }

    #[test]
    fn toeplitz_reduces_to_hankel() {
        // Δ_n ≈ T^{n²+n} D_n for U = exp(−iTH)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let h = linalg::random_hermitian(10, &mut rng);
        let psi = linalg::random_state(10, &mut rng);
        let hm = HamiltonianMoments::compute(&DenseOperator::new(h.clone()), &psi, 8).unwrap();
        for n in 1..=3isize {
            let ratio = |t: f64| {
                let u = DenseOperator::new(linalg::expm_hermitian(&h, t));
                let um = UnitaryMoments::compute(&u, &psi, 4).unwrap();
                um.toeplitz_determinant(n)
                    / (libm::pow(t, (n * n + n) as f64) * hm.hankel_determinant(n))
            };
            let (r1, r2) = (ratio(2e-2), ratio(1e-2));
            assert!((r2 - 1.0).abs() < (r1 - 1.0).abs() || (r2 - 1.0).abs() < 1e-6);
            assert!((r2 - 1.0).abs() < 0.05, "n={n} ratio={r2}");
        }
    }
}
