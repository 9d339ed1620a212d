use alloc::vec;
use alloc::vec::Vec;

use super::{
    check_disk, closes, normalized_seed, unimodular, BasisKind, KrylovBasis, KrylovOptions,
    VerblunskySequence,
};
use crate::error::Result;
use crate::linalg::{self, C64};
use crate::operator::Unitary;

/// Szegő recursion
///
/// ```text
/// ᾱ_n = ⟨Φ̃_n|U|Φ_n⟩
/// ρ_n Φ_{n+1} = UΦ_n − ᾱ_n Φ̃_n
/// ρ_n Φ̃_{n+1} = Φ̃_n − α_n UΦ_n
/// ```
///
/// seeded with `Φ_0 = Φ̃_0 = ψ/‖ψ‖`. `Φ_{n+1}` is reorthogonalized against
/// `Φ_0..Φ_n` and `Φ̃_{n+1}` against `UΦ_0..UΦ_n`, the subspace it is
/// orthogonal to in exact arithmetic. `ρ_n` is taken as the residual norm; when
/// it drops below the breakdown tolerance, or `|α_n|` is within
/// [`UNIMODULAR_TOL`](super::UNIMODULAR_TOL) of one, the last coefficient is
/// put on the unit circle and the run ends.
pub fn szego<U: Unitary>(
    u: &U,
    psi: &[C64],
    opts: &KrylovOptions,
) -> Result<(VerblunskySequence, KrylovBasis)> {
    let d = u.dim();
    let phi0 = normalized_seed(psi, d)?;
    let cap = opts.dimension_cap(d);
    let reorth = opts.reorthogonalizes(d);
    let tol = opts.breakdown_tolerance(d);

    let mut alphas = Vec::new();
    let mut rhos = Vec::new();
    let mut phis: Vec<Vec<C64>> = Vec::new();
    let mut companions: Vec<Vec<C64>> = Vec::new();
    let mut images: Vec<Vec<C64>> = Vec::new();

    let mut phi = phi0.clone();
    let mut phit = phi0;
    let mut uphi = vec![linalg::ZERO; d];

    loop {
        u.apply(&phi, &mut uphi);
        let abar = linalg::dot(&phit, &uphi);
        let alpha = abar.conj();
        let n = alphas.len();
        check_disk(n, alpha, opts.disk_tol)?;

        let store = reorth || opts.keep_basis;
        if store {
            phis.push(phi.clone());
            companions.push(phit.clone());
        }
        if reorth {
            images.push(uphi.clone());
        }

        if n + 1 >= cap {
            // cap reached: closed only if the space is exhausted
            if n + 1 == d {
                alphas.push(unimodular(alpha));
                rhos.push(0.0);
            } else {
                alphas.push(alpha);
                rhos.push(libm::sqrt((1.0 - alpha.norm_sqr()).max(0.0)));
            }
            break;
        }

        let mut next = uphi.clone();
        linalg::axpy(-abar, &phit, &mut next);
        if reorth {
            linalg::project_out(phis.iter().map(|v| v.as_slice()), &mut next);
        }
        let rho = linalg::norm(&next);
        if rho <= tol || closes(alpha) {
            alphas.push(unimodular(alpha));
            rhos.push(0.0);
            break;
        }
        let mut next_t = phit.clone();
        linalg::axpy(-alpha, &uphi, &mut next_t);
        if reorth {
            linalg::project_out(images.iter().map(|v| v.as_slice()), &mut next_t);
        }
        linalg::scale(C64::new(1.0 / rho, 0.0), &mut next);
        linalg::normalize(&mut next_t);

        alphas.push(alpha);
        rhos.push(rho.min(1.0));
        phi = next;
        phit = next_t;
    }

    if !opts.keep_basis {
        phis.clear();
        companions.clear();
    }
    Ok((
        VerblunskySequence::from_parts(alphas, rhos),
        KrylovBasis {
            kind: BasisKind::Szego,
            vectors: phis,
            companions,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::operator::DenseOperator;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[C64]) -> DenseOperator {
        let n = values.len();
        DenseOperator::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                values[i]
            } else {
                linalg::ZERO
            }
        }))
    }

    #[test]
    fn identity_gives_single_unimodular_coefficient() {
        let u = diag(&[linalg::ONE; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = linalg::random_state(4, &mut rng);
        let (s, b) = szego(&u, &psi, &KrylovOptions::default()).unwrap();
        assert_eq!(s.krylov_dim(), 1);
        assert!((s.alphas()[0] - linalg::ONE).norm() < 1e-14);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn two_level() {
        let u = diag(&[linalg::ONE, -linalg::ONE]);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = [C64::new(h, 0.0), C64::new(h, 0.0)];
        let (s, _) = szego(&u, &psi, &KrylovOptions::default()).unwrap();
        assert_eq!(s.krylov_dim(), 2);
        assert!(s.alphas()[0].norm() < 1e-15);
        assert!((s.rhos()[0] - 1.0).abs() < 1e-15);
        assert!((s.alphas()[1] - linalg::ONE).norm() < 1e-14);
    }

    #[test]
    fn clock_matrix_has_vanishing_interior_coefficients() {
        // brute force: ψ, Uψ, U²ψ, U³ψ are mutually orthogonal for the clock
        // matrix and uniform ψ, so the first three coefficients vanish.
        let u = diag(&[linalg::ONE, linalg::I, -linalg::ONE, -linalg::I]);
        let psi = [C64::new(0.5, 0.0); 4];
        let mut powers = vec![psi.to_vec()];
        for k in 1..4 {
            powers.push(u.apply_vec(&powers[k - 1]));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(linalg::dot(&powers[i], &powers[j]).norm() < 1e-15);
            }
        }
        let (s, _) = szego(&u, &psi, &KrylovOptions::default()).unwrap();
        assert_eq!(s.krylov_dim(), 4);
        for a in &s.alphas()[..3] {
            assert!(a.norm() < 1e-14);
        }
        assert!((s.alphas()[3].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn companion_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = DenseOperator::new(linalg::haar_unitary(20, &mut rng));
        let psi = linalg::random_state(20, &mut rng);
        let (s, b) = szego(&u, &psi, &KrylovOptions::default()).unwrap();
        assert_eq!(s.krylov_dim(), 20);
        let dd = b.len();
        for n in 0..dd {
            let ut = u.apply_vec(&b.companions[n]);
            assert!((linalg::norm(&b.companions[n]) - 1.0).abs() < 1e-10);
            for m in n + 1..dd {
                assert!(linalg::dot(&b.vectors[m], &b.companions[n]).norm() < 1e-8);
                assert!(linalg::dot(&b.companions[m], &u.apply_vec(&b.vectors[n])).norm() < 1e-8);
                assert!(linalg::dot(&b.companions[m], &ut).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn outside_disk_is_reported() {
        // a non-unitary "U" produces |α_0| > 1
        let u = diag(&[C64::new(2.0, 0.0), C64::new(2.0, 0.0)]);
        let psi = [linalg::ONE, linalg::ZERO];
        assert!(matches!(
            szego(&u, &psi, &KrylovOptions::default()).unwrap_err(),
            Error::OutsideUnitDisk { index: 0, .. }
        ));
    }
}
