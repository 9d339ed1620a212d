use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    check_disk, closes, normalized_seed, unimodular, BasisKind, KrylovBasis, KrylovOptions,
    VerblunskySequence,
};
use crate::error::Result;
use crate::linalg::{self, C64};
use crate::operator::Unitary;

/// Builds the CMV basis `P_n` directly:
///
/// ```text
/// ρ_{2n} P_{2n+1}   = ρ_{2n−1} U P_{2n−1} − (ᾱ_{2n−1} U + ᾱ_{2n}) P_{2n}
/// ᾱ_{2n+1}          = ⟨P_{2n}|U|P_{2n+1}⟩ / ρ_{2n}
/// ρ_{2n+1} P_{2n+2} = ρ_{2n} U† P_{2n} − (α_{2n} U† + α_{2n+1}) P_{2n+1}
/// ᾱ_{2n+2}          = ⟨P_{2n+2}|U|P_{2n+1}⟩ / ρ_{2n+1}
/// ```
///
/// with `P_0 = ψ/‖ψ‖`, `ᾱ_0 = ⟨P_0|U|P_0⟩`, `α_{−1} = −1`, `ρ_{−1} = 0`.
/// The breakdown test on `ρ` runs before any division by it.
pub fn cmv_build<U: Unitary>(
    u: &U,
    psi: &[C64],
    opts: &KrylovOptions,
) -> Result<(VerblunskySequence, KrylovBasis)> {
    let d = u.dim();
    let cap = opts.dimension_cap(d);
    let reorth = opts.reorthogonalizes(d);
    let tol = opts.breakdown_tolerance(d);
    let store_all = reorth || opts.keep_basis;

    let mut states = States {
        u,
        basis: BTreeMap::new(),
        fwd: BTreeMap::new(),
        adj: BTreeMap::new(),
        store_all,
    };
    states.push(0, normalized_seed(psi, d)?);

    let a0 = states.overlap(0, 0).conj();
    check_disk(0, a0, opts.disk_tol)?;
    let mut alphas = vec![a0];
    let mut rhos: Vec<f64> = Vec::new();

    let alpha_at = |alphas: &[C64], k: isize| -> C64 {
        if k < 0 {
            -linalg::ONE
        } else {
            alphas[k as usize]
        }
    };
    let rho_at = |rhos: &[f64], k: isize| -> f64 {
        if k < 0 {
            0.0
        } else {
            rhos[k as usize]
        }
    };

    let mut k = 0usize;
    loop {
        if k + 1 >= cap {
            let last = alphas[k];
            if k + 1 == d {
                alphas[k] = unimodular(last);
                rhos.push(0.0);
            } else {
                rhos.push(libm::sqrt((1.0 - last.norm_sqr()).max(0.0)));
            }
            break;
        }
        let ki = k as isize;
        let rho_prev = rho_at(&rhos, ki - 1);
        let a_prev = alpha_at(&alphas, ki - 1);
        let a_cur = alphas[k];

        let mut v = vec![linalg::ZERO; d];
        if k % 2 == 0 {
            if k > 0 {
                linalg::axpy(C64::new(rho_prev, 0.0), states.forward(k - 1), &mut v);
            }
            linalg::axpy(-a_prev.conj(), states.forward(k), &mut v);
            linalg::axpy(-a_cur.conj(), states.p(k), &mut v);
        } else {
            linalg::axpy(C64::new(rho_prev, 0.0), states.adjoint(k - 1), &mut v);
            linalg::axpy(-a_prev, states.adjoint(k), &mut v);
            linalg::axpy(-a_cur, states.p(k), &mut v);
        }
        if reorth {
            linalg::project_out(states.basis.values().map(|p| p.as_slice()), &mut v);
        }
        let rho = linalg::norm(&v);
        if rho <= tol || closes(a_cur) {
            alphas[k] = unimodular(a_cur);
            rhos.push(0.0);
            break;
        }
        linalg::scale(C64::new(1.0 / rho, 0.0), &mut v);
        rhos.push(rho.min(1.0));
        states.push(k + 1, v);

        let abar_next = if k % 2 == 0 {
            states.overlap(k, k + 1) / rho
        } else {
            states.overlap(k + 1, k) / rho
        };
        let a_next = abar_next.conj();
        check_disk(k + 1, a_next, opts.disk_tol)?;
        alphas.push(a_next);
        states.prune(k + 1);
        k += 1;
    }

    let vectors = if opts.keep_basis {
        states.basis.into_values().collect()
    } else {
        Vec::new()
    };
    Ok((
        VerblunskySequence::from_parts(alphas, rhos),
        KrylovBasis {
            kind: BasisKind::Cmv,
            vectors,
            companions: Vec::new(),
        },
    ))
}

/// Basis vectors and lazily computed `U P_k`, `U† P_k`.
struct States<'a, U> {
    u: &'a U,
    basis: BTreeMap<usize, Vec<C64>>,
    fwd: BTreeMap<usize, Vec<C64>>,
    adj: BTreeMap<usize, Vec<C64>>,
    store_all: bool,
}

impl<U: Unitary> States<'_, U> {
    fn push(&mut self, k: usize, v: Vec<C64>) {
        self.basis.insert(k, v);
    }

    fn p(&self, k: usize) -> &[C64] {
        &self.basis[&k]
    }

    fn forward(&mut self, k: usize) -> &[C64] {
        if !self.fwd.contains_key(&k) {
            let img = self.u.apply_vec(&self.basis[&k]);
            self.fwd.insert(k, img);
        }
        &self.fwd[&k]
    }

    /// `⟨P_i|U|P_k⟩`
    fn overlap(&mut self, i: usize, k: usize) -> C64 {
        self.forward(k);
        linalg::dot(&self.basis[&i], &self.fwd[&k])
    }

    fn adjoint(&mut self, k: usize) -> &[C64] {
        if !self.adj.contains_key(&k) {
            let img = self.u.apply_adjoint_vec(&self.basis[&k]);
            self.adj.insert(k, img);
        }
        &self.adj[&k]
    }

    /// Keeps only what the next step can touch.
    fn prune(&mut self, newest: usize) {
        let keep_from = newest.saturating_sub(1);
        self.fwd.retain(|&j, _| j >= keep_from);
        self.adj.retain(|&j, _| j >= keep_from);
        if !self.store_all {
            self.basis.retain(|&j, _| j >= keep_from);
        }
    }
}
