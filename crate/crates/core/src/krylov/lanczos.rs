use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{normalized_seed, BasisKind, KrylovBasis, KrylovOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::operator::Hermitian;

/// Tridiagonal coefficients: `a_n = ⟨Ψ_n|H|Ψ_n⟩`, `b_n = ⟨Ψ_n|H|Ψ_{n−1}⟩`
/// with `b_0 = 0`. Both vectors have length `D`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LanczosCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl LanczosCoefficients {
    pub fn krylov_dim(&self) -> usize {
        self.a.len()
    }

    /// The `D×D` tridiagonal matrix `⟨Ψ_m|H|Ψ_n⟩`.
    pub fn tridiagonal(&self) -> DMatrix<f64> {
        let d = self.a.len();
        DMatrix::from_fn(d, d, |m, n| {
            if m == n {
                self.a[m]
            } else if m == n + 1 {
                self.b[m]
            } else if n == m + 1 {
                self.b[n]
            } else {
                0.0
            }
        })
    }
}

/// Lanczos recursion `b_{n+1}|Ψ_{n+1}⟩ = H|Ψ_n⟩ − a_n|Ψ_n⟩ − b_n|Ψ_{n−1}⟩`.
///
/// The breakdown threshold is relative to the largest `‖HΨ_n‖` seen so far.
pub fn lanczos<H: Hermitian>(
    h: &H,
    psi: &[C64],
    opts: &KrylovOptions,
) -> Result<(LanczosCoefficients, KrylovBasis)> {
    run(h, None::<&H>, psi, opts)
}

/// Lanczos in the inner product `(u|v) = ⟨u|W|v⟩` for a positive-definite
/// `W` commuting with `H`.
pub fn lanczos_weighted<H: Hermitian, W: Hermitian>(
    h: &H,
    weight: &W,
    psi: &[C64],
    opts: &KrylovOptions,
) -> Result<(LanczosCoefficients, KrylovBasis)> {
    run(h, Some(weight), psi, opts)
}

fn run<H: Hermitian, W: Hermitian>(
    h: &H,
    weight: Option<&W>,
    psi: &[C64],
    opts: &KrylovOptions,
) -> Result<(LanczosCoefficients, KrylovBasis)> {
    let d = h.dim();
    let mut q = normalized_seed(psi, d)?;
    if opts.check_hermitian {
        let scale = linalg::norm(&h.apply_vec(&q)).max(1.0);
        let deviation = h.symmetry_spot_check(2, 0x5eed);
        if deviation > 1e-8 * scale {
            return Err(Error::NotHermitian { deviation });
        }
    }
    let apply_w = |v: &[C64]| -> Vec<C64> {
        match weight {
            Some(w) => w.apply_vec(v),
            None => v.to_vec(),
        }
    };
    // rescale into the weighted norm
    let mut wq = apply_w(&q);
    let wn = linalg::dot(&q, &wq).re;
    if !(wn > 0.0) {
        return Err(Error::ZeroSeed);
    }
    let s = 1.0 / libm::sqrt(wn);
    linalg::scale(C64::new(s, 0.0), &mut q);
    linalg::scale(C64::new(s, 0.0), &mut wq);

    let cap = opts.dimension_cap(d);
    let reorth = opts.reorthogonalizes(d);
    let tol = opts.breakdown_tolerance(d);

    let mut a = Vec::new();
    let mut b = vec![0.0];
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut wbasis: Vec<Vec<C64>> = Vec::new();
    let mut prev: Option<Vec<C64>> = None;
    let mut scale: f64 = 0.0;
    let mut hq = vec![linalg::ZERO; d];

    loop {
        h.apply(&q, &mut hq);
        scale = scale.max(linalg::norm(&hq));
        let an = linalg::dot(&wq, &hq).re;
        a.push(an);
        let mut r = hq.clone();
        linalg::axpy(C64::new(-an, 0.0), &q, &mut r);
        if let Some(p) = &prev {
            linalg::axpy(C64::new(-b[b.len() - 1], 0.0), p, &mut r);
        }
        let n = a.len();
        let keep = reorth || opts.keep_basis;
        if keep {
            basis.push(q.clone());
            wbasis.push(wq.clone());
        }
        if reorth {
            for _ in 0..2 {
                for (v, wv) in basis.iter().zip(&wbasis) {
                    let c = linalg::dot(wv, &r);
                    linalg::axpy(-c, v, &mut r);
                }
            }
        }
        if n >= cap {
            break;
        }
        let wr = apply_w(&r);
        let bn = libm::sqrt(linalg::dot(&r, &wr).re.max(0.0));
        if bn <= tol * scale.max(1e-300) {
            break;
        }
        b.push(bn);
        let inv = C64::new(1.0 / bn, 0.0);
        let mut next = r;
        linalg::scale(inv, &mut next);
        let mut wnext = wr;
        linalg::scale(inv, &mut wnext);
        prev = Some(core::mem::replace(&mut q, next));
        wq = wnext;
    }
    b.truncate(a.len());
    if !opts.keep_basis {
        basis.clear();
    }
    Ok((
        LanczosCoefficients { a, b },
        KrylovBasis {
            kind: BasisKind::Lanczos,
            vectors: basis,
            companions: Vec::new(),
        },
    ))
}
