//! `T → 0` limit of the unitary recursions for `U = exp(−iTH)`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::determinants::phase_free_distance;
use crate::error::{Error, Result};
use crate::krylov::{cmv_build, lanczos, KrylovOptions, LanczosCoefficients};
use crate::linalg::{self, C64};
use crate::operator::DenseOperator;

/// `(−1)^n [1 + iT A_n − T²/2 (b_{n+1}² + A_n²)]` with `A_n = Σ_{k≤n} a_k`.
///
/// The second-order term carries `+A_n²`; this is what the Taylor expansion
/// of `α_0 = conj⟨ψ|e^{−iTH}|ψ⟩ = 1 + iTa_0 − T²(a_0² + b_1²)/2 + O(T³)`
/// gives, and it holds for every `n`.
pub fn alpha_expansion(coeffs: &LanczosCoefficients, n: usize, t: f64) -> C64 {
    let a_sum: f64 = coeffs.a[..=n].iter().sum();
    let b_next = coeffs.b.get(n + 1).copied().unwrap_or(0.0);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    C64::new(
        1.0 - 0.5 * t * t * (b_next * b_next + a_sum * a_sum),
        t * a_sum,
    ) * sign
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallTRow {
    pub t: f64,
    /// `|α_n(T) − expansion|` for `n ≤ n_max`.
    pub alpha_residual: Vec<f64>,
    /// `ρ_n(T) / (T |b_{n+1}|)`.
    pub rho_ratio: Vec<f64>,
    /// `‖P_n − (−i)^n Ψ_n‖`.
    pub basis_phase_deviation: Vec<f64>,
    /// `min_φ ‖P_n − e^{iφ} Ψ_n‖`.
    pub basis_ray_deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallTReport {
    pub lanczos: LanczosCoefficients,
    pub n_max: usize,
    pub rows: Vec<SmallTRow>,
}

impl SmallTReport {
    /// `log2(res(T_i)/res(T_{i+1}))` per `n` for each consecutive pair of
    /// times (meaningful when the times halve).
    pub fn orders(&self) -> Vec<Vec<f64>> {
        self.rows
            .windows(2)
            .map(|w| {
                w[0].alpha_residual
                    .iter()
                    .zip(&w[1].alpha_residual)
                    .map(|(a, b)| libm::log2(a / b) / libm::log2(w[0].t / w[1].t))
                    .collect()
            })
            .collect()
    }
}

/// Runs the CMV recursion on `exp(−iTH)` for each `T` and compares with the
/// Lanczos data of `H`.
pub fn small_t_check(
    h: &DMatrix<C64>,
    psi: &[C64],
    ts: &[f64],
    n_max: usize,
) -> Result<SmallTReport> {
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("small-T check needs T > 0".into()));
    }
    let opts = KrylovOptions::default().with_max_dim(n_max + 2);
    let (coeffs, lbasis) = lanczos(&DenseOperator::new(h.clone()), psi, &opts)?;
    let n_max = n_max.min(coeffs.krylov_dim().saturating_sub(2));
    let (vals, vecs) = linalg::eigh(h);
    let mut rows = Vec::new();
    for &t in ts {
        let u = linalg::hermitian_function(&vals, &vecs, |e| C64::from_polar(1.0, -t * e));
        let (seq, basis) = cmv_build(&DenseOperator::new(u), psi, &opts)?;
        let mut row = SmallTRow {
            t,
            alpha_residual: Vec::new(),
            rho_ratio: Vec::new(),
            basis_phase_deviation: Vec::new(),
            basis_ray_deviation: Vec::new(),
        };
        for n in 0..=n_max.min(seq.len().saturating_sub(1)) {
            row.alpha_residual
                .push((seq.alphas()[n] - alpha_expansion(&coeffs, n, t)).norm());
            row.rho_ratio
                .push(seq.rhos()[n] / (t * coeffs.b[n + 1].abs()));
            let phase = C64::new(0.0, -1.0).powu(n as u32);
            let mut target = lbasis.vectors[n].clone();
            linalg::scale(phase, &mut target);
            row.basis_phase_deviation.push(libm::sqrt(
                linalg::norm_sqr(&basis.vectors[n]) + 1.0
                    - 2.0 * linalg::dot(&target, &basis.vectors[n]).re,
            ));
            row.basis_ray_deviation
                .push(phase_free_distance(&basis.vectors[n], &lbasis.vectors[n]));
        }
        rows.push(row);
    }
    Ok(SmallTReport {
        lanczos: coeffs,
        n_max,
        rows,
    })
}
