//! Real Verblunsky coefficients from a Lanczos run on
//! `𝓗 = i(U^{1/2} − U^{−1/2})` in the inner product `⟨A|(1 − 𝓗/2)|B⟩`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::dynamics::cmv_observables;
use crate::error::{Error, Result};
use crate::krylov::{
    cmv_build, cmv_factorization, lanczos_weighted, KrylovOptions, LanczosCoefficients,
    VerblunskySequence, UNIMODULAR_TOL,
};
use crate::linalg::{self, C64};
use crate::operator::DenseOperator;

/// Eigenphases closer than this to `±π` make the principal square root
/// ambiguous.
pub const BRANCH_TOL: f64 = 1e-9;

/// `𝓗 = i(U^{1/2} − U^{−1/2})` with the principal branch (eigenphases in
/// `(−π, π]`); its eigenvalues are `−2 sin(φ/2)`.
pub fn half_step_hamiltonian(u: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (vals, vecs) = linalg::unitary_eigen(u);
    let mut phases = Vec::with_capacity(vals.len());
    for z in &vals {
        let phi = linalg::arg(*z);
        if core::f64::consts::PI - phi.abs() < BRANCH_TOL {
            return Err(Error::BranchAmbiguity { phase: phi });
        }
        phases.push(-2.0 * libm::sin(0.5 * phi));
    }
    Ok(linalg::hermitian_function(&phases, &vecs, |x| {
        C64::new(x, 0.0)
    }))
}

/// `1 − 𝓗/2`, after checking it is positive definite.
pub fn route_weight(hcal: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let w = linalg::identity(hcal.nrows()) - hcal * C64::new(0.5, 0.0);
    let (vals, _) = linalg::eigh(&w);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::IndefiniteWeight {
            min_eigenvalue: min,
        });
    }
    Ok(w)
}

/// `⟨u|(1 − 𝓗/2)|v⟩`.
pub fn modified_inner_product(hcal: &DMatrix<C64>, u: &[C64], v: &[C64]) -> Result<C64> {
    let w = route_weight(hcal)?;
    let mut wv = alloc::vec![linalg::ZERO; v.len()];
    linalg::matvec(&w, v, &mut wv);
    Ok(linalg::dot(u, &wv))
}

/// `α_n = (−1)^n (Σ_{k≤n} a_k + 1)`.
pub fn alphas_from_lanczos(coeffs: &LanczosCoefficients) -> Vec<C64> {
    let mut sum = 1.0;
    coeffs
        .a
        .iter()
        .enumerate()
        .map(|(n, a)| {
            sum += a;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * sum, 0.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealAlphaRoute {
    pub lanczos: LanczosCoefficients,
    /// Coefficients reconstructed from the Lanczos data.
    pub sequence: VerblunskySequence,
    /// Coefficients from the direct CMV recursion.
    pub direct: VerblunskySequence,
    /// `max_n |α_n(route) − α_n(direct)|`.
    pub route_deviation: f64,
    /// `max_n` over `|a_n − (−1)^n(α_n + α_{n−1})|` and `|b_n − ρ_{n−1}|`,
    /// with the direct `α`.
    pub relation_deviation: f64,
}

/// Runs the real-coefficient route and compares it with the direct CMV
/// recursion on `(U, seed)`.
pub fn real_alpha_lanczos_route(
    u: &DMatrix<C64>,
    seed: &[C64],
    opts: &KrylovOptions,
    real_tol: f64,
) -> Result<RealAlphaRoute> {
    let (direct, _) = cmv_build(
        &DenseOperator::new(u.clone()),
        seed,
        &opts.clone().without_basis(),
    )?;
    if let Some((index, a)) = direct
        .alphas()
        .iter()
        .enumerate()
        .find(|(_, a)| a.im.abs() > real_tol)
    {
        return Err(Error::ComplexCoefficient { index, imag: a.im });
    }
    let hcal = half_step_hamiltonian(u)?;
    let w = route_weight(&hcal)?;
    let (coeffs, _) = lanczos_weighted(
        &DenseOperator::new(hcal),
        &DenseOperator::new(w),
        seed,
        &opts.clone().without_basis(),
    )?;
    let mut alphas = alphas_from_lanczos(&coeffs);
    // the chain ends at the first unimodular coefficient; Lanczos may run on
    // past it on rounding noise
    if let Some(end) = alphas.iter().position(|a| 1.0 - a.norm() <= UNIMODULAR_TOL) {
        alphas.truncate(end + 1);
        alphas[end] = C64::new(if alphas[end].re >= 0.0 { 1.0 } else { -1.0 }, 0.0);
    }
    let sequence = VerblunskySequence::new(alphas)?;
    if sequence.len() != direct.len() {
        return Err(Error::InvalidParameter(format!(
            "route produced {} coefficients, direct recursion {}",
            sequence.len(),
            direct.len()
        )));
    }
    let route_deviation = sequence
        .alphas()
        .iter()
        .zip(direct.alphas())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let mut relation_deviation: f64 = 0.0;
    for n in 0..coeffs.krylov_dim().min(direct.len()) {
        let ni = n as isize;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let a_pred = sign * (direct.alpha(ni) + direct.alpha(ni - 1)).re;
        relation_deviation = relation_deviation.max((coeffs.a[n] - a_pred).abs());
        if n > 0 {
            relation_deviation = relation_deviation.max((coeffs.b[n] - direct.rho(ni - 1)).abs());
        }
    }
    Ok(RealAlphaRoute {
        lanczos: coeffs,
        sequence,
        direct,
        route_deviation,
        relation_deviation,
    })
}

/// Late-time averages of `K` and `e^S` in the CMV bases of `U` and `U²`
/// (the latter run for half as many steps), as ratios `U²/U`.
pub fn doubled_time_ratios(u: &DMatrix<C64>, seed: &[C64], steps: usize) -> Result<(f64, f64)> {
    let opts = KrylovOptions::default().without_basis();
    let run = |m: &DMatrix<C64>, t: usize| -> Result<(f64, f64)> {
        let (seq, _) = cmv_build(&DenseOperator::new(m.clone()), seed, &opts)?;
        let form = cmv_factorization(&seq)?;
        let mut phi0 = alloc::vec![linalg::ZERO; form.dim()];
        phi0[0] = linalg::ONE;
        let series = cmv_observables(&form, &phi0, t, 1)?;
        let (k, s) = series.late_average();
        Ok((k, s))
    };
    let (k1, s1) = run(u, steps)?;
    let (k2, s2) = run(&(u * u), steps / 2)?;
    Ok((k2 / k1, s2 / s1))
}
