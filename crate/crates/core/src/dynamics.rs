//! Wave-function propagation on Krylov chains and spreading observables.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::krylov::{CmvForm, LanczosCoefficients, VerblunskySequence};
use crate::linalg::{self, C64};

/// `K = Σ n|φ_n|²` and `S = −Σ |φ_n|² ln|φ_n|²` (with `0 ln 0 = 0`).
pub fn complexity_entropy(phi: &[C64]) -> (f64, f64) {
    let mut k = 0.0;
    let mut s = 0.0;
    for (n, a) in phi.iter().enumerate() {
        let p = a.norm_sqr();
        k += n as f64 * p;
        if p > 0.0 {
            s -= p * libm::log(p);
        }
    }
    (k, s)
}

/// Per-step `K(t)`, `S(t)` and `e^{S(t)}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<usize>,
    pub k: Vec<f64>,
    pub s: Vec<f64>,
    pub exp_s: Vec<f64>,
}

impl ObservableSeries {
    pub fn push(&mut self, t: usize, phi: &[C64]) {
        let (k, s) = complexity_entropy(phi);
        self.times.push(t);
        self.k.push(k);
        self.s.push(s);
        self.exp_s.push(libm::exp(s));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Means of `(K, e^S)` over entries `from..`.
    pub fn average_from(&self, from: usize) -> (f64, f64) {
        let n = self.len().saturating_sub(from);
        if n == 0 {
            return (0.0, 0.0);
        }
        let k = self.k[from..].iter().sum::<f64>() / n as f64;
        let e = self.exp_s[from..].iter().sum::<f64>() / n as f64;
        (k, e)
    }

    /// Means of `(K, e^S)` over the second half of the series.
    pub fn late_average(&self) -> (f64, f64) {
        self.average_from(self.len() / 2)
    }
}

pub fn observables(series: &[Vec<C64>]) -> ObservableSeries {
    let mut out = ObservableSeries::default();
    for (t, phi) in series.iter().enumerate() {
        out.push(t, phi);
    }
    out
}

/// Streams `φ(t) = (M L)^t φ(0)` for `t = 0..=steps` to `visit`.
pub fn propagate_cmv_with<F>(form: &CmvForm, phi0: &[C64], steps: usize, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &[C64]),
{
    let d = form.dim();
    if phi0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: phi0.len(),
        });
    }
    let mut cur = phi0.to_vec();
    let mut scratch = vec![linalg::ZERO; d];
    let mut next = vec![linalg::ZERO; d];
    visit(0, &cur);
    for t in 1..=steps {
        form.step(&cur, &mut scratch, &mut next);
        core::mem::swap(&mut cur, &mut next);
        visit(t, &cur);
    }
    Ok(())
}

/// `φ(t)` for `t = 0..=steps` under the banded CMV unitary.
pub fn propagate_cmv(form: &CmvForm, phi0: &[C64], steps: usize) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(steps + 1);
    propagate_cmv_with(form, phi0, steps, |_, phi| out.push(phi.to_vec()))?;
    Ok(out)
}

/// Observables of `φ(t)` sampled every `stride` steps, without storing the
/// trajectory.
pub fn cmv_observables(
    form: &CmvForm,
    phi0: &[C64],
    steps: usize,
    stride: usize,
) -> Result<ObservableSeries> {
    let stride = stride.max(1);
    let mut series = ObservableSeries::default();
    propagate_cmv_with(form, phi0, steps, |t, phi| {
        if t % stride == 0 {
            series.push(t, phi);
        }
    })?;
    Ok(series)
}

fn lambda(n: isize) -> f64 {
    if n.rem_euclid(2) == 1 {
        1.0
    } else {
        0.0
    }
}

/// Second-order recurrence on the CMV chain,
///
/// ```text
/// ∂_t²φ_n = (−α_n ᾱ_{n−1} − ᾱ_n α_{n−1} − 2) φ_n
///         + 2(λ_{n+1} ∂_n ᾱ_{n−1} + λ_n ∂_n α_{n−1}) ρ_{n−1} φ_{n−1}
///         + 2(λ_{n+1} ∂_n ᾱ_n + λ_n ∂_n α_n) ρ_n φ_{n+1}
///         + ρ_{n−1} ρ_{n−2} φ_{n−2} + ρ_n ρ_{n+1} φ_{n+2}
/// ```
///
/// with `∂_n x_m = (x_{m+1} − x_{m−1})/2`, `λ_n = [1 − (−1)^n]/2`,
/// `φ(0) = δ_0` and `φ(1) = ᾱ_0 δ_0 + ρ_0 δ_1`. Coefficients outside
/// `0..D` follow [`VerblunskySequence::alpha`] and
/// [`VerblunskySequence::rho`].
pub fn propagate_tight_binding(seq: &VerblunskySequence, steps: usize) -> Vec<Vec<C64>> {
    let d = seq.len();
    let a = |n: isize| seq.alpha(n);
    let r = |n: isize| C64::new(seq.rho(n), 0.0);
    let diff = |n: isize| (a(n + 1) - a(n - 1)) * 0.5;

    // row n: (offset, coefficient)
    let rows: Vec<[(isize, C64); 5]> = (0..d as isize)
        .map(|n| {
            let diag = -a(n) * a(n - 1).conj() - a(n).conj() * a(n - 1) - 2.0;
            let left =
                (diff(n - 1).conj() * lambda(n + 1) + diff(n - 1) * lambda(n)) * 2.0 * r(n - 1);
            let right = (diff(n).conj() * lambda(n + 1) + diff(n) * lambda(n)) * 2.0 * r(n);
            [
                (-2, r(n - 1) * r(n - 2)),
                (-1, left),
                (0, diag),
                (1, right),
                (2, r(n) * r(n + 1)),
            ]
        })
        .collect();

    let mut out = Vec::with_capacity(steps + 1);
    let first = linalg::basis_vector(d, 0);
    out.push(first.clone());
    if steps == 0 {
        return out;
    }
    let mut second = vec![linalg::ZERO; d];
    second[0] = a(0).conj();
    if d > 1 {
        second[1] = r(0);
    }
    out.push(second);
    for t in 1..steps {
        let (prev, cur) = (&out[t - 1], &out[t]);
        let mut next = vec![linalg::ZERO; d];
        for (n, row) in rows.iter().enumerate() {
            let mut acc = 2.0 * cur[n] - prev[n];
            for &(off, c) in row {
                let m = n as isize + off;
                if m >= 0 && (m as usize) < d {
                    acc += c * cur[m as usize];
                }
            }
            next[n] = acc;
        }
        out.push(next);
    }
    out
}

/// Maximum `|φ^{tb}_n(t) − φ^{cmv}_n(t)|` over `t ≤ steps`.
pub fn tight_binding_deviation(form: &CmvForm, steps: usize) -> Result<f64> {
    let tb = propagate_tight_binding(form.sequence(), steps);
    let exact = propagate_cmv(form, &linalg::basis_vector(form.dim(), 0), steps)?;
    Ok(tb
        .iter()
        .zip(&exact)
        .map(|(x, y)| linalg::max_abs_diff(x, y))
        .fold(0.0, f64::max))
}

/// Largest `|∂_t²φ_n − 4∂_n∂_nφ_n|` along a trajectory, where
/// `4∂_n∂_nφ_n = φ_{n+2} − 2φ_n + φ_{n−2}`. Sites within `margin` of either
/// chain end are skipped.
pub fn klein_gordon_residual(series: &[Vec<C64>], margin: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for t in 1..series.len().saturating_sub(1) {
        let (p, c, f) = (&series[t - 1], &series[t], &series[t + 1]);
        let d = c.len();
        let lo = margin.max(2);
        let hi = d.saturating_sub(margin.max(2));
        for n in lo..hi {
            let lhs = f[n] + p[n] - 2.0 * c[n];
            let rhs = c[n + 2] - 2.0 * c[n] + c[n - 2];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Krylov wave function `φ_n(t) = i^{−n}⟨Ψ_n|e^{iHt}|Ψ_0⟩` at `t = j·dt`,
/// `j = 0..=steps`, which solves
/// `∂_tφ_n = i a_n φ_n − b_{n+1} φ_{n+1} + b_n φ_{n−1}`. Evaluated exactly
/// from the eigendecomposition of the tridiagonal matrix.
pub fn propagate_lanczos(coeffs: &LanczosCoefficients, dt: f64, steps: usize) -> Vec<Vec<C64>> {
    let d = coeffs.krylov_dim();
    let eig = SymmetricEigen::new(coeffs.tridiagonal());
    let v: &DMatrix<f64> = &eig.eigenvectors;
    let phases: Vec<C64> = (0..d)
        .map(|n| match n % 4 {
            0 => linalg::ONE,
            1 => -linalg::I,
            2 => -linalg::ONE,
            _ => linalg::I,
        })
        .collect();
    (0..=steps)
        .map(|j| {
            let t = j as f64 * dt;
            let w: Vec<C64> = (0..d)
                .map(|k| C64::from_polar(v[(0, k)], eig.eigenvalues[k] * t))
                .collect();
            (0..d)
                .map(|n| {
                    let amp: C64 = (0..d).map(|k| w[k] * v[(n, k)]).sum();
                    phases[n] * amp
                })
                .collect()
        })
        .collect()
}

/// `Π_{k<n} ⟨ρ_k²⟩` for `n = 0..=D−1`, averaged over an ensemble of equally
/// long sequences.
pub fn localization_profile(ensemble: &[VerblunskySequence]) -> Vec<f64> {
    let Some(first) = ensemble.first() else {
        return Vec::new();
    };
    let d = first.len();
    let mut mean = vec![0.0; d];
    for seq in ensemble {
        for (m, r) in mean.iter_mut().zip(seq.rhos()) {
            *m += r * r;
        }
    }
    let inv = 1.0 / ensemble.len() as f64;
    cumulative(mean.iter().map(|m| m * inv), d)
}

/// The same product for `|α_k|² ~ Beta(1, γ_k + 1)`, where
/// `⟨ρ_k²⟩ = (γ_k + 1)/(γ_k + 2)`.
pub fn beta_localization_profile(gammas: &[f64]) -> Vec<f64> {
    cumulative(
        gammas.iter().map(|g| (g + 1.0) / (g + 2.0)),
        gammas.len() + 1,
    )
}

fn cumulative<I: Iterator<Item = f64>>(factors: I, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 1.0;
    out.push(acc);
    for f in factors {
        if out.len() == len {
            break;
        }
        acc *= f;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::cmv_factorization;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chain(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> VerblunskySequence {
        let mut a: Vec<C64> = (0..d)
            .map(|_| C64::from_polar(scale * rng.random::<f64>(), rng.random::<f64>() * 6.283))
            .collect();
        a[d - 1] = C64::from_polar(1.0, rng.random::<f64>() * 6.283);
        VerblunskySequence::new(a).unwrap()
    }

    #[test]
    fn trivial_chain_stays_put() {
        let s = VerblunskySequence::new(vec![C64::from_polar(1.0, 0.3)]).unwrap();
        let f = cmv_factorization(&s).unwrap();
        let run = propagate_cmv(&f, &[linalg::ONE], 5).unwrap();
        for phi in &run {
            assert!((phi[0].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn free_chain_is_ballistic() {
        let d = 40;
        let f = cmv_factorization(&VerblunskySequence::free(d, linalg::ONE)).unwrap();
        let run = propagate_cmv(&f, &linalg::basis_vector(d, 0), 15).unwrap();
        let obs = observables(&run);
        for t in 1..=15 {
            assert!((obs.k[t] - (2 * t - 1) as f64).abs() < 1e-12);
            assert!((obs.exp_s[t] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_matches_dense_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = cmv_factorization(&random_chain(8, 0.9, &mut rng)).unwrap();
        let start = linalg::basis_vector(8, 0);
        let banded = propagate_cmv(&f, &start, 30).unwrap();
        let dense = crate::krylov::dense_orbit(&f, &start, 30);
        for (x, y) in banded.iter().zip(&dense) {
            assert!(linalg::max_abs_diff(x, y) < 1e-10);
        }
    }

    #[test]
    fn norm_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let d = 64;
        let f = cmv_factorization(&random_chain(d, 1.0, &mut rng)).unwrap();
        let mut worst: f64 = 0.0;
        propagate_cmv_with(&f, &linalg::basis_vector(d, 0), 10 * d, |_, phi| {
            worst = worst.max((linalg::norm_sqr(phi) - 1.0).abs());
        })
        .unwrap();
        assert!(worst < 1e-8);
    }

    #[test]
    fn observables_of_simple_states() {
        let (k, s) = complexity_entropy(&linalg::basis_vector(5, 0));
        assert_eq!((k, s), (0.0, 0.0));
        let d = 6;
        let u = vec![C64::new(1.0 / libm::sqrt(d as f64), 0.0); d];
        let (k, s) = complexity_entropy(&u);
        assert!((k - 2.5).abs() < 1e-12);
        assert!((libm::exp(s) - d as f64).abs() < 1e-10);
    }

    #[test]
    fn tight_binding_free_chain_is_exact() {
        let f = cmv_factorization(&VerblunskySequence::free(30, linalg::ONE)).unwrap();
        assert!(tight_binding_deviation(&f, 12).unwrap() < 1e-14);
    }

    #[test]
    fn tight_binding_random_chains_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for scale in [1.0, 0.3, 0.01] {
            let f = cmv_factorization(&random_chain(16, scale, &mut rng)).unwrap();
            assert!(tight_binding_deviation(&f, 50).unwrap() < 1e-10);
        }
    }

    #[test]
    fn klein_gordon_residual_is_quadratic_for_smooth_chains() {
        let d = 400;
        for eps in [0.2, 0.1, 0.05] {
            let a: Vec<C64> = (0..d)
                .map(|n| {
                    if n == d - 1 {
                        linalg::ONE
                    } else {
                        let x = n as f64;
                        C64::from_polar(eps * (1.0 + 0.5 * libm::sin(x / 50.0)), 0.3 + x / 80.0)
                    }
                })
                .collect();
            let s = VerblunskySequence::new(a).unwrap();
            let max_sq = s.alphas()[..d - 1]
                .iter()
                .map(|a| a.norm_sqr())
                .fold(0.0, f64::max);
            let f = cmv_factorization(&s).unwrap();
            let run = propagate_cmv(&f, &linalg::basis_vector(d, 0), 150).unwrap();
            let res = klein_gordon_residual(&run, 4);
            assert!(res < 4.0 * max_sq, "eps={eps}: {res} vs {max_sq}");
        }
    }

    #[test]
    fn lanczos_two_level() {
        let c = LanczosCoefficients {
            a: vec![0.0, 0.0],
            b: vec![0.0, 1.0],
        };
        let run = propagate_lanczos(&c, 0.1, 20);
        for (j, phi) in run.iter().enumerate() {
            let t = 0.1 * j as f64;
            assert!((phi[0].norm_sqr() - libm::cos(t).powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn lanczos_matches_dense_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = 12;
        let a: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut b: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.1).collect();
        b[0] = 0.0;
        let c = LanczosCoefficients { a, b };
        let t = c.tridiagonal().map(|x| C64::new(x, 0.0));
        let dt = 0.37;
        // e^{iHt} = expm_hermitian(H, −t)
        let step = linalg::expm_hermitian(&t, -dt);
        let run = propagate_lanczos(&c, dt, 6);
        let mut v = linalg::basis_vector(d, 0);
        for phi in run.iter() {
            for n in 0..d {
                let phase = C64::from_polar(1.0, -core::f64::consts::FRAC_PI_2 * n as f64);
                assert!((phi[n] - phase * v[n]).norm() < 1e-10);
            }
            let mut next = vec![linalg::ZERO; d];
            linalg::matvec(&step, &v, &mut next);
            v = next;
        }
        // the stated first-order equation, checked by a centered difference
        let h = 1e-4;
        let fine = propagate_lanczos(&c, h, 2);
        for n in 0..d {
            let deriv = (fine[2][n] - fine[0][n]) / (2.0 * h);
            let mut rhs = linalg::I * c.a[n] * fine[1][n];
            if n + 1 < d {
                rhs -= c.b[n + 1] * fine[1][n + 1];
            }
            if n > 0 {
                rhs += c.b[n] * fine[1][n - 1];
            }
            assert!((deriv - rhs).norm() < 1e-6);
        }
    }

    #[test]
    fn profiles() {
        let free = VerblunskySequence::free(10, linalg::ONE);
        let p = localization_profile(&[free.clone(), free]);
        assert!(p[..9].iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let q = beta_localization_profile(&[0.0, 1.0]);
        assert_eq!(q.len(), 3);
        assert!((q[2] - 0.5 * 2.0 / 3.0).abs() < 1e-15);
    }
}
