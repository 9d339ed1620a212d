//! Random Verblunsky ensembles, CMV spectra and localization scans.
//!
//! Coefficients are drawn independently with density
//! `∝ (1 − |α_n|²)^{γ_n}` on the disk and a uniform phase, i.e.
//! `|α_n|² ~ Beta(1, γ_n + 1)`. With `m = d − n`:
//!
//! | kind        | `γ_n`               |
//! |-------------|---------------------|
//! | degenerate  | `m^{1+ε} − 2`       |
//! | chaotic     | `β m / 2 − 1`       |
//! | integrable  | `m^{1−ε} − 2`       |
//!
//! for `n = 0..d−2`; `α_{d−1}` is unimodular with uniform phase.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::complexity_entropy;
use crate::error::{Error, Result};
use crate::krylov::{cmv_factorization, CmvForm, VerblunskySequence};
use crate::linalg::{self, C64};

/// Exponents at or below this are replaced by [`GAMMA_CLAMP`].
pub const GAMMA_FLOOR: f64 = -1.0;
pub const GAMMA_CLAMP: f64 = -0.5;

/// Spacings below this count as degenerate and are left out of `⟨r⟩`.
pub const DEGENERATE_SPACING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleKind {
    Degenerate { epsilon: f64 },
    Chaotic { beta: f64 },
    Integrable { epsilon: f64 },
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Degenerate { .. } => "degenerate",
            Self::Chaotic { .. } => "chaotic",
            Self::Integrable { .. } => "integrable",
        }
    }

    /// `ε` or `β`.
    pub fn parameter(&self) -> f64 {
        match *self {
            Self::Degenerate { epsilon } | Self::Integrable { epsilon } => epsilon,
            Self::Chaotic { beta } => beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.parameter();
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} ensemble needs a positive parameter, got {p}",
                self.name()
            )));
        }
        Ok(())
    }

    /// Unclamped `γ` at distance `m = d − n` from the chain end.
    pub fn raw_gamma(&self, m: f64) -> f64 {
        match *self {
            Self::Degenerate { epsilon } => libm::pow(m, 1.0 + epsilon) - 2.0,
            Self::Chaotic { beta } => beta * m / 2.0 - 1.0,
            Self::Integrable { epsilon } => libm::pow(m, 1.0 - epsilon) - 2.0,
        }
    }

    /// `γ_0..γ_{d−2}` with the end-of-chain clamp applied.
    pub fn gammas(&self, d: usize) -> Vec<f64> {
        (0..d.saturating_sub(1))
            .map(|n| {
                let g = self.raw_gamma((d - n) as f64);
                if g <= GAMMA_FLOOR {
                    GAMMA_CLAMP
                } else {
                    g
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub seed: u64,
}

/// Independent generator for realization `index` of a run with master seed
/// `master`: a separate ChaCha stream per index.
pub fn realization_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// One draw of `α` with `|α|² ~ Beta(1, γ + 1)` and uniform phase.
pub fn sample_alpha<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> C64 {
    // inverse CDF of Beta(1, k): x = 1 − u^{1/k}, u ∈ (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let x = -libm::expm1(libm::log(u) / (gamma + 1.0));
    let phase = TAU * rng.random::<f64>();
    C64::from_polar(libm::sqrt(x.clamp(0.0, 1.0)), phase)
}

pub fn sample_sequence<R: Rng + ?Sized>(
    kind: &EnsembleKind,
    d: usize,
    rng: &mut R,
) -> Result<VerblunskySequence> {
    kind.validate()?;
    if d < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "ensemble dimension must be at least 2, got {d}"
        )));
    }
    let mut alphas: Vec<C64> = kind
        .gammas(d)
        .iter()
        .map(|&g| sample_alpha(g, rng))
        .collect();
    alphas.push(C64::from_polar(1.0, TAU * rng.random::<f64>()));
    VerblunskySequence::new(alphas)
}

/// Sequence for `spec`, seeded by `spec.seed` alone.
pub fn sample_verblunsky(spec: &EnsembleSpec) -> Result<VerblunskySequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    sample_sequence(&spec.kind, spec.dim, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStats {
    /// Sorted, in `[0, 2π)`.
    pub eigenphases: Vec<f64>,
    /// `r_i = min(s_i, s_{i+1}) / max(s_i, s_{i+1})` over cyclic spacings.
    pub spacing_ratios: Vec<f64>,
    pub mean_r: f64,
    /// Ratios skipped because a spacing fell below [`DEGENERATE_SPACING`].
    pub excluded: usize,
}

impl SpectralStats {
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let mut p: Vec<f64> = phases
            .into_iter()
            .map(|x| {
                let r = libm::fmod(x, TAU);
                if r < 0.0 {
                    r + TAU
                } else {
                    r
                }
            })
            .collect();
        p.sort_by(|a, b| a.total_cmp(b));
        let n = p.len();
        let mut ratios = Vec::new();
        let mut excluded = 0;
        if n >= 3 {
            let spacing = |i: usize| {
                if i + 1 < n {
                    p[i + 1] - p[i]
                } else {
                    p[0] + TAU - p[n - 1]
                }
            };
            for i in 0..n {
                let (a, b) = (spacing(i), spacing((i + 1) % n));
                if a < DEGENERATE_SPACING || b < DEGENERATE_SPACING {
                    excluded += 1;
                    continue;
                }
                ratios.push(a.min(b) / a.max(b));
            }
        }
        let mean_r = if ratios.is_empty() {
            f64::NAN
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        };
        Self {
            eigenphases: p,
            spacing_ratios: ratios,
            mean_r,
            excluded,
        }
    }
}

/// Eigenphases of a closed CMV matrix.
///
/// The eigenvalues are the zeros of the paraorthogonal polynomial
/// `zΦ_{D−1}(z) − ᾱ_{D−1}Φ*_{D−1}(z)`. On the circle `z = e^{iθ}` the
/// Blaschke phase `ϑ_n` of `zΦ_n/Φ*_n` obeys
///
/// ```text
/// ϑ_0 = θ,   ϑ_{n+1} = θ + ϑ_n − 2 arg(1 − α_n e^{iϑ_n})
/// ```
///
/// and increases strictly with `θ` by `2π(n+1)` per turn, so the `D`
/// eigenphases are the solutions of `ϑ_{D−1}(θ) = arg ᾱ_{D−1} + 2πk`. Each
/// is bracketed on a grid and polished by safeguarded Newton steps, at
/// `O(D²)` total cost. Chains split by interior unimodular coefficients fall
/// back to dense diagonalization.
pub fn eigenphases(form: &CmvForm) -> Result<SpectralStats> {
    let seq = form.sequence();
    let d = seq.len();
    if !form.decouplings().is_empty() {
        let values = linalg::unitary_eigenvalues(&form.to_dense());
        return Ok(SpectralStats::from_phases(
            values.iter().map(|z| linalg::arg(*z)).collect(),
        ));
    }
    let alphas = &seq.alphas()[..d - 1];
    let target0 = linalg::arg(seq.alphas()[d - 1].conj());
    // f(θ) = ϑ_{D−1}(θ) − target0 runs over [f(0), f(0) + 2πD)
    let f = |theta: f64| prufer(alphas, theta).0 - target0;
    let f0 = f(0.0);
    let k0 = libm::ceil(f0 / TAU) as i64;

    let grid = 4 * d.max(1);
    let xs: Vec<f64> = (0..=grid).map(|j| TAU * j as f64 / grid as f64).collect();
    let mut fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    // pin the periodic endpoint exactly
    fs[grid] = f0 + TAU * d as f64;

    let mut phases = Vec::with_capacity(d);
    let mut cell = 0usize;
    for j in 0..d as i64 {
        let level = TAU * (k0 + j) as f64;
        while cell + 1 < grid && fs[cell + 1] < level {
            cell += 1;
        }
        let root = solve_monotone(
            |x| {
                let (v, dv) = prufer(alphas, x);
                (v - target0 - level, dv)
            },
            xs[cell],
            xs[cell + 1],
        );
        phases.push(root);
    }
    Ok(SpectralStats::from_phases(phases))
}

/// `(ϑ_{D−1}(θ), dϑ_{D−1}/dθ)`. The unimodular `e^{iϑ_n}` is carried as a
/// complex number; only the lift needs an `atan2` per site.
fn prufer(alphas: &[C64], theta: f64) -> (f64, f64) {
    let z = C64::from_polar(1.0, theta);
    let mut b = z;
    let mut v = theta;
    let mut dv = 1.0;
    for a in alphas {
        let w = *a * b;
        let om = linalg::ONE - w;
        let inv = 1.0 / om.norm_sqr();
        let gain = (1.0 - w.norm_sqr()) * inv;
        v = theta + v - 2.0 * libm::atan2(om.im, om.re);
        dv = 1.0 + dv * gain;
        // e^{iϑ_{n+1}} = z e^{iϑ_n} conj(1 − w)/(1 − w)
        let c = om.conj();
        b = z * b * c * c * inv;
    }
    (v, dv)
}

/// Root of an increasing `g` in `[lo, hi]` given `g(lo) ≤ 0 ≤ g(hi)`.
fn solve_monotone<G: Fn(f64) -> (f64, f64)>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, dv) = g(x);
        if v == 0.0 {
            return x;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / dv;
        let next = if dv > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-14 || hi - lo <= 1e-14 {
            return next;
        }
        x = next;
    }
    x
}

/// Mean spacing ratio; needs at least three eigenphases.
pub fn mean_spacing_ratio(stats: &SpectralStats) -> Result<f64> {
    if stats.eigenphases.len() < 3 {
        return Err(Error::InvalidParameter(alloc::format!(
            "spacing ratio needs at least 3 eigenphases, got {}",
            stats.eigenphases.len()
        )));
    }
    if stats.spacing_ratios.is_empty() {
        return Err(Error::InvalidParameter(
            "every spacing is degenerate".into(),
        ));
    }
    Ok(stats.mean_r)
}

/// `⟨r⟩` of a dense Haar-random unitary of dimension `d`.
pub fn haar_spacing_ratio<R: Rng + ?Sized>(d: usize, rng: &mut R) -> f64 {
    let u = linalg::haar_unitary(d, rng);
    let phases = linalg::unitary_eigenvalues(&u)
        .iter()
        .map(|z| linalg::arg(*z))
        .collect();
    SpectralStats::from_phases(phases).mean_r
}

/// Settings for time-averaged localization measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Number of evenly spaced initial sites.
    pub starts: usize,
    /// Run length in units of `d`.
    pub steps_per_site: usize,
    /// Observables are recorded every `stride` steps.
    pub stride: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            starts: 10,
            steps_per_site: 10,
            stride: 5,
        }
    }
}

/// Time-averaged `(K, e^S)` of one chain. `K` is the displacement
/// `Σ |n − n_0| |φ_n|²` from the initial site `n_0`, which reduces to the
/// usual `Σ n|φ_n|²` for `n_0 = 0`. Averages run over the second half of
/// `steps_per_site · D` steps and over `starts` initial sites `n_0 = jD/starts`.
pub fn chain_localization(form: &CmvForm, opts: &ScanOptions) -> (f64, f64) {
    let d = form.dim();
    let starts = opts.starts.clamp(1, d);
    let steps = opts.steps_per_site.max(1) * d;
    let stride = opts.stride.max(1);
    let mut cur = vec![linalg::ZERO; d];
    let mut scratch = vec![linalg::ZERO; d];
    let mut next = vec![linalg::ZERO; d];
    let (mut k_sum, mut e_sum, mut count) = (0.0, 0.0, 0usize);
    for j in 0..starts {
        let n0 = j * d / starts;
        cur.iter_mut().for_each(|x| *x = linalg::ZERO);
        cur[n0] = linalg::ONE;
        for t in 1..=steps {
            form.step(&cur, &mut scratch, &mut next);
            core::mem::swap(&mut cur, &mut next);
            if t > steps / 2 && t % stride == 0 {
                let (k, s) = displacement_entropy(&cur, n0);
                k_sum += k;
                e_sum += libm::exp(s);
                count += 1;
            }
        }
    }
    (k_sum / count as f64, e_sum / count as f64)
}

fn displacement_entropy(phi: &[C64], n0: usize) -> (f64, f64) {
    if n0 == 0 {
        return complexity_entropy(phi);
    }
    let mut k = 0.0;
    let mut s = 0.0;
    for (n, a) in phi.iter().enumerate() {
        let p = a.norm_sqr();
        k += n.abs_diff(n0) as f64 * p;
        if p > 0.0 {
            s -= p * libm::log(p);
        }
    }
    (k, s)
}

/// Per-realization result of a localization/spectral scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationSummary {
    pub mean_r: f64,
    pub excluded: usize,
    pub mean_k: f64,
    pub mean_exp_s: f64,
}

/// Samples realization `index` of `kind` at dimension `d` and measures its
/// spacing ratio and (if `scan` is given) time-averaged localization.
pub fn measure_realization(
    kind: &EnsembleKind,
    d: usize,
    master_seed: u64,
    index: u64,
    scan: Option<&ScanOptions>,
) -> Result<RealizationSummary> {
    let mut rng = realization_rng(master_seed, index);
    let seq = sample_sequence(kind, d, &mut rng)?;
    let form = cmv_factorization(&seq)?;
    let stats = eigenphases(&form)?;
    let (mean_k, mean_exp_s) = match scan {
        Some(opts) => chain_localization(&form, opts),
        None => (f64::NAN, f64::NAN),
    };
    Ok(RealizationSummary {
        mean_r: stats.mean_r,
        excluded: stats.excluded,
        mean_k,
        mean_exp_s,
    })
}

/// Mean and standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var / n))
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| libm::log(*x)).collect();
    let ly: Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// One row of a localization scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub dim: usize,
    pub mean_r: f64,
    pub mean_k: f64,
    pub mean_exp_s: f64,
    pub stderr_exp_s: f64,
    pub realizations: usize,
}

/// Sequential scan over `sizes`; realization `i` at size `d` uses stream
/// `i` of a master seed derived from `(seed, d)`.
pub fn localization_scan(
    kind: &EnsembleKind,
    sizes: &[usize],
    realizations: usize,
    seed: u64,
    opts: &ScanOptions,
) -> Result<(Vec<ScanRow>, f64)> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &d in sizes {
        let master = size_seed(seed, d);
        let summaries = (0..realizations as u64)
            .map(|i| measure_realization(kind, d, master, i, Some(opts)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(summarize(d, &summaries));
    }
    let slope = scan_slope(&rows);
    Ok((rows, slope))
}

/// Master seed for size `d` of a scan seeded with `seed`.
pub fn size_seed(seed: u64, d: usize) -> u64 {
    seed ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn summarize(d: usize, summaries: &[RealizationSummary]) -> ScanRow {
    let rs: Vec<f64> = summaries.iter().map(|s| s.mean_r).collect();
    let ks: Vec<f64> = summaries.iter().map(|s| s.mean_k).collect();
    let es: Vec<f64> = summaries.iter().map(|s| s.mean_exp_s).collect();
    let (e, se) = mean_stderr(&es);
    ScanRow {
        dim: d,
        mean_r: mean_stderr(&rs).0,
        mean_k: mean_stderr(&ks).0,
        mean_exp_s: e,
        stderr_exp_s: se,
        realizations: summaries.len(),
    }
}

/// Fitted exponent of `e^S` against `d`.
pub fn scan_slope(rows: &[ScanRow]) -> f64 {
    let xs: Vec<f64> = rows.iter().map(|r| r.dim as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_exp_s).collect();
    loglog_fit(&xs, &ys).0
}
