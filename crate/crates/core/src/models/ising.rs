//! Kicked Ising chain with periodic boundaries,
//! `U = exp(−iJ Σ σ^z_k σ^z_{k+1}) exp(−i Σ b·σ_k)`.
//!
//! Site `k` is bit `k` of the basis index; bit value 0 is spin up
//! (`σ^z = +1`).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sector::{SectorKind, SymmetrySector};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::operator::Unitary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedIsingParams {
    pub sites: usize,
    pub j: f64,
    pub b: [f64; 3],
}

impl KickedIsingParams {
    /// Transverse field along x: integrable (free fermions).
    pub fn integrable(sites: usize, field: f64) -> Self {
        Self {
            sites,
            j: 0.7,
            b: [field, 0.0, 0.0],
        }
    }

    /// Tilted field `|b| (1/√2, 0, 1/√2)`.
    pub fn chaotic(sites: usize, field: f64) -> Self {
        let c = field * core::f64::consts::FRAC_1_SQRT_2;
        Self {
            sites,
            j: 0.7,
            b: [c, 0.0, c],
        }
    }

    /// Self-dual point: `J = π/4` and the single-site kick
    /// `e^{−i b·σ} = e^{−i(π/4)σ^x} e^{−ihσ^z}`.
    pub fn dual_unitary(sites: usize, h: f64) -> Self {
        let a = core::f64::consts::FRAC_PI_4;
        let cos_b = libm::cos(a) * libm::cos(h);
        let norm = libm::acos(cos_b.clamp(-1.0, 1.0));
        let sin_b = libm::sin(norm);
        let n = [
            libm::sin(a) * libm::cos(h),
            -libm::sin(a) * libm::sin(h),
            libm::cos(a) * libm::sin(h),
        ];
        let b = if sin_b.abs() < 1e-15 {
            [0.0; 3]
        } else {
            [
                n[0] / sin_b * norm,
                n[1] / sin_b * norm,
                n[2] / sin_b * norm,
            ]
        };
        Self {
            sites,
            j: core::f64::consts::FRAC_PI_4,
            b,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }
}

/// Matrix-free kicked Ising Floquet operator.
#[derive(Debug, Clone)]
pub struct KickedIsing {
    params: KickedIsingParams,
    zz: Vec<C64>,
    kick: [[C64; 2]; 2],
}

pub fn kicked_ising(params: KickedIsingParams) -> Result<KickedIsing> {
    let l = params.sites;
    if !(2..=24).contains(&l) {
        return Err(Error::InvalidParameter(alloc::format!(
            "kicked Ising chain needs 2..=24 sites, got {l}"
        )));
    }
    let zz = (0..1usize << l)
        .map(|s| {
            let mut e = 0i64;
            for k in 0..l {
                let a = (s >> k) & 1;
                let b = (s >> ((k + 1) % l)) & 1;
                e += if a == b { 1 } else { -1 };
            }
            C64::from_polar(1.0, -params.j * e as f64)
        })
        .collect();
    let [bx, by, bz] = params.b;
    let norm = libm::sqrt(bx * bx + by * by + bz * bz);
    let (c, s) = (libm::cos(norm), libm::sin(norm));
    let (nx, ny, nz) = if norm > 0.0 {
        (bx / norm, by / norm, bz / norm)
    } else {
        (0.0, 0.0, 0.0)
    };
    // cos|b| − i sin|b| n̂·σ
    let kick = [
        [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
        [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
    ];
    Ok(KickedIsing { params, zz, kick })
}

fn apply_site(g: &[[C64; 2]; 2], k: usize, v: &mut [C64]) {
    let bit = 1usize << k;
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a, b) = (v[i], v[i | bit]);
            v[i] = g[0][0] * a + g[0][1] * b;
            v[i | bit] = g[1][0] * a + g[1][1] * b;
        }
    }
}

impl KickedIsing {
    pub fn params(&self) -> &KickedIsingParams {
        &self.params
    }
}

impl Unitary for KickedIsing {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        out.copy_from_slice(v);
        for k in 0..self.params.sites {
            apply_site(&self.kick, k, out);
        }
        for (x, p) in out.iter_mut().zip(&self.zz) {
            *x *= p;
        }
    }

    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        for ((o, x), p) in out.iter_mut().zip(v).zip(&self.zz) {
            *o = x * p.conj();
        }
        let g = &self.kick;
        let adj = [
            [g[0][0].conj(), g[1][0].conj()],
            [g[0][1].conj(), g[1][1].conj()],
        ];
        for k in 0..self.params.sites {
            apply_site(&adj, k, out);
        }
    }
}

/// Cyclic shift `T`: the spin on site `k` moves to site `k+1`.
pub fn translate(state: usize, sites: usize) -> usize {
    let mask = (1usize << sites) - 1;
    ((state << 1) | (state >> (sites - 1))) & mask
}

/// Momentum sector with `T` eigenvalue `e^{2πik/L}`, spanned by
/// `(1/√p) Σ_{j<p} e^{−2πikj/L} T^j|r⟩` over orbit representatives `r`
/// (smallest element) with period `p` and `kp ≡ 0 mod L`.
pub fn momentum_sector(sites: usize, k: usize) -> Result<SymmetrySector> {
    if !(1..=24).contains(&sites) {
        return Err(Error::InvalidParameter(alloc::format!(
            "momentum sector needs 1..=24 sites, got {sites}"
        )));
    }
    let k = k % sites;
    let d = 1usize << sites;
    let mut entries: Vec<Option<(usize, C64)>> = vec![None; d];
    let mut seen = vec![false; d];
    let mut dim = 0;
    for r in 0..d {
        if seen[r] {
            continue;
        }
        let mut orbit = vec![r];
        let mut s = translate(r, sites);
        while s != r {
            orbit.push(s);
            s = translate(s, sites);
        }
        for &s in &orbit {
            seen[s] = true;
        }
        let p = orbit.len();
        if (k * p) % sites != 0 {
            continue;
        }
        let w = 1.0 / libm::sqrt(p as f64);
        let step = -2.0 * core::f64::consts::PI * k as f64 / sites as f64;
        for (j, &s) in orbit.iter().enumerate() {
            entries[s] = Some((dim, C64::from_polar(w, step * j as f64)));
        }
        dim += 1;
    }
    Ok(SymmetrySector::from_orbits(
        SectorKind::Momentum { sites, k },
        entries,
        dim,
    ))
}

/// A random complex combination of `m` distinct computational basis states,
/// restricted to `sector` and normalized. Returned in sector coordinates.
pub fn random_low_entanglement_seed<R: Rng + ?Sized>(
    sector: &SymmetrySector,
    m: usize,
    rng: &mut R,
) -> Result<Vec<C64>> {
    let d = sector.full_dim();
    if m == 0 || m > d {
        return Err(Error::InvalidParameter(alloc::format!(
            "seed needs 1..={d} basis states, got {m}"
        )));
    }
    for _ in 0..100 {
        let mut full = vec![linalg::ZERO; d];
        let picks = rand::seq::index::sample(rng, d, m);
        for s in picks.iter() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            full[s] = C64::new(re, im);
        }
        let mut v = sector.restrict(&full);
        if linalg::normalize(&mut v) > 1e-12 {
            return Ok(v);
        }
    }
    Err(Error::ZeroSeed)
}
