//! Inhomogeneous XY chain whose one-particle dynamics is the CMV matrix.
//!
//! Sites are bits of the many-body index, with bit value `0` (spin up) the
//! occupied mode. Jordan-Wigner: `c_k = σ⁻_k Π_{j<k} σᶻ_j` with
//! `σ⁻ = [[0, 0], [1, 0]]`.
//!
//! The transfer matrix `X` of a circuit `U` is defined by
//! `U† c_k U = Σ_j X_{jk} c_j`. For `U = A·B` it composes as `X = X_B X_A`,
//! so the brickwork `U = Odd·Even` has `X = X_even X_odd = M·L`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::krylov::{cmv_factorization, VerblunskySequence};
use crate::linalg::{self, C64};

/// Largest site count for the dense many-body check.
pub const XY_MAX_SITES: usize = 10;

/// `(χ, θ)` with `χ ∈ [−π, π)` and `θ ∈ [0, π/2]` such that
/// `ᾱ = e^{iχ} cos θ` and `ρ = sin θ`.
pub fn xy_angles(alpha: C64, rho: f64) -> (f64, f64) {
    let chi = if alpha.norm() > 0.0 {
        wrap(linalg::arg(alpha.conj()))
    } else {
        0.0
    };
    (chi, libm::atan2(rho, alpha.norm()))
}

/// Inverse of [`xy_angles`].
pub fn xy_alpha(chi: f64, theta: f64) -> C64 {
    C64::from_polar(libm::cos(theta), -chi)
}

fn wrap(phi: f64) -> f64 {
    if phi >= core::f64::consts::PI {
        phi - 2.0 * core::f64::consts::PI
    } else {
        phi
    }
}

/// One gate of the brickwork.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XyGate {
    /// `Z · exp(iθ/2 (σˣσˣ + σʸσʸ)) · Z` on sites `(site, site + 1)` with
    /// `Z = exp(iχ/4 (σᶻ_k − σᶻ_{k+1})) exp(iπ/4 σᶻ_{k+1})`.
    Pair { site: usize, chi: f64, theta: f64 },
    /// `exp(iχ n)` on the last site, `n = (1 + σᶻ)/2`.
    Edge { site: usize, chi: f64 },
}

impl XyGate {
    /// Local matrix on `(s_k, s_{k+1})` indexed by `s_k + 2 s_{k+1}`, or
    /// the 2×2 block (stored top-left) for an edge gate.
    pub fn local_matrix(&self) -> [[C64; 4]; 4] {
        let z = C64::new(0.0, 0.0);
        let mut g = [[z; 4]; 4];
        match *self {
            XyGate::Pair { chi, theta, .. } => {
                let spin = |bit: usize| 1.0 - 2.0 * bit as f64;
                let phase = |i: usize| {
                    let (zk, zl) = (spin(i & 1), spin(i >> 1));
                    C64::from_polar(
                        1.0,
                        0.25 * chi * (zk - zl) + 0.25 * core::f64::consts::PI * zl,
                    )
                };
                let (c, s) = (libm::cos(theta), libm::sin(theta));
                let w = [
                    [linalg::ONE, z, z, z],
                    [z, C64::new(c, 0.0), C64::new(0.0, s), z],
                    [z, C64::new(0.0, s), C64::new(c, 0.0), z],
                    [z, z, z, linalg::ONE],
                ];
                for (r, row) in g.iter_mut().enumerate() {
                    for (col, x) in row.iter_mut().enumerate() {
                        *x = phase(r) * w[r][col] * phase(col);
                    }
                }
            }
            XyGate::Edge { chi, .. } => {
                g[0][0] = C64::from_polar(1.0, chi);
                g[1][1] = linalg::ONE;
            }
        }
        g
    }

    fn site(&self) -> usize {
        match *self {
            XyGate::Pair { site, .. } | XyGate::Edge { site, .. } => site,
        }
    }

    /// `O ← O·G` on the full register.
    fn apply_right(&self, o: &mut DMatrix<C64>) {
        let g = self.local_matrix();
        let k = self.site();
        let n = o.nrows();
        match self {
            XyGate::Pair { .. } => {
                let mask = 0b11 << k;
                for base in (0..n).filter(|c| c & mask == 0) {
                    let cols = [base, base | 1 << k, base | 2 << k, base | 3 << k];
                    for r in 0..n {
                        let v = cols.map(|c| o[(r, c)]);
                        for (j, &c) in cols.iter().enumerate() {
                            o[(r, c)] = (0..4).map(|i| v[i] * g[i][j]).sum();
                        }
                    }
                }
            }
            XyGate::Edge { .. } => {
                for c in (0..n).filter(|c| c >> k & 1 == 0) {
                    for r in 0..n {
                        o[(r, c)] *= g[0][0];
                    }
                }
            }
        }
    }

    /// `O ← G†·O`.
    fn apply_left_adjoint(&self, o: &mut DMatrix<C64>) {
        let mut t = o.adjoint();
        self.apply_right(&mut t);
        *o = t.adjoint();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XyCircuit {
    /// `(χ_k, θ_k)` per site; the last pair always has `θ = 0`.
    pub angles: Vec<(f64, f64)>,
    /// Whether a decoupled `α = 1` site was appended to reach an even count.
    pub padded: bool,
}

impl XyCircuit {
    pub fn sites(&self) -> usize {
        self.angles.len()
    }

    /// Coefficients recovered from the angles.
    pub fn alphas(&self) -> Vec<C64> {
        self.angles.iter().map(|&(c, t)| xy_alpha(c, t)).collect()
    }

    /// Gates in product order (leftmost factor first): the odd layer with
    /// the edge phase, then the even layer.
    pub fn gates(&self) -> Vec<XyGate> {
        let d = self.sites();
        let pair = |k: usize| XyGate::Pair {
            site: k,
            chi: self.angles[k].0,
            theta: self.angles[k].1,
        };
        let mut gates: Vec<XyGate> = (1..d.saturating_sub(1)).step_by(2).map(pair).collect();
        gates.push(XyGate::Edge {
            site: d - 1,
            chi: self.angles[d - 1].0,
        });
        gates.extend((0..d - 1).step_by(2).map(pair));
        gates
    }

    /// Dense `2^d × 2^d` circuit unitary.
    pub fn many_body_unitary(&self) -> Result<DMatrix<C64>> {
        self.check_size()?;
        let mut u = linalg::identity(1 << self.sites());
        for g in self.gates() {
            g.apply_right(&mut u);
        }
        Ok(u)
    }

    /// `U† O U`, gate by gate.
    pub fn conjugate(&self, o: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check_size()?;
        let mut o = o.clone();
        for g in self.gates() {
            g.apply_right(&mut o);
            g.apply_left_adjoint(&mut o);
        }
        Ok(o)
    }

    fn check_size(&self) -> Result<()> {
        if self.sites() > XY_MAX_SITES {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} sites exceed the dense limit of {XY_MAX_SITES}",
                self.sites()
            )));
        }
        Ok(())
    }
}

/// Angles for a closed sequence; an odd length is padded with `α = 1`.
pub fn xy_circuit_build(seq: &VerblunskySequence) -> Result<XyCircuit> {
    if !seq.is_closed() {
        return Err(Error::NotClosed {
            modulus: seq.alphas()[seq.len() - 1].norm(),
        });
    }
    let padded = seq.len() % 2 == 1;
    let seq = seq.padded(seq.len() + padded as usize, linalg::ONE);
    let mut angles: Vec<(f64, f64)> = seq
        .alphas()
        .iter()
        .zip(seq.rhos())
        .map(|(&a, &r)| xy_angles(a, r))
        .collect();
    angles.last_mut().expect("non-empty").1 = 0.0;
    Ok(XyCircuit { angles, padded })
}

/// `(row, sign)` of the single nonzero in column `col` of `c_k`, if any.
fn annihilation_entry(k: usize, col: usize) -> Option<(usize, f64)> {
    if col >> k & 1 == 1 {
        return None;
    }
    let string = (col & ((1 << k) - 1)).count_ones();
    Some((col | 1 << k, if string % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Dense Jordan-Wigner `c_k` on `sites` qubits.
pub fn annihilation_operator(sites: usize, k: usize) -> DMatrix<C64> {
    let n = 1 << sites;
    let mut c = DMatrix::zeros(n, n);
    for col in 0..n {
        if let Some((row, s)) = annihilation_entry(k, col) {
            c[(row, col)] = C64::new(s, 0.0);
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct XyEquivalence {
    pub circuit: XyCircuit,
    /// `X_{jk} = tr(c_j† U† c_k U) / tr(c_j† c_j)`.
    pub transfer: DMatrix<C64>,
    /// `max |X − M·L|` against the (padded) CMV matrix.
    pub deviation: f64,
    /// Largest relative Hilbert-Schmidt norm of `U† c_k U` outside the span
    /// of the `c_j`.
    pub span_residual: f64,
}

/// Conjugates every `c_k` by the many-body XY circuit and compares the
/// one-particle transfer matrix with the CMV matrix of the sequence padded
/// with `α = 1` to `d` sites.
pub fn xy_equivalence_check(seq: &VerblunskySequence, d: usize) -> Result<XyEquivalence> {
    if d % 2 == 1 {
        return Err(Error::OddSiteCount(d));
    }
    if d < seq.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "{d} sites cannot hold {} coefficients",
            seq.len()
        )));
    }
    let seq = seq.padded(d, linalg::ONE);
    let circuit = xy_circuit_build(&seq)?;
    let cmv = cmv_factorization(&seq)?.to_dense();
    let n = 1usize << d;
    let norm = (n / 2) as f64;
    let mut transfer = DMatrix::zeros(d, d);
    let mut span_residual: f64 = 0.0;
    for k in 0..d {
        let t = circuit.conjugate(&annihilation_operator(d, k))?;
        for j in 0..d {
            let mut x = linalg::ZERO;
            for col in 0..n {
                if let Some((row, s)) = annihilation_entry(j, col) {
                    x += t[(row, col)] * s;
                }
            }
            transfer[(j, k)] = x / norm;
        }
        let mut r = t;
        for j in 0..d {
            for col in 0..n {
                if let Some((row, s)) = annihilation_entry(j, col) {
                    r[(row, col)] -= transfer[(j, k)] * s;
                }
            }
        }
        span_residual = span_residual.max(libm::sqrt(r.norm_squared() / norm));
    }
    let deviation = linalg::max_abs(&(&transfer - &cmv));
    Ok(XyEquivalence {
        circuit,
        transfer,
        deviation,
        span_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn random_closed(d: usize, rng: &mut impl Rng) -> VerblunskySequence {
        let mut a: Vec<C64> = (0..d)
            .map(|_| C64::from_polar(libm::sqrt(rng.random::<f64>()), rng.random_range(-3.0..3.0)))
            .collect();
        let cap = a[d - 1].norm();
        a[d - 1] /= cap;
        VerblunskySequence::new(a).unwrap()
    }

    #[test]
    fn angle_conventions() {
        assert_eq!(
            xy_angles(linalg::ZERO, 1.0),
            (0.0, core::f64::consts::FRAC_PI_2)
        );
        let (_, theta) = xy_angles(C64::from_polar(1.0, 0.3), 0.0);
        assert_eq!(theta, 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let a = C64::from_polar(rng.random::<f64>(), rng.random_range(-3.2..3.2));
            let rho = libm::sqrt(1.0 - a.norm_sqr());
            let (chi, theta) = xy_angles(a, rho);
            assert!((-core::f64::consts::PI..core::f64::consts::PI).contains(&chi));
            assert!((0.0..=core::f64::consts::FRAC_PI_2).contains(&theta));
            assert!((xy_alpha(chi, theta) - a).norm() < 1e-12);
        }
    }

    #[test]
    fn gates_are_unitary() {
        let g = XyGate::Pair {
            site: 0,
            chi: 0.7,
            theta: 0.4,
        }
        .local_matrix();
        let m = DMatrix::from_fn(4, 4, |r, c| g[r][c]);
        assert!(linalg::unitarity_defect(&m) < 1e-14);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        let circuit = xy_circuit_build(&random_closed(6, &mut rng)).unwrap();
        assert!(linalg::unitarity_defect(&circuit.many_body_unitary().unwrap()) < 1e-12);
    }

    #[test]
    fn conjugation_matches_dense_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let circuit = xy_circuit_build(&random_closed(4, &mut rng)).unwrap();
        let u = circuit.many_body_unitary().unwrap();
        let c = annihilation_operator(4, 2);
        let want = u.adjoint() * &c * &u;
        assert!(linalg::max_abs(&(circuit.conjugate(&c).unwrap() - want)) < 1e-13);
    }

    #[test]
    fn jordan_wigner_anticommutes() {
        for j in 0..3 {
            for k in 0..3 {
                let (cj, ck) = (annihilation_operator(3, j), annihilation_operator(3, k));
                assert!(linalg::max_abs(&(&cj * &ck + &ck * &cj)) < 1e-15);
                let anti = &cj * ck.adjoint() + ck.adjoint() * &cj;
                let want = if j == k {
                    linalg::identity(8)
                } else {
                    DMatrix::zeros(8, 8)
                };
                assert!(linalg::max_abs(&(anti - want)) < 1e-15);
            }
        }
    }

    #[test]
    fn transfer_is_the_cmv_matrix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(34);
        let real = VerblunskySequence::new(vec![C64::new(0.3, 0.0), linalg::ONE]).unwrap();
        let check = xy_equivalence_check(&real, 2).unwrap();
        assert!(check.deviation < 1e-12, "{}", check.deviation);
        for d in [2, 4, 6] {
            let check = xy_equivalence_check(&random_closed(d, &mut rng), d).unwrap();
            assert!(check.deviation < 1e-10, "d={d} {}", check.deviation);
            assert!(check.span_residual < 1e-10);
        }
    }

    #[test]
    fn odd_length_is_padded() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(35);
        let seq = random_closed(3, &mut rng);
        let circuit = xy_circuit_build(&seq).unwrap();
        assert!(circuit.padded);
        assert_eq!(circuit.sites(), 4);
        let check = xy_equivalence_check(&seq, 4).unwrap();
        assert!(check.deviation < 1e-10);
        assert!(matches!(
            xy_equivalence_check(&seq, 5),
            Err(Error::OddSiteCount(5))
        ));
    }

    #[test]
    fn decoupled_sites_transfer_diagonally() {
        let alphas = [0.4, -1.3, 2.0, 0.1]
            .map(|p| C64::from_polar(1.0, p))
            .to_vec();
        let check = xy_equivalence_check(&VerblunskySequence::new(alphas).unwrap(), 4).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let x = check.transfer[(j, k)];
                if j == k {
                    assert!((x.norm() - 1.0).abs() < 1e-12);
                } else {
                    assert!(x.norm() < 1e-12);
                }
            }
        }
    }
}
