//! Spin-`J` operators and the kicked top
//! `U = exp(−i κx/2J Jx²) exp(−i κz/2J Jz²) exp(−i b·J)`.
//!
//! Basis order is `|J, m⟩` with `m = J, J−1, …, −J`. Spins are given by
//! `two_j = 2J` so half-integer values are exact.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::sector::{Axis, SectorKind, SymmetrySector};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::operator::Unitary;

fn m_of(two_j: usize, i: usize) -> f64 {
    0.5 * two_j as f64 - i as f64
}

/// `(Jx, Jy, Jz)` in the `Jz` eigenbasis.
pub fn angular_momentum_ops(two_j: usize) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let d = two_j + 1;
    let j = 0.5 * two_j as f64;
    let mut jx = DMatrix::zeros(d, d);
    let mut jy = DMatrix::zeros(d, d);
    let mut jz = DMatrix::zeros(d, d);
    for i in 0..d {
        let m = m_of(two_j, i);
        jz[(i, i)] = C64::new(m, 0.0);
        if i > 0 {
            // ⟨m+1|J+|m⟩ with |m+1⟩ at index i−1
            let c = libm::sqrt(j * (j + 1.0) - m * (m + 1.0));
            jx[(i - 1, i)] = C64::new(0.5 * c, 0.0);
            jx[(i, i - 1)] = C64::new(0.5 * c, 0.0);
            jy[(i - 1, i)] = C64::new(0.0, -0.5 * c);
            jy[(i, i - 1)] = C64::new(0.0, 0.5 * c);
        }
    }
    (jx, jy, jz)
}

/// Eigenvalues (ascending, snapped to multiples of 1/2) and eigenvectors of
/// `n̂·J` for a nonzero direction `n`.
///
/// `n̂·J = e^{−iφJz}(sin θ Jx + cos θ Jz)e^{iφJz}`, and the bracketed
/// operator is real tridiagonal, so only a real symmetric eigenproblem is
/// solved.
pub fn spin_axis_eigen(two_j: usize, n: [f64; 3]) -> (Vec<f64>, DMatrix<C64>) {
    let d = two_j + 1;
    let len = libm::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    let (nx, ny, nz) = (n[0] / len, n[1] / len, n[2] / len);
    let sin_t = libm::sqrt(nx * nx + ny * ny);
    let cos_t = nz;
    let phi = libm::atan2(ny, nx);
    let j = 0.5 * two_j as f64;
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let m = m_of(two_j, i);
        a[(i, i)] = cos_t * m;
        if i > 0 {
            let c = 0.5 * sin_t * libm::sqrt(j * (j + 1.0) - m * (m + 1.0));
            a[(i - 1, i)] = c;
            a[(i, i - 1)] = c;
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order
        .iter()
        .map(|&k| libm::round(2.0 * eig.eigenvalues[k]) * 0.5)
        .collect();
    let vectors = DMatrix::from_fn(d, d, |i, c| {
        let m = m_of(two_j, i);
        C64::from_polar(1.0, -phi * m) * eig.eigenvectors[(i, order[c])]
    });
    (values, vectors)
}

/// Spin coherent state `e^{−iφJz} e^{−iθJy} |J, J⟩`:
/// `c_m = √C(2J, J−m) cos^{J+m}(θ/2) sin^{J−m}(θ/2) e^{−imφ}`.
pub fn coherent_state(two_j: usize, theta: f64, phi: f64) -> Vec<C64> {
    let d = two_j + 1;
    let (c, s) = (libm::cos(0.5 * theta), libm::sin(0.5 * theta));
    let ln_fact = |n: usize| libm::lgamma(n as f64 + 1.0);
    (0..d)
        .map(|i| {
            // i = J − m
            let up = two_j - i;
            let mag = if (c == 0.0 && up > 0) || (s == 0.0 && i > 0) {
                0.0
            } else {
                let mut ln = 0.5 * (ln_fact(two_j) - ln_fact(i) - ln_fact(up));
                if up > 0 {
                    ln += up as f64 * libm::log(c.abs());
                }
                if i > 0 {
                    ln += i as f64 * libm::log(s.abs());
                }
                let sign = if (c < 0.0 && up % 2 == 1) != (s < 0.0 && i % 2 == 1) {
                    -1.0
                } else {
                    1.0
                };
                sign * libm::exp(ln)
            };
            C64::from_polar(mag, -m_of(two_j, i) * phi)
        })
        .collect()
}

/// `⟨v|J|v⟩` for a state in the `Jz` basis.
pub fn spin_expectation(two_j: usize, v: &[C64]) -> [f64; 3] {
    let (jx, jy, jz) = angular_momentum_ops(two_j);
    let ev = |m: &DMatrix<C64>| {
        let mut out = vec![linalg::ZERO; v.len()];
        linalg::matvec(m, v, &mut out);
        linalg::dot(v, &out).re
    };
    [ev(&jx), ev(&jy), ev(&jz)]
}

/// Isometry onto an eigenspace of `exp(iπ J_axis)`.
pub fn parity_isometry(two_j: usize, axis: Axis, even: bool) -> SymmetrySector {
    let (values, vectors) = spin_axis_eigen(two_j, axis.unit());
    parity_columns(two_j, axis, even, &values, &vectors)
}

fn parity_columns(
    two_j: usize,
    axis: Axis,
    even: bool,
    values: &[f64],
    vectors: &DMatrix<C64>,
) -> SymmetrySector {
    let j = 0.5 * two_j as f64;
    let keep: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &m)| {
            let diff = libm::round(j - m) as i64;
            (diff % 2 == 0) == even
        })
        .map(|(k, _)| k)
        .collect();
    let p = DMatrix::from_fn(vectors.nrows(), keep.len(), |i, c| vectors[(i, keep[c])]);
    SymmetrySector::from_columns(SectorKind::Parity { axis, even }, p)
}

/// `exp(iπ J_axis)` as a dense matrix.
pub fn parity_operator(two_j: usize, axis: Axis) -> DMatrix<C64> {
    let (values, vectors) = spin_axis_eigen(two_j, axis.unit());
    linalg::hermitian_function(&values, &vectors, |m| {
        C64::from_polar(1.0, core::f64::consts::PI * m)
    })
}

/// Projects a dense `U` onto a parity sector after checking
/// `max |[U, R]| ≤ tol` for `R = exp(iπ J_axis)`.
pub fn parity_sector(
    u: &DMatrix<C64>,
    two_j: usize,
    axis: Axis,
    even: bool,
    tol: f64,
) -> Result<(DMatrix<C64>, SymmetrySector)> {
    if u.nrows() != two_j + 1 {
        return Err(Error::DimensionMismatch {
            expected: two_j + 1,
            found: u.nrows(),
        });
    }
    let r = parity_operator(two_j, axis);
    let deviation = linalg::max_abs(&(u * &r - &r * u));
    if deviation > tol {
        return Err(Error::SymmetryViolated { deviation });
    }
    let sector = parity_isometry(two_j, axis, even);
    Ok((sector.project_dense(u), sector))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedTopParams {
    pub two_j: usize,
    pub kappa_x: f64,
    pub kappa_z: f64,
    pub b: [f64; 3],
}

impl KickedTopParams {
    /// `κz = 0`, `b = (1.7, 0, 0)`: `U` is a function of `Jx`.
    pub fn integrable(two_j: usize, kappa_x: f64) -> Self {
        Self {
            two_j,
            kappa_x,
            kappa_z: 0.0,
            b: [1.7, 0.0, 0.0],
        }
    }

    /// `κz = 0.5`, `b = (0, 1.7, 0)`.
    pub fn chaotic(two_j: usize, kappa_x: f64) -> Self {
        Self {
            two_j,
            kappa_x,
            kappa_z: 0.5,
            b: [0.0, 1.7, 0.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.two_j + 1
    }
}

#[derive(Debug)]
struct AxisEigen {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl AxisEigen {
    fn new(two_j: usize, n: [f64; 3]) -> Self {
        let (values, vectors) = spin_axis_eigen(two_j, n);
        Self { values, vectors }
    }

    /// `out = V diag(phase(λ)) V† v`
    fn apply<F: Fn(f64) -> C64>(&self, phase: F, v: &[C64], out: &mut [C64]) {
        let mut tmp = vec![linalg::ZERO; v.len()];
        linalg::matvec_adjoint(&self.vectors, v, &mut tmp);
        for (t, &l) in tmp.iter_mut().zip(&self.values) {
            *t *= phase(l);
        }
        linalg::matvec(&self.vectors, &tmp, out);
    }
}

/// Matrix-free kicked-top Floquet operator.
#[derive(Debug, Clone)]
pub struct KickedTop {
    params: KickedTopParams,
    x: Arc<AxisEigen>,
    field: Option<Arc<AxisEigen>>,
}

pub fn kicked_top(params: KickedTopParams) -> KickedTop {
    let b = params.b;
    let bn = libm::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    KickedTop {
        params,
        x: Arc::new(AxisEigen::new(params.two_j, Axis::X.unit())),
        field: (bn > 0.0).then(|| Arc::new(AxisEigen::new(params.two_j, b))),
    }
}

impl KickedTop {
    pub fn params(&self) -> &KickedTopParams {
        &self.params
    }

    /// Same model with a different `κx`, reusing the eigendecompositions.
    pub fn with_kappa_x(&self, kappa_x: f64) -> Self {
        let mut out = self.clone();
        out.params.kappa_x = kappa_x;
        out
    }

    fn field_strength(&self) -> f64 {
        let b = self.params.b;
        libm::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2])
    }

    fn z_phase(&self, i: usize, sign: f64) -> C64 {
        let m = m_of(self.params.two_j, i);
        C64::from_polar(
            1.0,
            -sign * self.params.kappa_z / self.params.two_j as f64 * m * m,
        )
    }

    fn x_phase(&self, l: f64, sign: f64) -> C64 {
        C64::from_polar(
            1.0,
            -sign * self.params.kappa_x / self.params.two_j as f64 * l * l,
        )
    }
}

impl Unitary for KickedTop {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let mut a = v.to_vec();
        if let Some(f) = &self.field {
            let s = self.field_strength();
            f.apply(|l| C64::from_polar(1.0, -s * l), v, &mut a);
        }
        for (i, x) in a.iter_mut().enumerate() {
            *x *= self.z_phase(i, 1.0);
        }
        self.x.apply(|l| self.x_phase(l, 1.0), &a, out);
    }

    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        let mut a = vec![linalg::ZERO; v.len()];
        self.x.apply(|l| self.x_phase(l, -1.0), v, &mut a);
        for (i, x) in a.iter_mut().enumerate() {
            *x *= self.z_phase(i, -1.0);
        }
        match &self.field {
            Some(f) => {
                let s = self.field_strength();
                f.apply(|l| C64::from_polar(1.0, s * l), &a, out);
            }
            None => out.copy_from_slice(&a),
        }
    }
}

/// Kicked tops sharing `J`, `κz`, `b` and a parity sector, for scans over
/// `κx`. The sector unitary is `A diag(e^{−iκx λ²/2J}) B` with
/// `A = P†V_x` and `B = V_x† e^{−iκz Jz²/2J} e^{−ib·J} P` precomputed.
#[derive(Debug, Clone)]
pub struct KickedTopFamily {
    pub base: KickedTopParams,
    pub sector: SymmetrySector,
    x_values: Vec<f64>,
    a: DMatrix<C64>,
    b: DMatrix<C64>,
}

impl KickedTopFamily {
    /// Builds the family after checking the parity symmetry on the base
    /// parameters with a matrix-free commutator test.
    pub fn new(base: KickedTopParams, axis: Axis, even: bool) -> Result<Self> {
        let top = kicked_top(base);
        let deviation = parity_commutator(&top, axis);
        if deviation > 1e-9 {
            return Err(Error::SymmetryViolated { deviation });
        }
        let sector = parity_isometry(base.two_j, axis, even);
        let p = sector.matrix();
        let x = &top.x;
        let a = x.vectors.adjoint() * &p;
        let a = a.adjoint();
        // B = V_x† Z F P, built column by column from the matrix-free layers
        let zero_kx = top.with_kappa_x(0.0);
        let mut fp = DMatrix::zeros(base.dim(), p.ncols());
        let mut col = vec![linalg::ZERO; base.dim()];
        for c in 0..p.ncols() {
            zero_kx.apply(p.column(c).as_slice(), &mut col);
            fp.column_mut(c).copy_from_slice(&col);
        }
        let b = x.vectors.adjoint() * fp;
        Ok(Self {
            base,
            sector,
            x_values: x.values.clone(),
            a,
            b,
        })
    }

    /// Dense sector unitary `P† U(κx) P`.
    pub fn sector_unitary(&self, kappa_x: f64) -> DMatrix<C64> {
        let two_j = self.base.two_j as f64;
        let mut b = self.b.clone();
        for (mut row, &l) in b.row_iter_mut().zip(&self.x_values) {
            let ph = C64::from_polar(1.0, -kappa_x / two_j * l * l);
            for x in row.iter_mut() {
                *x *= ph;
            }
        }
        &self.a * b
    }

    /// Coherent state restricted to the sector and renormalized.
    pub fn coherent_seed(&self, theta: f64, phi: f64) -> Result<Vec<C64>> {
        let full = coherent_state(self.base.two_j, theta, phi);
        let mut v = self.sector.restrict(&full);
        let n = linalg::normalize(&mut v);
        if !(n > 1e-12) {
            return Err(Error::ZeroSeed);
        }
        Ok(v)
    }
}

/// `max ‖U R v − R U v‖` over a few random `v`, `R = exp(iπ J_axis)`.
pub fn parity_commutator<U: Unitary>(u: &U, axis: Axis) -> f64 {
    use rand::SeedableRng;
    let two_j = u.dim() - 1;
    let r = AxisEigen::new(two_j, axis.unit());
    let apply_r = |v: &[C64]| {
        let mut out = vec![linalg::ZERO; v.len()];
        r.apply(
            |m| C64::from_polar(1.0, core::f64::consts::PI * m),
            v,
            &mut out,
        );
        out
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7091);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let v = linalg::random_state(u.dim(), &mut rng);
        let a = u.apply_vec(&apply_r(&v));
        let b = apply_r(&u.apply_vec(&v));
        worst = worst.max(linalg::max_abs_diff(&a, &b));
    }
    worst
}
