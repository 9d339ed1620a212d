use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{self, C64};
use crate::operator::Unitary;

/// Which symmetry a sector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorKind {
    /// Eigenspace of `exp(iπ J_axis)`; `even` contains the highest-weight
    /// state of `J_axis`.
    Parity { axis: Axis, even: bool },
    /// Eigenspace of the cyclic shift with eigenvalue `e^{2πik/L}`.
    Momentum { sites: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Isometry {
    /// `d × s`, orthonormal columns.
    Dense(DMatrix<C64>),
    /// For each full-space basis state, its sector coordinate and amplitude.
    Orbits {
        entries: Vec<Option<(usize, C64)>>,
        dim: usize,
    },
}

/// Isometry `P` from a symmetry sector into the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrySector {
    pub kind: SectorKind,
    iso: Isometry,
}

impl SymmetrySector {
    pub fn from_columns(kind: SectorKind, columns: DMatrix<C64>) -> Self {
        Self {
            kind,
            iso: Isometry::Dense(columns),
        }
    }

    pub(crate) fn from_orbits(
        kind: SectorKind,
        entries: Vec<Option<(usize, C64)>>,
        dim: usize,
    ) -> Self {
        Self {
            kind,
            iso: Isometry::Orbits { entries, dim },
        }
    }

    /// Full Hilbert-space dimension.
    pub fn full_dim(&self) -> usize {
        match &self.iso {
            Isometry::Dense(p) => p.nrows(),
            Isometry::Orbits { entries, .. } => entries.len(),
        }
    }

    /// Sector dimension.
    pub fn dim(&self) -> usize {
        match &self.iso {
            Isometry::Dense(p) => p.ncols(),
            Isometry::Orbits { dim, .. } => *dim,
        }
    }

    /// `P v`
    pub fn embed(&self, v: &[C64]) -> Vec<C64> {
        match &self.iso {
            Isometry::Dense(p) => {
                let mut out = vec![linalg::ZERO; p.nrows()];
                linalg::matvec(p, v, &mut out);
                out
            }
            Isometry::Orbits { entries, .. } => entries
                .iter()
                .map(|e| e.map_or(linalg::ZERO, |(a, c)| c * v[a]))
                .collect(),
        }
    }

    /// `P† v`
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        match &self.iso {
            Isometry::Dense(p) => {
                let mut out = vec![linalg::ZERO; p.ncols()];
                linalg::matvec_adjoint(p, v, &mut out);
                out
            }
            Isometry::Orbits { entries, dim } => {
                let mut out = vec![linalg::ZERO; *dim];
                for (x, e) in v.iter().zip(entries) {
                    if let Some((a, c)) = e {
                        out[*a] += c.conj() * x;
                    }
                }
                out
            }
        }
    }

    /// Dense `P`.
    pub fn matrix(&self) -> DMatrix<C64> {
        match &self.iso {
            Isometry::Dense(p) => p.clone(),
            Isometry::Orbits { entries, dim } => {
                let mut p = DMatrix::zeros(entries.len(), *dim);
                for (s, e) in entries.iter().enumerate() {
                    if let Some((a, c)) = e {
                        p[(s, *a)] = *c;
                    }
                }
                p
            }
        }
    }

    /// `P†UP` as a dense matrix.
    pub fn project_dense(&self, u: &DMatrix<C64>) -> DMatrix<C64> {
        let p = self.matrix();
        p.adjoint() * u * p
    }
}

/// `P†UP` applied matrix-free.
#[derive(Debug, Clone)]
pub struct ProjectedUnitary<'a, U> {
    pub inner: U,
    pub sector: &'a SymmetrySector,
}

impl<'a, U: Unitary> ProjectedUnitary<'a, U> {
    pub fn new(inner: U, sector: &'a SymmetrySector) -> Self {
        Self { inner, sector }
    }
}

impl<U: Unitary> Unitary for ProjectedUnitary<'_, U> {
    fn dim(&self) -> usize {
        self.sector.dim()
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let full = self.sector.embed(v);
        let img = self.inner.apply_vec(&full);
        out.copy_from_slice(&self.sector.restrict(&img));
    }

    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        let full = self.sector.embed(v);
        let img = self.inner.apply_adjoint_vec(&full);
        out.copy_from_slice(&self.sector.restrict(&img));
    }
}
