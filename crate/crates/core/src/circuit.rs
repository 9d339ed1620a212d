//! Gate-list realization of the CMV unitary `M·L` on `L` qubits.
//!
//! Basis index `n` is the computational state whose bit `q` is qubit `q`.
//! `M` acts on the aligned pairs `(2m, 2m+1)`, i.e. a 2×2 gate on qubit 0
//! multiplexed by the remaining qubits. `L` acts on `(2m+1, 2m+2)`; the
//! decrement `n ↦ n − 1 (mod 2^L)` aligns those pairs, so
//! `L = S⁺ · Mux · S⁻` and the emitted order is `S⁻, Mux_L, S⁺, Mux_M`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::krylov::{cmv_factorization, theta_block, VerblunskySequence};
use crate::linalg::{self, C64};
use crate::reductions::xy_angles;

/// Largest register handled by [`emit_circuit`].
pub const MAX_QUBITS: usize = 20;

pub type Block = [[C64; 2]; 2];

/// One branch of a multiplexor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    /// `Θ = [[ᾱ, ρ], [ρ, −α]]` with `ᾱ = e^{iχ} cos θ`, `ρ = sin θ`.
    Theta { chi: f64, theta: f64 },
    /// `diag(e^{iφ₀}, e^{iφ₁})`.
    Diagonal { phases: [f64; 2] },
}

impl Branch {
    pub fn block(&self) -> Block {
        match *self {
            Branch::Theta { chi, theta } => {
                theta_block(C64::from_polar(libm::cos(theta), -chi), libm::sin(theta))
            }
            Branch::Diagonal { phases } => [
                [C64::from_polar(1.0, phases[0]), linalg::ZERO],
                [linalg::ZERO, C64::from_polar(1.0, phases[1])],
            ],
        }
    }

    fn is_rotation(&self) -> bool {
        matches!(self, Branch::Theta { theta, .. } if *theta != 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Gate {
    /// 2×2 block on the basis states `i` and `j`.
    TwoLevel {
        i: usize,
        j: usize,
        block: Block,
    },
    /// `|n⟩ ↦ |n + delta mod 2^L⟩`.
    Shift {
        delta: i64,
    },
    /// Branch `m` acts on the pair `(2m, 2m+1)`.
    Multiplexor {
        branches: Vec<Branch>,
    },
    /// `exp(−iθσʸ/2)`.
    Ry {
        qubit: usize,
        angle: f64,
    },
    /// `exp(−iθσᶻ/2)`.
    Rz {
        qubit: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    GlobalPhase {
        angle: f64,
    },
}

impl Gate {
    fn apply(&self, v: &mut [C64]) {
        let n = v.len();
        match self {
            Gate::TwoLevel { i, j, block } => mix(v, *i, *j, block),
            Gate::Shift { delta } => {
                let shift = delta.rem_euclid(n as i64) as usize;
                v.rotate_right(shift);
            }
            Gate::Multiplexor { branches } => {
                for (m, b) in branches.iter().enumerate() {
                    mix(v, 2 * m, 2 * m + 1, &b.block());
                }
            }
            Gate::Ry { qubit, angle } => {
                let (c, s) = (libm::cos(angle / 2.0), libm::sin(angle / 2.0));
                let b = [
                    [C64::new(c, 0.0), C64::new(-s, 0.0)],
                    [C64::new(s, 0.0), C64::new(c, 0.0)],
                ];
                for_pairs(n, *qubit, |i, j| mix(v, i, j, &b));
            }
            Gate::Rz { qubit, angle } => {
                let b = [
                    [C64::from_polar(1.0, -angle / 2.0), linalg::ZERO],
                    [linalg::ZERO, C64::from_polar(1.0, angle / 2.0)],
                ];
                for_pairs(n, *qubit, |i, j| mix(v, i, j, &b));
            }
            Gate::Cnot { control, target } => {
                for_pairs(n, *target, |i, j| {
                    if i >> control & 1 == 1 {
                        v.swap(i, j);
                    }
                });
            }
            Gate::GlobalPhase { angle } => linalg::scale(C64::from_polar(1.0, *angle), v),
        }
    }

    /// Unitarity defect of the gate's defining blocks (zero for permutations
    /// and named rotations).
    pub fn unitarity_defect(&self) -> f64 {
        let block_defect = |b: &Block| {
            let m = DMatrix::from_fn(2, 2, |r, c| b[r][c]);
            linalg::unitarity_defect(&m)
        };
        match self {
            Gate::TwoLevel { block, .. } => block_defect(block),
            Gate::Multiplexor { branches } => branches
                .iter()
                .map(|b| block_defect(&b.block()))
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    }
}

fn mix(v: &mut [C64], i: usize, j: usize, b: &Block) {
    let (x, y) = (v[i], v[j]);
    v[i] = b[0][0] * x + b[0][1] * y;
    v[j] = b[1][0] * x + b[1][1] * y;
}

/// Calls `f(i, i | bit)` for every index `i` with qubit `q` clear.
fn for_pairs(n: usize, q: usize, mut f: impl FnMut(usize, usize)) {
    let bit = 1 << q;
    for i in (0..n).filter(|i| i & bit == 0) {
        f(i, i | bit);
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GateList {
    pub qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateList {
    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// Composed unitary, column by column.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut u = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut v = linalg::basis_vector(n, k);
            for g in &self.gates {
                g.apply(&mut v);
            }
            u.set_column(k, &nalgebra::DVector::from_vec(v));
        }
        u
    }

    /// Concatenation: `self` runs first.
    pub fn then(&self, other: &GateList) -> Result<GateList> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                found: other.qubits,
            });
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(GateList {
            qubits: self.qubits,
            gates,
        })
    }

    /// Plain-text listing, one gate per line. Two-level gates on states
    /// differing in one bit are written as controlled ZYZ rotations.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qubits {}", self.qubits);
        for g in &self.gates {
            let _ = match g {
                Gate::TwoLevel { i, j, block } => {
                    let (phi, beta, gamma, delta) = zyz(block);
                    let diff = i ^ j;
                    if diff.is_power_of_two() {
                        let target = diff.trailing_zeros() as usize;
                        let controls: String = (0..self.qubits)
                            .rev()
                            .map(|q| match q {
                                _ if q == target => 't',
                                _ if i >> q & 1 == 1 => '1',
                                _ => '0',
                            })
                            .collect();
                        writeln!(
                            s,
                            "cu q{target} ctrl={controls} phase={phi:.12} rz={beta:.12} ry={gamma:.12} rz={delta:.12}"
                        )
                    } else {
                        writeln!(s, "twolevel {i} {j} phase={phi:.12} rz={beta:.12} ry={gamma:.12} rz={delta:.12}")
                    }
                }
                Gate::Shift { delta } => writeln!(s, "add {delta}"),
                Gate::Multiplexor { branches } => {
                    let _ = writeln!(s, "mux q0 branches={}", branches.len());
                    for (m, b) in branches.iter().enumerate() {
                        let _ = match b {
                            Branch::Theta { chi, theta } => {
                                writeln!(s, "  {m} theta chi={chi:.12} theta={theta:.12}")
                            }
                            Branch::Diagonal { phases } => {
                                writeln!(s, "  {m} diag {:.12} {:.12}", phases[0], phases[1])
                            }
                        };
                    }
                    Ok(())
                }
                Gate::Ry { qubit, angle } => writeln!(s, "ry q{qubit} {angle:.12}"),
                Gate::Rz { qubit, angle } => writeln!(s, "rz q{qubit} {angle:.12}"),
                Gate::Cnot { control, target } => writeln!(s, "cx q{control} q{target}"),
                Gate::GlobalPhase { angle } => writeln!(s, "phase {angle:.12}"),
            };
        }
        s
    }
}

/// Applies the gates in order.
pub fn simulate_gatelist(list: &GateList, input: &[C64]) -> Result<Vec<C64>> {
    if input.len() != list.dim() {
        return Err(Error::DimensionMismatch {
            expected: list.dim(),
            found: input.len(),
        });
    }
    let mut v = input.to_vec();
    for g in &list.gates {
        g.apply(&mut v);
    }
    Ok(v)
}

fn theta_branch(alpha: C64, rho: f64) -> Branch {
    let (chi, theta) = xy_angles(alpha, rho);
    Branch::Theta { chi, theta }
}

/// Gate list for the sequence padded with `α = 1` to `2^qubits` sites.
pub fn emit_circuit(seq: &VerblunskySequence, qubits: usize) -> Result<GateList> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "qubit count {qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    let n = 1usize << qubits;
    if seq.len() > n {
        return Err(Error::CircuitTooSmall {
            krylov_dim: seq.len(),
            qubits,
        });
    }
    let form = cmv_factorization(&seq.padded(n, linalg::ONE))?;
    let seq = form.sequence();
    if qubits == 1 {
        let u = form.to_dense();
        let block = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
        return Ok(GateList {
            qubits,
            gates: vec![Gate::TwoLevel { i: 0, j: 1, block }],
        });
    }
    let (a, r) = (seq.alphas(), seq.rhos());
    let even = (0..n)
        .step_by(2)
        .map(|k| theta_branch(a[k], r[k]))
        .collect();
    let mut odd: Vec<Branch> = (1..n - 1)
        .step_by(2)
        .map(|k| theta_branch(a[k], r[k]))
        .collect();
    odd.push(Branch::Diagonal {
        phases: [linalg::arg(a[n - 1].conj()), 0.0],
    });
    Ok(GateList {
        qubits,
        gates: vec![
            Gate::Shift { delta: -1 },
            Gate::Multiplexor { branches: odd },
            Gate::Shift { delta: 1 },
            Gate::Multiplexor { branches: even },
        ],
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GateCounts {
    pub two_level: usize,
    pub shifts: usize,
    pub multiplexors: usize,
    pub branches: usize,
    /// Two-level gates plus multiplexor branches that mix their pair.
    pub rotations: usize,
    pub cnots: usize,
    pub single_qubit: usize,
}

pub fn gate_count(list: &GateList) -> GateCounts {
    let mut c = GateCounts::default();
    for g in &list.gates {
        match g {
            Gate::TwoLevel { .. } => {
                c.two_level += 1;
                c.rotations += 1;
            }
            Gate::Shift { .. } => c.shifts += 1,
            Gate::Multiplexor { branches } => {
                c.multiplexors += 1;
                c.branches += branches.len();
                c.rotations += branches.iter().filter(|b| b.is_rotation()).count();
            }
            Gate::Ry { .. } | Gate::Rz { .. } => c.single_qubit += 1,
            Gate::Cnot { .. } => c.cnots += 1,
            Gate::GlobalPhase { .. } => {}
        }
    }
    c
}

/// Largest norm that leaves the first `krylov_dim` basis states when the
/// circuit acts on each of them.
pub fn decoupling_leakage(list: &GateList, krylov_dim: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..krylov_dim.min(list.dim()) {
        let out = simulate_gatelist(list, &linalg::basis_vector(list.dim(), k))?;
        worst = worst.max(linalg::norm(&out[krylov_dim..]));
    }
    Ok(worst)
}

/// `U = e^{iφ} Rz(β) Ry(γ) Rz(δ)`, returned as `(φ, β, γ, δ)`.
pub fn zyz(u: &Block) -> (f64, f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let phi = linalg::arg(det) / 2.0;
    let w = C64::from_polar(1.0, -phi);
    let (a, b) = (u[0][0] * w, u[1][0] * w);
    let gamma = 2.0 * libm::atan2(b.norm(), a.norm());
    let sum = if a.norm() > 1e-14 {
        -2.0 * linalg::arg(a)
    } else {
        0.0
    };
    let diff = if b.norm() > 1e-14 {
        2.0 * linalg::arg(b)
    } else {
        0.0
    };
    (phi, (sum + diff) / 2.0, gamma, (sum - diff) / 2.0)
}

/// Uniformly controlled rotation on `target`; `angles[m]` applies when the
/// controls read `m` (bit `i` of `m` is `controls[i]`). Gray-code form with
/// `2^k` rotations and `2^k` CNOTs: rotation `i` sees the target flipped by
/// the controls in `gray(i)`, so `θ_m = Σ_i (−1)^{|m ∧ gray(i)|} θ'_i`.
fn uniformly_controlled(
    axis_y: bool,
    target: usize,
    controls: &[usize],
    angles: &[f64],
    out: &mut Vec<Gate>,
) {
    let k = controls.len();
    let n = 1usize << k;
    let gray = |i: usize| i ^ (i >> 1);
    let sign = |m: usize, g: usize| {
        if (m & g).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    for i in 0..n {
        let angle = (0..n).map(|m| sign(m, gray(i)) * angles[m]).sum::<f64>() / n as f64;
        out.push(if axis_y {
            Gate::Ry {
                qubit: target,
                angle,
            }
        } else {
            Gate::Rz {
                qubit: target,
                angle,
            }
        });
        if k > 0 {
            let flip = gray(i) ^ gray((i + 1) % n);
            out.push(Gate::Cnot {
                control: controls[flip.trailing_zeros() as usize],
                target,
            });
        }
    }
}

/// Diagonal `e^{iφ_m}` on the register formed by `qubits` (bit `i` of `m`
/// is `qubits[i]`).
fn diagonal(qubits: &[usize], phases: &[f64], out: &mut Vec<Gate>) {
    let Some((&last, rest)) = qubits.split_last() else {
        if phases[0] != 0.0 {
            out.push(Gate::GlobalPhase { angle: phases[0] });
        }
        return;
    };
    let half = phases.len() / 2;
    let mean: Vec<f64> = (0..half)
        .map(|m| (phases[m] + phases[m + half]) / 2.0)
        .collect();
    let rz: Vec<f64> = (0..half).map(|m| phases[m + half] - phases[m]).collect();
    uniformly_controlled(false, last, rest, &rz, out);
    diagonal(rest, &mean, out);
}

/// Replaces every multiplexor by single-qubit rotations and CNOTs.
pub fn demultiplex(list: &GateList) -> GateList {
    let controls: Vec<usize> = (1..list.qubits).collect();
    let mut gates = Vec::new();
    for g in &list.gates {
        let Gate::Multiplexor { branches } = g else {
            gates.push(g.clone());
            continue;
        };
        let euler: Vec<_> = branches.iter().map(|b| zyz(&b.block())).collect();
        let pick = |f: fn(&(f64, f64, f64, f64)) -> f64| euler.iter().map(f).collect::<Vec<_>>();
        uniformly_controlled(false, 0, &controls, &pick(|e| e.3), &mut gates);
        uniformly_controlled(true, 0, &controls, &pick(|e| e.2), &mut gates);
        uniformly_controlled(false, 0, &controls, &pick(|e| e.1), &mut gates);
        diagonal(&controls, &pick(|e| e.0), &mut gates);
    }
    GateList {
        qubits: list.qubits,
        gates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_closed(d: usize, rng: &mut impl Rng) -> VerblunskySequence {
        let mut a: Vec<C64> = (0..d)
            .map(|_| C64::from_polar(libm::sqrt(rng.random::<f64>()), rng.random_range(-3.0..3.0)))
            .collect();
        let cap = a[d - 1].norm();
        a[d - 1] /= cap;
        VerblunskySequence::new(a).unwrap()
    }

    fn padded_cmv(seq: &VerblunskySequence, qubits: usize) -> DMatrix<C64> {
        cmv_factorization(&seq.padded(1 << qubits, linalg::ONE))
            .unwrap()
            .to_dense()
    }

    #[test]
    fn single_qubit_is_one_gate() {
        let seq =
            VerblunskySequence::new(vec![C64::new(0.2, 0.5), C64::from_polar(1.0, 0.7)]).unwrap();
        let list = emit_circuit(&seq, 1).unwrap();
        assert_eq!(list.gates.len(), 1);
        assert_eq!(gate_count(&list).rotations, 1);
        assert!(linalg::max_abs(&(list.to_dense() - padded_cmv(&seq, 1))) < 1e-14);
    }

    #[test]
    fn free_chain_two_qubits() {
        let seq = VerblunskySequence::free(4, C64::from_polar(1.0, -0.4));
        let list = emit_circuit(&seq, 2).unwrap();
        assert!(linalg::max_abs(&(list.to_dense() - padded_cmv(&seq, 2))) < 1e-12);
    }

    #[test]
    fn random_chains_are_reproduced() {
        let mut r = rng(41);
        for qubits in 1..=6 {
            for d in [1usize << qubits, (1usize << qubits) - 1, 1] {
                let seq = random_closed(d, &mut r);
                let list = emit_circuit(&seq, qubits).unwrap();
                let dev = linalg::max_abs(&(list.to_dense() - padded_cmv(&seq, qubits)));
                assert!(dev < 1e-10, "L={qubits} D={d} {dev}");
                assert!(decoupling_leakage(&list, d).unwrap() < 1e-10);
                assert!(list.gates.iter().all(|g| g.unitarity_defect() < 1e-12));
                let counts = gate_count(&list);
                assert!(counts.rotations <= 2 << qubits);
            }
        }
    }

    #[test]
    fn too_small_register_is_rejected() {
        let seq = VerblunskySequence::free(5, linalg::ONE);
        assert!(matches!(
            emit_circuit(&seq, 2),
            Err(Error::CircuitTooSmall { .. })
        ));
    }

    #[test]
    fn zyz_roundtrip() {
        let mut r = rng(42);
        for _ in 0..50 {
            let u = linalg::haar_unitary(2, &mut r);
            let block = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
            let (phi, beta, gamma, delta) = zyz(&block);
            let list = GateList {
                qubits: 1,
                gates: vec![
                    Gate::Rz {
                        qubit: 0,
                        angle: delta,
                    },
                    Gate::Ry {
                        qubit: 0,
                        angle: gamma,
                    },
                    Gate::Rz {
                        qubit: 0,
                        angle: beta,
                    },
                    Gate::GlobalPhase { angle: phi },
                ],
            };
            assert!(linalg::max_abs(&(list.to_dense() - &u)) < 1e-12);
        }
        let diag = [
            [C64::from_polar(1.0, 0.3), linalg::ZERO],
            [linalg::ZERO, C64::from_polar(1.0, -1.1)],
        ];
        let (phi, beta, gamma, delta) = zyz(&diag);
        let list = GateList {
            qubits: 1,
            gates: vec![
                Gate::Rz {
                    qubit: 0,
                    angle: delta,
                },
                Gate::Ry {
                    qubit: 0,
                    angle: gamma,
                },
                Gate::Rz {
                    qubit: 0,
                    angle: beta,
                },
                Gate::GlobalPhase { angle: phi },
            ],
        };
        let want = DMatrix::from_fn(2, 2, |r, c| diag[r][c]);
        assert!(linalg::max_abs(&(list.to_dense() - want)) < 1e-12);
    }

    #[test]
    fn demultiplexed_circuit_is_equivalent() {
        let mut r = rng(43);
        for qubits in 1..=5 {
            let seq = random_closed(1 << qubits, &mut r);
            let list = emit_circuit(&seq, qubits).unwrap();
            let flat = demultiplex(&list);
            assert!(flat
                .gates
                .iter()
                .all(|g| !matches!(g, Gate::Multiplexor { .. })));
            assert!(
                linalg::max_abs(&(flat.to_dense() - list.to_dense())) < 1e-10,
                "L={qubits}"
            );
            assert!(gate_count(&flat).cnots <= 4 << qubits);
        }
    }

    #[test]
    fn composition_is_sequential() {
        let mut r = rng(44);
        let a = emit_circuit(&random_closed(8, &mut r), 3).unwrap();
        let b = emit_circuit(&random_closed(6, &mut r), 3).unwrap();
        let ab = a.then(&b).unwrap();
        assert!(linalg::max_abs(&(ab.to_dense() - b.to_dense() * a.to_dense())) < 1e-12);
        let empty = GateList {
            qubits: 3,
            gates: Vec::new(),
        };
        assert!(linalg::max_abs(&(empty.to_dense() - linalg::identity(8))) < 1e-15);
        let psi = linalg::random_state(8, &mut r);
        let out = simulate_gatelist(&a, &psi).unwrap();
        let mut want = vec![linalg::ZERO; 8];
        linalg::matvec(&a.to_dense(), &psi, &mut want);
        assert!(linalg::max_abs_diff(&out, &want) < 1e-13);
        assert!(simulate_gatelist(&a, &psi[..4]).is_err());
    }

    #[test]
    fn text_listing() {
        let seq = VerblunskySequence::free(4, linalg::ONE);
        let text = emit_circuit(&seq, 2).unwrap().to_text();
        assert!(text.starts_with("qubits 2\nadd -1\nmux q0 branches=2\n"));
        let one = emit_circuit(&VerblunskySequence::free(2, linalg::ONE), 1)
            .unwrap()
            .to_text();
        assert!(one.contains("cu q0 ctrl=t"));
    }
}
