//! End-to-end oracle suite for the recursions, reductions and circuit
//! emitter.

use std::collections::BTreeMap;

use cmv_krylov::circuit::{decoupling_leakage, demultiplex, emit_circuit, gate_count};
use cmv_krylov::ensembles::realization_rng;
use cmv_krylov::models::superop::{dense_superoperator, vectorize};
use cmv_krylov::reductions::{
    hankel_determinant_basis, phase_free_distance, real_alpha_lanczos_route, small_t_check,
    toeplitz_determinant_basis, xy_equivalence_check, XY_MAX_SITES,
};
use cmv_krylov::{
    cmv_build, cmv_factorization, hessenberg_matrix, lanczos, linalg, szego, DenseOperator,
    KrylovOptions, VerblunskySequence, C64,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value < threshold`.
    Below,
    /// `value ≤ threshold`.
    AtMost,
    /// `value ≥ threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub deviation: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(
        name: &str,
        parameters: Value,
        deviation: f64,
        threshold: f64,
        comparison: Comparison,
    ) -> Self {
        let passed = match comparison {
            Comparison::Below => deviation < threshold,
            Comparison::AtMost => deviation <= threshold,
            Comparison::AtLeast => deviation >= threshold,
        };
        let parameters = match parameters {
            Value::Object(m) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Self {
            name: name.to_string(),
            parameters,
            deviation,
            threshold,
            comparison,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Replaces the threshold of every deviation check.
    pub tol: Option<f64>,
    /// Extra sequences run through the XY and circuit checks.
    pub sequences: Vec<VerblunskySequence>,
}

struct Suite {
    tol: Option<f64>,
    checks: Vec<Check>,
}

impl Suite {
    fn deviation(&mut self, name: &str, params: Value, value: f64, threshold: f64) {
        let t = self.tol.unwrap_or(threshold);
        self.checks
            .push(Check::new(name, params, value, t, Comparison::Below));
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }
}

fn alpha_distance(a: &VerblunskySequence, b: &VerblunskySequence) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.alphas()
        .iter()
        .zip(b.alphas())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn recursion_checks(s: &mut Suite, seed: u64) -> CliResult<()> {
    let opts = KrylovOptions::default();
    for (i, d) in [24usize, 32].into_iter().enumerate() {
        let mut rng = realization_rng(seed, i as u64);
        let u = DenseOperator::new(linalg::haar_unitary(d, &mut rng));
        let psi = linalg::random_state(d, &mut rng);
        let (sz, sb) = szego(&u, &psi, &opts)?;
        let (cm, cb) = cmv_build(&u, &psi, &opts)?;
        let p = json!({ "d": d });
        s.deviation(
            "szego-vs-cmv-alphas",
            p.clone(),
            alpha_distance(&sz, &cm),
            1e-8,
        );
        let (off, diag) = cb.orthonormality_defect();
        s.deviation("cmv-basis-orthonormality", p.clone(), off.max(diag), 1e-8);
        let h = hessenberg_matrix(&sz)?;
        s.deviation(
            "hessenberg-matrix-elements",
            p.clone(),
            linalg::max_abs(&(sb.matrix_elements(&u) - h)),
            1e-8,
        );
        let form = cmv_factorization(&cm)?;
        s.deviation(
            "cmv-matrix-elements",
            p.clone(),
            linalg::max_abs(&(cb.matrix_elements(&u) - form.to_dense())),
            1e-8,
        );
        s.deviation("cmv-bandwidth", p.clone(), form.bandwidth_defect(), 1e-8);
        let toeplitz = (0..=6)
            .map(|n| {
                Ok(phase_free_distance(
                    &toeplitz_determinant_basis(&u, &psi, n)?,
                    &sb.vectors[n],
                ))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        s.deviation(
            "toeplitz-determinant-basis",
            json!({ "d": d, "n_max": 6 }),
            toeplitz.into_iter().fold(0.0, f64::max),
            1e-8,
        );
    }
    let mut rng = realization_rng(seed, 10);
    let h = DenseOperator::new(linalg::random_hermitian(20, &mut rng));
    let psi = linalg::random_state(20, &mut rng);
    let (_, lb) = lanczos(&h, &psi, &opts)?;
    let hankel = (0..=5)
        .map(|n| {
            Ok(phase_free_distance(
                &hankel_determinant_basis(&h, &psi, n)?,
                &lb.vectors[n],
            ))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    s.deviation(
        "hankel-determinant-basis",
        json!({ "d": 20, "n_max": 5 }),
        hankel.into_iter().fold(0.0, f64::max),
        1e-8,
    );
    Ok(())
}

fn small_t_checks(s: &mut Suite, seed: u64) -> CliResult<()> {
    let mut rng = realization_rng(seed, 20);
    let h = linalg::random_hermitian(32, &mut rng);
    let psi = linalg::random_state(32, &mut rng);
    let ts = [0.04, 0.02, 0.01];
    let report = small_t_check(&h, &psi, &ts, 5)?;
    let order = report
        .orders()
        .last()
        .map(|o| o.iter().copied().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN);
    s.push(Check::new(
        "small-t-alpha-order",
        json!({ "d": 32, "t": ts, "n_max": 5 }),
        order,
        2.5,
        Comparison::AtLeast,
    ));
    let fine = small_t_check(&h, &psi, &[1e-3], 5)?;
    let rho = fine.rows[0]
        .rho_ratio
        .iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);
    s.push(Check::new(
        "small-t-rho-ratio",
        json!({ "d": 32, "t": 1e-3 }),
        rho,
        0.01,
        Comparison::Below,
    ));
    Ok(())
}

fn real_alpha_checks(s: &mut Suite, seed: u64) -> CliResult<()> {
    let (mut route, mut relation, mut imag) = (0.0f64, 0.0f64, 0.0f64);
    let instances = 10;
    for i in 0..instances {
        let mut rng = realization_rng(seed, 30 + i);
        let u = linalg::haar_unitary(4, &mut rng);
        let o = linalg::random_hermitian(4, &mut rng);
        let r = real_alpha_lanczos_route(
            &dense_superoperator(&u),
            &vectorize(&o),
            &KrylovOptions::default(),
            1e-8,
        )?;
        route = route.max(r.route_deviation);
        relation = relation.max(r.relation_deviation);
        imag = imag.max(r.direct.max_imag());
    }
    let p = json!({ "operator_dim": 16, "instances": instances });
    s.deviation("real-alpha-route", p.clone(), route, 1e-6);
    s.deviation("real-alpha-lanczos-relations", p.clone(), relation, 1e-6);
    s.deviation("hermitian-seed-real-alphas", p, imag, 1e-8);
    Ok(())
}

fn random_closed_sequence(len: usize, seed: u64, index: u64) -> CliResult<VerblunskySequence> {
    use rand::Rng;
    let mut rng = realization_rng(seed, index);
    let mut a: Vec<C64> = (0..len)
        .map(|_| {
            let r = 0.9 * rng.random::<f64>().sqrt();
            C64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
        })
        .collect();
    let last = a[len - 1];
    a[len - 1] = last / last.norm();
    Ok(VerblunskySequence::new(a)?)
}

fn xy_check(s: &mut Suite, seq: &VerblunskySequence, d: usize, label: &str) -> CliResult<()> {
    let r = xy_equivalence_check(seq, d)?;
    s.deviation(
        "xy-equivalence",
        json!({ "sites": d, "sequence": label }),
        r.deviation,
        1e-10,
    );
    Ok(())
}

fn circuit_check(
    s: &mut Suite,
    seq: &VerblunskySequence,
    qubits: usize,
    label: &str,
) -> CliResult<()> {
    let list = emit_circuit(seq, qubits)?;
    let n = 1usize << qubits;
    let want = cmv_factorization(&seq.padded(n, linalg::ONE))?.to_dense();
    let p = json!({ "qubits": qubits, "sequence": label });
    s.deviation(
        "circuit-exact",
        p.clone(),
        linalg::max_abs(&(list.to_dense() - &want)),
        1e-10,
    );
    if seq.is_closed() {
        s.deviation(
            "circuit-decoupling-leakage",
            p.clone(),
            decoupling_leakage(&list, seq.len())?,
            1e-10,
        );
    }
    let counts = gate_count(&list);
    s.push(Check::new(
        "circuit-rotation-count",
        p.clone(),
        counts.rotations as f64,
        (2 * n) as f64,
        Comparison::AtMost,
    ));
    let flat = demultiplex(&list);
    s.deviation(
        "circuit-demultiplexed",
        p.clone(),
        linalg::max_abs(&(flat.to_dense() - &want)),
        1e-10,
    );
    s.push(Check::new(
        "circuit-cnot-count",
        p,
        gate_count(&flat).cnots as f64,
        (4 * n) as f64,
        Comparison::AtMost,
    ));
    Ok(())
}

fn qubits_for(len: usize) -> usize {
    let mut q = 1;
    while (1usize << q) < len {
        q += 1;
    }
    q
}

pub fn run_verify(cfg: &VerifyConfig, seed: u64) -> CliResult<VerifyReport> {
    let mut s = Suite {
        tol: cfg.tol,
        checks: Vec::new(),
    };
    recursion_checks(&mut s, seed)?;
    small_t_checks(&mut s, seed)?;
    real_alpha_checks(&mut s, seed)?;
    for d in [2usize, 4, 6] {
        for i in 0..10 {
            let seq = random_closed_sequence(d, seed, 100 + 10 * d as u64 + i)?;
            xy_check(&mut s, &seq, d, &format!("random-{i}"))?;
        }
    }
    for q in 1..=4usize {
        let seq = random_closed_sequence(1 << q, seed, 200 + q as u64)?;
        circuit_check(&mut s, &seq, q, "random")?;
        // shorter chain padded to the register
        let short = random_closed_sequence((1 << q) - 1, seed, 300 + q as u64)?;
        circuit_check(&mut s, &short, q, "random-padded")?;
    }
    for (i, seq) in cfg.sequences.iter().enumerate() {
        let label = format!("input-{i}");
        let d = seq.len() + seq.len() % 2;
        if seq.is_closed() && d <= XY_MAX_SITES {
            xy_check(&mut s, seq, d, &label)?;
        }
        circuit_check(&mut s, seq, qubits_for(seq.len()), &label)?;
    }
    let failed = s.checks.iter().filter(|c| !c.passed).count();
    Ok(VerifyReport {
        seed,
        passed: s.checks.len() - failed,
        failed,
        checks: s.checks,
    })
}
