//! Dense state-vector simulation of gearbox circuits, used as an
//! independent oracle for the closed-form gearbox algebra.
//!
//! Qubits 0..d are ancillas and qubit d is the data qubit. A flat gearbox
//! applies U¹…U^d to the ancillas, a d-controlled −iX onto the data qubit,
//! then U^{1†}…U^{d†}, and measures the ancillas. Nested nodes are first
//! reduced to their post-selected single-qubit operator, level by level.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Gate, GateWord};
use crate::gearbox::GearboxNode;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Qubit = [Complex64; 2];

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn gate_matrix(g: Gate) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let h = Complex64::new(s, 0.0);
    let diag = |x: Complex64| [[ONE, ZERO], [ZERO, x]];
    match g {
        Gate::H => [[h, h], [h, -h]],
        Gate::T => diag(w),
        Gate::Tdg => diag(w.conj()),
        Gate::S => diag(I),
        Gate::Sdg => diag(-I),
        Gate::X => [[ZERO, ONE], [ONE, ZERO]],
        Gate::Y => [[ZERO, -I], [I, ZERO]],
        Gate::Z => diag(-ONE),
        Gate::W => [[w, ZERO], [ZERO, w]],
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn apply(a: &Mat2, v: &Qubit) -> Qubit {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Product of gate matrices in written order.
pub fn word_matrix(w: &GateWord) -> Mat2 {
    w.gates().iter().fold([[ONE, ZERO], [ZERO, ONE]], |acc, &g| mat_mul(&acc, &gate_matrix(g)))
}

/// e^{−iφX}.
pub fn x_rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    [[Complex64::new(c, 0.0), Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), Complex64::new(c, 0.0)]]
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &Qubit) -> Qubit {
    let n = norm(v);
    [v[0] / n, v[1] / n]
}

/// min over α of ‖a − e^{iα} b‖ for normalized states, evaluated
/// componentwise so that tiny deviations are not lost to cancellation.
pub fn phase_distance(a: &Qubit, b: &Qubit) -> f64 {
    let ip = b[0].conj() * a[0] + b[1].conj() * a[1];
    let ph = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    norm(&[a[0] - ph * b[0], a[1] - ph * b[1]])
}

/// Dense register of n qubits; qubit q is bit q of the basis index.
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Resource(format!("{n} qubits exceeds the simulator limit of {MAX_QUBITS}")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(StateVector { n, amps })
    }

    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// −iX on `target` controlled on every qubit in `controls` being |1⟩.
    pub fn apply_mc_minus_ix(&mut self, controls: &[usize], target: usize) {
        let mask: usize = controls.iter().map(|&c| 1usize << c).sum();
        let bit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 && i & mask == mask {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = -I * b;
                self.amps[i | bit] = -I * a;
            }
        }
    }

    /// Data-qubit amplitudes conditioned on the ancilla outcome `outcome`
    /// (unnormalized; squared norm is the outcome probability).
    pub fn branch(&self, outcome: usize, data: usize) -> Qubit {
        let bit = 1usize << data;
        [self.amps[outcome], self.amps[outcome | bit]]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }
}

/// Result of one gearbox attempt on a data qubit.
#[derive(Clone, Debug)]
pub struct GearboxRun {
    pub success_prob: f64,
    /// Normalized post-selected output on the all-zero outcome.
    pub output: Qubit,
    /// Normalized data state for every other outcome of non-zero weight,
    /// with its probability.
    pub failures: Vec<(f64, Qubit)>,
    /// Largest norm drift observed after any unitary step.
    pub max_norm_drift: f64,
}

impl GearboxRun {
    pub fn failure_state(&self) -> Option<Qubit> {
        self.failures.first().map(|f| f.1)
    }
}

/// U¹…U^d on the ancillas, d-controlled −iX, U^{1†}…U^{d†}; returns the
/// register and the largest norm drift after any step.
fn gearbox_circuit(children: &[Mat2], input: &Qubit) -> Result<(StateVector, f64)> {
    let d = children.len();
    if d == 0 {
        return Err(Error::InvalidInput("gearbox needs at least one child".into()));
    }
    let mut sv = StateVector::new(d + 1)?;
    sv.amps[0] = input[0];
    sv.amps[1 << d] = input[1];
    let n0 = sv.norm();
    let mut drift: f64 = 0.0;
    for (q, u) in children.iter().enumerate() {
        sv.apply_1q(u, q);
        drift = drift.max((sv.norm() - n0).abs());
    }
    let controls: Vec<usize> = (0..d).collect();
    sv.apply_mc_minus_ix(&controls, d);
    drift = drift.max((sv.norm() - n0).abs());
    for (q, u) in children.iter().enumerate() {
        sv.apply_1q(&adjoint(u), q);
        drift = drift.max((sv.norm() - n0).abs());
    }
    Ok((sv, drift))
}

/// One flat gearbox attempt with the given child matrices.
pub fn run_flat(children: &[Mat2], input: &Qubit) -> Result<GearboxRun> {
    let d = children.len();
    let (sv, drift) = gearbox_circuit(children, input)?;
    let ok = sv.branch(0, d);
    let success_prob = ok[0].norm_sqr() + ok[1].norm_sqr();
    let mut failures = Vec::new();
    for outcome in 1..(1usize << d) {
        let b = sv.branch(outcome, d);
        let p = b[0].norm_sqr() + b[1].norm_sqr();
        // below this the branch is rounding noise
        if p > 1e-24 {
            failures.push((p, normalized(&b)));
        }
    }
    Ok(GearboxRun { success_prob, output: normalized(&ok), failures, max_norm_drift: drift })
}

/// Post-selected single-qubit operator of a node, rescaled to a unitary.
pub fn effective_matrix(node: &GearboxNode) -> Result<Mat2> {
    match node {
        GearboxNode::Leaf(w) => Ok(word_matrix(w)),
        GearboxNode::Gearbox(ch) => {
            let mats = ch.iter().map(effective_matrix).collect::<Result<Vec<_>>>()?;
            success_operator(&mats)
        }
        GearboxNode::Composed(b, d) => {
            let mut m = effective_matrix(b)?;
            for _ in 0..*d {
                m = success_operator(&[m])?;
            }
            Ok(m)
        }
    }
}

/// The all-zero-outcome operator, from the two basis inputs, rescaled to
/// a unitary (both inputs succeed with the same probability).
fn success_operator(children: &[Mat2]) -> Result<Mat2> {
    let d = children.len();
    let mut cols = [[ZERO; 2]; 2];
    for (j, input) in [[ONE, ZERO], [ZERO, ONE]].iter().enumerate() {
        let (sv, _) = gearbox_circuit(children, input)?;
        let b = sv.branch(0, d);
        cols[0][j] = b[0];
        cols[1][j] = b[1];
    }
    let scale = (cols[0][0].norm_sqr() + cols[1][0].norm_sqr()).sqrt();
    Ok(cols.map(|row| row.map(|z| z / scale)))
}

/// Simulate the top level of `node` on `input`; nested children enter
/// through their post-selected operators.
pub fn run_gearbox(node: &GearboxNode, input: &Qubit) -> Result<GearboxRun> {
    match node {
        GearboxNode::Leaf(w) => {
            let out = apply(&word_matrix(w), input);
            Ok(GearboxRun { success_prob: 1.0, output: normalized(&out), failures: Vec::new(), max_norm_drift: 0.0 })
        }
        GearboxNode::Gearbox(ch) => {
            let mats = ch.iter().map(effective_matrix).collect::<Result<Vec<_>>>()?;
            run_flat(&mats, input)
        }
        GearboxNode::Composed(b, d) => {
            let mut m = effective_matrix(b)?;
            for _ in 1..*d {
                m = success_operator(&[m])?;
            }
            run_flat(&[m], input)
        }
    }
}

/// Phase-insensitive distance between two single-qubit operators.
pub fn operator_distance(a: &Mat2, b: &Mat2) -> f64 {
    let mut ip = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            ip += b[i][j].conj() * a[i][j];
        }
    }
    let ph = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - ph * b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

/// Deviations of the simulated top-level attempt from the closed forms:
/// success probability cos⁴θ + sin⁴θ, output e^{−i·tan⁻¹(tan²θ)·X}|ψ⟩, and
/// every failure branch e^{iπX/4}|ψ⟩ up to phase.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub success_prob: f64,
    pub success_prob_formula: f64,
    pub prob_dev: f64,
    pub output_dev: f64,
    pub failure_dev: f64,
    pub norm_drift: f64,
}

impl Verification {
    pub fn max_deviation(&self) -> f64 {
        self.prob_dev.max(self.output_dev).max(self.failure_dev).max(self.norm_drift)
    }
}

/// Failure branches rarer than this are not compared: their normalized
/// state carries a relative rounding error of about 1e-16/√p.
pub const FAILURE_CHECK_FLOOR: f64 = 1e-12;

/// Check `node` on |0⟩, |1⟩, |+⟩ and |+i⟩, keeping the worst deviation of
/// each kind.
pub fn verify_gearbox(node: &GearboxNode) -> Result<Verification> {
    node.validate()?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let inputs: [Qubit; 4] = [
        [ONE, ZERO],
        [ZERO, ONE],
        [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
    ];
    let (p_formula, rot) = match node {
        GearboxNode::Leaf(w) => (1.0, word_matrix(w)),
        _ => (node.success_prob()?, x_rotation(node.success_angle()?.radians)),
    };
    let fail = x_rotation(-std::f64::consts::FRAC_PI_4);
    let mut v = Verification {
        success_prob: 0.0,
        success_prob_formula: p_formula,
        prob_dev: 0.0,
        output_dev: 0.0,
        failure_dev: 0.0,
        norm_drift: 0.0,
    };
    for input in &inputs {
        let run = run_gearbox(node, input)?;
        v.success_prob = run.success_prob;
        v.prob_dev = v.prob_dev.max((run.success_prob - p_formula).abs());
        v.output_dev = v.output_dev.max(phase_distance(&run.output, &apply(&rot, input)));
        let want = apply(&fail, input);
        for (_, f) in run.failures.iter().filter(|f| f.0 > FAILURE_CHECK_FLOOR) {
            v.failure_dev = v.failure_dev.max(phase_distance(f, &want));
        }
        v.norm_drift = v.norm_drift.max(run.max_norm_drift);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gearbox::gearbox_angle;
    use std::f64::consts::FRAC_PI_8;

    #[test]
    fn gate_matrices() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = gate_matrix(Gate::H);
        assert!((h[1][1].re + s).abs() < 1e-15);
        let t = gate_matrix(Gate::T);
        assert!((t[1][1] - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
        for g in Gate::ALL {
            let exact = g.unitary().to_complex();
            assert!(operator_distance(&exact, &gate_matrix(g)) < 1e-15);
            for (row, want) in exact.iter().zip(gate_matrix(g)) {
                for (x, y) in row.iter().zip(want) {
                    assert!((x - y).norm() < 1e-15, "{g}");
                }
            }
        }
    }

    #[test]
    fn hth_gearbox() {
        let node = GearboxNode::parse("GB(H T H)").unwrap();
        let r = run_gearbox(&node, &[ONE, ZERO]).unwrap();
        assert!((r.success_prob - 0.75).abs() < 1e-12);
        let phi = gearbox_angle(&[FRAC_PI_8.sin()]).unwrap().radians;
        let want = apply(&x_rotation(phi), &[ONE, ZERO]);
        assert!(phase_distance(&r.output, &want) < 1e-10);
        let fail = apply(&x_rotation(-std::f64::consts::FRAC_PI_4), &[ONE, ZERO]);
        assert!(phase_distance(&r.failure_state().unwrap(), &fail) < 1e-10);
    }

    #[test]
    fn identity_leaf_always_succeeds() {
        let node = GearboxNode::parse("GB(I)").unwrap();
        let input = normalized(&[Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.7)]);
        let r = run_gearbox(&node, &input).unwrap();
        assert!((r.success_prob - 1.0).abs() < 1e-14);
        assert!(phase_distance(&r.output, &input) < 1e-14);
        assert!(r.failures.is_empty());
    }

    #[test]
    fn too_many_qubits() {
        let mats = vec![gate_matrix(Gate::H); MAX_QUBITS];
        assert!(matches!(run_flat(&mats, &[ONE, ZERO]), Err(Error::Resource(_))));
    }
}
