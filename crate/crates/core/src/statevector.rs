//! Exact dense simulation of QAOA on higher-order Ising cost functions.
//!
//! Two paths produce the same state:
//! * the *fast diagonal path*: a precomputed integer cost table drives the
//!   phase separator as an elementwise multiply; the mixer is applied as
//!   per-qubit in-place rotations;
//! * the *gate path*: a gate-by-gate dense simulation of a built circuit
//!   (used as an oracle and for circuit validation).
//!
//! Basis conventions are defined in the crate docs: qubit `k` ↔ bit `k`,
//! bit 0 ⇔ `z = +1`.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::model::Instance;
use crate::{Angles, Error, Result};

/// Hard cap for dense simulation (16 bytes per amplitude ⇒ 2 GiB at 27).
pub const MAX_QUBITS: usize = 27;

/// Precomputed cost per basis state, stored as `i16` (|C| ≤ n_terms ≤ 342
/// for every supported map, well within range).
pub struct CostTable {
    pub n: usize,
    /// `values[bits] = C(bits)`.
    pub values: Vec<i16>,
    /// Maximum absolute cost bound used for phase lookup tables.
    pub bound: i64,
}

/// Build the cost table by a Gray-code scan (one spin flip per step).
pub fn build_cost_table(inst: &Instance) -> Result<CostTable> {
    let n = inst.n();
    if n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "cost table for n = {n} exceeds the {MAX_QUBITS}-qubit dense cap"
        )));
    }
    let bound = inst.n_terms() as i64;
    let mut values = vec![0i16; 1usize << n];
    crate::model::gray_scan(inst, |bits, cost| {
        debug_assert!(cost.abs() <= bound);
        values[bits as usize] = cost as i16;
    });
    Ok(CostTable { n, values, bound })
}

/// A dense `2^n` state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    /// The uniform superposition `|+^n⟩`.
    pub fn plus_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "dense state size n = {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            n,
            amps: vec![amp; dim],
        })
    }

    /// The computational basis state `|bits⟩`.
    pub fn basis_state(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "dense state size n = {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[bits as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Apply the phase separator `e^{−iγ·C}` via the cost table.
    pub fn apply_phase(&mut self, table: &CostTable, gamma: f64) {
        assert_eq!(self.n, table.n);
        // Costs live in [−bound, bound]: use a lookup table of phases.
        let bound = table.bound;
        let lut: Vec<Complex64> = (-bound..=bound)
            .map(|c| (Complex64::new(0.0, -gamma * c as f64)).exp())
            .collect();
        for (a, &c) in self.amps.iter_mut().zip(table.values.iter()) {
            *a *= lut[(c as i64 + bound) as usize];
        }
    }

    /// Apply the mixer `e^{−iβ Σ σ^x}` as per-qubit RX(2β) rotations.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (cos, sin) = (beta.cos(), beta.sin());
        let misin = Complex64::new(0.0, -sin);
        for k in 0..self.n {
            let stride = 1usize << k;
            let dim = self.amps.len();
            let mut base = 0usize;
            while base < dim {
                for i in base..base + stride {
                    let j = i + stride;
                    let (a, b) = (self.amps[i], self.amps[j]);
                    self.amps[i] = cos * a + misin * b;
                    self.amps[j] = cos * b + misin * a;
                }
                base += stride << 1;
            }
        }
    }

    /// Squared overlap `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        assert_eq!(self.n, other.n);
        let inner: Complex64 = self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        inner.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    // --- gate path -------------------------------------------------------

    pub fn apply_h(&mut self, q: usize) {
        let inv = 1.0 / 2f64.sqrt();
        self.for_pairs(q, |a, b| (inv * (a + b), inv * (a - b)));
    }

    /// `RZ(θ) = diag(e^{−iθ/2}, e^{+iθ/2})`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) {
        let lo = Complex64::new(0.0, -theta / 2.0).exp();
        let hi = Complex64::new(0.0, theta / 2.0).exp();
        self.for_pairs(q, |a, b| (lo * a, hi * b));
    }

    /// `RX(θ) = cos(θ/2)·I − i sin(θ/2)·X`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) {
        let cos = (theta / 2.0).cos();
        let misin = Complex64::new(0.0, -(theta / 2.0).sin());
        self.for_pairs(q, |a, b| (cos * a + misin * b, cos * b + misin * a));
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        assert_ne!(control, target);
        let (c, t) = (1u64 << control, 1u64 << target);
        for i in 0..self.amps.len() as u64 {
            // Visit each swapped pair once: control set, target clear.
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i as usize, (i | t) as usize);
            }
        }
    }

    #[inline]
    fn for_pairs(&mut self, q: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        let stride = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0usize;
        while base < dim {
            for i in base..base + stride {
                let j = i + stride;
                let (a, b) = f(self.amps[i], self.amps[j]);
                self.amps[i] = a;
                self.amps[j] = b;
            }
            base += stride << 1;
        }
    }
}

/// Run QAOA through the fast diagonal path. `p = 0` yields `|+^n⟩`.
pub fn run_qaoa(inst: &Instance, angles: &Angles) -> Result<StateVector> {
    let table = build_cost_table(inst)?;
    run_qaoa_with_table(&table, angles)
}

/// Fast path reusing a prebuilt cost table (for angle sweeps).
pub fn run_qaoa_with_table(table: &CostTable, angles: &Angles) -> Result<StateVector> {
    let mut state = StateVector::plus_state(table.n)?;
    for r in 0..angles.p() {
        state.apply_phase(table, angles.gamma[r]);
        state.apply_mixer(angles.beta[r]);
    }
    Ok(state)
}

/// Gate-by-gate dense simulation of a circuit, starting from `|0…0⟩`.
/// Measurement gates are ignored (the full state is returned).
pub fn run_circuit_dense(circuit: &Circuit) -> Result<StateVector> {
    if circuit.n == 0 || circuit.n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "gate-path state size n = {} outside 1..={MAX_QUBITS}",
            circuit.n
        )));
    }
    let mut state = StateVector::basis_state(circuit.n, 0)?;
    for gate in &circuit.gates {
        match *gate {
            Gate::H(q) => state.apply_h(q),
            Gate::Rz { q, theta } => state.apply_rz(q, theta),
            Gate::Rx { q, theta } => state.apply_rx(q, theta),
            Gate::Cnot { control, target } => state.apply_cnot(control, target),
        }
    }
    Ok(state)
}

/// Exact expectation `⟨ψ|C|ψ⟩` from the cost table.
pub fn expectation(state: &StateVector, table: &CostTable) -> f64 {
    assert_eq!(state.n, table.n);
    state
        .amps
        .iter()
        .zip(table.values.iter())
        .map(|(a, &c)| a.norm_sqr() * c as f64)
        .sum()
}

/// Draw `shots` basis states from `|ψ|²`.
///
/// Sampling is done with sorted uniforms in a single cumulative pass, so the
/// result is deterministic given the RNG and its seed; the returned
/// bitstrings are in non-decreasing cumulative-position order.
pub fn sample(state: &StateVector, rng: &mut impl Rng, shots: usize) -> Vec<u64> {
    let mut us: Vec<f64> = (0..shots).map(|_| rng.gen::<f64>()).collect();
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(shots);
    let mut acc = 0.0f64;
    let mut idx = 0usize;
    for (i, a) in state.amps.iter().enumerate() {
        acc += a.norm_sqr();
        while idx < shots && us[idx] < acc {
            out.push(i as u64);
            idx += 1;
        }
        if idx == shots {
            break;
        }
    }
    // Guard against accumulated rounding at the very top of the CDF.
    while idx < shots {
        out.push((state.amps.len() - 1) as u64);
        idx += 1;
    }
    out
}
