use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use super::noise::{apply_noise, NoiseModel};
use super::{Statevector, C64};
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-10;

/// Gate families, used for noise selection and trace output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateName {
    Ry,
    Cnot,
    Cz,
    H,
    X,
    Cphase,
    Unitary,
    Ucry,
}

impl GateName {
    pub fn as_str(self) -> &'static str {
        match self {
            GateName::Ry => "ry",
            GateName::Cnot => "cnot",
            GateName::Cz => "cz",
            GateName::H => "h",
            GateName::X => "x",
            GateName::Cphase => "cphase",
            GateName::Unitary => "unitary",
            GateName::Ucry => "ucry",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Ry(f64),
    Cnot,
    Cz,
    H,
    X,
    /// `diag(1, e^{jφ})` on the target when the control is set.
    Cphase(f64),
    /// Dense unitary on the targets; `targets[0]` is the low bit of its index.
    Unitary(Arc<DMatrix<C64>>),
    /// RY on the single target whose angle is selected by the value of the
    /// control register (`controls[0]` is the low bit).
    Ucry(Arc<Vec<f64>>),
}

/// A gate bound to its qubits. Construct through the named constructors,
/// which validate arity and unitarity.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    controls: Vec<usize>,
}

impl Gate {
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry(theta), q)
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            targets: vec![target],
            controls: vec![control],
        }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            targets: vec![target],
            controls: vec![control],
        }
    }

    pub fn cphase(control: usize, target: usize, phi: f64) -> Self {
        Self {
            kind: GateKind::Cphase(phi),
            targets: vec![target],
            controls: vec![control],
        }
    }

    /// Dense `2^k×2^k` unitary on `targets`, applied when every control is 1.
    pub fn controlled_unitary(controls: Vec<usize>, targets: Vec<usize>, u: DMatrix<C64>) -> Result<Self> {
        let d = 1usize << targets.len();
        if targets.is_empty() || u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: u.nrows(),
            });
        }
        let dev = unitarity_defect(&u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            kind: GateKind::Unitary(Arc::new(u)),
            targets,
            controls,
        })
    }

    /// Uniformly controlled RY with one angle per control-register value.
    pub fn uc_ry(controls: Vec<usize>, target: usize, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != 1 << controls.len() {
            return Err(Error::Dimension {
                expected: 1 << controls.len(),
                got: angles.len(),
            });
        }
        Ok(Self {
            kind: GateKind::Ucry(Arc::new(angles)),
            targets: vec![target],
            controls,
        })
    }

    fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            targets: vec![q],
            controls: Vec::new(),
        }
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[usize] {
        &self.controls
    }

    pub fn name(&self) -> GateName {
        match self.kind {
            GateKind::Ry(_) => GateName::Ry,
            GateKind::Cnot => GateName::Cnot,
            GateKind::Cz => GateName::Cz,
            GateKind::H => GateName::H,
            GateKind::X => GateName::X,
            GateKind::Cphase(_) => GateName::Cphase,
            GateKind::Unitary(_) => GateName::Unitary,
            GateKind::Ucry(_) => GateName::Ucry,
        }
    }

    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Cphase(p) => GateKind::Cphase(-p),
            GateKind::Unitary(u) => GateKind::Unitary(Arc::new(u.adjoint())),
            GateKind::Ucry(a) => GateKind::Ucry(Arc::new(a.iter().map(|t| -t).collect())),
            k => k.clone(),
        };
        Self {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Matrix acting on the target subsystem (for single-target kinds other
    /// than the uniformly controlled rotation).
    pub fn target_matrix(&self) -> DMatrix<C64> {
        match &self.kind {
            GateKind::Unitary(u) => (**u).clone(),
            GateKind::Ucry(a) => m2(ry_matrix(a[0])),
            k => m2(single_matrix(k)),
        }
    }

    /// `gate-name targets controls params`.
    pub fn trace_line(&self) -> String {
        let join = |v: &[usize]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        let params = match &self.kind {
            GateKind::Ry(t) | GateKind::Cphase(t) => format!("{t:.6}"),
            GateKind::Unitary(u) => format!("dim={}", u.nrows()),
            GateKind::Ucry(a) => format!("angles={}", a.len()),
            _ => "-".into(),
        };
        format!(
            "{} {} {} {}",
            self.name().as_str(),
            join(&self.targets),
            join(&self.controls),
            params
        )
    }

    fn validate(&self, n: usize) -> Result<()> {
        for &q in self.targets.iter().chain(&self.controls) {
            if q >= n {
                return Err(Error::QubitRange { index: q, n });
            }
        }
        let mut all: Vec<usize> = self.targets.iter().chain(&self.controls).copied().collect();
        all.sort_unstable();
        all.dedup();
        if all.len() != self.targets.len() + self.controls.len() {
            return Err(Error::ControlOverlap);
        }
        Ok(())
    }
}

fn m2(m: [[C64; 2]; 2]) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[i][j])
}

fn ry_matrix(theta: f64) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

fn single_matrix(kind: &GateKind) -> [[C64; 2]; 2] {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match kind {
        GateKind::Ry(t) => ry_matrix(*t),
        GateKind::H => {
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::X | GateKind::Cnot => [[zero, one], [one, zero]],
        GateKind::Cz => [[one, zero], [zero, -one]],
        GateKind::Cphase(p) => [[one, zero], [zero, C64::from_polar(1.0, *p)]],
        GateKind::Unitary(_) | GateKind::Ucry(_) => unreachable!("not a fixed single-qubit gate"),
    }
}

fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let g = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let e = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - C64::new(e, 0.0)).norm());
        }
    }
    dev
}

fn mask(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, &q| m | (1 << q))
}

fn apply_2x2(amps: &mut [C64], target: usize, cmask: usize, m: &[[C64; 2]; 2]) {
    let t = 1 << target;
    for i in 0..amps.len() {
        if i & t == 0 && i & cmask == cmask {
            let a0 = amps[i];
            let a1 = amps[i | t];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | t] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_dense(amps: &mut [C64], targets: &[usize], cmask: usize, u: &DMatrix<C64>) {
    let d = u.nrows();
    let tmask = mask(targets);
    let offsets: Vec<usize> = (0..d)
        .map(|j| {
            targets
                .iter()
                .enumerate()
                .fold(0, |o, (b, &q)| if j >> b & 1 == 1 { o | (1 << q) } else { o })
        })
        .collect();
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & cmask != cmask {
            continue;
        }
        for (k, &o) in offsets.iter().enumerate() {
            buf[k] = amps[base | o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, b) in buf.iter().enumerate() {
                acc += u[(r, c)] * b;
            }
            amps[base | o] = acc;
        }
    }
}

fn apply_ucry(amps: &mut [C64], controls: &[usize], target: usize, angles: &[f64]) {
    let t = 1 << target;
    let rots: Vec<[[C64; 2]; 2]> = angles.iter().map(|&a| ry_matrix(a)).collect();
    for i in 0..amps.len() {
        if i & t != 0 {
            continue;
        }
        let sel = controls
            .iter()
            .enumerate()
            .fold(0, |s, (b, &q)| s | ((i >> q & 1) << b));
        let m = &rots[sel];
        let a0 = amps[i];
        let a1 = amps[i | t];
        amps[i] = m[0][0] * a0 + m[0][1] * a1;
        amps[i | t] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// Applies `gate` to `state` in place.
pub fn apply_gate(state: &mut Statevector, gate: &Gate) -> Result<()> {
    gate.validate(state.num_qubits())?;
    let cmask = mask(&gate.controls);
    let amps = state.amplitudes_mut();
    match &gate.kind {
        GateKind::Unitary(u) => apply_dense(amps, &gate.targets, cmask, u),
        GateKind::Ucry(a) => apply_ucry(amps, &gate.controls, gate.targets[0], a),
        k => apply_2x2(amps, gate.targets[0], cmask, &single_matrix(k)),
    }
    Ok(())
}

/// An ordered gate program on a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    /// Reversed program of adjoint gates.
    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    /// Runs the program, inserting stochastic noise after each gate when a
    /// noise model is supplied.
    pub fn run<R: Rng + ?Sized>(&self, state: &mut Statevector, noise: Option<(&NoiseModel, &mut R)>) -> Result<()> {
        if state.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: state.num_qubits(),
            });
        }
        match noise {
            None => {
                for g in &self.gates {
                    apply_gate(state, g)?;
                }
            }
            Some((model, rng)) => {
                for g in &self.gates {
                    apply_gate(state, g)?;
                    apply_noise(state, model, g.name(), &g.targets, rng)?;
                }
            }
        }
        Ok(())
    }

    /// One trace line per gate.
    pub fn trace(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let _ = writeln!(out, "{}", g.trace_line());
        }
        out
    }
}
