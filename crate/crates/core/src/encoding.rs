//! Projections and block encodings.
//!
//! A projection `Π` on `m` wires is stored in canonical form `Π = P·V`: an
//! optional pre-unitary circuit `V` followed by the test "ancilla wires read
//! zero", where `P` maps `|j⟩_data ⊗ |0…0⟩_anc` to the standard basis vector
//! `e_j`. Bit `i` of the data index `j` lives on `data_wires[i]`; the ancilla
//! wires are all remaining wires. Data dimensions are powers of two.
//!
//! A [`BlockEncoding`] `(U, Π1, Π2, γ, ε)` encodes `S ≈ γ·Π2 U Π1†`. Every
//! encoding may carry a *classical shadow*: the dense block `Π2 U Π1†` held
//! next to the circuit. Leaves compute it directly and every algebraic
//! operation propagates it, which is what the algebraic backend evaluates
//! when a circuit is too wide to simulate.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::circuit::{permutation_circuit, run, Circuit, Gate, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{c64, complete_to_unitary, is_power_of_two, op_norm, CMatrix, CVector};

/// Widest circuit [`extract`] will simulate.
pub const EXTRACT_MAX_WIRES: usize = 22;

/// Widest circuit the gate-level backend will simulate.
pub const GATE_LEVEL_MAX_WIRES: usize = 24;

/// How encodings are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Statevector simulation of the circuits.
    #[default]
    GateLevel,
    /// Evaluation of the classical shadows; circuits are still built and
    /// counted but never simulated.
    Algebraic,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::GateLevel => "gate-level",
            Backend::Algebraic => "algebraic",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate-level" | "gate" => Ok(Backend::GateLevel),
            "algebraic" => Ok(Backend::Algebraic),
            other => Err(Error::InvalidArgument(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    wires: usize,
    data: Vec<usize>,
    pre: Option<Arc<Circuit>>,
}

impl PartialEq for Projection {
    fn eq(&self, other: &Self) -> bool {
        self.wires == other.wires
            && self.data == other.data
            && match (&self.pre, &other.pre) {
                (None, None) => true,
                (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
                _ => false,
            }
    }
}

impl Projection {
    pub fn new(wires: usize, data: Vec<usize>, pre: Option<Arc<Circuit>>) -> Result<Self> {
        let mut sorted = data.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != data.len() {
            return Err(Error::InvalidArgument("repeated data wire".into()));
        }
        if sorted.last().is_some_and(|&w| w >= wires) {
            return Err(Error::InvalidArgument("data wire out of range".into()));
        }
        if let Some(v) = &pre {
            if v.wires() != wires {
                return Err(Error::DimensionMismatch(format!(
                    "{}-wire pre-unitary for a {wires}-wire projection",
                    v.wires()
                )));
            }
        }
        let pre = pre.filter(|v| !v.is_empty());
        Ok(Projection { wires, data, pre })
    }

    /// `⟨0…0|` on `wires` wires: the one-dimensional input projection of
    /// vector encodings.
    pub fn zero(wires: usize) -> Self {
        Projection { wires, data: Vec::new(), pre: None }
    }

    /// The identity on all `wires` wires.
    pub fn full(wires: usize) -> Self {
        Projection { wires, data: (0..wires).collect(), pre: None }
    }

    /// Data on `data`, no pre-unitary.
    pub fn on(wires: usize, data: Vec<usize>) -> Result<Self> {
        Self::new(wires, data, None)
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn data_wires(&self) -> &[usize] {
        &self.data
    }

    pub fn dim(&self) -> usize {
        1usize << self.data.len()
    }

    pub fn pre(&self) -> Option<&Arc<Circuit>> {
        self.pre.as_ref()
    }

    pub fn ancillas(&self) -> Vec<usize> {
        (0..self.wires).filter(|w| !self.data.contains(w)).collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.pre.is_none()
    }

    /// Basis index of `|j⟩_data ⊗ |0⟩_anc`.
    pub fn embed_index(&self, j: usize) -> usize {
        self.data.iter().enumerate().fold(0, |acc, (i, &w)| acc | (((j >> i) & 1) << w))
    }

    /// The same projection with extra idle wires appended as ancillas.
    pub fn widened(&self, wires: usize) -> Projection {
        assert!(wires >= self.wires);
        Projection {
            wires,
            data: self.data.clone(),
            pre: self.pre.as_ref().map(|v| Arc::new(v.widened(wires))),
        }
    }

    /// Dense `N × 2^m` matrix, rows orthonormal.
    pub fn matrix(&self) -> Result<CMatrix> {
        if self.wires > EXTRACT_MAX_WIRES {
            return Err(Error::TooLarge(self.wires));
        }
        let mut m = CMatrix::zeros(self.dim(), 1 << self.wires);
        for j in 0..self.dim() {
            let mut s = StateVector::basis(self.wires, self.embed_index(j))?;
            if let Some(v) = &self.pre {
                s = run(&v.adjoint(), &s)?;
            }
            for (k, a) in s.amplitudes().iter().enumerate() {
                m[(j, k)] = a.conj();
            }
        }
        Ok(m)
    }
}

/// `CNOT_Π`: flips wire `m` (a flag appended after the projection's wires)
/// exactly on the range of `Π†Π`.
pub fn cnot_proj_gate(p: &Projection) -> Result<Circuit> {
    let m = p.wires;
    let mut c = Circuit::new(m + 1, "cnot_pi");
    if let Some(v) = &p.pre {
        c.call_prefix(v, false)?;
    }
    let anc = p.ancillas();
    c.push(Gate::mcx(&anc, &vec![false; anc.len()], m)?)?;
    if let Some(v) = &p.pre {
        c.call_prefix(v, true)?;
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    circuit: Arc<Circuit>,
    pi1: Projection,
    pi2: Projection,
    gamma: f64,
    epsilon: f64,
    eta: OnceLock<f64>,
    shadow: Option<Arc<CMatrix>>,
}

impl BlockEncoding {
    pub fn new(circuit: Arc<Circuit>, pi1: Projection, pi2: Projection, gamma: f64, epsilon: f64) -> Result<Self> {
        if pi1.wires != circuit.wires() || pi2.wires != circuit.wires() {
            return Err(Error::DimensionMismatch(format!(
                "projections on {}/{} wires for a {}-wire circuit",
                pi1.wires,
                pi2.wires,
                circuit.wires()
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!("normalization factor {gamma}")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {epsilon}")));
        }
        Ok(BlockEncoding { circuit, pi1, pi2, gamma, epsilon, eta: OnceLock::new(), shadow: None })
    }

    /// Attaches the dense block `Π2 U Π1†`.
    pub fn with_shadow(mut self, shadow: CMatrix) -> Result<Self> {
        if shadow.nrows() != self.pi2.dim() || shadow.ncols() != self.pi1.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} shadow for a {}x{} block",
                shadow.nrows(),
                shadow.ncols(),
                self.pi2.dim(),
                self.pi1.dim()
            )));
        }
        self.shadow = Some(Arc::new(shadow));
        self.eta = OnceLock::new();
        Ok(self)
    }

    pub(crate) fn with_shadow_opt(mut self, shadow: Option<CMatrix>) -> Self {
        self.shadow = shadow.map(Arc::new);
        self.eta = OnceLock::new();
        self
    }

    pub fn circuit(&self) -> &Arc<Circuit> {
        &self.circuit
    }

    pub fn pi1(&self) -> &Projection {
        &self.pi1
    }

    pub fn pi2(&self) -> &Projection {
        &self.pi2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn shadow(&self) -> Option<&CMatrix> {
        self.shadow.as_deref()
    }

    pub fn wires(&self) -> usize {
        self.circuit.wires()
    }

    pub fn is_vector(&self) -> bool {
        self.pi1.data.is_empty() && self.pi1.pre.is_none()
    }

    /// `(N2, N1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.pi2.dim(), self.pi1.dim())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn gate_count(&self, model: &crate::circuit::CostModel) -> Result<u64> {
        self.circuit.gate_count(model)
    }

    /// `|Π2 U Π1†|`, by simulation when the circuit is narrow enough and from
    /// the shadow otherwise. Cached.
    pub fn info_efficiency(&self) -> Result<f64> {
        if let Some(&v) = self.eta.get() {
            return Ok(v);
        }
        let v = if self.wires() <= EXTRACT_MAX_WIRES {
            op_norm(&block(self)?)
        } else {
            self.eta_algebraic()?
        };
        let _ = self.eta.set(v);
        Ok(v)
    }

    /// `|Π2 U Π1†|` computed from the classical shadow.
    pub fn eta_algebraic(&self) -> Result<f64> {
        self.shadow.as_deref().map(op_norm).ok_or(Error::NoShadow)
    }

    pub fn eta_with(&self, backend: Backend) -> Result<f64> {
        match backend {
            Backend::GateLevel => self.info_efficiency(),
            Backend::Algebraic => self.eta_algebraic(),
        }
    }

    /// The same encoding with idle zero ancillas appended up to `wires`.
    pub fn widened(&self, wires: usize) -> BlockEncoding {
        if wires == self.wires() {
            return self.clone();
        }
        let circuit = Arc::new(self.circuit.widened(wires));
        BlockEncoding {
            circuit,
            pi1: self.pi1.widened(wires),
            pi2: self.pi2.widened(wires),
            gamma: self.gamma,
            epsilon: self.epsilon,
            eta: self.eta.clone(),
            shadow: self.shadow.clone(),
        }
    }

    /// Encodes `-S`: the circuit gains a global phase of -1.
    pub fn negated(&self) -> Result<BlockEncoding> {
        let mut c = Circuit::new(self.wires().max(1), format!("-{}", self.circuit.label()));
        if self.wires() == 0 {
            return Err(Error::InvalidArgument("cannot negate a zero-wire encoding".into()));
        }
        c.call_prefix(&self.circuit, false)?;
        c.push(Gate::rz(0, 2.0 * std::f64::consts::PI))?;
        let mut e = BlockEncoding::new(Arc::new(c), self.pi1.clone(), self.pi2.clone(), self.gamma, self.epsilon)?;
        e.shadow = self.shadow.as_ref().map(|s| Arc::new(-(**s).clone()));
        if let Some(&v) = self.eta.get() {
            let _ = e.eta.set(v);
        }
        Ok(e)
    }
}

/// Which side of an encoding a projection sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Input,
    Output,
}

/// Returns an encoding of the same value whose projection on `side` equals
/// `target`. Supported pairs: same ambient width and data dimension; the
/// projections may differ by data placement and by pre-unitaries.
pub fn adapt_projection(e: &BlockEncoding, target: &Projection, side: Side) -> Result<BlockEncoding> {
    let current = match side {
        Side::Input => &e.pi1,
        Side::Output => &e.pi2,
    };
    if current == target {
        return Ok(e.clone());
    }
    if current.wires != target.wires || current.dim() != target.dim() {
        return Err(Error::NonEquivalentProjections(format!(
            "{} data dims on {} wires vs {} on {} wires",
            current.dim(),
            current.wires,
            target.dim(),
            target.wires
        )));
    }
    let m = e.wires();
    let perm = Arc::new(permutation_circuit(m, &current.data, &target.data)?);
    let mut c = Circuit::new(m, e.circuit.label());
    match side {
        Side::Output => {
            // U' = V_T† · Perm · V_C · U
            c.call_prefix(&e.circuit, false)?;
            if let Some(v) = &current.pre {
                c.call_prefix(v, false)?;
            }
            c.call_prefix(&perm, false)?;
            if let Some(v) = &target.pre {
                c.call_prefix(v, true)?;
            }
        }
        Side::Input => {
            // U' = U · V_C† · Perm† · V_T
            if let Some(v) = &target.pre {
                c.call_prefix(v, false)?;
            }
            c.call_prefix(&perm, true)?;
            if let Some(v) = &current.pre {
                c.call_prefix(v, true)?;
            }
            c.call_prefix(&e.circuit, false)?;
        }
    }
    let (pi1, pi2) = match side {
        Side::Input => (target.clone(), e.pi2.clone()),
        Side::Output => (e.pi1.clone(), target.clone()),
    };
    let mut out = BlockEncoding::new(Arc::new(c), pi1, pi2, e.gamma, e.epsilon)?;
    out.shadow = e.shadow.clone();
    if let Some(&v) = e.eta.get() {
        let _ = out.eta.set(v);
    }
    Ok(out)
}

/// Removes pre-unitaries from both projections, keeping data placement.
pub fn canonicalize(e: &BlockEncoding) -> Result<BlockEncoding> {
    let mut out = e.clone();
    if e.pi1.pre.is_some() {
        let t = Projection::on(e.wires(), e.pi1.data.clone())?;
        out = adapt_projection(&out, &t, Side::Input)?;
    }
    if e.pi2.pre.is_some() {
        let t = Projection::on(e.wires(), e.pi2.data.clone())?;
        out = adapt_projection(&out, &t, Side::Output)?;
    }
    Ok(out)
}

/// Columns `Π2 U Π1† e_j` for the requested input indices, by simulation.
pub(crate) fn block_columns(e: &BlockEncoding, cols: &[usize], limit: usize) -> Result<CMatrix> {
    let m = e.wires();
    if m > limit {
        return Err(Error::TooLarge(m));
    }
    let pre1_adj = e.pi1.pre.as_ref().map(|v| v.adjoint());
    let mut out = CMatrix::zeros(e.pi2.dim(), cols.len());
    for (c, &j) in cols.iter().enumerate() {
        let mut s = StateVector::basis(m, e.pi1.embed_index(j))?;
        if let Some(v) = &pre1_adj {
            s = run(v, &s)?;
        }
        s = run(&e.circuit, &s)?;
        if let Some(v) = &e.pi2.pre {
            s = run(v, &s)?;
        }
        let amps = s.amplitudes();
        for i in 0..e.pi2.dim() {
            out[(i, c)] = amps[e.pi2.embed_index(i)];
        }
    }
    Ok(out)
}

/// Dense `Π2 U Π1†` by simulation.
pub(crate) fn block(e: &BlockEncoding) -> Result<CMatrix> {
    let cols: Vec<usize> = (0..e.pi1.dim()).collect();
    block_columns(e, &cols, EXTRACT_MAX_WIRES)
}

/// The encoded matrix `γ Π2 U Π1†`, evaluated by simulating the circuit once
/// per column. Test and algebraic-backend use only.
pub fn extract(e: &BlockEncoding) -> Result<CMatrix> {
    Ok(block(e)? * c64(e.gamma, 0.0))
}

/// The encoded matrix from the classical shadow.
pub fn extract_algebraic(e: &BlockEncoding) -> Result<CMatrix> {
    Ok(e.shadow.as_deref().ok_or(Error::NoShadow)? * c64(e.gamma, 0.0))
}

pub fn extract_with(e: &BlockEncoding, backend: Backend) -> Result<CMatrix> {
    match backend {
        Backend::GateLevel => extract(e),
        Backend::Algebraic => extract_algebraic(e),
    }
}

/// Encoded vector of a vector encoding as a column.
pub fn extract_vector(e: &BlockEncoding, backend: Backend) -> Result<CVector> {
    let m = extract_with(e, backend)?;
    if m.ncols() != 1 {
        return Err(Error::DimensionMismatch("not a vector encoding".into()));
    }
    Ok(m.column(0).into_owned())
}

/// Exact encoding of `S` with normalization `gamma` by unitary dilation:
/// with `T = S/γ` padded to a power-of-two square, the circuit is the dense
/// unitary `[[T, √(I−TT†)], [√(I−T†T), −T†]]` with the flag on the top wire.
pub fn dilation_encode(s: &CMatrix, gamma: f64) -> Result<BlockEncoding> {
    let (n2, n1) = s.shape();
    if !is_power_of_two(n1) || !is_power_of_two(n2) {
        return Err(Error::DimensionMismatch(format!("{n2}x{n1} matrix; dimensions must be powers of two")));
    }
    let norm = op_norm(s);
    if !(gamma > 0.0) || gamma < norm * (1.0 - 1e-12) {
        return Err(Error::GammaTooSmall { gamma, norm });
    }
    let m_dim = n1.max(n2);
    let k = m_dim.trailing_zeros() as usize;
    let mut t = CMatrix::zeros(m_dim, m_dim);
    t.view_mut((0, 0), (n2, n1)).copy_from(&(s / c64(gamma, 0.0)));
    // with T = W Σ V†, the off-diagonal blocks are W √(I−Σ²) W† and
    // V √(I−Σ²) V†, which keeps U unitary to rounding even when γ = |S|
    let svd = t.clone().svd(true, true);
    let w = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").adjoint();
    let comp = CMatrix::from_diagonal(&CVector::from_iterator(
        m_dim,
        svd.singular_values.iter().map(|&s| {
            let s = s.min(1.0);
            c64(((1.0 - s) * (1.0 + s)).sqrt(), 0.0)
        }),
    ));
    let top_right = &w * &comp * w.adjoint();
    let bottom_left = &v * &comp * v.adjoint();
    let mut u = CMatrix::zeros(2 * m_dim, 2 * m_dim);
    u.view_mut((0, 0), (m_dim, m_dim)).copy_from(&t);
    u.view_mut((0, m_dim), (m_dim, m_dim)).copy_from(&top_right);
    u.view_mut((m_dim, 0), (m_dim, m_dim)).copy_from(&bottom_left);
    u.view_mut((m_dim, m_dim), (m_dim, m_dim)).copy_from(&(-t.adjoint()));
    let wires = k + 1;
    let mut c = Circuit::new(wires, "dilation");
    c.push(Gate::small_unitary((0..wires).collect(), u)?)?;
    let pi1 = Projection::on(wires, (0..n1.trailing_zeros() as usize).collect())?;
    let pi2 = Projection::on(wires, (0..n2.trailing_zeros() as usize).collect())?;
    let e = BlockEncoding::new(Arc::new(c), pi1, pi2, gamma, 0.0)?.with_shadow(s / c64(gamma, 0.0))?;
    let _ = e.eta.set(norm / gamma);
    Ok(e)
}

/// Exact vector encoding of `v` with `γ = |v|` and `η = 1`.
pub fn prepare_vector(v: &CVector) -> Result<BlockEncoding> {
    let n = v.len();
    if !is_power_of_two(n) {
        return Err(Error::DimensionMismatch(format!("vector of length {n}; must be a power of two")));
    }
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let u = v / c64(norm, 0.0);
    let d = n.trailing_zeros() as usize;
    let wires = d.max(1);
    let mut c = Circuit::new(wires, "prep");
    let support: Vec<usize> = (0..n).filter(|&j| u[j].norm() > 0.0).collect();
    let basis = support.len() == 1 && (u[support[0]] - c64(1.0, 0.0)).norm() < 1e-15;
    let real_pair = n == 2 && u.iter().all(|z| z.im == 0.0);
    if basis {
        let j = support[0];
        for b in 0..d {
            if (j >> b) & 1 == 1 {
                c.push(Gate::x(b))?;
            }
        }
    } else if real_pair {
        c.push(Gate::ry(0, 2.0 * u[1].re.atan2(u[0].re)))?;
    } else if n == 1 {
        // a scalar phase on one spare wire
        let z = u[0];
        let m = CMatrix::from_row_slice(2, 2, &[z, c64(0.0, 0.0), c64(0.0, 0.0), z.conj()]);
        c.push(Gate::small_unitary(vec![0], m)?)?;
    } else {
        c.push(Gate::small_unitary((0..d).collect(), complete_to_unitary(&u))?)?;
    }
    let pi2 = Projection::on(wires, (0..d).collect())?;
    let e = BlockEncoding::new(Arc::new(c), Projection::zero(wires), pi2, norm, 0.0)?
        .with_shadow(CMatrix::from_column_slice(n, 1, u.as_slice()))?;
    let _ = e.eta.set(1.0);
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real_matrix, real_vector, vec_max_abs_diff};

    #[test]
    fn dilation_round_trip_identity() {
        let id = CMatrix::identity(2, 2);
        let e = dilation_encode(&id, 1.0).unwrap();
        assert!(max_abs_diff(&extract(&e).unwrap(), &id) < 1e-12);
        assert!((e.info_efficiency().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_of_a2() {
        let a2 = real_matrix(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]) * c64(-0.125, 0.0);
        let g = op_norm(&a2);
        assert!((g - 0.25).abs() < 1e-12);
        let e = dilation_encode(&a2, g).unwrap();
        assert!(max_abs_diff(&extract(&e).unwrap(), &a2) < 1e-10);
        assert!(max_abs_diff(&extract_algebraic(&e).unwrap(), &a2) < 1e-12);
    }

    #[test]
    fn gamma_below_norm_rejected() {
        let s = real_matrix(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(dilation_encode(&s, 1.5), Err(Error::GammaTooSmall { .. })));
    }

    #[test]
    fn prepare_examples() {
        let e = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        assert!((e.gamma() - 2f64.sqrt()).abs() < 1e-15);
        let s = run(e.circuit(), &StateVector::zero(1).unwrap()).unwrap();
        assert!((s.amplitudes()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let e = prepare_vector(&real_vector(&[2.0, 0.25])).unwrap();
        assert!((e.gamma() - 4.0625f64.sqrt()).abs() < 1e-15);

        let e = prepare_vector(&real_vector(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(e.circuit().flatten().iter().all(|g| g.kind == crate::circuit::GateKind::PauliX));
        assert!(matches!(prepare_vector(&real_vector(&[0.0, 0.0])), Err(Error::ZeroVector)));
    }

    #[test]
    fn prepare_complex_vector() {
        let v = CVector::from_vec(vec![c64(0.1, 0.2), c64(-0.3, 0.0), c64(0.0, 0.5), c64(0.7, -0.1)]);
        let e = prepare_vector(&v).unwrap();
        assert!(vec_max_abs_diff(&extract_vector(&e, Backend::GateLevel).unwrap(), &v) < 1e-12);
    }

    #[test]
    fn cnot_proj_without_ancillas_is_flag_x() {
        let c = cnot_proj_gate(&Projection::full(2)).unwrap();
        assert_eq!(c.flatten(), vec![Gate::x(2)]);
    }

    #[test]
    fn adapt_output_moves_data_and_keeps_value() {
        let s = real_matrix(2, 2, &[0.3, -0.2, 0.1, 0.5]);
        let e = dilation_encode(&s, 1.0).unwrap();
        // move the output data from wire 0 to wire 1
        let t = Projection::on(2, vec![1]).unwrap();
        let a = adapt_projection(&e, &t, Side::Output).unwrap();
        assert_eq!(a.pi2(), &t);
        assert!(max_abs_diff(&extract(&a).unwrap(), &s) < 1e-12);
        let t = Projection::on(2, vec![1]).unwrap();
        let b = adapt_projection(&e, &t, Side::Input).unwrap();
        assert!(max_abs_diff(&extract(&b).unwrap(), &s) < 1e-12);
        assert!(adapt_projection(&e, &Projection::full(2), Side::Input).is_err());
    }

    #[test]
    fn adapt_with_pre_unitary() {
        let s = real_matrix(2, 2, &[0.3, -0.2, 0.1, 0.5]);
        let e = dilation_encode(&s, 1.0).unwrap();
        let mut v = Circuit::new(2, "v");
        v.push(Gate::h(1)).unwrap();
        v.push(Gate::ry(0, 0.3)).unwrap();
        let t = Projection::new(2, vec![0], Some(Arc::new(v))).unwrap();
        let a = adapt_projection(&e, &t, Side::Output).unwrap();
        assert!(max_abs_diff(&extract(&a).unwrap(), &s) < 1e-12);
        let back = canonicalize(&a).unwrap();
        assert!(back.pi2().is_canonical());
        assert!(max_abs_diff(&extract(&back).unwrap(), &s) < 1e-12);
        let b = adapt_projection(&e, &t, Side::Input).unwrap();
        assert!(max_abs_diff(&extract(&b).unwrap(), &s) < 1e-12);
    }

    #[test]
    fn projection_rows_orthonormal() {
        let mut v = Circuit::new(3, "v");
        v.push(Gate::h(2)).unwrap();
        v.push(Gate::cnot(2, 0).unwrap()).unwrap();
        let p = Projection::new(3, vec![1, 0], Some(Arc::new(v))).unwrap();
        let m = p.matrix().unwrap();
        assert!(max_abs_diff(&(&m * m.adjoint()), &CMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn negation_flips_sign() {
        let e = prepare_vector(&real_vector(&[0.6, 0.8])).unwrap();
        let n = e.negated().unwrap();
        let v = extract_vector(&n, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[-0.6, -0.8])) < 1e-12);
        assert!(vec_max_abs_diff(&extract_vector(&n, Backend::Algebraic).unwrap(), &v) < 1e-12);
    }
}
