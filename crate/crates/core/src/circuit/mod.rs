//! Circuit IR and its statevector interpreter.
//!
//! Wire 0 is the least significant bit of a basis index: the state `|j⟩` of an
//! n-wire register has wire `i` in state `(j >> i) & 1`. Every other module
//! relies on this convention.
//!
//! Circuits are immutable once shared. Larger constructions reference smaller
//! ones through [`Call`] ops holding an `Arc`, so an encoding that uses an
//! input circuit `k` times stores it once; gate counts and simulation expand
//! the calls on the fly.

mod cost;
mod gate;
pub mod qasm;
mod sim;
mod state;

use std::collections::HashMap;
use std::sync::Arc;

pub use cost::{CostModel, GateFamily, COST_MODEL_ENV};
pub use gate::{unitarity_deviation, Control, Gate, GateKind, SMALL_UNITARY_MAX_WIRES, UNITARY_TOL};
pub use sim::{apply, run, sample, Histogram};
pub use state::StateVector;

use crate::error::{Error, Result};

/// Invocation of a shared sub-circuit on a subset of the parent's wires.
#[derive(Clone, Debug)]
pub struct Call {
    pub body: Arc<Circuit>,
    /// `wire_map[i]` is the parent wire playing the role of body wire `i`.
    pub wire_map: Vec<usize>,
    pub adjoint: bool,
    pub controls: Vec<Control>,
}

impl PartialEq for Call {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.body, &other.body) || self.body == other.body)
            && self.wire_map == other.wire_map
            && self.adjoint == other.adjoint
            && self.controls == other.controls
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Gate(Gate),
    Call(Call),
}

#[derive(Clone, Debug)]
pub struct Circuit {
    wires: usize,
    ops: Vec<Op>,
    label: String,
}

/// Labels are cosmetic and ignored by equality.
impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.wires == other.wires && self.ops == other.ops
    }
}

impl Circuit {
    pub fn new(wires: usize, label: impl Into<String>) -> Self {
        Circuit { wires, ops: Vec::new(), label: label.into() }
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate()?;
        if let Some(w) = gate.all_wires().find(|&w| w >= self.wires) {
            return Err(Error::InvalidGate(format!(
                "wire {w} out of range for a {}-wire circuit",
                self.wires
            )));
        }
        self.ops.push(Op::Gate(gate));
        Ok(self)
    }

    /// Appends a call of `body` with its wire `i` mapped to `wire_map[i]`.
    pub fn call(
        &mut self,
        body: &Arc<Circuit>,
        wire_map: &[usize],
        adjoint: bool,
        controls: &[Control],
    ) -> Result<&mut Self> {
        if wire_map.len() != body.wires {
            return Err(Error::DimensionMismatch(format!(
                "call of a {}-wire circuit with {} mapped wires",
                body.wires,
                wire_map.len()
            )));
        }
        let mut used: Vec<usize> = wire_map.to_vec();
        used.extend(controls.iter().map(|c| c.wire));
        let n = used.len();
        used.sort_unstable();
        used.dedup();
        if used.len() != n {
            return Err(Error::InvalidGate("call maps two roles onto one wire".into()));
        }
        if used.last().is_some_and(|&w| w >= self.wires) {
            return Err(Error::InvalidGate("call wire out of range".into()));
        }
        if body.is_empty() {
            return Ok(self);
        }
        self.ops.push(Op::Call(Call {
            body: Arc::clone(body),
            wire_map: wire_map.to_vec(),
            adjoint,
            controls: controls.to_vec(),
        }));
        Ok(self)
    }

    /// Calls `body` on the parent's first `body.wires()` wires.
    pub fn call_prefix(&mut self, body: &Arc<Circuit>, adjoint: bool) -> Result<&mut Self> {
        let map: Vec<usize> = (0..body.wires).collect();
        self.call(body, &map, adjoint, &[])
    }

    /// Inlines the ops of `other` (same width) after the ops of `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.wires != self.wires {
            return Err(Error::DimensionMismatch(format!(
                "appending a {}-wire circuit to a {}-wire circuit",
                other.wires, self.wires
            )));
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(self)
    }

    /// Returns a copy padded to `wires` wires; the extra wires stay idle.
    pub fn widened(&self, wires: usize) -> Circuit {
        assert!(wires >= self.wires);
        Circuit { wires, ops: self.ops.clone(), label: self.label.clone() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn adjoint(&self) -> Circuit {
        let ops = self
            .ops
            .iter()
            .rev()
            .map(|op| match op {
                Op::Gate(g) => Op::Gate(g.adjoint()),
                Op::Call(c) => Op::Call(Call { adjoint: !c.adjoint, ..c.clone() }),
            })
            .collect();
        let label = match self.label.strip_suffix('†') {
            Some(base) => base.to_string(),
            None => format!("{}†", self.label),
        };
        Circuit { wires: self.wires, ops, label }
    }

    /// The flat gate sequence with all calls expanded.
    pub fn flatten(&self) -> Vec<Gate> {
        let mut out = Vec::new();
        let map: Vec<usize> = (0..self.wires).collect();
        self.flatten_into(&map, false, &[], &mut out);
        out
    }

    fn flatten_into(&self, map: &[usize], adjoint: bool, controls: &[Control], out: &mut Vec<Gate>) {
        let visit = |op: &Op, out: &mut Vec<Gate>| match op {
            Op::Gate(g) => {
                let g = if adjoint { g.adjoint() } else { g.clone() };
                out.push(g.remap(map).with_controls(controls));
            }
            Op::Call(c) => {
                let sub_map: Vec<usize> = c.wire_map.iter().map(|&w| map[w]).collect();
                let mut ctrl = controls.to_vec();
                ctrl.extend(c.controls.iter().map(|k| Control { wire: map[k.wire], on: k.on }));
                c.body.flatten_into(&sub_map, adjoint ^ c.adjoint, &ctrl, out);
            }
        };
        if adjoint {
            self.ops.iter().rev().for_each(|op| visit(op, out));
        } else {
            self.ops.iter().for_each(|op| visit(op, out));
        }
    }

    /// Total atomic-gate count under `model`, expanding calls with memoization
    /// so that deeply shared circuits are counted in time linear in their size.
    pub fn gate_count(&self, model: &CostModel) -> Result<u64> {
        let mut memo = HashMap::new();
        self.count_with(model, 0, &mut memo)
    }

    fn count_with(
        &self,
        model: &CostModel,
        extra_controls: usize,
        memo: &mut HashMap<(usize, usize), u64>,
    ) -> Result<u64> {
        let mut total: u64 = 0;
        for op in &self.ops {
            let c = match op {
                Op::Gate(g) => {
                    let dummy: Vec<Control> = (0..extra_controls)
                        .map(|i| Control::on(usize::MAX - i))
                        .collect();
                    model.cost(&g.with_controls(&dummy))?
                }
                Op::Call(call) => {
                    let key = (Arc::as_ptr(&call.body) as usize, extra_controls + call.controls.len());
                    match memo.get(&key) {
                        Some(&v) => v,
                        None => {
                            let v = call.body.count_with(model, key.1, memo)?;
                            memo.insert(key, v);
                            v
                        }
                    }
                }
            };
            total = total.saturating_add(c);
        }
        Ok(total)
    }

    /// Number of primitive gates after expansion.
    pub fn num_gates(&self) -> u64 {
        fn go(c: &Circuit, memo: &mut HashMap<usize, u64>) -> u64 {
            c.ops
                .iter()
                .map(|op| match op {
                    Op::Gate(_) => 1,
                    Op::Call(call) => {
                        let key = Arc::as_ptr(&call.body) as usize;
                        if let Some(&v) = memo.get(&key) {
                            v
                        } else {
                            let v = go(&call.body, memo);
                            memo.insert(key, v);
                            v
                        }
                    }
                })
                .fold(0u64, |a, b| a.saturating_add(b))
        }
        go(self, &mut HashMap::new())
    }

    /// How many times `target` is invoked (directly or through nested calls),
    /// counting adjoint invocations too.
    pub fn count_invocations(&self, target: &Arc<Circuit>) -> u64 {
        fn go(c: &Circuit, target: &Arc<Circuit>, memo: &mut HashMap<usize, u64>) -> u64 {
            c.ops
                .iter()
                .map(|op| match op {
                    Op::Gate(_) => 0,
                    Op::Call(call) if Arc::ptr_eq(&call.body, target) => 1,
                    Op::Call(call) => {
                        let key = Arc::as_ptr(&call.body) as usize;
                        if let Some(&v) = memo.get(&key) {
                            v
                        } else {
                            let v = go(&call.body, target, memo);
                            memo.insert(key, v);
                            v
                        }
                    }
                })
                .sum()
        }
        if std::ptr::eq(self, &**target) {
            return 1;
        }
        go(self, target, &mut HashMap::new())
    }

    /// Circuit made of `circuit` repeated `times` times.
    pub fn repeated(circuit: &Arc<Circuit>, times: usize) -> Result<Circuit> {
        let mut out = Circuit::new(circuit.wires, format!("{}^{times}", circuit.label));
        for _ in 0..times {
            out.call_prefix(circuit, false)?;
        }
        Ok(out)
    }
}

/// Circuit permuting wires: the content of wire `from[i]` ends up on wire
/// `to[i]`. Realized with three-CNOT swaps.
pub fn permutation_circuit(wires: usize, from: &[usize], to: &[usize]) -> Result<Circuit> {
    if from.len() != to.len() {
        return Err(Error::DimensionMismatch("permutation lists differ in length".into()));
    }
    // position[w] = wire currently holding the content that started on w
    let mut holder: Vec<usize> = (0..wires).collect();
    let mut content_at: Vec<usize> = (0..wires).collect();
    let mut c = Circuit::new(wires, "perm");
    for (&src, &dst) in from.iter().zip(to) {
        let cur = holder[src];
        if cur == dst {
            continue;
        }
        c.push(Gate::cnot(cur, dst)?)?;
        c.push(Gate::cnot(dst, cur)?)?;
        c.push(Gate::cnot(cur, dst)?)?;
        let other = content_at[dst];
        content_at.swap(cur, dst);
        holder[src] = dst;
        holder[other] = cur;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_circuit() -> Circuit {
        let mut c = Circuit::new(2, "c");
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::ry(1, 0.7)).unwrap();
        c.push(Gate::cnot(0, 1).unwrap()).unwrap();
        c
    }

    #[test]
    fn adjoint_reverses_and_inverts() {
        let mut c = Circuit::new(1, "c");
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::ry(0, 0.7)).unwrap();
        let a = c.adjoint();
        assert_eq!(a.flatten(), vec![Gate::ry(0, -0.7), Gate::h(0)]);

        let mut cx = Circuit::new(2, "cx");
        cx.push(Gate::cnot(0, 1).unwrap()).unwrap();
        assert_eq!(cx.adjoint(), cx);
    }

    #[test]
    fn double_adjoint_is_identity_gate_by_gate() {
        let c = sample_circuit();
        assert_eq!(c.adjoint().adjoint(), c);
        assert_eq!(c.adjoint().adjoint().label(), "c");
    }

    #[test]
    fn out_of_range_wire_rejected() {
        let mut c = Circuit::new(2, "c");
        assert!(c.push(Gate::h(2)).is_err());
    }

    #[test]
    fn counts_are_additive_over_repetition() {
        let model = CostModel::default();
        let base = Arc::new(sample_circuit());
        let one = base.gate_count(&model).unwrap();
        for k in 0..5 {
            let rep = Circuit::repeated(&base, k).unwrap();
            assert_eq!(rep.gate_count(&model).unwrap(), k as u64 * one);
            assert_eq!(rep.count_invocations(&base), k as u64);
        }
        assert_eq!(Circuit::new(3, "empty").gate_count(&model).unwrap(), 0);
    }

    #[test]
    fn controlled_call_counts_like_flattened() {
        let model = CostModel::default();
        let base = Arc::new(sample_circuit());
        let mut c = Circuit::new(4, "ctl");
        c.call(&base, &[1, 2], false, &[Control::on(0), Control::off(3)]).unwrap();
        c.call(&base, &[2, 1], true, &[]).unwrap();
        let flat: u64 = c.flatten().iter().map(|g| model.cost(g).unwrap()).sum();
        assert_eq!(c.gate_count(&model).unwrap(), flat);
        assert_eq!(c.num_gates(), 6);
    }
}
