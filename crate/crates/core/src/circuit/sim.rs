use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::gate::{unitarity_deviation, Control, Gate, GateKind, UNITARY_TOL};
use super::state::{mask_and_value, StateVector};
use super::{Call, Circuit, Op};
use crate::error::{Error, Result};
use crate::linalg::{c64, C64};

/// Outcome counts keyed by the measured bit string (bit `i` = `wires[i]`).
pub type Histogram = BTreeMap<usize, u64>;

/// Runs `circuit` on `initial` and returns the final state.
pub fn run(circuit: &Circuit, initial: &StateVector) -> Result<StateVector> {
    if initial.wires() != circuit.wires() {
        return Err(Error::DimensionMismatch(format!(
            "{}-wire state for a {}-wire circuit",
            initial.wires(),
            circuit.wires()
        )));
    }
    let mut state = initial.clone();
    let mut checked = HashSet::new();
    let map: Vec<usize> = (0..circuit.wires()).collect();
    run_into(circuit, &map, false, &[], &mut state, &mut checked)?;
    Ok(state)
}

fn run_into(
    circuit: &Circuit,
    map: &[usize],
    adjoint: bool,
    controls: &[Control],
    state: &mut StateVector,
    checked: &mut HashSet<usize>,
) -> Result<()> {
    let mut step = |op: &Op| -> Result<()> {
        match op {
            Op::Gate(g) => {
                if let GateKind::SmallUnitary(m) = &g.kind {
                    if checked.insert(Arc::as_ptr(m) as usize) {
                        let dev = unitarity_deviation(m);
                        if dev > UNITARY_TOL {
                            return Err(Error::NonUnitary(dev));
                        }
                    }
                }
                let g = if adjoint { g.adjoint() } else { g.clone() };
                apply(&g.remap(map).with_controls(controls), state)
            }
            Op::Call(Call { body, wire_map, adjoint: a, controls: c }) => {
                let sub: Vec<usize> = wire_map.iter().map(|&w| map[w]).collect();
                let mut ctrl = controls.to_vec();
                ctrl.extend(c.iter().map(|k| Control { wire: map[k.wire], on: k.on }));
                run_into(body, &sub, adjoint ^ a, &ctrl, state, checked)
            }
        }
    };
    if adjoint {
        circuit.ops().iter().rev().try_for_each(&mut step)
    } else {
        circuit.ops().iter().try_for_each(&mut step)
    }
}

/// Applies one gate in place.
pub fn apply(gate: &Gate, state: &mut StateVector) -> Result<()> {
    gate.validate()?;
    let n = state.wires();
    if let Some(w) = gate.all_wires().find(|&w| w >= n) {
        return Err(Error::InvalidGate(format!("wire {w} out of range for a {n}-wire state")));
    }
    let ctrl_wires: Vec<usize> = gate.controls.iter().map(|c| c.wire).collect();
    let ctrl_bits: Vec<bool> = gate.controls.iter().map(|c| c.on).collect();
    let (cmask, cval) = mask_and_value(&ctrl_wires, &ctrl_bits);
    let amps = state.amplitudes_mut();
    match &gate.kind {
        GateKind::PauliX | GateKind::ControlledNot | GateKind::MultiControlledX { .. } => {
            let target = *gate.wires.last().expect("target");
            let (bw, bp): (Vec<usize>, Vec<bool>) = match &gate.kind {
                GateKind::ControlledNot => (vec![gate.wires[0]], vec![true]),
                GateKind::MultiControlledX { pattern } => {
                    (gate.wires[..gate.wires.len() - 1].to_vec(), pattern.clone())
                }
                _ => (Vec::new(), Vec::new()),
            };
            let (m2, v2) = mask_and_value(&bw, &bp);
            let (mask, val) = (cmask | m2, cval | v2);
            let t = 1usize << target;
            for j in 0..amps.len() {
                if j & t == 0 && j & mask == val {
                    amps.swap(j, j | t);
                }
            }
        }
        GateKind::PhaseFlipOnPattern { pattern } => {
            let (m2, v2) = mask_and_value(&gate.wires, pattern);
            let (mask, val) = (cmask | m2, cval | v2);
            for (j, a) in amps.iter_mut().enumerate() {
                if j & mask == val {
                    *a = -*a;
                }
            }
        }
        GateKind::ModularAdder { subtract } => {
            let half = gate.wires.len() / 2;
            let (tw, sw) = gate.wires.split_at(half);
            let modulus = 1usize << half;
            let read = |j: usize, ws: &[usize]| {
                ws.iter().enumerate().fold(0usize, |acc, (i, &w)| acc | (((j >> w) & 1) << i))
            };
            let tmask: usize = tw.iter().map(|&w| 1usize << w).sum();
            let mut out = vec![c64(0.0, 0.0); amps.len()];
            for (j, &a) in amps.iter().enumerate() {
                if j & cmask != cval {
                    out[j] += a;
                    continue;
                }
                let x = read(j, tw);
                let y = read(j, sw);
                let nx = if *subtract { (x + modulus - y) % modulus } else { (x + y) % modulus };
                let mut k = j & !tmask;
                for (i, &w) in tw.iter().enumerate() {
                    k |= ((nx >> i) & 1) << w;
                }
                out[k] += a;
            }
            amps.copy_from_slice(&out);
        }
        _ => {
            let m = gate.target_matrix().expect("dense kind");
            apply_dense(amps, &gate.wires, &m, cmask, cval);
        }
    }
    Ok(())
}

fn apply_dense(amps: &mut [C64], wires: &[usize], m: &crate::linalg::CMatrix, cmask: usize, cval: usize) {
    let k = wires.len();
    let dim = 1usize << k;
    let tmask: usize = wires.iter().map(|&w| 1usize << w).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|l| wires.iter().enumerate().fold(0, |acc, (i, &w)| acc | (((l >> i) & 1) << w)))
        .collect();
    let mut buf = vec![c64(0.0, 0.0); dim];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & cmask != cval {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = c64(0.0, 0.0);
            for (c, b) in buf.iter().enumerate() {
                acc += m[(r, c)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// Draws `shots` i.i.d. measurement outcomes of `wires` from the Born
/// distribution of `state`, deterministically for a given `seed`.
pub fn sample(state: &StateVector, wires: &[usize], shots: u64, seed: u64) -> Result<Histogram> {
    if wires.is_empty() {
        return Err(Error::EmptyWireSet);
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if let Some(&w) = wires.iter().find(|&&w| w >= state.wires()) {
        return Err(Error::InvalidArgument(format!("wire {w} out of range")));
    }
    let probs = state.marginal(wires);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(multinomial(&probs, shots, &mut rng))
}

/// Multinomial draw by successive conditional binomials.
pub(crate) fn multinomial(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Histogram {
    let total: f64 = probs.iter().sum();
    let mut hist = Histogram::new();
    let mut left = shots;
    let mut mass = total;
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if p <= 0.0 {
            mass -= p.max(0.0);
            continue;
        }
        let q = if mass <= 0.0 { 1.0 } else { (p / mass).clamp(0.0, 1.0) };
        let draw = if k + 1 == probs.len() || q >= 1.0 {
            left
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        if draw > 0 {
            hist.insert(k, draw);
        }
        left -= draw;
        mass -= p;
    }
    if left > 0 {
        // rounding left some mass unassigned; give it to the most likely outcome
        let best = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        *hist.entry(best).or_insert(0) += left;
    }
    hist
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;

    fn amp(s: &StateVector, j: usize) -> C64 {
        s.amplitudes()[j]
    }

    #[test]
    fn hadamard_on_zero() {
        let mut c = Circuit::new(1, "h");
        c.push(Gate::h(0)).unwrap();
        let s = run(&c, &StateVector::zero(1).unwrap()).unwrap();
        assert!((amp(&s, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amp(&s, 1).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn modular_adder_example() {
        // target register x = 3 on wires 0..2, source y = 2 on wires 2..4
        let g = Gate::modular_adder(&[0, 1], &[2, 3]).unwrap();
        let mut s = StateVector::basis(4, 3 | (2 << 2)).unwrap();
        apply(&g, &mut s).unwrap();
        assert_eq!(amp(&s, 1 | (2 << 2)), c64(1.0, 0.0));
    }

    #[test]
    fn controlled_ry_only_fires_on_control() {
        let g = Gate::ry(0, std::f64::consts::PI).with_controls(&[Control::on(1)]);
        let mut s = StateVector::zero(2).unwrap();
        apply(&g, &mut s).unwrap();
        assert_eq!(amp(&s, 0), c64(1.0, 0.0));
        let mut s = StateVector::basis(2, 2).unwrap();
        apply(&g, &mut s).unwrap();
        assert!((amp(&s, 3).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wire_zero_is_least_significant() {
        let mut s = StateVector::zero(3).unwrap();
        apply(&Gate::x(1), &mut s).unwrap();
        assert_eq!(amp(&s, 2), c64(1.0, 0.0));
    }

    #[test]
    fn sample_zero_state() {
        let s = StateVector::zero(2).unwrap();
        let h = sample(&s, &[0, 1], 100, 7).unwrap();
        assert_eq!(h.get(&0), Some(&100));
        assert!(sample(&s, &[], 10, 7).is_err());
    }

    #[test]
    fn sample_is_reproducible() {
        let a = FRAC_1_SQRT_2;
        let s = StateVector::from_amplitudes(vec![c64(a, 0.0), c64(a, 0.0)]).unwrap();
        assert_eq!(sample(&s, &[0], 1000, 3).unwrap(), sample(&s, &[0], 1000, 3).unwrap());
        let h = sample(&s, &[0], 10_000, 3).unwrap();
        let p0 = *h.get(&0).unwrap_or(&0) as f64 / 10_000.0;
        assert!((p0 - 0.5).abs() < 5.0 * 0.005);
    }

    #[test]
    fn non_unitary_matrix_caught_at_run() {
        let mut c = Circuit::new(1, "bad");
        let m = crate::linalg::real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        c.ops.push(Op::Gate(Gate {
            kind: GateKind::SmallUnitary(Arc::new(m)),
            wires: vec![0],
            controls: vec![],
        }));
        assert!(matches!(run(&c, &StateVector::zero(1).unwrap()), Err(Error::NonUnitary(_))));
    }
}
