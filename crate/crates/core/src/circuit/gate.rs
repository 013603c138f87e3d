use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, C64};

/// Largest number of wires a [`GateKind::SmallUnitary`] may act on.
///
/// Coefficient dilations of cubic polynomials on four-dimensional data need
/// seven wires, so the limit sits well above three.
pub const SMALL_UNITARY_MAX_WIRES: usize = 10;

/// Tolerance used when checking that a user supplied matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// A control condition: the gate fires only if `wire` is in state `|on⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Control {
    pub wire: usize,
    pub on: bool,
}

impl Control {
    pub fn on(wire: usize) -> Self {
        Control { wire, on: true }
    }

    pub fn off(wire: usize) -> Self {
        Control { wire, on: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    PauliX,
    Hadamard,
    /// `exp(-i θ Y / 2)`.
    RotY(f64),
    /// `exp(-i θ Z / 2)`; note `RotZ(2π) = -I`, which is how global signs are carried.
    RotZ(f64),
    /// wires = `[control, target]`.
    ControlledNot,
    /// wires = `[controls.., target]`, one pattern bit per control.
    MultiControlledX { pattern: Vec<bool> },
    /// Dense unitary; bit `i` of the local index is `wires[i]`.
    SmallUnitary(Arc<CMatrix>),
    /// wires = `[target register.., source register..]`, both of equal length n;
    /// maps `|x⟩|y⟩` to `|x ± y mod 2^n⟩|y⟩`.
    ModularAdder { subtract: bool },
    /// Flips the sign of the basis state matching `pattern` on `wires`.
    ///
    /// This is `I - 2|p⟩⟨p|`, i.e. the reflection `2|p⟩⟨p| - I` up to a global
    /// phase of -1. Callers that need the exact reflection append `RotZ(2π)`.
    PhaseFlipOnPattern { pattern: Vec<bool> },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::PauliX => "x",
            GateKind::Hadamard => "h",
            GateKind::RotY(_) => "ry",
            GateKind::RotZ(_) => "rz",
            GateKind::ControlledNot => "cx",
            GateKind::MultiControlledX { .. } => "mcx",
            GateKind::SmallUnitary(_) => "unitary",
            GateKind::ModularAdder { .. } => "modadd",
            GateKind::PhaseFlipOnPattern { .. } => "phaseflip",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    /// Extra controls for kinds that have no built-in control register.
    pub controls: Vec<Control>,
}

fn check_distinct(wires: &[usize], controls: &[Control]) -> Result<()> {
    let mut all: Vec<usize> = wires.to_vec();
    all.extend(controls.iter().map(|c| c.wire));
    let n = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != n {
        return Err(Error::InvalidGate(format!("repeated wire in {wires:?} / {controls:?}")));
    }
    Ok(())
}

impl Gate {
    fn raw(kind: GateKind, wires: Vec<usize>) -> Self {
        Gate { kind, wires, controls: Vec::new() }
    }

    pub fn x(wire: usize) -> Self {
        Self::raw(GateKind::PauliX, vec![wire])
    }

    pub fn h(wire: usize) -> Self {
        Self::raw(GateKind::Hadamard, vec![wire])
    }

    pub fn ry(wire: usize, theta: f64) -> Self {
        Self::raw(GateKind::RotY(theta), vec![wire])
    }

    pub fn rz(wire: usize, theta: f64) -> Self {
        Self::raw(GateKind::RotZ(theta), vec![wire])
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        let g = Self::raw(GateKind::ControlledNot, vec![control, target]);
        g.validate()?;
        Ok(g)
    }

    /// Multi-controlled X. An empty control list degenerates to a plain X, and
    /// a single positive control to a CNOT.
    pub fn mcx(controls: &[usize], pattern: &[bool], target: usize) -> Result<Self> {
        if controls.len() != pattern.len() {
            return Err(Error::InvalidGate("control pattern length mismatch".into()));
        }
        let ctrl: Vec<Control> =
            controls.iter().zip(pattern).map(|(&wire, &on)| Control { wire, on }).collect();
        let g = Gate::x(target).with_controls(&ctrl);
        g.validate()?;
        Ok(g)
    }

    pub fn small_unitary(wires: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if wires.is_empty() {
            return Err(Error::EmptyWireSet);
        }
        if wires.len() > SMALL_UNITARY_MAX_WIRES {
            return Err(Error::InvalidGate(format!(
                "dense unitary on {} wires exceeds the limit of {SMALL_UNITARY_MAX_WIRES}",
                wires.len()
            )));
        }
        let dim = 1usize << wires.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {} wires",
                matrix.nrows(),
                matrix.ncols(),
                wires.len()
            )));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        let g = Self::raw(GateKind::SmallUnitary(Arc::new(matrix)), wires);
        g.validate()?;
        Ok(g)
    }

    pub fn modular_adder(target: &[usize], source: &[usize]) -> Result<Self> {
        if target.is_empty() || target.len() != source.len() {
            return Err(Error::InvalidGate("adder registers must be nonempty and equal length".into()));
        }
        let mut wires = target.to_vec();
        wires.extend_from_slice(source);
        let g = Self::raw(GateKind::ModularAdder { subtract: false }, wires);
        g.validate()?;
        Ok(g)
    }

    pub fn phase_flip(wires: &[usize], pattern: &[bool]) -> Result<Self> {
        if wires.is_empty() {
            return Err(Error::EmptyWireSet);
        }
        if wires.len() != pattern.len() {
            return Err(Error::InvalidGate("phase-flip pattern length mismatch".into()));
        }
        let g = Self::raw(GateKind::PhaseFlipOnPattern { pattern: pattern.to_vec() }, wires.to_vec());
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_distinct(&self.wires, &self.controls)?;
        let ok = match &self.kind {
            GateKind::PauliX | GateKind::Hadamard | GateKind::RotY(_) | GateKind::RotZ(_) => {
                self.wires.len() == 1
            }
            GateKind::ControlledNot => self.wires.len() == 2,
            GateKind::MultiControlledX { pattern } => self.wires.len() == pattern.len() + 1,
            GateKind::SmallUnitary(m) => m.nrows() == 1 << self.wires.len(),
            GateKind::ModularAdder { .. } => !self.wires.is_empty() && self.wires.len().is_multiple_of(2),
            GateKind::PhaseFlipOnPattern { pattern } => {
                !pattern.is_empty() && self.wires.len() == pattern.len()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGate(format!("{} on wires {:?}", self.kind.name(), self.wires)))
        }
    }

    /// Every wire the gate touches, controls included.
    pub fn all_wires(&self) -> impl Iterator<Item = usize> + '_ {
        self.wires.iter().copied().chain(self.controls.iter().map(|c| c.wire))
    }

    /// Number of control conditions, whether built in or attached.
    pub fn control_count(&self) -> usize {
        let builtin = match &self.kind {
            GateKind::ControlledNot => 1,
            GateKind::MultiControlledX { pattern } => pattern.len(),
            _ => 0,
        };
        builtin + self.controls.len()
    }

    /// Attaches extra controls, folding them into the built-in control
    /// registers of X-type and phase-flip gates so that equal actions have
    /// equal representations.
    pub fn with_controls(&self, extra: &[Control]) -> Gate {
        if extra.is_empty() {
            return self.clone();
        }
        match &self.kind {
            GateKind::PauliX | GateKind::ControlledNot | GateKind::MultiControlledX { .. } => {
                let target = *self.wires.last().expect("x-type gate has a target");
                let mut ctrl: Vec<Control> = match &self.kind {
                    GateKind::ControlledNot => vec![Control::on(self.wires[0])],
                    GateKind::MultiControlledX { pattern } => self.wires[..self.wires.len() - 1]
                        .iter()
                        .zip(pattern)
                        .map(|(&wire, &on)| Control { wire, on })
                        .collect(),
                    _ => Vec::new(),
                };
                ctrl.extend(self.controls.iter().copied());
                ctrl.extend_from_slice(extra);
                x_with_controls(target, &ctrl)
            }
            GateKind::PhaseFlipOnPattern { pattern } => {
                let mut wires = self.wires.clone();
                let mut pattern = pattern.clone();
                for c in self.controls.iter().chain(extra) {
                    wires.push(c.wire);
                    pattern.push(c.on);
                }
                Gate::raw(GateKind::PhaseFlipOnPattern { pattern }, wires)
            }
            _ => {
                let mut g = self.clone();
                g.controls.extend_from_slice(extra);
                g
            }
        }
    }

    pub fn adjoint(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::RotY(t) => GateKind::RotY(-t),
            GateKind::RotZ(t) => GateKind::RotZ(-t),
            GateKind::SmallUnitary(m) => GateKind::SmallUnitary(Arc::new(m.adjoint())),
            GateKind::ModularAdder { subtract } => GateKind::ModularAdder { subtract: !subtract },
            k => k.clone(),
        };
        Gate { kind, wires: self.wires.clone(), controls: self.controls.clone() }
    }

    /// Relabels wires through `map` (old wire `i` becomes `map[i]`).
    pub fn remap(&self, map: &[usize]) -> Gate {
        Gate {
            kind: self.kind.clone(),
            wires: self.wires.iter().map(|&w| map[w]).collect(),
            controls: self.controls.iter().map(|c| Control { wire: map[c.wire], on: c.on }).collect(),
        }
    }

    /// Dense matrix on the target wires for the single-register kinds.
    pub fn target_matrix(&self) -> Option<CMatrix> {
        match &self.kind {
            GateKind::PauliX => Some(CMatrix::from_row_slice(
                2,
                2,
                &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
            )),
            GateKind::Hadamard => {
                let h = c64(FRAC_1_SQRT_2, 0.0);
                Some(CMatrix::from_row_slice(2, 2, &[h, h, h, -h]))
            }
            GateKind::RotY(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                Some(CMatrix::from_row_slice(
                    2,
                    2,
                    &[c64(c, 0.0), c64(-s, 0.0), c64(s, 0.0), c64(c, 0.0)],
                ))
            }
            GateKind::RotZ(t) => {
                let z = C64::from_polar(1.0, -t / 2.0);
                Some(CMatrix::from_row_slice(2, 2, &[z, c64(0.0, 0.0), c64(0.0, 0.0), z.conj()]))
            }
            GateKind::SmallUnitary(m) => Some((**m).clone()),
            _ => None,
        }
    }
}

fn x_with_controls(target: usize, ctrl: &[Control]) -> Gate {
    match ctrl {
        [] => Gate::x(target),
        [c] if c.on => Gate::raw(GateKind::ControlledNot, vec![c.wire, target]),
        _ => {
            let mut wires: Vec<usize> = ctrl.iter().map(|c| c.wire).collect();
            wires.push(target);
            Gate::raw(
                GateKind::MultiControlledX { pattern: ctrl.iter().map(|c| c.on).collect() },
                wires,
            )
        }
    }
}

/// Frobenius norm of `U†U - I`, an upper bound on the operator-norm deviation.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    (prod - CMatrix::identity(m.nrows(), m.ncols())).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controls_fold_into_x_family() {
        let g = Gate::x(2).with_controls(&[Control::on(0)]);
        assert_eq!(g.kind, GateKind::ControlledNot);
        assert_eq!(g.wires, vec![0, 2]);

        let g = Gate::cnot(0, 2).unwrap().with_controls(&[Control::off(1)]);
        assert_eq!(g.kind, GateKind::MultiControlledX { pattern: vec![true, false] });
        assert_eq!(g.wires, vec![0, 1, 2]);

        let g = Gate::x(1).with_controls(&[Control::off(0)]);
        assert_eq!(g.kind, GateKind::MultiControlledX { pattern: vec![false] });
    }

    #[test]
    fn phase_flip_absorbs_controls() {
        let g = Gate::phase_flip(&[0], &[false]).unwrap().with_controls(&[Control::on(3)]);
        assert_eq!(g.wires, vec![0, 3]);
        assert_eq!(g.kind, GateKind::PhaseFlipOnPattern { pattern: vec![false, true] });
    }

    #[test]
    fn repeated_wires_rejected() {
        assert!(Gate::cnot(1, 1).is_err());
        assert!(Gate::modular_adder(&[0, 1], &[1, 2]).is_err());
        assert!(Gate::phase_flip(&[], &[]).is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let m = CMatrix::from_element(2, 2, c64(1.0, 0.0));
        assert!(matches!(Gate::small_unitary(vec![0], m), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn rotation_adjoint_negates_angle() {
        assert_eq!(Gate::ry(0, 0.7).adjoint().kind, GateKind::RotY(-0.7));
        assert_eq!(Gate::rz(0, 0.7).adjoint().adjoint(), Gate::rz(0, 0.7));
    }
}
