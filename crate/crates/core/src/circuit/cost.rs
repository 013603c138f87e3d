use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::gate::{Gate, GateKind};
use crate::error::{Error, Result};

/// Environment variable holding cost-model overrides, e.g. `h=3,mcx=2` or
/// `modadd=none` to drop a family (counting a circuit that uses a dropped
/// family then fails with [`Error::UnknownGateKind`]).
pub const COST_MODEL_ENV: &str = "AMPENC_COST_MODEL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateFamily {
    X,
    H,
    Ry,
    Rz,
    Cx,
    Mcx,
    Unitary,
    ModAdd,
    PhaseFlip,
}

impl GateFamily {
    pub const ALL: [GateFamily; 9] = [
        GateFamily::X,
        GateFamily::H,
        GateFamily::Ry,
        GateFamily::Rz,
        GateFamily::Cx,
        GateFamily::Mcx,
        GateFamily::Unitary,
        GateFamily::ModAdd,
        GateFamily::PhaseFlip,
    ];

    pub fn of(kind: &GateKind) -> Self {
        match kind {
            GateKind::PauliX => GateFamily::X,
            GateKind::Hadamard => GateFamily::H,
            GateKind::RotY(_) => GateFamily::Ry,
            GateKind::RotZ(_) => GateFamily::Rz,
            GateKind::ControlledNot => GateFamily::Cx,
            GateKind::MultiControlledX { .. } => GateFamily::Mcx,
            GateKind::SmallUnitary(_) => GateFamily::Unitary,
            GateKind::ModularAdder { .. } => GateFamily::ModAdd,
            GateKind::PhaseFlipOnPattern { .. } => GateFamily::PhaseFlip,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateFamily::X => "x",
            GateFamily::H => "h",
            GateFamily::Ry => "ry",
            GateFamily::Rz => "rz",
            GateFamily::Cx => "cx",
            GateFamily::Mcx => "mcx",
            GateFamily::Unitary => "unitary",
            GateFamily::ModAdd => "modadd",
            GateFamily::PhaseFlip => "phaseflip",
        }
    }
}

impl fmt::Display for GateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let alias = match s.as_str() {
            "paulix" | "not" => "x",
            "hadamard" => "h",
            "roty" => "ry",
            "rotz" => "rz",
            "cnot" | "controllednot" => "cx",
            "multicontrolledx" => "mcx",
            "smallunitary" => "unitary",
            "modularadder" | "adder" => "modadd",
            "phaseflip_on_pattern" | "phaseflip-on-pattern" | "phasefliponpattern" => "phaseflip",
            other => other,
        };
        GateFamily::ALL
            .into_iter()
            .find(|f| f.name() == alias)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gate family `{s}`")))
    }
}

/// Atomic-gate costs per gate family.
///
/// Each gate's cost is a structural base count (depending on its width and
/// number of controls) times a per-family weight. With unit weights:
///
/// | gate | cost |
/// |---|---|
/// | X, CNOT, MCX with c controls | `max(1, 2c - 1)` |
/// | H, RY, RZ with c attached controls | 1 if `c <= 1`, else `2c` |
/// | dense unitary on w wires, c controls | `5^(w + c - 1)` |
/// | modular adder on n wires, c controls | `20 (n + c)` |
/// | phase flip on w wires | `max(1, 2w - 3)` |
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostModel {
    weights: BTreeMap<GateFamily, u64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { weights: GateFamily::ALL.into_iter().map(|f| (f, 1)).collect() }
    }
}

impl CostModel {
    /// The default model with overrides from [`COST_MODEL_ENV`] applied.
    pub fn from_env() -> Result<Self> {
        match std::env::var(COST_MODEL_ENV) {
            Ok(spec) if !spec.trim().is_empty() => Self::default().with_overrides(&spec),
            _ => Ok(Self::default()),
        }
    }

    /// Applies comma-separated `family=weight` overrides. A weight of `none`
    /// removes the family.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("cost override `{item}` lacks `=`")))?;
            let family: GateFamily = name.parse()?;
            if value.trim().eq_ignore_ascii_case("none") {
                self.weights.remove(&family);
                continue;
            }
            let w: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad cost weight `{value}`")))?;
            if w == 0 {
                return Err(Error::InvalidArgument("cost weights must be at least 1".into()));
            }
            self.weights.insert(family, w);
        }
        Ok(self)
    }

    pub fn weight(&self, family: GateFamily) -> Option<u64> {
        self.weights.get(&family).copied()
    }

    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }

    pub fn cost(&self, gate: &Gate) -> Result<u64> {
        let family = GateFamily::of(&gate.kind);
        let weight = self
            .weight(family)
            .ok_or_else(|| Error::UnknownGateKind(family.name().to_string()))?;
        Ok(weight.saturating_mul(base_cost(gate)))
    }
}

fn base_cost(gate: &Gate) -> u64 {
    let c = gate.control_count() as u64;
    let w = gate.wires.len() as u64;
    match &gate.kind {
        GateKind::PauliX | GateKind::ControlledNot | GateKind::MultiControlledX { .. } => {
            (2 * c).saturating_sub(1).max(1)
        }
        GateKind::Hadamard | GateKind::RotY(_) | GateKind::RotZ(_) => {
            if c <= 1 {
                1
            } else {
                2 * c
            }
        }
        GateKind::SmallUnitary(_) => 5u64.saturating_pow((w + c - 1) as u32),
        GateKind::ModularAdder { .. } => 20 * (w + c),
        GateKind::PhaseFlipOnPattern { .. } => (2 * w).saturating_sub(3).max(1),
    }
}
