use crate::error::{Error, Result};
use crate::linalg::{c64, CVector, C64};

/// Largest register the simulator will allocate.
pub const MAX_STATE_WIRES: usize = 26;

/// Pure state of an n-wire register; amplitude `j` belongs to basis state
/// `|j⟩` with wire 0 as the least significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    wires: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(wires: usize) -> Result<Self> {
        Self::basis(wires, 0)
    }

    pub fn basis(wires: usize, index: usize) -> Result<Self> {
        if wires > MAX_STATE_WIRES {
            return Err(Error::TooLarge(wires));
        }
        let dim = 1usize << wires;
        if index >= dim {
            return Err(Error::DimensionMismatch(format!("basis index {index} on {wires} wires")));
        }
        let mut amps = vec![c64(0.0, 0.0); dim];
        amps[index] = c64(1.0, 0.0);
        Ok(StateVector { wires, amps })
    }

    /// Wraps amplitudes as given; the length must be a power of two. The
    /// vector is not renormalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len();
        if n == 0 || n & (n - 1) != 0 {
            return Err(Error::DimensionMismatch(format!("state of length {n} is not a power of two")));
        }
        Ok(StateVector { wires: n.trailing_zeros() as usize, amps })
    }

    pub fn from_vector(v: &CVector) -> Result<Self> {
        Self::from_amplitudes(v.iter().copied().collect())
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_vector(self) -> CVector {
        CVector::from_vec(self.amps)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("inner product of unequal registers".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Probability that the listed wires read the given bit pattern.
    pub fn pattern_probability(&self, wires: &[usize], pattern: &[bool]) -> f64 {
        let (mask, want) = mask_and_value(wires, pattern);
        self.amps
            .iter()
            .enumerate()
            .filter(|(j, _)| j & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Marginal Born distribution on `wires`; outcome index bit `i` is the
    /// value of `wires[i]`.
    pub fn marginal(&self, wires: &[usize]) -> Vec<f64> {
        let mut p = vec![0.0; 1usize << wires.len()];
        for (j, a) in self.amps.iter().enumerate() {
            let mut k = 0;
            for (i, &w) in wires.iter().enumerate() {
                k |= ((j >> w) & 1) << i;
            }
            p[k] += a.norm_sqr();
        }
        p
    }
}

pub(crate) fn mask_and_value(wires: &[usize], pattern: &[bool]) -> (usize, usize) {
    let mut mask = 0;
    let mut want = 0;
    for (&w, &b) in wires.iter().zip(pattern) {
        mask |= 1 << w;
        if b {
            want |= 1 << w;
        }
    }
    (mask, want)
}
