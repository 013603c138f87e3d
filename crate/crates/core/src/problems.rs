//! Built-in problems: the two-dimensional quadratic map
//! `g(x) = (1, 1) − ((x₁+x₂)², (x₁−x₂)²)/8`, once through the generic
//! polynomial encoder and once as a hand-built circuit.

use std::sync::Arc;

use crate::circuit::{Circuit, Control, Gate};
use crate::encoding::{canonicalize, BlockEncoding, Projection};
use crate::error::{Error, Result};
use crate::linalg::{c64, kron, real_matrix, CMatrix};
use crate::polynomial::Polynomial;

pub const PAPER_G: &str = "paper-g";
pub const PAPER_G_DIRECT: &str = "paper-g-direct";

/// Names accepted by [`builtin`].
pub const BUILTIN: [&str; 2] = [PAPER_G, PAPER_G_DIRECT];

/// `A_0 = (1,1)ᵀ`, `A_1 = 0`, `A_2 = −(1/8)[[1,1,1,1],[1,−1,−1,1]]`.
pub fn paper_g() -> Polynomial {
    let a0 = real_matrix(2, 1, &[1.0, 1.0]);
    let a2 = real_matrix(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]) * c64(-0.125, 0.0);
    Polynomial::new(2, vec![a0, CMatrix::zeros(2, 2), a2]).expect("valid coefficients")
}

/// How a problem turns an iterate encoding into an encoding of `g(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Generic,
    Direct,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub polynomial: Polynomial,
    pub construction: Construction,
}

impl Problem {
    pub fn from_polynomial(name: impl Into<String>, polynomial: Polynomial) -> Self {
        Problem { name: name.into(), polynomial, construction: Construction::Generic }
    }

    /// Unnormalized encoding of `g(x)`.
    pub fn apply(&self, x: &BlockEncoding) -> Result<BlockEncoding> {
        match self.construction {
            Construction::Generic => crate::polynomial::encode_poly_raw(&self.polynomial, x),
            Construction::Direct => paper_g_direct(x),
        }
    }
}

pub fn builtin(name: &str) -> Option<Problem> {
    match name {
        PAPER_G => Some(Problem::from_polynomial(PAPER_G, paper_g())),
        PAPER_G_DIRECT => {
            Some(Problem { name: PAPER_G_DIRECT.into(), polynomial: paper_g(), construction: Construction::Direct })
        }
        _ => None,
    }
}

/// Orthogonal matrix whose first two rows are `[1,1,1,1]/2` and `[1,−1,−1,1]/2`.
fn sum_difference_unitary() -> CMatrix {
    real_matrix(
        4,
        4,
        &[
            0.5, 0.5, 0.5, 0.5, //
            0.5, -0.5, -0.5, 0.5, //
            0.5, -0.5, 0.5, -0.5, //
            0.5, 0.5, -0.5, -0.5,
        ],
    )
}

/// Hand-built encoding of `g(x)`: a select wire rotated by
/// `RY(2 atan(γ_x / (2·2^{1/4})))` chooses between `|+⟩` (weight `√2`) and
/// `−B(x ⊗ x)` (weight `γ_x²/4`), where `B` is the first two rows of
/// [`sum_difference_unitary`]. `γ = √2 + γ_x²/4`.
pub fn paper_g_direct(x: &BlockEncoding) -> Result<BlockEncoding> {
    if x.shape() != (2, 1) {
        return Err(Error::DimensionMismatch(format!("expected a 2-vector encoding, got {:?}", x.shape())));
    }
    let x = canonicalize(x)?;
    let m = x.wires();
    let d = x.pi2().data_wires()[0];
    let (lo, hi, s) = (d, d + m, 2 * m);
    let w1 = std::f64::consts::SQRT_2;
    let w2 = x.gamma() * x.gamma() / 4.0;
    let theta = 2.0 * (w2 / w1).sqrt().atan();

    let mut c = Circuit::new(2 * m + 1, format!("g_direct({})", x.circuit().label()));
    let on = [Control::on(s)];
    c.push(Gate::ry(s, theta))?;
    c.call(x.circuit(), &(0..m).collect::<Vec<_>>(), false, &on)?;
    c.call(x.circuit(), &(m..2 * m).collect::<Vec<_>>(), false, &on)?;
    c.push(Gate::small_unitary(vec![lo, hi], sum_difference_unitary())?.with_controls(&on))?;
    c.push(Gate::phase_flip(&[s], &[true])?)?;
    c.push(Gate::h(lo).with_controls(&[Control::off(s)]))?;
    c.push(Gate::ry(s, -theta))?;

    let wires = 2 * m + 1;
    let gamma = w1 + w2;
    let shadow = x.shadow().map(|sx| {
        let b = sum_difference_unitary().rows(0, 2).into_owned();
        let plus = real_matrix(2, 1, &[1.0, 1.0]) * c64(w1 / gamma / std::f64::consts::SQRT_2, 0.0);
        plus - b * kron(sx, sx) * c64(w2 / gamma, 0.0)
    });
    let out = BlockEncoding::new(
        Arc::new(c),
        Projection::zero(wires),
        Projection::on(wires, vec![lo])?,
        gamma,
        2.0 * x.epsilon() + x.epsilon() * x.epsilon(),
    )?;
    Ok(out.with_shadow_opt(shadow))
}
