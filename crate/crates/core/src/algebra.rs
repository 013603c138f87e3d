//! Arithmetic on block encodings.

use std::sync::Arc;

use crate::circuit::{Circuit, Control, Gate};
use crate::encoding::{adapt_projection, canonicalize, BlockEncoding, Projection, Side};
use crate::error::{Error, Result};
use crate::linalg::{c64, complete_to_unitary, kron, wires_for, CMatrix, CVector};

fn combine_eps(a: f64, b: f64) -> f64 {
    a + b + a * b
}

fn both_shadows<F>(a: &BlockEncoding, b: &BlockEncoding, f: F) -> Option<CMatrix>
where
    F: FnOnce(&CMatrix, &CMatrix) -> CMatrix,
{
    match (a.shadow(), b.shadow()) {
        (Some(x), Some(y)) => Some(f(x, y)),
        _ => None,
    }
}

/// Pre-unitary of a tensor-product projection: `b`'s on the low wires and
/// `a`'s shifted above.
fn tensor_pre(a: &Projection, b: &Projection, m_b: usize, m: usize) -> Result<Option<Arc<Circuit>>> {
    if a.pre().is_none() && b.pre().is_none() {
        return Ok(None);
    }
    let mut c = Circuit::new(m, "pre");
    if let Some(v) = b.pre() {
        c.call_prefix(v, false)?;
    }
    if let Some(v) = a.pre() {
        let map: Vec<usize> = (m_b..m).collect();
        c.call(v, &map, false, &[])?;
    }
    Ok(Some(Arc::new(c)))
}

fn tensor_projection(a: &Projection, b: &Projection, m_b: usize, m: usize) -> Result<Projection> {
    let mut data = b.data_wires().to_vec();
    data.extend(a.data_wires().iter().map(|w| w + m_b));
    Projection::new(m, data, tensor_pre(a, b, m_b, m)?)
}

/// `A ⊗ B`: `b` on the low wires, `a` above, data indices in Kronecker order
/// (`a` supplies the high-order part).
pub fn tensor(a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
    let (m_a, m_b) = (a.wires(), b.wires());
    let m = m_a + m_b;
    let mut c = Circuit::new(m, format!("({} ⊗ {})", a.circuit().label(), b.circuit().label()));
    c.call_prefix(b.circuit(), false)?;
    let map: Vec<usize> = (m_b..m).collect();
    c.call(a.circuit(), &map, false, &[])?;
    let pi1 = tensor_projection(a.pi1(), b.pi1(), m_b, m)?;
    let pi2 = tensor_projection(a.pi2(), b.pi2(), m_b, m)?;
    let e = BlockEncoding::new(
        Arc::new(c),
        pi1,
        pi2,
        a.gamma() * b.gamma(),
        combine_eps(a.epsilon(), b.epsilon()),
    )?;
    Ok(e.with_shadow_opt(both_shadows(a, b, kron)))
}

/// `A·B`: `b`'s circuit followed by `a`'s, with `a`'s input data wires laid
/// onto `b`'s output data wires and the rest of `a` on fresh wires.
pub fn matmul(a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
    if a.pi1().dim() != b.pi2().dim() {
        return Err(Error::DimensionMismatch(format!(
            "product of {:?} and {:?} blocks",
            a.shape(),
            b.shape()
        )));
    }
    let a = canonicalize(a)?;
    let b = canonicalize(b)?;
    let m_b = b.wires();
    let a_in = a.pi1().data_wires();
    let mut map = vec![usize::MAX; a.wires()];
    for (i, &w) in a_in.iter().enumerate() {
        map[w] = b.pi2().data_wires()[i];
    }
    let mut fresh = m_b;
    for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = fresh;
        fresh += 1;
    }
    let m = fresh;
    let mut c = Circuit::new(m, format!("({} · {})", a.circuit().label(), b.circuit().label()));
    c.call_prefix(b.circuit(), false)?;
    c.call(a.circuit(), &map, false, &[])?;
    let pi1 = b.pi1().widened(m);
    let pi2 = Projection::on(m, a.pi2().data_wires().iter().map(|&w| map[w]).collect())?;
    let e = BlockEncoding::new(
        Arc::new(c),
        pi1,
        pi2,
        a.gamma() * b.gamma(),
        combine_eps(a.epsilon(), b.epsilon()),
    )?;
    Ok(e.with_shadow_opt(both_shadows(&a, &b, |x, y| x * y)))
}

/// Multiplies the encoded value by a positive scalar through γ.
pub fn scale(e: &BlockEncoding, factor: f64) -> Result<BlockEncoding> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale factor {factor} must be positive")));
    }
    Ok(e.clone().with_gamma(e.gamma() * factor))
}

/// `Σ w_i S_i` by a linear combination of unitaries. The select register is
/// prepared with amplitudes `√(w_i γ_i / Γ)`, drives the controlled terms and
/// is unprepared; `γ = Γ = Σ w_i γ_i`.
pub fn add(terms: &[BlockEncoding], weights: &[f64]) -> Result<BlockEncoding> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("sum of no terms".into()));
    }
    if weights.len() != terms.len() {
        return Err(Error::InvalidArgument("one weight per term required".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument(format!("weight {w} must be positive")));
    }
    let shape = terms[0].shape();
    if terms.iter().any(|t| t.shape() != shape) {
        return Err(Error::DimensionMismatch("summands have different shapes".into()));
    }
    if terms.len() == 1 {
        return scale(&terms[0], weights[0]);
    }
    let big_gamma: f64 = terms.iter().zip(weights).map(|(t, w)| t.gamma() * w).sum();
    if big_gamma <= 0.0 {
        return Err(Error::InvalidArgument("all summands have zero normalization".into()));
    }

    let m = terms.iter().map(|t| t.wires()).max().unwrap_or(0);
    let d_in = shape.1.trailing_zeros() as usize;
    let d_out = shape.0.trailing_zeros() as usize;
    let p_in = Projection::on(m, (0..d_in).collect())?;
    let p_out = Projection::on(m, (0..d_out).collect())?;
    let aligned: Vec<BlockEncoding> = terms
        .iter()
        .map(|t| {
            let t = canonicalize(&t.widened(m))?;
            let t = adapt_projection(&t, &p_in, Side::Input)?;
            adapt_projection(&t, &p_out, Side::Output)
        })
        .collect::<Result<_>>()?;

    let s = wires_for(terms.len());
    let width = m + s;
    let sel: Vec<usize> = (m..width).collect();
    let amps: Vec<f64> = terms
        .iter()
        .zip(weights)
        .map(|(t, w)| (t.gamma() * w / big_gamma).sqrt())
        .chain(std::iter::repeat(0.0))
        .take(1 << s)
        .collect();
    let mut prep = Circuit::new(width, "lcu_prep");
    if s == 1 {
        prep.push(Gate::ry(m, 2.0 * amps[1].atan2(amps[0])))?;
    } else {
        let v = CVector::from_iterator(amps.len(), amps.iter().map(|&a| c64(a, 0.0)));
        prep.push(Gate::small_unitary(sel.clone(), complete_to_unitary(&v))?)?;
    }
    let prep = Arc::new(prep);

    let labels: Vec<&str> = terms.iter().map(|t| t.circuit().label()).collect();
    let mut c = Circuit::new(width, format!("({})", labels.join(" + ")));
    c.call_prefix(&prep, false)?;
    let ident: Vec<usize> = (0..m).collect();
    for (i, t) in aligned.iter().enumerate() {
        let ctrl: Vec<Control> =
            sel.iter().enumerate().map(|(b, &w)| Control { wire: w, on: (i >> b) & 1 == 1 }).collect();
        c.call(t.circuit(), &ident, false, &ctrl)?;
    }
    c.call_prefix(&prep, true)?;

    let epsilon = terms.iter().map(|t| t.epsilon()).fold(0.0, f64::max);
    let shadow = if aligned.iter().all(|t| t.shadow().is_some()) {
        let mut acc = CMatrix::zeros(shape.0, shape.1);
        for ((t, w), orig) in aligned.iter().zip(weights).zip(terms) {
            acc += t.shadow().expect("checked") * c64(orig.gamma() * w / big_gamma, 0.0);
        }
        Some(acc)
    } else {
        None
    };
    let e = BlockEncoding::new(Arc::new(c), p_in.widened(width), p_out.widened(width), big_gamma, epsilon)?;
    Ok(e.with_shadow_opt(shadow))
}

/// Signed sum: negative weights are realized by negating the term.
pub fn add_signed(terms: &[BlockEncoding], weights: &[f64]) -> Result<BlockEncoding> {
    let mut ts = Vec::with_capacity(terms.len());
    let mut ws = Vec::with_capacity(terms.len());
    for (t, &w) in terms.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        if w < 0.0 {
            ts.push(t.negated()?);
            ws.push(-w);
        } else {
            ts.push(t.clone());
            ws.push(w);
        }
    }
    if ts.is_empty() {
        return Err(Error::InvalidArgument("all weights are zero".into()));
    }
    add(&ts, &ws)
}

/// Identity on `dim` (a power of two) with no gates.
pub fn identity(dim: usize) -> Result<BlockEncoding> {
    if !crate::linalg::is_power_of_two(dim) {
        return Err(Error::DimensionMismatch(format!("identity of dimension {dim}")));
    }
    let d = dim.trailing_zeros() as usize;
    let c = Circuit::new(d, "id");
    BlockEncoding::new(Arc::new(c), Projection::full(d), Projection::full(d), 1.0, 0.0)?
        .with_shadow(CMatrix::identity(dim, dim))
}

/// Element-wise product `⊙ : C^N ⊗ C^N → C^N` with `N = 2^n`: CNOTs from the
/// high register onto the low one, keeping the high register as data and
/// requiring the low register to read zero.
pub fn elementwise_mul(n: usize) -> Result<BlockEncoding> {
    if n == 0 {
        return Err(Error::InvalidArgument("element-wise product needs n >= 1".into()));
    }
    let mut c = Circuit::new(2 * n, "mul");
    for i in 0..n {
        c.push(Gate::cnot(n + i, i)?)?;
    }
    let dim = 1usize << n;
    let mut shadow = CMatrix::zeros(dim, dim * dim);
    for j in 0..dim {
        shadow[(j, j * dim + j)] = c64(1.0, 0.0);
    }
    BlockEncoding::new(Arc::new(c), Projection::full(2 * n), Projection::on(2 * n, (n..2 * n).collect())?, 1.0, 0.0)?
        .with_shadow(shadow)
}

/// Cyclic self-convolution `v ⊗ v ↦ v ∗ v` on `N = 2^n`. The modular adder
/// writes `x + y` into the low register; the output projection averages the
/// high register through `⟨+|^{⊗n}`, so `γ = 2^{n/2}`.
pub fn self_convolution(n: usize) -> Result<BlockEncoding> {
    if n == 0 {
        return Err(Error::InvalidArgument("convolution needs n >= 1".into()));
    }
    let low: Vec<usize> = (0..n).collect();
    let high: Vec<usize> = (n..2 * n).collect();
    let mut c = Circuit::new(2 * n, "conv");
    c.push(Gate::modular_adder(&low, &high)?)?;
    let mut v = Circuit::new(2 * n, "h_high");
    for &w in &high {
        v.push(Gate::h(w))?;
    }
    let pi2 = Projection::new(2 * n, low, Some(Arc::new(v)))?;
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    let mut shadow = CMatrix::zeros(dim, dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            shadow[((a + b) % dim, a * dim + b)] = c64(amp, 0.0);
        }
    }
    BlockEncoding::new(Arc::new(c), Projection::full(2 * n), pi2, (dim as f64).sqrt(), 0.0)?.with_shadow(shadow)
}

/// Element-wise power `x^s` from `s` invocations of `x`.
pub fn vector_power(x: &BlockEncoding, s: usize) -> Result<BlockEncoding> {
    if s == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    if !x.is_vector() {
        return Err(Error::InvalidArgument("element-wise power of a non-vector encoding".into()));
    }
    let n = x.pi2().data_wires().len();
    let mul = elementwise_mul(n)?;
    let mut acc = x.clone();
    for _ in 1..s {
        acc = matmul(&mul, &tensor(x, &acc)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{dilation_encode, extract, extract_algebraic, extract_vector, prepare_vector, Backend};
    use crate::linalg::{max_abs_diff, real_matrix, real_vector, vec_max_abs_diff};

    #[test]
    fn tensor_of_uniform_vectors() {
        let x = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        let t = tensor(&x, &x).unwrap();
        assert!((t.gamma() - 2.0).abs() < 1e-15);
        let v = extract_vector(&t, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[1.0; 4])) < 1e-12);
    }

    #[test]
    fn tensor_is_kronecker_with_first_factor_high() {
        let a = prepare_vector(&real_vector(&[1.0, 2.0])).unwrap();
        let b = prepare_vector(&real_vector(&[3.0, 5.0])).unwrap();
        let v = extract_vector(&tensor(&a, &b).unwrap(), Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[3.0, 5.0, 6.0, 10.0])) < 1e-12);
    }

    #[test]
    fn square_of_uniform_vector() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = prepare_vector(&real_vector(&[h, h])).unwrap();
        let sq = matmul(&elementwise_mul(1).unwrap(), &tensor(&x, &x).unwrap()).unwrap();
        let v = extract_vector(&sq, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[0.5, 0.5])) < 1e-12);
        assert!((sq.info_efficiency().unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn a2_applied_to_x_tensor_x() {
        let a2 = real_matrix(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]) * c64(-0.125, 0.0);
        let ea = dilation_encode(&a2, 0.25).unwrap();
        let x = prepare_vector(&real_vector(&[2.0, 0.25])).unwrap();
        let y = matmul(&ea, &tensor(&x, &x).unwrap()).unwrap();
        let v = extract_vector(&y, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[-0.6328125, -0.3828125])) < 1e-12);
        assert!(vec_max_abs_diff(&extract_vector(&y, Backend::Algebraic).unwrap(), &v) < 1e-12);
    }

    #[test]
    fn lcu_sum_and_gamma_law() {
        let s1 = real_matrix(2, 2, &[0.3, -0.2, 0.1, 0.5]);
        let s2 = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s3 = real_matrix(2, 2, &[0.2, 0.0, 0.0, -0.7]);
        let e1 = dilation_encode(&s1, 1.0).unwrap();
        let e2 = dilation_encode(&s2, 1.5).unwrap();
        let e3 = dilation_encode(&s3, 0.8).unwrap();
        let sum = add(&[e1, e2, e3], &[0.5, 2.0, 1.0]).unwrap();
        assert!((sum.gamma() - (0.5 + 3.0 + 0.8)).abs() < 1e-15);
        let want = &s1 * c64(0.5, 0.0) + &s2 * c64(2.0, 0.0) + &s3;
        assert!(max_abs_diff(&extract(&sum).unwrap(), &want) < 1e-12);
        assert!(max_abs_diff(&extract_algebraic(&sum).unwrap(), &want) < 1e-12);
    }

    #[test]
    fn signed_sum() {
        let a = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        let b = prepare_vector(&real_vector(&[0.5, -0.25])).unwrap();
        let d = add_signed(&[a, b], &[1.0, -2.0]).unwrap();
        let v = extract_vector(&d, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[0.0, 1.5])) < 1e-12);
    }

    #[test]
    fn convolution_n1() {
        let e = self_convolution(1).unwrap();
        assert_eq!(e.gamma(), 2f64.sqrt());
        let v = prepare_vector(&real_vector(&[0.3, -0.7])).unwrap();
        let c = matmul(&e, &tensor(&v, &v).unwrap()).unwrap();
        let got = extract_vector(&c, Backend::GateLevel).unwrap();
        let (a, b) = (0.3, -0.7);
        assert!(vec_max_abs_diff(&got, &real_vector(&[a * a + b * b, 2.0 * a * b])) < 1e-12);
    }

    #[test]
    fn vector_power_uses_input_s_times() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = prepare_vector(&real_vector(&[h, h])).unwrap();
        let p = vector_power(&x, 3).unwrap();
        assert_eq!(p.circuit().count_invocations(x.circuit()), 3);
        let v = extract_vector(&p, Backend::GateLevel).unwrap();
        let c = h * h * h;
        assert!(vec_max_abs_diff(&v, &real_vector(&[c, c])) < 1e-12);
        assert!(vector_power(&x, 0).is_err());
    }

    #[test]
    fn identity_times_e() {
        let s = real_matrix(2, 2, &[0.3, -0.2, 0.1, 0.5]);
        let e = dilation_encode(&s, 1.0).unwrap();
        let p = matmul(&identity(2).unwrap(), &e).unwrap();
        assert!(max_abs_diff(&extract(&p).unwrap(), &s) < 1e-12);
    }
}
