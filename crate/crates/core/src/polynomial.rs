//! Multivariate polynomials `f(x) = Σ_k A_k x^{⊗k}` and their encodings.
//!
//! `A_k` is an `N × N^k` matrix. Encodings are built by the Horner scheme
//! `B_K = A_K`, `B_k = A_k + B_{k+1}(x ⊗ Id^{⊗k})`, which invokes the input
//! encoding exactly once per level.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use crate::algebra::{add_signed, identity, matmul, scale, tensor};
use crate::amplify::{normalize, AmplificationPlan, EstimatorConfig};
use crate::circuit::CostModel;
use crate::encoding::{dilation_encode, BlockEncoding};
use crate::error::{Error, Result};
use crate::linalg::{c64, is_power_of_two, kron_power, kron_vec, op_norm, CMatrix, CVector, C64};

/// Coefficients whose entries all fall below this magnitude are treated as
/// zero and skipped.
const ZERO_COEFF: f64 = 1e-300;

#[derive(Debug)]
pub struct Polynomial {
    n: usize,
    coeffs: Vec<CMatrix>,
    encodings: OnceLock<Vec<Option<BlockEncoding>>>,
}

impl Clone for Polynomial {
    fn clone(&self) -> Self {
        let p = Polynomial { n: self.n, coeffs: self.coeffs.clone(), encodings: OnceLock::new() };
        if let Some(enc) = self.encodings.get() {
            let _ = p.encodings.set(enc.clone());
        }
        p
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `A P_sym`, where `P_sym` averages the `k` tensor slots of the input.
fn symmetrized(a: &CMatrix, n: usize, k: usize) -> CMatrix {
    let perms = permutations(k);
    let mut out = CMatrix::zeros(a.nrows(), a.ncols());
    let mut digits = vec![0; k];
    for col in 0..a.ncols() {
        let mut rest = col;
        for d in digits.iter_mut().rev() {
            *d = rest % n;
            rest /= n;
        }
        for p in &perms {
            let src = p.iter().fold(0, |acc, &slot| acc * n + digits[slot]);
            let mut dst = out.column_mut(col);
            dst += a.column(src);
        }
    }
    out / c64(perms.len() as f64, 0.0)
}

fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| z.norm() <= ZERO_COEFF)
}

impl Polynomial {
    /// `coeffs[k]` is `A_k`. Trailing zero coefficients are dropped, and each
    /// `A_k` is replaced by its average over permutations of the tensor slots,
    /// which leaves `f` unchanged and makes `Df(x) = Σ k A_k (x^{⊗(k−1)} ⊗ Id)`.
    pub fn new(n: usize, mut coeffs: Vec<CMatrix>) -> Result<Self> {
        if !is_power_of_two(n) {
            return Err(Error::DimensionMismatch(format!("dimension {n} is not a power of two")));
        }
        for (k, a) in coeffs.iter().enumerate() {
            let cols = n.checked_pow(k as u32).ok_or(Error::TooLarge(k))?;
            if a.nrows() != n || a.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "A_{k} is {}x{}, expected {n}x{cols}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(CMatrix::zeros(n, 1));
        }
        for (k, a) in coeffs.iter_mut().enumerate().skip(2) {
            *a = symmetrized(a, n, k);
        }
        Ok(Polynomial { n, coeffs, encodings: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Option<&CMatrix> {
        self.coeffs.get(k)
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Dense evaluation `Σ A_k x^{⊗k}`.
    pub fn evaluate(&self, x: &CVector) -> CVector {
        let mut out = CVector::zeros(self.n);
        for (k, a) in self.coeffs.iter().enumerate() {
            out += a * kron_power(x, k);
        }
        out
    }

    /// Dense Jacobian `Σ k A_k (x^{⊗(k−1)} ⊗ Id)`.
    pub fn jacobian(&self, x: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let xp = kron_power(x, k - 1);
            // (x^{⊗(k−1)} ⊗ Id) e_j = x^{⊗(k−1)} ⊗ e_j
            let mut lift = CMatrix::zeros(a.ncols(), self.n);
            for j in 0..self.n {
                let mut e = CVector::zeros(self.n);
                e[j] = c64(1.0, 0.0);
                lift.set_column(j, &kron_vec(&xp, &e));
            }
            out += a * lift * c64(k as f64, 0.0);
        }
        out
    }

    /// Dense `Df(x)x − f(x)`.
    pub fn newton_rhs(&self, x: &CVector) -> CVector {
        self.jacobian(x) * x - self.evaluate(x)
    }

    /// Exact encodings of the nonzero coefficients, `γ_k = |A_k|`. Built
    /// once and shared by every later construction.
    pub fn coefficient_encodings(&self) -> Result<&[Option<BlockEncoding>]> {
        if let Some(e) = self.encodings.get() {
            return Ok(e);
        }
        let built: Vec<Option<BlockEncoding>> = self
            .coeffs
            .iter()
            .map(|a| if is_zero(a) { Ok(None) } else { dilation_encode(a, op_norm(a)).map(Some) })
            .collect::<Result<_>>()?;
        let _ = self.encodings.set(built);
        Ok(self.encodings.get().expect("just set"))
    }

    /// Largest gate count among the coefficient encodings.
    pub fn t_max(&self, model: &CostModel) -> Result<u64> {
        let mut best = 0;
        for e in self.coefficient_encodings()?.iter().flatten() {
            best = best.max(e.gate_count(model)?);
        }
        Ok(best)
    }

    /// Smallest information efficiency among the coefficient encodings.
    pub fn eta_min(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for e in self.coefficient_encodings()?.iter().flatten() {
            best = best.min(e.info_efficiency()?);
        }
        Ok(best)
    }

    /// Parses the problem-file format described in [`parse_problem`].
    pub fn from_file(path: &Path) -> Result<Self> {
        parse_problem(&std::fs::read_to_string(path)?)
    }
}

fn lifted(x: &BlockEncoding, slots: usize, n: usize) -> Result<BlockEncoding> {
    if slots == 0 {
        return Ok(x.clone());
    }
    tensor(x, &identity(n.pow(slots as u32))?)
}

/// Horner evaluation over levels `lo..=K` with scalar weights on the
/// coefficient encodings; zero-weight and zero coefficients are skipped.
fn horner(p: &Polynomial, x: &BlockEncoding, lo: usize, weight: impl Fn(usize) -> f64) -> Result<BlockEncoding> {
    if x.shape() != (p.n, 1) {
        return Err(Error::DimensionMismatch(format!(
            "input encodes {:?}, polynomial expects a vector of length {}",
            x.shape(),
            p.n
        )));
    }
    let enc = p.coefficient_encodings()?;
    let active = |k: usize| enc[k].is_some() && weight(k) != 0.0;
    let top = (lo..=p.degree()).rev().find(|&k| active(k)).ok_or(Error::ZeroEstimate)?;
    let term = |k: usize| -> Result<BlockEncoding> {
        let e = enc[k].as_ref().expect("active");
        let w = weight(k);
        if w < 0.0 {
            scale(&e.negated()?, -w)
        } else {
            scale(e, w)
        }
    };
    let mut acc = term(top)?;
    for k in (lo..top).rev() {
        let step = matmul(&acc, &lifted(x, k, p.n)?)?;
        acc = if active(k) {
            add_signed(&[enc[k].clone().expect("active"), step], &[weight(k), 1.0])?
        } else {
            step
        };
    }
    Ok(acc)
}

/// Unnormalized encoding of `f(x)`; invokes `x` exactly `K` times (fewer when
/// leading coefficients vanish) and has `γ = Σ_k γ(A_k) γ_x^k`.
pub fn encode_poly_raw(p: &Polynomial, x: &BlockEncoding) -> Result<BlockEncoding> {
    horner(p, x, 0, |_| 1.0)
}

/// Amplified encoding of `f(x)`.
pub fn encode_poly(
    p: &Polynomial,
    x: &BlockEncoding,
    cfg: &EstimatorConfig,
) -> Result<(BlockEncoding, AmplificationPlan)> {
    normalize(&encode_poly_raw(p, x)?, cfg)
}

/// Encoding of `Df(x)`; invokes `x` exactly `K − 1` times.
pub fn encode_jacobian(p: &Polynomial, x: &BlockEncoding) -> Result<BlockEncoding> {
    if p.degree() == 0 {
        return Err(Error::InvalidArgument("Jacobian of a constant polynomial".into()));
    }
    horner(p, x, 1, |k| k as f64)
}

/// Unnormalized encoding of `Df(x)x − f(x) = Σ_k (k−1) A_k x^{⊗k}`.
pub fn encode_newton_rhs_raw(p: &Polynomial, x: &BlockEncoding) -> Result<BlockEncoding> {
    horner(p, x, 0, |k| k as f64 - 1.0)
}

pub fn encode_newton_rhs(
    p: &Polynomial,
    x: &BlockEncoding,
    cfg: &EstimatorConfig,
) -> Result<(BlockEncoding, AmplificationPlan)> {
    normalize(&encode_newton_rhs_raw(p, x)?, cfg)
}

/// Parses one real or complex number: `1.5`, `-2e-3`, `0.5+0.25i`, `-i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| c64(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => t.parse::<f64>().ok(),
    };
    match split {
        Some(i) => Some(c64(body[..i].parse().ok()?, imag(&body[i..])?)),
        None => Some(c64(0.0, imag(body)?)),
    }
}

/// Parses a polynomial problem file.
///
/// ```text
/// # g(x) = (1,1) - (1/8)((x1+x2)^2, (x1-x2)^2)
/// N 2
/// K 2
/// A 0
/// 1
/// 1
/// A 2
/// -0.125 -0.125 -0.125 -0.125
/// -0.125  0.125  0.125 -0.125
/// ```
///
/// `N` (a power of two) and `K` come first. Each `A k` header is followed by
/// `N` rows of `N^k` whitespace-separated entries; entries may be complex
/// (`a+bi`). Blocks may be omitted (zero) and appear in any order. `#`
/// starts a comment.
pub fn parse_problem(src: &str) -> Result<Polynomial> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut header = |key: &str| -> Result<usize> {
        let (no, l) = lines.next().ok_or(Error::Parse { line: 0, msg: format!("missing `{key}` line") })?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(Error::Parse { line: no, msg: format!("expected `{key} <value>`") });
        }
        it.next()
            .and_then(|v| v.parse().ok())
            .filter(|_| it.next().is_none())
            .ok_or(Error::Parse { line: no, msg: format!("bad `{key}` value") })
    };
    let n = header("N")?;
    let k_max = header("K")?;
    if n == 0 || !is_power_of_two(n) {
        return Err(Error::Parse { line: 1, msg: format!("N = {n} must be a power of two") });
    }
    if k_max > 8 {
        return Err(Error::Parse { line: 2, msg: format!("degree {k_max} is too large") });
    }
    let mut coeffs: Vec<Option<CMatrix>> = vec![None; k_max + 1];
    while let Some((no, l)) = lines.next() {
        let mut it = l.split_whitespace();
        if it.next() != Some("A") {
            return Err(Error::Parse { line: no, msg: "expected `A <k>`".into() });
        }
        let k: usize = it
            .next()
            .and_then(|v| v.parse().ok())
            .filter(|&k| k <= k_max)
            .ok_or(Error::Parse { line: no, msg: "bad or out-of-range coefficient index".into() })?;
        if coeffs[k].is_some() {
            return Err(Error::Parse { line: no, msg: format!("A {k} given twice") });
        }
        let cols = n.pow(k as u32);
        let mut m = CMatrix::zeros(n, cols);
        for r in 0..n {
            let (rno, row) =
                lines.next().ok_or(Error::Parse { line: no, msg: format!("A {k} has fewer than {n} rows") })?;
            let vals: Vec<&str> = row.split_whitespace().collect();
            if vals.len() != cols {
                return Err(Error::Parse {
                    line: rno,
                    msg: format!("row has {} entries, expected {cols}", vals.len()),
                });
            }
            for (c, v) in vals.iter().enumerate() {
                m[(r, c)] = parse_complex(v).ok_or(Error::Parse { line: rno, msg: format!("bad number `{v}`") })?;
            }
        }
        coeffs[k] = Some(m);
    }
    let coeffs = coeffs
        .into_iter()
        .enumerate()
        .map(|(k, m)| m.unwrap_or_else(|| CMatrix::zeros(n, n.pow(k as u32))))
        .collect();
    Polynomial::new(n, coeffs)
}

/// Shared handle used by solvers.
pub type SharedPolynomial = Arc<Polynomial>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::encoding::{extract, extract_vector, prepare_vector, Backend};
    use crate::linalg::{max_abs_diff, real_matrix, real_vector, vec_max_abs_diff};

    fn paper_g() -> Polynomial {
        let a0 = real_matrix(2, 1, &[1.0, 1.0]);
        let a1 = CMatrix::zeros(2, 2);
        let a2 = real_matrix(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]) * c64(-0.125, 0.0);
        Polynomial::new(2, vec![a0, a1, a2]).unwrap()
    }

    fn count_x(e: &BlockEncoding, x: &BlockEncoding) -> u64 {
        e.circuit().count_invocations(x.circuit())
    }

    #[test]
    fn g_at_one_one() {
        let p = paper_g();
        let x = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        let e = encode_poly_raw(&p, &x).unwrap();
        let v = extract_vector(&e, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[0.5, 1.0])) < 1e-12);
        assert_eq!(count_x(&e, &x), 2);
        let want_gamma = 2f64.sqrt() + 0.25 * 2.0;
        assert!((e.gamma() - want_gamma).abs() < 1e-12);
    }

    #[test]
    fn jacobian_and_rhs_at_newton_start() {
        let p = paper_g();
        let xv = real_vector(&[2.0, 0.25]);
        let x = prepare_vector(&xv).unwrap();
        let j = encode_jacobian(&p, &x).unwrap();
        let want = real_matrix(2, 2, &[-0.5625, -0.5625, -0.4375, 0.4375]);
        assert!(max_abs_diff(&extract(&j).unwrap(), &want) < 1e-12);
        assert!(max_abs_diff(&p.jacobian(&xv), &want) < 1e-15);
        assert_eq!(count_x(&j, &x), 1);
        let r = encode_newton_rhs_raw(&p, &x).unwrap();
        let v = extract_vector(&r, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[-1.6328125, -1.3828125])) < 1e-12);
        assert!(vec_max_abs_diff(&p.newton_rhs(&xv), &v) < 1e-12);
    }

    #[test]
    fn constant_polynomial() {
        let p = Polynomial::new(2, vec![real_matrix(2, 1, &[0.3, 0.4])]).unwrap();
        let x = prepare_vector(&real_vector(&[1.0, 0.0])).unwrap();
        let e = encode_poly_raw(&p, &x).unwrap();
        assert_eq!(count_x(&e, &x), 0);
        assert!(encode_jacobian(&p, &x).is_err());
        let r = encode_newton_rhs_raw(&p, &x).unwrap();
        let v = extract_vector(&r, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&v, &real_vector(&[-0.3, -0.4])) < 1e-12);
    }

    #[test]
    fn linear_jacobian_uses_x_zero_times() {
        let a1 = real_matrix(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let p = Polynomial::new(2, vec![CMatrix::zeros(2, 1), a1.clone()]).unwrap();
        let x = prepare_vector(&real_vector(&[1.0, 2.0])).unwrap();
        let j = encode_jacobian(&p, &x).unwrap();
        assert_eq!(count_x(&j, &x), 0);
        assert!(max_abs_diff(&extract(&j).unwrap(), &a1) < 1e-12);
    }

    #[test]
    fn coefficients_are_symmetrized_without_changing_values() {
        let a2 = real_matrix(2, 4, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = Polynomial::new(2, vec![CMatrix::zeros(2, 1), CMatrix::zeros(2, 2), a2.clone()]).unwrap();
        let want = real_matrix(2, 4, &[0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(max_abs_diff(p.coeff(2).unwrap(), &want) < 1e-15);
        let xv = real_vector(&[0.3, -0.7]);
        assert!(vec_max_abs_diff(&p.evaluate(&xv), &(&a2 * kron_power(&xv, 2))) < 1e-15);
        assert!(max_abs_diff(paper_g().coeff(2).unwrap(), &(real_matrix(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]) * c64(-0.125, 0.0))) < 1e-15);
        assert_eq!(permutations(3).len(), 6);
    }

    #[test]
    fn parse_paper_g_file() {
        let src = "# g\nN 2\nK 2\nA 0\n1\n1\nA 2\n-0.125 -0.125 -0.125 -0.125\n-0.125 0.125 0.125 -0.125\n";
        let p = parse_problem(src).unwrap();
        assert_eq!(p.degree(), 2);
        assert!(max_abs_diff(p.coeff(2).unwrap(), paper_g().coeff(2).unwrap()) < 1e-15);
        assert!(parse_problem("N 3\nK 1\n").is_err());
        assert!(parse_problem("N 2\nK 1\nA 1\n1 2\n3\n").is_err());
        assert!(parse_problem("N 2\nK 1\nA 2\n1 2 3 4\n1 2 3 4\n").is_err());
    }

    #[test]
    fn complex_entries() {
        assert_eq!(parse_complex("0.5+0.25i"), Some(c64(0.5, 0.25)));
        assert_eq!(parse_complex("-1e-3-2i"), Some(c64(-1e-3, -2.0)));
        assert_eq!(parse_complex("-i"), Some(c64(0.0, -1.0)));
        assert_eq!(parse_complex("3"), Some(c64(3.0, 0.0)));
        assert_eq!(parse_complex("1e+2i"), Some(c64(0.0, 100.0)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn coefficient_circuits_are_shared() {
        let p = paper_g();
        let x = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        let a = encode_poly_raw(&p, &x).unwrap();
        let b = encode_poly_raw(&p, &x).unwrap();
        let c2: &Arc<Circuit> = p.coefficient_encodings().unwrap()[2].as_ref().unwrap().circuit();
        assert_eq!(a.circuit().count_invocations(c2), 1);
        assert_eq!(b.circuit().count_invocations(c2), 1);
    }
}
