//! Linear solves on block encodings: a QSVT circuit driven by externally
//! fitted phase angles, and a reference path that inverts the extracted
//! matrix classically and re-encodes the inverse.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::matmul;
use crate::amplify::{normalize, AmplificationPlan, EstimatorConfig};
use crate::circuit::{Circuit, Control, Gate};
use crate::encoding::{
    adapt_projection, canonicalize, dilation_encode, extract, extract_with, BlockEncoding, Projection, Side,
};
use crate::error::{Error, Result};
use crate::linalg::{c64, inverse, op_norm, CMatrix, CVector, C64};

/// Number of grid points on `[1/κ, 1]` used to validate phase angles.
pub const VALIDATION_POINTS: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InversionMethod {
    #[default]
    Reference,
    Qsvt,
}

impl FromStr for InversionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(InversionMethod::Reference),
            "qsvt" => Ok(InversionMethod::Qsvt),
            other => Err(Error::InvalidArgument(format!("unknown inversion method `{other}`"))),
        }
    }
}

/// Angle set shipped with the crate: `κ = 6`, validated to `0.1` (measured
/// deviation about `1.4e-3`), degree 39, scale 0.7.
pub const BUNDLED_ANGLES_K6: &str = include_str!("../data/angles-k6-e0.1.txt");

/// Phase angles `φ_1..φ_d` of an odd polynomial `p` with `p(x) ≈ scale/(κx)`
/// on `[1/κ, 1]`. `φ_1` is applied last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAngles {
    pub angles: Vec<f64>,
    /// Ratio between the fitted polynomial and `1/(κx)`; the output
    /// normalization divides it back out.
    pub scale: f64,
    pub kappa: Option<f64>,
    pub epsilon: Option<f64>,
}

impl PhaseAngles {
    pub fn new(angles: Vec<f64>, scale: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::PhaseAngles("empty angle list".into()));
        }
        if angles.len().is_multiple_of(2) {
            return Err(Error::PhaseAngles(format!(
                "{} angles give an even polynomial; an odd degree is required",
                angles.len()
            )));
        }
        if let Some(a) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::PhaseAngles(format!("angle {a} is not finite")));
        }
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::PhaseAngles(format!("scale {scale} not in (0, 1]")));
        }
        Ok(PhaseAngles { angles, scale, kappa: None, epsilon: None })
    }

    pub fn degree(&self) -> usize {
        self.angles.len()
    }

    /// Parses one angle per line. A header comment of `key=value` pairs may
    /// carry `kappa`, `epsilon`, `degree` and `scale`; other comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut angles = Vec::new();
        let (mut kappa, mut epsilon, mut degree, mut scale) = (None, None, None, 1.0);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(comment) = line.strip_prefix('#') {
                for tok in comment.split_whitespace() {
                    let Some((k, v)) = tok.split_once('=') else { continue };
                    let num: f64 = v.parse().map_err(|_| parse_err(format!("bad value in `{tok}`")))?;
                    match k {
                        "kappa" => kappa = Some(num),
                        "epsilon" => epsilon = Some(num),
                        "degree" => degree = Some(num as usize),
                        "scale" => scale = num,
                        _ => {}
                    }
                }
                continue;
            }
            angles.push(line.parse::<f64>().map_err(|_| parse_err(format!("`{line}` is not a number")))?);
        }
        if let Some(d) = degree {
            if d != angles.len() {
                return Err(Error::PhaseAngles(format!("header declares degree {d} but the file has {} angles", angles.len())));
            }
        }
        let mut out = PhaseAngles::new(angles, scale)?;
        out.kappa = kappa;
        out.epsilon = epsilon;
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("#");
        if let Some(k) = self.kappa {
            let _ = write!(s, " kappa={k}");
        }
        if let Some(e) = self.epsilon {
            let _ = write!(s, " epsilon={e}");
        }
        let _ = writeln!(s, " degree={} scale={}", self.degree(), self.scale);
        for a in &self.angles {
            let _ = writeln!(s, "{a:?}");
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Complex polynomial realized on a singular value `x` before the real
    /// part is taken: `⟨0| e^{iφ_1 Z} R(x) ⋯ e^{iφ_d Z} R(x) |0⟩` with
    /// `R(x) = [[x, √(1−x²)], [√(1−x²), −x]]`.
    pub fn response(&self, x: f64) -> C64 {
        let s = (1.0 - x * x).max(0.0).sqrt();
        let (mut a, mut b) = (c64(1.0, 0.0), c64(0.0, 0.0));
        for &phi in &self.angles {
            let p = C64::from_polar(1.0, phi);
            a *= p;
            b *= p.conj();
            (a, b) = (a * x + b * s, a * s - b * x);
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub kappa: f64,
    pub epsilon: f64,
    pub method: InversionMethod,
    pub angles: Option<PhaseAngles>,
    /// Estimation settings for the final normalization.
    pub estimator: EstimatorConfig,
}

impl InversionConfig {
    pub fn reference(kappa: f64, epsilon: f64, estimator: EstimatorConfig) -> Self {
        InversionConfig { kappa, epsilon, method: InversionMethod::Reference, angles: None, estimator }
    }

    pub fn qsvt(kappa: f64, epsilon: f64, angles: PhaseAngles, estimator: EstimatorConfig) -> Self {
        InversionConfig { kappa, epsilon, method: InversionMethod::Qsvt, angles: Some(angles), estimator }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 1.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("condition bound {} must be at least 1", self.kappa)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("solver tolerance {} must be positive", self.epsilon)));
        }
        self.estimator.validate()
    }
}

/// Result of [`invert_apply`].
#[derive(Clone, Debug)]
pub struct Inversion {
    pub encoding: BlockEncoding,
    pub plan: AmplificationPlan,
    /// Validation deviation of the phase angles (QSVT only).
    pub deviation: Option<f64>,
}

/// Single-wire encoding of the scalar `x` through `RY(2 acos x)`.
fn scalar_encoding(x: f64) -> Result<BlockEncoding> {
    let mut c = Circuit::new(1, format!("x={x}"));
    c.push(Gate::ry(0, 2.0 * x.clamp(-1.0, 1.0).acos()))?;
    BlockEncoding::new(Arc::new(c), Projection::zero(1), Projection::zero(1), 1.0, 0.0)
}

/// Largest `|p(x)/scale − 1/(κx)|` over the validation grid, where `p` is
/// read off the QSVT circuit built on scalar encodings of `x`.
pub fn phase_angle_deviation(angles: &PhaseAngles, kappa: f64) -> Result<f64> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidArgument(format!("condition bound {kappa} must be at least 1")));
    }
    let lo = 1.0 / kappa;
    let mut worst = 0.0f64;
    for i in 0..VALIDATION_POINTS {
        let x = lo + (1.0 - lo) * i as f64 / (VALIDATION_POINTS - 1) as f64;
        let enc = qsvt_inverse(&scalar_encoding(x)?, angles, kappa)?;
        // γ = κ/scale, so extract/κ = p(x)/scale
        let value = extract(&enc)?[(0, 0)] / c64(kappa, 0.0);
        worst = worst.max((value - c64(1.0 / (kappa * x), 0.0)).norm());
    }
    Ok(worst)
}

/// Accepts `angles` iff their deviation from `1/(κx)` is at most `epsilon`,
/// returning the deviation.
pub fn validate_phase_angles(angles: &PhaseAngles, kappa: f64, epsilon: f64) -> Result<f64> {
    let deviation = phase_angle_deviation(angles, kappa)?;
    if deviation <= epsilon {
        Ok(deviation)
    } else {
        Err(Error::AngleValidation { deviation, epsilon })
    }
}

/// QSVT encoding of `A⁻¹` from a square encoding of `A`.
///
/// The Hermitian dilation `[[0, Ã], [Ã†, 0]]` of `Ã = A/γ_a` is encoded on one
/// extra wire `e` by `W = (|0⟩⟨0|⊗U + |1⟩⟨1|⊗U†)(X⊗I)`. `W` and `W†` alternate
/// with the phase rotations `e^{iφ(2Π−I)}`, realized by a flag wire `f`; a
/// Hadamard-conjugated wire `h` flips the sign of every phase on its `|1⟩`
/// branch so that the block is the real part of the polynomial. The result
/// lives in the `(e=1, e=0)` block, moved to `e=0` by a final X. The output
/// has `γ = κ/(scale·γ_a)`.
pub fn qsvt_inverse(a: &BlockEncoding, angles: &PhaseAngles, kappa: f64) -> Result<BlockEncoding> {
    let (n2, n1) = a.shape();
    if n1 != n2 {
        return Err(Error::DimensionMismatch(format!("cannot invert a {n2}x{n1} block")));
    }
    let a = canonicalize(a)?;
    let input = a.pi1().clone();
    let a = adapt_projection(&a, &input, Side::Output)?;
    let m = a.wires();
    let (e, f, h) = (m, m + 1, m + 2);
    let u = a.circuit();
    let map: Vec<usize> = (0..m).collect();

    let mut w = Circuit::new(m + 1, format!("W({})", u.label()));
    w.push(Gate::x(e))?;
    w.call(u, &map, false, &[Control::off(e)])?;
    w.call(u, &map, true, &[Control::on(e)])?;
    let w = Arc::new(w);
    let w_map: Vec<usize> = (0..=m).collect();

    let anc = input.ancillas();
    let flag = if anc.is_empty() { Gate::x(f) } else { Gate::mcx(&anc, &vec![false; anc.len()], f)? };

    let mut c = Circuit::new(m + 3, format!("qsvt{}({})", angles.degree(), u.label()));
    c.push(Gate::h(h))?;
    for (i, &phi) in angles.angles.iter().rev().enumerate() {
        c.call(&w, &w_map, i % 2 == 1, &[])?;
        c.push(flag.clone())?;
        c.push(Gate::rz(f, 2.0 * phi).with_controls(&[Control::off(h)]))?;
        c.push(Gate::rz(f, -2.0 * phi).with_controls(&[Control::on(h)]))?;
        c.push(flag.clone())?;
    }
    c.push(Gate::h(h))?;
    c.push(Gate::x(e))?;

    let proj = Projection::on(m + 3, input.data_wires().to_vec())?;
    let gamma = kappa / (angles.scale * a.gamma());
    let shadow = a.shadow().map(|s| qsvt_shadow(s, angles));
    let out = BlockEncoding::new(Arc::new(c), proj.clone(), proj, gamma, 0.0)?;
    Ok(out.with_shadow_opt(shadow))
}

/// `V Re p(Σ) W†` for `S = W Σ V†`.
fn qsvt_shadow(s: &CMatrix, angles: &PhaseAngles) -> CMatrix {
    let n = s.nrows();
    let svd = s.clone().svd(true, true);
    let w = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").adjoint();
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        svd.singular_values.iter().map(|&x| c64(angles.response(x.min(1.0)).re, 0.0)),
    ));
    v * d * w.adjoint()
}

/// Amplified encoding of `A⁻¹ b`.
pub fn invert_apply(a: &BlockEncoding, b: &BlockEncoding, cfg: &InversionConfig) -> Result<Inversion> {
    cfg.validate()?;
    let (inv, deviation) = match cfg.method {
        InversionMethod::Reference => {
            let dense = extract_with(a, cfg.estimator.backend)?;
            let ainv = inverse(&dense)?;
            let norm = op_norm(&ainv);
            if !norm.is_finite() {
                return Err(Error::Singular);
            }
            let enc = dilation_encode(&ainv, norm)?;
            (enc.with_epsilon(a.epsilon() * cfg.kappa), None)
        }
        InversionMethod::Qsvt => {
            let angles = cfg
                .angles
                .as_ref()
                .ok_or_else(|| Error::PhaseAngles("the QSVT method needs phase angles".into()))?;
            let deviation = validate_phase_angles(angles, cfg.kappa, cfg.epsilon)?;
            let enc = qsvt_inverse(a, angles, cfg.kappa)?;
            (enc.with_epsilon(cfg.epsilon + a.epsilon() * cfg.kappa), Some(deviation))
        }
    };
    let x = matmul(&inv, b)?;
    let (encoding, plan) = normalize(&x, &cfg.estimator)?;
    Ok(Inversion { encoding, plan, deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{extract_vector, prepare_vector, Backend};
    use crate::linalg::{real_matrix, real_vector, solve, vec_max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SHIPPED: &str = BUNDLED_ANGLES_K6;

    fn exact() -> EstimatorConfig {
        EstimatorConfig::exact(Backend::GateLevel)
    }

    #[test]
    fn identity_angles_give_x() {
        let id = PhaseAngles::new(vec![0.0], 1.0).unwrap();
        for x in [0.0, 0.2, 0.7, 1.0] {
            assert!((id.response(x) - c64(x, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn circuit_matches_response_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let angles: Vec<f64> = (0..7).map(|_| rng.random_range(-1.5..1.5)).collect();
        let pa = PhaseAngles::new(angles, 1.0).unwrap();
        for x in [0.15, 0.4, 0.93] {
            let enc = qsvt_inverse(&scalar_encoding(x).unwrap(), &pa, 1.0).unwrap();
            let got = extract(&enc).unwrap()[(0, 0)];
            assert!((got - c64(pa.response(x).re, 0.0)).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn identity_polynomial_deviation_is_reported_and_rejected() {
        let kappa = 6.0;
        let id = PhaseAngles::new(vec![0.0], 1.0).unwrap();
        let dev = phase_angle_deviation(&id, kappa).unwrap();
        let expect = (0..VALIDATION_POINTS)
            .map(|i| {
                let x = 1.0 / kappa + (1.0 - 1.0 / kappa) * i as f64 / 100.0;
                (x - 1.0 / (kappa * x)).abs()
            })
            .fold(0.0, f64::max);
        assert!((dev - expect).abs() < 1e-12);
        assert!(matches!(validate_phase_angles(&id, kappa, 0.1), Err(Error::AngleValidation { .. })));
    }

    #[test]
    fn shipped_angles_validate_and_perturbation_fails() {
        let pa = PhaseAngles::parse(SHIPPED).unwrap();
        assert_eq!(pa.kappa, Some(6.0));
        let dev = validate_phase_angles(&pa, 6.0, 0.1).unwrap();
        assert!(dev <= 0.1);
        let mut bad = pa.clone();
        bad.angles[pa.degree() / 2] += 0.5;
        assert!(phase_angle_deviation(&bad, 6.0).unwrap() > 0.1);
    }

    #[test]
    fn angle_file_round_trip_and_errors() {
        let pa = PhaseAngles::parse(SHIPPED).unwrap();
        assert_eq!(PhaseAngles::parse(&pa.to_text()).unwrap(), pa);
        assert!(matches!(PhaseAngles::parse("# kappa=6\n"), Err(Error::PhaseAngles(_))));
        assert!(matches!(PhaseAngles::parse("# degree=3\n0.1\n"), Err(Error::PhaseAngles(_))));
        assert!(matches!(PhaseAngles::parse("0.1\nfoo\n"), Err(Error::Parse { line: 2, .. })));
        assert!(PhaseAngles::new(vec![0.1, 0.2], 1.0).is_err());
    }

    #[test]
    fn reference_inverse_of_identity_returns_b() {
        let a = dilation_encode(&CMatrix::identity(2, 2), 1.0).unwrap();
        let bv = real_vector(&[0.6, -0.8]);
        let b = prepare_vector(&bv).unwrap();
        let out = invert_apply(&a, &b, &InversionConfig::reference(1.0, 0.1, exact())).unwrap();
        let x = extract_vector(&out.encoding, Backend::GateLevel).unwrap();
        assert!(vec_max_abs_diff(&x, &bv) < 1e-10);
    }

    #[test]
    fn reference_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let vals: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut m = real_matrix(4, 4, &vals);
            m += CMatrix::identity(4, 4) * c64(2.5, 0.0);
            let bv = real_vector(&(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
            let a = dilation_encode(&m, op_norm(&m) * 1.3).unwrap();
            let b = prepare_vector(&bv).unwrap();
            let out = invert_apply(&a, &b, &InversionConfig::reference(10.0, 0.1, exact())).unwrap();
            assert!(out.encoding.info_efficiency().unwrap() >= 0.25);
            let x = extract_vector(&out.encoding, Backend::GateLevel).unwrap();
            let oracle = solve(&m, &bv).unwrap();
            assert!(vec_max_abs_diff(&x, &oracle) < 1e-8);
        }
    }

    #[test]
    fn qsvt_solves_diagonal_system_within_tolerance() {
        let pa = PhaseAngles::parse(SHIPPED).unwrap();
        let m = real_matrix(2, 2, &[0.3, 0.0, 0.0, 0.8]);
        let a = dilation_encode(&m, 1.0).unwrap();
        let bv = real_vector(&[0.8, 0.6]);
        let b = prepare_vector(&bv).unwrap();
        let cfg = InversionConfig::qsvt(6.0, 0.1, pa, exact());
        let out = invert_apply(&a, &b, &cfg).unwrap();
        let x = extract_vector(&out.encoding, Backend::GateLevel).unwrap();
        let oracle = solve(&m, &bv).unwrap();
        assert!((&x - &oracle).norm() <= 2.0 * 0.1 * oracle.norm());
        let alg = extract_vector(&out.encoding, Backend::Algebraic).unwrap();
        assert!(vec_max_abs_diff(&x, &alg) < 1e-9);
    }

    #[test]
    fn qsvt_requires_angles_and_square_input() {
        let a = dilation_encode(&CMatrix::identity(2, 2), 1.0).unwrap();
        let b = prepare_vector(&real_vector(&[1.0, 0.0])).unwrap();
        let mut cfg = InversionConfig::reference(2.0, 0.1, exact());
        cfg.method = InversionMethod::Qsvt;
        assert!(matches!(invert_apply(&a, &b, &cfg), Err(Error::PhaseAngles(_))));
        let rect = dilation_encode(&real_matrix(2, 4, &[0.1; 8]), 1.0).unwrap();
        let pa = PhaseAngles::new(vec![0.0], 1.0).unwrap();
        assert!(matches!(qsvt_inverse(&rect, &pa, 2.0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn reference_rejects_singular_matrix() {
        let m = real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let a = dilation_encode(&m, 2.0).unwrap();
        let b = prepare_vector(&real_vector(&[1.0, 0.0])).unwrap();
        let r = invert_apply(&a, &b, &InversionConfig::reference(2.0, 0.1, exact()));
        assert!(matches!(r, Err(Error::Singular)));
    }
}
