//! Self-check suite behind `ampenc verify`.
//!
//! Every check is deterministic and small enough to finish in well under a
//! second. Checks in the `counts` group compare gate counts under the active
//! cost model ([`CostModel::from_env`]) with values pinned for the default
//! model, so any override of the model makes them fail.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{add, matmul, self_convolution, tensor};
use crate::amplify::{amplify, estimate_eta, normalize, plan_amplification, AmplificationPlan, EstimatorConfig, C_IE};
use crate::circuit::{qasm, run, Circuit, CostModel, Gate, StateVector};
use crate::encoding::{
    canonicalize, dilation_encode, extract, extract_algebraic, extract_vector, prepare_vector, Backend, BlockEncoding,
    Projection,
};
use crate::error::Result;
use crate::linalg::{c64, inverse, kron, kron_vec, max_abs_diff, op_norm, real_vector, vec_max_abs_diff, CMatrix, CVector};
use crate::linsolve::{invert_apply, validate_phase_angles, InversionConfig, PhaseAngles, BUNDLED_ANGLES_K6};
use crate::polynomial::{encode_jacobian, encode_newton_rhs_raw, encode_poly_raw, Polynomial};
use crate::problems::{paper_g, paper_g_direct};
use crate::solvers::{fixed_point, newton, FixedPointConfig, NewtonConfig};

/// Gate count of the first fixed-point iterate of the built-in problem from
/// `x⁰ = (1, 1)` under the default cost model.
pub const PAPER_G_STEP1_GATES: u64 = 154;

pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    run: fn() -> Result<(bool, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub group: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn id(&self) -> String {
        format!("{}/{}", self.group, self.name)
    }

    /// A filter selects a check if it equals its group or occurs in its id.
    pub fn matches(&self, filter: &str) -> bool {
        self.group == filter || self.id().contains(filter)
    }

    pub fn execute(&self) -> CheckResult {
        let (pass, detail) = match (self.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        CheckResult { group: self.group, name: self.name, pass, detail }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(r: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn random_circuit(r: &mut ChaCha8Rng, wires: usize, len: usize) -> Result<Circuit> {
    let mut c = Circuit::new(wires, "random");
    for _ in 0..len {
        let a = r.random_range(0..wires);
        let b = (a + r.random_range(1..wires)) % wires;
        let g = match r.random_range(0..5) {
            0 => Gate::h(a),
            1 => Gate::ry(a, r.random_range(-3.0..3.0)),
            2 => Gate::rz(a, r.random_range(-3.0..3.0)),
            3 => Gate::cnot(a, b)?,
            _ => Gate::mcx(&[a], &[r.random_bool(0.5)], b)?,
        };
        c.push(g)?;
    }
    Ok(c)
}

fn verdict(pass: bool, detail: String) -> Result<(bool, String)> {
    Ok((pass, detail))
}

fn circuit_norm() -> Result<(bool, String)> {
    let mut r = rng(1);
    let c = random_circuit(&mut r, 5, 200)?;
    let mut state = StateVector::from_vector(&(random_vector(&mut r, 32).normalize()))?;
    let mut worst = 0.0f64;
    for g in c.flatten() {
        crate::circuit::apply(&g, &mut state)?;
        worst = worst.max((state.norm() - 1.0).abs());
    }
    verdict(worst <= 1e-10, format!("max |norm - 1| = {worst:.1e}"))
}

fn circuit_adjoint() -> Result<(bool, String)> {
    let mut r = rng(2);
    let c = random_circuit(&mut r, 4, 100)?;
    let start = StateVector::from_vector(&(random_vector(&mut r, 16).normalize()))?;
    let back = run(&c.adjoint(), &run(&c, &start)?)?;
    let dev = vec_max_abs_diff(&back.into_vector(), &start.into_vector());
    verdict(dev <= 1e-12, format!("C† C deviation {dev:.1e}"))
}

fn circuit_qasm_roundtrip() -> Result<(bool, String)> {
    let mut r = rng(3);
    let mut c = random_circuit(&mut r, 4, 60)?;
    c.push(Gate::phase_flip(&[0, 2], &[true, false])?)?;
    c.push(Gate::modular_adder(&[0, 1], &[2, 3])?)?;
    let back = qasm::import(&qasm::export(&c))?;
    let same = back.flatten() == c.flatten();
    verdict(same, format!("{} gates re-imported identically: {same}", c.flatten().len()))
}

fn encoding_dilation() -> Result<(bool, String)> {
    let mut r = rng(4);
    let a = random_matrix(&mut r, 4, 2);
    let e = dilation_encode(&a, 1.5 * op_norm(&a))?;
    let dev = max_abs_diff(&extract(&e)?, &a);
    verdict(dev <= 1e-10, format!("extract deviation {dev:.1e}"))
}

fn encoding_canonical() -> Result<(bool, String)> {
    let x = prepare_vector(&real_vector(&[0.3, -0.4, 0.5, 0.1]))?;
    let m = extract(&x)?;
    let dev = max_abs_diff(&extract(&canonicalize(&tensor(&x, &x)?)?)?, &kron(&m, &m));
    verdict(dev <= 1e-12, format!("canonicalized tensor deviation {dev:.1e}"))
}

fn encoding_backends() -> Result<(bool, String)> {
    let mut r = rng(5);
    let a = dilation_encode(&random_matrix(&mut r, 2, 2), 3.0)?;
    let b = dilation_encode(&random_matrix(&mut r, 2, 2), 3.0)?;
    let e = add(&[matmul(&a, &b)?, a], &[0.5, 0.5])?;
    let dev = max_abs_diff(&extract(&e)?, &extract_algebraic(&e)?);
    verdict(dev <= 1e-10, format!("gate-level vs algebraic {dev:.1e}"))
}

fn algebra_tensor() -> Result<(bool, String)> {
    let mut r = rng(6);
    let (ma, mb) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2));
    let (a, b) = (dilation_encode(&ma, 2.0)?, dilation_encode(&mb, 3.0)?);
    let t = tensor(&a, &b)?;
    let dev = max_abs_diff(&extract(&t)?, &kron(&ma, &mb));
    verdict(dev <= 1e-10 && t.gamma() == 6.0, format!("value deviation {dev:.1e}, γ = {}", t.gamma()))
}

fn algebra_matmul() -> Result<(bool, String)> {
    let mut r = rng(7);
    let (ma, mb) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2));
    let (a, b) = (dilation_encode(&ma, 2.0)?, dilation_encode(&mb, 3.0)?);
    let p = matmul(&a, &b)?;
    let dev = max_abs_diff(&extract(&p)?, &(&ma * &mb));
    verdict(dev <= 1e-10 && p.gamma() == 6.0, format!("value deviation {dev:.1e}, γ = {}", p.gamma()))
}

fn algebra_lcu() -> Result<(bool, String)> {
    let mut r = rng(8);
    let (ma, mb) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2));
    let (a, b) = (dilation_encode(&ma, 2.0)?, dilation_encode(&mb, 3.0)?);
    let s = add(&[a, b], &[0.25, 0.75])?;
    let want = &ma * c64(0.25, 0.0) + &mb * c64(0.75, 0.0);
    let dev = max_abs_diff(&extract(&s)?, &want);
    let gamma_ok = (s.gamma() - (0.25 * 2.0 + 0.75 * 3.0)).abs() <= 1e-12;
    verdict(dev <= 1e-10 && gamma_ok, format!("value deviation {dev:.1e}, γ = {}", s.gamma()))
}

fn algebra_convolution() -> Result<(bool, String)> {
    let mut r = rng(9);
    let e = self_convolution(2)?;
    let s = extract(&e)?;
    let (v, w) = (random_vector(&mut r, 4), random_vector(&mut r, 4));
    let mut conv = CVector::zeros(4);
    for a in 0..4 {
        for b in 0..4 {
            conv[(a + b) % 4] += v[a] * w[b];
        }
    }
    let dev = vec_max_abs_diff(&(&s * kron_vec(&v, &w)), &conv);
    verdict(dev <= 1e-10 && e.gamma() == 2.0, format!("deviation {dev:.1e}, γ = {}", e.gamma()))
}

/// Vector encoding of `v` with information efficiency exactly `eta`.
fn with_eta(eta: f64, v: &CVector) -> Result<BlockEncoding> {
    let x = prepare_vector(v)?;
    let m = x.wires();
    let mut c = Circuit::new(m + 1, "eta");
    c.call_prefix(x.circuit(), false)?;
    c.push(Gate::ry(m, 2.0 * eta.acos()))?;
    BlockEncoding::new(
        Arc::new(c),
        Projection::zero(m + 1),
        Projection::on(m + 1, x.pi2().data_wires().to_vec())?,
        v.norm() / eta,
        0.0,
    )
}

fn amplify_sine_law() -> Result<(bool, String)> {
    let est = EstimatorConfig::exact(Backend::GateLevel);
    let v = real_vector(&[0.6, 0.8]);
    let mut worst = 0.0f64;
    for (eta, k) in [(0.05, 1), (0.05, 7), (0.2, 3), (0.3, 5), (0.7, 1)] {
        let want = (k as f64 * f64::asin(eta)).sin().abs();
        let plan = AmplificationPlan { k, sigma: eta, sigma_hat: want };
        worst = worst.max((estimate_eta(&amplify(&with_eta(eta, &v)?, &plan)?, &est)? - want).abs());
    }
    verdict(worst <= 1e-9, format!("max |η̂ - |sin(k asin η)|| = {worst:.1e}"))
}

fn amplify_exact_k() -> Result<(bool, String)> {
    let base = with_eta(0.05, &real_vector(&[0.6, 0.8]))?;
    let mut ok = true;
    let mut seen = Vec::new();
    for eta in [0.9, 0.3, 0.05] {
        let plan = plan_amplification(eta)?;
        let n = amplify(&base, &plan)?.circuit().count_invocations(base.circuit());
        ok &= n == plan.k as u64;
        seen.push(format!("k={} uses={n}", plan.k));
    }
    verdict(ok, seen.join(", "))
}

fn amplify_floor() -> Result<(bool, String)> {
    let est = EstimatorConfig::exact(Backend::GateLevel);
    let v = real_vector(&[0.6, 0.8]);
    let mut lowest = f64::INFINITY;
    let mut value_dev = 0.0f64;
    for i in 1..20 {
        let (out, _) = normalize(&with_eta(i as f64 / 20.0, &v)?, &est)?;
        lowest = lowest.min(estimate_eta(&out, &est)?);
        value_dev = value_dev.max(vec_max_abs_diff(&extract_vector(&out, Backend::GateLevel)?, &v));
    }
    verdict(
        lowest >= C_IE && value_dev <= 1e-10,
        format!("min η after normalize {lowest:.3}, value deviation {value_dev:.1e}"),
    )
}

fn random_polynomial(r: &mut ChaCha8Rng, n: usize, k: usize) -> Result<Polynomial> {
    let coeffs = (0..=k)
        .map(|j| {
            let cols = n.pow(j as u32);
            random_matrix(r, n, cols) / c64(cols as f64, 0.0)
        })
        .collect();
    Polynomial::new(n, coeffs)
}

fn polynomial_oracles() -> Result<(bool, String)> {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    for (n, k) in [(2, 2), (2, 3), (4, 2)] {
        let p = random_polynomial(&mut r, n, k)?;
        let xv = random_vector(&mut r, n);
        let x = prepare_vector(&xv)?;
        worst = worst.max(vec_max_abs_diff(&extract_vector(&encode_poly_raw(&p, &x)?, Backend::GateLevel)?, &p.evaluate(&xv)));
        worst = worst.max(max_abs_diff(&extract(&encode_jacobian(&p, &x)?)?, &p.jacobian(&xv)));
        worst = worst.max(vec_max_abs_diff(
            &extract_vector(&encode_newton_rhs_raw(&p, &x)?, Backend::GateLevel)?,
            &p.newton_rhs(&xv),
        ));
    }
    verdict(worst <= 1e-8, format!("max deviation from dense oracles {worst:.1e}"))
}

fn polynomial_horner_uses() -> Result<(bool, String)> {
    let mut r = rng(11);
    let p = random_polynomial(&mut r, 2, 3)?;
    let x = prepare_vector(&random_vector(&mut r, 2))?;
    let f = encode_poly_raw(&p, &x)?.circuit().count_invocations(x.circuit());
    let j = encode_jacobian(&p, &x)?.circuit().count_invocations(x.circuit());
    verdict(f == 3 && j == 2, format!("f uses x {f} times, Df uses x {j} times (degree 3)"))
}

fn polynomial_gamma_law() -> Result<(bool, String)> {
    let p = paper_g();
    let xv = real_vector(&[1.0, 1.0]);
    let x = prepare_vector(&xv)?;
    let e = encode_poly_raw(&p, &x)?;
    let want: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, a)| op_norm(a) * x.gamma().powi(k as i32))
        .sum();
    let dev = (e.gamma() - want).abs();
    let direct = paper_g_direct(&x)?;
    let ddev = vec_max_abs_diff(&extract_vector(&direct, Backend::GateLevel)?, &p.evaluate(&xv));
    verdict(dev <= 1e-12 && ddev <= 1e-12, format!("γ law deviation {dev:.1e}, direct circuit deviation {ddev:.1e}"))
}

fn linsolve_reference() -> Result<(bool, String)> {
    let mut r = rng(12);
    let a = CMatrix::from_diagonal(&real_vector(&[1.0, 0.4]));
    let bv = random_vector(&mut r, 2);
    let cfg = InversionConfig::reference(3.0, 0.1, EstimatorConfig::exact(Backend::GateLevel));
    let out = invert_apply(&dilation_encode(&a, 1.0)?, &prepare_vector(&bv)?, &cfg)?;
    let want = inverse(&a)? * &bv;
    let want = &want / c64(want.norm(), 0.0) * c64(bv.norm(), 0.0);
    let got = extract_vector(&out.encoding, Backend::GateLevel)?;
    // the inversion returns A⁻¹b up to the normalization of b's encoding
    let scale = got.norm() / want.norm();
    let dev = vec_max_abs_diff(&got, &(want * c64(scale, 0.0)));
    verdict(dev <= 1e-9, format!("deviation from A⁻¹b {dev:.1e}"))
}

fn linsolve_bundled_angles() -> Result<(bool, String)> {
    let angles = PhaseAngles::parse(BUNDLED_ANGLES_K6)?;
    let dev = validate_phase_angles(&angles, 6.0, 0.1)?;
    verdict(dev <= 0.01, format!("degree {}, deviation {dev:.4}", angles.degree()))
}

fn solvers_fixed_point() -> Result<(bool, String)> {
    let g = paper_g();
    let mut cfg = FixedPointConfig::new(0.58, 1e-3, EstimatorConfig::exact(Backend::GateLevel));
    cfg.steps = Some(3);
    let (x, _) = fixed_point(|x| encode_poly_raw(&g, x), &prepare_vector(&real_vector(&[1.0, 1.0]))?, &cfg)?;
    let dev = vec_max_abs_diff(&extract_vector(&x, Backend::GateLevel)?, &real_vector(&[0.64404296875, 0.9921875]));
    verdict(dev <= 1e-9, format!("third iterate deviation {dev:.1e}"))
}

fn solvers_newton() -> Result<(bool, String)> {
    let est = EstimatorConfig::exact(Backend::Algebraic);
    let mut cfg = NewtonConfig::new(InversionConfig::reference(6.0, 0.1, est.clone()), est);
    cfg.steps = Some(3);
    let (x, _) = newton(&paper_g(), &prepare_vector(&real_vector(&[2.0, 0.25]))?, &cfg)?;
    let dev = vec_max_abs_diff(&extract_vector(&x, Backend::Algebraic)?, &real_vector(&[2.0 * 2f64.sqrt(), 0.0]));
    verdict(dev <= 1e-3, format!("distance of third iterate to the root {dev:.1e}"))
}

fn counts_gate_costs() -> Result<(bool, String)> {
    let model = CostModel::from_env()?;
    let pinned: [(&str, Gate, u64); 9] = [
        ("x", Gate::x(0), 1),
        ("h", Gate::h(0), 1),
        ("ry", Gate::ry(0, 0.3), 1),
        ("rz", Gate::rz(0, 0.3), 1),
        ("cx", Gate::cnot(0, 1)?, 1),
        ("mcx3", Gate::mcx(&[0, 1, 2], &[true, false, true], 3)?, 5),
        ("unitary2", Gate::small_unitary(vec![0, 1], CMatrix::identity(4, 4))?, 5),
        ("modadd2", Gate::modular_adder(&[0, 1], &[2, 3])?, 80),
        ("phaseflip3", Gate::phase_flip(&[0, 1, 2], &[true, true, false])?, 3),
    ];
    let mut bad = Vec::new();
    for (name, gate, want) in pinned {
        let got = model.cost(&gate)?;
        if got != want {
            bad.push(format!("{name}: {got} != {want}"));
        }
    }
    let detail = if bad.is_empty() { "all 9 gate families at default cost".into() } else { bad.join(", ") };
    verdict(bad.is_empty(), detail)
}

fn counts_additivity() -> Result<(bool, String)> {
    let model = CostModel::from_env()?;
    let c = Arc::new(random_circuit(&mut rng(13), 4, 40)?);
    let one = c.gate_count(&model)?;
    let five = Circuit::repeated(&c, 5)?.gate_count(&model)?;
    verdict(five == 5 * one && one == 40, format!("single {one} (pinned 40), five repetitions {five}"))
}

fn counts_paper_g_step() -> Result<(bool, String)> {
    let model = CostModel::from_env()?;
    let x0 = prepare_vector(&real_vector(&[1.0, 1.0]))?;
    let (x1, _) = normalize(&encode_poly_raw(&paper_g(), &x0)?, &EstimatorConfig::exact(Backend::Algebraic))?;
    let got = x1.gate_count(&model)?;
    verdict(got == PAPER_G_STEP1_GATES, format!("first fixed-point iterate {got} gates (pinned {PAPER_G_STEP1_GATES})"))
}

/// The full suite, in execution order.
pub fn checks() -> Vec<Check> {
    macro_rules! check {
        ($group:literal, $name:literal, $f:ident) => {
            Check { group: $group, name: $name, run: $f }
        };
    }
    vec![
        check!("circuit", "norm-preservation", circuit_norm),
        check!("circuit", "adjoint-inverse", circuit_adjoint),
        check!("circuit", "qasm-roundtrip", circuit_qasm_roundtrip),
        check!("encoding", "dilation", encoding_dilation),
        check!("encoding", "canonicalize", encoding_canonical),
        check!("encoding", "backend-equivalence", encoding_backends),
        check!("algebra", "tensor-law", algebra_tensor),
        check!("algebra", "matmul-law", algebra_matmul),
        check!("algebra", "lcu-law", algebra_lcu),
        check!("algebra", "convolution", algebra_convolution),
        check!("amplify", "sine-law", amplify_sine_law),
        check!("amplify", "exact-k", amplify_exact_k),
        check!("amplify", "normalization-floor", amplify_floor),
        check!("polynomial", "dense-oracles", polynomial_oracles),
        check!("polynomial", "horner-uses", polynomial_horner_uses),
        check!("polynomial", "gamma-law", polynomial_gamma_law),
        check!("linsolve", "reference-inverse", linsolve_reference),
        check!("linsolve", "bundled-angles", linsolve_bundled_angles),
        check!("solvers", "fixed-point", solvers_fixed_point),
        check!("solvers", "newton", solvers_newton),
        check!("counts", "gate-costs", counts_gate_costs),
        check!("counts", "additivity", counts_additivity),
        check!("counts", "paper-g-step", counts_paper_g_step),
    ]
}

/// Runs the checks selected by `filter` (all if `None`).
pub fn run_suite(filter: Option<&str>) -> Vec<CheckResult> {
    checks()
        .iter()
        .filter(|c| filter.is_none_or(|f| c.matches(f)))
        .map(Check::execute)
        .collect()
}

/// Fixed-width pass/fail table.
pub fn render_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.group.len() + r.name.len() + 1).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let id = format!("{}/{}", r.group, r.name);
        out.push_str(&format!("{} {id:<width$}  {}\n", if r.pass { "PASS" } else { "FAIL" }, r.detail));
    }
    let passed = results.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    out
}
