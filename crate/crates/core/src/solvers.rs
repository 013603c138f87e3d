//! Fixed-point iteration and Newton's method driven by polynomial encodings,
//! plus norm measurement and Hadamard-test inner products.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::amplify::{estimate_eta, normalize, AmplificationPlan, EstimatorConfig, EstimatorMode};
use crate::circuit::{run, sample, Circuit, Control, CostModel, Gate, StateVector};
use crate::encoding::{
    adapt_projection, canonicalize, extract_vector, Backend, BlockEncoding, Side, EXTRACT_MAX_WIRES,
    GATE_LEVEL_MAX_WIRES,
};
use crate::error::{Error, Result};
use crate::linalg::{c64, CVector, C64};
use crate::linsolve::{invert_apply, InversionConfig};
use crate::polynomial::{encode_jacobian, encode_newton_rhs, Polynomial};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointConfig {
    /// Contraction constant `L`.
    pub contraction: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Bound on the initial error `|x⁰ − x*|`.
    pub e0_bound: f64,
    /// Bound on `|x*|`.
    pub xstar_norm_bound: f64,
    pub max_steps: usize,
    /// Runs exactly this many steps instead of the planned count.
    pub steps: Option<usize>,
    pub estimator: EstimatorConfig,
    #[serde(skip)]
    pub cost_model: CostModel,
}

impl FixedPointConfig {
    pub fn new(contraction: f64, epsilon: f64, estimator: EstimatorConfig) -> Self {
        FixedPointConfig {
            contraction,
            epsilon,
            delta: 0.05,
            e0_bound: 1.0,
            xstar_norm_bound: 1.0,
            max_steps: 8,
            steps: None,
            estimator,
            cost_model: CostModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.contraction) {
            return Err(Error::InvalidArgument(format!("contraction constant {} not in [0,1)", self.contraction)));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} not in (0,1)")));
            }
        }
        if !(self.e0_bound > 0.0 && self.xstar_norm_bound > 0.0) {
            return Err(Error::InvalidArgument("error and norm bounds must be positive".into()));
        }
        self.estimator.validate()
    }

    /// Per-step tolerance `ε_g = (1−L)ε/4`.
    pub fn step_tolerance(&self) -> f64 {
        (1.0 - self.contraction) * self.epsilon / 4.0
    }

    /// `n_ε = ⌈|log(ε − 2ε_g/(1−L)) + log|x*| − log e₀| / |log L|⌉`, uncapped.
    pub fn planned_steps(&self) -> usize {
        if self.contraction == 0.0 {
            return 1;
        }
        let eps_g = self.step_tolerance();
        let num = ((self.epsilon - 2.0 * eps_g / (1.0 - self.contraction)).ln() + self.xstar_norm_bound.ln()
            - self.e0_bound.ln())
        .abs();
        (num / self.contraction.ln().abs()).ceil().max(1.0) as usize
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub kappa: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Ratio `θ = e₀ / e₀^max`.
    pub theta: f64,
    /// Radius `e₀^max` of the quadratic convergence region.
    pub e0_max: f64,
    /// Bound `B ≥ |x⁽ⁿ⁾|`; the tolerance schedule uses `C_κ = 1/(κB)`.
    pub norm_bound: f64,
    pub max_steps: usize,
    pub steps: Option<usize>,
    pub solver: InversionConfig,
    /// Estimation for the right-hand side and the solver output.
    pub estimator: EstimatorConfig,
    #[serde(skip)]
    pub cost_model: CostModel,
}

impl NewtonConfig {
    pub fn new(solver: InversionConfig, estimator: EstimatorConfig) -> Self {
        NewtonConfig {
            kappa: solver.kappa,
            epsilon: 1e-2,
            delta: 0.05,
            theta: 0.5,
            e0_max: 1.0,
            norm_bound: 4.0,
            max_steps: 6,
            steps: None,
            solver,
            estimator,
            cost_model: CostModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 1.0) {
            return Err(Error::InvalidArgument(format!("condition bound {} must be at least 1", self.kappa)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidArgument(format!("θ = {} not in (0,1)", self.theta)));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} not in (0,1)")));
            }
        }
        if !(self.e0_max > 0.0 && self.norm_bound > 0.0) {
            return Err(Error::InvalidArgument("e0_max and norm_bound must be positive".into()));
        }
        self.solver.validate()?;
        self.estimator.validate()
    }

    /// `n_ε = ⌈log₂(log₂ ε⁻¹ + log₂ e₀^max) − log₂ log₂ θ⁻¹⌉`, uncapped.
    pub fn planned_steps(&self) -> usize {
        let inner = (1.0 / self.epsilon).log2() + self.e0_max.log2();
        if inner <= 0.0 {
            return 1;
        }
        (inner.log2() - (1.0 / self.theta).log2().log2()).ceil().max(1.0) as usize
    }

    /// `C_κ 2^{−n_ε} ε`.
    pub fn schedule_tolerance(&self, n: usize) -> f64 {
        self.epsilon / (self.kappa * self.norm_bound) / 2f64.powi(n as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub mode: EstimatorMode,
    pub backend: Backend,
    pub shots: u64,
    pub repetitions: u64,
    pub seed: u64,
}

impl From<&EstimatorConfig> for EstimatorStats {
    fn from(c: &EstimatorConfig) -> Self {
        EstimatorStats { mode: c.mode, backend: c.backend, shots: c.shots, repetitions: c.repetitions, seed: c.seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Encoded vector as `[re, im]` pairs; absent when too wide to extract.
    pub iterate: Option<Vec<[f64; 2]>>,
    pub norm: Option<f64>,
    pub gamma: f64,
    pub eta_before: f64,
    pub eta_after: f64,
    pub k: usize,
    pub wires: usize,
    pub gate_count: u64,
    pub tolerance: f64,
    pub solver_tolerance: Option<f64>,
    pub angle_deviation: Option<f64>,
    pub estimator: EstimatorStats,
}

impl StepRecord {
    pub fn iterate_vector(&self) -> Option<CVector> {
        self.iterate.as_ref().map(|v| CVector::from_iterator(v.len(), v.iter().map(|p| c64(p[0], p[1]))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: String,
    pub planned_steps: usize,
    pub steps: usize,
    /// True when the planned count exceeded `max_steps` and was cut.
    pub capped: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub initial: StepRecord,
    pub records: Vec<StepRecord>,
    pub final_norm: f64,
}

impl SolverReport {
    pub fn all_records(&self) -> impl Iterator<Item = &StepRecord> {
        std::iter::once(&self.initial).chain(self.records.iter())
    }
}

fn iterate_of(e: &BlockEncoding, backend: Backend) -> Option<CVector> {
    match backend {
        Backend::Algebraic => extract_vector(e, backend).ok(),
        Backend::GateLevel if e.wires() <= EXTRACT_MAX_WIRES => extract_vector(e, backend).ok(),
        Backend::GateLevel => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn record(
    step: usize,
    e: &BlockEncoding,
    plan: &AmplificationPlan,
    model: &CostModel,
    est: &EstimatorConfig,
    tolerance: f64,
    solver_tolerance: Option<f64>,
    angle_deviation: Option<f64>,
) -> Result<StepRecord> {
    let v = iterate_of(e, est.backend);
    Ok(StepRecord {
        step,
        norm: v.as_ref().map(|v| v.norm()),
        iterate: v.map(|v| v.iter().map(|z| [z.re, z.im]).collect()),
        gamma: e.gamma(),
        eta_before: plan.sigma,
        eta_after: plan.sigma_hat,
        k: plan.k,
        wires: e.wires(),
        gate_count: e.gate_count(model)?,
        tolerance,
        solver_tolerance,
        angle_deviation,
        estimator: est.into(),
    })
}

fn initial_record(x0: &BlockEncoding, cfg: &EstimatorConfig, model: &CostModel) -> Result<StepRecord> {
    let eta = estimate_eta(x0, cfg)?;
    record(0, x0, &AmplificationPlan::identity(eta), model, cfg, 0.0, None, None)
}

fn check_width(e: &BlockEncoding, backend: Backend) -> Result<()> {
    if backend == Backend::GateLevel && e.wires() > GATE_LEVEL_MAX_WIRES {
        return Err(Error::WidthLimit { wires: e.wires(), limit: GATE_LEVEL_MAX_WIRES });
    }
    Ok(())
}

fn step_estimator(base: &EstimatorConfig, step: usize, accuracy: f64, delta: f64) -> EstimatorConfig {
    EstimatorConfig { seed: base.seed.wrapping_add(step as u64), target_accuracy: accuracy, delta, ..base.clone() }
}

fn steps_to_run(requested: Option<usize>, planned: usize, max_steps: usize) -> (usize, bool) {
    match requested {
        Some(s) => (s.min(max_steps), s > max_steps),
        None => (planned.min(max_steps), planned > max_steps),
    }
}

/// Iterates `x ← g(x)` with a normalization after every application; `g`
/// maps an iterate encoding to an unnormalized encoding of its image.
pub fn fixed_point<G>(g: G, x0: &BlockEncoding, cfg: &FixedPointConfig) -> Result<(BlockEncoding, SolverReport)>
where
    G: Fn(&BlockEncoding) -> Result<BlockEncoding>,
{
    fixed_point_observed(g, x0, cfg, |_, _| Ok(()))
}

/// [`fixed_point`], calling `observe(step, x)` on every normalized iterate.
pub fn fixed_point_observed<G, O>(
    g: G,
    x0: &BlockEncoding,
    cfg: &FixedPointConfig,
    mut observe: O,
) -> Result<(BlockEncoding, SolverReport)>
where
    G: Fn(&BlockEncoding) -> Result<BlockEncoding>,
    O: FnMut(usize, &BlockEncoding) -> Result<()>,
{
    cfg.validate()?;
    let planned = cfg.planned_steps();
    let (n, capped) = steps_to_run(cfg.steps, planned, cfg.max_steps);
    let eps_g = cfg.step_tolerance();
    let delta_g = cfg.delta / n.max(1) as f64;
    let backend = cfg.estimator.backend;
    let initial = initial_record(x0, &cfg.estimator, &cfg.cost_model)?;
    let mut x = x0.clone();
    let mut records = Vec::with_capacity(n);
    for step in 1..=n {
        let est = step_estimator(&cfg.estimator, step, eps_g, delta_g);
        let raw = g(&x)?;
        check_width(&raw, backend)?;
        let (next, plan) = normalize(&raw, &est)?;
        records.push(record(step, &next, &plan, &cfg.cost_model, &est, eps_g, None, None)?);
        observe(step, &next)?;
        x = next;
    }
    let final_norm = measure_norm(&x, cfg.epsilon, cfg.delta, &cfg.estimator)?;
    let report = SolverReport {
        solver: "fixed-point".into(),
        planned_steps: planned,
        steps: n,
        capped,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        initial,
        records,
        final_norm,
    };
    Ok((x, report))
}

/// Newton's method in the form `x ← Df(x)⁻¹ (Df(x)x − f(x))`.
pub fn newton(f: &Polynomial, x0: &BlockEncoding, cfg: &NewtonConfig) -> Result<(BlockEncoding, SolverReport)> {
    newton_observed(f, x0, cfg, |_, _| Ok(()))
}

/// [`newton`], calling `observe(step, x)` on every iterate.
pub fn newton_observed<O>(
    f: &Polynomial,
    x0: &BlockEncoding,
    cfg: &NewtonConfig,
    mut observe: O,
) -> Result<(BlockEncoding, SolverReport)>
where
    O: FnMut(usize, &BlockEncoding) -> Result<()>,
{
    cfg.validate()?;
    let planned = cfg.planned_steps();
    let (n, capped) = steps_to_run(cfg.steps, planned, cfg.max_steps);
    let tau = cfg.schedule_tolerance(n);
    let delta_s = cfg.delta / n.max(1) as f64;
    let backend = cfg.estimator.backend;
    let initial = initial_record(x0, &cfg.estimator, &cfg.cost_model)?;
    let mut x = x0.clone();
    let mut records = Vec::with_capacity(n);
    for step in 1..=n {
        let est_rhs = step_estimator(&cfg.estimator, 2 * step, tau / 4.0, delta_s / 2.0);
        let est_sol = step_estimator(&cfg.estimator, 2 * step + 1, tau / 2.0, delta_s / 2.0);
        let jac = encode_jacobian(f, &x)?;
        let (rhs, _) = encode_newton_rhs(f, &x, &est_rhs)?;
        let solver = InversionConfig { estimator: est_sol.clone(), ..cfg.solver.clone() };
        let out = invert_apply(&jac, &rhs, &solver)?;
        check_width(&out.encoding, backend)?;
        records.push(record(
            step,
            &out.encoding,
            &out.plan,
            &cfg.cost_model,
            &est_sol,
            tau / 4.0,
            Some(tau / 2.0),
            out.deviation,
        )?);
        observe(step, &out.encoding)?;
        x = out.encoding;
    }
    let final_norm = measure_norm(&x, cfg.epsilon, cfg.delta, &cfg.estimator)?;
    let report = SolverReport {
        solver: "newton".into(),
        planned_steps: planned,
        steps: n,
        capped,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        initial,
        records,
        final_norm,
    };
    Ok((x, report))
}

/// Shots per batch used by [`measure_norm`] in Monte Carlo mode.
pub fn norm_shots(epsilon: f64) -> u64 {
    (60.0 / (epsilon * epsilon)).ceil() as u64
}

/// Batches used by [`measure_norm`] in Monte Carlo mode (always odd).
pub fn norm_batches(delta: f64) -> u64 {
    let r = (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as u64;
    r | 1
}

/// `γ η̂`. Monte Carlo mode sizes the shot budget from `epsilon` and `delta`.
pub fn measure_norm(e: &BlockEncoding, epsilon: f64, delta: f64, cfg: &EstimatorConfig) -> Result<f64> {
    let eta = match cfg.mode {
        EstimatorMode::Exact => estimate_eta(e, cfg)?,
        EstimatorMode::MonteCarlo => {
            if !(epsilon > 0.0 && delta > 0.0 && delta < 1.0) {
                return Err(Error::InvalidArgument(format!("tolerance {epsilon} / failure probability {delta}")));
            }
            let sized = EstimatorConfig {
                shots: norm_shots(epsilon),
                repetitions: norm_batches(delta),
                target_accuracy: epsilon,
                delta,
                ..cfg.clone()
            };
            estimate_eta(e, &sized)?
        }
    };
    Ok(e.gamma() * eta)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `γ_a γ_b ⟨u, v⟩` by the Hadamard test. The statistic is
/// `P(c=0, good) − P(c=1, good)` on a control wire `c`, once plain (real
/// part) and once with an `S†` on `c` (imaginary part).
pub fn hadamard_inner(a: &BlockEncoding, b: &BlockEncoding, cfg: &EstimatorConfig) -> Result<C64> {
    cfg.validate()?;
    if !a.is_vector() || !b.is_vector() {
        return Err(Error::InvalidArgument("expected vector encodings".into()));
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("vectors of length {} and {}", a.shape().0, b.shape().0)));
    }
    let m = a.wires().max(b.wires());
    let a = canonicalize(&a.widened(m))?;
    let b = canonicalize(&b.widened(m))?;
    let b = adapt_projection(&b, a.pi2(), Side::Output)?;
    let scale = a.gamma() * b.gamma();
    let parts: [f64; 2] = match cfg.backend {
        Backend::Algebraic => {
            let (sa, sb) = (a.shadow().ok_or(Error::NoShadow)?, b.shadow().ok_or(Error::NoShadow)?);
            let (u, v) = (sa.column(0), sb.column(0));
            let probs = |phase: C64| {
                let plus = (u + v * phase).norm_squared() / 4.0;
                let minus = (u - v * phase).norm_squared() / 4.0;
                (plus, minus)
            };
            [probs(c64(1.0, 0.0)), probs(c64(0.0, -1.0))].map(|(p0, p1)| match cfg.mode {
                EstimatorMode::Exact => p0 - p1,
                EstimatorMode::MonteCarlo => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    median(
                        (0..cfg.repetitions)
                            .map(|_| {
                                let n0 = Binomial::new(cfg.shots, p0.clamp(0.0, 1.0)).expect("p in [0,1]").sample(&mut rng);
                                let rest = (p1 / (1.0 - p0)).clamp(0.0, 1.0);
                                let n1 = Binomial::new(cfg.shots - n0, rest).expect("p in [0,1]").sample(&mut rng);
                                (n0 as f64 - n1 as f64) / cfg.shots as f64
                            })
                            .collect(),
                    )
                }
            })
        }
        Backend::GateLevel => {
            if m + 1 > GATE_LEVEL_MAX_WIRES {
                return Err(Error::WidthLimit { wires: m + 1, limit: GATE_LEVEL_MAX_WIRES });
            }
            let mut out = [0.0; 2];
            for (i, imag) in [false, true].into_iter().enumerate() {
                let s = hadamard_state(&a, &b, imag)?;
                let mut wires = vec![m];
                wires.extend(a.pi2().ancillas());
                let zeros = vec![false; wires.len() - 1];
                out[i] = match cfg.mode {
                    EstimatorMode::Exact => {
                        let mut pat0 = vec![false];
                        pat0.extend(&zeros);
                        let mut pat1 = vec![true];
                        pat1.extend(&zeros);
                        s.pattern_probability(&wires, &pat0) - s.pattern_probability(&wires, &pat1)
                    }
                    EstimatorMode::MonteCarlo => {
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                        let mut means = Vec::with_capacity(cfg.repetitions as usize);
                        for _ in 0..cfg.repetitions {
                            let h = sample(&s, &wires, cfg.shots, rng.random())?;
                            // outcome bit 0 is the control, the rest are ancillas
                            let n0 = h.get(&0).copied().unwrap_or(0) as f64;
                            let n1 = h.get(&1).copied().unwrap_or(0) as f64;
                            means.push((n0 - n1) / cfg.shots as f64);
                        }
                        median(means)
                    }
                };
            }
            out
        }
    };
    Ok(c64(parts[0], parts[1]) * c64(scale, 0.0))
}

/// `(|0⟩U_a|0⟩ + |1⟩U_b|0⟩)/√2` followed by the output pre-unitary, an
/// optional `S†` on the control, and a Hadamard on the control.
fn hadamard_state(a: &BlockEncoding, b: &BlockEncoding, imag: bool) -> Result<StateVector> {
    let m = a.wires();
    let map: Vec<usize> = (0..m).collect();
    let mut c = Circuit::new(m + 1, "hadamard-test");
    c.push(Gate::h(m))?;
    c.call(a.circuit(), &map, false, &[Control::off(m)])?;
    c.call(b.circuit(), &map, false, &[Control::on(m)])?;
    if imag {
        c.push(Gate::rz(m, -FRAC_PI_2))?;
    }
    c.push(Gate::h(m))?;
    run(&Arc::new(c), &StateVector::zero(m + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::C_IE;
    use crate::encoding::prepare_vector;
    use crate::polynomial::encode_poly_raw;
    use crate::linalg::{real_matrix, real_vector, vec_max_abs_diff, CMatrix};

    fn paper_g() -> Polynomial {
        let a0 = real_matrix(2, 1, &[1.0, 1.0]);
        let a2 = real_matrix(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]) * c64(-0.125, 0.0);
        Polynomial::new(2, vec![a0, CMatrix::zeros(2, 2), a2]).unwrap()
    }

    fn fp_config(backend: Backend, steps: usize) -> FixedPointConfig {
        let mut cfg = FixedPointConfig::new(0.58, 1e-3, EstimatorConfig::exact(backend));
        cfg.steps = Some(steps);
        cfg
    }

    #[test]
    fn planned_step_counts() {
        let mut cfg = fp_config(Backend::Algebraic, 1);
        cfg.contraction = 0.5;
        cfg.epsilon = 0.25;
        // |ln(0.125)| / ln 2 = 3
        assert_eq!(cfg.planned_steps(), 3);
        let n = NewtonConfig {
            epsilon: 1.0 / 16.0,
            theta: 0.5,
            e0_max: 1.0,
            ..NewtonConfig::new(InversionConfig::reference(6.0, 0.1, EstimatorConfig::default()), EstimatorConfig::default())
        };
        // log2(4) − log2(1) = 2
        assert_eq!(n.planned_steps(), 2);
        assert_eq!(steps_to_run(None, 9, 4), (4, true));
        assert_eq!(steps_to_run(Some(2), 9, 4), (2, false));
    }

    #[test]
    fn fixed_point_two_steps_match_classical_iteration() {
        let g = paper_g();
        let x0 = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        let (x, report) = fixed_point(|x| encode_poly_raw(&g, x), &x0, &fp_config(Backend::GateLevel, 2)).unwrap();
        let mut xc = real_vector(&[1.0, 1.0]);
        for r in &report.records {
            xc = g.evaluate(&xc);
            assert!(vec_max_abs_diff(&r.iterate_vector().unwrap(), &xc) < 1e-10);
            assert!(r.eta_after >= C_IE);
        }
        assert_eq!(report.records.len(), 2);
        assert!((report.final_norm - xc.norm()).abs() < 1e-10);
        assert!(x.info_efficiency().unwrap() >= C_IE);
    }

    #[test]
    fn fixed_point_steps_zero_reports_only_x0() {
        let g = paper_g();
        let x0 = prepare_vector(&real_vector(&[1.0, 1.0])).unwrap();
        let (_, report) = fixed_point(|x| encode_poly_raw(&g, x), &x0, &fp_config(Backend::Algebraic, 0)).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.initial.iterate_vector().unwrap(), real_vector(&[1.0, 1.0]));
    }

    #[test]
    fn newton_on_linear_map_converges_in_one_step() {
        let a0 = real_matrix(2, 1, &[0.3, -0.2]);
        let a1 = real_matrix(2, 2, &[0.9, 0.1, -0.2, 0.7]);
        let f = Polynomial::new(2, vec![a0.clone(), a1.clone()]).unwrap();
        let x0 = prepare_vector(&real_vector(&[1.0, 0.5])).unwrap();
        let est = EstimatorConfig::exact(Backend::GateLevel);
        let mut cfg = NewtonConfig::new(InversionConfig::reference(4.0, 0.1, est.clone()), est);
        cfg.steps = Some(1);
        let (_, report) = newton(&f, &x0, &cfg).unwrap();
        let root = crate::linalg::solve(&a1, &(-a0.column(0).into_owned())).unwrap();
        assert!(vec_max_abs_diff(&report.records[0].iterate_vector().unwrap(), &root) < 1e-10);
    }

    #[test]
    fn measure_norm_exact_and_monte_carlo() {
        let e = prepare_vector(&real_vector(&[3.0, 4.0])).unwrap();
        assert!((measure_norm(&e, 0.1, 0.1, &EstimatorConfig::exact(Backend::GateLevel)).unwrap() - 5.0).abs() < 1e-12);
        let amp = crate::amplify::tests::encoding_with_eta(0.4, &[3.0, 4.0]);
        let cfg = EstimatorConfig::monte_carlo(Backend::Algebraic, 1, 1, 7);
        let est = measure_norm(&amp, 0.05, 0.05, &cfg).unwrap();
        assert!((est - 5.0).abs() <= 0.05 * 5.0);
        assert_eq!(norm_batches(0.05), 25);
    }

    #[test]
    fn hadamard_inner_products() {
        let u = real_vector(&[0.6, 0.8]);
        let v = CVector::from_vec(vec![c64(0.0, 1.0), c64(2.0, -1.0)]);
        let a = prepare_vector(&u).unwrap();
        let b = prepare_vector(&v).unwrap();
        let want = u.dotc(&v);
        for backend in [Backend::GateLevel, Backend::Algebraic] {
            let got = hadamard_inner(&a, &b, &EstimatorConfig::exact(backend)).unwrap();
            assert!((got - want).norm() < 1e-12, "{backend}");
            assert!((hadamard_inner(&a, &a, &EstimatorConfig::exact(backend)).unwrap() - c64(1.0, 0.0)).norm() < 1e-12);
        }
        let e0 = prepare_vector(&real_vector(&[1.0, 0.0])).unwrap();
        let e1 = prepare_vector(&real_vector(&[0.0, 1.0])).unwrap();
        assert!(hadamard_inner(&e0, &e1, &EstimatorConfig::exact(Backend::GateLevel)).unwrap().norm() < 1e-12);
        let amp = crate::amplify::tests::encoding_with_eta(0.5, &[0.6, 0.8]);
        let got = hadamard_inner(&amp, &b, &EstimatorConfig::exact(Backend::GateLevel)).unwrap();
        assert!((got - want * c64(amp.gamma() * 0.5, 0.0)).norm() < 1e-12);
        let mc = hadamard_inner(&a, &b, &EstimatorConfig::monte_carlo(Backend::GateLevel, 20000, 5, 3)).unwrap();
        assert!((mc - want).norm() < 0.1);
    }
}
