//! Amplitude amplification, estimation of the information efficiency, and
//! normalization of vector encodings.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{sample, run, Circuit, Gate, StateVector};
use crate::encoding::{Backend, BlockEncoding, Projection, GATE_LEVEL_MAX_WIRES};
use crate::error::{Error, Result};
use crate::linalg::c64;

/// Information-efficiency floor guaranteed by [`normalize`] in exact mode.
pub const C_IE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMode {
    #[default]
    Exact,
    MonteCarlo,
}

impl std::str::FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EstimatorMode::Exact),
            "monte-carlo" | "mc" => Ok(EstimatorMode::MonteCarlo),
            other => Err(Error::InvalidArgument(format!("unknown estimator `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    pub backend: Backend,
    /// Shots per batch.
    pub shots: u64,
    /// Number of batches combined by their median.
    pub repetitions: u64,
    pub seed: u64,
    pub target_accuracy: f64,
    pub delta: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            mode: EstimatorMode::Exact,
            backend: Backend::GateLevel,
            shots: 1 << 14,
            repetitions: 9,
            seed: 0,
            target_accuracy: 1e-9,
            delta: 0.05,
        }
    }
}

impl EstimatorConfig {
    pub fn exact(backend: Backend) -> Self {
        EstimatorConfig { backend, ..Self::default() }
    }

    pub fn monte_carlo(backend: Backend, shots: u64, repetitions: u64, seed: u64) -> Self {
        EstimatorConfig {
            mode: EstimatorMode::MonteCarlo,
            backend,
            shots,
            repetitions,
            seed,
            target_accuracy: 0.05,
            delta: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 || self.repetitions == 0 {
            return Err(Error::InvalidArgument("shots and repetitions must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!("failure probability {} not in (0,1)", self.delta)));
        }
        Ok(())
    }
}

/// State `U|0⟩` followed by the output pre-unitary, so that the good part is
/// the ancilla-zero component.
fn output_state(e: &BlockEncoding) -> Result<StateVector> {
    let m = e.wires();
    if m > GATE_LEVEL_MAX_WIRES {
        return Err(Error::WidthLimit { wires: m, limit: GATE_LEVEL_MAX_WIRES });
    }
    let mut s = run(e.circuit(), &StateVector::zero(m)?)?;
    if let Some(v) = e.pi2().pre() {
        s = run(v, &s)?;
    }
    Ok(s)
}

fn require_vector(e: &BlockEncoding) -> Result<()> {
    if e.is_vector() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("expected a vector encoding".into()))
    }
}

/// Median of per-batch success frequencies.
fn median_of_means(mut draw: impl FnMut(u64) -> Result<u64>, cfg: &EstimatorConfig) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut means: Vec<f64> = (0..cfg.repetitions)
        .map(|_| draw(rng.random()).map(|hits| hits as f64 / cfg.shots as f64))
        .collect::<Result<_>>()?;
    means.sort_by(f64::total_cmp);
    let n = means.len();
    Ok(if n % 2 == 1 { means[n / 2] } else { 0.5 * (means[n / 2 - 1] + means[n / 2]) })
}

/// Estimate of `η = |Π2 U |0⟩|` for a vector encoding.
pub fn estimate_eta(e: &BlockEncoding, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    require_vector(e)?;
    match (cfg.mode, cfg.backend) {
        (EstimatorMode::Exact, Backend::Algebraic) => e.eta_algebraic(),
        (EstimatorMode::Exact, Backend::GateLevel) => {
            let s = output_state(e)?;
            let p: f64 = (0..e.pi2().dim()).map(|i| s.amplitudes()[e.pi2().embed_index(i)].norm_sqr()).sum();
            Ok(p.sqrt().min(1.0))
        }
        (EstimatorMode::MonteCarlo, Backend::Algebraic) => {
            let p = e.eta_algebraic()?.powi(2).clamp(0.0, 1.0);
            let p_hat = median_of_means(
                |seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    Ok(Binomial::new(cfg.shots, p).expect("p in [0,1]").sample(&mut rng))
                },
                cfg,
            )?;
            Ok(p_hat.max(0.0).sqrt().min(1.0))
        }
        (EstimatorMode::MonteCarlo, Backend::GateLevel) => {
            let anc = e.pi2().ancillas();
            if anc.is_empty() {
                return Ok(1.0);
            }
            let s = output_state(e)?;
            let p_hat = median_of_means(
                |seed| Ok(sample(&s, &anc, cfg.shots, seed)?.get(&0).copied().unwrap_or(0)),
                cfg,
            )?;
            Ok(p_hat.max(0.0).sqrt().min(1.0))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationPlan {
    pub k: usize,
    pub sigma: f64,
    pub sigma_hat: f64,
}

impl AmplificationPlan {
    /// `γ σ / σ̂`.
    pub fn gamma_hat(&self, gamma: f64) -> f64 {
        gamma * self.sigma / self.sigma_hat
    }

    pub fn identity(sigma: f64) -> Self {
        AmplificationPlan { k: 1, sigma, sigma_hat: sigma }
    }
}

/// Largest odd `k` with `k·asin σ ≤ π/2`, i.e. `k = 2⌊π/(4 asin σ) + 1/2⌋ − 1`.
pub fn plan_amplification(sigma: f64) -> Result<AmplificationPlan> {
    if !(sigma > 0.0) || sigma.is_nan() {
        return Err(Error::ZeroEstimate);
    }
    let sigma = sigma.min(1.0);
    let theta = sigma.asin();
    let x = PI / (4.0 * theta) + 0.5;
    // a relative slack absorbs rounding at exact boundaries such as σ = 1/2
    let mut k = 2 * ((x * (1.0 + 1e-12)).floor() as usize) - 1;
    while k > 1 && k as f64 * theta > FRAC_PI_2 * (1.0 + 1e-12) {
        k -= 2;
    }
    Ok(plan_with_k(sigma, k))
}

fn plan_with_k(sigma: f64, k: usize) -> AmplificationPlan {
    let sigma_hat = (k as f64 * sigma.asin()).sin().abs().min(1.0);
    AmplificationPlan { k, sigma, sigma_hat }
}

/// Reflection `2|0⟩⟨0| − I` on all wires.
fn reflect_zero(m: usize) -> Result<Circuit> {
    let mut c = Circuit::new(m, "R0");
    c.push(Gate::phase_flip(&(0..m).collect::<Vec<_>>(), &vec![false; m])?)?;
    c.push(Gate::rz(0, 2.0 * PI))?;
    Ok(c)
}

/// Reflection `I − 2Π†Π` about the output subspace.
fn reflect_output(p: &Projection) -> Result<Circuit> {
    let m = p.wires();
    let mut c = Circuit::new(m, "S_pi");
    let anc = p.ancillas();
    if anc.is_empty() {
        c.push(Gate::rz(0, 2.0 * PI))?;
        return Ok(c);
    }
    if let Some(v) = p.pre() {
        c.call_prefix(v, false)?;
    }
    c.push(Gate::phase_flip(&anc, &vec![false; anc.len()])?)?;
    if let Some(v) = p.pre() {
        c.call_prefix(v, true)?;
    }
    Ok(c)
}

/// Builds `G^{(k−1)/2} U` with `G = U R0 U† S_Π`, which invokes `U` exactly
/// `k` times and maps the good amplitude `sin θ` to `sin(kθ)`.
pub fn amplify(e: &BlockEncoding, plan: &AmplificationPlan) -> Result<BlockEncoding> {
    require_vector(e)?;
    if plan.k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("amplification steps k = {} must be odd", plan.k)));
    }
    let gamma = plan.gamma_hat(e.gamma());
    if plan.k == 1 {
        return Ok(e.clone().with_gamma(gamma));
    }
    let m = e.wires();
    let u = e.circuit();
    let s_pi = Arc::new(reflect_output(e.pi2())?);
    let r0 = Arc::new(reflect_zero(m)?);
    let mut c = Circuit::new(m, format!("amp{}({})", plan.k, u.label()));
    c.call_prefix(u, false)?;
    for _ in 0..(plan.k - 1) / 2 {
        c.call_prefix(&s_pi, false)?;
        c.call_prefix(u, true)?;
        c.call_prefix(&r0, false)?;
        c.call_prefix(u, false)?;
    }
    let shadow = match e.shadow() {
        Some(sh) => {
            let s = sh.norm();
            if s > 0.0 {
                let theta = s.min(1.0).asin();
                Some(sh * c64((plan.k as f64 * theta).sin() / s, 0.0))
            } else {
                Some(sh.clone())
            }
        }
        None => None,
    };
    let out = BlockEncoding::new(Arc::new(c), e.pi1().clone(), e.pi2().clone(), gamma, e.epsilon())?;
    Ok(out.with_shadow_opt(shadow))
}

/// Estimates `η`, plans and amplifies. In exact mode the output satisfies
/// `η ≥ 1/4` and encodes the same vector.
pub fn normalize(e: &BlockEncoding, cfg: &EstimatorConfig) -> Result<(BlockEncoding, AmplificationPlan)> {
    let sigma = estimate_eta(e, cfg)?;
    if sigma <= 0.0 {
        return Err(Error::ZeroEstimate);
    }
    let plan = plan_amplification(sigma)?;
    let mut out = amplify(e, &plan)?;
    if cfg.mode == EstimatorMode::MonteCarlo {
        let eps = out.epsilon();
        out = out.with_epsilon(eps + cfg.target_accuracy + eps * cfg.target_accuracy);
    }
    Ok((out, plan))
}

/// Damps `η` to `sin(π/(2k))` for the smallest odd `k` allowing it, then
/// amplifies with that `k` so the result has `η = 1`.
pub fn tune_to_unity(e: &BlockEncoding, backend: Backend) -> Result<(BlockEncoding, AmplificationPlan)> {
    require_vector(e)?;
    let eta = e.eta_with(backend)?;
    if eta <= 0.0 {
        return Err(Error::ZeroEstimate);
    }
    if eta >= 1.0 - 1e-12 {
        return Ok((e.clone(), AmplificationPlan::identity(eta)));
    }
    let mut k = 1usize;
    while (PI / (2.0 * k as f64)).sin() > eta {
        k += 2;
    }
    let target = (PI / (2.0 * k as f64)).sin();
    let c = target / eta;
    let m = e.wires();
    let mut circ = Circuit::new(m + 1, format!("damp({})", e.circuit().label()));
    circ.call_prefix(e.circuit(), false)?;
    circ.push(Gate::ry(m, 2.0 * c.clamp(-1.0, 1.0).acos()))?;
    let pi2 = Projection::new(
        m + 1,
        e.pi2().data_wires().to_vec(),
        e.pi2().pre().map(|v| Arc::new(v.widened(m + 1))),
    )?;
    let damped = BlockEncoding::new(Arc::new(circ), Projection::zero(m + 1), pi2, e.gamma() / c, e.epsilon())?
        .with_shadow_opt(e.shadow().map(|s| s * c64(c, 0.0)));
    let plan = plan_with_k(target, k);
    Ok((amplify(&damped, &plan)?, plan))
}
