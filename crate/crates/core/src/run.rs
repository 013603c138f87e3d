//! End-to-end solver runs: configuration, report files and circuit export.
//!
//! A run writes two files into its output directory:
//!
//! * `report.json`, a [`RunReport`] (schema [`REPORT_SCHEMA`], version
//!   [`REPORT_SCHEMA_VERSION`]);
//! * `iterates.csv`, preceded by `#` comment lines carrying the tool version,
//!   seed, backend and the full configuration as JSON. The columns are
//!   `step`, then `x<i>_re`, `x<i>_im` for every component, then `norm`,
//!   `eta`, `gamma`, `gate_count`. Iterate and norm cells are empty when the
//!   iterate was too wide to extract. `eta` is the information efficiency
//!   after normalization.
//!
//! Both files depend only on the configuration, so identical configurations
//! produce byte-identical output.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amplify::{EstimatorConfig, EstimatorMode};
use crate::circuit::{qasm, CostModel, COST_MODEL_ENV};
use crate::encoding::{prepare_vector, Backend, BlockEncoding, GATE_LEVEL_MAX_WIRES};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::linsolve::{InversionConfig, InversionMethod, PhaseAngles, BUNDLED_ANGLES_K6};
use crate::polynomial::{parse_complex, Polynomial};
use crate::problems::{builtin, Problem, PAPER_G, PAPER_G_DIRECT};
use crate::solvers::{fixed_point_observed, newton_observed, FixedPointConfig, NewtonConfig, SolverReport};

pub const REPORT_SCHEMA: &str = "ampenc-run-report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const REPORT_FILE: &str = "report.json";
pub const ITERATES_FILE: &str = "iterates.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    FixedPoint,
    Newton,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::FixedPoint => "fixed-point",
            SolverKind::Newton => "newton",
        }
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-point" => Ok(SolverKind::FixedPoint),
            "newton" => Ok(SolverKind::Newton),
            other => Err(Error::InvalidArgument(format!("unknown solver `{other}`"))),
        }
    }
}

/// Everything that determines a run. Serialized verbatim into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Built-in problem name or path to a problem file.
    pub problem: String,
    pub solver: SolverKind,
    /// Initial iterate; `None` picks the problem default.
    pub x0: Option<Vec<[f64; 2]>>,
    pub steps: Option<usize>,
    pub max_steps: Option<usize>,
    pub backend: Backend,
    pub estimator: EstimatorMode,
    pub shots: u64,
    pub repetitions: u64,
    pub seed: u64,
    /// Target accuracy; `None` uses 1e-3 for fixed point and 1e-2 for Newton.
    pub epsilon: Option<f64>,
    pub delta: f64,
    /// Contraction constant for the fixed-point step plan; `None` uses 0.58
    /// for the built-in problems and 0.5 otherwise.
    pub contraction: Option<f64>,
    pub inversion: InversionMethod,
    pub kappa: f64,
    pub solver_epsilon: f64,
    /// Phase-angle file; `None` uses the bundled `κ = 6` set.
    pub angles: Option<PathBuf>,
    pub norm_bound: f64,
    pub out_dir: PathBuf,
    pub export_qasm: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: PAPER_G.into(),
            solver: SolverKind::FixedPoint,
            x0: None,
            steps: None,
            max_steps: None,
            backend: Backend::GateLevel,
            estimator: EstimatorMode::Exact,
            shots: 1 << 14,
            repetitions: 9,
            seed: 0,
            epsilon: None,
            delta: 0.05,
            contraction: None,
            inversion: InversionMethod::Reference,
            kappa: 6.0,
            solver_epsilon: 0.1,
            angles: None,
            norm_bound: 4.0,
            out_dir: PathBuf::from("out"),
            export_qasm: false,
        }
    }
}

/// Parses `a,b,...` where each entry is a real or complex number (`1-2i`).
pub fn parse_vector(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split(',')
        .map(|t| {
            parse_complex(t.trim())
                .map(|z| [z.re, z.im])
                .ok_or_else(|| Error::InvalidArgument(format!("bad vector entry `{t}`")))
        })
        .collect()
}

fn is_builtin(name: &str) -> bool {
    name == PAPER_G || name == PAPER_G_DIRECT
}

impl RunConfig {
    pub fn load_problem(&self) -> Result<Problem> {
        if let Some(p) = builtin(&self.problem) {
            return Ok(p);
        }
        let path = Path::new(&self.problem);
        if !path.is_file() {
            return Err(Error::InvalidArgument(format!(
                "`{}` is neither a built-in problem ({PAPER_G}, {PAPER_G_DIRECT}) nor a readable file",
                self.problem
            )));
        }
        Ok(Problem::from_polynomial(self.problem.clone(), Polynomial::from_file(path)?))
    }

    pub fn initial_vector(&self, dim: usize) -> Result<CVector> {
        let entries = match &self.x0 {
            Some(v) => v.clone(),
            None if is_builtin(&self.problem) => match self.solver {
                SolverKind::FixedPoint => vec![[1.0, 0.0]; 2],
                SolverKind::Newton => vec![[2.0, 0.0], [0.25, 0.0]],
            },
            None => vec![[1.0, 0.0]; dim],
        };
        if entries.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "x0 has {} entries, the problem has dimension {dim}",
                entries.len()
            )));
        }
        Ok(CVector::from_iterator(dim, entries.iter().map(|p| C64::new(p[0], p[1]))))
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        match self.estimator {
            EstimatorMode::Exact => EstimatorConfig { seed: self.seed, ..EstimatorConfig::exact(self.backend) },
            EstimatorMode::MonteCarlo => {
                EstimatorConfig::monte_carlo(self.backend, self.shots, self.repetitions, self.seed)
            }
        }
    }

    pub fn inversion_config(&self) -> Result<InversionConfig> {
        let est = self.estimator_config();
        Ok(match self.inversion {
            InversionMethod::Reference => InversionConfig::reference(self.kappa, self.solver_epsilon, est),
            InversionMethod::Qsvt => {
                let angles = match &self.angles {
                    Some(p) => PhaseAngles::load(p)?,
                    None => PhaseAngles::parse(BUNDLED_ANGLES_K6)?,
                };
                InversionConfig::qsvt(self.kappa, self.solver_epsilon, angles, est)
            }
        })
    }

    fn fixed_point_config(&self, model: CostModel) -> FixedPointConfig {
        let default_l = if is_builtin(&self.problem) { 0.58 } else { 0.5 };
        let mut cfg = FixedPointConfig::new(
            self.contraction.unwrap_or(default_l),
            self.epsilon.unwrap_or(1e-3),
            self.estimator_config(),
        );
        cfg.delta = self.delta;
        cfg.steps = self.steps;
        if let Some(m) = self.max_steps {
            cfg.max_steps = m;
        }
        cfg.cost_model = model;
        cfg
    }

    fn newton_config(&self, model: CostModel) -> Result<NewtonConfig> {
        let mut cfg = NewtonConfig::new(self.inversion_config()?, self.estimator_config());
        cfg.epsilon = self.epsilon.unwrap_or(1e-2);
        cfg.delta = self.delta;
        cfg.norm_bound = self.norm_bound;
        cfg.steps = self.steps;
        if let Some(m) = self.max_steps {
            cfg.max_steps = m;
        }
        cfg.cost_model = model;
        Ok(cfg)
    }
}

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    pub backend: Backend,
    /// Value of the cost-model override variable, if set.
    pub cost_model_overrides: Option<String>,
    pub config: RunConfig,
    pub report: SolverReport,
}

/// Runs the configured solver, calling `observe(step, x)` on the initial
/// iterate (step 0) and on every later one.
pub fn execute<O>(cfg: &RunConfig, mut observe: O) -> Result<RunReport>
where
    O: FnMut(usize, &BlockEncoding) -> Result<()>,
{
    let model = CostModel::from_env()?;
    let problem = cfg.load_problem()?;
    let x0 = prepare_vector(&cfg.initial_vector(problem.polynomial.dim())?)?;
    observe(0, &x0)?;
    let (_, report) = match cfg.solver {
        SolverKind::FixedPoint => {
            fixed_point_observed(|x| problem.apply(x), &x0, &cfg.fixed_point_config(model), &mut observe)?
        }
        SolverKind::Newton => newton_observed(&problem.polynomial, &x0, &cfg.newton_config(model)?, &mut observe)?,
    };
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        schema_version: REPORT_SCHEMA_VERSION,
        version: VERSION.into(),
        seed: cfg.seed,
        backend: cfg.backend,
        cost_model_overrides: std::env::var(COST_MODEL_ENV).ok().filter(|s| !s.trim().is_empty()),
        config: cfg.clone(),
        report,
    })
}

/// Renders `iterates.csv`.
pub fn iterates_csv(run: &RunReport) -> Result<String> {
    let dim = run.report.all_records().find_map(|r| r.iterate.as_ref().map(Vec::len)).unwrap_or(0);
    let mut out = Vec::new();
    writeln!(out, "# ampenc {} {} v{}", run.version, REPORT_SCHEMA, run.schema_version)?;
    writeln!(out, "# solver {} backend {} seed {}", run.config.solver.as_str(), run.backend, run.seed)?;
    if let Some(o) = &run.cost_model_overrides {
        writeln!(out, "# {COST_MODEL_ENV}={o}")?;
    }
    writeln!(out, "# config {}", serde_json::to_string(&run.config)?)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    for i in 0..dim {
        header.push(format!("x{i}_re"));
        header.push(format!("x{i}_im"));
    }
    header.extend(["norm", "eta", "gamma", "gate_count"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for r in run.report.all_records() {
        let mut row = vec![r.step.to_string()];
        match &r.iterate {
            Some(v) => row.extend(v.iter().flat_map(|p| [num(p[0]), num(p[1])])),
            None => row.extend(std::iter::repeat_n(String::new(), 2 * dim)),
        }
        row.push(r.norm.map(num).unwrap_or_default());
        row.push(num(r.eta_after));
        row.push(num(r.gamma));
        row.push(r.gate_count.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Shortest round-trip rendering, switching to exponent form for tiny and
/// huge magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes `report.json` and `iterates.csv` into `dir`.
pub fn write_outputs(run: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(run)?;
    json.push('\n');
    fs::write(dir.join(REPORT_FILE), json)?;
    fs::write(dir.join(ITERATES_FILE), iterates_csv(run)?)?;
    Ok(())
}

/// File name of the exported circuit for `step`.
pub fn qasm_file_name(step: usize) -> String {
    format!("step-{step}.qasm")
}

/// OpenQASM 3 text of an iterate's circuit, re-imported as a grammar check.
pub fn export_step(e: &BlockEncoding) -> Result<String> {
    if e.wires() > GATE_LEVEL_MAX_WIRES {
        return Err(Error::WidthLimit { wires: e.wires(), limit: GATE_LEVEL_MAX_WIRES });
    }
    let text = qasm::export(e.circuit());
    qasm::import(&text)?;
    Ok(text)
}

/// Runs the solver and writes `step-<n>.qasm` for every iterate into
/// `dir`. Returns the written paths.
pub fn export_qasm(cfg: &RunConfig, dir: &Path) -> Result<(RunReport, Vec<PathBuf>)> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let run = execute(cfg, |step, e| {
        let path = dir.join(qasm_file_name(step));
        fs::write(&path, export_step(e)?)?;
        written.push(path);
        Ok(())
    })?;
    Ok((run, written))
}

/// A full run: solver, report files and, if requested, circuits under
/// `<out>/qasm`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let report = if cfg.export_qasm {
        export_qasm(cfg, &cfg.out_dir.join("qasm"))?.0
    } else {
        execute(cfg, |_, _| Ok(()))?
    };
    write_outputs(&report, &cfg.out_dir)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path) -> RunConfig {
        RunConfig { steps: Some(2), out_dir: dir.to_path_buf(), ..RunConfig::default() }
    }

    #[test]
    fn vector_parsing() {
        assert_eq!(parse_vector("2, 0.25").unwrap(), vec![[2.0, 0.0], [0.25, 0.0]]);
        assert_eq!(parse_vector("1-2i,3").unwrap(), vec![[1.0, -2.0], [3.0, 0.0]]);
        assert!(parse_vector("1,x").is_err());
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let run = run(&config(dir.path())).unwrap();
        let csv = fs::read_to_string(dir.path().join(ITERATES_FILE)).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "step,x0_re,x0_im,x1_re,x1_im,norm,eta,gamma,gate_count");
        assert_eq!(rows.len(), 4);
        assert!(rows[1].starts_with("0,1.0000000000000002,0.0,1.0,0.0,"));
        assert!(csv.lines().any(|l| l.starts_with("# config {")));
        let back: RunReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
        assert_eq!(back, run);
    }

    #[test]
    fn zero_steps_keeps_only_the_start() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { steps: Some(0), ..config(dir.path()) };
        let csv = iterates_csv(&execute(&cfg, |_, _| Ok(())).unwrap()).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].starts_with("0,"));
    }

    #[test]
    fn missing_problem_is_a_config_error() {
        let cfg = RunConfig { problem: "/nonexistent/problem.txt".into(), ..RunConfig::default() };
        let err = execute(&cfg, |_, _| Ok(())).unwrap_err();
        assert_eq!(err.category(), crate::ErrorCategory::Config);
    }

    #[test]
    fn wrong_x0_length() {
        let cfg = RunConfig { x0: Some(vec![[1.0, 0.0]; 3]), ..RunConfig::default() };
        assert!(matches!(execute(&cfg, |_, _| Ok(())), Err(Error::DimensionMismatch(_))));
    }
}
