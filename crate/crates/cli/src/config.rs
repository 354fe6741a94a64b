//! Sweep configuration: a TOML file, defaults per experiment, flag overrides.

use crate::CliError;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    AmpSweep,
    DeFixedPoint,
    RsSweep,
    PhaseDiagram,
    RateDistortion,
    CdCompare,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::AmpSweep => "amp-sweep",
            Self::DeFixedPoint => "de-fixed-point",
            Self::RsSweep => "rs-sweep",
            Self::PhaseDiagram => "phase-diagram",
            Self::RateDistortion => "rate-distortion",
            Self::CdCompare => "cd-compare",
        }
    }

    fn uses_a_grid(self) -> bool {
        !matches!(self, Self::PhaseDiagram | Self::CdCompare)
    }

    fn samples_instances(self) -> bool {
        matches!(self, Self::AmpSweep | Self::CdCompare)
    }
}

/// A grid given as a single number, an explicit list, or an evenly spaced
/// range `{ from, to, points, log }`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Grid {
    One(f64),
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeSpec {
    from: f64,
    to: f64,
    points: usize,
    #[serde(default)]
    log: bool,
}

impl Grid {
    fn expand(self, key: &str) -> Result<Vec<f64>, CliError> {
        Ok(match self {
            Grid::One(x) => vec![x],
            Grid::List(v) => v,
            Grid::Range(r) => {
                if r.points == 0 {
                    return Err(CliError::Usage(format!("{key}: range needs at least one point")));
                }
                if r.log && !(r.from > 0.0 && r.to > 0.0) {
                    return Err(CliError::Usage(format!("{key}: log range needs positive ends")));
                }
                let last = (r.points - 1).max(1) as f64;
                (0..r.points)
                    .map(|k| {
                        let t = k as f64 / last;
                        if r.log {
                            (r.from.ln() + t * (r.to.ln() - r.from.ln())).exp()
                        } else {
                            r.from + t * (r.to - r.from)
                        }
                    })
                    .collect()
            }
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    experiment: Option<String>,
    alpha: Option<Grid>,
    sigma_y: Option<f64>,
    lambda_grid: Option<Grid>,
    a_grid: Option<Grid>,
    #[serde(alias = "N")]
    n: Option<usize>,
    num_seeds: Option<usize>,
    base_seed: Option<u64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    damping: Option<f64>,
    boundary_tol: Option<f64>,
    a_bracket: Option<[f64; 2]>,
    starts: Option<usize>,
    a_tol: Option<f64>,
    reference_a: Option<f64>,
    output_path: Option<PathBuf>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: Experiment,
    pub alphas: Vec<f64>,
    pub sigma_y: f64,
    pub lambdas: Vec<f64>,
    pub a_values: Vec<f64>,
    pub n: usize,
    pub num_seeds: usize,
    pub base_seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub boundary_tol: f64,
    pub a_bracket: (f64, f64),
    pub starts: usize,
    pub a_tol: f64,
    pub reference_a: f64,
    pub output: PathBuf,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl Settings {
    pub fn load(experiment: Experiment, path: Option<&Path>, over: Overrides) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        Self::resolve(experiment, file, over)
    }

    fn resolve(experiment: Experiment, f: FileConfig, over: Overrides) -> Result<Self, CliError> {
        use Experiment::*;
        let usage = |m: String| Err(CliError::Usage(m));
        if let Some(e) = &f.experiment {
            if e != experiment.name() {
                return usage(format!("config is for experiment '{e}', not '{}'", experiment.name()));
            }
        }
        let grid = |g: Option<Grid>, key: &str| match g {
            Some(g) => g.expand(key),
            None => Ok(Vec::new()),
        };
        let (tol, max_iter, damping) = match experiment {
            AmpSweep => (1e-8, 5000, 0.5),
            DeFixedPoint => (1e-12, 100_000, 0.0),
            RsSweep | PhaseDiagram | RateDistortion => (1e-10, 100_000, 0.5),
            CdCompare => (1e-10, 10_000, 0.0),
        };
        let s = Settings {
            experiment,
            alphas: grid(f.alpha, "alpha")?,
            sigma_y: f.sigma_y.unwrap_or(1.0),
            lambdas: grid(f.lambda_grid, "lambda_grid")?,
            a_values: grid(f.a_grid, "a_grid")?,
            n: f.n.unwrap_or(200),
            num_seeds: f.num_seeds.unwrap_or(10),
            base_seed: over.seed.or(f.base_seed).unwrap_or(0),
            tol: f.tol.unwrap_or(tol),
            max_iter: f.max_iter.unwrap_or(max_iter),
            damping: f.damping.unwrap_or(damping),
            boundary_tol: f.boundary_tol.unwrap_or(1e-4),
            a_bracket: f.a_bracket.map(|[l, h]| (l, h)).unwrap_or(match experiment {
                CdCompare => (1.01, 100.0),
                _ => (1.001, 1e3),
            }),
            starts: f.starts.unwrap_or(20),
            a_tol: f.a_tol.unwrap_or(1e-2),
            reference_a: f.reference_a.unwrap_or(3.7),
            output: match over.out.or(f.output_path) {
                Some(p) => p,
                None => return usage("no output path: pass --out or set output_path".into()),
            },
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Usage(m));
        let check_grid = |v: &[f64], key: &str, ok: fn(f64) -> bool, what: &str| {
            if v.is_empty() {
                return fail(format!("{key} is empty"));
            }
            match v.iter().find(|x| !x.is_finite() || !ok(**x)) {
                Some(x) => fail(format!("{key}: {x} is not {what}")),
                None => Ok(()),
            }
        };
        check_grid(&self.alphas, "alpha", |x| x > 0.0, "positive")?;
        check_grid(&self.lambdas, "lambda_grid", |x| x > 0.0, "positive")?;
        if self.experiment.uses_a_grid() {
            check_grid(&self.a_values, "a_grid", |x| x > 1.0, "greater than 1")?;
        }
        if !(self.sigma_y >= 0.0 && self.sigma_y.is_finite()) {
            return fail(format!("sigma_y must be finite and nonnegative, got {}", self.sigma_y));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return fail("tol must be positive and max_iter at least 1".into());
        }
        if !(0.0..1.0).contains(&self.damping) {
            return fail(format!("damping must lie in [0, 1), got {}", self.damping));
        }
        if !(self.boundary_tol > 0.0 && self.a_tol > 0.0) {
            return fail("boundary_tol and a_tol must be positive".into());
        }
        let (lo, hi) = self.a_bracket;
        if !(lo > 1.0 && hi > lo && hi.is_finite()) {
            return fail(format!("a_bracket must satisfy 1 < low < high, got [{lo}, {hi}]"));
        }
        if !(self.reference_a > 1.0) {
            return fail(format!("reference_a must exceed 1, got {}", self.reference_a));
        }
        if self.experiment.samples_instances() {
            if self.n == 0 || self.num_seeds == 0 {
                return fail("n and num_seeds must be at least 1".into());
            }
            for &alpha in &self.alphas {
                self.rows_for(alpha)?;
            }
        }
        if self.experiment == Experiment::CdCompare && self.starts < 2 {
            return fail(format!(
                "starts must be at least 2 to compare fixed points, got {}",
                self.starts
            ));
        }
        Ok(())
    }

    /// `M = αN`, which must be a whole number.
    pub fn rows_for(&self, alpha: f64) -> Result<usize, CliError> {
        let exact = alpha * self.n as f64;
        let m = exact.round();
        if (exact - m).abs() > 1e-9 * exact.max(1.0) || m < 1.0 {
            return Err(CliError::Usage(format!(
                "alpha * n = {alpha} * {} = {exact} is not a positive whole number",
                self.n
            )));
        }
        Ok(m as usize)
    }

    /// The settings that determine the output, as TOML. Used for the CSV
    /// header and to recognize an interrupted run of the same sweep.
    pub fn echo(&self) -> String {
        use Experiment::*;
        let mut t = Table::new();
        let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
        let int = |x: usize| Value::Integer(x as i64);
        t.insert("experiment".into(), Value::String(self.experiment.name().into()));
        t.insert("alpha".into(), floats(&self.alphas));
        t.insert("sigma_y".into(), Value::Float(self.sigma_y));
        t.insert("lambda_grid".into(), floats(&self.lambdas));
        if self.experiment.uses_a_grid() {
            t.insert("a_grid".into(), floats(&self.a_values));
        }
        match self.experiment {
            AmpSweep | DeFixedPoint | RsSweep | RateDistortion => {
                t.insert("tol".into(), Value::Float(self.tol));
                t.insert("max_iter".into(), int(self.max_iter));
                t.insert("damping".into(), Value::Float(self.damping));
            }
            PhaseDiagram => {
                t.insert("tol".into(), Value::Float(self.tol));
                t.insert("max_iter".into(), int(self.max_iter));
                t.insert("damping".into(), Value::Float(self.damping));
                t.insert("a_bracket".into(), floats(&[self.a_bracket.0, self.a_bracket.1]));
                t.insert("boundary_tol".into(), Value::Float(self.boundary_tol));
                t.insert("reference_a".into(), Value::Float(self.reference_a));
            }
            CdCompare => {
                t.insert("tol".into(), Value::Float(self.tol));
                t.insert("max_iter".into(), int(self.max_iter));
                t.insert("a_bracket".into(), floats(&[self.a_bracket.0, self.a_bracket.1]));
                t.insert("a_tol".into(), Value::Float(self.a_tol));
                t.insert("boundary_tol".into(), Value::Float(self.boundary_tol));
                t.insert("starts".into(), int(self.starts));
            }
        }
        if self.experiment.samples_instances() {
            t.insert("n".into(), int(self.n));
            t.insert("num_seeds".into(), int(self.num_seeds));
            t.insert("base_seed".into(), Value::Integer(self.base_seed as i64));
        }
        toml::to_string(&t).expect("a table of plain values always serializes")
    }
}
