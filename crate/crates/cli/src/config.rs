//! Flat key-value experiment configuration.
//!
//! The config file format is one `key = value` pair per line with dotted
//! section keys (`measure.omega_c = 3.0`), `#` comments, and blank lines.
//! It is deliberately trivial to parse and diff. Unknown keys are rejected
//! so typos surface as config errors instead of silently applying defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ddopt::{OptimizerConfig, QuadratureConfig, SpectralDensity, SpectralMeasure};

use crate::CliError;

/// hbar / k_B in ps * K: converts temperature to the inverse-temperature
/// time scale beta = hbar / (k_B T). Value 7.63823e0 ps K to six digits
/// (hbar = 1.054571817e-34 J s, k_B = 1.380649e-23 J/K).
pub const HBAR_OVER_KB_PS_K: f64 = 1.054571817e-34 / 1.380649e-23 * 1e12;

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "measure.kind",
    "measure.model",
    "measure.alpha_ps2",
    "measure.s",
    "measure.omega_c",
    "measure.amplitude",
    "measure.table",
    "measure.temperature_K",
    "measure.beta_ps",
    "timing.tau_ps",
    "timing.T_ps",
    "sequence.kind",
    "sequence.n",
    "sequence.file",
    "methods",
    "n_limit",
    "udd_n_limit",
    "sweep.omega_c_tau",
    "sweep.T_ps",
    "sweep.ratio",
    "fig1.omega_c",
    "filter.omega_max",
    "filter.samples",
    "quad.omega_inf",
    "quad.rel_tol",
    "quad.abs_tol",
    "quad.max_depth",
    "bound.a",
    "bound.c",
    "bound.C",
    "opt.value_tol",
    "opt.constraint_tol",
    "opt.max_iterations",
    "opt.multistart",
    "opt.lodd_floor_scale",
    "rng_seed",
    "output",
];

/// Raw parsed key-value document, preserving nothing but the pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KvConfig {
    pairs: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key `{key}`",
                    idx + 1
                )));
            }
            if pairs.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    idx + 1
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.pairs.insert(key.to_string(), value.to_string());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs.get(key).map(|s| s.as_str())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("key `{key}`: bad number `{v}` ({e})"))),
        }
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Config(format!("key `{key}`: bad number `{v}` ({e})")))
            })
            .transpose()
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("key `{key}`: bad integer `{v}` ({e})"))),
        }
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64, CliError> {
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(CliError::Config(format!(
                "key `{key}` must be positive and finite, got {value}"
            )))
        }
    }
}

/// Scale presets for the figure commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Small sweeps that finish on a desktop.
    Desk,
    /// Full-size sweeps matching the published search spaces.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Udd,
    Badd,
    Lodd,
    Ofdd,
    Free,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Udd => "udd",
            Method::Badd => "badd",
            Method::Lodd => "lodd",
            Method::Ofdd => "ofdd",
            Method::Free => "free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Udd,
    Uniform,
    Free,
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub measure: SpectralMeasure,
    pub tau: f64,
    pub total: f64,
    pub sequence_kind: SequenceKind,
    pub sequence_n: usize,
    pub sequence_file: Option<String>,
    pub methods: Vec<Method>,
    pub n_limit: usize,
    pub udd_n_limit: usize,
    pub sweep_omega_c_tau: Vec<f64>,
    pub sweep_total: Vec<f64>,
    pub sweep_ratio: Vec<f64>,
    pub fig1_omega_c: f64,
    pub filter_omega_max: f64,
    pub filter_samples: usize,
    pub quad: QuadratureConfig,
    pub bound_a: f64,
    pub bound_c: f64,
    pub bound_big_c: f64,
    pub optimizer: OptimizerConfig,
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self, CliError> {
        let preset = match kv.get("preset").unwrap_or("desk") {
            "desk" => Preset::Desk,
            "paper" => Preset::Paper,
            other => {
                return Err(CliError::Config(format!(
                    "preset must be `desk` or `paper`, got `{other}`"
                )))
            }
        };

        let omega_c = kv.positive("measure.omega_c", kv.f64_or("measure.omega_c", 3.0)?)?;
        let measure = build_measure(kv, omega_c)?;

        let tau = kv.positive("timing.tau_ps", kv.f64_or("timing.tau_ps", 0.1)?)?;
        let total = kv.positive("timing.T_ps", kv.f64_or("timing.T_ps", 10.0)?)?;

        let sequence_kind = match kv.get("sequence.kind").unwrap_or("udd") {
            "udd" => SequenceKind::Udd,
            "uniform" => SequenceKind::Uniform,
            "free" => SequenceKind::Free,
            other => {
                return Err(CliError::Config(format!(
                    "sequence.kind must be udd|uniform|free, got `{other}`"
                )))
            }
        };
        let sequence_n = kv.usize_or("sequence.n", 1)?;
        let sequence_file = kv.get("sequence.file").map(|s| s.to_string());

        let methods = parse_methods(kv.get("methods"))?;

        let default_n_limit = match preset {
            Preset::Desk => 30,
            Preset::Paper => 100,
        };
        let n_limit = kv.usize_or("n_limit", default_n_limit)?;
        let udd_n_limit = kv.usize_or("udd_n_limit", 20)?;

        let sweep_omega_c_tau = parse_sweep(kv.get("sweep.omega_c_tau").unwrap_or("0.3:2.0:18"))?;
        let default_t_sweep = match preset {
            Preset::Desk => "2:10:5",
            Preset::Paper => "2:10:9",
        };
        let sweep_total = parse_sweep(kv.get("sweep.T_ps").unwrap_or(default_t_sweep))?;
        let default_ratio = match preset {
            Preset::Desk => "0.6:1.4:5",
            Preset::Paper => "0.5:1.5:11",
        };
        let sweep_ratio = parse_sweep(kv.get("sweep.ratio").unwrap_or(default_ratio))?;

        let fig1_omega_c = kv.positive("fig1.omega_c", kv.f64_or("fig1.omega_c", 1.0)?)?;

        let quad = QuadratureConfig {
            omega_inf: kv.positive(
                "quad.omega_inf",
                kv.f64_or("quad.omega_inf", 5.0 * measure.cutoff())?,
            )?,
            rel_tol: kv.positive("quad.rel_tol", kv.f64_or("quad.rel_tol", 1e-8)?)?,
            abs_tol: kv.positive("quad.abs_tol", kv.f64_or("quad.abs_tol", 1e-12)?)?,
            max_depth: kv.usize_or("quad.max_depth", 30)? as u32,
        };
        if quad.max_depth < 1 {
            return Err(CliError::Config("quad.max_depth must be >= 1".into()));
        }

        let bound_a = kv.positive("bound.a", kv.f64_or("bound.a", 3.0)?)?;
        let bound_c = kv.positive("bound.c", kv.f64_or("bound.c", 0.5)?)?;
        let bound_big_c = kv.positive("bound.C", kv.f64_or("bound.C", 1.0)?)?;

        let optimizer = OptimizerConfig {
            value_tol: kv.positive("opt.value_tol", kv.f64_or("opt.value_tol", 1e-6)?)?,
            constraint_tol: kv
                .positive("opt.constraint_tol", kv.f64_or("opt.constraint_tol", 1e-6)?)?,
            max_iterations: kv.usize_or("opt.max_iterations", 500)?,
            multistart: kv.usize_or("opt.multistart", 4)?,
            rng_seed: kv.usize_or("rng_seed", 1)? as u64,
            lodd_floor_scale: kv.positive(
                "opt.lodd_floor_scale",
                kv.f64_or("opt.lodd_floor_scale", 1e-6)?,
            )?,
        };

        let filter_omega_max = kv.positive(
            "filter.omega_max",
            kv.f64_or("filter.omega_max", 2.0 * measure.cutoff())?,
        )?;
        let filter_samples = kv.usize_or("filter.samples", 500)?;
        if filter_samples < 2 {
            return Err(CliError::Config("filter.samples must be >= 2".into()));
        }

        Ok(Self {
            preset,
            measure,
            tau,
            total,
            sequence_kind,
            sequence_n,
            sequence_file,
            methods,
            n_limit,
            udd_n_limit,
            sweep_omega_c_tau,
            sweep_total,
            sweep_ratio,
            fig1_omega_c,
            filter_omega_max,
            filter_samples,
            quad,
            bound_a,
            bound_c,
            bound_big_c,
            optimizer,
            output: kv.get("output").map(|s| s.to_string()),
        })
    }
}

fn build_measure(kv: &KvConfig, omega_c: f64) -> Result<SpectralMeasure, CliError> {
    let kind = kv.get("measure.kind").unwrap_or("quantum");
    if kind == "flat" {
        return SpectralMeasure::flat(omega_c).map_err(|e| CliError::Config(e.to_string()));
    }
    let model = kv.get("measure.model").unwrap_or("supra_ohmic_gaussian");
    let density = match model {
        "supra_ohmic_gaussian" => {
            let alpha =
                kv.positive("measure.alpha_ps2", kv.f64_or("measure.alpha_ps2", 0.0114)?)?;
            let s = kv.positive("measure.s", kv.f64_or("measure.s", 3.0)?)?;
            SpectralDensity::supra_ohmic_gaussian(alpha, s, omega_c)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
        "flat_hard_cutoff" => {
            let amplitude = kv.f64_or("measure.amplitude", 1.0)?;
            SpectralDensity::flat_hard_cutoff(amplitude, omega_c)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
        "tabulated" => {
            let path = kv.get("measure.table").ok_or_else(|| {
                CliError::Config("measure.model = tabulated needs measure.table".into())
            })?;
            load_table(Path::new(path))?
        }
        other => return Err(CliError::Config(format!("unknown measure.model `{other}`"))),
    };
    match kind {
        "quantum" => {
            let beta = match (
                kv.f64_opt("measure.beta_ps")?,
                kv.f64_opt("measure.temperature_K")?,
            ) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Config(
                        "set either measure.beta_ps or measure.temperature_K, not both".into(),
                    ))
                }
                (Some(beta), None) => beta,
                (None, Some(t)) => {
                    if !(t > 0.0) {
                        return Err(CliError::Config(format!(
                            "measure.temperature_K must be positive, got {t}"
                        )));
                    }
                    HBAR_OVER_KB_PS_K / t
                }
                (None, None) => HBAR_OVER_KB_PS_K / 77.0,
            };
            SpectralMeasure::quantum(density, beta).map_err(|e| CliError::Config(e.to_string()))
        }
        "classical" => Ok(SpectralMeasure::classical(density)),
        other => Err(CliError::Config(format!("unknown measure.kind `{other}`"))),
    }
}

fn load_table(path: &Path) -> Result<SpectralDensity, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64, CliError> {
            tok.ok_or_else(|| {
                CliError::Config(format!("table line {}: expected `omega value`", idx + 1))
            })?
            .parse()
            .map_err(|e| CliError::Config(format!("table line {}: {e}", idx + 1)))
        };
        let w = parse(parts.next())?;
        let v = parse(parts.next())?;
        samples.push((w, v));
    }
    SpectralDensity::tabulated(&samples).map_err(|e| CliError::Config(e.to_string()))
}

fn parse_methods(spec: Option<&str>) -> Result<Vec<Method>, CliError> {
    let Some(spec) = spec else {
        return Ok(vec![Method::Udd, Method::Badd, Method::Lodd]);
    };
    let mut out = Vec::new();
    for tok in spec.split(',') {
        let m = match tok.trim() {
            "udd" => Method::Udd,
            "badd" => Method::Badd,
            "lodd" => Method::Lodd,
            "ofdd" => Method::Ofdd,
            "free" => Method::Free,
            other => {
                return Err(CliError::Config(format!(
                    "unknown method `{other}` (expected udd|badd|lodd|ofdd|free)"
                )))
            }
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("methods list is empty".into()));
    }
    Ok(out)
}

/// `start:stop:count` inclusive sweep specification.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "sweep `{spec}` must be start:stop:count"
        )));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("sweep `{spec}`: {e}")))?;
    let stop: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("sweep `{spec}`: {e}")))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("sweep `{spec}`: {e}")))?;
    if count == 0 {
        return Err(CliError::Config(format!("sweep `{spec}`: empty range")));
    }
    if count > 1 && !(stop > start) {
        return Err(CliError::Config(format!(
            "sweep `{spec}` must be increasing"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}
