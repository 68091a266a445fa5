//! Run configuration: per-command key schemas, `key = value` config files and
//! flag precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Variance,
    JcSweep,
    Wigner,
    Homodyne,
    PhaseScan,
    Budget,
    WindowSweep,
}

pub const COMMANDS: [Command; 7] = [
    Command::Variance,
    Command::JcSweep,
    Command::Wigner,
    Command::Homodyne,
    Command::PhaseScan,
    Command::Budget,
    Command::WindowSweep,
];

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// Float that also accepts `inf`.
    Extended,
    Count,
    Bool,
}

#[derive(Copy, Clone, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    /// `None`: optional without default.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind,
        default,
        help,
    }
}

const BETA: KeySpec = key("beta", Kind::Float, Some("0.5"), "|beta| of gamma|0> + beta|1>");
const PHI: KeySpec = key("phi", Kind::Float, Some("0"), "relative phase of beta (rad)");
const LO_PHASE: KeySpec = key(
    "lo-phase",
    Kind::Float,
    None,
    "LO phase (rad); default: squeezed quadrature",
);
const ETA: KeySpec = key("eta", Kind::Float, Some("1"), "total detection efficiency");
const SAMPLES: KeySpec = key("samples", Kind::Count, Some("100000"), "number of homodyne samples");
const COLLECTION: KeySpec = key("collection", Kind::Float, Some("0.94"), "collection efficiency");
const DETECTOR: KeySpec = key("detector", Kind::Float, Some("1"), "detector quantum efficiency");
const LIFETIME: KeySpec = key("lifetime-ns", Kind::Float, Some("230"), "upper-state lifetime (ns)");

const VARIANCE_KEYS: &[KeySpec] = &[BETA, PHI, LO_PHASE];
const JC_KEYS: &[KeySpec] = &[
    key(
        "theta",
        Kind::Float,
        Some("2.0943951023931953"),
        "atomic preparation angle theta in [0, 2pi)",
    ),
    key(
        "phi",
        Kind::Float,
        Some("1.5707963267948966"),
        "atomic preparation phase phi in [0, 2pi)",
    ),
    key("lambda", Kind::Float, Some("1"), "coupling lambda (1/time)"),
    key("omega", Kind::Float, Some("0"), "field frequency"),
    key("omega0", Kind::Float, None, "atomic frequency; default: resonant"),
    key("t-max", Kind::Float, Some("3.141592653589793"), "end of the time sweep"),
    key("steps", Kind::Count, Some("101"), "number of sweep points"),
];
const WIGNER_KEYS: &[KeySpec] = &[
    key(
        "beta",
        Kind::Float,
        Some("0.5773502691896258"),
        "|beta| of gamma|0> + beta|1>",
    ),
    PHI,
    ETA,
    key("half-width", Kind::Float, Some("3"), "grid covers [-w, w]^2"),
    key("res", Kind::Count, Some("201"), "points per axis"),
];
const HOMODYNE_KEYS: &[KeySpec] = &[
    BETA,
    PHI,
    LO_PHASE,
    ETA,
    SAMPLES,
    key("emit-samples", Kind::Bool, Some("false"), "write the raw samples"),
];
const PHASE_SCAN_KEYS: &[KeySpec] = &[
    BETA,
    PHI,
    ETA,
    SAMPLES,
    key("phases", Kind::Count, Some("16"), "number of LO phases in [0, 2pi)"),
];
const BUDGET_KEYS: &[KeySpec] = &[
    COLLECTION,
    DETECTOR,
    LIFETIME,
    key(
        "window-lifetimes",
        Kind::Extended,
        Some("5"),
        "LO window in lifetimes (inf allowed)",
    ),
    BETA,
    PHI,
    LO_PHASE,
    key(
        "claimed-linewidth-khz",
        Kind::Float,
        Some("700"),
        "quoted linewidth to check (kHz)",
    ),
];
const WINDOW_KEYS: &[KeySpec] = &[
    COLLECTION,
    DETECTOR,
    LIFETIME,
    BETA,
    PHI,
    key("window-from", Kind::Float, Some("0.5"), "first window (lifetimes)"),
    key("window-to", Kind::Float, Some("10"), "last window (lifetimes)"),
    key("window-steps", Kind::Count, Some("20"), "number of windows"),
];

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Variance => "variance",
            Command::JcSweep => "jc-sweep",
            Command::Wigner => "wigner",
            Command::Homodyne => "homodyne",
            Command::PhaseScan => "phase-scan",
            Command::Budget => "budget",
            Command::WindowSweep => "window-sweep",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        COMMANDS.into_iter().find(|c| c.name() == name)
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Variance => "Quadrature variance of a vacuum/one-photon superposition",
            Command::JcSweep => "Transient field variances of resonant Jaynes-Cummings evolution",
            Command::Wigner => "Wigner function of a superposition on a square grid",
            Command::Homodyne => "Monte-Carlo homodyne samples and variance estimate",
            Command::PhaseScan => "Estimated variance over a set of LO phases",
            Command::Budget => "Detection-efficiency budget and detected squeezing",
            Command::WindowSweep => "Mode overlap and detected squeezing versus LO window",
        }
    }

    pub fn keys(self) -> &'static [KeySpec] {
        match self {
            Command::Variance => VARIANCE_KEYS,
            Command::JcSweep => JC_KEYS,
            Command::Wigner => WIGNER_KEYS,
            Command::Homodyne => HOMODYNE_KEYS,
            Command::PhaseScan => PHASE_SCAN_KEYS,
            Command::Budget => BUDGET_KEYS,
            Command::WindowSweep => WINDOW_KEYS,
        }
    }

    pub fn stochastic(self) -> bool {
        matches!(self, Command::Homodyne | Command::PhaseScan)
    }

    pub fn default_format(self) -> Format {
        match self {
            Command::JcSweep | Command::Wigner | Command::PhaseScan | Command::WindowSweep => Format::Csv,
            Command::Variance | Command::Homodyne | Command::Budget => Format::Json,
        }
    }
}

/// Keys accepted in a config file besides the command's own.
pub const RUN_KEYS: [&str; 3] = ["seed", "format", "out"];

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Count(usize),
    Bool(bool),
}

impl Value {
    /// Canonical text, shortest round-trip for floats.
    pub fn render(self) -> String {
        match self {
            Value::Float(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.to_string(),
            Value::Float(x) => format!("{x:?}"),
            Value::Count(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: BTreeMap<&'static str, Value>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn float(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(Value::Float(x)) => *x,
            other => panic!("schema: {key} is not a float ({other:?})"),
        }
    }

    pub fn opt_float(&self, key: &str) -> Option<f64> {
        self.params.get(key).map(|_| self.float(key))
    }

    pub fn count(&self, key: &str) -> usize {
        match self.params.get(key) {
            Some(Value::Count(n)) => *n,
            other => panic!("schema: {key} is not a count ({other:?})"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.params.get(key) {
            Some(Value::Bool(b)) => *b,
            other => panic!("schema: {key} is not a bool ({other:?})"),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::param("seed", format!("--seed is required for {}", self.command.name())))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::param_unkeyed(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            )));
        };
        let (k, v) = (normalize_key(k.trim()), v.trim());
        if k.is_empty() {
            return Err(CliError::param_unkeyed(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        if map.insert(k.clone(), v.to_string()).is_some() {
            return Err(CliError::param(&k, format!("duplicate key `{k}` in config file")));
        }
    }
    Ok(map)
}

pub fn normalize_key(k: &str) -> String {
    k.replace('_', "-")
}

fn parse_value(spec: &KeySpec, raw: &str) -> Result<Value, CliError> {
    let bad = |what: &str| CliError::param(spec.name, format!("`{}` expects {what}, got `{raw}`", spec.name));
    match spec.kind {
        Kind::Float => raw
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Float)
            .ok_or_else(|| bad("a finite number")),
        Kind::Extended => raw
            .parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .map(Value::Float)
            .ok_or_else(|| bad("a number or inf")),
        Kind::Count => raw
            .parse::<usize>()
            .map(Value::Count)
            .map_err(|_| bad("a non-negative integer")),
        Kind::Bool => raw.parse::<bool>().map(Value::Bool).map_err(|_| bad("true or false")),
    }
}

/// Merges file values with flag values (flags win) and types every key.
pub fn resolve(
    command: Command,
    file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
) -> Result<RunConfig, CliError> {
    let mut merged = file;
    for key in merged.keys() {
        if !RUN_KEYS.contains(&key.as_str()) && !command.keys().iter().any(|s| s.name == key) {
            return Err(CliError::param(
                key,
                format!("unknown key `{key}` for {}", command.name()),
            ));
        }
    }
    merged.extend(flags);

    let mut params = BTreeMap::new();
    for spec in command.keys() {
        let raw = merged.get(spec.name).map(String::as_str).or(spec.default);
        if let Some(raw) = raw {
            params.insert(spec.name, parse_value(spec, raw)?);
        }
    }
    let seed = merged
        .get("seed")
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| CliError::param("seed", format!("`seed` expects a 64-bit unsigned integer, got `{s}`")))
        })
        .transpose()?;
    if command.stochastic() && seed.is_none() {
        return Err(CliError::param(
            "seed",
            format!("--seed is required for {}", command.name()),
        ));
    }
    let format = match merged.get("format").map(String::as_str) {
        None => command.default_format(),
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => {
            return Err(CliError::param(
                "format",
                format!("`format` expects csv or json, got `{other}`"),
            ))
        }
    };
    Ok(RunConfig {
        command,
        params,
        seed,
        output_path: merged.get("out").map(PathBuf::from),
        format,
    })
}
