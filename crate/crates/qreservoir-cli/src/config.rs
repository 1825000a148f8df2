//! Experiment configuration: a flat key=value file merged with command-line
//! overrides (later wins), validated into a typed description of exactly one
//! experiment. Every mode declares which keys it needs and which it accepts;
//! anything else present is rejected before computation starts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex;

use crate::error::CliError;

/// The six things a single invocation can do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Predict,
    Tune,
    ScanAmplitude,
    Qfi,
    Wigner,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, CliError> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "predict" => Ok(Mode::Predict),
            "tune" => Ok(Mode::Tune),
            "scan-amplitude" => Ok(Mode::ScanAmplitude),
            "qfi" => Ok(Mode::Qfi),
            "wigner" => Ok(Mode::Wigner),
            other => Err(CliError::validation(format!(
                "unknown mode \"{other}\": expected simulate, predict, tune, scan-amplitude, qfi, or wigner"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Predict => "predict",
            Mode::Tune => "tune",
            Mode::ScanAmplitude => "scan-amplitude",
            Mode::Qfi => "qfi",
            Mode::Wigner => "wigner",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw key=value pairs in insertion-independent order. Within a file a
/// repeated key keeps its last value, and overrides applied afterwards win
/// over the file.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads a config file: one `key = value` per line, blank lines and
    /// `#` comments ignored.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let mut raw = RawConfig::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!(
                    "config {} line {}: expected key=value, got \"{line}\"",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::validation(format!(
                    "config {} line {}: empty key",
                    path.display(),
                    lineno + 1
                )));
            }
            raw.set(key, value.trim());
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// How the oscillator starts before the stream is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Vacuum,
    Fock(usize),
    Coherent(Complex<f64>),
}

/// Qubit-pair description, one of the four supported families.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSpec {
    Custom { beta_gg: Complex<f64>, beta_ge: Complex<f64>, beta_eg: Complex<f64>, beta_ee: Complex<f64>, normalize: bool },
    Product { first: [Complex<f64>; 2], second: [Complex<f64>; 2] },
    Alternating { u: f64 },
    Identical { u: f64, chi: f64 },
}

/// Oscillator target in displacement and squeeze parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub alpha: Complex<f64>,
    pub r: f64,
    pub phi_r: f64,
}

/// Rectangular phase-space grid for quasiprobability output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

/// A fully validated experiment description. Only the fields meaningful for
/// `mode` are populated; everything else is None or its default.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dim: usize,
    pub theta: f64,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub steps: usize,
    pub record_every: usize,
    pub initial: Initial,
    pub pair: Option<PairSpec>,
    pub target: Option<TargetSpec>,
    pub epsilon_budget: Option<f64>,
    pub epsilon: Option<f64>,
    pub mu: Option<f64>,
    pub resolution: usize,
    pub repetitions: usize,
    pub grid: Option<GridSpec>,
}

pub const DEFAULT_DIM: usize = 60;
pub const DEFAULT_THETA: f64 = 0.05;
pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_RECORD_EVERY: usize = 25;
pub const DEFAULT_RESOLUTION: usize = 256;

/// Keys every mode accepts.
const GLOBAL_KEYS: &[&str] = &["mode", "dim", "theta", "seed"];

const PAIR_KEYS: &[&str] = &[
    "pair.family",
    "pair.beta_gg",
    "pair.beta_ge",
    "pair.beta_eg",
    "pair.beta_ee",
    "pair.normalize",
    "pair.u",
    "pair.chi",
    "pair.first_g",
    "pair.first_e",
    "pair.second_g",
    "pair.second_e",
];

const TARGET_KEYS: &[&str] = &["target.alpha", "target.r", "target.phi_r"];

const GRID_KEYS: &[&str] =
    &["grid.x_min", "grid.x_max", "grid.nx", "grid.p_min", "grid.p_max", "grid.np"];

fn allowed_keys(mode: Mode) -> Vec<&'static str> {
    let mut keys: Vec<&'static str> = GLOBAL_KEYS.to_vec();
    match mode {
        Mode::Simulate => {
            keys.extend_from_slice(&["out", "steps", "record_every", "initial"]);
            keys.extend_from_slice(PAIR_KEYS);
        }
        Mode::Predict => keys.extend_from_slice(PAIR_KEYS),
        Mode::Tune => {
            keys.extend_from_slice(TARGET_KEYS);
            keys.push("epsilon_budget");
        }
        Mode::ScanAmplitude => keys.extend_from_slice(&["epsilon", "mu", "resolution"]),
        Mode::Qfi => {
            keys.push("repetitions");
            keys.extend_from_slice(PAIR_KEYS);
        }
        Mode::Wigner => {
            keys.push("out");
            keys.extend_from_slice(GRID_KEYS);
            keys.extend_from_slice(TARGET_KEYS);
            keys.extend_from_slice(PAIR_KEYS);
        }
    }
    keys
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .parse()
        .map_err(|_| CliError::validation(format!("key {key}: expected a real number, got \"{s}\"")))?;
    if !v.is_finite() {
        return Err(CliError::validation(format!("key {key}: value must be finite, got \"{s}\"")));
    }
    Ok(v)
}

fn parse_usize(key: &str, s: &str) -> Result<usize, CliError> {
    s.parse().map_err(|_| {
        CliError::validation(format!("key {key}: expected a non-negative integer, got \"{s}\""))
    })
}

fn parse_u64(key: &str, s: &str) -> Result<u64, CliError> {
    s.parse().map_err(|_| {
        CliError::validation(format!("key {key}: expected a non-negative integer, got \"{s}\""))
    })
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::validation(format!("key {key}: expected true or false, got \"{s}\""))),
    }
}

/// Parses the complex literal syntax `re+imi`, e.g. `0.5+0.25i`, `-1.2`,
/// `0.3i`, `1e-3-2e-4i`. A `+`/`-` inside an exponent does not split.
pub fn parse_complex(key: &str, s: &str) -> Result<Complex<f64>, CliError> {
    let bad = || {
        CliError::validation(format!(
            "key {key}: expected a complex number like 1.5, 0.3i, or 0.5+0.25i, got \"{s}\""
        ))
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let parse_part = |part: &str| -> Result<f64, CliError> {
        let v: f64 = part.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(v)
    };
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        if body.is_empty() {
            return Err(bad());
        }
        // Find the sign separating the real part from the imaginary part.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let b = bytes[k];
            if (b == b'+' || b == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re = parse_part(&body[..k])?;
                let im = parse_part(&body[k..])?;
                Ok(Complex::new(re, im))
            }
            None => Ok(Complex::new(0.0, parse_part(body)?)),
        }
    } else {
        Ok(Complex::new(parse_part(t)?, 0.0))
    }
}

/// Inverse of [`parse_complex`]: shortest decimal form that re-parses to the
/// same bits.
pub fn format_complex(z: Complex<f64>) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn parse_initial(key: &str, s: &str) -> Result<Initial, CliError> {
    if s == "vacuum" {
        return Ok(Initial::Vacuum);
    }
    if let Some(n) = s.strip_prefix("fock:") {
        return Ok(Initial::Fock(parse_usize(key, n)?));
    }
    if let Some(z) = s.strip_prefix("coherent:") {
        return Ok(Initial::Coherent(parse_complex(key, z)?));
    }
    Err(CliError::validation(format!(
        "key {key}: expected vacuum, fock:N, or coherent:Z, got \"{s}\""
    )))
}

fn require<'a>(raw: &'a RawConfig, mode: Mode, key: &str) -> Result<&'a str, CliError> {
    raw.get(key)
        .ok_or_else(|| CliError::validation(format!("mode {mode} requires key {key}")))
}

fn pair_family_keys(family: &str) -> &'static [&'static str] {
    match family {
        "custom" => &["pair.beta_gg", "pair.beta_ge", "pair.beta_eg", "pair.beta_ee", "pair.normalize"],
        "product" => &["pair.first_g", "pair.first_e", "pair.second_g", "pair.second_e"],
        "alternating" => &["pair.u"],
        "identical" => &["pair.u", "pair.chi"],
        _ => &[],
    }
}

/// Builds a pair description from the `pair.*` keys, or None when the config
/// carries no pair at all. Keys from a different family than the declared one
/// are rejected so a typo cannot silently lose a parameter.
fn build_pair(raw: &RawConfig, mode: Mode) -> Result<Option<PairSpec>, CliError> {
    let present: Vec<&str> = raw.keys().filter(|k| k.starts_with("pair.")).collect();
    if present.is_empty() {
        return Ok(None);
    }
    let family = raw.get("pair.family").ok_or_else(|| {
        CliError::validation(format!(
            "mode {mode}: pair.* keys are present but pair.family is missing (custom, product, alternating, or identical)"
        ))
    })?;
    let allowed = pair_family_keys(family);
    if allowed.is_empty() {
        return Err(CliError::validation(format!(
            "key pair.family: expected custom, product, alternating, or identical, got \"{family}\""
        )));
    }
    for key in &present {
        if *key != "pair.family" && !allowed.contains(key) {
            return Err(CliError::validation(format!(
                "key {key} does not belong to pair family {family}"
            )));
        }
    }
    let spec = match family {
        "custom" => PairSpec::Custom {
            beta_gg: parse_complex("pair.beta_gg", require(raw, mode, "pair.beta_gg")?)?,
            beta_ge: parse_complex("pair.beta_ge", require(raw, mode, "pair.beta_ge")?)?,
            beta_eg: parse_complex("pair.beta_eg", require(raw, mode, "pair.beta_eg")?)?,
            beta_ee: parse_complex("pair.beta_ee", require(raw, mode, "pair.beta_ee")?)?,
            normalize: match raw.get("pair.normalize") {
                Some(s) => parse_bool("pair.normalize", s)?,
                None => false,
            },
        },
        "product" => PairSpec::Product {
            first: [
                parse_complex("pair.first_g", require(raw, mode, "pair.first_g")?)?,
                parse_complex("pair.first_e", require(raw, mode, "pair.first_e")?)?,
            ],
            second: [
                parse_complex("pair.second_g", require(raw, mode, "pair.second_g")?)?,
                parse_complex("pair.second_e", require(raw, mode, "pair.second_e")?)?,
            ],
        },
        "alternating" => PairSpec::Alternating { u: parse_f64("pair.u", require(raw, mode, "pair.u")?)? },
        "identical" => PairSpec::Identical {
            u: parse_f64("pair.u", require(raw, mode, "pair.u")?)?,
            chi: match raw.get("pair.chi") {
                Some(s) => parse_f64("pair.chi", s)?,
                None => 0.0,
            },
        },
        _ => unreachable!(),
    };
    Ok(Some(spec))
}

fn build_target(raw: &RawConfig, mode: Mode) -> Result<Option<TargetSpec>, CliError> {
    let present = TARGET_KEYS.iter().any(|k| raw.get(k).is_some());
    if !present {
        return Ok(None);
    }
    Ok(Some(TargetSpec {
        alpha: parse_complex("target.alpha", require(raw, mode, "target.alpha")?)?,
        r: match raw.get("target.r") {
            Some(s) => parse_f64("target.r", s)?,
            None => 0.0,
        },
        phi_r: match raw.get("target.phi_r") {
            Some(s) => parse_f64("target.phi_r", s)?,
            None => 0.0,
        },
    }))
}

fn build_grid(raw: &RawConfig, mode: Mode) -> Result<GridSpec, CliError> {
    let grid = GridSpec {
        x_min: parse_f64("grid.x_min", require(raw, mode, "grid.x_min")?)?,
        x_max: parse_f64("grid.x_max", require(raw, mode, "grid.x_max")?)?,
        nx: parse_usize("grid.nx", require(raw, mode, "grid.nx")?)?,
        p_min: parse_f64("grid.p_min", require(raw, mode, "grid.p_min")?)?,
        p_max: parse_f64("grid.p_max", require(raw, mode, "grid.p_max")?)?,
        np: parse_usize("grid.np", require(raw, mode, "grid.np")?)?,
    };
    if grid.nx < 2 || grid.np < 2 {
        return Err(CliError::validation("grid.nx and grid.np must be at least 2"));
    }
    if !(grid.x_min < grid.x_max) || !(grid.p_min < grid.p_max) {
        return Err(CliError::validation(
            "grid bounds must satisfy x_min < x_max and p_min < p_max",
        ));
    }
    Ok(grid)
}

impl ExperimentConfig {
    /// Validates the merged raw map into a typed config for exactly one mode.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let mode = Mode::parse(
            raw.get("mode")
                .ok_or_else(|| CliError::validation("missing key mode (use --mode or a config file)"))?,
        )?;

        let allowed = allowed_keys(mode);
        for key in raw.keys() {
            if !allowed.contains(&key) {
                return Err(CliError::validation(format!(
                    "key {key} is not accepted by mode {mode}"
                )));
            }
        }

        let dim = match raw.get("dim") {
            Some(s) => parse_usize("dim", s)?,
            None => DEFAULT_DIM,
        };
        if dim < 2 {
            return Err(CliError::validation(format!("dim must be at least 2, got {dim}")));
        }
        let theta = match raw.get("theta") {
            Some(s) => parse_f64("theta", s)?,
            None => DEFAULT_THETA,
        };
        if theta <= 0.0 {
            return Err(CliError::validation(format!("theta must be positive, got {theta}")));
        }
        let seed = match raw.get("seed") {
            Some(s) => Some(parse_u64("seed", s)?),
            None => None,
        };

        let mut config = ExperimentConfig {
            mode,
            dim,
            theta,
            seed,
            out: raw.get("out").map(PathBuf::from),
            steps: DEFAULT_STEPS,
            record_every: DEFAULT_RECORD_EVERY,
            initial: Initial::Vacuum,
            pair: None,
            target: None,
            epsilon_budget: None,
            epsilon: None,
            mu: None,
            resolution: DEFAULT_RESOLUTION,
            repetitions: 1,
            grid: None,
        };

        match mode {
            Mode::Simulate => {
                if let Some(s) = raw.get("steps") {
                    config.steps = parse_usize("steps", s)?;
                }
                if config.steps == 0 {
                    return Err(CliError::validation("steps must be at least 1"));
                }
                if let Some(s) = raw.get("record_every") {
                    config.record_every = parse_usize("record_every", s)?;
                }
                if config.record_every == 0 {
                    return Err(CliError::validation("record_every must be at least 1"));
                }
                if let Some(s) = raw.get("initial") {
                    config.initial = parse_initial("initial", s)?;
                }
                config.pair = Some(build_pair(raw, mode)?.ok_or_else(|| {
                    CliError::validation("mode simulate requires a pair.* block")
                })?);
                if config.out.is_none() {
                    return Err(CliError::validation("mode simulate requires key out"));
                }
            }
            Mode::Predict => {
                config.pair = Some(build_pair(raw, mode)?.ok_or_else(|| {
                    CliError::validation("mode predict requires a pair.* block")
                })?);
            }
            Mode::Tune => {
                config.target = Some(build_target(raw, mode)?.ok_or_else(|| {
                    CliError::validation("mode tune requires target.alpha (and optionally target.r, target.phi_r)")
                })?);
                config.epsilon_budget =
                    Some(parse_f64("epsilon_budget", require(raw, mode, "epsilon_budget")?)?);
            }
            Mode::ScanAmplitude => {
                config.epsilon = Some(parse_f64("epsilon", require(raw, mode, "epsilon")?)?);
                config.mu = Some(parse_f64("mu", require(raw, mode, "mu")?)?);
                if let Some(s) = raw.get("resolution") {
                    config.resolution = parse_usize("resolution", s)?;
                }
            }
            Mode::Qfi => {
                if let Some(s) = raw.get("repetitions") {
                    config.repetitions = parse_usize("repetitions", s)?;
                }
                if config.repetitions == 0 {
                    return Err(CliError::validation("repetitions must be at least 1"));
                }
                config.pair = Some(build_pair(raw, mode)?.ok_or_else(|| {
                    CliError::validation("mode qfi requires a pair.* block")
                })?);
            }
            Mode::Wigner => {
                config.grid = Some(build_grid(raw, mode)?);
                config.target = build_target(raw, mode)?;
                config.pair = build_pair(raw, mode)?;
                match (&config.target, &config.pair) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::validation(
                            "mode wigner takes either target.* or pair.*, not both",
                        ))
                    }
                    (None, None) => {
                        return Err(CliError::validation(
                            "mode wigner requires either target.* or pair.* to pick a state",
                        ))
                    }
                    _ => {}
                }
                if config.out.is_none() {
                    return Err(CliError::validation("mode wigner requires key out"));
                }
            }
        }
        Ok(config)
    }
}
