//! Flat `section.key = value` configuration files.
//!
//! Every key has a default, so an empty file is a complete configuration.
//! `#` starts a comment. Lists are comma separated. Keys may appear at most once.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use qndsim_core::protocol::ReflectionModel;
use qndsim_core::{ExperimentConfig, InputKind, RunMode, SorterInput};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy)]
enum Range {
    Unit,
    Positive,
    NonNegative,
    Finite,
    /// > 0, `inf` allowed.
    PositiveOrInf,
}

impl Range {
    fn check(self, x: f64) -> Result<(), &'static str> {
        let ok = match self {
            Range::Unit => (0.0..=1.0).contains(&x),
            Range::Positive => x.is_finite() && x > 0.0,
            Range::NonNegative => x.is_finite() && x >= 0.0,
            Range::Finite => x.is_finite(),
            Range::PositiveOrInf => x > 0.0,
        };
        if ok {
            return Ok(());
        }
        Err(match self {
            Range::Unit => "[0, 1]",
            Range::Positive => "> 0",
            Range::NonNegative => ">= 0",
            Range::Finite => "a finite number",
            Range::PositiveOrInf => "> 0 or inf",
        })
    }
}

type Get = fn(&ExperimentConfig) -> f64;
type Set = fn(&mut ExperimentConfig, f64);

struct FloatField {
    key: &'static str,
    range: Range,
    get: Get,
    set: Set,
}

macro_rules! float_fields {
    ($($key:literal, $range:ident, $($path:ident).+;)*) => {
        &[$(FloatField {
            key: $key,
            range: Range::$range,
            get: |c| c.$($path).+,
            set: |c, v| c.$($path).+ = v,
        }),*]
    };
}

const FLOATS: &[FloatField] = float_fields! {
    "node1.g", Positive, node1.cqed.g;
    "node1.kappa", Positive, node1.cqed.kappa;
    "node1.kappa_r", Positive, node1.cqed.kappa_r;
    "node1.gamma", Positive, node1.cqed.gamma;
    "node1.delta_c", Finite, node1.cqed.delta_c;
    "node1.delta_a", Finite, node1.cqed.delta_a;
    "node1.dark_count", Unit, node1.imperfections.dark_count;
    "node1.t_coherence", PositiveOrInf, node1.imperfections.t_coherence;
    "node1.prep_fidelity", Unit, node1.imperfections.prep_fidelity;
    "node1.readout_fidelity", Unit, node1.imperfections.readout_fidelity;
    "node1.protocol_window", NonNegative, node1.imperfections.protocol_window;
    "node1.false_bright", Unit, node1.imperfections.false_bright;
    "node2.g", Positive, node2.cqed.g;
    "node2.kappa", Positive, node2.cqed.kappa;
    "node2.kappa_r", Positive, node2.cqed.kappa_r;
    "node2.gamma", Positive, node2.cqed.gamma;
    "node2.delta_c", Finite, node2.cqed.delta_c;
    "node2.delta_a", Finite, node2.cqed.delta_a;
    "node2.dark_count", Unit, node2.imperfections.dark_count;
    "node2.t_coherence", PositiveOrInf, node2.imperfections.t_coherence;
    "node2.prep_fidelity", Unit, node2.imperfections.prep_fidelity;
    "node2.readout_fidelity", Unit, node2.imperfections.readout_fidelity;
    "node2.protocol_window", NonNegative, node2.imperfections.protocol_window;
    "node2.false_bright", Unit, node2.imperfections.false_bright;
    "channel.transmission", Unit, channel.transmission;
    "channel.depolarization", Unit, channel.depolarization;
    "channel.birefringence_residual", Unit, channel.birefringence_residual;
    "detection.efficiency", Unit, detection_efficiency;
    "table1.mu", NonNegative, table1_mu;
    "sorter.g", Positive, sorter.cavity.g;
    "sorter.kappa", Positive, sorter.cavity.kappa;
    "sorter.kappa_r", Positive, sorter.cavity.kappa_r;
    "sorter.gamma", Positive, sorter.cavity.gamma;
    "sorter.delta_c", Finite, sorter.cavity.delta_c;
    "sorter.delta_a", Finite, sorter.cavity.delta_a;
    "sorter.transmission", Unit, sorter.transmission;
    "sorter.readout_fidelity", Unit, sorter.readout_fidelity;
};

// Detector fields live in an array, which the path macro cannot index.
const DETECTOR_KEYS: [&str; 2] = ["hbt_a", "hbt_b"];
const DETECTOR_FIELDS: [(&str, Range); 3] = [
    ("efficiency", Range::Unit),
    ("dark_rate", Range::NonNegative),
    ("gate_window", Range::Positive),
];

fn detector_slot<'a>(c: &'a mut ExperimentConfig, det: usize, field: &str) -> &'a mut f64 {
    let d = &mut c.detectors[det];
    match field {
        "efficiency" => &mut d.efficiency,
        "dark_rate" => &mut d.dark_rate,
        _ => &mut d.gate_window,
    }
}

/// Keys whose meaning depends on other keys; resolved after the whole file is read.
#[derive(Default)]
struct Deferred {
    input_kind: Option<String>,
    input_photons: Option<usize>,
    sorter_input: Option<String>,
    sorter_mean: Option<f64>,
    sorter_max_photons: Option<usize>,
    sorter_photons: Option<usize>,
}

const OTHER_KEYS: &[&str] = &[
    "node1.reflection",
    "node2.reflection",
    "sweep.mu",
    "input.kind",
    "input.photons",
    "run.mode",
    "run.trials",
    "run.seed",
    "sorter.k",
    "sorter.input",
    "sorter.mean",
    "sorter.max_photons",
    "sorter.photons",
    "sorter.realistic",
    "sorter.confusion_max_n",
];

/// Every accepted key.
pub fn known_keys() -> Vec<String> {
    let mut keys: Vec<String> = FLOATS.iter().map(|f| f.key.to_string()).collect();
    for d in DETECTOR_KEYS {
        for (f, _) in DETECTOR_FIELDS {
            keys.push(format!("{d}.{f}"));
        }
    }
    keys.extend(OTHER_KEYS.iter().map(|k| k.to_string()));
    keys
}

fn parse_float(line: usize, key: &str, raw: &str) -> Result<f64, ConfigError> {
    raw.parse::<f64>()
        .ok()
        .filter(|x| !x.is_nan())
        .ok_or_else(|| ConfigError::at(line, format!("{key}: expected a number, got `{raw}`")))
}

fn parse_uint(line: usize, key: &str, raw: &str) -> Result<u64, ConfigError> {
    raw.parse::<u64>()
        .map_err(|_| ConfigError::at(line, format!("{key}: expected a non-negative integer, got `{raw}`")))
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::at(line, format!("{key}: expected true or false, got `{raw}`"))),
    }
}

fn choice<'a>(line: usize, key: &str, raw: &'a str, options: &[&str]) -> Result<&'a str, ConfigError> {
    if options.contains(&raw) {
        Ok(raw)
    } else {
        Err(ConfigError::at(
            line,
            format!("{key}: expected one of {}, got `{raw}`", options.join(", ")),
        ))
    }
}

fn out_of_range(line: usize, key: &str, value: f64, expected: &str) -> ConfigError {
    ConfigError::at(line, format!("{key} = {value} is out of range (expected {expected})"))
}

fn set_other(
    cfg: &mut ExperimentConfig,
    deferred: &mut Deferred,
    line: usize,
    key: &str,
    raw: &str,
) -> Result<(), ConfigError> {
    match key {
        "node1.reflection" | "node2.reflection" => {
            let model = match choice(line, key, raw, &["cqed", "ideal", "mirror"])? {
                "cqed" => ReflectionModel::Cqed,
                "ideal" => ReflectionModel::Ideal,
                _ => ReflectionModel::Mirror,
            };
            if key == "node1.reflection" {
                cfg.node1.reflection = model;
            } else {
                cfg.node2.reflection = model;
            }
        }
        "sweep.mu" => {
            let values = raw
                .split(',')
                .map(|s| parse_float(line, key, s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(&bad) = values.iter().find(|&&x| !(x.is_finite() && x >= 0.0)) {
                return Err(out_of_range(line, key, bad, ">= 0"));
            }
            cfg.mean_photon_sweep = values;
        }
        "input.kind" => deferred.input_kind = Some(choice(line, key, raw, &["coherent", "fock"])?.into()),
        "input.photons" => deferred.input_photons = Some(parse_uint(line, key, raw)? as usize),
        "run.mode" => {
            cfg.mode = match choice(line, key, raw, &["exact", "mc"])? {
                "exact" => RunMode::Exact,
                _ => RunMode::MonteCarlo,
            }
        }
        "run.trials" => cfg.trials = parse_uint(line, key, raw)?,
        "run.seed" => cfg.seed = parse_uint(line, key, raw)?,
        "sorter.k" => cfg.sorter.k = parse_uint(line, key, raw)? as usize,
        "sorter.input" => {
            deferred.sorter_input = Some(choice(line, key, raw, &["coherent", "truncated", "fock"])?.into())
        }
        "sorter.mean" => {
            let x = parse_float(line, key, raw)?;
            Range::NonNegative.check(x).map_err(|e| out_of_range(line, key, x, e))?;
            deferred.sorter_mean = Some(x);
        }
        "sorter.max_photons" => deferred.sorter_max_photons = Some(parse_uint(line, key, raw)? as usize),
        "sorter.photons" => deferred.sorter_photons = Some(parse_uint(line, key, raw)? as usize),
        "sorter.realistic" => cfg.sorter.realistic = parse_bool(line, key, raw)?,
        "sorter.confusion_max_n" => cfg.sorter.confusion_max_n = parse_uint(line, key, raw)? as usize,
        _ => unreachable!("key list and setter out of sync: {key}"),
    }
    Ok(())
}

fn resolve(cfg: &mut ExperimentConfig, d: Deferred) {
    let photons = d.input_photons;
    cfg.input_kind = match d.input_kind.as_deref() {
        Some("fock") => InputKind::Fock(photons.unwrap_or(1)),
        Some(_) => InputKind::Coherent,
        None => match (cfg.input_kind, photons) {
            (InputKind::Fock(_), Some(n)) => InputKind::Fock(n),
            (k, _) => k,
        },
    };

    let (mean, max_photons, fock) = match cfg.sorter.input {
        SorterInput::Coherent { mean } => (mean, 3, 1),
        SorterInput::TruncatedCoherent { mean, max_photons } => (mean, max_photons, 1),
        SorterInput::Fock(n) => (0.5, 3, n),
    };
    let mean = d.sorter_mean.unwrap_or(mean);
    let max_photons = d.sorter_max_photons.unwrap_or(max_photons);
    let fock = d.sorter_photons.unwrap_or(fock);
    let kind = match d.sorter_input.as_deref() {
        Some(k) => k,
        None => match cfg.sorter.input {
            SorterInput::Coherent { .. } => "coherent",
            SorterInput::TruncatedCoherent { .. } => "truncated",
            SorterInput::Fock(_) => "fock",
        },
    };
    cfg.sorter.input = match kind {
        "coherent" => SorterInput::Coherent { mean },
        "truncated" => SorterInput::TruncatedCoherent { mean, max_photons },
        _ => SorterInput::Fock(fock),
    };
}

/// Parse configuration text. Physics validation runs after all keys are read.
pub fn parse_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut deferred = Deferred::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let floats: HashMap<&str, &FloatField> = FLOATS.iter().map(|f| (f.key, f)).collect();

    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `section.key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("{key}: missing value")));
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(ConfigError::at(line, format!("{key} already set on line {first}")));
        }

        if let Some(f) = floats.get(key) {
            let x = parse_float(line, key, value)?;
            f.range.check(x).map_err(|e| out_of_range(line, key, x, e))?;
            (f.set)(&mut cfg, x);
            continue;
        }
        if let Some((det, field)) = key.split_once('.').and_then(|(s, f)| {
            let det = DETECTOR_KEYS.iter().position(|&d| d == s)?;
            let (_, range) = DETECTOR_FIELDS.iter().find(|(n, _)| *n == f)?;
            Some((det, (f, *range)))
        }) {
            let x = parse_float(line, key, value)?;
            field.1.check(x).map_err(|e| out_of_range(line, key, x, e))?;
            *detector_slot(&mut cfg, det, field.0) = x;
            continue;
        }
        if OTHER_KEYS.contains(&key) {
            set_other(&mut cfg, &mut deferred, line, key, value)?;
            continue;
        }
        return Err(ConfigError::at(line, format!("unknown key `{key}`")));
    }

    resolve(&mut cfg, deferred);
    cfg.validate().map_err(|e| ConfigError::global(e.to_string()))?;
    cfg.sorter.validate().map_err(|e| ConfigError::global(format!("sorter: {e}")))?;
    Ok(cfg)
}

pub fn parse_file(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| ConfigError::global(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| ConfigError::global(format!("{}: not UTF-8", path.display())))?;
    parse_str(&text)
}

/// Every key with its value; `parse_str(&serialize(c)) == c` for valid configs.
const SECTION_ORDER: [&str; 11] = [
    "node1", "node2", "channel", "detection", "hbt_a", "hbt_b", "sweep", "input", "table1", "run", "sorter",
];

pub fn serialize(cfg: &ExperimentConfig) -> String {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut push = |key: &str, value: String| pairs.push((key.to_string(), value));

    for f in FLOATS.iter().filter(|f| !f.key.starts_with("sorter.")) {
        push(f.key, (f.get)(cfg).to_string());
    }
    for (n, node) in [(1, &cfg.node1), (2, &cfg.node2)] {
        let model = match node.reflection {
            ReflectionModel::Cqed => "cqed",
            ReflectionModel::Ideal => "ideal",
            ReflectionModel::Mirror => "mirror",
        };
        push(&format!("node{n}.reflection"), model.into());
    }
    for (det, name) in DETECTOR_KEYS.iter().enumerate() {
        let d = &cfg.detectors[det];
        push(&format!("{name}.efficiency"), d.efficiency.to_string());
        push(&format!("{name}.dark_rate"), d.dark_rate.to_string());
        push(&format!("{name}.gate_window"), d.gate_window.to_string());
    }
    let mu: Vec<String> = cfg.mean_photon_sweep.iter().map(f64::to_string).collect();
    push("sweep.mu", mu.join(", "));
    let (kind, photons) = match cfg.input_kind {
        InputKind::Coherent => ("coherent", 1),
        InputKind::Fock(n) => ("fock", n),
    };
    push("input.kind", kind.into());
    push("input.photons", photons.to_string());
    let mode = match cfg.mode {
        RunMode::Exact => "exact",
        RunMode::MonteCarlo => "mc",
    };
    push("run.mode", mode.into());
    push("run.trials", cfg.trials.to_string());
    push("run.seed", cfg.seed.to_string());

    let s = &cfg.sorter;
    push("sorter.k", s.k.to_string());
    let (input, mean, max_photons, photons) = match s.input {
        SorterInput::Coherent { mean } => ("coherent", mean, 3, 1),
        SorterInput::TruncatedCoherent { mean, max_photons } => ("truncated", mean, max_photons, 1),
        SorterInput::Fock(n) => ("fock", 0.5, 3, n),
    };
    push("sorter.input", input.into());
    push("sorter.mean", mean.to_string());
    push("sorter.max_photons", max_photons.to_string());
    push("sorter.photons", photons.to_string());
    push("sorter.realistic", s.realistic.to_string());
    for f in FLOATS.iter().filter(|f| f.key.starts_with("sorter.")) {
        push(f.key, (f.get)(cfg).to_string());
    }
    push("sorter.confusion_max_n", s.confusion_max_n.to_string());

    let section = |key: &str| key.split('.').next().unwrap_or("").to_string();
    let order: Vec<String> = SECTION_ORDER.iter().map(|s| s.to_string()).collect();
    pairs.sort_by_key(|(k, _)| order.iter().position(|s| *s == section(k)).unwrap_or(order.len()));

    let mut out = String::from("# qndsim resolved configuration\n");
    let mut current = String::new();
    for (key, value) in &pairs {
        if section(key) != current {
            out.push('\n');
            current = section(key);
        }
        out.push_str(&format!("{key} = {value}\n"));
    }
    out
}
