//! Run configuration: a sectioned `key = value` text format.
//!
//! ```text
//! [case]
//! id = "sod"
//!
//! [mesh]
//! elements = [64]
//! periodic = [false]
//! ```
//!
//! Values are numbers, `true`/`false`, strings (quoted or bare) and
//! bracketed comma-separated lists. `#` starts a comment outside quotes.
//! Every key left out takes the default of the selected case.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::blending::{IndicatorVariable, DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_MIN, DEFAULT_SHARPNESS};
use crate::operator::MAX_DEGREE;
use crate::physics::Gas;

/// Environment variable overriding the worker thread count.
pub const ENV_THREADS: &str = "DGFV_THREADS";
/// Environment variable overriding the output directory.
pub const ENV_OUTPUT_DIR: &str = "DGFV_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Freestream,
    Sod,
    Vortex,
    WallSweep,
    Scaling,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [
        CaseId::Freestream,
        CaseId::Sod,
        CaseId::Vortex,
        CaseId::WallSweep,
        CaseId::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Freestream => "freestream",
            CaseId::Sod => "sod",
            CaseId::Vortex => "vortex",
            CaseId::WallSweep => "wall-sweep",
            CaseId::Scaling => "scaling",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CaseId::Freestream => "uniform flow on a periodic 2D mesh; must stay constant to round-off",
            CaseId::Sod => "1D Sod shock tube on [0, 1] with the jump at x = 0.5",
            CaseId::Vortex => "2D isentropic vortex advected through a periodic box",
            CaseId::WallSweep => "u+/y+ curves of Spalding's law with and without van Driest transform",
            CaseId::Scaling => "freestream strong-scaling campaign over mesh sizes and thread counts",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = CaseId::ALL.iter().map(|c| c.name()).collect();
                format!("unknown case `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub dims: usize,
    pub elements: [usize; 2],
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub periodic: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    Steps(usize),
    EndTime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeControl {
    pub cfl: f64,
    /// Fixed step size; `None` uses the CFL estimate every step.
    pub dt: Option<f64>,
    pub stop: StopRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlendingConfig {
    pub enabled: bool,
    pub sharpness: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub propagate: bool,
    pub variable: IndicatorVariable,
    /// Prescribed uniform FV weight, bypassing the indicator.
    pub fixed_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub state: String,
    pub diagnostics: String,
    pub perf: String,
    pub sweep: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    /// Total element counts of the 2D meshes.
    pub elements: Vec<usize>,
    pub cores: Vec<usize>,
}

/// Which temperature ratio feeds the edge form of the van Driest transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRecovery {
    /// `T_aw/T_e = 1 + (gamma-1)/2 Pr^(1/3) Ma^2`, consistent with the freestream form.
    Matched,
    /// The ratio as given by [`crate::wall::recovery_ratio`].
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WallSweepConfig {
    pub ma_inf: f64,
    /// Freestream velocity in viscous units, used to map transformed velocities back.
    pub u_inf_plus: f64,
    pub y_plus_min: f64,
    pub y_plus_max: f64,
    pub points: usize,
    pub edge_recovery: EdgeRecovery,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseId,
    pub mesh: MeshSpec,
    pub degree: usize,
    pub gas: Gas,
    pub time: TimeControl,
    pub blending: BlendingConfig,
    pub output: OutputConfig,
    /// Worker threads; `None` leaves the choice to the thread pool.
    pub threads: Option<usize>,
    pub repeats: usize,
    pub campaign: CampaignConfig,
    pub wall: WallSweepConfig,
}

impl RunConfig {
    /// Built-in defaults of `case`.
    pub fn defaults(case: CaseId) -> Self {
        let mesh_2d = |n: usize, lo: f64, hi: f64| MeshSpec {
            dims: 2,
            elements: [n, n],
            lower: [lo; 2],
            upper: [hi; 2],
            periodic: [true; 2],
        };
        let (mesh, degree, stop) = match case {
            CaseId::Freestream | CaseId::WallSweep => (mesh_2d(16, 0.0, 1.0), 7, StopRule::Steps(100)),
            CaseId::Scaling => (mesh_2d(32, 0.0, 1.0), 7, StopRule::Steps(100)),
            CaseId::Sod => (
                MeshSpec {
                    dims: 1,
                    elements: [64, 1],
                    lower: [0.0; 2],
                    upper: [1.0; 2],
                    periodic: [false, true],
                },
                4,
                StopRule::EndTime(0.2),
            ),
            CaseId::Vortex => (mesh_2d(16, -5.0, 5.0), 3, StopRule::EndTime(1.0)),
        };
        Self {
            case,
            mesh,
            degree,
            gas: Gas::default(),
            time: TimeControl {
                cfl: 0.5,
                dt: None,
                stop,
            },
            blending: BlendingConfig {
                enabled: true,
                sharpness: DEFAULT_SHARPNESS,
                alpha_min: DEFAULT_ALPHA_MIN,
                alpha_max: DEFAULT_ALPHA_MAX,
                propagate: true,
                variable: IndicatorVariable::DensityPressure,
                fixed_alpha: None,
            },
            output: OutputConfig {
                directory: PathBuf::from("."),
                state: format!("{case}_state.csv"),
                diagnostics: format!("{case}_diagnostics.csv"),
                perf: format!("{case}_perf.csv"),
                sweep: format!("{case}.csv"),
            },
            threads: None,
            repeats: if case == CaseId::Scaling { 5 } else { 1 },
            campaign: CampaignConfig {
                elements: vec![64, 256, 1024],
                cores: vec![1, 2, 4, 8],
            },
            wall: WallSweepConfig {
                ma_inf: 0.72,
                u_inf_plus: 25.0,
                y_plus_min: 0.1,
                y_plus_max: 1000.0,
                points: 200,
                edge_recovery: EdgeRecovery::Matched,
            },
        }
    }
}

/// One problem found while reading a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

/// Every problem found, in line order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    Quoted(String),
    List(Vec<Value>),
}

impl Value {
    fn describe(&self) -> String {
        match self {
            Value::Scalar(s) => s.clone(),
            Value::Quoted(s) => format!("\"{s}\""),
            Value::List(v) => format!("[{}]", v.iter().map(Value::describe).collect::<Vec<_>>().join(", ")),
        }
    }
}

/// Where a value came from; `line: None` marks a command-line override.
#[derive(Debug, Clone)]
struct Entry {
    line: Option<usize>,
    value: Value,
}

const KEYS: &[(&str, &[&str])] = &[
    ("case", &["id"]),
    ("mesh", &["dims", "elements", "lower", "upper", "periodic"]),
    ("solver", &["degree"]),
    ("gas", &["gamma", "prandtl"]),
    ("time", &["cfl", "dt", "steps", "end_time"]),
    (
        "blending",
        &["enabled", "sharpness", "alpha_min", "alpha_max", "propagate", "variable", "fixed_alpha"],
    ),
    ("output", &["directory", "state", "diagnostics", "perf", "sweep"]),
    ("run", &["threads", "repeats"]),
    ("campaign", &["elements", "cores"]),
    (
        "wall",
        &["ma_inf", "u_inf_plus", "y_plus_min", "y_plus_max", "points", "edge_recovery"],
    ),
];

fn known(section: &str, key: &str) -> bool {
    KEYS.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_value(raw: &str) -> Result<Value, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err("missing value".into());
    }
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return split_list(inner)?.iter().map(|s| parse_value(s)).collect::<Result<_, _>>().map(Value::List);
    }
    if let Some(inner) = raw.strip_prefix('"') {
        let inner = inner.strip_suffix('"').ok_or("unterminated string")?;
        let mut out = String::new();
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some(e @ ('\\' | '"')) => out.push(e),
                    Some(e) => return Err(format!("unknown escape `\\{e}`")),
                    None => return Err("dangling backslash".into()),
                },
                '"' => return Err("unescaped quote inside string".into()),
                c => out.push(c),
            }
        }
        return Ok(Value::Quoted(out));
    }
    Ok(Value::Scalar(raw.to_string()))
}

fn split_list(inner: &str) -> Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let mut quoted = false;
    let mut escaped = false;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '"' => quoted = !quoted,
            '[' | ']' if !quoted => return Err("nested lists are not supported".into()),
            ',' if !quoted => {
                parts.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if quoted {
        return Err("unterminated string".into());
    }
    parts.push(&inner[start..]);
    Ok(parts)
}

/// Reads the raw entries, reporting syntax errors, unknown keys and duplicates.
fn read_entries(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, Entry> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    // outer None: no header seen yet; inner None: the last header was invalid
    let mut section: Option<Option<String>> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        let err = |key: Option<String>, message: String| ConfigError {
            line: Some(line_no),
            key,
            message,
        };
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                errors.push(err(None, format!("malformed section header `{line}`")));
                section = Some(None);
                continue;
            };
            let name = name.trim();
            if KEYS.iter().any(|(s, _)| *s == name) {
                section = Some(Some(name.to_string()));
            } else {
                errors.push(err(None, format!("unknown section `[{name}]`")));
                section = Some(None);
            }
            continue;
        }
        let Some((key, raw_value)) = line.split_once('=') else {
            errors.push(err(None, format!("expected `key = value`, found `{line}`")));
            continue;
        };
        let key = key.trim();
        let sec = match &section {
            None => {
                errors.push(err(Some(key.to_string()), "key outside of any section".into()));
                continue;
            }
            // already reported with the header
            Some(None) => continue,
            Some(Some(sec)) => sec,
        };
        let full = format!("{sec}.{key}");
        if !known(sec, key) {
            errors.push(err(Some(full), "unknown key".into()));
            continue;
        }
        let value = match parse_value(raw_value) {
            Ok(v) => v,
            Err(m) => {
                errors.push(err(Some(full), m));
                continue;
            }
        };
        if let Some(previous) = entries.get(&full) {
            errors.push(err(
                Some(full.clone()),
                format!(
                    "duplicate key, first set on line {} and again on line {line_no}",
                    previous.line.unwrap_or(0)
                ),
            ));
            continue;
        }
        entries.insert(
            full,
            Entry {
                line: Some(line_no),
                value,
            },
        );
    }
    entries
}

trait FromValue: Sized {
    fn from_value(v: &Value) -> Result<Self, String>;
}

fn scalar_text(v: &Value) -> Result<&str, String> {
    match v {
        Value::Scalar(s) | Value::Quoted(s) => Ok(s),
        Value::List(_) => Err(format!("expected a single value, found list {}", v.describe())),
    }
}

impl FromValue for f64 {
    fn from_value(v: &Value) -> Result<Self, String> {
        let s = scalar_text(v)?;
        s.parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
            .and_then(|x| if x.is_finite() { Ok(x) } else { Err(format!("`{s}` is not finite")) })
    }
}

impl FromValue for usize {
    fn from_value(v: &Value) -> Result<Self, String> {
        let s = scalar_text(v)?;
        s.parse::<usize>().map_err(|_| format!("`{s}` is not a non-negative integer"))
    }
}

impl FromValue for bool {
    fn from_value(v: &Value) -> Result<Self, String> {
        match scalar_text(v)? {
            "true" => Ok(true),
            "false" => Ok(false),
            s => Err(format!("`{s}` is not `true` or `false`")),
        }
    }
}

impl FromValue for String {
    fn from_value(v: &Value) -> Result<Self, String> {
        scalar_text(v).map(str::to_string)
    }
}

impl FromValue for CaseId {
    fn from_value(v: &Value) -> Result<Self, String> {
        scalar_text(v)?.parse()
    }
}

impl FromValue for IndicatorVariable {
    fn from_value(v: &Value) -> Result<Self, String> {
        match scalar_text(v)? {
            "density_pressure" => Ok(IndicatorVariable::DensityPressure),
            "density" => Ok(IndicatorVariable::Density),
            "pressure" => Ok(IndicatorVariable::Pressure),
            s => Err(format!("unknown indicator variable `{s}` (density_pressure, density, pressure)")),
        }
    }
}

impl FromValue for EdgeRecovery {
    fn from_value(v: &Value) -> Result<Self, String> {
        match scalar_text(v)? {
            "matched" => Ok(EdgeRecovery::Matched),
            "printed" => Ok(EdgeRecovery::Printed),
            s => Err(format!("unknown edge recovery `{s}` (matched, printed)")),
        }
    }
}

impl<T: FromValue> FromValue for Vec<T> {
    fn from_value(v: &Value) -> Result<Self, String> {
        match v {
            Value::List(items) => items.iter().map(T::from_value).collect(),
            single => Ok(vec![T::from_value(single)?]),
        }
    }
}

fn indicator_name(v: IndicatorVariable) -> &'static str {
    match v {
        IndicatorVariable::DensityPressure => "density_pressure",
        IndicatorVariable::Density => "density",
        IndicatorVariable::Pressure => "pressure",
    }
}

fn recovery_name(r: EdgeRecovery) -> &'static str {
    match r {
        EdgeRecovery::Matched => "matched",
        EdgeRecovery::Printed => "printed",
    }
}

struct Builder<'a> {
    entries: &'a BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Builder<'_> {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    fn error(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line: self.line(key),
            key: Some(key.to_string()),
            message: message.into(),
        });
    }

    fn get<T: FromValue>(&mut self, key: &str) -> Option<T> {
        let entry = self.entries.get(key)?;
        match T::from_value(&entry.value) {
            Ok(v) => Some(v),
            Err(m) => {
                self.error(key, m);
                None
            }
        }
    }

    fn set<T: FromValue>(&mut self, key: &str, target: &mut T) {
        if let Some(v) = self.get(key) {
            *target = v;
        }
    }

    /// Per-axis list; a single value is broadcast to every axis.
    fn set_axes<T: FromValue + Copy>(&mut self, key: &str, dims: usize, target: &mut [T; 2]) {
        let Some(values) = self.get::<Vec<T>>(key) else {
            return;
        };
        match values.len() {
            1 => target[..dims].fill(values[0]),
            n if n == dims => target[..dims].copy_from_slice(&values),
            n => self.error(key, format!("expected {dims} value(s) for a {dims}D mesh, found {n}")),
        }
    }
}

/// Parses and validates a configuration; all problems are reported together.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with_overrides(text, &[])
}

/// As [`parse_config`], with `section.key = value` overrides taking
/// precedence over the text (command-line flags).
pub fn parse_config_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut entries = read_entries(text, &mut errors);
    for (key, raw) in overrides {
        let valid_key = key
            .split_once('.')
            .is_some_and(|(section, name)| known(section, name));
        if !valid_key {
            errors.push(ConfigError {
                line: None,
                key: Some(key.clone()),
                message: "unknown key in override".into(),
            });
            continue;
        }
        match parse_value(raw) {
            Ok(value) => {
                entries.insert(key.clone(), Entry { line: None, value });
            }
            Err(message) => errors.push(ConfigError {
                line: None,
                key: Some(key.clone()),
                message,
            }),
        }
    }
    let mut b = Builder {
        entries: &entries,
        errors,
    };

    let case = if entries.contains_key("case.id") {
        b.get::<CaseId>("case.id")
    } else {
        b.errors.push(ConfigError {
            line: None,
            key: Some("case.id".into()),
            message: "missing required key".into(),
        });
        None
    };
    // keep checking the remaining keys against some defaults
    let mut c = RunConfig::defaults(case.unwrap_or(CaseId::Freestream));

    b.set("mesh.dims", &mut c.mesh.dims);
    if c.mesh.dims != 1 && c.mesh.dims != 2 {
        b.error("mesh.dims", format!("must be 1 or 2, got {}", c.mesh.dims));
        c.mesh.dims = 2;
    }
    let dims = c.mesh.dims;
    if dims == 1 {
        // unused second axis kept canonical
        c.mesh.elements[1] = 1;
        c.mesh.lower[1] = 0.0;
        c.mesh.upper[1] = 1.0;
        c.mesh.periodic[1] = true;
    }
    b.set_axes("mesh.elements", dims, &mut c.mesh.elements);
    b.set_axes("mesh.lower", dims, &mut c.mesh.lower);
    b.set_axes("mesh.upper", dims, &mut c.mesh.upper);
    b.set_axes("mesh.periodic", dims, &mut c.mesh.periodic);
    b.set("solver.degree", &mut c.degree);
    b.set("gas.gamma", &mut c.gas.gamma);
    b.set("gas.prandtl", &mut c.gas.prandtl);
    b.set("time.cfl", &mut c.time.cfl);
    if entries.contains_key("time.dt") {
        c.time.dt = b.get("time.dt");
    }
    match (entries.contains_key("time.steps"), entries.contains_key("time.end_time")) {
        (true, true) => b.error("time.end_time", "`time.steps` and `time.end_time` are mutually exclusive"),
        (true, false) => {
            if let Some(n) = b.get("time.steps") {
                c.time.stop = StopRule::Steps(n);
            }
        }
        (false, true) => {
            if let Some(t) = b.get("time.end_time") {
                c.time.stop = StopRule::EndTime(t);
            }
        }
        (false, false) => {}
    }
    b.set("blending.enabled", &mut c.blending.enabled);
    b.set("blending.sharpness", &mut c.blending.sharpness);
    b.set("blending.alpha_min", &mut c.blending.alpha_min);
    b.set("blending.alpha_max", &mut c.blending.alpha_max);
    b.set("blending.propagate", &mut c.blending.propagate);
    b.set("blending.variable", &mut c.blending.variable);
    if entries.contains_key("blending.fixed_alpha") {
        c.blending.fixed_alpha = b.get("blending.fixed_alpha");
    }
    if let Some(dir) = b.get::<String>("output.directory") {
        c.output.directory = PathBuf::from(dir);
    }
    b.set("output.state", &mut c.output.state);
    b.set("output.diagnostics", &mut c.output.diagnostics);
    b.set("output.perf", &mut c.output.perf);
    b.set("output.sweep", &mut c.output.sweep);
    if entries.contains_key("run.threads") {
        c.threads = b.get("run.threads");
    }
    b.set("run.repeats", &mut c.repeats);
    b.set("campaign.elements", &mut c.campaign.elements);
    b.set("campaign.cores", &mut c.campaign.cores);
    b.set("wall.ma_inf", &mut c.wall.ma_inf);
    b.set("wall.u_inf_plus", &mut c.wall.u_inf_plus);
    b.set("wall.y_plus_min", &mut c.wall.y_plus_min);
    b.set("wall.y_plus_max", &mut c.wall.y_plus_max);
    b.set("wall.points", &mut c.wall.points);
    b.set("wall.edge_recovery", &mut c.wall.edge_recovery);

    validate(&c, &mut b);
    let mut errors = b.errors;
    if errors.is_empty() {
        Ok(c)
    } else {
        errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(errors))
    }
}

fn validate(c: &RunConfig, b: &mut Builder<'_>) {
    let dims = c.mesh.dims;
    for d in 0..dims {
        if c.mesh.elements[d] == 0 {
            b.error("mesh.elements", "element counts must be positive");
        }
        if !(c.mesh.upper[d] > c.mesh.lower[d]) {
            b.error("mesh.upper", format!("axis {d}: upper {} must exceed lower {}", c.mesh.upper[d], c.mesh.lower[d]));
        }
    }
    if c.degree > MAX_DEGREE {
        b.error("solver.degree", format!("degree {} exceeds the supported maximum {MAX_DEGREE}", c.degree));
    }
    if c.degree == 0 && c.blending.enabled && c.blending.fixed_alpha.is_none() {
        b.error("solver.degree", "the blending indicator needs degree >= 1 (disable blending or raise the degree)");
    }
    if !(c.gas.gamma > 1.0) {
        b.error("gas.gamma", format!("must exceed 1, got {}", c.gas.gamma));
    }
    if !(c.gas.prandtl > 0.0) {
        b.error("gas.prandtl", format!("must be positive, got {}", c.gas.prandtl));
    }
    if !(c.time.cfl > 0.0) {
        b.error("time.cfl", format!("must be positive, got {}", c.time.cfl));
    }
    if let Some(dt) = c.time.dt {
        if !(dt > 0.0) {
            b.error("time.dt", format!("must be positive, got {dt}"));
        }
    }
    match c.time.stop {
        StopRule::Steps(0) => b.error("time.steps", "must be positive"),
        StopRule::EndTime(t) if !(t > 0.0) => b.error("time.end_time", format!("must be positive, got {t}")),
        _ => {}
    }
    let bl = &c.blending;
    if !(bl.sharpness > 0.0) {
        b.error("blending.sharpness", format!("must be positive, got {}", bl.sharpness));
    }
    if !(0.0..=1.0).contains(&bl.alpha_min) {
        b.error("blending.alpha_min", format!("must lie in [0, 1], got {}", bl.alpha_min));
    }
    if !(0.0..=1.0).contains(&bl.alpha_max) {
        b.error("blending.alpha_max", format!("must lie in [0, 1], got {}", bl.alpha_max));
    } else if bl.alpha_max < bl.alpha_min {
        b.error("blending.alpha_max", format!("cap {} is below the floor {}", bl.alpha_max, bl.alpha_min));
    }
    if let Some(a) = bl.fixed_alpha {
        if !(0.0..=1.0).contains(&a) {
            b.error("blending.fixed_alpha", format!("must lie in [0, 1], got {a}"));
        }
    }
    if c.threads == Some(0) {
        b.error("run.threads", "must be positive");
    }
    if c.repeats == 0 {
        b.error("run.repeats", "must be positive");
    }
    for (name, file) in [
        ("output.state", &c.output.state),
        ("output.diagnostics", &c.output.diagnostics),
        ("output.perf", &c.output.perf),
        ("output.sweep", &c.output.sweep),
    ] {
        if file.is_empty() {
            b.error(name, "file name must not be empty");
        }
    }
    match c.case {
        CaseId::Sod if dims != 1 => b.error("mesh.dims", "the sod case is one-dimensional"),
        CaseId::Vortex if dims != 2 => b.error("mesh.dims", "the vortex case is two-dimensional"),
        CaseId::Scaling => {
            if dims != 2 {
                b.error("mesh.dims", "the scaling campaign runs on 2D meshes");
            }
            if c.campaign.elements.is_empty() || c.campaign.elements.contains(&0) {
                b.error("campaign.elements", "needs at least one positive element count");
            }
            if c.campaign.cores.is_empty() || c.campaign.cores.contains(&0) {
                b.error("campaign.cores", "needs at least one positive core count");
            }
            if !matches!(c.time.stop, StopRule::Steps(_)) {
                b.error("time.end_time", "the scaling campaign needs a step count");
            }
        }
        CaseId::WallSweep => {
            let w = &c.wall;
            if !(w.ma_inf >= 0.0) {
                b.error("wall.ma_inf", format!("must be non-negative, got {}", w.ma_inf));
            }
            if !(w.u_inf_plus > 0.0) {
                b.error("wall.u_inf_plus", format!("must be positive, got {}", w.u_inf_plus));
            }
            if !(w.y_plus_min > 0.0) {
                b.error("wall.y_plus_min", format!("must be positive, got {}", w.y_plus_min));
            } else if !(w.y_plus_max > w.y_plus_min) {
                b.error("wall.y_plus_max", format!("must exceed y_plus_min {}", w.y_plus_min));
            }
            if w.points < 2 {
                b.error("wall.points", "needs at least 2 points");
            }
        }
        _ => {}
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn list<T: fmt::Debug>(values: &[T]) -> String {
    format!(
        "[{}]",
        values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
    )
}

/// Writes every field explicitly; `parse_config(&render(c)) == Ok(c)`.
pub fn render(c: &RunConfig) -> String {
    use std::fmt::Write;
    let d = c.mesh.dims;
    let mut s = String::new();
    let _ = writeln!(s, "[case]\nid = {}\n", quote(c.case.name()));
    let _ = writeln!(s, "[mesh]");
    let _ = writeln!(s, "dims = {d}");
    let _ = writeln!(s, "elements = {}", list(&c.mesh.elements[..d]));
    let _ = writeln!(s, "lower = {}", list(&c.mesh.lower[..d]));
    let _ = writeln!(s, "upper = {}", list(&c.mesh.upper[..d]));
    let _ = writeln!(s, "periodic = {}\n", list(&c.mesh.periodic[..d]));
    let _ = writeln!(s, "[solver]\ndegree = {}\n", c.degree);
    let _ = writeln!(s, "[gas]\ngamma = {:?}\nprandtl = {:?}\n", c.gas.gamma, c.gas.prandtl);
    let _ = writeln!(s, "[time]\ncfl = {:?}", c.time.cfl);
    if let Some(dt) = c.time.dt {
        let _ = writeln!(s, "dt = {dt:?}");
    }
    match c.time.stop {
        StopRule::Steps(n) => {
            let _ = writeln!(s, "steps = {n}\n");
        }
        StopRule::EndTime(t) => {
            let _ = writeln!(s, "end_time = {t:?}\n");
        }
    }
    let bl = &c.blending;
    let _ = writeln!(s, "[blending]");
    let _ = writeln!(s, "enabled = {}", bl.enabled);
    let _ = writeln!(s, "sharpness = {:?}", bl.sharpness);
    let _ = writeln!(s, "alpha_min = {:?}", bl.alpha_min);
    let _ = writeln!(s, "alpha_max = {:?}", bl.alpha_max);
    let _ = writeln!(s, "propagate = {}", bl.propagate);
    let _ = writeln!(s, "variable = {}", quote(indicator_name(bl.variable)));
    if let Some(a) = bl.fixed_alpha {
        let _ = writeln!(s, "fixed_alpha = {a:?}");
    }
    let o = &c.output;
    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "directory = {}", quote(&o.directory.to_string_lossy()));
    let _ = writeln!(s, "state = {}", quote(&o.state));
    let _ = writeln!(s, "diagnostics = {}", quote(&o.diagnostics));
    let _ = writeln!(s, "perf = {}", quote(&o.perf));
    let _ = writeln!(s, "sweep = {}\n", quote(&o.sweep));
    let _ = writeln!(s, "[run]");
    if let Some(t) = c.threads {
        let _ = writeln!(s, "threads = {t}");
    }
    let _ = writeln!(s, "repeats = {}\n", c.repeats);
    let _ = writeln!(s, "[campaign]");
    let _ = writeln!(s, "elements = {}", list(&c.campaign.elements));
    let _ = writeln!(s, "cores = {}\n", list(&c.campaign.cores));
    let w = &c.wall;
    let _ = writeln!(s, "[wall]");
    let _ = writeln!(s, "ma_inf = {:?}", w.ma_inf);
    let _ = writeln!(s, "u_inf_plus = {:?}", w.u_inf_plus);
    let _ = writeln!(s, "y_plus_min = {:?}", w.y_plus_min);
    let _ = writeln!(s, "y_plus_max = {:?}", w.y_plus_max);
    let _ = writeln!(s, "points = {}", w.points);
    let _ = writeln!(s, "edge_recovery = {}", quote(recovery_name(w.edge_recovery)));
    s
}

/// Applies the environment overrides (`DGFV_THREADS`, `DGFV_OUTPUT_DIR`).
pub fn apply_env<F>(config: &mut RunConfig, lookup: F) -> Result<(), ConfigErrors>
where
    F: Fn(&str) -> Option<String>,
{
    let mut errors = Vec::new();
    if let Some(raw) = lookup(ENV_THREADS) {
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => config.threads = Some(n),
            _ => errors.push(ConfigError {
                line: None,
                key: Some(ENV_THREADS.into()),
                message: format!("`{raw}` is not a positive integer"),
            }),
        }
    }
    if let Some(dir) = lookup(ENV_OUTPUT_DIR) {
        if dir.is_empty() {
            errors.push(ConfigError {
                line: None,
                key: Some(ENV_OUTPUT_DIR.into()),
                message: "must not be empty".into(),
            });
        } else {
            config.output.directory = PathBuf::from(dir);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ConfigErrors(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_takes_case_defaults() {
        let c = parse_config("[case]\nid = freestream\n").unwrap();
        assert_eq!(c.blending.alpha_min, 0.01);
        assert_eq!(c.blending.alpha_max, 0.7);
        assert_eq!(c.gas.gamma, 1.4);
        assert_eq!(c, RunConfig::defaults(CaseId::Freestream));
    }

    #[test]
    fn zero_degree_with_blending_is_rejected() {
        let err = parse_config("[case]\nid = \"sod\"\n[solver]\ndegree = 0\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, Some(4));
        assert!(err.0[0].message.contains("degree >= 1"));
        assert!(parse_config("[case]\nid = sod\n[solver]\ndegree = 0\n[blending]\nenabled = false\n").is_ok());
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let err = parse_config("[case]\nid = sod\n[time]\ncfl = 0.3\n\ncfl = 0.4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4") && msg.contains("line 6"), "{msg}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "[case]\nid = sod\n[mesh]\nelemnts = [3]\n[gas]\ngamma = 0.5\n[bogus]\nx = 1\n[time]\ncfl = fast\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(4), Some(6), Some(7), Some(10)], "{err}");
    }

    #[test]
    fn missing_case_is_reported() {
        let err = parse_config("[solver]\ndegree = 3\n").unwrap_err();
        assert_eq!(err.0[0].key.as_deref(), Some("case.id"));
    }

    #[test]
    fn steps_and_end_time_are_exclusive() {
        assert!(parse_config("[case]\nid = sod\n[time]\nsteps = 3\nend_time = 0.1\n").is_err());
        let c = parse_config("[case]\nid = sod\n[time]\nsteps = 3\n").unwrap();
        assert_eq!(c.time.stop, StopRule::Steps(3));
    }

    #[test]
    fn axis_lists_broadcast_and_check_length() {
        let c = parse_config("[case]\nid = vortex\n[mesh]\nelements = 8\nperiodic = [true, false]\n").unwrap();
        assert_eq!(c.mesh.elements, [8, 8]);
        assert_eq!(c.mesh.periodic, [true, false]);
        assert!(parse_config("[case]\nid = vortex\n[mesh]\nelements = [1, 2, 3]\n").is_err());
    }

    #[test]
    fn comments_and_quoted_hashes() {
        let c = parse_config("# run\n[case] # trailing\nid = sod # here\n[output]\ndirectory = \"out#1\"\n").unwrap();
        assert_eq!(c.output.directory, PathBuf::from("out#1"));
    }

    #[test]
    fn overrides_take_precedence() {
        let c = parse_config_with_overrides(
            "[case]\nid = sod\n[solver]\ndegree = 3\n",
            &[("solver.degree".into(), "5".into())],
        )
        .unwrap();
        assert_eq!(c.degree, 5);
        assert!(parse_config_with_overrides("[case]\nid = sod\n", &[("solver.nope".into(), "1".into())]).is_err());
    }

    #[test]
    fn environment_overrides() {
        let mut c = RunConfig::defaults(CaseId::Sod);
        apply_env(&mut c, |k| match k {
            ENV_THREADS => Some("3".into()),
            ENV_OUTPUT_DIR => Some("/tmp/x".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(c.threads, Some(3));
        assert_eq!(c.output.directory, PathBuf::from("/tmp/x"));
        assert!(apply_env(&mut c, |k| (k == ENV_THREADS).then(|| "zero".into())).is_err());
    }

    #[test]
    fn defaults_of_every_case_round_trip() {
        for case in CaseId::ALL {
            let c = RunConfig::defaults(case);
            assert_eq!(parse_config(&render(&c)).unwrap(), c, "{case}");
        }
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            prop::sample::select(CaseId::ALL.to_vec()),
            (1usize..40, 1usize..40, -10.0f64..0.0, 0.5f64..10.0, any::<[bool; 2]>()),
            (1usize..10, 1.01f64..2.0, 0.1f64..2.0),
            (0.01f64..1.5, prop::option::of(1e-6f64..1.0), 1usize..500),
            (0.001f64..0.2, 0.2f64..1.0, prop::option::of(0.0f64..1.0), any::<bool>()),
            ("[a-z0-9_ #\"\\\\]{1,12}", prop::option::of(1usize..16), 1usize..6),
            (0.0f64..3.0, 2usize..400),
        )
            .prop_map(|(case, mesh, solver, time, blend, out, wall)| {
                let mut c = RunConfig::defaults(case);
                if c.mesh.dims == 2 {
                    c.mesh.elements = [mesh.0, mesh.1];
                    c.mesh.lower = [mesh.2, mesh.2 * 0.5];
                    c.mesh.upper = [mesh.3, mesh.3 * 2.0];
                    c.mesh.periodic = mesh.4;
                } else {
                    c.mesh.elements[0] = mesh.0;
                    c.mesh.lower[0] = mesh.2;
                    c.mesh.upper[0] = mesh.3;
                    c.mesh.periodic[0] = mesh.4[0];
                }
                c.degree = solver.0;
                c.gas.gamma = solver.1;
                c.gas.prandtl = solver.2;
                c.time.cfl = time.0;
                c.time.dt = time.1;
                if case != CaseId::Scaling && time.2 % 2 == 0 {
                    c.time.stop = StopRule::EndTime(time.2 as f64 * 1e-3);
                } else {
                    c.time.stop = StopRule::Steps(time.2);
                }
                c.blending.alpha_min = blend.0;
                c.blending.alpha_max = blend.1;
                c.blending.fixed_alpha = blend.2;
                c.blending.propagate = blend.3;
                c.output.directory = PathBuf::from(&out.0);
                c.output.state = out.0.clone();
                c.threads = out.1;
                c.repeats = out.2;
                c.wall.ma_inf = wall.0;
                c.wall.points = wall.1;
                c
            })
    }

    proptest! {
        #[test]
        fn render_round_trips(c in arb_config()) {
            let text = render(&c);
            prop_assert_eq!(parse_config(&text).unwrap(), c, "{}", text);
        }
    }
}
