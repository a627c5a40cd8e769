//! Scenario files: flat `key = value` text grouped into `[section]` blocks.
//!
//! A file always carries the shared `[parameters]` and `[initial]` sections
//! (both optional, defaults apply) plus exactly one scenario block naming the
//! subcommand it drives. Keys are the canonical ASCII parameter names; lines
//! starting with `#` or `;` are comments.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::params::{ModelParameters, ParamError};
use crate::state::SystemState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("line {line}: expected `key = value` or `[section]`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown section `[{name}]`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: section `[{section}]` does not accept key `{key}`")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: duplicate key `{key}` in `[{section}]`")]
    DuplicateKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: `{key} = {value}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("no scenario block: exactly one of {SCENARIO_SECTIONS:?} is required")]
    MissingScenario,
    #[error("multiple scenario blocks: {found:?}; exactly one is allowed")]
    MultipleScenarios { found: Vec<String> },
    #[error("invalid parameter after overrides: {0}")]
    Param(#[from] ParamError),
    #[error("override `{spec}`: {reason}")]
    BadOverride { spec: String, reason: String },
}

/// Scenario block names, one per subcommand.
pub const SCENARIO_SECTIONS: [&str; 8] = [
    "simulate",
    "equilibria",
    "stability",
    "r0",
    "elasticity",
    "endemic-sensitivity",
    "optimize",
    "sweep",
];

/// Which sub-model a config drives. The time-driven dosing variant is not
/// listed; it belongs to the `optimize` scenario alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantChoice {
    Full,
    NoTreatment,
    ChemoOnly,
    ViroOnly,
}

impl VariantChoice {
    pub fn tag(&self) -> &'static str {
        match self {
            VariantChoice::Full => "full",
            VariantChoice::NoTreatment => "no-treatment",
            VariantChoice::ChemoOnly => "chemo-only",
            VariantChoice::ViroOnly => "viro-only",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "full" => VariantChoice::Full,
            "no-treatment" => VariantChoice::NoTreatment,
            "chemo-only" => VariantChoice::ChemoOnly,
            "viro-only" => VariantChoice::ViroOnly,
            _ => return None,
        })
    }

    pub fn to_variant(self) -> crate::model::ModelVariant {
        match self {
            VariantChoice::Full => crate::model::ModelVariant::Full,
            VariantChoice::NoTreatment => crate::model::ModelVariant::NoTreatment,
            VariantChoice::ChemoOnly => crate::model::ModelVariant::ChemoOnly,
            VariantChoice::ViroOnly => crate::model::ModelVariant::ViroOnly,
        }
    }
}

impl fmt::Display for VariantChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSpec {
    pub variant: VariantChoice,
    pub dt: f64,
    pub days: f64,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        SimulateSpec {
            variant: VariantChoice::Full,
            dt: 0.01,
            days: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriaSpec {
    pub variant: VariantChoice,
}

impl Default for EquilibriaSpec {
    fn default() -> Self {
        EquilibriaSpec {
            variant: VariantChoice::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySpec {
    pub variant: VariantChoice,
    pub parameter: String,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct R0Spec {
    pub dose_grid: Vec<f64>,
}

impl Default for R0Spec {
    fn default() -> Self {
        R0Spec {
            dose_grid: vec![5.0, 10.0, 15.0, 35.0, 50.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NameListSpec {
    pub parameters: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub n: usize,
    pub relaxation: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        let d = crate::control::SweepOptions::default();
        OptimizeSpec {
            n: d.n,
            relaxation: d.relaxation,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Cartesian axes in declaration order: `(parameter, grid values)`.
    pub axes: Vec<(String, Vec<f64>)>,
    pub variant: VariantChoice,
    pub dt: f64,
    pub days: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            axes: Vec::new(),
            variant: VariantChoice::Full,
            dt: 0.01,
            days: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Simulate(SimulateSpec),
    Equilibria(EquilibriaSpec),
    Stability(StabilitySpec),
    R0(R0Spec),
    Elasticity(NameListSpec),
    EndemicSensitivity(NameListSpec),
    Optimize(OptimizeSpec),
    Sweep(SweepSpec),
}

impl Scenario {
    pub fn section(&self) -> &'static str {
        match self {
            Scenario::Simulate(_) => "simulate",
            Scenario::Equilibria(_) => "equilibria",
            Scenario::Stability(_) => "stability",
            Scenario::R0(_) => "r0",
            Scenario::Elasticity(_) => "elasticity",
            Scenario::EndemicSensitivity(_) => "endemic-sensitivity",
            Scenario::Optimize(_) => "optimize",
            Scenario::Sweep(_) => "sweep",
        }
    }
}

/// A parsed scenario file: parameter overrides applied on top of the
/// defaults, the full-system initial state, and the single scenario block.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParameters,
    pub initial: SystemState,
    pub scenario: Scenario,
}

/// Baseline initial state used when `[initial]` says nothing else.
pub fn default_initial() -> SystemState {
    SystemState::new(1.0e4, 100.0, 500.0, 100.0, 100.0, 100.0)
}

const INITIAL_KEYS: [&str; 6] = ["U", "I", "V", "E_V", "E_T", "C"];

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a number".to_string(),
    })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse::<usize>().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a non-negative integer".to_string(),
    })
}

/// Grid syntax: either a comma list `0.5, 1, 2` or
/// `linspace(start, stop, count)` with count >= 2.
fn parse_grid(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |reason: &str| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = value.trim();
    if let Some(args) = trimmed
        .strip_prefix("linspace(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("linspace needs (start, stop, count)"));
        }
        let start = parse_f64(line, key, parts[0])?;
        let stop = parse_f64(line, key, parts[1])?;
        let count = parse_usize(line, key, parts[2])?;
        if count < 2 {
            return Err(bad("linspace count must be at least 2"));
        }
        let step = (stop - start) / (count - 1) as f64;
        // pin the last node so round-off cannot overshoot the stated stop
        return Ok((0..count)
            .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
            .collect());
    }
    let values: Result<Vec<f64>, _> = trimmed
        .split(',')
        .map(|v| parse_f64(line, key, v.trim()))
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(values)
}

/// `axis = name: v1, v2, ...` or `axis = name: linspace(a, b, n)`.
fn parse_axis(line: usize, value: &str) -> Result<(String, Vec<f64>), ConfigError> {
    let (name, rest) = value.split_once(':').ok_or_else(|| ConfigError::BadValue {
        line,
        key: "axis".to_string(),
        value: value.to_string(),
        reason: "expected `parameter: values`".to_string(),
    })?;
    let grid = parse_grid(line, "axis", rest)?;
    Ok((name.trim().to_string(), grid))
}

fn parse_names(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Mutable halfway representation while the scenario block is being filled.
#[derive(Default)]
struct Blocks {
    simulate: Option<SimulateSpec>,
    equilibria: Option<EquilibriaSpec>,
    stability: Option<(Option<String>, Option<Vec<f64>>, VariantChoice)>,
    r0: Option<R0Spec>,
    elasticity: Option<NameListSpec>,
    endemic: Option<NameListSpec>,
    optimize: Option<OptimizeSpec>,
    sweep: Option<SweepSpec>,
}

impl ScenarioConfig {
    /// Parses a scenario file from disk.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parses scenario text. See the module doc for the format.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut params = ModelParameters::default();
        let mut initial = default_initial();
        let mut blocks = Blocks::default();
        let mut section: Option<String> = None;
        let mut seen: HashSet<(String, String)> = HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim();
                let known = name == "parameters"
                    || name == "initial"
                    || SCENARIO_SECTIONS.contains(&name);
                if !known {
                    return Err(ConfigError::UnknownSection {
                        line: line_no,
                        name: name.to_string(),
                    });
                }
                if SCENARIO_SECTIONS.contains(&name) {
                    blocks.open(name);
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                text: line.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_deref().ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                text: line.to_string(),
            })?;
            // `axis` repeats to declare one sweep dimension per line.
            let repeatable = section == "sweep" && key == "axis";
            if !repeatable && !seen.insert((section.to_string(), key.to_string())) {
                return Err(ConfigError::DuplicateKey {
                    line: line_no,
                    section: section.to_string(),
                    key: key.to_string(),
                });
            }
            apply_key(
                &mut params,
                &mut initial,
                &mut blocks,
                section,
                key,
                value,
                line_no,
            )?;
        }

        params.validate()?;
        let scenario = blocks.close()?;
        Ok(ScenarioConfig {
            params,
            initial,
            scenario,
        })
    }

    /// Applies one `--set` override.
    ///
    /// Accepted shapes: a bare canonical parameter name (`beta=0.5`), an
    /// `initial.` key (`initial.U=2e4`), an explicit `parameters.` key, or a
    /// key of the active scenario block (`simulate.days=400`).
    pub fn apply_set(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec.split_once('=').ok_or_else(|| ConfigError::BadOverride {
            spec: spec.to_string(),
            reason: "expected `key=value`".to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |reason: String| ConfigError::BadOverride {
            spec: spec.to_string(),
            reason,
        };

        if let Some((section, field)) = key.split_once('.') {
            match section {
                "parameters" => {
                    let v = value
                        .parse::<f64>()
                        .map_err(|_| bad("not a number".to_string()))?;
                    self.params.set(field, v)?;
                    self.params.validate()?;
                    return Ok(());
                }
                "initial" => {
                    let v = value
                        .parse::<f64>()
                        .map_err(|_| bad("not a number".to_string()))?;
                    return set_initial(&mut self.initial, field, v)
                        .ok_or_else(|| bad(format!("unknown initial component `{field}`")));
                }
                s if s == self.scenario.section() => {
                    return apply_scenario_set(&mut self.scenario, field, value)
                        .map_err(|reason| bad(reason));
                }
                s if SCENARIO_SECTIONS.contains(&s) => {
                    return Err(bad(format!(
                        "section `[{s}]` is not the active scenario (`[{}]`)",
                        self.scenario.section()
                    )));
                }
                _ => return Err(bad(format!("unknown section `{section}`"))),
            }
        }

        // Bare key: a parameter name.
        let v = value
            .parse::<f64>()
            .map_err(|_| bad("not a number".to_string()))?;
        self.params.set(key, v)?;
        self.params.validate()?;
        Ok(())
    }

    /// The canonical defaults file: every parameter at its baseline value,
    /// the baseline initial state, and the default `simulate` block.
    /// `configs/default.ini` must match this text byte for byte.
    pub fn default_text() -> &'static str {
        DEFAULT_TEXT
    }
}

impl Blocks {
    fn open(&mut self, name: &str) {
        match name {
            "simulate" => self.simulate.get_or_insert_with(SimulateSpec::default),
            "equilibria" => {
                self.equilibria.get_or_insert_with(EquilibriaSpec::default);
                return;
            }
            "stability" => {
                self.stability
                    .get_or_insert_with(|| (None, None, VariantChoice::Full));
                return;
            }
            "r0" => {
                self.r0.get_or_insert_with(R0Spec::default);
                return;
            }
            "elasticity" => {
                self.elasticity.get_or_insert_with(|| NameListSpec {
                    parameters: default_elasticity_names(),
                });
                return;
            }
            "endemic-sensitivity" => {
                self.endemic.get_or_insert_with(|| NameListSpec {
                    parameters: vec!["q".to_string()],
                });
                return;
            }
            "optimize" => {
                self.optimize.get_or_insert_with(OptimizeSpec::default);
                return;
            }
            "sweep" => {
                self.sweep.get_or_insert_with(SweepSpec::default);
                return;
            }
            _ => unreachable!("caller checked the section name"),
        };
    }

    fn close(self) -> Result<Scenario, ConfigError> {
        let mut found: Vec<String> = Vec::new();
        let mut out: Option<Scenario> = None;
        let mut push = |name: &str, s: Scenario, out: &mut Option<Scenario>| {
            found.push(name.to_string());
            *out = Some(s);
        };
        if let Some(s) = self.simulate {
            push("simulate", Scenario::Simulate(s), &mut out);
        }
        if let Some(s) = self.equilibria {
            push("equilibria", Scenario::Equilibria(s), &mut out);
        }
        if let Some((param, grid, variant)) = self.stability {
            let parameter = param.ok_or(ConfigError::BadValue {
                line: 0,
                key: "parameter".to_string(),
                value: String::new(),
                reason: "[stability] requires `parameter`".to_string(),
            })?;
            let grid = grid.ok_or(ConfigError::BadValue {
                line: 0,
                key: "grid".to_string(),
                value: String::new(),
                reason: "[stability] requires `grid`".to_string(),
            })?;
            push(
                "stability",
                Scenario::Stability(StabilitySpec {
                    variant,
                    parameter,
                    grid,
                }),
                &mut out,
            );
        }
        if let Some(s) = self.r0 {
            push("r0", Scenario::R0(s), &mut out);
        }
        if let Some(s) = self.elasticity {
            push("elasticity", Scenario::Elasticity(s), &mut out);
        }
        if let Some(s) = self.endemic {
            push("endemic-sensitivity", Scenario::EndemicSensitivity(s), &mut out);
        }
        if let Some(s) = self.optimize {
            push("optimize", Scenario::Optimize(s), &mut out);
        }
        if let Some(s) = self.sweep {
            if s.axes.is_empty() {
                return Err(ConfigError::BadValue {
                    line: 0,
                    key: "axis".to_string(),
                    value: String::new(),
                    reason: "[sweep] requires at least one `axis`".to_string(),
                });
            }
            push("sweep", Scenario::Sweep(s), &mut out);
        }
        match found.len() {
            0 => Err(ConfigError::MissingScenario),
            1 => Ok(out.expect("one block recorded")),
            _ => Err(ConfigError::MultipleScenarios { found }),
        }
    }
}

/// Elasticity rows emitted when the block does not narrow the list.
pub fn default_elasticity_names() -> Vec<String> {
    ["b", "beta", "gamma", "delta", "delta_I", "K_u", "q", "psi"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn set_initial(initial: &mut SystemState, key: &str, value: f64) -> Option<()> {
    match key {
        "U" => initial.u = value,
        "I" => initial.i = value,
        "V" => initial.v = value,
        "E_V" => initial.e_v = value,
        "E_T" => initial.e_t = value,
        "C" => initial.c = value,
        _ => return None,
    }
    Some(())
}

fn apply_key(
    params: &mut ModelParameters,
    initial: &mut SystemState,
    blocks: &mut Blocks,
    section: &str,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigError> {
    let unknown = || ConfigError::UnknownKey {
        line,
        section: section.to_string(),
        key: key.to_string(),
    };
    match section {
        "parameters" => {
            let v = parse_f64(line, key, value)?;
            params.set(key, v).map_err(|_| unknown())?;
        }
        "initial" => {
            if !INITIAL_KEYS.contains(&key) {
                return Err(unknown());
            }
            let v = parse_f64(line, key, value)?;
            set_initial(initial, key, v).expect("key checked above");
        }
        "simulate" => {
            let spec = blocks.simulate.as_mut().expect("section opened");
            match key {
                "variant" => {
                    spec.variant = VariantChoice::parse(value).ok_or(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected full|no-treatment|chemo-only|viro-only".to_string(),
                    })?;
                }
                "dt" => spec.dt = parse_f64(line, key, value)?,
                "days" => spec.days = parse_f64(line, key, value)?,
                _ => return Err(unknown()),
            }
        }
        "equilibria" => {
            let spec = blocks.equilibria.as_mut().expect("section opened");
            match key {
                "variant" => {
                    spec.variant = VariantChoice::parse(value).ok_or(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected full|no-treatment|chemo-only|viro-only".to_string(),
                    })?;
                }
                _ => return Err(unknown()),
            }
        }
        "stability" => {
            let spec = blocks.stability.as_mut().expect("section opened");
            match key {
                "parameter" => spec.0 = Some(value.to_string()),
                "grid" => spec.1 = Some(parse_grid(line, key, value)?),
                "variant" => {
                    spec.2 = VariantChoice::parse(value).ok_or(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected full|no-treatment|chemo-only|viro-only".to_string(),
                    })?;
                }
                _ => return Err(unknown()),
            }
        }
        "r0" => {
            let spec = blocks.r0.as_mut().expect("section opened");
            match key {
                "dose_grid" => spec.dose_grid = parse_grid(line, key, value)?,
                _ => return Err(unknown()),
            }
        }
        "elasticity" => {
            let spec = blocks.elasticity.as_mut().expect("section opened");
            match key {
                "parameters" => spec.parameters = parse_names(value),
                _ => return Err(unknown()),
            }
        }
        "endemic-sensitivity" => {
            let spec = blocks.endemic.as_mut().expect("section opened");
            match key {
                "parameters" => spec.parameters = parse_names(value),
                _ => return Err(unknown()),
            }
        }
        "optimize" => {
            let spec = blocks.optimize.as_mut().expect("section opened");
            match key {
                "n" => spec.n = parse_usize(line, key, value)?,
                "relaxation" => spec.relaxation = parse_f64(line, key, value)?,
                "tolerance" => spec.tolerance = parse_f64(line, key, value)?,
                "max_iterations" => spec.max_iterations = parse_usize(line, key, value)?,
                _ => return Err(unknown()),
            }
        }
        "sweep" => {
            let spec = blocks.sweep.as_mut().expect("section opened");
            match key {
                "axis" => spec.axes.push(parse_axis(line, value)?),
                "variant" => {
                    spec.variant = VariantChoice::parse(value).ok_or(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected full|no-treatment|chemo-only|viro-only".to_string(),
                    })?;
                }
                "dt" => spec.dt = parse_f64(line, key, value)?,
                "days" => spec.days = parse_f64(line, key, value)?,
                _ => return Err(unknown()),
            }
        }
        _ => unreachable!("section names validated while parsing"),
    }
    Ok(())
}

fn apply_scenario_set(scenario: &mut Scenario, key: &str, value: &str) -> Result<(), String> {
    let num = |v: &str| v.parse::<f64>().map_err(|_| "not a number".to_string());
    let int = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| "not a non-negative integer".to_string())
    };
    match scenario {
        Scenario::Simulate(s) => match key {
            "variant" => {
                s.variant =
                    VariantChoice::parse(value).ok_or_else(|| "unknown variant".to_string())?;
            }
            "dt" => s.dt = num(value)?,
            "days" => s.days = num(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        },
        Scenario::Equilibria(s) => match key {
            "variant" => {
                s.variant =
                    VariantChoice::parse(value).ok_or_else(|| "unknown variant".to_string())?;
            }
            _ => return Err(format!("unknown key `{key}`")),
        },
        Scenario::Stability(s) => match key {
            "parameter" => s.parameter = value.to_string(),
            "grid" => s.grid = parse_grid(0, key, value).map_err(|e| e.to_string())?,
            "variant" => {
                s.variant =
                    VariantChoice::parse(value).ok_or_else(|| "unknown variant".to_string())?;
            }
            _ => return Err(format!("unknown key `{key}`")),
        },
        Scenario::R0(s) => match key {
            "dose_grid" => s.dose_grid = parse_grid(0, key, value).map_err(|e| e.to_string())?,
            _ => return Err(format!("unknown key `{key}`")),
        },
        Scenario::Elasticity(s) | Scenario::EndemicSensitivity(s) => match key {
            "parameters" => s.parameters = parse_names(value),
            _ => return Err(format!("unknown key `{key}`")),
        },
        Scenario::Optimize(s) => match key {
            "n" => s.n = int(value)?,
            "relaxation" => s.relaxation = num(value)?,
            "tolerance" => s.tolerance = num(value)?,
            "max_iterations" => s.max_iterations = int(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        },
        Scenario::Sweep(s) => match key {
            "axis" => s
                .axes
                .push(parse_axis(0, value).map_err(|e| e.to_string())?),
            "variant" => {
                s.variant =
                    VariantChoice::parse(value).ok_or_else(|| "unknown variant".to_string())?;
            }
            "dt" => s.dt = num(value)?,
            "days" => s.days = num(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        },
    }
    Ok(())
}

const DEFAULT_TEXT: &str = include_str!("../configs/default.ini");
