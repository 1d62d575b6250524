//! Flat `key = value` run configuration with dotted keys.
//!
//! Lines starting with `#` are comments. A `preset = NAME` line loads one of
//! the bundled presets first; keys given in the file override it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use plap_core::analysis::{ScalarField, StudyProblem, TimeScheme};
use plap_core::evolve::{BackwardOptions, ForwardOptions, StepDecay, Storage, SubgradientOptions};
use plap_core::plaplacian::ResolventOptions;
use plap_core::{KernelSpec, PExponent};
use std::sync::Arc;

pub const PRESETS: &[(&str, &str)] = &[
    ("stationary", include_str!("../presets/stationary.conf")),
    ("ramp", include_str!("../presets/ramp.conf")),
    ("step", include_str!("../presets/step.conf")),
    ("two_node", include_str!("../presets/two_node.conf")),
    ("smooth", include_str!("../presets/smooth.conf")),
];

/// Where a key was set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File(usize),
    Preset(&'static str, usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File(line) => write!(f, "line {line}"),
            Origin::Preset(name, line) => write!(f, "preset `{name}` line {line}"),
            Origin::Flag => write!(f, "command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}key `{key}`: {message}", origin.as_ref().map(|o| format!("{o}, ")).unwrap_or_default())]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub key: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeName {
    Forward,
    Subgradient,
    Backward,
}

impl SchemeName {
    fn as_str(self) -> &'static str {
        match self {
            SchemeName::Forward => "forward",
            SchemeName::Subgradient => "subgradient",
            SchemeName::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    Constant,
    Ramp,
    Step,
    TwoNode,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceData {
    Zero,
    Constant,
    Ramp,
    Smooth,
}

/// Validated run settings after presets and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub kernel_variant: String,
    pub kernel_beta: f64,
    pub kernel_c: f64,
    pub kernel_coeffs: Vec<f64>,
    pub kernel_path: Option<PathBuf>,
    pub p: f64,
    pub scheme: SchemeName,
    pub n: usize,
    pub horizon: f64,
    pub tau_max: f64,
    pub safety: f64,
    pub residual_floor: f64,
    pub steps: usize,
    pub alpha0: f64,
    pub decay: String,
    pub decay_exponent: f64,
    pub max_steps: usize,
    pub storage_every: usize,
    pub solve_tol: Option<f64>,
    pub solve_max_iters: usize,
    pub initial: InitialData,
    pub initial_value: f64,
    pub source: SourceData,
    pub source_scale: f64,
    pub graph_rho: Option<f64>,
    pub rho_exponent: f64,
    pub seed: u64,
    pub threads: usize,
    pub n_list: Vec<usize>,
    pub n_ref: usize,
    pub factors: Vec<usize>,
    pub ref_factor: usize,
    pub seeds: usize,
    pub time_samples: usize,
    pub check_time_stability: bool,
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    pub require_decreasing: bool,
    pub verify_samples: usize,
}

/// Every accepted key with its default, in echo order.
const KEYS: &[(&str, &str)] = &[
    ("kernel.variant", "power_law"),
    ("kernel.beta", "0.5"),
    ("kernel.c", "1"),
    ("kernel.coeffs", "1, 1"),
    ("kernel.path", ""),
    ("p", "2"),
    ("scheme.name", "backward"),
    ("mesh.n", "64"),
    ("time.horizon", "1"),
    ("time.tau_max", "0.01"),
    ("time.safety", "0.9"),
    ("time.residual_floor", "1e-8"),
    ("time.steps", "100"),
    ("time.alpha0", "0.01"),
    ("time.decay", "harmonic"),
    ("time.decay_exponent", "0.6"),
    ("time.max_steps", "10000000"),
    ("time.storage_every", "1"),
    ("solve.tol", ""),
    ("solve.max_iters", "500"),
    ("data.initial", "ramp"),
    ("data.value", "0"),
    ("data.source", "zero"),
    ("data.source_scale", "1"),
    ("graph.rho", ""),
    ("graph.rho_exponent", "0.25"),
    ("run.seed", "0"),
    ("run.threads", "1"),
    ("study.n_list", "32, 64, 128, 256"),
    ("study.n_ref", "1024"),
    ("study.factors", "1, 2, 4, 8, 16"),
    ("study.ref_factor", "16"),
    ("study.seeds", "10"),
    ("study.time_samples", "64"),
    ("study.check_time_stability", "false"),
    ("acceptance.slope_min", ""),
    ("acceptance.slope_max", ""),
    ("acceptance.decreasing", "false"),
    ("verify.samples", "10000"),
];

/// Raw key/value pairs with their origins.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

fn err(origin: Option<Origin>, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        origin,
        key: key.to_string(),
        message: message.into(),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        let mut lines = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(err(
                    Some(Origin::File(line_no)),
                    trimmed,
                    "expected `key = value`",
                ));
            };
            lines.push((key.trim().to_string(), value.trim().to_string(), line_no));
        }
        if let Some((_, name, line_no)) = lines.iter().find(|(k, _, _)| k == "preset") {
            let (preset_name, text) = PRESETS.iter().find(|(p, _)| p == name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(p, _)| *p).collect();
                err(
                    Some(Origin::File(*line_no)),
                    "preset",
                    format!(
                        "unknown preset `{name}`; expected one of {}",
                        names.join(", ")
                    ),
                )
            })?;
            for (idx, line) in text.lines().enumerate() {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let (key, value) = trimmed
                    .split_once('=')
                    .expect("bundled presets are well formed");
                raw.entries.insert(
                    key.trim().to_string(),
                    (
                        value.trim().to_string(),
                        Origin::Preset(preset_name, idx + 1),
                    ),
                );
            }
        }
        let mut seen = BTreeMap::new();
        for (key, value, line_no) in lines {
            if let Some(first) = seen.insert(key.clone(), line_no) {
                return Err(err(
                    Some(Origin::File(line_no)),
                    &key,
                    format!("duplicate key, first set on line {first}"),
                ));
            }
            if key != "preset" && !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(err(Some(Origin::File(line_no)), &key, "unknown key"));
            }
            raw.entries.insert(key, (value, Origin::File(line_no)));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            err(
                None,
                "--config",
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), (value, Origin::Flag));
    }

    fn origin(&self, key: &str) -> Option<Origin> {
        self.entries.get(key).map(|(_, o)| o.clone())
    }

    fn text(&self, key: &str) -> &str {
        match self.entries.get(key) {
            Some((v, _)) => v,
            None => KEYS
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, d)| *d)
                .expect("key listed in KEYS"),
        }
    }

    fn optional(&self, key: &str) -> Option<&str> {
        Some(self.text(key)).filter(|v| !v.is_empty())
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.text(key).parse().map_err(|_| {
            err(
                self.origin(key),
                key,
                format!("cannot parse `{}`", self.text(key)),
            )
        })
    }

    fn optional_num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.optional(key) {
            None => Ok(None),
            Some(_) => self.num(key).map(Some),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        self.text(key)
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    err(
                        self.origin(key),
                        key,
                        format!("cannot parse list entry `{}`", s.trim()),
                    )
                })
            })
            .collect()
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.text(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(err(
                self.origin(key),
                key,
                format!("expected true or false, got `{other}`"),
            )),
        }
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
        let value = self.text(key);
        options
            .iter()
            .find(|(name, _)| *name == value)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                err(
                    self.origin(key),
                    key,
                    format!(
                        "unknown value `{value}`; expected one of {}",
                        names.join(", ")
                    ),
                )
            })
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let cfg = RunConfig {
            preset: self.entries.get("preset").map(|(v, _)| v.clone()),
            kernel_variant: self.text("kernel.variant").to_string(),
            kernel_beta: self.num("kernel.beta")?,
            kernel_c: self.num("kernel.c")?,
            kernel_coeffs: self.list("kernel.coeffs")?,
            kernel_path: self.optional("kernel.path").map(PathBuf::from),
            p: self.num("p")?,
            scheme: self.choice(
                "scheme.name",
                &[
                    ("forward", SchemeName::Forward),
                    ("subgradient", SchemeName::Subgradient),
                    ("backward", SchemeName::Backward),
                ],
            )?,
            n: self.num("mesh.n")?,
            horizon: self.num("time.horizon")?,
            tau_max: self.num("time.tau_max")?,
            safety: self.num("time.safety")?,
            residual_floor: self.num("time.residual_floor")?,
            steps: self.num("time.steps")?,
            alpha0: self.num("time.alpha0")?,
            decay: self.text("time.decay").to_string(),
            decay_exponent: self.num("time.decay_exponent")?,
            max_steps: self.num("time.max_steps")?,
            storage_every: self.num("time.storage_every")?,
            solve_tol: self.optional_num("solve.tol")?,
            solve_max_iters: self.num("solve.max_iters")?,
            initial: self.choice(
                "data.initial",
                &[
                    ("constant", InitialData::Constant),
                    ("ramp", InitialData::Ramp),
                    ("step", InitialData::Step),
                    ("two_node", InitialData::TwoNode),
                    ("smooth", InitialData::Smooth),
                ],
            )?,
            initial_value: self.num("data.value")?,
            source: self.choice(
                "data.source",
                &[
                    ("zero", SourceData::Zero),
                    ("constant", SourceData::Constant),
                    ("ramp", SourceData::Ramp),
                    ("smooth", SourceData::Smooth),
                ],
            )?,
            source_scale: self.num("data.source_scale")?,
            graph_rho: self.optional_num("graph.rho")?,
            rho_exponent: self.num("graph.rho_exponent")?,
            seed: self.num("run.seed")?,
            threads: self.num("run.threads")?,
            n_list: self.list("study.n_list")?,
            n_ref: self.num("study.n_ref")?,
            factors: self.list("study.factors")?,
            ref_factor: self.num("study.ref_factor")?,
            seeds: self.num("study.seeds")?,
            time_samples: self.num("study.time_samples")?,
            check_time_stability: self.flag("study.check_time_stability")?,
            slope_min: self.optional_num("acceptance.slope_min")?,
            slope_max: self.optional_num("acceptance.slope_max")?,
            require_decreasing: self.flag("acceptance.decreasing")?,
            verify_samples: self.num("verify.samples")?,
        };
        self.validate(&cfg)?;
        Ok(cfg)
    }

    fn validate(&self, c: &RunConfig) -> Result<(), ConfigError> {
        let fail = |key: &str, message: &str| Err(err(self.origin(key), key, message));
        let p_range = match c.scheme {
            SchemeName::Forward => (
                c.p > 1.0 && c.p <= 2.0,
                "forward Euler requires p in (1, 2]",
            ),
            SchemeName::Subgradient => (c.p == 1.0, "the subgradient scheme requires p = 1"),
            SchemeName::Backward => (
                c.p > 1.0 && c.p.is_finite(),
                "backward Euler requires p in (1, inf)",
            ),
        };
        if !p_range.0 {
            let key = if self.entries.contains_key("p") {
                "p"
            } else {
                "scheme.name"
            };
            return Err(err(
                self.origin(key),
                key,
                format!("{} (scheme {}, p = {})", p_range.1, c.scheme.as_str(), c.p),
            ));
        }
        if !["power_law", "constant", "separable", "tabulated"].contains(&c.kernel_variant.as_str())
        {
            return fail(
                "kernel.variant",
                "expected one of power_law, constant, separable, tabulated",
            );
        }
        if c.kernel_variant == "power_law" && !(c.kernel_beta > 0.0 && c.kernel_beta < 1.0) {
            return fail("kernel.beta", "the power-law exponent must lie in (0, 1)");
        }
        if c.kernel_variant == "constant" && !(c.kernel_c >= 0.0 && c.kernel_c.is_finite()) {
            return fail("kernel.c", "the constant kernel must be nonnegative");
        }
        if c.kernel_variant == "tabulated" && c.kernel_path.is_none() {
            return fail("kernel.path", "a tabulated kernel needs a CSV path");
        }
        if c.n == 0 {
            return fail("mesh.n", "must be positive");
        }
        if c.initial == InitialData::TwoNode && c.n != 2 {
            return fail("data.initial", "the two_node data needs mesh.n = 2");
        }
        let positive: [(&str, f64); 5] = [
            ("time.horizon", c.horizon),
            ("time.tau_max", c.tau_max),
            ("time.alpha0", c.alpha0),
            ("time.residual_floor", c.residual_floor),
            ("time.safety", c.safety),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(key, "must be positive");
            }
        }
        if c.safety > 1.0 {
            return fail("time.safety", "must lie in (0, 1]");
        }
        if let Some(tol) = c.solve_tol {
            if !(tol > 0.0) {
                return fail("solve.tol", "must be positive");
            }
        }
        let counts: [(&str, usize); 5] = [
            ("time.steps", c.steps),
            ("time.max_steps", c.max_steps),
            ("time.storage_every", c.storage_every),
            ("solve.max_iters", c.solve_max_iters),
            ("study.seeds", c.seeds),
        ];
        for (key, v) in counts {
            if v == 0 {
                return fail(key, "must be positive");
            }
        }
        if !["harmonic", "power"].contains(&c.decay.as_str()) {
            return fail("time.decay", "expected harmonic or power");
        }
        if c.decay == "power" && !(c.decay_exponent > 0.5 && c.decay_exponent <= 1.0) {
            return fail("time.decay_exponent", "must lie in (1/2, 1]");
        }
        if let Some(rho) = c.graph_rho {
            if !(rho > 0.0 && rho <= 1.0) {
                return fail("graph.rho", "must lie in (0, 1]");
            }
        }
        if !(c.rho_exponent > 0.0 && c.rho_exponent < 1.0) {
            return fail(
                "graph.rho_exponent",
                "must lie in (0, 1) so that rho n grows",
            );
        }
        if c.threads == 0 {
            return fail("run.threads", "must be positive");
        }
        if c.n_list.is_empty() || c.n_list.contains(&0) {
            return fail("study.n_list", "needs positive sizes");
        }
        if c.factors.is_empty() || c.factors.contains(&0) {
            return fail("study.factors", "needs positive factors");
        }
        if c.ref_factor < 2 {
            return fail("study.ref_factor", "must be at least 2");
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn kernel(&self) -> anyhow::Result<KernelSpec> {
        Ok(match self.kernel_variant.as_str() {
            "power_law" => KernelSpec::power_law(self.kernel_beta)?,
            "constant" => KernelSpec::constant(self.kernel_c)?,
            "separable" => KernelSpec::separable(self.kernel_coeffs.clone())?,
            _ => {
                let path = self.kernel_path.as_ref().expect("validated");
                KernelSpec::tabulated(crate::io::read_kernel(path)?)
            }
        })
    }

    pub fn p_exponent(&self) -> PExponent {
        PExponent::new(self.p).expect("validated")
    }

    pub fn initial_field(&self) -> ScalarField {
        let c = self.initial_value;
        match self.initial {
            InitialData::Constant => Arc::new(move |_| c),
            InitialData::Ramp => Arc::new(|x| x),
            InitialData::Step | InitialData::TwoNode => {
                Arc::new(|x| if x > 0.5 { 1.0 } else { 0.0 })
            }
            InitialData::Smooth => Arc::new(|x: f64| (std::f64::consts::PI * x).cos()),
        }
    }

    pub fn source_field(&self) -> Option<ScalarField> {
        let s = self.source_scale;
        match self.source {
            SourceData::Zero => None,
            SourceData::Constant => Some(Arc::new(move |_| s)),
            SourceData::Ramp => Some(Arc::new(move |x| s * (x - 0.5))),
            SourceData::Smooth => {
                Some(Arc::new(move |x: f64| s * (std::f64::consts::PI * x).cos()))
            }
        }
    }

    pub fn study_problem(&self) -> anyhow::Result<StudyProblem> {
        let mut sp = StudyProblem::new(
            self.kernel()?,
            self.initial_field(),
            self.p_exponent(),
            self.horizon,
        );
        sp.source = self.source_field();
        Ok(sp)
    }

    fn storage(&self) -> Storage {
        if self.storage_every <= 1 {
            Storage::Full
        } else {
            Storage::Every(self.storage_every)
        }
    }

    pub fn backward_options(&self) -> BackwardOptions {
        BackwardOptions {
            solve: ResolventOptions {
                tol: self.solve_tol,
                max_iters: self.solve_max_iters,
            },
            storage: self.storage(),
        }
    }

    pub fn time_scheme(&self) -> TimeScheme {
        match self.scheme {
            SchemeName::Forward => TimeScheme::Forward(ForwardOptions {
                tau_max: self.tau_max,
                safety: self.safety,
                residual_floor: self.residual_floor,
                max_steps: self.max_steps,
                storage: self.storage(),
            }),
            SchemeName::Subgradient => TimeScheme::Subgradient(SubgradientOptions {
                alpha0: self.alpha0,
                decay: if self.decay == "power" {
                    StepDecay::Power(self.decay_exponent)
                } else {
                    StepDecay::Harmonic
                },
                max_steps: self.max_steps,
                storage: self.storage(),
            }),
            SchemeName::Backward => TimeScheme::Backward {
                steps: self.steps,
                options: self.backward_options(),
            },
        }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64)
            .map(|k| self.seed.wrapping_add(k))
            .collect()
    }

    /// The effective configuration as `key = value` lines, reloadable as is.
    pub fn echo(&self) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let values: Vec<(&str, String)> = vec![
            ("kernel.variant", self.kernel_variant.clone()),
            ("kernel.beta", self.kernel_beta.to_string()),
            ("kernel.c", self.kernel_c.to_string()),
            (
                "kernel.coeffs",
                self.kernel_coeffs
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            ),
            (
                "kernel.path",
                self.kernel_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
            ("p", self.p.to_string()),
            ("scheme.name", self.scheme.as_str().to_string()),
            ("mesh.n", self.n.to_string()),
            ("time.horizon", self.horizon.to_string()),
            ("time.tau_max", self.tau_max.to_string()),
            ("time.safety", self.safety.to_string()),
            ("time.residual_floor", self.residual_floor.to_string()),
            ("time.steps", self.steps.to_string()),
            ("time.alpha0", self.alpha0.to_string()),
            ("time.decay", self.decay.clone()),
            ("time.decay_exponent", self.decay_exponent.to_string()),
            ("time.max_steps", self.max_steps.to_string()),
            ("time.storage_every", self.storage_every.to_string()),
            ("solve.tol", opt(self.solve_tol)),
            ("solve.max_iters", self.solve_max_iters.to_string()),
            (
                "data.initial",
                match self.initial {
                    InitialData::Constant => "constant",
                    InitialData::Ramp => "ramp",
                    InitialData::Step => "step",
                    InitialData::TwoNode => "two_node",
                    InitialData::Smooth => "smooth",
                }
                .to_string(),
            ),
            ("data.value", self.initial_value.to_string()),
            (
                "data.source",
                match self.source {
                    SourceData::Zero => "zero",
                    SourceData::Constant => "constant",
                    SourceData::Ramp => "ramp",
                    SourceData::Smooth => "smooth",
                }
                .to_string(),
            ),
            ("data.source_scale", self.source_scale.to_string()),
            ("graph.rho", opt(self.graph_rho)),
            ("graph.rho_exponent", self.rho_exponent.to_string()),
            ("run.seed", self.seed.to_string()),
            ("run.threads", self.threads.to_string()),
            ("study.n_list", join(&self.n_list)),
            ("study.n_ref", self.n_ref.to_string()),
            ("study.factors", join(&self.factors)),
            ("study.ref_factor", self.ref_factor.to_string()),
            ("study.seeds", self.seeds.to_string()),
            ("study.time_samples", self.time_samples.to_string()),
            (
                "study.check_time_stability",
                self.check_time_stability.to_string(),
            ),
            ("acceptance.slope_min", opt(self.slope_min)),
            ("acceptance.slope_max", opt(self.slope_max)),
            ("acceptance.decreasing", self.require_decreasing.to_string()),
            ("verify.samples", self.verify_samples.to_string()),
        ];
        debug_assert_eq!(values.len(), KEYS.len());
        let mut out = String::from("# effective configuration\n");
        for (key, value) in values {
            if !value.is_empty() {
                out.push_str(&format!("{key} = {value}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = RawConfig::parse("").unwrap().resolve().unwrap();
        assert_eq!(cfg.scheme, SchemeName::Backward);
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.solve_tol, None);
    }

    #[test]
    fn invalid_scheme_pair_names_the_constraint() {
        let e = RawConfig::parse("scheme.name = forward\n\np = 3\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(e.key, "p");
        assert_eq!(e.origin, Some(Origin::File(3)));
        assert!(e.to_string().contains("(1, 2]"), "{e}");
    }

    #[test]
    fn diagnostics_carry_line_and_key() {
        let e = RawConfig::parse("p = 2\nmesh.n = many\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(
            (e.origin, e.key.as_str()),
            (Some(Origin::File(2)), "mesh.n")
        );
        let e = RawConfig::parse("p = 2\nmesh.size = 3\n").unwrap_err();
        assert_eq!(e.key, "mesh.size");
        let e = RawConfig::parse("p = 2\np = 3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
        let e = RawConfig::parse("just words\n").unwrap_err();
        assert_eq!(e.origin, Some(Origin::File(1)));
        let e = RawConfig::parse("solve.tol = -1\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(e.key, "solve.tol");
    }

    #[test]
    fn presets_load_and_can_be_overridden() {
        for (name, _) in PRESETS {
            let cfg = RawConfig::parse(&format!("preset = {name}\n"))
                .unwrap()
                .resolve()
                .unwrap();
            assert_eq!(cfg.preset.as_deref(), Some(*name));
        }
        let cfg = RawConfig::parse("preset = two_node\ntime.horizon = 0.5\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!((cfg.n, cfg.horizon, cfg.p), (2, 0.5, 1.5));
        let e = RawConfig::parse("preset = nope\n").unwrap_err();
        assert_eq!(e.key, "preset");
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RawConfig::parse("preset = step\nrun.seed = 42\nsolve.tol = 1e-9\n")
            .unwrap()
            .resolve()
            .unwrap();
        let again = RawConfig::parse(&cfg.echo()).unwrap().resolve().unwrap();
        assert_eq!(
            RunConfig {
                preset: cfg.preset.clone(),
                ..again
            },
            cfg
        );
    }
}
