//! Flat `key = value` configuration files.
//!
//! `#` starts a comment; blank lines are ignored. Every key may appear at
//! most once and unknown keys are rejected. A file that sets `levels` is a
//! convergence-study config, otherwise a single-run config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldMethod;
use crate::harness::StudyConfig;
use crate::solver::{DtPolicy, InitialCondition, SolverConfig};

use super::output::read_field_dump;

pub const REQUIRED_KEYS: &[&str] = &["n_x", "n_v", "v_max", "eps", "t_final", "sigma", "initial_condition"];

pub const OPTIONAL_KEYS: &[&str] = &[
    "ic_rho",
    "ic_u",
    "ic_temp",
    "ic_path",
    "diagnostics_every",
    "q_list",
    "dt_policy",
    "field_method",
    "compensated_moments",
    "snapshot_f",
    "zero_field",
    "collisionless",
    "levels",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Run(SolverConfig),
    Study(StudyConfig),
}

impl ParsedConfig {
    pub fn solver(&self) -> &SolverConfig {
        match self {
            ParsedConfig::Run(c) => c,
            ParsedConfig::Study(s) => &s.base,
        }
    }

    pub fn solver_mut(&mut self) -> &mut SolverConfig {
        match self {
            ParsedConfig::Run(c) => c,
            ParsedConfig::Study(s) => &mut s.base,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<(usize, T)>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((e.line, v)))
                .map_err(|_| Error::ConfigLine {
                    line: e.line,
                    message: format!("cannot parse {key} = {:?}", e.value),
                }),
        }
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> Result<(usize, T)> {
        self.parse(key)?
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    fn flag(&mut self, key: &str) -> Result<bool> {
        Ok(self.parse::<bool>(key)?.map(|(_, v)| v).unwrap_or(false))
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigLine {
            line,
            message: format!("expected `key = value`, got {content:?}"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !REQUIRED_KEYS.contains(&key.as_str()) && !OPTIONAL_KEYS.contains(&key.as_str()) {
            return Err(Error::ConfigLine {
                line,
                message: format!("unknown key {key:?}"),
            });
        }
        if value.is_empty() {
            return Err(Error::ConfigLine {
                line,
                message: format!("empty value for {key}"),
            });
        }
        if let Some(prev) = map.get(&key) {
            let prev: &Entry = prev;
            return Err(Error::ConfigLine {
                line,
                message: format!("duplicate key {key} (first set on line {})", prev.line),
            });
        }
        map.insert(key, Entry { line, value });
    }
    Ok(Entries { map })
}

fn range_error(line: usize, message: String) -> Error {
    Error::ConfigLine { line, message }
}

/// Parses config text; `base_dir` resolves a relative `ic_path`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<ParsedConfig> {
    let mut entries = tokenize(text)?;
    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .copied()
        .filter(|k| !entries.map.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "missing required keys: {} (required: {})",
            missing.join(", "),
            REQUIRED_KEYS.join(", ")
        )));
    }

    let (l, n_x) = entries.required::<usize>("n_x")?;
    if n_x < 2 {
        return Err(range_error(l, format!("n_x must be at least 2, got {n_x}")));
    }
    let (l, n_v) = entries.required::<usize>("n_v")?;
    if n_v < 1 {
        return Err(range_error(l, format!("n_v must be at least 1, got {n_v}")));
    }
    let (l, v_max) = entries.required::<f64>("v_max")?;
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(range_error(l, format!("v_max must be positive, got {v_max}")));
    }
    let (l, eps) = entries.required::<f64>("eps")?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(range_error(l, format!("eps must be positive, got {eps}")));
    }
    let (l, t_final) = entries.required::<f64>("t_final")?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(range_error(l, format!("t_final must be nonnegative, got {t_final}")));
    }
    let (l, sigma) = entries.required::<f64>("sigma")?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(range_error(l, format!("sigma must lie in (0, 1), got {sigma}")));
    }

    let ic_rho = entries.parse::<f64>("ic_rho")?;
    let ic_u = entries.parse::<f64>("ic_u")?;
    let ic_temp = entries.parse::<f64>("ic_temp")?;
    let ic_path = entries.take("ic_path");
    let (ic_line, ic_kind) = entries.required::<String>("initial_condition")?;
    let uniform_only = |name: &str, v: &Option<(usize, f64)>| -> Result<()> {
        match v {
            Some((line, _)) => Err(range_error(
                *line,
                format!("{name} only applies to initial_condition = uniform_maxwellian"),
            )),
            None => Ok(()),
        }
    };
    let initial_condition = match ic_kind.as_str() {
        "paper_test" | "tabulated" => {
            uniform_only("ic_rho", &ic_rho)?;
            uniform_only("ic_u", &ic_u)?;
            uniform_only("ic_temp", &ic_temp)?;
            if ic_kind == "paper_test" {
                if let Some(p) = ic_path {
                    return Err(range_error(
                        p.line,
                        "ic_path only applies to initial_condition = tabulated".into(),
                    ));
                }
                InitialCondition::PaperTest
            } else {
                let p = ic_path
                    .ok_or_else(|| range_error(ic_line, "initial_condition = tabulated requires ic_path".into()))?;
                let path = resolve(base_dir, &p.value);
                let f = read_field_dump(&path)?;
                if f.n_x() != n_x || f.n_v() != n_v {
                    return Err(range_error(
                        p.line,
                        format!(
                            "tabulated data in {} has shape ({}, {}), config asks for ({n_x}, {n_v})",
                            path.display(),
                            f.n_x(),
                            f.n_v()
                        ),
                    ));
                }
                InitialCondition::Tabulated(Arc::new(f.to_interior_vec()))
            }
        }
        "uniform_maxwellian" => {
            if let Some(p) = ic_path {
                return Err(range_error(
                    p.line,
                    "ic_path only applies to initial_condition = tabulated".into(),
                ));
            }
            let rho = ic_rho.map(|(_, v)| v).unwrap_or(1.0);
            let u = ic_u.map(|(_, v)| v).unwrap_or(0.0);
            let temp = ic_temp.map(|(_, v)| v).unwrap_or(1.0);
            if !(rho > 0.0 && temp > 0.0 && u.is_finite()) {
                return Err(range_error(
                    ic_line,
                    format!("uniform Maxwellian needs ic_rho > 0 and ic_temp > 0, got ({rho}, {u}, {temp})"),
                ));
            }
            InitialCondition::UniformMaxwellian { rho, u, temp }
        }
        other => {
            return Err(range_error(
                ic_line,
                format!("initial_condition must be paper_test, uniform_maxwellian or tabulated, got {other:?}"),
            ))
        }
    };

    let diagnostics_every = entries
        .parse::<usize>("diagnostics_every")?
        .map(|(_, v)| v)
        .unwrap_or(0);
    let q_list = match entries.take("q_list") {
        None => vec![4.0, 5.0],
        Some(e) => {
            let mut qs = Vec::new();
            for tok in e.value.split(',') {
                let q: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| range_error(e.line, format!("cannot parse q_list entry {:?}", tok.trim())))?;
                if !(q > 3.0 && q.is_finite()) {
                    return Err(range_error(
                        e.line,
                        format!("q_list entry {q} violates the requirement q > 3"),
                    ));
                }
                qs.push(q);
            }
            qs
        }
    };
    let dt_policy = match entries.take("dt_policy") {
        None => DtPolicy::Adaptive,
        Some(e) => match e.value.as_str() {
            "adaptive" => DtPolicy::Adaptive,
            "fixed" => DtPolicy::Fixed,
            other => {
                return Err(range_error(
                    e.line,
                    format!("dt_policy must be adaptive or fixed, got {other:?}"),
                ))
            }
        },
    };
    let field_method = match entries.take("field_method") {
        None => FieldMethod::Direct,
        Some(e) => match e.value.as_str() {
            "direct" => FieldMethod::Direct,
            "prefix_sum" => FieldMethod::PrefixSum,
            other => {
                return Err(range_error(
                    e.line,
                    format!("field_method must be direct or prefix_sum, got {other:?}"),
                ))
            }
        },
    };
    let compensated_moments = entries.flag("compensated_moments")?;
    let snapshot_f = entries.flag("snapshot_f")?;
    let zero_field = entries.flag("zero_field")?;
    let collisionless = entries.flag("collisionless")?;
    let levels = entries.parse::<usize>("levels")?;

    let config = SolverConfig {
        n_x,
        n_v,
        v_max,
        eps,
        t_final,
        sigma,
        initial_condition,
        diagnostics_every,
        q_list,
        dt_policy,
        field_method,
        compensated_moments,
        snapshot_f,
        zero_field,
        collisionless,
    };
    config.validate()?;

    match levels {
        None => Ok(ParsedConfig::Run(config)),
        Some((line, levels)) => {
            if levels < 2 {
                return Err(range_error(line, format!("levels must be at least 2, got {levels}")));
            }
            if matches!(config.initial_condition, InitialCondition::Tabulated(_)) {
                return Err(range_error(
                    line,
                    "tabulated initial data cannot be refined across levels".into(),
                ));
            }
            Ok(ParsedConfig::Study(StudyConfig { base: config, levels }))
        }
    }
}

fn resolve(base_dir: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ParsedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, base)
}

/// Canonical text form of a config. Tabulated data is written as
/// `ic_path = <tabulated>` and so does not re-parse.
pub fn render_config(config: &SolverConfig, levels: Option<usize>) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("n_x", config.n_x.to_string());
    kv("n_v", config.n_v.to_string());
    kv("v_max", format!("{:?}", config.v_max));
    kv("eps", format!("{:?}", config.eps));
    kv("t_final", format!("{:?}", config.t_final));
    kv("sigma", format!("{:?}", config.sigma));
    kv("initial_condition", config.initial_condition.label().to_string());
    match &config.initial_condition {
        InitialCondition::UniformMaxwellian { rho, u, temp } => {
            kv("ic_rho", format!("{rho:?}"));
            kv("ic_u", format!("{u:?}"));
            kv("ic_temp", format!("{temp:?}"));
        }
        InitialCondition::Tabulated(_) => kv("ic_path", "<tabulated>".into()),
        InitialCondition::PaperTest => {}
    }
    kv("diagnostics_every", config.diagnostics_every.to_string());
    kv(
        "q_list",
        config
            .q_list
            .iter()
            .map(|q| format!("{q:?}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    kv("dt_policy", config.dt_policy.label().to_string());
    kv(
        "field_method",
        match config.field_method {
            FieldMethod::Direct => "direct",
            FieldMethod::PrefixSum => "prefix_sum",
        }
        .to_string(),
    );
    kv("compensated_moments", config.compensated_moments.to_string());
    kv("snapshot_f", config.snapshot_f.to_string());
    kv("zero_field", config.zero_field.to_string());
    kv("collisionless", config.collisionless.to_string());
    if let Some(levels) = levels {
        kv("levels", levels.to_string());
    }
    out
}
