//! Scenario documents: a single config, or a base config swept over one
//! parameter.

use aoc_core::sim::ScenarioConfig;
use aoc_core::Error as CoreError;
use serde_json::{Map, Value};
use std::path::Path;
use thiserror::Error;

pub const BUILTINS: &[(&str, &str)] = &[
    ("small-4x4", include_str!("../scenarios/small-4x4.json")),
    ("large-10x10", include_str!("../scenarios/large-10x10.json")),
    ("orientation-4x4", include_str!("../scenarios/orientation-4x4.json")),
    ("scalability-50x50", include_str!("../scenarios/scalability-50x50.json")),
    ("noise-sweep", include_str!("../scenarios/noise-sweep.json")),
    ("moving-anchor", include_str!("../scenarios/moving-anchor.json")),
    ("moving-density", include_str!("../scenarios/moving-density.json")),
];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: invalid `{field}`: {message}")]
    Invalid {
        origin: String,
        field: String,
        message: String,
    },
    #[error("no built-in scenario or file named `{0}`")]
    Unknown(String),
}

/// One concrete config of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// `parameter=value` for sweep points, `None` for single documents.
    pub label: Option<String>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    /// JSON pointer of the swept field, if any.
    pub parameter: Option<String>,
    pub points: Vec<SweepPoint>,
}

impl Scenario {
    pub fn is_sweep(&self) -> bool {
        self.parameter.is_some()
    }
}

fn parse_error(origin: &str, e: serde_json::Error) -> LoadError {
    LoadError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn invalid(origin: &str, e: CoreError) -> LoadError {
    match e {
        CoreError::Config { field, message } => LoadError::Invalid {
            origin: origin.to_string(),
            field,
            message,
        },
        other => LoadError::Invalid {
            origin: origin.to_string(),
            field: String::new(),
            message: other.to_string(),
        },
    }
}

fn checked(mut config: ScenarioConfig, origin: &str, name: &str) -> Result<ScenarioConfig, LoadError> {
    if config.name.is_empty() {
        config.name = name.to_string();
    }
    config.validate().map_err(|e| invalid(origin, e))?;
    Ok(config)
}

/// Writes `value` at JSON pointer `pointer`, creating objects on the way.
fn set_pointer(root: &mut Value, pointer: &str, value: Value) -> Result<(), String> {
    if !pointer.starts_with('/') || pointer.len() < 2 {
        return Err(format!("`{pointer}` is not a JSON pointer to a field"));
    }
    let mut node = root;
    let parts: Vec<String> = pointer[1..].split('/').map(|p| p.replace("~1", "/").replace("~0", "~")).collect();
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.clone(), value);
                    return Ok(());
                }
                map.entry(part.clone()).or_insert_with(|| Value::Object(Map::new()))
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| format!("`{part}` is not an array index"))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| format!("index {idx} is out of range for {len} items"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("`{part}` does not name an object field")),
        };
    }
    unreachable!("pointer has at least one segment")
}

fn label_for(pointer: &str, value: &Value) -> String {
    let key = pointer.rsplit('/').next().unwrap_or(pointer);
    let v = match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    format!("{key}={v}")
}

/// Parses a scenario document. `origin` names it in error messages and
/// becomes the default scenario name.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, LoadError> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    let default_name = Path::new(origin)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(origin)
        .to_string();
    let is_sweep = value.as_object().is_some_and(|m| m.contains_key("sweep"));
    if !is_sweep {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
        let config = checked(config, origin, &default_name)?;
        return Ok(Scenario {
            name: config.name.clone(),
            description: config.description.clone(),
            parameter: None,
            points: vec![SweepPoint { label: None, config }],
        });
    }

    let bad = |field: &str, message: String| LoadError::Invalid {
        origin: origin.to_string(),
        field: field.to_string(),
        message,
    };
    let doc = value.as_object().unwrap();
    for key in doc.keys() {
        if !matches!(key.as_str(), "name" | "description" | "base" | "sweep") {
            return Err(bad(key, "unknown key in a sweep document".into()));
        }
    }
    let text_field = |key: &str| -> Result<Option<String>, LoadError> {
        match doc.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(bad(key, "must be a string".into())),
        }
    };
    let name = text_field("name")?.unwrap_or(default_name);
    let description = text_field("description")?.unwrap_or_default();
    let base = doc.get("base").ok_or_else(|| bad("base", "a sweep document needs a base config".into()))?;
    if !base.is_object() {
        return Err(bad("base", "must be an object".into()));
    }
    let sweep = doc["sweep"].as_object().ok_or_else(|| bad("sweep", "must be an object".into()))?;
    for key in sweep.keys() {
        if !matches!(key.as_str(), "parameter" | "values") {
            return Err(bad(&format!("sweep.{key}"), "unknown key".into()));
        }
    }
    let parameter = sweep
        .get("parameter")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("sweep.parameter", "must be a JSON pointer string such as \"/robots\"".into()))?
        .to_string();
    let values = sweep
        .get("values")
        .and_then(Value::as_array)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| bad("sweep.values", "must be a non-empty array".into()))?;

    let mut points = Vec::with_capacity(values.len());
    for v in values {
        let label = label_for(&parameter, v);
        let mut doc = base.clone();
        set_pointer(&mut doc, &parameter, v.clone()).map_err(|m| bad("sweep.parameter", m))?;
        let point_origin = format!("{origin} [{label}]");
        let config: ScenarioConfig = serde_json::from_value(doc).map_err(|e| LoadError::Invalid {
            origin: point_origin.clone(),
            field: "base".into(),
            message: e.to_string(),
        })?;
        let mut config = checked(config, &point_origin, &name)?;
        config.name = name.clone();
        points.push(SweepPoint {
            label: Some(label),
            config,
        });
    }
    Ok(Scenario {
        name,
        description,
        parameter: Some(parameter),
        points,
    })
}

/// Reads and validates a scenario document from disk.
pub fn load_document(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Reads a single-config document and returns its validated config.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, LoadError> {
    let scenario = load_document(path)?;
    if scenario.is_sweep() {
        return Err(LoadError::Invalid {
            origin: path.display().to_string(),
            field: "sweep".into(),
            message: "document describes a sweep, not a single scenario".into(),
        });
    }
    Ok(scenario.points.into_iter().next().unwrap().config)
}

pub fn builtin(name: &str) -> Option<Scenario> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(n, text)| {
        parse_scenario(text, &format!("{n}.json")).unwrap_or_else(|e| panic!("built-in scenario {n} is invalid: {e}"))
    })
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// A built-in name, or else a path on disk.
pub fn resolve(name_or_path: &str) -> Result<Scenario, LoadError> {
    if let Some(s) = builtin(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        load_document(path)
    } else {
        Err(LoadError::Unknown(name_or_path.to_string()))
    }
}
