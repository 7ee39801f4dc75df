//! Config file loading and `--set key=value` overrides.

use std::path::Path;

use ra_sim_core::engine::ScenarioConfig;
use toml::{Table, Value};

use crate::error::CliError;

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string so `--set antenna.mode=fixed` works unquoted.
pub fn parse_value(raw: &str) -> Value {
    match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Sets a dotted key, creating intermediate tables as needed.
pub fn set_path(root: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Validation(format!("override key `{key}` is malformed")));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut node = root;
    for p in parents {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::Validation(format!("override key `{key}`: `{p}` is not a table"))),
        };
    }
    node.insert(last.to_string(), value);
    Ok(())
}

pub fn apply_override(root: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{assignment}` must look like key=value")))?;
    set_path(root, key.trim(), parse_value(raw.trim()))
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Deserializes and validates, reporting every violated rule.
pub fn finish(table: Table) -> Result<ScenarioConfig, CliError> {
    let cfg: ScenarioConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Validation(e.to_string()))?;
    let issues = cfg.validate();
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Validation(
            issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n"),
        ))
    }
}

pub fn load(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    let mut table = read_table(path)?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    finish(table)
}

pub fn to_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string_pretty(cfg).expect("config always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_tables() {
        let mut t = Table::new();
        apply_override(&mut t, "camera.hfov_deg=45").unwrap();
        apply_override(&mut t, "antenna.mode=fixed").unwrap();
        apply_override(&mut t, "seed = 9").unwrap();
        let cfg = finish(t).unwrap();
        assert_eq!(cfg.camera.hfov_deg, 45.0);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.antenna.mode, ra_sim_core::engine::config::AntennaModeKind::Fixed);
    }

    #[test]
    fn malformed_override_rejected() {
        let mut t = Table::new();
        assert!(apply_override(&mut t, "duration_s").is_err());
        assert!(apply_override(&mut t, "a..b=1").is_err());
    }

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = ScenarioConfig::default();
        let back = finish(toml::from_str(&to_toml(&cfg)).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn integer_field_accepts_float_literal_only_when_whole() {
        let mut t = Table::new();
        apply_override(&mut t, "duration_s=5").unwrap();
        // integer literal into a float field
        assert_eq!(finish(t).unwrap().duration_s, 5.0);
    }
}
