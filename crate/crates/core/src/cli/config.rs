use std::path::Path;

use serde::de::DeserializeOwned;
use toml::{Table, Value};

use crate::error::{config, Error, Result};

/// Reads a TOML file, applies `key=value` overrides, and deserializes it.
///
/// Keys are dotted paths into the document; only scalar values may be set.
pub fn load<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut table: Table = text
        .parse()
        .map_err(|e| config(format!("{}: {e}", path.display())))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| config(format!("{}: {}", path.display(), e.message())))
}

fn parse_scalar(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn apply_override(table: &mut Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| config(format!("override '{item}' is not KEY=VALUE")))?;
    let value = parse_scalar(raw.trim());
    if matches!(value, Value::Table(_) | Value::Array(_)) {
        return Err(config(format!("override '{item}' must set a scalar")));
    }
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config(format!("override key '{key}' is malformed")));
    }
    let (last, parents) = parts.split_last().expect("split yields one part");
    let mut node = table;
    for p in parents {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| config(format!("override key '{key}': '{p}' is not a table")))?;
    }
    if let Some(Value::Table(_) | Value::Array(_)) = node.get(*last) {
        return Err(config(format!(
            "override key '{key}' names a table or array"
        )));
    }
    node.insert(last.to_string(), value);
    Ok(())
}
