//! Loading JSON input files with JSON-pointer error locations.

use std::fs;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::output::{usage, CliError};

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = pointer(e.path());
        let at = if at.is_empty() { "/".to_string() } else { at };
        CliError::Usage(format!("{what}: schema violation at {at}: {}", e.inner()))
    })
}

pub fn read_text(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))
}

pub fn load<T: DeserializeOwned>(path: &str) -> Result<T, CliError> {
    parse_json(&read_text(path)?, path)
}

/// Flags appended after the user's arguments so that config values win.
pub fn config_args(path: &str) -> Result<Vec<String>, CliError> {
    let Value::Object(map) = parse_json::<Value>(&read_text(path)?, path)? else {
        return usage(format!("{path}: config must be a JSON object"));
    };
    let mut args = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => args.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => args.extend([flag, s]),
            Value::Number(n) => args.extend([flag, n.to_string()]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                args.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => return usage(format!("{path}: /{key} must be a scalar or an array")),
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use diracspec::potential::PotentialSpec;

    #[test]
    fn schema_errors_carry_pointers() {
        let err = parse_json::<PotentialSpec>(r#"{"family":"gaussian","n":2,"params":{"amplitude":"x"}}"#, "pot")
            .unwrap_err();
        let CliError::Usage(msg) = err else { panic!() };
        assert!(msg.contains("/params/amplitude"), "{msg}");
        let err = parse_json::<PotentialSpec>(r#"{"family":"cubic","n":2}"#, "pot").unwrap_err();
        let CliError::Usage(msg) = err else { panic!() };
        assert!(msg.contains("/family"), "{msg}");
    }
}
