//! JSON document envelope shared by every input file.
//!
//! Documents are JSON objects carrying `"schema_version": "1"` at the top
//! level. Parsing happens in two steps: first to a generic JSON value, which
//! gives position-annotated syntax errors; then into the typed structure,
//! which gives field-path-annotated structural errors.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

/// Parses raw JSON text into a value, reporting syntax errors by position.
pub fn parse_json(source: &str) -> Result<Value> {
    serde_json::from_str(source).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

/// Parses a standalone document: envelope check, then typed decode.
pub fn parse_document<T: DeserializeOwned>(source: &str) -> Result<T> {
    let value = parse_json(source)?;
    let body = take_envelope(value)?;
    decode(Value::Object(body), "")
}

/// Removes and checks `schema_version`, returning the remaining fields.
pub fn take_envelope(value: Value) -> Result<Map<String, Value>> {
    let Value::Object(mut map) = value else {
        return Err(Error::TypeMismatch { path: String::new(), message: "document must be a JSON object".into() });
    };
    match map.remove("schema_version") {
        Some(Value::String(v)) if v == SCHEMA_VERSION => Ok(map),
        Some(Value::String(v)) => Err(Error::SchemaVersion { found: Some(v) }),
        Some(other) => Err(Error::SchemaVersion { found: Some(other.to_string()) }),
        None => Err(Error::SchemaVersion { found: None }),
    }
}

/// Decodes a JSON value into `T`, prefixing error paths with `prefix`.
pub fn decode<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize::<_, T>(value).map_err(|err| {
        let at = err.path().to_string();
        let at = if at == "." { String::new() } else { at };
        let message = err.into_inner().to_string();
        classify(join(prefix, &at), message)
    })
}

/// Serializes `body` as a versioned document (pretty JSON, trailing newline).
pub fn to_document<T: Serialize>(body: &T) -> Result<String> {
    let value =
        serde_json::to_value(body).map_err(|e| Error::TypeMismatch { path: String::new(), message: e.to_string() })?;
    let mut map = Map::new();
    map.insert("schema_version".into(), Value::String(SCHEMA_VERSION.into()));
    if let Value::Object(fields) = value {
        map.extend(fields);
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(map)).expect("value serializes");
    out.push('\n');
    Ok(out)
}

fn join(prefix: &str, path: &str) -> String {
    match (prefix.is_empty(), path.is_empty()) {
        (true, _) => path.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) if path.starts_with('[') => format!("{prefix}{path}"),
        (false, false) => format!("{prefix}.{path}"),
    }
}

fn classify(path: String, message: String) -> Error {
    if let Some(field) = backticked(&message, "missing field `") {
        return Error::MissingField { path: join(&path, field) };
    }
    if let Some(field) = backticked(&message, "unknown field `") {
        // The path tracker already points at the offending key.
        let path = if path == field || path.ends_with(&format!(".{field}")) { path } else { join(&path, field) };
        return Error::UnknownField { path };
    }
    if let Some(variant) = backticked(&message, "unknown variant `") {
        return Error::TypeMismatch { path, message: format!("unknown variant `{variant}`") };
    }
    Error::TypeMismatch { path, message }
}

fn backticked<'a>(message: &'a str, lead: &str) -> Option<&'a str> {
    let rest = message.strip_prefix(lead)?;
    rest.find('`').map(|end| &rest[..end])
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(idx) => message[..idx].to_string(),
        None => message.to_string(),
    }
}
