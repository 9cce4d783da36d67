//! Shared JSON plumbing for the file loaders and emitters.

use serde::Serialize;
use serde_json::Value;

/// Parses `bytes` as a JSON object. In strict mode any top-level key outside
/// `allowed` is rejected.
pub(crate) fn parse_object(bytes: &[u8], strict: bool, allowed: &[&str]) -> Result<Value, String> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    let Some(obj) = value.as_object() else {
        return Err("expected a JSON object at top level".into());
    };
    if strict {
        if let Some(key) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("unknown top-level key {key:?}"));
        }
    }
    Ok(value)
}

/// Pretty JSON with a trailing newline, keys in declaration order.
pub(crate) fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("in-memory serialization");
    out.push('\n');
    out
}

/// Pretty JSON with object keys sorted at every level.
pub(crate) fn to_canonical<T: Serialize>(value: &T) -> String {
    // serde_json's Map is a BTreeMap unless `preserve_order` is enabled.
    let value = serde_json::to_value(value).expect("in-memory serialization");
    to_pretty(&value)
}
