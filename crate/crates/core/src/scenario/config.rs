use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 12345;
pub const DEFAULT_STREAMS: usize = 8;

/// Shared keys plus the untyped scenario keys, which are validated by [`super::prepare`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: u64,
    pub streams: usize,
    pub out: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
    pub params: Map<String, Value>,
}

impl ScenarioConfig {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            seed: DEFAULT_SEED,
            streams: DEFAULT_STREAMS,
            out: None,
            tolerances: BTreeMap::new(),
            params: Map::new(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let Value::Object(mut map) = v else {
            return Err(Error::Config("config must be a JSON object".into()));
        };
        let scenario = match map.remove("scenario") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(Error::Config("`scenario` must be a string".into())),
            None => return Err(Error::Config("missing `scenario`".into())),
        };
        let mut c = Self::new(scenario);
        if let Some(v) = map.remove("seed") {
            c.seed = v.as_u64().ok_or_else(|| Error::Config("`seed` must be a non-negative integer".into()))?;
        }
        if let Some(v) = map.remove("streams") {
            c.streams = v
                .as_u64()
                .filter(|s| *s >= 1)
                .ok_or_else(|| Error::Config("`streams` must be a positive integer".into()))?
                as usize;
        }
        match map.remove("out") {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) => c.out = Some(PathBuf::from(s)),
            Some(_) => return Err(Error::Config("`out` must be a path string".into())),
        }
        if let Some(v) = map.remove("tolerances") {
            c.tolerances = serde_json::from_value(v)
                .map_err(|e| Error::Config(format!("`tolerances` must map names to numbers: {e}")))?;
        }
        c.params = map;
        Ok(c)
    }

    /// Sets a scenario key, replacing any earlier value.
    pub fn set(&mut self, key: impl Into<String>, value: Value) {
        self.params.insert(key.into(), value);
    }
}

/// Parses a command-line override value: JSON when it parses, a comma list of JSON
/// values when it contains commas, otherwise a plain string.
pub fn parse_override(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        let parts: Vec<Value> = raw.split(',').map(|p| parse_override(p.trim())).collect();
        return Value::Array(parts);
    }
    Value::String(raw.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn shared_keys_are_split_off() {
        let c = ScenarioConfig::from_json(r#"{"scenario":"lan","seed":7,"n":100,"tolerances":{"x":0.1}}"#).unwrap();
        assert_eq!(c.scenario, "lan");
        assert_eq!(c.seed, 7);
        assert_eq!(c.streams, DEFAULT_STREAMS);
        assert_eq!(c.params.get("n"), Some(&json!(100)));
        assert_eq!(c.tolerances.get("x"), Some(&0.1));
    }

    #[test]
    fn malformed_configs() {
        for bad in [r#"[1]"#, r#"{"n":1}"#, r#"{"scenario":1}"#, r#"{"scenario":"x","seed":-1}"#, "{", r#"{"scenario":"x","streams":0}"#] {
            assert!(matches!(ScenarioConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn override_values() {
        assert_eq!(parse_override("0.5"), json!(0.5));
        assert_eq!(parse_override("0.25,0.5,1"), json!([0.25, 0.5, 1]));
        assert_eq!(parse_override("[1,2]"), json!([1, 2]));
        assert_eq!(parse_override("noisy_mean"), json!("noisy_mean"));
        assert_eq!(parse_override("scaled:2"), json!("scaled:2"));
    }
}
