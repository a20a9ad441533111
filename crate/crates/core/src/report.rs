use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Pass iff `value <= threshold`.
    Le,
    /// Pass iff `value >= threshold`.
    Ge,
}

/// One numeric verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub standard_error: Option<f64>,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Relation::Le)
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Relation::Ge)
    }

    /// A boolean condition recorded as value 1 (true) or 0 against threshold 1.
    pub fn holds(name: impl Into<String>, cond: bool) -> Self {
        Self::ge(name, if cond { 1.0 } else { 0.0 }, 1.0)
    }

    fn new(name: impl Into<String>, value: f64, threshold: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Le => value <= threshold,
            Relation::Ge => value >= threshold,
        };
        Self { name: name.into(), value, standard_error: None, threshold, relation, pass }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.standard_error = Some(se);
        self
    }
}

/// Outcome of a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    /// The fully resolved configuration, sufficient to re-run the scenario.
    pub config: serde_json::Value,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub duration_secs: f64,
}

impl Report {
    pub fn new(scenario: impl Into<String>, config: serde_json::Value, seed: u64, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { scenario: scenario.into(), config, seed, checks, pass, duration_secs: 0.0 }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_is_conjunction() {
        let r = Report::new("x", serde_json::Value::Null, 0, vec![Check::le("a", 1.0, 2.0), Check::ge("b", 1.0, 2.0)]);
        assert!(!r.pass);
        assert!(r.check("a").unwrap().pass);
        assert!(Report::new("x", serde_json::Value::Null, 0, vec![Check::holds("c", true)]).pass);
    }
}
