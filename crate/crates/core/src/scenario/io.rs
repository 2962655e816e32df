//! Scenario file ingestion and emission.
//!
//! Scenarios are stored as versioned JSON. Field order follows the struct
//! declaration, and serialization is canonical: re-serializing a loaded
//! scenario reproduces the original bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioError, CURRENT_SCHEMA_VERSION};

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    version: u32,
    #[serde(flatten)]
    scenario: Scenario,
}

/// Load and fully validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let file: ScenarioFile = serde_json::from_str(&text)?;
    if file.version != CURRENT_SCHEMA_VERSION {
        return Err(ScenarioError::Version(file.version));
    }
    file.scenario.validate()?;
    Ok(file.scenario)
}

/// Canonical JSON serialization of a scenario (with schema version header).
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        version: CURRENT_SCHEMA_VERSION,
        scenario: scenario.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scenario serialization");
    text.push('\n');
    text
}

/// Write a scenario to disk in the canonical format.
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    std::fs::write(path, scenario_to_json(scenario))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::minimal_scenario;
    use super::*;

    #[test]
    fn minimal_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("minimal.json");
        save_scenario(&minimal_scenario(), &path).unwrap();
        let sc = load_scenario(&path).unwrap();
        assert_eq!(sc.agents.len(), 0);
        assert_eq!(sc.horizon, 10);
    }

    #[test]
    fn zero_dt_rejected_with_field_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut sc = minimal_scenario();
        sc.dt = 0.0;
        std::fs::write(&path, scenario_to_json(&sc)).unwrap();
        let err = load_scenario(&path).unwrap_err();
        match err {
            ScenarioError::Invariant { field, .. } => assert_eq!(field, "dt"),
            other => panic!("expected invariant error, got {other}"),
        }
    }

    #[test]
    fn parse_error_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{ \"version\": 1, \"dt\": }").unwrap();
        let err = load_scenario(&path).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)));
        // serde_json reports line/column context.
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn wrong_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.json");
        let text = scenario_to_json(&minimal_scenario()).replace("\"version\": 1", "\"version\": 9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load_scenario(&path),
            Err(ScenarioError::Version(9))
        ));
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let sc = minimal_scenario();
        let first = scenario_to_json(&sc);
        let reparsed: Scenario = {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.json");
            std::fs::write(&path, &first).unwrap();
            load_scenario(&path).unwrap()
        };
        let second = scenario_to_json(&reparsed);
        assert_eq!(first, second);
    }
}
