use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    validate_instance, EquilibriumResult, MarketInstance, ModelKind, UtilityParams,
    ValidationReport,
};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("agent {agent}: custom utilities cannot be serialized")]
    CustomNotSerializable { agent: usize },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct InstanceFile {
    pub model: ModelKind,
    pub agents: Vec<AgentEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct AgentEntry {
    pub a: f64,
    pub utility: UtilityEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub(crate) enum UtilityEntry {
    #[serde(rename = "quadratic")]
    Quadratic { b: f64, m: f64 },
    #[serde(rename = "pwl")]
    Pwl { beta: f64, phi: f64 },
}

impl InstanceFile {
    fn from_instance(instance: &MarketInstance) -> Result<Self, InstanceError> {
        let agents = instance
            .production
            .iter()
            .zip(&instance.preferences)
            .enumerate()
            .map(|(agent, (&a, p))| {
                let utility = match p {
                    UtilityParams::Quadratic { b, m } => UtilityEntry::Quadratic { b: *b, m: *m },
                    UtilityParams::PiecewiseLinear { beta, phi } => {
                        UtilityEntry::Pwl { beta: *beta, phi: *phi }
                    }
                    UtilityParams::Custom(_) => {
                        return Err(InstanceError::CustomNotSerializable { agent })
                    }
                };
                Ok(AgentEntry { a, utility })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { model: instance.model, agents })
    }

    fn into_instance(self) -> MarketInstance {
        let (production, preferences) = self
            .agents
            .into_iter()
            .map(|e| {
                let p = match e.utility {
                    UtilityEntry::Quadratic { b, m } => UtilityParams::quadratic(b, m),
                    UtilityEntry::Pwl { beta, phi } => UtilityParams::pwl(beta, phi),
                };
                (e.a, p)
            })
            .unzip();
        MarketInstance { model: self.model, production, preferences }
    }
}

/// Parse and validate an instance from JSON text.
pub fn parse_instance(text: &str) -> Result<MarketInstance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let instance = file.into_instance();
    let report = validate_instance(&instance);
    if report.is_ok() {
        Ok(instance)
    } else {
        Err(InstanceError::Invalid(report))
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<MarketInstance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| InstanceError::Io { path: path.to_path_buf(), source })?;
    parse_instance(&text)
}

pub fn save_instance(instance: &MarketInstance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    let text = instance_to_string(instance)?;
    fs::write(path, text).map_err(|source| InstanceError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn instance_to_string(instance: &MarketInstance) -> Result<String, InstanceError> {
    let file = InstanceFile::from_instance(instance)?;
    Ok(serde_json::to_string_pretty(&file).expect("instance file serializes"))
}

#[derive(Serialize)]
struct ResultFile<'a> {
    model: ModelKind,
    agents: &'a [AgentEntry],
    #[serde(flatten)]
    result: &'a EquilibriumResult,
}

/// Instance schema extended with the equilibrium fields.
pub fn to_json(
    instance: &MarketInstance,
    result: &EquilibriumResult,
) -> Result<serde_json::Value, InstanceError> {
    let file = InstanceFile::from_instance(instance)?;
    let out = ResultFile { model: file.model, agents: &file.agents, result };
    Ok(serde_json::to_value(out).expect("result serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE1: &str = r#"{
        "model": "mtes",
        "agents": [
            {"a": 5, "utility": {"kind": "quadratic", "b": 2, "m": 6}},
            {"a": 8, "utility": {"kind": "quadratic", "b": 5, "m": 5}},
            {"a": 7, "utility": {"kind": "quadratic", "b": 3, "m": 6}},
            {"a": 0, "utility": {"kind": "quadratic", "b": 10, "m": 5}}
        ]
    }"#;

    #[test]
    fn parses_example1() {
        let inst = parse_instance(EXAMPLE1).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.capacity(), 20.0);
        assert_eq!(inst.model, ModelKind::Mtes);
    }

    #[test]
    fn empty_agent_list() {
        let err = parse_instance(r#"{"model": "mtes", "agents": []}"#).unwrap_err();
        assert!(err.to_string().contains("n >= 1"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"model": "mtes", "agents": [{"a": 1, "extra": 2,
            "utility": {"kind": "pwl", "beta": 1, "phi": 1}}]}"#;
        assert!(matches!(parse_instance(text), Err(InstanceError::Parse { .. })));
        let text = r#"{"model": "mtes", "agents": [{"a": 1,
            "utility": {"kind": "pwl", "beta": 1, "phi": 1, "m": 3}}]}"#;
        assert!(matches!(parse_instance(text), Err(InstanceError::Parse { .. })));
    }

    #[test]
    fn parse_error_carries_position() {
        let err = parse_instance("{\n  \"model\": \"mtes\",\n  \"agents\": [ oops ]\n}").unwrap_err();
        match err {
            InstanceError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_numbers_rejected() {
        let text = r#"{"model": "mtes", "agents": [{"a": NaN,
            "utility": {"kind": "pwl", "beta": 1, "phi": 1}}]}"#;
        assert!(parse_instance(text).is_err());
        let text = r#"{"model": "mtes", "agents": [{"a": 1e999,
            "utility": {"kind": "pwl", "beta": 1, "phi": 1}}]}"#;
        assert!(parse_instance(text).is_err());
    }

    #[test]
    fn mixed_families_load() {
        let text = r#"{"model": "mtes_st", "agents": [
            {"a": 1, "utility": {"kind": "pwl", "beta": 1, "phi": 1}},
            {"a": 2, "utility": {"kind": "quadratic", "b": 1, "m": 1}}]}"#;
        let inst = parse_instance(text).unwrap();
        assert!(inst.requires_generic_solver());
        assert_eq!(inst.model, ModelKind::MtesSt);
    }

    #[test]
    fn custom_cannot_be_saved() {
        let inst = MarketInstance::new(
            ModelKind::Mtes,
            vec![1.0],
            vec![UtilityParams::custom("log", f64::ln_1p, |x| 1.0 / (1.0 + x))],
        );
        assert!(matches!(
            instance_to_string(&inst),
            Err(InstanceError::CustomNotSerializable { agent: 0 })
        ));
    }

    fn finite_decimal() -> impl Strategy<Value = f64> {
        // Decimal literals with up to 6 fractional digits.
        (1u64..=100_000_000).prop_map(|k| k as f64 / 1e6)
    }

    proptest! {
        #[test]
        fn save_load_round_trip_is_bit_exact(
            agents in prop::collection::vec(
                (finite_decimal(), finite_decimal(), finite_decimal(), any::<bool>()), 1..20),
            st in any::<bool>(),
        ) {
            let model = if st { ModelKind::MtesSt } else { ModelKind::Mtes };
            let production = agents.iter().map(|t| t.0).collect();
            let preferences = agents
                .iter()
                .map(|&(_, p, q, quad)| if quad { UtilityParams::quadratic(p, q) } else { UtilityParams::pwl(p, q) })
                .collect();
            let inst = MarketInstance::new(model, production, preferences);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("inst.json");
            save_instance(&inst, &path).unwrap();
            let back = load_instance(&path).unwrap();
            prop_assert_eq!(back.model, inst.model);
            for (x, y) in back.production.iter().zip(&inst.production) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            for (x, y) in back.preferences.iter().zip(&inst.preferences) {
                let bits = |u: &UtilityParams| match u {
                    UtilityParams::Quadratic { b, m } => (0, b.to_bits(), m.to_bits()),
                    UtilityParams::PiecewiseLinear { beta, phi } => (1, beta.to_bits(), phi.to_bits()),
                    UtilityParams::Custom(_) => unreachable!(),
                };
                prop_assert_eq!(bits(x), bits(y));
            }
        }
    }
}
