use std::collections::BTreeSet;

use peres_bench::config::ReferenceChoice;
use peres_bench::{BenchError, RunConfig};
use peres_core::forward::{CrosstalkConvention, ImperfectionSpec};
use serde_json::Value;

const MINIMAL: &str = r#"{
    "source": {"t_a": 0.26, "t_b": 0.52, "t_c": 0.22},
    "phases": {"dphi_bc": 2.50861677, "dphi_ca": -0.27844392, "dphi_ab": -2.23017285}
}"#;

const FULL_23C: &str = r#"{
    "source": {"p_in": 1e-6, "t_a": 0.26, "t_b": 0.52, "t_c": 0.22, "p_dark": 0.0},
    "phases": {"dphi_bc": 2.50861677, "dphi_ca": -0.27844392, "dphi_ab": -2.23017285},
    "residual": {"tau": 2.2e-4, "phi_sh": 3.141592653589793},
    "crosstalk": {"dphi_dh": -0.0064, "convention": "comoving_plus"},
    "fluctuations": {"sigma_pin_rel": 0.0032, "sigma_phase": 0.01, "sigma_phase_fast": 0.002, "sigma_sample_rel": 0.001},
    "nonlinearity": {"c2": 1e-3, "c3": 0.0, "max_power_w": 1e-3},
    "polarization": {"h_fraction_a": 0.99, "h_fraction_b": 1.0, "h_fraction_c": 0.98,
                     "phases_v": {"dphi_bc": 0.1, "dphi_ca": 0.2, "dphi_ab": -0.3},
                     "polarizer_enabled": true},
    "protocol": {"n_cycles": 200, "samples_per_setting": 10, "setting_duration_s": 13.0, "housing_temp_c": 23.0},
    "seed": 42,
    "analysis": {"mc_samples": 1000, "sweep_points": 361, "delta_c": 2e-6,
                 "filter_malfunctions": true, "malfunction_threshold": 4.0, "reference": "23c"}
}"#;

fn config_error(text: &str) -> (String, String) {
    match RunConfig::from_json(text).unwrap_err() {
        BenchError::Config { path, message } => (path, message),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn minimal_config_disables_everything() {
    let cfg = RunConfig::from_json(MINIMAL).unwrap();
    assert_eq!(cfg.imperfections(), ImperfectionSpec::default());
    assert_eq!(cfg.source.p_in, 1e-6);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.analysis.reference, None);
}

#[test]
fn negative_tau_is_rejected_with_key_path() {
    let text = MINIMAL.replacen("\"source\"", "\"residual\": {\"tau\": -1},\n    \"source\"", 1);
    let (path, message) = config_error(&text);
    assert_eq!(path, "residual.tau");
    assert!(message.contains("residual.tau must be ≥ 0"), "{message}");
}

#[test]
fn full_config_round_trips() {
    let cfg = RunConfig::from_json(FULL_23C).unwrap();
    assert_eq!(cfg.crosstalk.convention, CrosstalkConvention::ComovingPlus);
    assert_eq!(cfg.analysis.reference, Some(ReferenceChoice::Housing23c));
    let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_keys_are_rejected_with_path() {
    let text = FULL_23C.replace("\"phi_sh\"", "\"phi_shutter\"");
    let (path, message) = config_error(&text);
    assert_eq!(path, "residual.phi_shutter");
    assert!(message.contains("phi_shutter"), "{message}");
    let text = FULL_23C.replace("\"seed\"", "\"sed\"");
    let (_, message) = config_error(&text);
    assert!(message.contains("sed"), "{message}");
}

#[test]
fn analysis_ranges_are_checked() {
    let text = FULL_23C.replace("\"mc_samples\": 1000", "\"mc_samples\": 1");
    assert_eq!(config_error(&text).0, "analysis.mc_samples");
    let text = FULL_23C.replace("\"delta_c\": 2e-6", "\"delta_c\": 1.5");
    assert_eq!(config_error(&text).0, "analysis.delta_c");
}

fn collect_keys(v: &Value, prefix: &str, out: &mut BTreeSet<String>) {
    if let Value::Object(map) = v {
        for (k, child) in map {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            out.insert(path.clone());
            collect_keys(child, &path, out);
        }
    }
}

fn schema_keys(schema: &Value, node: &Value, prefix: &str, out: &mut BTreeSet<String>) {
    let node = match node.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let name = r.trim_start_matches("#/$defs/");
            &schema["$defs"][name]
        }
        None => node,
    };
    if let Some(Value::Object(props)) = node.get("properties") {
        for (k, child) in props {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            out.insert(path.clone());
            schema_keys(schema, child, &path, out);
        }
    }
}

#[test]
fn schema_matches_serialized_config() {
    let schema: Value =
        serde_json::from_str(include_str!("../schema/run-config.schema.json")).unwrap();
    let mut documented = BTreeSet::new();
    schema_keys(&schema, &schema, "", &mut documented);
    let cfg = RunConfig::from_json(FULL_23C).unwrap();
    let mut serialized = BTreeSet::new();
    collect_keys(&serde_json::to_value(&cfg).unwrap(), "", &mut serialized);
    assert_eq!(documented, serialized);
}
