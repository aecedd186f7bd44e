use lame_spectra_web::{bands_json, edges_json, flow_json};
use serde_json::Value;

#[test]
fn edges_export_lists_all_labels() {
    let doc: Value = serde_json::from_str(&edges_json(2, 0.17, 0.0, 0.0, 1.2).unwrap()).unwrap();
    assert_eq!(doc["labels"].as_array().unwrap().len(), 4);
    assert_eq!(doc["union_with_reflection"].as_array().unwrap().len(), 10);
    assert!(edges_json(0, 0.17, 0.0, 0.0, 1.2).is_err());
}

#[test]
fn bands_export_has_q_bands_per_k() {
    let doc: Value = serde_json::from_str(&bands_json(1, 1, 31, 0.0, 1.2, 8).unwrap()).unwrap();
    let energies = doc["energies"].as_array().unwrap();
    assert_eq!(energies.len(), 8);
    assert!(energies.iter().all(|row| row.as_array().unwrap().len() == 31));
    assert_eq!(doc["stable_intervals"].as_array().unwrap().len(), 3);
}

#[test]
fn flow_export_returns_trajectory() {
    let doc: Value = serde_json::from_str(&flow_json(2, 1.0 / 31.0, 0.0, 0.0, 1.1, 11, 0.05, 0.01).unwrap()).unwrap();
    assert_eq!(doc["trajectory"].as_array().unwrap().len(), 6);
    assert!(doc.get("error").is_none());
}
