//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes and returns plain strings so the same functions are
//! exercised natively by the unit tests below.

use ontomod::align::{compute_mappings, edit_distance, lev_metric, SimilarityOptions};
use ontomod::integrate::MergedOntology;
use ontomod::obo::{parse_obo, OboDocument};
use ontomod::sat::{explain_all, explanations_json, repair, unsat_report, unsat_report_tsv};
use ontomod::{Module, OntologyId, SatError};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse(text: &str, fallback: &str) -> Result<ontomod::Ontology, String> {
    let doc = OboDocument::parse(text).map_err(|e| format!("{fallback}: {e}"))?;
    let id = doc
        .header_value("ontology")
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .unwrap_or(fallback)
        .to_string();
    let parsed = parse_obo(OntologyId::new(id), text).map_err(|e| format!("{fallback}: {e}"))?;
    Ok(parsed.ontology)
}

/// Edit distance and normalized similarity of two strings as JSON.
pub fn levenshtein_json(a: &str, b: &str) -> String {
    let folded = (a.to_ascii_lowercase(), b.to_ascii_lowercase());
    json!({
        "distance": edit_distance(&folded.0, &folded.1),
        "similarity": lev_metric(a, b),
    })
    .to_string()
}

/// Mappings between two whole OBO documents as TSV.
pub fn align_tsv(
    left: &str,
    right: &str,
    threshold: f64,
    use_definitions: bool,
) -> Result<String, String> {
    let modules: Vec<Module> = [(left, "left"), (right, "right")]
        .into_iter()
        .map(|(text, name)| {
            let o = parse(text, name)?;
            let seed = o.classes().keys().cloned().collect();
            Ok(Module::from_source(&o, seed, o.axioms().to_vec()))
        })
        .collect::<Result<_, String>>()?;
    if modules[0].source() == modules[1].source() {
        return Err(format!("both documents are named {}", modules[0].source()));
    }
    let maps = compute_mappings(&modules, threshold, SimilarityOptions { use_definitions })
        .map_err(|e| e.to_string())?;
    Ok(maps.to_tsv())
}

/// Unsatisfiable classes, explanations and a repair plan for a merged OBO
/// document, as JSON with `unsat`, `explanations` and `plan` fields.
pub fn diagnose_json(merged: &str, max_iterations: usize) -> Result<String, String> {
    let m = MergedOntology::from_ontology(&parse(merged, "merged")?);
    let explanations: serde_json::Value =
        serde_json::from_str(&explanations_json(&explain_all(&m))).map_err(|e| e.to_string())?;
    let plan = match repair(&m, max_iterations) {
        Ok(outcome) => outcome.plan.to_text(),
        Err(e @ SatError::RepairIncomplete { .. }) => format!("# {e}\n"),
        Err(e) => return Err(e.to_string()),
    };
    Ok(json!({
        "unsat": unsat_report_tsv(&unsat_report(&m)),
        "explanations": explanations,
        "plan": plan,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn levenshtein(a: &str, b: &str) -> String {
    levenshtein_json(a, b)
}

#[wasm_bindgen]
pub fn align(
    left: &str,
    right: &str,
    threshold: f64,
    use_definitions: bool,
) -> Result<String, JsValue> {
    align_tsv(left, right, threshold, use_definitions).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn diagnose(merged: &str, max_iterations: usize) -> Result<String, JsValue> {
    diagnose_json(merged, max_iterations).map_err(|e| JsValue::from_str(&e))
}
