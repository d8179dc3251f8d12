//! JSON distribution format.
//!
//! ```json
//! {"variables":["X","Y","Z"],
//!  "alphabets":{"X":["0","1"],"Y":["0","1"],"Z":["0","1","e"]},
//!  "mass":[{"X":"0","Y":"0","Z":"0","p":0.25}, ...]}
//! ```
//!
//! Omitted tuples carry zero mass; a tuple may not be listed twice and the
//! listed masses must sum to 1 within 1e-9.

use std::collections::HashSet;

use serde_json::{Map, Value};

use crate::dist::{advance, JointTable};
use crate::error::{Error, Result};

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

pub fn table_from_json_str(s: &str) -> Result<JointTable> {
    let v: Value = serde_json::from_str(s)?;
    table_from_json(&v)
}

pub fn table_from_json(v: &Value) -> Result<JointTable> {
    let obj = v.as_object().ok_or_else(|| malformed("distribution must be a JSON object"))?;
    let variables: Vec<String> = obj
        .get("variables")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing `variables` array"))?
        .iter()
        .map(|x| x.as_str().map(str::to_string).ok_or_else(|| malformed("variable names must be strings")))
        .collect::<Result<_>>()?;
    let alpha_obj = obj
        .get("alphabets")
        .and_then(Value::as_object)
        .ok_or_else(|| malformed("missing `alphabets` object"))?;
    let mut alphabets = Vec::with_capacity(variables.len());
    for name in &variables {
        let labels = alpha_obj
            .get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| malformed(format!("missing alphabet for `{name}`")))?
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| malformed("labels must be strings")))
            .collect::<Result<Vec<_>>>()?;
        alphabets.push(labels);
    }
    if let Some(extra) = alpha_obj.keys().find(|k| !variables.contains(k)) {
        return Err(malformed(format!("alphabet given for undeclared variable `{extra}`")));
    }
    let shape: Vec<usize> = alphabets.iter().map(Vec::len).collect();
    let len: usize = shape.iter().product();
    let mut mass = vec![0.0; len];
    // Structural checks first so the index arithmetic below is sound.
    let skeleton = JointTable::new(variables.clone(), alphabets.clone(), vec![0.0; len])?;

    let entries = obj
        .get("mass")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing `mass` array"))?;
    let mut seen = HashSet::new();
    for entry in entries {
        let e = entry.as_object().ok_or_else(|| malformed("mass entries must be objects"))?;
        let mut idx = Vec::with_capacity(variables.len());
        for name in &variables {
            let label = e
                .get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| malformed(format!("mass entry lacks a label for `{name}`")))?;
            idx.push(skeleton.label_index(name, label)?);
        }
        if e.len() != variables.len() + 1 {
            return Err(malformed("mass entry has unexpected keys"));
        }
        let p = e.get("p").and_then(Value::as_f64).ok_or_else(|| malformed("mass entry lacks numeric `p`"))?;
        let flat = skeleton.flat_index(&idx);
        if !seen.insert(flat) {
            return Err(malformed(format!("tuple listed twice in `mass`: {:?}", idx)));
        }
        mass[flat] = p;
    }
    JointTable::checked(variables, alphabets, mass)
}

pub fn table_to_json(t: &JointTable) -> Value {
    let mut root = Map::new();
    root.insert(
        "variables".into(),
        Value::Array(t.variables().iter().cloned().map(Value::String).collect()),
    );
    let mut alphas = Map::new();
    for (v, a) in t.variables().iter().zip(t.alphabets()) {
        alphas.insert(v.clone(), Value::Array(a.iter().cloned().map(Value::String).collect()));
    }
    root.insert("alphabets".into(), Value::Object(alphas));
    let shape = t.shape();
    let mut idx = vec![0usize; shape.len()];
    let mut entries = Vec::new();
    for &p in t.mass() {
        if p != 0.0 {
            let mut e = Map::new();
            for (v, (&i, a)) in t.variables().iter().zip(idx.iter().zip(t.alphabets())) {
                e.insert(v.clone(), Value::String(a[i].clone()));
            }
            e.insert("p".into(), Value::from(p));
            entries.push(Value::Object(e));
        }
        advance(&mut idx, &shape);
    }
    root.insert("mass".into(), Value::Array(entries));
    Value::Object(root)
}

pub fn table_to_json_string(t: &JointTable) -> String {
    serde_json::to_string(&table_to_json(t)).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const ERASURE: &str = r#"{"variables":["X","Y","Z"],"alphabets":{"X":["0","1"],"Y":["0","1"],"Z":["0","1","e"]},"mass":[{"X":"0","Y":"0","Z":"0","p":0.25},{"X":"0","Y":"0","Z":"e","p":0.25},{"X":"1","Y":"1","Z":"1","p":0.25},{"X":"1","Y":"1","Z":"e","p":0.25}]}"#;

    #[test]
    fn parses_and_emits_the_exact_format() {
        let t = table_from_json_str(ERASURE).unwrap();
        assert_eq!(t.prob(&[1, 1, 2]), 0.25);
        assert_eq!(table_to_json_string(&t), ERASURE);
    }

    #[test]
    fn rejects_repeated_tuples() {
        let s = r#"{"variables":["X"],"alphabets":{"X":["0","1"]},"mass":[{"X":"0","p":0.5},{"X":"0","p":0.5}]}"#;
        assert!(matches!(table_from_json_str(s), Err(Error::Malformed(_))));
    }

    #[test]
    fn rejects_bad_normalization_and_unknown_labels() {
        let s = r#"{"variables":["X"],"alphabets":{"X":["0","1"]},"mass":[{"X":"0","p":0.5},{"X":"1","p":0.48}]}"#;
        assert!(matches!(table_from_json_str(s), Err(Error::InvalidDistribution(_))));
        let s = r#"{"variables":["X"],"alphabets":{"X":["0","1"]},"mass":[{"X":"2","p":1.0}]}"#;
        assert!(matches!(table_from_json_str(s), Err(Error::UnknownLabel { .. })));
        let s = r#"{"variables":["X"],"alphabets":{"X":["0","1"]},"mass":[{"X":"0","p":1.1},{"X":"1","p":-0.1}]}"#;
        assert!(matches!(table_from_json_str(s), Err(Error::InvalidDistribution(_))));
    }
}
