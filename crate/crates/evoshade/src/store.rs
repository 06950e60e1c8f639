//! File-backed persistence for saved transformations and uploaded models.
//!
//! Layout under the store root:
//!
//! ```text
//! transformations/<id>.json   {"seq": n, "record": <TransformationRecord>}
//! models/<id>.json            the uploaded payload, byte for byte
//! models/<id>.meta.json       {"seq": n, "id", "name", "vertex_count", ...}
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! failed put leaves nothing behind. A model counts as stored once its meta
//! file exists; a payload without meta is ignored on open.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use chrono::{DateTime, Utc};
use evoshade_core::{parse, serialize};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("storage I/O: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt store file {path}: {source}")]
    Corrupt {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// A saved perturbation. Serializes to the transformation export format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformationRecord {
    pub id: String,
    pub name: String,
    #[serde(rename = "expression")]
    pub expression_text: String,
    pub created_at: DateTime<Utc>,
    pub source_model_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub id: String,
    pub name: String,
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub created_at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelAsset {
    pub info: ModelInfo,
    /// The payload exactly as uploaded.
    pub payload: Vec<u8>,
}

/// Fields extracted from a payload that passed [`validate_model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSummary {
    pub name: String,
    pub vertex_count: usize,
    pub triangle_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Page<T> {
    pub total: usize,
    pub items: Vec<T>,
}

/// Checks a model upload against the mesh format
/// `{"name": <string>, "positions": [<float> x 3k], "indices": [<uint> x 3m]}`
/// and collects every violation found.
pub fn validate_model(bytes: &[u8]) -> Result<ModelSummary, Vec<String>> {
    let doc: Value = match serde_json::from_slice(bytes) {
        Ok(doc) => doc,
        Err(e) => return Err(vec![format!("payload is not valid JSON: {e}")]),
    };
    let Some(obj) = doc.as_object() else {
        return Err(vec!["payload must be a JSON object".into()]);
    };
    let mut violations = Vec::new();

    let name = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            violations.push("`name` must be a string".into());
            String::new()
        }
        None => {
            violations.push("missing `name`".into());
            String::new()
        }
    };

    let mut vertex_count = None;
    match obj.get("positions") {
        Some(Value::Array(items)) => {
            let mut ok = true;
            for (i, v) in items.iter().enumerate() {
                if !v.as_f64().is_some_and(f64::is_finite) {
                    violations.push(format!("positions[{i}] is not a finite number"));
                    ok = false;
                }
            }
            if items.len() % 3 != 0 {
                violations.push(format!(
                    "positions length {} is not divisible by 3",
                    items.len()
                ));
                ok = false;
            }
            if ok {
                vertex_count = Some(items.len() / 3);
            }
        }
        Some(_) => violations.push("`positions` must be an array".into()),
        None => violations.push("missing `positions`".into()),
    }

    let mut triangle_count = 0;
    match obj.get("indices") {
        Some(Value::Array(items)) => {
            for (i, v) in items.iter().enumerate() {
                match v.as_u64() {
                    None => violations.push(format!("indices[{i}] is not a non-negative integer")),
                    Some(ix) => {
                        if let Some(n) = vertex_count {
                            if ix >= n as u64 {
                                violations.push(format!(
                                    "indices[{i}] = {ix} is out of range for {n} vertices"
                                ));
                            }
                        }
                    }
                }
            }
            if items.len() % 3 != 0 {
                violations.push(format!("indices length {} is not divisible by 3", items.len()));
            }
            triangle_count = items.len() / 3;
        }
        Some(_) => violations.push("`indices` must be an array".into()),
        None => violations.push("missing `indices`".into()),
    }

    if violations.is_empty() {
        Ok(ModelSummary {
            name,
            vertex_count: vertex_count.expect("set when positions are valid"),
            triangle_count,
        })
    } else {
        Err(violations)
    }
}

#[derive(Serialize, Deserialize)]
struct TransformationFile {
    seq: u64,
    record: TransformationRecord,
}

#[derive(Serialize, Deserialize)]
struct ModelMetaFile {
    seq: u64,
    #[serde(flatten)]
    info: ModelInfo,
}

#[derive(Default)]
struct Index {
    transformations: HashMap<String, (u64, TransformationRecord)>,
    models: HashMap<String, (u64, ModelInfo)>,
    next_seq: u64,
}

pub struct Store {
    root: PathBuf,
    index: RwLock<Index>,
}

const TRANSFORMATIONS: &str = "transformations";
const MODELS: &str = "models";
const META_SUFFIX: &str = ".meta.json";

impl Store {
    /// Opens (creating if needed) the store rooted at `root` and loads its
    /// index.
    pub fn open(root: impl AsRef<Path>) -> Result<Store, StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join(TRANSFORMATIONS))?;
        fs::create_dir_all(root.join(MODELS))?;

        let mut index = Index::default();
        for path in json_files(&root.join(TRANSFORMATIONS))? {
            let file: TransformationFile = read_json(&path)?;
            index.next_seq = index.next_seq.max(file.seq + 1);
            index
                .transformations
                .insert(file.record.id.clone(), (file.seq, file.record));
        }
        for path in json_files(&root.join(MODELS))? {
            if !path.to_string_lossy().ends_with(META_SUFFIX) {
                continue;
            }
            let file: ModelMetaFile = read_json(&path)?;
            index.next_seq = index.next_seq.max(file.seq + 1);
            index.models.insert(file.info.id.clone(), (file.seq, file.info));
        }
        Ok(Store {
            root,
            index: RwLock::new(index),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Saves a transformation; the expression is stored in canonical form.
    pub fn put_transformation(
        &self,
        name: &str,
        expression_text: &str,
        source_model_id: Option<&str>,
    ) -> Result<String, StoreError> {
        let mut problems = Vec::new();
        if name.trim().is_empty() {
            problems.push("name must not be empty".to_string());
        }
        let canonical = match parse(expression_text) {
            Ok(expr) => serialize(&expr),
            Err(e) => {
                problems.push(format!("expression: {e}"));
                String::new()
            }
        };
        let mut index = self.index.write().expect("store lock poisoned");
        if let Some(model) = source_model_id {
            if !index.models.contains_key(model) {
                problems.push(format!("unknown source model `{model}`"));
            }
        }
        if !problems.is_empty() {
            return Err(StoreError::Validation(problems));
        }

        let id = fresh_id(|id| index.transformations.contains_key(id) || index.models.contains_key(id));
        let record = TransformationRecord {
            id: id.clone(),
            name: name.to_string(),
            expression_text: canonical,
            created_at: Utc::now(),
            source_model_id: source_model_id.map(str::to_string),
        };
        let seq = index.next_seq;
        let file = TransformationFile { seq, record };
        let bytes = serde_json::to_vec_pretty(&file).expect("record serializes");
        write_atomic(&self.root.join(TRANSFORMATIONS).join(format!("{id}.json")), &bytes)?;
        index.next_seq += 1;
        index.transformations.insert(id.clone(), (seq, file.record));
        Ok(id)
    }

    pub fn get_transformation(&self, id: &str) -> Result<TransformationRecord, StoreError> {
        let index = self.index.read().expect("store lock poisoned");
        index
            .transformations
            .get(id)
            .map(|(_, r)| r.clone())
            .ok_or_else(|| StoreError::NotFound {
                kind: "transformation",
                id: id.to_string(),
            })
    }

    /// Newest first.
    pub fn list_transformations(&self, offset: usize, limit: usize) -> Page<TransformationRecord> {
        let index = self.index.read().expect("store lock poisoned");
        let mut all: Vec<&(u64, TransformationRecord)> = index.transformations.values().collect();
        all.sort_by(|a, b| b.1.created_at.cmp(&a.1.created_at).then(b.0.cmp(&a.0)));
        Page {
            total: all.len(),
            items: all.into_iter().skip(offset).take(limit).map(|(_, r)| r.clone()).collect(),
        }
    }

    /// Stores a validated model payload under `name`.
    pub fn put_model(&self, bytes: &[u8], name: &str) -> Result<String, StoreError> {
        let summary = validate_model(bytes).map_err(StoreError::Validation)?;
        if name.trim().is_empty() {
            return Err(StoreError::Validation(vec!["name must not be empty".into()]));
        }
        let mut index = self.index.write().expect("store lock poisoned");
        let id = fresh_id(|id| index.transformations.contains_key(id) || index.models.contains_key(id));
        let info = ModelInfo {
            id: id.clone(),
            name: name.to_string(),
            vertex_count: summary.vertex_count,
            triangle_count: summary.triangle_count,
            created_at: Utc::now(),
        };
        let seq = index.next_seq;
        let dir = self.root.join(MODELS);
        write_atomic(&dir.join(format!("{id}.json")), bytes)?;
        let meta = ModelMetaFile { seq, info };
        let meta_bytes = serde_json::to_vec_pretty(&meta).expect("meta serializes");
        if let Err(e) = write_atomic(&dir.join(format!("{id}{META_SUFFIX}")), &meta_bytes) {
            let _ = fs::remove_file(dir.join(format!("{id}.json")));
            return Err(e.into());
        }
        index.next_seq += 1;
        index.models.insert(id.clone(), (seq, meta.info));
        Ok(id)
    }

    pub fn get_model(&self, id: &str) -> Result<ModelAsset, StoreError> {
        let info = {
            let index = self.index.read().expect("store lock poisoned");
            index.models.get(id).map(|(_, info)| info.clone())
        };
        let info = info.ok_or_else(|| StoreError::NotFound {
            kind: "model",
            id: id.to_string(),
        })?;
        let payload = fs::read(self.root.join(MODELS).join(format!("{id}.json")))?;
        Ok(ModelAsset { info, payload })
    }

    /// Newest first.
    pub fn list_models(&self, offset: usize, limit: usize) -> Page<ModelInfo> {
        let index = self.index.read().expect("store lock poisoned");
        let mut all: Vec<&(u64, ModelInfo)> = index.models.values().collect();
        all.sort_by(|a, b| b.1.created_at.cmp(&a.1.created_at).then(b.0.cmp(&a.0)));
        Page {
            total: all.len(),
            items: all.into_iter().skip(offset).take(limit).map(|(_, m)| m.clone()).collect(),
        }
    }
}

fn fresh_id(taken: impl Fn(&str) -> bool) -> String {
    loop {
        let id = uuid::Uuid::new_v4().to_string();
        if !taken(&id) {
            return id;
        }
    }
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    Ok(out)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|source| StoreError::Corrupt {
        path: path.to_path_buf(),
        source,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().expect("store paths have a parent");
    let mut tmp = tempfile::Builder::new().prefix(".tmp-").tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"{"name":"tri","positions":[0,0,0, 1,0,0, 0,1,0],"indices":[0,1,2]}"#;

    fn temp_store() -> (tempfile::TempDir, Store) {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        (dir, store)
    }

    #[test]
    fn minimal_triangle_is_valid() {
        let summary = validate_model(TRIANGLE.as_bytes()).unwrap();
        assert_eq!(
            summary,
            ModelSummary {
                name: "tri".into(),
                vertex_count: 3,
                triangle_count: 1
            }
        );
    }

    #[test]
    fn positions_must_be_whole_vertices() {
        let v = validate_model(br#"{"name":"t","positions":[0,0,0,1],"indices":[]}"#).unwrap_err();
        assert!(v.iter().any(|m| m.contains("not divisible by 3")), "{v:?}");
    }

    #[test]
    fn indices_must_reference_vertices() {
        let v = validate_model(br#"{"name":"t","positions":[0,0,0,1,0,0,0,1,0],"indices":[0,1,5]}"#)
            .unwrap_err();
        assert_eq!(v, ["indices[2] = 5 is out of range for 3 vertices"]);
    }

    #[test]
    fn collects_every_violation() {
        let v = validate_model(br#"{"positions":[0,"a",0],"indices":[-1,0.5]}"#).unwrap_err();
        assert_eq!(v.len(), 5, "{v:?}");
        assert!(validate_model(b"[1,2,3]").is_err());
        assert!(validate_model(b"not json").is_err());
    }

    #[test]
    fn transformation_round_trip() {
        let (_dir, store) = temp_store();
        let id = store.put_transformation("wave", "(sin y)", None).unwrap();
        let rec = store.get_transformation(&id).unwrap();
        assert_eq!(rec.name, "wave");
        assert_eq!(rec.expression_text, "(sin y)");
        assert_eq!(rec.source_model_id, None);
    }

    #[test]
    fn expressions_are_canonicalized() {
        let (_dir, store) = temp_store();
        let id = store.put_transformation("w", "( add  x 1 )", None).unwrap();
        assert_eq!(store.get_transformation(&id).unwrap().expression_text, "(add x 1.0)");
    }

    #[test]
    fn malformed_expression_is_rejected() {
        let (_dir, store) = temp_store();
        assert!(matches!(
            store.put_transformation("w", "(sin", None),
            Err(StoreError::Validation(_))
        ));
        assert_eq!(store.list_transformations(0, 10).total, 0);
    }

    #[test]
    fn identical_puts_get_distinct_ids() {
        let (_dir, store) = temp_store();
        let a = store.put_transformation("w", "(sin y)", None).unwrap();
        let b = store.put_transformation("w", "(sin y)", None).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn unknown_ids_are_not_found() {
        let (_dir, store) = temp_store();
        assert!(matches!(store.get_transformation("nope"), Err(StoreError::NotFound { .. })));
        assert!(matches!(store.get_model("nope"), Err(StoreError::NotFound { .. })));
    }

    #[test]
    fn listing_is_newest_first_and_paginated() {
        let (_dir, store) = temp_store();
        let ids: Vec<String> = ["a", "b", "c"]
            .iter()
            .map(|n| store.put_transformation(n, "x", None).unwrap())
            .collect();
        let page = store.list_transformations(0, 10);
        assert_eq!(page.total, 3);
        let listed: Vec<&str> = page.items.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(listed, [ids[2].as_str(), ids[1].as_str(), ids[0].as_str()]);
        let page = store.list_transformations(0, 2);
        assert_eq!((page.total, page.items.len()), (3, 2));
        assert_eq!(store.list_transformations(2, 2).items.len(), 1);
    }

    #[test]
    fn model_payload_is_byte_identical() {
        let (_dir, store) = temp_store();
        let id = store.put_model(TRIANGLE.as_bytes(), "tri").unwrap();
        let asset = store.get_model(&id).unwrap();
        assert_eq!(asset.payload, TRIANGLE.as_bytes());
        assert_eq!(asset.info.vertex_count, 3);
        assert_eq!(asset.info.triangle_count, 1);
    }

    #[test]
    fn invalid_model_stores_nothing() {
        let (dir, store) = temp_store();
        assert!(matches!(
            store.put_model(br#"{"name":"t","positions":[0],"indices":[]}"#, "t"),
            Err(StoreError::Validation(_))
        ));
        assert_eq!(store.list_models(0, 10).total, 0);
        assert_eq!(fs::read_dir(dir.path().join(MODELS)).unwrap().count(), 0);
    }

    #[test]
    fn model_listing() {
        let (_dir, store) = temp_store();
        store.put_model(TRIANGLE.as_bytes(), "one").unwrap();
        store.put_model(TRIANGLE.as_bytes(), "two").unwrap();
        let page = store.list_models(0, 10);
        assert_eq!(page.total, 2);
        assert_eq!(page.items[0].name, "two");
    }

    #[test]
    fn source_model_must_exist() {
        let (_dir, store) = temp_store();
        assert!(store.put_transformation("w", "x", Some("missing")).is_err());
        let model = store.put_model(TRIANGLE.as_bytes(), "tri").unwrap();
        let id = store.put_transformation("w", "x", Some(&model)).unwrap();
        assert_eq!(store.get_transformation(&id).unwrap().source_model_id, Some(model));
    }

    #[test]
    fn records_survive_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (tid, mid) = {
            let store = Store::open(dir.path()).unwrap();
            let mid = store.put_model(TRIANGLE.as_bytes(), "tri").unwrap();
            (store.put_transformation("wave", "(sin y)", Some(&mid)).unwrap(), mid)
        };
        let before = {
            let store = Store::open(dir.path()).unwrap();
            store.get_transformation(&tid).unwrap()
        };
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.get_transformation(&tid).unwrap(), before);
        assert_eq!(store.get_model(&mid).unwrap().payload, TRIANGLE.as_bytes());
        // Sequence numbers continue past reopened records.
        let newer = store.put_transformation("later", "x", None).unwrap();
        assert_eq!(store.list_transformations(0, 1).items[0].id, newer);
    }

    #[test]
    fn orphan_payloads_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join(MODELS)).unwrap();
        fs::write(dir.path().join(MODELS).join("orphan.json"), TRIANGLE).unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.list_models(0, 10).total, 0);
    }
}
