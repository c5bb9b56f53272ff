//! On-disk cache of ideal class sets, one JSON file per `(Δ, N)`.
//!
//! Besides the public class-set document each entry stores the HNF of every
//! representative ideal, so loading skips the neighbor search but still
//! re-derives unit orders and re-checks the mass.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use quatcm::lattice::QLattice;
use quatcm::quatarith::{eichler_order_for, right_ideal_class_set, IdealClassSet};
use quatcm::{Error, Result};
use serde_json::{json, Value};

pub const VERSION: u32 = 1;

pub struct Cache {
    dir: Option<PathBuf>,
}

fn io_err(what: &str, path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("cannot {what} {}: {e}", path.display()))
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    fn entry(&self, delta: u64, level: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("classset-v{VERSION}-{delta}-{level}.json")))
    }

    pub fn class_set(&self, delta: u64, level: u64) -> Result<IdealClassSet> {
        let order = eichler_order_for(delta, level)?;
        let Some(path) = self.entry(delta, level) else {
            return right_ideal_class_set(&order);
        };
        if let Ok(text) = std::fs::read_to_string(&path) {
            // unreadable or stale entries are recomputed
            if let Some(ideals) = decode(&text, delta, level) {
                if let Ok(set) = IdealClassSet::from_ideals(order.clone(), ideals) {
                    return Ok(set);
                }
            }
        }
        let set = right_ideal_class_set(&order)?;
        write_atomic(&path, encode(&set).to_string().as_bytes())?;
        Ok(set)
    }
}

fn encode(s: &IdealClassSet) -> Value {
    let mut doc = s.to_json();
    doc["version"] = json!(VERSION);
    let ideals: Vec<Value> = s
        .classes
        .iter()
        .map(|c| {
            json!({
                "denom": c.ideal.denom().to_string(),
                "rows": c.ideal.integer_rows().iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    doc["ideals"] = Value::Array(ideals);
    doc
}

fn decode(text: &str, delta: u64, level: u64) -> Option<Vec<QLattice>> {
    let doc: Value = serde_json::from_str(text).ok()?;
    if doc["version"].as_u64()? != VERSION as u64 || doc["delta"].as_u64()? != delta || doc["level"].as_u64()? != level {
        return None;
    }
    doc["ideals"]
        .as_array()?
        .iter()
        .map(|i| {
            let denom: BigInt = i["denom"].as_str()?.parse().ok()?;
            let rows = i["rows"]
                .as_array()?
                .iter()
                .map(|r| r.as_array()?.iter().map(|x| x.as_str()?.parse().ok()).collect::<Option<Vec<BigInt>>>())
                .collect::<Option<Vec<_>>>()?;
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return None;
            }
            Some(QLattice::from_integer_rows(4, rows, denom))
        })
        .collect()
}

/// Write to a temporary file in the target directory, then rename over.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| io_err("create directory", &dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_err("create temporary file in", &dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err("write", path, e))?;
    tmp.persist(path).map_err(|e| io_err("replace", path, e.error))?;
    Ok(())
}
