//! Raw document sources and stopword lists.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use sclop_core::corpus::RawDocument;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Reads every `.txt` file of a directory, ordered by file name. The file
/// name is the document id.
pub fn read_text_dir(dir: &Path) -> Result<Vec<RawDocument>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .map(|entry| entry.map(|e| e.path()).map_err(CliError::io(dir)))
        .collect::<Result<_>>()?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(CliError::io(p))?;
            let id = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok(RawDocument::new(id, text))
        })
        .collect()
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: serde_json::Value,
    text: String,
    #[serde(flatten)]
    rest: BTreeMap<String, serde_json::Value>,
}

/// Reads one `{"id": .., "text": ..}` object per line. Other string fields
/// are kept as metadata; blank lines are skipped.
pub fn read_jsonl(path: &Path) -> Result<Vec<RawDocument>> {
    let content = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut docs = Vec::new();
    for (n, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(line).map_err(|e| CliError::format(path, format!("line {}: {e}", n + 1)))?;
        let id = match record.id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(CliError::format(
                    path,
                    format!("line {}: unsupported id {other}", n + 1),
                ))
            }
        };
        let mut doc = RawDocument::new(id, record.text);
        doc.meta = record
            .rest
            .into_iter()
            .filter_map(|(k, v)| v.as_str().map(|s| (k, s.to_owned())))
            .collect();
        docs.push(doc);
    }
    Ok(docs)
}

/// A directory is read as `.txt` files, anything else as JSONL.
pub fn read_documents(path: &Path) -> Result<Vec<RawDocument>> {
    if path.is_dir() {
        read_text_dir(path)
    } else {
        read_jsonl(path)
    }
}

/// One stopword per line; blank lines and surrounding whitespace ignored.
pub fn read_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let content = fs::read_to_string(path).map_err(CliError::io(path))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}
