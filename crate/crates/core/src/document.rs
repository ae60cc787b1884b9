//! JSON interchange format for algebra presentations with a declared Cartan
//! split: schema validation with path-precise errors, canonical emission
//! (fixed key order, shortest round-trip floats), and conversion to the
//! in-memory types.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cartan::{CartanError, CartanSplit};
use crate::liealg::LieAlgebraPresentation;

/// The only schema version this build reads and writes.
pub const SCHEMA_VERSION: u64 = 1;

/// An algebra presentation as stored on disk: matrices are flat row-major
/// arrays of length n², and the index lists partition the basis into the
/// k- and p-parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentationDocument {
    pub schema_version: u64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub basis: Vec<Vec<f64>>,
    pub k_indices: Vec<usize>,
    pub p_indices: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema { path: path.into(), message: message.into() }
}

fn as_index(v: &serde_json::Value, path: &str) -> Result<usize, DocumentError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(path, format!("expected a nonnegative integer, got {v}")))
}

/// Parses and schema-validates a presentation document from UTF-8 JSON.
/// Syntax failures carry the position; schema failures carry the JSON
/// pointer of the offending field (e.g. "/basis/2/7").
pub fn parse_presentation(text: &[u8]) -> Result<PresentationDocument, DocumentError> {
    let value: serde_json::Value =
        serde_json::from_slice(text).map_err(|e| DocumentError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let obj = value.as_object().ok_or_else(|| schema("/", "expected a JSON object"))?;

    const KNOWN: [&str; 6] = ["schema_version", "n", "name", "basis", "k_indices", "p_indices"];
    for key in obj.keys() {
        if !KNOWN.contains(&key.as_str()) {
            return Err(schema(format!("/{key}"), "unknown field"));
        }
    }
    let require = |key: &str| {
        obj.get(key).ok_or_else(|| schema(format!("/{key}"), "missing required field"))
    };

    let schema_version = as_index(require("schema_version")?, "/schema_version")? as u64;
    if schema_version != SCHEMA_VERSION {
        return Err(schema(
            "/schema_version",
            format!("unsupported schema version {schema_version} (expected {SCHEMA_VERSION})"),
        ));
    }

    let n = as_index(require("n")?, "/n")?;
    if n == 0 {
        return Err(schema("/n", "matrix size must be positive"));
    }

    let name = match obj.get("name") {
        None => None,
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(schema("/name", format!("expected a string, got {other}"))),
    };

    let basis_value = require("basis")?
        .as_array()
        .ok_or_else(|| schema("/basis", "expected an array of matrices"))?;
    if basis_value.is_empty() {
        return Err(schema("/basis", "basis must contain at least one matrix"));
    }
    let mut basis = Vec::with_capacity(basis_value.len());
    for (i, row) in basis_value.iter().enumerate() {
        let arr = row
            .as_array()
            .ok_or_else(|| schema(format!("/basis/{i}"), "expected a flat row-major array"))?;
        if arr.len() != n * n {
            return Err(schema(
                format!("/basis/{i}"),
                format!("matrix array has length {}, expected n² = {}", arr.len(), n * n),
            ));
        }
        let mut entries = Vec::with_capacity(arr.len());
        for (j, e) in arr.iter().enumerate() {
            let x = e.as_f64().ok_or_else(|| {
                schema(format!("/basis/{i}/{j}"), format!("expected a number, got {e}"))
            })?;
            if !x.is_finite() {
                return Err(schema(format!("/basis/{i}/{j}"), "entry is not finite"));
            }
            entries.push(x);
        }
        basis.push(entries);
    }
    let d = basis.len();

    let index_list = |key: &str| -> Result<Vec<usize>, DocumentError> {
        let arr = require(key)?
            .as_array()
            .ok_or_else(|| schema(format!("/{key}"), "expected an array of integers"))?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, v) in arr.iter().enumerate() {
            let idx = as_index(v, &format!("/{key}/{i}"))?;
            if idx >= d {
                return Err(schema(
                    format!("/{key}/{i}"),
                    format!("index {idx} out of range for basis dimension {d}"),
                ));
            }
            out.push(idx);
        }
        Ok(out)
    };
    let k_indices = index_list("k_indices")?;
    let p_indices = index_list("p_indices")?;

    let mut seen = vec![false; d];
    for &i in k_indices.iter().chain(p_indices.iter()) {
        if seen[i] {
            return Err(schema("/p_indices", format!("index {i} appears twice across the partition")));
        }
        seen[i] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(schema(
            "/p_indices",
            format!("k_indices and p_indices must partition 0..{}; index {missing} is missing", d - 1),
        ));
    }

    Ok(PresentationDocument { schema_version, n, name, basis, k_indices, p_indices })
}

/// Canonical serialization: fixed key order (schema_version, n, name, basis,
/// k_indices, p_indices), two-space indentation, shortest round-trip float
/// formatting, trailing newline. `emit(parse(x))` is a fixed point of
/// `emit ∘ parse`.
pub fn emit_presentation(doc: &PresentationDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serialization is infallible");
    out.push('\n');
    out
}

impl PresentationDocument {
    /// Builds a document from in-memory matrices (row-major flattening).
    pub fn from_matrices(
        name: Option<&str>,
        n: usize,
        basis: &[DMatrix<f64>],
        k_indices: Vec<usize>,
        p_indices: Vec<usize>,
    ) -> Self {
        let flat = basis
            .iter()
            .map(|m| {
                let mut row = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        row.push(m[(i, j)]);
                    }
                }
                row
            })
            .collect();
        PresentationDocument {
            schema_version: SCHEMA_VERSION,
            n,
            name: name.map(str::to_owned),
            basis: flat,
            k_indices,
            p_indices,
        }
    }

    /// Number of basis elements.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The basis as matrices (row-major unflattening).
    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        self.basis
            .iter()
            .map(|row| DMatrix::from_row_slice(self.n, self.n, row))
            .collect()
    }

    /// Converts into the validated in-memory split.
    pub fn to_split(&self) -> Result<CartanSplit, CartanError> {
        let g = LieAlgebraPresentation::new(self.n, self.matrices())?;
        CartanSplit::new(g, self.k_indices.clone(), self.p_indices.clone())
    }
}
