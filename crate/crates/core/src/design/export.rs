//! On-disk design artifact: a `row,col_id,value` triplet CSV plus a JSON
//! sidecar carrying the column directory and the response vector.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::matrix::{ColumnDirectory, SparseDesign, Triplet};
use super::DesignError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignMeta {
    pub n_rows: usize,
    pub directory: ColumnDirectory,
    pub response: Vec<i8>,
}

pub fn write_triplets<W: Write>(writer: W, design: &SparseDesign) -> Result<(), DesignError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["row", "col_id", "value"])?;
    let dir = design.directory();
    for t in design.entries() {
        wtr.write_record([t.row.to_string(), dir.col_id(t.col), t.value.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_meta<W: Write>(writer: W, design: &SparseDesign) -> Result<(), DesignError> {
    let meta = DesignMeta {
        n_rows: design.n_rows(),
        directory: design.directory().clone(),
        response: design.response().to_vec(),
    };
    serde_json::to_writer_pretty(writer, &meta)?;
    Ok(())
}

pub fn read_meta<R: Read>(reader: R) -> Result<DesignMeta, DesignError> {
    let mut meta: DesignMeta = serde_json::from_reader(reader)?;
    meta.directory.reindex()?;
    Ok(meta)
}

/// Reads a triplet CSV against an already loaded sidecar.
pub fn read_design<R: Read>(triplets: R, meta: DesignMeta) -> Result<SparseDesign, DesignError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(triplets);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header != ["row", "col_id", "value"] {
        return Err(DesignError::MalformedEvent { row: 0, reason: format!("unexpected triplet header {header:?}") });
    }
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec?;
        let bad = |reason: String| DesignError::MalformedEvent { row: line, reason };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        let row: usize = rec[0].trim().parse().map_err(|e| bad(format!("row: {e}")))?;
        let col = meta
            .directory
            .column(rec[1].trim())
            .ok_or_else(|| bad(format!("unknown column {:?}", &rec[1])))?;
        let value: i8 = rec[2].trim().parse().map_err(|e| bad(format!("value: {e}")))?;
        entries.push(Triplet { row, col, value });
    }
    SparseDesign::from_parts(meta.n_rows, entries, meta.response, meta.directory)
}
