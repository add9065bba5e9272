//! Run-record file formats and tool configuration.
//!
//! Records travel as CSV (interchange default) or JSON lines. Both formats
//! round-trip losslessly: numeric fields are serialized with shortest
//! round-trip precision, and unknown columns/keys are preserved in order.
//! `emit(parse(f))` is a canonicalizing fixpoint: applying it twice yields
//! byte-identical output.

use crate::cost::{self, ModelConfig};
use crate::error::{Error, Result};
use crate::shape::{Shape, ShapeDim};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

/// Exact canonical CSV header, in order. Unknown columns follow these.
pub const CSV_HEADER: [&str; 9] = [
    "width",
    "depth",
    "mlp_dim",
    "dimension_under_test",
    "examples_seen",
    "compute_gflops",
    "metric_name",
    "metric_value",
    "tag",
];

/// One observed (shape, compute, metric) triple from a real or simulated
/// training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub shape: Shape,
    /// Which dimension a star-sweep run varied; empty for grid-sweep runs.
    pub dimension_under_test: Option<ShapeDim>,
    pub examples_seen: Option<u64>,
    /// Total training compute. Derivable from `examples_seen` via
    /// [`resolve_compute`] when absent.
    pub compute_gflops: Option<f64>,
    pub metric_name: String,
    pub metric_value: f64,
    pub tag: String,
    /// Unknown columns, preserved in input order.
    pub extra: Vec<(String, String)>,
}

impl RunRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        let s = self.shape;
        if s.width < 1 || s.depth < 1 || s.mlp_dim < 1 {
            return Err(format!("shape dimensions must be >= 1, got {s}"));
        }
        if !(self.metric_value > 0.0 && self.metric_value.is_finite()) {
            return Err(format!(
                "metric_value must be > 0 and finite, got {}",
                self.metric_value
            ));
        }
        if let Some(t) = self.compute_gflops {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("compute_gflops must be > 0 and finite, got {t}"));
            }
        }
        if self.examples_seen.is_none() && self.compute_gflops.is_none() {
            return Err("record needs examples_seen or compute_gflops".into());
        }
        if self.metric_name.is_empty() {
            return Err("metric_name must be non-empty".into());
        }
        Ok(())
    }
}

/// Record file encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFormat {
    Csv,
    JsonLines,
}

impl RecordFormat {
    /// Picks the format from a file extension; `.jsonl`/`.json` mean JSON
    /// lines, anything else CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => RecordFormat::JsonLines,
            _ => RecordFormat::Csv,
        }
    }
}

fn parse_err(source_name: &str, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        row,
        message: message.into(),
    }
}

/// Parses records from `reader`. `source_name` is used in error messages.
pub fn parse_records<R: Read>(
    reader: R,
    format: RecordFormat,
    source_name: &str,
) -> Result<Vec<RunRecord>> {
    match format {
        RecordFormat::Csv => parse_csv(reader, source_name),
        RecordFormat::JsonLines => parse_jsonl(reader, source_name),
    }
}

/// Emits records in canonical form.
pub fn emit_records<W: Write>(
    writer: W,
    records: &[RunRecord],
    format: RecordFormat,
) -> Result<()> {
    match format {
        RecordFormat::Csv => emit_csv(writer, records),
        RecordFormat::JsonLines => emit_jsonl(writer, records),
    }
}

fn parse_csv<R: Read>(reader: R, source_name: &str) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(source_name, 1, e.to_string()))?
        .clone();
    let mut canon_idx = [usize::MAX; 9];
    let mut extra_cols: Vec<(usize, String)> = Vec::new();
    for (i, name) in headers.iter().enumerate() {
        match CSV_HEADER.iter().position(|&h| h == name) {
            Some(k) => {
                if canon_idx[k] != usize::MAX {
                    return Err(parse_err(
                        source_name,
                        1,
                        format!("duplicate column {name:?}"),
                    ));
                }
                canon_idx[k] = i;
            }
            None => extra_cols.push((i, name.to_string())),
        }
    }
    for (k, &idx) in canon_idx.iter().enumerate() {
        if idx == usize::MAX {
            return Err(parse_err(
                source_name,
                1,
                format!("missing required column {:?}", CSV_HEADER[k]),
            ));
        }
    }

    let get = |rec: &csv::StringRecord, k: usize| -> String {
        rec.get(canon_idx[k]).unwrap_or("").to_string()
    };
    let mut out = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let rownum = n + 2; // 1-based, counting the header row
        let rec = row.map_err(|e| parse_err(source_name, rownum, e.to_string()))?;
        let parse_u32 = |k: usize| -> Result<u32> {
            let s = get(&rec, k);
            s.parse::<u32>().map_err(|_| {
                parse_err(
                    source_name,
                    rownum,
                    format!("column {:?}: expected integer, got {s:?}", CSV_HEADER[k]),
                )
            })
        };
        let parse_opt_u64 = |k: usize| -> Result<Option<u64>> {
            let s = get(&rec, k);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<u64>().map(Some).map_err(|_| {
                parse_err(
                    source_name,
                    rownum,
                    format!("column {:?}: expected integer, got {s:?}", CSV_HEADER[k]),
                )
            })
        };
        let parse_opt_f64 = |k: usize| -> Result<Option<f64>> {
            let s = get(&rec, k);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| {
                parse_err(
                    source_name,
                    rownum,
                    format!("column {:?}: expected number, got {s:?}", CSV_HEADER[k]),
                )
            })
        };
        let dim_str = get(&rec, 3);
        let dimension_under_test = if dim_str.is_empty() {
            None
        } else {
            Some(ShapeDim::from_str(&dim_str).map_err(|e| parse_err(source_name, rownum, e))?)
        };
        let metric_value = parse_opt_f64(7)?.ok_or_else(|| {
            parse_err(source_name, rownum, "column \"metric_value\": empty")
        })?;
        let record = RunRecord {
            shape: Shape::new(parse_u32(0)?, parse_u32(1)?, parse_u32(2)?),
            dimension_under_test,
            examples_seen: parse_opt_u64(4)?,
            compute_gflops: parse_opt_f64(5)?,
            metric_name: get(&rec, 6),
            metric_value,
            tag: get(&rec, 8),
            extra: extra_cols
                .iter()
                .map(|(i, name)| (name.clone(), rec.get(*i).unwrap_or("").to_string()))
                .collect(),
        };
        record
            .validate()
            .map_err(|m| parse_err(source_name, rownum, m))?;
        out.push(record);
    }
    Ok(out)
}

/// Shortest f64 text that parses back to the same bits, always carrying a
/// decimal point so float columns stay visually distinct from counts.
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn emit_csv<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    // union of extra columns in first-seen order
    let mut extra_names: Vec<String> = Vec::new();
    for r in records {
        for (name, _) in &r.extra {
            if !extra_names.contains(name) {
                extra_names.push(name.clone());
            }
        }
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<&str> = CSV_HEADER
        .iter()
        .copied()
        .chain(extra_names.iter().map(|s| s.as_str()))
        .collect();
    wtr.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = vec![
            r.shape.width.to_string(),
            r.shape.depth.to_string(),
            r.shape.mlp_dim.to_string(),
            r.dimension_under_test
                .map(|d| d.as_str().to_string())
                .unwrap_or_default(),
            r.examples_seen.map(|e| e.to_string()).unwrap_or_default(),
            r.compute_gflops.map(fmt_f64).unwrap_or_default(),
            r.metric_name.clone(),
            fmt_f64(r.metric_value),
            r.tag.clone(),
        ];
        for name in &extra_names {
            let v = r
                .extra
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .unwrap_or_default();
            row.push(v);
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn parse_jsonl<R: Read>(reader: R, source_name: &str) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let rownum = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| parse_err(source_name, rownum, e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| parse_err(source_name, rownum, "line is not a JSON object"))?;

        let get_u32 = |key: &str| -> Result<u32> {
            obj.get(key)
                .and_then(|v| v.as_u64())
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| {
                    parse_err(source_name, rownum, format!("missing or invalid {key:?}"))
                })
        };
        let dimension_under_test = match obj.get("dimension_under_test") {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(s)) if s.is_empty() => None,
            Some(serde_json::Value::String(s)) => Some(
                ShapeDim::from_str(s).map_err(|e| parse_err(source_name, rownum, e))?,
            ),
            Some(v) => {
                return Err(parse_err(
                    source_name,
                    rownum,
                    format!("invalid dimension_under_test: {v}"),
                ))
            }
        };
        let known = [
            "width",
            "depth",
            "mlp_dim",
            "dimension_under_test",
            "examples_seen",
            "compute_gflops",
            "metric_name",
            "metric_value",
            "tag",
        ];
        let extra: Vec<(String, String)> = obj
            .iter()
            .filter(|(k, _)| !known.contains(&k.as_str()))
            .map(|(k, v)| {
                let s = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (k.clone(), s)
            })
            .collect();
        let record = RunRecord {
            shape: Shape::new(get_u32("width")?, get_u32("depth")?, get_u32("mlp_dim")?),
            dimension_under_test,
            examples_seen: match obj.get("examples_seen") {
                None | Some(serde_json::Value::Null) => None,
                Some(v) => Some(v.as_u64().ok_or_else(|| {
                    parse_err(source_name, rownum, "invalid examples_seen")
                })?),
            },
            compute_gflops: match obj.get("compute_gflops") {
                None | Some(serde_json::Value::Null) => None,
                Some(v) => Some(v.as_f64().ok_or_else(|| {
                    parse_err(source_name, rownum, "invalid compute_gflops")
                })?),
            },
            metric_name: obj
                .get("metric_name")
                .and_then(|v| v.as_str())
                .unwrap_or("")
                .to_string(),
            metric_value: obj
                .get("metric_value")
                .and_then(|v| v.as_f64())
                .ok_or_else(|| {
                    parse_err(source_name, rownum, "missing or invalid metric_value")
                })?,
            tag: obj
                .get("tag")
                .and_then(|v| v.as_str())
                .unwrap_or("")
                .to_string(),
            extra,
        };
        record
            .validate()
            .map_err(|m| parse_err(source_name, rownum, m))?;
        out.push(record);
    }
    Ok(out)
}

fn emit_jsonl<W: Write>(mut writer: W, records: &[RunRecord]) -> Result<()> {
    for r in records {
        let mut obj = serde_json::Map::new();
        obj.insert("width".into(), r.shape.width.into());
        obj.insert("depth".into(), r.shape.depth.into());
        obj.insert("mlp_dim".into(), r.shape.mlp_dim.into());
        obj.insert(
            "dimension_under_test".into(),
            match r.dimension_under_test {
                Some(d) => d.as_str().into(),
                None => serde_json::Value::Null,
            },
        );
        obj.insert(
            "examples_seen".into(),
            match r.examples_seen {
                Some(e) => e.into(),
                None => serde_json::Value::Null,
            },
        );
        obj.insert(
            "compute_gflops".into(),
            match r.compute_gflops {
                Some(t) => serde_json::Value::from(t),
                None => serde_json::Value::Null,
            },
        );
        obj.insert("metric_name".into(), r.metric_name.clone().into());
        obj.insert("metric_value".into(), r.metric_value.into());
        obj.insert("tag".into(), r.tag.clone().into());
        for (k, v) in &r.extra {
            obj.insert(k.clone(), v.clone().into());
        }
        serde_json::to_writer(&mut writer, &serde_json::Value::Object(obj))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Cost-model settings shared by sweep manifests and the CLI config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSettings {
    pub patch_size: u32,
    pub image_resolution: u32,
    pub num_heads: u32,
    pub flops_multiplier: f64,
    pub include_pooling_head: bool,
    pub include_pos_embedding: bool,
}

impl Default for CostSettings {
    fn default() -> Self {
        Self {
            patch_size: 14,
            image_resolution: 224,
            num_heads: 16,
            flops_multiplier: 1.0,
            include_pooling_head: true,
            include_pos_embedding: true,
        }
    }
}

impl CostSettings {
    pub fn config_for(&self, shape: Shape) -> ModelConfig {
        ModelConfig {
            shape,
            patch_size: self.patch_size,
            image_resolution: self.image_resolution,
            num_heads: self.num_heads,
            include_pooling_head: self.include_pooling_head,
            include_pos_embedding: self.include_pos_embedding,
        }
    }

    pub fn training_compute(&self, shape: Shape, examples: u64) -> Result<f64> {
        cost::training_compute(&self.config_for(shape), examples, self.flops_multiplier)
    }
}

/// Fills `compute_gflops` from `examples_seen` wherever it is absent.
pub fn resolve_compute(records: &mut [RunRecord], cost: &CostSettings) -> Result<()> {
    for (i, r) in records.iter_mut().enumerate() {
        if r.compute_gflops.is_some() {
            continue;
        }
        let examples = r.examples_seen.ok_or_else(|| {
            Error::Validation(format!(
                "record {i} has neither compute_gflops nor examples_seen"
            ))
        })?;
        r.compute_gflops = Some(cost.training_compute(r.shape, examples)?);
    }
    Ok(())
}

/// Scaler settings carried in the tool config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalerSettings {
    /// Named exponent preset: "classification" or "multitask".
    pub exponent_preset: String,
    /// Per-dimension allocation weights; defaults to 1/3 each.
    pub weights: [f64; 3],
    pub head_multiple: u32,
    pub mlp_multiple: u32,
}

impl Default for ScalerSettings {
    fn default() -> Self {
        Self {
            exponent_preset: "classification".into(),
            weights: [1.0 / 3.0; 3],
            head_multiple: 16,
            mlp_multiple: 16,
        }
    }
}

/// Top-level tool configuration (JSON). Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub cost: CostSettings,
    pub fit: crate::fit::FitOptions,
    pub scaler: ScalerSettings,
}

impl ToolConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("config rejected: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<RunRecord> {
        vec![
            RunRecord {
                shape: Shape::new(608, 10, 928),
                dimension_under_test: None,
                examples_seen: Some(600_000_000),
                compute_gflops: None,
                metric_name: "inet10shot_error".into(),
                metric_value: 0.4321,
                tag: "grid".into(),
                extra: vec![("cluster".into(), "c1".into())],
            },
            RunRecord {
                shape: Shape::new(1968, 40, 1088),
                dimension_under_test: Some(ShapeDim::Mlp),
                examples_seen: Some(64_000_000),
                compute_gflops: Some(1.25e10),
                metric_name: "inet10shot_error".into(),
                metric_value: 0.2987654321098765,
                tag: String::new(),
                extra: vec![("cluster".into(), "c2".into())],
            },
        ]
    }

    fn roundtrip(records: &[RunRecord], format: RecordFormat) -> Vec<RunRecord> {
        let mut buf = Vec::new();
        emit_records(&mut buf, records, format).unwrap();
        parse_records(buf.as_slice(), format, "mem").unwrap()
    }

    #[test]
    fn csv_roundtrip_lossless() {
        let records = sample_records();
        assert_eq!(roundtrip(&records, RecordFormat::Csv), records);
    }

    #[test]
    fn jsonl_roundtrip_lossless() {
        let records = sample_records();
        assert_eq!(roundtrip(&records, RecordFormat::JsonLines), records);
    }

    #[test]
    fn emit_parse_is_canonical_fixpoint() {
        for format in [RecordFormat::Csv, RecordFormat::JsonLines] {
            let records = sample_records();
            let mut once = Vec::new();
            emit_records(&mut once, &records, format).unwrap();
            let reparsed = parse_records(once.as_slice(), format, "mem").unwrap();
            let mut twice = Vec::new();
            emit_records(&mut twice, &reparsed, format).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn csv_header_is_exact() {
        let mut buf = Vec::new();
        emit_records(&mut buf, &sample_records()[..0], RecordFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "width,depth,mlp_dim,dimension_under_test,examples_seen,compute_gflops,metric_name,metric_value,tag"
        );
    }

    #[test]
    fn rejects_nonpositive_metric_with_row_number() {
        let text = "width,depth,mlp_dim,dimension_under_test,examples_seen,compute_gflops,metric_name,metric_value,tag\n\
                    608,10,928,,600000000,,m,0.5,\n\
                    608,10,928,,600000000,,m,-0.5,\n";
        let err = parse_records(text.as_bytes(), RecordFormat::Csv, "bad.csv").unwrap_err();
        match err {
            Error::Parse {
                source_name, row, ..
            } => {
                assert_eq!(source_name, "bad.csv");
                assert_eq!(row, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_column_reported() {
        let text = "width,depth,mlp_dim\n608,10,928\n";
        let err = parse_records(text.as_bytes(), RecordFormat::Csv, "f.csv").unwrap_err();
        assert!(err.to_string().contains("metric_name") || err.to_string().contains("missing"));
    }

    #[test]
    fn resolve_compute_fills_gaps() {
        let mut records = sample_records();
        resolve_compute(&mut records, &CostSettings::default()).unwrap();
        assert!(records[0].compute_gflops.is_some());
        // already-present values are left untouched
        assert_eq!(records[1].compute_gflops, Some(1.25e10));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let good = ToolConfig::default().to_json();
        assert!(ToolConfig::from_json(&good).is_ok());
        let bad = r#"{"cost": {"patch_size": 14}, "frobnicate": 1}"#;
        assert!(ToolConfig::from_json(bad).is_err());
        let bad_nested = r#"{"cost": {"patch_sizes": 14}}"#;
        assert!(ToolConfig::from_json(bad_nested).is_err());
    }

    #[test]
    fn format_from_path() {
        use std::path::Path;
        assert_eq!(
            RecordFormat::from_path(Path::new("runs.jsonl")),
            RecordFormat::JsonLines
        );
        assert_eq!(
            RecordFormat::from_path(Path::new("runs.csv")),
            RecordFormat::Csv
        );
    }
}
