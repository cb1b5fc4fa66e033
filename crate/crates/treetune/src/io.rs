//! CSV ingestion and export of datasets.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use treetune_core::dataset::{CleanReport, Dataset, RawDataset};

use crate::error::{Error, Result};

/// Which column holds the response.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum ResponseColumn {
    #[default]
    First,
    /// Zero-based column index.
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ResponseColumn {
    type Err = String;

    /// A 1-based column number or a header name.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<usize>() {
            Ok(0) => Err("column numbers start at 1".into()),
            Ok(1) => Ok(ResponseColumn::First),
            Ok(i) => Ok(ResponseColumn::Index(i - 1)),
            Err(_) if !s.is_empty() => Ok(ResponseColumn::Name(s.to_string())),
            Err(_) => Err("empty response column".into()),
        }
    }
}

/// Empty cells, `NA` and `NaN` (any case) are missing.
pub fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

fn parse_cell(cell: &str) -> Result<Option<f64>, String> {
    let cell = cell.trim();
    if is_missing(cell) {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("`{cell}` is neither a number nor a missing marker")),
    }
}

/// Parses a headed CSV table. Missing cells stay missing.
pub fn read_csv<R: Read>(reader: R, name: &str, response: &ResponseColumn) -> Result<RawDataset, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err(format!("expected at least 2 columns, found {}", header.len()));
    }
    let ycol = match response {
        ResponseColumn::First => 0,
        ResponseColumn::Index(i) if *i < header.len() => *i,
        ResponseColumn::Index(i) => return Err(format!("response column {} is past the last column ({})", i + 1, header.len())),
        ResponseColumn::Name(n) => header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| format!("no column named `{n}`"))?,
    };
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); header.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != header.len() {
            return Err(format!("row {} has {} cells, expected {}", i + 2, record.len(), header.len()));
        }
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).map_err(|e| format!("row {}, column `{}`: {e}", i + 2, header[j]))?;
            columns[j].push(v);
        }
    }
    let response = columns.remove(ycol);
    let mut names = header;
    let response_name = names.remove(ycol);
    RawDataset::new(name, response_name, response, names, columns).map_err(|e| e.to_string())
}

/// Dataset name for a file: its stem.
pub fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn load_csv(path: &Path, response: &ResponseColumn) -> Result<RawDataset> {
    let file = fs::File::open(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    read_csv(file, &dataset_name(path), response).map_err(|m| Error::parse(path, m))
}

/// CSV text of a dense dataset, response first. Numbers use the shortest
/// representation that parses back to the same value.
pub fn dataset_csv(d: &Dataset) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![d.response_name.as_str()];
    header.extend(d.feature_names.iter().map(String::as_str));
    w.write_record(&header).expect("in-memory write");
    let x = d.features();
    for i in 0..d.n() {
        let mut row = vec![d.response()[i].to_string()];
        row.extend(x.row(i).iter().map(f64::to_string));
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Identity of a dataset used in run manifests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDigest {
    pub name: String,
    pub rows: usize,
    pub features: usize,
    /// SHA-256 of [`dataset_csv`].
    pub sha256: String,
}

impl DatasetDigest {
    pub fn of(d: &Dataset) -> Self {
        Self { name: d.name.clone(), rows: d.n(), features: d.p(), sha256: sha256_hex(&dataset_csv(d)) }
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })
}

pub fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

/// Sidecar written next to a cleaned CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanManifest {
    pub source: String,
    pub dataset: String,
    pub column_threshold: f64,
    pub rows_in: usize,
    pub rows_out: usize,
    /// Zero-based data rows removed for a missing response.
    pub rows_dropped: Vec<usize>,
    pub columns_dropped: Vec<String>,
    pub columns_kept: Vec<String>,
    pub imputed: Vec<(String, usize)>,
    pub imputed_cells: usize,
    pub sha256: String,
}

/// Writes `<name>.csv` and `<name>.clean.json` into `dir`; returns both paths.
pub fn write_cleaned(dir: &Path, source: &str, d: &Dataset, report: &CleanReport) -> Result<(PathBuf, PathBuf)> {
    let csv_path = dir.join(format!("{}.csv", d.name));
    let json_path = dir.join(format!("{}.clean.json", d.name));
    let bytes = dataset_csv(d);
    let manifest = CleanManifest {
        source: source.to_string(),
        dataset: d.name.clone(),
        column_threshold: report.column_threshold,
        rows_in: report.rows_in,
        rows_out: d.n(),
        rows_dropped: report.rows_dropped.clone(),
        columns_dropped: report.columns_dropped.clone(),
        columns_kept: d.feature_names.clone(),
        imputed: report.imputed.clone(),
        imputed_cells: report.imputed_cells,
        sha256: sha256_hex(&bytes),
    };
    write_file(&csv_path, &bytes)?;
    write_file(&json_path, &crate::formats::to_json(&manifest)?)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use treetune_core::dataset;

    #[test]
    fn parses_header_and_markers() {
        let text = "q,a,b\n1,2,3\n4,NA,6\nnan,8,\n10,11,12\n";
        let raw = read_csv(text.as_bytes(), "t", &ResponseColumn::First).unwrap();
        assert_eq!(raw.response_name, "q");
        assert_eq!(raw.feature_names, ["a", "b"]);
        assert_eq!(raw.response, [Some(1.0), Some(4.0), None, Some(10.0)]);
        assert_eq!(raw.features[0], [Some(2.0), None, Some(8.0), Some(11.0)]);
        assert_eq!(raw.features[1][2], None);
    }

    #[test]
    fn response_column_by_name_and_number() {
        let text = "a,q,b\n1,2,3\n";
        let raw = read_csv(text.as_bytes(), "t", &"q".parse().unwrap()).unwrap();
        assert_eq!((raw.response_name.as_str(), raw.response[0]), ("q", Some(2.0)));
        let raw = read_csv(text.as_bytes(), "t", &"3".parse().unwrap()).unwrap();
        assert_eq!(raw.response_name, "b");
        assert!("0".parse::<ResponseColumn>().is_err());
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(read_csv("q,a\n1,x\n".as_bytes(), "t", &ResponseColumn::First).unwrap_err().contains("`x`"));
        assert!(read_csv("q\n1\n".as_bytes(), "t", &ResponseColumn::First).is_err());
        assert!(read_csv("q,a\n1,inf\n".as_bytes(), "t", &ResponseColumn::First).is_err());
        assert!(read_csv("q,a\n1\n".as_bytes(), "t", &ResponseColumn::First).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let text = "y,x1,x2\n0.1,1e-300,3\n0.30000000000000004,2.5,-7\n1,2,3\n";
        let raw = read_csv(text.as_bytes(), "t", &ResponseColumn::First).unwrap();
        let (d, _) = dataset::clean(&raw, 0.5).unwrap();
        let again = read_csv(&dataset_csv(&d)[..], "t", &ResponseColumn::First).unwrap();
        let (e, _) = dataset::clean(&again, 0.5).unwrap();
        assert_eq!(d, e);
        assert_eq!(DatasetDigest::of(&d), DatasetDigest::of(&e));
    }
}
