//! JSONL, CSV and plain-text outputs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::record::SieveRecord;
use crate::scan::ScanReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
    Summary,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Jsonl, Format::Csv, Format::Summary];

    pub fn file_name(self) -> &'static str {
        match self {
            Format::Jsonl => "records.jsonl",
            Format::Csv => "records.csv",
            Format::Summary => "summary.txt",
        }
    }
}

/// Writes `bytes` next to `path` and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_data()
        })
        .and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn jsonl(records: &[SieveRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    n: u64,
    m: u64,
    stage: String,
    xyzt_integer: bool,
    nozaki_integer: bool,
    refutation: &'a str,
}

pub fn csv(records: &[SieveRecord], path: &Path) -> Result<Vec<u8>> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(["n", "m", "stage", "xyzt_integer", "nozaki_integer", "refutation"])
        .map_err(csv_err)?;
    for r in records {
        w.serialize(CsvRow {
            n: r.n,
            m: r.m,
            stage: r.stage.to_string(),
            xyzt_integer: r.xyzt_integer,
            nozaki_integer: r.nozaki_integer,
            refutation: r.refutation.as_deref().unwrap_or(""),
        })
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| csv_err(e.into_error().into()))
}

fn pairs(xs: &[(u64, u64)]) -> String {
    if xs.is_empty() {
        return "none".to_string();
    }
    let items: Vec<String> = xs.iter().map(|(n, m)| format!("({n},{m})")).collect();
    items.join(" ")
}

pub fn summary(report: &ScanReport) -> String {
    let c = &report.counts;
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line(format!("mode: {}", report.mode));
    line(format!("dimensions: {}..={}", report.n_min, report.n_max));
    line(format!("candidates: {}", c.candidates));
    if report.mode == crate::record::Mode::Staged {
        line(format!("coarse sieve failures: {}", c.coarse_fail));
        line(format!("fine sieve failures: {}", c.fine_fail));
    }
    line(format!("XYZT non-integer: {}", c.xyzt_fail));
    line(format!("XYZT integer: {}", c.xyzt_pass));
    line(format!("Nozaki product integer: {}", c.nozaki_pass));
    line(format!("Nozaki product integer, XYZT non-integer: {}", c.nozaki_only));
    line(format!("failed at NozakiIntegrality: {}", c.nozaki_fail));
    if report.k_factorization_stage {
        line(format!("failed at NozakiFactorization: {}", c.factorization_fail));
    }
    line(format!("refuted by spectrum analysis: {}", c.spectrum_refuted));
    line(format!("survivors: {}", c.survivors));
    line(format!(
        "smallest XYZT-integer pair: {}",
        report
            .xyzt_pass
            .first()
            .map_or("none".to_string(), |(n, m)| format!("({n},{m})"))
    ));
    line(format!(
        "dimensions with several XYZT-integer M: {}",
        report.multi_m.len()
    ));
    let mut several = String::new();
    for (n, ms) in &report.multi_m {
        let ms: Vec<String> = ms.iter().map(u64::to_string).collect();
        let _ = write!(several, " n={n}: M={}", ms.join(","));
        several.push(';');
    }
    if !several.is_empty() {
        line(format!(" {}", several.trim()));
    }
    line(format!("Nozaki-only pairs: {}", pairs(&report.nozaki_only)));
    line(format!("survivor list: {}", pairs(&report.survivors)));
    if !report.survivors.is_empty() {
        line(
            "survivors are not designs yet: confirm each exactly (e.g. check that the nearest \
             integers satisfy the defining relations)"
                .to_string(),
        );
    }
    s
}

/// Writes one output format into `dir` and returns its path.
pub fn write_report(
    records: &[SieveRecord],
    report: &ScanReport,
    format: Format,
    dir: &Path,
) -> Result<PathBuf> {
    let path = dir.join(format.file_name());
    let bytes = match format {
        Format::Jsonl => jsonl(records).into_bytes(),
        Format::Csv => csv(records, &path)?,
        Format::Summary => summary(report).into_bytes(),
    };
    write_atomic(&path, &bytes)?;
    Ok(path)
}
