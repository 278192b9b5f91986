//! Append-only completion ledger for resumable scans.
//!
//! One line per finished dimension:
//! `done n=<n> records=<count> checksum=<sha256 of the dimension file>`.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const LEDGER_FILE: &str = "ledger.txt";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub n: u64,
    pub records: usize,
    pub checksum: String,
}

impl LedgerEntry {
    pub fn line(&self) -> String {
        format!(
            "done n={} records={} checksum={}\n",
            self.n, self.records, self.checksum
        )
    }
}

pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn ledger_path(out: &Path) -> PathBuf {
    out.join(LEDGER_FILE)
}

fn field<'a>(token: Option<&'a str>, key: &str) -> std::result::Result<&'a str, String> {
    let token = token.ok_or_else(|| format!("missing {key}="))?;
    token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| format!("expected {key}=…, found {token:?}"))
}

fn parse_line(line: &str) -> std::result::Result<LedgerEntry, String> {
    let mut tokens = line.split(' ');
    if tokens.next() != Some("done") {
        return Err("expected a line starting with \"done\"".into());
    }
    let n = field(tokens.next(), "n")?
        .parse()
        .map_err(|e| format!("bad n: {e}"))?;
    let records = field(tokens.next(), "records")?
        .parse()
        .map_err(|e| format!("bad record count: {e}"))?;
    let checksum = field(tokens.next(), "checksum")?;
    if checksum.len() != 64 || !checksum.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(format!("bad checksum {checksum:?}"));
    }
    if tokens.next().is_some() {
        return Err("trailing data".into());
    }
    Ok(LedgerEntry {
        n,
        records,
        checksum: checksum.to_ascii_lowercase(),
    })
}

/// Completed dimensions recorded under `out`; empty if there is no ledger.
///
/// Any malformed line, including a final line without its newline, is an
/// error naming that line.
pub fn resume_ledger(out: &Path) -> Result<BTreeMap<u64, LedgerEntry>> {
    let path = ledger_path(out);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut done = BTreeMap::new();
    let mut rest = text.as_str();
    let mut line_no = 0;
    while !rest.is_empty() {
        line_no += 1;
        let corrupt = |reason: String| Error::CorruptLedger {
            path: path.clone(),
            line: line_no,
            reason,
        };
        let Some((line, tail)) = rest.split_once('\n') else {
            return Err(corrupt(format!("truncated line {rest:?}")));
        };
        rest = tail;
        let entry = parse_line(line).map_err(corrupt)?;
        if let Some(prev) = done.get(&entry.n) {
            if prev != &entry {
                return Err(corrupt(format!("conflicting entry for n={}", entry.n)));
            }
        }
        done.insert(entry.n, entry);
    }
    Ok(done)
}

/// Appends one completion marker and flushes it to disk.
pub fn append(out: &Path, entry: &LedgerEntry) -> Result<()> {
    let path = ledger_path(out);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    file.write_all(entry.line().as_bytes())
        .and_then(|()| file.sync_data())
        .map_err(|e| Error::io(&path, e))
}

/// Empties the ledger for a fresh scan.
pub fn reset(out: &Path) -> Result<()> {
    let path = ledger_path(out);
    fs::write(&path, "").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(n: u64) -> LedgerEntry {
        LedgerEntry {
            n,
            records: 2,
            checksum: checksum(format!("dim {n}").as_bytes()),
        }
    }

    #[test]
    fn fresh_directory_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(resume_ledger(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for n in [5, 3, 4] {
            append(dir.path(), &entry(n)).unwrap();
        }
        let done = resume_ledger(dir.path()).unwrap();
        assert_eq!(done.keys().copied().collect::<Vec<_>>(), vec![3, 4, 5]);
        assert_eq!(done[&4], entry(4));
    }

    #[test]
    fn truncated_final_line_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        append(dir.path(), &entry(3)).unwrap();
        let mut text = fs::read_to_string(ledger_path(dir.path())).unwrap();
        text.push_str(&entry(4).line()[..20]);
        fs::write(ledger_path(dir.path()), text).unwrap();
        match resume_ledger(dir.path()) {
            Err(Error::CorruptLedger { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn garbage_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let good = entry(3).line();
        for bad in [
            "done n=x records=1 checksum=00\n",
            "finished n=4\n",
            "done n=4 records=1\n",
            "\n",
        ] {
            fs::write(ledger_path(dir.path()), format!("{good}{good}{bad}")).unwrap();
            match resume_ledger(dir.path()) {
                Err(Error::CorruptLedger { line, .. }) => assert_eq!(line, 3, "{bad:?}"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn conflicting_duplicates_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut other = entry(3);
        other.records = 7;
        fs::write(
            ledger_path(dir.path()),
            format!("{}{}", entry(3).line(), other.line()),
        )
        .unwrap();
        assert!(matches!(
            resume_ledger(dir.path()),
            Err(Error::CorruptLedger { line: 2, .. })
        ));
    }
}
