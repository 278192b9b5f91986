use std::fs;

use design_sieve::ledger::{resume_ledger, LEDGER_FILE};
use design_sieve::record::{Mode, PipelineSettings, Stage};
use design_sieve::report::Format;
use design_sieve::scan::{dimension_path, scan, scan_dimension, ScanOptions};
use design_sieve::spectrum::Policy;
use design_sieve::Error;

fn opts(lo: u64, hi: u64) -> ScanOptions {
    ScanOptions::new(lo, hi, PipelineSettings::default())
}

#[test]
fn worker_count_does_not_change_outputs() {
    let serial = tempfile::tempdir().unwrap();
    let parallel = tempfile::tempdir().unwrap();
    let mut o = opts(3, 80);
    o.jobs = 1;
    scan(&o, serial.path()).unwrap();
    o.jobs = 4;
    scan(&o, parallel.path()).unwrap();
    for f in Format::ALL {
        assert_eq!(
            fs::read(serial.path().join(f.file_name())).unwrap(),
            fs::read(parallel.path().join(f.file_name())).unwrap(),
            "{f:?}"
        );
    }
}

#[test]
fn staging_is_monotone() {
    for settings in [
        PipelineSettings::default(),
        PipelineSettings {
            mode: Mode::Brute,
            ..PipelineSettings::default()
        },
    ] {
        for n in [7, 20, 47] {
            for r in scan_dimension(n, &settings).unwrap().records {
                let passed = [
                    (Stage::CoarseSieve, r.coarse || settings.mode == Mode::Brute),
                    (Stage::FineSieve, r.lemma3.passed && r.lemma5.passed || settings.mode == Mode::Brute),
                    (Stage::XYZTIntegrality, r.xyzt_integer),
                    (Stage::NozakiIntegrality, r.nozaki_integer),
                ];
                for (stage, ok) in passed {
                    if r.stage > stage {
                        assert!(ok, "({},{}) reached {:?} without passing {stage:?}", r.n, r.m, r.stage);
                    }
                }
                assert_eq!(r.refutation.is_none(), r.is_survivor());
            }
        }
    }
}

#[test]
fn resume_processes_only_missing_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    scan(&opts(3, 20), dir.path()).unwrap();
    // A stale dimension file that the ledger does not cover is recomputed.
    fs::write(dimension_path(dir.path(), 21), b"garbage").unwrap();
    let mut o = opts(3, 30);
    o.resume = true;
    let (report, _) = scan(&o, dir.path()).unwrap();
    let done = resume_ledger(dir.path()).unwrap();
    assert_eq!(done.keys().copied().collect::<Vec<_>>(), (3..=30).collect::<Vec<_>>());
    let fresh = tempfile::tempdir().unwrap();
    let (expected, _) = scan(&opts(3, 30), fresh.path()).unwrap();
    assert_eq!(report, expected);
    let ledger = fs::read_to_string(dir.path().join(LEDGER_FILE)).unwrap();
    assert_eq!(ledger.lines().count(), 28);
}

#[test]
fn tampered_dimension_file_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    scan(&opts(3, 10), dir.path()).unwrap();
    let path = dimension_path(dir.path(), 7);
    let mut bytes = fs::read(&path).unwrap();
    bytes.push(b' ');
    fs::write(&path, bytes).unwrap();
    let mut o = opts(3, 10);
    o.resume = true;
    assert!(matches!(scan(&o, dir.path()), Err(Error::ChecksumMismatch { n: 7 })));
}

#[test]
fn resume_with_other_settings_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    scan(&opts(3, 8), dir.path()).unwrap();
    let mut o = ScanOptions::new(
        3,
        8,
        PipelineSettings {
            policy: Policy {
                precision_max: 256,
                ..Policy::default()
            },
            ..PipelineSettings::default()
        },
    );
    o.resume = true;
    assert!(matches!(scan(&o, dir.path()), Err(Error::SettingsMismatch { .. })));
}

#[test]
fn truncated_ledger_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    scan(&opts(3, 6), dir.path()).unwrap();
    let path = dir.path().join(LEDGER_FILE);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() - 5]).unwrap();
    let mut o = opts(3, 6);
    o.resume = true;
    match scan(&o, dir.path()) {
        Err(Error::CorruptLedger { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn jsonl_lines_are_ordered_by_n_then_m() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = opts(3, 120);
    o.jobs = 3;
    let (_, records) = scan(&o, dir.path()).unwrap();
    let keys: Vec<(u64, u64)> = records.iter().map(|r| (r.n, r.m)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let text = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(text.lines().count(), records.len());
    assert!(text.starts_with("{\"n\":7,\"m\":196,"));
}

#[test]
fn k_factorization_stage_only_adds_refutations() {
    let without = scan_dimension(7, &PipelineSettings::default()).unwrap();
    let with = scan_dimension(
        7,
        &PipelineSettings {
            k_factorization_stage: true,
            ..PipelineSettings::default()
        },
    )
    .unwrap();
    assert_eq!(without.records.len(), with.records.len());
    assert_eq!(with.counts.factorization_fail, 1);
    assert_eq!(without.counts.factorization_fail, 0);
    assert_eq!(with.counts.xyzt_pass, without.counts.xyzt_pass);
}
