//! The per-candidate audit record and the staged pipeline that fills it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact::{is_integer, to_decimal_directed, to_exact_string};
use crate::formulas::{derived_quantities, nozaki_bound, nozaki_from, xyzt_from, DesignCandidate};
use crate::sieve::{coarse_sieve, fine_sieve, GuardCoverage, LemmaVerdict};
use crate::spectrum::{
    full_candidate_analysis, k_factorization_feasible, AnalysisOutcome, Policy, SpectrumAnalysis,
};
use crate::{CertifiedInterval, Result};

/// Digits after the decimal point in serialized enclosure endpoints.
const ENDPOINT_DIGITS: u32 = 30;

/// Pipeline stages, in order. A record names the first stage the
/// candidate failed, or `Survivor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    CoarseSieve,
    FineSieve,
    XYZTIntegrality,
    NozakiIntegrality,
    /// Optional: the integer product of the `k`s must split into four
    /// admissible integers summing to 1.
    NozakiFactorization,
    SpectrumAnalysis,
    Survivor,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Lemma sieves first, then exact integrality.
    Staged,
    /// Exact integrality for every `M`.
    Brute,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Staged => "staged",
            Mode::Brute => "brute",
        })
    }
}

/// Everything that changes what a scan records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSettings {
    pub mode: Mode,
    pub policy: Policy,
    pub k_factorization_stage: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            mode: Mode::Staged,
            policy: Policy::default(),
            k_factorization_stage: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub case: String,
    pub passed: bool,
    pub required: String,
    pub coverage: String,
}

impl<C: fmt::Display> From<&LemmaVerdict<C>> for LemmaRecord {
    fn from(v: &LemmaVerdict<C>) -> Self {
        let coverage = match &v.coverage {
            GuardCoverage::Unique => "unique".to_string(),
            GuardCoverage::Overlap(cases) => {
                let names: Vec<String> = cases.iter().map(|c| c.to_string()).collect();
                format!("overlap({})", names.join(","))
            }
            GuardCoverage::Uncovered => "uncovered".to_string(),
        };
        LemmaRecord {
            case: v.case.to_string(),
            passed: v.passed,
            required: v.required.clone(),
            coverage,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub quantity: String,
    pub outcome: String,
    pub precision_bits: u32,
}

/// One candidate's trip through the pipeline. Serializes to one JSONL line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveRecord {
    pub n: u64,
    pub m: u64,
    pub stage: Stage,
    pub coarse: bool,
    pub lemma3: LemmaRecord,
    pub lemma5: LemmaRecord,
    pub xyzt: String,
    pub xyzt_integer: bool,
    pub nozaki: String,
    pub nozaki_integer: bool,
    pub k_bound: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_factorization: Option<bool>,
    /// Enclosures of `a, b, c, d` as `[lo, hi]` decimal strings.
    pub roots: Vec<[String; 2]>,
    pub xyz_t: Vec<[String; 2]>,
    pub k: Vec<[String; 2]>,
    pub verdicts: Vec<VerdictRecord>,
    pub refutation: Option<String>,
    pub precision_bits: u32,
}

impl SieveRecord {
    pub fn is_survivor(&self) -> bool {
        self.stage == Stage::Survivor
    }
}

fn endpoints(e: &CertifiedInterval) -> [String; 2] {
    [
        to_decimal_directed(e.lo(), ENDPOINT_DIGITS, false),
        to_decimal_directed(e.hi(), ENDPOINT_DIGITS, true),
    ]
}

fn describe_spectrum(a: &SpectrumAnalysis) -> Option<String> {
    match &a.outcome {
        AnalysisOutcome::Refuted(r) => Some(r.to_string()),
        AnalysisOutcome::NumericalSurvivor => None,
        AnalysisOutcome::Undecided => None,
    }
}

/// Runs every stage on `c` and records the first one it fails.
///
/// In brute mode the lemma verdicts are still recorded but do not stage
/// the candidate.
pub fn analyze_candidate(c: &DesignCandidate, settings: &PipelineSettings) -> Result<SieveRecord> {
    let q = derived_quantities(c);
    let coarse = coarse_sieve(c);
    let fine = fine_sieve(c);
    let xyzt = xyzt_from(&q)?;
    let nozaki = nozaki_from(&q)?;
    let (xyzt_integer, nozaki_integer) = (is_integer(&xyzt), is_integer(&nozaki));
    let k_bound = nozaki_bound(c.n());
    let k_factorization = (settings.k_factorization_stage && nozaki_integer)
        .then(|| k_factorization_feasible(nozaki.numer(), k_bound));
    let analysis = full_candidate_analysis(c, &settings.policy)?;

    let staged = settings.mode == Mode::Staged;
    let refutation;
    let stage = if staged && !coarse {
        let (n, m) = (c.n(), c.m());
        refutation = Some(if (12 * m as u128) % n as u128 != 0 {
            format!("{n} | 12*{m} fails")
        } else {
            format!("{} | 4*{m}^2 fails", n + 1)
        });
        Stage::CoarseSieve
    } else if staged && !fine.passed {
        let failed = if fine.lemma3.passed { &fine.lemma5.required } else { &fine.lemma3.required };
        refutation = Some(format!("{failed} fails"));
        Stage::FineSieve
    } else if !xyzt_integer {
        refutation = Some("XYZT is not an integer".to_string());
        Stage::XYZTIntegrality
    } else if !nozaki_integer {
        refutation = Some("k_a k_b k_c k_d is not an integer".to_string());
        Stage::NozakiIntegrality
    } else if k_factorization == Some(false) {
        refutation = Some(format!("no four integers with |k| <= {k_bound} sum to 1 with product {}", nozaki.numer()));
        Stage::NozakiFactorization
    } else if let Some(r) = describe_spectrum(&analysis) {
        refutation = Some(r);
        Stage::SpectrumAnalysis
    } else {
        refutation = None;
        Stage::Survivor
    };

    let roots = analysis
        .spectrum
        .as_ref()
        .map(|s| s.roots().iter().map(endpoints).collect())
        .unwrap_or_default();
    let xyz_t = analysis
        .distances
        .as_ref()
        .map(|d| d.values.iter().map(endpoints).collect())
        .unwrap_or_default();
    let k = analysis
        .nozaki
        .as_ref()
        .map(|k| k.values.iter().map(endpoints).collect())
        .unwrap_or_default();
    let verdicts = analysis
        .verdicts
        .iter()
        .map(|(quantity, v)| VerdictRecord {
            quantity: quantity.to_string(),
            outcome: v.outcome.to_string(),
            precision_bits: v.precision_used,
        })
        .collect();
    Ok(SieveRecord {
        n: c.n(),
        m: c.m(),
        stage,
        coarse,
        lemma3: (&fine.lemma3).into(),
        lemma5: (&fine.lemma5).into(),
        xyzt: to_exact_string(&xyzt),
        xyzt_integer,
        nozaki: to_exact_string(&nozaki),
        nozaki_integer,
        k_bound,
        k_factorization,
        roots,
        xyz_t,
        k,
        verdicts,
        refutation,
        precision_bits: analysis.precision_bits,
    })
}

/// Whether a survivor's spectrum quantities all look like integers, as
/// opposed to precision having run out.
pub fn survivor_kind(record: &SieveRecord) -> Option<&'static str> {
    if !record.is_survivor() {
        return None;
    }
    let numerical = record.verdicts.len() == 8
        && record
            .verdicts
            .iter()
            .all(|v| v.outcome.starts_with("NumericallyInteger"));
    Some(if numerical { "numerically integral" } else { "undecided" })
}
