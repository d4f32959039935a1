//! Attribution reports: per-fact scores, rankings, CSV and JSON output.
//!
//! A [`ShapleyReport`] holds one exact rational score per endogenous fact,
//! tagged with the method that produced it. Facts are ranked by descending
//! score with ascending fact id breaking ties. Serialized reports carry the
//! score as an exact numerator/denominator pair plus a convenience float;
//! the JSON form may also carry a `meta` object (timestamp, wall time) which
//! is deliberately separate so that deterministic comparisons can ignore it.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::lineage::FactId;
use crate::{Error, Rational, Result};

/// How a report's scores were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact, via stratified model counting on a d-DNNF.
    ExactDdnnf,
    /// Exact, via probabilistic evaluation and interpolation.
    ExactPqe,
    /// Exact, by enumerating all coalitions.
    Brute,
    /// Inexact clause-structure score on the CNF encoding.
    Proxy,
    /// Monte Carlo permutation sampling.
    MonteCarlo,
    /// Weighted least-squares regression on sampled coalitions.
    KernelShap,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ExactDdnnf => "exact-ddnnf",
            Method::ExactPqe => "exact-pqe",
            Method::Brute => "brute",
            Method::Proxy => "proxy",
            Method::MonteCarlo => "mc",
            Method::KernelShap => "kernelshap",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag {
            "exact-ddnnf" => Method::ExactDdnnf,
            "exact-pqe" => Method::ExactPqe,
            "brute" => Method::Brute,
            "proxy" => Method::Proxy,
            "mc" => Method::MonteCarlo,
            "kernelshap" => Method::KernelShap,
            other => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("unknown method tag `{other}`"),
                })
            }
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Score of a single fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportEntry {
    pub fact: FactId,
    pub label: String,
    pub value: Rational,
}

/// A full attribution report over the endogenous facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapleyReport {
    method: Method,
    entries: Vec<ReportEntry>,
    fallback_reason: Option<String>,
}

/// Volatile provenance attached to serialized reports but excluded from
/// semantic comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMeta {
    /// Seconds since the Unix epoch at serialization time.
    pub generated_at: u64,
    /// Wall-clock duration of the computation, milliseconds.
    pub wall_ms: u64,
}

impl ShapleyReport {
    /// Builds a report; entries are sorted by fact id. Duplicate facts are
    /// a caller bug.
    pub fn new(method: Method, mut entries: Vec<ReportEntry>) -> Self {
        entries.sort_by_key(|e| e.fact);
        debug_assert!(
            entries.windows(2).all(|w| w[0].fact != w[1].fact),
            "duplicate fact in report"
        );
        ShapleyReport {
            method,
            entries,
            fallback_reason: None,
        }
    }

    /// Attaches the reason a fallback method was used.
    pub fn with_fallback_reason(mut self, reason: impl Into<String>) -> Self {
        self.fallback_reason = Some(reason.into());
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn fallback_reason(&self) -> Option<&str> {
        self.fallback_reason.as_deref()
    }

    /// Entries in ascending fact-id order.
    pub fn entries(&self) -> &[ReportEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn value_of(&self, fact: FactId) -> Option<&Rational> {
        self.entries
            .iter()
            .find(|e| e.fact == fact)
            .map(|e| &e.value)
    }

    pub fn value_map(&self) -> BTreeMap<FactId, Rational> {
        self.entries
            .iter()
            .map(|e| (e.fact, e.value.clone()))
            .collect()
    }

    /// Facts ordered by descending score; ties break toward the smaller id.
    pub fn ranking(&self) -> Vec<FactId> {
        let mut order: Vec<&ReportEntry> = self.entries.iter().collect();
        order.sort_by(|a, b| b.value.cmp(&a.value).then(a.fact.cmp(&b.fact)));
        order.into_iter().map(|e| e.fact).collect()
    }

    /// 1-based rank of every fact under [`Self::ranking`].
    fn ranks(&self) -> BTreeMap<FactId, usize> {
        self.ranking()
            .into_iter()
            .enumerate()
            .map(|(i, f)| (f, i + 1))
            .collect()
    }

    /// CSV with the stable columns
    /// `fact_id,label,value_num,value_den,value_float,rank`.
    pub fn to_csv(&self) -> Result<String> {
        let ranks = self.ranks();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["fact_id", "label", "value_num", "value_den", "value_float", "rank"])
            .map_err(csv_error)?;
        for e in &self.entries {
            w.write_record([
                e.fact.to_string(),
                e.label.clone(),
                e.value.numer().to_string(),
                e.value.denom().to_string(),
                rational_to_f64(&e.value).to_string(),
                ranks[&e.fact].to_string(),
            ])
            .map_err(csv_error)?;
        }
        let bytes = w.into_inner().expect("in-memory writer cannot fail");
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Pretty-printed JSON; `meta` is attached verbatim when given.
    pub fn to_json(&self, meta: Option<&ReportMeta>) -> String {
        let ranks = self.ranks();
        let doc = ReportJson {
            method: self.method.tag().to_string(),
            fallback_reason: self.fallback_reason.clone(),
            facts: self
                .entries
                .iter()
                .map(|e| FactJson {
                    fact_id: e.fact.0,
                    label: e.label.clone(),
                    value_num: e.value.numer().to_string(),
                    value_den: e.value.denom().to_string(),
                    value_float: rational_to_f64(&e.value),
                    rank: ranks[&e.fact],
                })
                .collect(),
            meta: meta.cloned(),
        };
        serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
    }

    /// Parses [`Self::to_json`] output. Ranks and floats are recomputed from
    /// the exact values; the meta object is returned separately.
    pub fn from_json(text: &str) -> Result<(Self, Option<ReportMeta>)> {
        let doc: ReportJson = serde_json::from_str(text)?;
        let method = Method::from_tag(&doc.method)?;
        let mut entries = Vec::with_capacity(doc.facts.len());
        let mut seen = std::collections::BTreeSet::new();
        for f in doc.facts {
            if !seen.insert(f.fact_id) {
                return Err(Error::DuplicateFact(FactId(f.fact_id)));
            }
            let num: BigInt = f.value_num.parse().map_err(|_| Error::Parse {
                line: 0,
                message: format!("invalid numerator `{}`", f.value_num),
            })?;
            let den: BigInt = f.value_den.parse().map_err(|_| Error::Parse {
                line: 0,
                message: format!("invalid denominator `{}`", f.value_den),
            })?;
            if den == BigInt::from(0) {
                return Err(Error::Parse {
                    line: 0,
                    message: "zero denominator".into(),
                });
            }
            entries.push(ReportEntry {
                fact: FactId(f.fact_id),
                label: f.label,
                value: Rational::new(num, den),
            });
        }
        let mut report = ShapleyReport::new(method, entries);
        report.fallback_reason = doc.fallback_reason;
        Ok((report, doc.meta))
    }
}

/// Converts to f64 by scaling both sides into range first, so values with
/// huge numerators or denominators do not collapse to `inf/inf`.
pub fn rational_to_f64(value: &Rational) -> f64 {
    if let Some(f) = value.to_f64() {
        if f.is_finite() {
            return f;
        }
    }
    let shift = i64::max(value.numer().bits() as i64, value.denom().bits() as i64) - 900;
    if shift > 0 {
        let n = value.numer() >> shift;
        let d = value.denom() >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    } else {
        f64::NAN
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    method: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    fallback_reason: Option<String>,
    facts: Vec<FactJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    meta: Option<ReportMeta>,
}

#[derive(Serialize, Deserialize)]
struct FactJson {
    fact_id: u32,
    label: String,
    value_num: String,
    value_den: String,
    value_float: f64,
    rank: usize,
}
