//! Whitelist of known typesetting errata: mismatches against printed
//! formulas that are documented and do not fail a run.

use serde::Deserialize;
use twistor_core::{CheckRecord, Status};

const ERRATA_JSON: &str = include_str!("../data/errata.json");

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Erratum {
    /// Exact check id, or a prefix followed by `*`.
    pub pattern: String,
    pub reason: String,
}

impl Erratum {
    pub fn matches(&self, check_id: &str) -> bool {
        match self.pattern.strip_suffix('*') {
            Some(prefix) => check_id.starts_with(prefix),
            None => check_id == self.pattern,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Errata {
    entries: Vec<Erratum>,
}

impl Errata {
    /// The whitelist shipped with the binary.
    pub fn builtin() -> Self {
        Self::from_json(ERRATA_JSON).expect("bundled errata file is valid JSON")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        Ok(Errata {
            entries: serde_json::from_str(text)?,
        })
    }

    pub fn new(entries: Vec<Erratum>) -> Self {
        Errata { entries }
    }

    pub fn entries(&self) -> &[Erratum] {
        &self.entries
    }

    pub fn lookup(&self, check_id: &str) -> Option<&Erratum> {
        self.entries.iter().find(|e| e.matches(check_id))
    }

    /// Whether a mismatch on `record` is a documented erratum.
    pub fn covers(&self, record: &CheckRecord) -> bool {
        record.status == Status::Mismatch && self.lookup(&record.check_id).is_some()
    }

    /// Tags whitelisted mismatches with `erratum: <reason>`; statuses are
    /// left unchanged.
    pub fn annotate(&self, records: &mut [CheckRecord]) {
        for r in records.iter_mut().filter(|r| r.status == Status::Mismatch) {
            if let Some(e) = self.lookup(&r.check_id) {
                r.note = if r.note.is_empty() {
                    format!("erratum: {}", e.reason)
                } else {
                    format!("erratum: {}; {}", e.reason, r.note)
                };
            }
        }
    }
}
