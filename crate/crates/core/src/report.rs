use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Mismatch,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub status: Status,
    pub lhs_rendered: String,
    pub rhs_rendered: String,
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub mismatch: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    /// Records `pass` or `fail` from a boolean.
    pub fn check(
        &mut self,
        id: impl Into<String>,
        ok: bool,
        lhs: impl ToString,
        rhs: impl ToString,
        note: impl Into<String>,
    ) {
        self.records.push(CheckRecord {
            check_id: id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            lhs_rendered: lhs.to_string(),
            rhs_rendered: rhs.to_string(),
            note: note.into(),
        });
    }

    /// Records `pass` when the sides agree and `mismatch` otherwise.
    pub fn compare(
        &mut self,
        id: impl Into<String>,
        ok: bool,
        lhs: impl ToString,
        rhs: impl ToString,
        note: impl Into<String>,
    ) {
        self.records.push(CheckRecord {
            check_id: id.into(),
            status: if ok { Status::Pass } else { Status::Mismatch },
            lhs_rendered: lhs.to_string(),
            rhs_rendered: rhs.to_string(),
            note: note.into(),
        });
    }

    pub fn skip(&mut self, id: impl Into<String>, note: impl Into<String>) {
        self.records.push(CheckRecord {
            check_id: id.into(),
            status: Status::Skipped,
            lhs_rendered: String::new(),
            rhs_rendered: String::new(),
            note: note.into(),
        });
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check_id == id)
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.records {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Mismatch => s.mismatch += 1,
                Status::Skipped => s.skipped += 1,
            }
        }
        s
    }

    /// No failures and no mismatches.
    pub fn all_pass(&self) -> bool {
        self.records
            .iter()
            .all(|r| matches!(r.status, Status::Pass | Status::Skipped))
    }
}
