//! Assembly of the verification suites and the exit-code contract.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use twistor_core::flow::flow_report;
use twistor_core::frame::{connection_display_report, consistency_suite, CurvatureModel};
use twistor_core::round::{bound_report, round_report};
use twistor_core::twistor::{
    complex_structure_check, curvature_report, einstein_report, gauge_invariance_check, ricci_form_check, ricci_report,
    skewness_report, verify_first_structure,
};
use twistor_core::{CheckRecord, Status, Summary, VerificationReport};

use crate::errata::Errata;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Structure,
    Kaehler,
    Ricci,
    Round,
    Flow,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Structure => "structure",
            Suite::Kaehler => "kaehler",
            Suite::Ricci => "ricci",
            Suite::Round => "round",
            Suite::Flow => "flow",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Round,
    Formalw,
}

impl Model {
    pub fn curvature_model(self) -> CurvatureModel {
        match self {
            Model::Round => CurvatureModel::Round,
            Model::Formalw => CurvatureModel::FormalW,
        }
    }
}

type Job = Box<dyn Fn() -> VerificationReport + Send + Sync>;

fn jobs(suite: Suite, models: &[CurvatureModel]) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    let includes = |s: Suite| suite == Suite::All || suite == s;
    if includes(Suite::Structure) {
        for &m in models {
            out.push(Box::new(move || consistency_suite(m)));
            out.push(Box::new(move || curvature_report(m)));
            out.push(Box::new(move || gauge_invariance_check(m)));
        }
        out.push(Box::new(connection_display_report));
        out.push(Box::new(verify_first_structure));
        out.push(Box::new(skewness_report));
    }
    if includes(Suite::Kaehler) {
        out.push(Box::new(complex_structure_check));
        for &m in models {
            out.push(Box::new(move || ricci_form_check(m)));
        }
    }
    if includes(Suite::Ricci) {
        for &m in models {
            out.push(Box::new(move || ricci_report(m)));
        }
        out.push(Box::new(einstein_report));
    }
    if includes(Suite::Round) {
        out.push(Box::new(round_report));
        out.push(Box::new(bound_report));
    }
    if includes(Suite::Flow) {
        out.push(Box::new(flow_report));
    }
    out
}

/// Runs the selected checks concurrently and merges them in a fixed order.
pub fn run_suite(suite: Suite, model: Option<Model>) -> VerificationReport {
    let models: Vec<CurvatureModel> = match model {
        Some(m) => vec![m.curvature_model()],
        None => CurvatureModel::ALL.to_vec(),
    };
    let parts: Vec<VerificationReport> = jobs(suite, &models).par_iter().map(|job| job()).collect();
    let mut report = VerificationReport::new();
    for part in parts {
        report.extend(part);
    }
    report
}

/// `0` when every record passes, is skipped, or is a whitelisted mismatch;
/// `1` otherwise.
pub fn exit_code(records: &[CheckRecord], errata: &Errata) -> i32 {
    let failing = records.iter().any(|r| match r.status {
        Status::Fail => true,
        Status::Mismatch => !errata.covers(r),
        Status::Pass | Status::Skipped => false,
    });
    i32::from(failing)
}

/// Machine-readable verification document; field order is the output order.
#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub suite: Suite,
    pub models: Vec<&'static str>,
    pub summary: Summary,
    /// Mismatches covered by the errata whitelist.
    pub errata: usize,
    pub exit_code: i32,
    pub records: Vec<CheckRecord>,
}

impl ReportDocument {
    pub fn build(suite: Suite, model: Option<Model>, report: VerificationReport, errata: &Errata) -> Self {
        let models = match model {
            Some(m) => vec![m.curvature_model().name()],
            None => CurvatureModel::ALL.iter().map(|m| m.name()).collect(),
        };
        let summary = report.summary();
        let mut records = report.records;
        let exit_code = exit_code(&records, errata);
        let whitelisted = records.iter().filter(|r| errata.covers(r)).count();
        errata.annotate(&mut records);
        ReportDocument {
            suite,
            models,
            summary,
            errata: whitelisted,
            exit_code,
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let status = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Mismatch => "MISMATCH",
                Status::Skipped => "SKIP",
            };
            s.push_str(&format!("{status:<8} {}", r.check_id));
            if r.status != Status::Pass {
                if !r.lhs_rendered.is_empty() || !r.rhs_rendered.is_empty() {
                    s.push_str(&format!("  [{} vs {}]", r.lhs_rendered, r.rhs_rendered));
                }
                if !r.note.is_empty() {
                    s.push_str(&format!("  ({})", r.note));
                }
            }
            s.push('\n');
        }
        let m = &self.summary;
        s.push_str(&format!(
            "suite {}: {} pass, {} fail, {} mismatch ({} erratum), {} skipped; exit {}\n",
            self.suite.name(),
            m.pass,
            m.fail,
            m.mismatch,
            self.errata,
            m.skipped,
            self.exit_code
        ));
        s
    }
}
