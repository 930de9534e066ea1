//! CSV rendering of suite results (schema `fermicov-schema v1`).

use serde::Serialize;

use crate::verify::{BoundReport, SharpnessReport};

pub const SCHEMA_LINE: &str = "# fermicov-schema v1";

/// 17 significant digits, round-trip safe.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn bound_reports_csv(reports: &[BoundReport]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str("instance_id,seed,d,m,N,n,beta,det_re,det_im,det_abs,bound,slack,pass\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.instance_id,
            r.seed,
            r.d,
            r.m,
            r.order,
            r.n,
            fmt_f64(r.beta),
            fmt_f64(r.det.re),
            fmt_f64(r.det.im),
            fmt_f64(r.det_abs),
            fmt_f64(r.bound),
            fmt_f64(r.slack),
            r.pass
        ));
    }
    out
}

pub fn sharpness_reports_csv(reports: &[SharpnessReport]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str("epsilon,beta,lambda,n,N,det_abs,lower_bound,closed_form,closed_form_rel_err,pass\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            fmt_f64(r.beta),
            fmt_f64(r.lambda),
            r.n,
            r.order,
            fmt_f64(r.det_abs),
            fmt_f64(r.lower_bound),
            fmt_f64(r.closed_form),
            fmt_f64(r.closed_form_rel_err),
            r.pass
        ));
    }
    out
}

/// Generic table with a header row; cells are written verbatim.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// The JSON summary written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub count: usize,
    pub failures: Vec<u64>,
    pub min_slack: Option<f64>,
    pub wall_time_s: f64,
}

impl Summary {
    pub fn from_bound_reports(suite: &str, reports: &[BoundReport], wall_time_s: f64) -> Self {
        Self {
            suite: suite.to_string(),
            count: reports.len(),
            failures: reports.iter().filter(|r| !r.pass).map(|r| r.seed).collect(),
            min_slack: reports.iter().map(|r| r.slack).reduce(f64::min),
            wall_time_s,
        }
    }
}
