use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use cheby_core::conditions::{ConditionReport, ConditionRow};
use cheby_core::continuous::{EstimatesReport, Relation};
use cheby_core::discrete::Chain;
use cheby_core::io::{fmt_num, write_csv, ReportRow};
use cheby_core::lab::CampaignReport;
use cheby_core::report::BoundReport;
use cheby_core::{Curvature, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub struct Sink {
    format: Format,
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(format: Option<Format>, out: Option<PathBuf>) -> Self {
        let format = format.unwrap_or_else(|| {
            if out.is_none() && std::io::stdout().is_terminal() {
                Format::Text
            } else {
                Format::Json
            }
        });
        Self { format, out }
    }

    pub fn emit<F>(&self, render: F) -> Result<()>
    where
        F: FnOnce(Format) -> Result<String>,
    {
        let text = render(self.format)?;
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
            }
        }
        Ok(())
    }
}

pub fn csv_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

const DIVERGENCE_NOTE: &str =
    "DIVERGENT: candidates still improve toward the edge of the s range; the bound may be infinite";

pub fn bound_text(row: &ReportRow) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "theorem     {}", row.theorem);
    let _ = writeln!(s, "lhs         {}", fmt_num(row.lhs));
    let _ = writeln!(s, "bound       {}", fmt_num(row.bound));
    let _ = writeln!(s, "extremal_s  {}", fmt_num(row.extremal_s));
    let _ = writeln!(s, "slack       {}", fmt_num(row.slack));
    let _ = writeln!(s, "holds       {}", row.holds);
    let _ = writeln!(s, "divergent   {}", row.divergent);
    if row.divergent {
        let _ = writeln!(s, "{DIVERGENCE_NOTE}");
    }
    s
}

pub fn rows_text(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:>16} {:>16} {:>12} {:>14} {:>6} {:>9}",
        "theorem", "lhs", "bound", "extremal_s", "slack", "holds", "divergent"
    );
    for r in rows {
        let ext = if r.extremal_s.is_nan() {
            "-".to_string()
        } else {
            fmt_num(r.extremal_s)
        };
        let _ = writeln!(
            s,
            "{:<22} {:>16} {:>16} {:>12} {:>14} {:>6} {:>9}",
            r.theorem,
            fmt_num(r.lhs),
            fmt_num(r.bound),
            ext,
            fmt_num(r.slack),
            r.holds,
            r.divergent
        );
    }
    if rows.iter().any(|r| r.divergent) {
        let _ = writeln!(s, "{DIVERGENCE_NOTE}");
    }
    s
}

fn row(id: &str, theorem: &str, lhs: f64, bound: f64, relation: Relation, holds: bool) -> ReportRow {
    ReportRow {
        instance_id: id.to_string(),
        theorem: theorem.to_string(),
        lhs,
        bound,
        extremal_s: f64::NAN,
        slack: relation.slack(lhs, bound),
        holds,
        divergent: false,
    }
}

/// Rows for the classical and Jensen-type estimates.
pub fn estimate_rows(id: &str, e: &EstimatesReport, curvature: Curvature) -> Vec<ReportRow> {
    let at_most = match curvature {
        Curvature::Convex => Relation::AtMost,
        Curvature::Concave => Relation::AtLeast,
    };
    let mut rows = vec![
        row(
            id,
            "estimate-classical",
            e.lhs,
            e.classical_rhs,
            e.classical_relation,
            e.classical_holds,
        ),
        row(
            id,
            "estimate-ordering",
            e.jensen_rhs,
            e.classical_rhs,
            at_most,
            e.jensen_ordering_holds,
        ),
    ];
    if let Some(holds) = e.jensen_bound_holds {
        rows.push(row(id, "estimate-jensen", e.lhs, e.jensen_rhs, at_most, holds));
    }
    rows
}

#[derive(Serialize)]
pub struct ConditionOutput<'a> {
    r: f64,
    direction: String,
    passed: bool,
    boundary_ratio: f64,
    worst_s: f64,
    worst_margin: f64,
    edge_growth: bool,
    bound: Option<&'a BoundReport>,
    rows: Vec<ConditionRow>,
}

impl<'a> ConditionOutput<'a> {
    pub fn new(c: &ConditionReport, bound: Option<&'a BoundReport>) -> Self {
        Self {
            r: c.r,
            direction: c.direction.to_string(),
            passed: c.passed,
            boundary_ratio: c.boundary_ratio,
            worst_s: c.worst_s,
            worst_margin: c.worst_margin,
            edge_growth: c.edge_growth,
            bound,
            rows: c.rows(),
        }
    }
}

pub fn condition_text(c: &ConditionReport, bound: Option<&BoundReport>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "direction     {} (r = {})", c.direction, fmt_num(c.r));
    let _ = writeln!(s, "grid points   {}", c.grid.len());
    let _ = writeln!(s, "R(b)          {}", fmt_num(c.boundary_ratio));
    let _ = writeln!(s, "worst s       {}", fmt_num(c.worst_s));
    let _ = writeln!(s, "worst margin  {}", fmt_num(c.worst_margin));
    let _ = writeln!(s, "edge growth   {}", c.edge_growth);
    let _ = writeln!(s, "condition     {}", if c.passed { "passed" } else { "FAILED" });
    match bound {
        Some(b) => {
            let _ = writeln!(s, "lhs           {}", fmt_num(b.lhs));
            let _ = writeln!(s, "bound         {}", fmt_num(b.bound));
            let _ = writeln!(s, "slack         {}", fmt_num(b.slack));
            let _ = writeln!(s, "holds         {}", b.holds);
        }
        None if c.passed => {
            let _ = writeln!(s, "bound         skipped (f is not tagged nonincreasing)");
        }
        None => {}
    }
    s
}

pub fn fuzz_text(report: &CampaignReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed {}  trials {}", report.config.seed, report.config.trials);
    let _ = writeln!(
        s,
        "{:<20} {:>8} {:>8} {:>8} {:>8} {:>8} {:>7} {:>8} {:>14}",
        "target", "checked", "held", "violated", "skipped", "errors", "oracle", "diverg", "worst_rel"
    );
    for t in &report.targets {
        let name = if t.control {
            format!("{} (control)", t.target)
        } else {
            t.target.clone()
        };
        let _ = writeln!(
            s,
            "{:<20} {:>8} {:>8} {:>8} {:>8} {:>8} {:>7} {:>8} {:>14}",
            name,
            t.checked,
            t.held,
            t.violated,
            t.skipped,
            t.errors,
            t.oracle_mismatches,
            t.divergent,
            t.worst_rel_slack.map_or("-".into(), fmt_num)
        );
    }
    for v in &report.violations {
        let _ = writeln!(
            s,
            "violation: {} trial {} outer {} slack {} {}",
            v.target,
            v.trial,
            v.outer,
            v.slack.map_or("-".into(), fmt_num),
            v.note
        );
    }
    s
}

#[derive(Serialize)]
pub struct ChainRow {
    stage: usize,
    len: usize,
    case: String,
    lhs: f64,
    bound: f64,
    extremal_s: usize,
    lhs_nondecreasing: bool,
    bound_nonincreasing: bool,
}

pub fn chain_rows(chain: &Chain) -> Vec<ChainRow> {
    chain
        .stages
        .iter()
        .enumerate()
        .map(|(i, st)| ChainRow {
            stage: i,
            len: st.seq.len(),
            case: st.case.map_or("input".into(), |c| {
                serde_json::to_value(c)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default()
            }),
            lhs: st.lhs,
            bound: st.bound,
            extremal_s: st.extremal_s,
            lhs_nondecreasing: st.lhs_nondecreasing,
            bound_nonincreasing: st.bound_nonincreasing,
        })
        .collect()
}

pub fn chain_text(chain: &Chain) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>4} {:<12} {:>16} {:>16} {:>10}",
        "stage", "len", "case", "lhs", "bound", "extremal_s"
    );
    for r in chain_rows(chain) {
        let flag = if r.lhs_nondecreasing && r.bound_nonincreasing {
            ""
        } else {
            "  LAW BROKEN"
        };
        let _ = writeln!(
            s,
            "{:>5} {:>4} {:<12} {:>16} {:>16} {:>10}{flag}",
            r.stage,
            r.len,
            r.case,
            fmt_num(r.lhs),
            fmt_num(r.bound),
            r.extremal_s
        );
    }
    let _ = writeln!(s, "laws hold   {}", chain.laws_hold());
    s
}
