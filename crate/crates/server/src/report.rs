//! Offline analysis of downloaded XML logs.

use std::fmt::Write as _;

use serde::Serialize;

use postedit_core::analytics::{
    agreement, edit_type_frequencies, edits_time_correlation, selection_rates, time_edits_series, AgreementReport,
    AgreementVariable, Binning, EditFrequencies, SelectionTable, SeriesPoint,
};
use postedit_core::EditLogRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportKind {
    Selection,
    Kappa,
    Pearson,
    Edits,
    Series,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PearsonReport {
    /// Correlation between total edits and editing time over all records.
    pub rho: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesReport {
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Report {
    Selection(SelectionTable),
    Kappa(Vec<AgreementReport>),
    Pearson(PearsonReport),
    Edits(EditFrequencies),
    Series(SeriesReport),
}

pub fn build_report(kind: ReportKind, records: &[EditLogRecord], binning: Binning) -> postedit_core::Result<Report> {
    Ok(match kind {
        ReportKind::Selection => Report::Selection(selection_rates(records)),
        ReportKind::Kappa => Report::Kappa(
            AgreementVariable::ALL
                .into_iter()
                .map(|v| agreement(records, v, binning))
                .collect::<Result<_, _>>()?,
        ),
        ReportKind::Pearson => {
            let series = time_edits_series(records);
            Report::Pearson(PearsonReport {
                rho: edits_time_correlation(&series)?,
                n: series.len(),
            })
        }
        ReportKind::Edits => Report::Edits(edit_type_frequencies(records)),
        ReportKind::Series => Report::Series(SeriesReport {
            points: time_edits_series(records),
        }),
    })
}

/// `totalEdits,timeMs` per line, with a header.
pub fn series_csv(points: &[SeriesPoint]) -> String {
    let mut out = String::from("totalEdits,timeMs\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p.total_edits, p.edit_time_ms);
    }
    out
}
