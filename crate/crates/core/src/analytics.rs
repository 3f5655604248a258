//! Statistics over post-editing logs.
//!
//! Selection rates per translator, pairwise Cohen's kappa between
//! translators over the segments they both edited, Pearson correlation, and
//! the edit-count / edit-time series. Kappa needs categories, so continuous
//! variables (time, number of edits) are binned first; see [`Binning`].

use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::editlog::EditLogRecord;
use crate::error::{Error, Result};
use crate::suggestions::Origin;

/// Cohen's kappa between two labelings of the same items.
///
/// When chance agreement is already perfect (both raters used one and the
/// same label throughout) the ratio is undefined; the result is then 1.0
/// for identical sequences and 0.0 otherwise.
pub fn cohen_kappa<L: Eq + Hash + Ord>(a: &[L], b: &[L]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::TooFewObservations("kappa", 1));
    }
    let n = a.len() as u128;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as u128;
    let mut marginals: BTreeMap<&L, (u128, u128)> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
    }
    // Scaled by n^2: po = agree / n, pe = chance / n^2.
    let chance: u128 = marginals.values().map(|(ca, cb)| ca * cb).sum();
    if chance == n * n {
        return Ok(if agree == n { 1.0 } else { 0.0 });
    }
    let num = (n * agree) as f64 - chance as f64;
    let den = (n * n) as f64 - chance as f64;
    Ok((num / den).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation. Constant series are an error, not zero.
pub fn pearson_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations("pearson", 2));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ConstantSeries("x"));
    }
    if syy == 0.0 {
        return Err(Error::ConstantSeries("y"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionRow {
    pub translator: String,
    pub total: usize,
    pub counts: BTreeMap<Origin, usize>,
    pub rates: BTreeMap<Origin, f64>,
}

impl SelectionRow {
    pub fn count(&self, origin: Origin) -> usize {
        self.counts.get(&origin).copied().unwrap_or(0)
    }

    pub fn rate(&self, origin: Origin) -> f64 {
        self.rates.get(&origin).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionTable {
    pub rows: Vec<SelectionRow>,
}

impl SelectionTable {
    pub fn row(&self, translator: &str) -> Option<&SelectionRow> {
        self.rows.iter().find(|r| r.translator == translator)
    }
}

fn by_translator(records: &[EditLogRecord]) -> BTreeMap<&str, Vec<&EditLogRecord>> {
    let mut groups: BTreeMap<&str, Vec<&EditLogRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.translator_id.as_str()).or_default().push(r);
    }
    groups
}

/// How often each translator started from each origin. MT, TM and scratch
/// always appear; APE only when used.
pub fn selection_rates(records: &[EditLogRecord]) -> SelectionTable {
    let rows = by_translator(records)
        .into_iter()
        .map(|(translator, recs)| {
            let mut counts: BTreeMap<Origin, usize> =
                [Origin::Mt, Origin::Tm, Origin::Scratch].into_iter().map(|o| (o, 0)).collect();
            for r in &recs {
                *counts.entry(r.origin).or_insert(0) += 1;
            }
            let total = recs.len();
            let rates = counts
                .iter()
                .map(|(&o, &c)| (o, c as f64 / total as f64))
                .collect();
            SelectionRow {
                translator: translator.to_string(),
                total,
                counts,
                rates,
            }
        })
        .collect();
    SelectionTable { rows }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EditTypeCounts {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub shifts: usize,
}

impl EditTypeCounts {
    pub fn total(&self) -> usize {
        self.insertions + self.deletions + self.substitutions + self.shifts
    }
}

impl std::ops::Add for EditTypeCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        EditTypeCounts {
            insertions: self.insertions + o.insertions,
            deletions: self.deletions + o.deletions,
            substitutions: self.substitutions + o.substitutions,
            shifts: self.shifts + o.shifts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordEdits {
    pub translator: String,
    pub segment: String,
    pub total_edits: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EditFrequencies {
    pub totals: EditTypeCounts,
    pub per_record: Vec<RecordEdits>,
}

pub fn edit_type_frequencies(records: &[EditLogRecord]) -> EditFrequencies {
    let mut out = EditFrequencies::default();
    for r in records {
        out.totals = out.totals
            + EditTypeCounts {
                insertions: r.insertions,
                deletions: r.deletions,
                substitutions: r.substitutions,
                shifts: r.shifts,
            };
        out.per_record.push(RecordEdits {
            translator: r.translator_id.clone(),
            segment: r.segment_id.clone(),
            total_edits: r.total_edits(),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesPoint {
    pub total_edits: usize,
    pub edit_time_ms: u64,
}

/// One point per record, in order of finish time.
pub fn time_edits_series(records: &[EditLogRecord]) -> Vec<SeriesPoint> {
    let mut sorted: Vec<&EditLogRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.finished_at
            .cmp(&b.finished_at)
            .then_with(|| a.translator_id.cmp(&b.translator_id))
            .then_with(|| a.segment_id.cmp(&b.segment_id))
    });
    sorted
        .into_iter()
        .map(|r| SeriesPoint {
            total_edits: r.total_edits(),
            edit_time_ms: r.edit_time_ms,
        })
        .collect()
}

/// Correlation between number of edits and editing time.
pub fn edits_time_correlation(series: &[SeriesPoint]) -> Result<f64> {
    let x: Vec<f64> = series.iter().map(|p| p.total_edits as f64).collect();
    let y: Vec<f64> = series.iter().map(|p| p.edit_time_ms as f64).collect();
    pearson_rho(&x, &y)
}

/// How continuous variables become kappa categories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    /// Low / mid / high by the 1/3 and 2/3 quantiles (linear interpolation)
    /// of both translators' values pooled for the pair.
    #[default]
    PooledTerciles,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Tercile labels (0, 1, 2) for `a` and `b` with cut points taken from
/// both series pooled.
pub fn pooled_terciles(a: &[f64], b: &[f64]) -> (Vec<u8>, Vec<u8>) {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    if pooled.is_empty() {
        return (Vec::new(), Vec::new());
    }
    pooled.sort_by(f64::total_cmp);
    let (q1, q2) = (quantile(&pooled, 1.0 / 3.0), quantile(&pooled, 2.0 / 3.0));
    let label = |v: &f64| {
        if *v <= q1 {
            0
        } else if *v <= q2 {
            1
        } else {
            2
        }
    };
    (a.iter().map(label).collect(), b.iter().map(label).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AgreementVariable {
    /// Chosen suggestion origin.
    Selection,
    EditTime,
    Edits,
}

impl AgreementVariable {
    pub const ALL: [AgreementVariable; 3] = [
        AgreementVariable::Selection,
        AgreementVariable::EditTime,
        AgreementVariable::Edits,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgreementReport {
    pub variable: AgreementVariable,
    pub binning: Binning,
    pub translators: Vec<String>,
    /// `kappa[i][j]` for translators `i` and `j`; the diagonal and pairs
    /// without shared segments are `null`.
    pub kappa: Vec<Vec<Option<f64>>>,
    /// Shared segments per pair.
    pub common: Vec<Vec<usize>>,
}

impl AgreementReport {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.translators.iter().position(|t| t == a)?;
        let j = self.translators.iter().position(|t| t == b)?;
        self.kappa[i][j]
    }
}

fn pair_kappa(
    variable: AgreementVariable,
    a: &[&EditLogRecord],
    b: &[&EditLogRecord],
) -> Result<f64> {
    match variable {
        AgreementVariable::Selection => {
            let la: Vec<Origin> = a.iter().map(|r| r.origin).collect();
            let lb: Vec<Origin> = b.iter().map(|r| r.origin).collect();
            cohen_kappa(&la, &lb)
        }
        AgreementVariable::EditTime | AgreementVariable::Edits => {
            let value = |r: &&EditLogRecord| match variable {
                AgreementVariable::EditTime => r.edit_time_ms as f64,
                _ => r.total_edits() as f64,
            };
            let va: Vec<f64> = a.iter().map(value).collect();
            let vb: Vec<f64> = b.iter().map(value).collect();
            let (la, lb) = pooled_terciles(&va, &vb);
            cohen_kappa(&la, &lb)
        }
    }
}

/// Pairwise kappa between all translators over the segments each pair has
/// in common.
pub fn agreement(records: &[EditLogRecord], variable: AgreementVariable, binning: Binning) -> Result<AgreementReport> {
    let Binning::PooledTerciles = binning;
    let groups: BTreeMap<&str, BTreeMap<&str, &EditLogRecord>> = by_translator(records)
        .into_iter()
        .map(|(t, recs)| (t, recs.into_iter().map(|r| (r.segment_id.as_str(), r)).collect()))
        .collect();
    let translators: Vec<&str> = groups.keys().copied().collect();
    let k = translators.len();
    let mut kappa = vec![vec![None; k]; k];
    let mut common = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let (ga, gb) = (&groups[translators[i]], &groups[translators[j]]);
            let shared: BTreeSet<&str> = ga.keys().filter(|s| gb.contains_key(*s)).copied().collect();
            common[i][j] = shared.len();
            common[j][i] = shared.len();
            if shared.is_empty() {
                continue;
            }
            let a: Vec<&EditLogRecord> = shared.iter().map(|s| ga[s]).collect();
            let b: Vec<&EditLogRecord> = shared.iter().map(|s| gb[s]).collect();
            let value = pair_kappa(variable, &a, &b)?;
            kappa[i][j] = Some(value);
            kappa[j][i] = Some(value);
        }
    }
    Ok(AgreementReport {
        variable,
        binning,
        translators: translators.into_iter().map(str::to_string).collect(),
        kappa,
        common,
    })
}
