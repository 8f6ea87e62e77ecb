use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use super::fdr::bh_fdr;
use super::hypothesis::{chi_square_test, rank_sum_test};
use crate::error::{Error, Result};
use crate::features::{CohortMatrix, FeatureId, FeatureRegistry};
use crate::ingest::{Sex, SubjectMeta};
use crate::numeric;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryField {
    Age,
    /// Reported as percent women.
    Sex,
    Feature(FeatureId),
}

impl SummaryField {
    pub fn label(&self) -> String {
        match self {
            SummaryField::Age => "age".into(),
            SummaryField::Sex => "sex (% women)".into(),
            SummaryField::Feature(id) => FeatureRegistry::global().name(*id).to_string(),
        }
    }
}

/// Features shown in the default cohort summary, one per headline metric.
pub const SUMMARY_FEATURES: [usize; 30] = [
    1, 56, 61, 41, 66, 96, 98, 100, 104, 124, 126, 130, 131, 138, 156, 157, 158, 159, 168, 178,
    175, 180, 179, 181, 220, 221, 222, 265, 269, 271,
];

pub fn default_summary_fields() -> Vec<SummaryField> {
    let mut f = vec![SummaryField::Age, SummaryField::Sex];
    f.extend(
        SUMMARY_FEATURES
            .iter()
            .map(|&i| SummaryField::Feature(FeatureId::new(i).expect("valid id"))),
    );
    f.push(SummaryField::Feature(FeatureId::new(267).expect("valid id")));
    f
}

fn nan_as_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupStats {
    pub n: usize,
    #[serde(serialize_with = "nan_as_null")]
    pub mean: f64,
    #[serde(serialize_with = "nan_as_null")]
    pub std: f64,
}

impl GroupStats {
    fn of(values: &[f64]) -> Self {
        Self {
            n: values.len(),
            mean: numeric::mean(values).unwrap_or(f64::NAN),
            std: numeric::std_dev(values).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTestResult {
    pub feature: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_id: Option<FeatureId>,
    pub test: &'static str,
    #[serde(serialize_with = "nan_as_null")]
    pub statistic: f64,
    #[serde(serialize_with = "nan_as_null")]
    pub p_value: f64,
    #[serde(serialize_with = "nan_as_null")]
    pub adjusted_p: f64,
    pub total: GroupStats,
    pub positive: GroupStats,
    pub negative: GroupStats,
}

/// Per-field group comparison, with BH adjustment over exactly `fields`.
/// `metas` is needed for the age and sex rows and must follow matrix order.
pub fn group_summary_table(
    matrix: &CohortMatrix,
    fields: &[SummaryField],
    metas: Option<&[SubjectMeta]>,
) -> Result<Vec<GroupTestResult>> {
    matrix.require_both_classes()?;
    if let Some(m) = metas {
        if m.len() != matrix.len() {
            return Err(Error::Config(format!(
                "{} subject records for {} feature rows",
                m.len(),
                matrix.len()
            )));
        }
    }
    let positive = matrix.positives();
    let split = |values: Vec<f64>| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut all = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (v, p) in values.into_iter().zip(&positive) {
            if v.is_finite() {
                all.push(v);
                if *p {
                    pos.push(v);
                } else {
                    neg.push(v);
                }
            }
        }
        (all, pos, neg)
    };
    let need_metas = || {
        metas.ok_or_else(|| Error::Config("age and sex rows need subject records".into()))
    };
    let mut rows = Vec::with_capacity(fields.len());
    for field in fields {
        let (test, statistic, p_value, groups) = match field {
            SummaryField::Sex => {
                let women: Vec<f64> = need_metas()?
                    .iter()
                    .map(|m| if m.sex == Sex::Female { 100.0 } else { 0.0 })
                    .collect();
                let (all, pos, neg) = split(women);
                let count = |xs: &[f64]| xs.iter().filter(|v| **v > 0.0).count() as u64;
                let table = [
                    [count(&pos), pos.len() as u64 - count(&pos)],
                    [count(&neg), neg.len() as u64 - count(&neg)],
                ];
                let r = chi_square_test(table);
                let pct = |xs: &[f64]| GroupStats {
                    n: xs.len(),
                    mean: numeric::mean(xs).unwrap_or(f64::NAN),
                    std: f64::NAN,
                };
                (
                    "chi_square",
                    r.map_or(f64::NAN, |r| r.statistic),
                    r.map_or(f64::NAN, |r| r.p_value),
                    [pct(&all), pct(&pos), pct(&neg)],
                )
            }
            _ => {
                let values = match field {
                    SummaryField::Age => need_metas()?.iter().map(|m| m.age as f64).collect(),
                    SummaryField::Feature(id) => matrix.column(*id),
                    SummaryField::Sex => unreachable!(),
                };
                let (all, pos, neg) = split(values);
                let r = rank_sum_test(&pos, &neg);
                (
                    "rank_sum",
                    r.statistic,
                    r.p_value,
                    [GroupStats::of(&all), GroupStats::of(&pos), GroupStats::of(&neg)],
                )
            }
        };
        rows.push(GroupTestResult {
            feature: field.label(),
            feature_id: match field {
                SummaryField::Feature(id) => Some(*id),
                _ => None,
            },
            test,
            statistic,
            p_value,
            adjusted_p: f64::NAN,
            total: groups[0],
            positive: groups[1],
            negative: groups[2],
        });
    }
    let ps: Vec<f64> = rows.iter().map(|r| r.p_value).collect();
    for (r, a) in rows.iter_mut().zip(bh_fdr(&ps)) {
        r.adjusted_p = a;
    }
    Ok(rows)
}

fn cell(g: &GroupStats) -> String {
    if g.std.is_finite() {
        format!("{:.2} ± {:.2}", g.mean, g.std)
    } else if g.mean.is_finite() {
        format!("{:.2} %", g.mean)
    } else {
        "-".into()
    }
}

/// Plain-text table: feature, total, both groups, raw and adjusted p.
pub fn render_summary(rows: &[GroupTestResult]) -> String {
    let (tot, pos, neg) = rows
        .first()
        .map_or((0, 0, 0), |r| (r.total.n, r.positive.n, r.negative.n));
    let header = [
        "feature".to_string(),
        format!("total (n={tot})"),
        format!("lost >= 2% (n={pos})"),
        format!("lost < 2% (n={neg})"),
        "p".to_string(),
        "adjusted p".to_string(),
    ];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.feature.clone(),
                cell(&r.total),
                cell(&r.positive),
                cell(&r.negative),
                format!("{:.3}", r.p_value),
                format!("{:.3}", r.adjusted_p),
            ]
        })
        .collect();
    let mut widths = header.clone().map(|h| h.chars().count());
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&body) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
