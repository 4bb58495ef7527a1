//! Corpus comparison statistics: group rates, odds ratios, Bonferroni
//! correction, Pearson agreement between tools and one-way ANOVA.

mod special;

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::table::ResultRow;
use crate::analyzer::AnalysisResult;

pub use special::{chi_square_upper_tail, f_upper_tail, ln_gamma, regularized_beta, regularized_gamma_q, t_two_sided};

/// Additive smoothing applied to both means before taking their ratio.
pub const ODDS_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("group {group:?} has {n_docs} documents; at least 2 are required")]
    TooFewDocuments { group: String, n_docs: usize },
    #[error("category {0:?} is missing from a group")]
    UnknownCategory(String),
    #[error("anova needs at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("no within-group degrees of freedom")]
    NoWithinDf,
    #[error("F is infinite: zero within-group variance")]
    InfiniteF,
    #[error("tables cover different documents: {0}")]
    DocumentMismatch(String),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("csv row {row}: {message}")]
    Csv { row: u64, message: String },
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewValues { needed: 2, got: x.len() });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Per-category statistics of one document group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryStats {
    pub mean_rate: f64,
    /// Sample variance of the per-document rates (n − 1 denominator).
    pub variance: f64,
    pub n_docs: usize,
    pub raw_total: u64,
    pub token_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub per_category: BTreeMap<String, CategoryStats>,
}

#[derive(Default)]
struct Accumulator {
    rates: Vec<f64>,
    raw: u64,
    tokens: u64,
}

impl GroupSummary {
    /// Summarizes per-document rates given as `(category, rate)` observations.
    /// `raw` and `tokens` feed the chi-square alternative and may be zero.
    fn from_observations<'a>(
        group: &str,
        observations: impl IntoIterator<Item = (&'a str, f64, u64, u64)>,
    ) -> Self {
        let mut acc: BTreeMap<&str, Accumulator> = BTreeMap::new();
        for (category, rate, raw, tokens) in observations {
            let a = acc.entry(category).or_default();
            a.rates.push(rate);
            a.raw += raw;
            a.tokens += tokens;
        }
        let per_category = acc
            .into_iter()
            .map(|(category, a)| {
                let n = a.rates.len();
                let m = mean(&a.rates);
                let variance = if n > 1 {
                    a.rates.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / (n - 1) as f64
                } else {
                    0.0
                };
                let stats = CategoryStats { mean_rate: m, variance, n_docs: n, raw_total: a.raw, token_total: a.tokens };
                (category.to_string(), stats)
            })
            .collect();
        GroupSummary { group: group.to_string(), per_category }
    }

    /// Summary over analyzer results, one per document.
    pub fn from_results<'a>(group: &str, results: impl IntoIterator<Item = &'a AnalysisResult>) -> Self {
        let observations: Vec<_> = results
            .into_iter()
            .flat_map(|r| {
                r.per_category
                    .iter()
                    .map(move |c| (c.category.as_str(), c.normalized, c.raw, r.total_tokens as u64))
            })
            .collect();
        Self::from_observations(group, observations)
    }

    /// Summary over per-document rates with no token counts.
    pub fn from_rates(group: &str, per_category: &[(&str, &[f64])]) -> Self {
        Self::from_observations(
            group,
            per_category.iter().flat_map(|(c, rates)| rates.iter().map(move |&r| (*c, r, 0, 0))),
        )
    }

    /// One summary per group label, for the analyzer rows whose document id
    /// appears in `groups`. Rows of unlisted documents are ignored.
    pub fn from_rows(rows: &[ResultRow], groups: &HashMap<String, String>) -> BTreeMap<String, GroupSummary> {
        let mut by_group: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
        for row in rows {
            if let Some(g) = groups.get(&row.doc_id) {
                by_group.entry(g.as_str()).or_default().push(row);
            }
        }
        by_group
            .into_iter()
            .map(|(g, rows)| {
                let obs = rows
                    .iter()
                    .map(|r| (r.category.as_str(), r.normalized, r.raw, r.total_tokens));
                (g.to_string(), Self::from_observations(g, obs))
            })
            .collect()
    }

    pub fn get(&self, category: &str) -> Option<&CategoryStats> {
        self.per_category.get(category)
    }
}

/// Significance test behind [`odds_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceTest {
    /// Two-sided Welch t-test on per-document rates.
    #[default]
    Welch,
    /// Pearson chi-square on the pooled 2x2 table of category hits versus
    /// other tokens.
    ChiSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub category: String,
    pub odds_ratio: f64,
    pub p_value: f64,
    pub significant_after_correction: bool,
    pub degenerate: bool,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn welch_p(a: &CategoryStats, b: &CategoryStats) -> f64 {
    let (va, vb) = (a.variance / a.n_docs as f64, b.variance / b.n_docs as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        return if a.mean_rate == b.mean_rate { 1.0 } else { 0.0 };
    }
    let t = (a.mean_rate - b.mean_rate) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.n_docs - 1) as f64 + vb * vb / (b.n_docs - 1) as f64);
    t_two_sided(t, df).clamp(0.0, 1.0)
}

fn chi_square_p(a: &CategoryStats, b: &CategoryStats) -> f64 {
    let hits = [a.raw_total as f64, b.raw_total as f64];
    let misses = [
        a.token_total.saturating_sub(a.raw_total) as f64,
        b.token_total.saturating_sub(b.raw_total) as f64,
    ];
    let rows = [hits[0] + misses[0], hits[1] + misses[1]];
    let cols = [hits[0] + hits[1], misses[0] + misses[1]];
    let n = rows[0] + rows[1];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return 1.0;
    }
    let mut chi2 = 0.0;
    for (i, row) in [hits, misses].iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = cols[i] * rows[j] / n;
            chi2 += (observed - expected) * (observed - expected) / expected;
        }
    }
    chi_square_upper_tail(chi2, 1.0).clamp(0.0, 1.0)
}

/// Odds ratio of one category between two groups. The returned row is not
/// yet corrected for multiple comparisons; see [`compare`].
pub fn odds_ratio(
    category: &str,
    group_a: &GroupSummary,
    group_b: &GroupSummary,
    test: SignificanceTest,
) -> Result<ComparisonRow, StatsError> {
    let lookup = |g: &GroupSummary| -> Result<CategoryStats, StatsError> {
        let stats = *g.get(category).ok_or_else(|| StatsError::UnknownCategory(category.to_string()))?;
        if stats.n_docs < 2 {
            return Err(StatsError::TooFewDocuments { group: g.group.clone(), n_docs: stats.n_docs });
        }
        Ok(stats)
    };
    let (a, b) = (lookup(group_a)?, lookup(group_b)?);
    let mut row = ComparisonRow {
        category: category.to_string(),
        odds_ratio: 1.0,
        p_value: 1.0,
        significant_after_correction: false,
        degenerate: a.mean_rate == 0.0 && b.mean_rate == 0.0,
        mean_a: a.mean_rate,
        mean_b: b.mean_rate,
    };
    if row.degenerate {
        return Ok(row);
    }
    row.odds_ratio = (a.mean_rate + ODDS_EPSILON) / (b.mean_rate + ODDS_EPSILON);
    row.p_value = match test {
        SignificanceTest::Welch => welch_p(&a, &b),
        SignificanceTest::ChiSquare => chi_square_p(&a, &b),
    };
    Ok(row)
}

/// Bonferroni-corrected significance level for `m` tests.
pub fn bonferroni_threshold(alpha: f64, m: usize) -> f64 {
    alpha / m.max(1) as f64
}

/// Flags `p < alpha / m` where `m` is the number of p-values.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<bool>, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let threshold = bonferroni_threshold(alpha, p_values.len());
    Ok(p_values.iter().map(|&p| p < threshold).collect())
}

/// Odds ratios for every category the two groups share, in category order,
/// with Bonferroni flags over the whole family.
pub fn compare(
    group_a: &GroupSummary,
    group_b: &GroupSummary,
    alpha: f64,
    test: SignificanceTest,
) -> Result<Vec<ComparisonRow>, StatsError> {
    let mut rows = group_a
        .per_category
        .keys()
        .filter(|c| group_b.per_category.contains_key(*c))
        .map(|c| odds_ratio(c, group_a, group_b, test))
        .collect::<Result<Vec<_>, _>>()?;
    let p: Vec<f64> = rows.iter().map(|r| r.p_value).collect();
    for (row, flag) in rows.iter_mut().zip(bonferroni(&p, alpha)?) {
        row.significant_after_correction = flag && !row.degenerate;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<Anova, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StatsError::EmptyGroup(i));
    }
    let k = groups.len();
    let n: usize = groups.iter().map(Vec::len).sum();
    if n <= k {
        return Err(StatsError::NoWithinDf);
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    if ssw == 0.0 {
        return Err(StatsError::InfiniteF);
    }
    let (df_between, df_within) = (k - 1, n - k);
    let f = (ssb / df_between as f64) / (ssw / df_within as f64);
    let p_value = f_upper_tail(f, df_between as f64, df_within as f64).clamp(0.0, 1.0);
    Ok(Anova { f, df_between, df_within, p_value })
}

/// Per-document category counts of one tool: `counts[d][c]` belongs to
/// `documents[d]` and `categories[c]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountTable {
    pub documents: Vec<String>,
    pub categories: Vec<String>,
    pub counts: Vec<Vec<f64>>,
}

/// Which analyzer column feeds a [`CountTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    #[default]
    Raw,
    Normalized,
}

impl CountTable {
    pub fn new(documents: Vec<String>, categories: Vec<String>, counts: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(documents.len(), counts.len());
        CountTable { documents, categories, counts }
    }

    /// Builds a table from analyzer rows. Missing cells are zero. Documents
    /// and categories keep their first-seen order.
    pub fn from_rows(rows: &[ResultRow], measure: Measure) -> Self {
        let mut doc_index: HashMap<&str, usize> = HashMap::new();
        let mut cat_index: HashMap<&str, usize> = HashMap::new();
        let mut table = CountTable::default();
        for row in rows {
            let d = *doc_index.entry(&row.doc_id).or_insert_with(|| {
                table.documents.push(row.doc_id.clone());
                table.documents.len() - 1
            });
            let c = *cat_index.entry(&row.category).or_insert_with(|| {
                table.categories.push(row.category.clone());
                table.categories.len() - 1
            });
            if table.counts.len() <= d {
                table.counts.resize(d + 1, Vec::new());
            }
            let cells = &mut table.counts[d];
            if cells.len() <= c {
                cells.resize(c + 1, 0.0);
            }
            cells[c] = match measure {
                Measure::Raw => row.raw as f64,
                Measure::Normalized => row.normalized,
            };
        }
        let width = table.categories.len();
        for cells in &mut table.counts {
            cells.resize(width, 0.0);
        }
        table
    }

    fn column(&self, c: usize, order: &[usize]) -> Vec<f64> {
        order.iter().map(|&d| self.counts[d][c]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Correlation per shared category, in the first table's category order.
    pub per_category: Vec<(String, f64)>,
    /// Shared categories with zero variance in either table.
    pub excluded: Vec<String>,
    /// Unweighted mean of the per-category correlations.
    pub overall: Option<f64>,
}

impl AgreementReport {
    pub fn get(&self, category: &str) -> Option<f64> {
        self.per_category.iter().find(|(c, _)| c == category).map(|(_, r)| *r)
    }
}

/// Correlates the two tools category by category over the same documents.
pub fn agreement(a: &CountTable, b: &CountTable) -> Result<AgreementReport, StatsError> {
    if a.documents.len() != b.documents.len() {
        return Err(StatsError::DocumentMismatch(format!(
            "{} vs {} documents",
            a.documents.len(),
            b.documents.len()
        )));
    }
    let b_docs: HashMap<&str, usize> = b.documents.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let b_order = a
        .documents
        .iter()
        .map(|d| b_docs.get(d.as_str()).copied().ok_or_else(|| StatsError::DocumentMismatch(format!("{d:?} only in the first table"))))
        .collect::<Result<Vec<_>, _>>()?;
    let a_order: Vec<usize> = (0..a.documents.len()).collect();

    let mut report = AgreementReport { per_category: Vec::new(), excluded: Vec::new(), overall: None };
    for (ca, name) in a.categories.iter().enumerate() {
        let Some(cb) = b.categories.iter().position(|c| c == name) else { continue };
        match pearson(&a.column(ca, &a_order), &b.column(cb, &b_order)) {
            Ok(r) => report.per_category.push((name.clone(), r)),
            Err(StatsError::ZeroVariance) => report.excluded.push(name.clone()),
            Err(e) => return Err(e),
        }
    }
    if !report.per_category.is_empty() {
        let sum: f64 = report.per_category.iter().map(|(_, r)| r).sum();
        report.overall = Some(sum / report.per_category.len() as f64);
    }
    Ok(report)
}

fn csv_error(e: csv::Error) -> StatsError {
    let row = e.position().map_or(0, |p| p.line());
    StatsError::Csv { row, message: e.to_string() }
}

/// Writes `category,odds_ratio,p,significant`.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], writer: W) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["category", "odds_ratio", "p", "significant"]).map_err(csv_error)?;
    for row in rows {
        w.write_record([
            row.category.clone(),
            format!("{:.6}", row.odds_ratio),
            format!("{:.6e}", row.p_value),
            row.significant_after_correction.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| StatsError::Csv { row: 0, message: e.to_string() })
}

/// Writes `category,r`, then excluded categories with an empty `r`, then an
/// `overall` row.
pub fn write_agreement_csv<W: Write>(report: &AgreementReport, writer: W) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["category", "r"]).map_err(csv_error)?;
    for (category, r) in &report.per_category {
        w.write_record([category.clone(), format!("{r:.6}")]).map_err(csv_error)?;
    }
    for category in &report.excluded {
        w.write_record([category.as_str(), ""]).map_err(csv_error)?;
    }
    let overall = report.overall.map(|r| format!("{r:.6}")).unwrap_or_default();
    w.write_record(["overall".to_string(), overall]).map_err(csv_error)?;
    w.flush().map_err(|e| StatsError::Csv { row: 0, message: e.to_string() })
}

/// Reads a group manifest with columns `doc_id,group`.
pub fn read_group_manifest<R: Read>(reader: R) -> Result<HashMap<String, String>, StatsError> {
    #[derive(Deserialize)]
    struct Row {
        doc_id: String,
        group: String,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let mut groups = HashMap::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(csv_error)?;
        groups.insert(row.doc_id, row.group);
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Textbook formula with raw sums, independent of the centered version.
    fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1., 2., 3.], &[2., 4., 6.]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1., 2., 3.], &[6., 4., 2.]).unwrap() + 1.0).abs() < 1e-12);
        // cov 2.5/3, var 5/3 each
        assert!((pearson(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(pearson(&[1., 1., 1.], &[1., 2., 3.]), Err(StatsError::ZeroVariance));
        assert_eq!(pearson(&[1.], &[1.]), Err(StatsError::TooFewValues { needed: 2, got: 1 }));
        assert_eq!(pearson(&[1., 2.], &[1.]), Err(StatsError::LengthMismatch(2, 1)));
    }

    #[test]
    fn odds_ratio_examples() {
        let a = GroupSummary::from_rates("a", &[("war", &[2. / 3., 2. / 3.])]);
        let b = GroupSummary::from_rates("b", &[("war", &[1. / 3., 1. / 3.])]);
        let row = odds_ratio("war", &a, &b, SignificanceTest::Welch).unwrap();
        assert!((row.odds_ratio - 2.0).abs() < 1e-6);
        assert!(!row.degenerate);

        let same = odds_ratio("war", &a, &a, SignificanceTest::Welch).unwrap();
        assert_eq!((same.odds_ratio, same.p_value), (1.0, 1.0));

        let c = GroupSummary::from_rates("c", &[("war", &[0.1, 0.3, 0.2])]);
        let ab = odds_ratio("war", &a, &c, SignificanceTest::Welch).unwrap();
        let ba = odds_ratio("war", &c, &a, SignificanceTest::Welch).unwrap();
        assert!((ab.odds_ratio * ba.odds_ratio - 1.0).abs() < 1e-12);
        assert_eq!(ab.p_value, ba.p_value);
    }

    #[test]
    fn odds_ratio_degenerate_and_errors() {
        let z = GroupSummary::from_rates("z", &[("war", &[0.0, 0.0])]);
        let row = odds_ratio("war", &z, &z, SignificanceTest::Welch).unwrap();
        assert!(row.degenerate);
        assert_eq!((row.odds_ratio, row.p_value), (1.0, 1.0));

        let one = GroupSummary::from_rates("one", &[("war", &[0.5])]);
        assert_eq!(
            odds_ratio("war", &one, &z, SignificanceTest::Welch),
            Err(StatsError::TooFewDocuments { group: "one".into(), n_docs: 1 })
        );
        assert_eq!(
            odds_ratio("peace", &z, &z, SignificanceTest::Welch),
            Err(StatsError::UnknownCategory("peace".into()))
        );
    }

    #[test]
    fn welch_matches_hand_computation() {
        // a: mean 2, var 1; b: mean 5, var 4, n = 3 each.
        // se² = 1/3 + 4/3 = 5/3, t = -3/sqrt(5/3), df = (5/3)² / ((1/9 + 16/9)/2) = 50/17
        let a = GroupSummary::from_rates("a", &[("x", &[1., 2., 3.])]);
        let b = GroupSummary::from_rates("b", &[("x", &[3., 5., 7.])]);
        let row = odds_ratio("x", &a, &b, SignificanceTest::Welch).unwrap();
        let t = -3.0 / (5.0f64 / 3.0).sqrt();
        let expected = regularized_beta(25.0 / 17.0, 0.5, (50.0 / 17.0) / (50.0 / 17.0 + t * t));
        assert!((row.p_value - expected).abs() < 1e-15);
        assert!(row.p_value > 0.05 && row.p_value < 0.2);
    }

    #[test]
    fn chi_square_on_pooled_counts() {
        let obs = |g, raw, tokens| {
            GroupSummary::from_observations(g, [("x", raw as f64 / tokens as f64, raw, tokens), ("x", 0.0, 0, 10)])
        };
        // pooled table [[20, 10], [80, 90]]: chi² = 200·(20·90 − 10·80)² / (100·100·30·170)
        let (a, b) = (obs("a", 20, 90), obs("b", 10, 90));
        let row = odds_ratio("x", &a, &b, SignificanceTest::ChiSquare).unwrap();
        let chi2 = 200.0 * 1000.0f64.powi(2) / (100.0 * 100.0 * 30.0 * 170.0);
        let expected = chi_square_upper_tail(chi2, 1.0);
        assert!((row.p_value - expected).abs() < 1e-15);
        let same = odds_ratio("x", &a, &a, SignificanceTest::ChiSquare).unwrap();
        assert!((same.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni_threshold(0.05, 2000), 0.05 / 2000.0);
        assert!((bonferroni_threshold(0.05, 2000) - 2.5e-5).abs() < 1e-20);
        assert_eq!(bonferroni_threshold(0.05, 1), 0.05);
        assert_eq!(bonferroni(&[0.01, 0.04], 0.05).unwrap(), [true, false]);
        assert_eq!(bonferroni(&[], 0.05).unwrap(), Vec::<bool>::new());
        assert!(bonferroni(&[0.1], 1.0).is_err());
    }

    #[test]
    fn compare_flags_family() {
        let a = GroupSummary::from_rates("a", &[("hi", &[0.5, 0.51, 0.49]), ("lo", &[0.1, 0.2, 0.3]), ("zero", &[0.0, 0.0])]);
        let b = GroupSummary::from_rates("b", &[("hi", &[0.1, 0.11, 0.09]), ("lo", &[0.15, 0.2, 0.25]), ("zero", &[0.0, 0.0])]);
        let rows = compare(&a, &b, 0.05, SignificanceTest::Welch).unwrap();
        let flags: Vec<_> = rows.iter().map(|r| (r.category.as_str(), r.significant_after_correction)).collect();
        assert_eq!(flags, [("hi", true), ("lo", false), ("zero", false)]);
        assert!(rows[2].degenerate);
    }

    #[test]
    fn anova_examples() {
        let a = anova_oneway(&[vec![1., 2.], vec![3., 4.]]).unwrap();
        assert!((a.f - 8.0).abs() < 1e-12);
        assert_eq!((a.df_between, a.df_within), (1, 2));
        // F(1,2) tail: 1 − sqrt(f / (f + 2))
        assert!((a.p_value - (1.0 - (0.8f64).sqrt())).abs() < 1e-12);

        let eq = anova_oneway(&[vec![1., 2., 3.], vec![1., 2., 3.]]).unwrap();
        assert_eq!(eq.f, 0.0);
        assert_eq!(eq.p_value, 1.0);

        assert_eq!(anova_oneway(&[vec![1., 2.]]), Err(StatsError::TooFewGroups(1)));
        assert_eq!(anova_oneway(&[vec![1.], vec![]]), Err(StatsError::EmptyGroup(1)));
        assert_eq!(anova_oneway(&[vec![1.], vec![2.]]), Err(StatsError::NoWithinDf));
        assert_eq!(anova_oneway(&[vec![1., 1.], vec![2., 2.]]), Err(StatsError::InfiniteF));
    }

    #[test]
    fn agreement_examples() {
        let docs: Vec<String> = (0..5).map(|i| format!("d{i}")).collect();
        let cats = vec!["a".to_string(), "b".to_string(), "flat".to_string()];
        let counts = vec![
            vec![1., 0., 2.],
            vec![2., 1., 2.],
            vec![3., 0., 2.],
            vec![4., 3., 2.],
            vec![5., 1., 2.],
        ];
        let t = CountTable::new(docs.clone(), cats.clone(), counts.clone());
        let self_report = agreement(&t, &t).unwrap();
        assert_eq!(self_report.per_category.len(), 2);
        assert!(self_report.per_category.iter().all(|(_, r)| (r - 1.0).abs() < 1e-12));
        assert_eq!(self_report.excluded, ["flat"]);

        let doubled = CountTable::new(docs.clone(), cats.clone(), counts.iter().map(|r| r.iter().map(|x| 2.0 * x).collect()).collect());
        assert!((agreement(&t, &doubled).unwrap().overall.unwrap() - 1.0).abs() < 1e-12);

        // Second tool in a different document and category order.
        // in d0..d4 order this tool has a = [1,2,3,4,5], b = [0,2,1,1,1]
        let other_counts = [vec![2., 2.], vec![0., 1.], vec![1., 3.], vec![1., 5.], vec![1., 4.]];
        let other_docs = ["d1", "d0", "d2", "d4", "d3"];
        let other = CountTable::new(
            other_docs.iter().map(|s| s.to_string()).collect(),
            vec!["b".into(), "a".into()],
            other_counts.to_vec(),
        );
        let report = agreement(&t, &other).unwrap();
        assert!((report.get("a").unwrap() - 1.0).abs() < 1e-12);
        let expected_b = naive_pearson(&[0., 1., 0., 3., 1.], &[0., 2., 1., 1., 1.]);
        assert!((report.get("b").unwrap() - expected_b).abs() < 1e-12);
        assert!((report.overall.unwrap() - (1.0 + expected_b) / 2.0).abs() < 1e-12);
        assert_eq!(report.excluded, Vec::<String>::new());
    }

    #[test]
    fn agreement_rejects_other_documents() {
        let t = CountTable::new(vec!["x".into(), "y".into()], vec!["a".into()], vec![vec![1.], vec![2.]]);
        let u = CountTable::new(vec!["x".into(), "z".into()], vec!["a".into()], vec![vec![1.], vec![2.]]);
        assert!(matches!(agreement(&t, &u), Err(StatsError::DocumentMismatch(_))));
    }

    #[test]
    fn count_table_from_rows_fills_gaps() {
        let row = |d: &str, c: &str, raw| ResultRow {
            doc_id: d.into(),
            category: c.into(),
            raw,
            normalized: raw as f64 / 10.0,
            total_tokens: 10,
        };
        let t = CountTable::from_rows(&[row("d1", "a", 1), row("d1", "b", 2), row("d2", "b", 3)], Measure::Raw);
        assert_eq!(t.documents, ["d1", "d2"]);
        assert_eq!(t.categories, ["a", "b"]);
        assert_eq!(t.counts, [vec![1., 2.], vec![0., 3.]]);
        let n = CountTable::from_rows(&[row("d1", "a", 1)], Measure::Normalized);
        assert_eq!(n.counts, [vec![0.1]]);
    }

    #[test]
    fn csv_outputs() {
        let rows = vec![ComparisonRow {
            category: "war".into(),
            odds_ratio: 2.0,
            p_value: 0.001,
            significant_after_correction: true,
            degenerate: false,
            mean_a: 0.2,
            mean_b: 0.1,
        }];
        let mut buf = Vec::new();
        write_comparison_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "category,odds_ratio,p,significant\nwar,2.000000,1.000000e-3,true\n");

        let report = AgreementReport { per_category: vec![("a".into(), 0.5)], excluded: vec!["b".into()], overall: Some(0.5) };
        let mut buf = Vec::new();
        write_agreement_csv(&report, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "category,r\na,0.500000\nb,\noverall,0.500000\n");

        let groups = read_group_manifest("doc_id,group\nd1,truth\nd2,lie\n".as_bytes()).unwrap();
        assert_eq!(groups["d2"], "lie");
    }

    proptest! {
        #[test]
        fn pearson_symmetric_bounded_affine(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!(r.abs() <= 1.0);
                prop_assert_eq!(r, pearson(&y, &x).unwrap());
                let x2: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
                prop_assert!((pearson(&x2, &y).unwrap() - r).abs() < 1e-9);
                prop_assert!((naive_pearson(&x, &y) - r).abs() < 1e-6);
            }
        }

        #[test]
        fn odds_ratio_antisymmetric(
            ra in prop::collection::vec(0.001f64..1.0, 2..10),
            rb in prop::collection::vec(0.001f64..1.0, 2..10),
        ) {
            let a = GroupSummary::from_rates("a", &[("x", &ra)]);
            let b = GroupSummary::from_rates("b", &[("x", &rb)]);
            let ab = odds_ratio("x", &a, &b, SignificanceTest::Welch).unwrap();
            let ba = odds_ratio("x", &b, &a, SignificanceTest::Welch).unwrap();
            prop_assert!((ab.odds_ratio * ba.odds_ratio - 1.0).abs() < 1e-6);
            prop_assert!(ab.odds_ratio > 0.0);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        }

        #[test]
        fn odds_ranking_survives_rescaling(
            cats in prop::collection::vec(
                (prop::collection::vec(0.01f64..1.0, 2..6), prop::collection::vec(0.01f64..1.0, 2..6)),
                2..6,
            ),
            scale in 0.1f64..10.0,
        ) {
            let names: Vec<String> = (0..cats.len()).map(|i| format!("c{i}")).collect();
            let ranking = |k: f64| {
                let scaled: Vec<(Vec<f64>, Vec<f64>)> = cats
                    .iter()
                    .map(|(a, b)| (a.iter().map(|x| x * k).collect(), b.iter().map(|x| x * k).collect()))
                    .collect();
                let ga: Vec<(&str, &[f64])> = names.iter().zip(&scaled).map(|(n, (a, _))| (n.as_str(), a.as_slice())).collect();
                let gb: Vec<(&str, &[f64])> = names.iter().zip(&scaled).map(|(n, (_, b))| (n.as_str(), b.as_slice())).collect();
                let rows = compare(&GroupSummary::from_rates("a", &ga), &GroupSummary::from_rates("b", &gb), 0.05, SignificanceTest::Welch).unwrap();
                let mut order: Vec<(f64, String)> = rows.into_iter().map(|r| (r.odds_ratio, r.category)).collect();
                order.sort_by(|x, y| y.0.total_cmp(&x.0));
                order.into_iter().map(|(_, c)| c).collect::<Vec<_>>()
            };
            let (base, scaled) = (ranking(1.0), ranking(scale));
            // only the top category is compared; near-ties among the rest can swap under ε
            prop_assert_eq!(&base[0], &scaled[0]);
        }

        #[test]
        fn anova_f_nonnegative(groups in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 1..8), 2..6)) {
            match anova_oneway(&groups) {
                Ok(a) => {
                    prop_assert!(a.f >= 0.0);
                    prop_assert!((0.0..=1.0).contains(&a.p_value));
                }
                Err(e) => prop_assert!(matches!(e, StatsError::NoWithinDf | StatsError::InfiniteF)),
            }
        }

        #[test]
        fn bonferroni_monotone(p in prop::collection::vec(0.0f64..1.0, 1..20), i in 0usize..20, factor in 0.0f64..1.0) {
            let i = i % p.len();
            let before = bonferroni(&p, 0.05).unwrap();
            let mut lowered = p.clone();
            lowered[i] *= factor;
            let after = bonferroni(&lowered, 0.05).unwrap();
            for (b, a) in before.iter().zip(&after) {
                prop_assert!(!b || *a);
            }
        }
    }
}
