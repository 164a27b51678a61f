//! Nonparametric group comparisons with closed-form reference distributions.
//!
//! Ranks use the mid-rank convention; H and the Dunn z carry the usual tie
//! corrections; all p-values are two-sided.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::format_number;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group `{0}` is empty")]
    EmptyGroup(String),
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("non-finite observation in group `{0}`")]
    NonFinite(String),
    #[error("contingency table has an empty row or column, or fewer than 2 of either")]
    DegenerateTable,
    #[error("contingency table rows have unequal lengths")]
    Ragged,
}

/// Labeled groups of real observations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupedSamples {
    pub groups: Vec<(String, Vec<f64>)>,
}

impl GroupedSamples {
    pub fn new(groups: Vec<(String, Vec<f64>)>) -> Self {
        Self { groups }
    }

    /// Groups from `(label, value)` pairs; groups ordered by label.
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut m: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (k, v) in pairs {
            m.entry(k.into()).or_default().push(v);
        }
        Self {
            groups: m.into_iter().collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, g)| g.len()).sum()
    }

    fn check(&self) -> Result<(), StatsError> {
        if self.groups.len() < 2 {
            return Err(StatsError::TooFewGroups(self.groups.len()));
        }
        for (label, g) in &self.groups {
            if g.is_empty() {
                return Err(StatsError::EmptyGroup(label.clone()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite(label.clone()));
            }
        }
        Ok(())
    }

    fn pooled(&self) -> Vec<f64> {
        self.groups
            .iter()
            .flat_map(|(_, g)| g.iter().copied())
            .collect()
    }
}

/// Counts cross-classified by row and column categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self, StatsError> {
        let c = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != c) {
            return Err(StatsError::Ragged);
        }
        Ok(Self {
            row_labels: (0..counts.len()).map(|i| i.to_string()).collect(),
            col_labels: (0..c).map(|j| j.to_string()).collect(),
            counts,
        })
    }

    /// Cross-tabulates `(row, col)` observations; categories sorted.
    pub fn from_pairs<I, R, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (R, C)>,
        R: Into<String>,
        C: Into<String>,
    {
        let mut m: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (r, c) in pairs {
            *m.entry((r.into(), c.into())).or_default() += 1;
        }
        let mut rows: Vec<String> = m.keys().map(|k| k.0.clone()).collect();
        let mut cols: Vec<String> = m.keys().map(|k| k.1.clone()).collect();
        rows.dedup();
        cols.sort();
        cols.dedup();
        let counts = rows
            .iter()
            .map(|r| {
                cols.iter()
                    .map(|c| m.get(&(r.clone(), c.clone())).copied().unwrap_or(0))
                    .collect()
            })
            .collect();
        Self {
            row_labels: rows,
            col_labels: cols,
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEntry {
    pub a: String,
    pub b: String,
    pub z: f64,
    pub p_raw: f64,
    pub p_adj: f64,
    pub r_rb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub effect_size: EffectSize,
    pub n: usize,
    /// Set when every observation was equal and the statistic is defined as 0.
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<Vec<PairwiseEntry>>,
}

impl TestReport {
    /// Delimited form: one omnibus row, then one row per pair.
    pub fn to_table(&self) -> String {
        let f = format_number;
        let fp = format_p;
        let mut out = String::from("row,test,statistic,df,p_value,effect,effect_size,n\n");
        out.push_str(&format!(
            "omnibus,{},{},{},{},{},{},{}\n",
            self.test,
            f(self.statistic),
            self.df,
            fp(self.p_value),
            self.effect_size.name,
            f(self.effect_size.value),
            self.n
        ));
        if let Some(pairs) = &self.pairwise {
            out.push_str("row,a,b,z,p_raw,p_adj,r_rb\n");
            for p in pairs {
                out.push_str(&format!(
                    "pair,{},{},{},{},{},{}\n",
                    p.a,
                    p.b,
                    f(p.z),
                    fp(p.p_raw),
                    fp(p.p_adj),
                    f(p.r_rb)
                ));
            }
        }
        out
    }
}

/// Mid-ranks, 1-based.
/// Like [`format_number`], but tiny non-zero probabilities keep three
/// significant digits in exponent form instead of printing as `0`.
pub fn format_p(p: f64) -> String {
    if p > 0.0 && p < 1e-6 {
        format!("{p:.3e}")
    } else {
        format_number(p)
    }
}

pub fn rank_midties(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let mid = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = mid;
        }
        i = j;
    }
    ranks
}

/// Σ (t³ − t) over tie blocks.
fn tie_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i + 1;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        sum += t * t * t - t;
        i = j;
    }
    sum
}

struct RankedGroups {
    n: f64,
    sizes: Vec<f64>,
    rank_sums: Vec<f64>,
    ties: f64,
}

fn rank_groups(g: &GroupedSamples) -> RankedGroups {
    let pooled = g.pooled();
    let ranks = rank_midties(&pooled);
    let mut rank_sums = Vec::with_capacity(g.groups.len());
    let mut at = 0;
    for (_, grp) in &g.groups {
        rank_sums.push(ranks[at..at + grp.len()].iter().sum());
        at += grp.len();
    }
    RankedGroups {
        n: pooled.len() as f64,
        sizes: g.groups.iter().map(|(_, v)| v.len() as f64).collect(),
        rank_sums,
        ties: tie_sum(&pooled),
    }
}

pub fn kruskal_wallis(g: &GroupedSamples) -> Result<TestReport, StatsError> {
    g.check()?;
    let total = g.total();
    if total < 3 {
        return Err(StatsError::TooFewObservations {
            need: 3,
            got: total,
        });
    }
    let r = rank_groups(g);
    let n = r.n;
    let df = (g.groups.len() - 1) as u32;
    let correction = 1.0 - r.ties / (n * n * n - n);
    let degenerate = correction <= 0.0;
    let h = if degenerate {
        0.0
    } else {
        let s: f64 = r
            .rank_sums
            .iter()
            .zip(&r.sizes)
            .map(|(rs, ni)| rs * rs / ni)
            .sum();
        ((12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / correction).max(0.0)
    };
    Ok(TestReport {
        test: "kruskal-wallis".into(),
        statistic: h,
        df,
        p_value: if degenerate { 1.0 } else { chi2_sf(h, df) },
        effect_size: EffectSize {
            name: "epsilon_squared".into(),
            value: h / (n - 1.0),
        },
        n: total,
        degenerate,
        pairwise: None,
    })
}

/// Holm step-down adjustment, results in input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adj = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (i, &k) in idx.iter().enumerate() {
        running = running.max(((m - i) as f64 * p[k]).min(1.0));
        adj[k] = running;
    }
    adj
}

/// Dunn z for every pair `i < j` with Holm-adjusted p and pairwise r_rb.
pub fn dunn_pairwise(g: &GroupedSamples) -> Result<Vec<PairwiseEntry>, StatsError> {
    g.check()?;
    let r = rank_groups(g);
    let n = r.n;
    let var_unit = n * (n + 1.0) / 12.0 - r.ties / (12.0 * (n - 1.0));
    let k = g.groups.len();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let diff = r.rank_sums[i] / r.sizes[i] - r.rank_sums[j] / r.sizes[j];
            let se = (var_unit * (1.0 / r.sizes[i] + 1.0 / r.sizes[j])).sqrt();
            let z = if se > 0.0 { diff / se } else { 0.0 };
            let (_, r_rb) = mann_whitney_rank_biserial(&g.groups[i].1, &g.groups[j].1);
            out.push(PairwiseEntry {
                a: g.groups[i].0.clone(),
                b: g.groups[j].0.clone(),
                z,
                p_raw: (2.0 * normal_sf(z.abs())).min(1.0),
                p_adj: 0.0,
                r_rb,
            });
        }
    }
    let raw: Vec<f64> = out.iter().map(|e| e.p_raw).collect();
    for (e, p) in out.iter_mut().zip(holm_adjust(&raw)) {
        e.p_adj = p;
    }
    Ok(out)
}

/// U counts pairs won by `a` (ties half) and `r_rb = 2U/(na·nb) − 1`.
/// Both slices must be non-empty.
pub fn mann_whitney_rank_biserial(a: &[f64], b: &[f64]) -> (f64, f64) {
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = rank_midties(&pooled);
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u = ra - na * (na + 1.0) / 2.0;
    (u, 2.0 * u / (na * nb) - 1.0)
}

/// Pearson chi-square test of independence, no continuity correction.
pub fn chi_square_independence(t: &ContingencyTable) -> Result<TestReport, StatsError> {
    let rows = t.counts.len();
    let cols = t.counts.first().map_or(0, Vec::len);
    if t.counts.iter().any(|r| r.len() != cols) {
        return Err(StatsError::Ragged);
    }
    if rows < 2 || cols < 2 {
        return Err(StatsError::DegenerateTable);
    }
    let row_sums: Vec<f64> = t
        .counts
        .iter()
        .map(|r| r.iter().sum::<u64>() as f64)
        .collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| t.counts.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    if row_sums.iter().chain(&col_sums).any(|&s| s == 0.0) {
        return Err(StatsError::DegenerateTable);
    }
    let n: f64 = row_sums.iter().sum();
    let mut stat = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / n;
            let d = o as f64 - e;
            stat += d * d / e;
        }
    }
    let df = ((rows - 1) * (cols - 1)) as u32;
    let min_dim = (rows.min(cols) - 1) as f64;
    Ok(TestReport {
        test: "chi-square".into(),
        statistic: stat,
        df,
        p_value: chi2_sf(stat, df),
        effect_size: EffectSize {
            name: "cramers_v".into(),
            value: (stat / (n * min_dim)).sqrt(),
        },
        n: n as usize,
        degenerate: false,
        pairwise: None,
    })
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    if x <= 0.0 || df == 0 {
        return 1.0;
    }
    let h = x / 2.0;
    if df.is_multiple_of(2) {
        // Q(k, h) = e^{-h} Σ_{i<k} h^i / i!
        let mut term = (-h).exp();
        let mut sum = term;
        for i in 1..df / 2 {
            term *= h / i as f64;
            sum += term;
        }
        sum.min(1.0)
    } else {
        // Q(k + 1/2, h) = erfc(√h) + Σ_{i<k} e^{-h} h^{i+1/2} / Γ(i + 3/2)
        let mut sum = erfc(h.sqrt());
        let mut term = (-h).exp() * h.sqrt() / (PI.sqrt() / 2.0);
        for i in 0..df / 2 {
            sum += term;
            term *= h / (i as f64 + 1.5);
        }
        sum.min(1.0)
    }
}

/// Standard normal upper tail.
pub fn normal_sf(z: f64) -> f64 {
    if z >= 0.0 {
        0.5 * erfc(z / std::f64::consts::SQRT_2)
    } else {
        1.0 - 0.5 * erfc(-z / std::f64::consts::SQRT_2)
    }
}

/// Complementary error function for `x ≥ 0`, via Q(1/2, x²).
fn erfc(x: f64) -> f64 {
    let a = x * x;
    if a < 1.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// erf(x) = 2/√π Σ (-1)^n x^{2n+1} / (n! (2n+1)), evaluated through the
/// positive-term form e^{-x²} Σ 2^n x^{2n+1} / (1·3·…·(2n+1)).
fn erf_series(x: f64) -> f64 {
    let a = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term.abs() > sum.abs() * 1e-17 {
        k += 1.0;
        term *= 2.0 * a / (2.0 * k + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-a).exp() * sum
}

/// Modified Lentz evaluation of the continued fraction for Γ(1/2, x²)/Γ(1/2).
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let a = 0.5;
    let z = x * x;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z + a * z.ln()).exp() * h / PI.sqrt()
}
