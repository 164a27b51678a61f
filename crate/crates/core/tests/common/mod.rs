//! Helpers shared by the integration suites: independent oracles that work
//! from serialized text rather than library types, and a DOT checker.

#![allow(dead_code)]

pub mod dot;
pub mod props;

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use playgraph::synth::{generate, ScenarioParams, PRESETS};
use playgraph::{Dataset, ModelConfig};

pub const FIG3: &str = include_str!("../../data/fixtures/fig3_example.json");
pub const FIG3_PATHS: &str = include_str!("../../data/fixtures/fig3_paths.json");

/// Mixed-preset rugby dataset: `per_preset` plays from each preset.
pub fn synthetic(seed: u64, per_preset: usize) -> Dataset {
    let cfg = ModelConfig::rugby_6v6();
    let mut ds = Dataset::new(cfg.clone());
    for (i, name) in PRESETS.iter().enumerate() {
        let sp = ScenarioParams::preset(name, seed.wrapping_add(i as u64), per_preset).unwrap();
        ds.plays.extend(generate(&cfg, &sp).unwrap().plays);
    }
    ds
}

/// One path as read straight from the paths file.
#[derive(Debug, Clone)]
pub struct RawPath {
    pub id: String,
    pub meta: BTreeMap<String, String>,
    pub states: Vec<(Vec<u64>, String)>,
    pub intervals: Vec<(f64, f64)>,
    pub arcs: Vec<(Vec<String>, Vec<String>)>,
    pub result: String,
}

pub struct RawSet {
    pub n_players: u64,
    pub rel_zones: usize,
    pub zones: Vec<String>,
    pub results: Vec<String>,
    pub leaves: Vec<(String, Vec<String>)>,
    pub paths: Vec<RawPath>,
}

pub fn parse_raw(text: &str) -> RawSet {
    let v: Value = serde_json::from_str(text).unwrap();
    let cfg = &v["config"];
    let strs = |x: &Value| -> Vec<String> {
        x.as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap().to_string())
            .collect()
    };
    let paths = v["paths"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| RawPath {
            id: p["id"].as_str().unwrap().into(),
            meta: p["meta"]
                .as_object()
                .unwrap()
                .iter()
                .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
                .collect(),
            states: p["vertices"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| {
                    let rel = v[0]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|x| x.as_u64().unwrap())
                        .collect();
                    (rel, v[1].as_str().unwrap().to_string())
                })
                .collect(),
            intervals: p["vertices"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| (v[2].as_f64().unwrap(), v[3].as_f64().unwrap()))
                .collect(),
            arcs: p["arcs"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| (strs(&a[0]), strs(&a[1])))
                .collect(),
            result: p["result"].as_str().unwrap().into(),
        })
        .collect();
    RawSet {
        n_players: cfg["n_players"].as_u64().unwrap(),
        rel_zones: 2,
        zones: strs(&cfg["absolute"]["zone_names"]),
        results: strs(&cfg["results"]),
        leaves: cfg["taxonomy"]
            .as_array()
            .unwrap()
            .iter()
            .map(|l| (l["id"].as_str().unwrap().to_string(), strs(&l["path"])))
            .collect(),
        paths,
    }
}

/// Feature values recomputed from the raw form.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub max_shift_right: u64,
    /// `None` when not reached within the prefix.
    pub crossing_rank: Option<usize>,
    pub kick_count: usize,
    pub path_length: usize,
}

pub fn oracle_row(
    set: &RawSet,
    p: &RawPath,
    k: usize,
    zone: &str,
    kicks: &BTreeSet<String>,
) -> OracleRow {
    let n = set.n_players;
    let mut shift = 0;
    let mut rank = None;
    let mut kick_count = 0;
    for i in 0..p.states.len() {
        if i >= k {
            break;
        }
        let (rel, z) = &p.states[i];
        let right = *rel.last().unwrap();
        shift = shift.max(n - 1 - right);
        if rank.is_none() && z == zone {
            rank = Some(i + 1);
        }
        if let Some((_, th)) = p.arcs.get(i) {
            kick_count += th.iter().filter(|t| kicks.contains(*t)).count();
        }
    }
    OracleRow {
        max_shift_right: shift,
        crossing_rank: rank,
        kick_count,
        path_length: p.arcs.len() + 1,
    }
}

/// Every tuple of `zones` naturals summing to `total`, by exhaustive search.
pub fn brute_tuples(total: u64, zones: usize) -> usize {
    let mut count = 0;
    let mut idx = vec![0u64; zones];
    loop {
        if idx.iter().sum::<u64>() == total {
            count += 1;
        }
        let mut d = 0;
        loop {
            if d == zones {
                return count;
            }
            idx[d] += 1;
            if idx[d] <= total {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn oracle_universe(set: &RawSet) -> usize {
    let sp = brute_tuples(set.n_players - 1, set.rel_zones) * set.zones.len();
    sp * sp + sp * set.results.len()
}

pub fn oracle_pairs(p: &RawPath) -> BTreeSet<(String, String)> {
    let key = |s: &(Vec<u64>, String)| format!("{:?}|{}", s.0, s.1);
    let mut out: BTreeSet<(String, String)> = p
        .states
        .windows(2)
        .map(|w| (key(&w[0]), key(&w[1])))
        .collect();
    out.insert((
        key(p.states.last().unwrap()),
        format!("result|{}", p.result),
    ));
    out
}

pub fn oracle_density(set: &RawSet, paths: &[&RawPath]) -> f64 {
    let mut all = BTreeSet::new();
    for p in paths {
        all.extend(oracle_pairs(p));
    }
    all.len() as f64 / oracle_universe(set) as f64
}

/// Mid-rank of each value by counting: #smaller + (#equal + 1) / 2.
pub fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let eq = v.iter().filter(|y| *y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

fn brute_ties(v: &[f64]) -> f64 {
    let mut seen: Vec<f64> = Vec::new();
    let mut s = 0.0;
    for x in v {
        if seen.contains(x) {
            continue;
        }
        seen.push(*x);
        let t = v.iter().filter(|y| *y == x).count() as f64;
        s += t * t * t - t;
    }
    s
}

/// Kruskal-Wallis H straight from the definition (tie-corrected).
pub fn brute_h(groups: &[Vec<f64>]) -> f64 {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let ranks = brute_ranks(&pooled);
    let mut at = 0;
    let mut s = 0.0;
    for g in groups {
        let r: f64 = ranks[at..at + g.len()].iter().sum();
        s += r * r / g.len() as f64;
        at += g.len();
    }
    let c = 1.0 - brute_ties(&pooled) / (n * n * n - n);
    if c <= 0.0 {
        return 0.0;
    }
    (12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / c
}

/// Dunn z for groups `i` and `j` against the pooled ranks.
pub fn brute_dunn_z(groups: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let ranks = brute_ranks(&pooled);
    let mut means = Vec::new();
    let mut at = 0;
    for g in groups {
        means.push(ranks[at..at + g.len()].iter().sum::<f64>() / g.len() as f64);
        at += g.len();
    }
    let var = n * (n + 1.0) / 12.0 - brute_ties(&pooled) / (12.0 * (n - 1.0));
    let se = (var * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (means[i] - means[j]) / se
    }
}

/// Mann-Whitney U by enumerating all pairs.
pub fn brute_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

pub fn brute_chi2(t: &[Vec<u64>]) -> f64 {
    let n: f64 = t.iter().flatten().sum::<u64>() as f64;
    let mut s = 0.0;
    for (i, row) in t.iter().enumerate() {
        for j in 0..row.len() {
            let r: f64 = t[i].iter().sum::<u64>() as f64;
            let c: f64 = t.iter().map(|row| row[j]).sum::<u64>() as f64;
            let e = r * c / n;
            s += (t[i][j] as f64 - e).powi(2) / e;
        }
    }
    s
}

/// Holm by explicit step-down: reject in order of increasing p while
/// `p_(i) <= alpha / (m - i)`, expressed as the smallest alpha that rejects.
pub fn brute_holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| p[*a].partial_cmp(&p[*b]).unwrap());
    let mut out = vec![0.0; m];
    for (pos, &i) in order.iter().enumerate() {
        let mut best: f64 = 0.0;
        for (q, &j) in order.iter().enumerate().take(pos + 1) {
            best = best.max((m - q) as f64 * p[j]);
        }
        out[i] = best.min(1.0);
    }
    out
}

/// Deterministic small-integer samples for oracle sweeps.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}
