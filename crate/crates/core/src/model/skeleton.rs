use std::collections::HashMap;

use super::{ModelConfig, SpatialState};

/// Index into [`SkeletonGraph`] vertices: spatial vertices first, then results.
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexKind {
    Spatial(SpatialState),
    Result(String),
}

/// All spatial states (relative tuple x absolute zone) plus result vertices.
///
/// The arc universe is implicit and complete: every ordered spatial pair
/// (self-loops included) and every spatial -> result pair.
///
/// Spatial vertex `abs * columns + column` holds the `column`-th relative
/// tuple (lexicographic order, i.e. decreasing last component for two zones)
/// in band `abs`, so rows follow the field from the own end to the try line.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    n_players: usize,
    rel_tuples: Vec<Vec<u32>>,
    rel_index: HashMap<Vec<u32>, usize>,
    zone_names: Vec<String>,
    result_names: Vec<String>,
}

impl SkeletonGraph {
    pub fn build(cfg: &ModelConfig) -> Self {
        let rel_tuples =
            enumerate_rel_tuples(cfg.n_players.saturating_sub(1) as u32, cfg.rel_zone_count());
        let rel_index = rel_tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            n_players: cfg.n_players,
            rel_tuples,
            rel_index,
            zone_names: cfg.absolute.zone_names.clone(),
            result_names: cfg.results.names.clone(),
        }
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn columns(&self) -> usize {
        self.rel_tuples.len()
    }

    pub fn rows(&self) -> usize {
        self.zone_names.len()
    }

    pub fn spatial_count(&self) -> usize {
        self.columns() * self.rows()
    }

    pub fn result_count(&self) -> usize {
        self.result_names.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.spatial_count() + self.result_count()
    }

    /// `|V_sp|^2 + |V_sp| * |V_res|`: ordered pairs, self-loops included.
    pub fn arc_universe_size(&self) -> usize {
        let sp = self.spatial_count();
        sp * sp + sp * self.result_count()
    }

    pub fn rel_tuples(&self) -> &[Vec<u32>] {
        &self.rel_tuples
    }

    pub fn zone_names(&self) -> &[String] {
        &self.zone_names
    }

    pub fn result_names(&self) -> &[String] {
        &self.result_names
    }

    pub fn spatial_id(&self, state: &SpatialState) -> Option<VertexId> {
        if state.abs >= self.rows() {
            return None;
        }
        let col = *self.rel_index.get(&state.rel)?;
        Some(state.abs * self.columns() + col)
    }

    pub fn result_id(&self, name: &str) -> Option<VertexId> {
        self.result_names
            .iter()
            .position(|r| r == name)
            .map(|i| self.spatial_count() + i)
    }

    pub fn is_spatial(&self, id: VertexId) -> bool {
        id < self.spatial_count()
    }

    pub fn state(&self, id: VertexId) -> Option<SpatialState> {
        if !self.is_spatial(id) {
            return None;
        }
        let (row, col) = (id / self.columns(), id % self.columns());
        Some(SpatialState::new(self.rel_tuples[col].clone(), row))
    }

    pub fn vertex(&self, id: VertexId) -> Option<VertexKind> {
        if let Some(s) = self.state(id) {
            return Some(VertexKind::Spatial(s));
        }
        self.result_names
            .get(id - self.spatial_count())
            .map(|r| VertexKind::Result(r.clone()))
    }

    /// Grid cell `(row, column)` of a spatial vertex.
    pub fn layout(&self, id: VertexId) -> Option<(usize, usize)> {
        self.is_spatial(id)
            .then(|| (id / self.columns(), id % self.columns()))
    }

    /// Human-readable label such as `(2,3) Middle` or `Try`.
    pub fn label(&self, id: VertexId) -> String {
        match self.vertex(id) {
            Some(VertexKind::Spatial(s)) => {
                format!("{} {}", rel_text(&s.rel), self.zone_names[s.abs])
            }
            Some(VertexKind::Result(r)) => r,
            None => format!("?{id}"),
        }
    }

    pub fn zone_name(&self, abs: usize) -> Option<&str> {
        self.zone_names.get(abs).map(String::as_str)
    }
}

/// `(2,3)` formatting of a relative tuple.
pub(crate) fn rel_text(rel: &[u32]) -> String {
    let parts: Vec<String> = rel.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

/// All tuples of `zones` non-negative integers summing to `total`, in
/// lexicographic order.
pub fn enumerate_rel_tuples(total: u32, zones: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(remaining - v, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if zones > 0 {
        rec(total, zones, &mut Vec::with_capacity(zones), &mut out);
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        AbsoluteZoning, FieldSpec, RelativeKind, RelativeZoning, ResultSet, ThematicTaxonomy,
        TieRule,
    };

    fn small_cfg(n: usize, zones: usize, results: usize) -> ModelConfig {
        ModelConfig {
            n_players: n,
            field: FieldSpec {
                width_m: 20.0,
                length_m: 20.0,
                attack_axis_positive: true,
            },
            absolute: AbsoluteZoning {
                zone_names: (1..=zones).map(|i| format!("A{i}")).collect(),
                boundaries_m: (1..zones).map(|i| 20.0 * i as f64 / zones as f64).collect(),
            },
            relative: RelativeZoning {
                kind: RelativeKind::PerpendicularLeftRight,
                tie_rule: TieRule::TiesRight,
            },
            taxonomy: ThematicTaxonomy { leaves: vec![] },
            results: ResultSet {
                names: ["Success", "Failure", "Other"][..results]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            },
        }
    }

    #[test]
    fn counting_examples() {
        let fig2 = SkeletonGraph::build(&small_cfg(3, 2, 2));
        assert_eq!(fig2.spatial_count(), 6);
        assert_eq!(fig2.vertex_count(), 8);
        assert_eq!(fig2.arc_universe_size(), 48);

        let rugby = SkeletonGraph::build(&ModelConfig::rugby_6v6());
        assert_eq!(rugby.spatial_count(), 18);
        assert_eq!(rugby.vertex_count(), 20);
        assert_eq!(rugby.arc_universe_size(), 360);

        let tiny = SkeletonGraph::build(&small_cfg(2, 1, 1));
        assert_eq!(tiny.spatial_count(), 2);
        assert_eq!(tiny.vertex_count(), 3);
    }

    #[test]
    fn single_vertex_universe() {
        // one player: a single (0,0) tuple, one zone, one result
        let skel = SkeletonGraph::build(&small_cfg(1, 1, 1));
        assert_eq!(skel.spatial_count(), 1);
        assert_eq!(skel.arc_universe_size(), 2);
    }

    #[test]
    fn column_order_puts_right_heavy_first() {
        let rugby = SkeletonGraph::build(&ModelConfig::rugby_6v6());
        let last: Vec<u32> = rugby.rel_tuples().iter().map(|t| t[1]).collect();
        assert_eq!(last, [5, 4, 3, 2, 1, 0]);
        assert_eq!(rugby.label(0), "(0,5) Back");
        assert_eq!(rugby.label(17), "(5,0) Front");
        assert_eq!(rugby.label(18), "Try");
        assert_eq!(rugby.layout(8), Some((1, 2)));
        assert_eq!(rugby.layout(18), None);
    }

    #[test]
    fn ids_round_trip() {
        let rugby = SkeletonGraph::build(&ModelConfig::rugby_6v6());
        for id in 0..rugby.spatial_count() {
            let s = rugby.state(id).unwrap();
            assert_eq!(rugby.spatial_id(&s), Some(id));
        }
        assert_eq!(rugby.result_id("Failure"), Some(19));
        assert_eq!(rugby.spatial_id(&SpatialState::new(vec![6, 0], 0)), None);
    }

    #[test]
    fn counting_formula_matches_brute_force() {
        for n in 1..=8u32 {
            for m in 1..=4usize {
                // brute force over the full m-dimensional box
                let mut brute = 0u64;
                let mut idx = vec![0u32; m];
                loop {
                    if idx.iter().sum::<u32>() == n - 1 {
                        brute += 1;
                    }
                    let mut k = 0;
                    while k < m {
                        idx[k] += 1;
                        if idx[k] < n {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == m {
                        break;
                    }
                }
                let tuples = enumerate_rel_tuples(n - 1, m);
                assert_eq!(tuples.len() as u64, brute);
                assert_eq!(binomial((n - 1) as u64 + m as u64 - 1, m as u64 - 1), brute);
                assert!(tuples.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn deterministic_build() {
        let cfg = ModelConfig::rugby_6v6();
        let a = SkeletonGraph::build(&cfg);
        let b = SkeletonGraph::build(&cfg);
        let la: Vec<String> = (0..a.vertex_count()).map(|i| a.label(i)).collect();
        let lb: Vec<String> = (0..b.vertex_count()).map(|i| b.label(i)).collect();
        assert_eq!(la, lb);
    }
}
