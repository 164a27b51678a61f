use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ValidationReport;

/// Rectangular field. `x` runs across the field (0..width), `y` along the
/// attack axis (0..length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub width_m: f64,
    pub length_m: f64,
    /// Attack progresses toward increasing `y` when true.
    pub attack_axis_positive: bool,
}

/// Bands across the attack axis, ordered from the own end to the try line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsoluteZoning {
    pub zone_names: Vec<String>,
    pub boundaries_m: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeKind {
    /// Split by the line through the carrier perpendicular to the try line.
    PerpendicularLeftRight,
}

impl RelativeKind {
    pub fn zone_count(self) -> usize {
        match self {
            RelativeKind::PerpendicularLeftRight => 2,
        }
    }

    pub fn zone_names(self) -> &'static [&'static str] {
        match self {
            RelativeKind::PerpendicularLeftRight => &["Left", "Right"],
        }
    }
}

/// Where a teammate level with the carrier's dividing line is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    TiesRight,
    TiesLeft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativeZoning {
    pub kind: RelativeKind,
    #[serde(default)]
    pub tie_rule: TieRule,
}

impl RelativeZoning {
    pub fn zone_count(&self) -> usize {
        self.kind.zone_count()
    }
}

/// A leaf of the thematic label tree, e.g. `kick_diagonal` = kick -> diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThematicLeaf {
    pub id: String,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThematicTaxonomy {
    pub leaves: Vec<ThematicLeaf>,
}

impl ThematicTaxonomy {
    pub fn contains(&self, id: &str) -> bool {
        self.leaves.iter().any(|l| l.id == id)
    }

    pub fn leaf(&self, id: &str) -> Option<&ThematicLeaf> {
        self.leaves.iter().find(|l| l.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.leaves.iter().map(|l| l.id.as_str())
    }

    /// Leaves whose token path starts with `prefix` (e.g. `["kick"]`).
    pub fn leaves_under(&self, prefix: &[&str]) -> Vec<&str> {
        self.leaves
            .iter()
            .filter(|l| {
                l.path.len() >= prefix.len() && l.path.iter().zip(prefix).all(|(a, b)| a == b)
            })
            .map(|l| l.id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResultSet {
    pub names: Vec<String>,
}

impl ResultSet {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Declarative model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_players: usize,
    pub field: FieldSpec,
    pub absolute: AbsoluteZoning,
    pub relative: RelativeZoning,
    pub taxonomy: ThematicTaxonomy,
    pub results: ResultSet,
}

const RUGBY_6V6: &str = include_str!("../../data/presets/rugby-6v6.json");

impl ModelConfig {
    /// The 6v6 rugby small-sided game preset. Band boundaries are illustrative
    /// proportions of a 35 m field and should be replaced by measured values.
    pub fn rugby_6v6() -> Self {
        serde_json::from_str(RUGBY_6V6).expect("bundled rugby preset is valid")
    }

    /// Named presets bundled with the crate.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "rugby-6v6" => Some(Self::rugby_6v6()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn abs_zone_count(&self) -> usize {
        self.absolute.zone_names.len()
    }

    pub fn rel_zone_count(&self) -> usize {
        self.relative.zone_count()
    }

    pub fn zone_index(&self, name: &str) -> Option<usize> {
        self.absolute.zone_names.iter().position(|z| z == name)
    }

    /// Lists every violated configuration invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n_players < 2 {
            report.invariant("n_players < 2", format!("n_players = {}", self.n_players));
        }
        let f = &self.field;
        if !(f.width_m.is_finite() && f.width_m > 0.0) {
            report.invariant(
                "width_m must be positive",
                format!("width_m = {}", f.width_m),
            );
        }
        if !(f.length_m.is_finite() && f.length_m > 0.0) {
            report.invariant(
                "length_m must be positive",
                format!("length_m = {}", f.length_m),
            );
        }

        let abs = &self.absolute;
        if abs.zone_names.is_empty() {
            report.invariant("no absolute zones", "");
        }
        if !all_unique(abs.zone_names.iter()) {
            report.invariant("zone names not unique", abs.zone_names.join(","));
        }
        if !abs.zone_names.is_empty() && abs.boundaries_m.len() + 1 != abs.zone_names.len() {
            report.invariant(
                "boundary count must be zone count - 1",
                format!(
                    "{} zones, {} boundaries",
                    abs.zone_names.len(),
                    abs.boundaries_m.len()
                ),
            );
        }
        if abs.boundaries_m.windows(2).any(|w| !(w[0] < w[1])) {
            report.invariant(
                "boundaries not strictly increasing",
                format!("{:?}", abs.boundaries_m),
            );
        }
        if abs
            .boundaries_m
            .iter()
            .any(|&b| !(b > 0.0 && b < f.length_m))
        {
            report.invariant(
                "boundary outside (0, length_m)",
                format!("{:?}", abs.boundaries_m),
            );
        }

        let leaves = &self.taxonomy.leaves;
        if !all_unique(leaves.iter().map(|l| &l.id)) {
            report.invariant("taxonomy leaf ids not unique", "");
        }
        if leaves.iter().any(|l| l.id.is_empty()) {
            report.invariant("empty taxonomy leaf id", "");
        }

        if self.results.names.is_empty() {
            report.invariant("result set empty", "");
        }
        if !all_unique(self.results.names.iter()) {
            report.invariant("result names not unique", self.results.names.join(","));
        }
        report
    }
}

fn all_unique<'a, I: Iterator<Item = &'a String>>(items: I) -> bool {
    let mut seen = HashSet::new();
    items.into_iter().all(|s| seen.insert(s))
}
