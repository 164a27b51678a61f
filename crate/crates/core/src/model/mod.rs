//! Model configuration, spatial vocabulary and the skeleton graph.

mod config;
mod skeleton;
mod zoning;

pub use config::{
    AbsoluteZoning, FieldSpec, ModelConfig, RelativeKind, RelativeZoning, ResultSet, ThematicLeaf,
    ThematicTaxonomy, TieRule,
};
pub use skeleton::{binomial, enumerate_rel_tuples, SkeletonGraph, VertexId, VertexKind};
pub use zoning::{spatial_relation, ClassifyError, Point, SpatialLabel, SpatialState};

use std::fmt;

/// Whether a violation is about vocabulary/shape or about a semantic rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Schema,
    Invariant,
}

/// One broken rule. `rule` is a stable short message, `detail` adds location.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            write!(f, "{}", self.rule)
        } else {
            write!(f, "{} ({})", self.rule, self.detail)
        }
    }
}

/// Report-based validation result: empty iff the checked object is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub(crate) fn invariant(&mut self, rule: &'static str, detail: impl Into<String>) {
        self.violations.push(Violation {
            kind: ViolationKind::Invariant,
            rule,
            detail: detail.into(),
        });
    }

    pub(crate) fn schema(&mut self, rule: &'static str, detail: impl Into<String>) {
        self.violations.push(Violation {
            kind: ViolationKind::Schema,
            rule,
            detail: detail.into(),
        });
    }

    /// True if some violation carries exactly this rule message.
    pub fn has(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
