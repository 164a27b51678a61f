use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FieldSpec, ModelConfig, TieRule};

/// Field coordinates in meters: `x` lateral, `y` along the attack axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("position ({x}, {y}) outside the field")]
    OutOfField { x: f64, y: f64 },
    #[error("expected {expected} teammates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("carrier index {carrier} out of range for {n_players} players")]
    BadCarrier { carrier: usize, n_players: usize },
}

impl FieldSpec {
    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.width_m).contains(&p.x) && (0.0..=self.length_m).contains(&p.y)
    }

    /// Maps a field point into the attacking frame (attack toward +y, left
    /// toward -x). Identity when `attack_axis_positive`, otherwise a half-turn.
    pub fn to_attack_frame(&self, p: Point) -> Point {
        if self.attack_axis_positive {
            p
        } else {
            Point::new(self.width_m - p.x, self.length_m - p.y)
        }
    }
}

/// A spatial vertex: teammates per relative zone plus the carrier's band.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpatialState {
    pub rel: Vec<u32>,
    pub abs: usize,
}

impl SpatialState {
    pub fn new(rel: Vec<u32>, abs: usize) -> Self {
        Self { rel, abs }
    }

    /// Teammates in the last relative zone (`Right` for the left/right split).
    pub fn last_rel(&self) -> u32 {
        self.rel.last().copied().unwrap_or(0)
    }

    pub fn teammates(&self) -> u32 {
        self.rel.iter().sum()
    }
}

/// Which spatial components differ between two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SpatialLabel {
    pub rel: bool,
    pub abs: bool,
}

impl SpatialLabel {
    pub const NONE: SpatialLabel = SpatialLabel {
        rel: false,
        abs: false,
    };

    pub fn is_empty(&self) -> bool {
        !self.rel && !self.abs
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::with_capacity(2);
        if self.rel {
            out.push("rel");
        }
        if self.abs {
            out.push("abs");
        }
        out
    }
}

impl fmt::Display for SpatialLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(", "))
    }
}

pub fn spatial_relation(a: &SpatialState, b: &SpatialState) -> SpatialLabel {
    SpatialLabel {
        rel: a.rel != b.rel,
        abs: a.abs != b.abs,
    }
}

impl ModelConfig {
    /// Index of the absolute band containing `pos`. Bands are half-open: a
    /// point on a boundary belongs to the band nearer the try line.
    pub fn classify_absolute(&self, pos: Point) -> Result<usize, ClassifyError> {
        if !self.field.contains(&pos) {
            return Err(ClassifyError::OutOfField { x: pos.x, y: pos.y });
        }
        let along = self.field.to_attack_frame(pos).y;
        Ok(self
            .absolute
            .boundaries_m
            .iter()
            .take_while(|&&b| b <= along)
            .count())
    }

    /// Counts teammates per relative zone around the carrier.
    pub fn classify_relative(
        &self,
        carrier: Point,
        teammates: &[Point],
    ) -> Result<Vec<u32>, ClassifyError> {
        let expected = self.n_players.saturating_sub(1);
        if teammates.len() != expected {
            return Err(ClassifyError::ArityMismatch {
                expected,
                got: teammates.len(),
            });
        }
        let c = self.field.to_attack_frame(carrier);
        let mut counts = vec![0u32; self.rel_zone_count()];
        for mate in teammates {
            let m = self.field.to_attack_frame(*mate);
            let right = if m.x == c.x {
                self.relative.tie_rule == TieRule::TiesRight
            } else {
                m.x > c.x
            };
            counts[usize::from(right)] += 1;
        }
        Ok(counts)
    }

    /// State of the game for one snapshot: relative counts around
    /// `positions[carrier]` and the carrier's absolute band.
    pub fn classify_state(
        &self,
        carrier: usize,
        positions: &[Point],
    ) -> Result<SpatialState, ClassifyError> {
        let Some(&at) = positions.get(carrier) else {
            return Err(ClassifyError::BadCarrier {
                carrier,
                n_players: positions.len(),
            });
        };
        if positions.len() != self.n_players {
            return Err(ClassifyError::ArityMismatch {
                expected: self.n_players.saturating_sub(1),
                got: positions.len().saturating_sub(1),
            });
        }
        let mates: Vec<Point> = positions
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != carrier)
            .map(|(_, p)| *p)
            .collect();
        let rel = self.classify_relative(at, &mates)?;
        let abs = self.classify_absolute(at)?;
        Ok(SpatialState { rel, abs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Snapshot digitized from a drawing whose field spans x 5..8.75
    /// (30 m) and y 5..10.5 (35 m).
    pub(crate) fn snapshot_positions() -> (Point, Vec<Point>) {
        let to_m = |x: f64, y: f64| Point::new((x - 5.0) * 30.0 / 3.75, (y - 5.0) * 35.0 / 5.5);
        let carrier = to_m(6.1, 8.4);
        let mates = vec![
            to_m(5.2, 8.0),
            to_m(5.4, 7.3),
            to_m(6.5, 8.3),
            to_m(6.8, 9.2),
            to_m(6.3, 7.8),
        ];
        (carrier, mates)
    }

    #[test]
    fn snapshot_classifies_to_two_three_middle() {
        let cfg = ModelConfig::rugby_6v6();
        let (carrier, mates) = snapshot_positions();
        assert_eq!(cfg.classify_relative(carrier, &mates).unwrap(), vec![2, 3]);
        assert_eq!(cfg.classify_absolute(carrier).unwrap(), 1);
    }

    #[test]
    fn absolute_band_edges() {
        let cfg = ModelConfig::rugby_6v6();
        let b = cfg.absolute.boundaries_m.clone();
        assert_eq!(cfg.classify_absolute(Point::new(3.0, 0.0)).unwrap(), 0);
        assert_eq!(cfg.classify_absolute(Point::new(3.0, b[0])).unwrap(), 1);
        assert_eq!(cfg.classify_absolute(Point::new(3.0, b[1])).unwrap(), 2);
        assert_eq!(cfg.classify_absolute(Point::new(30.0, 35.0)).unwrap(), 2);
        assert!(matches!(
            cfg.classify_absolute(Point::new(-0.1, 3.0)),
            Err(ClassifyError::OutOfField { .. })
        ));
        assert!(cfg.classify_absolute(Point::new(1.0, 35.5)).is_err());
        assert!(cfg.classify_absolute(Point::new(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn relative_extremes_and_ties() {
        let mut cfg = ModelConfig::rugby_6v6();
        let carrier = Point::new(20.0, 5.0);
        let left: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 4.0)).collect();
        assert_eq!(cfg.classify_relative(carrier, &left).unwrap(), vec![5, 0]);

        let mut mates = left.clone();
        mates[0] = Point::new(20.0, 1.0);
        assert_eq!(cfg.classify_relative(carrier, &mates).unwrap(), vec![4, 1]);
        cfg.relative.tie_rule = TieRule::TiesLeft;
        assert_eq!(cfg.classify_relative(carrier, &mates).unwrap(), vec![5, 0]);

        let err = cfg.classify_relative(carrier, &mates[..3]).unwrap_err();
        assert_eq!(
            err,
            ClassifyError::ArityMismatch {
                expected: 5,
                got: 3
            }
        );
    }

    #[test]
    fn reversed_attack_axis_is_a_half_turn() {
        let mut cfg = ModelConfig::rugby_6v6();
        let (carrier, mates) = snapshot_positions();
        let turn = |p: Point| Point::new(30.0 - p.x, 35.0 - p.y);
        cfg.field.attack_axis_positive = false;
        let turned: Vec<Point> = mates.iter().copied().map(turn).collect();
        assert_eq!(
            cfg.classify_relative(turn(carrier), &turned).unwrap(),
            vec![2, 3]
        );
        assert_eq!(cfg.classify_absolute(turn(carrier)).unwrap(), 1);
    }

    #[test]
    fn relation_cases() {
        let a1 = SpatialState::new(vec![0, 2], 0);
        let a2 = SpatialState::new(vec![0, 2], 1);
        let b2 = SpatialState::new(vec![1, 1], 1);
        assert_eq!(spatial_relation(&a1, &a2).to_string(), "abs");
        assert_eq!(spatial_relation(&a2, &b2).to_string(), "rel");
        assert_eq!(spatial_relation(&a1, &b2).to_string(), "rel, abs");
        assert!(spatial_relation(&a1, &a1).is_empty());
    }
}
