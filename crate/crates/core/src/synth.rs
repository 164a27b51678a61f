//! Seeded synthetic plays.
//!
//! Randomness comes from SplitMix64 (increment `0x9E3779B97F4A7C15`, mixing
//! multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`, shifts 30/27/31).
//! Play `i` draws from its own stream seeded with
//! `seed ^ (i * 0xD1B54A32D192ED03)`, so a play depends only on the base seed
//! and its index. Times are whole multiples of the frame step in
//! milliseconds and positions are rounded to the millimetre, so generated
//! datasets survive a write/read cycle bit for bit.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ingest::{Dataset, EventRecord, Frame, PlayRecord, Point};
use crate::model::ModelConfig;

pub const PRESETS: [&str; 3] = ["tight-like", "open-like", "kick-like"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Index drawn proportionally to `weights`; `None` if they sum to zero.
    pub fn weighted(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut x = self.next_f64() * total;
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                return Some(i);
            }
            x -= w;
        }
        weights.iter().rposition(|w| *w > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid scenario parameter: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub name: String,
    pub seed: u64,
    pub plays: usize,
    /// Inclusive range of frames per play.
    pub frames: (usize, usize),
    pub frame_ms: u32,
    /// Expected thematic events per second of play.
    pub event_rate: f64,
    /// Relative frequency of each thematic leaf; leaves missing from the
    /// config are ignored.
    pub leaf_weights: BTreeMap<String, f64>,
    /// Team drift toward the right touchline, m/s (negative drifts left).
    pub lateral_drift: f64,
    /// Forward speed, m/s.
    pub advance: f64,
    /// Probability that a pass goes to the nearest teammate on the right.
    pub pass_right_bias: f64,
    /// Lateral distance between neighbouring attackers, m.
    pub spacing: f64,
    /// Probability that the play ends on the first result.
    pub success_odds: f64,
    /// Extra tags copied onto every play.
    pub tags: BTreeMap<String, String>,
}

impl ScenarioParams {
    pub fn base(seed: u64, plays: usize) -> Self {
        Self {
            name: "base".into(),
            seed,
            plays,
            frames: (40, 120),
            frame_ms: 100,
            event_rate: 0.8,
            leaf_weights: BTreeMap::new(),
            lateral_drift: 0.0,
            advance: 2.0,
            pass_right_bias: 0.5,
            spacing: 3.0,
            success_odds: 0.4,
            tags: BTreeMap::new(),
        }
    }

    pub fn preset(name: &str, seed: u64, plays: usize) -> Result<Self, SynthError> {
        let mut sp = Self::base(seed, plays);
        let w = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
            pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
        };
        match name {
            "tight-like" => {
                sp.leaf_weights = w(&[
                    ("hand_no_contact", 4.0),
                    ("hand_contact", 4.0),
                    ("kick_diagonal", 0.2),
                    ("kick_straight", 0.2),
                ]);
                sp.lateral_drift = -0.3;
                sp.advance = 1.2;
                sp.pass_right_bias = 0.3;
                sp.spacing = 2.0;
                sp.success_odds = 0.3;
            }
            "open-like" => {
                sp.leaf_weights = w(&[
                    ("hand_no_contact", 6.0),
                    ("hand_contact", 1.0),
                    ("kick_diagonal", 0.5),
                    ("kick_straight", 0.5),
                ]);
                sp.lateral_drift = 1.0;
                sp.advance = 2.5;
                sp.pass_right_bias = 0.85;
                sp.spacing = 4.0;
                sp.success_odds = 0.5;
            }
            "kick-like" => {
                sp.leaf_weights = w(&[
                    ("hand_no_contact", 2.0),
                    ("hand_contact", 1.0),
                    ("kick_diagonal", 2.5),
                    ("kick_straight", 2.5),
                ]);
                sp.lateral_drift = 0.3;
                sp.advance = 2.0;
                sp.pass_right_bias = 0.5;
                sp.spacing = 3.0;
                sp.success_odds = 0.4;
            }
            other => return Err(SynthError::UnknownPreset(other.to_string())),
        }
        sp.name = name.to_string();
        sp.tags
            .insert("scenario".into(), name.trim_end_matches("-like").into());
        Ok(sp)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.frames.0 < 2 || self.frames.0 > self.frames.1 {
            return Err(SynthError::Invalid(
                "frames range must satisfy 2 <= min <= max",
            ));
        }
        if self.frame_ms == 0 {
            return Err(SynthError::Invalid("frame_ms must be positive"));
        }
        if !(self.event_rate >= 0.0 && self.event_rate.is_finite()) {
            return Err(SynthError::Invalid("event_rate must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.pass_right_bias) || !(0.0..=1.0).contains(&self.success_odds)
        {
            return Err(SynthError::Invalid("probabilities must lie in [0, 1]"));
        }
        if self
            .leaf_weights
            .values()
            .any(|w| !(*w >= 0.0 && w.is_finite()))
        {
            return Err(SynthError::Invalid("leaf weights must be finite and >= 0"));
        }
        if !(self.lateral_drift.is_finite() && self.advance.is_finite() && self.spacing >= 0.0) {
            return Err(SynthError::Invalid("motion parameters must be finite"));
        }
        Ok(())
    }
}

fn mm(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn play_stream(seed: u64, index: usize) -> SplitMix64 {
    let mut s = SplitMix64::new(seed ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    SplitMix64::new(s.next_u64())
}

/// Generates `sp.plays` valid plays for `cfg`.
pub fn generate(cfg: &ModelConfig, sp: &ScenarioParams) -> Result<Dataset, SynthError> {
    sp.validate()?;
    let leaves: Vec<String> = cfg.taxonomy.ids().map(str::to_string).collect();
    let mut weights: Vec<f64> = leaves
        .iter()
        .map(|l| sp.leaf_weights.get(l).copied().unwrap_or(0.0))
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        weights = vec![1.0; leaves.len()];
    }
    let plays = (0..sp.plays)
        .map(|i| generate_play(cfg, sp, i, &leaves, &weights))
        .collect();
    Ok(Dataset {
        config: cfg.clone(),
        plays,
    })
}

fn generate_play(
    cfg: &ModelConfig,
    sp: &ScenarioParams,
    index: usize,
    leaves: &[String],
    weights: &[f64],
) -> PlayRecord {
    let mut rng = play_stream(sp.seed, index);
    let n = cfg.n_players;
    let (w, l) = (cfg.field.width_m, cfg.field.length_m);
    let margin = 0.01;
    let clamp = |v: f64, hi: f64| v.clamp(margin, hi - margin);
    let n_frames = rng.range(sp.frames.0, sp.frames.1);
    let dt = sp.frame_ms as f64 / 1000.0;

    let first_band = cfg.absolute.boundaries_m.first().copied().unwrap_or(l);
    let mut cx = rng.uniform(0.3 * w, 0.7 * w);
    let mut cy = rng.uniform(0.05 * l, (0.9 * first_band).max(0.06 * l));
    let mut offsets: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let lateral = (k as f64 - (n as f64 - 1.0) / 2.0) * sp.spacing;
            (lateral + rng.uniform(-0.5, 0.5), rng.uniform(-1.5, 1.5))
        })
        .collect();
    let mut carrier = rng.range(0, n - 1);

    let mut frames = Vec::with_capacity(n_frames);
    let mut events = Vec::new();
    let mut pending: Option<(usize, usize)> = None;
    let mut next_start = 1;
    let p_event = (sp.event_rate * dt).min(1.0);

    for j in 0..n_frames {
        if let Some((land, receiver)) = pending {
            if j == land {
                carrier = receiver;
                pending = None;
            }
        }
        let t = (j as u64 * sp.frame_ms as u64) as f64 / 1000.0;
        let positions: Vec<Point> = offsets
            .iter()
            .map(|&(ox, oy)| {
                let p = Point::new(mm(clamp(cx + ox, w)), mm(clamp(cy + oy, l)));
                let q = cfg.field.to_attack_frame(p);
                Point::new(mm(clamp(q.x, w)), mm(clamp(q.y, l)))
            })
            .collect();
        frames.push(Frame {
            t,
            carrier,
            positions,
        });

        if pending.is_none() && j >= next_start && !leaves.is_empty() && rng.chance(p_event) {
            if let Some(li) = rng.weighted(weights) {
                let kick = cfg
                    .taxonomy
                    .leaf(&leaves[li])
                    .is_some_and(|leaf| leaf.path.first().is_some_and(|p| p == "kick"));
                let span = if kick {
                    rng.range(5, 12)
                } else {
                    rng.range(1, 4)
                };
                let land = j + span;
                if land < n_frames && n > 1 {
                    let receiver = pick_receiver(&mut rng, &offsets, carrier, sp.pass_right_bias);
                    events.push(EventRecord {
                        leaf: leaves[li].clone(),
                        t_start: t,
                        t_end: (land as u64 * sp.frame_ms as u64) as f64 / 1000.0,
                    });
                    pending = Some((land, receiver));
                    next_start = land + 1;
                }
            }
        }

        cx += sp.lateral_drift * dt + rng.uniform(-0.15, 0.15);
        cy += sp.advance * dt * rng.uniform(0.5, 1.5);
        for o in offsets.iter_mut() {
            o.0 += rng.uniform(-0.1, 0.1);
            o.1 += rng.uniform(-0.1, 0.1);
        }
    }

    let result = if rng.chance(sp.success_odds) || cfg.results.names.len() < 2 {
        cfg.results.names[0].clone()
    } else {
        cfg.results.names[1 + rng.range(0, cfg.results.names.len() - 2)].clone()
    };
    let mut meta = sp.tags.clone();
    meta.insert(
        "phase".into(),
        if index.is_multiple_of(2) {
            "pre"
        } else {
            "post"
        }
        .into(),
    );
    PlayRecord {
        id: format!("{}-{index:05}", sp.name),
        result,
        meta,
        frames,
        events,
    }
}

/// Nearest teammate to the right of the carrier with probability `bias`,
/// otherwise any other teammate.
fn pick_receiver(rng: &mut SplitMix64, offsets: &[(f64, f64)], carrier: usize, bias: f64) -> usize {
    let cx = offsets[carrier].0;
    let right = offsets
        .iter()
        .enumerate()
        .filter(|&(k, o)| k != carrier && o.0 > cx)
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(k, _)| k);
    let roll = rng.chance(bias);
    match right {
        Some(k) if roll => k,
        _ => {
            let k = rng.range(0, offsets.len() - 2);
            if k >= carrier {
                k + 1
            } else {
                k
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{count_thematic, FeatureParams};
    use crate::path::{build_all, check_path};

    #[test]
    fn splitmix_reference() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn seeded_valid_and_deterministic() {
        let cfg = ModelConfig::rugby_6v6();
        let sp = ScenarioParams::base(42, 10);
        let a = generate(&cfg, &sp).unwrap();
        let b = generate(&cfg, &sp).unwrap();
        assert_eq!(a.to_canonical(), b.to_canonical());
        assert_eq!(a.plays.len(), 10);
        assert!(a.validate().is_empty(), "{:?}", a.validate());
        let back = Dataset::from_json_str(&a.to_canonical()).unwrap();
        assert_eq!(back, a);
        let c = generate(&cfg, &ScenarioParams::base(43, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_stability() {
        let cfg = ModelConfig::rugby_6v6();
        let small = generate(&cfg, &ScenarioParams::base(7, 3)).unwrap();
        let big = generate(&cfg, &ScenarioParams::base(7, 6)).unwrap();
        assert_eq!(small.plays[..], big.plays[..3]);
    }

    #[test]
    fn zero_rate_has_no_events() {
        let cfg = ModelConfig::rugby_6v6();
        let mut sp = ScenarioParams::preset("open-like", 1, 20).unwrap();
        sp.event_rate = 0.0;
        let ds = generate(&cfg, &sp).unwrap();
        assert!(ds.plays.iter().all(|p| p.events.is_empty()));
        let paths = build_all(&ds, 1).unwrap();
        assert!(paths
            .iter()
            .all(|p| p.arcs.iter().all(|a| a.thematic.is_empty())));
    }

    #[test]
    fn kick_preset_kicks_more() {
        let cfg = ModelConfig::rugby_6v6();
        let params = FeatureParams::defaults(&cfg);
        let rate = |name: &str| {
            let ds = generate(&cfg, &ScenarioParams::preset(name, 11, 200).unwrap()).unwrap();
            let paths = build_all(&ds, 1).unwrap();
            paths
                .iter()
                .filter(|p| count_thematic(p, params.k, &params.kick_leaves) > 0)
                .count()
        };
        assert!(rate("kick-like") > rate("tight-like"));
    }

    #[test]
    fn mirrored_field_still_valid() {
        let mut cfg = ModelConfig::rugby_6v6();
        cfg.field.attack_axis_positive = false;
        let ds = generate(&cfg, &ScenarioParams::preset("tight-like", 5, 30).unwrap()).unwrap();
        assert!(ds.validate().is_empty());
        for p in build_all(&ds, 2).unwrap() {
            check_path(&p).unwrap();
        }
    }

    #[test]
    fn presets_and_errors() {
        for name in PRESETS {
            let sp = ScenarioParams::preset(name, 0, 1).unwrap();
            assert_eq!(sp.name, name);
        }
        assert_eq!(
            ScenarioParams::preset("loose", 0, 1).unwrap_err(),
            SynthError::UnknownPreset("loose".into())
        );
        let mut sp = ScenarioParams::base(0, 1);
        sp.success_odds = 1.5;
        assert!(generate(&ModelConfig::rugby_6v6(), &sp).is_err());
    }
}
