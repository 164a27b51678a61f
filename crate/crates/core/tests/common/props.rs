//! Path-level properties checked against the play a path was built from.

use playgraph::model::spatial_relation;
use playgraph::path::{build_path, check_path};
use playgraph::{Frame, LabeledPath, ModelConfig, PlayRecord};

const EPS: f64 = 1e-9;

/// Interval order, gap/event correspondence, self-loop characterisation,
/// label consistency, event count and time coverage.
pub fn path_properties(play: &PlayRecord, path: &LabeledPath) -> Result<(), String> {
    check_path(path)?;
    let v = &path.vertices;
    let inner = &path.arcs[..path.arcs.len() - 1];
    if path.arcs.len() != v.len() || !path.arcs.last().unwrap().is_terminal() {
        return Err("arc count or terminal arc wrong".into());
    }
    if !path.arcs.last().unwrap().label().is_empty() {
        return Err("terminal arc carries a label".into());
    }
    for w in v.windows(2) {
        if w[0].t_end > w[1].t_start || w[0].t_start > w[0].t_end {
            return Err(format!("intervals overlap or reversed at {}", w[0].t_start));
        }
    }
    let mut events = play.events.iter();
    for (i, arc) in inner.iter().enumerate() {
        let gap = v[i + 1].t_start - v[i].t_end;
        if arc.thematic.is_empty() {
            if gap != 0.0 {
                return Err(format!("gap {gap} without event after vertex {i}"));
            }
        } else {
            for leaf in &arc.thematic {
                let e = events.next().ok_or("more thematic labels than events")?;
                if &e.leaf != leaf {
                    return Err(format!("arc {i} leaf {leaf} but event {}", e.leaf));
                }
                if (gap - (e.t_end - e.t_start)).abs() > EPS {
                    return Err(format!("arc {i} gap {gap} != event duration"));
                }
            }
        }
        if arc.spatial != spatial_relation(&v[i].state, &v[i + 1].state) {
            return Err(format!("arc {i} spatial label disagrees with endpoints"));
        }
        let same = v[i].state == v[i + 1].state;
        let pure_thematic = arc.spatial.is_empty() && !arc.thematic.is_empty();
        if same != pure_thematic {
            return Err(format!("arc {i}: self-loop iff pure thematic violated"));
        }
    }
    if events.next().is_some() {
        return Err("fewer thematic labels than events".into());
    }
    let first = play.frames.first().unwrap().t;
    let last = play.frames.last().unwrap().t;
    let spent: f64 = v.iter().map(|x| x.t_end - x.t_start).sum();
    let in_events: f64 = play.events.iter().map(|e| e.t_end - e.t_start).sum();
    if (spent + in_events - (last - first)).abs() > EPS {
        return Err(format!(
            "coverage {spent} + {in_events} != {}",
            last - first
        ));
    }
    Ok(())
}

/// Inserts a copy of each frame halfway to the next one wherever no event
/// touches that frame interval and the carrier is unchanged, so no
/// classified state changes.
pub fn refine(play: &PlayRecord) -> PlayRecord {
    let mut out = play.clone();
    out.frames.clear();
    for (i, f) in play.frames.iter().enumerate() {
        out.frames.push(f.clone());
        let Some(next) = play.frames.get(i + 1) else {
            continue;
        };
        let quiet = play
            .events
            .iter()
            .all(|e| e.t_end < f.t || e.t_start > next.t);
        if quiet && next.carrier == f.carrier {
            out.frames.push(Frame {
                t: (f.t + next.t) / 2.0,
                ..f.clone()
            });
        }
    }
    out
}

pub fn refinement_invariant(play: &PlayRecord, cfg: &ModelConfig) -> Result<(), String> {
    let a = build_path(play, cfg).map_err(|e| e.to_string())?;
    let refined = refine(play);
    if refined.frames.len() == play.frames.len() {
        return Ok(());
    }
    let b = build_path(&refined, cfg).map_err(|e| e.to_string())?;
    if a != b {
        return Err(format!("refined play {} builds a different path", play.id));
    }
    Ok(())
}
