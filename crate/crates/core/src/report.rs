//! CSV and JSON exports of orbits, hit records and pullbacks.

use serde_json::{json, Value};

use crate::interval::IntervalSet;
use crate::map::MapSpec;
use crate::orbit::{HitRecord, Orbit};
use crate::pullback::summarize_levels;
use crate::scalar::Real;

/// `step,value` rows with full-precision decimal values.
pub fn orbit_csv<T: Real>(orbit: &Orbit<T>) -> String {
    let mut out = String::from("step,value\n");
    for (i, v) in orbit.values.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", v.to_decimal()));
    }
    out
}

pub fn orbit_json<T: Real>(orbit: &Orbit<T>) -> Value {
    json!({
        "x0": orbit.x0.to_decimal(),
        "steps": orbit.last_index(),
        "values": orbit.values.iter().map(Real::to_decimal).collect::<Vec<_>>(),
        "verified_through": orbit.verified_through,
        "fully_verified": orbit.is_fully_verified(),
        "pole_hit": orbit.pole_hit,
        "policy": orbit.policy,
    })
}

pub fn hit_json<T: Real>(record: &HitRecord<T>) -> Value {
    json!({
        "x0": record.x0.to_decimal(),
        "eps": record.eps.to_decimal(),
        "n_max": record.n_max,
        "n_hit": record.n_hit(),
        "pole_index": record.hit.as_ref().map(|h| h.pole_index),
        "distance": record.hit.as_ref().map(|h| h.distance.to_decimal()),
        "verified_through": record.verified_through,
    })
}

/// `level,index,a,b` rows.
pub fn pullback_csv<T: Real>(levels: &[IntervalSet<T>]) -> String {
    let mut out = String::from("level,index,a,b\n");
    for (k, set) in levels.iter().enumerate() {
        for (i, iv) in set.intervals().iter().enumerate() {
            out.push_str(&format!("{k},{i},{},{}\n", iv.lo.to_decimal(), iv.hi.to_decimal()));
        }
    }
    out
}

/// Per-level counts, measures, radii and merge events.
pub fn pullback_json<T: Real>(spec: &MapSpec<T>, eps: &T, levels: &[IntervalSet<T>]) -> Value {
    let merges: Vec<Value> = levels
        .iter()
        .enumerate()
        .flat_map(|(k, set)| {
            set.merge_events()
                .iter()
                .map(move |e| json!({"level": k, "index": e.index, "overlapping": e.overlapping}))
        })
        .collect();
    let summaries = summarize_levels(spec, levels);
    let max_ratio = summaries
        .iter()
        .filter_map(|s| s.containment_ratio)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    json!({
        "eps": eps.to_decimal(),
        "epsilon0": spec.epsilon0().to_decimal(),
        "base_measure": levels.first().map(|l| l.measure().to_decimal()),
        "levels": summaries,
        "containment_constant": max_ratio,
        "merge_events": merges,
    })
}

/// Square `0/1` matrix with a leading index column.
pub fn matrix_csv(matrix: &[Vec<bool>]) -> String {
    let n = matrix.len();
    let mut out = String::from("k");
    for l in 0..n {
        out.push_str(&format!(",{l}"));
    }
    out.push('\n');
    for (k, row) in matrix.iter().enumerate() {
        out.push_str(&k.to_string());
        for &d in row {
            out.push_str(if d { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}
