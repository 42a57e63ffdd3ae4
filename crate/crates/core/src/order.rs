//! Obstructions to Lagrangian cobordisms between slices.
//!
//! A cobordism from a bottom slice to a top slice forces the lower capacities
//! of the diagonal class to satisfy `c+(bottom) <= c+(top)` and
//! `c-(bottom) >= c-(top)`, with upper capacities ordered the same way as
//! their lower partners, strictly whenever either side is nonzero.

use serde::{Deserialize, Serialize};

use crate::capacity::{analyze, Capacity, CapacityReport, ClassReport, SliceVerdict};
use crate::diagram::{equivalent, sum, SliceDiagram};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Bottom,
    Top,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CobordismQuery {
    pub bottom: SliceDiagram,
    pub top: SliceDiagram,
    /// Ask for a strict relation even when the ends are equivalent.
    #[serde(default)]
    pub strict: bool,
    /// Also compare degree-1 classes of connected ends.
    #[serde(default)]
    pub compare_degree_one: bool,
}

impl CobordismQuery {
    pub fn new(bottom: SliceDiagram, top: SliceDiagram, strict: bool) -> Self {
        CobordismQuery { bottom, top, strict, compare_degree_one: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RelationVerdict {
    Obstructed { capacity: Capacity, class: String, bottom: f64, top: f64, strict: bool },
    NoObstructionFound,
    ReflexiveEquivalent,
    /// One end cannot be a slice at all.
    Unrealizable { end: End, chain: Vec<String> },
    Witnessed { reference: String },
}

impl RelationVerdict {
    pub fn is_obstructed(&self) -> bool {
        matches!(self, RelationVerdict::Obstructed { .. })
    }
}

fn forced_pair(bottom: &ClassReport, top: &ClassReport, cap: Capacity) -> Option<(f64, f64)> {
    Some((bottom.get(cap).forced()?, top.get(cap).forced()?))
}

/// First monotonicity violation between two classes.
fn compare(bottom: &ClassReport, top: &ClassReport, label: &str) -> Option<RelationVerdict> {
    for cap in Capacity::ALL {
        let Some((b, t)) = forced_pair(bottom, top, cap) else { continue };
        let strict = b != 0.0 || t != 0.0;
        // c+ and C+ grow from bottom to top; c- and C- shrink.
        let increasing = matches!(cap, Capacity::LowerPlus | Capacity::UpperPlus);
        let (lo, hi) = if increasing { (b, t) } else { (t, b) };
        let ok = if strict { lo < hi } else { lo <= hi };
        if !ok {
            return Some(RelationVerdict::Obstructed { capacity: cap, class: label.to_string(), bottom: b, top: t, strict });
        }
    }
    None
}

fn slice_report(d: &SliceDiagram, end: End) -> Result<std::result::Result<CapacityReport, RelationVerdict>> {
    let (report, verdict) = analyze(d, true)?;
    Ok(match verdict {
        SliceVerdict::NonGeneric { reason } => return Err(Error::NonGeneric(reason)),
        SliceVerdict::Impossible { chain, .. } => Err(RelationVerdict::Unrealizable { end, chain }),
        SliceVerdict::NoObstruction => Ok(report),
    })
}

/// Decides whether capacity monotonicity rules out a cobordism `bottom ⊴ top`
/// (or `bottom ◁ top` for strict or inequivalent ends).
pub fn check_relation(q: &CobordismQuery) -> Result<RelationVerdict> {
    if !q.strict && equivalent(&q.bottom, &q.top)? {
        return Ok(RelationVerdict::ReflexiveEquivalent);
    }
    if q.bottom.is_empty() {
        return Ok(RelationVerdict::NoObstructionFound);
    }
    let bottom = match slice_report(&q.bottom, End::Bottom)? {
        Ok(r) => r,
        Err(v) => return Ok(v),
    };
    if q.top.is_empty() {
        // The empty slice carries no classes to compare against.
        return Ok(RelationVerdict::NoObstructionFound);
    }
    let top = match slice_report(&q.top, End::Top)? {
        Ok(r) => r,
        Err(v) => return Ok(v),
    };
    let (b, t) = (bottom.diagonal().expect("nonempty"), top.diagonal().expect("nonempty"));
    if let Some(v) = compare(b, t, "diagonal-H0") {
        return Ok(v);
    }
    if q.compare_degree_one && q.bottom.component_count() == 1 && q.top.component_count() == 1 {
        let (b1, t1) = (bottom.class(1, &[0]).expect("degree 1"), top.class(1, &[0]).expect("degree 1"));
        if let Some(v) = compare(b1, t1, "H1") {
            return Ok(v);
        }
    }
    Ok(RelationVerdict::NoObstructionFound)
}

/// Upper bound on the length of a strict chain of cobordisms starting at `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainBound {
    pub bound: usize,
    /// The bound is only an estimate: some capacity was not pinned down.
    pub upper_estimate: bool,
}

/// A strict chain of slices all equivalent to `d` passes each negative
/// critical value at most once, so its length is at most one more than the
/// number of distinct negative values.
pub fn strict_chain_bound(d: &SliceDiagram) -> Result<ChainBound> {
    let table = crate::morse::morse_table(d)?;
    let mut values: Vec<f64> = Vec::new();
    for (_, _, v) in table.known_rows() {
        if v < 0.0 && !values.iter().any(|w| (w - v).abs() <= d.tolerance() * v.abs().max(1.0)) {
            values.push(v);
        }
    }
    Ok(ChainBound { bound: values.len() + 1, upper_estimate: table.has_symbolic() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Antisymmetry {
    /// The ends are equivalent; nothing to decide.
    NotApplicable,
    /// Relations in both directions would contradict capacity monotonicity.
    Excluded { reason: String },
    NotExcluded,
}

/// Whether `d1 ⊴ d2 ⊴ d1` is ruled out for two inequivalent connected slices.
pub fn antisymmetry_check(d1: &SliceDiagram, d2: &SliceDiagram) -> Result<Antisymmetry> {
    if equivalent(d1, d2)? {
        return Ok(Antisymmetry::NotApplicable);
    }
    for (name, q) in [
        ("forward", CobordismQuery::new(d1.clone(), d2.clone(), true)),
        ("backward", CobordismQuery::new(d2.clone(), d1.clone(), true)),
    ] {
        match check_relation(&q)? {
            RelationVerdict::Obstructed { capacity, bottom, top, .. } => {
                return Ok(Antisymmetry::Excluded {
                    reason: format!("{name} relation obstructed by {capacity}: {bottom} vs {top}"),
                })
            }
            RelationVerdict::Unrealizable { end, .. } => {
                return Ok(Antisymmetry::Excluded { reason: format!("{name} {end:?} end is not a slice") })
            }
            _ => {}
        }
    }
    Ok(Antisymmetry::NotExcluded)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumCompatibility {
    /// Both input relations survive the capacity check.
    pub applicable: bool,
    pub summed: Option<RelationVerdict>,
    /// False when the summed relation is obstructed although neither part is.
    pub consistent: bool,
}

/// Summing two unobstructed relations must give an unobstructed relation.
pub fn sum_compatibility(q1: &CobordismQuery, q2: &CobordismQuery) -> Result<SumCompatibility> {
    let open = |v: &RelationVerdict| {
        matches!(v, RelationVerdict::NoObstructionFound | RelationVerdict::ReflexiveEquivalent | RelationVerdict::Witnessed { .. })
    };
    if !open(&check_relation(q1)?) || !open(&check_relation(q2)?) {
        return Ok(SumCompatibility { applicable: false, summed: None, consistent: true });
    }
    let summed = CobordismQuery {
        bottom: sum(&q1.bottom, &q2.bottom)?,
        top: sum(&q1.top, &q2.top)?,
        strict: q1.strict || q2.strict,
        compare_degree_one: false,
    };
    let verdict = check_relation(&summed)?;
    let consistent = !verdict.is_obstructed();
    Ok(SumCompatibility { applicable: true, summed: Some(verdict), consistent })
}
