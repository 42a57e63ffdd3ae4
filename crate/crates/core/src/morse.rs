//! Critical points of the difference function read off a slice diagram.
//!
//! Every self-crossing contributes two critical points, one on each side of the
//! diagonal.  Their critical value is minus the signed area enclosed by the
//! capping path, and their Morse index is `N + 1 - μ` where `μ` counts the
//! half-turns of the tangent line along the capping path.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagram::SliceDiagram;
use crate::error::{Error, Result};
use crate::geom::{turn_angle, Point};

/// Which half of the difference-function domain a critical point lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Location {
    #[serde(rename = "P+")]
    PPlus,
    #[serde(rename = "P-")]
    PMinus,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Location::PPlus => "P+",
            Location::PMinus => "P-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum SymbolicTag {
    #[serde(rename = "symbolic")]
    Symbolic,
}

/// A number, or an unknown that only exists symbolically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Datum<T> {
    Known(T),
    #[serde(with = "symbolic")]
    Symbolic,
}

mod symbolic {
    use super::SymbolicTag;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        SymbolicTag::Symbolic.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        SymbolicTag::deserialize(d).map(|_| ())
    }
}

impl<T: Copy> Datum<T> {
    pub fn known(&self) -> Option<T> {
        match self {
            Datum::Known(v) => Some(*v),
            Datum::Symbolic => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Datum::Symbolic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Crossing(usize),
    #[serde(with = "submanifold")]
    CriticalSubmanifold,
}

mod submanifold {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("critical-submanifold")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "critical-submanifold" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("unknown source {s:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointDatum {
    pub source: Source,
    pub branch: u8,
    pub location: Option<Location>,
    pub offset: Datum<i32>,
    pub value: Datum<f64>,
    pub pair_id: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub components: usize,
    pub h0: usize,
    pub h1: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseTable {
    pub rows: Vec<CriticalPointDatum>,
    pub topology: Topology,
    /// Descriptions of pairs whose critical values collide with zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_generic: Vec<String>,
    /// Offsets outside the expected range `0..=3`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MorseTable {
    pub fn is_generic(&self) -> bool {
        self.non_generic.is_empty()
    }

    pub fn has_symbolic(&self) -> bool {
        self.rows.iter().any(|r| r.value.is_symbolic())
    }

    /// `(location, offset, value)` of every row with known data, crossings only.
    pub fn known_rows(&self) -> Vec<(Location, i32, f64)> {
        self.rows
            .iter()
            .filter(|r| matches!(r.source, Source::Crossing(_)))
            .filter_map(|r| Some((r.location?, r.offset.known()?, r.value.known()?)))
            .collect()
    }
}

/// A capping path: closed 1-chain on the edges of the arrangement plus its vertex trail.
struct CappingPath {
    coeff: Vec<f64>,
    trail: Vec<Point>,
}

fn self_crossing(d: &SliceDiagram, crossing: usize) -> Result<&crate::diagram::Crossing> {
    let x = d
        .crossings()
        .get(crossing)
        .ok_or_else(|| Error::InvalidDiagram(format!("no crossing {crossing}")))?;
    Ok(x)
}

fn event_index(d: &SliceDiagram, crossing: usize, slot: usize) -> usize {
    let c = d.crossings()[crossing].strands[slot].component;
    d.arrangement().events[c]
        .iter()
        .position(|e| e.crossing == crossing && e.slot == slot)
        .expect("every strand has an event")
}

/// Forward arc from strand `from` to strand `to`, or, with `alternative`, the
/// complementary arc from `to` to `from` traversed backwards.
fn capping_path(d: &SliceDiagram, crossing: usize, branch: usize, alternative: bool) -> CappingPath {
    let arr = d.arrangement();
    let x = &d.crossings()[crossing];
    let comp = x.strands[branch].component;
    let edges = &arr.component_edges[comp];
    let m = edges.len();
    let (k_from, k_to) = if alternative {
        (event_index(d, crossing, branch), event_index(d, crossing, 1 - branch))
    } else {
        (event_index(d, crossing, 1 - branch), event_index(d, crossing, branch))
    };
    let sign = if alternative { -1.0 } else { 1.0 };
    let mut coeff = vec![0.0; arr.edges.len()];
    let mut trail: Vec<Point> = Vec::new();
    let mut k = k_from;
    loop {
        let e = edges[k];
        coeff[e] = sign;
        let pts = &arr.edges[e].points;
        if trail.is_empty() {
            trail.extend_from_slice(pts);
        } else {
            trail.extend_from_slice(&pts[1..]);
        }
        k = (k + 1) % m;
        if k == k_to {
            break;
        }
    }
    if alternative {
        trail.reverse();
    }
    CappingPath { coeff, trail }
}

fn chain_value(d: &SliceDiagram, path: &CappingPath) -> f64 {
    let w = d.arrangement().chain_windings(&path.coeff);
    -d.region_areas().iter().enumerate().map(|(f, a)| w[f + 1] * a).sum::<f64>()
}

fn chain_value_geometric(d: &SliceDiagram, path: &CappingPath) -> f64 {
    -d.arrangement().edges.iter().zip(&path.coeff).map(|(e, c)| c * e.area).sum::<f64>()
}

fn rotation(trail: &[Point]) -> f64 {
    let dirs: Vec<Point> = trail.windows(2).map(|w| w[1] - w[0]).collect();
    dirs.windows(2).map(|w| turn_angle(w[0], w[1])).sum()
}

fn offset_from_rotation(r: f64) -> i32 {
    1 - (r / PI).floor() as i32
}

/// Side of the diagonal for the critical point on `branch` of a crossing.
pub fn location(d: &SliceDiagram, crossing: usize, branch: usize) -> Result<Location> {
    let x = self_crossing(d, crossing)?;
    Ok(if x.over_strand == branch { Location::PMinus } else { Location::PPlus })
}

/// Critical value from the capping path; symbolic for crossings between components.
pub fn capping_value(d: &SliceDiagram, crossing: usize, branch: usize) -> Result<Datum<f64>> {
    let x = self_crossing(d, crossing)?;
    if !x.is_self_crossing() {
        return Ok(Datum::Symbolic);
    }
    Ok(Datum::Known(chain_value(d, &capping_path(d, crossing, branch, false))))
}

pub fn capping_index_offset(d: &SliceDiagram, crossing: usize, branch: usize) -> Result<Datum<i32>> {
    let x = self_crossing(d, crossing)?;
    if !x.is_self_crossing() {
        return Ok(Datum::Symbolic);
    }
    let path = capping_path(d, crossing, branch, false);
    Ok(Datum::Known(offset_from_rotation(rotation(&path.trail))))
}

/// Both capping arcs of a self-crossing, measured independently on the raw geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcComparison {
    pub values: [f64; 2],
    pub offsets: [i32; 2],
}

pub fn compare_arcs(d: &SliceDiagram, crossing: usize, branch: usize) -> Result<Option<ArcComparison>> {
    let x = self_crossing(d, crossing)?;
    if !x.is_self_crossing() {
        return Ok(None);
    }
    let paths = [capping_path(d, crossing, branch, false), capping_path(d, crossing, branch, true)];
    Ok(Some(ArcComparison {
        values: [chain_value_geometric(d, &paths[0]), chain_value_geometric(d, &paths[1])],
        offsets: [offset_from_rotation(rotation(&paths[0].trail)), offset_from_rotation(rotation(&paths[1].trail))],
    }))
}

pub fn morse_table(d: &SliceDiagram) -> Result<MorseTable> {
    let scale = d.region_areas().iter().fold(0.0_f64, |m, a| m.max(a.abs())).max(f64::MIN_POSITIVE);
    let mut rows = Vec::with_capacity(2 * d.crossings().len() + 1);
    let mut non_generic = Vec::new();
    let mut warnings = Vec::new();
    for (i, x) in d.crossings().iter().enumerate() {
        for branch in 0..2 {
            let value = capping_value(d, i, branch)?;
            let offset = capping_index_offset(d, i, branch)?;
            if let Datum::Known(k) = offset {
                if !(0..=3).contains(&k) {
                    warnings.push(format!("crossing {i} branch {branch}: offset {k} outside 0..=3"));
                }
            }
            if branch == 0 {
                if let Datum::Known(v) = value {
                    if v.abs() <= d.tolerance() * scale {
                        non_generic.push(format!("crossing {i} at ({}, {}) has critical value 0", x.point.x, x.point.y));
                    }
                }
            }
            rows.push(CriticalPointDatum {
                source: Source::Crossing(i),
                branch: branch as u8,
                location: Some(location(d, i, branch)?),
                offset,
                value,
                pair_id: Some(i),
            });
        }
    }
    if !d.is_empty() {
        rows.push(CriticalPointDatum {
            source: Source::CriticalSubmanifold,
            branch: 0,
            location: None,
            offset: Datum::Known(1),
            value: Datum::Known(0.0),
            pair_id: None,
        });
    }
    let n = d.component_count();
    Ok(MorseTable { rows, topology: Topology { components: n, h0: n, h1: n }, non_generic, warnings })
}
