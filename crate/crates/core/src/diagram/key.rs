//! Canonical combinatorial key of a diagram up to area-preserving isotopy.
//!
//! Each connected piece is encoded by its signed Gauss code, minimized over
//! component order, starting points and orientations.  Critical values at the
//! crossings decorate the code so that lobes of different area are told apart.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morse::{morse_table, Datum, Location, Source};

use super::SliceDiagram;

/// Above this many relabelings a piece is canonicalized greedily.
const EXHAUSTIVE_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub label: u16,
    pub over: bool,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceKey {
    /// Number of other pieces this one is nested inside.
    pub depth: usize,
    /// Gauss word per component, in canonical component order.
    pub word: Vec<Vec<Letter>>,
    /// Per canonical relabeling, the critical value on the P+ side of each crossing label.
    pub decorations: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceKey {
    pub components: usize,
    pub pieces: Vec<PieceKey>,
    pub region_areas: Vec<f64>,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

impl EquivalenceKey {
    /// Equal words, with decorations and region areas equal to `rel_tol` of the
    /// largest region.
    pub fn matches(&self, other: &EquivalenceKey, rel_tol: f64) -> bool {
        if self.components != other.components
            || self.pieces.len() != other.pieces.len()
            || self.region_areas.len() != other.region_areas.len()
        {
            return false;
        }
        let scale = self.region_areas.iter().chain(&other.region_areas).fold(0.0_f64, |m, a| m.max(a.abs()));
        let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
        if !self.region_areas.iter().zip(&other.region_areas).all(|(a, b)| close(*a, *b, tol)) {
            return false;
        }
        self.pieces.iter().zip(&other.pieces).all(|(p, q)| {
            p.depth == q.depth
                && p.word == q.word
                && p.decorations.iter().any(|dp| {
                    q.decorations
                        .iter()
                        .any(|dq| dp.len() == dq.len() && dp.iter().zip(dq).all(|(a, b)| close(*a, *b, tol)))
                })
        })
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// One passage through a crossing, before relabeling.
#[derive(Clone, Copy)]
struct Passage {
    crossing: usize,
    over: bool,
    sign: i8,
    /// Other component of an inter-component crossing.
    partner: Option<usize>,
}

struct Variant {
    word: Vec<Vec<Letter>>,
    order: Vec<usize>,
}

fn encode(seqs: &[Vec<Passage>], order: &[usize], reversed: &[bool], starts: &[usize]) -> (Vec<Vec<Letter>>, Vec<usize>) {
    let mut labels: Vec<usize> = Vec::new();
    let word = order
        .iter()
        .map(|&c| {
            let seq = &seqs[c];
            let m = seq.len();
            (0..m)
                .map(|i| {
                    let k = if reversed[c] { (starts[c] + m - i) % m } else { (starts[c] + i) % m };
                    let p = seq[k];
                    let label = labels.iter().position(|&x| x == p.crossing).unwrap_or_else(|| {
                        labels.push(p.crossing);
                        labels.len() - 1
                    });
                    let flip = match p.partner {
                        Some(o) => reversed[c] != reversed[o],
                        None => false,
                    };
                    Letter { label: label as u16, over: p.over, sign: if flip { -p.sign } else { p.sign } }
                })
                .collect()
        })
        .collect();
    (word, labels)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Minimal words of a piece together with the crossing order of each tied relabeling.
fn canonical(seqs: &[Vec<Passage>], comps: &[usize]) -> Vec<Variant> {
    let choices: usize = comps.iter().map(|&c| 2 * seqs[c].len().max(1)).product();
    let perms = if choices.saturating_mul((1..=comps.len()).product()) <= EXHAUSTIVE_LIMIT {
        permutations(comps)
    } else {
        Vec::new()
    };
    let mut best: Vec<Variant> = Vec::new();
    let mut consider = |word: Vec<Vec<Letter>>, order: Vec<usize>| match best.first().map(|b| word.cmp(&b.word)) {
        None | Some(Ordering::Less) => best = vec![Variant { word, order }],
        Some(Ordering::Equal) => best.push(Variant { word, order }),
        Some(Ordering::Greater) => {}
    };
    let n = seqs.len();
    if !perms.is_empty() {
        for perm in &perms {
            let mut reversed = vec![false; n];
            let mut starts = vec![0usize; n];
            let dims: Vec<usize> = perm.iter().map(|&c| 2 * seqs[c].len().max(1)).collect();
            let mut idx = vec![0usize; perm.len()];
            loop {
                for (j, &c) in perm.iter().enumerate() {
                    reversed[c] = idx[j] % 2 == 1;
                    starts[c] = idx[j] / 2;
                }
                let (w, labels) = encode(seqs, perm, &reversed, &starts);
                consider(w, labels);
                let mut j = 0;
                while j < idx.len() {
                    idx[j] += 1;
                    if idx[j] < dims[j] {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == idx.len() {
                    break;
                }
            }
        }
    } else {
        // Greedy: canonicalize each component alone, then order components by word.
        let mut reversed = vec![false; n];
        let mut starts = vec![0usize; n];
        let mut singles: Vec<(Vec<Letter>, usize)> = Vec::new();
        for &c in comps {
            let mut local: Option<(Vec<Letter>, bool, usize)> = None;
            for r in [false, true] {
                for s in 0..seqs[c].len().max(1) {
                    reversed[c] = r;
                    starts[c] = s;
                    let (w, _) = encode(seqs, &[c], &reversed, &starts);
                    let w = w.into_iter().next().unwrap_or_default();
                    if local.as_ref().is_none_or(|(b, _, _)| w < *b) {
                        local = Some((w, r, s));
                    }
                }
            }
            let (w, r, s) = local.expect("at least one choice");
            reversed[c] = r;
            starts[c] = s;
            singles.push((w, c));
        }
        singles.sort();
        let order: Vec<usize> = singles.into_iter().map(|(_, c)| c).collect();
        let (w, labels) = encode(seqs, &order, &reversed, &starts);
        consider(w, labels);
    }
    best
}

pub fn equivalence_key(d: &SliceDiagram) -> Result<EquivalenceKey> {
    let table = morse_table(d)?;
    if !table.is_generic() {
        return Err(Error::NonGeneric(table.non_generic.join("; ")));
    }
    let mut pplus = vec![0.0; d.crossings().len()];
    for row in &table.rows {
        if let (Source::Crossing(i), Some(Location::PPlus), Datum::Known(v)) = (row.source, row.location, row.value) {
            pplus[i] = v;
        }
    }
    let arr = d.arrangement();
    let seqs: Vec<Vec<Passage>> = arr
        .events
        .iter()
        .map(|ev| {
            ev.iter()
                .map(|e| {
                    let x = &d.crossings()[e.crossing];
                    let other = x.strands[1 - e.slot].component;
                    Passage {
                        crossing: e.crossing,
                        over: x.over_strand == e.slot,
                        sign: x.sign,
                        partner: (!x.is_self_crossing()).then_some(other),
                    }
                })
                .collect()
        })
        .collect();
    let depth_of = |mut p: usize| {
        let mut depth = 0;
        while arr.piece_container[p] != 0 {
            p = arr.faces[arr.piece_container[p] - 1].piece;
            depth += 1;
        }
        depth
    };
    let mut pieces: Vec<PieceKey> = (0..arr.piece_count)
        .map(|p| {
            let comps: Vec<usize> = (0..d.component_count()).filter(|&c| arr.piece_of_component[c] == p).collect();
            let variants = canonical(&seqs, &comps);
            let mut decorations: Vec<Vec<f64>> =
                variants.iter().map(|v| v.order.iter().map(|&x| pplus[x]).collect()).collect();
            decorations.sort_by(|a, b| lex(a, b));
            decorations.dedup();
            PieceKey { depth: depth_of(p), word: variants[0].word.clone(), decorations }
        })
        .collect();
    pieces.sort_by(|a, b| {
        a.depth
            .cmp(&b.depth)
            .then_with(|| a.word.cmp(&b.word))
            .then_with(|| lex(&a.decorations[0], &b.decorations[0]))
    });
    let mut region_areas = d.region_areas().to_vec();
    region_areas.sort_by(f64::total_cmp);
    Ok(EquivalenceKey { components: d.component_count(), pieces, region_areas })
}

/// Key-level equivalence; `false` means "not equivalent by key".
pub fn equivalent(d1: &SliceDiagram, d2: &SliceDiagram) -> Result<bool> {
    let tol = d1.tolerance().max(d2.tolerance()).max(1e-6);
    Ok(equivalence_key(d1)?.matches(&equivalence_key(d2)?, tol))
}
