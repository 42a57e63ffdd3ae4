//! Capacity bookkeeping for slice diagrams.
//!
//! The four capacities `c±` (lower, non-positive) and `C±` (upper,
//! non-negative) of a cohomology class are critical values of the difference
//! function.  The engine never computes them directly; it narrows each one down
//! with a fixed sequence of forcing rules and reports a contradiction when a
//! class is left with nothing but zeros.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagram::SliceDiagram;
use crate::error::Result;
use crate::morse::{morse_table, Datum, Location, MorseTable, Source};

pub const RULE_INDEX: &str = "cap-calc";
pub const RULE_PULLBACK: &str = "vanishing-capacities";
pub const RULE_RANK: &str = "rank-surjection";
pub const RULE_NONVANISHING: &str = "non-vanishing";
pub const RULE_SPLIT: &str = "split-capacities";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Capacity {
    #[serde(rename = "c+")]
    LowerPlus,
    #[serde(rename = "c-")]
    LowerMinus,
    #[serde(rename = "C+")]
    UpperPlus,
    #[serde(rename = "C-")]
    UpperMinus,
}

impl Capacity {
    pub const ALL: [Capacity; 4] = [Capacity::LowerPlus, Capacity::LowerMinus, Capacity::UpperPlus, Capacity::UpperMinus];

    pub fn is_lower(self) -> bool {
        matches!(self, Capacity::LowerPlus | Capacity::LowerMinus)
    }

    pub fn location(self) -> Location {
        match self {
            Capacity::LowerPlus | Capacity::UpperPlus => Location::PPlus,
            Capacity::LowerMinus | Capacity::UpperMinus => Location::PMinus,
        }
    }

    /// Index offset of the critical points that can realize this capacity on a class of `degree`.
    pub fn offset(self, degree: u8) -> i32 {
        degree as i32 + if self.is_lower() { 0 } else { 2 }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Capacity::LowerPlus => "c+",
            Capacity::LowerMinus => "c-",
            Capacity::UpperPlus => "C+",
            Capacity::UpperMinus => "C-",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyClass {
    pub degree: u8,
    pub support: Vec<usize>,
    pub diagonal: bool,
}

impl CohomologyClass {
    pub fn label(&self) -> String {
        if self.diagonal {
            "diagonal-H0".to_string()
        } else {
            let s: Vec<String> = self.support.iter().map(|c| c.to_string()).collect();
            format!("H{}[{}]", self.degree, s.join(","))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CapacityStatus {
    ForcedZero { chain: Vec<String> },
    ForcedValue { value: f64, chain: Vec<String> },
    Candidates { values: Vec<f64>, wildcard: bool },
    Unknown,
}

impl CapacityStatus {
    pub fn is_forced_zero(&self) -> bool {
        matches!(self, CapacityStatus::ForcedZero { .. })
    }

    /// The value when the status pins it down (zero included).
    pub fn forced(&self) -> Option<f64> {
        match self {
            CapacityStatus::ForcedZero { .. } => Some(0.0),
            CapacityStatus::ForcedValue { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn chain(&self) -> &[String] {
        match self {
            CapacityStatus::ForcedZero { chain } | CapacityStatus::ForcedValue { chain, .. } => chain,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    #[serde(flatten)]
    pub class: CohomologyClass,
    #[serde(rename = "c+")]
    pub lower_plus: CapacityStatus,
    #[serde(rename = "c-")]
    pub lower_minus: CapacityStatus,
    #[serde(rename = "C+")]
    pub upper_plus: CapacityStatus,
    #[serde(rename = "C-")]
    pub upper_minus: CapacityStatus,
}

impl ClassReport {
    fn new(class: CohomologyClass) -> Self {
        ClassReport {
            class,
            lower_plus: CapacityStatus::Unknown,
            lower_minus: CapacityStatus::Unknown,
            upper_plus: CapacityStatus::Unknown,
            upper_minus: CapacityStatus::Unknown,
        }
    }

    pub fn get(&self, cap: Capacity) -> &CapacityStatus {
        match cap {
            Capacity::LowerPlus => &self.lower_plus,
            Capacity::LowerMinus => &self.lower_minus,
            Capacity::UpperPlus => &self.upper_plus,
            Capacity::UpperMinus => &self.upper_minus,
        }
    }

    fn get_mut(&mut self, cap: Capacity) -> &mut CapacityStatus {
        match cap {
            Capacity::LowerPlus => &mut self.lower_plus,
            Capacity::LowerMinus => &mut self.lower_minus,
            Capacity::UpperPlus => &mut self.upper_plus,
            Capacity::UpperMinus => &mut self.upper_minus,
        }
    }

    fn all_zero(&self) -> bool {
        Capacity::ALL.iter().all(|&c| self.get(c).is_forced_zero())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub classes: Vec<ClassReport>,
    pub assume_negative_slice: bool,
}

impl CapacityReport {
    pub fn diagonal(&self) -> Option<&ClassReport> {
        self.classes.iter().find(|c| c.class.diagonal)
    }

    pub fn class(&self, degree: u8, support: &[usize]) -> Option<&ClassReport> {
        self.classes.iter().find(|c| c.class.degree == degree && c.class.support == support)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SliceVerdict {
    Impossible { class: String, chain: Vec<String> },
    NoObstruction,
    NonGeneric { reason: String },
}

impl SliceVerdict {
    pub fn is_impossible(&self) -> bool {
        matches!(self, SliceVerdict::Impossible { .. })
    }
}

/// Which forcing rules run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineOptions {
    /// Lower `c+` and upper `C-` vanish on the diagonal class.
    pub pullback: bool,
    /// Some capacity of every nonzero class is nonzero.
    pub nonvanishing: bool,
    /// Swap-symmetric counterpart of the rank-surjection rule, for `c-` on degree 1.
    pub mirrored_rank_rule: bool,
}

impl EngineOptions {
    pub fn assuming(assume_negative_slice: bool) -> Self {
        EngineOptions { pullback: assume_negative_slice, nonvanishing: assume_negative_slice, mirrored_rank_rule: false }
    }
}

/// Critical values that may realize `cap` on a class of `degree`, with a flag
/// for symbolic rows that could realize anything at the right location.
pub fn candidate_values(table: &MorseTable, degree: u8, cap: Capacity) -> (Vec<f64>, bool) {
    let mut values: Vec<f64> = Vec::new();
    let mut wildcard = false;
    for row in table.rows.iter().filter(|r| matches!(r.source, Source::Crossing(_))) {
        if row.location != Some(cap.location()) {
            continue;
        }
        match (row.offset, row.value) {
            (Datum::Known(k), Datum::Known(v)) => {
                let sign_ok = if cap.is_lower() { v < 0.0 } else { v > 0.0 };
                if k == cap.offset(degree) && sign_ok && !values.contains(&v) {
                    values.push(v);
                }
            }
            _ => wildcard = true,
        }
    }
    values.sort_by(f64::total_cmp);
    (values, wildcard)
}

fn classes(n: usize) -> Vec<CohomologyClass> {
    if n == 0 {
        return Vec::new();
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = vec![CohomologyClass { degree: 0, support: all.clone(), diagonal: true }];
    if n > 1 {
        out.extend((0..n).map(|c| CohomologyClass { degree: 0, support: vec![c], diagonal: false }));
    }
    out.extend((0..n).map(|c| CohomologyClass { degree: 1, support: vec![c], diagonal: false }));
    out
}

fn apply_index_vanishing(report: &mut ClassReport, table: &MorseTable) -> bool {
    let mut changed = false;
    for cap in Capacity::ALL {
        if !matches!(report.get(cap), CapacityStatus::Unknown) {
            continue;
        }
        let (values, wildcard) = candidate_values(table, report.class.degree, cap);
        *report.get_mut(cap) = if values.is_empty() && !wildcard {
            CapacityStatus::ForcedZero {
                chain: vec![format!("{RULE_INDEX}({},offset{},empty)", cap.location(), cap.offset(report.class.degree))],
            }
        } else {
            CapacityStatus::Candidates { values, wildcard }
        };
        changed = true;
    }
    changed
}

fn apply_pullback_vanishing(report: &mut ClassReport) -> bool {
    if !report.class.diagonal {
        return false;
    }
    let mut changed = false;
    for cap in [Capacity::LowerPlus, Capacity::UpperMinus] {
        if !report.get(cap).is_forced_zero() {
            *report.get_mut(cap) = CapacityStatus::ForcedZero { chain: vec![format!("{RULE_PULLBACK}(diagonal)")] };
            changed = true;
        }
    }
    changed
}

fn known_values(table: &MorseTable, offset: i32, positive: bool) -> Vec<f64> {
    table
        .rows
        .iter()
        .filter(|r| matches!(r.source, Source::Crossing(_)))
        .filter_map(|r| match (r.offset, r.value) {
            (Datum::Known(k), Datum::Known(v)) if k == offset && (v > 0.0) == positive && v != 0.0 => Some(v),
            _ => None,
        })
        .collect()
}

/// Connected slice, degree 0: a single positive offset-2 value lying strictly
/// below at least two positive offset-3 values leaves no room for a nonzero
/// `C+`, since the relative cohomology across the window would need rank two
/// while the slice supplies rank one.
fn apply_rank_surjection(report: &mut ClassReport, table: &MorseTable, mirrored: bool) -> bool {
    if table.topology.components != 1 || table.has_symbolic() {
        return false;
    }
    let h1 = table.topology.h1;
    if report.class.degree == 0 && !report.get(Capacity::UpperPlus).is_forced_zero() {
        let twos = known_values(table, 2, true);
        let threes = known_values(table, 3, true);
        if twos.len() == 1 && threes.len() > h1 && threes.iter().all(|&t| t > twos[0]) {
            *report.get_mut(Capacity::UpperPlus) = CapacityStatus::ForcedZero {
                chain: vec![format!(
                    "{RULE_RANK}(offset2={}<offset3,count={}>h1={h1})",
                    twos[0],
                    threes.len()
                )],
            };
            return true;
        }
    }
    if mirrored && report.class.degree == 1 && !report.get(Capacity::LowerMinus).is_forced_zero() {
        let ones = known_values(table, 1, false);
        let zeros = known_values(table, 0, false);
        if ones.len() == 1 && zeros.len() > h1 && zeros.iter().all(|&z| z < ones[0]) {
            *report.get_mut(Capacity::LowerMinus) = CapacityStatus::ForcedZero {
                chain: vec![format!("{RULE_RANK}-mirrored(offset1={}>offset0,count={}>h1={h1})", ones[0], zeros.len())],
            };
            return true;
        }
    }
    false
}

enum NonVanishing {
    Unchanged,
    Changed,
    Contradiction(Vec<String>),
}

fn apply_nonvanishing(report: &mut ClassReport) -> NonVanishing {
    let zero: Vec<Capacity> = Capacity::ALL.iter().copied().filter(|&c| report.get(c).is_forced_zero()).collect();
    let mut chain: Vec<String> = Vec::new();
    for &c in &zero {
        for step in report.get(c).chain() {
            if !chain.contains(step) {
                chain.push(step.clone());
            }
        }
    }
    if zero.len() == 4 {
        chain.push(format!("{RULE_NONVANISHING}(all four capacities vanish)"));
        return NonVanishing::Contradiction(chain);
    }
    if zero.len() != 3 {
        return NonVanishing::Unchanged;
    }
    let last = Capacity::ALL.into_iter().find(|c| !zero.contains(c)).expect("one capacity left");
    match report.get(last).clone() {
        CapacityStatus::Candidates { values, wildcard: false } if values.is_empty() => {
            chain.push(format!("{RULE_NONVANISHING}({last} has no candidate)"));
            NonVanishing::Contradiction(chain)
        }
        CapacityStatus::Candidates { values, wildcard: false } if values.len() == 1 => {
            chain.push(format!("{RULE_NONVANISHING}({last})"));
            *report.get_mut(last) = CapacityStatus::ForcedValue { value: values[0], chain };
            NonVanishing::Changed
        }
        _ => NonVanishing::Unchanged,
    }
}

fn run_pipeline(report: &mut ClassReport, table: &MorseTable, options: &EngineOptions) -> Option<Vec<String>> {
    loop {
        let mut changed = apply_index_vanishing(report, table);
        if options.pullback {
            changed |= apply_pullback_vanishing(report);
        }
        changed |= apply_rank_surjection(report, table, options.mirrored_rank_rule);
        if options.nonvanishing {
            match apply_nonvanishing(report) {
                NonVanishing::Contradiction(chain) => return Some(chain),
                NonVanishing::Changed => changed = true,
                NonVanishing::Unchanged => {}
            }
        } else if report.all_zero() {
            // Without the non-vanishing axiom an all-zero class is only reported.
        }
        if !changed {
            return None;
        }
    }
}

pub fn analyze_with(d: &SliceDiagram, options: EngineOptions) -> Result<(CapacityReport, SliceVerdict)> {
    let table = morse_table(d)?;
    Ok(analyze_table(&table, options))
}

pub fn analyze_table(table: &MorseTable, options: EngineOptions) -> (CapacityReport, SliceVerdict) {
    let mut reports: Vec<ClassReport> = classes(table.topology.components).into_iter().map(ClassReport::new).collect();
    let mut verdict = SliceVerdict::NoObstruction;
    for r in &mut reports {
        if let Some(chain) = run_pipeline(r, table, &options) {
            if !verdict.is_impossible() {
                verdict = SliceVerdict::Impossible { class: r.class.label(), chain };
            }
        }
    }
    if !table.is_generic() {
        verdict = SliceVerdict::NonGeneric { reason: table.non_generic.join("; ") };
    }
    let assume = options.pullback && options.nonvanishing;
    (CapacityReport { classes: reports, assume_negative_slice: assume }, verdict)
}

/// Capacity report and slice-existence verdict.
pub fn analyze(d: &SliceDiagram, assume_negative_slice: bool) -> Result<(CapacityReport, SliceVerdict)> {
    analyze_with(d, EngineOptions::assuming(assume_negative_slice))
}

fn combine_lower(a: &CapacityStatus, b: &CapacityStatus) -> CapacityStatus {
    let tag = format!("{RULE_SPLIT}(max)");
    let with = |chain: &[String]| {
        let mut c = chain.to_vec();
        c.push(tag.clone());
        c
    };
    match (a, b) {
        (CapacityStatus::ForcedZero { chain }, _) | (_, CapacityStatus::ForcedZero { chain }) => {
            CapacityStatus::ForcedZero { chain: with(chain) }
        }
        (CapacityStatus::ForcedValue { value: x, chain: ca }, CapacityStatus::ForcedValue { value: y, chain: cb }) => {
            let mut chain = ca.clone();
            chain.extend(cb.iter().cloned());
            chain.push(tag);
            CapacityStatus::ForcedValue { value: x.max(*y), chain }
        }
        _ => {
            let options = |s: &CapacityStatus| -> (Vec<f64>, bool) {
                match s {
                    CapacityStatus::ForcedValue { value, .. } => (vec![*value], false),
                    CapacityStatus::Candidates { values, wildcard } => (values.clone(), *wildcard),
                    _ => (Vec::new(), true),
                }
            };
            let (va, wa) = options(a);
            let (vb, wb) = options(b);
            let mut set = BTreeSet::new();
            for x in &va {
                for y in &vb {
                    set.insert(x.max(*y).to_bits());
                }
            }
            let mut values: Vec<f64> = set.into_iter().map(f64::from_bits).collect();
            values.sort_by(f64::total_cmp);
            CapacityStatus::Candidates { values, wildcard: wa || wb }
        }
    }
}

/// Capacities of the diagonal class of a connect sum whose slice would be the
/// disjoint union of `d1` and `d2`.
///
/// Lower capacities are maxima of the summands' (each summand analyzed with the
/// non-vanishing axiom only); upper capacities come from the index rule on the
/// combined table.
pub fn connect_sum_analysis(d1: &SliceDiagram, d2: &SliceDiagram) -> Result<(CapacityReport, SliceVerdict)> {
    if d1.is_empty() {
        return analyze(d2, true);
    }
    if d2.is_empty() {
        return analyze(d1, true);
    }
    let summand = EngineOptions { pullback: false, nonvanishing: true, mirrored_rank_rule: false };
    let (t1, t2) = (morse_table(d1)?, morse_table(d2)?);
    let (r1, v1) = analyze_table(&t1, summand);
    let (r2, v2) = analyze_table(&t2, summand);
    for v in [&v1, &v2] {
        if let SliceVerdict::NonGeneric { .. } = v {
            return Ok((CapacityReport { classes: Vec::new(), assume_negative_slice: true }, v.clone()));
        }
    }
    let (g1, g2) = (r1.diagonal().expect("nonempty"), r2.diagonal().expect("nonempty"));
    let combined = crate::diagram::sum(d1, d2)?;
    let table = morse_table(&combined)?;
    let mut report = ClassReport::new(CohomologyClass {
        degree: 0,
        support: (0..combined.component_count()).collect(),
        diagonal: true,
    });
    for cap in [Capacity::LowerPlus, Capacity::LowerMinus] {
        *report.get_mut(cap) = combine_lower(g1.get(cap), g2.get(cap));
    }
    let options = EngineOptions::assuming(true);
    let verdict = match run_pipeline(&mut report, &table, &options) {
        Some(chain) => SliceVerdict::Impossible { class: report.class.label(), chain },
        None if !table.is_generic() => SliceVerdict::NonGeneric { reason: table.non_generic.join("; ") },
        None => SliceVerdict::NoObstruction,
    };
    Ok((CapacityReport { classes: vec![report], assume_negative_slice: true }, verdict))
}
