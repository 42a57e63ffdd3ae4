//! Level sweeps with transition detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::slice::{SliceResult, Slicer};

/// Transition brackets are refined to this fraction of the swept range.
pub const BRACKET_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: f64,
    pub components: usize,
    pub crossings: usize,
    pub classification: String,
    pub shape: String,
    pub region_areas: Vec<f64>,
}

impl LevelSummary {
    pub fn of(slice: &SliceResult) -> Self {
        let mut region_areas = slice.diagram.region_areas().to_vec();
        region_areas.sort_by(f64::total_cmp);
        LevelSummary {
            level: slice.level,
            components: slice.diagram.component_count(),
            crossings: slice.diagram.crossings().len(),
            classification: slice.classification.to_string(),
            shape: slice.classification.shape(),
            region_areas,
        }
    }

    fn descriptor(&self) -> (usize, usize, &str) {
        (self.components, self.crossings, &self.shape)
    }

    fn changes(&self, other: &LevelSummary) -> Vec<String> {
        let mut out = Vec::new();
        if self.components != other.components {
            out.push("components".to_string());
        }
        if self.crossings != other.crossings {
            out.push("crossings".to_string());
        }
        if self.shape != other.shape {
            out.push("key".to_string());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionEvent {
    /// Last level seen with the old shape.
    pub below: f64,
    /// First level seen with the new shape.
    pub above: f64,
    pub from: String,
    pub to: String,
    pub changes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedLevel {
    pub level: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub levels: Vec<f64>,
    pub summaries: Vec<LevelSummary>,
    pub events: Vec<TransitionEvent>,
    pub skipped: Vec<SkippedLevel>,
}

impl SweepResult {
    /// Summaries whose shape is a single positive figure-eight, by level.
    pub fn eight_plus_areas(&self) -> Vec<(f64, f64)> {
        self.summaries
            .iter()
            .filter(|s| s.shape == "8+")
            .map(|s| (s.level, s.region_areas.iter().sum::<f64>() / s.region_areas.len().max(1) as f64))
            .collect()
    }
}

/// One finished level of a running sweep.
#[derive(Clone, Copy, Debug)]
pub enum Progress<'a> {
    Level(&'a LevelSummary),
    Skipped(&'a SkippedLevel),
}

/// Evenly spaced levels from `lo` to `hi` inclusive.
pub fn sweep_levels(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo < hi && hi < 0.0) {
        return Err(Error::InvalidFamily(format!("sweep needs from < to < 0, got {lo} and {hi}")));
    }
    if steps < 2 {
        return Err(Error::InvalidFamily(format!("sweep needs at least 2 steps, got {steps}")));
    }
    Ok((0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect())
}

impl Slicer {
    pub fn summary(&self, level: f64) -> Result<LevelSummary> {
        Ok(LevelSummary::of(&self.extract(level)?))
    }

    /// A generic level near `level` inside `(lo, hi)`.
    fn generic_summary(&self, level: f64, lo: f64, hi: f64) -> Option<LevelSummary> {
        let width = hi - lo;
        for nudge in [0.0, 0.1, -0.1, 0.25, -0.25] {
            if let Ok(s) = self.summary(level + nudge * width) {
                return Some(s);
            }
        }
        None
    }

    fn refine(&self, mut below: LevelSummary, mut above: LevelSummary, width: f64) -> TransitionEvent {
        while above.level - below.level > width {
            let mid = 0.5 * (below.level + above.level);
            let Some(m) = self.generic_summary(mid, below.level, above.level) else { break };
            if m.level <= below.level || m.level >= above.level {
                break;
            }
            if m.descriptor() == below.descriptor() {
                below = m;
            } else {
                above = m;
            }
        }
        TransitionEvent {
            below: below.level,
            above: above.level,
            from: below.classification.clone(),
            to: above.classification.clone(),
            changes: below.changes(&above),
        }
    }

    pub fn sweep(&self, lo: f64, hi: f64, steps: usize) -> Result<SweepResult> {
        self.sweep_observed(lo, hi, steps, |_| {})
    }

    /// Like [`Slicer::sweep`], reporting each grid level as soon as it is done.
    ///
    /// Levels are sliced in parallel, so reports arrive in no particular order.
    pub fn sweep_observed(
        &self,
        lo: f64,
        hi: f64,
        steps: usize,
        observe: impl Fn(Progress<'_>) + Sync,
    ) -> Result<SweepResult> {
        let levels = sweep_levels(lo, hi, steps)?;
        let results: Vec<std::result::Result<LevelSummary, SkippedLevel>> = levels
            .par_iter()
            .map(|&a| match self.summary(a) {
                Ok(s) => {
                    observe(Progress::Level(&s));
                    Ok(Ok(s))
                }
                Err(e) if e.is_non_generic() || matches!(e, Error::Numeric(_)) => {
                    let skip = SkippedLevel { level: a, reason: e.to_string() };
                    observe(Progress::Skipped(&skip));
                    Ok(Err(skip))
                }
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let mut summaries = Vec::new();
        let mut skipped = Vec::new();
        for r in results {
            match r {
                Ok(s) => summaries.push(s),
                Err(s) => skipped.push(s),
            }
        }
        let width = BRACKET_FRACTION * (hi - lo);
        let events = summaries
            .windows(2)
            .filter(|w| w[0].descriptor() != w[1].descriptor())
            .collect::<Vec<_>>()
            .par_iter()
            .map(|w| self.refine(w[0].clone(), w[1].clone(), width))
            .collect();
        Ok(SweepResult { levels, summaries, events, skipped })
    }
}
