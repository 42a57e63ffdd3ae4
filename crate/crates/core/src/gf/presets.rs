//! Families shipped with the repository, with their documented levels.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::GeneratingFamily;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub family: GeneratingFamily,
    /// Level at which the slice shows the advertised shape.
    pub level: f64,
    pub expected: String,
    /// Range in which the preset's transitions happen.
    pub sweep: [f64; 2],
    /// Increasing generic levels; consecutive pairs are cobordism witnesses.
    pub witness_levels: Vec<f64>,
}

const SOURCES: [&str; 4] = [
    include_str!("../../presets/p-eight.json"),
    include_str!("../../presets/p-sum.json"),
    include_str!("../../presets/p-cat.json"),
    include_str!("../../presets/p-merge.json"),
];

pub fn presets() -> &'static [Preset] {
    static STORE: OnceLock<Vec<Preset>> = OnceLock::new();
    STORE.get_or_init(|| {
        SOURCES
            .iter()
            .map(|s| {
                let p: Preset = serde_json::from_str(s).expect("shipped presets parse");
                p.family.validate().expect("shipped presets are valid");
                p
            })
            .collect()
    })
}

pub fn preset(name: &str) -> Option<&'static Preset> {
    presets().iter().find(|p| p.name == name)
}
