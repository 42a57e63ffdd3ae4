//! Numerical slicing of graphs of `dF` for bump-function families `F`.

pub mod classify;
pub mod contour;
pub mod family;
pub mod grid;
pub mod oracle;
pub mod presets;
pub mod slice;
pub mod sweep;

pub use classify::{classify, Classification};
pub use family::{bump_jet, partials, BumpTerm, GeneratingFamily};
pub use grid::Grid;
pub use oracle::{hessian_oracle, OraclePoint, OracleResult};
pub use presets::{preset, presets, Preset};
pub use slice::{extract_slice, witness_relation, SliceResult, Slicer};
pub use sweep::{LevelSummary, Progress, SkippedLevel, SweepResult, TransitionEvent};
