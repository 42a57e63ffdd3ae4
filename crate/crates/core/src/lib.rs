//! Slice diagrams of planar Lagrangians: construction, Morse data, capacity
//! obstructions, cobordism-order checks and numerical slicing of generating
//! families.

pub mod catalog;
pub mod diagram;
pub mod error;
pub mod geom;
pub mod gf;
pub mod morse;
pub mod capacity;
pub mod order;


pub use capacity::{analyze, connect_sum_analysis, Capacity, CapacityReport, CapacityStatus, SliceVerdict};
pub use catalog::{parse_catalog, realize_catalog, CatalogSpec, Sign};
pub use diagram::{equivalence_key, equivalent, sum, validity_report, Crossing, EquivalenceKey, SliceDiagram};
pub use error::{Error, Result};
pub use geom::{signed_area, PlanarPolyline, Point};
pub use morse::{morse_table, Location, MorseTable};
pub use order::{
    antisymmetry_check, check_relation, strict_chain_bound, sum_compatibility, Antisymmetry, CobordismQuery, RelationVerdict,
};

/// Version string stamped into every serialized response.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
