//! Inputs shared by the benchmarks.

use slicelab_core::{parse_catalog, realize_catalog, SliceDiagram};

/// Catalog expressions covering every shape kind.
pub const CATALOG: [&str; 7] = [
    "8+(1)",
    "8-(2)",
    "C(-,+,-;3,1,2)",
    "C(+,-,+;1,2,2)",
    "8+(1)+8+(2)+8-(1)",
    "nest(8-(1),8+(10))",
    "merge(1,0.5,6)",
];

pub fn realized(text: &str) -> SliceDiagram {
    realize_catalog(&parse_catalog(text).expect("benchmark inputs parse")).expect("benchmark inputs realize")
}
