//! Planar sets, Hausdorff metrics and approximating domain sequences.

mod domain;
mod families;
mod hausdorff;
mod point;
mod sets;
mod surgery;

pub use domain::{ComplementSet, DomainKind, DomainSpec};
pub use families::{make_sequence, DomainSequence, Family};
pub use hausdorff::{directed_distance, hausdorff_compact, hausdorff_open, hausdorff_sets, Sampling};
pub use point::{BoxRegion, Point};
pub use sets::{
    point_in_polygon, polygon_area, polygon_perimeter, segment_distance, CompactSet, Piece,
    SampledSet,
};
pub use surgery::{complement_components, simply_connectify};
