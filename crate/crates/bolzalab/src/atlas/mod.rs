//! Exact hyperbolic geometry of the Bolza surface: the Möbius deck group,
//! the regular-octagon fundamental domain, and cyclic words representing
//! free homotopy classes.

mod mobius;
mod octagon;
mod words;

pub use mobius::{geodesic_point, hyperbolic_distance, DiskIsometry};
pub use octagon::{build_bolza_atlas, FundamentalOctagon, SurfacePoint, STAR_RADIUS};
pub use words::{
    dehn_reduce_word,
    canonical_representative, enumerate_classes, enumerate_classes_with_lengths,
    min_translation_length_by_word_length, translation_length, word_to_isometry, GroupWord,
};
