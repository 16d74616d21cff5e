//! Ground-truth percolation pattern labels.
//!
//! A field is coarse-grained into renormalized sites per pattern, then tested
//! for a cluster of active sites connecting the first and last time rows.

mod cluster;
mod label;
mod renorm;
mod scheme;

pub use cluster::{spanning, UnionFind};
pub use label::{label_field, site_percolates, Labeler, MultiHotTarget, PhaseClass};
pub use renorm::{renormalize, RenormField};
pub use scheme::{
    builtin_scheme, format_scheme, parse_scheme_overrides, site_scheme, Offset, PatternKind, RenormScheme,
    DIAGONAL, NEAREST,
};
