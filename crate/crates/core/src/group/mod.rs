//! Elements of the AF full group as level-`n` permutation families, clopen
//! sets of paths, and Young subgroups such as pointwise stabilizers.

mod clopen;
mod element;
mod young;

pub use clopen::ClopenSet;
pub use element::{ElementAction, GroupElement};
pub use young::{
    factorial, generated_subgroup_order, YoungSubgroupDescriptor, DEFAULT_CLOSURE_CAP,
};
