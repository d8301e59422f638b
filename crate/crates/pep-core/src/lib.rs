//! Partially embedded planarity testing.

pub mod cctree;
pub mod cyclic;
pub mod error;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod pctree;
pub mod pep;
pub mod prep;
mod tree;
pub use tree::{Color, Status};

pub use error::{Error, Result};

/// The guide, with its examples run as doc tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/cyclic-orders.md")]
    pub mod cyclic_orders {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    pub mod graphs {}
    #[doc = include_str!("../../../book/src/pc-trees.md")]
    pub mod pc_trees {}
    #[doc = include_str!("../../../book/src/color-constraints.md")]
    pub mod color_constraints {}
    #[doc = include_str!("../../../book/src/instances.md")]
    pub mod instances {}
    #[doc = include_str!("../../../book/src/extension-test.md")]
    pub mod extension_test {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    pub mod oracle {}
    #[doc = include_str!("../../../book/src/generator.md")]
    pub mod generator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
