pub mod algebra;
pub mod cover;
pub mod cover_tree;
pub mod error;
pub mod graph;
pub mod hybrid;
pub mod report;
pub mod rips;
pub mod rng;
