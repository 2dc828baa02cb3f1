//! Cross-category multi-purchase choice modeling.
//!
//! Customers pick from categories arranged in a directed acyclic graph. The
//! choice in a parent category shifts where they are initially attracted in
//! each child category; within a category, a choice kernel (MNL, Markov
//! chain or ranking distribution) decides substitution when the attracting
//! product is not offered.

pub mod assortment;
pub mod choice;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod pipeline;
pub mod sampling;
pub mod synth;

pub use assortment::Assortment;
pub use choice::{ChoiceKernel, McModel, MnlModel, RankingModel};
pub use error::{Error, Result};
pub use model::{CategoryNode, CrossCatModel, Edge, JointChoiceTable};
