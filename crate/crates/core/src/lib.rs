pub mod entire_products;
pub mod error;
pub mod experiment;
pub mod lattice_sets;
pub mod series_builder;
pub mod sign_analysis;
pub mod singularity_probe;
pub mod summation;

pub use error::{Error, Result};
