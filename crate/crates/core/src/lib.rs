//! Exact certificates for homogeneous tube domains in complex space.

pub mod eigen;
pub mod exact_arith;
pub mod linalg;
pub mod polynomial;
pub mod maps;
pub mod geometry;
pub mod catalog;
pub mod chern_moser;
pub mod lie;
pub mod registry;
pub mod checks;
