pub mod error;
pub mod fraisse;
pub mod graph;
pub mod io;
pub mod limits;
pub mod paths;
pub mod rel;
pub mod tower;

pub use error::{Error, Result};
pub use graph::{canonical_path, Graph, Partition, Path};
pub use rel::{check_morphism, compose, is_tangled, MorphismReport, Rel};
