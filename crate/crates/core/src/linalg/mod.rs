pub mod dense;
pub mod exact;
pub mod float;
pub mod modular;
pub mod sparse;

pub use dense::QMatrix;
pub use sparse::SparseMatrix;
