//! Polynomial optimization over boxes with shift-lifted convex (SLC)
//! decompositions and reformulation-perspectification relaxations.

pub mod bestslc;
pub mod bnb;
mod error;
pub mod local;
pub mod oracle;
pub mod poly;
pub mod problem;
pub mod random;
pub mod rpt;
pub mod slc;

pub use error::SlcError;
