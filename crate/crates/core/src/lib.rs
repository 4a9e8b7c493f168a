//! Trackability analysis and simulation of continuous-time iterative
//! learning control for MIMO LTI systems.

pub mod error;
pub mod experiment;
pub mod ilc;
pub mod laplace;
pub mod linalg;
pub mod par;
pub mod poly;
pub mod ratmat;
pub mod realization;
pub mod scenario;
pub mod simulate;
pub mod trackability;

pub use error::{Error, Result};
