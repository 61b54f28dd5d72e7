//! Exact filtered Higgs bundle calculus and algebraic Nahm transforms on an elliptic curve.
//!
//! The crate is organized bottom-up: [`exact_algebra`] supplies the coefficient
//! field and Laurent-series linear algebra, [`filtered_disc`] the calculus of
//! filtered lattices on a disc, [`higgs_local`] slopes and canonical forms of
//! Higgs germs, [`local_nahm`] the local transforms, [`elliptic_side`] torus
//! arithmetic and global conditions, [`nahm_global`] the global transforms, and
//! [`oracle`] independent brute-force checks.

pub mod cli;
pub mod elliptic_side;
pub mod error;
pub mod exact_algebra;
pub mod filtered_disc;
pub mod higgs_local;
pub mod local_nahm;
pub mod nahm_global;
pub mod oracle;

pub use error::{Error, Result};
