//! Cyclotomic FFT plans over GF(2^m) and a common subexpression eliminator
//! for binary matrix-vector products in characteristic 2.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the optimizer
//! driver and the command line tool live in `cfft-cli`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bitmat;
pub mod cfft;
pub mod conv;
pub mod cse;
pub mod error;
pub mod gf2m;
pub mod schedule;

pub use bitmat::{BinaryMatrix, Additive, Permutation, SymbolicSum};
pub use cfft::{CfftPlan, CosetDecomposition, PlanKind};
pub use conv::BilinearForm;
pub use cse::{run_cse, Algorithm, CseConfig, OptState, Strategy};
pub use error::{Error, Result};
pub use gf2m::{FieldElement, FieldSpec, NormalBasis};
pub use schedule::Schedule;
