//! Cyclic cubic fields, their class groups and L-values, and exact counting
//! of A4-quartic fields with a fixed cubic resolvent.

pub mod arith;
pub mod charsum;
pub mod classgroup;
pub mod constants;
pub mod cubicfield;
pub mod eisenstein;
pub mod error;
pub mod idealcount;
pub mod lfunc;
pub mod linalg;
pub mod precision;
pub mod qmult;
pub mod quartic;

pub use error::{Error, Result};
