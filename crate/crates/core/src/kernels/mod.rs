//! Scalar kernels shared by the columnar engine and the row runtime.
//!
//! Everything here works on single leaves. How leaves are traversed, how
//! nulls and broadcasting are handled, and how results are reassembled is
//! left to each backend.

pub mod date;
pub mod geo;
pub mod logic;
pub mod numeric;
pub mod text;
pub mod vocab;
