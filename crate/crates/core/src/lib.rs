//! Deep stacked stochastic configuration network for evolving data streams.
//!
//! The crate is organised bottom-up: [`stream`] produces labelled chunks,
//! [`weighting`] scores input features, [`drift`] watches the error
//! series, [`escn`] and [`scn`] form the base learner, [`stack`] chains
//! learners into a deep network and [`harness`] runs evaluation protocols.

// `!(x > 0.0)` guards are meant to reject NaN; index loops mirror the maths.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod drift;
pub mod error;
pub mod escn;
pub mod harness;
pub mod scn;
pub mod stack;
pub mod stream;
pub mod weighting;

pub use error::{Error, Result};

/// SplitMix64 finaliser, used to derive independent seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
