//! LDPC code construction, belief-propagation decoding under flooding,
//! residual, and learned sequential scheduling, plus the Tanner-graph
//! structural analysis (cycle enumeration, cluster-connecting sets) used to
//! build good check-node clusters for the learned scheduler.

pub mod analysis;
pub mod bp;
pub mod clustering;
pub mod error;
pub mod rl;
pub mod sim;
pub mod tanner;

pub use error::{Error, Result};
