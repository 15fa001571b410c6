//! Capacity bounds and desk-scale coding experiments for arbitrarily varying
//! wiretap channels.

pub mod capacity;
pub mod channel;
pub mod coding;
pub mod error;
pub mod format;
pub mod info;
pub mod lp;
pub mod optim;
pub mod order;
pub mod partition;
pub mod presets;
pub mod rng;
pub mod typicality;
pub mod words;

pub use channel::{ChannelFamily, CostModel, Distribution, StateSequence, StochasticMatrix, WiretapPair};
pub use error::{Error, Result};
