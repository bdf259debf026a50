//! Liquidity-provider systemic importance analytics for concentrated-liquidity pools.
//!
//! The pipeline reads Mint/Burn events, rebuilds per-tick active liquidity,
//! ranks owners by exponentially time-weighted liquidity (ETWL), and scores each
//! top owner by how much the mean price impact of a fixed synthetic swap set
//! rises when that owner's entire history is removed (the Liquidity Stability
//! Impact Score, LSIS).

pub mod counterfactual;
pub mod decimal;
pub mod error;
pub mod etwl;
pub mod fixtures;
pub mod gatekeeper;
pub mod ingest;
pub mod liquidity;
pub mod rng;
pub mod swap_math;
pub mod types;

pub use error::{Error, Result};
pub use types::{Address, EventDataset, EventKind, PoolEvent, TxHash, U256};
