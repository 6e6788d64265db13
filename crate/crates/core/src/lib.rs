//! Analytical model of frame efficiency for batched network coding (BNC)
//! packets aggregated into UDP-Lite payloads with per-packet integrity
//! protection, together with the hop-by-hop rank evolution on a line
//! network and the Monte Carlo and exhaustive oracles that check it.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod frame;
pub mod oracle;
pub mod prob;

pub use error::{ModelError, Result};
pub use evolution::{simulate_line_network, HopRecord, HopTrace, NodeStrategy, RankProfile};
pub use frame::{frame_size, max_feasible_n, AggregationContext, EfficiencyProfile};
pub use prob::{ChannelParams, CodeParams, IntegrityMode, LossModel, RankDistribution};
