//! Independent oracles for the analytical model: exhaustive enumeration,
//! Monte Carlo over one packing period, a full line-network simulator and
//! GF(256) rank computations.

mod end_to_end;
mod exact;
pub mod gf256;
mod layout;
mod period;
pub mod rng;

pub use end_to_end::{lossless_throughput, simulate_end_to_end, EndToEndReport, HopEstimate};
pub use exact::{enumerate_period_exact, ENUMERATION_BOUND};
pub use gf256::{gf256_rank, GfMatrix};
pub use layout::{PeriodLayout, Piece};
pub use period::{simulate_period, PeriodEstimate, SimMode, TrialConfig};
