//! Multi-UAV mmWave network simulator.
//!
//! Models a fleet of rotary-wing UAV base stations serving mobile ground
//! users over 73 GHz links in a gridded urban map. Per macro slot the fleet
//! re-clusters users (priority-aware, capacity-limited, throughput-weighted
//! K-means), relocates with minimum propulsion energy (Hungarian matching),
//! and assigns users to UAVs every slot with a capacity-constrained greedy
//! that trades off throughput, handover cost and user priority. Two baseline
//! assignment schemes and a batch CLI reproduce the standard comparison
//! metrics (unserved users, delay spread, energy efficiency).

pub mod assignment;
pub mod channel;
pub mod clustering;
pub mod config;
pub mod energy;
pub mod environment;
pub mod error;
pub mod matching;
pub mod mobility;
pub mod sim;

pub use error::{Error, Result};
