//! Scheduling and economics of truck-mounted (portable) grid-scale storage:
//! daily charge/discharge/relocation optimization over an area's price nodes,
//! life-cycle revenue simulation under a throughput budget, real-time price
//! settlement, and nodal-price congestion analytics.

pub mod congestion;
pub mod domain;
pub mod ingest;
pub mod lifecycle;
pub mod model;
pub mod solve;

#[cfg(test)]
pub(crate) mod testutil;
