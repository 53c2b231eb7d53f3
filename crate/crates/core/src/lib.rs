//! Connectivity optimization for RIS-assisted uplink NOMA UAV networks.
//!
//! A network snapshot (UEs on the ground, hovering UAVs, passive RIS panels)
//! is modelled as a weighted graph whose algebraic connectivity λ₂ is the
//! figure of merit. RIS panels are virtually partitioned so that each one can
//! beamform several NOMA-multiplexed UEs towards a single UAV, adding
//! UE→RIS→UAV edges to the graph.
//!
//! Module map:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`topology`] | node deployments and [`SimConfig`] |
//! | [`channel`] | path loss, Nakagami fading, RIS phase plans |
//! | [`sinr`] | exact / approximate / imperfect-CSI SINR and rates |
//! | [`specgraph`] | weighted graphs, Laplacian, Fiedler value, UAV reliability |
//! | [`assign`] | UAV-RIS clustering, UE NOMA clustering, linear sum assignment |
//! | [`partition`] | closed-form RIS partitioning and a grid-search oracle |
//! | [`engine`] | iterative optimizer, baselines, Monte Carlo harness |
//! | [`cli`] | config files, presets, CSV output, command dispatch |

pub mod assign;
pub mod channel;
pub mod cli;
pub mod engine;
mod error;
pub mod partition;
pub mod sinr;
pub mod specgraph;
pub mod topology;
pub mod util;

pub use error::{Error, Result};
pub use topology::{distance, Position, SimConfig, Topology};
