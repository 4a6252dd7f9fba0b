//! Scenario runner, experiment sweeps, reference trend checks and chart
//! emission for the `fanetsim-core` simulator.

pub mod charts;
pub mod oracle;
pub mod reference;
pub mod runner;
pub mod scenario;
pub mod sweep;
pub mod trends;
