//! Deterministic discrete-event simulator for flying ad hoc networks:
//! reactive AODV routing over a simplified shared wireless medium, 3D
//! Gauss-Markov mobility, and routing-layer attack overlays (sinkhole,
//! dropping/grayhole, blackhole, RREQ flooding), with full packet-level
//! metrics accounting.
//!
//! The crate is `no_std` + `alloc`; all I/O, scenario files and experiment
//! sweeps live in the companion `fanetsim` crate.

#![no_std]

extern crate alloc;

pub mod adversary;
pub mod aodv;
pub mod engine;
pub mod medium;
pub mod mobility;
pub mod rng;
pub mod sim;
pub mod trace;
pub mod workload;

/// Node identifier. UAVs are numbered from zero; when a ground base station
/// is present it takes the last id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u16);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(i as u16)
    }
}

impl core::fmt::Display for NodeId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}
