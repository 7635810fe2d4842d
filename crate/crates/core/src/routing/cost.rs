//! Register-count bounds for distributed and unified routing states.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::topology::{DeviceId, SpanningTree, Topology};

use super::states::{build_unified_routing_state, distributed_mst_layout};

/// Upper bounds on routing registers for `n` devices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostBounds {
    pub n: usize,
    /// Registers of one source's distributed state: `n!`.
    pub single_mst: u128,
    /// Registers of the unified state, tags excluded: `n · n!`.
    pub unified: u128,
}

/// Largest `n` whose bounds are reported.
pub const MAX_COST_N: usize = 20;

pub fn report_routing_cost(n: usize) -> Result<CostBounds> {
    if n == 0 || n > MAX_COST_N {
        return Err(Error::RangeError(format!(
            "device count {n} outside 1..={MAX_COST_N}"
        )));
    }
    let fact: u128 = (1..=n as u128).product();
    Ok(CostBounds {
        n,
        single_mst: fact,
        unified: n as u128 * fact,
    })
}

/// Register counts actually used on a topology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub bounds: CostBounds,
    /// Distributed-state register count per source.
    pub mst_registers: BTreeMap<DeviceId, usize>,
    /// Unified-state register count, tags excluded.
    pub unified_registers: usize,
    pub tags: usize,
}

impl CostReport {
    pub fn max_mst_registers(&self) -> usize {
        self.mst_registers.values().copied().max().unwrap_or(0)
    }

    pub fn within_bounds(&self) -> bool {
        self.max_mst_registers() as u128 <= self.bounds.single_mst
            && self.unified_registers as u128 <= self.bounds.unified
    }
}

pub fn measure_routing_cost(topology: &Topology) -> Result<CostReport> {
    let bounds = report_routing_cost(topology.len())?;
    let trees = topology
        .devices()
        .map(|d| SpanningTree::bfs(topology, d))
        .collect::<Result<Vec<_>>>()?;
    let mst_registers = trees
        .iter()
        .map(|t| (t.root(), distributed_mst_layout(t).slots_per_branch()))
        .collect();
    let unified = build_unified_routing_state::<f64>(&trees)?;
    Ok(CostReport {
        bounds,
        mst_registers,
        unified_registers: unified.register_count(),
        tags: unified.tags.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_bounds() {
        let b = report_routing_cost(4).unwrap();
        assert_eq!((b.single_mst, b.unified), (24, 96));
        assert_eq!(
            report_routing_cost(20).unwrap().single_mst,
            2_432_902_008_176_640_000
        );
        assert!(report_routing_cost(0).is_err());
        assert!(report_routing_cost(21).is_err());
    }
}
