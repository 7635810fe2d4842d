//! Routing states and multi-hop teleportation driven by them.
//!
//! A payload qubit travels from a source to a target together with a
//! register holding the target address. At every device on the way the
//! routing state is queried coherently for the neighbor leading towards the
//! target, the query ancilla is read out, and the payload is teleported over
//! the chosen Bell pair.
//!
//! Routing states are uniform over their branches, and a branch only lists
//! the devices beyond one chosen child per junction. A query can therefore
//! come back empty (⊥): the spent routing state is then discarded and a
//! fresh copy loaded, up to [`RouteConfig::max_attempts`] times.

mod cost;
mod states;
mod teleport;

use num_complex::Complex;

use crate::addressing::addr_dim;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevec::{seeded_rng, RegisterLayout, SimRng, SiteId, SparseState};
use crate::topology::{DeviceId, SpanningTree, Topology};

pub use cost::{measure_routing_cost, report_routing_cost, CostBounds, CostReport, MAX_COST_N};
pub use states::{
    build_distributed_mst_state, build_local_routing_state, build_simplified_routing_state,
    build_unified_routing_state, distributed_mst_layout, local_routing_layout, select_bell_pair,
    simplified_routing_layout, RoutingBranch, RoutingKind, RoutingLayout, RoutingRegister,
    UnifiedRouting,
};
pub use teleport::{
    bell_pair_state, bell_site, teleport_hop, BellLedger, BellOutcome, HopResult, HopStatus,
};

pub(crate) use states::fmt_real;

/// Which routing state drives the hops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RouteMode {
    /// Every device on the path builds a local state for its own tree.
    Local,
    /// One distributed state built for the source's tree.
    Distributed,
}

/// How the selection ancilla is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SelectionMode {
    /// Measure the ancilla.
    Flag,
    /// Post-select the ancilla on the neighbor known classically from the tree.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RouteConfig {
    pub mode: RouteMode,
    pub selection: SelectionMode,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for RouteConfig {
    fn default() -> Self {
        Self {
            mode: RouteMode::Distributed,
            selection: SelectionMode::Flag,
            seed: 0,
            max_attempts: 64,
        }
    }
}

/// One query of the routing state at a device.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionAttempt {
    /// Neighbor read from the ancilla, `None` for ⊥.
    pub outcome: Option<DeviceId>,
    /// Probability of the observed ancilla value.
    pub probability: f64,
    /// Probability that the ancilla was not ⊥, from the simulated state.
    pub success_probability: f64,
    /// The same probability computed classically from the branch weights.
    pub expected_success: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopRecord {
    pub sender: DeviceId,
    pub receiver: DeviceId,
    pub attempts: Vec<SelectionAttempt>,
    pub outcomes: Vec<BellOutcome>,
}

/// A finished route.
#[derive(Clone, Debug)]
pub struct TeleportJob<T: Real> {
    pub source: DeviceId,
    pub target: DeviceId,
    pub mode: RouteMode,
    pub hops: Vec<HopRecord>,
    pub payload_site: SiteId,
    pub target_site: SiteId,
    pub state: SparseState<T>,
    /// Fidelity of the delivered payload with the input.
    pub fidelity: f64,
    /// Whether the target-address register arrived holding the target.
    pub target_register_intact: bool,
}

impl<T: Real> TeleportJob<T> {
    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    pub fn path(&self) -> Vec<DeviceId> {
        let mut p = vec![self.source];
        p.extend(self.hops.iter().map(|h| h.receiver));
        p
    }
}

struct LoadedRouting {
    layout: RoutingLayout,
    alive: Vec<bool>,
}

impl LoadedRouting {
    fn new(layout: RoutingLayout) -> Self {
        let alive = vec![true; layout.branch_count()];
        Self { layout, alive }
    }

    /// Chance, from the branch weights alone, that `holder` finds `target`.
    fn expected_success(&self, holder: DeviceId, target: DeviceId) -> f64 {
        let alive: Vec<usize> = (0..self.alive.len()).filter(|&b| self.alive[b]).collect();
        if alive.is_empty() {
            return 0.0;
        }
        let hits = alive
            .iter()
            .filter(|&&b| self.layout.branch_reaches(b, holder, target))
            .count();
        hits as f64 / alive.len() as f64
    }

    fn keep_matching(&mut self, holder: DeviceId, target: DeviceId) {
        for b in 0..self.alive.len() {
            self.alive[b] &= self.layout.branch_reaches(b, holder, target);
        }
    }
}

fn payload_state<T: Real>(site: SiteId, amps: [Complex<T>; 2]) -> Result<SparseState<T>> {
    SparseState::superpose(
        RegisterLayout::new([(site, 2)])?,
        [(amps[0], vec![0]), (amps[1], vec![1])],
    )
}

/// Measures out and drops `sites`.
fn discard<T: Real>(
    state: SparseState<T>,
    sites: &[SiteId],
    rng: &mut SimRng,
) -> Result<SparseState<T>> {
    if sites.is_empty() {
        return Ok(state);
    }
    Ok(state.measure_with(sites, rng)?.state)
}

/// Routes a payload qubit from `source` to `target`.
pub fn route<T: Real>(
    topology: &Topology,
    source: DeviceId,
    target: DeviceId,
    payload: [Complex<T>; 2],
    config: &RouteConfig,
) -> Result<TeleportJob<T>> {
    for d in [source, target] {
        if !topology.contains(d) {
            return Err(Error::UnknownDevice {
                device: d,
                line: None,
            });
        }
    }
    if source == target {
        return Err(Error::RangeError(format!(
            "source and target are both {source}"
        )));
    }
    let dim = addr_dim(topology.len());
    let t_val = topology.address_of(target).expect("target checked");
    let payload_site = SiteId::new(format!("payload.{source}"));
    let target_site = SiteId::new(format!("target.{source}"));
    let mut state = payload_state(payload_site.clone(), payload)?.tensor(&SparseState::basis(
        RegisterLayout::new([(target_site.clone(), dim)])?,
        &[t_val],
    )?)?;

    let mut rng = seeded_rng(config.seed);
    let mut ledger = BellLedger::new();
    let source_tree = SpanningTree::bfs(topology, source)?;
    let mut routing: Option<LoadedRouting> = None;
    if config.mode == RouteMode::Distributed {
        let layout = distributed_mst_layout(&source_tree);
        state = state.tensor(&layout.state()?)?;
        routing = Some(LoadedRouting::new(layout));
    }

    let mut holder = source;
    let mut sites = vec![payload_site, target_site];
    let mut hops = Vec::new();
    while holder != target {
        if hops.len() >= topology.len() {
            return Err(Error::RoutingInconsistency(
                "route does not terminate".into(),
            ));
        }
        let holder_tree = if config.mode == RouteMode::Local {
            Some(SpanningTree::bfs(topology, holder)?)
        } else {
            None
        };
        let mut attempts = Vec::new();
        let next = loop {
            if attempts.len() >= config.max_attempts {
                return Err(Error::SelectionExhausted {
                    device: holder,
                    attempts: attempts.len(),
                });
            }
            if let Some(tree) = &holder_tree {
                let layout = local_routing_layout(tree);
                state = state.tensor(&layout.state()?)?;
                routing = Some(LoadedRouting::new(layout));
            }
            let loaded = routing.as_mut().expect("routing state loaded");
            let expected = loaded.expected_success(holder, target);
            let ancilla = SiteId::new(format!("select.{holder}"));
            state = select_bell_pair(
                &state,
                &loaded.layout,
                holder,
                target,
                Some(&sites[1]),
                ancilla.clone(),
            )?;
            let marginal = state.marginal(std::slice::from_ref(&ancilla))?;
            let bottom = loaded.layout.bottom();
            let miss = marginal.get(&vec![bottom]).copied().unwrap_or(0.0);
            let success = (1.0 - miss).max(0.0);
            if success <= T::NORM_TOL {
                return Err(Error::RoutingInconsistency(format!(
                    "no routing branch at device {holder} lists target {target}"
                )));
            }
            let (value, probability) = match config.selection {
                SelectionMode::Flag => {
                    let m = state.measure_with(std::slice::from_ref(&ancilla), &mut rng)?;
                    state = m.state;
                    (m.outcome[0], m.probability)
                }
                SelectionMode::Oracle => {
                    let tree = holder_tree.as_ref().unwrap_or(&source_tree);
                    let k = tree.next_hop(holder, target).ok_or_else(|| {
                        Error::RoutingInconsistency(format!(
                            "device {holder} has no child towards {target}"
                        ))
                    })?;
                    let v = loaded.layout.value_of(Some(k));
                    let (post, p) = state.project(std::slice::from_ref(&ancilla), &[v])?;
                    state = post;
                    (v, p)
                }
            };
            let outcome = if value == bottom {
                None
            } else {
                loaded.layout.device_of(value)
            };
            attempts.push(SelectionAttempt {
                outcome,
                probability,
                success_probability: success,
                expected_success: expected,
            });
            match outcome {
                None => {
                    // spent copy: throw it away and load a fresh one
                    let spent = loaded.layout.site_ids();
                    let present: Vec<SiteId> = spent
                        .into_iter()
                        .filter(|s| state.layout().contains(s))
                        .collect();
                    state = discard(state, &present, &mut rng)?;
                    let fresh = match &holder_tree {
                        Some(_) => None,
                        None => {
                            let layout = distributed_mst_layout(&source_tree);
                            state = state.tensor(&layout.state()?)?;
                            Some(LoadedRouting::new(layout))
                        }
                    };
                    routing = fresh;
                }
                Some(k) => {
                    loaded.keep_matching(holder, target);
                    let used: Vec<SiteId> = loaded
                        .layout
                        .holder_registers(holder)
                        .into_iter()
                        .map(|i| loaded.layout.registers()[i].site.clone())
                        .collect();
                    state = discard(state, &used, &mut rng)?;
                    if holder_tree.is_some() {
                        routing = None;
                    }
                    break k;
                }
            }
        };
        let hop = teleport_hop(
            &state,
            topology,
            &mut ledger,
            holder,
            next,
            &sites,
            None,
            &mut rng,
        )?;
        state = hop.state;
        sites = hop.payload;
        hops.push(HopRecord {
            sender: holder,
            receiver: next,
            attempts,
            outcomes: hop.outcomes,
        });
        holder = next;
    }

    let delivered = payload_state(sites[0].clone(), payload)?;
    let fidelity = state.overlap_on(&sites[..1], &delivered)?;
    let target_register_intact = state.definite_value(&sites[1])? == Some(t_val);
    Ok(TeleportJob {
        source,
        target,
        mode: config.mode,
        hops,
        payload_site: sites[0].clone(),
        target_site: sites[1].clone(),
        state,
        fidelity,
        target_register_intact,
    })
}
