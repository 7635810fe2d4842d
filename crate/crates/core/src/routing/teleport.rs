//! Bell-pair bookkeeping and teleportation across one edge.

use std::collections::BTreeSet;

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevec::{GateSpec, RegisterLayout, SiteId, SparseState};
use crate::topology::{DeviceId, Topology};

/// Tracks which Bell pairs have been spent. A pair is identified by its
/// (unordered) edge and a channel index, one channel per teleported register.
#[derive(Clone, Debug, Default)]
pub struct BellLedger {
    consumed: BTreeSet<(DeviceId, DeviceId, usize)>,
}

fn edge_key(a: DeviceId, b: DeviceId) -> (DeviceId, DeviceId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl BellLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_consumed(&self, a: DeviceId, b: DeviceId, channel: usize) -> bool {
        let (x, y) = edge_key(a, b);
        self.consumed.contains(&(x, y, channel))
    }

    pub fn consumed_count(&self) -> usize {
        self.consumed.len()
    }

    pub fn consume(&mut self, a: DeviceId, b: DeviceId, channel: usize) -> Result<()> {
        let (x, y) = edge_key(a, b);
        if !self.consumed.insert((x, y, channel)) {
            return Err(Error::ResourceConsumed {
                a: x,
                b: y,
                channel,
            });
        }
        Ok(())
    }
}

/// Half of the Bell pair on edge `a`-`b`, channel `channel`, held by `holder`.
pub fn bell_site(a: DeviceId, b: DeviceId, channel: usize, holder: DeviceId) -> SiteId {
    let (x, y) = edge_key(a, b);
    SiteId::new(format!("bell.{x}-{y}.{channel}@{holder}"))
}

/// `Σ_j |j⟩|j⟩ / √dim` on two fresh sites.
pub fn bell_pair_state<T: Real>(
    first: SiteId,
    second: SiteId,
    dim: usize,
) -> Result<SparseState<T>> {
    let layout = RegisterLayout::new([(first, dim), (second, dim)])?;
    SparseState::superpose(
        layout,
        (0..dim as u32).map(|j| (Complex::new(T::one(), T::zero()), vec![j, j])),
    )
}

/// Measurement outcomes of one teleported register: the receiver applied
/// `X^x` followed by `Z^z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellOutcome {
    pub channel: usize,
    pub z: u32,
    pub x: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HopStatus {
    Teleported,
    /// The flag did not select this edge; the pairs were spent but the
    /// payload stayed with the sender.
    NoSelection,
}

#[derive(Clone, Debug)]
pub struct HopResult<T: Real> {
    pub state: SparseState<T>,
    pub status: HopStatus,
    pub outcomes: Vec<BellOutcome>,
    /// Sites now holding the payload registers, in input order.
    pub payload: Vec<SiteId>,
}

/// Teleports the `payload` registers from `sender` to `receiver`, one Bell
/// pair per register, with the pair dimension matching the register.
///
/// With a `flag` the operation is conditioned on that site holding the given
/// value. The flag must be definite: either it holds the value with
/// certainty or not at all.
#[allow(clippy::too_many_arguments)]
pub fn teleport_hop<T: Real, R: Rng + ?Sized>(
    state: &SparseState<T>,
    topology: &Topology,
    ledger: &mut BellLedger,
    sender: DeviceId,
    receiver: DeviceId,
    payload: &[SiteId],
    flag: Option<(&SiteId, u32)>,
    rng: &mut R,
) -> Result<HopResult<T>> {
    if !topology.has_edge(sender, receiver) {
        return Err(Error::NoBellPair(sender, receiver));
    }
    for ch in 0..payload.len() {
        if ledger.is_consumed(sender, receiver, ch) {
            let (a, b) = edge_key(sender, receiver);
            return Err(Error::ResourceConsumed { a, b, channel: ch });
        }
    }
    let selected = match flag {
        None => true,
        Some((site, value)) => {
            let p = state
                .marginal(std::slice::from_ref(site))?
                .get(&vec![value])
                .copied()
                .unwrap_or(0.0);
            if p <= T::NORM_TOL {
                false
            } else if p >= 1.0 - T::NORM_TOL {
                true
            } else {
                return Err(Error::SelectionNotDefinite(p));
            }
        }
    };
    let controls: Vec<(SiteId, u32)> = flag.map(|(s, v)| (s.clone(), v)).into_iter().collect();

    let mut out = state.clone();
    let mut outcomes = Vec::new();
    let mut moved = Vec::new();
    for (ch, p) in payload.iter().enumerate() {
        let dim = out
            .layout()
            .dim(p)
            .ok_or_else(|| Error::UnknownSite(p.to_string()))?;
        let s = bell_site(sender, receiver, ch, sender);
        let r = bell_site(sender, receiver, ch, receiver);
        out = out.tensor(&bell_pair_state(s.clone(), r.clone(), dim)?)?;
        ledger.consume(sender, receiver, ch)?;
        if !selected {
            out = out.measure_with(&[s, r], rng)?.state;
            moved.push(p.clone());
            continue;
        }
        out = out.apply_controlled(&controls, &GateSpec::xor_add(p.clone(), s.clone(), dim)?)?;
        out = out.apply_controlled(&controls, &GateSpec::walsh_hadamard(p.clone(), dim))?;
        let m = out.measure_with(&[p.clone(), s], rng)?;
        let (z, x) = (m.outcome[0], m.outcome[1]);
        out = m.state;
        if x != 0 {
            out = out.apply_controlled(&controls, &GateSpec::xor_const(r.clone(), dim, x))?;
        }
        if z != 0 {
            out = out.apply_controlled(&controls, &GateSpec::z_pow(r.clone(), dim, z))?;
        }
        outcomes.push(BellOutcome { channel: ch, z, x });
        moved.push(r);
    }
    Ok(HopResult {
        state: out,
        status: if selected {
            HopStatus::Teleported
        } else {
            HopStatus::NoSelection
        },
        outcomes,
        payload: moved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::seeded_rng;

    fn line() -> Topology {
        Topology::parse("device 1\ndevice 2\ndevice 3\nbell 1 2\nbell 2 3\n").unwrap()
    }

    fn qubit(site: &str, a: (f64, f64), b: (f64, f64)) -> SparseState<f64> {
        let layout = RegisterLayout::new([(SiteId::from(site), 2)]).unwrap();
        SparseState::superpose(
            layout,
            [
                (Complex::new(a.0, a.1), vec![0]),
                (Complex::new(b.0, b.1), vec![1]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn qubit_survives_every_seed() {
        let psi = qubit("p", (0.6, 0.0), (0.0, 0.8));
        for seed in 0..16 {
            let mut ledger = BellLedger::new();
            let hop = teleport_hop(
                &psi,
                &line(),
                &mut ledger,
                1,
                2,
                &[SiteId::from("p")],
                None,
                &mut seeded_rng(seed),
            )
            .unwrap();
            assert_eq!(hop.status, HopStatus::Teleported);
            let want = qubit(hop.payload[0].as_str(), (0.6, 0.0), (0.0, 0.8));
            assert!((hop.state.overlap_on(&hop.payload, &want).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pairs_are_single_use() {
        let psi = qubit("p", (1.0, 0.0), (0.0, 0.0));
        let mut ledger = BellLedger::new();
        let mut rng = seeded_rng(1);
        let hop = teleport_hop(
            &psi,
            &line(),
            &mut ledger,
            1,
            2,
            &[SiteId::from("p")],
            None,
            &mut rng,
        )
        .unwrap();
        let err = teleport_hop(
            &hop.state,
            &line(),
            &mut ledger,
            2,
            1,
            &hop.payload,
            None,
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::ResourceConsumed {
                a: 1,
                b: 2,
                channel: 0
            }
        ));
    }

    #[test]
    fn missing_edge() {
        let psi = qubit("p", (1.0, 0.0), (0.0, 0.0));
        let err = teleport_hop(
            &psi,
            &line(),
            &mut BellLedger::new(),
            1,
            3,
            &[SiteId::from("p")],
            None,
            &mut seeded_rng(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoBellPair(1, 3)));
    }

    #[test]
    fn unselected_flag_leaves_payload() {
        let flag = SparseState::basis(RegisterLayout::new([(SiteId::from("f"), 4)]).unwrap(), &[3])
            .unwrap();
        let psi = qubit("p", (0.6, 0.0), (0.8, 0.0)).tensor(&flag).unwrap();
        let f = SiteId::from("f");
        let mut ledger = BellLedger::new();
        let hop = teleport_hop(
            &psi,
            &line(),
            &mut ledger,
            1,
            2,
            &[SiteId::from("p")],
            Some((&f, 2)),
            &mut seeded_rng(0),
        )
        .unwrap();
        assert_eq!(hop.status, HopStatus::NoSelection);
        assert!(ledger.is_consumed(2, 1, 0));
        assert!((hop.state.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indefinite_flag_rejected() {
        let layout = RegisterLayout::new([(SiteId::from("f"), 2)]).unwrap();
        let flag = SparseState::<f64>::superpose(
            layout,
            [
                (Complex::new(1.0, 0.0), vec![0]),
                (Complex::new(1.0, 0.0), vec![1]),
            ],
        )
        .unwrap();
        let psi = qubit("p", (1.0, 0.0), (0.0, 0.0)).tensor(&flag).unwrap();
        let f = SiteId::from("f");
        let err = teleport_hop(
            &psi,
            &line(),
            &mut BellLedger::new(),
            1,
            2,
            &[SiteId::from("p")],
            Some((&f, 1)),
            &mut seeded_rng(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SelectionNotDefinite(_)));
    }
}
