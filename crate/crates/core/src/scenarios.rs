//! Canned fixtures: the seven- and eight-device example networks with
//! hand-written routing states, and the overlay application in which three
//! address configurations carry three different network states.

use num_complex::Complex;

use crate::addressing::{addr_dim, addr_site, work_site, OpCode};
use crate::error::{Error, Result};
use crate::routing::RoutingKind;
use crate::scalar::Real;
use crate::statevec::{GateSpec, Labels, RegisterLayout, SiteId, SparseState};
use crate::topology::{DeviceId, SpanningTree, Topology};

const FIG2: &str = include_str!("../fixtures/fig2.topo");
const FIG3: &str = include_str!("../fixtures/fig3.topo");

/// Fixture names accepted by [`load_figure_fixture`].
pub const FIGURES: [&str; 2] = ["fig2", "fig3"];

/// Expected routing state for device 1 of a figure network.
#[derive(Clone, Debug)]
pub struct GoldenState {
    pub kind: RoutingKind,
    pub state: SparseState<f64>,
}

#[derive(Clone, Debug)]
pub struct FigureFixture {
    pub name: &'static str,
    pub topology: Topology,
    pub root: DeviceId,
    pub tree_edges: Vec<(DeviceId, DeviceId)>,
    pub goldens: Vec<GoldenState>,
}

impl FigureFixture {
    pub fn tree(&self) -> Result<SpanningTree> {
        SpanningTree::bfs(&self.topology, self.root)
    }

    pub fn golden(&self, kind: RoutingKind) -> Option<&SparseState<f64>> {
        self.goldens
            .iter()
            .find(|g| g.kind == kind)
            .map(|g| &g.state)
    }
}

/// Raw topology text of a figure fixture.
pub fn figure_topology_text(name: &str) -> Result<&'static str> {
    match name {
        "fig2" => Ok(FIG2),
        "fig3" => Ok(FIG3),
        _ => Err(Error::UnknownFixture(name.to_owned())),
    }
}

/// Uniform superposition of `rows` over registers `<prefix>.<l>`.
/// `B` in a row is the padding value.
fn golden(prefix: &str, dim: usize, rows: &[&[u32]]) -> Result<SparseState<f64>> {
    let width = rows[0].len();
    let layout =
        RegisterLayout::new((1..=width).map(|l| (SiteId::new(format!("{prefix}.{l}")), dim)))?;
    SparseState::superpose(
        layout,
        rows.iter().map(|r| (Complex::new(1.0, 0.0), r.to_vec())),
    )
}

fn fig2_goldens() -> Result<Vec<GoldenState>> {
    const B: u32 = 8;
    let dim = addr_dim(7);
    Ok(vec![
        GoldenState {
            kind: RoutingKind::Local,
            state: golden("route.1", dim, &[&[2, 3, B], &[7, 5, 4], &[7, 5, 6]])?,
        },
        GoldenState {
            kind: RoutingKind::Simplified,
            state: golden("sroute.1", dim, &[&[2, 3, B, B], &[4, 5, 6, 7]])?,
        },
    ])
}

fn fig3_goldens() -> Result<Vec<GoldenState>> {
    const B: u32 = 9;
    let dim = addr_dim(8);
    // holders 1 (5 slots), 2 (1), 4 (4), 5 (2), 6 (1)
    let sites = [(1, 5), (2, 1), (4, 4), (5, 2), (6, 1)]
        .into_iter()
        .flat_map(|(h, w)| (1..=w).map(move |l| (SiteId::new(format!("mst.1.{h}.{l}")), dim)));
    let layout = RegisterLayout::new(sites)?;
    let rows: [[u32; 13]; 3] = [
        [2, 3, B, B, B, 3, B, B, B, B, B, B, B],
        [4, 5, 6, 7, 8, B, 5, 6, 7, 8, 6, 8, 8],
        [4, 5, 6, 7, 8, B, 5, 6, 7, 8, 7, B, B],
    ];
    let state = SparseState::superpose(
        layout,
        rows.iter().map(|r| (Complex::new(1.0, 0.0), r.to_vec())),
    )?;
    Ok(vec![GoldenState {
        kind: RoutingKind::Distributed,
        state,
    }])
}

/// Loads `fig2` or `fig3` with its tree edges and golden routing states for
/// device 1.
pub fn load_figure_fixture(name: &str) -> Result<FigureFixture> {
    let text = figure_topology_text(name)?;
    let topology = Topology::parse(text).map_err(|e| Error::BadFixture(format!("{name}: {e}")))?;
    let (name, tree_edges, goldens) = match name {
        "fig2" => (
            "fig2",
            vec![(1, 2), (2, 3), (1, 7), (7, 5), (5, 4), (5, 6)],
            fig2_goldens()?,
        ),
        _ => (
            "fig3",
            vec![(1, 2), (2, 3), (1, 4), (4, 5), (5, 6), (5, 7), (6, 8)],
            fig3_goldens()?,
        ),
    };
    Ok(FigureFixture {
        name,
        topology,
        root: 1,
        tree_edges,
        goldens,
    })
}

/// One step of a branch protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlayOp {
    Gate {
        device: DeviceId,
        op: OpCode,
    },
    /// XOR of one work qubit into another.
    XorAdd {
        control: DeviceId,
        target: DeviceId,
    },
}

/// Three devices whose address configuration selects which network state
/// they share and which protocol turns it into the common state.
#[derive(Clone, Debug)]
pub struct OverlayFixture<T: Real> {
    pub devices: Vec<DeviceId>,
    pub alphas: Vec<Complex<T>>,
    /// Address of every device, per branch.
    pub assignments: Vec<Vec<u32>>,
    pub networks: Vec<SparseState<T>>,
    pub programs: Vec<Vec<OverlayOp>>,
    pub target: SparseState<T>,
}

fn work_layout(devices: &[DeviceId]) -> RegisterLayout {
    RegisterLayout::new(devices.iter().map(|&d| (work_site(d), 2))).expect("distinct devices")
}

fn qubits<T: Real>(devices: &[DeviceId], amps: &[(&[u32], f64)]) -> SparseState<T> {
    SparseState::superpose(
        work_layout(devices),
        amps.iter()
            .map(|(l, a)| (Complex::new(T::lit(*a), T::zero()), l.to_vec())),
    )
    .expect("nonzero fixture state")
}

fn ghz_program() -> Vec<OverlayOp> {
    vec![
        OverlayOp::Gate {
            device: 1,
            op: OpCode::H,
        },
        OverlayOp::XorAdd {
            control: 1,
            target: 2,
        },
        OverlayOp::XorAdd {
            control: 1,
            target: 3,
        },
    ]
}

impl<T: Real> OverlayFixture<T> {
    /// Address branches `(1,2,3)`, `(2,3,1)`, `(3,1,2)` carrying a GHZ state,
    /// `|+++⟩` and `|000⟩`, each driven to GHZ.
    pub fn standard() -> Self {
        let devices = vec![1, 2, 3];
        let ghz = qubits(&devices, &[(&[0, 0, 0], 1.0), (&[1, 1, 1], 1.0)]);
        let plus = SparseState::superpose(
            work_layout(&devices),
            (0..8u32).map(|x| {
                (
                    Complex::new(T::one(), T::zero()),
                    vec![x >> 2 & 1, x >> 1 & 1, x & 1],
                )
            }),
        )
        .expect("nonzero");
        let zero = qubits(&devices, &[(&[0, 0, 0], 1.0)]);
        let mut from_plus: Vec<OverlayOp> = devices
            .iter()
            .map(|&d| OverlayOp::Gate {
                device: d,
                op: OpCode::H,
            })
            .collect();
        from_plus.extend(ghz_program());
        let third = T::one() / T::lit(3.0).sqrt();
        OverlayFixture {
            devices,
            alphas: vec![Complex::new(third, T::zero()); 3],
            assignments: vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]],
            networks: vec![ghz.clone(), plus, zero],
            programs: vec![Vec::new(), from_plus, ghz_program()],
            target: ghz,
        }
    }

    /// Drops the last step of branch `branch`'s protocol.
    pub fn perturbed(mut self, branch: usize) -> Self {
        if let Some(p) = self.programs.get_mut(branch) {
            p.pop();
        }
        self
    }

    pub fn with_alphas(mut self, alphas: Vec<Complex<T>>) -> Self {
        self.alphas = alphas;
        self
    }

    fn check(&self) -> Result<()> {
        let b = self.assignments.len();
        if b == 0 || self.alphas.len() != b || self.networks.len() != b || self.programs.len() != b
        {
            return Err(Error::BadFixture(format!(
                "{} alphas, {} assignments, {} networks, {} programs",
                self.alphas.len(),
                b,
                self.networks.len(),
                self.programs.len()
            )));
        }
        let work = work_layout(&self.devices);
        for (i, s) in self
            .networks
            .iter()
            .chain(std::iter::once(&self.target))
            .enumerate()
        {
            if s.layout() != &work {
                return Err(Error::BadFixture(format!(
                    "state {i} is not on the work qubits"
                )));
            }
            if (s.norm_sqr() - 1.0).abs() > T::NORM_TOL {
                return Err(Error::BadFixture(format!("state {i} is not normalized")));
            }
        }
        for a in &self.assignments {
            if a.len() != self.devices.len() {
                return Err(Error::BadFixture(format!(
                    "assignment {a:?} has the wrong length"
                )));
            }
        }
        if self.alphas.iter().all(|a| a.norm().as_f64() < T::PRUNE) {
            return Err(Error::BadFixture("all branch weights are zero".into()));
        }
        Ok(())
    }

    fn address_layout(&self) -> RegisterLayout {
        let dim = addr_dim(self.devices.len());
        RegisterLayout::new(self.devices.iter().map(|&d| (addr_site(d), dim)))
            .expect("distinct devices")
    }

    /// Branches with nonzero weight.
    pub fn active_branches(&self) -> Vec<usize> {
        (0..self.alphas.len())
            .filter(|&b| self.alphas[b].norm().as_f64() >= T::PRUNE)
            .collect()
    }

    /// `Σ_b α_b |assignment_b⟩ |N_b⟩`, normalized.
    pub fn address_state(&self) -> Result<SparseState<T>> {
        self.check()?;
        SparseState::superpose(
            self.address_layout(),
            self.active_branches()
                .into_iter()
                .map(|b| (self.alphas[b], self.assignments[b].clone())),
        )
    }
}

/// The overlay state of a fixture, address registers first.
pub fn build_overlay_state<T: Real>(fixture: &OverlayFixture<T>) -> Result<SparseState<T>> {
    fixture.check()?;
    let mut terms: Vec<(Complex<T>, Labels)> = Vec::new();
    for b in fixture.active_branches() {
        for (labels, amp) in fixture.networks[b].terms() {
            let mut l = fixture.assignments[b].clone();
            l.extend_from_slice(labels);
            terms.push((fixture.alphas[b] * *amp, l));
        }
    }
    let layout = fixture
        .address_layout()
        .concat(&work_layout(&fixture.devices))?;
    SparseState::superpose(layout, terms)
}

#[derive(Clone, Debug)]
pub struct OverlayOutcome<T: Real> {
    pub state: SparseState<T>,
    /// Fidelity with (address state) ⊗ |G⟩.
    pub fidelity: f64,
    /// Per active branch, fidelity of its network state with |G⟩.
    pub branch_fidelities: Vec<(usize, f64)>,
    /// Branches whose network did not reach |G⟩.
    pub offending: Vec<usize>,
    /// The reduced address state equals the prepared one.
    pub address_intact: bool,
}

/// Runs every branch's protocol controlled on its address configuration.
pub fn run_overlay_protocol<T: Real>(fixture: &OverlayFixture<T>) -> Result<OverlayOutcome<T>> {
    let mut state = build_overlay_state(fixture)?;
    let addr: Vec<SiteId> = fixture.devices.iter().map(|&d| addr_site(d)).collect();
    for b in fixture.active_branches() {
        let controls: Vec<(SiteId, u32)> = addr
            .iter()
            .cloned()
            .zip(fixture.assignments[b].iter().copied())
            .collect();
        for step in &fixture.programs[b] {
            let gate = match *step {
                OverlayOp::Gate { device, op } => op.gate(work_site(device)),
                OverlayOp::XorAdd { control, target } => {
                    GateSpec::xor_add(work_site(control), work_site(target), 2)?
                }
            };
            state = state.apply_controlled(&controls, &gate)?;
        }
    }
    let address = fixture.address_state()?;
    let fidelity = state.fidelity(&address.tensor(&fixture.target)?)?;
    let mut branch_fidelities = Vec::new();
    let mut offending = Vec::new();
    for b in fixture.active_branches() {
        let (net, _) = state.project(&addr, &fixture.assignments[b])?;
        let f = net.fidelity(&fixture.target)?;
        if f < 1.0 - T::NORM_TOL {
            offending.push(b);
        }
        branch_fidelities.push((b, f));
    }
    let address_intact = state.overlap_on(&addr, &address)? >= 1.0 - T::NORM_TOL;
    Ok(OverlayOutcome {
        state,
        fidelity,
        branch_fidelities,
        offending,
        address_intact,
    })
}
