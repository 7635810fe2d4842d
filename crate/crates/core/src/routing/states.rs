//! Routing states built from spanning trees.
//!
//! Every register holds a device address (its rank in ascending id order) or
//! the padding value `n + 1`, written ⊥. Junctions in the tree become
//! superpositions; every branch of a state has the same registers, padded
//! with ⊥ where a branch has nothing to say.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;

use crate::addressing::addr_dim;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevec::{GateSpec, RegisterLayout, SiteId, SparseState};
use crate::topology::{DeviceId, SpanningTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoutingKind {
    /// One path per root-to-leaf walk, all registers at the root.
    Local,
    /// One branch per root neighbor listing its reach set, all at the root.
    Simplified,
    /// Reach recursion distributed over the devices of the tree.
    Distributed,
}

/// One register of a routing state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingRegister {
    pub holder: DeviceId,
    /// 1-based position within the holder's group.
    pub position: usize,
    pub site: SiteId,
}

/// One expanded superposition branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingBranch {
    /// Child chosen at each holder that takes part in this branch.
    pub choices: BTreeMap<DeviceId, DeviceId>,
    /// Content of every register, `None` for ⊥.
    pub labels: Vec<Option<DeviceId>>,
}

/// Classical description of a routing state: its registers, the content of
/// each branch, and the tree it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingLayout {
    kind: RoutingKind,
    root: DeviceId,
    devices: Vec<DeviceId>,
    registers: Vec<RoutingRegister>,
    branches: Vec<RoutingBranch>,
    children: BTreeMap<DeviceId, Vec<DeviceId>>,
}

impl RoutingLayout {
    pub fn kind(&self) -> RoutingKind {
        self.kind
    }

    pub fn root(&self) -> DeviceId {
        self.root
    }

    pub fn registers(&self) -> &[RoutingRegister] {
        &self.registers
    }

    pub fn branches(&self) -> &[RoutingBranch] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn slots_per_branch(&self) -> usize {
        self.registers.len()
    }

    /// Every branch fills every register.
    pub fn is_balanced(&self) -> bool {
        self.branches
            .iter()
            .all(|b| b.labels.len() == self.registers.len())
    }

    pub fn n(&self) -> usize {
        self.devices.len()
    }

    pub fn addr_dim(&self) -> usize {
        addr_dim(self.devices.len())
    }

    pub fn bottom(&self) -> u32 {
        self.devices.len() as u32 + 1
    }

    pub fn tree_children(&self, holder: DeviceId) -> &[DeviceId] {
        self.children.get(&holder).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Register value encoding `label`.
    pub fn value_of(&self, label: Option<DeviceId>) -> u32 {
        match label {
            None => self.bottom(),
            Some(d) => self
                .devices
                .iter()
                .position(|&x| x == d)
                .map(|p| p as u32 + 1)
                .expect("label is a device of the tree"),
        }
    }

    /// Device encoded by a register value, `None` for ⊥ or 0.
    pub fn device_of(&self, value: u32) -> Option<DeviceId> {
        value
            .checked_sub(1)
            .and_then(|i| self.devices.get(i as usize).copied())
    }

    pub fn address_of(&self, d: DeviceId) -> Option<u32> {
        self.devices
            .iter()
            .position(|&x| x == d)
            .map(|p| p as u32 + 1)
    }

    pub fn branch_values(&self, b: usize) -> Vec<u32> {
        self.branches[b]
            .labels
            .iter()
            .map(|&l| self.value_of(l))
            .collect()
    }

    /// Indices of the registers held by `holder`.
    pub fn holder_registers(&self, holder: DeviceId) -> Vec<usize> {
        (0..self.registers.len())
            .filter(|&i| self.registers[i].holder == holder)
            .collect()
    }

    /// Whether branch `b` lists `target` in the registers of `holder`.
    pub fn branch_reaches(&self, b: usize, holder: DeviceId, target: DeviceId) -> bool {
        self.holder_registers(holder)
            .into_iter()
            .any(|i| self.branches[b].labels[i] == Some(target))
    }

    pub fn layout(&self) -> RegisterLayout {
        let dim = self.addr_dim();
        RegisterLayout::new(self.registers.iter().map(|r| (r.site.clone(), dim)))
            .expect("distinct register sites")
    }

    pub fn site_ids(&self) -> Vec<SiteId> {
        self.registers.iter().map(|r| r.site.clone()).collect()
    }

    /// Uniform superposition over the branches.
    pub fn state<T: Real>(&self) -> Result<SparseState<T>> {
        if self.branches.is_empty() {
            return Ok(SparseState::vacuum());
        }
        SparseState::superpose(
            self.layout(),
            (0..self.branches.len())
                .map(|b| (Complex::new(T::one(), T::zero()), self.branch_values(b))),
        )
    }

    /// One line per branch: `branch <idx> amp <re,im> slots <holder:label …>`.
    pub fn dump<T: Real>(&self, state: &SparseState<T>) -> String {
        let mut out = String::new();
        for b in 0..self.branches.len() {
            let amp = state.amplitude(&self.branch_values(b));
            let _ = write!(
                out,
                "branch {b} amp {},{} slots",
                fmt_real(amp.re.as_f64()),
                fmt_real(amp.im.as_f64())
            );
            for (reg, label) in self.registers.iter().zip(&self.branches[b].labels) {
                match label {
                    Some(d) => {
                        let _ = write!(out, " {}:{d}", reg.holder);
                    }
                    None => {
                        let _ = write!(out, " {}:⊥", reg.holder);
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed-precision rendering without negative zero.
pub(crate) fn fmt_real(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

fn tree_devices(tree: &SpanningTree) -> Vec<DeviceId> {
    tree.devices().collect()
}

fn tree_children(tree: &SpanningTree) -> BTreeMap<DeviceId, Vec<DeviceId>> {
    tree.devices()
        .map(|d| (d, tree.children(d).to_vec()))
        .collect()
}

fn pad(mut labels: Vec<Option<DeviceId>>, width: usize) -> Vec<Option<DeviceId>> {
    labels.resize(width, None);
    labels
}

/// Routing state held entirely by the tree root: one branch per root-to-leaf
/// path, listing the devices along it.
pub fn local_routing_layout(tree: &SpanningTree) -> RoutingLayout {
    let root = tree.root();
    let paths = tree.root_paths();
    let width = paths.iter().map(Vec::len).max().unwrap_or(0);
    let registers = (1..=width)
        .map(|l| RoutingRegister {
            holder: root,
            position: l,
            site: SiteId::new(format!("route.{root}.{l}")),
        })
        .collect();
    let branches = paths
        .iter()
        .map(|p| RoutingBranch {
            choices: BTreeMap::from([(root, p[0])]),
            labels: pad(p.iter().map(|&d| Some(d)).collect(), width),
        })
        .collect();
    RoutingLayout {
        kind: RoutingKind::Local,
        root,
        devices: tree_devices(tree),
        registers,
        branches,
        children: tree_children(tree),
    }
}

/// Routing state held by the root with one branch per root neighbor,
/// listing that neighbor's reach set in ascending order.
pub fn simplified_routing_layout(tree: &SpanningTree) -> RoutingLayout {
    let root = tree.root();
    let reach = tree.reach_sets();
    let width = reach.values().map(|s| s.len()).max().unwrap_or(0);
    let registers = (1..=width)
        .map(|l| RoutingRegister {
            holder: root,
            position: l,
            site: SiteId::new(format!("sroute.{root}.{l}")),
        })
        .collect();
    let branches = reach
        .iter()
        .map(|(&k, set)| RoutingBranch {
            choices: BTreeMap::from([(root, k)]),
            labels: pad(set.iter().map(|&d| Some(d)).collect(), width),
        })
        .collect();
    RoutingLayout {
        kind: RoutingKind::Simplified,
        root,
        devices: tree_devices(tree),
        registers,
        branches,
        children: tree_children(tree),
    }
}

/// Expands the reach recursion below `d`: one entry per combination of
/// child choices, each a list of (holder, chosen child).
fn expand_choices(tree: &SpanningTree, d: DeviceId) -> Vec<Vec<(DeviceId, DeviceId)>> {
    let children = tree.children(d);
    if children.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for &c in children {
        for rest in expand_choices(tree, c) {
            let mut branch = vec![(d, c)];
            branch.extend(rest);
            out.push(branch);
        }
    }
    out
}

/// Register sites of a distributed state are named `<prefix>.<holder>.<l>`.
fn distributed_layout_with(tree: &SpanningTree, prefix: &str) -> RoutingLayout {
    let root = tree.root();
    // every inner device holds as many registers as its largest child subtree
    let widths: BTreeMap<DeviceId, usize> = tree
        .devices()
        .filter_map(|d| {
            tree.children(d)
                .iter()
                .map(|&c| tree.subtree(c).len())
                .max()
                .map(|w| (d, w))
        })
        .collect();
    let mut registers = Vec::new();
    let mut offset = BTreeMap::new();
    for (&h, &w) in &widths {
        offset.insert(h, registers.len());
        for l in 1..=w {
            registers.push(RoutingRegister {
                holder: h,
                position: l,
                site: SiteId::new(format!("{prefix}.{h}.{l}")),
            });
        }
    }
    let branches = if registers.is_empty() {
        Vec::new()
    } else {
        expand_choices(tree, root)
            .into_iter()
            .map(|choices| {
                let mut labels = vec![None; registers.len()];
                for &(h, c) in &choices {
                    for (i, d) in tree.subtree(c).into_iter().enumerate() {
                        labels[offset[&h] + i] = Some(d);
                    }
                }
                RoutingBranch {
                    choices: choices.into_iter().collect(),
                    labels,
                }
            })
            .collect()
    };
    RoutingLayout {
        kind: RoutingKind::Distributed,
        root,
        devices: tree_devices(tree),
        registers,
        branches,
        children: tree_children(tree),
    }
}

/// Distributed routing state for the tree's root as source: each inner
/// device holds, per branch, the devices reachable through the child chosen
/// in that branch.
pub fn distributed_mst_layout(tree: &SpanningTree) -> RoutingLayout {
    distributed_layout_with(tree, &format!("mst.{}", tree.root()))
}

pub fn build_local_routing_state<T: Real>(
    tree: &SpanningTree,
) -> Result<(SparseState<T>, RoutingLayout)> {
    let layout = local_routing_layout(tree);
    Ok((layout.state()?, layout))
}

pub fn build_simplified_routing_state<T: Real>(
    tree: &SpanningTree,
) -> Result<(SparseState<T>, RoutingLayout)> {
    let layout = simplified_routing_layout(tree);
    Ok((layout.state()?, layout))
}

pub fn build_distributed_mst_state<T: Real>(
    tree: &SpanningTree,
) -> Result<(SparseState<T>, RoutingLayout)> {
    let layout = distributed_mst_layout(tree);
    Ok((layout.state()?, layout))
}

/// All sources' MST states superposed and tagged with `n` copies of the
/// source address.
#[derive(Clone, Debug)]
pub struct UnifiedRouting<T: Real> {
    pub state: SparseState<T>,
    pub registers: Vec<RoutingRegister>,
    pub tags: Vec<SiteId>,
    pub sources: Vec<DeviceId>,
}

impl<T: Real> UnifiedRouting<T> {
    /// Routing registers, tags excluded.
    pub fn register_count(&self) -> usize {
        self.registers.len()
    }
}

/// Superposes the MST states of every source, padding each to a common
/// register layout and tagging every branch with `|s⟩^{⊗n}`.
pub fn build_unified_routing_state<T: Real>(trees: &[SpanningTree]) -> Result<UnifiedRouting<T>> {
    let Some(first) = trees.first() else {
        return Err(Error::RangeError("no spanning trees given".into()));
    };
    let devices: Vec<DeviceId> = first.devices().collect();
    let mut roots: Vec<DeviceId> = trees.iter().map(SpanningTree::root).collect();
    roots.sort_unstable();
    if roots != devices
        || trees
            .iter()
            .any(|t| t.devices().ne(devices.iter().copied()))
    {
        return Err(Error::RangeError(
            "need exactly one tree per device over the same devices".into(),
        ));
    }
    let n = devices.len();
    let dim = addr_dim(n);
    let per_source: Vec<RoutingLayout> = trees
        .iter()
        .map(|t| distributed_layout_with(t, "tmp"))
        .collect();

    let mut widths: BTreeMap<DeviceId, usize> = BTreeMap::new();
    for lay in &per_source {
        for r in &lay.registers {
            let w = widths.entry(r.holder).or_insert(0);
            *w = (*w).max(r.position);
        }
    }
    let mut registers = Vec::new();
    let mut offset = BTreeMap::new();
    for (&h, &w) in &widths {
        offset.insert(h, registers.len());
        for l in 1..=w {
            registers.push(RoutingRegister {
                holder: h,
                position: l,
                site: SiteId::new(format!("unified.{h}.{l}")),
            });
        }
    }
    let tags: Vec<SiteId> = devices
        .iter()
        .map(|d| SiteId::new(format!("tag.{d}")))
        .collect();
    let layout = RegisterLayout::new(
        registers
            .iter()
            .map(|r| (r.site.clone(), dim))
            .chain(tags.iter().map(|t| (t.clone(), dim))),
    )?;

    let bottom = n as u32 + 1;
    let mut terms = Vec::new();
    for lay in &per_source {
        let tag = lay.address_of(lay.root).expect("root is a device");
        if lay.branches.is_empty() {
            let mut labels = vec![bottom; registers.len()];
            labels.extend(std::iter::repeat_n(tag, n));
            terms.push((Complex::new(T::one(), T::zero()), labels));
            continue;
        }
        let weight = T::one() / T::lit(lay.branches.len() as f64).sqrt();
        for b in 0..lay.branches.len() {
            let mut labels = vec![bottom; registers.len()];
            for (reg, value) in lay.registers.iter().zip(lay.branch_values(b)) {
                labels[offset[&reg.holder] + reg.position - 1] = value;
            }
            labels.extend(std::iter::repeat_n(tag, n));
            terms.push((Complex::new(weight, T::zero()), labels));
        }
    }
    let mut sources = roots;
    sources.dedup();
    Ok(UnifiedRouting {
        state: SparseState::superpose(layout, terms)?,
        registers,
        tags,
        sources,
    })
}

/// Coherently marks which Bell pair of `holder` leads towards `target`.
///
/// Adds an ancilla initialised to ⊥ and, for every tree child `k` of the
/// holder and every pair of positions `(l, l')` in its register group,
/// swaps the ancilla between ⊥ and `k` on the terms where position `l` holds
/// the target and position `l'` holds `k`. Since a branch lists each device
/// at most once and contains a single child of the holder, at most one of
/// these controlled swaps fires per term. With `target_register` the swaps
/// are additionally conditioned on that register holding the target.
pub fn select_bell_pair<T: Real>(
    state: &SparseState<T>,
    layout: &RoutingLayout,
    holder: DeviceId,
    target: DeviceId,
    target_register: Option<&SiteId>,
    ancilla: SiteId,
) -> Result<SparseState<T>> {
    let t = layout.address_of(target).ok_or(Error::UnknownDevice {
        device: target,
        line: None,
    })?;
    if layout.address_of(holder).is_none() {
        return Err(Error::UnknownDevice {
            device: holder,
            line: None,
        });
    }
    if holder == target {
        return Err(Error::RoutingInconsistency(format!(
            "device {holder} routing to itself"
        )));
    }
    let dim = layout.addr_dim();
    let bottom = layout.bottom();
    let anc = SparseState::basis(RegisterLayout::new([(ancilla.clone(), dim)])?, &[bottom])?;
    let mut out = state.tensor(&anc)?;
    let group = layout.holder_registers(holder);
    for &k in layout.tree_children(holder) {
        let kv = layout.value_of(Some(k));
        let swap = GateSpec::swap_values(ancilla.clone(), dim, bottom, kv);
        for &l in &group {
            for &m in &group {
                if (l == m) != (k == target) {
                    continue;
                }
                let mut controls = vec![(layout.registers[l].site.clone(), t)];
                if l != m {
                    controls.push((layout.registers[m].site.clone(), kv));
                }
                if let Some(reg) = target_register {
                    controls.push((reg.clone(), t));
                }
                out = out.apply_controlled(&controls, &swap)?;
            }
        }
    }
    Ok(out)
}
