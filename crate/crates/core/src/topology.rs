//! Bell-pair topologies, breadth-first spanning trees and reach sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Device identifier, a positive integer below 2^16.
pub type DeviceId = u32;

const MAX_DEVICE: u64 = 1 << 16;

/// Devices connected by undirected Bell pairs. Always connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    devices: BTreeSet<DeviceId>,
    edges: BTreeSet<(DeviceId, DeviceId)>,
}

fn norm_edge(a: DeviceId, b: DeviceId) -> (DeviceId, DeviceId) {
    (a.min(b), a.max(b))
}

impl Topology {
    /// Validates devices and edges and checks connectivity.
    pub fn new(
        devices: impl IntoIterator<Item = DeviceId>,
        edges: impl IntoIterator<Item = (DeviceId, DeviceId)>,
    ) -> Result<Self> {
        let mut topo = Topology {
            devices: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        for d in devices {
            if d == 0 || u64::from(d) >= MAX_DEVICE {
                return Err(Error::DeviceRange(d.into()));
            }
            topo.devices.insert(d);
        }
        for (a, b) in edges {
            topo.add_edge(a, b, None)?;
        }
        topo.check_connected()?;
        Ok(topo)
    }

    fn add_edge(&mut self, a: DeviceId, b: DeviceId, line: Option<usize>) -> Result<()> {
        for d in [a, b] {
            if !self.devices.contains(&d) {
                return Err(Error::UnknownDevice { device: d, line });
            }
        }
        if a == b {
            return Err(Error::SelfLoop { device: a, line });
        }
        if !self.edges.insert(norm_edge(a, b)) {
            let (a, b) = norm_edge(a, b);
            return Err(Error::DuplicateEdge { a, b, line });
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let Some(&first) = self.devices.iter().next() else {
            return Err(Error::EmptyTopology);
        };
        let mut seen = BTreeSet::from([first]);
        let mut queue = VecDeque::from([first]);
        while let Some(d) = queue.pop_front() {
            for n in self.neighbors(d) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        if seen.len() != self.devices.len() {
            return Err(Error::Disconnected {
                from: first,
                unreachable: self.devices.difference(&seen).copied().collect(),
            });
        }
        Ok(())
    }

    /// Parses the line-oriented topology format:
    ///
    /// ```text
    /// # comment
    /// device 1
    /// device 2
    /// bell 1 2
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut topo = Topology {
            devices: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            let id = |w: &str| -> Result<DeviceId> {
                let v: u64 = w.parse().map_err(|_| Error::Syntax {
                    line,
                    message: format!("`{w}` is not a device id"),
                })?;
                if v == 0 || v >= MAX_DEVICE {
                    return Err(Error::Syntax {
                        line,
                        message: format!("device id {v} outside [1, 65536)"),
                    });
                }
                Ok(v as DeviceId)
            };
            match words.as_slice() {
                ["device", d] => {
                    let d = id(d)?;
                    if !topo.devices.insert(d) {
                        return Err(Error::DuplicateDevice { device: d, line });
                    }
                }
                ["bell", a, b] => {
                    let (a, b) = (id(a)?, id(b)?);
                    topo.add_edge(a, b, Some(line))?;
                }
                _ => {
                    return Err(Error::Syntax {
                        line,
                        message: format!(
                            "expected `device <id>` or `bell <i> <j>`, found `{content}`"
                        ),
                    })
                }
            }
        }
        topo.check_connected()?;
        Ok(topo)
    }

    pub fn devices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.devices.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (DeviceId, DeviceId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn contains(&self, d: DeviceId) -> bool {
        self.devices.contains(&d)
    }

    pub fn has_edge(&self, a: DeviceId, b: DeviceId) -> bool {
        self.edges.contains(&norm_edge(a, b))
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, d: DeviceId) -> Vec<DeviceId> {
        let mut out: Vec<DeviceId> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == d {
                    Some(b)
                } else if b == d {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Logical address of a device: its 1-based rank in ascending id order.
    pub fn address_of(&self, d: DeviceId) -> Option<u32> {
        self.devices
            .iter()
            .position(|&x| x == d)
            .map(|p| p as u32 + 1)
    }

    /// Inverse of [`Topology::address_of`].
    pub fn device_at(&self, address: u32) -> Option<DeviceId> {
        address
            .checked_sub(1)
            .and_then(|i| self.devices.iter().nth(i as usize).copied())
    }

    /// Graphviz rendering. With a tree, tree edges are drawn solid and
    /// directed away from the root while the remaining Bell pairs are dashed.
    pub fn to_dot(&self, tree: Option<&SpanningTree>) -> String {
        let mut out = String::from("digraph bell_network {\n    node [shape=circle];\n");
        for d in &self.devices {
            let extra = match tree {
                Some(t) if t.root() == *d => ", style=bold",
                _ => "",
            };
            let _ = writeln!(out, "    {d} [label=\"{d}\"{extra}];");
        }
        for &(a, b) in &self.edges {
            match tree {
                Some(t) => {
                    if t.parent(b) == Some(a) {
                        let _ = writeln!(out, "    {a} -> {b} [style=solid];");
                    } else if t.parent(a) == Some(b) {
                        let _ = writeln!(out, "    {b} -> {a} [style=solid];");
                    } else {
                        let _ = writeln!(out, "    {a} -> {b} [style=dashed, dir=none];");
                    }
                }
                None => {
                    let _ = writeln!(out, "    {a} -> {b} [dir=none];");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Parses a topology file.
pub fn parse_topology(text: &str) -> Result<Topology> {
    Topology::parse(text)
}

/// Rooted spanning tree over a topology. Children lists are ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    root: DeviceId,
    parent: BTreeMap<DeviceId, DeviceId>,
    children: BTreeMap<DeviceId, Vec<DeviceId>>,
}

impl SpanningTree {
    /// Breadth-first tree from `root`, visiting neighbors in ascending id.
    pub fn bfs(topology: &Topology, root: DeviceId) -> Result<Self> {
        if !topology.contains(root) {
            return Err(Error::UnknownDevice {
                device: root,
                line: None,
            });
        }
        let mut parent = BTreeMap::new();
        let mut children: BTreeMap<DeviceId, Vec<DeviceId>> =
            topology.devices().map(|d| (d, Vec::new())).collect();
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(d) = queue.pop_front() {
            for n in topology.neighbors(d) {
                if seen.insert(n) {
                    parent.insert(n, d);
                    children.get_mut(&d).expect("device present").push(n);
                    queue.push_back(n);
                }
            }
        }
        Ok(SpanningTree {
            root,
            parent,
            children,
        })
    }

    pub fn root(&self) -> DeviceId {
        self.root
    }

    pub fn parent(&self, d: DeviceId) -> Option<DeviceId> {
        self.parent.get(&d).copied()
    }

    pub fn children(&self, d: DeviceId) -> &[DeviceId] {
        self.children.get(&d).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn devices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.children.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Tree edges as (parent, child), ordered by child.
    pub fn edges(&self) -> impl Iterator<Item = (DeviceId, DeviceId)> + '_ {
        self.parent.iter().map(|(&c, &p)| (p, c))
    }

    /// All devices in the subtree of `d`, `d` included, ascending.
    pub fn subtree(&self, d: DeviceId) -> BTreeSet<DeviceId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![d];
        while let Some(x) = stack.pop() {
            out.insert(x);
            stack.extend_from_slice(self.children(x));
        }
        out
    }

    /// Path from the root to `d`, both included.
    pub fn path_from_root(&self, d: DeviceId) -> Option<Vec<DeviceId>> {
        if !self.children.contains_key(&d) {
            return None;
        }
        let mut path = vec![d];
        let mut cur = d;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// Number of tree edges between the root and `d`.
    pub fn depth(&self, d: DeviceId) -> Option<usize> {
        self.path_from_root(d).map(|p| p.len() - 1)
    }

    /// Root-to-leaf paths with the root left out, in depth-first order.
    pub fn root_paths(&self) -> Vec<Vec<DeviceId>> {
        fn walk(
            t: &SpanningTree,
            d: DeviceId,
            prefix: &mut Vec<DeviceId>,
            out: &mut Vec<Vec<DeviceId>>,
        ) {
            prefix.push(d);
            if t.children(d).is_empty() {
                out.push(prefix.clone());
            } else {
                for &c in t.children(d) {
                    walk(t, c, prefix, out);
                }
            }
            prefix.pop();
        }
        let mut out = Vec::new();
        for &c in self.children(self.root) {
            walk(self, c, &mut Vec::new(), &mut out);
        }
        out
    }

    /// For each child `k` of the root, the devices reachable through the
    /// Bell pair (root, k), i.e. the subtree of `k`.
    pub fn reach_sets(&self) -> BTreeMap<DeviceId, BTreeSet<DeviceId>> {
        self.children(self.root)
            .iter()
            .map(|&k| (k, self.subtree(k)))
            .collect()
    }

    /// Child of `d` whose subtree contains `target`, if any.
    pub fn next_hop(&self, d: DeviceId, target: DeviceId) -> Option<DeviceId> {
        self.children(d)
            .iter()
            .copied()
            .find(|&c| self.subtree(c).contains(&target))
    }
}

/// Breadth-first spanning tree rooted at `root`.
pub fn build_mst(topology: &Topology, root: DeviceId) -> Result<SpanningTree> {
    SpanningTree::bfs(topology, root)
}

/// Reach set of every Bell pair adjacent to the root.
pub fn reach_sets(tree: &SpanningTree) -> BTreeMap<DeviceId, BTreeSet<DeviceId>> {
    tree.reach_sets()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> Topology {
        Topology::new(
            1..=7,
            [(1, 2), (2, 3), (1, 7), (7, 5), (5, 4), (5, 6), (4, 6)],
        )
        .unwrap()
    }

    #[test]
    fn parses_minimal_file() {
        let t = Topology::parse("device 1\ndevice 2\nbell 1 2").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.edges().count(), 1);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert_eq!(
            Topology::parse("device 1\nbell 1 9").unwrap_err(),
            Error::UnknownDevice {
                device: 9,
                line: Some(2)
            }
        );
        assert_eq!(
            Topology::parse("device 1\ndevice 2\nbell 1 2\nbell 2 1").unwrap_err(),
            Error::DuplicateEdge {
                a: 1,
                b: 2,
                line: Some(4)
            }
        );
        assert!(matches!(
            Topology::parse("device 1\nlink 1 2"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            Topology::parse("device 0"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert_eq!(
            Topology::parse("device 1\ndevice 2\ndevice 3\nbell 1 2").unwrap_err(),
            Error::Disconnected {
                from: 1,
                unreachable: vec![3]
            }
        );
        assert!(matches!(
            Topology::parse("device 1\nbell 1 1"),
            Err(Error::SelfLoop { line: Some(2), .. })
        ));
        assert!(matches!(
            Topology::parse("# nothing\n"),
            Err(Error::EmptyTopology)
        ));
    }

    #[test]
    fn fig2_tree() {
        let tree = build_mst(&fig2(), 1).unwrap();
        assert_eq!(tree.children(1), &[2, 7]);
        assert_eq!(tree.children(2), &[3]);
        assert_eq!(tree.children(7), &[5]);
        assert_eq!(tree.children(5), &[4, 6]);
        assert_eq!(
            tree.root_paths(),
            vec![vec![2, 3], vec![7, 5, 4], vec![7, 5, 6]]
        );
        let reach = tree.reach_sets();
        assert_eq!(reach[&2], BTreeSet::from([2, 3]));
        assert_eq!(reach[&7], BTreeSet::from([4, 5, 6, 7]));
    }

    #[test]
    fn single_device_and_complete_graph() {
        let t = Topology::new([1], []).unwrap();
        let tree = build_mst(&t, 1).unwrap();
        assert_eq!(tree.edges().count(), 0);
        assert!(tree.reach_sets().is_empty());

        let k4 = Topology::new(1..=4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]).unwrap();
        let tree = build_mst(&k4, 1).unwrap();
        assert_eq!(tree.children(1), &[2, 3, 4]);
        assert!((2..=4).all(|d| tree.depth(d) == Some(1)));
    }

    #[test]
    fn unknown_root() {
        assert_eq!(
            build_mst(&fig2(), 9).unwrap_err(),
            Error::UnknownDevice {
                device: 9,
                line: None
            }
        );
    }

    #[test]
    fn star_reach_sets() {
        let t = Topology::new(1..=5, [(1, 2), (1, 3), (1, 4), (1, 5)]).unwrap();
        let reach = build_mst(&t, 1).unwrap().reach_sets();
        for k in 2..=5 {
            assert_eq!(reach[&k], BTreeSet::from([k]));
        }
    }

    #[test]
    fn dot_output() {
        let t = Topology::parse("device 1\ndevice 2\nbell 1 2").unwrap();
        let dot = t.to_dot(None);
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 1);

        let g = fig2();
        let tree = build_mst(&g, 1).unwrap();
        let dot = g.to_dot(Some(&tree));
        assert_eq!(dot.matches("[label=").count(), 7);
        assert_eq!(dot.matches("style=solid").count(), 6);
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert_eq!(dot, g.to_dot(Some(&build_mst(&g, 1).unwrap())));
    }

    #[test]
    fn addresses_follow_id_rank() {
        let t = Topology::new([10, 20, 30], [(10, 20), (20, 30)]).unwrap();
        assert_eq!(t.address_of(20), Some(2));
        assert_eq!(t.device_at(3), Some(30));
        assert_eq!(t.device_at(0), None);
    }
}
