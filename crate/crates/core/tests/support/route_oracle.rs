//! Independent model of a route: breadth-first trees with ascending-id
//! tie-break, and the chance that a routing query succeeds, obtained by
//! counting tree leaves. Every branch of a routing state is one
//! root-to-leaf path. In a distributed state a query at `h` for `t`
//! succeeds on the branches whose path continues from `h` towards `t`; in a
//! local state only on the paths that pass through `t` itself.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use qnet_core::routing::{RouteMode, TeleportJob};

pub struct OracleTree {
    pub root: u32,
    pub parent: BTreeMap<u32, u32>,
    pub children: BTreeMap<u32, Vec<u32>>,
}

pub fn bfs(edges: &[(u32, u32)], root: u32) -> OracleTree {
    let mut adj: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let mut parent = BTreeMap::new();
    let mut children: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        children.entry(v).or_default();
        for &w in adj.get(&v).into_iter().flatten() {
            if seen.insert(w) {
                parent.insert(w, v);
                children.entry(v).or_default().push(w);
                queue.push_back(w);
            }
        }
    }
    OracleTree {
        root,
        parent,
        children,
    }
}

impl OracleTree {
    pub fn leaves_under(&self, d: u32) -> usize {
        let kids = &self.children[&d];
        if kids.is_empty() {
            1
        } else {
            kids.iter().map(|&c| self.leaves_under(c)).sum()
        }
    }

    pub fn path_to(&self, t: u32) -> Vec<u32> {
        let mut p = vec![t];
        let mut v = t;
        while let Some(&u) = self.parent.get(&v) {
            p.push(u);
            v = u;
        }
        p.reverse();
        p
    }

    pub fn next_toward(&self, h: u32, t: u32) -> u32 {
        let p = self.path_to(t);
        let i = p.iter().position(|&x| x == h).expect("holder on the path");
        p[i + 1]
    }
}

/// Checks every selection attempt of `job` against the leaf-counting model
/// and the hop sequence against the tree path. Returns the largest
/// probability deviation.
pub fn check_job(edges: &[(u32, u32)], job: &TeleportJob<f64>) -> Result<f64, String> {
    let src_tree = bfs(edges, job.source);
    let path = src_tree.path_to(job.target);
    if job.path() != path {
        return Err(format!("path {:?}, tree path {:?}", job.path(), path));
    }
    let mut worst: f64 = 0.0;
    let mut fresh = true;
    for hop in &job.hops {
        let h = hop.sender;
        for (a, attempt) in hop.attempts.iter().enumerate() {
            let expected = match job.mode {
                RouteMode::Local => {
                    // a local branch lists only the devices on its own path
                    let t = bfs(edges, h);
                    t.leaves_under(job.target) as f64 / t.leaves_under(h) as f64
                }
                RouteMode::Distributed => {
                    let k = src_tree.next_toward(h, job.target);
                    let alive = if a == 0 && !fresh {
                        src_tree.leaves_under(h)
                    } else {
                        src_tree.leaves_under(src_tree.root)
                    };
                    src_tree.leaves_under(k) as f64 / alive as f64
                }
            };
            worst = worst
                .max((attempt.success_probability - expected).abs())
                .max((attempt.expected_success - expected).abs());
            let last = a + 1 == hop.attempts.len();
            if last != attempt.outcome.is_some() {
                return Err(format!(
                    "attempt {a} at {h} has outcome {:?}",
                    attempt.outcome
                ));
            }
        }
        fresh = false;
        if hop.attempts.last().and_then(|x| x.outcome) != Some(hop.receiver) {
            return Err(format!(
                "hop {h}->{} not selected by the ancilla",
                hop.receiver
            ));
        }
    }
    Ok(worst)
}
