//! Address-driven execution against execution driven by one superposed
//! task state.
//!
//! The address path loads a quantum-encoded request next to the address
//! state and lets every device select itself and run the requested ops. The
//! task path flattens every (request term `i`, address branch `j`) pair into
//! one task index `k` and has each device run the program of every task in
//! which it holds the requested address, controlled on the task register.
//! Both paths keep the network state. The `n` replicated copies of the task
//! label are represented by the single `task` register.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::addressing::{
    work_site, AddressBook, Encoding, NetworkUnderTest, OpCode, Request, RequestSites, RequestTerm,
};
use crate::error::{Error, Result};
use crate::routing::fmt_real;
use crate::scalar::Real;
use crate::statevec::{seeded_rng, Labels, RegisterLayout, SiteId, SparseState};
use crate::topology::DeviceId;

/// One flattened task.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskTerm<T: Real> {
    pub gamma: Complex<T>,
    /// Index of the request term.
    pub request: usize,
    /// Index of the address branch.
    pub branch: usize,
    /// Requested address.
    pub target: u32,
    /// Address of every device in this branch, ascending device order.
    pub addresses: Vec<u32>,
    pub program: Vec<OpCode>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskState<T: Real> {
    devices: Vec<DeviceId>,
    terms: Vec<TaskTerm<T>>,
}

impl<T: Real> TaskState<T> {
    pub fn terms(&self) -> &[TaskTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn devices(&self) -> &[DeviceId] {
        &self.devices
    }

    /// Number of logical copies of each task label, one per device.
    pub fn replication(&self) -> usize {
        self.devices.len()
    }

    pub fn task_site() -> SiteId {
        SiteId::from("task")
    }

    pub fn task_dim(&self) -> usize {
        self.terms.len().max(2)
    }

    /// `Σ_k γ_k |k⟩` on the task register.
    pub fn state(&self) -> Result<SparseState<T>> {
        let layout = RegisterLayout::new([(Self::task_site(), self.task_dim())])?;
        SparseState::from_amplitudes(
            layout,
            self.terms
                .iter()
                .enumerate()
                .map(|(k, t)| (vec![k as u32], t.gamma)),
        )
    }

    /// Flat index of request term `i` in address branch `j`.
    pub fn index_of(&self, target: u32, addresses: &[u32]) -> Option<usize> {
        self.terms
            .iter()
            .position(|t| t.target == target && t.addresses == addresses)
    }
}

/// `|ψ_R⟩ ⊗ |ψ_A⟩ ⊗ |ψ_N⟩` with the request quantum-encoded on the round-0
/// request sites.
pub fn compose_overall_state<T: Real>(
    request: &Request<T>,
    book: &AddressBook<T>,
    network: &SparseState<T>,
) -> Result<SparseState<T>> {
    let sites = RequestSites::for_round(0, request.slots());
    request
        .state_on(Encoding::Quantum, book.addr_dim(), &sites)?
        .tensor(&book.state()?)?
        .tensor(network)
}

fn normalized_request_weights<T: Real>(request: &Request<T>) -> Vec<Complex<T>> {
    let norm = request
        .terms()
        .iter()
        .map(|t| t.weight.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt();
    request.terms().iter().map(|t| t.weight / norm).collect()
}

/// Flattens request terms and address branches into task terms
/// `γ_k = α_i β_j`, `k = i · branches + j`.
pub fn derive_task_state<T: Real>(
    request: &Request<T>,
    book: &AddressBook<T>,
) -> Result<TaskState<T>> {
    if request.is_empty() {
        return Err(Error::NoRequest);
    }
    request.check_range(book.n())?;
    let alphas = normalized_request_weights(request);
    let branches = book.branches();
    let mut terms = Vec::with_capacity(alphas.len() * branches.len());
    for (i, alpha) in alphas.iter().enumerate() {
        for (j, (beta, addresses)) in branches.iter().enumerate() {
            terms.push(TaskTerm {
                gamma: *alpha * *beta,
                request: i,
                branch: j,
                target: request.terms()[i].target,
                addresses: addresses.clone(),
                program: request.padded_program(i),
            });
        }
    }
    Ok(TaskState {
        devices: book.devices().to_vec(),
        terms,
    })
}

/// Runs every task on `|task⟩ ⊗ |ψ_N⟩`: device `d` applies the program of
/// task `k` to its work qubit, controlled on the task register reading `k`,
/// whenever it holds the requested address in that task.
pub fn process_via_task_state<T: Real>(
    tasks: &TaskState<T>,
    network: &SparseState<T>,
    order: &[DeviceId],
) -> Result<SparseState<T>> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != tasks.devices || order.len() != tasks.devices.len() {
        return Err(Error::BadOrder);
    }
    let task = TaskState::<T>::task_site();
    let mut state = tasks.state()?.tensor(network)?;
    for &d in order {
        let pos = tasks
            .devices
            .iter()
            .position(|&x| x == d)
            .expect("device in order");
        for (k, term) in tasks.terms.iter().enumerate() {
            if term.addresses[pos] != term.target {
                continue;
            }
            for &op in &term.program {
                if op == OpCode::I {
                    continue;
                }
                state =
                    state.apply_controlled(&[(task.clone(), k as u32)], &op.gate(work_site(d)))?;
            }
        }
    }
    Ok(state)
}

/// Per-task comparison of the two executions.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchDiff {
    pub k: usize,
    pub target: u32,
    pub addresses: Vec<u32>,
    pub program: Vec<OpCode>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub fidelity: f64,
    pub branches: Vec<BranchDiff>,
}

impl EquivalenceReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.fidelity >= 1.0 - tol && self.branches.iter().all(|b| b.matches)
    }
}

impl std::fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.branches {
            let addr: Vec<String> = b.addresses.iter().map(u32::to_string).collect();
            let prog: Vec<&str> = b.program.iter().map(|op| op.name()).collect();
            writeln!(
                f,
                "k={} addr=({};{}) program=({}) match={}",
                b.k,
                b.target,
                addr.join(","),
                prog.join(","),
                b.matches
            )?;
        }
        writeln!(f, "fidelity={}", fmt_real(self.fidelity))
    }
}

/// Relabels the address-path result `(req, ops, addr…, net…)` as
/// `(task, net…)` through the bijection (target, address tuple) ↔ k.
fn to_task_labels<T: Real>(
    state: &SparseState<T>,
    tasks: &TaskState<T>,
    slots: usize,
    network: &RegisterLayout,
) -> Result<SparseState<T>> {
    let n = tasks.devices.len();
    let layout =
        RegisterLayout::new([(TaskState::<T>::task_site(), tasks.task_dim())])?.concat(network)?;
    let mut terms: Vec<(Labels, Complex<T>)> = Vec::with_capacity(state.len());
    for (labels, &amp) in state.terms() {
        let target = labels[0];
        let addresses = &labels[1 + slots..1 + slots + n];
        let k = tasks.index_of(target, addresses).ok_or_else(|| {
            Error::RoutingInconsistency(format!(
                "no task for request {target} with addresses {addresses:?}"
            ))
        })?;
        let mut out = vec![k as u32];
        out.extend_from_slice(&labels[1 + slots + n..]);
        terms.push((out, amp));
    }
    SparseState::from_amplitudes(layout, terms)
}

/// Executes both paths and compares them.
pub fn check_equivalence<T: Real>(
    request: &Request<T>,
    book: &AddressBook<T>,
    network: &SparseState<T>,
    order: &[DeviceId],
) -> Result<EquivalenceReport> {
    let tasks = derive_task_state(request, book)?;
    let mut net = NetworkUnderTest::with_network_state(book.clone(), network.clone())?;
    let via_address = net.process_request(request, Encoding::Quantum, order)?;
    let mapped = to_task_labels(&via_address, &tasks, request.slots(), network.layout())?;
    let via_tasks = process_via_task_state(&tasks, network, order)?;
    let fidelity = mapped.fidelity(&via_tasks)?;

    let tol = T::NORM_TOL;
    let mut branches: Vec<BranchDiff> = tasks
        .terms
        .iter()
        .enumerate()
        .map(|(k, t)| BranchDiff {
            k,
            target: t.target,
            addresses: t.addresses.clone(),
            program: t.program.clone(),
            matches: true,
        })
        .collect();
    for (labels, a) in mapped.terms() {
        if (*a - via_tasks.amplitude(labels)).norm().as_f64() > tol {
            branches[labels[0] as usize].matches = false;
        }
    }
    for (labels, b) in via_tasks.terms() {
        if (mapped.amplitude(labels) - *b).norm().as_f64() > tol {
            branches[labels[0] as usize].matches = false;
        }
    }
    Ok(EquivalenceReport { fidelity, branches })
}

/// A randomized equivalence check input.
#[derive(Clone, Debug)]
pub struct EquivalenceInstance<T: Real> {
    pub request: Request<T>,
    pub book: AddressBook<T>,
    pub network: SparseState<T>,
    pub order: Vec<DeviceId>,
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn random_amp<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    loop {
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        if re * re + im * im > 1e-3 {
            return Complex::new(T::lit(re), T::lit(im));
        }
    }
}

/// Random request with `m` terms over `n` devices (ids `1..=n`): random
/// weights, distinct targets, programs of up to two catalog ops; product or
/// entangled addresses with equal odds; a random dense network state; a
/// shuffled processing order.
pub fn random_instance<T: Real, R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<EquivalenceInstance<T>> {
    if n == 0 || m == 0 || m > n || n > 6 {
        return Err(Error::RangeError(format!(
            "need 1 <= m <= n <= 6, got n={n} m={m}"
        )));
    }
    let devices: Vec<DeviceId> = (1..=n as u32).collect();
    let mut targets: Vec<u32> = devices.clone();
    targets.shuffle(rng);
    targets.truncate(m);
    let terms = targets
        .iter()
        .map(|&target| {
            let len = rng.random_range(0..=2);
            let program = (0..len)
                .map(|_| OpCode::ALL[rng.random_range(0..OpCode::COUNT)])
                .collect();
            RequestTerm {
                weight: random_amp(rng),
                target,
                program,
            }
        })
        .collect();
    let request = Request::new(terms)?;

    let mut perms = permutations(n as u32);
    let book = if rng.random_bool(0.5) {
        let p = perms.swap_remove(rng.random_range(0..perms.len()));
        AddressBook::product(devices.clone(), devices.iter().copied().zip(p).collect())?
    } else {
        perms.shuffle(rng);
        let count = rng.random_range(1..=perms.len().min(4));
        let mut chosen: Vec<Vec<u32>> = perms.into_iter().take(count).collect();
        chosen.sort();
        AddressBook::entangled(
            devices.clone(),
            chosen.into_iter().map(|p| (random_amp(rng), p)).collect(),
        )?
    };

    let work = RegisterLayout::new(devices.iter().map(|&d| (work_site(d), 2)))?;
    let network = SparseState::superpose(
        work,
        (0..1u32 << n).map(|x| {
            let labels: Labels = (0..n).rev().map(|b| (x >> b) & 1).collect();
            (random_amp::<T, R>(rng), labels)
        }),
    )?;
    let mut order = devices;
    order.shuffle(rng);
    Ok(EquivalenceInstance {
        request,
        book,
        network,
        order,
    })
}

/// Instance for `trial` of a sweep seeded with `seed`.
pub fn seeded_instance<T: Real>(
    n: usize,
    m: usize,
    seed: u64,
    trial: u64,
) -> Result<EquivalenceInstance<T>> {
    let mut rng = seeded_rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(trial));
    random_instance(n, m, &mut rng)
}
