//! Address states, request states and controlled task execution.
//!
//! Each device owns an address register (`addr.<d>`) and a work qubit
//! (`work.<d>`). A request register travels from device to device; a device
//! XORs it into its own address register ("selection"), so exactly the
//! request terms that name the device's address read 0 there. Operations are
//! then applied to the work qubit controlled on that 0, and a second XOR
//! restores the address register.

mod catalog;
mod request;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;

pub use catalog::OpCode;
pub use request::{build_request_state, Encoding, Request, RequestSites, RequestTerm};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevec::{RegisterLayout, SiteId, SparseState};
use crate::topology::DeviceId;

/// Register dimension for addresses of an `n`-device network.
///
/// Value 0 marks a selected device, `1..=n` are addresses and `n + 1` is the
/// padding value used by routing states.
pub fn addr_dim(n: usize) -> usize {
    (n + 2).next_power_of_two()
}

pub fn addr_site(d: DeviceId) -> SiteId {
    SiteId::new(format!("addr.{d}"))
}

pub fn work_site(d: DeviceId) -> SiteId {
    SiteId::new(format!("work.{d}"))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Assignment<T: Real> {
    /// Every device holds one definite address.
    Product(BTreeMap<DeviceId, u32>),
    /// Superposition of address permutations; entry `p` of a permutation is
    /// the address of the `p`-th device in ascending id order.
    Entangled(Vec<(Complex<T>, Vec<u32>)>),
}

/// Which logical addresses the devices hold.
#[derive(Clone, Debug, PartialEq)]
pub struct AddressBook<T: Real> {
    devices: Vec<DeviceId>,
    addr_dim: usize,
    assignment: Assignment<T>,
}

fn sorted_devices(devices: impl IntoIterator<Item = DeviceId>) -> Result<Vec<DeviceId>> {
    let set: BTreeSet<DeviceId> = devices.into_iter().collect();
    if set.is_empty() {
        return Err(Error::BadAssignment("no devices".into()));
    }
    if set.contains(&0) {
        return Err(Error::BadAssignment("device id 0 is reserved".into()));
    }
    Ok(set.into_iter().collect())
}

impl<T: Real> AddressBook<T> {
    pub fn product(
        devices: impl IntoIterator<Item = DeviceId>,
        addresses: BTreeMap<DeviceId, u32>,
    ) -> Result<Self> {
        let devices = sorted_devices(devices)?;
        let n = devices.len();
        for d in &devices {
            match addresses.get(d) {
                Some(&a) if a >= 1 && a as usize <= n => {}
                Some(&a) => {
                    return Err(Error::BadAssignment(format!(
                        "address {a} of device {d} outside [1, {n}]"
                    )))
                }
                None => return Err(Error::BadAssignment(format!("device {d} has no address"))),
            }
        }
        if addresses.len() != n {
            return Err(Error::BadAssignment(
                "addresses given for unknown devices".into(),
            ));
        }
        Ok(AddressBook {
            devices,
            addr_dim: addr_dim(n),
            assignment: Assignment::Product(addresses),
        })
    }

    /// Product assignment giving the `p`-th device (ascending id) address `p + 1`.
    pub fn identity(devices: impl IntoIterator<Item = DeviceId>) -> Result<Self> {
        let devices = sorted_devices(devices)?;
        let map = devices
            .iter()
            .enumerate()
            .map(|(p, &d)| (d, p as u32 + 1))
            .collect();
        Self::product(devices, map)
    }

    pub fn entangled(
        devices: impl IntoIterator<Item = DeviceId>,
        branches: Vec<(Complex<T>, Vec<u32>)>,
    ) -> Result<Self> {
        let devices = sorted_devices(devices)?;
        let n = devices.len();
        if branches.is_empty() {
            return Err(Error::BadAssignment("no address branches".into()));
        }
        let expected: BTreeSet<u32> = (1..=n as u32).collect();
        let mut seen = BTreeSet::new();
        for (w, perm) in &branches {
            if w.norm().as_f64() < T::PRUNE {
                return Err(Error::BadAssignment("zero branch weight".into()));
            }
            let values: BTreeSet<u32> = perm.iter().copied().collect();
            if perm.len() != n || values != expected {
                return Err(Error::BadAssignment(format!(
                    "{perm:?} is not a permutation of 1..={n}"
                )));
            }
            if !seen.insert(perm.clone()) {
                return Err(Error::BadAssignment(format!(
                    "permutation {perm:?} repeated"
                )));
            }
        }
        Ok(AddressBook {
            devices,
            addr_dim: addr_dim(n),
            assignment: Assignment::Entangled(branches),
        })
    }

    /// Uniform superposition of all cyclic shifts of the identity assignment;
    /// for three devices `|1,2,3⟩ + |2,3,1⟩ + |3,1,2⟩`.
    pub fn cyclic(devices: impl IntoIterator<Item = DeviceId>) -> Result<Self> {
        let devices = sorted_devices(devices)?;
        let n = devices.len() as u32;
        let branches = (0..n)
            .map(|s| {
                let perm = (0..n).map(|p| (p + s) % n + 1).collect();
                (Complex::new(T::one(), T::zero()), perm)
            })
            .collect();
        Self::entangled(devices, branches)
    }

    pub fn devices(&self) -> &[DeviceId] {
        &self.devices
    }

    pub fn n(&self) -> usize {
        self.devices.len()
    }

    pub fn addr_dim(&self) -> usize {
        self.addr_dim
    }

    pub fn assignment(&self) -> &Assignment<T> {
        &self.assignment
    }

    /// Normalized address branches as (amplitude, address tuple in device order).
    pub fn branches(&self) -> Vec<(Complex<T>, Vec<u32>)> {
        match &self.assignment {
            Assignment::Product(map) => vec![(
                Complex::new(T::one(), T::zero()),
                self.devices.iter().map(|d| map[d]).collect(),
            )],
            Assignment::Entangled(branches) => {
                let norm = branches
                    .iter()
                    .map(|(w, _)| w.norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt();
                branches
                    .iter()
                    .map(|(w, p)| (*w / norm, p.clone()))
                    .collect()
            }
        }
    }

    /// Every address `d` holds in some branch.
    pub fn possible_addresses(&self, d: DeviceId) -> BTreeSet<u32> {
        let Some(pos) = self.devices.iter().position(|&x| x == d) else {
            return BTreeSet::new();
        };
        self.branches().into_iter().map(|(_, p)| p[pos]).collect()
    }

    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout::new(self.devices.iter().map(|&d| (addr_site(d), self.addr_dim)))
            .expect("distinct device sites")
    }

    pub fn state(&self) -> Result<SparseState<T>> {
        SparseState::superpose(self.layout(), self.branches())
    }
}

/// Shared address state of a book.
pub fn build_address_state<T: Real>(book: &AddressBook<T>) -> Result<SparseState<T>> {
    book.state()
}

/// Program each device runs under classical encoding. Fails when a device
/// could hold addresses whose requested programs differ.
pub fn classical_plan<T: Real>(
    req: &Request<T>,
    book: &AddressBook<T>,
) -> Result<BTreeMap<DeviceId, Vec<OpCode>>> {
    let mut plan = BTreeMap::new();
    for &d in book.devices() {
        let programs: BTreeSet<Vec<OpCode>> = book
            .possible_addresses(d)
            .into_iter()
            .filter_map(|a| req.term_for(a))
            .map(|i| req.padded_program(i))
            .collect();
        if programs.len() > 1 {
            return Err(Error::NotClassicallyExpressible(d));
        }
        plan.insert(d, programs.into_iter().next().unwrap_or_default());
    }
    Ok(plan)
}

#[derive(Clone, Debug)]
struct Loaded {
    sites: RequestSites,
    encoding: Encoding,
    plan: BTreeMap<DeviceId, Vec<OpCode>>,
}

/// A network of devices holding address registers and work qubits, together
/// with the global state of everything loaded into it.
#[derive(Clone, Debug)]
pub struct NetworkUnderTest<T: Real> {
    book: AddressBook<T>,
    state: SparseState<T>,
    rounds: usize,
    loaded: Option<Loaded>,
}

impl<T: Real> NetworkUnderTest<T> {
    /// Address state together with all work qubits in `|0⟩`.
    pub fn new(book: AddressBook<T>) -> Result<Self> {
        let work = RegisterLayout::new(book.devices().iter().map(|&d| (work_site(d), 2)))?;
        let zeros = vec![0; book.n()];
        let network = SparseState::basis(work, &zeros)?;
        Self::with_network_state(book, network)
    }

    /// Address state together with a custom network state, which must
    /// contain a qubit `work.<d>` for every device.
    pub fn with_network_state(book: AddressBook<T>, network: SparseState<T>) -> Result<Self> {
        for &d in book.devices() {
            let site = work_site(d);
            match network.layout().dim(&site) {
                Some(2) => {}
                Some(k) => return Err(Error::DimMismatch(format!("`{site}` has dimension {k}"))),
                None => return Err(Error::UnknownSite(site.to_string())),
            }
        }
        let state = book.state()?.tensor(&network)?;
        Ok(NetworkUnderTest {
            book,
            state,
            rounds: 0,
            loaded: None,
        })
    }

    pub fn book(&self) -> &AddressBook<T> {
        &self.book
    }

    pub fn devices(&self) -> &[DeviceId] {
        self.book.devices()
    }

    pub fn state(&self) -> &SparseState<T> {
        &self.state
    }

    pub fn into_state(self) -> SparseState<T> {
        self.state
    }

    pub fn request_sites(&self) -> Option<&RequestSites> {
        self.loaded.as_ref().map(|l| &l.sites)
    }

    fn check_device(&self, d: DeviceId) -> Result<()> {
        if self.book.devices().contains(&d) {
            Ok(())
        } else {
            Err(Error::UnknownDevice {
                device: d,
                line: None,
            })
        }
    }

    /// Prepends a fresh request state to the global state.
    pub fn load_request(&mut self, req: &Request<T>, encoding: Encoding) -> Result<()> {
        req.check_range(self.book.n())?;
        let plan = match encoding {
            Encoding::Classical => classical_plan(req, &self.book)?,
            Encoding::Quantum => BTreeMap::new(),
        };
        let slots = match encoding {
            Encoding::Classical => 0,
            Encoding::Quantum => req.slots(),
        };
        let sites = RequestSites::for_round(self.rounds, slots);
        let request_state = req.state_on(encoding, self.book.addr_dim(), &sites)?;
        self.state = request_state.tensor(&self.state)?;
        self.rounds += 1;
        self.loaded = Some(Loaded {
            sites,
            encoding,
            plan,
        });
        Ok(())
    }

    fn loaded(&self) -> Result<&Loaded> {
        self.loaded.as_ref().ok_or(Error::NoRequest)
    }

    /// XORs the request target register into the device's address register.
    pub fn select_device(&mut self, d: DeviceId) -> Result<()> {
        self.check_device(d)?;
        let src = self.loaded()?.sites.address.clone();
        self.state = self.state.xor_add(&src, &addr_site(d))?;
        Ok(())
    }

    /// Undoes [`NetworkUnderTest::select_device`]; the two are the same XOR.
    pub fn deselect_device(&mut self, d: DeviceId) -> Result<()> {
        self.select_device(d)
    }

    /// Applies `op` to the device's work qubit in the terms where its
    /// address register reads 0.
    pub fn apply_controlled_task_classical(&mut self, d: DeviceId, op: OpCode) -> Result<()> {
        self.check_device(d)?;
        let gate = op.gate::<T>(work_site(d));
        self.state = self.state.apply_controlled(&[(addr_site(d), 0)], &gate)?;
        Ok(())
    }

    /// For every op slot in order and every catalog entry, applies that entry
    /// to the work qubit where the device is selected and the slot holds it.
    pub fn apply_controlled_task_quantum(&mut self, d: DeviceId) -> Result<()> {
        self.check_device(d)?;
        let loaded = self.loaded()?;
        if loaded.encoding != Encoding::Quantum {
            return Err(Error::NoRequest);
        }
        let ops = loaded.sites.ops.clone();
        let mut state = self.state.clone();
        for slot in &ops {
            for op in OpCode::ALL.into_iter().filter(|&op| op != OpCode::I) {
                let gate = op.gate::<T>(work_site(d));
                state = state
                    .apply_controlled(&[(addr_site(d), 0), (slot.clone(), op.code())], &gate)?;
            }
        }
        self.state = state;
        Ok(())
    }

    /// Loads `req` and lets every device in `order` select, execute and
    /// deselect. Returns the final global state.
    pub fn process_request(
        &mut self,
        req: &Request<T>,
        encoding: Encoding,
        order: &[DeviceId],
    ) -> Result<SparseState<T>> {
        let given: BTreeSet<DeviceId> = order.iter().copied().collect();
        let all: BTreeSet<DeviceId> = self.devices().iter().copied().collect();
        if given != all || order.len() != all.len() {
            return Err(Error::BadOrder);
        }
        self.load_request(req, encoding)?;
        for &d in order {
            self.select_device(d)?;
            match encoding {
                Encoding::Classical => {
                    let program = self.loaded()?.plan.get(&d).cloned().unwrap_or_default();
                    for op in program {
                        self.apply_controlled_task_classical(d, op)?;
                    }
                }
                Encoding::Quantum => self.apply_controlled_task_quantum(d)?,
            }
            self.deselect_device(d)?;
        }
        Ok(self.state.clone())
    }
}

/// Runs `req` under both encodings on copies of `network` and returns the
/// fidelity of the two final states. The op registers of the quantum run are
/// a function of the target register, so they are dropped before comparing.
pub fn compare_encodings<T: Real>(
    req: &Request<T>,
    book: &AddressBook<T>,
    network: &SparseState<T>,
    order: &[DeviceId],
) -> Result<f64> {
    let classical = NetworkUnderTest::with_network_state(book.clone(), network.clone())?
        .process_request(req, Encoding::Classical, order)?;
    let quantum = NetworkUnderTest::with_network_state(book.clone(), network.clone())?
        .process_request(req, Encoding::Quantum, order)?;
    let slots = req.slots();
    let stripped = SparseState::from_amplitudes(
        classical.layout().clone(),
        quantum.terms().map(|(l, a)| {
            let mut keep = vec![l[0]];
            keep.extend_from_slice(&l[1 + slots..]);
            (keep, *a)
        }),
    )?;
    classical.fidelity(&stripped)
}
