//! Randomized cross-checks of the sparse simulator against the dense
//! reference. Shared between the core integration tests and the acceptance
//! suite.

use std::collections::BTreeMap;

use num_complex::Complex64;
use qnet_core::statevec::{GateSpec, RegisterLayout, SiteId, SparseState};
use qnet_dense_oracle::{permutation_matrix, DenseState};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_TOTAL: usize = 1 << 12;
const DIMS: [usize; 6] = [2, 3, 4, 5, 8, 16];

pub const OPS: [&str; 9] = [
    "unitary",
    "controlled-unitary",
    "permutation",
    "xor-add",
    "walsh-hadamard",
    "measure",
    "marginal",
    "tensor",
    "inner",
];

#[derive(Debug)]
pub struct CaseResult {
    pub op: &'static str,
    pub dims: Vec<usize>,
    pub deviation: f64,
}

fn site(k: usize) -> SiteId {
    SiteId::new(format!("s{k}"))
}

fn amp(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_dims(rng: &mut ChaCha8Rng, limit: usize) -> Vec<usize> {
    let want = rng.random_range(1..=4);
    let mut dims = Vec::new();
    let mut total = 1;
    while dims.len() < want {
        let d = DIMS[rng.random_range(0..DIMS.len())];
        if total * d > limit {
            break;
        }
        total *= d;
        dims.push(d);
    }
    if dims.is_empty() {
        dims.push(2);
    }
    dims
}

fn random_pair(
    rng: &mut ChaCha8Rng,
    dims: &[usize],
    offset: usize,
) -> (SparseState<f64>, DenseState) {
    let total: usize = dims.iter().product();
    let count = rng.random_range(1..=total.min(48));
    let mut terms: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    while terms.len() < count {
        let labels: Vec<u32> = dims
            .iter()
            .map(|&d| rng.random_range(0..d as u32))
            .collect();
        terms.insert(labels, amp(rng));
    }
    let layout =
        RegisterLayout::new(dims.iter().enumerate().map(|(k, &d)| (site(k + offset), d))).unwrap();
    let sparse =
        SparseState::superpose(layout, terms.iter().map(|(l, a)| (*a, l.clone()))).unwrap();
    let mut dense = DenseState::from_terms(dims, terms.iter().map(|(l, a)| (l.as_slice(), *a)));
    dense.normalize();
    (sparse, dense)
}

pub fn to_dense(s: &SparseState<f64>) -> DenseState {
    let dims = s.layout().dims();
    DenseState::from_terms(&dims, s.terms().map(|(l, a)| (l.as_slice(), *a)))
}

fn deviation(s: &SparseState<f64>, d: &DenseState) -> f64 {
    assert_eq!(s.layout().dims(), d.dims, "layout dims");
    to_dense(s)
        .amps
        .iter()
        .zip(&d.amps)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

fn random_unitary(rng: &mut ChaCha8Rng, side: usize) -> Vec<Complex64> {
    qnet_dense_oracle::gram_schmidt(side, || amp(rng))
}

fn pick_targets(rng: &mut ChaCha8Rng, dims: &[usize], max_side: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dims.len()).collect();
    order.shuffle(rng);
    let want = rng.random_range(1..=2);
    let mut out = Vec::new();
    let mut side = 1;
    for k in order {
        if out.len() == want {
            break;
        }
        if side * dims[k] <= max_side {
            side *= dims[k];
            out.push(k);
        }
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

fn controls_for(rng: &mut ChaCha8Rng, dims: &[usize], targets: &[usize]) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for k in (0..dims.len()).filter(|k| !targets.contains(k)) {
        if rng.random_bool(0.5) {
            out.push((k, rng.random_range(0..dims[k] as u32)));
        }
    }
    out
}

fn apply_both(
    sparse: &SparseState<f64>,
    dense: &mut DenseState,
    controls: &[(usize, u32)],
    targets: &[usize],
    gate: &GateSpec<f64>,
    matrix: &[Complex64],
) -> SparseState<f64> {
    let sc: Vec<(SiteId, u32)> = controls.iter().map(|&(k, v)| (site(k), v)).collect();
    dense.apply(controls, targets, matrix);
    sparse.apply_controlled(&sc, gate).unwrap()
}

/// Runs one randomized case of operation `OPS[op]`.
pub fn run_case(seed: u64, op: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = OPS[op % OPS.len()];
    let dims = random_dims(&mut rng, MAX_TOTAL);
    let (sparse, mut dense) = random_pair(&mut rng, &dims, 0);
    let dev = match name {
        "unitary" | "controlled-unitary" => {
            let targets = pick_targets(&mut rng, &dims, 16);
            let side: usize = targets.iter().map(|&k| dims[k]).product();
            let m = random_unitary(&mut rng, side);
            let gate = GateSpec::unitary(
                targets.iter().map(|&k| (site(k), dims[k])).collect(),
                m.clone(),
            )
            .unwrap();
            let controls = if name == "unitary" {
                Vec::new()
            } else {
                controls_for(&mut rng, &dims, &targets)
            };
            let out = apply_both(&sparse, &mut dense, &controls, &targets, &gate, &m);
            deviation(&out, &dense)
        }
        "permutation" => {
            let targets = pick_targets(&mut rng, &dims, 64);
            let tdims: Vec<usize> = targets.iter().map(|&k| dims[k]).collect();
            let side: usize = tdims.iter().product();
            let mut table: Vec<usize> = (0..side).collect();
            table.shuffle(&mut rng);
            let gate = GateSpec::permutation_table(
                targets.iter().map(|&k| (site(k), dims[k])).collect(),
                table.clone(),
            )
            .unwrap();
            let helper = DenseState::zeros(&tdims);
            let m = permutation_matrix(&tdims, |l| helper.labels(table[helper.index(l)]));
            let controls = controls_for(&mut rng, &dims, &targets);
            let out = apply_both(&sparse, &mut dense, &controls, &targets, &gate, &m);
            deviation(&out, &dense)
        }
        "xor-add" => {
            let pairs: Vec<(usize, usize)> = (0..dims.len())
                .flat_map(|a| (0..dims.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| a != b && dims[a] == dims[b] && dims[a].is_power_of_two())
                .collect();
            match pairs.choose(&mut rng) {
                Some(&(a, b)) => {
                    let out = sparse.xor_add(&site(a), &site(b)).unwrap();
                    dense.apply_perm(&[], &[a, b], |l| vec![l[0], l[0] ^ l[1]]);
                    deviation(&out, &dense)
                }
                None => {
                    // no compatible pair: XOR a register into itself is not
                    // allowed, so check the involution on a fresh pair instead
                    let (s2, _) = random_pair(&mut rng, &[4, 4], 0);
                    let twice = s2
                        .xor_add(&site(0), &site(1))
                        .unwrap()
                        .xor_add(&site(0), &site(1))
                        .unwrap();
                    1.0 - twice.fidelity(&s2).unwrap()
                }
            }
        }
        "walsh-hadamard" => {
            let pow2: Vec<usize> = (0..dims.len())
                .filter(|&k| dims[k].is_power_of_two())
                .collect();
            match pow2.choose(&mut rng) {
                Some(&k) => {
                    let d = dims[k];
                    let scale = 1.0 / (d as f64).sqrt();
                    let m: Vec<Complex64> = (0..d * d)
                        .map(|i| {
                            let parity = ((i / d) & (i % d)).count_ones() % 2;
                            Complex64::new(if parity == 0 { scale } else { -scale }, 0.0)
                        })
                        .collect();
                    let gate = GateSpec::walsh_hadamard(site(k), d);
                    let out = apply_both(&sparse, &mut dense, &[], &[k], &gate, &m);
                    deviation(&out, &dense)
                }
                None => 0.0,
            }
        }
        "measure" => {
            let k = rng.random_range(0..dims.len());
            let m = sparse.measure_with(&[site(k)], &mut rng).unwrap();
            let p_dense = dense
                .marginal(&[k])
                .into_iter()
                .find(|(l, _)| *l == m.outcome)
                .map(|(_, p)| p)
                .unwrap();
            let (post, p) = dense.project(&[k], &m.outcome);
            let mut dev = (p - m.probability).abs().max((p_dense - p).abs());
            if !post.dims.is_empty() {
                dev = dev.max(deviation(&m.state, &post));
            }
            dev
        }
        "marginal" => {
            let mut ks: Vec<usize> = (0..dims.len()).filter(|_| rng.random_bool(0.6)).collect();
            if ks.is_empty() {
                ks.push(0);
            }
            let ids: Vec<SiteId> = ks.iter().map(|&k| site(k)).collect();
            let sparse_m = sparse.marginal(&ids).unwrap();
            dense
                .marginal(&ks)
                .into_iter()
                .map(|(l, p)| (sparse_m.get(&l).copied().unwrap_or(0.0) - p).abs())
                .fold(0.0, f64::max)
        }
        "tensor" => {
            let total: usize = dims.iter().product();
            let other_dims = random_dims(&mut rng, (MAX_TOTAL / total).max(2));
            let (s2, d2) = random_pair(&mut rng, &other_dims, dims.len());
            let out = sparse.tensor(&s2).unwrap();
            deviation(&out, &dense.tensor(&d2))
        }
        _ => {
            let (s2, d2) = random_pair(&mut rng, &dims, 0);
            let a = sparse.inner(&s2).unwrap();
            let b = dense.inner(&d2);
            (a - b)
                .norm()
                .max((sparse.fidelity(&s2).unwrap() - d2.fidelity(&dense)).abs())
        }
    };
    CaseResult {
        op: name,
        dims,
        deviation: dev,
    }
}
