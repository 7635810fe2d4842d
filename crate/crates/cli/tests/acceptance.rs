//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

#[path = "../../core/tests/support/dense_cases.rs"]
#[allow(dead_code)]
mod dense_cases;
#[path = "../../core/tests/support/route_oracle.rs"]
#[allow(dead_code)]
mod route_oracle;

use std::collections::BTreeSet;
use std::time::Instant;

use num_complex::Complex64;
use qnet_core::addressing::{
    compare_encodings, work_site, AddressBook, Encoding, NetworkUnderTest, OpCode, Request,
    RequestTerm,
};
use qnet_core::equivalence::{check_equivalence, seeded_instance};
use qnet_core::routing::{
    build_distributed_mst_state, build_local_routing_state, build_simplified_routing_state,
    measure_routing_cost, report_routing_cost, route, RouteConfig, RouteMode, RoutingKind,
    SelectionMode,
};
use qnet_core::scenarios::{load_figure_fixture, run_overlay_protocol, OverlayFixture};
use qnet_core::statevec::{RegisterLayout, SparseState};
use qnet_core::topology::Topology;
use qnet_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn random_amp(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_network(n: usize, rng: &mut ChaCha8Rng) -> SparseState<f64> {
    let layout = RegisterLayout::new((1..=n as u32).map(|d| (work_site(d), 2))).unwrap();
    SparseState::superpose(
        layout,
        (0..1u32 << n).map(|x| {
            let labels: Vec<u32> = (0..n).rev().map(|b| (x >> b) & 1).collect();
            (random_amp(rng), labels)
        }),
    )
    .unwrap()
}

fn criterion_1() -> Check {
    let f2 = load_figure_fixture("fig2").map_err(err)?;
    let tree = f2.tree().map_err(err)?;
    let (local, _) = build_local_routing_state::<f64>(&tree).map_err(err)?;
    let (simple, _) = build_simplified_routing_state::<f64>(&tree).map_err(err)?;
    let fl = local
        .fidelity(f2.golden(RoutingKind::Local).unwrap())
        .map_err(err)?;
    let fs = simple
        .fidelity(f2.golden(RoutingKind::Simplified).unwrap())
        .map_err(err)?;
    ensure(fl >= 1.0 - TOL && fs >= 1.0 - TOL, || {
        format!("local {fl}, simplified {fs}")
    })?;
    Ok(format!(
        "local fidelity {fl:.12}, simplified fidelity {fs:.12}"
    ))
}

fn criterion_2() -> Check {
    let f3 = load_figure_fixture("fig3").map_err(err)?;
    let (mst, layout) =
        build_distributed_mst_state::<f64>(&f3.tree().map_err(err)?).map_err(err)?;
    let f = mst
        .fidelity(f3.golden(RoutingKind::Distributed).unwrap())
        .map_err(err)?;
    ensure(f >= 1.0 - TOL, || format!("fidelity {f}"))?;
    Ok(format!(
        "fidelity {f:.12}, {} branches over {} registers",
        layout.branch_count(),
        layout.slots_per_branch()
    ))
}

fn criterion_3() -> Check {
    let f3 = load_figure_fixture("fig3").map_err(err)?;
    let edges: Vec<(u32, u32)> = f3.topology.edges().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut runs, mut worst_fid, mut worst_p, mut retries) = (0, 1.0f64, 0.0f64, 0);
    for s in 1..=8u32 {
        for t in (1..=8u32).filter(|&t| t != s) {
            let tree = route_oracle::bfs(&edges, s);
            let distance = tree.path_to(t).len() - 1;
            for k in 0..20u64 {
                let payload = [random_amp(&mut rng), random_amp(&mut rng)];
                let cfg = RouteConfig {
                    mode: RouteMode::Distributed,
                    selection: SelectionMode::Flag,
                    seed: u64::from(s) * 1000 + u64::from(t) * 20 + k,
                    ..RouteConfig::default()
                };
                let job = route(&f3.topology, s, t, payload, &cfg)
                    .map_err(|e| format!("{s}->{t}: {e}"))?;
                ensure(job.hop_count() == distance, || {
                    format!(
                        "{s}->{t}: {} hops, tree distance {distance}",
                        job.hop_count()
                    )
                })?;
                ensure(job.target_register_intact, || {
                    format!("{s}->{t}: target register damaged")
                })?;
                let dev =
                    route_oracle::check_job(&edges, &job).map_err(|m| format!("{s}->{t}: {m}"))?;
                worst_p = worst_p.max(dev);
                worst_fid = worst_fid.min(job.fidelity);
                retries += job.hops.iter().map(|h| h.attempts.len() - 1).sum::<usize>();
                runs += 1;
            }
        }
    }
    ensure(worst_fid >= 1.0 - TOL, || {
        format!("worst fidelity {worst_fid}")
    })?;
    ensure(worst_p <= TOL, || {
        format!("probability deviation {worst_p}")
    })?;
    Ok(format!(
        "{runs} routes, min fidelity {worst_fid:.12}, max probability deviation {worst_p:.1e}, {retries} re-queries"
    ))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 1.0f64;
    for trial in 0..1000 {
        let n = rng.random_range(1..=4usize);
        let devices: Vec<u32> = (1..=n as u32).collect();
        let book = match trial % 3 {
            0 => AddressBook::identity(devices.clone()),
            1 => AddressBook::cyclic(devices.clone()),
            _ => {
                let mut p = devices.clone();
                for k in 0..n {
                    p.swap(k, rng.random_range(k..n));
                }
                AddressBook::product(devices.clone(), devices.iter().copied().zip(p).collect())
            }
        }
        .map_err(err)?;
        let m = rng.random_range(1..=n);
        let req = Request::new(
            (1..=m as u32)
                .map(|t| RequestTerm {
                    weight: random_amp(&mut rng),
                    target: t,
                    program: vec![OpCode::ALL[rng.random_range(0..5)]],
                })
                .collect(),
        )
        .map_err(err)?;
        let mut net =
            NetworkUnderTest::with_network_state(book, random_network(n, &mut rng)).map_err(err)?;
        net.load_request(&req, Encoding::Quantum).map_err(err)?;
        let before = net.state().clone();
        let d = devices[rng.random_range(0..n)];
        net.select_device(d).map_err(err)?;
        net.select_device(d).map_err(err)?;
        worst = worst.min(net.state().fidelity(&before).map_err(err)?);
    }
    ensure(worst >= 1.0 - TOL, || format!("min fidelity {worst}"))?;
    Ok(format!("1000 states, min fidelity {worst:.12}"))
}

fn programs() -> Vec<Vec<OpCode>> {
    let mut out = vec![Vec::new()];
    for a in OpCode::ALL {
        out.push(vec![a]);
        for b in OpCode::ALL {
            out.push(vec![a, b]);
        }
    }
    out
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let progs = programs();
    let (mut compared, mut skipped, mut worst) = (0usize, 0usize, 1.0f64);
    for n in 1..=3usize {
        let devices: Vec<u32> = (1..=n as u32).collect();
        let network = random_network(n, &mut rng);
        let books = [
            AddressBook::identity(devices.clone()).map_err(err)?,
            AddressBook::cyclic(devices.clone()).map_err(err)?,
        ];
        let mut requests: Vec<Vec<(u32, Vec<OpCode>)>> = Vec::new();
        for t in 1..=n as u32 {
            for p in &progs {
                requests.push(vec![(t, p.clone())]);
            }
        }
        for t1 in 1..=n as u32 {
            for t2 in t1 + 1..=n as u32 {
                for p in &progs {
                    for q in &progs {
                        requests.push(vec![(t1, p.clone()), (t2, q.clone())]);
                    }
                }
            }
        }
        for terms in requests {
            let req = Request::<f64>::uniform(terms).map_err(err)?;
            for book in &books {
                match compare_encodings(&req, book, &network, &devices) {
                    Ok(f) => {
                        worst = worst.min(f);
                        compared += 1;
                    }
                    Err(Error::NotClassicallyExpressible(_)) => skipped += 1,
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    ensure(worst >= 1.0 - TOL, || format!("min fidelity {worst}"))?;
    Ok(format!(
        "{compared} requests compared, min fidelity {worst:.12} ({skipped} entangled-address requests not classically expressible)"
    ))
}

fn criterion_6() -> Check {
    let (mut worst, mut kinds) = (1.0f64, BTreeSet::new());
    for trial in 0..100u64 {
        let n = 1 + (trial % 3) as usize;
        let m = 1 + ((trial / 3) % n as u64) as usize;
        let inst = seeded_instance::<f64>(n, m, 6, trial).map_err(err)?;
        kinds.insert(inst.book.branches().len() > 1);
        let r = check_equivalence(&inst.request, &inst.book, &inst.network, &inst.order)
            .map_err(err)?;
        ensure(r.passed(TOL), || format!("trial {trial}:\n{r}"))?;
        worst = worst.min(r.fidelity);
    }
    ensure(kinds.len() == 2, || {
        "sweep did not cover both product and entangled addresses".into()
    })?;
    Ok(format!("100 instances, min fidelity {worst:.12}"))
}

fn criterion_7() -> Check {
    let good = run_overlay_protocol(&OverlayFixture::<f64>::standard()).map_err(err)?;
    ensure(good.fidelity >= 1.0 - TOL && good.address_intact, || {
        format!("fidelity {}", good.fidelity)
    })?;
    let bad = run_overlay_protocol(&OverlayFixture::<f64>::standard().perturbed(1)).map_err(err)?;
    ensure(bad.fidelity <= 0.99, || {
        format!("perturbed fidelity {}", bad.fidelity)
    })?;
    ensure(bad.offending == vec![1], || {
        format!("offending branches {:?}", bad.offending)
    })?;
    Ok(format!(
        "fidelity {:.12}; perturbed fidelity {:.6} with branch 2 reported",
        good.fidelity, bad.fidelity
    ))
}

fn criterion_8() -> Check {
    let mut worst = 0.0f64;
    for case in 0..500u64 {
        let r = dense_cases::run_case(8_000 + case, case as usize);
        ensure(r.deviation <= TOL, || {
            format!("case {case} {} on {:?}: {}", r.op, r.dims, r.deviation)
        })?;
        worst = worst.max(r.deviation);
    }
    Ok(format!(
        "500 cases over {} operations, max deviation {worst:.1e}",
        dense_cases::OPS.len()
    ))
}

fn criterion_9() -> Check {
    let mut fact: u128 = 1;
    for n in 1..=12usize {
        fact *= n as u128;
        let b = report_routing_cost(n).map_err(err)?;
        ensure(
            b.single_mst == fact && b.unified == n as u128 * fact,
            || format!("n={n}: got ({}, {})", b.single_mst, b.unified),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut most = 0usize;
    for _ in 0..200 {
        let n = rng.random_range(1..=8u32);
        let mut edges = Vec::new();
        for c in 2..=n {
            edges.push((rng.random_range(1..c), c));
        }
        for _ in 0..rng.random_range(0..n) {
            let (a, b) = (rng.random_range(1..=n), rng.random_range(1..=n));
            if a != b
                && !edges.contains(&(a.min(b), a.max(b)))
                && !edges.contains(&(a.max(b), a.min(b)))
            {
                edges.push((a.min(b), a.max(b)));
            }
        }
        let topo = Topology::new(1..=n, edges).map_err(err)?;
        let cost = measure_routing_cost(&topo).map_err(err)?;
        ensure(cost.within_bounds(), || format!("{cost:?}"))?;
        most = most.max(cost.max_mst_registers());
    }
    Ok(format!(
        "bounds exact for n <= 12; 200 random networks n <= 8, largest MST state {most} registers"
    ))
}

fn criterion_10() -> Check {
    let data = |f: &str| format!("{}/tests/data/{f}", env!("CARGO_MANIFEST_DIR"));
    let commands: Vec<Vec<String>> = vec![
        vec!["mst".into(), "builtin:fig3".into(), "--dot".into()],
        vec![
            "routing-state".into(),
            "builtin:fig3".into(),
            "--mode".into(),
            "unified".into(),
        ],
        vec![
            "route".into(),
            "builtin:fig3".into(),
            "--source".into(),
            "3".into(),
            "--target".into(),
            "8".into(),
            "--seed".into(),
            "42".into(),
        ],
        vec![
            "route".into(),
            "builtin:fig2".into(),
            "--source".into(),
            "4".into(),
            "--target".into(),
            "3".into(),
            "--routing".into(),
            "local".into(),
            "--seed".into(),
            "5".into(),
        ],
        vec![
            "--json".into(),
            "route".into(),
            "builtin:fig3".into(),
            "--source".into(),
            "8".into(),
            "--target".into(),
            "2".into(),
        ],
        vec![
            "request".into(),
            data("line3.topo"),
            data("x12.req"),
            "--encoding".into(),
            "both".into(),
            "--addresses".into(),
            "cyclic".into(),
        ],
        vec![
            "equivalence".into(),
            "--trials".into(),
            "20".into(),
            "--seed".into(),
            "77".into(),
        ],
        vec!["overlay".into(), "--perturb".into()],
    ];
    for args in &commands {
        let full = || std::iter::once("qnet".to_owned()).chain(args.iter().cloned());
        let a = qnet_cli::run(full());
        let b = qnet_cli::run(full());
        ensure(a == b, || {
            format!("`{}` differs between runs", args.join(" "))
        })?;
        ensure(!a.stdout.is_empty(), || {
            format!("`{}` printed nothing", args.join(" "))
        })?;
    }
    Ok(format!(
        "{} commands byte-identical across repeated runs",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden local and simplified routing states", criterion_1),
        ("golden MST state", criterion_2),
        ("routing end to end", criterion_3),
        ("selection involution", criterion_4),
        ("encoding equivalence", criterion_5),
        ("address/task equivalence", criterion_6),
        ("overlay", criterion_7),
        ("sparse versus dense reference", criterion_8),
        ("resource counts", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
