use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use qnet_core::addressing::{
    addr_site, compare_encodings, work_site, AddressBook, Encoding, NetworkUnderTest, Request,
};
use qnet_core::equivalence::{check_equivalence, seeded_instance};
use qnet_core::routing::{
    build_unified_routing_state, distributed_mst_layout, local_routing_layout, route,
    simplified_routing_layout, RouteConfig, RouteMode, SelectionMode,
};
use qnet_core::scenarios::{figure_topology_text, run_overlay_protocol, OverlayFixture};
use qnet_core::statevec::{RegisterLayout, SiteId};
use qnet_core::topology::{DeviceId, SpanningTree, Topology};
use qnet_core::{Error, State};

use crate::report::{real, RunReport};
use crate::{Addresses, Cmd, EncodingArg, Routing, Selection, StateMode};

const TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io {
        path: String,
        source: std::io::Error,
    },
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                Error::RoutingInconsistency(_)
                | Error::SelectionExhausted { .. }
                | Error::SelectionNotDefinite(_)
                | Error::ResourceConsumed { .. }
                | Error::NoBellPair(..)
                | Error::NotClassicallyExpressible(_),
            ) => 1,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &str) -> Result<String> {
    if let Some(name) = path.strip_prefix("builtin:") {
        return Ok(figure_topology_text(name)?.to_owned());
    }
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_topology(path: &str) -> Result<Topology> {
    Ok(Topology::parse(&read(path)?)?)
}

fn device(topo: &Topology, d: DeviceId, what: &str) -> Result<DeviceId> {
    if topo.contains(d) {
        Ok(d)
    } else {
        Err(CliError::Usage(format!(
            "{what} {d} is not a device of the topology"
        )))
    }
}

fn list<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn amp(a: Complex64) -> String {
    format!("{},{}", real(a.re), real(a.im))
}

pub fn execute(cmd: Cmd, echo: String) -> Result<RunReport> {
    match cmd {
        Cmd::Mst {
            topology,
            root,
            dot,
        } => mst(&topology, root, dot, echo),
        Cmd::RoutingState {
            topology,
            device,
            mode,
        } => routing_state(&topology, device, mode, echo),
        Cmd::Route {
            topology,
            source,
            target,
            payload,
            seed,
            mode,
            routing,
            max_attempts,
        } => {
            let cfg = RouteConfig {
                mode: match routing {
                    Routing::Local => RouteMode::Local,
                    Routing::Distributed => RouteMode::Distributed,
                },
                selection: match mode {
                    Selection::Flag => SelectionMode::Flag,
                    Selection::Oracle => SelectionMode::Oracle,
                },
                seed,
                max_attempts,
            };
            route_cmd(&topology, source, target, payload, cfg, echo)
        }
        Cmd::Request {
            topology,
            request,
            encoding,
            order,
            addresses,
        } => request_cmd(
            &topology,
            &request,
            encoding,
            order.as_deref(),
            addresses,
            echo,
        ),
        Cmd::Equivalence {
            devices,
            terms,
            seed,
            trials,
        } => equivalence_cmd(devices, terms, seed, trials, echo),
        Cmd::Overlay { perturb, alphas } => overlay_cmd(perturb, alphas.as_deref(), echo),
    }
}

fn mst(path: &str, root: Option<u32>, dot: bool, echo: String) -> Result<RunReport> {
    let topo = load_topology(path)?;
    let root = match root {
        Some(r) => device(&topo, r, "root")?,
        None => topo.devices().next().expect("topologies are nonempty"),
    };
    let tree = SpanningTree::bfs(&topo, root)?;
    let mut report = RunReport::new(echo, None);
    if dot {
        for l in topo.to_dot(Some(&tree)).lines() {
            report.line(l);
        }
        return Ok(report);
    }
    let tree_edges: BTreeSet<(DeviceId, DeviceId)> =
        tree.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
    report.push("root", root);
    report.push("devices", topo.len());
    let mut parent_child: Vec<(DeviceId, DeviceId)> = tree.edges().collect();
    parent_child.sort_unstable();
    report.push(
        "tree_edges",
        list(parent_child.iter().map(|(p, c)| format!("{p}-{c}"))),
    );
    report.push(
        "non_tree_edges",
        list(
            topo.edges()
                .filter(|e| !tree_edges.contains(e))
                .map(|(a, b)| format!("{a}-{b}")),
        ),
    );
    for (k, set) in tree.reach_sets() {
        report.push(format!("reach.{k}"), list(set));
    }
    Ok(report)
}

fn routing_state(path: &str, dev: Option<u32>, mode: StateMode, echo: String) -> Result<RunReport> {
    let topo = load_topology(path)?;
    let mut report = RunReport::new(echo, None);
    if mode == StateMode::Unified {
        let trees = topo
            .devices()
            .map(|d| SpanningTree::bfs(&topo, d))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let unified = build_unified_routing_state::<f64>(&trees)?;
        let n = topo.len() as u32;
        let label = |v: u32| match topo.device_at(v) {
            Some(d) if v <= n => d.to_string(),
            _ => "⊥".to_owned(),
        };
        for (i, (labels, a)) in unified.state.terms().enumerate() {
            let mut line = format!("term {i} amp {} slots", amp(*a));
            for (reg, &v) in unified.registers.iter().zip(labels) {
                line.push_str(&format!(" {}:{}", reg.holder, label(v)));
            }
            line.push_str(" tags");
            for &v in &labels[unified.registers.len()..] {
                line.push_str(&format!(" {}", label(v)));
            }
            report.line(line);
        }
        return Ok(report);
    }
    let d = match dev {
        Some(d) => device(&topo, d, "device")?,
        None => return Err(CliError::Usage("--device is required for this mode".into())),
    };
    let tree = SpanningTree::bfs(&topo, d)?;
    let layout = match mode {
        StateMode::Local => local_routing_layout(&tree),
        StateMode::Simplified => simplified_routing_layout(&tree),
        _ => distributed_mst_layout(&tree),
    };
    let state = layout.state::<f64>()?;
    for l in layout.dump(&state).lines() {
        report.line(l);
    }
    if report.body.is_empty() {
        report.line(format!("empty routing state for device {d}"));
    }
    Ok(report)
}

fn route_cmd(
    path: &str,
    source: u32,
    target: u32,
    payload: [Complex64; 2],
    cfg: RouteConfig,
    echo: String,
) -> Result<RunReport> {
    let topo = load_topology(path)?;
    device(&topo, source, "source")?;
    device(&topo, target, "target")?;
    if source == target {
        return Err(CliError::Usage("source and target must differ".into()));
    }
    let job = route(&topo, source, target, payload, &cfg)?;
    let mut report = RunReport::new(echo, Some(cfg.seed));
    report.push("source", source);
    report.push("target", target);
    report.push(
        "routing",
        match cfg.mode {
            RouteMode::Local => "local",
            RouteMode::Distributed => "distributed",
        },
    );
    report.push(
        "selection",
        match cfg.selection {
            SelectionMode::Flag => "flag",
            SelectionMode::Oracle => "oracle",
        },
    );
    report.push("path", list(job.path()));
    report.push("hops", job.hop_count());
    for (i, hop) in job.hops.iter().enumerate() {
        let h = i + 1;
        report.push(
            format!("hop.{h}"),
            format!("{}->{}", hop.sender, hop.receiver),
        );
        for (a, at) in hop.attempts.iter().enumerate() {
            let outcome = at.outcome.map_or("⊥".to_owned(), |d| d.to_string());
            report.push(
                format!("hop.{h}.attempt.{}", a + 1),
                format!(
                    "outcome={outcome} p_outcome={} p_success={} expected={}",
                    real(at.probability),
                    real(at.success_probability),
                    real(at.expected_success)
                ),
            );
        }
        report.push(
            format!("hop.{h}.corrections"),
            hop.outcomes
                .iter()
                .map(|o| format!("ch{}:x={},z={}", o.channel, o.x, o.z))
                .collect::<Vec<_>>()
                .join(";"),
        );
    }
    report.push("fidelity", real(job.fidelity));
    report.push("target_intact", job.target_register_intact);
    if job.fidelity < 1.0 - TOL || !job.target_register_intact {
        report.fail();
    }
    Ok(report)
}

fn parse_order(text: &str) -> Result<Vec<DeviceId>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad device id `{s}` in --order")))
        })
        .collect()
}

fn request_cmd(
    path: &str,
    request_path: &str,
    encoding: EncodingArg,
    order: Option<&str>,
    addresses: Addresses,
    echo: String,
) -> Result<RunReport> {
    let topo = load_topology(path)?;
    let req = Request::<f64>::parse(&read(request_path)?)?;
    let devices: Vec<DeviceId> = topo.devices().collect();
    let order = match order {
        Some(o) => parse_order(o)?,
        None => devices.clone(),
    };
    let book = match addresses {
        Addresses::Identity => AddressBook::identity(devices.clone())?,
        Addresses::Cyclic => AddressBook::cyclic(devices.clone())?,
    };
    let encodings: &[(Encoding, &str)] = match encoding {
        EncodingArg::Classical => &[(Encoding::Classical, "classical")],
        EncodingArg::Quantum => &[(Encoding::Quantum, "quantum")],
        EncodingArg::Both => &[
            (Encoding::Classical, "classical"),
            (Encoding::Quantum, "quantum"),
        ],
    };
    let mut report = RunReport::new(echo, None);
    report.push("devices", list(&devices));
    report.push(
        "addresses",
        match addresses {
            Addresses::Identity => "identity",
            Addresses::Cyclic => "cyclic",
        },
    );
    report.push("order", list(&order));
    report.push("request_terms", req.terms().len());
    let network = State::basis(
        RegisterLayout::new(devices.iter().map(|&d| (work_site(d), 2)))?,
        &vec![0; devices.len()],
    )?;
    for &(enc, name) in encodings {
        let mut net = NetworkUnderTest::with_network_state(book.clone(), network.clone())?;
        let initial = net.state().clone();
        let out = net.process_request(&req, enc, &order)?;
        let kept: Vec<SiteId> = initial.layout().site_ids().cloned().collect();
        report.push(
            format!("{name}.fidelity_to_initial"),
            real(out.overlap_on(&kept, &initial)?),
        );
        let mut pattern_sites = vec![SiteId::from("req")];
        pattern_sites.extend(devices.iter().map(|&d| addr_site(d)));
        pattern_sites.extend(devices.iter().map(|&d| work_site(d)));
        let n = devices.len();
        for (i, (labels, p)) in out.marginal(&pattern_sites)?.into_iter().enumerate() {
            let work: String = labels[1 + n..].iter().map(u32::to_string).collect();
            report.push(
                format!("{name}.pattern.{}", i + 1),
                format!(
                    "req={} addr=({}) work={work} prob={}",
                    labels[0],
                    list(&labels[1..1 + n]),
                    real(p)
                ),
            );
        }
        for (i, (labels, a)) in out.terms().enumerate() {
            let cells: Vec<String> = out
                .layout()
                .site_ids()
                .zip(labels)
                .map(|(s, l)| format!("{s}:{l}"))
                .collect();
            report.push(
                format!("{name}.state.{}", i + 1),
                format!("{} amp={}", cells.join(" "), amp(*a)),
            );
        }
    }
    if encoding == EncodingArg::Both {
        let f = compare_encodings(&req, &book, &network, &order)?;
        report.push("cross_encoding_fidelity", real(f));
        if f < 1.0 - TOL {
            report.fail();
        }
    }
    Ok(report)
}

fn equivalence_cmd(
    n: usize,
    m: usize,
    seed: u64,
    trials: usize,
    echo: String,
) -> Result<RunReport> {
    if n == 0 || m == 0 || m > n || n > 4 {
        return Err(CliError::Usage(format!(
            "need 1 <= terms <= devices <= 4, got devices={n} terms={m}"
        )));
    }
    let mut report = RunReport::new(echo, Some(seed));
    report.push("devices", n);
    report.push("terms", m);
    report.push("trials", trials);
    let mut min_f = f64::INFINITY;
    let mut passed = 0;
    for trial in 0..trials {
        let inst = seeded_instance::<f64>(n, m, seed, trial as u64)?;
        let r = check_equivalence(&inst.request, &inst.book, &inst.network, &inst.order)?;
        let kind = match inst.book.assignment() {
            qnet_core::addressing::Assignment::Product(_) => "product",
            qnet_core::addressing::Assignment::Entangled(_) => "entangled",
        };
        report.push(
            format!("trial.{}", trial + 1),
            format!(
                "fidelity={} addresses={kind} branches={} tasks={}",
                real(r.fidelity),
                inst.book.branches().len(),
                r.branches.len()
            ),
        );
        if r.passed(TOL) {
            passed += 1;
        } else {
            for (j, line) in r.to_string().lines().enumerate() {
                report.push(format!("trial.{}.detail.{}", trial + 1, j + 1), line);
            }
        }
        min_f = min_f.min(r.fidelity);
    }
    if trials > 0 {
        report.push("min_fidelity", real(min_f));
    }
    report.push("passed", format!("{passed}/{trials}"));
    if passed != trials {
        report.fail();
    }
    Ok(report)
}

fn overlay_cmd(perturb: Option<usize>, alphas: Option<&str>, echo: String) -> Result<RunReport> {
    let mut fx = OverlayFixture::<f64>::standard();
    if let Some(text) = alphas {
        let values: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("bad --alphas `{text}`")))?;
        if values.len() != 3
            || values.iter().all(|&v| v == 0.0)
            || values.iter().any(|v| !v.is_finite())
        {
            return Err(CliError::Usage(
                "--alphas needs three finite reals, not all zero".into(),
            ));
        }
        fx = fx.with_alphas(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect());
    }
    if let Some(b) = perturb {
        if !(1..=3).contains(&b) {
            return Err(CliError::Usage(format!(
                "--perturb takes a branch in 1..=3, got {b}"
            )));
        }
        fx = fx.perturbed(b - 1);
    }
    let out = run_overlay_protocol(&fx)?;
    let norm = fx.alphas.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut report = RunReport::new(echo, None);
    report.push("alphas", list(fx.alphas.iter().map(|a| real(a.re / norm))));
    report.push(
        "perturbed_branch",
        perturb.map_or("none".to_owned(), |b| b.to_string()),
    );
    for &(b, f) in &out.branch_fidelities {
        report.push(
            format!("branch.{}", b + 1),
            format!(
                "addresses=({}) steps={} fidelity={}",
                list(&fx.assignments[b]),
                fx.programs[b].len(),
                real(f)
            ),
        );
    }
    report.push("fidelity", real(out.fidelity));
    report.push("address_intact", out.address_intact);
    report.push(
        "offending",
        if out.offending.is_empty() {
            "none".to_owned()
        } else {
            list(out.offending.iter().map(|b| b + 1))
        },
    );
    if out.fidelity < 1.0 - TOL {
        report.fail();
    }
    Ok(report)
}
