use thiserror::Error;

use crate::topology::DeviceId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // state vectors
    #[error("label {label} out of range for site `{site}` of dimension {dim}")]
    InvalidLabel {
        site: String,
        label: u32,
        dim: usize,
    },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("all weights are zero")]
    ZeroState,
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("duplicate or overlapping site `{0}`")]
    SiteClash(String),
    #[error("site `{0}` must have dimension at least 2")]
    BadDimension(String),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("gate table is not a bijection")]
    NotBijective,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("states have different register layouts")]
    LayoutMismatch,

    // topology
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}unknown device {device}", line_prefix(*.line))]
    UnknownDevice {
        device: DeviceId,
        line: Option<usize>,
    },
    #[error("line {line}: device {device} declared twice")]
    DuplicateDevice { device: DeviceId, line: usize },
    #[error("{}duplicate bell edge {a}-{b}", line_prefix(*.line))]
    DuplicateEdge {
        a: DeviceId,
        b: DeviceId,
        line: Option<usize>,
    },
    #[error("{}self-loop on device {device}", line_prefix(*.line))]
    SelfLoop {
        device: DeviceId,
        line: Option<usize>,
    },
    #[error("device id {0} outside [1, 65536)")]
    DeviceRange(u64),
    #[error("topology has no devices")]
    EmptyTopology,
    #[error("topology is disconnected: {unreachable:?} unreachable from {from}")]
    Disconnected {
        from: DeviceId,
        unreachable: Vec<DeviceId>,
    },

    // addressing
    #[error("invalid address assignment: {0}")]
    BadAssignment(String),
    #[error("duplicate request target {0}")]
    DuplicateTarget(u32),
    #[error("request target {0} is not an address of this network")]
    BadTarget(u32),
    #[error("unknown op code {0}")]
    UnknownOp(String),
    #[error("device order must be a permutation of all devices")]
    BadOrder,
    #[error("request cannot be encoded classically: device {0} needs different programs per address branch")]
    NotClassicallyExpressible(DeviceId),
    #[error("no request loaded")]
    NoRequest,

    // routing
    #[error("bell pair {a}-{b} (channel {channel}) already consumed")]
    ResourceConsumed {
        a: DeviceId,
        b: DeviceId,
        channel: usize,
    },
    #[error("devices {0} and {1} share no bell pair")]
    NoBellPair(DeviceId, DeviceId),
    #[error("selection flag is neither definitely set nor definitely clear (p = {0})")]
    SelectionNotDefinite(f64),
    #[error("routing inconsistency: {0}")]
    RoutingInconsistency(String),
    #[error("selection at device {device} failed {attempts} times")]
    SelectionExhausted { device: DeviceId, attempts: usize },
    #[error("value out of range: {0}")]
    RangeError(String),

    // scenarios
    #[error("bad fixture: {0}")]
    BadFixture(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}
