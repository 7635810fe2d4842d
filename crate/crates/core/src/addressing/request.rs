use std::collections::BTreeSet;

use num_complex::Complex;
use num_traits::One;

use super::catalog::OpCode;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevec::{RegisterLayout, SiteId, SparseState};

/// How a request tells devices which operations to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// Programs are sent classically; the request state holds only targets.
    Classical,
    /// Programs are op-code registers entangled with the target register.
    Quantum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RequestTerm<T: Real> {
    pub weight: Complex<T>,
    pub target: u32,
    pub program: Vec<OpCode>,
}

/// Superposition of target addresses, each with an operation program.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Request<T: Real> {
    terms: Vec<RequestTerm<T>>,
}

/// Register names used by one loaded request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestSites {
    pub address: SiteId,
    pub ops: Vec<SiteId>,
}

impl RequestSites {
    /// Sites for the `round`-th request loaded into a network.
    pub fn for_round(round: usize, slots: usize) -> Self {
        let tag = if round == 0 {
            String::new()
        } else {
            format!("#{round}")
        };
        RequestSites {
            address: SiteId::new(format!("req{tag}")),
            ops: (1..=slots)
                .map(|k| SiteId::new(format!("op{tag}.{k}")))
                .collect(),
        }
    }
}

impl<T: Real> Request<T> {
    pub fn new(terms: Vec<RequestTerm<T>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for t in &terms {
            if t.target == 0 {
                return Err(Error::BadTarget(0));
            }
            if !seen.insert(t.target) {
                return Err(Error::DuplicateTarget(t.target));
            }
        }
        Ok(Request { terms })
    }

    /// Request with unit weights.
    pub fn uniform(programs: impl IntoIterator<Item = (u32, Vec<OpCode>)>) -> Result<Self> {
        Self::new(
            programs
                .into_iter()
                .map(|(target, program)| RequestTerm {
                    weight: Complex::one(),
                    target,
                    program,
                })
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Request { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[RequestTerm<T>] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn targets(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.iter().map(|t| t.target)
    }

    /// Number of op slots per term, the longest program length.
    pub fn slots(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.program.len())
            .max()
            .unwrap_or(0)
    }

    /// Program of term `i`, padded with the identity to [`Request::slots`].
    pub fn padded_program(&self, i: usize) -> Vec<OpCode> {
        let mut p = self.terms[i].program.clone();
        p.resize(self.slots(), OpCode::I);
        p
    }

    pub fn term_for(&self, target: u32) -> Option<usize> {
        self.terms.iter().position(|t| t.target == target)
    }

    /// Fails unless every target lies in `[1, n]`.
    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.terms.iter().find(|t| t.target as usize > n) {
            Some(t) => Err(Error::BadTarget(t.target)),
            None => Ok(()),
        }
    }

    /// Request state on the given sites. An empty request leaves the target
    /// register at 0, which never selects a device.
    pub fn state_on(
        &self,
        encoding: Encoding,
        addr_dim: usize,
        sites: &RequestSites,
    ) -> Result<SparseState<T>> {
        let slots = match encoding {
            Encoding::Classical => 0,
            Encoding::Quantum => self.slots(),
        };
        if sites.ops.len() != slots {
            return Err(Error::DimMismatch(format!(
                "{} op sites for {slots} slots",
                sites.ops.len()
            )));
        }
        let layout = RegisterLayout::new(
            std::iter::once((sites.address.clone(), addr_dim))
                .chain(sites.ops.iter().map(|s| (s.clone(), OpCode::COUNT))),
        )?;
        for t in &self.terms {
            if t.target as usize >= addr_dim {
                return Err(Error::BadTarget(t.target));
            }
        }
        if self.terms.is_empty() {
            return SparseState::basis(layout, &vec![0; 1 + slots]);
        }
        let terms = (0..self.terms.len()).map(|i| {
            let mut labels = vec![self.terms[i].target];
            if encoding == Encoding::Quantum {
                labels.extend(self.padded_program(i).iter().map(|op| op.code()));
            }
            (self.terms[i].weight, labels)
        });
        SparseState::superpose(layout, terms)
    }

    /// Parses the request format:
    ///
    /// ```text
    /// target 1 ops X,H
    /// target 2 ops Z
    /// weight 2 0.5
    /// ```
    ///
    /// Ops are codes or names; `ops` with no list (or `-`) is an empty
    /// program. Targets without a `weight` line get weight 1.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms: Vec<RequestTerm<T>> = Vec::new();
        let mut weights: Vec<(usize, u32, f64)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::Syntax { line, message };
            let words: Vec<&str> = content.split_whitespace().collect();
            let addr = |w: &str| -> Result<u32> {
                w.parse::<u32>()
                    .ok()
                    .filter(|&a| a > 0)
                    .ok_or_else(|| syntax(format!("`{w}` is not an address")))
            };
            match words.as_slice() {
                ["target", a, "ops", rest @ ..] => {
                    let target = addr(a)?;
                    let joined = rest.join("");
                    let program = if joined.is_empty() || joined == "-" {
                        Vec::new()
                    } else {
                        joined
                            .split(',')
                            .map(|w| w.parse::<OpCode>().map_err(|e| syntax(e.to_string())))
                            .collect::<Result<Vec<_>>>()?
                    };
                    if terms.iter().any(|t| t.target == target) {
                        return Err(Error::DuplicateTarget(target));
                    }
                    terms.push(RequestTerm {
                        weight: Complex::one(),
                        target,
                        program,
                    });
                }
                ["weight", a, w] => {
                    let target = addr(a)?;
                    let w: f64 = w
                        .parse()
                        .map_err(|_| syntax(format!("`{w}` is not a number")))?;
                    weights.push((line, target, w));
                }
                _ => {
                    return Err(syntax(format!(
                        "expected `target <addr> ops <codes>` or `weight <addr> <float>`, found `{content}`"
                    )))
                }
            }
        }
        for (line, target, w) in weights {
            let term = terms
                .iter_mut()
                .find(|t| t.target == target)
                .ok_or_else(|| Error::Syntax {
                    line,
                    message: format!("weight for undeclared target {target}"),
                })?;
            term.weight = Complex::new(T::lit(w), T::zero());
        }
        Self::new(terms)
    }
}

/// Request state on the default (first-round) register names.
pub fn build_request_state<T: Real>(
    req: &Request<T>,
    encoding: Encoding,
    addr_dim: usize,
) -> Result<SparseState<T>> {
    let slots = match encoding {
        Encoding::Classical => 0,
        Encoding::Quantum => req.slots(),
    };
    req.state_on(encoding, addr_dim, &RequestSites::for_round(0, slots))
}
