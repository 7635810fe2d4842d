use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevec::{GateSpec, SiteId};

/// Fixed catalog of single-qubit operations a request can ask a device to
/// apply to its work qubit. Code 0 is the identity and doubles as padding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpCode {
    I = 0,
    X = 1,
    Z = 2,
    H = 3,
    S = 4,
}

impl OpCode {
    pub const ALL: [OpCode; 5] = [OpCode::I, OpCode::X, OpCode::Z, OpCode::H, OpCode::S];
    /// Dimension of an op-code register.
    pub const COUNT: usize = 5;

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Result<Self> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::UnknownOp(code.to_string()))
    }

    pub fn name(self) -> &'static str {
        match self {
            OpCode::I => "I",
            OpCode::X => "X",
            OpCode::Z => "Z",
            OpCode::H => "H",
            OpCode::S => "S",
        }
    }

    pub fn gate<T: Real>(self, site: impl Into<SiteId>) -> GateSpec<T> {
        let site = site.into();
        match self {
            OpCode::I => GateSpec::diagonal(
                site,
                vec![num_complex::Complex::new(T::one(), T::zero()); 2],
            ),
            OpCode::X => GateSpec::x(site),
            OpCode::Z => GateSpec::z(site),
            OpCode::H => GateSpec::h(site),
            OpCode::S => GateSpec::s(site),
        }
    }
}

impl fmt::Display for OpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpCode {
    type Err = Error;

    /// Accepts a numeric code or a gate name (`I`, `X`, `Z`, `H`, `S`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(code) = s.parse::<u32>() {
            return Self::from_code(code);
        }
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownOp(s.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_codes_and_names() {
        assert_eq!("3".parse::<OpCode>().unwrap(), OpCode::H);
        assert_eq!("x".parse::<OpCode>().unwrap(), OpCode::X);
        assert_eq!(
            "7".parse::<OpCode>().unwrap_err(),
            Error::UnknownOp("7".into())
        );
        assert_eq!(OpCode::from_code(4).unwrap(), OpCode::S);
    }
}
