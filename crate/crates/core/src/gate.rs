use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Basic gate kinds understood by every layer of the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Inv,
    Buf,
    /// Inputs are ordered (select, else, then).
    Mux,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Inv,
        GateKind::Buf,
        GateKind::Mux,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Nand => "nand",
            GateKind::Nor => "nor",
            GateKind::Xor => "xor",
            GateKind::Inv => "inv",
            GateKind::Buf => "buf",
            GateKind::Mux => "mux",
        }
    }

    pub fn arity_ok(self, inputs: usize) -> bool {
        match self {
            GateKind::Inv | GateKind::Buf => inputs == 1,
            GateKind::Mux => inputs == 3,
            _ => inputs >= 2,
        }
    }

    /// Human readable arity requirement, used in diagnostics.
    pub fn arity_text(self) -> &'static str {
        match self {
            GateKind::Inv | GateKind::Buf => "exactly 1",
            GateKind::Mux => "exactly 3",
            _ => "at least 2",
        }
    }

    /// The input value that fixes the output on its own, if the gate has one.
    pub fn controlling_value(self) -> Option<bool> {
        match self {
            GateKind::And | GateKind::Nand => Some(false),
            GateKind::Or | GateKind::Nor => Some(true),
            GateKind::Xor | GateKind::Inv | GateKind::Buf | GateKind::Mux => None,
        }
    }

    pub fn non_controlling_value(self) -> Option<bool> {
        self.controlling_value().map(|cv| !cv)
    }

    /// Whether the output is inverted relative to the AND/OR core of the gate.
    pub fn is_inverting(self) -> bool {
        matches!(self, GateKind::Nand | GateKind::Nor | GateKind::Inv)
    }

    /// Evaluate the gate on 64 independent input rows packed into words.
    pub fn eval_words(self, inputs: &[u64]) -> u64 {
        debug_assert!(self.arity_ok(inputs.len()));
        match self {
            GateKind::And => inputs.iter().fold(!0, |acc, w| acc & w),
            GateKind::Or => inputs.iter().fold(0, |acc, w| acc | w),
            GateKind::Nand => !inputs.iter().fold(!0, |acc, w| acc & w),
            GateKind::Nor => !inputs.iter().fold(0, |acc, w| acc | w),
            GateKind::Xor => inputs.iter().fold(0, |acc, w| acc ^ w),
            GateKind::Inv => !inputs[0],
            GateKind::Buf => inputs[0],
            GateKind::Mux => (inputs[0] & inputs[2]) | (!inputs[0] & inputs[1]),
        }
    }

    pub fn eval(self, inputs: &[bool]) -> bool {
        let words: Vec<u64> = inputs.iter().map(|&b| if b { !0 } else { 0 }).collect();
        self.eval_words(&words) & 1 == 1
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gate kind `{0}`")]
pub struct UnknownGateKind(pub String);

impl FromStr for GateKind {
    type Err = UnknownGateKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownGateKind(s.to_string()))
    }
}
