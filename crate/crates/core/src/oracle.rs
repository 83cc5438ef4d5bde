//! Brute-force semantics: exhaustive truth tables and gate-level
//! simulation. Nothing here touches the BDD engine.
//!
//! Rows are numbered in binary counting order with input `i` as bit `i` of
//! the row index, so the last declared input is the most significant.

use std::fmt::Write as _;

use crate::batch;
use crate::circuit::{Circuit, Driver};

pub const DEFAULT_INPUT_CAP: usize = 20;

/// Row patterns of the first six inputs inside one 64-row word.
const LOW_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{inputs} inputs exceed the truth-table cap of {cap}")]
    TooManyInputs { inputs: usize, cap: usize },
    #[error("table shapes differ: {left_inputs} inputs x {left_outputs} outputs vs {right_inputs} x {right_outputs}")]
    ShapeMismatch {
        left_inputs: usize,
        left_outputs: usize,
        right_inputs: usize,
        right_outputs: usize,
    },
    #[error("assignment has {got} values for {expected} inputs")]
    AssignmentLength { expected: usize, got: usize },
}

/// One bit vector of length `2^n` per output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    inputs: usize,
    outputs: Vec<Vec<u64>>,
}

/// First position where two tables disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub row: usize,
    pub output: usize,
}

fn words_for(inputs: usize) -> usize {
    if inputs <= 6 {
        1
    } else {
        1 << (inputs - 6)
    }
}

fn row_mask(inputs: usize) -> u64 {
    if inputs >= 6 {
        !0
    } else {
        (1u64 << (1 << inputs)) - 1
    }
}

impl TruthTable {
    /// Build from a per-(output, row) predicate.
    pub fn from_fn(inputs: usize, outputs: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let rows = 1usize << inputs;
        let mut data = vec![vec![0u64; words_for(inputs)]; outputs];
        for (o, words) in data.iter_mut().enumerate() {
            for row in 0..rows {
                if f(o, row) {
                    words[row / 64] |= 1 << (row % 64);
                }
            }
        }
        TruthTable { inputs, outputs: data }
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn rows(&self) -> usize {
        1 << self.inputs
    }

    pub fn get(&self, output: usize, row: usize) -> bool {
        self.outputs[output][row / 64] >> (row % 64) & 1 == 1
    }

    /// The output column as a hex string, highest row first.
    pub fn to_hex(&self, output: usize) -> String {
        let digits = self.rows().div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let word = self.outputs[output][d / 16];
            let nibble = (word >> ((d % 16) * 4)) & 0xF;
            let _ = write!(s, "{nibble:x}");
        }
        s
    }

    /// Row-major bits as a string of `0`/`1`, lowest row first.
    pub fn to_bit_string(&self, output: usize) -> String {
        (0..self.rows())
            .map(|r| if self.get(output, r) { '1' } else { '0' })
            .collect()
    }
}

/// Input assignment of a row: `bits[i]` is input `i`.
pub fn row_assignment(inputs: usize, row: usize) -> Vec<bool> {
    (0..inputs).map(|i| row >> i & 1 == 1).collect()
}

pub fn assignment_row(assignment: &[bool]) -> usize {
    assignment
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (usize::from(b) << i))
}

/// Evaluate every signal on the 64 rows of word `word`.
fn eval_word(c: &Circuit, word: usize) -> Vec<u64> {
    let mut values = vec![0u64; c.signal_count()];
    for (id, v) in values.iter_mut().enumerate().take(c.input_count() + c.constants().len()) {
        *v = match c.driver(id) {
            Driver::Input(i) if i < 6 => LOW_PATTERNS[i],
            Driver::Input(i) => {
                if word >> (i - 6) & 1 == 1 {
                    !0
                } else {
                    0
                }
            }
            Driver::Constant(b) => {
                if b {
                    !0
                } else {
                    0
                }
            }
            Driver::Gate(_) => unreachable!(),
        };
    }
    let mut scratch = Vec::new();
    for &g in c.topological_order() {
        scratch.clear();
        scratch.extend(c.gate_input_ids(g).iter().map(|&s| values[s]));
        values[c.gate_signal(g)] = c.gates()[g].kind.eval_words(&scratch);
    }
    values
}

fn output_words(c: &Circuit, word: usize, mask: u64) -> Vec<u64> {
    let values = eval_word(c, word);
    c.output_ids().iter().map(|&s| values[s] & mask).collect()
}

fn assemble(c: &Circuit, per_word: Vec<Vec<u64>>) -> TruthTable {
    let mut outputs = vec![Vec::with_capacity(per_word.len()); c.output_count()];
    for words in per_word {
        for (o, w) in words.into_iter().enumerate() {
            outputs[o].push(w);
        }
    }
    TruthTable {
        inputs: c.input_count(),
        outputs,
    }
}

fn check_cap(c: &Circuit, cap: usize) -> Result<(), OracleError> {
    if c.input_count() > cap {
        Err(OracleError::TooManyInputs {
            inputs: c.input_count(),
            cap,
        })
    } else {
        Ok(())
    }
}

/// Exhaustive truth table, word ranges evaluated through [`batch::map`].
pub fn circuit_truth_table(c: &Circuit) -> Result<TruthTable, OracleError> {
    circuit_truth_table_capped(c, DEFAULT_INPUT_CAP)
}

pub fn circuit_truth_table_capped(c: &Circuit, cap: usize) -> Result<TruthTable, OracleError> {
    check_cap(c, cap)?;
    let mask = row_mask(c.input_count());
    let words: Vec<usize> = (0..words_for(c.input_count())).collect();
    Ok(assemble(c, batch::map(words, |w| output_words(c, w, mask))))
}

/// Single-threaded reference; bit-identical to [`circuit_truth_table`].
pub fn circuit_truth_table_seq(c: &Circuit) -> Result<TruthTable, OracleError> {
    check_cap(c, DEFAULT_INPUT_CAP)?;
    let mask = row_mask(c.input_count());
    let words: Vec<usize> = (0..words_for(c.input_count())).collect();
    Ok(assemble(c, batch::map_seq(words, |w| output_words(c, w, mask))))
}

/// Compare two tables of the same shape. `Ok(None)` means equal; otherwise
/// the lowest differing row, and the lowest output within that row.
pub fn tables_equal(a: &TruthTable, b: &TruthTable) -> Result<Option<Mismatch>, OracleError> {
    if a.inputs != b.inputs || a.outputs.len() != b.outputs.len() {
        return Err(OracleError::ShapeMismatch {
            left_inputs: a.inputs,
            left_outputs: a.outputs.len(),
            right_inputs: b.inputs,
            right_outputs: b.outputs.len(),
        });
    }
    for w in 0..words_for(a.inputs) {
        let best = (0..a.outputs.len())
            .filter_map(|o| {
                let diff = a.outputs[o][w] ^ b.outputs[o][w];
                (diff != 0).then(|| (diff.trailing_zeros() as usize, o))
            })
            .min();
        if let Some((bit, output)) = best {
            return Ok(Some(Mismatch {
                row: w * 64 + bit,
                output,
            }));
        }
    }
    Ok(None)
}

/// Gate-level simulation of one assignment; value of every signal.
pub fn simulate_signals(c: &Circuit, assignment: &[bool]) -> Result<Vec<bool>, OracleError> {
    if assignment.len() != c.input_count() {
        return Err(OracleError::AssignmentLength {
            expected: c.input_count(),
            got: assignment.len(),
        });
    }
    let mut values = vec![false; c.signal_count()];
    for (id, v) in values.iter_mut().enumerate().take(c.input_count() + c.constants().len()) {
        *v = match c.driver(id) {
            Driver::Input(i) => assignment[i],
            Driver::Constant(b) => b,
            Driver::Gate(_) => unreachable!(),
        };
    }
    let mut scratch = Vec::new();
    for &g in c.topological_order() {
        scratch.clear();
        scratch.extend(c.gate_input_ids(g).iter().map(|&s| values[s]));
        values[c.gate_signal(g)] = c.gates()[g].kind.eval(&scratch);
    }
    Ok(values)
}

/// Gate-level simulation of one assignment; primary output values.
pub fn evaluate_outputs(c: &Circuit, assignment: &[bool]) -> Result<Vec<bool>, OracleError> {
    let values = simulate_signals(c, assignment)?;
    Ok(c.output_ids().iter().map(|&s| values[s]).collect())
}
