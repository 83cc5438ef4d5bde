//! Combinational gate-level circuits and their structural analyses.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use crate::bdd::VarOrder;
use crate::gate::GateKind;

/// Index into [`Circuit::signal_names`]: PIs first, then constants, then gate
/// outputs in declaration order.
pub type SignalId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub output: String,
    pub inputs: Vec<String>,
}

impl Gate {
    pub fn new<S: Into<String>>(kind: GateKind, output: S, inputs: &[&str]) -> Self {
        Gate {
            kind,
            output: output.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constant {
    pub name: String,
    pub value: bool,
}

/// What drives a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Constant(bool),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("signal `{0}` is defined more than once")]
    DuplicateSignal(String),
    #[error("signal `{signal}` used by {user} is never defined")]
    UndefinedSignal { signal: String, user: String },
    #[error("gate `{output}` of kind {kind} takes {expected} inputs, got {got}")]
    Arity {
        output: String,
        kind: GateKind,
        expected: &'static str,
        got: usize,
    },
    #[error("combinational cycle through signal `{0}`")]
    Cycle(String),
    #[error("circuit declares no primary outputs")]
    NoOutputs,
}

impl CircuitError {
    /// Gate index the error is attributed to, when it comes from a gate.
    pub(crate) fn gate_output(&self) -> Option<&str> {
        match self {
            CircuitError::DuplicateSignal(s) | CircuitError::Cycle(s) => Some(s),
            CircuitError::UndefinedSignal { user, .. } => Some(user),
            CircuitError::Arity { output, .. } => Some(output),
            CircuitError::NoOutputs => None,
        }
    }
}

/// Why a circuit is not tree-like.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    /// The signal feeds more than one consumer.
    Fanout { signal: String, consumers: usize },
    /// Trees have exactly one primary output.
    OutputCount(usize),
}

/// A validated combinational circuit. Immutable once built.
#[derive(Debug, Clone)]
pub struct Circuit {
    inputs: Vec<String>,
    outputs: Vec<String>,
    constants: Vec<Constant>,
    gates: Vec<Gate>,
    // derived
    names: Vec<String>,
    index: HashMap<String, SignalId>,
    gate_inputs: Vec<Vec<SignalId>>,
    output_ids: Vec<SignalId>,
    topo: Vec<usize>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.constants == other.constants
            && self.gates == other.gates
    }
}

impl Eq for Circuit {}

impl Circuit {
    /// Validates names, arities, references and acyclicity. Gate inputs may
    /// refer to gates declared later.
    pub fn new(
        inputs: Vec<String>,
        outputs: Vec<String>,
        constants: Vec<Constant>,
        gates: Vec<Gate>,
    ) -> Result<Self, CircuitError> {
        if outputs.is_empty() {
            return Err(CircuitError::NoOutputs);
        }
        let mut names = Vec::with_capacity(inputs.len() + constants.len() + gates.len());
        names.extend(inputs.iter().cloned());
        names.extend(constants.iter().map(|c| c.name.clone()));
        names.extend(gates.iter().map(|g| g.output.clone()));
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(CircuitError::DuplicateSignal(name.clone()));
            }
        }
        for g in &gates {
            if !g.kind.arity_ok(g.inputs.len()) {
                return Err(CircuitError::Arity {
                    output: g.output.clone(),
                    kind: g.kind,
                    expected: g.kind.arity_text(),
                    got: g.inputs.len(),
                });
            }
        }
        let gate_inputs = gates
            .iter()
            .map(|g| {
                g.inputs
                    .iter()
                    .map(|s| {
                        index.get(s).copied().ok_or_else(|| CircuitError::UndefinedSignal {
                            signal: s.clone(),
                            user: g.output.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let output_ids = outputs
            .iter()
            .map(|s| {
                index.get(s).copied().ok_or_else(|| CircuitError::UndefinedSignal {
                    signal: s.clone(),
                    user: "the output list".to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let first_gate = inputs.len() + constants.len();
        let topo = topological_order(&gate_inputs, first_gate)
            .map_err(|g| CircuitError::Cycle(gates[g].output.clone()))?;
        Ok(Circuit {
            inputs,
            outputs,
            constants,
            gates,
            names,
            index,
            gate_inputs,
            output_ids,
            topo,
        })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    /// Gates in declaration order.
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn signal_count(&self) -> usize {
        self.names.len()
    }

    pub fn signal_names(&self) -> &[String] {
        &self.names
    }

    pub fn signal_id(&self, name: &str) -> Option<SignalId> {
        self.index.get(name).copied()
    }

    pub fn driver(&self, id: SignalId) -> Driver {
        let n = self.inputs.len();
        let k = self.constants.len();
        if id < n {
            Driver::Input(id)
        } else if id < n + k {
            Driver::Constant(self.constants[id - n].value)
        } else {
            Driver::Gate(id - n - k)
        }
    }

    pub fn gate_signal(&self, gate: usize) -> SignalId {
        self.inputs.len() + self.constants.len() + gate
    }

    pub fn gate_input_ids(&self, gate: usize) -> &[SignalId] {
        &self.gate_inputs[gate]
    }

    pub fn output_ids(&self) -> &[SignalId] {
        &self.output_ids
    }

    /// Gate indices such that every gate follows the gates driving its
    /// inputs. Among ready gates the earliest declared goes first.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Consumers per signal: gate-input references plus output references.
    pub fn fanout_counts(&self) -> BTreeMap<String, usize> {
        let counts = self.fanout_by_id();
        self.names.iter().cloned().zip(counts).collect()
    }

    pub(crate) fn fanout_by_id(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.names.len()];
        for ins in &self.gate_inputs {
            for &s in ins {
                counts[s] += 1;
            }
        }
        for &s in &self.output_ids {
            counts[s] += 1;
        }
        counts
    }

    /// First reason the circuit is not fanout-free with a single output.
    /// Constants are not considered signals for this purpose.
    pub fn tree_violation(&self) -> Option<TreeViolation> {
        let counts = self.fanout_by_id();
        let first_gate = self.inputs.len() + self.constants.len();
        let candidates = (0..self.inputs.len()).chain(first_gate..self.names.len());
        for id in candidates {
            if counts[id] > 1 {
                return Some(TreeViolation::Fanout {
                    signal: self.names[id].clone(),
                    consumers: counts[id],
                });
            }
        }
        if self.outputs.len() != 1 {
            return Some(TreeViolation::OutputCount(self.outputs.len()));
        }
        None
    }

    pub fn is_tree(&self) -> bool {
        self.tree_violation().is_none()
    }

    /// PIs in first-visit order of a depth-first walk from each output in
    /// turn, gate inputs visited in declared order. PIs never reached are
    /// appended in declaration order.
    pub fn dfs_variable_order(&self) -> VarOrder {
        let n = self.inputs.len();
        let mut visited = vec![false; self.names.len()];
        let mut levels = Vec::with_capacity(n);
        for &root in &self.output_ids {
            let mut stack = vec![root];
            while let Some(s) = stack.pop() {
                if std::mem::replace(&mut visited[s], true) {
                    continue;
                }
                match self.driver(s) {
                    Driver::Input(i) => levels.push(i),
                    Driver::Constant(_) => {}
                    Driver::Gate(g) => {
                        stack.extend(self.gate_inputs[g].iter().rev().filter(|&&i| !visited[i]));
                    }
                }
            }
        }
        levels.extend((0..n).filter(|&i| !visited[i]));
        VarOrder::from_levels(levels).expect("dfs visits each input once")
    }

    /// Order that follows the PI declaration order.
    pub fn declared_order(&self) -> VarOrder {
        VarOrder::identity(self.inputs.len())
    }

    /// Replace every AND/OR/NAND/NOR/XOR gate with more than two inputs by
    /// a left-associated chain of two-input gates. NAND and NOR chains use
    /// AND and OR and invert only in the last gate.
    pub fn decompose_multi_input(&self) -> Circuit {
        let mut names = NameAllocator::new(&self.names);
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            if g.inputs.len() <= 2 || matches!(g.kind, GateKind::Mux | GateKind::Inv | GateKind::Buf) {
                gates.push(g.clone());
                continue;
            }
            let core = match g.kind {
                GateKind::Nand => GateKind::And,
                GateKind::Nor => GateKind::Or,
                k => k,
            };
            let mut acc = g.inputs[0].clone();
            let last = g.inputs.len() - 1;
            for (i, next) in g.inputs[1..last].iter().enumerate() {
                let out = names.fresh(&format!("{}_d{}", g.output, i));
                gates.push(Gate {
                    kind: core,
                    output: out.clone(),
                    inputs: vec![acc, next.clone()],
                });
                acc = out;
            }
            gates.push(Gate {
                kind: g.kind,
                output: g.output.clone(),
                inputs: vec![acc, g.inputs[last].clone()],
            });
        }
        self.rebuilt(gates)
    }

    /// Replace every MUX(s, g, h) by INV(s), AND(¬s, g), AND(s, h) and an OR
    /// that keeps the original output name.
    pub fn expand_mux(&self) -> Circuit {
        let mut names = NameAllocator::new(&self.names);
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            if g.kind != GateKind::Mux {
                gates.push(g.clone());
                continue;
            }
            let (s, lo, hi) = (&g.inputs[0], &g.inputs[1], &g.inputs[2]);
            let ns = names.fresh(&format!("{}_ns", g.output));
            let a0 = names.fresh(&format!("{}_a0", g.output));
            let a1 = names.fresh(&format!("{}_a1", g.output));
            gates.push(Gate {
                kind: GateKind::Inv,
                output: ns.clone(),
                inputs: vec![s.clone()],
            });
            gates.push(Gate {
                kind: GateKind::And,
                output: a0.clone(),
                inputs: vec![ns, lo.clone()],
            });
            gates.push(Gate {
                kind: GateKind::And,
                output: a1.clone(),
                inputs: vec![s.clone(), hi.clone()],
            });
            gates.push(Gate {
                kind: GateKind::Or,
                output: g.output.clone(),
                inputs: vec![a0, a1],
            });
        }
        self.rebuilt(gates)
    }

    /// Same interface, different gate list.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Circuit, CircuitError> {
        Circuit::new(
            self.inputs.clone(),
            self.outputs.clone(),
            self.constants.clone(),
            gates,
        )
    }

    fn rebuilt(&self, gates: Vec<Gate>) -> Circuit {
        self.with_gates(gates).expect("rewrite preserves well-formedness")
    }
}

/// Kahn's algorithm over gate indices with a min-heap so that ready gates
/// come out in declaration order. On a cycle, returns a gate on it.
fn topological_order(gate_inputs: &[Vec<SignalId>], first_gate: SignalId) -> Result<Vec<usize>, usize> {
    let count = gate_inputs.len();
    let mut pending = vec![0usize; count];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (g, ins) in gate_inputs.iter().enumerate() {
        for &s in ins {
            if s >= first_gate {
                pending[g] += 1;
                users[s - first_gate].push(g);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..count).filter(|&g| pending[g] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(count);
    while let Some(Reverse(g)) = ready.pop() {
        order.push(g);
        for &u in &users[g] {
            pending[u] -= 1;
            if pending[u] == 0 {
                ready.push(Reverse(u));
            }
        }
    }
    if order.len() == count {
        return Ok(order);
    }
    // Every unfinished gate has an unfinished driver; walk back until a
    // gate repeats, which puts us on a cycle.
    let mut g = (0..count).find(|&g| pending[g] > 0).expect("some gate is stuck");
    let mut seen = HashSet::new();
    while seen.insert(g) {
        g = gate_inputs[g]
            .iter()
            .filter(|&&s| s >= first_gate)
            .map(|&s| s - first_gate)
            .find(|&d| pending[d] > 0)
            .expect("stuck gate has a stuck driver");
    }
    Err(g)
}

/// Hands out signal names that do not clash with existing ones.
#[derive(Debug, Default)]
pub struct NameAllocator {
    taken: HashSet<String>,
}

impl NameAllocator {
    pub fn new<S: AsRef<str>>(existing: &[S]) -> Self {
        NameAllocator {
            taken: existing.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut k = 1;
        while self.taken.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        name
    }

    pub fn reserve(&mut self, name: &str) -> bool {
        self.taken.insert(name.to_string())
    }
}

/// Small builder used by generators and tests.
#[derive(Debug, Default, Clone)]
pub struct CircuitBuilder {
    inputs: Vec<String>,
    outputs: Vec<String>,
    constants: Vec<Constant>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, name: &str) -> &mut Self {
        self.inputs.push(name.to_string());
        self
    }

    pub fn inputs<S: AsRef<str>>(&mut self, names: &[S]) -> &mut Self {
        self.inputs.extend(names.iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        self.outputs.push(name.to_string());
        self
    }

    pub fn constant(&mut self, name: &str, value: bool) -> &mut Self {
        self.constants.push(Constant {
            name: name.to_string(),
            value,
        });
        self
    }

    pub fn gate(&mut self, kind: GateKind, output: &str, inputs: &[&str]) -> &mut Self {
        self.gates.push(Gate::new(kind, output, inputs));
        self
    }

    pub fn push_gate(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn build(&self) -> Result<Circuit, CircuitError> {
        Circuit::new(
            self.inputs.clone(),
            self.outputs.clone(),
            self.constants.clone(),
            self.gates.clone(),
        )
    }
}
