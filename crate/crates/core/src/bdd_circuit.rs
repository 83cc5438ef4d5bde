//! BDD-circuits: every internal BDD node becomes one multiplexer whose
//! select is the node's variable, terminals become constant signals. Shared
//! nodes become shared signals, so the result is a DAG with fanout.
//!
//! [`roundtrip_verify`] simulates the generated circuit again under the
//! original order and checks, node by node, that the rebuilt BDDs coincide
//! with the originals and stay small inside each MUX.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bdd::{BddError, Manager, NodeRef};
use crate::circuit::{Circuit, CircuitBuilder, Gate, NameAllocator};
use crate::gate::GateKind;
use crate::sim::{simulate, MuxMode, SimError, SimOptions, SimStats};

/// How each BDD node is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionMode {
    /// One MUX gate per node.
    #[default]
    Mux,
    /// INV + 2 AND + OR per node.
    Gates,
}

pub const CONST_ZERO: &str = "const0";
pub const CONST_ONE: &str = "const1";

/// Original node → signal carrying its function in the generated circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeSignalMap {
    pub nodes: BTreeMap<NodeRef, String>,
    pub zero: Option<String>,
    pub one: Option<String>,
}

impl NodeSignalMap {
    pub fn signal(&self, f: NodeRef) -> Option<&str> {
        match f.terminal_value() {
            Some(false) => self.zero.as_deref(),
            Some(true) => self.one.as_deref(),
            None => self.nodes.get(&f).map(String::as_str),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpandError {
    #[error("{names} variable names given for a manager with {vars} variables")]
    VarNames { names: usize, vars: usize },
    #[error("variable {0} has no usable name")]
    UnnamedVar(usize),
    #[error("root {0} does not belong to the manager")]
    InvalidRoot(u32),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

/// Generated circuit for `roots`. Inputs are the manager's variables in
/// index order, named by `var_names`; output `j` carries `roots[j]`.
pub fn expand_to_circuit(
    mgr: &Manager,
    roots: &[NodeRef],
    var_names: &[String],
    mode: ExpansionMode,
) -> Result<(Circuit, NodeSignalMap), ExpandError> {
    if var_names.len() != mgr.var_count() {
        return Err(ExpandError::VarNames {
            names: var_names.len(),
            vars: mgr.var_count(),
        });
    }
    if let Some(i) = var_names.iter().position(|s| s.is_empty()) {
        return Err(ExpandError::UnnamedVar(i));
    }
    if let Some(bad) = roots.iter().find(|r| !mgr.is_valid(**r)) {
        return Err(ExpandError::InvalidRoot(bad.id()));
    }
    let mut names = NameAllocator::new(var_names);
    let mut map = NodeSignalMap::default();

    // Children before parents: deepest level first, ties by id.
    let mut nodes = mgr.reachable_nodes(roots);
    nodes.sort_by_key(|&f| (std::cmp::Reverse(mgr.node(f).map(|n| n.level)), f));

    let mut uses_terminal = [false, false];
    let mut note_terminal = |f: NodeRef| {
        if let Some(v) = f.terminal_value() {
            uses_terminal[usize::from(v)] = true;
        }
    };
    for &f in &nodes {
        let n = mgr.node(f).expect("internal");
        note_terminal(n.high);
        note_terminal(n.low);
    }
    roots.iter().for_each(|&r| note_terminal(r));
    if uses_terminal[0] {
        map.zero = Some(names.fresh(CONST_ZERO));
    }
    if uses_terminal[1] {
        map.one = Some(names.fresh(CONST_ONE));
    }
    for &f in &nodes {
        map.nodes.insert(f, names.fresh(&format!("n{}", f.id())));
    }

    let mut b = CircuitBuilder::new();
    b.inputs(var_names);
    if let Some(z) = &map.zero {
        b.constant(z, false);
    }
    if let Some(o) = &map.one {
        b.constant(o, true);
    }
    for &f in &nodes {
        let n = mgr.node(f).expect("internal");
        let var = mgr.var_of(f).expect("internal");
        b.push_gate(Gate {
            kind: GateKind::Mux,
            output: map.nodes[&f].clone(),
            inputs: vec![
                var_names[var].clone(),
                map.signal(n.low).expect("mapped").to_string(),
                map.signal(n.high).expect("mapped").to_string(),
            ],
        });
    }
    for &r in roots {
        b.output(map.signal(r).expect("mapped"));
    }
    let circuit = b.build().expect("generated circuit is well-formed");
    let circuit = match mode {
        ExpansionMode::Mux => circuit,
        ExpansionMode::Gates => circuit.expand_mux(),
    };
    Ok((circuit, map))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The MUX output does not rebuild the original node.
    NodeMismatch,
    /// The inverted select has more than one node.
    InverterSize,
    /// An AND output exceeds its data child by more than one node.
    AndSize,
    /// A data input depends on the select variable.
    SelectDependence,
    /// An internal signal exceeds the root size plus one.
    SignalSize,
    /// Total creations exceed `5 * s * (s + 2)`.
    CreationEnvelope,
    /// A primary output differs from its root.
    OutputMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Original node id, when the check is about one node.
    pub node: Option<u32>,
    pub signal: String,
    pub observed: u64,
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub mode: ExpansionMode,
    /// Internal nodes shared by all roots.
    pub bdd_size: usize,
    pub mux_count: usize,
    pub gate_count: usize,
    pub max_internal_size: usize,
    pub created_total: u64,
    pub creation_envelope: u64,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub stats: SimStats,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Expand `roots`, simulate the result under the original order in a fresh
/// manager, and check the per-node claims.
pub fn roundtrip_verify(
    mgr: &Manager,
    roots: &[NodeRef],
    var_names: &[String],
    mode: ExpansionMode,
    opts: &SimOptions,
) -> Result<RoundtripReport, ExpandError> {
    let (circuit, map) = expand_to_circuit(mgr, roots, var_names, mode)?;
    let opts = SimOptions {
        mux_mode: MuxMode::Native,
        ..opts.clone()
    };
    let mut sim = simulate(&circuit, &mgr.order(), &opts)?;
    let s = map.nodes.len();
    let envelope = 5 * s as u64 * (s as u64 + 2);
    let stats = sim.stats.clone();
    let mut violations = Vec::new();

    let sizes: HashMap<&str, usize> = stats.signals.iter().map(|r| (r.signal.as_str(), r.signal_size)).collect();
    let max_root = roots.iter().map(|&r| mgr.size(r).node_count).max().unwrap_or(0);
    let internal_bound = s.max(max_root) + 1;
    let max_internal_size = stats
        .signals
        .iter()
        .filter(|r| r.gate_kind != "input" && r.gate_kind != "const")
        .map(|r| r.signal_size)
        .max()
        .unwrap_or(0);

    // Imports below create nodes; the trace above is already frozen.
    sim.manager_mut().set_capacity(usize::MAX);
    let mut rebuilt = HashMap::with_capacity(s);
    for (&f, signal) in &map.nodes {
        let original = sim.manager_mut().import(mgr, f)?;
        rebuilt.insert(f, original);
        let got = sim.bdd(signal).expect("signal exists");
        if got != original {
            violations.push(Violation {
                kind: ViolationKind::NodeMismatch,
                node: Some(f.id()),
                signal: signal.clone(),
                observed: sim.manager().size(got).node_count as u64,
                bound: sim.manager().size(original).node_count as u64,
            });
        }
    }
    let rebuilt_of = |f: NodeRef| if f.is_terminal() { f } else { rebuilt[&f] };

    for (&f, signal) in &map.nodes {
        let node = mgr.node(f).expect("internal");
        let var = mgr.var_of(f).expect("internal");
        for child in [node.low, node.high] {
            if let Some(child_signal) = map.signal(child) {
                let child_bdd = sim.bdd(child_signal).expect("signal exists");
                if sim.manager().support(child_bdd).contains(&var) {
                    violations.push(Violation {
                        kind: ViolationKind::SelectDependence,
                        node: Some(f.id()),
                        signal: child_signal.to_string(),
                        observed: var as u64,
                        bound: var as u64,
                    });
                }
            }
        }
        if mode == ExpansionMode::Gates {
            let ns = format!("{signal}_ns");
            if let Some(&size) = sizes.get(ns.as_str()) {
                if size != 1 {
                    violations.push(Violation {
                        kind: ViolationKind::InverterSize,
                        node: Some(f.id()),
                        signal: ns,
                        observed: size as u64,
                        bound: 1,
                    });
                }
            }
            for (suffix, child) in [("_a0", node.low), ("_a1", node.high)] {
                let and_signal = format!("{signal}{suffix}");
                let Some(&size) = sizes.get(and_signal.as_str()) else { continue };
                let bound = sim.manager().size(rebuilt_of(child)).node_count + 1;
                if size > bound {
                    violations.push(Violation {
                        kind: ViolationKind::AndSize,
                        node: Some(f.id()),
                        signal: and_signal,
                        observed: size as u64,
                        bound: bound as u64,
                    });
                }
            }
        }
    }

    for r in stats.signals.iter().filter(|r| r.gate_kind != "input" && r.gate_kind != "const") {
        if r.signal_size > internal_bound {
            violations.push(Violation {
                kind: ViolationKind::SignalSize,
                node: None,
                signal: r.signal.clone(),
                observed: r.signal_size as u64,
                bound: internal_bound as u64,
            });
        }
    }
    if stats.created_total > envelope {
        violations.push(Violation {
            kind: ViolationKind::CreationEnvelope,
            node: None,
            signal: String::new(),
            observed: stats.created_total,
            bound: envelope,
        });
    }
    let outputs = sim.output_bdds();
    for (j, &r) in roots.iter().enumerate() {
        let original = if r.is_terminal() { r } else { rebuilt[&r] };
        if outputs[j] != original {
            violations.push(Violation {
                kind: ViolationKind::OutputMismatch,
                node: Some(r.id()),
                signal: circuit.outputs()[j].clone(),
                observed: j as u64,
                bound: j as u64,
            });
        }
    }

    Ok(RoundtripReport {
        mode,
        bdd_size: s,
        mux_count: s,
        gate_count: circuit.gates().len(),
        max_internal_size,
        created_total: stats.created_total,
        creation_envelope: envelope,
        violations,
        stats,
    })
}
