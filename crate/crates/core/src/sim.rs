//! Symbolic simulation: one BDD per signal, built in topological order, with
//! counters recorded after every step.
//!
//! Creation counts in [`SimStats`] start after the input projections are in
//! place; the projections themselves are reported as
//! [`SimStats::projection_nodes`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bdd::{BddError, Manager, NodeRef, VarOrder, DEFAULT_CAPACITY};
use crate::circuit::{Circuit, Driver};
use crate::gate::GateKind;

/// How MUX gates are simulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuxMode {
    /// One `ite(select, then, else)` per MUX.
    #[default]
    Native,
    /// Expand to INV + 2 AND + OR before simulating.
    Expanded,
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub capacity: usize,
    pub mux_mode: MuxMode,
    /// Maintain reachable-node counts for the live columns.
    pub track_live: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            capacity: DEFAULT_CAPACITY,
            mux_mode: MuxMode::Native,
            track_live: true,
        }
    }
}

impl SimOptions {
    pub fn with_capacity(capacity: usize) -> Self {
        SimOptions {
            capacity,
            ..Self::default()
        }
    }
}

/// One row of the trace; one per signal in simulation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub topo_index: usize,
    pub signal: String,
    /// `input`, `const`, or the gate kind.
    pub gate_kind: String,
    pub signal_size: usize,
    /// Nodes created by gate steps so far.
    pub created_cum: u64,
    /// Nodes reachable from the signals still needed at this step.
    pub live_nodes: usize,
    pub ite_entries_cum: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub inputs: usize,
    /// Input indices from the top of the order down.
    pub order_used: Vec<usize>,
    pub projection_nodes: u64,
    /// Nodes created by gate steps over the whole run.
    pub created_total: u64,
    pub peak_live: usize,
    pub ite_entries_total: u64,
    pub outputs: Vec<String>,
    pub completed: bool,
    pub failing_signal: Option<String>,
    pub signals: Vec<SignalRecord>,
}

impl SimStats {
    pub fn record(&self, signal: &str) -> Option<&SignalRecord> {
        self.signals.iter().find(|r| r.signal == signal)
    }

    pub fn per_signal_size(&self) -> BTreeMap<&str, usize> {
        self.signals.iter().map(|r| (r.signal.as_str(), r.signal_size)).collect()
    }

    pub fn created_after(&self) -> BTreeMap<&str, u64> {
        self.signals.iter().map(|r| (r.signal.as_str(), r.created_cum)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("topo_index,signal,gate_kind,signal_size,created_cum,live_nodes,ite_entries_cum\n");
        for r in &self.signals {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.topo_index, r.signal, r.gate_kind, r.signal_size, r.created_cum, r.live_nodes, r.ite_entries_cum
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("stats serialize")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("variable order covers {got} variables but the circuit has {expected} inputs")]
    OrderMismatch { expected: usize, got: usize },
    #[error("node capacity of {limit} exceeded while building `{signal}`")]
    Capacity {
        signal: String,
        limit: usize,
        stats: Box<SimStats>,
    },
    #[error(transparent)]
    Bdd(BddError),
}

impl SimError {
    /// Partial trace of an aborted run.
    pub fn partial_stats(&self) -> Option<&SimStats> {
        match self {
            SimError::Capacity { stats, .. } => Some(stats),
            _ => None,
        }
    }
}

/// BDDs for every signal of the simulated circuit, plus the manager that
/// owns them.
#[derive(Debug)]
pub struct SimResult {
    circuit: Circuit,
    manager: Manager,
    bdds: Vec<NodeRef>,
    pub stats: SimStats,
}

impl SimResult {
    /// The circuit that was simulated (MUX-expanded in expanded mode).
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn manager(&self) -> &Manager {
        &self.manager
    }

    pub fn manager_mut(&mut self) -> &mut Manager {
        &mut self.manager
    }

    pub fn bdd(&self, signal: &str) -> Option<NodeRef> {
        self.circuit.signal_id(signal).map(|id| self.bdds[id])
    }

    /// BDDs indexed by signal id of [`SimResult::circuit`].
    pub fn signal_bdds(&self) -> &[NodeRef] {
        &self.bdds
    }

    pub fn output_bdds(&self) -> Vec<NodeRef> {
        self.circuit.output_ids().iter().map(|&s| self.bdds[s]).collect()
    }

    pub fn into_manager(self) -> Manager {
        self.manager
    }
}

/// Reference counts of nodes reachable from a multiset of roots.
struct LiveTracker {
    refs: Vec<u32>,
    live: usize,
}

impl LiveTracker {
    fn new() -> Self {
        LiveTracker {
            refs: Vec::new(),
            live: 0,
        }
    }

    fn add(&mut self, mgr: &Manager, root: NodeRef) {
        let mut stack = vec![root];
        while let Some(f) = stack.pop() {
            let Some(node) = mgr.node(f) else { continue };
            let id = f.id() as usize;
            if id >= self.refs.len() {
                self.refs.resize(mgr.created_count() as usize + 2, 0);
            }
            self.refs[id] += 1;
            if self.refs[id] == 1 {
                self.live += 1;
                stack.push(node.high);
                stack.push(node.low);
            }
        }
    }

    fn remove(&mut self, mgr: &Manager, root: NodeRef) {
        let mut stack = vec![root];
        while let Some(f) = stack.pop() {
            let Some(node) = mgr.node(f) else { continue };
            let id = f.id() as usize;
            self.refs[id] -= 1;
            if self.refs[id] == 0 {
                self.live -= 1;
                stack.push(node.high);
                stack.push(node.low);
            }
        }
    }
}

/// Build the BDD of every signal of `c` under `order` (`order.levels()[0]`
/// is the top input).
pub fn simulate(c: &Circuit, order: &VarOrder, opts: &SimOptions) -> Result<SimResult, SimError> {
    if order.len() != c.input_count() {
        return Err(SimError::OrderMismatch {
            expected: c.input_count(),
            got: order.len(),
        });
    }
    let circuit = match opts.mux_mode {
        MuxMode::Expanded => c.expand_mux(),
        MuxMode::Native => c.clone(),
    };
    let c = &circuit;
    // A manager needs one variable even for input-free circuits.
    let mgr_order = if order.is_empty() {
        VarOrder::identity(1)
    } else {
        order.clone()
    };
    let mut mgr = Manager::with_order(&mgr_order).with_capacity(opts.capacity);

    let mut stats = SimStats {
        inputs: c.input_count(),
        order_used: order.levels().to_vec(),
        projection_nodes: 0,
        created_total: 0,
        peak_live: 0,
        ite_entries_total: 0,
        outputs: c.outputs().to_vec(),
        completed: false,
        failing_signal: None,
        signals: Vec::with_capacity(c.signal_count()),
    };
    let abort = |mut stats: SimStats, signal: &str, err: BddError| -> SimError {
        stats.failing_signal = Some(signal.to_string());
        match err {
            BddError::Capacity { limit } => SimError::Capacity {
                signal: signal.to_string(),
                limit,
                stats: Box::new(stats),
            },
            other => SimError::Bdd(other),
        }
    };

    let mut bdds = vec![NodeRef::ZERO; c.signal_count()];
    let mut tracker = LiveTracker::new();
    let leaves = c.input_count() + c.constants().len();
    for (id, slot) in bdds.iter_mut().enumerate().take(leaves) {
        let (node, kind) = match c.driver(id) {
            Driver::Input(i) => match mgr.var(i) {
                Ok(r) => (r, "input"),
                Err(e) => return Err(abort(stats, &c.signal_names()[id], e)),
            },
            Driver::Constant(b) => (NodeRef::constant(b), "const"),
            Driver::Gate(_) => unreachable!(),
        };
        *slot = node;
        if opts.track_live {
            tracker.add(&mgr, node);
        }
        stats.signals.push(SignalRecord {
            topo_index: stats.signals.len(),
            signal: c.signal_names()[id].clone(),
            gate_kind: kind.to_string(),
            signal_size: mgr.size(node).node_count,
            created_cum: 0,
            live_nodes: tracker.live,
            ite_entries_cum: 0,
        });
    }
    let baseline = mgr.created_count();
    let ite_baseline = mgr.ite_calls();
    stats.projection_nodes = baseline;
    stats.peak_live = tracker.live;

    let mut remaining = vec![0usize; c.signal_count()];
    for g in 0..c.gates().len() {
        for &s in c.gate_input_ids(g) {
            remaining[s] += 1;
        }
    }
    let mut is_output = vec![false; c.signal_count()];
    for &s in c.output_ids() {
        is_output[s] = true;
    }

    let mut operands = Vec::new();
    for &g in c.topological_order() {
        let gate = &c.gates()[g];
        let out = c.gate_signal(g);
        operands.clear();
        operands.extend(c.gate_input_ids(g).iter().map(|&s| bdds[s]));
        let r = match mgr.apply(gate.kind, &operands) {
            Ok(r) => r,
            Err(e) => {
                stats.created_total = mgr.created_count() - baseline;
                stats.ite_entries_total = mgr.ite_calls() - ite_baseline;
                return Err(abort(stats, &gate.output, e));
            }
        };
        bdds[out] = r;

        let mut live_now = 0;
        if opts.track_live {
            tracker.add(&mgr, r);
            live_now = tracker.live;
            stats.peak_live = stats.peak_live.max(live_now);
            for &s in c.gate_input_ids(g) {
                remaining[s] -= 1;
                if remaining[s] == 0 && !is_output[s] && s >= leaves {
                    tracker.remove(&mgr, bdds[s]);
                }
            }
            if remaining[out] == 0 && !is_output[out] {
                tracker.remove(&mgr, r);
            }
        }
        stats.signals.push(SignalRecord {
            topo_index: stats.signals.len(),
            signal: gate.output.clone(),
            gate_kind: gate.kind.name().to_string(),
            signal_size: mgr.size(r).node_count,
            created_cum: mgr.created_count() - baseline,
            live_nodes: live_now,
            ite_entries_cum: mgr.ite_calls() - ite_baseline,
        });
    }
    stats.created_total = mgr.created_count() - baseline;
    stats.ite_entries_total = mgr.ite_calls() - ite_baseline;
    stats.completed = true;
    Ok(SimResult {
        circuit,
        manager: mgr,
        bdds,
        stats,
    })
}

/// Size threshold `coefficient * n^degree`, checked at every `gate_gap`-th
/// signal of the trace and at every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyBoundConfig {
    pub degree: u32,
    pub coefficient: f64,
    pub gate_gap: usize,
    /// Overrides the input count as the base of the bound.
    pub n: Option<usize>,
}

impl PolyBoundConfig {
    pub fn new(degree: u32, coefficient: f64, gate_gap: usize) -> Self {
        PolyBoundConfig {
            degree,
            coefficient,
            gate_gap,
            n: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundViolation {
    pub signal: String,
    pub size: usize,
    pub limit: f64,
    /// `size - limit`; positive for every violation.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub degree: u32,
    pub coefficient: f64,
    pub gate_gap: usize,
    pub limit: f64,
    pub checked: usize,
    pub passed: bool,
    pub violations: Vec<BoundViolation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundConfigError {
    #[error("gate gap must be at least 1")]
    ZeroGap,
    #[error("coefficient must be a finite non-negative number, got {0}")]
    BadCoefficient(f64),
}

/// Compare recorded signal sizes against a user-supplied polynomial. This
/// measures one run; it fits nothing.
pub fn check_poly_bound(stats: &SimStats, cfg: &PolyBoundConfig) -> Result<BoundReport, BoundConfigError> {
    if cfg.gate_gap == 0 {
        return Err(BoundConfigError::ZeroGap);
    }
    if !cfg.coefficient.is_finite() || cfg.coefficient < 0.0 {
        return Err(BoundConfigError::BadCoefficient(cfg.coefficient));
    }
    let n = cfg.n.unwrap_or(stats.inputs);
    let limit = cfg.coefficient * (n as f64).powi(cfg.degree as i32);
    let mut checked = 0;
    let mut violations = Vec::new();
    for (k, r) in stats.signals.iter().enumerate() {
        let sampled = k % cfg.gate_gap == 0 || stats.outputs.contains(&r.signal);
        if !sampled {
            continue;
        }
        checked += 1;
        let size = r.signal_size as f64;
        if size > limit {
            violations.push(BoundViolation {
                signal: r.signal.clone(),
                size: r.signal_size,
                limit,
                margin: size - limit,
            });
        }
    }
    Ok(BoundReport {
        n,
        degree: cfg.degree,
        coefficient: cfg.coefficient,
        gate_gap: cfg.gate_gap,
        limit,
        checked,
        passed: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub kind: GateKind,
    pub polarity: Polarity,
    pub var: usize,
    pub g_size: usize,
    pub new_nodes: u64,
    pub ite_entries: u64,
    pub result_size: usize,
    #[serde(skip)]
    pub result: NodeRef,
}

impl ProbeReport {
    pub fn node_bound(&self) -> u64 {
        self.g_size as u64 + 1
    }

    pub fn entry_bound(&self) -> u64 {
        2 * self.g_size as u64 + 2
    }

    pub fn within_bounds(&self) -> bool {
        self.new_nodes <= self.node_bound() && self.ite_entries <= self.entry_bound()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("probe supports AND, OR, NAND and NOR, not {0}")]
    UnsupportedKind(GateKind),
    #[error("variable {var} occurs in g")]
    InSupport { var: usize },
    #[error("variable {var} of g sits above the probed variable")]
    NotTop { var: usize },
    #[error(transparent)]
    Bdd(#[from] BddError),
}

/// Combine the literal of `var` (or its complement) with `g` through one
/// two-input gate, with `var` above every variable of `g`, and count what the
/// single `apply` creates. The literal is built before counting starts and
/// the computed table is cleared first.
pub fn theorem1_probe(
    mgr: &mut Manager,
    g: NodeRef,
    var: usize,
    kind: GateKind,
    polarity: Polarity,
) -> Result<ProbeReport, ProbeError> {
    if !matches!(kind, GateKind::And | GateKind::Or | GateKind::Nand | GateKind::Nor) {
        return Err(ProbeError::UnsupportedKind(kind));
    }
    let level = mgr.level_of_var(var)?;
    let support = mgr.support(g);
    if support.contains(&var) {
        return Err(ProbeError::InSupport { var });
    }
    if let Some(&above) = support.iter().find(|&&v| mgr.level_of_var(v).is_ok_and(|l| l < level)) {
        return Err(ProbeError::NotTop { var: above });
    }
    let x = mgr.var(var)?;
    let lit = match polarity {
        Polarity::Positive => x,
        Polarity::Negative => mgr.not(x)?,
    };
    mgr.clear_computed_table();
    let created = mgr.created_count();
    let calls = mgr.ite_calls();
    let result = mgr.apply(kind, &[lit, g])?;
    Ok(ProbeReport {
        kind,
        polarity,
        var,
        g_size: mgr.size(g).node_count,
        new_nodes: mgr.created_count() - created,
        ite_entries: mgr.ite_calls() - calls,
        result_size: mgr.size(result).node_count,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::gate::GateKind::*;
    use crate::oracle::{circuit_truth_table, row_assignment};

    fn balanced_tree() -> Circuit {
        CircuitBuilder::new()
            .inputs(&["x1", "x2", "x3", "x4"])
            .output("f")
            .gate(And, "a", &["x1", "x2"])
            .gate(And, "b", &["x3", "x4"])
            .gate(Or, "f", &["a", "b"])
            .build()
            .unwrap()
    }

    #[test]
    fn single_and_gate() {
        let c = CircuitBuilder::new()
            .inputs(&["x1", "x2"])
            .output("f")
            .gate(And, "f", &["x1", "x2"])
            .build()
            .unwrap();
        let r = simulate(&c, &c.dfs_variable_order(), &SimOptions::default()).unwrap();
        assert_eq!(r.stats.record("f").unwrap().signal_size, 2);
        assert_eq!(r.stats.projection_nodes, 2);
        assert_eq!(r.stats.created_total, 1);
    }

    #[test]
    fn balanced_tree_counts() {
        let c = balanced_tree();
        let r = simulate(&c, &c.dfs_variable_order(), &SimOptions::default()).unwrap();
        assert_eq!(r.stats.record("f").unwrap().signal_size, 4);
        assert_eq!(r.stats.created_total, 4);
        let csv = r.stats.to_csv();
        assert!(csv.starts_with("topo_index,signal,gate_kind,signal_size,created_cum,live_nodes,ite_entries_cum\n"));
        assert_eq!(csv.lines().count(), 8);
        assert_eq!(csv.lines().last().unwrap(), "6,f,or,4,4,8,4");
    }

    #[test]
    fn live_nodes_drop_dead_intermediates() {
        let c = balanced_tree();
        let r = simulate(&c, &c.dfs_variable_order(), &SimOptions::default()).unwrap();
        let live: Vec<usize> = r.stats.signals.iter().map(|s| s.live_nodes).collect();
        // 4 projections; a adds 1; b adds 1; f needs a and b while it is built.
        assert_eq!(live, vec![1, 2, 3, 4, 5, 6, 8]);
        assert_eq!(r.stats.peak_live, 8);
    }

    #[test]
    fn outputs_agree_with_gate_level_simulation() {
        let c = CircuitBuilder::new()
            .inputs(&["s", "a", "b", "c"])
            .constant("k1", true)
            .output("o1")
            .output("o2")
            .gate(Mux, "m", &["s", "a", "b"])
            .gate(Xor, "o1", &["m", "c", "a"])
            .gate(Nand, "o2", &["m", "k1", "s"])
            .build()
            .unwrap();
        let table = circuit_truth_table(&c).unwrap();
        for mode in [MuxMode::Native, MuxMode::Expanded] {
            let opts = SimOptions {
                mux_mode: mode,
                ..SimOptions::default()
            };
            let r = simulate(&c, &VarOrder::from_levels(vec![3, 1, 0, 2]).unwrap(), &opts).unwrap();
            let outs = r.output_bdds();
            for row in 0..16 {
                let a = row_assignment(4, row);
                for (o, &f) in outs.iter().enumerate() {
                    assert_eq!(r.manager().eval(f, &a).unwrap(), table.get(o, row));
                }
            }
        }
    }

    #[test]
    fn constant_inputs_fold_to_terminals() {
        let c = CircuitBuilder::new()
            .input("x")
            .constant("z", false)
            .constant("o", true)
            .output("f")
            .gate(Or, "t", &["z", "o"])
            .gate(Nand, "f", &["t", "o"])
            .build()
            .unwrap();
        let r = simulate(&c, &c.declared_order(), &SimOptions::default()).unwrap();
        assert_eq!(r.bdd("t"), Some(NodeRef::ONE));
        assert_eq!(r.bdd("f"), Some(NodeRef::ZERO));
        assert_eq!(r.stats.created_total, 0);
    }

    #[test]
    fn capacity_abort_keeps_partial_trace() {
        let c = balanced_tree();
        let err = simulate(&c, &c.dfs_variable_order(), &SimOptions::with_capacity(5)).unwrap_err();
        match &err {
            SimError::Capacity { signal, limit, stats } => {
                assert_eq!(signal, "b");
                assert_eq!(*limit, 5);
                assert!(!stats.completed);
                assert_eq!(stats.signals.len(), 5);
                assert_eq!(stats.failing_signal.as_deref(), Some("b"));
            }
            e => panic!("{e:?}"),
        }
        assert!(err.partial_stats().is_some());
    }

    #[test]
    fn order_must_cover_inputs() {
        let c = balanced_tree();
        assert!(matches!(
            simulate(&c, &VarOrder::identity(3), &SimOptions::default()),
            Err(SimError::OrderMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn non_dfs_order_costs_more() {
        let c = balanced_tree();
        let bad = VarOrder::from_levels(vec![0, 2, 1, 3]).unwrap();
        let r = simulate(&c, &bad, &SimOptions::default()).unwrap();
        assert!(r.stats.created_total > 4);
        assert!(r.stats.record("f").unwrap().signal_size > 4);
    }

    #[test]
    fn poly_bound_threshold() {
        let c = balanced_tree();
        let r = simulate(&c, &c.dfs_variable_order(), &SimOptions::default()).unwrap();
        let rep = check_poly_bound(&r.stats, &PolyBoundConfig::new(1, 1.0, 1)).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.checked, 7);

        let mut stats = r.stats.clone();
        stats.signals[5].signal_size = 17;
        let rep = check_poly_bound(&stats, &PolyBoundConfig::new(2, 1.0, 1)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].margin, 1.0);

        // gap 4 samples rows 0 and 4, plus the output row.
        let rep = check_poly_bound(&stats, &PolyBoundConfig::new(2, 1.0, 4)).unwrap();
        assert_eq!(rep.checked, 3);
        assert!(rep.passed);
        assert!(check_poly_bound(&stats, &PolyBoundConfig::new(1, 1.0, 0)).is_err());
    }

    #[test]
    fn probe_examples() {
        let mut m = Manager::with_order(&VarOrder::identity(4));
        let x2 = m.var(2).unwrap();
        let x3 = m.var(3).unwrap();
        let g = m.and(x2, x3).unwrap();
        for kind in [And, Or, Nand, Nor] {
            for pol in [Polarity::Positive, Polarity::Negative] {
                let rep = theorem1_probe(&mut m, g, 1, kind, pol).unwrap();
                assert!(rep.within_bounds(), "{rep:?}");
            }
        }
        let rep = theorem1_probe(&mut m, NodeRef::ONE, 0, And, Polarity::Positive).unwrap();
        assert_eq!(rep.result, m.var(0).unwrap());
        assert!(rep.new_nodes <= 1);
    }

    #[test]
    fn probe_preconditions() {
        let mut m = Manager::with_order(&VarOrder::identity(4));
        let x1 = m.var(1).unwrap();
        let x3 = m.var(3).unwrap();
        let g = m.or(x1, x3).unwrap();
        assert_eq!(
            theorem1_probe(&mut m, g, 1, And, Polarity::Positive),
            Err(ProbeError::InSupport { var: 1 })
        );
        assert_eq!(
            theorem1_probe(&mut m, g, 2, And, Polarity::Positive),
            Err(ProbeError::NotTop { var: 1 })
        );
        assert_eq!(
            theorem1_probe(&mut m, g, 0, Xor, Polarity::Positive),
            Err(ProbeError::UnsupportedKind(Xor))
        );
    }
}
