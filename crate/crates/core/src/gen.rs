//! Seeded generators for test corpora: fanout-free trees, random DAG
//! circuits, array multipliers, random BDDs, and function-preserving or
//! function-changing rewrites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bdd::{BddError, Manager, NodeRef};
use crate::circuit::{Circuit, CircuitBuilder, Driver, Gate, NameAllocator};
use crate::gate::GateKind;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const TREE_KINDS: [GateKind; 4] = [GateKind::And, GateKind::Or, GateKind::Nand, GateKind::Nor];
const INV_PROBABILITY: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("a tree needs at least 2 inputs, got {0}")]
    TooFewInputs(usize),
    #[error("{n} leaves do not fit under depth {depth}")]
    DepthTooSmall { n: usize, depth: usize },
    #[error("a multiplier needs at least 1 bit")]
    ZeroWidth,
}

enum Node {
    Leaf(usize),
    Gate(GateKind, Vec<usize>),
}

/// Random fanout-free single-output circuit over AND/OR/NAND/NOR/INV with
/// inputs `x0..x{n-1}`, each used exactly once. Gates are `g0, g1, ...` and
/// the output is `f`. With `depth`, no path has more than `depth` gates.
pub fn random_tree(n: usize, depth: Option<usize>, seed: u64) -> Result<Circuit, GenError> {
    if n < 2 {
        return Err(GenError::TooFewInputs(n));
    }
    // Subtrees of heights h_i combine under height d iff sum 2^h_i <= 2^d.
    let budget: Option<u128> = match depth {
        Some(d) if d < 127 => {
            let b = 1u128 << d;
            if (n as u128) > b {
                return Err(GenError::DepthTooSmall { n, depth: d });
            }
            Some(b)
        }
        _ => None,
    };
    let fits = |sum: u128| budget.is_none_or(|b| sum <= b);

    let mut rng = rng(seed);
    let mut leaves: Vec<usize> = (0..n).collect();
    leaves.shuffle(&mut rng);
    let mut arena: Vec<Node> = leaves.iter().map(|&i| Node::Leaf(i)).collect();
    // (arena index, height)
    let mut open: Vec<(usize, u32)> = (0..n).map(|i| (i, 0)).collect();
    let mut weight: u128 = n as u128;
    let w = |h: u32| 1u128 << h;

    let wrap_inv = |arena: &mut Vec<Node>, open: &mut Vec<(usize, u32)>, weight: &mut u128, k: usize, rng: &mut ChaCha8Rng| {
        let (node, h) = open[k];
        if rng.gen_bool(INV_PROBABILITY) && fits(*weight - w(h) + w(h + 1)) {
            arena.push(Node::Gate(GateKind::Inv, vec![node]));
            open[k] = (arena.len() - 1, h + 1);
            *weight = *weight - w(h) + w(h + 1);
        }
    };
    for k in 0..open.len() {
        wrap_inv(&mut arena, &mut open, &mut weight, k, &mut rng);
    }
    while open.len() > 1 {
        let mut i = rng.gen_range(0..open.len());
        let mut j = rng.gen_range(0..open.len() - 1);
        if j >= i {
            j += 1;
        }
        let merged = |a: u32, b: u32| a.max(b) + 1;
        let (hi, hj) = (open[i].1, open[j].1);
        if !fits(weight - w(hi) - w(hj) + w(merged(hi, hj))) {
            // Merging the two lowest subtrees always stays feasible.
            let mut idx: Vec<usize> = (0..open.len()).collect();
            idx.sort_by_key(|&k| (open[k].1, k));
            (i, j) = (idx[0], idx[1]);
        }
        let (a, ha) = open[i];
        let (b, hb) = open[j];
        let kind = *TREE_KINDS.choose(&mut rng).expect("non-empty");
        arena.push(Node::Gate(kind, vec![a, b]));
        weight = weight - w(ha) - w(hb) + w(merged(ha, hb));
        let (lo, hi) = (i.min(j), i.max(j));
        open.swap_remove(hi);
        open[lo] = (arena.len() - 1, merged(ha, hb));
        wrap_inv(&mut arena, &mut open, &mut weight, lo, &mut rng);
    }
    Ok(emit_tree(&arena, open[0].0, n))
}

fn emit_tree(arena: &[Node], root: usize, n: usize) -> Circuit {
    let inputs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut names: Vec<Option<String>> = vec![None; arena.len()];
    let mut gates = Vec::new();
    // Post-order, children in the order they were combined.
    let mut stack = vec![(root, false)];
    while let Some((v, expanded)) = stack.pop() {
        match &arena[v] {
            Node::Leaf(i) => names[v] = Some(inputs[*i].clone()),
            Node::Gate(kind, kids) => {
                if expanded {
                    let output = if v == root { "f".to_string() } else { format!("g{}", gates.len()) };
                    let ins = kids.iter().map(|&k| names[k].clone().expect("child emitted")).collect();
                    names[v] = Some(output.clone());
                    gates.push(Gate { kind: *kind, output, inputs: ins });
                } else {
                    stack.push((v, true));
                    stack.extend(kids.iter().rev().map(|&k| (k, false)));
                }
            }
        }
    }
    let output = names[root].clone().expect("root emitted");
    Circuit::new(inputs, vec![output], Vec::new(), gates).expect("generated tree is well-formed")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomCircuitConfig {
    pub inputs: usize,
    pub gates: usize,
    pub outputs: usize,
    pub max_fanin: usize,
    /// Chance that the circuit declares the two constants.
    pub constant_probability: f64,
}

impl Default for RandomCircuitConfig {
    fn default() -> Self {
        RandomCircuitConfig {
            inputs: 6,
            gates: 20,
            outputs: 2,
            max_fanin: 4,
            constant_probability: 0.2,
        }
    }
}

/// Random DAG with fanout, multi-input gates, MUX/XOR/BUF, and optionally
/// constants. Inputs are `x0..`, gates `g0..`, declared in topological order.
/// Outputs are the last `outputs` gates.
pub fn random_circuit(cfg: &RandomCircuitConfig, seed: u64) -> Circuit {
    let mut rng = rng(seed);
    let inputs = cfg.inputs.max(1);
    let gate_count = cfg.gates.max(cfg.outputs).max(1);
    let mut b = CircuitBuilder::new();
    let mut signals: Vec<String> = (0..inputs).map(|i| format!("x{i}")).collect();
    b.inputs(&signals);
    if rng.gen_bool(cfg.constant_probability) {
        b.constant("c0", false).constant("c1", true);
        signals.push("c0".into());
        signals.push("c1".into());
    }
    for i in 0..gate_count {
        let kind = *GateKind::ALL.choose(&mut rng).expect("non-empty");
        let fanin = match kind {
            GateKind::Inv | GateKind::Buf => 1,
            GateKind::Mux => 3,
            _ => rng.gen_range(2..=cfg.max_fanin.max(2)),
        };
        // Favour recent signals so the circuit gets some depth.
        let ins: Vec<String> = (0..fanin)
            .map(|_| {
                let lo = if rng.gen_bool(0.5) { signals.len().saturating_sub(inputs + 2) } else { 0 };
                signals[rng.gen_range(lo..signals.len())].clone()
            })
            .collect();
        let out = format!("g{i}");
        b.push_gate(Gate { kind, output: out.clone(), inputs: ins });
        signals.push(out);
    }
    for j in gate_count - cfg.outputs.max(1)..gate_count {
        b.output(&format!("g{j}"));
    }
    b.build().expect("generated circuit is well-formed")
}

/// Unsigned array multiplier: inputs `a0..`, `b0..` (LSB first), outputs
/// `p0..p{2w-1}`. Partial products are summed row by row with ripple-carry
/// full adders.
pub fn array_multiplier(width: usize) -> Result<Circuit, GenError> {
    if width == 0 {
        return Err(GenError::ZeroWidth);
    }
    struct Emit {
        b: CircuitBuilder,
        next: usize,
    }
    impl Emit {
        fn gate(&mut self, kind: GateKind, ins: &[&str]) -> String {
            let out = format!("m{}", self.next);
            self.next += 1;
            self.b.gate(kind, &out, ins);
            out
        }
    }
    let a: Vec<String> = (0..width).map(|i| format!("a{i}")).collect();
    let bv: Vec<String> = (0..width).map(|i| format!("b{i}")).collect();
    let mut e = Emit { b: CircuitBuilder::new(), next: 0 };
    e.b.inputs(&a).inputs(&bv);

    // acc holds the running sum from bit j upwards.
    let mut product = Vec::with_capacity(2 * width);
    let mut acc: Vec<String> = a.iter().map(|ai| e.gate(GateKind::And, &[ai, &bv[0]])).collect();
    for bj in &bv[1..] {
        product.push(acc.remove(0));
        let row: Vec<String> = a.iter().map(|ai| e.gate(GateKind::And, &[ai, bj])).collect();
        let mut sum = Vec::with_capacity(width + 1);
        let mut carry: Option<String> = None;
        for (i, x) in row.iter().enumerate() {
            match (acc.get(i), carry.take()) {
                (Some(y), None) => {
                    sum.push(e.gate(GateKind::Xor, &[x, y]));
                    carry = Some(e.gate(GateKind::And, &[x, y]));
                }
                (Some(y), Some(c)) => {
                    let t = e.gate(GateKind::Xor, &[x, y]);
                    sum.push(e.gate(GateKind::Xor, &[&t, &c]));
                    let g1 = e.gate(GateKind::And, &[x, y]);
                    let g2 = e.gate(GateKind::And, &[&t, &c]);
                    carry = Some(e.gate(GateKind::Or, &[&g1, &g2]));
                }
                (None, Some(c)) => {
                    sum.push(e.gate(GateKind::Xor, &[x, &c]));
                    carry = Some(e.gate(GateKind::And, &[x, &c]));
                }
                (None, None) => sum.push(x.clone()),
            }
        }
        sum.extend(carry);
        acc = sum;
    }
    product.extend(acc);
    let mut b = e.b;
    for k in 0..2 * width {
        let name = format!("p{k}");
        match product.get(k) {
            Some(bit) => b.gate(GateKind::Buf, &name, &[bit]),
            // only for width 1, where the top bit is always 0
            None => b.constant(&name, false),
        };
        b.output(&name);
    }
    Ok(b.build().expect("multiplier is well-formed"))
}

/// Canonical BDD of a uniformly random function of all manager variables,
/// built bottom-up with `make_node`.
pub fn random_bdd(mgr: &mut Manager, seed: u64) -> Result<NodeRef, BddError> {
    let vars: Vec<usize> = (0..mgr.var_count()).collect();
    random_bdd_on(mgr, &vars, 0.5, seed)
}

/// Random function of `vars` whose rows are 1 with probability `density`.
/// Row index: bit `k-1-i` holds the `i`-th of `vars` sorted top-down.
pub fn random_bdd_on(mgr: &mut Manager, vars: &[usize], density: f64, seed: u64) -> Result<NodeRef, BddError> {
    let mut sorted = vars.to_vec();
    for &v in &sorted {
        mgr.level_of_var(v)?;
    }
    sorted.sort_by_key(|&v| mgr.level_of_var(v).expect("checked"));
    sorted.dedup();
    let mut rng = rng(seed);
    let mut layer: Vec<NodeRef> = (0..1usize << sorted.len())
        .map(|_| NodeRef::constant(rng.gen_bool(density)))
        .collect();
    for &var in sorted.iter().rev() {
        let half = layer.len() / 2;
        let mut up = Vec::with_capacity(half);
        for k in 0..half {
            up.push(mgr.make_node(var, layer[2 * k + 1], layer[2 * k])?);
        }
        layer = up;
    }
    Ok(layer[0])
}

/// Apply De Morgan to each AND/OR/NAND/NOR gate with probability `p`:
/// `AND(a,b) = NOR(¬a,¬b)` and so on. Function is preserved.
pub fn rewrite_de_morgan(c: &Circuit, p: f64, seed: u64) -> Circuit {
    let mut rng = rng(seed);
    let mut names = NameAllocator::new(c.signal_names());
    let mut gates = Vec::with_capacity(c.gates().len());
    for &g in c.topological_order() {
        let gate = &c.gates()[g];
        let dual = match gate.kind {
            GateKind::And => GateKind::Nor,
            GateKind::Or => GateKind::Nand,
            GateKind::Nand => GateKind::Or,
            GateKind::Nor => GateKind::And,
            _ => {
                gates.push(gate.clone());
                continue;
            }
        };
        if !rng.gen_bool(p) {
            gates.push(gate.clone());
            continue;
        }
        let mut ins = Vec::with_capacity(gate.inputs.len());
        for s in &gate.inputs {
            let n = names.fresh(&format!("{}_n", gate.output));
            gates.push(Gate {
                kind: GateKind::Inv,
                output: n.clone(),
                inputs: vec![s.clone()],
            });
            ins.push(n);
        }
        gates.push(Gate {
            kind: dual,
            output: gate.output.clone(),
            inputs: ins,
        });
    }
    c.with_gates(gates).expect("rewrite preserves well-formedness")
}

/// Change one randomly chosen gate in the fan-in cone of the outputs: a
/// different kind of the same arity class, or swapped data inputs for a MUX.
/// The result may still happen to be equivalent.
pub fn mutate_gate(c: &Circuit, seed: u64) -> Option<Circuit> {
    let mut in_cone = vec![false; c.signal_count()];
    let mut stack = c.output_ids().to_vec();
    let mut cone = Vec::new();
    while let Some(s) = stack.pop() {
        if std::mem::replace(&mut in_cone[s], true) {
            continue;
        }
        if let Driver::Gate(g) = c.driver(s) {
            cone.push(g);
            stack.extend_from_slice(c.gate_input_ids(g));
        }
    }
    if cone.is_empty() {
        return None;
    }
    cone.sort_unstable();
    let mut rng = rng(seed);
    let mut gates = c.gates().to_vec();
    let g = &mut gates[*cone.choose(&mut rng).expect("non-empty")];
    match g.kind {
        GateKind::Inv => g.kind = GateKind::Buf,
        GateKind::Buf => g.kind = GateKind::Inv,
        GateKind::Mux => g.inputs.swap(1, 2),
        k => {
            let others: Vec<GateKind> = [GateKind::And, GateKind::Or, GateKind::Nand, GateKind::Nor, GateKind::Xor]
                .into_iter()
                .filter(|&o| o != k)
                .collect();
            g.kind = *others.choose(&mut rng).expect("non-empty");
        }
    }
    Some(c.with_gates(gates).expect("mutation preserves well-formedness"))
}
