//! Reduced ordered binary decision diagrams without complement edges.
//!
//! A [`Manager`] owns every node of one BDD universe. Nodes are stored in an
//! append-only arena and made canonical through a unique table keyed on
//! `(level, high, low)`. All synthesis goes through [`Manager::ite`], which
//! memoizes on the raw operand triple. There is no garbage collection and no
//! reordering, so [`Manager::created_count`] and [`Manager::ite_calls`] are
//! monotone and can be used as measurement instruments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::gate::GateKind;

/// Default upper bound on internal nodes per manager.
pub const DEFAULT_CAPACITY: usize = 1 << 26;

const TERMINAL_LEVEL: u32 = u32::MAX;

/// Handle to a node of one [`Manager`].
///
/// `0` and `1` are the terminals, anything above indexes the node arena.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const ZERO: NodeRef = NodeRef(0);
    pub const ONE: NodeRef = NodeRef(1);

    pub fn constant(value: bool) -> Self {
        if value {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    pub fn is_one(self) -> bool {
        self == Self::ONE
    }

    /// Terminal value, or `None` for internal nodes.
    pub fn terminal_value(self) -> Option<bool> {
        match self.0 {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        }
    }

    /// Raw handle value, stable for the lifetime of the manager.
    pub fn id(self) -> u32 {
        self.0
    }

    fn arena_index(self) -> usize {
        debug_assert!(!self.is_terminal());
        (self.0 - 2) as usize
    }

    fn from_arena_index(index: usize) -> Self {
        NodeRef(index as u32 + 2)
    }
}

/// Internal node: Shannon decomposition on the variable at `level`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BddNode {
    pub level: u32,
    /// 1-cofactor.
    pub high: NodeRef,
    /// 0-cofactor.
    pub low: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BddError {
    #[error("a manager needs at least one variable")]
    NoVariables,
    #[error("variable order is not a permutation of 0..{var_count}: {reason}")]
    NotPermutation { var_count: usize, reason: String },
    #[error("variable index {index} out of range (manager has {var_count} variables)")]
    VarOutOfRange { index: usize, var_count: usize },
    #[error("node reference {0} does not belong to this manager")]
    InvalidRef(u32),
    #[error("node capacity of {limit} internal nodes exceeded")]
    Capacity { limit: usize },
    #[error("{kind} expects {expected} operand(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: &'static str,
        got: usize,
    },
    #[error("assignment has {len} values but variable {needed} is tested")]
    IncompleteAssignment { len: usize, needed: usize },
    #[error("node on variable {var} must sit above its children")]
    OrderViolation { var: usize },
}

/// A variable order, stored as the list of variables from top to bottom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarOrder {
    levels: Vec<usize>,
}

impl VarOrder {
    pub fn identity(var_count: usize) -> Self {
        VarOrder {
            levels: (0..var_count).collect(),
        }
    }

    /// Build from the top-to-bottom list of variable indices.
    pub fn from_levels(levels: Vec<usize>) -> Result<Self, BddError> {
        check_permutation(&levels)?;
        Ok(VarOrder { levels })
    }

    /// Build from a map `var index -> level`.
    pub fn from_var_to_level(var_to_level: &[usize]) -> Result<Self, BddError> {
        check_permutation(var_to_level)?;
        let mut levels = vec![0; var_to_level.len()];
        for (var, &level) in var_to_level.iter().enumerate() {
            levels[level] = var;
        }
        Ok(VarOrder { levels })
    }

    /// Variables from top to bottom.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn var_to_level(&self) -> Vec<usize> {
        let mut map = vec![0; self.levels.len()];
        for (level, &var) in self.levels.iter().enumerate() {
            map[var] = level;
        }
        map
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

fn check_permutation(perm: &[usize]) -> Result<(), BddError> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n {
            return Err(BddError::NotPermutation {
                var_count: n,
                reason: format!("entry {p} is out of range"),
            });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(BddError::NotPermutation {
                var_count: n,
                reason: format!("entry {p} appears twice"),
            });
        }
    }
    Ok(())
}

/// Number of internal nodes reachable from a root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub node_count: usize,
}

/// Owner of a BDD universe: node arena, unique table, computed table and
/// the creation/ITE counters.
#[derive(Debug, Clone)]
pub struct Manager {
    var_to_level: Vec<u32>,
    level_to_var: Vec<u32>,
    nodes: Vec<BddNode>,
    unique: FxHashMap<BddNode, NodeRef>,
    computed: FxHashMap<(NodeRef, NodeRef, NodeRef), NodeRef>,
    ite_calls: u64,
    capacity: usize,
}

impl Manager {
    /// `order[i]` is the level of variable `i`; level 0 is the top.
    pub fn new(var_count: usize, order: &[usize]) -> Result<Self, BddError> {
        if var_count == 0 {
            return Err(BddError::NoVariables);
        }
        if order.len() != var_count {
            return Err(BddError::NotPermutation {
                var_count,
                reason: format!("expected {var_count} entries, got {}", order.len()),
            });
        }
        let order = VarOrder::from_var_to_level(order)?;
        Ok(Self::with_order(&order))
    }

    /// Panics if `order` is empty; use [`Manager::new`] for validated input.
    pub fn with_order(order: &VarOrder) -> Self {
        assert!(!order.is_empty(), "a manager needs at least one variable");
        let level_to_var = order.levels().iter().map(|&v| v as u32).collect();
        let var_to_level = order.var_to_level().into_iter().map(|l| l as u32).collect();
        Manager {
            var_to_level,
            level_to_var,
            nodes: Vec::new(),
            unique: FxHashMap::default(),
            computed: FxHashMap::default(),
            ite_calls: 0,
            capacity: DEFAULT_CAPACITY,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn set_capacity(&mut self, capacity: usize) {
        self.capacity = capacity;
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn var_count(&self) -> usize {
        self.var_to_level.len()
    }

    pub fn order(&self) -> VarOrder {
        VarOrder {
            levels: self.level_to_var.iter().map(|&v| v as usize).collect(),
        }
    }

    pub fn level_of_var(&self, index: usize) -> Result<usize, BddError> {
        self.check_var(index)?;
        Ok(self.var_to_level[index] as usize)
    }

    pub fn var_at_level(&self, level: usize) -> usize {
        self.level_to_var[level] as usize
    }

    /// Internal nodes ever created. Equals the arena length since nothing is
    /// ever freed.
    pub fn created_count(&self) -> u64 {
        self.nodes.len() as u64
    }

    /// Recursive ITE entries that passed the terminal checks and missed the
    /// computed table.
    pub fn ite_calls(&self) -> u64 {
        self.ite_calls
    }

    pub fn unique_table_len(&self) -> usize {
        self.unique.len()
    }

    pub fn computed_table_len(&self) -> usize {
        self.computed.len()
    }

    pub fn clear_computed_table(&mut self) {
        self.computed.clear();
    }

    pub fn is_valid(&self, f: NodeRef) -> bool {
        f.is_terminal() || f.arena_index() < self.nodes.len()
    }

    fn check(&self, f: NodeRef) -> Result<(), BddError> {
        if self.is_valid(f) {
            Ok(())
        } else {
            Err(BddError::InvalidRef(f.0))
        }
    }

    fn check_var(&self, index: usize) -> Result<(), BddError> {
        if index < self.var_count() {
            Ok(())
        } else {
            Err(BddError::VarOutOfRange {
                index,
                var_count: self.var_count(),
            })
        }
    }

    /// The internal node behind `f`, or `None` for terminals.
    pub fn node(&self, f: NodeRef) -> Option<BddNode> {
        (!f.is_terminal()).then(|| self.nodes[f.arena_index()])
    }

    /// Variable tested at `f`, or `None` for terminals.
    pub fn var_of(&self, f: NodeRef) -> Option<usize> {
        self.node(f).map(|n| self.level_to_var[n.level as usize] as usize)
    }

    fn level(&self, f: NodeRef) -> u32 {
        if f.is_terminal() {
            TERMINAL_LEVEL
        } else {
            self.nodes[f.arena_index()].level
        }
    }

    /// find_or_add on the unique table. Applies the reduction rule first.
    fn find_or_add(&mut self, level: u32, high: NodeRef, low: NodeRef) -> Result<NodeRef, BddError> {
        if high == low {
            return Ok(high);
        }
        let node = BddNode { level, high, low };
        if let Some(&r) = self.unique.get(&node) {
            return Ok(r);
        }
        if self.nodes.len() >= self.capacity {
            return Err(BddError::Capacity {
                limit: self.capacity,
            });
        }
        let r = NodeRef::from_arena_index(self.nodes.len());
        self.nodes.push(node);
        self.unique.insert(node, r);
        Ok(r)
    }

    /// Canonical node `(var, high, low)`. Both children must sit strictly
    /// below `var` in the order.
    pub fn make_node(&mut self, var: usize, high: NodeRef, low: NodeRef) -> Result<NodeRef, BddError> {
        self.check_var(var)?;
        self.check(high)?;
        self.check(low)?;
        let level = self.var_to_level[var];
        if self.level(high) <= level || self.level(low) <= level {
            return Err(BddError::OrderViolation { var });
        }
        self.find_or_add(level, high, low)
    }

    /// Projection function of variable `index`.
    pub fn var(&mut self, index: usize) -> Result<NodeRef, BddError> {
        self.check_var(index)?;
        self.find_or_add(self.var_to_level[index], NodeRef::ONE, NodeRef::ZERO)
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        NodeRef::constant(value)
    }

    /// `(f ∧ g) ∨ (¬f ∧ h)`.
    pub fn ite(&mut self, f: NodeRef, g: NodeRef, h: NodeRef) -> Result<NodeRef, BddError> {
        self.check(f)?;
        self.check(g)?;
        self.check(h)?;
        self.ite_rec(f, g, h)
    }

    fn ite_rec(&mut self, f: NodeRef, g: NodeRef, h: NodeRef) -> Result<NodeRef, BddError> {
        // Terminal cases: exactly ite(1,G,H)=G, ite(F,G,G)=G, ite(0,G,H)=H
        // and ite(F,1,0)=F.
        if f == NodeRef::ONE || g == h {
            return Ok(g);
        }
        if f == NodeRef::ZERO {
            return Ok(h);
        }
        if g == NodeRef::ONE && h == NodeRef::ZERO {
            return Ok(f);
        }
        if let Some(&r) = self.computed.get(&(f, g, h)) {
            return Ok(r);
        }
        self.ite_calls += 1;

        let top = self.level(f).min(self.level(g)).min(self.level(h));
        let (f1, f0) = self.cofactors_at(f, top);
        let (g1, g0) = self.cofactors_at(g, top);
        let (h1, h0) = self.cofactors_at(h, top);
        let t = self.ite_rec(f1, g1, h1)?;
        let e = self.ite_rec(f0, g0, h0)?;
        let r = self.find_or_add(top, t, e)?;
        self.computed.insert((f, g, h), r);
        Ok(r)
    }

    fn cofactors_at(&self, f: NodeRef, level: u32) -> (NodeRef, NodeRef) {
        match self.node(f) {
            Some(n) if n.level == level => (n.high, n.low),
            _ => (f, f),
        }
    }

    pub fn not(&mut self, f: NodeRef) -> Result<NodeRef, BddError> {
        self.ite(f, NodeRef::ZERO, NodeRef::ONE)
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        self.apply2(GateKind::And, f, g)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        self.apply2(GateKind::Or, f, g)
    }

    pub fn xor(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        self.apply2(GateKind::Xor, f, g)
    }

    /// Gate synthesis through `ite`. Multi-input gates fold left to right;
    /// NAND/NOR fold their AND/OR core and invert only in the last step.
    /// MUX operands are `(select, else, then)`.
    pub fn apply(&mut self, kind: GateKind, operands: &[NodeRef]) -> Result<NodeRef, BddError> {
        if !kind.arity_ok(operands.len()) {
            return Err(BddError::Arity {
                kind,
                expected: kind.arity_text(),
                got: operands.len(),
            });
        }
        for &op in operands {
            self.check(op)?;
        }
        match kind {
            GateKind::Buf => Ok(operands[0]),
            GateKind::Inv => self.not(operands[0]),
            GateKind::Mux => self.ite(operands[0], operands[2], operands[1]),
            GateKind::And | GateKind::Or | GateKind::Xor => {
                let mut acc = operands[0];
                for &op in &operands[1..] {
                    acc = self.apply2(kind, acc, op)?;
                }
                Ok(acc)
            }
            GateKind::Nand | GateKind::Nor => {
                let core = if kind == GateKind::Nand {
                    GateKind::And
                } else {
                    GateKind::Or
                };
                let (last, init) = operands.split_last().expect("arity checked");
                let mut acc = init[0];
                for &op in &init[1..] {
                    acc = self.apply2(core, acc, op)?;
                }
                self.apply2(kind, acc, *last)
            }
        }
    }

    fn apply2(&mut self, kind: GateKind, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        use NodeRef as N;
        match kind {
            GateKind::And => self.ite(a, b, N::ZERO),
            GateKind::Or => self.ite(a, N::ONE, b),
            // The negated operand is only built when ite could look at it.
            GateKind::Nand => {
                if a == N::ZERO {
                    return Ok(N::ONE);
                }
                let nb = self.not(b)?;
                self.ite(a, nb, N::ONE)
            }
            GateKind::Nor => {
                if a == N::ONE {
                    return Ok(N::ZERO);
                }
                let nb = self.not(b)?;
                self.ite(a, N::ZERO, nb)
            }
            GateKind::Xor => {
                if a == N::ZERO {
                    return Ok(b);
                }
                let nb = self.not(b)?;
                self.ite(a, nb, b)
            }
            GateKind::Inv | GateKind::Buf | GateKind::Mux => unreachable!("not a binary gate"),
        }
    }

    /// Restriction of `f` with variable `index` fixed to `value`.
    pub fn cofactor(&mut self, f: NodeRef, index: usize, value: bool) -> Result<NodeRef, BddError> {
        self.check_var(index)?;
        self.check(f)?;
        let level = self.var_to_level[index];
        let mut memo = FxHashMap::default();
        self.restrict_rec(f, level, value, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        f: NodeRef,
        level: u32,
        value: bool,
        memo: &mut FxHashMap<NodeRef, NodeRef>,
    ) -> Result<NodeRef, BddError> {
        let Some(node) = self.node(f) else {
            return Ok(f);
        };
        if node.level > level {
            return Ok(f);
        }
        if node.level == level {
            return Ok(if value { node.high } else { node.low });
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let high = self.restrict_rec(node.high, level, value, memo)?;
        let low = self.restrict_rec(node.low, level, value, memo)?;
        let r = self.find_or_add(node.level, high, low)?;
        memo.insert(f, r);
        Ok(r)
    }

    /// `assignment[i]` is the value of variable `i`.
    pub fn eval(&self, f: NodeRef, assignment: &[bool]) -> Result<bool, BddError> {
        self.check(f)?;
        let mut cur = f;
        while let Some(node) = self.node(cur) {
            let var = self.level_to_var[node.level as usize] as usize;
            let bit = *assignment.get(var).ok_or(BddError::IncompleteAssignment {
                len: assignment.len(),
                needed: var,
            })?;
            cur = if bit { node.high } else { node.low };
        }
        Ok(cur == NodeRef::ONE)
    }

    fn reachable(&self, roots: &[NodeRef]) -> Vec<NodeRef> {
        let mut seen = FxHashSet::default();
        let mut stack: Vec<NodeRef> = roots.iter().copied().filter(|r| !r.is_terminal()).collect();
        let mut out = Vec::new();
        while let Some(f) = stack.pop() {
            if !seen.insert(f) {
                continue;
            }
            out.push(f);
            let n = self.nodes[f.arena_index()];
            for c in [n.high, n.low] {
                if !c.is_terminal() && !seen.contains(&c) {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Number of non-terminal nodes reachable from `f`.
    pub fn size(&self, f: NodeRef) -> SizeReport {
        SizeReport {
            node_count: self.reachable(&[f]).len(),
        }
    }

    /// Size of the shared graph below all `roots`.
    pub fn shared_size(&self, roots: &[NodeRef]) -> usize {
        self.reachable(roots).len()
    }

    /// Internal nodes reachable from `roots`, in no particular order.
    pub fn reachable_nodes(&self, roots: &[NodeRef]) -> Vec<NodeRef> {
        self.reachable(roots)
    }

    /// Variables that label nodes reachable from `f`.
    pub fn support(&self, f: NodeRef) -> BTreeSet<usize> {
        self.reachable(&[f])
            .into_iter()
            .map(|r| self.level_to_var[self.nodes[r.arena_index()].level as usize] as usize)
            .collect()
    }

    /// Rebuild `f` from `src` inside this manager. Uses direct node
    /// construction when both managers share the same order and `ite`
    /// otherwise.
    pub fn import(&mut self, src: &Manager, f: NodeRef) -> Result<NodeRef, BddError> {
        src.check(f)?;
        if src.var_count() > self.var_count() {
            return Err(BddError::VarOutOfRange {
                index: src.var_count() - 1,
                var_count: self.var_count(),
            });
        }
        let same_order = src.var_count() == self.var_count() && src.level_to_var == self.level_to_var;
        let mut memo = FxHashMap::default();
        self.import_rec(src, f, same_order, &mut memo)
    }

    fn import_rec(
        &mut self,
        src: &Manager,
        f: NodeRef,
        same_order: bool,
        memo: &mut FxHashMap<NodeRef, NodeRef>,
    ) -> Result<NodeRef, BddError> {
        let Some(node) = src.node(f) else {
            return Ok(f);
        };
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let high = self.import_rec(src, node.high, same_order, memo)?;
        let low = self.import_rec(src, node.low, same_order, memo)?;
        let var = src.level_to_var[node.level as usize] as usize;
        let r = if same_order {
            self.find_or_add(node.level, high, low)?
        } else {
            let v = self.var(var)?;
            self.ite(v, high, low)?
        };
        memo.insert(f, r);
        Ok(r)
    }

    /// Text dump of the nodes reachable from `roots`, one `id var high low`
    /// line per node, sorted by id.
    pub fn dump(&self, roots: &[NodeRef]) -> String {
        let mut nodes = self.reachable(roots);
        nodes.sort();
        let mut out = String::new();
        for f in nodes {
            let n = self.nodes[f.arena_index()];
            let var = self.level_to_var[n.level as usize];
            let _ = writeln!(out, "{} {} {} {}", f.0, var, n.high.0, n.low.0);
        }
        out
    }

    /// Checks that every stored node is ordered, reduced and unique.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.unique.len() != self.nodes.len() {
            return Err(format!(
                "unique table has {} entries for {} nodes",
                self.unique.len(),
                self.nodes.len()
            ));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let r = NodeRef::from_arena_index(i);
            if n.high == n.low {
                return Err(format!("node {} is redundant", r.0));
            }
            if self.level(n.high) <= n.level || self.level(n.low) <= n.level {
                return Err(format!("node {} violates the order", r.0));
            }
            if self.unique.get(n) != Some(&r) {
                return Err(format!("node {} is duplicated or missing from the unique table", r.0));
            }
        }
        Ok(())
    }
}
