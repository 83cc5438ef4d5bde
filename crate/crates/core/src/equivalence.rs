//! Miter-based equivalence checking: XOR matching outputs, OR the
//! differences together, and check the result BDD against the 0-terminal.

use serde::Serialize;

use crate::bdd::{BddError, Manager, NodeRef, VarOrder};
use crate::circuit::{Circuit, CircuitBuilder, Gate, NameAllocator};
use crate::gate::GateKind;
use crate::sim::{simulate, SimError, SimOptions, SimStats};

/// Name of the miter output.
pub const MITER_OUTPUT: &str = "out";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MiterError {
    #[error("primary inputs differ: {left:?} vs {right:?}")]
    InputMismatch { left: Vec<String>, right: Vec<String> },
    #[error("output counts differ: {left} vs {right}")]
    OutputCountMismatch { left: usize, right: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    /// The node capacity ran out before the miter output was built.
    Aborted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    /// Input assignment in PI declaration order, present iff not equivalent.
    pub counterexample: Option<Vec<bool>>,
    pub stats: SimStats,
    /// Signal that exhausted the capacity, for aborted runs.
    pub failing_signal: Option<String>,
}

/// Renames every non-input signal of one side of the miter.
fn prefixed_gates(c: &Circuit, rename: &dyn Fn(&str) -> String) -> Vec<Gate> {
    c.gates()
        .iter()
        .map(|g| Gate {
            kind: g.kind,
            output: rename(&g.output),
            inputs: g.inputs.iter().map(|s| rename(s)).collect(),
        })
        .collect()
}

/// Join two circuits over their shared inputs into a single-output miter.
/// Both sides keep their structure; internal names get an `l_`/`r_` prefix.
pub fn build_miter(c1: &Circuit, c2: &Circuit) -> Result<Circuit, MiterError> {
    if c1.inputs() != c2.inputs() {
        return Err(MiterError::InputMismatch {
            left: c1.inputs().to_vec(),
            right: c2.inputs().to_vec(),
        });
    }
    if c1.output_count() != c2.output_count() {
        return Err(MiterError::OutputCountMismatch {
            left: c1.output_count(),
            right: c2.output_count(),
        });
    }
    let mut names = NameAllocator::new(c1.inputs());
    let out_name = names.fresh(MITER_OUTPUT);
    let mut side_name = |c: &Circuit, prefix: &str| {
        let mut map = std::collections::HashMap::new();
        for name in c.signal_names().iter().skip(c.input_count()) {
            map.insert(name.clone(), names.fresh(&format!("{prefix}{name}")));
        }
        map
    };
    let left = side_name(c1, "l_");
    let right = side_name(c2, "r_");
    let lname = |s: &str| left.get(s).cloned().unwrap_or_else(|| s.to_string());
    let rname = |s: &str| right.get(s).cloned().unwrap_or_else(|| s.to_string());

    let mut b = CircuitBuilder::new();
    b.inputs(c1.inputs()).output(&out_name);
    for k in c1.constants() {
        b.constant(&lname(&k.name), k.value);
    }
    for k in c2.constants() {
        b.constant(&rname(&k.name), k.value);
    }
    for g in prefixed_gates(c1, &lname).into_iter().chain(prefixed_gates(c2, &rname)) {
        b.push_gate(g);
    }
    let m = c1.output_count();
    let mut diffs = Vec::with_capacity(m);
    for (j, (o1, o2)) in c1.outputs().iter().zip(c2.outputs()).enumerate() {
        let name = if m == 1 {
            out_name.clone()
        } else {
            names.fresh(&format!("miter_x{j}"))
        };
        b.push_gate(Gate {
            kind: GateKind::Xor,
            output: name.clone(),
            inputs: vec![lname(o1), rname(o2)],
        });
        diffs.push(name);
    }
    if m > 1 {
        let mut acc = diffs[0].clone();
        for (k, d) in diffs.iter().enumerate().skip(1) {
            let name = if k == m - 1 {
                out_name.clone()
            } else {
                names.fresh(&format!("miter_o{k}"))
            };
            b.push_gate(Gate {
                kind: GateKind::Or,
                output: name.clone(),
                inputs: vec![acc, d.clone()],
            });
            acc = name;
        }
    }
    Ok(b.build().expect("miter of well-formed circuits is well-formed"))
}

/// Lexicographically smallest satisfying assignment of `f`, variable 0
/// first and preferring 0. Variables outside the support come out 0.
pub fn extract_counterexample(mgr: &mut Manager, f: NodeRef) -> Result<Vec<bool>, CounterexampleError> {
    if f == NodeRef::ZERO {
        return Err(CounterexampleError::Unsatisfiable);
    }
    let mut cur = f;
    let mut assignment = vec![false; mgr.var_count()];
    for (var, bit) in assignment.iter_mut().enumerate() {
        if cur.is_terminal() {
            break;
        }
        let low = mgr.cofactor(cur, var, false)?;
        if low != NodeRef::ZERO {
            cur = low;
        } else {
            *bit = true;
            cur = mgr.cofactor(cur, var, true)?;
        }
    }
    debug_assert_eq!(cur, NodeRef::ONE);
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CounterexampleError {
    #[error("the function is constant 0; no witness exists")]
    Unsatisfiable,
    #[error(transparent)]
    Bdd(#[from] BddError),
}

/// Decide equivalence of `c1` and `c2` by simulating their miter under
/// `order`. Capacity exhaustion yields [`Verdict::Aborted`] with the partial
/// trace.
pub fn check_equivalence(
    c1: &Circuit,
    c2: &Circuit,
    order: &VarOrder,
    opts: &SimOptions,
) -> Result<VerifyOutcome, MiterError> {
    let miter = build_miter(c1, c2)?;
    let mut result = match simulate(&miter, order, opts) {
        Ok(r) => r,
        Err(SimError::Capacity { signal, stats, .. }) => {
            return Ok(VerifyOutcome {
                verdict: Verdict::Aborted,
                counterexample: None,
                stats: *stats,
                failing_signal: Some(signal),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let out = result.output_bdds()[0];
    let stats = result.stats.clone();
    if out == NodeRef::ZERO {
        return Ok(VerifyOutcome {
            verdict: Verdict::Equivalent,
            counterexample: None,
            stats,
            failing_signal: None,
        });
    }
    // Lifting the capacity: the witness walk may need a few restricted nodes.
    result.manager_mut().set_capacity(usize::MAX);
    let mut cex = match extract_counterexample(result.manager_mut(), out) {
        Ok(a) => a,
        Err(CounterexampleError::Bdd(e)) => return Err(e.into()),
        Err(CounterexampleError::Unsatisfiable) => unreachable!("out is not the 0-terminal"),
    };
    cex.truncate(c1.input_count());
    Ok(VerifyOutcome {
        verdict: Verdict::NotEquivalent,
        counterexample: Some(cex),
        stats,
        failing_signal: None,
    })
}

/// Default verification order: depth-first order of the left circuit.
pub fn check_equivalence_default(c1: &Circuit, c2: &Circuit) -> Result<VerifyOutcome, MiterError> {
    check_equivalence(c1, c2, &c1.dfs_variable_order(), &SimOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateKind::*;
    use crate::oracle::evaluate_outputs;

    fn single(kind: GateKind) -> Circuit {
        CircuitBuilder::new()
            .inputs(&["x1", "x2"])
            .output("f")
            .gate(kind, "f", &["x1", "x2"])
            .build()
            .unwrap()
    }

    #[test]
    fn self_miter_is_constant_zero() {
        let c = single(And);
        let m = build_miter(&c, &c).unwrap();
        assert_eq!(m.outputs(), &["out".to_string()]);
        let outcome = check_equivalence_default(&c, &c).unwrap();
        assert_eq!(outcome.verdict, Verdict::Equivalent);
        assert_eq!(outcome.counterexample, None);
    }

    #[test]
    fn and_vs_or_counterexample() {
        let outcome = check_equivalence_default(&single(And), &single(Or)).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotEquivalent);
        let cex = outcome.counterexample.unwrap();
        // smallest differing assignment: x1=0, x2=1
        assert_eq!(cex, vec![false, true]);
        assert_ne!(
            evaluate_outputs(&single(And), &cex).unwrap(),
            evaluate_outputs(&single(Or), &cex).unwrap()
        );
    }

    #[test]
    fn de_morgan_pair() {
        let lhs = single(Nand);
        let rhs = CircuitBuilder::new()
            .inputs(&["x1", "x2"])
            .output("f")
            .gate(Inv, "n1", &["x1"])
            .gate(Inv, "n2", &["x2"])
            .gate(Or, "f", &["n1", "n2"])
            .build()
            .unwrap();
        assert_eq!(check_equivalence_default(&lhs, &rhs).unwrap().verdict, Verdict::Equivalent);
    }

    #[test]
    fn two_output_miter_shape() {
        let c = CircuitBuilder::new()
            .inputs(&["a", "b"])
            .output("p")
            .output("q")
            .gate(And, "p", &["a", "b"])
            .gate(Xor, "q", &["a", "b"])
            .build()
            .unwrap();
        let m = build_miter(&c, &c).unwrap();
        let added: Vec<GateKind> = m.gates()[4..].iter().map(|g| g.kind).collect();
        assert_eq!(added, vec![Xor, Xor, Or]);
        let last = m.gates().last().unwrap();
        assert_eq!(last.output, "out");
        assert_eq!(last.inputs, vec!["miter_x0".to_string(), "miter_x1".to_string()]);
    }

    #[test]
    fn interface_errors() {
        let c = single(And);
        let other = CircuitBuilder::new()
            .inputs(&["x2", "x1"])
            .output("f")
            .gate(And, "f", &["x1", "x2"])
            .build()
            .unwrap();
        assert!(matches!(build_miter(&c, &other), Err(MiterError::InputMismatch { .. })));
        let two = CircuitBuilder::new()
            .inputs(&["x1", "x2"])
            .output("f")
            .output("x1")
            .gate(And, "f", &["x1", "x2"])
            .build()
            .unwrap();
        assert_eq!(
            build_miter(&c, &two).unwrap_err(),
            MiterError::OutputCountMismatch { left: 1, right: 2 }
        );
    }

    #[test]
    fn names_do_not_collide_with_inputs() {
        let c = CircuitBuilder::new()
            .inputs(&["out", "l_f"])
            .output("f")
            .gate(Or, "f", &["out", "l_f"])
            .build()
            .unwrap();
        let m = build_miter(&c, &c).unwrap();
        assert_eq!(m.outputs(), &["out_1".to_string()]);
        assert_eq!(check_equivalence_default(&c, &c).unwrap().verdict, Verdict::Equivalent);
    }

    #[test]
    fn outputs_wired_straight_to_inputs() {
        let a = CircuitBuilder::new().inputs(&["x", "y"]).output("x").build().unwrap();
        let b = CircuitBuilder::new().inputs(&["x", "y"]).output("y").build().unwrap();
        let outcome = check_equivalence_default(&a, &b).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotEquivalent);
        assert_eq!(outcome.counterexample, Some(vec![false, true]));
    }

    #[test]
    fn counterexample_examples() {
        let mut m = Manager::with_order(&VarOrder::identity(4));
        assert_eq!(extract_counterexample(&mut m, NodeRef::ONE).unwrap(), vec![false; 4]);
        let x3 = m.var(3).unwrap();
        assert_eq!(
            extract_counterexample(&mut m, x3).unwrap(),
            vec![false, false, false, true]
        );
        let x1 = m.var(1).unwrap();
        let x2 = m.var(2).unwrap();
        let f = m.xor(x1, x2).unwrap();
        assert_eq!(
            extract_counterexample(&mut m, f).unwrap(),
            vec![false, false, true, false]
        );
        assert_eq!(
            extract_counterexample(&mut m, NodeRef::ZERO),
            Err(CounterexampleError::Unsatisfiable)
        );
    }

    #[test]
    fn counterexample_ignores_order() {
        let mut m = Manager::new(3, &[2, 1, 0]).unwrap();
        let x0 = m.var(0).unwrap();
        let x2 = m.var(2).unwrap();
        let f = m.or(x0, x2).unwrap();
        assert_eq!(extract_counterexample(&mut m, f).unwrap(), vec![false, false, true]);
    }

    #[test]
    fn capacity_gives_aborted_verdict() {
        let c = single(Xor);
        let outcome = check_equivalence(&c, &single(And), &c.dfs_variable_order(), &SimOptions::with_capacity(2)).unwrap();
        assert_eq!(outcome.verdict, Verdict::Aborted);
        assert!(outcome.failing_signal.is_some());
        assert!(!outcome.stats.completed);
    }
}
