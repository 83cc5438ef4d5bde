//! Reduced ordered BDDs, symbolic simulation of gate-level circuits,
//! miter-based equivalence checking, and BDD-to-MUX-circuit expansion.

pub mod batch;
pub mod bdd;
pub mod bdd_circuit;
pub mod circuit;
pub mod cli;
pub mod equivalence;
pub mod gate;
pub mod gen;
pub mod netlist;
pub mod oracle;
pub mod sim;

pub use bdd::{BddError, Manager, NodeRef, VarOrder};
pub use bdd_circuit::{expand_to_circuit, roundtrip_verify, ExpansionMode, RoundtripReport};
pub use circuit::{Circuit, CircuitBuilder, CircuitError, Gate};
pub use equivalence::{build_miter, check_equivalence, extract_counterexample, Verdict, VerifyOutcome};
pub use gate::GateKind;
pub use netlist::{parse, serialize, ParseError};
pub use oracle::{circuit_truth_table, TruthTable};
pub use sim::{check_poly_bound, simulate, theorem1_probe, PolyBoundConfig, SimOptions, SimResult, SimStats};
