//! Line-based netlist format.
//!
//! ```text
//! # comment
//! .inputs a b
//! .outputs f
//! .const one 1
//! .gate and f a b
//! .end
//! ```
//!
//! MUX inputs are `select else then`. Names match `[A-Za-z_][A-Za-z0-9_]*`.
//! Parsing is strict: the first error wins and carries a 1-based line.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::circuit::{Circuit, CircuitError, Constant, Gate};
use crate::gate::GateKind;

pub const HEADER: &str = "# bddcheck netlist v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("unknown gate kind `{0}`")]
    UnknownGateKind(String),
    #[error("invalid signal name `{0}`")]
    BadName(String),
    #[error("constant value must be 0 or 1, got `{0}`")]
    BadBit(String),
    #[error("`{directive}` expects {expected}")]
    Operands {
        directive: &'static str,
        expected: &'static str,
    },
    #[error("signal `{0}` is defined more than once")]
    DuplicateSignal(String),
    #[error("undefined signal `{0}`")]
    UndefinedSignal(String),
    #[error("gate `{output}` of kind {kind} takes {expected} inputs, got {got}")]
    Arity {
        output: String,
        kind: GateKind,
        expected: &'static str,
        got: usize,
    },
    #[error("combinational cycle through `{0}`")]
    Cycle(String),
    #[error("no `.outputs` declared")]
    NoOutputs,
    #[error("missing `.end`")]
    MissingEnd,
    #[error("content after `.end`")]
    AfterEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn names<'a>(line: usize, toks: &[&'a str]) -> Result<Vec<&'a str>, ParseError> {
    for t in toks {
        if !is_valid_name(t) {
            return err(line, ParseErrorKind::BadName(t.to_string()));
        }
    }
    Ok(toks.to_vec())
}

pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut inputs = Vec::new();
    let mut outputs: Vec<(String, usize)> = Vec::new();
    let mut constants = Vec::new();
    let mut gates = Vec::new();
    // definition site of every signal, for diagnostics
    let mut defined: HashMap<String, usize> = HashMap::new();
    let mut gate_lines: HashMap<String, usize> = HashMap::new();
    let mut end_line = None;
    let mut last_line = 0;

    let mut define = |name: &str, line: usize| -> Result<(), ParseError> {
        if defined.insert(name.to_string(), line).is_some() {
            return err(line, ParseErrorKind::DuplicateSignal(name.to_string()));
        }
        Ok(())
    };

    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        let content = content.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&directive, rest)) = toks.split_first() else { continue };
        last_line = line;
        if end_line.is_some() {
            return err(line, ParseErrorKind::AfterEnd);
        }
        match directive {
            ".inputs" => {
                if rest.is_empty() {
                    return err(line, ParseErrorKind::Operands { directive: ".inputs", expected: "at least one name" });
                }
                for n in names(line, rest)? {
                    define(n, line)?;
                    inputs.push(n.to_string());
                }
            }
            ".outputs" => {
                if rest.is_empty() {
                    return err(line, ParseErrorKind::Operands { directive: ".outputs", expected: "at least one name" });
                }
                outputs.extend(names(line, rest)?.into_iter().map(|n| (n.to_string(), line)));
            }
            ".const" => {
                let [name, bit] = rest else {
                    return err(line, ParseErrorKind::Operands { directive: ".const", expected: "a name and a bit" });
                };
                names(line, &[name])?;
                let value = match *bit {
                    "0" => false,
                    "1" => true,
                    other => return err(line, ParseErrorKind::BadBit(other.to_string())),
                };
                define(name, line)?;
                constants.push(Constant { name: name.to_string(), value });
            }
            ".gate" => {
                let [kind, out, ins @ ..] = rest else {
                    return err(line, ParseErrorKind::Operands { directive: ".gate", expected: "a kind, an output and inputs" });
                };
                let kind: GateKind = kind
                    .parse()
                    .or_else(|_| err(line, ParseErrorKind::UnknownGateKind(kind.to_string())))?;
                names(line, &[out])?;
                let ins = names(line, ins)?;
                if !kind.arity_ok(ins.len()) {
                    return err(
                        line,
                        ParseErrorKind::Arity {
                            output: out.to_string(),
                            kind,
                            expected: kind.arity_text(),
                            got: ins.len(),
                        },
                    );
                }
                define(out, line)?;
                gate_lines.insert(out.to_string(), line);
                gates.push(Gate {
                    kind,
                    output: out.to_string(),
                    inputs: ins.into_iter().map(str::to_string).collect(),
                });
            }
            ".end" => {
                if !rest.is_empty() {
                    return err(line, ParseErrorKind::Operands { directive: ".end", expected: "no operands" });
                }
                end_line = Some(line);
            }
            other => return err(line, ParseErrorKind::UnknownDirective(other.to_string())),
        }
    }
    let Some(end_line) = end_line else {
        return err(last_line.max(1), ParseErrorKind::MissingEnd);
    };
    if outputs.is_empty() {
        return err(end_line, ParseErrorKind::NoOutputs);
    }
    // References may point forward, so check them once everything is known.
    for g in &gates {
        if let Some(missing) = g.inputs.iter().find(|s| !defined.contains_key(*s)) {
            return err(gate_lines[&g.output], ParseErrorKind::UndefinedSignal(missing.clone()));
        }
    }
    if let Some((missing, line)) = outputs.iter().find(|(s, _)| !defined.contains_key(s)) {
        return err(*line, ParseErrorKind::UndefinedSignal(missing.clone()));
    }
    let outputs = outputs.into_iter().map(|(s, _)| s).collect();
    Circuit::new(inputs, outputs, constants, gates).map_err(|e| {
        let line = e.gate_output().and_then(|s| gate_lines.get(s)).copied().unwrap_or(end_line);
        let kind = match e {
            CircuitError::Cycle(s) => ParseErrorKind::Cycle(s),
            CircuitError::DuplicateSignal(s) => ParseErrorKind::DuplicateSignal(s),
            CircuitError::UndefinedSignal { signal, .. } => ParseErrorKind::UndefinedSignal(signal),
            CircuitError::Arity { output, kind, expected, got } => ParseErrorKind::Arity { output, kind, expected, got },
            CircuitError::NoOutputs => ParseErrorKind::NoOutputs,
        };
        ParseError { line, kind }
    })
}

/// Canonical text: header, `.inputs`, `.outputs`, `.const` lines, gates in
/// topological order, `.end`.
pub fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    if !c.inputs().is_empty() {
        let _ = writeln!(out, ".inputs {}", c.inputs().join(" "));
    }
    let _ = writeln!(out, ".outputs {}", c.outputs().join(" "));
    for k in c.constants() {
        let _ = writeln!(out, ".const {} {}", k.name, u8::from(k.value));
    }
    for &g in c.topological_order() {
        let gate = &c.gates()[g];
        let _ = writeln!(out, ".gate {} {} {}", gate.kind, gate.output, gate.inputs.join(" "));
    }
    out.push_str(".end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND: &str = "# bddcheck netlist v1\n.inputs a b\n.outputs f\n.gate and f a b\n.end\n";

    fn kind_of(text: &str) -> (usize, ParseErrorKind) {
        let e = parse(text).unwrap_err();
        (e.line, e.kind)
    }

    #[test]
    fn minimal_and() {
        let c = parse(AND).unwrap();
        assert_eq!(c.input_count(), 2);
        assert_eq!(c.gates().len(), 1);
        assert_eq!(serialize(&c), AND);
        assert_eq!(AND.lines().count(), 5);
    }

    #[test]
    fn constants_precede_gates() {
        let text = ".inputs a\n.gate and f a k\n.const k 1\n.outputs f\n.end";
        let c = parse(text).unwrap();
        let s = serialize(&c);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[3], ".const k 1");
        assert_eq!(lines[4], ".gate and f a k");
        assert_eq!(parse(&s).unwrap(), c);
    }

    #[test]
    fn serialize_reorders_topologically() {
        let text = ".inputs a b\n.outputs g\n.gate inv g f\n.gate or f a b\n.end\n";
        let c = parse(text).unwrap();
        let s = serialize(&c);
        assert!(s.find(".gate or").unwrap() < s.find(".gate inv").unwrap());
        let again = parse(&s).unwrap();
        assert_eq!(serialize(&again), s);
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let text = "# hi\r\n\r\n.inputs a b   # trailing\r\n.outputs f\r\n.gate nand f a b\r\n.end\r\n";
        let c = parse(text).unwrap();
        assert_eq!(c.gates()[0].kind, GateKind::Nand);
    }

    #[test]
    fn mux_operand_order() {
        let c = parse(".inputs s e t\n.outputs m\n.gate mux m s e t\n.end\n").unwrap();
        assert_eq!(c.gates()[0].inputs, vec!["s", "e", "t"]);
    }

    #[test]
    fn diagnostics() {
        assert_eq!(
            kind_of(".inputs a\n.outputs f\n.gate and f a zz\n.end\n"),
            (3, ParseErrorKind::UndefinedSignal("zz".into()))
        );
        assert_eq!(
            kind_of(".inputs a b\n.outputs f\n.gate and a a b\n.end\n"),
            (3, ParseErrorKind::DuplicateSignal("a".into()))
        );
        assert!(matches!(
            kind_of(".inputs a b\n.outputs f\n.gate inv f a b\n.end\n"),
            (3, ParseErrorKind::Arity { got: 2, .. })
        ));
        assert!(matches!(
            kind_of(".inputs a\n.outputs f\n.gate and f a g\n.gate or g a f\n.end\n"),
            (3 | 4, ParseErrorKind::Cycle(_))
        ));
        assert_eq!(
            kind_of(".inputs a\n.outputs f\n.gate andd f a a\n.end\n"),
            (3, ParseErrorKind::UnknownGateKind("andd".into()))
        );
        assert_eq!(kind_of(".inputs 1a\n"), (1, ParseErrorKind::BadName("1a".into())));
        assert_eq!(kind_of("\n.wires a\n"), (2, ParseErrorKind::UnknownDirective(".wires".into())));
        assert_eq!(kind_of(".INPUTS a\n"), (1, ParseErrorKind::UnknownDirective(".INPUTS".into())));
        assert_eq!(kind_of(".inputs a\n.const k 2\n"), (2, ParseErrorKind::BadBit("2".into())));
        assert_eq!(kind_of(".inputs a\n.outputs a\n"), (2, ParseErrorKind::MissingEnd));
        assert_eq!(kind_of(".inputs a\n.outputs a\n.end\n.gate buf b a\n"), (4, ParseErrorKind::AfterEnd));
        assert_eq!(kind_of(".inputs a\n.end\n"), (2, ParseErrorKind::NoOutputs));
        assert_eq!(
            kind_of(".inputs a\n.outputs q\n.end\n"),
            (2, ParseErrorKind::UndefinedSignal("q".into()))
        );
        let msg = parse(".inputs a\n.outputs f\n.gate and f a zz\n.end\n").unwrap_err().to_string();
        assert_eq!(msg, "line 3: undefined signal `zz`");
    }

    #[test]
    fn names() {
        assert!(is_valid_name("_x9"));
        assert!(is_valid_name("A"));
        assert!(!is_valid_name(""));
        assert!(!is_valid_name("9a"));
        assert!(!is_valid_name("a-b"));
    }
}
