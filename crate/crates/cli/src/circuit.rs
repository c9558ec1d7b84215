//! Circuit-file parsers: the native gate-list text format and an
//! OpenQASM-2 subset (u/u1/u2/u3, rx/ry/rz, the fixed one-qubit gates, cx).

use num_complex::Complex64;
use qsim_core::error::{Error, Result};
use qsim_core::sv::GateOp;

#[derive(Debug)]
pub struct ParsedCircuit {
    pub n_qubits: usize,
    pub gates: Vec<GateOp>,
}

/// Dispatches on the first non-comment token: `OPENQASM` selects the QASM
/// subset parser, anything else the gate-list format. `declared_qubits` is
/// required for gate lists (QASM carries its own `qreg`).
pub fn parse_circuit(text: &str, declared_qubits: Option<usize>) -> Result<ParsedCircuit> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"));
    if first.map_or(false, |l| l.starts_with("OPENQASM")) {
        parse_qasm(text)
    } else {
        let n = declared_qubits.ok_or_else(|| {
            Error::Invalid("gate-list circuits need an explicit qubit count (--qubits)".into())
        })?;
        parse_gate_list(text, n)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// OpenQASM u3 matrix; u1/u2 are specializations (global phase dropped).
fn u3_gate(theta: f64, phi: f64, lambda: f64, target: usize) -> Result<GateOp> {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let u = [
        [c(ct, 0.0), -(Complex64::i() * lambda).exp() * st],
        [(Complex64::i() * phi).exp() * st, (Complex64::i() * (phi + lambda)).exp() * ct],
    ];
    GateOp::one_qubit(u, target)
}

fn fixed_gate(name: &str, target: usize) -> Option<Result<GateOp>> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let m: [[Complex64; 2]; 2] = match name {
        "x" => return Some(Ok(GateOp::x(target))),
        "h" => return Some(Ok(GateOp::h(target))),
        "y" => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        "z" => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        "s" => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]],
        "sdg" => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]],
        "t" => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(s2, s2)]],
        "tdg" => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(s2, -s2)]],
        _ => return None,
    };
    Some(GateOp::one_qubit(m, target))
}

/// Gate-list format: one gate per line, `#`/`//` comments. Grammar:
///   h|x|y|z|s|sdg|t|tdg Q
///   rx|ry|rz THETA Q
///   u THETA PHI LAMBDA Q
///   cx|cnot CONTROL TARGET
pub fn parse_gate_list(text: &str, n_qubits: usize) -> Result<ParsedCircuit> {
    let mut gates = Vec::new();
    let mut unsupported: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| {
            Error::Parse(format!("line {}: {} in `{}`", lineno + 1, what, line))
        };
        let qubit = |tok: &str| -> Result<usize> {
            let q: usize = tok.parse().map_err(|_| bad("bad qubit index"))?;
            if q >= n_qubits {
                return Err(Error::Invalid(format!(
                    "line {}: qubit {} out of range (n_qubits = {})",
                    lineno + 1,
                    q,
                    n_qubits
                )));
            }
            Ok(q)
        };
        let angle = |tok: &str| -> Result<f64> { eval_expr(tok).map_err(|_| bad("bad angle")) };
        match toks[0] {
            name @ ("h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg") => {
                if toks.len() != 2 {
                    return Err(bad("expected 1 qubit argument"));
                }
                gates.push(fixed_gate(name, qubit(toks[1])?).unwrap()?);
            }
            name @ ("rx" | "ry" | "rz") => {
                if toks.len() != 3 {
                    return Err(bad("expected THETA Q"));
                }
                let (theta, q) = (angle(toks[1])?, qubit(toks[2])?);
                gates.push(match name {
                    "rx" => GateOp::rx(theta, q),
                    "ry" => GateOp::ry(theta, q),
                    _ => GateOp::rz(theta, q),
                });
            }
            "u" => {
                if toks.len() != 5 {
                    return Err(bad("expected THETA PHI LAMBDA Q"));
                }
                gates.push(u3_gate(angle(toks[1])?, angle(toks[2])?, angle(toks[3])?, qubit(toks[4])?)?);
            }
            "cx" | "cnot" => {
                if toks.len() != 3 {
                    return Err(bad("expected CONTROL TARGET"));
                }
                let (control, target) = (qubit(toks[1])?, qubit(toks[2])?);
                if control == target {
                    return Err(bad("control equals target"));
                }
                gates.push(GateOp::Cnot { control, target });
            }
            other => unsupported.push(other.to_string()),
        }
    }
    if !unsupported.is_empty() {
        unsupported.sort();
        unsupported.dedup();
        return Err(Error::Invalid(format!(
            "unsupported gates: {}",
            unsupported.join(", ")
        )));
    }
    Ok(ParsedCircuit { n_qubits, gates })
}

/// OpenQASM-2 subset: one `qreg`, gates u/u1/u2/u3, rx/ry/rz, the fixed
/// one-qubit gates, and cx. `creg`, `measure`, and `barrier` are ignored;
/// anything else is collected into the error message.
pub fn parse_qasm(text: &str) -> Result<ParsedCircuit> {
    // Strip comments, then split on `;` so multi-statement lines work.
    let clean: String = text
        .lines()
        .map(|l| l.split("//").next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let mut n_qubits: Option<usize> = None;
    let mut reg_name = String::new();
    let mut gates = Vec::new();
    let mut unsupported: Vec<String> = Vec::new();
    for stmt in clean.split(';') {
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            if n_qubits.is_some() {
                return Err(Error::Invalid("multiple qreg declarations".into()));
            }
            let (name, size) = parse_reg_decl(rest)?;
            reg_name = name;
            n_qubits = Some(size);
            continue;
        }
        if stmt.starts_with("creg") || stmt.starts_with("barrier") || stmt.starts_with("measure") {
            continue;
        }
        let n = n_qubits
            .ok_or_else(|| Error::Invalid("gate statement before qreg declaration".into()))?;
        // Split "name(params) args" into head and argument list.
        let (head, args_str) = match stmt.find(|ch: char| ch.is_whitespace()) {
            Some(split_at) if !stmt[..split_at].contains('(') || stmt[..split_at].contains(')') => {
                stmt.split_at(split_at)
            }
            _ => {
                // Parameterized gate where whitespace may sit inside parens.
                let close = stmt.rfind(')').map(|i| i + 1).unwrap_or(0);
                if close == 0 {
                    (stmt, "")
                } else {
                    stmt.split_at(close)
                }
            }
        };
        let head = head.trim();
        let (name, params) = match head.find('(') {
            Some(open) => {
                let close =
                    head.rfind(')').ok_or_else(|| Error::Parse(format!("unbalanced parens: {stmt}")))?;
                let params: Vec<f64> = head[open + 1..close]
                    .split(',')
                    .map(eval_expr)
                    .collect::<Result<_>>()?;
                (head[..open].trim(), params)
            }
            None => (head, Vec::new()),
        };
        let args: Vec<usize> = args_str
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|a| parse_qubit_ref(a, &reg_name, n))
            .collect::<Result<_>>()?;
        let one = |k: usize| -> Result<usize> {
            if args.len() != 1 {
                return Err(Error::Parse(format!("{name} expects 1 qubit: {stmt}")));
            }
            if params.len() != k {
                return Err(Error::Parse(format!("{name} expects {k} parameter(s): {stmt}")));
            }
            Ok(args[0])
        };
        match name {
            "u" | "u3" => {
                let q = one(3)?;
                gates.push(u3_gate(params[0], params[1], params[2], q)?);
            }
            "u2" => {
                let q = one(2)?;
                gates.push(u3_gate(std::f64::consts::FRAC_PI_2, params[0], params[1], q)?);
            }
            "u1" => {
                let q = one(1)?;
                gates.push(u3_gate(0.0, 0.0, params[0], q)?);
            }
            "rx" => {
                let q = one(1)?;
                gates.push(GateOp::rx(params[0], q));
            }
            "ry" => {
                let q = one(1)?;
                gates.push(GateOp::ry(params[0], q));
            }
            "rz" => {
                let q = one(1)?;
                gates.push(GateOp::rz(params[0], q));
            }
            "cx" => {
                if args.len() != 2 || !params.is_empty() {
                    return Err(Error::Parse(format!("cx expects 2 qubits: {stmt}")));
                }
                if args[0] == args[1] {
                    return Err(Error::Invalid(format!("cx control equals target: {stmt}")));
                }
                gates.push(GateOp::Cnot { control: args[0], target: args[1] });
            }
            fixed if fixed_gate(fixed, 0).is_some() => {
                let q = one(0)?;
                gates.push(fixed_gate(fixed, q).unwrap()?);
            }
            other => unsupported.push(other.to_string()),
        }
    }
    if !unsupported.is_empty() {
        unsupported.sort();
        unsupported.dedup();
        return Err(Error::Invalid(format!(
            "unsupported gates: {}",
            unsupported.join(", ")
        )));
    }
    let n_qubits = n_qubits.ok_or_else(|| Error::Invalid("missing qreg declaration".into()))?;
    Ok(ParsedCircuit { n_qubits, gates })
}

fn parse_reg_decl(rest: &str) -> Result<(String, usize)> {
    let rest = rest.trim();
    let open = rest.find('[').ok_or_else(|| Error::Parse(format!("bad register: {rest}")))?;
    let close = rest.find(']').ok_or_else(|| Error::Parse(format!("bad register: {rest}")))?;
    let size: usize = rest[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad register size: {rest}")))?;
    Ok((rest[..open].trim().to_string(), size))
}

fn parse_qubit_ref(arg: &str, reg: &str, n_qubits: usize) -> Result<usize> {
    let open = arg.find('[').ok_or_else(|| Error::Parse(format!("bad qubit ref: {arg}")))?;
    let close = arg.find(']').ok_or_else(|| Error::Parse(format!("bad qubit ref: {arg}")))?;
    if arg[..open].trim() != reg {
        return Err(Error::Invalid(format!("unknown register in {arg}")));
    }
    let q: usize = arg[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad qubit index: {arg}")))?;
    if q >= n_qubits {
        return Err(Error::Invalid(format!("qubit {q} out of range (n_qubits = {n_qubits})")));
    }
    Ok(q)
}

/// Tiny arithmetic evaluator for QASM parameter expressions:
/// floats, `pi`, unary minus, + - * /, and parentheses.
pub fn eval_expr(s: &str) -> Result<f64> {
    let mut p = ExprParser { s: s.as_bytes(), pos: 0 };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(Error::Parse(format!("trailing input in expression: {s}")));
    }
    Ok(v)
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<f64> {
        let mut v = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            v = if op == b'+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64> {
        let mut v = self.atom()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.atom()?;
            v = if op == b'*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.atom()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.atom()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Parse("unbalanced parens in expression".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(ch) if ch.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"pi" => Ok(std::f64::consts::PI),
                    other => Err(Error::Parse(format!(
                        "unknown symbol in expression: {}",
                        String::from_utf8_lossy(other)
                    ))),
                }
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_digit()
                        || matches!(self.s[self.pos], b'.' | b'e' | b'E')
                        || (matches!(self.s[self.pos], b'+' | b'-')
                            && matches!(self.s[self.pos - 1], b'e' | b'E')))
                {
                    self.pos += 1;
                }
                std::str::from_utf8(&self.s[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Parse("bad number in expression".into()))
            }
            _ => Err(Error::Parse("empty expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expr_handles_pi_arithmetic() {
        assert!((eval_expr("-pi/2").unwrap() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((eval_expr("3*(1+2)/2").unwrap() - 4.5).abs() < 1e-15);
        assert!((eval_expr("1.5e-3").unwrap() - 1.5e-3).abs() < 1e-18);
        assert!(eval_expr("lambda").is_err());
    }

    #[test]
    fn gate_list_bell() {
        let c = parse_gate_list("# bell\nh 0\ncx 0 1\n", 2).unwrap();
        assert_eq!(c.gates.len(), 2);
    }

    #[test]
    fn gate_list_reports_unsupported_names() {
        let err = parse_gate_list("h 0\nccx 0 1 2\nswap 0 1\n", 3).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ccx") && msg.contains("swap"), "{msg}");
    }

    #[test]
    fn qasm_subset_parses() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\n\
                   h q[0];\ncx q[0],q[1];\nu3(pi/2, 0, pi) q[1];\nrz(-pi/4) q[0];\n\
                   measure q[0] -> c[0];\n";
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.gates.len(), 4);
    }

    #[test]
    fn qasm_unsupported_gate_listed() {
        let src = "OPENQASM 2.0;\nqreg q[3];\nccx q[0],q[1],q[2];\n";
        let msg = parse_qasm(src).unwrap_err().to_string();
        assert!(msg.contains("ccx"), "{msg}");
    }
}
