use num_complex::Complex64;

use super::expand::{control_lined, dagger_lined, Lined};
use super::{eval_angle, parse_complex, Gate, GateOp, Instruction, ParseError, Program};

const U4_UNITARY_TOL: f64 = 1e-9;

enum Frame {
    Dagger { line: usize },
    Control { qubit: usize, line: usize },
}

/// Splits an argument list on commas, keeping quoted strings whole.
fn split_args(rest: &str, line: usize) -> Result<Vec<String>, ParseError> {
    let mut args = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    for ch in rest.chars() {
        match ch {
            '"' => {
                quoted = !quoted;
                current.push(ch);
            }
            ',' if !quoted => {
                args.push(std::mem::take(&mut current));
            }
            _ => current.push(ch),
        }
    }
    if quoted {
        return Err(ParseError::MalformedInstruction { line, reason: "unterminated quote".into() });
    }
    if !current.trim().is_empty() || !args.is_empty() {
        args.push(current);
    }
    let args: Vec<String> = args.into_iter().map(|a| a.trim().to_string()).collect();
    if args.iter().any(String::is_empty) {
        return Err(ParseError::MalformedInstruction { line, reason: "empty argument".into() });
    }
    Ok(args)
}

fn unquote(arg: &str) -> &str {
    arg.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(arg)
}

struct LineParser<'a> {
    line: usize,
    mnemonic: &'a str,
    args: Vec<String>,
}

impl LineParser<'_> {
    fn malformed(&self, reason: impl Into<String>) -> ParseError {
        ParseError::MalformedInstruction { line: self.line, reason: reason.into() }
    }

    fn expect_args(&self, count: usize) -> Result<(), ParseError> {
        if self.args.len() == count {
            Ok(())
        } else {
            Err(self.malformed(format!(
                "{} takes {count} argument(s), found {}",
                self.mnemonic,
                self.args.len()
            )))
        }
    }

    fn count(&self, arg: &str) -> Result<usize, ParseError> {
        arg.parse::<usize>()
            .map_err(|_| self.malformed(format!("expected a non-negative integer, found `{arg}`")))
    }

    fn qubit(&self, arg: &str, qubit_count: usize) -> Result<usize, ParseError> {
        let q = self.count(arg)?;
        if q >= qubit_count {
            return Err(ParseError::QubitOutOfRange { line: self.line, qubit: q, count: qubit_count });
        }
        Ok(q)
    }

    fn qubits(&self, args: &[String], qubit_count: usize) -> Result<Vec<usize>, ParseError> {
        let qs = args
            .iter()
            .map(|a| self.qubit(a, qubit_count))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, q) in qs.iter().enumerate() {
            if qs[..k].contains(q) {
                return Err(ParseError::DuplicateQubitArg { line: self.line, qubit: *q });
            }
        }
        Ok(qs)
    }

    fn angle(&self, arg: &str) -> Result<f64, ParseError> {
        eval_angle(arg).map_err(|e| e.with_line(self.line))
    }

    fn u4(&self) -> Result<GateOp, ParseError> {
        let body = unquote(&self.args[1]);
        let entries: Vec<&str> = body.split(',').map(str::trim).collect();
        if entries.len() != 4 {
            return Err(self.malformed("U4 takes four comma-separated values"));
        }
        // Element form is recognised by an imaginary unit outside `pi`.
        let element_form = entries.iter().any(|e| e.replace("pi", "").contains('i'));
        if element_form {
            let mut m = [Complex64::new(0.0, 0.0); 4];
            for (slot, e) in m.iter_mut().zip(&entries) {
                *slot = parse_complex(e).map_err(|err| err.with_line(self.line))?;
            }
            let op = GateOp::U4Matrix(m);
            let deviation = op.matrix(vec![0]).unitarity_error();
            if deviation > U4_UNITARY_TOL {
                return Err(ParseError::NonUnitaryU4 { line: self.line, deviation });
            }
            Ok(op)
        } else {
            let mut a = [0.0; 4];
            for (slot, e) in a.iter_mut().zip(&entries) {
                *slot = self.angle(e)?;
            }
            Ok(GateOp::U4Angles(a))
        }
    }

    fn gate(&self, n: usize) -> Result<Option<Gate>, ParseError> {
        let fixed = |op: GateOp| -> Result<Option<Gate>, ParseError> {
            self.expect_args(op.arity())?;
            Ok(Some(Gate::new(op, self.qubits(&self.args, n)?)))
        };
        let rotation = |make: fn(f64) -> GateOp| -> Result<Option<Gate>, ParseError> {
            self.expect_args(2)?;
            let q = self.qubits(&self.args[..1], n)?;
            Ok(Some(Gate::new(make(self.angle(&self.args[1])?), q)))
        };
        match self.mnemonic {
            "H" => fixed(GateOp::H),
            "X" => fixed(GateOp::X),
            "Y" => fixed(GateOp::Y),
            "Z" => fixed(GateOp::Z),
            "S" => fixed(GateOp::S),
            "T" => fixed(GateOp::T),
            "RX" => rotation(GateOp::Rx),
            "RY" => rotation(GateOp::Ry),
            "RZ" => rotation(GateOp::Rz),
            "U4" => {
                self.expect_args(2)?;
                let q = self.qubits(&self.args[..1], n)?;
                Ok(Some(Gate::new(self.u4()?, q)))
            }
            "CNOT" => fixed(GateOp::Cnot),
            "CZ" => fixed(GateOp::Cz),
            "CR" => {
                self.expect_args(3)?;
                let q = self.qubits(&self.args[..2], n)?;
                Ok(Some(Gate::new(GateOp::Cr(self.angle(&self.args[2])?), q)))
            }
            "SWAP" => fixed(GateOp::Swap),
            "iSWAP" => fixed(GateOp::ISwap),
            "TOFFOLI" => fixed(GateOp::Toffoli),
            _ => Ok(None),
        }
    }
}

fn is_directive(mnemonic: &str) -> bool {
    matches!(
        mnemonic,
        "QINIT" | "CREG" | "DAGGER" | "ENDDAGGER" | "CONTROL" | "ENDCONTROL" | "MEASURE" | "PMEASURE"
    )
}

/// Parses a script into a block-expanded [`Program`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut qubit_count: Option<usize> = None;
    let mut creg_count: Option<usize> = None;
    let mut frames: Vec<Frame> = Vec::new();
    let mut bodies: Vec<Vec<Lined>> = vec![Vec::new()];
    let mut first_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if first_line == 0 {
            first_line = line;
        }
        let (mnemonic, rest) = match trimmed.find(char::is_whitespace) {
            Some(k) => (&trimmed[..k], trimmed[k..].trim()),
            None => (trimmed, ""),
        };
        let lp = LineParser { line, mnemonic, args: split_args(rest, line)? };

        if mnemonic == "QINIT" {
            if qubit_count.is_some() {
                return Err(lp.malformed("QINIT given twice"));
            }
            lp.expect_args(1)?;
            let n = lp.count(&lp.args[0])?;
            if n == 0 {
                return Err(lp.malformed("QINIT needs at least one qubit"));
            }
            qubit_count = Some(n);
            continue;
        }
        let Some(n) = qubit_count else {
            if is_directive(mnemonic) || lp.gate(usize::MAX)?.is_some() {
                return Err(ParseError::MissingQinit { line });
            }
            return Err(ParseError::UnknownMnemonic { line, mnemonic: mnemonic.to_string() });
        };

        match mnemonic {
            "CREG" => {
                if creg_count.is_some() {
                    return Err(lp.malformed("CREG given twice"));
                }
                lp.expect_args(1)?;
                creg_count = Some(lp.count(&lp.args[0])?);
            }
            "DAGGER" => {
                lp.expect_args(0)?;
                frames.push(Frame::Dagger { line });
                bodies.push(Vec::new());
            }
            "CONTROL" => {
                lp.expect_args(1)?;
                let qubit = lp.qubit(&lp.args[0], n)?;
                frames.push(Frame::Control { qubit, line });
                bodies.push(Vec::new());
            }
            "ENDDAGGER" => {
                lp.expect_args(0)?;
                match frames.pop() {
                    Some(Frame::Dagger { .. }) => {
                        let body = bodies.pop().expect("frame body");
                        let expanded = dagger_lined(body)?;
                        bodies.last_mut().expect("parent body").extend(expanded);
                    }
                    _ => {
                        return Err(ParseError::UnbalancedBlock {
                            line,
                            reason: "ENDDAGGER without a matching DAGGER".into(),
                        })
                    }
                }
            }
            "ENDCONTROL" => {
                lp.expect_args(1)?;
                let qubit = lp.qubit(&lp.args[0], n)?;
                match frames.pop() {
                    Some(Frame::Control { qubit: open, .. }) if open == qubit => {
                        let body = bodies.pop().expect("frame body");
                        let expanded = control_lined(body, qubit)?;
                        bodies.last_mut().expect("parent body").extend(expanded);
                    }
                    _ => {
                        return Err(ParseError::UnbalancedBlock {
                            line,
                            reason: format!("ENDCONTROL {qubit} without a matching CONTROL {qubit}"),
                        })
                    }
                }
            }
            "MEASURE" => {
                lp.expect_args(2)?;
                let qubit = lp.qubit(&lp.args[0], n)?;
                let creg_text = lp.args[1]
                    .strip_prefix('$')
                    .ok_or_else(|| lp.malformed("MEASURE target register must be written $j"))?;
                let creg = lp.count(creg_text)?;
                let count = creg_count.unwrap_or(0);
                if creg >= count {
                    return Err(ParseError::CregOutOfRange { line, creg, count });
                }
                if let Some(frame) = frames.last() {
                    return Err(match frame {
                        Frame::Dagger { .. } => ParseError::MeasureInsideDagger { line },
                        Frame::Control { .. } => ParseError::MeasureInsideControl { line },
                    });
                }
                bodies[0].push((Instruction::Measure { qubit, creg }, line));
            }
            "PMEASURE" => {
                if lp.args.is_empty() {
                    return Err(lp.malformed("PMEASURE needs at least one qubit"));
                }
                let qubits = lp.qubits(&lp.args, n)?;
                if let Some(frame) = frames.last() {
                    return Err(match frame {
                        Frame::Dagger { .. } => ParseError::MeasureInsideDagger { line },
                        Frame::Control { .. } => ParseError::MeasureInsideControl { line },
                    });
                }
                bodies[0].push((Instruction::PMeasure { qubits }, line));
            }
            _ => match lp.gate(n)? {
                Some(g) => bodies.last_mut().expect("body").push((Instruction::Gate(g), line)),
                None => {
                    return Err(ParseError::UnknownMnemonic { line, mnemonic: mnemonic.to_string() })
                }
            },
        }
    }

    if let Some(frame) = frames.last() {
        let (line, reason) = match frame {
            Frame::Dagger { line } => (*line, "DAGGER without ENDDAGGER".to_string()),
            Frame::Control { qubit, line } => (*line, format!("CONTROL {qubit} without ENDCONTROL")),
        };
        return Err(ParseError::UnbalancedBlock { line, reason });
    }
    let Some(qubit_count) = qubit_count else {
        return Err(ParseError::MissingQinit { line: first_line });
    };

    let body = bodies.pop().expect("top-level body");
    let (instructions, source_lines) = body.into_iter().unzip();
    Ok(Program { qubit_count, creg_count: creg_count.unwrap_or(0), instructions, source_lines })
}
