use super::{Instruction, ParseError};

pub(super) type Lined = (Instruction, usize);

pub(super) fn dagger_lined(block: Vec<Lined>) -> Result<Vec<Lined>, ParseError> {
    let mut out = Vec::with_capacity(block.len());
    for (inst, line) in block.into_iter().rev() {
        match inst {
            Instruction::Gate(g) => {
                out.extend(g.adjoint().into_iter().map(|a| (Instruction::Gate(a), line)));
            }
            _ => return Err(ParseError::MeasureInsideDagger { line }),
        }
    }
    Ok(out)
}

pub(super) fn control_lined(block: Vec<Lined>, control: usize) -> Result<Vec<Lined>, ParseError> {
    block
        .into_iter()
        .map(|(inst, line)| match inst {
            Instruction::Gate(mut g) => {
                if g.all_qubits().contains(&control) {
                    return Err(ParseError::ControlQubitCollision { line, qubit: control });
                }
                g.controls.insert(0, control);
                Ok((Instruction::Gate(g), line))
            }
            _ => Err(ParseError::MeasureInsideControl { line }),
        })
        .collect()
}

/// Reverses a gate block and replaces each gate by its adjoint.
pub fn expand_dagger(block: &[Instruction]) -> Result<Vec<Instruction>, ParseError> {
    let lined = block.iter().cloned().map(|i| (i, 0)).collect();
    Ok(dagger_lined(lined)?.into_iter().map(|(i, _)| i).collect())
}

/// Adds `control` as the most significant control of every gate in `block`.
pub fn expand_control(block: &[Instruction], control: usize) -> Result<Vec<Instruction>, ParseError> {
    let lined = block.iter().cloned().map(|i| (i, 0)).collect();
    Ok(control_lined(lined, control)?.into_iter().map(|(i, _)| i).collect())
}
