//! Binary state dump: a 16-byte header (8-byte magic, `u32` version,
//! `u32` qubit count) followed by `2^n` little-endian `(re, im)` doubles.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use super::{SimError, StateVector};

pub const DUMP_MAGIC: [u8; 8] = *b"QCSIMSV\0";
pub const DUMP_VERSION: u32 = 1;

pub fn write_dump<W: Write>(state: &StateVector, mut out: W) -> io::Result<()> {
    out.write_all(&DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&(state.qubit_count() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(1 << 16);
    for chunk in state.amplitudes().chunks(4096) {
        buf.clear();
        for a in chunk {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()
}

pub fn read_dump<R: Read>(mut input: R) -> Result<StateVector, SimError> {
    let io_err = |e: io::Error| SimError::BadDump(e.to_string());
    let mut header = [0u8; 16];
    input.read_exact(&mut header).map_err(io_err)?;
    if header[..8] != DUMP_MAGIC {
        return Err(SimError::BadDump("wrong magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(SimError::BadDump(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    if n == 0 || n > 40 {
        return Err(SimError::BadDump(format!("implausible qubit count {n}")));
    }
    let mut amplitudes = Vec::with_capacity(1 << n);
    let mut pair = [0u8; 16];
    for _ in 0..1usize << n {
        input.read_exact(&mut pair).map_err(io_err)?;
        let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
        let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
        amplitudes.push(Complex64::new(re, im));
    }
    Ok(StateVector::from_amplitudes(amplitudes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let amps: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64 / 7.0, -(i as f64))).collect();
        let s = StateVector::from_amplitudes(amps);
        let mut bytes = Vec::new();
        write_dump(&s, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 8 * 16);
        assert_eq!(read_dump(&bytes[..]).unwrap().amplitudes(), s.amplitudes());
    }

    #[test]
    fn rejects_truncated_input() {
        let s = StateVector::new(2, 30).unwrap();
        let mut bytes = Vec::new();
        write_dump(&s, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(read_dump(&bytes[..]), Err(SimError::BadDump(_))));
    }
}
