//! Text output shared by the command line and the tests.

use num_complex::Complex64;

use crate::statevector::ProbabilityTable;

/// `%g`-style rendering with six significant digits; exact zero is `0`.
pub fn format_probability(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One `bits: probability` line per entry, in ascending binary order.
pub fn format_pmeasure(table: &ProbabilityTable) -> String {
    let m = table.qubits.len();
    let mut out = String::new();
    for (b, p) in table.probabilities.iter().enumerate() {
        out += &format!("{}: {}\n", to_bits(b, m), format_probability(*p));
    }
    out
}

/// `re+imi` with six decimals.
pub fn format_complex(z: Complex64) -> String {
    let clean = |x: f64| {
        let s = format!("{x:.6}");
        if s == "-0.000000" {
            "0.000000".to_string()
        } else {
            s
        }
    };
    let re = clean(z.re);
    let im = clean(z.im);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{re}{sign}{im}i")
}

/// `width` characters, most significant bit first.
pub fn to_bits(value: usize, width: usize) -> String {
    (0..width).rev().map(|k| if value >> k & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parses an `n`-character 0/1 string with qubit `n-1` leftmost into a basis index.
pub fn parse_bits(text: &str, n: usize) -> Option<usize> {
    let t = text.trim();
    if t.len() != n || n >= usize::BITS as usize {
        return None;
    }
    t.chars().try_fold(0usize, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some(acc << 1 | 1),
        _ => None,
    })
}

/// Largest deviation of a table's total probability from one.
pub fn table_deviation(table: &ProbabilityTable) -> f64 {
    (table.probabilities.iter().sum::<f64>() - 1.0).abs()
}
