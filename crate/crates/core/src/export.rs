//! Text output helpers shared by the trajectory, path and report writers.

use sha2::{Digest, Sha256};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// Git-style object hash of a byte string: SHA-256 over `"blob <len>\0" ++ bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes a time-indexed table `t,X_1,...,X_k` from a time grid and
/// columnar values.
pub fn write_time_table<W: std::io::Write>(mut w: W, times: &[f64], columns: &[Vec<f64>], prefix: &str) -> std::io::Result<()> {
    write!(w, "t")?;
    for i in 1..=columns.len() {
        write!(w, ",{prefix}_{i}")?;
    }
    writeln!(w)?;
    for (j, t) in times.iter().enumerate() {
        write!(w, "{}", fmt17(*t))?;
        for col in columns {
            write!(w, ",{}", fmt17(col[j]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
