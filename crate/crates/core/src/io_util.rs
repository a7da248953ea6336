//! Shared CSV formatting helpers.
//!
//! All artifact emitters in this crate print floats with 17 significant
//! digits so emitted values round-trip bit-exactly through parsing, and mark
//! header lines with a leading '#'.

/// Format a float with 17 significant digits (round-trip safe).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A '#'-prefixed header line.
pub fn comment(line: &str) -> String {
    format!("# {line}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -2.2e-308,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
