//! CSV output plumbing: destination handling, float formatting, and the
//! self-describing `#` metadata header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Formats a float with 17 significant digits (exact round-trip for f64).
pub fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Opens the output destination: a file when a path is given, stdout
/// otherwise.
pub fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the metadata header: the invoked subcommand, its full
/// configuration as `key=value` pairs, and the seed on its own line.
///
/// `--threads` and `--output` are deliberately *not* echoed: they must not
/// influence the bytes produced, and the determinism contract is "identical
/// output for any thread count".
pub fn write_header(
    out: &mut dyn Write,
    subcommand: &str,
    config: &[(&str, String)],
    seed: u64,
) -> io::Result<()> {
    write!(out, "# ksym {subcommand}")?;
    for (k, v) in config {
        write!(out, " {k}={v}")?;
    }
    writeln!(out)?;
    writeln!(out, "# seed={seed}")
}
