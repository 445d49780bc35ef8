//! CSV and JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mpgmres::{ConvergenceReport, Result};

use crate::experiment::Summary;

pub const HISTORY_HEADER: &str = "iter,phase,implicit_relres,explicit_relres";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_history_csv<W: Write>(report: &ConvergenceReport, mut out: W) -> Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for h in &report.history {
        writeln!(
            out,
            "{},{},{},{}",
            h.iter,
            h.phase.as_str(),
            opt(h.implicit_relres),
            opt(h.explicit_relres)
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_json<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `2250000` -> `2,250,000`.
pub fn group_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousands() {
        assert_eq!(group_thousands(0), "0");
        assert_eq!(group_thousands(999), "999");
        assert_eq!(group_thousands(1000), "1,000");
        assert_eq!(group_thousands(11_244_000), "11,244,000");
        assert_eq!(group_thousands(20_232_004), "20,232,004");
    }
}
