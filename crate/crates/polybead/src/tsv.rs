//! Tab-separated tables with a single `#`-prefixed header line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn table_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", header.join("\t"));
    for row in rows {
        let _ = writeln!(s, "{}", row.join("\t"));
    }
    s
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    fs::write(path, table_string(header, rows)).map_err(Error::io(path))
}

/// Reads a table back as its header fields and string cells.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|h| h.strip_prefix("# "))
        .ok_or_else(|| Error::Parse {
            source_name: path.display().to_string(),
            line: 1,
            msg: "missing '#' header".into(),
        })?;
    Ok((
        header.split('\t').map(str::to_string).collect(),
        lines.map(|l| l.split('\t').map(str::to_string).collect()).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let s = table_string(&["x", "y"], &[vec![num(1.0), num(0.1)], vec![num(2.0), num(1e-20)]]);
        assert_eq!(s, "# x\ty\n1.0\t0.1\n2.0\t1e-20\n");
        assert_eq!("1e-20".parse::<f64>().unwrap(), 1e-20);
    }
}
