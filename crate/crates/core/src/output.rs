//! Fixed formatting for every number written to CSV.

use std::io::Write;

use crate::error::{Error, Result};

/// Thirteen significant digits in scientific notation; NaN as `nan`, −0 as 0.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.12e}", x + 0.0)
    }
}

/// Writes an optional `#`-prefixed preamble, the header and the rows.
pub(crate) fn write_table<W: Write>(
    mut out: W,
    comments: &[String],
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
