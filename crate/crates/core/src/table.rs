//! Plain-text CSV emission shared by every exporter in the crate.

use std::fmt::Write as _;

/// Formats a float with 17 significant digits so it round-trips exactly.
pub fn float17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "+inf" } else { "-inf" }.to_owned();
    }
    format!("{x:.16e}")
}

/// Row-oriented CSV builder. Cells never contain commas, so no quoting.
#[derive(Debug, Clone)]
pub struct CsvTable {
    out: String,
    width: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self {
            out,
            width: header.len(),
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut n = 0;
        for (i, cell) in cells.into_iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            let _ = write!(self.out, "{}", cell.as_ref());
            n += 1;
        }
        debug_assert_eq!(n, self.width, "row width does not match header");
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}
