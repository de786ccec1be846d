//! Minimal CSV table with fixed 17-significant-digit numbers and `#` comment
//! lines for certificates.

use std::fmt::Write as _;

/// A cell: a number, or a short token such as a flag.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    buf: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Table { buf: String::new(), width: header.len() };
        t.buf.push_str(&header.join(","));
        t.buf.push('\n');
        t
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.width);
        let parts: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => num(x),
                Cell::Text(s) => s,
            })
            .collect();
        self.buf.push_str(&parts.join(","));
        self.buf.push('\n');
    }

    pub fn comment(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.buf, "# {}", line.as_ref());
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn layout() {
        let mut t = Table::new(&["k", "flag"]);
        t.row(vec![0.5.into(), "ok".into()]);
        t.comment("certified=true");
        assert_eq!(t.into_string(), "k,flag\n5.0000000000000000e-1,ok\n# certified=true\n");
    }
}
