//! Numeric CSV tables: one header row, LF line endings, values in scientific
//! notation with up to 17 significant digits (exact round trip for `f64`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const FULL_PRECISION: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if header.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                header.len(),
                columns.len()
            )));
        }
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(Error::Shape("table columns differ in length".into()));
            }
        }
        Ok(Self { header, columns })
    }

    pub fn from_named(columns: Vec<(&str, Vec<f64>)>) -> Result<Self> {
        let (names, cols) = columns.into_iter().map(|(n, c)| (n.to_string(), c)).unzip();
        Self::new(names, cols)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }

    /// Profile tables have a strictly increasing coordinate in the first column.
    pub fn check_profile(&self) -> Result<()> {
        match self.columns.first() {
            Some(x) if x.windows(2).all(|w| w[1] > w[0]) => Ok(()),
            Some(_) => Err(Error::Shape("first column must be strictly increasing".into())),
            None => Err(Error::Shape("profile table has no columns".into())),
        }
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let p = precision.clamp(1, FULL_PRECISION) - 1;
        let mut s = self.header.join(",");
        s.push('\n');
        for r in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format!("{:.*e}", p, c[r])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Config {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| bad(1, "empty CSV".into()))?;
        let header: Vec<String> = head.split(',').map(|h| h.trim().to_string()).collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (no, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(bad(no + 1, format!("expected {} fields, got {}", header.len(), fields.len())));
            }
            for (col, f) in columns.iter_mut().zip(fields) {
                col.push(
                    f.trim()
                        .parse()
                        .map_err(|_| bad(no + 1, format!("not a number: '{}'", f.trim())))?,
                );
            }
        }
        Self::new(header, columns)
    }

    pub fn write(&self, path: &Path, precision: usize) -> Result<()> {
        fs::write(path, self.to_csv(precision)).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let t = Table::from_named(vec![("x", vec![0.0, 0.5]), ("v", vec![1.0, -2.5e-300])]).unwrap();
        let s = t.to_csv(FULL_PRECISION);
        assert_eq!(s, "x,v\n0.0000000000000000e0,1.0000000000000000e0\n5.0000000000000000e-1,-2.5000000000000000e-300\n");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn shape_errors() {
        assert!(Table::new(vec!["a".into()], vec![]).is_err());
        assert!(Table::from_named(vec![("a", vec![1.0]), ("b", vec![])]).is_err());
        let t = Table::from_named(vec![("x", vec![0.0, 0.0])]).unwrap();
        assert!(t.check_profile().is_err());
        assert!(Table::parse_csv("a,b\n1,2\n3\n", "t").is_err());
        assert!(Table::parse_csv("a\nfoo\n", "t").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = Table::from_named(vec![("x", vec![0.1, 0.2, 0.3]), ("y", vec![1.0 / 3.0, 2.0f64.sqrt(), -0.0])]).unwrap();
        t.write(&path, FULL_PRECISION).unwrap();
        assert_eq!(Table::read(&path).unwrap(), t);
    }

    proptest! {
        #[test]
        fn values_round_trip_exactly(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20)) {
            let t = Table::from_named(vec![("v", v.clone())]).unwrap();
            let back = Table::parse_csv(&t.to_csv(FULL_PRECISION), "p").unwrap();
            for (a, b) in back.columns[0].iter().zip(&v) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
