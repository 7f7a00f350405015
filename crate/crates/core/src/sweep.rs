//! Tabulated curves backing each figure panel.

use std::fmt::Write as _;

/// One column of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub values: Vec<f64>,
}

/// An x-grid with any number of equal-length columns and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub x_name: String,
    pub x: Vec<f64>,
    pub curves: Vec<Curve>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn new(x_name: impl Into<String>, x: Vec<f64>) -> Self {
        Self { x_name: x_name.into(), x, curves: Vec::new(), metadata: Vec::new() }
    }

    /// Append a column. Panics if its length differs from the grid.
    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.x.len(), "column length must match the x grid");
        self.curves.push(Curve { name: name.into(), values });
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.curves.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    /// CSV with `# key: value` header lines. Floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str(&self.x_name);
        for c in &self.curves {
            s.push(',');
            s.push_str(&c.name);
        }
        s.push('\n');
        for (i, x) in self.x.iter().enumerate() {
            let _ = write!(s, "{x:?}");
            for c in &self.curves {
                let _ = write!(s, ",{:?}", c.values[i]);
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = SweepResult::new("P", vec![0.0, 0.5]);
        r.push("f", vec![1.0, 0.25]);
        r.meta("seed", 7);
        assert_eq!(r.to_csv(), "# seed: 7\nP,f\n0.0,1.0\n0.5,0.25\n");
        assert_eq!(r.column("f"), Some(&[1.0, 0.25][..]));
    }
}
