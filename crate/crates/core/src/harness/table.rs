use serde_json::{Map, Value};

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_owned()
    } else if x.is_nan() {
        "NaN".to_owned()
    } else if x > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(x) => format_f64(*x),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(x) => Value::from(*x),
            Cell::Empty => Value::Null,
        }
    }
}

/// A row-per-threshold result table. Rows that failed carry an error
/// message; an `error` column is emitted only when at least one did.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<(Vec<Cell>, Option<String>)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|(_, e)| e.is_some()).count()
    }

    pub fn succeeded_rows(&self) -> usize {
        self.rows.len() - self.failed_rows()
    }

    /// Column `name` as floats; `None` for empty cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|(cells, _)| match cells[idx] {
                    Cell::Int(v) => Some(v as f64),
                    Cell::Num(x) => Some(x),
                    Cell::Empty => None,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let with_errors = self.failed_rows() > 0;
        let mut out = self.header.join(",");
        if with_errors {
            out.push_str(",error");
        }
        out.push('\n');
        for (cells, err) in &self.rows {
            let line: Vec<String> = cells.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            if with_errors {
                out.push(',');
                if let Some(e) = err {
                    out.push_str(&csv_quote(e));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Array of flat objects keyed by the header, in header order.
    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|(cells, err)| {
                let mut obj = Map::new();
                for (h, c) in self.header.iter().zip(cells) {
                    obj.insert(h.clone(), c.json());
                }
                if let Some(e) = err {
                    obj.insert("error".into(), Value::from(e.clone()));
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string(&records).expect("table serializes");
        s.push('\n');
        s
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn non_finite() {
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(f64::NAN), "NaN");
    }

    #[test]
    fn error_column_only_when_needed() {
        let mut t = Table::new(&["n", "x"]);
        t.rows.push((vec![Cell::Int(1), Cell::Num(-0.5)], None));
        assert_eq!(t.to_csv(), "n,x\n1,-0.5\n");
        t.rows.push((vec![Cell::Int(2), Cell::Empty], Some("domain, bad".into())));
        assert_eq!(t.to_csv(), "n,x,error\n1,-0.5,\n2,,\"domain, bad\"\n");
        assert_eq!(t.failed_rows(), 1);
        assert_eq!(
            t.to_json(),
            "[{\"n\":1,\"x\":-0.5},{\"n\":2,\"x\":null,\"error\":\"domain, bad\"}]\n"
        );
    }
}
