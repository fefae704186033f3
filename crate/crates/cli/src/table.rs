//! CSV tables with a fixed column order and stable number formatting.

use qndsim_core::estimators::Cell;

/// 15 significant digits, shortest decimal that reads back to the rounded value.
/// Absent values are empty fields.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(Option<f64>),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Num(v) => v.map(format_number).unwrap_or_default(),
            Field::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(Some(x))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Field::render).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// `mu` then one value column per name, then the matching `_stderr` columns.
pub fn value_stderr_table(names: &[&str], rows: impl IntoIterator<Item = (f64, Vec<Cell>)>) -> Table {
    let mut header = vec!["mu".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    header.extend(names.iter().map(|n| format!("{n}_stderr")));
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for (mu, cells) in rows {
        let mut row = vec![Field::from(mu)];
        row.extend(cells.iter().map(|c| Field::Num(c.value)));
        row.extend(cells.iter().map(|c| Field::Num(c.stderr)));
        t.push(row);
    }
    t
}

/// A parsed CSV file: header plus raw string fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCsv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(text: &str) -> Option<RawCsv> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    if rows.iter().any(|r| r.len() != header.len()) {
        return None;
    }
    Some(RawCsv { header, rows })
}
