use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Number formatted with 12 significant digits, trailing zeros trimmed.
/// Plain decimal notation for magnitudes in `[1e-5, 1e15)`, otherwise
/// scientific.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-5..15).contains(&exp) {
        let mant = trim(mant);
        return format!("{mant}e{exp}");
    }
    // round once to 12 significant digits, then print that value exactly
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{rounded:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to a Vec cannot fail
        w.write_record(&self.header).expect("csv header");
        for r in &self.rows {
            w.write_record(r).expect("csv row");
        }
        w.into_inner().expect("csv flush")
    }
}

/// What a command produces.
#[derive(Debug)]
pub enum Artifact {
    Json(String),
    Csv(Table),
}

impl Artifact {
    pub fn json<T: Serialize>(v: &T) -> Self {
        Artifact::Json(serde_json::to_string_pretty(v).expect("serializable output"))
    }

    fn bytes(&self) -> Vec<u8> {
        match self {
            Artifact::Json(s) => format!("{s}\n").into_bytes(),
            Artifact::Csv(t) => t.to_csv(),
        }
    }

    /// Writes to `out`, or to stdout when no path is given.
    pub fn emit(&self, out: Option<&Path>) -> CliResult<()> {
        let bytes = self.bytes();
        match out {
            Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            }),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(&bytes)
                    .and_then(|()| so.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
        }
    }
}
