use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// Slack allowed on either side of [0, 1] for coherence values.
const VALUE_SLACK: f64 = 1e-9;

/// Sampled coherence C(b) on a strictly increasing baseline grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCurve {
    baselines: Vec<f64>,
    values: Vec<f64>,
}

fn validate(baselines: &[f64], values: &[f64]) -> std::result::Result<(), (usize, String)> {
    if baselines.len() != values.len() {
        return Err((0, format!(
            "{} baselines but {} values",
            baselines.len(),
            values.len()
        )));
    }
    if baselines.is_empty() {
        return Err((0, "curve has no samples".into()));
    }
    for (i, (&b, &c)) in baselines.iter().zip(values).enumerate() {
        if !b.is_finite() || b < 0.0 {
            return Err((i, format!("baseline {b} is not a nonnegative finite number")));
        }
        if i > 0 && b <= baselines[i - 1] {
            return Err((i, format!("baseline {b} does not increase")));
        }
        if !(-VALUE_SLACK..=1.0 + VALUE_SLACK).contains(&c) {
            return Err((i, format!("coherence {c} outside [0, 1]")));
        }
    }
    Ok(())
}

impl CoherenceCurve {
    pub fn new(baselines: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate(&baselines, &values).or_else(|(_, m)| arg(m))?;
        Ok(Self { baselines, values })
    }

    pub fn baselines(&self) -> &[f64] {
        &self.baselines
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.baselines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.baselines.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns(w, &["b", "C"], &[&self.baselines, &self.values])
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Parses the `b,C` schema; errors carry the 1-based line number.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (cols, lines) = read_columns_with_lines(r, &["b", "C"])?;
        let mut cols = cols.into_iter();
        let baselines = cols.next().unwrap_or_default();
        let values = cols.next().unwrap_or_default();
        validate(&baselines, &values).map_err(|(i, message)| Error::Parse {
            line: lines.get(i).copied().unwrap_or(1),
            message,
        })?;
        Ok(Self { baselines, values })
    }
}

/// Writes equal-length columns as CSV with a header row and LF endings.
pub fn write_columns<W: Write>(w: W, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    if headers.len() != columns.len() {
        return arg("header and column counts differ");
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return arg("columns differ in length");
    }
    let io = |e: csv::Error| Error::Numerical(format!("csv write failed: {e}"));
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(headers).map_err(io)?;
    for i in 0..rows {
        wtr.write_record(columns.iter().map(|c| format!("{:.15e}", c[i])))
            .map_err(io)?;
    }
    wtr.flush()
        .map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;
    Ok(())
}

/// Reads a numeric CSV whose header must equal `headers` exactly.
pub fn read_columns<R: Read>(r: R, headers: &[&str]) -> Result<Vec<Vec<f64>>> {
    read_columns_with_lines(r, headers).map(|(c, _)| c)
}

fn read_columns_with_lines<R: Read>(r: R, headers: &[&str]) -> Result<(Vec<Vec<f64>>, Vec<u64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let parse_err = |e: csv::Error| Error::Parse {
        line: e.position().map_or(1, |p| p.line()),
        message: e.to_string(),
    };
    let found = rdr.headers().map_err(parse_err)?.clone();
    if found.iter().ne(headers.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                headers.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut cols = vec![Vec::new(); headers.len()];
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("field {:?} in column {} is not a number", field, headers[j]),
            })?;
            cols[j].push(v);
        }
        lines.push(line);
    }
    Ok((cols, lines))
}
