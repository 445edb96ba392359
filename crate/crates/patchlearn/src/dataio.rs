//! Labeled-set CSV: header `x1,..,xM,y`, one example per row, numbers with
//! 12 significant digits.

use std::io::{Read, Write};

use patchlearn_core::LabeledSet;

use crate::error::{HarnessError, Result};

/// Formats `v` with `digits` significant digits, `%g` style: plain decimal
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_labeled_csv<W: Write>(data: &LabeledSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=data.dims()).map(|m| format!("x{m}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in data.iter() {
        let row = x.iter().chain(std::iter::once(&y)).map(|&v| fmt_sig(v, 12));
        w.write_record(row)?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv output>", e))?;
    Ok(())
}

/// Inputs read from a CSV whose `y` column is optional.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    pub dims: usize,
    /// Row-major, `dims` values per row.
    pub inputs: Vec<f64>,
    pub targets: Option<Vec<f64>>,
}

impl InputTable {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.inputs.chunks(self.dims)
    }
}

pub fn read_labeled_csv<R: Read>(input: R) -> Result<LabeledSet> {
    let t = read_input_csv(input)?;
    let targets = t
        .targets
        .ok_or_else(|| HarnessError::CsvContent { line: 1, message: "last column must be `y`".into() })?;
    Ok(LabeledSet::new(t.dims, t.inputs, targets)?)
}

/// Reads `x1,..,xM[,y]`.
pub fn read_input_csv<R: Read>(input: R) -> Result<InputTable> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let has_y = names.last() == Some(&"y");
    let dims = if has_y { names.len() - 1 } else { names.len() };
    if dims == 0 {
        return Err(HarnessError::CsvContent { line: 1, message: "no input columns".into() });
    }
    for (m, name) in names[..dims].iter().enumerate() {
        if *name != format!("x{}", m + 1) {
            return Err(HarnessError::CsvContent {
                line: 1,
                message: format!("column {} should be `x{}`, found `{name}`", m + 1, m + 1),
            });
        }
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| HarnessError::CsvContent {
                line,
                message: format!("not a number: `{field}`"),
            })?;
            values.push(v);
        }
        if has_y {
            targets.push(values.pop().expect("row has the header's width"));
        }
        inputs.extend(values);
    }
    Ok(InputTable { dims, inputs, targets: has_y.then_some(targets) })
}
