//! Report emission: fixed number formatting, CSV tables and JSON documents.
//!
//! Every real is rounded to 10 significant digits before it is written so the
//! report tree does not depend on last-bit differences between math libraries.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const SIG_DIGITS: usize = 10;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Formats a real for CSV output.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    format!("{r}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    let r = round_sig(f);
                    *v = serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes `value` with rounded reals, pretty printed with a trailing LF.
pub fn to_json<S: Serialize>(value: &S) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Fatal(format!("serialization: {e}")))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Fatal(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    write_file(path, &to_json(value)?)
}

/// Small CSV builder over the `csv` writer with LF terminators.
pub struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(header: I) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header.into_iter().map(|h| h.as_ref().to_string())).expect("in-memory write");
        Self { w }
    }

    pub fn row<I: IntoIterator<Item = S>, S: AsRef<str>>(&mut self, fields: I) {
        self.w.write_record(fields.into_iter().map(|f| f.as_ref().to_string())).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn write(self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.finish())
    }
}
