//! Language-neutral file formats for signals, phase fields, operators and
//! scalars.
//!
//! JSON: `{"kind": "signal", "n": 4, "values": [[re, im], ...]}` with grids
//! stored row-major. CSV: one header row naming the index columns followed by
//! `re,im`, one entry per row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorWindow;
use crate::phase::{PhaseField, Signal, VecPhaseField, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Wire {
    Signal { n: usize, values: Vec<[f64; 2]> },
    Field { n: usize, values: Vec<[f64; 2]> },
    Operator { n: usize, values: Vec<[f64; 2]> },
    VecField { n: usize, values: Vec<[f64; 2]> },
    Scalar { value: f64 },
}

fn pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|c| [c.re, c.im]).collect()
}

fn complexes(values: &[[f64; 2]]) -> Vec<C64> {
    values.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl Wire {
    pub fn kind(&self) -> &'static str {
        match self {
            Wire::Signal { .. } => "signal",
            Wire::Field { .. } => "field",
            Wire::Operator { .. } => "operator",
            Wire::VecField { .. } => "vec_field",
            Wire::Scalar { .. } => "scalar",
        }
    }

    fn expected_len(&self) -> Option<(usize, usize)> {
        match self {
            Wire::Signal { n, values } => Some((*n, values.len())),
            Wire::Field { n, values } | Wire::Operator { n, values } => Some((n * n, values.len())),
            Wire::VecField { n, values } => Some((n * n * n, values.len())),
            Wire::Scalar { .. } => None,
        }
    }

    /// Checks that the value count matches `n` and all entries are finite.
    pub fn validate(&self) -> Result<()> {
        if let Some((expected, found)) = self.expected_len() {
            if expected == 0 {
                return Err(parse_err(format!("{}: field `n` must be at least 1", self.kind())));
            }
            if expected != found {
                return Err(parse_err(format!(
                    "{}: field `values` has {found} entries, expected {expected} for the given `n`",
                    self.kind()
                )));
            }
        }
        match self {
            Wire::Scalar { .. } => Ok(()),
            Wire::Signal { values, .. }
            | Wire::Field { values, .. }
            | Wire::Operator { values, .. }
            | Wire::VecField { values, .. } => match values.iter().position(|[a, b]| !(a.is_finite() && b.is_finite()))
            {
                Some(i) => Err(parse_err(format!("{}: `values[{i}]` is not finite", self.kind()))),
                None => Ok(()),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: Wire = serde_json::from_str(text).map_err(|e| parse_err(format!("JSON: {e}")))?;
        w.validate()?;
        Ok(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire values serialize")
    }

    pub fn from_signal(f: &Signal) -> Self {
        Wire::Signal {
            n: f.n(),
            values: pairs(f.as_slice()),
        }
    }

    pub fn from_field(f: &PhaseField) -> Self {
        Wire::Field {
            n: f.n(),
            values: pairs(f.as_slice()),
        }
    }

    pub fn from_operator(t: &OperatorWindow) -> Self {
        Wire::Operator {
            n: t.n(),
            values: pairs(t.entries()),
        }
    }

    pub fn from_vec_field(f: &VecPhaseField) -> Self {
        let n = f.n();
        let mut values = Vec::with_capacity(n * n * n);
        for z in crate::phase::phase_points(n) {
            values.extend(pairs(f.at(z)));
        }
        Wire::VecField { n, values }
    }

    fn mismatch(&self, want: &str) -> Error {
        parse_err(format!("expected a {want}, found a {}", self.kind()))
    }

    pub fn to_signal(&self) -> Result<Signal> {
        self.validate()?;
        match self {
            Wire::Signal { values, .. } => Signal::new(complexes(values)),
            other => Err(other.mismatch("signal")),
        }
    }

    pub fn to_field(&self) -> Result<PhaseField> {
        self.validate()?;
        match self {
            Wire::Field { n, values } => PhaseField::new(*n, complexes(values)),
            other => Err(other.mismatch("field")),
        }
    }

    pub fn to_operator(&self) -> Result<OperatorWindow> {
        self.validate()?;
        match self {
            Wire::Operator { n, values } => OperatorWindow::new(*n, complexes(values)),
            other => Err(other.mismatch("operator")),
        }
    }

    pub fn to_vec_field(&self) -> Result<VecPhaseField> {
        self.validate()?;
        match self {
            Wire::VecField { n, values } => VecPhaseField::new(*n, complexes(values)),
            other => Err(other.mismatch("vec_field")),
        }
    }

    pub fn to_scalar(&self) -> Result<f64> {
        match self {
            Wire::Scalar { value } => Ok(*value),
            other => Err(other.mismatch("scalar")),
        }
    }

    fn index_columns(&self) -> &'static [&'static str] {
        match self {
            Wire::Signal { .. } => &["t"],
            Wire::Field { .. } => &["x", "xi"],
            Wire::Operator { .. } => &["row", "col"],
            Wire::VecField { .. } => &["x", "xi", "t"],
            Wire::Scalar { .. } => &[],
        }
    }

    /// Header row plus one row per entry, indices in row-major order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| w.write_record(&rec).expect("in-memory write");
        match self {
            Wire::Scalar { value } => {
                write(&mut w, vec!["value".into()]);
                write(&mut w, vec![fmt_f64(*value)]);
            }
            Wire::Signal { n, values }
            | Wire::Field { n, values }
            | Wire::Operator { n, values }
            | Wire::VecField { n, values } => {
                let cols = self.index_columns();
                let mut header: Vec<String> = cols.iter().map(|s| s.to_string()).collect();
                header.extend(["re".to_string(), "im".to_string()]);
                write(&mut w, header);
                for (i, [re, im]) in values.iter().enumerate() {
                    let mut rec = Vec::with_capacity(cols.len() + 2);
                    let mut rest = i;
                    let mut idx = vec![0usize; cols.len()];
                    for slot in idx.iter_mut().rev() {
                        *slot = rest % n;
                        rest /= n;
                    }
                    rec.extend(idx.iter().map(|v| v.to_string()));
                    rec.push(fmt_f64(*re));
                    rec.push(fmt_f64(*im));
                    write(&mut w, rec);
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Parses CSV written by [`Wire::to_csv`]; rows may appear in any order but
    /// every index must occur exactly once.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| parse_err(format!("CSV header: {e}")))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let kind = match h.as_slice() {
            ["value"] => "scalar",
            ["t", "re", "im"] => "signal",
            ["x", "xi", "re", "im"] => "field",
            ["row", "col", "re", "im"] => "operator",
            ["x", "xi", "t", "re", "im"] => "vec_field",
            _ => {
                return Err(parse_err(format!(
                    "CSV line 1: unrecognized header `{}`",
                    header.join(",")
                )))
            }
        };
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| parse_err(format!("CSV line {line}: {e}")))?;
            if rec.len() != header.len() {
                return Err(parse_err(format!(
                    "CSV line {line}: expected {} fields, found {}",
                    header.len(),
                    rec.len()
                )));
            }
            let mut fields = Vec::with_capacity(rec.len());
            for (name, raw) in header.iter().zip(rec.iter()) {
                let v: f64 = parse_f64(raw)
                    .ok_or_else(|| parse_err(format!("CSV line {line}, field `{name}`: invalid number `{raw}`")))?;
                fields.push(v);
            }
            rows.push((line, fields));
        }
        if kind == "scalar" {
            return match rows.as_slice() {
                [(_, f)] => Ok(Wire::Scalar { value: f[0] }),
                _ => Err(parse_err(format!(
                    "CSV: scalar needs exactly one row, found {}",
                    rows.len()
                ))),
            };
        }
        let dims = header.len() - 2;
        let mut n = 0usize;
        for (line, f) in &rows {
            for (name, v) in header.iter().zip(&f[..dims]) {
                if *v < 0.0 || v.fract() != 0.0 {
                    return Err(parse_err(format!(
                        "CSV line {line}, field `{name}`: index must be a nonnegative integer"
                    )));
                }
                n = n.max(*v as usize + 1);
            }
        }
        let total = n.pow(dims as u32);
        if n == 0 || rows.len() != total {
            return Err(parse_err(format!(
                "CSV: {} rows do not form a complete grid (index range suggests n = {n}, needing {total} rows)",
                rows.len()
            )));
        }
        let mut values = vec![None; total];
        for (line, f) in &rows {
            let idx = f[..dims].iter().fold(0usize, |acc, v| acc * n + *v as usize);
            if values[idx].is_some() {
                return Err(parse_err(format!("CSV line {line}: duplicate index")));
            }
            values[idx] = Some([f[dims], f[dims + 1]]);
        }
        let values: Vec<[f64; 2]> = values.into_iter().map(|v| v.expect("grid is complete")).collect();
        let w = match kind {
            "signal" => Wire::Signal { n, values },
            "field" => Wire::Field { n, values },
            "operator" => Wire::Operator { n, values },
            _ => Wire::VecField { n, values },
        };
        w.validate()?;
        Ok(w)
    }

    /// Reads JSON when the text starts with `{`, CSV otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_csv(text)
        }
    }
}

/// Shortest representation that parses back to the same double.
fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_f64(raw: &str) -> Option<f64> {
    match raw.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => raw.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::gaussian_window;

    #[test]
    fn json_round_trip_is_lossless() {
        let g = gaussian_window(5).unwrap();
        let w = Wire::from_signal(&g);
        let back = Wire::from_json(&w.to_json()).unwrap().to_signal().unwrap();
        assert_eq!(back, g);
        let t = OperatorWindow::from_fn(3, |a, b| C64::new(a as f64 / 3.0, -(b as f64) * 0.1)).unwrap();
        let back = Wire::from_json(&Wire::from_operator(&t).to_json())
            .unwrap()
            .to_operator()
            .unwrap();
        assert_eq!(back, t);
        // products of arbitrary doubles exercise the full mantissa
        let mut x = 0.123456789f64;
        let vals: Vec<C64> = (0..400)
            .map(|_| {
                x = (x * 3.987654321 + 0.1).fract();
                C64::new(x * x * 1e3, -x / 7.0)
            })
            .collect();
        let t = OperatorWindow::new(20, vals).unwrap();
        let w = Wire::from_operator(&t);
        assert_eq!(Wire::from_json(&w.to_json()).unwrap(), w);
        assert_eq!(Wire::from_csv(&w.to_csv()).unwrap(), w);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let f = PhaseField::from_fn(4, |z| C64::new(z.x as f64 / 7.0, z.xi as f64 * 1e-17)).unwrap();
        let w = Wire::from_field(&f);
        let text = w.to_csv();
        assert!(text.starts_with("x,xi,re,im\n"));
        assert_eq!(Wire::from_csv(&text).unwrap(), w);
        let vf = VecPhaseField::new(2, (0..8).map(|i| C64::new(i as f64, 0.5)).collect()).unwrap();
        let w = Wire::from_vec_field(&vf);
        assert_eq!(Wire::parse(&w.to_csv()).unwrap().to_vec_field().unwrap(), vf);
        let s = Wire::Scalar { value: 0.1 + 0.2 };
        assert_eq!(Wire::parse(&s.to_csv()).unwrap(), s);
    }

    #[test]
    fn malformed_inputs_name_the_problem() {
        let e = Wire::from_json(r#"{"kind":"signal","n":3,"values":[[1,0],[0,1]]}"#).unwrap_err();
        assert!(e.to_string().contains("values"));
        let e = Wire::from_csv("t,re,im\n0,1,0\n1,abc,0\n").unwrap_err();
        assert!(e.to_string().contains("line 3") && e.to_string().contains("`re`"));
        let e = Wire::from_csv("x,xi,re,im\n0,0,1,0\n0,1,1,0\n1,0,1,0\n").unwrap_err();
        assert!(e.to_string().contains("complete grid"));
        let e = Wire::from_csv("a,b\n1,2\n").unwrap_err();
        assert!(e.to_string().contains("line 1"));
        let e = Wire::from_json(r#"{"kind":"field","n":1,"values":[[1,0]]}"#)
            .unwrap()
            .to_signal()
            .unwrap_err();
        assert!(e.to_string().contains("expected a signal"));
    }
}
