//! Result serialization. Complex numbers appear as `[re, im]` arrays in JSON
//! and as paired `re`/`im` columns in CSV; every float is emitted losslessly
//! (JSON via shortest round-trip form, CSV with 17 significant digits).

use num_complex::Complex64;
use serde_json::{json, Value};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub struct CsvWriter {
    lines: Vec<String>,
}

impl CsvWriter {
    pub fn new() -> CsvWriter {
        CsvWriter { lines: Vec::new() }
    }

    pub fn header(&mut self, cols: &[&str]) {
        self.lines.push(cols.join(","));
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn finish(self) -> String {
        self.lines.join("\n") + "\n"
    }
}

/// Matrix as N rows with interleaved re/im columns, no header.
pub fn matrix_csv(entries: &ndarray::Array2<Complex64>) -> String {
    let mut w = CsvWriter::new();
    for i in 0..entries.nrows() {
        let mut fields = Vec::with_capacity(2 * entries.ncols());
        for j in 0..entries.ncols() {
            fields.push(fmt_f64(entries[[i, j]].re));
            fields.push(fmt_f64(entries[[i, j]].im));
        }
        w.row(&fields);
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_formatting_is_lossless() {
        for v in [0.1, std::f64::consts::E - 1.0, 1.0 / 3.0, 1e-300, -4.0e17] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
    }

    #[test]
    fn json_complex_is_two_element_array() {
        let v = complex_json(Complex64::new(1.5, -2.5));
        assert_eq!(v.to_string(), "[1.5,-2.5]");
    }
}
