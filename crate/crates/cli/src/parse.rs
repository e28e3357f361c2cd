//! Spectrum parsing: inline comma-separated lists accepting `0,1` for reals
//! and `0+0i,1+2i` for complex entries, plus the JSON input-file schema
//! `{"x": [[re,im],…], "y": [[re,im],…]}`.

use num_complex::Complex64;
use serde::Deserialize;

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // find the sign splitting re and im (skip position 0 and exponents)
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].trim().parse().map_err(|e| format!("bad real part in '{t}': {e}"))?;
                let im_str = body[k..].trim();
                let im: f64 = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => im_str.parse().map_err(|e| format!("bad imaginary part in '{t}': {e}"))?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                // purely imaginary: "2i", "i", "-i"
                let im: f64 = match body.trim() {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    other => other.parse().map_err(|e| format!("bad imaginary number '{t}': {e}"))?,
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|e| format!("bad number '{t}': {e}"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

pub fn parse_spectrum_list(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(parse_complex).collect()
}

#[derive(Deserialize)]
pub struct InputFile {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
}

pub fn load_input_file(path: &str) -> Result<(Vec<Complex64>, Vec<Complex64>), String> {
    let data = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let input: InputFile =
        serde_json::from_str(&data).map_err(|e| format!("bad input schema in {path}: {e}"))?;
    let conv = |v: Vec<[f64; 2]>| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
    Ok((conv(input.x), conv(input.y)))
}
