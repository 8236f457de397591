//! Plain-text model files.
//!
//! ```text
//! goalshot-mlp 1
//! layers 22 5 2
//! normalization
//! <mean> <std>            one line per input
//! layer 1
//! weights <fan_in> <fan_out>
//! <w ...>                 one row per input node
//! biases
//! <b ...>
//! layer 2
//! ...
//! end
//! ```
//!
//! Floats are written in shortest round-trip form, so a load returns
//! bit-identical parameters.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{MlpParams, Normalization};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "goalshot-mlp";

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

pub fn write_model<W: Write>(params: &MlpParams, mut out: W) -> Result<()> {
    params.validate()?;
    let mut s = format!("{MAGIC} {MODEL_FORMAT_VERSION}\nlayers");
    for n in &params.layer_sizes {
        let _ = write!(s, " {n}");
    }
    s.push_str("\nnormalization\n");
    for n in &params.normalization {
        let _ = writeln!(s, "{:?} {:?}", n.mean, n.std);
    }
    for (l, (w, b)) in params.weights.iter().zip(&params.biases).enumerate() {
        let (fan_in, fan_out) = (params.layer_sizes[l], params.layer_sizes[l + 1]);
        let _ = writeln!(s, "layer {}\nweights {fan_in} {fan_out}", l + 1);
        for row in w.chunks(fan_out) {
            let _ = writeln!(s, "{}", join(row));
        }
        let _ = writeln!(s, "biases\n{}", join(b));
    }
    s.push_str("end\n");
    out.write_all(s.as_bytes()).map_err(|e| Error::io("<model>", e))
}

pub fn save_model(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_model(params, &mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok(l);
                    }
                }
                None => return Err(Error::Model(format!("truncated file: expected {what}"))),
            }
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Model(format!("line {}: {msg}", self.line))
    }

    fn keyword(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let l = self.next(&format!("`{key}`"))?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`, found `{l}`")));
        }
        Ok(parts.collect())
    }

    fn floats(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let l = self.next(what)?;
        let values = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(format!("invalid number `{t}` in {what}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(self.err(format!("{what}: expected {n} values, found {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(self.err(format!("{what}: non-finite value")));
        }
        Ok(values)
    }

    fn counts(&self, parts: &[&str], n: usize, what: &str) -> Result<Vec<usize>> {
        if parts.len() < n {
            return Err(self.err(format!("{what}: expected {n} sizes")));
        }
        parts
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| self.err(format!("invalid size `{t}` in {what}"))))
            .collect()
    }
}

pub fn read_model<R: Read>(mut input: R) -> Result<MlpParams> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| Error::io("<model>", e))?;
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };

    let header = lines.next("header")?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [MAGIC, v] if *v == MODEL_FORMAT_VERSION.to_string() => {}
        [MAGIC, v] => {
            return Err(lines.err(format!("unsupported version `{v}` (expected {MODEL_FORMAT_VERSION})")));
        }
        _ => return Err(lines.err("not a goalshot model file")),
    }

    let parts = lines.keyword("layers")?;
    let sizes = lines.counts(&parts, 2, "layers")?;
    if sizes.contains(&0) {
        return Err(lines.err("layer sizes must be positive"));
    }

    if lines.keyword("normalization").is_err() {
        return Err(lines.err("missing normalization block"));
    }
    let mut normalization = Vec::with_capacity(sizes[0]);
    for _ in 0..sizes[0] {
        let v = lines.floats(2, "normalization")?;
        normalization.push(Normalization { mean: v[0], std: v[1] });
    }

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..sizes.len() - 1 {
        let parts = lines.keyword("layer")?;
        if parts != [(l + 1).to_string().as_str()] {
            return Err(lines.err(format!("expected layer {}", l + 1)));
        }
        let parts = lines.keyword("weights")?;
        let dims = lines.counts(&parts, 2, "weights")?;
        if dims != [sizes[l], sizes[l + 1]] {
            return Err(lines.err(format!(
                "weights shape {dims:?} does not match layers {} x {}",
                sizes[l],
                sizes[l + 1]
            )));
        }
        let mut w = Vec::with_capacity(sizes[l] * sizes[l + 1]);
        for _ in 0..sizes[l] {
            w.extend(lines.floats(sizes[l + 1], "weights")?);
        }
        lines.keyword("biases")?;
        biases.push(lines.floats(sizes[l + 1], "biases")?);
        weights.push(w);
    }
    lines.keyword("end")?;

    let params = MlpParams { layer_sizes: sizes, weights, biases, normalization };
    params.validate()?;
    Ok(params)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpParams> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
        other => other,
    })
}
