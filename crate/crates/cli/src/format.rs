//! On-disk formats: weighted functions (text `FPN 1` or binary `FPNB`),
//! spectra (`FPNS 1`) and point sets (`FPSET 1`).
//!
//! Text formats are whitespace-separated tokens; reals are written with 17
//! significant digits so every binary64 value survives a round trip.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use apd_core::fourier::Spectrum;
use apd_core::{GFunction, Point, Space};
use num_complex::Complex64;

pub const TEXT_MAGIC: &str = "FPN";
pub const BINARY_MAGIC: &[u8; 4] = b"FPNB";
pub const SPECTRUM_MAGIC: &str = "FPNS";
pub const SET_MAGIC: &str = "FPSET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionFormat {
    Text,
    Binary,
}

impl FunctionFormat {
    /// Binary for `.fpnb` and `.bin` files, text otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("fpnb") | Some("bin") => FunctionFormat::Binary,
            _ => FunctionFormat::Text,
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
    what: &'static str,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str, what: &'static str) -> Self {
        Tokens {
            iter: text.split_whitespace(),
            what,
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.iter.next().ok_or_else(|| anyhow!("{} file ends early", self.what))
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        let got = self.next()?;
        ensure!(got == token, "{} file: expected `{token}`, found `{got}`", self.what);
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let token = self.next()?;
        token
            .parse()
            .map_err(|_| anyhow!("{} file: cannot parse {name} from `{token}`", self.what))
    }

    fn header(&mut self, magic: &str) -> Result<Space> {
        self.expect(magic)?;
        self.expect("1")?;
        self.expect("p")?;
        let p = self.parse("p")?;
        self.expect("n")?;
        let n = self.parse("n")?;
        Ok(Space::new(p, n)?)
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some(extra) => bail!("{} file: unexpected trailing token `{extra}`", self.what),
        }
    }
}

fn finite(values: &[f64]) -> Result<()> {
    if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        bail!("value {v} at index {k} is not finite");
    }
    Ok(())
}

/// Values in `[0, 1]` give a weighted set; anything else a signed function.
fn to_function(space: Space, values: Vec<f64>) -> Result<GFunction> {
    finite(&values)?;
    let weighted = values.iter().all(|v| (0.0..=1.0).contains(v));
    Ok(if weighted {
        GFunction::new(space, values)?
    } else {
        GFunction::signed(space, values)?
    })
}

pub fn parse_function(bytes: &[u8]) -> Result<GFunction> {
    if bytes.starts_with(BINARY_MAGIC) {
        ensure!(bytes.len() >= 12, "binary function file is truncated");
        let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes"));
        let space = Space::new(word(4), word(8))?;
        let body = &bytes[12..];
        ensure!(
            body.len() == 8 * space.size(),
            "binary function file holds {} bytes of values, expected {}",
            body.len(),
            8 * space.size()
        );
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        return to_function(space, values);
    }
    let text = std::str::from_utf8(bytes).context("function file is neither FPNB nor UTF-8 text")?;
    let mut tokens = Tokens::new(text, "function");
    let space = tokens.header(TEXT_MAGIC)?;
    let values = (0..space.size())
        .map(|_| tokens.parse::<f64>("value"))
        .collect::<Result<Vec<_>>>()?;
    tokens.finish()?;
    to_function(space, values)
}

pub fn read_function(path: &Path) -> Result<GFunction> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_function(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub fn encode_function(f: &GFunction, format: FunctionFormat) -> Vec<u8> {
    let space = f.space();
    match format {
        FunctionFormat::Binary => {
            let mut out = Vec::with_capacity(12 + 8 * space.size());
            out.extend_from_slice(BINARY_MAGIC);
            out.extend_from_slice(&space.p().to_le_bytes());
            out.extend_from_slice(&space.n().to_le_bytes());
            for v in f.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out
        }
        FunctionFormat::Text => {
            let mut out = format!("{TEXT_MAGIC} 1\np {}\nn {}\n", space.p(), space.n());
            for &v in f.values() {
                out.push_str(&real(v));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

pub fn write_function(path: &Path, f: &GFunction, format: FunctionFormat) -> Result<()> {
    write_bytes(path, &encode_function(f, format))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let mut tokens = Tokens::new(text, "spectrum");
    let space = tokens.header(SPECTRUM_MAGIC)?;
    let mut coeffs = Vec::with_capacity(space.size());
    for _ in 0..space.size() {
        let re: f64 = tokens.parse("real part")?;
        let im: f64 = tokens.parse("imaginary part")?;
        ensure!(re.is_finite() && im.is_finite(), "spectrum coefficient is not finite");
        coeffs.push(Complex64::new(re, im));
    }
    tokens.finish()?;
    Ok(Spectrum::new(space, coeffs)?)
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spectrum(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn encode_spectrum(s: &Spectrum) -> String {
    let space = s.space();
    let mut out = format!("{SPECTRUM_MAGIC} 1\np {}\nn {}\n", space.p(), space.n());
    for c in s.coeffs() {
        out.push_str(&format!("{} {}\n", real(c.re), real(c.im)));
    }
    out
}

pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    write_bytes(path, encode_spectrum(s).as_bytes())
}

/// A set of points of `F_p^n`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    pub space: Space,
    pub points: Vec<Point>,
}

pub fn parse_set(text: &str) -> Result<PointSet> {
    let mut tokens = Tokens::new(text, "set");
    let space = tokens.header(SET_MAGIC)?;
    tokens.expect("k")?;
    let k: usize = tokens.parse("k")?;
    ensure!(k <= space.size(), "set file: k = {k} exceeds p^n = {}", space.size());
    let mut points = Vec::with_capacity(k);
    for _ in 0..k {
        let x: usize = tokens.parse("index")?;
        ensure!(x < space.size(), "set file: index {x} out of range");
        if let Some(last) = points.last() {
            ensure!(x > *last, "set file: indices must be strictly increasing ({x} after {last})");
        }
        points.push(x);
    }
    tokens.finish()?;
    Ok(PointSet {
        space,
        points: points.into_iter().map(Point).collect(),
    })
}

pub fn read_set(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_set(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn encode_set(set: &PointSet) -> String {
    let mut out = format!(
        "{SET_MAGIC} 1\np {}\nn {}\nk {}\n",
        set.space.p(),
        set.space.n(),
        set.points.len()
    );
    for x in &set.points {
        out.push_str(&format!("{}\n", x.0));
    }
    out
}

pub fn write_set(path: &Path, set: &PointSet) -> Result<()> {
    write_bytes(path, encode_set(set).as_bytes())
}
