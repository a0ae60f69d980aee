//! JSON and CSV exchange formats.
//!
//! Signals and square matrices are `{"n": N, "re": [...], "im": [...]}`,
//! matrices row-major. Masks add the lattice steps `"a"` and `"b"`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, TfError};
use crate::gm::Mask;
use crate::lattice::TfLattice;
use crate::linop::{LinOp, PhaseMap};
use crate::mgm::MaskSet;
use crate::signal::Signal;
use crate::tst::TstSpec;

/// Round to 12 significant digits and clear the sign of zero.
pub fn canonical(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Entries below this fraction of an array's largest component are written
/// as zero in canonical output.
pub const CANONICAL_FLUSH: f64 = 1e-13;

fn split(values: impl Iterator<Item = Complex64>, canon: bool) -> (Vec<f64>, Vec<f64>) {
    let values: Vec<Complex64> = values.collect();
    let peak = values.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    let f = |x: f64| {
        if !canon {
            x
        } else if x.abs() <= CANONICAL_FLUSH * peak {
            0.0
        } else {
            canonical(x)
        }
    };
    values.iter().map(|z| (f(z.re), f(z.im))).unzip()
}

fn join(re: &[f64], im: &[f64]) -> Result<Vec<Complex64>> {
    if re.len() != im.len() {
        return Err(TfError::Parse(format!(
            "re has {} entries but im has {}",
            re.len(),
            im.len()
        )));
    }
    Ok(re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect())
}

/// A signal or a row-major `N × N` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexArray {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

impl ComplexArray {
    pub fn from_signal(s: &Signal, canon: bool) -> Self {
        let (re, im) = split(s.as_slice().iter().cloned(), canon);
        ComplexArray {
            n: s.len(),
            re,
            im,
            meta: None,
        }
    }

    fn from_matrix(m: &DMatrix<Complex64>, canon: bool) -> Self {
        let n = m.nrows();
        let (re, im) = split((0..n).flat_map(|t| (0..n).map(move |s| m[(t, s)])), canon);
        ComplexArray { n, re, im, meta: None }
    }

    pub fn from_linop(op: &LinOp, canon: bool) -> Self {
        ComplexArray::from_matrix(op.kernel(), canon)
    }

    pub fn from_phasemap(map: &PhaseMap, canon: bool) -> Self {
        ComplexArray::from_matrix(map.data(), canon)
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn to_signal(&self) -> Result<Signal> {
        if self.re.len() != self.n {
            return Err(TfError::Parse(format!(
                "expected {} signal entries, found {}",
                self.n,
                self.re.len()
            )));
        }
        Signal::new(join(&self.re, &self.im)?)
    }

    fn entries(&self) -> Result<Vec<Complex64>> {
        if self.re.len() != self.n * self.n {
            return Err(TfError::Parse(format!(
                "expected {} matrix entries for n = {}, found {}",
                self.n * self.n,
                self.n,
                self.re.len()
            )));
        }
        join(&self.re, &self.im)
    }

    pub fn to_linop(&self) -> Result<LinOp> {
        LinOp::from_row_major(self.n, &self.entries()?)
    }

    pub fn to_phasemap(&self) -> Result<PhaseMap> {
        PhaseMap::from_row_major(self.n, &self.entries()?)
    }
}

/// Mask with lattice metadata, row-major `M × K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskJson {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MaskJson {
    pub fn from_mask(mask: &Mask, tag: Option<&str>, canon: bool) -> Self {
        let lat = mask.lattice();
        let d = mask.data();
        let (re, im) = split(
            (0..d.nrows()).flat_map(|m| (0..d.ncols()).map(move |k| d[(m, k)])),
            canon,
        );
        MaskJson {
            n: lat.n(),
            a: lat.a(),
            b: lat.b(),
            tag: tag.map(str::to_string),
            re,
            im,
        }
    }

    pub fn to_mask(&self) -> Result<Mask> {
        let lat = TfLattice::new(self.n, self.a, self.b)?;
        let entries = join(&self.re, &self.im)?;
        if entries.len() != lat.size() {
            return Err(TfError::Parse(format!(
                "expected {} mask entries, found {}",
                lat.size(),
                entries.len()
            )));
        }
        Mask::new(DMatrix::from_row_slice(lat.m_count(), lat.k_count(), &entries), lat)
    }
}

pub fn mask_set_to_json(ms: &MaskSet, canon: bool) -> Vec<MaskJson> {
    ms.masks()
        .iter()
        .zip(ms.tags())
        .map(|(m, t)| MaskJson::from_mask(m, Some(t), canon))
        .collect()
}

pub fn mask_set_from_json(items: &[MaskJson]) -> Result<MaskSet> {
    let masks = items.iter().map(MaskJson::to_mask).collect::<Result<Vec<_>>>()?;
    let tags = items
        .iter()
        .enumerate()
        .map(|(j, m)| m.tag.clone().unwrap_or_else(|| format!("window {j}")))
        .collect();
    MaskSet::new(masks, tags)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaJson {
    pub offsets: Vec<[i64; 2]>,
    pub values: Vec<[f64; 2]>,
}

/// Prototype given inline or as a path to a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiRef {
    Inline(ComplexArray),
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TstSpecJson {
    pub alpha: AlphaJson,
    pub b1: usize,
    pub nu1: usize,
    pub phi: PhiRef,
}

impl TstSpecJson {
    pub fn from_spec(spec: &TstSpec, canon: bool) -> Self {
        let f = |x: f64| if canon { canonical(x) } else { x };
        TstSpecJson {
            alpha: AlphaJson {
                offsets: spec.alpha().iter().map(|&((k, l), _)| [k, l]).collect(),
                values: spec.alpha().iter().map(|&(_, z)| [f(z.re), f(z.im)]).collect(),
            },
            b1: spec.b1(),
            nu1: spec.nu1(),
            phi: PhiRef::Inline(ComplexArray::from_phasemap(spec.phi(), canon)),
        }
    }

    /// Relative prototype paths are resolved against `base`.
    pub fn to_spec(&self, base: Option<&Path>) -> Result<TstSpec> {
        if self.alpha.offsets.len() != self.alpha.values.len() {
            return Err(TfError::Parse(format!(
                "alpha has {} offsets but {} values",
                self.alpha.offsets.len(),
                self.alpha.values.len()
            )));
        }
        let phi = match &self.phi {
            PhiRef::Inline(arr) => arr.to_phasemap()?,
            PhiRef::Path(p) => {
                let path = match base {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => Path::new(p).to_path_buf(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| TfError::Parse(format!("cannot read prototype {}: {e}", path.display())))?;
                parse_json::<ComplexArray>(&text)?.to_phasemap()?
            }
        };
        let alpha = self
            .alpha
            .offsets
            .iter()
            .zip(&self.alpha.values)
            .map(|(&[k, l], &[re, im])| ((k, l), Complex64::new(re, im)))
            .collect();
        TstSpec::new(alpha, phi, self.b1, self.nu1)
    }
}

/// Parse JSON, reporting the line and column of syntax or shape errors.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| TfError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn fmt(x: f64, canon: bool) -> String {
    format!("{}", if canon { canonical(x) } else { x })
}

/// CSV with header `re,im`.
pub fn signal_csv(s: &Signal, canon: bool) -> String {
    let mut out = String::from("re,im\n");
    for z in s.as_slice() {
        out.push_str(&format!("{},{}\n", fmt(z.re, canon), fmt(z.im, canon)));
    }
    out
}

/// CSV with header `row,col,re,im`.
pub fn matrix_csv(m: &DMatrix<Complex64>, canon: bool) -> String {
    let mut out = String::from("row,col,re,im\n");
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push_str(&format!("{r},{c},{},{}\n", fmt(z.re, canon), fmt(z.im, canon)));
        }
    }
    out
}
