//! Signals on `C^N` and analysis/synthesis windows.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Result, TfError};

/// A finite complex vector, the ambient space `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    data: Vec<Complex64>,
}

impl Signal {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(TfError::InvalidParameter("signal length must be positive".into()));
        }
        if let Some(index) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TfError::NonFinite { index });
        }
        Ok(Signal { data })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Signal::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Signal {
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Unit impulse at index `at` (mod N).
    pub fn delta(n: usize, at: usize) -> Self {
        let mut s = Signal::zeros(n);
        s.data[at % n] = Complex64::new(1.0, 0.0);
        s
    }

    pub(crate) fn from_vec_unchecked(data: Vec<Complex64>) -> Self {
        Signal { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = Σ self(t)·conj(other(t))`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        crate::error::check_len(self.len(), other.len())?;
        Ok(self.data.iter().zip(&other.data).map(|(x, y)| x * y.conj()).sum())
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal::from_vec_unchecked(self.data.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        crate::error::check_len(self.len(), other.len())?;
        Ok(Signal::from_vec_unchecked(
            self.data.iter().zip(&other.data).map(|(x, y)| x + y).collect(),
        ))
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        crate::error::check_len(self.len(), other.len())?;
        Ok(Signal::from_vec_unchecked(
            self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect(),
        ))
    }

    pub fn normalized(&self) -> Result<Signal> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(TfError::InvalidParameter("cannot normalize the zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / nrm, 0.0)))
    }
}

impl std::ops::Index<usize> for Signal {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

/// A nonzero analysis or synthesis window with a free-form tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    signal: Signal,
    tag: String,
}

impl Window {
    pub fn new(signal: Signal, tag: impl Into<String>) -> Result<Self> {
        if signal.norm_sqr() == 0.0 {
            return Err(TfError::InvalidParameter("window must be nonzero".into()));
        }
        Ok(Window {
            signal,
            tag: tag.into(),
        })
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }
}

/// Number of periods summed on each side when periodizing the Gaussian.
const GAUSS_WRAP: i64 = 2;

/// Periodized, unit-norm Gaussian centred at `t = 0`.
///
/// `width` is the reciprocal standard deviation relative to the Gaussian
/// `exp(-π t²/N)`, which is the `width = 1` case; larger widths give
/// narrower windows.
pub fn gauss_window(n: usize, width: f64) -> Result<Window> {
    if n < 2 {
        return Err(TfError::InvalidParameter(format!("gauss window needs N >= 2, got {n}")));
    }
    if !(width > 0.0) || !width.is_finite() {
        return Err(TfError::InvalidParameter(format!(
            "gauss width must be positive, got {width}"
        )));
    }
    let nf = n as f64;
    let raw: Vec<f64> = (0..n)
        .map(|t| {
            let tc = if t <= n / 2 { t as f64 } else { t as f64 - nf };
            (-GAUSS_WRAP..=GAUSS_WRAP)
                .map(|k| {
                    let x = tc + k as f64 * nf;
                    (-PI * width * width * x * x / nf).exp()
                })
                .sum()
        })
        .collect();
    // enforce exact circular evenness
    let even: Vec<f64> = (0..n).map(|t| 0.5 * (raw[t] + raw[(n - t) % n])).collect();
    let nrm = even.iter().map(|x| x * x).sum::<f64>().sqrt();
    let data = even.iter().map(|x| Complex64::new(x / nrm, 0.0)).collect();
    Window::new(Signal::from_vec_unchecked(data), format!("gauss, width {width}"))
}
