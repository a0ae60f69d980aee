//! Powers of the primitive root of unity `ω = exp(2πi/N)`.
//!
//! Exponents are reduced modulo `N` in integer arithmetic before the
//! table lookup, so phases never accumulate rounding drift.

use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Roots {
    n: usize,
    table: Vec<Complex64>,
}

impl Roots {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "root table needs n > 0");
        let table = (0..n)
            .map(|k| {
                let ang = 2.0 * PI * k as f64 / n as f64;
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        Roots { n, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ω^k` for any integer `k`.
    #[inline]
    pub fn pow(&self, k: i64) -> Complex64 {
        self.table[k.rem_euclid(self.n as i64) as usize]
    }
}

/// Reduce a signed index modulo `n`.
#[inline]
pub fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}
