//! Approximation sweeps and their result rows.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tfop::gm::gm_error_and_bound;
use tfop::io::canonical;
use tfop::mgm::{mgm_error, WindowSet};
use tfop::{dual_window, gauss_window, LinOp, Result, TfError, TfLattice, Window};

use crate::ops::OperatorSource;

/// Choice of synthesis window for a Gaussian analysis window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Synthesis {
    /// `h = g`.
    #[default]
    Same,
    /// Canonical dual of `g` on the lattice.
    Dual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    Gm,
    /// Synthesis windows `π(μ_j)h`; one row per prefix of the shift list.
    Mgm {
        shifts: Vec<[i64; 2]>,
        #[serde(default)]
        compare_gm: Option<[usize; 2]>,
    },
}

/// Everything an approximation run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// `[a, b]` pairs.
    pub lattices: Vec<[usize; 2]>,
    pub widths: Vec<f64>,
    #[serde(default)]
    pub synthesis: Synthesis,
    pub operator: OperatorSource,
    pub scheme: Scheme,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Checks every lattice and width before any computation.
    pub fn validate(&self) -> Result<Vec<TfLattice>> {
        if self.lattices.is_empty() || self.widths.is_empty() {
            return Err(TfError::InvalidParameter(
                "need at least one lattice and one width".into(),
            ));
        }
        if let Some(w) = self.widths.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(TfError::InvalidParameter(format!(
                "window width must be positive, got {w}"
            )));
        }
        let mut lats = self
            .lattices
            .iter()
            .map(|&[a, b]| TfLattice::new(self.n, a, b))
            .collect::<Result<Vec<_>>>()?;
        if let Scheme::Mgm { shifts, compare_gm } = &self.scheme {
            if shifts.is_empty() {
                return Err(TfError::InvalidParameter("mgm scheme needs at least one shift".into()));
            }
            if let Some([a, b]) = compare_gm {
                lats.push(TfLattice::new(self.n, *a, *b)?);
            }
        }
        Ok(lats)
    }
}

/// One line of approximation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scheme: String,
    /// `AxB`: time step × frequency step.
    pub lattice: String,
    pub width: f64,
    pub rank: usize,
    pub err_rel: f64,
    /// `‖H − APP‖²_HS`.
    pub err_hs: f64,
    /// Upper bound on `err_hs` where one is known.
    pub bound: Option<f64>,
    pub runtime_ms: u64,
}

impl Row {
    fn canonicalized(mut self) -> Row {
        self.width = canonical(self.width);
        self.err_rel = canonical(self.err_rel);
        self.err_hs = canonical(self.err_hs);
        self.bound = self.bound.map(canonical);
        self
    }
}

/// A sweep point that failed the Riesz or frame test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub scheme: String,
    pub lattice: String,
    pub width: f64,
    pub kind: String,
    pub point: Option<[usize; 2]>,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
}

pub fn lattice_label(lat: &TfLattice) -> String {
    format!("{}x{}", lat.a(), lat.b())
}

fn scheme_rank(s: &str) -> (u8, usize) {
    match s.strip_prefix("mgm") {
        Some(j) => (1, j.parse().unwrap_or(0)),
        None => (0, 0),
    }
}

/// Canonical row order: scheme, lattice steps, width, rank.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|x, y| {
        let key = |r: &Row| {
            let (a, b) = r.lattice.split_once('x').unwrap_or(("0", "0"));
            (
                scheme_rank(&r.scheme),
                a.parse::<usize>().unwrap_or(0),
                b.parse::<usize>().unwrap_or(0),
            )
        };
        key(x)
            .cmp(&key(y))
            .then(x.width.total_cmp(&y.width))
            .then(x.rank.cmp(&y.rank))
    });
}

fn windows(n: usize, width: f64, lat: &TfLattice, synthesis: Synthesis) -> Result<(Window, Window)> {
    let g = gauss_window(n, width)?;
    let h = match synthesis {
        Synthesis::Same => g.clone(),
        Synthesis::Dual => dual_window(&g, lat)?,
    };
    Ok((g, h))
}

fn failure(err: &TfError, scheme: &str, lat: &TfLattice, width: f64) -> Option<Failure> {
    let (kind, point, value) = match *err {
        TfError::RieszFailure { point, value } => ("riesz", Some([point.0, point.1]), value),
        TfError::FrameFailure {
            smallest_eigenvalue, ..
        } => ("frame", None, smallest_eigenvalue),
        _ => return None,
    };
    Some(Failure {
        scheme: scheme.to_string(),
        lattice: lattice_label(lat),
        width: canonical(width),
        kind: kind.to_string(),
        point,
        value,
    })
}

fn collect(results: Vec<Result<std::result::Result<Row, Failure>>>) -> Result<Outcome> {
    let mut out = Outcome::default();
    for r in results {
        match r? {
            Ok(row) => out.rows.push(row.canonicalized()),
            Err(f) => out.failures.push(f),
        }
    }
    sort_rows(&mut out.rows);
    Ok(out)
}

fn elapsed_ms(start: Option<Instant>) -> u64 {
    start.map_or(0, |s| s.elapsed().as_millis() as u64)
}

fn gm_row(
    op: &LinOp,
    lat: &TfLattice,
    width: f64,
    synthesis: Synthesis,
    pinv: bool,
    timing: bool,
) -> Result<std::result::Result<Row, Failure>> {
    let start = timing.then(Instant::now);
    let run = || -> Result<Row> {
        let (g, h) = windows(op.n(), width, lat, synthesis)?;
        let rep = gm_error_and_bound(op, g.signal(), h.signal(), lat, pinv)?;
        Ok(Row {
            scheme: "gm".into(),
            lattice: lattice_label(lat),
            width,
            rank: lat.size(),
            err_rel: rep.err_rel,
            err_hs: rep.err_hs2,
            bound: Some(rep.bound),
            runtime_ms: elapsed_ms(start),
        })
    };
    match run() {
        Ok(row) => Ok(Ok(row)),
        Err(e) => failure(&e, "gm", lat, width).map(Err).ok_or(e),
    }
}

/// Best Gabor multiplier for every (lattice, width) pair.
pub fn run_gm(
    op: &LinOp,
    lattices: &[TfLattice],
    widths: &[f64],
    synthesis: Synthesis,
    pinv: bool,
    timing: bool,
) -> Result<Outcome> {
    let tasks: Vec<(TfLattice, f64)> = lattices
        .iter()
        .flat_map(|l| widths.iter().map(move |&w| (*l, w)))
        .collect();
    let results = tasks
        .par_iter()
        .map(|(lat, w)| gm_row(op, lat, *w, synthesis, pinv, timing))
        .collect();
    collect(results)
}

/// Best MGM for each prefix `μ_1..μ_J` of `shifts`, plus an optional
/// Gabor multiplier on a comparison lattice.
#[allow(clippy::too_many_arguments)]
pub fn run_mgm(
    op: &LinOp,
    lat: &TfLattice,
    widths: &[f64],
    shifts: &[(i64, i64)],
    compare: Option<&TfLattice>,
    synthesis: Synthesis,
    pinv: bool,
    timing: bool,
) -> Result<Outcome> {
    let tasks: Vec<(usize, f64)> = widths
        .iter()
        .flat_map(|&w| (1..=shifts.len()).map(move |j| (j, w)))
        .collect();
    let mut results: Vec<_> = tasks
        .par_iter()
        .map(|&(j, width)| {
            let scheme = format!("mgm{j}");
            let start = timing.then(Instant::now);
            let run = || -> Result<Row> {
                let (g, h) = windows(op.n(), width, lat, synthesis)?;
                let ws = WindowSet::shifted(g, &h, &shifts[..j], *lat)?;
                let rep = mgm_error(op, &ws)?;
                Ok(Row {
                    scheme: scheme.clone(),
                    lattice: lattice_label(lat),
                    width,
                    rank: rep.rank,
                    err_rel: rep.err_rel,
                    err_hs: rep.err_hs2,
                    bound: None,
                    runtime_ms: elapsed_ms(start),
                })
            };
            match run() {
                Ok(row) => Ok(Ok(row)),
                Err(e) => failure(&e, &scheme, lat, width).map(Err).ok_or(e),
            }
        })
        .collect();
    if let Some(c) = compare {
        results.extend(
            widths
                .par_iter()
                .map(|&w| gm_row(op, c, w, synthesis, pinv, timing))
                .collect::<Vec<_>>(),
        );
    }
    collect(results)
}

/// Run a validated configuration against an operator.
pub fn run_config(cfg: &ExperimentConfig, op: &LinOp, pinv: bool, timing: bool) -> Result<Outcome> {
    let lats = cfg.validate()?;
    if op.n() != cfg.n {
        return Err(TfError::DimensionMismatch {
            expected: cfg.n,
            found: op.n(),
        });
    }
    match &cfg.scheme {
        Scheme::Gm => run_gm(op, &lats, &cfg.widths, cfg.synthesis, pinv, timing),
        Scheme::Mgm { shifts, compare_gm } => {
            let shifts: Vec<(i64, i64)> = shifts.iter().map(|&[c, d]| (c, d)).collect();
            let compare = compare_gm.map(|_| lats[lats.len() - 1]);
            let mut out = Outcome::default();
            for lat in &lats[..cfg.lattices.len()] {
                let o = run_mgm(op, lat, &cfg.widths, &shifts, None, cfg.synthesis, pinv, timing)?;
                out.rows.extend(o.rows);
                out.failures.extend(o.failures);
            }
            if let Some(c) = compare {
                let o = run_gm(op, &[c], &cfg.widths, cfg.synthesis, pinv, timing)?;
                out.rows.extend(o.rows);
                out.failures.extend(o.failures);
            }
            sort_rows(&mut out.rows);
            Ok(out)
        }
    }
}

/// Smallest `err_rel` among rows of one scheme and lattice.
pub fn best_err(rows: &[Row], scheme: &str, lattice: &str) -> Option<f64> {
    rows.iter()
        .filter(|r| r.scheme == scheme && r.lattice == lattice)
        .map(|r| r.err_rel)
        .min_by(|a, b| a.total_cmp(b))
}
