//! Rayleigh-quotient verification harness: measured quotients against the
//! sharp constants, with analytic tail budgets for the closed-form families.
//!
//! The raw quotients follow the lattice contract exactly (L^p and D_alpha
//! sums on the grid). For the slowly decaying extremizer families the raw
//! lattice D_alpha norm misses a computable amount of low-frequency mass, so
//! attainment runs also report a corrected ratio whose denominator is the
//! family's continuum D_alpha norm evaluated from its exact transform; that
//! corrected ratio converges to 1 from below under box refinement and is the
//! attainment gate. Generic fields (controls, random starts) use the raw
//! ratio, which stays strictly below 1 for them.

use crate::constants::{
    composed_constant, hls_constant, sobolev_constant, sobolev_exponent, trace_constant, FracIndex,
};
use crate::extremizers::{
    continuum_dalpha_sobolev, continuum_dalpha_trace, sobolev_extremizer, trace_extremizer,
    ExtremizerSpec, Family, FourierTraceExtremizer,
};
use crate::field::{BoxGrid, SpectralField};
use crate::operators::{kernel_double_sum, trace_fourier, trace_physical};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;
use std::time::Instant;

/// Which inequality a report measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientKind {
    Sobolev,
    TraceNorm,
    TraceSobolev,
    Hls,
}

impl QuotientKind {
    pub fn name(&self) -> &'static str {
        match self {
            QuotientKind::Sobolev => "sobolev",
            QuotientKind::TraceNorm => "trace_norm",
            QuotientKind::TraceSobolev => "trace_sobolev",
            QuotientKind::Hls => "hls",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl From<&BoxGrid> for GridSummary {
    fn from(g: &BoxGrid) -> Self {
        GridSummary {
            sizes: g.sizes().to_vec(),
            lengths: g.lengths().to_vec(),
        }
    }
}

/// One measured quotient with its sharp constant and budgets.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighReport {
    pub kind: QuotientKind,
    pub idx: FracIndex,
    pub grid: GridSummary,
    /// Raw lattice quotient (left side over right side, squared norms).
    pub quotient: f64,
    pub sharp_constant: f64,
    /// quotient / sharp_constant.
    pub ratio: f64,
    /// Analytic low-frequency deficit of the lattice denominator for the
    /// sampled family (continuum D_alpha minus the lattice value), when the
    /// family admits a closed-form transform.
    pub tail_budget: Option<f64>,
    /// Attainment ratio with the continuum denominator; only family runs.
    pub corrected_ratio: Option<f64>,
    pub notes: Vec<String>,
    pub wall_time_ms: f64,
}

impl RayleighReport {
    /// Flat JSON object per the report schema.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": self.kind.name(),
            "n": self.idx.n,
            "m": self.idx.m,
            "alpha": self.idx.alpha,
            "L": self.grid.lengths,
            "N": self.grid.sizes,
            "quotient": self.quotient,
            "sharp_constant": self.sharp_constant,
            "ratio": self.ratio,
            "tail_budget": self.tail_budget.unwrap_or(0.0),
            "corrected_ratio": self.corrected_ratio,
            "notes": self.notes,
            "wall_time_ms": self.wall_time_ms,
        })
    }
}

fn base_report(
    kind: QuotientKind,
    idx: &FracIndex,
    grid: &BoxGrid,
    quotient: f64,
    sharp: f64,
    t0: Instant,
) -> RayleighReport {
    RayleighReport {
        kind,
        idx: *idx,
        grid: grid.into(),
        quotient,
        sharp_constant: sharp,
        ratio: quotient / sharp,
        tail_budget: None,
        corrected_ratio: None,
        notes: Vec::new(),
        wall_time_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

/// ||f||_s^2 / ||f||_{D_alpha}^2 against the sharp Sobolev constant (m = 0).
pub fn sobolev_quotient(f: &SpectralField, idx: &FracIndex) -> Result<RayleighReport> {
    let t0 = Instant::now();
    if idx.m != 0 {
        return Err(Error::domain("sobolev quotient needs m = 0"));
    }
    let s = sobolev_exponent(idx);
    let den = f.dalpha_norm_sq(idx.alpha)?;
    if !(den > 0.0) {
        return Err(Error::degenerate("zero D_alpha norm"));
    }
    let num = f.lp_norm(s)?.powi(2);
    let sharp = sobolev_constant(idx.n, idx.alpha)?;
    Ok(base_report(QuotientKind::Sobolev, idx, f.grid(), num / den, sharp, t0))
}

/// ||tau_m f||^2_{D_{alpha-m/2}} / ||f||^2_{D_alpha} against the sharp trace
/// constant (squared-norm reading).
pub fn trace_norm_quotient(f: &SpectralField, idx: &FracIndex) -> Result<RayleighReport> {
    let t0 = Instant::now();
    if idx.m < 1 {
        return Err(Error::domain("trace-norm quotient needs m >= 1"));
    }
    let den = f.dalpha_norm_sq(idx.alpha)?;
    if !(den > 0.0) {
        return Err(Error::degenerate("zero D_alpha norm"));
    }
    let traced = trace_fourier(f, idx.m as usize)?;
    let num = traced.dalpha_norm_sq(idx.alpha - idx.mf() / 2.0)?;
    let sharp = trace_constant(idx.m, idx.alpha)?;
    Ok(base_report(QuotientKind::TraceNorm, idx, f.grid(), num / den, sharp, t0))
}

/// ||tau_m f||^2_{L^{2(n-m)/(n-2a)}} / ||f||^2_{D_alpha} against the sharp
/// composed constant.
pub fn trace_sobolev_quotient(f: &SpectralField, idx: &FracIndex) -> Result<RayleighReport> {
    let t0 = Instant::now();
    if idx.m < 1 {
        return Err(Error::domain("trace-sobolev quotient needs m >= 1"));
    }
    let den = f.dalpha_norm_sq(idx.alpha)?;
    if !(den > 0.0) {
        return Err(Error::degenerate("zero D_alpha norm"));
    }
    let s = sobolev_exponent(idx);
    let traced = trace_physical(f, idx.m as usize)?;
    let num = traced.lp_norm(s)?.powi(2);
    let sharp = composed_constant(idx)?;
    Ok(base_report(QuotientKind::TraceSobolev, idx, f.grid(), num / den, sharp, t0))
}

/// Minimum-image HLS double sum over ||g||_r^2 against the sharp HLS
/// constant (m = 0, r = 2n/(n+2a)).
pub fn hls_quotient(g: &SpectralField, idx: &FracIndex) -> Result<RayleighReport> {
    let t0 = Instant::now();
    if idx.m != 0 {
        return Err(Error::domain("hls quotient needs m = 0"));
    }
    if !(idx.alpha > 0.0) {
        return Err(Error::domain("hls quotient needs alpha > 0"));
    }
    let r = 2.0 * idx.nf() / (idx.nf() + 2.0 * idx.alpha);
    let den = g.lp_norm(r)?.powi(2);
    if !(den > 0.0) {
        return Err(Error::degenerate("zero L^r norm"));
    }
    let num = kernel_double_sum(g, idx.nf() - 2.0 * idx.alpha)?;
    let sharp = hls_constant(idx.n, idx.alpha)?;
    Ok(base_report(QuotientKind::Hls, idx, g.grid(), num / den, sharp, t0))
}

// ---------------------------------------------------------------------------
// test families
// ---------------------------------------------------------------------------

/// Sampled Sobolev optimizer (gamma^2+|x-a|^2)^{-(n-2a)/2}, a = 0.
pub fn sample_sobolev_extremizer(idx: &FracIndex, grid: &BoxGrid, gamma: f64) -> Result<SpectralField> {
    let spec = ExtremizerSpec::new(
        Family::Sobolev,
        Complex64::new(1.0, 0.0),
        gamma,
        vec![0.0; idx.n as usize],
        *idx,
    )?;
    SpectralField::sample(grid.clone(), move |x| sobolev_extremizer(&spec, x))
}

/// Sampled HLS optimizer (gamma^2+|x-a|^2)^{-(n+2a)/2}, a = 0.
pub fn sample_hls_extremizer(idx: &FracIndex, grid: &BoxGrid, gamma: f64) -> Result<SpectralField> {
    let p = (idx.nf() + 2.0 * idx.alpha) / 2.0;
    let g2 = gamma * gamma;
    SpectralField::sample_real(grid.clone(), move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (g2 + r2).powf(-p)
    })
}

/// Product Gaussian e^{-pi |x/sigma|^2}.
pub fn sample_gaussian(grid: &BoxGrid, sigma: f64) -> Result<SpectralField> {
    SpectralField::sample_real(grid.clone(), move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-PI * r2 / (sigma * sigma)).exp()
    })
}

/// Standard mean-zero smooth family for the Riesz checks:
/// e^{-pi |x/sigma|^2} - e^{-pi |x/(2 sigma)|^2} / 2^n (exactly mean-free).
pub fn sample_gaussian_difference(grid: &BoxGrid, sigma: f64) -> Result<SpectralField> {
    let n = grid.dim() as i32;
    SpectralField::sample_real(grid.clone(), move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s2 = sigma * sigma;
        (-PI * r2 / s2).exp() - (-PI * r2 / (4.0 * s2)).exp() / (2.0f64).powi(n)
    })
}

/// Quadrature-sampled composed-inequality optimizer on an n-dimensional grid
/// (retained dimension n-m = 1), exploiting the evenness of the integral in
/// x1 and |x2| for a = 0. Rows are evaluated in parallel.
pub fn sample_trace_extremizer(idx: &FracIndex, grid: &BoxGrid, gamma: f64) -> Result<SpectralField> {
    if idx.n - idx.m != 1 || grid.dim() != idx.n as usize {
        return Err(Error::domain(
            "trace extremizer sampling implemented for retained dimension 1",
        ));
    }
    if grid.dim() != 2 {
        return Err(Error::domain("trace extremizer sampling implemented for n = 2"));
    }
    let spec = ExtremizerSpec::new(
        Family::Trace,
        Complex64::new(1.0, 0.0),
        gamma,
        vec![0.0],
        *idx,
    )?;
    let (n1, n2) = (grid.sizes()[0], grid.sizes()[1]);
    let half1 = n1 / 2;
    let half2 = n2 / 2;
    // unique rows: i2 = 0..=half2 (|x2| symmetry), unique columns: i1 = 0..=half1
    let rows: Vec<Vec<f64>> = (0..=half2)
        .into_par_iter()
        .map(|i2| {
            let x2 = grid.coord(1, i2).abs();
            let mut row = vec![0.0f64; half1 + 1];
            for (i1, slot) in row.iter_mut().enumerate() {
                let x1 = grid.coord(0, i1);
                *slot = trace_extremizer(&spec, &[x1], &[x2]).unwrap_or(f64::NAN);
            }
            row
        })
        .collect();
    if rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(Error::numerical("trace extremizer quadrature failed on a row"));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.total_points()];
    for i1 in 0..n1 {
        // x is even: the value at i1 equals the value at the mirrored index
        let j1 = if i1 <= half1 { i1 } else { n1 - i1 };
        for i2 in 0..n2 {
            let j2 = if i2 <= half2 { i2 } else { n2 - i2 };
            values[grid.ravel(&[i1, i2])] = Complex64::new(rows[j2][j1], 0.0);
        }
    }
    SpectralField::from_values(grid.clone(), values)
}

// ---------------------------------------------------------------------------
// attainment runs (family-aware tail budgets)
// ---------------------------------------------------------------------------

/// Sobolev attainment: sampled optimizer with the corrected ratio computed
/// against the family's continuum D_alpha norm.
pub fn sobolev_attainment(idx: &FracIndex, grid: &BoxGrid, gamma: f64) -> Result<RayleighReport> {
    let f = sample_sobolev_extremizer(idx, grid, gamma)?;
    let mut rep = sobolev_quotient(&f, idx)?;
    let d_raw = f.dalpha_norm_sq(idx.alpha)?;
    let d_cont = continuum_dalpha_sobolev(idx, gamma, 1.0)?;
    let num = f.lp_norm(sobolev_exponent(idx))?.powi(2);
    rep.tail_budget = Some(d_cont - d_raw);
    rep.corrected_ratio = Some(num / (rep.sharp_constant * d_cont));
    rep.notes.push(format!(
        "lattice D_alpha misses low-frequency mass of the slowly decaying family; \
         continuum denominator {d_cont:.6} vs lattice {d_raw:.6}"
    ));
    Ok(rep)
}

/// Trace-Sobolev attainment: quadrature-sampled composed optimizer with the
/// continuum-denominator correction.
pub fn trace_sobolev_attainment(
    idx: &FracIndex,
    grid: &BoxGrid,
    gamma: f64,
) -> Result<RayleighReport> {
    let f = sample_trace_extremizer(idx, grid, gamma)?;
    let mut rep = trace_sobolev_quotient(&f, idx)?;
    let d_raw = f.dalpha_norm_sq(idx.alpha)?;
    let d_cont = continuum_dalpha_trace(idx, gamma, 1.0)?;
    let traced = trace_physical(&f, idx.m as usize)?;
    let num = traced.lp_norm(sobolev_exponent(idx))?.powi(2);
    rep.tail_budget = Some(d_cont - d_raw);
    rep.corrected_ratio = Some(num / (rep.sharp_constant * d_cont));
    rep.notes.push(format!(
        "continuum denominator {d_cont:.6} vs lattice {d_raw:.6} (restriction sampling \
         smears the uncaptured low-frequency mass across the lattice)"
    ));
    Ok(rep)
}

/// Trace-norm attainment: equality-form field fhat = ghat(k1) (|k1|^2+|k2|^2)^{-a}
/// built in frequency space with the retained zero mode dropped. The raw
/// ratio is the gate; the k2-sum truncation is the dominant budget and
/// shrinks as the frequency extent grows.
pub fn trace_norm_attainment(idx: &FracIndex, grid: &BoxGrid, gamma: f64) -> Result<RayleighReport> {
    let d = (idx.n - idx.m) as usize;
    let sub = BoxGrid::new(&grid.sizes()[..d], &grid.lengths()[..d])?;
    let fte = FourierTraceExtremizer::new_mean_zero(idx, gamma, &vec![0.0; d], sub)?;
    let f = fte.field_on(grid)?;
    let mut rep = trace_norm_quotient(&f, idx)?;
    rep.notes.push(
        "equality-form field with ghat(0) = 0 per the zero-mode policy; \
         budget dominated by the traced-frequency truncation"
            .to_string(),
    );
    Ok(rep)
}

/// HLS attainment: sampled optimizer, raw ratio gate.
pub fn hls_attainment(idx: &FracIndex, grid: &BoxGrid, gamma: f64) -> Result<RayleighReport> {
    let g = sample_hls_extremizer(idx, grid, gamma)?;
    hls_quotient(&g, idx)
}
