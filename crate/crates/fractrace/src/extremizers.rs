//! Closed-form optimizer families of the sharp inequalities, their sampled
//! and quadrature-defined forms, and the exact continuum transforms used for
//! tail budgets.

use crate::constants::FracIndex;
use crate::field::{BoxGrid, SpectralField};
use crate::quadrature::{integrate, integrate_power_singularity, integrate_tail};
use crate::specfun::{bessel_k, ln_gamma};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which optimizer family a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Sobolev,
    Hls,
    Trace,
    Escobar,
}

/// Parameters (A, gamma, a) of a closed-form extremizer.
#[derive(Debug, Clone)]
pub struct ExtremizerSpec {
    pub family: Family,
    pub amplitude: Complex64,
    pub gamma: f64,
    pub center: Vec<f64>,
    pub idx: FracIndex,
}

impl ExtremizerSpec {
    pub fn new(
        family: Family,
        amplitude: Complex64,
        gamma: f64,
        center: Vec<f64>,
        idx: FracIndex,
    ) -> Result<Self> {
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(Error::domain("extremizer scale gamma must be nonzero"));
        }
        let expected = match family {
            Family::Sobolev | Family::Hls => idx.n as usize,
            Family::Trace | Family::Escobar => (idx.n - idx.m) as usize,
        };
        if center.len() != expected {
            return Err(Error::domain(format!(
                "center has dimension {}, expected {expected}",
                center.len()
            )));
        }
        Ok(ExtremizerSpec {
            family,
            amplitude,
            gamma,
            center,
            idx,
        })
    }

    fn dist_sq(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(xi, ai)| (xi - ai) * (xi - ai))
            .sum()
    }
}

/// Sobolev optimizer A (gamma^2 + |x-a|^2)^{-(n-2 alpha)/2}.
pub fn sobolev_extremizer(spec: &ExtremizerSpec, x: &[f64]) -> Complex64 {
    let p = (spec.idx.nf() - 2.0 * spec.idx.alpha) / 2.0;
    spec.amplitude * (spec.gamma * spec.gamma + spec.dist_sq(x)).powf(-p)
}

/// HLS optimizer A (gamma^2 + |x-a|^2)^{-(n+2 alpha)/2}.
pub fn hls_extremizer(spec: &ExtremizerSpec, x: &[f64]) -> Complex64 {
    let p = (spec.idx.nf() + 2.0 * spec.idx.alpha) / 2.0;
    spec.amplitude * (spec.gamma * spec.gamma + spec.dist_sq(x)).powf(-p)
}

/// int_{R^d} (t^2 + |x1 - y|^2)^{-b1} (gamma^2 + |y - a|^2)^{-b2} dy
/// for d = 1 or 2, with adaptive quadrature at relative tolerance `tol`.
///
/// At t = 0 the kernel has the integrable singularity |x1-y|^{-2 b1}
/// (2 b1 < 1 in d = 1 throughout the admissible range) which is removed by
/// an exact power substitution; in d = 2 polar coordinates do the same.
fn layered_potential(
    d: usize,
    b1: f64,
    b2: f64,
    gamma: f64,
    a: &[f64],
    x1: &[f64],
    t: f64,
    tol: f64,
) -> Result<f64> {
    match d {
        1 => layered_potential_1d(b1, b2, gamma, a[0], x1[0], t, tol),
        2 => layered_potential_2d(b1, b2, gamma, a, x1, t, tol),
        _ => Err(Error::domain(format!(
            "layered potential implemented for 1 or 2 retained dimensions, got {d}"
        ))),
    }
}

fn layered_potential_1d(
    b1: f64,
    b2: f64,
    gamma: f64,
    a: f64,
    x1: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let t2 = t * t;
    let g2 = gamma * gamma;
    let profile = move |y: f64| (g2 + (y - a) * (y - a)).powf(-b2);
    let kernel = move |u: f64| (t2 + u * u).powf(-b1);
    let integrand = move |y: f64| kernel(y - x1) * profile(y);
    let span = 60.0 + 10.0 * (x1.abs() + a.abs() + gamma.abs() + t);

    if t == 0.0 {
        let p = 2.0 * b1;
        if p >= 1.0 {
            return Err(Error::numerical(format!(
                "trace-plane kernel exponent {p} >= 1 is not integrable in 1-D"
            )));
        }
        let h = 1.0f64.min(span / 4.0);
        let near_right =
            integrate_power_singularity(&|u: f64| profile(x1 + u), p, h, tol, 1e-300)?;
        let near_left =
            integrate_power_singularity(&|u: f64| profile(x1 - u), p, h, tol, 1e-300)?;
        let far_right = integrate_tail(&integrand, x1 + h, span, tol, 1e-300)?;
        // mirror the left far region through y -> 2 x1 - y
        let far_left = integrate_tail(
            &move |y: f64| kernel(x1 - y) * profile(2.0 * x1 - y),
            x1 + h,
            span,
            tol,
            1e-300,
        )?;
        return Ok(near_right + near_left + far_right + far_left);
    }

    // smooth integrand: resolve the kernel peak at x1 and the profile peak at a
    let mut breaks = vec![x1 - 3.0 * t, x1, x1 + 3.0 * t, a - gamma.abs(), a, a + gamma.abs()];
    breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let lo = breaks[0] - 1.0;
    let hi = breaks[breaks.len() - 1] + 1.0;
    let mut total = 0.0;
    let mut prev = lo;
    for &b in &breaks {
        if b > prev {
            total += integrate(&integrand, prev, b, tol, 1e-300)?;
            prev = b;
        }
    }
    total += integrate(&integrand, prev, hi, tol, 1e-300)?;
    total += integrate_tail(&integrand, hi, span, tol, 1e-300)?;
    total += integrate_tail(&move |y: f64| integrand(lo + hi - y), hi, span, tol, 1e-300)?;
    Ok(total)
}

fn layered_potential_2d(
    b1: f64,
    b2: f64,
    gamma: f64,
    a: &[f64],
    x1: &[f64],
    t: f64,
    tol: f64,
) -> Result<f64> {
    let t2 = t * t;
    let g2 = gamma * gamma;
    let (cx, cy) = (x1[0], x1[1]);
    let (ax, ay) = (a[0], a[1]);
    // angular average of the profile on the circle of radius rho around x1
    let ring = move |rho: f64, m: usize| -> f64 {
        let mut s = 0.0;
        for j in 0..m {
            let th = 2.0 * PI * j as f64 / m as f64;
            let y0 = cx + rho * th.cos() - ax;
            let y1 = cy + rho * th.sin() - ay;
            s += (g2 + y0 * y0 + y1 * y1).powf(-b2);
        }
        s / m as f64
    };
    let ring_avg = move |rho: f64| -> f64 {
        // periodic trapezoid, doubled until stable
        let mut m = 32;
        let mut v = ring(rho, m);
        loop {
            m *= 2;
            let v2 = ring(rho, m);
            if (v2 - v).abs() <= 1e-9 * v2.abs() || m >= 4096 {
                return v2;
            }
            v = v2;
        }
    };
    // rho (t^2+rho^2)^{-b1} is integrable at 0 for 2 b1 < 2
    let radial = move |rho: f64| 2.0 * PI * rho * (t2 + rho * rho).powf(-b1) * ring_avg(rho);
    let reach = 30.0 + 3.0 * ((cx - ax).hypot(cy - ay) + gamma.abs() + t);
    let head = integrate(&radial, 0.0, reach, tol, 1e-300)?;
    let tail = integrate_tail(&radial, reach, 10.0 * reach, tol, 1e-300)?;
    Ok(head + tail)
}

/// Quadrature-defined trace-Sobolev optimizer of the composed inequality:
/// f(x1, x2) = A int_{R^{n-m}} (|x2|^2 + |x1-y|^2)^{-(n-2a)/2}
///                            (gamma^2 + |y-a|^2)^{-(n+2a-2m)/2} dy.
///
/// The integration runs over the retained variables y in R^{n-m}; the
/// per-evaluation relative tolerance is 1e-6 with power-law tail truncation.
pub fn trace_extremizer(spec: &ExtremizerSpec, x1: &[f64], x2: &[f64]) -> Result<f64> {
    if spec.family != Family::Trace && spec.family != Family::Escobar {
        return Err(Error::domain("trace_extremizer needs a trace-family spec"));
    }
    let idx = &spec.idx;
    if idx.m < 1 {
        return Err(Error::domain("trace extremizer needs m >= 1"));
    }
    let d = (idx.n - idx.m) as usize;
    if x1.len() != d || x2.len() != idx.m as usize {
        return Err(Error::domain("trace_extremizer: point dimensions do not match idx"));
    }
    let b1 = (idx.nf() - 2.0 * idx.alpha) / 2.0;
    let b2 = (idx.nf() + 2.0 * idx.alpha - 2.0 * idx.mf()) / 2.0;
    let t = x2.iter().map(|v| v * v).sum::<f64>().sqrt();
    let val = layered_potential(d, b1, b2, spec.gamma, &spec.center, x1, t, 1e-6)?;
    Ok(spec.amplitude.re * val)
}

/// Riesz potential of the HLS optimizer profile,
/// int (gamma^2 + |y-a|^2)^{-(n+2a)/2} |x-y|^{-(n-2a)} dy,
/// used for the Euler-Lagrange cross-check.
pub fn hls_riesz_potential_at(spec: &ExtremizerSpec, x: &[f64]) -> Result<f64> {
    let idx = &spec.idx;
    let b1 = (idx.nf() - 2.0 * idx.alpha) / 2.0;
    let b2 = (idx.nf() + 2.0 * idx.alpha) / 2.0;
    let d = idx.n as usize;
    let val = layered_potential(d, b1, b2, spec.gamma, &spec.center, x, 0.0, 1e-7)?;
    Ok(spec.amplitude.re * val)
}

/// Equality-form coefficients of the trace inequality (the hat of the
/// composed-extremizer family): fhat(k1, k2) = ghat(k1) / (|k1|^2+|k2|^2)^a
/// with ghat the numerically transformed HLS profile of dimension n-m and
/// order alpha - m/2. The k = 0 coefficient is zero by the zero-mode policy.
pub struct FourierTraceExtremizer {
    pub idx: FracIndex,
    pub alpha: f64,
    ghat: SpectralField,
}

impl FourierTraceExtremizer {
    /// Like [`FourierTraceExtremizer::new`] but with the box mean of the
    /// profile removed, so ghat(0) = 0 exactly (zero-mode policy for the
    /// retained axes). Nonzero bins are unchanged by the subtraction.
    pub fn new_mean_zero(
        idx: &FracIndex,
        gamma: f64,
        center: &[f64],
        sub_grid: BoxGrid,
    ) -> Result<Self> {
        let fte = FourierTraceExtremizer::new(idx, gamma, center, sub_grid)?;
        let mean = fte.ghat.coeffs()[0]
            * Complex64::new(fte.ghat.grid().lengths().iter().product::<f64>().recip(), 0.0);
        let values: Vec<Complex64> = fte.ghat.values().iter().map(|v| v - mean).collect();
        let g = SpectralField::from_values(fte.ghat.grid().clone(), values)?;
        g.coeffs();
        Ok(FourierTraceExtremizer {
            idx: fte.idx,
            alpha: fte.alpha,
            ghat: g,
        })
    }

    /// `sub_grid` is the (n-m)-dimensional grid carrying the transform of g.
    pub fn new(idx: &FracIndex, gamma: f64, center: &[f64], sub_grid: BoxGrid) -> Result<Self> {
        if idx.m < 1 {
            return Err(Error::domain("fourier trace extremizer needs m >= 1"));
        }
        let d = (idx.n - idx.m) as usize;
        if sub_grid.dim() != d || center.len() != d {
            return Err(Error::domain("sub grid / center dimension mismatch"));
        }
        // HLS optimizer in dimension n-m with order alpha - m/2:
        // exponent ((n-m) + 2(alpha - m/2))/2 = (n + 2 alpha - 2m)/2
        let p = (idx.nf() + 2.0 * idx.alpha - 2.0 * idx.mf()) / 2.0;
        let g2 = gamma * gamma;
        let center = center.to_vec();
        let g = SpectralField::sample_real(sub_grid, move |x| {
            let r2: f64 = x
                .iter()
                .zip(&center)
                .map(|(xi, ai)| (xi - ai) * (xi - ai))
                .sum();
            (g2 + r2).powf(-p)
        })?;
        g.coeffs(); // force the transform once
        Ok(FourierTraceExtremizer {
            idx: *idx,
            alpha: idx.alpha,
            ghat: g,
        })
    }

    pub fn ghat(&self) -> &SpectralField {
        &self.ghat
    }

    /// Coefficient at a lattice frequency k1 (bin of the sub grid) and an
    /// arbitrary traced frequency k2.
    pub fn coeff(&self, k1_bin: usize, k2: &[f64]) -> Complex64 {
        let k1sq = self.ghat.grid().k_squared(k1_bin);
        let k2sq: f64 = k2.iter().map(|v| v * v).sum();
        let total = k1sq + k2sq;
        if total == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.ghat.coeffs()[k1_bin] * total.powf(-self.alpha)
    }

    /// Fill the equality-form coefficients on a full n-dimensional grid whose
    /// leading axes coincide with the sub grid.
    pub fn field_on(&self, grid: &BoxGrid) -> Result<SpectralField> {
        let d = self.ghat.grid().dim();
        if grid.dim() != self.idx.n as usize
            || grid.sizes()[..d] != *self.ghat.grid().sizes()
            || grid.lengths()[..d] != *self.ghat.grid().lengths()
        {
            return Err(Error::domain(
                "full grid must extend the ghat sub grid on the leading axes",
            ));
        }
        let mut coeffs = Vec::with_capacity(grid.total_points());
        let ghat = self.ghat.coeffs();
        for flat in 0..grid.total_points() {
            let idx = grid.unravel(flat);
            let k1_bin = self.ghat.grid().ravel(&idx[..d]);
            let mut k2 = [0.0f64; crate::field::MAX_DIM];
            for (j, axis) in (d..grid.dim()).enumerate() {
                k2[j] = grid.freq(axis, idx[axis]);
            }
            let k1sq = self.ghat.grid().k_squared(k1_bin);
            let k2sq: f64 = k2[..grid.dim() - d].iter().map(|v| v * v).sum();
            let total = k1sq + k2sq;
            coeffs.push(if total == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                ghat[k1_bin] * total.powf(-self.alpha)
            });
        }
        SpectralField::from_coeffs(grid.clone(), coeffs)
    }
}

// ---------------------------------------------------------------------------
// closed-form continuum transforms (Matern family) and D_alpha tail budgets
// ---------------------------------------------------------------------------

/// Exact Fourier transform of (gamma^2 + |x|^2)^{-p} in R^n at |k| = k:
/// gamma^{n-2p} (2 pi^{n/2} / Gamma(p)) (pi gamma k)^{p - n/2}
///   K_{p-n/2}(2 pi gamma k), with the finite k = 0 limit when p > n/2.
pub fn matern_transform(n: u32, p: f64, gamma: f64, k: f64) -> Result<f64> {
    let nf = n as f64;
    let g = gamma.abs();
    if k == 0.0 {
        if p <= nf / 2.0 {
            return Err(Error::domain(
                "matern transform diverges at k = 0 for p <= n/2",
            ));
        }
        return Ok(g.powf(nf - 2.0 * p)
            * ((nf / 2.0) * PI.ln() + ln_gamma(p - nf / 2.0)? - ln_gamma(p)?).exp());
    }
    let nu = p - nf / 2.0;
    let z = PI * g * k;
    let pref = g.powf(nf - 2.0 * p) * 2.0 * ((nf / 2.0) * PI.ln() - ln_gamma(p)?).exp();
    Ok(pref * z.powf(nu) * bessel_k(nu, 2.0 * PI * g * k)?)
}

/// Continuum ||f||^2_{D_alpha} of the Sobolev optimizer
/// A (gamma^2+|x-a|^2)^{-(n-2a)/2}, by radial quadrature of the exact
/// transform. Independent of the sharp-constant formulas.
pub fn continuum_dalpha_sobolev(idx: &FracIndex, gamma: f64, amp: f64) -> Result<f64> {
    let (n, a) = (idx.n, idx.alpha);
    let nf = n as f64;
    if !(a > 0.0 && a < nf / 2.0) {
        return Err(Error::domain("continuum sobolev norm needs 0 < alpha < n/2"));
    }
    let p = (nf - 2.0 * a) / 2.0;
    let omega = 2.0 * ((nf / 2.0) * PI.ln() - ln_gamma(nf / 2.0)?).exp();
    // integrand ~ k^{n-1-2a} near zero; exact power substitution removes it
    let sing = (2.0 * a - (nf - 1.0)).clamp(0.0, 0.999);
    let h = |k: f64| -> f64 {
        let f = matern_transform(n, p, gamma, k).unwrap_or(0.0);
        f * f * (2.0 * PI * k).powf(2.0 * a) * k.powf(nf - 1.0)
    };
    let split = 0.5 / gamma.abs().max(0.1);
    let near = integrate_power_singularity(
        &|k: f64| h(k) * k.powf(sing),
        sing,
        split,
        1e-11,
        1e-300,
    )?;
    let far_cut = 750.0 / (2.0 * PI * gamma.abs());
    let far = integrate(&h, split, far_cut.min(1e6), 1e-11, 1e-300)?;
    Ok(amp * amp * omega * (near + far))
}

/// Continuum ||f||^2_{D_alpha} of the composed trace-Sobolev optimizer for
/// retained dimension n-m = 1: the transform separates as
/// fhat(k1, k2) = c_tail ghat(k1) |k|^{-2 alpha} with
/// c_tail = pi^{n/2-2a} Gamma(a)/Gamma(n/2-a), so
/// D = c_tail^2 (2 pi)^{2a} B(1/2, a-1/2) int |ghat(k1)|^2 |k1|^{1-2a} dk1.
pub fn continuum_dalpha_trace(idx: &FracIndex, gamma: f64, amp: f64) -> Result<f64> {
    let (nf, mf, a) = (idx.nf(), idx.mf(), idx.alpha);
    if idx.n - idx.m != 1 {
        return Err(Error::domain(
            "continuum trace norm implemented for retained dimension 1",
        ));
    }
    if !(a > 0.5 * mf && a > 0.5) {
        return Err(Error::domain("continuum trace norm needs alpha > max(m,1)/2"));
    }
    let p = (nf + 2.0 * a - 2.0 * mf) / 2.0;
    let c_tail = ((nf / 2.0 - 2.0 * a) * PI.ln() + ln_gamma(a)? - ln_gamma(nf / 2.0 - a)?).exp();
    let b_half = (ln_gamma(0.5)? + ln_gamma(a - 0.5)? - ln_gamma(a)?).exp();
    let h = |k: f64| -> f64 {
        let f = matern_transform(1, p, gamma, k).unwrap_or(0.0);
        f * f * k.powf(1.0 - 2.0 * a)
    };
    let sing = (2.0 * a - 1.0).clamp(0.0, 0.999);
    let split = 0.5 / gamma.abs().max(0.1);
    let near = integrate_power_singularity(
        &|k: f64| h(k) * k.powf(sing),
        sing,
        split,
        1e-11,
        1e-300,
    )?;
    let far_cut = (750.0 / (2.0 * PI * gamma.abs())).min(1e6);
    let far = integrate(&h, split, far_cut, 1e-11, 1e-300)?;
    Ok(amp * amp * c_tail * c_tail * (2.0 * PI).powf(2.0 * a) * b_half * 2.0 * (near + far))
}
