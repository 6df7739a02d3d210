//! Sharp constants of the fractional inequalities and the exact Gamma-algebra
//! identities linking them.

use crate::specfun::ln_gamma;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Index (n, m, alpha) of an inequality instance.
///
/// Admissible when m/2 < alpha < n/2 with 0 <= m < n; the Sobolev-only case
/// m = 0 additionally admits alpha = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracIndex {
    pub n: u32,
    pub m: u32,
    pub alpha: f64,
}

impl FracIndex {
    pub fn new(n: u32, m: u32, alpha: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("dimension n must be >= 1"));
        }
        if m >= n {
            return Err(Error::domain(format!("codimension m={m} must satisfy m < n={n}")));
        }
        if !alpha.is_finite() {
            return Err(Error::domain("alpha must be finite"));
        }
        let lo = m as f64 / 2.0;
        let hi = n as f64 / 2.0;
        let admissible = if m == 0 {
            (0.0..hi).contains(&alpha)
        } else {
            alpha > lo && alpha < hi
        };
        if !admissible {
            return Err(Error::domain(format!(
                "alpha={alpha} outside admissible range ({lo}, {hi}) for (n={n}, m={m})"
            )));
        }
        Ok(FracIndex { n, m, alpha })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn mf(&self) -> f64 {
        self.m as f64
    }
}

fn lg(x: f64) -> Result<f64> {
    ln_gamma(x)
}

/// Escobar's sharp half-space trace constant C_n, n >= 3.
pub fn escobar_constant(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(format!("escobar constant needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let ratio = (lg(nf - 1.0)? - lg((nf - 1.0) / 2.0)?) / (nf - 1.0);
    Ok(1.0 / (PI.sqrt() * (nf - 2.0)) * ratio.exp())
}

/// Sharp Sobolev constant S(n, alpha) for 0 <= alpha < n/2, bounding
/// ||f||_s^2 <= S ||f||_{D_alpha}^2 with s = 2n/(n - 2 alpha).
pub fn sobolev_constant(n: u32, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(0.0..nf / 2.0).contains(&alpha) {
        return Err(Error::domain(format!(
            "sobolev constant needs 0 <= alpha < n/2, got alpha={alpha}, n={n}"
        )));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let ln_val = -2.0 * alpha * 2f64.ln() - alpha * PI.ln() + lg(nf / 2.0 - alpha)?
        - lg(nf / 2.0 + alpha)?
        + (2.0 * alpha / nf) * (lg(nf)? - lg(nf / 2.0)?);
    Ok(ln_val.exp())
}

/// Sharp HLS constant for the double integral of g(x) g(y) |x-y|^{-(n-2a)}
/// against ||g||_r^2, r = 2n/(n + 2 alpha).
pub fn hls_constant(n: u32, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf / 2.0) {
        return Err(Error::domain(format!(
            "hls constant needs 0 < alpha < n/2, got alpha={alpha}, n={n}"
        )));
    }
    let ln_val = (nf / 2.0 - alpha) * PI.ln() + lg(alpha)? - lg(nf / 2.0 + alpha)?
        + (2.0 * alpha / nf) * (lg(nf)? - lg(nf / 2.0)?);
    Ok(ln_val.exp())
}

/// Sharp trace constant T(m, alpha) bounding squared norms,
/// ||tau_m f||^2_{D_{alpha - m/2}} <= T ||f||^2_{D_alpha}.
pub fn trace_constant(m: u32, alpha: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("trace constant needs m >= 1"));
    }
    let mf = m as f64;
    if alpha <= mf / 2.0 {
        return Err(Error::domain(format!(
            "trace constant needs alpha > m/2, got alpha={alpha}, m={m}"
        )));
    }
    let ln_val = -mf * 2f64.ln() - 0.5 * mf * PI.ln() + lg(alpha - mf / 2.0)? - lg(alpha)?;
    Ok(ln_val.exp())
}

/// Sharp trace-Sobolev constant C_{m, alpha, n} bounding
/// ||tau_m f||^2_{L^{2(n-m)/(n-2a)}} <= C ||f||^2_{D_alpha}.
pub fn composed_constant(idx: &FracIndex) -> Result<f64> {
    if idx.m < 1 {
        return Err(Error::domain("composed constant needs m >= 1"));
    }
    let (n, m, a) = (idx.nf(), idx.mf(), idx.alpha);
    let ln_val = -2.0 * a * 2f64.ln() - a * PI.ln()
        + lg(n / 2.0 - a)?
        + lg(a - m / 2.0)?
        - lg(a)?
        - lg(n / 2.0 + a - m)?
        + ((2.0 * a - m) / (n - m)) * (lg(n - m)? - lg((n - m) / 2.0)?);
    Ok(ln_val.exp())
}

/// Xiao's sharp constant for the weighted half-space extension inequality,
/// defined for alpha in (0, 1) with alpha < (n-1)/2.
pub fn xiao_constant(n: u32, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("xiao constant needs n >= 2"));
    }
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < 1.0 && alpha < (nf - 1.0) / 2.0) {
        return Err(Error::domain(format!(
            "xiao constant needs 0 < alpha < min(1, (n-1)/2), got alpha={alpha}, n={n}"
        )));
    }
    let h = (nf - 1.0) / 2.0;
    let ln_val = (1.0 - 4.0 * alpha) * 2f64.ln() - alpha * PI.ln() - lg(2.0 - 2.0 * alpha)?
        + lg(h - alpha)?
        - lg(h + alpha)?
        + (2.0 * alpha / (nf - 1.0)) * (lg(nf - 1.0)? - lg(h)?);
    Ok(ln_val.exp())
}

/// All sharp constants at one index, with the identity residuals that tie
/// them together.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsRecord {
    pub idx: FracIndex,
    pub escobar: Option<f64>,
    pub sobolev: f64,
    pub hls: f64,
    pub trace: Option<f64>,
    pub composed: Option<f64>,
    pub xiao: Option<f64>,
    pub identity_residuals: BTreeMap<String, f64>,
}

fn rel_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Evaluate every constant defined at `idx` and check the exact identities:
/// composition (C_{m,a,n} = T(m,a) S(n-m, a-m/2)), the Escobar factor 1/2,
/// and the Xiao reduction to the (n-1)-dimensional Sobolev constant.
pub fn constants_record(idx: &FracIndex) -> Result<ConstantsRecord> {
    let (n, m, a) = (idx.n, idx.m, idx.alpha);
    let sobolev = sobolev_constant(n, a)?;
    let hls = if a > 0.0 { hls_constant(n, a)? } else { f64::NAN };
    let escobar = if n >= 3 { Some(escobar_constant(n)?) } else { None };
    let trace = if m >= 1 { Some(trace_constant(m, a)?) } else { None };
    let composed = if m >= 1 { Some(composed_constant(idx)?) } else { None };
    let xiao = if n >= 2 && a > 0.0 && a < 1.0 && a < (n as f64 - 1.0) / 2.0 {
        Some(xiao_constant(n, a)?)
    } else {
        None
    };

    let mut residuals = BTreeMap::new();
    if let (Some(t), Some(c)) = (trace, composed) {
        let s_reduced = sobolev_constant(n - m, a - m as f64 / 2.0)?;
        residuals.insert("composition".to_string(), rel_residual(c, t * s_reduced));
    }
    if let (Some(e), Some(c)) = (escobar, composed) {
        if m == 1 && (a - 1.0).abs() < 1e-15 {
            residuals.insert("escobar_half".to_string(), rel_residual(2.0 * c, e));
        }
    }
    if let Some(x) = xiao {
        let factor = (2f64).powf(2.0 * a - 1.0)
            * ln_gamma(2.0 - 2.0 * a)?.exp();
        let s_lower = sobolev_constant(n - 1, a)?;
        residuals.insert("xiao_reduction".to_string(), rel_residual(x * factor, s_lower));
    }

    Ok(ConstantsRecord {
        idx: *idx,
        escobar,
        sobolev,
        hls,
        trace,
        composed,
        xiao,
        identity_residuals: residuals,
    })
}

/// Exponent of the target Lebesgue norm: 2n/(n-2a) for m = 0, and the trace
/// target 2(n-m)/(n-2a) for m >= 1.
pub fn sobolev_exponent(idx: &FracIndex) -> f64 {
    let (n, m, a) = (idx.nf(), idx.mf(), idx.alpha);
    if idx.m == 0 {
        2.0 * n / (n - 2.0 * a)
    } else {
        2.0 * (n - m) / (n - 2.0 * a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn escobar_small_n() {
        // n=3: Gamma(2) = Gamma(1) = 1, so C_3 = 1/sqrt(pi)
        let c3 = escobar_constant(3).unwrap();
        assert!((c3 - 1.0 / SQRT_PI).abs() < 1e-14);
        // n=4: (1/(2 sqrt pi)) (Gamma(3)/Gamma(3/2))^{1/3} = (1/(2 sqrt pi)) (4/sqrt pi)^{1/3}
        let c4 = escobar_constant(4).unwrap();
        let expect = 1.0 / (2.0 * SQRT_PI) * (4.0 / SQRT_PI).powf(1.0 / 3.0);
        assert!((c4 - expect).abs() / expect < 1e-14);
        assert!(escobar_constant(2).is_err());
    }

    #[test]
    fn sobolev_alpha_zero_is_one() {
        assert_eq!(sobolev_constant(3, 0.0).unwrap(), 1.0);
        assert!(sobolev_constant(3, 1.5).is_err());
        assert!(sobolev_constant(3, -0.1).is_err());
    }

    // hand reductions: S(3,1) = 2^{-2} pi^{-1} (Gamma(1/2)/Gamma(5/2))
    // (Gamma(3)/Gamma(3/2))^{2/3} = (1/(3 pi)) (4/sqrt(pi))^{2/3}, and
    // HLS(1, 1/4) = pi^{1/4} Gamma(1/4)/Gamma(3/4) (1/Gamma(1/2))^{1/2}
    #[test]
    fn hand_reduced_closed_forms() {
        let s31 = sobolev_constant(3, 1.0).unwrap();
        let expect = (4.0 / SQRT_PI).powf(2.0 / 3.0) / (3.0 * PI);
        assert!((s31 - expect).abs() / expect < 1e-14, "{s31} vs {expect}");

        let h = hls_constant(1, 0.25).unwrap();
        let g14 = ln_gamma(0.25).unwrap().exp();
        let g34 = ln_gamma(0.75).unwrap().exp();
        let expect = PI.powf(0.25) * g14 / g34 / SQRT_PI.sqrt();
        assert!((h - expect).abs() / expect < 1e-13, "{h} vs {expect}");
    }

    // the Schwarz/duality route: S(n,a) = (2 pi)^{-2a} pi^{-n/2+2a}
    // Gamma(n/2-a)/Gamma(a) * HLS(n,a)
    #[test]
    fn sobolev_reconciles_with_hls_through_riesz_prefactor() {
        for &(n, a) in &[(1u32, 0.25f64), (2, 0.5), (3, 1.0), (2, 0.9), (5, 2.2)] {
            let s = sobolev_constant(n, a).unwrap();
            let h = hls_constant(n, a).unwrap();
            let nf = n as f64;
            let pref = (2.0 * PI).powf(-2.0 * a)
                * ((2.0 * a - nf / 2.0) * PI.ln() + ln_gamma(nf / 2.0 - a).unwrap()
                    - ln_gamma(a).unwrap())
                .exp();
            assert!(
                rel_residual(s, pref * h) < 1e-12,
                "n={n} a={a}: {s} vs {}",
                pref * h
            );
        }
    }

    #[test]
    fn trace_constant_m1_alpha1_is_half() {
        // Gamma(1/2) = sqrt(pi) cancels the pi^{1/2}, leaving 1/2
        assert!((trace_constant(1, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(trace_constant(1, 0.5).is_err());
    }

    #[test]
    fn trace_constant_matches_onedim_quadrature() {
        // T(1, a) = (1/2pi) B(1/2, a - 1/2) = (1/2pi) int (1+u^2)^{-a} du
        for &a in &[0.75, 1.0, 1.3, 2.2] {
            let t = trace_constant(1, a).unwrap();
            let integral = crate::quadrature::integrate_tail(
                &|u: f64| (1.0 + u * u).powf(-a),
                0.0,
                20.0,
                1e-12,
                1e-15,
            )
            .unwrap()
                * 2.0;
            assert!(
                (t - integral / (2.0 * PI)).abs() / t < 1e-10,
                "alpha={a}"
            );
        }
    }

    #[test]
    fn trace_constant_iterates() {
        let lhs = trace_constant(2, 1.5).unwrap();
        let rhs = trace_constant(1, 1.5).unwrap() * trace_constant(1, 1.0).unwrap();
        assert!((lhs - rhs).abs() / lhs < 1e-13);
        assert!((lhs - 1.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn trace_blowup_near_lower_edge() {
        assert!(trace_constant(1, 0.5 + 1e-6).unwrap() > 1e4);
    }

    #[test]
    fn composition_identity_sweep() {
        for n in 3..=8u32 {
            for m in 1..=2u32 {
                for i in 1..10 {
                    let lo = m as f64 / 2.0;
                    let hi = n as f64 / 2.0;
                    let a = lo + (hi - lo) * i as f64 / 10.0;
                    let idx = FracIndex::new(n, m, a).unwrap();
                    let c = composed_constant(&idx).unwrap();
                    let t = trace_constant(m, a).unwrap();
                    let s = sobolev_constant(n - m, a - m as f64 / 2.0).unwrap();
                    assert!(
                        rel_residual(c, t * s) < 1e-12,
                        "composition fails at n={n} m={m} a={a}"
                    );
                }
            }
        }
    }

    #[test]
    fn escobar_half_relation() {
        for n in 3..=12u32 {
            let idx = FracIndex::new(n, 1, 1.0).unwrap();
            let c = composed_constant(&idx).unwrap();
            let e = escobar_constant(n).unwrap();
            assert!(rel_residual(2.0 * c, e) < 1e-12, "n={n}");
        }
        // n=3, m=1, alpha=1: C = escobar(3)/2 = 1/(2 sqrt pi)
        let idx = FracIndex::new(3, 1, 1.0).unwrap();
        assert!((composed_constant(&idx).unwrap() - 0.5 / SQRT_PI).abs() < 1e-14);
    }

    #[test]
    fn xiao_reduction_sweep() {
        for n in 3..=8u32 {
            for i in 1..10 {
                let a = 0.999 * i as f64 / 10.0;
                if a >= (n as f64 - 1.0) / 2.0 {
                    continue;
                }
                let x = xiao_constant(n, a).unwrap();
                let factor = (2f64).powf(2.0 * a - 1.0) * ln_gamma(2.0 - 2.0 * a).unwrap().exp();
                let s = sobolev_constant(n - 1, a).unwrap();
                assert!(rel_residual(x * factor, s) < 1e-12, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn admissibility_gates() {
        assert!(FracIndex::new(3, 1, 0.4).is_err()); // alpha <= m/2
        assert!(FracIndex::new(3, 3, 1.0).is_err()); // m >= n
        assert!(FracIndex::new(1, 0, 0.0).is_ok()); // sobolev boundary case
        assert!(FracIndex::new(2, 1, 1.0).is_err()); // alpha = n/2
    }

    #[test]
    fn record_has_positive_constants_and_small_residuals() {
        let idx = FracIndex::new(4, 2, 1.5).unwrap();
        let rec = constants_record(&idx).unwrap();
        assert!(rec.sobolev > 0.0 && rec.sobolev.is_finite());
        assert!(rec.trace.unwrap() > 0.0);
        assert!(rec.composed.unwrap() > 0.0);
        assert!(rec.identity_residuals["composition"] < 1e-12);
    }

    #[test]
    fn sobolev_exponent_examples() {
        let idx = FracIndex::new(3, 1, 1.0).unwrap();
        assert!((sobolev_exponent(&idx) - 4.0).abs() < 1e-15);
        let idx = FracIndex::new(1, 0, 0.25).unwrap();
        assert!((sobolev_exponent(&idx) - 4.0).abs() < 1e-15);
        let idx = FracIndex::new(4, 2, 1.5).unwrap();
        assert!((sobolev_exponent(&idx) - 4.0).abs() < 1e-15);
    }
}
