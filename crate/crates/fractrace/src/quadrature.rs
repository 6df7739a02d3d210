//! Adaptive 1-D quadrature on an embedded Gauss-Legendre 10/20 pair, plus
//! helpers for half-line tails and integrable endpoint singularities.

use crate::{Error, Result};

const GL10_X: [f64; 5] = [
    1.488_743_389_816_312_2e-1,
    4.333_953_941_292_472_1e-1,
    6.794_095_682_990_244_4e-1,
    8.650_633_666_889_845_4e-1,
    9.739_065_285_171_717_4e-1,
];
const GL10_W: [f64; 5] = [
    2.955_242_247_147_529_8e-1,
    2.692_667_193_099_965_2e-1,
    2.190_863_625_159_820_1e-1,
    1.494_513_491_505_803_6e-1,
    6.667_134_430_868_806_9e-2,
];
const GL20_X: [f64; 10] = [
    7.652_652_113_349_733_8e-2,
    2.277_858_511_416_451_0e-1,
    3.737_060_887_154_195_5e-1,
    5.108_670_019_508_271_3e-1,
    6.360_536_807_265_150_3e-1,
    7.463_319_064_601_508_0e-1,
    8.391_169_718_222_187_8e-1,
    9.122_344_282_513_258_4e-1,
    9.639_719_272_779_138_1e-1,
    9.931_285_991_850_948_9e-1,
];
const GL20_W: [f64; 10] = [
    1.527_533_871_307_257_8e-1,
    1.491_729_864_726_036_6e-1,
    1.420_961_093_183_818_8e-1,
    1.316_886_384_491_765_3e-1,
    1.181_945_319_615_182_4e-1,
    1.019_301_198_172_402_6e-1,
    8.327_674_157_670_467_2e-2,
    6.267_204_833_410_944_2e-2,
    4.060_142_980_038_621_7e-2,
    1.761_400_713_915_327_3e-2,
];

fn gl10<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..5 {
        s += GL10_W[i] * (f(c - h * GL10_X[i]) + f(c + h * GL10_X[i]));
    }
    s * h
}

fn gl20<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..10 {
        s += GL20_W[i] * (f(c - h * GL20_X[i]) + f(c + h * GL20_X[i]));
    }
    s * h
}

struct Adaptive<'f, F> {
    f: &'f F,
    rel_tol: f64,
    abs_tol: f64,
    evals: usize,
}

const MAX_EVALS: usize = 4_000_000;

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    fn run(&mut self, a: f64, b: f64, coarse: f64, depth: u32) -> Result<f64> {
        let fine = gl20(self.f, a, b);
        self.evals += 30;
        if self.evals > MAX_EVALS {
            return Err(Error::numerical(format!(
                "quadrature did not converge on [{a}, {b}] within {MAX_EVALS} evaluations"
            )));
        }
        let err = (fine - coarse).abs();
        if err <= self.abs_tol + self.rel_tol * fine.abs() || depth >= 52 {
            if !fine.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite quadrature value on [{a}, {b}]"
                )));
            }
            return Ok(fine);
        }
        let m = 0.5 * (a + b);
        let left = gl10(self.f, a, m);
        let right = gl10(self.f, m, b);
        Ok(self.run(a, m, left, depth + 1)? + self.run(m, b, right, depth + 1)?)
    }
}

/// Adaptive integral of `f` over the finite interval [a, b].
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut ad = Adaptive {
        f,
        rel_tol,
        abs_tol,
        evals: 0,
    };
    let coarse = gl10(f, a, b);
    ad.run(a, b, coarse, 0)
}

/// Integral of `f` over [a, inf), assuming f decays at least like a power
/// law. Maps the tail beyond `a + span` through y = 1/u.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    span: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let cut = a + span;
    let head = integrate(f, a, cut, rel_tol, abs_tol)?;
    // int_cut^inf f(y) dy = int_0^{1/cut} f(1/u) / u^2 du
    let tail = integrate(
        &|u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                f(1.0 / u) / (u * u)
            }
        },
        0.0,
        1.0 / cut,
        rel_tol,
        abs_tol,
    )?;
    Ok(head + tail)
}

/// Integral of g(u) u^{-p} over [0, h] with p in [0, 1), by the substitution
/// u = v^{1/(1-p)} which removes the endpoint singularity exactly.
pub fn integrate_power_singularity<F: Fn(f64) -> f64>(
    g: &F,
    p: f64,
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!(
            "singularity exponent must lie in [0,1), got {p}"
        )));
    }
    let q = 1.0 - p;
    let scale = 1.0 / q;
    integrate(
        &|v: f64| {
            if v <= 0.0 {
                0.0
            } else {
                scale * g(v.powf(scale))
            }
        },
        0.0,
        h.powf(q),
        rel_tol,
        abs_tol,
    )
}
