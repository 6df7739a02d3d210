//! Discretized complex fields on periodic boxes with forward/inverse DFTs in
//! the e^{-2 pi i x k} convention, and the L^p / D_alpha norms.
//!
//! Conventions (per axis): physical samples x_i = -L/2 + L i/N for
//! i = 0..N-1, frequencies k_l = l/L for l in {-N/2, ..., N/2 - 1} stored in
//! standard DFT order, cell volumes dx = prod L_j/N_j and dk = prod 1/L_j.
//! Forward transform: fhat(k) = dx sum_j f(x_j) e^{-2 pi i x_j . k}.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

pub const MAX_DIM: usize = 3;

/// A periodic box grid in 1 to 3 dimensions with even per-axis sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
}

impl BoxGrid {
    pub fn new(sizes: &[usize], lengths: &[f64]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_DIM {
            return Err(Error::domain(format!(
                "grid dimension must be 1..={MAX_DIM}, got {}",
                sizes.len()
            )));
        }
        if sizes.len() != lengths.len() {
            return Err(Error::domain("sizes and lengths must have equal rank"));
        }
        for (&n, &l) in sizes.iter().zip(lengths) {
            if n < 2 || n % 2 != 0 {
                return Err(Error::domain(format!("sample counts must be even and >= 2, got {n}")));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::domain(format!("box lengths must be positive, got {l}")));
            }
        }
        Ok(BoxGrid {
            sizes: sizes.to_vec(),
            lengths: lengths.to_vec(),
        })
    }

    /// Uniform cube helper: same N and L on every axis.
    pub fn cube(dim: usize, n: usize, l: f64) -> Result<Self> {
        BoxGrid::new(&vec![n; dim], &vec![l; dim])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_points(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Physical cell volume dx = prod L_j / N_j.
    pub fn cell_volume(&self) -> f64 {
        self.sizes
            .iter()
            .zip(&self.lengths)
            .map(|(&n, &l)| l / n as f64)
            .product()
    }

    /// Frequency cell volume dk = prod 1/L_j.
    pub fn freq_cell_volume(&self) -> f64 {
        self.lengths.iter().map(|&l| 1.0 / l).product()
    }

    /// Physical coordinate of index i on `axis`: -L/2 + L i/N.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let l = self.lengths[axis];
        let n = self.sizes[axis];
        -l / 2.0 + l * i as f64 / n as f64
    }

    /// Frequency of DFT bin l on `axis`, in standard order:
    /// l/L for l < N/2, (l-N)/L otherwise.
    pub fn freq(&self, axis: usize, l: usize) -> f64 {
        let n = self.sizes[axis];
        let li = if l < n / 2 { l as isize } else { l as isize - n as isize };
        li as f64 / self.lengths[axis]
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.sizes[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn axis_freqs(&self, axis: usize) -> Vec<f64> {
        (0..self.sizes[axis]).map(|l| self.freq(axis, l)).collect()
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.sizes[axis];
            flat /= self.sizes[axis];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for axis in 0..self.dim() {
            flat = flat * self.sizes[axis] + idx[axis];
        }
        flat
    }

    /// |k|^2 of the frequency at a flat coefficient index.
    pub fn k_squared(&self, flat: usize) -> f64 {
        let idx = self.unravel(flat);
        (0..self.dim())
            .map(|a| {
                let k = self.freq(a, idx[a]);
                k * k
            })
            .sum()
    }

    /// Bin of the negated frequency, (N - l) mod N on every axis.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let idx = self.unravel(flat);
        let mut out = [0usize; MAX_DIM];
        for a in 0..self.dim() {
            out[a] = (self.sizes[a] - idx[a]) % self.sizes[a];
        }
        self.ravel(&out[..self.dim()])
    }
}

/// A function sampled on a [`BoxGrid`], carrying its physical values and a
/// lazily computed frequency view. Values are immutable after construction.
#[derive(Debug)]
pub struct SpectralField {
    grid: BoxGrid,
    values: Vec<Complex64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl Clone for SpectralField {
    fn clone(&self) -> Self {
        let coeffs = OnceLock::new();
        if let Some(c) = self.coeffs.get() {
            let _ = coeffs.set(c.clone());
        }
        SpectralField {
            grid: self.grid.clone(),
            values: self.values.clone(),
            coeffs,
        }
    }
}

/// Unnormalized in-place FFT along every axis of a row-major array.
pub(crate) fn fft_all_axes(grid: &BoxGrid, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let dim = grid.dim();
    let sizes = grid.sizes();
    for axis in 0..dim {
        let n = sizes[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        // stride between consecutive elements along `axis`
        let stride: usize = sizes[axis + 1..].iter().product();
        let lines = data.len() / n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        for line in 0..lines {
            // base index of this line: distribute `line` over the other axes
            let block = line / stride; // index over axes before `axis`
            let offset = line % stride; // index over axes after `axis`
            let base = block * stride * n + offset;
            for j in 0..n {
                scratch[j] = data[base + j * stride];
            }
            fft.process(&mut scratch);
            for j in 0..n {
                data[base + j * stride] = scratch[j];
            }
        }
    }
}

/// (-1)^{sum of bin indices}, the phase translating the DFT to the centered
/// box convention.
fn checkerboard_sign(grid: &BoxGrid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let s: usize = idx[..grid.dim()].iter().sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SpectralField {
    pub fn from_values(grid: BoxGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::domain(format!(
                "value count {} does not match grid ({} points)",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(SpectralField {
            grid,
            values,
            coeffs: OnceLock::new(),
        })
    }

    /// Sample a function of the physical coordinates.
    pub fn sample<F: Fn(&[f64]) -> Complex64>(grid: BoxGrid, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.total_points());
        let dim = grid.dim();
        let mut x = [0.0f64; MAX_DIM];
        for flat in 0..grid.total_points() {
            let idx = grid.unravel(flat);
            for a in 0..dim {
                x[a] = grid.coord(a, idx[a]);
            }
            values.push(f(&x[..dim]));
        }
        SpectralField::from_values(grid, values)
    }

    pub fn sample_real<F: Fn(&[f64]) -> f64>(grid: BoxGrid, f: F) -> Result<Self> {
        SpectralField::sample(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Build a field from its frequency-lattice coefficients.
    pub fn from_coeffs(grid: BoxGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.total_points() {
            return Err(Error::domain("coefficient count does not match grid"));
        }
        // f(x_j) = dk * IFFT_unnorm[ (-1)^{sum l} fhat ]
        let dk = grid.freq_cell_volume();
        let mut data: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * checkerboard_sign(&grid, i))
            .collect();
        fft_all_axes(&grid, &mut data, true);
        for v in &mut data {
            *v *= dk;
        }
        let field = SpectralField {
            grid,
            values: data,
            coeffs: OnceLock::new(),
        };
        let _ = field.coeffs.set(coeffs);
        Ok(field)
    }

    /// Band-limited random field: iid uniform(-1, 1) coefficients on modes
    /// with |k| <= k_max (zero mode excluded), Hermitian-symmetrized so the
    /// physical values are real. Deterministic in `seed`.
    pub fn random_band_limited(grid: BoxGrid, k_max: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = grid.total_points();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); total];
        for flat in 0..total {
            let k2 = grid.k_squared(flat);
            if k2 > 0.0 && k2 <= k_max * k_max {
                let re: f64 = rng.sample(rand::distributions::Standard);
                let im: f64 = rng.sample(rand::distributions::Standard);
                coeffs[flat] = Complex64::new(2.0 * re - 1.0, 2.0 * im - 1.0);
            }
        }
        // enforce fhat(-k) = conj(fhat(k))
        for flat in 0..total {
            let conj = grid.conjugate_index(flat);
            if conj > flat {
                coeffs[conj] = coeffs[flat].conj();
            } else if conj == flat {
                coeffs[flat] = Complex64::new(coeffs[flat].re, 0.0);
            }
        }
        SpectralField::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Frequency-lattice coefficients fhat(k) of the forward transform,
    /// computed once and cached.
    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| {
            let dx = self.grid.cell_volume();
            let mut data = self.values.clone();
            fft_all_axes(&self.grid, &mut data, false);
            for (i, v) in data.iter_mut().enumerate() {
                *v *= dx * checkerboard_sign(&self.grid, i);
            }
            data
        })
    }

    /// Map the coefficients through a frequency multiplier, producing a new
    /// field. The multiplier receives |k|^2 and the flat bin index.
    pub fn apply_multiplier<F: Fn(f64, usize) -> Complex64>(&self, mult: F) -> Result<Self> {
        let coeffs = self.coeffs();
        let mapped: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * mult(self.grid.k_squared(i), i))
            .collect();
        SpectralField::from_coeffs(self.grid.clone(), mapped)
    }

    /// ||f||_{D_alpha}^2 = dk sum |fhat(k)|^2 |2 pi k|^{2 alpha}.
    ///
    /// The k = 0 term contributes zero for alpha > 0 and |fhat(0)|^2 for
    /// alpha = 0 (where the norm reduces to discrete Plancherel).
    pub fn dalpha_norm_sq(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) {
            return Err(Error::domain(format!("dalpha_norm_sq needs alpha >= 0, got {alpha}")));
        }
        let coeffs = self.coeffs();
        let dk = self.grid.freq_cell_volume();
        let two_pi_sq = 4.0 * PI * PI;
        let mut sum = 0.0;
        for (i, c) in coeffs.iter().enumerate() {
            let k2 = self.grid.k_squared(i);
            let w = if k2 == 0.0 {
                if alpha == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (two_pi_sq * k2).powf(alpha)
            };
            sum += c.norm_sqr() * w;
        }
        Ok(dk * sum)
    }

    /// ||f||_p = (dx sum |f(x_j)|^p)^{1/p}, p >= 1.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::domain(format!("lp_norm needs p >= 1, got {p}")));
        }
        let dx = self.grid.cell_volume();
        let sum: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        Ok((dx * sum).powf(1.0 / p))
    }

    /// Scale by a complex constant.
    pub fn scaled(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        let field = SpectralField {
            grid: self.grid.clone(),
            values,
            coeffs: OnceLock::new(),
        };
        if let Some(old) = self.coeffs.get() {
            let _ = field.coeffs.set(old.iter().map(|v| v * c).collect());
        }
        field
    }

    /// Physical-space maximum modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Debug snapshot: CSV rows (flat index, re, im).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{:.17e},{:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn lattice_mode_transforms_to_indicator() {
        let grid = BoxGrid::new(&[256], &[10.0]).unwrap();
        let k0 = 3.0 / 10.0;
        let f = SpectralField::sample(grid.clone(), |x| {
            Complex64::from_polar(1.0, 2.0 * PI * k0 * x[0])
        })
        .unwrap();
        let coeffs = f.coeffs();
        for (i, c) in coeffs.iter().enumerate() {
            let expect = if grid.freq(0, i) == k0 { 10.0 } else { 0.0 };
            assert!(
                (c - Complex64::new(expect, 0.0)).norm() < 1e-10,
                "bin {i}: {c}"
            );
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let grid = BoxGrid::new(&[256], &[12.0]).unwrap();
        let f = SpectralField::sample_real(grid.clone(), |x| (-PI * x[0] * x[0]).exp()).unwrap();
        let coeffs = f.coeffs();
        let mut worst = 0.0f64;
        for (i, c) in coeffs.iter().enumerate() {
            let k = grid.freq(0, i);
            worst = worst.max((c.re - (-PI * k * k).exp()).abs().max(c.im.abs()));
        }
        assert!(worst < 1e-8, "max error {worst}");
    }

    #[test]
    fn gaussian_self_dual_2d() {
        let grid = BoxGrid::new(&[64, 64], &[12.0, 12.0]).unwrap();
        let f = SpectralField::sample_real(grid.clone(), |x| {
            (-PI * (x[0] * x[0] + x[1] * x[1])).exp()
        })
        .unwrap();
        let coeffs = f.coeffs();
        let mut worst = 0.0f64;
        for (i, c) in coeffs.iter().enumerate() {
            let k2 = grid.k_squared(i);
            worst = worst.max((c.re - (-PI * k2).exp()).abs().max(c.im.abs()));
        }
        assert!(worst < 1e-8, "max error {worst}");
    }

    #[test]
    fn roundtrip_and_plancherel_random() {
        for (sizes, lengths) in [
            (vec![128usize], vec![7.0]),
            (vec![32, 16], vec![5.0, 3.0]),
            (vec![8, 8, 8], vec![2.0, 4.0, 3.0]),
        ] {
            let grid = BoxGrid::new(&sizes, &lengths).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let values: Vec<Complex64> = (0..grid.total_points())
                .map(|_| {
                    Complex64::new(
                        rng.sample(rand::distributions::Standard),
                        rng.sample(rand::distributions::Standard),
                    )
                })
                .collect();
            let f = SpectralField::from_values(grid.clone(), values.clone()).unwrap();
            let back = SpectralField::from_coeffs(grid.clone(), f.coeffs().to_vec()).unwrap();
            let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max_diff(back.values(), &values) / scale < 1e-10);

            let dx = grid.cell_volume();
            let dk = grid.freq_cell_volume();
            let phys: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
            let freq: f64 = f.coeffs().iter().map(|v| v.norm_sqr()).sum::<f64>() * dk;
            assert!((phys - freq).abs() / phys < 1e-10, "plancherel {phys} vs {freq}");
        }
    }

    #[test]
    fn dalpha_single_mode() {
        let grid = BoxGrid::new(&[128], &[8.0]).unwrap();
        let amp = Complex64::new(1.3, -0.4);
        let k0 = 5.0 / 8.0;
        let f = SpectralField::sample(grid, |x| amp * Complex64::from_polar(1.0, 2.0 * PI * k0 * x[0])).unwrap();
        let alpha = 0.7;
        let expect = amp.norm_sqr() * 8.0 * (2.0 * PI * k0).powf(2.0 * alpha);
        let got = f.dalpha_norm_sq(alpha).unwrap();
        assert!((got - expect).abs() / expect < 1e-10);
    }

    #[test]
    fn dalpha_zero_is_plancherel() {
        let grid = BoxGrid::new(&[64], &[5.0]).unwrap();
        let f = SpectralField::sample_real(grid, |x| 1.0 / (1.0 + x[0] * x[0])).unwrap();
        let l2 = f.lp_norm(2.0).unwrap();
        let d0 = f.dalpha_norm_sq(0.0).unwrap();
        assert!((d0 - l2 * l2).abs() / d0 < 1e-12);
    }

    // int e^{-2 pi k^2} (2 pi |k|) dk = 1 exactly; the box large enough that
    // the kink-cell quadrature error of the lattice sum is below 1e-6
    #[test]
    fn dalpha_gaussian_matches_quadrature() {
        let grid = BoxGrid::new(&[16384], &[2000.0]).unwrap();
        let f = SpectralField::sample_real(grid, |x| (-PI * x[0] * x[0]).exp()).unwrap();
        let got = f.dalpha_norm_sq(0.5).unwrap();
        assert!((got - 1.0).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn dalpha_rejects_negative_alpha() {
        let grid = BoxGrid::new(&[16], &[1.0]).unwrap();
        let f = SpectralField::sample_real(grid, |_| 1.0).unwrap();
        assert!(f.dalpha_norm_sq(-0.5).is_err());
    }

    #[test]
    fn lp_norm_single_cell_and_scaling() {
        let grid = BoxGrid::new(&[32], &[4.0]).unwrap();
        let h = 2.5;
        let f = SpectralField::sample_real(grid.clone(), |x| {
            if x[0].abs() < 1e-12 {
                h
            } else {
                0.0
            }
        })
        .unwrap();
        let dx = grid.cell_volume();
        for p in [1.0, 2.0, 4.0] {
            let expect = h * dx.powf(1.0 / p);
            assert!((f.lp_norm(p).unwrap() - expect).abs() < 1e-12);
        }
        let g = f.scaled(Complex64::new(-3.0, 0.0));
        assert!((g.lp_norm(3.0).unwrap() - 3.0 * f.lp_norm(3.0).unwrap()).abs() < 1e-12);
        assert!(f.lp_norm(0.5).is_err());
    }

    // ||f||_s^s -> int (1+x^2)^{-1} dx = pi with ~2/L truncation tail
    #[test]
    fn lp_norm_heavy_tail_oracle() {
        let grid = BoxGrid::new(&[4096], &[200.0]).unwrap();
        let f = SpectralField::sample_real(grid, |x| (1.0 + x[0] * x[0]).powf(-0.25)).unwrap();
        let s4 = f.lp_norm(4.0).unwrap().powi(4);
        assert!((s4 - PI).abs() / PI < 0.02, "got {s4}");
    }

    #[test]
    fn dalpha_spectral_convergence_in_resolution() {
        // for a fixed smooth gaussian the norm converges fast as N doubles
        let mut errs = Vec::new();
        let reference = {
            let grid = BoxGrid::new(&[1024], &[30.0]).unwrap();
            SpectralField::sample_real(grid, |x| (-PI * x[0] * x[0]).exp())
                .unwrap()
                .dalpha_norm_sq(0.5)
                .unwrap()
        };
        for n in [32usize, 64, 128] {
            let grid = BoxGrid::new(&[n], &[30.0]).unwrap();
            let f = SpectralField::sample_real(grid, |x| (-PI * x[0] * x[0]).exp()).unwrap();
            errs.push((f.dalpha_norm_sq(0.5).unwrap() - reference).abs());
        }
        assert!(errs[1] <= errs[0] / 4.0 + 1e-14, "{errs:?}");
        assert!(errs[2] <= errs[1] / 4.0 + 1e-14, "{errs:?}");
    }

    #[test]
    fn grid_zero_is_a_sample_point() {
        let grid = BoxGrid::new(&[64], &[7.0]).unwrap();
        assert_eq!(grid.coord(0, 32), 0.0);
    }

    #[test]
    fn csv_snapshot_format() {
        let grid = BoxGrid::new(&[4], &[2.0]).unwrap();
        let f = SpectralField::sample(grid, |x| Complex64::new(x[0], -x[0])).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,re,im"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(BoxGrid::new(&[15], &[1.0]).is_err()); // odd
        assert!(BoxGrid::new(&[16], &[0.0]).is_err()); // zero length
        assert!(BoxGrid::new(&[8, 8, 8, 8], &[1.0; 4]).is_err()); // dim > 3
    }
}
