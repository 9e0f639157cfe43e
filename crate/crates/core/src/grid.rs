//! Complex-valued functions sampled on periodic grids `[0, L)^d`, `d = 1, 2`,
//! with exact spectral calculus.
//!
//! Conventions used throughout the crate:
//!
//! * samples live at `x_i = i * L / N`, `i = 0..N` per axis, stored row-major
//!   with the x index fastest (`idx = ix + N * iy` in 2D);
//! * the spectrum holds Fourier-series coefficients `c_k` with
//!   `f(x) = sum_k c_k exp(2 pi i k x / L)` and integer frequencies
//!   `k in (-N/2, N/2]` per axis, so a pure mode `exp(2 pi i k0 x / L)` has a
//!   single coefficient `1` in slot `k0`;
//! * physical frequency of slot `k` is `k / L` (cycles per unit length);
//! * `||f||_p` is the Riemann-sum norm `(cell^d * sum |f_i|^p)^(1/p)`, which
//!   makes Plancherel read `||f||_2^2 = L^d * sum_k |c_k|^2`.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Grid dimensionality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn rank(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

/// Direction of a discrete Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Named sample generators.
#[derive(Debug, Clone)]
pub enum Generator {
    /// Constant field.
    Constant { value: Complex64 },
    /// Real Gaussian bump centered at `center` (defaults to L/2 per axis).
    Gaussian { center: Option<Vec<f64>>, width: f64 },
    /// Random coefficients on `|k| <= band` per axis, reproducible from `seed`.
    BandLimitedRandom { seed: u64, band: usize },
    /// `exp(i x~ y~)` restricted to the centered square `|x~|, |y~| <= n_cut`
    /// in the shifted coordinates `x~ = x - L/2`. 2D only.
    ChirpXY { n_cut: f64 },
    /// `exp(i x~^2)` restricted to `|x~| <= n_cut`. 1D only.
    ChirpX2 { n_cut: f64 },
    /// Indicator of an axis-parallel box given by per-axis fractions of `L`.
    IndicatorRect { lo: Vec<f64>, hi: Vec<f64> },
}

/// Complex samples on a periodic grid with a lazily cached spectrum.
#[derive(Debug, Clone)]
pub struct GridFunction {
    dim: Dim,
    n: usize,
    domain_len: f64,
    samples: Vec<Complex64>,
    spectrum_cache: OnceLock<Vec<Complex64>>,
}

fn is_pow2(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Signed frequency index of FFT slot `i` on an axis of `n` points:
/// `0..=n/2` stay, the rest wrap to negatives, so the range is `(-n/2, n/2]`.
pub fn freq_of_slot(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT slot of an (unaliased) integer frequency, reduced mod `n`.
pub fn slot_of_freq(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

// Process-wide FFT plan cache; plans are immutable once built.
fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .expect("fft planner poisoned");
    match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    }
}

fn fft_axis_2d(data: &mut [Complex64], n: usize, dir: Direction) {
    let fft = plan(n, dir);
    // rows (x fastest)
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    // columns
    let mut col = vec![Complex64::default(); n];
    for ix in 0..n {
        for iy in 0..n {
            col[iy] = data[ix + n * iy];
        }
        fft.process(&mut col);
        for iy in 0..n {
            data[ix + n * iy] = col[iy];
        }
    }
}

impl GridFunction {
    /// Wraps raw samples. `n` must be a power of two `>= 8`; `samples` must
    /// have length `n^d`.
    pub fn from_samples(dim: Dim, n: usize, domain_len: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !is_pow2(n) || n < 8 {
            return Err(Error::BadGridSize(n));
        }
        let want = n.pow(dim.rank() as u32);
        if samples.len() != want {
            return Err(Error::GeometryMismatch(format!(
                "expected {} samples, got {}",
                want,
                samples.len()
            )));
        }
        if !(domain_len > 0.0) {
            return Err(Error::ParamOutOfRange("domain length must be positive".into()));
        }
        Ok(Self {
            dim,
            n,
            domain_len,
            samples,
            spectrum_cache: OnceLock::new(),
        })
    }

    /// Builds a grid function from spectral coefficients laid out in FFT slots.
    pub fn from_spectrum(dim: Dim, n: usize, domain_len: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        let mut data = coeffs;
        match dim {
            Dim::One => plan(n, Direction::Inverse).process(&mut data),
            Dim::Two => fft_axis_2d(&mut data, n, Direction::Inverse),
        }
        Self::from_samples(dim, n, domain_len, data)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain_len(&self) -> f64 {
        self.domain_len
    }

    /// Side length of one grid cell.
    pub fn cell(&self) -> f64 {
        self.domain_len / self.n as f64
    }

    /// Measure of one grid cell, `cell^d`.
    pub fn cell_measure(&self) -> f64 {
        self.cell().powi(self.dim.rank() as i32)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn value(&self, idx: usize) -> Complex64 {
        self.samples[idx]
    }

    pub fn idx2(&self, ix: usize, iy: usize) -> usize {
        ix + self.n * iy
    }

    /// Checks that `other` lives on the same grid.
    pub fn same_geometry(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.n != other.n || self.domain_len != other.domain_len {
            return Err(Error::GeometryMismatch(format!(
                "({:?}, n={}, L={}) vs ({:?}, n={}, L={})",
                self.dim, self.n, self.domain_len, other.dim, other.n, other.domain_len
            )));
        }
        Ok(())
    }

    /// Fourier coefficients of the trigonometric interpolant (cached).
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum_cache.get_or_init(|| {
            let mut data = self.samples.clone();
            match self.dim {
                Dim::One => plan(self.n, Direction::Forward).process(&mut data),
                Dim::Two => fft_axis_2d(&mut data, self.n, Direction::Forward),
            }
            let scale = 1.0 / self.len() as f64;
            for v in &mut data {
                *v *= scale;
            }
            data
        })
    }

    /// Applies a per-slot spectral multiplier and returns the new function.
    pub fn apply_spectral<F>(&self, mut m: F) -> GridFunction
    where
        F: FnMut(&[i64]) -> Complex64,
    {
        let spec = self.spectrum();
        let n = self.n;
        let mut out = Vec::with_capacity(spec.len());
        match self.dim {
            Dim::One => {
                for (i, c) in spec.iter().enumerate() {
                    out.push(c * m(&[freq_of_slot(i, n)]));
                }
            }
            Dim::Two => {
                for iy in 0..n {
                    let ky = freq_of_slot(iy, n);
                    for ix in 0..n {
                        let kx = freq_of_slot(ix, n);
                        out.push(spec[ix + n * iy] * m(&[kx, ky]));
                    }
                }
            }
        }
        GridFunction::from_spectrum(self.dim, n, self.domain_len, out)
            .expect("geometry preserved")
    }

    /// Pointwise product on the sample grid.
    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_geometry(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        GridFunction::from_samples(self.dim, self.n, self.domain_len, samples)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_geometry(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        GridFunction::from_samples(self.dim, self.n, self.domain_len, samples)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_geometry(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        GridFunction::from_samples(self.dim, self.n, self.domain_len, samples)
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        let samples = self.samples.iter().map(|a| a * c).collect();
        GridFunction::from_samples(self.dim, self.n, self.domain_len, samples).expect("same geometry")
    }

    /// Exact translation by whole grid cells (periodic).
    pub fn translate_cells(&self, shift: &[i64]) -> GridFunction {
        let n = self.n as i64;
        let mut samples = vec![Complex64::default(); self.len()];
        match self.dim {
            Dim::One => {
                let h = shift[0].rem_euclid(n) as usize;
                // tau_h f (x) = f(x - h)
                for i in 0..self.n {
                    let src = (i + self.n - h) % self.n;
                    samples[i] = self.samples[src];
                }
            }
            Dim::Two => {
                let hx = shift[0].rem_euclid(n) as usize;
                let hy = shift[1].rem_euclid(n) as usize;
                for iy in 0..self.n {
                    let sy = (iy + self.n - hy) % self.n;
                    for ix in 0..self.n {
                        let sx = (ix + self.n - hx) % self.n;
                        samples[ix + self.n * iy] = self.samples[sx + self.n * sy];
                    }
                }
            }
        }
        GridFunction::from_samples(self.dim, self.n, self.domain_len, samples).expect("same geometry")
    }

    /// `L^p`-normalized dilation by an integer factor, `g(x) = s^{-1/p} f(x/s)`,
    /// resampled with floor indexing (1D).
    pub fn dilate_int(&self, s: usize, p: f64) -> Result<GridFunction> {
        if self.dim != Dim::One {
            return Err(Error::GeometryMismatch("dilate_int is 1D".into()));
        }
        if s == 0 {
            return Err(Error::ParamOutOfRange("dilation factor must be >= 1".into()));
        }
        let amp = (s as f64).powf(-1.0 / p);
        let samples = (0..self.n).map(|i| self.samples[i / s] * amp).collect();
        GridFunction::from_samples(self.dim, self.n, self.domain_len, samples)
    }

    /// Periodic cubic (Catmull-Rom) interpolation, 1D.
    pub fn interp1(&self, x: f64) -> Complex64 {
        debug_assert_eq!(self.dim, Dim::One);
        let n = self.n;
        let t = (x / self.domain_len).rem_euclid(1.0) * n as f64;
        let i1 = t.floor() as usize % n;
        let u = t - t.floor();
        let i0 = (i1 + n - 1) % n;
        let i2 = (i1 + 1) % n;
        let i3 = (i1 + 2) % n;
        catmull_rom(
            self.samples[i0],
            self.samples[i1],
            self.samples[i2],
            self.samples[i3],
            u,
        )
    }

    /// Periodic bicubic interpolation, 2D (Catmull-Rom per axis).
    pub fn interp2(&self, x: f64, y: f64) -> Complex64 {
        debug_assert_eq!(self.dim, Dim::Two);
        let n = self.n;
        let ty = (y / self.domain_len).rem_euclid(1.0) * n as f64;
        let j1 = ty.floor() as usize % n;
        let v = ty - ty.floor();
        let mut rows = [Complex64::default(); 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let jy = (j1 + n + r - 1) % n;
            let tx = (x / self.domain_len).rem_euclid(1.0) * n as f64;
            let i1 = tx.floor() as usize % n;
            let u = tx - tx.floor();
            let i0 = (i1 + n - 1) % n;
            let i2 = (i1 + 1) % n;
            let i3 = (i1 + 2) % n;
            *row = catmull_rom(
                self.samples[i0 + n * jy],
                self.samples[i1 + n * jy],
                self.samples[i2 + n * jy],
                self.samples[i3 + n * jy],
                u,
            );
        }
        catmull_rom(rows[0], rows[1], rows[2], rows[3], v)
    }
}

fn catmull_rom(p0: Complex64, p1: Complex64, p2: Complex64, p3: Complex64, u: f64) -> Complex64 {
    let u2 = u * u;
    let u3 = u2 * u;
    0.5 * ((2.0 * p1)
        + (p2 - p0) * u
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2
        + (3.0 * p1 - 3.0 * p2 + p3 - p0) * u3)
}

/// Builds a grid function from a named generator.
pub fn make_grid_function(dim: Dim, n: usize, domain_len: f64, generator: &Generator) -> Result<GridFunction> {
    if !is_pow2(n) || n < 8 {
        return Err(Error::BadGridSize(n));
    }
    let l = domain_len;
    let cell = l / n as f64;
    let total = n.pow(dim.rank() as u32);
    let mut samples = vec![Complex64::default(); total];
    match generator {
        Generator::Constant { value } => {
            samples.fill(*value);
        }
        Generator::Gaussian { center, width } => {
            let sigma = *width;
            if !(sigma > 0.0) {
                return Err(Error::ParamOutOfRange("gaussian width must be positive".into()));
            }
            let c: Vec<f64> = center.clone().unwrap_or_else(|| vec![l / 2.0; dim.rank()]);
            let bump = |x: f64, c0: f64| -> f64 {
                // periodic distance to the center
                let mut d = (x - c0).abs() % l;
                if d > l / 2.0 {
                    d = l - d;
                }
                (-d * d / (2.0 * sigma * sigma)).exp()
            };
            match dim {
                Dim::One => {
                    for (i, s) in samples.iter_mut().enumerate() {
                        *s = Complex64::new(bump(i as f64 * cell, c[0]), 0.0);
                    }
                }
                Dim::Two => {
                    for iy in 0..n {
                        let by = bump(iy as f64 * cell, c[1]);
                        for ix in 0..n {
                            samples[ix + n * iy] = Complex64::new(bump(ix as f64 * cell, c[0]) * by, 0.0);
                        }
                    }
                }
            }
        }
        Generator::BandLimitedRandom { seed, band } => {
            let band = (*band).min(n / 2 - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut coeffs = vec![Complex64::default(); total];
            let draw = |rng: &mut ChaCha8Rng| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            };
            match dim {
                Dim::One => {
                    for k in -(band as i64)..=band as i64 {
                        coeffs[slot_of_freq(k, n)] = draw(&mut rng);
                    }
                }
                Dim::Two => {
                    for ky in -(band as i64)..=band as i64 {
                        for kx in -(band as i64)..=band as i64 {
                            coeffs[slot_of_freq(kx, n) + n * slot_of_freq(ky, n)] = draw(&mut rng);
                        }
                    }
                }
            }
            return GridFunction::from_spectrum(dim, n, l, coeffs);
        }
        Generator::ChirpXY { n_cut } => {
            if dim != Dim::Two {
                return Err(Error::ParamOutOfRange("chirp_xy needs a 2D grid".into()));
            }
            if !(*n_cut > 0.0 && *n_cut <= l / 2.0) {
                return Err(Error::ParamOutOfRange(format!(
                    "chirp cutoff {} must lie in (0, L/2]",
                    n_cut
                )));
            }
            for iy in 0..n {
                let y = iy as f64 * cell - l / 2.0;
                for ix in 0..n {
                    let x = ix as f64 * cell - l / 2.0;
                    samples[ix + n * iy] = if x.abs() <= *n_cut && y.abs() <= *n_cut {
                        Complex64::from_polar(1.0, x * y)
                    } else {
                        Complex64::default()
                    };
                }
            }
        }
        Generator::ChirpX2 { n_cut } => {
            if dim != Dim::One {
                return Err(Error::ParamOutOfRange("chirp_x2 needs a 1D grid".into()));
            }
            if !(*n_cut > 0.0 && *n_cut <= l / 2.0) {
                return Err(Error::ParamOutOfRange(format!(
                    "chirp cutoff {} must lie in (0, L/2]",
                    n_cut
                )));
            }
            for (i, s) in samples.iter_mut().enumerate() {
                let x = i as f64 * cell - l / 2.0;
                *s = if x.abs() <= *n_cut {
                    Complex64::from_polar(1.0, x * x)
                } else {
                    Complex64::default()
                };
            }
        }
        Generator::IndicatorRect { lo, hi } => {
            if lo.len() < dim.rank() || hi.len() < dim.rank() {
                return Err(Error::ParamOutOfRange("indicator bounds need one fraction per axis".into()));
            }
            let inside1 = |x: f64, a: f64, b: f64| x >= a * l && x < b * l;
            match dim {
                Dim::One => {
                    for (i, s) in samples.iter_mut().enumerate() {
                        if inside1(i as f64 * cell, lo[0], hi[0]) {
                            *s = Complex64::new(1.0, 0.0);
                        }
                    }
                }
                Dim::Two => {
                    for iy in 0..n {
                        let oky = inside1(iy as f64 * cell, lo[1], hi[1]);
                        for ix in 0..n {
                            if oky && inside1(ix as f64 * cell, lo[0], hi[0]) {
                                samples[ix + n * iy] = Complex64::new(1.0, 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
    GridFunction::from_samples(dim, n, l, samples)
}

/// Forward or inverse transform packaged as a grid function: the forward
/// result holds the coefficient array in its sample slots.
pub fn fourier_transform(f: &GridFunction, direction: Direction) -> GridFunction {
    match direction {
        Direction::Forward => {
            let coeffs = f.spectrum().to_vec();
            GridFunction::from_samples(f.dim, f.n, f.domain_len, coeffs).expect("same geometry")
        }
        Direction::Inverse => {
            GridFunction::from_spectrum(f.dim, f.n, f.domain_len, f.samples.clone())
                .expect("same geometry")
        }
    }
}

/// Norm selector for [`quasi_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMode {
    /// Riemann-sum `L^p` quasi-norm, `0 < p <= infinity` (`f64::INFINITY` for sup).
    P(f64),
    /// Weak `L^1` quasi-norm, exact on grid functions.
    WeakL1,
}

/// Quasi-norms used by the size/energy machinery.
///
/// The weak-`L^1` value is computed exactly from the sorted magnitude
/// sequence: with `m_1 >= m_2 >= ...` the norm is `max_i m_i * (i * cell^d)`.
pub fn quasi_norm(f: &GridFunction, mode: NormMode) -> Result<f64> {
    let cellm = f.cell_measure();
    match mode {
        NormMode::P(p) => {
            if !(p > 0.0) {
                return Err(Error::BadExponent(p));
            }
            if p.is_infinite() {
                return Ok(f
                    .samples()
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max));
            }
            let sum: f64 = f.samples().iter().map(|z| z.norm().powf(p)).sum();
            Ok((cellm * sum).powf(1.0 / p))
        }
        NormMode::WeakL1 => {
            let mut mags: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
            let mut best = 0.0f64;
            for (i, m) in mags.iter().enumerate() {
                let v = m * ((i + 1) as f64 * cellm);
                if v > best {
                    best = v;
                }
            }
            Ok(best)
        }
    }
}

/// Weak `L^1` norm of a nonnegative field given as raw values on a grid with
/// cell measure `cellm`.
pub fn weak_l1_raw(values: &[f64], cellm: f64) -> f64 {
    let mut mags: Vec<f64> = values.to_vec();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let mut best = 0.0f64;
    for (i, m) in mags.iter().enumerate() {
        let v = m * ((i + 1) as f64 * cellm);
        if v > best {
            best = v;
        }
    }
    best
}
