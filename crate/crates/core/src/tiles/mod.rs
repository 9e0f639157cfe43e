//! The dyadic tile model: space-frequency tiles, L2-normalized wave packets,
//! coefficient tables, and the model trilinear form.
//!
//! A 1D tile at scale `k >= 0` and position `l` occupies the interval
//! `I_(k,l) = 2^-k [l, l+1) L` and one of three frequency bands in units of
//! `2^k / L`: `low = [-1/4, 1/4]`, `up = [3/4, 5/4]`, `down = [-7/4, -1/4]`
//! (the down profile is identically 1 on `[-3/2, -1/2]`). The band is tied to
//! the tile's type index: in the one-parameter model types 1, 2, 3 use low,
//! up, down; bi-parameter tiles pair a horizontal factor with a vertical one
//! whose bands are (low, up), (up, low), (down, down) for types 1, 2, 3.

mod size_energy;
mod stopping;
mod stratify;
mod journe;
mod driver;

pub use size_energy::{cz_check, size_energy, EnergyEstimate, SizeEnergy};
pub use stopping::{
    size_energy_estimate, stopping_decompose, stopping_step, verify_residual_bound,
    StoppingDecomposition, Tree, UseEstimate,
};
pub use stratify::{stratify_levels, Stratification, StratifyConfig};
pub use journe::{journe_maximal, DyadicRect, JourneClassification};
pub use driver::{weak_type_driver, WeakTypeConfig, WeakTypeReport};

use num_complex::Complex64;

use crate::bumps::window_b;
use crate::error::{Error, Result};
use crate::grid::{freq_of_slot, quasi_norm, Dim, GridFunction, NormMode};

/// Decay exponent of the soft interval envelope `(1 + dist(x, I)/|I|)^-M`.
pub const ENVELOPE_M: i32 = 10;

/// Frequency band tag, in units of `2^k / L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Low,
    Up,
    Down,
}

impl Band {
    pub fn endpoints(self) -> (f64, f64) {
        match self {
            Band::Low => (-0.25, 0.25),
            Band::Up => (0.75, 1.25),
            Band::Down => (-1.75, -0.25),
        }
    }

    /// Profile value at rescaled frequency `u` (frequency times `L / 2^k`).
    /// Plateau-free bumps: at fixed band support these have the most
    /// concentrated spatial envelopes, which the size-decay strata rely on.
    pub fn profile(self, u: f64) -> f64 {
        let (a, b) = self.endpoints();
        window_b(u, a, b, 0.5, 1.5)
    }

    /// Band of the 1D (one-parameter) tile of type `j`.
    pub fn for_type_1d(j: u8) -> Band {
        match j {
            1 => Band::Low,
            2 => Band::Up,
            3 => Band::Down,
            _ => panic!("type index must be 1..=3"),
        }
    }

    /// Bands of the horizontal and vertical factors of a type-`j` bi-tile.
    pub fn for_type_2d(j: u8) -> (Band, Band) {
        match j {
            1 => (Band::Low, Band::Up),
            2 => (Band::Up, Band::Low),
            3 => (Band::Down, Band::Down),
            _ => panic!("type index must be 1..=3"),
        }
    }
}

/// One dyadic space interval, `2^-k [l, l+1) L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub k: i32,
    pub l: i64,
}

impl DyadicInterval {
    pub fn length(self, domain_len: f64) -> f64 {
        domain_len * (2.0f64).powi(-self.k)
    }

    pub fn start(self, domain_len: f64) -> f64 {
        self.l as f64 * self.length(domain_len)
    }

    pub fn center(self, domain_len: f64) -> f64 {
        (self.l as f64 + 0.5) * self.length(domain_len)
    }

    /// Grid cells covered on an `n`-point axis (`k <= log2 n`).
    pub fn cell_range(self, n: usize) -> std::ops::Range<usize> {
        let w = n >> self.k as usize;
        let s = self.l as usize * w;
        s..s + w
    }

    pub fn cells(self, n: usize) -> usize {
        n >> self.k as usize
    }

    /// Dyadic containment: `self` inside `other`.
    pub fn contained_in(self, other: DyadicInterval) -> bool {
        self.k >= other.k && (self.l >> (self.k - other.k) as u32) == other.l
    }

    pub fn parent(self) -> Option<DyadicInterval> {
        if self.k == 0 {
            None
        } else {
            Some(DyadicInterval { k: self.k - 1, l: self.l >> 1 })
        }
    }

    /// Periodic distance from a point to the interval.
    pub fn dist(self, x: f64, domain_len: f64) -> f64 {
        let a = self.start(domain_len);
        let b = a + self.length(domain_len);
        let mut best = f64::INFINITY;
        for w in [-1.0, 0.0, 1.0] {
            let xx = x + w * domain_len;
            let d = if xx < a {
                a - xx
            } else if xx >= b {
                xx - b
            } else {
                0.0
            };
            best = best.min(d);
        }
        best
    }

    /// Soft envelope `(1 + dist/|I|)^-M`.
    pub fn envelope(self, x: f64, domain_len: f64) -> f64 {
        let d = self.dist(x, domain_len);
        (1.0 + d / self.length(domain_len)).powi(-ENVELOPE_M)
    }
}

/// A 1D tile: interval plus frequency band and type index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tile1D {
    pub interval: DyadicInterval,
    pub band: Band,
    pub j: u8,
}

/// A bi-parameter tile: horizontal and vertical 1D factors sharing a type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BiTile {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
    pub j: u8,
}

impl BiTile {
    pub fn area(self, domain_len: f64) -> f64 {
        self.x.length(domain_len) * self.y.length(domain_len)
    }

    pub fn bands(self) -> (Band, Band) {
        Band::for_type_2d(self.j)
    }
}

/// Enumerates tiles at all scales representable on an axis.
#[derive(Debug, Clone)]
pub struct TileSystem {
    n: usize,
    domain_len: f64,
    k_max: i32,
}

impl TileSystem {
    /// `k_max` defaults to the largest scale whose down band stays inside the
    /// Nyquist band, `2^k <= 2N/7`.
    pub fn new(n: usize, domain_len: f64, k_max: Option<i32>) -> Result<Self> {
        let cap = (2.0 * n as f64 / 7.0).log2().floor() as i32;
        let k_max = k_max.unwrap_or(cap);
        if k_max < 0 || k_max > cap {
            return Err(Error::ScaleOutOfRange { k: k_max, max: cap });
        }
        Ok(TileSystem { n, domain_len, k_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain_len(&self) -> f64 {
        self.domain_len
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn cell(&self) -> f64 {
        self.domain_len / self.n as f64
    }

    /// All intervals, coarsest first, position-ordered within a scale.
    pub fn intervals(&self) -> Vec<DyadicInterval> {
        let mut out = Vec::new();
        for k in 0..=self.k_max {
            for l in 0..(1i64 << k) {
                out.push(DyadicInterval { k, l });
            }
        }
        out
    }

    pub fn tiles_1d(&self, j: u8) -> Vec<Tile1D> {
        self.intervals()
            .into_iter()
            .map(|interval| Tile1D { interval, band: Band::for_type_1d(j), j })
            .collect()
    }

    /// All bi-tiles of type `j` over the scale rectangle.
    pub fn bitiles(&self, j: u8) -> Vec<BiTile> {
        let ivs = self.intervals();
        let mut out = Vec::with_capacity(ivs.len() * ivs.len());
        for &x in &ivs {
            for &y in &ivs {
                out.push(BiTile { x, y, j });
            }
        }
        out
    }

    fn band_slots(&self, k: i32, band: Band) -> Vec<(usize, f64)> {
        let n = self.n;
        let l = self.domain_len;
        let scale = (2.0f64).powi(k) / l;
        let mut out = Vec::new();
        for s in 0..n {
            let freq = freq_of_slot(s, n) as f64 / l;
            let w = band.profile(freq / scale);
            if w != 0.0 {
                out.push((s, w));
            }
        }
        out
    }

    /// L2 normalization constant for packets at `(k, band)`.
    fn packet_norm(&self, slots: &[(usize, f64)]) -> f64 {
        let s2: f64 = slots.iter().map(|(_, w)| w * w).sum();
        1.0 / (self.domain_len * s2).sqrt()
    }

    /// Materializes the wave packet on a tile as a grid function
    /// (L2-normalized, spectrum supported exactly in the band).
    pub fn packet_1d(&self, tile: &Tile1D) -> GridFunction {
        let slots = self.band_slots(tile.interval.k, tile.band);
        let a = self.packet_norm(&slots);
        let xc = tile.interval.center(self.domain_len);
        let mut coeffs = vec![Complex64::default(); self.n];
        for &(s, w) in &slots {
            let freq = freq_of_slot(s, self.n) as f64;
            let phase = -2.0 * std::f64::consts::PI * freq * xc / self.domain_len;
            coeffs[s] = Complex64::from_polar(a * w, phase);
        }
        GridFunction::from_spectrum(Dim::One, self.n, self.domain_len, coeffs).expect("geometry")
    }

    /// 2D wave packet of a bi-tile (tensor of the two factors).
    pub fn packet_2d(&self, tile: &BiTile) -> GridFunction {
        let (bx, by) = tile.bands();
        let px = self.packet_1d(&Tile1D { interval: tile.x, band: bx, j: tile.j });
        let py = self.packet_1d(&Tile1D { interval: tile.y, band: by, j: tile.j });
        let n = self.n;
        let mut samples = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                samples.push(px.value(ix) * py.value(iy));
            }
        }
        GridFunction::from_samples(Dim::Two, n, self.domain_len, samples).expect("geometry")
    }
}

/// Coefficients of one function against the packets of a 1D tile set.
#[derive(Debug, Clone)]
pub struct CoefficientTable1D {
    pub j: u8,
    pub tiles: Vec<Tile1D>,
    pub coeffs: Vec<Complex64>,
    /// `< |f|, envelope_I >` per tile; present when built from a function.
    pub envelopes: Option<Vec<f64>>,
    pub source: String,
    /// Bessel ratio `sum |coeff|^2 / ||f||_2^2` recorded at construction.
    pub bessel_ratio: Option<f64>,
}

/// Coefficients over a bi-tile set.
#[derive(Debug, Clone)]
pub struct CoefficientTable2D {
    pub j: u8,
    pub tiles: Vec<BiTile>,
    pub coeffs: Vec<Complex64>,
    pub source: String,
    pub bessel_ratio: Option<f64>,
}

/// Inner products `<f, Phi_P>` over all 1D tiles of type `j`, plus the
/// envelope integrals the energy functional needs.
pub fn tile_coefficients_1d(
    f: &GridFunction,
    system: &TileSystem,
    j: u8,
) -> Result<CoefficientTable1D> {
    if f.dim() != Dim::One || f.n() != system.n || f.domain_len() != system.domain_len {
        return Err(Error::GeometryMismatch("function/tile system mismatch".into()));
    }
    let n = system.n;
    let l = system.domain_len;
    let tiles = system.tiles_1d(j);
    let spec = f.spectrum();
    let mut coeffs = Vec::with_capacity(tiles.len());
    for k in 0..=system.k_max {
        let band = Band::for_type_1d(j);
        let slots = system.band_slots(k, band);
        let a = system.packet_norm(&slots);
        for lpos in 0..(1i64 << k) {
            let xc = DyadicInterval { k, l: lpos }.center(l);
            let mut acc = Complex64::default();
            for &(s, w) in &slots {
                let freq = freq_of_slot(s, n) as f64;
                // conj of the packet coefficient carries +phase
                let ph = 2.0 * std::f64::consts::PI * freq * xc / l;
                acc += spec[s] * Complex64::from_polar(a * w, ph);
            }
            coeffs.push(acc * l);
        }
    }

    // envelope integrals
    let cell = system.cell();
    let mags: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
    let envelopes: Vec<f64> = tiles
        .iter()
        .map(|t| {
            let mut s = 0.0;
            for (i, m) in mags.iter().enumerate() {
                s += m * t.interval.envelope(i as f64 * cell, l);
            }
            s * cell
        })
        .collect();

    let norm2 = quasi_norm(f, NormMode::P(2.0))?;
    let bessel = if norm2 > 0.0 {
        Some(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / (norm2 * norm2))
    } else {
        None
    };

    Ok(CoefficientTable1D {
        j,
        tiles,
        coeffs,
        envelopes: Some(envelopes),
        source: "function".into(),
        bessel_ratio: bessel,
    })
}

/// Inner products `<f, Phi_P>` over all bi-tiles of type `j`.
pub fn tile_coefficients_2d(
    f: &GridFunction,
    system: &TileSystem,
    j: u8,
) -> Result<CoefficientTable2D> {
    if f.dim() != Dim::Two || f.n() != system.n || f.domain_len() != system.domain_len {
        return Err(Error::GeometryMismatch("function/tile system mismatch".into()));
    }
    let n = system.n;
    let l = system.domain_len;
    let (bx, by) = Band::for_type_2d(j);
    let spec = f.spectrum();
    let tiles = system.bitiles(j);
    let mut coeffs = vec![Complex64::default(); tiles.len()];
    let two_pi = 2.0 * std::f64::consts::PI;

    for kx in 0..=system.k_max {
        let slots_x = system.band_slots(kx, bx);
        let ax = system.packet_norm(&slots_x);
        let nx = 1usize << kx as usize;
        // stage 1: contract the x axis for every x-center and every y slot
        let mut inner = vec![Complex64::default(); nx * n];
        for lx in 0..nx {
            let xc = DyadicInterval { k: kx, l: lx as i64 }.center(l);
            for &(sx, wx) in &slots_x {
                let freq = freq_of_slot(sx, n) as f64;
                let ph = Complex64::from_polar(ax * wx, two_pi * freq * xc / l);
                for sy in 0..n {
                    inner[lx * n + sy] += spec[sx + n * sy] * ph;
                }
            }
        }
        for ky in 0..=system.k_max {
            let slots_y = system.band_slots(ky, by);
            let ay = system.packet_norm(&slots_y);
            let ny = 1usize << ky as usize;
            for lx in 0..nx {
                for ly in 0..ny {
                    let yc = DyadicInterval { k: ky, l: ly as i64 }.center(l);
                    let mut acc = Complex64::default();
                    for &(sy, wy) in &slots_y {
                        let freq = freq_of_slot(sy, n) as f64;
                        let ph = Complex64::from_polar(ay * wy, two_pi * freq * yc / l);
                        acc += inner[lx * n + sy] * ph;
                    }
                    // tiles enumerate y fastest within an (kx, ky) block? they
                    // enumerate x outer over all intervals; compute the flat
                    // index directly instead
                    let xi = interval_index(kx, lx as i64);
                    let yi = interval_index(ky, ly as i64);
                    let n_int = interval_count(system.k_max);
                    coeffs[xi * n_int + yi] = acc * l * l;
                }
            }
        }
    }

    let norm2 = quasi_norm(f, NormMode::P(2.0))?;
    let bessel = if norm2 > 0.0 {
        Some(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / (norm2 * norm2))
    } else {
        None
    };

    Ok(CoefficientTable2D {
        j,
        tiles,
        coeffs,
        source: "function".into(),
        bessel_ratio: bessel,
    })
}

/// Flat index of a dyadic interval in scale-major enumeration.
pub fn interval_index(k: i32, l: i64) -> usize {
    ((1i64 << k) - 1 + l) as usize
}

/// Number of intervals with scales `0..=k_max`.
pub fn interval_count(k_max: i32) -> usize {
    ((1i64 << (k_max + 1)) - 1) as usize
}

/// The model trilinear form: `sum_P |I_P|^{-1/2} prod_j |coeff_j(P)|` over a
/// shared bi-tile index set.
pub fn model_form(
    t1: &CoefficientTable2D,
    t2: &CoefficientTable2D,
    t3: &CoefficientTable2D,
    domain_len: f64,
) -> Result<f64> {
    if t1.tiles.len() != t2.tiles.len() || t1.tiles.len() != t3.tiles.len() {
        return Err(Error::IndexMismatch);
    }
    let mut s = 0.0;
    for i in 0..t1.tiles.len() {
        let a = t1.tiles[i];
        let b = t2.tiles[i];
        let c = t3.tiles[i];
        if a.x != b.x || a.y != b.y || b.x != c.x || b.y != c.y {
            return Err(Error::IndexMismatch);
        }
        let area = a.area(domain_len);
        s += (t1.coeffs[i].norm() * t2.coeffs[i].norm() * t3.coeffs[i].norm()) / area.sqrt();
    }
    Ok(s)
}
