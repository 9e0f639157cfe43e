//! Littlewood-Paley partitions of the frequency axis.
//!
//! The annular profile at scale `k` is the telescoped difference
//! `psi_hat_k(xi) = theta(|xi| / 2^k) - theta(|xi| / 2^(k-1))`, supported in
//! `[2^(k-1), 2^(k+1)]`; the low-pass `phi0_hat = theta(|xi| / 2^(k_min - 1))`
//! closes the telescope. With `2^k_min <= 1/L` the low-pass is nonzero only at
//! frequency zero on the grid, which is what makes product reconstruction by
//! annular pieces exact for mean-zero inputs.

use num_complex::Complex64;

use crate::bumps::theta;
use crate::error::{Error, Result};
use crate::grid::{freq_of_slot, Dim, GridFunction};

/// One partition of unity over dyadic annuli, sampled on the frequency slots
/// of an `n`-point axis with period `L`.
#[derive(Debug, Clone)]
pub struct LpFamily {
    n: usize,
    domain_len: f64,
    scales: Vec<i32>,
    psi_hats: Vec<Vec<f64>>,
    phi0_hat: Vec<f64>,
    partition_certificate: f64,
}

impl LpFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain_len(&self) -> f64 {
        self.domain_len
    }

    pub fn scales(&self) -> &[i32] {
        &self.scales
    }

    pub fn psi_hat(&self, scale_idx: usize) -> &[f64] {
        &self.psi_hats[scale_idx]
    }

    pub fn phi0_hat(&self) -> &[f64] {
        &self.phi0_hat
    }

    /// Max deviation of the profile sum from 1 over nonzero frequencies.
    pub fn partition_certificate(&self) -> f64 {
        self.partition_certificate
    }

    /// Cumulative low-pass `theta(|xi| / 2^(k-1))`, equal to
    /// `phi0 + sum_(k' < k) psi_k'` on the grid.
    pub fn lowpass_below(&self, k: i32) -> Vec<f64> {
        profile(self.n, self.domain_len, |a| theta(a / pow2(k - 1)))
    }

    /// Convolution `f * psi_k` realized as spectral multiplication.
    pub fn filter(&self, f: &GridFunction, profile_vals: &[f64]) -> GridFunction {
        assert_eq!(f.dim(), Dim::One);
        let spec = f.spectrum();
        let coeffs: Vec<Complex64> = spec
            .iter()
            .zip(profile_vals)
            .map(|(c, p)| c * p)
            .collect();
        GridFunction::from_spectrum(Dim::One, self.n, self.domain_len, coeffs).expect("geometry")
    }
}

fn pow2(k: i32) -> f64 {
    (2.0f64).powi(k)
}

fn profile<F: Fn(f64) -> f64>(n: usize, l: f64, f: F) -> Vec<f64> {
    (0..n)
        .map(|i| f((freq_of_slot(i, n).abs() as f64) / l))
        .collect()
}

/// Builds the partition for an axis of `n` points and period `l`.
///
/// The supplied range must cover every representable annulus:
/// `2^k_min <= 1/L` (low end) and `2^k_max >= N/(2L)` (Nyquist).
pub fn lp_partition(n: usize, l: f64, scale_range: (i32, i32)) -> Result<LpFamily> {
    let (k_min, k_max) = scale_range;
    if k_min > k_max {
        return Err(Error::ScaleRangeTooNarrow {
            lo: k_min,
            hi: k_max,
            need: "nonempty range".into(),
        });
    }
    let min_freq = 1.0 / l;
    let nyquist = n as f64 / (2.0 * l);
    if pow2(k_min) > min_freq {
        return Err(Error::ScaleRangeTooNarrow {
            lo: k_min,
            hi: k_max,
            need: format!("2^k_min <= {}", min_freq),
        });
    }
    if pow2(k_max) < nyquist {
        return Err(Error::ScaleRangeTooNarrow {
            lo: k_min,
            hi: k_max,
            need: format!("2^k_max >= {}", nyquist),
        });
    }
    let scales: Vec<i32> = (k_min..=k_max).collect();
    let psi_hats: Vec<Vec<f64>> = scales
        .iter()
        .map(|&k| profile(n, l, |a| theta(a / pow2(k)) - theta(a / pow2(k - 1))))
        .collect();
    let phi0_hat = profile(n, l, |a| theta(a / pow2(k_min - 1)));

    let mut cert = 0.0f64;
    for i in 0..n {
        if freq_of_slot(i, n) == 0 {
            continue;
        }
        let mut s = phi0_hat[i];
        for p in &psi_hats {
            s += p[i];
        }
        cert = cert.max((s - 1.0).abs());
    }

    Ok(LpFamily {
        n,
        domain_len: l,
        scales,
        psi_hats,
        phi0_hat,
        partition_certificate: cert,
    })
}

/// Default full scale range for an axis: lowest annulus through Nyquist.
pub fn full_scale_range(n: usize, l: f64) -> (i32, i32) {
    let k_min = (1.0 / l).log2().floor() as i32;
    let k_max = (n as f64 / (2.0 * l)).log2().ceil() as i32;
    (k_min, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid_function, quasi_norm, Generator, NormMode};

    #[test]
    fn partition_sums_to_one() {
        let fam = lp_partition(256, 1.0, full_scale_range(256, 1.0)).unwrap();
        assert!(fam.partition_certificate() <= 1e-14);
        // includes frequency zero as well, by phi0(0) = 1
        let i0 = 0;
        let mut s = fam.phi0_hat()[i0];
        for k in 0..fam.scales().len() {
            s += fam.psi_hat(k)[i0];
        }
        assert!((s - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn annular_supports() {
        let n = 256;
        let fam = lp_partition(n, 1.0, full_scale_range(n, 1.0)).unwrap();
        for (kidx, &k) in fam.scales().iter().enumerate() {
            let lo = (2.0f64).powi(k - 1);
            let hi = (2.0f64).powi(k + 1);
            for i in 0..n {
                let a = freq_of_slot(i, n).abs() as f64;
                if a < lo || a > hi {
                    assert_eq!(fam.psi_hat(kidx)[i], 0.0, "scale {} leaks at |xi|={}", k, a);
                }
            }
        }
    }

    #[test]
    fn too_narrow_range_rejected() {
        assert!(lp_partition(256, 1.0, (0, 3)).is_err());
        assert!(lp_partition(256, 1.0, (1, 9)).is_err());
    }

    #[test]
    fn mean_zero_reconstruction() {
        let n = 256;
        let fam = lp_partition(n, 1.0, full_scale_range(n, 1.0)).unwrap();
        let mut f = make_grid_function(
            Dim::One,
            n,
            1.0,
            &Generator::BandLimitedRandom { seed: 11, band: 100 },
        )
        .unwrap();
        // kill the mean
        let mean = f.spectrum()[0];
        f = f
            .sub(&make_grid_function(Dim::One, n, 1.0, &Generator::Constant { value: mean }).unwrap())
            .unwrap();

        let mut acc = make_grid_function(
            Dim::One,
            n,
            1.0,
            &Generator::Constant { value: Complex64::new(0.0, 0.0) },
        )
        .unwrap();
        for k in 0..fam.scales().len() {
            acc = acc.add(&fam.filter(&f, fam.psi_hat(k))).unwrap();
        }
        let diff = acc.sub(&f).unwrap();
        let rel = quasi_norm(&diff, NormMode::P(f64::INFINITY)).unwrap()
            / quasi_norm(&f, NormMode::P(f64::INFINITY)).unwrap();
        assert!(rel <= 1e-12, "rel={}", rel);
    }

    #[test]
    fn spatial_decay_of_annular_piece() {
        // numeric evaluation of the inverse transform of one annular profile
        let n = 4096;
        let l = 1.0;
        let fam = lp_partition(n, l, full_scale_range(n, l)).unwrap();
        // pick the scale k = 6 annulus (well inside the band)
        let kidx = fam.scales().iter().position(|&k| k == 6).unwrap();
        let coeffs: Vec<Complex64> = fam
            .psi_hat(kidx)
            .iter()
            .map(|&p| Complex64::new(p, 0.0))
            .collect();
        let psi = GridFunction::from_spectrum(Dim::One, n, l, coeffs).unwrap();
        let peak = psi
            .samples()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale_len = (2.0f64).powi(-6);
        let rcut = 20.0 * scale_len;
        let mut worst: f64 = 0.0;
        for (i, z) in psi.samples().iter().enumerate() {
            let mut x = i as f64 / n as f64 * l;
            if x > l / 2.0 {
                x = l - x;
            }
            if x >= rcut {
                worst = worst.max(z.norm());
            }
        }
        assert!(worst / peak < 1e-6, "tail ratio {}", worst / peak);
    }
}
