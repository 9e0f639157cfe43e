//! The one-parameter weak-type experiment: level-set removal, distance
//! stratification of the tile set, and per-stratum size/energy bookkeeping of
//! the model sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{quasi_norm, GridFunction, NormMode};
use crate::maximal::maximal_1d;

use super::size_energy::size_energy;
use super::{tile_coefficients_1d, TileSystem};

#[derive(Debug, Clone)]
pub struct WeakTypeConfig {
    /// Starting threshold for the maximal-function level set; doubled until
    /// the removed set has less than half the reference measure.
    pub c: f64,
    /// Largest distance class probed.
    pub d_cap: u32,
}

impl Default for WeakTypeConfig {
    fn default() -> Self {
        WeakTypeConfig { c: 4.0, d_cap: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct StratumRow {
    pub d: u32,
    pub tile_count: usize,
    pub sizes: [f64; 3],
    pub energies: [f64; 3],
    /// `sum_P |I_P|^{-1/2} prod_j |coeff_j|` over the stratum.
    pub sum: f64,
}

#[derive(Debug, Clone)]
pub struct WeakTypeReport {
    pub c_used: f64,
    pub u_measure: f64,
    pub e3_prime_measure: f64,
    pub strata: Vec<StratumRow>,
    pub total: f64,
    /// Least-squares slope of `log2 size_d(f3)` against `d` (positive-size
    /// strata only; `None` with fewer than three of them).
    pub f3_size_slope: Option<f64>,
}

impl WeakTypeReport {
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "d,tile_count,size_f1,size_f2,size_f3,energy_f1,energy_f2,energy_f3,sum"
        )?;
        for r in &self.strata {
            writeln!(
                w,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.d,
                r.tile_count,
                r.sizes[0],
                r.sizes[1],
                r.sizes[2],
                r.energies[0],
                r.energies[1],
                r.energies[2],
                r.sum
            )?;
        }
        Ok(())
    }
}

/// Runs the weak-type experiment for normalized `f1`, `f2` and a reference
/// set `e3` (boolean cells on the same axis).
pub fn weak_type_driver(
    f1: &GridFunction,
    f2: &GridFunction,
    e3: &[bool],
    system: &TileSystem,
    config: &WeakTypeConfig,
) -> Result<WeakTypeReport> {
    f1.same_geometry(f2)?;
    let n = system.n();
    if f1.n() != n || e3.len() != n {
        return Err(Error::GeometryMismatch("driver inputs disagree on the axis".into()));
    }
    let l = system.domain_len();
    let cell = system.cell();
    for (name, f) in [("f1", f1), ("f2", f2)] {
        let m = quasi_norm(f, NormMode::P(1.0))?;
        if (m - 1.0).abs() > 1e-6 {
            return Err(Error::ParamOutOfRange(format!(
                "{} must be L1-normalized, got {}",
                name, m
            )));
        }
    }
    let e3_measure = e3.iter().filter(|&&b| b).count() as f64 * cell;

    // level set U, doubling the threshold until it is small
    let m1 = maximal_1d(f1)?;
    let m2 = maximal_1d(f2)?;
    let mut c_used = config.c;
    let u_cells: Vec<bool> = loop {
        let u: Vec<bool> = m1
            .iter()
            .zip(&m2)
            .map(|(a, b)| *a > c_used || *b > c_used)
            .collect();
        let measure = u.iter().filter(|&&b| b).count() as f64 * cell;
        if measure < e3_measure / 2.0 {
            break u;
        }
        c_used *= 2.0;
        if c_used > config.c * (2.0f64).powi(60) {
            return Err(Error::ThresholdSearch("level-set threshold search diverged".into()));
        }
    };
    let u_measure = u_cells.iter().filter(|&&b| b).count() as f64 * cell;

    // E3' = E3 minus U, as an indicator function
    let e3p_samples: Vec<Complex64> = e3
        .iter()
        .zip(&u_cells)
        .map(|(&a, &b)| Complex64::new(if a && !b { 1.0 } else { 0.0 }, 0.0))
        .collect();
    let e3_prime_measure =
        e3p_samples.iter().filter(|z| z.re > 0.0).count() as f64 * cell;
    let f3 = GridFunction::from_samples(crate::grid::Dim::One, n, l, e3p_samples)?;

    let t1 = tile_coefficients_1d(f1, system, 1)?;
    let t2 = tile_coefficients_1d(f2, system, 2)?;
    let t3 = tile_coefficients_1d(&f3, system, 3)?;

    // distance class of each tile: floor(log2(1 + dist(I_P, U^c)/|I_P|))
    let uc_positions: Vec<f64> = u_cells
        .iter()
        .enumerate()
        .filter(|(_, &b)| !b)
        .map(|(i, _)| i as f64 * cell)
        .collect();
    let class_of = |iv: super::DyadicInterval| -> u32 {
        if uc_positions.is_empty() {
            return config.d_cap;
        }
        let mut dist = f64::INFINITY;
        for &x in &uc_positions {
            dist = dist.min(iv.dist(x, l));
            if dist == 0.0 {
                break;
            }
        }
        let ratio = 1.0 + dist / iv.length(l);
        (ratio.log2().floor() as u32).min(config.d_cap)
    };

    let mut strata_idx: Vec<Vec<usize>> = vec![Vec::new(); config.d_cap as usize + 1];
    for (i, t) in t1.tiles.iter().enumerate() {
        strata_idx[class_of(t.interval) as usize].push(i);
    }

    let mut strata = Vec::new();
    let mut total = 0.0f64;
    for (d, subset) in strata_idx.iter().enumerate() {
        if subset.is_empty() {
            continue;
        }
        let se1 = size_energy(&t1, subset, system)?;
        let se2 = size_energy(&t2, subset, system)?;
        let se3 = size_energy(&t3, subset, system)?;
        let mut sum = 0.0;
        for &i in subset {
            let len = t1.tiles[i].interval.length(l);
            sum += t1.coeffs[i].norm() * t2.coeffs[i].norm() * t3.coeffs[i].norm() / len.sqrt();
        }
        total += sum;
        strata.push(StratumRow {
            d: d as u32,
            tile_count: subset.len(),
            sizes: [se1.size, se2.size, se3.size],
            energies: [se1.energy.value, se2.energy.value, se3.energy.value],
            sum,
        });
    }

    // slope of the f3 size decay across distance classes
    let pts: Vec<(f64, f64)> = strata
        .iter()
        .filter(|r| r.sizes[2] > 0.0)
        .map(|r| (r.d as f64, r.sizes[2].log2()))
        .collect();
    let f3_size_slope = if pts.len() >= 3 {
        let nn = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = nn * sxx - sx * sx;
        if denom.abs() > 1e-12 {
            Some((nn * sxy - sx * sy) / denom)
        } else {
            None
        }
    } else {
        None
    };

    Ok(WeakTypeReport {
        c_used,
        u_measure,
        e3_prime_measure,
        strata,
        total,
        f3_size_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid_function, Dim, Generator};

    fn l1_normalized(g: GridFunction) -> GridFunction {
        let m = quasi_norm(&g, NormMode::P(1.0)).unwrap();
        g.scale(Complex64::new(1.0 / m, 0.0))
    }

    #[test]
    fn spike_inputs_produce_decaying_far_strata() {
        let n = 512;
        let sys = TileSystem::new(n, 1.0, None).unwrap();
        // tall thin spikes (L1 mass 1)
        let spike = |lo: f64, hi: f64| {
            l1_normalized(
                make_grid_function(
                    Dim::One,
                    n,
                    1.0,
                    &Generator::IndicatorRect { lo: vec![lo], hi: vec![hi] },
                )
                .unwrap(),
            )
        };
        let f1 = spike(0.50, 0.52);
        let f2 = spike(0.51, 0.53);
        let e3 = vec![true; n];
        let rep = weak_type_driver(&f1, &f2, &e3, &sys, &WeakTypeConfig::default()).unwrap();
        assert!(rep.u_measure < 0.5);
        assert!(rep.e3_prime_measure >= 0.5);
        assert!(rep.total.is_finite());
        // the spike sits inside U, so the deepest strata carry tiles around
        // the spike, where the reference indicator vanishes; the packet tails
        // push the per-class sizes down geometrically
        if let Some(slope) = rep.f3_size_slope {
            assert!(slope <= -3.0, "f3 size decay slope {}", slope);
        }
        // coefficients of f1 far from the spike are tiny next to near ones
        let t1 = tile_coefficients_1d(&f1, &sys, 1).unwrap();
        let near = t1
            .tiles
            .iter()
            .zip(&t1.coeffs)
            .filter(|(t, _)| t.interval.k == sys.k_max() && (t.interval.dist(0.51, 1.0) == 0.0))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        let far = t1
            .tiles
            .iter()
            .zip(&t1.coeffs)
            .filter(|(t, _)| t.interval.k == sys.k_max() && t.interval.dist(0.51, 1.0) > 0.3)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(far < 1e-4 * near, "near {} far {}", near, far);
    }

    #[test]
    fn normalization_guard() {
        let n = 64;
        let sys = TileSystem::new(n, 1.0, None).unwrap();
        let f = make_grid_function(Dim::One, n, 1.0, &Generator::Constant { value: Complex64::new(3.0, 0.0) }).unwrap();
        let e3 = vec![true; n];
        assert!(weak_type_driver(&f, &f, &e3, &sys, &WeakTypeConfig::default()).is_err());
    }

    #[test]
    fn stratum_sums_dominated_by_geometric_tail() {
        let n = 256;
        let sys = TileSystem::new(n, 1.0, None).unwrap();
        let f1 = l1_normalized(
            make_grid_function(Dim::One, n, 1.0, &Generator::Gaussian { center: Some(vec![0.3]), width: 0.01 }).unwrap(),
        );
        let f2 = l1_normalized(
            make_grid_function(Dim::One, n, 1.0, &Generator::Gaussian { center: Some(vec![0.7]), width: 0.01 }).unwrap(),
        );
        let e3 = vec![true; n];
        let rep = weak_type_driver(&f1, &f2, &e3, &sys, &WeakTypeConfig::default()).unwrap();
        // the total is finite and the deep strata do not dominate
        let d0: f64 = rep
            .strata
            .iter()
            .filter(|r| r.d <= 1)
            .map(|r| r.sum)
            .sum();
        assert!(rep.total.is_finite());
        assert!(d0 >= 0.5 * rep.total, "shallow strata carry the mass");
    }
}
