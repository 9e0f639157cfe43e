//! Greedy stopping-time decomposition of a tile collection into trees, and
//! the size/energy bound on the model sum.
//!
//! At level `n` the algorithm repeatedly picks the tile with the largest
//! interval (ties broken by smallest `(k, l)`) whose selection criterion
//! exceeds `2^(-n-1) * energy_ref`, sweeps every remaining tile whose
//! interval nests inside it into a tree rooted there, and moves on. When no
//! tile qualifies the level is closed: by construction every remaining tile's
//! criterion is at most the threshold.

use crate::error::{Error, Result};

use super::size_energy::{selection_criterion, size_energy};
use super::{CoefficientTable1D, DyadicInterval, TileSystem};

/// One tree: a root interval and the member tiles (indices into the table).
#[derive(Debug, Clone)]
pub struct Tree {
    pub root: usize,
    pub interval: DyadicInterval,
    pub members: Vec<usize>,
}

/// Output of the stopping algorithm.
#[derive(Debug, Clone)]
pub struct StoppingDecomposition {
    /// `(n, trees at level n)`, ascending in `n`.
    pub strata: Vec<(i32, Vec<Tree>)>,
    /// Tiles never selected (zero criterion at every probed level).
    pub residual: Vec<usize>,
    pub energy_ref: f64,
    /// Max over levels of `sum |I_T| / 2^n`.
    pub c_stop: f64,
    /// Threshold used at each level.
    pub thresholds: Vec<(i32, f64)>,
}

impl StoppingDecomposition {
    /// Every tile of the input subset, exactly once.
    pub fn all_members(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .strata
            .iter()
            .flat_map(|(_, trees)| trees.iter().flat_map(|t| t.members.iter().cloned()))
            .chain(self.residual.iter().cloned())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W, domain_len: f64) -> Result<()> {
        writeln!(w, "stratum,tree,root_k,root_l,interval_start,interval_len,member_count")?;
        for (n, trees) in &self.strata {
            for (ti, t) in trees.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{:.12e},{:.12e},{}",
                    n,
                    ti,
                    t.interval.k,
                    t.interval.l,
                    t.interval.start(domain_len),
                    t.interval.length(domain_len),
                    t.members.len()
                )?;
            }
        }
        Ok(())
    }
}

fn tie_break(a: DyadicInterval, b: DyadicInterval) -> std::cmp::Ordering {
    // larger interval first, then lexicographic (k, l)
    a.k.cmp(&b.k).then(a.l.cmp(&b.l))
}

/// One removal pass at a fixed threshold: repeatedly selects the qualifying
/// tile with the largest interval (ties by smallest `(k, l)`), sweeps the
/// nested tiles into a tree, and returns `(trees, survivors)`. When no tile's
/// criterion exceeds the threshold the tree list is empty and the input
/// passes through unchanged.
pub fn stopping_step(
    table: &CoefficientTable1D,
    subset: &[usize],
    system: &TileSystem,
    threshold: f64,
) -> (Vec<Tree>, Vec<usize>) {
    let mut remaining: Vec<usize> = subset.to_vec();
    remaining.sort_unstable();
    let mut trees: Vec<Tree> = Vec::new();
    loop {
        let mut pick: Option<usize> = None;
        for &i in &remaining {
            if selection_criterion(table, &remaining, i, system) > threshold {
                pick = Some(match pick {
                    None => i,
                    Some(p) => {
                        if tie_break(table.tiles[i].interval, table.tiles[p].interval)
                            == std::cmp::Ordering::Less
                        {
                            i
                        } else {
                            p
                        }
                    }
                });
            }
        }
        let Some(root) = pick else { break };
        let root_iv = table.tiles[root].interval;
        let (members, rest): (Vec<usize>, Vec<usize>) = remaining
            .iter()
            .partition(|&&i| table.tiles[i].interval.contained_in(root_iv));
        remaining = rest;
        trees.push(Tree { root, interval: root_iv, members });
    }
    (trees, remaining)
}

/// Runs the full multi-level decomposition of `subset` against the reference
/// energy (usually the energy of the full collection).
pub fn stopping_decompose(
    table: &CoefficientTable1D,
    subset: &[usize],
    system: &TileSystem,
    energy_ref: f64,
) -> Result<StoppingDecomposition> {
    let mut remaining: Vec<usize> = subset.to_vec();
    remaining.sort_unstable();
    if energy_ref <= 0.0 || remaining.is_empty() {
        return Ok(StoppingDecomposition {
            strata: Vec::new(),
            residual: remaining,
            energy_ref,
            c_stop: 0.0,
            thresholds: Vec::new(),
        });
    }

    // first level where the current size already sits below 2^-n * energy
    let size0 = {
        let mut s = 0.0f64;
        for &i in &remaining {
            s = s.max(selection_criterion(table, &remaining, i, system));
        }
        s
    };
    if size0 == 0.0 {
        return Ok(StoppingDecomposition {
            strata: Vec::new(),
            residual: remaining,
            energy_ref,
            c_stop: 0.0,
            thresholds: Vec::new(),
        });
    }
    let mut n = (energy_ref / size0).log2().ceil() as i32;
    let n_cap = n + 60;

    let mut strata = Vec::new();
    let mut thresholds = Vec::new();
    let mut c_stop = 0.0f64;

    while !remaining.is_empty() && n <= n_cap {
        let threshold = (2.0f64).powi(-n - 1) * energy_ref;
        thresholds.push((n, threshold));
        let (trees, rest) = stopping_step(table, &remaining, system, threshold);
        remaining = rest;
        if !trees.is_empty() {
            let tree_mass: f64 = trees
                .iter()
                .map(|t| t.interval.length(system.domain_len()))
                .sum();
            c_stop = c_stop.max(tree_mass / (2.0f64).powi(n));
            strata.push((n, trees));
        }
        // all remaining criteria are now <= threshold; stop early when they
        // are identically zero
        let live = remaining
            .iter()
            .any(|&i| selection_criterion(table, &remaining, i, system) > 0.0);
        if !live {
            break;
        }
        n += 1;
    }

    Ok(StoppingDecomposition {
        strata,
        residual: remaining,
        energy_ref,
        c_stop,
        thresholds,
    })
}

/// Verifies the residual bound at every level: after removing the strata at
/// levels `<= n`, every surviving tile's criterion is at most
/// `2^(-n-1) * energy_ref`. Returns the worst violation (nonpositive slack
/// means a clean pass).
pub fn verify_residual_bound(
    table: &CoefficientTable1D,
    decomposition: &StoppingDecomposition,
    system: &TileSystem,
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (level_idx, (n, _)) in decomposition.strata.iter().enumerate() {
        let threshold = (2.0f64).powi(-n - 1) * decomposition.energy_ref;
        // tiles surviving past level n
        let mut survivors: Vec<usize> = decomposition.residual.clone();
        for (_, trees) in decomposition.strata.iter().skip(level_idx + 1) {
            for t in trees {
                survivors.extend(t.members.iter().cloned());
            }
        }
        survivors.sort_unstable();
        for &i in &survivors {
            let c = selection_criterion(table, &survivors, i, system);
            worst = worst.max(c - threshold);
        }
    }
    if worst == f64::NEG_INFINITY {
        0.0
    } else {
        worst
    }
}

/// The size/energy upper bound on the 1D model sum.
#[derive(Debug, Clone)]
pub struct UseEstimate {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub sizes: [f64; 3],
    pub energies: [f64; 3],
}

/// Compares `sum_P |I_P|^{-1/2} prod_j |coeff_j|` against
/// `prod_j size_j^(1-theta_j) energy_j^(theta_j)`.
pub fn size_energy_estimate(
    tables: [&CoefficientTable1D; 3],
    subset: &[usize],
    system: &TileSystem,
    thetas: [f64; 3],
) -> Result<UseEstimate> {
    let sum: f64 = thetas.iter().sum();
    if thetas.iter().any(|&t| !(0.0..1.0).contains(&t)) || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::ThetaConstraint);
    }
    for t in &tables[1..] {
        if t.tiles.len() != tables[0].tiles.len() {
            return Err(Error::IndexMismatch);
        }
    }
    let mut lhs = 0.0f64;
    for &i in subset {
        let len = tables[0].tiles[i].interval.length(system.domain_len());
        lhs += tables[0].coeffs[i].norm() * tables[1].coeffs[i].norm() * tables[2].coeffs[i].norm()
            / len.sqrt();
    }
    let mut sizes = [0.0f64; 3];
    let mut energies = [0.0f64; 3];
    let mut rhs = 1.0f64;
    for j in 0..3 {
        let se = size_energy(tables[j], subset, system)?;
        sizes[j] = se.size;
        energies[j] = se.energy.value;
        rhs *= se.size.powf(1.0 - thetas[j]) * se.energy.value.powf(thetas[j]);
    }
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(UseEstimate { lhs, rhs, ratio, sizes, energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid_function, Dim, Generator};
    use crate::tiles::tile_coefficients_1d;
    use num_complex::Complex64;

    fn table_from(seed: u64, n: usize, j: u8, system: &TileSystem) -> CoefficientTable1D {
        let f = make_grid_function(Dim::One, n, 1.0, &Generator::BandLimitedRandom { seed, band: n / 4 }).unwrap();
        tile_coefficients_1d(&f, system, j).unwrap()
    }

    #[test]
    fn all_below_threshold_yields_no_trees() {
        let sys = TileSystem::new(64, 1.0, None).unwrap();
        let t = table_from(3, 64, 1, &sys);
        let all: Vec<usize> = (0..t.tiles.len()).collect();
        // a threshold above every criterion leaves the set untouched
        let se = size_energy(&t, &all, &sys).unwrap();
        let (trees, rest) = stopping_step(&t, &all, &sys, 2.0 * se.size);
        assert!(trees.is_empty());
        assert_eq!(rest, all);
    }

    #[test]
    fn single_dominant_coefficient_sweeps_nested_tiles() {
        let sys = TileSystem::new(64, 1.0, None).unwrap();
        let tiles = sys.tiles_1d(1);
        let mut coeffs = vec![Complex64::default(); tiles.len()];
        let mut envelopes = vec![0.0; tiles.len()];
        // the root interval [0, 1) holds a huge coefficient
        coeffs[0] = Complex64::new(100.0, 0.0);
        envelopes[0] = 100.0;
        let t = CoefficientTable1D {
            j: 1,
            tiles,
            coeffs,
            envelopes: Some(envelopes),
            source: "synthetic".into(),
            bessel_ratio: None,
        };
        let all: Vec<usize> = (0..t.tiles.len()).collect();
        let d = stopping_decompose(&t, &all, &sys, 100.0).unwrap();
        let total_trees: usize = d.strata.iter().map(|(_, tr)| tr.len()).sum();
        assert_eq!(total_trees, 1);
        let tree = &d.strata[0].1[0];
        assert_eq!(tree.interval, DyadicInterval { k: 0, l: 0 });
        assert_eq!(tree.members.len(), all.len());
        assert!(d.residual.is_empty());
    }

    #[test]
    fn partition_nesting_and_residual_bound() {
        let sys = TileSystem::new(128, 1.0, None).unwrap();
        for seed in [5u64, 6, 7] {
            for j in [1u8, 2, 3] {
                let t = table_from(seed, 128, j, &sys);
                let all: Vec<usize> = (0..t.tiles.len()).collect();
                let se = size_energy(&t, &all, &sys).unwrap();
                if se.energy.value == 0.0 {
                    continue;
                }
                let d = stopping_decompose(&t, &all, &sys, se.energy.value).unwrap();
                // partition
                assert_eq!(d.all_members(), all, "partition broken seed {} j {}", seed, j);
                // nesting
                for (_, trees) in &d.strata {
                    for tree in trees {
                        for &m in &tree.members {
                            assert!(t.tiles[m].interval.contained_in(tree.interval));
                        }
                        // roots within one level have disjoint intervals
                    }
                    for a in 0..trees.len() {
                        for b in a + 1..trees.len() {
                            let (ia, ib) = (trees[a].interval, trees[b].interval);
                            assert!(!ia.contained_in(ib) && !ib.contained_in(ia));
                        }
                    }
                }
                // residual criterion bound, re-evaluated from scratch
                let slack = verify_residual_bound(&t, &d, &sys);
                assert!(slack <= 1e-12, "residual bound violated by {}", slack);
                assert!(d.c_stop.is_finite());
            }
        }
    }

    #[test]
    fn theta_validation() {
        let sys = TileSystem::new(64, 1.0, None).unwrap();
        let t1 = table_from(11, 64, 1, &sys);
        let t2 = table_from(12, 64, 2, &sys);
        let t3 = table_from(13, 64, 3, &sys);
        let all: Vec<usize> = (0..t1.tiles.len()).collect();
        assert!(size_energy_estimate([&t1, &t2, &t3], &all, &sys, [0.5, 0.5, 0.5]).is_err());
        assert!(size_energy_estimate([&t1, &t2, &t3], &all, &sys, [1.0, 0.0, 0.0]).is_err());
        let u = size_energy_estimate(
            [&t1, &t2, &t3],
            &all,
            &sys,
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        )
        .unwrap();
        assert!(u.lhs > 0.0 && u.rhs > 0.0 && u.ratio.is_finite());
    }

    #[test]
    fn empty_subset_estimate() {
        let sys = TileSystem::new(64, 1.0, None).unwrap();
        let t1 = table_from(21, 64, 1, &sys);
        let t2 = table_from(22, 64, 2, &sys);
        let t3 = table_from(23, 64, 3, &sys);
        let u = size_energy_estimate(
            [&t1, &t2, &t3],
            &[],
            &sys,
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        )
        .unwrap();
        assert_eq!((u.lhs, u.rhs, u.ratio), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_tile_bound_holds_for_indicator_inputs() {
        // closed-form check on a one-tile collection with all three inputs
        // the indicator of the interval: coefficients are bounded by
        // |I|^(1/2) (Cauchy-Schwarz) while the envelope integral is at least
        // |I|, so the bound holds with room to spare
        let sys = TileSystem::new(128, 1.0, None).unwrap();
        let iv = DyadicInterval { k: 2, l: 1 };
        let ind = make_grid_function(
            Dim::One,
            128,
            1.0,
            &Generator::IndicatorRect { lo: vec![0.25], hi: vec![0.5] },
        )
        .unwrap();
        let tables: Vec<CoefficientTable1D> = [1u8, 2, 3]
            .iter()
            .map(|&j| tile_coefficients_1d(&ind, &sys, j).unwrap())
            .collect();
        let idx = tables[0].tiles.iter().position(|t| t.interval == iv).unwrap();
        let u = size_energy_estimate(
            [&tables[0], &tables[1], &tables[2]],
            &[idx],
            &sys,
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        )
        .unwrap();
        let len = iv.length(1.0);
        let expect_lhs = (tables[0].coeffs[idx].norm()
            * tables[1].coeffs[idx].norm()
            * tables[2].coeffs[idx].norm())
            / len.sqrt();
        assert!((u.lhs - expect_lhs).abs() <= 1e-12 * expect_lhs.max(1e-300));
        assert!(u.lhs <= u.rhs, "lhs {} rhs {}", u.lhs, u.rhs);
        // sizes are coefficients over |I|^(1/2), at most 1 here
        for s in u.sizes {
            assert!(s <= 1.0 + 1e-12);
        }
        // energies at least |I| (the envelope is 1 on the interval itself)
        for e in u.energies {
            assert!(e >= len - 1e-12);
        }
    }
}
