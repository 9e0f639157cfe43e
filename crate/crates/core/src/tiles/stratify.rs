//! Level-set stratification of a bi-tile collection.
//!
//! Three independent selection ladders run over the MS, SM and SS fields: at
//! step `n` the level set at threshold `C / 2^n` is formed and every not yet
//! selected tile whose interval meets it in more than 1/100 of its cells is
//! selected. The third ladder starts at `n = -N + 1` so that nothing would
//! have been selected at `-N` (checked; that is the precondition on `N`).
//! Each selected tile then satisfies the overlap certificate: at its
//! assignment levels `(n1, n2, n3)` the three previous-level sets leave more
//! than 97/100 of the tile's cells uncovered, verified in exact cell counts.

use crate::error::{Error, Result};
use crate::maximal::{hybrid_square, BoolGrid2D, HybridField, HybridMode};

use super::{CoefficientTable2D, TileSystem};

#[derive(Debug, Clone)]
pub struct StratifyConfig {
    /// Base threshold `C` (shared with the exceptional-set construction).
    pub c: f64,
    /// Ladder start for the third field (`N` with thresholds `C 2^N / 2^k`).
    pub n_start: i32,
    /// Levels probed past the start before a tile is declared unselectable.
    pub max_levels: i32,
}

impl Default for StratifyConfig {
    fn default() -> Self {
        StratifyConfig { c: 1.0, n_start: 10, max_levels: 60 }
    }
}

/// One stratified tile: its index and assignment levels per ladder.
#[derive(Debug, Clone, Copy)]
pub struct Assignment {
    pub tile: usize,
    pub levels: [i32; 3],
    /// Cells of the tile retained by the triple complement at the previous
    /// levels, and the tile's total cells.
    pub retained_cells: u64,
    pub total_cells: u64,
}

impl Assignment {
    /// Exact certificate: `100 * retained > 97 * total`.
    pub fn certificate_strict(&self) -> bool {
        100 * self.retained_cells > 97 * self.total_cells
    }
}

#[derive(Debug, Clone)]
pub struct Stratification {
    pub assignments: Vec<Assignment>,
    /// Tiles rejected up front: they already overlap a base-level set.
    pub excluded_level0: Vec<usize>,
    /// Tiles never selected by some ladder within the probed levels.
    pub never_selected: Vec<usize>,
    /// Per first-ladder level: measure of the union of selected intervals.
    pub union_measure_by_level: Vec<(i32, f64)>,
    pub config: StratifyConfig,
}

impl Stratification {
    pub fn all_certified(&self) -> bool {
        self.assignments.iter().all(|a| a.certificate_strict())
    }

    pub fn worst_retained_ratio(&self) -> f64 {
        self.assignments
            .iter()
            .map(|a| a.retained_cells as f64 / a.total_cells as f64)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "tile,n1,n2,n3,retained_cells,total_cells,strict")?;
        for a in &self.assignments {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                a.tile,
                a.levels[0],
                a.levels[1],
                a.levels[2],
                a.retained_cells,
                a.total_cells,
                a.certificate_strict()
            )?;
        }
        Ok(())
    }
}

/// Fraction-of-tile overlap in exact cell counts: `100 count > cells`?
fn overlaps(
    set: &BoolGrid2D,
    tile: &super::BiTile,
    n: usize,
) -> (u64, u64) {
    let rx = tile.x.cell_range(n);
    let ry = tile.y.cell_range(n);
    let mut count = 0u64;
    for cy in ry.clone() {
        for cx in rx.clone() {
            if set.get(cx, cy) {
                count += 1;
            }
        }
    }
    let total = (rx.len() * ry.len()) as u64;
    (count, total)
}

/// Runs the three ladders over a shared bi-tile subset.
pub fn stratify_levels(
    tables: [&CoefficientTable2D; 3],
    subset: &[usize],
    system: &TileSystem,
    config: &StratifyConfig,
) -> Result<Stratification> {
    for (want, t) in [(1u8, tables[0]), (2, tables[1]), (3, tables[2])] {
        if t.j != want {
            return Err(Error::ModeTileMismatch { have: t.j, want });
        }
    }
    if tables[0].tiles.len() != tables[1].tiles.len()
        || tables[0].tiles.len() != tables[2].tiles.len()
    {
        return Err(Error::IndexMismatch);
    }
    let n = system.n();
    let fields: [HybridField; 3] = [
        hybrid_square(tables[0], system, HybridMode::MS)?,
        hybrid_square(tables[1], system, HybridMode::SM)?,
        hybrid_square(tables[2], system, HybridMode::SS)?,
    ];
    let c = config.c;
    let big_n = config.n_start;

    // threshold of ladder `lad` at level `k`: C / 2^k for the first two,
    // C 2^N / 2^(k+N) = C / 2^k for the third; the ladders differ only in
    // their starting level.
    let threshold = |k: i32| c * (2.0f64).powi(-k);
    let start = [1i32, 1, -big_n + 1];

    // ladder-start precondition: the third field's pre-start level set must
    // miss (in the 1/100 sense) every tile
    {
        let pre = fields[2].level_set(threshold(-big_n));
        for &i in subset {
            let (count, total) = overlaps(&pre, &tables[0].tiles[i], n);
            if 100 * count > total {
                let sup = fields[2].sup();
                let need = (sup / c).log2().ceil() as i32;
                return Err(Error::LadderStartTooSmall { need });
            }
        }
    }

    // base-level filter: tiles already meeting a base level set are the
    // "other term" of the split and are excluded here
    let base_sets = [
        fields[0].level_set(threshold(0)),
        fields[1].level_set(threshold(0)),
        fields[2].level_set(threshold(-big_n)),
    ];
    let mut excluded = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    'tiles: for &i in subset {
        for set in &base_sets {
            let (count, total) = overlaps(set, &tables[0].tiles[i], n);
            if 100 * count > total {
                excluded.push(i);
                continue 'tiles;
            }
        }
        active.push(i);
    }

    // run each ladder over the active tiles
    let mut levels = vec![[i32::MIN; 3]; tables[0].tiles.len()];
    let mut never = Vec::new();
    for lad in 0..3 {
        let mut unassigned: Vec<usize> = active.clone();
        let mut k = start[lad];
        while !unassigned.is_empty() && k < start[lad] + config.max_levels {
            let set = fields[lad].level_set(threshold(k));
            unassigned.retain(|&i| {
                let (count, total) = overlaps(&set, &tables[0].tiles[i], n);
                if 100 * count > total {
                    levels[i][lad] = k;
                    false
                } else {
                    true
                }
            });
            k += 1;
        }
        never.extend(unassigned);
    }
    never.sort_unstable();
    never.dedup();

    // certificates for fully assigned tiles
    let mut assignments = Vec::new();
    for &i in &active {
        if never.binary_search(&i).is_ok() {
            continue;
        }
        let lv = levels[i];
        let prev_sets = [
            fields[0].level_set(threshold(lv[0] - 1)),
            fields[1].level_set(threshold(lv[1] - 1)),
            fields[2].level_set(threshold(lv[2] - 1)),
        ];
        let tile = &tables[0].tiles[i];
        let rx = tile.x.cell_range(n);
        let ry = tile.y.cell_range(n);
        let mut retained = 0u64;
        for cy in ry.clone() {
            for cx in rx.clone() {
                if !prev_sets[0].get(cx, cy) && !prev_sets[1].get(cx, cy) && !prev_sets[2].get(cx, cy)
                {
                    retained += 1;
                }
            }
        }
        assignments.push(Assignment {
            tile: i,
            levels: lv,
            retained_cells: retained,
            total_cells: (rx.len() * ry.len()) as u64,
        });
    }

    // union measure per first-ladder level
    let mut by_level: Vec<(i32, f64)> = Vec::new();
    let mut lvls: Vec<i32> = assignments.iter().map(|a| a.levels[0]).collect();
    lvls.sort_unstable();
    lvls.dedup();
    for lv in lvls {
        let mut union = BoolGrid2D::empty(n, system.domain_len());
        for a in assignments.iter().filter(|a| a.levels[0] == lv) {
            let t = &tables[0].tiles[a.tile];
            for cy in t.y.cell_range(n) {
                for cx in t.x.cell_range(n) {
                    union.set(cx, cy, true);
                }
            }
        }
        by_level.push((lv, union.measure()));
    }

    Ok(Stratification {
        assignments,
        excluded_level0: excluded,
        never_selected: never,
        union_measure_by_level: by_level,
        config: config.clone(),
    })
}
