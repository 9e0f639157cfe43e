//! Maximal dyadic rectangles inside an open set, classified by how far they
//! dilate before leaving the enlarged set.
//!
//! Every input tile's spatial rectangle sits inside `Omega`; it is grown by
//! repeatedly replacing the shorter side's interval by its dyadic parent
//! while the rectangle stays inside `Omega`, which lands on a maximal
//! rectangle deterministically. Distinct maximal rectangles are classified by
//! the largest `d >= 0` such that the concentric `2^d` dilate fits in the
//! domain and inside `Omega~` (membership decided at cell centers, exact
//! integer arithmetic). The per-`d` mass ratios against `2^(eps d) |Omega|`
//! form the covering certificate.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::maximal::{BoolGrid2D, Prefix2D};

use super::{BiTile, DyadicInterval, TileSystem};

/// A dyadic rectangle, product of two dyadic intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicRect {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

impl DyadicRect {
    pub fn area(&self, domain_len: f64) -> f64 {
        self.x.length(domain_len) * self.y.length(domain_len)
    }
}

#[derive(Debug, Clone)]
pub struct JourneClassification {
    /// Distinct maximal rectangles with their dilation class.
    pub rects: Vec<(DyadicRect, u32)>,
    /// Tile index -> index into `rects`.
    pub assignments: Vec<(usize, usize)>,
    /// Per class `d`: total rectangle mass and its ratio to `2^(eps d) |Omega|`.
    pub per_class: Vec<(u32, f64, f64)>,
    /// Max of the per-class ratios.
    pub c_j: f64,
    pub epsilon: f64,
}

impl JourneClassification {
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "d,rect_count,total_area,ratio")?;
        for (d, area, ratio) in &self.per_class {
            let count = self.rects.iter().filter(|(_, rd)| rd == d).count();
            writeln!(w, "{},{},{:.12e},{:.12e}", d, count, area, ratio)?;
        }
        Ok(())
    }
}

fn rect_inside(prefix: &Prefix2D, rect: &DyadicRect, n: usize) -> bool {
    let rx = rect.x.cell_range(n);
    let ry = rect.y.cell_range(n);
    let want = (rx.len() * ry.len()) as u32;
    prefix.count(rx.start, rx.end, ry.start, ry.end) == want
}

/// Grows a rectangle to a maximal one inside the set, preferring to extend
/// the currently shorter side (ties extend x first).
fn enlarge(prefix: &Prefix2D, mut rect: DyadicRect, n: usize) -> DyadicRect {
    loop {
        let try_x = rect.x.parent().map(|px| DyadicRect { x: px, y: rect.y });
        let try_y = rect.y.parent().map(|py| DyadicRect { x: rect.x, y: py });
        let x_ok = try_x.map_or(false, |r| rect_inside(prefix, &r, n));
        let y_ok = try_y.map_or(false, |r| rect_inside(prefix, &r, n));
        rect = if x_ok && y_ok {
            if rect.x.k >= rect.y.k {
                try_x.expect("checked")
            } else {
                try_y.expect("checked")
            }
        } else if x_ok {
            try_x.expect("checked")
        } else if y_ok {
            try_y.expect("checked")
        } else {
            return rect;
        };
    }
}

/// Largest `d >= 0` with the `2^d` concentric dilate inside the domain and
/// inside the enlarged set. Membership is at cell centers: cell `i` belongs
/// to the dilate `[lo, hi)` iff `lo <= i + 1/2 < hi`, checked with integers.
fn dilation_class(prefix_tilde: &Prefix2D, rect: &DyadicRect, n: usize) -> u32 {
    let rx = rect.x.cell_range(n);
    let ry = rect.y.cell_range(n);
    let dims = [(rx.start as i64, rx.end as i64), (ry.start as i64, ry.end as i64)];
    let mut best = 0u32;
    'outer: for d in 1..=(n.trailing_zeros() + 2) {
        let scale = 1i64 << d;
        let mut ranges = [(0i64, 0i64); 2];
        for (axis, &(a, b)) in dims.iter().enumerate() {
            // dilate endpoints in half-cell units: (a+b) -/+ 2^d (b-a)
            let lo2 = (a + b) - scale * (b - a);
            let hi2 = (a + b) + scale * (b - a);
            if lo2 < 0 || hi2 > 2 * n as i64 {
                break 'outer;
            }
            // cells with center in [lo2/2, hi2/2): 2i+1 >= lo2 and 2i+1 < hi2
            let i_min = lo2.div_euclid(2);
            let i_max = (hi2 - 2).div_euclid(2);
            ranges[axis] = (i_min, i_max + 1);
        }
        let (x0, x1) = ranges[0];
        let (y0, y1) = ranges[1];
        let want = ((x1 - x0) * (y1 - y0)) as u32;
        if prefix_tilde.count(x0 as usize, x1 as usize, y0 as usize, y1 as usize) == want {
            best = d;
        } else {
            break;
        }
    }
    best
}

/// Classifies the maximal rectangles covering a tile collection inside
/// `omega`, against the enlarged set `omega_tilde`.
pub fn journe_maximal(
    tiles: &[BiTile],
    omega: &BoolGrid2D,
    omega_tilde: &BoolGrid2D,
    epsilon: f64,
    system: &TileSystem,
) -> Result<JourneClassification> {
    if !omega.subset_of(omega_tilde) {
        return Err(Error::ParamOutOfRange("omega must sit inside omega_tilde".into()));
    }
    let n = system.n();
    let prefix = omega.prefix();
    let prefix_tilde = omega_tilde.prefix();

    let mut rect_ids: HashMap<DyadicRect, usize> = HashMap::new();
    let mut rects: Vec<(DyadicRect, u32)> = Vec::new();
    let mut assignments = Vec::with_capacity(tiles.len());
    for (ti, tile) in tiles.iter().enumerate() {
        let base = DyadicRect { x: tile.x, y: tile.y };
        if !rect_inside(&prefix, &base, n) {
            return Err(Error::TileOutsideSet);
        }
        let maximal = enlarge(&prefix, base, n);
        let id = *rect_ids.entry(maximal).or_insert_with(|| {
            let d = dilation_class(&prefix_tilde, &maximal, n);
            rects.push((maximal, d));
            rects.len() - 1
        });
        assignments.push((ti, id));
    }

    let omega_measure = omega.measure();
    let mut classes: Vec<u32> = rects.iter().map(|(_, d)| *d).collect();
    classes.sort_unstable();
    classes.dedup();
    let l = system.domain_len();
    let mut per_class = Vec::new();
    let mut c_j = 0.0f64;
    for d in classes {
        let total: f64 = rects
            .iter()
            .filter(|(_, rd)| *rd == d)
            .map(|(r, _)| r.area(l))
            .sum();
        let denom = (2.0f64).powf(epsilon * d as f64) * omega_measure;
        let ratio = if denom > 0.0 { total / denom } else { f64::INFINITY };
        c_j = c_j.max(ratio);
        per_class.push((d, total, ratio));
    }

    Ok(JourneClassification { rects, assignments, per_class, c_j, epsilon })
}
