//! Paraproduct calculus on periodic grids.
//!
//! A 1D paraproduct of type `j` is a scale sum
//! `sum_k ((f * u_k) (g * v_k)) * w_k` where the slot profiles `(u, v, w)`
//! come from a Littlewood-Paley family: type 0 has annular profiles in every
//! slot, types 1 and 2 put the cumulative low-pass on the first or second
//! input, and type 3 puts it on the output. The profiles are arranged so that
//! the four types sum to the pointwise product exactly on the grid:
//!
//! * off-diagonal scale pairs with a gap of at least 3 telescope into types 1
//!   and 2 whose widened outer annulus equals 1 on the product spectrum;
//! * near-diagonal pairs split between type 0 (output away from frequency
//!   zero) and type 3 (output near zero) with complementary outer profiles;
//! * the product of the two mean modes rides in type 3 as one extra term
//!   whose three slots are all the low-pass mode (on the grid the low-pass
//!   profile is nonzero only at frequency zero, so this term is exactly
//!   `mean(f) mean(g)`).
//!
//! Bi-parameter paraproducts are tensor pairs of 1D triples acting per axis.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bumps::theta;
use crate::error::{Error, Result};
use crate::grid::{freq_of_slot, quasi_norm, Dim, GridFunction, NormMode};
use crate::lp::LpFamily;
use crate::symbols::{EvalFn, Structure, Symbol};

/// Low-pass (contains frequency 0) or annular (vanishes at 0) slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotClass {
    LowPass,
    Annular,
}

/// One scale term: frequency profiles for the f slot, g slot and outer slot.
#[derive(Debug, Clone)]
pub struct Triple {
    pub scale: Option<i32>,
    pub u_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub w_hat: Vec<f64>,
    pub u_class: SlotClass,
    pub v_class: SlotClass,
    pub w_class: SlotClass,
}

/// A 1D paraproduct: its type index and the list of scale terms.
#[derive(Debug, Clone)]
pub struct ParaproductSpec {
    type_index: usize,
    n: usize,
    domain_len: f64,
    triples: Vec<Triple>,
    scales: Vec<i32>,
}

impl ParaproductSpec {
    pub fn type_index(&self) -> usize {
        self.type_index
    }

    pub fn scales(&self) -> &[i32] {
        &self.scales
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain_len(&self) -> f64 {
        self.domain_len
    }
}

/// A bi-parameter paraproduct: 1D structure per axis.
#[derive(Debug, Clone)]
pub struct ParaproductSpec2D {
    pub x: ParaproductSpec,
    pub y: ParaproductSpec,
}

impl ParaproductSpec2D {
    pub fn type_pair(&self) -> (usize, usize) {
        (self.x.type_index, self.y.type_index)
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

/// Builds the type-`j` paraproduct over the family's scales.
pub fn paraproduct_spec(family: &LpFamily, type_index: usize) -> Result<ParaproductSpec> {
    if type_index > 3 {
        return Err(Error::ParamOutOfRange(format!("type index {}", type_index)));
    }
    let n = family.n();
    let l = family.domain_len();
    let scales: Vec<i32> = family.scales().to_vec();
    let k_set: std::collections::HashSet<i32> = scales.iter().cloned().collect();

    let psi = |k: i32| profile(n, l, |a| theta(a / pow2(k)) - theta(a / pow2(k - 1)));
    let lowpass = |k: i32| profile(n, l, |a| theta(a / pow2(k - 1)));
    // annulus widened to [2^(k-3), 2^(k+2)], identically 1 on [2^(k-2), 2^(k+2)]
    let outer_gap = |k: i32| profile(n, l, |a| theta(a / pow2(k + 2)) - theta(a / pow2(k - 3)));
    // fattened annulus: neighbors within 2 scales
    let psi_tilde = |k: i32| {
        let mut acc = vec![0.0f64; n];
        for dk in -2..=2 {
            if k_set.contains(&(k + dk)) {
                for (a, b) in acc.iter_mut().zip(psi(k + dk)) {
                    *a += b;
                }
            }
        }
        acc
    };
    // outer split for the near-diagonal terms: annular + low-pass sum to
    // theta(|zeta| / 2^(k+4)), which is 1 on the diagonal product spectrum
    let outer_diag_annular = |k: i32| profile(n, l, |a| theta(a / pow2(k + 4)) - theta(a / pow2(k - 3)));
    let outer_diag_lowpass = |k: i32| profile(n, l, |a| theta(a / pow2(k - 3)));

    let mut triples = Vec::new();
    match type_index {
        0 => {
            for &k in &scales {
                triples.push(Triple {
                    scale: Some(k),
                    u_hat: psi(k),
                    v_hat: psi_tilde(k),
                    w_hat: outer_diag_annular(k),
                    u_class: SlotClass::Annular,
                    v_class: SlotClass::Annular,
                    w_class: SlotClass::Annular,
                });
            }
        }
        1 => {
            for &k in &scales {
                triples.push(Triple {
                    scale: Some(k),
                    u_hat: lowpass(k - 2),
                    v_hat: psi(k),
                    w_hat: outer_gap(k),
                    u_class: SlotClass::LowPass,
                    v_class: SlotClass::Annular,
                    w_class: SlotClass::Annular,
                });
            }
        }
        2 => {
            for &k in &scales {
                triples.push(Triple {
                    scale: Some(k),
                    u_hat: psi(k),
                    v_hat: lowpass(k - 2),
                    w_hat: outer_gap(k),
                    u_class: SlotClass::Annular,
                    v_class: SlotClass::LowPass,
                    w_class: SlotClass::Annular,
                });
            }
        }
        3 => {
            for &k in &scales {
                triples.push(Triple {
                    scale: Some(k),
                    u_hat: psi(k),
                    v_hat: psi_tilde(k),
                    w_hat: outer_diag_lowpass(k),
                    u_class: SlotClass::Annular,
                    v_class: SlotClass::Annular,
                    w_class: SlotClass::LowPass,
                });
            }
            // mean-mode term: all three slots are the grid's low-pass mode
            let phi0 = family.phi0_hat().to_vec();
            triples.push(Triple {
                scale: None,
                u_hat: phi0.clone(),
                v_hat: phi0.clone(),
                w_hat: phi0,
                u_class: SlotClass::LowPass,
                v_class: SlotClass::LowPass,
                w_class: SlotClass::LowPass,
            });
        }
        _ => unreachable!(),
    }

    Ok(ParaproductSpec {
        type_index,
        n,
        domain_len: l,
        triples,
        scales,
    })
}

/// Tensor pair of 1D paraproducts acting in each variable.
pub fn paraproduct_spec_2d(
    family: &LpFamily,
    type_x: usize,
    type_y: usize,
) -> Result<ParaproductSpec2D> {
    Ok(ParaproductSpec2D {
        x: paraproduct_spec(family, type_x)?,
        y: paraproduct_spec(family, type_y)?,
    })
}

fn filter_1d(f: &GridFunction, profile: &[f64]) -> GridFunction {
    let coeffs: Vec<Complex64> = f
        .spectrum()
        .iter()
        .zip(profile)
        .map(|(c, p)| c * p)
        .collect();
    GridFunction::from_spectrum(Dim::One, f.n(), f.domain_len(), coeffs).expect("geometry")
}

fn filter_2d(f: &GridFunction, px: &[f64], py: &[f64]) -> GridFunction {
    let n = f.n();
    let spec = f.spectrum();
    let mut coeffs = Vec::with_capacity(spec.len());
    for iy in 0..n {
        for ix in 0..n {
            coeffs.push(spec[ix + n * iy] * (px[ix] * py[iy]));
        }
    }
    GridFunction::from_spectrum(Dim::Two, n, f.domain_len(), coeffs).expect("geometry")
}

/// Applies a 1D paraproduct.
pub fn paraproduct(spec: &ParaproductSpec, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.same_geometry(g)?;
    if f.dim() != Dim::One || f.n() != spec.n {
        return Err(Error::GeometryMismatch("paraproduct spec/grid mismatch".into()));
    }
    let mut acc = vec![Complex64::default(); f.n()];
    for t in &spec.triples {
        let fu = filter_1d(f, &t.u_hat);
        let gv = filter_1d(g, &t.v_hat);
        let prod = fu.pointwise_mul(&gv)?;
        let spec_prod = prod.spectrum();
        for (a, (c, w)) in acc.iter_mut().zip(spec_prod.iter().zip(&t.w_hat)) {
            *a += c * w;
        }
    }
    GridFunction::from_spectrum(Dim::One, f.n(), f.domain_len(), acc)
}

/// Applies a bi-parameter paraproduct on 2D grids.
pub fn biparameter_paraproduct(
    spec: &ParaproductSpec2D,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<GridFunction> {
    f.same_geometry(g)?;
    if f.dim() != Dim::Two || f.n() != spec.x.n {
        return Err(Error::GeometryMismatch("2D paraproduct spec/grid mismatch".into()));
    }
    let n = f.n();
    let mut acc = vec![Complex64::default(); n * n];
    for tx in &spec.x.triples {
        for ty in &spec.y.triples {
            let fu = filter_2d(f, &tx.u_hat, &ty.u_hat);
            let gv = filter_2d(g, &tx.v_hat, &ty.v_hat);
            let prod = fu.pointwise_mul(&gv)?;
            let sp = prod.spectrum();
            for iy in 0..n {
                let wy = ty.w_hat[iy];
                if wy == 0.0 {
                    continue;
                }
                for ix in 0..n {
                    let w = tx.w_hat[ix] * wy;
                    if w != 0.0 {
                        acc[ix + n * iy] += sp[ix + n * iy] * w;
                    }
                }
            }
        }
    }
    GridFunction::from_spectrum(Dim::Two, n, f.domain_len(), acc)
}

// ---------------------------------------------------------------------------
// homogeneous derivatives
// ---------------------------------------------------------------------------

/// `D^alpha` on a 1D grid function: spectral multiplication by
/// `(2 pi |k| / L)^alpha`, with the zero mode sent to zero.
pub fn homogeneous_derivative_1d(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::BadExponent(alpha));
    }
    if f.dim() != Dim::One {
        return Err(Error::GeometryMismatch("expected 1D grid".into()));
    }
    let l = f.domain_len();
    Ok(f.apply_spectral(|k| {
        let a = k[0].unsigned_abs() as f64;
        if a == 0.0 {
            Complex64::default()
        } else {
            Complex64::new((2.0 * PI * a / l).powf(alpha), 0.0)
        }
    }))
}

/// Per-axis homogeneous derivative on 2D grids (`axis` 0 or 1).
pub fn homogeneous_derivative_axis(f: &GridFunction, axis: usize, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::BadExponent(alpha));
    }
    if f.dim() != Dim::Two || axis > 1 {
        return Err(Error::GeometryMismatch("expected 2D grid and axis 0/1".into()));
    }
    let l = f.domain_len();
    Ok(f.apply_spectral(|k| {
        let a = k[axis].unsigned_abs() as f64;
        if a == 0.0 {
            Complex64::default()
        } else {
            Complex64::new((2.0 * PI * a / l).powf(alpha), 0.0)
        }
    }))
}

/// `D_1^alpha D_2^beta` on 2D grids.
pub fn homogeneous_derivative_2d(f: &GridFunction, alpha: f64, beta: f64) -> Result<GridFunction> {
    homogeneous_derivative_axis(&homogeneous_derivative_axis(f, 0, alpha)?, 1, beta)
}

// ---------------------------------------------------------------------------
// derivative commutation
// ---------------------------------------------------------------------------

/// Which input argument absorbs the commuted derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgSlot {
    F,
    G,
}

fn receiving_slot(type_index: usize) -> ArgSlot {
    match type_index {
        2 => ArgSlot::F,
        _ => ArgSlot::G,
    }
}

fn deriv_weight(n: usize, l: f64, alpha: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let a = freq_of_slot(i, n).unsigned_abs() as f64;
            if a == 0.0 {
                0.0
            } else {
                (2.0 * PI * a / l).powf(alpha)
            }
        })
        .collect()
}

/// Commutes `D^alpha` through a 1D paraproduct: returns the modified spec and
/// the argument that must receive the derivative, so that
/// `D^alpha Pi(f, g) = Pi'(f, D^alpha g)` (or with the roles of `f`, `g`
/// swapped for type 2) exactly on the grid.
///
/// The receiving slot's profile is divided by the derivative weight on its
/// support (legal because the slot is annular) and the outer profile is
/// multiplied by it. The mean-mode term of type 3 is dropped: a derivative
/// annihilates constants.
pub fn commute_derivative(spec: &ParaproductSpec, alpha: f64) -> Result<(ParaproductSpec, ArgSlot)> {
    if !(alpha > 0.0) {
        return Err(Error::BadExponent(alpha));
    }
    let slot = receiving_slot(spec.type_index);
    let n = spec.n;
    let l = spec.domain_len;
    let w = deriv_weight(n, l, alpha);
    let mut triples = Vec::with_capacity(spec.triples.len());
    for t in &spec.triples {
        let receiving_class = match slot {
            ArgSlot::F => t.u_class,
            ArgSlot::G => t.v_class,
        };
        if receiving_class == SlotClass::LowPass {
            if t.scale.is_none() {
                // mean-mode term: D^alpha kills it on both sides
                continue;
            }
            return Err(Error::LowPassSlotDerivative);
        }
        let mut t2 = t.clone();
        {
            let target = match slot {
                ArgSlot::F => &mut t2.u_hat,
                ArgSlot::G => &mut t2.v_hat,
            };
            for (p, wk) in target.iter_mut().zip(&w) {
                if *p != 0.0 {
                    *p /= wk;
                }
            }
        }
        for (p, wk) in t2.w_hat.iter_mut().zip(&w) {
            *p *= wk;
        }
        triples.push(t2);
    }
    Ok((
        ParaproductSpec {
            type_index: spec.type_index,
            n,
            domain_len: l,
            triples,
            scales: spec.scales.clone(),
        },
        slot,
    ))
}

/// Per-axis targets of a commuted bi-parameter paraproduct.
#[derive(Debug, Clone, Copy)]
pub struct CommutedTargets {
    pub x: ArgSlot,
    pub y: ArgSlot,
}

/// Commutes `D_1^alpha D_2^beta` through a bi-parameter paraproduct; the
/// x-axis derivative routes to the axis-1 receiving argument and the y-axis
/// derivative to the axis-2 one.
pub fn commute_derivative_2d(
    spec: &ParaproductSpec2D,
    alpha: f64,
    beta: f64,
) -> Result<(ParaproductSpec2D, CommutedTargets)> {
    let (x, tx) = commute_derivative(&spec.x, alpha)?;
    let (y, ty) = commute_derivative(&spec.y, beta)?;
    Ok((ParaproductSpec2D { x, y }, CommutedTargets { x: tx, y: ty }))
}

// ---------------------------------------------------------------------------
// induced multiplier symbol
// ---------------------------------------------------------------------------

/// The bilinear multiplier symbol realized by a 1D paraproduct:
/// `m(xi1, xi2) = sum_k u_k(xi1) v_k(xi2) w_k(xi1 + xi2)` with table lookups
/// at exact lattice frequencies (0 outside the representable band; intended
/// for band-limited cross-checks).
pub fn induced_symbol(spec: &ParaproductSpec) -> Symbol {
    let n = spec.n;
    let l = spec.domain_len;
    let triples: Arc<Vec<Triple>> = Arc::new(spec.triples.clone());
    let half = n as i64 / 2;
    let eval: EvalFn = Arc::new(move |fr: &[f64]| {
        let k1 = (fr[0] * l).round() as i64;
        let k2 = (fr[1] * l).round() as i64;
        let ks = k1 + k2;
        if k1 <= -half || k1 > half || k2 <= -half || k2 > half || ks <= -half || ks > half {
            return Complex64::default();
        }
        let (s1, s2, ss) = (
            k1.rem_euclid(n as i64) as usize,
            k2.rem_euclid(n as i64) as usize,
            ks.rem_euclid(n as i64) as usize,
        );
        let mut acc = 0.0;
        for t in triples.iter() {
            acc += t.u_hat[s1] * t.v_hat[s2] * t.w_hat[ss];
        }
        Complex64::new(acc, 0.0)
    });
    Symbol::new(
        &format!("paraproduct_type_{}", spec.type_index),
        2,
        1,
        eval,
        Structure::General,
    )
}

// ---------------------------------------------------------------------------
// fractional Leibniz harness
// ---------------------------------------------------------------------------

/// Exponent data for the Leibniz-rule harness. `per_term` overrides the
/// Holder pair for each of the four right-hand terms.
#[derive(Debug, Clone)]
pub struct KpExponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub per_term: Option<[(f64, f64); 4]>,
}

impl KpExponents {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        validate_holder(p, q, r)?;
        Ok(KpExponents { p, q, r, per_term: None })
    }
}

fn validate_holder(p: f64, q: f64, r: f64) -> Result<()> {
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    if !(p > 1.0) || !(q > 1.0) || !(r > 0.0) || r.is_infinite() {
        return Err(Error::HolderRelation(format!("p={}, q={}, r={}", p, q, r)));
    }
    if (inv(p) + inv(q) - inv(r)).abs() > 1e-12 {
        return Err(Error::HolderRelation(format!(
            "1/{} + 1/{} != 1/{}",
            p, q, r
        )));
    }
    Ok(())
}

/// Derivative orders for the harness.
#[derive(Debug, Clone, Copy)]
pub enum KpCase {
    OneParam { alpha: f64 },
    TwoParam { alpha: f64, beta: f64 },
}

/// One harness row: left side, the (up to four) right-hand terms, and the
/// ratio `lhs / sum(rhs)` (0 when the left side vanishes).
#[derive(Debug, Clone)]
pub struct KpRow {
    pub member: String,
    pub lhs: f64,
    pub rhs_terms: [f64; 4],
    pub ratio: f64,
}

pub fn write_kp_csv<W: Write>(w: &mut W, rows: &[KpRow]) -> Result<()> {
    writeln!(w, "family_member_id,lhs,rhs_term_1,rhs_term_2,rhs_term_3,rhs_term_4,ratio")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.member, r.lhs, r.rhs_terms[0], r.rhs_terms[1], r.rhs_terms[2], r.rhs_terms[3], r.ratio
        )?;
    }
    Ok(())
}

/// Computes both sides of the fractional Leibniz inequality over a family of
/// input pairs and records the ratios. No constant is asserted; the numbers
/// are for reporting and for the dilation-invariance check.
pub fn kato_ponce_report(
    family: &[(String, GridFunction, GridFunction)],
    exps: &KpExponents,
    case: KpCase,
) -> Result<Vec<KpRow>> {
    validate_holder(exps.p, exps.q, exps.r)?;
    if let Some(terms) = &exps.per_term {
        for (p, q) in terms {
            validate_holder(*p, *q, exps.r)?;
        }
    }
    let mut rows = Vec::with_capacity(family.len());
    for (name, f, g) in family {
        f.same_geometry(g)?;
        let prod = f.pointwise_mul(g)?;
        let (lhs, rhs) = match case {
            KpCase::OneParam { alpha } => {
                let lhs = quasi_norm(&homogeneous_derivative_1d(&prod, alpha)?, NormMode::P(exps.r))?;
                let df = homogeneous_derivative_1d(f, alpha)?;
                let dg = homogeneous_derivative_1d(g, alpha)?;
                let (p1, q1) = exps.per_term.map_or((exps.p, exps.q), |t| t[0]);
                let (p2, q2) = exps.per_term.map_or((exps.p, exps.q), |t| t[1]);
                let rhs = [
                    quasi_norm(&df, NormMode::P(p1))? * quasi_norm(g, NormMode::P(q1))?,
                    quasi_norm(f, NormMode::P(p2))? * quasi_norm(&dg, NormMode::P(q2))?,
                    0.0,
                    0.0,
                ];
                (lhs, rhs)
            }
            KpCase::TwoParam { alpha, beta } => {
                let lhs =
                    quasi_norm(&homogeneous_derivative_2d(&prod, alpha, beta)?, NormMode::P(exps.r))?;
                let dfab = homogeneous_derivative_2d(f, alpha, beta)?;
                let dgab = homogeneous_derivative_2d(g, alpha, beta)?;
                let df1 = homogeneous_derivative_axis(f, 0, alpha)?;
                let dg2 = homogeneous_derivative_axis(g, 1, beta)?;
                let dg1 = homogeneous_derivative_axis(g, 0, alpha)?;
                let df2 = homogeneous_derivative_axis(f, 1, beta)?;
                let t = exps
                    .per_term
                    .unwrap_or([(exps.p, exps.q); 4]);
                let rhs = [
                    quasi_norm(&dfab, NormMode::P(t[0].0))? * quasi_norm(g, NormMode::P(t[0].1))?,
                    quasi_norm(f, NormMode::P(t[1].0))? * quasi_norm(&dgab, NormMode::P(t[1].1))?,
                    quasi_norm(&df1, NormMode::P(t[2].0))? * quasi_norm(&dg2, NormMode::P(t[2].1))?,
                    quasi_norm(&dg1, NormMode::P(t[3].0))? * quasi_norm(&df2, NormMode::P(t[3].1))?,
                ];
                (lhs, rhs)
            }
        };
        let denom: f64 = rhs.iter().sum();
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / denom };
        rows.push(KpRow {
            member: name.clone(),
            lhs,
            rhs_terms: rhs,
            ratio,
        });
    }
    Ok(rows)
}
