//! Multiplier symbols: construction, derivative-decay verification, angular
//! cone partitions, and localized inverse-transform decay profiles.
//!
//! A symbol of arity `n` with `d` frequency variables per argument is a
//! bounded function of the stacked vector `(xi_1, ..., xi_n)`, `xi_j` in
//! `R^d`. For `d = 2` the two "parameter planes" pair the first coordinates
//! of all arguments and the second coordinates of all arguments; derivative
//! decay is measured against the distance to the origin of each plane
//! separately.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bumps::window;
use crate::error::{Error, Result};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Declared algebraic structure, used to pick fast evaluation paths.
#[derive(Clone)]
pub enum Structure {
    General,
    /// `m = sum_t prod_j factor[t][j](xi_j)`: each term factors across
    /// arguments. Factors take one argument's frequency vector.
    ArgSeparable(Vec<Vec<EvalFn>>),
}

/// A frequency-domain multiplier of declared arity.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    arity: usize,
    freq_dim: usize,
    eval: EvalFn,
    structure: Structure,
    recorded_sup: f64,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("freq_dim", &self.freq_dim)
            .field("recorded_sup", &self.recorded_sup)
            .finish()
    }
}

impl Symbol {
    pub fn new(name: &str, arity: usize, freq_dim: usize, eval: EvalFn, structure: Structure) -> Self {
        let recorded_sup = sample_sup(&eval, arity * freq_dim);
        Symbol {
            name: name.to_string(),
            arity,
            freq_dim,
            eval,
            structure,
            recorded_sup,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn freq_dim(&self) -> usize {
        self.freq_dim
    }

    pub fn n_vars(&self) -> usize {
        self.arity * self.freq_dim
    }

    /// Sampled sup of `|m|` recorded at construction.
    pub fn recorded_sup(&self) -> f64 {
        self.recorded_sup
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Evaluates at stacked physical frequencies `[arg1..., arg2..., ...]`.
    pub fn eval(&self, freqs: &[f64]) -> Complex64 {
        debug_assert_eq!(freqs.len(), self.n_vars());
        (self.eval)(freqs)
    }
}

fn sample_sup(eval: &EvalFn, nvars: usize) -> f64 {
    // coarse lattice over [-8, 8]^nvars, enough to record a sup for the
    // bounded symbols built here
    let pts = [-8.0, -4.9, -2.3, -1.0, -0.31, 0.17, 0.9, 2.7, 5.1, 8.0];
    let mut sup = 0.0f64;
    let mut idx = vec![0usize; nvars];
    let mut buf = vec![0.0f64; nvars];
    loop {
        for (v, &i) in buf.iter_mut().zip(idx.iter()) {
            *v = pts[i];
        }
        sup = sup.max(eval(&buf).norm());
        // odometer
        let mut carry = true;
        for d in 0..nvars {
            if carry {
                idx[d] += 1;
                if idx[d] == pts.len() {
                    idx[d] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    sup
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Smooth homogeneous degree-0 demo profile on a plane, `(a^2 - b^2) / (a^2 + b^2)`.
fn demo_plane(a: f64, b: f64) -> f64 {
    let d = a * a + b * b;
    if d == 0.0 {
        0.0
    } else {
        (a * a - b * b) / d
    }
}

/// Optional knobs for [`build_symbol`].
#[derive(Debug, Clone)]
pub struct SymbolParams {
    /// Frequency dimension per argument for names that support both (sgn_sgn).
    pub freq_dim: usize,
    /// Number of cones in each plane partition for `cone_restricted`.
    pub n_cones: usize,
}

impl Default for SymbolParams {
    fn default() -> Self {
        SymbolParams { freq_dim: 2, n_cones: 8 }
    }
}

/// Builds one of the named symbols.
///
/// `identity` is 1 everywhere; `sgn_sgn` is `sgn(xi1 - xi2) * sgn(eta1 - eta2)`
/// with `sgn(0) = 0` (the 1D variant is `sgn(xi - eta)`); `derivative_sum`
/// is `2 pi i (xi + eta)`.
pub fn build_symbol(name: &str, params: &SymbolParams) -> Result<Symbol> {
    match name {
        "identity" => {
            let one: EvalFn = Arc::new(|_| Complex64::new(1.0, 0.0));
            let term: Vec<EvalFn> = (0..2)
                .map(|_| -> EvalFn { Arc::new(|_: &[f64]| Complex64::new(1.0, 0.0)) })
                .collect();
            Ok(Symbol::new(
                name,
                2,
                params.freq_dim,
                one,
                Structure::ArgSeparable(vec![term]),
            ))
        }
        "one_param_cm_demo" => {
            let eval: EvalFn = Arc::new(|f: &[f64]| Complex64::new(demo_plane(f[0], f[1]), 0.0));
            Ok(Symbol::new(name, 2, 1, eval, Structure::General))
        }
        "two_param_tensor" => {
            let eval: EvalFn = Arc::new(|f: &[f64]| {
                // args (xi1, xi2), (eta1, eta2); planes pair first and second coords
                let m1 = demo_plane(f[0], f[2]);
                let m2 = demo_plane(f[1], f[3]);
                Complex64::new(m1 * m2, 0.0)
            });
            Ok(Symbol::new(name, 2, 2, eval, Structure::General))
        }
        "cone_restricted" => {
            let cones1 = cone_partition(Plane::First, params.n_cones)?;
            let cones2 = cone_partition(Plane::Second, params.n_cones)?;
            let c1 = cones1.spine_cutoff().clone();
            let c2 = cones2.spine_cutoff().clone();
            let eval: EvalFn = Arc::new(move |f: &[f64]| {
                let w = c1.eval(f[0], f[2]) * c2.eval(f[1], f[3]);
                Complex64::new(w, 0.0)
            });
            Ok(Symbol::new(name, 2, 2, eval, Structure::General))
        }
        "sgn_sgn" => match params.freq_dim {
            1 => {
                let eval: EvalFn = Arc::new(|f: &[f64]| Complex64::new(sgn(f[0] - f[1]), 0.0));
                Ok(Symbol::new(name, 2, 1, eval, Structure::General))
            }
            2 => {
                let eval: EvalFn = Arc::new(|f: &[f64]| {
                    Complex64::new(sgn(f[0] - f[2]) * sgn(f[1] - f[3]), 0.0)
                });
                Ok(Symbol::new(name, 2, 2, eval, Structure::General))
            }
            d => Err(Error::ParamOutOfRange(format!("sgn_sgn freq dim {}", d))),
        },
        "derivative_sum" => {
            let eval: EvalFn =
                Arc::new(|f: &[f64]| Complex64::new(0.0, 2.0 * PI * (f[0] + f[1])));
            let t1: Vec<EvalFn> = vec![
                Arc::new(|f: &[f64]| Complex64::new(0.0, 2.0 * PI * f[0])),
                Arc::new(|_: &[f64]| Complex64::new(1.0, 0.0)),
            ];
            let t2: Vec<EvalFn> = vec![
                Arc::new(|_: &[f64]| Complex64::new(1.0, 0.0)),
                Arc::new(|f: &[f64]| Complex64::new(0.0, 2.0 * PI * f[0])),
            ];
            Ok(Symbol::new(
                name,
                2,
                1,
                eval,
                Structure::ArgSeparable(vec![t1, t2]),
            ))
        }
        other => Err(Error::UnknownSymbol(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// derivative decay verification
// ---------------------------------------------------------------------------

/// Which decay condition to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    /// `|d^beta m| <= C / |gamma|^|beta|` against the full stacked vector.
    OneParam,
    /// Product-of-plane-distances condition for `freq_dim = 2` symbols.
    TwoParam,
}

#[derive(Debug, Clone)]
pub struct DecayConfig {
    /// Half-extent of the sampled frequency box.
    pub extent: f64,
    /// Sample lattice points per axis.
    pub points_per_axis: usize,
    /// Finite-difference step (the refinement parameter). Points closer than
    /// eight steps to a singular set are excluded.
    pub fd_step: f64,
    /// Pass threshold on the weighted derivative sup.
    pub threshold: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            extent: 8.0,
            points_per_axis: 9,
            fd_step: 1.0 / 64.0,
            threshold: 1e3,
        }
    }
}

/// Per-multi-index verdicts.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub mode: DecayMode,
    pub orders_tested: Vec<Vec<u32>>,
    pub worst_constant: Vec<f64>,
    pub pass: Vec<bool>,
    pub threshold: f64,
    pub exclusion_radius: f64,
}

impl DecayReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "order,constant,pass")?;
        for ((o, c), p) in self
            .orders_tested
            .iter()
            .zip(&self.worst_constant)
            .zip(&self.pass)
        {
            let os: Vec<String> = o.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{:.6e},{}", os.join("."), c, p)?;
        }
        Ok(())
    }
}

fn multi_indices(nvars: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            if cur.iter().sum::<u32>() > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=remaining {
            cur[pos] = v;
            rec(cur, pos + 1, remaining - v, out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, max_order, &mut out);
    out.sort_by_key(|o| (o.iter().sum::<u32>(), o.clone()));
    out
}

fn binom(n: u32, k: u32) -> f64 {
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Central difference estimate of the mixed partial `d^beta m` at `x`,
/// step `h` in every variable.
fn central_diff(eval: &EvalFn, x: &[f64], beta: &[u32], h: f64) -> Complex64 {
    // tensor stencil: offsets (o/2 - j) h per variable
    let nvars = x.len();
    let mut total = Complex64::default();
    let dims: Vec<usize> = beta.iter().map(|&b| b as usize + 1).collect();
    let count: usize = dims.iter().product();
    let mut pt = vec![0.0f64; nvars];
    for flat in 0..count {
        let mut rem = flat;
        let mut coef = 1.0f64;
        for v in 0..nvars {
            let j = rem % dims[v];
            rem /= dims[v];
            let o = beta[v];
            pt[v] = x[v] + (o as f64 / 2.0 - j as f64) * h;
            if j % 2 == 1 {
                coef = -coef;
            }
            coef *= binom(o, j as u32);
        }
        total += eval(&pt) * coef;
    }
    let order: u32 = beta.iter().sum();
    total / h.powi(order as i32)
}

/// Richardson-refined derivative (second-order central differences at `h`
/// and `h/2` combined to fourth order).
fn refined_diff(eval: &EvalFn, x: &[f64], beta: &[u32], h: f64) -> Complex64 {
    let d1 = central_diff(eval, x, beta, h);
    let d2 = central_diff(eval, x, beta, h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// Verifies derivative decay by finite differences on a sample lattice,
/// excluding an eight-cell neighborhood of the singular sets.
pub fn verify_decay(
    symbol: &Symbol,
    mode: DecayMode,
    max_order: u32,
    cfg: &DecayConfig,
) -> Result<DecayReport> {
    let nvars = symbol.n_vars();
    if mode == DecayMode::TwoParam && symbol.freq_dim() != 2 {
        return Err(Error::ParamOutOfRange(
            "two-parameter decay needs freq_dim 2".into(),
        ));
    }
    if cfg.points_per_axis < 4 {
        return Err(Error::InsufficientRefinement(format!(
            "{} points per axis",
            cfg.points_per_axis
        )));
    }
    let h_lat = 2.0 * cfg.extent / (cfg.points_per_axis - 1) as f64;
    let h_fd = cfg.fd_step;
    let exclusion = 8.0 * h_fd;
    if !(h_fd > 0.0) || exclusion >= cfg.extent {
        return Err(Error::InsufficientRefinement(format!(
            "fd step {} too coarse for the sampled box of extent {}",
            h_fd, cfg.extent
        )));
    }

    let orders = multi_indices(nvars, max_order);
    let mut worst = vec![0.0f64; orders.len()];

    let arity = symbol.arity();
    let plane_dist = |x: &[f64], coord: usize| -> f64 {
        let mut s = 0.0;
        for j in 0..arity {
            let v = x[j * symbol.freq_dim() + coord];
            s += v * v;
        }
        s.sqrt()
    };

    let axis: Vec<f64> = (0..cfg.points_per_axis)
        .map(|i| -cfg.extent + i as f64 * h_lat)
        .collect();
    let mut idx = vec![0usize; nvars];
    let mut x = vec![0.0f64; nvars];
    let mut any_point = false;
    loop {
        for (v, &i) in x.iter_mut().zip(idx.iter()) {
            *v = axis[i];
        }
        let admissible = match mode {
            DecayMode::OneParam => {
                let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                r >= exclusion
            }
            DecayMode::TwoParam => {
                plane_dist(&x, 0) >= exclusion && plane_dist(&x, 1) >= exclusion
            }
        };
        if admissible {
            any_point = true;
            for (oi, beta) in orders.iter().enumerate() {
                let d = refined_diff(&symbol.eval, &x, beta, h_fd).norm();
                let weight = match mode {
                    DecayMode::OneParam => {
                        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let o: u32 = beta.iter().sum();
                        r.powi(o as i32)
                    }
                    DecayMode::TwoParam => {
                        let (mut o1, mut o2) = (0u32, 0u32);
                        for j in 0..arity {
                            o1 += beta[j * 2];
                            o2 += beta[j * 2 + 1];
                        }
                        plane_dist(&x, 0).powi(o1 as i32) * plane_dist(&x, 1).powi(o2 as i32)
                    }
                };
                let c = d * weight;
                if c > worst[oi] {
                    worst[oi] = c;
                }
            }
        }
        let mut carry = true;
        for d in 0..nvars {
            if carry {
                idx[d] += 1;
                if idx[d] == axis.len() {
                    idx[d] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    if !any_point {
        return Err(Error::InsufficientRefinement(
            "no sample point clears the singular-set exclusion".into(),
        ));
    }

    let pass: Vec<bool> = worst.iter().map(|&c| c <= cfg.threshold).collect();
    Ok(DecayReport {
        mode,
        orders_tested: orders,
        worst_constant: worst,
        pass,
        threshold: cfg.threshold,
        exclusion_radius: exclusion,
    })
}

// ---------------------------------------------------------------------------
// cone partitions
// ---------------------------------------------------------------------------

/// Which parameter plane a cone partition lives in. The first plane's marked
/// cone points along the vertical axis, the second plane's along the
/// horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    First,
    Second,
}

/// One angular cutoff: homogeneous of degree zero, supported in a sector.
#[derive(Debug, Clone)]
pub struct ConeCutoff {
    center: f64,
    spacing: f64,
    support_half: f64,
}

impl ConeCutoff {
    pub fn center_angle(&self) -> f64 {
        self.center
    }

    fn weight(&self, delta: f64) -> f64 {
        window(delta, -self.support_half, self.support_half, 0.25)
    }

    /// Value at the point `(a, b)` of the plane; 0 at the origin.
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        if a == 0.0 && b == 0.0 {
            return 0.0;
        }
        let theta = b.atan2(a);
        let mut num = 0.0;
        let mut den = 0.0;
        // only this cone and its two neighbors can be active
        for off in [-1.0f64, 0.0, 1.0] {
            let c = self.center + off * self.spacing;
            let w = self.weight(wrap_angle(theta - c));
            den += w;
            if off == 0.0 {
                num = w;
            }
        }
        // den also collects contributions of cones outside the immediate
        // neighbors only if support overlapped them, which spacing forbids
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}

fn wrap_angle(t: f64) -> f64 {
    let mut t = t % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// A full angular partition of one plane.
#[derive(Debug, Clone)]
pub struct ConePartition {
    cutoffs: Vec<ConeCutoff>,
    spine_index: usize,
}

impl ConePartition {
    pub fn cutoffs(&self) -> &[ConeCutoff] {
        &self.cutoffs
    }

    /// The cutoff whose sector contains the plane's spine axis.
    pub fn spine_cutoff(&self) -> &ConeCutoff {
        &self.cutoffs[self.spine_index]
    }

    pub fn sum_at(&self, a: f64, b: f64) -> f64 {
        self.cutoffs.iter().map(|c| c.eval(a, b)).sum()
    }
}

/// Splits a plane into `n_cones` smooth angular sectors whose sum is 1 away
/// from the origin; each point lies in at most two supports.
pub fn cone_partition(plane: Plane, n_cones: usize) -> Result<ConePartition> {
    if n_cones < 8 || n_cones % 4 != 0 {
        return Err(Error::ParamOutOfRange(
            "cone count must be a multiple of 4, at least 8".into(),
        ));
    }
    let spacing = 2.0 * PI / n_cones as f64;
    let support_half = 0.6 * spacing;
    let cutoffs: Vec<ConeCutoff> = (0..n_cones)
        .map(|i| ConeCutoff {
            center: wrap_angle(i as f64 * spacing),
            spacing,
            support_half,
        })
        .collect();
    let spine_angle = match plane {
        Plane::First => PI / 2.0,
        Plane::Second => 0.0,
    };
    let spine_index = (0..n_cones)
        .min_by(|&a, &b| {
            let da = wrap_angle(cutoffs[a].center - spine_angle).abs();
            let db = wrap_angle(cutoffs[b].center - spine_angle).abs();
            da.partial_cmp(&db).expect("finite angles")
        })
        .expect("nonempty");
    Ok(ConePartition { cutoffs, spine_index })
}

// ---------------------------------------------------------------------------
// localized decay profile
// ---------------------------------------------------------------------------

/// Result of [`localized_decay_profile`]: rescaled inverse-transform
/// magnitudes on the shift lattice, with the polynomially weighted sup.
#[derive(Debug, Clone)]
pub struct LocalizedDecayProfile {
    pub n_max: i64,
    /// `|F(n1x, n2x, n1y, n2y)|`, flattened with n1x fastest.
    pub pair_magnitudes: Vec<f64>,
    /// third-packet 1D factors per axis shift
    pub third_x: Vec<f64>,
    pub third_y: Vec<f64>,
    pub weighted_sup: f64,
    pub underflow: bool,
}

impl LocalizedDecayProfile {
    fn side(&self) -> usize {
        (2 * self.n_max + 1) as usize
    }

    pub fn pair_magnitude(&self, n1x: i64, n2x: i64, n1y: i64, n2y: i64) -> f64 {
        let s = self.side();
        let o = |v: i64| (v + self.n_max) as usize;
        self.pair_magnitudes[o(n1x) + s * (o(n2x) + s * (o(n1y) + s * o(n2y)))]
    }
}

/// Computes the localization profile of a two-parameter bilinear symbol at
/// scales `(k1, k2)`: the symbol is cut to the doubled packet supports in
/// rescaled variables, transformed back, and the coefficients are weighted by
/// `prod_j (1 + |n_j|)^m_exp`.
pub fn localized_decay_profile(
    symbol: &Symbol,
    k1: i32,
    k2: i32,
    m_exp: u32,
) -> Result<LocalizedDecayProfile> {
    if symbol.freq_dim() != 2 || symbol.arity() != 2 {
        return Err(Error::ParamOutOfRange(
            "localized decay profile needs a bilinear symbol with 2D arguments".into(),
        ));
    }
    let n_max: i64 = 8;
    let samples = 24usize;
    let s1 = (2.0f64).powi(k1);
    let s2 = (2.0f64).powi(k2);

    // rescaled cutoff windows (doubled supports, plateaus on the base bands)
    let w_low = |u: f64| window(u, -0.5, 0.5, 0.25);
    let w_up = |u: f64| window(u, 0.5, 1.5, 0.25);
    let w_down = |u: f64| window(u, -2.5, 0.5, 0.25);

    let midpoints = |a: f64, b: f64| -> Vec<f64> {
        let h = (b - a) / samples as f64;
        (0..samples).map(|i| a + (i as f64 + 0.5) * h).collect()
    };
    let da = 1.0 / samples as f64; // |box| / samples per unit-length axes
    let a_nodes = midpoints(-0.5, 0.5);
    let b_nodes = midpoints(0.5, 1.5);
    let c_nodes = midpoints(0.5, 1.5);
    let d_nodes = midpoints(-0.5, 0.5);

    let side = (2 * n_max + 1) as usize;
    let shift = |i: usize| (i as i64 - n_max) as f64;

    // stage 1: transform over (a, b) for each (c, d)
    let mut stage1 = vec![Complex64::default(); side * side * samples * samples];
    let mut freq = [0.0f64; 4];
    for (ci, &c) in c_nodes.iter().enumerate() {
        for (di, &d) in d_nodes.iter().enumerate() {
            for &a in a_nodes.iter() {
                for &b in b_nodes.iter() {
                    // args: (xi1, xi2) = (s1 a, s2 c), (eta1, eta2) = (s1 b, s2 d)
                    freq[0] = s1 * a;
                    freq[1] = s2 * c;
                    freq[2] = s1 * b;
                    freq[3] = s2 * d;
                    let g = symbol.eval(&freq)
                        * (w_low(a) * w_up(b) * w_up(c) * w_low(d));
                    if g.norm_sqr() == 0.0 {
                        continue;
                    }
                    for n1 in 0..side {
                        let pa = Complex64::from_polar(1.0, 2.0 * PI * a * shift(n1));
                        for n2 in 0..side {
                            let pb = Complex64::from_polar(1.0, 2.0 * PI * b * shift(n2));
                            stage1[n1 + side * (n2 + side * (ci + samples * di))] += g * pa * pb;
                        }
                    }
                }
            }
        }
    }
    // stage 2: transform over (c, d)
    let mut pair = vec![Complex64::default(); side * side * side * side];
    for n1x in 0..side {
        for n2x in 0..side {
            for (ci, &c) in c_nodes.iter().enumerate() {
                for (di, &d) in d_nodes.iter().enumerate() {
                    let t = stage1[n1x + side * (n2x + side * (ci + samples * di))];
                    if t.norm_sqr() == 0.0 {
                        continue;
                    }
                    for n1y in 0..side {
                        let pc = Complex64::from_polar(1.0, 2.0 * PI * c * shift(n1y));
                        for n2y in 0..side {
                            let pd = Complex64::from_polar(1.0, 2.0 * PI * d * shift(n2y));
                            pair[n1x + side * (n2x + side * (n1y + side * n2y))] += t * pc * pd;
                        }
                    }
                }
            }
        }
    }
    let vol = da * da * da * da;
    let pair_magnitudes: Vec<f64> = pair.iter().map(|z| z.norm() * vol).collect();

    // third-packet factors per axis
    let e_nodes = midpoints(-2.5, 0.5);
    let de = 3.0 / samples as f64;
    let third = |nodes: &[f64], step: f64| -> Vec<f64> {
        (0..side)
            .map(|ni| {
                let n = shift(ni);
                let mut s = Complex64::default();
                for &e in nodes {
                    s += Complex64::from_polar(w_down(e), 2.0 * PI * e * n);
                }
                (s * step).norm()
            })
            .collect()
    };
    let third_x = third(&e_nodes, de);
    let third_y = third(&e_nodes, de);

    // weighted sup, factorized over the pair table and the third factors
    let weight = |nx: f64, ny: f64| (1.0 + nx.hypot(ny)).powi(m_exp as i32);
    let mut pair_sup = 0.0f64;
    let mut underflow = false;
    for n1x in 0..side {
        for n2x in 0..side {
            for n1y in 0..side {
                for n2y in 0..side {
                    let mag = pair_magnitudes[n1x + side * (n2x + side * (n1y + side * n2y))];
                    let w = weight(shift(n1x), shift(n1y)) * weight(shift(n2x), shift(n2y));
                    if mag == 0.0 && w > 1e12 {
                        underflow = true;
                    }
                    pair_sup = pair_sup.max(mag * w);
                }
            }
        }
    }
    let mut third_sup = 0.0f64;
    for nx in 0..side {
        for ny in 0..side {
            let v = third_x[nx] * third_y[ny] * weight(shift(nx), shift(ny));
            third_sup = third_sup.max(v);
        }
    }

    Ok(LocalizedDecayProfile {
        n_max,
        pair_magnitudes,
        third_x,
        third_y,
        weighted_sup: pair_sup * third_sup,
        underflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_one() {
        let m = build_symbol("identity", &SymbolParams::default()).unwrap();
        assert_eq!(m.eval(&[0.3, -2.0, 5.0, 1.0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn sgn_sgn_table() {
        let m = build_symbol("sgn_sgn", &SymbolParams::default()).unwrap();
        // xi1 - xi2 > 0, eta1 - eta2 < 0 -> -1
        let v = m.eval(&[2.0, 0.0, 1.0, 3.0]);
        assert_eq!(v, Complex64::new(-1.0, 0.0));
        assert_eq!(m.eval(&[1.0, 1.0, 1.0, 0.0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sgn_sgn_odd_under_first_coordinate_swap() {
        let m = build_symbol("sgn_sgn", &SymbolParams::default()).unwrap();
        for (a, b, c, d) in [(1.0, 2.0, -0.5, 0.25), (-3.0, 0.1, 0.2, -0.7), (0.4, -0.4, 1.0, 2.0)] {
            let v1 = m.eval(&[a, c, b, d]);
            let v2 = m.eval(&[b, c, a, d]);
            assert_eq!(v1, -v2);
        }
    }

    #[test]
    fn unknown_symbol_rejected() {
        assert!(build_symbol("nope", &SymbolParams::default()).is_err());
    }

    #[test]
    fn cone_restricted_equals_base_inside_and_zero_outside() {
        let m = build_symbol("cone_restricted", &SymbolParams::default()).unwrap();
        // deep inside: first plane point on the vertical axis, second plane on
        // the horizontal axis
        let v = m.eval(&[0.0, 5.0, 3.0, 0.0]);
        assert!((v.re - 1.0).abs() < 1e-14, "got {}", v.re);
        // far outside the doubled sectors
        let v0 = m.eval(&[5.0, 5.0, -3.0, 0.0]);
        assert_eq!(v0.re, 0.0);
    }

    #[test]
    fn identity_decay_constants_vanish() {
        let m = build_symbol("identity", &SymbolParams::default()).unwrap();
        let rep = verify_decay(&m, DecayMode::TwoParam, 2, &DecayConfig::default()).unwrap();
        for c in &rep.worst_constant {
            assert_eq!(*c, 0.0);
        }
        assert!(rep.all_pass());
    }

    #[test]
    fn jump_symbol_fails_first_order() {
        let eval: EvalFn = Arc::new(|f: &[f64]| Complex64::new(sgn(f[0] + f[1]), 0.0));
        let m = Symbol::new("sgn_sum", 2, 1, eval, Structure::General);
        let rep = verify_decay(&m, DecayMode::OneParam, 1, &DecayConfig::default()).unwrap();
        assert!(!rep.all_pass());
        let c = rep.worst_constant.iter().cloned().fold(0.0, f64::max);
        assert!(c > rep.threshold, "difference quotient should blow up, got {}", c);
    }

    #[test]
    fn tensor_of_smooth_passes_two_param() {
        let m = build_symbol("two_param_tensor", &SymbolParams::default()).unwrap();
        let one = build_symbol("one_param_cm_demo", &SymbolParams::default()).unwrap();
        let rep1 = verify_decay(&one, DecayMode::OneParam, 2, &DecayConfig::default()).unwrap();
        assert!(rep1.all_pass(), "constants {:?}", rep1.worst_constant);
        let rep2 = verify_decay(&m, DecayMode::TwoParam, 2, &DecayConfig::default()).unwrap();
        assert!(rep2.all_pass(), "constants {:?}", rep2.worst_constant);
    }

    #[test]
    fn decay_is_monotone_in_max_order() {
        let m = build_symbol("one_param_cm_demo", &SymbolParams::default()).unwrap();
        let r2 = verify_decay(&m, DecayMode::OneParam, 2, &DecayConfig::default()).unwrap();
        let r3 = verify_decay(&m, DecayMode::OneParam, 3, &DecayConfig::default()).unwrap();
        for (o, c) in r2.orders_tested.iter().zip(&r2.worst_constant) {
            let j = r3.orders_tested.iter().position(|x| x == o).unwrap();
            assert_eq!(*c, r3.worst_constant[j]);
        }
    }

    #[test]
    fn refinement_guard() {
        let m = build_symbol("identity", &SymbolParams::default()).unwrap();
        let cfg = DecayConfig { extent: 8.0, points_per_axis: 9, fd_step: 1.1, threshold: 1e3 };
        // exclusion 8.8 > extent
        assert!(verify_decay(&m, DecayMode::OneParam, 1, &cfg).is_err());
    }

    #[test]
    fn cone_partition_sums_to_one() {
        let cones = cone_partition(Plane::First, 8).unwrap();
        for &(a, b) in &[(1.0, 0.0), (0.3, -2.0), (-5.0, 5.0), (0.0, 1.0), (-1.0, -1.0)] {
            let s = cones.sum_at(a, b);
            assert!((s - 1.0).abs() <= 1e-14, "sum at ({}, {}) = {}", a, b, s);
        }
        // spine cutoff vanishes on the horizontal axis
        assert_eq!(cones.spine_cutoff().eval(10.0, 0.0), 0.0);
    }

    #[test]
    fn cone_overlap_bounded_by_two() {
        let cones = cone_partition(Plane::Second, 8).unwrap();
        for i in 0..200 {
            let t = i as f64 / 200.0 * 2.0 * PI;
            let (a, b) = (t.cos(), t.sin());
            let active = cones.cutoffs().iter().filter(|c| c.eval(a, b) > 0.0).count();
            assert!(active <= 2, "angle {} has {} active cones", t, active);
        }
    }

    #[test]
    fn cone_homogeneity() {
        let cones = cone_partition(Plane::First, 8).unwrap();
        let c = cones.spine_cutoff();
        for i in 0..50 {
            let t = i as f64 / 50.0 * 2.0 * PI;
            let v1 = c.eval(t.cos(), t.sin());
            let v2 = c.eval(7.25 * t.cos(), 7.25 * t.sin());
            assert!((v1 - v2).abs() <= 1e-12);
        }
    }

    #[test]
    fn localized_profile_of_identity_bounded() {
        let m = build_symbol("identity", &SymbolParams::default()).unwrap();
        let p = localized_decay_profile(&m, 0, 0, 4).unwrap();
        assert!(p.weighted_sup.is_finite());
        assert!(p.weighted_sup > 0.0);
        // scale invariance: identical profile after a simultaneous scale shift
        let q = localized_decay_profile(&m, 1, 1, 4).unwrap();
        let rel = (p.weighted_sup - q.weighted_sup).abs() / p.weighted_sup;
        assert!(rel <= 1e-10, "rel={}", rel);
    }

    #[test]
    fn localized_profile_of_zero_symbol() {
        let zero: EvalFn = Arc::new(|_| Complex64::default());
        let m = Symbol::new("zero", 2, 2, zero, Structure::General);
        let p = localized_decay_profile(&m, 0, 0, 4).unwrap();
        assert_eq!(p.weighted_sup, 0.0);
        assert!(p.pair_magnitudes.iter().all(|&v| v == 0.0));
    }
}
