//! Adaptive Gauss–Kronrod integration on the half-line and on radial
//! products F × F, with tail certification and shell growth estimation.
//!
//! Half-line integrals run in the logarithmic variable u = ln s. A core
//! window of u is cut into linear pieces; breakpoints are approached through
//! the map u = p + (q − p)e^ξ, which turns |s − s₀|^α endpoint behaviour
//! (α > −1) into exponential decay in ξ; the two ends of the line are reached
//! through u = u₀ ± S(e^w − 1). Open ends of those maps are closed off by
//! extrapolating the local exponential rate of the density. A density that
//! does not decay there makes the result non-convergent.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldTag;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Largest |ln s| reached by the tail maps.
    pub tail_cut: f64,
    /// Evaluation budget of a single one-dimensional integral.
    pub max_evals: usize,
    /// Multiplier on the initial panel widths; larger is coarser.
    #[serde(default = "one")]
    pub panel_scale: f64,
    #[serde(default)]
    pub rule: KronrodRule,
    /// Breakpoints only split the range; the integrand is smooth across them.
    #[serde(default)]
    pub soft_breaks: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-7,
            abs_tol: 1e-12,
            max_depth: 40,
            tail_cut: 1e12,
            max_evals: 200_000,
            panel_scale: 1.0,
            rule: KronrodRule::G10K21,
            soft_breaks: false,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.tail_cut > 1.0 && self.panel_scale > 0.0) {
            return Err(Error::InvalidInput(format!("bad quadrature config {self:?}")));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }

    /// For integrands without singular points.
    pub fn smooth(&self) -> QuadConfig {
        QuadConfig {
            soft_breaks: true,
            ..*self
        }
    }

    /// The outer share of the error budget of a nested integral.
    pub fn outer(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: 0.9 * self.rel_tol,
            ..*self
        }
    }

    pub fn inner(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: 0.1 * self.rel_tol,
            abs_tol: f64::MIN_POSITIVE,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl QuadResult {
    fn divergent(value: f64, evaluations: usize) -> Self {
        QuadResult {
            value,
            err_est: f64::INFINITY,
            converged: false,
            evaluations,
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            self.err_est
        } else {
            self.err_est / self.value.abs()
        }
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980463470,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

struct Rule {
    value: f64,
    err: f64,
    finite: bool,
}

const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for XGK15[1], XGK15[3], XGK15[5] and the centre.
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss–Kronrod pair used on every subinterval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KronrodRule {
    /// 7-point Gauss, 15-point Kronrod.
    G7K15,
    /// 10-point Gauss, 21-point Kronrod.
    #[default]
    G10K21,
}

fn gk(rule: KronrodRule, d: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Rule {
    match rule {
        KronrodRule::G7K15 => gk_pair(d, a, b, &XGK15, &WGK15, &WG7[..3], WG7[3]),
        KronrodRule::G10K21 => gk_pair(d, a, b, &XGK, &WGK, &WG, 0.0),
    }
}

/// Kronrod nodes `xgk` (centre last); the Gauss nodes are the odd entries.
fn gk_pair(d: &dyn Fn(f64) -> f64, a: f64, b: f64, xgk: &[f64], wgk: &[f64], wg: &[f64], wg_centre: f64) -> Rule {
    let n = xgk.len() - 1;
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = d(c);
    let mut resk = wgk[n] * fc;
    let mut resg = wg_centre * fc;
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 10];
    for k in 0..n {
        let dx = h * xgk[k];
        let f1 = d(c - dx);
        let f2 = d(c + dx);
        fv[k] = (f1, f2);
        resk += wgk[k] * (f1 + f2);
        resabs += wgk[k] * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            resg += wg[k / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = wgk[n] * (fc - mean).abs();
    for k in 0..n {
        resasc += wgk[k] * ((fv[k].0 - mean).abs() + (fv[k].1 - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * h, resabs * h.abs(), resasc * h.abs());
    let mut err = (resk - resg * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Rule {
        value: resk,
        err,
        finite: resk.is_finite() && err.is_finite(),
    }
}

/// Map from a piece parameter x to the integration variable u.
#[derive(Clone, Copy, Debug)]
enum Map {
    Linear,
    /// u = p + (q − p)e^x, x ≤ 0; the open end is at the low end.
    Approach { p: f64, q: f64 },
    /// u = u0 + dir·scale·(e^x − 1), x ≥ 0; the open end is at the high end.
    Tail { u0: f64, scale: f64, dir: f64 },
    /// As `Tail` but closed at both ends; spans long finite stretches.
    Bridge { u0: f64, scale: f64, dir: f64 },
}

impl Map {
    fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Map::Linear => (x, 1.0),
            Map::Approach { p, q } => {
                let e = x.exp();
                (p + (q - p) * e, (q - p).abs() * e)
            }
            Map::Tail { u0, scale, dir } | Map::Bridge { u0, scale, dir } => {
                let e = x.exp();
                (u0 + dir * scale * (e - 1.0), scale * e)
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    map: Map,
    lo: f64,
    hi: f64,
    width: f64,
}

/// Depth of an approach map towards p from q: stop where |u − p| reaches a
/// few ulps of e^u.
/// The open end's residual estimate covers what lies beyond, so looser
/// tolerances stop earlier.
fn approach_depth(p: f64, q: f64, rel_tol: f64) -> f64 {
    (4e-15 * p.abs().max(1.0) / (q - p).abs()).ln().max(rel_tol.ln() - 8.0).min(-1.0)
}

#[derive(Debug)]
struct Cell1 {
    piece: usize,
    a: f64,
    b: f64,
    depth: u32,
    value: f64,
    err: f64,
}

impl PartialEq for Cell1 {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Cell1 {}
impl PartialOrd for Cell1 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell1 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

struct Outcome {
    result: QuadResult,
    /// u-locations of subintervals that hit the depth limit.
    stuck: Vec<f64>,
}

/// Residual beyond an open end at x_e, given the inward direction, with an
/// error taken from two independent rate estimates.
fn open_end_residual(d: &dyn Fn(f64) -> f64, x_e: f64, inward: f64) -> (f64, f64, bool) {
    let de = d(x_e);
    if de == 0.0 {
        return (0.0, 0.0, true);
    }
    let d1 = d(x_e + inward);
    let d2 = d(x_e + 2.0 * inward);
    if !de.is_finite() || !d1.is_finite() || !d2.is_finite() {
        return (f64::INFINITY, f64::INFINITY, false);
    }
    let l1 = (d1.abs() / de.abs()).ln();
    let l2 = (d2.abs() / d1.abs()).ln();
    if l1 > 0.1 && l2 > 0.1 {
        let r = de / l1;
        let alt = de / l2;
        (r, (r - alt).abs() + 1e-3 * r.abs(), true)
    } else {
        (f64::INFINITY, f64::INFINITY, false)
    }
}

/// `u_noise` is the magnitude of any other log-scale quantity the integrand
/// is computed from; it sets the roundoff floor together with |u|.
fn run_pieces(h: &dyn Fn(f64) -> f64, pieces: &[Piece], cfg: &QuadConfig, u_noise: f64) -> Outcome {
    let evals = Cell::new(0usize);
    let dens: Vec<Box<dyn Fn(f64) -> f64 + '_>> = pieces
        .iter()
        .map(|p| {
            let map = p.map;
            let evals = &evals;
            Box::new(move |x: f64| {
                evals.set(evals.get() + 1);
                let (u, j) = map.eval(x);
                let v = h(u);
                if v == 0.0 {
                    0.0
                } else {
                    v * j
                }
            }) as Box<dyn Fn(f64) -> f64>
        })
        .collect();

    let mut ok = true;
    let mut residual = 0.0;
    let mut residual_err = 0.0;
    for (i, p) in pieces.iter().enumerate() {
        let end = match p.map {
            Map::Approach { .. } => Some((p.lo, 1.0)),
            Map::Tail { .. } => Some((p.hi, -1.0)),
            Map::Linear | Map::Bridge { .. } => None,
        };
        if let Some((xe, inward)) = end {
            let (r, e, good) = open_end_residual(&*dens[i], xe, inward);
            if good {
                residual += r;
                residual_err += e;
            } else {
                ok = false;
                residual_err = f64::INFINITY;
            }
        }
    }

    let mut heap = BinaryHeap::new();
    let mut total = residual;
    let mut err = residual_err;
    let mut blown = false;
    for (i, p) in pieces.iter().enumerate() {
        let n = ((p.hi - p.lo) / (p.width * cfg.panel_scale)).ceil().max(1.0) as usize;
        let step = (p.hi - p.lo) / n as f64;
        for k in 0..n {
            let a = p.lo + step * k as f64;
            let b = if k + 1 == n { p.hi } else { a + step };
            let r = gk(cfg.rule, &*dens[i], a, b);
            if !r.finite {
                blown = true;
                continue;
            }
            total += r.value;
            err += r.err;
            heap.push(Cell1 {
                piece: i,
                a,
                b,
                depth: 0,
                value: r.value,
                err: r.err,
            });
        }
    }

    let mut frozen: Vec<Cell1> = Vec::new();
    let mut noisy: Vec<Cell1> = Vec::new();
    if !blown {
        while err > cfg.target(total) && evals.get() < cfg.max_evals {
            let Some(c) = heap.pop() else { break };
            if c.depth >= cfg.max_depth {
                frozen.push(c);
                continue;
            }
            // At large |u| the integrand itself carries roundoff of order
            // ulp(u); cells already at that floor are not refined further.
            let (ua, _) = pieces[c.piece].map.eval(c.a);
            let (ub, _) = pieces[c.piece].map.eval(c.b);
            let floor = c.value.abs() * 8.0 * f64::EPSILON * (1.0 + ua.abs().max(ub.abs()).max(u_noise));
            if c.err <= floor && floor > 1e-3 * cfg.target(total) {
                err -= c.err;
                noisy.push(c);
                continue;
            }
            let m = 0.5 * (c.a + c.b);
            let left = gk(cfg.rule, &*dens[c.piece], c.a, m);
            let right = gk(cfg.rule, &*dens[c.piece], m, c.b);
            if !left.finite || !right.finite {
                blown = true;
                break;
            }
            total += left.value + right.value - c.value;
            err += left.err + right.err - c.err;
            for (a, b, r) in [(c.a, m, left), (m, c.b, right)] {
                heap.push(Cell1 {
                    piece: c.piece,
                    a,
                    b,
                    depth: c.depth + 1,
                    value: r.value,
                    err: r.err,
                });
            }
        }
    }

    // Resum to avoid drift from the running updates.
    let mut cells: Vec<&Cell1> = heap.iter().chain(frozen.iter()).chain(noisy.iter()).collect();
    cells.sort_by(|x, y| (x.piece, x.a).partial_cmp(&(y.piece, y.a)).unwrap_or(Ordering::Equal));
    let value = residual + cells.iter().map(|c| c.value).sum::<f64>();
    // roundoff-limited cells are excluded from the estimate
    let err = residual_err + heap.iter().chain(frozen.iter()).map(|c| c.err).sum::<f64>();
    let stuck = frozen
        .iter()
        .filter(|c| matches!(pieces[c.piece].map, Map::Linear))
        .map(|c| 0.5 * (c.a + c.b))
        .collect();
    if blown {
        return Outcome {
            result: QuadResult::divergent(value, evals.get()),
            stuck: Vec::new(),
        };
    }
    Outcome {
        result: QuadResult {
            value,
            err_est: err,
            converged: ok && err <= cfg.target(value),
            evaluations: evals.get(),
        },
        stuck,
    }
}

/// Linear stretches longer than this are covered by graded bridges.
const FAR_GAP: f64 = 24.0;

/// Pieces covering [lo, hi] in u with singular points `sing` (sorted, inside),
/// approached by exponential maps from both sides.
fn window_pieces(lo: f64, hi: f64, sing: &[f64], lo_sing: bool, hi_sing: bool, cfg: &QuadConfig, out: &mut Vec<Piece>) {
    let rel_tol = cfg.rel_tol;
    let hard = !cfg.soft_breaks;
    let mut pts = vec![lo];
    pts.extend(sing.iter().copied().filter(|&s| s > lo && s < hi));
    pts.push(hi);
    let n = pts.len();
    for k in 0..n - 1 {
        let (a, b) = (pts[k], pts[k + 1]);
        let sa = if k == 0 { lo_sing } else { hard };
        let sb = if k + 2 == n { hi_sing } else { hard };
        let m = 0.5 * (a + b);
        let (la, lb) = (if sa { m } else { a }, if sb { m } else { b });
        if sa {
            out.push(Piece {
                map: Map::Approach { p: a, q: m },
                lo: approach_depth(a, m, rel_tol),
                hi: 0.0,
                width: 5.0,
            });
        }
        if lb - la > FAR_GAP {
            // two halves, each graded towards its own end
            let mid = 0.5 * (la + lb);
            for (u0, dir) in [(la, 1.0), (lb, -1.0)] {
                out.push(Piece {
                    map: Map::Bridge { u0, scale: 4.0, dir },
                    lo: 0.0,
                    hi: (1.0 + (mid - u0).abs() / 4.0).ln(),
                    width: 1.0,
                });
            }
        } else if la < lb {
            out.push(Piece {
                map: Map::Linear,
                lo: la,
                hi: lb,
                width: 1.5,
            });
        }
        if sb {
            out.push(Piece {
                map: Map::Approach { p: b, q: m },
                lo: approach_depth(b, m, rel_tol),
                hi: 0.0,
                width: 5.0,
            });
        }
    }
}

/// Integrate a density on a u-interval, with optional infinite ends.
fn integrate_u(
    h: &dyn Fn(f64) -> f64,
    lo: Option<f64>,
    hi: Option<f64>,
    sing: &[f64],
    u_limit: f64,
    cfg: &QuadConfig,
) -> QuadResult {
    integrate_u_noisy(h, lo, hi, sing, u_limit, 0.0, cfg)
}

fn integrate_u_noisy(
    h: &dyn Fn(f64) -> f64,
    lo: Option<f64>,
    hi: Option<f64>,
    sing: &[f64],
    u_limit: f64,
    u_noise: f64,
    cfg: &QuadConfig,
) -> QuadResult {
    let mut sing: Vec<f64> = sing.iter().copied().filter(|s| s.is_finite()).collect();
    sing.sort_by(f64::total_cmp);
    sing.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let smin = sing.first().copied().unwrap_or(0.0);
    let smax = sing.last().copied().unwrap_or(0.0);
    let core_lo = lo.unwrap_or((smin - 2.0).min(-8.0).min(hi.unwrap_or(0.0) - 2.0));
    let core_hi = hi.unwrap_or((smax + 2.0).max(8.0).max(lo.unwrap_or(0.0) + 2.0));
    let mut evaluations = 0;
    let mut extra: Vec<f64> = Vec::new();
    let mut last = None;
    for _attempt in 0..3 {
        let mut all: Vec<f64> = sing.iter().chain(extra.iter()).copied().collect();
        all.sort_by(f64::total_cmp);
        let lo_sing = lo.is_some_and(|l| sing.iter().any(|s| (s - l).abs() < 1e-12));
        let hi_sing = hi.is_some_and(|l| sing.iter().any(|s| (s - l).abs() < 1e-12));
        let mut pieces = Vec::new();
        window_pieces(core_lo, core_hi, &all, lo_sing, hi_sing, cfg, &mut pieces);
        let scale = |u0: f64| u0.abs().max(4.0);
        if lo.is_none() {
            let w = (1.0 + (u_limit - core_lo.abs()).max(1.0) / scale(core_lo)).ln();
            pieces.push(Piece {
                map: Map::Tail {
                    u0: core_lo,
                    scale: scale(core_lo),
                    dir: -1.0,
                },
                lo: 0.0,
                hi: w,
                width: 2.0,
            });
        }
        if hi.is_none() {
            let w = (1.0 + (u_limit - core_hi.abs()).max(1.0) / scale(core_hi)).ln();
            pieces.push(Piece {
                map: Map::Tail {
                    u0: core_hi,
                    scale: scale(core_hi),
                    dir: 1.0,
                },
                lo: 0.0,
                hi: w,
                width: 2.0,
            });
        }
        let out = run_pieces(h, &pieces, cfg, u_noise);
        evaluations += out.result.evaluations;
        let done = out.result.converged || out.stuck.is_empty();
        let mut res = out.result;
        res.evaluations = evaluations;
        last = Some(res);
        if done {
            break;
        }
        // Treat locations where bisection stalled as singular points.
        let mut stuck = out.stuck;
        stuck.sort_by(f64::total_cmp);
        for s in stuck {
            if !extra.iter().chain(sing.iter()).any(|e| (e - s).abs() < 1e-9 * (1.0 + s.abs())) {
                extra.push(s);
            }
        }
    }
    last.expect("at least one attempt")
}

/// ∫ₐᵇ f(x) dx on a finite interval.
pub fn integrate_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            err_est: 0.0,
            converged: true,
            evaluations: 0,
        };
    }
    let (sgn, a, b) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let width = (b - a) / 8.0;
    let pieces = [Piece {
        map: Map::Linear,
        lo: a,
        hi: b,
        width,
    }];
    let mut r = run_pieces(&f, &pieces, cfg, 0.0).result;
    r.value *= sgn;
    r
}

/// ∫₀^∞ f(s) ds.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, cfg: &QuadConfig) -> QuadResult {
    integrate_half_line_with(f, &[], cfg)
}

/// ∫₀^∞ f(s) ds with known singular or kink points `breaks` (s > 0).
///
/// The integrand is sampled for s up to e^700; beyond that the tail is
/// extrapolated. Use [`integrate_half_line_ln`] for integrands with
/// logarithmic decay.
pub fn integrate_half_line_with(f: impl Fn(f64) -> f64, breaks: &[f64], cfg: &QuadConfig) -> QuadResult {
    let h = |u: f64| {
        let s = u.exp();
        let v = f(s);
        if v == 0.0 {
            0.0
        } else {
            v * s
        }
    };
    let sing: Vec<f64> = breaks.iter().filter(|b| **b > 0.0).map(|b| b.ln()).collect();
    integrate_u(&h, None, None, &sing, cfg.tail_cut.min(700.0), cfg)
}

/// ∫₀^∞ exp(ln_f(ln s)) ds for a positive integrand given in log form.
pub fn integrate_half_line_ln(ln_f: impl Fn(f64) -> f64, breaks: &[f64], cfg: &QuadConfig) -> QuadResult {
    let h = |u: f64| (ln_f(u) + u).exp();
    let sing: Vec<f64> = breaks.iter().filter(|b| **b > 0.0).map(|b| b.ln()).collect();
    integrate_u(&h, None, None, &sing, cfg.tail_cut, cfg)
}

/// ∫₀^upper exp(ln_f(ln s)) ds.
pub fn integrate_half_line_ln_upto(
    ln_f: impl Fn(f64) -> f64,
    breaks: &[f64],
    upper: f64,
    cfg: &QuadConfig,
) -> QuadResult {
    let h = |u: f64| (ln_f(u) + u).exp();
    let top = upper.ln();
    let sing: Vec<f64> = breaks
        .iter()
        .filter(|b| **b > 0.0 && b.ln() < top)
        .map(|b| b.ln())
        .collect();
    integrate_u(&h, None, Some(top), &sing, cfg.tail_cut, cfg)
}

/// ∫₀^{e^{ln_upper}} exp(ln_f(ln s)) ds with singular points given as ln s.
pub fn integrate_half_line_ln_below(
    ln_f: impl Fn(f64) -> f64,
    ln_breaks: &[f64],
    ln_upper: f64,
    cfg: &QuadConfig,
) -> QuadResult {
    let h = |u: f64| (ln_f(u) + u).exp();
    let sing: Vec<f64> = ln_breaks.iter().copied().filter(|b| *b < ln_upper).collect();
    integrate_u(&h, None, Some(ln_upper), &sing, cfg.tail_cut, cfg)
}

fn max_finite(vals: impl IntoIterator<Item = f64>) -> f64 {
    let m = vals
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if m.is_finite() {
        m
    } else {
        0.0
    }
}

fn add_results(parts: &[QuadResult]) -> QuadResult {
    QuadResult {
        value: parts.iter().map(|p| p.value).sum(),
        err_est: parts.iter().map(|p| p.err_est).sum(),
        converged: parts.iter().all(|p| p.converged),
        evaluations: parts.iter().map(|p| p.evaluations).sum(),
    }
}

/// Per-piece scales of exp(f(u) + u) for the ridge split, sampled where the
/// mass sits.
fn ridge_shifts(ln_f: &dyn Fn(f64, f64) -> f64, lz0: f64) -> [f64; 4] {
    use crate::phi::{ln_abs_diff_exp, log_sum_exp};
    let lhalf = lz0 - std::f64::consts::LN_2;
    let ln2z0 = lz0 + std::f64::consts::LN_2;
    let low = |lz: f64| ln_f(lz, ln_abs_diff_exp(2.0 * lz0, 2.0 * lz));
    let mid = |ld: f64| {
        let lz = ln_abs_diff_exp(lz0, ld);
        ln_f(lz, ld + log_sum_exp(&[lz0, lz]))
    };
    let high = |ld: f64| ln_f(log_sum_exp(&[lz0, ld]), ld + log_sum_exp(&[ln2z0, ld]));
    let far = |lz: f64| ln_f(lz, ln_abs_diff_exp(2.0 * lz, 2.0 * lz0));
    [
        max_finite([0.0, -2.0, -4.0, -8.0].map(|d| low(lhalf + d) + lhalf + d)),
        max_finite([-2.0f64, 0.0, 2.0, lhalf - 1.0].map(|u| mid(u.min(lhalf)) + u.min(lhalf))),
        max_finite([-2.0f64, 0.0, 2.0, lz0 - 1.0].map(|u| high(u.min(lz0)) + u.min(lz0))),
        max_finite([0.0, 2.0, 4.0, 8.0].map(|d| far(ln2z0 + d) + ln2z0 + d)),
    ]
}

/// Rough ln of the integral [`integrate_about_ridge_ln`] computes, from a
/// few samples.
pub fn ridge_scale(ln_f: impl Fn(f64, f64) -> f64, lz0: f64) -> f64 {
    ridge_shifts(&ln_f, lz0).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// ∫₀^∞ exp(ln_f(ln z, ln|z₀² − z²|)) dz around a ridge at z₀ = e^{lz0}.
///
/// The range is split at z₀/2, z₀ and 2z₀; the two pieces next to z₀ use the
/// offset |z − z₀| on a log scale, so features of unit width stay resolved
/// for any z₀. Extra singular points of the integrand below z₀ are passed as
/// ln z. The result is scaled by e^{−shift}; the shift is returned alongside.
pub fn integrate_about_ridge_ln(
    ln_f: impl Fn(f64, f64) -> f64,
    lz0: f64,
    ln_breaks: &[f64],
    cfg: &QuadConfig,
) -> (QuadResult, f64) {
    use crate::phi::{ln_abs_diff_exp, log_sum_exp};
    let lhalf = lz0 - std::f64::consts::LN_2;
    let ln2z0 = lz0 + std::f64::consts::LN_2;
    let low = |lz: f64| ln_f(lz, ln_abs_diff_exp(2.0 * lz0, 2.0 * lz));
    let mid = |ld: f64| {
        let lz = ln_abs_diff_exp(lz0, ld);
        ln_f(lz, ld + log_sum_exp(&[lz0, lz]))
    };
    let high = |ld: f64| ln_f(log_sum_exp(&[lz0, ld]), ld + log_sum_exp(&[ln2z0, ld]));
    let far = |lz: f64| ln_f(lz, ln_abs_diff_exp(2.0 * lz, 2.0 * lz0));
    let [sh_low, sh_mid, sh_high, sh_far] = ridge_shifts(&ln_f, lz0);
    let shift = sh_low.max(sh_mid).max(sh_high).max(sh_far);
    let low_breaks: Vec<f64> = ln_breaks.iter().copied().filter(|b| *b < lhalf).collect();
    let mid_breaks: Vec<f64> = ln_breaks
        .iter()
        .filter(|b| **b >= lhalf && **b < lz0)
        .map(|b| ln_abs_diff_exp(lz0, *b))
        .collect();
    let scaled = |mut r: QuadResult, sh: f64| {
        let f = (sh - shift).exp();
        r.value *= f;
        r.err_est *= f;
        r
    };
    let noise = lz0.abs();
    let below = |g: &dyn Fn(f64) -> f64, breaks: &[f64], top: f64| {
        let sing: Vec<f64> = breaks.iter().copied().filter(|b| *b < top).collect();
        integrate_u_noisy(&|u: f64| (g(u) + u).exp(), None, Some(top), &sing, cfg.tail_cut, noise, cfg)
    };
    let parts = [
        scaled(below(&|u| low(u) - sh_low, &low_breaks, lhalf), sh_low),
        scaled(below(&|u| mid(u) - sh_mid, &mid_breaks, lhalf), sh_mid),
        scaled(below(&|u| high(u) - sh_high, &[], lz0), sh_high),
        scaled(
            integrate_u_noisy(
                &|u: f64| (far(u) - sh_far + u).exp(),
                Some(ln2z0),
                None,
                &[],
                cfg.tail_cut.max(100.0 * ln2z0.abs()),
                noise,
                cfg,
            ),
            sh_far,
        ),
    ];
    let mut total = add_results(&parts);
    total.converged = total.err_est.is_finite() && total.err_est <= cfg.target(total.value);
    (total, shift)
}

/// ∫₀^∞ e^{shift(x)}·I(x) dx over ln x, where `inner(ln x, cfg)` returns
/// (I(x), shift(x)) computed with the nested configuration.
pub fn integrate_outer_ln(
    inner: impl Fn(f64, &QuadConfig) -> (QuadResult, f64),
    outer_breaks: &[f64],
    cfg: &QuadConfig,
) -> QuadResult {
    integrate_outer_ln_scaled(inner, |_| f64::INFINITY, outer_breaks, cfg)
}

/// As [`integrate_outer_ln`]; `scale(ln x)` is a cheap estimate of
/// ln(e^{shift}·I) used to skip slices far below the largest one seen.
pub fn integrate_outer_ln_scaled(
    inner: impl Fn(f64, &QuadConfig) -> (QuadResult, f64),
    scale: impl Fn(f64) -> f64,
    outer_breaks: &[f64],
    cfg: &QuadConfig,
) -> QuadResult {
    let icfg = cfg.inner();
    let inner_evals = Cell::new(0usize);
    let slices = SliceLog::default();
    let margin = skip_margin(cfg);
    let outer = |ux: f64| -> f64 {
        if scale(ux) + ux < slices.best.get() - margin {
            return f64::NEG_INFINITY;
        }
        let (r, shift) = inner(ux, &icfg);
        inner_evals.set(inner_evals.get() + r.evaluations);
        slices.record(&r, shift + ux);
        if r.value > 0.0 {
            r.value.ln() + shift
        } else {
            f64::NEG_INFINITY
        }
    };
    let res = integrate_half_line_ln(outer, outer_breaks, &cfg.outer());
    slices.finish(res, inner_evals.get(), cfg)
}

/// Inner results of a nested integral, each with the ln of its scale factor.
struct SliceLog {
    /// Largest ln contribution of a slice seen so far.
    best: Cell<f64>,
    /// (ln of the slice's contribution or error bound, its relative error)
    entries: std::cell::RefCell<Vec<(f64, f64)>>,
}

impl Default for SliceLog {
    fn default() -> Self {
        SliceLog {
            best: Cell::new(f64::NEG_INFINITY),
            entries: Default::default(),
        }
    }
}

impl SliceLog {
    fn record(&self, r: &QuadResult, ln_scale: f64) {
        let mag = r.value.abs().max(r.err_est);
        let ln_mag = if mag.is_finite() && mag > 0.0 { mag.ln() } else { 0.0 };
        let rel = if r.err_est.is_finite() { r.rel_err() } else { f64::INFINITY };
        if r.value > 0.0 && rel < 0.5 {
            self.best.set(self.best.get().max(r.value.ln() + ln_scale));
        }
        self.entries.borrow_mut().push((ln_mag + ln_scale, rel));
    }

    /// Adds the slices' errors, each weighted by its size against the largest.
    fn finish(&self, mut res: QuadResult, evaluations: usize, cfg: &QuadConfig) -> QuadResult {
        let best = self.best.get();
        let weighted = self
            .entries
            .borrow()
            .iter()
            .map(|&(ln_mag, rel)| {
                let w = (ln_mag - best).exp();
                if w < cfg.rel_tol * 1e-4 {
                    0.0
                } else {
                    rel * w
                }
            })
            .fold(0.0f64, f64::max);
        res.evaluations = evaluations;
        res.err_est += weighted * res.value.abs();
        res.converged = res.converged && res.err_est <= cfg.target(res.value);
        res
    }
}

/// Slices this far below the largest one (in ln) are skipped.
fn skip_margin(cfg: &QuadConfig) -> f64 {
    16.0 - cfg.rel_tol.ln()
}

/// Area of the unit sphere S^{k−1} in F ≅ R^k.
pub fn sphere_area(tag: FieldTag) -> f64 {
    use std::f64::consts::PI;
    match tag {
        FieldTag::R => 2.0,
        FieldTag::C => 2.0 * PI,
        FieldTag::H => 2.0 * PI * PI,
    }
}

/// ln of the radial weight c_k²(ry·rz)^{k−1} at (ln ry, ln rz).
pub fn ln_radial_weight(tag: FieldTag, uy: f64, uz: f64) -> f64 {
    let k = tag.real_dim() as f64;
    2.0 * sphere_area(tag).ln() + (k - 1.0) * (uy + uz)
}

/// ∫∫ exp(ln_w(ln x) + ln_f(ln x, ln z)) dz dx over (0, ∞)², inner
/// variable z. The outer factor is kept out of the inner integrand.
///
/// `inner_breaks(x)` lists singular points of the inner integrand.
pub fn integrate_nested_ln(
    ln_w: impl Fn(f64) -> f64,
    ln_f: impl Fn(f64, f64) -> f64,
    outer_breaks: &[f64],
    inner_breaks: impl Fn(f64) -> Vec<f64>,
    cfg: &QuadConfig,
) -> QuadResult {
    integrate_nested_ln_upto(ln_w, ln_f, outer_breaks, inner_breaks, None, cfg)
}

/// As [`integrate_nested_ln`] over (0, X) × (0, Z) when `upper = Some((X, Z))`.
pub fn integrate_nested_ln_upto(
    ln_w: impl Fn(f64) -> f64,
    ln_f: impl Fn(f64, f64) -> f64,
    outer_breaks: &[f64],
    inner_breaks: impl Fn(f64) -> Vec<f64>,
    upper: Option<(f64, f64)>,
    cfg: &QuadConfig,
) -> QuadResult {
    let icfg = cfg.inner();
    let inner_evals = Cell::new(0usize);
    let slices = SliceLog::default();
    let outer = |ux: f64| -> f64 {
        let x = ux.exp();
        // Factor out the slice scale so the inner integral stays in range.
        let shift = max_finite([-4.0, -2.0, 0.0, 2.0, 4.0, ux - 2.0, ux, ux + 2.0].map(|uz| ln_f(ux, uz) + uz));
        let scale = shift + ln_w(ux) + ux;
        if scale < slices.best.get() - skip_margin(cfg) {
            return f64::NEG_INFINITY;
        }
        let mut breaks: Vec<f64> = inner_breaks(x)
            .into_iter()
            .filter(|b| b.is_finite() && *b > 0.0)
            .map(f64::ln)
            .collect();
        // homogeneous integrands put the slice mass near z ~ x
        if ux.abs() > 8.0 && ux.abs() < icfg.tail_cut {
            breaks.push(ux);
        }
        let h = |uz: f64| (ln_f(ux, uz) - shift + uz).exp();
        let r = match upper {
            None => integrate_u_noisy(&h, None, None, &breaks, icfg.tail_cut, ux.abs(), &icfg),
            Some((_, z)) => {
                let top = z.ln();
                let sing: Vec<f64> = breaks.into_iter().filter(|b| *b < top).collect();
                integrate_u_noisy(&h, None, Some(top), &sing, icfg.tail_cut, ux.abs(), &icfg)
            }
        };
        inner_evals.set(inner_evals.get() + r.evaluations);
        slices.record(&r, scale);
        if r.value > 0.0 {
            r.value.ln() + shift + ln_w(ux)
        } else {
            f64::NEG_INFINITY
        }
    };
    let ocfg = cfg.outer();
    let res = match upper {
        None => integrate_half_line_ln(outer, outer_breaks, &ocfg),
        Some((x, _)) => integrate_half_line_ln_upto(outer, outer_breaks, x, &ocfg),
    };
    slices.finish(res, inner_evals.get(), cfg)
}

/// ∫_{F×F} f(|y|, |z|) dy dz, reduced to radii.
pub fn integrate_radial2(f: impl Fn(f64, f64) -> f64, tag: FieldTag, cfg: &QuadConfig) -> QuadResult {
    integrate_radial2_with(f, tag, &[], cfg)
}

/// As [`integrate_radial2`], with breakpoints shared by both radii.
pub fn integrate_radial2_with(
    f: impl Fn(f64, f64) -> f64,
    tag: FieldTag,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let ln_f = |uy: f64, uz: f64| {
        let v = f(uy.exp(), uz.exp());
        if v > 0.0 {
            v.ln() + k1 * uz
        } else {
            f64::NEG_INFINITY
        }
    };
    integrate_nested_ln(|uy| ln_radial_weight(tag, uy, 0.0), ln_f, breaks, |_| breaks.to_vec(), cfg)
}

/// Log-form radial integral: `ln_f(ry, rz)` is ln f at the radii.
pub fn integrate_radial2_ln(
    ln_f: impl Fn(f64, f64) -> f64,
    tag: FieldTag,
    outer_breaks: &[f64],
    inner_breaks: impl Fn(f64) -> Vec<f64>,
    cfg: &QuadConfig,
) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let g = |uy: f64, uz: f64| ln_f(uy.exp(), uz.exp()) + k1 * uz;
    integrate_nested_ln(|uy| ln_radial_weight(tag, uy, 0.0), g, outer_breaks, inner_breaks, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellGrowth {
    pub shell_edges: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Growth exponent of the partial sums in the outer radius.
    pub fitted_slope: f64,
    pub slope_std_err: f64,
    pub converged: bool,
}

/// Ordinary least squares slope and its standard error.
pub fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let se = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, se, icpt)
}

/// Partial integrals of f·weight over {edges[0] ≤ ry ≤ edges[m], ry < rz < ry + 1}
/// and their growth exponent.
///
/// The exponent is 1 + the log-log slope of the mean shell density
/// ΔS_m/Δe_m against the geometric shell midpoint, fitted over the top half
/// of the shells. For S(R) ~ R^γ this recovers γ, including γ = 0 for
/// logarithmic growth.
pub fn shell_scan(
    ln_f: impl Fn(f64, f64) -> f64 + Sync,
    tag: FieldTag,
    edges: &[f64],
    cfg: &QuadConfig,
) -> Result<ShellGrowth> {
    if edges.len() < 4 || edges[0] < 1.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("shell edges must be increasing, ≥ 1, at least 4".into()));
    }
    let icfg = cfg.inner();
    let k = tag.real_dim() as f64;
    let c2 = sphere_area(tag).powi(2);
    let mut converged = true;
    let mut sums = vec![0.0];
    let mut density = Vec::new();
    for w in edges.windows(2) {
        let inner_ok = Cell::new(true);
        let outer = |ry: f64| {
            let r = integrate_interval(
                |rz| (ln_f(ry, rz) + (k - 1.0) * (ry * rz).ln()).exp(),
                ry,
                ry + 1.0,
                &icfg,
            );
            if !r.converged {
                inner_ok.set(false);
            }
            c2 * r.value
        };
        let r = integrate_interval(outer, w[0], w[1], cfg);
        converged &= r.converged && inner_ok.get();
        if r.value < -cfg.abs_tol {
            return Err(Error::NonMonotone {
                index: sums.len(),
                prev: *sums.last().unwrap(),
                next: sums.last().unwrap() + r.value,
            });
        }
        density.push(r.value / (w[1] - w[0]));
        sums.push(sums.last().unwrap() + r.value);
    }
    let m = density.len();
    let start = m / 2;
    let xs: Vec<f64> = edges.windows(2).skip(start).map(|w| 0.5 * (w[0] * w[1]).ln()).collect();
    let ys: Vec<f64> = density[start..].iter().map(|d| d.ln()).collect();
    let (slope, se, _) = ols_slope(&xs, &ys);
    Ok(ShellGrowth {
        shell_edges: edges.to_vec(),
        partial_sums: sums,
        fitted_slope: 1.0 + slope,
        slope_std_err: se,
        converged,
    })
}

/// Geometric edges from `lo` to `hi`.
pub fn geometric_edges(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kronrod_rule_is_exact_on_polynomials() {
        let mut sum_k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let sum_g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((sum_k - 2.0).abs() < 1e-14 && (sum_g - 2.0).abs() < 1e-14);
        for p in (2..=30).step_by(2) {
            let exact = 2.0 / (p as f64 + 1.0);
            sum_k = 2.0 * (0..10).map(|k| WGK[k] * XGK[k].powi(p)).sum::<f64>();
            assert!((sum_k - exact).abs() < 1e-14, "kronrod degree {p}");
            if p <= 18 {
                let g = 2.0 * (0..5).map(|k| WG[k] * XGK[2 * k + 1].powi(p)).sum::<f64>();
                assert!((g - exact).abs() < 1e-14, "gauss degree {p}");
            }
        }
    }

    #[test]
    fn half_line_references() {
        let r = integrate_half_line(|s| (-s * s).exp(), &cfg());
        assert!(r.converged && rel(r.value, PI.sqrt() / 2.0) < 1e-10);
        let r = integrate_half_line(|s| 1.0 / (1.0 + s * s), &cfg());
        assert!(r.converged && rel(r.value, PI / 2.0) < 1e-10);
    }

    #[test]
    fn sqrt_singularity_at_breakpoint() {
        // ∫₀² |s−1|^{−1/2} ds = 4
        let r = integrate_half_line_with(|s| if s < 2.0 { (s - 1.0).abs().powf(-0.5) } else { 0.0 }, &[1.0, 2.0], &cfg());
        assert!(r.converged && rel(r.value, 4.0) < 1e-9, "{r:?}");
    }

    #[test]
    fn log_decay_tail() {
        // ∫_e^∞ s^{-1} (ln s)^{-3} ds = 1/2
        let r = integrate_half_line_ln(
            |u| if u > 1.0 { -u - 3.0 * u.ln() } else { f64::NEG_INFINITY },
            &[std::f64::consts::E],
            &cfg(),
        );
        assert!(r.converged && rel(r.value, 0.5) < 1e-9, "{r:?}");
    }

    #[test]
    fn divergence_is_a_verdict() {
        let r = integrate_half_line_ln(|u| -0.9 * u - (1.0 + (-2.0 * u).exp()).ln() * 0.0, &[], &cfg());
        assert!(!r.converged);
        let r = integrate_half_line(|s| 1.0 / (1.0 + s), &cfg());
        assert!(!r.converged);
    }

    #[test]
    fn radial_gaussians() {
        for (tag, want) in [(FieldTag::R, PI), (FieldTag::C, PI * PI), (FieldTag::H, PI.powi(4))] {
            let r = integrate_radial2(|y, z| (-y * y - z * z).exp(), tag, &cfg());
            assert!(r.converged && rel(r.value, want) < 1e-8, "{tag}: {r:?}");
        }
    }

    #[test]
    fn ball_volume_identity() {
        for tag in FieldTag::ALL {
            let k = tag.real_dim() as f64;
            let want = (sphere_area(tag) / k).powi(2);
            let r = integrate_radial2_with(
                |y, z| if y < 1.0 && z < 1.0 { 1.0 } else { 0.0 },
                tag,
                &[1.0],
                &cfg(),
            );
            assert!(r.converged && rel(r.value, want) < 1e-9, "{tag}: {r:?}");
        }
    }

    #[test]
    fn shell_scan_on_pure_power() {
        for eps in [0.05, 0.1, 0.15, 1.0 / 6.0] {
            let edges = geometric_edges(1.0, 1e3, 25);
            let g = shell_scan(|ry, _| (-6.0 - 6.0 * eps) * ry.ln(), FieldTag::H, &edges, &cfg()).unwrap();
            assert!((g.fitted_slope - (1.0 - 6.0 * eps)).abs() < 0.02, "{eps}: {}", g.fitted_slope);
            assert!(g.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
