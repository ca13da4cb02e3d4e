//! Radon and Harish-Chandra transforms of Φ-based test functions on the
//! nilradicals N_{Q₁}, N_{Q₃} and N_{P₁}, plus the u = 1 seminorms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldTag, Mat3};
use crate::group::{a_exp, rho, DiagVec, ParabolicId, ParabolicSpec};
use crate::phi::{
    ln_phi_diag, ln_phi_nil_log_with, P1Kernel, LIN_RANGE, ln_phi_oracle, ln_phi_p1_log_with, ln_phi_q3_log, log_sum_exp, softplus,
    SignedLog,
};
use crate::quadrature::{
    integrate_about_ridge_ln, integrate_half_line_ln, integrate_nested_ln, integrate_nested_ln_upto,
    integrate_outer_ln_scaled, ridge_scale, sphere_area, QuadConfig, QuadResult,
};

/// Test functions of Φ alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TestFunction {
    /// Φ^{−1−ε}.
    PhiPower { eps: f64 },
    /// Φ^{−kpow/4}·(ln Φ)^{−r}.
    PhiLogPower { kpow: f64, r: f64 },
}

impl TestFunction {
    /// The canonical majorant for field `tag`.
    pub fn schwartz(tag: FieldTag, r: f64) -> Self {
        TestFunction::PhiLogPower {
            kpow: tag.real_dim() as f64,
            r,
        }
    }

    pub fn ln_eval(&self, ln_phi: f64) -> f64 {
        match *self {
            TestFunction::PhiPower { eps } => -(1.0 + eps) * ln_phi,
            TestFunction::PhiLogPower { kpow, r } => -0.25 * kpow * ln_phi - r * ln_phi.ln(),
        }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.ln_eval(phi.ln()).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub t: DiagVec,
    pub raw: QuadResult,
    /// δ_Q(a_t)·R_Q(a_t).
    pub weighted: f64,
    pub bound: f64,
    pub ratio: f64,
}

fn ln_c(tag: FieldTag) -> f64 {
    sphere_area(tag).ln()
}

fn finite(x: f64) -> Vec<f64> {
    if x.is_finite() && x > 0.0 {
        vec![x]
    } else {
        vec![]
    }
}

/// R_{Q₁}: the inner |z| integral is split around the ridge |z|² = 1 + |y|².
fn radon_q1(t: &DiagVec, tf: &TestFunction, tag: FieldTag, cfg: &QuadConfig) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let lc = ln_c(tag);
    let inner = |uy: f64, icfg: &QuadConfig| {
        let f = |lz: f64, ld: f64| tf.ln_eval(ln_phi_nil_log_with(t, uy, lz, ld)) + k1 * lz;
        let (r, shift) = integrate_about_ridge_ln(f, ridge_center(uy), &[0.0], icfg);
        (r, shift + 2.0 * lc + k1 * uy)
    };
    let scale = |uy: f64| {
        let f = |lz: f64, ld: f64| tf.ln_eval(ln_phi_nil_log_with(t, uy, lz, ld)) + k1 * lz;
        ridge_scale(f, ridge_center(uy)) + 2.0 * lc + k1 * uy
    };
    integrate_outer_ln_scaled(inner, scale, &[1.0], cfg)
}

fn q3_inner_breaks(ra: f64) -> Vec<f64> {
    let mut b = vec![1.0];
    if ra < 1.0 {
        b.extend(finite((1.0 - ra * ra).sqrt()));
    }
    b
}

/// R_{Q₃} from the closed form on N_{Q₃}.
fn radon_q3(t: &DiagVec, tf: &TestFunction, tag: FieldTag, cfg: &QuadConfig) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let lc = ln_c(tag);
    let ln_w = |ua: f64| 2.0 * lc + k1 * ua;
    let ln_f = |ua: f64, ub: f64| tf.ln_eval(ln_phi_q3_log(t, ua, ub)) + k1 * ub;
    integrate_nested_ln(ln_w, ln_f, &[1.0], q3_inner_breaks, cfg)
}

/// ∫_{N_Q} tf(Φ(a_t n)) dn for Q ∈ {Q₁, Q₃}, Lebesgue measure on the
/// matrix coordinates.
pub fn radon_max(
    q: &ParabolicSpec,
    t: &DiagVec,
    tf: &TestFunction,
    tag: FieldTag,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    match q.identify() {
        Some(ParabolicId::Q1) => Ok(radon_q1(t, tf, tag, cfg)),
        Some(ParabolicId::Q3) => Ok(radon_q3(t, tf, tag, cfg)),
        _ => Err(Error::InvalidInput(format!("radon_max expects Q1 or Q3, got {}", q.label()))),
    }
}

/// R_{Q₃}(a_t) over |a|, |b| < `upper` from the closed form.
pub fn radon_q3_truncated(t: &DiagVec, tf: &TestFunction, tag: FieldTag, upper: f64, cfg: &QuadConfig) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let lc = ln_c(tag);
    let ln_w = |ua: f64| 2.0 * lc + k1 * ua;
    let ln_f = |ua: f64, ub: f64| tf.ln_eval(ln_phi_q3_log(t, ua, ub)) + k1 * ub;
    integrate_nested_ln_upto(ln_w, ln_f, &[1.0], q3_inner_breaks, Some((upper, upper)), cfg)
}

/// R_{Q₃}(a_t) over |a|, |b| < `upper`, computed as R_{Q₂}(a_{−t}) with Φ
/// evaluated from the definition. σ maps a_t·N_{Q₃} onto a_{−t}·N_{Q₂},
/// preserving Φ and the coordinate measure.
pub fn radon_q3_sigma_path(
    t: &DiagVec,
    tf: &TestFunction,
    tag: FieldTag,
    upper: f64,
    cfg: &QuadConfig,
) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let lc = ln_c(tag);
    let a = a_exp(&t.neg(), tag);
    let ln_w = |ua: f64| 2.0 * lc + k1 * ua;
    let ln_f = |ua: f64, ub: f64| {
        let n = Mat3::from_real(tag, [[1.0, 0.0, 0.0], [ua.exp(), 1.0, 0.0], [ub.exp(), 0.0, 1.0]]);
        match ln_phi_oracle(&(&a * &n)) {
            Ok(l) => tf.ln_eval(l) + k1 * ub,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    integrate_nested_ln_upto(ln_w, ln_f, &[1.0], q3_inner_breaks, Some((upper, upper)), cfg)
}

/// R_{Q₁}(k·a_t) over |y|, |z| < `upper` for a fixed k ∈ K, with Φ
/// evaluated from the definition.
pub fn radon_q1_left_k(
    k: &Mat3,
    t: &DiagVec,
    tf: &TestFunction,
    upper: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let tag = k.tag();
    let ka = k.checked_mul(&a_exp(t, tag))?;
    let k1 = tag.real_dim() as f64 - 1.0;
    let lc = ln_c(tag);
    let ln_w = |uy: f64| 2.0 * lc + k1 * uy;
    let ln_f = |uy: f64, uz: f64| {
        let n = Mat3::from_real(tag, [[1.0, 0.0, uz.exp()], [0.0, 1.0, uy.exp()], [0.0, 0.0, 1.0]]);
        match ln_phi_oracle(&(&ka * &n)) {
            Ok(l) => tf.ln_eval(l) + k1 * uz,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let inner = |ry: f64| {
        let mut b = vec![1.0];
        b.extend(finite((1.0 + ry * ry).sqrt()));
        b
    };
    Ok(integrate_nested_ln_upto(ln_w, ln_f, &[1.0], inner, Some((upper, upper)), cfg))
}

/// R_{Q₁}(a_t) over |y|, |z| < `upper` from the closed form.
pub fn radon_q1_truncated(t: &DiagVec, tf: &TestFunction, tag: FieldTag, upper: f64, cfg: &QuadConfig) -> QuadResult {
    let k1 = tag.real_dim() as f64 - 1.0;
    let lc = ln_c(tag);
    let ln_w = |uy: f64| 2.0 * lc + k1 * uy;
    let ln_f = |uy: f64, uz: f64| tf.ln_eval(crate::phi::ln_phi_nil_log(t, uy, uz)) + k1 * uz;
    let inner = |ry: f64| {
        let mut b = vec![1.0];
        b.extend(finite((1.0 + ry * ry).sqrt()));
        b
    };
    integrate_nested_ln_upto(ln_w, ln_f, &[1.0], inner, Some((upper, upper)), cfg)
}

/// Which majorant of the proposition to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundForm {
    /// R: cosh(α(t))⁻¹(1 + ‖t‖)^{4−r}; C: the L-form.
    Primary,
    /// C only: L(·)^{r−3}·cosh(α(t))⁻¹(1 + |α(t)|)^{4−r}.
    Simplified,
}

fn l_of_ln(lx: f64) -> f64 {
    lx.max(9f64.ln())
}

/// The right-hand side of the proposition (constant omitted) for Q ∈ {Q₁, Q₃}.
pub fn prop_bound(q: ParabolicId, t: &DiagVec, tag: FieldTag, r: f64, form: BoundForm) -> Result<f64> {
    let [t1, t2, t3] = t.t();
    // α is t₁−t₂ for Q₁ and t₂−t₃ for Q₃; s is the A_Q coordinate.
    let (alpha, s) = match q {
        ParabolicId::Q1 => (t1 - t2, -t3),
        ParabolicId::Q3 => (t2 - t3, t1),
        _ => return Err(Error::InvalidInput(format!("no bound for {}", q.name()))),
    };
    // ln cosh without overflow
    let ln_cosh = alpha.abs() + (-2.0 * alpha.abs()).exp().ln_1p() - std::f64::consts::LN_2;
    match (tag, form) {
        (FieldTag::R, _) => Ok((-ln_cosh + (4.0 - r) * (1.0 + t.norm()).ln()).exp()),
        (FieldTag::C, BoundForm::Primary) => {
            let inner = l_of_ln(-3.0 * s + ln_cosh);
            Ok((-ln_cosh).exp() * l_of_ln(s) * inner.powf(4.0 - r))
        }
        (FieldTag::C, BoundForm::Simplified) => {
            Ok(l_of_ln(s).powf(r - 3.0) * (-ln_cosh).exp() * (1.0 + alpha.abs()).powf(4.0 - r))
        }
        (FieldTag::H, _) => Err(Error::InvalidInput("no bound over H".into())),
    }
}

/// δ_Q(a_t)·R_Q(a_t) against the proposition bound.
pub fn hc_transform(
    q: &ParabolicSpec,
    t: &DiagVec,
    tf: &TestFunction,
    tag: FieldTag,
    r: f64,
    form: BoundForm,
    cfg: &QuadConfig,
) -> Result<TransformResult> {
    let id = q
        .identify()
        .ok_or_else(|| Error::InvalidInput("anonymous parabolic".into()))?;
    let raw = radon_max(q, t, tf, tag, cfg)?;
    let weighted = rho(q, t, tag).exp() * raw.value;
    let bound = prop_bound(id, t, tag, r, form)?;
    let ratio = if bound > 0.0 { weighted / bound } else { f64::NAN };
    Ok(TransformResult {
        t: *t,
        raw,
        weighted,
        bound,
        ratio,
    })
}

fn ln_positive(v: f64) -> Option<f64> {
    (v > 0.0 && v.is_finite()).then(|| v.ln())
}

fn ridge_center(uy: f64) -> f64 {
    0.5 * softplus(2.0 * uy)
}

/// Sample points in ln y for the cheap slice scale estimates.
const SCALE_PROBES: [f64; 5] = [-4.0, -2.0, 0.0, 2.0, 4.0];

/// ln ψ on the iterated slice at (x, y), as a function of (ln|z|, ln|z² − y² − 1|),
/// summed over the sign of z.
fn slice_integrand<'a>(t: &'a DiagVec, tf: &'a TestFunction, x: SignedLog, uy: f64) -> impl Fn(f64, f64) -> f64 + 'a {
    let y = SignedLog::new(1.0, uy);
    let xy = x.mul(y);
    let kernel = P1Kernel::new(t);
    let (xv, yv) = (x.to_f64(), y.to_f64());
    let plain = x.ln_abs.abs() < LIN_RANGE && uy.abs() < LIN_RANGE;
    move |lz: f64, ld: f64| {
        let terms = if plain && lz.abs() < LIN_RANGE && ld < 2.0 * LIN_RANGE {
            let (zv, ridge) = (lz.exp(), ld.exp());
            [zv, -zv].map(|z| tf.ln_eval(kernel.ln_phi(xv, yv, z + xv * yv, z, ridge)))
        } else {
            [1.0, -1.0].map(|sz| {
                let z = SignedLog::new(sz, lz);
                tf.ln_eval(ln_phi_p1_log_with(t, x, y, z.add(xy), z, ld))
            })
        };
        log_sum_exp(&terms)
    }
}

/// ln ψ for the direct order at (w, y), as a function of (ln|q|, ln|q² − y² − 1|),
/// summed over the sign of q = w − xy.
fn direct_integrand<'a>(t: &'a DiagVec, tf: &'a TestFunction, w: SignedLog, uy: f64) -> impl Fn(f64, f64) -> f64 + 'a {
    let y = SignedLog::new(1.0, uy);
    let kernel = P1Kernel::new(t);
    let (wv, yv) = (w.to_f64(), y.to_f64());
    let plain = w.ln_abs.abs() < LIN_RANGE && uy.abs() < LIN_RANGE;
    move |lq: f64, ld: f64| {
        let terms = if plain && lq.abs() < LIN_RANGE && ld < 2.0 * LIN_RANGE {
            let (qv, ridge) = (lq.exp(), ld.exp());
            [qv, -qv].map(|q| tf.ln_eval(kernel.ln_phi((wv - q) / yv, yv, wv, q, ridge)))
        } else {
            [1.0, -1.0].map(|sq| {
                let q = SignedLog::new(sq, lq);
                let d = w.add(q.neg());
                let x = SignedLog::new(d.sign, d.ln_abs - uy);
                tf.ln_eval(ln_phi_p1_log_with(t, x, y, w, q, ld))
            })
        };
        log_sum_exp(&terms)
    }
}

fn slice_scale(t: &DiagVec, tf: &TestFunction, x: SignedLog) -> f64 {
    SCALE_PROBES
        .iter()
        .map(|&uy| ridge_scale(slice_integrand(t, tf, x, uy), ridge_center(uy)) + uy)
        .fold(f64::NEG_INFINITY, f64::max)
        + std::f64::consts::LN_2
}

/// The inner integral over N_{Q₁} of ψ(a_t ν_x n), ν_x = I + x E₁₂, over R,
/// for x given as sign and log-magnitude.
pub fn iterated_slice_ln(t: &DiagVec, tf: &TestFunction, x: SignedLog, cfg: &QuadConfig) -> QuadResult {
    let cfg = &cfg.smooth();
    let ax = x.ln_abs.exp();
    let inner = |uy: f64, icfg: &QuadConfig| {
        let mut breaks = Vec::new();
        if ax < 1.0 {
            let c = (1.0 - ax * ax).sqrt();
            let yv = uy.exp();
            breaks.extend(ln_positive((c - ax * yv).abs()));
            breaks.extend(ln_positive(c + ax * yv));
        }
        let (r, shift) = integrate_about_ridge_ln(slice_integrand(t, tf, x, uy), ridge_center(uy), &breaks, icfg);
        // (y, z) ↦ (−y, −z) is a symmetry of the slice
        (r, shift + std::f64::consts::LN_2)
    };
    let scale = |uy: f64| ridge_scale(slice_integrand(t, tf, x, uy), ridge_center(uy)) + std::f64::consts::LN_2;
    integrate_outer_ln_scaled(inner, scale, &[1.0], cfg)
}

pub fn iterated_slice(t: &DiagVec, tf: &TestFunction, x: f64, cfg: &QuadConfig) -> QuadResult {
    iterated_slice_ln(t, tf, SignedLog::from_f64(x), cfg)
}

/// R_{P₁}ψ(a_t) over R as ∫_{N_R} ∫_{N_{Q₁}} ψ(a_t ν n) dn dν.
pub fn radon_min_iterated(t: &DiagVec, tf: &TestFunction, cfg: &QuadConfig) -> QuadResult {
    let cfg = &cfg.smooth();
    let inner = |ux: f64, icfg: &QuadConfig| {
        // the slice is even in x
        (iterated_slice_ln(t, tf, SignedLog::new(1.0, ux), icfg), std::f64::consts::LN_2)
    };
    let scale = |ux: f64| slice_scale(t, tf, SignedLog::new(1.0, ux)) + std::f64::consts::LN_2;
    integrate_outer_ln_scaled(inner, scale, &[1.0], cfg)
}

/// R_{P₁}ψ(a_t) over R by direct integration over u = I + x E₁₂ + w E₁₃ + y E₂₃
/// in the order w, y, x (innermost). The innermost variable is moved to
/// q = w − xy so the ridge q² = 1 + y² is resolved.
pub fn radon_min_direct(t: &DiagVec, tf: &TestFunction, cfg: &QuadConfig) -> QuadResult {
    // sign flips preserving sign(xyw) fix w, y > 0
    let ln4 = 4f64.ln();
    let outer = |uw: f64, icfg: &QuadConfig| {
        let w = SignedLog::new(1.0, uw);
        let wv = uw.exp();
        let middle = |uy: f64, icfg2: &QuadConfig| {
            let yv = uy.exp();
            let mut breaks = Vec::new();
            let mut feature = |xv: f64| {
                breaks.extend(ln_positive((wv - yv * xv).abs()));
                breaks.extend(ln_positive(wv + yv * xv));
            };
            feature(1.0);
            if wv < 1.0 {
                feature((1.0 - wv * wv).sqrt());
            }
            let (r, shift) = integrate_about_ridge_ln(direct_integrand(t, tf, w, uy), ridge_center(uy), &breaks, icfg2);
            // dx = dq / y
            (r, shift - uy)
        };
        let scale = |uy: f64| ridge_scale(direct_integrand(t, tf, w, uy), ridge_center(uy)) - uy;
        (integrate_outer_ln_scaled(middle, scale, &[1.0], icfg), ln4)
    };
    let scale = |uw: f64| {
        let w = SignedLog::new(1.0, uw);
        SCALE_PROBES
            .iter()
            .map(|&uy| ridge_scale(direct_integrand(t, tf, w, uy), ridge_center(uy)))
            .fold(f64::NEG_INFINITY, f64::max)
            + ln4
    };
    integrate_outer_ln_scaled(outer, scale, &[1.0], cfg)
}

/// Calibration of the two evaluation orders on e^{−x²−y²−z²} over R³.
pub fn gaussian_calibration(cfg: &QuadConfig) -> (QuadResult, QuadResult) {
    let icfg = cfg.inner();
    let ln_gauss = |u: f64| -(2.0 * u).exp();
    let one_d = |c: &QuadConfig| integrate_half_line_ln(ln_gauss, &[], c);
    // iterated: ∫ dx ∫∫ dy dz
    let ln_g = |ux: f64| {
        let inner = integrate_nested_ln(|uy| ln_gauss(uy), |_, uz| ln_gauss(uz), &[], |_| vec![], &icfg);
        ln_gauss(ux) + inner.value.ln()
    };
    let iterated = integrate_half_line_ln(ln_g, &[], cfg);
    let mut it = iterated;
    it.value *= 8.0;
    it.err_est *= 8.0;
    // direct: product of three one-dimensional integrals
    let d = one_d(cfg);
    let direct = QuadResult {
        value: 8.0 * d.value.powi(3),
        err_est: 24.0 * d.value.powi(2) * d.err_est,
        converged: d.converged,
        evaluations: 3 * d.evaluations,
    };
    (it, direct)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seminorm {
    pub sup: f64,
    pub argmax: DiagVec,
    /// True when the supremum sits on the outer edge of the grid and the
    /// weighted values are still increasing there.
    pub unbounded: bool,
}

/// sup over `t_grid` of Φ^{k/4}(ln Φ)^r |tf(Φ)| with Φ = Φ(a_t).
///
/// The grid is read as rays: consecutive points with increasing ‖t‖ along the
/// same direction are compared for the unboundedness verdict.
pub fn seminorm_mu(tf: &TestFunction, r: f64, tag: FieldTag, t_grid: &[DiagVec]) -> Result<Seminorm> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty t grid".into()));
    }
    let k = tag.real_dim() as f64;
    let ln_val = |t: &DiagVec| {
        let lp = ln_phi_diag(t);
        0.25 * k * lp + r * lp.ln() + tf.ln_eval(lp)
    };
    let vals: Vec<f64> = t_grid.iter().map(ln_val).collect();
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let rmax = t_grid.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let tm = t_grid[imax];
    let on_edge = tm.norm() >= rmax * (1.0 - 1e-12) && rmax > 0.0;
    let unbounded = on_edge && {
        let inner = tm.scaled(0.95);
        ln_val(&tm) > ln_val(&inner)
    };
    Ok(Seminorm {
        sup: vals[imax].exp(),
        argmax: tm,
        unbounded,
    })
}

/// Points on `rays` rays through 0 in V at `radii` radii ≤ `rmax`, ray-major.
/// The first ray is along (1, −1, 0)/√2.
pub fn ray_grid(rays: usize, radii: usize, rmax: f64) -> Vec<DiagVec> {
    let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let e2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let mut out = Vec::with_capacity(rays * radii);
    for i in 0..rays {
        let th = std::f64::consts::TAU * i as f64 / rays as f64;
        let d = [0, 1, 2].map(|j| th.cos() * e1[j] + th.sin() * e2[j]);
        for j in 0..radii {
            let s = if radii == 1 { rmax } else { rmax * j as f64 / (radii - 1) as f64 };
            out.push(DiagVec::new(d.map(|c| s * c)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ParabolicSpec;
    use crate::phi::phi_nil;
    use crate::phi::NilCoords;
    use crate::quadrature::integrate_radial2_with;

    fn cfg(rel: f64) -> QuadConfig {
        QuadConfig::default().with_rel_tol(rel)
    }

    #[test]
    fn q1_ridge_path_matches_plain_radial() {
        let t = DiagVec::new([0.3, -0.1, -0.2]);
        let tf = TestFunction::PhiPower { eps: 0.5 };
        for tag in FieldTag::ALL {
            let a = radon_max(&ParabolicSpec::named(ParabolicId::Q1), &t, &tf, tag, &cfg(1e-8)).unwrap();
            let b = integrate_radial2_with(|y, z| tf.eval(phi_nil(&t, NilCoords::new(y, z))), tag, &[1.0], &cfg(1e-8));
            assert!(a.converged, "{tag:?} {a:?}");
            assert!((a.value / b.value - 1.0).abs() < 1e-6, "{tag:?} {} {}", a.value, b.value);
        }
    }

    #[test]
    fn q3_paths_agree_on_truncated_domain() {
        let tf = TestFunction::schwartz(FieldTag::R, 5.0);
        for t in [DiagVec::zero(), DiagVec::new([0.5, -1.0, 0.5])] {
            let a = radon_q3_truncated(&t, &tf, FieldTag::R, 100.0, &cfg(1e-9));
            let b = radon_q3_sigma_path(&t, &tf, FieldTag::R, 100.0, &cfg(1e-9));
            assert!((a.value / b.value - 1.0).abs() < 1e-7, "{} {}", a.value, b.value);
        }
    }

    #[test]
    fn bound_is_one_at_origin() {
        for (tag, form) in [(FieldTag::R, BoundForm::Primary), (FieldTag::C, BoundForm::Simplified)] {
            let b = prop_bound(ParabolicId::Q1, &DiagVec::zero(), tag, 5.0, form).unwrap();
            if tag == FieldTag::R {
                assert!((b - 1.0).abs() < 1e-15);
            } else {
                assert!((b - 9f64.ln().powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seminorm_cancellation() {
        let grid = ray_grid(4, 5, 3.0);
        let m = seminorm_mu(&TestFunction::schwartz(FieldTag::C, 5.0), 5.0, FieldTag::C, &grid).unwrap();
        assert!((m.sup - 1.0).abs() < 1e-12 && !m.unbounded);
        let m = seminorm_mu(&TestFunction::schwartz(FieldTag::R, 6.0), 5.0, FieldTag::R, &grid).unwrap();
        assert!(m.sup <= 1.0 && m.argmax.norm() == 0.0);
        let m = seminorm_mu(&TestFunction::PhiLogPower { kpow: 0.0, r: 0.0 }, 1.0, FieldTag::R, &grid).unwrap();
        assert!(m.unbounded);
    }

    #[test]
    fn iterated_slice_at_zero_is_q1_transform() {
        let tf = TestFunction::schwartz(FieldTag::R, 6.0);
        let t = DiagVec::new([1.0, 0.0, -1.0]);
        let a = iterated_slice(&t, &tf, 0.0, &cfg(1e-7));
        let b = radon_max(&ParabolicSpec::named(ParabolicId::Q1), &t, &tf, FieldTag::R, &cfg(1e-7)).unwrap();
        assert!((a.value / b.value - 1.0).abs() < 1e-5, "{} {}", a.value, b.value);
    }

    #[test]
    fn gaussian_orders_agree() {
        let (a, b) = gaussian_calibration(&cfg(1e-10));
        let want = std::f64::consts::PI.powf(1.5);
        assert!((a.value / want - 1.0).abs() < 1e-8 && (b.value / want - 1.0).abs() < 1e-8);
    }
}
