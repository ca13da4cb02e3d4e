use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{CheckReport, Row};
use super::GridSpec;
use crate::field::{FieldTag, Mat3, Scalar};
use crate::group::{
    a_exp, conj_by_w0, is_sigma_parabolic, j_matrix, maximal_nilradicals, minimal_chambers, sigma_classes,
    sigma_on_spec, DiagVec, ParabolicId, ParabolicSpec, RootIdx,
};
use crate::lemma::{lemma_lhs, log_grid, LemmaParams, LemmaPart};
use crate::phi::{ln_phi_diag, ln_phi_nil, ln_phi_oracle, phi_diag, NilCoords};
use crate::quadrature::{
    geometric_edges, integrate_half_line, integrate_half_line_ln, integrate_half_line_with, integrate_radial2_with,
    shell_scan, sphere_area, QuadConfig,
};
use crate::transforms::{
    gaussian_calibration, hc_transform, radon_max, radon_min_direct, radon_min_iterated, radon_q1_left_k,
    radon_q1_truncated, radon_q3_sigma_path, radon_q3_truncated, ray_grid, BoundForm, TestFunction,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn lookup(catalog: &[ParabolicSpec], id: ParabolicId) -> Option<&ParabolicSpec> {
    catalog.iter().find(|s| s.id == Some(id))
}

/// Root-set relations among the catalog entries and the orbit counts.
pub fn check_structure(catalog: &[ParabolicSpec], id: &str) -> CheckReport {
    let mut r = CheckReport::new(id);
    for pid in ParabolicId::ALL {
        let Some(s) = lookup(catalog, pid) else {
            r.expect(false, format!("{pid} missing from catalog"));
            continue;
        };
        r.expect(s.is_closed(), format!("{pid} nilradical closed"));
        r.expect(is_sigma_parabolic(s), format!("{pid} is σ-parabolic"));
        let size_ok = match pid {
            ParabolicId::P1 | ParabolicId::P2 | ParabolicId::P3 => s.is_minimal(),
            _ => s.is_maximal(),
        };
        r.expect(size_ok, format!("{pid} has the expected rank"));
    }
    let get = |p| lookup(catalog, p).cloned().unwrap_or_else(|| ParabolicSpec::anonymous([]));
    let relations = [
        ("σQ2 = Q3", sigma_on_spec(&get(ParabolicId::Q2)), get(ParabolicId::Q3)),
        ("σ(w0 Q1 w0⁻¹) = Q4", sigma_on_spec(&conj_by_w0(&get(ParabolicId::Q1))), get(ParabolicId::Q4)),
        ("σ(w0 P1 w0⁻¹) = P3", sigma_on_spec(&conj_by_w0(&get(ParabolicId::P1))), get(ParabolicId::P3)),
    ];
    for (name, lhs, rhs) in relations {
        r.expect(lhs.same_roots(&rhs), name);
    }
    let min = sigma_classes(&minimal_chambers());
    let max = sigma_classes(&maximal_nilradicals());
    r.metric("minimalClasses", min.len() as f64);
    r.metric("maximalClasses", max.len() as f64);
    r.expect(min.len() == 3, format!("{} minimal σ-classes", min.len()));
    r.expect(max.len() == 4, format!("{} maximal σ-classes", max.len()));
    let classes: Vec<ParabolicSpec> = min.into_iter().chain(max).collect();
    for s in catalog {
        let found = classes.iter().any(|c| c.same_roots(s) || conj_by_w0(c).same_roots(s));
        r.expect(found, format!("{} is a class representative", s.label()));
    }
    r
}

/// The catalog with 𝔫_{Q₁} replaced by a wrong root set.
pub fn perturbed_catalog() -> Vec<ParabolicSpec> {
    let mut cat = crate::group::catalog();
    for s in cat.iter_mut().filter(|s| s.id == Some(ParabolicId::Q1)) {
        s.nil_roots = [RootIdx::new(1, 3), RootIdx::new(3, 2)]
            .into_iter()
            .map(|r| r.expect("valid root"))
            .collect();
    }
    cat
}

/// Passes when the structure check flags the perturbed catalog.
pub fn check_structure_control() -> CheckReport {
    let inner = check_structure(&perturbed_catalog(), "structure-control");
    let mut r = CheckReport::new("structure-control");
    r.metric("flaggedRelations", inner.errors.len() as f64);
    r.expect(!inner.pass, "perturbed catalog flagged");
    r.notes.extend(inner.errors.iter().map(|e| format!("flagged: {e}")));
    r
}

/// A random element of H: exp(J·A) with A anti-Hermitian, so h†Jh = J.
pub fn random_h<R: Rng + ?Sized>(tag: FieldTag, scale: f64, rng: &mut R) -> Mat3 {
    let mut g = Mat3::zeros(tag);
    for i in 0..3 {
        for j in 0..3 {
            g.set(i, j, Scalar::gaussian(tag, rng)).expect("same tag");
        }
    }
    let mut a = g.checked_sub(&g.dagger()).expect("same tag").scale(0.5 * scale);
    let j = j_matrix(tag);
    if tag == FieldTag::C {
        // make tr(J·A) vanish
        let s = (0..3).map(|i| j.get(i, i).re() * a.get(i, i).coeffs()[1]).sum::<f64>();
        for i in 0..3 {
            let d = a.get(i, i).coeffs();
            let shift = s / 3.0 * j.get(i, i).re();
            a.set(i, i, Scalar::new(tag, [d[0], d[1] - shift, 0.0, 0.0])).expect("same tag");
        }
    }
    (&j * &a).exp(1e-16)
}

fn phi_tolerance(tag: FieldTag) -> f64 {
    match tag {
        FieldTag::H => 1e-7,
        _ => 1e-8,
    }
}

/// Φ(k·a_t·h) against the closed form on the torus.
pub fn check_phi(tag: FieldTag, samples: usize, seed: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("phi-{tag}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(tag.real_dim() as u64));
    let mut max_err: f64 = 0.0;
    let mut wall_err: f64 = 0.0;
    let mut min_phi = f64::INFINITY;
    let mut failures = 0usize;
    for n in 0..samples {
        let mut t = [0.0; 3].map(|_| rng.random_range(-1.5..1.5));
        let wall = n % 10 == 0;
        if wall {
            t[1] = t[0];
        }
        let t = DiagVec::new(t);
        let k = Mat3::random_unitary_with(tag, &mut rng);
        let h = random_h(tag, 1.0, &mut rng);
        let g = &(&k * &a_exp(&t, tag)) * &h;
        match ln_phi_oracle(&g) {
            Ok(lp) => {
                let e = (lp - ln_phi_diag(&t)).exp_m1().abs();
                max_err = max_err.max(e);
                if wall {
                    wall_err = wall_err.max(e);
                }
                min_phi = min_phi.min(lp.exp());
            }
            Err(_) => failures += 1,
        }
    }
    let tol = phi_tolerance(tag);
    r.metric("maxRelErr", max_err);
    r.metric("maxRelErrWeylWall", wall_err);
    r.metric("minPhi", min_phi);
    r.metric("samples", samples as f64);
    r.expect(failures == 0, format!("{failures} singular samples"));
    r.expect(max_err <= tol, format!("max relative error {max_err:.3e} ≤ {tol:e}"));
    r.expect(min_phi >= 9.0 - 1e-9, format!("min Φ = {min_phi:.12} ≥ 9 − 1e−9"));
    r
}

/// Invariance of Φ(a_t) under permutations of t.
pub fn check_weyl(samples: usize, seed: u64) -> CheckReport {
    let mut r = CheckReport::new("phi-weyl");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut max_err: f64 = 0.0;
    for _ in 0..samples {
        let t = DiagVec::new([0.0; 3].map(|_| rng.random_range(-3.0..3.0)));
        let base = phi_diag(&t);
        for p in perms {
            max_err = max_err.max(rel(phi_diag(&t.permuted(p)), base));
        }
    }
    r.metric("maxRelErr", max_err);
    r.expect(max_err <= 1e-12, format!("max relative deviation {max_err:.3e} ≤ 1e−12"));
    r
}

pub fn lemma_check_id(part: LemmaPart, r1: f64, sign: f64) -> String {
    let mut id = format!("lemma-{part}");
    if part == LemmaPart::I {
        id.push_str(&format!("-r1={r1}"));
    }
    if part.has_sign() {
        id.push_str(if sign > 0.0 { "-plus" } else { "-minus" });
    }
    id
}

/// One inequality over the κ grid, κ₁-major.
pub fn check_lemma(part: LemmaPart, r: f64, r1: f64, sign: f64, grid: &GridSpec, cfg: &QuadConfig) -> CheckReport {
    let ks = log_grid(grid.decades, grid.count);
    let params: Vec<LemmaParams> = ks
        .iter()
        .flat_map(|&k1| {
            ks.iter().map(move |&k2| LemmaParams {
                part,
                kappa1: k1,
                kappa2: k2,
                sign,
                r,
                r1,
            })
        })
        .collect();
    let id = lemma_check_id(part, r1, sign);
    let rows: Result<Vec<Row>, _> = params
        .par_iter()
        .map(|p| {
            lemma_lhs(p, cfg)
                .map(|q| Row::new(&[("kappa1", p.kappa1), ("kappa2", p.kappa2)], q.value, p.rhs(), q.converged))
        })
        .collect();
    match rows {
        Ok(rows) => CheckReport::bound(id, rows),
        Err(e) => {
            let mut rep = CheckReport::new(id);
            rep.expect(false, e.to_string());
            rep
        }
    }
}

/// δ_Q·R_Q against the proposition bound over the ray grid.
pub fn check_prop(tag: FieldTag, q: ParabolicId, r: f64, grid: &GridSpec, cfg: &QuadConfig) -> CheckReport {
    let id = format!("prop-{tag}-{q}");
    let spec = ParabolicSpec::named(q);
    let tf = TestFunction::schwartz(tag, r);
    let pts = ray_grid(grid.rays, grid.radii, grid.radius);
    let rows: Result<Vec<Row>, _> = pts
        .par_iter()
        .map(|t| {
            hc_transform(&spec, t, &tf, tag, r, BoundForm::Primary, cfg).map(|h| {
                let [t1, t2, t3] = t.t();
                Row::new(&[("t1", t1), ("t2", t2), ("t3", t3)], h.weighted, h.bound, h.raw.converged)
            })
        })
        .collect();
    match rows {
        Ok(rows) => CheckReport::bound(id, rows),
        Err(e) => {
            let mut rep = CheckReport::new(id);
            rep.expect(false, e.to_string());
            rep
        }
    }
}

const PATH_UPPER: f64 = 30.0;

/// R_{Q₃} over R from the closed form and through σ and Φ from its
/// definition, on a bounded box.
pub fn check_q3_paths(r: f64) -> CheckReport {
    let mut rep = CheckReport::new("prop-R-Q3-sigma-path");
    let tf = TestFunction::schwartz(FieldTag::R, r);
    let cfg = QuadConfig::default().with_rel_tol(1e-8);
    let pts = [DiagVec::zero(), DiagVec::new([1.0, 0.0, -1.0])];
    let res: Vec<_> = pts
        .par_iter()
        .map(|t| {
            (
                radon_q3_truncated(t, &tf, FieldTag::R, PATH_UPPER, &cfg),
                radon_q3_sigma_path(t, &tf, FieldTag::R, PATH_UPPER, &cfg),
            )
        })
        .collect();
    for (t, (a, b)) in pts.iter().zip(res) {
        let [t1, t2, t3] = t.t();
        rep.rows.push(Row::new(&[("t1", t1), ("t2", t2), ("t3", t3)], a.value, b.value, a.converged && b.converged));
        rep.expect(a.converged == b.converged, format!("same verdict at {:?}", t.t()));
        rep.expect(rel(a.value, b.value) < 1e-6, format!("paths agree at {:?}: {:.3e}", t.t(), rel(a.value, b.value)));
    }
    rep
}

/// R_{Q₁}(k·a_0) = R_{Q₁}(a_0) for a random k ∈ K, on a bounded box.
pub fn check_left_k(seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("prop-left-k");
    let cfg = QuadConfig::default().with_rel_tol(1e-8);
    for tag in [FieldTag::R, FieldTag::C] {
        let tf = TestFunction::schwartz(tag, 5.0);
        let k = Mat3::random_unitary(tag, seed.wrapping_add(11));
        let t = DiagVec::zero();
        let a = radon_q1_truncated(&t, &tf, tag, PATH_UPPER, &cfg);
        match radon_q1_left_k(&k, &t, &tf, PATH_UPPER, &cfg) {
            Ok(b) => {
                rep.metric(&format!("relDiff{tag}"), rel(a.value, b.value));
                rep.expect(a.converged && b.converged, format!("{tag}: both converge"));
                rep.expect(rel(a.value, b.value) < 1e-6, format!("{tag}: invariant under k"));
            }
            Err(e) => rep.expect(false, format!("{tag}: {e}")),
        }
    }
    rep
}

/// The two evaluation orders on e^{−x²−y²−z²}.
pub fn check_gaussian_calibration(cfg: &QuadConfig) -> CheckReport {
    let mut rep = CheckReport::new("iterated-calibration");
    let (it, direct) = gaussian_calibration(&cfg.with_rel_tol(1e-10));
    let exact = PI.powf(1.5);
    rep.metric("iterated", it.value);
    rep.metric("direct", direct.value);
    rep.expect(it.converged && direct.converged, "both orders converge");
    rep.expect(rel(it.value, direct.value) <= 1e-8, format!("orders agree: {:.3e}", rel(it.value, direct.value)));
    rep.expect(rel(it.value, exact) <= 1e-8, format!("π^{{3/2}} reproduced: {:.3e}", rel(it.value, exact)));
    rep
}

/// R_{P₁} by the iterated and the direct route; lhs is iterated, rhs direct.
pub fn check_iterated(r: f64, points: &[DiagVec], cfg: &QuadConfig) -> CheckReport {
    let mut rep = CheckReport::new("iterated-R");
    let tf = TestFunction::schwartz(FieldTag::R, r);
    let res: Vec<_> = points
        .par_iter()
        .map(|t| (radon_min_iterated(t, &tf, cfg), radon_min_direct(t, &tf, cfg)))
        .collect();
    for (t, (a, b)) in points.iter().zip(res) {
        let [t1, t2, t3] = t.t();
        let row = Row::new(&[("t1", t1), ("t2", t2), ("t3", t3)], a.value, b.value, a.converged && b.converged);
        rep.expect(row.converged, format!("both routes converge at {:?}", t.t()));
        rep.expect((row.ratio - 1.0).abs() <= 0.01, format!("agreement at {:?}: ratio {:.5}", t.t(), row.ratio));
        rep.rows.push(row);
    }
    rep
}

fn divergence_scan(eps: f64, grid: &GridSpec, cfg: &QuadConfig) -> crate::error::Result<crate::quadrature::ShellGrowth> {
    let tf = TestFunction::PhiPower { eps };
    let edges = geometric_edges(1.0, grid.shell_max, grid.shells);
    let t = DiagVec::zero();
    shell_scan(|ry, rz| tf.ln_eval(ln_phi_nil(&t, NilCoords::new(ry, rz))), FieldTag::H, &edges, cfg)
}

/// Growth exponent of ∫ Φ(n_{y,z})^{−1−ε} over H-shells.
pub fn check_divergence(eps: f64, grid: &GridSpec, cfg: &QuadConfig) -> CheckReport {
    let mut rep = CheckReport::new(format!("divergence-H-eps={eps}"));
    let want = 1.0 - 6.0 * eps;
    match divergence_scan(eps, grid, cfg) {
        Ok(g) => {
            rep.metric("fittedSlope", g.fitted_slope);
            rep.metric("slopeStdErr", g.slope_std_err);
            rep.metric("expectedSlope", want);
            rep.expect(g.converged, "shell integrals converge");
            rep.expect(
                (g.fitted_slope - want).abs() <= 0.05,
                format!("slope {:.4} = {want:.2} ± 0.05", g.fitted_slope),
            );
        }
        Err(e) => rep.expect(false, e.to_string()),
    }
    rep
}

/// Above the threshold the shells no longer grow.
pub fn check_divergence_control(eps: f64, grid: &GridSpec, cfg: &QuadConfig) -> CheckReport {
    let mut rep = CheckReport::new(format!("divergence-control-eps={eps}"));
    match divergence_scan(eps, grid, cfg) {
        Ok(g) => {
            rep.metric("fittedSlope", g.fitted_slope);
            rep.metric("slopeStdErr", g.slope_std_err);
            rep.expect(g.fitted_slope <= 0.05, format!("no growth: slope {:.4} ≤ 0.05", g.fitted_slope));
        }
        Err(e) => rep.expect(false, e.to_string()),
    }
    rep
}

/// The Schwartz-scale integrand over N_{Q₁} converges for R and C.
pub fn check_contrast(tag: FieldTag, r: f64, cfg: &QuadConfig) -> CheckReport {
    let mut rep = CheckReport::new(format!("contrast-{tag}"));
    let tf = TestFunction::schwartz(tag, r);
    match radon_max(&ParabolicSpec::named(ParabolicId::Q1), &DiagVec::zero(), &tf, tag, cfg) {
        Ok(q) => {
            rep.metric("value", q.value);
            rep.metric("relErr", q.rel_err());
            rep.expect(q.converged && q.value.is_finite(), format!("converges to {:.6e}", q.value));
        }
        Err(e) => rep.expect(false, e.to_string()),
    }
    rep
}

/// Catalogued half-line integrals and the radial ball volumes.
pub fn check_quadrature() -> CheckReport {
    let mut rep = CheckReport::new("quadrature");
    let cfg = QuadConfig::default().with_rel_tol(1e-10);
    let cases: Vec<(&str, f64, f64)> = vec![
        ("exp(-s^2)", integrate_half_line(|s| (-s * s).exp(), &cfg).value, PI.sqrt() / 2.0),
        ("1/(1+s^2)", integrate_half_line(|s| 1.0 / (1.0 + s * s), &cfg).value, PI / 2.0),
        ("1/(1+s^4)", integrate_half_line(|s| 1.0 / (1.0 + s.powi(4)), &cfg).value, PI / 8f64.sqrt()),
        ("s exp(-s)", integrate_half_line(|s| s * (-s).exp(), &cfg).value, 1.0),
        ("s^-1/2 exp(-s)", integrate_half_line(|s| (-s).exp() / s.sqrt(), &cfg).value, PI.sqrt()),
        ("1/(1+s)^2", integrate_half_line(|s| (1.0 + s).powi(-2), &cfg).value, 1.0),
        (
            "ln(1+s^2)/(1+s^2)",
            integrate_half_line(|s| (s * s).ln_1p() / (1.0 + s * s), &cfg).value,
            PI * 2f64.ln(),
        ),
        (
            "(ln s)^2 on (0,1)",
            integrate_half_line_with(|s| if s < 1.0 { s.ln().powi(2) } else { 0.0 }, &[1.0], &cfg).value,
            2.0,
        ),
        (
            "|s-1|^-1/2 on (0,2)",
            integrate_half_line_with(|s| if s < 2.0 { (s - 1.0).abs().powf(-0.5) } else { 0.0 }, &[1.0, 2.0], &cfg)
                .value,
            4.0,
        ),
        (
            "s^-1 (ln s)^-3 on (e,inf)",
            integrate_half_line_ln(
                |u| if u > 1.0 { -u - 3.0 * u.ln() } else { f64::NEG_INFINITY },
                &[std::f64::consts::E],
                &cfg,
            )
            .value,
            0.5,
        ),
    ];
    for (name, got, want) in cases {
        let e = rel(got, want);
        rep.rows.push(Row::new(&[], got, want, true));
        rep.expect(e <= 1e-8, format!("{name}: relative error {e:.2e}"));
    }
    for tag in FieldTag::ALL {
        let k = tag.real_dim() as f64;
        let want = (sphere_area(tag) / k).powi(2);
        let got = integrate_radial2_with(|y, z| if y < 1.0 && z < 1.0 { 1.0 } else { 0.0 }, tag, &[1.0], &cfg).value;
        let e = rel(got, want);
        rep.expect(e <= 1e-9, format!("ball volume {tag}: relative error {e:.2e}"));
    }
    rep
}
