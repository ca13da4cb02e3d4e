use cuspidal::group::DiagVec;
use cuspidal::lemma::{lemma_lhs, LemmaParams, LemmaPart};
use cuspidal::phi::{phi_nil, NilCoords};
use cuspidal::quadrature::{integrate_radial2, integrate_radial2_with};
use cuspidal::{FieldTag, QuadConfig};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Midpoint rule on [0, 1] with n cells.
fn midpoint(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

// ∫₀^∞ |s²−1|^{−1/2} L((s²−1)²)^{−3} ds on a graded mesh: s = 1 ∓ w² on
// either side of the singular point, s = e^u beyond s = 2 with u graded
// geometrically, and the (4u)^{−3} tail in closed form.
fn lemma_ii_brute_force() -> f64 {
    let ln9 = 9f64.ln();
    let l = |x: f64| x.max(9.0).ln();
    let near = |s: f64| (s * s - 1.0).abs().powf(-0.5) * l((s * s - 1.0).powi(2)).powi(-3);
    let left = midpoint(250_000, |w| 2.0 * w * near(1.0 - w * w));
    let right = midpoint(250_000, |w| 2.0 * w * near(1.0 + w * w));
    // u ∈ [ln 2, U]: u = ln2·(U/ln2)^v
    let big_u = 1e7;
    let (u0, span) = (2f64.ln(), (1e7 / 2f64.ln()).ln());
    let far = midpoint(500_000, |v| {
        let u = u0 * (span * v).exp();
        let one_minus = -(-2.0 * u).exp_m1();
        let lx = (4.0 * u + 2.0 * one_minus.ln()).max(ln9);
        // |s²−1|^{−1/2}·s = (1 − e^{−2u})^{−1/2}
        one_minus.powf(-0.5) * lx.powi(-3) * u * span
    });
    left + right + far + 1.0 / (128.0 * big_u * big_u)
}

#[test]
fn lemma_ii_type_integral_matches_graded_mesh() {
    let p = LemmaParams {
        part: LemmaPart::Ii,
        kappa1: 1.0,
        kappa2: 1.0,
        sign: -1.0,
        r: 3.0,
        r1: 0.0,
    };
    let q = lemma_lhs(&p, &QuadConfig::default()).unwrap();
    let brute = lemma_ii_brute_force();
    assert!(q.converged);
    assert!(rel(q.value, brute) < 1e-4, "{} vs {brute}", q.value);
}

#[test]
fn lemma_iii_example_matches_substitution() {
    // s = 3 sinh x turns the integrand into (ln 9 + 2 ln cosh x)^{−3}
    let p = LemmaParams {
        part: LemmaPart::Iii,
        kappa1: 1.0,
        kappa2: 9.0,
        sign: 1.0,
        r: 3.0,
        r1: 0.0,
    };
    let q = lemma_lhs(&p, &QuadConfig::default()).unwrap();
    let x_max = 1e6;
    let ln_cosh = |x: f64| x + (-2.0 * x).exp().ln_1p() - 2f64.ln();
    // x = x_max·v², graded towards 0
    let body = midpoint(1_000_000, |v| {
        let x = x_max * v * v;
        (9f64.ln() + 2.0 * ln_cosh(x)).powi(-3) * 2.0 * x_max * v
    });
    // tail: ∫_{X}^∞ (2x + c)^{−3} dx with c = ln 9 − 2 ln 2
    let c = 9f64.ln() - 2.0 * 2f64.ln();
    let tail = 0.25 * (2.0 * x_max + c).powi(-2);
    assert!(q.converged);
    assert!(rel(q.value, body + tail) < 1e-6, "{} vs {}", q.value, body + tail);
    assert!(rel(p.rhs(), 1.0 / 9f64.ln()) < 1e-14);
}

#[test]
fn phi_nil_inverse_over_r_matches_tensor_grid() {
    let t = DiagVec::zero();
    let f = |y: f64, z: f64| 1.0 / phi_nil(&t, NilCoords::new(y, z));
    let q = integrate_radial2(f, FieldTag::R, &QuadConfig::default());
    // y = sinh a, z = sinh b over the positive quadrant, times 4
    let a_max: f64 = 12.0;
    let n = 2000;
    let h = a_max / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let a = (i as f64 + 0.5) * h;
        for j in 0..n {
            let b = (j as f64 + 0.5) * h;
            sum += f(a.sinh(), b.sinh()) * a.cosh() * b.cosh();
        }
    }
    let brute = 4.0 * sum * h * h;
    assert!(q.converged);
    assert!(rel(q.value, brute) < 1e-4, "{} vs {brute}", q.value);
}

#[test]
fn quaternionic_phi_power_is_not_integrable() {
    let t = DiagVec::zero();
    let q = integrate_radial2_with(
        |y, z| phi_nil(&t, NilCoords::new(y, z)).powf(-1.1),
        FieldTag::H,
        &[1.0],
        &QuadConfig {
            tail_cut: 60.0,
            max_evals: 20_000,
            ..QuadConfig::default()
        },
    );
    assert!(!q.converged);
}
