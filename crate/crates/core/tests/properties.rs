use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cuspidal::group::{catalog, conj_by_w0, rho, sigma, sigma_on_spec, DiagVec, ParabolicId, ParabolicSpec};
use cuspidal::lemma::{lemma_lhs, LemmaParams, LemmaPart};
use cuspidal::phi::{ln_phi_diag, ln_phi_oracle, phi_diag};
use cuspidal::quadrature::{integrate_half_line, shell_scan, geometric_edges};
use cuspidal::transforms::radon_q1_truncated;
use cuspidal::verify::{random_h, Fit, Row, HEADROOM};
use cuspidal::{FieldTag, Mat3, QuadConfig, Scalar, TestFunction};

fn tag_of(i: usize) -> FieldTag {
    FieldTag::ALL[i % 3]
}

fn gaussian_matrix(tag: FieldTag, seed: u64) -> Mat3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Mat3::zeros(tag);
    for i in 0..3 {
        for j in 0..3 {
            g.set(i, j, Scalar::gaussian(tag, &mut rng)).unwrap();
        }
    }
    g
}

fn t_strategy(r: f64) -> impl Strategy<Value = DiagVec> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| DiagVec::new([a, b, c]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_at_least_nine(seed in any::<u64>(), i in 0usize..3) {
        let g = gaussian_matrix(tag_of(i), seed);
        if let Ok(lp) = ln_phi_oracle(&g) {
            prop_assert!(lp.exp() >= 9.0 - 1e-9);
        }
    }

    #[test]
    fn phi_is_k_h_invariant_and_sigma_invariant(seed in any::<u64>(), i in 0usize..3) {
        let tag = tag_of(i);
        let g = gaussian_matrix(tag, seed);
        let Ok(base) = ln_phi_oracle(&g) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let k = Mat3::random_unitary_with(tag, &mut rng);
        let h = random_h(tag, 0.7, &mut rng);
        let moved = ln_phi_oracle(&(&(&k * &g) * &h)).unwrap();
        prop_assert!((moved - base).exp_m1().abs() < 1e-8, "{moved} {base}");
        let s = ln_phi_oracle(&sigma(&g).unwrap()).unwrap();
        prop_assert!((s - base).exp_m1().abs() < 1e-9);
    }

    #[test]
    fn phi_diag_is_weyl_invariant(t in t_strategy(3.0), p in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let a = phi_diag(&t);
        let b = phi_diag(&t.permuted(perms[p]));
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn phi_diag_matches_product_form(t in t_strategy(2.0)) {
        let tt = t.t();
        let want = tt.iter().map(|x| (4.0 * x).exp()).sum::<f64>() * tt.iter().map(|x| (-4.0 * x).exp()).sum::<f64>();
        prop_assert!((ln_phi_diag(&t).exp() - want).abs() <= 1e-12 * want);
        prop_assert!((tt.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn rho_is_linear(s in t_strategy(2.0), t in t_strategy(2.0), i in 0usize..3, id in 0usize..7) {
        let spec = ParabolicSpec::named(ParabolicId::ALL[id]);
        let tag = tag_of(i);
        let lhs = rho(&spec, &(s + t), tag);
        let rhs = rho(&spec, &s, tag) + rho(&spec, &t, tag);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn quadrature_result_invariants(a in 0.1f64..10.0, b in 0.01f64..100.0, rel in 1e-10f64..1e-4) {
        let cfg = QuadConfig::default().with_rel_tol(rel);
        let r = integrate_half_line(|s| a * (-b * s * s).exp(), &cfg);
        let want = a * std::f64::consts::PI.sqrt() / (2.0 * b.sqrt());
        prop_assert!(r.err_est >= 0.0);
        prop_assert!(r.converged);
        prop_assert!(r.err_est <= (rel * r.value.abs()).max(cfg.abs_tol));
        prop_assert!((r.value - want).abs() <= 10.0 * rel * want);
    }

    #[test]
    fn fit_validation_matches_rows(ratios in prop::collection::vec(0.01f64..10.0, 2..40)) {
        let rows: Vec<Row> = ratios.iter().map(|x| Row::new(&[("x", *x)], *x, 1.0, true)).collect();
        let fit = Fit::of(&rows);
        let half = rows.len().div_ceil(2);
        let expected = rows[half..].iter().all(|r| r.lhs <= HEADROOM * fit.c * r.rhs);
        prop_assert_eq!(fit.validated, expected);
        prop_assert!(rows[..half].iter().all(|r| r.ratio <= fit.c));
    }

    #[test]
    fn shell_slope_recovers_power(gamma in -0.5f64..0.9) {
        let edges = geometric_edges(1.0, 1e3, 16);
        // density c²·ry^{γ−1} on every shell
        let g = shell_scan(|ry, rz| (gamma - 4.0) * ry.ln() - 3.0 * rz.ln(), FieldTag::H, &edges, &QuadConfig::default()).unwrap();
        prop_assert!((g.fitted_slope - gamma).abs() <= 2.0 * g.slope_std_err + 1e-6, "{} vs {gamma}", g.fitted_slope);
        prop_assert!(g.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lemma_iii_decreases_in_kappa2(k1 in -3.0f64..3.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p = |k2: f64| LemmaParams { part: LemmaPart::Iii, kappa1: 10f64.powf(k1), kappa2: 10f64.powf(k2), sign: 1.0, r: 4.0, r1: 0.0 };
        let cfg = QuadConfig::default();
        let x = lemma_lhs(&p(lo), &cfg).unwrap();
        let y = lemma_lhs(&p(hi), &cfg).unwrap();
        prop_assert!(x.converged && y.converged);
        prop_assert!(x.value >= y.value * (1.0 - 1e-7));
        prop_assert!(p(lo).rhs() > 0.0);
    }

    #[test]
    fn truncation_is_monotone(t in t_strategy(1.0), u in 2.0f64..20.0) {
        let tf = TestFunction::schwartz(FieldTag::R, 5.0);
        let cfg = QuadConfig::default().with_rel_tol(1e-9);
        let a = radon_q1_truncated(&t, &tf, FieldTag::R, u, &cfg);
        let b = radon_q1_truncated(&t, &tf, FieldTag::R, 2.0 * u, &cfg);
        prop_assert!(b.value >= a.value * (1.0 - 1e-8));
    }
}

#[test]
fn root_set_maps_are_involutions() {
    for s in catalog() {
        assert!(sigma_on_spec(&sigma_on_spec(&s)).same_roots(&s));
        assert!(conj_by_w0(&conj_by_w0(&s)).same_roots(&s));
    }
}
