//! The weight Φ(g) = ‖g σ(g)⁻¹‖²·‖σ(g) g⁻¹‖², its closed forms on the torus
//! and on a_t·N_Q, the minorants Φ₁, Φ₂ and the cutoffs M, L.
//!
//! Closed forms are evaluated as log-sum-exp over their monomials, so they
//! stay finite far beyond the range where Φ itself overflows.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::Mat3;
use crate::group::{sigma_inv, DiagVec};

/// Radii (|y|, |z|) of n_{y,z}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilCoords {
    pub ry: f64,
    pub rz: f64,
}

impl NilCoords {
    pub fn new(ry: f64, rz: f64) -> Self {
        NilCoords {
            ry: ry.abs(),
            rz: rz.abs(),
        }
    }
}

/// log Σ e^{xᵢ}, with −∞ entries allowed.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// 2·ln|x|.
fn ln_sq(x: f64) -> f64 {
    2.0 * x.abs().ln()
}

/// ln Φ(g) from the definition. The input is rescaled first, which leaves Φ
/// unchanged.
pub fn ln_phi_oracle(g: &Mat3) -> Result<f64> {
    let s = g.max_abs();
    let g = if s > 0.0 { g.scale(1.0 / s) } else { g.clone() };
    let gi = g.inverse()?;
    let si = sigma_inv(&g);
    let a = &g * &si;
    // σ(g) g⁻¹ = (g σ(g)⁻¹)⁻¹ = σ(g⁻¹)⁻¹ g⁻¹
    let b = &sigma_inv(&gi) * &gi;
    Ok(a.hs_norm_sq().ln() + b.hs_norm_sq().ln())
}

pub fn phi_oracle(g: &Mat3) -> Result<f64> {
    Ok(ln_phi_oracle(g)?.exp())
}

pub fn ln_phi_diag(t: &DiagVec) -> f64 {
    let t = t.t();
    log_sum_exp(&t.map(|x| 4.0 * x)) + log_sum_exp(&t.map(|x| -4.0 * x))
}

/// (Σ e^{4tᵢ})(Σ e^{−4tᵢ}); evaluated through logs once any |4tᵢ| > 80.
pub fn phi_diag(t: &DiagVec) -> f64 {
    let tt = t.t();
    if tt.iter().any(|x| 4.0 * x.abs() > 80.0) {
        return ln_phi_diag(t).exp();
    }
    tt.iter().map(|x| (4.0 * x).exp()).sum::<f64>() * tt.iter().map(|x| (-4.0 * x).exp()).sum::<f64>()
}

/// 3 + 2Σ_{i<j} cosh(4(tᵢ − tⱼ)).
pub fn phi_diag_cosh(t: &DiagVec) -> f64 {
    let [a, b, c] = t.t();
    3.0 + 2.0 * ((4.0 * (a - b)).cosh() + (4.0 * (a - c)).cosh() + (4.0 * (b - c)).cosh())
}

const LN2: f64 = std::f64::consts::LN_2;

/// ln Φ(a_t n_{y,z}) with d = 1 + |y|² − |z|² passed separately so callers
/// near the ridge |z|² = 1 + |y|² can supply it without cancellation.
fn ln_phi_nil_with(t: &DiagVec, ry: f64, rz: f64, d: f64) -> f64 {
    let [t1, t2, t3] = t.t();
    let (ly, lz) = (ry.ln(), rz.ln());
    let first = [
        4.0 * t1 + ln_sq((1.0 - rz) * (1.0 + rz)),
        4.0 * t2 + 2.0 * (1.0 + ry * ry).ln(),
        4.0 * t3,
        LN2 - 2.0 * t1 + 2.0 * ly,
        LN2 - 2.0 * t2 + 2.0 * lz,
        LN2 - 2.0 * t3 + 2.0 * (ly + lz),
    ];
    let second = [
        -4.0 * t1,
        -4.0 * t2,
        -4.0 * t3 + ln_sq(d),
        LN2 + 2.0 * t1 + 2.0 * ly,
        LN2 + 2.0 * t2 + 2.0 * lz,
    ];
    log_sum_exp(&first) + log_sum_exp(&second)
}

pub fn ln_phi_nil(t: &DiagVec, c: NilCoords) -> f64 {
    let d = (1.0 + c.ry * c.ry) - c.rz * c.rz;
    ln_phi_nil_with(t, c.ry, c.rz, d)
}

/// ln Φ(a_t n_{y,z}) in ridge coordinates |z| = v·√(1 + |y|²).
pub fn ln_phi_nil_ridge(t: &DiagVec, ry: f64, v: f64) -> f64 {
    let w = 1.0 + ry * ry;
    ln_phi_nil_with(t, ry, v * w.sqrt(), w * (1.0 - v) * (1.0 + v))
}

/// Φ(a_t n_{y,z}); depends on y, z only through their absolute values.
pub fn phi_nil(t: &DiagVec, c: NilCoords) -> f64 {
    ln_phi_nil(t, c).exp()
}

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// ln|1 − e^a|.
pub fn ln_abs_one_minus_exp(a: f64) -> f64 {
    if a > 0.0 {
        a + (-(-a).exp_m1()).ln()
    } else if a < 0.0 {
        (-a.exp_m1()).ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// ln|e^a − e^b|.
pub fn ln_abs_diff_exp(a: f64, b: f64) -> f64 {
    if a == b {
        return f64::NEG_INFINITY;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + ln_abs_one_minus_exp(lo - hi)
}

/// A real number stored as sign and log-magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn new(sign: f64, ln_abs: f64) -> Self {
        SignedLog { sign, ln_abs }
    }

    pub fn from_f64(x: f64) -> Self {
        SignedLog {
            sign: if x < 0.0 { -1.0 } else { 1.0 },
            ln_abs: x.abs().ln(),
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    pub fn mul(self, o: SignedLog) -> SignedLog {
        SignedLog::new(self.sign * o.sign, self.ln_abs + o.ln_abs)
    }

    pub fn neg(self) -> SignedLog {
        SignedLog::new(-self.sign, self.ln_abs)
    }

    pub fn add(self, o: SignedLog) -> SignedLog {
        if self.ln_abs == f64::NEG_INFINITY {
            return o;
        }
        if o.ln_abs == f64::NEG_INFINITY {
            return self;
        }
        if self.sign == o.sign {
            SignedLog::new(self.sign, log_sum_exp(&[self.ln_abs, o.ln_abs]))
        } else {
            let sign = if self.ln_abs >= o.ln_abs { self.sign } else { o.sign };
            SignedLog::new(sign, ln_abs_diff_exp(self.ln_abs, o.ln_abs))
        }
    }
}

/// ln Φ(a_t n_{y,z}) from ln|y|, ln|z|.
pub fn ln_phi_nil_log(t: &DiagVec, ly: f64, lz: f64) -> f64 {
    let w = softplus(2.0 * ly);
    ln_phi_nil_log_with(t, ly, lz, ln_abs_diff_exp(w, 2.0 * lz))
}

/// ln Φ(a_t n_{y,z}) from ln|y| and ln v, where |z| = v·√(1 + |y|²).
pub fn ln_phi_nil_ridge_log(t: &DiagVec, ly: f64, lv: f64) -> f64 {
    let w = softplus(2.0 * ly);
    ln_phi_nil_log_with(t, ly, lv + 0.5 * w, w + ln_abs_one_minus_exp(2.0 * lv))
}

/// As [`ln_phi_nil_log`] with ln|1 + |y|² − |z|²| supplied by the caller.
pub fn ln_phi_nil_log_with(t: &DiagVec, ly: f64, lz: f64, ln_abs_d: f64) -> f64 {
    let [t1, t2, t3] = t.t();
    let first = [
        4.0 * t1 + 2.0 * ln_abs_one_minus_exp(2.0 * lz),
        4.0 * t2 + 2.0 * softplus(2.0 * ly),
        4.0 * t3,
        LN2 - 2.0 * t1 + 2.0 * ly,
        LN2 - 2.0 * t2 + 2.0 * lz,
        LN2 - 2.0 * t3 + 2.0 * (ly + lz),
    ];
    let second = [
        -4.0 * t1,
        -4.0 * t2,
        -4.0 * t3 + 2.0 * ln_abs_d,
        LN2 + 2.0 * t1 + 2.0 * ly,
        LN2 + 2.0 * t2 + 2.0 * lz,
    ];
    log_sum_exp(&first) + log_sum_exp(&second)
}

/// ln Φ(a_t n) on N_{Q₃} from ln|a|, ln|b|.
pub fn ln_phi_q3_log(t: &DiagVec, la: f64, lb: f64) -> f64 {
    let [t1, t2, t3] = t.t();
    let s = log_sum_exp(&[2.0 * la, 2.0 * lb]);
    let first = [
        4.0 * t1 + 2.0 * ln_abs_one_minus_exp(s),
        LN2 - 2.0 * t3 + 2.0 * la,
        LN2 - 2.0 * t2 + 2.0 * lb,
        4.0 * t2,
        4.0 * t3,
    ];
    let second = [
        -4.0 * t1,
        LN2 + 2.0 * t3 + 2.0 * la,
        LN2 + 2.0 * t2 + 2.0 * lb,
        -4.0 * t2 + 2.0 * ln_abs_one_minus_exp(2.0 * la),
        -4.0 * t3 + 2.0 * ln_abs_one_minus_exp(2.0 * lb),
        LN2 + 2.0 * t1 + 2.0 * (la + lb),
    ];
    log_sum_exp(&first) + log_sum_exp(&second)
}

/// ln Φ(a_t u) over R for u = I + x E₁₂ + w E₁₃ + y E₂₃, with q = w − xy
/// (the (1,3) entry of −u⁻¹ up to sign) supplied by the caller.
pub fn ln_phi_p1_log(t: &DiagVec, x: SignedLog, y: SignedLog, w: SignedLog, q: SignedLog) -> f64 {
    let ridge = ln_abs_diff_exp(2.0 * q.ln_abs, softplus(2.0 * y.ln_abs));
    ln_phi_p1_log_with(t, x, y, w, q, ridge)
}

/// As [`ln_phi_p1_log`] with ln|q² − y² − 1| supplied by the caller.
pub fn ln_phi_p1_log_with(t: &DiagVec, x: SignedLog, y: SignedLog, w: SignedLog, q: SignedLog, ln_ridge: f64) -> f64 {
    let [t1, t2, t3] = t.t();
    let wx = log_sum_exp(&[2.0 * w.ln_abs, 2.0 * x.ln_abs]);
    let wy_x = w.mul(y).add(x);
    let qq = 2.0 * q.ln_abs;
    let xq_y = x.mul(q).add(y);
    let first = [
        4.0 * t1 + 2.0 * ln_abs_one_minus_exp(wx),
        LN2 - 2.0 * t3 + 2.0 * wy_x.ln_abs,
        LN2 - 2.0 * t2 + 2.0 * w.ln_abs,
        4.0 * t2 + 2.0 * softplus(2.0 * y.ln_abs),
        LN2 - 2.0 * t1 + 2.0 * y.ln_abs,
        4.0 * t3,
    ];
    let second = [
        -4.0 * t3 + 2.0 * ln_ridge,
        LN2 + 2.0 * t1 + 2.0 * xq_y.ln_abs,
        -4.0 * t2 + 2.0 * ln_abs_one_minus_exp(2.0 * x.ln_abs),
        LN2 + 2.0 * t2 + qq,
        LN2 + 2.0 * t3 + 2.0 * x.ln_abs,
        -4.0 * t1,
    ];
    log_sum_exp(&first) + log_sum_exp(&second)
}

/// [`ln_phi_p1_log_with`] in plain arithmetic, with the t-dependent
/// coefficients computed once. Valid while the coordinates stay within
/// e^{±LIN_RANGE}.
#[derive(Clone, Copy, Debug)]
pub struct P1Kernel {
    first: [f64; 6],
    second: [f64; 6],
}

/// Largest |ln| of a coordinate the plain-arithmetic kernel accepts.
pub const LIN_RANGE: f64 = 60.0;

impl P1Kernel {
    pub fn new(t: &DiagVec) -> Self {
        let [t1, t2, t3] = t.t();
        P1Kernel {
            first: [
                (4.0 * t1).exp(),
                2.0 * (-2.0 * t3).exp(),
                2.0 * (-2.0 * t2).exp(),
                (4.0 * t2).exp(),
                2.0 * (-2.0 * t1).exp(),
                (4.0 * t3).exp(),
            ],
            second: [
                (-4.0 * t3).exp(),
                2.0 * (2.0 * t1).exp(),
                (-4.0 * t2).exp(),
                2.0 * (2.0 * t2).exp(),
                2.0 * (2.0 * t3).exp(),
                (-4.0 * t1).exp(),
            ],
        }
    }

    /// ln Φ from plain x, y, w, q and |q² − y² − 1|.
    pub fn ln_phi(&self, x: f64, y: f64, w: f64, q: f64, ridge: f64) -> f64 {
        let c = &self.first;
        let d = &self.second;
        let (x2, y2, w2, q2) = (x * x, y * y, w * w, q * q);
        let a = 1.0 - w2 - x2;
        let b = w * y + x;
        let e = 1.0 + y2;
        let first = c[0] * a * a + c[1] * b * b + c[2] * w2 + c[3] * e * e + c[4] * y2 + c[5];
        let f = x * q + y;
        let g = 1.0 - x2;
        let second = d[0] * ridge * ridge + d[1] * f * f + d[2] * g * g + d[3] * q2 + d[4] * x2 + d[5];
        first.ln() + second.ln()
    }
}

/// ln Φ(a_t n) for n = I + a E₁₂ + b E₁₃ ∈ N_{Q₃}, with (ra, rb) = (|a|, |b|).
pub fn ln_phi_q3(t: &DiagVec, ra: f64, rb: f64) -> f64 {
    let [t1, t2, t3] = t.t();
    let (la, lb) = (ra.ln(), rb.ln());
    let first = [
        4.0 * t1 + ln_sq(1.0 - ra * ra - rb * rb),
        LN2 - 2.0 * t3 + 2.0 * la,
        LN2 - 2.0 * t2 + 2.0 * lb,
        4.0 * t2,
        4.0 * t3,
    ];
    let second = [
        -4.0 * t1,
        LN2 + 2.0 * t3 + 2.0 * la,
        LN2 + 2.0 * t2 + 2.0 * lb,
        -4.0 * t2 + ln_sq((1.0 - ra) * (1.0 + ra)),
        -4.0 * t3 + ln_sq((1.0 - rb) * (1.0 + rb)),
        LN2 + 2.0 * t1 + 2.0 * (la + lb),
    ];
    log_sum_exp(&first) + log_sum_exp(&second)
}

pub fn phi_q3(t: &DiagVec, ra: f64, rb: f64) -> f64 {
    ln_phi_q3(t, ra, rb).exp()
}

fn second_factor_lower(t: &DiagVec, c: NilCoords) -> f64 {
    let [t1, t2, t3] = t.t();
    let d = (1.0 + c.ry * c.ry) - c.rz * c.rz;
    (-4.0 * t1).exp() + (-4.0 * t2).exp() + (-4.0 * t3).exp() * d * d
}

/// Φ₁ = (e^{4t₂}(1+|y|²)² + e^{4t₃})·(e^{−4t₁} + e^{−4t₂} + e^{−4t₃}(1+|y|²−|z|²)²).
pub fn phi_lower1(t: &DiagVec, c: NilCoords) -> f64 {
    let [_, t2, t3] = t.t();
    let w = 1.0 + c.ry * c.ry;
    ((4.0 * t2).exp() * w * w + (4.0 * t3).exp()) * second_factor_lower(t, c)
}

/// Φ₂ = (e^{4t₁}(1−|z|²)² + e^{4t₃})·(e^{−4t₁} + e^{−4t₂} + e^{−4t₃}(1+|y|²−|z|²)²).
pub fn phi_lower2(t: &DiagVec, c: NilCoords) -> f64 {
    let [t1, _, t3] = t.t();
    let u = 1.0 - c.rz * c.rz;
    ((4.0 * t1).exp() * u * u + (4.0 * t3).exp()) * second_factor_lower(t, c)
}

/// M(x) = max(9, x).
pub fn m_func(x: f64) -> f64 {
    x.max(9.0)
}

/// L(x) = log M(x).
pub fn l_func(x: f64) -> f64 {
    m_func(x).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldTag, Scalar};
    use crate::group::{a_exp, n_yz, sigma};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn oracle_examples() {
        for tag in FieldTag::ALL {
            assert!(rel(phi_oracle(&Mat3::identity(tag)).unwrap(), 9.0) < 1e-14);
            let t = DiagVec::new([1.0, 0.0, -1.0]);
            let want = 3.0 + 4.0 * 4f64.cosh() + 2.0 * 8f64.cosh();
            assert!(rel(phi_oracle(&a_exp(&t, tag)).unwrap(), want) < 1e-12);
        }
        assert!((phi_diag(&DiagVec::new([1.0, 0.0, -1.0])) - 3093.19).abs() < 0.01);
    }

    #[test]
    fn diag_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let t = DiagVec::new([rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0]);
            assert!(rel(phi_diag(&t), phi_diag_cosh(&t)) < 1e-12);
            assert!(rel(ln_phi_diag(&t), phi_diag(&t).ln()) < 1e-12);
        }
        let big = DiagVec::new([100.0, 0.0, -100.0]);
        assert!(rel(ln_phi_diag(&big), 800.0) < 1e-12);
        assert!(phi_diag(&big).is_infinite());
    }

    #[test]
    fn nil_examples() {
        assert!(rel(phi_nil(&DiagVec::zero(), NilCoords::new(0.0, 0.0)), 9.0) < 1e-14);
        assert!(rel(phi_nil(&DiagVec::zero(), NilCoords::new(1.0, 0.0)), 64.0) < 1e-14);
        let n = n_yz(Scalar::one(FieldTag::R), Scalar::zero(FieldTag::R)).unwrap();
        assert!(rel(phi_oracle(&n).unwrap(), 64.0) < 1e-13);
    }

    #[test]
    fn nil_closed_form_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for tag in FieldTag::ALL {
            for _ in 0..300 {
                let t = DiagVec::new([
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                ]);
                let y = Scalar::gaussian(tag, &mut rng).scale(rng.random_range(0.1..3.0));
                let z = Scalar::gaussian(tag, &mut rng).scale(rng.random_range(0.1..3.0));
                let g = a_exp(&t, tag) * n_yz(y, z).unwrap();
                let want = ln_phi_oracle(&g).unwrap();
                let got = ln_phi_nil(&t, NilCoords::new(y.abs(), z.abs()));
                assert!(rel(got.exp(), want.exp()) < 1e-9, "{tag} {got} {want}");
                let v = z.abs() / (1.0 + y.norm_sq()).sqrt();
                assert!(rel(ln_phi_nil_ridge(&t, y.abs(), v), want) < 1e-10);
            }
        }
    }

    #[test]
    fn q3_closed_form_matches_oracle() {
        use crate::group::{nil_elem, ParabolicId, ParabolicSpec, RootIdx};
        use std::collections::BTreeMap;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q3 = ParabolicSpec::named(ParabolicId::Q3);
        for tag in FieldTag::ALL {
            for _ in 0..300 {
                let t = DiagVec::new([
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                ]);
                let a = Scalar::gaussian(tag, &mut rng);
                let b = Scalar::gaussian(tag, &mut rng);
                let coords = BTreeMap::from([
                    (RootIdx::new(1, 2).unwrap(), a),
                    (RootIdx::new(1, 3).unwrap(), b),
                ]);
                let g = a_exp(&t, tag) * nil_elem(&q3, &coords, tag).unwrap();
                let want = phi_oracle(&g).unwrap();
                assert!(rel(phi_q3(&t, a.abs(), b.abs()), want) < 1e-9);
            }
        }
    }

    #[test]
    fn sigma_invariance_and_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for tag in FieldTag::ALL {
            for _ in 0..300 {
                let mut g = Mat3::zeros(tag);
                for i in 0..3 {
                    for j in 0..3 {
                        g.set(i, j, Scalar::gaussian(tag, &mut rng)).unwrap();
                    }
                }
                let Ok(p) = phi_oracle(&g) else { continue };
                assert!(p >= 9.0 - 1e-9);
                let ps = phi_oracle(&sigma(&g).unwrap()).unwrap();
                assert!(rel(ps, p) < 1e-9);
            }
        }
    }

    #[test]
    fn p1_kernel_matches_log_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let t = DiagVec::new([
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ]);
            let k = P1Kernel::new(&t);
            let mut r = || rng.random_range(-8.0..8.0f64).exp() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let (x, y, w) = (r(), r(), r());
            let q = w - x * y;
            let want = ln_phi_p1_log(&t, SignedLog::from_f64(x), SignedLog::from_f64(y), SignedLog::from_f64(w), SignedLog::from_f64(q));
            let got = k.ln_phi(x, y, w, q, (q * q - y * y - 1.0).abs());
            assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} {want}");
        }
    }

    #[test]
    fn weyl_invariance() {
        let t = DiagVec::new([0.7, -0.2, -0.5]);
        let base = phi_diag(&t);
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            assert!(rel(phi_diag(&t.permuted(perm)), base) < 1e-12);
        }
    }

    #[test]
    fn minorants() {
        let c = NilCoords::new(0.0, 0.0);
        assert!(rel(phi_lower1(&DiagVec::zero(), c), 6.0) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let t = DiagVec::new([
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ]);
            let c = NilCoords::new(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0));
            let p = phi_nil(&t, c);
            assert!(p >= phi_lower1(&t, c) * (1.0 - 1e-12));
            assert!(p >= phi_lower2(&t, c) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn log_domain_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..2000 {
            let t = DiagVec::new([
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ]);
            let (ry, rz) = (rng.random_range(0.01..5.0), rng.random_range(0.01..5.0));
            let want = ln_phi_nil(&t, NilCoords::new(ry, rz));
            assert!((ln_phi_nil_log(&t, ry.ln(), rz.ln()) - want).abs() < 1e-9 * want);
            let v = rz / (1.0 + ry * ry).sqrt();
            assert!((ln_phi_nil_ridge_log(&t, ry.ln(), v.ln()) - want).abs() < 1e-9 * want);
            let want = ln_phi_q3(&t, ry, rz);
            assert!((ln_phi_q3_log(&t, ry.ln(), rz.ln()) - want).abs() < 1e-9 * want);
        }
        // far beyond the range of Φ itself
        let big = ln_phi_nil_log(&DiagVec::zero(), 1000.0, 1000.5);
        assert!(big.is_finite() && big > 5000.0);
    }

    #[test]
    fn p1_closed_form_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let t = DiagVec::new([
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            ]);
            let (x, y, w): (f64, f64, f64) = (
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let u = Mat3::from_real(FieldTag::R, [[1.0, x, w], [0.0, 1.0, y], [0.0, 0.0, 1.0]]);
            let want = ln_phi_oracle(&(a_exp(&t, FieldTag::R) * u)).unwrap();
            let sl = SignedLog::from_f64;
            let got = ln_phi_p1_log(&t, sl(x), sl(y), sl(w), sl(w - x * y));
            assert!((got - want).abs() < 1e-9 * want, "{got} {want}");
        }
    }

    #[test]
    fn signed_log_arithmetic() {
        let sl = SignedLog::from_f64;
        for (a, b) in [(2.0, 3.0), (-2.0, 3.0), (2.0, -3.0), (-5.0, -0.5), (1e-3, -1e-3 * 1.5)] {
            assert!((sl(a).add(sl(b)).to_f64() - (a + b)).abs() < 1e-13);
            assert!((sl(a).mul(sl(b)).to_f64() - a * b).abs() < 1e-13);
        }
        assert_eq!(sl(2.0).add(sl(-2.0)).ln_abs, f64::NEG_INFINITY);
    }

    #[test]
    fn cutoffs() {
        assert_eq!(m_func(0.0), 9.0);
        assert_eq!(m_func(100.0), 100.0);
        assert_eq!(l_func(0.0), 9f64.ln());
        assert_eq!(l_func(9.0), l_func(5.0));
    }
}
