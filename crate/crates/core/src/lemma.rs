//! The one-dimensional integral inequalities in κ₁, κ₂ and their
//! right-hand sides (constants omitted).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phi::{l_func, ln_abs_one_minus_exp, log_sum_exp, m_func, softplus};
use crate::quadrature::{integrate_half_line_ln, QuadConfig, QuadResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LemmaPart {
    I,
    Ii,
    Iii,
    Iv,
}

impl LemmaPart {
    pub const ALL: [LemmaPart; 4] = [LemmaPart::I, LemmaPart::Ii, LemmaPart::Iii, LemmaPart::Iv];

    pub fn name(&self) -> &'static str {
        match self {
            LemmaPart::I => "i",
            LemmaPart::Ii => "ii",
            LemmaPart::Iii => "iii",
            LemmaPart::Iv => "iv",
        }
    }

    /// Parts whose integrand carries s² ± 1.
    pub fn has_sign(&self) -> bool {
        matches!(self, LemmaPart::I | LemmaPart::Ii)
    }
}

impl std::fmt::Display for LemmaPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LemmaPart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaPart::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown lemma part '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub part: LemmaPart,
    pub kappa1: f64,
    pub kappa2: f64,
    /// +1 or −1 in s² ± 1; ignored by (iii), (iv).
    pub sign: f64,
    pub r: f64,
    /// Split r = r₁ + r₂ of part (i).
    pub r1: f64,
}

impl LemmaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("{m}: {self:?}")));
        if !(self.kappa1 > 0.0 && self.kappa2 > 0.0) {
            return bad("κ₁, κ₂ must be positive");
        }
        if self.part.has_sign() && self.sign.abs() != 1.0 {
            return bad("sign must be ±1");
        }
        match self.part {
            LemmaPart::I if !(self.r > 2.0 && self.r1 >= 2.0 && self.r - self.r1 >= 0.0) => {
                bad("part (i) needs r > 2, r₁ ≥ 2, r₂ = r − r₁ ≥ 0")
            }
            LemmaPart::Ii | LemmaPart::Iii | LemmaPart::Iv if self.r <= 2.0 => bad("r must exceed 2"),
            _ => Ok(()),
        }
    }

    fn quartic(&self, s: f64) -> f64 {
        let q = s * s + self.sign;
        q * q
    }

    /// The integrand of the left-hand side at s > 0.
    pub fn integrand(&self, s: f64) -> f64 {
        let (k1, k2, r) = (self.kappa1, self.kappa2, self.r);
        match self.part {
            LemmaPart::I => {
                let x = k1 * self.quartic(s) + k2;
                m_func(x).powf(-0.25) * l_func(x).powf(-r)
            }
            LemmaPart::Ii => {
                let q = (s * s + self.sign).abs();
                if q == 0.0 {
                    return 0.0;
                }
                q.powf(-0.5) * l_func(k1 * q * q).powf(-r)
            }
            LemmaPart::Iii => {
                let x = k1 * s * s + k2;
                m_func(x).powf(-0.5) * l_func(x).powf(-r)
            }
            LemmaPart::Iv => {
                let x = k1 * s * s + k2;
                x.powf(-0.5) * l_func(x).powf(-r)
            }
        }
    }

    /// ln of the integrand at s = e^u, without overflow for large u.
    pub fn ln_integrand(&self, u: f64) -> f64 {
        let ln9 = 9f64.ln();
        let ln_m = |lx: f64| lx.max(ln9);
        let ln_l = |lx: f64| lx.max(ln9).ln();
        let (lk1, lk2, r) = (self.kappa1.ln(), self.kappa2.ln(), self.r);
        // ln|s² ± 1|
        let lq = || {
            if self.sign > 0.0 {
                softplus(2.0 * u)
            } else {
                ln_abs_one_minus_exp(2.0 * u)
            }
        };
        match self.part {
            LemmaPart::I => {
                let lx = log_sum_exp(&[lk1 + 2.0 * lq(), lk2]);
                -0.25 * ln_m(lx) - r * ln_l(lx)
            }
            LemmaPart::Ii => {
                let lq = lq();
                -0.5 * lq - r * ln_l(lk1 + 2.0 * lq)
            }
            LemmaPart::Iii => {
                let lx = log_sum_exp(&[lk1 + 2.0 * u, lk2]);
                -0.5 * ln_m(lx) - r * ln_l(lx)
            }
            LemmaPart::Iv => {
                let lx = log_sum_exp(&[lk1 + 2.0 * u, lk2]);
                -0.5 * lx - r * ln_l(lx)
            }
        }
    }

    /// Kinks of M and the singular point s = 1.
    pub fn breaks(&self) -> Vec<f64> {
        let (k1, k2) = (self.kappa1, self.kappa2);
        let mut b = Vec::new();
        let mut push_sq = |s2: f64| {
            if s2 > 0.0 && s2.is_finite() {
                b.push(s2.sqrt());
            }
        };
        match self.part {
            LemmaPart::I | LemmaPart::Ii => {
                let q = if self.part == LemmaPart::I {
                    if k2 < 9.0 {
                        ((9.0 - k2) / k1).sqrt()
                    } else {
                        f64::NAN
                    }
                } else {
                    3.0 / k1.sqrt()
                };
                if q.is_finite() {
                    push_sq(q - self.sign);
                    if self.sign < 0.0 {
                        push_sq(1.0 - q);
                    }
                }
                if self.sign < 0.0 {
                    b.push(1.0);
                }
            }
            LemmaPart::Iii | LemmaPart::Iv => {
                if k2 < 9.0 {
                    push_sq((9.0 - k2) / k1);
                }
            }
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Right-hand side without the constant.
    pub fn rhs(&self) -> f64 {
        let (k1, k2, r) = (self.kappa1, self.kappa2, self.r);
        match self.part {
            LemmaPart::I => k1.powf(-0.25) * l_func(k1).powf(1.0 - self.r1) * l_func(k2).powf(-(r - self.r1)),
            LemmaPart::Ii => l_func(1.0 / k1) * l_func(k1).powf(1.0 - r),
            LemmaPart::Iii => k1.powf(-0.5) * l_func(k2).powf(2.0 - r),
            LemmaPart::Iv => k1.powf(-0.5) * l_func(1.0 / k2) * l_func(k2).powf(2.0 - r),
        }
    }
}

/// The left-hand side by half-line quadrature.
pub fn lemma_lhs(p: &LemmaParams, cfg: &QuadConfig) -> Result<QuadResult> {
    p.validate()?;
    cfg.validate()?;
    Ok(integrate_half_line_ln(|u| p.ln_integrand(u), &p.breaks(), cfg))
}

/// `count` points spaced evenly in log between 10^{−decades} and 10^{decades}.
pub fn log_grid(decades: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![1.0];
    }
    (0..count)
        .map(|i| 10f64.powf(-decades + 2.0 * decades * i as f64 / (count - 1) as f64))
        .collect()
}
