//! Scalars and 3×3 matrices over R, C and H.
//!
//! Every scalar is stored as four reals in the basis (1, i, j, k). Real and
//! complex scalars keep their trailing components at exactly zero, so the
//! Hamilton product serves all three fields. The tag is carried along only to
//! reject accidental mixing of fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldTag {
    R,
    C,
    H,
}

impl FieldTag {
    pub const ALL: [FieldTag; 3] = [FieldTag::R, FieldTag::C, FieldTag::H];

    /// k = dim_R F.
    pub fn real_dim(self) -> usize {
        match self {
            FieldTag::R => 1,
            FieldTag::C => 2,
            FieldTag::H => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldTag::R => "R",
            FieldTag::C => "C",
            FieldTag::H => "H",
        }
    }

    fn check(self, other: FieldTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::TagMismatch {
                left: self,
                right: other,
            })
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(FieldTag::R),
            "C" | "c" => Ok(FieldTag::C),
            "H" | "h" => Ok(FieldTag::H),
            _ => Err(Error::InvalidInput(format!("unknown field '{s}'"))),
        }
    }
}

/// An element of R, C or H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalar {
    tag: FieldTag,
    c: [f64; 4],
}

impl Scalar {
    /// Builds a scalar, dropping the components the field does not have.
    pub fn new(tag: FieldTag, coeffs: [f64; 4]) -> Self {
        let mut c = [0.0; 4];
        c[..tag.real_dim()].copy_from_slice(&coeffs[..tag.real_dim()]);
        Scalar { tag, c }
    }

    pub fn real(tag: FieldTag, x: f64) -> Self {
        Scalar {
            tag,
            c: [x, 0.0, 0.0, 0.0],
        }
    }

    pub fn zero(tag: FieldTag) -> Self {
        Self::real(tag, 0.0)
    }

    pub fn one(tag: FieldTag) -> Self {
        Self::real(tag, 1.0)
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.c
    }

    pub fn re(&self) -> f64 {
        self.c[0]
    }

    pub fn conj(self) -> Self {
        let [a, b, c, d] = self.c;
        Scalar {
            tag: self.tag,
            c: [a, -b, -c, -d],
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }

    pub fn abs(&self) -> f64 {
        let [a, b, c, d] = self.c;
        // hypot chain avoids overflow for large entries
        a.hypot(b).hypot(c.hypot(d))
    }

    pub fn scale(self, s: f64) -> Self {
        Scalar {
            tag: self.tag,
            c: self.c.map(|x| x * s),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    /// Two-sided inverse; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        let n = self.norm_sq();
        if n == 0.0 {
            None
        } else {
            Some(self.conj().scale(1.0 / n))
        }
    }

    /// Product with a tag check.
    pub fn checked_mul(self, rhs: Scalar) -> Result<Scalar> {
        self.tag.check(rhs.tag)?;
        Ok(self.hamilton(rhs))
    }

    fn hamilton(self, rhs: Scalar) -> Scalar {
        let [a1, b1, c1, d1] = self.c;
        let [a2, b2, c2, d2] = rhs.c;
        Scalar {
            tag: self.tag,
            c: [
                a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
            ],
        }
    }

    /// Standard Gaussian draw in every component the field has.
    pub fn gaussian<R: Rng + ?Sized>(tag: FieldTag, rng: &mut R) -> Self {
        let mut c = [0.0; 4];
        for x in c.iter_mut().take(tag.real_dim()) {
            *x = rng.sample(StandardNormal);
        }
        Scalar { tag, c }
    }
}

/// Panics on a tag mismatch; use [`Scalar::checked_mul`] for the fallible form.
impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.checked_mul(rhs).expect("scalar multiplication")
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.tag, rhs.tag, "scalar addition across fields");
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c) {
            *x += y;
        }
        Scalar { tag: self.tag, c }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.scale(-1.0)
    }
}

/// A 3×3 matrix over one of R, C, H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3 {
    tag: FieldTag,
    e: [[Scalar; 3]; 3],
}

impl Mat3 {
    pub fn zeros(tag: FieldTag) -> Self {
        Mat3 {
            tag,
            e: [[Scalar::zero(tag); 3]; 3],
        }
    }

    pub fn identity(tag: FieldTag) -> Self {
        Self::diag_real(tag, [1.0; 3])
    }

    pub fn diag_real(tag: FieldTag, d: [f64; 3]) -> Self {
        let mut m = Self::zeros(tag);
        for (i, x) in d.into_iter().enumerate() {
            m.e[i][i] = Scalar::real(tag, x);
        }
        m
    }

    pub fn from_real(tag: FieldTag, rows: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zeros(tag);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.e[i][j] = Scalar::real(tag, x);
            }
        }
        m
    }

    /// Fails if any entry carries a different tag.
    pub fn from_entries(tag: FieldTag, e: [[Scalar; 3]; 3]) -> Result<Self> {
        for row in &e {
            for s in row {
                tag.check(s.tag)?;
            }
        }
        Ok(Mat3 { tag, e })
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    /// Entry (i, j), zero-based.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.e[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Scalar) -> Result<()> {
        self.tag.check(s.tag)?;
        self.e[i][j] = s;
        Ok(())
    }

    pub fn checked_mul(&self, rhs: &Mat3) -> Result<Mat3> {
        self.tag.check(rhs.tag)?;
        let mut out = Mat3::zeros(self.tag);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = [0.0; 4];
                for k in 0..3 {
                    let p = self.e[i][k].hamilton(rhs.e[k][j]);
                    for (a, x) in acc.iter_mut().zip(p.c) {
                        *a += x;
                    }
                }
                out.e[i][j] = Scalar { tag: self.tag, c: acc };
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.e[i][j] = self.e[j][i].conj();
            }
        }
        out
    }

    /// tr(A A†) = Σ |a_ij|².
    pub fn hs_norm_sq(&self) -> f64 {
        self.e.iter().flatten().map(Scalar::norm_sq).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        for x in out.e.iter_mut().flatten() {
            *x = x.scale(s);
        }
        out
    }

    pub fn checked_add(&self, rhs: &Mat3) -> Result<Mat3> {
        self.tag.check(rhs.tag)?;
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.e[i][j] = self.e[i][j] + rhs.e[i][j];
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &Mat3) -> Result<Mat3> {
        self.checked_add(&rhs.scale(-1.0))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    ///
    /// Only left multiplications are applied to rows, which keeps the
    /// elimination valid over the non-commutative quaternions.
    pub fn inverse(&self) -> Result<Mat3> {
        let scale = self.hs_norm();
        let mut a = self.e;
        let mut inv = Mat3::identity(self.tag).e;
        for col in 0..3 {
            let (piv_row, piv_abs) = (col..3)
                .map(|r| (r, a[r][col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_abs >= 1e-13 * scale) || scale == 0.0 {
                return Err(Error::Singular {
                    pivot: piv_abs,
                    scale,
                });
            }
            a.swap(col, piv_row);
            inv.swap(col, piv_row);
            let p_inv = a[col][col].inv().expect("nonzero pivot");
            for j in 0..3 {
                a[col][j] = p_inv.hamilton(a[col][j]);
                inv[col][j] = p_inv.hamilton(inv[col][j]);
            }
            for r in 0..3 {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let m = a[r][col];
                for j in 0..3 {
                    a[r][j] = a[r][j] - m.hamilton(a[col][j]);
                    inv[r][j] = inv[r][j] - m.hamilton(inv[col][j]);
                }
            }
        }
        Ok(Mat3 { tag: self.tag, e: inv })
    }

    /// Determinant over the commutative fields R and C.
    pub fn det(&self) -> Result<Scalar> {
        if self.tag == FieldTag::H {
            return Err(Error::NoDeterminant);
        }
        let e = &self.e;
        let minor = |a: usize, b: usize, c: usize, d: usize| {
            e[1][a].hamilton(e[2][b]) - e[1][c].hamilton(e[2][d])
        };
        Ok(e[0][0].hamilton(minor(1, 2, 2, 1)) - e[0][1].hamilton(minor(0, 2, 2, 0))
            + e[0][2].hamilton(minor(0, 1, 1, 0)))
    }

    /// Haar-like random element of the compact group: SO(3), SU(3) or Sp(3).
    ///
    /// Gram–Schmidt on the columns of a Gaussian matrix, with H acting on the
    /// right. For R and C one column is rescaled so that det = 1.
    pub fn random_unitary(tag: FieldTag, seed: u64) -> Mat3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_unitary_with(tag, &mut rng)
    }

    pub fn random_unitary_with<R: Rng + ?Sized>(tag: FieldTag, rng: &mut R) -> Mat3 {
        loop {
            let mut cols = [[Scalar::zero(tag); 3]; 3];
            for col in cols.iter_mut() {
                for x in col.iter_mut() {
                    *x = Scalar::gaussian(tag, rng);
                }
            }
            if let Some(q) = gram_schmidt(cols) {
                let mut m = Mat3::zeros(tag);
                for (j, col) in q.iter().enumerate() {
                    for (i, x) in col.iter().enumerate() {
                        m.e[i][j] = *x;
                    }
                }
                if tag != FieldTag::H {
                    // det of a unitary matrix has modulus one
                    let d = m.det().expect("commutative field");
                    let fix = d.conj();
                    for i in 0..3 {
                        m.e[i][0] = m.e[i][0].hamilton(fix);
                    }
                }
                return m;
            }
        }
    }

    /// Matrix exponential by scaling and squaring with a Taylor series.
    ///
    /// Padé approximants need commuting rational functions; the plain series
    /// is valid in any associative normed algebra, including Mat(3, H).
    pub fn exp(&self, tol: f64) -> Mat3 {
        let norm = self.hs_norm();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let y = self.scale(0.5f64.powi(squarings as i32));
        let mut sum = Mat3::identity(self.tag);
        let mut term = Mat3::identity(self.tag);
        let tol = tol.max(f64::EPSILON) / (1 + squarings) as f64;
        for n in 1..60 {
            term = term.checked_mul(&y).expect("same tag").scale(1.0 / n as f64);
            sum = sum.checked_add(&term).expect("same tag");
            if term.hs_norm() <= tol * sum.hs_norm() * 1e-2 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.checked_mul(&sum).expect("same tag");
        }
        sum
    }

    /// Largest entrywise magnitude.
    pub fn max_abs(&self) -> f64 {
        self.e.iter().flatten().map(Scalar::abs).fold(0.0, f64::max)
    }
}

/// Panics on a tag mismatch; use [`Mat3::checked_mul`] for the fallible form.
impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        self.checked_mul(&rhs).expect("matrix multiplication")
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: &Mat3) -> Mat3 {
        self.checked_mul(rhs).expect("matrix multiplication")
    }
}

fn inner(u: &[Scalar; 3], v: &[Scalar; 3]) -> Scalar {
    let tag = u[0].tag;
    u.iter()
        .zip(v)
        .fold(Scalar::zero(tag), |acc, (a, b)| acc + a.conj().hamilton(*b))
}

fn gram_schmidt(mut cols: [[Scalar; 3]; 3]) -> Option<[[Scalar; 3]; 3]> {
    for j in 0..3 {
        for i in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let q = &done[i];
            let v = &mut rest[0];
            let c = inner(q, v);
            for k in 0..3 {
                v[k] = v[k] - q[k].hamilton(c);
            }
        }
        let n = cols[j].iter().map(Scalar::norm_sq).sum::<f64>().sqrt();
        if n < 1e-6 {
            return None;
        }
        for x in cols[j].iter_mut() {
            *x = x.scale(1.0 / n);
        }
    }
    Some(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Scalar {
        Scalar::new(FieldTag::H, [a, b, c, d])
    }

    fn random_mat(tag: FieldTag, rng: &mut ChaCha8Rng) -> Mat3 {
        let mut m = Mat3::zeros(tag);
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, Scalar::gaussian(tag, rng)).unwrap();
            }
        }
        m
    }

    #[test]
    fn hamilton_relations() {
        let (i, j, k) = (q(0., 1., 0., 0.), q(0., 0., 1., 0.), q(0., 0., 0., 1.));
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
        assert_eq!(i * i, q(-1., 0., 0., 0.));
    }

    #[test]
    fn complex_product() {
        let a = Scalar::new(FieldTag::C, [1., 1., 0., 0.]);
        let b = Scalar::new(FieldTag::C, [1., -1., 0., 0.]);
        assert_eq!(a * b, Scalar::real(FieldTag::C, 2.0));
    }

    #[test]
    fn trailing_components_dropped() {
        let s = Scalar::new(FieldTag::C, [1., 2., 3., 4.]);
        assert_eq!(s.coeffs(), [1., 2., 0., 0.]);
        let r = Scalar::new(FieldTag::R, [1., 2., 3., 4.]);
        assert_eq!(r.coeffs(), [1., 0., 0., 0.]);
    }

    #[test]
    fn tag_mismatch_is_an_error() {
        let a = Scalar::one(FieldTag::R);
        let b = Scalar::one(FieldTag::H);
        assert!(matches!(a.checked_mul(b), Err(Error::TagMismatch { .. })));
        let m = Mat3::identity(FieldTag::C);
        let n = Mat3::identity(FieldTag::H);
        assert!(m.checked_mul(&n).is_err());
    }

    #[test]
    fn norm_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let x = Scalar::gaussian(FieldTag::H, &mut rng);
            let y = Scalar::gaussian(FieldTag::H, &mut rng);
            let lhs = (x * y).abs();
            let rhs = x.abs() * y.abs();
            assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }
    }

    #[test]
    fn conj_reverses_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = Scalar::gaussian(FieldTag::H, &mut rng);
            let y = Scalar::gaussian(FieldTag::H, &mut rng);
            let d = (x * y).conj() - y.conj() * x.conj();
            assert!(d.abs() < 1e-14);
        }
    }

    #[test]
    fn hs_norm_examples() {
        for tag in FieldTag::ALL {
            assert_eq!(Mat3::identity(tag).hs_norm_sq(), 3.0);
            let e = std::f64::consts::E;
            let a = Mat3::diag_real(tag, [e * e, 1.0, 1.0 / (e * e)]);
            let want = e.powi(4) + 1.0 + e.powi(-4);
            assert!((a.hs_norm_sq() - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn dagger_is_involutive_and_reverses_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut a = Mat3::identity(FieldTag::H);
        a.set(0, 2, q(0., 0., 1., 0.)).unwrap();
        assert_eq!(a.dagger().dagger(), a);
        for tag in FieldTag::ALL {
            let a = random_mat(tag, &mut rng);
            let b = random_mat(tag, &mut rng);
            let lhs = (a * b).dagger();
            let rhs = b.dagger() * a.dagger();
            assert!(lhs.checked_sub(&rhs).unwrap().hs_norm() <= 1e-14 * lhs.hs_norm());
        }
    }

    #[test]
    fn inverse_examples() {
        for tag in FieldTag::ALL {
            let y = Scalar::gaussian(tag, &mut ChaCha8Rng::seed_from_u64(1));
            let z = Scalar::gaussian(tag, &mut ChaCha8Rng::seed_from_u64(2));
            let mut n = Mat3::identity(tag);
            n.set(0, 2, z).unwrap();
            n.set(1, 2, y).unwrap();
            let mut want = Mat3::identity(tag);
            want.set(0, 2, -z).unwrap();
            want.set(1, 2, -y).unwrap();
            let got = n.inverse().unwrap();
            assert!(got.checked_sub(&want).unwrap().hs_norm() < 1e-14);

            let a = Mat3::diag_real(tag, [2.0, 0.5, 1.0]);
            let ai = a.inverse().unwrap();
            assert_eq!(ai, Mat3::diag_real(tag, [0.5, 2.0, 1.0]));
        }
    }

    #[test]
    fn inverse_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for tag in FieldTag::ALL {
            for _ in 0..200 {
                let a = random_mat(tag, &mut rng);
                let ai = a.inverse().unwrap();
                let prod = &a * &ai;
                let err = prod.checked_sub(&Mat3::identity(tag)).unwrap().hs_norm();
                assert!(err <= 1e-10 * a.hs_norm() * ai.hs_norm(), "{err}");
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Mat3::from_real(FieldTag::R, [[1., 2., 3.], [2., 4., 6.], [0., 1., 1.]]);
        assert!(matches!(a.inverse(), Err(Error::Singular { .. })));
        assert!(Mat3::zeros(FieldTag::H).inverse().is_err());
    }

    #[test]
    fn random_unitary_properties() {
        for tag in FieldTag::ALL {
            for seed in 0..50 {
                let u = Mat3::random_unitary(tag, seed);
                let g = (u.dagger() * u).checked_sub(&Mat3::identity(tag)).unwrap();
                assert!(g.hs_norm_sq() <= 1e-20);
                let ui = u.inverse().unwrap();
                assert!(ui.checked_sub(&u.dagger()).unwrap().hs_norm() < 1e-12);
                if tag != FieldTag::H {
                    let d = u.det().unwrap();
                    assert!((d.re() - 1.0).abs() < 1e-12 && d.coeffs()[1].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unitary_preserves_hs_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tag in FieldTag::ALL {
            let a = random_mat(tag, &mut rng);
            let u = Mat3::random_unitary_with(tag, &mut rng);
            let n0 = a.hs_norm_sq();
            assert!(((u * a).hs_norm_sq() - n0).abs() <= 1e-10 * n0);
        }
    }

    #[test]
    fn exp_examples() {
        for tag in FieldTag::ALL {
            assert_eq!(Mat3::zeros(tag).exp(1e-15), Mat3::identity(tag));
            let t = [0.7, -1.9, 1.2];
            let got = Mat3::diag_real(tag, t).exp(1e-15);
            let want = Mat3::diag_real(tag, t.map(f64::exp));
            let err = got.checked_sub(&want).unwrap().hs_norm() / want.hs_norm();
            assert!(err < 1e-13, "{err}");
        }
    }

    #[test]
    fn exp_of_quaternion_rotation_generator() {
        // exp(theta * i) = cos theta + i sin theta on the diagonal
        let th = 2.5;
        let mut x = Mat3::zeros(FieldTag::H);
        x.set(0, 0, q(0., th, 0., 0.)).unwrap();
        let e = x.exp(1e-15);
        let d = e.get(0, 0) - q(th.cos(), th.sin(), 0., 0.);
        assert!(d.abs() < 1e-13);
    }
}
