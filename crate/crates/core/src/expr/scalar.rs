//! Complex constants: exact Gaussian rationals with a double-precision
//! fallback when the rational arithmetic overflows.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

type Rat = Ratio<i64>;

/// A complex scalar constant. `Exact` keeps numerator/denominator pairs so
/// that identities like `i*i = -1` hold exactly; arithmetic that overflows
/// the `i64` rationals demotes to `Approx`.
#[derive(Clone, Copy, Debug)]
pub enum Scalar {
    Exact { re: Rat, im: Rat },
    Approx(Complex64),
}

fn clean(x: f64) -> f64 {
    // normalise -0.0 so bitwise Eq/Hash behave
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl Scalar {
    pub const fn zero() -> Self {
        Scalar::Exact {
            re: Rat::new_raw(0, 1),
            im: Rat::new_raw(0, 1),
        }
    }

    pub const fn one() -> Self {
        Scalar::Exact {
            re: Rat::new_raw(1, 1),
            im: Rat::new_raw(0, 1),
        }
    }

    pub const fn i() -> Self {
        Scalar::Exact {
            re: Rat::new_raw(0, 1),
            im: Rat::new_raw(1, 1),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact {
            re: Rat::from_integer(n),
            im: Rat::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::Exact {
            re: Rat::new(num, den),
            im: Rat::zero(),
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Scalar::Approx(Complex64::new(clean(x), 0.0))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Scalar::Approx(Complex64::new(clean(z.re), clean(z.im)))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => re.is_zero() && im.is_zero(),
            Scalar::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => im.is_zero() && *re == Rat::from_integer(1),
            Scalar::Approx(z) => z.im == 0.0 && z.re == 1.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact { re, im } => Complex64::new(ratio_to_f64(re), ratio_to_f64(im)),
            Scalar::Approx(z) => *z,
        }
    }

    /// Real part is negative and imaginary part zero; used by the renderer
    /// to print `a - b` instead of `a + -b`.
    pub fn is_negative_real(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => im.is_zero() && re.is_negative(),
            Scalar::Approx(z) => z.im == 0.0 && z.re < 0.0,
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact { re: -re, im: -im },
            Scalar::Approx(z) => Scalar::from_complex(-z),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) => {
                match (a.checked_add(c), b.checked_add(d)) {
                    (Some(re), Some(im)) => Scalar::Exact { re, im },
                    _ => Scalar::from_complex(self.to_complex() + other.to_complex()),
                }
            }
            _ => Scalar::from_complex(self.to_complex() + other.to_complex()),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) => {
                // (a+bi)(c+di) = ac - bd + (ad + bc) i
                let re = a
                    .checked_mul(c)
                    .and_then(|ac| b.checked_mul(d).and_then(|bd| ac.checked_sub(&bd)));
                let im = a
                    .checked_mul(d)
                    .and_then(|ad| b.checked_mul(c).and_then(|bc| ad.checked_add(&bc)));
                match (re, im) {
                    (Some(re), Some(im)) => Scalar::Exact { re, im },
                    _ => Scalar::from_complex(self.to_complex() * other.to_complex()),
                }
            }
            _ => Scalar::from_complex(self.to_complex() * other.to_complex()),
        }
    }

    /// Multiplicative inverse. `None` for exact zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        match self {
            Scalar::Exact { re, im } => {
                // 1/(a+bi) = (a - bi)/(a^2 + b^2)
                let den = re
                    .checked_mul(re)
                    .and_then(|rr| im.checked_mul(im).and_then(|ii| rr.checked_add(&ii)));
                match den {
                    Some(den) if !den.is_zero() => {
                        let rre = re / den;
                        let rim = -im / den;
                        Some(Scalar::Exact { re: rre, im: rim })
                    }
                    _ => Some(Scalar::from_complex(self.to_complex().inv())),
                }
            }
            Scalar::Approx(z) => Some(Scalar::from_complex(z.inv())),
        }
    }

    /// Integer power; negative exponents invert first. `None` for 0^negative.
    pub fn powi(&self, n: i32) -> Option<Scalar> {
        if n == 0 {
            return Some(Scalar::one());
        }
        let base = if n < 0 { self.inv()? } else { *self };
        let mut acc = Scalar::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }

    fn key(&self) -> (u8, i64, i64, i64, i64, u64, u64) {
        match self {
            Scalar::Exact { re, im } => (
                0,
                *re.numer(),
                *re.denom(),
                *im.numer(),
                *im.denom(),
                0,
                0,
            ),
            Scalar::Approx(z) => (1, 0, 0, 0, 0, z.re.to_bits(), z.im.to_bits()),
        }
    }
}

fn ratio_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) => {
                a.cmp(c).then_with(|| b.cmp(d))
            }
            (Scalar::Exact { .. }, Scalar::Approx(_)) => Ordering::Less,
            (Scalar::Approx(_), Scalar::Exact { .. }) => Ordering::Greater,
            (Scalar::Approx(z), Scalar::Approx(w)) => z
                .re
                .total_cmp(&w.re)
                .then_with(|| z.im.total_cmp(&w.im)),
        }
    }
}

fn fmt_rat(r: &Rat, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Renders in the infix grammar: `3/2`, `I`, `2*I`, `1/2+3/2*I`, `0.25`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact { re, im } => {
                if im.is_zero() {
                    fmt_rat(re, f)
                } else if re.is_zero() {
                    if *im == Rat::from_integer(1) {
                        write!(f, "I")
                    } else if *im == Rat::from_integer(-1) {
                        write!(f, "-I")
                    } else {
                        fmt_rat(im, f)?;
                        write!(f, "*I")
                    }
                } else {
                    fmt_rat(re, f)?;
                    if im.is_negative() {
                        write!(f, "-")?;
                        fmt_rat(&-im, f)?;
                    } else {
                        write!(f, "+")?;
                        fmt_rat(im, f)?;
                    }
                    write!(f, "*I")
                }
            }
            Scalar::Approx(z) => {
                if z.im == 0.0 {
                    write!(f, "{:?}", z.re)
                } else if z.re == 0.0 {
                    write!(f, "{:?}*I", z.im)
                } else if z.im < 0.0 {
                    write!(f, "{:?}-{:?}*I", z.re, -z.im)
                } else {
                    write!(f, "{:?}+{:?}*I", z.re, z.im)
                }
            }
        }
    }
}
