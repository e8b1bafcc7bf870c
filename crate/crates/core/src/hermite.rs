//! Exact check of the Hermite closed form for path counts of the
//! two-vertex family `F_n = [[1, 1], [n, 1]]`.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};

/// `a + b·i + c·√2 + d·i√2` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Zi2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Zi2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Zi2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn integer(a: BigInt) -> Self {
        Zi2 {
            a,
            ..Default::default()
        }
    }

    pub fn i() -> Self {
        Self::new(0, 1, 0, 0)
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 0, 1, 0)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Zi2 {
            a: &self.a * k,
            b: &self.b * k,
            c: &self.c * k,
            d: &self.d * k,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::integer(BigInt::one()), |acc, _| &acc * self)
    }

    /// Exact division by an integer, if every coefficient is divisible.
    pub fn div_exact(&self, k: &BigInt) -> Option<Self> {
        let parts = [&self.a, &self.b, &self.c, &self.d];
        if parts.iter().any(|x| !x.is_multiple_of(k)) {
            return None;
        }
        Some(Zi2 {
            a: &self.a / k,
            b: &self.b / k,
            c: &self.c / k,
            d: &self.d / k,
        })
    }

    pub fn as_integer(&self) -> Option<&BigInt> {
        (self.b.is_zero() && self.c.is_zero() && self.d.is_zero()).then_some(&self.a)
    }
}

impl Add for &Zi2 {
    type Output = Zi2;
    fn add(self, o: &Zi2) -> Zi2 {
        Zi2 {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            c: &self.c + &o.c,
            d: &self.d + &o.d,
        }
    }
}

impl Sub for &Zi2 {
    type Output = Zi2;
    fn sub(self, o: &Zi2) -> Zi2 {
        self + &(-o)
    }
}

impl Neg for &Zi2 {
    type Output = Zi2;
    fn neg(self) -> Zi2 {
        Zi2 {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }
}

impl Mul for &Zi2 {
    type Output = Zi2;
    // (u1 + v1·s)(u2 + v2·s) = u1u2 + 2·v1v2 + (u1v2 + v1u2)·s over Z[i]
    fn mul(self, o: &Zi2) -> Zi2 {
        let gauss = |x: (&BigInt, &BigInt), y: (&BigInt, &BigInt)| -> (BigInt, BigInt) {
            (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)
        };
        let u1 = (&self.a, &self.b);
        let v1 = (&self.c, &self.d);
        let u2 = (&o.a, &o.b);
        let v2 = (&o.c, &o.d);
        let uu = gauss(u1, u2);
        let vv = gauss(v1, v2);
        let uv = gauss(u1, v2);
        let vu = gauss(v1, u2);
        Zi2 {
            a: uu.0 + 2 * vv.0,
            b: uu.1 + 2 * vv.1,
            c: uv.0 + vu.0,
            d: uv.1 + vu.1,
        }
    }
}

/// Physicists' Hermite polynomial `H_m(x)` by the three-term recurrence.
pub fn hermite(m: u32, x: &Zi2) -> Zi2 {
    let two_x = x.scale(&BigInt::from(2));
    let mut prev = Zi2::integer(BigInt::one());
    if m == 0 {
        return prev;
    }
    let mut cur = two_x.clone();
    for k in 1..m {
        let next = &(&two_x * &cur) - &prev.scale(&BigInt::from(2 * k));
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `2·(−i/√2)^m·H_m(i√2)`, which is always a rational integer.
pub fn hermite_count(m: u32) -> Result<BigInt> {
    let x = &Zi2::i() * &Zi2::sqrt2();
    // (−i/√2)^m = (−i)^m·(√2)^m / 2^m
    let minus_i = -&Zi2::i();
    let numerator = &(&minus_i.pow(m) * &Zi2::sqrt2().pow(m)) * &hermite(m, &x);
    let numerator = numerator.scale(&BigInt::from(2));
    let denom = BigInt::one() << m;
    numerator
        .div_exact(&denom)
        .and_then(|z| z.as_integer().cloned())
        .ok_or_else(|| {
            Error::InvalidArgument(format!("Hermite value for m = {m} is not an integer"))
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteRow {
    pub level: usize,
    pub hermite: BigInt,
    pub counts: [BigInt; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteReport {
    pub rows: Vec<HermiteRow>,
    /// Vertex labelings (index of the "bottom" vertex) under which both identities hold.
    pub matching_bottom: Vec<usize>,
}

impl HermiteReport {
    pub fn passes(&self) -> bool {
        !self.matching_bottom.is_empty()
    }
}

/// Compares `h_b^{(n)}` with the Hermite closed form for `n = 2..=max_level`
/// and checks `h_t^{(n)} = n·h_b^{(n−1)} + (n−3)·h_b^{(n−2)}` for `n ≥ 3`,
/// under both choices of which vertex is `b`.
pub fn check_hermite(d: &BratteliDiagram, max_level: usize) -> Result<HermiteReport> {
    if max_level < 3 {
        return Err(Error::InvalidArgument(format!(
            "Hermite check needs max level >= 3, got {max_level}"
        )));
    }
    let mut rows = Vec::with_capacity(max_level - 1);
    for n in 2..=max_level {
        let counts = d.path_counts(n)?;
        if counts.len() != 2 {
            return Err(Error::InvalidDiagram(format!(
                "Hermite check needs two vertices per level, level {n} has {}",
                counts.len()
            )));
        }
        rows.push(HermiteRow {
            level: n,
            hermite: hermite_count((n - 2) as u32)?,
            counts: [
                BigInt::from(counts[0].clone()),
                BigInt::from(counts[1].clone()),
            ],
        });
    }
    let matching_bottom = (0..2)
        .filter(|&b| {
            let t = 1 - b;
            let closed_form = rows.iter().all(|r| r.counts[b] == r.hermite);
            // rows[j] is level j + 2; at n = 3 the h_b^{(1)} term has coefficient 0
            let top = (1..rows.len()).all(|j| {
                let n = rows[j].level as i64;
                let older = if j >= 2 {
                    rows[j - 2].counts[b].clone()
                } else {
                    BigInt::zero()
                };
                let expected =
                    BigInt::from(n) * &rows[j - 1].counts[b] + BigInt::from(n - 3) * older;
                rows[j].counts[t] == expected
            });
            closed_form && top
        })
        .collect();
    Ok(HermiteReport {
        rows,
        matching_bottom,
    })
}
