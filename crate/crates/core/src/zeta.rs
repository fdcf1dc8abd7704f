//! Frobenius traces, extension point counts, inverse-root surds, zeta
//! numerators and K-group orders.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::curve::{Curve, DEFAULT_ENUM_BOUND};
use crate::error::{Error, Result};
use crate::numeric::factorize_u64;

/// Point count, trace and inverse-root data of a curve over its prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaData {
    pub q: u64,
    pub points: u64,
    pub a: i64,
    pub disc: i64,
    pub surd: Surd,
}

/// The inverse roots `(a ± c sqrt(-d0)) / 2` of `T^2 - aT + q`, with `d0`
/// squarefree and `a^2 - 4q = -c^2 d0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Surd {
    pub a: i64,
    pub c: u64,
    pub d0: u64,
}

impl Surd {
    pub fn from_trace(a: i64, q: u64) -> Self {
        let neg_disc = 4 * q as i64 - a * a;
        assert!(neg_disc > 0, "trace outside the Hasse interval");
        let mut c = 1u64;
        let mut d0 = 1u64;
        for (prime, e) in factorize_u64(neg_disc as u64) {
            c *= prime.pow(e / 2);
            if e % 2 == 1 {
                d0 *= prime;
            }
        }
        Self { a, c, d0 }
    }

    /// `a^2 - 4q`.
    pub fn discriminant(&self) -> i64 {
        -((self.c * self.c * self.d0) as i64)
    }

    /// `q = (a^2 + c^2 d0) / 4`.
    pub fn q(&self) -> u64 {
        ((self.a * self.a) as u64 + self.c * self.c * self.d0) / 4
    }

    fn render_with(&self, pm: &str, root: impl Fn(u64) -> String) -> String {
        let coeff = |c: u64| if c == 1 { String::new() } else { c.to_string() };
        if self.a % 2 == 0 && self.c.is_multiple_of(2) {
            let rational = if self.a == 0 {
                String::new()
            } else {
                (self.a / 2).to_string()
            };
            format!("{rational}{pm}{}{}", coeff(self.c / 2), root(self.d0))
        } else {
            format!("({}{pm}{}{})/2", self.a, coeff(self.c), root(self.d0))
        }
    }

    /// ASCII form, e.g. `(3+-sqrt(-3))/2` or `1+-2sqrt(-1)`.
    pub fn render_ascii(&self) -> String {
        self.render_with("+-", |d| format!("sqrt(-{d})"))
    }

    /// Typeset form, e.g. `(3±√−3)/2`.
    pub fn render_unicode(&self) -> String {
        self.render_with("±", |d| format!("√−{d}"))
    }

    /// Parse either rendering back into `(a, c, d0)`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognized root expression {text:?}"));
        let ascii: String = text
            .trim()
            .replace('±', "+-")
            .replace('−', "-")
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        // the typeset radical carries no parentheses: √-3 -> sqrt(-3)
        let mut s = String::with_capacity(ascii.len() + 8);
        let mut chars = ascii.chars().peekable();
        while let Some(ch) = chars.next() {
            if ch != '√' {
                s.push(ch);
                continue;
            }
            s.push_str("sqrt(");
            if chars.peek() == Some(&'-') {
                s.push(chars.next().unwrap());
            }
            while let Some(d) = chars.next_if(char::is_ascii_digit) {
                s.push(d);
            }
            s.push(')');
        }
        let (body, halved) = match s.strip_suffix("/2") {
            Some(inner) => (
                inner
                    .strip_prefix('(')
                    .and_then(|x| x.strip_suffix(')'))
                    .ok_or_else(bad)?,
                true,
            ),
            None => (s.as_str(), false),
        };
        let (rational, radical) = body.split_once("+-").ok_or_else(bad)?;
        let (coeff, d0) = radical.split_once("sqrt(-").ok_or_else(bad)?;
        let d0: u64 = d0
            .strip_suffix(')')
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        let coeff: u64 = if coeff.is_empty() {
            1
        } else {
            coeff.parse().map_err(|_| bad())?
        };
        let rational: i64 = if rational.is_empty() {
            0
        } else {
            rational.parse().map_err(|_| bad())?
        };
        let surd = if halved {
            Self {
                a: rational,
                c: coeff,
                d0,
            }
        } else {
            Self {
                a: 2 * rational,
                c: 2 * coeff,
                d0,
            }
        };
        let neg_disc = surd.c * surd.c * surd.d0 + (surd.a * surd.a) as u64;
        if !neg_disc.is_multiple_of(4) {
            return Err(bad());
        }
        Ok(surd)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_ascii())
    }
}

/// Trace data by counting points over the prime field.
pub fn trace(curve: &Curve) -> Result<ZetaData> {
    let g = curve.over(1)?;
    let points = g.count_by_character(DEFAULT_ENUM_BOUND)?;
    let q = curve.p;
    let a = q as i64 + 1 - points as i64;
    Ok(ZetaData {
        q,
        points,
        a,
        disc: a * a - 4 * q as i64,
        surd: Surd::from_trace(a, q),
    })
}

/// `alpha^n + conj(alpha)^n` for the roots of `T^2 - aT + q`, by Lucas doubling.
pub fn extension_trace(a: i64, q: u64, n: u64) -> BigInt {
    let a = BigInt::from(a);
    let q = BigInt::from(q);
    let (mut t0, mut t1, mut qk) = (BigInt::from(2), a.clone(), BigInt::one());
    for i in (0..u64::BITS - n.leading_zeros()).rev() {
        // (t_k, t_{k+1}, q^k) -> (t_{2k}, t_{2k+1}, q^{2k}) or shifted by one
        let t2k = &t0 * &t0 - 2 * &qk;
        let t2k1 = &t0 * &t1 - &a * &qk;
        let q2k = &qk * &qk;
        if (n >> i) & 1 == 1 {
            let t2k2 = &t1 * &t1 - 2 * &qk * &q;
            t0 = t2k1;
            t1 = t2k2;
            qk = q2k * &q;
        } else {
            t0 = t2k;
            t1 = t2k1;
            qk = q2k;
        }
    }
    t0
}

/// `extension_trace` reduced into `[0, modulus)`.
pub fn extension_trace_mod(a: i64, q: u64, n: &BigUint, modulus: &BigUint) -> BigUint {
    let m = BigInt::from(modulus.clone());
    let red = |x: BigInt| x.mod_floor(&m);
    let a = red(BigInt::from(a));
    let q = red(BigInt::from(q));
    let (mut t0, mut t1, mut qk) = (red(BigInt::from(2)), a.clone(), red(BigInt::one()));
    for i in (0..n.bits()).rev() {
        let t2k = red(&t0 * &t0 - 2 * &qk);
        let t2k1 = red(&t0 * &t1 - &a * &qk);
        let q2k = red(&qk * &qk);
        if n.bit(i) {
            let t2k2 = red(&t1 * &t1 - 2 * &qk * &q);
            t0 = t2k1;
            t1 = t2k2;
            qk = red(q2k * &q);
        } else {
            t0 = t2k;
            t1 = t2k1;
            qk = q2k;
        }
    }
    t0.to_biguint().expect("reduced residue")
}

/// `#E(F_{q^n}) = q^n + 1 - extension_trace(a, q, n)`.
pub fn count_extension(curve: &Curve, n: u64) -> Result<BigUint> {
    let zd = trace(curve)?;
    Ok(count_from_trace(zd.a, zd.q, n))
}

pub fn count_from_trace(a: i64, q: u64, n: u64) -> BigUint {
    let qn = BigInt::from(q).pow(n as u32);
    (qn + BigInt::one() - extension_trace(a, q, n))
        .to_biguint()
        .expect("Hasse bound keeps the count positive")
}

/// `#K_{2m}(E/F_Q) = 1 - A Q^m + Q^{2m+1}` with `Q = q^n`, `A = alpha^n + conj(alpha)^n`.
pub fn kgroup_order(a: i64, q: u64, n: u64, m: u64) -> BigUint {
    assert!(m >= 1 && n >= 1);
    let big_a = extension_trace(a, q, n);
    let big_q = BigInt::from(q).pow(n as u32);
    let qm = big_q.pow(m as u32);
    let order = BigInt::one() - big_a * &qm + &qm * &qm * &big_q;
    order.to_biguint().expect("order is positive")
}

/// `kgroup_order` modulo `modulus`, with `n` possibly huge (tower levels).
pub fn kgroup_order_mod(a: i64, q: u64, n: &BigUint, m: u64, modulus: &BigUint) -> BigUint {
    let big_a = extension_trace_mod(a, q, n, modulus);
    let qm = BigUint::from(q).modpow(&(n * m), modulus);
    let big_q = BigUint::from(q).modpow(n, modulus);
    let pos = (BigUint::one() + &qm * &qm % modulus * big_q) % modulus;
    let neg = big_a * qm % modulus;
    (pos + modulus - neg) % modulus
}

/// The numerator `P(T) = 1 + c_1 T + ... + c_{2g} T^{2g}` of a curve's zeta function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaNumerator {
    pub q: u64,
    pub genus: usize,
    pub coeffs: Vec<BigInt>,
}

impl ZetaNumerator {
    pub fn genus_one(a: i64, q: u64) -> Self {
        Self {
            q,
            genus: 1,
            coeffs: vec![BigInt::one(), BigInt::from(-a), BigInt::from(q)],
        }
    }

    pub fn genus_zero(q: u64) -> Self {
        Self {
            q,
            genus: 0,
            coeffs: vec![BigInt::one()],
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += x * y;
            }
        }
        Self {
            q: self.q,
            genus: self.genus + other.genus,
            coeffs,
        }
    }

    /// `c_{2g-k} = q^{g-k} c_k` for every `k`.
    pub fn satisfies_functional_equation(&self) -> bool {
        let g = self.genus;
        self.coeffs.len() == 2 * g + 1
            && self.coeffs[0].is_one()
            && (0..=g).all(|k| {
                self.coeffs[2 * g - k] == &self.coeffs[k] * BigInt::from(self.q).pow((g - k) as u32)
            })
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    /// Point count over F_{q^n}: `q^n + 1 - sum alpha_i^n` via Newton's identities.
    pub fn point_count(&self, n: usize) -> BigInt {
        let sums = self.power_sums(n);
        BigInt::from(self.q).pow(n as u32) + BigInt::one() - &sums[n - 1]
    }

    fn power_sums(&self, n: usize) -> Vec<BigInt> {
        // P(T) = prod (1 - alpha_i T), so c_k are signed elementary symmetric functions
        let mut sums: Vec<BigInt> = Vec::with_capacity(n);
        for k in 1..=n {
            let ck = self.coeffs.get(k).cloned().unwrap_or_default();
            let mut s = -BigInt::from(k as u64) * ck;
            for i in 1..k {
                let c = self.coeffs.get(k - i).cloned().unwrap_or_default();
                s -= &sums[i - 1] * c;
            }
            sums.push(s);
        }
        sums
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            let mono = match k {
                0 => mag.to_string(),
                1 if mag.is_one() => "T".to_string(),
                1 => format!("{mag}T"),
                _ if mag.is_one() => format!("T^{k}"),
                _ => format!("{mag}T^{k}"),
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            out.push_str(&mono);
        }
        out
    }
}

/// `|P(q^m)|`.
pub fn genus_g_order(numerator: &ZetaNumerator, m: u32) -> BigUint {
    let t = BigInt::from(numerator.q).pow(m);
    numerator.eval(&t).magnitude().clone()
}

/// Recover `P(T)` from `N_1..N_g` by Newton's identities and the functional equation.
pub fn derive_numerator(counts: &[u64], q: u64, g: usize) -> Result<ZetaNumerator> {
    if g == 0 {
        return Ok(ZetaNumerator::genus_zero(q));
    }
    if counts.len() < g {
        return Err(Error::Parse(format!(
            "need {g} point counts, got {}",
            counts.len()
        )));
    }
    let qb = BigInt::from(q);
    let mut sums = Vec::with_capacity(g);
    for (i, &n) in counts.iter().take(g).enumerate() {
        let k = i as u32 + 1;
        let s: BigInt = qb.pow(k) + BigInt::one() - BigInt::from(n);
        // |S_k| <= 2g q^{k/2}
        if s.pow(2) > BigInt::from(4 * g * g) * qb.pow(k) {
            return Err(Error::WeilBound);
        }
        sums.push(s);
    }
    let mut coeffs = vec![BigInt::one()];
    for k in 1..=g {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            acc += &sums[i - 1] * &coeffs[k - i];
        }
        let (quot, rem) = (-acc).div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::WeilBound);
        }
        coeffs.push(quot);
    }
    for k in (0..g).rev() {
        let c = &coeffs[k] * qb.pow((g - k) as u32);
        coeffs.push(c);
    }
    let numerator = ZetaNumerator {
        q,
        genus: g,
        coeffs,
    };
    debug_assert!(numerator.satisfies_functional_equation());
    Ok(numerator)
}
