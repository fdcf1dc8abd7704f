//! Curves y^2 = x^3 + a2 x^2 + a4 x + a6 over F_p and their point groups over
//! extensions F_{p^s}.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{make_field_capped, FieldCtx, FieldElem, DEFAULT_DEGREE_CAP};
use crate::numeric::{factorize, is_prime_u64, pow_mod, InvariantFactors};

pub const DEFAULT_ENUM_BOUND: u64 = 1_000_000;

/// A nonsingular short model over F_p with coefficients reduced into `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Curve {
    pub p: u64,
    pub a2: u64,
    pub a4: u64,
    pub a6: u64,
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

impl Curve {
    pub fn new(p: u64, a2: i64, a4: i64, a6: i64) -> Result<Self> {
        if p.is_multiple_of(2) || !is_prime_u64(p) {
            return Err(Error::NotOddPrime(p));
        }
        let red = |c: i64| c.rem_euclid(p as i64) as u64;
        let curve = Self {
            p,
            a2: red(a2),
            a4: red(a4),
            a6: red(a6),
        };
        if curve.discriminant() == 0 {
            return Err(Error::Singular);
        }
        Ok(curve)
    }

    /// Parse the text form `p:a2:a4:a6`.
    pub fn parse_spec(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected p:a2:a4:a6, got {text:?}")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {s:?} in {text:?}")))
        };
        let p = parts[0]
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("bad prime in {text:?}")))?;
        Self::new(p, num(parts[1])?, num(parts[2])?, num(parts[3])?)
    }

    /// Parse an equation such as `y^2=x^3-x^2-1` over F_p.
    pub fn parse_equation(text: &str, p: u64) -> Result<Self> {
        let [a2, a4, a6] = parse_equation_coeffs(text)?;
        Self::new(p, a2, a4, a6)
    }

    /// Equation text with least-absolute-value coefficients, e.g. `y^2=x^3-x-1`.
    pub fn equation(&self) -> String {
        let [a2, a4, a6] = self.signed_coeffs();
        let mut s = String::from("y^2=x^3");
        let mut term = |c: i64, var: &str| {
            if c == 0 {
                return;
            }
            s.push(if c < 0 { '-' } else { '+' });
            let m = c.unsigned_abs();
            if m != 1 || var.is_empty() {
                s.push_str(&m.to_string());
            }
            s.push_str(var);
        };
        term(a2, "x^2");
        term(a4, "x");
        term(a6, "");
        s
    }

    pub fn spec_string(&self) -> String {
        format!("{}:{}:{}:{}", self.p, self.a2, self.a4, self.a6)
    }

    /// Coefficients as signed representatives in `(-p/2, p/2]`.
    pub fn signed_coeffs(&self) -> [i64; 3] {
        let s = |c: u64| {
            if c > self.p / 2 {
                c as i64 - self.p as i64
            } else {
                c as i64
            }
        };
        [s(self.a2), s(self.a4), s(self.a6)]
    }

    pub fn discriminant(&self) -> u64 {
        let p = self.p as i128;
        let (a2, a4, a6) = (self.a2 as i128, self.a4 as i128, self.a6 as i128);
        let b2 = 4 * a2 % p;
        let b4 = 2 * a4 % p;
        let b6 = 4 * a6 % p;
        let b8 = (4 * a2 % p * a6 - a4 * a4) % p;
        let t1 = b2 * b2 % p * b8 % p;
        let t2 = 8 * (b4 * b4 % p) % p * b4 % p;
        let t3 = 27 * (b6 * b6 % p) % p;
        let t4 = 9 * b2 % p * b4 % p * b6 % p;
        (-t1 - t2 - t3 + t4).rem_euclid(p) as u64
    }

    /// Right-hand side `x^3 + a2 x^2 + a4 x + a6` at a prime-field value.
    pub fn rhs_prime(&self, x: u64) -> u64 {
        let p = self.p;
        let x2 = mulm(x, x, p);
        let t = mulm(x2, x, p) + mulm(self.a2, x2, p) + mulm(self.a4, x, p) + self.a6;
        t % p
    }

    /// Base change to F_{p^s}.
    pub fn over(&self, s: usize) -> Result<CurveGroup> {
        self.over_capped(s, DEFAULT_DEGREE_CAP)
    }

    pub fn over_capped(&self, s: usize, cap: usize) -> Result<CurveGroup> {
        let field = make_field_capped(self.p, s, cap)?;
        Ok(CurveGroup::new(*self, field))
    }

    /// `y^2 = x^3 + d a2 x^2 + d^2 a4 x + d^3 a6` for a non-residue `d`.
    pub fn quadratic_twist(&self, d: i64) -> Result<Self> {
        let p = self.p;
        let d = d.rem_euclid(p as i64) as u64;
        if d == 0 || pow_mod(d, (p - 1) / 2, p) == 1 {
            return Err(Error::TwistBySquare(d));
        }
        let d2 = mulm(d, d, p);
        let d3 = mulm(d2, d, p);
        Ok(Self {
            p,
            a2: mulm(d, self.a2, p),
            a4: mulm(d2, self.a4, p),
            a6: mulm(d3, self.a6, p),
        })
    }

    /// Least quadratic non-residue mod p.
    pub fn least_nonresidue(&self) -> u64 {
        (2..self.p)
            .find(|&d| pow_mod(d, (self.p - 1) / 2, self.p) != 1)
            .expect("odd prime has a non-residue")
    }

    /// Image under `x -> u^2 x + r, y -> u^3 y`.
    pub fn transform(&self, u: u64, r: u64) -> Self {
        let p = self.p;
        let (a2, a4, a6) = (self.a2, self.a4, self.a6);
        let u2 = mulm(u, u, p);
        let u2i = pow_mod(u2, p - 2, p);
        let u4i = mulm(u2i, u2i, p);
        let u6i = mulm(u4i, u2i, p);
        let r2 = mulm(r, r, p);
        let n2 = (3 * r + a2) % p;
        let n4 = (mulm(3, r2, p) + mulm(2 * a2 % p, r, p) + a4) % p;
        let n6 = (mulm(r2, r, p) + mulm(a2, r2, p) + mulm(a4, r, p) + a6) % p;
        Self {
            p,
            a2: mulm(n2, u2i, p),
            a4: mulm(n4, u4i, p),
            a6: mulm(n6, u6i, p),
        }
    }

    /// Smallest model (by coefficient triple) in the F_p-isomorphism class.
    pub fn isomorphism_key(&self) -> Self {
        let mut best = *self;
        for u in 1..self.p {
            for r in 0..self.p {
                let c = self.transform(u, r);
                if (c.a2, c.a4, c.a6) < (best.a2, best.a4, best.a6) {
                    best = c;
                }
            }
        }
        best
    }

    /// Every nonsingular model over F_p.
    pub fn all_over(p: u64) -> Result<Vec<Self>> {
        if p.is_multiple_of(2) || !is_prime_u64(p) {
            return Err(Error::NotOddPrime(p));
        }
        let mut out = Vec::new();
        for a2 in 0..p {
            for a4 in 0..p {
                for a6 in 0..p {
                    let c = Self { p, a2, a4, a6 };
                    if c.discriminant() != 0 {
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over F_{}", self.equation(), self.p)
    }
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_spec(s)
    }
}

/// Integer coefficients `[a2, a4, a6]` of `y^2 = x^3 + a2 x^2 + a4 x + a6`.
pub fn parse_equation_coeffs(text: &str) -> Result<[i64; 3]> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("unrecognized equation {text:?}"));
    let (lhs, rhs) = compact.split_once('=').ok_or_else(bad)?;
    if lhs != "y^2" || rhs.contains('=') || rhs.is_empty() {
        return Err(bad());
    }
    let mut coeffs = [0i64; 4];
    let mut seen = [false; 4];
    let bytes = rhs.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -1;
            }
            i += 1;
        } else if i > 0 {
            return Err(bad());
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let digits = &rhs[start..i];
        let mut power = 0;
        if i < bytes.len() && bytes[i] == b'x' {
            i += 1;
            power = 1;
            if i + 1 < bytes.len() && bytes[i] == b'^' {
                power = (bytes[i + 1] as char).to_digit(10).ok_or_else(bad)? as usize;
                i += 2;
            }
        } else if digits.is_empty() {
            return Err(bad());
        }
        if power > 3 || seen[power] {
            return Err(bad());
        }
        let magnitude = if digits.is_empty() {
            1
        } else {
            digits.parse::<i64>().map_err(|_| bad())?
        };
        seen[power] = true;
        coeffs[power] = sign * magnitude;
    }
    if coeffs[3] != 1 {
        return Err(bad());
    }
    Ok([coeffs[2], coeffs[1], coeffs[0]])
}

/// A point over some F_{p^s}; coordinates are field elements of that field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Infinity,
    Affine(FieldElem, FieldElem),
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

/// The group E(F_{p^s}).
#[derive(Debug, Clone)]
pub struct CurveGroup {
    pub curve: Curve,
    pub field: Arc<FieldCtx>,
    a2: FieldElem,
    a4: FieldElem,
    a6: FieldElem,
}

impl CurveGroup {
    pub fn new(curve: Curve, field: Arc<FieldCtx>) -> Self {
        assert_eq!(curve.p, field.p());
        Self {
            a2: field.from_u64(curve.a2),
            a4: field.from_u64(curve.a4),
            a6: field.from_u64(curve.a6),
            curve,
            field,
        }
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    pub fn rhs(&self, x: &FieldElem) -> FieldElem {
        let f = &self.field;
        let t = f.add(&f.mul(&f.add(x, &self.a2), x), &self.a4);
        f.add(&f.mul(&t, x), &self.a6)
    }

    fn check(&self, pt: &Point) -> Result<()> {
        match pt {
            Point::Infinity => Ok(()),
            Point::Affine(x, y) if x.len() == self.degree() && y.len() == self.degree() => Ok(()),
            _ => Err(Error::FieldMismatch),
        }
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine(x, y) => self.check(pt).is_ok() && self.field.sqr(y) == self.rhs(x),
        }
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x.clone(), self.field.neg(y)),
        }
    }

    pub fn add(&self, a: &Point, b: &Point) -> Result<Point> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    fn add_unchecked(&self, a: &Point, b: &Point) -> Point {
        let f = &self.field;
        let (x1, y1, x2, y2) = match (a, b) {
            (Point::Infinity, _) => return b.clone(),
            (_, Point::Infinity) => return a.clone(),
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let slope = if x1 == x2 {
            if f.is_zero(&f.add(y1, y2)) {
                return Point::Infinity;
            }
            // tangent: (3x^2 + 2 a2 x + a4) / 2y
            let num = f.add(
                &f.mul(&f.add(&f.mul_u64(x1, 3), &f.mul_u64(&self.a2, 2)), x1),
                &self.a4,
            );
            f.div(&num, &f.mul_u64(y1, 2)).expect("2y is nonzero here")
        } else {
            f.div(&f.sub(y2, y1), &f.sub(x2, x1)).expect("distinct x")
        };
        let x3 = f.sub(&f.sub(&f.sub(&f.sqr(&slope), &self.a2), x1), x2);
        let y3 = f.sub(&f.mul(&slope, &f.sub(x1, &x3)), y1);
        Point::Affine(x3, y3)
    }

    pub fn double(&self, a: &Point) -> Point {
        self.add_unchecked(a, a)
    }

    pub fn sub(&self, a: &Point, b: &Point) -> Point {
        self.add_unchecked(a, &self.neg(b))
    }

    pub fn mul(&self, k: &BigUint, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        for i in (0..k.bits()).rev() {
            acc = self.double(&acc);
            if k.bit(i) {
                acc = self.add_unchecked(&acc, pt);
            }
        }
        acc
    }

    pub fn mul_u64(&self, k: u64, pt: &Point) -> Point {
        self.mul(&BigUint::from(k), pt)
    }

    /// Signed scalar multiple; negative `k` multiplies the negated point.
    pub fn mul_signed(&self, k: &BigInt, pt: &Point) -> Point {
        let r = self.mul(k.magnitude(), pt);
        if k.sign() == Sign::Minus {
            self.neg(&r)
        } else {
            r
        }
    }

    pub fn mul_i64(&self, k: i64, pt: &Point) -> Point {
        self.mul_signed(&BigInt::from(k), pt)
    }

    /// The p^k-power Frobenius applied to both coordinates.
    pub fn frobenius(&self, pt: &Point, k: usize) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(
                self.field.frobenius_pow(x, k),
                self.field.frobenius_pow(y, k),
            ),
        }
    }

    /// `1 + sum_x (1 + chi(f(x)))`.
    pub fn count_by_character(&self, bound: u64) -> Result<u64> {
        let size = self.enumeration_size(bound)?;
        let mut n: i64 = 1;
        for i in 0..size {
            let x = self.field.from_index(i);
            n += 1 + self.field.quadratic_character(&self.rhs(&x)) as i64;
        }
        Ok(n as u64)
    }

    fn enumeration_size(&self, bound: u64) -> Result<u64> {
        match self.field.size_u64() {
            Some(q) if q <= bound => Ok(q),
            _ => Err(Error::EnumerationBound {
                p: self.curve.p,
                degree: self.degree(),
                bound,
            }),
        }
    }

    /// All points, `O` first, then affine points in field-index order of x
    /// with the smaller y first.
    pub fn enumerate_points(&self, bound: u64) -> Result<Vec<Point>> {
        let size = self.enumeration_size(bound)?;
        let f = &self.field;
        let index = |e: &FieldElem| e.iter().rev().fold(0u64, |acc, &c| acc * f.p() + c);
        let mut root_of: HashMap<u64, u64> = HashMap::with_capacity(size as usize);
        for i in 0..size {
            let y = f.from_index(i);
            root_of.entry(index(&f.sqr(&y))).or_insert(i);
        }
        let mut pts = vec![Point::Infinity];
        for i in 0..size {
            let x = f.from_index(i);
            let rhs = self.rhs(&x);
            if let Some(&yi) = root_of.get(&index(&rhs)) {
                let y = f.from_index(yi);
                let ny = f.neg(&y);
                if y == ny {
                    pts.push(Point::Affine(x, y));
                } else {
                    let (lo, hi) = if y < ny { (y, ny) } else { (ny, y) };
                    pts.push(Point::Affine(x.clone(), lo));
                    pts.push(Point::Affine(x, hi));
                }
            }
        }
        Ok(pts)
    }

    /// Sample x until f(x) is a square, then take the canonical root with a
    /// random sign.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        let f = &self.field;
        loop {
            let x = f.random(rng);
            let rhs = self.rhs(&x);
            if f.quadratic_character(&rhs) < 0 {
                continue;
            }
            let y = f.sqrt(&rhs).expect("square by the character test");
            let y = if rng.gen::<bool>() { f.neg(&y) } else { y };
            return Point::Affine(x, y);
        }
    }

    /// Order of `pt` given a multiple `n` of it, usually the group order.
    pub fn point_order(&self, pt: &Point, n: &BigUint) -> BigUint {
        let mut order = n.clone();
        for (prime, _) in factorize(n).factors {
            while (&order % &prime).is_zero() && self.mul(&(&order / &prime), pt).is_infinity() {
                order /= &prime;
            }
        }
        order
    }

    /// Group structure by enumeration: `Z/(N/e) x Z/e` with `e` the exponent.
    pub fn structure_by_enumeration(&self, bound: u64) -> Result<InvariantFactors> {
        let pts = self.enumerate_points(bound)?;
        let n = BigUint::from(pts.len());
        let mut exponent = BigUint::one();
        for pt in &pts {
            exponent = exponent.lcm(&self.point_order(pt, &n));
            if exponent == n {
                break;
            }
        }
        Ok(InvariantFactors::from_cyclic_orders(&[
            &n / &exponent,
            exponent,
        ]))
    }
}

/// `|a| <= 2 sqrt(q)` for integer `a`, `q`.
pub fn within_hasse(a: &BigInt, q: &BigUint) -> bool {
    let a2 = a.abs().to_biguint().expect("non-negative").pow(2);
    a2 <= q * 4u32
}

/// Frobenius trace over F_p by character sums, for quick use on prime fields.
pub fn trace_by_character(curve: &Curve) -> i64 {
    let p = curve.p;
    let mut n: i64 = 1;
    for x in 0..p {
        let r = curve.rhs_prime(x);
        n += if r == 0 {
            1
        } else if pow_mod(r, (p - 1) / 2, p) == 1 {
            2
        } else {
            0
        };
    }
    p as i64 + 1 - n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(g: &CurveGroup, x: u64, y: u64) -> Point {
        Point::Affine(g.field.from_u64(x), g.field.from_u64(y))
    }

    #[test]
    fn parsing() {
        let c = Curve::parse_spec("3:-1:0:-1").unwrap();
        assert_eq!((c.a2, c.a4, c.a6), (2, 0, 2));
        assert_eq!(Curve::parse_equation("y^2=x^3-x^2-1", 3).unwrap(), c);
        assert_eq!(parse_equation_coeffs("y^2=x^3+8x-4").unwrap(), [0, 8, -4]);
        assert_eq!(parse_equation_coeffs("y^2 = x^3 + x").unwrap(), [0, 1, 0]);
        assert!(parse_equation_coeffs("y^2=x^3+4x=8").is_err());
        assert!(Curve::parse_spec("3:0:0").is_err());
        assert_eq!(Curve::parse_spec("9:0:1:1"), Err(Error::NotOddPrime(9)));
        assert_eq!(Curve::parse_spec("5:0:0:0"), Err(Error::Singular));
        assert_eq!(c.to_string(), "y^2=x^3-x^2-1 over F_3");
    }

    #[test]
    fn discriminant_matches_cubic_discriminant_when_a2_is_zero() {
        // for x^3 + a x + b, Delta = -16(4a^3 + 27b^2)
        for a in 0..11i64 {
            for b in 0..11i64 {
                let c = Curve {
                    p: 11,
                    a2: 0,
                    a4: a as u64,
                    a6: b as u64,
                };
                let expected = (-16 * (4 * a * a * a + 27 * b * b)).rem_euclid(11) as u64;
                assert_eq!(c.discriminant(), expected);
            }
        }
    }

    #[test]
    fn group_law_examples() {
        let g = Curve::new(5, 0, -1, 0).unwrap().over(1).unwrap();
        let o = Point::Infinity;
        let p = pt(&g, 0, 0);
        assert_eq!(g.add(&p, &o).unwrap(), p);
        assert_eq!(g.add(&pt(&g, 0, 0), &pt(&g, 1, 0)).unwrap(), pt(&g, 4, 0));
        let h = Curve::new(7, 0, 0, 1).unwrap().over(1).unwrap();
        // tangent at (0,1) is horizontal, so 2(0,1) = (0,-1)
        assert_eq!(h.double(&pt(&h, 0, 1)), pt(&h, 0, 6));
        let f9 = Curve::new(5, 0, 0, 1).unwrap().over(2).unwrap();
        assert_eq!(
            g.add(&p, &f9.random_point(&mut ChaCha8Rng::seed_from_u64(1))),
            Err(Error::FieldMismatch)
        );
    }

    #[test]
    fn enumeration_examples() {
        let bound = DEFAULT_ENUM_BOUND;
        let c1 = Curve::new(3, 0, -1, -1).unwrap().over(1).unwrap();
        assert_eq!(c1.enumerate_points(bound).unwrap(), vec![Point::Infinity]);
        assert_eq!(
            Curve::new(5, 0, 2, 1)
                .unwrap()
                .over(1)
                .unwrap()
                .enumerate_points(bound)
                .unwrap()
                .len(),
            7
        );
        assert_eq!(
            Curve::new(7, 0, 1, 0)
                .unwrap()
                .over(1)
                .unwrap()
                .enumerate_points(bound)
                .unwrap()
                .len(),
            8
        );
        let g = Curve::new(7, 0, 0, 5).unwrap().over(1).unwrap();
        let pts = g.enumerate_points(bound).unwrap();
        assert_eq!(pts.len(), 7);
        for q in &pts {
            assert!(g.mul_u64(7, q).is_infinity());
        }
        assert!(matches!(
            c1.enumerate_points(2),
            Err(Error::EnumerationBound { .. })
        ));
    }

    #[test]
    fn scalar_edge_cases() {
        let g = Curve::new(11, 0, 1, 1).unwrap().over(1).unwrap();
        let pts = g.enumerate_points(DEFAULT_ENUM_BOUND).unwrap();
        let n = pts.len() as u64;
        for q in &pts {
            assert!(g.mul_u64(0, q).is_infinity());
            assert!(g.mul_u64(n, q).is_infinity());
            assert_eq!(g.mul_i64(-3, q), g.neg(&g.mul_u64(3, q)));
        }
    }

    #[test]
    fn group_axioms_on_small_tables() {
        for (p, a2, a4, a6) in [
            (3, 0, -1, 0),
            (5, 0, 1, 0),
            (7, 0, 0, 1),
            (13, 0, 0, 5),
            (3, -1, 0, -1),
        ] {
            let g = Curve::new(p, a2, a4, a6).unwrap().over(1).unwrap();
            let pts = g.enumerate_points(DEFAULT_ENUM_BOUND).unwrap();
            for a in &pts {
                assert!(g.contains(a));
                assert!(g.add(a, &g.neg(a)).unwrap().is_infinity());
                for b in &pts {
                    let ab = g.add(a, b).unwrap();
                    assert_eq!(ab, g.add(b, a).unwrap());
                    assert!(g.contains(&ab));
                    if pts.len() <= 24 {
                        for c in &pts {
                            assert_eq!(
                                g.add(&ab, c).unwrap(),
                                g.add(a, &g.add(b, c).unwrap()).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn random_points_are_deterministic_and_on_curve() {
        let g = Curve::new(3, 0, -1, -1).unwrap().over(2).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| g.random_point(&mut rng))
                .collect::<Vec<_>>()
        };
        let a = draw(7);
        assert_eq!(a, draw(7));
        for q in &a {
            assert!(g.contains(q));
            if let Point::Affine(x, _) = q {
                assert_eq!(x.len(), 2);
            }
        }
    }

    #[test]
    fn twists() {
        let c = Curve::new(3, 0, -1, -1).unwrap();
        let t = c.quadratic_twist(2).unwrap();
        assert_eq!(trace_by_character(&c), 3);
        assert_eq!(trace_by_character(&t), -3);
        let tt = t.quadratic_twist(2).unwrap();
        assert_eq!(trace_by_character(&tt), 3);
        let e = Curve::new(5, 0, 1, 0).unwrap();
        assert_eq!(trace_by_character(&e.quadratic_twist(2).unwrap()), -2);
        assert_eq!(c.quadratic_twist(1), Err(Error::TwistBySquare(1)));
    }

    #[test]
    fn structure_and_isomorphism_classes() {
        let g = Curve::new(3, 0, -1, 0).unwrap().over(1).unwrap();
        assert_eq!(
            g.structure_by_enumeration(DEFAULT_ENUM_BOUND)
                .unwrap()
                .to_string(),
            "Z/2 x Z/2"
        );
        let counts: Vec<usize> = [3u64, 5, 7, 11, 13]
            .iter()
            .map(|&p| {
                let mut keys: Vec<Curve> = Curve::all_over(p)
                    .unwrap()
                    .iter()
                    .map(Curve::isomorphism_key)
                    .collect();
                keys.sort();
                keys.dedup();
                keys.len()
            })
            .collect();
        assert_eq!(counts, vec![8, 12, 18, 22, 32]);
    }

    proptest::proptest! {
        #[test]
        fn counts_hasse_and_twist_sum(
            p in proptest::sample::select(vec![3u64, 5, 7, 11, 13, 17, 101]),
            a2 in 0i64..101, a4 in 0i64..101, a6 in 0i64..101,
        ) {
            let Ok(c) = Curve::new(p, a2, a4, a6) else { return Ok(()); };
            let g = c.over(1).unwrap();
            let n = g.enumerate_points(DEFAULT_ENUM_BOUND).unwrap().len() as u64;
            proptest::prop_assert_eq!(n, g.count_by_character(DEFAULT_ENUM_BOUND).unwrap());
            let a = p as i64 + 1 - n as i64;
            proptest::prop_assert!(within_hasse(&BigInt::from(a), &BigUint::from(p)));
            let t = c.quadratic_twist(c.least_nonresidue() as i64).unwrap();
            let nt = t.over(1).unwrap().count_by_character(DEFAULT_ENUM_BOUND).unwrap();
            proptest::prop_assert_eq!(n + nt, 2 * p + 2);
            proptest::prop_assert_eq!(c.isomorphism_key(), c.transform(2 % p, 1).isomorphism_key());
        }
    }
}
