//! Finite fields F_{p^d} as F_p[x]/(f) for a fixed monic irreducible f, plus
//! polynomials over them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{inv_mod, is_prime_u64, pow_mod};

pub const DEFAULT_DEGREE_CAP: usize = 256;

/// Coefficient vector `c_0 + c_1 x + ... + c_{d-1} x^{d-1}`, always of length `d`.
pub type FieldElem = Vec<u64>;

/// Polynomial over a field, lowest coefficient first, no trailing zeros.
pub type Poly = Vec<FieldElem>;

/// Polynomial arithmetic over F_p modulo a monic `modulus`.
#[derive(Debug, Clone)]
struct ResidueRing {
    p: u64,
    modulus: Vec<u64>,
    lazy: bool,
}

impl ResidueRing {
    fn new(p: u64, modulus: Vec<u64>) -> Self {
        let d = modulus.len() - 1;
        // u64 accumulators stay exact when 2d(p-1)^2 fits
        let lazy = (p - 1)
            .checked_mul(p - 1)
            .and_then(|sq| sq.checked_mul(2 * d as u64 + 2))
            .is_some_and(|b| b < 1 << 63);
        Self { p, modulus, lazy }
    }

    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let d = self.degree();
        if d == 1 {
            return vec![((a[0] as u128 * b[0] as u128) % self.p as u128) as u64];
        }
        if self.lazy {
            let mut acc = vec![0u64; 2 * d - 1];
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    acc[i + j] += ai * bj;
                }
            }
            self.reduce_lazy(acc)
        } else {
            let p = self.p as u128;
            let mut acc = vec![0u128; 2 * d - 1];
            for (i, &ai) in a.iter().enumerate() {
                for (j, &bj) in b.iter().enumerate() {
                    acc[i + j] = (acc[i + j] + ai as u128 * bj as u128) % p;
                }
            }
            let acc: Vec<u64> = acc.into_iter().map(|c| c as u64).collect();
            self.reduce_exact(acc)
        }
    }

    /// Reduce a product whose entries are below 2d(p-1)^2.
    fn reduce_lazy(&self, mut acc: Vec<u64>) -> Vec<u64> {
        let p = self.p;
        let d = self.degree();
        let f = &self.modulus;
        for i in (d..acc.len()).rev() {
            let c = acc[i] % p;
            if c == 0 {
                continue;
            }
            let neg = p - c;
            for j in 0..d {
                let t = &mut acc[i - d + j];
                *t = (*t + neg * f[j]) % p;
            }
        }
        acc.truncate(d);
        for c in acc.iter_mut() {
            *c %= p;
        }
        acc
    }

    fn reduce_exact(&self, mut acc: Vec<u64>) -> Vec<u64> {
        let p = self.p as u128;
        let d = self.degree();
        let f = &self.modulus;
        for i in (d..acc.len()).rev() {
            let c = acc[i] as u128 % p;
            if c == 0 {
                continue;
            }
            for j in 0..d {
                let t = acc[i - d + j] as u128;
                acc[i - d + j] = ((t + (p - c) * f[j] as u128) % p) as u64;
            }
        }
        acc.truncate(d);
        acc
    }

    fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[0] = 1;
        v
    }

    fn pow_u64(&self, base: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut b = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }
}

/// An extension F_{p^d} (or the prime field when `d == 1`).
#[derive(Debug)]
pub struct FieldCtx {
    p: u64,
    d: usize,
    ring: ResidueRing,
    frob: Vec<Vec<u64>>,
    size: BigUint,
    tonelli: OnceLock<(u32, BigUint, FieldElem)>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.d == other.d
    }
}

impl Eq for FieldCtx {}

type FieldCache = Mutex<HashMap<(u64, usize), Arc<FieldCtx>>>;

fn cache() -> &'static FieldCache {
    static CACHE: OnceLock<FieldCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Build (or fetch from the process-wide cache) F_{p^d} with the default degree cap.
pub fn make_field(p: u64, d: usize) -> Result<Arc<FieldCtx>> {
    make_field_capped(p, d, DEFAULT_DEGREE_CAP)
}

pub fn make_field_capped(p: u64, d: usize, cap: usize) -> Result<Arc<FieldCtx>> {
    if p.is_multiple_of(2) || !is_prime_u64(p) || p >= 1 << 62 {
        return Err(Error::NotOddPrime(p));
    }
    if d == 0 || d > cap {
        return Err(Error::DegreeCap { degree: d, cap });
    }
    if let Some(ctx) = cache().lock().unwrap().get(&(p, d)) {
        return Ok(ctx.clone());
    }
    let ctx = Arc::new(FieldCtx::build(p, d));
    Ok(cache().lock().unwrap().entry((p, d)).or_insert(ctx).clone())
}

/// Least monic irreducible of degree `d`, ordering candidates by `sum c_i p^i`.
fn least_irreducible(p: u64, d: usize) -> Vec<u64> {
    if d == 1 {
        return vec![0, 1];
    }
    let mut low = vec![0u64; d];
    loop {
        // constant term 0 means x divides the candidate
        if low[0] != 0 {
            let mut f = low.clone();
            f.push(1);
            if is_irreducible(p, &f) {
                return f;
            }
        }
        for c in low.iter_mut() {
            *c += 1;
            if *c < p {
                break;
            }
            *c = 0;
        }
    }
}

/// Distinct-degree test: no factor of degree `k <= d/2`, then `x^{p^d} = x`.
fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let d = f.len() - 1;
    let ring = ResidueRing::new(p, f.to_vec());
    let mut x = vec![0u64; d];
    x[1 % d] = 1;
    let mut power = x.clone();
    for k in 1..=d {
        power = ring.pow_u64(&power, p);
        if k <= d / 2 {
            let mut h = power.clone();
            h[1] = (h[1] + p - 1) % p;
            let g = poly_gcd_fp(f.to_vec(), trim_fp(h), p);
            if g.len() > 1 {
                return false;
            }
        }
    }
    power == x
}

fn trim_fp(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem_fp(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p).expect("nonzero leading coefficient");
    while a.len() > db {
        let top = a.len() - 1;
        let c = (a[top] as u128 * lead_inv as u128 % p as u128) as u64;
        if c != 0 {
            for j in 0..=db {
                let t = &mut a[top - db + j];
                *t = ((*t as u128 + (p - c) as u128 * b[j] as u128) % p as u128) as u64;
            }
        }
        a.pop();
        a = trim_fp(a);
    }
    a
}

fn poly_gcd_fp(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        let r = poly_rem_fp(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Res(f, g) over F_p for monic `f`, i.e. the product of `g` over the roots of `f`.
fn resultant_fp(f: Vec<u64>, g: Vec<u64>, p: u64) -> u64 {
    let mut a = trim_fp(f);
    let mut b = trim_fp(g);
    let mut acc: u64 = 1;
    loop {
        if b.is_empty() {
            return 0;
        }
        let m = a.len() - 1;
        let n = b.len() - 1;
        if n == 0 {
            return (acc as u128 * pow_mod(b[0], m as u64, p) as u128 % p as u128) as u64;
        }
        let r = poly_rem_fp(a.clone(), &b, p);
        if r.is_empty() {
            return 0;
        }
        let dr = r.len() - 1;
        // res(a,b) = (-1)^{mn} lc(b)^{m - deg r} res(b, r)
        let mut factor = pow_mod(b[n], (m - dr) as u64, p);
        if (m * n) % 2 == 1 {
            factor = (p - factor) % p;
        }
        acc = (acc as u128 * factor as u128 % p as u128) as u64;
        a = b;
        b = r;
    }
}

impl FieldCtx {
    fn build(p: u64, d: usize) -> Self {
        let modulus = least_irreducible(p, d);
        let ring = ResidueRing::new(p, modulus);
        let mut x = vec![0u64; d];
        x[1 % d] = if d == 1 { 0 } else { 1 };
        let frob = if d == 1 {
            vec![vec![1]]
        } else {
            let xp = ring.pow_u64(&x, p);
            let mut rows = Vec::with_capacity(d);
            let mut cur = ring.one();
            for _ in 0..d {
                rows.push(cur.clone());
                cur = ring.mul(&cur, &xp);
            }
            rows
        };
        Self {
            p,
            d,
            ring,
            frob,
            size: BigUint::from(p).pow(d as u32),
            tonelli: OnceLock::new(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Monic modulus, lowest coefficient first (`[0, 1]` for the prime field).
    pub fn modulus(&self) -> &[u64] {
        &self.ring.modulus
    }

    pub fn size(&self) -> &BigUint {
        &self.size
    }

    pub fn size_u64(&self) -> Option<u64> {
        self.size.to_u64()
    }

    pub fn zero(&self) -> FieldElem {
        vec![0; self.d]
    }

    pub fn one(&self) -> FieldElem {
        self.ring.one()
    }

    pub fn from_u64(&self, c: u64) -> FieldElem {
        let mut v = self.zero();
        v[0] = c % self.p;
        v
    }

    pub fn from_i64(&self, c: i64) -> FieldElem {
        self.from_u64(c.rem_euclid(self.p as i64) as u64)
    }

    /// The generator `x` of the extension (equals 0 in the prime field).
    pub fn generator(&self) -> FieldElem {
        let mut v = self.zero();
        if self.d > 1 {
            v[1] = 1;
        }
        v
    }

    /// Element with base-p digits of `index` as coefficients.
    pub fn from_index(&self, mut index: u64) -> FieldElem {
        let mut v = self.zero();
        for c in v.iter_mut() {
            *c = index % self.p;
            index /= self.p;
        }
        v
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, a: &FieldElem) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    /// `Some(c)` when `a` lies in the prime field.
    pub fn as_prime(&self, a: &FieldElem) -> Option<u64> {
        a[1..].iter().all(|&c| c == 0).then_some(a[0])
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| if x >= y { x - y } else { x + self.p - y })
            .collect()
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        a.iter()
            .map(|&x| if x == 0 { 0 } else { self.p - x })
            .collect()
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.ring.mul(a, b)
    }

    pub fn sqr(&self, a: &FieldElem) -> FieldElem {
        self.ring.mul(a, a)
    }

    pub fn mul_u64(&self, a: &FieldElem, c: u64) -> FieldElem {
        let c = c % self.p;
        a.iter()
            .map(|&x| (x as u128 * c as u128 % self.p as u128) as u64)
            .collect()
    }

    /// Inverse by the extended Euclidean algorithm; `None` for zero.
    pub fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        let p = self.p;
        if self.d == 1 {
            return inv_mod(a[0], p).map(|x| vec![x]);
        }
        if self.is_zero(a) {
            return None;
        }
        // invariant: s_i * a = r_i (mod f)
        let mut r0 = self.ring.modulus.clone();
        let mut r1 = trim_fp(a.clone());
        let mut s0: Vec<u64> = Vec::new();
        let mut s1: Vec<u64> = vec![1];
        while r1.len() > 1 {
            let (q, r) = poly_divrem_fp(&r0, &r1, p);
            let qs = poly_mul_fp(&q, &s1, p);
            let s2 = poly_sub_fp(&s0, &qs, p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        let c = inv_mod(r1[0], p)?;
        let mut out = self.zero();
        for (i, &v) in s1.iter().enumerate() {
            out[i] = (v as u128 * c as u128 % p as u128) as u64;
        }
        Some(out)
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    pub fn pow_u64(&self, a: &FieldElem, e: u64) -> FieldElem {
        self.ring.pow_u64(a, e)
    }

    /// Left-to-right square-and-multiply with a big exponent.
    pub fn pow(&self, a: &FieldElem, e: &BigUint) -> FieldElem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.sqr(&acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// The p-power Frobenius.
    pub fn frobenius(&self, a: &FieldElem) -> FieldElem {
        if self.d == 1 {
            return a.clone();
        }
        let p = self.p;
        let mut acc = vec![0u128; self.d];
        for (i, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (slot, &m) in acc.iter_mut().zip(&self.frob[i]) {
                *slot = (*slot + c as u128 * m as u128) % p as u128;
            }
        }
        acc.into_iter().map(|c| c as u64).collect()
    }

    /// `a^{p^k}`.
    pub fn frobenius_pow(&self, a: &FieldElem, k: usize) -> FieldElem {
        let k = k % self.d;
        let mut out = a.clone();
        for _ in 0..k {
            out = self.frobenius(&out);
        }
        out
    }

    /// Norm down to F_p, computed as a resultant against the modulus.
    pub fn norm(&self, a: &FieldElem) -> u64 {
        if self.d == 1 {
            return a[0];
        }
        resultant_fp(self.ring.modulus.clone(), a.clone(), self.p)
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    pub fn quadratic_character(&self, a: &FieldElem) -> i8 {
        // a is a square in F_{p^d} iff its norm is a square in F_p
        let n = self.norm(a);
        if n == 0 {
            return 0;
        }
        if pow_mod(n, (self.p - 1) / 2, self.p) == 1 {
            1
        } else {
            -1
        }
    }

    /// Euler-criterion character, kept as an independent check of the norm route.
    pub fn euler_character(&self, a: &FieldElem) -> i8 {
        if self.is_zero(a) {
            return 0;
        }
        let e = (&self.size - 1u32) >> 1;
        if self.is_one(&self.pow(a, &e)) {
            1
        } else {
            -1
        }
    }

    fn tonelli_data(&self) -> &(u32, BigUint, FieldElem) {
        self.tonelli.get_or_init(|| {
            let qm1 = &self.size - 1u32;
            let s = qm1.trailing_zeros().unwrap_or(0) as u32;
            let t = &qm1 >> s;
            let z = (1..)
                .map(|i| self.from_index(i))
                .find(|e| self.quadratic_character(e) == -1)
                .expect("non-residue exists in an odd-order field");
            let c = self.pow(&z, &t);
            (s, t, c)
        })
    }

    /// Square root by Tonelli-Shanks; of the two roots the one with the
    /// smaller coefficient vector (compared from the constant term up).
    pub fn sqrt(&self, a: &FieldElem) -> Result<FieldElem> {
        match self.quadratic_character(a) {
            0 => return Ok(self.zero()),
            -1 => return Err(Error::NonResidue),
            _ => {}
        }
        let (s, t, c0) = self.tonelli_data();
        let mut m = *s;
        let mut c = c0.clone();
        let mut tt = self.pow(a, t);
        let mut r = self.pow(a, &((t + 1u32) >> 1));
        while !self.is_one(&tt) {
            let mut i = 0;
            let mut probe = tt.clone();
            while !self.is_one(&probe) {
                probe = self.sqr(&probe);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.sqr(&b);
            }
            m = i;
            c = self.sqr(&b);
            tt = self.mul(&tt, &c);
            r = self.mul(&r, &b);
        }
        let other = self.neg(&r);
        Ok(if other < r { other } else { r })
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> FieldElem {
        (0..self.d).map(|_| rng.gen_range(0..self.p)).collect()
    }

    /// All field elements in index order; only for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        let n = self.size_u64().expect("field too large to enumerate");
        (0..n).map(move |i| self.from_index(i))
    }

    // polynomials over the field

    pub fn poly_trim(&self, mut a: Poly) -> Poly {
        while a.last().is_some_and(|c| self.is_zero(c)) {
            a.pop();
        }
        a
    }

    /// Polynomial with prime-field coefficients, lowest first.
    pub fn poly_from_i64(&self, coeffs: &[i64]) -> Poly {
        self.poly_trim(coeffs.iter().map(|&c| self.from_i64(c)).collect())
    }

    pub fn poly_eval(&self, f: &[FieldElem], x: &FieldElem) -> FieldElem {
        f.iter()
            .rev()
            .fold(self.zero(), |acc, c| self.add(&self.mul(&acc, x), c))
    }

    pub fn poly_add(&self, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        let n = a.len().max(b.len());
        let zero = self.zero();
        let out = (0..n)
            .map(|i| self.add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
            .collect();
        self.poly_trim(out)
    }

    pub fn poly_sub(&self, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        let n = a.len().max(b.len());
        let zero = self.zero();
        let out = (0..n)
            .map(|i| self.sub(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
            .collect();
        self.poly_trim(out)
    }

    pub fn poly_mul(&self, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y));
            }
        }
        self.poly_trim(out)
    }

    pub fn poly_divrem(&self, a: &[FieldElem], b: &[FieldElem]) -> (Poly, Poly) {
        assert!(!b.is_empty(), "division by the zero polynomial");
        let mut rem = self.poly_trim(a.to_vec());
        let db = b.len() - 1;
        if rem.len() <= db {
            return (Vec::new(), rem);
        }
        let lead_inv = self.inv(&b[db]).expect("nonzero leading coefficient");
        let mut quot = vec![self.zero(); rem.len() - db];
        while rem.len() > db {
            let top = rem.len() - 1;
            let c = self.mul(&rem[top], &lead_inv);
            for j in 0..=db {
                rem[top - db + j] = self.sub(&rem[top - db + j], &self.mul(&c, &b[j]));
            }
            quot[top - db] = c;
            rem.pop();
            rem = self.poly_trim(rem);
        }
        (self.poly_trim(quot), rem)
    }

    pub fn poly_monic(&self, a: Poly) -> Poly {
        match a.last() {
            None => a,
            Some(lead) => {
                let li = self.inv(lead).expect("nonzero leading coefficient");
                a.iter().map(|c| self.mul(c, &li)).collect()
            }
        }
    }

    /// Monic gcd.
    pub fn poly_gcd(&self, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        let mut a = self.poly_trim(a.to_vec());
        let mut b = self.poly_trim(b.to_vec());
        while !b.is_empty() {
            let (_, r) = self.poly_divrem(&a, &b);
            a = std::mem::replace(&mut b, r);
        }
        self.poly_monic(a)
    }

    fn poly_mulmod(&self, a: &[FieldElem], b: &[FieldElem], m: &[FieldElem]) -> Poly {
        self.poly_divrem(&self.poly_mul(a, b), m).1
    }

    pub fn poly_powmod(&self, base: &[FieldElem], e: &BigUint, m: &[FieldElem]) -> Poly {
        let base = self.poly_divrem(base, m).1;
        let mut acc = self.poly_divrem(&[self.one()], m).1;
        for i in (0..e.bits()).rev() {
            acc = self.poly_mulmod(&acc, &acc, m);
            if e.bit(i) {
                acc = self.poly_mulmod(&acc, &base, m);
            }
        }
        acc
    }

    /// Distinct roots of `f` in this field, in ascending coefficient order.
    pub fn find_roots(&self, f: &[FieldElem]) -> Vec<FieldElem> {
        let f = self.poly_monic(self.poly_trim(f.to_vec()));
        assert!(!f.is_empty(), "find_roots needs a nonzero polynomial");
        if f.len() == 1 {
            return Vec::new();
        }
        let x = vec![self.zero(), self.one()];
        let xq = self.poly_powmod(&x, &self.size, &f);
        let split = self.poly_gcd(&f, &self.poly_sub(&xq, &x));
        let mut roots = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        self.split_linear(split, &mut rng, &mut roots);
        roots.sort();
        roots
    }

    /// Cantor-Zassenhaus splitting of a squarefree product of linear factors.
    fn split_linear(&self, g: Poly, rng: &mut ChaCha8Rng, out: &mut Vec<FieldElem>) {
        match g.len() {
            0 | 1 => return,
            2 => {
                out.push(self.neg(&g[0]));
                return;
            }
            _ => {}
        }
        let half = (&self.size - 1u32) >> 1;
        loop {
            let delta = self.random(rng);
            let lin = vec![delta, self.one()];
            let h = self.poly_powmod(&lin, &half, &g);
            let h = self.poly_sub(&h, &[self.one()]);
            let a = self.poly_gcd(&g, &h);
            if a.len() > 1 && a.len() < g.len() {
                let (b, _) = self.poly_divrem(&g, &a);
                let b = self.poly_monic(b);
                self.split_linear(a, rng, out);
                self.split_linear(b, rng, out);
                return;
            }
        }
    }
}

fn poly_divrem_fp(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = b.len() - 1;
    let mut rem = trim_fp(a.to_vec());
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let lead_inv = inv_mod(b[db], p).expect("nonzero leading coefficient");
    let mut quot = vec![0u64; rem.len() - db];
    while rem.len() > db {
        let top = rem.len() - 1;
        let c = (rem[top] as u128 * lead_inv as u128 % p as u128) as u64;
        if c != 0 {
            for j in 0..=db {
                let t = &mut rem[top - db + j];
                *t = ((*t as u128 + (p - c) as u128 * b[j] as u128) % p as u128) as u64;
            }
        }
        quot[top - db] = c;
        rem.pop();
        rem = trim_fp(rem);
    }
    (trim_fp(quot), rem)
}

fn poly_mul_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
        }
    }
    trim_fp(out.into_iter().map(|c| c as u64).collect())
}

fn poly_sub_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim_fp(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_irreducible_quadratics(p: u64) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        for c1 in 0..p {
            for c0 in 0..p {
                if (0..p).all(|x| (x * x + c1 * x + c0) % p != 0) {
                    out.push(vec![c0, c1, 1]);
                }
            }
        }
        out
    }

    #[test]
    fn prime_field_and_small_extensions() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(f3.degree(), 1);
        let f9 = make_field(3, 2).unwrap();
        let quads = brute_irreducible_quadratics(3);
        assert_eq!(quads.len(), 3);
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        assert!(quads.contains(&f9.modulus().to_vec()));
        let f625 = make_field(5, 4).unwrap();
        let x = f625.generator();
        assert_eq!(f625.frobenius_pow(&x, 4), x);
        assert_ne!(f625.frobenius_pow(&x, 2), x);
        assert!(Arc::ptr_eq(&f625, &make_field(5, 4).unwrap()));
    }

    #[test]
    fn field_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), Error::NotOddPrime(4));
        assert_eq!(make_field(2, 1).unwrap_err(), Error::NotOddPrime(2));
        assert!(matches!(make_field(3, 257), Err(Error::DegreeCap { .. })));
        assert!(make_field_capped(3, 20, 16).is_err());
    }

    #[test]
    fn least_irreducible_matches_brute_force_order() {
        for p in [3u64, 5, 7] {
            let mut quads = brute_irreducible_quadratics(p);
            quads.sort_by_key(|f| f[0] + f[1] * p);
            assert_eq!(make_field(p, 2).unwrap().modulus(), quads[0].as_slice());
        }
    }

    #[test]
    fn characters() {
        let f7 = make_field(7, 1).unwrap();
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(f7.quadratic_character(&f7.from_u64(0)), 0);
        assert_eq!(f5.quadratic_character(&f5.from_u64(2)), -1);
        assert_eq!(f7.quadratic_character(&f7.from_u64(2)), 1);
        // every prime-field element is a square in the quadratic extension
        let f25 = make_field(5, 2).unwrap();
        assert_eq!(f25.quadratic_character(&f25.from_u64(2)), 1);
        for f in [make_field(3, 3).unwrap(), make_field(7, 2).unwrap(), f25] {
            for e in f.elements() {
                assert_eq!(f.quadratic_character(&e), f.euler_character(&e));
            }
        }
    }

    #[test]
    fn square_roots() {
        let f11 = make_field(11, 1).unwrap();
        assert_eq!(f11.sqrt(&f11.from_u64(4)).unwrap(), vec![2]);
        assert_eq!(f11.sqrt(&f11.zero()).unwrap(), vec![0]);
        let f7 = make_field(7, 1).unwrap();
        let exhaustive: Vec<u64> = (0..7).filter(|y| y * y % 7 == 2).collect();
        assert_eq!(exhaustive, vec![3, 4]);
        assert_eq!(f7.sqrt(&f7.from_u64(2)).unwrap(), vec![3]);
        assert_eq!(f7.sqrt(&f7.from_u64(3)), Err(Error::NonResidue));
        for f in [make_field(3, 4).unwrap(), make_field(13, 2).unwrap()] {
            for e in f.elements() {
                if f.quadratic_character(&e) >= 0 {
                    let r = f.sqrt(&e).unwrap();
                    assert_eq!(f.sqr(&r), e);
                    assert!(r <= f.neg(&r));
                }
            }
        }
    }

    #[test]
    fn roots() {
        let f3 = make_field(3, 1).unwrap();
        let cubic = f3.poly_from_i64(&[0, -1, 0, 1]);
        assert_eq!(f3.find_roots(&cubic), vec![vec![0], vec![1], vec![2]]);
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(
            f5.find_roots(&f5.poly_from_i64(&[-1, -1, 0, 1])),
            vec![vec![2]]
        );
        assert!(f3.find_roots(&f3.poly_from_i64(&[1, 0, 1])).is_empty());
        let f9 = make_field(3, 2).unwrap();
        let x = f9.generator();
        let found = f9.find_roots(&f9.poly_from_i64(&[1, 0, 1]));
        let mut expected = vec![x.clone(), f9.neg(&x)];
        expected.sort();
        assert_eq!(found, expected);
    }

    #[test]
    fn frobenius_fixes_prime_subfield() {
        for (p, d) in [(3u64, 5usize), (5, 3), (7, 4), (11, 2)] {
            let f = make_field(p, d).unwrap();
            let fixed = f.elements().filter(|e| f.frobenius(e) == *e).count();
            assert_eq!(fixed as u64, p);
        }
    }

    #[test]
    fn large_degree_modulus_is_irreducible() {
        let f = make_field(3, 64).unwrap();
        let x = f.generator();
        assert_eq!(f.frobenius_pow(&x, 64), x);
        assert_eq!(f.pow(&x, f.size()), x);
        assert_ne!(f.frobenius_pow(&x, 32), x);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn fields() -> impl Strategy<Value = Arc<FieldCtx>> {
            prop::sample::select(vec![
                (3u64, 1usize),
                (3, 5),
                (5, 2),
                (7, 3),
                (13, 2),
                (11, 7),
            ])
            .prop_map(|(p, d)| make_field(p, d).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(2000))]
            #[test]
            fn field_axioms(f in fields(), seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
                prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
                prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
                if !f.is_zero(&a) {
                    prop_assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
                }
                prop_assert_eq!(f.frobenius(&f.add(&a, &b)), f.add(&f.frobenius(&a), &f.frobenius(&b)));
                prop_assert_eq!(f.frobenius(&f.mul(&a, &b)), f.mul(&f.frobenius(&a), &f.frobenius(&b)));
                prop_assert_eq!(f.frobenius(&a), f.pow_u64(&a, f.p()));
                if !f.is_zero(&a) && !f.is_zero(&b) {
                    prop_assert_eq!(
                        f.quadratic_character(&f.mul(&a, &b)),
                        f.quadratic_character(&a) * f.quadratic_character(&b)
                    );
                }
            }

            #[test]
            fn roots_match_exhaustive_evaluation(
                (p, d) in prop::sample::select(vec![(3u64, 1usize), (3, 3), (5, 2), (7, 1), (11, 2), (13, 1)]),
                coeffs in prop::collection::vec(-20i64..20, 1..=5),
            ) {
                let f = make_field(p, d).unwrap();
                let poly = f.poly_from_i64(&coeffs);
                prop_assume!(!poly.is_empty());
                let found = f.find_roots(&poly);
                let mut exhaustive: Vec<FieldElem> =
                    f.elements().filter(|e| f.is_zero(&f.poly_eval(&poly, e))).collect();
                exhaustive.sort();
                prop_assert_eq!(found, exhaustive);
            }
        }
    }
}
