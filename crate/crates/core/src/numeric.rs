//! Integer utilities: factorization, l-adic valuations, multiplicative
//! orders, invariant-factor bookkeeping and 2x2 Smith normal form over Z/l^K.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

const TRIAL_BOUND: u64 = 1_000_000;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_BOUND as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (2..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with a fixed base set; exact below 3.3e24, probabilistic above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in [
        2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
    ] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization with primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigUint,
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    /// The prime support as machine integers; `None` if some prime exceeds u64.
    pub fn small_primes(&self) -> Option<Vec<u64>> {
        self.factors.iter().map(|(p, _)| p.to_u64()).collect()
    }

    pub fn recompose(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| {
                if *e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Trial division to 10^6, then Pollard-Brent rho with a fixed seed sequence.
pub fn factorize(n: &BigUint) -> Factorization {
    assert!(!n.is_zero(), "factorize needs n >= 1");
    let mut counts: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = n.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        while (&rest % p).is_zero() {
            rest /= p;
            *counts.entry(pb.clone()).or_default() += 1;
        }
    }
    if !rest.is_one() {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m.is_one() {
                continue;
            }
            if is_probable_prime(&m) {
                *counts.entry(m).or_default() += 1;
                continue;
            }
            let d = pollard_brent(&m);
            stack.push(&m / &d);
            stack.push(d);
        }
    }
    Factorization {
        value: n.clone(),
        factors: counts.into_iter().collect(),
    }
}

pub fn factorize_u64(n: u64) -> Vec<(u64, u32)> {
    factorize(&BigUint::from(n))
        .factors
        .into_iter()
        .map(|(p, e)| (p.to_u64().expect("factor of a u64"), e))
        .collect()
}

fn pollard_brent(n: &BigUint) -> BigUint {
    if n.is_even() {
        return BigUint::from(2u32);
    }
    let one = BigUint::one();
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..r.saturating_sub(k).min(128) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += 128;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
    }
    unreachable!()
}

/// Returns `(v, cofactor)` with `n = l^v * cofactor` and `l` not dividing the cofactor.
pub fn l_adic_valuation(n: &BigUint, l: u64) -> (u32, BigUint) {
    assert!(!n.is_zero() && l >= 2);
    let mut v = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&BigUint::from(l));
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

pub fn valuation_u128(mut n: u128, l: u64) -> u32 {
    assert!(n != 0);
    let mut v = 0;
    while n.is_multiple_of(l as u128) {
        n /= l as u128;
        v += 1;
    }
    v
}

/// Smallest `s >= 1` with `r^s = 1 (mod modulus)`.
pub fn multiplicative_order(r: u64, modulus: u64) -> Result<u64> {
    assert!(modulus >= 2);
    let r = r % modulus;
    if r.gcd(&modulus) != 1 {
        return Err(Error::NotCoprime { value: r, modulus });
    }
    let phi = factorize_u64(modulus)
        .into_iter()
        .fold(1u64, |acc, (p, e)| acc * (p - 1) * p.pow(e - 1));
    let mut order = phi;
    for (f, _) in factorize_u64(phi) {
        while order % f == 0 && pow_mod(r, order / f, modulus) == 1 {
            order /= f;
        }
    }
    Ok(order)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = extended_gcd(a as i128 % m as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = extended_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// A finite abelian group as its invariant factors `d1 | d2 | ...`, each > 1.
/// The empty list is the trivial group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct InvariantFactors {
    factors: Vec<BigUint>,
}

impl InvariantFactors {
    pub fn trivial() -> Self {
        Self::default()
    }

    /// Canonical form of `Z/n1 x Z/n2 x ...` for arbitrary cyclic orders.
    pub fn from_cyclic_orders(orders: &[BigUint]) -> Self {
        let mut per_prime: BTreeMap<BigUint, Vec<u32>> = BTreeMap::new();
        for n in orders {
            assert!(!n.is_zero(), "cyclic order must be positive");
            for (p, e) in factorize(n).factors {
                per_prime.entry(p).or_default().push(e);
            }
        }
        Self::from_prime_powers(per_prime)
    }

    pub fn from_cyclic_u64(orders: &[u64]) -> Self {
        let big: Vec<BigUint> = orders.iter().map(|&n| BigUint::from(n)).collect();
        Self::from_cyclic_orders(&big)
    }

    /// Assemble from per-prime exponent lists (zeros allowed).
    pub fn from_prime_powers(parts: BTreeMap<BigUint, Vec<u32>>) -> Self {
        let rank = parts.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![BigUint::one(); rank];
        for (p, mut exps) in parts {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            for (slot, e) in exps.into_iter().enumerate() {
                factors[slot] *= p.pow(e);
            }
        }
        factors.retain(|d| !d.is_one());
        factors.reverse();
        Self { factors }
    }

    pub fn factors(&self) -> &[BigUint] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> BigUint {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Multiset of prime-power orders of the cyclic primary components.
    pub fn primary_components(&self) -> Vec<(BigUint, u32)> {
        let mut out: Vec<(BigUint, u32)> = self
            .factors
            .iter()
            .flat_map(|d| factorize(d).factors)
            .collect();
        out.sort();
        out
    }

    /// Inverse of `render_printed`; also accepts `{O}` and factors without the trailing `Z`.
    pub fn parse_printed(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "{O}" || t == "1" || t == "0" {
            return Ok(Self::trivial());
        }
        let bad = || Error::Parse(format!("unrecognized group {text:?}"));
        let orders = t
            .split(" x ")
            .map(|g| {
                let g = g.trim();
                let d = g.strip_prefix("Z/").ok_or_else(bad)?;
                let d = d.strip_suffix('Z').unwrap_or(d);
                d.parse::<BigUint>().map_err(|_| bad())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_cyclic_orders(&orders))
    }

    /// `Z/n1Z x Z/n2Z` style, the way printed tables write groups.
    pub fn render_printed(&self) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|d| format!("Z/{d}Z"))
            .collect::<Vec<_>>()
            .join(" x ")
    }
}

impl fmt::Display for InvariantFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Exponents `(e1, e2)` of the cokernel `Z/l^e1 x Z/l^e2` of a 2x2 integer
/// matrix acting on `(Z/l^K)^2`, with `e1 <= e2 <= K`.
pub fn snf_2x2(matrix: [[i128; 2]; 2], l: u64, precision: u32) -> (u32, u32) {
    assert!(precision >= 1);
    let modulus = (l as i128)
        .checked_pow(precision)
        .filter(|m| *m < (1i128 << 62))
        .expect("l^K must stay below 2^62");
    let val = |x: i128| -> u32 {
        let x = x.rem_euclid(modulus);
        if x == 0 {
            precision
        } else {
            valuation_u128(x as u128, l).min(precision)
        }
    };
    let mut m = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = matrix[i][j].rem_euclid(modulus);
        }
    }
    // pivot on an entry of minimal valuation
    let (mut pi, mut pj) = (0, 0);
    for i in 0..2 {
        for j in 0..2 {
            if val(m[i][j]) < val(m[pi][pj]) {
                pi = i;
                pj = j;
            }
        }
    }
    let e1 = val(m[pi][pj]);
    if e1 == precision {
        return (precision, precision);
    }
    if pi == 1 {
        m.swap(0, 1);
    }
    if pj == 1 {
        for row in m.iter_mut() {
            row.swap(0, 1);
        }
    }
    let scale = (l as i128).pow(e1);
    let unit = (m[0][0] / scale).rem_euclid(modulus);
    let unit_inv = inv_mod(unit as u64, modulus as u64).expect("pivot cofactor is a unit") as i128;
    let ratio = ((m[1][0] / scale).rem_euclid(modulus) * unit_inv).rem_euclid(modulus);
    let reduced = (m[1][1] - ratio * m[0][1] % modulus).rem_euclid(modulus);
    let e2 = val(reduced);
    (e1.min(e2), e1.max(e2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn trial_division_oracle(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factorize_small_values() {
        assert!(factorize(&big(1)).factors.is_empty());
        assert_eq!(factorize_u64(2107), vec![(7, 2), (43, 1)]);
        // frozen from the trial-division oracle
        assert_eq!(factorize_u64(1592137), vec![(157, 1), (10141, 1)]);
        assert_eq!(factorize_u64(1592137), trial_division_oracle(1592137));
    }

    #[test]
    fn factorize_needs_rho() {
        // two primes above the trial bound
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let f = factorize(&(big(p) * big(q) * big(q)));
        assert_eq!(f.factors, vec![(big(p), 1), (big(q), 2)]);
    }

    #[test]
    fn valuations() {
        assert_eq!(l_adic_valuation(&big(136), 2), (3, big(17)));
        assert_eq!(l_adic_valuation(&big(15776), 2), (5, big(493)));
        assert_eq!(l_adic_valuation(&big(19), 19), (1, big(1)));
    }

    #[test]
    fn orders() {
        assert_eq!(multiplicative_order(1, 4).unwrap(), 1);
        assert_eq!(multiplicative_order(3, 8).unwrap(), 2);
        assert_eq!(multiplicative_order(5, 19).unwrap(), 9);
        assert!(matches!(
            multiplicative_order(6, 9),
            Err(Error::NotCoprime { .. })
        ));
        // direct powering oracle
        for m in 2..200u64 {
            for r in 1..m {
                if r.gcd(&m) != 1 {
                    continue;
                }
                let mut s = 1;
                let mut x = r % m;
                while x != 1 % m {
                    x = x * r % m;
                    s += 1;
                }
                assert_eq!(multiplicative_order(r, m).unwrap(), s, "r={r} m={m}");
            }
        }
    }

    #[test]
    fn snf_examples() {
        assert_eq!(snf_2x2([[2, 0], [0, 4]], 2, 5), (1, 2));
        assert_eq!(snf_2x2([[1, 0], [0, 1]], 2, 5), (0, 0));
        assert_eq!(snf_2x2([[6, 0], [0, 6]], 3, 4), (1, 1));
        assert_eq!(snf_2x2([[0, 0], [0, 0]], 3, 4), (4, 4));
        assert_eq!(snf_2x2([[0, 9], [3, 0]], 3, 4), (1, 2));
    }

    #[test]
    fn invariant_factor_canonical_form() {
        let g = InvariantFactors::from_cyclic_u64(&[9, 39]);
        assert_eq!(g.factors(), &[big(3), big(117)]);
        assert_eq!(g.to_string(), "Z/3 x Z/117");
        let h = InvariantFactors::from_cyclic_u64(&[4, 34]);
        assert_eq!(h.factors(), &[big(2), big(68)]);
        assert_eq!(InvariantFactors::from_cyclic_u64(&[1]).to_string(), "1");
        assert_eq!(
            InvariantFactors::from_cyclic_u64(&[2, 14]).render_printed(),
            "Z/2Z x Z/14Z"
        );
    }

    proptest::proptest! {
        #[test]
        fn factorization_recomposes(n in 1u64..1_000_000_000_000u64) {
            let f = factorize(&big(n));
            proptest::prop_assert_eq!(f.recompose(), big(n));
            let mut last = BigUint::zero();
            for (p, e) in &f.factors {
                proptest::prop_assert!(is_probable_prime(p));
                proptest::prop_assert!(*p > last && *e >= 1);
                last = p.clone();
            }
        }

        #[test]
        fn valuation_reconstructs(n in 1u64..u64::MAX / 4, l in proptest::sample::select(vec![2u64, 3, 5, 7, 19, 1277])) {
            let (v, c) = l_adic_valuation(&big(n), l);
            proptest::prop_assert_eq!(BigUint::from(l).pow(v) * &c, big(n));
            proptest::prop_assert!(!(c % l).is_zero());
        }

        #[test]
        fn snf_matches_determinant(a in -50i128..50, b in -50i128..50, c in -50i128..50, d in -50i128..50,
                                   l in proptest::sample::select(vec![2u64, 3, 5])) {
            let k = 6;
            let (e1, e2) = snf_2x2([[a, b], [c, d]], l, k);
            proptest::prop_assert!(e1 <= e2 && e2 <= k);
            let det = a * d - b * c;
            if det != 0 {
                let vdet = valuation_u128(det.unsigned_abs(), l);
                if vdet < k {
                    proptest::prop_assert_eq!(e1 + e2, vdet);
                }
            }
            let gcd_val = [a, b, c, d].iter().filter(|x| **x != 0)
                .map(|x| valuation_u128(x.unsigned_abs(), l)).min().unwrap_or(k).min(k);
            proptest::prop_assert_eq!(e1, gcd_val);
        }

        #[test]
        fn canonical_form_is_a_divisibility_chain(orders in proptest::collection::vec(1u64..500, 0..4)) {
            let g = InvariantFactors::from_cyclic_u64(&orders);
            let prod: u64 = orders.iter().product();
            proptest::prop_assert_eq!(g.order(), big(prod));
            for w in g.factors().windows(2) {
                proptest::prop_assert!((&w[1] % &w[0]).is_zero());
            }
            proptest::prop_assert!(g.factors().iter().all(|d| !d.is_one()));
        }
    }
}
