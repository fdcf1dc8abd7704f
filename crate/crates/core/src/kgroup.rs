//! Group structure of K_{2m}(E/F_{q^n}): per-prime Sylow structure from the
//! Frobenius action on l-power torsion, plus an explicit Frobenius-matrix oracle.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::{Curve, CurveGroup, Point, DEFAULT_ENUM_BOUND};
use crate::error::{Error, Result};
use crate::field::DEFAULT_DEGREE_CAP;
use crate::numeric::{
    factorize, inv_mod, l_adic_valuation, multiplicative_order, pow_mod, snf_2x2, InvariantFactors,
};
use crate::zeta::{count_from_trace, extension_trace, kgroup_order, trace};

/// Resource limits and randomness for torsion computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub degree_cap: usize,
    pub enum_bound: u64,
    pub seed: u64,
    /// Random points drawn per unit of `l^j` before giving up.
    pub sample_factor: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            degree_cap: DEFAULT_DEGREE_CAP,
            enum_bound: DEFAULT_ENUM_BOUND,
            seed: 0,
            sample_factor: 64,
        }
    }
}

impl Caps {
    /// Deterministic generator for one task, independent of scheduling order.
    pub fn rng_for(&self, task: &[u64]) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
        for &t in task {
            h ^= t;
            h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
            h ^= h >> 31;
        }
        rng.set_stream(h);
        rng
    }
}

/// Generators of the l-Sylow subgroup of some E(F_{p^d}): `Z/l^a x Z/l^b`, `a >= b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SylowBasis {
    pub l: u64,
    pub p1: Point,
    pub a: u32,
    pub p2: Point,
    pub b: u32,
}

/// Generators of E(F_{Q^s})[l^j].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionBasis {
    pub l: u64,
    pub j: u32,
    pub s: usize,
    pub points: Vec<Point>,
    /// Exact order exponents of `points`, descending.
    pub levels: Vec<u32>,
}

impl TorsionBasis {
    pub fn rank(&self) -> usize {
        self.points.len()
    }
}

/// Structure of K_{2m}(E/F_{q^n}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGroupStructure {
    pub n: u64,
    pub m: u64,
    pub order: BigUint,
    pub factors: InvariantFactors,
    /// `(l, e1, e2)` for every prime divisor of the order.
    pub sylow: Vec<(BigUint, u32, u32)>,
}

impl fmt::Display for KGroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.factors)
    }
}

fn l_power(l: u64, e: u32) -> BigUint {
    BigUint::from(l).pow(e)
}

/// Smallest `k` with `[l^k] pt = O`; `pt` must have l-power order.
fn l_order(g: &CurveGroup, pt: &Point, l: u64) -> u32 {
    let mut k = 0;
    let mut cur = pt.clone();
    while !cur.is_infinity() {
        cur = g.mul_u64(l, &cur);
        k += 1;
    }
    k
}

/// `d` in `[0, l)` with `[d] gen = target`, for `gen` of order `l` (baby-step giant-step).
fn small_dlog(g: &CurveGroup, gen: &Point, target: &Point, l: u64) -> Option<u64> {
    let step = ((l as f64).sqrt().ceil() as u64).max(1);
    let mut baby = HashMap::with_capacity(step as usize);
    let mut cur = Point::Infinity;
    for j in 0..step {
        baby.entry(cur.clone()).or_insert(j);
        cur = g.add(&cur, gen).expect("same field");
    }
    let giant = g.neg(&g.mul_u64(step, gen));
    let mut y = target.clone();
    for i in 0..=step {
        if let Some(&j) = baby.get(&y) {
            let d = i * step + j;
            if d < l {
                return Some(d);
            }
        }
        y = g.add(&y, &giant).expect("same field");
    }
    None
}

/// `k` with `[k] base = target` where `base` has order `l^a`; `None` if outside `<base>`.
fn cyclic_dlog(g: &CurveGroup, base: &Point, a: u32, l: u64, target: &Point) -> Option<BigUint> {
    if a == 0 {
        return target.is_infinity().then(BigUint::zero);
    }
    let gen = g.mul(&l_power(l, a - 1), base);
    let mut k = BigUint::zero();
    for t in 0..a {
        let rest = g.sub(target, &g.mul(&k, base));
        let probe = g.mul(&l_power(l, a - 1 - t), &rest);
        let d = small_dlog(g, &gen, &probe, l)?;
        k += d * l_power(l, t);
    }
    (g.mul(&k, base) == *target).then_some(k)
}

/// Certified generators of the l-Sylow subgroup of a group of known order.
///
/// Candidates are `[u]R` for random `R` (and every point when the field is
/// small enough to enumerate). A pair is accepted only when its generated
/// subgroup has the full order `l^w`.
pub fn sylow_basis(
    g: &CurveGroup,
    group_order: &BigUint,
    l: u64,
    rng: &mut ChaCha8Rng,
    budget: u64,
    enum_bound: u64,
) -> Result<SylowBasis> {
    let (w, u) = l_adic_valuation(group_order, l);
    let mut basis = SylowBasis {
        l,
        p1: Point::Infinity,
        a: 0,
        p2: Point::Infinity,
        b: 0,
    };
    if w == 0 {
        return Ok(basis);
    }
    let try_candidate = |r: &Point, basis: &mut SylowBasis| -> bool {
        let t = g.mul(&u, r);
        let ord = l_order(g, &t, l);
        if ord > basis.a {
            basis.p1 = t;
            basis.a = ord;
            return ord == w;
        }
        let b = w - basis.a;
        let shifted = g.mul(&l_power(l, b), &t);
        let Some(k) = cyclic_dlog(g, &basis.p1, basis.a, l, &shifted) else {
            return false;
        };
        let (c, rem) = k.div_rem(&l_power(l, b));
        if !rem.is_zero() {
            return false;
        }
        let t2 = g.sub(&t, &g.mul(&c, &basis.p1));
        if l_order(g, &t2, l) != b {
            return false;
        }
        // <t2> meets <p1> trivially iff its order-l element avoids <p1>
        let socle = g.mul(&l_power(l, b - 1), &t2);
        let p1_socle = g.mul(&l_power(l, basis.a - 1), &basis.p1);
        if small_dlog(g, &p1_socle, &socle, l).is_some() {
            return false;
        }
        basis.p2 = t2;
        basis.b = b;
        true
    };
    for _ in 0..budget {
        let r = g.random_point(rng);
        if try_candidate(&r, &mut basis) {
            return Ok(basis);
        }
    }
    if g.field.size_u64().is_some_and(|q| q <= enum_bound) {
        for r in g.enumerate_points(enum_bound)? {
            if try_candidate(&r, &mut basis) {
                return Ok(basis);
            }
        }
    }
    Err(Error::SamplingBudget { budget })
}

fn check_l(curve: &Curve, l: u64) -> Result<()> {
    if l == curve.p {
        return Err(Error::CharacteristicPrime(l));
    }
    if !crate::numeric::is_prime_u64(l) {
        return Err(Error::Parse(format!("{l} is not prime")));
    }
    Ok(())
}

/// Basis of E(F_{Q^s})[l^j] with `Q = p^n`.
pub fn torsion_subgroup(
    curve: &Curve,
    n: usize,
    s: usize,
    l: u64,
    j: u32,
    caps: &Caps,
) -> Result<TorsionBasis> {
    check_l(curve, l)?;
    let degree = n * s;
    let g = curve.over_capped(degree, caps.degree_cap)?;
    let a = trace(curve)?.a;
    let order = count_from_trace(a, curve.p, degree as u64);
    let budget = caps.sample_factor * l.saturating_pow(j);
    let mut rng = caps.rng_for(&[
        curve.p,
        curve.a2,
        curve.a4,
        curve.a6,
        degree as u64,
        l,
        j as u64,
    ]);
    let sylow = sylow_basis(&g, &order, l, &mut rng, budget, caps.enum_bound)?;
    let mut points = Vec::new();
    let mut levels = Vec::new();
    for (pt, e) in [(&sylow.p1, sylow.a), (&sylow.p2, sylow.b)] {
        let level = e.min(j);
        if level > 0 {
            points.push(g.mul(&l_power(l, e - level), pt));
            levels.push(level);
        }
    }
    Ok(TorsionBasis {
        l,
        j,
        s,
        points,
        levels,
    })
}

/// Whether `Q^m phi_Q - 1` kills E[l^j], i.e. `phi_Q` acts on E[l^j] as the
/// scalar `r = Q^{-m} mod l^j`.
pub fn kernel_membership(
    curve: &Curve,
    n: u64,
    m: u64,
    l: u64,
    j: u32,
    caps: &Caps,
) -> Result<bool> {
    check_l(curve, l)?;
    assert!(j >= 1 && n >= 1 && m >= 1);
    let a = trace(curve)?.a;
    let order = kgroup_order(a, curve.p, n, m);
    let (v, _) = l_adic_valuation(&order, l);
    if 2 * j > v {
        return Ok(false);
    }
    let modulus = l
        .checked_pow(j)
        .filter(|&x| x < 1 << 62)
        .ok_or(Error::DegreeCap {
            degree: usize::MAX,
            cap: caps.degree_cap,
        })?;
    let big_q = pow_mod(curve.p, n, modulus);
    let r = inv_mod(pow_mod(big_q, m, modulus), modulus).expect("l differs from p");
    // a scalar Frobenius has characteristic polynomial (T - r)^2
    let big_a = extension_trace(a, curve.p, n)
        .mod_floor(&num_bigint::BigInt::from(modulus))
        .to_u64()
        .expect("reduced");
    let two_r = (2 * r as u128 % modulus as u128) as u64;
    let r_sq = (r as u128 * r as u128 % modulus as u128) as u64;
    if big_a != two_r || big_q != r_sq {
        return Ok(false);
    }
    let s = multiplicative_order(r, modulus)? as usize;
    if n as usize * s > caps.degree_cap {
        return Err(Error::DegreeCap {
            degree: n as usize * s,
            cap: caps.degree_cap,
        });
    }
    let basis = torsion_subgroup(curve, n as usize, s, l, j, caps)?;
    if basis.levels != [j, j] {
        return Ok(false);
    }
    let g = curve.over_capped(n as usize * s, caps.degree_cap)?;
    Ok(basis
        .points
        .iter()
        .all(|pt| g.frobenius(pt, n as usize) == g.mul_u64(r, pt)))
}

/// `(e1, e2)` with the l-Sylow of K_{2m}(E/F_{q^n}) isomorphic to `Z/l^e1 x Z/l^e2`.
pub fn l_part_structure(curve: &Curve, n: u64, m: u64, l: u64, caps: &Caps) -> Result<(u32, u32)> {
    check_l(curve, l)?;
    let a = trace(curve)?.a;
    let order = kgroup_order(a, curve.p, n, m);
    let (v, _) = l_adic_valuation(&order, l);
    if v == 0 {
        return Err(Error::NonDividingPrime {
            l,
            order: order.to_string(),
        });
    }
    let mut e1 = 0;
    for j in 1..=v / 2 {
        if kernel_membership(curve, n, m, l, j, caps)? {
            e1 = j;
        } else {
            break;
        }
    }
    Ok((e1, v - e1))
}

/// Full structure of K_{2m}(E/F_{q^n}), assembled prime by prime.
pub fn kgroup_structure(curve: &Curve, n: u64, m: u64, caps: &Caps) -> Result<KGroupStructure> {
    assert!(m >= 1 && n >= 1);
    let a = trace(curve)?.a;
    let order = kgroup_order(a, curve.p, n, m);
    let mut parts: BTreeMap<BigUint, Vec<u32>> = BTreeMap::new();
    let mut sylow = Vec::new();
    for (prime, e) in factorize(&order).factors {
        let (e1, e2) = if e == 1 {
            (0, 1)
        } else {
            let l = prime
                .to_u64()
                .expect("a repeated prime factor of a K-group order fits in 64 bits");
            l_part_structure(curve, n, m, l, caps)?
        };
        parts.insert(prime.clone(), vec![e1, e2]);
        sylow.push((prime, e1, e2));
    }
    let factors = InvariantFactors::from_prime_powers(parts);
    debug_assert_eq!(factors.order(), order);
    Ok(KGroupStructure {
        n,
        m,
        order,
        factors,
        sylow,
    })
}

/// The q-power Frobenius on E[l^K] in some basis, entries mod `l^K`.
/// Column `i` holds the coordinates of the image of basis point `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrobeniusMatrix {
    pub l: u64,
    pub precision: u32,
    /// Degree of the field over F_q where E[l^K] becomes rational.
    pub splitting_degree: usize,
    pub entries: [[u64; 2]; 2],
}

impl FrobeniusMatrix {
    pub fn modulus(&self) -> u64 {
        self.l.pow(self.precision)
    }

    pub fn trace(&self) -> u64 {
        (self.entries[0][0] + self.entries[1][1]) % self.modulus()
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus() as u128;
        let e = self.entries;
        let pos = e[0][0] as u128 * e[1][1] as u128 % m;
        let neg = e[0][1] as u128 * e[1][0] as u128 % m;
        ((pos + m - neg) % m) as u64
    }

    fn mul(&self, other: &[[u64; 2]; 2]) -> [[u64; 2]; 2] {
        let m = self.modulus() as u128;
        let mut out = [[0u64; 2]; 2];
        for (row, lhs) in out.iter_mut().zip(&self.entries) {
            for (k, cell) in row.iter_mut().enumerate() {
                let acc: u128 = (0..2)
                    .map(|t| lhs[t] as u128 * other[t][k] as u128 % m)
                    .sum();
                *cell = (acc % m) as u64;
            }
        }
        out
    }

    /// Cokernel exponents of `Q^m M^n - I`, i.e. the predicted l-Sylow of
    /// K_{2m}(E/F_{q^n}) when the precision exceeds its valuation.
    pub fn kgroup_exponents(&self, q: u64, n: u64, m: u64) -> (u32, u32) {
        let modulus = self.modulus();
        let mut power = [[1u64, 0], [0, 1]];
        for _ in 0..n {
            power = self.mul(&power);
        }
        let scale = pow_mod(q, n * m, modulus) as u128;
        let mut matrix = [[0i128; 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                let mut x = (scale * power[i][k] as u128 % modulus as u128) as i128;
                if i == k {
                    x -= 1;
                }
                matrix[i][k] = x;
            }
        }
        snf_2x2(matrix, self.l, self.precision)
    }
}

/// Frobenius matrix on E[l^K] via an explicit basis over its splitting field.
/// `Ok(None)` when the splitting degree exceeds the cap.
pub fn frobenius_matrix_oracle(
    curve: &Curve,
    l: u64,
    precision: u32,
    caps: &Caps,
) -> Result<Option<FrobeniusMatrix>> {
    check_l(curve, l)?;
    assert!(precision >= 1);
    let a = trace(curve)?.a;
    let p = curve.p;
    let modulus = l.pow(precision);
    let need = l_power(l, 2 * precision);
    for s in 1..=caps.degree_cap {
        // Weil pairing: mu_{l^K} must be rational, and l^{2K} must divide the count
        if pow_mod(p, s as u64, modulus) != 1 % modulus {
            continue;
        }
        let order = count_from_trace(a, p, s as u64);
        if !(&order % &need).is_zero() {
            continue;
        }
        let g = curve.over_capped(s, caps.degree_cap)?;
        let mut rng = caps.rng_for(&[
            p,
            curve.a2,
            curve.a4,
            curve.a6,
            s as u64,
            l,
            precision as u64,
            1,
        ]);
        let budget = caps.sample_factor * modulus;
        let sylow = sylow_basis(&g, &order, l, &mut rng, budget, caps.enum_bound)?;
        if sylow.b < precision {
            continue;
        }
        let b1 = g.mul(&l_power(l, sylow.a - precision), &sylow.p1);
        let b2 = g.mul(&l_power(l, sylow.b - precision), &sylow.p2);
        let mut entries = [[0u64; 2]; 2];
        for (col, pt) in [&b1, &b2].into_iter().enumerate() {
            let image = g.frobenius(pt, 1);
            let (x, y) = planar_dlog(&g, &b1, &b2, l, precision, &image)
                .expect("Frobenius preserves E[l^K]");
            entries[0][col] = x;
            entries[1][col] = y;
        }
        return Ok(Some(FrobeniusMatrix {
            l,
            precision,
            splitting_degree: s,
            entries,
        }));
    }
    Ok(None)
}

/// `(x, y)` mod `l^K` with `[x] b1 + [y] b2 = target` for a basis of E[l^K].
fn planar_dlog(
    g: &CurveGroup,
    b1: &Point,
    b2: &Point,
    l: u64,
    precision: u32,
    target: &Point,
) -> Option<(u64, u64)> {
    let top = l_power(l, precision - 1);
    let g1 = g.mul(&top, b1);
    let g2 = g.mul(&top, b2);
    let mut table = HashMap::with_capacity(l as usize);
    let mut cur = Point::Infinity;
    for dy in 0..l {
        table.insert(cur.clone(), dy);
        cur = g.add(&cur, &g2).expect("same field");
    }
    let (mut x, mut y) = (0u64, 0u64);
    for t in 0..precision {
        let partial = g
            .add(&g.mul_u64(x, b1), &g.mul_u64(y, b2))
            .expect("same field");
        let rest = g.sub(target, &partial);
        let probe = g.mul(&l_power(l, precision - 1 - t), &rest);
        let mut found = None;
        let mut shifted = probe;
        for dx in 0..l {
            if let Some(&dy) = table.get(&shifted) {
                found = Some((dx, dy));
                break;
            }
            shifted = g.sub(&shifted, &g1);
        }
        let (dx, dy) = found?;
        let lt = l.pow(t);
        x += dx * lt;
        y += dy * lt;
    }
    Some((x, y))
}

/// At most two invariant factors, and `d1^2` divides the order.
pub fn rank_bound_holds(structure: &KGroupStructure) -> bool {
    match structure.factors.factors() {
        [] | [_] => true,
        [d1, _] => (&structure.order % (d1 * d1)).is_zero(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(p: u64, a2: i64, a4: i64, a6: i64) -> Curve {
        Curve::new(p, a2, a4, a6).unwrap()
    }

    #[test]
    fn torsion_ranks() {
        let caps = Caps::default();
        let b = torsion_subgroup(&curve(3, 0, -1, 0), 1, 1, 2, 1, &caps).unwrap();
        assert_eq!(b.rank(), 2);
        let c = curve(5, 0, -1, -1);
        let roots = {
            let f = crate::field::make_field(5, 1).unwrap();
            f.find_roots(&f.poly_from_i64(&[-1, -1, 0, 1]))
        };
        assert_eq!(roots, vec![vec![2]]);
        let b = torsion_subgroup(&c, 1, 1, 2, 1, &caps).unwrap();
        assert_eq!(b.rank(), 1);
        assert_eq!(b.points[0], Point::Affine(vec![2], vec![0]));
        let b = torsion_subgroup(&curve(7, 0, 0, 2), 1, 1, 3, 1, &caps).unwrap();
        assert_eq!(b.levels, vec![1, 1]);
    }

    #[test]
    fn membership_examples() {
        let caps = Caps::default();
        assert!(kernel_membership(&curve(5, 0, -1, 0), 1, 1, 2, 1, &caps).unwrap());
        assert!(!kernel_membership(&curve(5, 0, -1, -1), 1, 1, 2, 1, &caps).unwrap());
        // 19 exactly divides #K_2 of the first F_3 curve
        assert!(!kernel_membership(&curve(3, 0, -1, -1), 1, 1, 19, 1, &caps).unwrap());
        assert_eq!(
            kernel_membership(&curve(3, 0, -1, -1), 1, 1, 3, 1, &caps),
            Err(Error::CharacteristicPrime(3))
        );
    }

    #[test]
    fn sylow_examples() {
        let caps = Caps::default();
        let c = curve(3, 0, -1, 0);
        assert_eq!(l_part_structure(&c, 1, 1, 2, &caps).unwrap(), (1, 1));
        assert_eq!(l_part_structure(&c, 1, 1, 7, &caps).unwrap(), (0, 1));
        assert_eq!(
            kgroup_structure(&c, 1, 1, &caps)
                .unwrap()
                .factors
                .to_string(),
            "Z/2 x Z/14"
        );
        assert_eq!(
            l_part_structure(&curve(7, 0, 0, 2), 1, 1, 3, &caps).unwrap(),
            (1, 2)
        );
        assert_eq!(
            l_part_structure(&curve(13, 0, 0, 5), 1, 1, 2, &caps).unwrap(),
            (2, 2)
        );
        assert!(matches!(
            l_part_structure(&c, 1, 1, 5, &caps),
            Err(Error::NonDividingPrime { l: 5, .. })
        ));
    }

    #[test]
    fn structure_examples() {
        let caps = Caps::default();
        let s = kgroup_structure(&curve(5, 0, -1, 0), 1, 1, &caps).unwrap();
        assert_eq!(s.factors, InvariantFactors::from_cyclic_u64(&[4, 34]));
        assert_eq!(s.factors.to_string(), "Z/2 x Z/68");
        let s = kgroup_structure(&curve(3, 0, -1, -1), 1, 6, &caps).unwrap();
        assert_eq!(s.factors.to_string(), "Z/1592137");
        let s = kgroup_structure(&curve(7, 0, 0, 2), 1, 1, &caps).unwrap();
        assert_eq!(s.factors, InvariantFactors::from_cyclic_u64(&[9, 39]));
        assert!(rank_bound_holds(&s));
    }

    #[test]
    fn membership_is_monotone() {
        let caps = Caps::default();
        for (c, n, m) in [
            (curve(5, 0, -1, 0), 2, 1),
            (curve(7, 0, 0, 1), 1, 2),
            (curve(3, 0, -1, 0), 2, 2),
        ] {
            let a = trace(&c).unwrap().a;
            let order = kgroup_order(a, c.p, n, m);
            for (prime, e) in factorize(&order).factors {
                let l = prime.to_u64().unwrap();
                if e < 2 || l > 50 {
                    continue;
                }
                let flags: Vec<bool> = (1..=e / 2 + 1)
                    .map(|j| kernel_membership(&c, n, m, l, j, &caps).unwrap())
                    .collect();
                for w in flags.windows(2) {
                    assert!(w[0] || !w[1], "{c} l={l} flags={flags:?}");
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let caps = Caps::default();
        let m = frobenius_matrix_oracle(&curve(3, 0, -1, 0), 2, 1, &caps)
            .unwrap()
            .unwrap();
        assert_eq!(m.entries, [[1, 0], [0, 1]]);
        let c = curve(5, 0, 1, 0);
        let m = frobenius_matrix_oracle(&c, 3, 1, &caps).unwrap().unwrap();
        assert_eq!(m.det(), 5 % 3);
        assert_eq!(m.trace(), 2);
        let c = curve(7, 0, 0, 1);
        let m = frobenius_matrix_oracle(&c, 2, 2, &caps).unwrap().unwrap();
        assert_eq!(
            m.kgroup_exponents(7, 1, 1),
            l_part_structure(&c, 1, 1, 2, &caps).unwrap()
        );
        assert_eq!(m.kgroup_exponents(7, 1, 1), (1, 1));
    }

    #[test]
    fn oracle_agrees_with_membership() {
        let caps = Caps::default();
        let cases = [
            (curve(3, 0, -1, 0), 2u64),
            (curve(5, 0, -1, 0), 2),
            (curve(7, 0, 0, 2), 3),
            (curve(13, 0, 0, 5), 2),
            (curve(3, -1, 0, -1), 2),
            (curve(5, 0, 1, 0), 3),
        ];
        for (c, l) in cases {
            let a = trace(&c).unwrap().a;
            for (n, m) in [(1u64, 1u64), (1, 2), (2, 1)] {
                let order = kgroup_order(a, c.p, n, m);
                let (v, _) = l_adic_valuation(&order, l);
                if v == 0 {
                    continue;
                }
                let Some(mat) = frobenius_matrix_oracle(&c, l, v + 1, &caps).unwrap() else {
                    continue;
                };
                assert_eq!(
                    mat.trace() as i64,
                    a.rem_euclid(mat.modulus() as i64) as i64
                );
                assert_eq!(mat.det(), c.p % mat.modulus());
                assert_eq!(
                    mat.kgroup_exponents(c.p, n, m),
                    l_part_structure(&c, n, m, l, &caps).unwrap(),
                    "{c} l={l} n={n} m={m}"
                );
            }
        }
    }
}
