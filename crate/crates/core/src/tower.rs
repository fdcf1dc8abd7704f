//! Growth of the l-part of K_2 along the tower F_{q^{l^m}}.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::kgroup::{l_part_structure, Caps};
use crate::numeric::l_adic_valuation;
use crate::zeta::{kgroup_order, kgroup_order_mod, trace};

/// Valuation levels computed by default, `m = 0..=DEFAULT_VALUATION_WINDOW`.
pub const DEFAULT_VALUATION_WINDOW: u32 = 6;

/// Bit budget for the exact big-integer cross-check of valuations.
pub const DEFAULT_BITS_BUDGET: u64 = 100_000;

/// Exponent offsets in `Z/l^{m+c1} x Z/l^{m+c2}` (or `Z/l^{m+c}` when cyclic).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SylowFormula {
    pub l: u64,
    /// Sorted ascending; one entry for a cyclic tower, two otherwise.
    pub offsets: Vec<i64>,
    pub m0: u32,
}

impl SylowFormula {
    pub fn new(l: u64, mut offsets: Vec<i64>, m0: u32) -> Self {
        offsets.sort_unstable();
        Self { l, offsets, m0 }
    }

    /// Exponents predicted at level `m`, ascending, with a leading zero when cyclic.
    pub fn exponents_at(&self, m: u32) -> (i64, i64) {
        let m = m as i64;
        match self.offsets.as_slice() {
            [c] => (0, m + c),
            [c1, c2] => (m + c1, m + c2),
            _ => unreachable!("one or two offsets"),
        }
    }

    pub fn valuation_at(&self, m: u32) -> i64 {
        let (e1, e2) = self.exponents_at(m);
        e1 + e2
    }

    /// Parse the ASCII transcription, e.g.
    /// `K_2(2^m)(2) ~= Z/2^{m+1}Z x Z/2^{m}Z, m>=2`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognized Sylow formula {text:?}"));
        let compact: String = text
            .replace('≅', "~=")
            .replace('≥', ">=")
            .replace('×', "x")
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        let rest = compact.strip_prefix("K_2(").ok_or_else(bad)?;
        let (l_text, rest) = rest.split_once("^m)(").ok_or_else(bad)?;
        let l: u64 = l_text.parse().map_err(|_| bad())?;
        let (l_again, rest) = rest.split_once(")~=").ok_or_else(bad)?;
        if l_again != l_text {
            return Err(bad());
        }
        let (groups, onset) = rest.rsplit_once(",m>=").ok_or_else(bad)?;
        let m0: u32 = onset.parse().map_err(|_| bad())?;
        let prefix = format!("Z/{l}^{{m");
        let mut offsets = Vec::new();
        for group in groups.split('x') {
            let inner = group
                .strip_prefix(&prefix)
                .and_then(|g| g.strip_suffix("}Z").or_else(|| g.strip_suffix('}')))
                .ok_or_else(bad)?;
            let c = if inner.is_empty() {
                0
            } else {
                inner.parse::<i64>().map_err(|_| bad())?
            };
            offsets.push(c);
        }
        if offsets.is_empty() || offsets.len() > 2 {
            return Err(bad());
        }
        Ok(Self::new(l, offsets, m0))
    }

    fn render_with(&self, iso: &str, geq: &str, unicode: bool) -> String {
        let l = self.l;
        let group = |c: i64| {
            let exp = match c {
                0 => "m".to_string(),
                c if c > 0 => format!("m+{c}"),
                c => format!("m{c}"),
            };
            if unicode {
                format!("Z/{l}^{{{exp}}}")
            } else {
                format!("Z/{l}^{{{exp}}}Z")
            }
        };
        let groups: Vec<String> = self.offsets.iter().map(|&c| group(c)).collect();
        format!(
            "K_2({l}^m)({l}) {iso} {}, m{geq}{}",
            groups.join(" x "),
            self.m0
        )
    }

    /// `K_2(l^m)(l) ≅ Z/l^{m+c1} x Z/l^{m+c2}, m ≥ m0`.
    pub fn render_unicode(&self) -> String {
        self.render_with("≅", " ≥ ", true)
    }

    /// Same shape as the ASCII golden files.
    pub fn render_ascii(&self) -> String {
        self.render_with("~=", ">=", false)
    }

    /// Compact `l:c1/c2:m0` form used in the golden parsed columns.
    pub fn compact(&self) -> String {
        let cs: Vec<String> = self.offsets.iter().map(i64::to_string).collect();
        format!("{}:{}:{}", self.l, cs.join("/"), self.m0)
    }

    pub fn parse_compact(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad compact Sylow formula {text:?}"));
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let l = parts[0].parse().map_err(|_| bad())?;
        let offsets = parts[1]
            .split('/')
            .map(|c| c.parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let m0 = parts[2].parse().map_err(|_| bad())?;
        Ok(Self::new(l, offsets, m0))
    }
}

impl fmt::Display for SylowFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_unicode())
    }
}

fn check_prime(curve: &Curve, l: u64) -> Result<i64> {
    if l == curve.p {
        return Err(Error::CharacteristicPrime(l));
    }
    let a = trace(curve)?.a;
    let base = kgroup_order(a, curve.p, 1, 1);
    if !(&base % l).is_zero() {
        return Err(Error::NonDividingPrime {
            l,
            order: base.to_string(),
        });
    }
    Ok(a)
}

/// `v_l(#K_2(E/F_{q^{l^m}}))` for `m = 0..=max_m`, exact, computed in
/// `Z/l^B` with `B` raised until the residue is nonzero.
pub fn tower_valuations(curve: &Curve, l: u64, max_m: u32) -> Result<Vec<u32>> {
    let a = check_prime(curve, l)?;
    let mut out = Vec::with_capacity(max_m as usize + 1);
    let mut precision = 32u32;
    for m in 0..=max_m {
        let n = BigUint::from(l).pow(m);
        loop {
            let modulus = BigUint::from(l).pow(precision);
            let residue = kgroup_order_mod(a, curve.p, &n, 1, &modulus);
            if residue.is_zero() {
                precision *= 2;
                continue;
            }
            out.push(l_adic_valuation(&residue, l).0);
            break;
        }
    }
    Ok(out)
}

/// Largest `m` with `l^m log2(q) <= bits_budget`.
pub fn bits_window(q: u64, l: u64, bits_budget: u64) -> u32 {
    let log_q = (q as f64).log2();
    let mut m = 0;
    while (l as f64).powi(m as i32 + 1) * log_q <= bits_budget as f64 {
        m += 1;
    }
    m
}

/// The same valuations from full big-integer orders, for levels inside the bit budget.
pub fn exact_tower_valuations(curve: &Curve, l: u64, bits_budget: u64) -> Result<Vec<u32>> {
    let a = check_prime(curve, l)?;
    let window = bits_window(curve.p, l, bits_budget);
    Ok((0..=window)
        .map(|m| {
            let order = kgroup_order(a, curve.p, l.pow(m), 1);
            l_adic_valuation(&order, l).0
        })
        .collect())
}

/// `(lambda, nu, m0)` from a valuation sequence: the last difference must
/// repeat at least three times; `m0` is where the linear stretch begins.
pub fn fit_lambda(valuations: &[u32]) -> Result<(u32, i64, u32)> {
    let window = valuations.len().saturating_sub(1) as u32;
    let diffs: Vec<i64> = valuations
        .windows(2)
        .map(|w| w[1] as i64 - w[0] as i64)
        .collect();
    let Some(&last) = diffs.last() else {
        return Err(Error::NoStabilization { window });
    };
    let run = diffs.iter().rev().take_while(|&&d| d == last).count();
    if run < 3 || last < 0 {
        return Err(Error::NoStabilization { window });
    }
    let m0 = (diffs.len() - run) as u32;
    let nu = valuations[m0 as usize] as i64 - last * m0 as i64;
    Ok((last as u32, nu, m0))
}

pub fn lambda_invariant(curve: &Curve, l: u64) -> Result<(u32, i64, u32)> {
    fit_lambda(&tower_valuations(curve, l, DEFAULT_VALUATION_WINDOW)?)
}

/// Default structure-verification window for a prime `l`.
pub fn default_verified_window(l: u64) -> u32 {
    match l {
        2 | 3 => 3,
        _ => 1,
    }
}

/// Valuations, λ fit and per-level Sylow structures along the tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerReport {
    pub l: u64,
    pub lambda: u32,
    pub nu: i64,
    /// First level from which `v_m = lambda m + nu` holds in the window.
    pub m0: u32,
    pub valuations: Vec<u32>,
    /// `(e1, e2)` per level `0..=verified window`; `None` where a cap bound.
    pub structures: Vec<Option<(u32, u32)>>,
    /// Closed form fitted from the verified levels, when they reach the linear range.
    pub formula: Option<SylowFormula>,
}

impl TowerReport {
    pub fn fully_verified(&self) -> bool {
        self.structures.iter().all(Option::is_some)
    }

    /// Disagreements between this report and a printed closed form.
    pub fn contradictions(&self, printed: &SylowFormula) -> Vec<String> {
        let mut out = Vec::new();
        if printed.l != self.l {
            out.push(format!("prime {} vs computed {}", printed.l, self.l));
            return out;
        }
        if printed.offsets.len() as u32 != self.lambda {
            out.push(format!(
                "rank {} of the printed formula vs lambda = {}",
                printed.offsets.len(),
                self.lambda
            ));
        }
        for (m, &v) in self.valuations.iter().enumerate() {
            let m = m as u32;
            if m >= printed.m0 && printed.valuation_at(m) != v as i64 {
                out.push(format!(
                    "m={m}: valuation {v} vs printed {}",
                    printed.valuation_at(m)
                ));
            }
        }
        for (m, s) in self.structures.iter().enumerate() {
            let m = m as u32;
            if let Some((e1, e2)) = *s {
                if m >= printed.m0 && printed.exponents_at(m) != (e1 as i64, e2 as i64) {
                    let (p1, p2) = printed.exponents_at(m);
                    out.push(format!(
                        "m={m}: structure ({e1},{e2}) vs printed ({p1},{p2})"
                    ));
                }
            }
        }
        if let Some(f) = &self.formula {
            if f.offsets == printed.offsets && f.m0 > printed.m0 {
                out.push(format!(
                    "onset m0={} later than printed {}",
                    f.m0, printed.m0
                ));
            }
        }
        out
    }
}

/// Full tower report: valuations over `0..=valuation_window`, structures over
/// `0..=verified_window` where the degree cap permits.
pub fn tower_structures(
    curve: &Curve,
    l: u64,
    valuation_window: u32,
    verified_window: u32,
    caps: &Caps,
) -> Result<TowerReport> {
    let valuations = tower_valuations(curve, l, valuation_window.max(verified_window))?;
    let (lambda, nu, m0) = fit_lambda(&valuations)?;
    let mut structures = Vec::new();
    for m in 0..=verified_window {
        let n = l.pow(m);
        match l_part_structure(curve, n, 1, l, caps) {
            Ok(s) => structures.push(Some(s)),
            Err(Error::DegreeCap { .. }) => structures.push(None),
            Err(e) => return Err(e),
        }
    }
    let formula = fit_formula(l, lambda, &valuations, &structures);
    Ok(TowerReport {
        l,
        lambda,
        nu,
        m0,
        valuations,
        structures,
        formula,
    })
}

/// Offsets from the highest verified level, with the earliest onset that is
/// consistent with every verified structure and every valuation after it.
fn fit_formula(
    l: u64,
    lambda: u32,
    valuations: &[u32],
    structures: &[Option<(u32, u32)>],
) -> Option<SylowFormula> {
    let (top, &(e1, e2)) = structures
        .iter()
        .enumerate()
        .rev()
        .find_map(|(m, s)| s.as_ref().map(|s| (m as u32, s)))?;
    let offsets = match lambda {
        1 if e1 == 0 => vec![e2 as i64 - top as i64],
        2 => vec![e1 as i64 - top as i64, e2 as i64 - top as i64],
        _ => return None,
    };
    let candidate = SylowFormula::new(l, offsets, 0);
    let holds_from = |m0: u32| {
        valuations
            .iter()
            .enumerate()
            .skip(m0 as usize)
            .all(|(m, &v)| candidate.valuation_at(m as u32) == v as i64)
            && structures
                .iter()
                .enumerate()
                .skip(m0 as usize)
                .all(|(m, s)| match s {
                    Some((a, b)) => candidate.exponents_at(m as u32) == (*a as i64, *b as i64),
                    None => true,
                })
    };
    let m0 = (0..=top).find(|&m0| holds_from(m0))?;
    Some(SylowFormula { m0, ..candidate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(p: u64, a2: i64, a4: i64, a6: i64) -> Curve {
        Curve::new(p, a2, a4, a6).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(
            &tower_valuations(&curve(3, 0, -1, -1), 19, 2).unwrap(),
            &[1, 2, 3]
        );
        assert_eq!(
            &tower_valuations(&curve(5, 0, 1, 0), 2, 2).unwrap(),
            &[2, 5, 7]
        );
        // direct valuation at m = 2: 1 + 14 * 625 + 625^3
        let direct = BigUint::from(1u32) + 14u32 * 625u32 + BigUint::from(625u32).pow(3);
        assert_eq!(l_adic_valuation(&direct, 2).0, 7);
        assert_eq!(
            &tower_valuations(&curve(3, -1, 0, -1), 2, 3).unwrap()[1..],
            &[2, 5, 7]
        );
        assert!(matches!(
            tower_valuations(&curve(3, 0, -1, -1), 5, 2),
            Err(Error::NonDividingPrime { l: 5, .. })
        ));
    }

    #[test]
    fn modular_valuations_match_big_integers() {
        for (c, l) in [
            (curve(3, 0, -1, -1), 19),
            (curve(5, 0, 1, 0), 2),
            (curve(7, 0, 0, 2), 3),
            (curve(13, 0, 0, 5), 2),
        ] {
            let exact = exact_tower_valuations(&c, l, 20_000).unwrap();
            let modular = tower_valuations(&c, l, exact.len() as u32 - 1).unwrap();
            assert_eq!(exact, modular);
        }
        assert_eq!(bits_window(3, 2, 100_000), 15);
        assert_eq!(bits_window(3, 19, 100_000), 3);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_invariant(&curve(3, 0, -1, -1), 19).unwrap().0, 1);
        assert_eq!(lambda_invariant(&curve(5, 0, 1, 0), 2).unwrap().0, 2);
        assert_eq!(fit_lambda(&[1, 2, 5, 7, 9, 11]).unwrap(), (2, 1, 2));
        assert_eq!(
            fit_lambda(&[1, 2, 3]),
            Err(Error::NoStabilization { window: 2 })
        );
    }

    #[test]
    fn formula_parsing() {
        let f = SylowFormula::parse("K_2(2^m)(2) ~= Z/2^{m+1}Z x Z/2^{m}Z, m>=2").unwrap();
        assert_eq!(f, SylowFormula::new(2, vec![0, 1], 2));
        assert_eq!(SylowFormula::parse(&f.render_ascii()).unwrap(), f);
        assert_eq!(
            f.render_unicode(),
            "K_2(2^m)(2) ≅ Z/2^{m} x Z/2^{m+1}, m ≥ 2"
        );
        assert_eq!(SylowFormula::parse_compact(&f.compact()).unwrap(), f);
        let g = SylowFormula::parse("K_2(19^m)(19) ~= Z/19^{m+1}Z, m>=1").unwrap();
        assert_eq!(g.exponents_at(3), (0, 4));
        assert!(SylowFormula::parse("K_2(2^m)(3) ~= Z/2^{m}Z, m>=0").is_err());
    }

    #[test]
    fn structure_examples() {
        let caps = Caps::default();
        let r =
            tower_structures(&curve(3, 0, -1, -1), 19, DEFAULT_VALUATION_WINDOW, 1, &caps).unwrap();
        assert_eq!(r.formula, Some(SylowFormula::new(19, vec![1], 0)));
        assert_eq!(r.structures[1], Some((0, 2)));
        // y^2 = x^3 - x - 1 over F_5
        let r =
            tower_structures(&curve(5, 0, -1, -1), 2, DEFAULT_VALUATION_WINDOW, 3, &caps).unwrap();
        let f = r.formula.clone().unwrap();
        assert_eq!(f.offsets, vec![0, 3]);
        assert!(f.m0 <= 1);
        assert!(r
            .contradictions(&SylowFormula::new(2, vec![0, 3], 1))
            .is_empty());
        // y^2 = x^3 + x over F_3
        let r =
            tower_structures(&curve(3, 0, 1, 0), 2, DEFAULT_VALUATION_WINDOW, 3, &caps).unwrap();
        assert_eq!(r.formula.clone().unwrap().offsets, vec![1, 1]);
        assert!(r
            .contradictions(&SylowFormula::new(2, vec![1, 1], 1))
            .is_empty());
        assert!(!r
            .contradictions(&SylowFormula::new(2, vec![1, 2], 1))
            .is_empty());
        for (m, s) in r.structures.iter().enumerate() {
            let (e1, e2) = s.unwrap();
            assert_eq!(e1 + e2, r.valuations[m]);
        }
    }
}
