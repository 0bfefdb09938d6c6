//! Counting Boolean networks, and networks that reach a fixed invariant
//! sub-network, in arbitrary precision.

use num_bigint::{BigInt, BigUint};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

fn decimal<T: ToString, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn decimal_pairs<S: Serializer>(v: &[(usize, BigUint)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(v.len()))?;
    for (k, n) in v {
        map.serialize_entry(&k.to_string(), &n.to_string())?;
    }
    map.end()
}

fn pow(base: usize, exp: usize) -> BigUint {
    BigUint::from(base).pow(u32::try_from(exp).expect("exponent fits in u32"))
}

/// Number of maps `[m] → [m]`, `m^m`.
pub fn total_functional_maps(m: usize) -> BigUint {
    pow(m, m)
}

/// Number of Boolean networks on `n` variables, `2^{n·2^n}`.
pub fn total_networks(n: usize) -> BigUint {
    pow(2, n << n)
}

fn binomial(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, i| acc * i)
}

/// Networks whose `s_r` free states all feed a fixed invariant core of
/// `s_c` states.
///
/// `n_mod_c` subtracts every loop length separately, so it is only a lower
/// bound, and for `s_r ≥ 13` it turns negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureCountReport {
    pub s_c: usize,
    pub s_r: usize,
    #[serde(serialize_with = "decimal")]
    pub n_mod: BigUint,
    #[serde(serialize_with = "decimal")]
    pub n_mod_inv: BigUint,
    #[serde(serialize_with = "decimal")]
    pub n_1: BigUint,
    /// `(loop length, N_n)` for lengths `2..=s_r`.
    #[serde(serialize_with = "decimal_pairs")]
    pub n_loops: Vec<(usize, BigUint)>,
    #[serde(serialize_with = "decimal")]
    pub n_mod_c: BigInt,
    #[serde(serialize_with = "decimal")]
    pub n_t: BigInt,
}

pub fn count_structures(s_c: usize, s_r: usize) -> StructureCountReport {
    let n_mod = pow(s_r + 1, s_r + 1);
    let n_mod_inv = &n_mod / (s_r + 1);
    let n_1 = pow(s_r, s_r);
    let n_loops: Vec<(usize, BigUint)> =
        (2..=s_r).map(|n| (n, binomial(s_r, n) * factorial(n - 1) * pow(s_r, s_r - n))).collect();
    let loops: BigUint = n_loops.iter().map(|(_, v)| v).sum();
    let n_mod_c = BigInt::from(n_1.clone()) - BigInt::from(loops);
    let n_t = &n_mod_c * BigInt::from(s_c);
    StructureCountReport { s_c, s_r, n_mod, n_mod_inv, n_1, n_loops, n_mod_c, n_t }
}

/// Largest enumeration [`brute_force_structure_count`] accepts by default.
pub const DEFAULT_BRUTE_FORCE_BUDGET: u64 = 117_649; // 7^6

/// Exact count of maps from `s_r` free nodes to themselves plus the core
/// in which every free node eventually reaches the core.
pub fn brute_force_structure_count(s_r: usize, budget: u64) -> Result<BigUint> {
    let total = pow(s_r + 1, s_r);
    if total > BigUint::from(budget) {
        return Err(Error::BudgetExceeded(format!("{total} maps to enumerate, budget {budget}")));
    }
    let total = (s_r + 1).pow(s_r as u32);
    // Node 0 is the core; free nodes are 1..=s_r.
    let mut target = vec![0usize; s_r + 1];
    let mut count = 0u64;
    for code in 0..total {
        let mut c = code;
        for t in target.iter_mut().skip(1) {
            *t = c % (s_r + 1);
            c /= s_r + 1;
        }
        let reaches = (1..=s_r).all(|start| {
            let mut v = start;
            for _ in 0..s_r {
                if v == 0 {
                    break;
                }
                v = target[v];
            }
            v == 0
        });
        count += u64::from(reaches);
    }
    Ok(BigUint::from(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::BooleanNetwork;
    use crate::stp::LogicalMatrix;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn totals() {
        assert_eq!(total_networks(1), big(4));
        assert_eq!(total_networks(2), big(256));
        for n in 1..=3 {
            assert_eq!(total_networks(n), total_functional_maps(1 << n));
        }
        // Every 2x2 logical matrix is a one-variable network.
        let built = (1..=2)
            .flat_map(|a| (1..=2).map(move |b| LogicalMatrix::delta(2, &[a, b])))
            .filter(|l| BooleanNetwork::new(l.clone()).is_ok())
            .count();
        assert_eq!(big(built as u64), total_networks(1));
    }

    #[test]
    fn structure_formulas() {
        let r = count_structures(1, 2);
        assert_eq!(r.n_mod, big(27));
        assert_eq!(r.n_mod_inv, big(9));
        assert_eq!(r.n_1, big(4));
        assert_eq!(r.n_loops, vec![(2, big(1))]);
        assert_eq!(r.n_mod_c, BigInt::from(3));

        let r = count_structures(4, 0);
        assert_eq!(r.n_1, big(1));
        assert_eq!(r.n_mod_c, BigInt::from(1));
        assert_eq!(r.n_t, BigInt::from(4));

        let lower: Vec<BigInt> = (2..=6).map(|s| count_structures(1, s).n_mod_c).collect();
        assert_eq!(lower, [3, 16, 122, 1201, 14352].map(BigInt::from));
        assert_eq!(count_structures(3, 4).n_t, BigInt::from(366));
        assert!(count_structures(1, 13).n_mod_c < BigInt::from(0));
    }

    #[test]
    fn enumeration_bounds_the_formula() {
        assert_eq!(brute_force_structure_count(1, DEFAULT_BRUTE_FORCE_BUDGET).unwrap(), big(1));
        assert_eq!(brute_force_structure_count(2, DEFAULT_BRUTE_FORCE_BUDGET).unwrap(), big(3));
        for s in 0..=6 {
            let exact = brute_force_structure_count(s, DEFAULT_BRUTE_FORCE_BUDGET).unwrap();
            // Rooted forests on s + 1 labelled nodes.
            assert_eq!(exact, if s == 0 { big(1) } else { pow(s + 1, s - 1) });
            assert!(BigInt::from(exact) >= count_structures(1, s).n_mod_c);
        }
        assert!(matches!(brute_force_structure_count(7, DEFAULT_BRUTE_FORCE_BUDGET), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn report_serializes_as_strings() {
        let v = serde_json::to_value(count_structures(2, 3)).unwrap();
        assert_eq!(v["n_mod_c"], "16");
        assert_eq!(v["n_t"], "32");
        assert_eq!(v["n_loops"]["3"], "2");
    }
}
