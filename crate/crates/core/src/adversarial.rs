//! The cyclic profile on which no small committee is undominated.
//!
//! Voters and candidates are both indexed by pairs `(p, q)` with
//! `p < k + 1` and `q < ℓ`, encoded as `ℓ·p + q`. Voter `(p, q)` orders
//! candidates `(x, y)` lexicographically by `((x − p) mod (k + 1), (y − q) mod ℓ)`.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::{dissent_counts, Committee, Election};
use crate::error::{Error, Result};
use crate::subsets::{binomial, Combinations};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicInstanceSpec {
    pub k: usize,
    pub ell: usize,
}

impl CyclicInstanceSpec {
    pub fn new(k: usize, ell: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::input("k must be at least 1"));
        }
        if ell < 2 {
            return Err(Error::input("ℓ must be at least 2"));
        }
        Ok(CyclicInstanceSpec { k, ell })
    }

    /// `n = m = (k + 1)·ℓ`.
    pub fn size(&self) -> usize {
        (self.k + 1) * self.ell
    }

    pub fn encode(&self, p: usize, q: usize) -> usize {
        self.ell * p + q
    }

    pub fn decode(&self, i: usize) -> (usize, usize) {
        (i / self.ell, i % self.ell)
    }
}

pub fn cyclic_instance(spec: CyclicInstanceSpec) -> Result<Election> {
    let spec = CyclicInstanceSpec::new(spec.k, spec.ell)?;
    let (kk, ell) = (spec.k + 1, spec.ell);
    let size = spec.size();
    let rankings = (0..size)
        .map(|v| {
            let (p, q) = spec.decode(v);
            (0..size)
                .map(|j| {
                    // j-th entry of the ranking is the candidate with shifted key j.
                    let (dx, dy) = (j / ell, j % ell);
                    spec.encode((dx + p) % kk, (dy + q) % ell)
                })
                .collect()
        })
        .collect();
    Election::new(size, rankings)
}

/// A committee and the outsider beating it by the largest margin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub committee: Committee,
    pub outsider: usize,
    pub dissent: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub spec: CyclicInstanceSpec,
    pub t: usize,
    pub n: u64,
    /// `min_C max_a |{v : a ≻_v^t C}|` over all size-`k` committees.
    pub worst_dissent: u64,
    /// `(1 + t)/(1 + k) · (1 − 1/ℓ)` as `(numerator, denominator)`.
    pub bound: (i64, i64),
    /// `worst_dissent / n ≥ bound`.
    pub holds: bool,
    /// One entry per committee, in lexicographic order.
    pub witnesses: Vec<Witness>,
}

impl LowerBoundCertificate {
    pub fn worst_fraction(&self) -> Ratio<i64> {
        Ratio::new(self.worst_dissent as i64, self.n as i64)
    }
}

/// Exhaustively checks every size-`k` committee of the cyclic instance.
pub fn verify_lower_bound(spec: CyclicInstanceSpec, t: usize, node_limit: u64) -> Result<LowerBoundCertificate> {
    let e = cyclic_instance(spec)?;
    if t < 1 || t > spec.k {
        return Err(Error::input(format!("t = {t} must lie in 1..={}", spec.k)));
    }
    let m = e.m();
    let count = binomial(m, spec.k);
    if count > node_limit {
        return Err(Error::Resource(format!("{count} committees exceed the limit of {node_limit}")));
    }
    let witnesses: Vec<Witness> = (0..m)
        .into_par_iter()
        .flat_map_iter(|first| {
            let e = &e;
            Combinations::with_first(m, spec.k, first).map(move |members| {
                let (outsider, dissent) = dissent_counts(e, &members, t)
                    .into_iter()
                    .fold((usize::MAX, 0), |best, (a, d)| if best.0 == usize::MAX || d > best.1 { (a, d) } else { best });
                Witness { committee: Committee::new(members), outsider, dissent }
            })
        })
        .collect();
    let worst_dissent = witnesses.iter().map(|w| w.dissent).min().unwrap_or(0);
    let bound = Ratio::new((1 + t) as i64, (1 + spec.k) as i64) * Ratio::new(spec.ell as i64 - 1, spec.ell as i64);
    let n = e.n() as i64;
    let holds = Ratio::new(worst_dissent as i64, n) >= bound;
    Ok(LowerBoundCertificate {
        spec,
        t,
        n: n as u64,
        worst_dissent,
        bound: (*bound.numer(), *bound.denom()),
        holds,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{min_undominated_size_oracle, undominance_check, DEFAULT_NODE_LIMIT};
    use crate::ratio::Alpha;

    fn spec(k: usize, ell: usize) -> CyclicInstanceSpec {
        CyclicInstanceSpec::new(k, ell).unwrap()
    }

    #[test]
    fn rankings_follow_the_shift_rule() {
        let e = cyclic_instance(spec(3, 5)).unwrap();
        assert_eq!(&e.ranking(0)[..6], &[0, 1, 2, 3, 4, 5]);
        assert_eq!(e.ranking(7)[0], 7);
        let v1: Vec<usize> = vec![1, 2, 3, 4, 0, 6, 7, 8, 9, 5, 11, 12, 13, 14, 10, 16, 17, 18, 19, 15];
        assert_eq!(e.ranking(1), &v1[..]);
        let v5: Vec<usize> = (5..20).chain(0..5).collect();
        assert_eq!(e.ranking(5), &v5[..]);
        let e = cyclic_instance(spec(1, 2)).unwrap();
        assert_eq!(e.n(), 4);
        assert_eq!(e.ranking(0), &[0, 1, 2, 3]);
        assert_eq!(e.ranking(3), &[3, 2, 1, 0]);
    }

    #[test]
    fn order_matches_the_pairwise_definition() {
        let s = spec(2, 3);
        let e = cyclic_instance(s).unwrap();
        let (kk, ell) = (s.k + 1, s.ell);
        for v in 0..e.n() {
            let (p, q) = s.decode(v);
            for a in 0..e.m() {
                for b in 0..e.m() {
                    let ((x, y), (x2, y2)) = (s.decode(a), s.decode(b));
                    let (dx, dx2) = ((x + kk - p) % kk, (x2 + kk - p) % kk);
                    let (dy, dy2) = ((y + ell - q) % ell, (y2 + ell - q) % ell);
                    let expected = dx < dx2 || (x == x2 && dy < dy2);
                    assert_eq!(e.prefers(v, a, b).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn shifting_voters_shifts_candidates() {
        let s = spec(3, 5);
        let e = cyclic_instance(s).unwrap();
        let shift = |i: usize| {
            let (p, q) = s.decode(i);
            s.encode((p + 1) % (s.k + 1), q)
        };
        for v in 0..e.n() {
            let mapped: Vec<usize> = e.ranking(v).iter().map(|&a| shift(a)).collect();
            assert_eq!(mapped, e.ranking(shift(v)));
        }
    }

    #[test]
    fn small_instance_certificate() {
        let cert = verify_lower_bound(spec(1, 2), 1, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(cert.witnesses.len(), 4);
        assert!(cert.holds);
        assert!(cert.worst_fraction() >= Ratio::new(1, 2));
    }

    #[test]
    fn witnesses_agree_with_the_verifier() {
        let s = spec(2, 3);
        let e = cyclic_instance(s).unwrap();
        let cert = verify_lower_bound(s, 1, DEFAULT_NODE_LIMIT).unwrap();
        assert!(cert.holds);
        for w in cert.witnesses.iter().take(20) {
            let r = undominance_check(&e, &w.committee, 1, Alpha::one()).unwrap();
            assert_eq!(r.max_dissent, w.dissent);
            assert_eq!(r.worst_outsider, Some(w.outsider));
        }
    }

    #[test]
    fn no_small_condorcet_set_on_the_cycle() {
        let e = cyclic_instance(spec(3, 5)).unwrap();
        let out = min_undominated_size_oracle(&e, 1, Alpha::new(39, 100).unwrap(), 3, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(out.size(), None);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(CyclicInstanceSpec::new(0, 3).is_err());
        assert!(CyclicInstanceSpec::new(2, 1).is_err());
        assert!(verify_lower_bound(spec(2, 3), 3, DEFAULT_NODE_LIMIT).is_err());
        assert!(matches!(verify_lower_bound(spec(3, 5), 1, 10), Err(Error::Resource(_))));
    }
}
