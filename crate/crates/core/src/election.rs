//! Ordinal election profiles, t-preference, and undominance verification.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::Alpha;
use crate::subsets::{binomial, Combinations};

/// `n` voters with complete strict rankings over `m` candidates.
///
/// Rankings are stored both as orders (most preferred first) and as their
/// inverse permutations so that pairwise comparisons are a lookup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ElectionData", try_from = "ElectionData")]
pub struct Election {
    n: usize,
    m: usize,
    order: Vec<usize>,
    position: Vec<usize>,
}

/// Plain serialization shape of an [`Election`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElectionData {
    pub n: usize,
    pub m: usize,
    pub rankings: Vec<Vec<usize>>,
}

impl From<Election> for ElectionData {
    fn from(e: Election) -> Self {
        ElectionData { n: e.n, m: e.m, rankings: e.rankings() }
    }
}

impl TryFrom<ElectionData> for Election {
    type Error = Error;
    fn try_from(d: ElectionData) -> Result<Self> {
        if d.rankings.len() != d.n {
            return Err(Error::input(format!(
                "declared {} voters but found {} rankings",
                d.n,
                d.rankings.len()
            )));
        }
        Election::new(d.m, d.rankings)
    }
}

impl Election {
    /// Builds an election from `rankings`, each a permutation of `0..m`.
    pub fn new(m: usize, rankings: Vec<Vec<usize>>) -> Result<Self> {
        let n = rankings.len();
        if n == 0 {
            return Err(Error::input("an election needs at least one voter"));
        }
        if m == 0 {
            return Err(Error::input("an election needs at least one candidate"));
        }
        let mut order = Vec::with_capacity(n * m);
        let mut position = vec![usize::MAX; n * m];
        for (v, r) in rankings.iter().enumerate() {
            if r.len() != m {
                return Err(Error::input(format!(
                    "voter {v} ranks {} candidates, expected {m}",
                    r.len()
                )));
            }
            for (pos, &a) in r.iter().enumerate() {
                if a >= m {
                    return Err(Error::input(format!("voter {v} ranks unknown candidate {a}")));
                }
                if position[v * m + a] != usize::MAX {
                    return Err(Error::input(format!("voter {v} ranks candidate {a} twice")));
                }
                position[v * m + a] = pos;
            }
            order.extend_from_slice(r);
        }
        Ok(Election { n, m, order, position })
    }

    /// Impartial culture: `n` independent uniformly random rankings of `m` candidates.
    pub fn impartial_culture(n: usize, m: usize, seed: u64) -> Result<Election> {
        let mut rng = crate::seed::rng(seed);
        let rankings = (0..n)
            .map(|_| {
                let mut r: Vec<usize> = (0..m).collect();
                r.shuffle(&mut rng);
                r
            })
            .collect();
        Election::new(m, rankings)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Voter `v`'s ranking, most preferred first.
    pub fn ranking(&self, v: usize) -> &[usize] {
        &self.order[v * self.m..(v + 1) * self.m]
    }

    /// Rank position of candidate `a` for voter `v` (0 = top).
    #[inline]
    pub fn position(&self, v: usize, a: usize) -> usize {
        self.position[v * self.m + a]
    }

    pub fn positions(&self, v: usize) -> &[usize] {
        &self.position[v * self.m..(v + 1) * self.m]
    }

    pub fn rankings(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.ranking(v).to_vec()).collect()
    }

    /// The sub-election on the given voters (candidates unchanged).
    pub fn restrict(&self, voters: &[usize]) -> Result<Election> {
        let rankings = voters
            .iter()
            .map(|&v| {
                if v >= self.n {
                    Err(Error::input(format!("voter {v} out of range")))
                } else {
                    Ok(self.ranking(v).to_vec())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Election::new(self.m, rankings)
    }

    fn check_voter(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::input(format!("voter {v} out of range (n = {})", self.n)));
        }
        Ok(())
    }

    fn check_candidate(&self, a: usize) -> Result<()> {
        if a >= self.m {
            return Err(Error::input(format!("candidate {a} out of range (m = {})", self.m)));
        }
        Ok(())
    }

    /// Whether voter `v` strictly prefers `a` to `b`.
    pub fn prefers(&self, v: usize, a: usize, b: usize) -> Result<bool> {
        self.check_voter(v)?;
        self.check_candidate(a)?;
        self.check_candidate(b)?;
        Ok(self.position(v, a) < self.position(v, b))
    }

    /// Whether voter `v` ranks at least `t` members of `c` above `a`.
    pub fn t_prefers_committee(&self, v: usize, c: &Committee, a: usize, t: usize) -> Result<bool> {
        self.check_voter(v)?;
        self.check_candidate(a)?;
        c.check_within(self.m)?;
        if c.contains(a) {
            return Err(Error::input(format!("candidate {a} is a committee member")));
        }
        if t == 0 || t > c.len() {
            return Err(Error::input(format!("t = {t} must lie in 1..={}", c.len())));
        }
        Ok(self.members_above(v, c.members(), a) >= t)
    }

    /// Number of `members` that voter `v` ranks above `a`.
    #[inline]
    pub fn members_above(&self, v: usize, members: &[usize], a: usize) -> usize {
        let pa = self.position(v, a);
        members.iter().filter(|&&c| self.position(v, c) < pa).count()
    }

    /// Parses the line-oriented `.elect` format or its JSON counterpart.
    pub fn parse(text: &str) -> Result<Election> {
        if text.trim_start().starts_with('{') {
            let data: ElectionData = serde_json::from_str(text)?;
            return Election::try_from(data);
        }
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or(Error::Parse { line: 0, msg: "missing header line \"n m\"".into() })?;
        let nums: Vec<usize> = parse_numbers(header, hline)?;
        if nums.len() != 2 {
            return Err(Error::Parse { line: hline, msg: "header must be \"n m\"".into() });
        }
        let (n, m) = (nums[0], nums[1]);
        let mut rankings = Vec::with_capacity(n);
        for (line, l) in lines {
            if rankings.len() == n {
                return Err(Error::Parse { line, msg: format!("more than {n} rankings") });
            }
            rankings.push(parse_numbers(l, line)?);
        }
        if rankings.len() != n {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("expected {n} rankings, found {}", rankings.len()),
            });
        }
        Election::new(m, rankings)
    }

    pub fn read(path: &Path) -> Result<Election> {
        Election::parse(&std::fs::read_to_string(path)?)
    }

    /// Renders the `.elect` text format.
    pub fn to_elect(&self) -> String {
        let mut s = String::with_capacity(self.n * self.m * 3 + 16);
        let _ = writeln!(s, "{} {}", self.n, self.m);
        for v in 0..self.n {
            let row: Vec<String> = self.ranking(v).iter().map(|a| a.to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("not an index: {tok:?}") })
        })
        .collect()
}

/// A set of candidates, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Committee {
    members: Vec<usize>,
}

impl Committee {
    /// Sorts and de-duplicates `members`.
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Committee { members }
    }

    pub fn full(m: usize) -> Self {
        Committee { members: (0..m).collect() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: usize) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    pub fn insert(&mut self, a: usize) -> bool {
        match self.members.binary_search(&a) {
            Ok(_) => false,
            Err(i) => {
                self.members.insert(i, a);
                true
            }
        }
    }

    pub fn union(&self, other: &Committee) -> Committee {
        let mut all = self.members.clone();
        all.extend_from_slice(&other.members);
        Committee::new(all)
    }

    pub fn check_within(&self, m: usize) -> Result<()> {
        match self.members.last() {
            Some(&a) if a >= m => Err(Error::input(format!("committee member {a} out of range"))),
            _ => Ok(()),
        }
    }

    /// Parses a comma-separated member list such as `0,3,5`.
    pub fn parse(s: &str) -> Result<Committee> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Committee::default());
        }
        let members = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::input(format!("bad committee member {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Committee::new(members))
    }
}

impl std::fmt::Display for Committee {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Per-outsider dissent counts for a committee at depth `t` and ratio `alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndominanceReport {
    pub t: usize,
    pub alpha: Alpha,
    /// `⌊α·n⌋`.
    pub threshold: u64,
    /// `(outsider, |{v : outsider ≻_v^t C}|)` for every outsider, by index.
    pub per_outsider: Vec<(usize, u64)>,
    pub worst_outsider: Option<usize>,
    pub max_dissent: u64,
    pub pass: bool,
}

/// For each voter, the rank position of their `t`-th favourite committee
/// member. An outsider `a` beats the committee for `v` at depth `t` exactly
/// when `position(v, a)` is smaller.
fn tth_positions(e: &Election, members: &[usize], t: usize) -> Vec<usize> {
    let mut buf = Vec::with_capacity(members.len());
    (0..e.n())
        .map(|v| {
            buf.clear();
            buf.extend(members.iter().map(|&c| e.position(v, c)));
            let (_, kth, _) = buf.select_nth_unstable(t - 1);
            *kth
        })
        .collect()
}

/// Dissent counts for every outsider, without argument checks.
pub(crate) fn dissent_counts(e: &Election, members: &[usize], t: usize) -> Vec<(usize, u64)> {
    let kth = tth_positions(e, members, t);
    let mut inside = vec![false; e.m()];
    for &c in members {
        inside[c] = true;
    }
    (0..e.m())
        .filter(|&a| !inside[a])
        .map(|a| {
            let count = (0..e.n()).filter(|&v| e.position(v, a) < kth[v]).count() as u64;
            (a, count)
        })
        .collect()
}

/// Largest dissent over outsiders and the (lowest-index) outsider attaining it.
pub(crate) fn worst_dissent(e: &Election, members: &[usize], t: usize) -> (u64, Option<usize>) {
    let mut best = (0, None);
    for (a, d) in dissent_counts(e, members, t) {
        if best.1.is_none() || d > best.0 {
            best = (d, Some(a));
        }
    }
    best
}

/// Checks whether `c` is `(t, alpha)`-undominated in `e`.
pub fn undominance_check(e: &Election, c: &Committee, t: usize, alpha: Alpha) -> Result<UndominanceReport> {
    c.check_within(e.m())?;
    if t == 0 || t > c.len() {
        return Err(Error::input(format!(
            "depth t = {t} needs a committee of at least t members (|C| = {})",
            c.len()
        )));
    }
    let per_outsider = dissent_counts(e, c.members(), t);
    let threshold = alpha.floor_times(e.n());
    let mut worst: Option<(usize, u64)> = None;
    for &(a, d) in &per_outsider {
        if worst.map_or(true, |(_, w)| d > w) {
            worst = Some((a, d));
        }
    }
    let max_dissent = worst.map_or(0, |(_, d)| d);
    Ok(UndominanceReport {
        t,
        alpha,
        threshold,
        worst_outsider: worst.map(|(a, _)| a),
        max_dissent,
        pass: max_dissent <= threshold,
        per_outsider,
    })
}

/// Result of the brute-force minimum-size search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleOutcome {
    Found { size: usize, witness: Committee },
    NoneWithinCap,
}

impl OracleOutcome {
    pub fn size(&self) -> Option<usize> {
        match self {
            OracleOutcome::Found { size, .. } => Some(*size),
            OracleOutcome::NoneWithinCap => None,
        }
    }
}

/// Default number of committees the oracle may examine.
pub const DEFAULT_NODE_LIMIT: u64 = 50_000_000;

/// Smallest `k ≥ t` (up to `size_cap`) admitting a `(t, alpha)`-undominated
/// committee of size `k`, found by exhaustive lexicographic enumeration.
///
/// The witness is the lexicographically first passing committee of that
/// size, independent of how the search is split across threads.
pub fn min_undominated_size_oracle(
    e: &Election,
    t: usize,
    alpha: Alpha,
    size_cap: usize,
    node_limit: u64,
) -> Result<OracleOutcome> {
    if t == 0 {
        return Err(Error::input("t must be at least 1"));
    }
    if size_cap > e.m() {
        return Err(Error::input(format!("size cap {size_cap} exceeds m = {}", e.m())));
    }
    let threshold = alpha.floor_times(e.n());
    let mut budget = node_limit;
    for k in t..=size_cap {
        let count = binomial(e.m(), k);
        if count > budget {
            return Err(Error::Resource(format!(
                "oracle needs {count} committees of size {k}, {budget} left of {node_limit}"
            )));
        }
        budget -= count;
        let witness = (0..e.m())
            .into_par_iter()
            .filter_map(|first| {
                Combinations::with_first(e.m(), k, first)
                    .find(|members| worst_dissent(e, members, t).0 <= threshold)
            })
            .find_first(|_| true);
        if let Some(members) = witness {
            return Ok(OracleOutcome::Found { size: k, witness: Committee::new(members) });
        }
    }
    Ok(OracleOutcome::NoneWithinCap)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The 3-cycle a≻b≻c, b≻c≻a, c≻a≻b.
    pub(crate) fn e3() -> Election {
        Election::new(3, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap()
    }

    fn half() -> Alpha {
        Alpha::new(1, 2).unwrap()
    }

    #[test]
    fn prefers_reads_rankings() {
        let e = e3();
        assert!(e.prefers(0, 0, 2).unwrap());
        assert!(!e.prefers(0, 2, 0).unwrap());
        assert!(!e.prefers(0, 0, 0).unwrap());
        assert!(e.prefers(3, 0, 1).is_err());
        assert!(e.prefers(0, 0, 3).is_err());
    }

    #[test]
    fn t_preference_hand_counts() {
        let e = e3();
        let ab = Committee::new(vec![0, 1]);
        assert!(e.t_prefers_committee(0, &ab, 2, 1).unwrap());
        assert!(!e.t_prefers_committee(2, &ab, 2, 1).unwrap());
        assert!(!e.t_prefers_committee(1, &ab, 2, 2).unwrap());
        assert!(e.t_prefers_committee(0, &ab, 0, 1).is_err());
        assert!(e.t_prefers_committee(0, &ab, 2, 3).is_err());
    }

    #[test]
    fn undominance_on_the_cycle() {
        let e = e3();
        let r = undominance_check(&e, &Committee::new(vec![0, 1]), 1, half()).unwrap();
        assert!(r.pass);
        assert_eq!(r.per_outsider, vec![(2, 1)]);
        assert_eq!(r.threshold, 1);

        let r = undominance_check(&e, &Committee::new(vec![0]), 1, half()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_outsider, Some(2));
        assert_eq!(r.max_dissent, 2);

        let r = undominance_check(&e, &Committee::full(3), 3, half()).unwrap();
        assert!(r.pass);
        assert!(r.per_outsider.is_empty());
        assert_eq!(r.worst_outsider, None);
    }

    #[test]
    fn undominance_rejects_bad_depth() {
        let e = e3();
        assert!(undominance_check(&e, &Committee::new(vec![0]), 2, half()).is_err());
        assert!(undominance_check(&e, &Committee::new(vec![0]), 0, half()).is_err());
        assert!(undominance_check(&e, &Committee::new(vec![5]), 1, half()).is_err());
    }

    #[test]
    fn oracle_on_the_cycle() {
        let e = e3();
        let out = min_undominated_size_oracle(&e, 1, half(), 3, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(out, OracleOutcome::Found { size: 2, witness: Committee::new(vec![0, 1]) });
        let out = min_undominated_size_oracle(&e, 2, half(), 3, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(out.size(), Some(3));
        let out = min_undominated_size_oracle(&e, 2, half(), 2, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(out, OracleOutcome::NoneWithinCap);
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let e = e3();
        let err = min_undominated_size_oracle(&e, 1, half(), 3, 4).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn threshold_uses_floor_semantics() {
        // 4 voters, α = 1/2: a dissent of exactly 2 passes, 3 fails.
        let e = Election::new(
            2,
            vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]],
        )
        .unwrap();
        let r = undominance_check(&e, &Committee::new(vec![0]), 1, half()).unwrap();
        assert_eq!(r.max_dissent, 2);
        assert!(r.pass);
        let e = Election::new(
            2,
            vec![vec![1, 0], vec![1, 0], vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        let r = undominance_check(&e, &Committee::new(vec![0]), 1, half()).unwrap();
        assert_eq!(r.max_dissent, 3);
        assert!(!r.pass);
    }

    #[test]
    fn elect_format_round_trip() {
        let text = "# cycle\n3 3\n0 1 2\n1 2 0\n# middle comment\n2 0 1\n";
        let e = Election::parse(text).unwrap();
        assert_eq!(e, e3());
        assert_eq!(Election::parse(&e.to_elect()).unwrap(), e);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(Election::parse(&json).unwrap(), e);
    }

    #[test]
    fn malformed_profiles_are_rejected() {
        assert!(Election::parse("2 2\n0 1\n").is_err());
        assert!(Election::parse("1 2\n0 0\n").is_err());
        assert!(Election::parse("1 2\n0 2\n").is_err());
        assert!(Election::parse("1 2\n0 x\n").is_err());
        assert!(Election::parse("0 2\n").is_err());
        assert!(Election::parse("1 2\n0 1\n1 0\n").is_err());
        assert!(Election::parse("").is_err());
    }
}
