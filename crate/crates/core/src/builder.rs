//! Committee constructions: sampling from a plain equilibrium (`t = 1`),
//! one-shot rounding of a scaled equilibrium, and iterative rounding.

use serde::{Deserialize, Serialize};

use crate::analytics::{self, GridSpec};
use crate::election::{undominance_check, Committee, Election, UndominanceReport};
use crate::equilibrium::{boundary_candidate, certify, solve, Equilibrium, EquilibriumCertificate, Market, SolverOptions};
use crate::error::{Error, Result};
use crate::income::IncomeDistribution;
use crate::ratio::{rational_of_f64, Alpha};
use crate::rounding::{dependent_round, sample_iid};
use crate::seed;

/// Coordinates at least this large must appear in every rounded committee.
const INTEGRAL: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildOptions {
    /// Rounding draws tried before falling back.
    pub samples: u32,
    pub seed: u64,
    pub solver: SolverOptions,
    /// Largest tolerance at which an uncertified equilibrium is re-certified
    /// before giving up.
    pub relaxed_tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { samples: 256, seed: 0, solver: SolverOptions::default(), relaxed_tol: 1e-2 }
    }
}

impl BuildOptions {
    fn solver_for(&self, component: &str, index: u64) -> SolverOptions {
        SolverOptions { seed: seed::derive(self.seed, component, index), ..self.solver.clone() }
    }

    /// Solves, then re-certifies the best iterate at `relaxed_tol` if it
    /// missed the solver tolerance; the certificate records the tolerance used.
    fn equilibrium(
        &self,
        e: &Election,
        d: &IncomeDistribution,
        market: Market,
        component: &str,
        index: u64,
    ) -> Result<Equilibrium> {
        let eq = solve(e, d, market, &self.solver_for(component, index))?;
        if eq.certificate.converged || !(self.relaxed_tol > self.solver.tol) {
            return eq.require_converged();
        }
        let (_, mut cert) = certify(e, d, market, None, &eq.y, &eq.p, self.relaxed_tol)?;
        cert.iterations = eq.certificate.iterations;
        cert.restarts = eq.certificate.restarts;
        Equilibrium { certificate: cert, ..eq }.require_converged()
    }
}

/// Boundary candidates and coverage flags of one committee.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMap {
    pub boundary: Vec<Option<usize>>,
    pub covered: Vec<bool>,
}

impl CoverageMap {
    pub fn uncovered(&self) -> usize {
        self.covered.iter().filter(|&&c| !c).count()
    }
}

/// Per-voter coverage targets: voter `v` is covered once at least `t`
/// members sit at positions below `limit[v]`; `None` is never covered.
struct Targets {
    t: usize,
    limit: Vec<Option<usize>>,
}

impl Targets {
    fn new(e: &Election, p: &[Vec<f64>], t: usize, epsilon: f64, excluded: &[usize]) -> (Self, Vec<Option<usize>>) {
        let boundary: Vec<Option<usize>> =
            (0..e.n()).map(|v| boundary_candidate(&p[v], e.ranking(v), epsilon)).collect();
        let mut limit: Vec<Option<usize>> = boundary
            .iter()
            .enumerate()
            .map(|(v, b)| match *b {
                None => Some(e.m()),
                Some(a) if t == 1 => Some(e.position(v, a) + 1),
                Some(a) => Some(e.position(v, a)),
            })
            .collect();
        for &v in excluded {
            limit[v] = None;
        }
        (Targets { t, limit }, boundary)
    }

    fn is_covered(&self, e: &Election, v: usize, members: &[usize]) -> bool {
        match self.limit[v] {
            None => false,
            Some(l) => members.iter().filter(|&&a| e.position(v, a) < l).count() >= self.t,
        }
    }

    fn covered(&self, e: &Election, members: &[usize]) -> Vec<bool> {
        (0..e.n()).map(|v| self.is_covered(e, v, members)).collect()
    }

    fn uncovered(&self, e: &Election, members: &[usize]) -> usize {
        (0..e.n()).filter(|&v| !self.is_covered(e, v, members)).count()
    }
}

/// Coverage of `c` against the boundary candidates under prices `p`.
///
/// For `t = 1` a voter is covered when some member is ranked at or above
/// the boundary; for larger `t`, when at least `t` members are ranked
/// strictly above it. An empty boundary counts as covered once `|C| ≥ t`.
pub fn coverage(e: &Election, c: &Committee, p: &[Vec<f64>], t: usize, epsilon: f64) -> Result<CoverageMap> {
    c.check_within(e.m())?;
    if t < 1 {
        return Err(Error::input("t must be at least 1"));
    }
    if p.len() != e.n() || p.iter().any(|row| row.len() != e.m()) {
        return Err(Error::input("price matrix does not match the election"));
    }
    let (targets, boundary) = Targets::new(e, p, t, epsilon, &[]);
    Ok(CoverageMap { boundary, covered: targets.covered(e, c.members()) })
}

/// How the returned committee was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Selection {
    /// Rounding draw number `draw`.
    Sampled { draw: u32 },
    /// Greedy coverage after every draw missed the target.
    Greedy,
    /// Every candidate.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOutcome {
    pub committee: Committee,
    /// Verifier output at `effective_alpha`.
    pub report: UndominanceReport,
    pub effective_alpha: Alpha,
    pub uncovered: usize,
    pub uncovered_limit: f64,
    /// Whether the selected committee met `uncovered_limit`.
    pub accepted: bool,
    pub selection: Selection,
    pub certificate: Option<EquilibriumCertificate>,
}

fn full_outcome(e: &Election, t: usize, alpha: Alpha) -> Result<BuildOutcome> {
    let committee = Committee::full(e.m());
    let report = undominance_check(e, &committee, t, alpha)?;
    Ok(BuildOutcome {
        committee,
        report,
        effective_alpha: alpha,
        uncovered: 0,
        uncovered_limit: 0.0,
        accepted: true,
        selection: Selection::Full,
        certificate: None,
    })
}

/// Adds candidates one at a time, each maximizing newly covered voters
/// (lowest index on ties), until `c` has `size` members.
fn greedy_fill(e: &Election, targets: &Targets, mut c: Committee, size: usize) -> Committee {
    let size = size.min(e.m());
    while c.len() < size {
        let mut best: Option<(usize, usize)> = None;
        let mut trial = c.members().to_vec();
        for a in (0..e.m()).filter(|&a| !c.contains(a)) {
            trial.push(a);
            let gain = e.n() - targets.uncovered(e, &trial);
            trial.pop();
            if best.map_or(true, |(g, _)| gain > g) {
                best = Some((gain, a));
            }
        }
        match best {
            Some((_, a)) => {
                c.insert(a);
            }
            None => break,
        }
    }
    c
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input(format!("ε = {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// Committee of size `k` from i.i.d. draws of a plain equilibrium's allocation.
///
/// Among draws meeting the coverage target `(1 − β)^k·n`, the first one the
/// verifier accepts at `β + (1 − β)^k` wins; otherwise the first meeting the
/// target; otherwise a greedy committee.
pub fn build_t1(e: &Election, k: usize, beta: f64, epsilon: f64, opts: &BuildOptions) -> Result<BuildOutcome> {
    if k < 1 || k > e.m() {
        return Err(Error::input(format!("k = {k} must lie in 1..={}", e.m())));
    }
    check_epsilon(epsilon)?;
    let d = IncomeDistribution::threshold(beta, epsilon)?;
    let miss = (1.0 - beta).powi(k as i32);
    let alpha = Alpha::at_least(beta + miss)?;
    if k == e.m() {
        return full_outcome(e, 1, alpha);
    }
    let eq = opts.equilibrium(e, &d, Market::plain(1.0), "build_t1", 0)?;
    let (targets, _) = Targets::new(e, &eq.p, 1, epsilon, &eq.certificate.outside_option_voters);
    let limit = miss * e.n() as f64;
    let y: Vec<f64> = {
        let total: f64 = eq.y.iter().sum();
        eq.y.iter().map(|v| v / total).collect()
    };

    let mut fallback: Option<(Committee, usize, u32)> = None;
    for draw in 0..opts.samples {
        let mut rng = seed::rng(seed::derive(opts.seed, "build_t1/sample", draw as u64));
        let c = greedy_fill(e, &targets, sample_iid(&y, k, &mut rng)?, k);
        let uncovered = targets.uncovered(e, c.members());
        if uncovered as f64 > limit + 1e-9 {
            continue;
        }
        let report = undominance_check(e, &c, 1, alpha)?;
        if report.pass {
            return Ok(BuildOutcome {
                committee: c,
                report,
                effective_alpha: alpha,
                uncovered,
                uncovered_limit: limit,
                accepted: true,
                selection: Selection::Sampled { draw },
                certificate: Some(eq.certificate),
            });
        }
        if fallback.is_none() {
            fallback = Some((c, uncovered, draw));
        }
    }
    let (committee, uncovered, selection) = match fallback {
        Some((c, u, draw)) => (c, u, Selection::Sampled { draw }),
        None => {
            let c = greedy_fill(e, &targets, Committee::new(Vec::new()), k);
            let u = targets.uncovered(e, c.members());
            (c, u, Selection::Greedy)
        }
    };
    let report = undominance_check(e, &committee, 1, alpha)?;
    Ok(BuildOutcome {
        committee,
        report,
        effective_alpha: alpha,
        uncovered,
        uncovered_limit: limit,
        accepted: uncovered as f64 <= limit + 1e-9,
        selection,
        certificate: Some(eq.certificate),
    })
}

/// A committee drawn by dependent rounding of one scaled equilibrium.
struct Rounded {
    committee: Committee,
    uncovered: Vec<bool>,
    accepted: bool,
    draw: u32,
}

/// Rounds `eq.y` up to `samples` times, keeping draws that contain every
/// integral coordinate; returns the first draw leaving at most `limit`
/// voters uncovered, else the one leaving fewest.
fn round_scaled(
    e: &Election,
    eq: &Equilibrium,
    t: usize,
    epsilon: f64,
    limit: f64,
    samples: u32,
    stream: u64,
) -> Result<Rounded> {
    let (targets, _) = Targets::new(e, &eq.p, t, epsilon, &eq.certificate.outside_option_voters);
    let y: Vec<f64> = eq.y.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let forced: Vec<usize> = (0..y.len()).filter(|&a| y[a] >= INTEGRAL).collect();
    let mut best: Option<Rounded> = None;
    for draw in 0..samples.max(1) {
        let c = dependent_round(&y, seed::derive(stream, "round", draw as u64))?.committee();
        if forced.iter().any(|&a| !c.contains(a)) {
            continue;
        }
        let covered = targets.covered(e, c.members());
        let missed = covered.iter().filter(|&&c| !c).count();
        let accepted = missed as f64 <= limit + 1e-9;
        let better = best.as_ref().map_or(true, |b| missed < b.uncovered.iter().filter(|&&c| !c).count());
        if accepted || better {
            best = Some(Rounded { committee: c, uncovered: covered.iter().map(|c| !c).collect(), accepted, draw });
        }
        if accepted {
            break;
        }
    }
    best.ok_or_else(|| Error::Resource("no rounding draw kept every integral candidate".into()))
}

fn epsilon_ratio(epsilon: f64) -> Result<num_rational::Ratio<i64>> {
    rational_of_f64(epsilon)
}

/// Rounds one γt-scaled equilibrium with budget `B` into a committee.
pub fn build_one_shot(
    e: &Election,
    t: usize,
    alpha: Alpha,
    gamma: f64,
    budget: u64,
    epsilon: f64,
    opts: &BuildOptions,
) -> Result<BuildOutcome> {
    check_epsilon(epsilon)?;
    let omega = analytics::omega(gamma, t as u32)?;
    let scale = gamma * t as f64;
    let b = budget as f64;
    if b < scale {
        return Err(Error::input(format!("budget {budget} is below γt = {scale}")));
    }
    if budget as usize > e.m() {
        return Err(Error::input(format!("budget {budget} exceeds the {} candidates", e.m())));
    }
    if alpha.value() < scale / b + omega {
        return Err(Error::input(format!(
            "α = {alpha} is below γt/B + ω = {:.6}",
            scale / b + omega
        )));
    }
    let effective = alpha.inflate(epsilon_ratio(epsilon)?);
    let d = IncomeDistribution::uniform_tail(epsilon)?;
    let eq = opts.equilibrium(e, &d, Market::scaled(b, scale), "build_one_shot", 0)?;
    let limit = omega * e.n() as f64;
    let r = round_scaled(e, &eq, t, epsilon, limit, opts.samples, seed::derive(opts.seed, "build_one_shot", 0))?;
    let report = undominance_check(e, &r.committee, t, effective)?;
    Ok(BuildOutcome {
        uncovered: r.uncovered.iter().filter(|&&u| u).count(),
        committee: r.committee,
        report,
        effective_alpha: effective,
        uncovered_limit: limit,
        accepted: r.accepted,
        selection: Selection::Sampled { draw: r.draw },
        certificate: Some(eq.certificate),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationParams {
    pub t: usize,
    pub alpha: Alpha,
    pub gamma: f64,
    pub tau: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub index: u32,
    /// `B_i = B_0/τ^i` before capping.
    pub budget: f64,
    /// Remaining voters `|V_i|` at the start of the round.
    pub voters: usize,
    pub committee: Committee,
    /// Voters of `V_i` not t-covered by this round's committee.
    pub uncovered_after: usize,
    /// Whether `uncovered_after ≤ ω·|V_i|`.
    pub accepted: bool,
    /// True when the capped budget reached `m` and every candidate was taken.
    pub saturated: bool,
    pub certificate: Option<EquilibriumCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub params: IterationParams,
    pub omega: f64,
    pub b0: f64,
    pub rounds: Vec<Round>,
    /// Set when a round's equilibrium failed to certify; later rounds were skipped.
    pub aborted: Option<String>,
}

impl IterationTrace {
    /// `B_0·τ/(τ − 1) + log_τ(B_0/(γt)) + rounds`.
    pub fn size_bound(&self) -> f64 {
        let IterationParams { t, gamma, tau, .. } = self.params;
        self.b0 * tau / (tau - 1.0) + (self.b0 / (gamma * t as f64)).ln() / tau.ln() + self.rounds.len() as f64
    }

    /// Checks the budget schedule, the per-round decay and the size bound.
    pub fn invariant_violations(&self, committee_size: usize) -> Vec<String> {
        let mut out = Vec::new();
        let tau = self.params.tau;
        for (i, r) in self.rounds.iter().enumerate() {
            let expect = self.b0 / tau.powi(i as i32);
            if (r.budget - expect).abs() > 1e-9 * expect.max(1.0) {
                out.push(format!("round {i}: budget {} != {expect}", r.budget));
            }
            if r.uncovered_after as f64 > self.omega * r.voters as f64 + 1.0 + 1e-9 {
                out.push(format!(
                    "round {i}: {} voters left of {}, above ω·|V| + 1",
                    r.uncovered_after, r.voters
                ));
            }
            if let Some(next) = self.rounds.get(i + 1) {
                if next.voters != r.uncovered_after {
                    out.push(format!("round {}: starts with {} voters, expected {}", i + 1, next.voters, r.uncovered_after));
                }
            }
        }
        if committee_size as f64 > self.size_bound() + 1e-9 {
            out.push(format!("committee size {committee_size} above bound {:.3}", self.size_bound()));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterativeOutcome {
    pub committee: Committee,
    pub report: UndominanceReport,
    pub effective_alpha: Alpha,
    pub trace: IterationTrace,
    /// No abort and every round met its coverage target.
    pub accepted: bool,
}

/// Repeated rounding with geometrically shrinking budgets, each round
/// serving only the voters earlier rounds left uncovered.
pub fn build_iterative(
    e: &Election,
    t: usize,
    alpha: Alpha,
    gamma: f64,
    tau: f64,
    epsilon: f64,
    opts: &BuildOptions,
) -> Result<IterativeOutcome> {
    check_epsilon(epsilon)?;
    if t < 2 {
        return Err(Error::input("the iterative build needs t ≥ 2"));
    }
    if !(tau > 1.0 && tau.is_finite()) {
        return Err(Error::input(format!("τ = {tau} must exceed 1")));
    }
    let omega = analytics::omega(gamma, t as u32)?;
    if omega * tau >= 1.0 {
        return Err(Error::input(format!("ω·τ = {:.6} must be below 1", omega * tau)));
    }
    let scale = gamma * t as f64;
    let b0 = scale / (alpha.value() * (1.0 - omega * tau));
    if b0 < scale {
        return Err(Error::input(format!(
            "B_0 = {b0:.4} is below γt = {scale}: α is too large for the iterative path, use the one-shot build"
        )));
    }
    let d = IncomeDistribution::uniform_tail(epsilon)?;
    let mut trace = IterationTrace {
        params: IterationParams { t, alpha, gamma, tau, epsilon },
        omega,
        b0,
        rounds: Vec::new(),
        aborted: None,
    };
    let mut remaining: Vec<usize> = (0..e.n()).collect();
    let mut committee = Committee::new(Vec::new());
    let mut i = 0u32;
    loop {
        let budget = b0 / tau.powi(i as i32);
        if budget < scale || remaining.is_empty() {
            break;
        }
        if budget >= e.m() as f64 {
            committee = Committee::full(e.m());
            trace.rounds.push(Round {
                index: i,
                budget,
                voters: remaining.len(),
                committee: committee.clone(),
                uncovered_after: 0,
                accepted: true,
                saturated: true,
                certificate: None,
            });
            break;
        }
        let sub = e.restrict(&remaining)?;
        let eq = match opts.equilibrium(&sub, &d, Market::scaled(budget, scale), "build_iterative", i as u64) {
            Ok(eq) => eq,
            Err(err) => {
                trace.aborted = Some(format!("round {i}: {err}"));
                break;
            }
        };
        let limit = omega * remaining.len() as f64;
        let stream = seed::derive(opts.seed, "build_iterative/round", i as u64);
        let r = round_scaled(&sub, &eq, t, epsilon, limit, opts.samples, stream)?;
        let next: Vec<usize> =
            remaining.iter().zip(&r.uncovered).filter(|(_, &u)| u).map(|(&v, _)| v).collect();
        trace.rounds.push(Round {
            index: i,
            budget,
            voters: remaining.len(),
            committee: r.committee.clone(),
            uncovered_after: next.len(),
            accepted: r.accepted,
            saturated: false,
            certificate: Some(eq.certificate),
        });
        committee = committee.union(&r.committee);
        remaining = next;
        i += 1;
    }
    if committee.len() < t {
        return Err(Error::NonConvergence {
            reason: trace.aborted.clone().unwrap_or_else(|| "no round produced a committee".into()),
            certificate: Box::new(
                trace.rounds.last().and_then(|r| r.certificate.clone()).unwrap_or_else(empty_certificate),
            ),
        });
    }
    let effective = alpha.inflate(epsilon_ratio(epsilon)?);
    let report = undominance_check(e, &committee, t, effective)?;
    let accepted = trace.aborted.is_none() && trace.rounds.iter().all(|r| r.accepted);
    Ok(IterativeOutcome { committee, report, effective_alpha: effective, trace, accepted })
}

fn empty_certificate() -> EquilibriumCertificate {
    EquilibriumCertificate {
        demand_residual: f64::INFINITY,
        clearing_residual: f64::INFINITY,
        producer_gap: f64::INFINITY,
        tol: 0.0,
        converged: false,
        outside_option_voters: Vec::new(),
        iterations: 0,
        restarts: 0,
    }
}

/// Which construction to run, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "path")]
pub enum Strategy {
    T1 { k: usize, beta: f64 },
    OneShot { gamma: f64, budget: u64 },
    Iterative { gamma: f64, tau: f64, size_bound: f64 },
}

impl Strategy {
    /// Committee size the construction aims for.
    pub fn size_estimate(&self) -> f64 {
        match *self {
            Strategy::T1 { k, .. } => k as f64,
            Strategy::OneShot { budget, .. } => budget as f64,
            Strategy::Iterative { size_bound, .. } => size_bound,
        }
    }
}

/// Largest `k` considered for `t = 1`.
const K_MAX: u32 = 100_000;

/// Picks the construction for `(t, α)` from the analytic size bounds.
pub fn choose_params(t: usize, alpha: Alpha, grid: &GridSpec) -> Result<Strategy> {
    if t < 1 {
        return Err(Error::input("t must be at least 1"));
    }
    let a = alpha.value();
    if t == 1 {
        for k in 1..=K_MAX {
            let (beta, ak) = analytics::alpha_k(k)?;
            if ak <= a + 1e-12 {
                let beta = if k == 1 { 0.5 } else { beta };
                return Ok(Strategy::T1 { k: k as usize, beta });
            }
        }
        return Err(Error::Resource(format!("α = {alpha} needs more than {K_MAX} samples")));
    }
    let tt = t as u32;
    let eta = analytics::eta_t(tt, grid)?.unwrap_or(0.0);
    if a > eta {
        if let Some(s) = analytics::s2(a, tt, grid)? {
            return Ok(Strategy::OneShot { gamma: s.gamma, budget: s.budget });
        }
    }
    match analytics::s1(a, tt, grid)? {
        Some(s) => Ok(Strategy::Iterative { gamma: s.gamma, tau: s.tau, size_bound: s.value }),
        None => Err(Error::Resource(format!("no feasible construction parameters for t = {t}, α = {alpha}"))),
    }
}
