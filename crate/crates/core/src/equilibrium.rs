//! Ordinal demand, producer best response, and an approximate solver for
//! Lindahl equilibria with ordinal preferences (plain and scaled/capped).
//!
//! An equilibrium consists of a consumption lottery `x[v]` over
//! `A ∪ {∅}` for every voter, an allocation `y` with `Σ y = B`, and
//! personalized prices `p[v][a] ∈ [0, 1]`. It is checked, never trusted:
//! [`certify`] measures how far a triple is from satisfying
//!
//! - `x[v]` is the demand lottery at prices `p[v]`,
//! - `s·x[v][a] ≤ y[a]`, with `p[v][a] = 0` wherever the inequality is strict,
//! - `y` maximizes revenue `Σ_a y[a]·Σ_v p[v][a]` among feasible allocations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::election::Election;
use crate::error::{Error, Result};
use crate::income::IncomeDistribution;
use crate::seed;

/// Voter `v`'s demand lottery at `prices` (indexed by candidate).
///
/// Entry `m` of the result is the outside option `∅`, which is least
/// preferred and free. With `q` the running minimum of prices along the
/// ranking, candidate `a_j` is bought with probability
/// `F(q_{j−1}) − F(q_j)` and `∅` with probability `F(q_last)`.
pub fn demand_lottery(ranking: &[usize], prices: &[f64], d: &IncomeDistribution) -> Vec<f64> {
    let m = ranking.len();
    let mut x = vec![0.0; m + 1];
    demand_into(ranking, prices, d, &mut x);
    x
}

fn demand_into(ranking: &[usize], prices: &[f64], d: &IncomeDistribution, x: &mut [f64]) {
    let m = ranking.len();
    let mut f_prev = 1.0;
    let mut total = 0.0;
    for &a in ranking {
        let f = d.cdf(prices[a]);
        if f < f_prev {
            x[a] = f_prev - f;
            f_prev = f;
        } else {
            x[a] = 0.0;
        }
        total += x[a];
    }
    x[m] = (1.0 - total).max(0.0);
    debug_assert!((x[m] - f_prev).abs() <= 1e-12);
}

/// Revenue-maximizing allocation of budget `b` against per-candidate
/// aggregate prices.
///
/// Uncapped: all mass on the highest aggregate price. Capped: greedy
/// fractional fill up to one unit per candidate. Ties go to the lowest index.
pub fn producer_best_response(agg: &[f64], b: f64, capped: bool) -> Result<Vec<f64>> {
    let m = agg.len();
    if m == 0 {
        return Err(Error::input("no candidates"));
    }
    if !(b > 0.0) {
        return Err(Error::input(format!("budget {b} must be positive")));
    }
    let mut y = vec![0.0; m];
    if !capped {
        let mut best = 0;
        for a in 1..m {
            if agg[a] > agg[best] {
                best = a;
            }
        }
        y[best] = b;
        return Ok(y);
    }
    if b > m as f64 {
        return Err(Error::input(format!("capped budget {b} exceeds m = {m}")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| agg[j].total_cmp(&agg[i]).then(i.cmp(&j)));
    let mut left = b;
    for a in order {
        if left <= 0.0 {
            break;
        }
        y[a] = left.min(1.0);
        left -= y[a];
    }
    Ok(y)
}

/// Voter's most preferred candidate priced at most `1 − ε`, or `None` for `∅`.
pub fn boundary_candidate(prices: &[f64], ranking: &[usize], epsilon: f64) -> Option<usize> {
    ranking.iter().copied().find(|&a| prices[a] <= 1.0 - epsilon)
}

/// Market parameters: budget `B`, scale `s`, and whether `y ≤ 1` is imposed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Market {
    pub budget: f64,
    pub scale: f64,
    pub capped: bool,
}

impl Market {
    /// Plain equilibrium: `s = 1`, no cap.
    pub fn plain(budget: f64) -> Self {
        Market { budget, scale: 1.0, capped: false }
    }

    /// Scaled equilibrium with per-candidate cap 1.
    pub fn scaled(budget: f64, scale: f64) -> Self {
        Market { budget, scale, capped: true }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(Error::input(format!("budget {} must be positive", self.budget)));
        }
        if !(self.scale >= 1.0 && self.scale.is_finite()) {
            return Err(Error::input(format!("scale {} must be at least 1", self.scale)));
        }
        if self.capped && self.budget > m as f64 {
            return Err(Error::input(format!(
                "capped budget {} exceeds the {m} available candidates",
                self.budget
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    /// `max |x − demand(p)|`.
    pub demand_residual: f64,
    /// `max_{v,a} max(s·x − y, 0) + p·max(y − s·x, 0)`.
    pub clearing_residual: f64,
    /// `(best revenue − revenue of y) / max(1, best revenue)`.
    pub producer_gap: f64,
    pub tol: f64,
    pub converged: bool,
    /// Voters whose outside-option probability exceeds `tol`.
    pub outside_option_voters: Vec<usize>,
    pub iterations: u64,
    pub restarts: u32,
}

impl EquilibriumCertificate {
    pub fn max_residual(&self) -> f64 {
        self.demand_residual.max(self.clearing_residual).max(self.producer_gap)
    }
}

/// A candidate equilibrium together with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub market: Market,
    /// `x[v]` has `m + 1` entries; the last is the outside option.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub certificate: EquilibriumCertificate,
}

impl Equilibrium {
    /// Turns a non-certified result into [`Error::NonConvergence`].
    pub fn require_converged(self) -> Result<Equilibrium> {
        if self.certificate.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                reason: format!(
                    "best residual {:.3e} above tolerance {:.1e}",
                    self.certificate.max_residual(),
                    self.certificate.tol
                ),
                certificate: Box::new(self.certificate),
            })
        }
    }

    /// `Σ_v p[v][a]` for every candidate.
    pub fn aggregate_prices(&self) -> Vec<f64> {
        aggregate(&self.p, self.y.len())
    }
}

fn aggregate(p: &[Vec<f64>], m: usize) -> Vec<f64> {
    let mut agg = vec![0.0; m];
    for row in p {
        for (s, v) in agg.iter_mut().zip(row) {
            *s += v;
        }
    }
    agg
}

/// Evaluates the certificate of `(x, y, p)`.
///
/// `x` is recomputed from `p` when `None`.
pub fn certify(
    e: &Election,
    d: &IncomeDistribution,
    market: Market,
    x: Option<&[Vec<f64>]>,
    y: &[f64],
    p: &[Vec<f64>],
    tol: f64,
) -> Result<(Vec<Vec<f64>>, EquilibriumCertificate)> {
    market.validate(e.m())?;
    let (n, m) = (e.n(), e.m());
    if y.len() != m || p.len() != n || p.iter().any(|r| r.len() != m) {
        return Err(Error::input("allocation or price matrix has the wrong shape"));
    }
    let mut demand_residual: f64 = 0.0;
    let mut clearing_residual: f64 = 0.0;
    let mut outside = Vec::new();
    let mut xs = Vec::with_capacity(n);
    for v in 0..n {
        let dem = demand_lottery(e.ranking(v), &p[v], d);
        let row = match x {
            Some(x) => {
                if x[v].len() != m + 1 {
                    return Err(Error::input("consumption row must have m + 1 entries"));
                }
                for (a, b) in x[v].iter().zip(&dem) {
                    demand_residual = demand_residual.max((a - b).abs());
                }
                x[v].clone()
            }
            None => dem,
        };
        for a in 0..m {
            let sx = market.scale * row[a];
            let r = (sx - y[a]).max(0.0) + p[v][a] * (y[a] - sx).max(0.0);
            clearing_residual = clearing_residual.max(r);
        }
        if row[m] > tol {
            outside.push(v);
        }
        xs.push(row);
    }
    let agg = aggregate(p, m);
    let br = producer_best_response(&agg, market.budget, market.capped)?;
    let best: f64 = agg.iter().zip(&br).map(|(a, b)| a * b).sum();
    let rev: f64 = agg.iter().zip(y).map(|(a, b)| a * b).sum();
    let producer_gap = ((best - rev) / best.max(1.0)).max(0.0);
    let sum_y: f64 = y.iter().sum();
    let feasible = (sum_y - market.budget).abs() <= 1e-9 * market.budget.max(1.0)
        && y.iter().all(|&v| v >= 0.0 && (!market.capped || v <= 1.0 + 1e-12));
    let cert = EquilibriumCertificate {
        demand_residual,
        clearing_residual,
        producer_gap,
        tol,
        converged: feasible && demand_residual <= tol && clearing_residual <= tol && producer_gap <= tol,
        outside_option_voters: outside,
        iterations: 0,
        restarts: 0,
    };
    Ok((xs, cert))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Allocation-space extragradient with prices read off the allocation.
    #[default]
    Allocation,
    /// Damped price adjustment with an inertial producer.
    Tatonnement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tol: f64,
    /// Iteration budget per start.
    pub max_iters: u64,
    /// Extra jittered starts after the first.
    pub restarts: u32,
    /// Price step of the tâtonnement method.
    pub eta: f64,
    /// Producer inertia of the tâtonnement method.
    pub lambda: f64,
    /// Step multiplier of the allocation method.
    pub kappa: f64,
    pub check_every: u64,
    pub seed: u64,
    pub method: SolverMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-3,
            max_iters: 50_000,
            restarts: 5,
            eta: 0.2,
            lambda: 0.3,
            kappa: 5.0,
            check_every: 25,
            seed: 0,
            method: SolverMethod::Allocation,
        }
    }
}

/// Searches for an approximate equilibrium of `e` under income `d`.
///
/// Always returns the best iterate found with an honest certificate;
/// `certificate.converged` is false when no start reached `opts.tol`.
pub fn solve(e: &Election, d: &IncomeDistribution, market: Market, opts: &SolverOptions) -> Result<Equilibrium> {
    market.validate(e.m())?;
    if !(opts.tol > 0.0) || opts.check_every == 0 {
        return Err(Error::input("solver tolerance and check interval must be positive"));
    }
    let mut best: Option<(bool, Equilibrium)> = None;
    let mut total_iters = 0;
    for restart in 0..=opts.restarts {
        let mut rng = seed::rng(seed::derive(opts.seed, "equilibrium", restart as u64));
        let (eq, iters, accepted) = match opts.method {
            SolverMethod::Allocation => AllocationSolver::new(e, d, market, opts).run(restart, &mut rng)?,
            SolverMethod::Tatonnement => {
                let (eq, iters) = tatonnement(e, d, market, opts, restart, &mut rng)?;
                let ok = eq.certificate.converged;
                (eq, iters, ok)
            }
        };
        total_iters += iters;
        let better = best.as_ref().map_or(true, |(ok, b)| {
            (accepted && !ok) || (accepted == *ok && eq.certificate.max_residual() < b.certificate.max_residual())
        });
        if better {
            best = Some((accepted, eq));
        }
        if best.as_ref().is_some_and(|(ok, _)| *ok) {
            break;
        }
    }
    let (_, mut eq) = best.expect("at least one start");
    eq.certificate.iterations = total_iters;
    Ok(eq)
}

fn initial_allocation<R: Rng>(m: usize, market: Market, restart: u32, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = if restart == 0 {
        vec![1.0; m]
    } else {
        (0..m).map(|_| (rng.gen::<f64>() * 2.0 - 1.0).exp()).collect()
    };
    project(&w, market)
}

/// KL projection of positive weights onto `{Σ y = B, 0 ≤ y (≤ 1 if capped)}`.
fn project(w: &[f64], market: Market) -> Vec<f64> {
    let b = market.budget;
    let total: f64 = w.iter().sum();
    let mut y: Vec<f64> = w.iter().map(|v| b * v / total).collect();
    if !market.capped || y.iter().all(|&v| v <= 1.0) {
        return y;
    }
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&i, &j| w[j].total_cmp(&w[i]));
    let mut rest = total;
    for (k, &a) in order.iter().enumerate() {
        // Cap the k largest; scale the rest to fill B − k.
        let c = (b - k as f64) / rest;
        if w[a] * c <= 1.0 {
            for &i in &order[..k] {
                y[i] = 1.0;
            }
            for &i in &order[k..] {
                y[i] = (w[i] * c).min(1.0);
            }
            return y;
        }
        rest -= w[a];
    }
    y.iter_mut().for_each(|v| *v = 1.0);
    y
}

/// Lower bound on allocation entries, keeping multiplicative updates alive.
const FLOOR: f64 = 1e-15;

struct AllocationSolver<'a> {
    e: &'a Election,
    d: &'a IncomeDistribution,
    market: Market,
    opts: &'a SolverOptions,
    agg: Vec<f64>,
}

impl<'a> AllocationSolver<'a> {
    fn new(e: &'a Election, d: &'a IncomeDistribution, market: Market, opts: &'a SolverOptions) -> Self {
        AllocationSolver { e, d, market, opts, agg: vec![0.0; e.m()] }
    }

    /// Smoothing widths, finishing well below the tolerance.
    fn schedule(&self) -> Vec<f64> {
        let floor = self.opts.tol / (4.0 * self.market.scale);
        let mut hs = Vec::new();
        let mut h = 0.05;
        while h > floor {
            hs.push(h);
            h *= 0.5;
        }
        hs.push(floor);
        hs
    }

    /// Each voter prices its ranking so that its demand tracks `y / s`:
    /// the price of the j-th candidate is the (smoothed) income quantile at
    /// `1 − Σ_{i ≤ j} y_{a_i} / s`.
    fn prices(&self, y: &[f64], h: f64) -> Vec<Vec<f64>> {
        let (n, m) = (self.e.n(), self.e.m());
        let s = self.market.scale;
        (0..n)
            .map(|v| {
                let mut row = vec![0.0; m];
                let mut c = 0.0;
                for &a in self.e.ranking(v) {
                    c += y[a] / s;
                    row[a] = self.d.smoothed_quantile(1.0 - c, h);
                }
                row
            })
            .collect()
    }

    fn aggregate_into(&mut self, y: &[f64], h: f64) {
        let s = self.market.scale;
        self.agg.iter_mut().for_each(|v| *v = 0.0);
        for v in 0..self.e.n() {
            let mut c = 0.0;
            for &a in self.e.ranking(v) {
                c += y[a] / s;
                self.agg[a] += self.d.smoothed_quantile(1.0 - c, h);
            }
        }
    }

    fn step(&self, y: &[f64], agg: &[f64], rate: f64) -> Vec<f64> {
        let top = agg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = y
            .iter()
            .zip(agg)
            .map(|(v, g)| (v * (rate * (g - top)).exp()).max(FLOOR * self.market.budget))
            .collect();
        project(&w, self.market)
    }

    fn evaluate(&self, y: &[f64], h: f64, iters: u64, restart: u32) -> Result<Equilibrium> {
        let p = self.prices(y, h);
        let (x, mut cert) = certify(self.e, self.d, self.market, None, y, &p, self.opts.tol)?;
        cert.iterations = iters;
        cert.restarts = restart;
        Ok(Equilibrium { market: self.market, x, y: y.to_vec(), p, certificate: cert })
    }

    /// Beyond the certificate: when `B ≥ s` every voter can be served in
    /// full and exact equilibria leave no outside-option mass; when `B ≤ s`
    /// they satisfy `s·x = y` exactly. Insist on both up to `tol`.
    fn accept(&self, eq: &Equilibrium) -> bool {
        let (b, s) = (self.market.budget, self.market.scale);
        let cert = &eq.certificate;
        if !cert.converged {
            return false;
        }
        if b >= s && !cert.outside_option_voters.is_empty() {
            return false;
        }
        if b <= s {
            let tight = eq
                .x
                .iter()
                .all(|row| row.iter().zip(&eq.y).all(|(x, y)| (s * x - y).abs() <= self.opts.tol));
            if !tight {
                return false;
            }
        }
        true
    }

    fn run<R: Rng>(mut self, restart: u32, rng: &mut R) -> Result<(Equilibrium, u64, bool)> {
        let n = self.e.n() as f64;
        // Later starts vary the step as well as the starting point.
        let kappa = self.opts.kappa * [1.0, 2.0, 0.7, 1.4, 0.5, 3.0][restart as usize % 6];
        let mut y = initial_allocation(self.e.m(), self.market, restart, rng);
        let hs = self.schedule();
        let per_level = (self.opts.max_iters / hs.len() as u64).max(self.opts.check_every);
        let mut best = self.evaluate(&y, hs[0], 0, restart)?;
        let mut best_ok = self.accept(&best);
        let mut iters = 0;
        'levels: for (li, &h) in hs.iter().enumerate() {
            let rate = kappa * h / n;
            let mut avg = vec![0.0; y.len()];
            let mut avg_count = 0.0;
            let mut long = vec![0.0; y.len()];
            let mut long_count = 0.0;
            let last = li + 1 == hs.len();
            let budget = if last { self.opts.max_iters.saturating_sub(iters) } else { per_level };
            let mut it = 0;
            while it < budget && iters < self.opts.max_iters {
                self.aggregate_into(&y, h);
                let half = self.step(&y, &self.agg, rate);
                self.aggregate_into(&half, h);
                y = self.step(&y, &self.agg, rate);
                it += 1;
                iters += 1;
                avg.iter_mut().zip(&y).for_each(|(a, v)| *a += v);
                avg_count += 1.0;
                if it % self.opts.check_every == 0 {
                    let mean = project(&avg.iter().map(|a| a / avg_count).collect::<Vec<_>>(), self.market);
                    long.iter_mut().zip(&mean).for_each(|(l, v)| *l += v);
                    long_count += 1.0;
                    let cesaro = project(&long.iter().map(|a| a / long_count).collect::<Vec<_>>(), self.market);
                    for cand in [&y, &mean, &cesaro] {
                        let eq = self.evaluate(cand, h, iters, restart)?;
                        let done = self.accept(&eq);
                        if done || (!best_ok && eq.certificate.max_residual() < best.certificate.max_residual()) {
                            best = eq;
                            best_ok = done;
                        }
                        if done {
                            break 'levels;
                        }
                    }
                    // Level is settled once the smoothed game is nearly solved.
                    let cur = self.evaluate(&y, h, iters, restart)?;
                    if !last && cur.certificate.producer_gap <= self.opts.tol / 4.0 {
                        break;
                    }
                    avg.iter_mut().for_each(|a| *a = 0.0);
                    avg_count = 0.0;
                }
            }
        }
        Ok((best, iters, best_ok))
    }
}

fn tatonnement<R: Rng>(
    e: &Election,
    d: &IncomeDistribution,
    market: Market,
    opts: &SolverOptions,
    restart: u32,
    rng: &mut R,
) -> Result<(Equilibrium, u64)> {
    let (n, m) = (e.n(), e.m());
    let mut p: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| if restart == 0 { 0.5 } else { rng.gen_range(0.25..0.75) })
                .collect()
        })
        .collect();
    let mut y = vec![market.budget / m as f64; m];
    let mut x = vec![0.0; m + 1];
    let mut best: Option<Equilibrium> = None;
    let mut iters = 0;
    while iters < opts.max_iters {
        let agg = aggregate(&p, m);
        let br = producer_best_response(&agg, market.budget, market.capped)?;
        for (ya, ba) in y.iter_mut().zip(&br) {
            *ya = (1.0 - opts.lambda) * *ya + opts.lambda * ba;
        }
        for v in 0..n {
            demand_into(e.ranking(v), &p[v], d, &mut x);
            for a in 0..m {
                p[v][a] = (p[v][a] + opts.eta * (market.scale * x[a] - y[a])).clamp(0.0, 1.0);
            }
        }
        iters += 1;
        if iters % opts.check_every == 0 || iters == opts.max_iters {
            let (xs, mut cert) = certify(e, d, market, None, &y, &p, opts.tol)?;
            cert.iterations = iters;
            cert.restarts = restart;
            let done = cert.converged;
            if best.as_ref().map_or(true, |b| cert.max_residual() < b.certificate.max_residual()) {
                best = Some(Equilibrium { market, x: xs, y: y.clone(), p: p.clone(), certificate: cert });
            }
            if done {
                break;
            }
        }
    }
    match best {
        Some(b) => Ok((b, iters)),
        None => {
            let (xs, cert) = certify(e, d, market, None, &y, &p, opts.tol)?;
            Ok((Equilibrium { market, x: xs, y, p, certificate: cert }, iters))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::tests::e3;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn demand_examples() {
        let d = IncomeDistribution::uniform_tail(0.1).unwrap();
        let x = demand_lottery(&[0, 1], &[0.95, 0.0], &d);
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-12);

        let d = IncomeDistribution::threshold(0.5, 0.01).unwrap();
        let x = demand_lottery(&[0, 1], &[0.9, 0.1], &d);
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], 0.5, epsilon = 1e-12);

        let x = demand_lottery(&[2, 0, 1], &[0.0; 3], &d);
        assert_eq!(x, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn best_response_examples() {
        assert_eq!(producer_best_response(&[3.0, 1.0, 2.0], 1.0, false).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(producer_best_response(&[3.0, 1.0, 2.0], 2.5, true).unwrap(), vec![1.0, 0.5, 1.0]);
        assert_eq!(producer_best_response(&[2.0, 2.0, 0.0], 1.0, false).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(producer_best_response(&[1.0, 1.0], 3.0, true).is_err());
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(boundary_candidate(&[0.95, 0.5], &[0, 1], 0.1), Some(1));
        assert_eq!(boundary_candidate(&[0.2, 0.0], &[0, 1], 0.1), Some(0));
        assert_eq!(boundary_candidate(&[1.0, 1.0], &[0, 1], 0.1), None);
    }

    #[test]
    fn single_candidate_market() {
        let e = Election::new(1, vec![vec![0], vec![0]]).unwrap();
        let d = IncomeDistribution::uniform_tail(0.1).unwrap();
        let eq = solve(&e, &d, Market::plain(1.0), &SolverOptions::default()).unwrap();
        assert!(eq.certificate.converged);
        assert_eq!(eq.y, vec![1.0]);
        for v in 0..2 {
            assert_abs_diff_eq!(eq.x[v][0], 1.0, epsilon = 1e-12);
            assert!(eq.p[v][0] <= 0.9);
        }
        assert_eq!(eq.certificate.clearing_residual, 0.0);
        assert_eq!(eq.certificate.producer_gap, 0.0);
    }

    #[test]
    fn cycle_reaches_symmetric_equilibrium() {
        let d = IncomeDistribution::threshold(0.5, 0.01).unwrap();
        let eq = solve(&e3(), &d, Market::plain(1.0), &SolverOptions::default()).unwrap();
        let c = &eq.certificate;
        assert!(c.converged, "{c:?}");
        assert!(c.clearing_residual <= 1e-3 && c.producer_gap <= 1e-3);
        for &ya in &eq.y {
            assert_abs_diff_eq!(ya, 1.0 / 3.0, epsilon = 0.02);
        }
    }

    #[test]
    fn capped_budget_above_m_is_rejected() {
        let d = IncomeDistribution::uniform_tail(0.01).unwrap();
        let r = solve(&e3(), &d, Market::scaled(4.0, 4.0), &SolverOptions::default());
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn tatonnement_reports_honestly() {
        let d = IncomeDistribution::threshold(0.5, 0.01).unwrap();
        let opts = SolverOptions { method: SolverMethod::Tatonnement, max_iters: 2_000, restarts: 0, ..Default::default() };
        let eq = solve(&e3(), &d, Market::plain(1.0), &opts).unwrap();
        let c = &eq.certificate;
        let tol = c.tol;
        assert_eq!(c.converged, c.clearing_residual <= tol && c.producer_gap <= tol && c.demand_residual <= tol);
        assert_abs_diff_eq!(eq.y.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_respects_caps() {
        let y = project(&[10.0, 1.0, 1.0, 1.0], Market::scaled(2.0, 2.0));
        assert_eq!(y[0], 1.0);
        assert_abs_diff_eq!(y.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        assert!(y.iter().all(|&v| v <= 1.0));
    }

    fn ranking_and_prices() -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|m| {
            (Just((0..m).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(0.0f64..=1.0, m))
        })
    }

    proptest! {
        #[test]
        fn demand_is_a_lottery((ranking, prices) in ranking_and_prices(), beta in 0.05f64..0.95) {
            let d = IncomeDistribution::threshold(beta, 0.01).unwrap();
            let x = demand_lottery(&ranking, &prices, &d);
            prop_assert!(x.iter().all(|&v| v >= 0.0));
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn raising_a_price_never_raises_its_demand(
            (ranking, prices) in ranking_and_prices(),
            idx in any::<prop::sample::Index>(),
            bump in 0.0f64..1.0,
        ) {
            let d = IncomeDistribution::uniform_tail(0.3).unwrap();
            let a = idx.index(prices.len());
            let before = demand_lottery(&ranking, &prices, &d)[a];
            let mut raised = prices.clone();
            raised[a] = (raised[a] + bump).min(1.0);
            let after = demand_lottery(&ranking, &raised, &d)[a];
            prop_assert!(after <= before + 1e-12);
        }

        #[test]
        fn best_response_is_lp_optimal(agg in prop::collection::vec(0.0f64..10.0, 1..10), frac in 0.05f64..1.0) {
            let m = agg.len();
            let b = (frac * m as f64).max(0.1);
            let y = producer_best_response(&agg, b, true).unwrap();
            let mut sorted = agg.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let whole = b.floor() as usize;
            let mut opt: f64 = sorted[..whole.min(m)].iter().sum();
            if whole < m {
                opt += (b - whole as f64) * sorted[whole];
            }
            let rev: f64 = agg.iter().zip(&y).map(|(a, b)| a * b).sum();
            prop_assert!((rev - opt).abs() <= 1e-9);
            let y = producer_best_response(&agg, b, false).unwrap();
            let rev: f64 = agg.iter().zip(&y).map(|(a, b)| a * b).sum();
            prop_assert!((rev - b * sorted[0]).abs() <= 1e-9);
        }
    }
}
