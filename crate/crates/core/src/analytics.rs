//! Closed-form and grid-optimized committee-size bounds.
//!
//! All searches are deterministic scans over the grids in [`GridSpec`], so
//! every table is reproducible from its grid description.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::Alpha;

/// Resolutions of the γ, τ and α grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    /// Largest budget tried by [`s2`].
    pub b_max: u64,
    /// Number of log-spaced α values in `[alpha_min, 1]` for [`delta_t`].
    pub alpha_points: usize,
    pub alpha_min: f64,
    /// Bisection width for [`eta_t`].
    pub eta_tol: f64,
    /// α above which [`delta_t`] uses the one-shot size.
    pub regime_split: f64,
    /// Relative allowance for the logarithmic term in [`s1_envelope`].
    pub envelope_slack: f64,
    /// Smallest τ in [`s1_envelope`].
    pub envelope_tau_min: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            gamma_max: 20.0,
            gamma_step: 1e-3,
            tau_max: 50.0,
            tau_step: 1e-2,
            b_max: 1_000_000,
            alpha_points: 2000,
            alpha_min: 1e-3,
            eta_tol: 1e-4,
            regime_split: 0.045,
            envelope_slack: 0.025,
            envelope_tau_min: 3.47,
        }
    }
}

impl GridSpec {
    fn gammas(&self) -> impl Iterator<Item = f64> + '_ {
        let count = ((self.gamma_max - 1.0) / self.gamma_step).round() as usize;
        (0..=count).map(move |i| 1.0 + i as f64 * self.gamma_step)
    }

    /// τ values `1 + step, …, tau_max`.
    fn taus(&self) -> Vec<f64> {
        let count = ((self.tau_max - 1.0) / self.tau_step).round() as usize;
        (1..=count).map(|i| 1.0 + i as f64 * self.tau_step).collect()
    }

    /// Log-spaced α grid on `[alpha_min, 1]`.
    pub fn alphas(&self) -> Vec<f64> {
        let lo = self.alpha_min.log10();
        let k = self.alpha_points.max(2);
        (0..k).map(|j| 10f64.powf(lo - lo * j as f64 / (k - 1) as f64)).collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.gamma_max >= 1.0
            && self.gamma_step > 0.0
            && self.tau_max > 1.0
            && self.tau_step > 0.0
            && self.alpha_min > 0.0
            && self.alpha_min < 1.0
            && self.eta_tol > 0.0
            && self.regime_split > 0.0
            && self.envelope_slack >= 0.0
            && self.envelope_tau_min > 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::input("grid resolutions out of range"))
        }
    }
}

/// `(β*, α(k))`: the best ratio `β + (1 − β)^k` achievable with `k` samples.
pub fn alpha_k(k: u32) -> Result<(f64, f64)> {
    match k {
        0 => Err(Error::input("k must be at least 1")),
        1 => Ok((0.0, 1.0)),
        _ => {
            let kf = k as f64;
            let beta = 1.0 - kf.powf(-1.0 / (kf - 1.0));
            Ok((beta, beta + (1.0 - beta).powi(k as i32)))
        }
    }
}

fn ln_omega(gamma: f64, t: u32) -> f64 {
    let gt = gamma * t as f64;
    let t1 = (t - 1) as f64;
    -(gt - t1) + t1 * (gt / t1).ln()
}

/// ω(γ, t): bound on the fraction of voters left without `t` good members
/// after rounding a γt-scaled equilibrium. Evaluated in log space.
pub fn omega(gamma: f64, t: u32) -> Result<f64> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::input(format!("γ = {gamma} must be at least 1")));
    }
    if t < 2 {
        return Err(Error::input(format!("t = {t} must be at least 2")));
    }
    Ok(ln_omega(gamma, t).exp())
}

fn check_alpha_t(alpha: f64, t: u32) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::input(format!("α = {alpha} must lie in (0, 1]")));
    }
    if t < 2 {
        return Err(Error::input(format!("t = {t} must be at least 2")));
    }
    Ok(())
}

/// One-shot size: smallest integer budget `B` with `α ≥ γt/B + ω(γ, t)`
/// for some grid `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct S2 {
    pub budget: u64,
    pub gamma: f64,
}

/// Whether `(γ, B)` satisfies the one-shot constraint at `α`.
pub fn s2_feasible(alpha: f64, t: u32, gamma: f64, budget: u64) -> bool {
    budget > 0 && alpha >= gamma * t as f64 / budget as f64 + ln_omega(gamma, t).exp()
}

/// Minimum of [`S2`] over the γ grid; `None` when no `B ≤ b_max` works.
pub fn s2(alpha: f64, t: u32, grid: &GridSpec) -> Result<Option<S2>> {
    check_alpha_t(alpha, t)?;
    grid.validate()?;
    let tf = t as f64;
    let mut best: Option<S2> = None;
    for gamma in grid.gammas() {
        let slack = alpha - ln_omega(gamma, t).exp();
        if slack <= 0.0 {
            continue;
        }
        let raw = gamma * tf / slack;
        if raw > grid.b_max as f64 {
            continue;
        }
        // Fix up floating rounding of the ceiling against the exact check.
        let mut b = (raw.ceil() as u64).max(1);
        while b > 1 && s2_feasible(alpha, t, gamma, b - 1) {
            b -= 1;
        }
        while !s2_feasible(alpha, t, gamma, b) {
            b += 1;
        }
        if b <= grid.b_max && best.map_or(true, |s| b < s.budget) {
            best = Some(S2 { budget: b, gamma });
        }
    }
    Ok(best)
}

/// Iterative size bound at its grid minimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct S1 {
    pub value: f64,
    pub gamma: f64,
    pub tau: f64,
}

/// The iterative construction's size bound at `(γ, τ)`, or `None` when
/// `τ·ω(γ, t) ≥ 1`.
pub fn s1_objective(alpha: f64, t: u32, gamma: f64, tau: f64) -> Option<f64> {
    let w = ln_omega(gamma, t).exp();
    let slack = 1.0 - w * tau;
    if !(slack > 0.0) || !(tau > 1.0) {
        return None;
    }
    let first = gamma * tau / (tau - 1.0) / slack * t as f64 / alpha;
    Some(first + (1.0 / (slack * alpha)).ln() / tau.ln())
}

/// Grid minimum of [`s1_objective`]; `None` when no grid point is feasible.
pub fn s1(alpha: f64, t: u32, grid: &GridSpec) -> Result<Option<S1>> {
    check_alpha_t(alpha, t)?;
    grid.validate()?;
    Ok(s1_below(alpha, t, grid, f64::INFINITY))
}

/// Grid minimum of the iterative bound, restricted to values below `cutoff`.
fn s1_below(alpha: f64, t: u32, grid: &GridSpec, cutoff: f64) -> Option<S1> {
    let taus: Vec<(f64, f64, f64)> = grid
        .taus()
        .into_iter()
        .map(|tau| (tau, tau / (tau - 1.0), tau.ln()))
        .collect();
    let r_min = taus.last().map_or(1.0, |&(_, r, _)| r);
    let k = t as f64 / alpha;
    let l = -alpha.ln();
    let mut best_val = cutoff;
    let mut best = None;
    for gamma in grid.gammas() {
        // Both remaining terms are non-negative, and the first only grows with γ.
        if k * gamma * r_min >= best_val {
            break;
        }
        let w = ln_omega(gamma, t).exp();
        for &(tau, r, ln_tau) in &taus {
            let slack = 1.0 - w * tau;
            if slack <= 0.0 {
                break;
            }
            let first = k * gamma * r;
            if first >= best_val {
                continue;
            }
            let val = first / slack + (l - slack.ln()) / ln_tau;
            if val < best_val {
                best_val = val;
                best = Some(S1 { value: val, gamma, tau });
            }
        }
    }
    best
}

/// `min γτ / ((τ − 1)(1 − ωτ))` over grid `γ` and grid `τ ≥ tau_from`.
///
/// Both other parts of the iterative bound are non-negative, so `t/α` times
/// this is a lower bound on [`s1`] for every α.
pub fn iterative_factor(t: u32, grid: &GridSpec, tau_from: f64) -> f64 {
    let taus: Vec<f64> = grid.taus().into_iter().filter(|&tau| tau >= tau_from - 1e-9).collect();
    let r_min = taus.last().map_or(f64::INFINITY, |&tau| tau / (tau - 1.0));
    let mut best = f64::INFINITY;
    for gamma in grid.gammas() {
        if gamma * r_min >= best {
            break;
        }
        let w = ln_omega(gamma, t).exp();
        for &tau in &taus {
            let slack = 1.0 - w * tau;
            if slack <= 0.0 {
                break;
            }
            best = best.min(gamma * tau / ((tau - 1.0) * slack));
        }
    }
    best
}

/// Closed envelope of the iterative bound for small α:
/// `(1 + envelope_slack) · (t/α) · iterative_factor(τ ≥ envelope_tau_min)`.
///
/// For `α ≤ regime_split` the logarithmic term of [`s1_objective`] stays
/// below `envelope_slack` times the main term, so this dominates [`s1`].
pub fn s1_envelope(alpha: f64, t: u32, grid: &GridSpec) -> Result<f64> {
    check_alpha_t(alpha, t)?;
    grid.validate()?;
    let factor = iterative_factor(t, grid, grid.envelope_tau_min);
    Ok((1.0 + grid.envelope_slack) * factor * t as f64 / alpha)
}

/// Inflation factor over `t/α` and where it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    /// `max(one_shot_max, iterative_envelope)`.
    pub value: f64,
    /// Largest `s2·α/t` over grid α above `regime_split`.
    pub one_shot_max: f64,
    pub one_shot_alpha: f64,
    /// `s1_envelope · α/t`, constant in α.
    pub iterative_envelope: f64,
    /// `max_α min(s1, s2)·α/t` evaluated directly on the α grid.
    pub max_min: f64,
    pub max_min_alpha: f64,
}

/// δ(t): committees of size `δ(t)·t/α` always suffice.
///
/// Above `regime_split` the one-shot size is used directly; below it the
/// iterative envelope bounds every α at once. The direct grid max-min of the
/// two sizes, never larger, is reported alongside.
pub fn delta_t(t: u32, grid: &GridSpec) -> Result<Delta> {
    check_alpha_t(1.0, t)?;
    grid.validate()?;
    let tf = t as f64;
    let iterative_envelope =
        (1.0 + grid.envelope_slack) * iterative_factor(t, grid, grid.envelope_tau_min);
    let mut one_shot = (f64::NEG_INFINITY, f64::NAN);
    let mut alphas = grid.alphas();
    alphas.sort_by(|a, b| b.total_cmp(a));
    let mut normalized_s2 = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let u = s2(alpha, t, grid)?.map_or(f64::INFINITY, |s| s.budget as f64 * alpha / tf);
        if alpha > grid.regime_split && u > one_shot.0 {
            one_shot = (u, alpha);
        }
        normalized_s2.push(u);
    }
    let (max_min, max_min_alpha) = direct_max_min(t, grid, &alphas, &normalized_s2);
    let value = one_shot.0.max(iterative_envelope);
    if !value.is_finite() {
        return Err(Error::input(format!("no finite bound for t = {t} on the α grid")));
    }
    Ok(Delta {
        value,
        one_shot_max: one_shot.0,
        one_shot_alpha: one_shot.1,
        iterative_envelope,
        max_min,
        max_min_alpha,
    })
}

/// `max_α min(s1, s2)·α/t` over descending `alphas`, with `s2·α/t` given.
fn direct_max_min(t: u32, grid: &GridSpec, alphas: &[f64], normalized_s2: &[f64]) -> (f64, f64) {
    let tf = t as f64;
    let floor = iterative_factor(t, grid, 1.0);
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for (&alpha, &u) in alphas.iter().zip(normalized_s2) {
        if u <= best.0 {
            continue;
        }
        if u <= floor {
            best = (u, alpha);
            continue;
        }
        let norm = alpha / tf;
        // Only an s1 below s2 changes the minimum.
        let g = s1_below(alpha, t, grid, u / norm).map_or(u, |s| s.value * norm);
        let val = g.min(u);
        if val > best.0 {
            best = (val, alpha);
        }
        // Below 1/e the normalized iterative bound grows with α, so smaller
        // α cannot beat the running maximum once it falls below it.
        if alpha < (-1.0f64).exp() && g < u && g <= best.0 {
            break;
        }
    }
    best
}

/// η_t: the α where the iterative envelope and the one-shot size cross,
/// found by bisection on `s1_envelope − s2`. `None` without a sign change.
pub fn eta_t(t: u32, grid: &GridSpec) -> Result<Option<f64>> {
    check_alpha_t(1.0, t)?;
    grid.validate()?;
    let factor = (1.0 + grid.envelope_slack) * iterative_factor(t, grid, grid.envelope_tau_min);
    let diff = |alpha: f64| -> Result<f64> {
        let b = s2(alpha, t, grid)?.map_or(f64::INFINITY, |s| s.budget as f64);
        Ok(factor * t as f64 / alpha - b)
    };
    let (mut lo, mut hi) = (grid.alpha_min, 1.0);
    if diff(lo)? > 0.0 || diff(hi)? < 0.0 {
        return Ok(None);
    }
    while hi - lo > grid.eta_tol {
        let mid = 0.5 * (lo + hi);
        if diff(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `⌈(t + 1)/α − 1⌉`: below this size some election defeats every committee.
pub fn lower_bound_size(t: u32, alpha: Alpha) -> Result<u64> {
    if t < 1 {
        return Err(Error::input("t must be at least 1"));
    }
    let r = Ratio::from_integer(t as i64 + 1) / alpha.ratio() - Ratio::from_integer(1);
    Ok(r.ceil().to_integer() as u64)
}

/// [`delta_t`] for `t = 2..=t_max`, one worker per `t`.
pub fn delta_rows(t_max: u32, grid: &GridSpec) -> Result<Vec<(u32, Delta)>> {
    (2..=t_max).into_par_iter().map(|t| Ok((t, delta_t(t, grid)?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    AlphaK,
    DeltaT,
    EtaT,
    Omega,
}

/// `(input, value)` rows of one bound, with the grids that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub kind: TableKind,
    pub rows: Vec<(f64, f64)>,
    pub grid_spec: GridSpec,
}

impl BoundTable {
    /// α(k) for `k = 1..=k_max`.
    pub fn alpha_k(k_max: u32) -> Result<BoundTable> {
        let rows = (1..=k_max).map(|k| Ok((k as f64, alpha_k(k)?.1))).collect::<Result<_>>()?;
        Ok(BoundTable { kind: TableKind::AlphaK, rows, grid_spec: GridSpec::default() })
    }

    /// δ(t) for `t = 2..=t_max`.
    pub fn delta(t_max: u32, grid: &GridSpec) -> Result<BoundTable> {
        let rows = delta_rows(t_max, grid)?.into_iter().map(|(t, d)| (t as f64, d.value)).collect();
        Ok(BoundTable { kind: TableKind::DeltaT, rows, grid_spec: grid.clone() })
    }

    /// η_t for `t = 2..=t_max` (NaN where no crossover exists).
    pub fn eta(t_max: u32, grid: &GridSpec) -> Result<BoundTable> {
        let rows = (2..=t_max)
            .into_par_iter()
            .map(|t| Ok((t as f64, eta_t(t, grid)?.unwrap_or(f64::NAN))))
            .collect::<Result<_>>()?;
        Ok(BoundTable { kind: TableKind::EtaT, rows, grid_spec: grid.clone() })
    }

    /// ω(γ, t) on `γ = 1, 1.5, …, gamma_max` for a fixed `t`.
    pub fn omega(t: u32, gamma_max: f64) -> Result<BoundTable> {
        let count = ((gamma_max - 1.0) / 0.5).floor() as usize;
        let rows = (0..=count)
            .map(|i| {
                let g = 1.0 + 0.5 * i as f64;
                Ok((g, omega(g, t)?))
            })
            .collect::<Result<_>>()?;
        Ok(BoundTable { kind: TableKind::Omega, rows, grid_spec: GridSpec::default() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn alpha_k_values() {
        assert_eq!(alpha_k(1).unwrap(), (0.0, 1.0));
        assert_abs_diff_eq!(alpha_k(2).unwrap().1, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_k(5).unwrap().1, 0.465008, epsilon = 1e-6);
        assert!(alpha_k(0).is_err());
        for k in 2..30 {
            assert!(alpha_k(k + 1).unwrap().1 < alpha_k(k).unwrap().1);
        }
    }

    #[test]
    fn alpha_k_is_a_minimum_over_beta() {
        for k in 2..9u32 {
            let (beta, a) = alpha_k(k).unwrap();
            let f = |b: f64| b + (1.0 - b).powi(k as i32);
            for i in 1..1000 {
                assert!(f(i as f64 / 1000.0) >= a - 1e-12);
            }
            assert_abs_diff_eq!(f(beta), a, epsilon = 1e-15);
        }
    }

    #[test]
    fn omega_closed_forms() {
        assert_abs_diff_eq!(omega(2.0, 2).unwrap(), 4.0 * (-3.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(omega(1.0, 2).unwrap(), 2.0 * (-1.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(omega(1.5, 2).unwrap(), 3.0 * (-2.0f64).exp(), epsilon = 1e-12);
        assert!(omega(0.5, 2).is_err());
        assert!(omega(2.0, 1).is_err());
    }

    #[test]
    fn omega_decreases_in_gamma() {
        for t in 2..9 {
            let mut prev = f64::INFINITY;
            for i in 0..2000 {
                let w = omega(1.0 + i as f64 * 0.01, t).unwrap();
                assert!(w < prev);
                prev = w;
            }
        }
    }

    #[test]
    fn s2_examples() {
        let g = GridSpec::default();
        let s = s2(1.0, 2, &g).unwrap().unwrap();
        assert_eq!(s.budget, 5);
        assert!(s2_feasible(1.0, 2, 2.0, 5));
        assert!(!s2_feasible(1.0, 2, 1.5, 4));
        let s = s2(0.5, 2, &g).unwrap().unwrap();
        assert!(s.budget <= 19 && s.budget >= 4);
        assert!(s2_feasible(0.5, 2, s.gamma, s.budget));
    }

    #[test]
    fn s1_guards_tau_omega() {
        assert!(s1_objective(0.5, 2, 2.0, 6.0).is_none());
        assert!(s1_objective(0.5, 2, 2.0, 4.0).is_some());
    }

    #[test]
    fn envelope_dominates_s1_for_small_alpha() {
        let g = GridSpec { gamma_step: 1e-2, tau_step: 5e-2, ..GridSpec::default() };
        for t in [2, 4, 8] {
            for alpha in [0.005, 0.02, 0.045] {
                let direct = s1(alpha, t, &g).unwrap().unwrap().value;
                let env = s1_envelope(alpha, t, &g).unwrap();
                assert!(direct <= env, "t={t} α={alpha}: {direct} > {env}");
                assert!(direct >= iterative_factor(t, &g, 1.0) * t as f64 / alpha);
            }
        }
    }

    #[test]
    fn iterative_path_wins_for_small_alpha() {
        let g = GridSpec::default();
        let (a, b) = (s1(0.02, 2, &g).unwrap().unwrap(), s2(0.02, 2, &g).unwrap().unwrap());
        assert!(a.value < b.budget as f64);
        let (a, b) = (s1(0.1, 2, &g).unwrap().unwrap(), s2(0.1, 2, &g).unwrap().unwrap());
        assert!(a.value >= b.budget as f64);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound_size(1, Alpha::new(1, 2).unwrap()).unwrap(), 3);
        assert_eq!(lower_bound_size(2, Alpha::new(1, 2).unwrap()).unwrap(), 5);
        assert_eq!(lower_bound_size(1, Alpha::new(1, 4).unwrap()).unwrap(), 7);
        assert_eq!(lower_bound_size(1, Alpha::new(2, 5).unwrap()).unwrap(), 4);
    }
}
