//! Randomized rounding of fractional allocations into committees.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::election::Committee;
use crate::error::{Error, Result};
use crate::seed;

/// Coordinates this close to 0 or 1 are treated as integral.
const SNAP: f64 = 1e-9;

/// Draws `k` candidates i.i.d. from the lottery `y` and keeps the distinct ones.
pub fn sample_iid<R: Rng>(y: &[f64], k: usize, rng: &mut R) -> Result<Committee> {
    if k < 1 {
        return Err(Error::input("sample size k must be at least 1"));
    }
    if y.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::input("lottery entries must be finite and non-negative"));
    }
    let total: f64 = y.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!("lottery sums to {total}, expected 1")));
    }
    let dist = WeightedIndex::new(y).map_err(|e| Error::input(format!("bad lottery: {e}")))?;
    Ok(Committee::new((0..k).map(|_| dist.sample(rng)).collect()))
}

/// One dependent-rounding draw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub selected: Vec<bool>,
    pub seed: u64,
}

impl RoundingOutcome {
    pub fn committee(&self) -> Committee {
        Committee::new(self.selected.iter().enumerate().filter(|(_, &s)| s).map(|(a, _)| a).collect())
    }
}

fn snap(v: f64) -> f64 {
    if v < SNAP {
        0.0
    } else if v > 1.0 - SNAP {
        1.0
    } else {
        v
    }
}

fn is_fractional(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Pipage rounding of `y ∈ [0, 1]^m`.
///
/// Pairs the two leftmost fractional coordinates and moves mass between
/// them until at most one stays fractional, which is then rounded up with
/// probability equal to its value. Marginals are preserved in expectation,
/// the total becomes `⌊Σy⌋` or `⌈Σy⌉`, and coordinates are negatively
/// correlated.
pub fn dependent_round(y: &[f64], seed: u64) -> Result<RoundingOutcome> {
    if y.iter().any(|&v| !(0.0..=1.0 + SNAP).contains(&v)) {
        return Err(Error::input("dependent rounding needs every coordinate in [0, 1]"));
    }
    let mut rng = seed::rng(seed);
    let mut z: Vec<f64> = y.iter().map(|&v| snap(v)).collect();
    let mut i = 0;
    loop {
        while i < z.len() && !is_fractional(z[i]) {
            i += 1;
        }
        let mut j = i + 1;
        while j < z.len() && !is_fractional(z[j]) {
            j += 1;
        }
        if j >= z.len() {
            break;
        }
        let (a, b) = (z[i], z[j]);
        let up = (1.0 - a).min(b);
        let down = a.min(1.0 - b);
        if rng.gen::<f64>() * (up + down) < down {
            z[i] = snap(a + up);
            z[j] = snap(b - up);
        } else {
            z[i] = snap(a - down);
            z[j] = snap(b + down);
        }
    }
    if i < z.len() && is_fractional(z[i]) {
        z[i] = if rng.gen::<f64>() < z[i] { 1.0 } else { 0.0 };
    }
    Ok(RoundingOutcome { selected: z.iter().map(|&v| v == 1.0).collect(), seed })
}
