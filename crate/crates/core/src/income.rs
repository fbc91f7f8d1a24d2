//! Piecewise-linear income distributions on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape parameters of an [`IncomeDistribution`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncomeKind {
    /// Mass `1 − β` close to 0 and mass `β` on `[1 − ε, 1]`.
    Threshold { beta: f64, epsilon: f64 },
    /// Uniform on `[1 − ε, 1]`.
    UniformTail { epsilon: f64 },
}

/// A continuous income distribution given by its CDF knots.
///
/// The CDF is linear between consecutive knots `(x_i, F(x_i))`, starting at
/// `x = 0` and ending at `(1, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncomeDistribution {
    kind: IncomeKind,
    knots: Vec<(f64, f64)>,
    /// `∫₀^{F(x_i)} F⁻¹` at every knot, for the quantile integral.
    #[serde(skip)]
    qint: Vec<f64>,
}

impl IncomeDistribution {
    /// Threshold distribution: `Pr[X ≥ 1 − ε] = β` and `E[X] ≤ β`.
    ///
    /// The low block rises to `1 − β` on `[0, ε₀]` with
    /// `ε₀ = min(ε, βε/(1 − β))`; the high block is uniform on `[1 − ε, 1]`.
    pub fn threshold(beta: f64, epsilon: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::input(format!("β = {beta} must lie in (0, 1)")));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::input(format!("ε = {epsilon} must lie in (0, 1/2)")));
        }
        let eps0 = epsilon.min(beta * epsilon / (1.0 - beta));
        let knots = vec![(0.0, 0.0), (eps0, 1.0 - beta), (1.0 - epsilon, 1.0 - beta), (1.0, 1.0)];
        Ok(Self::from_knots(IncomeKind::Threshold { beta, epsilon }, knots))
    }

    /// Uniform distribution on `[1 − ε, 1]`.
    pub fn uniform_tail(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::input(format!("ε = {epsilon} must lie in (0, 1]")));
        }
        let mut knots = vec![(0.0, 0.0)];
        if epsilon < 1.0 {
            knots.push((1.0 - epsilon, 0.0));
        }
        knots.push((1.0, 1.0));
        Ok(Self::from_knots(IncomeKind::UniformTail { epsilon }, knots))
    }

    fn from_knots(kind: IncomeKind, knots: Vec<(f64, f64)>) -> Self {
        let mut qint = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        qint.push(0.0);
        for w in knots.windows(2) {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            acc += (f1 - f0) * (x0 + x1) / 2.0;
            qint.push(acc);
        }
        IncomeDistribution { kind, knots, qint }
    }

    pub fn kind(&self) -> IncomeKind {
        self.kind
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// The `ε` of either shape: incomes above `1 − ε` are "rich".
    pub fn epsilon(&self) -> f64 {
        match self.kind {
            IncomeKind::Threshold { epsilon, .. } | IncomeKind::UniformTail { epsilon } => epsilon,
        }
    }

    /// `F(x)`, with `x` clamped to `[0, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|&(kx, _)| kx <= x);
        if i == 0 {
            return self.knots[0].1;
        }
        if i == self.knots.len() {
            return 1.0;
        }
        let (x0, f0) = self.knots[i - 1];
        let (x1, f1) = self.knots[i];
        if x == x0 {
            return f0;
        }
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// `E[X] = ∫₀¹ (1 − F)`, integrated exactly over the knots.
    pub fn expectation(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| {
                let ((x0, f0), (x1, f1)) = (w[0], w[1]);
                (x1 - x0) * (1.0 - (f0 + f1) / 2.0)
            })
            .sum()
    }

    /// Lower quantile `inf{x : F(x) ≥ z}`; 0 for `z ≤ 0` and 1 for `z ≥ 1`.
    pub fn quantile(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return 1.0;
        }
        let i = self.knots.partition_point(|&(_, f)| f < z);
        let (x0, f0) = self.knots[i - 1];
        let (x1, f1) = self.knots[i];
        x0 + (x1 - x0) * (z - f0) / (f1 - f0)
    }

    /// `G(z) = ∫₀^z Q`, where `Q` is the quantile function extended by 0
    /// below 0 and by 1 above 1.
    pub fn quantile_integral(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return self.qint[self.qint.len() - 1] + (z - 1.0);
        }
        let i = self.knots.partition_point(|&(_, f)| f < z);
        let (x0, f0) = self.knots[i - 1];
        let (x1, f1) = self.knots[i];
        let q = x0 + (x1 - x0) * (z - f0) / (f1 - f0);
        self.qint[i - 1] + (z - f0) * (x0 + q) / 2.0
    }

    /// Quantile averaged over `[z − h, z + h]`, clamped to `[0, 1]`.
    ///
    /// Continuous in `z` for `h > 0`; jumps of the quantile become ramps.
    pub fn smoothed_quantile(&self, z: f64, h: f64) -> f64 {
        if h <= 0.0 {
            return self.quantile(z);
        }
        let g = (self.quantile_integral(z + h) - self.quantile_integral(z - h)) / (2.0 * h);
        g.clamp(0.0, 1.0)
    }
}
