use crate::error::{Error, Result};

/// Digamma function ψ(x) for x > 0.
///
/// Shifts the argument above 10 with ψ(x) = ψ(x + 1) − 1/x, then evaluates
/// the asymptotic series in 1/x². Absolute error is below 1e-14 for x ≥ 1.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("digamma needs x > 0, got {x}")));
    }
    Ok(digamma_unchecked(x))
}

/// ψ(x) without argument validation; callers guarantee x > 0.
#[inline]
pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number coefficients B_{2j} / (2j)
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    acc + x.ln() - 0.5 * inv - series
}

/// Memoised ψ at the integers 1..=n, the only arguments the estimators need.
#[derive(Debug, Clone)]
pub(crate) struct DigammaTable {
    values: Vec<f64>,
}

impl DigammaTable {
    pub fn new(max: usize) -> Self {
        let mut values = Vec::with_capacity(max + 1);
        values.push(f64::NAN);
        for m in 1..=max {
            values.push(digamma_unchecked(m as f64));
        }
        Self { values }
    }

    #[inline]
    pub fn get(&self, m: usize) -> f64 {
        self.values[m]
    }
}
