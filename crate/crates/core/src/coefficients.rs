//! Diffusion weighting coefficients and their polynomial-filter counterparts.
//!
//! A generalized diffusion `S = sum_k theta_k T^k` equals the polynomial filter
//! `sum_j xi_j L^j` on `L = I - T` when
//!
//! ```text
//! xi_j    = sum_{k=j}^{K} C(k, j) (-1)^j theta_k
//! theta_k = sum_{j=k}^{J} C(j, k) (-1)^k xi_j        (J = K)
//! ```
//!
//! The binomials alternate in sign and grow combinatorially, so the float
//! conversion uses compensated summation and is limited to `K <= 60`; the
//! exact conversion works on arbitrary-precision rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::{Error, Result};

/// Largest order accepted by the float-mode conversion.
pub const MAX_FLOAT_ORDER: usize = 60;

/// Coefficient family of a diffusion.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Personalized PageRank with teleport probability `alpha`.
    Ppr { alpha: f64 },
    /// Heat kernel with diffusion time `t`.
    Heat { t: f64 },
    /// Explicit `theta_0..theta_K`.
    Explicit { theta: Vec<f64> },
}

/// How the infinite series is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Use the closed form where one exists.
    ClosedForm,
    /// Sum terms `0..=k`.
    SeriesK { k: usize },
}

/// Coefficients plus truncation policy.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSpec {
    pub family: Family,
    pub truncation: Truncation,
}

impl DiffusionSpec {
    pub fn ppr(alpha: f64) -> Result<Self> {
        Self::new(Family::Ppr { alpha })
    }

    pub fn heat(t: f64) -> Result<Self> {
        Self::new(Family::Heat { t })
    }

    pub fn explicit(theta: Vec<f64>) -> Result<Self> {
        Self::new(Family::Explicit { theta })
    }

    pub fn new(family: Family) -> Result<Self> {
        let spec = Self {
            family,
            truncation: Truncation::ClosedForm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_series(mut self, k: usize) -> Self {
        self.truncation = Truncation::SeriesK { k };
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            Family::Ppr { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => Err(Error::InvalidParameter(
                format!("PPR alpha must lie in (0, 1), got {alpha}"),
            )),
            Family::Heat { t } if !(t.is_finite() && *t > 0.0) => Err(Error::InvalidParameter(
                format!("heat kernel t must be positive, got {t}"),
            )),
            Family::Explicit { theta } => {
                if theta.is_empty() {
                    return Err(Error::InvalidParameter("theta list is empty".into()));
                }
                if let Some(bad) = theta.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::InvalidParameter(format!(
                        "theta entries must lie in [0, 1], got {bad}"
                    )));
                }
                let sum = neumaier_sum(theta.iter().copied());
                if sum > 1.0 + 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "theta entries sum to {sum} > 1"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `theta_k`. Explicit lists are not padded: indices past the end are an
    /// error.
    pub fn theta(&self, k: usize) -> Result<f64> {
        match &self.family {
            Family::Ppr { alpha } => Ok(ppr_theta(*alpha, k)),
            Family::Heat { t } => Ok(heat_theta(*t, k)),
            Family::Explicit { theta } => theta.get(k).copied().ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "theta index {k} out of range for explicit list of length {}",
                    theta.len()
                ))
            }),
        }
    }

    /// `theta_0..=theta_k`; explicit lists are truncated or zero-padded to
    /// length `k + 1`.
    pub fn thetas(&self, k: usize) -> Vec<f64> {
        match &self.family {
            Family::Ppr { alpha } => {
                let mut out = Vec::with_capacity(k + 1);
                let mut v = *alpha;
                for _ in 0..=k {
                    out.push(v);
                    v *= 1.0 - alpha;
                }
                out
            }
            Family::Heat { t } => (0..=k).map(|i| heat_theta(*t, i)).collect(),
            Family::Explicit { theta } => (0..=k).map(|i| theta.get(i).copied().unwrap_or(0.0)).collect(),
        }
    }

    /// Exact mass beyond index `k`, `sum_{i>k} theta_i`.
    pub fn tail_mass(&self, k: usize) -> f64 {
        match &self.family {
            Family::Ppr { alpha } => (1.0 - alpha).powf(k as f64 + 1.0),
            // P(X > k) for X ~ Poisson(t) equals the regularized lower
            // incomplete gamma P(k + 1, t).
            Family::Heat { t } => gamma_lr(k as f64 + 1.0, *t),
            Family::Explicit { theta } => neumaier_sum(theta.iter().skip(k + 1).copied()),
        }
    }

    /// Smallest `K` whose analytic tail bound is below `tail_tol`.
    ///
    /// PPR uses the geometric tail `(1 - alpha)^(K+1)`. The heat kernel uses
    /// the ratio bound `theta_{K+1} / (1 - t / (K + 2))`, valid once
    /// `K + 2 > t`. Explicit lists return the last index with nonzero mass
    /// beyond which the remaining sum drops below the tolerance.
    pub fn truncation_k(&self, tail_tol: f64) -> Result<usize> {
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance must be positive, got {tail_tol}"
            )));
        }
        match &self.family {
            Family::Ppr { alpha } => {
                let r = 1.0 - alpha;
                let guess = (tail_tol.ln() / r.ln()).ceil() - 1.0;
                let mut k = guess.max(0.0) as usize;
                // Correct for rounding in the logarithms.
                while k > 0 && r.powf(k as f64) < tail_tol {
                    k -= 1;
                }
                while r.powf(k as f64 + 1.0) >= tail_tol {
                    k += 1;
                }
                Ok(k)
            }
            Family::Heat { t } => {
                let mut k = 0usize;
                loop {
                    if (k as f64 + 2.0) > *t {
                        let bound = heat_theta(*t, k + 1) / (1.0 - t / (k as f64 + 2.0));
                        if bound < tail_tol {
                            return Ok(k);
                        }
                    }
                    k += 1;
                }
            }
            Family::Explicit { theta } => {
                let mut tail = 0.0;
                for k in (0..theta.len()).rev() {
                    tail += theta[k];
                    if tail >= tail_tol {
                        return Ok(k);
                    }
                }
                Ok(0)
            }
        }
    }

    /// The truncation order this spec asks for under series evaluation, or
    /// `None` for closed-form PPR/heat.
    pub fn series_order(&self) -> Option<usize> {
        match (&self.family, self.truncation) {
            (_, Truncation::SeriesK { k }) => Some(k),
            (Family::Explicit { theta }, Truncation::ClosedForm) => Some(theta.len() - 1),
            _ => None,
        }
    }

    /// True for the degenerate spec `theta = (1)`, which is the identity map.
    pub fn is_identity(&self) -> bool {
        matches!(&self.family, Family::Explicit { theta } if theta.first() == Some(&1.0) && theta[1..].iter().all(|&v| v == 0.0))
    }
}

impl fmt::Display for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Ppr { alpha } => write!(f, "ppr(alpha={alpha})")?,
            Family::Heat { t } => write!(f, "heat(t={t})")?,
            Family::Explicit { theta } => {
                let parts: Vec<String> = theta.iter().map(|v| v.to_string()).collect();
                write!(f, "explicit(theta=[{}])", parts.join(","))?
            }
        }
        if let Truncation::SeriesK { k } = self.truncation {
            write!(f, "/K={k}")?;
        }
        Ok(())
    }
}

fn ppr_theta(alpha: f64, k: usize) -> f64 {
    alpha * (1.0 - alpha).powf(k as f64)
}

/// `e^-t t^k / k!` in log space.
fn heat_theta(t: f64, k: usize) -> f64 {
    let kf = k as f64;
    (kf * t.ln() - t - ln_gamma(kf + 1.0)).exp()
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Coefficients `xi_0..xi_J` of the polynomial filter `sum_j xi_j L^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFilter {
    pub xi: Vec<f64>,
}

impl PolyFilter {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        if xi.is_empty() || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "filter coefficients must be a nonempty list of finite values".into(),
            ));
        }
        Ok(Self { xi })
    }

    /// Filter order `J`.
    pub fn order(&self) -> usize {
        self.xi.len() - 1
    }

    /// Evaluate `sum_j xi_j x^j` at a scalar.
    pub fn eval(&self, x: f64) -> f64 {
        self.xi.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Direction of a coefficient conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ThetaToXi,
    XiToTheta,
}

/// Arithmetic used for the conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticMode {
    Float,
    Exact,
}

fn binomial_rows_f64(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![1.0; i + 1];
        for j in 1..i {
            row[j] = rows[i - 1][j - 1] + rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Shared triangular transform: `out_a = (-1)^a sum_{b>=a} C(b, a) in_b`.
/// Both directions of the conversion have this form.
fn binomial_transform(input: &[f64]) -> Result<Vec<f64>> {
    let k = input.len().saturating_sub(1);
    if k > MAX_FLOAT_ORDER {
        return Err(Error::PrecisionLimit {
            k,
            max: MAX_FLOAT_ORDER,
        });
    }
    let c = binomial_rows_f64(k);
    Ok((0..input.len())
        .map(|a| sign(a) * neumaier_sum((a..input.len()).map(|b| c[b][a] * input[b])))
        .collect())
}

/// Diffusion coefficients to polynomial-filter coefficients (`J = K`).
pub fn theta_to_xi(theta: &[f64]) -> Result<PolyFilter> {
    if theta.is_empty() {
        return Err(Error::InvalidParameter("theta list is empty".into()));
    }
    PolyFilter::new(binomial_transform(theta)?)
}

/// Polynomial-filter coefficients to diffusion coefficients.
pub fn xi_to_theta(xi: &PolyFilter) -> Result<Vec<f64>> {
    binomial_transform(&xi.xi)
}

fn binomial_transform_exact(input: &[BigRational]) -> Vec<BigRational> {
    let n = input.len();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![BigInt::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    (0..n)
        .map(|a| {
            let s = (a..n).fold(BigRational::zero(), |acc, b| {
                acc + BigRational::from_integer(rows[b][a].clone()) * &input[b]
            });
            if a % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Exact rational version of [`theta_to_xi`].
pub fn theta_to_xi_exact(theta: &[BigRational]) -> Vec<BigRational> {
    binomial_transform_exact(theta)
}

/// Exact rational version of [`xi_to_theta`].
pub fn xi_to_theta_exact(xi: &[BigRational]) -> Vec<BigRational> {
    binomial_transform_exact(xi)
}

/// Exact rational value of a finite float.
pub fn to_rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v)
        .ok_or_else(|| Error::InvalidParameter(format!("cannot represent {v} exactly")))
}

/// Nearest float to a rational (correct to a few ulps).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        return v;
    }
    // Fall back to scaling when numerator or denominator overflow f64.
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
    let shift = shift.max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    if r.is_negative() && n > 0.0 {
        -n / d
    } else {
        n / d
    }
}

/// Convert a coefficient vector in either direction and arithmetic mode.
pub fn convert(values: &[f64], direction: Direction, mode: ArithmeticMode) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("coefficient list is empty".into()));
    }
    match mode {
        ArithmeticMode::Float => match direction {
            Direction::ThetaToXi => Ok(theta_to_xi(values)?.xi),
            Direction::XiToTheta => xi_to_theta(&PolyFilter::new(values.to_vec())?),
        },
        ArithmeticMode::Exact => {
            let q = values.iter().map(|&v| to_rational(v)).collect::<Result<Vec<_>>>()?;
            let out = match direction {
                Direction::ThetaToXi => theta_to_xi_exact(&q),
                Direction::XiToTheta => xi_to_theta_exact(&q),
            };
            Ok(out.iter().map(rational_to_f64).collect())
        }
    }
}

/// A closed-form filter coefficient with its convergence status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormXi {
    pub value: f64,
    /// Whether the filter series `sum_j xi_j L^j` converges on `L` with
    /// spectrum in `[0, 2]`.
    pub convergent: bool,
}

/// Closed-form `xi_j`: `(-t)^j / j!` for the heat kernel and
/// `(1 - 1/alpha)^j` for PPR. The PPR filter only converges for
/// `alpha > 0.5`; smaller values are returned but flagged.
pub fn closed_form_xi(spec: &DiffusionSpec, j: usize) -> Result<ClosedFormXi> {
    match &spec.family {
        Family::Heat { t } => {
            let jf = j as f64;
            let mag = (jf * t.ln() - ln_gamma(jf + 1.0)).exp();
            Ok(ClosedFormXi {
                value: sign(j) * mag,
                convergent: true,
            })
        }
        Family::Ppr { alpha } => {
            let base = 1.0 - 1.0 / alpha;
            Ok(ClosedFormXi {
                value: base.powf(j as f64),
                convergent: *alpha > 0.5,
            })
        }
        Family::Explicit { .. } => Err(Error::Unsupported(
            "closed-form filter coefficients exist only for PPR and heat kernel".into(),
        )),
    }
}

/// `xi_0..=xi_J` from the closed form.
pub fn closed_form_filter(spec: &DiffusionSpec, order: usize) -> Result<PolyFilter> {
    let xi = (0..=order)
        .map(|j| closed_form_xi(spec, j).map(|c| c.value))
        .collect::<Result<Vec<_>>>()?;
    PolyFilter::new(xi)
}
