//! Distribution families on the unit interval: beta, truncated exponential,
//! truncated normal (location 0), and truncated Pareto, with sampling,
//! densities, CDFs, and maximum-likelihood fitting via Nelder-Mead over
//! log-transformed parameters.
//!
//! The truncated Pareto uses `pdf(x) proportional to (1 + x)^-(b + 1)` on
//! `[0, 1]` (location 1, shape `b`): the density stays finite at 0 and `b`
//! sweeps from near-uniform to extremely skewed.

use crate::error::{Error, Result};
use crate::stats::nelder_mead::nelder_mead;
use crate::stats::special::{erf, erfinv, integrate_unit, ln_beta};
use rand::Rng;
use rand_distr::{Beta as BetaSampler, Distribution};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Which of the four families a [`DistributionSpec`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Beta,
    TruncExponential,
    TruncNormal,
    TruncPareto,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Beta,
        Family::TruncExponential,
        Family::TruncNormal,
        Family::TruncPareto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Beta => "beta",
            Family::TruncExponential => "trunc_exponential",
            Family::TruncNormal => "trunc_normal",
            Family::TruncPareto => "trunc_pareto",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "beta" => Ok(Family::Beta),
            "trunc_exponential" => Ok(Family::TruncExponential),
            "trunc_normal" => Ok(Family::TruncNormal),
            "trunc_pareto" => Ok(Family::TruncPareto),
            other => Err(format!("unknown distribution family '{other}'")),
        }
    }
}

/// A fully parameterised distribution with support fixed to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    /// Beta with shape parameters `alpha, beta > 0`.
    Beta { alpha: f64, beta: f64 },
    /// `lambda e^(-lambda x) / (1 - e^(-lambda))`.
    TruncExponential { lambda: f64 },
    /// Normal with location 0 and scale `sigma`, truncated to `[0, 1]`.
    TruncNormal { sigma: f64 },
    /// `b (1 + x)^-(b + 1) / (1 - 2^-b)`.
    TruncPareto { b: f64 },
}

impl DistributionSpec {
    pub fn family(&self) -> Family {
        match self {
            DistributionSpec::Beta { .. } => Family::Beta,
            DistributionSpec::TruncExponential { .. } => Family::TruncExponential,
            DistributionSpec::TruncNormal { .. } => Family::TruncNormal,
            DistributionSpec::TruncPareto { .. } => Family::TruncPareto,
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match *self {
            DistributionSpec::Beta { alpha, beta } => vec![alpha, beta],
            DistributionSpec::TruncExponential { lambda } => vec![lambda],
            DistributionSpec::TruncNormal { sigma } => vec![sigma],
            DistributionSpec::TruncPareto { b } => vec![b],
        }
    }

    fn from_parameters(family: Family, params: &[f64]) -> Self {
        match family {
            Family::Beta => DistributionSpec::Beta {
                alpha: params[0],
                beta: params[1],
            },
            Family::TruncExponential => DistributionSpec::TruncExponential { lambda: params[0] },
            Family::TruncNormal => DistributionSpec::TruncNormal { sigma: params[0] },
            Family::TruncPareto => DistributionSpec::TruncPareto { b: params[0] },
        }
    }

    /// Density at `x` in `[0, 1]`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Log-density at `x` in `(0, 1)`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Beta { alpha, beta } => {
                (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - ln_beta(alpha, beta)
            }
            DistributionSpec::TruncExponential { lambda } => {
                lambda.ln() - lambda * x - (-(-lambda).exp_m1()).ln()
            }
            DistributionSpec::TruncNormal { sigma } => {
                let mass = erf(1.0 / (sigma * SQRT_2));
                -(x * x) / (2.0 * sigma * sigma) - (sigma * SQRT_2PI * 0.5 * mass).ln()
            }
            DistributionSpec::TruncPareto { b } => {
                let mass = -(-b * std::f64::consts::LN_2).exp_m1();
                b.ln() - (b + 1.0) * (1.0 + x).ln() - mass.ln()
            }
        }
    }

    /// CDF at `x` in `[0, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            DistributionSpec::Beta { alpha, beta } => {
                crate::stats::special::beta_inc(alpha, beta, x)
            }
            DistributionSpec::TruncExponential { lambda } => {
                (-(-lambda * x).exp_m1()) / (-(-lambda).exp_m1())
            }
            DistributionSpec::TruncNormal { sigma } => {
                erf(x / (sigma * SQRT_2)) / erf(1.0 / (sigma * SQRT_2))
            }
            DistributionSpec::TruncPareto { b } => {
                (-(-b * (1.0 + x).ln()).exp_m1()) / (-(-b * std::f64::consts::LN_2).exp_m1())
            }
        }
    }

    /// Draws one sample; inverse-CDF for the truncated families, the
    /// standard gamma-ratio sampler for beta.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Beta { alpha, beta } => {
                BetaSampler::new(alpha, beta).unwrap().sample(rng)
            }
            DistributionSpec::TruncExponential { lambda } => {
                let u: f64 = rng.gen();
                -(u * (-lambda).exp_m1()).ln_1p() / lambda
            }
            DistributionSpec::TruncNormal { sigma } => {
                let u: f64 = rng.gen();
                let cap = erf(1.0 / (sigma * SQRT_2));
                sigma * SQRT_2 * erfinv(u * cap)
            }
            DistributionSpec::TruncPareto { b } => {
                let u: f64 = rng.gen();
                let mass = -(-b * std::f64::consts::LN_2).exp_m1();
                (1.0 - u * mass).powf(-1.0 / b) - 1.0
            }
        }
    }

    /// Validates that all parameters are positive.
    pub fn validate(&self) -> bool {
        self.parameters().iter().all(|&p| p > 0.0 && p.is_finite())
    }

    /// Numerically integrates the pdf over `[0, 1]`; should be 1.
    pub fn pdf_mass(&self) -> f64 {
        integrate_unit(|x| self.pdf(x.clamp(1e-12, 1.0 - 1e-12)))
    }
}

/// Result of fitting one family to a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: DistributionSpec,
    /// Negative log-likelihood at the fitted parameters.
    pub nll: f64,
}

const MIN_SAMPLES: usize = 10;
const BOUNDARY_NUDGE: f64 = 1e-9;

fn prepare_samples(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    Ok(samples
        .iter()
        .map(|&x| x.clamp(BOUNDARY_NUDGE, 1.0 - BOUNDARY_NUDGE))
        .collect())
}

pub(crate) fn negative_log_likelihood(spec: &DistributionSpec, samples: &[f64]) -> f64 {
    -samples.iter().map(|&x| spec.ln_pdf(x)).sum::<f64>()
}

fn initial_parameters(family: Family, samples: &[f64]) -> Vec<f64> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    match family {
        Family::Beta => {
            // Method of moments, clipped away from zero.
            let scale = (mean * (1.0 - mean) / var.max(1e-6) - 1.0).max(0.2);
            vec![(mean * scale).max(0.1), ((1.0 - mean) * scale).max(0.1)]
        }
        Family::TruncExponential => vec![1.0],
        Family::TruncNormal => vec![var.sqrt().clamp(0.05, 10.0)],
        Family::TruncPareto => vec![1.0],
    }
}

/// Fits one family to samples in `(0, 1)` by minimising the negative
/// log-likelihood over log-transformed parameters.
pub fn fit_distribution(samples: &[f64], family: Family) -> Result<FitResult> {
    let samples = prepare_samples(samples)?;
    let init = initial_parameters(family, &samples);
    let log_init: Vec<f64> = init.iter().map(|p| p.ln()).collect();
    let objective = |log_params: &[f64]| {
        let params: Vec<f64> = log_params.iter().map(|p| p.exp()).collect();
        negative_log_likelihood(&DistributionSpec::from_parameters(family, &params), &samples)
    };
    let (best_log, nll) = nelder_mead(objective, &log_init, 500, 1e-10)?;
    if !nll.is_finite() {
        return Err(Error::OptimiserDiverged);
    }
    let params: Vec<f64> = best_log.iter().map(|p| p.exp()).collect();
    Ok(FitResult {
        spec: DistributionSpec::from_parameters(family, &params),
        nll,
    })
}

/// Fits all four families and returns them sorted by ascending NLL; the
/// first entry is the winner.
pub fn fit_best_distribution(samples: &[f64]) -> Result<Vec<FitResult>> {
    let mut fits: Vec<FitResult> = Family::ALL
        .iter()
        .filter_map(|&family| fit_distribution(samples, family).ok())
        .collect();
    if fits.is_empty() {
        return Err(Error::OptimiserDiverged);
    }
    fits.sort_by(|a, b| a.nll.partial_cmp(&b.nll).unwrap());
    Ok(fits)
}
