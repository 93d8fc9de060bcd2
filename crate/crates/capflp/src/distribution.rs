//! Position distributions for experiment inputs.
//!
//! Three families are supported: uniform on `[0,1]`, the triangular
//! distribution with density `2(1-x)`, and Beta(alpha, beta), plus a
//! mixture that splits the population between the three in fixed
//! proportions.
//!
//! Sampling is fully deterministic given a seed. The stream mapping is:
//! a ChaCha8 generator seeded with `seed_from_u64(seed)`, one uniform draw
//! per uniform/triangular sample (triangular through the closed-form
//! inverse CDF `x = 1 - sqrt(1 - u)`), and two Gamma draws per Beta sample
//! (`B = G_a / (G_a + G_b)` with `G_a ~ Gamma(alpha, 1)`,
//! `G_b ~ Gamma(beta, 1)`). Mixture populations are drawn uniform block
//! first, then Beta, then triangular. The mapping is stable for the
//! dependency versions pinned in Cargo.toml.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{make_instance, Instance};

const MIXTURE_WEIGHT_TOL: f64 = 1e-12;

/// A position distribution for sampled populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    Uniform,
    Triangular,
    Beta { alpha: f64, beta: f64 },
    /// Population split between uniform, Beta and triangular agents in the
    /// given proportions `(lambda_U, lambda_B, lambda_T)`.
    Mixture {
        weights: [f64; 3],
        alpha: f64,
        beta: f64,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Uniform | DistributionSpec::Triangular => Ok(()),
            DistributionSpec::Beta { alpha, beta } => validate_beta_params(*alpha, *beta),
            DistributionSpec::Mixture {
                weights,
                alpha,
                beta,
            } => {
                validate_beta_params(*alpha, *beta)?;
                if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
                    return Err(Error::InvalidParams(
                        "mixture weights must be finite and non-negative".into(),
                    ));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > MIXTURE_WEIGHT_TOL {
                    return Err(Error::InvalidParams(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn validate_beta_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite()) || alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "Beta parameters must be strictly positive, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// Inverse CDF of the triangular distribution with density `2(1-x)`.
///
/// `F(x) = 2x - x^2`, hence `F^{-1}(u) = 1 - sqrt(1 - u)`.
pub(crate) fn triangular_inverse_cdf(u: f64) -> f64 {
    1.0 - (1.0 - u).sqrt()
}

fn sample_beta<R: Rng>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let ga = Gamma::new(alpha, 1.0).expect("validated alpha");
    let gb = Gamma::new(beta, 1.0).expect("validated beta");
    let a: f64 = ga.sample(rng);
    let b: f64 = gb.sample(rng);
    let x = a / (a + b);
    // Gamma draws can underflow to zero for tiny shapes; keep the result
    // inside the closed unit interval.
    if x.is_finite() {
        x.clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// Draw `n` positions from `spec`, deterministically in `seed`, and
/// canonicalize them through [`make_instance`].
pub fn sample_positions(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Instance> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(n);
    match spec {
        DistributionSpec::Uniform => {
            for _ in 0..n {
                raw.push(rng.gen::<f64>());
            }
        }
        DistributionSpec::Triangular => {
            for _ in 0..n {
                raw.push(triangular_inverse_cdf(rng.gen::<f64>()));
            }
        }
        DistributionSpec::Beta { alpha, beta } => {
            for _ in 0..n {
                raw.push(sample_beta(&mut rng, *alpha, *beta));
            }
        }
        DistributionSpec::Mixture {
            weights,
            alpha,
            beta,
        } => {
            let n_uniform = (weights[0] * n as f64).floor() as usize;
            let n_beta = (weights[1] * n as f64).floor() as usize;
            let n_uniform = n_uniform.min(n);
            let n_beta = n_beta.min(n - n_uniform);
            let n_triangular = n - n_uniform - n_beta;
            for _ in 0..n_uniform {
                raw.push(rng.gen::<f64>());
            }
            for _ in 0..n_beta {
                raw.push(sample_beta(&mut rng, *alpha, *beta));
            }
            for _ in 0..n_triangular {
                raw.push(triangular_inverse_cdf(rng.gen::<f64>()));
            }
        }
    }
    make_instance(&raw)
}
