//! Uniform and class-size-weighted mutant sampling.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Weighted,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Strategy::Uniform),
            "weighted" => Ok(Strategy::Weighted),
            other => Err(Error::Config(format!(
                "unknown sampling strategy `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Uniform => "uniform",
            Strategy::Weighted => "weighted",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    rate: f64,
    pub strategy: Strategy,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(rate: f64, strategy: Strategy, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidRate(rate));
        }
        Ok(SampleSpec {
            rate,
            strategy,
            seed,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `round-half-up(rate * n)`. The epsilon absorbs binary representation
    /// error, e.g. `0.35 * 10 = 3.4999999999999996`.
    pub fn target_size(&self, n: usize) -> usize {
        let exact = self.rate * n as f64;
        ((exact + 0.5 + 1e-9).floor() as usize).min(n)
    }

    /// Parses `rate=0.5[,strategy=weighted][,seed=7]`.
    pub fn parse_inline(text: &str, default_seed: u64) -> Result<Self> {
        let mut rate = None;
        let mut strategy = Strategy::Uniform;
        let mut seed = default_seed;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in `{part}`")))?;
            match key.trim() {
                "rate" => {
                    rate = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("bad rate `{value}`")))?,
                    )
                }
                "strategy" => strategy = value.parse()?,
                "seed" => {
                    seed = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad seed `{value}`")))?
                }
                other => return Err(Error::Config(format!("unknown sample key `{other}`"))),
            }
        }
        let rate = rate.ok_or_else(|| Error::Config("sample spec needs rate=".into()))?;
        SampleSpec::new(rate, strategy, seed)
    }
}

/// Anything attributable to a source file.
pub trait Located {
    fn source_path(&self) -> &Path;
}

impl Located for crate::mutation::Mutant {
    fn source_path(&self) -> &Path {
        &self.source_path
    }
}

/// Indices of an equiprobable draw without replacement, in ascending order.
pub fn uniform_indices(n: usize, spec: &SampleSpec) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let k = spec.target_size(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Successive draws without replacement, each with probability
/// proportional to weight among the items not yet drawn.
pub fn weighted_indices(weights: &[f64], spec: &SampleSpec) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = spec.target_size(weights.len());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut remaining: Vec<usize> = (0..weights.len()).collect();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = remaining.iter().map(|&i| weights[i]).sum();
        let slot = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut slot = remaining.len() - 1;
            for (s, &i) in remaining.iter().enumerate() {
                if target < weights[i] {
                    slot = s;
                    break;
                }
                target -= weights[i];
            }
            slot
        } else {
            rng.gen_range(0..remaining.len())
        };
        picked.push(remaining.remove(slot));
    }
    picked.sort_unstable();
    Ok(picked)
}

pub fn sample_uniform<T: Clone>(items: &[T], spec: &SampleSpec) -> Result<Vec<T>> {
    Ok(uniform_indices(items.len(), spec)?
        .into_iter()
        .map(|i| items[i].clone())
        .collect())
}

/// Weighted sample; each item weighs the size of its source file.
pub fn sample_weighted<T: Clone + Located>(
    items: &[T],
    spec: &SampleSpec,
    class_sizes: &HashMap<PathBuf, usize>,
) -> Result<Vec<T>> {
    if items.is_empty() {
        return Err(Error::EmptyInput);
    }
    let weights = items
        .iter()
        .map(|m| {
            class_sizes
                .get(m.source_path())
                .map(|loc| *loc as f64)
                .ok_or_else(|| Error::MissingWeight(m.source_path().to_path_buf()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(weighted_indices(&weights, spec)?
        .into_iter()
        .map(|i| items[i].clone())
        .collect())
}

/// Dispatches on `spec.strategy`.
pub fn sample<T: Clone + Located>(
    items: &[T],
    spec: &SampleSpec,
    class_sizes: &HashMap<PathBuf, usize>,
) -> Result<Vec<T>> {
    match spec.strategy {
        Strategy::Uniform => sample_uniform(items, spec),
        Strategy::Weighted => sample_weighted(items, spec, class_sizes),
    }
}
