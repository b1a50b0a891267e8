//! Bitwise mutation with rate chi/n and Poisson-count exchange mutation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SpecString;
use crate::error::{config_err, Error, Result};
use crate::genotype::{BitString, Genotype, Permutation, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MutationSpec {
    /// Flip each bit independently with probability `chi / n`.
    Bitwise { chi: f64 },
    /// Apply `N ~ Poisson(1)` transpositions of uniformly chosen index pairs.
    Exchange,
}

impl MutationSpec {
    pub fn representation(&self) -> Representation {
        match self {
            MutationSpec::Bitwise { .. } => Representation::Bits,
            MutationSpec::Exchange => Representation::Perm,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let MutationSpec::Bitwise { chi } = *self {
            if !(chi > 0.0 && chi.is_finite()) {
                return Err(config_err(format!("mutation chi must be > 0, got {chi}")));
            }
            if n > 0 && chi / n as f64 > 1.0 {
                return Err(config_err(format!(
                    "mutation rate chi/n = {chi}/{n} exceeds 1"
                )));
            }
        }
        Ok(())
    }

    /// Probability that mutation returns its input unchanged at length `n`.
    pub fn no_change_probability(&self, n: usize) -> f64 {
        match *self {
            MutationSpec::Bitwise { chi } => (1.0 - chi / n as f64).powi(n as i32),
            MutationSpec::Exchange => (-1.0f64).exp(),
        }
    }

    /// Mutates `x` in place.
    #[inline]
    pub fn apply<R: Rng + ?Sized>(&self, x: &mut Genotype, rng: &mut R) -> Result<()> {
        match (self, x) {
            (MutationSpec::Bitwise { chi }, Genotype::Bits(b)) => {
                let p = chi / b.len() as f64;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(config_err(format!("mutation rate {p} outside (0,1]")));
                }
                flip_each(b, p, rng);
                Ok(())
            }
            (MutationSpec::Exchange, Genotype::Perm(p)) => {
                let count = sample_poisson_unit(rng);
                apply_exchanges(p, count, rng);
                Ok(())
            }
            (spec, x) => Err(Error::Representation(format!(
                "{spec} cannot mutate a {} genotype",
                x.representation()
            ))),
        }
    }
}

impl fmt::Display for MutationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationSpec::Bitwise { chi } => write!(f, "bitwise:chi={chi}"),
            MutationSpec::Exchange => f.write_str("exchange"),
        }
    }
}

impl FromStr for MutationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = SpecString::parse(s)?;
        let m = match spec.name.as_str() {
            "bitwise" => {
                spec.allow_only(&["chi"])?;
                MutationSpec::Bitwise {
                    chi: spec.required_f64("chi")?,
                }
            }
            "exchange" => {
                // the Poisson mean is fixed at 1; accept it only if stated as 1
                spec.allow_only(&["mean"])?;
                if let Some(mean) = spec.optional_f64("mean")? {
                    if mean != 1.0 {
                        return Err(config_err(format!(
                            "exchange mutation has Poisson mean fixed at 1, got {mean}"
                        )));
                    }
                }
                MutationSpec::Exchange
            }
            other => {
                return Err(config_err(format!(
                    "unknown mutation {other:?}; expected bitwise:chi=<number> or exchange"
                )))
            }
        };
        m.validate(0)?;
        Ok(m)
    }
}

/// Flips every bit independently with probability `p`, jumping between flips
/// with geometric skips.
#[inline]
pub fn flip_each<R: Rng + ?Sized>(x: &mut BitString, p: f64, rng: &mut R) {
    let n = x.len();
    if p >= 1.0 {
        *x = x.complement();
        return;
    }
    if p <= 0.0 {
        return;
    }
    let log_q = (-p).ln_1p();
    let mut i = 0usize;
    loop {
        let u: f64 = rng.gen();
        // P(skip >= s) = (1-p)^s
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (n - i) as f64 {
            break;
        }
        i += skip as usize;
        x.flip(i);
        i += 1;
        if i >= n {
            break;
        }
    }
}

/// Bitwise mutation with per-bit rate `chi / n`.
pub fn mutate_bitwise<R: Rng + ?Sized>(x: &BitString, chi: f64, rng: &mut R) -> Result<BitString> {
    let spec = MutationSpec::Bitwise { chi };
    spec.validate(x.len())?;
    let mut y = x.clone();
    flip_each(&mut y, chi / x.len() as f64, rng);
    Ok(y)
}

/// Draws from Poisson(1) by inverse transform with a running product.
pub fn sample_poisson_unit<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut k = 0u32;
    let mut term = (-1.0f64).exp();
    let mut cdf = term;
    while u >= cdf && k < 64 {
        k += 1;
        term /= k as f64;
        cdf += term;
    }
    k
}

/// Applies `count` transpositions of uniformly chosen unordered pairs of
/// distinct indices. A permutation with fewer than two elements is left as is.
pub fn apply_exchanges<R: Rng + ?Sized>(p: &mut Permutation, count: u32, rng: &mut R) {
    let n = p.len();
    if n < 2 {
        return;
    }
    for _ in 0..count {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        p.swap(i, j);
    }
}

/// Exchange mutation: `N ~ Poisson(1)` uniform transpositions.
pub fn mutate_exchange<R: Rng + ?Sized>(p: &Permutation, rng: &mut R) -> Permutation {
    let mut y = p.clone();
    let count = sample_poisson_unit(rng);
    apply_exchanges(&mut y, count, rng);
    y
}
