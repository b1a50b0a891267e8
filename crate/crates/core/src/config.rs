//! GA configuration and the `name:key=value,key=value` operator grammar.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::operators::{CrossoverSpec, MutationSpec, SelectionMechanism};
use crate::problems::ProblemSpec;

pub const DEFAULT_MAX_EVALS: u64 = 1_000_000_000;

/// A parsed `name:key=value,...` string.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecString {
    pub name: String,
    params: BTreeMap<String, String>,
    source: String,
}

impl SpecString {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((name, rest)) => (name, Some(rest)),
            None => (s, None),
        };
        if name.is_empty() {
            return Err(config_err(format!("{s:?}: missing operator name")));
        }
        let mut params = BTreeMap::new();
        if let Some(rest) = rest {
            for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
                let (k, v) = pair.split_once('=').ok_or_else(|| {
                    config_err(format!("{s:?}: expected key=value, found {pair:?}"))
                })?;
                let k = k.trim().to_ascii_lowercase();
                if params.insert(k.clone(), v.trim().to_string()).is_some() {
                    return Err(config_err(format!("{s:?}: duplicate key {k:?}")));
                }
            }
        }
        Ok(SpecString {
            name: name.trim().to_ascii_lowercase(),
            params,
            source: s.to_string(),
        })
    }

    pub fn allow_only(&self, keys: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(config_err(format!(
                    "{:?}: unknown key {k:?} for {} (allowed: {})",
                    self.source,
                    self.name,
                    keys.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn required_usize(&self, key: &str) -> Result<usize> {
        let v = self
            .get(key)
            .ok_or_else(|| config_err(format!("{:?}: missing {key}=<integer>", self.source)))?;
        v.parse().map_err(|_| {
            config_err(format!(
                "{:?}: {key} must be a non-negative integer, got {v:?}",
                self.source
            ))
        })
    }

    pub fn optional_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        config_err(format!(
                            "{:?}: {key} must be a decimal number, got {v:?}",
                            self.source
                        ))
                    })
            })
            .transpose()
    }

    pub fn required_f64(&self, key: &str) -> Result<f64> {
        self.optional_f64(key)?
            .ok_or_else(|| config_err(format!("{:?}: missing {key}=<number>", self.source)))
    }
}

/// Full description of the sampling distribution `D(P)` plus run controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub problem: ProblemSpec,
    pub lambda: usize,
    pub selection: SelectionMechanism,
    pub crossover: CrossoverSpec,
    pub mutation: MutationSpec,
    pub seed: u64,
    pub max_evals: u64,
    pub replicates: usize,
}

impl GaConfig {
    /// Checks every cross-field rule; returns the config unchanged on success.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.n == 0 {
            return Err(config_err("problem size n must be at least 1"));
        }
        if self.lambda == 0 {
            return Err(config_err("lambda must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(config_err("replicates must be at least 1"));
        }
        if self.max_evals < self.lambda as u64 {
            return Err(config_err(format!(
                "max_evals ({}) must be at least lambda ({})",
                self.max_evals, self.lambda
            )));
        }
        self.selection.validate(self.lambda)?;
        self.crossover.validate()?;
        self.mutation.validate(self.problem.n)?;
        let repr = self.problem.representation();
        if self.mutation.representation() != repr {
            return Err(config_err(format!(
                "mutation {} works on {} genotypes but {} uses {}",
                self.mutation,
                self.mutation.representation(),
                self.problem,
                repr
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_string_grammar() {
        let s = SpecString::parse("tournament:k=25").unwrap();
        assert_eq!(s.name, "tournament");
        assert_eq!(s.required_usize("k").unwrap(), 25);
        let s = SpecString::parse("uniform:pc=1.0").unwrap();
        assert_eq!(s.required_f64("pc").unwrap(), 1.0);
        assert!(SpecString::parse("uniform:pc").is_err());
        assert!(SpecString::parse(":k=2").is_err());
        assert!(SpecString::parse("t:k=1,k=2").is_err());
        let s = SpecString::parse("exchange").unwrap();
        assert_eq!(s.name, "exchange");
        assert!(s.allow_only(&[]).is_ok());
        assert!(SpecString::parse("x:k=abc")
            .unwrap()
            .required_usize("k")
            .is_err());
        assert!(SpecString::parse("x:c=nan")
            .unwrap()
            .required_f64("c")
            .is_err());
    }
}
