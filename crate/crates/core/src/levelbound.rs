//! Closed-form runtime bounds, selection thresholds and benchmark level probabilities.
//!
//! The general bound takes per-level upgrade probabilities `z_j` of the full
//! sampling distribution; the GA form takes mutation-only probabilities `s_j`
//! together with the no-change probability `p0` and the crossover constant
//! `eps1`, and is the general bound evaluated at `z_j = gamma0 (1+delta) s_j / p0`.
//! Both require `lambda` above a logarithmic threshold, reported as `lambda_min`.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::GaConfig;
use crate::error::{config_err, input_err, Error, Result};
use crate::operators::{
    CrossoverKind, CrossoverSpec, MutationSpec, SelectionKind, SelectionMechanism,
};
use crate::problems::{ProblemKind, ProblemSpec};

/// Per-level probabilities with their floor and the GA constants `p0`, `eps1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProbabilities {
    pub values: Vec<f64>,
    pub floor: f64,
    pub p0: f64,
    pub eps1: f64,
}

fn in_unit(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}

impl LevelProbabilities {
    /// `values` with floor `min(values)` and `p0 = eps1 = 1`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_constants(values, 1.0, 1.0)
    }

    pub fn with_constants(values: Vec<f64>, p0: f64, eps1: f64) -> Result<Self> {
        let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
        let lp = LevelProbabilities {
            values,
            floor,
            p0,
            eps1,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// Replaces the floor by a smaller positive value.
    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        self.floor = floor;
        self.validate()?;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(input_err("at least one level probability is required"));
        }
        if let Some((j, v)) = self.values.iter().enumerate().find(|(_, &v)| !in_unit(v)) {
            return Err(input_err(format!(
                "level probability {} = {v} outside (0,1]",
                j + 1
            )));
        }
        if !in_unit(self.floor) || self.values.iter().any(|&v| v < self.floor) {
            return Err(input_err(format!(
                "floor {} must lie in (0,1] and below every level probability",
                self.floor
            )));
        }
        if !in_unit(self.p0) {
            return Err(input_err(format!("p0 = {} outside (0,1]", self.p0)));
        }
        if !in_unit(self.eps1) {
            return Err(input_err(format!("eps1 = {} outside (0,1]", self.eps1)));
        }
        Ok(())
    }
}

/// `a`, `eps` (or `psi`) and `c` for a given `delta` and `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConstants {
    pub a: f64,
    pub eps: f64,
    pub c: f64,
}

impl DriftConstants {
    pub fn new(delta: f64, gamma0: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(input_err(format!("delta must be > 0, got {delta}")));
        }
        if !(gamma0 > 0.0 && gamma0 < 1.0) {
            return Err(input_err(format!("gamma0 must lie in (0,1), got {gamma0}")));
        }
        let a = delta * delta * gamma0 / (2.0 * (1.0 + delta));
        let eps = (delta / 2.0).min(0.5);
        let c = eps.powi(4) / 24.0;
        Ok(DriftConstants { a, eps, c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Bound from full-distribution probabilities `z_j`.
    General,
    /// Bound from mutation-level probabilities `s_j`, `p0`, `eps1`.
    Ga,
}

/// Constants, population threshold and runtime bound for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub m: usize,
    pub lambda: usize,
    pub delta: f64,
    pub gamma0: f64,
    pub a: f64,
    /// `eps` for the general bound, `psi` for the GA bound; both `min(delta/2, 1/2)`.
    pub eps_or_psi: f64,
    pub c: f64,
    pub floor: f64,
    pub lambda_min_raw: f64,
    pub lambda_min: usize,
    pub lambda_ok: bool,
    /// Expected evaluations upper bound.
    pub bound: f64,
    /// The upgrade-from-above slope `z0(gamma)` is modelled as exactly `(1+delta) gamma`.
    pub z0_slope_ok: bool,
    /// `z_j = gamma0 (1+delta) s_j / p0` (GA bound only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implied_z: Option<Vec<f64>>,
}

fn population_term(m: usize, lambda: usize, c: f64) -> f64 {
    let lambda = lambda as f64;
    m as f64 * lambda * (1.0 + (c * lambda).ln_1p())
}

fn ceil_lambda(raw: f64) -> usize {
    if raw <= 1.0 {
        1
    } else {
        raw.ceil() as usize
    }
}

/// General level-based bound from per-level probabilities `z_j`.
///
/// `E[T] <= (2/(c eps)) (m lambda (1 + ln(1 + c lambda)) + sum_j 1/z_j)`, valid
/// when `lambda >= (2/a) ln(16 m / (a c eps z_*))`.
pub fn theorem1_bound(
    m: usize,
    lambda: usize,
    z: &LevelProbabilities,
    delta: f64,
    gamma0: f64,
) -> Result<BoundReport> {
    z.validate()?;
    if z.m() != m {
        return Err(input_err(format!(
            "{} level probabilities for m = {m}",
            z.m()
        )));
    }
    if lambda == 0 {
        return Err(input_err("lambda must be at least 1"));
    }
    let DriftConstants { a, eps, c } = DriftConstants::new(delta, gamma0)?;
    let lambda_min_raw = (2.0 / a) * (16.0 * m as f64 / (a * c * eps * z.floor)).ln();
    let lambda_min = ceil_lambda(lambda_min_raw);
    let sum_inv: f64 = z.values.iter().map(|v| 1.0 / v).sum();
    let bound = 2.0 / (c * eps) * (population_term(m, lambda, c) + sum_inv);
    Ok(BoundReport {
        kind: BoundKind::General,
        m,
        lambda,
        delta,
        gamma0,
        a,
        eps_or_psi: eps,
        c,
        floor: z.floor,
        lambda_min_raw,
        lambda_min,
        lambda_ok: lambda >= lambda_min,
        bound,
        z0_slope_ok: true,
        implied_z: None,
    })
}

/// GA bound from mutation probabilities `s_j`, `p0` and `eps1`.
///
/// `E[T] <= (2/(c psi)) (m lambda (1 + ln(1 + c lambda)) + (p0/((1+delta) gamma0)) sum_j 1/s_j)`,
/// valid when `lambda >= (2/a) ln(32 m p0 / ((delta gamma0)^2 c s_* psi))`.
pub fn corollary1_bound(
    m: usize,
    lambda: usize,
    s: &LevelProbabilities,
    delta: f64,
    gamma0: f64,
) -> Result<BoundReport> {
    s.validate()?;
    if s.m() != m {
        return Err(input_err(format!(
            "{} level probabilities for m = {m}",
            s.m()
        )));
    }
    if lambda == 0 {
        return Err(input_err("lambda must be at least 1"));
    }
    let DriftConstants { a, eps: psi, c } = DriftConstants::new(delta, gamma0)?;
    let dg = delta * gamma0;
    let lambda_min_raw = (2.0 / a) * (32.0 * m as f64 * s.p0 / (dg * dg * c * s.floor * psi)).ln();
    let lambda_min = ceil_lambda(lambda_min_raw);
    let sum_inv: f64 = s.values.iter().map(|v| 1.0 / v).sum();
    let bound = 2.0 / (c * psi)
        * (population_term(m, lambda, c) + s.p0 / ((1.0 + delta) * gamma0) * sum_inv);
    let implied_z = s
        .values
        .iter()
        .map(|sj| gamma0 * (1.0 + delta) * sj / s.p0)
        .collect();
    Ok(BoundReport {
        kind: BoundKind::Ga,
        m,
        lambda,
        delta,
        gamma0,
        a,
        eps_or_psi: psi,
        c,
        floor: s.floor,
        lambda_min_raw,
        lambda_min,
        lambda_ok: lambda >= lambda_min,
        bound,
        z0_slope_ok: true,
        implied_z: Some(implied_z),
    })
}

/// Smallest selection parameter meeting the selective-pressure condition, and
/// the matching `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionThreshold {
    pub kind: SelectionKind,
    /// Lower bound on `k`, on `eta`, or on the ratio `lambda/mu`.
    pub threshold: f64,
    pub gamma0: f64,
}

/// Tournament and exponential ranking need `k, eta >= 4(1+delta)/(eps1 p0)` with
/// `gamma0 = eps1 p0 / (4(1+delta))`; (mu,lambda) needs `lambda/mu >= (1+delta)/(eps1 p0)`
/// with `gamma0 = mu/lambda`, reported here at the threshold ratio.
pub fn lemma1_selection_threshold(
    kind: SelectionKind,
    eps1: f64,
    p0: f64,
    delta: f64,
) -> Result<SelectionThreshold> {
    if !in_unit(eps1) || !in_unit(p0) {
        return Err(input_err(format!(
            "eps1 = {eps1} and p0 = {p0} must lie in (0,1]"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(input_err(format!("delta must be > 0, got {delta}")));
    }
    let eps = eps1 * p0;
    let (threshold, gamma0) = match kind {
        SelectionKind::Tournament | SelectionKind::ExpRanking => {
            (4.0 * (1.0 + delta) / eps, eps / (4.0 * (1.0 + delta)))
        }
        SelectionKind::MuLambda => {
            let t = (1.0 + delta) / eps;
            (t, 1.0 / t)
        }
    };
    Ok(SelectionThreshold {
        kind,
        threshold,
        gamma0,
    })
}

/// `s_j`, `p0` and `eps1` of a benchmark at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelConstants {
    pub s_j: f64,
    pub p0: f64,
    pub eps1: f64,
}

/// Per-level mutation probability, no-change probability and crossover constant
/// for the benchmark setups.
///
/// `j` is a canonical level in `1..=m` (level `j` holds fitness `j-1`).
/// OneMax: `s_j = (n-j+1)(chi/n)(1-chi/n)^(n-1) p0`; LeadingOnes:
/// `s_j = (chi/n)(1-chi/n)^(n-1)`; both with `p0 = (1-chi/n)^n` and `eps1 = 1/2`.
/// Sorting: `s_j = (m-j+1) p0 / (e m)` with `p0 = 1/e` and `eps1 = (1-p_c)/2`;
/// `m-j+1` is the number of inverted pairs at level `j`.
pub fn benchmark_sj(
    problem: &ProblemSpec,
    mutation: &MutationSpec,
    crossover: &CrossoverSpec,
    j: usize,
) -> Result<LevelConstants> {
    let m = problem.levels();
    if j == 0 || j > m {
        return Err(input_err(format!("level {j} outside 1..={m}")));
    }
    crossover.validate()?;
    match (problem.kind, mutation) {
        (ProblemKind::OneMax | ProblemKind::LeadingOnes, MutationSpec::Bitwise { chi }) => {
            mutation.validate(problem.n)?;
            let n = problem.n as f64;
            let rate = chi / n;
            let p0 = (1.0 - rate).powi(problem.n as i32);
            let single = rate * (1.0 - rate).powi(problem.n as i32 - 1);
            let s_j = match problem.kind {
                ProblemKind::OneMax => (problem.n - j + 1) as f64 * single * p0,
                _ => single,
            };
            Ok(LevelConstants { s_j, p0, eps1: 0.5 })
        }
        (ProblemKind::InvSorting, MutationSpec::Exchange) => {
            let p0 = (-1.0f64).exp();
            let s_j = (m - j + 1) as f64 * p0 / (E * m as f64);
            Ok(LevelConstants {
                s_j,
                p0,
                eps1: (1.0 - crossover.p_c) / 2.0,
            })
        }
        _ => Err(Error::Representation(format!(
            "no benchmark constants for {problem} with {mutation}"
        ))),
    }
}

/// [`benchmark_sj`] for every level, as a [`LevelProbabilities`].
pub fn benchmark_level_probabilities(
    problem: &ProblemSpec,
    mutation: &MutationSpec,
    crossover: &CrossoverSpec,
) -> Result<LevelProbabilities> {
    let m = problem.levels();
    if m == 0 {
        return Err(input_err(format!("{problem} has no non-top levels")));
    }
    let per_level = (1..=m)
        .map(|j| benchmark_sj(problem, mutation, crossover, j))
        .collect::<Result<Vec<_>>>()?;
    let values = per_level.iter().map(|c| c.s_j).collect();
    LevelProbabilities::with_constants(values, per_level[0].p0, per_level[0].eps1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// OneMax with bitwise mutation.
    OneMax,
    /// LeadingOnes with bitwise mutation.
    LeadingOnes,
    /// Sorting (INV) with exchange mutation and gated crossover.
    Sorting,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::OneMax => "3_onemax",
            Theorem::LeadingOnes => "3_leadingones",
            Theorem::Sorting => "4_inv",
        }
    }

    pub fn all() -> [Theorem; 3] {
        [Theorem::OneMax, Theorem::LeadingOnes, Theorem::Sorting]
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "3_onemax" | "onemax" => Ok(Theorem::OneMax),
            "3_leadingones" | "leadingones" => Ok(Theorem::LeadingOnes),
            "4_inv" | "inv" | "sorting" => Ok(Theorem::Sorting),
            other => Err(config_err(format!(
                "unknown theorem {other:?}; expected 3_onemax, 3_leadingones or 4_inv"
            ))),
        }
    }
}

/// Inputs of [`theorem_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRequest {
    pub theorem: Theorem,
    pub n: usize,
    /// Mutation constant; used by the bitstring theorems.
    pub chi: f64,
    /// Crossover probability; used by the sorting theorem.
    pub p_c: f64,
    pub delta: f64,
    pub selection: SelectionKind,
    pub crossover: CrossoverKind,
    /// Population size floor; the result uses `max(lambda, lambda_min)`.
    pub lambda: Option<usize>,
    pub seed: u64,
    pub replicates: usize,
}

impl TheoremRequest {
    pub fn new(theorem: Theorem, n: usize, delta: f64, selection: SelectionKind) -> Self {
        TheoremRequest {
            theorem,
            n,
            chi: 1.0,
            p_c: 0.5,
            delta,
            selection,
            crossover: match theorem {
                Theorem::Sorting => CrossoverKind::OnePoint,
                _ => CrossoverKind::Uniform,
            },
            lambda: None,
            seed: 0,
            replicates: 1,
        }
    }
}

/// A runnable configuration and its composed GA bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSetup {
    pub config: GaConfig,
    pub report: BoundReport,
    pub constants: LevelProbabilities,
    pub delta_requested: f64,
    /// Largest `delta' <= delta` for which the chosen selection parameter meets
    /// the selective-pressure threshold at this `n`; `report` uses it.
    pub delta_effective: f64,
    /// The theorem's selection inequality, as a bound on `k`, `eta` or `lambda/mu`.
    pub selection_requirement: f64,
    pub warnings: Vec<String>,
}

/// Builds the theorem's GA configuration with the smallest admissible selection
/// parameter and `lambda = max(requested, lambda_min)`.
pub fn theorem_config(req: &TheoremRequest) -> Result<TheoremSetup> {
    let delta = req.delta;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(config_err(format!("delta must be > 0, got {delta}")));
    }
    let (problem, mutation, crossover, base) = match req.theorem {
        Theorem::OneMax | Theorem::LeadingOnes => {
            if !(req.chi > 0.0 && req.chi.is_finite()) {
                return Err(config_err(format!("chi must be > 0, got {}", req.chi)));
            }
            let problem = if req.theorem == Theorem::OneMax {
                ProblemSpec::onemax(req.n)
            } else {
                ProblemSpec::leading_ones(req.n)
            };
            (
                problem,
                MutationSpec::Bitwise { chi: req.chi },
                CrossoverSpec::new(req.crossover, 1.0)?,
                (1.0 + delta) * req.chi.exp(),
            )
        }
        Theorem::Sorting => {
            if !(0.0..1.0).contains(&req.p_c) {
                return Err(config_err(format!(
                    "the sorting setup needs p_c in [0,1), got {}",
                    req.p_c
                )));
            }
            (
                ProblemSpec::inv_sorting(req.n),
                MutationSpec::Exchange,
                CrossoverSpec::new(req.crossover, req.p_c)?,
                E * (1.0 + delta) / (1.0 - req.p_c),
            )
        }
    };
    if req.n == 0 || problem.levels() == 0 {
        return Err(config_err(format!("{problem} has no non-top levels")));
    }
    mutation.validate(req.n)?;
    let constants = benchmark_level_probabilities(&problem, &mutation, &crossover)?;
    let (p0, eps1) = (constants.p0, constants.eps1);
    let m = problem.levels();

    let mut warnings = Vec::new();
    if let MutationSpec::Bitwise { chi } = mutation {
        let delta_prime = delta / 2.0;
        let need = chi / (1.0 - ((1.0 + delta_prime) / (1.0 + delta)).powf(1.0 / chi));
        if (req.n as f64) < need {
            warnings.push(format!(
                "n = {} is below the finite-n admissibility size {need:.1} for delta' = delta/2",
                req.n
            ));
        }
    }

    let effective = |pressure: f64| (pressure * eps1 * p0 - 1.0).min(delta);
    let inadmissible = |d: f64| {
        config_err(format!(
            "selection parameter cannot meet the selective-pressure threshold at n = {} (delta' = {d:.4})",
            req.n
        ))
    };

    let user_lambda = req.lambda.unwrap_or(1).max(1);
    let (selection, requirement, delta_eff, report) = match req.selection {
        SelectionKind::Tournament | SelectionKind::ExpRanking => {
            let requirement = 8.0 * base;
            let (selection, pressure) = if req.selection == SelectionKind::Tournament {
                let k = requirement.ceil() as usize;
                (SelectionMechanism::Tournament { k }, k as f64)
            } else {
                (
                    SelectionMechanism::ExpRanking { eta: requirement },
                    requirement,
                )
            };
            // k eps1 p0 / 4 - 1 from k >= 4(1+delta')/(eps1 p0)
            let d = effective(pressure / 4.0);
            if d <= 0.0 {
                return Err(inadmissible(d));
            }
            let gamma0 = lemma1_selection_threshold(req.selection, eps1, p0, d)?.gamma0;
            let probe = corollary1_bound(m, 1, &constants, d, gamma0)?;
            let lambda = user_lambda.max(probe.lambda_min);
            let report = corollary1_bound(m, lambda, &constants, d, gamma0)?;
            (selection, requirement, d, report)
        }
        SelectionKind::MuLambda => {
            let requirement = 2.0 * base;
            let mut lambda = user_lambda;
            let mut settled = None;
            for _ in 0..64 {
                let mu = ((lambda as f64 / requirement).floor() as usize).max(1);
                let ratio = lambda as f64 / mu as f64;
                let d = effective(ratio);
                if d <= 0.0 || ratio < requirement {
                    // population still too small for any admissible mu
                    lambda = lambda.max((requirement.ceil() as usize).max(2));
                    if ratio >= requirement {
                        return Err(inadmissible(d));
                    }
                    continue;
                }
                let gamma0 = mu as f64 / lambda as f64;
                let report = corollary1_bound(m, lambda, &constants, d, gamma0)?;
                if report.lambda_ok {
                    settled = Some((SelectionMechanism::MuLambda { mu }, d, report));
                    break;
                }
                lambda = report.lambda_min.max(lambda + 1);
            }
            let (selection, d, report) = settled
                .ok_or_else(|| config_err("population size did not settle for (mu,lambda)"))?;
            (selection, requirement, d, report)
        }
    };
    if delta_eff < delta {
        warnings.push(format!(
            "selection meets the pressure threshold only for delta' = {delta_eff:.6} < delta = {delta} at n = {}; bound uses delta'",
            req.n
        ));
    }

    let max_evals = (10.0 * report.bound)
        .min(u64::MAX as f64)
        .max(report.lambda as f64) as u64;
    let config = GaConfig {
        problem,
        lambda: report.lambda,
        selection,
        crossover,
        mutation,
        seed: req.seed,
        max_evals,
        replicates: req.replicates.max(1),
    }
    .validated()?;
    Ok(TheoremSetup {
        config,
        report,
        constants,
        delta_requested: delta,
        delta_effective: delta_eff,
        selection_requirement: requirement,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn constants_for_unit_delta() {
        let k = DriftConstants::new(1.0, 0.25).unwrap();
        assert_eq!(k.a, 0.0625);
        assert_eq!(k.eps, 0.5);
        assert!(close(k.c, 0.5f64.powi(4) / 24.0, 1e-15));
        assert!(close(k.c, 2.604e-3, 1e-3));
        assert!(DriftConstants::new(0.0, 0.25).is_err());
        assert!(DriftConstants::new(1.0, 1.0).is_err());
    }

    #[test]
    fn single_level_example() {
        let z = LevelProbabilities::new(vec![0.1]).unwrap();
        let r = theorem1_bound(1, 464, &z, 1.0, 0.25).unwrap();
        assert_eq!(r.lambda_min, 464);
        assert!(r.lambda_ok);
        assert!(close(r.bound, 1.29e6, 0.01), "{}", r.bound);
        let r = theorem1_bound(1, 463, &z, 1.0, 0.25).unwrap();
        assert!(!r.lambda_ok);
    }

    #[test]
    fn probability_validation() {
        assert!(LevelProbabilities::new(vec![]).is_err());
        assert!(LevelProbabilities::new(vec![0.0]).is_err());
        assert!(LevelProbabilities::new(vec![1.2]).is_err());
        assert!(LevelProbabilities::new(vec![0.2, 0.3])
            .unwrap()
            .with_floor(0.25)
            .is_err());
        let z = LevelProbabilities::new(vec![0.2]).unwrap();
        assert!(theorem1_bound(2, 10, &z, 1.0, 0.5).is_err());
    }

    #[test]
    fn ga_bound_psi_matches_general_eps() {
        let s = LevelProbabilities::with_constants(vec![0.05, 0.1], 0.3, 0.5).unwrap();
        let r = corollary1_bound(2, 100, &s, 1.0, 0.1).unwrap();
        assert_eq!(r.eps_or_psi, 0.5);
        let z = theorem1_bound(
            2,
            100,
            &LevelProbabilities::new(vec![0.05, 0.1]).unwrap(),
            1.0,
            0.1,
        )
        .unwrap();
        assert_eq!(r.eps_or_psi, z.eps_or_psi);
    }

    #[test]
    fn selection_thresholds() {
        let t = lemma1_selection_threshold(SelectionKind::Tournament, 0.5, (-1.0f64).exp(), 1.0)
            .unwrap();
        assert!(close(t.threshold, 16.0 * E, 1e-14));
        assert!(close(t.threshold, 43.49, 1e-3));
        assert!(close(t.gamma0, 1.0 / (16.0 * E), 1e-14));
        let ml = lemma1_selection_threshold(SelectionKind::MuLambda, 1.0, 0.5, 1.0).unwrap();
        assert!(close(ml.threshold, 4.0, 1e-15));
        assert!(close(ml.gamma0, 0.25, 1e-15));
        let tiny = lemma1_selection_threshold(SelectionKind::ExpRanking, 0.5, 0.5, 1e-12).unwrap();
        assert!(close(tiny.threshold, 16.0, 1e-9));
        assert!(lemma1_selection_threshold(SelectionKind::Tournament, 0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn benchmark_examples() {
        let bitwise = MutationSpec::Bitwise { chi: 1.0 };
        let uniform = CrossoverSpec::new(CrossoverKind::Uniform, 1.0).unwrap();
        let om = benchmark_sj(&ProblemSpec::onemax(10), &bitwise, &uniform, 1).unwrap();
        let expected = 10.0 * 0.1 * 0.9f64.powi(9) * 0.9f64.powi(10);
        assert!(close(om.s_j, expected, 1e-14));
        assert!(close(om.s_j, 0.1351, 1e-3));
        assert_eq!(om.eps1, 0.5);
        for j in [1, 5, 10] {
            let lo = benchmark_sj(&ProblemSpec::leading_ones(10), &bitwise, &uniform, j).unwrap();
            assert!(close(lo.s_j, 0.1 * 0.9f64.powi(9), 1e-14));
        }
        let gated = CrossoverSpec::new(CrossoverKind::OnePoint, 0.5).unwrap();
        // level 6 of n=4 sorting has INV = 5: one inverted pair left
        let inv = benchmark_sj(
            &ProblemSpec::inv_sorting(4),
            &MutationSpec::Exchange,
            &gated,
            6,
        )
        .unwrap();
        assert!(close(inv.s_j, 1.0 / (6.0 * E * E), 1e-14));
        assert!(close(inv.s_j, 0.02255, 1e-3));
        assert_eq!(inv.eps1, 0.25);
        assert!(benchmark_sj(&ProblemSpec::onemax(10), &bitwise, &uniform, 0).is_err());
        assert!(benchmark_sj(&ProblemSpec::onemax(10), &bitwise, &uniform, 11).is_err());
    }

    #[test]
    fn onemax_top_level_and_floor_trend() {
        let bitwise = MutationSpec::Bitwise { chi: 1.0 };
        let uniform = CrossoverSpec::new(CrossoverKind::Uniform, 1.0).unwrap();
        let mut scaled = Vec::new();
        for n in (10..=200).step_by(10) {
            let problem = ProblemSpec::onemax(n);
            let q = 1.0 / n as f64;
            let p0 = (1.0 - q).powi(n as i32);
            let top = benchmark_sj(&problem, &bitwise, &uniform, n).unwrap();
            assert!(close(top.s_j, q * (1.0 - q).powi(n as i32 - 1) * p0, 1e-13));
            let lp = benchmark_level_probabilities(&problem, &bitwise, &uniform).unwrap();
            scaled.push(lp.floor * n as f64);
        }
        // s_* n stays within constants: about 1/e^2 at every n
        assert!(
            scaled.iter().all(|&x| (0.1..0.2).contains(&x)),
            "{scaled:?}"
        );
    }

    #[test]
    fn theorem_selection_parameters() {
        let mut req = TheoremRequest::new(Theorem::OneMax, 50, 0.1, SelectionKind::Tournament);
        req.chi = 1.0;
        let setup = theorem_config(&req).unwrap();
        assert_eq!(
            setup.config.selection,
            SelectionMechanism::Tournament { k: 24 }
        );
        assert!(setup.report.lambda_ok);

        let mut req = TheoremRequest::new(Theorem::Sorting, 8, 1.0, SelectionKind::Tournament);
        req.p_c = 0.0;
        let setup = theorem_config(&req).unwrap();
        assert_eq!(
            setup.config.selection,
            SelectionMechanism::Tournament { k: 44 }
        );

        let req = TheoremRequest::new(Theorem::OneMax, 50, 1.0, SelectionKind::MuLambda);
        let setup = theorem_config(&req).unwrap();
        let SelectionMechanism::MuLambda { mu } = setup.config.selection else {
            panic!()
        };
        let ratio = setup.config.lambda as f64 / mu as f64;
        assert!(close(setup.selection_requirement, 4.0 * E, 1e-14));
        assert!(ratio >= 4.0 * E);
        assert_eq!(
            mu,
            (setup.config.lambda as f64 / (4.0 * E)).floor() as usize
        );

        let mut bad = TheoremRequest::new(Theorem::Sorting, 8, 1.0, SelectionKind::Tournament);
        bad.p_c = 1.0;
        assert!(theorem_config(&bad).is_err());
    }
}
