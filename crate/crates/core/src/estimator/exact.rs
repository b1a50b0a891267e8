//! Exact and certified-lower-bound probabilities for mutation and crossover
//! events on the benchmark problems.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{monte_carlo, Estimate};
use crate::error::{input_err, Error, Result};
use crate::genotype::{BitString, Genotype, Permutation};
use crate::operators::crossover::{one_point_at, uniform_with_mask, MAX_ENUMERATED_MASK_BITS};
use crate::operators::mutation::{apply_exchanges, sample_poisson_unit};
use crate::operators::{CrossoverKind, CrossoverSpec};
use crate::problems::{inv, ProblemKind, ProblemSpec};

/// Largest bitstring length for the mask-enumeration mutation oracle.
pub const MAX_MUTATION_ENUMERATION_BITS: usize = 12;
/// Largest permutation length for the exact exchange-mutation distribution.
pub const MAX_EXCHANGE_ENUMERATION: usize = 7;
/// Poisson terms kept by the exact exchange distribution; the tail beyond is
/// below `1e-80`.
const POISSON_TERMS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form or exhaustive enumeration.
    Exact,
    /// Exact probability of a sub-event; the true value is at least this.
    LowerBound,
    /// Exact strata plus a Monte Carlo remainder.
    MonteCarlo,
}

/// A probability with the lower end of its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub lower: f64,
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub method: Method,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Measured {
            value,
            lower: value,
            ci_halfwidth: 0.0,
            trials: 0,
            method: Method::Exact,
        }
    }

    pub fn lower_bound(value: f64) -> Self {
        Measured {
            method: Method::LowerBound,
            ..Measured::exact(value)
        }
    }

    pub fn from_estimate(e: Estimate) -> Self {
        Measured {
            value: e.value,
            lower: e.lower(),
            ci_halfwidth: e.ci_halfwidth,
            trials: e.trials,
            method: Method::MonteCarlo,
        }
    }
}

fn bitwise_rate(n: usize, chi: f64) -> Result<f64> {
    let p = chi / n as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(input_err(format!(
            "mutation rate chi/n = {p} outside (0,1]"
        )));
    }
    Ok(p)
}

fn binomial_pmf(trials: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; trials + 1];
    if p >= 1.0 {
        pmf[trials] = 1.0;
        return pmf;
    }
    let ratio = p / (1.0 - p);
    pmf[0] = (1.0 - p).powi(trials as i32);
    for k in 0..trials {
        pmf[k + 1] = pmf[k] * (trials - k) as f64 / (k + 1) as f64 * ratio;
    }
    pmf
}

/// Probability that bitwise mutation with rate `chi/n` turns `x` into a string
/// of fitness at least `min_fitness`, in closed form.
///
/// OneMax: ones lost and zeros gained are independent binomials. LeadingOnes:
/// the first `min_fitness` positions must all end as ones.
pub fn bitwise_reach_probability(
    problem: &ProblemSpec,
    chi: f64,
    x: &BitString,
    min_fitness: u64,
) -> Result<f64> {
    if x.len() != problem.n {
        return Err(input_err(format!(
            "genotype length {} for {problem}",
            x.len()
        )));
    }
    let p = bitwise_rate(problem.n, chi)?;
    let t = min_fitness as usize;
    match problem.kind {
        ProblemKind::OneMax => {
            let ones = x.count_ones();
            let zeros = problem.n - ones;
            let lose = binomial_pmf(ones, p);
            let gain = binomial_pmf(zeros, p);
            let mut total = 0.0;
            for (l, pl) in lose.iter().enumerate() {
                for (g, pg) in gain.iter().enumerate() {
                    if ones - l + g >= t {
                        total += pl * pg;
                    }
                }
            }
            Ok(total.min(1.0))
        }
        ProblemKind::LeadingOnes => {
            if t > problem.n {
                return Ok(0.0);
            }
            Ok((0..t).map(|i| if x.get(i) { 1.0 - p } else { p }).product())
        }
        ProblemKind::InvSorting => Err(Error::Representation(
            "bitwise mutation does not apply to permutations".into(),
        )),
    }
}

/// [`bitwise_reach_probability`] by summing over all `2^n` flip masks, `n <= 12`.
pub fn bitwise_reach_enumerated(
    problem: &ProblemSpec,
    chi: f64,
    x: &BitString,
    min_fitness: u64,
) -> Result<f64> {
    let n = problem.n;
    if n > MAX_MUTATION_ENUMERATION_BITS {
        return Err(Error::TooLarge {
            what: "mutation masks",
            size: 1u128 << n,
            limit: 1u128 << MAX_MUTATION_ENUMERATION_BITS,
        });
    }
    if x.len() != n {
        return Err(input_err(format!(
            "genotype length {} for {problem}",
            x.len()
        )));
    }
    let p = bitwise_rate(n, chi)?;
    let mut total = 0.0;
    for m in 0..1u64 << n {
        let mask = BitString::from_u64(m, n);
        let flips = mask.count_ones();
        let weight = p.powi(flips as i32) * (1.0 - p).powi((n - flips) as i32);
        let mut y = x.clone();
        for i in (0..n).filter(|&i| mask.get(i)) {
            y.flip(i);
        }
        if problem.evaluate(&y.into())? >= min_fitness {
            total += weight;
        }
    }
    Ok(total)
}

fn perm_index(states: &HashMap<Vec<u32>, usize>, p: &[u32]) -> usize {
    states[p]
}

fn all_permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..n as u32).collect();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    out.push(cur.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cur.swap(0, i);
            } else {
                cur.swap(c[i], i);
            }
            out.push(cur.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Exact output distribution of exchange mutation from `pi`, `n <= 7`, as
/// `(permutation, probability)` pairs over all of `S_n`.
pub fn exchange_distribution_exact(pi: &Permutation) -> Result<Vec<(Permutation, f64)>> {
    let n = pi.len();
    if n > MAX_EXCHANGE_ENUMERATION {
        return Err(Error::TooLarge {
            what: "permutations for exact exchange distribution",
            size: n as u128,
            limit: MAX_EXCHANGE_ENUMERATION as u128,
        });
    }
    let perms = all_permutations(n);
    let states: HashMap<Vec<u32>, usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let neighbours: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| {
            pairs
                .iter()
                .map(|&(i, j)| {
                    let mut q = p.clone();
                    q.swap(i, j);
                    perm_index(&states, &q)
                })
                .collect()
        })
        .collect();
    let mut current = vec![0.0; perms.len()];
    current[perm_index(&states, pi.as_slice())] = 1.0;
    let mut result = vec![0.0; perms.len()];
    let mut weight = (-1.0f64).exp();
    for k in 0..POISSON_TERMS {
        for (r, c) in result.iter_mut().zip(&current) {
            *r += weight * c;
        }
        weight /= (k + 1) as f64;
        if pairs.is_empty() {
            continue;
        }
        let mut next = vec![0.0; perms.len()];
        let share = 1.0 / pairs.len() as f64;
        for (s, &mass) in current.iter().enumerate() {
            if mass > 0.0 {
                for &t in &neighbours[s] {
                    next[t] += mass * share;
                }
            }
        }
        current = next;
    }
    if pairs.is_empty() {
        // no pair to exchange: every draw of N leaves pi unchanged
        result = current;
    }
    Ok(perms
        .into_iter()
        .zip(result)
        .map(|(p, w)| (Permutation::from_zero_based(p).expect("valid"), w))
        .collect())
}

/// Probability that exchange mutation maps `pi` to a permutation with
/// `INV >= min_inv`.
///
/// Exact for `n <= 7`. Otherwise the `N = 0` and `N = 1` strata are summed
/// exactly; if they already reach `needed` the result is that certified lower
/// bound, else the `N >= 2` stratum is sampled with `trials` draws and only its
/// confidence lower end enters `lower`.
pub fn exchange_reach(
    pi: &Permutation,
    min_inv: u64,
    needed: f64,
    trials: u64,
    seed: u64,
) -> Result<Measured> {
    let n = pi.len();
    if n <= MAX_EXCHANGE_ENUMERATION {
        let p = exchange_distribution_exact(pi)?
            .into_iter()
            .filter(|(q, _)| inv(q) >= min_inv)
            .map(|(_, w)| w)
            .sum::<f64>();
        return Ok(Measured::exact(p.min(1.0)));
    }
    let e = (-1.0f64).exp();
    let mut strata = if inv(pi) >= min_inv { e } else { 0.0 };
    let pairs = n * (n - 1) / 2;
    let mut good = 0usize;
    let mut q = pi.clone();
    for i in 0..n {
        for j in i + 1..n {
            q.swap(i, j);
            if inv(&q) >= min_inv {
                good += 1;
            }
            q.swap(i, j);
        }
    }
    strata += e * good as f64 / pairs as f64;
    if strata >= needed {
        return Ok(Measured::lower_bound(strata));
    }
    let rest = 1.0 - 2.0 * e;
    let est = monte_carlo(trials, seed, |rng| {
        let count = loop {
            let c = sample_poisson_unit(rng);
            if c >= 2 {
                break c;
            }
        };
        let mut y = pi.clone();
        apply_exchanges(&mut y, count, rng);
        inv(&y) >= min_inv
    })?;
    Ok(Measured {
        value: strata + rest * est.value,
        lower: strata + rest * est.lower().max(0.0),
        ci_halfwidth: rest * est.ci_halfwidth,
        trials: est.trials,
        method: Method::MonteCarlo,
    })
}

/// Probability that the gated one-offspring crossover of `u` and `v` satisfies
/// `accept`. Enumerates every cut, or every mask for lengths up to 20;
/// longer uniform crossovers are sampled.
pub fn crossover_acceptance<F>(
    u: &Genotype,
    v: &Genotype,
    spec: &CrossoverSpec,
    accept: F,
    trials: u64,
    seed: u64,
) -> Result<Measured>
where
    F: Fn(&Genotype) -> bool + Sync,
{
    spec.validate()?;
    if u.len() != v.len() || u.representation() != v.representation() {
        return Err(input_err("crossover parents must match in kind and length"));
    }
    let parents = 0.5 * (accept(u) as u8 as f64 + accept(v) as u8 as f64);
    if spec.p_c == 0.0 {
        return Ok(Measured::exact(parents));
    }
    let n = u.len();
    let crossed = match spec.kind {
        CrossoverKind::OnePoint => {
            if n < 2 {
                Measured::exact(parents)
            } else {
                let hits: usize = (1..n)
                    .map(|cut| {
                        let (a, b) = one_point_at(u, v, cut).expect("checked");
                        accept(&a) as usize + accept(&b) as usize
                    })
                    .sum();
                Measured::exact(hits as f64 / (2 * (n - 1)) as f64)
            }
        }
        CrossoverKind::Uniform if n <= MAX_ENUMERATED_MASK_BITS => {
            let hits: usize = (0..1u64 << n)
                .into_par_iter()
                .map(|m| {
                    let (a, b) =
                        uniform_with_mask(u, v, &BitString::from_u64(m, n)).expect("checked");
                    accept(&a) as usize + accept(&b) as usize
                })
                .sum();
            Measured::exact(hits as f64 / (2u64 << n) as f64)
        }
        CrossoverKind::Uniform => {
            let est = monte_carlo(trials, seed, |rng| {
                let mask = BitString::random(n, rng);
                let (a, b) = uniform_with_mask(u, v, &mask).expect("checked");
                if rand::Rng::gen::<bool>(rng) {
                    accept(&a)
                } else {
                    accept(&b)
                }
            })?;
            Measured::from_estimate(est)
        }
    };
    let q = 1.0 - spec.p_c;
    Ok(Measured {
        value: spec.p_c * crossed.value + q * parents,
        lower: spec.p_c * crossed.lower + q * parents,
        ci_halfwidth: spec.p_c * crossed.ci_halfwidth,
        trials: crossed.trials,
        method: crossed.method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_enumeration() {
        for kind in [ProblemKind::OneMax, ProblemKind::LeadingOnes] {
            let problem = ProblemSpec::new(kind, 9).unwrap();
            for bits in [
                "000000000",
                "110100000",
                "111111110",
                "111111111",
                "101010101",
            ] {
                let x: BitString = bits.parse().unwrap();
                for t in 0..=10 {
                    for chi in [0.5, 1.0, 3.0] {
                        let a = bitwise_reach_probability(&problem, chi, &x, t).unwrap();
                        let b = bitwise_reach_enumerated(&problem, chi, &x, t).unwrap();
                        assert!((a - b).abs() < 1e-12, "{kind:?} {bits} t={t}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn no_flip_probability() {
        let problem = ProblemSpec::leading_ones(10);
        let x = BitString::ones(10);
        let p = bitwise_reach_probability(&problem, 1.0, &x, 10).unwrap();
        assert!((p - 0.9f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn exchange_distribution_sums_to_one() {
        for n in 1..=5 {
            let d = exchange_distribution_exact(&Permutation::identity(n)).unwrap();
            let total: f64 = d.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let stay = d
                .iter()
                .find(|(p, _)| *p == Permutation::identity(n))
                .unwrap()
                .1;
            assert!(stay >= (-1.0f64).exp() - 1e-15);
        }
        let d = exchange_distribution_exact(&Permutation::identity(1)).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exchange_strata_bound_exact_value() {
        let problem = ProblemSpec::inv_sorting(7);
        for level in [1, 5, 12, 21] {
            let pi = problem.representative(level).unwrap();
            let pi = pi.as_perm().unwrap();
            let exact = exchange_reach(pi, level as u64, 0.0, 0, 0).unwrap();
            let e = (-1.0f64).exp();
            let base = if inv(pi) >= level as u64 { e } else { 0.0 };
            assert!(exact.value >= base);
        }
    }

    #[test]
    fn exchange_sampled_remainder() {
        let pi = Permutation::reversed(9);
        let m = exchange_reach(&pi, 1, 2.0, 20_000, 3).unwrap();
        assert_eq!(m.method, Method::MonteCarlo);
        assert!(m.lower <= m.value && m.value <= 1.0);
        let cheap = exchange_reach(&pi, 0, 0.1, 20_000, 3).unwrap();
        assert_eq!(cheap.method, Method::LowerBound);
    }

    #[test]
    fn gated_crossover_acceptance() {
        let u: Genotype = "1100".parse::<BitString>().unwrap().into();
        let v: Genotype = "0011".parse::<BitString>().unwrap().into();
        let half = |x: &Genotype| x.as_bits().unwrap().count_ones() >= 2;
        for kind in [CrossoverKind::OnePoint, CrossoverKind::Uniform] {
            let spec = CrossoverSpec::new(kind, 1.0).unwrap();
            let m = crossover_acceptance(&u, &v, &spec, half, 0, 0).unwrap();
            assert!(m.value >= 0.5);
        }
        let first = |x: &Genotype| x.as_bits().unwrap().get(0);
        let gate = CrossoverSpec::new(CrossoverKind::Uniform, 0.0).unwrap();
        assert_eq!(
            crossover_acceptance(&u, &v, &gate, first, 0, 0)
                .unwrap()
                .value,
            0.5
        );
    }
}
