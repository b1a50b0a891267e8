//! One-point and uniform crossover, the one-offspring variant and the p_c gate.
//!
//! On bitstrings these are the textbook operators. On permutations the same
//! kinds are realised as order crossovers: the first child keeps the first
//! parent's genes at the cut prefix (one-point) or the mask positions
//! (uniform) and fills the remaining positions with the missing values in the
//! order they appear in the second parent; the second child swaps the roles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SpecString;
use crate::error::{config_err, input_err, Error, Result};
use crate::genotype::{BitString, Genotype, Permutation};

/// Largest bitstring length whose uniform masks are enumerated.
pub const MAX_ENUMERATED_MASK_BITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    OnePoint,
    Uniform,
}

impl CrossoverKind {
    pub fn name(self) -> &'static str {
        match self {
            CrossoverKind::OnePoint => "one_point",
            CrossoverKind::Uniform => "uniform",
        }
    }
}

impl FromStr for CrossoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one_point" | "onepoint" => Ok(CrossoverKind::OnePoint),
            "uniform" => Ok(CrossoverKind::Uniform),
            other => Err(config_err(format!(
                "unknown crossover {other:?}; expected one_point or uniform"
            ))),
        }
    }
}

/// Crossover kind plus the probability `p_c` of applying it at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverSpec {
    pub kind: CrossoverKind,
    pub p_c: f64,
}

impl CrossoverSpec {
    pub fn new(kind: CrossoverKind, p_c: f64) -> Result<Self> {
        let spec = CrossoverSpec { kind, p_c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_c) {
            return Err(config_err(format!(
                "crossover probability pc must lie in [0,1], got {}",
                self.p_c
            )));
        }
        Ok(())
    }
}

impl fmt::Display for CrossoverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:pc={}", self.kind.name(), self.p_c)
    }
}

impl FromStr for CrossoverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = SpecString::parse(s)?;
        let kind = spec.name.parse()?;
        spec.allow_only(&["pc"])?;
        let p_c = spec.optional_f64("pc")?.unwrap_or(1.0);
        CrossoverSpec::new(kind, p_c)
    }
}

fn check_pair(u: &Genotype, v: &Genotype) -> Result<()> {
    if u.representation() != v.representation() {
        return Err(Error::Representation(
            "crossover parents have different representations".into(),
        ));
    }
    if u.len() != v.len() {
        return Err(input_err(format!(
            "crossover parents differ in length ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    Ok(())
}

fn order_fill(keep: &[u32], kept: &[bool], donor: &[u32]) -> Permutation {
    let n = keep.len();
    let mut used = vec![false; n];
    for (i, &k) in kept.iter().enumerate() {
        if k {
            used[keep[i] as usize] = true;
        }
    }
    let mut fill = donor.iter().copied().filter(|&g| !used[g as usize]);
    let child = (0..n)
        .map(|i| {
            if kept[i] {
                keep[i]
            } else {
                fill.next().expect("donor supplies every missing value")
            }
        })
        .collect();
    Permutation::from_zero_based(child).expect("order crossover yields a permutation")
}

fn bits_cut(u: &BitString, v: &BitString, cut: usize) -> BitString {
    let mask = BitString::prefix_ones(u.len(), cut);
    u.blend(v, &mask)
}

/// Both children of a one-point crossover that takes the first `cut` positions
/// from one parent and the rest from the other.
pub fn one_point_at(u: &Genotype, v: &Genotype, cut: usize) -> Result<(Genotype, Genotype)> {
    check_pair(u, v)?;
    if cut > u.len() {
        return Err(input_err(format!("cut {cut} beyond length {}", u.len())));
    }
    Ok(match (u, v) {
        (Genotype::Bits(a), Genotype::Bits(b)) => {
            (bits_cut(a, b, cut).into(), bits_cut(b, a, cut).into())
        }
        (Genotype::Perm(a), Genotype::Perm(b)) => {
            let kept: Vec<bool> = (0..a.len()).map(|i| i < cut).collect();
            (
                order_fill(a.as_slice(), &kept, b.as_slice()).into(),
                order_fill(b.as_slice(), &kept, a.as_slice()).into(),
            )
        }
        _ => unreachable!("checked by check_pair"),
    })
}

/// Both children of a uniform crossover with the given mask (set bit = first parent).
pub fn uniform_with_mask(
    u: &Genotype,
    v: &Genotype,
    mask: &BitString,
) -> Result<(Genotype, Genotype)> {
    check_pair(u, v)?;
    if mask.len() != u.len() {
        return Err(input_err("mask length differs from parent length"));
    }
    Ok(match (u, v) {
        (Genotype::Bits(a), Genotype::Bits(b)) => {
            (a.blend(b, mask).into(), b.blend(a, mask).into())
        }
        (Genotype::Perm(a), Genotype::Perm(b)) => {
            let kept: Vec<bool> = mask.iter().collect();
            (
                order_fill(a.as_slice(), &kept, b.as_slice()).into(),
                order_fill(b.as_slice(), &kept, a.as_slice()).into(),
            )
        }
        _ => unreachable!("checked by check_pair"),
    })
}

/// Interior cut in `1..n`; `None` when `n < 2` and no interior boundary exists.
fn draw_cut<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<usize> {
    (n >= 2).then(|| rng.gen_range(1..n))
}

/// Standard two-offspring crossover.
pub fn crossover_two_offspring<R: Rng + ?Sized>(
    kind: CrossoverKind,
    u: &Genotype,
    v: &Genotype,
    rng: &mut R,
) -> Result<(Genotype, Genotype)> {
    check_pair(u, v)?;
    match kind {
        CrossoverKind::OnePoint => match draw_cut(u.len(), rng) {
            Some(cut) => one_point_at(u, v, cut),
            None => Ok((u.clone(), v.clone())),
        },
        CrossoverKind::Uniform => uniform_with_mask(u, v, &BitString::random(u.len(), rng)),
    }
}

/// Two-offspring crossover followed by a uniform choice of one child.
pub fn one_offspring_crossover<R: Rng + ?Sized>(
    kind: CrossoverKind,
    u: &Genotype,
    v: &Genotype,
    rng: &mut R,
) -> Result<Genotype> {
    check_pair(u, v)?;
    Ok(one_offspring_unchecked(kind, u, v, rng))
}

#[inline]
fn one_offspring_unchecked<R: Rng + ?Sized>(
    kind: CrossoverKind,
    u: &Genotype,
    v: &Genotype,
    rng: &mut R,
) -> Genotype {
    match (kind, u, v) {
        // only the chosen child is built; the draws match crossover_two_offspring + coin
        (CrossoverKind::Uniform, Genotype::Bits(a), Genotype::Bits(b)) => {
            let mask = BitString::random(a.len(), rng);
            if rng.gen::<bool>() {
                a.blend(b, &mask).into()
            } else {
                b.blend(a, &mask).into()
            }
        }
        (CrossoverKind::OnePoint, Genotype::Bits(a), Genotype::Bits(b)) => {
            match draw_cut(a.len(), rng) {
                Some(cut) => {
                    if rng.gen::<bool>() {
                        bits_cut(a, b, cut).into()
                    } else {
                        bits_cut(b, a, cut).into()
                    }
                }
                None => {
                    if rng.gen::<bool>() {
                        u.clone()
                    } else {
                        v.clone()
                    }
                }
            }
        }
        _ => {
            let (x1, x2) = crossover_two_offspring(kind, u, v, rng).expect("parents checked");
            if rng.gen::<bool>() {
                x1
            } else {
                x2
            }
        }
    }
}

/// With probability `p_c` applies one-offspring crossover, otherwise returns
/// `u` or `v`, each with probability 1/2.
pub fn gated_crossover<R: Rng + ?Sized>(
    u: &Genotype,
    v: &Genotype,
    spec: &CrossoverSpec,
    rng: &mut R,
) -> Result<Genotype> {
    check_pair(u, v)?;
    Ok(gated_unchecked(u, v, spec, rng))
}

#[inline]
pub(crate) fn gated_unchecked<R: Rng + ?Sized>(
    u: &Genotype,
    v: &Genotype,
    spec: &CrossoverSpec,
    rng: &mut R,
) -> Genotype {
    let apply = spec.p_c >= 1.0 || (spec.p_c > 0.0 && rng.gen::<f64>() < spec.p_c);
    if apply {
        one_offspring_unchecked(spec.kind, u, v, rng)
    } else if rng.gen::<bool>() {
        u.clone()
    } else {
        v.clone()
    }
}

/// Every equally likely two-offspring outcome of `kind` on `(u, v)`.
///
/// One-point: the `n-1` interior cuts. Uniform: all `2^n` masks, for
/// `n <= MAX_ENUMERATED_MASK_BITS`.
pub fn enumerate_two_offspring(
    kind: CrossoverKind,
    u: &Genotype,
    v: &Genotype,
) -> Result<Vec<(Genotype, Genotype)>> {
    check_pair(u, v)?;
    let n = u.len();
    match kind {
        CrossoverKind::OnePoint => {
            if n < 2 {
                return Ok(vec![(u.clone(), v.clone())]);
            }
            (1..n).map(|cut| one_point_at(u, v, cut)).collect()
        }
        CrossoverKind::Uniform => {
            if n > MAX_ENUMERATED_MASK_BITS {
                return Err(Error::TooLarge {
                    what: "uniform crossover masks",
                    size: 1u128 << n,
                    limit: 1u128 << MAX_ENUMERATED_MASK_BITS,
                });
            }
            (0..1u64 << n)
                .map(|m| uniform_with_mask(u, v, &BitString::from_u64(m, n)))
                .collect()
        }
    }
}

/// Exact probability that the gated one-offspring crossover of `(u, v)`
/// satisfies `accept`, by enumerating every outcome.
pub fn exact_gated_probability<F>(
    u: &Genotype,
    v: &Genotype,
    spec: &CrossoverSpec,
    mut accept: F,
) -> Result<f64>
where
    F: FnMut(&Genotype) -> bool,
{
    let parents = 0.5 * (accept(u) as u8 as f64 + accept(v) as u8 as f64);
    if spec.p_c == 0.0 {
        return Ok(parents);
    }
    let outcomes = enumerate_two_offspring(spec.kind, u, v)?;
    let hits: usize = outcomes
        .iter()
        .map(|(a, b)| accept(a) as usize + accept(b) as usize)
        .sum();
    let crossed = hits as f64 / (2 * outcomes.len()) as f64;
    Ok(spec.p_c * crossed + (1.0 - spec.p_c) * parents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn bits(s: &str) -> Genotype {
        Genotype::Bits(s.parse().unwrap())
    }

    #[test]
    fn one_point_swap_definition() {
        let (a, b) = one_point_at(&bits("111"), &bits("000"), 1).unwrap();
        assert_eq!(a, bits("100"));
        assert_eq!(b, bits("011"));
    }

    #[test]
    fn identical_parents_are_fixed() {
        let mut rng = seeded(3);
        let u = bits("101");
        for kind in [CrossoverKind::OnePoint, CrossoverKind::Uniform] {
            for _ in 0..100 {
                let (a, b) = crossover_two_offspring(kind, &u, &u, &mut rng).unwrap();
                assert_eq!((&a, &b), (&u, &u));
                assert_eq!(one_offspring_crossover(kind, &u, &u, &mut rng).unwrap(), u);
            }
        }
        let spec = CrossoverSpec::new(CrossoverKind::Uniform, 0.5).unwrap();
        for _ in 0..100 {
            assert_eq!(gated_crossover(&u, &u, &spec, &mut rng).unwrap(), u);
        }
    }

    #[test]
    fn one_offspring_uniform_on_two_bits_is_uniform() {
        // 4 masks x 2 children: each of 00,01,10,11 appears twice
        let outcomes =
            enumerate_two_offspring(CrossoverKind::Uniform, &bits("10"), &bits("01")).unwrap();
        let mut counts = std::collections::HashMap::new();
        for (a, b) in &outcomes {
            *counts.entry(a.to_string()).or_insert(0) += 1;
            *counts.entry(b.to_string()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 4);
        assert!(counts.values().all(|&c| c == 2));

        let mut rng = seeded(11);
        let trials = 40_000;
        let mut sampled = std::collections::HashMap::new();
        for _ in 0..trials {
            let x =
                one_offspring_crossover(CrossoverKind::Uniform, &bits("10"), &bits("01"), &mut rng)
                    .unwrap();
            *sampled.entry(x.to_string()).or_insert(0usize) += 1;
        }
        let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
        for c in sampled.values() {
            assert!((*c as f64 / trials as f64 - 0.25).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn closed_gate_returns_a_parent() {
        let spec = CrossoverSpec::new(CrossoverKind::OnePoint, 0.0).unwrap();
        let (u, v) = (bits("1100"), bits("0011"));
        let mut rng = seeded(4);
        let trials = 20_000;
        let mut v_count = 0;
        for _ in 0..trials {
            let x = gated_crossover(&u, &v, &spec, &mut rng).unwrap();
            assert!(x == u || x == v);
            v_count += (x == v) as usize;
        }
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!((v_count as f64 / trials as f64 - 0.5).abs() < 4.0 * sigma);
        let p = exact_gated_probability(&u, &v, &spec, |x| *x == v).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn permutation_order_crossover_is_valid() {
        let u = Genotype::Perm(Permutation::from_one_based(&[1, 2, 3, 4, 5]).unwrap());
        let v = Genotype::Perm(Permutation::from_one_based(&[5, 3, 1, 4, 2]).unwrap());
        let (a, b) = one_point_at(&u, &v, 2).unwrap();
        assert_eq!(a.to_string(), "(1,2,5,3,4)");
        assert_eq!(b.to_string(), "(5,3,1,2,4)");
        let mut rng = seeded(9);
        for kind in [CrossoverKind::OnePoint, CrossoverKind::Uniform] {
            for _ in 0..200 {
                let (a, b) = crossover_two_offspring(kind, &u, &v, &mut rng).unwrap();
                assert!(a.as_perm().unwrap().is_valid());
                assert!(b.as_perm().unwrap().is_valid());
            }
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let mut rng = seeded(0);
        assert!(crossover_two_offspring(
            CrossoverKind::Uniform,
            &bits("10"),
            &bits("101"),
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn spec_strings() {
        let s: CrossoverSpec = "uniform:pc=1.0".parse().unwrap();
        assert_eq!(s, CrossoverSpec::new(CrossoverKind::Uniform, 1.0).unwrap());
        assert_eq!(s.to_string().parse::<CrossoverSpec>().unwrap(), s);
        assert!("uniform:pc=1.5".parse::<CrossoverSpec>().is_err());
        assert_eq!("one_point".parse::<CrossoverSpec>().unwrap().p_c, 1.0);
        assert!("two_point:pc=1".parse::<CrossoverSpec>().is_err());
    }
}
