//! The `verify` suite: fixed-setup checks of the identities the library is
//! built to reproduce.

use std::fmt;
use std::str::FromStr;

use crate::character::{
    average_profile, check_central, check_psd, evaluate, verify_iep, CharacterSpec, PSD_TOLERANCE,
};
use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};
use crate::group::{
    generated_subgroup_order, ClopenSet, GroupElement, YoungSubgroupDescriptor, DEFAULT_CLOSURE_CAP,
};
use crate::hermite::check_hermite;
use crate::irs::{compare_chi, SampleConfig, DEFAULT_EXTRA_DEPTH};
use crate::measure::{stationary_measure, InvariantMeasure, MultiIndex};
use crate::sampling::worker_rng;
use crate::scalar::{Arithmetic, Num};

pub const HERMITE_MAX_LEVEL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Hermite,
    Monotone,
    Iep,
    Psd,
    Generation,
    Chi,
    All,
}

impl Check {
    pub const EACH: [Check; 6] = [
        Check::Hermite,
        Check::Monotone,
        Check::Iep,
        Check::Psd,
        Check::Generation,
        Check::Chi,
    ];
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hermite" => Check::Hermite,
            "monotone" => Check::Monotone,
            "iep" => Check::Iep,
            "psd" => Check::Psd,
            "generation" => Check::Generation,
            "chi" => Check::Chi,
            "all" => Check::All,
            other => {
                return Err(Error::Parse(format!(
                    "unknown check {other:?} (expected hermite, monotone, iep, psd, generation, chi or all)"
                )))
            }
        })
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Check::Hermite => "hermite",
            Check::Monotone => "monotone",
            Check::Iep => "iep",
            Check::Psd => "psd",
            Check::Generation => "generation",
            Check::Chi => "chi",
            Check::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub workers: usize,
    pub samples: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            workers: 4,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub check: Check,
    pub case: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(
    check: Check,
    case: impl Into<String>,
    passed: bool,
    detail: impl Into<String>,
) -> Outcome {
    Outcome {
        check,
        case: case.into(),
        passed,
        detail: detail.into(),
    }
}

pub fn run(which: Check, config: VerifyConfig) -> Result<Vec<Outcome>> {
    let checks: Vec<Check> = if which == Check::All {
        Check::EACH.to_vec()
    } else {
        vec![which]
    };
    let mut out = Vec::new();
    for c in checks {
        out.extend(match c {
            Check::Hermite => hermite()?,
            Check::Monotone => monotone()?,
            Check::Iep => iep()?,
            Check::Psd => psd(config)?,
            Check::Generation => generation()?,
            Check::Chi => chi(config)?,
            Check::All => unreachable!("expanded above"),
        });
    }
    Ok(out)
}

fn odometer(depth: usize) -> Result<(BratteliDiagram, Vec<InvariantMeasure>)> {
    let d = BratteliDiagram::odometer(2);
    let mu = stationary_measure(&d, depth, Arithmetic::Rational)?;
    Ok((d, vec![mu]))
}

fn hermite() -> Result<Vec<Outcome>> {
    let report = check_hermite(&BratteliDiagram::polynomial_example(), HERMITE_MAX_LEVEL)?;
    let detail = match report.matching_bottom.as_slice() {
        [] => "no vertex labeling matches".to_string(),
        [b] => format!("bottom vertex = v{b}, top vertex = v{}", 1 - b),
        _ => "both labelings match".to_string(),
    };
    Ok(vec![outcome(
        Check::Hermite,
        format!("polynomial example n=2..{HERMITE_MAX_LEVEL}"),
        report.passes(),
        detail,
    )])
}

fn monotone() -> Result<Vec<Outcome>> {
    let (d, ms) = odometer(6)?;
    let alpha = MultiIndex::single(1);
    let levels: Vec<usize> = (1..=6).collect();
    let mut out = Vec::new();

    let empty = ClopenSet::empty(&d, 1)?;
    let p = average_profile(&d, &empty, &alpha, &ms, &levels, None)?;
    let values: Vec<String> = p.rows.iter().map(|r| r.value.to_string()).collect();
    out.push(outcome(
        Check::Monotone,
        "odometer2 A=empty alpha=(1) levels 1..6",
        p.passes() && p.strictly_decreasing(),
        values.join(" "),
    ));

    let cylinder = ClopenSet::from_labels(&d, 1, [(0, 0)])?;
    let p = average_profile(&d, &cylinder, &alpha, &ms, &levels, None)?;
    let last = &p.rows.last().expect("six levels").value;
    let close = last - &p.floor <= Num::ratio(1, 32);
    let values: Vec<String> = p.rows.iter().map(|r| r.value.to_string()).collect();
    out.push(outcome(
        Check::Monotone,
        "odometer2 A=level-1 cylinder alpha=(1) levels 1..6",
        p.passes() && close,
        format!("{} (floor {})", values.join(" "), p.floor),
    ));
    Ok(out)
}

fn iep() -> Result<Vec<Outcome>> {
    let (d, ms) = odometer(2)?;
    let mut out = Vec::new();
    for p in 1..=2 {
        for k in 1..=2 {
            let r = verify_iep(&d, &MultiIndex::single(k), &ms, 2, p)?;
            out.push(outcome(
                Check::Iep,
                format!("odometer2 n=2 p={p} alpha=({k})"),
                r.holds(),
                format!(
                    "lhs={} rhs={} residual={} terms={} pairwise_hypothesis={}",
                    r.lhs, r.rhs, r.residual, r.terms, r.pairwise_hypothesis
                ),
            ));
        }
    }
    Ok(out)
}

fn psd(config: VerifyConfig) -> Result<Vec<Outcome>> {
    let (d, ms) = odometer(3)?;
    let mut rng = worker_rng(config.seed, 0);
    let g3 = YoungSubgroupDescriptor::full(&d, 3)?;
    let g2 = YoungSubgroupDescriptor::full(&d, 2)?;
    let specs = [
        CharacterSpec::Alpha(MultiIndex::single(1)),
        CharacterSpec::Alpha(MultiIndex::single(2)),
        CharacterSpec::Regular,
    ];
    let mut pairs = Vec::with_capacity(50);
    for i in 0..50 {
        let a = g3.random_element(&d, &mut rng)?;
        let b = if i % 2 == 0 {
            g2.random_element(&d, &mut rng)?
        } else {
            g3.random_element(&d, &mut rng)?
        };
        pairs.push((a, b));
    }
    let elements = (0..10)
        .map(|_| g3.random_element(&d, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let e = GroupElement::identity(&d, 1)?;

    let mut out = Vec::new();
    for spec in &specs {
        let at_e = evaluate(spec, &e, &ms)?;
        let central = check_central(&d, spec, &pairs, &ms)?;
        let min = check_psd(&d, spec, &elements, &ms)?;
        out.push(outcome(
            Check::Psd,
            spec.name(),
            at_e == Num::integer(1) && central.passes() && min >= -PSD_TOLERANCE,
            format!(
                "chi(e)={at_e} central_max_diff={} lambda_min={min:.3e}",
                central.max_difference
            ),
        ));
    }
    Ok(out)
}

/// Whether every vertex's path set meets `C∖D`, `C∩D` and `D∖C`.
pub fn orbit_hypothesis(d: &BratteliDiagram, c: &ClopenSet, dd: &ClopenSet) -> Result<bool> {
    let parts = [
        c.difference(d, dd)?,
        c.intersection(d, dd)?,
        dd.difference(d, c)?,
    ];
    Ok((0..parts[0].vertex_count()).all(|v| parts.iter().all(|p| p.count_at(v) > 0)))
}

fn generation() -> Result<Vec<Outcome>> {
    let d = BratteliDiagram::odometer(2);
    let cases = [
        (2, vec![0, 1, 2], vec![1, 2, 3]),
        (3, vec![0, 1, 2, 3, 4, 5], vec![2, 3, 4, 5, 6, 7]),
        (3, vec![0, 1, 2, 3], vec![3, 4, 5]),
    ];
    let mut out = Vec::new();
    for (n, c, dd) in cases {
        let cs = ClopenSet::from_labels(&d, n, c.iter().map(|&l| (0, l)))?;
        let ds = ClopenSet::from_labels(&d, n, dd.iter().map(|&l| (0, l)))?;
        let hypothesis = orbit_hypothesis(&d, &cs, &ds)?;
        let mut gens = YoungSubgroupDescriptor::local_subgroup(&d, &cs, n)?.generators(&d)?;
        gens.extend(YoungSubgroupDescriptor::local_subgroup(&d, &ds, n)?.generators(&d)?);
        let generated = generated_subgroup_order(&d, &gens, n, DEFAULT_CLOSURE_CAP)?;
        let expected = YoungSubgroupDescriptor::local_subgroup(&d, &cs.union(&d, &ds)?, n)?.order();
        out.push(outcome(
            Check::Generation,
            format!("odometer2 n={n} C={cs} D={ds}"),
            !hypothesis || generated == expected,
            format!("generated={generated} expected={expected} hypothesis={hypothesis}"),
        ));
    }
    Ok(out)
}

fn chi(config: VerifyConfig) -> Result<Vec<Outcome>> {
    let (d, ms) = odometer(8)?;
    let cases = [
        ("level=2; v0:(0 1)", 2),
        ("level=3; v0:(0 1)", 2),
        ("level=2; v0:(0 1 2)", 1),
    ];
    let mut out = Vec::new();
    for (text, k) in cases {
        let g = GroupElement::parse(&d, text)?;
        let alpha = MultiIndex::single(k);
        let exact = evaluate(&CharacterSpec::Alpha(alpha.clone()), &g, &ms)?;
        let cfg = SampleConfig {
            samples: config.samples,
            depth: g.level() + DEFAULT_EXTRA_DEPTH,
            seed: config.seed,
            workers: config.workers,
        };
        let c = compare_chi(&d, &alpha, &ms, &g, cfg)?;
        let p0 = exact.to_f64();
        let se = (p0 * (1.0 - p0) / config.samples as f64).sqrt();
        let chi_ok = (c.chi.mean - p0).abs() <= 3.0 * se;
        let prime_ok = c.dominance_violations == 0
            && c.unexplained == 0
            && (c.chi_prime.mean - c.chi.mean).abs() <= 3.0 * c.chi.std_err + c.collision_rate;
        out.push(outcome(
            Check::Chi,
            format!("odometer2 alpha=({k}) g={g}"),
            chi_ok && prime_ok,
            format!(
                "exact={exact} chi={} chi_prime={} se={se:.2e} collision_rate={}",
                c.chi.mean, c.chi_prime.mean, c.collision_rate
            ),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_checks() {
        for c in Check::EACH {
            assert_eq!(c.to_string().parse::<Check>().unwrap(), c);
        }
        assert!("bogus".parse::<Check>().is_err());
    }

    #[test]
    fn deterministic_checks_pass() {
        for c in [
            Check::Hermite,
            Check::Monotone,
            Check::Iep,
            Check::Generation,
        ] {
            let r = run(c, VerifyConfig::default()).unwrap();
            assert!(r.iter().all(|o| o.passed), "{r:?}");
        }
    }

    #[test]
    fn generation_hypothesis_flag() {
        let d = BratteliDiagram::odometer(2);
        let c = ClopenSet::from_labels(&d, 2, [(0, 0), (0, 1)]).unwrap();
        let dd = ClopenSet::from_labels(&d, 2, [(0, 1), (0, 2)]).unwrap();
        assert!(orbit_hypothesis(&d, &c, &dd).unwrap());
        let disjoint = ClopenSet::from_labels(&d, 2, [(0, 3)]).unwrap();
        assert!(!orbit_hypothesis(&d, &c, &disjoint).unwrap());
    }
}
