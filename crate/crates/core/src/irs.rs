//! Stabilizer distributions `φ_α` sampled through finite-depth traces.
//!
//! A trace stores the sampled coordinates `x̄` truncated to depth `m`. For
//! `n ≤ m` it determines `Stab(x̄) ∩ G_n` exactly: `g` lies in the stabilizer
//! iff it fixes every coordinate's level-`n` prefix.

use rand::Rng;

use crate::diagram::{BratteliDiagram, FinitePath};
use crate::error::{Error, Result};
use crate::group::{ClopenSet, GroupElement};
use crate::measure::{product_clopen_measure, InvariantMeasure, MultiIndex, PathSampler};
use crate::sampling::{run_workers, Estimate};

/// Extra depth beyond `level(g)` used for χ′ experiments when none is given.
pub const DEFAULT_EXTRA_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTrace {
    labels: Vec<usize>,
    coordinates: Vec<FinitePath>,
    depth: usize,
}

impl StabilizerTrace {
    pub fn new(alpha: &MultiIndex, coordinates: Vec<FinitePath>, depth: usize) -> Result<Self> {
        let labels = alpha.coordinate_labels();
        if labels.len() != coordinates.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for |α| = {}",
                coordinates.len(),
                labels.len()
            )));
        }
        if depth == 0 {
            return Err(Error::InvalidArgument(
                "trace depth must be at least 1".into(),
            ));
        }
        if let Some(p) = coordinates.iter().find(|p| p.level() != depth) {
            return Err(Error::DepthExceeded {
                needed: depth,
                available: p.level(),
            });
        }
        Ok(StabilizerTrace {
            labels,
            coordinates,
            depth,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn coordinates(&self) -> &[FinitePath] {
        &self.coordinates
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth {
            return Err(Error::DepthExceeded {
                needed: level,
                available: self.depth,
            });
        }
        Ok(())
    }

    /// `g ∈ Stab(x̄)`.
    pub fn contains(&self, d: &BratteliDiagram, g: &GroupElement) -> Result<bool> {
        self.check_level(g.level())?;
        let action = g.action(d)?;
        for p in &self.coordinates {
            if !action.fixes(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The trace of `g·Stab(x̄)·g⁻¹ = Stab(g·x̄)`.
    pub fn conjugate(&self, d: &BratteliDiagram, g: &GroupElement) -> Result<StabilizerTrace> {
        self.check_level(g.level())?;
        let action = g.action(d)?;
        let coordinates = self
            .coordinates
            .iter()
            .map(|p| action.apply(p))
            .collect::<Result<_>>()?;
        Ok(StabilizerTrace {
            labels: self.labels.clone(),
            coordinates,
            depth: self.depth,
        })
    }

    /// Equality of the coordinate multisets, grouped by measure label.
    pub fn same_subgroup(&self, other: &StabilizerTrace) -> bool {
        self.depth == other.depth && self.grouped() == other.grouped()
    }

    fn grouped(&self) -> Vec<(usize, &FinitePath)> {
        let mut out: Vec<(usize, &FinitePath)> =
            self.labels.iter().copied().zip(&self.coordinates).collect();
        out.sort();
        out
    }

    /// Every coordinate's cylinder lies inside `a`, so `Stab(x̄)` is normalized by `G∘(A)`.
    pub fn f_membership(&self, d: &BratteliDiagram, a: &ClopenSet) -> Result<bool> {
        self.check_level(a.level())?;
        let index = crate::diagram::PathIndex::new(d, a.level())?;
        for p in &self.coordinates {
            let prefix = p.prefix(a.level());
            let v = prefix.end().expect("level >= 1");
            if !a.contains(v, index.rank(&prefix)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Two distinct same-label coordinates that agree from level `n + 1` on,
    /// ending at the same level-`n` vertex, so some element of `G_n` can swap them.
    pub fn has_collision(&self, n: usize) -> bool {
        let n = n.min(self.depth);
        for i in 0..self.coordinates.len() {
            for j in i + 1..self.coordinates.len() {
                let (a, b) = (&self.coordinates[i], &self.coordinates[j]);
                if self.labels[i] == self.labels[j]
                    && a != b
                    && a.prefix(n).end() == b.prefix(n).end()
                    && a.tail(n) == b.tail(n)
                {
                    return true;
                }
            }
        }
        false
    }
}

/// Draws traces of `φ_α` at a fixed depth.
#[derive(Debug, Clone)]
pub struct TraceSampler {
    alpha: MultiIndex,
    samplers: Vec<Option<PathSampler>>,
    depth: usize,
}

impl TraceSampler {
    pub fn new(
        d: &BratteliDiagram,
        alpha: &MultiIndex,
        measures: &[InvariantMeasure],
        depth: usize,
    ) -> Result<Self> {
        alpha.check_labels(measures.len())?;
        if depth == 0 {
            return Err(Error::InvalidArgument(
                "trace depth must be at least 1".into(),
            ));
        }
        let samplers = alpha
            .exponents()
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                if e > 0 {
                    PathSampler::new(d, &measures[i], depth).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
        Ok(TraceSampler {
            alpha: alpha.clone(),
            samplers,
            depth,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StabilizerTrace> {
        let labels = self.alpha.coordinate_labels();
        let coordinates = labels
            .iter()
            .map(|&i| self.samplers[i].as_ref().expect("label in use").sample(rng))
            .collect::<Result<_>>()?;
        Ok(StabilizerTrace {
            labels,
            coordinates,
            depth: self.depth,
        })
    }
}

pub fn sample_stabilizer<R: Rng + ?Sized>(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    depth: usize,
    rng: &mut R,
) -> Result<StabilizerTrace> {
    TraceSampler::new(d, alpha, measures, depth)?.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub samples: u64,
    pub depth: usize,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiComparison {
    /// Frequency of `g ∈ K`.
    pub chi: Estimate,
    /// Frequency of `gKg⁻¹ = K`.
    pub chi_prime: Estimate,
    /// Frequency of samples with a same-label coordinate collision at `level(g)`.
    pub collision_rate: f64,
    /// Samples where `g ∈ K` but `gKg⁻¹ ≠ K`; always 0.
    pub dominance_violations: u64,
    /// Samples where the two events differ.
    pub disagreements: u64,
    /// Disagreeing samples without a collision; always 0.
    pub unexplained: u64,
}

#[derive(Default)]
struct Tally {
    chi: u64,
    chi_prime: u64,
    collisions: u64,
    violations: u64,
    disagreements: u64,
    unexplained: u64,
}

/// Estimates `χ(g)` and `χ′(g)` on the same sampled traces.
pub fn compare_chi(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    g: &GroupElement,
    config: SampleConfig,
) -> Result<ChiComparison> {
    if config.depth < g.level() {
        return Err(Error::DepthExceeded {
            needed: g.level(),
            available: config.depth,
        });
    }
    let sampler = TraceSampler::new(d, alpha, measures, config.depth)?;
    let action = g.action(d)?;
    let parts = run_workers(config.seed, config.workers, config.samples, |rng, share| {
        let mut t = Tally::default();
        for _ in 0..share {
            let trace = sampler.sample(rng)?;
            let mut inside = true;
            for p in trace.coordinates() {
                if !action.fixes(p)? {
                    inside = false;
                    break;
                }
            }
            let moved = StabilizerTrace {
                labels: trace.labels.clone(),
                coordinates: trace
                    .coordinates
                    .iter()
                    .map(|p| action.apply(p))
                    .collect::<Result<_>>()?,
                depth: trace.depth,
            };
            let normal = moved.same_subgroup(&trace);
            let collision = trace.has_collision(g.level());
            t.chi += u64::from(inside);
            t.chi_prime += u64::from(normal);
            t.collisions += u64::from(collision);
            t.violations += u64::from(inside && !normal);
            t.disagreements += u64::from(inside != normal);
            t.unexplained += u64::from(inside != normal && !collision);
        }
        Ok(t)
    })?;
    let t = parts.into_iter().fold(Tally::default(), |a, b| Tally {
        chi: a.chi + b.chi,
        chi_prime: a.chi_prime + b.chi_prime,
        collisions: a.collisions + b.collisions,
        violations: a.violations + b.violations,
        disagreements: a.disagreements + b.disagreements,
        unexplained: a.unexplained + b.unexplained,
    });
    let n = config.samples;
    Ok(ChiComparison {
        chi: Estimate::from_count(t.chi, n),
        chi_prime: Estimate::from_count(t.chi_prime, n),
        collision_rate: t.collisions as f64 / n as f64,
        dominance_violations: t.violations,
        disagreements: t.disagreements,
        unexplained: t.unexplained,
    })
}

/// Empirical `Prob(g ∈ K)` for `K ~ φ_α`.
pub fn estimate_chi(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    g: &GroupElement,
    config: SampleConfig,
) -> Result<Estimate> {
    if config.depth < g.level() {
        return Err(Error::DepthExceeded {
            needed: g.level(),
            available: config.depth,
        });
    }
    let sampler = TraceSampler::new(d, alpha, measures, config.depth)?;
    let action = g.action(d)?;
    let counts = run_workers(config.seed, config.workers, config.samples, |rng, share| {
        let mut hits = 0u64;
        for _ in 0..share {
            let trace = sampler.sample(rng)?;
            let mut inside = true;
            for p in trace.coordinates() {
                if !action.fixes(p)? {
                    inside = false;
                    break;
                }
            }
            hits += u64::from(inside);
        }
        Ok(hits)
    })?;
    Ok(Estimate::from_count(counts.iter().sum(), config.samples))
}

/// Empirical `Prob(gKg⁻¹ = K)` for `K ~ φ_α`.
pub fn estimate_chi_prime(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    g: &GroupElement,
    config: SampleConfig,
) -> Result<Estimate> {
    Ok(compare_chi(d, alpha, measures, g, config)?.chi_prime)
}

/// Empirical `φ_α(𝓕(A))`; the exact value is `∏ μ_i(A)^{α_i}`.
pub fn empirical_f_measure(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    a: &ClopenSet,
    config: SampleConfig,
) -> Result<Estimate> {
    if config.depth < a.level() {
        return Err(Error::DepthExceeded {
            needed: a.level(),
            available: config.depth,
        });
    }
    let sampler = TraceSampler::new(d, alpha, measures, config.depth)?;
    let counts = run_workers(config.seed, config.workers, config.samples, |rng, share| {
        let mut hits = 0u64;
        for _ in 0..share {
            hits += u64::from(sampler.sample(rng)?.f_membership(d, a)?);
        }
        Ok(hits)
    })?;
    Ok(Estimate::from_count(counts.iter().sum(), config.samples))
}

/// `∏ μ_i(A)^{α_i}` as a float, for reporting next to estimates.
pub fn f_measure_reference(
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    a: &ClopenSet,
) -> Result<f64> {
    Ok(product_clopen_measure(measures, alpha, a)?.to_f64())
}
