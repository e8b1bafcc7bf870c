//! Characters `χ_α`, `χ_reg` and their combinations; axiom checks; ergodic
//! averages of fixed-point measures over pointwise stabilizers; the
//! inclusion-exclusion identity over unions of cylinder tuples.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigUint;
use num_traits::One;

use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};
use crate::group::{ClopenSet, GroupElement, YoungSubgroupDescriptor};
use crate::measure::{product_clopen_measure, InvariantMeasure, MultiIndex};
use crate::sampling::{run_workers, Estimate};
use crate::scalar::{Arithmetic, Num};

pub const PSD_TOLERANCE: f64 = 1e-9;
pub const FLOAT_IDENTITY_TOLERANCE: f64 = 1e-9;
pub const CENTRAL_FLOAT_TOLERANCE: f64 = 1e-12;
pub const MAX_GRAM_SIZE: usize = 50;
pub const EXACT_AVERAGE_MAX_COORDINATES: usize = 8;
pub const EXACT_AVERAGE_TERM_CAP: u64 = 1_000_000;
pub const IEP_TERM_CAP: usize = 1_000_000;
pub const IEP_MAX_FAMILY: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum CharacterSpec {
    Alpha(MultiIndex),
    Regular,
    Combination(Vec<(Num, CharacterSpec)>),
}

impl CharacterSpec {
    /// A convex combination; weights must be nonnegative and sum to 1.
    pub fn combination(parts: Vec<(Num, CharacterSpec)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("empty combination".into()));
        }
        if parts.iter().any(|(w, _)| w.is_negative()) {
            return Err(Error::InvalidArgument("negative combination weight".into()));
        }
        let total: Num = parts.iter().map(|(w, _)| w.clone()).sum();
        let one = Num::one(Arithmetic::Rational);
        let ok = if total.is_exact() {
            total == one
        } else {
            total.distance(&one) <= FLOAT_IDENTITY_TOLERANCE
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "combination weights sum to {total}, not 1"
            )));
        }
        Ok(CharacterSpec::Combination(parts))
    }

    pub fn name(&self) -> String {
        match self {
            CharacterSpec::Alpha(a) => format!("alpha{a}"),
            CharacterSpec::Regular => "regular".into(),
            CharacterSpec::Combination(parts) => parts
                .iter()
                .map(|(w, s)| format!("{w}*{}", s.name()))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

/// `χ(g)`. `χ_α(g) = ∏ μ_i(Fix g)^{α_i}`, `χ_reg` is the indicator of the identity.
pub fn evaluate(
    spec: &CharacterSpec,
    g: &GroupElement,
    measures: &[InvariantMeasure],
) -> Result<Num> {
    match spec {
        CharacterSpec::Alpha(alpha) => g.fix_measure_product(measures, alpha),
        CharacterSpec::Regular => Ok(if g.is_identity() {
            Num::one(Arithmetic::Rational)
        } else {
            Num::zero(Arithmetic::Rational)
        }),
        CharacterSpec::Combination(parts) => {
            let mut acc = Num::zero(Arithmetic::Rational);
            for (w, s) in parts {
                acc = acc + w * evaluate(s, g, measures)?;
            }
            Ok(acc)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralReport {
    pub pairs: usize,
    pub max_difference: f64,
    /// Every value was exact and every difference exactly zero.
    pub exact_zero: bool,
    pub all_exact: bool,
}

impl CentralReport {
    pub fn passes(&self) -> bool {
        if self.all_exact {
            self.exact_zero
        } else {
            self.max_difference <= CENTRAL_FLOAT_TOLERANCE
        }
    }
}

/// `|χ(ab) − χ(ba)|` over the supplied pairs.
pub fn check_central(
    d: &BratteliDiagram,
    spec: &CharacterSpec,
    pairs: &[(GroupElement, GroupElement)],
    measures: &[InvariantMeasure],
) -> Result<CentralReport> {
    let mut report = CentralReport {
        pairs: pairs.len(),
        max_difference: 0.0,
        exact_zero: true,
        all_exact: true,
    };
    for (a, b) in pairs {
        let ab = evaluate(spec, &a.compose(d, b)?, measures)?;
        let ba = evaluate(spec, &b.compose(d, a)?, measures)?;
        let diff = &ab - &ba;
        report.all_exact &= diff.is_exact();
        report.exact_zero &= diff.is_exact() && diff.is_zero();
        report.max_difference = report.max_difference.max(diff.abs().to_f64());
    }
    Ok(report)
}

/// Smallest eigenvalue of the Gram matrix `χ(g_i g_j⁻¹)`.
pub fn check_psd(
    d: &BratteliDiagram,
    spec: &CharacterSpec,
    elements: &[GroupElement],
    measures: &[InvariantMeasure],
) -> Result<f64> {
    let m = elements.len();
    if m == 0 || m > MAX_GRAM_SIZE {
        return Err(Error::InvalidArgument(format!(
            "Gram matrix needs 1..={MAX_GRAM_SIZE} elements, got {m}"
        )));
    }
    let inverses: Vec<GroupElement> = elements.iter().map(GroupElement::inverse).collect();
    let mut values = vec![vec![Num::zero(Arithmetic::Rational); m]; m];
    for i in 0..m {
        for j in 0..m {
            values[i][j] = evaluate(spec, &elements[i].compose(d, &inverses[j])?, measures)?;
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (&values[i][j], &values[j][i]);
            let symmetric = if a.is_exact() && b.is_exact() {
                a == b
            } else {
                a.distance(b) <= CENTRAL_FLOAT_TOLERANCE
            };
            if !symmetric {
                return Err(Error::NonSymmetric {
                    row: i,
                    col: j,
                    a: a.to_f64(),
                    b: b.to_f64(),
                });
            }
        }
    }
    let gram = DMatrix::from_fn(m, m, |i, j| values[i][j].to_f64());
    Ok(SymmetricEigen::new(gram).eigenvalues.min())
}

/// Restricted growth strings of length `k`: every set partition of `0..k` once.
fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, blocks: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=blocks {
            prefix.push(b);
            go(prefix, blocks.max(b + 1), k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(k), 0, k, &mut out);
    out
}

fn falling(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    ((n - k + 1)..=n).fold(BigUint::one(), |acc, x| acc * x)
}

/// `(1/|H|) Σ_{g∈H} ∏_i μ_i(Fix g)^{α_i}` for a Young subgroup `H`.
///
/// Sums over set partitions of the coordinates (which coordinates share a
/// path) and over the vertex and fixed/free class of each block. A block
/// structure with `d_v` distinct free paths at `v` is fixed by a uniform
/// element with probability `∏_v (free_v − d_v)!/free_v!`.
pub fn exact_average(
    desc: &YoungSubgroupDescriptor,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
) -> Result<Num> {
    alpha.check_labels(measures.len())?;
    let labels = alpha.coordinate_labels();
    let k = labels.len();
    if k == 0 {
        return Ok(Num::one(Arithmetic::Rational));
    }
    if k > EXACT_AVERAGE_MAX_COORDINATES {
        return Err(Error::CapExceeded {
            what: "exact average coordinates",
            size: k.to_string(),
            cap: EXACT_AVERAGE_MAX_COORDINATES.to_string(),
        });
    }
    let n = desc.level();
    let free = desc.free_counts();
    // (vertex, is_free, path count)
    let classes: Vec<(usize, bool, usize)> = desc
        .sizes()
        .iter()
        .zip(&free)
        .enumerate()
        .flat_map(|(v, (&h, &f))| [(v, false, h - f), (v, true, f)])
        .filter(|&(_, _, c)| c > 0)
        .collect();
    let partitions = set_partitions(k);
    let terms: u64 = partitions
        .iter()
        .map(|p| {
            let blocks = p.iter().max().map_or(0, |b| b + 1) as u32;
            (classes.len() as u64).saturating_pow(blocks)
        })
        .fold(0u64, u64::saturating_add);
    if terms > EXACT_AVERAGE_TERM_CAP {
        return Err(Error::CapExceeded {
            what: "exact average terms",
            size: terms.to_string(),
            cap: EXACT_AVERAGE_TERM_CAP.to_string(),
        });
    }
    let weights: Vec<Option<&[Num]>> = (0..measures.len())
        .map(|i| {
            if alpha.exponents().get(i).copied().unwrap_or(0) > 0 {
                measures[i].level(n).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;

    let mode = if weights
        .iter()
        .flatten()
        .flat_map(|w| w.iter())
        .all(Num::is_exact)
    {
        Arithmetic::Rational
    } else {
        Arithmetic::Float
    };
    let mut total = Num::zero(mode);
    for partition in &partitions {
        let blocks = partition.iter().max().map_or(0, |b| b + 1);
        let mut assign = vec![0usize; blocks];
        loop {
            let mut used = vec![0usize; classes.len()];
            for &c in &assign {
                used[c] += 1;
            }
            let mut ways = BigUint::one();
            let mut fix_denominator = BigUint::one();
            for (c, &(_, is_free, count)) in classes.iter().enumerate() {
                ways *= falling(count, used[c]);
                if is_free {
                    fix_denominator *= falling(count, used[c]);
                }
            }
            if ways != BigUint::ZERO {
                let mut term = Num::from_biguint(&ways) / Num::from_biguint(&fix_denominator);
                for (j, &block) in partition.iter().enumerate() {
                    let v = classes[assign[block]].0;
                    let q = weights[labels[j]].expect("label checked")[v].clone();
                    term = term * q;
                }
                total = total + term;
            }
            // next class assignment
            let mut i = 0;
            while i < blocks {
                assign[i] += 1;
                if assign[i] < classes.len() {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
            if i == blocks {
                break;
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

/// Sample mean of `∏ μ_i(Fix g)^{α_i}` over uniform elements `g` of the subgroup.
pub fn monte_carlo_average(
    d: &BratteliDiagram,
    desc: &YoungSubgroupDescriptor,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    config: McConfig,
) -> Result<Estimate> {
    alpha.check_labels(measures.len())?;
    let parts = run_workers(config.seed, config.workers, config.samples, |rng, share| {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..share {
            let g = desc.random_element(d, rng)?;
            let x = g.fix_measure_product(measures, alpha)?.to_f64();
            sum += x;
            sum_sq += x * x;
        }
        Ok((sum, sum_sq))
    })?;
    let (sum, sum_sq) = parts
        .iter()
        .fold((0.0, 0.0), |(s, q), &(a, b)| (s + a, q + b));
    Ok(Estimate::from_moments(sum, sum_sq, config.samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMethod {
    Exact,
    MonteCarlo,
}

impl AverageMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AverageMethod::Exact => "exact",
            AverageMethod::MonteCarlo => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub level: usize,
    pub subgroup_order: BigUint,
    pub method: AverageMethod,
    pub value: Num,
    pub std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub rows: Vec<ProfileRow>,
    /// `∏ μ_i(A)^{α_i}`, a lower bound for every term.
    pub floor: Num,
    /// Consecutive exact terms never increase.
    pub monotone: bool,
    /// Every exact term is at least `floor`.
    pub above_floor: bool,
}

impl Profile {
    pub fn passes(&self) -> bool {
        self.monotone && self.above_floor
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].value < w[0].value)
    }
}

/// Averages over `G_n∘(A)` for each requested level, falling back to Monte
/// Carlo when the exact sum is over its cap and `mc` is given.
pub fn average_profile(
    d: &BratteliDiagram,
    a: &ClopenSet,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    levels: &[usize],
    mc: Option<McConfig>,
) -> Result<Profile> {
    let floor = product_clopen_measure(measures, alpha, a)?;
    let mut rows = Vec::with_capacity(levels.len());
    for &n in levels {
        let desc = YoungSubgroupDescriptor::pointwise_stabilizer(d, a, n)?;
        let row = match exact_average(&desc, alpha, measures) {
            Ok(value) => ProfileRow {
                level: n,
                subgroup_order: desc.order(),
                method: AverageMethod::Exact,
                value,
                std_err: None,
            },
            Err(Error::CapExceeded { .. }) if mc.is_some() => {
                let est = monte_carlo_average(d, &desc, alpha, measures, mc.expect("checked"))?;
                ProfileRow {
                    level: n,
                    subgroup_order: desc.order(),
                    method: AverageMethod::MonteCarlo,
                    value: Num::Float(est.mean),
                    std_err: Some(est.std_err),
                }
            }
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    let exact: Vec<&ProfileRow> = rows
        .iter()
        .filter(|r| r.method == AverageMethod::Exact)
        .collect();
    let monotone = exact.windows(2).all(|w| w[1].value <= w[0].value);
    let above_floor = exact.iter().all(|r| r.value >= floor);
    Ok(Profile {
        rows,
        floor,
        monotone,
        above_floor,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IepReport {
    pub lhs: Num,
    pub rhs: Num,
    pub residual: Num,
    /// `|Ξ_{p,n}|`, the number of `p`-element sets of level-`n` cylinders.
    pub family_size: usize,
    pub product_cylinders: usize,
    /// Nonzero terms visited in the alternating sum.
    pub terms: u64,
    /// No two unions of `p` cylinders cover the whole space.
    pub pairwise_hypothesis: bool,
}

impl IepReport {
    pub fn holds(&self) -> bool {
        if self.residual.is_exact() {
            self.residual.is_zero()
        } else {
            self.residual.abs().to_f64() <= FLOAT_IDENTITY_TOLERANCE
        }
    }
}

fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < p - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, p, &mut Vec::with_capacity(p), &mut out);
    out
}

/// Checks `μ_α(⋃_{C̄} (∪C̄)^{|α|}) = Σ_{∅≠J} (−1)^{|J|−1} μ_α((⋂_{C̄∈J} ∪C̄)^{|α|})`,
/// where `C̄` ranges over `p`-element sets of level-`n` cylinders. The left side
/// is expanded over level-`n` product cylinders of `X^{|α|}`.
pub fn verify_iep(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    n: usize,
    p: usize,
) -> Result<IepReport> {
    alpha.check_labels(measures.len())?;
    let counts = d.path_counts_capped(n)?;
    let cylinders: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(v, &h)| std::iter::repeat_n(v, h))
        .collect();
    let total = cylinders.len();
    if p == 0 {
        return Err(Error::InvalidArgument(
            "tuple size p must be at least 1".into(),
        ));
    }
    if p >= total {
        return Err(Error::Hypothesis(format!(
            "p = {p} with {total} level-{n} cylinders: a single union covers the space"
        )));
    }
    if total > 128 {
        return Err(Error::CapExceeded {
            what: "level cylinders for inclusion-exclusion",
            size: total.to_string(),
            cap: "128".into(),
        });
    }
    let family = combinations(total, p);
    if family.len() > IEP_MAX_FAMILY {
        return Err(Error::CapExceeded {
            what: "inclusion-exclusion family",
            size: family.len().to_string(),
            cap: IEP_MAX_FAMILY.to_string(),
        });
    }
    let labels = alpha.coordinate_labels();
    let k = labels.len();
    let product_cylinders = u32::try_from(k)
        .ok()
        .and_then(|k| total.checked_pow(k))
        .filter(|&t| t <= IEP_TERM_CAP)
        .ok_or_else(|| Error::CapExceeded {
            what: "product cylinders",
            size: format!("{total}^{k}"),
            cap: IEP_TERM_CAP.to_string(),
        })?;

    // per-cylinder weight under each measure label
    let weight = |label: usize, c: usize| -> Result<Num> {
        Ok(measures[label].weight(n, cylinders[c])?.clone())
    };

    let mut covered = vec![false; product_cylinders];
    for members in &family {
        let mut digits = vec![0usize; k];
        loop {
            let code = digits
                .iter()
                .rev()
                .fold(0usize, |acc, &i| acc * total + members[i]);
            covered[code] = true;
            let mut i = 0;
            while i < k {
                digits[i] += 1;
                if digits[i] < p {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    let mut lhs = Num::zero(Arithmetic::Rational);
    for (code, _) in covered.iter().enumerate().filter(|(_, &c)| c) {
        let mut rest = code;
        let mut term = Num::one(Arithmetic::Rational);
        for &label in &labels {
            term = term * weight(label, rest % total)?;
            rest /= total;
        }
        lhs = lhs + term;
    }

    let masks: Vec<u128> = family
        .iter()
        .map(|m| m.iter().fold(0u128, |acc, &c| acc | (1u128 << c)))
        .collect();
    let power = |mask: u128| -> Result<Num> {
        let mut acc = Num::one(Arithmetic::Rational);
        for (i, &e) in alpha.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut mu = Num::zero(Arithmetic::Rational);
            for c in (0..total).filter(|&c| mask >> c & 1 == 1) {
                mu = mu + weight(i, c)?;
            }
            acc = acc * mu.pow(e);
        }
        Ok(acc)
    };
    let mut rhs = Num::zero(Arithmetic::Rational);
    let mut terms = 0u64;
    let mut stack: Vec<(usize, u128, usize)> = (0..masks.len()).map(|i| (i, masks[i], 1)).collect();
    while let Some((last, mask, size)) = stack.pop() {
        let term = power(mask)?;
        terms += 1;
        rhs = if size % 2 == 1 {
            rhs + term
        } else {
            rhs - term
        };
        for next in last + 1..masks.len() {
            let inter = mask & masks[next];
            // μ(∅)^k = 0 for k ≥ 1, and so for every superset
            if inter == 0 && k > 0 {
                continue;
            }
            stack.push((next, inter, size + 1));
        }
    }

    let residual = &lhs - &rhs;
    Ok(IepReport {
        lhs,
        rhs,
        residual,
        family_size: family.len(),
        product_cylinders,
        terms,
        pairwise_hypothesis: 2 * p < total,
    })
}
