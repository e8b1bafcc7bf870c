//! Invariant measures stored as per-level cylinder weights.
//!
//! `q[n][v]` is the measure of any single level-`n` cylinder ending at `v`.
//! Full-group invariance forces all such cylinders to carry the same mass,
//! so these vectors determine the measure.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{BratteliDiagram, Continuation, FinitePath, IncidenceMatrix, Step};
use crate::error::{Error, Result};
use crate::group::ClopenSet;
use crate::scalar::{Arithmetic, Num};

/// Residual allowed on the compatibility and normalization identities in float mode.
pub const FLOAT_MEASURE_TOLERANCE: f64 = 1e-10;
pub const PERRON_RESIDUAL: f64 = 1e-12;
const POWER_ITERATION_LIMIT: usize = 100_000;

/// Multi-index `α`: exponent `α_i` for the ergodic measure with label `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex { exponents }
    }

    pub fn single(exponent: u32) -> Self {
        MultiIndex {
            exponents: vec![exponent],
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// `|α|`, the number of coordinates.
    pub fn total(&self) -> usize {
        self.exponents.iter().map(|&a| a as usize).sum()
    }

    /// Measure label of each coordinate, in order.
    pub fn coordinate_labels(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| std::iter::repeat_n(i, a as usize))
            .collect()
    }

    pub fn check_labels(&self, available: usize) -> Result<()> {
        if let Some(label) = self
            .exponents
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, _)| i)
            .find(|&i| i >= available)
        {
            return Err(Error::UnknownLabel { label, available });
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidAlpha("empty multi-index".into()));
        }
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidAlpha(format!("bad exponent {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex::new)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exponents.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMeasure {
    levels: Vec<Vec<Num>>,
    mode: Arithmetic,
    label: Option<usize>,
}

impl InvariantMeasure {
    /// Builds a measure from levels `1..=depth`, checking nonnegativity,
    /// compatibility and normalization against `d`.
    pub fn new(d: &BratteliDiagram, levels: Vec<Vec<Num>>, mode: Arithmetic) -> Result<Self> {
        let levels: Vec<Vec<Num>> = levels
            .into_iter()
            .map(|l| l.into_iter().map(|x| x.to_mode(mode)).collect())
            .collect();
        if mode == Arithmetic::Rational && levels.iter().flatten().any(|x| !x.is_exact()) {
            return Err(Error::InvalidMeasure(
                "rational mode requires exact entries".into(),
            ));
        }
        let m = InvariantMeasure {
            levels,
            mode,
            label: None,
        };
        m.validate(d)?;
        Ok(m)
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn mode(&self) -> Arithmetic {
        self.mode
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Result<&[Num]> {
        self.check_depth(n)?;
        Ok(&self.levels[n - 1])
    }

    pub fn weight(&self, n: usize, v: usize) -> Result<&Num> {
        self.level(n)?.get(v).ok_or(Error::NoSuchVertex {
            level: n,
            vertex: v,
            count: self.levels[n - 1].len(),
        })
    }

    pub fn check_depth(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.depth() {
            return Err(Error::DepthExceeded {
                needed: n,
                available: self.depth(),
            });
        }
        Ok(())
    }

    fn close_enough(&self, a: &Num, b: &Num) -> bool {
        match self.mode {
            Arithmetic::Rational => a == b,
            Arithmetic::Float => a.distance(b) <= FLOAT_MEASURE_TOLERANCE,
        }
    }

    /// Largest deviation from compatibility or normalization over stored levels.
    pub fn residual(&self, d: &BratteliDiagram) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for n in 1..=self.depth() {
            let h = d.path_counts(n)?;
            let total: Num = h
                .iter()
                .zip(&self.levels[n - 1])
                .map(|(h, q)| Num::from_biguint(h) * q)
                .sum();
            worst = worst.max(total.distance(&Num::one(Arithmetic::Rational)));
            if n < self.depth() {
                let f = d.matrix(n)?;
                for w in 0..f.cols() {
                    let pushed = push_down_entry(&f, &self.levels[n], w);
                    worst = worst.max(pushed.distance(&self.levels[n - 1][w]));
                }
            }
        }
        Ok(worst)
    }

    fn validate(&self, d: &BratteliDiagram) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidMeasure("measure has no levels".into()));
        }
        for (i, lvl) in self.levels.iter().enumerate() {
            let n = i + 1;
            let vc = d.vertex_count(n)?;
            if lvl.len() != vc {
                return Err(Error::InvalidMeasure(format!(
                    "level {n} has {} weights but {vc} vertices",
                    lvl.len()
                )));
            }
            if let Some(v) = lvl.iter().position(|x| x.is_negative()) {
                return Err(Error::InvalidMeasure(format!(
                    "negative weight at level {n}, vertex {v}"
                )));
            }
            let h = d.path_counts(n)?;
            let total: Num = h
                .iter()
                .zip(lvl)
                .map(|(h, q)| Num::from_biguint(h) * q)
                .sum();
            if !self.close_enough(&total, &Num::one(Arithmetic::Rational)) {
                return Err(Error::InvalidMeasure(format!(
                    "level {n} is not normalized: sum of h*q = {total}"
                )));
            }
            if n < self.levels.len() {
                let f = d.matrix(n)?;
                for w in 0..f.cols() {
                    let pushed = push_down_entry(&f, &self.levels[n], w);
                    if !self.close_enough(&pushed, &lvl[w]) {
                        return Err(Error::InvalidMeasure(format!(
                            "compatibility fails at level {n}, vertex {w}: {} vs {pushed}",
                            lvl[w]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Measure of the cylinder of `p`.
    pub fn cylinder_measure(&self, p: &FinitePath) -> Result<Num> {
        let n = p.level();
        let v = p
            .end()
            .ok_or_else(|| Error::InvalidPath("empty path has no cylinder".into()))?;
        self.weight(n, v).cloned()
    }

    pub fn clopen_measure(&self, a: &ClopenSet) -> Result<Num> {
        let lvl = self.level(a.level())?;
        let mut total = Num::zero(self.mode);
        for (v, q) in lvl.iter().enumerate() {
            let k = a.count_at(v);
            if k > 0 {
                total = total + Num::integer(k as i64) * q;
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> String {
        let levels: Vec<Vec<serde_json::Value>> = self
            .levels
            .iter()
            .map(|l| {
                l.iter()
                    .map(|x| match x {
                        Num::Exact(_) => serde_json::Value::String(x.to_string()),
                        Num::Float(f) => serde_json::json!(f),
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&MeasureFile {
            depth: self.depth(),
            levels,
            mode: self.mode,
        })
        .expect("measure serializes")
    }

    pub fn from_json_str(d: &BratteliDiagram, text: &str) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(text)?;
        if file.depth != file.levels.len() {
            return Err(Error::InvalidMeasure(format!(
                "depth is {} but {} levels are given",
                file.depth,
                file.levels.len()
            )));
        }
        let levels = file
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.iter()
                    .enumerate()
                    .map(|(v, x)| {
                        json_number(x).map_err(|e| {
                            Error::InvalidMeasure(format!("level {}, vertex {v}: {e}", i + 1))
                        })
                    })
                    .collect::<Result<Vec<Num>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, levels, file.mode)
    }

    pub fn from_file(d: &BratteliDiagram, path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(d, &text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureFile {
    depth: usize,
    levels: Vec<Vec<serde_json::Value>>,
    mode: Arithmetic,
}

fn json_number(x: &serde_json::Value) -> Result<Num> {
    match x {
        serde_json::Value::String(s) => Num::parse(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Num::integer(i))
            } else {
                n.as_f64()
                    .map(Num::Float)
                    .ok_or_else(|| Error::Parse(format!("unrepresentable number {n}")))
            }
        }
        other => Err(Error::Parse(format!(
            "expected number or \"p/q\", got {other}"
        ))),
    }
}

/// `(F^T q)_w`.
fn push_down_entry(f: &IncidenceMatrix, upper: &[Num], w: usize) -> Num {
    let mut acc = Num::zero(Arithmetic::Rational);
    for (v, q) in upper.iter().enumerate() {
        let e = f.get(v, w);
        if e != 0 {
            acc = acc + Num::integer(e as i64) * q;
        }
    }
    acc
}

fn push_down(f: &IncidenceMatrix, upper: &[Num]) -> Vec<Num> {
    (0..f.cols())
        .map(|w| push_down_entry(f, upper, w))
        .collect()
}

fn push_down_f64(f: &IncidenceMatrix, upper: &[f64]) -> Vec<f64> {
    (0..f.cols())
        .map(|w| (0..f.rows()).map(|v| f.get(v, w) as f64 * upper[v]).sum())
        .collect()
}

/// `∏ μ_i(A)^{α_i}`.
pub fn product_clopen_measure(
    measures: &[InvariantMeasure],
    alpha: &MultiIndex,
    a: &ClopenSet,
) -> Result<Num> {
    alpha.check_labels(measures.len())?;
    let mut acc = Num::one(Arithmetic::Rational);
    for (i, &e) in alpha.exponents().iter().enumerate() {
        if e > 0 {
            acc = acc * measures[i].clopen_measure(a)?.pow(e);
        }
    }
    Ok(acc)
}

/// Whether some power of `m` (up to Wielandt's bound) is strictly positive.
pub fn is_primitive(m: &IncidenceMatrix) -> Option<usize> {
    let r = m.rows();
    if r != m.cols() {
        return None;
    }
    let bound = (r - 1) * (r - 1) + 1;
    let base: Vec<bool> = (0..r * r).map(|i| m.get(i / r, i % r) > 0).collect();
    let mut acc = base.clone();
    for k in 1..=bound {
        if acc.iter().all(|&x| x) {
            return Some(k);
        }
        let mut next = vec![false; r * r];
        for i in 0..r {
            for j in 0..r {
                next[i * r + j] = (0..r).any(|l| base[i * r + l] && acc[l * r + j]);
            }
        }
        acc = next;
    }
    None
}

/// Perron data `(λ, ξ)` of `Aᵀ` by power iteration, `ξ` scaled to max 1.
pub fn perron_left(m: &IncidenceMatrix) -> Result<(f64, Vec<f64>)> {
    let r = m.rows();
    let bound = (r - 1) * (r - 1) + 1;
    if is_primitive(m).is_none() {
        return Err(Error::NotPrimitive(bound));
    }
    let mut xi = vec![1.0; r];
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_ITERATION_LIMIT {
        let next = push_down_f64(m, &xi);
        let lambda = next.iter().cloned().fold(0.0, f64::max);
        let next: Vec<f64> = next.iter().map(|x| x / lambda).collect();
        let delta = next
            .iter()
            .zip(&xi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        xi = next;
        let image = push_down_f64(m, &xi);
        residual = image
            .iter()
            .zip(&xi)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max);
        if delta < 1e-16 || residual <= PERRON_RESIDUAL * lambda.max(1.0) * 0.01 {
            return Ok((lambda, xi));
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_LIMIT,
        residual,
    })
}

/// Nonnegative rational kernel vector of `Aᵀ - λI`, if the kernel is nontrivial.
fn exact_left_eigenvector(m: &IncidenceMatrix, lambda: i64) -> Option<Vec<BigRational>> {
    let r = m.rows();
    // rows of (A^T - λI): entry (w, v) = A[v][w] - λ δ
    let mut a: Vec<Vec<BigRational>> = (0..r)
        .map(|w| {
            (0..r)
                .map(|v| {
                    let mut x = BigInt::from(m.get(v, w));
                    if v == w {
                        x -= BigInt::from(lambda);
                    }
                    BigRational::from_integer(x)
                })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r {
        let Some(p) = (row..r).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..r {
            if i != row && !a[i][col].is_zero() {
                let factor = a[i][col].clone();
                for j in 0..r {
                    let sub = &factor * &a[row][j];
                    a[i][j] -= sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..r).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigRational::zero(); r];
    x[free] = BigRational::one();
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = -a[i][free].clone();
    }
    if x.iter().all(|v| !v.is_positive()) {
        x = x.into_iter().map(|v| -v).collect();
    }
    if x.iter().any(|v| v.is_negative()) {
        return None;
    }
    Some(x)
}

/// Invariant measure of a stationary diagram from the Perron data of its
/// repeated matrix, pushed down through any differing prefix.
pub fn stationary_measure(
    d: &BratteliDiagram,
    depth: usize,
    mode: Arithmetic,
) -> Result<InvariantMeasure> {
    if d.continuation() != Continuation::Stationary {
        return Err(Error::InvalidArgument(
            "stationary_measure needs a stationary diagram".into(),
        ));
    }
    if depth == 0 {
        return Err(Error::ZeroLevel(0));
    }
    let a = d.stored_matrices().last().expect("validated").clone();
    // F_n = A for every n >= start
    let start = d.level_count() - 1;
    let (lambda, xi) = perron_left(&a)?;
    let top = depth.max(start);
    let mut levels: Vec<Vec<Num>> = vec![Vec::new(); top];
    match mode {
        Arithmetic::Float => {
            for n in start..=top {
                let scale = lambda.powi(-((n - start) as i32));
                levels[n - 1] = xi.iter().map(|x| Num::Float(x * scale)).collect();
            }
        }
        Arithmetic::Rational => {
            let rounded = lambda.round();
            if (lambda - rounded).abs() > 1e-9 * lambda.max(1.0) {
                return Err(Error::NotRational(format!(
                    "Perron eigenvalue {lambda} is not an integer"
                )));
            }
            let lam = rounded as i64;
            let xi = exact_left_eigenvector(&a, lam).ok_or_else(|| {
                Error::NotRational(format!("no nonnegative rational eigenvector for λ = {lam}"))
            })?;
            let lam_q = BigRational::from_integer(BigInt::from(lam));
            let mut scale = BigRational::one();
            for n in start..=top {
                levels[n - 1] = xi.iter().map(|x| Num::Exact(x * &scale)).collect();
                scale /= &lam_q;
            }
        }
    }
    for n in (1..start).rev() {
        levels[n - 1] = push_down(&d.matrix(n)?, &levels[n]);
    }
    let h1 = d.path_counts(1)?;
    let norm: Num = h1
        .iter()
        .zip(&levels[0])
        .map(|(h, q)| Num::from_biguint(h) * q)
        .sum();
    let levels: Vec<Vec<Num>> = levels
        .into_iter()
        .take(depth)
        .map(|l| l.into_iter().map(|x| x / &norm).collect())
        .collect();
    let m = InvariantMeasure::new(d, levels, mode)?;
    if mode == Arithmetic::Float {
        let r = m.residual(d)?;
        if r > FLOAT_MEASURE_TOLERANCE {
            return Err(Error::NoConvergence {
                iterations: POWER_ITERATION_LIMIT,
                residual: r,
            });
        }
    }
    Ok(m.with_label(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicDiagnostics {
    pub depth: usize,
    pub report_depth: usize,
    pub candidates: usize,
    pub clusters: usize,
    /// Largest distance from a candidate to its cluster mean.
    pub max_intra_spread: f64,
    /// Largest distance between a cluster mean and the nearest mean at depth `depth - 1`.
    pub inter_depth_spread: f64,
    pub previous_clusters: usize,
    pub stable: bool,
}

#[derive(Debug, Clone)]
pub struct ErgodicSet {
    pub measures: Vec<InvariantMeasure>,
    pub diagnostics: ErgodicDiagnostics,
}

struct Cluster {
    members: Vec<Vec<f64>>,
    mean: Vec<f64>,
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Normalized pushdown of the Dirac weight at each top vertex, flattened over
/// levels `1..=report_depth`.
fn pushdown_candidates(
    d: &BratteliDiagram,
    depth: usize,
    report_depth: usize,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let matrices = (1..depth)
        .map(|n| d.matrix(n))
        .collect::<Result<Vec<_>>>()?;
    let h1: Vec<f64> = d.root_edges().iter().map(|&x| x as f64).collect();
    let top = d.vertex_count(depth)?;
    let mut out = Vec::with_capacity(top);
    for w in 0..top {
        let mut q = vec![0.0; top];
        q[w] = 1.0;
        let mut n = depth;
        while n > report_depth {
            q = push_down_f64(&matrices[n - 2], &q);
            let mx = q.iter().cloned().fold(0.0, f64::max);
            q.iter_mut().for_each(|x| *x /= mx);
            n -= 1;
        }
        let mut levels = vec![Vec::new(); report_depth];
        levels[report_depth - 1] = q;
        for n in (1..report_depth).rev() {
            levels[n - 1] = push_down_f64(&matrices[n - 1], &levels[n]);
        }
        let c: f64 = h1.iter().zip(&levels[0]).map(|(h, q)| h * q).sum();
        for l in levels.iter_mut() {
            l.iter_mut().for_each(|x| *x /= c);
        }
        out.push(levels);
    }
    Ok(out)
}

fn cluster(candidates: &[Vec<f64>], eps: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for c in candidates {
        match clusters
            .iter_mut()
            .find(|cl| linf(&cl.members[0], c) <= eps)
        {
            Some(cl) => cl.members.push(c.clone()),
            None => clusters.push(Cluster {
                members: vec![c.clone()],
                mean: Vec::new(),
            }),
        }
    }
    for cl in clusters.iter_mut() {
        let k = cl.members.len() as f64;
        cl.mean = (0..cl.members[0].len())
            .map(|i| cl.members.iter().map(|m| m[i]).sum::<f64>() / k)
            .collect();
    }
    clusters
}

pub const DEFAULT_REPORT_DEPTH: usize = 8;

/// Estimates the ergodic measures by pushing Dirac weights at depth `depth`
/// down to levels `1..=report_depth` and clustering the results within `eps`.
pub fn approximate_ergodic_set(
    d: &BratteliDiagram,
    depth: usize,
    eps: f64,
    report_depth: usize,
) -> Result<ErgodicSet> {
    if depth < 3 {
        return Err(Error::InvalidArgument(format!(
            "ergodic-set approximation needs depth >= 3, got {depth}"
        )));
    }
    d.check_level(depth)?;
    let report_depth = report_depth.clamp(1, depth - 1);
    let shapes: Vec<usize> = (1..=report_depth)
        .map(|n| d.vertex_count(n))
        .collect::<Result<_>>()?;

    let flatten = |c: Vec<Vec<f64>>| c.into_iter().flatten().collect::<Vec<f64>>();
    let current: Vec<Vec<f64>> = pushdown_candidates(d, depth, report_depth)?
        .into_iter()
        .map(flatten)
        .collect();
    let previous: Vec<Vec<f64>> = pushdown_candidates(d, depth - 1, report_depth)?
        .into_iter()
        .map(flatten)
        .collect();
    let clusters = cluster(&current, eps);
    let prev_clusters = cluster(&previous, eps);

    let max_intra_spread = clusters
        .iter()
        .flat_map(|cl| cl.members.iter().map(|m| linf(m, &cl.mean)))
        .fold(0.0, f64::max);
    let inter_depth_spread = clusters
        .iter()
        .map(|cl| {
            prev_clusters
                .iter()
                .map(|p| linf(&p.mean, &cl.mean))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let measures = clusters
        .iter()
        .enumerate()
        .map(|(i, cl)| {
            let mut levels = Vec::with_capacity(report_depth);
            let mut offset = 0;
            for &w in &shapes {
                levels.push(
                    cl.mean[offset..offset + w]
                        .iter()
                        .map(|&x| Num::Float(x))
                        .collect(),
                );
                offset += w;
            }
            InvariantMeasure::new(d, levels, Arithmetic::Float).map(|m| m.with_label(i))
        })
        .collect::<Result<Vec<_>>>()?;

    let diagnostics = ErgodicDiagnostics {
        depth,
        report_depth,
        candidates: current.len(),
        clusters: clusters.len(),
        max_intra_spread,
        inter_depth_spread,
        previous_clusters: prev_clusters.len(),
        stable: prev_clusters.len() == clusters.len() && inter_depth_spread <= eps,
    };
    Ok(ErgodicSet {
        measures,
        diagnostics,
    })
}

/// Sequential sampler of level-`m` paths distributed according to a measure.
#[derive(Debug, Clone)]
pub struct PathSampler {
    depth: usize,
    // tables[i][from] = (target, multiplicity, per-edge weight) for step i + 1
    tables: Vec<Vec<Vec<(usize, u64, f64)>>>,
}

impl PathSampler {
    pub fn new(d: &BratteliDiagram, mu: &InvariantMeasure, depth: usize) -> Result<Self> {
        mu.check_depth(depth)?;
        let mut tables = Vec::with_capacity(depth);
        for level in 1..=depth {
            let weights: Vec<f64> = mu.level(level)?.iter().map(Num::to_f64).collect();
            let sources = if level == 1 {
                1
            } else {
                d.vertex_count(level - 1)?
            };
            let mut table = Vec::with_capacity(sources);
            for from in 0..sources {
                let mut row = Vec::new();
                for (to, &w) in weights.iter().enumerate() {
                    let f = d.edge_multiplicity(level, from, to)?;
                    if f > 0 && w > 0.0 {
                        row.push((to, f, w));
                    }
                }
                table.push(row);
            }
            tables.push(table);
        }
        Ok(PathSampler { depth, tables })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FinitePath> {
        let mut path = FinitePath::default();
        let mut from = 0;
        for (i, table) in self.tables.iter().enumerate() {
            let row = &table[from];
            let total: f64 = row.iter().map(|&(_, f, w)| f as f64 * w).sum();
            if total <= 0.0 {
                return Err(Error::ZeroMass {
                    level: i,
                    vertex: from,
                });
            }
            let mut x = rng.random::<f64>() * total;
            let mut chosen = None;
            for &(to, f, w) in row {
                let block = f as f64 * w;
                if x < block {
                    let e = ((x / w) as u64).min(f - 1);
                    chosen = Some(Step {
                        vertex: to,
                        edge: e,
                    });
                    break;
                }
                x -= block;
            }
            // rounding can leave x just past the last block
            let step = chosen.unwrap_or_else(|| {
                let &(to, f, _) = row.last().expect("nonempty when total > 0");
                Step {
                    vertex: to,
                    edge: f - 1,
                }
            });
            from = step.vertex;
            path.push(step);
        }
        Ok(path)
    }
}

/// One path of length `depth` sampled from `mu`.
pub fn sample_path<R: Rng + ?Sized>(
    d: &BratteliDiagram,
    mu: &InvariantMeasure,
    depth: usize,
    rng: &mut R,
) -> Result<FinitePath> {
    PathSampler::new(d, mu, depth)?.sample(rng)
}
