//! Bratteli diagrams described by a finite prefix of incidence matrices plus a
//! continuation rule, with exact path counting and canonical path labels.
//!
//! Levels are numbered from 1. `F_n` (stored at `matrices[n - 1]`) is a
//! `|V_{n+1}| x |V_n|` matrix whose entry `(v, w)` counts the edges from
//! `w ∈ V_n` to `v ∈ V_{n+1}`. Edges between a fixed pair of vertices are
//! numbered locally `0..f`, and the paths ending at a vertex are ordered
//! lexicographically by their `(vertex, edge)` step sequence.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;
pub const DEFAULT_WINDOW_SEARCH: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Continuation {
    Truncated,
    /// Repeat the last stored matrix forever.
    Stationary,
    /// `F_n = [[1, 1], [n, 1]]` for every level not stored explicitly.
    PolynomialExample,
}

impl FromStr for Continuation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated" => Ok(Continuation::Truncated),
            "stationary" => Ok(Continuation::Stationary),
            "polynomial-example" => Ok(Continuation::PolynomialExample),
            other => Err(Error::Parse(format!(
                "unknown continuation {other:?} (expected truncated|stationary|polynomial-example)"
            ))),
        }
    }
}

/// Dense nonnegative integer matrix with row-major storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl IncidenceMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidDiagram("matrix has no rows".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::InvalidDiagram("matrix has no columns".into()));
        }
        if let Some(bad) = rows.iter().position(|row| row.len() != c) {
            return Err(Error::InvalidDiagram(format!(
                "row {bad} has length {} but row 0 has length {c}",
                rows[bad].len()
            )));
        }
        Ok(IncidenceMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.data[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.cols).map(|c| c.to_vec()).collect()
    }

    fn polynomial(n: usize) -> IncidenceMatrix {
        IncidenceMatrix {
            rows: 2,
            cols: 2,
            data: vec![1, 1, n as u64, 1],
        }
    }
}

/// Exact big-integer matrix, the result of telescoping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigUint>,
}

impl CountMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigUint::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigUint::one();
        }
        CountMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn from_incidence(m: &IncidenceMatrix) -> Self {
        CountMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|&x| BigUint::from(x)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigUint {
        &self.data[row * self.cols + col]
    }

    pub fn entries(&self) -> impl Iterator<Item = &BigUint> {
        self.data.iter()
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &CountMatrix) -> CountMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut data = vec![BigUint::zero(); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs.data[k * rhs.cols + j];
                    if !b.is_zero() {
                        data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        CountMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        }
    }

    pub fn mul_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) * &v[j])
                    .fold(BigUint::zero(), |a, b| a + b)
            })
            .collect()
    }
}

/// Result of a bounded window search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSearch {
    Found(usize),
    Unknown,
}

impl fmt::Display for WindowSearch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSearch::Found(m) => write!(f, "{m}"),
            WindowSearch::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliDiagram {
    root_edges: Vec<u64>,
    matrices: Vec<IncidenceMatrix>,
    continuation: Continuation,
    enumeration_cap: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct DiagramFile {
    root_edges: Vec<u64>,
    #[serde(default)]
    matrices: Vec<Vec<Vec<u64>>>,
    continuation: Continuation,
}

impl BratteliDiagram {
    pub fn new(
        root_edges: Vec<u64>,
        matrices: Vec<IncidenceMatrix>,
        continuation: Continuation,
    ) -> Result<Self> {
        let d = BratteliDiagram {
            root_edges,
            matrices,
            continuation,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_rows(
        root_edges: Vec<u64>,
        matrices: Vec<Vec<Vec<u64>>>,
        continuation: Continuation,
    ) -> Result<Self> {
        let mats = matrices
            .into_iter()
            .enumerate()
            .map(|(i, rows)| {
                IncidenceMatrix::from_rows(rows).map_err(|e| match e {
                    Error::InvalidDiagram(msg) => {
                        Error::InvalidDiagram(format!("matrix F_{}: {msg}", i + 1))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(root_edges, mats, continuation)
    }

    /// One vertex per level, `r` edges between consecutive levels.
    pub fn odometer(r: u64) -> Self {
        Self::from_rows(vec![r], vec![vec![vec![r]]], Continuation::Stationary)
            .expect("odometer with r >= 1 is valid")
    }

    pub fn stationary(root_edges: Vec<u64>, matrix: Vec<Vec<u64>>) -> Result<Self> {
        Self::from_rows(root_edges, vec![matrix], Continuation::Stationary)
    }

    /// The two-vertex family `F_n = [[1, 1], [n, 1]]` with one root edge per vertex.
    pub fn polynomial_example() -> Self {
        Self::new(vec![1, 1], Vec::new(), Continuation::PolynomialExample)
            .expect("polynomial example is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DiagramFile = serde_json::from_str(text)?;
        Self::from_rows(file.root_edges, file.matrices, file.continuation)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        let file = DiagramFile {
            root_edges: self.root_edges.clone(),
            matrices: self.matrices.iter().map(|m| m.to_rows()).collect(),
            continuation: self.continuation,
        };
        serde_json::to_string_pretty(&file).expect("diagram serializes")
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    fn validate(&self) -> Result<()> {
        if self.root_edges.is_empty() {
            return Err(Error::InvalidDiagram("root_edges is empty".into()));
        }
        if let Some(i) = self.root_edges.iter().position(|&x| x == 0) {
            return Err(Error::InvalidDiagram(format!(
                "root_edges[{i}] is zero: vertex {i} of level 1 has no incoming edge"
            )));
        }
        match self.continuation {
            Continuation::Stationary if self.matrices.is_empty() => {
                return Err(Error::InvalidDiagram(
                    "stationary continuation needs at least one matrix".into(),
                ))
            }
            Continuation::PolynomialExample if self.root_edges.len() != 2 => {
                return Err(Error::InvalidDiagram(
                    "polynomial-example continuation needs two level-1 vertices".into(),
                ))
            }
            _ => {}
        }
        let mut cols = self.root_edges.len();
        for (i, m) in self.matrices.iter().enumerate() {
            let level = i + 1;
            if m.cols != cols {
                return Err(Error::InvalidDiagram(format!(
                    "matrix F_{level} has {} columns but level {level} has {cols} vertices",
                    m.cols
                )));
            }
            for r in 0..m.rows {
                if (0..m.cols).all(|c| m.get(r, c) == 0) {
                    return Err(Error::InvalidDiagram(format!(
                        "matrix F_{level}: row {r} is zero (vertex {r} of level {} has no incoming edge)",
                        level + 1
                    )));
                }
            }
            for c in 0..m.cols {
                if (0..m.rows).all(|r| m.get(r, c) == 0) {
                    return Err(Error::InvalidDiagram(format!(
                        "matrix F_{level}: column {c} is zero (vertex {c} of level {level} has no outgoing edge)"
                    )));
                }
            }
            cols = m.rows;
        }
        match self.continuation {
            Continuation::Stationary => {
                let last = self.matrices.last().expect("checked above");
                if last.rows != last.cols {
                    return Err(Error::InvalidDiagram(
                        "stationary continuation needs a square last matrix".into(),
                    ));
                }
            }
            Continuation::PolynomialExample if cols != 2 => {
                return Err(Error::InvalidDiagram(
                    "polynomial-example continuation needs two vertices at the last stored level"
                        .into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Number of explicitly stored levels `N` (matrices `F_1 .. F_{N-1}`).
    pub fn level_count(&self) -> usize {
        self.matrices.len() + 1
    }

    pub fn continuation(&self) -> Continuation {
        self.continuation
    }

    pub fn root_edges(&self) -> &[u64] {
        &self.root_edges
    }

    pub fn stored_matrices(&self) -> &[IncidenceMatrix] {
        &self.matrices
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level == 0 {
            return Err(Error::ZeroLevel(level));
        }
        if self.continuation == Continuation::Truncated && level > self.level_count() {
            return Err(Error::LevelOutOfRange {
                level,
                stored: self.level_count(),
            });
        }
        Ok(())
    }

    /// `F_n`, generated on demand beyond the stored prefix.
    pub fn matrix(&self, n: usize) -> Result<IncidenceMatrix> {
        self.check_level(n)?;
        self.check_level(n + 1)?;
        if n <= self.matrices.len() {
            return Ok(self.matrices[n - 1].clone());
        }
        Ok(match self.continuation {
            Continuation::Stationary => self.matrices.last().expect("validated").clone(),
            Continuation::PolynomialExample => IncidenceMatrix::polynomial(n),
            Continuation::Truncated => unreachable!("checked by check_level"),
        })
    }

    pub fn vertex_count(&self, level: usize) -> Result<usize> {
        self.check_level(level)?;
        if level == 1 {
            return Ok(self.root_edges.len());
        }
        if level - 1 <= self.matrices.len() {
            return Ok(self.matrices[level - 2].rows);
        }
        Ok(match self.continuation {
            Continuation::Stationary => self.matrices.last().expect("validated").rows,
            _ => 2,
        })
    }

    /// Number of edges from `from` (a vertex of level `level - 1`, or the root
    /// when `level == 1`) to `to ∈ V_level`.
    pub fn edge_multiplicity(&self, level: usize, from: usize, to: usize) -> Result<u64> {
        if level == 1 {
            return self.root_edges.get(to).copied().ok_or(Error::NoSuchVertex {
                level,
                vertex: to,
                count: self.root_edges.len(),
            });
        }
        let m = self.matrix(level - 1)?;
        if to >= m.rows || from >= m.cols {
            return Err(Error::InvalidPath(format!(
                "no edge slot from vertex {from} to vertex {to} at level {level}"
            )));
        }
        Ok(m.get(to, from))
    }

    /// Exact path counts `h^{(n)}` indexed by `V_n`.
    pub fn path_counts(&self, n: usize) -> Result<Vec<BigUint>> {
        self.check_level(n)?;
        let mut h: Vec<BigUint> = self.root_edges.iter().map(|&x| BigUint::from(x)).collect();
        for k in 1..n {
            let m = self.matrix(k)?;
            h = CountMatrix::from_incidence(&m).mul_vec(&h);
        }
        Ok(h)
    }

    /// Path counts at level `n` as machine integers, failing if any exceeds
    /// the enumeration cap.
    pub fn path_counts_capped(&self, n: usize) -> Result<Vec<usize>> {
        let cap = BigUint::from(self.enumeration_cap);
        self.path_counts(n)?
            .into_iter()
            .map(|h| {
                if h > cap {
                    Err(Error::CapExceeded {
                        what: "path count",
                        size: h.to_string(),
                        cap: cap.to_string(),
                    })
                } else {
                    Ok(h.to_usize().expect("below cap"))
                }
            })
            .collect()
    }

    /// `F_{m-1} ··· F_n`: entry `(v, w)` counts paths from `w ∈ V_n` to `v ∈ V_m`.
    pub fn telescope(&self, n: usize, m: usize) -> Result<CountMatrix> {
        if n == 0 || m <= n {
            return Err(Error::InvalidArgument(format!(
                "telescope needs 1 <= n < m, got n={n}, m={m}"
            )));
        }
        self.check_level(m)?;
        let mut acc = CountMatrix::identity(self.vertex_count(n)?);
        for k in n..m {
            acc = CountMatrix::from_incidence(&self.matrix(k)?).mul(&acc);
        }
        Ok(acc)
    }

    pub fn is_simple_window(&self, n: usize, m: usize) -> Result<bool> {
        Ok(self.telescope(n, m)?.entries().all(|x| !x.is_zero()))
    }

    pub fn is_even_window(&self, n: usize, m: usize) -> Result<bool> {
        Ok(self
            .telescope(n, m)?
            .entries()
            .all(|x| !x.is_zero() && x.is_even()))
    }

    pub fn is_simple_up_to(&self, n: usize, m_max: usize) -> Result<WindowSearch> {
        self.search_window(n, m_max, |x| !x.is_zero())
    }

    pub fn is_even_up_to(&self, n: usize, m_max: usize) -> Result<WindowSearch> {
        self.search_window(n, m_max, |x| !x.is_zero() && x.is_even())
    }

    fn search_window(
        &self,
        n: usize,
        m_max: usize,
        ok: impl Fn(&BigUint) -> bool,
    ) -> Result<WindowSearch> {
        self.check_level(n)?;
        let mut acc = CountMatrix::identity(self.vertex_count(n)?);
        for m in (n + 1)..=m_max {
            if self.check_level(m).is_err() {
                break;
            }
            acc = CountMatrix::from_incidence(&self.matrix(m - 1)?).mul(&acc);
            if acc.entries().all(&ok) {
                return Ok(WindowSearch::Found(m));
            }
        }
        Ok(WindowSearch::Unknown)
    }

    /// All finite paths from the root to `v ∈ V_n`, in canonical order.
    pub fn enumerate_paths(&self, n: usize, v: usize) -> Result<Vec<FinitePath>> {
        let counts = self.path_counts(n)?;
        let h = counts.get(v).ok_or(Error::NoSuchVertex {
            level: n,
            vertex: v,
            count: counts.len(),
        })?;
        if *h > BigUint::from(self.enumeration_cap) {
            return Err(Error::CapExceeded {
                what: "path enumeration",
                size: h.to_string(),
                cap: self.enumeration_cap.to_string(),
            });
        }
        let index = PathIndex::new(self, n)?;
        let mut out = Vec::with_capacity(h.to_usize().unwrap_or(0));
        let mut stack = Vec::with_capacity(n);
        self.enumerate_rec(&index, v, &mut stack, &mut out)?;
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        index: &PathIndex,
        target: usize,
        stack: &mut Vec<Step>,
        out: &mut Vec<FinitePath>,
    ) -> Result<()> {
        let depth = stack.len();
        if depth == index.level {
            if stack.last().map(|s| s.vertex) == Some(target) {
                out.push(FinitePath {
                    steps: stack.clone(),
                });
            }
            return Ok(());
        }
        let level = depth + 1;
        let from = stack.last().map(|s| s.vertex).unwrap_or(0);
        for u in 0..self.vertex_count(level)? {
            if index.completions(level, u, target) == 0 {
                continue;
            }
            let f = self.edge_multiplicity(level, from, u)?;
            for e in 0..f {
                stack.push(Step { vertex: u, edge: e });
                self.enumerate_rec(index, target, stack, out)?;
                stack.pop();
            }
        }
        Ok(())
    }

    /// Checks that `path` is a valid path in this diagram.
    pub fn validate_path(&self, path: &FinitePath) -> Result<()> {
        let mut from = 0;
        for (i, s) in path.steps.iter().enumerate() {
            let level = i + 1;
            let vc = self.vertex_count(level)?;
            if s.vertex >= vc {
                return Err(Error::InvalidPath(format!(
                    "step {level} targets vertex {} but level {level} has {vc} vertices",
                    s.vertex
                )));
            }
            let f = self.edge_multiplicity(level, from, s.vertex)?;
            if s.edge >= f {
                return Err(Error::InvalidPath(format!(
                    "step {level} uses edge {} but only {f} edges lead to vertex {}",
                    s.edge, s.vertex
                )));
            }
            from = s.vertex;
        }
        Ok(())
    }
}

/// One edge of a path: the target vertex at this level and the local edge
/// number among the parallel edges from the previous vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub vertex: usize,
    pub edge: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FinitePath {
    steps: Vec<Step>,
}

impl FinitePath {
    pub fn new(steps: Vec<Step>) -> Self {
        FinitePath { steps }
    }

    pub fn level(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Final vertex; `None` for the empty path at the root.
    pub fn end(&self) -> Option<usize> {
        self.steps.last().map(|s| s.vertex)
    }

    pub fn prefix(&self, n: usize) -> FinitePath {
        FinitePath {
            steps: self.steps[..n.min(self.steps.len())].to_vec(),
        }
    }

    pub fn tail(&self, n: usize) -> &[Step] {
        &self.steps[n.min(self.steps.len())..]
    }

    pub fn push(&mut self, step: Step) {
        self.steps.push(step);
    }

    pub fn concat(&self, tail: &[Step]) -> FinitePath {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(tail);
        FinitePath { steps }
    }
}

impl fmt::Display for FinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("{}.{}", s.vertex, s.edge))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Rank/unrank support for the canonical labeling of level-`n` paths.
///
/// `completions[i - 1]` holds, for each source `u ∈ V_i` and target `v ∈ V_n`,
/// the number of paths from `u` to `v`.
#[derive(Debug, Clone)]
pub struct PathIndex {
    level: usize,
    completions: Vec<Vec<Vec<u64>>>,
    counts: Vec<u64>,
    root_edges: Vec<u64>,
    matrices: Vec<IncidenceMatrix>,
}

impl PathIndex {
    pub fn new(d: &BratteliDiagram, n: usize) -> Result<Self> {
        d.check_level(n)?;
        let matrices = (1..n).map(|k| d.matrix(k)).collect::<Result<Vec<_>>>()?;
        let vn = d.vertex_count(n)?;
        let mut completions: Vec<Vec<Vec<u64>>> = vec![Vec::new(); n];
        // completions at level n: identity
        completions[n - 1] = (0..vn)
            .map(|u| (0..vn).map(|v| u64::from(u == v)).collect())
            .collect();
        for i in (1..n).rev() {
            let m = &matrices[i - 1];
            let next = &completions[i];
            let cur: Vec<Vec<u64>> = (0..m.cols)
                .map(|u| {
                    (0..vn)
                        .map(|v| {
                            let mut acc: u64 = 0;
                            for up in 0..m.rows {
                                let term = m
                                    .get(up, u)
                                    .checked_mul(next[up][v])
                                    .ok_or(Error::Overflow("indexing paths"))?;
                                acc = acc
                                    .checked_add(term)
                                    .ok_or(Error::Overflow("indexing paths"))?;
                            }
                            Ok(acc)
                        })
                        .collect::<Result<Vec<u64>>>()
                })
                .collect::<Result<_>>()?;
            completions[i - 1] = cur;
        }
        let root_edges = d.root_edges().to_vec();
        let counts = (0..vn)
            .map(|v| {
                let mut acc: u64 = 0;
                for (u, &r) in root_edges.iter().enumerate() {
                    let t = r
                        .checked_mul(completions[0][u][v])
                        .ok_or(Error::Overflow("indexing paths"))?;
                    acc = acc
                        .checked_add(t)
                        .ok_or(Error::Overflow("indexing paths"))?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<u64>>>()?;
        Ok(PathIndex {
            level: n,
            completions,
            counts,
            root_edges,
            matrices,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, v: usize) -> u64 {
        self.counts[v]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Paths from `u ∈ V_level` to `v ∈ V_n`.
    pub fn completions(&self, level: usize, u: usize, v: usize) -> u64 {
        self.completions[level - 1][u][v]
    }

    fn multiplicity(&self, level: usize, from: usize, to: usize) -> u64 {
        if level == 1 {
            self.root_edges[to]
        } else {
            self.matrices[level - 2].get(to, from)
        }
    }

    fn width(&self, level: usize) -> usize {
        if level == 1 {
            self.root_edges.len()
        } else {
            self.matrices[level - 2].rows
        }
    }

    /// Canonical label of a level-`n` path among the paths sharing its end vertex.
    pub fn rank(&self, path: &FinitePath) -> Result<usize> {
        if path.level() != self.level {
            return Err(Error::DepthExceeded {
                needed: self.level,
                available: path.level(),
            });
        }
        let v = path.end().expect("level >= 1");
        let mut label: u64 = 0;
        let mut from = 0;
        for (i, s) in path.steps.iter().enumerate() {
            let level = i + 1;
            if s.vertex >= self.width(level) {
                return Err(Error::InvalidPath(format!(
                    "vertex {} at level {level} does not exist",
                    s.vertex
                )));
            }
            for u in 0..s.vertex {
                label += self.multiplicity(level, from, u) * self.completions(level, u, v);
            }
            if s.edge >= self.multiplicity(level, from, s.vertex) {
                return Err(Error::InvalidPath(format!(
                    "edge {} into vertex {} at level {level} does not exist",
                    s.edge, s.vertex
                )));
            }
            label += s.edge * self.completions(level, s.vertex, v);
            from = s.vertex;
        }
        Ok(label as usize)
    }

    pub fn unrank(&self, v: usize, label: usize) -> Result<FinitePath> {
        if v >= self.counts.len() {
            return Err(Error::NoSuchVertex {
                level: self.level,
                vertex: v,
                count: self.counts.len(),
            });
        }
        if label as u64 >= self.counts[v] {
            return Err(Error::InvalidPath(format!(
                "label {label} out of range for vertex {v} ({} paths)",
                self.counts[v]
            )));
        }
        let mut rest = label as u64;
        let mut from = 0;
        let mut steps = Vec::with_capacity(self.level);
        for level in 1..=self.level {
            let mut chosen = None;
            for u in 0..self.width(level) {
                let c = self.completions(level, u, v);
                let block = self.multiplicity(level, from, u) * c;
                if rest < block {
                    chosen = Some(Step {
                        vertex: u,
                        edge: rest / c,
                    });
                    rest %= c;
                    break;
                }
                rest -= block;
            }
            let step = chosen.expect("label within range");
            from = step.vertex;
            steps.push(step);
        }
        Ok(FinitePath { steps })
    }
}
