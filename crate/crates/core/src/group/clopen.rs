use std::fmt;

use crate::diagram::{BratteliDiagram, FinitePath, PathIndex};
use crate::error::{Error, Result};

/// A clopen subset of the path space: a union of level-`n` cylinders, stored
/// as one membership bitmap per vertex of `V_n` indexed by canonical label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    level: usize,
    members: Vec<Vec<bool>>,
}

impl ClopenSet {
    pub fn empty(d: &BratteliDiagram, n: usize) -> Result<Self> {
        let counts = d.path_counts_capped(n)?;
        Ok(ClopenSet {
            level: n,
            members: counts.iter().map(|&h| vec![false; h]).collect(),
        })
    }

    pub fn whole(d: &BratteliDiagram, n: usize) -> Result<Self> {
        let counts = d.path_counts_capped(n)?;
        Ok(ClopenSet {
            level: n,
            members: counts.iter().map(|&h| vec![true; h]).collect(),
        })
    }

    pub fn from_labels(
        d: &BratteliDiagram,
        n: usize,
        labels: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = Self::empty(d, n)?;
        for (v, l) in labels {
            set.insert(v, l)?;
        }
        Ok(set)
    }

    pub(crate) fn from_bitmaps(level: usize, members: Vec<Vec<bool>>) -> Self {
        ClopenSet { level, members }
    }

    /// The cylinder of all infinite paths extending `p`.
    pub fn cylinder(d: &BratteliDiagram, p: &FinitePath) -> Result<Self> {
        let n = p.level();
        let idx = PathIndex::new(d, n)?;
        let label = idx.rank(p)?;
        Self::from_labels(d, n, [(p.end().expect("level >= 1"), label)])
    }

    pub fn insert(&mut self, v: usize, label: usize) -> Result<()> {
        let level = self.level;
        let row = self.members.get_mut(v).ok_or_else(|| {
            Error::InvalidClopen(format!("vertex {v} does not exist at level {level}"))
        })?;
        let h = row.len();
        let slot = row.get_mut(label).ok_or_else(|| {
            Error::InvalidClopen(format!(
                "label {label} out of range for vertex {v} ({h} paths)"
            ))
        })?;
        *slot = true;
        Ok(())
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: usize, label: usize) -> bool {
        self.members
            .get(v)
            .and_then(|r| r.get(label))
            .copied()
            .unwrap_or(false)
    }

    pub fn count_at(&self, v: usize) -> usize {
        self.members[v].iter().filter(|&&b| b).count()
    }

    pub fn paths_at(&self, v: usize) -> usize {
        self.members[v].len()
    }

    pub fn len(&self) -> usize {
        (0..self.members.len()).map(|v| self.count_at(v)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.members.iter().flatten().all(|&b| !b)
    }

    pub fn is_whole(&self) -> bool {
        self.members.iter().flatten().all(|&b| b)
    }

    /// Member labels as `(vertex, label)` pairs in increasing order.
    pub fn labels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.iter().enumerate().flat_map(|(v, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(move |(l, _)| (v, l))
        })
    }

    /// The same set expressed with level-`m` cylinders.
    pub fn lift(&self, d: &BratteliDiagram, m: usize) -> Result<ClopenSet> {
        if m < self.level {
            return Err(Error::InvalidArgument(format!(
                "cannot lift a level-{} set down to level {m}",
                self.level
            )));
        }
        if m == self.level {
            return Ok(self.clone());
        }
        let counts = d.path_counts_capped(m)?;
        let hi = PathIndex::new(d, m)?;
        let lo = PathIndex::new(d, self.level)?;
        let mut members = Vec::with_capacity(counts.len());
        for (v, &h) in counts.iter().enumerate() {
            let mut row = Vec::with_capacity(h);
            for l in 0..h {
                let p = hi.unrank(v, l)?;
                let prefix = p.prefix(self.level);
                let w = prefix.end().expect("level >= 1");
                row.push(self.members[w][lo.rank(&prefix)?]);
            }
            members.push(row);
        }
        Ok(ClopenSet { level: m, members })
    }

    pub fn complement(&self) -> ClopenSet {
        ClopenSet {
            level: self.level,
            members: self
                .members
                .iter()
                .map(|r| r.iter().map(|b| !b).collect())
                .collect(),
        }
    }

    fn zip_with(
        &self,
        d: &BratteliDiagram,
        other: &ClopenSet,
        f: impl Fn(bool, bool) -> bool,
    ) -> Result<ClopenSet> {
        let m = self.level.max(other.level);
        let a = self.lift(d, m)?;
        let b = other.lift(d, m)?;
        Ok(ClopenSet {
            level: m,
            members: a
                .members
                .iter()
                .zip(&b.members)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        })
    }

    pub fn union(&self, d: &BratteliDiagram, other: &ClopenSet) -> Result<ClopenSet> {
        self.zip_with(d, other, |a, b| a || b)
    }

    pub fn intersection(&self, d: &BratteliDiagram, other: &ClopenSet) -> Result<ClopenSet> {
        self.zip_with(d, other, |a, b| a && b)
    }

    pub fn difference(&self, d: &BratteliDiagram, other: &ClopenSet) -> Result<ClopenSet> {
        self.zip_with(d, other, |a, b| a && !b)
    }

    /// Equality as subsets of the path space.
    pub fn same_set(&self, d: &BratteliDiagram, other: &ClopenSet) -> Result<bool> {
        let m = self.level.max(other.level);
        Ok(self.lift(d, m)?.members == other.lift(d, m)?.members)
    }

    pub fn is_subset(&self, d: &BratteliDiagram, other: &ClopenSet) -> Result<bool> {
        Ok(self.difference(d, other)?.is_empty())
    }

    /// Parses `level=n; v0:0,1,5; v1:2` or `level=n; all`. Unlisted vertices
    /// contribute nothing.
    pub fn parse(d: &BratteliDiagram, text: &str) -> Result<ClopenSet> {
        let mut parts = text.split(';').map(str::trim).filter(|s| !s.is_empty());
        let head = parts
            .next()
            .ok_or_else(|| Error::InvalidClopen("empty clopen-set text".into()))?;
        let level = parse_level(head).map_err(Error::InvalidClopen)?;
        let mut set = ClopenSet::empty(d, level)?;
        for part in parts {
            if part == "all" {
                set = ClopenSet::whole(d, level)?;
                continue;
            }
            let (v, rest) = parse_vertex_prefix(part).map_err(Error::InvalidClopen)?;
            for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let l: usize = tok
                    .parse()
                    .map_err(|_| Error::InvalidClopen(format!("bad label {tok:?}")))?;
                set.insert(v, l)?;
            }
        }
        Ok(set)
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level={}", self.level)?;
        for (v, row) in self.members.iter().enumerate() {
            let labels: Vec<String> = row
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(l, _)| l.to_string())
                .collect();
            if !labels.is_empty() {
                write!(f, "; v{v}:{}", labels.join(","))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn parse_level(head: &str) -> std::result::Result<usize, String> {
    let value = head
        .strip_prefix("level")
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| format!("expected `level=n`, got {head:?}"))?;
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("bad level {value:?}"))?;
    if n == 0 {
        return Err("level must be at least 1".into());
    }
    Ok(n)
}

pub(crate) fn parse_vertex_prefix(part: &str) -> std::result::Result<(usize, &str), String> {
    let (head, rest) = part
        .split_once(':')
        .ok_or_else(|| format!("expected `v<index>:...`, got {part:?}"))?;
    let v = head
        .trim()
        .strip_prefix('v')
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| format!("bad vertex name {head:?}"))?;
    Ok((v, rest.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_preserves_set() {
        let d = BratteliDiagram::odometer(2);
        let a = ClopenSet::from_labels(&d, 1, [(0, 0)]).unwrap();
        let lifted = a.lift(&d, 3).unwrap();
        assert_eq!(lifted.len(), 4);
        // first edge 0 means labels 0..4 at level 3
        assert!((0..4).all(|l| lifted.contains(0, l)));
        assert!(a.same_set(&d, &lifted).unwrap());
    }

    #[test]
    fn boolean_ops() {
        let d = BratteliDiagram::odometer(2);
        let a = ClopenSet::from_labels(&d, 2, [(0, 0), (0, 1)]).unwrap();
        let b = ClopenSet::from_labels(&d, 2, [(0, 1), (0, 2)]).unwrap();
        assert_eq!(a.union(&d, &b).unwrap().len(), 3);
        assert_eq!(a.intersection(&d, &b).unwrap().len(), 1);
        assert_eq!(a.difference(&d, &b).unwrap().len(), 1);
        assert_eq!(a.complement().len(), 2);
        assert!(a.union(&d, &a.complement()).unwrap().is_whole());
    }

    #[test]
    fn parse_and_display() {
        let d = BratteliDiagram::odometer(2);
        let a = ClopenSet::parse(&d, "level=2; v0:0,3").unwrap();
        assert_eq!(a.to_string(), "level=2; v0:0,3");
        assert!(ClopenSet::parse(&d, "level=2; all").unwrap().is_whole());
        assert!(ClopenSet::parse(&d, "level=2").unwrap().is_empty());
        assert!(ClopenSet::parse(&d, "level=2; v0:4").is_err());
        assert!(ClopenSet::parse(&d, "level=2; v1:0").is_err());
        assert!(ClopenSet::parse(&d, "lvl=2").is_err());
    }
}
