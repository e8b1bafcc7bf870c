use std::fmt;

use crate::diagram::{BratteliDiagram, FinitePath, PathIndex};
use crate::error::{Error, Result};
use crate::measure::{InvariantMeasure, MultiIndex};
use crate::scalar::{Arithmetic, Num};

use super::clopen::{parse_level, parse_vertex_prefix, ClopenSet};

/// An element of `G_n = ∏_v Sym(E(v₀, v))`: one permutation of canonical
/// path labels per vertex of level `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    level: usize,
    perms: Vec<Vec<usize>>,
}

impl GroupElement {
    pub fn identity(d: &BratteliDiagram, n: usize) -> Result<Self> {
        let counts = d.path_counts_capped(n)?;
        Ok(GroupElement {
            level: n,
            perms: counts.iter().map(|&h| (0..h).collect()).collect(),
        })
    }

    pub fn from_perms(d: &BratteliDiagram, n: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        let counts = d.path_counts_capped(n)?;
        if perms.len() != counts.len() {
            return Err(Error::InvalidElement(format!(
                "expected {} permutations at level {n}, got {}",
                counts.len(),
                perms.len()
            )));
        }
        for (v, (p, &h)) in perms.iter().zip(&counts).enumerate() {
            if p.len() != h {
                return Err(Error::InvalidElement(format!(
                    "vertex {v}: permutation has length {} but there are {h} paths",
                    p.len()
                )));
            }
            let mut seen = vec![false; h];
            for &x in p {
                if x >= h || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidElement(format!(
                        "vertex {v}: not a bijection of 0..{h}"
                    )));
                }
            }
        }
        Ok(GroupElement { level: n, perms })
    }

    /// Builds an element from disjoint cycles per vertex; unlisted vertices are fixed.
    pub fn from_cycles(
        d: &BratteliDiagram,
        n: usize,
        cycles: &[(usize, Vec<Vec<usize>>)],
    ) -> Result<Self> {
        let mut g = Self::identity(d, n)?;
        let mut touched = vec![false; g.perms.len()];
        for (v, cyc) in cycles {
            let v = *v;
            if v >= g.perms.len() {
                return Err(Error::InvalidElement(format!(
                    "vertex {v} does not exist at level {n}"
                )));
            }
            if std::mem::replace(&mut touched[v], true) {
                return Err(Error::InvalidElement(format!("vertex {v} listed twice")));
            }
            let h = g.perms[v].len();
            let mut used = vec![false; h];
            for c in cyc {
                for &x in c {
                    if x >= h {
                        return Err(Error::InvalidElement(format!(
                            "vertex {v}: label {x} out of range ({h} paths)"
                        )));
                    }
                    if std::mem::replace(&mut used[x], true) {
                        return Err(Error::InvalidElement(format!(
                            "vertex {v}: label {x} appears in more than one cycle position"
                        )));
                    }
                }
                for i in 0..c.len() {
                    g.perms[v][c[i]] = c[(i + 1) % c.len()];
                }
            }
        }
        Ok(g)
    }

    pub fn transposition(
        d: &BratteliDiagram,
        n: usize,
        v: usize,
        a: usize,
        b: usize,
    ) -> Result<Self> {
        Self::from_cycles(d, n, &[(v, vec![vec![a, b]])])
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn apply(&self, v: usize, label: usize) -> usize {
        self.perms[v][label]
    }

    pub fn is_identity(&self) -> bool {
        self.perms
            .iter()
            .all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    /// The same homeomorphism written as an element of `G_m`.
    pub fn lift(&self, d: &BratteliDiagram, m: usize) -> Result<GroupElement> {
        if m < self.level {
            return Err(Error::InvalidArgument(format!(
                "cannot lift a level-{} element down to level {m}",
                self.level
            )));
        }
        if m == self.level {
            return Ok(self.clone());
        }
        let counts = d.path_counts_capped(m)?;
        let hi = PathIndex::new(d, m)?;
        let lo = PathIndex::new(d, self.level)?;
        let mut perms = Vec::with_capacity(counts.len());
        for (v, &h) in counts.iter().enumerate() {
            let mut perm = Vec::with_capacity(h);
            for l in 0..h {
                let p = hi.unrank(v, l)?;
                let moved = apply_with(&lo, self, &p)?;
                perm.push(hi.rank(&moved)?);
            }
            perms.push(perm);
        }
        Ok(GroupElement { level: m, perms })
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, d: &BratteliDiagram, other: &GroupElement) -> Result<GroupElement> {
        let m = self.level.max(other.level);
        let a = self.lift(d, m)?;
        let b = other.lift(d, m)?;
        let perms = a
            .perms
            .iter()
            .zip(&b.perms)
            .map(|(pa, pb)| pb.iter().map(|&x| pa[x]).collect())
            .collect();
        Ok(GroupElement { level: m, perms })
    }

    pub fn inverse(&self) -> GroupElement {
        let perms = self
            .perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; p.len()];
                for (i, &x) in p.iter().enumerate() {
                    inv[x] = i;
                }
                inv
            })
            .collect();
        GroupElement {
            level: self.level,
            perms,
        }
    }

    /// `h g h⁻¹`.
    pub fn conjugate_by(&self, d: &BratteliDiagram, h: &GroupElement) -> Result<GroupElement> {
        h.compose(d, self)?.compose(d, &h.inverse())
    }

    /// Equality as homeomorphisms (compared at the common level).
    pub fn same_element(&self, d: &BratteliDiagram, other: &GroupElement) -> Result<bool> {
        let m = self.level.max(other.level);
        Ok(self.lift(d, m)?.perms == other.lift(d, m)?.perms)
    }

    /// `Fix(g)`, exact at the element's own level.
    pub fn fixed_set(&self) -> ClopenSet {
        ClopenSet::from_bitmaps(
            self.level,
            self.perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &x)| i == x).collect())
                .collect(),
        )
    }

    pub fn support(&self) -> ClopenSet {
        self.fixed_set().complement()
    }

    pub fn fix_measure(&self, mu: &InvariantMeasure) -> Result<Num> {
        mu.clopen_measure(&self.fixed_set())
    }

    /// `∏ μ_i(Fix g)^{α_i}`.
    pub fn fix_measure_product(
        &self,
        measures: &[InvariantMeasure],
        alpha: &MultiIndex,
    ) -> Result<Num> {
        alpha.check_labels(measures.len())?;
        let fixed = self.fixed_set();
        let mut acc = Num::one(Arithmetic::Rational);
        for (i, &e) in alpha.exponents().iter().enumerate() {
            if e > 0 {
                acc = acc * measures[i].clopen_measure(&fixed)?.pow(e);
            }
        }
        Ok(acc)
    }

    pub fn act_on_path(&self, d: &BratteliDiagram, p: &FinitePath) -> Result<FinitePath> {
        self.action(d)?.apply(p)
    }

    pub fn act_on_clopen(&self, d: &BratteliDiagram, a: &ClopenSet) -> Result<ClopenSet> {
        let m = self.level.max(a.level());
        let g = self.lift(d, m)?;
        let a = a.lift(d, m)?;
        let mut image = ClopenSet::empty(d, m)?;
        for (v, l) in a.labels() {
            image.insert(v, g.perms[v][l])?;
        }
        Ok(image)
    }

    /// Precomputes what is needed to act on many paths.
    pub fn action(&self, d: &BratteliDiagram) -> Result<ElementAction<'_>> {
        Ok(ElementAction {
            element: self,
            index: PathIndex::new(d, self.level)?,
        })
    }

    /// Parses `level=n; v0:(0 1)(2 3); v1:id`.
    pub fn parse(d: &BratteliDiagram, text: &str) -> Result<GroupElement> {
        let mut parts = text.split(';').map(str::trim).filter(|s| !s.is_empty());
        let head = parts
            .next()
            .ok_or_else(|| Error::InvalidElement("empty element text".into()))?;
        let level = parse_level(head).map_err(Error::InvalidElement)?;
        let mut cycles = Vec::new();
        for part in parts {
            let (v, rest) = parse_vertex_prefix(part).map_err(Error::InvalidElement)?;
            cycles.push((v, parse_cycles(rest)?));
        }
        Self::from_cycles(d, level, &cycles)
    }

    /// Disjoint cycles (length ≥ 2) of the permutation at vertex `v`.
    pub fn cycles(&self, v: usize) -> Vec<Vec<usize>> {
        let p = &self.perms[v];
        let mut seen = vec![false; p.len()];
        let mut out = Vec::new();
        for start in 0..p.len() {
            if seen[start] || p[start] == start {
                continue;
            }
            let mut c = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                c.push(x);
                x = p[x];
            }
            out.push(c);
        }
        out
    }
}

fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    let text = text.trim();
    if text == "id" || text.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::InvalidElement(format!("expected '(' in {text:?}")))?;
        let close = body
            .find(')')
            .ok_or_else(|| Error::InvalidElement(format!("unclosed cycle in {text:?}")))?;
        let cycle = body[..close]
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidElement(format!("bad label {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(cycle);
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level={}", self.level)?;
        for v in 0..self.perms.len() {
            let cycles = self.cycles(v);
            if cycles.is_empty() {
                continue;
            }
            write!(f, "; v{v}:")?;
            for c in cycles {
                let items: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", items.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Applies `g` (level `lo.level()`) to a path of at least that length.
fn apply_with(lo: &PathIndex, g: &GroupElement, p: &FinitePath) -> Result<FinitePath> {
    let n = lo.level();
    if p.level() < n {
        return Err(Error::DepthExceeded {
            needed: n,
            available: p.level(),
        });
    }
    let prefix = p.prefix(n);
    let v = prefix.end().expect("level >= 1");
    let image = g.perms[v][lo.rank(&prefix)?];
    Ok(lo.unrank(v, image)?.concat(p.tail(n)))
}

/// A group element bundled with the path index of its level.
#[derive(Debug, Clone)]
pub struct ElementAction<'a> {
    element: &'a GroupElement,
    index: PathIndex,
}

impl ElementAction<'_> {
    pub fn element(&self) -> &GroupElement {
        self.element
    }

    /// `g(p)`: the level-`n` prefix is permuted, the tail is kept.
    pub fn apply(&self, p: &FinitePath) -> Result<FinitePath> {
        apply_with(&self.index, self.element, p)
    }

    /// Whether `g` fixes every infinite path extending `p`.
    pub fn fixes(&self, p: &FinitePath) -> Result<bool> {
        let n = self.index.level();
        if p.level() < n {
            return Err(Error::DepthExceeded {
                needed: n,
                available: p.level(),
            });
        }
        let prefix = p.prefix(n);
        let v = prefix.end().expect("level >= 1");
        let l = self.index.rank(&prefix)?;
        Ok(self.element.perms[v][l] == l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odo() -> BratteliDiagram {
        BratteliDiagram::odometer(2)
    }

    #[test]
    fn lift_of_level_one_transposition() {
        let d = odo();
        let t = GroupElement::transposition(&d, 1, 0, 0, 1).unwrap();
        let l = t.lift(&d, 2).unwrap();
        assert_eq!(l.perms()[0], vec![2, 3, 0, 1]);
        assert_eq!(l.cycles(0).len(), 2);
        assert!(GroupElement::identity(&d, 1)
            .unwrap()
            .lift(&d, 4)
            .unwrap()
            .is_identity());
        assert_eq!(t.lift(&d, 1).unwrap(), t);
    }

    #[test]
    fn inverse_and_squares() {
        let d = odo();
        let c = GroupElement::parse(&d, "level=2; v0:(0 1 3)").unwrap();
        assert!(c.compose(&d, &c.inverse()).unwrap().is_identity());
        let t = GroupElement::transposition(&d, 2, 0, 1, 2).unwrap();
        assert!(t.compose(&d, &t).unwrap().is_identity());
    }

    #[test]
    fn fixed_sets() {
        let d = odo();
        let t1 = GroupElement::transposition(&d, 1, 0, 0, 1).unwrap();
        assert!(t1.fixed_set().is_empty());
        let t2 = GroupElement::transposition(&d, 2, 0, 0, 1).unwrap();
        let fix = t2.fixed_set();
        assert_eq!(fix.labels().collect::<Vec<_>>(), vec![(0, 2), (0, 3)]);
        assert!(GroupElement::identity(&d, 3)
            .unwrap()
            .fixed_set()
            .is_whole());
        assert_eq!(t2.support().len(), 2);
    }

    #[test]
    fn action_on_cylinders() {
        let d = odo();
        let t1 = GroupElement::transposition(&d, 1, 0, 0, 1).unwrap();
        let c0 = ClopenSet::from_labels(&d, 1, [(0, 0)]).unwrap();
        let image = t1.act_on_clopen(&d, &c0).unwrap();
        assert_eq!(image.labels().collect::<Vec<_>>(), vec![(0, 1)]);
        let p = d.enumerate_paths(3, 0).unwrap()[1].clone();
        let q = t1.act_on_path(&d, &p).unwrap();
        assert_eq!(q.steps()[0].edge, 1);
        assert_eq!(q.tail(1), p.tail(1));
        assert!(t1.act_on_path(&d, &p.prefix(0)).is_err());
    }

    #[test]
    fn text_format() {
        let d = odo();
        let g = GroupElement::parse(&d, "level=2; v0:(0 1)(2 3)").unwrap();
        assert_eq!(g.to_string(), "level=2; v0:(0 1)(2 3)");
        assert!(GroupElement::parse(&d, "level=2; v0:id")
            .unwrap()
            .is_identity());
        assert!(GroupElement::parse(&d, "level=2; v0:(0 4)").is_err());
        assert!(GroupElement::parse(&d, "level=2; v0:(0 1)(1 2)").is_err());
        assert!(GroupElement::parse(&d, "level=2; v0:(0 1").is_err());
        assert!(GroupElement::parse(&d, "level=2; v3:(0 1)").is_err());
        assert!(GroupElement::parse(&d, "v0:(0 1)").is_err());
    }

    #[test]
    fn from_perms_validates() {
        let d = odo();
        assert!(GroupElement::from_perms(&d, 1, vec![vec![0, 0]]).is_err());
        assert!(GroupElement::from_perms(&d, 1, vec![vec![0]]).is_err());
        assert!(GroupElement::from_perms(&d, 1, vec![vec![1, 0]]).is_ok());
    }
}
