use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};

use super::clopen::ClopenSet;
use super::element::GroupElement;

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// A Young subgroup of `G_n`: per vertex, the labels it may permute freely;
/// every other label is fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YoungSubgroupDescriptor {
    level: usize,
    sizes: Vec<usize>,
    free: Vec<Vec<usize>>,
}

impl YoungSubgroupDescriptor {
    fn from_free_set(set: &ClopenSet) -> Self {
        let sizes = (0..set.vertex_count()).map(|v| set.paths_at(v)).collect();
        let mut free = vec![Vec::new(); set.vertex_count()];
        for (v, l) in set.labels() {
            free[v].push(l);
        }
        YoungSubgroupDescriptor {
            level: set.level(),
            sizes,
            free,
        }
    }

    /// All of `G_n`.
    pub fn full(d: &BratteliDiagram, n: usize) -> Result<Self> {
        Ok(Self::from_free_set(&ClopenSet::whole(d, n)?))
    }

    /// `G_n∘(A)`: elements of `G_n` fixing every point of `A`.
    pub fn pointwise_stabilizer(d: &BratteliDiagram, a: &ClopenSet, n: usize) -> Result<Self> {
        Ok(Self::from_free_set(&a.lift(d, n)?.complement()))
    }

    /// `L_n(C)`: elements of `G_n` supported in `C`.
    pub fn local_subgroup(d: &BratteliDiagram, c: &ClopenSet, n: usize) -> Result<Self> {
        Ok(Self::from_free_set(&c.lift(d, n)?))
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn free(&self, v: usize) -> &[usize] {
        &self.free[v]
    }

    pub fn free_counts(&self) -> Vec<usize> {
        self.free.iter().map(Vec::len).collect()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn free_set(&self) -> ClopenSet {
        let members = self
            .sizes
            .iter()
            .zip(&self.free)
            .map(|(&h, f)| {
                let mut row = vec![false; h];
                f.iter().for_each(|&l| row[l] = true);
                row
            })
            .collect();
        ClopenSet::from_bitmaps(self.level, members)
    }

    /// `∏_v (free_v)!`.
    pub fn order(&self) -> BigUint {
        self.free
            .iter()
            .map(|f| factorial(f.len()))
            .fold(BigUint::one(), |a, b| a * b)
    }

    pub fn contains(&self, d: &BratteliDiagram, g: &GroupElement) -> Result<bool> {
        if g.level() > self.level {
            return Err(Error::InvalidArgument(format!(
                "element of level {} is not compared against a level-{} subgroup",
                g.level(),
                self.level
            )));
        }
        let g = g.lift(d, self.level)?;
        let free = self.free_set();
        Ok(g.perms().iter().enumerate().all(|(v, p)| {
            p.iter().enumerate().all(|(l, &x)| {
                if free.contains(v, l) {
                    free.contains(v, x)
                } else {
                    x == l
                }
            })
        }))
    }

    /// A transposition and a full cycle on the free labels of each vertex.
    pub fn generators(&self, d: &BratteliDiagram) -> Result<Vec<GroupElement>> {
        let mut gens = Vec::new();
        for (v, f) in self.free.iter().enumerate() {
            if f.len() < 2 {
                continue;
            }
            gens.push(GroupElement::from_cycles(
                d,
                self.level,
                &[(v, vec![vec![f[0], f[1]]])],
            )?);
            if f.len() > 2 {
                gens.push(GroupElement::from_cycles(
                    d,
                    self.level,
                    &[(v, vec![f.clone()])],
                )?);
            }
        }
        Ok(gens)
    }

    /// Uniform element: independent uniform shuffles of each vertex's free labels.
    pub fn random_element<R: Rng + ?Sized>(
        &self,
        d: &BratteliDiagram,
        rng: &mut R,
    ) -> Result<GroupElement> {
        let mut perms: Vec<Vec<usize>> = self.sizes.iter().map(|&h| (0..h).collect()).collect();
        for (v, f) in self.free.iter().enumerate() {
            let mut image = f.clone();
            image.shuffle(rng);
            for (&src, &dst) in f.iter().zip(&image) {
                perms[v][src] = dst;
            }
        }
        GroupElement::from_perms(d, self.level, perms)
    }
}

pub fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |a, k| a * k)
}

/// Order of the subgroup of `G_n` generated by `gens` (lifted to level `n`),
/// by breadth-first closure. Fails once more than `cap` elements are found.
pub fn generated_subgroup_order(
    d: &BratteliDiagram,
    gens: &[GroupElement],
    n: usize,
    cap: usize,
) -> Result<BigUint> {
    let counts = d.path_counts_capped(n)?;
    let offsets: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &h| {
            let o = *acc;
            *acc += h;
            Some(o)
        })
        .collect();
    let degree: usize = counts.iter().sum();
    let flat = |g: &GroupElement| -> Vec<u32> {
        let mut out = vec![0u32; degree];
        for (v, p) in g.perms().iter().enumerate() {
            for (l, &x) in p.iter().enumerate() {
                out[offsets[v] + l] = (offsets[v] + x) as u32;
            }
        }
        out
    };
    let gens = gens
        .iter()
        .map(|g| g.lift(d, n).map(|g| flat(&g)))
        .collect::<Result<Vec<_>>>()?;

    let identity: Vec<u32> = (0..degree as u32).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y: Vec<u32> = x.iter().map(|&i| g[i as usize]).collect();
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded {
                        what: "subgroup closure",
                        size: format!(">{cap}"),
                        cap: cap.to_string(),
                    });
                }
                seen.insert(y.clone());
                frontier.push(y);
            }
        }
    }
    Ok(BigUint::from(seen.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn odo() -> BratteliDiagram {
        BratteliDiagram::odometer(2)
    }

    #[test]
    fn stabilizer_orders() {
        let d = odo();
        let empty = ClopenSet::empty(&d, 1).unwrap();
        assert_eq!(
            YoungSubgroupDescriptor::pointwise_stabilizer(&d, &empty, 2)
                .unwrap()
                .order(),
            BigUint::from(24u32)
        );
        let one = ClopenSet::from_labels(&d, 2, [(0, 3)]).unwrap();
        assert_eq!(
            YoungSubgroupDescriptor::pointwise_stabilizer(&d, &one, 2)
                .unwrap()
                .order(),
            BigUint::from(6u32)
        );
        let all = ClopenSet::whole(&d, 2).unwrap();
        assert_eq!(
            YoungSubgroupDescriptor::pointwise_stabilizer(&d, &all, 2)
                .unwrap()
                .order(),
            BigUint::one()
        );
    }

    #[test]
    fn stabilizer_is_local_subgroup_of_complement() {
        let d = odo();
        let a = ClopenSet::from_labels(&d, 2, [(0, 0), (0, 2)]).unwrap();
        let s = YoungSubgroupDescriptor::pointwise_stabilizer(&d, &a, 3).unwrap();
        let l = YoungSubgroupDescriptor::local_subgroup(&d, &a.complement(), 3).unwrap();
        assert_eq!(s, l);
    }

    #[test]
    fn sym3_order() {
        let d =
            BratteliDiagram::from_rows(vec![3], vec![], crate::diagram::Continuation::Truncated)
                .unwrap();
        let t = GroupElement::parse(&d, "level=1; v0:(0 1)").unwrap();
        let c = GroupElement::parse(&d, "level=1; v0:(0 1 2)").unwrap();
        assert_eq!(
            generated_subgroup_order(&d, &[t, c], 1, 100).unwrap(),
            BigUint::from(6u32)
        );
        assert_eq!(
            generated_subgroup_order(&d, &[], 1, 100).unwrap(),
            BigUint::one()
        );
    }

    #[test]
    fn closure_cap() {
        let d = odo();
        let full = YoungSubgroupDescriptor::full(&d, 3).unwrap();
        let gens = full.generators(&d).unwrap();
        assert!(matches!(
            generated_subgroup_order(&d, &gens, 3, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn random_elements_respect_fixed_labels() {
        let d = odo();
        let a = ClopenSet::from_labels(&d, 2, [(0, 1)]).unwrap();
        let s = YoungSubgroupDescriptor::pointwise_stabilizer(&d, &a, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let g = s.random_element(&d, &mut rng).unwrap();
            assert_eq!(g.apply(0, 1), 1);
            assert!(s.contains(&d, &g).unwrap());
        }
        let trivial =
            YoungSubgroupDescriptor::pointwise_stabilizer(&d, &ClopenSet::whole(&d, 2).unwrap(), 2)
                .unwrap();
        assert!(trivial.random_element(&d, &mut rng).unwrap().is_identity());
    }

    #[test]
    fn sym2_uniform() {
        let d = odo();
        let full = YoungSubgroupDescriptor::full(&d, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 10_000;
        let ids = (0..n)
            .filter(|_| full.random_element(&d, &mut rng).unwrap().is_identity())
            .count();
        let p = ids as f64 / n as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "p = {p}");
    }
}
