//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use bratteli::group::YoungSubgroupDescriptor;
use bratteli::{Arithmetic, BratteliDiagram, GroupElement, InvariantMeasure, MultiIndex, Num};
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn odometer2() -> BratteliDiagram {
    BratteliDiagram::odometer(2)
}

pub fn ones2() -> BratteliDiagram {
    BratteliDiagram::stationary(vec![1, 1], vec![vec![1, 1], vec![1, 1]]).unwrap()
}

/// Two 2-odometers sharing only the root.
pub fn split2() -> BratteliDiagram {
    BratteliDiagram::stationary(vec![1, 1], vec![vec![2, 0], vec![0, 2]]).unwrap()
}

/// Uniform cylinder weights `2^{-n}` on the 2-odometer, written out by hand.
pub fn odometer2_measure(depth: usize) -> InvariantMeasure {
    let levels = (1..=depth).map(|n| vec![Num::ratio(1, 1 << n)]).collect();
    InvariantMeasure::new(&odometer2(), levels, Arithmetic::Rational).unwrap()
}

/// `2^{-n}` at both vertices of the all-ones diagram (`h = 2^{n-1}` each).
pub fn ones2_measure(depth: usize) -> InvariantMeasure {
    let levels = (1..=depth)
        .map(|n| vec![Num::ratio(1, 1 << n); 2])
        .collect();
    InvariantMeasure::new(&ones2(), levels, Arithmetic::Rational).unwrap()
}

/// The two ergodic measures of `split2`: all mass on one odometer.
pub fn split2_measures(depth: usize) -> Vec<InvariantMeasure> {
    (0..2)
        .map(|side| {
            let levels = (1..=depth)
                .map(|n| {
                    let mut l = vec![Num::integer(0); 2];
                    l[side] = Num::ratio(1, 1 << (n - 1));
                    l
                })
                .collect();
            InvariantMeasure::new(&split2(), levels, Arithmetic::Rational)
                .unwrap()
                .with_label(side)
        })
        .collect()
}

fn weights(mu: &InvariantMeasure, n: usize) -> Vec<BigRational> {
    mu.level(n)
        .unwrap()
        .iter()
        .map(|q| q.as_rational().expect("exact measure").clone())
        .collect()
}

/// `∏_i (Σ_{(v,l): σ_v(l) = l} q_i(v))^{α_i}` read straight off the permutations.
pub fn chi_oracle(
    perms: &[Vec<usize>],
    n: usize,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
) -> BigRational {
    let mut acc = rat(1, 1);
    for (i, &e) in alpha.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        let q = weights(&measures[i], n);
        let mut fix = rat(0, 1);
        for (v, p) in perms.iter().enumerate() {
            for (l, &x) in p.iter().enumerate() {
                if l == x {
                    fix += &q[v];
                }
            }
        }
        for _ in 0..e {
            acc *= &fix;
        }
    }
    acc
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Average of the χ oracle over every element of the subgroup, by enumeration.
pub fn brute_average(
    desc: &YoungSubgroupDescriptor,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
) -> BigRational {
    let n = desc.level();
    let per_vertex: Vec<Vec<Vec<usize>>> = (0..desc.sizes().len())
        .map(|v| {
            let free = desc.free(v);
            permutations(free)
                .into_iter()
                .map(|image| {
                    let mut perm: Vec<usize> = (0..desc.sizes()[v]).collect();
                    for (&src, &dst) in free.iter().zip(&image) {
                        perm[src] = dst;
                    }
                    perm
                })
                .collect()
        })
        .collect();
    let mut total = rat(0, 1);
    let mut count = 0i64;
    let mut idx = vec![0usize; per_vertex.len()];
    loop {
        let perms: Vec<Vec<usize>> = idx
            .iter()
            .enumerate()
            .map(|(v, &i)| per_vertex[v][i].clone())
            .collect();
        total += chi_oracle(&perms, n, alpha, measures);
        count += 1;
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < per_vertex[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    total / BigInt::from(count)
}

/// Left side of the inclusion-exclusion identity by counting: a product
/// cylinder lies in some `(∪C̄)^k` iff it uses at most `p` distinct cylinders.
pub fn iep_lhs_oracle(
    d: &BratteliDiagram,
    alpha: &MultiIndex,
    measures: &[InvariantMeasure],
    n: usize,
    p: usize,
) -> BigRational {
    let h = d.path_counts_capped(n).unwrap();
    let cyl: Vec<usize> = h
        .iter()
        .enumerate()
        .flat_map(|(v, &c)| std::iter::repeat_n(v, c))
        .collect();
    let labels = alpha.coordinate_labels();
    let q: Vec<Vec<BigRational>> = measures.iter().map(|m| weights(m, n)).collect();
    let mut total = rat(0, 1);
    let mut tuple = vec![0usize; labels.len()];
    loop {
        let mut distinct = tuple.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() <= p {
            let mut term = rat(1, 1);
            for (j, &c) in tuple.iter().enumerate() {
                term *= &q[labels[j]][cyl[c]];
            }
            total += term;
        }
        let mut k = 0;
        while k < tuple.len() {
            tuple[k] += 1;
            if tuple[k] < cyl.len() {
                break;
            }
            tuple[k] = 0;
            k += 1;
        }
        if k == tuple.len() {
            break;
        }
    }
    total
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |a, k| a * k)
}

pub fn element(d: &BratteliDiagram, text: &str) -> GroupElement {
    GroupElement::parse(d, text).unwrap()
}
