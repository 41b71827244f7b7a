//! Maximum δ-additive subsets of a finite candidate set.
//!
//! Candidates are normalized grid points; two candidates are adjacent when
//! their sum has gauge at most δ, so δ-additive subsets are exactly cliques.
//! Results only speak about the candidate set, not the whole unit sphere.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{QVector, Rational};
use crate::error::{Error, Result};
use crate::norms::{check_distinct, Norm};

/// All nonzero points of `{k/resolution : |k| <= resolution}^d`, scaled to
/// gauge 1, without repetitions and in sorted order.
pub fn enumerate_candidates(norm: &Norm, resolution: u32) -> Result<Vec<QVector>> {
    if resolution == 0 {
        return Err(Error::InvalidParameters("resolution must be positive".into()));
    }
    let d = norm.dimension();
    let gauge = norm.evaluator()?;
    let r = resolution as i64;
    let mut out = BTreeSet::new();
    let mut k = vec![-r; d];
    loop {
        if k.iter().any(|&c| c != 0) {
            let x = QVector::new(k.iter().map(|&c| Rational::new(c.into(), r.into())).collect());
            let g = gauge.eval(&x)?;
            out.insert(x.scale(&g.recip()));
        }
        // Odometer step; stops after the last point.
        let Some(pos) = k.iter().rposition(|&c| c < r) else {
            break;
        };
        k[pos] += 1;
        for c in &mut k[pos + 1..] {
            *c = -r;
        }
    }
    Ok(out.into_iter().collect())
}

#[derive(Clone, Debug)]
pub struct AdditivityGraph {
    pub norm: Norm,
    pub delta: Rational,
    pub vertices: Vec<QVector>,
    adjacency: Vec<FixedBitSet>,
}

impl AdditivityGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(j)
    }

    pub fn neighbors(&self, i: usize) -> &FixedBitSet {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len()).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    pub fn is_clique(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(a, &i)| members[a + 1..].iter().all(|&j| self.has_edge(i, j)))
    }
}

/// Builds the graph on `candidates`, each of which must have gauge exactly 1.
pub fn build_graph(norm: &Norm, candidates: Vec<QVector>, delta: &Rational) -> Result<AdditivityGraph> {
    let gauge = norm.evaluator()?;
    for (index, x) in candidates.iter().enumerate() {
        let g = gauge.eval(x)?;
        if !g.is_one() {
            return Err(Error::InvalidCandidate { index, gauge: g });
        }
    }
    check_distinct(&candidates)?;
    let Some((rows, scale)) = scaled_integers(norm, &candidates) else {
        return build_graph_generic(norm, candidates, delta);
    };
    let (Some(p), Some(qd)) = (delta.numer().to_i128(), delta.denom().to_i128()) else {
        return build_graph_generic(norm, candidates, delta);
    };
    // gauge((X + Y)/D) <= p/q  <=>  q * gauge(X + Y) <= p * D
    let bound = p * scale as i128;
    let linf = matches!(norm, Norm::LInf { .. });
    let n = candidates.len();
    let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
    for i in 0..n {
        for j in i + 1..n {
            let sums = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a + b).abs() as i128);
            let g = if linf { sums.max().unwrap_or(0) } else { sums.sum() };
            if qd * g <= bound {
                adjacency[i].insert(j);
                adjacency[j].insert(i);
            }
        }
    }
    Ok(AdditivityGraph {
        norm: norm.clone(),
        delta: delta.clone(),
        vertices: candidates,
        adjacency,
    })
}

fn build_graph_generic(norm: &Norm, candidates: Vec<QVector>, delta: &Rational) -> Result<AdditivityGraph> {
    let gauge = norm.evaluator()?;
    let n = candidates.len();
    let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
    for i in 0..n {
        for j in i + 1..n {
            if gauge.eval(&(&candidates[i] + &candidates[j]))? <= *delta {
                adjacency[i].insert(j);
                adjacency[j].insert(i);
            }
        }
    }
    Ok(AdditivityGraph {
        norm: norm.clone(),
        delta: delta.clone(),
        vertices: candidates,
        adjacency,
    })
}

/// For ℓ∞ and ℓ¹, the candidates as machine integers over a common
/// denominator, when everything fits comfortably.
fn scaled_integers(norm: &Norm, candidates: &[QVector]) -> Option<(Vec<Vec<i64>>, i64)> {
    if !matches!(norm, Norm::LInf { .. } | Norm::L1 { .. }) {
        return None;
    }
    let limit = BigInt::one() << 40;
    let mut lcm = BigInt::one();
    for c in candidates.iter().flat_map(|x| x.iter()) {
        lcm = lcm.lcm(c.denom());
        if lcm > limit {
            return None;
        }
    }
    let rows = candidates
        .iter()
        .map(|x| {
            x.iter()
                .map(|c| {
                    let v = c.numer() * (&lcm / c.denom());
                    (v.abs() <= limit).then(|| v.to_i64()).flatten()
                })
                .collect::<Option<Vec<i64>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some((rows, lcm.to_i64()?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueResult {
    pub size: usize,
    pub members: Vec<usize>,
    /// No larger clique exists, and `members` is the lexicographically
    /// smallest maximum clique.
    pub exhaustive: bool,
}

/// Exact maximum clique by branch and bound with a greedy-coloring bound.
///
/// A `budget` caps the number of search nodes; when it runs out the best
/// clique seen so far is returned with `exhaustive = false`.
pub fn max_clique(graph: &AdditivityGraph, budget: Option<u64>) -> CliqueResult {
    let n = graph.len();
    if n == 0 {
        return CliqueResult {
            size: 0,
            members: vec![],
            exhaustive: true,
        };
    }
    let order = degeneracy_order(graph);
    let mut label = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        label[old] = new;
    }
    let adjacency: Vec<FixedBitSet> = order
        .iter()
        .map(|&old| {
            let mut row = FixedBitSet::with_capacity(n);
            row.extend(graph.neighbors(old).ones().map(|j| label[j]));
            row
        })
        .collect();
    let mut search = Search {
        adjacency: &adjacency,
        nodes: 0,
        budget: budget.unwrap_or(u64::MAX),
        best: vec![],
        stack: vec![],
        out_of_budget: false,
    };

    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    search.expand(all.clone(), None);
    let mut best: Vec<usize> = search.best.iter().map(|&v| order[v]).collect();
    best.sort_unstable();
    if search.out_of_budget {
        return CliqueResult {
            size: best.len(),
            members: best,
            exhaustive: false,
        };
    }

    // Fix members one at a time in increasing original index.
    let omega = best.len();
    let mut chosen = Vec::with_capacity(omega);
    let mut pool = all;
    for (v, &lv) in label.iter().enumerate() {
        if chosen.len() == omega {
            break;
        }
        if !pool.contains(lv) {
            continue;
        }
        pool.set(lv, false);
        let mut rest = pool.clone();
        rest.intersect_with(&adjacency[lv]);
        let need = omega - chosen.len() - 1;
        match search.exists(rest.clone(), need) {
            Some(true) => {
                chosen.push(v);
                pool = rest;
            }
            Some(false) => {}
            None => {
                return CliqueResult {
                    size: omega,
                    members: best,
                    exhaustive: false,
                };
            }
        }
    }
    debug_assert_eq!(chosen.len(), omega);
    CliqueResult {
        size: omega,
        members: chosen,
        exhaustive: true,
    }
}

/// Smallest-last order: vertices of the densest core come first.
fn degeneracy_order(graph: &AdditivityGraph) -> Vec<usize> {
    let n = graph.len();
    let mut degree: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
    let mut removed = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((degree[i], i))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((deg, v))) = heap.pop() {
        if removed[v] || deg != degree[v] {
            continue;
        }
        removed[v] = true;
        order.push(v);
        for u in graph.neighbors(v).ones() {
            if !removed[u] {
                degree[u] -= 1;
                heap.push(Reverse((degree[u], u)));
            }
        }
    }
    order.reverse();
    order
}

struct Search<'a> {
    adjacency: &'a [FixedBitSet],
    nodes: u64,
    budget: u64,
    best: Vec<usize>,
    stack: Vec<usize>,
    out_of_budget: bool,
}

impl Search<'_> {
    /// Greedy sequential coloring of `p`; returns vertices with their color
    /// numbers, nondecreasing in color.
    fn color(&self, p: &FixedBitSet) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(p.count_ones(..));
        let mut uncolored = p.clone();
        let mut color = 0;
        while !uncolored.is_clear() {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.ones().next() {
                uncolored.set(v, false);
                q.set(v, false);
                q.difference_with(&self.adjacency[v]);
                out.push((v, color));
            }
        }
        out
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.out_of_budget = true;
        }
        !self.out_of_budget
    }

    /// Grows `self.stack` inside `p`. With a target, stops as soon as the
    /// stack reaches it; otherwise records every improvement in `self.best`.
    /// Returns true once a target has been met.
    fn expand(&mut self, mut p: FixedBitSet, target: Option<usize>) -> bool {
        if !self.tick() {
            return false;
        }
        let colored = self.color(&p);
        for &(v, color) in colored.iter().rev() {
            let floor = target.map_or(self.best.len(), |t| t - 1);
            if self.stack.len() + color <= floor {
                return false;
            }
            self.stack.push(v);
            let mut next = p.clone();
            next.intersect_with(&self.adjacency[v]);
            let done = if target.is_some_and(|t| self.stack.len() >= t) {
                true
            } else if next.is_clear() {
                if target.is_none() && self.stack.len() > self.best.len() {
                    self.best = self.stack.clone();
                }
                false
            } else {
                self.expand(next, target)
            };
            self.stack.pop();
            if done {
                return true;
            }
            if self.out_of_budget {
                return false;
            }
            p.set(v, false);
        }
        false
    }

    /// Whether `p` contains a clique on `k` vertices; `None` if the budget ran out.
    fn exists(&mut self, p: FixedBitSet, k: usize) -> Option<bool> {
        if k == 0 {
            return Some(true);
        }
        if p.count_ones(..) < k {
            return Some(false);
        }
        let found = self.expand(p, Some(k));
        (!self.out_of_budget).then_some(found)
    }
}

/// Whether some coordinate permutation combined with sign changes maps the
/// set `a` onto the set `b`.
pub fn is_signed_permutation_image(a: &[QVector], b: &[QVector]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(d) = a.first().map(QVector::dim) else {
        return true;
    };
    let target: BTreeSet<&QVector> = b.iter().collect();
    if target.len() != b.len() {
        return false;
    }
    let mut perm: Vec<usize> = (0..d).collect();
    loop {
        for signs in 0u64..(1 << d) {
            let image: BTreeSet<QVector> = a
                .iter()
                .map(|x| {
                    QVector::new(
                        (0..d)
                            .map(|k| {
                                let c = x[perm[k]].clone();
                                if signs >> k & 1 == 1 {
                                    -c
                                } else {
                                    c
                                }
                            })
                            .collect(),
                    )
                })
                .collect();
            if image.iter().eq(target.iter().copied()) {
                return true;
            }
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Whether the set is closed under negation.
pub fn is_symmetric(candidates: &[QVector]) -> bool {
    let set: BTreeSet<&QVector> = candidates.iter().collect();
    candidates.iter().all(|x| set.contains(&-x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, q};
    use crate::constructions::{cube_family, octahedron_instance};
    use crate::norms::verify_additive_set;

    fn clique_of(norm: &Norm, resolution: u32, delta: &Rational) -> (AdditivityGraph, CliqueResult) {
        let candidates = enumerate_candidates(norm, resolution).unwrap();
        let graph = build_graph(norm, candidates, delta).unwrap();
        let result = max_clique(&graph, None);
        (graph, result)
    }

    #[test]
    fn candidate_counts() {
        let l1 = Norm::L1 { dimension: 3 };
        let c = enumerate_candidates(&l1, 1).unwrap();
        assert_eq!(c.len(), 26);
        assert!(is_symmetric(&c));
        let line = enumerate_candidates(&Norm::LInf { dimension: 1 }, 1).unwrap();
        assert_eq!(line, vec![QVector::from_ints(&[-1]), QVector::from_ints(&[1])]);
        assert!(enumerate_candidates(&l1, 0).is_err());
    }

    #[test]
    fn resolution_three_contains_tetrahedron() {
        let c: BTreeSet<QVector> = enumerate_candidates(&Norm::L1 { dimension: 3 }, 3)
            .unwrap()
            .into_iter()
            .collect();
        let (_, xs) = octahedron_instance();
        assert!(xs.iter().all(|x| c.contains(x)));
    }

    #[test]
    fn cube_family_is_complete() {
        let (norm, xs) = cube_family(4);
        let g = build_graph(&norm, xs, &q(2, 3)).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(
            max_clique(&g, None),
            CliqueResult {
                size: 4,
                members: vec![0, 1, 2, 3],
                exhaustive: true
            }
        );
    }

    #[test]
    fn small_graphs() {
        let norm = Norm::LInf { dimension: 2 };
        let e = QVector::unit(2, 0);
        let g = build_graph(&norm, vec![e.clone(), -&e], &q(1, 2)).unwrap();
        assert!(g.has_edge(0, 1));
        let g = build_graph(&norm, vec![e, QVector::unit(2, 1)], &q(2, 3)).unwrap();
        assert!(!g.has_edge(0, 1));
        assert_eq!(max_clique(&g, None).size, 1);
        let empty = build_graph(&norm, vec![], &q(2, 3)).unwrap();
        assert_eq!(max_clique(&empty, None).size, 0);
    }

    #[test]
    fn non_unit_candidate_is_rejected() {
        let norm = Norm::L1 { dimension: 2 };
        let err = build_graph(&norm, vec![QVector::from_ints(&[1, 1])], &int(1)).unwrap_err();
        assert_eq!(err, Error::InvalidCandidate { index: 0, gauge: int(2) });
    }

    #[test]
    fn generic_path_matches_fast_path() {
        let l1 = Norm::L1 { dimension: 2 };
        let poly = Norm::polytope(2, vec![QVector::unit(2, 0), QVector::unit(2, 1)]).unwrap();
        let candidates = enumerate_candidates(&l1, 2).unwrap();
        for delta in [q(1, 2), int(1), q(3, 2)] {
            let a = build_graph(&l1, candidates.clone(), &delta).unwrap();
            let b = build_graph(&poly, candidates.clone(), &delta).unwrap();
            assert_eq!(a.adjacency, b.adjacency);
        }
    }

    #[test]
    fn cube_candidates_have_clique_number_d() {
        for d in 2..=3 {
            let norm = Norm::LInf { dimension: d };
            let (graph, r) = clique_of(&norm, 3, &q(2, 3));
            assert!(r.exhaustive);
            assert_eq!(r.size, d);
            assert!(graph.is_clique(&r.members));
        }
    }

    #[test]
    fn octahedron_candidates_give_tetrahedron() {
        let norm = Norm::L1 { dimension: 3 };
        let (graph, r) = clique_of(&norm, 3, &q(2, 3));
        assert!(r.exhaustive);
        assert_eq!(r.size, 4);
        let members: Vec<QVector> = r.members.iter().map(|&i| graph.vertices[i].clone()).collect();
        let (_, tetra) = octahedron_instance();
        assert!(is_signed_permutation_image(&members, &tetra));
        assert!(verify_additive_set(&norm, &members, &q(2, 3)).unwrap().pass);
    }

    #[test]
    fn result_is_lexicographically_smallest() {
        // Two disjoint triangles {1, 2, 3} and {0, 4, 5}, plus the lone edge {0, 1}.
        let norm = Norm::LInf { dimension: 1 };
        let mut g = build_graph(&norm, vec![], &int(1)).unwrap();
        let n = 6;
        g.vertices = (0..n).map(|i| QVector::from_ints(&[i as i64])).collect();
        g.adjacency = vec![FixedBitSet::with_capacity(n); n];
        for (i, j) in [(1, 2), (1, 3), (2, 3), (0, 4), (0, 5), (4, 5), (0, 1)] {
            g.adjacency[i].insert(j);
            g.adjacency[j].insert(i);
        }
        let r = max_clique(&g, None);
        assert_eq!(r.members, vec![0, 4, 5]);
        assert!(r.exhaustive);
    }

    #[test]
    fn budget_makes_result_nonexhaustive() {
        let norm = Norm::L1 { dimension: 3 };
        let candidates = enumerate_candidates(&norm, 3).unwrap();
        let graph = build_graph(&norm, candidates, &q(2, 3)).unwrap();
        let r = max_clique(&graph, Some(1));
        assert!(!r.exhaustive);
        assert!(graph.is_clique(&r.members));
        assert_eq!(max_clique(&graph, None), max_clique(&graph, None));
    }

    #[test]
    fn signed_permutations() {
        let (_, tetra) = octahedron_instance();
        let neg: Vec<QVector> = tetra.iter().map(|x| -x).collect();
        assert!(is_signed_permutation_image(&neg, &tetra));
        let (_, cube) = cube_family(3);
        assert!(!is_signed_permutation_image(&cube[..3], &tetra[..3]));
        assert!(next_permutation(&mut [0, 1]));
        assert!(!next_permutation(&mut [1, 0]));
    }
}
