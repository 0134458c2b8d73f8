//! Set and tuple machinery plus structured permutation enumeration.
//!
//! A [`DimensionPartition`] splits `D*t` points into `t` disjoint groups
//! ("dimensions") of `D` points each. A permutation of those points is a
//! *hypercube permutation* when any two same-dimension points sit at positions
//! that differ by a nonzero multiple of `t`; equivalently, each residue class
//! of positions modulo `t` is occupied by a single dimension. The *circular*
//! variant keeps one canonical representative per rotation class: the rotation
//! whose first element is the minimum point label.

use std::collections::BTreeMap;

use num::BigUint;

use crate::error::CombinatoricsError;

/// Node label. Network sizes stay small; `u16` leaves ample headroom.
pub type Point = u16;

/// Default guard on enumeration size, in total points.
pub const DEFAULT_ENUM_CAP: usize = 12;

/// `D*t` points split into `t` disjoint groups of `D` points each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionPartition {
    points_per_dim: usize,
    groups: Vec<Vec<Point>>,
    dim_of: BTreeMap<Point, usize>,
}

impl DimensionPartition {
    /// Canonical labelling: dimension `i` holds the points `u` with
    /// `u / points_per_dim == i`.
    pub fn canonical(points_per_dim: usize, dim_count: usize) -> Self {
        assert!(points_per_dim >= 1 && dim_count >= 1);
        let groups = (0..dim_count)
            .map(|i| {
                ((i * points_per_dim) as Point..((i + 1) * points_per_dim) as Point).collect()
            })
            .collect();
        Self::from_groups(groups).expect("canonical groups are disjoint and equal-sized")
    }

    /// Partition with arbitrary (disjoint, equal-size, non-empty) groups.
    pub fn from_groups(groups: Vec<Vec<Point>>) -> Result<Self, CombinatoricsError> {
        if groups.is_empty() {
            return Err(CombinatoricsError::MalformedPartition);
        }
        let points_per_dim = groups[0].len();
        if points_per_dim == 0 {
            return Err(CombinatoricsError::MalformedPartition);
        }
        let mut sorted_groups = Vec::with_capacity(groups.len());
        let mut dim_of = BTreeMap::new();
        for (dim, group) in groups.into_iter().enumerate() {
            if group.len() != points_per_dim {
                return Err(CombinatoricsError::MalformedPartition);
            }
            let mut group = group;
            group.sort_unstable();
            group.dedup();
            if group.len() != points_per_dim {
                return Err(CombinatoricsError::MalformedPartition);
            }
            for &p in &group {
                if dim_of.insert(p, dim).is_some() {
                    return Err(CombinatoricsError::MalformedPartition);
                }
            }
            sorted_groups.push(group);
        }
        Ok(Self {
            points_per_dim,
            groups: sorted_groups,
            dim_of,
        })
    }

    pub fn dim_count(&self) -> usize {
        self.groups.len()
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn total_points(&self) -> usize {
        self.points_per_dim * self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<Point>] {
        &self.groups
    }

    /// Dimension index of `point`, or `None` if the point is not covered.
    pub fn dim_of(&self, point: Point) -> Option<usize> {
        self.dim_of.get(&point).copied()
    }

    /// All covered points in increasing label order.
    pub fn sorted_points(&self) -> Vec<Point> {
        self.dim_of.keys().copied().collect()
    }
}

/// An ordering of distinct point labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    order: Vec<Point>,
}

impl Permutation {
    pub fn new(order: Vec<Point>) -> Result<Self, CombinatoricsError> {
        let mut seen = order.clone();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                return Err(CombinatoricsError::DuplicatePoint(w[0]));
            }
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[Point] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Point at position `pos` (panics when out of range).
    pub fn at(&self, pos: usize) -> Point {
        self.order[pos]
    }

    pub fn position_of(&self, point: Point) -> Option<usize> {
        self.order.iter().position(|&p| p == point)
    }

    /// Wrap-around slice of `len` points starting at position `start % len()`.
    pub fn cyclic_slice(&self, start: usize, len: usize) -> Vec<Point> {
        let n = self.order.len();
        (0..len).map(|k| self.order[(start + k) % n]).collect()
    }

    pub fn rotated_left(&self, shift: usize) -> Permutation {
        let n = self.order.len();
        Permutation {
            order: self.cyclic_slice(shift % n, n),
        }
    }

    /// Canonical rotation (minimum label first) and the offset `r` such that
    /// `canonical.rotated_left(r) == self`.
    pub fn canonical_rotation(&self) -> (Permutation, usize) {
        let n = self.order.len();
        let min_pos = self
            .order
            .iter()
            .enumerate()
            .min_by_key(|(_, &p)| p)
            .map(|(i, _)| i)
            .expect("permutation is non-empty");
        (self.rotated_left(min_pos), (n - min_pos) % n)
    }
}

/// All sets obtained by picking one element from each input set. Inputs must
/// be pairwise disjoint; the result is returned as sorted sets in
/// lexicographic order.
pub fn unordered_product(sets: &[Vec<Point>]) -> Result<Vec<Vec<Point>>, CombinatoricsError> {
    let mut seen = BTreeMap::new();
    for set in sets {
        for &p in set {
            if seen.insert(p, ()).is_some() {
                return Err(CombinatoricsError::OverlappingSets(p));
            }
        }
    }
    let mut out = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(out.len() * set.len());
        for partial in &out {
            for &p in set {
                let mut tuple = partial.clone();
                tuple.push(p);
                next.push(tuple);
            }
        }
        out = next;
    }
    for tuple in &mut out {
        tuple.sort_unstable();
    }
    out.sort_unstable();
    Ok(out)
}

/// All size-`size` subsets of `set`, each sorted, in lexicographic order.
pub fn k_subsets(set: &[Point], size: usize) -> Result<Vec<Vec<Point>>, CombinatoricsError> {
    if size < 1 || size > set.len() {
        return Err(CombinatoricsError::SubsetSizeOutOfRange {
            size,
            set_size: set.len(),
        });
    }
    let mut pool: Vec<Point> = set.to_vec();
    pool.sort_unstable();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(
        pool: &[Point],
        from: usize,
        size: usize,
        current: &mut Vec<Point>,
        out: &mut Vec<Vec<Point>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        let needed = size - current.len();
        for i in from..=pool.len().saturating_sub(needed) {
            current.push(pool[i]);
            recurse(pool, i + 1, size, current, out);
            current.pop();
        }
    }
    recurse(&pool, 0, size, &mut current, &mut out);
    Ok(out)
}

/// True iff positions congruent modulo the dimension count are occupied by a
/// single dimension each. Errors when the permutation does not cover exactly
/// the partition's points.
pub fn is_hypercube_permutation(
    perm: &Permutation,
    part: &DimensionPartition,
) -> Result<bool, CombinatoricsError> {
    let mut covered: Vec<Point> = perm.order().to_vec();
    covered.sort_unstable();
    if covered != part.sorted_points() {
        return Err(CombinatoricsError::PointSetMismatch);
    }
    let t = part.dim_count();
    let mut residue_dim = vec![usize::MAX; t];
    for (pos, &p) in perm.order().iter().enumerate() {
        let dim = part.dim_of(p).expect("covered point");
        let slot = &mut residue_dim[pos % t];
        if *slot == usize::MAX {
            *slot = dim;
        } else if *slot != dim {
            return Ok(false);
        }
    }
    // t residues filled by t dimensions; injectivity follows from counting,
    // but check anyway for clarity.
    let mut dims = residue_dim.clone();
    dims.sort_unstable();
    dims.dedup();
    Ok(dims.len() == t)
}

/// Backtracking enumeration of hypercube permutations that extend `prefix`,
/// in lexicographic order. A prefix that cannot be extended (or is itself
/// inconsistent) yields an empty list.
fn enumerate_with_prefix(
    part: &DimensionPartition,
    prefix: &[Point],
    cap: usize,
) -> Result<Vec<Permutation>, CombinatoricsError> {
    let n = part.total_points();
    if n > cap {
        return Err(CombinatoricsError::EnumerationCapExceeded { points: n, cap });
    }
    let t = part.dim_count();
    let points = part.sorted_points();
    let mut used = vec![false; n];
    let mut residue_dim = vec![usize::MAX; t];
    let mut dim_residue = vec![usize::MAX; t];
    let mut current: Vec<Point> = Vec::with_capacity(n);

    // Seed the search state with the prefix.
    for &p in prefix {
        let Some(idx) = points.binary_search(&p).ok() else {
            return Ok(Vec::new());
        };
        if used[idx] {
            return Ok(Vec::new());
        }
        let dim = part.dim_of(p).expect("covered point");
        let residue = current.len() % t;
        if residue_dim[residue] == usize::MAX && dim_residue[dim] == usize::MAX {
            residue_dim[residue] = dim;
            dim_residue[dim] = residue;
        } else if residue_dim[residue] != dim {
            return Ok(Vec::new());
        }
        used[idx] = true;
        current.push(p);
    }

    struct Search<'a> {
        points: &'a [Point],
        part: &'a DimensionPartition,
        t: usize,
        n: usize,
        out: Vec<Permutation>,
    }
    impl Search<'_> {
        fn recurse(
            &mut self,
            used: &mut [bool],
            residue_dim: &mut [usize],
            dim_residue: &mut [usize],
            current: &mut Vec<Point>,
        ) {
            if current.len() == self.n {
                self.out.push(Permutation {
                    order: current.clone(),
                });
                return;
            }
            let residue = current.len() % self.t;
            let fixed = residue_dim[residue];
            for idx in 0..self.n {
                if used[idx] {
                    continue;
                }
                let p = self.points[idx];
                let dim = self.part.dim_of(p).expect("covered point");
                let newly_assigned = if fixed == usize::MAX {
                    if dim_residue[dim] != usize::MAX {
                        continue;
                    }
                    residue_dim[residue] = dim;
                    dim_residue[dim] = residue;
                    true
                } else {
                    if dim != fixed {
                        continue;
                    }
                    false
                };
                used[idx] = true;
                current.push(p);
                self.recurse(used, residue_dim, dim_residue, current);
                current.pop();
                used[idx] = false;
                if newly_assigned {
                    residue_dim[residue] = usize::MAX;
                    dim_residue[dim] = usize::MAX;
                }
            }
        }
    }

    let mut search = Search {
        points: &points,
        part,
        t,
        n,
        out: Vec::new(),
    };
    search.recurse(&mut used, &mut residue_dim, &mut dim_residue, &mut current);
    Ok(search.out)
}

/// All hypercube permutations of the partition's points, lexicographically.
pub fn enumerate_hypercube_permutations(
    part: &DimensionPartition,
) -> Result<Vec<Permutation>, CombinatoricsError> {
    enumerate_hypercube_permutations_capped(part, DEFAULT_ENUM_CAP)
}

pub fn enumerate_hypercube_permutations_capped(
    part: &DimensionPartition,
    cap: usize,
) -> Result<Vec<Permutation>, CombinatoricsError> {
    enumerate_with_prefix(part, &[], cap)
}

/// One canonical representative per rotation class: the rotation led by the
/// minimum point label.
pub fn enumerate_circular_hypercube_permutations(
    part: &DimensionPartition,
) -> Result<Vec<Permutation>, CombinatoricsError> {
    enumerate_circular_hypercube_permutations_capped(part, DEFAULT_ENUM_CAP)
}

pub fn enumerate_circular_hypercube_permutations_capped(
    part: &DimensionPartition,
    cap: usize,
) -> Result<Vec<Permutation>, CombinatoricsError> {
    let min = *part
        .sorted_points()
        .first()
        .expect("partition is non-empty");
    enumerate_with_prefix(part, &[min], cap)
}

/// Hypercube permutations of the partition that start with `first`. Used by
/// the scheduler's packet splitting, where position 0 is pinned to the
/// delivery target.
pub fn enumerate_hypercube_permutations_from(
    part: &DimensionPartition,
    first: Point,
    cap: usize,
) -> Result<Vec<Permutation>, CombinatoricsError> {
    enumerate_with_prefix(part, &[first], cap)
}

pub fn factorial(n: u64) -> BigUint {
    let mut out = BigUint::from(1u32);
    for k in 2..=n {
        out *= k;
    }
    out
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut out = BigUint::from(1u32);
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// Number of hypercube permutations: `(D!)^t * t!`.
pub fn hcb_count(points_per_dim: u64, dim_count: u64) -> BigUint {
    assert!(points_per_dim >= 1 && dim_count >= 1);
    factorial(points_per_dim).pow(dim_count as u32) * factorial(dim_count)
}

/// Number of circular hypercube permutations: `(D!)^t * (t-1)! / D`,
/// computed as `(D-1)! * (D!)^(t-1) * (t-1)!` to stay in the integers.
pub fn circ_count(points_per_dim: u64, dim_count: u64) -> BigUint {
    assert!(points_per_dim >= 1 && dim_count >= 1);
    factorial(points_per_dim - 1)
        * factorial(points_per_dim).pow(dim_count as u32 - 1)
        * factorial(dim_count - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn perm(order: &[Point]) -> Permutation {
        Permutation::new(order.to_vec()).unwrap()
    }

    #[test]
    fn unordered_product_of_two_pairs() {
        let got = unordered_product(&[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(
            got,
            vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]],
        );
    }

    #[test]
    fn unordered_product_singleton() {
        assert_eq!(unordered_product(&[vec![5]]).unwrap(), vec![vec![5]]);
    }

    #[test]
    fn unordered_product_matches_brute_force() {
        // Oracle: raw Cartesian product, de-ordered through a set of sets.
        let sets = [vec![0, 1], vec![2, 3], vec![4, 5]];
        let mut oracle = BTreeSet::new();
        for &a in &sets[0] {
            for &b in &sets[1] {
                for &c in &sets[2] {
                    let mut s = vec![a, b, c];
                    s.sort_unstable();
                    oracle.insert(s);
                }
            }
        }
        let got = unordered_product(&sets).unwrap();
        assert_eq!(got.len(), 8);
        assert_eq!(oracle.into_iter().collect::<Vec<_>>(), got);
    }

    #[test]
    fn unordered_product_rejects_overlap() {
        assert_eq!(
            unordered_product(&[vec![0, 1], vec![1, 2]]),
            Err(CombinatoricsError::OverlappingSets(1))
        );
    }

    #[test]
    fn k_subsets_of_three() {
        let got = k_subsets(&[0, 1, 2], 2).unwrap();
        assert_eq!(got, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn k_subsets_singleton() {
        assert_eq!(k_subsets(&[7], 1).unwrap(), vec![vec![7]]);
    }

    #[test]
    fn k_subsets_count_matches_binomial() {
        let got = k_subsets(&[0, 1, 2, 3, 4], 3).unwrap();
        assert_eq!(got.len(), 10);
        assert_eq!(BigUint::from(got.len()), binomial(5, 3));
    }

    #[test]
    fn k_subsets_rejects_oversize() {
        assert!(matches!(
            k_subsets(&[0, 1], 3),
            Err(CombinatoricsError::SubsetSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn hypercube_membership() {
        let part = DimensionPartition::canonical(2, 2);
        assert!(is_hypercube_permutation(&perm(&[0, 2, 1, 3]), &part).unwrap());
        assert!(!is_hypercube_permutation(&perm(&[0, 1, 2, 3]), &part).unwrap());
        // t = 1 imposes no constraint.
        let flat = DimensionPartition::canonical(3, 1);
        assert!(is_hypercube_permutation(&perm(&[2, 0, 1]), &flat).unwrap());
        // Mismatched point set errors out.
        assert_eq!(
            is_hypercube_permutation(&perm(&[0, 1]), &part),
            Err(CombinatoricsError::PointSetMismatch)
        );
    }

    #[test]
    fn enumeration_two_by_two() {
        let part = DimensionPartition::canonical(2, 2);
        let got = enumerate_hypercube_permutations(&part).unwrap();
        let want: Vec<Permutation> = [
            [0, 2, 1, 3],
            [0, 3, 1, 2],
            [1, 2, 0, 3],
            [1, 3, 0, 2],
            [2, 0, 3, 1],
            [2, 1, 3, 0],
            [3, 0, 2, 1],
            [3, 1, 2, 0],
        ]
        .iter()
        .map(|o| perm(o))
        .collect();
        assert_eq!(got.len(), 8);
        assert_eq!(
            got.iter().collect::<BTreeSet<_>>(),
            want.iter().collect::<BTreeSet<_>>()
        );
        // Lexicographic order.
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(got, sorted);
    }

    #[test]
    fn enumeration_flat_dimension() {
        let part = DimensionPartition::canonical(3, 1);
        assert_eq!(enumerate_hypercube_permutations(&part).unwrap().len(), 6);
    }

    #[test]
    fn enumeration_matches_filter_oracle() {
        // Oracle: all 720 orderings of 6 points, filtered by the membership
        // predicate.
        let part = DimensionPartition::canonical(2, 3);
        let mut oracle = BTreeSet::new();
        let points = part.sorted_points();
        let mut order = points.clone();
        permute_all(&mut order, 0, &mut |candidate| {
            let p = Permutation::new(candidate.to_vec()).unwrap();
            if is_hypercube_permutation(&p, &part).unwrap() {
                oracle.insert(p);
            }
        });
        assert_eq!(oracle.len(), 48);
        let got: BTreeSet<_> = enumerate_hypercube_permutations(&part)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(got, oracle);
    }

    fn permute_all(items: &mut Vec<Point>, from: usize, visit: &mut impl FnMut(&[Point])) {
        if from == items.len() {
            visit(items);
            return;
        }
        for i in from..items.len() {
            items.swap(from, i);
            permute_all(items, from + 1, visit);
            items.swap(from, i);
        }
    }

    #[test]
    fn circular_two_by_two() {
        let part = DimensionPartition::canonical(2, 2);
        let got = enumerate_circular_hypercube_permutations(&part).unwrap();
        assert_eq!(got, vec![perm(&[0, 2, 1, 3]), perm(&[0, 3, 1, 2])]);
    }

    #[test]
    fn circular_flat_dimension() {
        let part = DimensionPartition::canonical(3, 1);
        assert_eq!(
            enumerate_circular_hypercube_permutations(&part).unwrap(),
            vec![perm(&[0, 1, 2]), perm(&[0, 2, 1])]
        );
    }

    #[test]
    fn circular_matches_class_collapse() {
        // Oracle: group the full enumeration into rotation classes and keep
        // the min-led representative of each.
        let part = DimensionPartition::canonical(2, 3);
        let all = enumerate_hypercube_permutations(&part).unwrap();
        let mut reps = BTreeSet::new();
        for p in &all {
            reps.insert(p.canonical_rotation().0);
        }
        assert_eq!(reps.len(), 8);
        let got: BTreeSet<_> = enumerate_circular_hypercube_permutations(&part)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(got, reps);
    }

    #[test]
    fn counts_closed_form() {
        assert_eq!(hcb_count(2, 2), BigUint::from(8u32));
        assert_eq!(circ_count(2, 2), BigUint::from(2u32));
        assert_eq!(hcb_count(3, 2), BigUint::from(72u32));
        assert_eq!(circ_count(3, 2), BigUint::from(12u32));
        // D = 1 degenerates to ordinary/circular permutations of dimensions.
        for t in 1..=6u64 {
            assert_eq!(hcb_count(1, t), factorial(t));
            assert_eq!(circ_count(1, t), factorial(t - 1));
        }
        let part = DimensionPartition::canonical(3, 2);
        assert_eq!(
            BigUint::from(enumerate_hypercube_permutations(&part).unwrap().len()),
            hcb_count(3, 2)
        );
        assert_eq!(
            BigUint::from(
                enumerate_circular_hypercube_permutations(&part)
                    .unwrap()
                    .len()
            ),
            circ_count(3, 2)
        );
    }

    #[test]
    fn cap_guards_enumeration() {
        let part = DimensionPartition::canonical(4, 4);
        assert_eq!(
            enumerate_hypercube_permutations(&part),
            Err(CombinatoricsError::EnumerationCapExceeded { points: 16, cap: 12 })
        );
    }

    #[test]
    fn non_canonical_groups() {
        let part = DimensionPartition::from_groups(vec![vec![0, 2], vec![4, 5]]).unwrap();
        let all = enumerate_hypercube_permutations(&part).unwrap();
        assert_eq!(all.len(), 8);
        assert!(all
            .iter()
            .all(|p| is_hypercube_permutation(p, &part).unwrap()));
        assert!(DimensionPartition::from_groups(vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(DimensionPartition::from_groups(vec![vec![0, 1], vec![2]]).is_err());
    }

    proptest! {
        #[test]
        fn counts_match_enumeration(d in 1usize..=4, t in 1usize..=4) {
            prop_assume!(d * t <= 8);
            let part = DimensionPartition::canonical(d, t);
            let all = enumerate_hypercube_permutations(&part).unwrap();
            prop_assert_eq!(BigUint::from(all.len()), hcb_count(d as u64, t as u64));
            let circ = enumerate_circular_hypercube_permutations(&part).unwrap();
            prop_assert_eq!(BigUint::from(circ.len()), circ_count(d as u64, t as u64));
        }

        #[test]
        fn rotations_stay_hypercube(d in 1usize..=3, t in 1usize..=3, shift in 0usize..12) {
            prop_assume!(d * t <= 6);
            let part = DimensionPartition::canonical(d, t);
            for p in enumerate_hypercube_permutations(&part).unwrap() {
                let rotated = p.rotated_left(shift % (d * t));
                prop_assert!(is_hypercube_permutation(&rotated, &part).unwrap());
            }
        }

        #[test]
        fn rotation_classes_have_one_representative(d in 1usize..=3, t in 1usize..=3) {
            prop_assume!(d * t <= 6);
            let part = DimensionPartition::canonical(d, t);
            let circ: BTreeSet<_> = enumerate_circular_hypercube_permutations(&part)
                .unwrap()
                .into_iter()
                .collect();
            for p in enumerate_hypercube_permutations(&part).unwrap() {
                let n = p.len();
                let mut reps = BTreeSet::new();
                let mut rotations = BTreeSet::new();
                for shift in 0..n {
                    let r = p.rotated_left(shift);
                    if circ.contains(&r) {
                        reps.insert(r.clone());
                    }
                    rotations.insert(r);
                }
                prop_assert_eq!(rotations.len(), n);
                prop_assert_eq!(reps.len(), 1);
            }
        }

        #[test]
        fn product_cardinality(sizes in proptest::collection::vec(1usize..=3, 1..=3)) {
            let mut sets = Vec::new();
            let mut next = 0 as Point;
            for &s in &sizes {
                sets.push((next..next + s as Point).collect::<Vec<_>>());
                next += s as Point;
            }
            let got = unordered_product(&sets).unwrap();
            prop_assert_eq!(got.len(), sizes.iter().product::<usize>());
        }
    }
}
