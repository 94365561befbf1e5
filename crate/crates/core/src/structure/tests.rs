use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn m_star() -> RVineStructure {
    RVineStructure::from_rows(&[
        vec![7],
        vec![4, 4],
        vec![5, 6, 6],
        vec![1, 5, 5, 5],
        vec![2, 1, 1, 1, 1],
        vec![3, 2, 2, 3, 3, 3],
        vec![6, 3, 3, 2, 2, 2, 2],
    ])
    .unwrap()
}

fn e(a: usize, b: usize, d: &[usize]) -> ConstraintEntry {
    ConstraintEntry::new(a, b, d.iter().copied())
}

/// The 21 edges printed in the seven-variable example vine.
fn figure_edges() -> BTreeSet<ConstraintEntry> {
    [
        e(1, 2, &[]),
        e(2, 3, &[]),
        e(3, 4, &[]),
        e(2, 5, &[]),
        e(3, 6, &[]),
        e(6, 7, &[]),
        e(1, 3, &[2]),
        e(2, 6, &[3]),
        e(3, 7, &[6]),
        e(2, 4, &[3]),
        e(3, 5, &[2]),
        e(1, 6, &[2, 3]),
        e(2, 7, &[3, 6]),
        e(1, 5, &[2, 3]),
        e(1, 4, &[2, 3]),
        e(5, 6, &[1, 2, 3]),
        e(4, 5, &[1, 2, 3]),
        e(1, 7, &[2, 3, 6]),
        e(4, 6, &[1, 2, 3, 5]),
        e(5, 7, &[1, 2, 3, 6]),
        e(4, 7, &[1, 2, 3, 5, 6]),
    ]
    .into_iter()
    .collect()
}

/// The same vine as explicit trees.
fn figure_trees() -> TreeSequence {
    TreeSequence::from_node_pairs(
        7,
        &[
            vec![(1, 2), (2, 3), (3, 4), (2, 5), (3, 6), (6, 7)],
            vec![(0, 1), (1, 4), (4, 5), (1, 2), (1, 3)],
            vec![(0, 1), (1, 2), (0, 4), (0, 3)],
            vec![(2, 0), (3, 2), (0, 1)],
            vec![(1, 0), (0, 2)],
            vec![(0, 1)],
        ],
    )
    .unwrap()
}

#[test]
fn m_star_is_valid_and_matches_the_example_vine() {
    let s = m_star();
    assert!(!s.is_normalized());
    let set = s.constraint_set_sorted();
    assert_eq!(set.len(), 21);
    assert_eq!(set, figure_edges());
    assert!(set.contains(&e(7, 1, &[2, 3, 6])));
    assert_eq!(s.entry(3, 0), e(7, 1, &[2, 3, 6]));
    assert_eq!(s.entry(6, 0), e(7, 6, &[]));
}

#[test]
fn corner_swap_gives_the_same_vine() {
    let mut rows = m_star().rows();
    rows[5][5] = 2;
    rows[6][5] = 3;
    rows[6][6] = 3;
    let swapped = RVineStructure::from_rows(&rows).unwrap();
    assert_ne!(swapped, m_star());
    assert_eq!(
        swapped.constraint_set_sorted(),
        m_star().constraint_set_sorted()
    );
}

#[test]
fn two_dimensional_structure() {
    let s = RVineStructure::from_rows(&[vec![2], vec![1, 1]]).unwrap();
    assert_eq!(s.constraint_set(), vec![e(2, 1, &[])]);
    let t = TreeSequence::from_node_pairs(2, &[vec![(2, 1)]]).unwrap();
    let (m, _) = t.to_matrix().unwrap();
    assert_eq!(m.constraint_set_sorted(), s.constraint_set_sorted());
}

#[test]
fn violations_are_located() {
    let bad = |rows: &[Vec<usize>]| match RVineStructure::from_rows(rows) {
        Err(Error::InvalidStructure(v)) => v,
        other => panic!("expected a violation, got {other:?}"),
    };
    assert_eq!(
        bad(&[vec![2], vec![2, 1]]),
        StructureViolation::RepeatedLabel {
            row: 2,
            col: 1,
            label: 2
        }
    );
    assert_eq!(
        bad(&[vec![1], vec![2, 3], vec![3, 2, 1]]),
        StructureViolation::NotNested { col: 2 }
    );
    assert_eq!(
        bad(&[vec![1], vec![3, 3], vec![2, 1, 2]]),
        StructureViolation::DiagonalNotNew { col: 1 }
    );
    assert_eq!(
        bad(&[vec![1], vec![0, 2]]),
        StructureViolation::LabelOutOfRange {
            row: 2,
            col: 1,
            label: 0
        }
    );
    assert_eq!(
        bad(&[vec![1, 2], vec![2, 2]]),
        StructureViolation::UpperEntry { row: 1, col: 2 }
    );
    assert_eq!(
        bad(&[vec![1], vec![2, 2, 0]]),
        StructureViolation::NotSquare {
            row: 2,
            len: 3,
            dim: 2
        }
    );
    // nested with new diagonals, yet 1,3|4 needs the first-tree edge 3,4 which is absent
    assert_eq!(
        bad(&[vec![1], vec![2, 3], vec![3, 4, 4], vec![4, 2, 2, 2]]),
        StructureViolation::Proximity { row: 2, col: 1 }
    );
}

#[test]
fn max_matrix_is_a_running_maximum() {
    let (s, _) = m_star().normalize_diagonal();
    let mm = s.max_matrix();
    let n = s.dim();
    for c in 0..n {
        assert_eq!(*mm.get(c, c), s.get(c, c));
        assert_eq!(*mm.get(n - 1, c), s.get(n - 1, c));
        for r in c..n {
            let brute = (r..n).map(|i| s.get(i, c)).max().unwrap();
            assert_eq!(*mm.get(r, c), brute);
        }
    }
    // idempotent: the max matrix of a column-wise maximum is itself
    let again: Vec<usize> = (0..n)
        .map(|r| (r..n).map(|i| *mm.get(i, 0)).max().unwrap())
        .collect();
    assert_eq!(again, (0..n).map(|r| *mm.get(r, 0)).collect::<Vec<_>>());
}

#[test]
fn normalization_relabels_consistently() {
    let s = m_star();
    let (norm, map) = s.normalize_diagonal();
    assert!(norm.is_normalized());
    let relabeled: BTreeSet<ConstraintEntry> =
        s.constraint_set().iter().map(|x| x.relabel(&map)).collect();
    assert_eq!(norm.constraint_set_sorted(), relabeled);
    assert_eq!(norm.relabel(&map.inverse()), s);
    let (again, id) = norm.normalize_diagonal();
    assert!(id.is_identity());
    assert_eq!(again, norm);
}

#[test]
fn vine_counts() {
    assert_eq!(count_rvines(3), 3u32.into());
    assert_eq!(count_rvines(4), 24u32.into());
    assert_eq!(count_rvines(7), 2_580_480u32.into());
    assert_eq!(count_rvines(5), 480u32.into());
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every lower-triangular matrix whose columns hold distinct labels (4!·4·3·2·4·3·4 = 27648).
#[test]
fn exhaustive_four_dimensional_enumeration() {
    let n = 4;
    let labels: Vec<usize> = (1..=n).collect();
    let arrangements = |len: usize| -> Vec<Vec<usize>> {
        let mut out = BTreeSet::new();
        for p in permutations(&labels) {
            out.insert(p[..len].to_vec());
        }
        out.into_iter().collect()
    };
    let (c0, c1, c2, c3) = (
        arrangements(4),
        arrangements(3),
        arrangements(2),
        arrangements(1),
    );
    let mut vines = BTreeSet::new();
    let mut candidates = 0;
    for a in &c0 {
        for b in &c1 {
            for c in &c2 {
                for d in &c3 {
                    candidates += 1;
                    let cols = [a, b, c, d];
                    let m = TriMatrix::from_fn(n, |r, col| cols[col][r - col]);
                    if let Ok(s) = RVineStructure::validate(m) {
                        // every valid matrix is a genuine vine
                        TreeSequence::from_matrix(&s, None).unwrap();
                        vines.insert(s.constraint_set_sorted());
                    }
                }
            }
        }
    }
    assert_eq!(candidates, 27_648);
    assert_eq!(vines.len(), 24);
}

/// Matrices built column by column with nesting and a new diagonal.
fn nested_candidates(n: usize) -> Vec<TriMatrix<usize>> {
    // columns from the right: (diagonal, entries below)
    fn extend(n: usize, cols: Vec<Vec<usize>>, out: &mut Vec<TriMatrix<usize>>) {
        if cols.len() == n {
            let m = TriMatrix::from_fn(n, |r, c| cols[n - 1 - c][r - c]);
            out.push(m);
            return;
        }
        let right = cols.last().cloned().unwrap_or_default();
        for diag in 1..=n {
            if right.contains(&diag) {
                continue;
            }
            for below in permutations(&right) {
                let mut col = vec![diag];
                col.extend(below);
                let mut next = cols.clone();
                next.push(col);
                extend(n, next, out);
            }
        }
    }
    let mut out = Vec::new();
    extend(n, Vec::new(), &mut out);
    out
}

#[test]
fn exhaustive_five_dimensional_enumeration() {
    let candidates = nested_candidates(5);
    assert_eq!(candidates.len(), 120 * 24 * 6 * 2);
    let vines: BTreeSet<_> = candidates
        .into_iter()
        .filter_map(|m| RVineStructure::validate(m).ok())
        .map(|s| s.constraint_set_sorted())
        .collect();
    assert_eq!(vines.len(), 480);
}

#[test]
fn figure_trees_convert_to_an_equivalent_matrix() {
    let trees = figure_trees();
    assert_eq!(trees.constraint_set_sorted(), figure_edges());
    let (s, _) = trees.to_matrix().unwrap();
    assert_eq!(s.constraint_set_sorted(), m_star().constraint_set_sorted());
    let back = TreeSequence::from_matrix(&m_star(), None).unwrap();
    assert_eq!(back.constraint_set_sorted(), figure_edges());
    for (t, level) in back.trees().iter().enumerate() {
        assert!(level.iter().all(|e| e.conditioning.len() == t));
    }
}

#[test]
fn tree_sequence_rejects_bad_input() {
    // a cycle in the first tree
    assert!(TreeSequence::from_node_pairs(3, &[vec![(1, 2), (2, 1)], vec![(0, 1)]]).is_err());
    // second-tree edge between edges without a common node
    assert!(TreeSequence::from_node_pairs(
        4,
        &[
            vec![(1, 2), (3, 4), (2, 3)],
            vec![(0, 1), (1, 2)],
            vec![(0, 1)]
        ]
    )
    .is_err());
}

#[test]
fn builders_make_c_and_d_vines() {
    let d = RVineStructure::dvine(&[3, 1, 4, 2, 5]).unwrap();
    let t = TreeSequence::from_matrix(&d, None).unwrap();
    let mut degree = [0; 6];
    for e in t.tree(0) {
        degree[e.nodes.0] += 1;
        degree[e.nodes.1] += 1;
    }
    assert!(degree.iter().all(|&d| d <= 2));
    assert!(t.constraint_set_sorted().contains(&e(3, 5, &[1, 2, 4])));

    let c = RVineStructure::cvine(&[2, 5, 1, 3, 4]).unwrap();
    let t = TreeSequence::from_matrix(&c, None).unwrap();
    for (level, root) in [(0, &[2][..]), (1, &[2, 5]), (2, &[1, 2, 5])] {
        for edge in t.tree(level) {
            let mut all: Vec<usize> = edge.conditioning.clone();
            all.push(edge.conditioned.0.min(edge.conditioned.1));
            all.push(edge.conditioned.0.max(edge.conditioned.1));
            assert!(
                root.iter().all(|r| all.contains(r)),
                "tree {level}: {}",
                edge.entry()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_vines_round_trip(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = TreeSequence::random(n, &mut rng);
        let (s, _) = trees.to_matrix().unwrap();
        prop_assert_eq!(s.constraint_set_sorted(), trees.constraint_set_sorted());
        let back = TreeSequence::from_matrix(&s, None).unwrap();
        prop_assert_eq!(back.constraint_set_sorted(), trees.constraint_set_sorted());
        let (again, _) = back.to_matrix().unwrap();
        prop_assert_eq!(again.constraint_set_sorted(), s.constraint_set_sorted());

        // tree level of each entry matches its row
        for c in 0..n {
            for r in c + 1..n {
                prop_assert_eq!(s.entry(r, c).tree(), n - r);
            }
        }
        // normalization preserves the vine up to relabeling
        let (norm, map) = s.normalize_diagonal();
        let relabeled: BTreeSet<_> = s.constraint_set().iter().map(|x| x.relabel(&map)).collect();
        prop_assert_eq!(norm.constraint_set_sorted(), relabeled);
        if n > 2 {
            // deleting the first row and column leaves a valid matrix
            prop_assert!(s.without_first().is_ok());
        }
    }
}
