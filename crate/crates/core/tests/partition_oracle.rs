use onetwo::partition::{all_partitions, is_compatible, max_compatible_family, nested_family, Partition3};

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Directly from the definition: orderings of both partitions with
/// `Q_2 ∪ Q_3 ⊆ P_1`.
fn compatible_by_orderings(p: &Partition3, q: &Partition3) -> bool {
    let (pb, qb) = (p.blocks(), q.blocks());
    PERMS.iter().any(|pp| {
        PERMS.iter().any(|qq| {
            let p1 = &pb[pp[0]];
            qb[qq[1]].iter().chain(&qb[qq[2]]).all(|y| p1.contains(y))
        })
    })
}

#[test]
fn compatibility_matches_ordering_search() {
    for k in 3..=5 {
        let parts = all_partitions(k);
        for p in &parts {
            for q in &parts {
                let c = is_compatible(p, q).unwrap();
                assert_eq!(c, compatible_by_orderings(p, q));
                assert_eq!(c, compatible_by_orderings(q, p));
            }
        }
    }
}

fn pairwise(family: &[&Partition3]) -> bool {
    (0..family.len()).all(|i| (i + 1..family.len()).all(|j| is_compatible(family[i], family[j]).unwrap()))
}

/// Largest pairwise compatible subfamily by trying every subset size upwards.
fn exhaustive_max(k: usize) -> usize {
    let parts = all_partitions(k);
    let mut best = 1;
    for size in 2..=parts.len() {
        let mut found = false;
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let fam: Vec<&Partition3> = idx.iter().map(|&i| &parts[i]).collect();
            if pairwise(&fam) {
                found = true;
                break;
            }
            // next combination
            let mut i = size;
            while i > 0 && idx[i - 1] == parts.len() - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
        if !found {
            break;
        }
        best = size;
    }
    best
}

/// Maximum clique by Bron–Kerbosch with pivoting.
fn bron_kerbosch(adj: &[Vec<bool>], r: usize, mut p: Vec<usize>, mut x: Vec<usize>, best: &mut usize) {
    if p.is_empty() && x.is_empty() {
        *best = (*best).max(r);
        return;
    }
    if r + p.len() <= *best {
        return;
    }
    let pivot = *p.iter().chain(&x).max_by_key(|&&u| p.iter().filter(|&&v| adj[u][v]).count()).unwrap();
    for v in p.clone().into_iter().filter(|&v| !adj[pivot][v]) {
        let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r + 1, np, nx, best);
        p.retain(|&u| u != v);
        x.push(v);
    }
}

fn bk_max(k: usize) -> usize {
    let parts = all_partitions(k);
    let n = parts.len();
    let adj: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| i != j && is_compatible(&parts[i], &parts[j]).unwrap()).collect()).collect();
    let mut best = 0;
    bron_kerbosch(&adj, 0, (0..n).collect(), Vec::new(), &mut best);
    best
}

#[test]
fn maximum_family_agrees_with_independent_searches() {
    for k in 3..=5 {
        assert_eq!(max_compatible_family(k).unwrap().size, exhaustive_max(k), "k={k}");
    }
    for k in 3..=7 {
        let fam = max_compatible_family(k).unwrap();
        assert_eq!(fam.size, bk_max(k), "k={k}");
        assert_eq!(fam.size, k - 2);
        let refs: Vec<&Partition3> = fam.witness.iter().collect();
        assert!(pairwise(&refs));
    }
}

#[test]
fn nested_chain_is_pairwise_compatible() {
    for k in 3..=12 {
        let fam = nested_family(k);
        assert_eq!(fam.len(), k - 2);
        let refs: Vec<&Partition3> = fam.iter().collect();
        assert!(pairwise(&refs));
        let mut distinct = fam.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), fam.len());
    }
}
