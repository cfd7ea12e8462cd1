//! Test corpora: connected simple graphs up to isomorphism and seeded
//! random multigraphs, all with the sink at the highest-numbered vertex.

use crate::graph::Multigraph;
use crate::rng::XorShift64;

/// All connected simple graphs on exactly `n` vertices, one per
/// isomorphism class, as weight-1 multigraphs with sink `n`.
pub fn connected_simple_graphs(n: usize) -> Vec<Multigraph> {
    assert!((1..=6).contains(&n), "corpus enumeration is for small n");
    if n == 1 {
        return vec![Multigraph::from_weights(vec![vec![0]]).unwrap()];
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    let perms = permutations(n);
    let mut canonical_seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1 << m) {
        // quick connectivity pre-check via the graph itself
        let mut weights = vec![vec![0u64; n]; n];
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                weights[i][j] = 1;
                weights[j][i] = 1;
            }
        }
        let Ok(g) = Multigraph::from_weights(weights.clone()) else {
            continue;
        };
        // canonical form: the lexicographically least edge mask over all
        // vertex relabelings
        let mut best = u64::MAX;
        for perm in &perms {
            let mut pm = 0u64;
            for (b, &(i, j)) in pairs.iter().enumerate() {
                let (pi, pj) = (perm[i], perm[j]);
                if weights[pi][pj] > 0 {
                    pm |= 1 << b;
                }
            }
            best = best.min(pm);
        }
        if canonical_seen.insert(best) {
            out.push(g);
        }
    }
    out
}

/// All connected simple graphs with `1..=n_max` vertices, one per
/// isomorphism class.
pub fn connected_simple_graphs_up_to(n_max: usize) -> Vec<Multigraph> {
    (1..=n_max).flat_map(connected_simple_graphs).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// All trees on `n` labeled vertices up to isomorphism, via Pruefer
/// sequences and canonicalization.
pub fn trees_up_to_iso(n: usize) -> Vec<Multigraph> {
    if n == 1 {
        return vec![Multigraph::from_weights(vec![vec![0]]).unwrap()];
    }
    if n == 2 {
        return vec![Multigraph::from_edges(2, &[(1, 2, 1)]).unwrap()];
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let total = (n as u64).pow(n as u32 - 2);
    for code in 0..total {
        // decode the Pruefer sequence
        let mut seq = Vec::with_capacity(n - 2);
        let mut c = code;
        for _ in 0..(n - 2) {
            seq.push((c % n as u64) as usize);
            c /= n as u64;
        }
        let mut degree = vec![1usize; n];
        for &v in &seq {
            degree[v] += 1;
        }
        let mut weights = vec![vec![0u64; n]; n];
        let mut ptr = seq.clone();
        for &v in &ptr {
            let leaf = (0..n).find(|&u| degree[u] == 1).unwrap();
            weights[leaf][v] = 1;
            weights[v][leaf] = 1;
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let last: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
        weights[last[0]][last[1]] = 1;
        weights[last[1]][last[0]] = 1;
        ptr.clear();
        let mut best = u64::MAX;
        for perm in &perms {
            let mut pm = 0u64;
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if weights[perm[i]][perm[j]] > 0 {
                    pm |= 1 << b;
                }
            }
            best = best.min(pm);
        }
        if seen.insert(best) {
            out.push(Multigraph::from_weights(weights).unwrap());
        }
    }
    out
}

/// Seeded random connected multigraphs: a random spanning tree plus random
/// extra edges, weights in `1..=max_weight`.
pub fn random_multigraphs(
    seed: u64,
    count: usize,
    n_max: usize,
    max_weight: u64,
) -> Vec<Multigraph> {
    let mut rng = XorShift64::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.range(2, n_max as u64) as usize;
        let mut weights = vec![vec![0u64; n]; n];
        // spanning tree: attach each vertex to an earlier one
        for v in 1..n {
            let u = rng.range(0, v as u64 - 1 + 1) as usize;
            let u = u.min(v - 1);
            let w = rng.range(1, max_weight);
            weights[u][v] = w;
            weights[v][u] = w;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if weights[i][j] == 0 && rng.range(0, 2) == 0 {
                    let w = rng.range(1, max_weight);
                    weights[i][j] = w;
                    weights[j][i] = w;
                }
            }
        }
        out.push(Multigraph::from_weights(weights).expect("construction is connected"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_class_counts() {
        assert_eq!(connected_simple_graphs(1).len(), 1);
        assert_eq!(connected_simple_graphs(2).len(), 1);
        assert_eq!(connected_simple_graphs(3).len(), 2);
        assert_eq!(connected_simple_graphs(4).len(), 6);
        assert_eq!(connected_simple_graphs(5).len(), 21);
        assert_eq!(connected_simple_graphs_up_to(5).len(), 31);
    }

    #[test]
    fn tree_counts() {
        // numbers of unlabeled trees: 1, 1, 1, 2, 3, 6
        assert_eq!(trees_up_to_iso(1).len(), 1);
        assert_eq!(trees_up_to_iso(2).len(), 1);
        assert_eq!(trees_up_to_iso(3).len(), 1);
        assert_eq!(trees_up_to_iso(4).len(), 2);
        assert_eq!(trees_up_to_iso(5).len(), 3);
        assert_eq!(trees_up_to_iso(6).len(), 6);
    }

    #[test]
    fn random_graphs_are_deterministic() {
        let a = random_multigraphs(42, 5, 5, 3);
        let b = random_multigraphs(42, 5, 5, 3);
        assert_eq!(a, b);
        assert!(a.iter().all(|g| g.n() >= 2 && g.n() <= 5));
    }
}
