//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its runtime. Expected matrices for the kite graph are
//! transcribed from the worked examples; comparisons of whole matrices are
//! up to a signed permutation of rows and columns that preserves the
//! multidegree labels of the bases.

use std::time::{Duration, Instant};

use sandres_core::corpus;
use sandres_core::cw;
use sandres_core::poly::{big, Monomial, PolyMatrix, Polynomial};
use sandres_core::resolution::{
    betti, build_homogenized, build_parking, build_toppling, weight_vector, FreeComplex,
    WeightVector,
};
use sandres_core::verify::{
    betti_oracle, check_dd_zero, degeneration_fibers, generic_exactness, jstar_decompose,
    special_case_checks, star_betti_formula, strand_exactness, DEFAULT_SEED,
};
use sandres_core::{Error, Multigraph};

fn kite() -> Multigraph {
    Multigraph::parse("1 2 1\n1 3 1\n1 4 1\n2 4 1\n3 4 1\n", None).unwrap()
}

fn report(criterion: &str, passed: bool, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    println!(
        "[{}] {} ({:.3}s, budget {:.0}s)",
        if passed && within { "PASS" } else { "FAIL" },
        criterion,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(passed, "criterion failed: {criterion}");
    assert!(
        within,
        "criterion exceeded budget: {criterion} took {elapsed:?}"
    );
}

/// Builds a polynomial from (coefficient, exponents, t-exponent) terms.
fn poly(terms: &[Term]) -> Polynomial {
    let mut p = Polynomial::zero(4);
    for &(c, exps, t_exp) in terms {
        p.add_term(
            Monomial {
                exps: exps.to_vec(),
                t_exp,
            },
            big(c),
        );
    }
    p
}

type Term = (i64, [u32; 4], u32);

fn matrix(rows: usize, cols: usize, entries: &[(usize, usize, &[Term])]) -> PolyMatrix {
    let mut m = PolyMatrix::zero(rows, cols);
    for &(r, c, terms) in entries {
        m.set(r, c, poly(terms));
    }
    m
}

/// The reference kite bases, as divisor labels per homological degree.
fn reference_divisors() -> Vec<Vec<[i64; 4]>> {
    vec![
        vec![[0, 0, 0, 0]],
        vec![
            [3, 0, 0, 0],
            [0, 2, 0, 0],
            [0, 0, 2, 0],
            [2, 1, 0, 0],
            [2, 0, 1, 0],
            [1, 1, 1, 0],
        ],
        vec![
            [0, 2, 2, 0],
            [3, 1, 0, 0],
            [2, 2, 0, 0],
            [3, 0, 1, 0],
            [2, 0, 2, 0],
            [2, 1, 1, 0],
            [1, 1, 2, 0],
            [2, 1, 1, 0],
            [1, 2, 1, 0],
        ],
        vec![[3, 1, 1, 0], [2, 2, 1, 0], [2, 1, 2, 0], [1, 2, 2, 0]],
    ]
}

const X1: [u32; 4] = [1, 0, 0, 0];
const X2: [u32; 4] = [0, 1, 0, 0];
const X3: [u32; 4] = [0, 0, 1, 0];
const X4: [u32; 4] = [0, 0, 0, 1];

/// delta_{0,k} of the kite, in the reference basis order.
fn reference_parking() -> Vec<PolyMatrix> {
    let d1 = matrix(
        1,
        6,
        &[
            (0, 0, &[(1, [3, 0, 0, 0], 0)]),
            (0, 1, &[(1, [0, 2, 0, 0], 0)]),
            (0, 2, &[(1, [0, 0, 2, 0], 0)]),
            (0, 3, &[(1, [2, 1, 0, 0], 0)]),
            (0, 4, &[(1, [2, 0, 1, 0], 0)]),
            (0, 5, &[(1, [1, 1, 1, 0], 0)]),
        ],
    );
    let d2 = matrix(
        6,
        9,
        &[
            (0, 1, &[(-1, X2, 0)]),
            (0, 3, &[(-1, X3, 0)]),
            (1, 0, &[(-1, [0, 0, 2, 0], 0)]),
            (1, 2, &[(-1, [2, 0, 0, 0], 0)]),
            (1, 8, &[(-1, [1, 0, 1, 0], 0)]),
            (2, 0, &[(1, [0, 2, 0, 0], 0)]),
            (2, 4, &[(-1, [2, 0, 0, 0], 0)]),
            (2, 6, &[(-1, [1, 1, 0, 0], 0)]),
            (3, 1, &[(1, X1, 0)]),
            (3, 2, &[(1, X2, 0)]),
            (3, 5, &[(-1, X3, 0)]),
            (4, 3, &[(1, X1, 0)]),
            (4, 4, &[(1, X3, 0)]),
            (4, 7, &[(-1, X2, 0)]),
            (5, 5, &[(1, X1, 0)]),
            (5, 6, &[(1, X3, 0)]),
            (5, 7, &[(1, X1, 0)]),
            (5, 8, &[(1, X2, 0)]),
        ],
    );
    let d3 = matrix(
        9,
        4,
        &[
            (0, 3, &[(1, X1, 0)]),
            (1, 0, &[(1, X3, 0)]),
            (2, 1, &[(1, X3, 0)]),
            (3, 0, &[(-1, X2, 0)]),
            (4, 2, &[(1, X2, 0)]),
            (5, 0, &[(1, X1, 0)]),
            (5, 1, &[(1, X2, 0)]),
            (6, 2, &[(-1, X1, 0)]),
            (6, 3, &[(1, X2, 0)]),
            (7, 0, &[(-1, X1, 0)]),
            (7, 2, &[(1, X3, 0)]),
            (8, 1, &[(-1, X1, 0)]),
            (8, 3, &[(-1, X3, 0)]),
        ],
    );
    vec![d1, d2, d3]
}

/// delta_{1,k} of the kite. With `t_pow` nonzero the homogenized variant
/// delta_{t,k} is produced instead (the reference matrices differ only by
/// t powers on the non-representative monomials).
fn reference_toppling(with_t: bool) -> Vec<PolyMatrix> {
    let t = |p: u32| if with_t { p } else { 0 };
    let d1 = matrix(
        1,
        6,
        &[
            (0, 0, &[(1, [3, 0, 0, 0], 0), (-1, [0, 1, 1, 1], t(1))]),
            (0, 1, &[(1, [0, 2, 0, 0], 0), (-1, [1, 0, 0, 1], t(1))]),
            (0, 2, &[(1, [0, 0, 2, 0], 0), (-1, [1, 0, 0, 1], t(1))]),
            (0, 3, &[(1, [2, 1, 0, 0], 0), (-1, [0, 0, 1, 2], t(2))]),
            (0, 4, &[(1, [2, 0, 1, 0], 0), (-1, [0, 1, 0, 2], t(2))]),
            (0, 5, &[(1, [1, 1, 1, 0], 0), (-1, [0, 0, 0, 3], t(3))]),
        ],
    );
    let d2 = matrix(
        6,
        9,
        &[
            (0, 1, &[(-1, X2, 0)]),
            (0, 2, &[(-1, X4, t(1))]),
            (0, 3, &[(-1, X3, 0)]),
            (0, 4, &[(-1, X4, t(1))]),
            (1, 0, &[(-1, [0, 0, 2, 0], 0), (1, [1, 0, 0, 1], t(1))]),
            (1, 1, &[(-1, [0, 0, 1, 1], t(1))]),
            (1, 2, &[(-1, [2, 0, 0, 0], 0)]),
            (1, 7, &[(-1, [0, 0, 0, 2], t(2))]),
            (1, 8, &[(-1, [1, 0, 1, 0], 0)]),
            (2, 0, &[(1, [0, 2, 0, 0], 0), (-1, [1, 0, 0, 1], t(1))]),
            (2, 3, &[(-1, [0, 1, 0, 1], t(1))]),
            (2, 4, &[(-1, [2, 0, 0, 0], 0)]),
            (2, 5, &[(-1, [0, 0, 0, 2], t(2))]),
            (2, 6, &[(-1, [1, 1, 0, 0], 0)]),
            (3, 1, &[(1, X1, 0)]),
            (3, 2, &[(1, X2, 0)]),
            (3, 5, &[(-1, X3, 0)]),
            (3, 6, &[(-1, X4, t(1))]),
            (4, 3, &[(1, X1, 0)]),
            (4, 4, &[(1, X3, 0)]),
            (4, 7, &[(-1, X2, 0)]),
            (4, 8, &[(-1, X4, t(1))]),
            (5, 5, &[(1, X1, 0)]),
            (5, 6, &[(1, X3, 0)]),
            (5, 7, &[(1, X1, 0)]),
            (5, 8, &[(1, X2, 0)]),
        ],
    );
    let d3 = matrix(
        9,
        4,
        &[
            (0, 0, &[(-1, X4, t(1))]),
            (0, 3, &[(1, X1, 0)]),
            (1, 0, &[(1, X3, 0)]),
            (1, 2, &[(-1, X4, t(1))]),
            (2, 1, &[(1, X3, 0)]),
            (2, 3, &[(1, X4, t(1))]),
            (3, 0, &[(-1, X2, 0)]),
            (3, 1, &[(-1, X4, t(1))]),
            (4, 2, &[(1, X2, 0)]),
            (4, 3, &[(-1, X4, t(1))]),
            (5, 0, &[(1, X1, 0)]),
            (5, 1, &[(1, X2, 0)]),
            (6, 2, &[(-1, X1, 0)]),
            (6, 3, &[(1, X2, 0)]),
            (7, 0, &[(-1, X1, 0)]),
            (7, 2, &[(1, X3, 0)]),
            (8, 1, &[(-1, X1, 0)]),
            (8, 3, &[(-1, X3, 0)]),
        ],
    );
    vec![d1, d2, d3]
}

/// Checks equality of two complexes up to a signed permutation of each
/// basis that preserves the divisor labels. Searches label-respecting
/// bijections level by level with backtracking, then solves for the signs.
fn complexes_match_up_to_signed_permutation(
    ours: &FreeComplex,
    reference_mats: &[PolyMatrix],
    reference_divisors: &[Vec<[i64; 4]>],
) -> bool {
    let levels = ours.length();
    assert_eq!(reference_mats.len() + 1, levels);
    // candidate positions per our basis element: reference elements with
    // the same divisor
    let candidates: Vec<Vec<Vec<usize>>> = (0..levels)
        .map(|k| {
            ours.basis(k)
                .iter()
                .map(|b| {
                    reference_divisors[k]
                        .iter()
                        .enumerate()
                        .filter(|(_, d)| d.as_slice() == b.divisor.values.as_slice())
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect()
        })
        .collect();
    // permutation per level, built by backtracking over ambiguous labels
    fn assign(
        level_candidates: &[Vec<usize>],
        used: &mut Vec<bool>,
        perm: &mut Vec<usize>,
        idx: usize,
        try_rest: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if idx == level_candidates.len() {
            return try_rest(perm);
        }
        for &cand in &level_candidates[idx] {
            if used[cand] {
                continue;
            }
            used[cand] = true;
            perm.push(cand);
            if assign(level_candidates, used, perm, idx + 1, try_rest) {
                return true;
            }
            perm.pop();
            used[cand] = false;
        }
        false
    }
    // search permutations level by level; for each complete assignment,
    // permute our matrices and test sign isomorphism
    fn search(
        k: usize,
        levels: usize,
        candidates: &[Vec<Vec<usize>>],
        perms: &mut Vec<Vec<usize>>,
        ours: &FreeComplex,
        reference: &[PolyMatrix],
    ) -> bool {
        if k == levels {
            // assemble permuted matrices and compare with sign freedom
            let permuted: Vec<PolyMatrix> = (1..levels)
                .map(|kk| {
                    let d = ours.differential(kk);
                    let mut m = PolyMatrix::zero(d.rows, d.cols);
                    for (&(r, c), p) in d.entries() {
                        m.set(perms[kk - 1][r], perms[kk][c], p.clone());
                    }
                    m
                })
                .collect();
            return sandres_core::verify::sign_isomorphic_chain(&permuted, reference);
        }
        let mut used = vec![false; candidates[k].len()];
        let mut perm = Vec::new();
        let mut try_rest = |perm_now: &[usize]| -> bool {
            perms.push(perm_now.to_vec());
            let ok = search(k + 1, levels, candidates, perms, ours, reference);
            perms.pop();
            ok
        };
        assign(&candidates[k], &mut used, &mut perm, 0, &mut try_rest)
    }
    search(
        0,
        levels,
        &candidates,
        &mut Vec::new(),
        ours,
        reference_mats,
    )
}

#[test]
fn criterion_1_kite_betti_numbers() {
    let t0 = Instant::now();
    let g = kite();
    let passed = betti(&g) == vec![1, 6, 9, 4];
    report(
        "1: kite Betti numbers (1,6,9,4)",
        passed,
        t0.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_2_kite_parking_resolution() {
    let t0 = Instant::now();
    let g = kite();
    let c = build_parking(&g).unwrap();
    let mut entries: Vec<Polynomial> = c
        .differential(1)
        .entries()
        .map(|(_, p)| p.clone())
        .collect();
    entries.sort();
    let mut expected: Vec<Polynomial> = [
        [3, 0, 0, 0],
        [0, 2, 0, 0],
        [0, 0, 2, 0],
        [2, 1, 0, 0],
        [2, 0, 1, 0],
        [1, 1, 1, 0],
    ]
    .iter()
    .map(|&e| poly(&[(1, e, 0)]))
    .collect();
    expected.sort();
    let generators_exact = entries == expected;
    let matrices_match =
        complexes_match_up_to_signed_permutation(&c, &reference_parking(), &reference_divisors());
    report(
        "2: kite parking resolution matches reference matrices",
        generators_exact && matrices_match,
        t0.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_3_kite_toppling_resolution() {
    let t0 = Instant::now();
    let g = kite();
    let c = build_toppling(&g).unwrap();
    // the six binomials, up to a global sign each
    let expected: Vec<Polynomial> = vec![
        poly(&[(1, [3, 0, 0, 0], 0), (-1, [0, 1, 1, 1], 0)]),
        poly(&[(1, [0, 2, 0, 0], 0), (-1, [1, 0, 0, 1], 0)]),
        poly(&[(1, [0, 0, 2, 0], 0), (-1, [1, 0, 0, 1], 0)]),
        poly(&[(1, [2, 1, 0, 0], 0), (-1, [0, 0, 1, 2], 0)]),
        poly(&[(1, [2, 0, 1, 0], 0), (-1, [0, 1, 0, 2], 0)]),
        poly(&[(1, [1, 1, 1, 0], 0), (-1, [0, 0, 0, 3], 0)]),
    ];
    let got: Vec<Polynomial> = c
        .differential(1)
        .entries()
        .map(|(_, p)| p.clone())
        .collect();
    let entries_ok = got.len() == 6
        && expected
            .iter()
            .all(|e| got.iter().any(|p| p == e || p == &e.neg()));
    // binomials exactly at bridges: every entry of this complex is a
    // monomial or a binomial, and binomial entries pair a contraction with
    // its reverse; full matrices also must match the reference ones
    let mut binomial_shape_ok = true;
    for k in 1..c.length() {
        for (_, p) in c.differential(k).entries() {
            if p.num_terms() > 2 {
                binomial_shape_ok = false;
            }
        }
    }
    let matrices_match = complexes_match_up_to_signed_permutation(
        &c,
        &reference_toppling(false),
        &reference_divisors(),
    );
    report(
        "3: kite toppling resolution matches reference binomials",
        entries_ok && binomial_shape_ok && matrices_match,
        t0.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_4_kite_homogenized_family() {
    let t0 = Instant::now();
    let g = kite();
    // The reference example pairs lambda = (5,6,5,2) with t-weight 2, but
    // that lambda produces homogenization gaps 5 and 7 on the kite, so the
    // divisibility contract rejects the combination. The reference
    // matrices arise from any lambda solving L*lambda = m(1,1,1,-3); the
    // checks below pin the rejection and verify the criterion's substance
    // on the consistent parameters.
    let reference_pair = WeightVector::from_lambda(&g, vec![5, 6, 5, 2], 2).unwrap();
    let rejected = matches!(
        build_homogenized(&g, &reference_pair),
        Err(Error::GapNotDivisible(_, 2))
    );

    // (a) the reference matrices, via a weight vector consistent with them
    let consistent = WeightVector::from_lambda(&g, vec![3, 3, 3, 1], 2).unwrap();
    let ct = build_homogenized(&g, &consistent).unwrap();
    let matrices_match = complexes_match_up_to_signed_permutation(
        &ct,
        &reference_toppling(true),
        &reference_divisors(),
    );

    // (b) fiber checks with the reference lambda at the valid t-weight
    let reference_lambda = WeightVector::from_lambda(&g, vec![5, 6, 5, 2], 1).unwrap();
    let fibers = degeneration_fibers(&g, &reference_lambda).unwrap();
    // and with the consistent weight vector
    let fibers2 = degeneration_fibers(&g, &consistent).unwrap();

    report(
        "4: kite homogenized family (reference-lambda rejection pinned; \
         matrices and fibers verified on consistent parameters)",
        rejected && matrices_match && fibers.passed() && fibers2.passed(),
        t0.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_5_kite_star_decomposition() {
    let t0 = Instant::now();
    let g = kite();
    let c = build_parking(&g).unwrap();
    let d = jstar_decompose(&g, &c, 0).unwrap();
    let census_ok = d.census.get("q_{3,3}") == Some(&1)
        && d.census.get("q_{3,2}") == Some(&3)
        && d.census.get("q_{2,2}") == Some(&4)
        && d.census.get("q_{1,2}") == Some(&1)
        && d.census.len() == 4;
    // shapes: 1 x (K -> K^2 -> K) at degrees 3..1, 3 x (K -> K) at 3..2,
    // 4 x (K -> K) at 2..1, 1 x (K -> K) at 1..0
    let shape = |root: usize, sizes: &[usize]| {
        d.groups
            .iter()
            .filter(|gr| gr.root_degree == root && gr.level_sizes == sizes)
            .count()
    };
    let shapes_ok = shape(3, &[1, 2, 1]) == 1
        && shape(3, &[1, 1]) == 3
        && shape(2, &[1, 1]) == 4
        && shape(1, &[1, 1]) == 1;
    let dims_ok = d.per_degree_dims == vec![1, 6, 9, 4];
    report(
        "5: kite star decomposition 1+3+4+1 with degree dims (4,9,6,1)",
        d.passed && census_ok && shapes_ok && dims_ok,
        t0.elapsed(),
        Duration::from_secs(1),
    );
}

fn criterion_corpus() -> Vec<Multigraph> {
    let mut graphs = corpus::connected_simple_graphs_up_to(5);
    graphs.extend(corpus::random_multigraphs(DEFAULT_SEED, 20, 5, 3));
    graphs
}

#[test]
fn criterion_6_oracle_equivalence_on_corpus() {
    let t0 = Instant::now();
    let graphs = criterion_corpus();
    assert_eq!(graphs.len(), 31 + 20);
    let mut passed = true;
    for g in &graphs {
        if betti_oracle(g).totals != betti(g) {
            eprintln!("oracle mismatch on {}", g.to_json());
            passed = false;
        }
    }
    report(
        "6: Betti oracle equivalence on 51-graph corpus",
        passed,
        t0.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_7_property_suite_on_corpus() {
    let t0 = Instant::now();
    let graphs = criterion_corpus();
    let mut passed = true;
    for g in &graphs {
        let c0 = build_parking(g).unwrap();
        let c1 = build_toppling(g).unwrap();
        let ct = if g.n() >= 2 {
            let w = weight_vector(g).unwrap();
            Some(build_homogenized(g, &w).unwrap())
        } else {
            None
        };
        let mut ok = check_dd_zero(&c0) && check_dd_zero(&c1);
        if let Some(ct) = &ct {
            ok &= check_dd_zero(ct);
        }
        ok &= strand_exactness(g, &c0).passed();
        ok &= generic_exactness(&c0, DEFAULT_SEED).exact;
        ok &= generic_exactness(&c1, DEFAULT_SEED).exact;
        if let Some(ct) = &ct {
            ok &= generic_exactness(ct, DEFAULT_SEED).exact;
        }
        let counts = betti(g);
        for j in 0..g.n().saturating_sub(1) {
            ok &= star_betti_formula(g, &c0, j).unwrap() == counts;
        }
        if !ok {
            eprintln!("property suite failed on {}", g.to_json());
            passed = false;
        }
    }
    report(
        "7: property suite (d.d=0, strands, generic ranks, star formula) on corpus",
        passed,
        t0.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_8_special_cases() {
    let t0 = Instant::now();
    let mut passed = true;
    // every tree with n <= 6: Koszul up to signs, binomial Betti numbers
    for n in 1..=6usize {
        for g in corpus::trees_up_to_iso(n) {
            let c = build_parking(&g).unwrap();
            let special = special_case_checks(&g, &c);
            if special.tree_koszul != Some(true) {
                eprintln!("tree Koszul check failed on {}", g.to_json());
                passed = false;
            }
            let expected: Vec<usize> = (0..n).map(|k| binomial(n - 1, k)).collect();
            if betti(&g) != expected {
                eprintln!("tree Betti mismatch on {}", g.to_json());
                passed = false;
            }
        }
    }
    // K4 and K5: Scarf property
    for n in [4usize, 5] {
        let edges: Vec<(usize, usize, u64)> = (1..=n)
            .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j, 1)))
            .collect();
        let g = Multigraph::from_edges(n, &edges).unwrap();
        let c = build_parking(&g).unwrap();
        if special_case_checks(&g, &c).saturated_scarf != Some(true) {
            eprintln!("Scarf check failed on K{n}");
            passed = false;
        }
    }
    report(
        "8: trees are Koszul (n<=6); K4/K5 satisfy the Scarf property",
        passed,
        t0.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_9_cw_support_on_corpus() {
    let t0 = Instant::now();
    let graphs = criterion_corpus();
    let mut passed = true;
    for g in &graphs {
        if g.n() < 2 {
            continue; // no cells to check
        }
        let p = cw::build_part(g).unwrap();
        let summary = p.summary(g.is_saturated());
        let ok = summary.label_lcm_ok
            && summary.acyclicity_ok
            && summary.boundary_spheres_ok
            && summary.facet_counts_simplicial;
        if !ok {
            eprintln!("cw checks failed on {}: {:?}", g.to_json(), summary);
            passed = false;
        }
    }
    report(
        "9: cell poset supports the resolution on the corpus",
        passed,
        t0.elapsed(),
        Duration::from_secs(180),
    );
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
