//! Cross-module invariants exercised over the whole test corpus, beyond
//! what the per-module unit tests cover on the named small graphs.

use sandres_core::corpus;
use sandres_core::partition::{connected_partitions, n_acyclic_partitions, quotient, ChipClass};
use sandres_core::resolution::{
    betti, bruteforce_parking_generators, build_homogenized, build_parking, build_toppling,
    minimal_generators, weight_vector,
};
use sandres_core::rng::XorShift64;
use sandres_core::verify::{degeneration_fibers, jstar_decompose, DEFAULT_SEED};
use sandres_core::{Divisor, Multigraph};

fn corpus_graphs() -> Vec<Multigraph> {
    let mut graphs = corpus::connected_simple_graphs_up_to(4);
    graphs.extend(corpus::random_multigraphs(7, 8, 5, 3));
    graphs
}

#[test]
fn q_reduce_is_idempotent_and_degree_preserving() {
    let mut rng = XorShift64::new(99);
    for g in corpus_graphs() {
        for _ in 0..20 {
            let d = Divisor::new((0..g.n()).map(|_| rng.range(0, 12) as i64 - 6).collect());
            let r = g.q_reduce(&d);
            assert_eq!(g.q_reduce(&r), r);
            assert_eq!(r.degree(), d.degree());
            assert!(r.values[..g.n() - 1].iter().all(|&x| x >= 0));
            assert!(g.linearly_equivalent(&d, &r));
        }
    }
}

#[test]
fn partition_count_bookkeeping() {
    // the per-partition counts of sink-rooted orientations sum to the
    // total enumeration
    for g in corpus_graphs() {
        for k in 1..=g.n() {
            let all = n_acyclic_partitions(&g, k).unwrap();
            let by_partition: usize = connected_partitions(&g, k)
                .unwrap()
                .iter()
                .map(|p| all.iter().filter(|c| c.partition() == p).count())
                .sum();
            assert_eq!(all.len(), by_partition);
        }
    }
}

#[test]
fn class_members_project_to_equivalent_divisors() {
    for g in corpus_graphs().into_iter().filter(|g| g.n() <= 4) {
        for k in 1..=g.n() {
            for c in n_acyclic_partitions(&g, k).unwrap() {
                let q = quotient(&g, c.partition());
                let project = |m: &sandres_core::AcyclicPartition| -> Divisor {
                    let d = m.divisor(&g);
                    let mut vals = vec![0i64; k];
                    for (b, block) in m.blocks().iter().enumerate() {
                        vals[q.vertex_of_block[b]] = block.iter().map(|&v| d.values[v]).sum();
                    }
                    Divisor::new(vals)
                };
                let base = project(&c);
                for m in ChipClass::from_canonical(c.clone()).members() {
                    assert!(q.graph.linearly_equivalent(&base, &project(&m)));
                }
            }
        }
    }
}

#[test]
fn generators_match_bruteforce_on_corpus() {
    for g in corpus_graphs() {
        let mut ours = minimal_generators(&g);
        ours.sort();
        assert_eq!(ours, bruteforce_parking_generators(&g), "{}", g.to_json());
    }
}

#[test]
fn parking_and_toppling_ranks_agree_on_corpus() {
    for g in corpus_graphs() {
        let c0 = build_parking(&g).unwrap();
        let c1 = build_toppling(&g).unwrap();
        assert_eq!(c0.ranks(), c1.ranks());
        assert_eq!(c0.ranks(), betti(&g));
    }
}

#[test]
fn minimality_no_unit_entries_on_corpus() {
    for g in corpus_graphs() {
        for c in [build_parking(&g).unwrap(), build_toppling(&g).unwrap()] {
            for d in c.differentials() {
                for (_, p) in d.entries() {
                    assert!(p.lies_in_irrelevant_ideal());
                }
            }
        }
    }
}

#[test]
fn degeneration_fibers_on_corpus() {
    for g in corpus_graphs() {
        if g.n() < 2 {
            continue;
        }
        let w = weight_vector(&g).unwrap();
        let report = degeneration_fibers(&g, &w).unwrap();
        assert!(report.passed(), "{} -> {report:?}", g.to_json());
    }
}

#[test]
fn star_decomposition_passes_on_corpus() {
    for g in corpus_graphs() {
        if g.n() < 2 {
            continue;
        }
        let c0 = build_parking(&g).unwrap();
        for j in 0..g.n() - 1 {
            let d = jstar_decompose(&g, &c0, j).unwrap();
            assert!(d.passed, "vertex {} of {}", j + 1, g.to_json());
        }
    }
}

#[test]
fn homogenized_entries_pick_up_t_powers_deterministically() {
    // two builds with the same seed and weight vector are identical
    for g in corpus_graphs().into_iter().take(6) {
        if g.n() < 2 {
            continue;
        }
        let w = weight_vector(&g).unwrap();
        let a = build_homogenized(&g, &w).unwrap();
        let b = build_homogenized(&g, &w).unwrap();
        for k in 1..a.length() {
            assert_eq!(a.differential(k), b.differential(k));
        }
        let _ = DEFAULT_SEED;
    }
}
