//! Exhaustive structural checks over the small parameter grid, each against a
//! set-based oracle that does not go through the arithmetic shortcuts.

use std::collections::BTreeSet;

use itertools::Itertools;
use spc_caching::analysis;
use spc_caching::par::Execution;
use spc_caching::simulator::{DemandSweep, Simulator};
use spc_caching::{
    build_mn_scheme, build_proposed_scheme, enumerate_codewords, make_corpus, schedule_mn,
    schedule_proposed, verify_schedule, BlockId, CachingScheme, Rational, ResolvableDesign,
    SchemeParams,
};

fn grid() -> impl Iterator<Item = (usize, usize)> {
    (2..=4).cartesian_product(2..=4)
}

fn design(q: usize, k: usize) -> ResolvableDesign {
    ResolvableDesign::build(enumerate_codewords(SchemeParams::new(q, k).unwrap()))
}

fn block_set(d: &ResolvableDesign, id: BlockId) -> BTreeSet<usize> {
    d.block(id).iter().copied().collect()
}

fn mn_grid() -> Vec<(usize, usize)> {
    (2..=8usize)
        .flat_map(|users| (1..users).map(move |t| (users, t)))
        .collect()
}

#[test]
fn codeword_parity_and_distinct_columns() {
    for (q, k) in grid() {
        let t = enumerate_codewords(SchemeParams::new(q, k).unwrap());
        let cols: BTreeSet<Vec<usize>> = (0..t.columns()).map(|j| t.column(j)).collect();
        assert_eq!(cols.len(), q.pow(k as u32 - 1));
        for c in &cols {
            assert_eq!(c[..k - 1].iter().sum::<usize>() % q, c[k - 1]);
        }
    }
}

#[test]
fn blocks_have_equal_size_and_classes_partition() {
    for (q, k) in grid() {
        let d = design(q, k);
        let all: BTreeSet<usize> = (0..d.point_count()).collect();
        assert_eq!(d.blocks().count(), k * q);
        for class in 0..k {
            let mut union = BTreeSet::new();
            for label in 0..q {
                let b = block_set(&d, BlockId::new(class, label));
                assert_eq!(b.len(), q.pow(k as u32 - 2));
                assert!(union.is_disjoint(&b));
                union.extend(b);
            }
            assert_eq!(union, all);
        }
    }
}

#[test]
fn k_minus_one_blocks_meet_in_one_point() {
    for (q, k) in grid() {
        let d = design(q, k);
        for classes in (0..k).combinations(k - 1) {
            for labels in (0..k - 1).map(|_| 0..q).multi_cartesian_product() {
                let picks: Vec<BlockId> = classes
                    .iter()
                    .zip(&labels)
                    .map(|(&c, &l)| BlockId::new(c, l))
                    .collect();
                let common = picks
                    .iter()
                    .map(|&p| block_set(&d, p))
                    .reduce(|a, b| a.intersection(&b).copied().collect())
                    .unwrap();
                assert_eq!(common.len(), 1, "q={q} k={k} {picks:?}");
                assert_eq!(
                    d.intersect_point(&picks).unwrap(),
                    *common.first().unwrap()
                );
                // any permutation of the picks gives the same point
                let mut rev = picks.clone();
                rev.reverse();
                assert_eq!(d.intersect_point(&rev).unwrap(), *common.first().unwrap());
            }
        }
    }
}

#[test]
fn proposed_schedule_matches_set_oracle() {
    for (q, k) in grid() {
        let d = design(q, k);
        let s = build_proposed_scheme(&d, 1).unwrap();
        let sched = schedule_proposed(&s, &d).unwrap();

        // tuples with empty k-fold intersection, by set operations
        let mut expected = Vec::new();
        for labels in (0..k).map(|_| 0..q).multi_cartesian_product() {
            let sets: Vec<BTreeSet<usize>> = (0..k)
                .map(|i| block_set(&d, BlockId::new(i, labels[i])))
                .collect();
            let all = sets
                .iter()
                .cloned()
                .reduce(|a, b| a.intersection(&b).copied().collect())
                .unwrap();
            if all.is_empty() {
                let terms: Vec<(usize, usize)> = (0..k)
                    .map(|alpha| {
                        let others = (0..k)
                            .filter(|&i| i != alpha)
                            .map(|i| sets[i].clone())
                            .reduce(|a, b| a.intersection(&b).copied().collect())
                            .unwrap();
                        assert_eq!(others.len(), 1);
                        (alpha * q + labels[alpha], *others.first().unwrap())
                    })
                    .collect();
                expected.push(terms);
            }
        }
        assert_eq!(expected.len(), q.pow(k as u32) - q.pow(k as u32 - 1));
        let got: Vec<Vec<(usize, usize)>> = sched
            .equations()
            .iter()
            .map(|e| e.terms.iter().map(|t| (t.user, t.subfile)).collect())
            .collect();
        assert_eq!(got, expected, "q={q} k={k}");
        assert_eq!(sched.rate(), Rational::from_integer(q as u64 - 1));
    }
}

#[test]
fn decodability_distinctness_completeness() {
    for (q, k) in grid() {
        let d = design(q, k);
        let s = build_proposed_scheme(&d, 1).unwrap();
        let sched = schedule_proposed(&s, &d).unwrap();
        for eq in sched.equations() {
            let classes: Vec<usize> = eq.terms.iter().map(|t| t.user / q).collect();
            assert_eq!(classes, (0..k).collect::<Vec<_>>());
            for (a, term) in eq.terms.iter().enumerate() {
                let own = BlockId::new(a, term.user % q);
                assert!(!block_set(&d, own).contains(&term.subfile));
                for (i, other) in eq.terms.iter().enumerate() {
                    if i != a {
                        let b = BlockId::new(i, other.user % q);
                        assert!(block_set(&d, b).contains(&term.subfile));
                    }
                }
            }
        }
        let report = verify_schedule(&s, &sched);
        assert!(report.all_ok(), "q={q} k={k}");
        let expect = q.pow(k as u32 - 1) - q.pow(k as u32 - 2);
        for (u, cov) in report.users.iter().enumerate() {
            assert_eq!(cov.participations, expect);
            let mut all: BTreeSet<usize> = cov.recovered.iter().copied().collect();
            all.extend(s.cached_subfiles(u));
            assert_eq!(all.len(), s.subpacketization());
        }
    }
}

#[test]
fn mn_schedules_match_formula() {
    for (users, t) in mn_grid() {
        let ratio = Rational::new(t as u64, users as u64);
        let s = build_mn_scheme(users, ratio, 1).unwrap();
        let sched = schedule_mn(&s).unwrap();
        assert_eq!(
            num_bigint::BigUint::from(sched.len()),
            analysis::binomial(users as u64, t as u64 + 1)
        );
        assert_eq!(sched.rate(), analysis::rate_mn(users as u64, ratio));
        assert!(sched.equations().iter().all(|e| e.terms.len() == t + 1));
        assert!(verify_schedule(&s, &sched).all_ok(), "K={users} t={t}");
    }
}

fn check_budget_and_rate(scheme: &CachingScheme, design: Option<&ResolvableDesign>) {
    let corpus = make_corpus(3, 37, 9, scheme.subpacketization()).unwrap();
    let sim = Simulator::new(scheme, design, &corpus).unwrap();
    let padded = corpus.padded_len() as u64;
    let per_file = scheme.cache_ratio() * Rational::from_integer(padded);
    for c in sim.caches() {
        assert_eq!(
            Rational::from_integer(c.bytes() as u64),
            per_file * Rational::from_integer(3)
        );
    }
    let summary = sim
        .sweep(&DemandSweep::Random { count: 5, seed: 1 }, Execution::Sequential)
        .unwrap();
    assert!(summary.ok());
    assert_eq!(summary.rates, vec![scheme.nominal_rate()]);
    assert_eq!(
        Rational::from_integer(summary.transmitted_bytes as u64),
        scheme.nominal_rate() * Rational::from_integer(padded)
    );
    assert!(summary.uniform_transmissions);
}

#[test]
fn cache_budget_and_rate_conservation() {
    for (q, k) in grid() {
        let d = design(q, k);
        check_budget_and_rate(&build_proposed_scheme(&d, 3).unwrap(), Some(&d));
    }
    for (users, t) in mn_grid() {
        let s = build_mn_scheme(users, Rational::new(t as u64, users as u64), 3).unwrap();
        check_budget_and_rate(&s, None);
    }
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let d = design(3, 3);
    let s = build_proposed_scheme(&d, 2).unwrap();
    let corpus = make_corpus(2, 50, 4, s.subpacketization()).unwrap();
    let sim = Simulator::new(&s, Some(&d), &corpus).unwrap();
    let seq = sim.sweep(&DemandSweep::Exhaustive, Execution::Sequential).unwrap();
    let par = sim.sweep(&DemandSweep::Exhaustive, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.runs, 512);
    assert!(seq.ok());
}
