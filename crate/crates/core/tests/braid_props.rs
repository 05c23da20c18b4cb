use proptest::prelude::*;
use qpbraid::braid::{QpFactor, Tristate, DEFAULT_QP_PARSE_BOUND};
use qpbraid::{BraidLetter, BraidWord, QuasipositiveFactorization};

fn letters(n: usize, max_len: usize) -> impl Strategy<Value = Vec<BraidLetter>> {
    prop::collection::vec((1..n, prop::bool::ANY), 0..=max_len).prop_map(|v| {
        v.into_iter()
            .map(|(k, pos)| if pos { BraidLetter::positive(k) } else { BraidLetter::negative(k) })
            .collect()
    })
}

fn word(max_len: usize) -> impl Strategy<Value = BraidWord> {
    (2usize..=6).prop_flat_map(move |n| letters(n, max_len).prop_map(move |l| BraidWord::new(n, l).unwrap()))
}

fn word_pair(max_len: usize) -> impl Strategy<Value = (BraidWord, BraidWord)> {
    (2usize..=6).prop_flat_map(move |n| {
        (letters(n, max_len), letters(n, max_len))
            .prop_map(move |(a, b)| (BraidWord::new(n, a).unwrap(), BraidWord::new(n, b).unwrap()))
    })
}

fn factorization(max_factors: usize, max_conj: usize) -> impl Strategy<Value = QuasipositiveFactorization> {
    (2usize..=6).prop_flat_map(move |n| {
        prop::collection::vec((letters(n, max_conj), 1..n), 0..=max_factors).prop_map(move |fs| {
            let factors = fs
                .into_iter()
                .map(|(c, k)| QpFactor {
                    conjugator: BraidWord::new(n, c).unwrap(),
                    k,
                })
                .collect();
            QuasipositiveFactorization::new(n, factors).unwrap()
        })
    })
}

/// Cancels adjacent inverse pairs in an order driven by `picks` until none
/// are left.
fn reduce_in_order(w: &BraidWord, picks: &[usize]) -> Vec<BraidLetter> {
    let mut l = w.letters().to_vec();
    let mut round = 0;
    loop {
        let spots: Vec<usize> = (0..l.len().saturating_sub(1))
            .filter(|&i| l[i].index() == l[i + 1].index() && l[i].sign() == -l[i + 1].sign())
            .collect();
        if spots.is_empty() {
            return l;
        }
        let i = spots[picks.get(round).copied().unwrap_or(0) % spots.len()];
        l.drain(i..i + 2);
        round += 1;
    }
}

/// Number of cycles of the permutation read off strand by strand.
fn components_by_tracing(w: &BraidWord) -> usize {
    let n = w.strands();
    // where the strand starting at position p ends
    let end = |start: usize| {
        w.letters().iter().fold(start, |p, l| {
            let k = l.index();
            if p == k {
                k + 1
            } else if p == k + 1 {
                k
            } else {
                p
            }
        })
    };
    let mut seen = vec![false; n + 1];
    let mut cycles = 0;
    for s in 1..=n {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut p = s;
        while !seen[p] {
            seen[p] = true;
            p = end(p);
        }
    }
    cycles
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn free_reduce_is_idempotent(w in word(40)) {
        let r = w.free_reduce();
        prop_assert_eq!(r.free_reduce(), r.clone());
        prop_assert!(r.letters().windows(2).all(|p| !(p[0].index() == p[1].index() && p[0].sign() == -p[1].sign())));
    }

    #[test]
    fn free_reduce_is_confluent(w in word(40), picks in prop::collection::vec(0usize..64, 40)) {
        prop_assert_eq!(reduce_in_order(&w, &picks), w.free_reduce().letters().to_vec());
    }

    #[test]
    fn free_reduce_keeps_exponent_sum_and_permutation(w in word(40)) {
        let r = w.free_reduce();
        prop_assert_eq!(r.exponent_sum(), w.exponent_sum());
        prop_assert_eq!(r.permutation(), w.permutation());
    }

    #[test]
    fn conjugation_keeps_exponent_sum_and_components((u, w) in word_pair(20)) {
        let c = u.concat(&w).concat(&u.inverse());
        prop_assert_eq!(c.exponent_sum(), w.exponent_sum());
        prop_assert_eq!(c.closure_components(), w.closure_components());
        prop_assert_eq!(w.closure_components(), components_by_tracing(&w));
    }

    #[test]
    fn concatenation_is_a_homomorphism((a, b) in word_pair(20)) {
        let ab = a.concat(&b);
        prop_assert_eq!(ab.exponent_sum(), a.exponent_sum() + b.exponent_sum());
        prop_assert!(ab.concat(&b.inverse()).freely_equal(&a));
    }

    #[test]
    fn expansion_exponent_sum_is_factor_count(q in factorization(6, 6)) {
        prop_assert_eq!(q.expand().exponent_sum(), q.factors().len() as i64);
    }

    #[test]
    fn band_euler_characteristic_is_n_minus_m(q in factorization(6, 6)) {
        prop_assert_eq!(q.band_euler_characteristic(), q.strands() as i64 - q.factors().len() as i64);
    }

    #[test]
    fn short_expansions_parse_as_quasipositive(q in factorization(4, 3)) {
        let w = q.expand();
        prop_assume!(w.len() <= DEFAULT_QP_PARSE_BOUND);
        prop_assert_eq!(w.classify_positivity().syntactically_quasipositive, Tristate::Yes);
    }

    #[test]
    fn json_and_text_round_trip(w in word(30)) {
        let back: BraidWord = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(BraidWord::parse(w.strands(), &w.to_string()).unwrap(), w);
    }
}
