use noisyms_core::arith::Sign;
use noisyms_core::graph::{
    condition_girth, parse_alist, random_regular_graph, syndrome_ok, to_alist, EnsembleSpec, TannerGraph,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random sparse matrix as check lists (duplicates removed, empty checks
/// allowed).
fn graph_strategy() -> impl Strategy<Value = TannerGraph> {
    (2usize..24, 1usize..12).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::btree_set(0..n, 0..=n.min(6)), m).prop_map(move |rows| {
            TannerGraph::from_check_lists(n, rows.into_iter().map(|r| r.into_iter().collect()).collect()).unwrap()
        })
    })
}

/// `H x^T` over GF(2) on the dense matrix.
fn dense_syndrome_zero(g: &TannerGraph, bits: &[u8]) -> bool {
    g.to_dense().iter().all(|row| row.iter().zip(bits).map(|(&h, &x)| h & x).fold(0, |a, b| a ^ b) == 0)
}

proptest! {
    #[test]
    fn syndrome_matches_dense_gf2((g, bits) in graph_strategy().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), prop::collection::vec(0u8..=1, n))
    })) {
        let signs: Vec<Sign> = bits.iter().map(|&b| Sign::from_bit(b).unwrap()).collect();
        prop_assert_eq!(syndrome_ok(&g, &signs).unwrap(), dense_syndrome_zero(&g, &bits));
    }

    #[test]
    fn codewords_of_the_dense_matrix_pass(g in graph_strategy(), seed in any::<u64>()) {
        // Sum a random subset of null-space vectors found by brute force on
        // small n; every such word must pass.
        prop_assume!(g.n() <= 14);
        let n = g.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<u32> = (0u32..1 << n)
            .filter(|w| dense_syndrome_zero(&g, &(0..n).map(|i| ((w >> i) & 1) as u8).collect::<Vec<_>>()))
            .collect();
        let pick = words[rand::Rng::random_range(&mut rng, 0..words.len())];
        let signs: Vec<Sign> = (0..n).map(|i| Sign::from_bit(((pick >> i) & 1) as u8).unwrap()).collect();
        prop_assert!(syndrome_ok(&g, &signs).unwrap());
    }

    #[test]
    fn alist_round_trip(g in graph_strategy()) {
        prop_assert_eq!(parse_alist(&to_alist(&g)).unwrap(), g);
    }
}

#[test]
fn length_mismatch_is_an_error() {
    let g = TannerGraph::from_check_lists(3, vec![vec![0, 1, 2]]).unwrap();
    assert!(syndrome_ok(&g, &[Sign::Plus; 2]).is_err());
}

#[test]
fn all_plus_word_is_a_codeword() {
    let spec = EnsembleSpec::new(3, 6, 1008).unwrap();
    let g = random_regular_graph(&spec, &mut ChaCha8Rng::seed_from_u64(3), 10).unwrap();
    assert!(syndrome_ok(&g, &vec![Sign::Plus; 1008]).unwrap());
    let mut x = vec![Sign::Plus; 1008];
    x[17] = Sign::Minus;
    assert!(!syndrome_ok(&g, &x).unwrap());
}

#[test]
fn girth_eight_graph_at_full_length() {
    let spec = EnsembleSpec::new(3, 6, 1008).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let g = random_regular_graph(&spec, &mut rng, 10).unwrap();
    let h = condition_girth(&g, 8, &mut rng, 10_000_000).unwrap();
    assert_eq!(h.regular_degrees(), Some((3, 6)));
    assert!(h.girth().unwrap() >= 8);
    assert_eq!(parse_alist(&to_alist(&h)).unwrap(), h);
}
