//! Density-evolution updates against exhaustive enumeration of the noisy
//! operators they model.

use noisyms_core::arith::{AdderModel, Alphabet, ErrorInjector, ErrorModel, NoiseParams, SignedRepr};
use noisyms_core::de::{
    cn_update, de_lower_bound, vn_update, DeConfig, DeState, InjectionKernel, InjectionPath, TraceRules,
};
use noisyms_core::{ChannelModel, Pmf};
use proptest::prelude::*;

mod support;
use support::{cn_brute, vn_brute};

/// Random PMF on `{-q..q}` with some exact zeros.
fn pmf_strategy(q: i32) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0], (2 * q + 1) as usize).prop_filter_map(
        "all-zero weights",
        |w| {
            let total: f64 = w.iter().sum();
            (total > 1e-3).then(|| Pmf::from_vec(w.iter().map(|x| x / total).collect()))
        },
    )
}

fn assert_close(x: &Pmf, y: &Pmf, tol: f64) {
    let d = x.max_abs_diff(y);
    assert!(d <= tol, "max |Δ| = {d:e}\n{x:?}\n{y:?}");
}

#[test]
fn cn_update_matches_enumeration() {
    let a = Pmf::from_vec(vec![0.03, 0.05, 0.07, 0.1, 0.2, 0.25, 0.3]);
    for dc in [3, 4] {
        for (p_c, p_x) in [(0.0, 0.0), (0.1, 0.0), (0.0, 0.2), (0.15, 0.05), (1.0, 1.0)] {
            assert_close(&cn_update(&a, dc, p_c, p_x), &cn_brute(&a, dc - 1, p_c, p_x), 1e-12);
        }
    }
}

#[test]
fn vn_update_matches_enumeration() {
    let b = Pmf::from_vec(vec![0.05, 0.05, 0.1, 0.2, 0.25, 0.2, 0.15]);
    let c = Pmf::from_vec(vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.9]);
    let alphabet = Alphabet::new(4).unwrap();
    for dv in [2, 3] {
        for repr in SignedRepr::ALL {
            for model in [ErrorModel::FullDepth, ErrorModel::SignPreserving] {
                for p_a in [0.0, 0.01, 0.3] {
                    let adder = ErrorInjector::new(model, p_a, repr, alphabet).unwrap();
                    let (a_ref, ct_ref) = vn_brute(&b, &c, dv, &adder);
                    for path in [InjectionPath::ClosedForm, InjectionPath::Matrix] {
                        let kernel = InjectionKernel::new(&adder, path);
                        let (a, ct) = vn_update(&b, &c, dv, &kernel, alphabet.bound());
                        assert_close(&a, &a_ref, 1e-12);
                        assert_close(&ct, &ct_ref, 1e-12);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cn_update_matches_enumeration_on_random_inputs(
        a in pmf_strategy(3), dc in 3usize..=4, p_c in 0.0f64..=1.0, p_x in 0.0f64..=1.0,
    ) {
        let got = cn_update(&a, dc, p_c, p_x);
        prop_assert!(got.max_abs_diff(&cn_brute(&a, dc - 1, p_c, p_x)) <= 1e-12);
        prop_assert!(got.is_normalized(1e-12));
    }

    #[test]
    fn vn_update_matches_enumeration_on_random_inputs(
        b in pmf_strategy(3), c in pmf_strategy(3), dv in 2usize..=3, p_a in 0.0f64..=1.0,
        repr in prop::sample::select(SignedRepr::ALL.to_vec()),
        model in prop::sample::select(vec![ErrorModel::FullDepth, ErrorModel::SignPreserving]),
    ) {
        let adder = ErrorInjector::new(model, p_a, repr, Alphabet::new(4).unwrap()).unwrap();
        let (a_ref, ct_ref) = vn_brute(&b, &c, dv, &adder);
        let (a, ct) = vn_update(&b, &c, dv, &InjectionKernel::new(&adder, InjectionPath::ClosedForm), 7);
        prop_assert!(a.max_abs_diff(&a_ref) <= 1e-12);
        prop_assert!(ct.max_abs_diff(&ct_ref) <= 1e-12);
    }

    #[test]
    fn closed_forms_match_matrix_path(
        c in pmf_strategy(15), p_a in 0.0f64..=1.0, theta in 3u32..=6,
        repr in prop::sample::select(SignedRepr::ALL.to_vec()),
        model in prop::sample::select(vec![ErrorModel::FullDepth, ErrorModel::SignPreserving]),
    ) {
        let alphabet = Alphabet::new(theta).unwrap();
        let c = c.saturate_to(alphabet.bound());
        let adder = ErrorInjector::new(model, p_a, repr, alphabet).unwrap();
        let closed = InjectionKernel::new(&adder, InjectionPath::ClosedForm).apply(&c);
        let matrix = InjectionKernel::new(&adder, InjectionPath::Matrix).apply(&c);
        prop_assert!(closed.max_abs_diff(&matrix) <= 1e-13);
    }

    #[test]
    fn de_iterates_stay_normalized_and_above_the_lower_bound(
        eps in 0.001f64..0.2, mu in 1u32..=7, p_a in 0.0f64..0.05, p_c in 0.0f64..0.05, p_x in 0.0f64..0.01,
        sign_preserving in any::<bool>(),
    ) {
        let adder = if sign_preserving { AdderModel::SignPreserving } else { AdderModel::FullDepth };
        let noise = NoiseParams { p_a, adder, p_c, p_x, p_scu: 0.0 };
        let cfg = DeConfig::regular_3_6(ChannelModel::bsc(eps).unwrap(), mu as f64)
            .with_noise(noise)
            .with_rules(TraceRules::sweep().with_max_iters(40));
        let bound = de_lower_bound(&noise, cfg.q_tilde_bound());
        let mut state = DeState::new(&cfg).unwrap();
        for _ in 0..40 {
            let pe = state.step();
            prop_assert!(state.a().is_normalized(1e-12));
            prop_assert!(state.b().is_normalized(1e-12));
            prop_assert!(state.c_tilde().is_normalized(1e-12));
            prop_assert!(pe >= bound * (1.0 - 1e-9), "P_e = {pe:e} below bound {bound:e}");
            prop_assert!((0.0..=1.0).contains(&pe));
        }
    }

    #[test]
    fn check_outputs_reuse_input_magnitudes(a in pmf_strategy(7), dc in 3usize..=8, p_c in 0.0f64..=1.0, p_x in 0.0f64..=1.0) {
        let b = cn_update(&a, dc, p_c, p_x);
        for (z, p) in b.iter() {
            if p > 1e-15 {
                prop_assert!(a.get(z) + a.get(-z) > 0.0, "magnitude {} not among the inputs", z.abs());
            }
        }
    }

    #[test]
    fn a_posteriori_support_is_even_below_saturation(eps in 0.001f64..0.3, mu in prop::sample::select(vec![1u32, 3, 5, 7])) {
        // γ and every A are odd when μ is odd (the bound Q = 7 is odd), so
        // γ + β1 + β2 + β3 is even unless it saturates at ±Q̃.
        let cfg = DeConfig::regular_3_6(ChannelModel::bsc(eps).unwrap(), mu as f64);
        let qt = cfg.q_tilde_bound();
        let mut state = DeState::new(&cfg).unwrap();
        for _ in 0..60 {
            state.step();
            for (z, p) in state.c_tilde().iter() {
                prop_assert!(z % 2 == 0 || z.abs() == qt || p == 0.0, "odd value {z} has mass {p:e}");
            }
        }
    }
}
