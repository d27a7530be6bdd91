//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). By default it reports and
//! exits 0 so that known deviations do not mask the rest of the suite; pass
//! `--strict` to turn any FAIL into a nonzero exit:
//!
//! ```text
//! cargo test -p noisyms --test acceptance -- --strict
//! ```

use std::time::Instant;

use noisyms::graphio;
use noisyms::runner::{point_seed, simulate_point};
use noisyms_core::arith::{AdderModel, Alphabet, ErrorInjector, ErrorModel, NoiseParams, SignedRepr, Symmetry};
use noisyms_core::de::{cn_update, de_lower_bound, de_run, vn_update, InjectionKernel, InjectionPath, TraceRules};
use noisyms_core::decoder::Variant;
use noisyms_core::threshold::{classical_threshold, eta_threshold, functional_threshold, FunctionalOptions, Search};
use noisyms_core::{ChannelModel, DeConfig, DecoderConfig, Pmf, StopRule, TannerGraph, TraceClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "../../core/tests/support/mod.rs"]
mod support;

type Outcome = (bool, String);

fn bsc(p0: f64) -> ChannelModel {
    ChannelModel::bsc(p0).unwrap()
}

fn de(mu: f64, p0: f64, noise: NoiseParams) -> DeConfig {
    DeConfig::regular_3_6(bsc(p0), mu).with_noise(noise).with_rules(TraceRules::threshold_grade())
}

fn limit(cfg: &DeConfig) -> Option<f64> {
    de_run(cfg).unwrap().limit()
}

fn rel(x: f64, target: f64) -> f64 {
    (x / target - 1.0).abs()
}

fn noiseless_threshold() -> Outcome {
    let r = classical_threshold(&de(1.0, 0.0, NoiseParams::noiseless()), &Search::bsc()).unwrap();
    ((r.value - 0.039).abs() <= 0.001, format!("classical threshold {:.4} (target 0.039 ± 0.001)", r.value))
}

fn noiseless_fixed_point() -> Outcome {
    match limit(&de(1.0, 0.06, NoiseParams::noiseless())) {
        Some(l) => ((l - 0.323).abs() <= 0.005, format!("P_e^∞ = {l:.4} (target 0.323 ± 0.005)")),
        None => (false, "trace did not converge".into()),
    }
}

fn table_entries() -> Outcome {
    let cases = [
        (AdderModel::FullDepth, [1e-30, 1e-15, 1e-5], [8.5e-31, 8.5e-16, 8.507e-6], 0.5 + 1.0 / 60.0),
        (AdderModel::SignPreserving, [1e-30, 1e-15, 1e-5], [3.333e-32, 3.333e-17, 3.333e-7], 1.0 / 30.0),
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (adder, pas, targets, bound_factor) in cases {
        for (pa, target) in pas.into_iter().zip(targets) {
            let noise = NoiseParams::adder_only(adder, pa);
            let bound = de_lower_bound(&noise, 15);
            ok &= rel(bound, bound_factor * pa) < 1e-12;
            match limit(&de(1.0, 0.06, noise)) {
                Some(l) => {
                    worst = worst.max(rel(l, target));
                    ok &= rel(l, target) <= 0.01 && l >= bound * (1.0 - 1e-9);
                }
                None => ok = false,
            }
        }
    }
    (ok, format!("six entries, worst relative error {:.2}% (tolerance 1%), lower bounds exact", 100.0 * worst))
}

fn point_behaviour() -> Outcome {
    let run = |pa: f64| de_run(&de(1.0, 0.03, NoiseParams::adder_only(AdderModel::SignPreserving, pa))).unwrap();
    let describe = |c: TraceClass| match c {
        TraceClass::Converged { limit } => format!("converged {limit:.4e}"),
        TraceClass::Periodic { .. } => "periodic".to_string(),
        TraceClass::MaxedOut => "maxed-out".to_string(),
    };
    let (a, b, c, d) = (run(0.027), run(0.030), run(0.039), run(0.042));
    let near = |t: &noisyms_core::DeTrace, target: f64| t.limit().is_some_and(|l| rel(l, target) <= 0.02);
    let ok = near(&a, 9.11e-4) && b.is_periodic() && c.is_periodic() && near(&d, 0.0605);
    let detail = format!(
        "p_a=0.027: {}; 0.030: {}; 0.039: {}; 0.042: {}",
        describe(a.class),
        describe(b.class),
        describe(c.class),
        describe(d.class)
    );
    (ok, detail)
}

fn scale_sweep() -> Outcome {
    let search = Search::bsc();
    let eta = |mu: f64, noise: NoiseParams| eta_threshold(&de(mu, 0.0, noise), &search, 1e-5).unwrap().value;
    let clean: Vec<f64> = (1..=7).map(|mu| eta(mu as f64, NoiseParams::noiseless())).collect();
    let best = (0..7).max_by(|&i, &j| clean[i].total_cmp(&clean[j])).unwrap() + 1;
    let mut ok = best == 6;
    let mut noisy = Vec::new();
    for mu in [1usize, 3, 5] {
        for noise in
            [NoiseParams::adder_only(AdderModel::SignPreserving, 1e-4), NoiseParams::adder_only(AdderModel::FullDepth, 1e-5)]
        {
            let v = eta(mu as f64, noise);
            ok &= v > clean[mu - 1];
            noisy.push(format!("{v:.4}"));
        }
    }
    let clean: Vec<String> = clean.iter().map(|v| format!("{v:.4}")).collect();
    (ok, format!("best noiseless μ={best}; noiseless {clean:?}; noisy μ=1,3,5 {noisy:?}"))
}

/// Range of `P_e^∞ / (factor · p_a)` over points of the functional region.
fn functional_law(adder: AdderModel, pas: &[f64], factor: f64) -> (f64, f64, Vec<String>) {
    let search = Search::bsc();
    let (mut all_lo, mut all_hi) = (f64::INFINITY, 0.0f64);
    let mut notes = Vec::new();
    for &pa in pas {
        let noise = NoiseParams::adder_only(adder, pa);
        let ft = functional_threshold(&de(6.0, 0.0, noise), &search, &FunctionalOptions::default()).unwrap().value;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for p0 in (1..=7).map(|k| 0.01 * k as f64).filter(|&p0| p0 < ft) {
            let ratio = limit(&de(6.0, p0, noise)).map_or(f64::INFINITY, |l| l / (factor * pa));
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        all_lo = all_lo.min(lo);
        all_hi = all_hi.max(hi);
        notes.push(format!("p_a={pa:e}: ratio {lo:.3}..{hi:.3} below {ft:.4}"));
    }
    (all_lo, all_hi, notes)
}

fn worst_deviation(lo: f64, hi: f64) -> f64 {
    (1.0 - lo).abs().max((hi - 1.0).abs())
}

fn functional_law_sign_preserving() -> Outcome {
    let (lo, hi, notes) = functional_law(AdderModel::SignPreserving, &[1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2], 1.0 / 30.0);
    let worst = worst_deviation(lo, hi);
    (worst <= 0.05, format!("P_e^∞/(p_a/30) off by up to {:.1}% (tolerance 5%); {}", 100.0 * worst, notes.join("; ")))
}

fn functional_law_full_depth() -> Outcome {
    let (lo, hi, notes) = functional_law(AdderModel::FullDepth, &[1e-6, 1e-5, 1e-4, 1e-3], 1.17);
    let worst = worst_deviation(lo, hi);
    (
        worst <= 0.10,
        format!(
            "P_e^∞/(1.17·p_a) off by up to {:.1}% (tolerance 10%), measured P_e^∞/p_a {:.3}..{:.3}; {}",
            100.0 * worst,
            1.17 * lo,
            1.17 * hi,
            notes.join("; ")
        ),
    )
}

fn comparator_only() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for p_c in [0.005, 0.05, 0.2] {
        for p0 in [0.005, 0.01, 0.02, 0.03, 0.035, 0.038] {
            let noise = NoiseParams { p_c, ..NoiseParams::noiseless() };
            match limit(&de(6.0, p0, noise)) {
                Some(l) => {
                    worst = worst.max(l);
                    ok &= l < 1e-300;
                }
                None => ok = false,
            }
        }
    }
    (ok, format!("largest P_e^∞ {worst:e} over p_c ∈ {{0.005, 0.05, 0.2}}, p0 ≤ 0.038"))
}

fn random_pmf(rng: &mut ChaCha8Rng, q: i32) -> Pmf {
    let w: Vec<f64> = (0..2 * q + 1).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
    let total: f64 = w.iter().sum::<f64>().max(1e-300);
    Pmf::from_vec(w.iter().map(|x| x / total).collect())
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let models = [ErrorModel::FullDepth, ErrorModel::SignPreserving];
    let (mut cn, mut vn, mut kernel): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..64 {
        let a = random_pmf(&mut rng, 3);
        let (p_c, p_x) = (rng.random::<f64>(), rng.random::<f64>());
        for dc in [3, 4] {
            cn = cn.max(cn_update(&a, dc, p_c, p_x).max_abs_diff(&support::cn_brute(&a, dc - 1, p_c, p_x)));
        }
        let (b, c) = (random_pmf(&mut rng, 3), random_pmf(&mut rng, 3));
        let p_a = rng.random::<f64>();
        for repr in SignedRepr::ALL {
            for model in models {
                let adder = ErrorInjector::new(model, p_a, repr, Alphabet::new(4).unwrap()).unwrap();
                for dv in [2, 3] {
                    let (a_ref, ct_ref) = support::vn_brute(&b, &c, dv, &adder);
                    let (a, ct) = vn_update(&b, &c, dv, &InjectionKernel::new(&adder, InjectionPath::ClosedForm), 7);
                    vn = vn.max(a.max_abs_diff(&a_ref)).max(ct.max_abs_diff(&ct_ref));
                }
                for theta in 3..=6 {
                    let alphabet = Alphabet::new(theta).unwrap();
                    let adder = ErrorInjector::new(model, p_a, repr, alphabet).unwrap();
                    let c = random_pmf(&mut rng, alphabet.bound());
                    let closed = InjectionKernel::new(&adder, InjectionPath::ClosedForm).apply(&c);
                    let matrix = InjectionKernel::new(&adder, InjectionPath::Matrix).apply(&c);
                    kernel = kernel.max(closed.max_abs_diff(&matrix));
                }
            }
        }
    }
    let symmetric = arithmetic_symmetry();
    let ok = cn <= 1e-12 && vn <= 1e-12 && kernel <= 1e-13 && symmetric;
    (
        ok,
        format!(
            "check node {cn:.1e}, variable node {vn:.1e} (≤ 1e-12); closed form vs matrix {kernel:.1e} (≤ 1e-13); \
             symmetry and sign preservation for θ ≤ 6: {}",
            if symmetric { "ok" } else { "violated" }
        ),
    )
}

/// Distributional symmetry of every adder model and representation and sign
/// preservation of the sign-preserving model, by enumeration.
fn arithmetic_symmetry() -> bool {
    for theta in 2..=6 {
        let alphabet = Alphabet::new(theta).unwrap();
        let b = alphabet.bound();
        let n = (2 * b + 1) as usize;
        for repr in SignedRepr::ALL {
            for model in [ErrorModel::FullDepth, ErrorModel::SignPreserving] {
                let inj = ErrorInjector::new(model, 0.2, repr, alphabet).unwrap();
                if inj.symmetry() == Symmetry::NotSymmetric {
                    return false;
                }
                let mut t = vec![0.0; n * n];
                for v in -b..=b {
                    for e in inj.error_set() {
                        for coin in [false, true] {
                            let w = inj.inject(v, e, coin).unwrap();
                            if !alphabet.contains(w) || (model == ErrorModel::SignPreserving && v * w < 0) {
                                return false;
                            }
                            t[(v + b) as usize * n + (w + b) as usize] += 0.5 * inj.error_prob(e);
                        }
                    }
                }
                for v in -b..=b {
                    for w in -b..=b {
                        let x = t[(v + b) as usize * n + (w + b) as usize];
                        let y = t[(-v + b) as usize * n + (-w + b) as usize];
                        if (x - y).abs() > 1e-15 {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

fn graph() -> TannerGraph {
    graphio::generate(3, 6, 1008, Some(8), 1008, 100, 10_000_000).unwrap()
}

fn decoder(variant: Variant, noise: NoiseParams, early_stopping: bool) -> DecoderConfig {
    DecoderConfig { variant, mu: 6.0, noise, early_stopping, ..DecoderConfig::default() }
}

fn finite_length_floor(g: &TannerGraph) -> Outcome {
    let noise = NoiseParams::adder_only(AdderModel::SignPreserving, 1e-3);
    let floor = simulate_point(g, decoder(Variant::MsPractical, noise, false), &bsc(0.01), StopRule::Frames(5000), 91)
        .unwrap();
    let es = simulate_point(g, decoder(Variant::MsPractical, noise, true), &bsc(0.04), StopRule::Frames(100_000), 92)
        .unwrap();
    let floor_ok = rel(floor.ber(), 1e-3 / 30.0) <= 0.20;
    let es_ok = es.ber() <= 1e-6 && (es.avg_iters() - 8.0).abs() <= 2.0;
    (
        floor_ok && es_ok,
        format!(
            "early stopping off, p0=0.01: BER {:.3e} (target 3.33e-5 ± 20%, {} frames); \
             on, p0=0.04: BER {:.3e} (target ≤ 1e-6), avg iters {:.2} (target 8 ± 2), {} frames",
            floor.ber(),
            floor.frames,
            es.ber(),
            es.avg_iters(),
            es.frames
        ),
    )
}

fn scms_robustness(g: &TannerGraph) -> Outcome {
    let p1 = NoiseParams { p_a: 0.01, adder: AdderModel::SignPreserving, p_c: 0.01, p_x: 0.001, p_scu: 0.001 };
    let rule = StopRule::FrameErrors { target: 100, max_frames: 4000 };
    let mut qualifying = 0;
    let mut ok = true;
    let mut notes = Vec::new();
    for (k, p0) in [0.05, 0.055, 0.06].into_iter().enumerate() {
        let ber = |cfg: DecoderConfig| simulate_point(g, cfg, &bsc(p0), rule, point_seed(10, k)).unwrap().ber();
        let clean = ber(decoder(Variant::MsPractical, NoiseParams::noiseless(), true));
        let ms = ber(decoder(Variant::MsPractical, p1, true));
        let scms = ber(decoder(Variant::Scms, p1, true));
        if ms >= 10.0 * clean {
            qualifying += 1;
            ok &= scms <= 10.0 * clean;
        }
        notes.push(format!("p0={p0}: noiseless {clean:.2e}, noisy MS {ms:.2e}, noisy SCMS {scms:.2e}"));
    }
    (ok && qualifying > 0, format!("{qualifying} qualifying points; {}", notes.join("; ")))
}

fn main() {
    let strict = std::env::args().any(|a| a == "--strict");
    let started = Instant::now();
    let mut failed = Vec::new();
    let mut report = |id: &str, name: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let (ok, detail) = f();
        println!(
            "{} [{id}] {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(id.to_string());
        }
    };
    report("1", "noiseless threshold", &noiseless_threshold);
    report("2", "noiseless fixed point", &noiseless_fixed_point);
    report("3", "adder error table", &table_entries);
    report("4", "point behaviour at p0=0.03", &point_behaviour);
    report("5", "channel-scale sweep", &scale_sweep);
    report("6a", "functional-region law, sign-preserving adder", &functional_law_sign_preserving);
    report("6b", "functional-region law, full-depth adder", &functional_law_full_depth);
    report("7", "comparator-only noise", &comparator_only);
    report("8", "oracle equivalence", &oracles);
    let g = graph();
    report("9", "finite-length floor", &|| finite_length_floor(&g));
    report("10", "SCMS robustness", &|| scms_robustness(&g));
    println!(
        "acceptance: {} failed {:?} ({:.0}s){}",
        failed.len(),
        failed,
        started.elapsed().as_secs_f64(),
        if strict { "" } else { "; report mode, pass --strict to fail on these" }
    );
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
