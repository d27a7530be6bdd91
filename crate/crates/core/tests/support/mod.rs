//! Brute-force references for the density-evolution updates, shared by the
//! oracle tests and the acceptance runner.

use noisyms_core::arith::ErrorInjector;
use noisyms_core::Pmf;

/// Distribution of `x_pr(signs) · m_pr(magnitudes)` folded over `inputs` in
/// the given order, a zero input taking either sign with probability ½.
pub fn cn_brute(a: &Pmf, inputs: usize, p_c: f64, p_x: f64) -> Pmf {
    let q = a.bound();
    let mut out = Pmf::zeros(q);
    // (magnitude, negative, probability)
    let mut states: Vec<(i32, bool, f64)> = Vec::new();
    for (v, p) in a.iter() {
        for (neg, w) in signs_of(v) {
            states.push((v.abs(), neg, p * w));
        }
    }
    for _ in 1..inputs {
        let mut next = Vec::new();
        for &(m, s, p) in &states {
            for (v, pv) in a.iter() {
                for (neg, w) in signs_of(v) {
                    let (lo, hi) = (m.min(v.abs()), m.max(v.abs()));
                    for (mag, pm) in [(lo, 1.0 - p_c), (hi, p_c)] {
                        for (flip, pf) in [(false, 1.0 - p_x), (true, p_x)] {
                            next.push((mag, (s ^ neg) ^ flip, p * pv * w * pm * pf));
                        }
                    }
                }
            }
        }
        states = next;
    }
    for (m, s, p) in states {
        out[if s { -m } else { m }] += p;
    }
    out
}

fn signs_of(v: i32) -> Vec<(bool, f64)> {
    match v.signum() {
        0 => vec![(false, 0.5), (true, 0.5)],
        s => vec![(s < 0, 1.0)],
    }
}

/// `(A, C̃)` by enumerating every prior, every incoming message and every
/// adder error (with its coin) along the chain `γ + β_1 + … + β_dv`.
pub fn vn_brute(b: &Pmf, c: &Pmf, dv: usize, adder: &ErrorInjector) -> (Pmf, Pmf) {
    let qt = adder.alphabet().bound();
    let mut acc = Pmf::zeros(qt);
    for (v, p) in c.iter() {
        acc[v] += p;
    }
    let mut a = None;
    for i in 1..=dv {
        let mut next = Pmf::zeros(qt);
        for (u, pu) in acc.iter() {
            for (w, pw) in b.iter() {
                let sum = (u + w).clamp(-qt, qt);
                for e in adder.error_set() {
                    let pe = adder.error_prob(e);
                    for coin in [false, true] {
                        let out = adder.inject(sum, e, coin).unwrap();
                        next[out] += pu * pw * pe * 0.5;
                    }
                }
            }
        }
        acc = next;
        if i == dv - 1 {
            a = Some(acc.saturate_to(c.bound()));
        }
    }
    (a.unwrap(), acc)
}
