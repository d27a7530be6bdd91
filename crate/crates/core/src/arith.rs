//! Saturating fixed-point operators with probabilistic error injection.
//!
//! A noisy operator is its noiseless counterpart followed by an
//! [`ErrorInjector`]: an error `e` is drawn from the error distribution and
//! merged into the noiseless output `v` by the injection map `ι(v, e)`.
//! The deterministic map ([`ErrorInjector::inject`]) is exposed separately
//! from sampling ([`ErrorInjector::sample_error`]) so that density evolution
//! can build exact transition matrices from the same code path.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

/// Errors raised by the arithmetic layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArithError {
    #[error("bit-width {0} outside the supported range 2..=30")]
    InvalidWidth(u32),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("injection depth {depth} outside 1..={theta}")]
    InvalidDepth { depth: u32, theta: u32 },
    #[error("value {0} is not in the operator alphabet")]
    ValueOutOfRange(i32),
    #[error("error value {0} is not in the error set")]
    NotInErrorSet(i32),
    #[error("cannot fold an empty set of operands")]
    EmptyFold,
}

pub(crate) fn check_probability(p: f64) -> Result<f64, ArithError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(ArithError::InvalidProbability(p))
    }
}

/// Symmetric integer alphabet `{-Θ, …, +Θ}` held on `θ` bits, `Θ = 2^(θ-1) - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    theta: u32,
}

impl Alphabet {
    pub fn new(theta: u32) -> Result<Self, ArithError> {
        if (2..=30).contains(&theta) {
            Ok(Self { theta })
        } else {
            Err(ArithError::InvalidWidth(theta))
        }
    }

    /// Bit-width `θ`.
    pub fn bits(&self) -> u32 {
        self.theta
    }

    /// Saturation bound `Θ`.
    pub fn bound(&self) -> i32 {
        (1i32 << (self.theta - 1)) - 1
    }

    /// Number of values, `2Θ + 1`.
    pub fn size(&self) -> usize {
        2 * self.bound() as usize + 1
    }

    pub fn contains(&self, v: i32) -> bool {
        v.abs() <= self.bound()
    }

    pub fn values(&self) -> impl Iterator<Item = i32> {
        let b = self.bound();
        -b..=b
    }

    pub fn saturate(&self, v: i32) -> i32 {
        saturate(v, self.bound())
    }

    fn mask(&self) -> u32 {
        (1u32 << self.theta) - 1
    }

    fn sign_bit(&self) -> u32 {
        1u32 << (self.theta - 1)
    }
}

/// Clamp `v` into `[-bound, +bound]`.
#[inline]
pub fn saturate(v: i32, bound: i32) -> i32 {
    v.clamp(-bound, bound)
}

/// Binary representation of signed numbers on `θ` bits.
///
/// Each representation has `2^θ` patterns, exactly one of which (`ζ`) does
/// not belong to the symmetric alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SignedRepr {
    SignMagnitude,
    OnesComplement,
    #[default]
    TwosComplement,
}

impl SignedRepr {
    pub const ALL: [SignedRepr; 3] = [
        SignedRepr::SignMagnitude,
        SignedRepr::OnesComplement,
        SignedRepr::TwosComplement,
    ];

    pub fn encode(self, v: i32, alphabet: Alphabet) -> u32 {
        debug_assert!(alphabet.contains(v));
        let mask = alphabet.mask();
        match self {
            SignedRepr::SignMagnitude if v < 0 => alphabet.sign_bit() | v.unsigned_abs(),
            SignedRepr::OnesComplement if v < 0 => !v.unsigned_abs() & mask,
            _ => (v as u32) & mask,
        }
    }

    /// Decode a `θ`-bit pattern. Returns `None` for the excluded pattern `ζ`.
    pub fn decode(self, bits: u32, alphabet: Alphabet) -> Option<i32> {
        let mask = alphabet.mask();
        let sign = alphabet.sign_bit();
        let bits = bits & mask;
        if bits == self.zeta_bits(alphabet) {
            return None;
        }
        let negative = bits & sign != 0;
        Some(match (self, negative) {
            (_, false) => bits as i32,
            (SignedRepr::SignMagnitude, true) => -((bits & !sign) as i32),
            (SignedRepr::OnesComplement, true) => -((!bits & mask) as i32),
            (SignedRepr::TwosComplement, true) => bits as i32 - (1i32 << alphabet.bits()),
        })
    }

    /// The pattern that is representable on `θ` bits but not in the alphabet.
    pub fn zeta_bits(self, alphabet: Alphabet) -> u32 {
        match self {
            SignedRepr::SignMagnitude | SignedRepr::TwosComplement => alphabet.sign_bit(),
            SignedRepr::OnesComplement => alphabet.mask(),
        }
    }
}

impl fmt::Display for SignedRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignedRepr::SignMagnitude => "sign-magnitude",
            SignedRepr::OnesComplement => "ones-complement",
            SignedRepr::TwosComplement => "twos-complement",
        })
    }
}

/// Error-injection model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorModel {
    /// Bitwise XOR with any value of the alphabet; may hit the sign bit.
    FullDepth,
    /// Bitwise XOR restricted to the magnitude bits.
    SignPreserving,
    /// Bitwise XOR on the `depth` least significant bits. `depth = θ` is
    /// full-depth and `depth = θ - 1` is sign-preserving.
    VariableDepth(u32),
    /// Two-valued output `{0, 1}` switched with probability `p0`.
    OutputSwitching,
}

/// Structural symmetry class of an injection model, established by
/// exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `ι(-v, e) = -ι(v, e)` for every `v` and `e`.
    HighlySymmetric,
    /// Only the distributional identity holds.
    Symmetric,
    NotSymmetric,
}

/// An error-injection model `(E, p_E, ι)` on a symmetric alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorInjector {
    model: ErrorModel,
    p0: f64,
    repr: SignedRepr,
    alphabet: Alphabet,
    /// Number of low-order bits that can be corrupted (bitwise models).
    depth: u32,
}

impl ErrorInjector {
    pub fn new(
        model: ErrorModel,
        p0: f64,
        repr: SignedRepr,
        alphabet: Alphabet,
    ) -> Result<Self, ArithError> {
        check_probability(p0)?;
        let theta = alphabet.bits();
        let depth = match model {
            ErrorModel::FullDepth => theta,
            ErrorModel::SignPreserving => theta - 1,
            ErrorModel::VariableDepth(d) if (1..=theta).contains(&d) => d,
            ErrorModel::VariableDepth(d) => return Err(ArithError::InvalidDepth { depth: d, theta }),
            ErrorModel::OutputSwitching => 1,
        };
        let model = match model {
            ErrorModel::VariableDepth(d) if d == theta => ErrorModel::FullDepth,
            ErrorModel::VariableDepth(d) if d == theta - 1 => ErrorModel::SignPreserving,
            m => m,
        };
        Ok(Self { model, p0, repr, alphabet, depth })
    }

    /// Bit-flipping model on `{0, 1}`.
    pub fn output_switching(p0: f64) -> Result<Self, ArithError> {
        // Alphabet width is irrelevant for the two-valued model.
        Self::new(ErrorModel::OutputSwitching, p0, SignedRepr::default(), Alphabet { theta: 2 })
    }

    pub fn model(&self) -> ErrorModel {
        self.model
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn repr(&self) -> SignedRepr {
        self.repr
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn is_full_depth(&self) -> bool {
        self.model == ErrorModel::FullDepth
    }

    /// Values the injection map is defined on.
    pub fn domain(&self) -> Vec<i32> {
        match self.model {
            ErrorModel::OutputSwitching => alloc::vec![0, 1],
            _ => self.alphabet.values().collect(),
        }
    }

    /// Largest error value (bitwise models) or 1 (output switching).
    fn max_error(&self) -> i32 {
        match self.model {
            ErrorModel::OutputSwitching => 1,
            ErrorModel::FullDepth => self.alphabet.bound(),
            _ => (1i32 << self.depth) - 1,
        }
    }

    /// Number of nonzero errors.
    fn nonzero_errors(&self) -> usize {
        if self.is_full_depth() {
            2 * self.alphabet.bound() as usize
        } else {
            self.max_error() as usize
        }
    }

    pub fn error_set(&self) -> Vec<i32> {
        let hi = self.max_error();
        let lo = if self.is_full_depth() { -hi } else { 0 };
        (lo..=hi).collect()
    }

    pub fn contains_error(&self, e: i32) -> bool {
        if self.is_full_depth() {
            e.abs() <= self.max_error()
        } else {
            (0..=self.max_error()).contains(&e)
        }
    }

    /// Error distribution `p_E(e)`.
    pub fn error_prob(&self, e: i32) -> f64 {
        if !self.contains_error(e) {
            0.0
        } else if e == 0 {
            1.0 - self.p0
        } else {
            self.p0 / self.nonzero_errors() as f64
        }
    }

    /// Injection map `ι(v, e)`. `coin` resolves the sign of `ι(0, e) = ±e`
    /// for sign-preserving injection (`true` selects `+e`); other models
    /// ignore it.
    pub fn inject(&self, v: i32, e: i32, coin: bool) -> Result<i32, ArithError> {
        if !self.contains_error(e) {
            return Err(ArithError::NotInErrorSet(e));
        }
        let in_domain = match self.model {
            ErrorModel::OutputSwitching => v == 0 || v == 1,
            _ => self.alphabet.contains(v),
        };
        if !in_domain {
            return Err(ArithError::ValueOutOfRange(v));
        }
        Ok(self.inject_raw(v, e, coin))
    }

    #[inline]
    pub(crate) fn inject_raw(&self, v: i32, e: i32, coin: bool) -> i32 {
        if e == 0 {
            return v;
        }
        match self.model {
            ErrorModel::OutputSwitching => v ^ e,
            ErrorModel::FullDepth => {
                let bits = self.repr.encode(v, self.alphabet) ^ self.repr.encode(e, self.alphabet);
                self.repr.decode(bits, self.alphabet).unwrap_or(e)
            }
            ErrorModel::SignPreserving | ErrorModel::VariableDepth(_) => {
                if v == 0 {
                    return if coin { e } else { -e };
                }
                // e >= 0, so its pattern is the plain binary magnitude.
                let bits = self.repr.encode(v, self.alphabet) ^ e as u32;
                self.repr.decode(bits, self.alphabet).unwrap_or(0)
            }
        }
    }

    /// Draw `e ~ p_E`.
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> i32 {
        if self.p0 == 0.0 || !rng.random_bool(self.p0) {
            return 0;
        }
        self.sample_nonzero_error(rng)
    }

    /// Draw `e ~ p_E` conditioned on `e != 0` (uniform over the nonzero
    /// errors for every model).
    pub fn sample_nonzero_error<R: Rng + ?Sized>(&self, rng: &mut R) -> i32 {
        let k = rng.random_range(0..self.nonzero_errors() as i32);
        if self.is_full_depth() {
            let b = self.alphabet.bound();
            if k < b {
                k - b
            } else {
                k - b + 1
            }
        } else {
            k + 1
        }
    }

    /// Noisy version of the noiseless output `v`: sample an error and inject it.
    #[inline]
    pub fn corrupt<R: Rng + ?Sized>(&self, v: i32, rng: &mut R) -> i32 {
        let e = self.sample_error(rng);
        if e == 0 {
            return v;
        }
        let coin = v == 0 && rng.random::<bool>();
        self.inject_raw(v, e, coin)
    }

    /// Inject a nonzero error drawn from `p_E(· | e != 0)`; the caller has
    /// already decided that a fault happens.
    #[inline]
    pub fn corrupt_forced<R: Rng + ?Sized>(&self, v: i32, rng: &mut R) -> i32 {
        let e = self.sample_nonzero_error(rng);
        let coin = v == 0 && rng.random::<bool>();
        self.inject_raw(v, e, coin)
    }

    /// Row-stochastic matrix `T[v][w] = Pr(ι(v, e) = w)` over [`Self::domain`],
    /// stored row-major.
    pub fn transition_matrix(&self) -> Vec<f64> {
        let domain = self.domain();
        let n = domain.len();
        let offset = domain[0];
        let mut t = alloc::vec![0.0; n * n];
        for (row, &v) in domain.iter().enumerate() {
            for e in self.error_set() {
                let p = self.error_prob(e);
                if p == 0.0 {
                    continue;
                }
                for (coin, weight) in self.coin_outcomes(v, e) {
                    let w = self.inject_raw(v, e, coin);
                    t[row * n + (w - offset) as usize] += p * weight;
                }
            }
        }
        t
    }

    fn coin_outcomes(&self, v: i32, e: i32) -> impl Iterator<Item = (bool, f64)> {
        let uses_coin = v == 0
            && e != 0
            && matches!(self.model, ErrorModel::SignPreserving | ErrorModel::VariableDepth(_));
        let outcomes: [(bool, f64); 2] = if uses_coin {
            [(true, 0.5), (false, 0.5)]
        } else {
            [(true, 1.0), (false, 0.0)]
        };
        outcomes.into_iter().filter(|&(_, w)| w > 0.0)
    }

    fn negate(&self, v: i32) -> i32 {
        match self.model {
            ErrorModel::OutputSwitching => 1 - v,
            _ => -v,
        }
    }

    /// Exhaustively classify the symmetry of the model.
    pub fn symmetry(&self) -> Symmetry {
        let domain = self.domain();
        let n = domain.len();
        let offset = domain[0];
        let t = self.transition_matrix();
        let idx = |v: i32| (v - offset) as usize;
        let distributional = domain.iter().all(|&v| {
            domain.iter().all(|&w| {
                let a = t[idx(v) * n + idx(w)];
                let b = t[idx(self.negate(v)) * n + idx(self.negate(w))];
                (a - b).abs() <= 1e-12
            })
        });
        if !distributional {
            return Symmetry::NotSymmetric;
        }
        // ι(0, e) = ±e is resolved by a fair coin and is symmetric by
        // construction, so pointwise antisymmetry is checked on the other
        // values.
        let pointwise = domain.iter().all(|&v| {
            let coin_based = v == 0 && self.model != ErrorModel::OutputSwitching;
            coin_based
                || self.error_set().into_iter().all(|e| {
                    self.inject_raw(self.negate(v), e, true) == self.negate(self.inject_raw(v, e, true))
                })
        });
        if pointwise {
            Symmetry::HighlySymmetric
        } else {
            Symmetry::Symmetric
        }
    }

    /// Whether `v` and `ι(v, e)` never have strictly opposite signs.
    pub fn is_sign_preserving(&self) -> bool {
        if self.model == ErrorModel::OutputSwitching {
            return false;
        }
        self.alphabet.values().all(|v| {
            self.error_set().into_iter().all(|e| {
                self.coin_outcomes(v, e)
                    .all(|(coin, _)| v as i64 * self.inject_raw(v, e, coin) as i64 >= 0)
            })
        })
    }

    /// `Pr(ι(v, e) ≠ v)` for `v` uniform on the domain and `e ~ p_E`.
    pub fn injection_probability(&self) -> f64 {
        let domain = self.domain();
        let mut total = 0.0;
        for &v in &domain {
            for e in self.error_set() {
                for (coin, weight) in self.coin_outcomes(v, e) {
                    if self.inject_raw(v, e, coin) != v {
                        total += self.error_prob(e) * weight;
                    }
                }
            }
        }
        total / domain.len() as f64
    }
}

/// Bit of a sign, with the usual `0 ↔ +1`, `1 ↔ -1` convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Sign bit of a value. Zero carries the `+` sign bit.
    #[inline]
    pub fn of(v: i32) -> Sign {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_bit(bit: u8) -> Option<Sign> {
        match bit {
            0 => Some(Sign::Plus),
            1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn from_pm1(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn pm1(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    #[inline]
    pub fn xor(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    #[inline]
    pub fn apply(self, magnitude: i32) -> i32 {
        match self {
            Sign::Plus => magnitude,
            Sign::Minus => -magnitude,
        }
    }
}

/// Adder fault model used by the decoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AdderModel {
    FullDepth,
    #[default]
    SignPreserving,
}

impl From<AdderModel> for ErrorModel {
    fn from(m: AdderModel) -> Self {
        match m {
            AdderModel::FullDepth => ErrorModel::FullDepth,
            AdderModel::SignPreserving => ErrorModel::SignPreserving,
        }
    }
}

impl fmt::Display for AdderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdderModel::FullDepth => "full-depth",
            AdderModel::SignPreserving => "sign-preserving",
        })
    }
}

/// Hardware error probabilities of the decoder components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseParams {
    /// Adder error probability.
    pub p_a: f64,
    pub adder: AdderModel,
    /// Comparator (less-than) flip probability.
    pub p_c: f64,
    /// XOR-gate flip probability.
    pub p_x: f64,
    /// Self-correction unit flip probability (SCMS only).
    pub p_scu: f64,
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn adder_only(adder: AdderModel, p_a: f64) -> Self {
        Self { p_a, adder, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ArithError> {
        for p in [self.p_a, self.p_c, self.p_x, self.p_scu] {
            check_probability(p)?;
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_a == 0.0 && self.p_c == 0.0 && self.p_x == 0.0 && self.p_scu == 0.0
    }

    pub fn adder_injector(
        &self,
        alphabet: Alphabet,
        repr: SignedRepr,
    ) -> Result<ErrorInjector, ArithError> {
        ErrorInjector::new(self.adder.into(), self.p_a, repr, alphabet)
    }
}

/// Bernoulli(`p`) fault process driven by geometric gaps.
///
/// `fire` returns `true` on each call independently with probability `p`,
/// but draws a random number only once per fault instead of once per call.
/// Decoders use it for the rare-fault regime where nearly every operation
/// is clean.
#[derive(Debug, Clone)]
pub struct FaultClock {
    p: f64,
    ln_q: f64,
    countdown: u64,
}

impl FaultClock {
    /// Unarmed clock; call [`FaultClock::arm`] before the first `fire`.
    pub fn new(p: f64) -> Self {
        Self { p, ln_q: libm::log1p(-p), countdown: u64::MAX }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn arm<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.countdown = self.gap(rng);
    }

    fn gap<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.p <= 0.0 {
            return u64::MAX;
        }
        if self.p >= 1.0 {
            return 0;
        }
        // Failures before the next success: floor(ln U / ln(1 - p)), U in (0, 1].
        let u = 1.0 - rng.random::<f64>();
        let g = libm::floor(libm::log(u) / self.ln_q);
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }

    #[inline]
    pub fn fire<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.p <= 0.0 {
            return false;
        }
        if self.countdown == 0 {
            self.countdown = self.gap(rng);
            true
        } else {
            self.countdown -= 1;
            false
        }
    }
}

/// `ι(s(x + y), e)`: saturating addition followed by error injection.
#[inline]
pub fn noisy_add<R: Rng + ?Sized>(x: i32, y: i32, adder: &ErrorInjector, rng: &mut R) -> i32 {
    let alphabet = adder.alphabet();
    debug_assert!(alphabet.contains(x) && alphabet.contains(y));
    adder.corrupt(alphabet.saturate(x + y), rng)
}

/// Noisy less-than: the comparison output is flipped with probability `p_c`.
#[inline]
pub fn noisy_lt<R: Rng + ?Sized>(x: i32, y: i32, p_c: f64, rng: &mut R) -> bool {
    let lt = x < y;
    if p_c > 0.0 && rng.random_bool(p_c) {
        !lt
    } else {
        lt
    }
}

/// Noisy minimum: returns `x` when the noisy less-than says `x < y`, `y`
/// otherwise.
#[inline]
pub fn noisy_min<R: Rng + ?Sized>(x: i32, y: i32, p_c: f64, rng: &mut R) -> i32 {
    if noisy_lt(x, y, p_c, rng) {
        x
    } else {
        y
    }
}

/// Noisy XOR of two signs: the product is flipped with probability `p_x`.
#[inline]
pub fn noisy_xor<R: Rng + ?Sized>(s1: Sign, s2: Sign, p_x: f64, rng: &mut R) -> Sign {
    let s = s1.xor(s2);
    if p_x > 0.0 && rng.random_bool(p_x) {
        s.flip()
    } else {
        s
    }
}

/// Flip a binary output with probability `p`.
#[inline]
pub fn noisy_bit<R: Rng + ?Sized>(bit: bool, p: f64, rng: &mut R) -> bool {
    if p > 0.0 && rng.random_bool(p) {
        !bit
    } else {
        bit
    }
}

/// Apply a binary operator to a multiset of operands along a uniformly random
/// permutation. `buf` is shuffled in place. Returns `None` for an empty slice.
#[inline]
pub fn fold_nested_in_place<T, R, F>(buf: &mut [T], rng: &mut R, mut op: F) -> Option<T>
where
    T: Copy,
    R: Rng + ?Sized,
    F: FnMut(T, T, &mut R) -> T,
{
    buf.shuffle(rng);
    let (&first, rest) = buf.split_first()?;
    Some(rest.iter().fold(first, |acc, &x| op(acc, x, rng)))
}

/// Allocation-backed variant of [`fold_nested_in_place`].
pub fn fold_nested<T, R, F>(inputs: &[T], rng: &mut R, op: F) -> Result<T, ArithError>
where
    T: Copy,
    R: Rng + ?Sized,
    F: FnMut(T, T, &mut R) -> T,
{
    let mut buf = inputs.to_vec();
    fold_nested_in_place(&mut buf, rng, op).ok_or(ArithError::EmptyFold)
}
