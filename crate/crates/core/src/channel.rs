//! Binary-input channels, the scale-factor quantizer and a-priori PMFs.
//!
//! The all-(+1) codeword is assumed throughout: [`prior_pmf`] gives the
//! distribution of the quantized a-priori value `γ = q_μ(y)` when `+1` is
//! sent.

use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arith::{saturate, Alphabet};
use crate::pmf::Pmf;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("crossover probability {0} outside [0, 0.5]")]
    InvalidCrossover(f64),
    #[error("noise variance {0} must be positive and finite")]
    InvalidVariance(f64),
    #[error("scale factor {mu} must be positive and at most {bound}")]
    InvalidScale { mu: f64, bound: i32 },
    #[error("scale factor {0} must be an integer on the BSC")]
    NonIntegerScale(f64),
    #[error("message width {0} outside 2..=30")]
    InvalidWidth(u32),
}

/// Binary-input memoryless channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Bsc { crossover: f64 },
    BiAwgn { variance: f64 },
}

impl ChannelModel {
    pub fn bsc(crossover: f64) -> Result<Self, ChannelError> {
        if (0.0..=0.5).contains(&crossover) {
            Ok(ChannelModel::Bsc { crossover })
        } else {
            Err(ChannelError::InvalidCrossover(crossover))
        }
    }

    pub fn awgn(variance: f64) -> Result<Self, ChannelError> {
        if variance > 0.0 && variance.is_finite() {
            Ok(ChannelModel::BiAwgn { variance })
        } else {
            Err(ChannelError::InvalidVariance(variance))
        }
    }

    /// AWGN channel from `SNR = -10 log10(σ²)`.
    pub fn awgn_snr_db(snr_db: f64) -> Result<Self, ChannelError> {
        Self::awgn(libm::pow(10.0, -snr_db / 10.0))
    }

    pub fn snr_db(&self) -> Option<f64> {
        match *self {
            ChannelModel::BiAwgn { variance } => Some(-10.0 * libm::log10(variance)),
            ChannelModel::Bsc { .. } => None,
        }
    }

    /// Scalar degradation parameter: `ε` for the BSC, `σ²` for BI-AWGN.
    pub fn parameter(&self) -> f64 {
        match *self {
            ChannelModel::Bsc { crossover } => crossover,
            ChannelModel::BiAwgn { variance } => variance,
        }
    }

    /// Transmit `x ∈ {-1, +1}`.
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match *self {
            ChannelModel::Bsc { crossover } => {
                if crossover > 0.0 && rng.random_bool(crossover) {
                    -x
                } else {
                    x
                }
            }
            ChannelModel::BiAwgn { variance } => {
                let z: f64 = StandardNormal.sample(rng);
                x + libm::sqrt(variance) * z
            }
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Bsc { crossover } => write!(f, "bsc(eps={crossover})"),
            ChannelModel::BiAwgn { variance } => write!(f, "awgn(sigma2={variance})"),
        }
    }
}

/// Quantization map `q_μ(y) = s_M([μ·y])` onto the `q`-bit message alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantConfig {
    mu: f64,
    alphabet: Alphabet,
}

impl QuantConfig {
    pub fn new(mu: f64, q: u32) -> Result<Self, ChannelError> {
        let alphabet = Alphabet::new(q).map_err(|_| ChannelError::InvalidWidth(q))?;
        let bound = alphabet.bound();
        if !(mu > 0.0 && mu <= bound as f64) {
            return Err(ChannelError::InvalidScale { mu, bound });
        }
        Ok(Self { mu, alphabet })
    }

    /// Check the BSC's integer-scale requirement.
    pub fn check_for(&self, channel: &ChannelModel) -> Result<(), ChannelError> {
        if matches!(channel, ChannelModel::Bsc { .. }) && libm::trunc(self.mu) != self.mu {
            return Err(ChannelError::NonIntegerScale(self.mu));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Message bound `Q`.
    pub fn bound(&self) -> i32 {
        self.alphabet.bound()
    }

    /// Nearest integer to `μ·y` (ties away from zero), saturated to `M`.
    #[inline]
    pub fn quantize(&self, y: f64) -> i32 {
        let bound = self.bound();
        let r = libm::round(self.mu * y).clamp(-(bound as f64), bound as f64);
        saturate(r as i32, bound)
    }
}

/// Standard normal tail `q(x) = Pr(N(0,1) > x)`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Exact PMF `C` of the quantized a-priori value under the all-(+1) codeword.
pub fn prior_pmf(channel: &ChannelModel, cfg: &QuantConfig) -> Pmf {
    let bound = cfg.bound();
    match *channel {
        ChannelModel::Bsc { crossover } => {
            let level = cfg.quantize(1.0);
            let mut c = Pmf::zeros(bound);
            c[level] += 1.0 - crossover;
            c[-level] += crossover;
            c
        }
        ChannelModel::BiAwgn { variance } => {
            let mu = cfg.mu();
            let scale = mu * libm::sqrt(variance);
            let tail = |edge: f64| gaussian_tail((edge - mu) / scale);
            let mut c = Pmf::zeros(bound);
            for z in -bound..=bound {
                let z_f = z as f64;
                let upper = if z == bound { 0.0 } else { tail(z_f + 0.5) };
                let lower = if z == -bound { 1.0 } else { tail(z_f - 0.5) };
                c[z] = lower - upper;
            }
            c
        }
    }
}

/// Input error probability `P_e^(0) = Σ_{z<0} C(z) + C(0)/2`.
pub fn input_error_prob(prior: &Pmf) -> f64 {
    prior.error_probability()
}

/// Closed form of the AWGN input error probability,
/// `1 - ½[q((-0.5-μ)/(μσ)) + q((0.5-μ)/(μσ))]`.
pub fn awgn_input_error_prob(variance: f64, mu: f64) -> f64 {
    let scale = mu * libm::sqrt(variance);
    1.0 - 0.5 * (gaussian_tail((-0.5 - mu) / scale) + gaussian_tail((0.5 - mu) / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::SeedableRng;

    #[test]
    fn quantizer_examples() {
        let bsc = QuantConfig::new(6.0, 4).unwrap();
        assert_eq!(bsc.quantize(-1.0), -6);
        let awgn = QuantConfig::new(5.5, 4).unwrap();
        assert_eq!(awgn.quantize(2.0), 7);
        assert_eq!(awgn.quantize(0.1), 1);
        // Ties round away from zero, symmetrically.
        assert_eq!(awgn.quantize(0.5 / 5.5 * 1.0000000001), 1);
        assert_eq!(QuantConfig::new(1.0, 4).unwrap().quantize(2.5), 3);
        assert_eq!(QuantConfig::new(1.0, 4).unwrap().quantize(-2.5), -3);
    }

    #[test]
    fn quantizer_rejects_bad_scale() {
        assert!(matches!(QuantConfig::new(8.0, 4), Err(ChannelError::InvalidScale { .. })));
        assert!(matches!(QuantConfig::new(0.0, 4), Err(ChannelError::InvalidScale { .. })));
        let cfg = QuantConfig::new(5.5, 4).unwrap();
        assert_eq!(
            cfg.check_for(&ChannelModel::bsc(0.1).unwrap()),
            Err(ChannelError::NonIntegerScale(5.5))
        );
        assert!(cfg.check_for(&ChannelModel::awgn(0.5).unwrap()).is_ok());
    }

    #[test]
    fn channel_constructors_validate() {
        assert!(ChannelModel::bsc(0.6).is_err());
        assert!(ChannelModel::awgn(0.0).is_err());
        let ch = ChannelModel::awgn_snr_db(3.0).unwrap();
        assert!((ch.snr_db().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bsc_prior() {
        let c = prior_pmf(&ChannelModel::bsc(0.06).unwrap(), &QuantConfig::new(1.0, 4).unwrap());
        assert_eq!(c[-1], 0.06);
        assert_eq!(c[1], 0.94);
        assert_eq!(c.support().count(), 2);
        assert_eq!(input_error_prob(&c), 0.06);
    }

    #[test]
    fn awgn_prior_concentrates_for_vanishing_noise() {
        let c = prior_pmf(&ChannelModel::awgn(1e-8).unwrap(), &QuantConfig::new(5.0, 4).unwrap());
        assert!((c[5] - 1.0).abs() < 1e-12);
        // μ = 5.5 puts y = 1 on a rounding boundary: the mass splits.
        let c = prior_pmf(&ChannelModel::awgn(1e-8).unwrap(), &QuantConfig::new(5.5, 4).unwrap());
        assert!((c[5] - 0.5).abs() < 1e-9 && (c[6] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn symmetric_pmf_has_half_error() {
        let c = Pmf::from_vec(alloc::vec![0.2, 0.1, 0.4, 0.1, 0.2]);
        assert!((input_error_prob(&c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bsc_without_crossover_is_transparent() {
        let mut rng = SmallRng::seed_from_u64(9);
        let ch = ChannelModel::bsc(0.0).unwrap();
        assert!((0..1000).all(|_| ch.sample(1.0, &mut rng) == 1.0));
    }
}
