//! Probability mass functions over symmetric integer alphabets.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// PMF over `{-bound, …, +bound}`; `probs[z + bound] = Pr(Z = z)`.
///
/// Density evolution uses two alphabet sizes: the message alphabet `M`
/// (prior `C`, messages `A` and `B`) and the wider a-posteriori alphabet `M̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    bound: i32,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn zeros(bound: i32) -> Self {
        assert!(bound >= 0);
        Self { bound, probs: vec![0.0; 2 * bound as usize + 1] }
    }

    pub fn point_mass(bound: i32, at: i32) -> Self {
        let mut p = Self::zeros(bound);
        p[at] = 1.0;
        p
    }

    /// Build from a vector indexed from `-bound`.
    pub fn from_vec(probs: Vec<f64>) -> Self {
        assert!(probs.len() % 2 == 1, "PMF support must be symmetric");
        let bound = (probs.len() / 2) as i32;
        Self { bound, probs }
    }

    pub fn bound(&self) -> i32 {
        self.bound
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.probs
    }

    pub fn get(&self, z: i32) -> f64 {
        if z.abs() > self.bound {
            0.0
        } else {
            self.probs[(z + self.bound) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| (i as i32 - self.bound, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.probs.iter().all(|&p| p >= 0.0) && (self.total() - 1.0).abs() <= tol
    }

    /// `Σ_{z<0} P(z) + P(0)/2`: the probability that the sign is wrong under
    /// the all-(+1) codeword with fair tie-breaking at zero.
    pub fn error_probability(&self) -> f64 {
        let b = self.bound as usize;
        self.probs[..b].iter().sum::<f64>() + 0.5 * self.probs[b]
    }

    /// Rescale to unit total mass. Density evolution multiplies total mass
    /// by roughly `(d_c - 1)(d_v - 1)` per iteration, so round-off has to be
    /// removed as it appears.
    pub fn normalize(&mut self) {
        let t = self.total();
        if t > 0.0 && t != 1.0 {
            self.probs.iter_mut().for_each(|p| *p /= t);
        }
    }

    /// Accumulate mass outside `{-bound, …, +bound}` onto the boundary values.
    pub fn saturate_to(&self, bound: i32) -> Pmf {
        let mut out = Pmf::zeros(bound);
        for (z, p) in self.iter() {
            out[z.clamp(-bound, bound)] += p;
        }
        out
    }

    /// Embed into a wider alphabet (zero mass on the new values).
    pub fn widen_to(&self, bound: i32) -> Pmf {
        assert!(bound >= self.bound);
        let mut out = Pmf::zeros(bound);
        for (z, p) in self.iter() {
            out[z] = p;
        }
        out
    }

    /// Distribution of `-Z`.
    pub fn mirrored(&self) -> Pmf {
        let mut probs = self.probs.clone();
        probs.reverse();
        Pmf { bound: self.bound, probs }
    }

    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        let bound = self.bound.max(other.bound);
        (-bound..=bound).map(|z| (self.get(z) - other.get(z)).abs()).fold(0.0, f64::max)
    }

    /// Values with nonzero mass.
    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.iter().filter(|&(_, p)| p != 0.0).map(|(z, _)| z)
    }
}

impl Index<i32> for Pmf {
    type Output = f64;
    fn index(&self, z: i32) -> &f64 {
        &self.probs[(z + self.bound) as usize]
    }
}

impl IndexMut<i32> for Pmf {
    fn index_mut(&mut self, z: i32) -> &mut f64 {
        &mut self.probs[(z + self.bound) as usize]
    }
}
