use crate::error::{CrnError, Result};
use crate::scalar::Real;

/// Rectangular set of pure states `0 <= n_i <= cap_i`.
///
/// Flat indices are row-major in species order: the last species varies
/// fastest and the zero state has index 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncationBox {
    caps: Vec<u64>,
    strides: Vec<usize>,
    len: usize,
}

/// Largest box the crate will enumerate.
pub const MAX_STATES: usize = 1 << 26;

/// States up to which dense matrices are materialised.
pub const DENSE_LIMIT: usize = 4096;

impl TruncationBox {
    pub fn new(caps: Vec<u64>) -> Result<Self> {
        if let Some(i) = caps.iter().position(|&c| c == 0) {
            return Err(CrnError::InvalidArgument(format!("cap for species {i} must be at least 1")));
        }
        let mut strides = vec![0; caps.len()];
        let mut len: usize = 1;
        for i in (0..caps.len()).rev() {
            strides[i] = len;
            len = usize::try_from(caps[i] + 1)
                .ok()
                .and_then(|w| len.checked_mul(w))
                .filter(|&l| l <= MAX_STATES)
                .ok_or_else(|| CrnError::InvalidArgument(format!("truncation box {caps:?} is too large")))?;
        }
        Ok(TruncationBox { caps, strides, len })
    }

    /// `cap_i = max(8, ceil(c_i + 10 sqrt(c_i)) + margin)`.
    pub fn auto<T: Real>(c: &[T], margin: u64) -> Result<Self> {
        Self::new(c.iter().map(|&ci| sigma_cap(ci, T::lit(10.0), margin).max(8)).collect())
    }

    /// `cap_i = max(1, ceil(c_i + nsigma sqrt(c_i)) + margin)`.
    pub fn around_mean<T: Real>(c: &[T], nsigma: T, margin: u64) -> Result<Self> {
        Self::new(c.iter().map(|&ci| sigma_cap(ci, nsigma, margin).max(1)).collect())
    }

    pub fn caps(&self) -> &[u64] {
        &self.caps
    }

    pub fn num_species(&self) -> usize {
        self.caps.len()
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, n: &[u64]) -> bool {
        n.len() == self.caps.len() && n.iter().zip(&self.caps).all(|(a, c)| a <= c)
    }

    pub fn index(&self, n: &[u64]) -> Option<usize> {
        self.contains(n).then(|| n.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum())
    }

    /// Inverse of [`index`](Self::index).
    pub fn state(&self, mut idx: usize) -> Vec<u64> {
        debug_assert!(idx < self.len);
        self.strides
            .iter()
            .map(|&s| {
                let q = idx / s;
                idx %= s;
                q as u64
            })
            .collect()
    }

    pub fn states(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.len).map(|i| self.state(i))
    }

    /// Index of `n + delta` when it lies inside the box.
    pub fn shifted(&self, n: &[u64], delta: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for ((&a, &d), (&cap, &s)) in n.iter().zip(delta).zip(self.caps.iter().zip(&self.strides)) {
            let m = a as i64 + d;
            if m < 0 || m as u64 > cap {
                return None;
            }
            idx += m as usize * s;
        }
        Some(idx)
    }

    /// True when every species is at least `margin` below its cap.
    pub fn is_interior(&self, n: &[u64], margin: u64) -> bool {
        n.iter().zip(&self.caps).all(|(&a, &c)| a + margin <= c)
    }
}

fn sigma_cap<T: Real>(c: T, nsigma: T, margin: u64) -> u64 {
    let c = c.max(T::zero());
    (c + nsigma * c.sqrt()).ceil().to_u64().unwrap_or(u64::MAX / 2) + margin
}
