use std::fmt::Write as _;

use crate::error::{CrnError, Result};
use crate::fock::space::TruncationBox;
use crate::scalar::{ln_factorials, Real};
use crate::structure::ConservedVector;

/// Probability weights `psi_n` over the states of a box.
///
/// Weights may sum to less than one: mass outside the box is simply absent.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState<T> {
    space: TruncationBox,
    weights: Vec<T>,
}

impl<T: Real> MixedState<T> {
    pub fn new(space: TruncationBox, weights: Vec<T>) -> Result<Self> {
        crate::error::check_dim(space.len(), weights.len())?;
        if weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(CrnError::InvalidArgument("weights must be nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if total > T::one() + T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) {
            return Err(CrnError::InvalidArgument(format!("weights sum to {total} > 1")));
        }
        Ok(MixedState { space, weights })
    }

    pub(crate) fn from_raw(space: TruncationBox, weights: Vec<T>) -> Self {
        MixedState { space, weights }
    }

    /// The pure state `z^n`.
    pub fn pure(space: TruncationBox, n: &[u64]) -> Result<Self> {
        let idx = space
            .index(n)
            .ok_or_else(|| CrnError::InvalidArgument(format!("state {n:?} is outside the box {:?}", space.caps())))?;
        let mut weights = vec![T::zero(); space.len()];
        weights[idx] = T::one();
        Ok(MixedState { space, weights })
    }

    pub fn space(&self) -> &TruncationBox {
        &self.space
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, n: &[u64]) -> T {
        self.space.index(n).map_or(T::zero(), |i| self.weights[i])
    }

    pub fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Probability mass in each sector `w · n = lambda`.
    pub fn sector_masses(&self, w: &ConservedVector) -> std::collections::BTreeMap<i64, T> {
        let mut out = std::collections::BTreeMap::new();
        for (n, &p) in self.space.states().zip(&self.weights) {
            *out.entry(w.eval(&n)).or_insert_with(T::zero) += p;
        }
        out
    }

    /// Expected count of each species.
    pub fn means(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.space.num_species()];
        for (n, &p) in self.space.states().zip(&self.weights) {
            for (mi, &ni) in m.iter_mut().zip(&n) {
                *mi += p * T::from_count(ni);
            }
        }
        m
    }

    /// Conditions on `w · n = lambda`: zero elsewhere, renormalised to one.
    pub fn project_onto(&self, w: &ConservedVector, lambda: i64) -> Result<Self> {
        crate::error::check_dim(self.space.num_species(), w.0.len())?;
        let weights: Vec<T> = self
            .space
            .states()
            .zip(&self.weights)
            .map(|(n, &p)| if w.eval(&n) == lambda { p } else { T::zero() })
            .collect();
        let mass: T = weights.iter().copied().sum();
        if !(mass > T::zero()) {
            return Err(CrnError::EmptySector { lambda });
        }
        Ok(MixedState { space: self.space.clone(), weights: weights.into_iter().map(|p| p / mass).collect() })
    }

    /// Copy scaled to total mass one.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(CrnError::InvalidArgument(format!("cannot normalise a state of mass {total}")));
        }
        Ok(MixedState { space: self.space.clone(), weights: self.weights.iter().map(|&p| p / total).collect() })
    }

    /// CSV `<species...>,probability`, rows with weight above `1e-15`.
    pub fn to_csv(&self, species: &[String]) -> String {
        let mut out = species.join(",");
        if !species.is_empty() {
            out.push(',');
        }
        out.push_str("probability\n");
        for (n, &p) in self.space.states().zip(&self.weights) {
            if p > T::lit(1e-15) {
                for c in &n {
                    let _ = write!(out, "{c},");
                }
                let _ = writeln!(out, "{p}");
            }
        }
        out
    }
}

/// Product-Poisson weights `prod_i e^{-c_i} c_i^{n_i} / n_i!`, not renormalised.
/// Returns the state and the tail mass `1 - sum(weights)` lost to truncation.
pub fn coherent_state<T: Real>(c: &[T], space: &TruncationBox) -> Result<(MixedState<T>, T)> {
    crate::error::check_dim(space.num_species(), c.len())?;
    if let Some((i, &v)) = c.iter().enumerate().find(|(_, v)| !(**v >= T::zero()) || !v.is_finite()) {
        return Err(CrnError::NegativeMean { species: i, value: v.as_f64() });
    }
    let max_cap = space.caps().iter().copied().max().unwrap_or(0);
    let lnfact = ln_factorials::<T>(max_cap);
    // per-species log pmf tables
    let tables: Vec<Vec<T>> = c
        .iter()
        .zip(space.caps())
        .map(|(&ci, &cap)| {
            (0..=cap)
                .map(|n| {
                    if ci == T::zero() {
                        if n == 0 {
                            T::zero()
                        } else {
                            T::neg_infinity()
                        }
                    } else {
                        T::from_count(n) * ci.ln() - ci - lnfact[n as usize]
                    }
                })
                .collect()
        })
        .collect();
    let weights: Vec<T> = space
        .states()
        .map(|n| {
            let lp: T = n.iter().zip(&tables).map(|(&ni, t)| t[ni as usize]).sum();
            lp.exp()
        })
        .collect();
    let tail = T::one() - weights.iter().copied().sum::<T>();
    Ok((MixedState::from_raw(space.clone(), weights), tail))
}

/// Applies `exp(s O)` with `O = sum_i w_i N_i` to the coherent state with mean
/// `c`, renormalises, and returns it with the predicted mean `c_i e^{s w_i}`.
pub fn apply_symmetry<T: Real>(
    c: &[T],
    w: &ConservedVector,
    s: T,
    space: &TruncationBox,
) -> Result<(MixedState<T>, Vec<T>)> {
    crate::error::check_dim(space.num_species(), w.0.len())?;
    let (psi, _) = coherent_state(c, space)?;
    let reach: T =
        w.0.iter().zip(space.caps()).map(|(&wi, &cap)| T::lit(wi.unsigned_abs() as f64) * T::from_count(cap)).sum();
    let exponent = T::max_value().ln();
    if s.abs() * reach > exponent {
        return Err(CrnError::Overflow { s: s.as_f64(), exponent: exponent.as_f64() });
    }
    let weights: Vec<T> =
        space.states().zip(psi.weights()).map(|(n, &p)| p * (s * T::lit(w.eval(&n) as f64)).exp()).collect();
    let state = MixedState::from_raw(space.clone(), weights).normalized()?;
    let predicted = c.iter().zip(&w.0).map(|(&ci, &wi)| ci * (s * T::lit(wi as f64)).exp()).collect();
    Ok((state, predicted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(c: f64, n: u64) -> f64 {
        // independent oracle: direct product, fine for the small n used here
        let mut p = (-c).exp();
        for j in 1..=n {
            p *= c / j as f64;
        }
        p
    }

    #[test]
    fn zero_mean_is_point_mass() {
        let b = TruncationBox::new(vec![5, 5]).unwrap();
        let (psi, tail) = coherent_state(&[0.0_f64, 0.0], &b).unwrap();
        assert_eq!(psi.weight(&[0, 0]), 1.0);
        assert_eq!(psi.total(), 1.0);
        assert_eq!(tail, 0.0);
    }

    #[test]
    fn poisson_weight_at_two() {
        let b = TruncationBox::new(vec![10]).unwrap();
        let (psi, _) = coherent_state(&[3.0_f64], &b).unwrap();
        assert!((psi.weight(&[2]) - 0.224_041_807_655_388_9).abs() < 1e-12);
        assert!((psi.weight(&[2]) - poisson(3.0, 2)).abs() < 1e-15);
    }

    #[test]
    fn product_structure_and_tail() {
        let b = TruncationBox::new(vec![12, 9]).unwrap();
        let (psi, tail) = coherent_state(&[0.5_f64, 1.7], &b).unwrap();
        for n in b.states() {
            let expect = poisson(0.5, n[0]) * poisson(1.7, n[1]);
            assert!((psi.weight(&n) - expect).abs() <= 1e-13 * expect.max(1e-300), "{n:?}");
        }
        let in_box: f64 =
            (0..=12).map(|a| poisson(0.5, a)).sum::<f64>() * (0..=9).map(|a| poisson(1.7, a)).sum::<f64>();
        assert!((tail - (1.0 - in_box)).abs() < 1e-14);
    }

    #[test]
    fn negative_mean_rejected() {
        let b = TruncationBox::new(vec![3]).unwrap();
        assert_eq!(coherent_state(&[-1.0], &b).unwrap_err().code(), "E_NEGC");
    }

    #[test]
    fn large_caps_do_not_overflow() {
        let b = TruncationBox::new(vec![400]).unwrap();
        let (psi, tail) = coherent_state(&[200.0_f64], &b).unwrap();
        assert!(psi.weights().iter().all(|w| w.is_finite()));
        assert!(tail.abs() < 1e-12);
    }

    #[test]
    fn projection_keeps_sector_only() {
        let b = TruncationBox::new(vec![6, 6]).unwrap();
        let (psi, _) = coherent_state(&[0.5_f64, 1.0], &b).unwrap();
        let w = ConservedVector(vec![2, 1]);
        let p = psi.project_onto(&w, 4).unwrap();
        let support: Vec<Vec<u64>> = b.states().filter(|n| p.weight(n) > 0.0).collect();
        assert_eq!(support, vec![vec![0, 4], vec![1, 2], vec![2, 0]]);
        assert!((p.total() - 1.0).abs() < 1e-15);
        let ratio = p.weight(&[1, 2]) / psi.weight(&[1, 2]);
        assert!((p.weight(&[0, 4]) / psi.weight(&[0, 4]) - ratio).abs() < 1e-12 * ratio);
    }

    #[test]
    fn projecting_a_pure_state_is_identity() {
        let b = TruncationBox::new(vec![3, 3]).unwrap();
        let psi = MixedState::<f64>::pure(b, &[1, 2]).unwrap();
        assert_eq!(psi.project_onto(&ConservedVector(vec![2, 1]), 4).unwrap(), psi);
        assert_eq!(psi.project_onto(&ConservedVector(vec![2, 1]), 3).unwrap_err().code(), "E_EMPTY_SECTOR");
    }

    #[test]
    fn symmetry_with_zero_parameter() {
        let b = TruncationBox::new(vec![8, 8]).unwrap();
        let (psi, _) = coherent_state(&[0.5_f64, 1.0], &b).unwrap();
        let (out, pred) = apply_symmetry(&[0.5_f64, 1.0], &ConservedVector(vec![2, 1]), 0.0, &b).unwrap();
        assert_eq!(pred, vec![0.5, 1.0]);
        let norm = psi.normalized().unwrap();
        for (a, b) in out.weights().iter().zip(norm.weights()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn symmetry_predicts_scaled_mean() {
        let b = TruncationBox::new(vec![8, 8]).unwrap();
        let (_, pred) = apply_symmetry(&[0.5_f64, 1.0], &ConservedVector(vec![2, 1]), 2f64.ln(), &b).unwrap();
        assert!((pred[0] - 2.0).abs() < 1e-14 && (pred[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn symmetry_overflow() {
        let b = TruncationBox::new(vec![100, 100]).unwrap();
        let err = apply_symmetry(&[0.5_f64, 1.0], &ConservedVector(vec![2, 1]), 5.0, &b).unwrap_err();
        assert_eq!(err.code(), "E_OVERFLOW");
    }

    #[test]
    fn csv_export() {
        let b = TruncationBox::new(vec![1]).unwrap();
        let psi = MixedState::<f64>::pure(b, &[1]).unwrap();
        assert_eq!(psi.to_csv(&["A".to_string()]), "A,probability\n1,1\n");
    }

    #[test]
    fn validates_weights() {
        let b = TruncationBox::new(vec![1]).unwrap();
        assert!(MixedState::new(b.clone(), vec![0.7, 0.7]).is_err());
        assert!(MixedState::new(b.clone(), vec![-0.1, 0.5]).is_err());
        assert!(MixedState::new(b, vec![0.5, 0.5]).is_ok());
    }
}
