//! The master-equation generator `H = sum_τ r(τ) (a†^{t(τ)} - a†^{s(τ)}) a^{s(τ)}`
//! on a truncation box, its time evolution, and the coherent-state residual.

use serde::Serialize;

use crate::error::{check_dim, CrnError, Result};
use crate::fock::operator::SparseOperator;
use crate::fock::space::TruncationBox;
use crate::fock::state::{coherent_state, MixedState};
use crate::net::Network;
use crate::scalar::Real;

/// What to do with a transition whose target leaves the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Drop the jump and its diagonal loss term together. Columns sum to zero
    /// and every sector of a conserved quantity is preserved.
    #[default]
    TruncatePair,
    /// Keep the diagonal loss term: probability leaks out of the box. This is
    /// what plain composition of truncated ladder operators gives.
    Leak,
}

/// Assembles `H` column by column.
pub fn hamiltonian<T: Real>(
    net: &Network<T>,
    space: &TruncationBox,
    policy: BoundaryPolicy,
) -> Result<SparseOperator<T>> {
    check_dim(space.num_species(), net.num_species())?;
    let changes: Vec<Vec<i64>> = net.transitions().iter().map(|t| t.change()).collect();
    let mut entries = Vec::new();
    for (col, n) in space.states().enumerate() {
        for (t, change) in net.transitions().iter().zip(&changes) {
            if t.is_self_loop() {
                continue;
            }
            let fall: T = t.input.falling_from(&n);
            if fall == T::zero() {
                continue;
            }
            let flow = t.rate * fall;
            match space.shifted(&n, change) {
                Some(row) => {
                    entries.push((row, col, flow));
                    entries.push((col, col, -flow));
                }
                None if policy == BoundaryPolicy::Leak => entries.push((col, col, -flow)),
                None => {}
            }
        }
    }
    Ok(SparseOperator::from_triplets(space.clone(), entries))
}

/// Largest ℓ∞ entry of any reactant or product vector.
pub fn interior_margin<T: Real>(net: &Network<T>) -> u64 {
    net.margin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AckResidual<T> {
    /// ℓ1 norm of `H Ψ` over states at least `margin` below every cap.
    pub interior_residual_l1: T,
    /// ℓ1 norm of `H Ψ` over the whole box.
    pub full_residual_l1: T,
    pub margin: u64,
    pub interior_states: usize,
    /// Coherent-state mass outside the box.
    pub tail_mass: T,
}

/// ℓ1 norms of `H psi`, split into interior and full.
pub fn residual_norms<T: Real>(h: &SparseOperator<T>, psi: &MixedState<T>, margin: u64) -> Result<(T, T, usize)> {
    if h.space() != psi.space() {
        return Err(CrnError::BoxMismatch { left: h.space().caps().to_vec(), right: psi.space().caps().to_vec() });
    }
    let r = h.matvec(psi.weights());
    let mut interior = T::zero();
    let mut full = T::zero();
    let mut count = 0;
    for (n, v) in h.space().states().zip(&r) {
        full += v.abs();
        if h.space().is_interior(&n, margin) {
            interior += v.abs();
            count += 1;
        }
    }
    Ok((interior, full, count))
}

/// Evaluates `H Ψ_c` on the box; for complex-balanced `c` the interior part
/// should vanish to rounding.
pub fn ack_residual<T: Real>(net: &Network<T>, c: &[T], space: &TruncationBox) -> Result<AckResidual<T>> {
    let h = hamiltonian(net, space, BoundaryPolicy::TruncatePair)?;
    let (psi, tail_mass) = coherent_state(c, space)?;
    let margin = interior_margin(net);
    let (interior, full, interior_states) = residual_norms(&h, &psi, margin)?;
    Ok(AckResidual { interior_residual_l1: interior, full_residual_l1: full, margin, interior_states, tail_mass })
}

/// Largest stable RK4 step accepted by [`evolve_master`]: `0.5 / max |H_nn|`.
pub fn max_master_step<T: Real>(h: &SparseOperator<T>) -> T {
    let d = h.max_abs_diagonal();
    if d == T::zero() {
        T::infinity()
    } else {
        T::lit(0.5) / d
    }
}

/// RK4 integration of `dΨ/dt = H Ψ` up to time `t`.
pub fn evolve_master<T: Real>(h: &SparseOperator<T>, psi0: &MixedState<T>, t: T, dt: T) -> Result<MixedState<T>> {
    if h.space() != psi0.space() {
        return Err(CrnError::BoxMismatch { left: h.space().caps().to_vec(), right: psi0.space().caps().to_vec() });
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(CrnError::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    let bound = max_master_step(h);
    if !(dt > T::zero()) || dt > bound {
        return Err(CrnError::TimeStep { dt: dt.as_f64(), bound: bound.as_f64() });
    }
    if t == T::zero() {
        return Ok(psi0.clone());
    }
    let steps = (t / dt).ceil().to_u64().unwrap_or(u64::MAX).max(1);
    let h_step = t / T::from_count(steps);
    let n = h.dim();
    let mut x = psi0.weights().to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let half = T::lit(0.5) * h_step;
    let sixth = h_step / T::lit(6.0);
    let two = T::lit(2.0);
    for _ in 0..steps {
        h.matvec_into(&x, &mut k1);
        tmp.iter_mut().zip(&x).zip(&k1).for_each(|((o, &a), &b)| *o = a + half * b);
        h.matvec_into(&tmp, &mut k2);
        tmp.iter_mut().zip(&x).zip(&k2).for_each(|((o, &a), &b)| *o = a + half * b);
        h.matvec_into(&tmp, &mut k3);
        tmp.iter_mut().zip(&x).zip(&k3).for_each(|((o, &a), &b)| *o = a + h_step * b);
        h.matvec_into(&tmp, &mut k4);
        for i in 0..n {
            x[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        for (i, v) in x.iter_mut().enumerate() {
            if *v < T::zero() {
                if *v < -T::lit(crate::rate::NEG_CLAMP) {
                    return Err(CrnError::Negative { species: i, value: v.as_f64(), time: f64::NAN });
                }
                *v = T::zero();
            }
        }
    }
    Ok(MixedState::from_raw(psi0.space().clone(), x))
}
