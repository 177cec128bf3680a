//! Deterministic mass-action dynamics.
//!
//! `dx/dt = sum_τ r(τ) (t(τ) - s(τ)) x^{s(τ)}`

use std::fmt::Write as _;

use crate::error::{check_dim, CrnError, Result};
use crate::exact;
use crate::net::Network;
use crate::scalar::Real;

/// Entries in `[-NEG_CLAMP, 0)` are rounding noise and get clamped to zero.
pub const NEG_CLAMP: f64 = 1e-12;

/// Right-hand side of the rate equation.
pub fn rate_vector_field<T: Real>(net: &Network<T>, x: &[T]) -> Result<Vec<T>> {
    check_dim(net.num_species(), x.len())?;
    let mut dx = vec![T::zero(); x.len()];
    field_into(net, x, &mut dx);
    Ok(dx)
}

fn field_into<T: Real>(net: &Network<T>, x: &[T], dx: &mut [T]) {
    dx.iter_mut().for_each(|d| *d = T::zero());
    for t in net.transitions() {
        let flux = t.rate * t.input.monomial(x);
        if flux == T::zero() {
            continue;
        }
        for (i, (&o, &s)) in t.output.0.iter().zip(&t.input.0).enumerate() {
            if o != s {
                dx[i] += flux * (T::from_count(o) - T::from_count(s));
            }
        }
    }
}

/// Analytic Jacobian `J[i][j] = ∂(dx_i/dt)/∂x_j`.
pub fn jacobian<T: Real>(net: &Network<T>, x: &[T]) -> Result<Vec<Vec<T>>> {
    let k = net.num_species();
    check_dim(k, x.len())?;
    let mut jac = vec![vec![T::zero(); k]; k];
    for t in net.transitions() {
        let change = t.change();
        for j in 0..k {
            let sj = t.input.0[j];
            if sj == 0 {
                continue;
            }
            // d/dx_j of x^s = s_j x_j^{s_j - 1} prod_{l != j} x_l^{s_l}
            let mut d = T::from_count(sj) * crate::scalar::powi(x[j], sj - 1);
            for (l, (&sl, &xl)) in t.input.0.iter().zip(x).enumerate() {
                if l != j {
                    d *= crate::scalar::powi(xl, sl);
                }
            }
            let d = t.rate * d;
            for (i, &c) in change.iter().enumerate() {
                if c != 0 {
                    jac[i][j] += T::lit(c as f64) * d;
                }
            }
        }
    }
    Ok(jac)
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method<T> {
    /// Classic fixed-step RK4; `None` picks `min(0.01, 0.1 / L)` with `L` the
    /// Jacobian row-sum norm at the initial state.
    Rk4 { step: Option<T> },
    /// Dormand-Prince 5(4) with mixed error control.
    Rk45 { rtol: T, atol: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions<T> {
    pub method: Method<T>,
    /// Keep every `record_stride`-th step (the last state is always kept).
    pub record_stride: usize,
}

impl<T: Real> Default for IntegrateOptions<T> {
    fn default() -> Self {
        IntegrateOptions { method: Method::Rk4 { step: None }, record_stride: 1 }
    }
}

impl<T: Real> IntegrateOptions<T> {
    pub fn rk4(step: T) -> Self {
        IntegrateOptions { method: Method::Rk4 { step: Some(step) }, record_stride: 1 }
    }

    pub fn rk45(rtol: T, atol: T) -> Self {
        IntegrateOptions { method: Method::Rk45 { rtol, atol }, record_stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory has an initial time")
    }

    /// CSV with header `t,<species...>`.
    pub fn to_csv(&self, species: &[String]) -> String {
        let mut out = String::from("t");
        for s in species {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for v in x {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Default RK4 step for `x0`.
pub fn default_step<T: Real>(net: &Network<T>, x0: &[T]) -> Result<T> {
    let jac = jacobian(net, x0)?;
    let lip = jac.iter().map(|row| row.iter().fold(T::zero(), |a, &v| a + v.abs())).fold(T::zero(), T::max);
    let h = T::lit(0.01);
    Ok(if lip > T::zero() { h.min(T::lit(0.1) / lip) } else { h })
}

fn clamp_state<T: Real>(x: &mut [T], time: T) -> Result<()> {
    for (i, v) in x.iter_mut().enumerate() {
        if v.is_nan() || *v < -T::lit(NEG_CLAMP) {
            return Err(CrnError::Negative { species: i, value: v.as_f64(), time: time.as_f64() });
        }
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    Ok(())
}

fn axpy<T: Real>(out: &mut [T], x: &[T], a: T, y: &[T]) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

fn rk4_step<T: Real>(net: &Network<T>, x: &[T], h: T, out: &mut [T], ws: &mut [Vec<T>; 5]) {
    let [k1, k2, k3, k4, tmp] = ws;
    let half = T::lit(0.5);
    field_into(net, x, k1);
    axpy(tmp, x, half * h, k1);
    field_into(net, tmp, k2);
    axpy(tmp, x, half * h, k2);
    field_into(net, tmp, k3);
    axpy(tmp, x, h, k3);
    field_into(net, tmp, k4);
    let sixth = h / T::lit(6.0);
    for i in 0..x.len() {
        out[i] = x[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
}

/// Integrates the rate equation from `x0` over `[0, t_end]`.
pub fn integrate<T: Real>(net: &Network<T>, x0: &[T], t_end: T, opts: &IntegrateOptions<T>) -> Result<Trajectory<T>> {
    check_dim(net.num_species(), x0.len())?;
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(CrnError::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if let Some((i, &v)) = x0.iter().enumerate().find(|(_, v)| !(**v >= T::zero())) {
        return Err(CrnError::Negative { species: i, value: v.as_f64(), time: 0.0 });
    }
    let stride = opts.record_stride.max(1);
    match opts.method {
        Method::Rk4 { step } => {
            let h = match step {
                Some(h) if h > T::zero() => h,
                Some(h) => return Err(CrnError::InvalidArgument(format!("step must be positive, got {h}"))),
                None => default_step(net, x0)?,
            };
            integrate_rk4(net, x0, t_end, h, stride)
        }
        Method::Rk45 { rtol, atol } => integrate_rk45(net, x0, t_end, rtol, atol, stride),
    }
}

fn integrate_rk4<T: Real>(net: &Network<T>, x0: &[T], t_end: T, h: T, stride: usize) -> Result<Trajectory<T>> {
    let n = (t_end / h).ceil().to_u64().unwrap_or(u64::MAX).max(1);
    let h = t_end / T::from_count(n);
    let k = x0.len();
    let mut ws = std::array::from_fn(|_| vec![T::zero(); k]);
    let mut x = x0.to_vec();
    let mut next = vec![T::zero(); k];
    let mut traj = Trajectory { times: vec![T::zero()], states: vec![x.clone()] };
    for step in 1..=n {
        rk4_step(net, &x, h, &mut next, &mut ws);
        let t = T::from_count(step) * h;
        clamp_state(&mut next, t)?;
        std::mem::swap(&mut x, &mut next);
        if step % stride as u64 == 0 || step == n {
            traj.times.push(t);
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

// Dormand-Prince 5(4) tableau.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn integrate_rk45<T: Real>(
    net: &Network<T>,
    x0: &[T],
    t_end: T,
    rtol: T,
    atol: T,
    stride: usize,
) -> Result<Trajectory<T>> {
    let k = x0.len();
    let mut x = x0.to_vec();
    let mut t = T::zero();
    let mut h = default_step(net, x0)?.min(t_end);
    let mut stages: Vec<Vec<T>> = vec![vec![T::zero(); k]; 7];
    let mut tmp = vec![T::zero(); k];
    let mut x5 = vec![T::zero(); k];
    let mut traj = Trajectory { times: vec![t], states: vec![x.clone()] };
    let mut accepted = 0usize;
    let eps = T::epsilon();
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= T::lit(16.0) * eps * t.abs().max(T::one()) {
            return Err(CrnError::StepUnderflow { time: t.as_f64(), step: h.as_f64() });
        }
        field_into(net, &x, &mut stages[0]);
        for s in 1..7 {
            for i in 0..k {
                let mut acc = T::zero();
                for (j, stage) in stages.iter().enumerate().take(s) {
                    acc += T::lit(DP_A[s][j]) * stage[i];
                }
                tmp[i] = x[i] + h * acc;
            }
            field_into(net, &tmp, &mut stages[s]);
        }
        let mut err = T::zero();
        for i in 0..k {
            let mut hi = T::zero();
            let mut lo = T::zero();
            for s in 0..7 {
                hi += T::lit(DP_B5[s]) * stages[s][i];
                lo += T::lit(DP_B4[s]) * stages[s][i];
            }
            x5[i] = x[i] + h * hi;
            let scale = atol + rtol * x[i].abs().max(x5[i].abs());
            err = err.max((h * (hi - lo)).abs() / scale);
        }
        let negative = x5.iter().any(|&v| v < -T::lit(NEG_CLAMP) || v.is_nan());
        if err <= T::one() && !negative {
            t = if t_end - (t + h) <= eps * t_end { t_end } else { t + h };
            x.copy_from_slice(&x5);
            clamp_state(&mut x, t)?;
            accepted += 1;
            if accepted.is_multiple_of(stride) || t == t_end {
                traj.times.push(t);
                traj.states.push(x.clone());
            }
        }
        let factor = if negative {
            T::lit(0.25)
        } else if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h *= factor;
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions<T> {
    /// Give up once this much simulated time has been integrated.
    pub max_time: T,
    pub max_newton_iterations: usize,
}

impl<T: Real> Default for EquilibriumOptions<T> {
    fn default() -> Self {
        EquilibriumOptions { max_time: T::lit(1e6), max_newton_iterations: 50 }
    }
}

fn converged<T: Real>(f: &[T], x: &[T], tol: T) -> bool {
    inf_norm(f) <= tol * (T::one() + inf_norm(x))
}

/// Orthonormal basis (as columns) of the span of the stoichiometric columns.
fn stoichiometric_basis<T: Real>(net: &Network<T>) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    let rank = exact::rank(&net.stoichiometric_matrix());
    for t in net.transitions() {
        if basis.len() == rank {
            break;
        }
        let mut v: Vec<T> = t.change().iter().map(|&c| T::lit(c as f64)).collect();
        let norm0 = v.iter().map(|&a| a * a).sum::<T>().sqrt();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let d: T = v.iter().zip(b).map(|(&a, &bb)| a * bb).sum();
                v.iter_mut().zip(b).for_each(|(a, &bb)| *a -= d * bb);
            }
        }
        let norm = v.iter().map(|&a| a * a).sum::<T>().sqrt();
        if norm > T::lit(1e-8) * norm0.max(T::one()) {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Solves `a y = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for c in 0..n {
        let p =
            (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[p][c] == T::zero() || !a[p][c].is_finite() {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != T::zero() {
                let (top, bottom) = a.split_at_mut(r);
                for (x, &v) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                    *x -= f * v;
                }
                let v = b[c];
                b[r] -= f * v;
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for j in r + 1..n {
            acc -= a[r][j] * y[j];
        }
        y[r] = acc / a[r][r];
    }
    Some(y)
}

/// Damped Newton on the vector field, restricted to `x + span(stoichiometric columns)`.
pub fn newton_polish<T: Real>(net: &Network<T>, x: &[T], max_iter: usize) -> Result<Vec<T>> {
    let basis = stoichiometric_basis(net);
    let mut x = x.to_vec();
    if basis.is_empty() {
        return Ok(x);
    }
    let r = basis.len();
    let mut f = rate_vector_field(net, &x)?;
    let mut fnorm = inf_norm(&f);
    for _ in 0..max_iter {
        if fnorm == T::zero() {
            break;
        }
        let jac = jacobian(net, &x)?;
        // M = Bᵀ J B, rhs = -Bᵀ f
        let jb: Vec<Vec<T>> = basis
            .iter()
            .map(|b| jac.iter().map(|row| row.iter().zip(b).map(|(&a, &bb)| a * bb).sum()).collect())
            .collect();
        let m: Vec<Vec<T>> = (0..r)
            .map(|p| (0..r).map(|q| basis[p].iter().zip(&jb[q]).map(|(&a, &bb)| a * bb).sum()).collect())
            .collect();
        let rhs: Vec<T> = basis.iter().map(|b| -b.iter().zip(&f).map(|(&a, &bb)| a * bb).sum::<T>()).collect();
        let Some(y) = solve_dense(m, rhs) else { break };
        let step: Vec<T> = (0..x.len()).map(|i| (0..r).map(|p| y[p] * basis[p][i]).sum()).collect();
        let mut alpha = T::one();
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<T> = x.iter().zip(&step).map(|(&a, &s)| a + alpha * s).collect();
            if trial.iter().all(|&v| v >= T::zero()) {
                let ft = rate_vector_field(net, &trial)?;
                let n = inf_norm(&ft);
                if n < fnorm {
                    x = trial;
                    f = ft;
                    fnorm = n;
                    improved = true;
                    break;
                }
            }
            alpha *= T::lit(0.5);
        }
        if !improved {
            break;
        }
    }
    Ok(x)
}

/// Integrates until `‖f(x)‖∞ ≤ tol (1 + ‖x‖∞)`, then Newton-polishes.
pub fn find_equilibrium<T: Real>(net: &Network<T>, x0: &[T], tol: T) -> Result<Vec<T>> {
    find_equilibrium_with(net, x0, tol, &EquilibriumOptions::default())
}

pub fn find_equilibrium_with<T: Real>(
    net: &Network<T>,
    x0: &[T],
    tol: T,
    opts: &EquilibriumOptions<T>,
) -> Result<Vec<T>> {
    check_dim(net.num_species(), x0.len())?;
    if !(tol > T::zero()) {
        return Err(CrnError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let mut x = x0.to_vec();
    let mut f = rate_vector_field(net, &x)?;
    let mut elapsed = T::zero();
    let mut chunk = T::one();
    let ode_tol = (tol * T::lit(1e-2)).max(T::lit(1e-13));
    while !converged(&f, &x, tol) {
        if elapsed >= opts.max_time {
            return Err(CrnError::NoConvergence(format!(
                "residual {} after integrating to t = {elapsed}",
                inf_norm(&f)
            )));
        }
        let mut o = IntegrateOptions::rk45(ode_tol, ode_tol);
        o.record_stride = usize::MAX;
        let traj = integrate(net, &x, chunk, &o)?;
        x = traj.final_state().to_vec();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CrnError::NoConvergence("state diverged".into()));
        }
        f = rate_vector_field(net, &x)?;
        elapsed += chunk;
        chunk = (chunk * T::lit(2.0)).min(T::lit(1e3));
    }
    let polished = newton_polish(net, &x, opts.max_newton_iterations)?;
    let fp = rate_vector_field(net, &polished)?;
    Ok(if inf_norm(&fp) <= inf_norm(&f) { polished } else { x })
}
