//! Gillespie direct-method simulation of the jump process generated by `H`.
//!
//! Propensities follow stochastic mass action: `r(τ)` times the number of
//! ordered ways to pick the reactants, `prod_i n_i (n_i - 1) ... (n_i - s_i + 1)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, CrnError, Result};
use crate::fock::{coherent_state, MixedState, TruncationBox};
use crate::net::{CountVector, Network};
use crate::scalar::Real;

pub fn propensity<T: Real>(net: &Network<T>, n: &[u64], tau: usize) -> T {
    let t = &net.transitions()[tau];
    t.rate * t.input.falling_from::<T>(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsaOptions {
    /// Largest count any species may reach before the run aborts.
    pub safety_cap: u64,
    /// Stop a trajectory after this many jumps even if `t_end` is not reached.
    pub max_jumps: u64,
}

impl Default for SsaOptions {
    fn default() -> Self {
        SsaOptions { safety_cap: 1_000_000, max_jumps: u64::MAX }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<CountVector>,
    /// Index of the transition that produced `states[i + 1]`.
    pub fired: Vec<usize>,
    pub seed: u64,
    pub t_end: T,
}

impl<T: Real> JumpTrajectory<T> {
    pub fn num_jumps(&self) -> usize {
        self.fired.len()
    }

    pub fn final_state(&self) -> &CountVector {
        self.states.last().expect("trajectory starts with n0")
    }

    /// Time-weighted mean of each species over `[0, t_end]`.
    pub fn time_average(&self) -> Vec<T> {
        let k = self.states[0].len();
        let mut acc = vec![T::zero(); k];
        for (i, s) in self.states.iter().enumerate() {
            let until = self.times.get(i + 1).copied().unwrap_or(self.t_end);
            let dt = until - self.times[i];
            for (a, &c) in acc.iter_mut().zip(&s.0) {
                *a += dt * T::from_count(c);
            }
        }
        acc.into_iter().map(|a| a / self.t_end).collect()
    }

    /// CSV `t,<species...>`, one row per visited state.
    pub fn to_csv(&self, species: &[String]) -> String {
        let mut out = String::from("t");
        for s in species {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for c in &s.0 {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Step-at-a-time direct method.
struct Simulator<'a, T> {
    net: &'a Network<T>,
    changes: Vec<Vec<i64>>,
    props: Vec<T>,
    state: CountVector,
    time: T,
    rng: ChaCha8Rng,
    cap: u64,
}

impl<'a, T: Real> Simulator<'a, T> {
    fn new(net: &'a Network<T>, n0: &CountVector, seed: u64, opts: &SsaOptions) -> Result<Self> {
        check_dim(net.num_species(), n0.len())?;
        Ok(Simulator {
            net,
            changes: net.transitions().iter().map(|t| t.change()).collect(),
            props: vec![T::zero(); net.transitions().len()],
            state: n0.clone(),
            time: T::zero(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cap: opts.safety_cap,
        })
    }

    /// Draws the next jump as `(time, transition)`; `None` when no transition can fire.
    fn propose(&mut self) -> Option<(T, usize)> {
        let mut total = T::zero();
        for (j, p) in self.props.iter_mut().enumerate() {
            *p = propensity(self.net, &self.state.0, j);
            total += *p;
        }
        if !(total > T::zero()) {
            return None;
        }
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let wait = -T::lit(u1.ln()) / total;
        let target = T::lit(self.rng.gen::<f64>()) * total;
        let mut acc = T::zero();
        let mut chosen = None;
        for (j, &p) in self.props.iter().enumerate() {
            if p > T::zero() {
                acc += p;
                chosen = Some(j);
                if target < acc {
                    break;
                }
            }
        }
        chosen.map(|j| (self.time + wait, j))
    }

    fn fire(&mut self, at: T, tau: usize) -> Result<()> {
        let next = self.state.apply(&self.changes[tau]).expect("propensity is zero without reactants");
        if let Some((i, &c)) = next.0.iter().enumerate().find(|(_, &c)| c > self.cap) {
            return Err(CrnError::Explode { species: i, count: c, cap: self.cap });
        }
        self.state = next;
        self.time = at;
        Ok(())
    }
}

pub fn simulate<T: Real>(net: &Network<T>, n0: &CountVector, t_end: T, seed: u64) -> Result<JumpTrajectory<T>> {
    simulate_with(net, n0, t_end, seed, &SsaOptions::default())
}

/// Runs until `t_end`, until no transition can fire, or for `opts.max_jumps` jumps.
pub fn simulate_with<T: Real>(
    net: &Network<T>,
    n0: &CountVector,
    t_end: T,
    seed: u64,
    opts: &SsaOptions,
) -> Result<JumpTrajectory<T>> {
    if !(t_end > T::zero()) {
        return Err(CrnError::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let mut sim = Simulator::new(net, n0, seed, opts)?;
    let mut traj = JumpTrajectory { times: vec![T::zero()], states: vec![n0.clone()], fired: Vec::new(), seed, t_end };
    while (traj.fired.len() as u64) < opts.max_jumps {
        let Some((at, tau)) = sim.propose() else { break };
        if at > t_end {
            break;
        }
        sim.fire(at, tau)?;
        traj.times.push(at);
        traj.states.push(sim.state.clone());
        traj.fired.push(tau);
    }
    Ok(traj)
}

/// Empirical distribution over visited states.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    pub counts: BTreeMap<CountVector, u64>,
    pub total_samples: u64,
}

impl Histogram {
    pub fn record(&mut self, n: &CountVector) {
        *self.counts.entry(n.clone()).or_insert(0) += 1;
        self.total_samples += 1;
    }

    /// Combines two histograms; associative and commutative.
    pub fn merge(&mut self, other: &Histogram) {
        for (n, &c) in &other.counts {
            *self.counts.entry(n.clone()).or_insert(0) += c;
        }
        self.total_samples += other.total_samples;
    }

    pub fn frequency(&self, n: &CountVector) -> f64 {
        if self.total_samples == 0 {
            return 0.0;
        }
        self.counts.get(n).copied().unwrap_or(0) as f64 / self.total_samples as f64
    }

    pub fn num_species(&self) -> usize {
        self.counts.keys().next().map_or(0, |n| n.len())
    }

    /// Smallest box containing every observed state (caps at least 1).
    pub fn bounding_box(&self) -> Result<TruncationBox> {
        let k = self.num_species();
        let mut caps = vec![1u64; k];
        for n in self.counts.keys() {
            for (c, &v) in caps.iter_mut().zip(&n.0) {
                *c = (*c).max(v);
            }
        }
        TruncationBox::new(caps)
    }

    pub fn means<T: Real>(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.num_species()];
        for (n, &c) in &self.counts {
            for (mi, &v) in m.iter_mut().zip(&n.0) {
                *mi += T::from_count(v) * T::from_count(c);
            }
        }
        let total = T::from_count(self.total_samples.max(1));
        m.into_iter().map(|x| x / total).collect()
    }

    /// CSV `<species...>,count,frequency`.
    pub fn to_csv(&self, species: &[String]) -> String {
        let mut out = String::new();
        for s in species {
            out.push_str(s);
            out.push(',');
        }
        out.push_str("count,frequency\n");
        for (n, &c) in &self.counts {
            for v in &n.0 {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{c},{}", c as f64 / self.total_samples as f64);
        }
        out
    }

    /// Total-variation distance to `psi` after normalising it; histogram mass
    /// outside `psi`'s box counts fully.
    pub fn tv_distance_to<T: Real>(&self, psi: &MixedState<T>) -> Result<T> {
        let psi = psi.normalized()?;
        let space = psi.space();
        let total = T::from_count(self.total_samples.max(1));
        let mut dist = T::zero();
        for (n, p) in space.states().zip(psi.weights()) {
            let emp = T::from_count(self.counts.get(&CountVector(n)).copied().unwrap_or(0)) / total;
            dist += (emp - *p).abs();
        }
        for (n, &c) in &self.counts {
            if !space.contains(&n.0) {
                dist += T::from_count(c) / total;
            }
        }
        Ok(dist * T::lit(0.5))
    }
}

/// Records the state at `burn_in + i * interval` for `i < sample_count`.
pub fn stationary_histogram<T: Real>(
    net: &Network<T>,
    n0: &CountVector,
    burn_in: T,
    sample_count: u64,
    interval: T,
    seed: u64,
) -> Result<Histogram> {
    stationary_histogram_with(net, n0, burn_in, sample_count, interval, seed, &SsaOptions::default())
}

pub fn stationary_histogram_with<T: Real>(
    net: &Network<T>,
    n0: &CountVector,
    burn_in: T,
    sample_count: u64,
    interval: T,
    seed: u64,
    opts: &SsaOptions,
) -> Result<Histogram> {
    if burn_in < T::zero() || !(interval > T::zero()) || sample_count == 0 {
        return Err(CrnError::InvalidArgument(
            "burn-in must be nonnegative, interval and sample count positive".into(),
        ));
    }
    let mut sim = Simulator::new(net, n0, seed, opts)?;
    let mut hist = Histogram::default();
    let mut next = sim.propose();
    for i in 0..sample_count {
        let at = burn_in + T::from_count(i) * interval;
        while let Some((t, tau)) = next {
            if t > at {
                break;
            }
            sim.fire(t, tau)?;
            next = sim.propose();
        }
        hist.record(&sim.state);
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonComparison<T> {
    pub tv_distance: T,
    pub per_species_means: Vec<T>,
}

/// Compares a histogram with the product-Poisson law of mean `c`, both
/// restricted to the histogram's bounding box and renormalised there.
pub fn compare_to_poisson<T: Real>(h: &Histogram, c: &[T]) -> Result<PoissonComparison<T>> {
    let space = h.bounding_box()?;
    check_dim(space.num_species(), c.len())?;
    let (psi, _) = coherent_state(c, &space)?;
    Ok(PoissonComparison { tv_distance: h.tv_distance_to(&psi)?, per_species_means: h.means() })
}
