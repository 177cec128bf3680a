//! Reaction networks / stochastic Petri nets and the graphs derived from them.
//!
//! Species carry a fixed global order (declaration order). Complexes, pure
//! states and the reactant/product vectors of a transition are all dense
//! [`CountVector`]s in that order.

use std::fmt;

use serde::Serialize;

use crate::error::{CrnError, Result};
use crate::scalar::Real;

/// Nonnegative integer vector over the species set.
///
/// Ordering is lexicographic, which is the order used for complexes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct CountVector(pub Vec<u64>);

impl CountVector {
    pub fn zeros(k: usize) -> Self {
        CountVector(vec![0; k])
    }

    /// Unit vector `e_i` in dimension `k`.
    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![0; k];
        v[i] = 1;
        CountVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Largest entry (the ℓ∞ norm).
    pub fn max_entry(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Sum of entries.
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Integer dot product with a weight vector.
    pub fn dot(&self, w: &[i64]) -> i64 {
        self.0.iter().zip(w).map(|(&n, &wi)| n as i64 * wi).sum()
    }

    /// Entrywise `self - other` as signed integers.
    pub fn delta(&self, other: &CountVector) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a as i64 - b as i64).collect()
    }

    /// `self + change`, or `None` if any entry would go negative.
    pub fn apply(&self, change: &[i64]) -> Option<CountVector> {
        self.0
            .iter()
            .zip(change)
            .map(|(&n, &d)| {
                let m = n as i64 + d;
                (m >= 0).then_some(m as u64)
            })
            .collect::<Option<Vec<_>>>()
            .map(CountVector)
    }

    /// Multi-index power `x^self` with `0^0 = 1`.
    pub fn monomial<T: Real>(&self, x: &[T]) -> T {
        self.0.iter().zip(x).fold(T::one(), |acc, (&e, &xi)| acc * crate::scalar::powi(xi, e))
    }

    /// Product of falling factorials `prod_i n_i (n_i - 1) ... (n_i - s_i + 1)`,
    /// where `self` plays the role of `s`.
    pub fn falling_from<T: Real>(&self, n: &[u64]) -> T {
        self.0.iter().zip(n).fold(T::one(), |acc, (&s, &ni)| acc * crate::scalar::falling(ni, s))
    }
}

impl From<Vec<u64>> for CountVector {
    fn from(v: Vec<u64>) -> Self {
        CountVector(v)
    }
}

/// One reaction `input -> output` with a positive rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub input: CountVector,
    pub output: CountVector,
    pub rate: T,
    pub label: Option<String>,
}

impl<T: Real> Transition<T> {
    pub fn new(input: impl Into<CountVector>, output: impl Into<CountVector>, rate: T) -> Self {
        Transition { input: input.into(), output: output.into(), rate, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Net change `output - input`.
    pub fn change(&self) -> Vec<i64> {
        self.output.delta(&self.input)
    }

    pub fn is_self_loop(&self) -> bool {
        self.input == self.output
    }
}

/// Species plus transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    species: Vec<String>,
    transitions: Vec<Transition<T>>,
}

pub(crate) fn is_species_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl<T: Real> Network<T> {
    /// Validates species names and transition shapes.
    pub fn new(species: Vec<String>, transitions: Vec<Transition<T>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for name in &species {
            if name.is_empty() {
                return Err(CrnError::InvalidArgument("empty species name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(CrnError::InvalidArgument(format!("duplicate species `{name}`")));
            }
        }
        let k = species.len();
        for (j, tr) in transitions.iter().enumerate() {
            if tr.input.len() != k || tr.output.len() != k {
                return Err(CrnError::InvalidArgument(format!(
                    "transition {j} has vectors of length {}/{}, expected {k}",
                    tr.input.len(),
                    tr.output.len()
                )));
            }
            if !(tr.rate > T::zero()) || !tr.rate.is_finite() {
                return Err(CrnError::InvalidArgument(format!("transition {j} has non-positive rate {}", tr.rate)));
            }
        }
        Ok(Network { species, transitions })
    }

    /// Builds a network from the Petri-net incidence data `i(j, τ)` and `o(j, τ)`
    /// (rows indexed by species, columns by transition).
    pub fn from_petri(species: Vec<String>, input: &[Vec<u64>], output: &[Vec<u64>], rates: &[T]) -> Result<Self> {
        let k = species.len();
        if input.len() != k || output.len() != k {
            return Err(CrnError::Dim { expected: k, got: input.len().min(output.len()) });
        }
        let transitions = rates
            .iter()
            .enumerate()
            .map(|(tau, &rate)| {
                let col = |m: &[Vec<u64>]| -> Result<CountVector> {
                    m.iter()
                        .map(|row| row.get(tau).copied().ok_or(CrnError::Dim { expected: rates.len(), got: row.len() }))
                        .collect::<Result<Vec<_>>>()
                        .map(CountVector)
                };
                Ok(Transition::new(col(input)?, col(output)?, rate))
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(species, transitions)
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn transitions(&self) -> &[Transition<T>] {
        &self.transitions
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    /// Copy of the network with rate constants replaced.
    pub fn with_rates(&self, rates: &[T]) -> Result<Self> {
        crate::error::check_dim(self.transitions.len(), rates.len())?;
        let transitions =
            self.transitions.iter().zip(rates).map(|(t, &r)| Transition { rate: r, ..t.clone() }).collect();
        Network::new(self.species.clone(), transitions)
    }

    /// Non-fatal diagnostics (self-loop transitions).
    pub fn warnings(&self) -> Vec<String> {
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_self_loop())
            .map(|(j, _)| format!("transition {j} is a self-loop and never changes the state"))
            .collect()
    }

    /// All distinct input and output complexes, lexicographically ordered.
    pub fn complexes(&self) -> Vec<CountVector> {
        let mut all: Vec<CountVector> =
            self.transitions.iter().flat_map(|t| [t.input.clone(), t.output.clone()]).collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn complex_graph(&self) -> ComplexGraph {
        let vertices = self.complexes();
        let index = |c: &CountVector| vertices.binary_search(c).expect("complex present");
        let edges = self
            .transitions
            .iter()
            .enumerate()
            .map(|(j, t)| GraphEdge { source: index(&t.input), target: index(&t.output), transition: j })
            .collect();
        ComplexGraph { vertices, edges }
    }

    /// `k x |T|` integer matrix whose column `j` is `output_j - input_j`.
    pub fn stoichiometric_matrix(&self) -> Vec<Vec<i64>> {
        let k = self.num_species();
        let mut m = vec![vec![0i64; self.transitions.len()]; k];
        for (j, t) in self.transitions.iter().enumerate() {
            for (i, d) in t.change().into_iter().enumerate() {
                m[i][j] = d;
            }
        }
        m
    }

    /// Petri-net input multiplicities `i(j, τ)`: rows are species.
    pub fn input_matrix(&self) -> Vec<Vec<u64>> {
        self.incidence(|t| &t.input)
    }

    /// Petri-net output multiplicities `o(j, τ)`: rows are species.
    pub fn output_matrix(&self) -> Vec<Vec<u64>> {
        self.incidence(|t| &t.output)
    }

    fn incidence(&self, side: impl Fn(&Transition<T>) -> &CountVector) -> Vec<Vec<u64>> {
        (0..self.num_species()).map(|i| self.transitions.iter().map(|t| side(t).0[i]).collect()).collect()
    }

    pub fn rates(&self) -> Vec<T> {
        self.transitions.iter().map(|t| t.rate).collect()
    }

    /// Largest single entry of any input or output vector.
    pub fn margin(&self) -> u64 {
        self.transitions.iter().map(|t| t.input.max_entry().max(t.output.max_entry())).max().unwrap_or(0)
    }

    /// Bipartite species/transition multigraph.
    pub fn to_petri_bipartite(&self) -> PetriBipartite {
        let transitions: Vec<String> = self
            .transitions
            .iter()
            .enumerate()
            .map(|(j, t)| t.label.clone().unwrap_or_else(|| format!("t{j}")))
            .collect();
        let mut edges = Vec::new();
        for (j, t) in self.transitions.iter().enumerate() {
            for (i, &m) in t.input.0.iter().enumerate() {
                if m > 0 {
                    edges.push(PetriEdge {
                        from: PetriNode::Species(i),
                        to: PetriNode::Transition(j),
                        multiplicity: m,
                    });
                }
            }
            for (i, &m) in t.output.0.iter().enumerate() {
                if m > 0 {
                    edges.push(PetriEdge {
                        from: PetriNode::Transition(j),
                        to: PetriNode::Species(i),
                        multiplicity: m,
                    });
                }
            }
        }
        PetriBipartite { species: self.species.clone(), transitions, edges }
    }

    /// Human-readable complex, e.g. `2 B + C` or `0`.
    pub fn complex_name(&self, c: &CountVector) -> String {
        let terms: Vec<String> =
            c.0.iter()
                .zip(&self.species)
                .filter(|(&n, _)| n > 0)
                .map(|(&n, s)| if n == 1 { s.clone() } else { format!("{n} {s}") })
                .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub transition: usize,
}

/// Directed multigraph with complexes as vertices and one edge per transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexGraph {
    pub vertices: Vec<CountVector>,
    pub edges: Vec<GraphEdge>,
}

impl ComplexGraph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Out-neighbour lists (with multiplicity).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.source].push(e.target);
        }
        adj
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PetriNode {
    Species(usize),
    Transition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriEdge {
    pub from: PetriNode,
    pub to: PetriNode,
    pub multiplicity: u64,
}

/// Species vertices, transition vertices, and weighted arcs between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriBipartite {
    pub species: Vec<String>,
    pub transitions: Vec<String>,
    pub edges: Vec<PetriEdge>,
}

impl PetriBipartite {
    fn node_name(&self, n: PetriNode) -> &str {
        match n {
            PetriNode::Species(i) => &self.species[i],
            PetriNode::Transition(j) => &self.transitions[j],
        }
    }

    /// Multiplicity of the arc between two named nodes (0 if absent).
    pub fn multiplicity(&self, from: &str, to: &str) -> u64 {
        self.edges
            .iter()
            .filter(|e| self.node_name(e.from) == from && self.node_name(e.to) == to)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Whitespace-separated edge list: `from to multiplicity`, one arc per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", self.node_name(e.from), self.node_name(e.to), e.multiplicity));
        }
        out
    }

    /// Graphviz rendering; species are circles, transitions boxes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph petri {\n");
        for (i, s) in self.species.iter().enumerate() {
            out.push_str(&format!("  s{i} [label=\"{s}\", shape=circle];\n"));
        }
        for (j, t) in self.transitions.iter().enumerate() {
            out.push_str(&format!("  t{j} [label=\"{t}\", shape=box];\n"));
        }
        let id = |n: PetriNode| match n {
            PetriNode::Species(i) => format!("s{i}"),
            PetriNode::Transition(j) => format!("t{j}"),
        };
        for e in &self.edges {
            let label = if e.multiplicity > 1 { format!(" [label=\"{}\"]", e.multiplicity) } else { String::new() };
            out.push_str(&format!("  {} -> {}{};\n", id(e.from), id(e.to), label));
        }
        out.push_str("}\n");
        out
    }

    /// Recovers the `(i, o)` incidence matrices, rows indexed by species.
    pub fn incidence(&self) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
        let (k, nt) = (self.species.len(), self.transitions.len());
        let mut input = vec![vec![0; nt]; k];
        let mut output = vec![vec![0; nt]; k];
        for e in &self.edges {
            match (e.from, e.to) {
                (PetriNode::Species(i), PetriNode::Transition(j)) => input[i][j] += e.multiplicity,
                (PetriNode::Transition(j), PetriNode::Species(i)) => output[i][j] += e.multiplicity,
                _ => unreachable!("bipartite"),
            }
        }
        (input, output)
    }
}

impl<T: Real> fmt::Display for Network<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::format_network(self))
    }
}
