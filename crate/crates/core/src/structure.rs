//! Structural analysis of a network: linkage classes, weak reversibility,
//! deficiency, integer conservation laws and the complex-balance test.

use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::exact;
use crate::net::{ComplexGraph, CountVector, Network};
use crate::scalar::Real;

/// Integer weights `w` of a conserved linear quantity `sum_i w_i N_i`.
///
/// Canonical form: entries coprime, first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ConservedVector(pub Vec<i64>);

impl ConservedVector {
    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    /// `w · n`
    pub fn eval(&self, n: &[u64]) -> i64 {
        self.0.iter().zip(n).map(|(&w, &c)| w * c as i64).sum()
    }

    /// `w · x` for a real vector.
    pub fn eval_real<T: Real>(&self, x: &[T]) -> T {
        self.0.iter().zip(x).map(|(&w, &xi)| T::lit(w as f64) * xi).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub num_complexes: usize,
    pub linkage_classes: Vec<Vec<usize>>,
    pub weakly_reversible: bool,
    #[serde(rename = "stoich_rank")]
    pub stoichiometric_rank: usize,
    pub deficiency: usize,
    #[serde(rename = "conserved_basis")]
    pub conserved_basis: Vec<ConservedVector>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of the undirected complex graph, each sorted, ordered
/// by smallest member.
pub fn linkage_classes(graph: &ComplexGraph) -> Vec<Vec<usize>> {
    let n = graph.num_vertices();
    let mut uf = UnionFind::new(n);
    for e in &graph.edges {
        uf.union(e.source, e.target);
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for v in 0..n {
        let r = uf.find(v);
        if slot[r] == usize::MAX {
            slot[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[r]].push(v);
    }
    classes
}

/// Strongly connected components (iterative Tarjan). Returns a component id per vertex.
pub fn strongly_connected_components(graph: &ComplexGraph) -> Vec<usize> {
    let n = graph.num_vertices();
    let adj = graph.adjacency();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (vertex, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*child) {
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// True iff every linkage class is strongly connected.
pub fn is_weakly_reversible(graph: &ComplexGraph) -> bool {
    let comp = strongly_connected_components(graph);
    linkage_classes(graph).iter().all(|class| class.iter().all(|&v| comp[v] == comp[class[0]]))
}

/// Exact rank of the stoichiometric matrix.
pub fn stoichiometric_rank<T: Real>(net: &Network<T>) -> usize {
    exact::rank(&net.stoichiometric_matrix())
}

/// Canonical integer basis of `{ w : w · (t(τ) - s(τ)) = 0 for all τ }`.
pub fn conserved_quantities<T: Real>(net: &Network<T>) -> Vec<ConservedVector> {
    let k = net.num_species();
    let changes: Vec<Vec<i64>> = net.transitions().iter().map(|t| t.change()).collect();
    exact::integer_null_space(&changes, k).into_iter().map(ConservedVector).collect()
}

/// Full structural report; `deficiency = |K| - linkage classes - rank`.
pub fn analyze<T: Real>(net: &Network<T>) -> StructureReport {
    let graph = net.complex_graph();
    let classes = linkage_classes(&graph);
    let rank = stoichiometric_rank(net);
    let num_complexes = graph.num_vertices();
    let deficiency = num_complexes.checked_sub(classes.len() + rank).expect("deficiency is nonnegative");
    StructureReport {
        num_complexes,
        weakly_reversible: is_weakly_reversible(&graph),
        linkage_classes: classes,
        stoichiometric_rank: rank,
        deficiency,
        conserved_basis: conserved_quantities(net),
    }
}

pub fn deficiency<T: Real>(net: &Network<T>) -> usize {
    analyze(net).deficiency
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexFlux<T> {
    pub complex: CountVector,
    /// Total rate of transitions whose output is this complex.
    pub production: T,
    /// Total rate of transitions whose input is this complex.
    pub consumption: T,
    /// `production - consumption`.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexBalanceReport<T> {
    pub balanced: bool,
    pub max_abs_residual: T,
    /// `tol * (1 + max throughput)`
    pub threshold: T,
    pub complexes: Vec<ComplexFlux<T>>,
}

/// Checks complex balance of `c`; `0^0 = 1`.
pub fn complex_balance<T: Real>(net: &Network<T>, c: &[T], tol: T) -> Result<ComplexBalanceReport<T>> {
    check_dim(net.num_species(), c.len())?;
    let complexes = net.complexes();
    let mut production = vec![T::zero(); complexes.len()];
    let mut consumption = vec![T::zero(); complexes.len()];
    let at = |x: &CountVector| complexes.binary_search(x).expect("complex present");
    for t in net.transitions() {
        let flux = t.rate * t.input.monomial(c);
        consumption[at(&t.input)] += flux;
        production[at(&t.output)] += flux;
    }
    let mut max_res = T::zero();
    let mut max_thru = T::zero();
    let entries: Vec<ComplexFlux<T>> = complexes
        .into_iter()
        .enumerate()
        .map(|(i, complex)| {
            let residual = production[i] - consumption[i];
            max_res = max_res.max(residual.abs());
            max_thru = max_thru.max(production[i].max(consumption[i]));
            ComplexFlux { complex, production: production[i], consumption: consumption[i], residual }
        })
        .collect();
    let threshold = tol * (T::one() + max_thru);
    Ok(ComplexBalanceReport {
        balanced: max_res <= threshold,
        max_abs_residual: max_res,
        threshold,
        complexes: entries,
    })
}

pub fn is_complex_balanced<T: Real>(net: &Network<T>, c: &[T], tol: T) -> Result<bool> {
    Ok(complex_balance(net, c, tol)?.balanced)
}
