//! Lazy enumeration of embeddings of a workflow's undirected skeleton into
//! the resource network.
//!
//! This is VF2-style backtracking over an explicit stack, so callers can stop
//! consuming at any point without paying for the rest of the search. Pattern
//! vertices are matched in a fixed order (highest degree first, then
//! breadth-first), and each vertex after the first draws candidates only from
//! the host neighbors of an already matched pattern neighbor.

use crate::model::{ResourceNetwork, Workflow};

/// Whether extra host links among matched nodes are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Pattern edges must map to links; extra links are fine.
    #[default]
    Monomorphism,
    /// Pattern edges and non-edges must both be preserved.
    Induced,
}

/// Injective placement `mapping[task] = node` produced by the matcher.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateMapping {
    pub mapping: Vec<usize>,
}

struct Frame {
    candidates: Vec<usize>,
    next: usize,
}

type NodeFilter = fn(usize, usize) -> bool;

/// Stream of pattern-into-host embeddings.
pub struct Monomorphisms<'a, F = NodeFilter> {
    host: &'a ResourceNetwork,
    mode: MatchMode,
    order: Vec<usize>,
    degree: Vec<usize>,
    /// Pattern neighbors of `order[i]` that appear earlier in `order`.
    earlier_adjacent: Vec<Vec<usize>>,
    /// Earlier pattern vertices not adjacent to `order[i]`; used in induced mode.
    earlier_apart: Vec<Vec<usize>>,
    filter: F,
    mapping: Vec<Option<usize>>,
    used: Vec<bool>,
    stack: Vec<Frame>,
}

impl<'a> Monomorphisms<'a> {
    /// `edges` is an undirected edge list over pattern vertices `0..size`.
    pub fn new(size: usize, edges: &[(usize, usize)], host: &'a ResourceNetwork) -> Self {
        Self::with_mode(size, edges, host, MatchMode::Monomorphism)
    }

    pub fn with_mode(
        size: usize,
        edges: &[(usize, usize)],
        host: &'a ResourceNetwork,
        mode: MatchMode,
    ) -> Self {
        let mut adj = vec![Vec::new(); size];
        for &(a, b) in edges {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let order = matching_order(&adj, &degree);
        let mut position = vec![0; size];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut earlier_adjacent = Vec::with_capacity(size);
        let mut earlier_apart = Vec::with_capacity(size);
        for (i, &v) in order.iter().enumerate() {
            let mut near: Vec<usize> = adj[v].iter().copied().filter(|&w| position[w] < i).collect();
            near.sort_by_key(|&w| position[w]);
            let apart = order[..i]
                .iter()
                .copied()
                .filter(|w| !adj[v].contains(w))
                .collect();
            earlier_adjacent.push(near);
            earlier_apart.push(apart);
        }
        let mut matcher = Monomorphisms {
            host,
            mode,
            order,
            degree,
            earlier_adjacent,
            earlier_apart,
            filter: (|_, _| true) as NodeFilter,
            mapping: vec![None; size],
            used: vec![false; host.len()],
            stack: Vec::new(),
        };
        if size > 0 && size <= host.len() {
            let first = matcher.candidates(0);
            matcher.stack.push(Frame {
                candidates: first,
                next: 0,
            });
        }
        matcher
    }

    /// Restricts which host node may receive a pattern vertex.
    ///
    /// The filter is applied while extending partial matches, so rejected
    /// nodes prune whole subtrees of the search.
    pub fn with_filter<G: Fn(usize, usize) -> bool>(self, filter: G) -> Monomorphisms<'a, G> {
        Monomorphisms {
            host: self.host,
            mode: self.mode,
            order: self.order,
            degree: self.degree,
            earlier_adjacent: self.earlier_adjacent,
            earlier_apart: self.earlier_apart,
            filter,
            mapping: self.mapping,
            used: self.used,
            stack: self.stack,
        }
    }
}

impl<F> Monomorphisms<'_, F> {
    fn candidates(&self, depth: usize) -> Vec<usize> {
        match self.earlier_adjacent[depth].first() {
            Some(&parent) => {
                let anchor = self.mapping[parent].expect("parent matched before child");
                self.host.neighbors(anchor).to_vec()
            }
            None => (0..self.host.len()).collect(),
        }
    }
}

impl<F: Fn(usize, usize) -> bool> Monomorphisms<'_, F> {
    fn admissible(&self, depth: usize, node: usize) -> bool {
        let v = self.order[depth];
        if self.used[node] || self.host.neighbors(node).len() < self.degree[v] {
            return false;
        }
        let linked = |w: usize| {
            let image = self.mapping[w].expect("earlier vertex is matched");
            self.host.has_link(image, node)
        };
        if !self.earlier_adjacent[depth].iter().all(|&w| linked(w)) {
            return false;
        }
        if self.mode == MatchMode::Induced && self.earlier_apart[depth].iter().any(|&w| linked(w)) {
            return false;
        }
        (self.filter)(v, node)
    }
}

impl<F: Fn(usize, usize) -> bool> Iterator for Monomorphisms<'_, F> {
    type Item = CandidateMapping;

    fn next(&mut self) -> Option<CandidateMapping> {
        loop {
            let depth = self.stack.len().checked_sub(1)?;
            let v = self.order[depth];
            if let Some(prev) = self.mapping[v].take() {
                self.used[prev] = false;
            }
            let frame = &mut self.stack[depth];
            let Some(&node) = frame.candidates.get(frame.next) else {
                self.stack.pop();
                continue;
            };
            frame.next += 1;
            if !self.admissible(depth, node) {
                continue;
            }
            self.mapping[v] = Some(node);
            self.used[node] = true;
            if depth + 1 == self.order.len() {
                return Some(CandidateMapping {
                    mapping: self.mapping.iter().map(|m| m.unwrap()).collect(),
                });
            }
            let candidates = self.candidates(depth + 1);
            self.stack.push(Frame {
                candidates,
                next: 0,
            });
        }
    }
}

/// Highest-degree vertex first, then breadth-first; neighbors are queued by
/// descending degree, ties by index. Restarts on any unreached component.
fn matching_order(adj: &[Vec<usize>], degree: &[usize]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let root = (0..n)
            .filter(|&v| !seen[v])
            .max_by_key(|&v| (degree[v], std::cmp::Reverse(v)))
            .unwrap();
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (std::cmp::Reverse(degree[w]), w));
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order
}

/// Every embedding of the workflow skeleton, ignoring qubit capacity.
pub fn enumerate_monomorphisms<'a>(
    workflow: &Workflow,
    host: &'a ResourceNetwork,
) -> Monomorphisms<'a> {
    Monomorphisms::new(workflow.tasks.len(), &workflow.skeleton(), host)
}

/// Embeddings whose nodes also have enough qubits for their tasks.
pub fn feasible_monomorphisms<'a>(
    workflow: &'a Workflow,
    host: &'a ResourceNetwork,
    mode: MatchMode,
) -> Monomorphisms<'a, impl Fn(usize, usize) -> bool + 'a> {
    Monomorphisms::with_mode(workflow.tasks.len(), &workflow.skeleton(), host, mode)
        .with_filter(move |task, node| workflow.tasks[task].qubits <= host.nodes[node].qubits)
}

/// Link and qubit constraints for a candidate mapping.
pub fn mapping_feasible(
    mapping: &CandidateMapping,
    workflow: &Workflow,
    network: &ResourceNetwork,
) -> bool {
    crate::model::validate_assignment(workflow, network, &mapping.mapping).unwrap_or(false)
}
