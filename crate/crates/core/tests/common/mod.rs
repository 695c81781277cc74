//! Reference oracles and input generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rootgraph::{parse_program, Engine, ExecStatus, Graph, HostLabel, MatchMode, NodeMark, EdgeMark};

/// A plain digraph on nodes `0..n`; parallel edges and loops allowed.
#[derive(Clone, Debug)]
pub struct Digraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new();
        let nodes: Vec<_> = (0..self.n)
            .map(|i| g.add_named_node(Some(format!("v{i}").into()), HostLabel::empty(), NodeMark::None, false))
            .collect();
        for (k, &(s, t)) in self.edges.iter().enumerate() {
            g.add_named_edge(Some(format!("e{k}").into()), nodes[s], nodes[t], HostLabel::empty(), EdgeMark::None);
        }
        g
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == v).count()
    }

    /// Depth-first search for a back edge.
    pub fn is_acyclic(&self) -> bool {
        fn visit(d: &Digraph, v: usize, state: &mut [u8]) -> bool {
            state[v] = 1;
            for &(s, t) in &d.edges {
                if s != v {
                    continue;
                }
                if state[t] == 1 || (state[t] == 0 && !visit(d, t, state)) {
                    return false;
                }
            }
            state[v] = 2;
            true
        }
        let mut state = vec![0u8; self.n];
        (0..self.n).all(|v| state[v] != 0 || visit(self, v, &mut state))
    }

    /// Every node reachable from `u` by a path of length at least one.
    pub fn reachable(&self, u: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            for &(s, t) in &self.edges {
                if s == v && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

pub fn binary_dag_oracle(d: &Digraph) -> bool {
    (0..d.n).all(|v| d.out_degree(v) <= 2) && d.is_acyclic()
}

/// Rooted tree with edges directed away from the root, checked with
/// union-find for connectivity.
pub fn tree_oracle(d: &Digraph) -> bool {
    if d.n == 0 || d.edges.len() != d.n - 1 {
        return false;
    }
    let sources = (0..d.n).filter(|&v| d.in_degree(v) == 0).count();
    if sources != 1 || (0..d.n).any(|v| d.in_degree(v) > 1) {
        return false;
    }
    let mut parent: Vec<usize> = (0..d.n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = d.n;
    for &(s, t) in &d.edges {
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

/// Edge pairs after closing under `u -> v -> w` with `u != w`, via
/// Warshall's algorithm. Loops survive only if present in the input.
pub fn closure_oracle(d: &Digraph) -> BTreeSet<(usize, usize)> {
    let mut r = vec![vec![false; d.n]; d.n];
    for &(s, t) in &d.edges {
        r[s][t] = true;
    }
    for k in 0..d.n {
        for i in 0..d.n {
            if r[i][k] {
                for j in 0..d.n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..d.n {
        for j in 0..d.n {
            if r[i][j] && (i != j || d.edges.contains(&(i, i))) {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Edge pairs of `g`, with nodes identified by their `v<i>` names.
pub fn edge_pairs(g: &Graph) -> Vec<(usize, usize)> {
    let idx = |h| g.node(h).name().unwrap()[1..].parse::<usize>().unwrap();
    let mut out: Vec<_> = g
        .nodes()
        .flat_map(|n| g.out_edges(n))
        .map(|e| (idx(g.edge(e).source()), idx(g.edge(e).target())))
        .collect();
    out.sort_unstable();
    out
}

pub fn uniform_digraph(rng: &mut ChaCha8Rng, max_nodes: usize, parallel: bool) -> Digraph {
    let n = rng.gen_range(0..=max_nodes);
    let p = rng.gen_range(0.05..0.5);
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if rng.gen_bool(p) {
                edges.push((s, t));
                if parallel && rng.gen_bool(0.1) {
                    edges.push((s, t));
                }
            }
        }
    }
    Digraph { n, edges }
}

/// A random rooted tree, edges parent to child.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize, max_children: usize) -> Digraph {
    let n = rng.gen_range(1..=max_nodes);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut children = vec![0; n];
    let mut edges = Vec::new();
    for i in 1..n {
        let candidates: Vec<usize> = (0..i).filter(|&j| children[j] < max_children).collect();
        let j = candidates[rng.gen_range(0..candidates.len())];
        children[j] += 1;
        edges.push((perm[j], perm[i]));
    }
    Digraph { n, edges }
}

/// A random DAG: edges only go forward in a hidden topological order.
pub fn random_dag(rng: &mut ChaCha8Rng, max_nodes: usize) -> Digraph {
    let n = rng.gen_range(1..=max_nodes);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for _ in 0..rng.gen_range(0..=2) {
            if i + 1 < n {
                let j = rng.gen_range(i + 1..n);
                edges.push((perm[i], perm[j]));
            }
        }
    }
    Digraph { n, edges }
}

/// Adds, removes or reverses one edge.
pub fn perturb(rng: &mut ChaCha8Rng, mut d: Digraph) -> Digraph {
    match rng.gen_range(0..3) {
        0 if d.n > 0 => d.edges.push((rng.gen_range(0..d.n), rng.gen_range(0..d.n))),
        1 if !d.edges.is_empty() => {
            let i = rng.gen_range(0..d.edges.len());
            d.edges.remove(i);
        }
        _ if !d.edges.is_empty() => {
            let i = rng.gen_range(0..d.edges.len());
            d.edges[i] = (d.edges[i].1, d.edges[i].0);
        }
        _ => {}
    }
    d
}

pub fn engine(src: &str, mode: MatchMode) -> Engine {
    Engine::new(&parse_program(src).expect("program parses"), mode).expect("program is valid")
}

/// Runs a reduction program; acceptance means success with an empty result
/// (or any success when `need_empty` is false).
pub fn accepts(src: &str, mode: MatchMode, g: &mut Graph, need_empty: bool) -> bool {
    let status = engine(src, mode).run(g).expect("no step limit");
    status == ExecStatus::Success && (!need_empty || g.is_empty())
}
