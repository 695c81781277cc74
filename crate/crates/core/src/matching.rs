//! Search plans, injective matching and rule application.
//!
//! A rule is compiled into index-based form once. Its search plan starts
//! every left-hand component at a rooted node when one exists and then
//! extends along oriented edge lists: outgoing edges of a matched source or
//! incoming edges of a matched target. Components without roots fall back to
//! a scan of the node list.

use std::fmt;

use crate::graph::{EdgeHandle, EdgeMark, Graph, NodeHandle, NodeMark};
use crate::interpreter::UndoLog;
use crate::labels::{instantiate, match_label, Binding, RuleLabel};
use crate::rules::{classify_rule, Condition, Rule, RuleClass};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum MatchMode {
    /// Rooted pattern nodes must map to host roots.
    Preserving,
    /// Additionally, unrooted pattern nodes must map to non-roots.
    #[default]
    Reflecting,
}

impl MatchMode {
    pub fn parse(s: &str) -> Option<MatchMode> {
        match s {
            "preserving" => Some(MatchMode::Preserving),
            "reflecting" => Some(MatchMode::Reflecting),
            _ => None,
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Preserving => "preserving",
            MatchMode::Reflecting => "reflecting",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PatternNode {
    pub label: RuleLabel,
    pub mark: NodeMark,
    pub rooted: bool,
    pub out_count: u32,
    pub in_count: u32,
    /// Index of the corresponding right-hand node, if preserved.
    pub image: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PatternEdge {
    pub source: usize,
    pub target: usize,
    pub label: RuleLabel,
    pub mark: EdgeMark,
}

#[derive(Clone, Debug)]
pub struct ResultNode {
    pub label: RuleLabel,
    pub mark: NodeMark,
    pub rooted: bool,
    /// Index of the corresponding left-hand node, if preserved.
    pub origin: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum CompiledCondition {
    Edge(usize, usize),
    Not(Box<CompiledCondition>),
    And(Box<CompiledCondition>, Box<CompiledCondition>),
    Or(Box<CompiledCondition>, Box<CompiledCondition>),
    ListEq(RuleLabel, RuleLabel),
    ListNeq(RuleLabel, RuleLabel),
}

/// Index-based form of a validated rule.
#[derive(Clone, Debug)]
pub struct CompiledRule {
    pub name: String,
    pub var_count: usize,
    pub lhs_nodes: Vec<PatternNode>,
    pub lhs_edges: Vec<PatternEdge>,
    pub rhs_nodes: Vec<ResultNode>,
    pub rhs_edges: Vec<PatternEdge>,
    pub condition: Option<CompiledCondition>,
    pub class: RuleClass,
    pub deletes_nodes: bool,
}

impl CompiledRule {
    /// Compiles a rule. The rule must have passed validation.
    pub fn compile(r: &Rule) -> CompiledRule {
        let lhs_idx = |id: &str| r.lhs.node_index(id).expect("validated rule");
        let rhs_idx = |id: &str| r.rhs.node_index(id).expect("validated rule");
        let mut lhs_nodes: Vec<PatternNode> = r
            .lhs
            .nodes
            .iter()
            .map(|n| PatternNode {
                label: n.label.clone(),
                mark: n.mark,
                rooted: n.rooted,
                out_count: 0,
                in_count: 0,
                image: r.is_interface(&n.id).then(|| rhs_idx(&n.id)),
            })
            .collect();
        let lhs_edges: Vec<PatternEdge> = r
            .lhs
            .edges
            .iter()
            .map(|e| PatternEdge {
                source: lhs_idx(&e.source),
                target: lhs_idx(&e.target),
                label: e.label.clone(),
                mark: e.mark,
            })
            .collect();
        for e in &lhs_edges {
            lhs_nodes[e.source].out_count += 1;
            lhs_nodes[e.target].in_count += 1;
        }
        let rhs_nodes = r
            .rhs
            .nodes
            .iter()
            .map(|n| ResultNode {
                label: n.label.clone(),
                mark: n.mark,
                rooted: n.rooted,
                origin: r.is_interface(&n.id).then(|| lhs_idx(&n.id)),
            })
            .collect();
        let rhs_edges = r
            .rhs
            .edges
            .iter()
            .map(|e| PatternEdge {
                source: rhs_idx(&e.source),
                target: rhs_idx(&e.target),
                label: e.label.clone(),
                mark: e.mark,
            })
            .collect();
        fn cond(c: &Condition, idx: &dyn Fn(&str) -> usize) -> CompiledCondition {
            match c {
                Condition::Edge(a, b) => CompiledCondition::Edge(idx(a), idx(b)),
                Condition::Not(c) => CompiledCondition::Not(Box::new(cond(c, idx))),
                Condition::And(a, b) => CompiledCondition::And(Box::new(cond(a, idx)), Box::new(cond(b, idx))),
                Condition::Or(a, b) => CompiledCondition::Or(Box::new(cond(a, idx)), Box::new(cond(b, idx))),
                Condition::ListEq(a, b) => CompiledCondition::ListEq(a.clone(), b.clone()),
                Condition::ListNeq(a, b) => CompiledCondition::ListNeq(a.clone(), b.clone()),
            }
        }
        CompiledRule {
            name: r.name.clone(),
            var_count: r.variables.len(),
            lhs_nodes,
            lhs_edges,
            rhs_nodes,
            rhs_edges,
            condition: r.condition.as_ref().map(|c| cond(c, &lhs_idx)),
            class: classify_rule(r),
            deletes_nodes: r.deletes_nodes(),
        }
    }
}

/// One step of a search plan. Node and edge operands index the rule's
/// left-hand side.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Instruction {
    MatchRoot(usize),
    MatchAnyNode(usize),
    /// Follow an outgoing edge of matched `from` to unmatched `to`.
    ExtendOut { edge: usize, from: usize, to: usize },
    /// Follow an incoming edge of matched `from` back to unmatched `to`.
    ExtendIn { edge: usize, from: usize, to: usize },
    MatchEdgeBetween { edge: usize, source: usize, target: usize },
    CheckCondition,
    CheckDangling,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchPlan {
    pub instructions: Vec<Instruction>,
}

pub fn build_search_plan(rule: &CompiledRule) -> SearchPlan {
    let n = rule.lhs_nodes.len();
    let mut matched = vec![false; n];
    let mut edge_done = vec![false; rule.lhs_edges.len()];
    let mut out = Vec::new();

    // Components in order of their first node; rooted components first.
    let mut comp = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            for e in &rule.lhs_edges {
                for (a, b) in [(e.source, e.target), (e.target, e.source)] {
                    if a == v && comp[b] == usize::MAX {
                        comp[b] = id;
                        members.push(b);
                    }
                }
            }
            i += 1;
        }
        members.sort_unstable();
        components.push(members);
    }
    components.sort_by_key(|members| !members.iter().any(|&v| rule.lhs_nodes[v].rooted));

    for members in &components {
        let anchor = members
            .iter()
            .copied()
            .find(|&v| rule.lhs_nodes[v].rooted)
            .map(|v| (v, true))
            .unwrap_or((members[0], false));
        out.push(if anchor.1 {
            Instruction::MatchRoot(anchor.0)
        } else {
            Instruction::MatchAnyNode(anchor.0)
        });
        matched[anchor.0] = true;
        loop {
            // Closing edges between matched nodes prune cheapest, so take
            // those before extending.
            let closing = (0..rule.lhs_edges.len()).find(|&i| {
                let e = &rule.lhs_edges[i];
                !edge_done[i] && matched[e.source] && matched[e.target]
            });
            if let Some(i) = closing {
                let e = &rule.lhs_edges[i];
                out.push(Instruction::MatchEdgeBetween {
                    edge: i,
                    source: e.source,
                    target: e.target,
                });
                edge_done[i] = true;
                continue;
            }
            let extend = (0..rule.lhs_edges.len()).find(|&i| {
                let e = &rule.lhs_edges[i];
                !edge_done[i] && (matched[e.source] || matched[e.target])
            });
            match extend {
                Some(i) => {
                    let e = &rule.lhs_edges[i];
                    if matched[e.source] {
                        out.push(Instruction::ExtendOut {
                            edge: i,
                            from: e.source,
                            to: e.target,
                        });
                        matched[e.target] = true;
                    } else {
                        out.push(Instruction::ExtendIn {
                            edge: i,
                            from: e.target,
                            to: e.source,
                        });
                        matched[e.source] = true;
                    }
                    edge_done[i] = true;
                }
                None => break,
            }
        }
    }
    if rule.condition.is_some() {
        out.push(Instruction::CheckCondition);
    }
    if rule.deletes_nodes {
        out.push(Instruction::CheckDangling);
    }
    SearchPlan { instructions: out }
}

/// An injective morphism from a rule's left-hand side into the host graph.
#[derive(Clone, Debug)]
pub struct Match {
    pub nodes: Vec<NodeHandle>,
    pub edges: Vec<EdgeHandle>,
    pub env: Binding,
}

struct Matcher<'a> {
    graph: &'a Graph,
    rule: &'a CompiledRule,
    plan: &'a [Instruction],
    mode: MatchMode,
    nodes: Vec<Option<NodeHandle>>,
    edges: Vec<Option<EdgeHandle>>,
    env: Binding,
}

impl<'a> Matcher<'a> {
    fn node_used(&self, h: NodeHandle) -> bool {
        self.nodes.contains(&Some(h))
    }

    fn edge_used(&self, h: EdgeHandle) -> bool {
        self.edges.contains(&Some(h))
    }

    /// Structural checks for mapping pattern node `p` to `h`, excluding the
    /// label (which binds variables).
    fn node_fits(&self, p: usize, h: NodeHandle) -> bool {
        let pat = &self.rule.lhs_nodes[p];
        let node = self.graph.node(h);
        if node.mark() != pat.mark {
            return false;
        }
        if pat.rooted && !node.is_root() {
            return false;
        }
        if self.mode == MatchMode::Reflecting && !pat.rooted && node.is_root() {
            return false;
        }
        let (out, inc) = (node.outdegree() as u32, node.indegree() as u32);
        let degrees_ok = if pat.image.is_none() {
            // a deleted node keeps no unmatched incident edges
            out == pat.out_count && inc == pat.in_count
        } else {
            out >= pat.out_count && inc >= pat.in_count
        };
        degrees_ok && !self.node_used(h)
    }

    fn edge_fits(&self, p: usize, h: EdgeHandle) -> bool {
        self.graph.edge(h).mark() == self.rule.lhs_edges[p].mark && !self.edge_used(h)
    }

    fn try_node(&mut self, pc: usize, p: usize, h: NodeHandle) -> bool {
        if !self.node_fits(p, h) {
            return false;
        }
        let mark = self.env.checkpoint();
        if !match_label(&self.rule.lhs_nodes[p].label, self.graph.node(h).label(), &mut self.env) {
            return false;
        }
        self.nodes[p] = Some(h);
        if self.search(pc + 1) {
            return true;
        }
        self.nodes[p] = None;
        self.env.restore(mark);
        false
    }

    fn try_edge(&mut self, pc: usize, p: usize, h: EdgeHandle, node: Option<(usize, NodeHandle)>) -> bool {
        if !self.edge_fits(p, h) {
            return false;
        }
        if let Some((pn, hn)) = node {
            if !self.node_fits(pn, hn) {
                return false;
            }
        }
        let mark = self.env.checkpoint();
        if !match_label(&self.rule.lhs_edges[p].label, self.graph.edge(h).label(), &mut self.env) {
            return false;
        }
        if let Some((pn, hn)) = node {
            if !match_label(&self.rule.lhs_nodes[pn].label, self.graph.node(hn).label(), &mut self.env) {
                self.env.restore(mark);
                return false;
            }
            self.nodes[pn] = Some(hn);
        }
        self.edges[p] = Some(h);
        if self.search(pc + 1) {
            return true;
        }
        self.edges[p] = None;
        if let Some((pn, _)) = node {
            self.nodes[pn] = None;
        }
        self.env.restore(mark);
        false
    }

    fn search(&mut self, pc: usize) -> bool {
        let Some(&instr) = self.plan.get(pc) else {
            return true;
        };
        let g = self.graph;
        match instr {
            Instruction::MatchRoot(p) => g.roots().any(|h| self.try_node(pc, p, h)),
            Instruction::MatchAnyNode(p) => g.nodes().any(|h| self.try_node(pc, p, h)),
            Instruction::ExtendOut { edge, from, to } => {
                let host = self.nodes[from].expect("plan order");
                g.out_edges(host)
                    .any(|e| self.try_edge(pc, edge, e, Some((to, g.edge(e).target()))))
            }
            Instruction::ExtendIn { edge, from, to } => {
                let host = self.nodes[from].expect("plan order");
                g.in_edges(host)
                    .any(|e| self.try_edge(pc, edge, e, Some((to, g.edge(e).source()))))
            }
            Instruction::MatchEdgeBetween { edge, source, target } => {
                let s = self.nodes[source].expect("plan order");
                let t = self.nodes[target].expect("plan order");
                if g.node(s).outdegree() <= g.node(t).indegree() {
                    g.out_edges(s)
                        .filter(|&e| g.edge(e).target() == t)
                        .any(|e| self.try_edge(pc, edge, e, None))
                } else {
                    g.in_edges(t)
                        .filter(|&e| g.edge(e).source() == s)
                        .any(|e| self.try_edge(pc, edge, e, None))
                }
            }
            Instruction::CheckCondition => {
                let cond = self.rule.condition.as_ref().expect("plan has condition");
                self.eval(cond) && self.search(pc + 1)
            }
            Instruction::CheckDangling => self.dangling_ok() && self.search(pc + 1),
        }
    }

    fn dangling_ok(&self) -> bool {
        self.rule.lhs_nodes.iter().enumerate().all(|(i, p)| {
            if p.image.is_some() {
                return true;
            }
            let node = self.graph.node(self.nodes[i].expect("complete match"));
            node.outdegree() == p.out_count as usize && node.indegree() == p.in_count as usize
        })
    }

    fn eval(&self, c: &CompiledCondition) -> bool {
        match c {
            CompiledCondition::Edge(a, b) => {
                let (s, t) = (self.nodes[*a].unwrap(), self.nodes[*b].unwrap());
                let g = self.graph;
                g.out_edges(s).any(|e| g.edge(e).target() == t)
            }
            CompiledCondition::Not(c) => !self.eval(c),
            CompiledCondition::And(a, b) => self.eval(a) && self.eval(b),
            CompiledCondition::Or(a, b) => self.eval(a) || self.eval(b),
            CompiledCondition::ListEq(a, b) => instantiate(a, &self.env) == instantiate(b, &self.env),
            CompiledCondition::ListNeq(a, b) => instantiate(a, &self.env) != instantiate(b, &self.env),
        }
    }
}

/// Finds the first match in plan order, scanning roots, the node list and
/// edge lists in their stored order.
pub fn find_match(g: &Graph, rule: &CompiledRule, plan: &SearchPlan, mode: MatchMode) -> Option<Match> {
    let mut m = Matcher {
        graph: g,
        rule,
        plan: &plan.instructions,
        mode,
        nodes: vec![None; rule.lhs_nodes.len()],
        edges: vec![None; rule.lhs_edges.len()],
        env: Binding::new(rule.var_count),
    };
    if m.search(0) {
        Some(Match {
            nodes: m.nodes.into_iter().map(|n| n.expect("complete match")).collect(),
            edges: m.edges.into_iter().map(|e| e.expect("complete match")).collect(),
            env: m.env,
        })
    } else {
        None
    }
}

/// Applies `rule` at match `m`, recording every mutation in `log`.
///
/// Deletes all matched edges and the non-interface nodes, updates interface
/// nodes to their right-hand labels, marks and rootedness, then creates the
/// right-hand-only nodes and all right-hand edges.
pub fn apply(g: &mut Graph, rule: &CompiledRule, m: &Match, log: &mut UndoLog) {
    for &e in &m.edges {
        log.delete_edge(g, e);
    }
    for (i, p) in rule.lhs_nodes.iter().enumerate() {
        if p.image.is_none() {
            log.delete_node(g, m.nodes[i]);
        }
    }
    let mut images: Vec<Option<NodeHandle>> = vec![None; rule.rhs_nodes.len()];
    for (j, r) in rule.rhs_nodes.iter().enumerate() {
        let label = instantiate(&r.label, &m.env).expect("rule is left-complete");
        match r.origin {
            Some(i) => {
                let h = m.nodes[i];
                images[j] = Some(h);
                if g.node(h).label() != &label {
                    log.relabel_node(g, h, label);
                }
                if g.node(h).mark() != r.mark {
                    log.set_node_mark(g, h, r.mark);
                }
                if rule.lhs_nodes[i].rooted != r.rooted {
                    log.set_root(g, h, r.rooted);
                }
            }
            None => images[j] = Some(log.add_node(g, label, r.mark, r.rooted)),
        }
    }
    for e in &rule.rhs_edges {
        let label = instantiate(&e.label, &m.env).expect("rule is left-complete");
        let (s, t) = (images[e.source].unwrap(), images[e.target].unwrap());
        log.add_edge(g, s, t, label, e.mark);
    }
}

/// Independent morphism checker used by tests and debug assertions.
pub fn check_match(g: &Graph, rule: &CompiledRule, m: &Match, mode: MatchMode) -> Result<(), String> {
    let mut seen = std::collections::HashSet::new();
    for &n in &m.nodes {
        if !g.is_live_node(n) || !seen.insert(n) {
            return Err(format!("node map not injective or dead at {n}"));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for &e in &m.edges {
        if !g.is_live_edge(e) || !seen.insert(e) {
            return Err(format!("edge map not injective or dead at {e}"));
        }
    }
    let mut env = Binding::new(rule.var_count);
    for (i, p) in rule.lhs_nodes.iter().enumerate() {
        let node = g.node(m.nodes[i]);
        if node.mark() != p.mark {
            return Err(format!("mark mismatch at lhs node {i}"));
        }
        if p.rooted && !node.is_root() {
            return Err(format!("rooted lhs node {i} mapped to non-root"));
        }
        if mode == MatchMode::Reflecting && !p.rooted && node.is_root() {
            return Err(format!("unrooted lhs node {i} mapped to root in reflecting mode"));
        }
        if !match_label(&p.label, node.label(), &mut env) {
            return Err(format!("label mismatch at lhs node {i}"));
        }
    }
    for (i, p) in rule.lhs_edges.iter().enumerate() {
        let edge = g.edge(m.edges[i]);
        if edge.source() != m.nodes[p.source] || edge.target() != m.nodes[p.target] {
            return Err(format!("lhs edge {i} endpoints do not commute"));
        }
        if edge.mark() != p.mark {
            return Err(format!("mark mismatch at lhs edge {i}"));
        }
        if !match_label(&p.label, edge.label(), &mut env) {
            return Err(format!("label mismatch at lhs edge {i}"));
        }
    }
    for (i, p) in rule.lhs_nodes.iter().enumerate() {
        if p.image.is_some() {
            continue;
        }
        let h = m.nodes[i];
        let matched: std::collections::HashSet<EdgeHandle> = m.edges.iter().copied().collect();
        let dangling = g.out_edges(h).chain(g.in_edges(h)).any(|e| !matched.contains(&e));
        if dangling {
            return Err(format!("deleting lhs node {i} would leave dangling edges"));
        }
    }
    Ok(())
}
