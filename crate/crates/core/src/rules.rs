//! Conditional rules `L <- K -> R` with relabelling and root annotations.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::graph::{EdgeMark, NodeMark};
use crate::labels::{RuleLabel, VarId, VarType};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleNode {
    pub id: String,
    pub label: RuleLabel,
    pub mark: NodeMark,
    pub rooted: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub label: RuleLabel,
    pub mark: EdgeMark,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RuleGraph {
    pub nodes: Vec<RuleNode>,
    pub edges: Vec<RuleEdge>,
}

impl RuleGraph {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Condition {
    Edge(String, String),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    ListEq(RuleLabel, RuleLabel),
    ListNeq(RuleLabel, RuleLabel),
}

impl Condition {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Condition)) {
        f(self);
        match self {
            Condition::Not(c) => c.visit(f),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub name: String,
    pub variables: Vec<(String, VarType)>,
    pub lhs: RuleGraph,
    pub rhs: RuleGraph,
    /// Ids of nodes preserved by the rule; they occur in both sides.
    pub interface: Vec<String>,
    pub condition: Option<Condition>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleClass {
    /// Every left-hand component contains a root.
    Fast,
    Slow,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleDiagnostic {
    pub rule: String,
    pub reason: String,
}

impl fmt::Display for RuleDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule `{}`: {}", self.rule, self.reason)
    }
}

impl Rule {
    pub fn is_interface(&self, id: &str) -> bool {
        self.interface.iter().any(|i| i == id)
    }

    pub fn var_name(&self, id: VarId) -> &str {
        self.variables
            .get(id.0 as usize)
            .map(|(n, _)| n.as_str())
            .unwrap_or("?")
    }

    /// The rule with left and right sides swapped. Conditions are dropped.
    pub fn inverse(&self) -> Rule {
        Rule {
            name: format!("{}_inv", self.name),
            variables: self.variables.clone(),
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            interface: self.interface.clone(),
            condition: None,
        }
    }

    /// Whether this rule deletes at least one left-hand node.
    pub fn deletes_nodes(&self) -> bool {
        self.lhs.nodes.iter().any(|n| !self.is_interface(&n.id))
    }
}

pub fn validate_rule(r: &Rule) -> Vec<RuleDiagnostic> {
    let mut out = Vec::new();
    let mut diag = |reason: String| {
        out.push(RuleDiagnostic {
            rule: r.name.clone(),
            reason,
        })
    };

    let mut declared = HashSet::new();
    for (name, _) in &r.variables {
        if !declared.insert(name.as_str()) {
            diag(format!("variable `{name}` declared twice"));
        }
    }

    for (side, g) in [("left", &r.lhs), ("right", &r.rhs)] {
        let mut ids = HashSet::new();
        for n in &g.nodes {
            if !ids.insert(n.id.as_str()) {
                diag(format!("duplicate node id `{}` in {side} side", n.id));
            }
        }
        let mut edge_ids = HashSet::new();
        for e in &g.edges {
            if !edge_ids.insert(e.id.as_str()) {
                diag(format!("duplicate edge id `{}` in {side} side", e.id));
            }
            for end in [&e.source, &e.target] {
                if !ids.contains(end.as_str()) {
                    diag(format!("edge `{}` in {side} side references unknown node `{end}`", e.id));
                }
            }
        }
        let labels = g
            .nodes
            .iter()
            .map(|n| (&n.id, &n.label))
            .chain(g.edges.iter().map(|e| (&e.id, &e.label)));
        for (id, label) in labels {
            if label.list_var_count() > 1 {
                diag(format!("label of `{id}` in {side} side has more than one list variable"));
            }
            for v in label.vars() {
                if v.0 as usize >= r.variables.len() {
                    diag(format!("label of `{id}` uses an undeclared variable"));
                }
            }
        }
    }

    let mut seen_interface = HashSet::new();
    for id in &r.interface {
        if !seen_interface.insert(id.as_str()) {
            diag(format!("interface lists `{id}` twice"));
        }
        if r.lhs.node_index(id).is_none() || r.rhs.node_index(id).is_none() {
            diag(format!("interface node `{id}` must occur in both sides"));
        }
    }
    for n in &r.rhs.nodes {
        if r.lhs.node_index(&n.id).is_some() && !r.is_interface(&n.id) {
            diag(format!("node `{}` occurs in both sides but not in the interface", n.id));
        }
    }

    let lhs_vars: HashSet<VarId> = r
        .lhs
        .nodes
        .iter()
        .map(|n| &n.label)
        .chain(r.lhs.edges.iter().map(|e| &e.label))
        .flat_map(|l| l.vars())
        .collect();
    let mut unbound = Vec::new();
    for label in r
        .rhs
        .nodes
        .iter()
        .map(|n| &n.label)
        .chain(r.rhs.edges.iter().map(|e| &e.label))
    {
        unbound.extend(label.vars().filter(|v| !lhs_vars.contains(v)));
    }

    if let Some(cond) = &r.condition {
        cond.visit(&mut |c| match c {
            Condition::Edge(a, b) => {
                for id in [a, b] {
                    if r.lhs.node_index(id).is_none() {
                        diag(format!("condition refers to unknown left-hand node `{id}`"));
                    }
                }
            }
            Condition::ListEq(a, b) | Condition::ListNeq(a, b) => {
                unbound.extend(a.vars().chain(b.vars()).filter(|v| !lhs_vars.contains(v)));
            }
            _ => {}
        });
    }
    let mut reported = HashSet::new();
    for v in unbound {
        if reported.insert(v) {
            diag(format!("unbound variable `{}` (not used in the left-hand side)", r.var_name(v)));
        }
    }
    out
}

/// A rule is fast when every connected component of its left-hand side
/// contains a rooted node.
pub fn classify_rule(r: &Rule) -> RuleClass {
    let index: HashMap<&str, usize> = r
        .lhs
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..r.lhs.nodes.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in &r.lhs.edges {
        if let (Some(&a), Some(&b)) = (index.get(e.source.as_str()), index.get(e.target.as_str())) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let mut rooted_components = HashSet::new();
    for (i, n) in r.lhs.nodes.iter().enumerate() {
        if n.rooted {
            rooted_components.insert(find(&mut parent, i));
        }
    }
    let all_rooted = (0..r.lhs.nodes.len()).all(|i| rooted_components.contains(&find(&mut parent, i)));
    if all_rooted {
        RuleClass::Fast
    } else {
        RuleClass::Slow
    }
}
