//! Mutable host graph.
//!
//! Nodes, edges and node-list entries live in [`BigArray`]s, so a handle is
//! a stable slot index for the element's whole lifetime. Live nodes are
//! threaded through a doubly linked node list, roots through a separate
//! doubly linked root list, and every node keeps its own array of edge-list
//! entries forming an outgoing list and an incoming list.
//!
//! Deletion unlinks an element but leaves its own link fields untouched.
//! When the undo log replays deletions in reverse order, the neighbours
//! recorded in those fields are exactly the neighbours at unlink time, so
//! relinking restores the original list order.
//!
//! Storage is reclaimed only once an element is neither in the graph nor
//! referenced by the undo log.

use std::cell::Cell;
use std::fmt;

use crate::bigarray::{BigArray, SlotIndex};
use crate::labels::HostLabel;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeHandle(pub SlotIndex);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeHandle(pub SlotIndex);

impl fmt::Display for NodeHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node#{}", self.0)
    }
}

impl fmt::Display for EdgeHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge#{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub enum NodeMark {
    #[default]
    None,
    Red,
    Green,
    Blue,
    Grey,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub enum EdgeMark {
    #[default]
    None,
    Red,
    Green,
    Blue,
    Dashed,
}

impl NodeMark {
    pub fn name(self) -> Option<&'static str> {
        match self {
            NodeMark::None => None,
            NodeMark::Red => Some("red"),
            NodeMark::Green => Some("green"),
            NodeMark::Blue => Some("blue"),
            NodeMark::Grey => Some("grey"),
        }
    }

    pub fn from_name(s: &str) -> Option<NodeMark> {
        Some(match s {
            "red" => NodeMark::Red,
            "green" => NodeMark::Green,
            "blue" => NodeMark::Blue,
            "grey" => NodeMark::Grey,
            _ => return None,
        })
    }
}

impl EdgeMark {
    pub fn name(self) -> Option<&'static str> {
        match self {
            EdgeMark::None => None,
            EdgeMark::Red => Some("red"),
            EdgeMark::Green => Some("green"),
            EdgeMark::Blue => Some("blue"),
            EdgeMark::Dashed => Some("dashed"),
        }
    }

    pub fn from_name(s: &str) -> Option<EdgeMark> {
        Some(match s {
            "red" => EdgeMark::Red,
            "green" => EdgeMark::Green,
            "blue" => EdgeMark::Blue,
            "dashed" => EdgeMark::Dashed,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
struct EdgeListEntry {
    edge: EdgeHandle,
    prev: Option<SlotIndex>,
    next: Option<SlotIndex>,
}

#[derive(Clone, Debug)]
struct NodeListEntry {
    node: NodeHandle,
    prev: Option<SlotIndex>,
    next: Option<SlotIndex>,
}

#[derive(Clone, Debug)]
pub struct Node {
    name: Option<Box<str>>,
    label: HostLabel,
    mark: NodeMark,
    is_root: bool,
    in_graph: bool,
    in_log: bool,
    outdegree: u32,
    indegree: u32,
    out_head: Option<SlotIndex>,
    in_head: Option<SlotIndex>,
    edge_entries: BigArray<EdgeListEntry>,
    list_entry: SlotIndex,
    root_prev: Option<NodeHandle>,
    root_next: Option<NodeHandle>,
}

impl Node {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
    pub fn label(&self) -> &HostLabel {
        &self.label
    }
    pub fn mark(&self) -> NodeMark {
        self.mark
    }
    pub fn is_root(&self) -> bool {
        self.is_root
    }
    pub fn outdegree(&self) -> usize {
        self.outdegree as usize
    }
    pub fn indegree(&self) -> usize {
        self.indegree as usize
    }
    pub fn in_graph(&self) -> bool {
        self.in_graph
    }
    pub fn in_log(&self) -> bool {
        self.in_log
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    name: Option<Box<str>>,
    label: HostLabel,
    mark: EdgeMark,
    source: NodeHandle,
    target: NodeHandle,
    out_entry: SlotIndex,
    in_entry: SlotIndex,
    in_out_list: bool,
    in_in_list: bool,
    in_log: bool,
}

impl Edge {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
    pub fn label(&self) -> &HostLabel {
        &self.label
    }
    pub fn mark(&self) -> EdgeMark {
        self.mark
    }
    pub fn source(&self) -> NodeHandle {
        self.source
    }
    pub fn target(&self) -> NodeHandle {
        self.target
    }
    pub fn in_graph(&self) -> bool {
        self.in_out_list && self.in_in_list
    }
    pub fn in_log(&self) -> bool {
        self.in_log
    }
}

#[derive(Default)]
pub struct Graph {
    nodes: BigArray<Node>,
    edges: BigArray<Edge>,
    node_list: BigArray<NodeListEntry>,
    node_list_head: Option<SlotIndex>,
    root_head: Option<NodeHandle>,
    node_count: usize,
    edge_count: usize,
    root_count: usize,
    steps: Cell<u64>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn step(&self) {
        self.steps.set(self.steps.get() + 1);
    }

    /// Instrumented operation count: iteration steps plus mutations.
    pub fn steps(&self) -> u64 {
        self.steps.get()
    }

    pub fn reset_steps(&self) {
        self.steps.set(0);
    }

    pub(crate) fn add_steps(&self, n: u64) {
        self.steps.set(self.steps.get() + n);
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn root_count(&self) -> usize {
        self.root_count
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    #[track_caller]
    pub fn node(&self, n: NodeHandle) -> &Node {
        self.nodes.get(n.0)
    }

    #[track_caller]
    pub fn edge(&self, e: EdgeHandle) -> &Edge {
        self.edges.get(e.0)
    }

    pub fn try_node(&self, n: NodeHandle) -> Option<&Node> {
        self.nodes.try_get(n.0)
    }

    pub fn try_edge(&self, e: EdgeHandle) -> Option<&Edge> {
        self.edges.try_get(e.0)
    }

    pub fn is_live_node(&self, n: NodeHandle) -> bool {
        self.nodes.try_get(n.0).is_some_and(|x| x.in_graph)
    }

    pub fn is_live_edge(&self, e: EdgeHandle) -> bool {
        self.edges.try_get(e.0).is_some_and(Edge::in_graph)
    }

    #[track_caller]
    fn live_node_mut(&mut self, n: NodeHandle) -> &mut Node {
        let node = self.nodes.get_mut(n.0);
        assert!(node.in_graph, "graph: {n} is not live");
        node
    }

    #[track_caller]
    fn live_edge_mut(&mut self, e: EdgeHandle) -> &mut Edge {
        let edge = self.edges.get_mut(e.0);
        assert!(edge.in_graph(), "graph: {e} is not live");
        edge
    }

    pub fn add_node(&mut self, label: HostLabel, mark: NodeMark, root: bool) -> NodeHandle {
        self.add_named_node(None, label, mark, root)
    }

    pub fn add_named_node(
        &mut self,
        name: Option<Box<str>>,
        label: HostLabel,
        mark: NodeMark,
        root: bool,
    ) -> NodeHandle {
        self.step();
        let slot = self.nodes.alloc(Node {
            name,
            label,
            mark,
            is_root: false,
            in_graph: true,
            in_log: false,
            outdegree: 0,
            indegree: 0,
            out_head: None,
            in_head: None,
            edge_entries: BigArray::new(),
            list_entry: SlotIndex(0),
            root_prev: None,
            root_next: None,
        });
        let handle = NodeHandle(slot);
        let entry = self.node_list.alloc(NodeListEntry {
            node: handle,
            prev: None,
            next: self.node_list_head,
        });
        if let Some(old) = self.node_list_head {
            self.node_list.get_mut(old).prev = Some(entry);
        }
        self.node_list_head = Some(entry);
        self.nodes.get_mut(slot).list_entry = entry;
        self.node_count += 1;
        if root {
            self.link_root(handle, None, self.root_head);
        }
        handle
    }

    /// Removes a node with no incident edges.
    ///
    /// Its storage survives while the undo log still references it.
    #[track_caller]
    pub fn delete_node(&mut self, n: NodeHandle) {
        self.step();
        let node = self.live_node_mut(n);
        assert!(
            node.outdegree == 0 && node.indegree == 0,
            "graph: deleting {n} with incident edges"
        );
        node.in_graph = false;
        let entry = node.list_entry;
        let is_root = node.is_root;
        let (rp, rn) = (node.root_prev, node.root_next);
        let in_log = node.in_log;
        self.unlink_node_entry(entry);
        if is_root {
            self.unlink_root(n, rp, rn);
        }
        self.node_count -= 1;
        if !in_log {
            self.reclaim_node(n);
        }
    }

    #[track_caller]
    pub fn add_edge(
        &mut self,
        source: NodeHandle,
        target: NodeHandle,
        label: HostLabel,
        mark: EdgeMark,
    ) -> EdgeHandle {
        self.add_named_edge(None, source, target, label, mark)
    }

    #[track_caller]
    pub fn add_named_edge(
        &mut self,
        name: Option<Box<str>>,
        source: NodeHandle,
        target: NodeHandle,
        label: HostLabel,
        mark: EdgeMark,
    ) -> EdgeHandle {
        self.step();
        assert!(self.is_live_node(source), "graph: edge source {source} is not live");
        assert!(self.is_live_node(target), "graph: edge target {target} is not live");
        let slot = self.edges.alloc(Edge {
            name,
            label,
            mark,
            source,
            target,
            out_entry: SlotIndex(0),
            in_entry: SlotIndex(0),
            in_out_list: true,
            in_in_list: true,
            in_log: false,
        });
        let e = EdgeHandle(slot);
        let out_entry = push_entry(self.nodes.get_mut(source.0), e, Orientation::Out);
        let in_entry = push_entry(self.nodes.get_mut(target.0), e, Orientation::In);
        let edge = self.edges.get_mut(slot);
        edge.out_entry = out_entry;
        edge.in_entry = in_entry;
        self.edge_count += 1;
        e
    }

    #[track_caller]
    pub fn delete_edge(&mut self, e: EdgeHandle) {
        self.step();
        let edge = self.live_edge_mut(e);
        edge.in_out_list = false;
        edge.in_in_list = false;
        let (s, t, oe, ie, in_log) = (edge.source, edge.target, edge.out_entry, edge.in_entry, edge.in_log);
        unlink_entry(self.nodes.get_mut(s.0), oe, Orientation::Out);
        unlink_entry(self.nodes.get_mut(t.0), ie, Orientation::In);
        self.edge_count -= 1;
        if !in_log {
            self.reclaim_edge(e);
        }
    }

    #[track_caller]
    pub fn relabel_node(&mut self, n: NodeHandle, label: HostLabel) -> HostLabel {
        self.step();
        std::mem::replace(&mut self.live_node_mut(n).label, label)
    }

    #[track_caller]
    pub fn relabel_edge(&mut self, e: EdgeHandle, label: HostLabel) -> HostLabel {
        self.step();
        std::mem::replace(&mut self.live_edge_mut(e).label, label)
    }

    #[track_caller]
    pub fn set_node_mark(&mut self, n: NodeHandle, mark: NodeMark) -> NodeMark {
        self.step();
        std::mem::replace(&mut self.live_node_mut(n).mark, mark)
    }

    #[track_caller]
    pub fn set_edge_mark(&mut self, e: EdgeHandle, mark: EdgeMark) -> EdgeMark {
        self.step();
        std::mem::replace(&mut self.live_edge_mut(e).mark, mark)
    }

    /// Sets the root flag and returns the previous value.
    #[track_caller]
    pub fn set_root(&mut self, n: NodeHandle, root: bool) -> bool {
        self.step();
        let node = self.live_node_mut(n);
        let old = node.is_root;
        if old != root {
            if root {
                self.link_root(n, None, self.root_head);
            } else {
                let (p, q) = (node.root_prev, node.root_next);
                self.unlink_root(n, p, q);
                let node = self.nodes.get_mut(n.0);
                node.is_root = false;
            }
        }
        old
    }

    /// Current neighbours of `n` in the root list.
    pub fn root_links(&self, n: NodeHandle) -> (Option<NodeHandle>, Option<NodeHandle>) {
        let node = self.node(n);
        (node.root_prev, node.root_next)
    }

    /// Re-inserts `n` into the root list between `prev` and `next`.
    ///
    /// Used when undoing an unroot: `prev` and `next` must be adjacent.
    pub(crate) fn relink_root(&mut self, n: NodeHandle, prev: Option<NodeHandle>, next: Option<NodeHandle>) {
        self.step();
        let node = self.live_node_mut(n);
        assert!(!node.is_root, "graph: relinking {n} which is already a root");
        self.link_root(n, prev, next);
    }

    fn link_root(&mut self, n: NodeHandle, prev: Option<NodeHandle>, next: Option<NodeHandle>) {
        {
            let node = self.nodes.get_mut(n.0);
            node.is_root = true;
            node.root_prev = prev;
            node.root_next = next;
        }
        match prev {
            Some(p) => self.nodes.get_mut(p.0).root_next = Some(n),
            None => self.root_head = Some(n),
        }
        if let Some(q) = next {
            self.nodes.get_mut(q.0).root_prev = Some(n);
        }
        self.root_count += 1;
    }

    // Leaves n's own root_prev/root_next and is_root untouched.
    fn unlink_root(&mut self, n: NodeHandle, prev: Option<NodeHandle>, next: Option<NodeHandle>) {
        match prev {
            Some(p) => self.nodes.get_mut(p.0).root_next = next,
            None => {
                debug_assert_eq!(self.root_head, Some(n));
                self.root_head = next;
            }
        }
        if let Some(q) = next {
            self.nodes.get_mut(q.0).root_prev = prev;
        }
        self.root_count -= 1;
    }

    fn unlink_node_entry(&mut self, entry: SlotIndex) {
        let (prev, next) = {
            let e = self.node_list.get(entry);
            (e.prev, e.next)
        };
        match prev {
            Some(p) => self.node_list.get_mut(p).next = next,
            None => self.node_list_head = next,
        }
        if let Some(q) = next {
            self.node_list.get_mut(q).prev = prev;
        }
    }

    fn relink_node_entry(&mut self, entry: SlotIndex) {
        let (prev, next) = {
            let e = self.node_list.get(entry);
            (e.prev, e.next)
        };
        match prev {
            Some(p) => self.node_list.get_mut(p).next = Some(entry),
            None => self.node_list_head = Some(entry),
        }
        if let Some(q) = next {
            self.node_list.get_mut(q).prev = Some(entry);
        }
    }

    fn reclaim_node(&mut self, n: NodeHandle) {
        let node = self.nodes.free(n.0);
        debug_assert!(!node.in_graph && !node.in_log);
        self.node_list.free(node.list_entry);
    }

    fn reclaim_edge(&mut self, e: EdgeHandle) {
        let edge = self.edges.free(e.0);
        debug_assert!(!edge.in_graph() && !edge.in_log);
        // Endpoints of a deleted edge are released after it, so their
        // storage is still present here.
        if let Some(src) = self.nodes.try_get_mut(edge.source.0) {
            src.edge_entries.free(edge.out_entry);
        }
        if let Some(tgt) = self.nodes.try_get_mut(edge.target.0) {
            tgt.edge_entries.free(edge.in_entry);
        }
    }

    /// Marks a node as referenced by the undo log.
    pub(crate) fn retain_node(&mut self, n: NodeHandle) {
        self.nodes.get_mut(n.0).in_log = true;
    }

    pub(crate) fn retain_edge(&mut self, e: EdgeHandle) {
        self.edges.get_mut(e.0).in_log = true;
    }

    /// Drops the undo log's reference; reclaims the node if it is no longer
    /// in the graph.
    pub(crate) fn release_node(&mut self, n: NodeHandle) {
        let node = self.nodes.get_mut(n.0);
        node.in_log = false;
        if !node.in_graph {
            self.reclaim_node(n);
        }
    }

    pub(crate) fn release_edge(&mut self, e: EdgeHandle) {
        let edge = self.edges.get_mut(e.0);
        edge.in_log = false;
        if !edge.in_graph() {
            self.reclaim_edge(e);
        }
    }

    /// Puts a deleted, log-retained node back at its old list positions.
    pub(crate) fn restore_node(&mut self, n: NodeHandle) {
        self.step();
        let node = self.nodes.get_mut(n.0);
        assert!(!node.in_graph && node.in_log, "graph: cannot restore {n}");
        node.in_graph = true;
        let entry = node.list_entry;
        let root = node.is_root.then_some((node.root_prev, node.root_next));
        self.relink_node_entry(entry);
        if let Some((p, q)) = root {
            self.link_root(n, p, q);
        }
        self.node_count += 1;
    }

    pub(crate) fn restore_edge(&mut self, e: EdgeHandle) {
        self.step();
        let edge = self.edges.get_mut(e.0);
        assert!(!edge.in_graph() && edge.in_log, "graph: cannot restore {e}");
        edge.in_out_list = true;
        edge.in_in_list = true;
        let (s, t, oe, ie) = (edge.source, edge.target, edge.out_entry, edge.in_entry);
        assert!(self.is_live_node(s) && self.is_live_node(t), "graph: restoring {e} with dead endpoint");
        relink_entry(self.nodes.get_mut(s.0), oe, Orientation::Out);
        relink_entry(self.nodes.get_mut(t.0), ie, Orientation::In);
        self.edge_count += 1;
    }

    /// Live nodes in list order (most recently added first).
    pub fn nodes(&self) -> NodeIter<'_> {
        NodeIter {
            graph: self,
            cur: self.node_list_head,
        }
    }

    pub fn roots(&self) -> RootIter<'_> {
        RootIter {
            graph: self,
            cur: self.root_head,
        }
    }

    #[track_caller]
    pub fn out_edges(&self, n: NodeHandle) -> EdgeIter<'_> {
        let node = self.node(n);
        EdgeIter {
            graph: self,
            node,
            cur: node.out_head,
        }
    }

    #[track_caller]
    pub fn in_edges(&self, n: NodeHandle) -> EdgeIter<'_> {
        let node = self.node(n);
        EdgeIter {
            graph: self,
            node,
            cur: node.in_head,
        }
    }

    /// Deep, order-sensitive view of the live graph for equality checks.
    pub fn snapshot(&self) -> GraphSnapshot {
        let nodes = self
            .nodes()
            .map(|n| {
                let node = self.node(n);
                NodeSnapshot {
                    handle: n,
                    name: node.name.clone(),
                    label: node.label.clone(),
                    mark: node.mark,
                    root: node.is_root,
                    out: self.out_edges(n).map(|e| self.edge_snapshot(e)).collect(),
                    incoming: self.in_edges(n).collect(),
                }
            })
            .collect();
        GraphSnapshot {
            nodes,
            roots: self.roots().collect(),
        }
    }

    fn edge_snapshot(&self, e: EdgeHandle) -> EdgeSnapshot {
        let edge = self.edge(e);
        EdgeSnapshot {
            handle: e,
            name: edge.name.clone(),
            target: edge.target,
            label: edge.label.clone(),
            mark: edge.mark,
        }
    }

    /// Recomputes every structural invariant from scratch.
    pub fn check_invariants(&self) -> Result<(), String> {
        let saved = self.steps.get();
        let result = self.check_invariants_inner();
        self.steps.set(saved);
        result
    }

    fn check_invariants_inner(&self) -> Result<(), String> {
        let listed: Vec<NodeHandle> = self.nodes().collect();
        if listed.len() != self.node_count {
            return Err(format!("node list has {} entries, count is {}", listed.len(), self.node_count));
        }
        let mut seen = std::collections::HashSet::new();
        let mut out_total = 0;
        let mut in_total = 0;
        for &n in &listed {
            if !seen.insert(n) {
                return Err(format!("{n} listed twice"));
            }
            let node = self.try_node(n).ok_or_else(|| format!("{n} listed but vacant"))?;
            if !node.in_graph {
                return Err(format!("{n} listed but not in graph"));
            }
            let outs: Vec<_> = self.out_edges(n).collect();
            let ins: Vec<_> = self.in_edges(n).collect();
            if outs.len() != node.outdegree() || ins.len() != node.indegree() {
                return Err(format!("{n} degree mismatch"));
            }
            for e in &outs {
                let edge = self.try_edge(*e).ok_or("vacant edge in out list")?;
                if edge.source != n || !edge.in_graph() {
                    return Err(format!("{e} wrongly in out list of {n}"));
                }
                if !self.is_live_node(edge.target) {
                    return Err(format!("{e} dangles"));
                }
            }
            for e in &ins {
                let edge = self.try_edge(*e).ok_or("vacant edge in in list")?;
                if edge.target != n || !edge.in_graph() {
                    return Err(format!("{e} wrongly in in list of {n}"));
                }
            }
            out_total += outs.len();
            in_total += ins.len();
        }
        if out_total != self.edge_count || in_total != self.edge_count {
            return Err(format!("edge count {} vs out {out_total} / in {in_total}", self.edge_count));
        }
        let roots: Vec<_> = self.roots().collect();
        if roots.len() != self.root_count {
            return Err("root count mismatch".into());
        }
        let expected_roots = listed.iter().filter(|n| self.node(**n).is_root).count();
        if expected_roots != roots.len() {
            return Err("root list does not match root flags".into());
        }
        for r in roots {
            if !self.is_live_node(r) || !self.node(r).is_root {
                return Err(format!("{r} in root list but not a live root"));
            }
        }
        Ok(())
    }

    /// Slots currently allocated for nodes, including log-retained ones.
    pub fn node_storage(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_storage(&self) -> usize {
        self.edges.len()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.node_count)
            .field("edges", &self.edge_count)
            .field("roots", &self.root_count)
            .finish()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Orientation {
    Out,
    In,
}

fn head_of(node: &mut Node, o: Orientation) -> &mut Option<SlotIndex> {
    match o {
        Orientation::Out => &mut node.out_head,
        Orientation::In => &mut node.in_head,
    }
}

fn bump_degree(node: &mut Node, o: Orientation, up: bool) {
    let d = match o {
        Orientation::Out => &mut node.outdegree,
        Orientation::In => &mut node.indegree,
    };
    if up {
        *d += 1;
    } else {
        *d -= 1;
    }
}

fn push_entry(node: &mut Node, e: EdgeHandle, o: Orientation) -> SlotIndex {
    let old_head = *head_of(node, o);
    let slot = node.edge_entries.alloc(EdgeListEntry {
        edge: e,
        prev: None,
        next: old_head,
    });
    if let Some(h) = old_head {
        node.edge_entries.get_mut(h).prev = Some(slot);
    }
    *head_of(node, o) = Some(slot);
    bump_degree(node, o, true);
    slot
}

fn unlink_entry(node: &mut Node, slot: SlotIndex, o: Orientation) {
    let (prev, next) = {
        let e = node.edge_entries.get(slot);
        (e.prev, e.next)
    };
    match prev {
        Some(p) => node.edge_entries.get_mut(p).next = next,
        None => *head_of(node, o) = next,
    }
    if let Some(q) = next {
        node.edge_entries.get_mut(q).prev = prev;
    }
    bump_degree(node, o, false);
}

fn relink_entry(node: &mut Node, slot: SlotIndex, o: Orientation) {
    let (prev, next) = {
        let e = node.edge_entries.get(slot);
        (e.prev, e.next)
    };
    match prev {
        Some(p) => node.edge_entries.get_mut(p).next = Some(slot),
        None => *head_of(node, o) = Some(slot),
    }
    if let Some(q) = next {
        node.edge_entries.get_mut(q).prev = Some(slot);
    }
    bump_degree(node, o, true);
}

pub struct NodeIter<'g> {
    graph: &'g Graph,
    cur: Option<SlotIndex>,
}

impl Iterator for NodeIter<'_> {
    type Item = NodeHandle;

    #[inline]
    fn next(&mut self) -> Option<NodeHandle> {
        let entry = self.graph.node_list.get(self.cur?);
        self.graph.step();
        self.cur = entry.next;
        Some(entry.node)
    }
}

pub struct RootIter<'g> {
    graph: &'g Graph,
    cur: Option<NodeHandle>,
}

impl Iterator for RootIter<'_> {
    type Item = NodeHandle;

    #[inline]
    fn next(&mut self) -> Option<NodeHandle> {
        let n = self.cur?;
        self.graph.step();
        self.cur = self.graph.node(n).root_next;
        Some(n)
    }
}

pub struct EdgeIter<'g> {
    graph: &'g Graph,
    node: &'g Node,
    cur: Option<SlotIndex>,
}

impl Iterator for EdgeIter<'_> {
    type Item = EdgeHandle;

    #[inline]
    fn next(&mut self) -> Option<EdgeHandle> {
        let entry = self.node.edge_entries.get(self.cur?);
        self.graph.step();
        self.cur = entry.next;
        Some(entry.edge)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphSnapshot {
    pub nodes: Vec<NodeSnapshot>,
    pub roots: Vec<NodeHandle>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NodeSnapshot {
    pub handle: NodeHandle,
    pub name: Option<Box<str>>,
    pub label: HostLabel,
    pub mark: NodeMark,
    pub root: bool,
    pub out: Vec<EdgeSnapshot>,
    pub incoming: Vec<EdgeHandle>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EdgeSnapshot {
    pub handle: EdgeHandle,
    pub name: Option<Box<str>>,
    pub target: NodeHandle,
    pub label: HostLabel,
    pub mark: EdgeMark,
}
