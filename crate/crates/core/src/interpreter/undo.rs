//! Change log for backtracking.
//!
//! Mutations made while at least one frame is open are recorded so they can
//! be undone in reverse order. Deleted elements are flagged as referenced by
//! the log, which keeps their storage (and handles) alive until the entry is
//! released. With no frame open nothing is recorded.

use crate::graph::{EdgeHandle, EdgeMark, Graph, NodeHandle, NodeMark};
use crate::labels::HostLabel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Change {
    AddedNode(NodeHandle),
    AddedEdge(EdgeHandle),
    DeletedNode(NodeHandle),
    DeletedEdge(EdgeHandle),
    NodeRelabeled(NodeHandle, HostLabel),
    EdgeRelabeled(EdgeHandle, HostLabel),
    NodeRemarked(NodeHandle, NodeMark),
    EdgeRemarked(EdgeHandle, EdgeMark),
    RootChanged {
        node: NodeHandle,
        was_root: bool,
        prev: Option<NodeHandle>,
        next: Option<NodeHandle>,
    },
}

/// Handle to an open frame; only the topmost frame may be closed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[must_use]
pub struct Frame(usize);

#[derive(Debug, Default)]
pub struct UndoLog {
    entries: Vec<Change>,
    frames: Vec<usize>,
}

impl UndoLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_recording(&self) -> bool {
        !self.frames.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    /// Number of retained entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Change] {
        &self.entries
    }

    pub fn open_frame(&mut self) -> Frame {
        self.frames.push(self.entries.len());
        Frame(self.frames.len() - 1)
    }

    #[track_caller]
    fn close(&mut self, frame: Frame) -> usize {
        assert_eq!(
            frame.0 + 1,
            self.frames.len(),
            "undo log: frame {} is not the topmost of {}",
            frame.0,
            self.frames.len()
        );
        self.frames.pop().unwrap()
    }

    /// Keeps the frame's changes. They merge into the enclosing frame, or are
    /// released when no frame remains.
    pub fn commit(&mut self, g: &mut Graph, frame: Frame) {
        self.close(frame);
        if self.frames.is_empty() {
            // forward order: edges are released before their endpoints
            for change in self.entries.drain(..) {
                match change {
                    Change::DeletedNode(n) => g.release_node(n),
                    Change::DeletedEdge(e) => g.release_edge(e),
                    _ => {}
                }
            }
        }
    }

    /// Undoes every change recorded since `frame` was opened.
    pub fn rollback(&mut self, g: &mut Graph, frame: Frame) {
        let start = self.close(frame);
        while self.entries.len() > start {
            let change = self.entries.pop().unwrap();
            undo(g, change);
        }
    }

    pub fn add_node(&mut self, g: &mut Graph, label: HostLabel, mark: NodeMark, root: bool) -> NodeHandle {
        let n = g.add_node(label, mark, root);
        if self.is_recording() {
            self.entries.push(Change::AddedNode(n));
        }
        n
    }

    pub fn add_edge(
        &mut self,
        g: &mut Graph,
        source: NodeHandle,
        target: NodeHandle,
        label: HostLabel,
        mark: EdgeMark,
    ) -> EdgeHandle {
        let e = g.add_edge(source, target, label, mark);
        if self.is_recording() {
            self.entries.push(Change::AddedEdge(e));
        }
        e
    }

    pub fn delete_node(&mut self, g: &mut Graph, n: NodeHandle) {
        if self.is_recording() {
            g.retain_node(n);
            g.delete_node(n);
            self.entries.push(Change::DeletedNode(n));
        } else {
            g.delete_node(n);
        }
    }

    pub fn delete_edge(&mut self, g: &mut Graph, e: EdgeHandle) {
        if self.is_recording() {
            g.retain_edge(e);
            g.delete_edge(e);
            self.entries.push(Change::DeletedEdge(e));
        } else {
            g.delete_edge(e);
        }
    }

    pub fn relabel_node(&mut self, g: &mut Graph, n: NodeHandle, label: HostLabel) {
        let old = g.relabel_node(n, label);
        if self.is_recording() {
            self.entries.push(Change::NodeRelabeled(n, old));
        }
    }

    pub fn relabel_edge(&mut self, g: &mut Graph, e: EdgeHandle, label: HostLabel) {
        let old = g.relabel_edge(e, label);
        if self.is_recording() {
            self.entries.push(Change::EdgeRelabeled(e, old));
        }
    }

    pub fn set_node_mark(&mut self, g: &mut Graph, n: NodeHandle, mark: NodeMark) {
        let old = g.set_node_mark(n, mark);
        if self.is_recording() {
            self.entries.push(Change::NodeRemarked(n, old));
        }
    }

    pub fn set_edge_mark(&mut self, g: &mut Graph, e: EdgeHandle, mark: EdgeMark) {
        let old = g.set_edge_mark(e, mark);
        if self.is_recording() {
            self.entries.push(Change::EdgeRemarked(e, old));
        }
    }

    pub fn set_root(&mut self, g: &mut Graph, n: NodeHandle, root: bool) {
        let (prev, next) = g.root_links(n);
        let was_root = g.set_root(n, root);
        if self.is_recording() && was_root != root {
            self.entries.push(Change::RootChanged {
                node: n,
                was_root,
                prev,
                next,
            });
        }
    }
}

fn undo(g: &mut Graph, change: Change) {
    match change {
        Change::AddedNode(n) => g.delete_node(n),
        Change::AddedEdge(e) => g.delete_edge(e),
        Change::DeletedNode(n) => {
            g.restore_node(n);
            g.release_node(n);
        }
        Change::DeletedEdge(e) => {
            g.restore_edge(e);
            g.release_edge(e);
        }
        Change::NodeRelabeled(n, old) => {
            g.relabel_node(n, old);
        }
        Change::EdgeRelabeled(e, old) => {
            g.relabel_edge(e, old);
        }
        Change::NodeRemarked(n, old) => {
            g.set_node_mark(n, old);
        }
        Change::EdgeRemarked(e, old) => {
            g.set_edge_mark(e, old);
        }
        Change::RootChanged {
            node,
            was_root,
            prev,
            next,
        } => {
            if was_root {
                g.relink_root(node, prev, next);
            } else {
                g.set_root(node, false);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Atom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn empty() -> HostLabel {
        HostLabel::empty()
    }

    #[test]
    fn rollback_restores_deleted_node_handle() {
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        let n = g.add_node(HostLabel(vec![Atom::Int(4)]), NodeMark::Red, true);
        let before = g.snapshot();
        let f = log.open_frame();
        log.delete_node(&mut g, n);
        assert!(!g.is_live_node(n));
        log.rollback(&mut g, f);
        assert!(g.is_live_node(n));
        assert_eq!(g.snapshot(), before);
        assert!(!g.node(n).in_log());
    }

    #[test]
    fn commit_at_top_level_reclaims() {
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        let n = g.add_node(empty(), NodeMark::None, false);
        let f = log.open_frame();
        log.delete_node(&mut g, n);
        assert!(g.try_node(n).is_some());
        log.commit(&mut g, f);
        assert!(g.try_node(n).is_none());
        assert!(log.is_empty());
        // the freed slot is reused first
        assert_eq!(g.add_node(empty(), NodeMark::None, false), n);
    }

    #[test]
    fn inner_commit_outer_rollback() {
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        let a = g.add_node(empty(), NodeMark::None, false);
        let before = g.snapshot();
        let outer = log.open_frame();
        let inner = log.open_frame();
        let b = log.add_node(&mut g, empty(), NodeMark::None, true);
        log.add_edge(&mut g, a, b, empty(), EdgeMark::Dashed);
        log.set_node_mark(&mut g, a, NodeMark::Grey);
        log.commit(&mut g, inner);
        assert_eq!(g.node_count(), 2);
        log.rollback(&mut g, outer);
        assert_eq!(g.snapshot(), before);
        g.check_invariants().unwrap();
    }

    #[test]
    fn no_frame_means_no_entries() {
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        let a = log.add_node(&mut g, empty(), NodeMark::None, false);
        let b = log.add_node(&mut g, empty(), NodeMark::None, false);
        let e = log.add_edge(&mut g, a, b, empty(), EdgeMark::None);
        log.set_root(&mut g, a, true);
        log.delete_edge(&mut g, e);
        log.delete_node(&mut g, b);
        assert!(log.is_empty());
        assert!(g.try_node(b).is_none());
    }

    #[test]
    fn unroot_then_reroot_restores_root_order() {
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        let rs: Vec<_> = (0..4).map(|_| g.add_node(empty(), NodeMark::None, true)).collect();
        let before = g.snapshot();
        let f = log.open_frame();
        log.set_root(&mut g, rs[1], false);
        log.set_root(&mut g, rs[2], false);
        log.set_root(&mut g, rs[1], true);
        log.rollback(&mut g, f);
        assert_eq!(g.snapshot(), before);
    }

    #[test]
    #[should_panic(expected = "not the topmost")]
    fn closing_inner_frame_out_of_order() {
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        let outer = log.open_frame();
        let _inner = log.open_frame();
        log.commit(&mut g, outer);
    }

    fn random_mutation(rng: &mut ChaCha8Rng, g: &mut Graph, log: &mut UndoLog) {
        let nodes: Vec<_> = g.nodes().collect();
        let pick = |rng: &mut ChaCha8Rng| nodes[rng.gen_range(0..nodes.len())];
        match rng.gen_range(0..8) {
            0 => {
                log.add_node(g, HostLabel(vec![Atom::Int(rng.gen_range(0..5))]), NodeMark::None, rng.gen_bool(0.3));
            }
            1 | 2 if !nodes.is_empty() => {
                let (s, t) = (pick(rng), pick(rng));
                log.add_edge(g, s, t, empty(), EdgeMark::None);
            }
            3 if !nodes.is_empty() => {
                let n = pick(rng);
                let incident: Vec<_> = g.out_edges(n).chain(g.in_edges(n)).collect();
                let mut seen = std::collections::HashSet::new();
                for e in incident {
                    if seen.insert(e) {
                        log.delete_edge(g, e);
                    }
                }
                log.delete_node(g, n);
            }
            4 if !nodes.is_empty() => {
                let n = pick(rng);
                if let Some(e) = g.out_edges(n).next() {
                    if rng.gen_bool(0.5) {
                        log.delete_edge(g, e);
                    } else {
                        log.set_edge_mark(g, e, EdgeMark::Dashed);
                        log.relabel_edge(g, e, HostLabel(vec![Atom::Str("z".into())]));
                    }
                }
            }
            5 if !nodes.is_empty() => {
                let n = pick(rng);
                log.relabel_node(g, n, HostLabel(vec![Atom::Int(rng.gen_range(0..5))]));
            }
            6 if !nodes.is_empty() => {
                let n = pick(rng);
                log.set_root(g, n, rng.gen_bool(0.5));
            }
            7 if !nodes.is_empty() => {
                let n = pick(rng);
                log.set_node_mark(g, n, NodeMark::Blue);
            }
            _ => {}
        }
    }

    #[test]
    fn thousand_mutations_roll_back_exactly() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = Graph::new();
            let mut log = UndoLog::new();
            for _ in 0..50 {
                random_mutation(&mut rng, &mut g, &mut log);
            }
            let before = g.snapshot();
            let f = log.open_frame();
            for _ in 0..1000 {
                random_mutation(&mut rng, &mut g, &mut log);
            }
            log.rollback(&mut g, f);
            assert_eq!(g.snapshot(), before, "seed {seed}");
            g.check_invariants().unwrap();
        }
    }

    #[test]
    fn randomized_nesting_against_snapshots() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut g = Graph::new();
        let mut log = UndoLog::new();
        for _ in 0..30 {
            random_mutation(&mut rng, &mut g, &mut log);
        }
        let mut stack: Vec<(Frame, crate::graph::GraphSnapshot)> = Vec::new();
        for _ in 0..5000 {
            match rng.gen_range(0..10) {
                0 | 1 => stack.push((log.open_frame(), g.snapshot())),
                2 if !stack.is_empty() => {
                    let (f, _) = stack.pop().unwrap();
                    log.commit(&mut g, f);
                }
                3 if !stack.is_empty() => {
                    let (f, snap) = stack.pop().unwrap();
                    log.rollback(&mut g, f);
                    assert_eq!(g.snapshot(), snap);
                }
                _ => random_mutation(&mut rng, &mut g, &mut log),
            }
        }
        while let Some((f, snap)) = stack.pop() {
            log.rollback(&mut g, f);
            assert_eq!(g.snapshot(), snap);
        }
        assert!(log.is_empty());
        g.check_invariants().unwrap();
        // every retained element was released
        assert_eq!(g.node_storage(), g.node_count());
        assert_eq!(g.edge_storage(), g.edge_count());
    }
}
