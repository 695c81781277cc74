//! Input generators and the scaling benchmark runner.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::graph::{EdgeMark, Graph, NodeMark};
use crate::interpreter::{Engine, EngineError, ExecStatus, Program};
use crate::labels::HostLabel;
use crate::matching::MatchMode;

/// The benchmark programs, in source form.
pub mod programs {
    pub const IS_DISCRETE: &str = include_str!("../examples/is-discrete.gp2");
    pub const IS_BINARY_DAG: &str = include_str!("../examples/is-binary-dag.gp2");
    pub const IS_TREE: &str = include_str!("../examples/is-tree.gp2");
    pub const TRANSITIVE_CLOSURE: &str = include_str!("../examples/transitive-closure.gp2");

    pub const ALL: [(&str, &str); 4] = [
        ("is-discrete", IS_DISCRETE),
        ("is-binary-dag", IS_BINARY_DAG),
        ("is-tree", IS_TREE),
        ("transitive-closure", TRANSITIVE_CLOSURE),
    ];

    pub fn by_name(name: &str) -> Option<&'static str> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GeneratorKind {
    Discrete,
    /// Full binary tree; the parameter is the depth.
    BTree,
    /// k-by-k grid; the parameter is k.
    Grid,
    Path,
    Cycle,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::Discrete,
        GeneratorKind::BTree,
        GeneratorKind::Grid,
        GeneratorKind::Path,
        GeneratorKind::Cycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Discrete => "discrete",
            GeneratorKind::BTree => "btree",
            GeneratorKind::Grid => "grid",
            GeneratorKind::Path => "path",
            GeneratorKind::Cycle => "cycle",
        }
    }

    /// Node count of the graph generated for `param`, or `None` if the
    /// parameter is out of range.
    pub fn node_count(self, param: u64) -> Option<u64> {
        if param == 0 && self != GeneratorKind::BTree {
            return None;
        }
        match self {
            GeneratorKind::BTree if param < 31 => Some((1u64 << (param + 1)) - 1),
            GeneratorKind::BTree => None,
            GeneratorKind::Grid => param.checked_mul(param).filter(|&n| n <= u32::MAX as u64 / 2),
            _ => Some(param).filter(|&n| n <= u32::MAX as u64 / 2),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum GenError {
    #[error("unknown generator `{0}` (expected discrete, btree, grid, path or cycle)")]
    UnknownKind(String),
    #[error("invalid size {size} for {kind}")]
    InvalidSize { kind: GeneratorKind, size: u64 },
}

impl FromStr for GeneratorKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GenError::UnknownKind(s.to_string()))
    }
}

/// Builds the graph for `kind` and `param`. Nodes are named `n0, n1, ...`
/// and edges `e0, e1, ...` in creation order; all labels are `empty`.
pub fn generate(kind: GeneratorKind, param: u64) -> Result<Graph, GenError> {
    let n = kind
        .node_count(param)
        .ok_or(GenError::InvalidSize { kind, size: param })? as usize;
    let mut g = Graph::new();
    let nodes: Vec<_> = (0..n)
        .map(|i| g.add_named_node(Some(format!("n{i}").into()), HostLabel::empty(), NodeMark::None, false))
        .collect();
    let mut edge_no = 0usize;
    let mut edge = |g: &mut Graph, s: usize, t: usize| {
        g.add_named_edge(
            Some(format!("e{edge_no}").into()),
            nodes[s],
            nodes[t],
            HostLabel::empty(),
            EdgeMark::None,
        );
        edge_no += 1;
    };
    match kind {
        GeneratorKind::Discrete => {}
        GeneratorKind::BTree => {
            for i in 0..n {
                for c in [2 * i + 1, 2 * i + 2] {
                    if c < n {
                        edge(&mut g, i, c);
                    }
                }
            }
        }
        GeneratorKind::Grid => {
            let k = param as usize;
            for r in 0..k {
                for c in 0..k {
                    let i = r * k + c;
                    if c + 1 < k {
                        edge(&mut g, i, i + 1);
                    }
                    if r + 1 < k {
                        edge(&mut g, i, i + k);
                    }
                }
            }
        }
        GeneratorKind::Path => {
            for i in 1..n {
                edge(&mut g, i - 1, i);
            }
        }
        GeneratorKind::Cycle => {
            for i in 0..n {
                edge(&mut g, i, (i + 1) % n);
            }
        }
    }
    g.reset_steps();
    Ok(g)
}

#[derive(Clone, PartialEq, Debug)]
pub struct BenchRecord {
    pub program: String,
    pub kind: GeneratorKind,
    /// Node count of the input graph.
    pub size: u64,
    pub ms: f64,
    pub steps: u64,
    pub status: ExecStatus,
}

pub const CSV_HEADER: &str = "program,kind,size,ms,steps";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{:.3},{}", self.program, self.kind, self.size, self.ms, self.steps)
    }
}

pub fn write_csv<W: Write>(mut w: W, records: &[BenchRecord]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Result of one timed execution.
#[derive(Clone, Copy, Debug)]
pub struct RunOutcome {
    pub status: ExecStatus,
    pub elapsed: Duration,
    /// Matching steps plus mutations.
    pub steps: u64,
}

/// Runs the program's `Main` on `g`, timing execution only.
pub fn run_timed(engine: &mut Engine, g: &mut Graph) -> Result<RunOutcome, EngineError> {
    g.reset_steps();
    let start = Instant::now();
    let status = engine.run(g)?;
    let elapsed = start.elapsed();
    Ok(RunOutcome {
        status,
        elapsed,
        steps: g.steps(),
    })
}

/// Benchmarks `program` on `kind` graphs for each generator parameter in
/// `params`, keeping the fastest of `repeats` runs per point. Generation is
/// not timed.
pub fn bench(
    name: &str,
    program: &Program,
    mode: MatchMode,
    kind: GeneratorKind,
    params: &[u64],
    repeats: u32,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut out = Vec::with_capacity(params.len());
    for &p in params {
        let mut best: Option<RunOutcome> = None;
        for _ in 0..repeats.max(1) {
            let mut g = generate(kind, p)?;
            let mut engine = Engine::new(program, mode)?;
            let r = run_timed(&mut engine, &mut g)?;
            if best.is_none_or(|b| r.elapsed < b.elapsed) {
                best = Some(r);
            }
            drop(g);
        }
        let best = best.expect("at least one repeat");
        out.push(BenchRecord {
            program: name.to_string(),
            kind,
            size: kind.node_count(p).expect("generated above"),
            ms: best.elapsed.as_secs_f64() * 1e3,
            steps: best.steps,
            status: best.status,
        });
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Program(#[from] crate::interpreter::ProgramError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, serialize_graph};

    fn out_degrees(g: &Graph) -> Vec<usize> {
        g.nodes().map(|n| g.node(n).outdegree()).collect()
    }

    fn is_acyclic(g: &Graph) -> bool {
        // Kahn's algorithm
        let mut indeg: std::collections::HashMap<_, usize> =
            g.nodes().map(|n| (n, g.node(n).indegree())).collect();
        let mut ready: Vec<_> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for e in g.out_edges(n) {
                let t = g.edge(e).target();
                let d = indeg.get_mut(&t).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(t);
                }
            }
        }
        seen == g.node_count()
    }

    #[test]
    fn sizes() {
        let g = generate(GeneratorKind::BTree, 12).unwrap();
        assert_eq!(g.node_count(), 8191);
        assert_eq!(g.edge_count(), 8190);
        let g = generate(GeneratorKind::Grid, 300).unwrap();
        assert_eq!(g.node_count(), 90000);
        assert_eq!(g.edge_count(), 2 * 300 * 299);
        assert_eq!(generate(GeneratorKind::Cycle, 7).unwrap().edge_count(), 7);
        assert_eq!(generate(GeneratorKind::Path, 7).unwrap().edge_count(), 6);
        assert_eq!(generate(GeneratorKind::BTree, 0).unwrap().node_count(), 1);
    }

    #[test]
    fn discrete_one() {
        let g = generate(GeneratorKind::Discrete, 1).unwrap();
        assert_eq!(serialize_graph(&g), "[ (n0, empty) | ]");
    }

    #[test]
    fn invalid_sizes() {
        assert!(generate(GeneratorKind::Discrete, 0).is_err());
        assert!(generate(GeneratorKind::Grid, 0).is_err());
        assert!(generate(GeneratorKind::BTree, 40).is_err());
        assert!("tree".parse::<GeneratorKind>().is_err());
        assert_eq!("grid".parse::<GeneratorKind>(), Ok(GeneratorKind::Grid));
    }

    #[test]
    fn structure() {
        for d in 0..8 {
            let g = generate(GeneratorKind::BTree, d).unwrap();
            assert!(is_acyclic(&g));
            assert!(out_degrees(&g).iter().all(|&d| d <= 2));
            assert_eq!(g.nodes().filter(|&n| g.node(n).indegree() == 0).count(), 1);
        }
        for k in 1..8 {
            let g = generate(GeneratorKind::Grid, k).unwrap();
            assert!(is_acyclic(&g));
            assert!(g.nodes().all(|n| g.node(n).outdegree() <= 2 && g.node(n).indegree() <= 2));
        }
        for n in 1..8 {
            let g = generate(GeneratorKind::Cycle, n).unwrap();
            // strongly connected: every node reaches every node
            let nodes: Vec<_> = g.nodes().collect();
            for &s in &nodes {
                let mut seen = vec![s];
                let mut stack = vec![s];
                while let Some(u) = stack.pop() {
                    for e in g.out_edges(u) {
                        let t = g.edge(e).target();
                        if !seen.contains(&t) {
                            seen.push(t);
                            stack.push(t);
                        }
                    }
                }
                assert_eq!(seen.len(), n as usize);
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = serialize_graph(&generate(GeneratorKind::Grid, 5).unwrap());
        let b = serialize_graph(&generate(GeneratorKind::Grid, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn bench_records_and_csv() {
        let p = parse_program(programs::IS_DISCRETE).unwrap();
        let recs = bench("is-discrete", &p, MatchMode::Reflecting, GeneratorKind::Discrete, &[10, 20], 2).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].size, 20);
        assert!(recs[1].steps > recs[0].steps);
        assert!(recs.iter().all(|r| r.status == ExecStatus::Success && r.ms >= 0.0));
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "program,kind,size,ms,steps\n");
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("is-discrete,discrete,10,"));
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let p = parse_program(programs::IS_DISCRETE).unwrap();
        let recs = bench("is-discrete", &p, MatchMode::Reflecting, GeneratorKind::Path, &[1, 2], 1).unwrap();
        assert_eq!(recs[0].status, ExecStatus::Success);
        assert_eq!(recs[1].status, ExecStatus::Fail);
    }

    #[test]
    fn programs_parse() {
        for (name, src) in programs::ALL {
            parse_program(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
