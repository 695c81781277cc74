//! A rooted graph-transformation engine.
//!
//! Host graphs live in segmented arrays with stable handles, rules are
//! compiled to search plans that start at root nodes, and the command
//! interpreter backtracks through an undo log instead of copying graphs.

pub mod bench;
pub mod bigarray;
pub mod graph;
pub mod interpreter;
pub mod labels;
pub mod matching;
pub mod parser;
pub mod rules;

pub use graph::{EdgeHandle, EdgeMark, Graph, NodeHandle, NodeMark};
pub use interpreter::{Command, Engine, ExecStatus, Program, UndoLog};
pub use labels::{Atom, HostLabel};
pub use matching::MatchMode;
pub use parser::{parse_host_graph, parse_program, serialize_graph, Diagnostics};
