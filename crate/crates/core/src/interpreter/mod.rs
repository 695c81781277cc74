//! Command-language interpreter with change-log backtracking.

mod undo;

pub use undo::{Change, Frame, UndoLog};

use std::collections::HashMap;
use std::fmt;

use crate::graph::Graph;
use crate::matching::{apply, build_search_plan, find_match, CompiledRule, MatchMode, SearchPlan};
use crate::rules::{validate_rule, Rule};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Command {
    RuleCall(String),
    RuleSet(Vec<String>),
    Seq(Box<Command>, Box<Command>),
    /// `c!`: apply as long as possible.
    Loop(Box<Command>),
    If(Box<Command>, Box<Command>, Box<Command>),
    Try(Box<Command>, Box<Command>, Box<Command>),
    Break,
    Fail,
    Skip,
    ProcCall(String),
}

impl Command {
    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }

    pub fn looped(c: Command) -> Command {
        Command::Loop(Box::new(c))
    }

    pub fn if_then_else(c: Command, t: Command, e: Command) -> Command {
        Command::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn try_then_else(c: Command, t: Command, e: Command) -> Command {
        Command::Try(Box::new(c), Box::new(t), Box::new(e))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExecStatus {
    Success,
    Fail,
    Break,
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub procedures: Vec<(String, Command)>,
    pub main: Option<Command>,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ProgramError {
    #[error("program has no Main declaration")]
    MissingMain,
    #[error("unknown rule or procedure `{0}`")]
    Unknown(String),
    #[error("`{0}` in a rule set is not a rule")]
    NotARule(String),
    #[error("procedure `{0}` is recursive")]
    Recursive(String),
    #[error("`break` outside of a loop")]
    BreakOutsideLoop,
    #[error("{0}")]
    InvalidRule(String),
    #[error("`{0}` is declared more than once")]
    Duplicate(String),
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum EngineError {
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Rule-call attempts, successful or not.
    pub rule_calls: u64,
    pub applications: u64,
    pub loop_iterations: u64,
}

impl ExecStats {
    /// What the step limit is compared against. Loop iterations count so
    /// that rule-free loops such as `skip!` are bounded too.
    pub fn steps(&self) -> u64 {
        self.rule_calls + self.loop_iterations
    }
}

enum Op {
    Rules(Vec<usize>),
    Seq(Box<Op>, Box<Op>),
    Loop(Box<Op>),
    If(Box<Op>, Box<Op>, Box<Op>),
    Try(Box<Op>, Box<Op>, Box<Op>),
    Break,
    Fail,
    Skip,
}

/// A validated program ready to run against host graphs.
pub struct Engine {
    rules: Vec<CompiledRule>,
    plans: Vec<SearchPlan>,
    rule_index: HashMap<String, usize>,
    procedures: HashMap<String, Command>,
    main: Op,
    mode: MatchMode,
    step_limit: Option<u64>,
    stats: ExecStats,
}

impl Engine {
    pub fn new(program: &Program, mode: MatchMode) -> Result<Engine, ProgramError> {
        let mut rule_index = HashMap::new();
        let mut rules = Vec::new();
        for r in &program.rules {
            if let Some(d) = validate_rule(r).into_iter().next() {
                return Err(ProgramError::InvalidRule(d.to_string()));
            }
            if rule_index.insert(r.name.clone(), rules.len()).is_some() {
                return Err(ProgramError::Duplicate(r.name.clone()));
            }
            rules.push(CompiledRule::compile(r));
        }
        let mut procedures = HashMap::new();
        for (name, body) in &program.procedures {
            if rule_index.contains_key(name) || procedures.insert(name.clone(), body.clone()).is_some() {
                return Err(ProgramError::Duplicate(name.clone()));
            }
        }
        let plans = rules.iter().map(build_search_plan).collect();
        let mut engine = Engine {
            rules,
            plans,
            rule_index,
            procedures,
            main: Op::Skip,
            mode,
            step_limit: None,
            stats: ExecStats::default(),
        };
        let main = program.main.as_ref().ok_or(ProgramError::MissingMain)?;
        engine.main = engine.lower(main)?;
        Ok(engine)
    }

    pub fn with_step_limit(mut self, limit: Option<u64>) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn stats(&self) -> ExecStats {
        self.stats
    }

    pub fn rule(&self, name: &str) -> Option<(&CompiledRule, &SearchPlan)> {
        let &i = self.rule_index.get(name)?;
        Some((&self.rules[i], &self.plans[i]))
    }

    /// Expands procedure calls and resolves rule names.
    fn lower(&self, c: &Command) -> Result<Op, ProgramError> {
        let op = self.lower_in(c, &mut Vec::new())?;
        check_breaks(&op, false)?;
        Ok(op)
    }

    fn lower_in(&self, c: &Command, active: &mut Vec<String>) -> Result<Op, ProgramError> {
        let b = |op| Box::new(op);
        Ok(match c {
            Command::RuleCall(name) | Command::ProcCall(name) => {
                if let Some(&i) = self.rule_index.get(name) {
                    Op::Rules(vec![i])
                } else if let Some(body) = self.procedures.get(name) {
                    if active.contains(name) {
                        return Err(ProgramError::Recursive(name.clone()));
                    }
                    active.push(name.clone());
                    let op = self.lower_in(body, active)?;
                    active.pop();
                    op
                } else {
                    return Err(ProgramError::Unknown(name.clone()));
                }
            }
            Command::RuleSet(names) => Op::Rules(
                names
                    .iter()
                    .map(|n| {
                        self.rule_index.get(n).copied().ok_or_else(|| {
                            if self.procedures.contains_key(n) {
                                ProgramError::NotARule(n.clone())
                            } else {
                                ProgramError::Unknown(n.clone())
                            }
                        })
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Command::Seq(a, c2) => Op::Seq(b(self.lower_in(a, active)?), b(self.lower_in(c2, active)?)),
            Command::Loop(body) => Op::Loop(b(self.lower_in(body, active)?)),
            Command::If(c1, t, e) => Op::If(
                b(self.lower_in(c1, active)?),
                b(self.lower_in(t, active)?),
                b(self.lower_in(e, active)?),
            ),
            Command::Try(c1, t, e) => Op::Try(
                b(self.lower_in(c1, active)?),
                b(self.lower_in(t, active)?),
                b(self.lower_in(e, active)?),
            ),
            Command::Break => Op::Break,
            Command::Fail => Op::Fail,
            Command::Skip => Op::Skip,
        })
    }

    /// Runs `Main` on `g`. On `Fail` the graph is left in whatever state
    /// the failing command reached.
    pub fn run(&mut self, g: &mut Graph) -> Result<ExecStatus, EngineError> {
        let mut log = UndoLog::new();
        let main = std::mem::replace(&mut self.main, Op::Skip);
        let result = self.exec_op(&main, g, &mut log);
        self.main = main;
        result
    }

    /// Executes an arbitrary command against this engine's rules.
    pub fn exec(&mut self, c: &Command, g: &mut Graph, log: &mut UndoLog) -> Result<ExecStatus, ExecError> {
        let op = self.lower_in(c, &mut Vec::new())?;
        Ok(self.exec_op(&op, g, log)?)
    }

    fn check_limit(&self) -> Result<(), EngineError> {
        match self.step_limit {
            Some(limit) if self.stats.steps() > limit => Err(EngineError::StepLimit(limit)),
            _ => Ok(()),
        }
    }

    fn exec_op(&mut self, op: &Op, g: &mut Graph, log: &mut UndoLog) -> Result<ExecStatus, EngineError> {
        use ExecStatus::*;
        Ok(match op {
            Op::Rules(set) => {
                self.stats.rule_calls += 1;
                self.check_limit()?;
                for &i in set {
                    if let Some(m) = find_match(g, &self.rules[i], &self.plans[i], self.mode) {
                        apply(g, &self.rules[i], &m, log);
                        self.stats.applications += 1;
                        return Ok(Success);
                    }
                }
                Fail
            }
            Op::Seq(a, b) => match self.exec_op(a, g, log)? {
                Success => self.exec_op(b, g, log)?,
                other => other,
            },
            Op::Loop(body) => loop {
                self.stats.loop_iterations += 1;
                self.check_limit()?;
                let frame = log.open_frame();
                match self.exec_op(body, g, log) {
                    Ok(Success) => log.commit(g, frame),
                    Ok(Fail) => {
                        log.rollback(g, frame);
                        break Success;
                    }
                    Ok(Break) => {
                        log.commit(g, frame);
                        break Success;
                    }
                    Err(e) => {
                        log.commit(g, frame);
                        return Err(e);
                    }
                }
            },
            Op::If(cond, then, els) => {
                let frame = log.open_frame();
                let r = self.exec_op(cond, g, log);
                log.rollback(g, frame);
                match r? {
                    Success => self.exec_op(then, g, log)?,
                    Fail | Break => self.exec_op(els, g, log)?,
                }
            }
            Op::Try(cond, then, els) => {
                let frame = log.open_frame();
                match self.exec_op(cond, g, log) {
                    Ok(Success) => {
                        log.commit(g, frame);
                        self.exec_op(then, g, log)?
                    }
                    Ok(Fail | Break) => {
                        log.rollback(g, frame);
                        self.exec_op(els, g, log)?
                    }
                    Err(e) => {
                        log.commit(g, frame);
                        return Err(e);
                    }
                }
            }
            Op::Break => Break,
            Op::Fail => Fail,
            Op::Skip => Success,
        })
    }
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("rules", &self.rules.len())
            .field("mode", &self.mode)
            .finish()
    }
}

// A break escaping an if/try condition counts as the condition failing, so
// only breaks in loop bodies or branches need an enclosing loop.
fn check_breaks(op: &Op, in_loop: bool) -> Result<(), ProgramError> {
    match op {
        Op::Break if !in_loop => Err(ProgramError::BreakOutsideLoop),
        Op::Seq(a, b) => {
            check_breaks(a, in_loop)?;
            check_breaks(b, in_loop)
        }
        Op::Loop(body) => check_breaks(body, true),
        Op::If(c, t, e) | Op::Try(c, t, e) => {
            check_breaks(c, true)?;
            check_breaks(t, in_loop)?;
            check_breaks(e, in_loop)
        }
        _ => Ok(()),
    }
}
