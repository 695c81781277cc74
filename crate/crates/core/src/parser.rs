//! Text formats: host graphs and programs.
//!
//! Host graph:
//!
//! ```text
//! Graph  ::= '[' Node* '|' Edge* ']'
//! Node   ::= '(' Id '(R)'? ',' Label ')'
//! Edge   ::= '(' Id ',' Id ',' Id ',' Label ')'
//! Label  ::= List ('#' Mark)?
//! List   ::= 'empty' | Atom (':' Atom)*
//! Atom   ::= Integer | QuotedString
//! ```
//!
//! Programs are a sequence of declarations. A rule is
//! `name(x, y: list; n: int) [lhs] => [rhs] interface = {1, 2} where cond`,
//! where the two graphs use the host syntax with variables allowed as list
//! items. Anything else is `Name = command`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;

use crate::graph::{EdgeMark, Graph, NodeHandle, NodeMark};
use crate::interpreter::{Command, Engine, Program};
use crate::labels::{Atom, HostLabel, LabelItem, RuleLabel, VarId, VarType};
use crate::matching::MatchMode;
use crate::rules::{validate_rule, Condition, Rule, RuleEdge, RuleGraph, RuleNode};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SourceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagnostics(pub Vec<SourceDiagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<SourceDiagnostic> for Diagnostics {
    fn from(d: SourceDiagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok<'a> {
    LBrack,
    RBrack,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bar,
    Comma,
    Colon,
    Semi,
    Hash,
    Eq,
    Neq,
    Arrow,
    Bang,
    Ident(&'a str),
    Int(&'a str),
    Str(String),
    Eof,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Hash => f.write_str("`#`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Neq => f.write_str("`!=`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token<'a> {
    tok: Tok<'a>,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    // Column of byte offset `col_pos`; advanced lazily so long lines stay
    // linear to scan.
    col_pos: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col_pos: 0,
            col: 1,
        }
    }

    fn column_of(&mut self, at: usize) -> usize {
        self.col += self.src[self.col_pos..at].chars().count();
        self.col_pos = at;
        self.col
    }

    fn err(&mut self, at: usize, message: impl Into<String>) -> SourceDiagnostic {
        SourceDiagnostic {
            line: self.line,
            column: self.column_of(at),
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.col_pos = self.pos;
                    self.col = 1;
                }
                b' ' | b'\t' | b'\r' => self.pos += 1,
                b'/' if bytes.get(self.pos + 1) == Some(&b'/') => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<Token<'a>, SourceDiagnostic> {
        self.skip_trivia();
        let start = self.pos;
        let line = self.line;
        let column = self.column_of(start);
        let bytes = self.src.as_bytes();
        let tok = if start >= bytes.len() {
            Tok::Eof
        } else {
            let c = bytes[start];
            self.pos += 1;
            match c {
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b'|' => Tok::Bar,
                b',' => Tok::Comma,
                b':' => Tok::Colon,
                b';' => Tok::Semi,
                b'#' => Tok::Hash,
                b'=' if bytes.get(self.pos) == Some(&b'>') => {
                    self.pos += 1;
                    Tok::Arrow
                }
                b'=' => Tok::Eq,
                b'!' if bytes.get(self.pos) == Some(&b'=') => {
                    self.pos += 1;
                    Tok::Neq
                }
                b'!' => Tok::Bang,
                b'"' => Tok::Str(self.string(start)?),
                b'-' | b'0'..=b'9' => {
                    if c == b'-' && !bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
                        return Err(self.err(start, "expected digits after `-`"));
                    }
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphabetic() || bytes[self.pos] == b'_') {
                        // identifiers may start with digits only as node ids
                        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                            self.pos += 1;
                        }
                        if c == b'-' {
                            return Err(self.err(start, "malformed number"));
                        }
                        Tok::Ident(&self.src[start..self.pos])
                    } else {
                        Tok::Int(&self.src[start..self.pos])
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                        self.pos += 1;
                    }
                    Tok::Ident(&self.src[start..self.pos])
                }
                _ => {
                    let ch = self.src[start..].chars().next().unwrap();
                    return Err(self.err(start, format!("unexpected character {ch:?}")));
                }
            }
        };
        Ok(Token { tok, line, column })
    }

    fn string(&mut self, start: usize) -> Result<String, SourceDiagnostic> {
        let mut out = String::new();
        let mut chars = self.src[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 't')) => out.push('\t'),
                    Some((_, c @ ('"' | '\\'))) => out.push(c),
                    _ => return Err(self.err(start, "invalid escape in string")),
                },
                '\n' => return Err(self.err(start, "unterminated string")),
                c => out.push(c),
            }
        }
        Err(self.err(start, "unterminated string"))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    peeked: Option<Token<'a>>,
}

type PResult<T> = Result<T, SourceDiagnostic>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            lex: Lexer::new(src),
            peeked: None,
        }
    }

    fn peek(&mut self) -> PResult<&Token<'a>> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex.next()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn bump(&mut self) -> PResult<Token<'a>> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex.next(),
        }
    }

    fn at(&mut self, tok: &Tok<'_>) -> PResult<bool> {
        Ok(&self.peek()?.tok == tok)
    }

    fn at_keyword(&mut self, kw: &str) -> PResult<bool> {
        Ok(matches!(self.peek()?.tok, Tok::Ident(s) if s == kw))
    }

    fn eat(&mut self, tok: &Tok<'_>) -> PResult<bool> {
        if self.at(tok)? {
            self.bump()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn error_at(t: &Token<'_>, message: impl Into<String>) -> SourceDiagnostic {
        SourceDiagnostic {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok<'_>) -> PResult<Token<'a>> {
        let t = self.bump()?;
        if t.tok == tok {
            Ok(t)
        } else {
            Err(Self::error_at(&t, format!("expected {tok}, found {}", t.tok)))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token<'a>> {
        let t = self.bump()?;
        match t.tok {
            Tok::Ident(s) if s == kw => Ok(t),
            _ => Err(Self::error_at(&t, format!("expected `{kw}`, found {}", t.tok))),
        }
    }

    fn ident(&mut self) -> PResult<(&'a str, Token<'a>)> {
        let t = self.bump()?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t)),
            _ => Err(Self::error_at(&t, format!("expected a name, found {}", t.tok))),
        }
    }

    fn id(&mut self) -> PResult<(&'a str, Token<'a>)> {
        let t = self.bump()?;
        match t.tok {
            Tok::Ident(s) | Tok::Int(s) if !s.starts_with('-') => Ok((s, t)),
            _ => Err(Self::error_at(&t, format!("expected an identifier, found {}", t.tok))),
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let t = self.bump()?;
        match t.tok {
            Tok::Int(s) => s
                .parse::<i64>()
                .map(Atom::Int)
                .map_err(|_| Self::error_at(&t, format!("integer {s} out of range"))),
            Tok::Str(s) => Ok(Atom::Str(s)),
            _ => Err(Self::error_at(&t, format!("expected an integer or string, found {}", t.tok))),
        }
    }

    fn host_label(&mut self) -> PResult<HostLabel> {
        if self.at_keyword("empty")? {
            self.bump()?;
            return Ok(HostLabel::empty());
        }
        let mut items = vec![self.atom()?];
        while self.eat(&Tok::Colon)? {
            items.push(self.atom()?);
        }
        Ok(HostLabel(items))
    }

    fn rule_label(&mut self, vars: &HashMap<&str, (VarId, VarType)>) -> PResult<RuleLabel> {
        if self.at_keyword("empty")? {
            self.bump()?;
            return Ok(RuleLabel::default());
        }
        let mut items = Vec::new();
        loop {
            let item = match self.peek()?.tok {
                Tok::Ident(name) => {
                    let t = self.bump()?;
                    let &(id, ty) = vars
                        .get(name)
                        .ok_or_else(|| Self::error_at(&t, format!("undeclared variable `{name}`")))?;
                    LabelItem::Var { id, ty }
                }
                _ => LabelItem::Const(self.atom()?),
            };
            items.push(item);
            if !self.eat(&Tok::Colon)? {
                break;
            }
        }
        Ok(RuleLabel(items))
    }

    fn mark_name(&mut self) -> PResult<Option<(&'a str, Token<'a>)>> {
        if self.eat(&Tok::Hash)? {
            Ok(Some(self.ident()?))
        } else {
            Ok(None)
        }
    }

    fn node_mark(&mut self) -> PResult<NodeMark> {
        match self.mark_name()? {
            None => Ok(NodeMark::None),
            Some((name, t)) => {
                NodeMark::from_name(name).ok_or_else(|| Self::error_at(&t, format!("bad node mark `{name}`")))
            }
        }
    }

    fn edge_mark(&mut self) -> PResult<EdgeMark> {
        match self.mark_name()? {
            None => Ok(EdgeMark::None),
            Some((name, t)) => {
                EdgeMark::from_name(name).ok_or_else(|| Self::error_at(&t, format!("bad edge mark `{name}`")))
            }
        }
    }

    fn root_tag(&mut self) -> PResult<bool> {
        if !self.eat(&Tok::LParen)? {
            return Ok(false);
        }
        let (tag, t) = self.ident()?;
        if tag != "R" {
            return Err(Self::error_at(&t, format!("expected root tag `R`, found `{tag}`")));
        }
        self.expect(Tok::RParen)?;
        Ok(true)
    }

    fn host_graph(&mut self) -> PResult<Graph> {
        let mut g = Graph::new();
        let mut ids: HashMap<&'a str, NodeHandle> = HashMap::new();
        let mut edge_ids: HashSet<&'a str> = HashSet::new();
        self.expect(Tok::LBrack)?;
        while !self.eat(&Tok::Bar)? {
            self.expect(Tok::LParen)?;
            let (id, t) = self.id()?;
            let root = self.root_tag()?;
            self.expect(Tok::Comma)?;
            let label = self.host_label()?;
            let mark = self.node_mark()?;
            self.expect(Tok::RParen)?;
            if ids.contains_key(id) {
                return Err(Self::error_at(&t, format!("duplicate node id `{id}`")));
            }
            let h = g.add_named_node(Some(id.into()), label, mark, root);
            ids.insert(id, h);
        }
        while !self.eat(&Tok::RBrack)? {
            self.expect(Tok::LParen)?;
            let (id, t) = self.id()?;
            if !edge_ids.insert(id) {
                return Err(Self::error_at(&t, format!("duplicate edge id `{id}`")));
            }
            self.expect(Tok::Comma)?;
            let mut ends = [None; 2];
            for end in &mut ends {
                let (nid, t) = self.id()?;
                *end = Some(
                    *ids.get(nid)
                        .ok_or_else(|| Self::error_at(&t, format!("edge `{id}` references unknown node `{nid}`")))?,
                );
                self.expect(Tok::Comma)?;
            }
            let label = self.host_label()?;
            let mark = self.edge_mark()?;
            self.expect(Tok::RParen)?;
            g.add_named_edge(Some(id.into()), ends[0].unwrap(), ends[1].unwrap(), label, mark);
        }
        self.expect(Tok::Eof)?;
        g.reset_steps();
        Ok(g)
    }

    fn rule_graph(&mut self, vars: &HashMap<&str, (VarId, VarType)>) -> PResult<RuleGraph> {
        let mut g = RuleGraph::default();
        self.expect(Tok::LBrack)?;
        while !self.eat(&Tok::Bar)? {
            self.expect(Tok::LParen)?;
            let (id, _) = self.id()?;
            let rooted = self.root_tag()?;
            self.expect(Tok::Comma)?;
            let label = self.rule_label(vars)?;
            let mark = self.node_mark()?;
            self.expect(Tok::RParen)?;
            g.nodes.push(RuleNode {
                id: id.to_string(),
                label,
                mark,
                rooted,
            });
        }
        while !self.eat(&Tok::RBrack)? {
            self.expect(Tok::LParen)?;
            let (id, _) = self.id()?;
            self.expect(Tok::Comma)?;
            let (source, _) = self.id()?;
            self.expect(Tok::Comma)?;
            let (target, _) = self.id()?;
            self.expect(Tok::Comma)?;
            let label = self.rule_label(vars)?;
            let mark = self.edge_mark()?;
            self.expect(Tok::RParen)?;
            g.edges.push(RuleEdge {
                id: id.to_string(),
                source: source.to_string(),
                target: target.to_string(),
                label,
                mark,
            });
        }
        Ok(g)
    }

    fn rule(&mut self, name: &str) -> PResult<Rule> {
        self.expect(Tok::LParen)?;
        let mut variables: Vec<(String, VarType)> = Vec::new();
        if !self.eat(&Tok::RParen)? {
            loop {
                let mut group = vec![self.ident()?.0];
                while self.eat(&Tok::Comma)? {
                    group.push(self.ident()?.0);
                }
                self.expect(Tok::Colon)?;
                let (ty_name, t) = self.ident()?;
                let ty = VarType::parse(ty_name)
                    .ok_or_else(|| Self::error_at(&t, format!("unknown type `{ty_name}`")))?;
                variables.extend(group.into_iter().map(|v| (v.to_string(), ty)));
                if self.eat(&Tok::RParen)? {
                    break;
                }
                self.expect(Tok::Semi)?;
            }
        }
        let vars: HashMap<&str, (VarId, VarType)> = variables
            .iter()
            .enumerate()
            .map(|(i, (n, ty))| (n.as_str(), (VarId(i as u16), *ty)))
            .collect();
        let lhs = self.rule_graph(&vars)?;
        self.expect(Tok::Arrow)?;
        let rhs = self.rule_graph(&vars)?;
        self.expect_keyword("interface")?;
        self.expect(Tok::Eq)?;
        self.expect(Tok::LBrace)?;
        let mut interface = Vec::new();
        while !self.eat(&Tok::RBrace)? {
            interface.push(self.id()?.0.to_string());
            self.eat(&Tok::Comma)?;
        }
        let condition = if self.at_keyword("where")? {
            self.bump()?;
            Some(self.cond_or(&vars)?)
        } else {
            None
        };
        Ok(Rule {
            name: name.to_string(),
            variables,
            lhs,
            rhs,
            interface,
            condition,
        })
    }

    fn cond_or(&mut self, vars: &HashMap<&str, (VarId, VarType)>) -> PResult<Condition> {
        let mut c = self.cond_and(vars)?;
        while self.at_keyword("or")? {
            self.bump()?;
            c = Condition::Or(Box::new(c), Box::new(self.cond_and(vars)?));
        }
        Ok(c)
    }

    fn cond_and(&mut self, vars: &HashMap<&str, (VarId, VarType)>) -> PResult<Condition> {
        let mut c = self.cond_not(vars)?;
        while self.at_keyword("and")? {
            self.bump()?;
            c = Condition::And(Box::new(c), Box::new(self.cond_not(vars)?));
        }
        Ok(c)
    }

    fn cond_not(&mut self, vars: &HashMap<&str, (VarId, VarType)>) -> PResult<Condition> {
        if self.at_keyword("not")? {
            self.bump()?;
            return Ok(Condition::Not(Box::new(self.cond_not(vars)?)));
        }
        if self.eat(&Tok::LParen)? {
            let c = self.cond_or(vars)?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        if self.at_keyword("edge")? && !vars.contains_key("edge") {
            self.bump()?;
            self.expect(Tok::LParen)?;
            let (a, _) = self.id()?;
            self.expect(Tok::Comma)?;
            let (b, _) = self.id()?;
            self.expect(Tok::RParen)?;
            return Ok(Condition::Edge(a.to_string(), b.to_string()));
        }
        let left = self.rule_label(vars)?;
        let t = self.bump()?;
        let eq = match t.tok {
            Tok::Eq => true,
            Tok::Neq => false,
            _ => return Err(Self::error_at(&t, format!("expected `=` or `!=`, found {}", t.tok))),
        };
        let right = self.rule_label(vars)?;
        Ok(if eq {
            Condition::ListEq(left, right)
        } else {
            Condition::ListNeq(left, right)
        })
    }

    fn command_seq(&mut self, calls: &mut Vec<(String, Token<'a>)>) -> PResult<Command> {
        let first = self.command(calls)?;
        if self.eat(&Tok::Semi)? {
            Ok(Command::seq(first, self.command_seq(calls)?))
        } else {
            Ok(first)
        }
    }

    fn command(&mut self, calls: &mut Vec<(String, Token<'a>)>) -> PResult<Command> {
        if self.at_keyword("if")? {
            self.bump()?;
            let cond = self.block(calls)?;
            self.expect_keyword("then")?;
            let then = self.block(calls)?;
            let els = if self.at_keyword("else")? {
                self.bump()?;
                self.block(calls)?
            } else {
                Command::Skip
            };
            return Ok(Command::if_then_else(cond, then, els));
        }
        if self.at_keyword("try")? {
            self.bump()?;
            let cond = self.block(calls)?;
            let then = if self.at_keyword("then")? {
                self.bump()?;
                self.block(calls)?
            } else {
                Command::Skip
            };
            let els = if self.at_keyword("else")? {
                self.bump()?;
                self.block(calls)?
            } else {
                Command::Skip
            };
            return Ok(Command::try_then_else(cond, then, els));
        }
        self.block(calls)
    }

    fn block(&mut self, calls: &mut Vec<(String, Token<'a>)>) -> PResult<Command> {
        let t = self.bump()?;
        let c = match t.tok {
            Tok::LParen => {
                let c = self.command_seq(calls)?;
                self.expect(Tok::RParen)?;
                c
            }
            Tok::LBrace => {
                let mut names = Vec::new();
                loop {
                    let (name, nt) = self.ident()?;
                    calls.push((name.to_string(), nt));
                    names.push(name.to_string());
                    if self.eat(&Tok::RBrace)? {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
                Command::RuleSet(names)
            }
            Tok::Ident("skip") => Command::Skip,
            Tok::Ident("fail") => Command::Fail,
            Tok::Ident("break") => Command::Break,
            Tok::Ident(kw @ ("if" | "try" | "then" | "else")) => {
                return Err(Self::error_at(&t, format!("unexpected `{kw}`; wrap it in parentheses")));
            }
            Tok::Ident(name) => {
                calls.push((name.to_string(), t.clone()));
                Command::RuleCall(name.to_string())
            }
            _ => return Err(Self::error_at(&t, format!("expected a command, found {}", t.tok))),
        };
        if self.eat(&Tok::Bang)? {
            Ok(Command::looped(c))
        } else {
            Ok(c)
        }
    }

    fn program(&mut self) -> Result<Program, Diagnostics> {
        let mut program = Program::default();
        let mut calls = Vec::new();
        let mut rule_pos = Vec::new();
        let mut declared: HashSet<String> = HashSet::new();
        loop {
            if self.at(&Tok::Eof)? {
                break;
            }
            let (name, t) = self.ident()?;
            if !declared.insert(name.to_string()) {
                return Err(Self::error_at(&t, format!("`{name}` is declared more than once")).into());
            }
            if self.at(&Tok::LParen)? {
                let rule = self.rule(name)?;
                rule_pos.push(t);
                program.rules.push(rule);
            } else {
                self.expect(Tok::Eq)?;
                let body = self.command_seq(&mut calls)?;
                if name == "Main" {
                    program.main = Some(body);
                } else {
                    program.procedures.push((name.to_string(), body));
                }
            }
        }

        let mut diags = Vec::new();
        for (rule, t) in program.rules.iter().zip(&rule_pos) {
            for d in validate_rule(rule) {
                diags.push(Self::error_at(t, d.to_string()));
            }
        }
        let rule_names: HashSet<&str> = program.rules.iter().map(|r| r.name.as_str()).collect();
        let proc_names: HashSet<&str> = program.procedures.iter().map(|(n, _)| n.as_str()).collect();
        for (name, t) in &calls {
            if !rule_names.contains(name.as_str()) && !proc_names.contains(name.as_str()) {
                diags.push(Self::error_at(t, format!("unknown rule or procedure `{name}`")));
            }
        }
        if program.main.is_none() {
            let end = self.peek().map(|t| (t.line, t.column)).unwrap_or((1, 1));
            diags.push(SourceDiagnostic {
                line: end.0,
                column: end.1,
                message: "program has no Main declaration".into(),
            });
        }
        if !diags.is_empty() {
            return Err(Diagnostics(diags));
        }

        fn resolve(c: &mut Command, procs: &HashSet<&str>) {
            match c {
                Command::RuleCall(name) if procs.contains(name.as_str()) => {
                    *c = Command::ProcCall(std::mem::take(name));
                }
                Command::Seq(a, b) => {
                    resolve(a, procs);
                    resolve(b, procs);
                }
                Command::Loop(a) => resolve(a, procs),
                Command::If(a, b, d) | Command::Try(a, b, d) => {
                    resolve(a, procs);
                    resolve(b, procs);
                    resolve(d, procs);
                }
                _ => {}
            }
        }
        let proc_names: HashSet<String> = proc_names.into_iter().map(String::from).collect();
        let proc_refs: HashSet<&str> = proc_names.iter().map(String::as_str).collect();
        if let Some(main) = &mut program.main {
            resolve(main, &proc_refs);
        }
        for (_, body) in &mut program.procedures {
            resolve(body, &proc_refs);
        }

        // Structural checks (recursion, stray breaks) live in the engine.
        if let Err(e) = Engine::new(&program, MatchMode::default()) {
            return Err(SourceDiagnostic {
                line: 1,
                column: 1,
                message: e.to_string(),
            }
            .into());
        }
        Ok(program)
    }
}

pub fn parse_host_graph(text: &str) -> Result<Graph, Diagnostics> {
    Parser::new(text).host_graph().map_err(Diagnostics::from)
}

pub fn parse_program(text: &str) -> Result<Program, Diagnostics> {
    Parser::new(text).program()
}

/// Writes `g` in the host-graph format.
///
/// Nodes appear in insertion order among survivors, edges grouped by source
/// in insertion order. Elements created by rules have no textual id; they get
/// fresh ids `n<k>` / `e<k>` that avoid every existing id.
pub fn serialize_graph(g: &Graph) -> String {
    let saved = g.steps();
    let mut nodes: Vec<NodeHandle> = g.nodes().collect();
    nodes.reverse();
    let mut out = String::with_capacity(16 + nodes.len() * 16);

    let mut used: HashSet<&str> = HashSet::new();
    let mut edge_used: HashSet<&str> = HashSet::new();
    let mut edges = Vec::with_capacity(g.edge_count());
    for &n in &nodes {
        if let Some(name) = g.node(n).name() {
            used.insert(name);
        }
        let mut outs: Vec<_> = g.out_edges(n).collect();
        outs.reverse();
        for &e in &outs {
            if let Some(name) = g.edge(e).name() {
                edge_used.insert(name);
            }
        }
        edges.extend(outs);
    }
    let mut names: HashMap<NodeHandle, String> = HashMap::new();
    let mut next_node = 0usize;
    let fresh = |used: &HashSet<&str>, prefix: char, counter: &mut usize| loop {
        let candidate = format!("{prefix}{counter}");
        *counter += 1;
        if !used.contains(candidate.as_str()) {
            return candidate;
        }
    };
    for &n in &nodes {
        if g.node(n).name().is_none() {
            let name = fresh(&used, 'n', &mut next_node);
            names.insert(n, name);
        }
    }
    let node_name = |n: NodeHandle| -> &str {
        match g.node(n).name() {
            Some(s) => s,
            None => names[&n].as_str(),
        }
    };

    out.push('[');
    for &n in &nodes {
        let node = g.node(n);
        let _ = write!(out, " ({}", node_name(n));
        if node.is_root() {
            out.push_str("(R)");
        }
        let _ = write!(out, ", {}", node.label());
        if let Some(m) = node.mark().name() {
            let _ = write!(out, " # {m}");
        }
        out.push(')');
    }
    out.push_str(" |");
    let mut next_edge = 0usize;
    for &e in &edges {
        let edge = g.edge(e);
        let id = match edge.name() {
            Some(s) => s.to_string(),
            None => fresh(&edge_used, 'e', &mut next_edge),
        };
        let _ = write!(
            out,
            " ({id}, {}, {}, {}",
            node_name(edge.source()),
            node_name(edge.target()),
            edge.label()
        );
        if let Some(m) = edge.mark().name() {
            let _ = write!(out, " # {m}");
        }
        out.push(')');
    }
    out.push_str(" ]");
    g.reset_steps();
    g.add_steps(saved);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpreter::Command as C;

    #[test]
    fn single_node() {
        let g = parse_host_graph("[ (n1, empty) | ]").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn marks_roots_and_labels() {
        let text = r#"[ (n1(R), 1 # grey) (n2, "a":2) | (e1, n1, n2, empty # dashed) ]"#;
        let g = parse_host_graph(text).unwrap();
        let nodes: Vec<_> = g.nodes().collect();
        let n1 = nodes.iter().copied().find(|&n| g.node(n).name() == Some("n1")).unwrap();
        let n2 = nodes.iter().copied().find(|&n| g.node(n).name() == Some("n2")).unwrap();
        assert!(g.node(n1).is_root());
        assert_eq!(g.node(n1).mark(), NodeMark::Grey);
        assert_eq!(g.node(n2).label(), &HostLabel(vec![Atom::Str("a".into()), Atom::Int(2)]));
        let e = g.out_edges(n1).next().unwrap();
        assert_eq!(g.edge(e).mark(), EdgeMark::Dashed);
        assert_eq!(serialize_graph(&g), text);
    }

    #[test]
    fn huge_ids_are_opaque_keys() {
        let g = parse_host_graph("[ (999999999999, empty) (123456789012345678901234567890, 5) | (e, 999999999999, 123456789012345678901234567890, empty) ]").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn empty_graph_round_trip() {
        let g = parse_host_graph("[ | ]").unwrap();
        assert_eq!(serialize_graph(&g), "[ | ]");
        let g = parse_host_graph("[|]").unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn comments_and_crlf() {
        let g = parse_host_graph("// host\r\n[ (a, 1) // first\r\n (b, -2) | (e, a, b, \"x\\\"y\") ]\r\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(serialize_graph(&g), r#"[ (a, 1) (b, -2) | (e, a, b, "x\"y") ]"#);
    }

    #[test]
    fn host_errors() {
        let cases = [
            ("[ (a, empty) (a, empty) | ]", "duplicate node id"),
            ("[ (a, empty) | (e, a, b, empty) ]", "unknown node `b`"),
            ("[ (a, empty # purple) | ]", "bad node mark"),
            ("[ (a, empty # dashed) | ]", "bad node mark"),
            ("[ (a, empty) | (e, a, a, empty # grey) ]", "bad edge mark"),
            ("[ (a, empty) | (e, a, a, empty) (e, a, a, empty) ]", "duplicate edge id"),
            ("[ (a, empty) ", "expected"),
            ("[ (a, 1:) | ]", "expected an integer"),
            ("[ (a(Q), 1) | ]", "root tag"),
            ("[ | ] x", "end of input"),
        ];
        for (text, needle) in cases {
            let err = parse_host_graph(text).unwrap_err();
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn diagnostic_positions() {
        let err = parse_host_graph("[ (a, empty)\n  (a, empty) | ]").unwrap_err();
        assert_eq!((err.0[0].line, err.0[0].column), (2, 4));
    }

    #[test]
    fn unnamed_nodes_get_fresh_ids() {
        let mut g = parse_host_graph("[ (n0, empty) | ]").unwrap();
        let a = g.add_node(HostLabel::empty(), NodeMark::None, false);
        let b = g.nodes().last().unwrap();
        g.add_edge(a, b, HostLabel::empty(), EdgeMark::None);
        assert_eq!(serialize_graph(&g), "[ (n0, empty) (n1, empty) | (e0, n1, n0, empty) ]");
    }

    const IS_DISCRETE: &str = "
        Main = del!; if node then fail
        del(x: list) [ (1, x) | ] => [ | ] interface = { }
        node(x: list) [ (1, x) | ] => [ (1, x) | ] interface = { 1 }
    ";

    #[test]
    fn discrete_program_ast() {
        let p = parse_program(IS_DISCRETE).unwrap();
        assert_eq!(
            p.main,
            Some(C::seq(
                C::looped(C::RuleCall("del".into())),
                C::if_then_else(C::RuleCall("node".into()), C::Fail, C::Skip)
            ))
        );
        assert_eq!(p.rules.len(), 2);
        assert!(p.rules[0].rhs.nodes.is_empty());
    }

    #[test]
    fn where_clause() {
        let p = parse_program(
            "Main = link!
             link(a, b, x, y, z: list)
               [ (1, x) (2, y) (3, z) | (e1, 1, 2, a) (e2, 2, 3, b) ]
               => [ (1, x) (2, y) (3, z) | (e1, 1, 2, a) (e2, 2, 3, b) (e3, 1, 3, empty) ]
               interface = { 1, 2, 3 }
               where not edge(1, 3)",
        )
        .unwrap();
        assert_eq!(
            p.rules[0].condition,
            Some(Condition::Not(Box::new(Condition::Edge("1".into(), "3".into()))))
        );
    }

    #[test]
    fn procedures_resolve() {
        let p = parse_program(
            "Main = Reduce!; try Delete else skip
             Reduce = {a, b}
             Delete = a
             a() [ (1, empty) | ] => [ | ] interface = {}
             b() [ (1, 1) | ] => [ | ] interface = {}",
        )
        .unwrap();
        assert_eq!(
            p.main,
            Some(C::seq(
                C::looped(C::ProcCall("Reduce".into())),
                C::try_then_else(C::ProcCall("Delete".into()), C::Skip, C::Skip)
            ))
        );
    }

    #[test]
    fn program_errors() {
        let cases = [
            ("r() [ | ] => [ | ] interface = {}", "no Main"),
            ("Main = nope", "unknown rule or procedure `nope`"),
            ("Main = r\n r(x: list) [ | ] => [ (1, x) | ] interface = {}", "unbound variable"),
            ("Main = r\n r(x: list) [ (1, y) | ] => [ | ] interface = {}", "undeclared variable `y`"),
            ("Main = r\n r(x: lst) [ | ] => [ | ] interface = {}", "unknown type"),
            ("Main = break", "outside of a loop"),
            ("Main = P\n P = Q\n Q = P", "recursive"),
            ("Main = skip\n Main = skip", "more than once"),
            ("Main = (skip", "expected `)`"),
            ("Main = r\n r() [ (1, empty) | ] => [ | ] interface = {} where edge(1, 3)", "unknown left-hand node `3`"),
        ];
        for (text, needle) in cases {
            let err = parse_program(text).unwrap_err();
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn list_conditions() {
        let p = parse_program(
            "Main = r
             r(x, y: list; n: int) [ (1, x) (2, n:y) | ] => [ (1, x) (2, n:y) | ] interface = {1, 2}
             where x = y and (x != 1 or not edge(2, 1))",
        )
        .unwrap();
        assert!(matches!(p.rules[0].condition, Some(Condition::And(..))));
    }
}
