//! Host labels, rule-label patterns and their matching.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Atom {
    Int(i64),
    Str(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(v) => write!(f, "{v}"),
            Atom::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// A list of atoms. The empty list is written `empty`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct HostLabel(pub Vec<Atom>);

impl HostLabel {
    pub const fn empty() -> Self {
        HostLabel(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<Atom>> for HostLabel {
    fn from(items: Vec<Atom>) -> Self {
        HostLabel(items)
    }
}

impl fmt::Display for HostLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("empty");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum VarType {
    Int,
    String,
    Atom,
    List,
}

impl VarType {
    pub fn parse(s: &str) -> Option<VarType> {
        Some(match s {
            "int" => VarType::Int,
            "string" => VarType::String,
            "atom" => VarType::Atom,
            "list" => VarType::List,
            _ => return None,
        })
    }

    /// Whether a single atom inhabits this type.
    pub fn admits(self, atom: &Atom) -> bool {
        matches!(
            (self, atom),
            (VarType::Int, Atom::Int(_)) | (VarType::String, Atom::Str(_)) | (VarType::Atom | VarType::List, _)
        )
    }
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarType::Int => "int",
            VarType::String => "string",
            VarType::Atom => "atom",
            VarType::List => "list",
        })
    }
}

/// Index of a variable in its rule's declaration list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct VarId(pub u16);

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LabelItem {
    Const(Atom),
    Var { id: VarId, ty: VarType },
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RuleLabel(pub Vec<LabelItem>);

impl RuleLabel {
    pub fn constant(label: &HostLabel) -> Self {
        RuleLabel(label.0.iter().cloned().map(LabelItem::Const).collect())
    }

    pub fn var(id: VarId, ty: VarType) -> Self {
        RuleLabel(vec![LabelItem::Var { id, ty }])
    }

    pub fn list_var_count(&self) -> usize {
        self.0
            .iter()
            .filter(|i| matches!(i, LabelItem::Var { ty: VarType::List, .. }))
            .count()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().filter_map(|i| match i {
            LabelItem::Var { id, .. } => Some(*id),
            LabelItem::Const(_) => None,
        })
    }
}

/// Variable assignment built up while matching a rule.
///
/// Bindings made after a [`Binding::checkpoint`] can be undone with
/// [`Binding::restore`], which is how the matcher backtracks.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    values: Vec<Option<Vec<Atom>>>,
    trail: Vec<VarId>,
}

impl Binding {
    pub fn new(vars: usize) -> Self {
        Binding {
            values: vec![None; vars],
            trail: Vec::new(),
        }
    }

    pub fn get(&self, id: VarId) -> Option<&[Atom]> {
        self.values.get(id.0 as usize)?.as_deref()
    }

    pub fn bind(&mut self, id: VarId, value: Vec<Atom>) {
        let idx = id.0 as usize;
        if idx >= self.values.len() {
            self.values.resize(idx + 1, None);
        }
        debug_assert!(self.values[idx].is_none(), "variable bound twice");
        self.values[idx] = Some(value);
        self.trail.push(id);
    }

    pub fn checkpoint(&self) -> usize {
        self.trail.len()
    }

    pub fn restore(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let id = self.trail.pop().unwrap();
            self.values[id.0 as usize] = None;
        }
    }

    pub fn bound_count(&self) -> usize {
        self.trail.len()
    }
}

/// Matches `pattern` against `value`, extending `env`.
///
/// On failure `env` is left exactly as it was.
pub fn match_label(pattern: &RuleLabel, value: &HostLabel, env: &mut Binding) -> bool {
    let mark = env.checkpoint();
    if match_items(&pattern.0, &value.0, env) {
        true
    } else {
        env.restore(mark);
        false
    }
}

fn match_items(pattern: &[LabelItem], value: &[Atom], env: &mut Binding) -> bool {
    let list_pos = pattern
        .iter()
        .position(|i| matches!(i, LabelItem::Var { ty: VarType::List, .. }));
    match list_pos {
        None => {
            pattern.len() == value.len()
                && pattern.iter().zip(value).all(|(p, v)| match_single(p, v, env))
        }
        Some(pos) => {
            let fixed = pattern.len() - 1;
            if value.len() < fixed {
                return false;
            }
            let tail = pattern.len() - pos - 1;
            let middle_end = value.len() - tail;
            let prefix_ok = pattern[..pos]
                .iter()
                .zip(&value[..pos])
                .all(|(p, v)| match_single(p, v, env));
            if !prefix_ok {
                return false;
            }
            let suffix_ok = pattern[pos + 1..]
                .iter()
                .zip(&value[middle_end..])
                .all(|(p, v)| match_single(p, v, env));
            if !suffix_ok {
                return false;
            }
            let LabelItem::Var { id, .. } = pattern[pos] else {
                unreachable!()
            };
            bind_or_compare(id, &value[pos..middle_end], env)
        }
    }
}

fn match_single(item: &LabelItem, atom: &Atom, env: &mut Binding) -> bool {
    match item {
        LabelItem::Const(c) => c == atom,
        LabelItem::Var { id, ty } => {
            ty.admits(atom) && bind_or_compare(*id, std::slice::from_ref(atom), env)
        }
    }
}

fn bind_or_compare(id: VarId, fragment: &[Atom], env: &mut Binding) -> bool {
    match env.get(id) {
        Some(bound) => bound == fragment,
        None => {
            env.bind(id, fragment.to_vec());
            true
        }
    }
}

/// Builds the host label described by `pattern` under `env`.
///
/// Returns `None` if a variable is unbound; validated rules never hit this.
pub fn instantiate(pattern: &RuleLabel, env: &Binding) -> Option<HostLabel> {
    let mut out = Vec::with_capacity(pattern.0.len());
    for item in &pattern.0 {
        match item {
            LabelItem::Const(a) => out.push(a.clone()),
            LabelItem::Var { id, .. } => out.extend_from_slice(env.get(*id)?),
        }
    }
    Some(HostLabel(out))
}
