use std::collections::BTreeSet;
use std::fmt;

/// A statement location. Every statement in a parsed program carries one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Eq,
    Ne,
}

impl BinOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
            BinOp::Implies => !a || b,
            BinOp::Eq => a == b,
            BinOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Implies => "=>",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
        }
    }
}

/// Boolean expression. `Star` and `Choose` are the nondeterministic forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Var(String),
    Not(Box<BoolExpr>),
    Binary(BinOp, Box<BoolExpr>, Box<BoolExpr>),
    Star,
    /// `choose(e1, e2)`: true if `e1`, else false if `e2`, else `*`.
    Choose(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(name: impl Into<String>) -> Self {
        BoolExpr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    /// Negation that strips an existing outer `!` instead of doubling it.
    pub fn negated(&self) -> Self {
        match self {
            BoolExpr::Not(e) => (**e).clone(),
            BoolExpr::Const(b) => BoolExpr::Const(!b),
            e => BoolExpr::not(e.clone()),
        }
    }

    pub fn binary(op: BinOp, a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        Self::binary(BinOp::And, a, b)
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        Self::binary(BinOp::Or, a, b)
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        Self::binary(BinOp::Implies, a, b)
    }

    /// Left-nested conjunction; `true` for an empty iterator.
    pub fn and_all(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        items
            .into_iter()
            .reduce(BoolExpr::and)
            .unwrap_or(BoolExpr::Const(true))
    }

    /// Left-nested disjunction; `false` for an empty iterator.
    pub fn or_all(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        items
            .into_iter()
            .reduce(BoolExpr::or)
            .unwrap_or(BoolExpr::Const(false))
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            BoolExpr::Const(_) | BoolExpr::Var(_) => true,
            BoolExpr::Not(e) => e.is_deterministic(),
            BoolExpr::Binary(_, a, b) => a.is_deterministic() && b.is_deterministic(),
            BoolExpr::Star | BoolExpr::Choose(..) => false,
        }
    }

    /// A right-hand side the semantics can execute: `*`, `choose(d, d)` or deterministic.
    pub fn is_well_formed_rhs(&self) -> bool {
        match self {
            BoolExpr::Star => true,
            BoolExpr::Choose(a, b) => a.is_deterministic() && b.is_deterministic(),
            e => e.is_deterministic(),
        }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            BoolExpr::Const(_) | BoolExpr::Star => {}
            BoolExpr::Var(v) => {
                out.insert(v.as_str());
            }
            BoolExpr::Not(e) => e.collect_vars(out),
            BoolExpr::Binary(_, a, b) | BoolExpr::Choose(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replace variables by expressions; unmapped variables are kept.
    pub fn substitute(&self, f: &impl Fn(&str) -> Option<BoolExpr>) -> BoolExpr {
        match self {
            BoolExpr::Const(_) | BoolExpr::Star => self.clone(),
            BoolExpr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            BoolExpr::Not(e) => BoolExpr::not(e.substitute(f)),
            BoolExpr::Binary(op, a, b) => BoolExpr::binary(*op, a.substitute(f), b.substitute(f)),
            BoolExpr::Choose(a, b) => {
                BoolExpr::Choose(Box::new(a.substitute(f)), Box::new(b.substitute(f)))
            }
        }
    }
}

/// Statement types; every statement maps to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatementType {
    Skip,
    Assign,
    Assume,
    Assert,
    Call,
    Return,
    Goto,
}

impl fmt::Display for StatementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatementType::Skip => "skip",
            StatementType::Assign => "assign",
            StatementType::Assume => "assume",
            StatementType::Assert => "assert",
            StatementType::Call => "call",
            StatementType::Return => "return",
            StatementType::Goto => "goto",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Skip,
    /// Parallel assignment `targets := values`.
    Assign {
        targets: Vec<String>,
        values: Vec<BoolExpr>,
    },
    If {
        guard: BoolExpr,
        then_branch: Vec<LabeledStatement>,
        else_branch: Vec<LabeledStatement>,
    },
    /// `if (g) then goto L;` jumps to `L` when `g` holds and falls through otherwise.
    IfGoto {
        guard: BoolExpr,
        target: Label,
    },
    While {
        guard: BoolExpr,
        body: Vec<LabeledStatement>,
    },
    Assume(BoolExpr),
    Assert(BoolExpr),
    Call {
        callee: String,
        args: Vec<BoolExpr>,
    },
    Return,
    Goto(Vec<Label>),
}

impl Statement {
    /// Conditionals and loops are branching `assume` pairs in the transition graph.
    pub fn stmt_type(&self) -> StatementType {
        match self {
            Statement::Skip => StatementType::Skip,
            Statement::Assign { .. } => StatementType::Assign,
            Statement::If { .. }
            | Statement::IfGoto { .. }
            | Statement::While { .. }
            | Statement::Assume(_) => StatementType::Assume,
            Statement::Assert(_) => StatementType::Assert,
            Statement::Call { .. } => StatementType::Call,
            Statement::Return => StatementType::Return,
            Statement::Goto(_) => StatementType::Goto,
        }
    }

    /// The branch guard of a conditional or loop.
    pub fn branch_guard(&self) -> Option<&BoolExpr> {
        match self {
            Statement::If { guard, .. }
            | Statement::IfGoto { guard, .. }
            | Statement::While { guard, .. } => Some(guard),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledStatement {
    pub label: Label,
    pub stmt: Statement,
}

impl LabeledStatement {
    pub fn new(label: impl Into<Label>, stmt: Statement) -> Self {
        LabeledStatement {
            label: label.into(),
            stmt,
        }
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub formals: Vec<String>,
    /// Formals first, then declared locals.
    pub locals: Vec<String>,
    pub body: Vec<LabeledStatement>,
}

impl Procedure {
    /// Statements in pre-order (a compound statement precedes its children).
    pub fn statements(&self) -> Vec<&LabeledStatement> {
        let mut out = Vec::new();
        collect_statements(&self.body, &mut out);
        out
    }

    pub fn find(&self, label: &Label) -> Option<&LabeledStatement> {
        self.statements().into_iter().find(|s| &s.label == label)
    }

    pub fn find_mut(&mut self, label: &Label) -> Option<&mut LabeledStatement> {
        find_in_mut(&mut self.body, label)
    }
}

fn collect_statements<'a>(seq: &'a [LabeledStatement], out: &mut Vec<&'a LabeledStatement>) {
    for ls in seq {
        out.push(ls);
        match &ls.stmt {
            Statement::If {
                then_branch,
                else_branch,
                ..
            } => {
                collect_statements(then_branch, out);
                collect_statements(else_branch, out);
            }
            Statement::While { body, .. } => collect_statements(body, out),
            _ => {}
        }
    }
}

fn find_in_mut<'a>(
    seq: &'a mut [LabeledStatement],
    label: &Label,
) -> Option<&'a mut LabeledStatement> {
    for ls in seq.iter_mut() {
        if &ls.label == label {
            return Some(ls);
        }
        let found = match &mut ls.stmt {
            Statement::If {
                then_branch,
                else_branch,
                ..
            } => find_in_mut(then_branch, label).or_else(|| find_in_mut(else_branch, label)),
            Statement::While { body, .. } => find_in_mut(body, label),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub globals: Vec<String>,
    /// Index 0 is `main`.
    pub procedures: Vec<Procedure>,
}

impl Program {
    pub fn main(&self) -> &Procedure {
        &self.procedures[0]
    }

    pub fn procedure_index(&self, name: &str) -> Option<usize> {
        self.procedures.iter().position(|p| p.name == name)
    }

    /// All variables: globals, then each procedure's locals.
    pub fn all_variables(&self) -> Vec<&str> {
        self.globals
            .iter()
            .chain(self.procedures.iter().flat_map(|p| p.locals.iter()))
            .map(String::as_str)
            .collect()
    }

    /// In-scope variables of a procedure: globals then its locals.
    pub fn inscope(&self, proc: usize) -> Vec<String> {
        self.globals
            .iter()
            .chain(self.procedures[proc].locals.iter())
            .cloned()
            .collect()
    }

    pub fn statement_count(&self) -> usize {
        self.procedures.iter().map(|p| p.statements().len()).sum()
    }
}
