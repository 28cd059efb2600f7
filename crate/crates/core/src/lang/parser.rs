use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::diag::{DiagCode, Diagnostic, Diagnostics};
use super::lexer::{lex, Tok, Token};
use super::validate::validate_with_positions;

const KEYWORDS: &[&str] = &[
    "decl", "begin", "end", "if", "then", "else", "fi", "while", "do", "od", "skip", "assume",
    "assert", "call", "return", "goto", "or", "true", "false", "choose",
];

/// Source positions recorded while parsing, used to place validation diagnostics.
#[derive(Debug, Default, Clone)]
pub struct SourceMap {
    pub statements: HashMap<(String, Label), (usize, usize)>,
    pub procedures: HashMap<String, (usize, usize)>,
    pub globals: HashMap<String, (usize, usize)>,
}

/// Parse and validate a Boolean program.
pub fn parse_program(text: &str) -> Result<Program, Diagnostics> {
    let (program, map) = parse_unvalidated(text).map_err(|d| Diagnostics(vec![d]))?;
    validate_with_positions(&program, &map)?;
    Ok(program)
}

/// Parse only; the result may violate program invariants.
pub fn parse_unvalidated(text: &str) -> Result<(Program, SourceMap), Diagnostic> {
    let tokens = lex(text)?;
    let explicit: HashSet<String> = tokens
        .windows(2)
        .filter_map(|w| match (&w[0].tok, &w[1].tok) {
            (Tok::Ident(s), Tok::Colon) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser {
        tokens,
        pos: 0,
        explicit,
        auto: 0,
        map: SourceMap::default(),
        proc_name: String::new(),
    };
    let program = p.program()?;
    Ok((program, p.map))
}

/// Parse a standalone Boolean expression.
pub fn parse_expr(text: &str) -> Result<BoolExpr, Diagnostic> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        explicit: HashSet::new(),
        auto: 0,
        map: SourceMap::default(),
        proc_name: String::new(),
    };
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of expression")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    explicit: HashSet<String>,
    auto: usize,
    map: SourceMap,
    proc_name: String,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(DiagCode::SyntaxError, self.here(), msg))
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Eof => "end of input".to_string(),
            t => format!("{t:?}"),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", Self::describe(self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected '{kw}', found {}", Self::describe(self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            t => self.err(format!("expected {what}, found {}", Self::describe(&t))),
        }
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<(String, (usize, usize))>> {
        let mut out = Vec::new();
        loop {
            let pos = self.here();
            out.push((self.ident(what)?, pos));
            if *self.peek() == Tok::Comma {
                self.advance();
            } else {
                return Ok(out);
            }
        }
    }

    /// `decl a, b [: bool];`
    fn decl(&mut self) -> PResult<Vec<(String, (usize, usize))>> {
        self.keyword("decl")?;
        let names = self.ident_list("variable name")?;
        if *self.peek() == Tok::Colon {
            self.advance();
            match self.peek().clone() {
                Tok::Ident(t) if t.eq_ignore_ascii_case("bool") => {
                    self.advance();
                }
                t => {
                    return self.err(format!(
                        "only Boolean variables are supported, found type {}",
                        Self::describe(&t)
                    ))
                }
            }
        }
        self.expect(Tok::Semi, "';' after declaration")?;
        Ok(names)
    }

    fn program(&mut self) -> PResult<Program> {
        let mut globals = Vec::new();
        while self.is_kw("decl") {
            for (name, pos) in self.decl()? {
                self.map.globals.entry(name.clone()).or_insert(pos);
                globals.push(name);
            }
        }
        let mut procedures = Vec::new();
        while *self.peek() != Tok::Eof {
            procedures.push(self.procedure()?);
        }
        if procedures.is_empty() {
            return self.err("expected at least one procedure");
        }
        if let Some(i) = procedures.iter().position(|p| p.name == "main") {
            let main = procedures.remove(i);
            procedures.insert(0, main);
        }
        Ok(Program {
            globals,
            procedures,
        })
    }

    fn procedure(&mut self) -> PResult<Procedure> {
        let pos = self.here();
        let name = self.ident("procedure name")?;
        self.map.procedures.entry(name.clone()).or_insert(pos);
        self.proc_name = name.clone();
        self.expect(Tok::LParen, "'('")?;
        let mut formals = Vec::new();
        if *self.peek() != Tok::RParen {
            formals = self
                .ident_list("formal parameter")?
                .into_iter()
                .map(|(n, _)| n)
                .collect();
        }
        self.expect(Tok::RParen, "')'")?;
        self.keyword("begin")?;
        let mut locals = formals.clone();
        while self.is_kw("decl") {
            locals.extend(self.decl()?.into_iter().map(|(n, _)| n));
        }
        let body = self.stmt_seq(&["end"])?;
        self.keyword("end")?;
        Ok(Procedure {
            name,
            formals,
            locals,
            body,
        })
    }

    fn stmt_seq(&mut self, terminators: &[&str]) -> PResult<Vec<LabeledStatement>> {
        let mut out = Vec::new();
        loop {
            if *self.peek() == Tok::Eof {
                return self.err(format!("expected '{}'", terminators.join("' or '")));
            }
            if terminators.iter().any(|t| self.is_kw(t)) {
                return Ok(out);
            }
            out.push(self.labeled_stmt()?);
            self.expect(Tok::Semi, "';' after statement")?;
        }
    }

    fn fresh_label(&mut self) -> Label {
        loop {
            let name = format!("l_auto_{}", self.auto);
            self.auto += 1;
            if !self.explicit.contains(&name) {
                return Label::new(name);
            }
        }
    }

    fn labeled_stmt(&mut self) -> PResult<LabeledStatement> {
        let pos = self.here();
        let label = match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::Colon) => {
                if KEYWORDS.contains(&s.as_str()) {
                    return self.err(format!("keyword '{s}' cannot be used as a label"));
                }
                self.advance();
                self.advance();
                Label::new(s)
            }
            _ => self.fresh_label(),
        };
        let stmt = self.stmt()?;
        self.map
            .statements
            .insert((self.proc_name.clone(), label.clone()), pos);
        Ok(LabeledStatement { label, stmt })
    }

    fn paren_expr(&mut self) -> PResult<BoolExpr> {
        self.expect(Tok::LParen, "'('")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        Ok(e)
    }

    fn stmt(&mut self) -> PResult<Statement> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            t => return self.err(format!("expected statement, found {}", Self::describe(t))),
        };
        match kw.as_str() {
            "skip" => {
                self.advance();
                Ok(Statement::Skip)
            }
            "return" => {
                self.advance();
                Ok(Statement::Return)
            }
            "goto" => {
                self.advance();
                let mut targets = vec![Label::new(self.ident("label")?)];
                while self.is_kw("or") {
                    self.advance();
                    targets.push(Label::new(self.ident("label")?));
                }
                Ok(Statement::Goto(targets))
            }
            "assume" => {
                self.advance();
                Ok(Statement::Assume(self.paren_expr()?))
            }
            "assert" => {
                self.advance();
                Ok(Statement::Assert(self.paren_expr()?))
            }
            "call" => {
                self.advance();
                let callee = self.ident("procedure name")?;
                self.expect(Tok::LParen, "'('")?;
                let args = if *self.peek() == Tok::RParen {
                    Vec::new()
                } else {
                    self.expr_list()?
                };
                self.expect(Tok::RParen, "')'")?;
                Ok(Statement::Call { callee, args })
            }
            "while" => {
                self.advance();
                let guard = self.paren_expr()?;
                self.keyword("do")?;
                let body = self.stmt_seq(&["od"])?;
                self.keyword("od")?;
                Ok(Statement::While { guard, body })
            }
            "if" => {
                self.advance();
                let guard = self.paren_expr()?;
                if self.is_kw("goto") {
                    self.advance();
                    let target = Label::new(self.ident("label")?);
                    return Ok(Statement::IfGoto { guard, target });
                }
                self.keyword("then")?;
                // `if (g) then goto L;` not followed by `else`/`fi` is a conditional jump.
                let jump = self.is_kw("goto")
                    && matches!(self.peek_at(1), Tok::Ident(_))
                    && *self.peek_at(2) == Tok::Semi
                    && !self.is_kw_at(3, "fi")
                    && !self.is_kw_at(3, "else");
                if jump {
                    self.advance();
                    let target = Label::new(self.ident("label")?);
                    return Ok(Statement::IfGoto { guard, target });
                }
                let then_branch = self.stmt_seq(&["else", "fi"])?;
                let else_branch = if self.is_kw("else") {
                    self.advance();
                    self.stmt_seq(&["fi"])?
                } else {
                    Vec::new()
                };
                self.keyword("fi")?;
                Ok(Statement::If {
                    guard,
                    then_branch,
                    else_branch,
                })
            }
            _ => {
                let targets = self
                    .ident_list("assignment target")?
                    .into_iter()
                    .map(|(n, _)| n)
                    .collect();
                self.expect(Tok::ColonEq, "':='")?;
                let values = self.expr_list()?;
                Ok(Statement::Assign { targets, values })
            }
        }
    }

    fn expr_list(&mut self) -> PResult<Vec<BoolExpr>> {
        let mut out = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.advance();
            out.push(self.expr()?);
        }
        Ok(out)
    }

    // implies := eq ('=>' implies)?
    pub(crate) fn expr(&mut self) -> PResult<BoolExpr> {
        let lhs = self.eq_level()?;
        if *self.peek() == Tok::Implies {
            self.advance();
            let rhs = self.expr()?;
            return Ok(BoolExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn eq_level(&mut self) -> PResult<BoolExpr> {
        let lhs = self.or_level()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.or_level()?;
        if matches!(self.peek(), Tok::Eq | Tok::Ne) {
            return self.err("chained '=' / '!=' must be parenthesized");
        }
        Ok(BoolExpr::binary(op, lhs, rhs))
    }

    fn or_level(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.and_level()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.and_level()?;
            lhs = BoolExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = BoolExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<BoolExpr> {
        if *self.peek() == Tok::Not {
            self.advance();
            return Ok(BoolExpr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<BoolExpr> {
        match self.peek().clone() {
            Tok::Star => {
                self.advance();
                Ok(BoolExpr::Star)
            }
            Tok::LParen => self.paren_expr(),
            Tok::Ident(s) if s == "true" || s == "T" => {
                self.advance();
                Ok(BoolExpr::Const(true))
            }
            Tok::Ident(s) if s == "false" || s == "F" => {
                self.advance();
                Ok(BoolExpr::Const(false))
            }
            Tok::Ident(s) if s == "choose" => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let a = self.expr()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(BoolExpr::Choose(Box::new(a), Box::new(b)))
            }
            Tok::Ident(_) => Ok(BoolExpr::Var(self.ident("variable")?)),
            t => self.err(format!("expected expression, found {}", Self::describe(&t))),
        }
    }
}
