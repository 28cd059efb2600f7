//! SMT-LIB 2 scripts, external solvers and their models.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::crc::ExistsForallProblem;
use super::expand::Encoding;
use super::space::{RepairModel, RepairSpace};
use super::{RepairError, SolverConfig};

/// Quote a symbol unless it is a simple SMT-LIB symbol.
pub fn symbol(s: &str) -> String {
    let simple = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

/// Script with the universally quantified constraints kept as `forall`.
pub fn emit_quantified(p: &ExistsForallProblem) -> String {
    let mut s = String::new();
    s.push_str("(set-option :produce-models true)\n");
    for f in &p.functions {
        let args = vec!["Bool"; f.arity].join(" ");
        let _ = writeln!(s, "(declare-fun {} ({args}) Bool)", symbol(&f.name));
    }
    for group in &p.selectors {
        for sel in group {
            let _ = writeln!(s, "(declare-const {} Bool)", symbol(sel));
        }
        let names: Vec<String> = group.iter().map(|x| symbol(x)).collect();
        let _ = writeln!(s, "(assert (or {}))", names.join(" "));
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let _ = writeln!(s, "(assert (not (and {} {})))", names[i], names[j]);
            }
        }
    }
    for c in &p.costs {
        let _ = writeln!(s, "(declare-const {} Int)", symbol(&c.counter));
    }
    for c in &p.costs {
        let mut parts: Vec<String> = c.prev.iter().map(|x| symbol(x)).collect();
        for (sel, cost) in &c.terms {
            parts.push(match sel {
                Some(sel) => format!("(ite {} {cost} 0)", symbol(sel)),
                None => cost.to_string(),
            });
        }
        let rhs = match parts.len() {
            0 => "0".to_string(),
            1 => parts.pop().unwrap(),
            _ => format!("(+ {})", parts.join(" ")),
        };
        let _ = writeln!(s, "(assert (= {} {rhs}))", symbol(&c.counter));
    }
    let _ = writeln!(s, "(assert (<= {} {}))", symbol(&p.total), p.budget);
    for c in &p.constraints {
        let _ = writeln!(s, "; {}", c.path.replace('\n', " "));
        let vars = c.vars();
        if vars.is_empty() {
            let _ = writeln!(s, "(assert {})", c.body.smt());
        } else {
            let bound: Vec<String> = vars.iter().map(|v| format!("({} Bool)", v.symbol())).collect();
            let _ = writeln!(s, "(assert (forall ({}) {}))", bound.join(" "), c.body.smt());
        }
    }
    s.push_str("(check-sat)\n(get-model)\n");
    s
}

/// Script asserting the expanded propositional encoding clause by clause.
pub fn emit_expanded(enc: &Encoding) -> String {
    let mut s = String::new();
    s.push_str("(set-option :produce-models true)\n(set-logic QF_UF)\n");
    for name in &enc.cnf.names {
        let _ = writeln!(s, "(declare-const {} Bool)", symbol(name));
    }
    let lit = |l: i32| {
        let name = symbol(&enc.cnf.names[l.unsigned_abs() as usize - 1]);
        if l > 0 {
            name
        } else {
            format!("(not {name})")
        }
    };
    for c in &enc.cnf.clauses {
        match c.len() {
            0 => s.push_str("(assert false)\n"),
            1 => {
                let _ = writeln!(s, "(assert {})", lit(c[0]));
            }
            _ => {
                let lits: Vec<String> = c.iter().map(|&l| lit(l)).collect();
                let _ = writeln!(s, "(assert (or {}))", lits.join(" "));
            }
        }
    }
    s.push_str("(check-sat)\n(get-model)\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            SExpr::List(_) => None,
        }
    }

    fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            SExpr::Atom(_) => None,
        }
    }
}

/// Parse a sequence of s-expressions.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().ok_or("unbalanced ')'")?;
                stack.last_mut().ok_or("unbalanced ')'")?.push(SExpr::List(done));
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '|' => {
                let end = chars[i + 1..].iter().position(|&c| c == '|').ok_or("unterminated '|'")?;
                let sym: String = chars[i + 1..i + 1 + end].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(sym));
                i += end + 2;
            }
            '"' => {
                let mut j = i + 1;
                let mut out = String::new();
                loop {
                    match chars.get(j) {
                        None => return Err("unterminated string".into()),
                        Some('"') if chars.get(j + 1) == Some(&'"') => {
                            out.push('"');
                            j += 2;
                        }
                        Some('"') => break,
                        Some(&c) => {
                            out.push(c);
                            j += 1;
                        }
                    }
                }
                stack.last_mut().unwrap().push(SExpr::Atom(out));
                i = j + 1;
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|;".contains(chars[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap())
}

#[derive(Debug, Clone)]
struct Definition {
    params: Vec<String>,
    body: SExpr,
}

/// Definitions from a `get-model` response.
#[derive(Debug, Clone, Default)]
pub struct SmtModel {
    defs: HashMap<String, Definition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Bool(bool),
    Int(i64),
}

impl SmtModel {
    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    /// Value of a Boolean function at given arguments; `None` if undefined.
    pub fn call_bool(&self, name: &str, args: &[bool]) -> Result<Option<bool>, String> {
        let Some(d) = self.defs.get(name) else { return Ok(None) };
        if d.params.len() != args.len() {
            return Err(format!("{name} takes {} arguments", d.params.len()));
        }
        let env: HashMap<String, Value> = d.params.iter().cloned().zip(args.iter().map(|&b| Value::Bool(b))).collect();
        match self.eval(&d.body, &env, 0)? {
            Value::Bool(b) => Ok(Some(b)),
            Value::Int(_) => Err(format!("{name} is not Boolean")),
        }
    }

    pub fn int(&self, name: &str) -> Result<Option<i64>, String> {
        let Some(d) = self.defs.get(name) else { return Ok(None) };
        match self.eval(&d.body, &HashMap::new(), 0)? {
            Value::Int(n) => Ok(Some(n)),
            Value::Bool(_) => Err(format!("{name} is not an integer")),
        }
    }

    fn eval(&self, e: &SExpr, env: &HashMap<String, Value>, depth: usize) -> Result<Value, String> {
        if depth > 10_000 {
            return Err("model definitions nest too deeply".into());
        }
        let b = |v: Value| match v {
            Value::Bool(b) => Ok(b),
            Value::Int(_) => Err("expected Boolean".to_string()),
        };
        let n = |v: Value| match v {
            Value::Int(n) => Ok(n),
            Value::Bool(_) => Err("expected integer".to_string()),
        };
        match e {
            SExpr::Atom(a) => {
                if let Some(v) = env.get(a) {
                    return Ok(*v);
                }
                match a.as_str() {
                    "true" => Ok(Value::Bool(true)),
                    "false" => Ok(Value::Bool(false)),
                    _ => {
                        if let Ok(k) = a.parse::<i64>() {
                            return Ok(Value::Int(k));
                        }
                        let d = self.defs.get(a).ok_or_else(|| format!("unknown symbol {a}"))?;
                        if !d.params.is_empty() {
                            return Err(format!("{a} used without arguments"));
                        }
                        self.eval(&d.body, &HashMap::new(), depth + 1)
                    }
                }
            }
            SExpr::List(items) => {
                let head = items.first().and_then(SExpr::atom).ok_or("bad application")?;
                let args = &items[1..];
                let ev = |x: &SExpr| self.eval(x, env, depth + 1);
                match head {
                    "not" => Ok(Value::Bool(!b(ev(&args[0])?)?)),
                    "and" => {
                        for x in args {
                            if !b(ev(x)?)? {
                                return Ok(Value::Bool(false));
                            }
                        }
                        Ok(Value::Bool(true))
                    }
                    "or" => {
                        for x in args {
                            if b(ev(x)?)? {
                                return Ok(Value::Bool(true));
                            }
                        }
                        Ok(Value::Bool(false))
                    }
                    "xor" => {
                        let mut acc = false;
                        for x in args {
                            acc ^= b(ev(x)?)?;
                        }
                        Ok(Value::Bool(acc))
                    }
                    "=>" => {
                        let vals = args.iter().map(|x| ev(x).and_then(b)).collect::<Result<Vec<_>, _>>()?;
                        let (last, init) = vals.split_last().ok_or("empty implication")?;
                        Ok(Value::Bool(init.iter().any(|v| !v) || *last))
                    }
                    "=" => {
                        let vals = args.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
                        Ok(Value::Bool(vals.windows(2).all(|w| w[0] == w[1])))
                    }
                    "distinct" => {
                        let vals = args.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
                        let all = (0..vals.len()).all(|i| (i + 1..vals.len()).all(|j| vals[i] != vals[j]));
                        Ok(Value::Bool(all))
                    }
                    "ite" => {
                        if b(ev(&args[0])?)? {
                            ev(&args[1])
                        } else {
                            ev(&args[2])
                        }
                    }
                    "let" => {
                        let binds = args.first().and_then(SExpr::list).ok_or("bad let")?;
                        let mut inner = env.clone();
                        for bnd in binds {
                            let pair = bnd.list().ok_or("bad let binding")?;
                            let name = pair[0].atom().ok_or("bad let binding")?;
                            inner.insert(name.to_string(), ev(&pair[1])?);
                        }
                        self.eval(&args[1], &inner, depth + 1)
                    }
                    "-" if args.len() == 1 => Ok(Value::Int(-n(ev(&args[0])?)?)),
                    "-" => {
                        let mut acc = n(ev(&args[0])?)?;
                        for x in &args[1..] {
                            acc -= n(ev(x)?)?;
                        }
                        Ok(Value::Int(acc))
                    }
                    "+" => {
                        let mut acc = 0;
                        for x in args {
                            acc += n(ev(x)?)?;
                        }
                        Ok(Value::Int(acc))
                    }
                    "<=" | "<" | ">=" | ">" => {
                        let (x, y) = (n(ev(&args[0])?)?, n(ev(&args[1])?)?);
                        Ok(Value::Bool(match head {
                            "<=" => x <= y,
                            "<" => x < y,
                            ">=" => x >= y,
                            _ => x > y,
                        }))
                    }
                    f => {
                        let d = self.defs.get(f).ok_or_else(|| format!("unknown function {f}"))?;
                        let vals = args.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
                        let inner: HashMap<String, Value> = d.params.iter().cloned().zip(vals).collect();
                        self.eval(&d.body, &inner, depth + 1)
                    }
                }
            }
        }
    }
}

/// Outcome of running a script.
#[derive(Debug, Clone)]
pub enum SmtAnswer {
    Sat(SmtModel),
    Unsat,
    Unknown(String),
}

/// Read a solver response: a status line, then a model for `sat`.
pub fn parse_response(text: &str) -> Result<SmtAnswer, RepairError> {
    let items = parse_sexprs(text).map_err(RepairError::ModelParse)?;
    let mut it = items.iter();
    let status = it.next().and_then(SExpr::atom).ok_or_else(|| RepairError::ModelParse("empty response".into()))?;
    match status {
        "sat" => {}
        "unsat" => return Ok(SmtAnswer::Unsat),
        "unknown" => return Ok(SmtAnswer::Unknown("solver answered unknown".into())),
        // errors come back as (error "...")
        _ => return Err(RepairError::Solver(text.trim().to_string())),
    }
    let model = it.next().and_then(SExpr::list).ok_or_else(|| RepairError::ModelParse("no model".into()))?;
    let mut defs = HashMap::new();
    for d in model {
        let Some(parts) = d.list() else { continue };
        if parts.first().and_then(SExpr::atom) != Some("define-fun") || parts.len() != 5 {
            continue;
        }
        let name = parts[1].atom().ok_or_else(|| RepairError::ModelParse("bad define-fun".into()))?;
        let params = parts[2]
            .list()
            .ok_or_else(|| RepairError::ModelParse("bad parameter list".into()))?
            .iter()
            .map(|p| p.list().and_then(|l| l[0].atom()).map(String::from))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| RepairError::ModelParse("bad parameter".into()))?;
        defs.insert(
            name.to_string(),
            Definition {
                params,
                body: parts[4].clone(),
            },
        );
    }
    Ok(SmtAnswer::Sat(SmtModel { defs }))
}

/// Run an external solver on a script, feeding it on standard input.
pub fn run_solver(cfg: &SolverConfig, script: &str) -> Result<(String, Duration), RepairError> {
    let (prog, args) = cfg
        .command
        .split_first()
        .ok_or_else(|| RepairError::Solver("empty solver command".into()))?;
    let start = Instant::now();
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| RepairError::Solver(format!("cannot start {prog}: {e}")))?;
    let mut stdin = child.stdin.take().unwrap();
    let script = script.to_string();
    let writer = std::thread::spawn(move || stdin.write_all(script.as_bytes()));
    let mut stdout = child.stdout.take().unwrap();
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    loop {
        if child.try_wait().map_err(|e| RepairError::Solver(e.to_string()))?.is_some() {
            break;
        }
        if start.elapsed() > cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(RepairError::Timeout(cfg.timeout));
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    let _ = writer.join();
    let out = reader
        .join()
        .map_err(|_| RepairError::Solver("reader thread panicked".into()))?
        .map_err(|e| RepairError::Solver(e.to_string()))?;
    Ok((out, start.elapsed()))
}

fn table(model: &SmtModel, name: &str, arity: usize) -> Result<Vec<bool>, RepairError> {
    (0..1usize << arity)
        .map(|row| {
            let args: Vec<bool> = (0..arity).map(|i| row >> i & 1 == 1).collect();
            model
                .call_bool(name, &args)
                .map(|v| v.unwrap_or(false))
                .map_err(RepairError::ModelParse)
        })
        .collect()
}

/// Read a repair back from a model of the quantified script. Symbols the
/// solver left out are taken as `false`.
pub fn decode_quantified(space: &RepairSpace, model: &SmtModel) -> Result<RepairModel, RepairError> {
    let choice = space
        .locations
        .iter()
        .enumerate()
        .map(|(li, loc)| {
            if loc.options.len() == 1 {
                return Ok(loc.options[0].schema);
            }
            for o in &loc.options {
                if model
                    .call_bool(&space.selector_name(li, o.schema), &[])
                    .map_err(RepairError::ModelParse)?
                    == Some(true)
                {
                    return Ok(o.schema);
                }
            }
            Err(RepairError::ModelParse(format!("no update selected at {}", loc.name)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tables = space
        .unknowns
        .iter()
        .map(|u| table(model, &u.name, u.scope.len()))
        .collect::<Result<Vec<_>, _>>()?;
    let assertions = space
        .cut
        .points
        .iter()
        .map(|&k| Ok((k, table(model, &space.assertion_name(k), space.layout_of(k).len())?)))
        .collect::<Result<_, RepairError>>()?;
    Ok(RepairModel {
        choice,
        tables,
        assertions,
    })
}

/// Variable values, indexed like the encoding's variables, from a model of the expanded script.
pub fn decode_expanded(enc: &Encoding, model: &SmtModel) -> Result<Vec<bool>, RepairError> {
    let mut values = vec![false; enc.cnf.num_vars() + 1];
    for (i, name) in enc.cnf.names.iter().enumerate() {
        values[i + 1] = model.call_bool(name, &[]).map_err(RepairError::ModelParse)?.unwrap_or(false);
    }
    Ok(values)
}
