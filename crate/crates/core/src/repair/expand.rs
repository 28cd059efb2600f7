//! Repairability as one propositional formula.
//!
//! Every unknown (assertion, unknown expression) is a truth table, so the
//! universal quantifier over program variables is eliminated by writing one
//! clause per table row. Along a verification path, intermediate states are
//! over-approximated by fresh row sets, which is equivalent to quantifying the
//! intermediate variable copies universally.

use std::collections::BTreeMap;

use crate::cfg::{EdgeKind, NodeId, NodeStmt};
use crate::lang::eval::{MAY_FALSE, MAY_TRUE};
use crate::lang::Compiled;

use super::cnf::Cnf;
use super::schema::UpdateSchema;
use super::space::{Layout, RepairModel, RepairSpace};

enum Code {
    Plain,
    Assign { targets: Vec<usize>, values: Vec<Compiled> },
    Guard(Option<Compiled>),
    Call { callee: usize, args: Vec<Compiled> },
}

fn compile(space: &RepairSpace, node: NodeId) -> Code {
    let layout = space.layout_of(node);
    let c = |e| Compiled::new(e, &|v| layout.index(v)).expect("validated program");
    match space.graph.nodes[node].stmt() {
        Some(NodeStmt::Assign { targets, values }) => Code::Assign {
            targets: targets.iter().map(|t| layout.index(t).unwrap()).collect(),
            values: values.iter().map(c).collect(),
        },
        Some(NodeStmt::Branch { guard }) => Code::Guard(guard.as_ref().map(c)),
        Some(NodeStmt::Assume(g)) | Some(NodeStmt::Assert(g)) => Code::Guard(Some(c(g))),
        Some(NodeStmt::Call { callee, args }) => Code::Call {
            callee: space.program.procedure_index(callee).unwrap(),
            args: args.iter().map(c).collect(),
        },
        _ => Code::Plain,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EncodingStats {
    pub vars: usize,
    pub clauses: usize,
}

/// The propositional encoding of one repair problem, with variable maps for decoding.
pub struct Encoding {
    pub cnf: Cnf,
    selectors: Vec<Vec<i32>>,
    tables: Vec<Vec<i32>>,
    assertions: BTreeMap<NodeId, Vec<i32>>,
}

impl Encoding {
    pub fn stats(&self) -> EncodingStats {
        EncodingStats {
            vars: self.cnf.num_vars(),
            clauses: self.cnf.clauses.len(),
        }
    }

    pub fn decode(&self, space: &RepairSpace, values: &[bool]) -> RepairModel {
        let choice = space
            .locations
            .iter()
            .zip(&self.selectors)
            .map(|(l, sel)| {
                let i = sel.iter().position(|&v| values[v as usize]).unwrap_or(0);
                l.options[i].schema
            })
            .collect();
        let table = |vs: &Vec<i32>| vs.iter().map(|&v| values[v as usize]).collect();
        RepairModel {
            choice,
            tables: self.tables.iter().map(table).collect(),
            assertions: self.assertions.iter().map(|(&k, v)| (k, table(v))).collect(),
        }
    }

    /// Literals asserting that a model's choices, tables and assertions hold;
    /// used to check a model against the encoding.
    pub fn model_literals(&self, space: &RepairSpace, m: &RepairModel) -> Vec<i32> {
        let mut out = Vec::new();
        for (li, sel) in self.selectors.iter().enumerate() {
            for (oi, &v) in sel.iter().enumerate() {
                let on = space.locations[li].options[oi].schema == m.choice[li];
                out.push(if on { v } else { -v });
            }
        }
        for (vars, vals) in self.tables.iter().zip(&m.tables) {
            out.extend(vars.iter().zip(vals).map(|(&v, &b)| if b { v } else { -v }));
        }
        for (k, vars) in &self.assertions {
            let vals = &m.assertions[k];
            out.extend(vars.iter().zip(vals).map(|(&v, &b)| if b { v } else { -v }));
        }
        out
    }
}

fn lit(v: i32, positive: bool) -> i32 {
    if positive {
        v
    } else {
        -v
    }
}

/// Successor rows of `row` under option `schema` at a sequential edge, each
/// paired with the literals that must hold for it.
fn transfer(
    space: &RepairSpace,
    enc: &Encoding,
    code: &Code,
    kind: EdgeKind,
    loc: usize,
    schema: UpdateSchema,
    layout: &Layout,
    row: u64,
    out: &mut Vec<(Vec<i32>, u64)>,
) {
    out.clear();
    let l = &space.locations[loc];
    let urow = (row & layout.scope_mask()) as usize;
    match (code, schema) {
        (_, UpdateSchema::AssignToSkip | UpdateSchema::CallToSkip | UpdateSchema::AssumeToSkip) => {
            out.push((vec![], row))
        }
        (Code::Plain, _) => out.push((vec![], row)),
        (Code::Guard(g), _) => {
            let want = !matches!(kind, EdgeKind::Branch(false));
            match schema {
                UpdateSchema::AssumeToAssume => {
                    let f = enc.tables[l.guard.unwrap()][urow];
                    out.push((vec![lit(f, want)], row));
                }
                _ => {
                    if g.as_ref().is_none_or(|g| g.eval(row) == want) {
                        out.push((vec![], row));
                    }
                }
            }
        }
        (Code::Assign { .. }, UpdateSchema::AssignToAssign) => {
            let base = row & !layout.scope_mask();
            for z in 0..layout.scope_rows() as u64 {
                let conds = l
                    .assigns
                    .iter()
                    .enumerate()
                    .map(|(i, &u)| lit(enc.tables[u][urow], z >> i & 1 == 1))
                    .collect();
                out.push((conds, base | z));
            }
        }
        (Code::Assign { targets, values }, _) => {
            let base = targets.iter().fold(row, |b, &t| b & !(1 << t));
            let mut rows = vec![base];
            for (&t, v) in targets.iter().zip(values) {
                let s = v.values(row);
                let mut next = Vec::with_capacity(rows.len() * 2);
                for r in rows {
                    if s & MAY_FALSE != 0 {
                        next.push(r);
                    }
                    if s & MAY_TRUE != 0 {
                        next.push(r | 1 << t);
                    }
                }
                rows = next;
            }
            out.extend(rows.into_iter().map(|r| (vec![], r)));
        }
        (Code::Call { .. }, _) => unreachable!("call edges form their own paths"),
    }
}

/// Build the propositional encoding of the repair problem at the space's budget.
pub fn encode(space: &RepairSpace) -> Encoding {
    let mut cnf = Cnf::default();
    let assertions: BTreeMap<NodeId, Vec<i32>> = space
        .cut
        .points
        .iter()
        .map(|&k| {
            let rows = space.layout_of(k).rows();
            (k, cnf.vars(&space.assertion_name(k), rows))
        })
        .collect();
    let selectors: Vec<Vec<i32>> = (0..space.locations.len())
        .map(|li| {
            let opts = space.locations[li].options.clone();
            let vs: Vec<i32> = opts
                .iter()
                .map(|o| cnf.var(space.selector_name(li, o.schema)))
                .collect();
            cnf.exactly_one(&vs);
            vs
        })
        .collect();
    let tables: Vec<Vec<i32>> = space
        .unknowns
        .iter()
        .map(|u| cnf.vars(&u.name, 1 << u.scope.len()))
        .collect();
    let mut enc = Encoding {
        cnf,
        selectors,
        tables,
        assertions,
    };

    for &v in &enc.assertions[&space.graph.procs[0].entry] {
        enc.cnf.unit(v);
    }
    encode_budget(space, &mut enc);

    let codes: Vec<Code> = (0..space.graph.nodes.len()).map(|n| compile(space, n)).collect();
    let mut buf = Vec::new();
    for (pi, path) in space.paths.iter().enumerate() {
        if path.is_call(&space.graph) {
            encode_call(space, &mut enc, &codes, path.from, path.to);
            continue;
        }
        if path.is_assert(&space.graph) {
            let layout = space.layout_of(path.from);
            let Code::Guard(Some(g)) = &codes[path.from] else { unreachable!() };
            let (src, dst) = (enc.assertions[&path.from].clone(), enc.assertions[&path.to].clone());
            for r in 0..layout.rows() {
                if g.eval(r as u64) {
                    enc.cnf.clause([-src[r], dst[r]]);
                } else {
                    enc.cnf.unit(-src[r]);
                }
            }
            continue;
        }
        let layout = space.layout_of(path.from).clone();
        let m = path.edges.len();
        let mut sets: Vec<Vec<i32>> = vec![enc.assertions[&path.from].clone()];
        for t in 1..m {
            let name = format!("P{pi}_{t}");
            sets.push(enc.cnf.vars(&name, layout.rows()));
        }
        sets.push(enc.assertions[&path.to].clone());
        for (t, &e) in path.edges.iter().enumerate() {
            let edge = space.graph.edges[e];
            let loc = space.loc_of[&edge.from];
            for (oi, opt) in space.locations[loc].options.iter().enumerate() {
                let sel = enc.selectors[loc][oi];
                let single = space.locations[loc].options.len() == 1;
                for r in 0..layout.rows() {
                    transfer(space, &enc, &codes[edge.from], edge.kind, loc, opt.schema, &layout, r as u64, &mut buf);
                    for (conds, r2) in buf.drain(..) {
                        let mut c = Vec::with_capacity(conds.len() + 3);
                        c.push(-sets[t][r]);
                        if !single {
                            c.push(-sel);
                        }
                        c.extend(conds.iter().map(|l| -l));
                        c.push(sets[t + 1][r2 as usize]);
                        enc.cnf.clause(c);
                    }
                }
            }
        }
    }
    enc
}

fn encode_call(space: &RepairSpace, enc: &mut Encoding, codes: &[Code], from: NodeId, to: NodeId) {
    let Code::Call { callee, args } = &codes[from] else { unreachable!() };
    let li = space.loc_of[&from];
    let loc = &space.locations[li];
    let caller = space.layout_of(from).clone();
    let callee_layout = space.layouts[*callee].clone();
    let n_globals = space.program.globals.len();
    let gmask = (1u64 << n_globals) - 1;
    let k = args.len();
    let proc = &space.program.procedures[*callee];
    let fresh: Vec<usize> = (n_globals + proc.formals.len()..callee_layout.n_scope).collect();
    let entry = enc.assertions[&space.graph.procs[*callee].entry].clone();
    let exit = enc.assertions[&space.graph.procs[*callee].exit].clone();
    let src = enc.assertions[&from].clone();
    let dst = enc.assertions[&to].clone();
    let place = |v: u64| -> u64 {
        // formals and their ghosts take the argument vector
        let mut bits = 0;
        for i in 0..k {
            if v >> i & 1 == 1 {
                bits |= 1 << (n_globals + i);
                bits |= 1 << callee_layout.ghosts[i].1;
            }
        }
        bits
    };
    let ghost_mask: u64 = callee_layout.ghosts.iter().map(|&(_, g)| 1u64 << g).sum();
    for (oi, opt) in loc.options.iter().enumerate() {
        let sel = enc.selectors[li][oi];
        for s in 0..caller.rows() as u64 {
            if opt.schema == UpdateSchema::CallToSkip {
                enc.cnf.clause([-src[s as usize], -sel, dst[s as usize]]);
                continue;
            }
            let urow = (s & caller.scope_mask()) as usize;
            let vectors: Vec<(Vec<i32>, u64)> = match opt.schema {
                UpdateSchema::CallToCall => (0..1u64 << k)
                    .map(|v| {
                        let conds = loc
                            .args
                            .iter()
                            .enumerate()
                            .map(|(i, &u)| lit(enc.tables[u][urow], v >> i & 1 == 1))
                            .collect();
                        (conds, v)
                    })
                    .collect(),
                _ => {
                    let v = args
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (i, a)| if a.eval(s) { acc | 1 << i } else { acc });
                    vec![(vec![], v)]
                }
            };
            for (conds, v) in vectors {
                let head: Vec<i32> = [-src[s as usize], -sel]
                    .into_iter()
                    .chain(conds.iter().map(|l| -l))
                    .collect();
                let base = (s & gmask) | place(v);
                for z in 0..1u64 << fresh.len() {
                    let row = fresh
                        .iter()
                        .enumerate()
                        .fold(base, |b, (j, &p)| if z >> j & 1 == 1 { b | 1 << p } else { b });
                    let mut c = head.clone();
                    c.push(entry[row as usize]);
                    enc.cnf.clause(c);
                }
                let want_ghosts = place(v) & ghost_mask;
                for t in 0..callee_layout.rows() as u64 {
                    if t & ghost_mask != want_ghosts {
                        continue;
                    }
                    let back = (t & gmask) | (s & !gmask);
                    let mut c = head.clone();
                    c.push(-exit[t as usize]);
                    c.push(dst[back as usize]);
                    enc.cnf.clause(c);
                }
            }
        }
    }
}

/// Order-encoded running sum of location costs over the textual location
/// order, saturating at `budget + 1`, which must stay false.
fn encode_budget(space: &RepairSpace, enc: &mut Encoding) {
    let limit = space.budget as usize + 1;
    let mut prev: Option<Vec<i32>> = None;
    for (li, loc) in space.locations.iter().enumerate() {
        if loc.options.iter().all(|o| o.cost == 0) {
            continue;
        }
        let cur = enc.cnf.vars(&format!("C_{}", super::space::sym(&loc.name)), limit);
        // cur[t - 1] means "cost so far >= t"
        for t in 1..=limit {
            if let Some(p) = &prev {
                enc.cnf.clause([-p[t - 1], cur[t - 1]]);
            }
            for (oi, o) in loc.options.iter().enumerate() {
                if o.cost == 0 {
                    continue;
                }
                let sel = enc.selectors[li][oi];
                let c = o.cost as usize;
                if t <= c {
                    enc.cnf.clause([-sel, cur[t - 1]]);
                } else if let Some(p) = &prev {
                    enc.cnf.clause([-sel, -p[t - c - 1], cur[t - 1]]);
                }
            }
        }
        prev = Some(cur);
    }
    if let Some(p) = prev {
        enc.cnf.unit(-p[limit - 1]);
    }
}
