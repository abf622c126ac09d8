//! Line-oriented text format for formulas.
//!
//! ```text
//! formula <discipline> <node_count> <root_id>
//! <id> and <child>...
//! <id> or <child>...
//! <id> not <child>
//! <id> sym <value_vector as 0/1 string> <child>...
//! <id> leaf <vector> <coord> pos|neg
//! <id> const 0|1
//! ```
//!
//! `serialize_formula` emits nodes in preorder with ids 0..count (the
//! canonical numbering produced by the builder), so parsing a canonical file
//! and serializing again reproduces it byte for byte.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::formula::{Discipline, Formula, FormulaBuilder, GateKind, NodeId, VariableId};

pub fn serialize_formula(f: &Formula) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "formula {} {} {}\n",
        f.discipline(),
        f.node_count(),
        f.root()
    ));
    for (id, node) in f.nodes() {
        out.push_str(&format!("{id} "));
        match &node.kind {
            GateKind::And => out.push_str("and"),
            GateKind::Or => out.push_str("or"),
            GateKind::Not => out.push_str("not"),
            GateKind::Sym(vv) => {
                out.push_str("sym ");
                out.extend(vv.iter().map(|b| if *b { '1' } else { '0' }));
            }
            GateKind::Leaf { var, negated } => {
                out.push_str(&format!(
                    "leaf {} {} {}",
                    var.vector,
                    var.coord,
                    if *negated { "neg" } else { "pos" }
                ));
            }
            GateKind::Const(b) => {
                out.push_str(&format!("const {}", u8::from(*b)));
            }
        }
        for c in &node.children {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
    }
    out
}

fn parse_discipline(tok: &str, line: usize) -> Result<Discipline> {
    if let Some(c) = tok.strip_prefix("bounded:") {
        let c: usize = c
            .parse()
            .map_err(|_| Error::parse(line, format!("bad fan-in bound '{c}'")))?;
        return Ok(Discipline::BoundedFanIn(c));
    }
    match tok {
        "ac0" => Ok(Discipline::UnboundedAc0),
        "symgate" => Ok(Discipline::SymmetricGate),
        other => Err(Error::parse(line, format!("unknown discipline '{other}'"))),
    }
}

fn parse_bitstring(tok: &str, line: usize) -> Result<Vec<bool>> {
    tok.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::parse(line, format!("bad bit '{other}'"))),
        })
        .collect()
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (lno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty formula file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "formula" {
        return Err(Error::parse(lno + 1, "expected 'formula <discipline> <count> <root>'"));
    }
    let discipline = parse_discipline(toks[1], lno + 1)?;
    let count: usize = toks[2]
        .parse()
        .map_err(|_| Error::parse(lno + 1, "bad node count"))?;
    let root: u32 = toks[3]
        .parse()
        .map_err(|_| Error::parse(lno + 1, "bad root id"))?;

    struct RawNode {
        kind: GateKind,
        children: Vec<u32>,
    }
    let mut raw: HashMap<u32, RawNode> = HashMap::new();
    for (lno, line) in lines {
        let lno = lno + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::parse(lno, "expected '<id> <kind> ...'"));
        }
        let id: u32 = toks[0]
            .parse()
            .map_err(|_| Error::parse(lno, format!("bad node id '{}'", toks[0])))?;
        let parse_children = |from: usize| -> Result<Vec<u32>> {
            toks[from..]
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::parse(lno, format!("bad child id '{t}'")))
                })
                .collect()
        };
        let (kind, children) = match toks[1] {
            "and" => (GateKind::And, parse_children(2)?),
            "or" => (GateKind::Or, parse_children(2)?),
            "not" => (GateKind::Not, parse_children(2)?),
            "sym" => {
                if toks.len() < 3 {
                    return Err(Error::parse(lno, "sym needs a value vector"));
                }
                (GateKind::Sym(parse_bitstring(toks[2], lno)?), parse_children(3)?)
            }
            "leaf" => {
                if toks.len() != 5 {
                    return Err(Error::parse(lno, "leaf needs '<vector> <coord> pos|neg'"));
                }
                let vector: usize = toks[2]
                    .parse()
                    .map_err(|_| Error::parse(lno, "bad vector index"))?;
                let coord: usize = toks[3]
                    .parse()
                    .map_err(|_| Error::parse(lno, "bad coordinate"))?;
                let negated = match toks[4] {
                    "pos" => false,
                    "neg" => true,
                    other => {
                        return Err(Error::parse(lno, format!("bad polarity '{other}'")))
                    }
                };
                (
                    GateKind::Leaf { var: VariableId::new(vector, coord), negated },
                    Vec::new(),
                )
            }
            "const" => {
                if toks.len() != 3 {
                    return Err(Error::parse(lno, "const needs 0|1"));
                }
                let b = match toks[2] {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::parse(lno, format!("bad constant '{other}'"))),
                };
                (GateKind::Const(b), Vec::new())
            }
            other => return Err(Error::parse(lno, format!("unknown node kind '{other}'"))),
        };
        if raw.insert(id, RawNode { kind, children }).is_some() {
            return Err(Error::parse(lno, format!("duplicate node id {id}")));
        }
    }
    if raw.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} nodes, file has {}", raw.len()),
        ));
    }

    // Materialize in postorder so children exist before their parent.
    let mut b = FormulaBuilder::new();
    let mut mapped: HashMap<u32, NodeId> = HashMap::new();
    let mut opened: std::collections::HashSet<u32> = std::collections::HashSet::new();
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if mapped.contains_key(&id) {
            continue;
        }
        let node = raw
            .get(&id)
            .ok_or_else(|| Error::parse(1, format!("node {id} referenced but not defined")))?;
        if expanded {
            let children: Vec<NodeId> =
                node.children.iter().map(|c| mapped[c]).collect();
            let built = match &node.kind {
                GateKind::And => b.and_node(children),
                GateKind::Or => b.or_node(children),
                GateKind::Not => {
                    if children.len() != 1 {
                        return Err(Error::parse(1, format!("not node {id} needs 1 child")));
                    }
                    b.not(children[0])
                }
                GateKind::Sym(vv) => {
                    if vv.len() != children.len() + 1 {
                        return Err(Error::parse(
                            1,
                            format!("sym node {id}: value vector length mismatch"),
                        ));
                    }
                    b.sym(vv.clone(), children)
                }
                GateKind::Leaf { var, negated } => b.literal(*var, *negated),
                GateKind::Const(c) => b.constant(*c),
            };
            mapped.insert(id, built);
        } else {
            if !opened.insert(id) {
                return Err(Error::parse(1, format!("cycle involving node {id}")));
            }
            stack.push((id, true));
            for c in &node.children {
                if !mapped.contains_key(c) {
                    stack.push((*c, false));
                }
            }
        }
    }
    if mapped.len() != raw.len() {
        return Err(Error::parse(
            1,
            format!("{} nodes unreachable from root {root}", raw.len() - mapped.len()),
        ));
    }
    b.finish(mapped[&root], discipline)
}
