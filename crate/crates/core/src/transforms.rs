//! Restrictions, the DeMorgan-formula-to-branching-program compiler, and the
//! middle-layer hard-function encoding into OV restrictions.

use std::fmt::Write as _;

use crate::bp::{BpBuilder, BpNodeId, BranchingProgram};
use crate::error::{Error, Result};
use crate::formula::{Formula, FormulaBuilder, GateKind, NodeId, VariableId};
use crate::ov::{binomial, OvInstance};
use crate::simplify::simplify;

pub use crate::simplify::lower_fanin2;

/// Partial assignment of the n x d input grid: each variable is 0, 1, or free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    n: usize,
    d: usize,
    values: Vec<Option<bool>>,
}

impl Restriction {
    pub fn empty(n: usize, d: usize) -> Self {
        Restriction { n, d, values: vec![None; n * d] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, var: VariableId) -> Option<bool> {
        if var.in_range(self.n, self.d) {
            self.values[var.flat_index(self.d)]
        } else {
            None
        }
    }

    pub fn set(&mut self, var: VariableId, bit: bool) -> Result<()> {
        if !var.in_range(self.n, self.d) {
            return Err(Error::VariableOutOfRange { var, n: self.n, d: self.d });
        }
        self.values[var.flat_index(self.d)] = Some(bit);
        Ok(())
    }

    pub fn assign_vector(&mut self, vector: usize, bits: &[bool]) -> Result<()> {
        if bits.len() != self.d {
            return Err(Error::parameter(format!(
                "vector assignment has {} bits, dimension is {}",
                bits.len(),
                self.d
            )));
        }
        for (k, bit) in bits.iter().enumerate() {
            self.set(VariableId::new(vector, k), *bit)?;
        }
        Ok(())
    }

    /// True when every vector is either fully assigned or fully free.
    pub fn is_vector_complete(&self) -> bool {
        (0..self.n).all(|i| {
            let assigned =
                (0..self.d).filter(|k| self.get(VariableId::new(i, *k)).is_some()).count();
            assigned == 0 || assigned == self.d
        })
    }

    pub fn free_vectors(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|i| (0..self.d).any(|k| self.get(VariableId::new(*i, k)).is_none()))
            .collect()
    }

    /// Completes the restriction into a full instance by supplying the bits of
    /// the one remaining free vector. Errors if any other variable is free.
    pub fn complete_with(&self, vector: usize, bits: &[bool]) -> Result<OvInstance> {
        if bits.len() != self.d {
            return Err(Error::parameter("completion has wrong dimension"));
        }
        let mut inst = OvInstance::new(self.n, self.d);
        for i in 0..self.n {
            if i == vector {
                inst.set_row(i, bits);
                continue;
            }
            for k in 0..self.d {
                let var = VariableId::new(i, k);
                let v = self.get(var).ok_or(Error::MissingVariable(var))?;
                inst.set(i, k, v);
            }
        }
        Ok(inst)
    }

    /// `flatindex=bit` lines, sorted by flat index.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (flat, v) in self.values.iter().enumerate() {
            if let Some(bit) = v {
                let _ = writeln!(out, "{flat}={}", u8::from(*bit));
            }
        }
        out
    }

    pub fn parse(text: &str, n: usize, d: usize) -> Result<Self> {
        let mut r = Restriction::empty(n, d);
        for (lno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (idx, bit) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lno + 1, "expected 'flatindex=bit'"))?;
            let flat: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::parse(lno + 1, format!("bad flat index '{idx}'")))?;
            if flat >= n * d {
                return Err(Error::parse(lno + 1, format!("flat index {flat} out of range")));
            }
            let bit = match bit.trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(lno + 1, format!("bad bit '{other}'"))),
            };
            r.set(VariableId::from_flat_index(flat, d), bit)?;
        }
        Ok(r)
    }
}

/// Replaces assigned leaves by constants and simplifies; the result reads only
/// free variables and computes the restricted function.
pub fn restrict_formula(f: &Formula, r: &Restriction) -> Formula {
    let mut b = FormulaBuilder::new();
    let root = substitute(f, f.root(), r, &mut b);
    let substituted = b
        .finish(root, f.discipline().clone())
        .expect("substitution preserves structure");
    simplify(&substituted)
}

fn substitute(f: &Formula, id: NodeId, r: &Restriction, b: &mut FormulaBuilder) -> NodeId {
    let node = f.node(id);
    match &node.kind {
        GateKind::Leaf { var, negated } => match r.get(*var) {
            Some(bit) => b.constant(bit ^ negated),
            None => b.literal(*var, *negated),
        },
        GateKind::Const(c) => b.constant(*c),
        GateKind::Not => {
            let c = substitute(f, node.children[0], r, b);
            b.not(c)
        }
        GateKind::And | GateKind::Or | GateKind::Sym(_) => {
            let kids: Vec<NodeId> =
                node.children.iter().map(|c| substitute(f, *c, r, b)).collect();
            match &node.kind {
                GateKind::And => b.and_node(kids),
                GateKind::Or => b.or_node(kids),
                GateKind::Sym(vv) => b.sym(vv.clone(), kids),
                _ => unreachable!(),
            }
        }
    }
}

/// Compiles a fan-in-2 DeMorgan formula into an equivalent branching program
/// by the two-continuation construction: each subformula is compiled against
/// an accept target and a reject target, and each literal leaf becomes exactly
/// one decision node. `n` and `d` declare the input grid recorded in the
/// program header.
///
/// Errors on SYM gates or AND/OR of fan-in > 2; lower the formula first.
pub fn compile_formula_to_bp(f: &Formula, n: usize, d: usize) -> Result<BranchingProgram> {
    for (_, node) in f.nodes() {
        match &node.kind {
            GateKind::Sym(_) => {
                return Err(Error::NotDeMorgan { found: "SYM".into() });
            }
            GateKind::And | GateKind::Or if node.children.len() > 2 => {
                return Err(Error::NotDeMorgan {
                    found: format!("fan-in-{}", node.children.len()),
                });
            }
            _ => {}
        }
    }
    let mut b = BpBuilder::new(n, d);
    let start = compile(f, f.root(), BpBuilder::sink(true), BpBuilder::sink(false), &mut b);
    b.finish(start)
}

fn compile(
    f: &Formula,
    id: NodeId,
    accept: BpNodeId,
    reject: BpNodeId,
    b: &mut BpBuilder,
) -> BpNodeId {
    let node = f.node(id);
    match &node.kind {
        GateKind::Leaf { var, negated } => {
            if *negated {
                b.decision(*var, accept, reject)
            } else {
                b.decision(*var, reject, accept)
            }
        }
        GateKind::Const(c) => {
            if *c {
                accept
            } else {
                reject
            }
        }
        GateKind::Not => compile(f, node.children[0], reject, accept, b),
        GateKind::And => {
            let mut target = accept;
            for c in node.children.iter().rev() {
                target = compile(f, *c, target, reject, b);
            }
            target
        }
        GateKind::Or => {
            let mut target = reject;
            for c in node.children.iter().rev() {
                target = compile(f, *c, accept, target, b);
            }
            target
        }
        GateKind::Sym(_) => unreachable!("rejected before compilation"),
    }
}

/// A partial Boolean function on the middle layer: pairs of a weight-d/2 input
/// and an output bit, with distinct inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFunctionSpec {
    d: usize,
    pairs: Vec<(Vec<bool>, bool)>,
}

impl PartialFunctionSpec {
    pub fn new(d: usize, pairs: Vec<(Vec<bool>, bool)>) -> Result<Self> {
        if d == 0 || !d.is_multiple_of(2) {
            return Err(Error::parameter(format!("dimension {d} must be positive and even")));
        }
        let mut seen = std::collections::HashSet::new();
        for (x, _) in &pairs {
            if x.len() != d {
                return Err(Error::parameter("spec string has wrong length"));
            }
            let weight = x.iter().filter(|b| **b).count();
            if weight != d / 2 {
                return Err(Error::parameter(format!(
                    "spec string has weight {weight}, expected {}",
                    d / 2
                )));
            }
            if !seen.insert(x.clone()) {
                return Err(Error::parameter("duplicate string in spec"));
            }
        }
        if (pairs.len() as u128) > binomial(d as u64, (d / 2) as u64) {
            return Err(Error::parameter("more pairs than middle-layer points"));
        }
        Ok(PartialFunctionSpec { d, pairs })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> &[(Vec<bool>, bool)] {
        &self.pairs
    }

    pub fn ones(&self) -> impl Iterator<Item = &Vec<bool>> {
        self.pairs.iter().filter(|(_, y)| *y).map(|(x, _)| x)
    }

    pub fn lookup(&self, x: &[bool]) -> Option<bool> {
        self.pairs.iter().find(|(s, _)| s == x).map(|(_, y)| *y)
    }

    /// True when two 1-mapped strings are bitwise complements of each other.
    /// Such a spec is not faithfully encodable: the two planted complement
    /// vectors are orthogonal to each other, so every completion becomes a
    /// yes instance and the induced table is all ones.
    pub fn has_complementary_one_pair(&self) -> bool {
        let ones: Vec<&Vec<bool>> = self.ones().collect();
        for (i, x) in ones.iter().enumerate() {
            let complement: Vec<bool> = x.iter().map(|b| !b).collect();
            if ones[i + 1..].iter().any(|y| **y == complement) {
                return true;
            }
        }
        false
    }

    /// Spec file format: first line `d t`, then t lines `bitstring bit`.
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.d, self.pairs.len());
        for (x, y) in &self.pairs {
            out.extend(x.iter().map(|b| if *b { '1' } else { '0' }));
            let _ = writeln!(out, " {}", u8::from(*y));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) = lines.next().ok_or_else(|| Error::parse(1, "empty spec file"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(lno + 1, "expected 'd t'"));
        }
        let d: usize = toks[0].parse().map_err(|_| Error::parse(lno + 1, "bad d"))?;
        let t: usize = toks[1].parse().map_err(|_| Error::parse(lno + 1, "bad t"))?;
        let mut pairs = Vec::with_capacity(t);
        for (lno, line) in lines {
            let lno = lno + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::parse(lno, "expected 'bitstring bit'"));
            }
            let x: Vec<bool> = toks[0]
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::parse(lno, format!("bad bit '{other}'"))),
                })
                .collect::<Result<_>>()?;
            let y = match toks[1] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(lno, format!("bad output bit '{other}'"))),
            };
            pairs.push((x, y));
        }
        if pairs.len() != t {
            return Err(Error::parse(1, format!("expected {t} pairs, found {}", pairs.len())));
        }
        PartialFunctionSpec::new(d, pairs)
    }
}

/// All weight-d/2 strings of length d in lexicographic order.
pub fn middle_layer(d: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    let mut cur = vec![false; d];
    fill_middle(&mut cur, 0, d / 2, &mut out);
    out
}

fn fill_middle(cur: &mut Vec<bool>, at: usize, remaining: usize, out: &mut Vec<Vec<bool>>) {
    if remaining > cur.len() - at {
        return;
    }
    if at == cur.len() {
        out.push(cur.clone());
        return;
    }
    cur[at] = false;
    fill_middle(cur, at + 1, remaining, out);
    if remaining > 0 {
        cur[at] = true;
        fill_middle(cur, at + 1, remaining - 1, out);
        cur[at] = false;
    }
}

/// Encodes a middle-layer partial function into an OV restriction over n
/// vectors with `free` left unassigned: the complement of each 1-mapped
/// string is planted as a fixed vector, and the remaining fixed vectors are
/// all-ones.
///
/// For a weight-d/2 completion y, the planted complement of x is orthogonal
/// to y exactly when y = x, and the all-ones fillers are orthogonal to
/// nothing, so the completed instance is a yes exactly at the 1-mapped
/// strings -- provided no two planted vectors are orthogonal to each other.
/// That holds iff the spec has no complementary 1-pair (see
/// [`PartialFunctionSpec::has_complementary_one_pair`]); with such a pair,
/// every completion is a yes instance.
pub fn encode_hard_function_at(
    spec: &PartialFunctionSpec,
    n: usize,
    free: usize,
) -> Result<Restriction> {
    let d = spec.d();
    let ones: Vec<&Vec<bool>> = spec.ones().collect();
    let t = ones.len();
    if t > n.saturating_sub(1) {
        return Err(Error::parameter(format!(
            "spec has {t} one-pairs; needs at most n-1 = {}",
            n.saturating_sub(1)
        )));
    }
    if free >= n {
        return Err(Error::parameter(format!("free vector {free} out of range")));
    }
    let mut r = Restriction::empty(n, d);
    let mut fixed = (0..n).filter(|i| *i != free);
    for x in &ones {
        let idx = fixed.next().expect("t <= n - 1 fixed slots");
        let complement: Vec<bool> = x.iter().map(|b| !b).collect();
        r.assign_vector(idx, &complement)?;
    }
    for idx in fixed {
        r.assign_vector(idx, &vec![true; d])?;
    }
    Ok(r)
}

/// [`encode_hard_function_at`] with the free vector fixed to n-1.
pub fn encode_hard_function(spec: &PartialFunctionSpec, n: usize) -> Result<Restriction> {
    encode_hard_function_at(spec, n, n - 1)
}

/// An OV-computing object the middle-layer evaluator can drive.
#[derive(Debug, Clone, Copy)]
pub enum OvObject<'a> {
    Formula(&'a Formula),
    Program(&'a BranchingProgram),
}

/// Truth table of a function restricted to the middle layer, rows in
/// lexicographic input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiddleLayerTable {
    pub d: usize,
    pub rows: Vec<(Vec<bool>, bool)>,
}

impl MiddleLayerTable {
    pub fn value(&self, x: &[bool]) -> Option<bool> {
        self.rows.iter().find(|(s, _)| s == x).map(|(_, y)| *y)
    }

    /// True when the table outputs 1 exactly on the spec's 1-strings.
    pub fn reproduces(&self, spec: &PartialFunctionSpec) -> bool {
        self.rows
            .iter()
            .all(|(x, y)| *y == spec.lookup(x).unwrap_or(false))
    }
}

/// Restricts an OV-computing object with the hard-function encoding and
/// tabulates the residual function on every middle-layer input of the free
/// vector. By default the free vector is the least-read one (ties low);
/// `i_star` overrides the choice.
pub fn middle_layer_evaluator(
    obj: OvObject<'_>,
    spec: &PartialFunctionSpec,
    n: usize,
    i_star: Option<usize>,
) -> Result<MiddleLayerTable> {
    let d = spec.d();
    let free = match i_star {
        Some(i) => i,
        None => match obj {
            OvObject::Formula(f) => f.least_read_vector(n, d)?,
            OvObject::Program(bp) => bp.least_read_vector(n, d)?,
        },
    };
    let restriction = encode_hard_function_at(spec, n, free)?;
    let mut rows = Vec::new();
    match obj {
        OvObject::Formula(f) => {
            let restricted = restrict_formula(f, &restriction);
            for y in middle_layer(d) {
                let inst = restriction.complete_with(free, &y)?;
                let out = restricted.eval(&inst)?;
                rows.push((y, out));
            }
        }
        OvObject::Program(bp) => {
            let restricted = bp.restrict(&restriction)?;
            for y in middle_layer(d) {
                let inst = restriction.complete_with(free, &y)?;
                let out = restricted.eval(&inst)?;
                rows.push((y, out));
            }
        }
    }
    Ok(MiddleLayerTable { d, rows })
}
