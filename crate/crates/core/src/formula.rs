//! Tree-shaped Boolean formula IR.
//!
//! Formulas are immutable trees over AND/OR/NOT gates, symmetric (SYM) gates,
//! literal leaves, and constants. Three fan-in disciplines are distinguished:
//! bounded fan-in, unbounded-fan-in AND/OR/NOT (AC0), and symmetric-gate
//! formulas whose complexity is measured in wires.
//!
//! Nodes live in an arena indexed by [`NodeId`]; every formula produced by
//! [`FormulaBuilder::finish`] is numbered in DFS preorder from the root, which
//! makes serialization deterministic.

use std::fmt;

use crate::error::{Error, Result};
use crate::ov::OvInstance;

/// One input bit: coordinate `coord` of input vector `vector`.
///
/// The flattened index `vector * d + coord` is used in branching-program and
/// restriction files; the pair form is used everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableId {
    pub vector: usize,
    pub coord: usize,
}

impl VariableId {
    pub fn new(vector: usize, coord: usize) -> Self {
        VariableId { vector, coord }
    }

    /// Flat serialization index with respect to dimension `d`.
    pub fn flat_index(&self, d: usize) -> usize {
        self.vector * d + self.coord
    }

    /// Inverse of [`VariableId::flat_index`].
    pub fn from_flat_index(flat: usize, d: usize) -> Self {
        VariableId { vector: flat / d, coord: flat % d }
    }

    pub fn in_range(&self, n: usize, d: usize) -> bool {
        self.vector < n && self.coord < d
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}[{}]", self.vector, self.coord)
    }
}

/// Fan-in discipline a formula claims to obey; checked by [`Formula::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discipline {
    /// All gates have fan-in at most `c`; no SYM gates.
    BoundedFanIn(usize),
    /// AND/OR/NOT of arbitrary fan-in; no SYM gates.
    UnboundedAc0,
    /// Gates may also compute arbitrary symmetric functions.
    SymmetricGate,
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discipline::BoundedFanIn(c) => write!(f, "bounded:{c}"),
            Discipline::UnboundedAc0 => write!(f, "ac0"),
            Discipline::SymmetricGate => write!(f, "symgate"),
        }
    }
}

/// Gate kind of a single node. Fan-in is the node's child count; for SYM the
/// value vector has length fan-in + 1 and entry `t` is the output when exactly
/// `t` children evaluate to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
    Not,
    Sym(Vec<bool>),
    Leaf { var: VariableId, negated: bool },
    Const(bool),
}

impl GateKind {
    pub fn is_leaf_like(&self) -> bool {
        matches!(self, GateKind::Leaf { .. } | GateKind::Const(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(&self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: GateKind,
    pub children: Vec<NodeId>,
}

/// Size accounting for a formula.
///
/// `leaf_count` counts LEAF and CONST nodes; `literal_leaf_count` counts only
/// LEAF nodes, the measure the shrinkage analyses use. `input_wire_count` is
/// the number of wires whose lower end is a leaf, the w_i of the
/// symmetric-gate wire bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeMetrics {
    pub leaf_count: usize,
    pub literal_leaf_count: usize,
    pub gate_count: usize,
    pub wire_count: usize,
    pub input_wire_count: usize,
    pub gate_wire_count: usize,
    pub depth: usize,
}

impl SizeMetrics {
    /// Total node count, the "size" of a bounded fan-in formula.
    pub fn size(&self) -> usize {
        self.leaf_count + self.gate_count
    }
}

/// Size accounting computed arithmetically, without materializing a formula.
/// Wide integers because predicted construction sizes overflow 64 bits at
/// large (n, d).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizePrediction {
    pub leaf_count: u128,
    pub literal_leaf_count: u128,
    pub gate_count: u128,
    pub wire_count: u128,
    pub input_wire_count: u128,
    pub depth: u32,
}

impl SizePrediction {
    pub fn matches(&self, m: &SizeMetrics) -> bool {
        self.leaf_count == m.leaf_count as u128
            && self.literal_leaf_count == m.literal_leaf_count as u128
            && self.gate_count == m.gate_count as u128
            && self.wire_count == m.wire_count as u128
            && self.input_wire_count == m.input_wire_count as u128
            && self.depth == m.depth as u32
    }
}

/// Immutable tree formula. Construct through [`FormulaBuilder`] or the text
/// format parser; both guarantee the tree property and preorder numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    nodes: Vec<Node>,
    root: NodeId,
    discipline: Discipline,
}

impl Formula {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn discipline(&self) -> &Discipline {
        &self.discipline
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i as u32), n))
    }

    /// Constant formulas are a single CONST root.
    pub fn as_constant(&self) -> Option<bool> {
        if self.nodes.len() == 1 {
            if let GateKind::Const(b) = self.node(self.root).kind {
                return Some(b);
            }
        }
        None
    }

    /// Children-before-parent order of all node ids.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.node(id).children.iter().copied());
        }
        out.reverse();
        out
    }

    /// Evaluates the formula under a full assignment given by an instance.
    ///
    /// Fails with [`Error::MissingVariable`] if a leaf reads a variable the
    /// instance does not cover.
    pub fn eval(&self, input: &OvInstance) -> Result<bool> {
        let mut vals = vec![false; self.nodes.len()];
        for id in self.postorder() {
            let node = self.node(id);
            let v = match &node.kind {
                GateKind::Leaf { var, negated } => {
                    let bit = input
                        .get(var.vector, var.coord)
                        .ok_or(Error::MissingVariable(*var))?;
                    bit ^ negated
                }
                GateKind::Const(b) => *b,
                GateKind::Not => !vals[node.children[0].index()],
                GateKind::And => node.children.iter().all(|c| vals[c.index()]),
                GateKind::Or => node.children.iter().any(|c| vals[c.index()]),
                GateKind::Sym(vv) => {
                    let ones = node.children.iter().filter(|c| vals[c.index()]).count();
                    vv[ones]
                }
            };
            vals[id.index()] = v;
        }
        Ok(vals[self.root.index()])
    }

    pub fn size_metrics(&self) -> SizeMetrics {
        let mut m = SizeMetrics {
            leaf_count: 0,
            literal_leaf_count: 0,
            gate_count: 0,
            wire_count: 0,
            input_wire_count: 0,
            gate_wire_count: 0,
            depth: 0,
        };
        let order = self.postorder();
        let mut depths = vec![0usize; self.nodes.len()];
        for id in order {
            let node = self.node(id);
            match &node.kind {
                GateKind::Leaf { .. } => {
                    m.leaf_count += 1;
                    m.literal_leaf_count += 1;
                }
                GateKind::Const(_) => m.leaf_count += 1,
                _ => {
                    m.gate_count += 1;
                    m.wire_count += node.children.len();
                    for c in &node.children {
                        if self.node(*c).kind.is_leaf_like() {
                            m.input_wire_count += 1;
                        } else {
                            m.gate_wire_count += 1;
                        }
                    }
                    depths[id.index()] =
                        1 + node.children.iter().map(|c| depths[c.index()]).max().unwrap_or(0);
                }
            }
        }
        m.depth = depths[self.root.index()];
        m
    }

    /// Number of literal leaves reading each input vector, indexed by vector.
    /// CONST leaves do not count.
    pub fn var_leaf_counts(&self, n: usize, d: usize) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; n];
        for (_, node) in self.nodes() {
            if let GateKind::Leaf { var, .. } = &node.kind {
                if !var.in_range(n, d) {
                    return Err(Error::VariableOutOfRange { var: *var, n, d });
                }
                counts[var.vector] += 1;
            }
        }
        Ok(counts)
    }

    /// Index of the vector read on the fewest leaves (ties broken low).
    pub fn least_read_vector(&self, n: usize, d: usize) -> Result<usize> {
        let counts = self.var_leaf_counts(n, d)?;
        Ok(argmin(&counts))
    }

    /// Smallest (n, d) grid containing every variable read by the formula.
    pub fn min_dims(&self) -> (usize, usize) {
        let mut n = 0;
        let mut d = 0;
        for (_, node) in self.nodes() {
            if let GateKind::Leaf { var, .. } = &node.kind {
                n = n.max(var.vector + 1);
                d = d.max(var.coord + 1);
            }
        }
        (n, d)
    }

    /// Structural validation: tree shape, per-kind fan-in rules, SYM value
    /// vector lengths, and discipline conformance.
    pub fn validate(&self) -> Result<()> {
        let mut parents = vec![0usize; self.nodes.len()];
        for (_, node) in self.nodes() {
            let fanin = node.children.len();
            match &node.kind {
                GateKind::Leaf { .. } | GateKind::Const(_) => {
                    if fanin != 0 {
                        return Err(Error::structure("leaf node with children"));
                    }
                }
                GateKind::Not => {
                    if fanin != 1 {
                        return Err(Error::structure(format!("NOT gate with fan-in {fanin}")));
                    }
                }
                GateKind::And | GateKind::Or => {
                    if fanin == 0 {
                        return Err(Error::structure("AND/OR gate with fan-in 0"));
                    }
                }
                GateKind::Sym(vv) => {
                    if fanin == 0 {
                        return Err(Error::structure("SYM gate with fan-in 0"));
                    }
                    if vv.len() != fanin + 1 {
                        return Err(Error::structure(format!(
                            "SYM value vector length {} != fan-in {} + 1",
                            vv.len(),
                            fanin
                        )));
                    }
                }
            }
            for c in &node.children {
                if c.index() >= self.nodes.len() {
                    return Err(Error::structure(format!("child id {c} out of range")));
                }
                parents[c.index()] += 1;
            }
        }
        if parents[self.root.index()] != 0 {
            return Err(Error::structure("root has a parent"));
        }
        for (i, p) in parents.iter().enumerate() {
            if i != self.root.index() && *p != 1 {
                return Err(Error::structure(format!(
                    "node {i} has {p} parents; formula must be a tree"
                )));
            }
        }
        match self.discipline {
            Discipline::BoundedFanIn(c) => {
                for (_, node) in self.nodes() {
                    if matches!(node.kind, GateKind::Sym(_)) {
                        return Err(Error::structure("SYM gate in bounded fan-in formula"));
                    }
                    if node.children.len() > c {
                        return Err(Error::structure(format!(
                            "fan-in {} exceeds bound {c}",
                            node.children.len()
                        )));
                    }
                }
            }
            Discipline::UnboundedAc0 => {
                for (_, node) in self.nodes() {
                    if matches!(node.kind, GateKind::Sym(_)) {
                        return Err(Error::structure("SYM gate in AC0 formula"));
                    }
                }
            }
            Discipline::SymmetricGate => {}
        }
        Ok(())
    }

    /// True when the formula is in simplified form: no NOT gates, no CONST
    /// children of gates, and no fan-in-1 AND/OR/SYM gates.
    pub fn is_simplified(&self) -> bool {
        self.nodes().all(|(_, node)| match &node.kind {
            GateKind::Not => false,
            GateKind::And | GateKind::Or | GateKind::Sym(_) => {
                node.children.len() >= 2
                    && node
                        .children
                        .iter()
                        .all(|c| !matches!(self.node(*c).kind, GateKind::Const(_)))
            }
            _ => true,
        })
    }
}

pub(crate) fn argmin(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, c) in counts.iter().enumerate() {
        if *c < counts[best] {
            best = i;
        }
    }
    best
}

/// Arena-style builder. `leaf`/`constant`/`and_node`/`or_node`/`not`/`sym`
/// append raw nodes; `and_of`/`or_of` are the smart constructors used by the
/// OV builders (they fold constants and collapse empty/singleton gates).
/// `finish` prunes nodes unreachable from the root, renumbers the survivors in
/// DFS preorder, and validates.
#[derive(Debug, Default)]
pub struct FormulaBuilder {
    nodes: Vec<Node>,
}

impl FormulaBuilder {
    pub fn new() -> Self {
        FormulaBuilder { nodes: Vec::new() }
    }

    fn push(&mut self, kind: GateKind, children: Vec<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { kind, children });
        id
    }

    pub fn kind(&self, id: NodeId) -> &GateKind {
        &self.nodes[id.index()].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn leaf(&mut self, var: VariableId) -> NodeId {
        self.literal(var, false)
    }

    pub fn literal(&mut self, var: VariableId, negated: bool) -> NodeId {
        self.push(GateKind::Leaf { var, negated }, Vec::new())
    }

    pub fn constant(&mut self, value: bool) -> NodeId {
        self.push(GateKind::Const(value), Vec::new())
    }

    pub fn not(&mut self, child: NodeId) -> NodeId {
        self.push(GateKind::Not, vec![child])
    }

    pub fn and_node(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(GateKind::And, children)
    }

    pub fn or_node(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(GateKind::Or, children)
    }

    pub fn sym(&mut self, value_vector: Vec<bool>, children: Vec<NodeId>) -> NodeId {
        debug_assert_eq!(value_vector.len(), children.len() + 1);
        self.push(GateKind::Sym(value_vector), children)
    }

    /// AND with constant folding: absorbs CONST(1) children, short-circuits on
    /// CONST(0), collapses empty to CONST(1) and singletons to the child.
    pub fn and_of(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match self.kind(c) {
                GateKind::Const(false) => return self.constant(false),
                GateKind::Const(true) => {}
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.constant(true),
            1 => kept[0],
            _ => self.and_node(kept),
        }
    }

    /// OR dual of [`FormulaBuilder::and_of`].
    pub fn or_of(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match self.kind(c) {
                GateKind::Const(true) => return self.constant(true),
                GateKind::Const(false) => {}
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.constant(false),
            1 => kept[0],
            _ => self.or_node(kept),
        }
    }

    pub fn finish(self, root: NodeId, discipline: Discipline) -> Result<Formula> {
        // Preorder renumbering; iterative to keep deep trees safe.
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if remap[id.index()] != u32::MAX {
                return Err(Error::structure(format!(
                    "node {id} reachable twice; formula must be a tree"
                )));
            }
            remap[id.index()] = order.len() as u32;
            order.push(id);
            stack.extend(self.nodes[id.index()].children.iter().rev().copied());
        }
        let nodes = order
            .iter()
            .map(|old| {
                let n = &self.nodes[old.index()];
                Node {
                    kind: n.kind.clone(),
                    children: n.children.iter().map(|c| NodeId(remap[c.index()])).collect(),
                }
            })
            .collect();
        let formula = Formula { nodes, root: NodeId(0), discipline };
        formula.validate()?;
        Ok(formula)
    }
}
