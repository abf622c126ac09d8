//! Branching programs: DAGs of single-variable decision nodes with 0/1
//! out-edges and exactly two sinks, labeled 0 and 1.
//!
//! Programs are immutable after construction; restriction returns a new
//! program. Node ids are canonical: sink 0 is id 0, sink 1 is id 1, and
//! decision nodes are numbered in DFS preorder (0-edge first) from the start
//! node, so serialization is deterministic.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::formula::VariableId;
use crate::ov::OvInstance;
use crate::transforms::Restriction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BpNodeId(pub u32);

impl BpNodeId {
    pub fn index(&self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for BpNodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BpNode {
    Sink(bool),
    Decision { var: VariableId, lo: BpNodeId, hi: BpNodeId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingProgram {
    n: usize,
    d: usize,
    nodes: Vec<BpNode>,
    start: BpNodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpSize {
    pub total_nodes: usize,
    pub internal_nodes: usize,
}

impl BranchingProgram {
    pub const SINK0: BpNodeId = BpNodeId(0);
    pub const SINK1: BpNodeId = BpNodeId(1);

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn start(&self) -> BpNodeId {
        self.start
    }

    pub fn node(&self, id: BpNodeId) -> &BpNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (BpNodeId, &BpNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (BpNodeId(i as u32), n))
    }

    pub fn size(&self) -> BpSize {
        BpSize {
            total_nodes: self.nodes.len(),
            internal_nodes: self.nodes.len() - 2,
        }
    }

    /// Follows the decision path from the start node under a full assignment.
    pub fn eval(&self, input: &OvInstance) -> Result<bool> {
        let mut at = self.start;
        let mut steps = 0usize;
        loop {
            match self.node(at) {
                BpNode::Sink(b) => return Ok(*b),
                BpNode::Decision { var, lo, hi } => {
                    let bit = input
                        .get(var.vector, var.coord)
                        .ok_or(Error::MissingVariable(*var))?;
                    at = if bit { *hi } else { *lo };
                    steps += 1;
                    if steps > self.nodes.len() {
                        return Err(Error::structure("cycle on evaluation path"));
                    }
                }
            }
        }
    }

    /// Per-vector counts of decision nodes reading each input vector.
    pub fn var_node_counts(&self, n: usize, d: usize) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; n];
        for (_, node) in self.nodes() {
            if let BpNode::Decision { var, .. } = node {
                if !var.in_range(n, d) {
                    return Err(Error::VariableOutOfRange { var: *var, n, d });
                }
                counts[var.vector] += 1;
            }
        }
        Ok(counts)
    }

    pub fn least_read_vector(&self, n: usize, d: usize) -> Result<usize> {
        let counts = self.var_node_counts(n, d)?;
        Ok(crate::formula::argmin(&counts))
    }

    /// Applies a restriction: on every assigned variable the contradicting
    /// edge disappears, the resulting out-degree-1 nodes are bypassed, and
    /// unreachable nodes are pruned. No node labeled by an assigned variable
    /// survives. The result computes the restricted function.
    pub fn restrict(&self, r: &Restriction) -> Result<BranchingProgram> {
        if r.n() != self.n || r.d() != self.d {
            return Err(Error::parameter(format!(
                "restriction is over ({}, {}), program over ({}, {})",
                r.n(),
                r.d(),
                self.n,
                self.d
            )));
        }
        // Resolve a target through chains of assigned-variable nodes. The
        // start marker moves the same way if the start itself is bypassed.
        let resolve = |mut at: BpNodeId| -> BpNodeId {
            loop {
                match &self.nodes[at.index()] {
                    BpNode::Decision { var, lo, hi } => match r.get(*var) {
                        Some(bit) => at = if bit { *hi } else { *lo },
                        None => return at,
                    },
                    BpNode::Sink(_) => return at,
                }
            }
        };
        let mut b = BpBuilder::new(self.n, self.d);
        let mut mapped: Vec<Option<BpNodeId>> = vec![None; self.nodes.len()];
        mapped[Self::SINK0.index()] = Some(Self::SINK0);
        mapped[Self::SINK1.index()] = Some(Self::SINK1);
        let start = resolve(self.start);
        // Clone reachable free-variable nodes, rewiring both edges through
        // resolution. Children are emitted before parents.
        let mut stack = vec![(start, false)];
        while let Some((id, expanded)) = stack.pop() {
            if mapped[id.index()].is_some() {
                continue;
            }
            let BpNode::Decision { var, lo, hi } = &self.nodes[id.index()] else {
                continue;
            };
            let (lo, hi) = (resolve(*lo), resolve(*hi));
            if expanded {
                let new = b.decision(*var, mapped[lo.index()].unwrap(), mapped[hi.index()].unwrap());
                mapped[id.index()] = Some(new);
            } else {
                stack.push((id, true));
                stack.push((hi, false));
                stack.push((lo, false));
            }
        }
        b.finish(mapped[start.index()].expect("start resolved and cloned"))
    }

    /// BP file format: header `bp n d node_count start_id`, then one line per
    /// node: id and either `SINK0`/`SINK1` or `<flat var index> <edge0> <edge1>`.
    pub fn serialize(&self) -> String {
        let mut out = format!("bp {} {} {} {}\n", self.n, self.d, self.nodes.len(), self.start);
        for (id, node) in self.nodes() {
            match node {
                BpNode::Sink(b) => {
                    let _ = writeln!(out, "{id} SINK{}", u8::from(*b));
                }
                BpNode::Decision { var, lo, hi } => {
                    let _ = writeln!(out, "{id} {} {lo} {hi}", var.flat_index(self.d));
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<BranchingProgram> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) =
            lines.next().ok_or_else(|| Error::parse(1, "empty program file"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "bp" {
            return Err(Error::parse(lno + 1, "expected 'bp n d node_count start_id'"));
        }
        let n: usize = toks[1].parse().map_err(|_| Error::parse(lno + 1, "bad n"))?;
        let d: usize = toks[2].parse().map_err(|_| Error::parse(lno + 1, "bad d"))?;
        let count: usize = toks[3].parse().map_err(|_| Error::parse(lno + 1, "bad count"))?;
        let start: u32 = toks[4].parse().map_err(|_| Error::parse(lno + 1, "bad start"))?;
        if d == 0 {
            return Err(Error::parse(lno + 1, "d must be positive"));
        }
        let mut raw: Vec<Option<BpNode>> = vec![None; count];
        for (lno, line) in lines {
            let lno = lno + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let id: usize = toks[0]
                .parse()
                .map_err(|_| Error::parse(lno, format!("bad node id '{}'", toks[0])))?;
            if id >= count {
                return Err(Error::parse(lno, format!("node id {id} out of range")));
            }
            let node = match (toks.len(), toks.get(1)) {
                (2, Some(&"SINK0")) => BpNode::Sink(false),
                (2, Some(&"SINK1")) => BpNode::Sink(true),
                (4, Some(tok)) => {
                    let flat: usize = tok
                        .parse()
                        .map_err(|_| Error::parse(lno, format!("bad variable index '{tok}'")))?;
                    let lo: u32 =
                        toks[2].parse().map_err(|_| Error::parse(lno, "bad edge0 target"))?;
                    let hi: u32 =
                        toks[3].parse().map_err(|_| Error::parse(lno, "bad edge1 target"))?;
                    BpNode::Decision {
                        var: VariableId::from_flat_index(flat, d),
                        lo: BpNodeId(lo),
                        hi: BpNodeId(hi),
                    }
                }
                _ => return Err(Error::parse(lno, "expected sink or decision node line")),
            };
            if raw[id].replace(node).is_some() {
                return Err(Error::parse(lno, format!("duplicate node id {id}")));
            }
        }
        let nodes: Vec<BpNode> = raw
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| Error::parse(1, format!("node {i} missing"))))
            .collect::<Result<_>>()?;
        let bp = BranchingProgram { n, d, nodes, start: BpNodeId(start) };
        bp.validate()?;
        Ok(bp)
    }

    /// DOT export; 0-edges dashed, 1-edges solid, both labeled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph bp {\n  rankdir=TB;\n");
        for (id, node) in self.nodes() {
            match node {
                BpNode::Sink(b) => {
                    let _ = writeln!(
                        out,
                        "  n{id} [shape=box,label=\"{}\"];",
                        u8::from(*b)
                    );
                }
                BpNode::Decision { var, lo, hi } => {
                    let _ = writeln!(out, "  n{id} [shape=circle,label=\"{var}\"];");
                    let _ = writeln!(out, "  n{id} -> n{lo} [label=\"0\",style=dashed];");
                    let _ = writeln!(out, "  n{id} -> n{hi} [label=\"1\"];");
                }
            }
        }
        let _ = writeln!(out, "  start [shape=point];");
        let _ = writeln!(out, "  start -> n{};", self.start);
        out.push_str("}\n");
        out
    }

    fn validate(&self) -> Result<()> {
        let sinks: Vec<_> = self
            .nodes()
            .filter_map(|(id, n)| match n {
                BpNode::Sink(b) => Some((id, *b)),
                _ => None,
            })
            .collect();
        if sinks.len() != 2 || !sinks.contains(&(Self::SINK0, false)) || !sinks.contains(&(Self::SINK1, true)) {
            return Err(Error::structure(
                "program must have exactly two sinks, 0 at id 0 and 1 at id 1",
            ));
        }
        if self.start.index() >= self.nodes.len() {
            return Err(Error::structure("start node out of range"));
        }
        for (_, node) in self.nodes() {
            if let BpNode::Decision { var, lo, hi } = node {
                if !var.in_range(self.n, self.d) {
                    return Err(Error::VariableOutOfRange { var: *var, n: self.n, d: self.d });
                }
                for t in [lo, hi] {
                    if t.index() >= self.nodes.len() {
                        return Err(Error::structure(format!("edge target {t} out of range")));
                    }
                }
            }
        }
        // Acyclicity by iterative three-color DFS.
        let mut color = vec![0u8; self.nodes.len()];
        let mut stack = vec![(self.start, false)];
        while let Some((id, done)) = stack.pop() {
            if done {
                color[id.index()] = 2;
                continue;
            }
            match color[id.index()] {
                1 => return Err(Error::structure("cycle in branching program")),
                2 => continue,
                _ => {}
            }
            color[id.index()] = 1;
            stack.push((id, true));
            if let BpNode::Decision { lo, hi, .. } = self.node(id) {
                for t in [*hi, *lo] {
                    if color[t.index()] == 1 {
                        return Err(Error::structure("cycle in branching program"));
                    }
                    if color[t.index()] == 0 {
                        stack.push((t, false));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builder with canonical sink placement. `finish` prunes decision nodes
/// unreachable from the start and renumbers survivors in DFS preorder.
#[derive(Debug)]
pub struct BpBuilder {
    n: usize,
    d: usize,
    nodes: Vec<BpNode>,
}

impl BpBuilder {
    pub fn new(n: usize, d: usize) -> Self {
        BpBuilder { n, d, nodes: vec![BpNode::Sink(false), BpNode::Sink(true)] }
    }

    pub fn sink(value: bool) -> BpNodeId {
        if value {
            BranchingProgram::SINK1
        } else {
            BranchingProgram::SINK0
        }
    }

    pub fn decision(&mut self, var: VariableId, lo: BpNodeId, hi: BpNodeId) -> BpNodeId {
        let id = BpNodeId(self.nodes.len() as u32);
        self.nodes.push(BpNode::Decision { var, lo, hi });
        id
    }

    pub fn finish(self, start: BpNodeId) -> Result<BranchingProgram> {
        let mut remap: Vec<Option<BpNodeId>> = vec![None; self.nodes.len()];
        remap[0] = Some(BranchingProgram::SINK0);
        remap[1] = Some(BranchingProgram::SINK1);
        let mut order: Vec<usize> = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            if remap[id.index()].is_some() {
                continue;
            }
            remap[id.index()] = Some(BpNodeId((order.len() + 2) as u32));
            order.push(id.index());
            if let BpNode::Decision { lo, hi, .. } = &self.nodes[id.index()] {
                stack.push(*hi);
                stack.push(*lo);
            }
        }
        let mut nodes = vec![BpNode::Sink(false), BpNode::Sink(true)];
        for old in order {
            let BpNode::Decision { var, lo, hi } = &self.nodes[old] else {
                unreachable!("only decision nodes are renumbered");
            };
            nodes.push(BpNode::Decision {
                var: *var,
                lo: remap[lo.index()].expect("child visited"),
                hi: remap[hi.index()].expect("child visited"),
            });
        }
        let bp = BranchingProgram {
            n: self.n,
            d: self.d,
            nodes,
            start: remap[start.index()].expect("start visited"),
        };
        bp.validate()?;
        Ok(bp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ov::OvInstance;

    fn single_var_bp() -> BranchingProgram {
        let mut b = BpBuilder::new(1, 1);
        let x = b.decision(
            VariableId::new(0, 0),
            BpBuilder::sink(false),
            BpBuilder::sink(true),
        );
        b.finish(x).unwrap()
    }

    #[test]
    fn eval_single_variable() {
        let bp = single_var_bp();
        let mut i = OvInstance::new(1, 1);
        i.set(0, 0, true);
        assert!(bp.eval(&i).unwrap());
        i.set(0, 0, false);
        assert!(!bp.eval(&i).unwrap());
        assert_eq!(bp.size(), BpSize { total_nodes: 3, internal_nodes: 1 });
    }

    #[test]
    fn dfs_preorder_visits_zero_edge_first() {
        let mut b = BpBuilder::new(1, 2);
        let y = b.decision(VariableId::new(0, 1), BpBuilder::sink(false), BpBuilder::sink(true));
        let z = b.decision(VariableId::new(0, 0), BpBuilder::sink(true), BpBuilder::sink(false));
        let x = b.decision(VariableId::new(0, 0), y, z);
        let bp = b.finish(x).unwrap();
        // Canonical order: start=2, its lo-child y=3, hi-child z=4.
        assert_eq!(bp.start(), BpNodeId(2));
        match bp.node(BpNodeId(3)) {
            BpNode::Decision { var, .. } => assert_eq!(*var, VariableId::new(0, 1)),
            _ => panic!(),
        }
    }

    #[test]
    fn parse_serialize_round_trip() {
        let mut b = BpBuilder::new(2, 2);
        let t = b.decision(VariableId::new(1, 1), BpBuilder::sink(true), BpBuilder::sink(false));
        let s = b.decision(VariableId::new(0, 0), t, BpBuilder::sink(true));
        let bp = b.finish(s).unwrap();
        let text = bp.serialize();
        let parsed = BranchingProgram::parse(&text).unwrap();
        assert_eq!(parsed, bp);
        assert_eq!(parsed.serialize(), text);
    }

    #[test]
    fn parse_rejects_cycles() {
        let text = "bp 1 1 4 2\n0 SINK0\n1 SINK1\n2 0 3 1\n3 0 2 1\n";
        assert!(BranchingProgram::parse(text).is_err());
    }

    #[test]
    fn var_node_counts_per_vector() {
        let mut b = BpBuilder::new(2, 1);
        let t = b.decision(VariableId::new(1, 0), BpBuilder::sink(false), BpBuilder::sink(true));
        let u = b.decision(VariableId::new(0, 0), t, BpBuilder::sink(true));
        let s = b.decision(VariableId::new(0, 0), u, t);
        let bp = b.finish(s).unwrap();
        assert_eq!(bp.var_node_counts(2, 1).unwrap(), vec![2, 1]);
    }

    #[test]
    fn constant_program_is_start_on_sink() {
        let b = BpBuilder::new(1, 1);
        let bp = b.finish(BpBuilder::sink(true)).unwrap();
        assert_eq!(bp.size().internal_nodes, 0);
        assert!(bp.eval(&OvInstance::new(1, 1)).unwrap());
    }
}
