//! Desk-scale enumeration of small formulas: exhibits middle-layer
//! input/output assignments no enumerated formula satisfies (the pigeonhole
//! made constructive), and checks the symmetric-gate formula counting bound
//! by exhaustive generation.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::formula::{Discipline, Formula, FormulaBuilder, NodeId, VariableId};
use crate::ov::OvInstance;
use crate::transforms::{middle_layer, PartialFunctionSpec};

pub const MAX_ENUM_DIMENSION: usize = 4;
pub const MAX_ENUM_SIZE: usize = 7;
pub const MAX_SYM_WIRES: usize = 3;
pub const MAX_SYM_VARS: usize = 3;

/// Leaf alphabet for DeMorgan enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumBasis {
    /// Literals and the constants 0/1.
    DeMorganWithConstants,
    /// Literals only.
    DeMorganLiteralsOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Tree {
    Const(bool),
    Lit(usize, bool),
    Gate(bool, Box<Tree>, Box<Tree>), // true = AND, children in canonical order
}

impl Tree {
    fn eval(&self, input: &[bool]) -> bool {
        match self {
            Tree::Const(b) => *b,
            Tree::Lit(v, neg) => input[*v] ^ neg,
            Tree::Gate(is_and, l, r) => {
                if *is_and {
                    l.eval(input) && r.eval(input)
                } else {
                    l.eval(input) || r.eval(input)
                }
            }
        }
    }

    fn to_formula(&self) -> Formula {
        let mut b = FormulaBuilder::new();
        let root = self.build(&mut b);
        b.finish(root, Discipline::BoundedFanIn(2)).expect("enumerated tree is valid")
    }

    fn build(&self, b: &mut FormulaBuilder) -> NodeId {
        match self {
            Tree::Const(c) => b.constant(*c),
            Tree::Lit(v, neg) => b.literal(VariableId::new(0, *v), *neg),
            Tree::Gate(is_and, l, r) => {
                let lid = l.build(b);
                let rid = r.build(b);
                if *is_and {
                    b.and_node(vec![lid, rid])
                } else {
                    b.or_node(vec![lid, rid])
                }
            }
        }
    }
}

/// Every DeMorgan formula (fan-in-2 AND/OR over the chosen leaf alphabet)
/// with node count at most `max_size`, each exactly once up to commutative
/// reordering of children. Node counts of such trees are odd, so sizes run
/// 1, 3, 5, ...
pub fn enumerate_formulas(
    d: usize,
    max_size: usize,
    basis: EnumBasis,
) -> Result<Vec<Formula>> {
    let trees = enumerate_trees(d, max_size, basis)?;
    Ok(trees.iter().map(Tree::to_formula).collect())
}

fn enumerate_trees(d: usize, max_size: usize, basis: EnumBasis) -> Result<Vec<Tree>> {
    if d == 0 || d > MAX_ENUM_DIMENSION {
        return Err(Error::LimitExceeded(format!(
            "enumeration dimension {d} outside 1..={MAX_ENUM_DIMENSION}"
        )));
    }
    if max_size == 0 || max_size > MAX_ENUM_SIZE {
        return Err(Error::LimitExceeded(format!(
            "enumeration size {max_size} outside 1..={MAX_ENUM_SIZE}"
        )));
    }
    let mut by_size: HashMap<usize, Vec<Tree>> = HashMap::new();
    let mut leaves = Vec::new();
    if matches!(basis, EnumBasis::DeMorganWithConstants) {
        leaves.push(Tree::Const(false));
        leaves.push(Tree::Const(true));
    }
    for v in 0..d {
        leaves.push(Tree::Lit(v, false));
        leaves.push(Tree::Lit(v, true));
    }
    by_size.insert(1, leaves);
    for s in (3..=max_size).step_by(2) {
        let mut out = Vec::new();
        for s1 in (1..s - 1).step_by(2) {
            let s2 = s - 1 - s1;
            for l in &by_size[&s1] {
                for r in &by_size[&s2] {
                    if l <= r {
                        out.push(Tree::Gate(true, Box::new(l.clone()), Box::new(r.clone())));
                        out.push(Tree::Gate(false, Box::new(l.clone()), Box::new(r.clone())));
                    }
                }
            }
        }
        by_size.insert(s, out);
    }
    let mut all = Vec::new();
    for s in (1..=max_size).step_by(2) {
        all.extend(by_size.remove(&s).unwrap_or_default());
    }
    Ok(all)
}

/// Output pattern of a function on the middle layer, inputs in lexicographic
/// order.
pub fn middle_behavior(f: &Formula, d: usize) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    for x in middle_layer(d) {
        let mut inst = OvInstance::new(1, d);
        inst.set_row(0, &x);
        out.push(f.eval(&inst)?);
    }
    Ok(out)
}

/// Finds a full middle-layer input/output assignment that no enumerated
/// formula of size at most `max_size` satisfies, scanning candidates in
/// lexicographic order; `None` when every behavior is achieved. Whenever
/// 2^(middle layer size) exceeds the number of enumerated formulas the
/// pigeonhole guarantees a return.
pub fn find_hard_middle_assignment(
    d: usize,
    max_size: usize,
) -> Result<Option<PartialFunctionSpec>> {
    if !d.is_multiple_of(2) {
        return Err(Error::parameter(format!("dimension {d} must be even")));
    }
    let trees = enumerate_trees(d, max_size, EnumBasis::DeMorganWithConstants)?;
    let layer = middle_layer(d);
    let m = layer.len();
    assert!(m < 63, "middle layer too large to scan");
    let mut achieved: HashSet<u64> = HashSet::new();
    for t in &trees {
        let mut code = 0u64;
        for (i, x) in layer.iter().enumerate() {
            if t.eval(x) {
                code |= 1 << (m - 1 - i);
            }
        }
        achieved.insert(code);
    }
    let hard = (0..1u64 << m).find(|code| !achieved.contains(code));
    if (trees.len() as u128) < (1u128 << m) {
        assert!(hard.is_some(), "pigeonhole: fewer formulas than behaviors");
    }
    match hard {
        None => Ok(None),
        Some(code) => {
            let pairs = layer
                .iter()
                .enumerate()
                .map(|(i, x)| (x.clone(), (code >> (m - 1 - i)) & 1 == 1))
                .collect();
            Ok(Some(PartialFunctionSpec::new(d, pairs)?))
        }
    }
}

/// Re-enumerates and checks that no formula matches the spec on all
/// middle-layer points.
pub fn verify_hard_assignment(spec: &PartialFunctionSpec, max_size: usize) -> Result<bool> {
    let d = spec.d();
    let trees = enumerate_trees(d, max_size, EnumBasis::DeMorganWithConstants)?;
    for t in &trees {
        let matches_all = spec
            .pairs()
            .iter()
            .all(|(x, y)| t.eval(x) == *y);
        if matches_all {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The counting bound 4^(2w) * 2^(2w) * n^w on symmetric-gate formulas with
/// w wires over n variables.
pub fn symmetric_formula_count_bound(n_vars: usize, w: usize) -> u128 {
    let w = w as u32;
    4u128.pow(2 * w) * 2u128.pow(2 * w) * (n_vars as u128).pow(w)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SymTree {
    Leaf(usize),
    Gate(Vec<bool>, Vec<SymTree>), // value vector, children in canonical order
}

impl SymTree {
    fn wires(&self) -> usize {
        match self {
            SymTree::Leaf(_) => 0,
            SymTree::Gate(_, kids) => {
                kids.len() + kids.iter().map(SymTree::wires).sum::<usize>()
            }
        }
    }
}

/// Exhaustively generates the distinct symmetric-gate formulas with exactly
/// `w` wires over `n_vars` variables (children of a gate unordered, every
/// value vector counted) and returns how many there are.
pub fn enumerate_symmetric_small(n_vars: usize, w: usize) -> Result<usize> {
    if n_vars == 0 || n_vars > MAX_SYM_VARS {
        return Err(Error::LimitExceeded(format!(
            "symmetric enumeration variables {n_vars} outside 1..={MAX_SYM_VARS}"
        )));
    }
    if w == 0 || w > MAX_SYM_WIRES {
        return Err(Error::LimitExceeded(format!(
            "symmetric enumeration wires {w} outside 1..={MAX_SYM_WIRES}"
        )));
    }
    let mut memo: HashMap<usize, Vec<SymTree>> = HashMap::new();
    let trees = gate_trees(n_vars, w, &mut memo);
    let distinct: BTreeSet<SymTree> = trees.into_iter().collect();
    for t in &distinct {
        debug_assert_eq!(t.wires(), w);
    }
    Ok(distinct.len())
}

/// All gate-rooted symmetric trees with exactly `w` wires.
fn gate_trees(n_vars: usize, w: usize, memo: &mut HashMap<usize, Vec<SymTree>>) -> Vec<SymTree> {
    if let Some(hit) = memo.get(&w) {
        return hit.clone();
    }
    let mut out = Vec::new();
    for fanin in 1..=w {
        let extra = w - fanin;
        // Candidate children: leaves cost 0, gate subtrees cost their wires.
        let mut candidates: Vec<(SymTree, usize)> =
            (0..n_vars).map(|v| (SymTree::Leaf(v), 0)).collect();
        for v in 1..=extra {
            for t in gate_trees(n_vars, v, memo) {
                candidates.push((t.clone(), v));
            }
        }
        candidates.sort();
        let mut kids = Vec::new();
        pick_children(&candidates, fanin, extra, 0, &mut kids, &mut |kids| {
            for vv_code in 0u32..1 << (fanin + 1) {
                let vv: Vec<bool> = (0..=fanin).map(|t| (vv_code >> t) & 1 == 1).collect();
                out.push(SymTree::Gate(vv, kids.to_vec()));
            }
        });
    }
    memo.insert(w, out.clone());
    out
}

/// Chooses `left` children as a nondecreasing sequence from `candidates`
/// (indices may repeat) with total cost exactly `budget`.
fn pick_children(
    candidates: &[(SymTree, usize)],
    left: usize,
    budget: usize,
    min_idx: usize,
    kids: &mut Vec<SymTree>,
    emit: &mut impl FnMut(&[SymTree]),
) {
    if left == 0 {
        if budget == 0 {
            emit(kids);
        }
        return;
    }
    for idx in min_idx..candidates.len() {
        let (tree, cost) = &candidates[idx];
        if *cost > budget {
            continue;
        }
        kids.push(tree.clone());
        pick_children(candidates, left - 1, budget - cost, idx, kids, emit);
        kids.pop();
    }
}
