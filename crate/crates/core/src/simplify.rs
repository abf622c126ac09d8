//! Constant propagation and normalization for formulas.
//!
//! The simplified form has no NOT gates (negations are pushed into the leaves
//! by DeMorgan duality, or absorbed into SYM value vectors), no CONST children
//! of gates, and no fan-in-1 gates. A gate equivalent to a constant becomes a
//! CONST node and propagates upward. With every surviving gate of fan-in >= 2,
//! the leaf/size relation `s >= l >= s/2` and the symmetric-gate wire relation
//! `w <= 2*w_i` hold structurally.

use crate::formula::{Discipline, Formula, FormulaBuilder, GateKind, NodeId};

/// Returns a semantically equivalent formula in simplified form, keeping the
/// input's discipline.
pub fn simplify(f: &Formula) -> Formula {
    let mut b = FormulaBuilder::new();
    let root = simp(f, f.root(), false, &mut b);
    b.finish(root, f.discipline().clone())
        .expect("simplification preserves structural validity")
}

fn simp(f: &Formula, id: NodeId, negate: bool, b: &mut FormulaBuilder) -> NodeId {
    let node = f.node(id);
    match &node.kind {
        GateKind::Leaf { var, negated } => b.literal(*var, negated ^ negate),
        GateKind::Const(c) => b.constant(c ^ negate),
        GateKind::Not => simp(f, node.children[0], !negate, b),
        GateKind::And | GateKind::Or => {
            let kids: Vec<NodeId> =
                node.children.iter().map(|c| simp(f, *c, negate, b)).collect();
            let is_and = matches!(node.kind, GateKind::And) ^ negate;
            if is_and {
                b.and_of(kids)
            } else {
                b.or_of(kids)
            }
        }
        GateKind::Sym(vv) => {
            let mut kids = Vec::with_capacity(node.children.len());
            let mut ones_fixed = 0;
            let mut zeros_fixed = 0;
            for c in &node.children {
                let k = simp(f, *c, false, b);
                match b.kind(k) {
                    GateKind::Const(true) => ones_fixed += 1,
                    GateKind::Const(false) => zeros_fixed += 1,
                    _ => kids.push(k),
                }
            }
            // Fixing a 1-input shifts the value vector left; fixing a 0-input
            // truncates it on the right.
            let mut window: Vec<bool> =
                vv[ones_fixed..vv.len() - zeros_fixed].to_vec();
            if negate {
                for v in &mut window {
                    *v = !*v;
                }
            }
            if window.iter().all(|v| *v == window[0]) {
                return b.constant(window[0]);
            }
            match kids.len() {
                0 => unreachable!("constant window handled above"),
                1 => {
                    // (0,1) is the identity wire, (1,0) the negation.
                    if window == [false, true] {
                        kids[0]
                    } else {
                        negate_built(b, kids[0])
                    }
                }
                _ => b.sym(window, kids),
            }
        }
    }
}

/// Pushes a negation through an already-simplified subtree in the builder
/// arena. The old parent nodes become unreachable and are pruned at `finish`.
fn negate_built(b: &mut FormulaBuilder, id: NodeId) -> NodeId {
    match b.kind(id).clone() {
        GateKind::Leaf { var, negated } => b.literal(var, !negated),
        GateKind::Const(c) => b.constant(!c),
        GateKind::Not => b.children(id)[0],
        GateKind::Sym(vv) => {
            let kids = b.children(id).to_vec();
            b.sym(vv.iter().map(|v| !v).collect(), kids)
        }
        GateKind::And => {
            let kids: Vec<NodeId> =
                b.children(id).to_vec().into_iter().map(|c| negate_built(b, c)).collect();
            b.or_of(kids)
        }
        GateKind::Or => {
            let kids: Vec<NodeId> =
                b.children(id).to_vec().into_iter().map(|c| negate_built(b, c)).collect();
            b.and_of(kids)
        }
    }
}

/// Replaces fan-in > 2 AND/OR gates by balanced fan-in-2 trees. Simplifies
/// first; errors on SYM gates, which have no DeMorgan lowering here.
pub fn lower_fanin2(f: &Formula) -> crate::error::Result<Formula> {
    let simplified = simplify(f);
    if let Some((_, _)) = simplified
        .nodes()
        .find(|(_, n)| matches!(n.kind, GateKind::Sym(_)))
    {
        return Err(crate::error::Error::NotDeMorgan { found: "SYM".into() });
    }
    let mut b = FormulaBuilder::new();
    let root = lower(&simplified, simplified.root(), &mut b);
    b.finish(root, Discipline::BoundedFanIn(2))
}

fn lower(f: &Formula, id: NodeId, b: &mut FormulaBuilder) -> NodeId {
    let node = f.node(id);
    match &node.kind {
        GateKind::Leaf { var, negated } => b.literal(*var, *negated),
        GateKind::Const(c) => b.constant(*c),
        GateKind::Not => {
            let c = lower(f, node.children[0], b);
            b.not(c)
        }
        GateKind::And | GateKind::Or => {
            let kids: Vec<NodeId> = node.children.iter().map(|c| lower(f, *c, b)).collect();
            let is_and = matches!(node.kind, GateKind::And);
            balance(b, &kids, is_and)
        }
        GateKind::Sym(_) => unreachable!("checked before lowering"),
    }
}

fn balance(b: &mut FormulaBuilder, kids: &[NodeId], is_and: bool) -> NodeId {
    match kids.len() {
        1 => kids[0],
        2 => {
            let pair = kids.to_vec();
            if is_and {
                b.and_node(pair)
            } else {
                b.or_node(pair)
            }
        }
        n => {
            let mid = n.div_ceil(2);
            let left = balance(b, &kids[..mid], is_and);
            let right = balance(b, &kids[mid..], is_and);
            if is_and {
                b.and_node(vec![left, right])
            } else {
                b.or_node(vec![left, right])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{SizeMetrics, VariableId};
    use crate::ov::OvInstance;

    fn exhaustive_equal(a: &Formula, b: &Formula, n: usize, d: usize) {
        for inst in OvInstance::enumerate_all(n, d) {
            assert_eq!(a.eval(&inst).unwrap(), b.eval(&inst).unwrap(), "at {inst:?}");
        }
    }

    #[test]
    fn or_with_false_child_collapses() {
        let mut b = FormulaBuilder::new();
        let zero = b.constant(false);
        let x = b.leaf(VariableId::new(0, 2));
        let y = b.leaf(VariableId::new(0, 3));
        let a = b.and_node(vec![x, y]);
        let top = b.or_node(vec![zero, a]);
        let f = b.finish(top, Discipline::UnboundedAc0).unwrap();
        let s = simplify(&f);
        assert!(matches!(s.node(s.root()).kind, GateKind::And));
        assert_eq!(s.node_count(), 3);
        exhaustive_equal(&f, &s, 1, 4);
    }

    #[test]
    fn double_negation_cancels() {
        let mut b = FormulaBuilder::new();
        let x = b.leaf(VariableId::new(0, 0));
        let n1 = b.not(x);
        let n2 = b.not(n1);
        let f = b.finish(n2, Discipline::UnboundedAc0).unwrap();
        let s = simplify(&f);
        assert_eq!(s.node_count(), 1);
        assert!(matches!(
            s.node(s.root()).kind,
            GateKind::Leaf { negated: false, .. }
        ));
    }

    #[test]
    fn sym_with_fixed_one_input_shifts_value_vector() {
        // SYM fan-in 3, value vector 0101, one input fixed to 1
        // -> SYM fan-in 2, value vector 101.
        let mut b = FormulaBuilder::new();
        let one = b.constant(true);
        let x = b.leaf(VariableId::new(0, 0));
        let y = b.leaf(VariableId::new(0, 1));
        let g = b.sym(vec![false, true, false, true], vec![one, x, y]);
        let f = b.finish(g, Discipline::SymmetricGate).unwrap();
        let s = simplify(&f);
        match &s.node(s.root()).kind {
            GateKind::Sym(vv) => assert_eq!(vv, &vec![true, false, true]),
            k => panic!("expected SYM, got {k:?}"),
        }
        exhaustive_equal(&f, &s, 1, 2);
    }

    #[test]
    fn not_above_gate_is_pushed_to_leaves() {
        let mut b = FormulaBuilder::new();
        let x = b.leaf(VariableId::new(0, 0));
        let y = b.leaf(VariableId::new(0, 1));
        let a = b.and_node(vec![x, y]);
        let n = b.not(a);
        let f = b.finish(n, Discipline::UnboundedAc0).unwrap();
        let s = simplify(&f);
        assert!(s.is_simplified());
        assert!(matches!(s.node(s.root()).kind, GateKind::Or));
        exhaustive_equal(&f, &s, 1, 2);
    }

    #[test]
    fn simplified_bounded_formula_satisfies_leaf_size_relation() {
        // s >= l >= s/2 on a handful of structured examples.
        for seed in 0..20u64 {
            let f = crate::testutil::random_demorgan_formula(seed, 6, 4);
            let s = simplify(&f);
            if s.as_constant().is_some() {
                continue;
            }
            let m: SizeMetrics = s.size_metrics();
            let size = m.size();
            let l = m.literal_leaf_count;
            assert!(size >= l && 2 * l >= size, "size={size} l={l}");
        }
    }

    #[test]
    fn lower_fanin2_balances_wide_gates() {
        let mut b = FormulaBuilder::new();
        let kids: Vec<_> = (0..7).map(|k| b.leaf(VariableId::new(0, k))).collect();
        let top = b.or_node(kids);
        let f = b.finish(top, Discipline::UnboundedAc0).unwrap();
        let lowered = lower_fanin2(&f).unwrap();
        assert!(lowered
            .nodes()
            .all(|(_, n)| n.children.len() <= 2));
        assert_eq!(lowered.size_metrics().literal_leaf_count, 7);
        exhaustive_equal(&f, &lowered, 1, 7);
    }

    #[test]
    fn lower_rejects_sym() {
        let mut b = FormulaBuilder::new();
        let x = b.leaf(VariableId::new(0, 0));
        let y = b.leaf(VariableId::new(0, 1));
        let g = b.sym(vec![true, false, false], vec![x, y]);
        let f = b.finish(g, Discipline::SymmetricGate).unwrap();
        let err = lower_fanin2(&f).unwrap_err();
        assert!(err.to_string().contains("lower"), "{err}");
    }
}
