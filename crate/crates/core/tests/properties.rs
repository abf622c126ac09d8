//! Property-based invariants: simplification soundness, the leaf/size and
//! wire relations on simplified formulas, serialization round trips, compiler
//! equivalence and size, and restriction equivalence.

mod common;

use proptest::prelude::*;

use ovkit::bp::BranchingProgram;
use ovkit::formula::{Discipline, Formula, FormulaBuilder, GateKind, NodeId, VariableId};
use ovkit::formula_text::{parse_formula, serialize_formula};
use ovkit::ov::OvInstance;
use ovkit::simplify::{lower_fanin2, simplify};
use ovkit::transforms::{compile_formula_to_bp, restrict_formula, Restriction};

/// Variable grid used throughout: n = 3 vectors, d = 2 coordinates.
const N: usize = 3;
const D: usize = 2;
const VARS: usize = N * D;

#[derive(Debug, Clone)]
enum TestTree {
    Lit(usize, bool),
    Const(bool),
    Not(Box<TestTree>),
    And(Vec<TestTree>),
    Or(Vec<TestTree>),
    Sym(Vec<bool>, Vec<TestTree>),
}

fn build(tree: &TestTree, b: &mut FormulaBuilder) -> NodeId {
    match tree {
        TestTree::Lit(v, neg) => b.literal(VariableId::new(v / D, v % D), *neg),
        TestTree::Const(c) => b.constant(*c),
        TestTree::Not(t) => {
            let c = build(t, b);
            b.not(c)
        }
        TestTree::And(kids) => {
            let ids: Vec<NodeId> = kids.iter().map(|k| build(k, b)).collect();
            b.and_node(ids)
        }
        TestTree::Or(kids) => {
            let ids: Vec<NodeId> = kids.iter().map(|k| build(k, b)).collect();
            b.or_node(ids)
        }
        TestTree::Sym(vv, kids) => {
            let ids: Vec<NodeId> = kids.iter().map(|k| build(k, b)).collect();
            b.sym(vv.clone(), ids)
        }
    }
}

fn to_formula(tree: &TestTree, discipline: Discipline) -> Formula {
    let mut b = FormulaBuilder::new();
    let root = build(tree, &mut b);
    b.finish(root, discipline).unwrap()
}

fn leaf() -> impl Strategy<Value = TestTree> {
    prop_oneof![
        4 => (0..VARS, any::<bool>()).prop_map(|(v, neg)| TestTree::Lit(v, neg)),
        1 => any::<bool>().prop_map(TestTree::Const),
    ]
}

/// General trees: AND/OR of fan-in 1..4, NOT, SYM with matching value vector.
fn arb_tree() -> impl Strategy<Value = TestTree> {
    leaf().prop_recursive(4, 40, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(TestTree::And),
            prop::collection::vec(inner.clone(), 1..4).prop_map(TestTree::Or),
            inner.clone().prop_map(|t| TestTree::Not(Box::new(t))),
            prop::collection::vec(inner, 1..4).prop_flat_map(|kids| {
                let len = kids.len();
                prop::collection::vec(any::<bool>(), len + 1)
                    .prop_map(move |vv| TestTree::Sym(vv, kids.clone()))
            }),
        ]
    })
}

/// Fan-in-2 DeMorgan trees.
fn arb_demorgan() -> impl Strategy<Value = TestTree> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(l, r)| TestTree::And(vec![l, r])),
            (inner.clone(), inner.clone())
                .prop_map(|(l, r)| TestTree::Or(vec![l, r])),
            inner.prop_map(|t| TestTree::Not(Box::new(t))),
        ]
    })
}

fn eval_all(f: &Formula) -> Vec<bool> {
    OvInstance::enumerate_all(N, D)
        .map(|inst| f.eval(&inst).unwrap())
        .collect()
}

fn eval_all_bp(bp: &BranchingProgram) -> Vec<bool> {
    OvInstance::enumerate_all(N, D)
        .map(|inst| bp.eval(&inst).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn simplify_preserves_semantics(tree in arb_tree()) {
        let f = to_formula(&tree, Discipline::SymmetricGate);
        let s = simplify(&f);
        prop_assert!(s.is_simplified());
        prop_assert_eq!(eval_all(&f), eval_all(&s));
    }

    #[test]
    fn simplified_bounded_formula_obeys_leaf_size_relation(tree in arb_demorgan()) {
        let f = to_formula(&tree, Discipline::BoundedFanIn(2));
        let s = simplify(&f);
        if s.as_constant().is_none() {
            let m = s.size_metrics();
            let size = m.size();
            let l = m.literal_leaf_count;
            prop_assert!(size >= l, "size {} < leaves {}", size, l);
            prop_assert!(2 * l >= size, "leaves {} < size {} / 2", l, size);
        }
    }

    #[test]
    fn simplified_symmetric_formula_obeys_wire_relation(tree in arb_tree()) {
        let f = to_formula(&tree, Discipline::SymmetricGate);
        let s = simplify(&f);
        if s.as_constant().is_none() {
            let m = s.size_metrics();
            prop_assert!(
                m.input_wire_count >= m.gate_wire_count,
                "w_i {} < w_g {}",
                m.input_wire_count,
                m.gate_wire_count
            );
            prop_assert!(m.wire_count <= 2 * m.input_wire_count);
        }
    }

    #[test]
    fn node_count_is_one_plus_wires(tree in arb_tree()) {
        let f = to_formula(&tree, Discipline::SymmetricGate);
        prop_assert_eq!(f.node_count(), 1 + f.size_metrics().wire_count);
    }

    #[test]
    fn serialization_round_trips(tree in arb_tree()) {
        let f = to_formula(&tree, Discipline::SymmetricGate);
        let text = serialize_formula(&f);
        let parsed = parse_formula(&text).unwrap();
        prop_assert_eq!(&parsed, &f);
        prop_assert_eq!(serialize_formula(&parsed), text);
    }

    #[test]
    fn compiled_bp_is_equivalent_and_literal_sized(tree in arb_demorgan()) {
        let f = to_formula(&tree, Discipline::BoundedFanIn(2));
        let lowered = lower_fanin2(&f).unwrap();
        let bp = compile_formula_to_bp(&lowered, N, D).unwrap();
        prop_assert_eq!(
            bp.size().internal_nodes,
            lowered.size_metrics().literal_leaf_count
        );
        prop_assert_eq!(eval_all(&f), eval_all_bp(&bp));
    }

    #[test]
    fn restricted_bp_matches_plugged_evaluation(
        tree in arb_demorgan(),
        assigned_bits in prop::collection::vec(any::<bool>(), 2 * D),
        which in 0usize..3,
    ) {
        // Assign two of the three vectors, leave `which` free.
        let f = to_formula(&tree, Discipline::BoundedFanIn(2));
        let lowered = lower_fanin2(&f).unwrap();
        let bp = compile_formula_to_bp(&lowered, N, D).unwrap();
        let mut r = Restriction::empty(N, D);
        let mut at = 0;
        for v in 0..N {
            if v != which {
                r.assign_vector(v, &assigned_bits[at * D..(at + 1) * D]).unwrap();
                at += 1;
            }
        }
        let restricted = bp.restrict(&r).unwrap();
        for (_, node) in restricted.nodes() {
            if let ovkit::bp::BpNode::Decision { var, .. } = node {
                prop_assert_eq!(var.vector, which);
            }
        }
        for code in 0..1u64 << D {
            let free: Vec<bool> = (0..D).map(|k| (code >> k) & 1 == 1).collect();
            let inst = r.complete_with(which, &free).unwrap();
            prop_assert_eq!(
                restricted.eval(&inst).unwrap(),
                bp.eval(&inst).unwrap()
            );
        }
    }

    #[test]
    fn restricted_formula_matches_plugged_evaluation(
        tree in arb_tree(),
        assigned_bits in prop::collection::vec(any::<bool>(), D),
        which in 0usize..3,
    ) {
        let f = to_formula(&tree, Discipline::SymmetricGate);
        let mut r = Restriction::empty(N, D);
        r.assign_vector(which, &assigned_bits).unwrap();
        let restricted = restrict_formula(&f, &r);
        for (_, node) in restricted.nodes() {
            if let GateKind::Leaf { var, .. } = &node.kind {
                prop_assert!(var.vector != which, "assigned vector still read");
            }
        }
        for inst in OvInstance::enumerate_all(N, D) {
            let mut plugged = inst.clone();
            plugged.set_row(which, &assigned_bits);
            prop_assert_eq!(
                restricted.eval(&plugged).unwrap(),
                f.eval(&plugged).unwrap()
            );
        }
    }

    #[test]
    fn sym_gate_restriction_is_constant_plugging(
        vv in prop::collection::vec(any::<bool>(), 5),
        negs in prop::collection::vec(any::<bool>(), 4),
        fix_mask in 0u8..16,
        fix_bits in 0u8..16,
    ) {
        // One SYM gate over 4 literals of vector 0; restrict a subset of its
        // variables and compare against plugging constants exhaustively.
        let mut b = FormulaBuilder::new();
        let kids: Vec<NodeId> = (0..4)
            .map(|k| b.literal(VariableId::new(0, k), negs[k]))
            .collect();
        let root = b.sym(vv.clone(), kids);
        let f = b.finish(root, Discipline::SymmetricGate).unwrap();
        let mut r = Restriction::empty(1, 4);
        for k in 0..4 {
            if (fix_mask >> k) & 1 == 1 {
                r.set(VariableId::new(0, k), (fix_bits >> k) & 1 == 1).unwrap();
            }
        }
        let restricted = restrict_formula(&f, &r);
        for code in 0..16u64 {
            let mut inst = OvInstance::from_code(1, 4, code);
            for k in 0..4 {
                if (fix_mask >> k) & 1 == 1 {
                    inst.set(0, k, (fix_bits >> k) & 1 == 1);
                }
            }
            prop_assert_eq!(
                restricted.eval(&inst).unwrap(),
                f.eval(&inst).unwrap()
            );
        }
    }
}

#[test]
fn simplify_agrees_exhaustively_on_twelve_variable_formulas() {
    // Deterministic sweep at the spec scale: 12 variables, exhaustive inputs.
    for seed in 0..12u64 {
        let f = common::random_demorgan_formula(seed, 3, 4, 6);
        let s = simplify(&f);
        assert!(s.is_simplified());
        for inst in OvInstance::enumerate_all(3, 4) {
            assert_eq!(f.eval(&inst).unwrap(), s.eval(&inst).unwrap(), "seed {seed}");
        }
    }
}
