//! OV instances, the brute-force oracle, and the explicit OV formula
//! constructions: the pairwise O(d n^2) formula, the enumeration O(d n 2^d)
//! formula, and the depth-3 OR-of-NOR-of-AND symmetric-gate formula.
//!
//! Orthogonality is over distinct unordered pairs i < j, so every builder and
//! the oracle require n >= 2.

use crate::error::{Error, Result};
use crate::formula::{
    Discipline, Formula, FormulaBuilder, NodeId, SizePrediction, VariableId,
};

/// An n x d bit matrix: n vectors of d Boolean coordinates, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OvInstance {
    n: usize,
    d: usize,
    bits: Vec<bool>,
}

impl OvInstance {
    pub fn new(n: usize, d: usize) -> Self {
        OvInstance { n, d, bits: vec![false; n * d] }
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::parameter("instance needs at least one vector"));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::parameter("instance needs at least one dimension"));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::parameter("ragged rows in instance"));
        }
        Ok(OvInstance { n, d, bits: rows.into_iter().flatten().collect() })
    }

    /// Instance whose n*d bits are the binary digits of `code` (bit 0 of
    /// `code` is v0[0]). Only meaningful for n*d <= 64; used by exhaustive
    /// sweeps.
    pub fn from_code(n: usize, d: usize, code: u64) -> Self {
        let bits = (0..n * d).map(|i| (code >> i) & 1 == 1).collect();
        OvInstance { n, d, bits }
    }

    /// All 2^(n*d) instances in code order.
    pub fn enumerate_all(n: usize, d: usize) -> impl Iterator<Item = OvInstance> {
        assert!(n * d <= 24, "exhaustive enumeration capped at 24 bits");
        (0u64..1 << (n * d)).map(move |code| OvInstance::from_code(n, d, code))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, vector: usize, coord: usize) -> Option<bool> {
        if vector < self.n && coord < self.d {
            Some(self.bits[vector * self.d + coord])
        } else {
            None
        }
    }

    pub fn set(&mut self, vector: usize, coord: usize, value: bool) {
        assert!(vector < self.n && coord < self.d);
        self.bits[vector * self.d + coord] = value;
    }

    pub fn row(&self, vector: usize) -> &[bool] {
        &self.bits[vector * self.d..(vector + 1) * self.d]
    }

    pub fn set_row(&mut self, vector: usize, row: &[bool]) {
        assert_eq!(row.len(), self.d);
        self.bits[vector * self.d..(vector + 1) * self.d].copy_from_slice(row);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.bits.chunks(self.d)
    }

    pub fn popcount(&self, vector: usize) -> usize {
        self.row(vector).iter().filter(|b| **b).count()
    }

    /// Rows packed into u64 words, low coordinate in the low bit.
    pub fn packed_rows(&self) -> Vec<Vec<u64>> {
        let words = self.d.div_ceil(64);
        self.rows()
            .map(|row| {
                let mut packed = vec![0u64; words];
                for (k, bit) in row.iter().enumerate() {
                    if *bit {
                        packed[k / 64] |= 1 << (k % 64);
                    }
                }
                packed
            })
            .collect()
    }

    /// Instance file format: first line `n d`, then n lines of d characters
    /// from {0,1}.
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.d);
        for row in self.rows() {
            out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) =
            lines.next().ok_or_else(|| Error::parse(1, "empty instance file"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(lno + 1, "expected 'n d'"));
        }
        let n: usize = toks[0].parse().map_err(|_| Error::parse(lno + 1, "bad n"))?;
        let d: usize = toks[1].parse().map_err(|_| Error::parse(lno + 1, "bad d"))?;
        let mut rows = Vec::with_capacity(n);
        for (lno, line) in lines {
            let row: Vec<bool> = line
                .trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::parse(lno + 1, format!("bad bit '{other}'"))),
                })
                .collect::<Result<_>>()?;
            if row.len() != d {
                return Err(Error::parse(
                    lno + 1,
                    format!("row has {} bits, expected {d}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::parse(1, format!("expected {n} rows, found {}", rows.len())));
        }
        OvInstance::from_rows(rows)
    }
}

/// 1 iff some pair i < j has inner product zero. Errors for n < 2.
pub fn brute_force_ov(inst: &OvInstance) -> Result<bool> {
    if inst.n() < 2 {
        return Err(Error::parameter("OV needs at least two vectors"));
    }
    let packed = inst.packed_rows();
    for i in 0..packed.len() {
        for j in i + 1..packed.len() {
            let disjoint = packed[i]
                .iter()
                .zip(&packed[j])
                .all(|(a, b)| a & b == 0);
            if disjoint {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn require_builder_dims(n: usize, d: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::parameter("OV constructions need n >= 2"));
    }
    if d < 1 {
        return Err(Error::parameter("OV constructions need d >= 1"));
    }
    Ok(())
}

/// OR over all pairs i < j of AND over coordinates k of OR(!vi[k], !vj[k]).
/// Exactly 2 d C(n,2) literal leaves.
pub fn build_pairwise_formula(n: usize, d: usize) -> Result<Formula> {
    require_builder_dims(n, d)?;
    let mut b = FormulaBuilder::new();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut coords = Vec::with_capacity(d);
            for k in 0..d {
                let a = b.literal(VariableId::new(i, k), true);
                let c = b.literal(VariableId::new(j, k), true);
                coords.push(b.or_of(vec![a, c]));
            }
            pairs.push(b.and_of(coords));
        }
    }
    let root = b.or_of(pairs);
    b.finish(root, Discipline::UnboundedAc0)
}

/// OR over all 2^d patterns w of AND(equality block, orthogonality block):
/// some input vector equals w, and some input vector avoids the support of w.
pub fn build_enumeration_formula(n: usize, d: usize) -> Result<Formula> {
    require_builder_dims(n, d)?;
    if d > 24 {
        return Err(Error::parameter("enumeration construction materializes 2^d terms; d > 24 refused"));
    }
    let mut b = FormulaBuilder::new();
    let mut terms = Vec::with_capacity(1 << d);
    for w in 0u64..1 << d {
        let w_bit = |k: usize| (w >> k) & 1 == 1;
        // Equality block: OR over i of the d-literal AND matching v_i = w.
        let mut eq_alts = Vec::with_capacity(n);
        for i in 0..n {
            let lits: Vec<NodeId> = (0..d)
                .map(|k| b.literal(VariableId::new(i, k), !w_bit(k)))
                .collect();
            eq_alts.push(b.and_of(lits));
        }
        let eq_block = b.or_of(eq_alts);
        // Orthogonality block: OR over i of AND over the support of w of
        // !v_i[k]. An empty AND (w = 0) is constant 1 and folds away.
        let mut orth_alts = Vec::with_capacity(n);
        for i in 0..n {
            let lits: Vec<NodeId> = (0..d)
                .filter(|k| w_bit(*k))
                .map(|k| b.literal(VariableId::new(i, k), true))
                .collect();
            orth_alts.push(b.and_of(lits));
        }
        let orth_block = b.or_of(orth_alts);
        terms.push(b.and_of(vec![eq_block, orth_block]));
    }
    let root = b.or_of(terms);
    b.finish(root, Discipline::UnboundedAc0)
}

/// The depth-3 symmetric-gate formula: OR of C(n,2) NORs of d ANDs of the
/// paired literals. NOR is a SYM gate with value vector 10...0.
pub fn build_symmetric_depth3(n: usize, d: usize) -> Result<Formula> {
    require_builder_dims(n, d)?;
    let mut b = FormulaBuilder::new();
    let mut nor_vv = vec![false; d + 1];
    nor_vv[0] = true;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let ands: Vec<NodeId> = (0..d)
                .map(|k| {
                    let a = b.leaf(VariableId::new(i, k));
                    let c = b.leaf(VariableId::new(j, k));
                    b.and_node(vec![a, c])
                })
                .collect();
            pairs.push(b.sym(nor_vv.clone(), ands));
        }
    }
    let root = b.or_of(pairs);
    b.finish(root, Discipline::SymmetricGate)
}

/// Red-blue OV instance: 2n vectors, the first `n_red` red, the rest blue.
#[derive(Debug, Clone)]
pub struct RedBlueInstance {
    pub inst: OvInstance,
    pub n_red: usize,
}

impl RedBlueInstance {
    pub fn red_rows(&self) -> impl Iterator<Item = &[bool]> {
        self.inst.rows().take(self.n_red)
    }

    pub fn blue_rows(&self) -> impl Iterator<Item = &[bool]> {
        self.inst.rows().skip(self.n_red)
    }
}

/// Doubles the vector set: red half and blue half are both copies of the
/// input, so the red-blue answer equals the plain OV answer.
pub fn build_redblue_instance(inst: &OvInstance) -> Result<RedBlueInstance> {
    if inst.n() < 2 {
        return Err(Error::parameter("red-blue doubling needs n >= 2"));
    }
    let mut rows: Vec<Vec<bool>> = inst.rows().map(|r| r.to_vec()).collect();
    rows.extend(inst.rows().map(|r| r.to_vec()));
    Ok(RedBlueInstance { inst: OvInstance::from_rows(rows)?, n_red: inst.n() })
}

/// 1 iff some red vector is orthogonal to some blue vector.
pub fn brute_force_redblue(rb: &RedBlueInstance) -> bool {
    for r in rb.red_rows() {
        for b in rb.blue_rows() {
            if r.iter().zip(b).all(|(x, y)| !(*x && *y)) {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Arithmetic size accounting. These mirror the builders exactly (including
// smart-constructor collapses) so construction sizes can be computed where
// materialization is infeasible; equality with measured metrics is tested.

/// Shape of a subformula for arithmetic accounting.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shape {
    pub leaves: u128,
    pub literals: u128,
    pub gates: u128,
    pub wires: u128,
    pub input_wires: u128,
    pub depth: u32,
    /// Leaf-like at the top (a gate parent would count an input wire).
    pub top_is_leaf: bool,
}

impl Shape {
    pub fn literal() -> Shape {
        Shape {
            leaves: 1,
            literals: 1,
            gates: 0,
            wires: 0,
            input_wires: 0,
            depth: 0,
            top_is_leaf: true,
        }
    }

    pub fn constant() -> Shape {
        Shape {
            leaves: 1,
            literals: 0,
            gates: 0,
            wires: 0,
            input_wires: 0,
            depth: 0,
            top_is_leaf: true,
        }
    }

    /// Gate over `copies` copies of `child` (requires copies >= 1 and a
    /// non-constant child); collapses to the child when copies == 1, the way
    /// the smart constructors do.
    pub fn gate_over_copies(child: Shape, copies: u128) -> Shape {
        if copies == 1 {
            return child;
        }
        Shape::gate_always(child, copies)
    }

    /// Gate over `copies` copies of `child` without the singleton collapse;
    /// mirrors raw SYM construction.
    pub fn gate_always(child: Shape, copies: u128) -> Shape {
        Shape {
            leaves: child.leaves * copies,
            literals: child.literals * copies,
            gates: child.gates * copies + 1,
            wires: child.wires * copies + copies,
            input_wires: child.input_wires * copies
                + if child.top_is_leaf { copies } else { 0 },
            depth: child.depth + 1,
            top_is_leaf: false,
        }
    }

    /// Gate over a heterogeneous child list; collapses singletons.
    pub fn gate_over(children: &[Shape]) -> Shape {
        if children.len() == 1 {
            return children[0];
        }
        let mut s = Shape {
            leaves: 0,
            literals: 0,
            gates: 1,
            wires: children.len() as u128,
            input_wires: 0,
            depth: 0,
            top_is_leaf: false,
        };
        for c in children {
            s.leaves += c.leaves;
            s.literals += c.literals;
            s.gates += c.gates;
            s.wires += c.wires;
            s.input_wires += c.input_wires + u128::from(c.top_is_leaf);
            s.depth = s.depth.max(c.depth + 1);
        }
        s
    }

    pub fn into_prediction(self) -> SizePrediction {
        SizePrediction {
            leaf_count: self.leaves,
            literal_leaf_count: self.literals,
            gate_count: self.gates,
            wire_count: self.wires,
            input_wire_count: self.input_wires,
            depth: self.depth,
        }
    }
}

/// Predicted metrics of [`build_pairwise_formula`] without materializing it.
pub fn predicted_pairwise_metrics(n: usize, d: usize) -> Result<SizePrediction> {
    require_builder_dims(n, d)?;
    let pair_count = binomial(n as u64, 2);
    let coord = Shape::gate_over_copies(Shape::literal(), 2);
    let block = Shape::gate_over_copies(coord, d as u128);
    Ok(Shape::gate_over_copies(block, pair_count).into_prediction())
}

/// Predicted metrics of [`build_enumeration_formula`].
pub fn predicted_enumeration_metrics(n: usize, d: usize) -> Result<SizePrediction> {
    require_builder_dims(n, d)?;
    let eq_alt = Shape::gate_over_copies(Shape::literal(), d as u128);
    let eq_block = Shape::gate_over_copies(eq_alt, n as u128);
    let mut terms = Vec::new();
    for j in 0..=d {
        let multiplicity = binomial(d as u64, j as u64);
        let term = if j == 0 {
            // Orthogonality block is constant 1; the term is the equality
            // block alone.
            eq_block
        } else {
            let orth_alt = Shape::gate_over_copies(Shape::literal(), j as u128);
            let orth_block = Shape::gate_over_copies(orth_alt, n as u128);
            Shape::gate_over(&[eq_block, orth_block])
        };
        terms.push((term, multiplicity));
    }
    Ok(or_of_weighted(&terms).into_prediction())
}

/// Predicted metrics of [`build_symmetric_depth3`].
pub fn predicted_sym3_metrics(n: usize, d: usize) -> Result<SizePrediction> {
    require_builder_dims(n, d)?;
    let pair_count = binomial(n as u64, 2);
    let and2 = Shape::gate_over_copies(Shape::literal(), 2);
    // The NOR is a raw SYM node even at fan-in 1.
    let nor = Shape::gate_always(and2, d as u128);
    Ok(Shape::gate_over_copies(nor, pair_count).into_prediction())
}

/// Top-level OR over weighted distinct child shapes (total multiplicity >= 2).
pub(crate) fn or_of_weighted(children: &[(Shape, u128)]) -> Shape {
    let total: u128 = children.iter().map(|(_, m)| m).sum();
    if total == 1 {
        return children.iter().find(|(_, m)| *m > 0).unwrap().0;
    }
    let mut s = Shape {
        leaves: 0,
        literals: 0,
        gates: 1,
        wires: total,
        input_wires: 0,
        depth: 0,
        top_is_leaf: false,
    };
    for (c, m) in children {
        if *m == 0 {
            continue;
        }
        s.leaves += c.leaves * m;
        s.literals += c.literals * m;
        s.gates += c.gates * m;
        s.wires += c.wires * m;
        s.input_wires += (c.input_wires + u128::from(c.top_is_leaf)) * m;
        s.depth = s.depth.max(c.depth + 1);
    }
    s
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[u8]]) -> OvInstance {
        OvInstance::from_rows(
            rows.iter().map(|r| r.iter().map(|b| *b == 1).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn oracle_hand_cases() {
        assert!(brute_force_ov(&inst(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(!brute_force_ov(&inst(&[&[1, 1], &[1, 1]])).unwrap());
        // All three pairwise inner products equal 1.
        assert!(!brute_force_ov(&inst(&[&[1, 0, 1], &[0, 1, 1], &[1, 1, 0]])).unwrap());
        assert!(brute_force_ov(&inst(&[&[1]])).is_err());
    }

    #[test]
    fn pairwise_structure() {
        let f = build_pairwise_formula(4, 3).unwrap();
        let m = f.size_metrics();
        assert_eq!(f.node(f.root()).children.len(), 6); // OR over C(4,2) pairs
        assert_eq!(m.leaf_count, 36); // 2 * 3 * C(4,2)
        assert!(build_pairwise_formula(1, 3).is_err());
    }

    #[test]
    fn pairwise_example_instance() {
        let f = build_pairwise_formula(3, 2).unwrap();
        assert!(f.eval(&inst(&[&[1, 0], &[0, 1], &[1, 1]])).unwrap());
    }

    #[test]
    fn per_vector_leaf_counts_of_builders() {
        // Pairwise at n=4, d=2: every vector is read on d(n-1) = 6 leaves.
        let f = build_pairwise_formula(4, 2).unwrap();
        assert_eq!(f.var_leaf_counts(4, 2).unwrap(), vec![6, 6, 6, 6]);
        assert_eq!(f.least_read_vector(4, 2).unwrap(), 0);
        // Enumeration at n=2, d=2: both vectors read equally often.
        let f = build_enumeration_formula(2, 2).unwrap();
        let counts = f.var_leaf_counts(2, 2).unwrap();
        assert_eq!(counts[0], counts[1]);
    }

    #[test]
    fn pairwise_n2_d1_is_single_or() {
        let f = build_pairwise_formula(2, 1).unwrap();
        assert!(matches!(f.node(f.root()).kind, GateKind::Or));
        assert_eq!(f.node_count(), 3);
        for i in OvInstance::enumerate_all(2, 1) {
            assert_eq!(f.eval(&i).unwrap(), brute_force_ov(&i).unwrap());
        }
    }

    use crate::formula::GateKind;

    #[test]
    fn enumeration_top_fanin_is_2_pow_d() {
        let f = build_enumeration_formula(2, 3).unwrap();
        assert_eq!(f.node(f.root()).children.len(), 8);
    }

    #[test]
    fn enumeration_exhaustive_n2_d2() {
        let f = build_enumeration_formula(2, 2).unwrap();
        for i in OvInstance::enumerate_all(2, 2) {
            assert_eq!(f.eval(&i).unwrap(), brute_force_ov(&i).unwrap(), "at {i:?}");
        }
    }

    #[test]
    fn enumeration_zero_vector_witness() {
        let f = build_enumeration_formula(2, 2).unwrap();
        assert!(f.eval(&inst(&[&[0, 0], &[1, 1]])).unwrap());
    }

    #[test]
    fn sym3_structure_and_equivalence() {
        let f = build_symmetric_depth3(2, 2).unwrap();
        for i in OvInstance::enumerate_all(2, 2) {
            assert_eq!(f.eval(&i).unwrap(), brute_force_ov(&i).unwrap());
        }
        // Wire count for n=3, d=2: top 3 + NOR wires 6 + AND wires 12 = 21.
        let f = build_symmetric_depth3(3, 2).unwrap();
        assert_eq!(f.size_metrics().wire_count, 21);
        // NOR value vector for fan-in 3.
        let f = build_symmetric_depth3(2, 3).unwrap();
        let nor = &f.node(f.root()).kind;
        match nor {
            GateKind::Sym(vv) => assert_eq!(vv, &vec![true, false, false, false]),
            other => panic!("expected SYM root for n=2, got {other:?}"),
        }
    }

    #[test]
    fn builders_are_deterministic() {
        let a = crate::formula_text::serialize_formula(&build_pairwise_formula(5, 3).unwrap());
        let b = crate::formula_text::serialize_formula(&build_pairwise_formula(5, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn redblue_matches_plain_ov() {
        let yes = inst(&[&[1, 0], &[0, 1]]);
        let rb = build_redblue_instance(&yes).unwrap();
        assert!(brute_force_redblue(&rb));
        let no = inst(&[&[1, 1], &[1, 1]]);
        let rb = build_redblue_instance(&no).unwrap();
        assert!(!brute_force_redblue(&rb));
    }

    #[test]
    fn predicted_metrics_match_materialized() {
        for (n, d) in [(2, 1), (2, 2), (3, 1), (3, 4), (4, 3), (6, 5), (8, 2)] {
            let pw = build_pairwise_formula(n, d).unwrap().size_metrics();
            assert!(
                predicted_pairwise_metrics(n, d).unwrap().matches(&pw),
                "pairwise ({n},{d}): {:?} vs {pw:?}",
                predicted_pairwise_metrics(n, d).unwrap()
            );
            let en = build_enumeration_formula(n, d).unwrap().size_metrics();
            assert!(
                predicted_enumeration_metrics(n, d).unwrap().matches(&en),
                "enumeration ({n},{d}): {:?} vs {en:?}",
                predicted_enumeration_metrics(n, d).unwrap()
            );
            let s3 = build_symmetric_depth3(n, d).unwrap().size_metrics();
            assert!(
                predicted_sym3_metrics(n, d).unwrap().matches(&s3),
                "sym3 ({n},{d}): {:?} vs {s3:?}",
                predicted_sym3_metrics(n, d).unwrap()
            );
        }
    }

    #[test]
    fn instance_round_trip() {
        let i = inst(&[&[1, 0, 1], &[0, 1, 1]]);
        let text = i.serialize();
        assert_eq!(text, "2 3\n101\n011\n");
        assert_eq!(OvInstance::parse(&text).unwrap(), i);
    }
}
