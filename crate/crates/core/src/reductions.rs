//! Linear projection reductions from OV to Batch Partial Match, Batch Subset
//! Query, and Batch Hamming Nearest Neighbors, with brute-force solvers for
//! the targets.
//!
//! A projection reduction maps instances so that every output symbol depends
//! on at most one input bit. Partial match and subset query admit direct
//! projections. Hamming nearest neighbors does not in general: the threshold
//! couples to vector weights, so the reduction emits one sub-instance per
//! weight pair, and only the uniform-weight case is a single pure projection.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ov::OvInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmSymbol {
    Zero,
    One,
    Star,
}

impl PmSymbol {
    pub fn from_bit(b: bool) -> Self {
        if b {
            PmSymbol::One
        } else {
            PmSymbol::Zero
        }
    }

    pub fn as_char(&self) -> char {
        match self {
            PmSymbol::Zero => '0',
            PmSymbol::One => '1',
            PmSymbol::Star => '*',
        }
    }
}

/// n database vectors and n queries over {0,1,*}^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMatchInstance {
    pub d: usize,
    pub database: Vec<Vec<bool>>,
    pub queries: Vec<Vec<PmSymbol>>,
}

/// n sets and n query sets over [d], as bit masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetQueryInstance {
    pub d: usize,
    pub sets: Vec<Vec<bool>>,
    pub queries: Vec<Vec<bool>>,
}

/// Points, queries, and a distance threshold k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammingNnInstance {
    pub d: usize,
    pub k: usize,
    pub points: Vec<Vec<bool>>,
    pub queries: Vec<Vec<bool>>,
}

/// Family of Hamming sub-instances, one per weight pair; the union of their
/// answers equals the OV answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammingBuckets {
    pub d: usize,
    pub buckets: Vec<HammingNnInstance>,
}

/// Database row i is v_i unchanged; query row j has a star where v_j is 0 and
/// a 0 where v_j is 1, so v_i matches q_j exactly when the supports are
/// disjoint.
pub fn reduce_to_partial_match(inst: &OvInstance) -> PartialMatchInstance {
    let database: Vec<Vec<bool>> = inst.rows().map(|r| r.to_vec()).collect();
    let queries: Vec<Vec<PmSymbol>> = inst
        .rows()
        .map(|r| {
            r.iter()
                .map(|b| if *b { PmSymbol::Zero } else { PmSymbol::Star })
                .collect()
        })
        .collect();
    PartialMatchInstance { d: inst.d(), database, queries }
}

/// S_i = support(v_i), T_j = complement of support(v_j); S_i is a subset of
/// T_j exactly when the supports are disjoint.
pub fn reduce_to_subset_query(inst: &OvInstance) -> SubsetQueryInstance {
    let sets: Vec<Vec<bool>> = inst.rows().map(|r| r.to_vec()).collect();
    let queries: Vec<Vec<bool>> =
        inst.rows().map(|r| r.iter().map(|b| !b).collect()).collect();
    SubsetQueryInstance { d: inst.d(), sets, queries }
}

/// Buckets vectors by Hamming weight. For weights (w1, w2) the sub-instance
/// takes the w1-vectors as points, the complements of the w2-vectors as
/// queries, and threshold k = d - w1 - w2: by
/// `dist(u, complement(v)) = d - |u| - |v| + 2 <u, v>`, a pair within
/// distance k is exactly an orthogonal pair with those weights. Weight pairs
/// with w1 + w2 > d can never be orthogonal and are skipped.
pub fn reduce_to_hamming_nn(inst: &OvInstance) -> HammingBuckets {
    let d = inst.d();
    let mut by_weight: Vec<Vec<Vec<bool>>> = vec![Vec::new(); d + 1];
    for row in inst.rows() {
        let w = row.iter().filter(|b| **b).count();
        by_weight[w].push(row.to_vec());
    }
    let mut buckets = Vec::new();
    for w1 in 0..=d {
        if by_weight[w1].is_empty() {
            continue;
        }
        for w2 in w1..=d {
            if by_weight[w2].is_empty() || w1 + w2 > d {
                continue;
            }
            buckets.push(HammingNnInstance {
                d,
                k: d - w1 - w2,
                points: by_weight[w1].clone(),
                queries: by_weight[w2]
                    .iter()
                    .map(|v| v.iter().map(|b| !b).collect())
                    .collect(),
            });
        }
    }
    HammingBuckets { d, buckets }
}

/// Single-instance fast path when every vector has the same weight w:
/// points = vectors, queries = complements, k = d - 2w. A pure projection.
/// Errors if the weights differ.
pub fn reduce_to_hamming_nn_uniform(inst: &OvInstance) -> Result<HammingNnInstance> {
    let d = inst.d();
    let w = inst.popcount(0);
    if (1..inst.n()).any(|i| inst.popcount(i) != w) {
        return Err(Error::parameter(
            "uniform-weight Hamming reduction needs all vectors of equal weight",
        ));
    }
    if 2 * w > d {
        // No pair can be orthogonal; an unsatisfiable threshold keeps the
        // bucket well-formed would need k < 0, so emit the empty family form.
        return Err(Error::parameter(
            "uniform weight exceeds d/2; no orthogonal pair is possible",
        ));
    }
    Ok(HammingNnInstance {
        d,
        k: d - 2 * w,
        points: inst.rows().map(|r| r.to_vec()).collect(),
        queries: inst.rows().map(|r| r.iter().map(|b| !b).collect()).collect(),
    })
}

pub fn solve_partial_match(inst: &PartialMatchInstance) -> bool {
    inst.database.iter().any(|v| {
        inst.queries.iter().any(|q| {
            v.iter()
                .zip(q)
                .all(|(bit, sym)| matches!(sym, PmSymbol::Star) || *sym == PmSymbol::from_bit(*bit))
        })
    })
}

pub fn solve_subset_query(inst: &SubsetQueryInstance) -> bool {
    inst.sets.iter().any(|s| {
        inst.queries
            .iter()
            .any(|t| s.iter().zip(t).all(|(a, b)| !*a || *b))
    })
}

pub fn solve_hamming_nn(inst: &HammingNnInstance) -> bool {
    inst.points.iter().any(|p| {
        inst.queries.iter().any(|q| {
            let dist = p.iter().zip(q).filter(|(a, b)| a != b).count();
            dist <= inst.k
        })
    })
}

pub fn solve_hamming_buckets(fam: &HammingBuckets) -> bool {
    fam.buckets.iter().any(solve_hamming_nn)
}

// ---------------------------------------------------------------------------
// Projection descriptions. Each output symbol of a projection reduction reads
// at most one input bit; the descriptions below are applied generically and
// cross-checked against the direct reduction functions, which makes the
// "depends on at most one input" property a checkable artifact rather than a
// comment.

/// How one output symbol is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputRule {
    Const(char),
    /// Reads flat input bit `input`; emits `on_zero`/`on_one` accordingly.
    Wire { input: usize, on_zero: char, on_one: char },
}

impl OutputRule {
    pub fn dependency(&self) -> Option<usize> {
        match self {
            OutputRule::Const(_) => None,
            OutputRule::Wire { input, .. } => Some(*input),
        }
    }
}

/// A projection circuit: `outputs[o]` tells how output symbol o is computed
/// from the flat n*d input.
#[derive(Debug, Clone)]
pub struct ProjectionDescription {
    pub n_inputs: usize,
    pub outputs: Vec<OutputRule>,
}

impl ProjectionDescription {
    pub fn apply(&self, inst: &OvInstance) -> Vec<char> {
        let d = inst.d();
        self.outputs
            .iter()
            .map(|rule| match rule {
                OutputRule::Const(c) => *c,
                OutputRule::Wire { input, on_zero, on_one } => {
                    let bit = inst.get(input / d, input % d).expect("input in range");
                    if bit {
                        *on_one
                    } else {
                        *on_zero
                    }
                }
            })
            .collect()
    }
}

/// Projection form of [`reduce_to_partial_match`]: database symbols first
/// (row-major), then query symbols.
pub fn partial_match_projection(n: usize, d: usize) -> ProjectionDescription {
    let mut outputs = Vec::with_capacity(2 * n * d);
    for flat in 0..n * d {
        outputs.push(OutputRule::Wire { input: flat, on_zero: '0', on_one: '1' });
    }
    for flat in 0..n * d {
        outputs.push(OutputRule::Wire { input: flat, on_zero: '*', on_one: '0' });
    }
    ProjectionDescription { n_inputs: n * d, outputs }
}

/// Projection form of [`reduce_to_subset_query`]: set masks, then query masks.
pub fn subset_query_projection(n: usize, d: usize) -> ProjectionDescription {
    let mut outputs = Vec::with_capacity(2 * n * d);
    for flat in 0..n * d {
        outputs.push(OutputRule::Wire { input: flat, on_zero: '0', on_one: '1' });
    }
    for flat in 0..n * d {
        outputs.push(OutputRule::Wire { input: flat, on_zero: '1', on_one: '0' });
    }
    ProjectionDescription { n_inputs: n * d, outputs }
}

/// Projection form of the uniform-weight Hamming reduction: points, then
/// complemented queries. Valid under the equal-weight promise, where the
/// threshold k = d - 2w is instance metadata rather than an output symbol.
pub fn hamming_uniform_projection(n: usize, d: usize) -> ProjectionDescription {
    let mut outputs = Vec::with_capacity(2 * n * d);
    for flat in 0..n * d {
        outputs.push(OutputRule::Wire { input: flat, on_zero: '0', on_one: '1' });
    }
    for flat in 0..n * d {
        outputs.push(OutputRule::Wire { input: flat, on_zero: '1', on_one: '0' });
    }
    ProjectionDescription { n_inputs: n * d, outputs }
}

/// Flattens a target instance into the symbol stream its projection
/// description produces, for cross-checking.
pub fn partial_match_symbols(inst: &PartialMatchInstance) -> Vec<char> {
    let mut out = Vec::new();
    for row in &inst.database {
        out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
    }
    for q in &inst.queries {
        out.extend(q.iter().map(|s| s.as_char()));
    }
    out
}

pub fn subset_query_symbols(inst: &SubsetQueryInstance) -> Vec<char> {
    let mut out = Vec::new();
    for row in inst.sets.iter().chain(&inst.queries) {
        out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
    }
    out
}

pub fn hamming_symbols(inst: &HammingNnInstance) -> Vec<char> {
    let mut out = Vec::new();
    for row in inst.points.iter().chain(&inst.queries) {
        out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
    }
    out
}

// ---------------------------------------------------------------------------
// Target-instance file formats; they mirror the OV instance format.

impl PartialMatchInstance {
    /// `n d`, then n database rows over {0,1}, then n query rows over {0,1,*}.
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.database.len(), self.d);
        for row in &self.database {
            out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
            out.push('\n');
        }
        for q in &self.queries {
            out.extend(q.iter().map(|s| s.as_char()));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) =
            lines.next().ok_or_else(|| Error::parse(1, "empty partial match file"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(lno + 1, "expected 'n d'"));
        }
        let n: usize = toks[0].parse().map_err(|_| Error::parse(lno + 1, "bad n"))?;
        let d: usize = toks[1].parse().map_err(|_| Error::parse(lno + 1, "bad d"))?;
        let mut database = Vec::with_capacity(n);
        let mut queries = Vec::with_capacity(n);
        for (lno, line) in lines {
            let lno = lno + 1;
            let line = line.trim();
            if line.len() != d {
                return Err(Error::parse(lno, format!("row has {} symbols, expected {d}", line.len())));
            }
            if database.len() < n {
                let row: Vec<bool> = line
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::parse(lno, format!("bad database bit '{other}'"))),
                    })
                    .collect::<Result<_>>()?;
                database.push(row);
            } else {
                let q: Vec<PmSymbol> = line
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(PmSymbol::Zero),
                        '1' => Ok(PmSymbol::One),
                        '*' => Ok(PmSymbol::Star),
                        other => Err(Error::parse(lno, format!("bad query symbol '{other}'"))),
                    })
                    .collect::<Result<_>>()?;
                queries.push(q);
            }
        }
        if database.len() != n || queries.len() != n {
            return Err(Error::parse(1, "row count does not match header"));
        }
        Ok(PartialMatchInstance { d, database, queries })
    }
}

impl SubsetQueryInstance {
    /// `n d`, then n set masks, then n query masks, all over {0,1}.
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.sets.len(), self.d);
        for row in self.sets.iter().chain(&self.queries) {
            out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

impl HammingNnInstance {
    /// Header `np nq d k`, then np point rows and nq query rows.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.points.len(),
            self.queries.len(),
            self.d,
            self.k
        );
        for row in self.points.iter().chain(&self.queries) {
            out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

impl HammingBuckets {
    /// `buckets B`, then B serialized sub-instances.
    pub fn serialize(&self) -> String {
        let mut out = format!("buckets {}\n", self.buckets.len());
        for b in &self.buckets {
            let _ = write!(out, "{}", b.serialize());
        }
        out
    }
}
