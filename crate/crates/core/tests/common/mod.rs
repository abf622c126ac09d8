//! Shared generators for the integration test suites.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ovkit::formula::{Discipline, Formula, FormulaBuilder, NodeId, VariableId};
use ovkit::transforms::{middle_layer, PartialFunctionSpec};

/// Deterministic random DeMorgan tree (fan-in-2 AND/OR, NOT, literals,
/// constants) over the (n, d) variable grid.
pub fn random_demorgan_formula(seed: u64, n: usize, d: usize, depth: usize) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = FormulaBuilder::new();
    let root = random_node(&mut rng, &mut b, n, d, depth);
    b.finish(root, Discipline::BoundedFanIn(2)).unwrap()
}

fn random_node(
    rng: &mut ChaCha8Rng,
    b: &mut FormulaBuilder,
    n: usize,
    d: usize,
    depth: usize,
) -> NodeId {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.1) {
            b.constant(rng.random_bool(0.5))
        } else {
            let var = VariableId::new(rng.random_range(0..n), rng.random_range(0..d));
            b.literal(var, rng.random_bool(0.5))
        };
    }
    match rng.random_range(0..5u8) {
        0 => {
            let c = random_node(rng, b, n, d, depth - 1);
            b.not(c)
        }
        1 | 2 => {
            let l = random_node(rng, b, n, d, depth - 1);
            let r = random_node(rng, b, n, d, depth - 1);
            b.and_node(vec![l, r])
        }
        _ => {
            let l = random_node(rng, b, n, d, depth - 1);
            let r = random_node(rng, b, n, d, depth - 1);
            b.or_node(vec![l, r])
        }
    }
}

/// Random full-support partial function spec on the middle layer of
/// dimension d, avoiding complementary 1-pairs so the spec is encodable.
pub fn random_encodable_spec(seed: u64, d: usize) -> PartialFunctionSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layer = middle_layer(d);
    let mut pairs: Vec<(Vec<bool>, bool)> = Vec::new();
    for x in &layer {
        if !rng.random_bool(0.75) {
            continue;
        }
        let mut y = rng.random_bool(0.5);
        if y {
            let complement: Vec<bool> = x.iter().map(|b| !b).collect();
            let clash = pairs.iter().any(|(s, sy)| *sy && *s == complement);
            if clash {
                y = false;
            }
        }
        pairs.push((x.clone(), y));
    }
    PartialFunctionSpec::new(d, pairs).unwrap()
}
