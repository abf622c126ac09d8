//! Deterministic random structure generators shared by unit tests.

#![cfg(test)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Discipline, Formula, FormulaBuilder, NodeId, VariableId};

/// Random DeMorgan tree (fan-in-2 AND/OR, NOT, literals, constants) over
/// `vars` coordinates of vector 0, with roughly 2^depth nodes.
pub fn random_demorgan_formula(seed: u64, vars: usize, depth: usize) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = FormulaBuilder::new();
    let root = random_node(&mut rng, &mut b, vars, depth);
    b.finish(root, Discipline::BoundedFanIn(2)).unwrap()
}

fn random_node(
    rng: &mut ChaCha8Rng,
    b: &mut FormulaBuilder,
    vars: usize,
    depth: usize,
) -> NodeId {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.12) {
            b.constant(rng.random_bool(0.5))
        } else {
            let var = VariableId::new(0, rng.random_range(0..vars));
            b.literal(var, rng.random_bool(0.5))
        };
    }
    match rng.random_range(0..5u8) {
        0 => {
            let c = random_node(rng, b, vars, depth - 1);
            b.not(c)
        }
        1 | 2 => {
            let l = random_node(rng, b, vars, depth - 1);
            let r = random_node(rng, b, vars, depth - 1);
            b.and_node(vec![l, r])
        }
        _ => {
            let l = random_node(rng, b, vars, depth - 1);
            let r = random_node(rng, b, vars, depth - 1);
            b.or_node(vec![l, r])
        }
    }
}
