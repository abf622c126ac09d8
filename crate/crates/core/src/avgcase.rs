//! Average-case OV(p): sampling, the phase-transition regime classifier,
//! light-vector analysis, the grouped one-sided formula, and the Monte Carlo
//! harness.
//!
//! In the OV(p) model every bit is an independent Bernoulli(p). The problem is
//! nontrivial only for dimensions near the critical value
//! `d* = 2 log2(n) / log2(1/(1-p^2))`; far below that almost every instance
//! has an orthogonal pair, far above almost none does. Inside the window the
//! grouped construction answers correctly on almost all instances and never
//! reports an orthogonal pair that does not exist.

use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{
    Discipline, Formula, FormulaBuilder, NodeId, SizePrediction, VariableId,
};
use crate::ov::{
    brute_force_ov, build_enumeration_formula, predicted_enumeration_metrics, OvInstance,
    Shape,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvgCaseParams {
    pub p: f64,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub seed: u64,
}

impl AvgCaseParams {
    pub fn new(p: f64, n: usize, d: usize, eps: f64, seed: u64) -> Result<Self> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::parameter(format!("p = {p} must lie in (0, 1)")));
        }
        if n < 2 {
            return Err(Error::parameter("n must be at least 2"));
        }
        if d < 1 {
            return Err(Error::parameter("d must be at least 1"));
        }
        if !(0.0 < eps && eps < p.min(1.0 - p)) {
            return Err(Error::parameter(format!(
                "eps = {eps} must lie in (0, min(p, 1-p)) = (0, {})",
                p.min(1.0 - p)
            )));
        }
        Ok(AvgCaseParams { p, n, d, eps, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    AlmostSurelyYes,
    Hard,
    AlmostSurelyNo,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::AlmostSurelyYes => write!(f, "almost_surely_yes"),
            Regime::Hard => write!(f, "hard"),
            Regime::AlmostSurelyNo => write!(f, "almost_surely_no"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub d_star: f64,
    pub regime: Regime,
    pub light_threshold: usize,
    pub alpha: f64,
    pub group_count: usize,
}

/// `d* = 2 log2(n) / log2(1/(1-p^2))`, the dimension at which a random pair
/// is orthogonal with probability exactly 1/n^2.
pub fn critical_dimension(p: f64, n: usize) -> f64 {
    2.0 * (n as f64).log2() / (1.0 / (1.0 - p * p)).log2()
}

/// Exact Chernoff exponent at the actual (n, d): with delta = p/(p+1) + eps/p,
/// alpha = delta^2 p d / (2 ln n), so that n * exp(-delta^2 p d / 2) equals
/// n^(1 - alpha). Errors when delta >= 1, where the tail bound is vacuous.
pub fn alpha(p: f64, eps: f64, n: usize, d: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::parameter("alpha needs n >= 2"));
    }
    let delta = p / (p + 1.0) + eps / p;
    if delta >= 1.0 {
        return Err(Error::parameter(format!(
            "delta = p/(p+1) + eps/p = {delta} must be below 1"
        )));
    }
    Ok(delta * delta * p * (d as f64) / (2.0 * (n as f64).ln()))
}

/// A vector is light when it has at most `(p/(1+p) + eps) d` ones.
pub fn light_threshold(p: f64, d: usize, eps: f64) -> usize {
    ((p / (1.0 + p) + eps) * d as f64).floor() as usize
}

pub fn is_light(bits: &[bool], threshold: usize) -> bool {
    bits.iter().filter(|b| **b).count() <= threshold
}

/// Places d against the window `d* +- eps log2(n)`: below it almost every
/// instance has an orthogonal pair (the first moment of the pair count is
/// large), above it almost none does.
pub fn classify_regime(params: &AvgCaseParams) -> Result<RegimeReport> {
    let AvgCaseParams { p, n, d, eps, .. } = *params;
    let d_star = critical_dimension(p, n);
    let half_window = eps * (n as f64).log2();
    let d_real = d as f64;
    let regime = if d_real < d_star - half_window {
        Regime::AlmostSurelyYes
    } else if d_real > d_star + half_window {
        Regime::AlmostSurelyNo
    } else {
        Regime::Hard
    };
    let alpha = alpha(p, eps, n, d)?;
    let group_count =
        ((n as f64).powf(1.0 - alpha * (1.0 - eps)).round() as usize).clamp(1, n);
    Ok(RegimeReport {
        d_star,
        regime,
        light_threshold: light_threshold(p, d, eps),
        alpha,
        group_count,
    })
}

/// The size exponent of the better of the two constructions, at d = d*(p, n):
/// min(1 + 2/log2(1/(1-p^2)), 2 - alpha (1 - eps)). Independent of n because
/// alpha at the critical dimension is delta^2 p / (L ln 2).
pub fn exponent_function(p: f64, eps: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) || !(0.0 < eps && eps < p.min(1.0 - p)) {
        return Err(Error::parameter("exponent function needs 0 < eps < min(p, 1-p)"));
    }
    let big_l = (1.0 / (1.0 - p * p)).log2();
    let enumeration = 1.0 + 2.0 / big_l;
    let delta = p / (p + 1.0) + eps / p;
    if delta >= 1.0 {
        return Err(Error::parameter("delta >= 1, grouped branch undefined"));
    }
    let alpha_star = delta * delta * p / (big_l * std::f64::consts::LN_2);
    let grouped = 2.0 - alpha_star * (1.0 - eps);
    Ok(enumeration.min(grouped))
}

/// How a `[popcount <= threshold]` formula is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightStyle {
    /// One SYM gate of d wires.
    Sym,
    /// Divide-and-conquer DeMorgan expansion, size d^O(log d).
    DeMorgan,
}

/// Formula over the d coordinates of vector 0 computing
/// `[popcount <= threshold]`.
pub fn build_light_formula(d: usize, threshold: usize, style: LightStyle) -> Result<Formula> {
    if d == 0 {
        return Err(Error::parameter("light formula needs d >= 1"));
    }
    if threshold > d {
        return Err(Error::parameter(format!("threshold {threshold} out of range 0..={d}")));
    }
    let mut b = FormulaBuilder::new();
    let (root, discipline) = match style {
        LightStyle::Sym => (light_sym(&mut b, 0, d, threshold), Discipline::SymmetricGate),
        LightStyle::DeMorgan => {
            let coords: Vec<usize> = (0..d).collect();
            (light_demorgan(&mut b, 0, &coords, threshold), Discipline::UnboundedAc0)
        }
    };
    b.finish(root, discipline)
}

/// SYM-gate Light over the coordinates of `vector`; constant-folds the
/// threshold >= d case.
fn light_sym(b: &mut FormulaBuilder, vector: usize, d: usize, threshold: usize) -> NodeId {
    if threshold >= d {
        return b.constant(true);
    }
    let vv: Vec<bool> = (0..=d).map(|t| t <= threshold).collect();
    let kids: Vec<NodeId> = (0..d).map(|k| b.leaf(VariableId::new(vector, k))).collect();
    b.sym(vv, kids)
}

/// DeMorgan Light: popcount(coords) <= t via a balanced split, with an OR over
/// the ways to divide the budget between the halves.
fn light_demorgan(b: &mut FormulaBuilder, vector: usize, coords: &[usize], t: usize) -> NodeId {
    if t >= coords.len() {
        return b.constant(true);
    }
    if coords.len() == 1 {
        // t == 0 here.
        return b.literal(VariableId::new(vector, coords[0]), true);
    }
    let (left, right) = coords.split_at(coords.len() / 2);
    let lo = t.saturating_sub(right.len());
    let hi = t.min(left.len());
    let mut alts = Vec::new();
    for a in lo..=hi {
        let l = light_demorgan(b, vector, left, a);
        let r = light_demorgan(b, vector, right, t - a);
        alts.push(b.and_of(vec![l, r]));
    }
    b.or_of(alts)
}

fn group_ranges(n: usize, groups: usize) -> Vec<std::ops::Range<usize>> {
    let q = n / groups;
    let r = n % groups;
    let mut out = Vec::with_capacity(groups);
    let mut at = 0;
    for i in 0..groups {
        let len = if i < r { q + 1 } else { q };
        out.push(at..at + len);
        at += len;
    }
    out
}

fn require_hard(params: &AvgCaseParams) -> Result<RegimeReport> {
    let report = classify_regime(params)?;
    if report.regime != Regime::Hard {
        return Err(Error::NotHardRegime { regime: report.regime.to_string() });
    }
    Ok(report)
}

/// The grouped one-sided formula: an OR over all group pairs (i, j) of
/// AND(some light vector in G_i, some light vector in G_j, NOR over k of
/// (OR of light-masked bits k in G_i AND the same in G_j)).
///
/// The two guard conjuncts keep the formula one-sided when a group has no
/// light vector at all; without them an empty group would present an all-zero
/// mask and the block would fire vacuously.
///
/// The miss rate is only small inside the hard regime, hence the gate; the
/// one-sided property itself holds at any parameters.
pub fn build_avgcase_formula(params: &AvgCaseParams) -> Result<Formula> {
    let report = require_hard(params)?;
    Ok(build_grouped_formula(params, &report))
}

pub(crate) fn build_grouped_formula(params: &AvgCaseParams, report: &RegimeReport) -> Formula {
    let (n, d) = (params.n, params.d);
    let thr = report.light_threshold;
    let ranges = group_ranges(n, report.group_count);
    let mut b = FormulaBuilder::new();
    let mut nor_vv = vec![false; d + 1];
    nor_vv[0] = true;
    let mut blocks = Vec::new();
    for i in 0..ranges.len() {
        for j in i + 1..ranges.len() {
            let guard_i = group_guard(&mut b, ranges[i].clone(), d, thr);
            let guard_j = group_guard(&mut b, ranges[j].clone(), d, thr);
            let coords: Vec<NodeId> = (0..d)
                .map(|k| {
                    let side_i = group_side(&mut b, ranges[i].clone(), d, thr, k);
                    let side_j = group_side(&mut b, ranges[j].clone(), d, thr, k);
                    b.and_of(vec![side_i, side_j])
                })
                .collect();
            let nor = b.sym(nor_vv.clone(), coords);
            blocks.push(b.and_of(vec![guard_i, guard_j, nor]));
        }
    }
    let root = b.or_of(blocks);
    b.finish(root, Discipline::SymmetricGate)
        .expect("grouped construction is structurally valid")
}

fn group_guard(
    b: &mut FormulaBuilder,
    group: std::ops::Range<usize>,
    d: usize,
    thr: usize,
) -> NodeId {
    let alts: Vec<NodeId> = group.map(|u| light_sym(b, u, d, thr)).collect();
    b.or_of(alts)
}

fn group_side(
    b: &mut FormulaBuilder,
    group: std::ops::Range<usize>,
    d: usize,
    thr: usize,
    k: usize,
) -> NodeId {
    let alts: Vec<NodeId> = group
        .map(|u| {
            let light = light_sym(b, u, d, thr);
            let bit = b.leaf(VariableId::new(u, k));
            b.and_of(vec![light, bit])
        })
        .collect();
    b.or_of(alts)
}

/// Predicted metrics of the grouped construction at the given parameters,
/// mirroring [`build_avgcase_formula`]'s shape without materializing it.
/// Computable in every regime; size comparison does not need the hard gate.
pub fn predicted_avgcase_metrics(params: &AvgCaseParams) -> Result<SizePrediction> {
    let report = classify_regime(params)?;
    let (n, d) = (params.n, params.d);
    let g = report.group_count;
    let q = n / g;
    let r = n % g;
    let (big, small, big_len, small_len) =
        if r == 0 { (g, 0, q, q) } else { (r, g - r, q + 1, q) };

    let light = Shape::gate_always(Shape::literal(), d as u128);
    let inner = Shape::gate_over(&[light, Shape::literal()]);
    let block = |si: usize, sj: usize| -> Shape {
        let guard_i = Shape::gate_over_copies(light, si as u128);
        let guard_j = Shape::gate_over_copies(light, sj as u128);
        let coord = Shape::gate_over(&[
            Shape::gate_over_copies(inner, si as u128),
            Shape::gate_over_copies(inner, sj as u128),
        ]);
        let nor = Shape::gate_always(coord, d as u128);
        Shape::gate_over(&[guard_i, guard_j, nor])
    };
    let pairs_bb = crate::ov::binomial(big as u64, 2);
    let pairs_bs = big as u128 * small as u128;
    let pairs_ss = crate::ov::binomial(small as u64, 2);
    if pairs_bb + pairs_bs + pairs_ss == 0 {
        return Ok(Shape::constant().into_prediction());
    }
    let weighted = [
        (block(big_len, big_len), pairs_bb),
        (block(big_len, small_len), pairs_bs),
        (block(small_len, small_len), pairs_ss),
    ];
    Ok(crate::ov::or_of_weighted(&weighted).into_prediction())
}

/// Computes the same function as [`build_avgcase_formula`] directly: per
/// group, the OR of the light vectors' bits; a pair of groups fires when both
/// guards hold and the two masks are disjoint. Output 1 implies the instance
/// really has an orthogonal pair.
pub fn run_avgcase_direct(inst: &OvInstance, params: &AvgCaseParams) -> Result<bool> {
    let report = require_hard(params)?;
    run_grouped_direct(inst, params, &report)
}

pub(crate) fn run_grouped_direct(
    inst: &OvInstance,
    params: &AvgCaseParams,
    report: &RegimeReport,
) -> Result<bool> {
    if inst.n() != params.n || inst.d() != params.d {
        return Err(Error::parameter("instance dimensions do not match params"));
    }
    let thr = report.light_threshold;
    let ranges = group_ranges(params.n, report.group_count);
    let packed = inst.packed_rows();
    let words = params.d.div_ceil(64);
    let mut guards = Vec::with_capacity(ranges.len());
    let mut masks = Vec::with_capacity(ranges.len());
    for range in &ranges {
        let mut guard = false;
        let mut mask = vec![0u64; words];
        for u in range.clone() {
            if is_light(inst.row(u), thr) {
                guard = true;
                for (m, w) in mask.iter_mut().zip(&packed[u]) {
                    *m |= w;
                }
            }
        }
        guards.push(guard);
        masks.push(mask);
    }
    for i in 0..ranges.len() {
        if !guards[i] {
            continue;
        }
        for j in i + 1..ranges.len() {
            if guards[j] && masks[i].iter().zip(&masks[j]).all(|(a, b)| a & b == 0) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Correctness mode of a chosen construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectnessMode {
    /// Right on every instance.
    Exact,
    /// Output 1 implies an orthogonal pair; may miss pairs.
    OneSided,
}

impl fmt::Display for CorrectnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrectnessMode::Exact => write!(f, "exact"),
            CorrectnessMode::OneSided => write!(f, "one-sided"),
        }
    }
}

/// Compares the enumeration construction against the grouped construction by
/// predicted wire count and reports the winner without materializing either.
/// The grouped construction stays one-sided at any parameters, so the
/// comparison is regime-free; only its miss-rate guarantee needs the hard
/// window.
pub fn best_formula_choice(
    params: &AvgCaseParams,
) -> Result<(CorrectnessMode, SizePrediction)> {
    let enumeration = predicted_enumeration_metrics(params.n, params.d)?;
    let grouped = predicted_avgcase_metrics(params)?;
    if grouped.wire_count < enumeration.wire_count {
        Ok((CorrectnessMode::OneSided, grouped))
    } else {
        Ok((CorrectnessMode::Exact, enumeration))
    }
}

/// Materializes whichever construction [`best_formula_choice`] picks.
pub fn build_best_formula(params: &AvgCaseParams) -> Result<(Formula, CorrectnessMode)> {
    let (mode, _) = best_formula_choice(params)?;
    let f = match mode {
        CorrectnessMode::Exact => build_enumeration_formula(params.n, params.d)?,
        CorrectnessMode::OneSided => {
            build_grouped_formula(params, &classify_regime(params)?)
        }
    };
    Ok((f, mode))
}

/// SplitMix64 finalizer; the per-trial seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for trial `t`; independent of execution order.
pub fn subseed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ trial.wrapping_mul(0xA24BAED4963EE407))
}

/// n x d matrix of independent Bernoulli(p) bits from a ChaCha8 stream.
pub fn sample_instance_seeded(p: f64, n: usize, d: usize, seed: u64) -> OvInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = OvInstance::new(n, d);
    for i in 0..n {
        for k in 0..d {
            inst.set(i, k, rng.random_bool(p));
        }
    }
    inst
}

pub fn sample_instance(params: &AvgCaseParams) -> OvInstance {
    sample_instance_seeded(params.p, params.n, params.d, params.seed)
}

#[derive(Debug, Clone, Copy)]
pub struct TrialRecord {
    pub trial: u64,
    pub subseed: u64,
    pub oracle: bool,
    pub solver: bool,
    pub n_light: usize,
    pub runtime_ns: u128,
}

#[derive(Debug, Clone)]
pub struct MonteCarloStats {
    pub params: AvgCaseParams,
    pub report: RegimeReport,
    pub records: Vec<TrialRecord>,
}

impl MonteCarloStats {
    pub fn trials(&self) -> usize {
        self.records.len()
    }

    pub fn yes_rate(&self) -> f64 {
        self.records.iter().filter(|r| r.oracle).count() as f64 / self.trials() as f64
    }

    /// Solver said 1 on a no-instance; must stay zero.
    pub fn false_positives(&self) -> usize {
        self.records.iter().filter(|r| r.solver && !r.oracle).count()
    }

    /// Fraction of yes-instances the solver missed.
    pub fn false_negative_rate(&self) -> f64 {
        let yes = self.records.iter().filter(|r| r.oracle).count();
        if yes == 0 {
            return 0.0;
        }
        self.records.iter().filter(|r| r.oracle && !r.solver).count() as f64 / yes as f64
    }

    pub fn mean_light(&self) -> f64 {
        self.records.iter().map(|r| r.n_light as f64).sum::<f64>() / self.trials() as f64
    }

    /// The expected-light bound n^(1-alpha).
    pub fn light_bound(&self) -> f64 {
        (self.params.n as f64).powf(1.0 - self.report.alpha)
    }

    /// CSV with one row per trial. All columns except runtime_ns are
    /// deterministic given (params, trials).
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("trial,subseed,n,d,p,eps,regime,oracle,solver,n_light,runtime_ns\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.trial,
                r.subseed,
                self.params.n,
                self.params.d,
                self.params.p,
                self.params.eps,
                self.report.regime,
                u8::from(r.oracle),
                u8::from(r.solver),
                r.n_light,
                r.runtime_ns
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "trials:               {}", self.trials());
        let _ = writeln!(out, "regime:               {}", self.report.regime);
        let _ = writeln!(out, "critical dimension:   {:.3}", self.report.d_star);
        let _ = writeln!(out, "light threshold:      {}", self.report.light_threshold);
        let _ = writeln!(out, "alpha:                {:.4}", self.report.alpha);
        let _ = writeln!(out, "group count:          {}", self.report.group_count);
        let _ = writeln!(out, "yes rate:             {:.4}", self.yes_rate());
        let _ = writeln!(out, "false positives:      {}", self.false_positives());
        let _ = writeln!(out, "false negative rate:  {:.4}", self.false_negative_rate());
        let _ = writeln!(out, "mean light count:     {:.3}", self.mean_light());
        let _ = writeln!(out, "light bound n^(1-a):  {:.3}", self.light_bound());
        out
    }
}

/// Runs `trials` independent trials. Each samples an instance from the
/// sub-seeded stream, records the oracle answer and the solver answer: the
/// grouped solver inside the hard regime, the constant regime answer outside
/// it.
pub fn monte_carlo(params: &AvgCaseParams, trials: u64) -> Result<MonteCarloStats> {
    if trials == 0 {
        return Err(Error::parameter("trials must be at least 1"));
    }
    let report = classify_regime(params)?;
    let mut records = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let sd = subseed(params.seed, t);
        let inst = sample_instance_seeded(params.p, params.n, params.d, sd);
        let oracle = brute_force_ov(&inst)?;
        let started = Instant::now();
        let solver = match report.regime {
            Regime::Hard => run_avgcase_direct(&inst, params)?,
            Regime::AlmostSurelyYes => true,
            Regime::AlmostSurelyNo => false,
        };
        let runtime_ns = started.elapsed().as_nanos();
        let n_light = (0..params.n)
            .filter(|i| is_light(inst.row(*i), report.light_threshold))
            .count();
        records.push(TrialRecord { trial: t, subseed: sd, oracle, solver, n_light, runtime_ns });
    }
    Ok(MonteCarloStats { params: *params, report, records })
}

/// Samples instances until at least `min_pairs` orthogonal pairs are seen and
/// returns the popcount of every member of every orthogonal pair found.
/// Deterministic given `seed`.
pub fn orthogonal_pair_weights(
    p: f64,
    n: usize,
    d: usize,
    seed: u64,
    min_pairs: usize,
    max_instances: usize,
) -> Result<Vec<usize>> {
    let mut weights = Vec::new();
    let mut pairs = 0usize;
    for t in 0..max_instances as u64 {
        let inst = sample_instance_seeded(p, n, d, subseed(seed, t));
        let packed = inst.packed_rows();
        for i in 0..n {
            for j in i + 1..n {
                if packed[i].iter().zip(&packed[j]).all(|(a, b)| a & b == 0) {
                    weights.push(inst.popcount(i));
                    weights.push(inst.popcount(j));
                    pairs += 1;
                }
            }
        }
        if pairs >= min_pairs {
            return Ok(weights);
        }
    }
    Err(Error::parameter(format!(
        "collected only {pairs} orthogonal pairs in {max_instances} instances"
    )))
}
