//! Command-line driver: builds OV constructions, samples OV(p) instances,
//! compiles formulas to branching programs, applies restrictions and the
//! hard-function encoding, runs reductions and Monte Carlo experiments.
//!
//! Machine-readable artifacts go to files; stdout carries a human summary.
//! Every command is deterministic given its flags (Monte Carlo CSVs excepted
//! in their runtime_ns column, which records wall-clock time).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ovkit::avgcase::{
    build_avgcase_formula, build_best_formula, classify_regime, monte_carlo, sample_instance,
    AvgCaseParams,
};
use ovkit::bp::BranchingProgram;
use ovkit::formula::Formula;
use ovkit::formula_text::{parse_formula, serialize_formula};
use ovkit::ov::{
    build_enumeration_formula, build_pairwise_formula, build_symmetric_depth3, OvInstance,
};
use ovkit::reductions::{
    reduce_to_hamming_nn, reduce_to_partial_match, reduce_to_subset_query,
};
use ovkit::simplify::lower_fanin2;
use ovkit::transforms::{
    compile_formula_to_bp, encode_hard_function, middle_layer_evaluator, restrict_formula,
    OvObject, PartialFunctionSpec, Restriction,
};

#[derive(Parser)]
#[command(name = "ovkit", version, about = "Orthogonal Vectors constructions toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Pairwise,
    Enumeration,
    Sym3,
    Avgcase,
    Best,
}

#[derive(Clone, Copy, ValueEnum)]
enum BpFormat {
    Bp,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Pm,
    Subset,
    Hamming,
}

/// Either a formula file or a branching program file.
#[derive(Args)]
struct ObjectArgs {
    /// Formula file to operate on
    #[arg(long, conflicts_with = "bp")]
    formula: Option<PathBuf>,
    /// Branching program file to operate on
    #[arg(long, required_unless_present = "formula")]
    bp: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an OV(p) instance to a file
    Gen {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        /// RNG seed; sampling commands require one for reproducibility
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build one of the OV constructions and write it as a formula file
    Build {
        #[arg(long, value_enum)]
        construction: Construction,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Bit probability, needed by avgcase/best
        #[arg(long)]
        p: Option<f64>,
        /// Analysis slack, needed by avgcase/best
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a formula or branching program on an instance
    Eval {
        #[command(flatten)]
        object: ObjectArgs,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Lower a formula to fan-in 2 and compile it to a branching program
    Compile {
        #[arg(long)]
        formula: PathBuf,
        /// Vector count of the program header; inferred from the formula if absent
        #[arg(long)]
        n: Option<usize>,
        /// Dimension of the program header; inferred from the formula if absent
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum, default_value = "bp")]
        format: BpFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a restriction to a formula or branching program
    Restrict {
        #[command(flatten)]
        object: ObjectArgs,
        #[arg(long)]
        restriction: PathBuf,
        /// Vector count of the restriction grid; required with --formula
        #[arg(long)]
        n: Option<usize>,
        /// Dimension of the restriction grid; required with --formula
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum, default_value = "bp")]
        format: BpFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a middle-layer partial function into an OV restriction
    EncodeHardfn {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restrict an OV object by a hard-function encoding and print the
    /// induced middle-layer truth table
    MiddleEval {
        #[command(flatten)]
        object: ObjectArgs,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        /// Free-vector override; defaults to the least-read vector
        #[arg(long)]
        i_star: Option<usize>,
    },
    /// Reduce an OV instance to a batch search problem
    Reduce {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run Monte Carlo trials of the average-case solver
    Montecarlo {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Search small enumerated formulas for an unachieved middle-layer
    /// assignment
    DemoHardfn {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        max_size: usize,
        /// Write the found spec to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print size metrics of a formula or branching program
    Sizes {
        #[command(flatten)]
        object: ObjectArgs,
    },
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn read_formula(path: &Path) -> Result<Formula> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading formula {}", path.display()))?;
    parse_formula(&text).with_context(|| format!("parsing formula {}", path.display()))
}

fn read_bp(path: &Path) -> Result<BranchingProgram> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading program {}", path.display()))?;
    BranchingProgram::parse(&text)
        .with_context(|| format!("parsing program {}", path.display()))
}

fn read_instance(path: &Path) -> Result<OvInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    OvInstance::parse(&text).with_context(|| format!("parsing instance {}", path.display()))
}

fn read_spec(path: &Path) -> Result<PartialFunctionSpec> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    PartialFunctionSpec::parse(&text)
        .with_context(|| format!("parsing spec {}", path.display()))
}

fn write_bp(bp: &BranchingProgram, format: BpFormat, out: &Path) -> Result<()> {
    let text = match format {
        BpFormat::Bp => bp.serialize(),
        BpFormat::Dot => bp.to_dot(),
    };
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { p, n, d, eps, seed, out } => {
            let params = AvgCaseParams::new(p, n, d, eps, seed)?;
            let inst = sample_instance(&params);
            fs::write(&out, inst.serialize())
                .with_context(|| format!("writing {}", out.display()))?;
            let report = classify_regime(&params)?;
            println!(
                "sampled {n} x {d} instance (p = {p}, seed = {seed}) -> {}",
                out.display()
            );
            println!("regime: {} (d* = {:.3})", report.regime, report.d_star);
        }
        Command::Build { construction, n, d, p, eps, out } => {
            let need_avg = || -> Result<AvgCaseParams> {
                let p = p.ok_or_else(|| anyhow!("--p is required for this construction"))?;
                let eps =
                    eps.ok_or_else(|| anyhow!("--eps is required for this construction"))?;
                Ok(AvgCaseParams::new(p, n, d, eps, 0)?)
            };
            let (formula, label) = match construction {
                Construction::Pairwise => (build_pairwise_formula(n, d)?, "pairwise".into()),
                Construction::Enumeration => {
                    (build_enumeration_formula(n, d)?, "enumeration".into())
                }
                Construction::Sym3 => (build_symmetric_depth3(n, d)?, "sym3".into()),
                Construction::Avgcase => {
                    (build_avgcase_formula(&need_avg()?)?, "avgcase (one-sided)".into())
                }
                Construction::Best => {
                    let (f, mode) = build_best_formula(&need_avg()?)?;
                    (f, format!("best ({mode})"))
                }
            };
            fs::write(&out, serialize_formula(&formula))
                .with_context(|| format!("writing {}", out.display()))?;
            let m = formula.size_metrics();
            println!("built {label} formula for n = {n}, d = {d} -> {}", out.display());
            println!(
                "size: {} nodes, {} leaves ({} literals), {} gates, {} wires, depth {}",
                m.size(),
                m.leaf_count,
                m.literal_leaf_count,
                m.gate_count,
                m.wire_count,
                m.depth
            );
        }
        Command::Eval { object, instance } => {
            let inst = read_instance(&instance)?;
            let value = match (&object.formula, &object.bp) {
                (Some(path), _) => read_formula(path)?.eval(&inst)?,
                (_, Some(path)) => read_bp(path)?.eval(&inst)?,
                _ => unreachable!("clap enforces one of --formula/--bp"),
            };
            println!("{}", u8::from(value));
        }
        Command::Compile { formula, n, d, format, out } => {
            let f = read_formula(&formula)?;
            let (min_n, min_d) = f.min_dims();
            let n = n.unwrap_or(min_n);
            let d = d.unwrap_or(min_d.max(1));
            let lowered = lower_fanin2(&f)?;
            let bp = compile_formula_to_bp(&lowered, n, d)?;
            write_bp(&bp, format, &out)?;
            let size = bp.size();
            println!(
                "compiled to branching program: {} nodes ({} internal) -> {}",
                size.total_nodes,
                size.internal_nodes,
                out.display()
            );
        }
        Command::Restrict { object, restriction, n, d, format, out } => {
            match (&object.formula, &object.bp) {
                (Some(path), _) => {
                    let f = read_formula(path)?;
                    let n = n.ok_or_else(|| anyhow!("--n is required with --formula"))?;
                    let d = d.ok_or_else(|| anyhow!("--d is required with --formula"))?;
                    let text = fs::read_to_string(&restriction)
                        .with_context(|| format!("reading {}", restriction.display()))?;
                    let r = Restriction::parse(&text, n, d)?;
                    let restricted = restrict_formula(&f, &r);
                    fs::write(&out, serialize_formula(&restricted))
                        .with_context(|| format!("writing {}", out.display()))?;
                    let m = restricted.size_metrics();
                    println!(
                        "restricted formula: {} nodes, {} literal leaves -> {}",
                        m.size(),
                        m.literal_leaf_count,
                        out.display()
                    );
                }
                (_, Some(path)) => {
                    let bp = read_bp(path)?;
                    let text = fs::read_to_string(&restriction)
                        .with_context(|| format!("reading {}", restriction.display()))?;
                    let r = Restriction::parse(&text, bp.n(), bp.d())?;
                    let restricted = bp.restrict(&r)?;
                    write_bp(&restricted, format, &out)?;
                    let size = restricted.size();
                    println!(
                        "restricted program: {} nodes ({} internal) -> {}",
                        size.total_nodes,
                        size.internal_nodes,
                        out.display()
                    );
                }
                _ => unreachable!(),
            }
        }
        Command::EncodeHardfn { spec, n, out } => {
            let spec = read_spec(&spec)?;
            let r = encode_hard_function(&spec, n)?;
            fs::write(&out, r.serialize())
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "encoded {} middle-layer pairs into a restriction over {n} vectors (vector {} free) -> {}",
                spec.pairs().len(),
                n - 1,
                out.display()
            );
            if spec.has_complementary_one_pair() {
                println!(
                    "note: spec maps two complementary strings to 1; every completion of this restriction is a yes instance"
                );
            }
        }
        Command::MiddleEval { object, spec, n, i_star } => {
            let spec = read_spec(&spec)?;
            let table = match (&object.formula, &object.bp) {
                (Some(path), _) => {
                    let f = read_formula(path)?;
                    middle_layer_evaluator(OvObject::Formula(&f), &spec, n, i_star)?
                }
                (_, Some(path)) => {
                    let bp = read_bp(path)?;
                    middle_layer_evaluator(OvObject::Program(&bp), &spec, n, i_star)?
                }
                _ => unreachable!(),
            };
            for (x, y) in &table.rows {
                let bits: String = x.iter().map(|b| if *b { '1' } else { '0' }).collect();
                println!("{bits} {}", u8::from(*y));
            }
            let reproduced = table.reproduces(&spec);
            println!(
                "table {} the spec on all {} middle-layer points",
                if reproduced { "reproduces" } else { "does NOT reproduce" },
                table.rows.len()
            );
        }
        Command::Reduce { target, instance, out } => {
            let inst = read_instance(&instance)?;
            let (text, label) = match target {
                Target::Pm => (reduce_to_partial_match(&inst).serialize(), "partial match"),
                Target::Subset => (reduce_to_subset_query(&inst).serialize(), "subset query"),
                Target::Hamming => {
                    (reduce_to_hamming_nn(&inst).serialize(), "hamming nearest neighbors")
                }
            };
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            println!("reduced to {label} -> {}", out.display());
        }
        Command::Montecarlo { p, n, d, eps, trials, seed, csv } => {
            let params = AvgCaseParams::new(p, n, d, eps, seed)?;
            let stats = monte_carlo(&params, trials)?;
            fs::write(&csv, stats.to_csv())
                .with_context(|| format!("writing {}", csv.display()))?;
            print!("{}", stats.summary());
            println!("csv -> {}", csv.display());
        }
        Command::DemoHardfn { d, max_size, out } => {
            use ovkit::counting::{
                enumerate_formulas, find_hard_middle_assignment, verify_hard_assignment,
                EnumBasis,
            };
            let count =
                enumerate_formulas(d, max_size, EnumBasis::DeMorganWithConstants)?.len();
            println!("enumerated {count} formulas of size <= {max_size} on {d} variables");
            match find_hard_middle_assignment(d, max_size)? {
                None => println!("every middle-layer assignment is achieved; none is hard"),
                Some(spec) => {
                    let verified = verify_hard_assignment(&spec, max_size)?;
                    println!(
                        "hard middle-layer assignment found ({} pairs); verification: {}",
                        spec.pairs().len(),
                        if verified { "no enumerated formula achieves it" } else { "FAILED" }
                    );
                    for (x, y) in spec.pairs() {
                        let bits: String =
                            x.iter().map(|b| if *b { '1' } else { '0' }).collect();
                        println!("  {bits} -> {}", u8::from(*y));
                    }
                    if let Some(out) = out {
                        fs::write(&out, spec.serialize())
                            .with_context(|| format!("writing {}", out.display()))?;
                        println!("spec -> {}", out.display());
                    }
                }
            }
        }
        Command::Sizes { object } => match (&object.formula, &object.bp) {
            (Some(path), _) => {
                let f = read_formula(path)?;
                let m = f.size_metrics();
                println!("discipline:     {}", f.discipline());
                println!("nodes:          {}", m.size());
                println!("leaves:         {} ({} literals)", m.leaf_count, m.literal_leaf_count);
                println!("gates:          {}", m.gate_count);
                println!("wires:          {}", m.wire_count);
                println!("input wires:    {}", m.input_wire_count);
                println!("depth:          {}", m.depth);
            }
            (_, Some(path)) => {
                let bp = read_bp(path)?;
                let size = bp.size();
                println!("grid:           {} x {}", bp.n(), bp.d());
                println!("total nodes:    {}", size.total_nodes);
                println!("internal nodes: {}", size.internal_nodes);
            }
            _ => unreachable!(),
        },
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn subcommand_names_match_surface() {
        let cmd = Cli::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        for expected in [
            "gen",
            "build",
            "eval",
            "compile",
            "restrict",
            "encode-hardfn",
            "middle-eval",
            "reduce",
            "montecarlo",
            "demo-hardfn",
            "sizes",
        ] {
            assert!(names.contains(&expected), "missing subcommand {expected}");
        }
    }
}
