use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};

use mdsp::bench::{bench_compare, generate_random_basis, instance_seed, BenchConfig, BenchReport};
use mdsp::cvp::{cvp_to_mdsp, mdsp_to_cvp, recover_mdsp_distance_sq, solve_cvp_bruteforce, CvpGramInstance};
use mdsp::exact::{solve_exact_with, ExactOptions};
use mdsp::heuristic::{run_heuristic, HeuristicConfig};
use mdsp::io::{format_blocks, format_matrix, parse_basis_file, parse_blocks};
use mdsp::lattice::{certificate_bounds, verify_dmdsp_certificate, DmdspQuery};
use mdsp::lll::{accelerated_reduce, lll_reduce, AccelConfig, AccelStatus, LllParams};
use mdsp::rational::{format_rational, parse_rational, ratio};
use mdsp::{Error, LatticeBasis, MdspInstance, QMatrix, QVector, Rational, ShiftVector};

#[derive(Parser)]
#[command(name = "mdsp", version, about = "Maximal distance sub-lattice tools over exact rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input file (stdin when omitted)
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output file for the resulting matrix or report
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Row of the input that is the fixed vector v
    #[arg(long, global = true, default_value_t = 0, value_name = "K")]
    fixed_index: usize,
    /// LLL parameter
    #[arg(long, global = true, value_name = "P/Q")]
    delta: Option<String>,
    /// Distance ratio for certificate checks
    #[arg(long, global = true, value_name = "P/Q")]
    gamma: Option<String>,
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    seed: u64,
    /// Comma-separated dimensions
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, global = true, value_name = "N")]
    count: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    max_passes: Option<usize>,
    /// Entry bound for generated bases
    #[arg(long, global = true, default_value_t = 1000, value_name = "N")]
    bound: u64,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal shifts by certified enumeration
    MdspExact,
    /// Greedy coordinate improvement
    MdspHeur,
    /// MDSP basis to Gram-form CVP (gram, offset, scale blocks)
    ToCvp,
    /// CVP basis rows and target (two blocks) to an MDSP basis
    FromCvp,
    /// Exact CVP by enumeration; reads Gram form (3 blocks) or basis and target (2 blocks)
    CvpBrute,
    /// LLL reduction
    Lll,
    /// LLL interleaved with MDSP sweeps until LLL(0.99)'s shortest length is reached
    Accel,
    /// Check a shift-vector certificate (basis block, then a 1×n shift block)
    VerifyCert,
    /// Time LLL(0.99) against the accelerated reduction on random bases
    Bench,
    /// Emit seeded random bases
    Gen,
}

fn read_input(cli: &Cli) -> Result<String, String> {
    match &cli.input {
        Some(p) => fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::read_to_string(std::io::stdin()).map_err(|e| format!("stdin: {e}")),
    }
}

fn write_out(cli: &Cli, text: &str) -> Result<(), String> {
    if let Some(p) = &cli.out {
        fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

/// Writes to stdout; a closed pipe is not an error.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(cli: &Cli, value: Value, text: String) {
    if cli.json {
        say(&(serde_json::to_string_pretty(&value).expect("serializable") + "\n"));
    } else {
        say(&text);
    }
}

fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn ints(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

fn join_ints(xs: &[BigInt]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn matrix_json(m: &QMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array((0..m.cols()).map(|c| rat(m.get(r, c))).collect()))
            .collect(),
    )
}

fn rows_of(vs: &[QVector]) -> Result<QMatrix, Error> {
    QMatrix::from_rows(vs)
}

fn parse_param(s: &Option<String>, default: Rational) -> Result<Rational, Error> {
    s.as_deref().map_or(Ok(default), parse_rational)
}

fn instance(cli: &Cli, m: &QMatrix) -> Result<MdspInstance, Error> {
    MdspInstance::from_rows(m, cli.fixed_index)
}

/// `v` followed by the given vectors, one per row.
fn with_fixed(inst: &MdspInstance, rest: &[QVector]) -> Result<QMatrix, Error> {
    let mut vs = vec![inst.fixed().clone()];
    vs.extend(rest.iter().cloned());
    rows_of(&vs)
}

fn run(cli: &Cli) -> Result<(), String> {
    let e = |err: Error| err.to_string();
    match cli.command {
        Command::MdspExact => {
            let inst = instance(cli, &parse_basis_file(&read_input(cli)?).map_err(e)?).map_err(e)?;
            let opts = ExactOptions {
                parallel: true,
                ..Default::default()
            };
            let sol = solve_exact_with(&inst, &opts).map_err(e)?;
            let basis = with_fixed(&inst, &sol.basis).map_err(e)?;
            write_out(cli, &format_matrix(&basis))?;
            emit(
                cli,
                json!({"x": ints(&sol.x.0), "dist_sq": rat(&sol.dist_sq), "basis": matrix_json(&basis)}),
                format!(
                    "x: {}\ndist_sq: {}\n{}",
                    join_ints(&sol.x.0),
                    format_rational(&sol.dist_sq),
                    format_matrix(&basis)
                ),
            );
        }
        Command::MdspHeur => {
            let inst = instance(cli, &parse_basis_file(&read_input(cli)?).map_err(e)?).map_err(e)?;
            let cfg = HeuristicConfig::new(cli.max_passes.unwrap_or(HeuristicConfig::default().max_passes)).map_err(e)?;
            let out = run_heuristic(&inst, &cfg).map_err(e)?;
            let basis = with_fixed(&out.instance, out.instance.rest()).map_err(e)?;
            write_out(cli, &format_matrix(&basis))?;
            emit(
                cli,
                json!({
                    "x": ints(&out.x_total.0),
                    "dist_sq": rat(&out.dist_sq),
                    "converged": out.converged,
                    "passes": out.passes_used,
                    "basis": matrix_json(&basis),
                }),
                format!(
                    "x: {}\ndist_sq: {}\nconverged: {}\npasses: {}\n{}",
                    join_ints(&out.x_total.0),
                    format_rational(&out.dist_sq),
                    out.converged,
                    out.passes_used,
                    format_matrix(&basis)
                ),
            );
        }
        Command::ToCvp => {
            let inst = instance(cli, &parse_basis_file(&read_input(cli)?).map_err(e)?).map_err(e)?;
            let c = mdsp_to_cvp(&inst).map_err(e)?;
            let blocks = cvp_blocks(&c).map_err(e)?;
            write_out(cli, &format_blocks(&blocks))?;
            emit(
                cli,
                json!({
                    "gram": matrix_json(&c.gram),
                    "offset": c.offset.iter().map(rat).collect::<Vec<_>>(),
                    "scale_sq": rat(&c.scale_sq),
                }),
                format_blocks(&blocks),
            );
        }
        Command::FromCvp => {
            let (l, t) = lattice_and_target(&parse_blocks(&read_input(cli)?).map_err(e)?)?;
            let inst = cvp_to_mdsp(&l, &t).map_err(e)?;
            let basis = with_fixed(&inst, inst.rest()).map_err(e)?;
            write_out(cli, &format_matrix(&basis))?;
            emit(cli, json!({"basis": matrix_json(&basis)}), format_matrix(&basis));
        }
        Command::CvpBrute => {
            let blocks = parse_blocks(&read_input(cli)?).map_err(e)?;
            let (c, from_mdsp) = match blocks.len() {
                3 => {
                    let offset = single_row(&blocks[1])?;
                    let scale = single_row(&blocks[2])?;
                    if scale.dim() != 1 {
                        return Err("scale block must be 1x1".into());
                    }
                    (CvpGramInstance::new(blocks[0].clone(), offset, scale[0].clone()).map_err(e)?, true)
                }
                2 => {
                    let (l, t) = lattice_and_target(&blocks)?;
                    (CvpGramInstance::from_lattice(&l, &t).map_err(e)?, false)
                }
                k => return Err(format!("expected 2 or 3 blocks, found {k}")),
            };
            let sol = solve_cvp_bruteforce(&c).map_err(e)?;
            let mut value = json!({"j": ints(&sol.j), "objective": rat(&sol.objective)});
            let mut text = format!("j: {}\nobjective: {}\n", join_ints(&sol.j), format_rational(&sol.objective));
            if from_mdsp {
                let d = recover_mdsp_distance_sq(&c, &sol.j);
                value["dist_sq"] = rat(&d);
                text.push_str(&format!("dist_sq: {}\n", format_rational(&d)));
            }
            emit(cli, value, text);
        }
        Command::Lll => {
            let basis = LatticeBasis::from_rows(&parse_basis_file(&read_input(cli)?).map_err(e)?).map_err(e)?;
            let params = LllParams::new(parse_param(&cli.delta, ratio(3, 4)).map_err(e)?).map_err(e)?;
            let (out, trace) = lll_reduce(&basis, &params).map_err(e)?;
            let m = out.row_matrix();
            write_out(cli, &format_matrix(&m))?;
            emit(
                cli,
                json!({
                    "basis": matrix_json(&m),
                    "swaps": trace.swap_count,
                    "size_reductions": trace.size_reduction_count,
                    "shortest_norm_sq": rat(&trace.final_shortest_norm_sq),
                    "time_ms": trace.wall_time.as_secs_f64() * 1000.0,
                }),
                format!(
                    "swaps: {}\nsize_reductions: {}\nshortest_norm_sq: {}\n{}",
                    trace.swap_count,
                    trace.size_reduction_count,
                    format_rational(&trace.final_shortest_norm_sq),
                    format_matrix(&m)
                ),
            );
        }
        Command::Accel => {
            let basis = LatticeBasis::from_rows(&parse_basis_file(&read_input(cli)?).map_err(e)?).map_err(e)?;
            let (_, high) = lll_reduce(&basis, &LllParams::new(ratio(99, 100)).map_err(e)?).map_err(e)?;
            let params = LllParams::new(parse_param(&cli.delta, ratio(1, 4)).map_err(e)?).map_err(e)?;
            let mut cfg = AccelConfig::new(params, high.final_shortest_norm_sq.clone()).map_err(e)?;
            if let Some(p) = cli.max_passes {
                cfg.heuristic_passes = p;
            }
            let out = accelerated_reduce(&basis, &cfg).map_err(e)?;
            let m = out.basis.row_matrix();
            let reached = out.status == AccelStatus::Reached;
            write_out(cli, &format_matrix(&m))?;
            let t = &out.trace;
            emit(
                cli,
                json!({
                    "basis": matrix_json(&m),
                    "reached": reached,
                    "target_norm_sq": rat(&cfg.target_norm_sq),
                    "achieved_norm_sq": rat(&t.final_shortest_norm_sq),
                    "rounds": t.rounds,
                    "swaps": t.swap_count,
                    "heuristic_updates": t.heuristic_updates,
                    "t_high_ms": high.wall_time.as_secs_f64() * 1000.0,
                    "t_low_ms": t.wall_time.as_secs_f64() * 1000.0,
                    "lll_phase_ms": t.lll_time.as_secs_f64() * 1000.0,
                    "heuristic_phase_ms": t.heuristic_time.as_secs_f64() * 1000.0,
                }),
                format!(
                    "reached: {reached}\ntarget_norm_sq: {}\nachieved_norm_sq: {}\nrounds: {}\n{}",
                    format_rational(&cfg.target_norm_sq),
                    format_rational(&t.final_shortest_norm_sq),
                    t.rounds,
                    format_matrix(&m)
                ),
            );
        }
        Command::VerifyCert => {
            let blocks = parse_blocks(&read_input(cli)?).map_err(e)?;
            if blocks.len() != 2 {
                return Err(format!("expected a basis block and a shift block, found {} blocks", blocks.len()));
            }
            let inst = instance(cli, &blocks[0]).map_err(e)?;
            let x = single_row(&blocks[1])?;
            if !x.is_integral() {
                return Err("shift entries must be integers".into());
            }
            let x = ShiftVector(x.iter().map(|r| r.to_integer()).collect());
            let gamma = cli.gamma.as_deref().ok_or("--gamma is required")?;
            let q = DmdspQuery::new(inst.clone(), parse_rational(gamma).map_err(e)?).map_err(e)?;
            let ok = verify_dmdsp_certificate(&q, &x).map_err(e)?;
            let b = certificate_bounds(&inst);
            emit(
                cli,
                json!({
                    "accepted": ok,
                    "d_within_bound": b.d_within_bound(),
                    "e_within_bound": b.e_within_bound(),
                    "input_bits": b.input_bit_size,
                }),
                format!("{}\n", if ok { "accepted" } else { "rejected" }),
            );
            if !ok {
                return Err(String::new());
            }
        }
        Command::Bench => {
            let mut cfg = BenchConfig::new(cli.dims.clone().unwrap_or_else(|| vec![20]), cli.count.unwrap_or(20), cli.seed);
            cfg.delta_low = parse_param(&cli.delta, ratio(1, 4)).map_err(e)?;
            cfg.entry_bound = cli.bound;
            if let Some(p) = cli.max_passes {
                cfg.heuristic_passes = p;
            }
            let report = bench_compare(&cfg).map_err(e)?;
            let json = serde_json::to_string_pretty(&report).expect("serializable");
            write_out(cli, &json)?;
            emit(cli, serde_json::to_value(&report).expect("serializable"), bench_table(&report));
        }
        Command::Gen => {
            let mut text = String::new();
            for &dim in cli.dims.as_deref().unwrap_or(&[20]) {
                for i in 0..cli.count.unwrap_or(1) {
                    let s = instance_seed(cli.seed, dim, i);
                    let m = generate_random_basis(dim, cli.bound, s).map_err(e)?;
                    text.push_str(&format!("# dim {dim} instance {i} seed {s}\n"));
                    text.push_str(&format_matrix(&m));
                }
            }
            if cli.out.is_some() {
                write_out(cli, &text)?;
            } else {
                say(&text);
            }
        }
    }
    Ok(())
}

fn single_row(m: &QMatrix) -> Result<QVector, String> {
    if m.rows() != 1 {
        return Err(format!("expected a single row, found {} rows", m.rows()));
    }
    Ok(m.row(0))
}

fn lattice_and_target(blocks: &[QMatrix]) -> Result<(QMatrix, QVector), String> {
    if blocks.len() != 2 {
        return Err(format!("expected a basis block and a target block, found {} blocks", blocks.len()));
    }
    Ok((blocks[0].clone(), single_row(&blocks[1])?))
}

fn cvp_blocks(c: &CvpGramInstance) -> Result<Vec<QMatrix>, Error> {
    Ok(vec![
        c.gram.clone(),
        QMatrix::from_rows(std::slice::from_ref(&c.offset))?,
        QMatrix::from_rows(&[QVector::new(vec![c.scale_sq.clone()])])?,
    ])
}

fn bench_table(r: &BenchReport) -> String {
    let mut s = format!("seed {} count {}\n", r.seed, r.count);
    s.push_str("dim  t_high_ms  t_low_ms  speedup  median  reached  exhausted\n");
    for row in &r.rows {
        s.push_str(&format!(
            "{:<4} {:>10.3} {:>9.3} {:>8.3} {:>7.3} {:>8} {:>10}\n",
            row.dim, row.t_high_ms, row.t_low_ms, row.speedup, row.median_speedup, row.reached, row.exhausted
        ));
    }
    s
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::FAILURE
        }
    }
}
