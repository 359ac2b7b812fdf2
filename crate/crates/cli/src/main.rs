//! `qsd`: reproducible experiments over Quickselect comparison counts and
//! their Dickman approximation.
//!
//! Every command is keyed by `--seed`; machine-readable outputs carry the
//! substream paths needed to re-derive any single estimate. Exit codes:
//! 0 success, 2 invariant violation, 3 usage error.

mod output;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num::ToPrimitive;

use quickselect_dickman::dickman::{depth_for_accuracy, sample_dickman, DickmanParams};
use quickselect_dickman::exact::{exact_pmf_with_limit, expected_count, HarmonicTable};
use quickselect_dickman::lemmas::{
    extremal_averaged_tail, extremal_weighted, floor_commutation_check, RecurrenceKind,
    RecurrenceSpec,
};
use quickselect_dickman::quickselect::{sample_count_recursion, select_count_array};
use quickselect_dickman::report::{
    run_bounds_sweep, run_consistency_suite, BoundsConfig, ExperimentManifest, SuiteOptions,
};
use quickselect_dickman::rng::RandomStream;

use output::{json_f64, json_string, json_u64_list};

const EXIT_VIOLATION: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qsd",
    version,
    about = "Quickselect comparison counts, exact distributions, Dickman sampling, and distance bounds"
)]
struct Cli {
    /// Root seed for all randomness in the run.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output format for machine-readable commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for sweeps (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Shrink horizons and sample counts.
    #[arg(long, global = true)]
    quick: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Engine {
    Array,
    Recursion,
}

#[derive(Subcommand)]
enum Command {
    /// Sample comparison counts of Quickselect.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Engine::Recursion)]
        engine: Engine,
        /// Emit a count histogram instead of one count per row.
        #[arg(long)]
        histogram: bool,
    },
    /// Exact expected comparison count from the closed form.
    ExactMean {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Exact distribution of the comparison count.
    ExactPmf {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Size cap for the exact table.
        #[arg(long, default_value_t = 200)]
        n_max: usize,
    },
    /// Sample the generalized Dickman distribution to a target accuracy.
    DickmanSample {
        #[arg(long)]
        theta: f64,
        /// Guaranteed d1 accuracy of the iterated sampler.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long)]
        samples: usize,
    },
    /// Estimate the coupling gap E|W* - W| and the implied d1 upper bound.
    Coupling {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        samples: usize,
    },
    /// Sweep (n, m) cells and compare bounds against the empirical distance.
    Bounds {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Accuracy target for the reference sampler; also added to the CI.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Deterministic verification of the analytic lemmas.
    VerifyLemmas {
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
    },
    /// Run every desk-scale consistency invariant.
    Suite {
        /// Fault-injection hook used by tests.
        #[arg(long, hide = true)]
        corrupt_harmonic: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Simulate {
            n,
            m,
            samples,
            engine,
            histogram,
        } => simulate(&cli, n, m, samples, engine, histogram),
        Command::ExactMean { n, m } => exact_mean(&cli, n, m),
        Command::ExactPmf { n, m, n_max } => exact_pmf_cmd(&cli, n, m, n_max),
        Command::DickmanSample {
            theta,
            eps,
            samples,
        } => dickman_sample(&cli, theta, eps, samples),
        Command::Coupling { n, m, samples } => coupling(&cli, n, m, samples),
        Command::Bounds {
            ref n_list,
            ref m_list,
            samples,
            eps,
        } => bounds(&cli, n_list.clone(), m_list.clone(), samples, eps),
        Command::VerifyLemmas { horizon, trials } => verify_lemmas(&cli, horizon, trials),
        Command::Suite { corrupt_harmonic } => suite(&cli, corrupt_harmonic),
    }
}

fn manifest_json(manifest: &ExperimentManifest) -> String {
    let flags = manifest
        .flags
        .iter()
        .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
        .collect::<Vec<_>>()
        .join(",");
    let paths = manifest
        .paths
        .iter()
        .map(|(role, path)| format!("{}:{}", json_string(role), json_u64_list(path)))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{{\"command\":{},\"seed\":{},\"version\":{},\"unix_time\":{},\"flags\":{{{}}},\"paths\":{{{}}}}}",
        json_string(&manifest.command),
        manifest.seed,
        json_string(&manifest.version),
        manifest.unix_time,
        flags,
        paths
    )
}

fn simulate(
    cli: &Cli,
    n: usize,
    m: usize,
    samples: usize,
    engine: Engine,
    histogram: bool,
) -> anyhow::Result<u8> {
    let mut stream = RandomStream::new(cli.seed);
    let data: Vec<f64> = if engine == Engine::Array {
        (1..=n).map(|i| i as f64).collect()
    } else {
        Vec::new()
    };
    let mut counts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let c = match engine {
            Engine::Array => select_count_array(&data, m, &mut stream)?.comparisons,
            Engine::Recursion => sample_count_recursion(n, m, &mut stream)?,
        };
        counts.push(c);
    }

    let engine_name = match engine {
        Engine::Array => "array",
        Engine::Recursion => "recursion",
    };
    match cli.format {
        Format::Csv => {
            if histogram {
                println!("count,occurrences");
                for (c, occ) in histogram_of(&counts) {
                    println!("{c},{occ}");
                }
            } else {
                println!("count");
                for c in &counts {
                    println!("{c}");
                }
            }
        }
        Format::Json => {
            let manifest = ExperimentManifest::new("simulate", cli.seed)
                .flag("n", n)
                .flag("m", m)
                .flag("samples", samples)
                .flag("engine", engine_name)
                .path("counts", &[]);
            let body = if histogram {
                let rows: Vec<String> = histogram_of(&counts)
                    .into_iter()
                    .map(|(c, occ)| format!("{{\"count\":{c},\"occurrences\":{occ}}}"))
                    .collect();
                format!("\"histogram\":[{}]", rows.join(","))
            } else {
                let vals: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
                format!("\"counts\":[{}]", vals.join(","))
            };
            println!(
                "{{\"manifest\":{},\"n\":{n},\"m\":{m},\"engine\":{},{}}}",
                manifest_json(&manifest),
                json_string(engine_name),
                body
            );
        }
    }
    Ok(0)
}

fn histogram_of(counts: &[u64]) -> Vec<(u64, u64)> {
    let mut map: BTreeMap<u64, u64> = BTreeMap::new();
    for &c in counts {
        *map.entry(c).or_insert(0) += 1;
    }
    map.into_iter().collect()
}

/// Exact harmonic numbers get expensive past a few tens of thousands of
/// terms; refuse rather than hang.
const EXACT_MEAN_N_CAP: usize = 20_000;

fn exact_mean(cli: &Cli, n: usize, m: usize) -> anyhow::Result<u8> {
    if n > EXACT_MEAN_N_CAP {
        anyhow::bail!(
            "exact-mean supports n <= {EXACT_MEAN_N_CAP}; exact harmonic numbers grow \
             super-linearly beyond that"
        );
    }
    let mut table = HarmonicTable::new();
    let mean = expected_count(&mut table, n, m)?;
    let decimal = mean.to_f64().unwrap();
    match cli.format {
        Format::Csv => {
            println!("n,m,mean_exact,mean");
            println!("{n},{m},{mean},{decimal}");
        }
        Format::Json => {
            println!(
                "{{\"n\":{n},\"m\":{m},\"mean_exact\":{},\"mean\":{}}}",
                json_string(&mean.to_string()),
                json_f64(decimal)
            );
        }
    }
    Ok(0)
}

fn exact_pmf_cmd(cli: &Cli, n: usize, m: usize, n_max: usize) -> anyhow::Result<u8> {
    let pmf = exact_pmf_with_limit(n, m, n_max)?;
    match cli.format {
        Format::Csv => {
            println!("count,probability,probability_exact");
            for (c, p) in pmf.atoms() {
                println!("{c},{},{p}", p.to_f64().unwrap());
            }
        }
        Format::Json => {
            let rows: Vec<String> = pmf
                .atoms()
                .map(|(c, p)| {
                    format!(
                        "{{\"count\":{c},\"probability\":{},\"probability_exact\":{}}}",
                        json_f64(p.to_f64().unwrap()),
                        json_string(&p.to_string())
                    )
                })
                .collect();
            println!("{{\"n\":{n},\"m\":{m},\"atoms\":[{}]}}", rows.join(","));
        }
    }
    Ok(0)
}

fn dickman_sample(cli: &Cli, theta: f64, eps: f64, samples: usize) -> anyhow::Result<u8> {
    let depth = depth_for_accuracy(theta, eps)?;
    let params = DickmanParams::new(theta, depth)?;
    let mut stream = RandomStream::new(cli.seed);
    let values: Vec<f64> = (0..samples)
        .map(|_| sample_dickman(&params, &mut stream))
        .collect();
    match cli.format {
        Format::Csv => {
            println!("value");
            for v in &values {
                println!("{v}");
            }
        }
        Format::Json => {
            let manifest = ExperimentManifest::new("dickman-sample", cli.seed)
                .flag("theta", theta)
                .flag("eps", eps)
                .flag("samples", samples)
                .path("values", &[]);
            let vals: Vec<String> = values.iter().map(|&v| json_f64(v)).collect();
            println!(
                "{{\"manifest\":{},\"theta\":{},\"eps\":{},\"depth\":{depth},\"values\":[{}]}}",
                manifest_json(&manifest),
                json_f64(theta),
                json_f64(eps),
                vals.join(",")
            );
        }
    }
    Ok(0)
}

fn coupling(cli: &Cli, n: usize, m: usize, samples: usize) -> anyhow::Result<u8> {
    let root = RandomStream::new(cli.seed);
    let est = quickselect_dickman::coupling::estimate_coupling_gap(n, m, samples, &root)?;
    match cli.format {
        Format::Csv => {
            println!("n,m,samples,gap_estimate,ci,d1_upper_estimate");
            println!(
                "{n},{m},{samples},{},{},{}",
                est.gap, est.ci3, est.d1_upper
            );
        }
        Format::Json => {
            let manifest = ExperimentManifest::new("coupling", cli.seed)
                .flag("n", n)
                .flag("m", m)
                .flag("samples", samples)
                .path("pairs", &[]);
            println!(
                "{{\"manifest\":{},\"n\":{n},\"m\":{m},\"samples\":{samples},\
                 \"gap_estimate\":{},\"ci\":{},\"d1_upper_estimate\":{}}}",
                manifest_json(&manifest),
                json_f64(est.gap),
                json_f64(est.ci3),
                json_f64(est.d1_upper)
            );
        }
    }
    Ok(0)
}

fn bounds(
    cli: &Cli,
    n_list: Vec<usize>,
    m_list: Vec<usize>,
    samples: usize,
    eps: f64,
) -> anyhow::Result<u8> {
    let mut cfg = BoundsConfig::new(n_list, m_list, samples, cli.seed);
    cfg.depth = depth_for_accuracy(1.0, eps)?;
    cfg.sampler_bias = eps;
    cfg.threads = cli.threads;
    let rows = run_bounds_sweep(&cfg);

    let mut violation = false;
    match cli.format {
        Format::Csv => {
            println!("n,m,lower_raw,lower,mean_gap_lower,d1_hat,ci,coupling_upper,theorem_upper");
            for row in &rows {
                match row {
                    Ok(r) => {
                        if !r.sandwich_holds() {
                            violation = true;
                        }
                        println!(
                            "{},{},{},{},{},{},{},{},{}",
                            r.n,
                            r.m,
                            r.lower_raw,
                            r.lower,
                            r.mean_gap_lower,
                            r.d1_hat,
                            r.ci,
                            r.coupling_upper,
                            r.theorem_upper
                        );
                    }
                    Err(cell) => {
                        eprintln!("skipped n={} m={}: {}", cell.n, cell.m, cell.reason);
                    }
                }
            }
        }
        Format::Json => {
            let manifest = ExperimentManifest::new("bounds", cli.seed)
                .flag("samples", samples)
                .flag("eps", eps);
            let mut row_strs = Vec::new();
            let mut err_strs = Vec::new();
            for row in &rows {
                match row {
                    Ok(r) => {
                        if !r.sandwich_holds() {
                            violation = true;
                        }
                        row_strs.push(format!(
                            "{{\"n\":{},\"m\":{},\"lower_raw\":{},\"lower\":{},\
                             \"mean_gap_lower\":{},\"d1_hat\":{},\"ci\":{},\
                             \"coupling_upper\":{},\"theorem_upper\":{},\"path\":{}}}",
                            r.n,
                            r.m,
                            json_f64(r.lower_raw),
                            json_f64(r.lower),
                            json_f64(r.mean_gap_lower),
                            json_f64(r.d1_hat),
                            json_f64(r.ci),
                            json_f64(r.coupling_upper),
                            json_f64(r.theorem_upper),
                            json_u64_list(&r.path)
                        ));
                    }
                    Err(cell) => err_strs.push(format!(
                        "{{\"n\":{},\"m\":{},\"reason\":{}}}",
                        cell.n,
                        cell.m,
                        json_string(&cell.reason)
                    )),
                }
            }
            println!(
                "{{\"manifest\":{},\"rows\":[{}],\"errors\":[{}]}}",
                manifest_json(&manifest),
                row_strs.join(","),
                err_strs.join(",")
            );
        }
    }
    Ok(if violation { EXIT_VIOLATION } else { 0 })
}

fn verify_lemmas(cli: &Cli, horizon: usize, trials: usize) -> anyhow::Result<u8> {
    struct LemmaLine {
        name: &'static str,
        instance: String,
        passed: bool,
        detail: String,
    }
    let mut lines = Vec::new();

    for (c, q) in [(4.0, 2usize), (1.0, 1)] {
        let check = extremal_averaged_tail(&RecurrenceSpec {
            kind: RecurrenceKind::AveragedTail { q },
            c,
            horizon,
        })?;
        lines.push(LemmaLine {
            name: "averaged_tail_log_bound",
            instance: format!("c={c} q={q} horizon={horizon}"),
            passed: check.first_violation.is_none(),
            detail: format!("min_slack={:.6e}", check.min_slack),
        });
    }
    for c in [1.0, 25.0] {
        let check = extremal_weighted(&RecurrenceSpec {
            kind: RecurrenceKind::WeightedK,
            c,
            horizon,
        })?;
        lines.push(LemmaLine {
            name: "weighted_two_c_bound",
            instance: format!("c={c} horizon={horizon}"),
            passed: check.first_violation.is_none(),
            detail: format!("min_slack={:.6e}", check.min_slack),
        });
    }

    let mut stream = RandomStream::new(cli.seed);
    let mut worst_gap = 0u64;
    for _ in 0..trials {
        let u1 = stream.next_uniform();
        let u2 = stream.next_uniform();
        let n = stream.next_u64() % 1_000_001;
        worst_gap = worst_gap.max(floor_commutation_check(u1, u2, n));
    }
    lines.push(LemmaLine {
        name: "floor_commutation_random",
        instance: format!("trials={trials}"),
        passed: worst_gap <= 1,
        detail: format!("worst_gap={worst_gap}"),
    });

    let grid_n = if cli.quick { 50 } else { 500 };
    let mut grid_worst = 0u64;
    for n in 1..=grid_n as u64 {
        for k2 in 0..997u64 {
            let t2 = n * k2 / 997;
            for k1 in 0..997u64 {
                let t1 = n * k1 / 997;
                grid_worst = grid_worst.max((k1 * t2 / 997).abs_diff(k2 * t1 / 997));
            }
        }
    }
    lines.push(LemmaLine {
        name: "floor_commutation_grid",
        instance: format!("den=997 n<={grid_n}"),
        passed: grid_worst <= 1,
        detail: format!("worst_gap={grid_worst}"),
    });

    let all_pass = lines.iter().all(|l| l.passed);
    match cli.format {
        Format::Csv => {
            println!("lemma,instance,status,detail");
            for l in &lines {
                println!(
                    "{},{},{},{}",
                    l.name,
                    l.instance,
                    if l.passed { "pass" } else { "fail" },
                    l.detail
                );
            }
        }
        Format::Json => {
            let rows: Vec<String> = lines
                .iter()
                .map(|l| {
                    format!(
                        "{{\"lemma\":{},\"instance\":{},\"passed\":{},\"detail\":{}}}",
                        json_string(l.name),
                        json_string(&l.instance),
                        l.passed,
                        json_string(&l.detail)
                    )
                })
                .collect();
            println!(
                "{{\"seed\":{},\"passed\":{all_pass},\"lemmas\":[{}]}}",
                cli.seed,
                rows.join(",")
            );
        }
    }
    Ok(if all_pass { 0 } else { EXIT_VIOLATION })
}

fn suite(cli: &Cli, corrupt_harmonic: bool) -> anyhow::Result<u8> {
    let report = run_consistency_suite(&SuiteOptions {
        seed: cli.seed,
        quick: cli.quick,
        corrupt_harmonic,
    });
    match cli.format {
        Format::Csv => {
            println!("check,status,detail");
            for c in &report.checks {
                println!(
                    "{},{},{}",
                    c.name,
                    if c.passed { "pass" } else { "fail" },
                    c.detail.replace(',', ";")
                );
            }
        }
        Format::Json => {
            let rows: Vec<String> = report
                .checks
                .iter()
                .map(|c| {
                    format!(
                        "{{\"name\":{},\"passed\":{},\"detail\":{}}}",
                        json_string(c.name),
                        c.passed,
                        json_string(&c.detail)
                    )
                })
                .collect();
            println!(
                "{{\"seed\":{},\"quick\":{},\"passed\":{},\"checks\":[{}]}}",
                cli.seed,
                cli.quick,
                report.passed(),
                rows.join(",")
            );
        }
    }
    if report.passed() {
        Ok(0)
    } else {
        for c in report.failures() {
            eprintln!("failed invariant: {} ({})", c.name, c.detail);
        }
        Ok(EXIT_VIOLATION)
    }
}

