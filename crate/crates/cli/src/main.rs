mod error;
mod input;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use circxi::linear::{angle_grid, gap_grid};
use circxi::null::DEFAULT_PERMUTATIONS;
use circxi::simulation::{
    emit_curves, emit_tables, mix_seed, run_plans, table_plans, ExperimentPlan, OutputFormat,
    DEFAULT_SEED, TABLE_REPLICATES,
};
use circxi::{
    cut_scan, resolve_ties, test_exact, test_normal, test_permutation, xi_circular_directed,
    xi_population_additive, AngleUnit, CircularSample, CoefficientReport, Direction, Error,
    NoiseModel, TiesPolicy,
};

use error::CliError;
use input::{InputSpec, Loaded};

#[derive(Parser)]
#[command(
    name = "circxi",
    version,
    about = "Cyclic-rank Chatterjee coefficient for circular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the coefficient of a two-column CSV sample
    Xi {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        ties: TiesArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Xy)]
        direction: DirectionArg,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Test independence of the two columns
    Test {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        ties: TiesArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Normal)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
        permutations: usize,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Population coefficient of an additive circular noise model
    Population {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Wrapped-normal standard deviation, in radians
        #[arg(long)]
        sigma_rad: Option<f64>,
        /// Von Mises concentration
        #[arg(long)]
        kappa: Option<f64>,
        /// Uniform arc length, in turns
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Ordinary statistic over a grid of cut points
    Cutscan {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        ties: TiesArgs,
        /// Cut points per axis, or `gaps` for every pair of sample gaps
        #[arg(long, default_value = "8")]
        grid: String,
        /// Also print every grid value
        #[arg(long)]
        full: bool,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Reproduce a simulation table or run a plan file
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), required_unless_present = "plan", conflicts_with = "plan")]
        table: Option<u8>,
        /// JSON experiment plan
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Table output path; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// Long-format curve records output path
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TableFormat::Tsv)]
        format: TableFormat,
    },
}

#[derive(Args)]
struct InputArgs {
    /// CSV file, or `-` for standard input
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = UnitArg::Radians)]
    unit: UnitArg,
    /// First row holds column names
    #[arg(long)]
    header: bool,
    /// Predictor column (name with --header, or 0-based index)
    #[arg(long)]
    x_column: Option<String>,
    /// Response column (name with --header, or 0-based index)
    #[arg(long)]
    y_column: Option<String>,
}

#[derive(Args)]
struct TiesArgs {
    #[arg(long, value_enum, default_value_t = TiesArg::Reject)]
    ties: TiesArg,
    /// Jitter half-width in turns
    #[arg(long, default_value_t = TiesPolicy::DEFAULT_JITTER_SCALE)]
    jitter_scale: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Plain,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Turns,
    Radians,
    Degrees,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Xy,
    Yx,
    Sym,
}

#[derive(Clone, Copy, ValueEnum)]
enum TiesArg {
    Reject,
    Jitter,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Normal,
    Perm,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    None,
    WrappedNormal,
    VonMises,
    UniformArc,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out)
        .and_then(|()| out.flush().map_err(|e| CliError::io("<stdout>", e)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Xi {
            input,
            ties,
            direction,
            format,
        } => {
            let (sample, jittered) = prepare(&input, &ties)?;
            let direction = match direction {
                DirectionArg::Xy => Direction::XToY,
                DirectionArg::Yx => Direction::YToX,
                DirectionArg::Sym => Direction::Symmetric,
            };
            let report = CoefficientReport {
                ties_applied: jittered,
                ..xi_circular_directed(&sample, direction)?
            };
            print_xi(out, &report, format)
        }
        Command::Test {
            input,
            ties,
            method,
            permutations,
            level,
            format,
        } => {
            if !(level > 0.0 && level < 1.0) {
                return Err(CliError::Usage(format!(
                    "--level must lie in (0, 1), got {level}"
                )));
            }
            let (sample, _) = prepare(&input, &ties)?;
            let xi = xi_circular_directed(&sample, Direction::XToY)?;
            let report = match method {
                MethodArg::Normal => test_normal(&xi)?,
                MethodArg::Exact => test_exact(&xi)?,
                MethodArg::Perm => test_permutation(&sample, permutations, ties.seed)?,
            };
            let decision = if report.rejects(level) {
                "reject"
            } else {
                "fail to reject"
            };
            match format {
                Format::Json => {
                    let mut v = serde_json::to_value(report).expect("serializable");
                    v["n"] = json!(xi.n);
                    v["level"] = json!(level);
                    v["reject"] = json!(report.rejects(level));
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))
                }
                Format::Plain => {
                    let z = report.z.map_or("-".to_string(), |z| format!("{z:.6}"));
                    writeln!(
                        out,
                        "n\t{}\nmethod\t{}\nstatistic\t{:.6}\nz\t{z}\np_value\t{:.6}\nlevel\t{level}\ndecision\t{decision}",
                        xi.n,
                        serde_json::to_value(report.method).expect("serializable").as_str().unwrap_or(""),
                        report.statistic,
                        report.p_value,
                    )
                }
            }
            .map_err(|e| CliError::io("<stdout>", e))
        }
        Command::Population {
            kind,
            sigma_rad,
            kappa,
            a,
            tol,
            format,
        } => {
            let need = |v: Option<f64>, flag: &str| {
                v.ok_or_else(|| CliError::Usage(format!("this noise kind requires {flag}")))
            };
            let model = match kind {
                KindArg::None => NoiseModel::None,
                KindArg::WrappedNormal => {
                    NoiseModel::wrapped_normal_radians(need(sigma_rad, "--sigma-rad")?)
                }
                KindArg::VonMises => NoiseModel::VonMises {
                    kappa: need(kappa, "--kappa")?,
                },
                KindArg::UniformArc => NoiseModel::UniformArc {
                    length: need(a, "--a")?,
                },
            };
            let r = xi_population_additive(&model, tol)?;
            match format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(
                        &json!({ "model": model, "tol": tol, "result": r })
                    )
                    .expect("serializable")
                ),
                Format::Plain => writeln!(
                    out,
                    "value\t{:.6}\nterms_used\t{}\ntail_bound\t{:.3e}",
                    r.value, r.terms_used, r.tail_bound
                ),
            }
            .map_err(|e| CliError::io("<stdout>", e))
        }
        Command::Cutscan {
            input,
            ties,
            grid,
            full,
            format,
        } => {
            let (sample, _) = prepare(&input, &ties)?;
            let gaps = grid == "gaps";
            let cuts = if gaps {
                gap_grid(sample.len())
            } else {
                let k: usize = grid.parse().ok().filter(|&k| k >= 1).ok_or_else(|| {
                    CliError::Usage(format!(
                        "--grid must be a positive integer or 'gaps', got '{grid}'"
                    ))
                })?;
                angle_grid(k)
            };
            let scan = cut_scan(&sample, &cuts)?;
            let raw = gaps
                .then(|| xi_circular_directed(&sample, Direction::XToY))
                .transpose()?
                .map(|r| r.raw);
            match format {
                Format::Json => {
                    let mut v = json!({
                        "n": sample.len(),
                        "cuts": cuts.len(),
                        "mean": scan.mean,
                        "sd": scan.sd,
                        "min": scan.min,
                        "max": scan.max,
                    });
                    if let Some(raw) = raw {
                        v["cut_average"] = json!(scan.mean);
                        v["xi_raw"] = json!(raw);
                    }
                    if full {
                        v["grid"] = serde_json::to_value(&scan.grid).expect("serializable");
                    }
                    writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&v).expect("serializable")
                    )
                }
                Format::Plain => {
                    let mut text = format!(
                        "n\t{}\ncuts\t{}\nmean\t{:.6}\nsd\t{:.6}\nmin\t{:.6}\nmax\t{:.6}",
                        sample.len(),
                        cuts.len(),
                        scan.mean,
                        scan.sd,
                        scan.min,
                        scan.max
                    );
                    if let Some(raw) = raw {
                        text += &format!("\ncut_average\t{:.12}\nxi_raw\t{raw:.12}", scan.mean);
                    }
                    if full {
                        for (cut, v) in &scan.grid {
                            text += &format!(
                                "\n{}\t{}\t{v:.6}",
                                cut_label(cut.predictor),
                                cut_label(cut.response)
                            );
                        }
                    }
                    writeln!(out, "{text}")
                }
            }
            .map_err(|e| CliError::io("<stdout>", e))
        }
        Command::Simulate {
            table,
            plan,
            replicates,
            seed,
            out: out_path,
            curves,
            format,
        } => {
            let (label, plans, master) = match (table, plan) {
                (Some(t), _) => {
                    let reps = replicates.unwrap_or(TABLE_REPLICATES);
                    (format!("table {t}"), table_plans(t, reps, seed)?, seed)
                }
                (None, Some(path)) => {
                    let text =
                        std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                    let mut plan: ExperimentPlan =
                        serde_json::from_str(&text).map_err(|e| CliError::Parse {
                            line: e.line() as u64,
                            message: format!("{}: {e}", path.display()),
                        })?;
                    if let Some(r) = replicates {
                        plan.replicates = r;
                    }
                    let master = plan.seed;
                    (path.display().to_string(), vec![plan], master)
                }
                (None, None) => unreachable!("clap requires --table or --plan"),
            };
            let result = run_plans(&plans, master).map_err(|e| match e {
                Error::SampleTooSmall { .. }
                | Error::InvalidParameter(_)
                | Error::Domain { .. } => CliError::Usage(format!("bad plan: {e}")),
                other => other.into(),
            })?;
            let fmt = match format {
                TableFormat::Tsv => OutputFormat::Tsv,
                TableFormat::Json => OutputFormat::Json,
            };
            match &out_path {
                Some(path) => write_file(path, |w| emit_tables(&result, fmt, w))?,
                None => emit_tables(&result, fmt, out).map_err(|e| CliError::io("<stdout>", e))?,
            }
            if let Some(path) = &curves {
                write_file(path, |w| emit_curves(&result, fmt, w))?;
            }
            let summary = format!(
                "{label}: {} rows, seed {master}, {:.2} s",
                result.rows.len(),
                result.runtime.as_secs_f64()
            );
            // keep standard output clean when it carries the table
            if out_path.is_some() {
                writeln!(out, "{summary}").map_err(|e| CliError::io("<stdout>", e))
            } else {
                eprintln!("{summary}");
                Ok(())
            }
        }
    }
}

fn write_file(
    path: &PathBuf,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn cut_label(cut: circxi::Cut) -> String {
    match cut {
        circxi::Cut::Angle(t) => format!("{:.6}", t.value()),
        circxi::Cut::Gap(g) => format!("gap{g}"),
    }
}

/// Loads the input and applies the ties policy; reports whether jitter moved anything.
fn prepare(input: &InputArgs, ties: &TiesArgs) -> Result<(CircularSample, bool), CliError> {
    let spec = InputSpec {
        path: input.input.clone(),
        unit: match input.unit {
            UnitArg::Turns => AngleUnit::Turns,
            UnitArg::Radians => AngleUnit::Radians,
            UnitArg::Degrees => AngleUnit::Degrees,
        },
        header: input.header,
        x_column: input.x_column.clone(),
        y_column: input.y_column.clone(),
    };
    let Loaded { sample, lines } = input::load(&spec)?;
    let had_ties = sample.has_ties();
    let policy = match ties.ties {
        TiesArg::Reject => TiesPolicy::reject(),
        TiesArg::Jitter => {
            TiesPolicy::jitter(mix_seed(ties.seed, 0x7E5, 0)).with_scale(ties.jitter_scale)
        }
    };
    match resolve_ties(&sample, &policy) {
        Ok(s) => Ok((s, had_ties)),
        Err(Error::TiesPresent { axis, indices }) => {
            let rows: Vec<String> = indices.iter().map(|&i| lines[i].to_string()).collect();
            Err(CliError::Ties {
                message: format!(
                    "tied {axis} values on input lines {}; rerun with --ties jitter to break them",
                    rows.join(", ")
                ),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn print_xi(
    out: &mut impl Write,
    report: &CoefficientReport,
    format: Format,
) -> Result<(), CliError> {
    let direction = serde_json::to_value(report.direction).expect("serializable");
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(report).expect("serializable")
        ),
        Format::Plain => {
            let corrected = report
                .corrected
                .map_or("-".to_string(), |c| format!("{c:.6}"));
            writeln!(
                out,
                "n\t{}\ndirection\t{}\nraw\t{:.6}\ncorrected\t{corrected}\nties\t{}",
                report.n,
                direction.as_str().unwrap_or(""),
                report.raw,
                if report.ties_applied {
                    "jittered"
                } else {
                    "none"
                }
            )
        }
    }
    .map_err(|e| CliError::io("<stdout>", e))
}
