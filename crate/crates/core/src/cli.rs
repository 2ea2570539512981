//! Command-line front end: `grover`, `shor`, `sweep`, `fit` and `state`.
//!
//! Every output file starts with `#` header lines (tool version, the
//! command line, run parameters) and is written atomically. Numeric fields
//! use six decimals, so identical invocations produce identical bytes.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, FitThresholds, GroverFamily, GroverSelector, ShorSelector};
use crate::error::{Error, Result};
use crate::grover::{self, GroverInstance};
use crate::refstates::{build_reference, ReferenceState};
use crate::shor::{self, ShorInstance, ShorTrace};
use crate::trace::{StepTrace, TraceOptions};
use crate::vcm::{self, AdditiveOperator, DEFAULT_DEGENERACY_RTOL};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MACROENT_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "macroent", version, about = "Macroscopic entanglement (VCM e_max) traces of Grover and Shor")]
pub struct Cli {
    /// Output directory (default: $MACROENT_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Step-resolved Grover search trace.
    Grover(GroverArgs),
    /// Step-resolved Shor order-finding trace.
    Shor(ShorArgs),
    /// e_max of selected states over a range of sizes.
    Sweep(SweepArgs),
    /// Linear and log-log fits of a points file.
    Fit(FitArgs),
    /// e_max of a reference state.
    State(StateArgs),
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    /// Index register size.
    #[arg(long = "L")]
    pub l: usize,
    /// Solution label; repeat for several.
    #[arg(long = "solution")]
    pub solutions: Vec<usize>,
    /// Number of random solutions when none are given.
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    /// Seed for random solutions (default: the reference solution for L).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use every multiple of 8 as a solution.
    #[arg(long, conflicts_with_all = ["solutions", "seed"])]
    pub multiples_of_eight: bool,
    /// Analyse every stride-th step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Trace file (default: <out-dir>/grover_L<L>.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShorArgs {
    /// Integer to factor.
    #[arg(long = "N")]
    pub n: u64,
    /// Base co-prime to N.
    #[arg(long = "x")]
    pub x: u64,
    /// Measure R2 after the modular exponentiation and follow every outcome.
    #[arg(long)]
    pub measure: bool,
    /// Measure R2 and follow one outcome drawn with this seed.
    #[arg(long, conflicts_with = "measure")]
    pub sample: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Also write the VCM and top operators of ψ_ME.
    #[arg(long)]
    pub dump_operators: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Grover,
    Shor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// M solutions (reference solution for M = 1 without a seed).
    Solutions,
    /// Every multiple of 8.
    Eight,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    /// Sizes: L for Grover, L_tot for Shor (default 8,10,12,14 or 15,18,21).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Grover: R/2,R/3,R/4,0,R,max. Shor: ME,midDFT,final.
    #[arg(long, value_delimiter = ',')]
    pub selectors: Vec<String>,
    /// Order of the Shor instances.
    #[arg(long, default_value_t = 6)]
    pub r: u64,
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Family::Solutions)]
    pub family: Family,
    /// Run the Grover gate circuit instead of the closed-form states.
    #[arg(long)]
    pub simulate: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Points file written by `sweep`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub min_slope: f64,
    #[arg(long, default_value_t = 0.98)]
    pub min_r_squared: f64,
    #[arg(long, default_value_t = 0.5)]
    pub max_flat_range: f64,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// cat, W, dws, product or basis.
    #[arg(long)]
    pub kind: String,
    #[arg(long = "L")]
    pub l: usize,
    /// Basis label for `--kind basis`.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Write the VCM as CSV to this file.
    #[arg(long)]
    pub dump_vcm: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &command_line, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("macroent: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Validation(_) | Error::ImpossibleOutcome { .. } => EXIT_USAGE,
        Error::Numerical { .. } | Error::Consistency(_) => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_FAILURE,
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes through a temporary sibling file and renames into place.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn with_command(trace: &mut StepTrace, command_line: &str) {
    trace.metadata.insert(0, ("command".into(), command_line.into()));
}

pub fn run(cli: &Cli, command_line: &str, out: &mut dyn Write) -> Result<()> {
    let dir = out_dir(cli);
    match &cli.command {
        Command::Grover(a) => cmd_grover(a, &dir, command_line, out),
        Command::Shor(a) => cmd_shor(a, &dir, command_line, out),
        Command::Sweep(a) => cmd_sweep(a, &dir, command_line, out),
        Command::Fit(a) => cmd_fit(a, &dir, command_line, out),
        Command::State(a) => cmd_state(a, &dir, out),
    }
}

fn cmd_grover(a: &GroverArgs, dir: &Path, command_line: &str, out: &mut dyn Write) -> Result<()> {
    let instance = if a.multiples_of_eight {
        grover::multiples_of_eight_instance(a.l)?
    } else if !a.solutions.is_empty() {
        GroverInstance::new(a.l, a.solutions.clone())?
    } else if let Some(seed) = a.seed {
        GroverInstance::random(a.l, a.m, seed)?
    } else if a.m == 1 {
        GroverInstance::reference(a.l)?
    } else {
        GroverInstance::random(a.l, a.m, a.l as u64)?
    };
    let opts = TraceOptions::with_stride(a.stride);
    let p = instance.params();
    log::info!("grover L={} M={} R={} Q={}", a.l, instance.m(), p.iterations, p.total_steps(a.l));
    let mut trace = grover::run_grover(&instance, &opts)?;
    with_command(&mut trace, command_line);
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| dir.join(format!("grover_L{}.csv", a.l)));
    write_atomic(&path, |buf| trace.write_csv(buf))?;
    let series = trace.e_max_series();
    let peak = series.iter().cloned().fold((0, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
    writeln!(out, "wrote {}", path.display())?;
    writeln!(out, "steps={} analysed={} peak_e_max={:.6} at step {}", trace.total_steps(), series.len(), peak.1, peak.0)?;
    if let Some(&(step, e)) = series.last() {
        writeln!(out, "final_e_max={e:.6} at step {step}")?;
    }
    Ok(())
}

fn cmd_shor(a: &ShorArgs, dir: &Path, command_line: &str, out: &mut dyn Write) -> Result<()> {
    let instance = ShorInstance::new(a.n, a.x)?;
    log::info!(
        "shor N={} x={} r={} L={} L'={} Q={}",
        a.n,
        a.x,
        instance.order(),
        instance.first_register(),
        instance.second_register(),
        instance.total_steps()
    );
    let opts = TraceOptions::with_stride(a.stride);
    let stem = format!("shor_N{}_x{}", a.n, a.x);
    let mut written = Vec::new();
    if let Some(seed) = a.sample {
        let mut b = shor::run_shor_sampled(&instance, seed, &opts)?;
        with_command(&mut b.trace, command_line);
        let path = dir.join(format!("{stem}_sample.csv"));
        write_atomic(&path, |buf| b.trace.write_csv(buf))?;
        written.push((path, b.trace));
    } else {
        match shor::run_shor_trace(&instance, a.measure, &opts)? {
            ShorTrace::Coherent(mut t) => {
                with_command(&mut t, command_line);
                let path = dir.join(format!("{stem}.csv"));
                write_atomic(&path, |buf| t.write_csv(buf))?;
                written.push((path, t));
            }
            ShorTrace::Measured(branches) => {
                for mut b in branches {
                    with_command(&mut b.trace, command_line);
                    let path = dir.join(format!("{stem}_a{}.csv", b.branch.label));
                    write_atomic(&path, |buf| b.trace.write_csv(buf))?;
                    written.push((path, b.trace));
                }
            }
        }
    }
    let me_step = 2 * instance.first_register();
    for (path, t) in &written {
        write!(out, "wrote {}", path.display())?;
        if let Some(b) = &t.branch {
            write!(out, " (a={} residue={} probability={:.6})", b.label, b.residue, b.probability)?;
        }
        writeln!(out)?;
        if let Some(e) = t.record(me_step).and_then(|r| r.e_max()) {
            writeln!(out, "  ME e_max={e:.6}")?;
        }
        if let Some(&(step, e)) = t.e_max_series().last() {
            writeln!(out, "  final e_max={e:.6} at step {step}")?;
        }
    }
    if a.dump_operators {
        let spec = shor::extract_amax_me(&instance)?;
        let state = shor::simulate_me_state(&instance)?;
        let vcm_path = dir.join(format!("{stem}_me_vcm.csv"));
        write_atomic(&vcm_path, |buf| vcm::build_vcm(&state).write_csv(buf))?;
        let op_path = dir.join(format!("{stem}_me_operators.csv"));
        write_atomic(&op_path, |buf| AdditiveOperator::write_csv(&spec.top_operators, buf))?;
        writeln!(out, "wrote {} and {} (degeneracy {})", vcm_path.display(), op_path.display(), spec.degeneracy)?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, dir: &Path, command_line: &str, out: &mut dyn Write) -> Result<()> {
    let mut header = vec![("command".to_string(), command_line.to_string())];
    let (points, name) = match a.alg {
        Algorithm::Grover => {
            let sizes = if a.sizes.is_empty() { vec![8, 10, 12, 14] } else { a.sizes.clone() };
            let selectors: Vec<GroverSelector> = if a.selectors.is_empty() {
                vec![GroverSelector::Fraction(2), GroverSelector::Fraction(3), GroverSelector::Fraction(4)]
            } else {
                a.selectors.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            let family = match a.family {
                Family::Solutions => GroverFamily::Solutions { m: a.m, seed: a.seed },
                Family::Eight => GroverFamily::MultiplesOfEight,
            };
            header.push(("family".into(), format!("{family:?}")));
            (analysis::sweep_grover(&sizes, family, &selectors, a.simulate)?, "sweep_grover.csv".to_string())
        }
        Algorithm::Shor => {
            let sizes = if a.sizes.is_empty() { vec![15, 18, 21] } else { a.sizes.clone() };
            let selectors: Vec<ShorSelector> = if a.selectors.is_empty() {
                ShorSelector::ALL.to_vec()
            } else {
                a.selectors.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            let sweep = analysis::sweep_shor(a.r, &sizes, &selectors)?;
            for inst in &sweep.instances {
                header.push((
                    format!("instance_L_tot_{}", inst.total_qubits()),
                    format!("N={} x={}", inst.modulus(), inst.base()),
                ));
            }
            for t in &sweep.missing {
                header.push((format!("instance_L_tot_{t}"), "none".into()));
                writeln!(out, "no instance of order {} at L_tot={t}", a.r)?;
            }
            (sweep.points, format!("sweep_shor_r{}.csv", a.r))
        }
    };
    let path = a.output.clone().unwrap_or_else(|| dir.join(name));
    write_atomic(&path, |buf| analysis::write_points_csv(&points, &header, buf))?;
    writeln!(out, "wrote {} ({} points)", path.display(), points.len())?;
    Ok(())
}

fn cmd_fit(a: &FitArgs, dir: &Path, command_line: &str, out: &mut dyn Write) -> Result<()> {
    let points = analysis::read_points_csv(BufReader::new(fs::File::open(&a.input)?))?;
    let thresholds = FitThresholds {
        min_slope: a.min_slope,
        min_r_squared: a.min_r_squared,
        max_flat_range: a.max_flat_range,
    };
    let fits = analysis::fit_by_selector(&points, &thresholds)?;
    let header = vec![
        ("command".to_string(), command_line.to_string()),
        ("thresholds".to_string(), format!("{thresholds:?}")),
    ];
    let path = a.output.clone().unwrap_or_else(|| dir.join("fit.csv"));
    write_atomic(&path, |buf| analysis::write_fit_report(&fits, &header, buf))?;
    log::info!("fitted {} selectors from {} points", fits.len(), points.len());
    for (sel, f) in &fits {
        writeln!(out, "{sel}: slope={:.6} r_squared={:.6} {}", f.slope, f.r_squared, f.classification)?;
    }
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn cmd_state(a: &StateArgs, _dir: &Path, out: &mut dyn Write) -> Result<()> {
    let mut kind: ReferenceState = a.kind.parse()?;
    if let ReferenceState::Basis(i) = &mut kind {
        *i = a.index;
    }
    let state = build_reference(&kind, a.l)?;
    let v = vcm::build_vcm(&state);
    let spec = vcm::max_eigen(&v, DEFAULT_DEGENERACY_RTOL)?;
    if let Some(path) = &a.dump_vcm {
        write_atomic(path, |buf| v.write_csv(buf))?;
    }
    writeln!(out, "kind={kind} L={} e_max={:.6} degeneracy={}", a.l, spec.e_max, spec.degeneracy)?;
    Ok(())
}
