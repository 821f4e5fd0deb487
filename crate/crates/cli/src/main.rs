//! Command line front end: explore, minimise, compose, cleave, check
//! invariants and compare, plus the full decompose-and-compare pipeline.
//!
//! Exit codes: 0 success, 1 usage or parse errors, 2 validation or
//! requirement failures, 3 exceeded limits, 4 failed bisimilarity check.

use std::alloc::{GlobalAlloc, Layout, System};
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};

use lpecleave::{
    check_bisim, check_cleave_oracle, check_invariant, explore_composition, explore_lpe,
    minimise_bisim, parse_expression, parse_partition, parse_spec, read_aut, render_metrics_kv,
    render_metrics_text, run_pipeline, write_aut, auto_cleave, AutError, ExploreError, Invariant,
    Limits, Lts, PipelineError, PipelineOptions, SpecError, SpecFile,
};

// Tracks live heap bytes and their high-water mark; the pipeline reports the
// peak as an informative column.
struct PeakAlloc;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for PeakAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc(layout);
        if !ptr.is_null() {
            let current = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(current, Ordering::Relaxed);
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: PeakAlloc = PeakAlloc;

fn peak_bytes() -> u64 {
    PEAK.load(Ordering::Relaxed) as u64
}

#[derive(Parser)]
#[command(
    name = "lpecleave",
    about = "Explore, minimise and decompose linear process equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Args, Clone)]
struct LimitArgs {
    /// Bound for enumerating Nat domains (sum variables and requirement
    /// checks).
    #[arg(long, default_value_t = 64)]
    nat_bound: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_states: usize,
    #[arg(long, default_value_t = 100_000_000)]
    max_transitions: usize,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            nat_bound: self.nat_bound,
            max_states: self.max_states,
            max_transitions: self.max_transitions,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: cleave, check, explore and minimise the
    /// components, recombine them, and compare with the monolithic state
    /// space.
    Pipeline {
        spec: PathBuf,
        /// Partition document assigning every parameter to V or W.
        #[arg(long)]
        partition: PathBuf,
        /// State invariant as an expression, or @file to read one.
        #[arg(long)]
        invariant: Option<String>,
        #[command(flatten)]
        limits: LimitArgs,
        /// Directory for the generated .aut files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Omit the tag action on independent summands (demonstrates why it
        /// is needed; the bisimilarity check is expected to fail).
        #[arg(long)]
        no_tag_debug: bool,
        /// Strengthen update expressions instead of conditions.
        #[arg(long)]
        invariant_on_update: bool,
        /// Continue past failed requirement checks; output is marked
        /// unverified.
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Generate the state space of the specification's initial instance.
    Explore {
        spec: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        /// Write the state space to this .aut file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimise an .aut file modulo strong bisimulation.
    Minimise {
        input: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explore a named composition expression from the specification.
    Compose {
        spec: PathBuf,
        /// The composition's name.
        #[arg(long)]
        name: String,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the decomposition plan for a partition and check its
    /// requirements.
    Cleave {
        spec: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Check that an expression is a state invariant.
    CheckInvariant {
        spec: PathBuf,
        /// The invariant as an expression, or @file to read one.
        #[arg(long)]
        invariant: String,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Check two .aut files for strong bisimilarity.
    Compare { left: PathBuf, right: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        let code = match e {
            SpecError::Validation { .. } => 2,
            _ => 1,
        };
        Failure::new(code, e)
    }
}

impl From<AutError> for Failure {
    fn from(e: AutError) -> Self {
        Failure::new(1, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e)
    }
}

impl From<ExploreError> for Failure {
    fn from(e: ExploreError) -> Self {
        let code = match e {
            ExploreError::LimitExceeded { .. } => 3,
            _ => 2,
        };
        Failure::new(code, e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::new(e.exit_code() as u8, e)
    }
}

fn load_spec(path: &Path) -> Result<SpecFile, Failure> {
    let text = fs::read_to_string(path)?;
    Ok(parse_spec(&text)?)
}

fn load_partition(path: &Path) -> Result<(Vec<String>, Vec<String>), Failure> {
    let text = fs::read_to_string(path)?;
    Ok(parse_partition(&text)?)
}

// An invariant argument is either an expression or @file.
fn load_invariant(arg: &str, spec: &SpecFile) -> Result<lpecleave::Expression, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    Ok(parse_expression(&text, spec)?)
}

fn write_lts(lts: &Lts, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            write_aut(lts, &mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_aut(lts, stdout.lock())?;
        }
    }
    Ok(())
}

fn read_lts(path: &Path) -> Result<Lts, Failure> {
    let file = fs::File::open(path)?;
    Ok(read_aut(BufReader::new(file))?)
}

fn report_truncation(lts: &Lts) {
    if lts.truncated {
        eprintln!(
            "warning: a Nat domain was cut at the bound; the result covers only the bounded part"
        );
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Pipeline {
            spec,
            partition,
            invariant,
            limits,
            out_dir,
            no_tag_debug,
            invariant_on_update,
            force,
            format,
        } => {
            let spec = load_spec(&spec)?;
            let (v, w) = load_partition(&partition)?;
            let invariant = invariant
                .map(|arg| load_invariant(&arg, &spec))
                .transpose()?;
            let options = PipelineOptions {
                limits: limits.limits(),
                use_tag: !no_tag_debug,
                force,
                invariant,
                invariant_on_update,
                out_dir,
                mem_probe: Some(peak_bytes),
            };
            let outcome = run_pipeline(&spec, &v, &w, &options)?;
            let rendered = match format {
                Format::Text => render_metrics_text(&outcome, true),
                Format::Kv => render_metrics_kv(&outcome, true),
            };
            print!("{rendered}");
            Ok(if outcome.bisimilar { 0 } else { 4 })
        }
        Command::Explore { spec, limits, out } => {
            let spec = load_spec(&spec)?;
            let lts = explore_lpe(&spec.init, limits.limits())?;
            report_truncation(&lts);
            eprintln!(
                "{}: {} states, {} transitions",
                spec.process.name,
                lts.num_states,
                lts.num_transitions()
            );
            write_lts(&lts, out.as_deref())?;
            Ok(0)
        }
        Command::Minimise { input, out } => {
            let lts = read_lts(&input)?;
            let (minimised, _) = minimise_bisim(&lts);
            eprintln!(
                "{} states, {} transitions -> {} states, {} transitions",
                lts.num_states,
                lts.num_transitions(),
                minimised.num_states,
                minimised.num_transitions()
            );
            write_lts(&minimised, out.as_deref())?;
            Ok(0)
        }
        Command::Compose {
            spec,
            name,
            limits,
            out,
        } => {
            let spec = load_spec(&spec)?;
            let expr = spec.compositions.get(&name).ok_or_else(|| {
                Failure::new(1, format!("no composition named '{name}' in the specification"))
            })?;
            let lts = explore_composition(expr, limits.limits())?;
            report_truncation(&lts);
            eprintln!(
                "{name}: {} states, {} transitions",
                lts.num_states,
                lts.num_transitions()
            );
            write_lts(&lts, out.as_deref())?;
            Ok(0)
        }
        Command::Cleave {
            spec,
            partition,
            limits,
        } => {
            let spec = load_spec(&spec)?;
            let (v, w) = load_partition(&partition)?;
            let plan = auto_cleave(&spec.process, &v, &w)
                .map_err(|e| Failure::new(2, e))?;
            print!("{}", lpecleave::render_plan(&spec.process, &plan));
            let report = check_cleave_oracle(&spec.process, &plan, limits.nat_bound)
                .map_err(|e| Failure::new(2, e))?;
            print!("{report}");
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::CheckInvariant {
            spec,
            invariant,
            limits,
        } => {
            let spec = load_spec(&spec)?;
            let psi = load_invariant(&invariant, &spec)?;
            let invariant =
                Invariant::for_lpe(&spec.process, psi).map_err(|e| Failure::new(2, e))?;
            let report = check_invariant(&spec.process, &invariant, limits.nat_bound)
                .map_err(|e| Failure::new(2, e))?;
            if report.truncated {
                eprintln!("note: Nat domains truncated; verdict sound up to the bound");
            }
            if report.holds() {
                println!("invariant holds");
                Ok(0)
            } else {
                println!("invariant fails ({} violations)", report.violations.len());
                for violation in report.violations.iter().take(5) {
                    let env: Vec<String> = violation
                        .env
                        .iter()
                        .map(|(n, v)| format!("{n} = {v}"))
                        .collect();
                    println!("  summand {} under {}", violation.summand, env.join(", "));
                }
                Ok(2)
            }
        }
        Command::Compare { left, right } => {
            let a = read_lts(&left)?;
            let b = read_lts(&right)?;
            let verdict = check_bisim(&a, &b);
            if verdict.bisimilar {
                println!("bisimilar: true");
                Ok(0)
            } else {
                println!("bisimilar: false");
                if let Some(witness) = verdict.witness {
                    let rendered: Vec<String> = witness.iter().map(|l| l.to_string()).collect();
                    println!("distinguished by: {}", rendered.join(" . "));
                }
                Ok(4)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and succeed; anything else is
            // a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            let _ = writeln!(std::io::stderr(), "error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
