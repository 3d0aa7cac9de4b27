//! `subsume` command-line tool.
//!
//! Exit status: 0 on success, 1 when the input has diagnostics, 2 on usage,
//! I/O or conflict errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subsume::codegen::{self, CodegenError, FileSet, GenOptions};
use subsume::dsl::{self, ParseError};
use subsume::example::example_model;
use subsume::sim::{self, ControllerParams, SensorConfig, SimConfig, SimResult};
use subsume::validate::validate_with_spans;
use subsume::{RuntimeConfig, SystemModel};

#[derive(Parser)]
#[command(name = "subsume", version, about = "Subsumption-architecture controller toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model; diagnostics go to stderr.
    Check { path: PathBuf },
    /// Print the canonical formatting of a model.
    Fmt(FmtArgs),
    /// Generate an application skeleton, keeping filled user regions.
    Gen(GenArgs),
    /// Export the model as a Graphviz diagram.
    Dot {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bundled wander/avoid controller in a world.
    Sim(SimArgs),
}

#[derive(Args)]
struct FmtArgs {
    path: PathBuf,
    /// Rewrite the file in place.
    #[arg(long, conflicts_with = "check")]
    write: bool,
    /// Exit with 1 if the file is not canonically formatted.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct GenArgs {
    path: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also emit markdown pages.
    #[arg(long)]
    docs: bool,
    /// Also emit one test stub per module.
    #[arg(long)]
    tests: bool,
    /// Regenerate everything, discarding user regions and manual edits.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    project_name: Option<String>,
    /// Path of the runtime crate written into the generated manifest.
    #[arg(long)]
    runtime_path: Option<String>,
}

#[derive(Args)]
struct SimArgs {
    world: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    ticks: u64,
    /// Enabled layers, e.g. `0` or `0,1`. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// With --svg, also draw the layer-0-only path in a lighter color.
    #[arg(long)]
    compare: bool,
    /// JSON file overriding controller parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Use a ring of this many range finders instead of the default three.
    #[arg(long)]
    ring: Option<usize>,
}

/// Error that ends a command with the given status.
struct Fail(u8, String);

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail(2, msg.into())
    }
}

type Outcome = Result<(), Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Outcome {
    fs::write(path, content).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn print_parse_errors(file: &str, errors: &[ParseError]) {
    for e in errors {
        eprintln!("{file}:{}:{}: error: {}", e.span.line, e.span.column, e.message);
    }
}

/// Parses and validates; diagnostics are printed and turn into status 1.
fn load_valid(path: &Path) -> Result<SystemModel, Fail> {
    let file = path.display().to_string();
    let text = read(path)?;
    let (model, spans) = dsl::parse_with_spans(&text).map_err(|errors| {
        print_parse_errors(&file, &errors);
        Fail(1, format!("{} parse error(s)", errors.len()))
    })?;
    let diagnostics = validate_with_spans(&model, Some(&spans));
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{}", d.render(&file));
        }
        return Err(Fail(1, format!("{} diagnostic(s)", diagnostics.len())));
    }
    Ok(model)
}

fn check(path: &Path) -> Outcome {
    let model = load_valid(path)?;
    println!(
        "{}: ok ({} modules, {} wires, {} modifiers)",
        path.display(),
        model.modules.len(),
        model.wires.len(),
        model.modifiers.len()
    );
    Ok(())
}

fn fmt(args: &FmtArgs) -> Outcome {
    let file = args.path.display().to_string();
    let text = read(&args.path)?;
    let model = dsl::parse(&text).map_err(|errors| {
        print_parse_errors(&file, &errors);
        Fail::usage("cannot format a file that does not parse")
    })?;
    let formatted = dsl::format(&model);
    if args.check {
        if formatted != text {
            return Err(Fail(1, format!("{file} is not formatted")));
        }
    } else if args.write {
        if formatted != text {
            write(&args.path, &formatted)?;
        }
    } else {
        print!("{formatted}");
    }
    Ok(())
}

fn gen(args: &GenArgs) -> Outcome {
    let model = load_valid(&args.path)?;
    let mut opts = GenOptions {
        project_name: args.project_name.clone(),
        emit_docs: args.docs,
        emit_tests: args.tests,
        overwrite_user_regions: args.force,
        ..GenOptions::default()
    };
    if let Some(p) = &args.runtime_path {
        opts.runtime_path = p.clone();
    }
    let codegen_fail = |e: CodegenError| match e {
        CodegenError::InvalidModel(_) | CodegenError::NameCollision { .. } => Fail(1, e.to_string()),
        _ => Fail::usage(e.to_string()),
    };
    let fresh = codegen::generate(&model, &opts).map_err(codegen_fail)?;
    let files = if args.force {
        fresh
    } else {
        let existing = FileSet::read_existing(&args.out, fresh.paths())
            .map_err(|e| Fail::usage(format!("{}: {e}", args.out.display())))?;
        codegen::regenerate(&model, &opts, &existing).map_err(codegen_fail)?
    };
    stage_and_commit(&files, &args.out)?;
    for p in files.paths() {
        println!("{}", args.out.join(p).display());
    }
    Ok(())
}

/// Writes everything to a sibling temporary directory first, then moves the
/// files into place, so a failed write leaves `out` untouched.
fn stage_and_commit(files: &FileSet, out: &Path) -> Outcome {
    let io = |e: std::io::Error| Fail::usage(format!("{}: {e}", out.display()));
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io)?;
    let staging = tempfile::Builder::new()
        .prefix(".subsume-gen-")
        .tempdir_in(&parent)
        .map_err(io)?;
    files.write_to(staging.path()).map_err(io)?;
    for p in files.paths() {
        let target = out.join(p);
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).map_err(io)?;
        }
        fs::rename(staging.path().join(p), &target).map_err(io)?;
    }
    Ok(())
}

fn dot(path: &Path, out: Option<&Path>) -> Outcome {
    let model = load_valid(path)?;
    let text = subsume::dot::to_dot(&model);
    match out {
        Some(o) => write(o, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: &SimArgs) -> Outcome {
    let world = sim::load_world(&read(&args.world)?)
        .map_err(|e| Fail::usage(format!("{}: {e}", args.world.display())))?;
    let params: ControllerParams = match &args.params {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Fail::usage(format!("{}: {e}", p.display())))?,
        None => ControllerParams::default(),
    };
    let base = match args.ring {
        Some(n) if n > 0 => SensorConfig::ring(n),
        Some(_) => return Err(Fail::usage("--ring needs at least one sensor")),
        None => SensorConfig::default(),
    };
    let sensors = SensorConfig {
        seed: args.seed,
        ..base
    };
    let run = |layers: Option<Vec<u32>>| -> Result<SimResult, Fail> {
        let mut runtime = RuntimeConfig::default().with_seed(args.seed);
        if let Some(l) = layers {
            runtime = runtime.with_layers(l);
        }
        let config = SimConfig {
            runtime,
            duration_ticks: args.ticks,
            params: params.clone(),
            ..SimConfig::default()
        };
        sim::run_sim(&world, example_model(), sensors.clone(), &config)
            .map_err(|e| Fail::usage(e.to_string()))
    };
    let result = run(args.layers.clone())?;
    println!("coverage_cells: {}", result.coverage_cells);
    println!("collisions: {}", result.collisions);
    if let Some(csv) = &args.csv {
        write(csv, &sim::path_to_csv(&result.path))?;
    }
    if let Some(svg) = &args.svg {
        let text = if args.compare {
            let low = run(Some(vec![0]))?;
            println!("coverage_cells (layer 0 only): {}", low.coverage_cells);
            sim::render_svg(&world, &[(&low.path, "#90ee90"), (&result.path, "#006400")])
        } else {
            sim::render_svg(&world, &[(&result.path, "#006400")])
        };
        write(svg, &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check { path } => check(path),
        Command::Fmt(a) => fmt(a),
        Command::Gen(a) => gen(a),
        Command::Dot { path, out } => dot(path, out.as_deref()),
        Command::Sim(a) => simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
