//! Argument parsing and command dispatch for the `slicelab` binary.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use slicelab_core::gf::GeneratingFamily;

use crate::api::{
    execute, execute_streaming, AnalyzeRequest, ApiError, DiagramInput, Envelope, ErrorCode, OracleRequest, Outcome,
    RelationRequest, Request, SliceInput, SliceRequest, SweepRequest, GRID_ENV,
};

#[derive(Debug, Parser)]
#[command(name = "slicelab", version, about = "Slices of planar Lagrangians: diagrams, capacities and cobordism obstructions")]
pub struct Cli {
    /// Write the JSON response here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FamilyArgs {
    /// Generating family JSON file.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Name of a shipped preset.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Morse table, capacities and verdict for a catalog expression or diagram file.
    Analyze {
        /// Catalog expression such as "C(-,+,-;3,1,2)", or a diagram JSON file.
        input: String,
        /// Print the JSON response (the default).
        #[arg(long)]
        json: bool,
        /// Also render the diagram to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Skip the rules that hold only for genuine negative slices.
        #[arg(long)]
        no_assume: bool,
    },
    /// Extract and classify one level slice of a family.
    Slice {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long, allow_negative_numbers = true)]
        level: Option<f64>,
        #[arg(long, env = GRID_ENV)]
        grid: Option<usize>,
        /// Also render the slice to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Run the Hessian oracle on every crossing.
        #[arg(long)]
        oracle: bool,
    },
    /// Slice a range of levels and report shape transitions.
    Sweep {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, env = GRID_ENV)]
        grid: Option<usize>,
        /// Print one JSON line per finished level before the final response.
        #[arg(long)]
        stream: bool,
    },
    /// Check whether capacities obstruct a cobordism from bottom to top.
    Relation {
        /// Catalog expression, "empty", or diagram JSON file.
        #[arg(long, requires = "top", conflicts_with_all = ["family", "preset"])]
        bottom: Option<String>,
        #[arg(long, requires = "bottom")]
        top: Option<String>,
        #[arg(long)]
        strict: bool,
        /// Also compare degree-one classes of connected ends.
        #[arg(long)]
        degree_one: bool,
        /// Witness mode: generating family JSON file.
        #[arg(long, conflicts_with = "preset")]
        family: Option<PathBuf>,
        /// Witness mode: preset name.
        #[arg(long)]
        preset: Option<String>,
        /// Witness mode: lower and upper level.
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"])]
        levels: Option<Vec<f64>>,
        #[arg(long, env = GRID_ENV)]
        grid: Option<usize>,
    },
    /// Compare capping-path data with critical points of the difference function.
    Oracle {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long, allow_negative_numbers = true)]
        level: Option<f64>,
        #[arg(long, env = GRID_ENV)]
        grid: Option<usize>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Serve static files (the explorer UI) from this directory.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, ApiError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ApiError::invalid(format!("cannot read {what} {}: {e}", path.display())).at(what))?;
    serde_json::from_str(&text).map_err(|e| ApiError::from(e).at(format!("{}", path.display())))
}

fn family(args: &FamilyArgs) -> Result<(Option<GeneratingFamily>, Option<String>), ApiError> {
    Ok((args.family.as_deref().map(|p| read_json(p, "family")).transpose()?, args.preset.clone()))
}

/// A catalog expression, or a diagram file when the argument names an existing JSON file.
fn slice_input(text: &str) -> Result<SliceInput, ApiError> {
    let path = Path::new(text);
    if text.ends_with(".json") && path.is_file() {
        Ok(SliceInput::Diagram(read_json::<DiagramInput>(path, "diagram")?))
    } else {
        Ok(SliceInput::Catalog(text.to_string()))
    }
}

/// What to do besides printing the response.
enum After {
    Nothing,
    Svg(PathBuf),
}

fn build(command: &Command) -> Result<(Request, After), ApiError> {
    let svg_after = |p: &Option<PathBuf>| p.clone().map_or(After::Nothing, After::Svg);
    Ok(match command {
        Command::Analyze { input, svg, no_assume, .. } => {
            let mut req = match slice_input(input)? {
                SliceInput::Catalog(t) => AnalyzeRequest::catalog(t),
                SliceInput::Diagram(d) => AnalyzeRequest { diagram: Some(d), ..AnalyzeRequest::catalog("") },
            };
            if req.diagram.is_some() {
                req.catalog = None;
            }
            req.assume_negative_slice = !no_assume;
            req.svg = svg.is_some();
            (Request::Analyze(req), svg_after(svg))
        }
        Command::Slice { source, level, grid, svg, oracle } => {
            let (family, preset) = family(source)?;
            let req = SliceRequest { family, preset, level: *level, grid: *grid, svg: svg.is_some(), oracle: *oracle };
            (Request::Slice(req), svg_after(svg))
        }
        Command::Sweep { source, from, to, steps, grid, .. } => {
            let (family, preset) = family(source)?;
            (Request::Sweep(SweepRequest { family, preset, from: *from, to: *to, steps: *steps, grid: *grid }), After::Nothing)
        }
        Command::Relation { bottom, top, strict, degree_one, family, preset, levels, grid } => {
            let req = RelationRequest {
                bottom: bottom.as_deref().map(slice_input).transpose()?,
                top: top.as_deref().map(slice_input).transpose()?,
                strict: *strict,
                compare_degree_one: *degree_one,
                family: family.as_deref().map(|p| read_json(p, "family")).transpose()?,
                preset: preset.clone(),
                levels: levels.as_ref().map(|l| [l[0], l[1]]),
                grid: *grid,
            };
            (Request::Relation(req), After::Nothing)
        }
        Command::Oracle { source, level, grid } => {
            let (family, preset) = family(source)?;
            (Request::Oracle(OracleRequest { family, preset, level: *level, grid: *grid }), After::Nothing)
        }
        Command::Serve { .. } => unreachable!("serve is handled before building a request"),
    })
}

fn error_envelope(e: ApiError) -> Envelope {
    Envelope { version: slicelab_core::VERSION.to_string(), input_digest: String::new(), outcome: Outcome::Error(e) }
}

fn finish(env: &Envelope, after: After, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let text = env.to_json() + "\n";
    let written = match out {
        Some(p) => std::fs::write(p, &text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    if let Some(e) = env.error() {
        let _ = writeln!(stderr, "error: {}", e.message);
        return e.exit_code();
    }
    if let (After::Svg(path), Outcome::Result(v)) = (after, &env.outcome) {
        let svg = v["svg"].as_str().unwrap_or_default();
        if let Err(e) = std::fs::write(&path, svg) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    0
}

/// Runs the `slicelab` command line and returns the process exit code:
/// 0 on success, 2 for invalid input, 3 for non-generic input.
pub fn run_command(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    if let Command::Serve { port, host, static_dir } = &cli.command {
        let runtime = match tokio::runtime::Runtime::new() {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
        };
        return match runtime.block_on(crate::http::serve(SocketAddr::new(*host, *port), static_dir.clone())) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                1
            }
        };
    }
    let (req, after) = match build(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let env = error_envelope(e);
            return finish(&env, After::Nothing, cli.out.as_deref(), stdout, stderr);
        }
    };
    let env = match &cli.command {
        Command::Sweep { stream: true, .. } => {
            let lines = std::sync::Mutex::new(Vec::new());
            let env = execute_streaming(&req, &|line| {
                lines.lock().expect("not poisoned").push(serde_json::to_string(&line).expect("lines serialize"));
            });
            for l in lines.into_inner().expect("not poisoned") {
                let _ = writeln!(stdout, "{l}");
            }
            env
        }
        _ => execute(&req),
    };
    if env.error().map(|e| e.code) == Some(ErrorCode::NotFound) {
        let _ = writeln!(stderr, "hint: `slicelab --help` lists commands; GET /api/presets lists preset names");
    }
    finish(&env, after, cli.out.as_deref(), stdout, stderr)
}
