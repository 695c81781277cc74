use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rootgraph::bench::{self, generate, programs, write_csv, GeneratorKind};
use rootgraph::{parse_host_graph, parse_program, serialize_graph, Engine, ExecStatus, MatchMode, Program};

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "rootgraph", version, about = "Run rooted graph-transformation programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program on a host graph and print the result graph.
    Run {
        /// Program file, or the name of a bundled program.
        program: String,
        host: PathBuf,
        #[arg(long, default_value = "reflecting", value_parser = parse_mode)]
        mode: MatchMode,
        /// Write the result graph here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Report execution time (parsing excluded) on stderr.
        #[arg(long)]
        time: bool,
        /// Abort after this many rule calls plus loop iterations.
        #[arg(long)]
        step_limit: Option<u64>,
    },
    /// Generate an input graph.
    Gen {
        #[arg(value_parser = parse_kind)]
        kind: GeneratorKind,
        /// Count for discrete/path/cycle, depth for btree, side for grid.
        size: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time a program over generated inputs of increasing size.
    Bench {
        /// Program file, or the name of a bundled program.
        program: String,
        #[arg(long, value_parser = parse_kind)]
        kind: GeneratorKind,
        /// Comma-separated generator parameters, ascending.
        #[arg(long, default_value = "", value_parser = parse_sizes)]
        sizes: Sizes,
        #[arg(long, default_value_t = 3)]
        repeats: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "reflecting", value_parser = parse_mode)]
        mode: MatchMode,
    },
}

fn parse_mode(s: &str) -> Result<MatchMode, String> {
    MatchMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (expected preserving or reflecting)"))
}

#[derive(Clone, Debug)]
struct Sizes(Vec<u64>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<u64>().map_err(|_| format!("invalid size `{p}`")))
        .collect::<Result<_, _>>()
        .map(Sizes)
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    s.parse().map_err(|e: bench::GenError| e.to_string())
}

/// Returns the program's display name and parsed form.
fn load_program(source: &str) -> Result<(String, Program)> {
    let path = Path::new(source);
    let (name, text) = if path.exists() {
        let name = path.file_stem().map_or(source.to_string(), |s| s.to_string_lossy().into_owned());
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        (name, text)
    } else if let Some(src) = programs::by_name(source) {
        (source.to_string(), src.to_string())
    } else {
        bail!("no such program file or bundled program: {source}");
    };
    let program = parse_program(&text).map_err(|d| anyhow::anyhow!("{source}:{d}"))?;
    Ok((name, program))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Cmd::Run {
            program,
            host,
            mode,
            output,
            time,
            step_limit,
        } => {
            let (_, program) = load_program(&program)?;
            let text = fs::read_to_string(&host).with_context(|| format!("reading {}", host.display()))?;
            let mut g = parse_host_graph(&text).map_err(|d| anyhow::anyhow!("{}:{d}", host.display()))?;
            let mut engine = Engine::new(&program, mode)?.with_step_limit(step_limit);
            let start = Instant::now();
            let status = engine.run(&mut g)?;
            let elapsed = start.elapsed();
            if time {
                eprintln!("time: {:.3} ms", elapsed.as_secs_f64() * 1e3);
            }
            match status {
                ExecStatus::Fail => {
                    println!("Fail");
                    Ok(EXIT_FAIL)
                }
                ExecStatus::Success | ExecStatus::Break => {
                    write_out(output.as_deref(), &serialize_graph(&g))?;
                    Ok(0)
                }
            }
        }
        Cmd::Gen { kind, size, out } => {
            let g = generate(kind, size)?;
            write_out(out.as_deref(), &serialize_graph(&g))?;
            Ok(0)
        }
        Cmd::Bench {
            program,
            kind,
            sizes,
            repeats,
            csv,
            mode,
        } => {
            let sizes = sizes.0;
            if sizes.windows(2).any(|w| w[0] > w[1]) {
                bail!("--sizes must be ascending");
            }
            if repeats == 0 {
                bail!("--repeats must be positive");
            }
            let (name, program) = load_program(&program)?;
            let records = bench::bench(&name, &program, mode, kind, &sizes, repeats)?;
            for r in records.iter().filter(|r| r.status == ExecStatus::Fail) {
                eprintln!("{}: program failed on {} with {} nodes", r.program, r.kind, r.size);
            }
            match csv {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
                    write_csv(io::BufWriter::new(f), &records)?;
                }
                None => write_csv(io::stdout().lock(), &records)?,
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
