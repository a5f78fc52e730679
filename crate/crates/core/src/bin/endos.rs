use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rand::Rng;

use endos::report::{self, RunOptions, RunReport, EXIT_INPUT};
use endos::{Circuit, EndosError, MachineConfig};

/// Compile, simulate and report on a donor-spin circuit.
#[derive(Debug, Parser)]
#[command(name = "endos", version)]
struct Args {
    /// Key-value machine configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Circuit file, one gate per line.
    #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
    circuit: Option<PathBuf>,

    /// RNG seed. Without it a seed is drawn from system entropy and printed.
    #[arg(long)]
    seed: Option<u64>,

    /// Also schedule the circuit onto K tips.
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    tips: Option<u64>,

    /// Audit closed-form frequencies against the engine.
    #[arg(long)]
    verify_frequencies: bool,

    /// Write the final state vector here.
    #[arg(long, value_name = "PATH")]
    dump_state: Option<PathBuf>,

    /// Re-read every measurement from a synthetic current trace at this SNR.
    #[arg(long, value_name = "X")]
    trace_snr: Option<f64>,

    /// Directory for the synthetic traces.
    #[arg(long, value_name = "DIR", requires = "trace_snr")]
    trace_dir: Option<PathBuf>,

    /// Exit with code 4 when the program does not fit in T2.
    #[arg(long)]
    enforce_budget: bool,

    /// Run every `*.circ` file in DIR.
    #[arg(long, value_name = "DIR")]
    batch: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<MachineConfig, String> {
    match path {
        Some(p) => MachineConfig::parse(&read(p)?).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(MachineConfig::default()),
    }
}

fn run_file(cfg: &MachineConfig, path: &Path, opts: &RunOptions) -> Result<RunReport, String> {
    let circuit = Circuit::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    report::run(cfg, &circuit, opts).map_err(|e: EndosError| format!("{}: {e}", path.display()))
}

fn batch_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "circ"))
        .collect();
    files.sort();
    Ok(files)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let seed = args.seed.unwrap_or_else(|| {
        let s = rand::rng().random();
        eprintln!("seed: {s}");
        s
    });
    let cfg = match load_config(args.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let opts = RunOptions {
        seed,
        tips: args.tips.map(|k| k as usize),
        verify_frequencies: args.verify_frequencies,
        dump_state: args.dump_state.clone(),
        trace_snr: args.trace_snr,
        trace_dir: args.trace_dir.clone(),
        enforce_budget: args.enforce_budget,
    };

    let code = match &args.batch {
        Some(dir) => run_batch(&cfg, dir, &opts, args.output.as_deref()),
        None => {
            let path = args.circuit.as_deref().expect("clap requires --circuit");
            match run_file(&cfg, path, &opts) {
                Ok(report) => match emit(&report.to_json(), args.output.as_deref()) {
                    Ok(()) => report.exit_code,
                    Err(e) => {
                        eprintln!("error: {e}");
                        EXIT_INPUT
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }
    };
    ExitCode::from(code as u8)
}

/// Runs the circuits concurrently, each with its own derived seed, and
/// writes one JSON object keyed by file name. The exit code is the largest
/// of the individual codes.
fn run_batch(cfg: &MachineConfig, dir: &Path, opts: &RunOptions, output: Option<&Path>) -> i32 {
    let files = match batch_files(dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let seeds = report::derive_seeds(opts.seed, files.len());
    let results: Vec<Result<RunReport, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .zip(&seeds)
            .map(|(path, &seed)| {
                let mut o = opts.clone();
                o.seed = seed;
                if let Some(dump) = &opts.dump_state {
                    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                    o.dump_state = Some(dump.with_file_name(format!(
                        "{stem}.{}",
                        dump.file_name().unwrap_or_default().to_string_lossy()
                    )));
                }
                if let Some(dir) = &opts.trace_dir {
                    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                    let sub = dir.join(stem.as_ref());
                    let _ = fs::create_dir_all(&sub);
                    o.trace_dir = Some(sub);
                }
                scope.spawn(move || run_file(cfg, path, &o))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("batch worker panicked")).collect()
    });

    let mut code = 0;
    let mut reports = BTreeMap::new();
    for (path, result) in files.iter().zip(results) {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        match result {
            Ok(r) => {
                code = code.max(r.exit_code);
                reports.insert(name, r);
            }
            Err(e) => {
                eprintln!("error: {e}");
                code = code.max(EXIT_INPUT);
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&reports).expect("reports are serializable");
    text.push('\n');
    if let Err(e) = emit(&text, output) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    code
}
