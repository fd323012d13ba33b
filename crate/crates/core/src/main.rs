use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nfedof::capacity::{capacity, CapacityInputs};
use nfedof::coupling::{
    coupling_matrix, mutual_impedance_matrix, read_impedance_file, write_impedance_file, CouplingParams, ImpedanceMatrix,
};
use nfedof::geometry::{ArrayGeometry, UlaGeometry, UpaGeometry, WaveParams};
use nfedof::workbench::{
    emit_comparison_csv, emit_csv, figure_preset, run_with_comparison, write_rows, CouplingSpec, LengthUnit, SweepRange,
    SweepRow, SweepSpec, SweepVariable,
};
use nfedof::{ComplexMatrix, Error, Result};

#[derive(Parser)]
#[command(name = "nfedof", version, about = "EDoF of near-field XL-MIMO links")]
struct Cli {
    /// Base seed for sampled estimators; overrides the seed in configs and presets.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; NFEDOF_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (edof, sweep, coupling) or directory (figure).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single point.
    Edof {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "scalar")]
        channel: String,
        #[arg(long, default_value = "direct")]
        method: String,
        /// Fixed parameter as KEY=VALUE, e.g. D=10 L=4 M=8; repeatable.
        #[arg(short = 'p', long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long, value_enum, default_value_t = Unit::Lambda)]
        unit: Unit,
        #[arg(long, default_value_t = 30e9)]
        frequency_hz: f64,
        /// Apply the default mutual-coupling model.
        #[arg(long)]
        coupled: bool,
    },
    /// Run a sweep described by a TOML file.
    Sweep {
        config: PathBuf,
        /// Fill the runtime_s column (makes output time-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Regenerate the data of a figure preset into the output directory.
    Figure {
        name: String,
        #[arg(long)]
        timings: bool,
    },
    /// Coupling matrix of a dipole array, or checks of a loaded impedance file.
    Coupling {
        #[arg(long, value_enum, default_value_t = ArrayKind::Upa)]
        array: ArrayKind,
        /// Antennas per side (UPA) or in total (ULA).
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Side length in wavelengths.
        #[arg(long, default_value_t = 2.0)]
        length: f64,
        #[arg(long, default_value_t = 30e9)]
        frequency_hz: f64,
        /// Impedance file to load instead of computing one.
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Capacity from EDoF, channel gain, power and noise.
    Capacity {
        #[arg(long)]
        edof: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        noise: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    M,
    Lambda,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrayKind {
    Upa,
    Ula,
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("not a number: {v:?}"))?;
    Ok((k.trim().to_string(), v))
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("NFEDOF_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("NFEDOF_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn write_output(out: Option<&Path>, rows: &[SweepRow], timings: bool) -> Result<()> {
    match out {
        Some(path) => emit_csv(rows, path, timings),
        None => write_rows(rows, io::stdout().lock(), timings),
    }
}

fn report_failures(rows: &[SweepRow]) -> Result<()> {
    for r in rows.iter().filter(|r| r.over_budget) {
        eprintln!("point {} exceeded the time budget ({:.1} s)", r.index, r.runtime_s);
    }
    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!("point {}: {}", r.index, r.error.as_deref().unwrap_or_default());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Numerical {
            message: format!("{} of {} sweep points failed", failed.len(), rows.len()),
            condition: f64::NAN,
        })
    }
}

fn comparison_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    out.with_file_name(format!("{stem}.compare.csv"))
}

fn run_spec(spec: &SweepSpec, out: Option<&Path>, timings: bool) -> Result<Vec<SweepRow>> {
    let outcome = run_with_comparison(spec)?;
    write_output(out, &outcome.rows, timings)?;
    if spec.compare.is_some() {
        match out {
            Some(path) => emit_comparison_csv(&outcome.comparison, &comparison_path(path))?,
            None => eprintln!("comparison skipped: it is written next to --out"),
        }
    }
    let mut all = outcome.rows;
    all.extend(outcome.compare_rows);
    Ok(all)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Edof {
            scenario,
            channel,
            method,
            params,
            unit,
            frequency_hz,
            coupled,
        } => {
            let mut fixed: BTreeMap<String, f64> = params.into_iter().collect();
            let d = fixed
                .remove("D")
                .ok_or_else(|| Error::Config("edof needs the distance, e.g. -p D=10".into()))?;
            let spec = SweepSpec {
                scenario: scenario.parse()?,
                channel: channel.parse()?,
                method: method.parse()?,
                sweep: SweepRange {
                    variable: SweepVariable::D,
                    start: d,
                    stop: d,
                    steps: 1,
                },
                fixed,
                length_unit: match unit {
                    Unit::M => LengthUnit::Meter,
                    Unit::Lambda => LengthUnit::Wavelength,
                },
                frequency_hz,
                seed: cli.seed.unwrap_or(0),
                coupling: coupled.then(CouplingSpec::default),
                compare: None,
                budget_s: None,
            };
            let rows = nfedof::workbench::run_sweep(&spec)?;
            let row = &rows[0];
            if let Some(e) = &row.error {
                return Err(Error::Numerical {
                    message: e.clone(),
                    condition: f64::NAN,
                });
            }
            match out {
                Some(path) => emit_csv(&rows, path, false)?,
                None => {
                    let mut so = io::stdout().lock();
                    let w = |e| Error::io("<stdout>", e);
                    writeln!(so, "edof {}", row.edof.unwrap_or(f64::NAN)).map_err(w)?;
                    for (k, v) in &row.diagnostics {
                        writeln!(so, "{k} {v}").map_err(w)?;
                    }
                }
            }
            Ok(())
        }
        Command::Sweep { config, timings } => {
            let text = fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let mut spec = SweepSpec::from_toml(&text)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let rows = run_spec(&spec, out, timings)?;
            report_failures(&rows)
        }
        Command::Figure { name, timings } => {
            let bundle = figure_preset(&name)?;
            let dir = out.unwrap_or(Path::new("."));
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let mut all = Vec::new();
            for mut s in bundle {
                if let Some(seed) = cli.seed {
                    s.spec.seed = seed;
                }
                let path = dir.join(format!("{name}_{}.csv", s.label));
                all.extend(run_spec(&s.spec, Some(&path), timings)?);
                eprintln!("wrote {}", path.display());
            }
            report_failures(&all)
        }
        Command::Coupling {
            array,
            count,
            length,
            frequency_hz,
            load,
        } => {
            let wave = WaveParams::from_frequency(frequency_hz)?;
            let params = CouplingParams::defaults(&wave);
            let zc: ImpedanceMatrix = match &load {
                Some(path) => {
                    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
                    read_impedance_file(BufReader::new(f))?
                }
                None => {
                    let side = length * wave.wavelength;
                    let g = match array {
                        ArrayKind::Upa => ArrayGeometry::Upa(UpaGeometry::square(count, side, 0.0)?),
                        ArrayKind::Ula => ArrayGeometry::Ula(UlaGeometry::new(count, side, 0.0)?),
                    };
                    mutual_impedance_matrix(&g, &params, wave.wavenumber)?
                }
            };
            let z = coupling_matrix(&zc, zc.self_impedance(), params.load)?;
            let n = zc.size();
            let dev = z.sub(&ComplexMatrix::identity(n)).frobenius_norm_sq().sqrt();
            let za = zc.self_impedance();
            eprintln!("antennas {n}");
            eprintln!("self impedance {:.6} {:+.6}j ohm", za.re, za.im);
            eprintln!("coupling deviation |Z - I|_F {dev:.6e}");
            if let Some(path) = out {
                let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
                let mut w = io::BufWriter::new(f);
                write_impedance_file(&zc, &mut w).map_err(|e| Error::io(path, e))?;
                w.flush().map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        }
        Command::Capacity {
            edof,
            alpha,
            power,
            noise,
        } => {
            let c = capacity(&CapacityInputs {
                edof,
                alpha,
                power,
                noise,
            })?;
            println!("{c}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nfedof: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
