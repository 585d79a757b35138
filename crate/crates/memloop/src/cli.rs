//! Command-line interface: simulate, analyze, fit, freq-sweep, repeat,
//! and batch report. Exit codes: 0 success, 1 usage error, 2 data or
//! parse error, 3 analysis failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{analyze, correlate, AnalysisConfig, AnalysisReport};
use crate::dataio::{
    read_trace_file, report_csv, write_report, write_report_table, write_trace_file, RunConfig,
};
use crate::devices::{ActiveMemristorParams, InternalSourceSpec, SourceModel};
use crate::error::{Error, Result};
use crate::estimation::estimate_params;
use crate::simulator::{add_current_noise, frequency_sweep, run_repeated, run_sweep, IVTrace};

#[derive(Parser)]
#[command(
    name = "memloop",
    version,
    about = "Active-memristor I-V simulation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one sweep from a run config and write the trace CSV
    Simulate(SimulateArgs),
    /// Analyze a trace CSV into a report document
    Analyze(AnalyzeArgs),
    /// Fit device parameters to a trace and report them
    Fit(FitArgs),
    /// Re-run the sweep at several timestep multipliers and tabulate
    FreqSweep(FreqSweepArgs),
    /// Run repeated sweeps on one device, tracking R0 per sweep
    Repeat(RepeatArgs),
    /// Analyze every trace in a directory and correlate the metrics
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Off,
    Constant,
    Sine,
    Bpwl,
}

impl From<SourceArg> for SourceModel {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Off => SourceModel::Off,
            SourceArg::Constant => SourceModel::Constant,
            SourceArg::Sine => SourceModel::Sine,
            SourceArg::Bpwl => SourceModel::BipolarPiecewiseLinear,
        }
    }
}

/// Waveform and source overrides shared by the config-driven commands.
#[derive(Args, Clone)]
struct Overrides {
    /// Override the waveform timestep in seconds
    #[arg(long, value_name = "S")]
    timestep: Option<f64>,
    /// Override the waveform amplitude in volts
    #[arg(long, value_name = "V")]
    amplitude: Option<f64>,
    /// Override the waveform sample count
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Override the internal source model
    #[arg(long, value_enum)]
    source: Option<SourceArg>,
    /// Override the internal source amplitude in amperes
    #[arg(long, value_name = "A")]
    iq: Option<f64>,
    /// Override the internal source half-period in seconds
    #[arg(long, value_name = "S")]
    half_period: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(t) = self.timestep {
            cfg.waveform.timestep_s = t;
        }
        if let Some(a) = self.amplitude {
            cfg.waveform.amplitude_v = a;
        }
        if let Some(n) = self.samples {
            cfg.waveform.samples = n;
        }
        if self.source.is_some() || self.iq.is_some() || self.half_period.is_some() {
            let mut src = cfg.device.source.unwrap_or_else(InternalSourceSpec::off);
            if let Some(model) = self.source {
                src.model = model.into();
            }
            if let Some(iq) = self.iq {
                src.amplitude_a = iq;
            }
            if let Some(hp) = self.half_period {
                src.half_period_s = hp;
            }
            cfg.device.source = Some(src);
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Run config (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Trace CSV destination (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also emit a gnuplot data file and script next to --out
    #[arg(long)]
    plot: bool,
    /// Relative Gaussian current noise (fraction of the RMS current)
    #[arg(long, value_name = "FRAC", default_value_t = 0.0)]
    noise: f64,
    /// Seed for the noise generator
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trace CSV to analyze
    trace: PathBuf,
    /// Optional run config supplying [analysis] threshold overrides
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Report destination (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit the report as one-row CSV instead of JSON
    #[arg(long)]
    csv: bool,
    /// Also emit a gnuplot resistance-time data file and script
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Trace CSV to fit
    trace: PathBuf,
    /// Internal source model to fit
    #[arg(long, value_enum, default_value = "constant")]
    source: SourceArg,
    /// Report destination (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FreqSweepArgs {
    /// Run config (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Timestep multipliers, e.g. 1,2,4
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    multipliers: Vec<f64>,
    /// Table destination (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct RepeatArgs {
    /// Run config (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Number of consecutive sweeps
    #[arg(short = 'n', long = "sweeps", value_name = "N")]
    sweeps: usize,
    /// Base path for the per-sweep trace CSVs
    #[arg(long, value_name = "PATH", default_value = "trace.csv")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of trace CSVs
    dir: PathBuf,
    /// Batch table destination (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Parse `argv` and run; returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("MEMLOOP_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotSegmentable(_)
        | Error::InsufficientData(_)
        | Error::DegenerateFit(_)
        | Error::UndefinedCorrelation(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Fit(args) => cmd_fit(args),
        Command::FreqSweep(args) => cmd_freq_sweep(args),
        Command::Repeat(args) => cmd_repeat(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<(RunConfig, ActiveMemristorParams)> {
    let mut cfg = RunConfig::from_file(path)?;
    overrides.apply(&mut cfg);
    let params = cfg.device.params()?;
    cfg.waveform.validate()?;
    Ok((cfg, params))
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let (cfg, params) = load_config(&args.config, &args.overrides)?;
    let (mut trace, _) = run_sweep(&params, &cfg.waveform, None)?;
    if args.noise > 0.0 {
        trace = add_current_noise(&trace, args.noise, args.seed);
    }
    let out = args
        .out
        .or_else(|| cfg.output.trace.as_ref().map(PathBuf::from));
    match &out {
        Some(path) => {
            write_trace_file(&trace, path)?;
            log::info!("wrote {} samples to {}", trace.len(), path.display());
        }
        None => print!("{}", crate::dataio::write_trace(&trace)),
    }
    if args.plot {
        match &out {
            Some(path) => plot_iv(&trace, path)?,
            None => log::warn!("--plot needs --out; skipping plot files"),
        }
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let acfg = analysis_config_from(args.config.as_deref())?;
    let read = read_trace_file(&args.trace)?;
    for w in &read.warnings {
        log::warn!("{}: {w}", args.trace.display());
    }
    let report = analyze(&read.trace, &acfg)?;
    let text = if args.csv {
        report_csv(&report, None)
    } else {
        write_report(&report, None)
    };
    write_or_print(&text, args.out.as_deref())?;
    if args.plot {
        let stem = args.out.clone().unwrap_or_else(|| args.trace.clone());
        plot_resistance(&read.trace, &report, &acfg, &stem)?;
    }
    Ok(())
}

fn analysis_config_from(config: Option<&Path>) -> Result<AnalysisConfig> {
    Ok(match config {
        Some(path) => RunConfig::from_file(path)?.analysis_config(),
        None => AnalysisConfig::default(),
    })
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let read = read_trace_file(&args.trace)?;
    for w in &read.warnings {
        log::warn!("{}: {w}", args.trace.display());
    }
    let report = analyze(&read.trace, &AnalysisConfig::default())?;
    let fit = estimate_params(&read.trace, args.source.into(), None)?;
    write_or_print(&write_report(&report, Some(&fit)), args.out.as_deref())
}

fn cmd_freq_sweep(args: FreqSweepArgs) -> Result<()> {
    let (cfg, params) = load_config(&args.config, &args.overrides)?;
    let reports = frequency_sweep(
        &params,
        &cfg.waveform,
        &args.multipliers,
        &cfg.analysis_config(),
    )?;
    let mut table = String::from(
        "period_s,classification,r0_ohms,hysteresis_h_va,hysteresis_hbar,g,energy_j,avg_power_w\n",
    );
    for (period, report) in &reports {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        table.push_str(&format!(
            "{period},{},{},{:e},{},{},{:e},{:e}\n",
            report.classification.as_str(),
            opt(report.r0_ohms),
            report.hysteresis_h,
            opt(report.hysteresis_hbar),
            opt(report.g),
            report.energy_j,
            report.avg_power_w,
        ));
    }
    write_or_print(&table, args.out.as_deref())
}

fn cmd_repeat(args: RepeatArgs) -> Result<()> {
    let (cfg, params) = load_config(&args.config, &args.overrides)?;
    let traces = run_repeated(&params, &cfg.waveform, args.sweeps)?;
    let acfg = cfg.analysis_config();
    let mut table = String::from("sweep_index,path,r0_ohms,hysteresis_h_va,classification\n");
    for trace in &traces {
        let path = sweep_path(&args.out, trace.meta.sweep_index);
        write_trace_file(trace, &path)?;
        let report = analyze(trace, &acfg)?;
        table.push_str(&format!(
            "{},{},{},{:e},{}\n",
            trace.meta.sweep_index,
            path.display(),
            report.r0_ohms.map(|r| format!("{r:e}")).unwrap_or_default(),
            report.hysteresis_h,
            report.classification.as_str(),
        ));
    }
    print!("{table}");
    Ok(())
}

fn sweep_path(base: &Path, sweep_index: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_sweep{sweep_index}.{ext}"))
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no .csv traces in {}",
            args.dir.display()
        )));
    }

    let acfg = AnalysisConfig::default();
    let mut rows = Vec::new();
    for path in &paths {
        let read = read_trace_file(path)?;
        for w in &read.warnings {
            log::warn!("{}: {w}", path.display());
        }
        match analyze(&read.trace, &acfg) {
            Ok(report) => {
                let label = path
                    .file_name()
                    .and_then(|s| s.to_str())
                    .unwrap_or("trace")
                    .to_string();
                rows.push((label, read.trace.meta.clone(), report));
            }
            Err(e) => log::warn!("skipping {}: {e}", path.display()),
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("no analyzable traces".into()));
    }

    write_or_print(&write_report_table(&rows), args.out.as_deref())?;
    let summary = correlation_summary(&rows, &acfg);
    if args.out.is_none() {
        println!();
    }
    print!("{summary}");
    Ok(())
}

/// Pairwise correlation study over the batch metrics, mirroring the
/// tube-length and starting-resistance comparisons of the measurement
/// protocol.
fn correlation_summary(
    rows: &[(String, crate::simulator::TraceMeta, AnalysisReport)],
    cfg: &AnalysisConfig,
) -> String {
    type Getter<'a> = &'a dyn Fn(&crate::simulator::TraceMeta, &AnalysisReport) -> Option<f64>;
    let r0: Getter = &|_, r| r.r0_ohms;
    let h: Getter = &|_, r| Some(r.hysteresis_h);
    let hbar: Getter = &|_, r| r.hysteresis_hbar;
    let power: Getter = &|_, r| Some(r.avg_power_w);
    let tube: Getter = &|m, _| m.tube_length_mm;
    let sep: Getter = &|m, _| m.electrode_separation_mm;

    let pairs: [(&str, Getter, Getter); 7] = [
        ("r0_vs_tube_length", r0, tube),
        ("hbar_vs_tube_length", hbar, tube),
        ("h_vs_tube_length", h, tube),
        ("h_vs_r0", h, r0),
        ("r0_vs_electrode_separation", r0, sep),
        ("avg_power_vs_r0", power, r0),
        ("avg_power_vs_electrode_separation", power, sep),
    ];
    let mut out = String::new();
    for (label, x, y) in pairs {
        let data: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|(_, meta, report)| Some((x(meta, report)?, y(meta, report)?)))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
        match correlate(&xs, &ys) {
            Ok((r, n)) => {
                let verdict = if r.abs() < cfg.correlation_threshold {
                    "no correlation"
                } else {
                    "correlated"
                };
                let caveat = if n < 10 {
                    " (n < 10, weak evidence)"
                } else {
                    ""
                };
                out.push_str(&format!("{label}: r={r:.3} n={n} -> {verdict}{caveat}\n"));
            }
            Err(e) => out.push_str(&format!("{label}: undefined ({e})\n")),
        }
    }
    out
}

fn plot_iv(trace: &IVTrace, out: &Path) -> Result<()> {
    let dat = out.with_extension("iv.dat");
    let gp = out.with_extension("gp");
    let mut data = String::new();
    for s in &trace.samples {
        data.push_str(&format!("{:e} {:e}\n", s.v_volts, s.i_amps));
    }
    fs::write(&dat, data)?;
    let script = format!(
        "set xlabel 'V (V)'\nset ylabel 'I (A)'\nset grid\n\
         plot '{}' using 1:2 with linespoints title 'I-V loop'\n\
         pause -1\n",
        dat.display()
    );
    fs::write(&gp, script)?;
    log::info!("wrote {} and {}", dat.display(), gp.display());
    Ok(())
}

fn plot_resistance(
    trace: &IVTrace,
    report: &AnalysisReport,
    cfg: &AnalysisConfig,
    stem: &Path,
) -> Result<()> {
    let points = crate::analysis::instantaneous_resistance(trace, cfg)?;
    let dat = stem.with_extension("rt.dat");
    let gp = stem.with_extension("gp");
    let mut data = String::new();
    for p in points.iter().filter(|p| !p.masked) {
        data.push_str(&format!("{:e} {:e}\n", p.t_s, p.m_ohms));
    }
    fs::write(&dat, data)?;

    let mut script = String::from("set xlabel 't (s)'\nset ylabel 'R (ohm)'\nset grid\n");
    let mut plots = vec![format!(
        "'{}' using 1:2 with points title 'instantaneous resistance'",
        dat.display()
    )];
    for id in [1u8, 3u8] {
        if let Some(fit) = report.segment_fit(id) {
            script.push_str(&format!(
                "f{id}(x) = {:e} * x + {:e}\n",
                fit.gradient_ohms_per_s, fit.intercept_ohms
            ));
            plots.push(format!("f{id}(x) title 'segment {id} tangent'"));
        }
    }
    script.push_str(&format!("plot {}\npause -1\n", plots.join(", ")));
    fs::write(&gp, script)?;
    log::info!("wrote {} and {}", dat.display(), gp.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_paths_carry_the_index() {
        assert_eq!(
            sweep_path(Path::new("out/run.csv"), 2),
            Path::new("out/run_sweep2.csv")
        );
        assert_eq!(sweep_path(Path::new("t.csv"), 0), Path::new("t_sweep0.csv"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(dispatch(["memloop", "no-such-command"]), 1);
        assert_eq!(dispatch(["memloop"]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(dispatch(["memloop", "--help"]), 0);
    }
}
