use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cellfree::harness::{
    self, emit, emit_detail, oracle_suite, resolve_point, run_experiment, run_trial, schedule_gap, stats,
    write_rows_csv, ExperimentSpec, Format, Profile, EXHAUSTIVE_CAP,
};
use cellfree::rng::trial_seed;
use cellfree::SystemConfig;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cellfree", version, about = "Cell-free DTDD / full-duplex MIMO experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    /// Base seed; overrides the spec file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials (or instances) per point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,
    /// Also write per-instance detail and convergence traces.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec.
    Run {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Check an experiment spec or a system config and print the resolved configs.
    ValidateConfig { file: PathBuf },
    /// Closed-form SINRs against Monte Carlo on random small networks.
    OracleCheck {
        /// System config TOML; defaults to M=4, N=8, K=6 on the chosen profile.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        mc_trials: usize,
    },
    /// Greedy against exhaustive AP scheduling.
    ScheduleGap {
        /// System config TOML; defaults to M=8, K=8 on the chosen profile.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn base_config(cli: &Cli, file: Option<&PathBuf>, tweak: impl FnOnce(&mut SystemConfig)) -> Result<SystemConfig> {
    if let Some(f) = file {
        return Ok(SystemConfig::from_toml_str(&read(f)?)?);
    }
    let mut cfg = Profile::from(cli.profile.unwrap_or(ProfileArg::Desk)).config();
    tweak(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("results").join(default))
}

fn cmd_run(cli: &Cli, path: &Path, format: FormatArg) -> Result<ExitCode> {
    let mut spec = ExperimentSpec::from_toml_str(&read(path)?)?;
    if let Some(p) = cli.profile {
        spec.profile = p.into();
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if cli.trials.is_some() {
        spec.trials = cli.trials;
    }
    spec.validate()?;
    let dir =
        cli.out.clone().or_else(|| spec.out_dir.clone()).unwrap_or_else(|| PathBuf::from("results").join(&spec.name));
    log::info!("{}: {} arms, {} trials per point", spec.name, spec.arms.len(), spec.trials());
    let table = run_experiment(&spec)?;
    let format = match format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    emit(&table, &spec, &dir, format)?;
    if cli.trace {
        let seed = trial_seed(spec.seed, 0);
        for si in 0..spec.sweep_values().len() {
            for (ai, arm) in spec.arms.iter().enumerate() {
                let cfg = resolve_point(&spec, ai, si)?;
                match run_trial(&cfg, arm, seed) {
                    Ok(d) => emit_detail(&d, &dir.join("detail").join(format!("{}_{si}", arm.name)))?,
                    Err(e) => log::warn!("no detail for {} point {si}: {e}", arm.name),
                }
            }
        }
    }
    for row in table.summary().iter().filter(|r| r.metric == "sum_se") {
        println!(
            "{:<16} {:>10} mean {:8.3}  90%-likely {:8.3}  (n = {})",
            row.arm, row.sweep_value, row.mean, row.p10, row.n
        );
    }
    if !table.failures.is_empty() {
        println!("{} failed trials, see failures.csv", table.failures.len());
    }
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(path: &Path) -> Result<ExitCode> {
    let text = read(path)?;
    match ExperimentSpec::from_toml_str(&text) {
        Ok(spec) => {
            let values = spec.sweep_values();
            for (si, v) in values.iter().enumerate() {
                for (ai, arm) in spec.arms.iter().enumerate() {
                    let cfg = resolve_point(&spec, ai, si)?;
                    println!("# arm {} sweep {}", arm.name, harness::spec::sweep_label(v));
                    println!("{}", cfg.to_toml_string());
                }
            }
            println!("ok: experiment `{}` with {} arms x {} points", spec.name, spec.arms.len(), values.len());
        }
        Err(spec_err) => match SystemConfig::from_toml_str(&text) {
            Ok(cfg) => {
                println!("{}", cfg.to_toml_string());
                println!("ok: system config");
            }
            Err(cfg_err) => {
                bail!("not a valid experiment ({spec_err}) or system config ({cfg_err})")
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(cli: &Cli, config: Option<&PathBuf>, mc_trials: usize) -> Result<ExitCode> {
    let cfg = base_config(cli, config, |c| {
        c.num_aps = 4;
        c.antennas_per_ap = 8;
        c.num_ues = 6;
    })?;
    let instances = cli.trials.unwrap_or(20);
    let rows = oracle_suite(&cfg, instances, mc_trials, cli.seed.unwrap_or(1))?;
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        write_rows_csv(&dir.join("oracle.csv"), &rows)?;
    }
    let bad: Vec<_> = rows.iter().filter(|r| !r.pass()).collect();
    let worst = |comp: &str| {
        rows.iter().filter(|r| (r.component == "sinr") == (comp == "sinr")).map(|r| r.rel_err).fold(0.0, f64::max)
    };
    println!("{} checks over {instances} instances x {{dtdd, fd}}, {mc_trials} realizations each", rows.len());
    println!("worst SINR error {:.4}, worst component error {:.4}", worst("sinr"), worst("component"));
    for r in &bad {
        println!(
            "FAIL instance {} {} {} ue {} {}: closed {:.6e} sampled {:.6e} err {:.4}",
            r.instance, r.duplex, r.direction, r.ue, r.component, r.closed_form, r.sampled, r.rel_err
        );
    }
    Ok(if bad.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_gap(cli: &Cli, config: Option<&PathBuf>) -> Result<ExitCode> {
    let cfg = base_config(cli, config, |c| {
        c.num_aps = 8;
        c.num_ues = 8;
    })?;
    let instances = cli.trials.unwrap_or(50);
    let rows = schedule_gap(&cfg, instances, cli.seed.unwrap_or(1), EXHAUSTIVE_CAP)?;
    let dir = out_dir(cli, "schedule_gap");
    fs::create_dir_all(&dir)?;
    write_rows_csv(&dir.join("gap.csv"), &rows)?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let within = ratios.iter().filter(|&&r| r >= 0.85).count();
    println!("instance   greedy  exhaustive  ratio");
    for r in &rows {
        println!("{:>8} {:8.3} {:11.3} {:6.3}", r.instance, r.greedy, r.exhaustive, r.ratio);
    }
    println!(
        "mean ratio {:.4}, min {:.4}, >= 0.85 on {within}/{} instances, greedy trace monotone on {}/{}",
        stats::mean(&ratios),
        stats::percentile(&ratios, 0.0),
        rows.len(),
        rows.iter().filter(|r| r.monotone).count(),
        rows.len()
    );
    println!("wrote {}", dir.join("gap.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = (|| {
        if let Some(n) = cli.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        match &cli.cmd {
            Command::Run { spec, format } => cmd_run(&cli, spec, *format),
            Command::ValidateConfig { file } => cmd_validate(file),
            Command::OracleCheck { config, mc_trials } => cmd_oracle(&cli, config.as_ref(), *mc_trials),
            Command::ScheduleGap { config } => cmd_gap(&cli, config.as_ref()),
        }
    })();
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
