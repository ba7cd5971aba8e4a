use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use rwctl::dynamics::{FaultEvent, FaultSchedule};
use rwctl::harness::run::{self, AgentKind};
use rwctl::harness::RunConfig;
use rwctl::HarnessError;

#[derive(Parser)]
#[command(name = "rwctl", version, about = "Reaction-wheel attitude control: train, evaluate and compare controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a learning agent, then fly the long scenario with it.
    Train(Common),
    /// Fly the long scenario with PD or a checkpointed agent.
    Eval(Common),
    /// Train and evaluate PD, TD3 and TD3-HD on every configured seed.
    Compare(Common),
    /// Render telemetry CSVs as SVG charts.
    Plot {
        /// Telemetry files; when empty, every telemetry.csv under --out.
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Pd,
    Td3,
    #[value(name = "td3-hd")]
    Td3Hd,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "td3-hd")]
    agent: AgentArg,
    /// Disable hindsight relabeling.
    #[arg(long)]
    no_her: bool,
    /// Disable dimension-wise gradient clipping.
    #[arg(long)]
    no_dwc: bool,
    /// Move every scheduled scenario fault to this time, s.
    #[arg(long)]
    fault_time: Option<f64>,
    /// Scenario length, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Run only this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

impl Common {
    fn kind(&self) -> AgentKind {
        match self.agent {
            AgentArg::Pd => AgentKind::Pd,
            AgentArg::Td3 => AgentKind::Td3,
            AgentArg::Td3Hd => AgentKind::Td3Hd,
        }
    }

    fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.no_her {
            cfg.agent.her_enabled = false;
        }
        if self.no_dwc {
            cfg.agent.dwc_enabled = false;
        }
        if let Some(t) = self.fault_time {
            let entries = cfg.scenario.fault_schedule.entries();
            let moved: Vec<FaultEvent> = if entries.is_empty() {
                vec![FaultEvent { wheel: 0, time: t }]
            } else {
                entries.iter().map(|e| FaultEvent { wheel: e.wheel, time: t }).collect()
            };
            cfg.scenario.fault_schedule = FaultSchedule::new(moved)?;
        }
        if let Some(d) = self.duration {
            cfg.scenario.duration = d;
        }
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train(c) => {
            let cfg = c.resolve()?;
            let kind = c.kind();
            for &seed in &cfg.seeds {
                let dir = if cfg.seeds.len() > 1 {
                    cfg.output_dir.join(format!("seed{seed}"))
                } else {
                    cfg.output_dir.clone()
                };
                let t = run::train_run(&cfg, kind, seed, |p, _| {
                    info!(
                        "seed {seed} step {}: return {:.3}, mean error {:.2} deg",
                        p.env_steps, p.stats.mean_return, p.stats.mean_error_deg
                    )
                })?;
                run::write_train_outputs(&dir, &t)?;
                println!("{} seed {seed}: {}", t.run.meta.variant, summary(&t.run.meta.metrics));
            }
        }
        Command::Eval(c) => {
            let cfg = c.resolve()?;
            let kind = c.kind();
            for &seed in &cfg.seeds {
                let dir = if cfg.seeds.len() > 1 {
                    cfg.output_dir.join(format!("seed{seed}"))
                } else {
                    cfg.output_dir.clone()
                };
                let o = run::eval_run(&cfg, kind, seed, c.checkpoint.as_deref())?;
                run::write_outcome(&dir, &o)?;
                println!("{} seed {seed}: {}", o.meta.variant, summary(&o.meta.metrics));
            }
        }
        Command::Compare(c) => {
            let cfg = c.resolve()?;
            let rows = run::compare(&cfg, &cfg.output_dir, |m| info!("{m}"))?;
            println!("{:<8} {:>6} {:>12} {:>12} {:>10} {:>12} {:>12}", "agent", "seed", "err_pre", "err_post", "settle", "rms_w_post", "smooth");
            for r in rows {
                let m = r.metrics;
                println!(
                    "{:<8} {:>6} {:>12.4} {:>12.4} {:>10} {:>12.3e} {:>12.4}",
                    r.agent,
                    r.seed,
                    m.mean_err_pre_deg,
                    m.mean_err_post_deg,
                    m.settle_time_s.map_or("never".into(), |t| format!("{t:.0}")),
                    m.rms_omega_post,
                    m.torque_smoothness
                );
            }
        }
        Command::Plot { files, out } => {
            let files = if files.is_empty() {
                let root = out.unwrap_or_else(|| RunConfig::default().output_dir);
                find_telemetry(&root)?
            } else {
                files
            };
            if files.is_empty() {
                return Err(HarnessError::Telemetry("no telemetry files found".into()));
            }
            for f in files {
                for p in run::plot_file(&f)? {
                    println!("{}", p.display());
                }
            }
        }
    }
    Ok(())
}

fn summary(m: &rwctl::harness::Metrics) -> String {
    format!(
        "error pre {:.3} deg, post {:.3} deg, settle {}, rms omega post {:.3e} rad/s",
        m.mean_err_pre_deg,
        m.mean_err_post_deg,
        m.settle_time_s.map_or("never".into(), |t| format!("{t:.0} s")),
        m.rms_omega_post
    )
}

fn find_telemetry(root: &std::path::Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == "telemetry.csv") {
                found.push(p);
            }
        }
    }
    found.sort();
    Ok(found)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
