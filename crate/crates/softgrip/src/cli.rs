//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a run fails or a mission does not
//! succeed, 2 on bad configuration or usage.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use softgrip_core::batch::{Batch, BatchSummary};
use softgrip_core::experiment::{step_response_experiment, StepProfile};
use softgrip_core::mission::{run_mission, MissionOutcome, MissionScript};
use softgrip_core::{Base, ControllerKind, ObjectSpec};

use crate::config::{ConfigError, RunConfig};
use crate::fixtures::ObjectSet;
use crate::presets::{self, Preset};
use crate::runner::run_batch;
use crate::script::load_script;
use crate::trace::write_trace;

#[derive(Debug, Parser)]
#[command(name = "softgrip", version, about = "Soft pneumatic gripper simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub controller: Option<ControllerArg>,
    /// Named experiment preset
    #[arg(long, global = true)]
    pub preset: Option<Preset>,
    /// Monte Carlo trials per batch row
    #[arg(long, global = true)]
    pub trials: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub base: Option<BaseArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-loop step response for one or both controllers
    StepResponse {
        #[arg(long, value_enum, default_value_t = ProfileArg::Standard)]
        profile: ProfileArg,
    },
    /// One scripted mission with a full trace
    Mission {
        /// Mission script file; replaces --preset
        #[arg(long)]
        script: Option<PathBuf>,
        /// Object fixture name
        #[arg(long)]
        object: Option<String>,
        /// Object mass override, g
        #[arg(long)]
        mass: Option<f64>,
    },
    /// Monte Carlo success rates for a preset
    Batch {
        #[arg(long)]
        object: Option<String>,
        #[arg(long)]
        mass: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerArg {
    Ffp,
    P,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Ffp => ControllerKind::FeedForwardProportional,
            ControllerArg::P => ControllerKind::ProportionalOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    X,
    H,
}

impl From<BaseArg> for Base {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::X => Base::XBase,
            BaseArg::H => Base::HBase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Standard,
    DeflateOnly,
    InflateOnly,
}

impl ProfileArg {
    fn profile(self) -> StepProfile {
        match self {
            ProfileArg::Standard => StepProfile::standard(),
            ProfileArg::DeflateOnly => StepProfile::deflate_only(),
            ProfileArg::InflateOnly => StepProfile::inflate_only(),
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Resolved settings shared by all subcommands.
struct Context {
    cfg: RunConfig,
    objects: ObjectSet,
    out: PathBuf,
    controller: Option<ControllerKind>,
    base: Option<Base>,
}

impl Context {
    fn from_args(a: &CommonArgs) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::load(a.config.as_deref())?;
        if let Some(s) = a.seed {
            cfg.run.seed = s;
        }
        if let Some(t) = a.trials {
            cfg.run.trials = t;
        }
        if let Some(o) = &a.out {
            cfg.run.out = o.clone();
        }
        cfg.validate()?;
        let objects = match &cfg.run.objects {
            Some(p) => ObjectSet::load(p)?,
            None => ObjectSet::builtin(),
        };
        Ok(Self {
            out: cfg.run.out.clone(),
            controller: a.controller.map(Into::into),
            base: a.base.map(Into::into).or(cfg.run.base),
            cfg,
            objects,
        })
    }

    fn controller(&self) -> ControllerKind {
        self.controller.unwrap_or(self.cfg.run.controller)
    }

    fn bases(&self, preset: Preset) -> Vec<Base> {
        match self.base {
            Some(b) => vec![b],
            None => preset.default_bases().to_vec(),
        }
    }

    fn object(
        &self,
        preset: Preset,
        name: Option<&str>,
        mass: Option<f64>,
    ) -> Result<(String, ObjectSpec), ConfigError> {
        let name = name
            .map(str::to_string)
            .or_else(|| self.cfg.mission.object.clone())
            .or_else(|| preset.default_object().map(str::to_string))
            .ok_or_else(|| ConfigError::Invalid(format!("preset `{preset}` needs --object")))?;
        let mut spec = self.objects.get(&name)?.spec();
        if let Some(m) = mass.or(self.cfg.mission.object_mass) {
            if !(m > 0.0 && m.is_finite()) {
                return Err(ConfigError::Invalid("--mass must be positive".into()));
            }
            spec.mass = m;
        }
        Ok((name, spec))
    }

    fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| runtime(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

fn step_response(ctx: &Context, profile: ProfileArg) -> Result<bool, CliError> {
    let kinds = match ctx.controller {
        Some(k) => vec![k],
        None => vec![
            ControllerKind::FeedForwardProportional,
            ControllerKind::ProportionalOnly,
        ],
    };
    let base = ctx.base.unwrap_or(Base::HBase);
    let sim = ctx.cfg.sim_config(base);
    let profile = profile.profile();

    let mut metrics = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    metrics
        .write_record([
            "controller",
            "segment_start_s",
            "mode",
            "setpoint_kpa",
            "rise_time_s",
            "settle_time_s",
            "steady_state_error_kpa",
        ])
        .map_err(runtime)?;
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<10} {:>8} {:>10} {:>8} {:>8} {:>8}",
        "controller", "start_s", "mode", "r_kpa", "rise_s", "settle_s"
    );

    for kind in kinds {
        let resp = step_response_experiment(kind, &profile, &sim, ctx.cfg.run.seed).map_err(runtime)?;
        let mut buf = Vec::new();
        write_trace(&mut buf, &resp.trace).map_err(runtime)?;
        write_file(&ctx.output(&format!("step_response_{}.csv", kind.as_str()))?, &buf)?;
        for s in &resp.segments {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            metrics
                .write_record([
                    kind.as_str().to_string(),
                    s.start_s.to_string(),
                    s.mode.as_str().to_string(),
                    s.setpoint.to_string(),
                    opt(s.rise_time_s),
                    opt(s.settle_time_s),
                    s.steady_state_error_kpa.to_string(),
                ])
                .map_err(runtime)?;
            let _ = writeln!(
                table,
                "{:<10} {:>8.2} {:>10} {:>8.1} {:>8} {:>8}",
                kind.as_str(),
                s.start_s,
                s.mode.as_str(),
                s.setpoint,
                fmt_opt(s.rise_time_s),
                fmt_opt(s.settle_time_s)
            );
        }
    }
    let bytes = metrics.into_inner().map_err(runtime)?;
    write_file(&ctx.output("step_response_metrics.csv")?, &bytes)?;
    print!("{table}");
    Ok(true)
}

fn mission_script(
    ctx: &Context,
    preset: Preset,
    object: Option<&str>,
    mass: Option<f64>,
) -> Result<MissionScript, ConfigError> {
    let k = ctx.controller();
    let seed = ctx.cfg.run.seed;
    let m = &ctx.cfg.mission;
    Ok(match preset {
        Preset::AerialGrasp => presets::aerial_grasp(ctx.object(preset, object, mass)?.1, m.offset, k, seed),
        Preset::Payload => presets::payload(ctx.object(preset, object, mass)?.1, m.offset, k, seed),
        Preset::GraspMatrix => presets::static_grasp(ctx.object(preset, object, mass)?.1, m.offset, k, seed),
        Preset::LandingGround | Preset::LandingTilt => {
            presets::landing(m.incline.unwrap_or(preset.default_incline()), k, seed)
        }
        Preset::StepResponse => {
            return Err(ConfigError::Invalid(
                "preset `step-response` runs under the step-response subcommand".into(),
            ))
        }
    })
}

fn mission(
    ctx: &Context,
    preset: Option<Preset>,
    script: Option<&Path>,
    object: Option<&str>,
    mass: Option<f64>,
) -> Result<bool, CliError> {
    let (label, preset_for_base, script) = match script {
        Some(path) => {
            let s = load_script(path, &ctx.objects, ctx.controller(), ctx.cfg.run.seed)?;
            // --controller wins over the file
            let s = MissionScript {
                controller: ctx.controller.unwrap_or(s.controller),
                ..s
            };
            ("script".to_string(), None, s)
        }
        None => {
            let p = preset.unwrap_or(Preset::AerialGrasp);
            (p.name().to_string(), Some(p), mission_script(ctx, p, object, mass)?)
        }
    };
    let base = match preset_for_base {
        Some(p) => ctx.bases(p)[0],
        None => ctx.base.unwrap_or(Base::HBase),
    };
    let run = run_mission(&script, &ctx.cfg.sim_config(base)).map_err(runtime)?;
    let mut buf = Vec::new();
    write_trace(&mut buf, &run.trace).map_err(runtime)?;
    let path = ctx.output(&format!("mission_{label}_{}.csv", base.as_str()))?;
    write_file(&path, &buf)?;

    let r = &run.result;
    let outcome = match &r.outcome {
        MissionOutcome::Success => "success".to_string(),
        MissionOutcome::Failure(f) => format!("failure ({})", f.as_str()),
    };
    println!("mission {label} on {}-base: {outcome}", base.as_str());
    println!("  rise_time_s       {}", fmt_opt(r.metrics.rise_time_s));
    println!("  settle_time_s     {}", fmt_opt(r.metrics.settle_time_s));
    println!("  steady_state_kpa  {:.3}", r.metrics.steady_state_error_kpa);
    println!("  hold_satisfied    {}", r.metrics.hold_satisfied);
    println!("  trace             {}", path.display());
    Ok(r.outcome.is_success())
}

struct Row {
    preset: Preset,
    base: Base,
    object: String,
    summary: BatchSummary,
}

fn batch_rows(ctx: &Context, preset: Preset, object: Option<&str>, mass: Option<f64>) -> Result<Vec<Row>, CliError> {
    let mut jobs: Vec<(Base, String, MissionScript, f64)> = Vec::new();
    let k = ctx.controller();
    let seed = ctx.cfg.run.seed;
    let jitter = ctx.cfg.run.offset_jitter;
    for base in ctx.bases(preset) {
        match preset {
            Preset::GraspMatrix if object.is_none() && ctx.cfg.mission.object.is_none() => {
                for (name, fx) in ctx.objects.grasp_set() {
                    let mut spec = fx.spec();
                    if let Some(m) = mass {
                        spec.mass = m;
                    }
                    let s = presets::static_grasp(spec, ctx.cfg.mission.offset, k, seed);
                    jobs.push((base, name.to_string(), s, jitter));
                }
            }
            Preset::LandingGround | Preset::LandingTilt => {
                jobs.push((base, "-".into(), mission_script(ctx, preset, object, mass)?, 0.0));
            }
            _ => {
                let name = ctx.object(preset, object, mass)?.0;
                jobs.push((base, name, mission_script(ctx, preset, object, mass)?, jitter));
            }
        }
    }
    jobs.into_iter()
        .map(|(base, object, template, offset_jitter)| {
            let batch = Batch {
                template,
                config: ctx.cfg.sim_config(base),
                trials: ctx.cfg.run.trials,
                seed,
                offset_jitter,
            };
            let summary = run_batch(&batch).map_err(runtime)?;
            Ok(Row {
                preset,
                base,
                object,
                summary,
            })
        })
        .collect()
}

fn batch(ctx: &Context, preset: Option<Preset>, object: Option<&str>, mass: Option<f64>) -> Result<bool, CliError> {
    let preset = preset.unwrap_or(Preset::GraspMatrix);
    if preset == Preset::StepResponse {
        return Err(
            ConfigError::Invalid("preset `step-response` runs under the step-response subcommand".into()).into(),
        );
    }
    let rows = batch_rows(ctx, preset, object, mass)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "preset",
        "base",
        "object",
        "trials",
        "successes",
        "fraction",
        "failures",
    ])
    .map_err(runtime)?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<15} {:<4} {:<22} {:>6} {:>9} {:>8}  failures",
        "preset", "base", "object", "trials", "successes", "fraction"
    );
    for r in &rows {
        let failures: Vec<String> = r.summary.failures.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let failures = failures.join(";");
        w.write_record([
            r.preset.name().to_string(),
            r.base.as_str().to_string(),
            r.object.clone(),
            r.summary.total.to_string(),
            r.summary.success_count.to_string(),
            r.summary.fraction().to_string(),
            failures.clone(),
        ])
        .map_err(runtime)?;
        let _ = writeln!(
            out,
            "{:<15} {:<4} {:<22} {:>6} {:>9} {:>8.3}  {}",
            r.preset.name(),
            r.base.as_str(),
            r.object,
            r.summary.total,
            r.summary.success_count,
            r.summary.fraction(),
            failures
        );
    }
    let bytes = w.into_inner().map_err(runtime)?;
    write_file(&ctx.output("batch_summary.csv")?, &bytes)?;
    Ok(true)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> u8 {
    let result = Context::from_args(&cli.common)
        .map_err(CliError::from)
        .and_then(|ctx| match &cli.command {
            Command::StepResponse { profile } => step_response(&ctx, *profile),
            Command::Mission { script, object, mass } => {
                mission(&ctx, cli.common.preset, script.as_deref(), object.as_deref(), *mass)
            }
            Command::Batch { object, mass } => batch(&ctx, cli.common.preset, object.as_deref(), *mass),
        });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            2
        }
    }
}
