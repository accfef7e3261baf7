mod args;
mod config;
mod plan;

use std::process::ExitCode;

use clap::Parser;

use pegsearch::environment::{GeometryRanges, StateVariant};
use pegsearch::harness::{parse_id_list, Baseline, RandomInitGrid, TrainConfig, DEFAULT_SPIRAL_RINGS};
use pegsearch::strategies::DEFAULT_CHAMFER_MARGIN_MM;
use pegsearch::Result;

use args::{Cli, Command, EnvArgs, MethodArg, StateArg, SuiteArgs};
use config::{resolve_agent, resolve_env, FileConfig};
use plan::{BaselinePlan, EvalPlan, GenWallPlan, Plan, RunManifest, SaliencyPlan, SuitePlan, TrainPlan};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

fn variant(s: StateArg) -> StateVariant {
    match s {
        StateArg::S1 => StateVariant::S1,
        StateArg::S2 => StateVariant::S2,
    }
}

fn suite(s: SuiteArgs, env: &EnvArgs) -> Result<SuitePlan> {
    let file = FileConfig::load(env.config.as_deref())?;
    let (env, peg) = resolve_env(&file, env)?;
    Ok(SuitePlan {
        wall: s.wall,
        holes: parse_id_list(&s.holes)?,
        init_positions: parse_id_list(&s.init_positions)?,
        per_cell: s.per_cell,
        seed: s.seed,
        traces: s.traces,
        env,
        peg,
        out: s.out,
    })
}

fn build(command: Command) -> Result<Plan> {
    Ok(match command {
        Command::GenWall(a) => {
            let mut geometry = GeometryRanges::default();
            if let Some(lo) = a.chamfer_min_mm {
                geometry.chamfer_width_mm[0] = lo;
            }
            if let Some(hi) = a.chamfer_max_mm {
                geometry.chamfer_width_mm[1] = hi;
            }
            Plan::GenWall(GenWallPlan { holes: a.holes, seed: a.seed, geometry, out: a.out })
        }
        Command::Train(a) => {
            let file = FileConfig::load(a.env.config.as_deref())?;
            let (env, peg) = resolve_env(&file, &a.env)?;
            let d = TrainConfig::default();
            let init_positions = match &a.init_positions {
                Some(list) => parse_id_list(list)?,
                None => d.init_positions.clone(),
            };
            let train = TrainConfig {
                episodes: a.episodes.or(file.episodes).unwrap_or(d.episodes),
                hole_id: a.hole.unwrap_or(d.hole_id),
                init_positions,
                variant: a.state.map(variant).unwrap_or(d.variant),
                seed: a.seed.or(file.seed).unwrap_or(d.seed),
                agent: resolve_agent(&file, &a.agent)?,
                env,
                peg,
            };
            train.validate()?;
            Plan::Train(TrainPlan { wall: a.wall, train, out: a.out })
        }
        Command::Eval(a) => Plan::Eval(EvalPlan {
            model: a.model,
            variant: a.state.map(variant),
            random_inits: a.random_inits.then(RandomInitGrid::default),
            suite: suite(a.suite, &a.env)?,
        }),
        Command::Baseline(a) => {
            let method = match a.method {
                MethodArg::Spiral => Baseline::Spiral { rings: a.rings.unwrap_or(DEFAULT_SPIRAL_RINGS) },
                MethodArg::Moment => Baseline::Moment { margin_mm: a.margin_mm.unwrap_or(DEFAULT_CHAMFER_MARGIN_MM) },
            };
            Plan::Baseline(BaselinePlan { method, suite: suite(a.suite, &a.env)? })
        }
        Command::Saliency(a) => {
            let file = FileConfig::load(a.env.config.as_deref())?;
            let (env, peg) = resolve_env(&file, &a.env)?;
            Plan::Saliency(SaliencyPlan {
                model: a.model,
                wall: a.wall,
                holes: parse_id_list(&a.holes)?,
                init_positions: parse_id_list(&a.init_positions)?,
                episodes: a.episodes,
                seed: a.seed,
                env,
                peg,
                out: a.out,
            })
        }
        Command::Replay(a) => {
            let mut plan = RunManifest::load(&a.manifest)?.plan()?;
            if let Some(out) = a.out {
                plan.set_out(out);
            }
            plan
        }
    })
}

fn run(cli: Cli) -> Result<()> {
    let plan = build(cli.command)?;
    let summary = plan.execute()?;
    print!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_IO };
            ExitCode::from(code)
        }
    }
}
