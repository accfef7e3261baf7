use rand::Rng;

use super::{EpisodeRecord, TrainConfig};
use crate::agent::{select_action, sync_target, train_step, ActionMode, ReplayBuffer, Transition};
use crate::environment::{init_position, Outcome, SearchEnv, WallModel};
use crate::error::Result;
use crate::neuralnet::{init_network, AdamState, Checkpoint, TrainingMeta};
use crate::rng::{derive_seed, stream, tag};

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub records: Vec<EpisodeRecord>,
}

/// Runs the full learning loop on `cfg.hole_id` of `wall`.
///
/// Each episode starts from a uniformly drawn training position, acts with
/// Boltzmann exploration, stores every transition, and updates the main
/// network every `train_every_steps` steps once the buffer holds a batch.
/// The target network is refreshed every `target_sync_episodes` episodes.
pub fn train(wall: &WallModel, cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    wall.hole(cfg.hole_id)?;
    let init_xy = cfg
        .init_positions
        .iter()
        .map(|&p| init_position(p))
        .collect::<Result<Vec<_>>>()?;

    let mut env = SearchEnv::new(
        wall.clone(),
        cfg.env.clone(),
        cfg.peg.clone(),
        derive_seed(cfg.seed, &[tag::ENV_NOISE]),
    )?;
    let mut main = init_network(derive_seed(cfg.seed, &[tag::NET_INIT]));
    let mut target = main.clone();
    let mut adam = AdamState::for_network(&main, cfg.agent.alpha);
    let mut buffer = ReplayBuffer::new(cfg.agent.buffer_capacity);
    let mut policy_rng = stream(cfg.seed, &[tag::POLICY]);
    let mut replay_rng = stream(cfg.seed, &[tag::REPLAY]);
    let mut start_rng = stream(cfg.seed, &[tag::INIT_POS]);

    let mut records = Vec::with_capacity(cfg.episodes);
    let mut global_step: u64 = 0;
    for episode in 1..=cfg.episodes {
        let pick = start_rng.random_range(0..init_xy.len());
        let mut obs = env.reset(cfg.hole_id, init_xy[pick], cfg.variant)?;
        let mut total = 0.0;
        if env.state().expect("reset").done {
            total = cfg.env.r_foundhole;
        }
        while !env.state().expect("reset").done {
            let action =
                select_action(&main, &obs, cfg.agent.tau, &mut policy_rng, ActionMode::Explore)?;
            let step = env.step(action)?;
            total += step.reward;
            buffer.push(Transition {
                state: obs.values,
                action: action.index(),
                reward: step.reward,
                next_state: step.observation.values,
                done: step.done,
            });
            global_step += 1;
            if global_step.is_multiple_of(cfg.agent.train_every_steps as u64) {
                if let Some(batch) = buffer.sample_batch(cfg.agent.batch_size, &mut replay_rng) {
                    train_step(&mut main, &target, &batch, &cfg.agent, &mut adam)?;
                }
            }
            obs = step.observation;
        }
        let st = env.state().expect("reset");
        records.push(EpisodeRecord {
            episode,
            steps: st.step_count,
            total_reward: total,
            success: st.outcome == Outcome::Found,
            final_distance_mm: st.peg_xy[0].hypot(st.peg_xy[1]),
            sim_time_s: cfg.env.sim_time_s(st.step_count),
            init_pos: cfg.init_positions[pick],
            hole_id: cfg.hole_id,
        });
        if episode % cfg.agent.target_sync_episodes == 0 {
            sync_target(&main, &mut target);
        }
        debug_assert!(main.is_finite());
    }

    Ok(TrainOutput {
        checkpoint: Checkpoint {
            network: main,
            adam,
            meta: TrainingMeta {
                episodes: cfg.episodes as u64,
                seed: cfg.seed,
                variant: cfg.variant,
            },
        },
        records,
    })
}
