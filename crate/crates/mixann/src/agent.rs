//! Deterministic actor-critic over the discrete-continuous action space.
//!
//! The actor maps a state vector to a raw 4-vector; a sigmoid-and-scale
//! transform turns it into an in-bounds [`Action`], with the two integer
//! entries rounded half away from zero and clamped to at least 1. Learning
//! happens entirely in raw space — the critic scores `(state, raw action)`
//! pairs — because the rounding step is not differentiable. Replayed
//! transitions therefore store the raw action.
//!
//! Target networks are on by default; disabling them makes the Bellman
//! target read off the online networks instead.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::Action;
use crate::error::{Error, Result};
use crate::nn::{sigmoid, soft_update, Adam, Mlp};
use rand::SeedableRng;

/// Per-entry scale constants applied after the sigmoid: `[K, 1, N, 1]` for
/// neighborhood size K and copy budget N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBounds {
    pub scale: [f64; 4],
}

impl ActionBounds {
    pub fn new(max_neighborhood: usize, max_copies: usize) -> Self {
        Self {
            scale: [max_neighborhood as f64, 1.0, max_copies as f64, 1.0],
        }
    }
}

/// Rounds half away from zero and clamps into `[1, bound]`.
fn round_clamped(value: f64, bound: f64) -> usize {
    (value.round().max(1.0).min(bound)) as usize
}

/// Squashes a raw actor output into an in-bounds environment action.
pub fn to_env_action(raw: &[f64; 4], bounds: &ActionBounds) -> Action {
    let scaled: Vec<f64> = raw
        .iter()
        .zip(&bounds.scale)
        .map(|(&r, &w)| sigmoid(r) * w)
        .collect();
    Action {
        k: round_clamped(scaled[0], bounds.scale[0]),
        mix_ratio: scaled[1].clamp(0.0, 1.0),
        copies: round_clamped(scaled[2], bounds.scale[2]),
        stop_signal: scaled[3].clamp(0.0, 1.0),
    }
}

/// One buffered step: everything the losses need, in raw-action space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub state: Vec<f64>,
    pub action_raw: [f64; 4],
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Bounded FIFO of transitions with uniform sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    records: std::collections::VecDeque<TransitionRecord>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            records: std::collections::VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, evicting the oldest record when full.
    pub fn push(&mut self, record: TransitionRecord) {
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(record);
    }

    /// Uniform sample without replacement.
    pub fn sample(&self, batch_size: usize, rng: &mut ChaCha8Rng) -> Result<Vec<&TransitionRecord>> {
        if batch_size > self.records.len() {
            return Err(Error::BufferTooSmall {
                len: self.records.len(),
                requested: batch_size,
            });
        }
        let picks = rand::seq::index::sample(rng, self.records.len(), batch_size);
        Ok(picks.iter().map(|i| &self.records[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    /// Discount on future rewards, in [0, 1).
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    /// Exploration noise stddev on raw actions at training start.
    pub noise_sigma: f64,
    /// Noise stddev reached at the final episode.
    pub noise_sigma_final: f64,
    /// Target-network blend rate per update, in (0, 1].
    pub tau: f64,
    /// Bootstrap from slowly tracking target copies of both networks.
    pub use_targets: bool,
    /// Gradient updates run after each environment step.
    pub updates_per_step: usize,
    pub buffer_capacity: usize,
    /// Hidden layer widths shared by actor and critic.
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 64,
            noise_sigma: 0.1,
            noise_sigma_final: 0.01,
            tau: 0.005,
            use_targets: true,
            updates_per_step: 1,
            buffer_capacity: 10_000,
            hidden: vec![64, 64],
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(Error::InvalidConfig("learning rates must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau must lie in (0, 1], got {}", self.tau)));
        }
        if self.batch_size == 0 || self.updates_per_step == 0 || self.buffer_capacity == 0 {
            return Err(Error::InvalidConfig(
                "batch_size, updates_per_step, and buffer_capacity must be positive".into(),
            ));
        }
        if self.noise_sigma < 0.0 || self.noise_sigma_final < 0.0 {
            return Err(Error::InvalidConfig("noise levels cannot be negative".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden widths must be positive".into()));
        }
        Ok(())
    }
}

/// Bellman target for one record: the raw reward at terminals, otherwise
/// reward plus the discounted critic value of the policy's next action.
pub fn bellman_target(
    record: &TransitionRecord,
    actor: &Mlp,
    critic: &Mlp,
    gamma: f64,
) -> Result<f64> {
    if record.terminal {
        return Ok(record.reward);
    }
    let next_action = actor.forward(&record.next_state)?;
    let mut input = record.next_state.clone();
    input.extend_from_slice(&next_action);
    Ok(record.reward + gamma * critic.forward(&input)?[0])
}

/// Mean squared error between critic values and `targets`, with its
/// gradient over the critic parameters.
pub fn critic_gradients(
    critic: &Mlp,
    batch: &[&TransitionRecord],
    targets: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.len() != targets.len() {
        return Err(Error::LengthMismatch { left: batch.len(), right: targets.len() });
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = vec![0.0; critic.params().len()];
    let mut loss = 0.0;
    for (record, &target) in batch.iter().zip(targets) {
        let mut input = record.state.clone();
        input.extend_from_slice(&record.action_raw);
        let cache = critic.forward_cached(&input)?;
        let q = cache.output()[0];
        loss += (q - target) * (q - target) * scale;
        let dq = 2.0 * (q - target) * scale;
        critic.backward(&cache, &[dq], &mut grads)?;
    }
    Ok((loss, grads))
}

/// One optimizer step on the mean squared error between critic values and
/// `targets`; returns the pre-step loss.
pub fn critic_step(
    critic: &mut Mlp,
    optimizer: &mut Adam,
    batch: &[&TransitionRecord],
    targets: &[f64],
) -> Result<f64> {
    let (loss, grads) = critic_gradients(critic, batch, targets)?;
    optimizer.step(critic.params_mut(), &grads)?;
    Ok(loss)
}

/// `-mean Q(s, pi(s))` and its gradient over the actor parameters, chained
/// through a frozen critic.
pub fn actor_gradients(actor: &Mlp, critic: &Mlp, states: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    if states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let scale = 1.0 / states.len() as f64;
    let state_dim = actor.input_dim();
    let mut actor_grads = vec![0.0; actor.params().len()];
    let mut critic_scratch = vec![0.0; critic.params().len()];
    let mut loss = 0.0;
    for &state in states {
        let actor_cache = actor.forward_cached(state)?;
        let raw_action = actor_cache.output();
        let mut input = state.to_vec();
        input.extend_from_slice(raw_action);
        let critic_cache = critic.forward_cached(&input)?;
        loss -= critic_cache.output()[0] * scale;
        // d(-Q)/d input, discarding the critic's own parameter gradients.
        let input_grad = critic.backward(&critic_cache, &[-scale], &mut critic_scratch)?;
        actor.backward(&actor_cache, &input_grad[state_dim..], &mut actor_grads)?;
    }
    Ok((loss, actor_grads))
}

/// One optimizer step pushing the actor toward actions the critic scores
/// highly; returns the pre-step loss.
pub fn actor_step(
    actor: &mut Mlp,
    optimizer: &mut Adam,
    critic: &Mlp,
    states: &[&[f64]],
) -> Result<f64> {
    let (loss, grads) = actor_gradients(actor, critic, states)?;
    optimizer.step(actor.params_mut(), &grads)?;
    Ok(loss)
}

/// Losses observed during one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
}

/// The full DDPG bundle: online and target networks, optimizers, replay
/// buffer, and the exploration rng.
#[derive(Debug, Clone)]
pub struct Agent {
    actor: Mlp,
    critic: Mlp,
    actor_target: Mlp,
    critic_target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    pub buffer: ReplayBuffer,
    cfg: AgentConfig,
    bounds: ActionBounds,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(state_dim: usize, cfg: AgentConfig, bounds: ActionBounds) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut actor_dims = vec![state_dim];
        actor_dims.extend_from_slice(&cfg.hidden);
        actor_dims.push(4);
        let mut critic_dims = vec![state_dim + 4];
        critic_dims.extend_from_slice(&cfg.hidden);
        critic_dims.push(1);
        let actor = Mlp::new(&actor_dims, &mut rng);
        let critic = Mlp::new(&critic_dims, &mut rng);
        Ok(Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor_opt: Adam::new(cfg.actor_lr, actor.params().len()),
            critic_opt: Adam::new(cfg.critic_lr, critic.params().len()),
            actor,
            critic,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            cfg,
            bounds,
            rng,
        })
    }

    pub fn cfg(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    /// Mutable access for parameter surgery (scripted policies, warm
    /// starts). Target networks are not touched.
    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    /// Raw policy output plus independent Gaussian noise per coordinate;
    /// zero sigma gives the deterministic policy.
    pub fn act(&mut self, state: &[f64], noise_sigma: f64) -> Result<[f64; 4]> {
        let out = self.actor.forward(state)?;
        let mut raw = [0.0; 4];
        for (slot, value) in raw.iter_mut().zip(&out) {
            let noise: f64 = self.rng.sample(StandardNormal);
            *slot = value + noise_sigma * noise;
        }
        Ok(raw)
    }

    /// Deterministic raw policy output.
    pub fn greedy_raw(&self, state: &[f64]) -> Result<[f64; 4]> {
        let out = self.actor.forward(state)?;
        Ok([out[0], out[1], out[2], out[3]])
    }

    pub fn transform(&self, raw: &[f64; 4]) -> Action {
        to_env_action(raw, &self.bounds)
    }

    pub fn observe(&mut self, record: TransitionRecord) {
        self.buffer.push(record);
    }

    /// One DDPG update: sample, critic regression toward Bellman targets,
    /// actor ascent, soft target blend. No-ops until the buffer can fill a
    /// batch.
    pub fn update(&mut self) -> Result<Option<UpdateStats>> {
        if self.buffer.len() < self.cfg.batch_size {
            return Ok(None);
        }
        let batch = self.buffer.sample(self.cfg.batch_size, &mut self.rng)?;
        let (target_actor, target_critic) = if self.cfg.use_targets {
            (&self.actor_target, &self.critic_target)
        } else {
            (&self.actor, &self.critic)
        };
        let mut targets = Vec::with_capacity(batch.len());
        for record in &batch {
            targets.push(bellman_target(record, target_actor, target_critic, self.cfg.gamma)?);
        }
        let critic_loss = critic_step(&mut self.critic, &mut self.critic_opt, &batch, &targets)?;
        let states: Vec<&[f64]> = batch.iter().map(|r| r.state.as_slice()).collect();
        let actor_loss = actor_step(&mut self.actor, &mut self.actor_opt, &self.critic, &states)?;
        if self.cfg.use_targets {
            soft_update(&mut self.actor_target, &self.actor, self.cfg.tau)?;
            soft_update(&mut self.critic_target, &self.critic, self.cfg.tau)?;
        }
        Ok(Some(UpdateStats { critic_loss, actor_loss }))
    }

    /// Writes actor and critic parameters to a little-endian binary file
    /// with a magic/version/shape header.
    pub fn save_params(&self, path: &Path) -> Result<()> {
        let mut writer = BufWriter::new(File::create(path)?);
        writer.write_all(PARAMS_MAGIC)?;
        writer.write_all(&PARAMS_VERSION.to_le_bytes())?;
        for net in [&self.actor, &self.critic] {
            write_net(&mut writer, net)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Restores actor and critic (targets become copies) from
    /// [`Self::save_params`] output. Version or shape mismatches fail.
    pub fn load_params(&mut self, path: &Path) -> Result<()> {
        let mut reader = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != PARAMS_MAGIC {
            return Err(Error::BadParamsFile("wrong magic bytes".into()));
        }
        let mut version = [0u8; 4];
        reader.read_exact(&mut version)?;
        let version = u32::from_le_bytes(version);
        if version != PARAMS_VERSION {
            return Err(Error::BadVersion(version));
        }
        let actor = read_net(&mut reader)?;
        let critic = read_net(&mut reader)?;
        if actor.dims() != self.actor.dims() || critic.dims() != self.critic.dims() {
            return Err(Error::BadParamsFile("network shapes do not match this agent".into()));
        }
        let mut trailing = Vec::new();
        reader.read_to_end(&mut trailing)?;
        if !trailing.is_empty() {
            return Err(Error::BadParamsFile(format!("{} trailing bytes", trailing.len())));
        }
        self.actor_target = actor.clone();
        self.critic_target = critic.clone();
        self.actor = actor;
        self.critic = critic;
        Ok(())
    }
}

const PARAMS_MAGIC: &[u8; 4] = b"MXAN";
const PARAMS_VERSION: u32 = 1;

fn write_net<W: Write>(writer: &mut W, net: &Mlp) -> Result<()> {
    writer.write_all(&(net.dims().len() as u32).to_le_bytes())?;
    for &d in net.dims() {
        writer.write_all(&(d as u32).to_le_bytes())?;
    }
    writer.write_all(&(net.params().len() as u64).to_le_bytes())?;
    for &p in net.params() {
        writer.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

fn read_net<R: Read>(reader: &mut R) -> Result<Mlp> {
    let mut buf4 = [0u8; 4];
    reader.read_exact(&mut buf4)?;
    let n_dims = u32::from_le_bytes(buf4) as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(Error::BadParamsFile(format!("implausible dim count {n_dims}")));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        reader.read_exact(&mut buf4)?;
        dims.push(u32::from_le_bytes(buf4) as usize);
    }
    let mut buf8 = [0u8; 8];
    reader.read_exact(&mut buf8)?;
    let count = u64::from_le_bytes(buf8) as usize;
    let mut net = Mlp::zeros(&dims);
    if net.params().len() != count {
        return Err(Error::BadParamsFile(format!(
            "parameter count {count} does not match shapes {dims:?}"
        )));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        reader.read_exact(&mut buf8)?;
        params.push(f64::from_le_bytes(buf8));
    }
    net.set_params(&params)?;
    Ok(net)
}
