use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{soft_update, Adam, QNetwork};
use super::replay::ReplayBuffer;
use crate::env::Transition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Soft target-update rate.
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of the planned environment steps over which ε decays linearly.
    pub epsilon_decay_fraction: f64,
    pub replay_capacity: usize,
    /// Transitions collected before the first update; `None` means 2·batch.
    pub warmup: Option<usize>,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            gamma: 0.99,
            learning_rate: 1e-3,
            batch_size: 512,
            tau: 1e-3,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.5,
            replay_capacity: 360_000,
            warmup: None,
            hidden: vec![64, 64],
            seed: 0,
        }
    }
}

impl DqnConfig {
    pub fn warmup(&self) -> usize {
        self.warmup
            .unwrap_or(2 * self.batch_size)
            .max(self.batch_size)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("dqn: {msg}")));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad("need 0 < batch_size <= replay_capacity");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        for eps in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&eps) {
                return bad("epsilon values must lie in [0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            return bad("epsilon_decay_fraction must lie in [0, 1]");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }
}

/// Linear ε decay, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::EmptyQValues);
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// ε-greedy: uniform random action with probability ε, else greedy.
pub fn select_action(q_values: &[f64], epsilon: f64, rng: &mut impl Rng) -> Result<usize> {
    if q_values.is_empty() {
        return Err(Error::EmptyQValues);
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidConfig(format!(
            "epsilon {epsilon} outside [0, 1]"
        )));
    }
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..q_values.len()));
    }
    argmax(q_values)
}

/// `y = r + γ^duration · max_a′ Q(s′, a′; θ⁻)`, bootstrap dropped on terminal.
pub fn td_targets(target: &QNetwork, batch: &[&Transition], gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return Ok(t.reward);
            }
            let next = target.forward(&t.next_state)?;
            let best = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(t.reward + gamma.powi(t.duration as i32) * best)
        })
        .collect()
}

/// One Adam step on the online parameters. Returns the pre-update batch loss;
/// a non-finite loss aborts without touching the parameters.
pub fn train_step(
    online: &mut QNetwork,
    target: &QNetwork,
    optimizer: &mut Adam,
    batch: &[&Transition],
    gamma: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let targets = td_targets(target, batch, gamma)?;
    let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
    let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let (loss, grad) = online.loss_and_gradient(&states, &actions, &targets)?;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteLoss);
    }
    optimizer.update(online.params_mut(), &grad);
    Ok(loss)
}

/// Seed, stream and word position fully determine a ChaCha generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: String,
    pub stream: u64,
    /// u128 as decimal text.
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        let seed: String = rng.get_seed().iter().map(|b| format!("{b:02x}")).collect();
        RngState {
            seed,
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        let bad = || Error::Checkpoint("malformed rng state".into());
        if self.seed.len() != 64 {
            return Err(bad());
        }
        let mut seed = [0u8; 32];
        for (i, byte) in seed.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&self.seed[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos.parse().map_err(|_| bad())?);
        Ok(rng)
    }
}

/// Online/target network pair, replay memory and exploration state.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    online: QNetwork,
    target: QNetwork,
    optimizer: Adam,
    buffer: ReplayBuffer,
    config: DqnConfig,
    schedule: EpsilonSchedule,
    rng: ChaCha8Rng,
    env_steps: u64,
    updates: u64,
}

impl DqnAgent {
    /// `planned_steps` sizes the ε schedule.
    pub fn new(
        state_dim: usize,
        num_actions: usize,
        config: DqnConfig,
        planned_steps: u64,
    ) -> Result<Self> {
        config.validate()?;
        let mut sizes = vec![state_dim];
        sizes.extend(&config.hidden);
        sizes.push(num_actions);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let online = QNetwork::seeded(&sizes, &mut rng);
        let target = online.clone();
        let optimizer = Adam::new(config.learning_rate, online.params().len());
        let schedule = EpsilonSchedule {
            start: config.epsilon_start,
            end: config.epsilon_end,
            decay_steps: (planned_steps as f64 * config.epsilon_decay_fraction).round() as u64,
        };
        Ok(DqnAgent {
            online,
            target,
            optimizer,
            buffer: ReplayBuffer::new(config.replay_capacity),
            config,
            schedule,
            rng,
            env_steps: 0,
            updates: 0,
        })
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn epsilon(&self) -> f64 {
        self.schedule.value(self.env_steps)
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// ε-greedy action under the current schedule.
    pub fn act(&mut self, state: &[f64]) -> Result<usize> {
        let q = self.online.forward(state)?;
        let eps = self.epsilon();
        select_action(&q, eps, &mut self.rng)
    }

    pub fn greedy(&self, state: &[f64]) -> Result<usize> {
        argmax(&self.online.forward(state)?)
    }

    /// Stores the transition and, once warm, performs one update followed by a
    /// soft target update. Returns the loss when an update happened.
    pub fn observe(&mut self, transition: Transition) -> Result<Option<f64>> {
        self.buffer.store(transition);
        self.env_steps += 1;
        if self.buffer.len() < self.config.warmup() {
            return Ok(None);
        }
        let batch = self.buffer.sample(self.config.batch_size, &mut self.rng)?;
        let loss = train_step(
            &mut self.online,
            &self.target,
            &mut self.optimizer,
            &batch,
            self.config.gamma,
        )?;
        soft_update(&mut self.target, &self.online, self.config.tau)?;
        self.updates += 1;
        Ok(Some(loss))
    }

    pub fn to_checkpoint(&self, task: Option<super::TaskDescriptor>) -> super::Checkpoint {
        super::Checkpoint {
            version: super::CHECKPOINT_VERSION,
            architecture: self.online.sizes().to_vec(),
            params: self.online.params().to_vec(),
            target_params: self.target.params().to_vec(),
            optimizer: self.optimizer.clone(),
            config: self.config.clone(),
            epsilon_decay_steps: self.schedule.decay_steps,
            rng: RngState::capture(&self.rng),
            env_steps: self.env_steps,
            updates: self.updates,
            task,
        }
    }

    /// Rebuilds the agent with an empty replay memory.
    pub fn from_checkpoint(ckpt: &super::Checkpoint) -> Result<Self> {
        ckpt.config.validate()?;
        let online = QNetwork::from_params(&ckpt.architecture, ckpt.params.clone())?;
        let target = QNetwork::from_params(&ckpt.architecture, ckpt.target_params.clone())?;
        if ckpt.optimizer.m.len() != online.params().len()
            || ckpt.optimizer.v.len() != online.params().len()
        {
            return Err(Error::Checkpoint("optimizer state size mismatch".into()));
        }
        Ok(DqnAgent {
            online,
            target,
            optimizer: ckpt.optimizer.clone(),
            buffer: ReplayBuffer::new(ckpt.config.replay_capacity),
            schedule: EpsilonSchedule {
                start: ckpt.config.epsilon_start,
                end: ckpt.config.epsilon_end,
                decay_steps: ckpt.epsilon_decay_steps,
            },
            config: ckpt.config.clone(),
            rng: ckpt.rng.restore()?,
            env_steps: ckpt.env_steps,
            updates: ckpt.updates,
        })
    }
}
