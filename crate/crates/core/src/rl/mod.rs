//! Learned sequential scheduling: quantized cluster states, tabular
//! Q-learning over CN clusters, and the greedy decoder that replays the
//! learned action values instead of computing residuals.

mod io;

pub use io::{load_qtable, save_qtable};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bp::{DecodeResult, DecoderState, LlrVector};
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::tanner::ParityCheckMatrix;

/// Largest allowed per-cluster table (states x actions), 128 MiB of f64.
const MAX_TABLE_ENTRIES: u128 = 1 << 24;

/// M-level scalar quantizer: maps a real to the index of the nearest
/// representation point, ties to the lower level.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    rep_points: Vec<f64>,
    /// Midpoints between consecutive representation points, ascending.
    thresholds: Vec<f64>,
}

impl Quantizer {
    pub fn new(rep_points: Vec<f64>) -> Result<Self> {
        if rep_points.len() < 2 {
            return Err(Error::invalid("quantizer needs at least 2 levels"));
        }
        if rep_points.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite representation point"));
        }
        if rep_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "representation points must be strictly ascending",
            ));
        }
        let thresholds = rep_points
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect();
        Ok(Self {
            rep_points,
            thresholds,
        })
    }

    /// Symmetric uniform quantizer with step `theta`: representation points
    /// (i - (M-1)/2) * theta, so M=4 gives -3t/2, -t/2, t/2, 3t/2 with
    /// thresholds -t, 0, t.
    pub fn symmetric_uniform(levels: usize, theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::invalid(format!("quantizer step must be positive, got {theta}")));
        }
        let reps = (0..levels)
            .map(|i| (i as f64 - (levels as f64 - 1.0) / 2.0) * theta)
            .collect();
        Self::new(reps)
    }

    pub fn levels(&self) -> usize {
        self.rep_points.len()
    }

    pub fn rep_points(&self) -> &[f64] {
        &self.rep_points
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Level of the nearest representation point; a value equidistant from
    /// two points (i.e. exactly on a threshold) takes the lower level.
    pub fn quantize(&self, x: f64) -> usize {
        assert!(x.is_finite(), "cannot quantize non-finite value {x}");
        self.thresholds.partition_point(|&t| t < x)
    }
}

/// Median of |initial soft syndrome| over calibration samples: the default
/// quantizer step for a given code and channel operating point.
pub fn calibrate_theta(
    h: &ParityCheckMatrix,
    samples: impl IntoIterator<Item = LlrVector>,
) -> Result<f64> {
    let mut magnitudes: Vec<f64> = Vec::new();
    for llr in samples {
        if llr.len() != h.vn_count() {
            return Err(Error::LengthMismatch {
                expected: h.vn_count(),
                got: llr.len(),
            });
        }
        for c in 0..h.cn_count() {
            let s: f64 = h.cn_neighbors(c).iter().map(|&v| llr[v]).sum();
            magnitudes.push(s.abs());
        }
    }
    if magnitudes.is_empty() {
        return Err(Error::invalid("no calibration samples"));
    }
    magnitudes.sort_by(f64::total_cmp);
    let mid = magnitudes.len() / 2;
    let median = if magnitudes.len() % 2 == 1 {
        magnitudes[mid]
    } else {
        0.5 * (magnitudes[mid - 1] + magnitudes[mid])
    };
    if median <= 0.0 {
        return Err(Error::invalid("degenerate calibration: median |s| is zero"));
    }
    Ok(median)
}

/// Base-M positional encoding of a cluster's quantized sub-syndrome, digit i
/// weighted by M^i in within-cluster CN order.
pub fn cluster_state_index(levels: &[usize], m_levels: usize) -> Result<usize> {
    let mut index = 0usize;
    let mut weight = 1usize;
    for (i, &level) in levels.iter().enumerate() {
        if level >= m_levels {
            return Err(Error::invalid(format!(
                "level {level} at digit {i} out of range for M = {m_levels}"
            )));
        }
        index += level * weight;
        if i + 1 < levels.len() {
            weight = weight.checked_mul(m_levels).ok_or_else(|| {
                Error::invalid("state index overflow")
            })?;
        }
    }
    Ok(index)
}

/// Inverse of [`cluster_state_index`].
pub fn cluster_state_levels(index: usize, m_levels: usize, z: usize) -> Vec<usize> {
    let mut levels = Vec::with_capacity(z);
    let mut rest = index;
    for _ in 0..z {
        levels.push(rest % m_levels);
        rest /= m_levels;
    }
    levels
}

/// Q-learning parameters. `ell_max` is the number of schedulings per
/// training sample, `sample_count` the size of the training set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub ell_max: usize,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.9,
            epsilon: 0.6,
            ell_max: 25,
            sample_count: 100_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("alpha must be in [0,1], got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::invalid(format!("beta must be in [0,1), got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::invalid(format!("epsilon must be in [0,1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub(crate) struct ClusterTable {
    pub(crate) states: usize,
    pub(crate) actions: usize,
    /// Row-major: q[state * actions + action].
    pub(crate) q: Vec<f64>,
}

/// Per-cluster action-value tables over quantized sub-syndrome states, tied
/// to the clustering, the quantizer, and the code it was trained for.
#[derive(Debug)]
pub struct QTable {
    clustering: Clustering,
    quantizer: Quantizer,
    code_fingerprint: u64,
    tables: Vec<ClusterTable>,
}

impl QTable {
    /// All-zero table for the given clustering/quantizer over code `h`.
    pub fn zeroed(h: &ParityCheckMatrix, clustering: Clustering, quantizer: Quantizer) -> Result<Self> {
        if clustering.cn_count() != h.cn_count() {
            return Err(Error::InvalidClustering(
                format!(
                    "clustering covers {} CNs but the code has {}",
                    clustering.cn_count(),
                    h.cn_count()
                ),
                h.cn_count(),
            ));
        }
        let m_levels = quantizer.levels();
        let mut tables = Vec::with_capacity(clustering.cluster_count());
        for cluster in clustering.clusters() {
            let z = cluster.len();
            let states = (m_levels as u128).pow(z as u32);
            if states.saturating_mul(z as u128) > MAX_TABLE_ENTRIES {
                return Err(Error::invalid(format!(
                    "cluster state space M^z = {m_levels}^{z} is too large to tabulate"
                )));
            }
            tables.push(ClusterTable {
                states: states as usize,
                actions: z,
                q: vec![0.0; states as usize * z],
            });
        }
        Ok(Self {
            clustering,
            quantizer,
            code_fingerprint: h.fingerprint(),
            tables,
        })
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    pub fn m_levels(&self) -> usize {
        self.quantizer.levels()
    }

    pub fn code_fingerprint(&self) -> u64 {
        self.code_fingerprint
    }

    pub fn cluster_count(&self) -> usize {
        self.tables.len()
    }

    pub fn state_count(&self, u: usize) -> usize {
        self.tables[u].states
    }

    pub fn action_count(&self, u: usize) -> usize {
        self.tables[u].actions
    }

    pub fn get(&self, u: usize, state: usize, action: usize) -> f64 {
        let t = &self.tables[u];
        t.q[state * t.actions + action]
    }

    pub fn set(&mut self, u: usize, state: usize, action: usize, value: f64) {
        let t = &mut self.tables[u];
        t.q[state * t.actions + action] = value;
    }

    fn max_over_actions(&self, u: usize, state: usize) -> f64 {
        let t = &self.tables[u];
        t.q[state * t.actions..(state + 1) * t.actions]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Global argmax of Q over all clusters' current states, ties to the
    /// lowest (cluster, action) pair.
    pub fn greedy_action(&self, states: &[usize]) -> (usize, usize) {
        let mut best = (0usize, 0usize);
        let mut best_q = f64::NEG_INFINITY;
        for (u, t) in self.tables.iter().enumerate() {
            let row = &t.q[states[u] * t.actions..(states[u] + 1) * t.actions];
            for (a, &q) in row.iter().enumerate() {
                if q > best_q {
                    best_q = q;
                    best = (u, a);
                }
            }
        }
        best
    }

    /// Epsilon-greedy action selection: with probability epsilon a uniformly
    /// random cluster and a uniformly random action in it, otherwise the
    /// global greedy argmax.
    pub fn epsilon_greedy(
        &self,
        states: &[usize],
        epsilon: f64,
        rng: &mut ChaCha8Rng,
    ) -> (usize, usize) {
        if rng.random::<f64>() < epsilon {
            let u = rng.random_range(0..self.tables.len());
            let a = rng.random_range(0..self.tables[u].actions);
            (u, a)
        } else {
            self.greedy_action(states)
        }
    }

    /// One action-value update: the new value blends the old one with the
    /// reward plus the discounted maximum of Q over every cluster's observed
    /// next state.
    pub fn q_update(
        &mut self,
        u: usize,
        state: usize,
        action: usize,
        reward: f64,
        next_states: &[usize],
        alpha: f64,
        beta: f64,
    ) {
        let bootstrap = (0..self.tables.len())
            .map(|u2| self.max_over_actions(u2, next_states[u2]))
            .fold(f64::NEG_INFINITY, f64::max);
        let old = self.get(u, state, action);
        self.set(
            u,
            state,
            action,
            (1.0 - alpha) * old + alpha * (reward + beta * bootstrap),
        );
    }

    /// Total number of stored action values.
    pub fn entry_count(&self) -> usize {
        self.tables.iter().map(|t| t.q.len()).sum()
    }

    /// Stored values in cluster-major, state-major, action-minor order (the
    /// persisted payload order).
    pub(crate) fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.tables.iter().flat_map(|t| t.q.iter().copied())
    }

    /// Rebuilds a table from deserialized parts, revalidating shapes.
    pub(crate) fn from_parts(
        clustering: Clustering,
        quantizer: Quantizer,
        code_fingerprint: u64,
        tables: Vec<ClusterTable>,
    ) -> Result<Self> {
        if tables.len() != clustering.cluster_count() {
            return Err(Error::QTableFormat(format!(
                "{} tables for {} clusters",
                tables.len(),
                clustering.cluster_count()
            )));
        }
        for (cluster, table) in clustering.clusters().iter().zip(&tables) {
            let states = (quantizer.levels() as u128).pow(cluster.len() as u32);
            if table.actions != cluster.len()
                || table.states as u128 != states
                || table.q.len() as u128 != states * cluster.len() as u128
            {
                return Err(Error::QTableFormat("table shape mismatch".into()));
            }
        }
        Ok(Self {
            clustering,
            quantizer,
            code_fingerprint,
            tables,
        })
    }
}

/// Tracks quantized CN levels and the per-cluster state indices they encode.
struct StateTracker {
    levels: Vec<usize>,
    cluster_states: Vec<usize>,
    dirty: Vec<usize>,
}

impl StateTracker {
    fn new(q: &QTable, state: &DecoderState<'_>) -> Result<Self> {
        let clustering = q.clustering();
        let levels: Vec<usize> = state
            .soft_syndrome()
            .iter()
            .map(|&s| q.quantizer().quantize(s))
            .collect();
        let mut cluster_states = Vec::with_capacity(clustering.cluster_count());
        for cluster in clustering.clusters() {
            let digits: Vec<usize> = cluster.iter().map(|&c| levels[c]).collect();
            cluster_states.push(cluster_state_index(&digits, q.m_levels())?);
        }
        Ok(Self {
            levels,
            cluster_states,
            dirty: Vec::new(),
        })
    }

    /// Requantize the CNs whose soft syndrome changed and refresh the state
    /// index of every cluster containing one of them.
    fn refresh(&mut self, q: &QTable, state: &DecoderState<'_>, affected: &[usize]) -> Result<()> {
        self.dirty.clear();
        for &c in affected {
            let level = q.quantizer().quantize(state.soft_syndrome()[c]);
            if level != self.levels[c] {
                self.levels[c] = level;
                let (u, _) = q.clustering().membership(c);
                if !self.dirty.contains(&u) {
                    self.dirty.push(u);
                }
            }
        }
        let dirty = std::mem::take(&mut self.dirty);
        for &u in &dirty {
            let digits: Vec<usize> = q.clustering().cluster(u).iter().map(|&c| self.levels[c]).collect();
            self.cluster_states[u] = cluster_state_index(&digits, q.m_levels())?;
        }
        self.dirty = dirty;
        Ok(())
    }

    /// Clusters whose state index changed in the last `refresh`.
    fn dirty_clusters(&self) -> &[usize] {
        &self.dirty
    }
}

/// Clustered Q-learning over a stream of channel LLR samples. For each
/// sample the decoder state is initialized, and `ell_max` epsilon-greedy
/// schedulings update the table with the scheduled CN's residual as reward.
/// Deterministic given the config seed and the sample order.
pub fn train(
    h: &ParityCheckMatrix,
    clustering: &Clustering,
    samples: impl IntoIterator<Item = LlrVector>,
    quantizer: &Quantizer,
    config: &TrainConfig,
) -> Result<QTable> {
    config.validate()?;
    let mut q = QTable::zeroed(h, clustering.clone(), quantizer.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for llr in samples.into_iter().take(config.sample_count) {
        let mut state = DecoderState::new(h, &llr)?;
        let mut tracker = StateTracker::new(&q, &state)?;
        for _ in 0..config.ell_max {
            let (u, a) = q.epsilon_greedy(&tracker.cluster_states, config.epsilon, &mut rng);
            let s_u = tracker.cluster_states[u];
            let cn = clustering.cluster(u)[a];
            // The reward is the residual of the chosen CN at the moment of
            // scheduling, i.e. how much its committed messages change.
            let reward = state.residual_max(cn);
            state.schedule_cn(cn);
            tracker.refresh(&q, &state, state.affected_cns())?;
            q.q_update(
                u,
                s_u,
                a,
                reward,
                &tracker.cluster_states,
                config.alpha,
                config.beta,
            );
        }
    }
    Ok(q)
}

/// Greedy MAB-NS decoding with a trained table: quantize the soft syndrome,
/// schedule the argmax action, refresh the touched cluster states, repeat
/// until the syndrome clears, the budget runs out, or no schedulable action
/// remains. No residuals are computed; instead the decoder applies the same
/// self-demotion discipline node-wise scheduling uses on residuals:
///
/// - a CN whose inputs have not changed since its last update is skipped
///   (its committed messages would be re-sent verbatim), and
/// - a scheduled CN stays demoted until its cluster's quantized state
///   changes, since the table assigns one value per state and cannot see
///   the residual collapse inside an unchanged state.
///
/// Without the second rule the static argmax fixates on a high-value
/// state-action pair whose neighborhood keeps its inputs nominally fresh,
/// and the decoder ping-pongs between two CNs forever.
pub fn decode_mabns(
    h: &ParityCheckMatrix,
    channel: &[f64],
    q: &QTable,
    budget: u64,
) -> Result<DecodeResult> {
    if q.code_fingerprint() != h.fingerprint() {
        return Err(Error::FingerprintMismatch {
            expected: q.code_fingerprint(),
            got: h.fingerprint(),
        });
    }
    let mut state = DecoderState::new(h, channel)?;
    if state.is_codeword() {
        return Ok(DecodeResult::from_state(&state));
    }
    let mut tracker = StateTracker::new(q, &state)?;
    let mut demoted = vec![false; h.cn_count()];
    let mut spent = 0u64;
    while spent < budget {
        let mut best: Option<(f64, usize, usize)> = None;
        let mut any_fresh = false;
        for u in 0..q.cluster_count() {
            let s = tracker.cluster_states[u];
            for a in 0..q.action_count(u) {
                let cn = q.clustering().cluster(u)[a];
                if !state.cn_inputs_fresh(cn) {
                    continue;
                }
                any_fresh = true;
                if demoted[cn] {
                    continue;
                }
                let value = q.get(u, s, a);
                if best.as_ref().is_none_or(|&(bv, _, _)| value > bv) {
                    best = Some((value, u, a));
                }
            }
        }
        let Some((_, u, a)) = best else {
            if !any_fresh {
                // Every committed message is at its fixed point: nothing can
                // ever change again.
                break;
            }
            // All fresh CNs are demoted in their current states; lift the
            // demotions and keep refining (a demotion only marks one
            // scheduling per unchanged state as redundant, not forever).
            demoted.iter_mut().for_each(|d| *d = false);
            continue;
        };
        let cn = q.clustering().cluster(u)[a];
        state.schedule_cn(cn);
        spent += 1;
        demoted[cn] = true;
        tracker.refresh(q, &state, state.affected_cns())?;
        for &du in tracker.dirty_clusters() {
            for &c in q.clustering().cluster(du) {
                demoted[c] = false;
            }
        }
        if state.is_codeword() {
            break;
        }
    }
    debug_assert_eq!(state.residual_evals(), 0);
    Ok(DecodeResult::from_state(&state))
}
