//! BPSK transmission over AWGN, training-sample generation, and the Monte
//! Carlo benchmark harness.
//!
//! Reproducibility: every trial draws from its own counter-derived ChaCha
//! stream, so results are bit-identical for a given seed regardless of how
//! rayon schedules the trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::bp::{decode_flooding, decode_ns, DecodeResult, LlrVector};
use crate::error::{Error, Result};
use crate::rl::{decode_mabns, QTable};
use crate::tanner::ParityCheckMatrix;

/// AWGN operating point. `rate` is the nominal code rate used for the
/// Eb/N0 -> sigma^2 conversion; `noiseless` transmits without noise (the
/// LLR scale still follows the SNR).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub noiseless: bool,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, rate: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            snr_db,
            rate,
            seed,
            noiseless: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::invalid(format!(
                "code rate must be in (0, 1], got {}",
                self.rate
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("SNR must be finite"));
        }
        Ok(())
    }

    /// sigma^2 = 1 / (2 * rate * 10^(snr/10)).
    pub fn noise_variance(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.snr_db / 10.0))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// BPSK-modulate `x`, add white Gaussian noise, and return the observations
/// together with their channel LLRs 2y/sigma^2. `stream` selects an
/// independent substream of the config seed.
pub fn transmit(x: &[u8], cfg: &ChannelConfig, stream: u64) -> Result<(Vec<f64>, LlrVector)> {
    cfg.validate()?;
    let sigma2 = cfg.noise_variance();
    let mut rng = stream_rng(cfg.seed, stream);
    let normal = Normal::new(0.0, sigma2.sqrt())
        .map_err(|e| Error::invalid(format!("bad noise distribution: {e}")))?;
    let mut y = Vec::with_capacity(x.len());
    let mut llr = Vec::with_capacity(x.len());
    for &bit in x {
        let signal = if bit & 1 == 0 { 1.0 } else { -1.0 };
        let noise = if cfg.noiseless {
            0.0
        } else {
            normal.sample(&mut rng)
        };
        let obs = signal + noise;
        y.push(obs);
        llr.push(2.0 * obs / sigma2);
    }
    Ok((y, llr))
}

/// `count` independent all-zero-codeword transmissions, streamed lazily.
/// Sample i uses substream i of the config seed.
pub fn sample_training_set(
    h: &ParityCheckMatrix,
    cfg: &ChannelConfig,
    count: usize,
) -> impl Iterator<Item = LlrVector> {
    let zeros = vec![0u8; h.vn_count()];
    let cfg = cfg.clone();
    (0..count as u64).map(move |i| {
        let (_, llr) = transmit(&zeros, &cfg, i).expect("validated config");
        llr
    })
}

/// Which decoder a bench run drives, with its budget.
pub enum DecoderSpec<'a> {
    /// Full-sweep iterations.
    Flooding { max_iters: u64 },
    /// Residual node-wise scheduling with a scheduling budget.
    NodeWise { budget: u64 },
    /// Learned greedy scheduling with a scheduling budget.
    MabNs { qtable: &'a QTable, budget: u64 },
}

impl DecoderSpec<'_> {
    fn decode(&self, h: &ParityCheckMatrix, llr: &[f64]) -> Result<DecodeResult> {
        match self {
            DecoderSpec::Flooding { max_iters } => decode_flooding(h, llr, *max_iters),
            DecoderSpec::NodeWise { budget } => decode_ns(h, llr, *budget),
            DecoderSpec::MabNs { qtable, budget } => decode_mabns(h, llr, qtable, *budget),
        }
    }
}

/// Exact integer moments of one per-trial metric; means and normal-theory
/// confidence intervals are derived on demand so parallel accumulation stays
/// bit-exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub sum: u64,
    pub sum_sq: u128,
}

impl MetricSummary {
    fn add(&mut self, value: u64) {
        self.sum += value;
        self.sum_sq += (value as u128) * (value as u128);
    }

    fn merge(&mut self, other: &Self) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.sum as f64 / n as f64
    }

    /// 95% CI of the mean (normal approximation over trials).
    pub fn mean_ci95(&self, n: u64) -> (f64, f64) {
        let mean = self.mean(n);
        if n < 2 {
            return (mean, mean);
        }
        let nf = n as f64;
        let var = ((self.sum_sq as f64) - nf * mean * mean) / (nf - 1.0);
        let half = 1.96 * (var.max(0.0) / nf).sqrt();
        (mean - half, mean + half)
    }
}

/// Per-(SNR, decoder) accumulated outcome. BER is over all trials; the
/// message and scheduling averages are over the trials whose decoding
/// completed (converged to a codeword), so budget-capped failures do not
/// drown the workload statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub snr_db: f64,
    pub decoder: String,
    pub trials: u64,
    pub converged: u64,
    pub code_n: usize,
    pub bit_errors: MetricSummary,
    /// CN->VN messages over converged trials.
    pub cn2vn: MetricSummary,
    /// VN->CN messages over converged trials.
    pub vn2cn: MetricSummary,
    /// Committed CN updates over converged trials.
    pub schedulings: MetricSummary,
}

impl BenchRow {
    pub fn ber(&self) -> f64 {
        self.bit_errors.mean(self.trials) / self.code_n as f64
    }

    /// BER CI from the per-trial bit-error distribution (robust to the
    /// within-frame correlation of bit errors).
    pub fn ber_ci95(&self) -> (f64, f64) {
        let (lo, hi) = self.bit_errors.mean_ci95(self.trials);
        ((lo / self.code_n as f64).max(0.0), hi / self.code_n as f64)
    }

    pub fn avg_cn2vn(&self) -> f64 {
        self.cn2vn.mean(self.converged)
    }

    pub fn avg_vn2cn(&self) -> f64 {
        self.vn2cn.mean(self.converged)
    }

    pub fn avg_schedulings(&self) -> f64 {
        self.schedulings.mean(self.converged)
    }

    pub fn cn2vn_ci95(&self) -> (f64, f64) {
        self.cn2vn.mean_ci95(self.converged)
    }
}

/// All rows of one bench invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    /// One CSV line per (SNR, decoder) row.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("snr_db,decoder,trials,bit_errors,ber,avg_cn2vn,avg_vn2c,avg_schedulings\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.snr_db,
                r.decoder,
                r.trials,
                r.bit_errors.sum,
                r.ber(),
                r.avg_cn2vn(),
                r.avg_vn2cn(),
                r.avg_schedulings()
            );
        }
        out
    }

    pub fn merged(mut results: Vec<BenchResult>) -> BenchResult {
        let mut rows = Vec::new();
        for r in results.drain(..) {
            rows.extend(r.rows);
        }
        BenchResult { rows }
    }
}

#[derive(Default, Clone)]
struct Accumulator {
    converged: u64,
    bit_errors: MetricSummary,
    cn2vn: MetricSummary,
    vn2cn: MetricSummary,
    schedulings: MetricSummary,
}

impl Accumulator {
    fn absorb(mut self, res: &DecodeResult) -> Self {
        self.converged += u64::from(res.converged);
        let errors = res.xhat.iter().filter(|&&b| b != 0).count() as u64;
        self.bit_errors.add(errors);
        if res.converged {
            self.cn2vn.add(res.cn2vn_messages);
            self.vn2cn.add(res.vn2cn_messages);
            self.schedulings.add(res.schedulings);
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.converged += other.converged;
        self.bit_errors.merge(&other.bit_errors);
        self.cn2vn.merge(&other.cn2vn);
        self.vn2cn.merge(&other.vn2cn);
        self.schedulings.merge(&other.schedulings);
        self
    }
}

/// Monte Carlo run configuration shared across the SNR grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub snrs_db: Vec<f64>,
    pub trials: u64,
    pub rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub noiseless: bool,
}

/// Runs `trials` independent all-zero-codeword transmissions per SNR point
/// through one decoder. Trials execute in parallel on isolated states; the
/// aggregation is integer-exact and independent of the thread count.
pub fn run_bench(
    h: &ParityCheckMatrix,
    decoder: &DecoderSpec<'_>,
    label: &str,
    cfg: &BenchConfig,
) -> Result<BenchResult> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if let DecoderSpec::MabNs { qtable, .. } = decoder {
        if qtable.code_fingerprint() != h.fingerprint() {
            return Err(Error::FingerprintMismatch {
                expected: qtable.code_fingerprint(),
                got: h.fingerprint(),
            });
        }
    }
    let zeros = vec![0u8; h.vn_count()];
    let mut rows = Vec::with_capacity(cfg.snrs_db.len());
    for (snr_idx, &snr_db) in cfg.snrs_db.iter().enumerate() {
        let channel = ChannelConfig {
            snr_db,
            rate: cfg.rate,
            seed: cfg.seed,
            noiseless: cfg.noiseless,
        };
        channel.validate()?;
        let acc = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<Accumulator> {
                let stream = ((snr_idx as u64) << 40) | trial;
                let (_, llr) = transmit(&zeros, &channel, stream)?;
                let res = decoder.decode(h, &llr)?;
                Ok(Accumulator::default().absorb(&res))
            })
            .try_reduce(Accumulator::default, |a, b| Ok(a.merge(b)))?;
        rows.push(BenchRow {
            snr_db,
            decoder: label.to_string(),
            trials: cfg.trials,
            converged: acc.converged,
            code_n: h.vn_count(),
            bit_errors: acc.bit_errors,
            cn2vn: acc.cn2vn,
            vn2cn: acc.vn2cn,
            schedulings: acc.schedulings,
        });
    }
    Ok(BenchResult { rows })
}

/// Wilson score interval for a binomial proportion at 95% confidence.
pub fn wilson_ci95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
