//! Sum-product belief propagation kernels and the two non-learned decoders:
//! flooding and residual node-wise scheduling.
//!
//! LLR convention: log P(x=0|y) / P(x=1|y), so the channel LLR of an AWGN
//! observation is 2y/sigma^2 and the hard decision is 1 iff the posterior is
//! negative (ties to 0).

use std::cell::{Cell, RefCell};

use crate::error::{Error, Result};
use crate::tanner::ParityCheckMatrix;

/// Per-VN log-likelihood ratios.
pub type LlrVector = Vec<f64>;

/// CN output magnitudes saturate here.
const MSG_CLAMP: f64 = 30.0;
/// tanh products are kept inside (-1, 1) by this margin before atanh.
const ATANH_MARGIN: f64 = 1e-12;

/// All mutable state of one decoding run: directed edge messages, posterior
/// LLRs, soft syndrome, the incrementally tracked hard decision, and message
/// counters. Edge ids come from the matrix (`row_offsets[c] + pos`).
pub struct DecoderState<'a> {
    h: &'a ParityCheckMatrix,
    channel: Vec<f64>,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    posterior: Vec<f64>,
    soft_syndrome: Vec<f64>,
    xhat: Vec<u8>,
    cn_parity: Vec<u8>,
    unsatisfied: usize,
    cn2vn_sent: u64,
    vn2cn_sent: u64,
    schedulings: u64,
    residual_evals: Cell<u64>,
    /// CNs whose soft syndrome was refreshed by the last `schedule_cn`.
    affected: Vec<usize>,
    /// Per CN: whether any of its incoming messages changed since its last
    /// committed update. Scheduling a non-fresh CN provably re-sends the
    /// exact same messages.
    inputs_fresh: Vec<bool>,
    cn_stamp: Vec<u32>,
    epoch: u32,
    commit_buf: Vec<f64>,
    kernel_buf: RefCell<Vec<f64>>,
    probe_buf: RefCell<Vec<f64>>,
}

impl<'a> DecoderState<'a> {
    pub fn new(h: &'a ParityCheckMatrix, channel: &[f64]) -> Result<Self> {
        if channel.len() != h.vn_count() {
            return Err(Error::LengthMismatch {
                expected: h.vn_count(),
                got: channel.len(),
            });
        }
        if let Some(bad) = channel.iter().find(|l| !l.is_finite()) {
            return Err(Error::invalid(format!("non-finite channel LLR {bad}")));
        }
        let mut v2c = vec![0.0; h.edge_count()];
        for (v, &llr) in channel.iter().enumerate() {
            for &e in h.vn_edge_ids(v) {
                v2c[e] = llr;
            }
        }
        let posterior = channel.to_vec();
        let soft_syndrome = (0..h.cn_count())
            .map(|c| h.cn_neighbors(c).iter().map(|&v| posterior[v]).sum())
            .collect();
        let xhat: Vec<u8> = channel.iter().map(|&l| u8::from(l < 0.0)).collect();
        let cn_parity: Vec<u8> = (0..h.cn_count())
            .map(|c| h.cn_neighbors(c).iter().fold(0, |p, &v| p ^ xhat[v]))
            .collect();
        let unsatisfied = cn_parity.iter().filter(|&&p| p != 0).count();
        Ok(Self {
            h,
            channel: channel.to_vec(),
            c2v: vec![0.0; h.edge_count()],
            v2c,
            posterior,
            soft_syndrome,
            xhat,
            cn_parity,
            unsatisfied,
            cn2vn_sent: 0,
            vn2cn_sent: 0,
            schedulings: 0,
            residual_evals: Cell::new(0),
            affected: Vec::new(),
            inputs_fresh: vec![true; h.cn_count()],
            cn_stamp: vec![0; h.cn_count()],
            epoch: 0,
            commit_buf: Vec::new(),
            kernel_buf: RefCell::new(Vec::new()),
            probe_buf: RefCell::new(Vec::new()),
        })
    }

    pub fn matrix(&self) -> &'a ParityCheckMatrix {
        self.h
    }

    pub fn channel_llr(&self, v: usize) -> f64 {
        self.channel[v]
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn soft_syndrome(&self) -> &[f64] {
        &self.soft_syndrome
    }

    pub fn hard_decision(&self) -> &[u8] {
        &self.xhat
    }

    pub fn is_codeword(&self) -> bool {
        self.unsatisfied == 0
    }

    pub fn message_c2v(&self, edge: usize) -> f64 {
        self.c2v[edge]
    }

    pub fn message_v2c(&self, edge: usize) -> f64 {
        self.v2c[edge]
    }

    pub fn cn2vn_sent(&self) -> u64 {
        self.cn2vn_sent
    }

    pub fn vn2cn_sent(&self) -> u64 {
        self.vn2cn_sent
    }

    /// Committed CN updates (every CN of a flooding sweep counts).
    pub fn schedulings(&self) -> u64 {
        self.schedulings
    }

    pub fn residual_evals(&self) -> u64 {
        self.residual_evals.get()
    }

    /// CNs whose soft syndrome was refreshed by the most recent
    /// [`schedule_cn`](Self::schedule_cn).
    pub fn affected_cns(&self) -> &[usize] {
        &self.affected
    }

    /// False once CN `c` has been committed and none of its incoming
    /// messages changed afterwards: scheduling it again would send the same
    /// messages.
    pub fn cn_inputs_fresh(&self, c: usize) -> bool {
        self.inputs_fresh[c]
    }

    /// Outgoing sum-product messages of CN `c` under the current v2c inputs,
    /// written to `out` in row order: 2*atanh of the leave-one-out tanh
    /// product, clamped. Shared by the committing update and the residual
    /// probe.
    fn cn_kernel(&self, c: usize, out: &mut Vec<f64>) {
        let range = self.h.row_edge_range(c);
        let deg = range.len();
        out.clear();
        out.resize(deg, 0.0);
        let mut tanhs = self.kernel_buf.borrow_mut();
        tanhs.clear();
        tanhs.extend(self.v2c[range].iter().map(|&m| (0.5 * m).tanh()));
        let mut acc = 1.0;
        for i in 0..deg {
            out[i] = acc;
            acc *= tanhs[i];
        }
        acc = 1.0;
        for i in (0..deg).rev() {
            let loo = out[i] * acc;
            acc *= tanhs[i];
            let t = loo.clamp(-1.0 + ATANH_MARGIN, 1.0 - ATANH_MARGIN);
            out[i] = (2.0 * t.atanh()).clamp(-MSG_CLAMP, MSG_CLAMP);
        }
    }

    /// Commits the outgoing messages of CN `c` and counts them.
    pub fn cn_update(&mut self, c: usize) {
        let mut msgs = std::mem::take(&mut self.commit_buf);
        self.cn_kernel(c, &mut msgs);
        let range = self.h.row_edge_range(c);
        self.cn2vn_sent += range.len() as u64;
        self.c2v[range].copy_from_slice(&msgs);
        self.commit_buf = msgs;
        self.schedulings += 1;
        self.inputs_fresh[c] = false;
    }

    /// Per-edge residuals of CN `a` (aligned with its neighbor list) and
    /// their maximum R_a: how much each outgoing message would change if `a`
    /// were scheduled now. The state is not modified.
    pub fn residuals(&self, a: usize) -> (Vec<f64>, f64) {
        self.residual_evals.set(self.residual_evals.get() + 1);
        let mut provisional = self.probe_buf.borrow_mut();
        self.cn_kernel(a, &mut provisional);
        let range = self.h.row_edge_range(a);
        let mut max = 0.0f64;
        let per_edge: Vec<f64> = provisional
            .iter()
            .zip(&self.c2v[range])
            .map(|(p, m)| {
                let r = (p - m).abs();
                max = max.max(r);
                r
            })
            .collect();
        (per_edge, max)
    }

    /// R_a alone, without materializing the per-edge vector.
    pub fn residual_max(&self, a: usize) -> f64 {
        self.residual_evals.set(self.residual_evals.get() + 1);
        let mut provisional = self.probe_buf.borrow_mut();
        self.cn_kernel(a, &mut provisional);
        let range = self.h.row_edge_range(a);
        let mut max = 0.0f64;
        for (p, m) in provisional.iter().zip(&self.c2v[range]) {
            max = max.max((p - m).abs());
        }
        max
    }

    /// VN update: recompute the posterior of `v` and send extrinsic messages
    /// to every CN neighbor except `except`. Keeps the hard decision and the
    /// per-CN parity tally in sync.
    pub fn vn_update(&mut self, v: usize, except: Option<usize>) {
        let h = self.h;
        let mut total = self.channel[v];
        for &e in h.vn_edge_ids(v) {
            total += self.c2v[e];
        }
        self.posterior[v] = total;
        for (&c, &e) in h.vn_neighbors(v).iter().zip(h.vn_edge_ids(v)) {
            if Some(c) == except {
                continue;
            }
            self.v2c[e] = total - self.c2v[e];
            self.vn2cn_sent += 1;
            self.inputs_fresh[c] = true;
        }
        let bit = u8::from(total < 0.0);
        if bit != self.xhat[v] {
            self.xhat[v] = bit;
            for &c in h.vn_neighbors(v) {
                self.cn_parity[c] ^= 1;
                if self.cn_parity[c] == 1 {
                    self.unsatisfied += 1;
                } else {
                    self.unsatisfied -= 1;
                }
            }
        }
    }

    /// One sequential message-passing step: commit CN `a`'s messages,
    /// propagate through its neighborhood, and refresh the soft syndrome of
    /// every CN that saw a posterior change (recorded in `affected_cns`).
    pub fn schedule_cn(&mut self, a: usize) {
        let h = self.h;
        self.cn_update(a);
        self.epoch += 1;
        let mut affected = std::mem::take(&mut self.affected);
        affected.clear();
        for &v in h.cn_neighbors(a) {
            self.vn_update(v, Some(a));
            for &c in h.vn_neighbors(v) {
                if self.cn_stamp[c] != self.epoch {
                    self.cn_stamp[c] = self.epoch;
                    affected.push(c);
                }
            }
        }
        for &c in &affected {
            self.refresh_soft_syndrome(c);
        }
        self.affected = affected;
    }

    fn refresh_soft_syndrome(&mut self, c: usize) {
        self.soft_syndrome[c] = self
            .h
            .cn_neighbors(c)
            .iter()
            .map(|&v| self.posterior[v])
            .sum();
    }

    pub fn refresh_all_soft_syndromes(&mut self) {
        for c in 0..self.h.cn_count() {
            self.refresh_soft_syndrome(c);
        }
    }
}

/// Outcome of a decoding run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub xhat: Vec<u8>,
    /// True iff the hard decision is a codeword (zero syndrome).
    pub converged: bool,
    pub cn2vn_messages: u64,
    pub vn2cn_messages: u64,
    /// Committed CN updates (m per flooding iteration, 1 per sequential step).
    pub schedulings: u64,
    pub residual_evals: u64,
}

impl DecodeResult {
    pub(crate) fn from_state(state: &DecoderState<'_>) -> Self {
        Self {
            xhat: state.hard_decision().to_vec(),
            converged: state.is_codeword(),
            cn2vn_messages: state.cn2vn_sent(),
            vn2cn_messages: state.vn2cn_sent(),
            schedulings: state.schedulings(),
            residual_evals: state.residual_evals(),
        }
    }
}

/// Flooding schedule: full CN sweep, full VN sweep, hard-decision check, up
/// to `max_iters` iterations. The channel hard decision is checked before
/// any message is sent.
pub fn decode_flooding(
    h: &ParityCheckMatrix,
    channel: &[f64],
    max_iters: u64,
) -> Result<DecodeResult> {
    let mut state = DecoderState::new(h, channel)?;
    for _ in 0..max_iters {
        if state.is_codeword() {
            break;
        }
        for c in 0..h.cn_count() {
            state.cn_update(c);
        }
        for v in 0..h.vn_count() {
            state.vn_update(v, None);
        }
        state.refresh_all_soft_syndromes();
    }
    Ok(DecodeResult::from_state(&state))
}

/// Residual node-wise scheduling: repeatedly commit the CN whose outgoing
/// messages would change the most (ties to the lowest index). A scheduled
/// CN's residual is zero until one of its inputs changes. Stops on a zero
/// syndrome or after `budget` schedulings.
pub fn decode_ns(h: &ParityCheckMatrix, channel: &[f64], budget: u64) -> Result<DecodeResult> {
    let mut state = DecoderState::new(h, channel)?;
    if state.is_codeword() {
        return Ok(DecodeResult::from_state(&state));
    }
    let mut residuals: Vec<f64> = (0..h.cn_count()).map(|c| state.residual_max(c)).collect();
    for _ in 0..budget {
        let mut best = 0usize;
        for c in 1..h.cn_count() {
            if residuals[c] > residuals[best] {
                best = c;
            }
        }
        state.schedule_cn(best);
        residuals[best] = 0.0;
        let affected = std::mem::take(&mut state.affected);
        for &c in &affected {
            // `best`'s own inputs are untouched (its neighbors skip it when
            // propagating), so its residual stays zero until they change.
            if c != best {
                residuals[c] = state.residual_max(c);
            }
        }
        state.affected = affected;
        if state.is_codeword() {
            break;
        }
    }
    Ok(DecodeResult::from_state(&state))
}
