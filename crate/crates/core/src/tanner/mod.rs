//! Parity-check matrices and their Tanner graphs.
//!
//! A matrix is stored as adjacency lists both ways: `rows[c]` lists the
//! variable nodes (VNs) checked by check node (CN) `c`, `cols[v]` lists the
//! CNs touching VN `v`. Every 1-entry of the matrix is an edge with a stable
//! id `row_offsets[c] + position-in-row`, which is what the decoder uses to
//! address directed messages.

mod alist;

pub use alist::{parse_alist, write_alist};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};

/// Sparse binary parity-check matrix with row/column adjacency.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    m: usize,
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    /// Prefix sums of row degrees; edge id = `row_offsets[c] + pos`.
    row_offsets: Vec<usize>,
    /// Per VN: edge ids aligned with `cols[v]`.
    col_edges: Vec<Vec<usize>>,
    edge_count: usize,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-CN neighbor lists. Entries are sorted and
    /// checked for duplicates and range.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.len();
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (c, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Inconsistent(format!("duplicate entry in row {c}")));
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(Error::Inconsistent(format!(
                        "row {c} references VN {v} but n = {n}"
                    )));
                }
                cols[v].push(c);
            }
        }

        let mut row_offsets = Vec::with_capacity(m + 1);
        let mut acc = 0;
        for row in &rows {
            row_offsets.push(acc);
            acc += row.len();
        }
        row_offsets.push(acc);

        // cols[v] is already sorted (rows scanned in CN order), so edge ids
        // can be assigned in one pass.
        let mut col_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (c, row) in rows.iter().enumerate() {
            for (pos, &v) in row.iter().enumerate() {
                col_edges[v].push(row_offsets[c] + pos);
            }
        }

        Ok(Self {
            m,
            n,
            rows,
            cols,
            row_offsets,
            col_edges,
            edge_count: acc,
        })
    }

    pub fn cn_count(&self) -> usize {
        self.m
    }

    pub fn vn_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn cn_neighbors(&self, c: usize) -> &[usize] {
        &self.rows[c]
    }

    pub fn vn_neighbors(&self, v: usize) -> &[usize] {
        &self.cols[v]
    }

    pub fn cn_degree(&self, c: usize) -> usize {
        self.rows[c].len()
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        self.cols[v].len()
    }

    /// Edge id of the `pos`-th entry of row `c`.
    pub fn edge_id(&self, c: usize, pos: usize) -> usize {
        self.row_offsets[c] + pos
    }

    /// Edge ids of row `c`, in the same order as `cn_neighbors(c)`.
    pub fn row_edge_range(&self, c: usize) -> std::ops::Range<usize> {
        self.row_offsets[c]..self.row_offsets[c + 1]
    }

    /// Edge ids incident to VN `v`, aligned with `vn_neighbors(v)`.
    pub fn vn_edge_ids(&self, v: usize) -> &[usize] {
        &self.col_edges[v]
    }

    pub fn graph(&self) -> TannerGraph<'_> {
        TannerGraph { h: self }
    }

    /// Stable 64-bit FNV-1a hash of the dimensions and adjacency, used to tie
    /// persisted Q-tables to the code they were trained on.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf29ce484222325;
        const PRIME: u64 = 0x100000001b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.m as u64);
        feed(self.n as u64);
        for row in &self.rows {
            feed(u64::MAX); // row separator
            for &v in row {
                feed(v as u64);
            }
        }
        h
    }

    fn has_four_cycle(&self) -> bool {
        // A 4-cycle is two CNs sharing two VNs, i.e. a VN pair seen in two rows.
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        for row in &self.rows {
            for i in 0..row.len() {
                for j in (i + 1)..row.len() {
                    if !seen.insert((row[i], row[j])) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Bipartite-graph view over a [`ParityCheckMatrix`]. Edges correspond
/// exactly to the 1-entries of the matrix.
#[derive(Debug, Clone, Copy)]
pub struct TannerGraph<'a> {
    h: &'a ParityCheckMatrix,
}

impl<'a> TannerGraph<'a> {
    pub fn matrix(&self) -> &'a ParityCheckMatrix {
        self.h
    }

    pub fn cn_count(&self) -> usize {
        self.h.m
    }

    pub fn vn_count(&self) -> usize {
        self.h.n
    }

    pub fn cn_neighbors(&self, c: usize) -> &'a [usize] {
        &self.h.rows[c]
    }

    pub fn vn_neighbors(&self, v: usize) -> &'a [usize] {
        &self.h.cols[v]
    }

    pub fn cn_degree(&self, c: usize) -> usize {
        self.h.rows[c].len()
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        self.h.cols[v].len()
    }

    /// BFS over both node classes starting from CN 0.
    pub fn is_connected(&self) -> bool {
        let (m, n) = (self.h.m, self.h.n);
        if m + n == 0 {
            return true;
        }
        let mut seen_cn = vec![false; m];
        let mut seen_vn = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        if m > 0 {
            seen_cn[0] = true;
            queue.push_back((true, 0));
        } else {
            seen_vn[0] = true;
            queue.push_back((false, 0));
        }
        while let Some((is_cn, i)) = queue.pop_front() {
            if is_cn {
                for &v in &self.h.rows[i] {
                    if !seen_vn[v] {
                        seen_vn[v] = true;
                        queue.push_back((false, v));
                    }
                }
            } else {
                for &c in &self.h.cols[i] {
                    if !seen_cn[c] {
                        seen_cn[c] = true;
                        queue.push_back((true, c));
                    }
                }
            }
        }
        seen_cn.iter().all(|&s| s) && seen_vn.iter().all(|&s| s)
    }
}

fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Array-based LDPC matrix H(gamma, p): a gamma x p grid of p x p circulant
/// blocks, where block (r, c) is the identity cyclically left-shifted by
/// r*c mod p positions.
pub fn build_ab_code(gamma: usize, p: usize) -> Result<ParityCheckMatrix> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if gamma == 0 || gamma > p {
        return Err(Error::invalid(format!(
            "gamma must satisfy 1 <= gamma <= p, got gamma={gamma}, p={p}"
        )));
    }
    let m = gamma * p;
    let n = p * p;
    let mut rows = vec![Vec::with_capacity(p); m];
    for row_group in 0..gamma {
        for col_group in 0..p {
            // Left-shifting the identity by z puts row i's 1 at column (i - z) mod p.
            let z = (row_group * col_group) % p;
            for i in 0..p {
                let col = col_group * p + (i + p - z) % p;
                rows[row_group * p + i].push(col);
            }
        }
    }
    ParityCheckMatrix::from_rows(n, rows)
}

/// Number of restarts before giving up on the girth target.
const PEG_MAX_RESTARTS: usize = 200;

/// Samples a (j,k)-regular matrix by progressive edge placement. Each VN gets
/// its edges one at a time; a candidate CN must have remaining capacity and
/// must not close a cycle shorter than `min_girth`. Among the candidates with
/// minimum current degree one is drawn at random. A dead end restarts the
/// whole construction from the RNG's next state.
pub fn build_regular_code(
    j: usize,
    k: usize,
    n: usize,
    seed: u64,
    min_girth: usize,
) -> Result<ParityCheckMatrix> {
    if j == 0 || k == 0 || n == 0 {
        return Err(Error::invalid("j, k and n must be positive"));
    }
    if (j * n) % k != 0 {
        return Err(Error::invalid(format!(
            "j*n = {} is not divisible by k = {k}",
            j * n
        )));
    }
    if !matches!(min_girth, 4 | 6 | 8) {
        return Err(Error::invalid(format!(
            "min_girth must be one of 4, 6, 8; got {min_girth}"
        )));
    }
    let m = j * n / k;
    if j > m {
        return Err(Error::invalid(format!(
            "column weight {j} exceeds the {m} available check nodes"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_failure = 0;
    for _ in 0..PEG_MAX_RESTARTS {
        match try_peg(j, k, n, m, min_girth, &mut rng) {
            Ok(rows) => {
                let h = ParityCheckMatrix::from_rows(n, rows)?;
                debug_assert!(min_girth < 6 || !h.has_four_cycle());
                return Ok(h);
            }
            Err(stuck_vn) => last_failure = stuck_vn,
        }
    }
    Err(Error::GirthUnreachable {
        vn: last_failure,
        girth: min_girth,
        restarts: PEG_MAX_RESTARTS,
    })
}

/// One construction attempt. Returns the per-CN rows, or the VN at which no
/// admissible CN remained.
fn try_peg(
    j: usize,
    k: usize,
    n: usize,
    m: usize,
    min_girth: usize,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Vec<Vec<usize>>, usize> {
    let mut cols: Vec<Vec<usize>> = vec![Vec::with_capacity(j); n];
    let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(k); m];
    // Linking v to a CN at BFS distance d closes a (d+1)-cycle, so CNs within
    // distance min_girth - 2 of v are forbidden: only the direct neighbors
    // for girth 4, plus one CN ring per extra girth step.
    let rings = (min_girth - 4) / 2;
    let mut forbidden = vec![false; m];
    let mut stamp = vec![0u32; m];
    let mut vn_stamp = vec![0u32; n];
    let mut epoch = 0u32;
    let mut candidates: Vec<usize> = Vec::with_capacity(m);

    for v in 0..n {
        for _ in 0..j {
            epoch += 1;
            forbidden.iter_mut().for_each(|f| *f = false);
            let mut frontier: Vec<usize> = cols[v].clone();
            for &c in &frontier {
                forbidden[c] = true;
                stamp[c] = epoch;
            }
            vn_stamp[v] = epoch;
            for _ in 0..rings {
                if frontier.is_empty() {
                    break;
                }
                let mut next = Vec::new();
                for &c in &frontier {
                    for &v2 in &rows[c] {
                        if vn_stamp[v2] == epoch {
                            continue;
                        }
                        vn_stamp[v2] = epoch;
                        for &c2 in &cols[v2] {
                            if stamp[c2] != epoch {
                                stamp[c2] = epoch;
                                forbidden[c2] = true;
                                next.push(c2);
                            }
                        }
                    }
                }
                frontier = next;
            }

            candidates.clear();
            let mut best_deg = usize::MAX;
            for (c, row) in rows.iter().enumerate() {
                if forbidden[c] || row.len() >= k {
                    continue;
                }
                match row.len().cmp(&best_deg) {
                    std::cmp::Ordering::Less => {
                        best_deg = row.len();
                        candidates.clear();
                        candidates.push(c);
                    }
                    std::cmp::Ordering::Equal => candidates.push(c),
                    std::cmp::Ordering::Greater => {}
                }
            }
            let Some(&c) = candidates[..].choose(rng) else {
                return Err(v);
            };
            rows[c].push(v);
            cols[v].push(c);
        }
    }
    Ok(rows)
}

/// Replaces each 1-entry of `base` with a random `lift` x `lift` circulant
/// permutation and each 0-entry with the zero block (quasi-cyclic lifting).
/// When the base has no 4-cycles the output is resampled until it has none
/// either.
pub fn lift_code(base: &ParityCheckMatrix, lift: usize, seed: u64) -> Result<ParityCheckMatrix> {
    if lift == 0 {
        return Err(Error::invalid("lift factor must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_four_cycle_free = !base.has_four_cycle();
    for _ in 0..PEG_MAX_RESTARTS {
        let mut rows = vec![Vec::new(); base.cn_count() * lift];
        for c in 0..base.cn_count() {
            for &v in base.cn_neighbors(c) {
                let shift = rng.random_range(0..lift);
                for i in 0..lift {
                    rows[c * lift + i].push(v * lift + (i + shift) % lift);
                }
            }
        }
        let h = ParityCheckMatrix::from_rows(base.vn_count() * lift, rows)?;
        if !base_four_cycle_free || !h.has_four_cycle() {
            return Ok(h);
        }
    }
    unreachable!("circulant lifting of a 4-cycle-free base cannot create 4-cycles");
}

/// Binary syndrome of a hard-decision word: component c is the XOR of `xhat`
/// over the VNs checked by CN c. All-zero output iff `xhat` is a codeword.
pub fn syndrome(h: &ParityCheckMatrix, xhat: &[u8]) -> Result<Vec<u8>> {
    if xhat.len() != h.vn_count() {
        return Err(Error::LengthMismatch {
            expected: h.vn_count(),
            got: xhat.len(),
        });
    }
    Ok((0..h.cn_count())
        .map(|c| {
            h.cn_neighbors(c)
                .iter()
                .fold(0u8, |acc, &v| acc ^ (xhat[v] & 1))
        })
        .collect())
}
