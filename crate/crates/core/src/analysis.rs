//! Structural analysis of Tanner graphs: exhaustive short-cycle enumeration,
//! girth, cluster-connecting sets and the bounds that govern their size.

use crate::error::{Error, Result};
use crate::tanner::TannerGraph;
use std::collections::VecDeque;

/// A length-2t cycle through t check nodes and t variable nodes, stored in
/// canonical form: the lexicographically minimal interleaved sequence
/// `c0, v0, c1, v1, ...` over all rotations and both directions, where edge
/// `v_i - c_{i+1 mod t}` closes the ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    cns: Vec<usize>,
    vns: Vec<usize>,
}

impl Cycle {
    /// Canonicalizes a raw alternating walk `c0 - v0 - c1 - ... - v_{t-1} - c0`.
    pub fn new(cns: Vec<usize>, vns: Vec<usize>) -> Self {
        assert_eq!(cns.len(), vns.len());
        let t = cns.len();
        let mut best: Option<Vec<usize>> = None;
        let mut consider = |cand: Vec<usize>| {
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        };
        for s in 0..t {
            // Forward from c_s: c_s, v_s, c_{s+1}, v_{s+1}, ...
            let mut fwd = Vec::with_capacity(2 * t);
            // Backward from c_s: c_s, v_{s-1}, c_{s-1}, v_{s-2}, ...
            let mut bwd = Vec::with_capacity(2 * t);
            for i in 0..t {
                fwd.push(cns[(s + i) % t]);
                fwd.push(vns[(s + i) % t]);
                bwd.push(cns[(s + t - i) % t]);
                bwd.push(vns[(s + t - i + t - 1) % t]);
            }
            consider(fwd);
            consider(bwd);
        }
        let canon = best.unwrap();
        Self {
            cns: canon.iter().step_by(2).copied().collect(),
            vns: canon.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    pub fn len(&self) -> usize {
        2 * self.cns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cns.is_empty()
    }

    pub fn cns(&self) -> &[usize] {
        &self.cns
    }

    pub fn vns(&self) -> &[usize] {
        &self.vns
    }
}

/// Returns every distinct length-`kappa` cycle exactly once, sorted by
/// canonical form. Exhaustive search: each cycle is discovered from its
/// smallest CN, walking only towards larger second/last CNs to kill
/// rotations, with `v0 < v_last` to kill the reflection.
pub fn enumerate_cycles(g: &TannerGraph<'_>, kappa: usize) -> Result<Vec<Cycle>> {
    if !matches!(kappa, 4 | 6 | 8) {
        return Err(Error::UnsupportedCycleLength(kappa));
    }
    let t = kappa / 2;
    let mut out = Vec::new();
    let mut cns = Vec::with_capacity(t);
    let mut vns = Vec::with_capacity(t);
    for c0 in 0..g.cn_count() {
        cns.push(c0);
        extend_cycles(g, c0, t, &mut cns, &mut vns, &mut out);
        cns.pop();
    }
    debug_assert!({
        let set: std::collections::HashSet<&Cycle> = out.iter().collect();
        set.len() == out.len()
    });
    out.sort_unstable();
    Ok(out)
}

fn extend_cycles(
    g: &TannerGraph<'_>,
    c0: usize,
    t: usize,
    cns: &mut Vec<usize>,
    vns: &mut Vec<usize>,
    out: &mut Vec<Cycle>,
) {
    if cns.len() == t {
        // Close the ring through a final VN adjacent to both ends.
        let last = *cns.last().unwrap();
        for &v in g.cn_neighbors(last) {
            if vns[0] < v && !vns.contains(&v) && g.vn_neighbors(v).contains(&c0) {
                vns.push(v);
                out.push(Cycle::new(cns.clone(), vns.clone()));
                vns.pop();
            }
        }
        return;
    }
    let cur = *cns.last().unwrap();
    for &v in g.cn_neighbors(cur) {
        if vns.contains(&v) {
            continue;
        }
        vns.push(v);
        for &c in g.vn_neighbors(v) {
            if c > c0 && !cns.contains(&c) {
                cns.push(c);
                extend_cycles(g, c0, t, cns, vns, out);
                cns.pop();
            }
        }
        vns.pop();
    }
}

/// Length of the shortest cycle, or `None` for a forest. BFS from every CN;
/// the first non-tree edge seen at each root bounds the shortest cycle
/// through that root, and the minimum over roots is exact.
pub fn girth(g: &TannerGraph<'_>) -> Option<usize> {
    let m = g.cn_count();
    let n = g.vn_count();
    let mut best: Option<usize> = None;
    // Nodes 0..m are CNs, m..m+n are VNs.
    let mut dist = vec![usize::MAX; m + n];
    let mut parent = vec![usize::MAX; m + n];
    for root in 0..m {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        let mut queue = VecDeque::new();
        dist[root] = 0;
        parent[root] = usize::MAX;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            if let Some(b) = best {
                if 2 * dist[u] >= b {
                    break;
                }
            }
            let neighbors: &[usize] = if u < m {
                g.cn_neighbors(u)
            } else {
                g.vn_neighbors(u - m)
            };
            for &w0 in neighbors {
                let w = if u < m { w0 + m } else { w0 };
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    if best.is_none_or(|b| len < b) {
                        best = Some(len);
                    }
                }
            }
        }
        if best == Some(4) {
            break;
        }
    }
    best
}

/// The cluster-connecting set of a CN cluster and its edge counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcsReport {
    /// VNs adjacent to both the cluster and its complement, ascending.
    pub w: Vec<usize>,
    /// |W|.
    pub a: usize,
    /// Number of cluster CNs adjacent to W.
    pub b: usize,
    /// Edges between the cluster and W.
    pub edges_in: usize,
    /// Edges between the complement and W.
    pub edges_out: usize,
    /// edges_in + edges_out.
    pub zeta: usize,
}

fn cluster_mask(g: &TannerGraph<'_>, cluster: &[usize]) -> Result<Vec<bool>> {
    let m = g.cn_count();
    let mut mask = vec![false; m];
    for &c in cluster {
        if c >= m {
            return Err(Error::invalid(format!("check node {c} out of range (m = {m})")));
        }
        if std::mem::replace(&mut mask[c], true) {
            return Err(Error::invalid(format!("duplicate check node {c} in cluster")));
        }
    }
    Ok(mask)
}

pub fn ccs(g: &TannerGraph<'_>, cluster: &[usize]) -> Result<CcsReport> {
    if cluster.is_empty() || cluster.len() >= g.cn_count() {
        return Err(Error::ImproperCluster);
    }
    let mask = cluster_mask(g, cluster)?;

    let mut w = Vec::new();
    let mut edges_in = 0;
    let mut edges_out = 0;
    let mut touched = vec![false; g.cn_count()];
    for v in 0..g.vn_count() {
        let deg_in = g.vn_neighbors(v).iter().filter(|&&c| mask[c]).count();
        let deg = g.vn_degree(v);
        if deg_in > 0 && deg_in < deg {
            w.push(v);
            edges_in += deg_in;
            edges_out += deg - deg_in;
            for &c in g.vn_neighbors(v) {
                if mask[c] {
                    touched[c] = true;
                }
            }
        }
    }
    let b = touched.iter().filter(|&&t| t).count();
    Ok(CcsReport {
        a: w.len(),
        w,
        b,
        edges_in,
        edges_out,
        zeta: edges_in + edges_out,
    })
}

/// Total edges connecting `cluster` to its complement through its CCS.
/// Unlike [`ccs`] this accepts the full CN set, for which the CCS is empty
/// and zeta is 0.
pub fn zeta(g: &TannerGraph<'_>, cluster: &[usize]) -> Result<usize> {
    if cluster.is_empty() {
        return Err(Error::ImproperCluster);
    }
    if cluster.len() == g.cn_count() {
        cluster_mask(g, cluster)?; // still validate indices
        return Ok(0);
    }
    Ok(ccs(g, cluster)?.zeta)
}

/// |N_V(C_u)|: the number of VNs adjacent to the cluster.
pub fn cluster_vn_neighborhood(g: &TannerGraph<'_>, cluster: &[usize]) -> Result<usize> {
    let mask = cluster_mask(g, cluster)?;
    Ok((0..g.vn_count())
        .filter(|&v| g.vn_neighbors(v).iter().any(|&c| mask[c]))
        .count())
}

/// CCS size interval for a size-z cluster with v VN neighbors in a
/// (j,k)-regular graph: `[v - floor(kz/j), min(jv - kz, v)]`.
pub fn ccs_bounds_regular(j: usize, k: usize, z: usize, v: usize) -> Result<(i64, i64)> {
    if j < 2 || k < 2 {
        return Err(Error::invalid("degree parameters must satisfy j, k >= 2"));
    }
    if z < 1 {
        return Err(Error::invalid("cluster size z must be >= 1"));
    }
    let (j, k, z, v) = (j as i64, k as i64, z as i64, v as i64);
    let lower = v - (k * z) / j;
    let upper = (j * v - k * z).min(v);
    Ok((lower, upper))
}

/// Which structural case of the AB-code CCS theorem applies to a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbClusterKind {
    /// Any size-z cluster.
    Generic,
    /// All cluster CNs in the same row group.
    SameRowGroup,
    /// Every cluster CN lies on a 6-cycle whose other two CNs are clustered.
    TripleSixCycles,
}

/// CCS size bound for clusters in an H(3,p) array-based code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbCcsBound {
    /// |W| >= numerator/4; since |W| is an integer, |W| >= ceil.
    GenericLower { numerator: i64, ceil: i64 },
    /// |W| = zp exactly.
    SameRowGroupExact { value: i64 },
    /// |W| <= zp - z.
    TripleSixCyclesUpper { value: i64 },
}

impl AbCcsBound {
    /// The usable integer bound (ceil of the rational for the generic case).
    pub fn value(&self) -> i64 {
        match *self {
            AbCcsBound::GenericLower { ceil, .. } => ceil,
            AbCcsBound::SameRowGroupExact { value } => value,
            AbCcsBound::TripleSixCyclesUpper { value } => value,
        }
    }
}

pub fn ccs_bounds_ab(p: usize, z: usize, kind: AbClusterKind) -> Result<AbCcsBound> {
    if z < 1 || z > p {
        return Err(Error::invalid(format!(
            "cluster size must satisfy 1 <= z <= p, got z={z}, p={p}"
        )));
    }
    let (pi, zi) = (p as i64, z as i64);
    Ok(match kind {
        AbClusterKind::Generic => {
            let numerator = (1 + 2 * pi) * zi - zi * zi;
            AbCcsBound::GenericLower {
                numerator,
                ceil: numerator.div_euclid(4) + i64::from(numerator.rem_euclid(4) != 0),
            }
        }
        AbClusterKind::SameRowGroup => AbCcsBound::SameRowGroupExact { value: zi * pi },
        AbClusterKind::TripleSixCycles => {
            if z < 3 || z >= p {
                return Err(Error::invalid(format!(
                    "6-cycle-triple bound needs 3 <= z < p, got z={z}, p={p}"
                )));
            }
            AbCcsBound::TripleSixCyclesUpper { value: zi * pi - zi }
        }
    })
}
