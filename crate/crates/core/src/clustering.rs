//! Partitioning of the check-node set into size-z clusters: contiguous,
//! random, cycle-optimized (greedy growth around the CNs that participate in
//! the most short cycles) and an exact greedy zeta-minimizer for small
//! graphs.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{enumerate_cycles, zeta};
use crate::error::{Error, Result};
use crate::tanner::TannerGraph;

/// A partition of the CN set into ordered clusters. The within-cluster order
/// is significant: it fixes the digit order of the learned state encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Clustering {
    clusters: Vec<Vec<usize>>,
    /// CN index -> (cluster index, within-cluster position).
    membership: Vec<(usize, usize)>,
    z: usize,
}

impl Clustering {
    /// Validates that `clusters` partitions 0..m (m = total entry count),
    /// with every cluster of the nominal size except possibly the last.
    pub fn from_clusters(clusters: Vec<Vec<usize>>) -> Result<Self> {
        let m: usize = clusters.iter().map(|c| c.len()).sum();
        let invalid = |msg: String| Error::InvalidClustering(msg, m);
        if clusters.is_empty() || clusters.iter().any(|c| c.is_empty()) {
            return Err(invalid("empty cluster".into()));
        }
        let z = clusters[0].len();
        for (u, cluster) in clusters.iter().enumerate() {
            let expect_full = u + 1 < clusters.len();
            if (expect_full && cluster.len() != z) || cluster.len() > z {
                return Err(invalid(format!(
                    "cluster {u} has size {} but the nominal size is {z}",
                    cluster.len()
                )));
            }
        }
        let mut membership = vec![(usize::MAX, usize::MAX); m];
        for (u, cluster) in clusters.iter().enumerate() {
            for (pos, &c) in cluster.iter().enumerate() {
                if c >= m {
                    return Err(invalid(format!("CN index {c} out of range")));
                }
                if membership[c] != (usize::MAX, usize::MAX) {
                    return Err(invalid(format!("CN {c} appears twice")));
                }
                membership[c] = (u, pos);
            }
        }
        Ok(Self {
            clusters,
            membership,
            z,
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn cn_count(&self) -> usize {
        self.membership.len()
    }

    /// Nominal cluster size (every cluster but possibly the last).
    pub fn z(&self) -> usize {
        self.z
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster(&self, u: usize) -> &[usize] {
        &self.clusters[u]
    }

    /// (cluster index, within-cluster position) of a CN.
    pub fn membership(&self, cn: usize) -> (usize, usize) {
        self.membership[cn]
    }
}

impl TryFrom<Vec<Vec<usize>>> for Clustering {
    type Error = Error;
    fn try_from(clusters: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_clusters(clusters)
    }
}

impl From<Clustering> for Vec<Vec<usize>> {
    fn from(c: Clustering) -> Self {
        c.clusters
    }
}

fn check_z(m: usize, z: usize) -> Result<()> {
    if z == 0 || z > m {
        return Err(Error::invalid(format!(
            "cluster size must satisfy 1 <= z <= m, got z={z}, m={m}"
        )));
    }
    Ok(())
}

/// Cluster u = {uz, ..., uz+z-1}, ascending, last one truncated.
pub fn cluster_contiguous(m: usize, z: usize) -> Result<Clustering> {
    check_z(m, z)?;
    let clusters = (0..m)
        .chunks(z)
        .into_iter()
        .map(|chunk| chunk.collect())
        .collect();
    Clustering::from_clusters(clusters)
}

/// A uniformly random permutation of the CNs chopped into size-z blocks.
pub fn cluster_random(m: usize, z: usize, seed: u64) -> Result<Clustering> {
    check_z(m, z)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    let clusters = perm
        .into_iter()
        .chunks(z)
        .into_iter()
        .map(|chunk| chunk.collect())
        .collect();
    Clustering::from_clusters(clusters)
}

/// Result of the cycle-maximizing strategy, with enough provenance to audit
/// which clusters were actually grown from a full candidate pool.
#[derive(Debug, Clone)]
pub struct CycleOptimizedClustering {
    pub clustering: Clustering,
    /// Per cluster: true when the candidate pool held at least z CNs, i.e.
    /// the cluster was assembled purely from cycle mates of its seed CN.
    pub pool_met: Vec<bool>,
    /// True when the graph had no kappa-cycles and the result degenerated to
    /// a random clustering.
    pub fell_back_to_random: bool,
}

/// Greedy cycle-maximizing clustering. The CN sets of all kappa-cycles are
/// collected; each step seeds a cluster with the unclustered CN appearing in
/// the most cycle sets and grows it by whole cycle sets drawn from the
/// seed's pool, so that every grown CN lies on a cycle that is internal to
/// the cluster. When the pool cannot fill the cluster, random unclustered
/// CNs pad the remainder.
pub fn cluster_cycle_optimized(
    g: &TannerGraph<'_>,
    z: usize,
    kappa: usize,
    seed: u64,
) -> Result<CycleOptimizedClustering> {
    let m = g.cn_count();
    check_z(m, z)?;
    let cycles = enumerate_cycles(g, kappa)?;
    if cycles.is_empty() {
        return Ok(CycleOptimizedClustering {
            clustering: cluster_random(m, z, seed)?,
            pool_met: Vec::new(),
            fell_back_to_random: true,
        });
    }
    let sets: Vec<&[usize]> = cycles.iter().map(|cy| cy.cns()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unclustered = vec![true; m];
    let mut remaining = m;
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(m.div_ceil(z));
    let mut pool_met = Vec::new();

    while remaining > 0 {
        if remaining <= z {
            // The leftover CNs form the final cluster.
            let last: Vec<usize> = (0..m).filter(|&c| unclustered[c]).collect();
            pool_met.push(false);
            clusters.push(last);
            break;
        }

        // Seed: the unclustered CN appearing in the most cycle sets.
        let mut freq = vec![0usize; m];
        for set in &sets {
            for &c in *set {
                if unclustered[c] {
                    freq[c] += 1;
                }
            }
        }
        let seed_cn = (0..m)
            .filter(|&c| unclustered[c])
            .max_by_key(|&c| (freq[c], std::cmp::Reverse(c)))
            .expect("remaining > 0");

        // Pool: unclustered CNs sharing a cycle set with the seed, weighted
        // by how many of those sets they appear in.
        let mut shared = vec![0usize; m];
        for set in &sets {
            if set.contains(&seed_cn) {
                for &c in *set {
                    if unclustered[c] && c != seed_cn {
                        shared[c] += 1;
                    }
                }
            }
        }
        let pool_size = 1 + (0..m).filter(|&c| shared[c] > 0).count();

        // Grow by whole cycle sets that are fully unclustered and whose new
        // members sit in the pool, so each added CN is on an internal cycle.
        // Larger batches first spread the cluster across the graph; ties go
        // to the heavier-shared, lexicographically smaller set.
        let mut in_cluster = vec![false; m];
        let mut cluster = vec![seed_cn];
        in_cluster[seed_cn] = true;
        loop {
            let capacity = z - cluster.len();
            if capacity == 0 {
                break;
            }
            let mut best: Option<(usize, usize, &[usize], Vec<usize>)> = None;
            for set in &sets {
                if set.iter().any(|&c| !unclustered[c]) {
                    continue;
                }
                let mut new: Vec<usize> = set
                    .iter()
                    .copied()
                    .filter(|&c| !in_cluster[c])
                    .collect();
                if new.is_empty() || new.len() > capacity || new.iter().any(|&c| shared[c] == 0) {
                    continue;
                }
                new.sort_by_key(|&c| (std::cmp::Reverse(shared[c]), c));
                let score: usize = new.iter().map(|&c| shared[c]).sum();
                let better = match &best {
                    None => true,
                    Some((blen, bscore, bset, _)) => {
                        (new.len(), score, std::cmp::Reverse(*set))
                            > (*blen, *bscore, std::cmp::Reverse(*bset))
                    }
                };
                if better {
                    best = Some((new.len(), score, *set, new));
                }
            }
            let Some((_, _, _, new)) = best else { break };
            for &c in &new {
                in_cluster[c] = true;
            }
            cluster.extend(new);
        }
        // Flag clusters assembled purely from internal cycle sets: those are
        // the ones whose members are all guaranteed to lie on a cluster-
        // internal cycle.
        pool_met.push(pool_size >= z && cluster.len() == z);

        // Pool members that no whole set could bring in, heaviest first.
        if cluster.len() < z {
            let mut rest: Vec<usize> = (0..m)
                .filter(|&c| shared[c] > 0 && !in_cluster[c])
                .collect();
            rest.sort_by_key(|&c| (std::cmp::Reverse(shared[c]), c));
            for c in rest.into_iter().take(z - cluster.len()) {
                in_cluster[c] = true;
                cluster.push(c);
            }
        }

        // Random padding from outside the pool.
        if cluster.len() < z {
            let mut spare: Vec<usize> = (0..m)
                .filter(|&c| unclustered[c] && !in_cluster[c])
                .collect();
            let need = z - cluster.len();
            let (picked, _) = spare.partial_shuffle(&mut rng, need);
            cluster.extend(picked.iter().copied());
        }

        for &c in &cluster {
            unclustered[c] = false;
        }
        remaining -= cluster.len();
        clusters.push(cluster);
    }

    Ok(CycleOptimizedClustering {
        clustering: Clustering::from_clusters(clusters)?,
        pool_met,
        fell_back_to_random: false,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Greedy exact optimization: each step enumerates every size-z subset of the
/// still-unclustered CNs and keeps the one with minimum zeta (ties broken
/// lexicographically); the leftover CNs form the final cluster without
/// optimization.
pub fn cluster_exhaustive(g: &TannerGraph<'_>, z: usize, budget: u128) -> Result<Clustering> {
    let m = g.cn_count();
    check_z(m, z)?;
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut clusters = Vec::with_capacity(m.div_ceil(z));
    while remaining.len() > z {
        let subsets = binomial(remaining.len(), z);
        if subsets > budget {
            return Err(Error::EnumerationBudget {
                remaining: remaining.len(),
                z,
                subsets,
                budget,
            });
        }
        let mut best: Option<(usize, Vec<usize>)> = None;
        // combinations() of the sorted remainder is lexicographic, so strict
        // improvement keeps the lexicographically smallest minimizer.
        for subset in remaining.iter().copied().combinations(z) {
            let score = zeta(g, &subset)?;
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, subset));
            }
        }
        let (_, chosen) = best.expect("at least one subset");
        remaining.retain(|c| !chosen.contains(c));
        clusters.push(chosen);
    }
    clusters.push(remaining);
    Clustering::from_clusters(clusters)
}
