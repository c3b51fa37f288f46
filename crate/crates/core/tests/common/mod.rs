//! Shared oracles for the integration suites. Everything here is written
//! from the definitions, independent of the library's own algorithms.
#![allow(dead_code)] // each test binary uses its own subset

use ldpc_sched::tanner::ParityCheckMatrix;

/// By-definition zeta over a dense view: every VN adjacent to both the
/// cluster and its complement contributes its full degree.
pub fn naive_zeta(h: &ParityCheckMatrix, cluster: &[usize]) -> usize {
    let in_cluster = |c: usize| cluster.contains(&c);
    let mut zeta = 0;
    for v in 0..h.vn_count() {
        let nbrs = h.vn_neighbors(v);
        let inside = nbrs.iter().filter(|&&c| in_cluster(c)).count();
        if inside > 0 && inside < nbrs.len() {
            zeta += nbrs.len();
        }
    }
    zeta
}

/// Counts length-`kappa` cycles by enumerating every directed closed simple
/// alternating walk from every CN and dividing by the kappa representations
/// each cycle has (kappa/2 starting CNs times 2 directions).
pub fn count_cycles_by_walks(h: &ParityCheckMatrix, kappa: usize) -> usize {
    let t = kappa / 2;
    let mut total = 0usize;
    let mut cns = Vec::with_capacity(t);
    let mut vns = Vec::with_capacity(t);
    for c0 in 0..h.cn_count() {
        cns.push(c0);
        walk(h, c0, t, &mut cns, &mut vns, &mut total);
        cns.pop();
    }
    assert_eq!(total % (2 * t), 0, "walk count must be a multiple of 2t");
    total / (2 * t)
}

fn walk(
    h: &ParityCheckMatrix,
    c0: usize,
    t: usize,
    cns: &mut Vec<usize>,
    vns: &mut Vec<usize>,
    total: &mut usize,
) {
    let cur = *cns.last().unwrap();
    if cns.len() == t {
        for &v in h.cn_neighbors(cur) {
            if !vns.contains(&v) && h.vn_neighbors(v).contains(&c0) {
                *total += 1;
            }
        }
        return;
    }
    for &v in h.cn_neighbors(cur) {
        if vns.contains(&v) {
            continue;
        }
        vns.push(v);
        for &c in h.vn_neighbors(v) {
            if !cns.contains(&c) {
                cns.push(c);
                walk(h, c0, t, cns, vns, total);
                cns.pop();
            }
        }
        vns.pop();
    }
}

/// All size-z subsets of 0..m in lexicographic order.
pub fn subsets(m: usize, z: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(z);
    fn rec(start: usize, m: usize, z: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == z {
            out.push(cur.clone());
            return;
        }
        for c in start..m {
            cur.push(c);
            rec(c + 1, m, z, cur, out);
            cur.pop();
        }
    }
    rec(0, m, z, &mut cur, &mut out);
    out
}
