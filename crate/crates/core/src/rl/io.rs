//! Versioned binary persistence for Q-tables.
//!
//! Layout (all little-endian):
//! magic "LDPCQTBL", version u32, code fingerprint u64, CN count u64,
//! level count u64, representation-point count u64 + f64 points,
//! cluster count u64, per cluster (length u64 + CN indices u64...),
//! then per cluster M^z * z f64 action values in state-major order.

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::rl::{ClusterTable, QTable, Quantizer};

const MAGIC: &[u8; 8] = b"LDPCQTBL";
const VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::QTableFormat(format!(
                "truncated: needed {n} bytes for {what} at offset {}, only {} left",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| Error::QTableFormat(format!("{what} {v} overflows usize")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_bits(self.u64(what)?))
    }
}

pub fn save_qtable(q: &QTable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&q.code_fingerprint().to_le_bytes());
    out.extend_from_slice(&(q.clustering().cn_count() as u64).to_le_bytes());
    out.extend_from_slice(&(q.m_levels() as u64).to_le_bytes());
    let reps = q.quantizer().rep_points();
    out.extend_from_slice(&(reps.len() as u64).to_le_bytes());
    for &r in reps {
        out.extend_from_slice(&r.to_bits().to_le_bytes());
    }
    out.extend_from_slice(&(q.clustering().cluster_count() as u64).to_le_bytes());
    for cluster in q.clustering().clusters() {
        out.extend_from_slice(&(cluster.len() as u64).to_le_bytes());
        for &c in cluster {
            out.extend_from_slice(&(c as u64).to_le_bytes());
        }
    }
    for value in q.entries() {
        out.extend_from_slice(&value.to_bits().to_le_bytes());
    }
    out
}

pub fn load_qtable(bytes: &[u8]) -> Result<QTable> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(8, "magic")?;
    if magic != MAGIC {
        return Err(Error::QTableFormat(format!(
            "bad magic {magic:02x?}, expected {MAGIC:02x?}"
        )));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::QTableVersion {
            got: version,
            supported: VERSION,
        });
    }
    let fingerprint = r.u64("code fingerprint")?;
    let m = r.usize("CN count")?;
    let m_levels = r.usize("level count")?;
    let rep_count = r.usize("representation point count")?;
    if rep_count != m_levels {
        return Err(Error::QTableFormat(format!(
            "level count {m_levels} does not match {rep_count} representation points"
        )));
    }
    let mut reps = Vec::with_capacity(rep_count);
    for _ in 0..rep_count {
        reps.push(r.f64("representation point")?);
    }
    let quantizer = Quantizer::new(reps)?;

    let cluster_count = r.usize("cluster count")?;
    let mut clusters = Vec::with_capacity(cluster_count);
    for _ in 0..cluster_count {
        let len = r.usize("cluster length")?;
        let mut cluster = Vec::with_capacity(len);
        for _ in 0..len {
            cluster.push(r.usize("CN index")?);
        }
        clusters.push(cluster);
    }
    let clustering = Clustering::from_clusters(clusters)?;
    if clustering.cn_count() != m {
        return Err(Error::QTableFormat(format!(
            "header says {m} CNs but the clustering covers {}",
            clustering.cn_count()
        )));
    }

    let mut tables = Vec::with_capacity(cluster_count);
    for cluster in clustering.clusters() {
        let z = cluster.len();
        let states = (m_levels as u128).pow(z as u32);
        let states = usize::try_from(states)
            .map_err(|_| Error::QTableFormat(format!("M^z overflow for z = {z}")))?;
        let mut q = Vec::with_capacity(states * z);
        for _ in 0..states * z {
            q.push(r.f64("action value")?);
        }
        tables.push(ClusterTable {
            states,
            actions: z,
            q,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::QTableFormat(format!(
            "{} trailing bytes after payload",
            bytes.len() - r.pos
        )));
    }
    QTable::from_parts(clustering, quantizer, fingerprint, tables)
}
