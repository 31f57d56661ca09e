//! Single parity check codebook and the resolvable design built from it.
//!
//! Points are the `q^(k-1)` columns of the codeword matrix `T`; block
//! `B(i, l)` collects the columns whose `i`-th symbol equals `l`. Each row of
//! `T` yields one parallel class of `q` disjoint blocks.
//!
//! Indices are 0-based throughout: class `i` in `0..k`, label `l` in `0..q`,
//! point `j` in `0..q^(k-1)`. Column `j` is the codeword of the message whose
//! base-`q` digits (most significant first) spell `j`.

use std::fmt;

use crate::{Error, Result};

/// Largest subpacketization we are willing to materialize as explicit
/// incidence.
pub const MAX_SUBPACKETIZATION: u64 = 1 << 24;

/// Parameters of the proposed scheme: `K = q*k` users, cache ratio `1/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    q: usize,
    k: usize,
}

impl SchemeParams {
    pub fn new(q: usize, k: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!("q must be ≥ 2 (got {q})")));
        }
        if k < 2 {
            return Err(Error::InvalidParams(format!("k must be ≥ 2 (got {k})")));
        }
        let points = (q as u64)
            .checked_pow((k - 1) as u32)
            .filter(|&f| f <= MAX_SUBPACKETIZATION);
        if points.is_none() {
            return Err(Error::InvalidParams(format!(
                "subpacketization q^(k-1) = {q}^{} exceeds {MAX_SUBPACKETIZATION}",
                k - 1
            )));
        }
        Ok(Self { q, k })
    }

    /// Alphabet size; the cache ratio is `1/q`.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Codeword length, equal to the number of parallel classes.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn users(&self) -> usize {
        self.q * self.k
    }

    /// `q^(k-1)`: number of points, i.e. subfiles per file.
    pub fn subpacketization(&self) -> usize {
        self.q.pow((self.k - 1) as u32)
    }

    /// `q^(k-2)`: points per block.
    pub fn block_size(&self) -> usize {
        self.q.pow((self.k - 2) as u32)
    }
}

/// The `k x q^(k-1)` matrix `T` whose columns are all SPC codewords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpcCodebook {
    params: SchemeParams,
    rows: Vec<Vec<usize>>,
}

impl SpcCodebook {
    pub fn params(&self) -> SchemeParams {
        self.params
    }

    /// `T[row][column]`.
    pub fn entry(&self, row: usize, column: usize) -> usize {
        self.rows[row][column]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn column(&self, column: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[column]).collect()
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// Enumerate every codeword `u * G_SPC`, with `u` in lexicographic order.
pub fn enumerate_codewords(params: SchemeParams) -> SpcCodebook {
    let (q, k) = (params.q, params.k);
    let n = params.subpacketization();
    let mut rows = vec![vec![0usize; n]; k];
    #[allow(clippy::needless_range_loop)] // filled column by column
    for j in 0..n {
        let message = message_of_point(j, q, k);
        // systematic part is the message itself, last symbol is its sum
        for (i, &u) in message.iter().enumerate() {
            rows[i][j] = u;
        }
        rows[k - 1][j] = message.iter().sum::<usize>() % q;
    }
    SpcCodebook { params, rows }
}

fn message_of_point(mut point: usize, q: usize, k: usize) -> Vec<usize> {
    let mut digits = vec![0; k - 1];
    for d in digits.iter_mut().rev() {
        *d = point % q;
        point /= q;
    }
    digits
}

fn point_of_message(message: &[usize], q: usize) -> usize {
    message.iter().fold(0, |acc, &u| acc * q + u)
}

/// Block `B(class, label)`: the points whose codeword has symbol `label` at
/// position `class`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    pub class: usize,
    pub label: usize,
}

impl BlockId {
    pub fn new(class: usize, label: usize) -> Self {
        Self { class, label }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({},{})", self.class + 1, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvableDesign {
    codebook: SpcCodebook,
    /// Indexed by `class * q + label`; each block sorted ascending.
    blocks: Vec<Vec<usize>>,
}

impl ResolvableDesign {
    pub fn build(codebook: SpcCodebook) -> Self {
        let SchemeParams { q, k } = codebook.params;
        let mut blocks = vec![Vec::with_capacity(codebook.params.block_size()); q * k];
        for (class, row) in codebook.rows.iter().enumerate() {
            for (point, &label) in row.iter().enumerate() {
                blocks[class * q + label].push(point);
            }
        }
        Self { codebook, blocks }
    }

    pub fn params(&self) -> SchemeParams {
        self.codebook.params
    }

    pub fn codebook(&self) -> &SpcCodebook {
        &self.codebook
    }

    pub fn point_count(&self) -> usize {
        self.codebook.columns()
    }

    pub fn block(&self, id: BlockId) -> &[usize] {
        &self.blocks[id.class * self.params().q + id.label]
    }

    /// All `k*q` blocks, class-major.
    pub fn blocks(&self) -> impl Iterator<Item = (BlockId, &[usize])> + '_ {
        let q = self.params().q;
        self.blocks
            .iter()
            .enumerate()
            .map(move |(idx, b)| (BlockId::new(idx / q, idx % q), b.as_slice()))
    }

    /// Parallel class `class`: its `q` blocks in label order.
    pub fn parallel_class(&self, class: usize) -> &[Vec<usize>] {
        let q = self.params().q;
        &self.blocks[class * q..(class + 1) * q]
    }

    pub fn contains(&self, id: BlockId, point: usize) -> bool {
        self.codebook.rows[id.class][point] == id.label
    }

    /// The unique point shared by `k-1` blocks from distinct parallel classes.
    ///
    /// Solves the linear system over `Z_q` directly: the systematic classes
    /// fix message coordinates, and if the parity class is among the picks
    /// its label fixes the one remaining coordinate through the sum.
    pub fn intersect_point(&self, picks: &[BlockId]) -> Result<usize> {
        let SchemeParams { q, k } = self.params();
        if picks.len() != k - 1 {
            return Err(Error::InvalidPicks(format!(
                "expected {} picks, got {}",
                k - 1,
                picks.len()
            )));
        }
        let mut seen = vec![false; k];
        for p in picks {
            if p.class >= k || p.label >= q {
                return Err(Error::InvalidPicks(format!("{p} is out of range")));
            }
            if std::mem::replace(&mut seen[p.class], true) {
                return Err(Error::InvalidPicks(format!(
                    "class {} picked more than once",
                    p.class + 1
                )));
            }
        }

        let mut message = vec![0usize; k - 1];
        let mut parity = None;
        for p in picks {
            if p.class == k - 1 {
                parity = Some(p.label);
            } else {
                message[p.class] = p.label;
            }
        }
        if let Some(sum) = parity {
            // exactly one systematic coordinate is still free
            let free = (0..k - 1).find(|&i| !seen[i]).expect("one class is absent");
            let known = message.iter().sum::<usize>() % q;
            message[free] = (sum + q - known) % q;
        }

        let point = point_of_message(&message, q);
        if let Some(bad) = picks.iter().find(|p| !self.contains(**p, point)) {
            return Err(Error::Inconsistent(format!(
                "solved point {} is not in {bad}",
                point + 1
            )));
        }
        Ok(point)
    }
}

pub fn build_design(codebook: SpcCodebook) -> ResolvableDesign {
    ResolvableDesign::build(codebook)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(q: usize, k: usize) -> ResolvableDesign {
        ResolvableDesign::build(enumerate_codewords(SchemeParams::new(q, k).unwrap()))
    }

    fn one_based(points: &[usize]) -> Vec<usize> {
        points.iter().map(|p| p + 1).collect()
    }

    #[test]
    fn rejects_degenerate_params() {
        assert!(matches!(SchemeParams::new(1, 3), Err(Error::InvalidParams(_))));
        assert!(matches!(SchemeParams::new(2, 1), Err(Error::InvalidParams(_))));
        assert!(matches!(SchemeParams::new(0, 0), Err(Error::InvalidParams(_))));
        let msg = SchemeParams::new(1, 3).unwrap_err().to_string();
        assert!(msg.contains("q must be ≥ 2"), "{msg}");
        assert!(SchemeParams::new(2, 40).is_err());
    }

    #[test]
    fn derived_sizes() {
        let p = SchemeParams::new(3, 4).unwrap();
        assert_eq!(p.users(), 12);
        assert_eq!(p.subpacketization(), 27);
        assert_eq!(p.block_size(), 9);
    }

    #[test]
    fn codebook_q2_k3() {
        let t = enumerate_codewords(SchemeParams::new(2, 3).unwrap());
        assert_eq!(
            t.rows(),
            &[vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 1, 1, 0]]
        );
        assert_eq!(t.column(2), vec![1, 0, 1]);
    }

    #[test]
    fn codebook_q2_k2_and_q3_k2() {
        let t = enumerate_codewords(SchemeParams::new(2, 2).unwrap());
        assert_eq!(t.rows(), &[vec![0, 1], vec![0, 1]]);
        let t = enumerate_codewords(SchemeParams::new(3, 2).unwrap());
        assert_eq!(t.rows(), &[vec![0, 1, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn codebook_matches_generator_product() {
        // c = u * [I | 1], computed as an explicit matrix product
        for (q, k) in [(2, 4), (3, 3), (4, 3), (5, 2)] {
            let t = enumerate_codewords(SchemeParams::new(q, k).unwrap());
            let mut generator = vec![vec![0usize; k]; k - 1];
            for (i, row) in generator.iter_mut().enumerate() {
                row[i] = 1;
                row[k - 1] = 1;
            }
            let mut col = 0;
            let mut msgs = vec![vec![]];
            for _ in 0..k - 1 {
                msgs = msgs
                    .into_iter()
                    .flat_map(|m: Vec<usize>| {
                        (0..q).map(move |d| {
                            let mut m = m.clone();
                            m.push(d);
                            m
                        })
                    })
                    .collect();
            }
            for u in msgs {
                let c: Vec<usize> = (0..k)
                    .map(|j| (0..k - 1).map(|i| u[i] * generator[i][j]).sum::<usize>() % q)
                    .collect();
                assert_eq!(t.column(col), c);
                col += 1;
            }
            assert_eq!(col, t.columns());
        }
    }

    #[test]
    fn blocks_q2_k3() {
        let d = design(2, 3);
        let blocks: Vec<Vec<usize>> = d.blocks().map(|(_, b)| one_based(b)).collect();
        assert_eq!(
            blocks,
            vec![
                vec![1, 2],
                vec![3, 4],
                vec![1, 3],
                vec![2, 4],
                vec![1, 4],
                vec![2, 3]
            ]
        );
        assert_eq!(d.parallel_class(2), &[vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn blocks_q2_k2_are_singletons() {
        let d = design(2, 2);
        assert_eq!(d.parallel_class(0), &[vec![0], vec![1]]);
        assert_eq!(d.parallel_class(1), &[vec![0], vec![1]]);
    }

    #[test]
    fn blocks_q3_k3_match_column_scan() {
        let d = design(3, 3);
        let t = d.codebook();
        assert_eq!(d.point_count(), 9);
        for (id, block) in d.blocks() {
            let scanned: Vec<usize> = (0..t.columns())
                .filter(|&j| t.entry(id.class, j) == id.label)
                .collect();
            assert_eq!(block, scanned.as_slice());
            assert_eq!(block.len(), 3);
        }
        assert_eq!(d.blocks().count(), 9);
    }

    #[test]
    fn intersect_example() {
        let d = design(2, 3);
        let p = d
            .intersect_point(&[BlockId::new(0, 0), BlockId::new(1, 0)])
            .unwrap();
        assert_eq!(p, 0);
        // first delivery equation of the q=2, k=3 example: B(2,0) ∩ B(3,1) = {3}
        let p = d
            .intersect_point(&[BlockId::new(1, 0), BlockId::new(2, 1)])
            .unwrap();
        assert_eq!(p + 1, 3);
    }

    #[test]
    fn intersect_zero_labels_is_first_point() {
        for (q, k) in [(2, 2), (3, 4), (4, 3)] {
            let d = design(q, k);
            let picks: Vec<BlockId> = (0..k - 1).map(|c| BlockId::new(c, 0)).collect();
            assert_eq!(d.intersect_point(&picks).unwrap(), 0);
        }
    }

    #[test]
    fn intersect_q3_k3_against_scan() {
        let d = design(3, 3);
        let t = d.codebook();
        let scanned: Vec<usize> = (0..t.columns())
            .filter(|&j| t.entry(1, j) == 1 && t.entry(2, j) == 2)
            .collect();
        assert_eq!(scanned, vec![4]);
        let p = d
            .intersect_point(&[BlockId::new(1, 1), BlockId::new(2, 2)])
            .unwrap();
        assert_eq!(p, scanned[0]);
        // order of picks does not matter
        let p2 = d
            .intersect_point(&[BlockId::new(2, 2), BlockId::new(1, 1)])
            .unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn intersect_rejects_bad_picks() {
        let d = design(3, 3);
        let dup = d.intersect_point(&[BlockId::new(1, 1), BlockId::new(1, 2)]);
        assert!(matches!(dup, Err(Error::InvalidPicks(_))));
        let short = d.intersect_point(&[BlockId::new(1, 1)]);
        assert!(matches!(short, Err(Error::InvalidPicks(_))));
        let range = d.intersect_point(&[BlockId::new(0, 3), BlockId::new(1, 0)]);
        assert!(matches!(range, Err(Error::InvalidPicks(_))));
        let class = d.intersect_point(&[BlockId::new(3, 0), BlockId::new(1, 0)]);
        assert!(matches!(class, Err(Error::InvalidPicks(_))));
    }

    #[test]
    fn deterministic() {
        let p = SchemeParams::new(4, 3).unwrap();
        assert_eq!(enumerate_codewords(p), enumerate_codewords(p));
    }
}
