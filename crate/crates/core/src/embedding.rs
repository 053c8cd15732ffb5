//! Source/target embeddings, the asymmetric inner-product similarity and
//! streaming top-k ranking of node pairs.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;
use crate::linalg::{concat_cols, dot, DenseMatrix};
use crate::model::{embed_branch, ModelConfig, ModelParams, Propagation};

/// `Z = [Z^S | Z^T]`, an `n × 2d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: DenseMatrix,
    half: usize,
}

impl EmbeddingMatrix {
    pub fn from_parts(source: &DenseMatrix, target: &DenseMatrix) -> Result<Self> {
        if source.shape() != target.shape() {
            return Err(Error::dims(
                "embedding halves",
                format!("{:?}", source.shape()),
                format!("{:?}", target.shape()),
            ));
        }
        Ok(EmbeddingMatrix {
            data: concat_cols(source, target)?,
            half: source.cols(),
        })
    }

    /// Wraps an `n × 2d` matrix whose first `d` columns are the source half.
    pub fn from_concatenated(data: DenseMatrix) -> Result<Self> {
        if data.cols() % 2 != 0 {
            return Err(Error::dims("embedding width", "even", data.cols()));
        }
        let half = data.cols() / 2;
        Ok(EmbeddingMatrix { data, half })
    }

    pub fn num_nodes(&self) -> usize {
        self.data.rows()
    }

    /// `d`, the width of each half.
    pub fn half_dim(&self) -> usize {
        self.half
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.data
    }

    pub fn source(&self, i: usize) -> &[f64] {
        &self.data.row(i)[..self.half]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.data.row(i)[self.half..]
    }

    pub fn source_matrix(&self) -> DenseMatrix {
        self.data.slice_cols(0, self.half)
    }

    pub fn target_matrix(&self) -> DenseMatrix {
        self.data.slice_cols(self.half, 2 * self.half)
    }

    /// Writes the export format: a `#n d` header, then one line per node
    /// with its id and `2d` values at 17 significant digits.
    pub fn write_text<W: Write>(&self, mut w: W, ids: Option<&[String]>) -> Result<()> {
        if let Some(ids) = ids {
            if ids.len() != self.num_nodes() {
                return Err(Error::dims("embedding ids", self.num_nodes(), ids.len()));
            }
        }
        writeln!(w, "#{} {}", self.num_nodes(), self.half)?;
        for i in 0..self.num_nodes() {
            match ids {
                Some(ids) => write!(w, "{}", ids[i])?,
                None => write!(w, "{i}")?,
            }
            for v in self.data.row(i) {
                write!(w, " {v:.16e}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the export format; returns the matrix and the node ids in
    /// file order.
    pub fn read_text<R: BufRead>(r: R, origin: &std::path::Path) -> Result<(Self, Vec<String>)> {
        let mut lines = r.lines().enumerate();
        let (n, half) = loop {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| Error::parse(origin, 1, "missing `#n d` header"))?;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let header = trimmed
                .strip_prefix('#')
                .ok_or_else(|| Error::parse(origin, idx + 1, "expected `#n d` header"))?;
            let mut parts = header.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(n)), Some(Ok(d)), None) => break (n, d),
                _ => return Err(Error::parse(origin, idx + 1, format!("malformed header `{trimmed}`"))),
            }
        };
        let mut ids = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * 2 * half);
        for (idx, line) in lines {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(id) = fields.next() else { continue };
            if ids.len() == n {
                return Err(Error::parse(origin, idx + 1, format!("header declares {n} rows but more follow")));
            }
            let before = data.len();
            for f in fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(origin, idx + 1, format!("bad number `{f}`")))?;
                data.push(v);
            }
            if data.len() - before != 2 * half {
                return Err(Error::parse(
                    origin,
                    idx + 1,
                    format!("expected {} values, found {}", 2 * half, data.len() - before),
                ));
            }
            ids.push(id.to_string());
        }
        if ids.len() != n {
            return Err(Error::parse(
                origin,
                ids.len() + 1,
                format!("header declares {n} rows, found {}", ids.len()),
            ));
        }
        let data = DenseMatrix::from_vec(n, 2 * half, data)?;
        Ok((EmbeddingMatrix { data, half }, ids))
    }
}

/// Runs both branches up to their last convolutional layer and concatenates
/// the outputs. The softmax layer is not part of the embedding.
pub fn extract_embeddings(
    params: &ModelParams,
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
) -> Result<EmbeddingMatrix> {
    if params.num_features() != g.num_features() {
        return Err(Error::dims("attribute width", params.num_features(), g.num_features()));
    }
    let prop = Propagation::new(g, cfg.normalize_adjacency);
    let (zs, zt) = rayon::join(
        || embed_branch(&prop.source.forward, g.attributes(), &params.source),
        || embed_branch(&prop.target.forward, g.attributes(), &params.target),
    );
    EmbeddingMatrix::from_parts(&zs?, &zt?)
}

/// `S_ij = ⟨z_i^S, z_j^T⟩`. Not symmetric in general.
pub fn asym_similarity(z: &EmbeddingMatrix, i: usize, j: usize) -> Result<f64> {
    let n = z.num_nodes();
    for node in [i, j] {
        if node >= n {
            return Err(Error::InvalidNode { node, n });
        }
    }
    Ok(dot(z.source(i), z.target(j)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub src: usize,
    pub dst: usize,
    pub score: f64,
}

impl ScoredPair {
    /// Ranking order: higher score first, then smaller `src`, then smaller
    /// `dst`. `Ordering::Greater` means "ranks earlier".
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.src.cmp(&self.src))
            .then_with(|| other.dst.cmp(&self.dst))
    }
}

struct Ranked(ScoredPair);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// Pairs sorted by (score desc, src asc, dst asc).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedPairList {
    pairs: Vec<ScoredPair>,
}

impl RankedPairList {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[ScoredPair] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoredPair> {
        self.pairs.iter()
    }
}

/// Keeps the `k` best candidates in a bounded heap; memory is `O(k)` no
/// matter how many candidates stream through. Self-pairs are skipped.
pub fn rank_pairs(
    z: &EmbeddingMatrix,
    candidates: impl IntoIterator<Item = (usize, usize)>,
    k: usize,
) -> Result<RankedPairList> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let n = z.num_nodes();
    let mut heap: BinaryHeap<Reverse<Ranked>> = BinaryHeap::with_capacity(k.min(1 << 20) + 1);
    let mut seen_any = false;
    for (i, j) in candidates {
        if i == j {
            continue;
        }
        if i >= n || j >= n {
            return Err(Error::InvalidNode { node: i.max(j), n });
        }
        seen_any = true;
        let pair = ScoredPair {
            src: i,
            dst: j,
            score: dot(z.source(i), z.target(j)),
        };
        if heap.len() < k {
            heap.push(Reverse(Ranked(pair)));
        } else if let Some(worst) = heap.peek() {
            if pair.rank_cmp(&worst.0 .0) == Ordering::Greater {
                heap.pop();
                heap.push(Reverse(Ranked(pair)));
            }
        }
    }
    if !seen_any {
        return Err(Error::EmptyCandidates);
    }
    let mut pairs: Vec<ScoredPair> = heap.into_iter().map(|r| r.0 .0).collect();
    pairs.sort_by(|a, b| b.rank_cmp(a));
    Ok(RankedPairList { pairs })
}

/// Every ordered pair `(i, j)` with `i ≠ j`, row-major.
pub fn all_ordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Ordered non-self pairs that are not edges of `g`.
pub fn non_edges(g: &DirectedAttributedGraph) -> impl Iterator<Item = (usize, usize)> + '_ {
    all_ordered_pairs(g.num_nodes()).filter(move |&(i, j)| !g.has_edge(i, j))
}
