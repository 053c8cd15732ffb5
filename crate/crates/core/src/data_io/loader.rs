use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{DirectedAttributedGraph, Label};
use crate::linalg::DenseMatrix;

use super::manifest::{AttributeKind, DatasetFormat, DatasetManifest, EdgeColumns};

/// Original node identifiers in dense-id order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, original: &str) -> Option<usize> {
        self.index.get(original).copied()
    }

    pub fn original(&self, dense: usize) -> &str {
        &self.ids[dense]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Returns the dense id, assigning the next one to an unseen identifier.
    pub fn intern(&mut self, original: &str) -> usize {
        if let Some(&i) = self.index.get(original) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(original.to_string());
        self.index.insert(original.to_string(), i);
        i
    }

    /// `dense_id<TAB>original_id`, one line per node.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, id) in self.ids.iter().enumerate() {
            writeln!(w, "{i}\t{id}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub graph: DirectedAttributedGraph,
    pub ids: IdMap,
    /// Class names in label-index order.
    pub class_names: Vec<String>,
    /// Non-fatal problems: skipped edges, count mismatches in lenient mode.
    pub warnings: Vec<String>,
}

/// Loads the files a manifest points at into a graph with dense ids.
///
/// Nodes are numbered in order of first appearance in the attribute (or
/// content) file, then the label file. Edges naming an unknown node are
/// skipped with a warning, as are repeated edges. Class names are sorted
/// and numbered in that order.
pub fn load_dataset(m: &DatasetManifest) -> Result<LoadedDataset> {
    let mut ids = IdMap::default();
    let mut warnings = Vec::new();
    let (attributes, raw_labels, edge_path) = match &m.format {
        DatasetFormat::Linqs { content, cites } => {
            let (attrs, labels) = read_linqs_content(content, &mut ids)?;
            (attrs, labels, cites.clone())
        }
        DatasetFormat::EdgeList {
            edges,
            attributes,
            labels,
            attribute_kind,
        } => {
            let attrs = match attribute_kind {
                AttributeKind::Dense => read_dense_attributes(attributes, &mut ids)?,
                kind => read_sparse_attributes(attributes, *kind, m.num_features, &mut ids)?,
            };
            let labels = read_labels(labels, &mut ids)?;
            (attrs, labels, edges.clone())
        }
    };
    let n = ids.len();

    let class_names: Vec<String> = raw_labels
        .iter()
        .map(|(_, c)| c.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let class_index: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut labels: Vec<Label> = vec![None; n];
    for (node, class) in &raw_labels {
        labels[*node] = Some(class_index[class.as_str()]);
    }

    let width = attributes.iter().map(|(_, row)| row.len()).max().unwrap_or(0);
    let width = m.num_features.unwrap_or(width).max(width);
    let mut x = DenseMatrix::zeros(n, width);
    for (node, row) in attributes {
        x.row_mut(node)[..row.len()].copy_from_slice(&row);
    }

    let (edges, skipped, duplicates) = read_edges(&edge_path, m.edge_columns, &ids)?;
    if skipped > 0 {
        warnings.push(format!("{skipped} edge lines name nodes without attributes or labels and were skipped"));
    }
    if duplicates > 0 {
        warnings.push(format!("{duplicates} repeated directed edges were dropped"));
    }
    let graph = DirectedAttributedGraph::build(edges, x, labels, false)?;

    let observed = [
        ("nodes", m.expected.nodes, graph.num_nodes()),
        ("edges", m.expected.edges, graph.num_edges()),
        ("features", m.expected.features, graph.num_features()),
        ("classes", m.expected.classes, class_names.len()),
    ];
    for (what, expected, found) in observed {
        if let Some(expected) = expected {
            if expected != found {
                if m.strict_counts {
                    return Err(Error::CountMismatch { what, expected, found });
                }
                warnings.push(format!("manifest expects {expected} {what}, found {found}"));
            }
        }
    }
    for w in &warnings {
        log::warn!("{}: {w}", m.name);
    }
    if let Some(path) = &m.id_map {
        ids.save(path)?;
    }
    Ok(LoadedDataset {
        graph,
        ids,
        class_names,
        warnings,
    })
}

fn open(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let f = File::open(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(BufReader::new(f).lines().enumerate().map(|(i, l)| (i + 1, l)))
}

/// Strips comments and blank lines.
fn content_of(line: &str) -> Option<&str> {
    let body = line.split('#').next().unwrap_or("").trim();
    (!body.is_empty()).then_some(body)
}

type Rows = Vec<(usize, Vec<f64>)>;

/// `.content`: `id f1 … fF class`, whitespace separated.
fn read_linqs_content(path: &Path, ids: &mut IdMap) -> Result<(Rows, Vec<(usize, String)>)> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (line_no, line) in open(path)? {
        let line = line?;
        let Some(body) = content_of(&line) else { continue };
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::parse(path, line_no, "expected `id features… class`"));
        }
        let f = fields.len() - 2;
        if *width.get_or_insert(f) != f {
            return Err(Error::parse(path, line_no, format!("expected {} features, found {f}", width.unwrap())));
        }
        let values = fields[1..=f]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(path, line_no, format!("bad feature value `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        let node = intern_unique(ids, fields[0], path, line_no)?;
        rows.push((node, values));
        labels.push((node, fields[f + 1].to_string()));
    }
    Ok((rows, labels))
}

fn intern_unique(ids: &mut IdMap, id: &str, path: &Path, line_no: usize) -> Result<usize> {
    let before = ids.len();
    let node = ids.intern(id);
    if node < before {
        return Err(Error::parse(path, line_no, format!("node `{id}` appears twice")));
    }
    Ok(node)
}

/// `id idx:value …`, or bare `idx` tokens for binary features.
fn read_sparse_attributes(path: &Path, kind: AttributeKind, declared: Option<usize>, ids: &mut IdMap) -> Result<Rows> {
    let mut rows = Vec::new();
    for (line_no, line) in open(path)? {
        let line = line?;
        let Some(body) = content_of(&line) else { continue };
        let mut fields = body.split_whitespace();
        let id = fields.next().expect("non-empty line");
        let mut entries = Vec::new();
        for tok in fields {
            let (idx, value) = match tok.split_once(':') {
                Some((i, v)) => (i, v.parse::<f64>().ok()),
                None if kind == AttributeKind::Binary => (tok, Some(1.0)),
                None => (tok, None),
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad feature index in `{tok}`")))?;
            let value = value.ok_or_else(|| Error::parse(path, line_no, format!("bad feature value in `{tok}`")))?;
            if let Some(f) = declared {
                if idx >= f {
                    return Err(Error::parse(path, line_no, format!("feature index {idx} exceeds num_features {f}")));
                }
            }
            entries.push((idx, value));
        }
        let node = intern_unique(ids, id, path, line_no)?;
        let width = entries.iter().map(|&(i, _)| i + 1).max().unwrap_or(0);
        let mut row = vec![0.0; width];
        for (i, v) in entries {
            row[i] = v;
        }
        rows.push((node, row));
    }
    Ok(rows)
}

/// `id,v1,…,vF`
fn read_dense_attributes(path: &Path, ids: &mut IdMap) -> Result<Rows> {
    let mut rows = Vec::new();
    let mut width = None;
    for (line_no, line) in open(path)? {
        let line = line?;
        let Some(body) = content_of(&line) else { continue };
        let mut fields = body.split(',').map(str::trim);
        let id = fields.next().expect("non-empty line");
        let values = fields
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(path, line_no, format!("bad value `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} values, found {}", width.unwrap(), values.len()),
            ));
        }
        rows.push((intern_unique(ids, id, path, line_no)?, values));
    }
    Ok(rows)
}

/// `id class_name`
fn read_labels(path: &Path, ids: &mut IdMap) -> Result<Vec<(usize, String)>> {
    let mut labels: Vec<(usize, String)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line_no, line) in open(path)? {
        let line = line?;
        let Some(body) = content_of(&line) else { continue };
        let mut fields = body.split_whitespace();
        let (Some(id), Some(class), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(path, line_no, "expected `id class`"));
        };
        let node = ids.intern(id);
        if !seen.insert(node) {
            return Err(Error::parse(path, line_no, format!("node `{id}` labeled twice")));
        }
        labels.push((node, class.to_string()));
    }
    Ok(labels)
}

/// Edge lines `a b [weight]`. Returns the edges, the number of lines naming
/// unknown nodes and the number of repeated edges.
fn read_edges(path: &Path, columns: EdgeColumns, ids: &IdMap) -> Result<(Vec<(usize, usize, f64)>, usize, usize)> {
    let mut edges = Vec::new();
    let mut skipped = 0;
    for (line_no, line) in open(path)? {
        let line = line?;
        let Some(body) = content_of(&line) else { continue };
        let fields: Vec<&str> = body.split_whitespace().collect();
        let weight = match fields.len() {
            2 => 1.0,
            3 => fields[2]
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| Error::parse(path, line_no, format!("bad edge weight `{}`", fields[2])))?,
            _ => return Err(Error::parse(path, line_no, format!("expected `src dst [weight]`, got `{body}`"))),
        };
        let (a, b) = match columns {
            EdgeColumns::SrcDst => (fields[0], fields[1]),
            EdgeColumns::DstSrc => (fields[1], fields[0]),
        };
        match (ids.get(a), ids.get(b)) {
            (Some(s), Some(d)) => edges.push((s, d, weight)),
            _ => skipped += 1,
        }
    }
    let mut keys: Vec<(usize, usize)> = edges.iter().map(|&(s, d, _)| (s, d)).collect();
    keys.sort_unstable();
    let before = keys.len();
    keys.dedup();
    Ok((edges, skipped, before - keys.len()))
}
