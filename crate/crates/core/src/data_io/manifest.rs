use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    /// Bag-of-words indicators; a bare `idx` token means value 1.
    Binary,
    /// Weighted sparse features, `idx:value`.
    TfIdf,
    /// Comma-separated dense rows.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetFormat {
    /// Separate edge, attribute and label files.
    EdgeList {
        edges: PathBuf,
        attributes: PathBuf,
        labels: PathBuf,
        attribute_kind: AttributeKind,
    },
    /// `.content` (`id f1 … fF class`) plus `.cites` (two ids per line).
    Linqs { content: PathBuf, cites: PathBuf },
}

/// Column order of an edge file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeColumns {
    #[default]
    SrcDst,
    /// Files listing the cited paper first store edges reversed.
    DstSrc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpectedCounts {
    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub features: Option<usize>,
    pub classes: Option<usize>,
}

/// A `key = value` description of a dataset on disk. Relative paths are
/// resolved against the manifest's directory.
///
/// ```text
/// name = cora
/// format = linqs
/// content = cora.content
/// cites = cora.cites
/// edge_columns = dst_src
/// expected_nodes = 2708
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub format: DatasetFormat,
    pub edge_columns: EdgeColumns,
    /// Width of sparse attribute rows; defaults to the largest index + 1.
    pub num_features: Option<usize>,
    pub expected: ExpectedCounts,
    /// Count mismatches are errors when set, warnings otherwise.
    pub strict_counts: bool,
    /// Where to write the dense-id to original-id map, if anywhere.
    pub id_map: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "name",
    "format",
    "edges",
    "attributes",
    "labels",
    "attribute_kind",
    "content",
    "cites",
    "edge_columns",
    "num_features",
    "expected_nodes",
    "expected_edges",
    "expected_features",
    "expected_classes",
    "strict_counts",
    "id_map",
];

impl DatasetManifest {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base, path)
    }

    /// Parses manifest text; `origin` is only used in error messages.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let mut entries: Vec<(&str, &str, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, idx + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::parse(origin, idx + 1, format!("unknown key `{key}`")));
            }
            if entries.iter().any(|(k, _, _)| *k == key) {
                return Err(Error::parse(origin, idx + 1, format!("duplicate key `{key}`")));
            }
            entries.push((key, value.trim(), idx + 1));
        }
        let get = |key: &str| entries.iter().find(|(k, _, _)| *k == key).map(|&(_, v, line)| (v, line));
        let path = |key: &str| -> Result<PathBuf> {
            let (v, _) = get(key).ok_or_else(|| Error::parse(origin, 0, format!("missing required key `{key}`")))?;
            Ok(base.join(v))
        };
        let number = |key: &str| -> Result<Option<usize>> {
            match get(key) {
                None => Ok(None),
                Some((v, line)) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::parse(origin, line, format!("`{key}` must be a non-negative integer"))),
            }
        };

        let format = match get("format").map(|(v, _)| v).unwrap_or("edgelist") {
            "edgelist" => {
                let attribute_kind = match get("attribute_kind") {
                    None | Some(("binary", _)) => AttributeKind::Binary,
                    Some(("tfidf", _)) => AttributeKind::TfIdf,
                    Some(("dense", _)) => AttributeKind::Dense,
                    Some((other, line)) => {
                        return Err(Error::parse(origin, line, format!("unknown attribute_kind `{other}`")))
                    }
                };
                DatasetFormat::EdgeList {
                    edges: path("edges")?,
                    attributes: path("attributes")?,
                    labels: path("labels")?,
                    attribute_kind,
                }
            }
            "linqs" => DatasetFormat::Linqs {
                content: path("content")?,
                cites: path("cites")?,
            },
            other => {
                let line = get("format").map_or(0, |(_, l)| l);
                return Err(Error::parse(origin, line, format!("unknown format `{other}`")));
            }
        };
        let edge_columns = match get("edge_columns") {
            None | Some(("src_dst", _)) => EdgeColumns::SrcDst,
            Some(("dst_src", _)) => EdgeColumns::DstSrc,
            Some((other, line)) => return Err(Error::parse(origin, line, format!("unknown edge_columns `{other}`"))),
        };
        let strict_counts = match get("strict_counts") {
            None | Some(("false", _)) => false,
            Some(("true", _)) => true,
            Some((other, line)) => return Err(Error::parse(origin, line, format!("strict_counts must be true or false, got `{other}`"))),
        };
        Ok(DatasetManifest {
            name: get("name").map_or_else(|| "dataset".to_string(), |(v, _)| v.to_string()),
            format,
            edge_columns,
            num_features: number("num_features")?,
            expected: ExpectedCounts {
                nodes: number("expected_nodes")?,
                edges: number("expected_edges")?,
                features: number("expected_features")?,
                classes: number("expected_classes")?,
            },
            strict_counts,
            id_map: get("id_map").map(|(v, _)| base.join(v)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_linqs_manifest() {
        let text = "# citation graph\nname = cora\nformat = linqs\ncontent = cora.content\ncites = cora.cites  # cited first\nedge_columns = dst_src\nexpected_nodes = 2708\nstrict_counts = true\n";
        let m = DatasetManifest::parse(text, Path::new("/data"), Path::new("cora.manifest")).unwrap();
        assert_eq!(m.name, "cora");
        assert_eq!(
            m.format,
            DatasetFormat::Linqs {
                content: "/data/cora.content".into(),
                cites: "/data/cora.cites".into()
            }
        );
        assert_eq!(m.edge_columns, EdgeColumns::DstSrc);
        assert_eq!(m.expected.nodes, Some(2708));
        assert!(m.strict_counts);
    }

    #[test]
    fn rejects_bad_lines() {
        let p = Path::new("m");
        let err = DatasetManifest::parse("name = x\nbogus line\n", p, p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(DatasetManifest::parse("colour = red\n", p, p).is_err());
        assert!(DatasetManifest::parse("format = linqs\ncontent = a\n", p, p).is_err());
        assert!(DatasetManifest::parse("edges=a\nattributes=b\nlabels=c\nexpected_nodes=-3\n", p, p).is_err());
    }
}
