//! Dataset manifests and loaders, the synthetic graph generator and
//! embedding files.

mod loader;
mod manifest;
mod synthetic;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::embedding::EmbeddingMatrix;
use crate::error::Result;

pub use loader::{load_dataset, IdMap, LoadedDataset};
pub use manifest::{AttributeKind, DatasetFormat, DatasetManifest, EdgeColumns, ExpectedCounts};
pub use synthetic::{generate_synthetic, random_directed_graph, SyntheticSpec};

/// Writes the text export format; `ids` default to dense node numbers.
pub fn save_embeddings(z: &EmbeddingMatrix, path: impl AsRef<Path>, ids: Option<&[String]>) -> Result<()> {
    z.write_text(BufWriter::new(File::create(path)?), ids)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    Ok(load_embeddings_with_ids(path)?.0)
}

pub fn load_embeddings_with_ids(path: impl AsRef<Path>) -> Result<(EmbeddingMatrix, Vec<String>)> {
    let path = path.as_ref();
    EmbeddingMatrix::read_text(BufReader::new(File::open(path)?), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::DenseMatrix;
    use rand::{Rng, SeedableRng};

    #[test]
    fn embedding_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.txt");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let z = EmbeddingMatrix::from_concatenated(DenseMatrix::from_fn(7, 6, |_, _| rng.random::<f64>() * 1e3 - 5e2)).unwrap();
        let ids: Vec<String> = (0..7).map(|i| format!("paper{i}")).collect();
        save_embeddings(&z, &path, Some(&ids)).unwrap();
        let (back, back_ids) = load_embeddings_with_ids(&path).unwrap();
        assert_eq!(back_ids, ids);
        let bits = |m: &EmbeddingMatrix| m.as_matrix().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&z));

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_embeddings(&path), Err(Error::Parse { .. })));
    }
}
