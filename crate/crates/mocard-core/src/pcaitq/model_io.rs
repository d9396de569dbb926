//! Model container format and the RotationID registry.
//!
//! Container layout (little-endian throughout):
//!
//! ```text
//! magic  "PITQ"  (4 bytes)
//! u8     format version (0x01)
//! u16    length_bits L
//! u32    embedding dimension d
//! u16    rotation_id
//! f64*d        mu
//! f64*(d*L)    w_pca, row-major
//! f64*(L*L)    rotation, row-major
//! ```
//!
//! The registry is a directory of `rid-<id>.pitq` files; RotationIDs are
//! allocated by scanning for the highest id in use and adding one, so two
//! trainings in the same registry never collide.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::{DMatrix, DVector};

use super::{PcaItqError, PcaItqModel};
use crate::apdu::TEMPLATE_LENGTHS_BITS;

const MAGIC: &[u8; 4] = b"PITQ";
const FORMAT_VERSION: u8 = 0x01;

impl PcaItqModel {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), PcaItqError> {
        out.write_all(MAGIC)?;
        out.write_u8(FORMAT_VERSION)?;
        out.write_u16::<LittleEndian>(self.length_bits)?;
        out.write_u32::<LittleEndian>(self.dim() as u32)?;
        out.write_u16::<LittleEndian>(self.rotation_id)?;
        for &v in self.mu.iter() {
            out.write_f64::<LittleEndian>(v)?;
        }
        let l = usize::from(self.length_bits);
        for i in 0..self.dim() {
            for j in 0..l {
                out.write_f64::<LittleEndian>(self.w_pca[(i, j)])?;
            }
        }
        for i in 0..l {
            for j in 0..l {
                out.write_f64::<LittleEndian>(self.rotation[(i, j)])?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, PcaItqError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(PcaItqError::ModelFormat("bad magic"));
        }
        if input.read_u8()? != FORMAT_VERSION {
            return Err(PcaItqError::ModelFormat("unsupported version"));
        }
        let length_bits = input.read_u16::<LittleEndian>()?;
        if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) {
            return Err(PcaItqError::ModelFormat("unsupported template length"));
        }
        let dim = input.read_u32::<LittleEndian>()? as usize;
        let l = usize::from(length_bits);
        if dim < l {
            return Err(PcaItqError::ModelFormat("dimension below template length"));
        }
        let rotation_id = input.read_u16::<LittleEndian>()?;
        let mut mu = DVector::zeros(dim);
        for i in 0..dim {
            mu[i] = input.read_f64::<LittleEndian>()?;
        }
        let mut w_pca = DMatrix::zeros(dim, l);
        for i in 0..dim {
            for j in 0..l {
                w_pca[(i, j)] = input.read_f64::<LittleEndian>()?;
            }
        }
        let mut rotation = DMatrix::zeros(l, l);
        for i in 0..l {
            for j in 0..l {
                rotation[(i, j)] = input.read_f64::<LittleEndian>()?;
            }
        }
        Ok(Self {
            mu,
            w_pca,
            rotation,
            rotation_id,
            length_bits,
        })
    }

    pub fn write_file<P: AsRef<Path>>(&self, path: P) -> Result<(), PcaItqError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_file<P: AsRef<Path>>(path: P) -> Result<Self, PcaItqError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Versioned on-disk store mapping RotationID to trained parameters.
#[derive(Debug, Clone)]
pub struct ModelRegistry {
    dir: PathBuf,
}

impl ModelRegistry {
    pub fn open<P: Into<PathBuf>>(dir: P) -> Result<Self, PcaItqError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn model_path(&self, rotation_id: u16) -> PathBuf {
        self.dir.join(format!("rid-{rotation_id:05}.pitq"))
    }

    pub fn rotation_ids(&self) -> Result<Vec<u16>, PcaItqError> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            let name = name.to_string_lossy();
            if let Some(id) = name
                .strip_prefix("rid-")
                .and_then(|rest| rest.strip_suffix(".pitq"))
                .and_then(|digits| digits.parse::<u16>().ok())
            {
                ids.push(id);
            }
        }
        ids.sort_unstable();
        Ok(ids)
    }

    /// Allocate the next unused RotationID, starting from 1.
    pub fn next_rotation_id(&self) -> Result<u16, PcaItqError> {
        match self.rotation_ids()?.last() {
            None => Ok(1),
            Some(&last) => last.checked_add(1).ok_or(PcaItqError::RegistryFull),
        }
    }

    pub fn store(&self, model: &PcaItqModel) -> Result<PathBuf, PcaItqError> {
        let path = self.model_path(model.rotation_id);
        model.write_file(&path)?;
        Ok(path)
    }

    pub fn load(&self, rotation_id: u16) -> Result<PcaItqModel, PcaItqError> {
        let path = self.model_path(rotation_id);
        if !path.exists() {
            return Err(PcaItqError::UnknownRotationId(rotation_id));
        }
        PcaItqModel::read_file(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcaitq::{train_model, FloatEmbedding};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn sample_model(rotation_id: u16, seed: u64) -> PcaItqModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embeddings: Vec<FloatEmbedding> = (0..60)
            .map(|i| FloatEmbedding {
                label: i,
                values: (0..20).map(|_| rng.sample(StandardNormal)).collect(),
            })
            .collect();
        let (model, _) = train_model(&embeddings, 16, 5, seed, rotation_id).unwrap();
        model
    }

    #[test]
    fn container_round_trip_is_exact() {
        let model = sample_model(7, 1);
        let mut bytes = Vec::new();
        model.write_to(&mut bytes).unwrap();
        let back = PcaItqModel::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, model);
        assert_eq!(&bytes[..4], b"PITQ");
    }

    #[test]
    fn rejects_corrupt_containers() {
        let model = sample_model(7, 2);
        let mut bytes = Vec::new();
        model.write_to(&mut bytes).unwrap();
        bytes[0] = b'X';
        assert!(matches!(
            PcaItqModel::read_from(bytes.as_slice()),
            Err(PcaItqError::ModelFormat("bad magic"))
        ));
        let mut bytes2 = Vec::new();
        model.write_to(&mut bytes2).unwrap();
        bytes2.truncate(bytes2.len() - 3);
        assert!(matches!(
            PcaItqModel::read_from(bytes2.as_slice()),
            Err(PcaItqError::Io(_))
        ));
    }

    #[test]
    fn registry_allocates_distinct_ids() {
        let dir = tempfile::tempdir().unwrap();
        let registry = ModelRegistry::open(dir.path()).unwrap();
        assert_eq!(registry.next_rotation_id().unwrap(), 1);
        let mut m1 = sample_model(0, 3);
        m1.rotation_id = registry.next_rotation_id().unwrap();
        registry.store(&m1).unwrap();
        let mut m2 = sample_model(0, 4);
        m2.rotation_id = registry.next_rotation_id().unwrap();
        registry.store(&m2).unwrap();
        assert_eq!((m1.rotation_id, m2.rotation_id), (1, 2));
        assert_eq!(registry.rotation_ids().unwrap(), vec![1, 2]);
        assert_eq!(registry.load(2).unwrap(), m2);
        assert!(matches!(
            registry.load(9),
            Err(PcaItqError::UnknownRotationId(9))
        ));
    }
}
