//! Binary checkpoint container.
//!
//! Layout (little endian):
//! `b"GQNCKPT\0"`, u32 version, u64 metadata length, metadata JSON,
//! u64 tensor count, then per tensor: u32 name length, name bytes,
//! u32 rank, u64 dims, raw f64 values.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::params::ParameterSet;
use super::tensor::Tensor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"GQNCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Parameters plus a free-form JSON metadata document (architecture
/// descriptor, training counters).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub metadata: serde_json::Value,
    pub params: ParameterSet,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        let meta = serde_json::to_vec(&self.metadata).expect("json value serializes");
        out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        out.extend_from_slice(&meta);
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for (name, t) in self.params.iter() {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::CheckpointIncompatible("not a checkpoint file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointIncompatible(format!(
                "checkpoint version {version}, expected {CHECKPOINT_VERSION}"
            )));
        }
        let meta_len = read_u64(&mut r)? as usize;
        let meta = take(&mut r, meta_len)?;
        let metadata = serde_json::from_slice(meta)
            .map_err(|e| Error::CheckpointIncompatible(format!("metadata: {e}")))?;
        let count = read_u64(&mut r)?;
        let mut params = ParameterSet::new();
        for _ in 0..count {
            let name_len = read_u32(&mut r)? as usize;
            let name = String::from_utf8(take(&mut r, name_len)?.to_vec())
                .map_err(|_| Error::CheckpointIncompatible("tensor name is not utf-8".into()))?;
            let rank = read_u32(&mut r)? as usize;
            let shape = (0..rank)
                .map(|_| read_u64(&mut r).map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let n: usize = shape.iter().product();
            let raw = take(&mut r, n * 8)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            params.insert(name, Tensor::new(shape, data)?);
        }
        if !r.is_empty() {
            return Err(Error::CheckpointIncompatible("trailing bytes".into()));
        }
        Ok(Self { metadata, params })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        f.sync_all()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

fn truncated() -> Error {
    Error::CheckpointIncompatible("truncated checkpoint".into())
}

fn take<'a>(r: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if r.len() < n {
        return Err(truncated());
    }
    let (head, tail) = r.split_at(n);
    *r = tail;
    Ok(head)
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    buf.copy_from_slice(take(r, buf.len())?);
    Ok(())
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ArchitectureSpec, QNetwork};
    use proptest::prelude::*;

    #[test]
    fn network_round_trip_is_bit_exact() {
        let net = QNetwork::new(ArchitectureSpec::gqn_gat(9, 9), 17);
        let ck = Checkpoint {
            metadata: serde_json::json!({ "architecture": net.spec, "step": 42 }),
            params: net.params.clone(),
        };
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back, ck);
        let spec: ArchitectureSpec = serde_json::from_value(back.metadata["architecture"].clone()).unwrap();
        assert_eq!(QNetwork::from_parts(spec, back.params).unwrap(), net);
    }

    #[test]
    fn corrupted_inputs_rejected() {
        assert!(Checkpoint::from_bytes(b"nonsense").is_err());
        let ck = Checkpoint {
            metadata: serde_json::json!({}),
            params: QNetwork::new(ArchitectureSpec::dqn(9, 3), 1).params,
        };
        let bytes = ck.to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_values_survive(values in proptest::collection::vec(any::<f64>(), 0..40)) {
            let mut params = ParameterSet::new();
            params.insert("x", Tensor::new(vec![values.len()], values.clone()).unwrap());
            let ck = Checkpoint { metadata: serde_json::json!(null), params };
            let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
            let got = back.params.get("x").unwrap().data();
            prop_assert_eq!(got.len(), values.len());
            for (a, b) in got.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
