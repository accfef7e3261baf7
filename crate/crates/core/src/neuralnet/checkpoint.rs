//! Binary checkpoint. All integers and floats are little-endian.
//!
//! ```text
//! offset  bytes  field
//! 0       8      magic "PEGQNET\0"
//! 8       4      format version (u32) = 1
//! 12      1      state variant (1 = s1, 2 = s2)
//! 13      3      reserved, zero
//! 16      8      episodes trained (u64)
//! 24      8      master seed (u64)
//! 32      4      number of layer sizes L (u32)
//! 36      4·L    layer sizes (u32 each)
//! ..      8·P    parameters (f64), layout of `Network::params`
//! ..      8      Adam step (u64)
//! ..      32     Adam alpha, beta1, beta2, eps (f64)
//! ..      8·P    Adam first moments (f64)
//! ..      8·P    Adam second moments (f64)
//! ```
//!
//! `P` is implied by the layer sizes. Trailing bytes are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdamState, Network};
use crate::environment::StateVariant;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PEGQNET\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub episodes: u64,
    pub seed: u64,
    pub variant: StateVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub adam: AdamState,
    pub meta: TrainingMeta,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let net = &self.network;
        let mut out = Vec::with_capacity(64 + 24 * net.n_params());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.push(self.meta.variant.code());
        out.extend_from_slice(&[0, 0, 0]);
        out.extend_from_slice(&self.meta.episodes.to_le_bytes());
        out.extend_from_slice(&self.meta.seed.to_le_bytes());
        out.extend_from_slice(&(net.sizes().len() as u32).to_le_bytes());
        for &s in net.sizes() {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        let put = |out: &mut Vec<u8>, xs: &[f64]| {
            for x in xs {
                out.extend_from_slice(&x.to_le_bytes());
            }
        };
        put(&mut out, net.params());
        out.extend_from_slice(&self.adam.step.to_le_bytes());
        put(
            &mut out,
            &[self.adam.alpha, self.adam.beta1, self.adam.beta2, self.adam.eps],
        );
        put(&mut out, &self.adam.m);
        put(&mut out, &self.adam.v);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let code = r.take(4)?[0];
        let variant = StateVariant::from_code(code)
            .ok_or_else(|| Error::Checkpoint(format!("unknown state variant code {code}")))?;
        let episodes = r.u64()?;
        let seed = r.u64()?;
        let n_sizes = r.u32()? as usize;
        if !(2..=64).contains(&n_sizes) {
            return Err(Error::Checkpoint(format!("implausible layer count {n_sizes}")));
        }
        let sizes = (0..n_sizes)
            .map(|_| r.u32().map(|s| s as usize))
            .collect::<Result<Vec<_>>>()?;
        let n_params = Network::zeros(&sizes)
            .map_err(|e| Error::Checkpoint(e.to_string()))?
            .n_params();
        let params = r.f64s(n_params)?;
        let step = r.u64()?;
        let hyper = r.f64s(4)?;
        let m = r.f64s(n_params)?;
        let v = r.f64s(n_params)?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        let network =
            Network::from_params(&sizes, params).map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(Checkpoint {
            network,
            adam: AdamState {
                alpha: hyper[0],
                beta1: hyper[1],
                beta2: hyper[2],
                eps: hyper[3],
                step,
                m,
                v,
            },
            meta: TrainingMeta {
                episodes,
                seed,
                variant,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
