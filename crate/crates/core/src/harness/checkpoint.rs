//! Binary checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "ABNN" | version: u32 | body_len: u64 | body | crc32(everything before): u32
//! ```
//!
//! The body starts with a model-kind tag (`u8`), then a structural header
//! that depends on the kind, then `n: u64` and `n` parameters as `f64`.
//!
//! | tag | model          | header                                      |
//! |-----|----------------|---------------------------------------------|
//! | 1   | AGN            | embedding (see below)                       |
//! | 2   | ASN            | embedding                                   |
//! | 3   | DeepSets       | dim, layers, hidden, middle: u32            |
//! | 4   | analogy WV     | dim: u32                                    |
//! | 5   | analogy MLP    | dim, layers, hidden: u32                    |
//! | 6   | analogy AGN    | coupling header                             |
//!
//! An embedding is `0u8` + monotonic header (groups, units: u32, tol: f64)
//! or `1u8` + coupling header (dim, layers, hidden: u32, clamp: f64, then
//! `layers * dim` permutation entries as u32).

use std::fs;
use std::path::Path;

use crate::abelian::{AbelianOp, Combiner};
use crate::analogy::{AnalogyKind, AnalogyMlp, AnalogyModel};
use crate::baseline::DeepSetsModel;
use crate::error::{Error, Result};
use crate::harness::model::{ModelKind, SetModel};
use crate::invertible::{CouplingFlow, InvertibleMap, MonotonicNet};
use crate::numcore::ParamStore;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"ABNN";
const PREFIX: usize = 16;

/// Anything that can be stored in a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Set(SetModel),
    Analogy(AnalogyModel),
}

impl Checkpoint {
    pub fn kind_name(&self) -> String {
        match self {
            Checkpoint::Set(m) => m.kind().to_string(),
            Checkpoint::Analogy(m) => m.kind().to_string(),
        }
    }

    pub fn into_set_model(self, expected: ModelKind) -> Result<SetModel> {
        match self {
            Checkpoint::Set(m) if m.kind() == expected => Ok(m),
            other => Err(Error::ModelKindMismatch {
                expected: expected.to_string(),
                found: other.kind_name(),
            }),
        }
    }

    pub fn into_analogy_model(self, expected: AnalogyKind) -> Result<AnalogyModel> {
        match self {
            Checkpoint::Analogy(m) if m.kind() == expected => Ok(m),
            other => Err(Error::ModelKindMismatch {
                expected: expected.to_string(),
                found: other.kind_name(),
            }),
        }
    }
}

impl From<SetModel> for Checkpoint {
    fn from(m: SetModel) -> Self {
        Checkpoint::Set(m)
    }
}

impl From<AnalogyModel> for Checkpoint {
    fn from(m: AnalogyModel) -> Self {
        Checkpoint::Analogy(m)
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn params(&mut self, p: &ParamStore) {
        self.0.extend_from_slice(&(p.len() as u64).to_le_bytes());
        for &v in p.values() {
            self.f64(v);
        }
    }
    fn coupling(&mut self, f: &CouplingFlow) {
        self.u32(f.dim());
        self.u32(f.layers().len());
        self.u32(f.hidden());
        self.f64(f.clamp());
        for layer in f.layers() {
            for &p in &layer.perm {
                self.u32(p);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::BadCheckpoint("body ends inside a field".into()))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn params_into(&mut self, store: &mut ParamStore) -> Result<()> {
        let n = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if n != store.len() as u64 {
            return Err(Error::BadCheckpoint(format!(
                "structure needs {} parameters, file has {n}",
                store.len()
            )));
        }
        for v in store.values_mut() {
            *v = self.f64()?;
        }
        Ok(())
    }
    fn coupling(&mut self) -> Result<CouplingFlow> {
        let dim = self.u32()?;
        let layers = self.u32()?;
        let hidden = self.u32()?;
        let clamp = self.f64()?;
        if layers.saturating_mul(dim) > self.buf.len() {
            return Err(Error::BadCheckpoint("implausible coupling header".into()));
        }
        let perms = (0..layers)
            .map(|_| (0..dim).map(|_| self.u32()).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        CouplingFlow::with_permutations(dim, hidden, perms, clamp).map_err(|e| Error::BadCheckpoint(e.to_string()))
    }
}

fn encode_embedding(w: &mut Writer, phi: &InvertibleMap) {
    match phi {
        InvertibleMap::Monotonic(n) => {
            w.u8(0);
            w.u32(n.groups());
            w.u32(n.units());
            w.f64(n.tol());
        }
        InvertibleMap::Coupling(f) => {
            w.u8(1);
            w.coupling(f);
        }
    }
}

fn encode_body(model: &Checkpoint) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    match model {
        Checkpoint::Set(SetModel::Abelian(op)) => {
            w.u8(match op.combiner() {
                Combiner::Sum => 1,
                Combiner::ElementwiseProduct => 2,
            });
            encode_embedding(&mut w, op.phi());
            w.params(op.phi().params());
        }
        Checkpoint::Set(SetModel::DeepSets(m)) => {
            w.u8(3);
            for v in [m.dim(), m.layers(), m.hidden(), m.middle()] {
                w.u32(v);
            }
            w.params(m.params());
        }
        Checkpoint::Analogy(AnalogyModel::Wv { dim }) => {
            w.u8(4);
            w.u32(*dim);
        }
        Checkpoint::Analogy(AnalogyModel::Mlp(m)) => {
            w.u8(5);
            for v in [m.dim(), m.layers(), m.hidden()] {
                w.u32(v);
            }
            w.params(m.params());
        }
        Checkpoint::Analogy(AnalogyModel::Agn(f)) => {
            w.u8(6);
            w.coupling(f);
            w.params(f.params());
        }
    }
    w.0
}

/// Serialized checkpoint bytes.
pub fn encode_checkpoint(model: &Checkpoint) -> Vec<u8> {
    let body = encode_body(model);
    let mut out = Vec::with_capacity(PREFIX + body.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn decode_body(body: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf: body, at: 0 };
    let bad = |e: Error| Error::BadCheckpoint(e.to_string());
    let model = match r.u8()? {
        tag @ (1 | 2) => {
            let mut phi: InvertibleMap = match r.u8()? {
                0 => {
                    let groups = r.u32()?;
                    let units = r.u32()?;
                    let tol = r.f64()?;
                    if groups == 0 || units == 0 || groups.saturating_mul(units) > body.len() {
                        return Err(Error::BadCheckpoint("implausible monotonic header".into()));
                    }
                    MonotonicNet::from_values(groups, units, vec![0.0; 2 * groups * units + 1])
                        .with_tol(tol)
                        .into()
                }
                1 => r.coupling()?.into(),
                t => return Err(Error::BadCheckpoint(format!("unknown embedding tag {t}"))),
            };
            r.params_into(phi.params_mut())?;
            let combiner = if tag == 1 { Combiner::Sum } else { Combiner::ElementwiseProduct };
            Checkpoint::Set(SetModel::Abelian(AbelianOp::new(phi, combiner)))
        }
        3 => {
            let (dim, layers, hidden, middle) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
            if [dim, layers, hidden, middle].iter().any(|&v| v > body.len()) {
                return Err(Error::BadCheckpoint("implausible DeepSets header".into()));
            }
            let mut m = DeepSetsModel::zeroed(dim, layers, hidden, middle).map_err(bad)?;
            r.params_into(m.params_mut())?;
            Checkpoint::Set(SetModel::DeepSets(m))
        }
        4 => Checkpoint::Analogy(AnalogyModel::Wv { dim: r.u32()? }),
        5 => {
            let (dim, layers, hidden) = (r.u32()?, r.u32()?, r.u32()?);
            if [dim, layers, hidden].iter().any(|&v| v > body.len()) {
                return Err(Error::BadCheckpoint("implausible MLP header".into()));
            }
            let mut m = AnalogyMlp::zeroed(dim, layers, hidden).map_err(bad)?;
            r.params_into(m.params_mut())?;
            Checkpoint::Analogy(AnalogyModel::Mlp(m))
        }
        6 => {
            let mut f = r.coupling()?;
            r.params_into(f.params_mut())?;
            Checkpoint::Analogy(AnalogyModel::Agn(f))
        }
        t => return Err(Error::BadCheckpoint(format!("unknown model tag {t}"))),
    };
    if r.at != body.len() {
        return Err(Error::BadCheckpoint(format!("{} trailing body bytes", body.len() - r.at)));
    }
    Ok(model)
}

/// Parses checkpoint bytes. Checks run in order: magic, version, length,
/// checksum, structure.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 4 {
        return Err(Error::Truncated(format!("{} bytes, no magic", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadCheckpoint("missing ABNN magic".into()));
    }
    if bytes.len() < PREFIX {
        return Err(Error::Truncated(format!("{} bytes, header needs {PREFIX}", bytes.len())));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let body_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = (PREFIX as u64).checked_add(body_len).and_then(|n| n.checked_add(4));
    match expected {
        Some(n) if n == bytes.len() as u64 => {}
        Some(n) if n > bytes.len() as u64 => {
            return Err(Error::Truncated(format!("{} bytes, header declares {n}", bytes.len())));
        }
        _ => {
            return Err(Error::BadCheckpoint(format!(
                "{} bytes do not match declared body length {body_len}",
                bytes.len()
            )));
        }
    }
    let split = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[split..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..split]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    decode_body(&bytes[PREFIX..split])
}

pub fn save_checkpoint(model: &Checkpoint, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(model))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analogy::AnalogyConfig;
    use crate::harness::model::ModelHyper;
    use crate::numcore::Vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples() -> Vec<Checkpoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut out: Vec<Checkpoint> = ModelKind::ALL
            .iter()
            .map(|&k| SetModel::build(k, ModelHyper::default_for(k), &mut rng).unwrap().into())
            .collect();
        let flow = CouplingFlow::random(4, 3, 5, 1.0, &mut rng).unwrap();
        out.push(SetModel::Abelian(AbelianOp::group(flow.clone())).into());
        for kind in AnalogyKind::ALL {
            let cfg = AnalogyConfig::default_for(kind, 1);
            out.push(AnalogyModel::build(kind, 4, &cfg, &mut rng).unwrap().into());
        }
        out.push(AnalogyModel::Agn(flow).into());
        out
    }

    #[test]
    fn round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for ck in samples() {
            let back = decode_checkpoint(&encode_checkpoint(&ck)).unwrap();
            assert_eq!(back, ck);
            if let (Checkpoint::Set(a), Checkpoint::Set(b)) = (&ck, &back) {
                let dim = match a {
                    SetModel::Abelian(op) => op.dim(),
                    SetModel::DeepSets(m) => m.dim(),
                };
                for _ in 0..100 {
                    let set: Vec<Vector> = (0..3)
                        .map(|_| Vector::new((0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap())
                        .collect();
                    let (pa, pb) = (a.predict(&set).unwrap(), b.predict(&set).unwrap());
                    assert!(pa.iter().zip(pb.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
                }
            }
        }
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let ck = &samples()[0];
        let mut bytes = encode_checkpoint(ck);
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        let err = decode_checkpoint(&bytes).unwrap_err();
        assert!(matches!(err, Error::Checksum { .. }), "{err}");
        assert_eq!(err.code(), 12);
    }

    #[test]
    fn truncation_and_version_have_distinct_codes() {
        let bytes = encode_checkpoint(&samples()[0]);
        let t = decode_checkpoint(&bytes[..bytes.len() - 9]).unwrap_err();
        assert!(matches!(t, Error::Truncated(_)));
        assert!(matches!(decode_checkpoint(&bytes[..10]), Err(Error::Truncated(_))));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        let v = decode_checkpoint(&v2).unwrap_err();
        assert!(matches!(v, Error::VersionMismatch { found: 2, supported: 1 }));
        let codes = [t.code(), v.code(), 12];
        assert_eq!(codes, [11, 10, 12]);
        assert!(matches!(decode_checkpoint(b"NOPE0000000000000000"), Err(Error::BadCheckpoint(_))));
    }

    #[test]
    fn kind_mismatch() {
        let ds = samples()[2].clone();
        let err = ds.into_set_model(ModelKind::Agn).unwrap_err();
        assert!(err.to_string().contains("model kind mismatch"), "{err}");
        let agn = samples()[0].clone();
        assert!(agn.clone().into_set_model(ModelKind::Agn).is_ok());
        assert!(agn.into_analogy_model(AnalogyKind::WvAgn).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.abnn");
        let ck = samples().pop().unwrap();
        save_checkpoint(&ck, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ck);
    }
}
