//! Versioned little-endian model container.
//!
//! ```text
//! magic "TMUQ" | u32 version | u64 payload length | payload | u32 CRC-32 of payload
//! ```
//!
//! All integers and floats are little-endian regardless of the host.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::binarize::{ImageThermometer, ThermometerEncoder};
use crate::conv::{ConvolutionalTM, PatchConfig};
use crate::error::{Error, Result};
use crate::machine::{BinaryTM, Clause, ClauseBank, Polarity, TMParams, TaState};
use crate::multiclass::MulticlassTM;

pub const MAGIC: &[u8; 4] = b"TMUQ";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub enum Model {
    Binary(BinaryTM),
    Multiclass(MulticlassTM),
    Convolutional(ConvolutionalTM),
}

/// Input encoding stored next to a model.
#[derive(Clone, Debug, PartialEq)]
pub enum Encoder {
    None,
    Thermometer(ThermometerEncoder),
    Image(ImageThermometer),
}

#[derive(Clone, Debug)]
pub struct ModelArchive {
    pub model: Model,
    pub encoder: Encoder,
    /// Free-form training metadata (experiment id, epochs, ...).
    pub metadata: BTreeMap<String, String>,
}

impl ModelArchive {
    pub fn new(model: Model, encoder: Encoder) -> Self {
        Self { model, encoder, metadata: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut p = Vec::new();
        match &self.model {
            Model::Binary(tm) => {
                p.push(0);
                write_unit(&mut p, tm);
            }
            Model::Multiclass(tm) => {
                p.push(1);
                write_multiclass(&mut p, tm);
            }
            Model::Convolutional(tm) => {
                p.push(2);
                write_patch_config(&mut p, tm.config());
                write_multiclass(&mut p, tm.inner());
            }
        }
        match &self.encoder {
            Encoder::None => p.push(0),
            Encoder::Thermometer(e) => {
                p.push(1);
                put_u64(&mut p, e.bins() as u64);
                p.push(e.boundary_bit() as u8);
                put_u64(&mut p, e.num_features() as u64);
                for f in 0..e.num_features() {
                    for &t in e.thresholds(f) {
                        p.write_f64::<LE>(t).unwrap();
                    }
                }
            }
            Encoder::Image(e) => {
                p.push(2);
                put_u64(&mut p, e.channels as u64);
                put_u64(&mut p, e.resolution as u64);
                p.push(e.pixel_min);
                p.push(e.pixel_max);
            }
        }
        p.write_u32::<LE>(self.metadata.len() as u32).unwrap();
        for (k, v) in &self.metadata {
            put_str(&mut p, k);
            put_str(&mut p, v);
        }

        let mut out = Vec::with_capacity(p.len() + 20);
        out.extend_from_slice(MAGIC);
        out.write_u32::<LE>(VERSION).unwrap();
        put_u64(&mut out, p.len() as u64);
        out.extend_from_slice(&p);
        out.write_u32::<LE>(crc32fast::hash(&p)).unwrap();
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(corrupt("file shorter than the header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let mut head = Reader(Cursor::new(&bytes[4..16]));
        let version = head.u32()?;
        if version != VERSION {
            return Err(Error::VersionMismatch { found: version, expected: VERSION });
        }
        let len = head.u64()?;
        let body = &bytes[16..];
        if (body.len() as u64) < len.saturating_add(4) {
            return Err(corrupt("truncated payload"));
        }
        if body.len() as u64 != len + 4 {
            return Err(corrupt("trailing bytes after checksum"));
        }
        let (payload, crc) = body.split_at(len as usize);
        if crc32fast::hash(payload) != u32::from_le_bytes(crc.try_into().unwrap()) {
            return Err(corrupt("checksum mismatch"));
        }

        let mut r = Reader(Cursor::new(payload));
        let model = match r.u8()? {
            0 => Model::Binary(read_unit(&mut r)?),
            1 => Model::Multiclass(read_multiclass(&mut r)?),
            2 => {
                let config = read_patch_config(&mut r)?;
                Model::Convolutional(ConvolutionalTM::from_parts(config, read_multiclass(&mut r)?)?)
            }
            k => return Err(corrupt(&format!("unknown model kind {k}"))),
        };
        let encoder = match r.u8()? {
            0 => Encoder::None,
            1 => {
                let bins = r.usize()?;
                let boundary = r.bool()?;
                let features = r.len(8)?;
                let width = (bins + boundary as usize).saturating_sub(1);
                let mut thresholds = Vec::with_capacity(features);
                for _ in 0..features {
                    let n = r.check_count(width, 8)?;
                    thresholds.push((0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?);
                }
                Encoder::Thermometer(ThermometerEncoder::from_thresholds(thresholds, bins, boundary)?)
            }
            2 => Encoder::Image(ImageThermometer {
                channels: r.usize()?,
                resolution: r.usize()?,
                pixel_min: r.u8()?,
                pixel_max: r.u8()?,
            }),
            k => return Err(corrupt(&format!("unknown encoder kind {k}"))),
        };
        let entries = r.u32()? as usize;
        let mut metadata = BTreeMap::new();
        for _ in 0..entries {
            let k = r.string()?;
            metadata.insert(k, r.string()?);
        }
        if r.0.position() != payload.len() as u64 {
            return Err(corrupt("unread bytes in payload"));
        }
        Ok(Self { model, encoder, metadata })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|source| Error::File { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        Self::from_bytes(&bytes)
    }
}

/// Serialized clause banks, automata and generator state of `units`.
/// Two models with equal unit bytes predict and train identically.
pub fn units_bytes(units: &[BinaryTM]) -> Vec<u8> {
    let mut p = Vec::new();
    for u in units {
        write_unit(&mut p, u);
    }
    p
}

fn corrupt(msg: &str) -> Error {
    Error::CorruptArchive(msg.to_string())
}

fn put_u64(p: &mut Vec<u8>, v: u64) {
    p.write_u64::<LE>(v).unwrap();
}

fn put_str(p: &mut Vec<u8>, s: &str) {
    p.write_u32::<LE>(s.len() as u32).unwrap();
    p.extend_from_slice(s.as_bytes());
}

fn write_params(p: &mut Vec<u8>, params: &TMParams) {
    p.write_u32::<LE>(params.target).unwrap();
    p.write_f64::<LE>(params.specificity).unwrap();
    put_u64(p, params.num_clauses as u64);
    put_u64(p, params.literal_budget.map_or(0, |b| b as u64));
    p.write_u16::<LE>(params.states_per_action).unwrap();
    p.push(params.boost_true_positive as u8);
    put_u64(p, params.seed);
}

fn write_rng(p: &mut Vec<u8>, rng: &ChaCha8Rng) {
    p.extend_from_slice(&rng.get_seed());
    put_u64(p, rng.get_stream());
    p.write_u128::<LE>(rng.get_word_pos()).unwrap();
}

fn write_unit(p: &mut Vec<u8>, tm: &BinaryTM) {
    write_params(p, tm.params());
    write_rng(p, tm.rng());
    put_u64(p, tm.num_features() as u64);
    for c in tm.bank().clauses() {
        p.push(matches!(c.polarity(), Polarity::Negative) as u8);
        p.write_u32::<LE>(c.weight()).unwrap();
        for s in c.states() {
            p.write_u16::<LE>(s.value()).unwrap();
        }
    }
}

fn write_multiclass(p: &mut Vec<u8>, tm: &MulticlassTM) {
    p.write_u32::<LE>(tm.num_classes() as u32).unwrap();
    for name in tm.classes() {
        put_str(p, name);
    }
    write_rng(p, tm.order_rng());
    for u in tm.units() {
        write_unit(p, u);
    }
}

fn write_patch_config(p: &mut Vec<u8>, c: &PatchConfig) {
    for v in [c.image_height, c.image_width, c.planes, c.patch_height, c.patch_width] {
        put_u64(p, v as u64);
    }
    p.push(c.position_literals as u8);
}

struct Reader<'a>(Cursor<&'a [u8]>);

impl Reader<'_> {
    fn wrap<T>(r: std::io::Result<T>) -> Result<T> {
        r.map_err(|_| corrupt("truncated payload"))
    }

    fn remaining(&self) -> u64 {
        self.0.get_ref().len() as u64 - self.0.position()
    }

    fn u8(&mut self) -> Result<u8> {
        Self::wrap(self.0.read_u8())
    }

    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(corrupt(&format!("bad flag byte {b}"))),
        }
    }

    fn u16(&mut self) -> Result<u16> {
        Self::wrap(self.0.read_u16::<LE>())
    }

    fn u32(&mut self) -> Result<u32> {
        Self::wrap(self.0.read_u32::<LE>())
    }

    fn u64(&mut self) -> Result<u64> {
        Self::wrap(self.0.read_u64::<LE>())
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("length overflows usize"))
    }

    fn f64(&mut self) -> Result<f64> {
        Self::wrap(self.0.read_f64::<LE>())
    }

    /// Reads a u64 element count and checks the payload can hold it.
    fn len(&mut self, elem_bytes: u64) -> Result<usize> {
        let n = self.usize()?;
        self.check_count(n, elem_bytes)
    }

    fn check_count(&self, n: usize, elem_bytes: u64) -> Result<usize> {
        if (n as u64).saturating_mul(elem_bytes) > self.remaining() {
            return Err(corrupt("truncated payload"));
        }
        Ok(n)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let n = self.check_count(n, 1)?;
        let mut buf = vec![0; n];
        Self::wrap(self.0.read_exact(&mut buf))?;
        String::from_utf8(buf).map_err(|_| corrupt("string is not UTF-8"))
    }

    fn params(&mut self) -> Result<TMParams> {
        Ok(TMParams {
            target: self.u32()?,
            specificity: self.f64()?,
            num_clauses: self.usize()?,
            literal_budget: match self.usize()? {
                0 => None,
                b => Some(b),
            },
            states_per_action: self.u16()?,
            boost_true_positive: self.bool()?,
            seed: self.u64()?,
        })
    }

    fn rng(&mut self) -> Result<ChaCha8Rng> {
        let mut seed = [0u8; 32];
        Self::wrap(self.0.read_exact(&mut seed))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.u64()?);
        rng.set_word_pos(Self::wrap(self.0.read_u128::<LE>())?);
        Ok(rng)
    }
}

fn read_unit(r: &mut Reader) -> Result<BinaryTM> {
    let params = r.params()?;
    params.validate()?;
    let rng = r.rng()?;
    let features = r.usize()?;
    let literals = features.checked_mul(2).ok_or_else(|| corrupt("feature count overflows"))?;
    r.check_count(params.num_clauses, 5 + 2 * literals as u64)?;
    let mut clauses = Vec::with_capacity(params.num_clauses);
    for _ in 0..params.num_clauses {
        let polarity = if r.bool()? { Polarity::Negative } else { Polarity::Positive };
        let weight = r.u32()?;
        let states = (0..literals)
            .map(|_| {
                let v = r.u16()?;
                TaState::new(v, params.states_per_action).ok_or_else(|| corrupt(&format!("automaton state {v} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        clauses.push(Clause::from_parts(states, polarity, weight, params.states_per_action)?);
    }
    BinaryTM::from_parts(params, ClauseBank::from_clauses(features, clauses)?, rng)
}

fn read_multiclass(r: &mut Reader) -> Result<MulticlassTM> {
    let k = r.u32()? as usize;
    let k = r.check_count(k, 4)?;
    let classes = (0..k).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    let order_rng = r.rng()?;
    let units = (0..k).map(|_| read_unit(r)).collect::<Result<Vec<_>>>()?;
    MulticlassTM::from_units(classes, units, order_rng)
}

fn read_patch_config(r: &mut Reader) -> Result<PatchConfig> {
    let (h, w, planes, ph, pw) = (r.usize()?, r.usize()?, r.usize()?, r.usize()?, r.usize()?);
    Ok(PatchConfig::new((h, w, planes), (ph, pw)).with_position_literals(r.bool()?))
}
