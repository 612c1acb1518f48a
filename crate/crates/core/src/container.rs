//! The `SACX` container: a 32-byte file header followed by one record per
//! frame, little-endian throughout. See `docs/format.md` for the byte layout.

use std::fmt;
use std::path::Path;

use crate::cs::{CsEncodedFrame, QuantizedMeasurements};
use crate::error::{invalid, Error, Result};
use crate::sfft::{PackedCoefficient, SfftEncodedFrame, MAX_PACKED_N};
use crate::transforms::BasisKind;

pub const MAGIC: [u8; 4] = *b"SACX";
pub const VERSION: u8 = 1;
pub const FILE_HEADER_BYTES: usize = 32;
/// method, frame_index, N, M, basis, levels, seed, bits, scale.
pub const CS_RECORD_HEADER_BYTES: usize = 28;
/// method, frame_index, N, K, scale.
pub const SFFT_RECORD_HEADER_BYTES: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cs,
    Sfft,
}

impl Method {
    pub fn tag(self) -> u8 {
        match self {
            Method::Cs => 1,
            Method::Sfft => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Method::Cs),
            2 => Ok(Method::Sfft),
            t => Err(Error::UnsupportedMethod(t)),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cs => "CS",
            Method::Sfft => "SFFT",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Ok(Method::Cs),
            "sfft" => Ok(Method::Sfft),
            _ => Err(invalid(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub method: Method,
    pub sample_rate: u32,
    pub frame_len: usize,
    pub frame_count: usize,
    /// Samples before zero-padding of the last frame.
    pub original_len: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EncodedFrame {
    Cs(CsEncodedFrame),
    Sfft(SfftEncodedFrame),
}

impl EncodedFrame {
    pub fn method(&self) -> Method {
        match self {
            EncodedFrame::Cs(_) => Method::Cs,
            EncodedFrame::Sfft(_) => Method::Sfft,
        }
    }

    pub fn frame_index(&self) -> usize {
        match self {
            EncodedFrame::Cs(f) => f.frame_index,
            EncodedFrame::Sfft(f) => f.frame_index,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            EncodedFrame::Cs(f) => f.n,
            EncodedFrame::Sfft(f) => f.n,
        }
    }

    /// Serialized record size in bits; fails for an unquantized CS frame.
    pub fn record_bits(&self) -> Result<usize> {
        match self {
            EncodedFrame::Cs(f) => {
                let q = f.quant.as_ref().ok_or_else(|| invalid("CS frame must be quantized before serialization"))?;
                Ok(cs_record_bits(f.m(), q.bits))
            }
            EncodedFrame::Sfft(f) => Ok(sfft_record_bits(f.k())),
        }
    }
}

pub fn cs_record_bits(m: usize, quant_bits: u8) -> usize {
    8 * (CS_RECORD_HEADER_BYTES + m * (quant_bits as usize).div_ceil(8))
}

pub fn sfft_record_bits(k: usize) -> usize {
    8 * (SFFT_RECORD_HEADER_BYTES + 4 * k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub header: ContainerHeader,
    pub frames: Vec<EncodedFrame>,
}

fn fits<T: TryFrom<usize>>(v: usize, what: &str) -> Result<T> {
    T::try_from(v).map_err(|_| invalid(format!("{what} {v} does not fit its field")))
}

impl Container {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let h = &self.header;
        if h.frame_count != self.frames.len() {
            return Err(invalid(format!("header declares {} frames, {} present", h.frame_count, self.frames.len())));
        }
        let mut out = Vec::with_capacity(FILE_HEADER_BYTES);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(h.method.tag());
        out.extend_from_slice(&h.sample_rate.to_le_bytes());
        out.extend_from_slice(&fits::<u16>(h.frame_len, "frame length")?.to_le_bytes());
        out.extend_from_slice(&fits::<u32>(h.frame_count, "frame count")?.to_le_bytes());
        out.extend_from_slice(&h.original_len.to_le_bytes());
        out.extend_from_slice(&h.master_seed.to_le_bytes());
        debug_assert_eq!(out.len(), FILE_HEADER_BYTES);

        for (i, frame) in self.frames.iter().enumerate() {
            if frame.method() != h.method {
                return Err(invalid(format!("frame {i} is {} in a {} container", frame.method(), h.method)));
            }
            if frame.frame_index() != i || frame.n() != h.frame_len {
                return Err(invalid(format!("frame {i} has index {} and length {}", frame.frame_index(), frame.n())));
            }
            match frame {
                EncodedFrame::Cs(f) => write_cs(&mut out, f)?,
                EncodedFrame::Sfft(f) => write_sfft(&mut out, f)?,
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FILE_HEADER_BYTES {
            return Err(Error::CorruptHeader(format!("file is {} bytes, shorter than the header", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::CorruptHeader("bad magic, not a SACX container".into()));
        }
        let mut r = Reader { buf: bytes, pos: 4, frame: 0 };
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::VersionMismatch { found: version, expected: VERSION });
        }
        let method = Method::from_tag(r.u8()?)?;
        let sample_rate = r.u32()?;
        let frame_len = r.u16()? as usize;
        let frame_count = r.u32()? as usize;
        let original_len = r.u64()?;
        let master_seed = r.u64()?;
        if sample_rate == 0 || frame_len < 2 || !frame_len.is_power_of_two() {
            return Err(Error::CorruptHeader(format!("sample rate {sample_rate}, frame length {frame_len}")));
        }
        if original_len > (frame_count * frame_len) as u64 || original_len + (frame_len as u64) <= (frame_count * frame_len) as u64 {
            return Err(Error::CorruptHeader(format!(
                "original length {original_len} inconsistent with {frame_count} frames of {frame_len}"
            )));
        }
        let header = ContainerHeader { method, sample_rate, frame_len, frame_count, original_len, master_seed };

        let mut frames = Vec::with_capacity(frame_count.min(1 << 16));
        for i in 0..frame_count {
            r.frame = i;
            let tag = r.u8()?;
            if Method::from_tag(tag)? != method {
                return Err(Error::CorruptContainer(format!("frame {i} method tag {tag} differs from the header")));
            }
            let index = r.u32()? as usize;
            let n = r.u16()? as usize;
            if index != i || n != frame_len {
                return Err(Error::CorruptContainer(format!("frame {i} declares index {index}, length {n}")));
            }
            frames.push(match method {
                Method::Cs => EncodedFrame::Cs(read_cs(&mut r, index, n)?),
                Method::Sfft => EncodedFrame::Sfft(read_sfft(&mut r, index, n)?),
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::CorruptContainer(format!("{} trailing bytes after frame {}", bytes.len() - r.pos, frame_count)));
        }
        Ok(Self { header, frames })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Mean record size in bits.
    pub fn bits_per_frame(&self) -> Result<f64> {
        if self.frames.is_empty() {
            return Ok(0.0);
        }
        let total: usize = self.frames.iter().map(|f| f.record_bits()).sum::<Result<usize>>()?;
        Ok(total as f64 / self.frames.len() as f64)
    }
}

fn write_cs(out: &mut Vec<u8>, f: &CsEncodedFrame) -> Result<()> {
    let q = f.quant.as_ref().ok_or_else(|| invalid("CS frame must be quantized before serialization"))?;
    if q.codes.len() != f.m() {
        return Err(invalid("quantized code count differs from M"));
    }
    out.push(Method::Cs.tag());
    out.extend_from_slice(&fits::<u32>(f.frame_index, "frame index")?.to_le_bytes());
    out.extend_from_slice(&fits::<u16>(f.n, "frame length")?.to_le_bytes());
    out.extend_from_slice(&fits::<u16>(f.m(), "measurement count")?.to_le_bytes());
    out.push(f.basis.tag());
    out.push(f.basis.levels_byte());
    out.extend_from_slice(&f.seed.to_le_bytes());
    out.push(q.bits);
    out.extend_from_slice(&q.scale.to_le_bytes());
    let w = q.word_bytes();
    for &c in &q.codes {
        out.extend_from_slice(&c.to_le_bytes()[..w]);
    }
    Ok(())
}

fn write_sfft(out: &mut Vec<u8>, f: &SfftEncodedFrame) -> Result<()> {
    out.push(Method::Sfft.tag());
    out.extend_from_slice(&fits::<u32>(f.frame_index, "frame index")?.to_le_bytes());
    out.extend_from_slice(&fits::<u16>(f.n, "frame length")?.to_le_bytes());
    out.extend_from_slice(&fits::<u16>(f.k(), "coefficient count")?.to_le_bytes());
    out.extend_from_slice(&f.scale.to_le_bytes());
    for pc in &f.packed {
        out.extend_from_slice(&pc.real_word.to_le_bytes());
        out.extend_from_slice(&pc.imag_word.to_le_bytes());
    }
    Ok(())
}

fn read_cs(r: &mut Reader, frame_index: usize, n: usize) -> Result<CsEncodedFrame> {
    let i = r.frame;
    let m = r.u16()? as usize;
    let (tag, levels) = (r.u8()?, r.u8()?);
    let basis = BasisKind::from_wire(tag, levels).map_err(|e| Error::CorruptContainer(format!("frame {i}: {e}")))?;
    basis.dwt_levels(n).map_err(|e| Error::CorruptContainer(format!("frame {i}: {e}")))?;
    let seed = r.u64()?;
    let bits = r.u8()?;
    let scale = r.f64()?;
    if !(8..=32).contains(&bits) || !(scale.is_finite() && scale >= 0.0) || m == 0 || m > n {
        return Err(Error::CorruptContainer(format!("frame {i}: M={m}, {bits} bits, scale {scale}")));
    }
    let w = (bits as usize).div_ceil(8);
    let (lo, hi) = (-(1i64 << (bits - 1)), (1i64 << (bits - 1)) - 1);
    let raw = r.take(m * w)?;
    let codes = raw
        .chunks_exact(w)
        .map(|c| {
            let mut b = [0u8; 4];
            b[..w].copy_from_slice(c);
            let shift = 32 - 8 * w as u32;
            let v = (i32::from_le_bytes(b) << shift) >> shift;
            if (lo..=hi).contains(&(v as i64)) {
                Ok(v)
            } else {
                Err(Error::CorruptContainer(format!("frame {i}: code {v} outside {bits}-bit range")))
            }
        })
        .collect::<Result<Vec<i32>>>()?;
    let quant = QuantizedMeasurements { bits, scale, codes };
    Ok(CsEncodedFrame { frame_index, n, basis, seed, measurements: quant.dequantize(), quant: Some(quant) })
}

fn read_sfft(r: &mut Reader, frame_index: usize, n: usize) -> Result<SfftEncodedFrame> {
    let i = r.frame;
    let k = r.u16()? as usize;
    let scale = r.f64()?;
    if n > MAX_PACKED_N || k > n || !(scale.is_finite() && scale > 0.0) {
        return Err(Error::CorruptContainer(format!("frame {i}: N={n}, K={k}, scale {scale}")));
    }
    let raw = r.take(4 * k)?;
    let packed = raw
        .chunks_exact(4)
        .map(|c| PackedCoefficient {
            real_word: u16::from_le_bytes([c[0], c[1]]),
            imag_word: u16::from_le_bytes([c[2], c[3]]),
        })
        .collect();
    Ok(SfftEncodedFrame { frame_index, n, scale, packed, saturated: 0 })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    /// Frame being read, for truncation errors.
    frame: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < len {
            return Err(Error::Truncated { frame: self.frame });
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn array<const L: usize>(&mut self) -> Result<[u8; L]> {
        Ok(self.take(L)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::Frame;
    use crate::cs::CsEncoder;
    use crate::sfft::sfft_encode;

    fn sfft_container() -> Container {
        let frames: Vec<EncodedFrame> = (0..2)
            .map(|i| {
                let x: Vec<f64> = (0..64).map(|t| ((t * (i + 3)) as f64 * 0.3).sin() * 0.5).collect();
                EncodedFrame::Sfft(sfft_encode(&Frame::new(i, x), 5).unwrap())
            })
            .collect();
        let header = ContainerHeader {
            method: Method::Sfft,
            sample_rate: 8000,
            frame_len: 64,
            frame_count: 2,
            original_len: 100,
            master_seed: 7,
        };
        Container { header, frames }
    }

    #[test]
    fn sfft_round_trip_and_size() {
        let c = sfft_container();
        let bytes = c.to_bytes().unwrap();
        assert_eq!(bytes.len(), FILE_HEADER_BYTES + 2 * (SFFT_RECORD_HEADER_BYTES + 4 * 5));
        assert_eq!(c.frames[0].record_bits().unwrap(), 136 + 32 * 5);
        assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
    }

    #[test]
    fn cs_round_trip() {
        let enc = CsEncoder { basis: BasisKind::haar(), n: 64, m: 20, master_seed: 9, quant_bits: Some(12) };
        let x: Vec<f64> = (0..64).map(|t| (t as f64 * 0.2).cos() * 0.7).collect();
        let frame = enc.encode(&Frame::new(0, x)).unwrap();
        let header = ContainerHeader { method: Method::Cs, sample_rate: 8000, frame_len: 64, frame_count: 1, original_len: 64, master_seed: 9 };
        let c = Container { header, frames: vec![EncodedFrame::Cs(frame.clone())] };
        let bytes = c.to_bytes().unwrap();
        assert_eq!(bytes.len(), FILE_HEADER_BYTES + CS_RECORD_HEADER_BYTES + 20 * 2);
        let EncodedFrame::Cs(back) = &Container::from_bytes(&bytes).unwrap().frames[0] else { panic!() };
        assert_eq!(back.quant, frame.quant);
        assert_eq!(back.measurements, frame.decoder_measurements());
    }

    #[test]
    fn corrupt_inputs() {
        let bytes = sfft_container().to_bytes().unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Container::from_bytes(&bad), Err(Error::CorruptHeader(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(Container::from_bytes(&bad), Err(Error::VersionMismatch { found: 9, .. })));
        let mut bad = bytes.clone();
        bad[5] = 7;
        let err = Container::from_bytes(&bad).unwrap_err();
        assert!(err.to_string().contains("unsupported method"));
        let err = Container::from_bytes(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Truncated { frame: 1 }), "{err}");
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(Container::from_bytes(&long), Err(Error::CorruptContainer(_))));
    }
}
