//! PQGF snapshots: a physical-space field at one time.
//!
//! Layout (little endian): magic `PQGF`, `u32` version, `u32` n, `f64` time,
//! then `n * n` `f64` samples in row-major order (`x1` slow).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};

const MAGIC: &[u8; 4] = b"PQGF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub n: usize,
    pub samples: Vec<f64>,
}

impl Snapshot {
    pub fn of(field: &SpectralField, time: f64) -> Self {
        Snapshot { time, n: field.grid().n(), samples: field.to_physical() }
    }

    pub fn to_field(&self) -> Result<SpectralField> {
        SpectralField::from_physical(Grid::new(self.n)?, &self.samples)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        if self.samples.len() != self.n * self.n {
            return Err(Error::DimensionMismatch { expected: self.n * self.n, got: self.samples.len() });
        }
        let mut buf = Vec::with_capacity(20 + 8 * self.samples.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.n as u32).to_le_bytes());
        buf.extend_from_slice(&self.time.to_le_bytes());
        for v in &self.samples {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 20];
        r.read_exact(&mut head).map_err(|_| Error::Snapshot("truncated header".into()))?;
        if &head[..4] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
        let time = f64::from_le_bytes(head[12..20].try_into().unwrap());
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * n * n {
            return Err(Error::Snapshot(format!("expected {} sample bytes, found {}", 8 * n * n, body.len())));
        }
        let samples = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Snapshot { time, n, samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let s = Snapshot { time: 0.5, n: 2, samples: vec![1.0, 2.0, 3.0, 4.0] };
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 20 + 32);
        assert_eq!(&buf[..4], b"PQGF");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..20], &0.5f64.to_le_bytes());
        assert_eq!(&buf[44..52], &4.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(Snapshot::read_from(&b"PQGX\x01\0\0\0"[..]), Err(Error::Snapshot(_))));
        let s = Snapshot { time: 0.0, n: 2, samples: vec![0.0; 4] };
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        buf.pop();
        assert!(Snapshot::read_from(&buf[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(time in -10.0f64..10.0, seed in any::<u64>()) {
            let f = crate::field::random_field(Grid::new(16).unwrap(), seed, 6.0, 0.0);
            let s = Snapshot::of(&f, time);
            let mut buf = Vec::new();
            s.write_to(&mut buf).unwrap();
            let back = Snapshot::read_from(&buf[..]).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert!(back.to_field().unwrap().max_coeff_diff(&f) < 1e-14);
        }
    }
}
