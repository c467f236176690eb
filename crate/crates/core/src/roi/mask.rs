use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::{Error, Result};

const RLE_MAGIC: &[u8; 4] = b"RMSK";

/// Per-point binary RoI labels aligned with a point cloud.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoiMask(Vec<bool>);

impl RoiMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; n];
        for i in indices {
            bits[i] = true;
        }
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Elementwise AND, the composition of a heatmap mask with a foreground mask.
    pub fn and(&self, other: &RoiMask) -> Result<RoiMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &RoiMask) -> Result<RoiMask> {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &RoiMask, f: impl Fn(bool, bool) -> bool) -> Result<RoiMask> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(RoiMask(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    /// Run-length sidecar format, little-endian:
    /// `"RMSK"`, `u32` length, `u32` run count, then run lengths alternating
    /// between 0-runs and 1-runs, starting with a (possibly empty) 0-run.
    pub fn write_rle<W: Write>(&self, mut w: W) -> Result<()> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for &b in &self.0 {
            if b != current {
                runs.push(run);
                run = 0;
                current = b;
            }
            run += 1;
        }
        if run > 0 || !runs.is_empty() {
            runs.push(run);
        }
        w.write_all(RLE_MAGIC)?;
        w.write_u32::<LittleEndian>(self.len() as u32)?;
        w.write_u32::<LittleEndian>(runs.len() as u32)?;
        for r in runs {
            w.write_u32::<LittleEndian>(r)?;
        }
        Ok(())
    }

    pub fn read_rle<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != RLE_MAGIC {
            return Err(Error::malformed(0, "bad mask magic"));
        }
        let n = r.read_u32::<LittleEndian>()? as usize;
        let runs = r.read_u32::<LittleEndian>()? as usize;
        let mut bits = Vec::with_capacity(n);
        let mut value = false;
        for k in 0..runs {
            let len = r.read_u32::<LittleEndian>()? as usize;
            if bits.len() + len > n {
                return Err(Error::malformed(12 + 4 * k, "runs exceed mask length"));
            }
            bits.extend(std::iter::repeat_n(value, len));
            value = !value;
        }
        if bits.len() != n {
            return Err(Error::malformed(12 + 4 * runs, "runs shorter than mask length"));
        }
        Ok(Self(bits))
    }
}

/// Final RoI mask: heatmap mask AND foreground mask.
pub fn compose_roi(heatmap_mask: &RoiMask, foreground: &RoiMask) -> Result<RoiMask> {
    heatmap_mask.and(foreground)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(bits: &[u8]) -> RoiMask {
        RoiMask::new(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose_roi(&m(&[1, 1, 0]), &m(&[1, 0, 0])).unwrap(), m(&[1, 0, 0]));
        let x = m(&[1, 0, 1, 1, 0]);
        assert_eq!(compose_roi(&x, &RoiMask::ones(5)).unwrap(), x);
        assert_eq!(compose_roi(&x, &RoiMask::zeros(5)).unwrap(), RoiMask::zeros(5));
        assert!(matches!(
            compose_roi(&x, &RoiMask::ones(4)),
            Err(Error::LengthMismatch { expected: 5, actual: 4 })
        ));
    }

    #[test]
    fn rle_edge_cases() {
        for mask in [RoiMask::zeros(0), RoiMask::ones(7), RoiMask::zeros(3), m(&[1, 0, 0, 1])] {
            let mut buf = Vec::new();
            mask.write_rle(&mut buf).unwrap();
            assert_eq!(RoiMask::read_rle(buf.as_slice()).unwrap(), mask);
        }
        let mut buf = Vec::new();
        m(&[0, 1, 1]).write_rle(&mut buf).unwrap();
        buf[4] = 2;
        assert!(RoiMask::read_rle(buf.as_slice()).is_err());
    }

    fn arb_mask(n: usize) -> impl Strategy<Value = RoiMask> {
        prop::collection::vec(any::<bool>(), n).prop_map(RoiMask::new)
    }

    proptest! {
        #[test]
        fn and_laws(a in arb_mask(64), b in arb_mask(64), c in arb_mask(64)) {
            prop_assert_eq!(a.and(&b).unwrap(), b.and(&a).unwrap());
            prop_assert_eq!(a.and(&b).unwrap().and(&c).unwrap(), a.and(&b.and(&c).unwrap()).unwrap());
            prop_assert_eq!(a.and(&a).unwrap(), a.clone());
        }

        #[test]
        fn rle_round_trip(a in prop::collection::vec(any::<bool>(), 0..300)) {
            let mask = RoiMask::new(a);
            let mut buf = Vec::new();
            mask.write_rle(&mut buf).unwrap();
            prop_assert_eq!(RoiMask::read_rle(buf.as_slice()).unwrap(), mask);
        }
    }
}
