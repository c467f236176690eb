//! Bit-level I/O with exp-Golomb codes and the 4x4 zigzag scan.

use crate::{Error, Result};

/// Raster positions of a 4x4 block in zigzag order.
pub const ZIGZAG_4X4: [usize; 16] = [0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15];

/// MSB-first bit writer.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `n` bits of `value`, `n <= 32`.
    pub fn put(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 32);
        if n == 0 {
            return;
        }
        self.acc = (self.acc << n) | u64::from(value) & ((1u64 << n) - 1);
        self.filled += n;
        while self.filled >= 8 {
            self.filled -= 8;
            self.bytes.push((self.acc >> self.filled) as u8);
        }
        self.acc &= (1u64 << self.filled) - 1;
    }

    /// Unsigned exp-Golomb: `len-1` zeros then `v+1` in `len` bits.
    pub fn put_ue(&mut self, v: u64) {
        let code = v + 1;
        let len = 64 - code.leading_zeros();
        let mut zeros = len - 1;
        while zeros > 0 {
            let n = zeros.min(32);
            self.put(0, n);
            zeros -= n;
        }
        if len > 32 {
            self.put((code >> 32) as u32, len - 32);
            self.put(code as u32, 32);
        } else {
            self.put(code as u32, len);
        }
    }

    /// Signed exp-Golomb: `k > 0 → 2k-1`, `k ≤ 0 → -2k`.
    pub fn put_se(&mut self, k: i64) {
        let mapped = if k > 0 { 2 * k as u64 - 1 } else { (-(k as i128) * 2) as u64 };
        self.put_ue(mapped);
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8 + self.filled as usize
    }

    /// Pads the final byte with zero bits.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            let pad = 8 - self.filled;
            self.put(0, pad);
        }
        self.bytes
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn byte_offset(&self) -> usize {
        self.pos / 8
    }

    fn bit(&mut self) -> Result<u32> {
        let byte = self
            .bytes
            .get(self.pos / 8)
            .ok_or_else(|| Error::malformed(self.pos / 8, "bitstream exhausted"))?;
        let b = (byte >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(u32::from(b))
    }

    pub fn get(&mut self, n: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | u64::from(self.bit()?);
        }
        Ok(v)
    }

    pub fn get_ue(&mut self) -> Result<u64> {
        let start = self.byte_offset();
        let mut zeros = 0u32;
        while self.bit()? == 0 {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::malformed(start, "exp-Golomb prefix too long"));
            }
        }
        let rest = self.get(zeros)?;
        Ok(((1u64 << zeros) | rest) - 1)
    }

    pub fn get_se(&mut self) -> Result<i64> {
        let v = self.get_ue()?;
        Ok(if v % 2 == 1 { v.div_ceil(2) as i64 } else { -((v / 2) as i64) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_codes() {
        let mut w = BitWriter::new();
        w.put_ue(0); // 1
        w.put_ue(1); // 010
        w.put_ue(2); // 011
        w.put_se(-1); // ue(2) = 011
        assert_eq!(w.bit_len(), 10);
        assert_eq!(w.finish(), vec![0b1010_0110, 0b1100_0000]);
    }

    #[test]
    fn zigzag_is_a_permutation() {
        let mut seen = [false; 16];
        for &i in &ZIGZAG_4X4 {
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn truncated_stream_errors() {
        let mut r = BitReader::new(&[0x00]);
        assert!(matches!(r.get_ue(), Err(Error::Malformed { .. })));
    }

    proptest! {
        #[test]
        fn se_round_trip(values in prop::collection::vec(-(1i64 << 40)..(1i64 << 40), 0..200)) {
            let mut w = BitWriter::new();
            for &v in &values {
                w.put_se(v);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for &v in &values {
                prop_assert_eq!(r.get_se().unwrap(), v);
            }
        }
    }
}
