use crate::error::{format, Result};

/// Most-significant-bit-first bit writer.
#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, high bit first.
    pub fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.bits % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.bits % 8);
        }
        self.bits += 1;
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write(b as u64, 8);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    limit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self::with_bit_len(bytes, bytes.len() * 8)
    }

    /// Reader over the first `bits` bits of `bytes`.
    pub fn with_bit_len(bytes: &'a [u8], bits: usize) -> Self {
        BitReader {
            bytes,
            pos: 0,
            limit: bits.min(bytes.len() * 8),
        }
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit {
            return format("unexpected end of bit stream");
        }
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.write(0b1, 1);
        w.write(0b0110, 4);
        w.write(0xABC, 12);
        assert_eq!(w.bit_len(), 17);
        let bytes = w.into_bytes();
        assert_eq!(bytes, vec![0b1011_0101, 0b0101_1110, 0b0000_0000]);
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read(1).unwrap(), 1);
        assert_eq!(r.read(4).unwrap(), 0b0110);
        assert_eq!(r.read(12).unwrap(), 0xABC);
        assert_eq!(r.remaining(), 7);
    }

    #[test]
    fn reading_past_the_limit_fails() {
        let mut r = BitReader::with_bit_len(&[0xFF], 3);
        assert_eq!(r.read(3).unwrap(), 7);
        assert!(r.read_bit().is_err());
    }
}
