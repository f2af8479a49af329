//! Blowfish block cipher and packet encryption.

mod tables;

use crate::error::{domain, format, Result};

use tables::{P_INIT, S_INIT};

pub const BLOCK_BYTES: usize = 8;
pub const MIN_KEY_BYTES: usize = 4;
pub const MAX_KEY_BYTES: usize = 56;

/// Expanded Blowfish key: 18 subkeys and four S-boxes.
#[derive(Clone)]
pub struct KeySchedule {
    p: [u32; 18],
    s: [[u32; 256]; 4],
}

impl std::fmt::Debug for KeySchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("KeySchedule { .. }")
    }
}

impl KeySchedule {
    /// Standard key expansion for a 32 to 448-bit key.
    pub fn new(key: &[u8]) -> Result<Self> {
        if !(MIN_KEY_BYTES..=MAX_KEY_BYTES).contains(&key.len()) {
            return domain(format!(
                "key must be {MIN_KEY_BYTES} to {MAX_KEY_BYTES} bytes, got {}",
                key.len()
            ));
        }
        let mut ks = KeySchedule { p: P_INIT, s: S_INIT };
        let mut pos = 0;
        for p in ks.p.iter_mut() {
            let mut word = 0u32;
            for _ in 0..4 {
                word = (word << 8) | key[pos] as u32;
                pos = (pos + 1) % key.len();
            }
            *p ^= word;
        }
        let (mut l, mut r) = (0u32, 0u32);
        for i in (0..18).step_by(2) {
            (l, r) = ks.encrypt_halves(l, r);
            ks.p[i] = l;
            ks.p[i + 1] = r;
        }
        for b in 0..4 {
            for i in (0..256).step_by(2) {
                (l, r) = ks.encrypt_halves(l, r);
                ks.s[b][i] = l;
                ks.s[b][i + 1] = r;
            }
        }
        Ok(ks)
    }

    fn f(&self, x: u32) -> u32 {
        let [a, b, c, d] = x.to_be_bytes();
        (self.s[0][a as usize].wrapping_add(self.s[1][b as usize]) ^ self.s[2][c as usize])
            .wrapping_add(self.s[3][d as usize])
    }

    fn encrypt_halves(&self, mut l: u32, mut r: u32) -> (u32, u32) {
        for i in 0..16 {
            l ^= self.p[i];
            r ^= self.f(l);
            std::mem::swap(&mut l, &mut r);
        }
        std::mem::swap(&mut l, &mut r);
        r ^= self.p[16];
        l ^= self.p[17];
        (l, r)
    }

    fn decrypt_halves(&self, mut l: u32, mut r: u32) -> (u32, u32) {
        for i in (2..18).rev() {
            l ^= self.p[i];
            r ^= self.f(l);
            std::mem::swap(&mut l, &mut r);
        }
        std::mem::swap(&mut l, &mut r);
        r ^= self.p[1];
        l ^= self.p[0];
        (l, r)
    }

    pub fn encrypt_block(&self, x: u64) -> u64 {
        let (l, r) = self.encrypt_halves((x >> 32) as u32, x as u32);
        ((l as u64) << 32) | r as u64
    }

    pub fn decrypt_block(&self, y: u64) -> u64 {
        let (l, r) = self.decrypt_halves((y >> 32) as u32, y as u32);
        ((l as u64) << 32) | r as u64
    }
}

/// Block chaining mode for packet encryption.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Ecb,
    Cbc { iv: u64 },
}

fn blocks(bytes: &[u8]) -> impl Iterator<Item = u64> + '_ {
    bytes
        .chunks_exact(BLOCK_BYTES)
        .map(|c| u64::from_be_bytes(c.try_into().unwrap()))
}

/// Encrypts `bytes` blockwise without padding; the length must be a
/// multiple of 8.
pub fn encrypt_blocks(ks: &KeySchedule, bytes: &[u8], mode: Mode) -> Result<Vec<u8>> {
    if bytes.len() % BLOCK_BYTES != 0 {
        return domain("input is not a whole number of blocks");
    }
    let mut prev = match mode {
        Mode::Ecb => None,
        Mode::Cbc { iv } => Some(iv),
    };
    let mut out = Vec::with_capacity(bytes.len());
    for x in blocks(bytes) {
        let y = ks.encrypt_block(prev.map_or(x, |p| x ^ p));
        if prev.is_some() {
            prev = Some(y);
        }
        out.extend_from_slice(&y.to_be_bytes());
    }
    Ok(out)
}

pub fn decrypt_blocks(ks: &KeySchedule, bytes: &[u8], mode: Mode) -> Result<Vec<u8>> {
    if bytes.len() % BLOCK_BYTES != 0 {
        return format("ciphertext is not a whole number of blocks");
    }
    let mut prev = match mode {
        Mode::Ecb => None,
        Mode::Cbc { iv } => Some(iv),
    };
    let mut out = Vec::with_capacity(bytes.len());
    for y in blocks(bytes) {
        let x = ks.decrypt_block(y);
        let x = match prev.as_mut() {
            Some(p) => std::mem::replace(p, y) ^ x,
            None => x,
        };
        out.extend_from_slice(&x.to_be_bytes());
    }
    Ok(out)
}

/// Length of the ciphertext for a `len`-byte packet.
pub fn encrypted_len(len: usize) -> usize {
    (len + 4).div_ceil(BLOCK_BYTES) * BLOCK_BYTES
}

/// Prefixes the packet with its length (4 bytes, big endian), pads with
/// zeros to whole blocks and encrypts.
pub fn encrypt_packet(ks: &KeySchedule, packet: &[u8], mode: Mode) -> Result<Vec<u8>> {
    let len = u32::try_from(packet.len()).or_else(|_| domain("packet longer than 2^32 - 1 bytes"))?;
    let mut plain = Vec::with_capacity(encrypted_len(packet.len()));
    plain.extend_from_slice(&len.to_be_bytes());
    plain.extend_from_slice(packet);
    plain.resize(encrypted_len(packet.len()), 0);
    encrypt_blocks(ks, &plain, mode)
}

pub fn decrypt_packet(ks: &KeySchedule, ciphertext: &[u8], mode: Mode) -> Result<Vec<u8>> {
    if ciphertext.is_empty() {
        return format("empty ciphertext");
    }
    let plain = decrypt_blocks(ks, ciphertext, mode)?;
    let len = u32::from_be_bytes(plain[..4].try_into().unwrap()) as usize;
    if encrypted_len(len) != plain.len() {
        return format("length prefix does not match the ciphertext size");
    }
    if plain[4 + len..].iter().any(|&b| b != 0) {
        return format("non-zero padding");
    }
    Ok(plain[4..4 + len].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_key_vector() {
        let ks = KeySchedule::new(&[0; 8]).unwrap();
        assert_eq!(ks.encrypt_block(0), 0x4EF997456198DD78);
        assert_eq!(ks.decrypt_block(0x4EF997456198DD78), 0);
    }

    #[test]
    fn key_length_bounds() {
        assert!(KeySchedule::new(&[1; 3]).is_err());
        assert!(KeySchedule::new(&[1; 57]).is_err());
        assert!(KeySchedule::new(&[1; 4]).is_ok());
        assert!(KeySchedule::new(&[1; 56]).is_ok());
    }

    #[test]
    fn padding_arithmetic() {
        assert_eq!(encrypted_len(0), 8);
        assert_eq!(encrypted_len(4), 8);
        assert_eq!(encrypted_len(5), 16);
        let ks = KeySchedule::new(b"secret key").unwrap();
        for mode in [Mode::Ecb, Mode::Cbc { iv: 42 }] {
            for len in [0, 1, 4, 5, 12, 100] {
                let pkt: Vec<u8> = (0..len as u8).collect();
                let c = encrypt_packet(&ks, &pkt, mode).unwrap();
                assert_eq!(c.len(), encrypted_len(len));
                assert_eq!(decrypt_packet(&ks, &c, mode).unwrap(), pkt);
            }
        }
    }
}
