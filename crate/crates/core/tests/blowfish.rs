use blowfish::cipher::{BlockEncrypt, KeyInit};
use grouptrack::cipher::{decrypt_blocks, encrypt_blocks, encrypt_packet, decrypt_packet, KeySchedule, Mode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vectors() -> Vec<(Vec<u8>, u64, u64)> {
    include_str!("data/blowfish_vectors.txt")
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            let key = (0..f[0].len())
                .step_by(2)
                .map(|i| u8::from_str_radix(&f[0][i..i + 2], 16).unwrap())
                .collect();
            (key, u64::from_str_radix(f[1], 16).unwrap(), u64::from_str_radix(f[2], 16).unwrap())
        })
        .collect()
}

#[test]
fn published_vectors() {
    let v = vectors();
    assert_eq!(v.len(), 34);
    for (key, clear, cipher) in v {
        let ks = KeySchedule::new(&key).unwrap();
        assert_eq!(ks.encrypt_block(clear), cipher, "key {key:02x?}");
        assert_eq!(ks.decrypt_block(cipher), clear);
    }
}

#[test]
fn published_cbc_vector() {
    let key = hex("0123456789ABCDEFF0E1D2C3B4A59687");
    let mut plain = hex("37363534333231204E6F77206973207468652074696D6520666F722000");
    plain.resize(32, 0);
    let ks = KeySchedule::new(&key).unwrap();
    let mode = Mode::Cbc { iv: 0xFEDCBA9876543210 };
    let c = encrypt_blocks(&ks, &plain, mode).unwrap();
    assert_eq!(c, hex("6B77B4D63006DEE605B156E27403979358DEB9E7154616D959F1652BD5FF92CC"));
    assert_eq!(decrypt_blocks(&ks, &c, mode).unwrap(), plain);
}

fn hex(s: &str) -> Vec<u8> {
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
}

#[test]
fn roundtrip_for_standard_key_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for bits in [32, 64, 128, 448] {
        let key: Vec<u8> = (0..bits / 8).map(|_| rng.gen()).collect();
        let ks = KeySchedule::new(&key).unwrap();
        for _ in 0..10_000 {
            let x: u64 = rng.gen();
            assert_eq!(ks.decrypt_block(ks.encrypt_block(x)), x);
        }
    }
}

#[test]
fn wrong_key_does_not_decrypt() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = KeySchedule::new(b"right key").unwrap();
    let b = KeySchedule::new(b"wrong key").unwrap();
    let failures = (0..1000)
        .filter(|_| {
            let x: u64 = rng.gen();
            b.decrypt_block(a.encrypt_block(x)) != x
        })
        .count();
    assert_eq!(failures, 1000);
}

proptest! {
    #[test]
    fn agrees_with_an_independent_implementation(key in prop::collection::vec(any::<u8>(), 4..=56), x in any::<u64>()) {
        let ours = KeySchedule::new(&key).unwrap();
        let theirs: blowfish::Blowfish = blowfish::Blowfish::new_from_slice(&key).unwrap();
        let mut block = x.to_be_bytes().into();
        theirs.encrypt_block(&mut block);
        prop_assert_eq!(ours.encrypt_block(x), u64::from_be_bytes(block.into()));
    }

    #[test]
    fn distinct_blocks_stay_distinct(x in any::<u64>(), y in any::<u64>()) {
        prop_assume!(x != y);
        let ks = KeySchedule::new(b"permutation").unwrap();
        prop_assert_ne!(ks.encrypt_block(x), ks.encrypt_block(y));
    }

    #[test]
    fn packets_roundtrip(pkt in prop::collection::vec(any::<u8>(), 0..200), iv in any::<u64>()) {
        let ks = KeySchedule::new(b"packet key").unwrap();
        for mode in [Mode::Ecb, Mode::Cbc { iv }] {
            let c = encrypt_packet(&ks, &pkt, mode).unwrap();
            prop_assert_eq!(decrypt_packet(&ks, &c, mode).unwrap(), pkt.clone());
        }
    }
}
