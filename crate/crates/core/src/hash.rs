//! MurmurHash3 (x86, 32-bit) and the bucketing built on it.
//!
//! Hash indices must be bit-identical across backends and platforms, so the
//! hash is fixed here rather than taken from `std::hash`.

/// Seed for single-hash bucketing; bloom encoding uses `HASH_SEED + i`.
pub const HASH_SEED: u32 = 42;

const C1: u32 = 0xcc9e_2d51;
const C2: u32 = 0x1b87_3593;

#[inline]
fn mix_k1(mut k1: u32) -> u32 {
    k1 = k1.wrapping_mul(C1);
    k1 = k1.rotate_left(15);
    k1.wrapping_mul(C2)
}

#[inline]
fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^ (h >> 16)
}

pub fn murmur3_32(key: &[u8], seed: u32) -> u32 {
    let mut h1 = seed;
    let mut blocks = key.chunks_exact(4);
    for block in &mut blocks {
        let k1 = u32::from_le_bytes([block[0], block[1], block[2], block[3]]);
        h1 ^= mix_k1(k1);
        h1 = h1.rotate_left(13);
        h1 = h1.wrapping_mul(5).wrapping_add(0xe654_6b64);
    }

    let tail = blocks.remainder();
    let mut k1 = 0u32;
    if tail.len() >= 3 {
        k1 ^= u32::from(tail[2]) << 16;
    }
    if tail.len() >= 2 {
        k1 ^= u32::from(tail[1]) << 8;
    }
    if let Some(&b) = tail.first() {
        k1 ^= u32::from(b);
        h1 ^= mix_k1(k1);
    }

    h1 ^= key.len() as u32;
    fmix32(h1)
}

/// `floorMod(signed_hash, modulus)` where the hash is read as a signed
/// 32-bit integer.
#[inline]
pub fn bucket(key: &str, seed: u32, modulus: u32) -> u32 {
    debug_assert!(modulus >= 1);
    let signed = murmur3_32(key.as_bytes(), seed) as i32;
    i64::from(signed).rem_euclid(i64::from(modulus)) as u32
}

/// Hash index in `[1, num_bins]`, or 0 for the mask token.
pub fn hash_index(key: &str, num_bins: u32, mask_token: Option<&str>) -> i64 {
    if mask_token == Some(key) {
        return 0;
    }
    1 + i64::from(bucket(key, HASH_SEED, num_bins))
}

/// `num_hashes` hash indices in `[1, num_bins]` using seeds 42, 43, ...
pub fn bloom_indices(key: &str, num_bins: u32, num_hashes: u32) -> impl Iterator<Item = i64> + '_ {
    (0..num_hashes).map(move |i| 1 + i64::from(bucket(key, HASH_SEED + i, num_bins)))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scikit-learn's `murmurhash3_32(key, seed=42)`
    // (signed output), pinned once.
    const GOLDEN_SEED_42: &[(&str, i32)] = &[
        ("", 142593372),
        ("a", -1293573533),
        ("ab", -684913081),
        ("abc", 1313807976),
        ("abcd", -396302900),
        ("abcde", -1361433616),
        ("42", 1797003644),
        ("hello", -488910111),
        ("hotel_123", 1978701947),
        ("PADDED", -1894736),
        ("Action", 101989460),
        ("café", 1312538061),
        ("日本語", -976822600),
        ("The quick brown fox jumps over the lazy dog", 880582914),
    ];

    #[test]
    fn golden_vectors_seed_42() {
        for (key, expected) in GOLDEN_SEED_42 {
            assert_eq!(murmur3_32(key.as_bytes(), 42) as i32, *expected, "{key:?}");
        }
    }

    #[test]
    fn golden_vectors_seed_0() {
        assert_eq!(murmur3_32(b"", 0), 0);
        assert_eq!(murmur3_32(b"hello", 0), 613153351);
        assert_eq!(murmur3_32(b"a", 0), 1009084850);
        assert_eq!(murmur3_32(b"abcd", 0), 1139631978);
    }

    #[test]
    fn hash_index_examples() {
        assert_eq!(hash_index("PADDED", 10000, Some("PADDED")), 0);
        // 1 + floorMod(1797003644, 10000)
        assert_eq!(hash_index("42", 10000, None), 3645);
        // floorMod of a negative hash stays in range: -488910111 mod 10 == 9.
        assert_eq!(hash_index("hello", 10, None), 10);
        for key in ["", "x", "PADDED", "日本語"] {
            assert_eq!(hash_index(key, 1, None), 1);
        }
    }

    #[test]
    fn bloom_examples() {
        let got: Vec<i64> = bloom_indices("hotel_123", 4096, 3).collect();
        assert_eq!(got, vec![2172, 507, 2304]);
        assert_eq!(bloom_indices("a", 1, 5).collect::<Vec<_>>(), vec![1; 5]);
        for key in ["a", "b", "hotel_123", ""] {
            assert_eq!(
                bloom_indices(key, 777, 1).next().unwrap(),
                hash_index(key, 777, None)
            );
        }
    }
}
