//! Stable 64-bit hashing used for mock noise keying and record checksums.
//! FNV-1a, hand-rolled: std's `DefaultHasher` is not guaranteed stable
//! across releases or platforms, and determinism here is load-bearing.

pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        // separator so ("ab","c") != ("a","bc")
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
