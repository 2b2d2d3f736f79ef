//! Small shared helpers: a stable hash for seed derivation and config
//! fingerprints. `DefaultHasher` is deliberately avoided because its output
//! may change between compiler releases; seeds derived here must be
//! reproducible across builds.

/// FNV-1a, 64 bit.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a child seed from a base seed and an arbitrary byte context.
pub(crate) fn derive_seed(base: u64, context: &[u8]) -> u64 {
    let mut buf = Vec::with_capacity(8 + context.len());
    buf.extend_from_slice(&base.to_le_bytes());
    buf.extend_from_slice(context);
    fnv1a64(&buf)
}

/// Derives a child seed from a base seed and two integer coordinates
/// (e.g. a time bin and a draw index, or a document hash and a sweep).
pub(crate) fn derive_seed2(base: u64, a: u64, b: u64) -> u64 {
    let mut buf = [0u8; 24];
    buf[..8].copy_from_slice(&base.to_le_bytes());
    buf[8..16].copy_from_slice(&a.to_le_bytes());
    buf[16..].copy_from_slice(&b.to_le_bytes());
    fnv1a64(&buf)
}
