use super::RcConfig;
use crate::scene::{GaussianId, SENTINEL_ID};

/// Set index and tag for one lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub set: u32,
    pub tag: u128,
}

/// Builds the key from the first `k` significant IDs in depth order, padding
/// with [`SENTINEL_ID`] when fewer are given. The first ID lands in the most
/// significant field of both the index and the tag.
pub fn make_key(ids: &[GaussianId], cfg: &RcConfig) -> CacheKey {
    let index_mask = (1u64 << cfg.index_bits_per_id) - 1;
    let tag_mask = (1u128 << cfg.tag_bits_per_id) - 1;
    let mut set = 0u64;
    let mut tag = 0u128;
    for i in 0..cfg.k {
        let id = ids.get(i).copied().unwrap_or(SENTINEL_ID);
        set = (set << cfg.index_bits_per_id) | (id as u64 & index_mask);
        tag = (tag << cfg.tag_bits_per_id) | ((id >> cfg.tag_lsb) as u128 & tag_mask);
    }
    CacheKey { set: set as u32, tag }
}
