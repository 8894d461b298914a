mod common;

use common::PlruOracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splatcache_core::rcache::{CacheKey, InsertOutcome, RadianceCache, RcConfig, TreePlru};

#[test]
fn tree_plru_matches_oracle_on_random_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0;
    for ways in [2usize, 4, 8, 16] {
        for _ in 0..10_000 {
            let mut plru = TreePlru::new(1, ways);
            let mut oracle = PlruOracle::new(ways);
            for _ in 0..32 {
                let w = rng.random_range(0..ways);
                plru.touch(0, w);
                oracle.touch(w);
                if plru.victim(0) != oracle.victim() {
                    mismatches += 1;
                }
            }
        }
    }
    assert_eq!(mismatches, 0);
}

/// Whole-set behavior: hits, fills into the first free way, and PLRU evictions.
#[test]
fn cache_set_matches_oracle() {
    let cfg = RcConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trace in 0..2000 {
        let mut cache = RadianceCache::new(cfg).unwrap();
        let mut oracle = PlruOracle::new(cfg.ways);
        let mut lines: Vec<Option<u128>> = vec![None; cfg.ways];
        let set = trace % cfg.sets as u32;
        for _ in 0..40 {
            let key = CacheKey { set, tag: rng.random_range(0..7u128) };
            let expected_hit = lines.iter().position(|l| *l == Some(key.tag));
            let hit = cache.lookup_key(&key);
            assert_eq!(hit.is_some(), expected_hit.is_some());
            match expected_hit {
                Some(way) => oracle.touch(way),
                None => {
                    let outcome = cache.insert_key(&key, [1, 2, 3]);
                    let way = match lines.iter().position(Option::is_none) {
                        Some(free) => {
                            assert_eq!(outcome, InsertOutcome::Filled { way: free });
                            free
                        }
                        None => {
                            let v = oracle.victim();
                            assert_eq!(outcome, InsertOutcome::Evicted { way: v, old_tag: lines[v].unwrap() });
                            v
                        }
                    };
                    lines[way] = Some(key.tag);
                    oracle.touch(way);
                }
            }
        }
    }
}
