use nalgebra::Vector3;

use super::{make_key, CacheKey, RcConfig, TreePlru};
use crate::pipeline::quantize;
use crate::scene::GaussianId;
use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheCounters {
    pub lookups: u64,
    pub hits: u64,
    pub misses: u64,
    pub inserts: u64,
    pub evictions: u64,
}

impl std::ops::AddAssign for CacheCounters {
    fn add_assign(&mut self, o: Self) {
        self.lookups += o.lookups;
        self.hits += o.hits;
        self.misses += o.misses;
        self.inserts += o.inserts;
        self.evictions += o.evictions;
    }
}

/// What the rasterizer needs from a radiance cache.
pub trait PixelCache {
    /// Number of leading significant IDs forming a key.
    fn k(&self) -> usize;
    fn lookup(&mut self, ids: &[GaussianId]) -> Option<Vector3<f64>>;
    fn insert(&mut self, ids: &[GaussianId], rgb: &Vector3<f64>);
    fn counters(&self) -> CacheCounters {
        CacheCounters::default()
    }
    /// Insert-only mode: rays skip the lookup and only populate.
    fn populate_only(&self) -> bool {
        false
    }
    /// Whether rays with fewer than `k` significant Gaussians are stored.
    fn stores_short_rays(&self) -> bool {
        true
    }
}

/// Wraps a cache so a frame fills it without querying it.
pub struct PopulateOnly<'a>(pub &'a mut dyn PixelCache);

impl PixelCache for PopulateOnly<'_> {
    fn k(&self) -> usize {
        self.0.k()
    }

    fn lookup(&mut self, _ids: &[GaussianId]) -> Option<Vector3<f64>> {
        None
    }

    fn insert(&mut self, ids: &[GaussianId], rgb: &Vector3<f64>) {
        self.0.insert(ids, rgb)
    }

    fn counters(&self) -> CacheCounters {
        self.0.counters()
    }

    fn populate_only(&self) -> bool {
        true
    }

    fn stores_short_rays(&self) -> bool {
        self.0.stores_short_rays()
    }
}

/// A cache that never hits; rasterizing through it reproduces the baseline.
#[derive(Clone, Debug)]
pub struct AlwaysMiss {
    pub k: usize,
    counters: CacheCounters,
}

impl AlwaysMiss {
    pub fn new(k: usize) -> Self {
        Self { k, counters: CacheCounters::default() }
    }
}

impl PixelCache for AlwaysMiss {
    fn k(&self) -> usize {
        self.k
    }

    fn lookup(&mut self, _ids: &[GaussianId]) -> Option<Vector3<f64>> {
        self.counters.lookups += 1;
        self.counters.misses += 1;
        None
    }

    fn insert(&mut self, _ids: &[GaussianId], _rgb: &Vector3<f64>) {
        self.counters.inserts += 1;
    }

    fn counters(&self) -> CacheCounters {
        self.counters
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Line {
    valid: bool,
    tag: u128,
    rgb: [u8; 3],
}

/// Set-associative radiance cache with tree-PLRU replacement and 8-bit values.
#[derive(Clone, Debug)]
pub struct RadianceCache {
    cfg: RcConfig,
    lines: Vec<Line>,
    plru: TreePlru,
    counters: CacheCounters,
}

/// Outcome of [`RadianceCache::insert_key`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Updated { way: usize },
    Filled { way: usize },
    Evicted { way: usize, old_tag: u128 },
}

impl RadianceCache {
    pub fn new(cfg: RcConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            lines: vec![Line::default(); cfg.sets * cfg.ways],
            plru: TreePlru::new(cfg.sets, cfg.ways),
            cfg,
            counters: CacheCounters::default(),
        })
    }

    pub fn config(&self) -> &RcConfig {
        &self.cfg
    }

    fn set_lines(&self, set: u32) -> &[Line] {
        let base = set as usize * self.cfg.ways;
        &self.lines[base..base + self.cfg.ways]
    }

    fn find(&self, key: &CacheKey) -> Option<usize> {
        self.set_lines(key.set).iter().position(|l| l.valid && l.tag == key.tag)
    }

    pub fn lookup_key(&mut self, key: &CacheKey) -> Option<[u8; 3]> {
        self.counters.lookups += 1;
        match self.find(key) {
            Some(way) => {
                self.counters.hits += 1;
                self.plru.touch(key.set as usize, way);
                Some(self.set_lines(key.set)[way].rgb)
            }
            None => {
                self.counters.misses += 1;
                None
            }
        }
    }

    pub fn insert_key(&mut self, key: &CacheKey, rgb: [u8; 3]) -> InsertOutcome {
        self.counters.inserts += 1;
        let set = key.set as usize;
        let lines = self.set_lines(key.set);
        let outcome = if let Some(way) = self.find(key) {
            InsertOutcome::Updated { way }
        } else if let Some(way) = lines.iter().position(|l| !l.valid) {
            InsertOutcome::Filled { way }
        } else {
            let way = self.plru.victim(set);
            InsertOutcome::Evicted { way, old_tag: lines[way].tag }
        };
        if matches!(outcome, InsertOutcome::Evicted { .. }) {
            self.counters.evictions += 1;
        }
        let way = match outcome {
            InsertOutcome::Updated { way } | InsertOutcome::Filled { way } | InsertOutcome::Evicted { way, .. } => way,
        };
        self.lines[set * self.cfg.ways + way] = Line { valid: true, tag: key.tag, rgb };
        self.plru.touch(set, way);
        outcome
    }

    /// Number of valid entries.
    pub fn occupancy(&self) -> usize {
        self.lines.iter().filter(|l| l.valid).count()
    }
}

impl PixelCache for RadianceCache {
    fn k(&self) -> usize {
        self.cfg.k
    }

    fn lookup(&mut self, ids: &[GaussianId]) -> Option<Vector3<f64>> {
        let key = make_key(ids, &self.cfg);
        self.lookup_key(&key).map(|c| Vector3::new(c[0] as f64, c[1] as f64, c[2] as f64) / 255.0)
    }

    fn insert(&mut self, ids: &[GaussianId], rgb: &Vector3<f64>) {
        let key = make_key(ids, &self.cfg);
        self.insert_key(&key, [quantize(rgb.x), quantize(rgb.y), quantize(rgb.z)]);
    }

    fn counters(&self) -> CacheCounters {
        self.counters
    }

    fn stores_short_rays(&self) -> bool {
        self.cfg.insert_short_rays
    }
}
