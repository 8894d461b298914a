//! Tree pseudo-LRU: `ways - 1` bits per set arranged as a complete binary tree.
//!
//! Node `n` has children `2n + 1` and `2n + 2`. A clear bit means the victim
//! search goes left, a set bit means right. Touching a way flips every bit on
//! its root-to-leaf path to point away from it.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePlru {
    ways: usize,
    bits: Vec<u64>,
}

impl TreePlru {
    pub fn new(sets: usize, ways: usize) -> Self {
        assert!(ways.is_power_of_two() && ways <= 64, "tree PLRU needs a power-of-two way count");
        Self { ways, bits: vec![0; sets] }
    }

    pub fn touch(&mut self, set: usize, way: usize) {
        let state = &mut self.bits[set];
        let (mut node, mut lo, mut span) = (0usize, 0usize, self.ways);
        while span > 1 {
            span /= 2;
            let right = way >= lo + span;
            if right {
                // Accessed the right half: point the victim search left.
                *state &= !(1 << node);
                lo += span;
                node = 2 * node + 2;
            } else {
                *state |= 1 << node;
                node = 2 * node + 1;
            }
        }
    }

    pub fn victim(&self, set: usize) -> usize {
        let state = self.bits[set];
        let (mut node, mut lo, mut span) = (0usize, 0usize, self.ways);
        while span > 1 {
            span /= 2;
            if state & (1 << node) != 0 {
                lo += span;
                node = 2 * node + 2;
            } else {
                node = 2 * node + 1;
            }
        }
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_way_classic_sequence() {
        let mut p = TreePlru::new(1, 4);
        assert_eq!(p.victim(0), 0);
        for w in 0..4 {
            p.touch(0, w);
        }
        // After touching 0,1,2,3 in order, way 0 is the pseudo-LRU.
        assert_eq!(p.victim(0), 0);
        p.touch(0, 0);
        assert_eq!(p.victim(0), 2);
    }

    #[test]
    fn never_evicts_last_touched() {
        let mut p = TreePlru::new(1, 8);
        for i in 0..200usize {
            let w = (i * 7 + 3) % 8;
            p.touch(0, w);
            assert_ne!(p.victim(0), w);
        }
    }

    #[test]
    fn single_way() {
        let mut p = TreePlru::new(2, 1);
        p.touch(1, 0);
        assert_eq!(p.victim(1), 0);
    }
}
