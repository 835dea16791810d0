//! The seeded generator behind every randomized choice in the crate.
//!
//! SplitMix64: the state advances by `0x9E3779B97F4A7C15`, and each output
//! is the state mixed by
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! with wrapping arithmetic. Derived draws:
//! * `below(m)` is `next_u64() % m`;
//! * `unit()` is `(next_u64() >> 11) / 2^53`, a float in `[0, 1)`;
//! * a field element is `from_index(below(q))`.

use crate::field::{FieldCtx, FieldElem};

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, m: u64) -> u64 {
        self.next_u64() % m
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn elem(&mut self, field: FieldCtx) -> FieldElem {
        field.from_index(self.below(field.order()))
    }

    pub fn vector(&mut self, field: FieldCtx, n: usize) -> Vec<FieldElem> {
        (0..n).map(|_| self.elem(field)).collect()
    }
}
