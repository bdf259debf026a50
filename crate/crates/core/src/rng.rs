//! SplitMix64 generator used for synthetic swap prices.
//!
//! The scheme is fixed so that swap sets reproduce across implementations:
//!
//! * state `s` (u64, initialised to the seed); each step does
//!   `s += 0x9E3779B97F4A7C15`, then `z = s`,
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, output `z ^ (z >> 31)`
//!   (all arithmetic wrapping).
//! * a uniform integer in `[lo, hi]` draws `w = ceil(bits(span) / 64)` outputs,
//!   concatenates them most-significant first, keeps the low `bits(span)` bits
//!   and rejects values `>= span`, where `span = hi - lo + 1`.

use num_bigint::BigUint;

#[derive(Debug, Clone)]
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

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn uniform_biguint_inclusive(&mut self, lo: &BigUint, hi: &BigUint) -> BigUint {
        assert!(lo <= hi, "empty range");
        let span = hi - lo + 1u8;
        let bits = span.bits();
        let words = bits.div_ceil(64) as usize;
        let mask = (BigUint::from(1u8) << bits) - 1u8;
        loop {
            let mut v = BigUint::default();
            for _ in 0..words {
                v = (v << 64usize) + self.next_u64();
            }
            v &= &mask;
            if v < span {
                return lo + v;
            }
        }
    }
}
