//! Erlang-B blocking probability of an `n`-server loss system.
//!
//! The production path is the recurrence
//! `B(0) = 1`, `B(i) = a·B(i-1) / (i + a·B(i-1))`, which is stable for any `n`.
//! [`erlang_b_direct`] evaluates the defining ratio of truncated exponential
//! sums in log space and exists as an independent cross-check.

use crate::error::{Error, Result};

/// Offered traffic in erlangs (`λ/μ`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OfferedLoad(f64);

impl OfferedLoad {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a >= 0.0 {
            Ok(Self(a))
        } else {
            Err(Error::InvalidLoad(a))
        }
    }

    pub fn from_rates(lambda: f64, mu: f64) -> Result<Self> {
        Self::new(lambda / mu)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Probability that an arrival finds all `n` servers busy.
pub fn erlang_b(a: OfferedLoad, n: u64) -> f64 {
    let a = a.0;
    if n == 0 {
        return 1.0;
    }
    if a == 0.0 {
        return 0.0;
    }
    let mut b = 1.0;
    for i in 1..=n {
        let ab = a * b;
        b = ab / (i as f64 + ab);
    }
    b
}

/// `(a^n/n!) / Σ_{i=0..n} a^i/i!`, summed in log space so any `n` works.
pub fn erlang_b_direct(a: OfferedLoad, n: u64) -> f64 {
    let a = a.0;
    if n == 0 {
        return 1.0;
    }
    if a == 0.0 {
        return 0.0;
    }
    let ln_a = a.ln();
    // log of a^i / i!
    let mut log_terms = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    log_terms.push(0.0);
    for i in 1..=n {
        acc += ln_a - (i as f64).ln();
        log_terms.push(acc);
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = log_terms.iter().map(|&l| (l - peak).exp()).sum();
    (log_terms[n as usize] - peak).exp() / denom
}

/// Probability that an arrival is admitted, `1 - B(n, a)`.
pub fn served_prob(a: OfferedLoad, n: u64) -> f64 {
    1.0 - erlang_b(a, n)
}

/// Running recurrence state for one SP, advanced one server at a time.
///
/// Holds `B(n, a)` so the next blocking value and the marginal served
/// probability are O(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangState {
    a: f64,
    n: u64,
    blocking: f64,
}

impl ErlangState {
    pub fn new(a: OfferedLoad) -> Self {
        Self {
            a: a.0,
            n: 0,
            blocking: 1.0,
        }
    }

    pub fn at(a: OfferedLoad, n: u64) -> Self {
        Self {
            a: a.0,
            n,
            blocking: erlang_b(a, n),
        }
    }

    pub fn servers(&self) -> u64 {
        self.n
    }

    pub fn blocking(&self) -> f64 {
        self.blocking
    }

    pub fn next_blocking(&self) -> f64 {
        let ab = self.a * self.blocking;
        if ab == 0.0 {
            0.0
        } else {
            ab / ((self.n + 1) as f64 + ab)
        }
    }

    /// `B(n) - B(n+1)`, the served-probability gain of one more server,
    /// computed as `B·(n+1 - a·(1-B)) / (n+1 + a·B)` so no two nearly equal
    /// probabilities are subtracted. `a·(1-B)` is the mean number of busy
    /// servers, hence below `n+1`.
    pub fn served_gain(&self) -> f64 {
        let m = (self.n + 1) as f64;
        let busy = self.a * (1.0 - self.blocking);
        (self.blocking * (m - busy) / (m + self.a * self.blocking)).max(0.0)
    }

    pub fn advance(&mut self) {
        self.blocking = self.next_blocking();
        self.n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(a: f64) -> OfferedLoad {
        OfferedLoad::new(a).unwrap()
    }

    fn rel_close(x: f64, y: f64, tol: f64) -> bool {
        let scale = x.abs().max(y.abs());
        scale < f64::MIN_POSITIVE || (x - y).abs() <= tol * scale
    }

    #[test]
    fn erlang_b_examples() {
        assert_eq!(erlang_b(load(3.7), 0), 1.0);
        assert_eq!(erlang_b(load(0.0), 0), 1.0);
        assert_eq!(erlang_b(load(0.0), 1), 0.0);
        assert!((erlang_b(load(2.0), 2) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn direct_examples() {
        assert!((erlang_b_direct(load(0.5), 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((erlang_b_direct(load(2.0), 2) - 0.4).abs() < 1e-15);
        let rec = erlang_b(load(20.0), 24);
        assert!(rel_close(erlang_b_direct(load(20.0), 24), rec, 1e-10));
    }

    #[test]
    fn served_prob_examples() {
        assert_eq!(served_prob(load(5.0), 0), 0.0);
        assert!((served_prob(load(2.0), 2) - 0.6).abs() < 1e-15);
        assert!((served_prob(load(1e-12), 1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_load_rejected() {
        assert!(matches!(OfferedLoad::new(-1.0), Err(Error::InvalidLoad(_))));
        assert!(OfferedLoad::new(f64::NAN).is_err());
        assert!(OfferedLoad::new(f64::INFINITY).is_err());
    }

    #[test]
    fn recurrence_matches_direct_over_range() {
        for &a in &[0.5, 2.0, 16.0, 20.0, 100.0] {
            for n in 0..=500u64 {
                let r = erlang_b(load(a), n);
                let d = erlang_b_direct(load(a), n);
                assert!(rel_close(r, d, 1e-10), "a={a} n={n}: {r} vs {d}");
            }
        }
    }

    #[test]
    fn beyond_factorial_overflow() {
        // 171! overflows a double; both paths must still be finite and agree.
        let r = erlang_b(load(150.0), 400);
        let d = erlang_b_direct(load(150.0), 400);
        assert!(r.is_finite() && r > 0.0);
        assert!(rel_close(r, d, 1e-10));
    }

    #[test]
    fn state_tracks_recurrence() {
        let a = load(7.5);
        let mut s = ErlangState::new(a);
        for n in 0..60 {
            assert_eq!(s.servers(), n);
            assert_eq!(s.blocking(), erlang_b(a, n));
            let gain = s.served_gain();
            let expected = erlang_b(a, n) - erlang_b(a, n + 1);
            assert!((gain - expected).abs() <= 1e-15 + 1e-12 * expected);
            s.advance();
        }
        assert_eq!(ErlangState::at(a, 60).blocking(), s.blocking());
    }

    #[test]
    fn zero_load_state() {
        let mut s = ErlangState::new(load(0.0));
        assert_eq!(s.served_gain(), 1.0);
        s.advance();
        assert_eq!(s.blocking(), 0.0);
        assert_eq!(s.served_gain(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounded_and_monotone(a in 0.01f64..200.0, n in 0u64..300) {
                let b = erlang_b(load(a), n);
                let b1 = erlang_b(load(a), n + 1);
                prop_assert!((0.0..=1.0).contains(&b));
                if b1 > 0.0 {
                    prop_assert!(b1 < b);
                }
                if n >= 1 {
                    let heavier = erlang_b(load(a * 1.1), n);
                    if b > f64::MIN_POSITIVE {
                        prop_assert!(heavier > b);
                    }
                }
            }

            #[test]
            fn served_gains_are_concave(a in 0.01f64..100.0, n in 0u64..300) {
                let s = ErlangState::at(load(a), n);
                let mut t = s;
                t.advance();
                prop_assert!(s.served_gain() >= 0.0);
                prop_assert!(t.served_gain() <= s.served_gain());
            }
        }
    }
}
