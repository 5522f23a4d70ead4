//! Standard normal CDF and its inverse.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Φ(x), evaluated through the complementary error function so that the
/// lower tail keeps full relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

const CACHE_LIMIT: usize = 1024;

thread_local! {
    static CACHE: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
}

/// Φ⁻¹(p) by bisection on [`normal_cdf`]. Runs until the bracket stops
/// shrinking, so the result is exact to the last bit the CDF resolves.
/// Results are memoized per thread.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::QuantileDomain(p));
    }
    if let Some(q) = CACHE.with(|c| c.borrow().get(&p.to_bits()).copied()) {
        return Ok(q);
    }
    let q = bisect_quantile(p);
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(p.to_bits(), q);
    });
    Ok(q)
}

fn bisect_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever bracket end lands closer in probability.
    let (elo, ehi) = ((normal_cdf(lo) - p).abs(), (normal_cdf(hi) - p).abs());
    if elo <= ehi {
        lo
    } else {
        hi
    }
}
