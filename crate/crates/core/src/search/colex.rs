//! Colexicographic ranking of sorted `k`-subsets of `0..n`.
//!
//! `c0 < c1 < .. < c(k-1)` has rank `sum C(ci, i+1)`; successive ranks are
//! successive subsets in colex order, so a cursor is just a rank.

/// `C(n, k)`, or `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of `k`-subsets of an `n`-set, or `None` on overflow.
pub fn subset_count(n: usize, k: usize) -> Option<u64> {
    binomial(n as u64, k as u64)
}

pub fn rank(subset: &[u32]) -> u64 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &c)| binomial(u64::from(c), i as u64 + 1).expect("rank fits when the count fits"))
        .sum()
}

/// Inverse of [`rank`]; `r` must be below `C(n, k)`.
pub fn unrank(mut r: u64, k: usize, n: usize) -> Vec<u32> {
    let mut out = vec![0u32; k];
    let mut hi = n as u64;
    for i in (0..k).rev() {
        let m = i as u64 + 1;
        // largest c < hi with C(c, m) <= r
        let (mut lo, mut top) = (i as u64, hi - 1);
        while lo < top {
            let mid = (lo + top).div_ceil(2);
            if binomial(mid, m).is_some_and(|b| b <= r) {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        out[i] = lo as u32;
        r -= binomial(lo, m).expect("bounded by the previous step");
        hi = lo;
    }
    out
}

/// Advances to the colex successor; returns false past the last subset.
pub fn next(subset: &mut [u32], n: usize) -> bool {
    let k = subset.len();
    for i in 0..k {
        let limit = if i + 1 < k { subset[i + 1] } else { n as u32 };
        if subset[i] + 1 < limit {
            subset[i] += 1;
            for (j, v) in subset[..i].iter_mut().enumerate() {
                *v = j as u32;
            }
            return true;
        }
    }
    false
}
