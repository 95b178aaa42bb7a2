//! Word-level helpers on square bit matrices stored one `u64` per row.
//!
//! Row `i`, bit `j` set means the pair `(x_i, x_j)` is in the relation. All
//! functions assume `rows.len() <= 64`.

#[inline]
pub fn bit(j: usize) -> u64 {
    1u64 << j
}

/// Mask with the low `n` bits set.
#[inline]
pub fn full_row(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Row-bitset Warshall: for every pivot `k`, each row containing `k` absorbs row `k`.
pub fn transitive_close(rows: &mut [u64]) {
    let n = rows.len();
    for k in 0..n {
        let pivot = rows[k];
        let m = bit(k);
        for row in rows.iter_mut() {
            if *row & m != 0 {
                *row |= pivot;
            }
        }
    }
}

pub fn set_diagonal(rows: &mut [u64]) {
    for (i, row) in rows.iter_mut().enumerate() {
        *row |= bit(i);
    }
}

pub fn meet_into(a: &[u64], b: &[u64], out: &mut [u64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x & y;
    }
}

/// Least transitive relation containing `a | b`. Reflexivity is inherited from the inputs.
pub fn join_into(a: &[u64], b: &[u64], out: &mut [u64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x | y;
    }
    if out != a && out != b {
        transitive_close(out);
    }
}

/// Adds the single pair `(x, y)` to a transitive relation and keeps it transitive.
pub fn add_pair_transitive(rows: &mut [u64], x: usize, y: usize) {
    let target = rows[y];
    let m = bit(x);
    for row in rows.iter_mut() {
        if *row & m != 0 {
            *row |= target;
        }
    }
}

pub fn is_transitive(rows: &[u64]) -> bool {
    rows.iter().all(|&row| {
        let mut rest = row;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if rows[j] & !row != 0 {
                return false;
            }
        }
        true
    })
}

pub fn is_reflexive(rows: &[u64]) -> bool {
    rows.iter().enumerate().all(|(i, row)| row & bit(i) != 0)
}

pub fn transpose(rows: &[u64]) -> Vec<u64> {
    let n = rows.len();
    let mut out = vec![0u64; n];
    for (i, &row) in rows.iter().enumerate() {
        let mut rest = row;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out[j] |= bit(i);
        }
    }
    out
}

pub fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Iterates the set bit positions of a word in increasing order.
pub fn ones(word: u64) -> impl Iterator<Item = usize> {
    let mut rest = word;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(j)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warshall_chains() {
        // 0 -> 1 -> 2 -> 3
        let mut rows = vec![0b0011, 0b0110, 0b1100, 0b1000];
        transitive_close(&mut rows);
        assert_eq!(rows, vec![0b1111, 0b1110, 0b1100, 0b1000]);
    }

    #[test]
    fn add_pair_matches_full_closure() {
        let base = vec![0b001, 0b110, 0b100];
        let mut fast = base.clone();
        add_pair_transitive(&mut fast, 0, 1);
        let mut slow = base.clone();
        slow[0] |= bit(1);
        transitive_close(&mut slow);
        assert_eq!(fast, slow);
    }

    #[test]
    fn full_row_edges() {
        assert_eq!(full_row(64), u64::MAX);
        assert_eq!(full_row(3), 0b111);
    }
}
