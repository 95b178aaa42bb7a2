/// Lexicographically least sorted image of `subset` under `group`, where each
/// group element is an id map (as produced by `permutation_tables`).
pub fn orbit_representative(subset: &[u32], group: &[Vec<u32>]) -> Vec<u32> {
    let mut best: Vec<u32> = subset.to_vec();
    best.sort_unstable();
    let mut image = Vec::with_capacity(subset.len());
    for map in group {
        image.clear();
        image.extend(subset.iter().map(|&x| map[x as usize]));
        image.sort_unstable();
        if image < best {
            best.clone_from(&image);
        }
    }
    best
}

/// True iff the sorted `subset` is its own orbit representative.
pub(crate) fn is_canonical(subset: &[u32], group: &[Vec<u32>], scratch: &mut Vec<u32>) -> bool {
    for map in group {
        scratch.clear();
        scratch.extend(subset.iter().map(|&x| map[x as usize]));
        scratch.sort_unstable();
        if scratch.as_slice() < subset {
            return false;
        }
    }
    true
}

/// Size of the orbit of `subset` under `group`; the subset itself always counts.
pub fn orbit_size(subset: &[u32], group: &[Vec<u32>]) -> usize {
    let mut own = subset.to_vec();
    own.sort_unstable();
    let mut images: Vec<Vec<u32>> = group
        .iter()
        .map(|map| {
            let mut v: Vec<u32> = subset.iter().map(|&x| map[x as usize]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    images.push(own);
    images.sort_unstable();
    images.dedup();
    images.len()
}
