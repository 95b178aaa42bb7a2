use std::fmt::{self, Write};
use std::sync::Arc;

use super::{bits, GroundSet, RelError, Relation};

/// A partition of the ground set into disjoint nonempty blocks.
///
/// Blocks are kept sorted internally and ordered by their least element, so
/// two partitions are equal iff their block lists are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    ground: Arc<GroundSet>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub(crate) fn from_equivalence_rows(ground: &Arc<GroundSet>, rows: &[u64]) -> Self {
        let mut assigned = 0u64;
        let mut blocks = Vec::new();
        for (i, &row) in rows.iter().enumerate() {
            if assigned & bits::bit(i) != 0 {
                continue;
            }
            assigned |= row;
            blocks.push(bits::ones(row).collect());
        }
        Partition { ground: ground.clone(), blocks }
    }

    /// Builds a partition from (possibly partial) blocks; elements not mentioned
    /// become singletons.
    pub fn from_blocks(ground: &Arc<GroundSet>, blocks: &[Vec<usize>]) -> Result<Self, RelError> {
        let n = ground.size();
        let mut seen = 0u64;
        let mut rows = vec![0u64; n];
        for block in blocks {
            let mut mask = 0u64;
            for &x in block {
                if x >= n {
                    return Err(RelError::IndexOutOfRange(x));
                }
                if seen & bits::bit(x) != 0 {
                    return Err(RelError::DuplicateLabel(ground.label(x).to_string()));
                }
                seen |= bits::bit(x);
                mask |= bits::bit(x);
            }
            for x in bits::ones(mask) {
                rows[x] = mask;
            }
        }
        bits::set_diagonal(&mut rows);
        Ok(Self::from_equivalence_rows(ground, &rows))
    }

    pub fn from_labeled_blocks<S: AsRef<str>>(ground: &Arc<GroundSet>, blocks: &[Vec<S>]) -> Result<Self, RelError> {
        let idx = blocks
            .iter()
            .map(|b| b.iter().map(|l| ground.index_of(l.as_ref())).collect())
            .collect::<Result<Vec<Vec<usize>>, _>>()?;
        Self::from_blocks(ground, &idx)
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn non_singleton_blocks(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks.iter().filter(|b| b.len() > 1)
    }

    pub fn block_of(&self, x: usize) -> Option<&[usize]> {
        self.blocks.iter().find(|b| b.contains(&x)).map(Vec::as_slice)
    }

    pub fn to_equivalence(&self) -> Relation {
        let mut rows = vec![0u64; self.ground.size()];
        for block in &self.blocks {
            let mask = block.iter().fold(0u64, |m, &x| m | bits::bit(x));
            for &x in block {
                rows[x] = mask;
            }
        }
        Relation::from_rows_unchecked(&self.ground, rows.into())
    }

    pub(crate) fn format_block(&self, block: &[usize], open: char, sep: &str, close: char) -> String {
        let labels: Vec<&str> = block.iter().map(|&x| self.ground.label(x)).collect();
        format!("{open}{}{close}", labels.join(sep))
    }

    /// Non-singleton blocks as `{a b} {c d e}`; the form used in certificates.
    pub fn display_nontrivial(&self) -> String {
        let parts: Vec<String> = self.non_singleton_blocks().map(|b| self.format_block(b, '{', " ", '}')).collect();
        parts.join(" ")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| self.format_block(b, '{', " ", '}')).collect();
        f.write_str(&parts.join(" "))
    }
}

/// The poset of `Θ(ρ)`-blocks ordered by `ρ`, with isolated singletons hidden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPoset {
    partition: Partition,
    // above[i]: blocks strictly above block i
    above: Vec<u64>,
    hidden: Vec<bool>,
}

impl BlockPoset {
    pub(crate) fn from_quasiorder(r: &Relation, partition: Partition) -> Self {
        let blocks = partition.blocks();
        let reps: Vec<usize> = blocks.iter().map(|b| b[0]).collect();
        let n = r.size();
        let mut above = vec![0u64; blocks.len()];
        for (i, &x) in reps.iter().enumerate() {
            for (j, &y) in reps.iter().enumerate() {
                if i != j && r.contains(x, y) {
                    above[i] |= bits::bit(j);
                }
            }
        }
        let inv = r.inverse();
        let hidden = blocks
            .iter()
            .map(|b| {
                b.len() == 1 && {
                    let x = b[0];
                    r.rows()[x] == bits::bit(x) && inv.rows()[x] == bits::bit(x)
                }
            })
            .collect();
        debug_assert!(n == 0 || !above.is_empty());
        BlockPoset { partition, above, hidden }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        self.partition.blocks()
    }

    pub fn is_hidden(&self, block: usize) -> bool {
        self.hidden[block]
    }

    pub fn visible(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.hidden.len()).filter(|&i| !self.hidden[i])
    }

    pub fn less(&self, i: usize, j: usize) -> bool {
        self.above[i] & bits::bit(j) != 0
    }

    /// Strict order pairs `(lower, upper)`.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        self.above.iter().enumerate().flat_map(|(i, &up)| bits::ones(up).map(move |j| (i, j))).collect()
    }

    /// Covering pairs `(lower, upper)` of the Hasse diagram.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        self.order_pairs()
            .into_iter()
            .filter(|&(i, j)| bits::ones(self.above[i]).all(|k| k == j || !self.less(k, j)))
            .collect()
    }

    /// Covering pairs as label sets, for comparison with literals.
    pub fn cover_blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let blocks = self.blocks();
        let mut out: Vec<_> = self.covers().into_iter().map(|(i, j)| (blocks[i].clone(), blocks[j].clone())).collect();
        out.sort();
        out
    }

    fn block_label(&self, i: usize) -> String {
        self.partition.format_block(&self.blocks()[i], '[', ",", ']')
    }

    /// Text diagram: the visible blocks on one line, then one `lower < upper` line per cover.
    pub fn diagram_text(&self) -> String {
        let mut out = String::new();
        let visible: Vec<String> = self.visible().map(|i| self.block_label(i)).collect();
        out.push_str(&visible.join(" "));
        for (i, j) in self.covers() {
            write!(out, "\n{} < {}", self.block_label(i), self.block_label(j)).unwrap();
        }
        out
    }

    /// Graphviz digraph of the Hasse diagram; edges point from lower to upper blocks.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{}\" {{\n", name.replace('"', "\\\""));
        out.push_str("    node [shape=box];\n");
        for i in self.visible() {
            let labels: Vec<&str> = self.blocks()[i].iter().map(|&x| self.partition.ground().label(x)).collect();
            writeln!(out, "    b{i} [label=\"{}\"];", labels.join(",")).unwrap();
        }
        for (i, j) in self.covers() {
            writeln!(out, "    b{i} -> b{j};").unwrap();
        }
        out.push_str("}\n");
        out
    }
}
