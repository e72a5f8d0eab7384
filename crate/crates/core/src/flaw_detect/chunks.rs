//! Chunks: changed lines grouped by shared control block or shared
//! variables.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::code_model::{annotate_lines, StatementFacts};
use crate::diff::{LineDiff, Side};
use crate::union_find::DisjointSet;

/// A control structure located in one of the two texts of a diff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockRef {
    pub side: Side,
    pub header_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkLine {
    pub side: Side,
    pub text: String,
    #[serde(skip)]
    pub facts: StatementFacts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub id: usize,
    pub lines: Vec<ChunkLine>,
    pub variables: BTreeSet<String>,
    pub operations: Vec<String>,
    /// Shared by every line, if they all sit in one control block.
    pub control_block_id: Option<BlockRef>,
}

impl Chunk {
    fn ops_on(&self, side: Side) -> Vec<String> {
        self.lines
            .iter()
            .filter(|l| l.side == side)
            .flat_map(|l| l.facts.operations.iter().map(|o| o.text.clone()))
            .collect()
    }

    pub fn added_ops(&self) -> Vec<String> {
        self.ops_on(Side::Added)
    }

    pub fn deleted_ops(&self) -> Vec<String> {
        self.ops_on(Side::Deleted)
    }
}

/// A changed line with its facts, before grouping.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub side: Side,
    pub text: String,
    pub facts: StatementFacts,
    pub block: Option<BlockRef>,
}

pub(crate) fn nodes(diff: &LineDiff, old: &[&str], new: &[&str]) -> Vec<Node> {
    let (old_facts, new_facts) = (annotate_lines(old), annotate_lines(new));
    diff.lines()
        .filter_map(|l| {
            let facts = match l.side {
                Side::Deleted => old_facts.get(l.index)?,
                Side::Added => new_facts.get(l.index)?,
            };
            if facts.variables.is_empty() && facts.operations.is_empty() {
                return None;
            }
            let block = facts.control_block_id.map(|header_line| BlockRef { side: l.side, header_line });
            Some(Node { side: l.side, text: l.text.clone(), facts: facts.clone(), block })
        })
        .collect()
}

/// The two merge relations: same control block at the same depth, or a
/// shared variable.
pub(crate) fn related(a: &Node, b: &Node) -> bool {
    let same_block = a.block.is_some() && a.block == b.block && a.facts.control_depth == b.facts.control_depth;
    same_block || !a.facts.variables.is_disjoint(&b.facts.variables)
}

pub(crate) fn group(nodes: Vec<Node>) -> Vec<Chunk> {
    let mut ds = DisjointSet::new(nodes.len());
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if related(&nodes[i], &nodes[j]) {
                ds.union(i, j);
            }
        }
    }
    ds.groups()
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let mut variables = BTreeSet::new();
            let mut operations = Vec::new();
            let first_block = nodes[members[0]].block;
            let mut shared_block = first_block;
            let mut lines = Vec::with_capacity(members.len());
            for &m in &members {
                let n = &nodes[m];
                variables.extend(n.facts.variables.iter().cloned());
                operations.extend(n.facts.operations.iter().map(|o| o.text.clone()));
                if n.block != first_block {
                    shared_block = None;
                }
                lines.push(ChunkLine { side: n.side, text: n.text.clone(), facts: n.facts.clone() });
            }
            Chunk { id, lines, variables, operations, control_block_id: shared_block }
        })
        .collect()
}

/// Group the changed lines of `diff` (between `old` and `new`, both
/// normalized) into chunks. Lines without variables or operations, such as
/// lone braces, are left out.
pub fn build_chunks(diff: &LineDiff, old: &[&str], new: &[&str]) -> Vec<Chunk> {
    group(nodes(diff, old, new))
}
