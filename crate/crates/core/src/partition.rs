//! Connected partitions, acyclic orientations of quotient graphs, edge
//! contraction, chip-firing equivalence classes, and the sign function used
//! by the resolution differentials.
//!
//! The canonical form throughout: blocks are sorted internally and listed in
//! order of their minimum vertex; quotient edges are listed in lexicographic
//! order of their (unordered) block-index pairs; orientations compare as bit
//! vectors over that edge order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Divisor, Multigraph};

/// A partition of the vertices into blocks, each inducing a connected
/// subgraph of the host.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConnectedPartition {
    blocks: Vec<Vec<usize>>,
}

impl ConnectedPartition {
    pub fn new(g: &Multigraph, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        let mut seen = vec![false; g.n()];
        for b in &blocks {
            let mut mask = 0u64;
            for &v in b {
                if v >= g.n() || seen[v] {
                    return Err(Error::Malformed(format!("bad block vertex {}", v + 1)));
                }
                seen[v] = true;
                mask |= 1 << v;
            }
            if !g.is_connected_subset(mask) {
                return Err(Error::Malformed(format!(
                    "block {:?} is not connected",
                    b.iter().map(|v| v + 1).collect::<Vec<_>>()
                )));
            }
        }
        if !seen.into_iter().all(|s| s) {
            return Err(Error::Malformed(
                "blocks do not cover the vertex set".into(),
            ));
        }
        Ok(ConnectedPartition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing vertex `v`.
    pub fn block_of(&self, v: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&v))
            .expect("vertex must belong to some block")
    }
}

/// A directed edge of a quotient graph, as a pair of block indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedQuotientEdge {
    pub tail: usize,
    pub head: usize,
}

impl DirectedQuotientEdge {
    pub fn new(tail: usize, head: usize) -> Self {
        DirectedQuotientEdge { tail, head }
    }

    pub fn reversed(&self) -> Self {
        DirectedQuotientEdge {
            tail: self.head,
            head: self.tail,
        }
    }
}

/// A connected partition together with an acyclic orientation of its
/// quotient graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AcyclicPartition {
    partition: ConnectedPartition,
    /// One directed edge per positive-weight block pair, sorted by the
    /// unordered pair (min index, max index).
    edges: Vec<DirectedQuotientEdge>,
}

/// The quotient multigraph of a partition, with its blocks relabeled so the
/// sink block comes last (the sink convention for `Multigraph`).
pub struct Quotient {
    pub graph: Multigraph,
    /// block index in the partition -> vertex index in `graph`
    pub vertex_of_block: Vec<usize>,
}

/// Inter-block weight in the host graph.
fn block_weight(g: &Multigraph, a: &[usize], b: &[usize]) -> u64 {
    a.iter()
        .map(|&u| b.iter().map(|&v| g.weight(u, v)).sum::<u64>())
        .sum()
}

/// The quotient multigraph on the blocks of `p`; the block containing the
/// sink vertex becomes the sink block.
pub fn quotient(g: &Multigraph, p: &ConnectedPartition) -> Quotient {
    let k = p.size();
    let sink_block = p.block_of(g.sink());
    // non-sink blocks keep their relative order; sink block moves last
    let mut vertex_of_block = vec![0usize; k];
    let mut next = 0;
    for i in 0..k {
        if i != sink_block {
            vertex_of_block[i] = next;
            next += 1;
        }
    }
    vertex_of_block[sink_block] = k - 1;
    let mut weights = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let w = block_weight(g, &p.blocks()[i], &p.blocks()[j]);
            let (a, b) = (vertex_of_block[i], vertex_of_block[j]);
            weights[a][b] = w;
            weights[b][a] = w;
        }
    }
    let graph = Multigraph::from_weights(weights).expect("quotient of a connected graph");
    Quotient {
        graph,
        vertex_of_block,
    }
}

/// All connected k-partitions of `g`, in canonical order.
pub fn connected_partitions(g: &Multigraph, k: usize) -> Result<Vec<ConnectedPartition>> {
    if k == 0 || k > g.n() {
        return Err(Error::PartitionSize(k, g.n()));
    }
    let full: u64 = if g.n() == 64 { !0 } else { (1u64 << g.n()) - 1 };
    let mut out = Vec::new();
    let mut blocks: Vec<u64> = Vec::new();
    recurse_partitions(g, k, full, &mut blocks, &mut out);
    let mut parts: Vec<ConnectedPartition> = out
        .into_iter()
        .map(|masks| ConnectedPartition {
            blocks: masks
                .iter()
                .map(|&m| (0..g.n()).filter(|&v| m & (1 << v) != 0).collect())
                .collect(),
        })
        .collect();
    parts.sort();
    Ok(parts)
}

fn recurse_partitions(
    g: &Multigraph,
    k_left: usize,
    unassigned: u64,
    blocks: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if unassigned == 0 {
        if k_left == 0 {
            let mut sorted = blocks.clone();
            sorted.sort_by_key(|m| m.trailing_zeros());
            out.push(sorted);
        }
        return;
    }
    if k_left == 0 || (unassigned.count_ones() as usize) < k_left {
        return;
    }
    // the least unassigned vertex anchors the next block
    let anchor = unassigned.trailing_zeros();
    let rest = unassigned & !(1u64 << anchor);
    // enumerate subsets of `rest`, adding the anchor to each
    let mut sub = rest;
    loop {
        let candidate = sub | (1u64 << anchor);
        if g.is_connected_subset(candidate) {
            blocks.push(candidate);
            recurse_partitions(g, k_left - 1, unassigned & !candidate, blocks, out);
            blocks.pop();
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
}

impl AcyclicPartition {
    /// Builds from a partition and a set of directed edges (one per adjacent
    /// block pair). Does not check acyclicity; callers that construct
    /// orientations by hand should call `is_acyclic`.
    fn from_parts(partition: ConnectedPartition, mut edges: Vec<DirectedQuotientEdge>) -> Self {
        edges.sort_by_key(|e| (e.tail.min(e.head), e.tail.max(e.head)));
        AcyclicPartition { partition, edges }
    }

    /// Assembles from pre-sorted blocks and directed edges. The blocks must
    /// already be in canonical order.
    pub(crate) fn assemble(blocks: Vec<Vec<usize>>, edges: Vec<DirectedQuotientEdge>) -> Self {
        Self::from_parts(ConnectedPartition { blocks }, edges)
    }

    pub fn partition(&self) -> &ConnectedPartition {
        &self.partition
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        self.partition.blocks()
    }

    pub fn size(&self) -> usize {
        self.partition.size()
    }

    pub fn edges(&self) -> &[DirectedQuotientEdge] {
        &self.edges
    }

    /// Orientation as a bit vector over the canonical edge order:
    /// `true` when the edge points from the higher-indexed block to the lower.
    pub fn orientation_bits(&self) -> Vec<bool> {
        self.edges.iter().map(|e| e.tail > e.head).collect()
    }

    fn out_edges(&self, b: usize) -> impl Iterator<Item = &DirectedQuotientEdge> {
        self.edges.iter().filter(move |e| e.tail == b)
    }

    fn in_edges(&self, b: usize) -> impl Iterator<Item = &DirectedQuotientEdge> {
        self.edges.iter().filter(move |e| e.head == b)
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm on the quotient digraph
        let k = self.size();
        let mut indeg = vec![0usize; k];
        for e in &self.edges {
            indeg[e.head] += 1;
        }
        let mut queue: VecDeque<usize> = (0..k).filter(|&b| indeg[b] == 0).collect();
        let mut removed = 0;
        while let Some(b) = queue.pop_front() {
            removed += 1;
            for e in self.out_edges(b) {
                indeg[e.head] -= 1;
                if indeg[e.head] == 0 {
                    queue.push_back(e.head);
                }
            }
        }
        removed == k
    }

    /// True when the orientation is acyclic with its unique sink at the
    /// block containing the sink vertex of `g` (block count is recovered
    /// from the partition, so only the sink vertex index is needed).
    pub fn is_sink_rooted(&self, sink_vertex: usize) -> bool {
        if !self.is_acyclic() {
            return false;
        }
        let sink_block = self.partition.block_of(sink_vertex);
        (0..self.size()).all(|b| {
            let is_sink = self.out_edges(b).next().is_none();
            is_sink == (b == sink_block)
        })
    }

    /// The divisor assigning each vertex its number of host-graph edges into
    /// out-neighbor blocks.
    pub fn divisor(&self, g: &Multigraph) -> Divisor {
        let mut values = vec![0i64; g.n()];
        for e in &self.edges {
            for &u in &self.partition.blocks()[e.tail] {
                for &v in &self.partition.blocks()[e.head] {
                    values[u] += g.weight(u, v) as i64;
                }
            }
        }
        Divisor::new(values)
    }

    /// True if merging `e.tail` and `e.head` leaves the orientation acyclic;
    /// equivalently there is no alternative directed path tail -> head.
    pub fn is_contractible(&self, e: DirectedQuotientEdge) -> bool {
        if !self.edges.contains(&e) {
            return false;
        }
        // DFS from tail, skipping the edge itself
        let mut stack: Vec<usize> = self
            .out_edges(e.tail)
            .filter(|f| f.head != e.head)
            .map(|f| f.head)
            .collect();
        let mut seen = vec![false; self.size()];
        while let Some(b) = stack.pop() {
            if b == e.head {
                return false;
            }
            if seen[b] {
                continue;
            }
            seen[b] = true;
            stack.extend(self.out_edges(b).map(|f| f.head));
        }
        true
    }

    /// The contractible edges, in canonical edge order.
    pub fn contractible_edges(&self) -> Vec<DirectedQuotientEdge> {
        self.edges
            .iter()
            .copied()
            .filter(|&e| self.is_contractible(e))
            .collect()
    }

    /// Merges the endpoints of `e`, inheriting all other orientations.
    pub fn contract(&self, e: DirectedQuotientEdge) -> Result<AcyclicPartition> {
        if !self.is_contractible(e) {
            return Err(Error::NotContractible(e.tail, e.head));
        }
        let old = self.partition.blocks();
        let mut merged: Vec<usize> = old[e.tail].iter().chain(&old[e.head]).copied().collect();
        merged.sort_unstable();
        let mut new_blocks: Vec<Vec<usize>> = Vec::with_capacity(self.size() - 1);
        new_blocks.push(merged);
        for (i, b) in old.iter().enumerate() {
            if i != e.tail && i != e.head {
                new_blocks.push(b.clone());
            }
        }
        new_blocks.sort();
        let mut old_to_new = vec![0usize; self.size()];
        for (i, b) in old.iter().enumerate() {
            let probe = b[0];
            old_to_new[i] = new_blocks
                .iter()
                .position(|nb| nb.contains(&probe))
                .expect("every old block lands in a new block");
        }
        let mut seen: BTreeMap<(usize, usize), DirectedQuotientEdge> = BTreeMap::new();
        for f in &self.edges {
            if (f.tail == e.tail && f.head == e.head) || (f.tail == e.head && f.head == e.tail) {
                continue;
            }
            let (t, h) = (old_to_new[f.tail], old_to_new[f.head]);
            if t == h {
                continue;
            }
            let key = (t.min(h), t.max(h));
            let dir = DirectedQuotientEdge::new(t, h);
            if let Some(prev) = seen.insert(key, dir) {
                // two old edges map to the same block pair; contractibility
                // guarantees their directions agree
                assert_eq!(prev, dir, "conflicting orientations after contraction");
            }
        }
        let partition = ConnectedPartition { blocks: new_blocks };
        let result = AcyclicPartition::from_parts(partition, seen.into_values().collect());
        debug_assert!(result.is_acyclic());
        Ok(result)
    }

    /// Reverses all edges incident on block `b` (legal when `b` is a source
    /// or a sink of the orientation).
    fn reverse_at(&self, b: usize) -> AcyclicPartition {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                if e.tail == b || e.head == b {
                    e.reversed()
                } else {
                    *e
                }
            })
            .collect();
        AcyclicPartition::from_parts(self.partition.clone(), edges)
    }

    /// The chip-firing equivalence class of this orientation: the closure
    /// under replacing sources with sinks and sinks with sources.
    pub fn class_members(&self) -> Vec<AcyclicPartition> {
        let mut seen: BTreeSet<AcyclicPartition> = BTreeSet::new();
        let mut queue = VecDeque::from([self.clone()]);
        seen.insert(self.clone());
        while let Some(c) = queue.pop_front() {
            for b in 0..c.size() {
                let has_out = c.out_edges(b).next().is_some();
                let has_in = c.in_edges(b).next().is_some();
                let is_source = has_out && !has_in;
                let is_sink = has_in && !has_out;
                if is_source || is_sink {
                    let next = c.reverse_at(b);
                    debug_assert!(next.is_acyclic());
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    /// The unique member of the class whose only sink is the block
    /// containing `sink_vertex`.
    pub fn canonical_rep(&self, sink_vertex: usize) -> AcyclicPartition {
        let reps: Vec<AcyclicPartition> = self
            .class_members()
            .into_iter()
            .filter(|m| m.is_sink_rooted(sink_vertex))
            .collect();
        assert_eq!(
            reps.len(),
            1,
            "class must contain a unique sink-rooted member"
        );
        reps.into_iter().next().unwrap()
    }

    /// The monomial exponent vector of contracting `e`: for each vertex of
    /// the tail block, its number of host edges into the head block.
    pub fn contraction_exponents(&self, g: &Multigraph, e: DirectedQuotientEdge) -> Vec<u32> {
        let mut exps = vec![0u32; g.n()];
        for &u in &self.partition.blocks()[e.tail] {
            for &v in &self.partition.blocks()[e.head] {
                exps[u] += g.weight(u, v) as u32;
            }
        }
        exps
    }
}

/// All sink-rooted acyclic k-partitions of `g`, in canonical order.
pub fn n_acyclic_partitions(g: &Multigraph, k: usize) -> Result<Vec<AcyclicPartition>> {
    let parts = connected_partitions(g, k)?;
    let mut out = Vec::new();
    for p in parts {
        let mut pairs = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                if block_weight(g, &p.blocks()[i], &p.blocks()[j]) > 0 {
                    pairs.push((i, j));
                }
            }
        }
        let mut edges: Vec<DirectedQuotientEdge> = Vec::with_capacity(pairs.len());
        orient_all(g, &p, &pairs, &mut edges, &mut out);
    }
    Ok(out)
}

/// Recursively orients the remaining block pairs, pruning as soon as a
/// directed cycle appears. Trying tail<head before the reverse makes the
/// output follow the orientation-bit-vector order.
fn orient_all(
    g: &Multigraph,
    p: &ConnectedPartition,
    remaining: &[(usize, usize)],
    edges: &mut Vec<DirectedQuotientEdge>,
    out: &mut Vec<AcyclicPartition>,
) {
    match remaining.split_first() {
        None => {
            let c = AcyclicPartition::from_parts(p.clone(), edges.clone());
            if c.is_sink_rooted(g.sink()) {
                out.push(c);
            }
        }
        Some((&(i, j), rest)) => {
            for e in [
                DirectedQuotientEdge::new(i, j),
                DirectedQuotientEdge::new(j, i),
            ] {
                if !creates_cycle(edges, e) {
                    edges.push(e);
                    orient_all(g, p, rest, edges, out);
                    edges.pop();
                }
            }
        }
    }
}

fn creates_cycle(edges: &[DirectedQuotientEdge], e: DirectedQuotientEdge) -> bool {
    // cycle iff a directed path head -> tail already exists
    let mut stack = vec![e.head];
    let mut seen = BTreeSet::new();
    while let Some(b) = stack.pop() {
        if b == e.tail {
            return true;
        }
        if !seen.insert(b) {
            continue;
        }
        stack.extend(edges.iter().filter(|f| f.tail == b).map(|f| f.head));
    }
    false
}

/// A chip-firing equivalence class, represented by its sink-rooted member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChipClass {
    canonical: AcyclicPartition,
}

impl ChipClass {
    pub fn of(member: &AcyclicPartition, sink_vertex: usize) -> Self {
        ChipClass {
            canonical: member.canonical_rep(sink_vertex),
        }
    }

    /// Wraps an orientation already known to be sink-rooted.
    pub fn from_canonical(canonical: AcyclicPartition) -> Self {
        ChipClass { canonical }
    }

    pub fn canonical(&self) -> &AcyclicPartition {
        &self.canonical
    }

    pub fn members(&self) -> Vec<AcyclicPartition> {
        self.canonical.class_members()
    }

    /// Every directed edge appearing and contractible in some member, listed
    /// once in deterministic order with one witnessing member each.
    pub fn contractible_edges(&self) -> Vec<(DirectedQuotientEdge, AcyclicPartition)> {
        let mut picked: BTreeMap<DirectedQuotientEdge, AcyclicPartition> = BTreeMap::new();
        for m in self.members() {
            for e in m.contractible_edges() {
                picked.entry(e).or_insert_with(|| m.clone());
            }
        }
        // deterministic order: canonical order of the directed pairs
        picked.into_iter().collect()
    }

    /// The sign of a contractible edge of this class, computed from the
    /// permutation construction with blocks ordered by minimum vertex.
    ///
    /// For distinct contractible edges e, f the signs satisfy
    /// `sign(c,e) * sign(c/e,f) = -sign(c,f) * sign(c/f,e)`, and reversing a
    /// bridge flips the sign.
    pub fn sign(&self, e: DirectedQuotientEdge) -> i64 {
        let k = self.canonical.size();
        assert!(e.tail < k && e.head < k && e.tail != e.head);
        assert!(
            self.members()
                .iter()
                .any(|m| m.edges().contains(&e) && m.is_contractible(e)),
            "sign of a non-contractible edge"
        );
        // sequence rho: tail, head, remaining blocks in canonical order,
        // compared against the canonical order itself
        let mut rho = vec![e.tail, e.head];
        rho.extend((0..k).filter(|&b| b != e.tail && b != e.head));
        let s1 = permutation_sign(&rho);
        // after merging, the combined block takes the position its minimum
        // vertex earns among the surviving blocks
        let blocks = self.canonical.blocks();
        let merged_min = blocks[e.tail][0].min(blocks[e.head][0]);
        let mut new_mins: Vec<usize> = (0..k)
            .filter(|&b| b != e.tail && b != e.head)
            .map(|b| blocks[b][0])
            .collect();
        new_mins.push(merged_min);
        new_mins.sort_unstable();
        let pos_of = |min: usize| new_mins.binary_search(&min).expect("block min present");
        let mut rho2 = vec![pos_of(merged_min)];
        rho2.extend(
            (0..k)
                .filter(|&b| b != e.tail && b != e.head)
                .map(|b| pos_of(blocks[b][0])),
        );
        s1 * permutation_sign(&rho2)
    }
}

/// Sign of the permutation sending position i to `seq[i]`.
fn permutation_sign(seq: &[usize]) -> i64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}
