//! Rip-up-and-reroute minor embedding.
//!
//! Every chain is kept as a rooted tree of qubits together with one *link*
//! qubit per logical neighbor, the end of a coupler realizing that edge.
//!
//! To (re)build the chain of `u`, a node-weighted Dijkstra search runs from
//! the chain of each placed neighbor. A qubit's weight is exponential in the
//! number of chains sitting on it, so shared qubits are only used when no
//! free route exists. The root is the qubit with the smallest summed
//! distance, and the chain grows along shortest paths from the root to each
//! neighbor. The path segments are then handed over to the neighbors, so
//! chains stretch toward each other instead of `u` alone doing all the work.
//! Before a chain is torn out it takes those segments back.
//!
//! Overlaps are resolved in passes over all nodes. In the main mode a
//! rebuilt chain may not touch any qubit whose fill already reaches the worst
//! fill of the chain it replaces, so congestion only moves downhill; when
//! that keeps failing, unrestricted passes take over for a while. Progress
//! is measured by the overfill histogram compared from the top, and the best
//! state seen is kept. A try ends after `patience` passes without progress,
//! and the next try starts from a fresh placement. Once no qubit is shared,
//! further passes rebuild chains through free qubits only to shorten them.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChimeraGraph, Embedding, LogicalGraph};
use crate::generate::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedOptions {
    /// Fresh placements attempted before giving up.
    pub max_tries: usize,
    /// Passes without improvement before a try is abandoned.
    pub patience: usize,
    /// Hard cap on overlap-resolution passes per try.
    pub max_passes: usize,
    /// Passes without improvement before chain shortening stops.
    pub refine_patience: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            max_tries: 4,
            patience: 10,
            max_passes: 400,
            refine_patience: 2,
        }
    }
}

/// Embedding could not be found; a reportable outcome rather than an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedFailure {
    pub tries: usize,
    /// Qubits still shared between chains in the best state reached
    /// (`usize::MAX` when no try got every node placed).
    pub overlapping_qubits: usize,
}

impl std::fmt::Display for EmbedFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.tries == 0 {
            return f.write_str("no embedding attempted: more logical nodes than qubits, or zero tries");
        }
        write!(
            f,
            "no embedding after {} tries ({} qubits still shared)",
            self.tries, self.overlapping_qubits
        )
    }
}

impl std::error::Error for EmbedFailure {}

pub fn embed(
    logical: &LogicalGraph,
    hw: &ChimeraGraph,
    seed: u64,
    max_tries: usize,
) -> Result<Embedding, EmbedFailure> {
    embed_with(
        logical,
        hw,
        seed,
        &EmbedOptions {
            max_tries,
            ..EmbedOptions::default()
        },
    )
}

pub fn embed_with(
    logical: &LogicalGraph,
    hw: &ChimeraGraph,
    seed: u64,
    opts: &EmbedOptions,
) -> Result<Embedding, EmbedFailure> {
    if logical.num_nodes() > hw.num_qubits() || opts.max_tries == 0 {
        return Err(EmbedFailure {
            tries: 0,
            overlapping_qubits: if opts.max_tries == 0 { usize::MAX } else { 0 },
        });
    }
    let mut search = Search::new(logical, hw, derive_seed(seed, &[0x656d_6264]));
    match search.run(opts) {
        Some(chains) => Ok(Embedding::new(chains, hw.dims())),
        None => Err(EmbedFailure {
            tries: opts.max_tries,
            overlapping_qubits: search.best_overlap(),
        }),
    }
}

const NONE: u32 = u32::MAX;
const INF: u64 = u64::MAX;

/// A chain as a tree. Each qubit maps to `(parent, refs)`, where `refs`
/// counts children plus links anchored at the qubit; the root is its own
/// parent. A qubit with `refs == 0` is a leaf nothing depends on.
#[derive(Clone, Debug, Default)]
struct Tree {
    nodes: BTreeMap<usize, (usize, u32)>,
    /// Logical neighbor (or the node itself, for the root) to anchor qubit.
    links: BTreeMap<usize, usize>,
}

impl Tree {
    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn contains(&self, q: usize) -> bool {
        self.nodes.contains_key(&q)
    }

    fn refs_mut(&mut self, q: usize) -> &mut u32 {
        &mut self.nodes.get_mut(&q).expect("qubit in chain").1
    }

    fn link(&self, x: usize) -> Option<usize> {
        self.links.get(&x).copied()
    }

    fn set_link(&mut self, x: usize, q: usize) {
        let old = self.links.insert(x, q);
        debug_assert!(old.is_none());
        *self.refs_mut(q) += 1;
    }

    fn drop_link(&mut self, x: usize) -> Option<usize> {
        let q = self.links.remove(&x)?;
        *self.refs_mut(q) -= 1;
        Some(q)
    }

    fn set_root(&mut self, label: usize, q: usize, fill: &mut [u32]) {
        debug_assert!(self.is_empty());
        self.links.insert(label, q);
        self.nodes.insert(q, (q, 2));
        fill[q] += 1;
    }

    fn clear(&mut self, fill: &mut [u32]) {
        for &q in self.nodes.keys() {
            fill[q] -= 1;
        }
        self.nodes.clear();
        self.links.clear();
    }

    fn add_leaf(&mut self, q: usize, parent: usize, fill: &mut [u32]) {
        self.nodes.insert(q, (parent, 0));
        fill[q] += 1;
        *self.refs_mut(parent) += 1;
    }

    /// Removes `q` if nothing depends on it and returns its parent,
    /// otherwise returns `q`.
    fn trim_leaf(&mut self, q: usize, fill: &mut [u32]) -> usize {
        let (parent, refs) = self.nodes[&q];
        if refs != 0 {
            return q;
        }
        self.nodes.remove(&q);
        fill[q] -= 1;
        *self.refs_mut(parent) -= 1;
        parent
    }

    fn trim_branch(&mut self, mut q: usize, fill: &mut [u32]) {
        loop {
            let p = self.trim_leaf(q, fill);
            if p == q {
                return;
            }
            q = p;
        }
    }

    /// Drops every leaf branch that carries no link.
    fn prune(&mut self, fill: &mut [u32]) {
        let leaves: Vec<usize> = self
            .nodes
            .iter()
            .filter(|(_, &(_, refs))| refs == 0)
            .map(|(&q, _)| q)
            .collect();
        for q in leaves {
            if self.contains(q) {
                self.trim_branch(q, fill);
            }
        }
    }

    /// Moves the unshared branch of `other` that ends at its link to `me`
    /// into this chain, one qubit at a time, while this chain is shorter than
    /// `limit` (0 means no limit). Links are re-anchored at the new boundary.
    fn steal(&mut self, me: usize, other: &mut Tree, them: usize, limit: usize, fill: &mut [u32]) {
        let (Some(mut q), Some(mut p)) = (self.drop_link(them), other.drop_link(me)) else {
            unreachable!("steal needs a mutual link");
        };
        while limit == 0 || self.len() < limit {
            let r = other.trim_leaf(p, fill);
            if r == p {
                break;
            }
            if !self.contains(p) {
                self.add_leaf(p, q, fill);
            } else if p != q {
                *self.refs_mut(p) += 1;
                self.trim_branch(q, fill);
                *self.refs_mut(p) -= 1;
            }
            q = p;
            p = r;
        }
        self.set_link(them, q);
        other.set_link(me, p);
    }

    /// Extends this chain from `q` along `parents` until it touches
    /// `other`, then links the two.
    fn link_path(&mut self, me: usize, other: &mut Tree, them: usize, mut q: usize, parents: &[u32], fill: &mut [u32]) {
        let mut p = parents[q];
        if p == NONE {
            // q already lies inside the other chain
            p = q as u32;
        } else {
            while !other.contains(p as usize) {
                let pu = p as usize;
                if self.contains(pu) {
                    self.trim_branch(q, fill);
                } else {
                    self.add_leaf(pu, q, fill);
                }
                q = pu;
                p = parents[pu];
            }
        }
        self.set_link(them, q);
        other.set_link(me, p as usize);
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

/// Per-neighbor search results.
struct Field {
    dist: Vec<u64>,
    parent: Vec<u32>,
    seen: Vec<bool>,
}

enum PassResult {
    Improved,
    Stalled,
    Broken,
}

struct Search<'a> {
    g: &'a LogicalGraph,
    hw: &'a ChimeraGraph,
    rng: ChaCha8Rng,
    chains: Vec<Tree>,
    fill: Vec<u32>,
    weight: Vec<u64>,
    total: Vec<u64>,
    fields: Vec<Field>,
    /// Random tie-break rank of each qubit, one permutation per node.
    ranks: Vec<Vec<u32>>,
    /// Qubits already holding this many chains are off limits.
    bound: u32,
    /// Saved state for `freeze_out`/`thaw_back`.
    frozen: Option<(usize, Tree, Vec<(usize, usize)>)>,
    embedded: bool,
    desperate: bool,
    best: Vec<Tree>,
    best_stats: Vec<usize>,
    target_len: usize,
    pushback: usize,
    order: Vec<usize>,
    log2_margin: f64,
}

impl<'a> Search<'a> {
    fn new(g: &'a LogicalGraph, hw: &'a ChimeraGraph, seed: u64) -> Self {
        let nq = hw.num_qubits();
        let n = g.num_nodes();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<u32> = (0..nq as u32).collect();
        let ranks = (0..n)
            .map(|_| {
                perm.shuffle(&mut rng);
                perm.clone()
            })
            .collect();
        let max_degree = (0..n).map(|u| g.neighbors(u).len()).max().unwrap_or(0).max(1);
        Search {
            g,
            hw,
            rng,
            chains: vec![Tree::default(); n],
            fill: vec![0; nq],
            weight: vec![1; nq],
            total: vec![0; nq],
            fields: (0..n)
                .map(|_| Field {
                    dist: vec![INF; nq],
                    parent: vec![NONE; nq],
                    seen: vec![false; nq],
                })
                .collect(),
            ranks,
            bound: u32::MAX,
            frozen: None,
            embedded: false,
            desperate: false,
            best: Vec::new(),
            best_stats: Vec::new(),
            target_len: 0,
            pushback: 0,
            order: Vec::new(),
            log2_margin: ((max_degree * nq) as f64).log2(),
        }
    }

    fn run(&mut self, opts: &EmbedOptions) -> Option<Vec<Vec<usize>>> {
        let n = self.g.num_nodes();
        if !self.initialize() {
            return None;
        }
        for trial in 0..opts.max_tries {
            if self.embedded {
                break;
            }
            let mut patience = opts.patience;
            self.pushback = 0;
            let mut passes = 0;
            while patience > 0 && !self.embedded && passes < opts.max_passes {
                passes += 1;
                self.desperate = patience <= 1 || trial + 1 == opts.max_tries;
                let result = if self.pushback < n {
                    self.pushdown_pass()
                } else {
                    self.pushback -= 1;
                    self.overfill_pass()
                };
                match result {
                    PassResult::Improved => {
                        patience = opts.patience;
                        self.pushback = 0;
                    }
                    PassResult::Stalled => patience -= 1,
                    PassResult::Broken => {
                        self.restore_best();
                        patience -= 1;
                    }
                }
            }
            if !self.embedded && trial + 1 < opts.max_tries {
                let best = std::mem::take(&mut self.best);
                let best_stats = std::mem::take(&mut self.best_stats);
                self.desperate = false;
                if !self.initialize() {
                    self.best = best;
                    self.best_stats = best_stats;
                }
            }
        }
        if !self.embedded {
            return None;
        }

        self.bound = 1;
        self.restore_best();
        let mut patience = opts.refine_patience;
        let mut keep_order = false;
        while patience > 0 {
            let last = self.chains.clone();
            self.desperate = patience == 1;
            match self.chainlength_pass(keep_order) {
                PassResult::Improved => {
                    patience = opts.refine_patience;
                    keep_order = true;
                }
                PassResult::Stalled => {
                    patience -= 1;
                    keep_order = false;
                }
                PassResult::Broken => {
                    self.set_chains(last);
                    patience -= 1;
                    keep_order = false;
                }
            }
        }

        self.restore_best();
        for u in 0..n {
            self.chains[u].prune(&mut self.fill);
        }
        Some(self.chains.iter().map(|t| t.nodes.keys().copied().collect()).collect())
    }

    fn best_overlap(&self) -> usize {
        if self.best.is_empty() {
            return usize::MAX;
        }
        let mut fill = vec![0u32; self.hw.num_qubits()];
        for t in &self.best {
            for &q in t.nodes.keys() {
                fill[q] += 1;
            }
        }
        fill.iter().filter(|&&c| c > 1).count()
    }

    /// Places every node from scratch. False if some node cannot reach its
    /// placed neighbors at all.
    fn initialize(&mut self) -> bool {
        for u in 0..self.chains.len() {
            self.chains[u].clear(&mut self.fill);
        }
        self.bound = u32::MAX;
        for u in self.pfs_order() {
            if !self.rebuild(u) {
                return false;
            }
        }
        self.best_stats.clear();
        self.check_improvement();
        true
    }

    fn set_chains(&mut self, chains: Vec<Tree>) {
        self.chains = chains;
        self.fill.fill(0);
        for t in &self.chains {
            for &q in t.nodes.keys() {
                self.fill[q] += 1;
            }
        }
    }

    fn restore_best(&mut self) {
        let best = self.best.clone();
        self.set_chains(best);
    }

    /// Overfill histogram while chains overlap (index `w - 2` counts qubits
    /// in `w` chains), chain length histogram once they do not.
    fn statistics(&self) -> (bool, Vec<usize>) {
        let max = self.fill.iter().copied().max().unwrap_or(0);
        if max > 1 {
            let mut stats = vec![0; max as usize - 1];
            for &w in &self.fill {
                if w > 1 {
                    stats[w as usize - 2] += 1;
                }
            }
            return (false, stats);
        }
        let longest = self.chains.iter().map(Tree::len).max().unwrap_or(0);
        let mut stats = vec![0; longest + 1];
        for t in &self.chains {
            stats[t.len()] += 1;
        }
        (true, stats)
    }

    /// Records the current state as the best one if it beats it.
    fn check_improvement(&mut self) -> bool {
        let (embedded, stats) = self.statistics();
        let mut better = false;
        if embedded && !self.embedded {
            self.embedded = true;
            better = true;
        }
        if !embedded && self.embedded {
            return false;
        }
        if !better {
            better = match self.best_stats.len().cmp(&stats.len()) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => stats.iter().rev().lt(self.best_stats.iter().rev()),
            } || self.best_stats.is_empty();
        }
        if better {
            if embedded {
                self.target_len = stats.len() - 1;
            }
            self.best_stats = stats;
            self.best = self.chains.clone();
        }
        better
    }

    fn pushdown_pass(&mut self) -> PassResult {
        let n = self.g.num_nodes();
        let saved_bound = self.bound;
        let mut improved = false;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        for u in order {
            if self.pushback < n {
                self.steal_all(u);
                let worst = self.chains[u].nodes.keys().map(|&q| self.fill[q]).max().unwrap_or(0);
                self.bound = worst;
                self.freeze_out(u);
                if !self.find_chain(u, 0) {
                    self.pushback += 3;
                    self.thaw_back();
                    self.flip_back(u, 0);
                }
            } else {
                self.bound = saved_bound;
                self.steal_all(u);
                self.tear_out(u);
                if !self.find_chain(u, 0) {
                    self.bound = saved_bound;
                    return PassResult::Broken;
                }
            }
            improved |= self.check_improvement();
            if self.embedded {
                break;
            }
        }
        self.bound = saved_bound;
        if improved {
            PassResult::Improved
        } else {
            PassResult::Stalled
        }
    }

    fn overfill_pass(&mut self) -> PassResult {
        let mut improved = false;
        for u in self.pfs_order() {
            if !self.rebuild(u) {
                return PassResult::Broken;
            }
            improved |= self.check_improvement();
            if self.embedded {
                break;
            }
        }
        if improved {
            PassResult::Improved
        } else {
            PassResult::Stalled
        }
    }

    fn chainlength_pass(&mut self, keep_order: bool) -> PassResult {
        if !keep_order || self.order.is_empty() {
            self.order = self.pfs_order();
        }
        let mut improved = false;
        for i in 0..self.order.len() {
            let u = self.order[i];
            if !self.rebuild(u) {
                return PassResult::Broken;
            }
            improved |= self.check_improvement();
        }
        if improved {
            PassResult::Improved
        } else {
            PassResult::Stalled
        }
    }

    /// Replaces the chain of `u` under the current mode.
    fn rebuild(&mut self, u: usize) -> bool {
        if self.embedded || self.desperate {
            self.steal_all(u);
        }
        if self.embedded {
            // shorten through free qubits only, keeping the old chain if the
            // new one is not shorter
            let before = self.chains[u].len();
            self.freeze_out(u);
            if self.place(u) && self.chains[u].len() <= before {
                self.frozen = None;
            } else {
                self.tear_out(u);
                self.thaw_back();
            }
            self.flip_back(u, self.target_len);
            true
        } else {
            self.tear_out(u);
            self.find_chain(u, self.target_len)
        }
    }

    fn find_chain(&mut self, u: usize, limit: usize) -> bool {
        if !self.place(u) {
            return false;
        }
        self.flip_back(u, limit);
        true
    }

    /// Builds a chain for the (empty) node `u` against its placed
    /// neighbors.
    fn place(&mut self, u: usize) -> bool {
        let nbrs = self.g.neighbors(u);
        if !nbrs.is_empty() {
            let v = nbrs[self.rng.gen_range(0..nbrs.len())];
            self.ranks.swap(u, v);
        }
        self.compute_weights();
        self.total.fill(0);
        let mut placed = 0;
        for &v in nbrs {
            if self.chains[v].is_empty() {
                continue;
            }
            placed += 1;
            self.search_from(v);
            for &q in self.chains[v].nodes.keys() {
                let w = self.weight[q];
                self.total[q] = if self.total[q] != INF && w != INF && self.fill[q] < self.bound {
                    self.total[q].saturating_add(w)
                } else {
                    INF
                };
            }
            let field = &self.fields[v];
            for (q, t) in self.total.iter_mut().enumerate() {
                *t = if field.seen[q] && *t != INF && field.dist[q] != INF && self.fill[q] < self.bound {
                    t.saturating_add(field.dist[q])
                } else {
                    INF
                };
            }
        }
        if placed == 0 {
            for q in 0..self.total.len() {
                self.total[q] = if self.fill[q] >= self.bound { INF } else { self.weight[q] };
            }
        }

        let best = self.total.iter().copied().min().unwrap_or(INF);
        if best == INF {
            return false;
        }
        let minima: Vec<usize> = (0..self.total.len()).filter(|&q| self.total[q] == best).collect();
        let root = minima[self.rng.gen_range(0..minima.len())];
        self.construct(u, root);
        true
    }

    /// `base^fill` with the base as large as the node count allows without
    /// overflowing summed distances.
    fn compute_weights(&mut self) {
        let max_fill = self.fill.iter().copied().max().unwrap_or(0).min(63);
        let log2_base = if max_fill == 0 {
            1.0
        } else {
            (63.0 - self.log2_margin) / max_fill as f64
        };
        let base = log2_base.exp2();
        let table: Vec<u64> = (0..=max_fill).map(|c| base.powi(c as i32) as u64).collect();
        for (w, &c) in self.weight.iter_mut().zip(&self.fill) {
            *w = table.get(c as usize).copied().unwrap_or(INF);
        }
    }

    fn construct(&mut self, u: usize, root: usize) {
        let fill = &mut self.fill;
        self.chains[u].set_root(u, root, fill);
        for &v in self.g.neighbors(u) {
            if self.chains[v].is_empty() {
                continue;
            }
            let field = &self.fields[v];
            let d = |q: usize| if field.seen[q] { field.dist[q] } else { INF };
            // attach from the branch point of u's tree closest to v
            let mut from = root;
            let mut best = d(root);
            for (&p, &(_, refs)) in &self.chains[u].nodes {
                if refs > 1 && d(p) < best {
                    best = d(p);
                    from = p;
                }
            }
            let (cu, cv) = pair_mut(&mut self.chains, u, v);
            cu.link_path(u, cv, v, from, &field.parent, fill);
        }
    }

    /// Hands the path segments of `u` over to its neighbors.
    fn flip_back(&mut self, u: usize, limit: usize) {
        for &v in self.g.neighbors(u) {
            if self.chains[v].is_empty() || self.chains[v].link(u).is_none() {
                continue;
            }
            let (cv, cu) = pair_mut(&mut self.chains, v, u);
            cv.steal(v, cu, u, limit, &mut self.fill);
        }
    }

    /// Lets `u` take back the segments its neighbors hold toward it.
    fn steal_all(&mut self, u: usize) {
        for &v in self.g.neighbors(u) {
            if self.chains[u].link(v).is_none() || self.chains[v].link(u).is_none() {
                continue;
            }
            let (cu, cv) = pair_mut(&mut self.chains, u, v);
            cu.steal(u, cv, v, 0, &mut self.fill);
        }
    }

    fn tear_out(&mut self, u: usize) {
        self.chains[u].clear(&mut self.fill);
        for &v in self.g.neighbors(u) {
            self.chains[v].drop_link(u);
        }
    }

    fn freeze_out(&mut self, u: usize) {
        let tree = std::mem::take(&mut self.chains[u]);
        let mut foreign = Vec::new();
        for &x in tree.links.keys() {
            if x != u {
                if let Some(q) = self.chains[x].drop_link(u) {
                    foreign.push((x, q));
                }
            }
        }
        for &q in tree.nodes.keys() {
            self.fill[q] -= 1;
        }
        self.frozen = Some((u, tree, foreign));
    }

    fn thaw_back(&mut self) {
        let (u, tree, foreign) = self.frozen.take().expect("a frozen chain");
        debug_assert!(self.chains[u].is_empty());
        for &q in tree.nodes.keys() {
            self.fill[q] += 1;
        }
        self.chains[u] = tree;
        for (x, q) in foreign {
            self.chains[x].set_link(u, q);
        }
    }

    /// Node-weighted shortest paths from the chain of `v`. Chain qubits are
    /// sources at distance zero; qubits at or above the fill bound are never
    /// entered. Ties break on the per-node random rank.
    fn search_from(&mut self, v: usize) {
        let field = &mut self.fields[v];
        let rank = &self.ranks[v];
        field.seen.fill(false);
        let mut heap = BinaryHeap::new();
        for &q in self.chains[v].nodes.keys() {
            field.parent[q] = NONE;
            field.seen[q] = true;
            heap.push(Reverse((0u64, rank[q], q as u32)));
        }
        while let Some(Reverse((d, _, q))) = heap.pop() {
            let q = q as usize;
            field.dist[q] = d;
            for &p in self.hw.neighbors(q) {
                if field.seen[p] {
                    continue;
                }
                field.seen[p] = true;
                if self.fill[p] >= self.bound {
                    field.dist[p] = INF;
                } else {
                    field.parent[p] = q as u32;
                    heap.push(Reverse((d.saturating_add(self.weight[p]), rank[p], p as u32)));
                }
            }
        }
    }

    /// Priority-first order: repeatedly the node with the most already
    /// ordered neighbors, ties broken at random.
    fn pfs_order(&mut self) -> Vec<usize> {
        let n = self.g.num_nodes();
        let mut shuffled: Vec<usize> = (0..n).collect();
        shuffled.shuffle(&mut self.rng);
        let mut key = vec![0usize; n];
        for (i, &u) in shuffled.iter().enumerate() {
            key[u] = i;
        }
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for &start in &shuffled {
            if done[start] {
                continue;
            }
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i64, key[start], start)));
            while let Some(Reverse((_, _, x))) = heap.pop() {
                if done[x] {
                    continue;
                }
                done[x] = true;
                order.push(x);
                for &y in self.g.neighbors(x) {
                    if !done[y] {
                        let d = -(self.g.neighbors(y).iter().filter(|&&w| done[w]).count() as i64);
                        heap.push(Reverse((d, key[y], y)));
                    }
                }
            }
        }
        order
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_chimera, verify_embedding};
    use super::*;

    #[test]
    fn triangle_in_one_cell_needs_one_chain_of_two() {
        let hw = build_chimera(1, 1, 4);
        let g = LogicalGraph::new(3, [(0, 1), (1, 2), (0, 2)]);
        for seed in 0..20 {
            let emb = embed(&g, &hw, seed, 4).unwrap();
            assert!(verify_embedding(&g, &hw, &emb).is_valid());
            let mut lens: Vec<usize> = emb.chains.iter().map(Vec::len).collect();
            lens.sort_unstable();
            assert_eq!(lens, vec![1, 1, 2], "seed {seed}");
        }
    }

    #[test]
    fn single_node() {
        let hw = build_chimera(2, 2, 4);
        let g = LogicalGraph::new(1, []);
        let emb = embed(&g, &hw, 3, 1).unwrap();
        assert_eq!(emb.chains[0].len(), 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let hw = build_chimera(4, 4, 4);
        let g = LogicalGraph::new(8, (0..8).flat_map(|a| (a + 1..8).map(move |b| (a, b))));
        let a = embed(&g, &hw, 42, 4).unwrap();
        let b = embed(&g, &hw, 42, 4).unwrap();
        assert_eq!(a, b);
        assert!(verify_embedding(&g, &hw, &a).is_valid());
    }

    #[test]
    fn too_many_nodes_fail() {
        let hw = build_chimera(1, 1, 1);
        let g = LogicalGraph::new(3, [(0, 1), (1, 2), (0, 2)]);
        let err = embed(&g, &hw, 0, 2).unwrap_err();
        assert_eq!(err.tries, 0);
        // a single coupler still hosts one edge
        let g = LogicalGraph::new(2, [(0, 1)]);
        assert!(embed(&g, &hw, 0, 1).is_ok());
    }

    #[test]
    fn impossible_graph_reports_failure() {
        let hw = build_chimera(1, 1, 2);
        let k4 = LogicalGraph::new(4, (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))));
        let err = embed(&k4, &hw, 0, 2).unwrap_err();
        assert_eq!(err.tries, 2);
        assert!(err.to_string().contains("2 tries"));
    }
}
