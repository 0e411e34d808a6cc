//! Schreier graphs of `S_n` acting on ordered set partitions, the reading-order
//! characteristic matrix, minimal lifting paths and the index maps that reorder
//! a signal along a path.
//!
//! Vertices of `P_γ` are the elements of `Π_γ` in canonical order. The edge for
//! the adjacent transposition `s = (i, i+1)` exchanges the blocks of elements
//! `i` and `i+1`; when both lie in one block it is a self-loop.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::combinatorics::{
    enumerate_row_words, factorial, lex_rank_word, multinomial, multiset_rank, next_permutation,
    IntegerPartition, OrderedSetPartition, Permutation,
};
use crate::error::{Error, Result};

/// Largest `n` for which `n!`-length index maps fit in `u32`.
pub const MAX_SIGNAL_N: usize = 12;

/// A Schreier graph `P_γ` stored as a neighbor table.
#[derive(Clone, Debug)]
pub struct SchreierGraph {
    shape: IntegerPartition,
    vertices: Vec<OrderedSetPartition>,
    /// `neighbors[v * (n-1) + s - 1]` is the endpoint of edge `s` at `v` (itself for a loop).
    neighbors: Vec<u32>,
}

impl SchreierGraph {
    /// Assembles the graph recursively: vertices with `n` in block `i` form a copy of
    /// the graph for the shape with one fewer element in block `i`, and the copies are
    /// joined by `(n-1, n)` edges. Vertices are then reindexed to canonical order.
    pub fn build(shape: &IntegerPartition) -> Self {
        let n = shape.n();
        let mut memo = HashMap::new();
        let sub = build_composition(shape.parts(), &mut memo);
        let deg = n.saturating_sub(1);
        let m = sub.words.len();
        let canon: Vec<u32> = sub
            .words
            .iter()
            .map(|w| multiset_rank(w, shape.parts()) as u32)
            .collect();
        let mut neighbors = vec![0u32; m * deg];
        for v in 0..m {
            let cv = canon[v] as usize;
            for s in 0..deg {
                neighbors[cv * deg + s] = canon[sub.neighbors[v * deg + s] as usize];
            }
        }
        let vertices = crate::combinatorics::enumerate_ordered_set_partitions(shape);
        Self {
            shape: shape.clone(),
            vertices,
            neighbors,
        }
    }

    /// Builds the graph straight from the edge rule.
    pub fn build_direct(shape: &IntegerPartition) -> Self {
        let n = shape.n();
        let deg = n.saturating_sub(1);
        let vertices = crate::combinatorics::enumerate_ordered_set_partitions(shape);
        let mut neighbors = Vec::with_capacity(vertices.len() * deg);
        for v in &vertices {
            for s in 1..n {
                neighbors.push(v.swap_elements(s).index() as u32);
            }
        }
        Self {
            shape: shape.clone(),
            vertices,
            neighbors,
        }
    }

    pub fn shape(&self) -> &IntegerPartition {
        &self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n()
    }

    pub fn m(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[OrderedSetPartition] {
        &self.vertices
    }

    /// Endpoint of the edge for `s = (i, i+1)` at vertex `v`, one-based `s`.
    pub fn neighbor(&self, v: usize, s: usize) -> usize {
        self.neighbors[v * (self.n() - 1) + s - 1] as usize
    }

    pub fn loop_count(&self, v: usize) -> usize {
        (1..self.n()).filter(|&s| self.neighbor(v, s) == v).count()
    }

    /// Adjacency matrix with self-loop counts on the diagonal.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let m = self.m();
        let mut a = DMatrix::zeros(m, m);
        for v in 0..m {
            for s in 1..self.n() {
                a[(v, self.neighbor(v, s))] += 1.0;
            }
        }
        a
    }

    /// `L = (n-1)I - A`; self-loops cancel between degree and adjacency.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let m = self.m();
        let mut l = -self.adjacency();
        for v in 0..m {
            l[(v, v)] += (self.n() - 1) as f64;
        }
        l
    }

    pub fn apply_laplacian(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m())
            .map(|v| {
                (1..self.n())
                    .map(|s| {
                        let u = self.neighbor(v, s);
                        x[v] - x[u]
                    })
                    .sum()
            })
            .collect()
    }
}

struct CompositionGraph {
    words: Vec<Vec<u8>>,
    neighbors: Vec<u32>,
}

fn build_composition(
    counts: &[usize],
    memo: &mut HashMap<Vec<usize>, Arc<CompositionGraph>>,
) -> Arc<CompositionGraph> {
    if let Some(g) = memo.get(counts) {
        return g.clone();
    }
    let n: usize = counts.iter().sum();
    let graph = if n <= 1 {
        let words = if n == 0 {
            vec![Vec::new()]
        } else {
            vec![vec![counts.iter().position(|&c| c == 1).unwrap() as u8]]
        };
        CompositionGraph {
            words,
            neighbors: Vec::new(),
        }
    } else {
        let deg = n - 1;
        let mut words = Vec::new();
        let mut neighbors = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut sub_counts = counts.to_vec();
            sub_counts[i] -= 1;
            let sub = build_composition(&sub_counts, memo);
            let offset = words.len() as u32;
            for (v, w) in sub.words.iter().enumerate() {
                let mut word = w.clone();
                word.push(i as u8);
                words.push(word);
                for s in 0..deg - 1 {
                    neighbors.push(offset + sub.neighbors[v * (deg - 1) + s]);
                }
                neighbors.push(u32::MAX);
            }
        }
        let index: HashMap<&[u8], u32> = words
            .iter()
            .enumerate()
            .map(|(v, w)| (w.as_slice(), v as u32))
            .collect();
        let mut joins = Vec::with_capacity(words.len());
        for (v, w) in words.iter().enumerate() {
            if w[n - 2] == w[n - 1] {
                joins.push(v as u32);
            } else {
                let mut x = w.clone();
                x.swap(n - 2, n - 1);
                joins.push(index[x.as_slice()]);
            }
        }
        for (v, j) in joins.into_iter().enumerate() {
            neighbors[v * deg + deg - 1] = j;
        }
        CompositionGraph { words, neighbors }
    };
    let graph = Arc::new(graph);
    memo.insert(counts.to_vec(), graph.clone());
    graph
}

/// The characteristic matrix `B_{π₁}` stored row-wise: one column index per permutation.
#[derive(Clone, Debug)]
pub struct CharacteristicMatrix {
    shape: IntegerPartition,
    m: usize,
    col_of: Vec<u32>,
}

impl CharacteristicMatrix {
    /// Builds `colOf` by the block recursion: the rows with `σ(1) = i` form a
    /// contiguous block equal to the matrix for the shape with `i` removed from its
    /// row `j`, shifted to the columns whose row word begins with `j`.
    pub fn build(shape: &IntegerPartition) -> Result<Self> {
        check_signal_n(shape.n())?;
        let mut memo = HashMap::new();
        let col = col_of_composition(shape.parts(), &mut memo);
        let col_of = Arc::try_unwrap(col).unwrap_or_else(|a| (*a).clone());
        Ok(Self {
            shape: shape.clone(),
            m: multinomial(shape.parts()) as usize,
            col_of,
        })
    }

    /// Builds `B_π` for an arbitrary `π` from the definition: row `σ` has its 1 in the
    /// column of `σ⁻¹(π)`.
    pub fn build_direct(pi: &OrderedSetPartition) -> Result<Self> {
        let n = pi.n();
        check_signal_n(n)?;
        let sizes = pi.sizes().to_vec();
        let mut word: Vec<u8> = (1..=n as u8).collect();
        let mut col_of = Vec::with_capacity(factorial(n) as usize);
        let mut mu = vec![0u8; n];
        loop {
            for p in 0..n {
                mu[p] = pi.row_word()[word[p] as usize - 1];
            }
            col_of.push(multiset_rank(&mu, &sizes) as u32);
            if !next_permutation(&mut word) {
                break;
            }
        }
        let shape =
            IntegerPartition::new(sizes.clone()).unwrap_or_else(|_| IntegerPartition::trivial(n));
        Ok(Self {
            shape,
            m: multinomial(&sizes) as usize,
            col_of,
        })
    }

    pub fn from_parts(shape: IntegerPartition, col_of: Vec<u32>) -> Result<Self> {
        let n = shape.n();
        if col_of.len() as u64 != factorial(n) {
            return Err(Error::SizeMismatch {
                expected: factorial(n) as usize,
                found: col_of.len(),
            });
        }
        let m = multinomial(shape.parts()) as usize;
        if col_of.iter().any(|&c| c as usize >= m) {
            return Err(Error::Cache("column index out of range".into()));
        }
        Ok(Self { shape, m, col_of })
    }

    pub fn shape(&self) -> &IntegerPartition {
        &self.shape
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn col_of(&self) -> &[u32] {
        &self.col_of
    }

    pub fn column_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.m];
        for &c in &self.col_of {
            counts[c as usize] += 1;
        }
        counts
    }

    /// `BᵀB` as exact integers.
    pub fn gram(&self) -> Vec<Vec<u64>> {
        let mut g = vec![vec![0u64; self.m]; self.m];
        for &c in &self.col_of {
            g[c as usize][c as usize] += 1;
        }
        g
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.col_of.len(), self.m);
        for (r, &c) in self.col_of.iter().enumerate() {
            b[(r, c as usize)] = 1.0;
        }
        b
    }
}

fn check_signal_n(n: usize) -> Result<()> {
    if n > MAX_SIGNAL_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_SIGNAL_N,
        });
    }
    Ok(())
}

fn col_of_composition(
    counts: &[usize],
    memo: &mut HashMap<Vec<usize>, Arc<Vec<u32>>>,
) -> Arc<Vec<u32>> {
    if let Some(c) = memo.get(counts) {
        return c.clone();
    }
    let n: usize = counts.iter().sum();
    let out = if n == 0 {
        vec![0u32]
    } else {
        let mut offsets = vec![0u64; counts.len()];
        let mut acc = 0u64;
        for j in 0..counts.len() {
            offsets[j] = acc;
            if counts[j] > 0 {
                let mut sub = counts.to_vec();
                sub[j] -= 1;
                acc += multinomial(&sub);
            }
        }
        let mut out = Vec::with_capacity(factorial(n) as usize);
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut sub = counts.to_vec();
            sub[j] -= 1;
            let block = col_of_composition(&sub, memo);
            for _ in 0..c {
                out.extend(block.iter().map(|&x| x + offsets[j] as u32));
            }
        }
        out
    };
    let out = Arc::new(out);
    memo.insert(counts.to_vec(), out.clone());
    out
}

/// A node of the breadth-first lifting tree over `Π̄_γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Canonical index of the vertex in `Π_γ`.
    pub vertex: u32,
    /// Index of the parent node; `None` at the root `π₁`.
    pub parent: Option<u32>,
    /// The transposition `(swap, swap+1)` leading from the parent, zero at the root.
    pub swap: u8,
}

/// Minimal paths from `π₁` to every `π̄ ∈ Π̄_γ`, stored as a tree in BFS order.
#[derive(Clone, Debug)]
pub struct LiftingTree {
    nodes: Vec<TreeNode>,
}

/// A minimal path `s_r ⋯ s_1(π₁) = π̄`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftingPath {
    pub target: OrderedSetPartition,
    pub target_index: u32,
    /// One-based `i` of each `(i, i+1)`, first applied first.
    pub swaps: Vec<u8>,
}

impl LiftingTree {
    /// Breadth-first search from `π₁` over the action of adjacent transpositions,
    /// restricted to `Π̄_γ`. Levels are processed in canonical index order and each
    /// vertex keeps the first parent (lowest index, then lowest `s`) that reaches it.
    pub fn build(graph: &SchreierGraph) -> Self {
        let n = graph.n();
        let reduced: Vec<bool> = graph.vertices().iter().map(|v| v.is_reduced()).collect();
        let mut node_of = vec![u32::MAX; graph.m()];
        let mut nodes = vec![TreeNode {
            vertex: 0,
            parent: None,
            swap: 0,
        }];
        node_of[0] = 0;
        let mut level = vec![0usize];
        while !level.is_empty() {
            let mut next = Vec::new();
            for &v in &level {
                for s in 1..n {
                    let u = graph.neighbor(v, s);
                    if reduced[u] && node_of[u] == u32::MAX {
                        node_of[u] = u32::MAX - 1;
                        next.push((u, node_of[v], s));
                    }
                }
            }
            next.sort_by_key(|&(u, _, _)| u);
            level.clear();
            for (u, parent, s) in next {
                node_of[u] = nodes.len() as u32;
                nodes.push(TreeNode {
                    vertex: u as u32,
                    parent: Some(parent),
                    swap: s as u8,
                });
                level.push(u);
            }
        }
        Self { nodes }
    }

    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.first().map(|r| r.parent.is_some() || r.vertex != 0) != Some(false) {
            return Err(Error::Cache("lifting tree must start at the root".into()));
        }
        for (i, node) in nodes.iter().enumerate().skip(1) {
            match node.parent {
                Some(p) if (p as usize) < i && node.swap > 0 => {}
                _ => return Err(Error::Cache(format!("lifting tree node {i} is malformed"))),
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self, node: usize) -> usize {
        let mut d = 0;
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            d += 1;
            cur = p as usize;
        }
        d
    }

    pub fn path(&self, node: usize, vertices: &[OrderedSetPartition]) -> LiftingPath {
        let mut swaps = Vec::new();
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            swaps.push(self.nodes[cur].swap);
            cur = p as usize;
        }
        swaps.reverse();
        let v = self.nodes[node].vertex;
        LiftingPath {
            target: vertices[v as usize].clone(),
            target_index: v,
            swaps,
        }
    }

    /// Children lists, each in node order.
    pub fn children(&self) -> Vec<Vec<u32>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                ch[p as usize].push(i as u32);
            }
        }
        ch
    }

    /// Nodes in depth-first preorder.
    pub fn preorder(&self) -> Vec<u32> {
        let children = self.children();
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(children[v as usize].iter().rev());
        }
        order
    }
}

/// The permutation `s_r ⋯ s_1` of a path.
pub fn path_permutation(n: usize, swaps: &[u8]) -> Permutation {
    swaps.iter().fold(Permutation::identity(n), |acc, &s| {
        Permutation::adjacent_swap(n, s as usize).compose(&acc)
    })
}

/// Per-swap index maps `P_s[rank τ] = rank(s∘τ)`: relabel candidates `s ↔ s+1`.
#[derive(Clone, Debug)]
pub struct SwapMaps {
    n: usize,
    maps: Vec<Vec<u32>>,
}

impl SwapMaps {
    pub fn build(n: usize) -> Result<Self> {
        check_signal_n(n)?;
        let total = factorial(n) as usize;
        let maps = (1..n)
            .into_par_iter()
            .map(|s| {
                let (a, b) = (s as u8, s as u8 + 1);
                let mut map = vec![0u32; total];
                map.par_chunks_mut(factorial(n.saturating_sub(1)).max(1) as usize)
                    .enumerate()
                    .for_each(|(block, out)| {
                        let mut word = vec![0u8; n];
                        crate::combinatorics::lex_unrank_into(
                            (block * out.len()) as u64,
                            &mut word,
                        );
                        let mut relabeled = word.clone();
                        for slot in out.iter_mut() {
                            for (dst, &w) in relabeled.iter_mut().zip(&word) {
                                *dst = if w == a {
                                    b
                                } else if w == b {
                                    a
                                } else {
                                    w
                                };
                            }
                            *slot = lex_rank_word(&relabeled) as u32;
                            next_permutation(&mut word);
                        }
                    });
                map
            })
            .collect();
        Ok(Self { n, maps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The map for `s = (i, i+1)`, one-based.
    pub fn map(&self, s: usize) -> &[u32] {
        &self.maps[s - 1]
    }

    /// `M_σ` for `σ = s_r ⋯ s_1`, with `M_σ[rank τ] = rank(στ)`, so that
    /// `(ρ_L(σ⁻¹)f)[r] = f[M_σ[r]]`.
    pub fn permutation_vector(&self, swaps: &[u8]) -> Vec<u32> {
        let mut map: Vec<u32> = (0..factorial(self.n) as u32).collect();
        for &s in swaps {
            compose_in_place(&mut map, self.map(s as usize));
        }
        map
    }
}

/// `map[r] ← swap[map[r]]`, extending a path by one left factor.
pub fn compose_in_place(map: &mut [u32], swap: &[u32]) {
    for x in map.iter_mut() {
        *x = swap[*x as usize];
    }
}

/// `out[M[r]] = x[colOf[r]]`: the lift `B_{π̄} x = ρ_L(σ) B_{π₁} x`.
pub fn lift(x: &[f64], map: &[u32], col_of: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; map.len()];
    for (&t, &c) in map.iter().zip(col_of) {
        out[t as usize] = x[c as usize];
    }
    out
}

/// `g[colOf[r]] += f[M[r]]`: the projection `B_{π̄}ᵀ f = B_{π₁}ᵀ ρ_L(σ⁻¹) f`.
pub fn project(f: &[f64], map: &[u32], col_of: &[u32], m: usize) -> Vec<f64> {
    let mut g = vec![0.0; m];
    for (&t, &c) in map.iter().zip(col_of) {
        g[c as usize] += f[t as usize];
    }
    g
}

/// The Laplacian of the permutahedron built directly as a Cayley graph:
/// `σ ~ σs` swaps adjacent ranking positions. Vertices are lexicographic ranks.
pub fn permutahedron_laplacian(n: usize) -> Result<DMatrix<f64>> {
    if n > 7 {
        return Err(Error::Resource(format!(
            "dense permutahedron for n = {n} is too large"
        )));
    }
    let total = factorial(n) as usize;
    let mut l = DMatrix::zeros(total, total);
    let mut word: Vec<u8> = (1..=n as u8).collect();
    for r in 0..total {
        for p in 0..n - 1 {
            let mut w = word.clone();
            w.swap(p, p + 1);
            let c = lex_rank_word(&w) as usize;
            l[(r, c)] -= 1.0;
            l[(r, r)] += 1.0;
        }
        next_permutation(&mut word);
    }
    Ok(l)
}

/// Row words of all vertices, used by serializers.
pub fn vertex_labels(shape: &IntegerPartition) -> Vec<String> {
    enumerate_row_words(shape.parts())
        .into_iter()
        .map(|w| {
            OrderedSetPartition::from_row_word(w)
                .map(|p| p.label())
                .unwrap_or_default()
        })
        .collect()
}
