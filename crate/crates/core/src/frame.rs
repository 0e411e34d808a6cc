//! Frame atoms, analysis, synthesis and energy decompositions.
//!
//! The atom `φ_{γ,λ,k,π̄} = c̄_γ B_{π̄} v_{γ,λ,k}` is never materialized during
//! analysis. Instead the signal is reordered along the lifting tree and projected
//! onto `Π_γ` once per `π̄`, after which every coefficient of that lifting is an
//! inner product of length `m_γ`.

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::combinatorics::{
    enumerate_ordered_set_partitions, factorial, h_n_shapes, next_permutation, IntegerPartition,
    OrderedSetPartition, Permutation, ShapeConstants,
};
use crate::error::{Error, Result};
use crate::schreier::{
    compose_in_place, lift, CharacteristicMatrix, LiftingTree, SchreierGraph, SwapMaps,
    MAX_SIGNAL_N,
};
use crate::spectral::{dominance_closure, reflect_key, solve_shapes, ShapeSpectrum};

/// Block length of the fixed summation tree used by every projection.
const BLOCK: usize = 1 << 16;

/// A real function on `S_n`, indexed by lexicographic rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    n: usize,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_SIGNAL_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_SIGNAL_N,
            });
        }
        let len = factorial(n) as usize;
        if values.len() != len {
            return Err(Error::SizeMismatch {
                expected: len,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("signal has non-finite entries".into()));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; factorial(n) as usize],
        }
    }

    pub fn delta(sigma: &Permutation) -> Self {
        let mut s = Self::zeros(sigma.n());
        s.values[sigma.lex_rank() as usize] = 1.0;
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `f̄(σ) = sign(σ) f(σ)`.
    pub fn sign_flipped(&self) -> Self {
        let mut out = self.clone();
        for (v, s) in out.values.iter_mut().zip(sign_vector(self.n)) {
            *v *= s;
        }
        out
    }
}

/// The sign of every permutation in lexicographic order.
pub fn sign_vector(n: usize) -> Vec<f64> {
    let mut word: Vec<u8> = (1..=n as u8).collect();
    let mut out = Vec::with_capacity(factorial(n) as usize);
    loop {
        let mut inv = 0;
        for i in 0..n {
            for j in i + 1..n {
                inv += (word[i] > word[j]) as usize;
            }
        }
        out.push(if inv % 2 == 0 { 1.0 } else { -1.0 });
        if !next_permutation(&mut word) {
            return out;
        }
    }
}

/// Everything the transform needs for one shape.
#[derive(Clone, Debug)]
pub struct ShapeBundle {
    pub shape: IntegerPartition,
    pub constants: ShapeConstants,
    pub vertices: Vec<OrderedSetPartition>,
    pub characteristic: CharacteristicMatrix,
    pub tree: LiftingTree,
    pub spectrum: ShapeSpectrum,
}

impl ShapeBundle {
    pub fn m(&self) -> usize {
        self.vertices.len()
    }

    /// Tree nodes ordered by the canonical index of their vertex.
    pub fn nodes_by_vertex(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.tree.len()).collect();
        order.sort_by_key(|&i| self.tree.nodes()[i].vertex);
        order
    }

    pub fn atom_count(&self) -> u64 {
        self.constants.d * self.constants.z
    }
}

/// Which shapes a transform covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShapeSelection {
    /// Every partition of `n`.
    All,
    /// `H_n`, or its first `k` shapes.
    H(Option<usize>),
    /// The given shapes and everything dominating them.
    Explicit(Vec<IntegerPartition>),
}

impl ShapeSelection {
    pub fn shapes(&self, n: usize) -> Vec<IntegerPartition> {
        match self {
            ShapeSelection::All => IntegerPartition::all(n),
            ShapeSelection::H(k) => h_n_shapes(n, *k),
            ShapeSelection::Explicit(list) => dominance_closure(list),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SetupOptions {
    pub selection: ShapeSelection,
    pub hook_fastpath: bool,
}

impl Default for SetupOptions {
    fn default() -> Self {
        Self {
            selection: ShapeSelection::H(None),
            hook_fastpath: false,
        }
    }
}

/// Wall-clock time of each setup phase.
#[derive(Clone, Debug, Default)]
pub struct SetupTimings {
    pub spectra: Duration,
    pub graphs_and_paths: Duration,
    pub characteristic: Duration,
}

/// How lifting reorderings are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    /// Store one index map per `π̄` of a shape.
    Cached,
    /// Keep one index map and update it along a depth-first walk of the lifting tree.
    Streamed,
}

/// Analysis restrictions.
#[derive(Clone, Debug, Default)]
pub struct AnalysisFilter {
    /// Keep the first `k` shapes of the transform.
    pub top_shapes: Option<usize>,
    /// Keep only these shapes.
    pub shapes: Option<Vec<IntegerPartition>>,
    /// Keep the first `M` eigenvectors of each shape in `(λ, k)` order.
    pub max_eigs: Option<usize>,
}

impl AnalysisFilter {
    pub fn shape(shape: &IntegerPartition) -> Self {
        Self {
            shapes: Some(vec![shape.clone()]),
            ..Self::default()
        }
    }
}

/// One analysis coefficient `α_{γ,λ,k,π̄}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub shape: IntegerPartition,
    pub lambda: f64,
    pub key: i64,
    pub k: usize,
    pub lifting: OrderedSetPartition,
    pub alpha: f64,
}

/// Identifies one frame atom.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomId {
    pub shape: IntegerPartition,
    pub key: i64,
    pub k: usize,
    pub lifting: OrderedSetPartition,
}

/// Coefficients ordered by shape, `λ`, `k` and canonical lifting order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientTable {
    pub n: usize,
    pub rows: Vec<Coefficient>,
    pub dataset: Option<String>,
    pub shapes: Vec<IntegerPartition>,
    pub max_eigs: Option<usize>,
}

impl CoefficientTable {
    pub fn energy(&self) -> f64 {
        self.rows.iter().map(|r| r.alpha * r.alpha).sum()
    }

    /// Rows sorted by decreasing `|α|`, ties kept in table order.
    pub fn top(&self, k: usize) -> Vec<&Coefficient> {
        let mut rows: Vec<&Coefficient> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.alpha.abs().total_cmp(&a.alpha.abs()));
        rows.truncate(k);
        rows
    }
}

/// Energy carried by one `(γ, λ)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyRow {
    pub shape: IntegerPartition,
    pub lambda: f64,
    pub key: i64,
    pub energy: f64,
    /// False when obtained through the conjugate-shape sign trick.
    pub direct: bool,
}

/// Groups `α²` by `(γ, λ)` in table order.
pub fn energy_table(table: &CoefficientTable) -> Vec<EnergyRow> {
    let mut out: Vec<EnergyRow> = Vec::new();
    for r in &table.rows {
        match out.last_mut() {
            Some(e) if e.shape == r.shape && e.key == r.key => e.energy += r.alpha * r.alpha,
            _ => out.push(EnergyRow {
                shape: r.shape.clone(),
                lambda: r.lambda,
                key: r.key,
                energy: r.alpha * r.alpha,
                direct: true,
            }),
        }
    }
    out
}

/// Per-shape totals `‖f_γ‖²` in row order.
pub fn shape_energies(rows: &[EnergyRow]) -> Vec<(IntegerPartition, f64)> {
    let mut out: Vec<(IntegerPartition, f64)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((s, e)) if *s == r.shape => *e += r.energy,
            _ => out.push((r.shape.clone(), r.energy)),
        }
    }
    out
}

/// `f̂(λ) = ‖f_λ‖`, merging shapes that share an eigenvalue key. Rows are
/// `(key, λ, norm)` ascending in `λ`.
pub fn graph_fourier(rows: &[EnergyRow]) -> Vec<(i64, f64, f64)> {
    let mut acc: Vec<(i64, f64, f64)> = Vec::new();
    let mut sorted: Vec<&EnergyRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.key);
    for r in sorted {
        match acc.last_mut() {
            Some(a) if a.0 == r.key => a.2 += r.energy,
            _ => acc.push((r.key, r.lambda, r.energy)),
        }
    }
    acc.into_iter().map(|(k, l, e)| (k, l, e.sqrt())).collect()
}

/// The transform for one `n`: bundles in descending lexicographic shape order.
#[derive(Debug)]
pub struct Transform {
    n: usize,
    bundles: Vec<ShapeBundle>,
    swaps: OnceLock<SwapMaps>,
}

impl Transform {
    /// Runs the setup: spectra, graphs and lifting trees, characteristic matrices.
    pub fn setup(n: usize, options: &SetupOptions) -> Result<(Self, SetupTimings)> {
        if n == 0 || n > MAX_SIGNAL_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_SIGNAL_N,
            });
        }
        let shapes = options.selection.shapes(n);
        let mut timings = SetupTimings::default();

        let t = Instant::now();
        let spectra = solve_shapes(&shapes, options.hook_fastpath)?;
        timings.spectra = t.elapsed();

        let t = Instant::now();
        let trees: Vec<(Vec<OrderedSetPartition>, LiftingTree)> = shapes
            .par_iter()
            .map(|s| {
                let graph = SchreierGraph::build(s);
                let tree = LiftingTree::build(&graph);
                (graph.vertices().to_vec(), tree)
            })
            .collect();
        timings.graphs_and_paths = t.elapsed();

        let t = Instant::now();
        let chars: Vec<CharacteristicMatrix> = shapes
            .par_iter()
            .map(CharacteristicMatrix::build)
            .collect::<Result<Vec<_>>>()?;
        timings.characteristic = t.elapsed();

        let bundles = shapes
            .into_iter()
            .zip(spectra)
            .zip(trees)
            .zip(chars)
            .map(
                |(((shape, spectrum), (vertices, tree)), characteristic)| ShapeBundle {
                    constants: shape.constants(),
                    shape,
                    vertices,
                    characteristic,
                    tree,
                    spectrum,
                },
            )
            .collect();
        Ok((Self::from_bundles(n, bundles)?, timings))
    }

    pub fn from_bundles(n: usize, mut bundles: Vec<ShapeBundle>) -> Result<Self> {
        for b in &bundles {
            if b.shape.n() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: b.shape.n(),
                });
            }
        }
        bundles.sort_by(|a, b| b.shape.cmp(&a.shape));
        Ok(Self {
            n,
            bundles,
            swaps: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bundles(&self) -> &[ShapeBundle] {
        &self.bundles
    }

    pub fn bundle(&self, shape: &IntegerPartition) -> Result<&ShapeBundle> {
        self.bundles
            .iter()
            .find(|b| b.shape == *shape)
            .ok_or_else(|| Error::UnknownShape(shape.to_string()))
    }

    pub fn atom_count(&self) -> u64 {
        self.bundles.iter().map(|b| b.atom_count()).sum()
    }

    /// Atoms kept when each shape contributes only its first `max_eigs` eigenvectors.
    pub fn atom_count_limited(&self, max_eigs: usize) -> u64 {
        self.bundles
            .iter()
            .map(|b| b.constants.d.min(max_eigs as u64) * b.constants.z)
            .sum()
    }

    /// Bytes needed to hold every index map of the largest shape at once.
    pub fn cached_bytes(&self) -> u64 {
        self.bundles
            .iter()
            .map(|b| b.constants.z)
            .max()
            .unwrap_or(0)
            * factorial(self.n)
            * 4
    }

    pub fn swap_maps(&self) -> &SwapMaps {
        self.swaps
            .get_or_init(|| SwapMaps::build(self.n).expect("n checked at construction"))
    }

    fn selected(&self, filter: &AnalysisFilter) -> Result<Vec<&ShapeBundle>> {
        let mut out: Vec<&ShapeBundle> = self.bundles.iter().collect();
        if let Some(k) = filter.top_shapes {
            out.truncate(k);
        }
        if let Some(list) = &filter.shapes {
            for s in list {
                self.bundle(s)?;
            }
            out.retain(|b| list.contains(&b.shape));
        }
        Ok(out)
    }

    fn check_signal(&self, f: &Signal) -> Result<()> {
        if f.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: f.n(),
            });
        }
        Ok(())
    }

    /// Index maps `M_σ` for every tree node of a shape.
    fn node_maps(&self, bundle: &ShapeBundle) -> Vec<Vec<u32>> {
        let swaps = self.swap_maps();
        let mut maps: Vec<Vec<u32>> = Vec::with_capacity(bundle.tree.len());
        for node in bundle.tree.nodes() {
            let map = match node.parent {
                None => (0..factorial(self.n) as u32).collect(),
                Some(p) => {
                    let mut m = maps[p as usize].clone();
                    compose_in_place(&mut m, swaps.map(node.swap as usize));
                    m
                }
            };
            maps.push(map);
        }
        maps
    }

    /// `B_{π̄}ᵀ f` for every tree node of a shape.
    fn project_nodes(&self, bundle: &ShapeBundle, f: &[f64], mode: ExecMode) -> Vec<Vec<f64>> {
        let m = bundle.m();
        let col = bundle.characteristic.col_of();
        let total = f.len();
        let blocks: Vec<(usize, usize)> = (0..total)
            .step_by(BLOCK)
            .map(|s| (s, (s + BLOCK).min(total)))
            .collect();
        let z = bundle.tree.len();
        match mode {
            ExecMode::Cached => {
                let maps = self.node_maps(bundle);
                maps.par_iter()
                    .map(|map| {
                        let mut g = vec![0.0; m];
                        for &(lo, hi) in &blocks {
                            let mut part = vec![0.0; m];
                            for r in lo..hi {
                                part[col[r] as usize] += f[map[r] as usize];
                            }
                            g.iter_mut().zip(&part).for_each(|(a, b)| *a += b);
                        }
                        g
                    })
                    .collect()
            }
            ExecMode::Streamed => {
                let children = bundle.tree.children();
                let swaps = self.swap_maps();
                let partials: Vec<Vec<Vec<f64>>> = blocks
                    .par_iter()
                    .map(|&(lo, hi)| {
                        let mut map: Vec<u32> = (lo as u32..hi as u32).collect();
                        let mut out = vec![Vec::new(); z];
                        let ctx = StreamCtx {
                            children: &children,
                            nodes: bundle.tree.nodes(),
                            swaps,
                            col: &col[lo..hi],
                            f,
                            m,
                        };
                        ctx.walk(0, &mut map, &mut out);
                        out
                    })
                    .collect();
                let mut g = vec![vec![0.0; m]; z];
                for part in partials {
                    for (acc, p) in g.iter_mut().zip(part) {
                        acc.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
                    }
                }
                g
            }
        }
    }

    /// Analysis coefficients of `f`.
    pub fn analyze(
        &self,
        f: &Signal,
        filter: &AnalysisFilter,
        mode: ExecMode,
    ) -> Result<CoefficientTable> {
        self.check_signal(f)?;
        let selected = self.selected(filter)?;
        let per_shape: Vec<Vec<Coefficient>> = selected
            .iter()
            .map(|b| {
                let g = self.project_nodes(b, f.values(), mode);
                let order = b.nodes_by_vertex();
                let mut rows = Vec::new();
                let eigs = b
                    .spectrum
                    .eigenvectors()
                    .take(filter.max_eigs.unwrap_or(usize::MAX));
                for (lambda, key, k, v) in eigs {
                    for &node in &order {
                        let alpha = b.constants.c_bar * dot(&g[node], v);
                        let lifting = b.vertices[b.tree.nodes()[node].vertex as usize].clone();
                        rows.push(Coefficient {
                            shape: b.shape.clone(),
                            lambda,
                            key,
                            k,
                            lifting,
                            alpha,
                        });
                    }
                }
                rows
            })
            .collect();
        Ok(CoefficientTable {
            n: self.n,
            rows: per_shape.into_iter().flatten().collect(),
            dataset: None,
            shapes: selected.iter().map(|b| b.shape.clone()).collect(),
            max_eigs: filter.max_eigs,
        })
    }

    /// `Σ α φ` over the rows of `table`.
    pub fn synthesize(&self, table: &CoefficientTable, mode: ExecMode) -> Result<Signal> {
        if table.n != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: table.n,
            });
        }
        let mut grouped: Vec<(&ShapeBundle, Vec<&Coefficient>)> = Vec::new();
        for r in &table.rows {
            let b = self.bundle(&r.shape)?;
            match grouped.iter_mut().find(|(gb, _)| gb.shape == b.shape) {
                Some((_, rows)) => rows.push(r),
                None => grouped.push((b, vec![r])),
            }
        }
        grouped.sort_by(|a, b| b.0.shape.cmp(&a.0.shape));
        let parts: Vec<Result<Vec<f64>>> = grouped
            .par_iter()
            .map(|(b, rows)| self.synthesize_shape(b, rows, mode))
            .collect();
        let mut out = vec![0.0; factorial(self.n) as usize];
        for p in parts {
            out.iter_mut().zip(p?).for_each(|(a, b)| *a += b);
        }
        Signal::new(self.n, out)
    }

    fn synthesize_shape(
        &self,
        b: &ShapeBundle,
        rows: &[&Coefficient],
        mode: ExecMode,
    ) -> Result<Vec<f64>> {
        let m = b.m();
        let node_of: HashMap<u32, usize> = b
            .tree
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, nd)| (nd.vertex, i))
            .collect();
        let eig_index: HashMap<(i64, usize), &[f64]> = b
            .spectrum
            .eigenvectors()
            .map(|(_, key, k, v)| ((key, k), v))
            .collect();
        let mut x = vec![vec![0.0; m]; b.tree.len()];
        for r in rows {
            let v = eig_index.get(&(r.key, r.k)).ok_or_else(|| {
                Error::UnknownShape(format!("{} λ={} k={}", r.shape, r.lambda, r.k))
            })?;
            let vertex = r.lifting.index() as u32;
            let node = *node_of
                .get(&vertex)
                .filter(|_| r.lifting.sizes() == b.shape.parts())
                .ok_or_else(|| {
                    Error::InvalidSetPartition(format!(
                        "{} is not a lifting of {}",
                        r.lifting, b.shape
                    ))
                })?;
            x[node]
                .iter_mut()
                .zip(v.iter())
                .for_each(|(a, c)| *a += r.alpha * c);
        }
        for xi in x.iter_mut() {
            xi.iter_mut().for_each(|a| *a *= b.constants.c_bar);
        }
        let col = b.characteristic.col_of();
        let mut out = vec![0.0; factorial(self.n) as usize];
        let order = b.tree.preorder();
        match mode {
            ExecMode::Cached => {
                let maps = self.node_maps(b);
                for &node in &order {
                    scatter(&mut out, &maps[node as usize], col, &x[node as usize]);
                }
            }
            ExecMode::Streamed => {
                let children = b.tree.children();
                let swaps = self.swap_maps();
                let mut map: Vec<u32> = (0..out.len() as u32).collect();
                let mut stack: Vec<(u32, bool)> = vec![(0, true)];
                while let Some((node, enter)) = stack.pop() {
                    let swap = b.tree.nodes()[node as usize].swap as usize;
                    if enter {
                        if node != 0 {
                            compose_in_place(&mut map, swaps.map(swap));
                        }
                        scatter(&mut out, &map, col, &x[node as usize]);
                        stack.push((node, false));
                        stack.extend(children[node as usize].iter().rev().map(|&c| (c, true)));
                    } else if node != 0 {
                        compose_in_place(&mut map, swaps.map(swap));
                    }
                }
            }
        }
        Ok(out)
    }

    /// The isotypic component `f_γ`.
    pub fn isotypic_project(
        &self,
        f: &Signal,
        shape: &IntegerPartition,
        mode: ExecMode,
    ) -> Result<Signal> {
        let table = self.analyze(f, &AnalysisFilter::shape(shape), mode)?;
        self.synthesize(&table, mode)
    }

    /// Energies of shape `γ` recovered from `γᵀ` through `‖f_{γ,λ}‖² = ‖f̄_{γᵀ,2(n-1)-λ}‖²`.
    pub fn conjugate_shape_energy(
        &self,
        f: &Signal,
        shape: &IntegerPartition,
        mode: ExecMode,
    ) -> Result<Vec<EnergyRow>> {
        self.check_signal(f)?;
        let conj = shape.transpose();
        self.bundle(&conj)?;
        let table = self.analyze(&f.sign_flipped(), &AnalysisFilter::shape(&conj), mode)?;
        let top = 2.0 * (self.n as f64 - 1.0);
        let mut rows: Vec<EnergyRow> = energy_table(&table)
            .into_iter()
            .map(|r| EnergyRow {
                shape: shape.clone(),
                lambda: top - r.lambda,
                key: reflect_key(r.key, self.n),
                energy: r.energy,
                direct: false,
            })
            .collect();
        rows.reverse();
        Ok(rows)
    }

    /// Energies for every shape of `n`: computed directly where available and through
    /// the conjugate trick otherwise. Shapes with neither are skipped.
    pub fn complete_energies(
        &self,
        f: &Signal,
        conjugates: bool,
        mode: ExecMode,
    ) -> Result<Vec<EnergyRow>> {
        let table = self.analyze(f, &AnalysisFilter::default(), mode)?;
        let mut rows = energy_table(&table);
        if conjugates {
            for s in IntegerPartition::all(self.n) {
                if self.bundle(&s).is_err() && self.bundle(&s.transpose()).is_ok() {
                    rows.extend(self.conjugate_shape_energy(f, &s, mode)?);
                }
            }
        }
        rows.sort_by(|a, b| b.shape.cmp(&a.shape).then(a.key.cmp(&b.key)));
        Ok(rows)
    }

    fn locate(&self, id: &AtomId) -> Result<(&ShapeBundle, &[f64], usize)> {
        let b = self.bundle(&id.shape)?;
        let v = b
            .spectrum
            .eigenvectors()
            .find(|(_, key, k, _)| *key == id.key && *k == id.k)
            .map(|(_, _, _, v)| v)
            .ok_or_else(|| {
                Error::UnknownShape(format!("{} key={} k={}", id.shape, id.key, id.k))
            })?;
        let node = b
            .tree
            .nodes()
            .iter()
            .position(|nd| {
                id.lifting.sizes() == b.shape.parts() && nd.vertex as u64 == id.lifting.index()
            })
            .ok_or_else(|| {
                Error::InvalidSetPartition(format!(
                    "{} is not a lifting of {}",
                    id.lifting, b.shape
                ))
            })?;
        Ok((b, v, node))
    }

    /// Materializes one atom `c̄_γ B_{π̄} v`.
    pub fn atom(&self, id: &AtomId) -> Result<Vec<f64>> {
        let (b, v, node) = self.locate(id)?;
        let path = b.tree.path(node, &b.vertices);
        let map = self.swap_maps().permutation_vector(&path.swaps);
        let mut out = lift(v, &map, b.characteristic.col_of());
        out.iter_mut().for_each(|x| *x *= b.constants.c_bar);
        Ok(out)
    }

    /// Every atom of the transform with its id, in table order.
    pub fn atoms(&self) -> Result<Vec<(AtomId, Vec<f64>)>> {
        let mut out = Vec::new();
        for b in &self.bundles {
            for (_, key, k, _) in b.spectrum.eigenvectors() {
                for node in b.nodes_by_vertex() {
                    let lifting = b.vertices[b.tree.nodes()[node].vertex as usize].clone();
                    let id = AtomId {
                        shape: b.shape.clone(),
                        key,
                        k,
                        lifting,
                    };
                    let atom = self.atom(&id)?;
                    out.push((id, atom));
                }
            }
        }
        Ok(out)
    }

    /// `⟨f, (δ_{π,ξ})_γ⟩ = (B_πᵀ f_γ)(ξ)` for all `π, ξ ∈ Π_γ`, rows indexed by `π`.
    pub fn mallows_baseline(
        &self,
        f: &Signal,
        shape: &IntegerPartition,
        mode: ExecMode,
    ) -> Result<DMatrix<f64>> {
        if self.n > 6 {
            return Err(Error::Resource(
                "the delta-projection baseline is limited to n ≤ 6".into(),
            ));
        }
        let fg = self.isotypic_project(f, shape, mode)?;
        let verts = enumerate_ordered_set_partitions(shape);
        let m = verts.len();
        let mut out = DMatrix::zeros(m, m);
        for (r, &value) in fg.values().iter().enumerate() {
            let sigma = Permutation::lex_unrank(r as u64, self.n);
            for (j, xi) in verts.iter().enumerate() {
                let pi = xi.act(&sigma)?;
                out[(pi.index() as usize, j)] += value;
            }
        }
        Ok(out)
    }

    /// Rank of the atoms `B_π v_{γ,λ,k}` over the standard ordered set partitions `π`.
    pub fn standard_basis_rank(
        &self,
        shape: &IntegerPartition,
        key: i64,
        k: usize,
    ) -> Result<usize> {
        if self.n > 7 {
            return Err(Error::Resource(
                "the standard basis check is limited to n ≤ 7".into(),
            ));
        }
        let b = self.bundle(shape)?;
        let v = b
            .spectrum
            .eigenvectors()
            .find(|(_, kk, kk2, _)| *kk == key && *kk2 == k)
            .map(|(_, _, _, v)| v)
            .ok_or_else(|| Error::UnknownShape(format!("{shape} key={key} k={k}")))?;
        let cols: Vec<Vec<f64>> = enumerate_ordered_set_partitions(shape)
            .into_iter()
            .filter(|p| p.is_standard())
            .map(|p| {
                CharacteristicMatrix::build_direct(&p)
                    .map(|c| c.col_of().iter().map(|&i| v[i as usize]).collect())
            })
            .collect::<Result<_>>()?;
        let gram = DMatrix::from_fn(cols.len(), cols.len(), |i, j| dot(&cols[i], &cols[j]));
        let eig = nalgebra::SymmetricEigen::new(gram);
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        Ok(eig
            .eigenvalues
            .iter()
            .filter(|&&x| x > 1e-9 * top.max(1.0))
            .count())
    }

    /// True when the standard-partition atoms span a space of dimension `d_γ`.
    pub fn standard_basis_check(
        &self,
        shape: &IntegerPartition,
        key: i64,
        k: usize,
    ) -> Result<bool> {
        Ok(self.standard_basis_rank(shape, key, k)? as u64 == shape.hook_dimension())
    }

    /// `B_πᵀ f` for an arbitrary `π ∈ Π_γ`.
    pub fn project_lifting(&self, f: &Signal, lifting: &OrderedSetPartition) -> Result<Vec<f64>> {
        self.check_signal(f)?;
        if lifting.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: lifting.n(),
            });
        }
        let shape = lifting.shape()?;
        let m = shape.constants().m as usize;
        let mut g = vec![0.0; m];
        let mut word: Vec<u8> = (1..=self.n as u8).collect();
        let mut mu = vec![0u8; self.n];
        for &value in f.values() {
            for p in 0..self.n {
                mu[p] = lifting.row_word()[word[p] as usize - 1];
            }
            g[crate::combinatorics::multiset_rank(&mu, lifting.sizes()) as usize] += value;
            next_permutation(&mut word);
        }
        Ok(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scatter(out: &mut [f64], map: &[u32], col: &[u32], x: &[f64]) {
    for (&t, &c) in map.iter().zip(col) {
        out[t as usize] += x[c as usize];
    }
}

struct StreamCtx<'a> {
    children: &'a [Vec<u32>],
    nodes: &'a [crate::schreier::TreeNode],
    swaps: &'a SwapMaps,
    col: &'a [u32],
    f: &'a [f64],
    m: usize,
}

impl StreamCtx<'_> {
    fn walk(&self, node: usize, map: &mut [u32], out: &mut [Vec<f64>]) {
        let mut g = vec![0.0; self.m];
        for (&t, &c) in map.iter().zip(self.col) {
            g[c as usize] += self.f[t as usize];
        }
        out[node] = g;
        for &child in &self.children[node] {
            let swap = self.swaps.map(self.nodes[child as usize].swap as usize);
            compose_in_place(map, swap);
            self.walk(child as usize, map, out);
            compose_in_place(map, swap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> IntegerPartition {
        IntegerPartition::new(parts.to_vec()).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> Signal {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let values = (0..factorial(n))
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 33) as f64 / (1u64 << 31) as f64) * 10.0
            })
            .collect();
        Signal::new(n, values).unwrap()
    }

    fn all(n: usize) -> Transform {
        Transform::setup(
            n,
            &SetupOptions {
                selection: ShapeSelection::All,
                hook_fastpath: false,
            },
        )
        .unwrap()
        .0
    }

    #[test]
    fn parseval_and_reconstruction() {
        for n in 2..=5 {
            let t = all(n);
            let f = pseudo_random(n, n as u64);
            for mode in [ExecMode::Cached, ExecMode::Streamed] {
                let table = t.analyze(&f, &AnalysisFilter::default(), mode).unwrap();
                assert_eq!(table.rows.len() as u64, t.atom_count());
                assert!((table.energy() / f.norm_sq() - 1.0).abs() < 1e-10);
                let rec = t.synthesize(&table, mode).unwrap();
                let err: f64 = rec
                    .values()
                    .iter()
                    .zip(f.values())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(err / f.norm_sq().sqrt() < 1e-10);
            }
        }
    }

    #[test]
    fn modes_are_bit_identical() {
        let t = all(5);
        let f = pseudo_random(5, 9);
        let a = t
            .analyze(&f, &AnalysisFilter::default(), ExecMode::Cached)
            .unwrap();
        let b = t
            .analyze(&f, &AnalysisFilter::default(), ExecMode::Streamed)
            .unwrap();
        assert_eq!(a, b);
        let ra = t.synthesize(&a, ExecMode::Cached).unwrap();
        let rb = t.synthesize(&a, ExecMode::Streamed).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn constant_and_delta_signals() {
        let n = 4;
        let t = all(n);
        let ones = Signal::new(n, vec![1.0; 24]).unwrap();
        let table = t
            .analyze(&ones, &AnalysisFilter::default(), ExecMode::Streamed)
            .unwrap();
        for r in &table.rows {
            if r.shape == p(&[4]) {
                assert!((r.alpha - 24f64.sqrt()).abs() < 1e-10);
            } else {
                assert!(r.alpha.abs() < 1e-10);
            }
        }
        let delta = Signal::delta(&Permutation::identity(n));
        let table = t
            .analyze(&delta, &AnalysisFilter::default(), ExecMode::Streamed)
            .unwrap();
        for r in &table.rows {
            let b = t.bundle(&r.shape).unwrap();
            let v = b
                .spectrum
                .eigenvectors()
                .find(|e| e.1 == r.key && e.2 == r.k)
                .unwrap()
                .3;
            assert!((r.alpha - b.constants.c_bar * v[r.lifting.index() as usize]).abs() < 1e-12);
        }
        let e: f64 = energy_table(&table).iter().map(|r| r.energy).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_analysis_matches_materialized_atoms() {
        let t = all(4);
        let f = pseudo_random(4, 3);
        let table = t
            .analyze(&f, &AnalysisFilter::default(), ExecMode::Cached)
            .unwrap();
        let atoms = t.atoms().unwrap();
        assert_eq!(atoms.len(), table.rows.len());
        for ((id, atom), row) in atoms.iter().zip(&table.rows) {
            assert_eq!(id.lifting, row.lifting);
            let alpha = dot(atom, f.values());
            assert!((alpha - row.alpha).abs() < 1e-12);
            let b = t.bundle(&id.shape).unwrap();
            // reduced atoms carry c̄; rescaled to c they have the equal norm d/m
            let c = &b.constants;
            let nsq = dot(atom, atom);
            assert!((nsq - c.d as f64 / c.z as f64).abs() < 1e-12);
            let full = nsq * (c.c / c.c_bar).powi(2);
            assert!((full - c.d as f64 / c.m as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn isotypic_projections_are_orthogonal_and_complete() {
        let n = 4;
        let t = all(n);
        let f = pseudo_random(n, 5);
        let parts: Vec<Signal> = t
            .bundles()
            .iter()
            .map(|b| {
                t.isotypic_project(&f, &b.shape, ExecMode::Streamed)
                    .unwrap()
            })
            .collect();
        let mut sum = [0.0; 24];
        for (i, a) in parts.iter().enumerate() {
            sum.iter_mut().zip(a.values()).for_each(|(s, x)| *s += x);
            for b in &parts[i + 1..] {
                assert!(dot(a.values(), b.values()).abs() < 1e-10);
            }
        }
        for (s, x) in sum.iter().zip(f.values()) {
            assert!((s - x).abs() < 1e-10);
        }
        // idempotent under re-analysis of the same shape
        let g = &parts[2];
        let again = t
            .isotypic_project(g, &t.bundles()[2].shape, ExecMode::Streamed)
            .unwrap();
        for (a, b) in again.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_filter_gives_mean() {
        let n = 4;
        let t = all(n);
        let f = pseudo_random(n, 8);
        let mean = f.sum() / 24.0;
        let fg = t.isotypic_project(&f, &p(&[4]), ExecMode::Cached).unwrap();
        assert!(fg.values().iter().all(|x| (x - mean).abs() < 1e-10));
    }

    #[test]
    fn linearity() {
        let t = all(4);
        let f = pseudo_random(4, 1);
        let g = pseudo_random(4, 2);
        let h = Signal::new(
            4,
            f.values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| 2.0 * a - 0.5 * b)
                .collect(),
        )
        .unwrap();
        let filter = AnalysisFilter::default();
        let (ta, tb, th) = (
            t.analyze(&f, &filter, ExecMode::Cached).unwrap(),
            t.analyze(&g, &filter, ExecMode::Cached).unwrap(),
            t.analyze(&h, &filter, ExecMode::Cached).unwrap(),
        );
        for ((a, b), c) in ta.rows.iter().zip(&tb.rows).zip(&th.rows) {
            assert!((2.0 * a.alpha - 0.5 * b.alpha - c.alpha).abs() < 1e-10);
        }
    }

    #[test]
    fn filters_limit_rows() {
        let t = all(5);
        let f = pseudo_random(5, 4);
        let filter = AnalysisFilter {
            max_eigs: Some(2),
            ..AnalysisFilter::default()
        };
        let table = t.analyze(&f, &filter, ExecMode::Cached).unwrap();
        assert_eq!(table.rows.len() as u64, t.atom_count_limited(2));
        let filter = AnalysisFilter {
            top_shapes: Some(3),
            ..AnalysisFilter::default()
        };
        assert_eq!(
            t.analyze(&f, &filter, ExecMode::Cached)
                .unwrap()
                .shapes
                .len(),
            3
        );
    }

    #[test]
    fn project_lifting_matches_tree_projection() {
        let t = all(5);
        let f = pseudo_random(5, 11);
        let b = t.bundle(&p(&[3, 2])).unwrap();
        let g = t.project_nodes(b, f.values(), ExecMode::Cached);
        for (node, nd) in b.tree.nodes().iter().enumerate() {
            let direct = t
                .project_lifting(&f, &b.vertices[nd.vertex as usize])
                .unwrap();
            for (a, c) in direct.iter().zip(&g[node]) {
                assert!((a - c).abs() < 1e-9);
            }
            assert!((direct.iter().sum::<f64>() - f.sum()).abs() < 1e-9);
        }
    }
}
