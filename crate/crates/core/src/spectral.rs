//! Eigenpairs of the irreducible part `V_γ*` of each Schreier graph.
//!
//! Shapes are solved in descending lexicographic order, which extends the
//! dominance order. For each shape the eigenvectors of every dominating shape
//! are lifted through every column-strict tableau, the lifted span is projected
//! out of the Laplacian, and the remaining `d_γ` eigenpairs are kept.
//! Degenerate eigenspaces receive a canonical basis and every vector is signed
//! so that its last nonzero vertex coefficient is positive.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::combinatorics::{
    column_strict_tableaux, enumerate_ordered_set_partitions, enumerate_row_words, multiset_rank,
    ColumnStrictTableau, IntegerPartition,
};
use crate::error::{Error, Result};
use crate::schreier::SchreierGraph;

/// Eigenvalues closer than this are merged into one eigenspace.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Eigenvalues of the deflated operator below this belong to the lifted span.
pub const ZERO_TOL: f64 = 1e-8;
/// Kept eigenvalues below this are reported as suspicious.
pub const WARN_TOL: f64 = 1e-4;
/// Eigenvalue keys are values rounded to this grid.
pub const KEY_SCALE: f64 = 1e6;
/// Largest Schreier graph handed to the dense solver.
pub const MAX_DENSE_M: usize = 6000;
/// Largest matrix accepted by the dense oracle.
pub const MAX_ORACLE_M: usize = 5040;

const SIGN_TOL: f64 = 1e-9;
const BASIS_TOL: f64 = 1e-4;
const RANK_TOL: f64 = 1e-6;

/// Canonical integer key of an eigenvalue, shared across shapes.
pub fn eigen_key(lambda: f64) -> i64 {
    (lambda * KEY_SCALE).round() as i64
}

/// Key of `2(n-1) - λ` given the key of `λ`.
pub fn reflect_key(key: i64, n: usize) -> i64 {
    2 * (n as i64 - 1) * KEY_SCALE as i64 - key
}

/// One eigenvalue of a shape with an orthonormal basis of its eigenspace in `V_γ*`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSpace {
    pub lambda: f64,
    pub key: i64,
    pub vectors: Vec<Vec<f64>>,
}

/// All eigenpairs of `V_γ*` inside `P_γ`, ascending in `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSpectrum {
    pub shape: IntegerPartition,
    pub m: usize,
    pub spaces: Vec<EigenSpace>,
    pub warnings: Vec<String>,
}

impl ShapeSpectrum {
    /// Groups flat `(λ, v)` pairs, already in `(λ, k)` order, into eigenspaces.
    pub fn from_flat(
        shape: IntegerPartition,
        m: usize,
        lambdas: &[f64],
        vectors: Vec<Vec<f64>>,
    ) -> Self {
        let mut spaces: Vec<EigenSpace> = Vec::new();
        for (&lambda, v) in lambdas.iter().zip(vectors) {
            let key = eigen_key(lambda);
            match spaces.last_mut() {
                Some(s) if s.key == key => s.vectors.push(v),
                _ => spaces.push(EigenSpace {
                    lambda,
                    key,
                    vectors: vec![v],
                }),
            }
        }
        Self {
            shape,
            m,
            spaces,
            warnings: Vec::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.spaces.iter().map(|s| s.vectors.len()).sum()
    }

    /// `(λ, key, k, v)` in `(λ, k)` order with one-based `k`.
    pub fn eigenvectors(&self) -> impl Iterator<Item = (f64, i64, usize, &[f64])> {
        self.spaces.iter().flat_map(|s| {
            s.vectors
                .iter()
                .enumerate()
                .map(move |(k, v)| (s.lambda, s.key, k + 1, v.as_slice()))
        })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.spaces.iter().map(|s| s.lambda).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spaces.first().map(|s| s.lambda).unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spaces.last().map(|s| s.lambda).unwrap_or(f64::NAN)
    }
}

/// Laplacian eigenpairs of the path graph on `n` vertices, `ℓ = 0..n-1`, unit norm.
pub fn path_eigenpairs(n: usize) -> Vec<(f64, Vec<f64>)> {
    let nf = n as f64;
    (0..n)
        .map(|l| {
            let lf = l as f64;
            let lambda = 2.0 - 2.0 * (std::f64::consts::PI * lf / nf).cos();
            let v = (1..=n)
                .map(|i| {
                    if l == 0 {
                        1.0 / nf.sqrt()
                    } else {
                        (2.0 / nf).sqrt()
                            * (std::f64::consts::PI * lf * (i as f64 - 0.5) / nf).cos()
                    }
                })
                .collect();
            (lambda, v)
        })
        .collect()
}

/// The lifting `T = B_ξᵀ B_{π₁}` from `R[Π_ν]` to `R[Π_γ]` for `ξ = ξ_T`, with unit
/// entries: row `μ` hits every `ρ` with `|μ_a ∩ ρ_b|` equal to the number of entries
/// `a` in row `b` of the tableau.
#[derive(Clone, Debug)]
pub struct LiftOperator {
    offsets: Vec<usize>,
    cols: Vec<u32>,
}

impl LiftOperator {
    pub fn new(tableau: &ColumnStrictTableau) -> Self {
        let nu = tableau.shape();
        let gamma = tableau.content();
        let counts: Vec<Vec<usize>> = (0..gamma.len())
            .map(|a| (0..nu.len()).map(|b| tableau.count(a, b)).collect())
            .collect();
        let labelings: Vec<Vec<Vec<u8>>> = counts.iter().map(|c| enumerate_row_words(c)).collect();
        let mut offsets = vec![0usize];
        let mut cols = Vec::new();
        let mut rho = vec![0u8; gamma.n()];
        for mu in enumerate_ordered_set_partitions(gamma) {
            let members = mu.blocks();
            let mut choice = vec![0usize; gamma.len()];
            loop {
                for a in 0..gamma.len() {
                    for (e, &b) in members[a].iter().zip(&labelings[a][choice[a]]) {
                        rho[e - 1] = b;
                    }
                }
                cols.push(multiset_rank(&rho, nu.parts()) as u32);
                let mut a = 0;
                while a < choice.len() {
                    choice[a] += 1;
                    if choice[a] < labelings[a].len() {
                        break;
                    }
                    choice[a] = 0;
                    a += 1;
                }
                if a == choice.len() {
                    break;
                }
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|r| {
                self.cols[self.offsets[r]..self.offsets[r + 1]]
                    .iter()
                    .map(|&c| x[c as usize])
                    .sum()
            })
            .collect()
    }
}

/// Lifts a vector on `Π_ν` into `Π_γ` through the tableau's `ξ_T`.
pub fn lift_between_shapes(tableau: &ColumnStrictTableau, x: &[f64]) -> Result<Vec<f64>> {
    let m_nu = tableau.shape().constants().m as usize;
    if x.len() != m_nu {
        return Err(Error::SizeMismatch {
            expected: m_nu,
            found: x.len(),
        });
    }
    Ok(LiftOperator::new(tableau).apply(x))
}

/// Flips `v` so its last coefficient above tolerance is positive.
pub fn sign_convention(v: &mut [f64]) {
    if let Some(&x) = v.iter().rev().find(|x| x.abs() > SIGN_TOL) {
        if x < 0.0 {
            v.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Canonical orthonormal basis of the span of orthonormal `u`: project the
/// standard basis vectors in vertex order and keep those with a clear residual.
pub fn canonical_basis(u: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if u.len() <= 1 {
        return Ok(u.to_vec());
    }
    let m = u[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(u.len());
    for j in 0..m {
        let mut w = vec![0.0; m];
        for v in u {
            let c = v[j];
            w.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
        }
        orthogonalize(&mut w, &basis);
        let nrm = norm(&w);
        if nrm > BASIS_TOL {
            w.iter_mut().for_each(|x| *x /= nrm);
            basis.push(w);
            if basis.len() == u.len() {
                return Ok(basis);
            }
        }
    }
    Err(Error::Numerical(format!(
        "canonical basis found {} of {} vectors",
        basis.len(),
        u.len()
    )))
}

/// Sorted eigenvalues grouped into `(first index, count)` runs.
pub fn cluster(values: &[f64]) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for i in 0..values.len() {
        match runs.last_mut() {
            Some((start, len)) if values[i] - values[*start + *len - 1] <= CLUSTER_TOL => *len += 1,
            _ => runs.push((i, 1)),
        }
    }
    runs
}

fn assemble(
    shape: &IntegerPartition,
    m: usize,
    pairs: Vec<(f64, Vec<f64>)>,
    warnings: Vec<String>,
) -> Result<ShapeSpectrum> {
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut spaces = Vec::new();
    for (start, len) in cluster(&values) {
        let lambda = values[start..start + len].iter().sum::<f64>() / len as f64;
        let raw: Vec<Vec<f64>> = pairs[start..start + len]
            .iter()
            .map(|p| p.1.clone())
            .collect();
        let mut vectors = canonical_basis(&raw)?;
        vectors.iter_mut().for_each(|v| sign_convention(v));
        spaces.push(EigenSpace {
            lambda,
            key: eigen_key(lambda),
            vectors,
        });
    }
    Ok(ShapeSpectrum {
        shape: shape.clone(),
        m,
        spaces,
        warnings,
    })
}

/// Solves `V_γ*` by deflating the lifted eigenvectors of all dominating shapes.
pub fn deflate_and_solve(
    graph: &SchreierGraph,
    dominators: &[&ShapeSpectrum],
) -> Result<ShapeSpectrum> {
    let gamma = graph.shape();
    let n = gamma.n();
    let m = graph.m();
    if m > MAX_DENSE_M {
        return Err(Error::Resource(format!(
            "shape {gamma} has {m} vertices, above the dense solver limit of {MAX_DENSE_M}"
        )));
    }
    let d = gamma.hook_dimension() as usize;
    let by_shape: HashMap<&IntegerPartition, &ShapeSpectrum> =
        dominators.iter().map(|s| (&s.shape, *s)).collect();

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m - d);
    for nu in IntegerPartition::all(n) {
        if !nu.dominates(gamma)? {
            continue;
        }
        let spec = by_shape
            .get(&nu)
            .ok_or_else(|| Error::MissingSpectrum(nu.to_string()))?;
        for t in column_strict_tableaux(&nu, gamma) {
            let op = LiftOperator::new(&t);
            for (_, _, _, x) in spec.eigenvectors() {
                let mut w = op.apply(x);
                let scale = norm(&w);
                orthogonalize(&mut w, &q);
                let nrm = norm(&w);
                if nrm > RANK_TOL * scale {
                    w.iter_mut().for_each(|y| *y /= nrm);
                    q.push(w);
                }
            }
        }
    }
    if q.len() != m - d {
        return Err(Error::Numerical(format!(
            "lifted span of {gamma} has rank {}, expected {}",
            q.len(),
            m - d
        )));
    }

    let l = graph.laplacian();
    let deflated = if q.is_empty() {
        l
    } else {
        let qm = DMatrix::from_fn(m, q.len(), |i, j| q[j][i]);
        let a = &l * &qm;
        let inner = qm.transpose() * &a;
        let mut p = &l - &qm * a.transpose() - &a * qm.transpose() + &qm * inner * qm.transpose();
        let sym = (&p + p.transpose()) * 0.5;
        p.copy_from(&sym);
        p
    };
    let eig = SymmetricEigen::new(deflated);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut warnings = Vec::new();
    let dropped = &order[..m - d];
    if let Some(&worst) = dropped.iter().max_by(|&&a, &&b| {
        eig.eigenvalues[a]
            .abs()
            .total_cmp(&eig.eigenvalues[b].abs())
    }) {
        let x = eig.eigenvalues[worst];
        if x.abs() > ZERO_TOL {
            warnings.push(format!(
                "{gamma}: deflated eigenvalue {x:e} exceeds the zero tolerance"
            ));
        }
    }
    let mut pairs = Vec::with_capacity(d);
    for &i in &order[m - d..] {
        let lambda = eig.eigenvalues[i];
        if gamma.len() > 1 && lambda <= ZERO_TOL {
            return Err(Error::Numerical(format!(
                "{gamma}: kept eigenvalue {lambda:e} is not separated from zero"
            )));
        }
        if gamma.len() > 1 && lambda < WARN_TOL {
            warnings.push(format!(
                "{gamma}: kept eigenvalue {lambda:e} is close to zero"
            ));
        }
        pairs.push((
            lambda.max(0.0),
            eig.eigenvectors.column(i).iter().copied().collect(),
        ));
    }
    assemble(gamma, m, pairs, warnings)
}

/// Restriction of `u_{i_1} ∧ ⋯ ∧ u_{i_k}` to the vertices of `Π_{[n-k,1^k]}`, unit norm,
/// with eigenvalue `Σ λ_{i_j}`. Vertex coordinates are the positions of the singletons.
pub fn hook_wedge_eigenvector(n: usize, indices: &[usize]) -> Result<(f64, Vec<f64>)> {
    let k = indices.len();
    if k >= n {
        return Err(Error::InvalidPartition(format!(
            "hook with {k} singleton rows needs n > {k}"
        )));
    }
    let mut seen = vec![false; n];
    for &i in indices {
        if i == 0 || i >= n || seen[i] {
            return Err(Error::InvalidPartition(format!(
                "wedge indices {indices:?} must be distinct in 1..{}",
                n - 1
            )));
        }
        seen[i] = true;
    }
    let mut parts = vec![n - k];
    parts.extend(std::iter::repeat_n(1, k));
    let shape = IntegerPartition::new(parts)?;
    let path = path_eigenpairs(n);
    let lambda = indices.iter().map(|&i| path[i].0).sum();
    let mut v: Vec<f64> = enumerate_ordered_set_partitions(&shape)
        .iter()
        .map(|pi| {
            let mut pos = vec![0usize; k];
            for (p, &r) in pi.row_word().iter().enumerate() {
                if r > 0 {
                    pos[r as usize - 1] = p;
                }
            }
            let mat = DMatrix::from_fn(k, k, |j, l| path[indices[l]].1[pos[j]]);
            if k == 0 {
                1.0
            } else {
                mat.determinant()
            }
        })
        .collect();
    let nrm = norm(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    Ok((lambda, v))
}

/// The spectrum of a hook shape from wedge products of path eigenvectors.
pub fn hook_spectrum(shape: &IntegerPartition) -> Result<ShapeSpectrum> {
    if !shape.is_hook() {
        return Err(Error::InvalidPartition(format!("{shape} is not a hook")));
    }
    let n = shape.n();
    let k = shape.len() - 1;
    let mut pairs = Vec::new();
    let mut subset: Vec<usize> = (1..=k).collect();
    loop {
        pairs.push(hook_wedge_eigenvector(n, &subset)?);
        // next k-subset of 1..n-1 in lexicographic order
        let mut i = k;
        while i > 0 && subset[i - 1] == n - 1 - (k - i) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = shape.constants().m as usize;
    assemble(shape, m, pairs, Vec::new())
}

/// Adds every dominating shape and sorts descending lexicographically.
pub fn dominance_closure(shapes: &[IntegerPartition]) -> Vec<IntegerPartition> {
    let mut out: Vec<IntegerPartition> = Vec::new();
    for s in shapes {
        for nu in IntegerPartition::all(s.n()) {
            if (nu == *s || nu.dominates(s).unwrap_or(false)) && !out.contains(&nu) {
                out.push(nu);
            }
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Solves a dominance-closed list of shapes, scheduling independent shapes in parallel.
/// Results follow the input order.
pub fn solve_shapes(
    shapes: &[IntegerPartition],
    hook_fastpath: bool,
) -> Result<Vec<ShapeSpectrum>> {
    let mut solved: HashMap<IntegerPartition, ShapeSpectrum> = HashMap::new();
    let mut pending: Vec<IntegerPartition> = shapes.to_vec();
    for s in shapes {
        for nu in IntegerPartition::all(s.n()) {
            if nu.dominates(s)? && !shapes.contains(&nu) {
                return Err(Error::MissingSpectrum(nu.to_string()));
            }
        }
        let m = s.constants().m;
        if m > MAX_DENSE_M as u64 && !(hook_fastpath && s.is_hook()) {
            return Err(Error::Resource(format!(
                "shape {s} has {m} Schreier vertices, above the dense solver limit of {MAX_DENSE_M}"
            )));
        }
    }
    while !pending.is_empty() {
        let (ready, rest): (Vec<_>, Vec<_>) = pending.into_iter().partition(|s| {
            IntegerPartition::all(s.n())
                .iter()
                .all(|nu| !nu.dominates(s).unwrap_or(false) || solved.contains_key(nu))
        });
        pending = rest;
        let results: Vec<Result<ShapeSpectrum>> = ready
            .par_iter()
            .map(|s| {
                if hook_fastpath && s.is_hook() {
                    hook_spectrum(s)
                } else {
                    let graph = SchreierGraph::build(s);
                    let doms: Vec<&ShapeSpectrum> = solved
                        .values()
                        .filter(|sp| sp.shape.dominates(s).unwrap_or(false))
                        .collect();
                    deflate_and_solve(&graph, &doms)
                }
            })
            .collect();
        for r in results {
            let spec = r?;
            solved.insert(spec.shape.clone(), spec);
        }
    }
    Ok(shapes
        .iter()
        .map(|s| solved.remove(s).expect("solved"))
        .collect())
}

/// Dense symmetric eigendecomposition, eigenvalues ascending with matching columns.
pub fn dense_eigen(l: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if l.nrows() > MAX_ORACLE_M {
        return Err(Error::Resource(format!(
            "dense oracle limited to {MAX_ORACLE_M} rows"
        )));
    }
    let eig = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..l.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(l.nrows(), l.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// One row of the dominance conjecture table.
#[derive(Clone, Debug)]
pub struct ConjectureRow {
    pub shape: IntegerPartition,
    pub min_eigenvalue: f64,
    /// Whether the value came from a direct solve or from the conjugate reflection.
    pub direct: bool,
}

/// Smallest eigenvalue per shape and the dominance pairs that violate monotonicity.
#[derive(Clone, Debug)]
pub struct ConjectureReport {
    pub n: usize,
    pub rows: Vec<ConjectureRow>,
    pub violations: Vec<(IntegerPartition, IntegerPartition)>,
}

impl fmt::Display for ConjectureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shape,min_lambda,source")?;
        for r in &self.rows {
            writeln!(
                f,
                "\"{}\",{:.6},{}",
                r.shape.label(),
                r.min_eigenvalue,
                if r.direct { "direct" } else { "conjugate" }
            )?;
        }
        for (nu, g) in &self.violations {
            writeln!(f, "# violation: {nu} dominates {g}")?;
        }
        Ok(())
    }
}

/// Checks `λ̃_ν < λ̃_γ` for every `ν ⊳ γ`. Shapes missing from `spectra` are filled in
/// through `Λ_{γᵀ} = 2(n-1) - Λ_γ`.
pub fn conjecture_report(n: usize, spectra: &[ShapeSpectrum]) -> Result<ConjectureReport> {
    let top = 2.0 * (n as f64 - 1.0);
    let mut rows = Vec::new();
    for g in IntegerPartition::all(n) {
        if let Some(s) = spectra.iter().find(|s| s.shape == g) {
            rows.push(ConjectureRow {
                shape: g,
                min_eigenvalue: s.min_eigenvalue(),
                direct: true,
            });
        } else if let Some(s) = spectra.iter().find(|s| s.shape == g.transpose()) {
            rows.push(ConjectureRow {
                shape: g,
                min_eigenvalue: top - s.max_eigenvalue(),
                direct: false,
            });
        } else {
            return Err(Error::MissingSpectrum(g.to_string()));
        }
    }
    let mut violations = Vec::new();
    for a in &rows {
        for b in &rows {
            if a.shape.dominates(&b.shape)? && a.min_eigenvalue >= b.min_eigenvalue - 1e-9 {
                violations.push((a.shape.clone(), b.shape.clone()));
            }
        }
    }
    Ok(ConjectureReport {
        n,
        rows,
        violations,
    })
}

/// Solves `H_n` and reports the dominance conjecture over all shapes of `n`.
pub fn verify_dominance_conjecture(n: usize) -> Result<ConjectureReport> {
    let shapes = crate::combinatorics::h_n_shapes(n, None);
    let spectra = solve_shapes(&shapes, false)?;
    conjecture_report(n, &spectra)
}
