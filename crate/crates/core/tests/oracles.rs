//! Checks against independent dense constructions on small `n`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rankframe::combinatorics::{
    enumerate_ordered_set_partitions, factorial, reduced_representatives, IntegerPartition,
    OrderedSetPartition, Permutation,
};
use rankframe::frame::{
    energy_table, AnalysisFilter, ExecMode, SetupOptions, ShapeSelection, Signal, Transform,
};
use rankframe::schreier::{lift, CharacteristicMatrix, LiftingTree, SchreierGraph};
use rankframe::spectral::eigen_key;

fn full(n: usize) -> Transform {
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

fn random_signal(n: usize, rng: &mut StdRng) -> Signal {
    Signal::new(
        n,
        (0..factorial(n))
            .map(|_| rng.gen_range(-5.0..5.0))
            .collect(),
    )
    .unwrap()
}

/// `L_{P_n}` from scratch: neighbors swap adjacent ranking positions.
fn permutahedron(n: usize) -> DMatrix<f64> {
    let total = factorial(n) as usize;
    let mut l = DMatrix::zeros(total, total);
    for r in 0..total {
        let p = Permutation::lex_unrank(r as u64, n);
        for i in 0..n - 1 {
            let mut w = p.word().to_vec();
            w.swap(i, i + 1);
            let c = Permutation::new(w).unwrap().lex_rank() as usize;
            l[(r, c)] -= 1.0;
            l[(r, r)] += 1.0;
        }
    }
    l
}

/// `(B_π)_{σ,ξ} = 1` when candidate `σ(p)` lies in block `ξ(p)` of `π` for every position `p`.
fn explicit_b(pi: &OrderedSetPartition) -> DMatrix<f64> {
    let n = pi.n();
    let verts = enumerate_ordered_set_partitions(&pi.shape().unwrap());
    let mut b = DMatrix::zeros(factorial(n) as usize, verts.len());
    for r in 0..factorial(n) as usize {
        let sigma = Permutation::lex_unrank(r as u64, n);
        let mu: Vec<u8> = sigma
            .word()
            .iter()
            .map(|&c| pi.row_word()[c as usize - 1])
            .collect();
        let col = verts
            .iter()
            .position(|v| v.row_word() == mu.as_slice())
            .unwrap();
        b[(r, col)] = 1.0;
    }
    b
}

fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-9 * top)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

fn clustered(values: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((last, count)) if (v - *last).abs() < 1e-8 => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[test]
fn pipeline_spectrum_matches_dense_permutahedron() {
    for n in [3, 4, 5] {
        let t = full(n);
        let mut pipeline: BTreeMap<i64, usize> = BTreeMap::new();
        for b in t.bundles() {
            for s in &b.spectrum.spaces {
                *pipeline.entry(s.key).or_default() += b.constants.d as usize * s.vectors.len();
            }
        }
        let eig = SymmetricEigen::new(permutahedron(n));
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        let dense: BTreeMap<i64, usize> = clustered(&values)
            .into_iter()
            .map(|(v, c)| (eigen_key(v), c))
            .collect();
        assert_eq!(pipeline, dense, "n = {n}");
    }
}

#[test]
fn equitable_partition_intertwines_laplacians() {
    for n in 2..=5 {
        let lp = permutahedron(n);
        for shape in IntegerPartition::all(n) {
            let graph = SchreierGraph::build(&shape);
            let b = CharacteristicMatrix::build(&shape).unwrap().dense();
            assert_eq!(
                b,
                explicit_b(&OrderedSetPartition::reading_order(shape.parts())),
                "{shape}"
            );
            let diff = &lp * &b - &b * graph.laplacian();
            assert!(diff.amax() < 1e-12, "{shape}");
        }
    }
}

#[test]
fn quotient_graph_is_the_schreier_graph() {
    for n in 2..=5 {
        for shape in IntegerPartition::all(n) {
            let graph = SchreierGraph::build(&shape);
            let col = CharacteristicMatrix::build(&shape).unwrap();
            let col = col.col_of();
            let a = graph.adjacency();
            for r in 0..factorial(n) as usize {
                let p = Permutation::lex_unrank(r as u64, n);
                let mut counts = vec![0.0; graph.m()];
                for i in 0..n - 1 {
                    let mut w = p.word().to_vec();
                    w.swap(i, i + 1);
                    counts[col[Permutation::new(w).unwrap().lex_rank() as usize] as usize] += 1.0;
                }
                let class = col[r] as usize;
                for (j, &c) in counts.iter().enumerate() {
                    assert_eq!(c, a[(class, j)], "{shape} vertex {r}");
                }
            }
        }
    }
}

#[test]
fn characteristic_gram_is_scaled_identity() {
    for n in 1..=6 {
        for shape in IntegerPartition::all(n) {
            let c = CharacteristicMatrix::build(&shape).unwrap();
            let expected = factorial(n) / c.m() as u64;
            for (i, row) in c.gram().iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    assert_eq!(x, if i == j { expected } else { 0 }, "{shape}");
                }
            }
        }
    }
}

#[test]
fn left_action_permutes_rows_of_characteristic_matrix() {
    for n in 2..=5 {
        for shape in IntegerPartition::all(n) {
            let pi1 = OrderedSetPartition::reading_order(shape.parts());
            let base = CharacteristicMatrix::build_direct(&pi1).unwrap();
            for s in 0..factorial(n) {
                let sigma = Permutation::lex_unrank(s, n);
                let moved = CharacteristicMatrix::build_direct(&pi1.act(&sigma).unwrap()).unwrap();
                let inv = sigma.inverse();
                for r in 0..factorial(n) {
                    let tau = Permutation::lex_unrank(r, n);
                    let source = inv.compose(&tau).lex_rank() as usize;
                    assert_eq!(
                        moved.col_of()[r as usize],
                        base.col_of()[source],
                        "{shape} σ = {sigma}"
                    );
                }
            }
        }
    }
}

#[test]
fn swapping_equal_rows_flips_sign_by_row_length() {
    let mut rng = StdRng::seed_from_u64(11);
    for n in 2..=5 {
        let t = full(n);
        for b in t.bundles() {
            let parts = b.shape.parts();
            for a in 0..parts.len().saturating_sub(1) {
                if parts[a] != parts[a + 1] {
                    continue;
                }
                let sign = if parts[a] % 2 == 0 { 1.0 } else { -1.0 };
                for _ in 0..4 {
                    let sigma = Permutation::lex_unrank(rng.gen_range(0..factorial(n)), n);
                    let pi = OrderedSetPartition::reading_order(parts)
                        .act(&sigma)
                        .unwrap();
                    let swapped = pi.swap_blocks(a, a + 1).unwrap();
                    let id: Vec<u32> = (0..factorial(n) as u32).collect();
                    let cp = CharacteristicMatrix::build_direct(&pi).unwrap();
                    let cs = CharacteristicMatrix::build_direct(&swapped).unwrap();
                    for (_, _, _, v) in b.spectrum.eigenvectors() {
                        let x = lift(v, &id, cp.col_of());
                        let y = lift(v, &id, cs.col_of());
                        for (p, q) in x.iter().zip(&y) {
                            assert!(
                                (p - sign * q).abs() < 1e-10,
                                "{} rows {a},{}",
                                b.shape,
                                a + 1
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn minimal_paths_have_inversion_length() {
    for n in 1..=6 {
        for shape in IntegerPartition::all(n) {
            let graph = SchreierGraph::build(&shape);
            let tree = LiftingTree::build(&graph);
            let reduced = reduced_representatives(&shape);
            assert_eq!(tree.len(), reduced.len(), "{shape}");
            for (i, node) in tree.nodes().iter().enumerate() {
                let v = &graph.vertices()[node.vertex as usize];
                assert!(v.is_reduced());
                assert_eq!(tree.depth(i), v.inversions(), "{shape} {v}");
            }
        }
    }
}

#[test]
fn every_atom_is_a_permutahedron_eigenvector() {
    for n in 3..=5 {
        let lp = permutahedron(n);
        let t = full(n);
        for (id, atom) in t.atoms().unwrap() {
            let phi = DVector::from_vec(atom);
            let b = t.bundle(&id.shape).unwrap();
            let lambda = b
                .spectrum
                .spaces
                .iter()
                .find(|s| s.key == id.key)
                .unwrap()
                .lambda;
            let lphi = &lp * &phi;
            assert!(
                (&lphi - lambda * &phi).norm() < 1e-8,
                "{} λ = {lambda}",
                id.shape
            );
            let rayleigh = phi.dot(&lphi) / phi.dot(&phi);
            assert!((rayleigh - lambda).abs() < 1e-8);
            let c = b.constants;
            assert!((phi.norm_squared() - c.d as f64 / c.z as f64).abs() < 1e-12);
        }
    }
}

/// Orthonormal bases of `W_γ` for every shape, from spans of characteristic matrices.
fn isotypic_bases(n: usize) -> Vec<(IntegerPartition, DMatrix<f64>)> {
    let shapes = IntegerPartition::all(n);
    let spans: Vec<DMatrix<f64>> = shapes
        .iter()
        .map(|s| {
            let blocks: Vec<DMatrix<f64>> = enumerate_ordered_set_partitions(s)
                .iter()
                .map(explicit_b)
                .collect();
            let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
            let mut all = DMatrix::zeros(factorial(n) as usize, cols);
            let mut at = 0;
            for b in &blocks {
                all.columns_mut(at, b.ncols()).copy_from(b);
                at += b.ncols();
            }
            orthonormal_columns(&all)
        })
        .collect();
    let total = factorial(n) as usize;
    shapes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let dominators: Vec<&DMatrix<f64>> = shapes
                .iter()
                .zip(&spans)
                .filter(|(o, _)| o.dominates(s).unwrap())
                .map(|(_, b)| b)
                .collect();
            let mut proj = DMatrix::<f64>::identity(total, total);
            if !dominators.is_empty() {
                let cols: usize = dominators.iter().map(|b| b.ncols()).sum();
                let mut all = DMatrix::zeros(total, cols);
                let mut at = 0;
                for b in &dominators {
                    all.columns_mut(at, b.ncols()).copy_from(b);
                    at += b.ncols();
                }
                let q = orthonormal_columns(&all);
                proj -= &q * q.transpose();
            }
            let w = orthonormal_columns(&(proj * &spans[i]));
            let d = s.hook_dimension() as usize;
            assert_eq!(w.ncols(), d * d, "{s}");
            (s.clone(), w)
        })
        .collect()
}

#[test]
fn energies_match_isotypic_and_eigenspace_projections() {
    let n = 4;
    let t = full(n);
    let eig = SymmetricEigen::new(permutahedron(n));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let bases = isotypic_bases(n);
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..5 {
        let f = random_signal(n, &mut rng);
        let fv = DVector::from_column_slice(f.values());
        let table = t
            .analyze(&f, &AnalysisFilter::default(), ExecMode::Cached)
            .unwrap();
        for row in energy_table(&table) {
            let w = &bases.iter().find(|(s, _)| *s == row.shape).unwrap().1;
            let fw = w * (w.transpose() * &fv);
            let mut energy = 0.0;
            for &i in &order {
                if (eig.eigenvalues[i] - row.lambda).abs() < 1e-8 {
                    energy += eig.eigenvectors.column(i).dot(&fw).powi(2);
                }
            }
            assert!(
                (energy - row.energy).abs() < 1e-9,
                "{} λ = {}",
                row.shape,
                row.lambda
            );
        }
    }
}

#[test]
fn delta_projection_baseline_matches_isotypic_projector() {
    let n = 4;
    let t = full(n);
    let bases = isotypic_bases(n);
    let mut rng = StdRng::seed_from_u64(8);
    let f = random_signal(n, &mut rng);
    let fv = DVector::from_column_slice(f.values());
    for (shape, w) in &bases {
        let baseline = t.mallows_baseline(&f, shape, ExecMode::Streamed).unwrap();
        let fw = w * (w.transpose() * &fv);
        let verts = enumerate_ordered_set_partitions(shape);
        for (i, pi) in verts.iter().enumerate() {
            for (j, xi) in verts.iter().enumerate() {
                let mut value = 0.0;
                for r in 0..factorial(n) {
                    let sigma = Permutation::lex_unrank(r, n);
                    if xi.act(&sigma).unwrap() == *pi {
                        value += fw[r as usize];
                    }
                }
                assert!((baseline[(i, j)] - value).abs() < 1e-9, "{shape}");
            }
        }
    }
}

#[test]
fn standard_partitions_span_each_eigenvector_orbit() {
    for n in 2..=5 {
        let t = full(n);
        for b in t.bundles() {
            for (_, key, k, _) in b.spectrum.eigenvectors() {
                assert!(
                    t.standard_basis_check(&b.shape, key, k).unwrap(),
                    "{} key {key} k {k}",
                    b.shape
                );
            }
        }
    }
}

#[test]
fn conjugate_trick_matches_direct_energies() {
    let n = 5;
    let t = full(n);
    let mut rng = StdRng::seed_from_u64(3);
    let f = random_signal(n, &mut rng);
    let direct = energy_table(
        &t.analyze(&f, &AnalysisFilter::default(), ExecMode::Cached)
            .unwrap(),
    );
    for shape in IntegerPartition::all(n) {
        let via = t
            .conjugate_shape_energy(&f, &shape, ExecMode::Cached)
            .unwrap();
        let own: Vec<_> = direct.iter().filter(|r| r.shape == shape).collect();
        assert_eq!(via.len(), own.len(), "{shape}");
        for (a, b) in via.iter().zip(own) {
            assert_eq!(a.key, b.key);
            assert!((a.energy - b.energy).abs() < 1e-9, "{shape}");
        }
    }
}

#[test]
fn first_hook_coefficients_are_cosine_weighted_borda_scores() {
    let n = 5;
    let t = Transform::setup(
        n,
        &SetupOptions {
            selection: ShapeSelection::H(Some(2)),
            hook_fastpath: false,
        },
    )
    .unwrap()
    .0;
    let shape = IntegerPartition::new(vec![n - 1, 1]).unwrap();
    let c_bar = shape.constants().c_bar;
    let mut rng = StdRng::seed_from_u64(21);
    let f = Signal::new(
        n,
        (0..factorial(n))
            .map(|_| rng.gen_range(0..40) as f64)
            .collect(),
    )
    .unwrap();
    let filter = AnalysisFilter {
        shapes: Some(vec![shape.clone()]),
        max_eigs: Some(1),
        ..Default::default()
    };
    let table = t.analyze(&f, &filter, ExecMode::Cached).unwrap();
    assert_eq!(table.rows.len(), n);
    let weight = |p: usize| {
        (std::f64::consts::PI * (2 * p + 1) as f64 / (2 * n) as f64).cos() * (2.0 / n as f64).sqrt()
    };
    let borda: Vec<f64> = (1..=n)
        .map(|z| {
            (0..factorial(n))
                .map(|r| {
                    let sigma = Permutation::lex_unrank(r, n);
                    let p = sigma.word().iter().position(|&c| c as usize == z).unwrap();
                    f.values()[r as usize] * weight(p)
                })
                .sum::<f64>()
                * c_bar
        })
        .collect();
    let mut sign = 0.0;
    for row in &table.rows {
        let z = row.lifting.blocks()[1][0];
        if sign == 0.0 {
            sign = if row.alpha * borda[z - 1] >= 0.0 {
                1.0
            } else {
                -1.0
            };
        }
        assert!(
            (row.alpha - sign * borda[z - 1]).abs() < 1e-9,
            "candidate {z}"
        );
    }
    let mut by_alpha: Vec<usize> = table
        .rows
        .iter()
        .map(|r| r.lifting.blocks()[1][0])
        .collect();
    by_alpha.sort_by(|&a, &b| {
        let ra = table
            .rows
            .iter()
            .find(|r| r.lifting.blocks()[1][0] == a)
            .unwrap()
            .alpha
            * sign;
        let rb = table
            .rows
            .iter()
            .find(|r| r.lifting.blocks()[1][0] == b)
            .unwrap()
            .alpha
            * sign;
        rb.total_cmp(&ra)
    });
    let mut by_borda: Vec<usize> = (1..=n).collect();
    by_borda.sort_by(|&a, &b| borda[b - 1].total_cmp(&borda[a - 1]));
    assert_eq!(by_alpha, by_borda);
}
