//! Tight spectral Parseval frames for ranked data.
//!
//! A signal on the symmetric group `S_n` (for example vote tallies over full
//! rankings) is decomposed into analysis coefficients indexed by a shape
//! `γ ⊢ n`, a Laplacian eigenvalue `λ` of the permutahedron, a multiplicity
//! index `k` and a reduced ordered set partition `π̄`. The frame is built from
//! eigenvectors of small Schreier graphs lifted to the permutahedron, so the
//! analysis never materializes an `n!`-length atom.
//!
//! Modules:
//! - [`combinatorics`]: permutations, partitions, ordered set partitions, tableaux.
//! - [`schreier`]: Schreier graphs, characteristic matrices, lifting paths.
//! - [`spectral`]: eigenpairs of the irreducible part of each Schreier graph.
//! - [`frame`]: analysis, synthesis, energies and related projections.
//! - [`ballots`]: ballot file parsing and tallying.
//! - [`cache`]: on-disk setup cache.

pub mod ballots;
pub mod cache;
pub mod combinatorics;
pub mod error;
pub mod frame;
pub mod schreier;
pub mod spectral;

pub use error::{Error, Result};
