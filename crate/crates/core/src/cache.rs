//! On-disk setup cache.
//!
//! One directory per `n` holds `manifest.json` and one subdirectory per shape
//! (`7-3` for `[7,3]`). Each shape directory has its own `manifest.json` plus
//! three flat little-endian arrays, each behind a 24-byte header
//! (`RKFRAME\0`, format version, element type, element count):
//! `eigenvectors.f64` (`d` vectors of length `m`), `col_of.u64` (`n!` column
//! indices) and `tree.u64` (`vertex, parent, swap` triples in BFS order, with
//! `u64::MAX` as the root's parent).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_ordered_set_partitions, factorial, IntegerPartition};
use crate::error::{Error, Result};
use crate::frame::{ShapeBundle, Transform};
use crate::schreier::{CharacteristicMatrix, LiftingTree, TreeNode};
use crate::spectral::{eigen_key, EigenSpace, ShapeSpectrum};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"RKFRAME\0";
const TYPE_F64: u32 = 1;
const TYPE_U64: u32 = 2;

const EIGVEC_FILE: &str = "eigenvectors.f64";
const COL_FILE: &str = "col_of.u64";
const TREE_FILE: &str = "tree.u64";

/// Options the cache was built with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub top_k: Option<usize>,
    pub conjugates_included: bool,
    pub mode: String,
    pub hook_fastpath: bool,
}

/// Top-level cache manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheManifest {
    pub format_version: u32,
    pub n: usize,
    pub shapes: Vec<ShapeEntry>,
    pub options: BuildOptions,
    pub atoms: u64,
}

/// Inventory line for one shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub shape: Vec<usize>,
    pub dir: String,
    pub files: Vec<String>,
}

/// Per-shape manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeManifest {
    pub shape: Vec<usize>,
    pub m: u64,
    pub z: u64,
    pub d: u64,
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub vertex_labels: Vec<String>,
}

/// Directory name of a shape.
pub fn shape_dir(shape: &IntegerPartition) -> String {
    shape
        .parts()
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

/// Cache directory for `n` below a cache root.
pub fn n_dir(root: &Path, n: usize) -> PathBuf {
    root.join(format!("n{n}"))
}

fn write_array<T: Copy>(
    path: &Path,
    kind: u32,
    data: &[T],
    to_bytes: impl Fn(T) -> [u8; 8],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&kind.to_le_bytes())?;
    w.write_all(&(data.len() as u64).to_le_bytes())?;
    for &x in data {
        w.write_all(&to_bytes(x))?;
    }
    w.flush()?;
    Ok(())
}

fn read_array(path: &Path, kind: u32, expected: usize) -> Result<Vec<[u8; 8]>> {
    let mut r = BufReader::new(
        File::open(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?,
    );
    let mut header = [0u8; 24];
    r.read_exact(&mut header)
        .map_err(|_| Error::Cache(format!("{}: truncated header", path.display())))?;
    if &header[..8] != MAGIC {
        return Err(Error::Cache(format!("{}: bad magic", path.display())));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let found_kind = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let len = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    if version != FORMAT_VERSION || found_kind != kind {
        return Err(Error::Cache(format!(
            "{}: version {version} type {found_kind} not supported",
            path.display()
        )));
    }
    if len != expected {
        return Err(Error::Cache(format!(
            "{}: holds {len} values, manifest implies {expected}",
            path.display()
        )));
    }
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Cache(format!("{}: truncated data", path.display())))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| c.try_into().unwrap())
        .collect())
}

/// Writes every bundle of `t` below `dir`.
pub fn write_cache(dir: &Path, t: &Transform, options: &BuildOptions) -> Result<CacheManifest> {
    fs::create_dir_all(dir)?;
    let mut shapes = Vec::new();
    for b in t.bundles() {
        let name = shape_dir(&b.shape);
        let sdir = dir.join(&name);
        fs::create_dir_all(&sdir)?;
        let manifest = ShapeManifest {
            shape: b.shape.parts().to_vec(),
            m: b.constants.m,
            z: b.constants.z,
            d: b.constants.d,
            eigenvalues: b.spectrum.spaces.iter().map(|s| s.lambda).collect(),
            multiplicities: b.spectrum.spaces.iter().map(|s| s.vectors.len()).collect(),
            vertex_labels: b.vertices.iter().map(|v| v.label()).collect(),
        };
        fs::write(
            sdir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        let flat: Vec<f64> = b
            .spectrum
            .eigenvectors()
            .flat_map(|(_, _, _, v)| v.iter().copied())
            .collect();
        write_array(&sdir.join(EIGVEC_FILE), TYPE_F64, &flat, f64::to_le_bytes)?;
        write_array(
            &sdir.join(COL_FILE),
            TYPE_U64,
            b.characteristic.col_of(),
            |x| (x as u64).to_le_bytes(),
        )?;
        let tree: Vec<u64> = b
            .tree
            .nodes()
            .iter()
            .flat_map(|nd| {
                [
                    nd.vertex as u64,
                    nd.parent.map(|p| p as u64).unwrap_or(u64::MAX),
                    nd.swap as u64,
                ]
            })
            .collect();
        write_array(&sdir.join(TREE_FILE), TYPE_U64, &tree, u64::to_le_bytes)?;
        shapes.push(ShapeEntry {
            shape: b.shape.parts().to_vec(),
            dir: name,
            files: vec![
                "manifest.json".into(),
                EIGVEC_FILE.into(),
                COL_FILE.into(),
                TREE_FILE.into(),
            ],
        });
    }
    let manifest = CacheManifest {
        format_version: FORMAT_VERSION,
        n: t.n(),
        shapes,
        options: options.clone(),
        atoms: t.atom_count(),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Reads the top-level manifest.
pub fn read_manifest(dir: &Path) -> Result<CacheManifest> {
    let path = dir.join("manifest.json");
    let text =
        fs::read_to_string(&path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    let manifest: CacheManifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Cache(format!(
            "format version {} is not supported",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

/// Loads and validates a cache.
pub fn load_cache(dir: &Path) -> Result<(Transform, CacheManifest)> {
    let manifest = read_manifest(dir)?;
    let n = manifest.n;
    let mut bundles = Vec::new();
    for entry in &manifest.shapes {
        bundles.push(load_shape(&dir.join(&entry.dir), n, &entry.shape)?);
    }
    let t = Transform::from_bundles(n, bundles)?;
    if t.atom_count() != manifest.atoms {
        return Err(Error::Cache(format!(
            "manifest lists {} atoms, shapes give {}",
            manifest.atoms,
            t.atom_count()
        )));
    }
    Ok((t, manifest))
}

fn load_shape(sdir: &Path, n: usize, parts: &[usize]) -> Result<ShapeBundle> {
    let shape = IntegerPartition::new(parts.to_vec())?;
    if shape.n() != n {
        return Err(Error::Cache(format!(
            "shape {shape} does not partition {n}"
        )));
    }
    let text = fs::read_to_string(sdir.join("manifest.json"))
        .map_err(|e| Error::Cache(format!("{}: {e}", sdir.join("manifest.json").display())))?;
    let sm: ShapeManifest = serde_json::from_str(&text)?;
    let constants = shape.constants();
    if sm.shape != parts || sm.m != constants.m || sm.z != constants.z || sm.d != constants.d {
        return Err(Error::Cache(format!(
            "{}: dimensions disagree with shape {shape}",
            sdir.display()
        )));
    }
    if sm.multiplicities.iter().sum::<usize>() as u64 != sm.d
        || sm.multiplicities.len() != sm.eigenvalues.len()
    {
        return Err(Error::Cache(format!(
            "{}: multiplicities do not sum to d",
            sdir.display()
        )));
    }
    let vertices = enumerate_ordered_set_partitions(&shape);
    if sm.vertex_labels.len() != vertices.len()
        || sm
            .vertex_labels
            .iter()
            .zip(&vertices)
            .any(|(l, v)| *l != v.label())
    {
        return Err(Error::Cache(format!(
            "{}: vertex labels disagree with canonical order",
            sdir.display()
        )));
    }
    let m = constants.m as usize;
    let d = constants.d as usize;
    let flat: Vec<f64> = read_array(&sdir.join(EIGVEC_FILE), TYPE_F64, m * d)?
        .into_iter()
        .map(f64::from_le_bytes)
        .collect();
    let mut vectors = flat.chunks_exact(m.max(1)).map(|c| c.to_vec());
    let mut spaces = Vec::new();
    for (&lambda, &kappa) in sm.eigenvalues.iter().zip(&sm.multiplicities) {
        spaces.push(EigenSpace {
            lambda,
            key: eigen_key(lambda),
            vectors: vectors.by_ref().take(kappa).collect(),
        });
    }
    let spectrum = ShapeSpectrum {
        shape: shape.clone(),
        m,
        spaces,
        warnings: Vec::new(),
    };

    let col: Vec<u32> = read_array(&sdir.join(COL_FILE), TYPE_U64, factorial(n) as usize)?
        .into_iter()
        .map(|b| u64::from_le_bytes(b) as u32)
        .collect();
    let characteristic = CharacteristicMatrix::from_parts(shape.clone(), col)?;

    let z = constants.z as usize;
    let raw: Vec<u64> = read_array(&sdir.join(TREE_FILE), TYPE_U64, 3 * z)?
        .into_iter()
        .map(u64::from_le_bytes)
        .collect();
    let nodes = raw
        .chunks_exact(3)
        .map(|c| {
            if c[0] as usize >= m
                || (c[1] != u64::MAX && c[1] as usize >= z)
                || c[2] as usize >= n.max(1)
            {
                return Err(Error::Cache(format!(
                    "{}: tree entry out of range",
                    sdir.display()
                )));
            }
            Ok(TreeNode {
                vertex: c[0] as u32,
                parent: (c[1] != u64::MAX).then_some(c[1] as u32),
                swap: c[2] as u8,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tree = LiftingTree::from_nodes(nodes)?;
    Ok(ShapeBundle {
        constants,
        shape,
        vertices,
        characteristic,
        tree,
        spectrum,
    })
}
