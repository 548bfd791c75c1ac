//! Code specifications: circulant block codes, spatially-coupled (SC) chains,
//! and multi-dimensional (MD) coupling of several chain copies.
//!
//! A block code is a `γ×κ` grid of `z×z` circulant permutation matrices
//! `σ^f`; `σ` shifts the identity so that row `a` carries its one in column
//! `(a + f) mod z`. An SC code partitions the grid into component matrices
//! `H_0..H_m` (the partitioning matrix `PM` says which component owns each
//! position, the power matrix `CM` keeps the circulant powers) and tiles `L`
//! vertically-shifted copies of the component stack, one per *replica*:
//!
//! ```text
//!        H_0
//!        H_1  H_0
//!        ...  H_1  ...
//!        H_m  ...       H_0
//!             H_m       H_1
//!                  ...  ...
//!                       H_m
//! ```
//!
//! An MD-SC code takes `L2` copies ("chains") of the same SC code and
//! relocates selected circulants between them: a mapping value `t` at block
//! position `(i, j)` moves every replica's `(i, j)` circulant of chain `a`
//! into the rows of chain `(a + t) mod L2`, cyclically for all `a`. Value 0
//! keeps the circulant in place.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

/// A `γ×κ` array of `z×z` circulants with powers `CM[i][j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCodeSpec {
    pub gamma: usize,
    pub kappa: usize,
    pub z: u32,
    /// Circulant powers, `gamma` rows of `kappa` entries in `[0, z)`.
    #[serde(rename = "CM")]
    pub cm: Vec<Vec<u32>>,
}

impl BlockCodeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 || self.kappa == 0 {
            return Err(Error::invalid("gamma and kappa must be positive"));
        }
        if self.z == 0 {
            return Err(Error::invalid("circulant size z must be positive"));
        }
        check_grid("CM", &self.cm, self.gamma, self.kappa, |&f| f < self.z, "below z")
    }

    /// Expands the grid of circulants into its binary parity-check matrix
    /// (`γz × κz`, uniform column weight `γ` and row weight `κ`).
    pub fn expand(&self) -> SparseBinaryMatrix {
        let z = self.z as usize;
        let mut per_row: Vec<Vec<u32>> = vec![Vec::with_capacity(self.kappa); self.gamma * z];
        for i in 0..self.gamma {
            for j in 0..self.kappa {
                let f = self.cm[i][j] as usize;
                for a in 0..z {
                    let col = j * z + (a + f) % z;
                    per_row[i * z + a].push(col as u32);
                }
            }
        }
        for row in &mut per_row {
            row.sort_unstable();
        }
        SparseBinaryMatrix::from_sorted_rows(self.gamma * z, self.kappa * z, per_row)
    }
}

/// Spatially-coupled code: a block code partitioned into `m + 1` components
/// and coupled over `L` replicas.
///
/// JSON form carries exactly the fields `gamma`, `kappa`, `z`, `m`, `L`,
/// `PM`, `CM`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScCodeSpec {
    #[serde(flatten)]
    pub block: BlockCodeSpec,
    /// Coupling memory: components are `H_0..H_m`.
    pub m: usize,
    /// Coupling length (number of replicas).
    #[serde(rename = "L")]
    pub l: usize,
    /// Partitioning matrix: `PM[i][j] ∈ [0, m]` is the component that owns
    /// block position `(i, j)`.
    #[serde(rename = "PM")]
    pub pm: Vec<Vec<u8>>,
}

impl ScCodeSpec {
    pub fn validate(&self) -> Result<()> {
        self.block.validate()?;
        if self.l == 0 {
            return Err(Error::invalid("coupling length L must be positive"));
        }
        check_grid("PM", &self.pm, self.block.gamma, self.block.kappa, |&h| (h as usize) <= self.m, "at most m")
    }

    /// Code length `L·κ·z`.
    pub fn n(&self) -> usize {
        self.l * self.block.kappa * self.block.z as usize
    }

    /// Number of parity rows `(L+m)·γ·z`.
    pub fn n_rows(&self) -> usize {
        (self.l + self.m) * self.block.gamma * self.block.z as usize
    }

    /// Design rate `1 − (L+m)γ / (Lκ)`.
    pub fn design_rate(&self) -> f64 {
        1.0 - ((self.l + self.m) * self.block.gamma) as f64 / (self.l * self.block.kappa) as f64
    }

    /// Number of row groups `(L+m)·γ` of the coupled protograph.
    pub fn row_groups(&self) -> usize {
        (self.l + self.m) * self.block.gamma
    }

    /// Number of column groups `L·κ` of the coupled protograph.
    pub fn col_groups(&self) -> usize {
        self.l * self.block.kappa
    }

    /// Power of the circulant at protograph position `(row_group, col_group)`
    /// of the coupled matrix, or `None` where the matrix is zero.
    ///
    /// Column group `J` belongs to replica `ν = ⌊J/κ⌋`; the circulant for
    /// block position `(i, j)` sits `PM[i][j]` replica-heights below the
    /// diagonal, i.e. in row group `(ν + PM[i][j])·γ + i`.
    pub fn circulant_at(&self, row_group: usize, col_group: usize) -> Option<u32> {
        if row_group >= self.row_groups() || col_group >= self.col_groups() {
            return None;
        }
        let gamma = self.block.gamma;
        let kappa = self.block.kappa;
        let (nu, j) = (col_group / kappa, col_group % kappa);
        let (r, i) = (row_group / gamma, row_group % gamma);
        if r < nu || r > nu + self.m {
            return None;
        }
        if self.pm[i][j] as usize == r - nu {
            Some(self.block.cm[i][j])
        } else {
            None
        }
    }

    /// Assembles the full `(L+m)γz × Lκz` parity-check matrix.
    pub fn assemble(&self) -> SparseBinaryMatrix {
        let z = self.block.z as usize;
        let mut per_row: Vec<Vec<u32>> = vec![Vec::new(); self.n_rows()];
        self.for_each_circulant(|row_group, col_group, f| {
            let (rbase, cbase) = (row_group * z, col_group * z);
            for a in 0..z {
                per_row[rbase + a].push((cbase + (a + f as usize) % z) as u32);
            }
        });
        for row in &mut per_row {
            row.sort_unstable();
        }
        SparseBinaryMatrix::from_sorted_rows(self.n_rows(), self.n(), per_row)
    }

    /// Assembles the MD coupled matrix: an `L2×L2` grid of segments, where
    /// the segment in block-row `b`, block-column `a` holds exactly the
    /// circulants of chain `a` that `maps[a]` relocates by `t = (b − a) mod
    /// L2`. All-zero maps produce `L2` independent copies of the chain.
    pub fn assemble_md(&self, md: &MdMappingSet) -> Result<SparseBinaryMatrix> {
        md.validate(self.block.gamma, self.block.kappa)?;
        let z = self.block.z as usize;
        let (seg_rows, seg_cols) = (self.n_rows(), self.n());
        let mut per_row: Vec<Vec<u32>> = vec![Vec::new(); md.l2 * seg_rows];
        for (a, map) in md.maps.iter().enumerate() {
            self.for_each_circulant(|row_group, col_group, f| {
                let i = row_group % self.block.gamma;
                let j = col_group % self.block.kappa;
                let b = (a + map[i][j] as usize) % md.l2;
                let rbase = b * seg_rows + row_group * z;
                let cbase = a * seg_cols + col_group * z;
                for s in 0..z {
                    per_row[rbase + s].push((cbase + (s + f as usize) % z) as u32);
                }
            });
        }
        for row in &mut per_row {
            row.sort_unstable();
        }
        Ok(SparseBinaryMatrix::from_sorted_rows(md.l2 * seg_rows, md.l2 * seg_cols, per_row))
    }

    /// Calls `f(row_group, col_group, power)` for every nonzero circulant of
    /// the coupled matrix, in column-major replica order.
    pub fn for_each_circulant(&self, mut f: impl FnMut(usize, usize, u32)) {
        let gamma = self.block.gamma;
        let kappa = self.block.kappa;
        for nu in 0..self.l {
            for j in 0..kappa {
                for i in 0..gamma {
                    let r = nu + self.pm[i][j] as usize;
                    f(r * gamma + i, nu * kappa + j, self.block.cm[i][j]);
                }
            }
        }
    }
}

/// Relocation maps for MD coupling: one `γ×κ` map per chain with targets in
/// `[0, d)`. The uniform case (all chains share one map) is the structure
/// the optimizer produces; per-chain maps cover the independent random
/// baseline.
///
/// JSON form carries exactly the fields `L2`, `d`, `maps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdMappingSet {
    #[serde(rename = "L2")]
    pub l2: usize,
    /// Coupling depth: targets lie in `[0, d)`; 0 means "not relocated".
    pub d: usize,
    /// One map per chain (`maps.len() == L2`).
    pub maps: Vec<Vec<Vec<u8>>>,
}

impl MdMappingSet {
    /// Builds the uniform mapping set that applies `map` to every chain.
    pub fn uniform(map: Vec<Vec<u8>>, l2: usize, d: usize) -> Self {
        MdMappingSet { l2, d, maps: vec![map; l2] }
    }

    /// The all-zero mapping set (no relocations).
    pub fn identity(gamma: usize, kappa: usize, l2: usize) -> Self {
        Self::uniform(vec![vec![0; kappa]; gamma], l2, 1)
    }

    pub fn validate(&self, gamma: usize, kappa: usize) -> Result<()> {
        if self.l2 == 0 {
            return Err(Error::invalid("L2 must be positive"));
        }
        if self.d == 0 || self.d > self.l2 {
            return Err(Error::invalid(format!("depth d={} must satisfy 1 <= d <= L2={}", self.d, self.l2)));
        }
        if self.maps.len() != self.l2 {
            return Err(Error::invalid(format!("expected {} chain maps, found {}", self.l2, self.maps.len())));
        }
        for map in &self.maps {
            check_grid("map", map, gamma, kappa, |&t| (t as usize) < self.d, "below d")?;
        }
        Ok(())
    }

    /// True when all chains share one map.
    pub fn is_uniform(&self) -> bool {
        self.maps.windows(2).all(|w| w[0] == w[1])
    }

    /// The shared map, if the set is uniform.
    pub fn shared_map(&self) -> Option<&Vec<Vec<u8>>> {
        if self.is_uniform() {
            self.maps.first()
        } else {
            None
        }
    }

    /// Number of relocated (nonzero) entries per chain map.
    pub fn relocations_per_chain(&self) -> Vec<usize> {
        self.maps
            .iter()
            .map(|m| m.iter().flatten().filter(|&&t| t != 0).count())
            .collect()
    }
}

fn check_grid<T>(
    name: &str,
    grid: &[Vec<T>],
    gamma: usize,
    kappa: usize,
    ok: impl Fn(&T) -> bool,
    requirement: &str,
) -> Result<()> {
    if grid.len() != gamma || grid.iter().any(|row| row.len() != kappa) {
        return Err(Error::invalid(format!("{name} must be {gamma}x{kappa}")));
    }
    for row in grid {
        for v in row {
            if !ok(v) {
                return Err(Error::invalid(format!("{name} entry not {requirement}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// γ=2, κ=3, z=3 toy with H_0 = positions {(0,0),(0,2),(1,1)} and
    /// H_1 = the rest; small enough to check by hand.
    pub(crate) fn toy_sc() -> ScCodeSpec {
        ScCodeSpec {
            block: BlockCodeSpec {
                gamma: 2,
                kappa: 3,
                z: 3,
                cm: vec![vec![0, 1, 2], vec![2, 0, 1]],
            },
            m: 1,
            l: 3,
            pm: vec![vec![0, 1, 0], vec![1, 0, 1]],
        }
    }

    #[test]
    fn expand_block_has_uniform_weights() {
        let b = toy_sc().block;
        b.validate().unwrap();
        let h = b.expand();
        assert_eq!((h.rows(), h.cols()), (6, 9));
        assert!((0..h.rows()).all(|r| h.row_weight(r) == b.kappa));
        assert!((0..h.cols()).all(|c| h.col_weight(c) == b.gamma));
        // σ^1 block at (0,1): ones at (a, z + (a+1) mod 3).
        assert!(h.get(0, 3 + 1) && h.get(1, 3 + 2) && h.get(2, 3));
    }

    #[test]
    fn assemble_matches_circulant_at_everywhere() {
        let sc = toy_sc();
        sc.validate().unwrap();
        let h = sc.assemble();
        assert_eq!((h.rows(), h.cols()), (sc.n_rows(), sc.n()));
        let z = sc.block.z as usize;
        for rg in 0..sc.row_groups() {
            for cg in 0..sc.col_groups() {
                match sc.circulant_at(rg, cg) {
                    Some(f) => {
                        for a in 0..z {
                            assert!(h.get(rg * z + a, cg * z + (a + f as usize) % z));
                        }
                    }
                    None => {
                        for a in 0..z {
                            for b in 0..z {
                                assert!(!h.get(rg * z + a, cg * z + b));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn circulant_at_agrees_with_component_tiling() {
        // Literal construction: build H_0 and H_1 as γ×κ power grids with
        // holes, then tile them along the diagonal per replica.
        let sc = toy_sc();
        let component = |h: u8| -> Vec<Vec<Option<u32>>> {
            (0..sc.block.gamma)
                .map(|i| {
                    (0..sc.block.kappa)
                        .map(|j| (sc.pm[i][j] == h).then(|| sc.block.cm[i][j]))
                        .collect()
                })
                .collect()
        };
        let comps: Vec<_> = (0..=sc.m as u8).map(component).collect();
        for rg in 0..sc.row_groups() {
            for cg in 0..sc.col_groups() {
                let (r, i) = (rg / sc.block.gamma, rg % sc.block.gamma);
                let (nu, j) = (cg / sc.block.kappa, cg % sc.block.kappa);
                let expected = if r >= nu && r - nu <= sc.m { comps[r - nu][i][j] } else { None };
                assert_eq!(sc.circulant_at(rg, cg), expected, "at ({rg},{cg})");
            }
        }
    }

    #[test]
    fn replica_occupies_its_column_and_row_bands() {
        let sc = toy_sc();
        let h = sc.assemble();
        let z = sc.block.z as usize;
        let (gamma, kappa) = (sc.block.gamma, sc.block.kappa);
        for nu in 0..sc.l {
            let col_band = nu * kappa * z..(nu + 1) * kappa * z;
            for c in col_band {
                for &r in h.col(c) {
                    let row_replica = r as usize / (gamma * z);
                    assert!(row_replica >= nu && row_replica <= nu + sc.m);
                }
            }
            // Every replica carries all γκ circulants exactly once.
            let ones: usize = (nu * kappa * z..(nu + 1) * kappa * z).map(|c| h.col_weight(c)).sum();
            assert_eq!(ones, gamma * kappa * z);
        }
    }

    #[test]
    fn design_rate_and_sizes() {
        let sc = toy_sc();
        assert_eq!(sc.n(), 27);
        assert_eq!(sc.n_rows(), 24);
        let expected = 1.0 - ((sc.l + sc.m) * sc.block.gamma) as f64 / (sc.l * sc.block.kappa) as f64;
        assert!((sc.design_rate() - expected).abs() < 1e-12);
    }

    #[test]
    fn md_zero_maps_are_block_diagonal_copies() {
        let sc = toy_sc();
        let md = MdMappingSet::identity(2, 3, 4);
        let h = sc.assemble_md(&md).unwrap();
        let single = sc.assemble();
        assert_eq!(h.rows(), 4 * single.rows());
        assert_eq!(h.cols(), 4 * single.cols());
        assert_eq!(h.nnz(), 4 * single.nnz());
        for (r, c) in single.entries() {
            for chain in 0..4 {
                assert!(h.get(chain * single.rows() + r, chain * single.cols() + c));
            }
        }
    }

    #[test]
    fn md_relocation_rewires_to_the_next_chain_cyclically() {
        // Relocate block position (1, 0) one chain ahead: every replica's
        // (1,0) circulant of chain a must appear in the rows of chain
        // (a+1) mod L2 and vanish from the diagonal segment.
        let sc = toy_sc();
        let mut map = vec![vec![0u8; 3]; 2];
        map[1][0] = 1;
        let md = MdMappingSet::uniform(map, 4, 2);
        let h = sc.assemble_md(&md).unwrap();
        let single = sc.assemble();
        let z = sc.block.z as usize;

        for a in 0..4 {
            for nu in 0..sc.l {
                let (i, j) = (1usize, 0usize);
                let rg = (nu + sc.pm[i][j] as usize) * sc.block.gamma + i;
                let cg = nu * sc.block.kappa + j;
                let f = sc.block.cm[i][j] as usize;
                for s in 0..z {
                    let row_in_seg = rg * z + s;
                    let col = a * single.cols() + cg * z + (s + f) % z;
                    assert!(h.get(((a + 1) % 4) * single.rows() + row_in_seg, col));
                    assert!(!h.get(a * single.rows() + row_in_seg, col));
                }
            }
        }
        // Relocation moves ones, never creates or destroys them.
        assert_eq!(h.nnz(), 4 * single.nnz());
        for c in 0..h.cols() {
            assert_eq!(h.col_weight(c), sc.block.gamma);
        }
    }

    #[test]
    fn md_uniform_segments_sum_back_to_the_chain() {
        // Summing the segments of one block-column reproduces H_SC.
        let sc = toy_sc();
        let mut map = vec![vec![0u8; 3]; 2];
        map[0][1] = 2;
        map[1][2] = 1;
        let md = MdMappingSet::uniform(map, 3, 3);
        let h = sc.assemble_md(&md).unwrap();
        let single = sc.assemble();
        for a in 0..3 {
            for (r, c) in single.entries() {
                let found = (0..3)
                    .filter(|&b| h.get(b * single.rows() + r, a * single.cols() + c))
                    .count();
                assert_eq!(found, 1);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut sc = toy_sc();
        sc.pm[0][0] = 2; // exceeds m = 1
        assert!(sc.validate().is_err());
        let mut sc = toy_sc();
        sc.block.cm[1][2] = 3; // = z
        assert!(sc.validate().is_err());
        let md = MdMappingSet::uniform(vec![vec![0; 3]; 2], 2, 3);
        assert!(md.validate(2, 3).is_err()); // d > L2
        let md = MdMappingSet::uniform(vec![vec![2; 3]; 2], 3, 2);
        assert!(md.validate(2, 3).is_err()); // entry ≥ d
    }

    #[test]
    fn sc_spec_json_field_names() {
        let sc = toy_sc();
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&sc).unwrap()).unwrap();
        for key in ["gamma", "kappa", "z", "m", "L", "PM", "CM"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: ScCodeSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, sc);

        let md = MdMappingSet::uniform(vec![vec![0; 3]; 2], 3, 1);
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&md).unwrap()).unwrap();
        for key in ["L2", "d", "maps"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
