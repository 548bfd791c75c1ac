//! Exact short-cycle analysis of circulant-based (MD-)SC codes.
//!
//! Cycles of the lifted Tanner graph are counted at circulant level. A cycle
//! of length `k` traverses `k` circulants ("positions") alternately sharing a
//! row group and a column group; the traversal lifts to `z` node-level walks
//! (one per starting shift), which close iff the alternating sum of circulant
//! powers vanishes mod `z` and are simple iff the walk never revisits a
//! Tanner-graph node. Enumeration therefore runs over the (small) protograph
//! and multiplies by the lift factor instead of walking the lifted graph.
//!
//! Two structural symmetries keep the search small:
//! - replica translation invariance: the coupled matrix repeats every
//!   replica, so signatures are enumerated as equivalence classes anchored at
//!   their leftmost replica and weighted by their number of valid placements;
//! - traversal symmetry: a cycle has no distinguished start or direction, so
//!   sequences are deduplicated by a canonical form (lexicographic minimum
//!   over even rotations and reversal, both of which preserve the
//!   row-share-first transition pattern).
//!
//! An independent brute-force oracle ([`brute_force_count`]) counts simple
//! cycles directly on an assembled binary matrix and is used by tests to
//! validate the protograph engine.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{MdMappingSet, ScCodeSpec};
use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

/// Default cap on stored signature classes per enumeration.
pub const DEFAULT_SIGNATURE_BUDGET: usize = 10_000_000;
/// Largest bipartite graph (rows + columns) the brute-force oracle accepts.
pub const BRUTE_FORCE_NODE_CAP: usize = 5_000;
const MIN_K: usize = 4;
const MAX_K: usize = 12;
const MAX_L: usize = 128; // replica occupancy is tracked in a u128 bitmask

/// Which placements of a signature class are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogScope {
    /// Every placement inside the coupled matrix.
    Whole,
    /// Only placements that put at least one position in the middle replica
    /// (replica `⌈L/2⌉`, 1-based).
    MiddleReplica,
}

/// One cycle signature: the ordered circulant positions as global
/// `[row_group, col_group]` pairs of the (MD-)coupled protograph.
///
/// Consecutive pairs alternate sharing the row group (first transition) and
/// the column group; the closing pair shares the column group. The stored
/// order is the canonical one (minimal over even rotations and reversal), so
/// equal signatures compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleSignature(pub Vec<[usize; 2]>);

impl CycleSignature {
    pub fn k(&self) -> usize {
        self.0.len()
    }
}

/// Protograph dimensions a catalog was enumerated over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtoDims {
    pub gamma: usize,
    pub kappa: usize,
    pub z: u32,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "L2")]
    pub l2: usize,
}

impl ProtoDims {
    /// Splits a global column group into (chain, replica, block column).
    pub fn col_info(&self, col_group: usize) -> Result<(usize, usize, usize)> {
        let per_chain = self.l * self.kappa;
        if col_group >= self.l2 * per_chain {
            return Err(Error::invalid(format!("column group {col_group} out of range")));
        }
        let within = col_group % per_chain;
        Ok((col_group / per_chain, within / self.kappa, within % self.kappa))
    }

    /// Splits a global row group into (chain, row replica, block row).
    pub fn row_info(&self, row_group: usize) -> Result<(usize, usize, usize)> {
        let per_chain = (self.l + self.m) * self.gamma;
        if row_group >= self.l2 * per_chain {
            return Err(Error::invalid(format!("row group {row_group} out of range")));
        }
        let within = row_group % per_chain;
        Ok((row_group / per_chain, within / self.gamma, within % self.gamma))
    }

    /// 0-based middle replica `⌈L/2⌉ − 1` (1-based `⌈L/2⌉`).
    pub fn middle_replica(&self) -> usize {
        (self.l - 1) / 2
    }
}

/// A signature equivalence class under replica translation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignatureClass {
    /// Canonical representative, placed at the leftmost counted placement.
    pub signature: CycleSignature,
    /// Number of placements counted under the catalog scope.
    pub placements: u64,
    /// Replica span: the class occupies replicas `[s, s + span]` when its
    /// leftmost replica sits at `s`.
    pub span: usize,
    /// Minimal even rotation period of the position sequence.
    pub period: usize,
    /// True iff the alternating power sum vanishes mod `z` (the sequence
    /// lifts to closed node-level walks).
    pub zero_closure: bool,
    /// True iff the lifted closed walk visits `k` distinct nodes.
    pub lift_simple: bool,
    /// Simple lifted cycles this class contributes under the catalog scope:
    /// `placements × z × period / k` when realized (zero closure and simple),
    /// otherwise 0.
    pub cycles: u64,
}

/// All length-`k` signature classes of a coupled protograph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleCatalog {
    pub k: usize,
    pub scope: CatalogScope,
    pub dims: ProtoDims,
    pub classes: Vec<SignatureClass>,
    /// Sum of `cycles` over all classes.
    pub total_cycles: u64,
}

impl CycleCatalog {
    /// Classes that lift to actual cycles (zero closure and simple walk).
    pub fn realized(&self) -> impl Iterator<Item = &SignatureClass> {
        self.classes.iter().filter(|c| c.zero_closure && c.lift_simple)
    }

    /// Alternating sum of per-chain map values over the signature, mod `l2`
    /// (positions at even canonical index count `+`, odd count `−`).
    ///
    /// A relocation map leaves a signature's `l2` per-chain instances merged
    /// into short cycles iff this value is 0.
    pub fn class_delta(&self, class: &SignatureClass, map: &[Vec<u8>], l2: usize) -> Result<usize> {
        self.signature_delta(&class.signature, map, l2)
    }

    /// Same as [`CycleCatalog::class_delta`], on a bare signature.
    pub fn signature_delta(&self, sig: &CycleSignature, map: &[Vec<u8>], l2: usize) -> Result<usize> {
        if l2 == 0 {
            return Err(Error::invalid("l2 must be positive"));
        }
        let mut sum: i64 = 0;
        for (t, pos) in sig.0.iter().enumerate() {
            let (_, _, i) = self.row_info(pos[0])?;
            let (_, _, j) = self.col_info(pos[1])?;
            let v = *map
                .get(i)
                .and_then(|row| row.get(j))
                .ok_or_else(|| Error::invalid("map smaller than block grid"))? as i64;
            sum += if t % 2 == 0 { v } else { -v };
        }
        Ok(sum.rem_euclid(l2 as i64) as usize)
    }

    pub fn col_info(&self, col_group: usize) -> Result<(usize, usize, usize)> {
        self.dims.col_info(col_group)
    }

    pub fn row_info(&self, row_group: usize) -> Result<(usize, usize, usize)> {
        self.dims.row_info(row_group)
    }
}

/// Split of a catalog by whether a uniform relocation map keeps each class's
/// per-chain instances at their original length (`delta == 0`, "active") or
/// merges them into longer cycles.
#[derive(Debug, Clone)]
pub struct ActivePartition {
    /// Indices into `catalog.classes` with delta == 0 (realized classes only).
    pub active: Vec<usize>,
    /// Realized classes with delta != 0.
    pub inactive: Vec<usize>,
    /// Total placements of active classes.
    pub active_placed: u64,
    /// Total placements of inactive classes.
    pub inactive_placed: u64,
}

/// Partitions the realized classes of `catalog` by the relocation condition
/// under a uniform mapping set.
pub fn classify_active(catalog: &CycleCatalog, md: &MdMappingSet) -> Result<ActivePartition> {
    let map = md
        .shared_map()
        .ok_or_else(|| Error::invalid("active-cycle classification requires a uniform mapping set"))?;
    let mut part = ActivePartition {
        active: Vec::new(),
        inactive: Vec::new(),
        active_placed: 0,
        inactive_placed: 0,
    };
    for (idx, class) in catalog.classes.iter().enumerate() {
        if !(class.zero_closure && class.lift_simple) {
            continue;
        }
        if catalog.class_delta(class, map, md.l2)? == 0 {
            part.active.push(idx);
            part.active_placed += class.placements;
        } else {
            part.inactive.push(idx);
            part.inactive_placed += class.placements;
        }
    }
    Ok(part)
}

/// Number of active cycles-`k` of a uniform coupling: `z` lifted copies of
/// every distinct constituent cycle shape the mapping set keeps at length
/// `k` (cycle shapes are counted once, irrespective of how many replica
/// positions realize them).
pub fn count_active(spec: &ScCodeSpec, md: &MdMappingSet, k: usize) -> Result<u64> {
    let catalog = enumerate_signatures(spec, k, CatalogScope::Whole)?;
    let part = classify_active(&catalog, md)?;
    Ok(spec.block.z as u64 * part.active.len() as u64)
}

/// Enumerates all length-`k` signature classes of an SC code's protograph.
pub fn enumerate_signatures(spec: &ScCodeSpec, k: usize, scope: CatalogScope) -> Result<CycleCatalog> {
    enumerate_signatures_budgeted(spec, None, k, scope, DEFAULT_SIGNATURE_BUDGET)
}

/// Enumerates signature classes of the MD-coupled protograph (per-chain maps
/// supported).
pub fn enumerate_signatures_md(
    spec: &ScCodeSpec,
    md: &MdMappingSet,
    k: usize,
    scope: CatalogScope,
) -> Result<CycleCatalog> {
    enumerate_signatures_budgeted(spec, Some(md), k, scope, DEFAULT_SIGNATURE_BUDGET)
}

/// Full-control enumeration entry point with an explicit class budget.
pub fn enumerate_signatures_budgeted(
    spec: &ScCodeSpec,
    md: Option<&MdMappingSet>,
    k: usize,
    scope: CatalogScope,
    budget: usize,
) -> Result<CycleCatalog> {
    let support = ProtoSupport::build(spec, md)?;
    support.enumerate(k, scope, budget)
}

/// Exact number of simple length-`k` cycles in the SC code's lifted graph.
pub fn count_cycles(spec: &ScCodeSpec, k: usize) -> Result<u64> {
    Ok(enumerate_signatures(spec, k, CatalogScope::Whole)?.total_cycles)
}

/// Exact number of simple length-`k` cycles in the MD-coupled lifted graph.
pub fn count_cycles_md(spec: &ScCodeSpec, md: &MdMappingSet, k: usize) -> Result<u64> {
    Ok(enumerate_signatures_md(spec, md, k, CatalogScope::Whole)?.total_cycles)
}

/// Alternating power sum of a signature mod `z` (`−f` at even canonical
/// index, `+f` at odd); the signature lifts to closed walks iff this is 0.
pub fn lift_closure_sum(sig: &CycleSignature, spec: &ScCodeSpec, md: Option<&MdMappingSet>) -> Result<u32> {
    let support = ProtoSupport::build(spec, md)?;
    let positions = support.decode_signature(sig)?;
    let (closure, _) = support.walk(&positions);
    Ok(closure)
}

/// True iff the signature's lifted closed walk is a simple cycle (all `k`
/// Tanner-graph nodes distinct). Requires zero closure sum.
pub fn lifted_simplicity(sig: &CycleSignature, spec: &ScCodeSpec, md: Option<&MdMappingSet>) -> Result<bool> {
    let support = ProtoSupport::build(spec, md)?;
    let positions = support.decode_signature(sig)?;
    let (closure, simple) = support.walk(&positions);
    if closure != 0 {
        return Err(Error::invalid("signature does not lift to closed walks (nonzero closure sum)"));
    }
    Ok(simple)
}

/// Canonical anchored form of a signature: minimal over even rotations and
/// reversal, shifted so its leftmost replica is 0.
pub fn canonical_form(sig: &CycleSignature, spec: &ScCodeSpec, md: Option<&MdMappingSet>) -> Result<CycleSignature> {
    let support = ProtoSupport::build(spec, md)?;
    let positions = support.decode_signature(sig)?;
    let keys: Vec<u64> = positions.iter().map(|&(nu, cell)| encode_pos(nu, cell)).collect();
    let mut buf = Vec::new();
    let mut best = Vec::new();
    canonical_key(&keys, &mut buf, &mut best);
    Ok(support.to_global_signature(&best, 0))
}

// ---------------------------------------------------------------------------
// Merged images: what a uniform relocation map does to each signature class.
// ---------------------------------------------------------------------------

/// One merged signature class produced in the chain-coupled protograph by the
/// `L2` per-chain instances of a constituent-chain class under a uniform
/// relocation map.
///
/// The instances merge into classes of `laps × k` positions: walking the
/// source sequence advances the chain index by its alternating map sum per
/// lap, and the walk closes after `laps = L2 / gcd(L2, Δ)` laps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdImage {
    /// Source laps merged into this class.
    pub laps: usize,
    /// Canonical signature in the chain-coupled protograph's coordinates.
    pub signature: CycleSignature,
    /// Minimal even rotation period of the merged sequence.
    pub period: usize,
    /// True iff the merged sequence lifts to closed node-level walks.
    pub zero_closure: bool,
    /// True iff the lifted closed walk visits all its nodes exactly once.
    pub lift_simple: bool,
    /// Placements inherited from the source class (whole-matrix scope).
    pub placements: u64,
    /// Simple lifted cycles of the merged length contributed by this image.
    pub cycles: u64,
}

/// Predicted population of merged cycles per length, with the contribution
/// breakdown by source length and lap count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdSpectrum {
    /// Largest merged length covered.
    pub k_max: usize,
    /// `(merged length, simple lifted cycles)` for every even length
    /// `4..=k_max`; matches direct enumeration of the chain-coupled graph.
    pub totals: Vec<(usize, u64)>,
    pub parts: Vec<SpectrumPart>,
}

/// Aggregate contribution of one `(source length, laps)` pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumPart {
    pub merged_k: usize,
    pub source_k: usize,
    pub laps: usize,
    /// Distinct merged image classes.
    pub classes: u64,
    /// Image classes whose merged sequence lifts to simple cycles.
    pub realized: u64,
    pub cycles: u64,
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The distinct merged image classes of one constituent-chain class under a
/// uniform relocation map.
///
/// `catalog` must be the whole-matrix catalog of the single-chain code the
/// class came from; placements carry over to the merged classes unchanged.
pub fn md_images(
    spec: &ScCodeSpec,
    md: &MdMappingSet,
    catalog: &CycleCatalog,
    class: &SignatureClass,
) -> Result<Vec<MdImage>> {
    let map = md
        .shared_map()
        .ok_or_else(|| Error::invalid("merged-image analysis requires a uniform mapping set"))?;
    if catalog.scope != CatalogScope::Whole || catalog.dims.l2 != 1 {
        return Err(Error::invalid(
            "merged-image analysis needs a whole-matrix single-chain catalog",
        ));
    }
    let expected = ProtoDims {
        gamma: spec.block.gamma,
        kappa: spec.block.kappa,
        z: spec.block.z,
        m: spec.m,
        l: spec.l,
        l2: 1,
    };
    if catalog.dims != expected {
        return Err(Error::invalid("catalog was enumerated over a different code"));
    }
    let support = ProtoSupport::build(spec, Some(md))?;
    merged_images(&support, &catalog.dims, class, map)
}

fn merged_images(
    sup: &ProtoSupport,
    src_dims: &ProtoDims,
    class: &SignatureClass,
    map: &[Vec<u8>],
) -> Result<Vec<MdImage>> {
    let l2 = sup.l2 as i64;
    let k = class.signature.k();
    // Per entry: column replica, block row, block col.
    let mut nij = Vec::with_capacity(k);
    for pos in &class.signature.0 {
        let (_, _, i) = src_dims.row_info(pos[0])?;
        let (_, nu, j) = src_dims.col_info(pos[1])?;
        nij.push((nu as i32, i, j));
    }
    // Chain offsets along one lap. A row-share transition moves the walk to
    // the cell whose relocated row chain matches: a' = a + M_t − M_{t+1}; a
    // column-share transition stays on the chain.
    let mut a_off = Vec::with_capacity(k);
    let mut cur = 0i64;
    for t in 0..k {
        a_off.push(cur);
        if t % 2 == 0 {
            let (_, i, j) = nij[t];
            let (_, i2, j2) = nij[(t + 1) % k];
            cur += map[i][j] as i64 - map[i2][j2] as i64;
        }
    }
    // Per-lap chain drift: the alternating map sum of the sequence.
    let drift = cur;
    let delta = drift.rem_euclid(l2) as usize;
    let laps = sup.l2 / gcd(sup.l2, delta);

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut images = Vec::new();
    for c in 0..l2 {
        let mut positions = Vec::with_capacity(laps * k);
        for lap in 0..laps as i64 {
            for (t, &(nu, i, j)) in nij.iter().enumerate() {
                let b = (c + a_off[t] + lap * drift).rem_euclid(l2) as usize;
                let cell = ((b * sup.gamma + i) * sup.kappa + j) as u32;
                positions.push((nu, cell));
            }
        }
        let rec = sup.analyze_sequence(&positions)?;
        if rec.span as usize != class.span {
            return Err(Error::invalid("internal error: merged image changed the replica span"));
        }
        if !seen.insert(rec.key.clone()) {
            continue;
        }
        let realized = rec.zero_closure && rec.lift_simple;
        let cycles = if realized {
            let num = class.placements * sup.z as u64 * rec.period as u64;
            let denom = (laps * k) as u64;
            if !num.is_multiple_of(denom) {
                return Err(Error::invalid("internal error: non-integral cycle weight for a merged image"));
            }
            num / denom
        } else {
            0
        };
        images.push(MdImage {
            laps,
            signature: sup.to_global_signature(&rec.key, 0),
            period: rec.period,
            zero_closure: rec.zero_closure,
            lift_simple: rec.lift_simple,
            placements: class.placements,
            cycles,
        });
    }
    Ok(images)
}

/// Predicts the chain-coupled graph's cycle populations for every even merged
/// length up to `k_max` by merging the constituent chain's signature classes
/// under a uniform relocation map.
///
/// The totals agree exactly with direct enumeration of the chain-coupled
/// graph: every merged class is an image of a constituent class (its per-lap
/// projection), including revisiting and periodic ones. Each merged class is
/// counted once and attributed to its smallest source length in `parts`.
pub fn predict_md_spectrum(spec: &ScCodeSpec, md: &MdMappingSet, k_max: usize) -> Result<MdSpectrum> {
    let map = md
        .shared_map()
        .ok_or_else(|| Error::invalid("spectrum prediction requires a uniform mapping set"))?;
    if !(MIN_K..=MAX_K).contains(&k_max) || !k_max.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "merged length bound {k_max} out of range (even, {MIN_K}..={MAX_K})"
        )));
    }
    let support = ProtoSupport::build(spec, Some(md))?;
    let mut seen: HashSet<CycleSignature> = HashSet::new();
    let mut totals: BTreeMap<usize, u64> = (MIN_K..=k_max).step_by(2).map(|n| (n, 0)).collect();
    let mut parts: BTreeMap<(usize, usize), SpectrumPart> = BTreeMap::new();
    for k in (MIN_K..=k_max).step_by(2) {
        let catalog = enumerate_signatures(spec, k, CatalogScope::Whole)?;
        for class in &catalog.classes {
            let delta = catalog.signature_delta(&class.signature, map, md.l2)?;
            let laps = md.l2 / gcd(md.l2, delta);
            let merged_k = laps * k;
            if merged_k > k_max {
                continue;
            }
            for image in merged_images(&support, &catalog.dims, class, map)? {
                // A periodic class and its generator produce the same merged
                // classes (an r-lap traversal of a class merges exactly like
                // the class itself taken r · laps times); keep the first
                // attribution, which has the smallest source length.
                if !seen.insert(image.signature.clone()) {
                    continue;
                }
                let part = parts.entry((merged_k, k)).or_insert(SpectrumPart {
                    merged_k,
                    source_k: k,
                    laps,
                    classes: 0,
                    realized: 0,
                    cycles: 0,
                });
                part.classes += 1;
                part.realized += (image.zero_closure && image.lift_simple) as u64;
                part.cycles += image.cycles;
                *totals.get_mut(&merged_k).unwrap() += image.cycles;
            }
        }
    }
    Ok(MdSpectrum {
        k_max,
        totals: totals.into_iter().collect(),
        parts: parts.into_values().collect(),
    })
}

// ---------------------------------------------------------------------------
// Protograph support: cells, adjacency moves, and the walk machinery.
// ---------------------------------------------------------------------------

/// Occupancy view of the coupled protograph. A *cell* is one circulant slot
/// `(chain a, block row i, block col j)`, id `(a·γ + i)·κ + j`; a *position*
/// adds the column replica: `(ν, cell)`. Row groups repeat every replica, so
/// adjacency is stored per cell with a replica delta.
pub(crate) struct ProtoSupport {
    gamma: usize,
    kappa: usize,
    z: u32,
    m: usize,
    l: usize,
    l2: usize,
    /// Component index per block position (γ×κ, flattened).
    pm: Vec<u8>,
    /// Circulant power per block position (γ×κ, flattened).
    cm: Vec<u32>,
    /// Chain owning each cell's rows.
    row_chain: Vec<u32>,
    /// Cell id → (chain, block row, block col).
    cell_block: Vec<(u32, u32, u32)>,
    /// Cells sharing a row group with `cell`, with the replica delta the
    /// move applies (`ν' = ν + dnu`). Excludes the cell itself.
    row_moves: Vec<Vec<(u32, i32)>>,
    /// Cells sharing a column group with `cell` (same chain, column, replica).
    col_moves: Vec<Vec<u32>>,
}

#[inline]
fn encode_pos(nu: i32, cell: u32) -> u64 {
    ((nu as u64) << 32) | cell as u64
}

#[inline]
fn decode_pos(key: u64) -> (i32, u32) {
    ((key >> 32) as i32, key as u32)
}

impl ProtoSupport {
    pub(crate) fn build(spec: &ScCodeSpec, md: Option<&MdMappingSet>) -> Result<ProtoSupport> {
        spec.validate()?;
        let (gamma, kappa) = (spec.block.gamma, spec.block.kappa);
        let owned;
        let md = match md {
            Some(md) => {
                md.validate(gamma, kappa)?;
                md
            }
            None => {
                owned = MdMappingSet::identity(gamma, kappa, 1);
                &owned
            }
        };
        if spec.l > MAX_L {
            return Err(Error::invalid(format!("coupling length {} exceeds supported maximum {MAX_L}", spec.l)));
        }
        let l2 = md.l2;
        let cells = l2 * gamma * kappa;
        let mut pm = vec![0u8; gamma * kappa];
        let mut cm = vec![0u32; gamma * kappa];
        for i in 0..gamma {
            for j in 0..kappa {
                pm[i * kappa + j] = spec.pm[i][j];
                cm[i * kappa + j] = spec.block.cm[i][j];
            }
        }
        let mut row_chain = vec![0u32; cells];
        let mut cell_block = vec![(0u32, 0u32, 0u32); cells];
        for a in 0..l2 {
            for i in 0..gamma {
                for j in 0..kappa {
                    let c = (a * gamma + i) * kappa + j;
                    row_chain[c] = ((a + md.maps[a][i][j] as usize) % l2) as u32;
                    cell_block[c] = (a as u32, i as u32, j as u32);
                }
            }
        }
        let mut row_moves = vec![Vec::new(); cells];
        let mut col_moves = vec![Vec::new(); cells];
        for c in 0..cells {
            let (_, i, j) = cell_block[c];
            let (i, j) = (i as usize, j as usize);
            for a2 in 0..l2 {
                for j2 in 0..kappa {
                    let c2 = (a2 * gamma + i) * kappa + j2;
                    if c2 != c && row_chain[c2] == row_chain[c] {
                        let dnu = pm[i * kappa + j] as i32 - pm[i * kappa + j2] as i32;
                        row_moves[c].push((c2 as u32, dnu));
                    }
                }
            }
            let (a, _, _) = cell_block[c];
            for i2 in 0..gamma {
                if i2 != i {
                    col_moves[c].push(((a as usize * gamma + i2) * kappa + j) as u32);
                }
            }
        }
        Ok(ProtoSupport {
            gamma,
            kappa,
            z: spec.block.z,
            m: spec.m,
            l: spec.l,
            l2,
            pm,
            cm,
            row_chain,
            cell_block,
            row_moves,
            col_moves,
        })
    }

    fn dims(&self) -> ProtoDims {
        ProtoDims { gamma: self.gamma, kappa: self.kappa, z: self.z, m: self.m, l: self.l, l2: self.l2 }
    }

    fn cells(&self) -> usize {
        self.l2 * self.gamma * self.kappa
    }

    #[inline]
    fn pm_at(&self, i: u32, j: u32) -> i32 {
        self.pm[i as usize * self.kappa + j as usize] as i32
    }

    #[inline]
    fn power(&self, cell: u32) -> i64 {
        let (_, i, j) = self.cell_block[cell as usize];
        self.cm[i as usize * self.kappa + j as usize] as i64
    }

    /// Lifted walk over anchored positions: returns the closure sum mod `z`
    /// and whether all `k` visited nodes are distinct. Node identities carry
    /// (kind, chain, replica, block index), so the result is independent of
    /// the starting intra-circulant shift.
    fn walk(&self, positions: &[(i32, u32)]) -> (u32, bool) {
        let k = positions.len();
        let z = self.z as i64;
        let mut nodes: Vec<(u8, u32, i32, u32, i64)> = Vec::with_capacity(k);
        let (_, cell0) = positions[0];
        let (a0, _, j0) = self.cell_block[cell0 as usize];
        let nu0 = positions[0].0;
        nodes.push((1, a0, nu0, j0, 0));
        let mut b: i64 = 0;
        for (t, &(nu, cell)) in positions.iter().enumerate() {
            let f = self.power(cell);
            if t % 2 == 0 {
                b = (b - f).rem_euclid(z);
                let (_, i, j) = self.cell_block[cell as usize];
                let r = nu + self.pm_at(i, j);
                if t < k - 1 {
                    nodes.push((0, self.row_chain[cell as usize], r, i, b));
                }
            } else {
                b = (b + f).rem_euclid(z);
                let (a, _, j) = self.cell_block[cell as usize];
                if t < k - 1 {
                    nodes.push((1, a, nu, j, b));
                }
            }
        }
        let closure = b as u32;
        let mut simple = true;
        'outer: for x in 0..nodes.len() {
            for y in x + 1..nodes.len() {
                if nodes[x] == nodes[y] {
                    simple = false;
                    break 'outer;
                }
            }
        }
        (closure, simple)
    }

    /// Decodes and validates a global-coordinate signature into anchored
    /// `(ν, cell)` positions (leftmost replica shifted to 0).
    fn decode_signature(&self, sig: &CycleSignature) -> Result<Vec<(i32, u32)>> {
        let k = sig.0.len();
        if !(MIN_K..=MAX_K).contains(&k) || !k.is_multiple_of(2) {
            return Err(Error::invalid(format!("signature length {k} out of range (even, {MIN_K}..={MAX_K})")));
        }
        let dims = self.dims();
        let mut positions = Vec::with_capacity(k);
        for pos in &sig.0 {
            let (bchain, r, i) = dims.row_info(pos[0])?;
            let (a, nu, j) = dims.col_info(pos[1])?;
            if r < nu || r - nu != self.pm[i * self.kappa + j] as usize {
                return Err(Error::invalid(format!("position [{}, {}] is a zero circulant", pos[0], pos[1])));
            }
            let cell = ((a * self.gamma + i) * self.kappa + j) as u32;
            if self.row_chain[cell as usize] as usize != bchain {
                return Err(Error::invalid(format!("position [{}, {}] is a zero circulant", pos[0], pos[1])));
            }
            positions.push((nu as i32, cell));
        }
        // Alternation: even transitions share the row group, odd share the
        // column group, closing pair shares the column group.
        for t in 0..k {
            let (nu_a, ca) = positions[t];
            let (nu_b, cb) = positions[(t + 1) % k];
            if (nu_a, ca) == (nu_b, cb) {
                return Err(Error::invalid(format!("consecutive positions {t} equal")));
            }
            let (aa, ia, ja) = self.cell_block[ca as usize];
            let (ab, ib, jb) = self.cell_block[cb as usize];
            let share = if t % 2 == 0 {
                ia == ib
                    && self.row_chain[ca as usize] == self.row_chain[cb as usize]
                    && nu_a + self.pm_at(ia, ja) == nu_b + self.pm_at(ib, jb)
            } else {
                aa == ab && ja == jb && nu_a == nu_b
            };
            if !share {
                return Err(Error::invalid(format!(
                    "positions {t} and {} do not share a {} group",
                    (t + 1) % k,
                    if t % 2 == 0 { "row" } else { "column" }
                )));
            }
        }
        let min_nu = positions.iter().map(|p| p.0).min().unwrap();
        for p in &mut positions {
            p.0 -= min_nu;
        }
        Ok(positions)
    }

    /// Re-encodes an anchored canonical key sequence as a global signature
    /// placed with its leftmost replica at `shift`.
    fn to_global_signature(&self, keys: &[u64], shift: usize) -> CycleSignature {
        let row_stride = (self.l + self.m) * self.gamma;
        let col_stride = self.l * self.kappa;
        let seq = keys
            .iter()
            .map(|&key| {
                let (nu, cell) = decode_pos(key);
                let (a, i, j) = self.cell_block[cell as usize];
                let nu = nu as usize + shift;
                let r = nu + self.pm_at(i, j) as usize;
                let row = self.row_chain[cell as usize] as usize * row_stride + r * self.gamma + i as usize;
                let col = a as usize * col_stride + nu * self.kappa + j as usize;
                [row, col]
            })
            .collect();
        CycleSignature(seq)
    }

    /// Enumerates all anchored signature classes of length `k` and applies
    /// the scope's placement weighting.
    fn enumerate(&self, k: usize, scope: CatalogScope, budget: usize) -> Result<CycleCatalog> {
        if !(MIN_K..=MAX_K).contains(&k) || !k.is_multiple_of(2) {
            return Err(Error::invalid(format!("cycle length {k} out of range (even, {MIN_K}..={MAX_K})")));
        }
        let stored = AtomicUsize::new(0);
        let mut per_anchor: Vec<Vec<ClassRec>> = (0..self.cells() as u32)
            .into_par_iter()
            .map(|anchor| {
                let mut dfs = AnchorDfs::new(self, k, anchor, budget, &stored);
                dfs.run()?;
                let mut out = dfs.out;
                out.sort_unstable_by(|a, b| a.key.cmp(&b.key));
                Ok(out)
            })
            .collect::<Result<_>>()?;

        let nu0 = self.dims().middle_replica() as i32;
        let mut classes = Vec::new();
        let mut total_cycles = 0u64;
        for rec in per_anchor.drain(..).flatten() {
            let span = rec.span;
            let (placements, shift) = match scope {
                CatalogScope::Whole => ((self.l - span as usize) as u64, 0usize),
                CatalogScope::MiddleReplica => {
                    // Placements s with 0 ≤ s ≤ L−1−span that put an occupied
                    // replica offset at the middle replica: s = nu0 − dnu.
                    let hi = nu0.min(span);
                    let lo = (nu0 - (self.l as i32 - 1 - span)).max(0);
                    let mut count = 0u64;
                    let mut smallest = None;
                    for dnu in lo..=hi {
                        if rec.occupied >> dnu & 1 == 1 {
                            count += 1;
                            smallest = Some((nu0 - dnu) as usize);
                        }
                    }
                    match smallest {
                        Some(s) => (count, s),
                        None => continue,
                    }
                }
            };
            let realized = rec.zero_closure && rec.lift_simple;
            let cycles = if realized {
                let num = placements * self.z as u64 * rec.period as u64;
                if !num.is_multiple_of(k as u64) {
                    return Err(Error::invalid("internal error: non-integral cycle weight for a simple class"));
                }
                num / k as u64
            } else {
                0
            };
            total_cycles += cycles;
            classes.push(SignatureClass {
                signature: self.to_global_signature(&rec.key, shift),
                placements,
                span: span as usize,
                period: rec.period,
                zero_closure: rec.zero_closure,
                lift_simple: rec.lift_simple,
                cycles,
            });
        }
        Ok(CycleCatalog { k, scope, dims: self.dims(), classes, total_cycles })
    }

    /// Canonicalizes an explicit anchored position sequence and computes its
    /// class record (used for constructed signatures, e.g. MD images).
    pub(crate) fn analyze_sequence(&self, positions: &[(i32, u32)]) -> Result<ClassRec> {
        let keys: Vec<u64> = positions.iter().map(|&(nu, cell)| encode_pos(nu, cell)).collect();
        let mut buf = Vec::new();
        let mut key = Vec::new();
        canonical_key(&keys, &mut buf, &mut key);
        Ok(self.class_record(key))
    }

    fn class_record(&self, key: Vec<u64>) -> ClassRec {
        let k = key.len();
        let positions: Vec<(i32, u32)> = key.iter().map(|&p| decode_pos(p)).collect();
        let mut occupied: u128 = 0;
        let mut span: i32 = 0;
        for &(nu, _) in &positions {
            occupied |= 1u128 << nu;
            span = span.max(nu);
        }
        let mut period = k;
        let mut rho = 2;
        while rho < k {
            if k.is_multiple_of(rho) && (0..k).all(|t| key[t] == key[(t + rho) % k]) {
                period = rho;
                break;
            }
            rho += 2;
        }
        let (closure, simple) = self.walk(&positions);
        ClassRec { key, span, occupied, period, zero_closure: closure == 0, lift_simple: simple }
    }
}

/// Internal class record keyed by the canonical anchored sequence.
pub(crate) struct ClassRec {
    pub key: Vec<u64>,
    pub span: i32,
    pub occupied: u128,
    pub period: usize,
    pub zero_closure: bool,
    pub lift_simple: bool,
}

/// Lexicographically minimal variant over even rotations of the sequence and
/// of its reversal (both preserve the row-share-first transition pattern).
fn canonical_key(seq: &[u64], buf: &mut Vec<u64>, best: &mut Vec<u64>) {
    let k = seq.len();
    best.clear();
    best.extend_from_slice(seq);
    let consider = |buf: &mut Vec<u64>, best: &mut Vec<u64>| {
        if buf.as_slice() < best.as_slice() {
            std::mem::swap(buf, best);
        }
    };
    for start in (0..k).step_by(2) {
        if start > 0 {
            buf.clear();
            buf.extend_from_slice(&seq[start..]);
            buf.extend_from_slice(&seq[..start]);
            consider(buf, best);
        }
        buf.clear();
        buf.extend((0..k).map(|t| seq[(k - 1 + start - t) % k]));
        consider(buf, best);
    }
}

/// Depth-first enumeration of all signatures whose minimal position is the
/// anchor cell at replica offset 0.
struct AnchorDfs<'a> {
    sup: &'a ProtoSupport,
    k: usize,
    anchor: u32,
    /// Max replica offset allowed at each position index: the walk must be
    /// able to return to offset 0 with the remaining row transitions.
    nu_cap: Vec<i32>,
    path: Vec<(i32, u32)>,
    keybuf: Vec<u64>,
    canon_buf: Vec<u64>,
    canon_best: Vec<u64>,
    found: HashSet<Vec<u64>>,
    out: Vec<ClassRec>,
    budget: usize,
    stored: &'a AtomicUsize,
}

impl<'a> AnchorDfs<'a> {
    fn new(sup: &'a ProtoSupport, k: usize, anchor: u32, budget: usize, stored: &'a AtomicUsize) -> Self {
        let mut nu_cap = vec![0i32; k];
        for (t, cap) in nu_cap.iter_mut().enumerate() {
            let remaining_rows = (t..=k.saturating_sub(2)).filter(|u| u % 2 == 0).count();
            *cap = ((sup.m * remaining_rows) as i32).min(sup.l as i32 - 1);
        }
        AnchorDfs {
            sup,
            k,
            anchor,
            nu_cap,
            path: Vec::with_capacity(k),
            keybuf: Vec::with_capacity(k),
            canon_buf: Vec::with_capacity(k),
            canon_best: Vec::with_capacity(k),
            found: HashSet::new(),
            out: Vec::new(),
            budget,
            stored,
        }
    }

    fn run(&mut self) -> Result<()> {
        self.path.push((0, self.anchor));
        self.step(1)
    }

    fn step(&mut self, t: usize) -> Result<()> {
        if t == self.k - 1 {
            return self.close();
        }
        let (nu, cell) = *self.path.last().unwrap();
        if t % 2 == 1 {
            // Transition t−1 is even: share the row group.
            for idx in 0..self.sup.row_moves[cell as usize].len() {
                let (c2, dnu) = self.sup.row_moves[cell as usize][idx];
                let nu2 = nu + dnu;
                if nu2 < 0 || nu2 > self.nu_cap[t] || (nu2 == 0 && c2 < self.anchor) {
                    continue;
                }
                self.path.push((nu2, c2));
                self.step(t + 1)?;
                self.path.pop();
            }
        } else {
            // Transition t−1 is odd: share the column group (same replica).
            for idx in 0..self.sup.col_moves[cell as usize].len() {
                let c2 = self.sup.col_moves[cell as usize][idx];
                if nu == 0 && c2 < self.anchor {
                    continue;
                }
                self.path.push((nu, c2));
                self.step(t + 1)?;
                self.path.pop();
            }
        }
        Ok(())
    }

    /// The last position is determined: it must share the anchor's column
    /// group (same chain, replica 0, column) and the previous position's row
    /// group, which fixes its block row. O(1) validity check.
    fn close(&mut self) -> Result<()> {
        let (nu_p, cell_p) = *self.path.last().unwrap();
        let (a0, i0, j0) = self.sup.cell_block[self.anchor as usize];
        let (_, i_p, j_p) = self.sup.cell_block[cell_p as usize];
        if i_p <= i0 {
            // Equal block row would duplicate the anchor position (the
            // closing position shares both its groups); smaller would sort
            // below the anchor.
            return Ok(());
        }
        let c2 = ((a0 as usize * self.sup.gamma + i_p as usize) * self.sup.kappa + j0 as usize) as u32;
        if self.sup.row_chain[c2 as usize] != self.sup.row_chain[cell_p as usize]
            || self.sup.pm_at(i_p, j0) != nu_p + self.sup.pm_at(i_p, j_p)
            || (nu_p == 0 && c2 == cell_p)
        {
            return Ok(());
        }
        self.path.push((0, c2));
        self.keybuf.clear();
        self.keybuf.extend(self.path.iter().map(|&(nu, cell)| encode_pos(nu, cell)));
        canonical_key(&self.keybuf, &mut self.canon_buf, &mut self.canon_best);
        if !self.found.contains(self.canon_best.as_slice()) {
            if self.stored.fetch_add(1, Ordering::Relaxed) + 1 > self.budget {
                self.path.pop();
                return Err(Error::cap(format!("signature budget of {} classes exceeded", self.budget)));
            }
            let key = self.canon_best.clone();
            self.found.insert(key.clone());
            self.out.push(self.sup.class_record(key));
        }
        self.path.pop();
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle.
// ---------------------------------------------------------------------------

/// Counts simple length-`k` cycles of a binary matrix's bipartite graph by
/// exhaustive rooted search. Each cycle is counted once: the search roots at
/// the cycle's smallest node and fixes the direction by requiring the second
/// node to be smaller than the last.
pub fn brute_force_count(matrix: &SparseBinaryMatrix, k: usize) -> Result<u64> {
    if k < MIN_K || !k.is_multiple_of(2) {
        return Err(Error::invalid(format!("cycle length {k} out of range (even, ≥ {MIN_K})")));
    }
    let n_nodes = matrix.rows() + matrix.cols();
    if n_nodes > BRUTE_FORCE_NODE_CAP {
        return Err(Error::cap(format!(
            "graph has {n_nodes} nodes, above the brute-force cap of {BRUTE_FORCE_NODE_CAP}"
        )));
    }
    let rows = matrix.rows();
    let adj: Vec<&[u32]> = (0..rows)
        .map(|r| matrix.row(r))
        .chain((0..matrix.cols()).map(|c| matrix.col(c)))
        .collect();
    let neighbor = |v: usize, w: usize| -> usize {
        // Nodes are rows then columns; edges always cross sides.
        if v < rows {
            adj[v][w] as usize + rows
        } else {
            adj[v][w] as usize
        }
    };

    let mut total = 0u64;
    let mut visited = vec![false; n_nodes];
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(k);
    for start in 0..n_nodes {
        if adj[start].len() < 2 {
            continue;
        }
        // Index of the start node as stored in the opposite side's adjacency.
        let back: u32 = if start < rows { start as u32 } else { (start - rows) as u32 };
        visited[start] = true;
        stack.push((start, 0));
        let mut second: usize = usize::MAX;
        while let Some(&(v, next)) = stack.last() {
            let depth = stack.len() - 1;
            if depth == k - 1 {
                // Count the closing edge back to the start; `second < v`
                // fixes the traversal direction so each cycle counts once.
                if second < v && adj[v].binary_search(&back).is_ok() {
                    total += 1;
                }
                visited[v] = false;
                stack.pop();
                continue;
            }
            if next >= adj[v].len() {
                visited[v] = false;
                stack.pop();
                continue;
            }
            stack[depth].1 += 1;
            let w = neighbor(v, next);
            if w <= start || visited[w] {
                continue;
            }
            if depth == 0 {
                second = w;
            }
            visited[w] = true;
            stack.push((w, 0));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::BlockCodeSpec;
    use crate::registry::CodeRegistry;

    /// Uncoupled single-replica wrapper around a plain block code.
    fn block_as_sc(gamma: usize, kappa: usize, z: u32, cm: Vec<Vec<u32>>) -> ScCodeSpec {
        ScCodeSpec {
            block: BlockCodeSpec { gamma, kappa, z, cm },
            m: 0,
            l: 1,
            pm: vec![vec![0; kappa]; gamma],
        }
    }

    /// Two block rows: admits only lengths divisible by four. Powers chosen
    /// so the single block-level quad shape (columns 0 and 2, both rows)
    /// closes: −0 + 2 − 0 + 3 ≡ 0 (mod 5).
    fn toy_two_rows() -> ScCodeSpec {
        ScCodeSpec {
            block: BlockCodeSpec {
                gamma: 2,
                kappa: 3,
                z: 5,
                cm: vec![vec![0, 1, 2], vec![3, 0, 0]],
            },
            m: 1,
            l: 3,
            pm: vec![vec![0, 1, 0], vec![1, 0, 1]],
        }
    }

    /// Three block rows with lifted cycles at every counted length
    /// (12 / 8 / 32 at k = 4 / 6 / 8).
    fn toy_rich() -> ScCodeSpec {
        ScCodeSpec {
            block: BlockCodeSpec {
                gamma: 3,
                kappa: 4,
                z: 4,
                cm: vec![vec![1, 3, 0, 2], vec![0, 0, 3, 0], vec![1, 2, 1, 2]],
            },
            m: 2,
            l: 3,
            pm: vec![vec![0, 2, 0, 2], vec![1, 0, 0, 0], vec![1, 1, 1, 0]],
        }
    }

    #[test]
    fn two_by_two_grid_has_one_quad_class() {
        let spec = block_as_sc(2, 2, 5, vec![vec![0, 1], vec![2, 3]]);
        let catalog = enumerate_signatures(&spec, 4, CatalogScope::Whole).unwrap();
        assert_eq!(catalog.classes.len(), 1);
        let class = &catalog.classes[0];
        // −f₀₀ + f₀₁ − f₁₁ + f₁₀ = −0 + 1 − 3 + 2 = 0 mod 5 → z lifted cycles.
        assert!(class.zero_closure && class.lift_simple);
        assert_eq!(catalog.total_cycles, 5);
        assert_eq!(brute_force_count(&spec.assemble(), 4).unwrap(), 5);

        let spec = block_as_sc(2, 2, 5, vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(count_cycles(&spec, 4).unwrap(), 0);
        assert_eq!(brute_force_count(&spec.assemble(), 4).unwrap(), 0);
    }

    #[test]
    fn two_by_three_grid_has_three_quad_classes() {
        let spec = block_as_sc(2, 3, 7, vec![vec![0, 1, 2], vec![0, 2, 5]]);
        let catalog = enumerate_signatures(&spec, 4, CatalogScope::Whole).unwrap();
        assert_eq!(catalog.classes.len(), 3);
        for class in &catalog.classes {
            assert_eq!(class.period, 4);
            assert_eq!(class.placements, 1);
        }
    }

    #[test]
    fn oracle_agreement_on_toy_sc_codes() {
        for spec in [toy_two_rows(), toy_rich()] {
            let h = spec.assemble();
            for k in [4, 6, 8] {
                assert_eq!(
                    count_cycles(&spec, k).unwrap(),
                    brute_force_count(&h, k).unwrap(),
                    "cycle length {k}"
                );
            }
        }
        // The rich fixture is non-trivial at every counted length.
        let spec = toy_rich();
        assert!(count_cycles(&spec, 4).unwrap() > 0);
        assert!(count_cycles(&spec, 6).unwrap() > 0);
        assert!(count_cycles(&spec, 8).unwrap() > 0);
    }

    #[test]
    fn oracle_agreement_on_toy_md_codes() {
        let spec = toy_rich();
        let uniform = MdMappingSet::uniform(
            vec![vec![0, 1, 0, 2], vec![1, 0, 0, 0], vec![2, 2, 1, 0]],
            3,
            3,
        );
        let per_chain = MdMappingSet {
            l2: 3,
            d: 3,
            maps: vec![
                vec![vec![0, 1, 0, 2], vec![1, 0, 0, 0], vec![2, 2, 1, 0]],
                vec![vec![1, 0, 2, 0], vec![0, 0, 1, 2], vec![0, 1, 0, 0]],
                vec![vec![0, 2, 0, 1], vec![2, 0, 0, 0], vec![1, 0, 2, 0]],
            ],
        };
        for md in [uniform, per_chain] {
            let h = spec.assemble_md(&md).unwrap();
            let mut seen_any = false;
            for k in [4, 6, 8] {
                let n = count_cycles_md(&spec, &md, k).unwrap();
                assert_eq!(n, brute_force_count(&h, k).unwrap(), "cycle length {k}");
                seen_any |= n > 0;
            }
            assert!(seen_any);
        }
    }

    #[test]
    fn doubled_quad_traversals_follow_the_halfway_shift_rule() {
        // Power grid whose single 4-class has closure sum 2 mod 4: no
        // 4-cycles, but the doubled traversal closes (sum 4 ≡ 0) and stays
        // simple because the second lap runs at shift z/2.
        let spec = block_as_sc(2, 2, 4, vec![vec![0, 1], vec![0, 3]]);
        assert_eq!(count_cycles(&spec, 4).unwrap(), 0);
        let catalog = enumerate_signatures(&spec, 8, CatalogScope::Whole).unwrap();
        let doubled: Vec<_> = catalog.classes.iter().filter(|c| c.period == 4).collect();
        assert_eq!(doubled.len(), 1);
        assert!(doubled[0].zero_closure && doubled[0].lift_simple);
        // One placement × z × (period 4 / length 8) = 2 lifted cycles.
        assert_eq!(doubled[0].cycles, 2);
        assert_eq!(count_cycles(&spec, 8).unwrap(), brute_force_count(&spec.assemble(), 8).unwrap());

        // Same grid with closure sum 0: the doubled traversal repeats its
        // nodes exactly and must be rejected as non-simple.
        let spec = block_as_sc(2, 2, 4, vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(count_cycles(&spec, 4).unwrap(), 4);
        let catalog = enumerate_signatures(&spec, 8, CatalogScope::Whole).unwrap();
        let doubled: Vec<_> = catalog.classes.iter().filter(|c| c.period == 4).collect();
        assert_eq!(doubled.len(), 1);
        assert!(doubled[0].zero_closure && !doubled[0].lift_simple);
        assert_eq!(count_cycles(&spec, 8).unwrap(), brute_force_count(&spec.assemble(), 8).unwrap());
    }

    #[test]
    fn coupled_length_six_count_matches_bundled_family() {
        let reg = CodeRegistry::builtin();
        let spec = reg.code_spec("sc1", None).unwrap();
        let catalog = enumerate_signatures(&spec, 6, CatalogScope::Whole).unwrap();
        assert_eq!(catalog.total_cycles, 29_274);
        let placed: u64 = catalog.realized().map(|c| c.placements).sum();
        assert_eq!(placed, 1_722);
        assert!(catalog.realized().all(|c| c.period == 6));
    }

    #[test]
    fn two_block_rows_admit_only_lengths_divisible_by_four() {
        // With two block rows every column transition flips the block row, so
        // a closed alternating walk needs an even number of column
        // transitions: k/2 even, i.e. k ≡ 0 (mod 4).
        let spec = toy_two_rows();
        let catalog = enumerate_signatures(&spec, 6, CatalogScope::Whole).unwrap();
        assert!(catalog.classes.is_empty());
        assert_eq!(brute_force_count(&spec.assemble(), 6).unwrap(), 0);
    }

    #[test]
    fn zero_maps_scale_counts_by_chain_count() {
        let spec = toy_rich();
        for k in [4usize, 6, 8] {
            let single = count_cycles(&spec, k).unwrap();
            assert!(single > 0);
            for l2 in [2usize, 4] {
                let md = MdMappingSet::identity(3, 4, l2);
                assert_eq!(count_cycles_md(&spec, &md, k).unwrap(), l2 as u64 * single);
            }
        }
    }

    #[test]
    fn signatures_may_repeat_positions_nonconsecutively() {
        let spec = toy_two_rows();
        let catalog = enumerate_signatures(&spec, 8, CatalogScope::Whole).unwrap();
        let repeated = catalog.classes.iter().find(|c| {
            let seq = &c.signature.0;
            (0..seq.len()).any(|x| (x + 1..seq.len()).any(|y| seq[x] == seq[y]))
        });
        let class = repeated.expect("length-8 enumeration must include revisiting signatures");
        // Repeats are structural: the signature still validates and anchors.
        let canon = canonical_form(&class.signature, &spec, None).unwrap();
        assert_eq!(canon, class.signature);
    }

    #[test]
    fn closure_sum_negates_under_reversal_and_canonical_form_is_stable() {
        let spec = toy_rich();
        let catalog = enumerate_signatures(&spec, 8, CatalogScope::Whole).unwrap();
        assert!(!catalog.classes.is_empty());
        let z = spec.block.z;
        for class in catalog.classes.iter().take(40) {
            let sig = &class.signature;
            let s = lift_closure_sum(sig, &spec, None).unwrap();
            let reversed = CycleSignature(sig.0.iter().rev().cloned().collect());
            let s_rev = lift_closure_sum(&reversed, &spec, None).unwrap();
            assert_eq!((s + s_rev) % z, 0);
            // Any rotation by an even offset re-canonicalizes to the same form.
            let mut rotated = sig.0.clone();
            rotated.rotate_left(2);
            let canon = canonical_form(&CycleSignature(rotated), &spec, None).unwrap();
            assert_eq!(&canon, sig);
            let canon_rev = canonical_form(&reversed, &spec, None).unwrap();
            assert_eq!(&canon_rev, sig);
        }
    }

    #[test]
    fn middle_scope_keeps_middle_touching_placements() {
        let spec = toy_rich();
        let whole = enumerate_signatures(&spec, 6, CatalogScope::Whole).unwrap();
        let middle = enumerate_signatures(&spec, 6, CatalogScope::MiddleReplica).unwrap();
        assert!(!middle.classes.is_empty());
        let nu0 = middle.dims.middle_replica();
        assert_eq!(nu0, 1);
        for class in &middle.classes {
            assert!(class.placements >= 1);
            // The stored representative touches the middle replica.
            let touches = class
                .signature
                .0
                .iter()
                .any(|pos| middle.col_info(pos[1]).unwrap().1 == nu0);
            assert!(touches);
        }
        // Middle placements never exceed whole placements, and the middle
        // catalog is a subset of the whole catalog's classes.
        assert!(middle.classes.len() <= whole.classes.len());
        let whole_total: u64 = whole.classes.iter().map(|c| c.placements).sum();
        let middle_total: u64 = middle.classes.iter().map(|c| c.placements).sum();
        assert!(middle_total <= whole_total);
    }

    #[test]
    fn budget_overflow_reports_cap_error() {
        let spec = toy_rich();
        let err = enumerate_signatures_budgeted(&spec, None, 8, CatalogScope::Whole, 3).unwrap_err();
        assert!(matches!(err, Error::CapExceeded(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn brute_force_counts_complete_bipartite_graphs() {
        let all_ones = |r: usize, c: usize| {
            let entries: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
            SparseBinaryMatrix::from_entries(r, c, &entries).unwrap()
        };
        assert_eq!(brute_force_count(&all_ones(2, 2), 4).unwrap(), 1);
        assert_eq!(brute_force_count(&all_ones(2, 3), 4).unwrap(), 3);
        assert_eq!(brute_force_count(&all_ones(2, 3), 6).unwrap(), 0);
        assert_eq!(brute_force_count(&all_ones(3, 3), 4).unwrap(), 9);
        assert_eq!(brute_force_count(&all_ones(3, 3), 6).unwrap(), 6);
    }

    #[test]
    fn classify_active_matches_delta_and_zero_map_is_all_active() {
        let spec = toy_rich();
        let catalog = enumerate_signatures(&spec, 6, CatalogScope::Whole).unwrap();
        let identity = MdMappingSet::identity(3, 4, 3);
        let part = classify_active(&catalog, &identity).unwrap();
        assert!(!part.active.is_empty());
        assert_eq!(part.active.len(), catalog.realized().count());
        assert!(part.inactive.is_empty());

        let map = vec![vec![0, 1, 0, 2], vec![1, 0, 0, 0], vec![2, 2, 1, 0]];
        let md = MdMappingSet::uniform(map.clone(), 3, 3);
        let part = classify_active(&catalog, &md).unwrap();
        for &idx in &part.active {
            assert_eq!(catalog.class_delta(&catalog.classes[idx], &map, 3).unwrap(), 0);
        }
        for &idx in &part.inactive {
            assert_ne!(catalog.class_delta(&catalog.classes[idx], &map, 3).unwrap(), 0);
        }
        // Per-chain (non-uniform) sets are rejected.
        let mut maps = vec![map.clone(); 3];
        maps[2][0][0] = 2;
        let bad = MdMappingSet { l2: 3, d: 3, maps };
        assert!(classify_active(&catalog, &bad).is_err());
    }

    #[test]
    fn merged_image_prediction_matches_direct_counts() {
        let spec = toy_rich();
        let maps = vec![
            MdMappingSet::uniform(vec![vec![0; 4]; 3], 3, 3),
            MdMappingSet::uniform(vec![vec![1, 0, 0, 0], vec![0; 4], vec![0; 4]], 2, 2),
            MdMappingSet::uniform(vec![vec![0, 1, 0, 2], vec![1, 0, 0, 0], vec![2, 2, 1, 0]], 3, 3),
            MdMappingSet::uniform(vec![vec![3, 1, 0, 2], vec![1, 0, 2, 0], vec![0, 2, 1, 3]], 4, 4),
        ];
        for md in &maps {
            let spectrum = predict_md_spectrum(&spec, md, 8).unwrap();
            for &(n, predicted) in &spectrum.totals {
                assert_eq!(predicted, count_cycles_md(&spec, md, n).unwrap(), "merged length {n}");
            }
        }
        // Doubled laps of quads land at length 8 alongside native length-8
        // classes; the split is visible in the parts.
        let spectrum = predict_md_spectrum(&spec, &maps[1], 8).unwrap();
        assert!(spectrum
            .parts
            .iter()
            .any(|p| p.merged_k == 8 && p.source_k == 4 && p.laps == 2 && p.classes > 0));
        // Deeper horizon: tripled laps land at length 12.
        let spectrum = predict_md_spectrum(&spec, &maps[2], 12).unwrap();
        for &(n, predicted) in &spectrum.totals {
            assert_eq!(predicted, count_cycles_md(&spec, &maps[2], n).unwrap(), "merged length {n}");
        }
        assert!(spectrum.parts.iter().any(|p| p.merged_k == 12 && p.laps == 3));
    }

    #[test]
    fn image_builder_validates_inputs() {
        let spec = toy_rich();
        let md3 = MdMappingSet::uniform(vec![vec![0; 4]; 3], 3, 3);
        let whole = enumerate_signatures(&spec, 4, CatalogScope::Whole).unwrap();
        let class = &whole.classes[0];
        // Zero map: the class appears once per chain, unmerged.
        let images = md_images(&spec, &md3, &whole, class).unwrap();
        assert_eq!(images.len(), 3);
        assert!(images.iter().all(|im| im.laps == 1 && im.placements == class.placements));
        // Per-chain mapping sets have no shared map to merge under.
        let mut pc = vec![vec![vec![0u8; 4]; 3]; 3];
        pc[1][0][0] = 1;
        let per_chain = MdMappingSet { l2: 3, d: 2, maps: pc };
        assert!(md_images(&spec, &per_chain, &whole, class).is_err());
        // Only whole-matrix single-chain catalogs carry valid placements.
        let middle = enumerate_signatures(&spec, 4, CatalogScope::MiddleReplica).unwrap();
        assert!(md_images(&spec, &md3, &middle, &middle.classes[0]).is_err());
        let mdcat = enumerate_signatures_md(&spec, &md3, 4, CatalogScope::Whole).unwrap();
        assert!(md_images(&spec, &md3, &mdcat, &mdcat.classes[0]).is_err());
    }

    #[test]
    fn counts_are_multiples_of_the_lift_size() {
        let spec = toy_rich();
        for k in [4, 6, 8] {
            let n = count_cycles(&spec, k).unwrap();
            assert_eq!(n % spec.block.z as u64, 0, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_lengths_and_oversized_graphs() {
        let spec = toy_two_rows();
        assert!(count_cycles(&spec, 5).is_err());
        assert!(count_cycles(&spec, 2).is_err());
        assert!(count_cycles(&spec, 14).is_err());
        let big = SparseBinaryMatrix::from_entries(4000, 4000, &[(0, 0)]).unwrap();
        assert!(matches!(brute_force_count(&big, 4).unwrap_err(), Error::CapExceeded(_)));
    }
}
