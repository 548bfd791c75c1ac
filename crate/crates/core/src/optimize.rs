//! Relocation-map construction: merge analysis per signature, the
//! score-voting rule, beam tree search, and random baselines.
//!
//! Chain-coupling a code `L2` times replicates every cycle of the constituent
//! graph once per chain. Relocating circulants (assigning nonzero map values)
//! merges each signature's `L2` instances into `gcd(L2, Δ)` longer cycles,
//! where `Δ` is the signature's alternating map sum; signatures with `Δ = 0`
//! stay at their original length ("active"). The optimizer targets the
//! middle-replica catalog — by replica translation, improving the middle
//! section improves every section — and greedily relocates one circulant per
//! level, keeping all tied-best leaves like a beam search.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{MdMappingSet, ScCodeSpec};
use crate::cycles::{enumerate_signatures, CatalogScope, CycleCatalog, CycleSignature};
use crate::error::{Error, Result};

/// Leaves kept per tree level after trimming to the minimal active count.
pub const DEFAULT_TREE_WIDTH: usize = 64;

/// Number of merged cycles the `l2` instances of a signature with alternating
/// map sum `delta` form (each of length `l2·k / tau`); `l2` means unmerged.
pub fn tau(delta: usize, l2: usize) -> usize {
    crate::cycles::gcd(l2, delta)
}

/// Score of relocating `position` to `target` for one signature: the number
/// of same-length cycles its instances would merge into, `l2 / τ`, computed
/// with `target` substituted at every occurrence of the position.
///
/// Score 1 means the signature stays at its original length; `l2` means a
/// maximal merge into one long cycle.
pub fn score_option(
    catalog: &CycleCatalog,
    sig: &CycleSignature,
    position: (usize, usize),
    target: usize,
    map: &[Vec<u8>],
    l2: usize,
) -> Result<usize> {
    if l2 == 0 {
        return Err(Error::invalid("l2 must be positive"));
    }
    if target >= l2 {
        return Err(Error::invalid(format!("target {target} out of range for l2 = {l2}")));
    }
    let mut sum = 0i64;
    let mut occurrences = 0usize;
    for (t, pos) in sig.0.iter().enumerate() {
        let (_, _, i) = catalog.row_info(pos[0])?;
        let (_, _, j) = catalog.col_info(pos[1])?;
        let v = if (i, j) == position {
            occurrences += 1;
            target as i64
        } else {
            *map.get(i)
                .and_then(|row| row.get(j))
                .ok_or_else(|| Error::invalid("map smaller than block grid"))? as i64
        };
        sum += if t % 2 == 0 { v } else { -v };
    }
    if occurrences == 0 {
        return Err(Error::invalid("targeted position does not occur in the signature"));
    }
    Ok(l2 / tau(sum.rem_euclid(l2 as i64) as usize, l2))
}

/// Outcome of the score vote for one candidate position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreVote {
    /// Surviving relocation options, ascending.
    pub options: Vec<usize>,
    /// True iff the position occurs in no catalog cycle, so every option
    /// tied trivially.
    pub flagged: bool,
}

/// Elects relocation options for `position` by score voting over the catalog.
///
/// Every realized class containing the position casts one vote per option
/// `t ∈ {0..d−1}`: its score with `t` substituted. For each divisor `x` of
/// `l2` up to `l2/2`, ascending, the options with the fewest score-`x` votes
/// survive. Keeping (`t = 0`) competes like any other option.
pub fn score_voting(
    catalog: &CycleCatalog,
    position: (usize, usize),
    map: &[Vec<u8>],
    d: usize,
    l2: usize,
) -> Result<ScoreVote> {
    let engine = VoteEngine::new(catalog, l2)?;
    if map.len() != engine.gamma || map.iter().any(|row| row.len() != engine.kappa) {
        return Err(Error::invalid("map does not match the block grid"));
    }
    if position.0 >= engine.gamma || position.1 >= engine.kappa {
        return Err(Error::invalid("position outside the block grid"));
    }
    if d == 0 || d > l2 {
        return Err(Error::invalid(format!("depth {d} out of range for l2 = {l2}")));
    }
    if map[position.0][position.1] != 0 {
        return Err(Error::invalid("targeted position is already relocated"));
    }
    let flat: Vec<u8> = map.iter().flatten().copied().collect();
    Ok(engine.vote_with(&engine.deltas(&flat), position, d))
}

/// One relocation along a tree path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelocationDecision {
    pub row: usize,
    pub col: usize,
    /// Chain offset the circulants move to (never 0 on a tree path).
    pub target: usize,
}

/// One node of the solution tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNode {
    /// Index of the parent node; `None` for the root.
    pub parent: Option<usize>,
    /// The relocation this node adds to its parent's map; `None` for the root.
    pub decision: Option<RelocationDecision>,
    /// Number of relocations on the path (tree depth).
    pub level: usize,
    /// Active count under the node's map: middle-replica signature classes
    /// that still merge into length-`k` cycles.
    pub active: u64,
}

/// Per-level search statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    /// Children generated before trimming.
    pub expanded: usize,
    /// Children kept after trimming to the minimal active count.
    pub surviving: usize,
    pub min_active: u64,
}

/// The explored tree of relocation decisions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionTree {
    pub nodes: Vec<TreeNode>,
    pub levels: Vec<LevelSummary>,
    /// Leaves alive when the search stopped.
    pub frontier: Vec<usize>,
    /// Frontier leaf selected by the seeded draw.
    pub chosen: usize,
    /// True iff the search stopped because no leaf could expand.
    pub early_terminated: bool,
}

impl SolutionTree {
    /// Relocation map accumulated along the path from the root to `node`.
    pub fn map_of(&self, node: usize, gamma: usize, kappa: usize) -> Result<Vec<Vec<u8>>> {
        let mut map = vec![vec![0u8; kappa]; gamma];
        let mut cur = Some(node);
        while let Some(idx) = cur {
            let n = self.nodes.get(idx).ok_or_else(|| Error::invalid("node index out of range"))?;
            if let Some(d) = &n.decision {
                map[d.row][d.col] = d.target as u8;
            }
            cur = n.parent;
        }
        Ok(map)
    }
}

/// A constructed chain coupling: the chosen mapping set and the search tree
/// that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Construction {
    pub mapping: MdMappingSet,
    /// Active count of the chosen leaf.
    pub active: u64,
    pub tree: SolutionTree,
}

/// Precomputed per-class data for fast vote and active-count evaluation:
/// every quantity the search needs is linear in the map through the signed
/// occurrence sums.
struct VoteEngine {
    l2: usize,
    gamma: usize,
    kappa: usize,
    /// Per realized class: sparse `(block cell, occurrences, signed sum)`.
    classes: Vec<Vec<(u32, u32, i32)>>,
}

impl VoteEngine {
    fn new(catalog: &CycleCatalog, l2: usize) -> Result<VoteEngine> {
        if l2 == 0 {
            return Err(Error::invalid("l2 must be positive"));
        }
        let (gamma, kappa) = (catalog.dims.gamma, catalog.dims.kappa);
        let mut classes = Vec::new();
        for class in catalog.realized() {
            let mut occ: Vec<(u32, u32, i32)> = Vec::new();
            for (t, pos) in class.signature.0.iter().enumerate() {
                let (_, _, i) = catalog.row_info(pos[0])?;
                let (_, _, j) = catalog.col_info(pos[1])?;
                let cell = (i * kappa + j) as u32;
                let s = if t % 2 == 0 { 1 } else { -1 };
                match occ.iter_mut().find(|e| e.0 == cell) {
                    Some(e) => {
                        e.1 += 1;
                        e.2 += s;
                    }
                    None => occ.push((cell, 1, s)),
                }
            }
            classes.push(occ);
        }
        Ok(VoteEngine { l2, gamma, kappa, classes })
    }

    /// Alternating map sum of each class under `map` (flattened γ×κ).
    fn deltas(&self, map: &[u8]) -> Vec<usize> {
        let l2 = self.l2 as i64;
        self.classes
            .iter()
            .map(|occ| {
                let sum: i64 = occ.iter().map(|&(cell, _, s)| s as i64 * map[cell as usize] as i64).sum();
                sum.rem_euclid(l2) as usize
            })
            .collect()
    }

    /// Vote with per-class deltas already computed for the node's map (the
    /// candidate position is unrelocated, so its own contribution is zero).
    fn vote_with(&self, deltas: &[usize], position: (usize, usize), d: usize) -> ScoreVote {
        let cell = (position.0 * self.kappa + position.1) as u32;
        let l2 = self.l2;
        // Tally of resulting merge counts per option, over classes containing
        // the position: scores[t][x-1] = |{classes : l2/τ(Δ_t) = x}|.
        let mut scores = vec![vec![0u32; l2]; d];
        let mut psi = 0usize;
        for (occ, &delta) in self.classes.iter().zip(deltas) {
            let Some(&(_, _, s)) = occ.iter().find(|e| e.0 == cell) else {
                continue;
            };
            psi += 1;
            for (t, tally) in scores.iter_mut().enumerate() {
                let with_t = (delta as i64 + t as i64 * s as i64).rem_euclid(l2 as i64) as usize;
                tally[l2 / tau(with_t, l2) - 1] += 1;
            }
        }
        if psi == 0 {
            return ScoreVote { options: (0..d).collect(), flagged: true };
        }
        let mut options: Vec<usize> = (0..d).collect();
        for x in 1..=l2 / 2 {
            if !l2.is_multiple_of(x) {
                continue;
            }
            let best = options.iter().map(|&t| scores[t][x - 1]).min().unwrap();
            options.retain(|&t| scores[t][x - 1] == best);
        }
        ScoreVote { options, flagged: false }
    }

    /// Candidate positions ranked by active-cycle participation, descending;
    /// occurrences count with repetition, ties break row-major.
    fn ranking(&self, deltas: &[usize], map: &[u8]) -> Vec<(usize, usize)> {
        let mut weight = vec![0u64; self.gamma * self.kappa];
        for (occ, &delta) in self.classes.iter().zip(deltas) {
            if delta != 0 {
                continue;
            }
            for &(cell, r, _) in occ {
                weight[cell as usize] += r as u64;
            }
        }
        let mut order: Vec<(usize, usize)> = (0..self.gamma * self.kappa)
            .filter(|&c| map[c] == 0)
            .map(|c| (c / self.kappa, c % self.kappa))
            .collect();
        order.sort_by_key(|&(i, j)| (u64::MAX - weight[i * self.kappa + j], i, j));
        order
    }
}

/// Builds a uniform mapping set by beam tree search over relocations.
///
/// Each level targets, per leaf, the highest-ranked unrelocated position
/// whose vote excludes keeping, and branches on the surviving options. Leaves
/// are trimmed to the level's minimal active count (then to
/// [`DEFAULT_TREE_WIDTH`] in path order); the search stops after `relocations`
/// levels or when no leaf can expand. One surviving leaf, drawn with the
/// seeded generator, supplies the returned map.
pub fn construct_md(
    spec: &ScCodeSpec,
    k: usize,
    l2: usize,
    d: usize,
    relocations: usize,
    seed: u64,
) -> Result<Construction> {
    spec.validate()?;
    if l2 == 0 {
        return Err(Error::invalid("l2 must be positive"));
    }
    if d == 0 || d > l2 {
        return Err(Error::invalid(format!("depth {d} out of range (1..={l2})")));
    }
    let (gamma, kappa) = (spec.block.gamma, spec.block.kappa);
    if relocations > gamma * kappa {
        return Err(Error::invalid(format!(
            "relocation budget {relocations} exceeds the {gamma}×{kappa} block grid"
        )));
    }
    let catalog = enumerate_signatures(spec, k, CatalogScope::MiddleReplica)?;
    let engine = VoteEngine::new(&catalog, l2)?;
    let total = engine.classes.len() as u64;

    let mut nodes = vec![TreeNode { parent: None, decision: None, level: 0, active: total }];
    let mut maps: Vec<Vec<u8>> = vec![vec![0u8; gamma * kappa]];
    let mut frontier = vec![0usize];
    let mut levels = Vec::new();
    let mut early_terminated = false;

    for level in 1..=relocations {
        // (parent, decision, map, active), in path order.
        let mut children: Vec<(usize, RelocationDecision, Vec<u8>, u64)> = Vec::new();
        for &leaf in &frontier {
            let map = &maps[leaf];
            let deltas = engine.deltas(map);
            for (i, j) in engine.ranking(&deltas, map) {
                let vote = engine.vote_with(&deltas, (i, j), d);
                if vote.options.contains(&0) {
                    continue;
                }
                for t in vote.options {
                    let mut child_map = map.clone();
                    child_map[i * kappa + j] = t as u8;
                    let active =
                        engine.deltas(&child_map).iter().filter(|&&delta| delta == 0).count() as u64;
                    children.push((leaf, RelocationDecision { row: i, col: j, target: t }, child_map, active));
                }
                break;
            }
        }
        if children.is_empty() {
            early_terminated = true;
            break;
        }
        let expanded = children.len();
        let min_active = children.iter().map(|c| c.3).min().unwrap();
        frontier.clear();
        for (parent, decision, child_map, active) in children {
            if active != min_active || frontier.len() >= DEFAULT_TREE_WIDTH {
                continue;
            }
            frontier.push(nodes.len());
            nodes.push(TreeNode { parent: Some(parent), decision: Some(decision), level, active });
            maps.push(child_map);
        }
        levels.push(LevelSummary { level, expanded, surviving: frontier.len(), min_active });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = frontier[rng.random_range(0..frontier.len())];
    let flat = &maps[chosen];
    let map: Vec<Vec<u8>> = (0..gamma).map(|i| flat[i * kappa..(i + 1) * kappa].to_vec()).collect();
    let mapping = MdMappingSet::uniform(map, l2, d);
    mapping.validate(gamma, kappa)?;
    Ok(Construction {
        mapping,
        active: nodes[chosen].active,
        tree: SolutionTree { nodes, levels, frontier, chosen, early_terminated },
    })
}

/// Draws a relocation map uniformly at random: `relocations` distinct block
/// positions, each moved to a chain offset in `{1..d−1}`.
///
/// With `shared` one draw applies to every chain; otherwise each chain draws
/// independently (which breaks the uniform-map structure and can create
/// cycles shorter than the constituent girth).
pub fn random_md(
    spec: &ScCodeSpec,
    relocations: usize,
    d: usize,
    l2: usize,
    shared: bool,
    seed: u64,
) -> Result<MdMappingSet> {
    spec.validate()?;
    if l2 == 0 {
        return Err(Error::invalid("l2 must be positive"));
    }
    if d == 0 || d > l2 {
        return Err(Error::invalid(format!("depth {d} out of range (1..={l2})")));
    }
    let (gamma, kappa) = (spec.block.gamma, spec.block.kappa);
    if relocations > gamma * kappa {
        return Err(Error::invalid(format!(
            "relocation budget {relocations} exceeds the {gamma}×{kappa} block grid"
        )));
    }
    if relocations > 0 && d == 1 {
        return Err(Error::invalid("depth 1 admits no relocation targets"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let mut map = vec![vec![0u8; kappa]; gamma];
        for cell in rand::seq::index::sample(rng, gamma * kappa, relocations) {
            map[cell / kappa][cell % kappa] = rng.random_range(1..d) as u8;
        }
        map
    };
    let md = if shared {
        MdMappingSet::uniform(draw(&mut rng), l2, d)
    } else {
        let maps = (0..l2).map(|_| draw(&mut rng)).collect();
        MdMappingSet { l2, d, maps }
    };
    md.validate(gamma, kappa)?;
    Ok(md)
}
