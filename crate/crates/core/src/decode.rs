//! Quantized min-sum decoding with block, one-dimensional windowed, and
//! multi-dimensional windowed schedules, plus the windowed-latency model.
//!
//! The block decoder is a flooding min-sum on the bipartite graph of a
//! sparse parity-check matrix. Channel values and messages live on a
//! uniform symmetric integer grid (`2^bits − 1` levels including zero,
//! saturating), check nodes combine extrinsic inputs as sign product ×
//! magnitude minimum, and variable nodes sum channel plus extrinsic
//! messages.
//!
//! Windowed schedules decode a coupled chain replica by replica. The window
//! at index `l` sees only the edges among replicas `l..=min(l+W−1, L)`;
//! replicas decoded by earlier windows feed its checks as frozen, saturated
//! inputs; and only replica `l` is committed per window. The
//! multi-dimensional variant applies one such window to every chain of a
//! coupled set simultaneously — chains interact only between equal replica
//! indices, so the locality that justifies 1D windowed decoding is
//! preserved — and the window then decomposes into one local window per
//! (chain, relocation offset) segment.

use crate::code::{MdMappingSet, ScCodeSpec};
use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;
use serde::{Deserialize, Serialize};

// ------------------------------------------------------------- quantizer --

/// Settings of the quantized min-sum decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    /// Message-passing iterations per (window) decode.
    pub max_iterations: usize,
    /// Width of the message grid; magnitudes saturate at `2^(bits−1) − 1`.
    pub bits: u32,
    /// Value of one quantizer level, in channel-ratio units.
    pub step: f64,
    /// Stop as soon as the hard decisions satisfy every check.
    pub early_stop: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { max_iterations: 15, bits: 4, step: 0.5, early_stop: true }
    }
}

impl DecodeConfig {
    /// Rejects degenerate settings.
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("decoder needs at least one iteration"));
        }
        if !(2..=16).contains(&self.bits) {
            return Err(Error::invalid("quantizer width must lie in [2, 16] bits"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid("quantizer step must be positive and finite"));
        }
        Ok(())
    }

    /// Saturation magnitude of the grid, `2^(bits−1) − 1`.
    pub fn clip(&self) -> i32 {
        (1i32 << (self.bits - 1)) - 1
    }

    /// Rounds a channel value to the nearest grid level, saturating.
    pub fn quantize(&self, llr: f64) -> i32 {
        let c = self.clip() as f64;
        (llr / self.step).round().clamp(-c, c) as i32
    }
}

/// Result of one block (or window) decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Hard decision per column, `0` or `1`.
    pub decisions: Vec<u8>,
    /// Whether the decisions satisfy every check.
    pub converged: bool,
    /// Iterations actually spent.
    pub iterations: usize,
}

// -------------------------------------------------------------- min-sum --

/// Flooding min-sum decoder over a fixed parity-check matrix.
///
/// The graph is stored once (per check: its columns; per column: the ids of
/// its edges in the check-major order), so one decoder instance serves any
/// number of frames.
#[derive(Debug, Clone)]
pub struct MinSumDecoder {
    cfg: DecodeConfig,
    rows: usize,
    cols: usize,
    /// Column endpoint of every edge, grouped by check row.
    cn_vns: Vec<u32>,
    /// `cn_vns[cn_starts[r]..cn_starts[r+1]]` are the edges of check `r`.
    cn_starts: Vec<usize>,
    /// Edge ids (positions in `cn_vns`) grouped by column.
    vn_edges: Vec<u32>,
    /// `vn_edges[vn_starts[c]..vn_starts[c+1]]` are the edges of column `c`.
    vn_starts: Vec<usize>,
}

impl MinSumDecoder {
    /// Builds the decoder for a parity-check matrix.
    pub fn new(h: &SparseBinaryMatrix, cfg: DecodeConfig) -> Result<Self> {
        cfg.validate()?;
        let (rows, cols) = (h.rows(), h.cols());
        let mut cn_vns = Vec::with_capacity(h.nnz());
        let mut cn_starts = Vec::with_capacity(rows + 1);
        cn_starts.push(0);
        for r in 0..rows {
            cn_vns.extend_from_slice(h.row(r));
            cn_starts.push(cn_vns.len());
        }
        let mut vn_starts = vec![0usize; cols + 1];
        for &v in &cn_vns {
            vn_starts[v as usize + 1] += 1;
        }
        for c in 0..cols {
            vn_starts[c + 1] += vn_starts[c];
        }
        let mut fill = vn_starts.clone();
        let mut vn_edges = vec![0u32; cn_vns.len()];
        for (e, &v) in cn_vns.iter().enumerate() {
            vn_edges[fill[v as usize]] = e as u32;
            fill[v as usize] += 1;
        }
        Ok(Self { cfg, rows, cols, cn_vns, cn_starts, vn_edges, vn_starts })
    }

    /// Number of check rows.
    pub fn check_count(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn symbol_count(&self) -> usize {
        self.cols
    }

    /// Reconstructs the parity-check matrix the decoder runs on.
    pub fn matrix(&self) -> SparseBinaryMatrix {
        let entries: Vec<(usize, usize)> = (0..self.rows)
            .flat_map(|r| self.row_cols(r).iter().map(move |&c| (r, c as usize)))
            .collect();
        SparseBinaryMatrix::from_entries(self.rows, self.cols, &entries)
            .expect("decoder adjacency is a valid matrix")
    }

    fn row_cols(&self, r: usize) -> &[u32] {
        &self.cn_vns[self.cn_starts[r]..self.cn_starts[r + 1]]
    }

    /// Decodes one frame of channel values.
    pub fn decode(&self, llr: &[f64]) -> Result<DecodeOutcome> {
        self.decode_with_frozen(llr, &[])
    }

    /// Decodes with frozen side inputs folded into the checks.
    ///
    /// `frozen[r]` is the aggregate of already-decided, saturated inputs of
    /// check `r` that are not columns of this matrix: `0` when there are
    /// none, otherwise `+1`/`−1` for an even/odd number of decided ones.
    /// Such inputs behave as constant extrinsic messages of maximum
    /// magnitude, so only their sign parity matters. Pass an empty slice
    /// when no check has frozen inputs.
    pub fn decode_with_frozen(&self, llr: &[f64], frozen: &[i8]) -> Result<DecodeOutcome> {
        if llr.len() != self.cols {
            return Err(Error::invalid(format!(
                "channel vector has {} values, matrix has {} columns",
                llr.len(),
                self.cols
            )));
        }
        if !(frozen.is_empty() || frozen.len() == self.rows) {
            return Err(Error::invalid(format!(
                "frozen vector has {} entries, matrix has {} checks",
                frozen.len(),
                self.rows
            )));
        }
        let clip = self.cfg.clip();
        let q: Vec<i32> = llr.iter().map(|&v| self.cfg.quantize(v)).collect();
        let ne = self.cn_vns.len();
        let mut v2c = vec![0i32; ne];
        let mut c2v = vec![0i32; ne];
        for (c, &qc) in q.iter().enumerate() {
            for &e in &self.vn_edges[self.vn_starts[c]..self.vn_starts[c + 1]] {
                v2c[e as usize] = qc;
            }
        }
        let mut decisions = vec![0u8; self.cols];
        for it in 1..=self.cfg.max_iterations {
            // Check pass: per edge, sign product × magnitude minimum over
            // the other inputs; frozen inputs contribute their sign at
            // saturation magnitude, which is also the fallback when a check
            // has no other input at all.
            for r in 0..self.rows {
                let (lo, hi) = (self.cn_starts[r], self.cn_starts[r + 1]);
                if lo == hi {
                    continue;
                }
                let fr = frozen.get(r).copied().unwrap_or(0);
                let mut neg = u32::from(fr < 0);
                let (mut min1, mut min2, mut arg) = (i32::MAX, i32::MAX, usize::MAX);
                #[allow(clippy::needless_range_loop)] // `arg` must stay an absolute edge index
                for e in lo..hi {
                    let m = v2c[e];
                    neg ^= u32::from(m < 0);
                    let a = m.abs();
                    if a < min1 {
                        (min2, min1, arg) = (min1, a, e);
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in lo..hi {
                    let mag = if e == arg { min2 } else { min1 }.min(clip);
                    let s = neg ^ u32::from(v2c[e] < 0);
                    c2v[e] = if s == 1 { -mag } else { mag };
                }
            }
            // Variable pass: total = channel + all extrinsic; messages are
            // the total minus the receiving edge, saturated to the grid.
            for c in 0..self.cols {
                let edges = &self.vn_edges[self.vn_starts[c]..self.vn_starts[c + 1]];
                let mut total = q[c];
                for &e in edges {
                    total += c2v[e as usize];
                }
                decisions[c] = u8::from(total < 0);
                for &e in edges {
                    v2c[e as usize] = (total - c2v[e as usize]).clamp(-clip, clip);
                }
            }
            if self.cfg.early_stop && self.syndrome_zero(&decisions, frozen) {
                return Ok(DecodeOutcome { decisions, converged: true, iterations: it });
            }
        }
        let converged = self.syndrome_zero(&decisions, frozen);
        Ok(DecodeOutcome { decisions, converged, iterations: self.cfg.max_iterations })
    }

    fn syndrome_zero(&self, decisions: &[u8], frozen: &[i8]) -> bool {
        (0..self.rows).all(|r| {
            let mut parity = u8::from(frozen.get(r).copied().unwrap_or(0) < 0);
            for &v in self.row_cols(r) {
                parity ^= decisions[v as usize];
            }
            parity == 0
        })
    }
}

/// One-shot block decode of a frame against a parity-check matrix.
pub fn min_sum_decode(h: &SparseBinaryMatrix, llr: &[f64], cfg: DecodeConfig) -> Result<DecodeOutcome> {
    MinSumDecoder::new(h, cfg)?.decode(llr)
}

// --------------------------------------------------------------- windows --

/// One local window of a window configuration: the replica span of one
/// nonzero segment (chain `chain`, relocation offset `offset`, hence grid
/// block-row `(chain + offset) mod L2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalWindow {
    /// Chain (grid block-column) the segment reads from.
    pub chain: usize,
    /// Relocation offset of the segment, in `0..d`.
    pub offset: usize,
    /// First and last replica covered, 1-based inclusive.
    pub replicas: (usize, usize),
}

/// Precomputed windowed-decoding schedule over a coupled code.
///
/// The plan holds, for every window index `l ∈ 1..=L`, a decoder over the
/// window configuration — the subgraph on the columns of replicas
/// `l..=min(l+W−1, L)` of every chain and one check row group per covered
/// replica (plus the terminating row groups once the columns reach the end
/// of the chain). Every check in a window therefore constrains only
/// received replicas, and already-committed replicas feed the window
/// through frozen edges. Decoding runs the windows in order and commits
/// replica `l` of every chain at window `l`.
#[derive(Debug, Clone)]
pub struct WindowPlan {
    w: usize,
    l: usize,
    l2: usize,
    d: usize,
    n_cols: usize,
    stages: Vec<WindowStage>,
}

#[derive(Debug, Clone)]
struct WindowStage {
    decoder: MinSumDecoder,
    /// Global column of every local column, ascending.
    cols: Vec<u32>,
    /// Global row of every local row, ascending.
    rows: Vec<u32>,
    /// Edges from committed replicas into the window: (local check, global column).
    frozen: Vec<(u32, u32)>,
    /// Local columns this window commits (replica `l` of every chain).
    targeted: Vec<u32>,
}

impl WindowPlan {
    /// Builds the MD windowed schedule for a coupled set of `L2` chains.
    ///
    /// Requires a uniform mapping set (all chains share one relocation
    /// map), which is what makes every non-truncated window configuration
    /// identical, and a window size `W` with `m+1 ≤ W ≤ L`.
    pub fn md(spec: &ScCodeSpec, md: &MdMappingSet, w: usize, cfg: DecodeConfig) -> Result<Self> {
        spec.validate()?;
        md.validate(spec.block.gamma, spec.block.kappa)?;
        cfg.validate()?;
        if !md.is_uniform() {
            return Err(Error::invalid("windowed decoding requires all chains to share one relocation map"));
        }
        if !(spec.m + 1..=spec.l).contains(&w) {
            return Err(Error::invalid(format!(
                "window size must lie in [m+1, L] = [{}, {}], got {w}",
                spec.m + 1,
                spec.l
            )));
        }
        let h = spec.assemble_md(md)?;
        let z = spec.block.z as usize;
        let (kappa_z, gamma_z) = (spec.block.kappa * z, spec.block.gamma * z);
        let (seg_cols, seg_rows) = (spec.n(), spec.n_rows());
        let l2 = md.l2;
        let mut stages = Vec::with_capacity(spec.l);
        for l_d in 1..=spec.l {
            // 0-based replica span [lo, hi) of the window's columns. The
            // window keeps one check row group per column replica, so no
            // check ever reaches a replica that has not been received; once
            // the columns hit the end of the chain the window also absorbs
            // the m terminating row groups (with W = L the first window is
            // the whole matrix).
            let lo = l_d - 1;
            let hi = (l_d + w - 1).min(spec.l);
            let n_rep = hi - lo;
            let n_rowg = if hi == spec.l { spec.l + spec.m - lo } else { n_rep };
            let cols: Vec<u32> = (0..l2)
                .flat_map(|a| {
                    let base = a * seg_cols + lo * kappa_z;
                    (base..base + n_rep * kappa_z).map(|g| g as u32)
                })
                .collect();
            let rows: Vec<u32> = (0..l2)
                .flat_map(|b| {
                    let base = b * seg_rows + lo * gamma_z;
                    (base..base + n_rowg * gamma_z).map(|g| g as u32)
                })
                .collect();
            let mut entries = Vec::new();
            let mut frozen = Vec::new();
            for (li, &gr) in rows.iter().enumerate() {
                for &gc in h.row(gr as usize) {
                    let (a, off) = (gc as usize / seg_cols, gc as usize % seg_cols);
                    let nu = off / kappa_z;
                    if nu < lo {
                        frozen.push((li as u32, gc));
                    } else {
                        debug_assert!(nu < hi, "window check reaches an unreceived replica");
                        let local = a * n_rep * kappa_z + (off - lo * kappa_z);
                        entries.push((li, local));
                    }
                }
            }
            let sub = SparseBinaryMatrix::from_entries(rows.len(), cols.len(), &entries)?;
            let targeted: Vec<u32> =
                (0..l2).flat_map(|a| (0..kappa_z).map(move |k| (a * n_rep * kappa_z + k) as u32)).collect();
            stages.push(WindowStage { decoder: MinSumDecoder::new(&sub, cfg)?, cols, rows, frozen, targeted });
        }
        Ok(Self { w, l: spec.l, l2, d: md.d, n_cols: l2 * seg_cols, stages })
    }

    /// Builds the 1D windowed schedule: the single-chain specialization.
    pub fn one_dim(spec: &ScCodeSpec, w: usize, cfg: DecodeConfig) -> Result<Self> {
        Self::md(spec, &MdMappingSet::identity(spec.block.gamma, spec.block.kappa, 1), w, cfg)
    }

    /// Window size `W`.
    pub fn window_size(&self) -> usize {
        self.w
    }

    /// Number of windows, one per replica.
    pub fn window_count(&self) -> usize {
        self.l
    }

    /// Columns of the window configuration at `l ∈ 1..=L`.
    pub fn vn_count(&self, l: usize) -> Result<usize> {
        Ok(self.stage(l)?.cols.len())
    }

    /// Global column indices of the window configuration at `l`.
    pub fn window_cols(&self, l: usize) -> Result<Vec<usize>> {
        Ok(self.stage(l)?.cols.iter().map(|&g| g as usize).collect())
    }

    /// Global row indices of the window configuration at `l`.
    pub fn window_rows(&self, l: usize) -> Result<Vec<usize>> {
        Ok(self.stage(l)?.rows.iter().map(|&g| g as usize).collect())
    }

    /// Global columns committed by window `l`.
    pub fn targeted_cols(&self, l: usize) -> Result<Vec<usize>> {
        let stage = self.stage(l)?;
        Ok(stage.targeted.iter().map(|&t| stage.cols[t as usize] as usize).collect())
    }

    /// The window configuration at `l` as a matrix over its own rows/columns.
    pub fn configuration(&self, l: usize) -> Result<SparseBinaryMatrix> {
        Ok(self.stage(l)?.decoder.matrix())
    }

    /// The local windows making up the configuration at `l`, one per
    /// (chain, offset) segment; exactly `L2·d` of them.
    pub fn local_windows(&self, l: usize) -> Result<Vec<LocalWindow>> {
        self.stage(l)?;
        let span = (l, (l + self.w - 1).min(self.l));
        let mut out = Vec::with_capacity(self.l2 * self.d);
        for chain in 0..self.l2 {
            for offset in 0..self.d {
                out.push(LocalWindow { chain, offset, replicas: span });
            }
        }
        Ok(out)
    }

    fn stage(&self, l: usize) -> Result<&WindowStage> {
        if !(1..=self.l).contains(&l) {
            return Err(Error::invalid(format!("window index must lie in [1, {}], got {l}", self.l)));
        }
        Ok(&self.stages[l - 1])
    }

    /// Decodes one frame, running the windows in order and committing the
    /// targeted replica of each. Already-committed replicas reach later
    /// windows as frozen sign parities on their shared checks.
    pub fn decode(&self, llr: &[f64]) -> Result<Vec<u8>> {
        if llr.len() != self.n_cols {
            return Err(Error::invalid(format!(
                "channel vector has {} values, coupled code has {} columns",
                llr.len(),
                self.n_cols
            )));
        }
        let mut out = vec![0u8; self.n_cols];
        for stage in &self.stages {
            let local: Vec<f64> = stage.cols.iter().map(|&g| llr[g as usize]).collect();
            let mut frozen = vec![0i8; stage.decoder.check_count()];
            for &(lc, gv) in &stage.frozen {
                let s: i8 = if out[gv as usize] == 1 { -1 } else { 1 };
                let slot = &mut frozen[lc as usize];
                *slot = if *slot == 0 { s } else { *slot * s };
            }
            let outcome = stage.decoder.decode_with_frozen(&local, &frozen)?;
            for &t in &stage.targeted {
                out[stage.cols[t as usize] as usize] = outcome.decisions[t as usize];
            }
        }
        Ok(out)
    }
}

/// MD windowed decode of one frame with window size `w`.
pub fn md_windowed_decode(
    spec: &ScCodeSpec,
    md: &MdMappingSet,
    llr: &[f64],
    w: usize,
    cfg: DecodeConfig,
) -> Result<Vec<u8>> {
    WindowPlan::md(spec, md, w, cfg)?.decode(llr)
}

/// 1D windowed decode of one frame with window size `w`.
pub fn windowed_decode_1d(spec: &ScCodeSpec, llr: &[f64], w: usize, cfg: DecodeConfig) -> Result<Vec<u8>> {
    WindowPlan::one_dim(spec, w, cfg)?.decode(llr)
}

// --------------------------------------------------------------- latency --

/// Latency model of windowed versus block decoding.
///
/// A block decoder needs the full frame before it starts, so its latency is
/// `T_rec + T_dec`. A window of size `W` starts once the `W` replicas of
/// its configuration are in — `(W+m)/L` of the receive time, since its
/// checks also need the `m` preceding, already-received replicas — and
/// iterates over `W/L` of the columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyEstimate {
    /// `((W+m)/L)·T_rec + (W/L)·T_dec`.
    pub window_bound: f64,
    /// The looser combined form `((W+m)/L)·(T_rec + T_dec)`.
    pub combined_bound: f64,
    /// Ratio of the combined bound to block latency: `(W+m)/L`.
    pub reduction: f64,
}

/// Bounds the latency of windowed decoding with window size `w` against a
/// block decoder that takes `t_rec` to receive and `t_dec` to decode.
pub fn latency_estimate(w: usize, m: usize, l: usize, t_rec: f64, t_dec: f64) -> Result<LatencyEstimate> {
    if l == 0 || !(m + 1..=l).contains(&w) {
        return Err(Error::invalid(format!("window size must lie in [m+1, L] = [{}, {l}], got {w}", m + 1)));
    }
    if !(t_rec.is_finite() && t_rec >= 0.0 && t_dec.is_finite() && t_dec >= 0.0) {
        return Err(Error::invalid("receive and decode times must be nonnegative and finite"));
    }
    let shared = (w + m) as f64 / l as f64;
    let window = w as f64 / l as f64;
    Ok(LatencyEstimate {
        window_bound: shared * t_rec + window * t_dec,
        combined_bound: shared * (t_rec + t_dec),
        reduction: shared,
    })
}
