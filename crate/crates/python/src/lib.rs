//! Python bindings for the coupled-code toolkit.
//!
//! Exposes the code specifications, mapping sets, assembled matrices, cycle
//! counting, the relocation search, decoding, BER simulation, and the
//! latency model as one in-process extension module.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mdsc::code::{BlockCodeSpec, MdMappingSet, ScCodeSpec};
use mdsc::cycles;
use mdsc::decode::{self, DecodeConfig, WindowPlan};
use mdsc::optimize;
use mdsc::registry::CodeRegistry;
use mdsc::sim::{self, DecoderMode, SimPlan};
use mdsc::SparseBinaryMatrix;

fn pyerr(e: mdsc::Error) -> PyErr {
    match e.exit_code() {
        3 => PyRuntimeError::new_err(e.to_string()),
        4 => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

// ------------------------------------------------------------- code specs --

/// A coupled chain: a circulant block code split into components and tiled
/// `L` times along the diagonal.
#[pyclass(frozen)]
struct ScCode {
    spec: ScCodeSpec,
}

#[pymethods]
impl ScCode {
    /// Builds a chain from raw parameters: `cm[i][j]` is the circulant
    /// power, `pm[i][j]` the component index in `0..=m`.
    #[new]
    fn new(gamma: usize, kappa: usize, z: u32, cm: Vec<Vec<u32>>, m: usize, l: usize, pm: Vec<Vec<u8>>) -> PyResult<Self> {
        let spec = ScCodeSpec { block: BlockCodeSpec { gamma, kappa, z, cm }, m, l, pm };
        spec.validate().map_err(pyerr)?;
        Ok(Self { spec })
    }

    /// Loads a bundled code by name, optionally at another coupling length.
    #[staticmethod]
    #[pyo3(signature = (name, length=None))]
    fn from_registry(name: &str, length: Option<usize>) -> PyResult<Self> {
        Ok(Self { spec: CodeRegistry::builtin().code_spec(name, length).map_err(pyerr)? })
    }

    #[getter]
    fn gamma(&self) -> usize {
        self.spec.block.gamma
    }

    #[getter]
    fn kappa(&self) -> usize {
        self.spec.block.kappa
    }

    #[getter]
    fn z(&self) -> u32 {
        self.spec.block.z
    }

    #[getter]
    fn m(&self) -> usize {
        self.spec.m
    }

    #[getter]
    fn l(&self) -> usize {
        self.spec.l
    }

    /// Code length in bits.
    #[getter]
    fn length(&self) -> usize {
        self.spec.n()
    }

    #[getter]
    fn rows(&self) -> usize {
        self.spec.n_rows()
    }

    #[getter]
    fn design_rate(&self) -> f64 {
        self.spec.design_rate()
    }

    /// Assembles the chain's parity-check matrix.
    fn assemble(&self) -> ParityMatrix {
        ParityMatrix { h: self.spec.assemble() }
    }

    /// Assembles the coupled-set parity-check matrix under a mapping set.
    fn assemble_md(&self, md: &MappingSet) -> PyResult<ParityMatrix> {
        Ok(ParityMatrix { h: self.spec.assemble_md(&md.md).map_err(pyerr)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "ScCode(gamma={}, kappa={}, z={}, m={}, l={})",
            self.spec.block.gamma, self.spec.block.kappa, self.spec.block.z, self.spec.m, self.spec.l
        )
    }
}

/// Relocation maps coupling `L2` chains: entry `(i, j) = t` sends that
/// circulant of every replica to the chain `t` steps away.
#[pyclass(frozen)]
struct MappingSet {
    md: MdMappingSet,
}

#[pymethods]
impl MappingSet {
    /// One shared γ×κ map applied to all chains.
    #[new]
    fn new(map: Vec<Vec<u8>>, l2: usize, d: usize) -> Self {
        Self { md: MdMappingSet::uniform(map, l2, d) }
    }

    /// Loads a bundled mapping set by name.
    #[staticmethod]
    fn from_registry(name: &str) -> PyResult<Self> {
        Ok(Self { md: CodeRegistry::builtin().map(name).map_err(pyerr)?.mapping_set() })
    }

    #[getter]
    fn l2(&self) -> usize {
        self.md.l2
    }

    #[getter]
    fn d(&self) -> usize {
        self.md.d
    }

    /// The shared map, or `None` when chains differ.
    fn shared_map(&self) -> Option<Vec<Vec<u8>>> {
        self.md.shared_map().cloned()
    }

    fn relocations_per_chain(&self) -> Vec<usize> {
        self.md.relocations_per_chain()
    }

    fn __repr__(&self) -> String {
        format!("MappingSet(l2={}, d={}, relocations={:?})", self.md.l2, self.md.d, self.md.relocations_per_chain())
    }
}

/// A sparse binary parity-check matrix.
#[pyclass(frozen)]
struct ParityMatrix {
    h: SparseBinaryMatrix,
}

#[pymethods]
impl ParityMatrix {
    #[getter]
    fn rows(&self) -> usize {
        self.h.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.h.cols()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.h.nnz()
    }

    /// Column indices of one check row.
    fn row(&self, r: usize) -> PyResult<Vec<u32>> {
        if r >= self.h.rows() {
            return Err(PyValueError::new_err(format!("row {r} out of range")));
        }
        Ok(self.h.row(r).to_vec())
    }

    /// Serializes to the adjacency-list text format.
    fn to_alist(&self) -> String {
        mdsc::formats::to_alist(&self.h)
    }

    fn __repr__(&self) -> String {
        format!("ParityMatrix({}×{}, {} ones)", self.h.rows(), self.h.cols(), self.h.nnz())
    }
}

// ---------------------------------------------------------- cycle counting --

/// Exact number of length-`k` cycles in the chain's lifted graph.
#[pyfunction]
fn count_cycles(code: &ScCode, k: usize) -> PyResult<u64> {
    cycles::count_cycles(&code.spec, k).map_err(pyerr)
}

/// Exact number of length-`k` cycles in the coupled set's lifted graph.
#[pyfunction]
fn count_cycles_md(code: &ScCode, md: &MappingSet, k: usize) -> PyResult<u64> {
    cycles::count_cycles_md(&code.spec, &md.md, k).map_err(pyerr)
}

/// Number of active cycles-`k`: `z` copies of every distinct constituent
/// cycle shape a uniform mapping set keeps at length `k`.
#[pyfunction]
fn count_active(code: &ScCode, md: &MappingSet, k: usize) -> PyResult<u64> {
    cycles::count_active(&code.spec, &md.md, k).map_err(pyerr)
}

/// Exhaustive cycle count on an assembled matrix (independent oracle).
#[pyfunction]
fn brute_force_count(h: &ParityMatrix, k: usize) -> PyResult<u64> {
    cycles::brute_force_count(&h.h, k).map_err(pyerr)
}

/// Predicted cycle totals of the coupled set at every even merged length
/// `4..=k_max`, derived from the constituent chain alone.
#[pyfunction]
fn predict_md_spectrum(code: &ScCode, md: &MappingSet, k_max: usize) -> PyResult<Vec<(usize, u64)>> {
    Ok(cycles::predict_md_spectrum(&code.spec, &md.md, k_max).map_err(pyerr)?.totals)
}

// ------------------------------------------------------ relocation search --

/// Tree search for a relocation map minimizing active cycles-`k`. Returns
/// `(mapping, active, levels)` where `levels` rows are
/// `(level, expanded, surviving, min_active)`.
#[pyfunction]
#[pyo3(signature = (code, k, l2, d, relocations, seed=1))]
fn construct_md(
    code: &ScCode,
    k: usize,
    l2: usize,
    d: usize,
    relocations: usize,
    seed: u64,
) -> PyResult<(MappingSet, u64, Vec<(usize, usize, usize, u64)>)> {
    let built = optimize::construct_md(&code.spec, k, l2, d, relocations, seed).map_err(pyerr)?;
    let levels =
        built.tree.levels.iter().map(|s| (s.level, s.expanded, s.surviving, s.min_active)).collect();
    Ok((MappingSet { md: built.mapping }, built.active, levels))
}

/// Draws a uniformly random mapping set (the search's baseline).
#[pyfunction]
#[pyo3(signature = (code, relocations, d, l2, shared=true, seed=1))]
fn random_md(
    code: &ScCode,
    relocations: usize,
    d: usize,
    l2: usize,
    shared: bool,
    seed: u64,
) -> PyResult<MappingSet> {
    Ok(MappingSet { md: optimize::random_md(&code.spec, relocations, d, l2, shared, seed).map_err(pyerr)? })
}

// ---------------------------------------------------------------- decoding --

fn decode_config(iterations: usize, bits: u32, step: f64, early_stop: bool) -> DecodeConfig {
    DecodeConfig { max_iterations: iterations, bits, step, early_stop }
}

/// Quantized min-sum decoding of one frame. Returns
/// `(decisions, converged, iterations)`.
#[pyfunction]
#[pyo3(signature = (h, llr, iterations=15, bits=4, step=0.5, early_stop=true))]
fn min_sum_decode(
    h: &ParityMatrix,
    llr: Vec<f64>,
    iterations: usize,
    bits: u32,
    step: f64,
    early_stop: bool,
) -> PyResult<(Vec<u8>, bool, usize)> {
    let out = decode::min_sum_decode(&h.h, &llr, decode_config(iterations, bits, step, early_stop))
        .map_err(pyerr)?;
    Ok((out.decisions, out.converged, out.iterations))
}

/// Windowed decoding of a coupled set, window size `w` replicas.
#[pyfunction]
#[pyo3(signature = (code, md, llr, w, iterations=15, bits=4, step=0.5, early_stop=true))]
#[allow(clippy::too_many_arguments)]
fn md_windowed_decode(
    code: &ScCode,
    md: &MappingSet,
    llr: Vec<f64>,
    w: usize,
    iterations: usize,
    bits: u32,
    step: f64,
    early_stop: bool,
) -> PyResult<Vec<u8>> {
    let cfg = decode_config(iterations, bits, step, early_stop);
    WindowPlan::md(&code.spec, &md.md, w, cfg).map_err(pyerr)?.decode(&llr).map_err(pyerr)
}

/// Windowed decoding of a single chain.
#[pyfunction]
#[pyo3(signature = (code, llr, w, iterations=15, bits=4, step=0.5, early_stop=true))]
fn windowed_decode_1d(
    code: &ScCode,
    llr: Vec<f64>,
    w: usize,
    iterations: usize,
    bits: u32,
    step: f64,
    early_stop: bool,
) -> PyResult<Vec<u8>> {
    let cfg = decode_config(iterations, bits, step, early_stop);
    WindowPlan::one_dim(&code.spec, w, cfg).map_err(pyerr)?.decode(&llr).map_err(pyerr)
}

// -------------------------------------------------------------- simulation --

/// One simulated BER point.
#[pyclass(frozen)]
struct BerPoint {
    #[pyo3(get)]
    snr_db: f64,
    #[pyo3(get)]
    frames: u64,
    #[pyo3(get)]
    bit_errors: u64,
    #[pyo3(get)]
    frame_errors: u64,
    #[pyo3(get)]
    ber: f64,
    #[pyo3(get)]
    fer: f64,
    #[pyo3(get)]
    ci95: (f64, f64),
}

#[pymethods]
impl BerPoint {
    fn __repr__(&self) -> String {
        format!(
            "BerPoint(snr_db={}, frames={}, ber={:.3e}, fer={:.3e})",
            self.snr_db, self.frames, self.ber, self.fer
        )
    }
}

/// Monte Carlo BER sweep over AWGN with BPSK signalling. `window` selects
/// 1D windowed decoding of a single chain, `md_window` the coupled-set
/// windowed decoder (requires `md`).
#[pyfunction]
#[pyo3(signature = (
    code, snrs, md=None, max_frames=100_000, min_bit_errors=100, min_frame_errors=0,
    seed=1, iterations=15, bits=4, step=0.5, window=None, md_window=None,
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    code: &ScCode,
    snrs: Vec<f64>,
    md: Option<&MappingSet>,
    max_frames: u64,
    min_bit_errors: u64,
    min_frame_errors: u64,
    seed: u64,
    iterations: usize,
    bits: u32,
    step: f64,
    window: Option<usize>,
    md_window: Option<usize>,
) -> PyResult<Vec<BerPoint>> {
    let mut plan = SimPlan::new("python", snrs);
    plan.max_frames = max_frames;
    plan.min_bit_errors = min_bit_errors;
    plan.min_frame_errors = min_frame_errors;
    plan.seed = seed;
    plan.decoder = decode_config(iterations, bits, step, true);
    plan.mode = match (window, md_window) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("window and md_window are exclusive")),
        (Some(w), None) => DecoderMode::Windowed { w },
        (None, Some(w)) => DecoderMode::MdWindowed { w },
        (None, None) => DecoderMode::Block,
    };
    let records = sim::simulate(&code.spec, md.map(|m| &m.md), &plan).map_err(pyerr)?;
    Ok(records
        .into_iter()
        .map(|r| BerPoint {
            snr_db: r.snr_db,
            frames: r.frames,
            bit_errors: r.bit_errors,
            frame_errors: r.frame_errors,
            ber: r.ber,
            fer: r.fer,
            ci95: r.ber_ci95(),
        })
        .collect())
}

// ----------------------------------------------------------------- latency --

/// Windowed-decoding latency bounds. Returns
/// `(window_bound, combined_bound, reduction)`.
#[pyfunction]
#[pyo3(signature = (w, m, l, t_rec=1.0, t_dec=1.0))]
fn latency_estimate(w: usize, m: usize, l: usize, t_rec: f64, t_dec: f64) -> PyResult<(f64, f64, f64)> {
    let est = decode::latency_estimate(w, m, l, t_rec, t_dec).map_err(pyerr)?;
    Ok((est.window_bound, est.combined_bound, est.reduction))
}

/// Names of the bundled codes and mapping sets: `(codes, maps)`.
#[pyfunction]
fn registry_names() -> (Vec<String>, Vec<String>) {
    let reg = CodeRegistry::builtin();
    (
        reg.codes.iter().map(|c| c.name.clone()).collect(),
        reg.maps.iter().map(|m| m.name.clone()).collect(),
    )
}

#[pymodule]
fn mdsc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ScCode>()?;
    m.add_class::<MappingSet>()?;
    m.add_class::<ParityMatrix>()?;
    m.add_class::<BerPoint>()?;
    m.add_function(wrap_pyfunction!(count_cycles, m)?)?;
    m.add_function(wrap_pyfunction!(count_cycles_md, m)?)?;
    m.add_function(wrap_pyfunction!(count_active, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_count, m)?)?;
    m.add_function(wrap_pyfunction!(predict_md_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(construct_md, m)?)?;
    m.add_function(wrap_pyfunction!(random_md, m)?)?;
    m.add_function(wrap_pyfunction!(min_sum_decode, m)?)?;
    m.add_function(wrap_pyfunction!(md_windowed_decode, m)?)?;
    m.add_function(wrap_pyfunction!(windowed_decode_1d, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(latency_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(registry_names, m)?)?;
    Ok(())
}
