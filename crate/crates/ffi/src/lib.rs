//! C ABI over `anonsim`.
//!
//! Every fallible call returns an [`AnonsimStatus`] and writes its result through an out
//! pointer. On failure the message is available from [`anonsim_last_error`] on the same thread.
//! Handles are opaque and must be released with their `_free` function; strings handed out by
//! the library are released with [`anonsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use anonsim::graph::{
    emit_snapshot, load_ln_snapshot, AdversarySpec, AdversaryStrategy, GeneratorSpec, NodeId,
    Topology,
};
use anonsim::harness::{parse_config, render, run_with_workers, write_report, ExperimentConfig, OutputFormat, Report};
use anonsim::hop::{dandelion_posterior, dpp_posterior, PathEnumerationBounds, StemObservation};
use anonsim::metrics::{entropy_bits, min_entropy_bits, shannon_entropy};
use anonsim::posterior::Prior;
use anonsim::routing::RoutingParams;
use anonsim::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnonsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    Config = 4,
    Parse = 5,
    ImpossibleObservation = 6,
    InvariantViolation = 7,
    EmptyInput = 8,
    InsufficientData = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnonsimStrategy {
    Random = 0,
    TopDegree = 1,
    TopBetweenness = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnonsimFormat {
    Csv = 0,
    Structured = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnonsimStemScheme {
    Dandelion = 0,
    DandelionPp = 1,
}

pub struct AnonsimTopology(Topology);
pub struct AnonsimConfig(ExperimentConfig);
pub struct AnonsimReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AnonsimStatus {
    match e {
        Error::InvalidParameter(_) | Error::EmptyTopology | Error::DuplicateRecord(_) => {
            AnonsimStatus::InvalidParameter
        }
        Error::Parse { .. } => AnonsimStatus::Parse,
        Error::ImpossibleObservation(_) => AnonsimStatus::ImpossibleObservation,
        Error::InvariantViolation(_) => AnonsimStatus::InvariantViolation,
        Error::EmptyInput(_) => AnonsimStatus::EmptyInput,
        Error::InsufficientData(_) => AnonsimStatus::InsufficientData,
        Error::Config(_) => AnonsimStatus::Config,
        Error::Io { .. } => AnonsimStatus::Io,
        Error::Run { source, .. } => status_of(source),
    }
}

struct Fail(AnonsimStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any error or panic for [`anonsim_last_error`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AnonsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnonsimStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AnonsimStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(AnonsimStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(AnonsimStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. Owned by the library; valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn anonsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn anonsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anonsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generate a topology from a JSON generator description such as
/// `{"generator": "quasi4", "n": 1000}`.
///
/// # Safety
/// `spec_json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_generate(
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut AnonsimTopology,
) -> AnonsimStatus {
    guard(|| {
        let spec: GeneratorSpec = serde_json::from_str(text(spec_json, "spec_json")?)
            .map_err(|e| Fail(AnonsimStatus::Parse, format!("generator spec: {e}")))?;
        let t = spec.generate(seed)?;
        put(out, Box::into_raw(Box::new(AnonsimTopology(t))), "out")
    })
}

/// Load a channel snapshot document (JSON).
///
/// # Safety
/// `document` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_load_snapshot(
    document: *const c_char,
    out: *mut *mut AnonsimTopology,
) -> AnonsimStatus {
    guard(|| {
        let t = load_ln_snapshot(text(document, "document")?)?;
        put(out, Box::into_raw(Box::new(AnonsimTopology(t))), "out")
    })
}

/// A copy of `topology` with `count` adversaries chosen by `strategy`.
///
/// # Safety
/// `topology` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_assign_adversaries(
    topology: *const AnonsimTopology,
    strategy: AnonsimStrategy,
    count: usize,
    seed: u64,
    out: *mut *mut AnonsimTopology,
) -> AnonsimStatus {
    guard(|| {
        let t = handle(topology, "topology")?;
        let strategy = match strategy {
            AnonsimStrategy::Random => AdversaryStrategy::Random,
            AnonsimStrategy::TopDegree => AdversaryStrategy::TopDegree,
            AnonsimStrategy::TopBetweenness => AdversaryStrategy::TopBetweenness,
        };
        let a = AdversarySpec { strategy, count }.apply(&t.0, seed, &RoutingParams::default())?;
        put(out, Box::into_raw(Box::new(AnonsimTopology(a))), "out")
    })
}

/// # Safety
/// `topology` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_node_count(topology: *const AnonsimTopology) -> usize {
    topology.as_ref().map_or(0, |t| t.0.node_count())
}

/// # Safety
/// `topology` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_edge_count(topology: *const AnonsimTopology) -> usize {
    topology.as_ref().map_or(0, |t| t.0.edge_count())
}

/// Whether `node` is adversarial; false for out-of-range nodes.
///
/// # Safety
/// `topology` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_is_adversarial(topology: *const AnonsimTopology, node: u32) -> bool {
    topology
        .as_ref()
        .is_some_and(|t| (node as usize) < t.0.node_count() && t.0.is_adversarial(NodeId(node)))
}

/// Serialize as a snapshot document. Free the result with [`anonsim_string_free`].
///
/// # Safety
/// `topology` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_emit_snapshot(
    topology: *const AnonsimTopology,
    include_roles: bool,
    out: *mut *mut c_char,
) -> AnonsimStatus {
    guard(|| {
        let t = handle(topology, "topology")?;
        put(out, c_string(emit_snapshot(&t.0, include_roles)), "out")
    })
}

/// # Safety
/// `topology` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn anonsim_topology_free(topology: *mut AnonsimTopology) {
    if !topology.is_null() {
        drop(Box::from_raw(topology));
    }
}

/// Shannon entropy, in bits, of the posterior a stem-phase adversary forms after `adversary`
/// receives a transaction from `predecessor`.
///
/// # Safety
/// `topology` must be a live handle; `out_bits` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_stem_entropy(
    topology: *const AnonsimTopology,
    scheme: AnonsimStemScheme,
    p_f: f64,
    adversary: u32,
    predecessor: u32,
    out_bits: *mut f64,
) -> AnonsimStatus {
    guard(|| {
        let t = &handle(topology, "topology")?.0;
        let obs = StemObservation {
            adversary: NodeId(adversary),
            predecessor: NodeId(predecessor),
        };
        let p = match scheme {
            AnonsimStemScheme::Dandelion => dandelion_posterior(t, p_f, &obs, &Prior::Uniform)?,
            AnonsimStemScheme::DandelionPp => {
                dpp_posterior(t, p_f, &obs, &PathEnumerationBounds::for_topology(t), &Prior::Uniform)?
            }
        };
        put(out_bits, shannon_entropy(&p)?, "out_bits")
    })
}

unsafe fn slice<'a>(values: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if values.is_null() {
        return Err(null("values"));
    }
    Ok(std::slice::from_raw_parts(values, len))
}

/// Shannon entropy in bits of a probability vector summing to 1.
///
/// # Safety
/// `values` must point to `len` doubles; `out_bits` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_entropy_bits(values: *const f64, len: usize, out_bits: *mut f64) -> AnonsimStatus {
    guard(|| put(out_bits, entropy_bits(slice(values, len)?)?, "out_bits"))
}

/// Min-entropy in bits of a probability vector summing to 1.
///
/// # Safety
/// `values` must point to `len` doubles; `out_bits` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_min_entropy_bits(values: *const f64, len: usize, out_bits: *mut f64) -> AnonsimStatus {
    guard(|| put(out_bits, min_entropy_bits(slice(values, len)?)?, "out_bits"))
}

/// Parse and validate a TOML experiment configuration. Relative paths resolve against
/// `base_dir`, which may be null.
///
/// # Safety
/// `document` must be a valid C string, `base_dir` null or a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_config_parse(
    document: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut AnonsimConfig,
) -> AnonsimStatus {
    guard(|| {
        let doc = text(document, "document")?;
        let base = if base_dir.is_null() {
            None
        } else {
            Some(Path::new(text(base_dir, "base_dir")?))
        };
        let cfg = parse_config(doc, base)?;
        put(out, Box::into_raw(Box::new(AnonsimConfig(cfg))), "out")
    })
}

/// Override the configured seed.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anonsim_config_set_seed(config: *mut AnonsimConfig, seed: u64) -> AnonsimStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        c.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn anonsim_config_free(config: *mut AnonsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the experiment on `workers` threads (0 means one per available core).
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_run(
    config: *const AnonsimConfig,
    workers: usize,
    out: *mut *mut AnonsimReport,
) -> AnonsimStatus {
    guard(|| {
        let cfg = &handle(config, "config")?.0;
        let w = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let r = run_with_workers(cfg, w)?;
        put(out, Box::into_raw(Box::new(AnonsimReport(r))), "out")
    })
}

fn format(f: AnonsimFormat) -> OutputFormat {
    match f {
        AnonsimFormat::Csv => OutputFormat::Csv,
        AnonsimFormat::Structured => OutputFormat::Structured,
    }
}

/// Render a report. `out_main` receives the document; `out_meta` (may be null) receives the
/// sibling metadata document for CSV experiment reports and null otherwise. Free both with
/// [`anonsim_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out_main` writable; `out_meta` null or writable.
#[no_mangle]
pub unsafe extern "C" fn anonsim_report_render(
    report: *const AnonsimReport,
    fmt: AnonsimFormat,
    out_main: *mut *mut c_char,
    out_meta: *mut *mut c_char,
) -> AnonsimStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let (main, meta) = render(&r.0, format(fmt));
        if out_main.is_null() {
            return Err(null("out_main"));
        }
        if !out_meta.is_null() {
            out_meta.write(meta.map_or(ptr::null_mut(), c_string));
        }
        out_main.write(c_string(main));
        Ok(())
    })
}

/// Write a report to `path` (plus `<path>.meta.json` for CSV experiment reports).
///
/// # Safety
/// `report` must be a live handle; `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn anonsim_report_write(
    report: *const AnonsimReport,
    fmt: AnonsimFormat,
    path: *const c_char,
) -> AnonsimStatus {
    guard(|| {
        let r = handle(report, "report")?;
        write_report(&r.0, format(fmt), Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// Median entropy of the intercepted transactions, or NaN when there are none or the report is
/// a learning report.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anonsim_report_median_entropy(report: *const AnonsimReport) -> f64 {
    match report.as_ref().map(|r| &r.0) {
        Some(Report::Experiment(e)) => e.meta.entropy.map_or(f64::NAN, |s| s.median),
        _ => f64::NAN,
    }
}

/// Share of transactions intercepted, or NaN for learning reports.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anonsim_report_intercept_fraction(report: *const AnonsimReport) -> f64 {
    match report.as_ref().map(|r| &r.0) {
        Some(Report::Experiment(e)) => e.meta.intercept_fraction,
        _ => f64::NAN,
    }
}

/// # Safety
/// `report` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn anonsim_report_free(report: *mut AnonsimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
