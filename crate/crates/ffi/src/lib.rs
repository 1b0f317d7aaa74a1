//! C interface to `schelling-core`.
//!
//! Objects cross the boundary as opaque handles (`SchellingRun`,
//! `SchellingNetwork`) that the caller frees with the matching `_free`
//! function. Every fallible function returns a [`SchellingStatus`]; on failure
//! [`schelling_last_error`] describes the problem for the calling thread.
//! Panics never unwind into C: they are caught and reported as
//! `SCHELLING_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use schelling_core::cli::{self, CliError, Config};
use schelling_core::experiments::BUILTIN_SWEEPS;
use schelling_core::{
    run, singular_values, zhu_ghodsi_dim, ModelError, ModelParams, Network, RunResult,
    SingularProfile, SpectralError, Tolerance, Wiring,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchellingStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownSweep = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchellingWiring {
    /// Each agent initiates `initial_degree` links.
    PerAgent = 0,
    /// Exactly `n * initial_degree / 2` uniformly placed edges.
    ExactMean = 1,
}

/// Model parameters. Fill with `schelling_params_default` and adjust.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchellingParams {
    pub n: u32,
    pub initial_degree: u32,
    pub wiring: SchellingWiring,
    pub degree_floor: u32,
    /// Tolerances in [0, 1] on a 0.01 grid.
    pub t1: f64,
    pub t2: f64,
    /// Fraction of agents in group one, in (0, 0.5].
    pub small_fraction: f64,
    pub max_steps: u32,
}

/// Scalar outcome of one run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SchellingRunSummary {
    pub stabilised: bool,
    /// 1-based; 0 when the run never stabilised.
    pub stabilisation_step: u32,
    pub steps_run: u32,
    pub similarity: f64,
    pub similarity_g1: f64,
    pub similarity_g2: f64,
    pub edge_count: usize,
}

/// Finished run.
pub struct SchellingRun {
    inner: RunResult,
}

/// Undirected simple graph.
pub struct SchellingNetwork {
    inner: Network,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SchellingStatus, String);

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure(SchellingStatus::InvalidArgument, e.to_string())
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        Failure(SchellingStatus::InvalidArgument, e.to_string())
    }
}

impl From<schelling_core::GraphError> for Failure {
    fn from(e: schelling_core::GraphError) -> Self {
        Failure(SchellingStatus::InvalidArgument, e.to_string())
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        match e {
            CliError::Io(m) => Failure(SchellingStatus::Io, m),
            CliError::Usage(m) => Failure(SchellingStatus::InvalidArgument, m),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SchellingStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> SchellingStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SchellingStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            SchellingStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            SchellingStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

fn to_params(p: &SchellingParams) -> Result<ModelParams, Failure> {
    let params = ModelParams {
        n: p.n as usize,
        initial_degree: p.initial_degree as usize,
        wiring: match p.wiring {
            SchellingWiring::PerAgent => Wiring::PerAgent,
            SchellingWiring::ExactMean => Wiring::ExactMean,
        },
        degree_floor: p.degree_floor as usize,
        t1: Tolerance::new(p.t1)?,
        t2: Tolerance::new(p.t2)?,
        small_fraction: p.small_fraction,
        max_steps: p.max_steps,
    };
    params.validate()?;
    Ok(params)
}

/// Message for the last failed call on this thread, or "" after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn schelling_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn schelling_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default parameters with both tolerances and the group split at 0.5.
///
/// # Safety
/// `out` must be null or point to writable memory for one `SchellingParams`.
#[no_mangle]
pub unsafe extern "C" fn schelling_params_default(out: *mut SchellingParams) -> SchellingStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = ModelParams::default();
        *out = SchellingParams {
            n: d.n as u32,
            initial_degree: d.initial_degree as u32,
            wiring: SchellingWiring::PerAgent,
            degree_floor: d.degree_floor as u32,
            t1: d.t1.as_f64(),
            t2: d.t2.as_f64(),
            small_fraction: d.small_fraction,
            max_steps: d.max_steps,
        };
        Ok(())
    })
}

/// Runs the model to stabilisation or `max_steps`.
///
/// # Safety
/// `params` must point to a valid `SchellingParams`; `out` to writable
/// storage for a handle, which receives null on failure.
#[no_mangle]
pub unsafe extern "C" fn schelling_run(
    params: *const SchellingParams,
    seed: u64,
    out: *mut *mut SchellingRun,
) -> SchellingStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let params = to_params(deref(params, "params")?)?;
        let inner = run(&params, seed)?;
        *out = Box::into_raw(Box::new(SchellingRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from `schelling_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn schelling_run_free(run: *mut SchellingRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_run_summary(
    run: *const SchellingRun,
    out: *mut SchellingRunSummary,
) -> SchellingStatus {
    guard(|| {
        let r = &deref(run, "run")?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = SchellingRunSummary {
            stabilised: r.stabilised(),
            stabilisation_step: r.stabilisation_step.unwrap_or(0),
            steps_run: r.steps_run,
            similarity: r.similarity.overall,
            similarity_g1: r.similarity.group1,
            similarity_g2: r.similarity.group2,
            edge_count: r.network.edge_count(),
        };
        Ok(())
    })
}

/// Writes the `k` largest singular values of the final network, descending.
///
/// # Safety
/// `run` must be a live handle; `out` must hold `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn schelling_run_singular_values(
    run: *const SchellingRun,
    k: usize,
    out: *mut f64,
) -> SchellingStatus {
    guard(|| {
        let r = &deref(run, "run")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = r.singular_profile(k)?;
        std::slice::from_raw_parts_mut(out, k).copy_from_slice(p.values());
        Ok(())
    })
}

/// Embedded dimension of the final network from its top `k` singular values.
///
/// # Safety
/// `run` must be a live handle; `d_hat` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_run_dimension(
    run: *const SchellingRun,
    k: usize,
    d_hat: *mut usize,
) -> SchellingStatus {
    guard(|| {
        let r = &deref(run, "run")?.inner;
        let d_hat = d_hat.as_mut().ok_or_else(|| null("d_hat"))?;
        *d_hat = r.dimension(k)?.d_hat;
        Ok(())
    })
}

/// Copies the final network into a new handle.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_run_network(
    run: *const SchellingRun,
    out: *mut *mut SchellingNetwork,
) -> SchellingStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let inner = deref(run, "run")?.inner.network.clone();
        *out = Box::into_raw(Box::new(SchellingNetwork { inner }));
        Ok(())
    })
}

/// Random network on `n` agents wired as in the model.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_random(
    n: u32,
    degree: u32,
    wiring: SchellingWiring,
    seed: u64,
    out: *mut *mut SchellingNetwork,
) -> SchellingStatus {
    use rand::SeedableRng;
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let inner = match wiring {
            SchellingWiring::PerAgent => {
                Network::random_initiated(n as usize, degree as usize, &mut rng)?
            }
            SchellingWiring::ExactMean => Network::random(n as usize, degree as usize, &mut rng)?,
        };
        *out = Box::into_raw(Box::new(SchellingNetwork { inner }));
        Ok(())
    })
}

/// Network from `edge_count` pairs stored flat as `a0, b0, a1, b1, ...`.
///
/// # Safety
/// `edges` must hold `2 * edge_count` values (or be null when the count is 0);
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_from_edges(
    n: u32,
    edges: *const u32,
    edge_count: usize,
    out: *mut *mut SchellingNetwork,
) -> SchellingStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let flat: &[u32] = if edge_count == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * edge_count)
        };
        let pairs: Vec<(usize, usize)> = flat
            .chunks_exact(2)
            .map(|p| (p[0] as usize, p[1] as usize))
            .collect();
        let inner = Network::from_edges(n as usize, &pairs)?;
        *out = Box::into_raw(Box::new(SchellingNetwork { inner }));
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_free(net: *mut SchellingNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle; `n` and `edges` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_size(
    net: *const SchellingNetwork,
    n: *mut usize,
    edges: *mut usize,
) -> SchellingStatus {
    guard(|| {
        let net = &deref(net, "net")?.inner;
        *n.as_mut().ok_or_else(|| null("n"))? = net.n();
        *edges.as_mut().ok_or_else(|| null("edges"))? = net.edge_count();
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_degree(
    net: *const SchellingNetwork,
    agent: u32,
    out: *mut usize,
) -> SchellingStatus {
    guard(|| {
        let net = &deref(net, "net")?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if agent as usize >= net.n() {
            return Err(Failure(
                SchellingStatus::InvalidArgument,
                format!("agent {agent} out of range for {} agents", net.n()),
            ));
        }
        *out = net.degree(agent as usize);
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_has_edge(
    net: *const SchellingNetwork,
    a: u32,
    b: u32,
    out: *mut bool,
) -> SchellingStatus {
    guard(|| {
        let net = &deref(net, "net")?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n = net.n();
        if a as usize >= n || b as usize >= n {
            return Err(Failure(
                SchellingStatus::InvalidArgument,
                format!("agent out of range for {n} agents"),
            ));
        }
        *out = net.has_edge(a as usize, b as usize);
        Ok(())
    })
}

/// Writes the `k` largest adjacency singular values, descending.
///
/// # Safety
/// `net` must be a live handle; `out` must hold `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn schelling_network_singular_values(
    net: *const SchellingNetwork,
    k: usize,
    out: *mut f64,
) -> SchellingStatus {
    guard(|| {
        let net = &deref(net, "net")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = singular_values(net, k)?;
        std::slice::from_raw_parts_mut(out, k).copy_from_slice(p.values());
        Ok(())
    })
}

/// Profile-likelihood elbow of `len` descending non-negative values.
/// `loglik`, when not null, receives the `len - 1` curve values.
///
/// # Safety
/// `values` must hold `len` doubles, `loglik` (if given) `len - 1`; `d_hat`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn schelling_zhu_ghodsi(
    values: *const f64,
    len: usize,
    d_hat: *mut usize,
    loglik: *mut f64,
) -> SchellingStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let d_hat = d_hat.as_mut().ok_or_else(|| null("d_hat"))?;
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let est = zhu_ghodsi_dim(&SingularProfile::new(v, len)?)?;
        *d_hat = est.d_hat;
        if !loglik.is_null() {
            std::slice::from_raw_parts_mut(loglik, est.profile_loglik.len())
                .copy_from_slice(&est.profile_loglik);
        }
        Ok(())
    })
}

/// Runs a built-in sweep (or grid file) and writes its archive, aggregate
/// table and optionally plots into `out_dir`. `k == 0` and `jobs == 0`
/// select the defaults.
///
/// # Safety
/// `sweep` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn schelling_sweep(
    sweep: *const c_char,
    reps: usize,
    seed: u64,
    k: usize,
    jobs: usize,
    out_dir: *const c_char,
    plots: bool,
) -> SchellingStatus {
    guard(|| {
        let name = str_arg(sweep, "sweep")?;
        let out = str_arg(out_dir, "out_dir")?;
        let mut cfg = Config::new(name);
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.out_dir = Path::new(out).to_path_buf();
        if k != 0 {
            cfg.k_singular = k;
        }
        if jobs != 0 {
            cfg.parallelism = jobs;
        }
        cfg.emit_plots = plots;
        if reps == 0 {
            return Err(Failure(
                SchellingStatus::InvalidArgument,
                "reps must be at least 1".into(),
            ));
        }
        if !BUILTIN_SWEEPS.contains(&name) && !Path::new(name).is_file() {
            return Err(Failure(
                SchellingStatus::UnknownSweep,
                format!(
                    "unknown sweep '{name}' (builtins: {})",
                    BUILTIN_SWEEPS.join(", ")
                ),
            ));
        }
        cli::execute(&cfg)?;
        Ok(())
    })
}
