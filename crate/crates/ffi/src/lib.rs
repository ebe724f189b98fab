//! C ABI over `akfocus`.
//!
//! Every fallible entry point returns an [`AkStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can be
//! read with [`ak_last_error_length`] and [`ak_last_error_message`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use akfocus::akmodel::{self, CouplingParams};
use akfocus::metrology::uncertainty_products;
use akfocus::probes::{GaussianTwoMode, MixtureComponent, ProbeState, ProductGaussianMixture};
use akfocus::simulator::{GridSpec, Oracle, ProbeSpec, SystemSpec};
use akfocus::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Mass reached a grid edge; widen or refine the grid.
    Truncation = 3,
    /// An internal numerical cross-check failed.
    Numerical = 4,
    Panic = 5,
}

/// Probe state behind an opaque pointer.
pub struct AkProbe(ProbeState);

/// Grid oracle behind an opaque pointer.
pub struct AkOracle(Oracle);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AkCoupling {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
}

/// First and second moments of a two-mode probe.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AkMoments {
    pub m_q1: f64,
    pub m_q2: f64,
    pub m_p1: f64,
    pub m_p2: f64,
    pub v_q1: f64,
    pub v_q2: f64,
    pub v_p1: f64,
    pub v_p2: f64,
    pub c_q: f64,
    pub c_p: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AkNoiseMoments {
    pub e1: f64,
    pub e2: f64,
    pub var_e: f64,
    pub f1: f64,
    pub f2: f64,
    pub var_f: f64,
    pub var_e_single: f64,
    pub var_f_single: f64,
    pub var_product: f64,
    pub m2_product: f64,
    pub uncertainty_violation: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AkFocusing {
    pub fq: f64,
    pub fp: f64,
    pub jointly_focused: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AkMarginalReport {
    pub position: f64,
    pub momentum: f64,
    pub position_unreflected: f64,
    pub momentum_unreflected: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AkStatus {
    match e {
        Error::Truncation { .. } => AkStatus::Truncation,
        e if e.is_numerical() => AkStatus::Numerical,
        _ => AkStatus::InvalidArgument,
    }
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), AkStatus>) -> AkStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AkStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            AkStatus::Panic
        }
    }
}

fn check<T>(r: akfocus::Result<T>) -> Result<T, AkStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> AkStatus {
    set_error(format!("{what} is null"));
    AkStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, AkStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), AkStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

fn coupling(c: &AkCoupling) -> Result<CouplingParams, AkStatus> {
    check(CouplingParams::new(c.lambda, c.mu, c.kappa))
}

/// Byte length of the last error message on this thread, without the terminator.
#[no_mangle]
pub extern "C" fn ak_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` as a NUL-terminated string,
/// truncating to `len - 1` bytes. Returns the number of bytes written
/// excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ak_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(len - 1);
        std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
        *buf.add(n) = 0;
        n
    })
}

/// Two-mode Gaussian probe with position covariance `[[a, b], [b, d]]`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_probe_gaussian_new(a: f64, b: f64, d: f64, out: *mut *mut AkProbe) -> AkStatus {
    guard(|| {
        let g = check(GaussianTwoMode::new(a, b, d))?;
        write(out, Box::into_raw(Box::new(AkProbe(g.into()))))
    })
}

/// Mixture of product Gaussians centered at `(x[i], k[i])` with weights
/// `weights[i]`, position variance `s` and momentum variance `r`.
///
/// # Safety
/// `weights`, `x` and `k` must each be valid for `n` reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_probe_mixture_new(
    weights: *const f64,
    x: *const f64,
    k: *const f64,
    n: usize,
    s: f64,
    r: f64,
    out: *mut *mut AkProbe,
) -> AkStatus {
    guard(|| {
        if n > 0 && (weights.is_null() || x.is_null() || k.is_null()) {
            return Err(null("component array"));
        }
        let comps = (0..n)
            .map(|i| MixtureComponent {
                weight: *weights.add(i),
                x: *x.add(i),
                k: *k.add(i),
            })
            .collect();
        let mx = check(ProductGaussianMixture::new(comps, s, r))?;
        write(out, Box::into_raw(Box::new(AkProbe(mx.into()))))
    })
}

/// # Safety
/// `probe` must be null or come from an `ak_probe_*_new` call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ak_probe_free(probe: *mut AkProbe) {
    if !probe.is_null() {
        drop(Box::from_raw(probe));
    }
}

/// # Safety
/// `probe` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_probe_moments(probe: *const AkProbe, out: *mut AkMoments) -> AkStatus {
    guard(|| {
        let m = deref(probe, "probe")?.0.moments();
        write(
            out,
            AkMoments {
                m_q1: m.m_q1,
                m_q2: m.m_q2,
                m_p1: m.m_p1,
                m_p2: m.m_p2,
                v_q1: m.v_q1,
                v_q2: m.v_q2,
                v_p1: m.v_p1,
                v_p2: m.v_p2,
                c_q: m.c_q,
                c_p: m.c_p,
            },
        )
    })
}

/// Noise-distribution moments and the two uncertainty products.
///
/// # Safety
/// `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_noise_moments(
    probe: *const AkProbe,
    coupling_params: *const AkCoupling,
    out: *mut AkNoiseMoments,
) -> AkStatus {
    guard(|| {
        let p = deref(probe, "probe")?;
        let c = coupling(deref(coupling_params, "coupling")?)?;
        let nm = akmodel::noise_moments(&p.0.moments(), &c);
        let u = uncertainty_products(&nm);
        write(
            out,
            AkNoiseMoments {
                e1: nm.e1,
                e2: nm.e2,
                var_e: nm.var_e,
                f1: nm.f1,
                f2: nm.f2,
                var_f: nm.var_f,
                var_e_single: nm.var_e_single,
                var_f_single: nm.var_f_single,
                var_product: u.var_product,
                m2_product: u.m2_product,
                uncertainty_violation: u.violation,
            },
        )
    })
}

/// # Safety
/// `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_focusing(
    probe: *const AkProbe,
    coupling_params: *const AkCoupling,
    out: *mut AkFocusing,
) -> AkStatus {
    guard(|| {
        let p = deref(probe, "probe")?;
        let c = coupling(deref(coupling_params, "coupling")?)?;
        let f = akmodel::focusing_measures(&p.0.moments(), &c);
        write(
            out,
            AkFocusing {
                fq: f.fq,
                fp: f.fp,
                jointly_focused: f.jointly_focused,
            },
        )
    })
}

/// Closed-form joint-focusing predicate of the probe's family.
///
/// # Safety
/// `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_focusing_predicate(
    probe: *const AkProbe,
    coupling_params: *const AkCoupling,
    out: *mut bool,
) -> AkStatus {
    guard(|| {
        let p = deref(probe, "probe")?;
        let c = coupling(deref(coupling_params, "coupling")?)?;
        write(out, akmodel::focusing_predicate(&p.0, &c))
    })
}

/// Grid oracle for a Gaussian system packet, `n` points per axis.
/// `n = 0` selects the default size.
///
/// # Safety
/// `probe` must be a live handle; `coupling` valid for reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_oracle_new(
    probe: *const AkProbe,
    coupling_params: *const AkCoupling,
    system_mean: f64,
    system_variance: f64,
    system_momentum: f64,
    n: usize,
    out: *mut *mut AkOracle,
) -> AkStatus {
    guard(|| {
        let p = deref(probe, "probe")?;
        let c = coupling(deref(coupling_params, "coupling")?)?;
        let system = SystemSpec::Gaussian {
            mean: system_mean,
            variance: system_variance,
            momentum: system_momentum,
        };
        let spec = if n == 0 { GridSpec::default() } else { GridSpec::default().with_n(n) };
        let oracle = check(Oracle::new(&system, &ProbeSpec::Analytic(p.0.clone()), c, spec))?;
        write(out, Box::into_raw(Box::new(AkOracle(oracle))))
    })
}

/// # Safety
/// `oracle` must be null or come from `ak_oracle_new` and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ak_oracle_free(oracle: *mut AkOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Total mass of the simulated joint outcome distribution.
///
/// # Safety
/// `oracle` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_oracle_joint_mass(oracle: *const AkOracle, out: *mut f64) -> AkStatus {
    guard(|| {
        let o = deref(oracle, "oracle")?;
        let joint = check(o.0.joint_distribution())?;
        write(out, joint.mass())
    })
}

/// Simulated outcome marginals against the convolution forms.
///
/// # Safety
/// `oracle` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_oracle_marginal_check(oracle: *const AkOracle, out: *mut AkMarginalReport) -> AkStatus {
    guard(|| {
        let r = check(deref(oracle, "oracle")?.0.marginal_check())?;
        write(
            out,
            AkMarginalReport {
                position: r.position,
                momentum: r.momentum,
                position_unreflected: r.position_unreflected,
                momentum_unreflected: r.momentum_unreflected,
            },
        )
    })
}

/// Largest deviation from covariance under a phase-space shift `(q0, p0)`,
/// with the outcome grids translated alongside the state.
///
/// # Safety
/// `oracle` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_oracle_covariance_test(
    oracle: *const AkOracle,
    q0: f64,
    p0: f64,
    out: *mut f64,
) -> AkStatus {
    guard(|| {
        let d = check(deref(oracle, "oracle")?.0.covariance_test(q0, p0))?;
        write(out, d)
    })
}

/// Same as [`ak_oracle_covariance_test`] but on fixed system quadrature nodes;
/// the result shrinks as the grid is refined.
///
/// # Safety
/// `oracle` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ak_oracle_covariance_test_fixed_quadrature(
    oracle: *const AkOracle,
    q0: f64,
    p0: f64,
    out: *mut f64,
) -> AkStatus {
    guard(|| {
        let d = check(deref(oracle, "oracle")?.0.covariance_test_fixed_quadrature(q0, p0))?;
        write(out, d)
    })
}
