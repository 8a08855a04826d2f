//! C ABI for the `cutlocus` library.
//!
//! Objects are opaque handles created by `*_new`/`*_build` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CutlocusStatus`]; on failure the message is available from
//! [`cutlocus_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cutlocus::cutlocus::{verify_cut_locus, CutLocusTolerances, TreeGeometry};
use cutlocus::hull::{assemble_boundary, assemble_demo, BoundarySurface};
use cutlocus::selfsim::analytic_dimension;
use cutlocus::sequences::{alpha_seq, r_seq};
use cutlocus::suite::{run_all, SuiteConfig};
use cutlocus::tree::{build_tree, verify_sphere_invariant, TreeApprox};
use cutlocus::{ConstructionParams, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutlocusStatus {
    Ok = 0,
    /// Null pointer, bad index or short buffer.
    InvalidArgument = 1,
    InvalidParams = 2,
    DivergentSeries = 3,
    DegenerateAlpha = 4,
    BudgetExceeded = 5,
    /// Tangency, overlapping holes, seam or collision failures.
    Geometry = 6,
    UnsupportedDimension = 7,
    OutsideDomain = 8,
    Numerical = 9,
    Io = 10,
    Panic = 99,
}

impl From<&Error> for CutlocusStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::AlphabetOutOfRange { .. } | Error::AmplitudeTooLarge(_) => Self::InvalidParams,
            Error::DivergentSeries { .. } => Self::DivergentSeries,
            Error::DegenerateAlpha { .. } => Self::DegenerateAlpha,
            Error::BudgetExceeded { .. } => Self::BudgetExceeded,
            Error::DegenerateCollision { .. }
            | Error::TangencyViolation { .. }
            | Error::OverlappingHoles { .. }
            | Error::SeamMismatch(_) => Self::Geometry,
            Error::UnsupportedDimension(_) => Self::UnsupportedDimension,
            Error::OutsideDomain(_) => Self::OutsideDomain,
            Error::DegenerateScales(_)
            | Error::EmptySet
            | Error::NoAdmissibleYb { .. }
            | Error::PositivityViolated { .. } => Self::Numerical,
            Error::Io(_) => Self::Io,
        }
    }
}

/// Construction parameters.
pub struct CutlocusParams(ConstructionParams);
/// Finite tree approximation.
pub struct CutlocusTree(TreeApprox);
/// Assembled boundary hypersurface.
pub struct CutlocusHull(BoundarySurface);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (CutlocusStatus, String)>) -> CutlocusStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CutlocusStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CutlocusStatus::Panic
        }
    }
}

fn lib(e: Error) -> (CutlocusStatus, String) {
    ((&e).into(), e.to_string())
}

fn bad(msg: &str) -> (CutlocusStatus, String) {
    (CutlocusStatus::InvalidArgument, msg.to_string())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CutlocusStatus, String)> {
    p.as_ref().ok_or_else(|| bad(&format!("null {what} handle")))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (CutlocusStatus, String)> {
    if out.is_null() {
        return Err(bad("null output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cutlocus_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_params_new(
    k: u32,
    n: usize,
    phi: f64,
    epsilon: f64,
    out: *mut *mut CutlocusParams,
) -> CutlocusStatus {
    guard(|| {
        let p = ConstructionParams::new(k, n, phi, epsilon).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CutlocusParams(p))))
    })
}

/// Parameters with the canonical dimension for `k`.
///
/// # Safety
/// As [`cutlocus_params_new`].
#[no_mangle]
pub unsafe extern "C" fn cutlocus_params_canonical(k: u32, phi: f64, epsilon: f64, out: *mut *mut CutlocusParams) -> CutlocusStatus {
    guard(|| {
        let p = ConstructionParams::canonical(k, phi, epsilon).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CutlocusParams(p))))
    })
}

/// # Safety
/// `p` must be null or a handle from `cutlocus_params_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_params_free(p: *mut CutlocusParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live params handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_params_n(p: *const CutlocusParams) -> usize {
    p.as_ref().map_or(0, |p| p.0.n)
}

/// `r_i` for `i >= -1` with its truncation bound.
///
/// # Safety
/// `p` a live params handle; `value` and `bound` writable (`bound` may be null).
#[no_mangle]
pub unsafe extern "C" fn cutlocus_r_seq(p: *const CutlocusParams, i: i32, value: *mut f64, bound: *mut f64) -> CutlocusStatus {
    guard(|| {
        let p = handle(p, "params")?;
        let r = r_seq(i, &p.0).map_err(lib)?;
        write_out(value, r.value)?;
        if !bound.is_null() {
            bound.write(r.bound);
        }
        Ok(())
    })
}

/// # Safety
/// `p` a live params handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_alpha(p: *const CutlocusParams, i: u32, out: *mut f64) -> CutlocusStatus {
    guard(|| {
        let p = handle(p, "params")?;
        write_out(out, alpha_seq(i, &p.0).map_err(lib)?)
    })
}

/// Dimension `log(2n-1) / ((k-1) log 3)` of the endpoint set; NaN for `k < 2`
/// or `n < 1`.
#[no_mangle]
pub extern "C" fn cutlocus_analytic_dimension(k: u32, n: usize) -> f64 {
    if k < 2 || n < 1 {
        return f64::NAN;
    }
    analytic_dimension(k, n).s
}

/// # Safety
/// `p` a live params handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_tree_build(p: *const CutlocusParams, depth: usize, out: *mut *mut CutlocusTree) -> CutlocusStatus {
    guard(|| {
        let p = handle(p, "params")?;
        let t = build_tree(depth, &p.0).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CutlocusTree(t))))
    })
}

/// # Safety
/// `t` must be null or a live tree handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_tree_free(t: *mut CutlocusTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Node count including the origin; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live tree handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_tree_node_count(t: *const CutlocusTree) -> usize {
    t.as_ref().map_or(0, |t| t.0.node_count())
}

/// Copies the coordinates of node `index` into `buf` (length `len >= n`).
/// Index 0 is `q`; the origin is not indexed.
///
/// # Safety
/// `t` a live tree handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_tree_node_position(t: *const CutlocusTree, index: usize, buf: *mut f64, len: usize) -> CutlocusStatus {
    guard(|| {
        let t = handle(t, "tree")?;
        let nd = t.0.nodes.get(index).ok_or_else(|| bad("node index out of range"))?;
        if buf.is_null() || len < nd.position.len() {
            return Err(bad("buffer too short"));
        }
        ptr::copy_nonoverlapping(nd.position.as_ptr(), buf, nd.position.len());
        Ok(())
    })
}

/// Largest `| |child - parent| - l_m |` over the tree; NaN for a null handle.
///
/// # Safety
/// `t` must be null or a live tree handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_tree_sphere_residual(t: *const CutlocusTree) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| verify_sphere_invariant(&t.0).max_residual)
}

/// Two-sphere demo hull in dimension `dim`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_demo(dim: usize, out: *mut *mut CutlocusHull) -> CutlocusStatus {
    guard(|| {
        if !(2..=64).contains(&dim) {
            return Err(lib(Error::InvalidParams(format!("dimension {dim} outside [2, 64]"))));
        }
        write_out(out, Box::into_raw(Box::new(CutlocusHull(assemble_demo(dim)))))
    })
}

/// # Safety
/// `p` a live params handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_assemble(p: *const CutlocusParams, depth: usize, out: *mut *mut CutlocusHull) -> CutlocusStatus {
    guard(|| {
        let p = handle(p, "params")?;
        let h = assemble_boundary(depth, &p.0).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CutlocusHull(h))))
    })
}

/// # Safety
/// `h` must be null or a live hull handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_free(h: *mut CutlocusHull) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be null or a live hull handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_patch_count(h: *const CutlocusHull) -> usize {
    h.as_ref().map_or(0, |h| h.0.patches.len())
}

/// # Safety
/// `h` must be null or a live hull handle.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_max_tangency_residual(h: *const CutlocusHull) -> f64 {
    h.as_ref().map_or(f64::NAN, |h| h.0.max_tangency_residual())
}

/// Signed distance to the boundary, negative inside.
///
/// # Safety
/// `h` a live hull handle; `x` valid for `len` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_signed_distance(h: *const CutlocusHull, x: *const f64, len: usize, out: *mut f64) -> CutlocusStatus {
    guard(|| {
        let h = handle(h, "hull")?;
        if x.is_null() || len != h.0.dim {
            return Err(bad("point length does not match the hull dimension"));
        }
        let pt = std::slice::from_raw_parts(x, len);
        write_out(out, h.0.signed_distance(pt))
    })
}

/// Checks the inward cut locus against the hull's own tree. `pass` receives
/// the verdict; `hausdorff_cells` (may be null) the medial-axis distance in
/// grid cells, NaN above dimension 3.
///
/// # Safety
/// `h` a live hull handle; `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_hull_verify_cut_locus(
    h: *const CutlocusHull,
    resolution: usize,
    pass: *mut bool,
    hausdorff_cells: *mut f64,
) -> CutlocusStatus {
    guard(|| {
        let h = handle(h, "hull")?;
        let tree = TreeGeometry::from_skeleton(&h.0.skeleton);
        let tol = CutLocusTolerances { resolution, ..Default::default() };
        let rep = verify_cut_locus(&h.0, &tree, &tol).map_err(lib)?;
        write_out(pass, rep.pass)?;
        if !hausdorff_cells.is_null() {
            hausdorff_cells.write(rep.medial.map_or(f64::NAN, |m| m.hausdorff_cells));
        }
        Ok(())
    })
}

/// Runs the acceptance battery; `passed` receives the number of passing
/// criteria out of 12.
///
/// # Safety
/// `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn cutlocus_verify_all(resolution: usize, passed: *mut u32) -> CutlocusStatus {
    guard(|| {
        let cfg = SuiteConfig { resolution, ..Default::default() };
        let n = run_all(&cfg).iter().filter(|r| r.pass).count() as u32;
        write_out(passed, n)
    })
}
