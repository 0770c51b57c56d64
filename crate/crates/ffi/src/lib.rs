//! C ABI for `fconv`.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns an [`FconvStatus`]; on failure a description is
//! available from [`fconv_last_error`] on the same thread. Strings returned
//! through `char **` out-parameters must be released with
//! [`fconv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fconv::domain::{FunctionTable, TensorFunction};
use fconv::engine::convolve;
use fconv::io::{self, DomainRef};
use fconv::partition::{build_partition, validate_partition, CyclicPartition, PartitionOptions, SwapPolicy};
use fconv::query::query;
use fconv::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FconvStatus {
    Ok = 0,
    NullPointer = 1,
    Argument = 2,
    Index = 3,
    Capacity = 4,
    Parse = 5,
    Internal = 6,
    /// The value does not fit the requested integer type.
    Overflow = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

/// Which domain of the function table a tensor lives on.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FconvDomain {
    Left = 0,
    Right = 1,
    Target = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FconvSwap {
    Auto = 0,
    On = 1,
    Off = 2,
}

/// A function table `f : L x R -> T`.
pub struct FconvTable {
    inner: FunctionTable,
}

/// An integer tensor over `L^n`, `R^n` or `T^n`.
pub struct FconvTensor {
    inner: TensorFunction,
    domain: DomainRef,
}

/// A cyclic partition of a function table.
pub struct FconvPartition {
    inner: CyclicPartition,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> FconvStatus {
    match e {
        Error::Argument(_) => FconvStatus::Argument,
        Error::Index(_) => FconvStatus::Index,
        Error::Capacity(_) => FconvStatus::Capacity,
        Error::Parse(_) => FconvStatus::Parse,
        Error::Internal(_) => FconvStatus::Internal,
    }
}

type Outcome = Result<(), (FconvStatus, String)>;

fn fail(status: FconvStatus, msg: impl Into<String>) -> Outcome {
    Err((status, msg.into()))
}

fn lib<T>(r: fconv::Result<T>) -> Result<T, (FconvStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn guard(f: impl FnOnce() -> Outcome) -> FconvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FconvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside fconv");
            FconvStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, (FconvStatus, String)> {
    if s.is_null() {
        return Err((FconvStatus::NullPointer, "string argument is null".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (FconvStatus::InvalidUtf8, "string argument is not UTF-8".into()))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FconvStatus, String)> {
    p.as_ref().ok_or_else(|| (FconvStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return fail(FconvStatus::NullPointer, "output pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Outcome {
    if out.is_null() {
        return fail(FconvStatus::NullPointer, "output pointer is null");
    }
    let c = CString::new(s).map_err(|_| (FconvStatus::Internal, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// The message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fconv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string returned through a `char **` parameter of
/// this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn fconv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a function table document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_table_from_json(json: *const c_char, out: *mut *mut FconvTable) -> FconvStatus {
    guard(|| {
        let f = lib(io::parse_function_table(text(json)?))?;
        put(out, FconvTable { inner: f })
    })
}

/// Builds a table over the numeric domains `{0..left-1}` etc. from a
/// row-major array of `left * right` indices into `T`.
///
/// # Safety
/// `entries` must point to `left * right` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_table_from_indices(
    left: usize,
    right: usize,
    target: usize,
    entries: *const usize,
    out: *mut *mut FconvTable,
) -> FconvStatus {
    guard(|| {
        let len = left.checked_mul(right).ok_or((FconvStatus::Argument, "table too large".to_string()))?;
        if entries.is_null() && len > 0 {
            return fail(FconvStatus::NullPointer, "entries is null");
        }
        let flat = if len == 0 { &[][..] } else { std::slice::from_raw_parts(entries, len) };
        let f = lib(FunctionTable::from_fn(left, right, target, |a, b| flat[a * right + b]))?;
        put(out, FconvTable { inner: f })
    })
}

/// Writes `|L|`, `|R|` and `|T|`.
///
/// # Safety
/// `table` must be a live handle; the size pointers must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn fconv_table_dims(
    table: *const FconvTable,
    left: *mut usize,
    right: *mut usize,
    target: *mut usize,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        for (p, v) in [(left, f.left().len()), (right, f.right().len()), (target, f.target().len())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn fconv_table_free(table: *mut FconvTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

fn domain_ref(d: FconvDomain) -> DomainRef {
    match d {
        FconvDomain::Left => DomainRef::L,
        FconvDomain::Right => DomainRef::R,
        FconvDomain::Target => DomainRef::T,
    }
}

/// Parses a tensor document against `table`.
///
/// # Safety
/// `table` must be a live handle, `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_from_json(
    table: *const FconvTable,
    json: *const c_char,
    out: *mut *mut FconvTensor,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        let (t, domain) = lib(io::parse_tensor_on(text(json)?, f, None))?;
        put(out, FconvTensor { inner: t, domain })
    })
}

/// A dense tensor of arity `n` over one domain of `table`; `len` must equal
/// `|domain|^n`.
///
/// # Safety
/// `table` must be a live handle, `values` must point to `len` readable
/// values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_from_i64(
    table: *const FconvTable,
    domain: FconvDomain,
    n: usize,
    values: *const i64,
    len: usize,
    out: *mut *mut FconvTensor,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        if values.is_null() && len > 0 {
            return fail(FconvStatus::NullPointer, "values is null");
        }
        let data = if len == 0 { &[][..] } else { std::slice::from_raw_parts(values, len) };
        let which = domain_ref(domain);
        let t = lib(TensorFunction::new(which.resolve(f).clone(), n, data.iter().map(|&v| v as i128).collect()))?;
        put(out, FconvTensor { inner: t, domain: which })
    })
}

/// Number of cells, `|domain|^n`.
///
/// # Safety
/// `tensor` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_len(tensor: *const FconvTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.inner.values().len())
}

/// The arity `n`, or 0 for NULL.
///
/// # Safety
/// `tensor` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_arity(tensor: *const FconvTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.inner.arity())
}

/// Reads cell `index` (row-major). Returns `FCONV_STATUS_OVERFLOW` if the
/// exact value does not fit in 64 bits.
///
/// # Safety
/// `tensor` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_get_i64(tensor: *const FconvTensor, index: usize, out: *mut i64) -> FconvStatus {
    guard(|| {
        let t = get(tensor, "tensor")?;
        let v = *t.inner.values().get(index).ok_or((FconvStatus::Index, format!("index {index} out of range")))?;
        let v = i64::try_from(v).map_err(|_| (FconvStatus::Overflow, format!("value {v} does not fit in int64_t")))?;
        if out.is_null() {
            return fail(FconvStatus::NullPointer, "output pointer is null");
        }
        *out = v;
        Ok(())
    })
}

/// Serializes a tensor as a dense JSON document with exact values.
///
/// # Safety
/// `tensor` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_to_json(tensor: *const FconvTensor, out: *mut *mut c_char) -> FconvStatus {
    guard(|| {
        let t = get(tensor, "tensor")?;
        put_string(out, io::tensor_to_json(&t.inner, t.domain))
    })
}

/// # Safety
/// `tensor` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn fconv_tensor_free(tensor: *mut FconvTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Builds a cyclic partition of `table`.
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_partition_build(
    table: *const FconvTable,
    swap: FconvSwap,
    out: *mut *mut FconvPartition,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        let swap = match swap {
            FconvSwap::Auto => SwapPolicy::Auto,
            FconvSwap::On => SwapPolicy::On,
            FconvSwap::Off => SwapPolicy::Off,
        };
        let p = lib(build_partition(f, PartitionOptions { swap, ..Default::default() }))?;
        put(out, FconvPartition { inner: p })
    })
}

/// Parses a partition document and validates it against `table`.
///
/// # Safety
/// `table` must be a live handle, `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_partition_from_json(
    table: *const FconvTable,
    json: *const c_char,
    out: *mut *mut FconvPartition,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        let p = lib(io::parse_partition(text(json)?, f))?;
        if let Err(v) = validate_partition(f, &p) {
            return fail(FconvStatus::Argument, format!("invalid partition: {}", v[0]));
        }
        put(out, FconvPartition { inner: p })
    })
}

/// Sum of the minors' `k`, or 0 for NULL.
///
/// # Safety
/// `partition` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fconv_partition_cost(partition: *const FconvPartition) -> usize {
    partition.as_ref().map_or(0, |p| p.inner.cost())
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_partition_to_json(
    table: *const FconvTable,
    partition: *const FconvPartition,
    out: *mut *mut c_char,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        let p = &get(partition, "partition")?.inner;
        put_string(out, io::partition_to_json(f, p))
    })
}

/// # Safety
/// `partition` must be NULL or a handle from this library that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn fconv_partition_free(partition: *mut FconvPartition) {
    if !partition.is_null() {
        drop(Box::from_raw(partition));
    }
}

/// `g ⊛_f h` over `T^n`.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_convolve(
    table: *const FconvTable,
    partition: *const FconvPartition,
    g: *const FconvTensor,
    h: *const FconvTensor,
    out: *mut *mut FconvTensor,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        let p = &get(partition, "partition")?.inner;
        let r = lib(convolve(f, p, &get(g, "g")?.inner, &get(h, "h")?.inner))?;
        put(out, FconvTensor { inner: r, domain: DomainRef::T })
    })
}

/// `(g ⊛_f h)(v)` for `v` given as `len` indices into `T`. Returns
/// `FCONV_STATUS_OVERFLOW` if the value does not fit in 64 bits.
///
/// # Safety
/// Handles must be live, `v` must point to `len` readable indices and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn fconv_query(
    table: *const FconvTable,
    g: *const FconvTensor,
    h: *const FconvTensor,
    v: *const usize,
    len: usize,
    out: *mut i64,
) -> FconvStatus {
    guard(|| {
        let f = &get(table, "table")?.inner;
        if v.is_null() && len > 0 {
            return fail(FconvStatus::NullPointer, "vector is null");
        }
        let vs = if len == 0 { &[][..] } else { std::slice::from_raw_parts(v, len) };
        let r = lib(query(f, &get(g, "g")?.inner, &get(h, "h")?.inner, vs))?;
        let r = i64::try_from(r).map_err(|_| (FconvStatus::Overflow, format!("value {r} does not fit in int64_t")))?;
        if out.is_null() {
            return fail(FconvStatus::NullPointer, "output pointer is null");
        }
        *out = r;
        Ok(())
    })
}
