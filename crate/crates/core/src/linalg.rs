//! Thin dense linear-algebra helpers over row-major `Complex64` buffers.
//!
//! All matrices are row-major slices with explicit dimensions. These
//! wrappers exist so the tensor-network code can stay in plain buffers and
//! only cross into the backend at BLAS/LAPACK-shaped call sites.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{svd, svd_scratch, ComputeSvdVectors};
use faer::{c64, Mat, MatRef};
use num_complex::Complex64;

// `faer::c64` is `num_complex::Complex<f64>`, i.e. exactly `Complex64`;
// the conversions below only change layout (row-major slice <-> `Mat`).

// The factorizations here run on small matrices (bond dimensions in the
// hundreds) inside workloads that already parallelize one instance per
// thread, so nested threading inside a single SVD only adds overhead.
fn pin_sequential() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

// Temporary profiling hook: record (op, rows, cols) call histograms with
// wall time when HEXGLASS_SHAPE_STATS is set.
pub mod shape_stats {
    use std::collections::BTreeMap;
    use std::sync::Mutex;
    use std::time::Duration;

    pub static STATS: Mutex<BTreeMap<(&'static str, usize, usize), (u64, Duration)>> =
        Mutex::new(BTreeMap::new());

    pub fn enabled() -> bool {
        std::env::var_os("HEXGLASS_SHAPE_STATS").is_some()
    }

    pub fn record(op: &'static str, rows: usize, cols: usize, d: Duration) {
        let mut m = STATS.lock().unwrap();
        let e = m.entry((op, rows, cols)).or_insert((0, Duration::ZERO));
        e.0 += 1;
        e.1 += d;
    }

    pub fn dump() {
        let m = STATS.lock().unwrap();
        let mut rows: Vec<_> = m.iter().map(|(k, v)| (v.1, *k, v.0)).collect();
        rows.sort();
        rows.reverse();
        for (total, (op, r, c), count) in rows.iter().take(30) {
            println!("{op:5} {r:5}x{c:<5} n={count:<6} total={total:?}");
        }
    }
}

fn to_mat(rows: usize, cols: usize, a: &[Complex64]) -> Mat<c64> {
    debug_assert_eq!(a.len(), rows * cols);
    pin_sequential();
    Mat::from_fn(rows, cols, |i, j| a[i * cols + j])
}

fn from_mat(m: MatRef<'_, c64>) -> Vec<Complex64> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Row-major matrix product: `a` is `m × k`, `b` is `k × n`; returns `m × n`.
pub fn matmul(m: usize, k: usize, n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let t0 = shape_stats::enabled().then(std::time::Instant::now);
    let am = to_mat(m, k, a);
    let bm = to_mat(k, n, b);
    let cm = &am * &bm;
    let out = from_mat(cm.as_ref());
    if let Some(t) = t0 {
        shape_stats::record("gemm", m, n.max(k), t.elapsed());
    }
    out
}

/// Conjugate transpose of a row-major `rows × cols` matrix.
pub fn adjoint(rows: usize, cols: usize, a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j].conj();
        }
    }
    out
}

/// Result of a truncated thin SVD `a ≈ u · diag(s) · vh`.
///
/// Only `s` and `vh` are materialized: the tensor-network update folds the
/// right factor into neighboring tensors and never touches `u`, and
/// skipping the left-vector accumulation saves a large share of the SVD
/// cost on the tall matrices the sweeps produce. When needed, the implied
/// left factor is `a · vhᴴ · diag(1/s)`.
pub struct TruncatedSvd {
    pub rank: usize,
    /// Kept singular values, descending. Not renormalized.
    pub s: Vec<f64>,
    /// `rank × cols`, row-major.
    pub vh: Vec<Complex64>,
    /// Sum of squares of dropped singular values divided by the total sum
    /// of squares (0 when nothing is dropped).
    pub discarded_fraction: f64,
}

/// Thin SVD with rank truncation.
///
/// Keeps `r = min(max_rank, #{i : s_i ≥ rel_cutoff · s_0})` singular values
/// (at least one). Ties at the boundary keep the lower index. On top of
/// that, when `tail_budget > 0`, trailing values are dropped as long as the
/// squared mass discarded this way stays within `tail_budget · Σ s_i²`; this
/// bounds the extra error introduced beyond the caller's rank cap while
/// letting the rank adapt to fast-decaying spectra. The kept values are
/// returned as-is; callers renormalize if they need a unit state.
pub fn svd_truncated(
    rows: usize,
    cols: usize,
    a: &[Complex64],
    max_rank: usize,
    rel_cutoff: f64,
    tail_budget: f64,
) -> TruncatedSvd {
    let t0 = shape_stats::enabled().then(std::time::Instant::now);
    let out = svd_truncated_impl(rows, cols, a, max_rank, rel_cutoff, tail_budget);
    if let Some(t) = t0 {
        shape_stats::record("svd", rows, cols, t.elapsed());
    }
    out
}

fn svd_truncated_impl(
    rows: usize,
    cols: usize,
    a: &[Complex64],
    max_rank: usize,
    rel_cutoff: f64,
    tail_budget: f64,
) -> TruncatedSvd {
    let m = to_mat(rows, cols, a);
    let k = rows.min(cols);
    let par = faer::Par::Seq;
    let mut s_diag = Diag::<c64>::zeros(k);
    let mut v = Mat::<c64>::zeros(cols, k);
    svd(
        m.as_ref(),
        s_diag.as_mut(),
        None,
        Some(v.as_mut()),
        par,
        MemStack::new(&mut MemBuffer::new(svd_scratch::<c64>(
            rows,
            cols,
            ComputeSvdVectors::No,
            ComputeSvdVectors::Thin,
            par,
            Default::default(),
        ))),
        Default::default(),
    )
    .expect("SVD did not converge");
    let sv = s_diag.column_vector();
    let mut s_all = Vec::with_capacity(k);
    for i in 0..k {
        s_all.push(sv[i].re);
    }
    let total: f64 = s_all.iter().map(|x| x * x).sum();
    let floor = rel_cutoff * s_all.first().copied().unwrap_or(0.0);
    let mut rank = s_all.iter().take_while(|&&x| x >= floor && x > 0.0).count();
    rank = rank.clamp(1, max_rank.max(1)).min(k);
    if tail_budget > 0.0 {
        let allowance = tail_budget * total;
        let mut extra = 0.0;
        while rank > 1 {
            let x2 = s_all[rank - 1] * s_all[rank - 1];
            if extra + x2 > allowance {
                break;
            }
            extra += x2;
            rank -= 1;
        }
    }
    let dropped: f64 = s_all[rank..].iter().map(|x| x * x).sum();
    let discarded_fraction = if total > 0.0 { dropped / total } else { 0.0 };

    let mut vh = Vec::with_capacity(rank * cols);
    for l in 0..rank {
        for j in 0..cols {
            vh.push(v[(j, l)].conj());
        }
    }
    TruncatedSvd {
        rank,
        s: s_all[..rank].to_vec(),
        vh,
        discarded_fraction,
    }
}

/// LQ decomposition `a = l · q` with `q` having orthonormal rows.
///
/// `a` is `rows × cols`; returns (`l`: `rows × k`, `q`: `k × cols`) with
/// `k = min(rows, cols)`. Computed as the adjoint of a thin QR of `aᴴ`.
pub fn lq(rows: usize, cols: usize, a: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let t0 = shape_stats::enabled().then(std::time::Instant::now);
    let out = lq_impl(rows, cols, a);
    if let Some(t) = t0 {
        shape_stats::record("lq", rows, cols, t.elapsed());
    }
    out
}

fn lq_impl(rows: usize, cols: usize, a: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let k = rows.min(cols);
    let ah = adjoint(rows, cols, a); // cols × rows
    let m = to_mat(cols, rows, &ah);
    let qr = m.qr();
    let qm = qr.compute_thin_Q(); // cols × k, orthonormal columns
    let rm = qr.thin_R(); // k × rows, upper triangular
    // a = (q r)^H = r^H q^H = l q_out.
    let mut l = vec![Complex64::default(); rows * k];
    for i in 0..rows {
        for j in 0..k {
            l[i * k + j] = rm[(j, i)].conj();
        }
    }
    let mut q = vec![Complex64::default(); k * cols];
    for i in 0..k {
        for j in 0..cols {
            q[i * cols + j] = qm[(j, i)].conj();
        }
    }
    (l, q)
}
