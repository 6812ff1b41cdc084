//! One-dimensional window kernels shared by the maximal operators.
//!
//! Window sums restart their running sums at every multiple of the window
//! length, so a window is the sum of one block suffix and one block prefix.
//! Every term is non-negative and nothing is subtracted, which keeps the
//! relative rounding error of each sum bounded by its length even when the
//! window is tiny next to the total mass (and exactly zero windows stay zero).

/// Reusable buffers for [`window_sums`].
#[derive(Debug, Default)]
pub struct SumScratch {
    prefix: Vec<f64>,
    suffix: Vec<f64>,
}

/// Sums of every length-`len` window of `values`, written to `out`
/// (`out[s] = values[s] + ... + values[s + len - 1]`).
pub fn window_sums(values: &[f64], len: usize, scratch: &mut SumScratch, out: &mut Vec<f64>) {
    let m = values.len();
    assert!(len >= 1 && len <= m, "window length {len} outside 1..={m}");
    out.clear();
    if len == 1 {
        out.extend_from_slice(values);
        return;
    }

    let SumScratch { prefix, suffix } = scratch;
    prefix.clear();
    prefix.resize(m, 0.0);
    suffix.clear();
    suffix.resize(m, 0.0);
    block_scan(values, len, prefix, suffix, 0.0, |a, b| a + b);

    // window s ends at s + len - 1, which lies in the block after the one holding s
    let starts = m - len + 1;
    out.reserve(starts);
    for block in (0..starts).step_by(len) {
        out.push(prefix[block + len - 1]);
        let end = (block + len).min(starts);
        out.extend((block + 1..end).map(|s| suffix[s] + prefix[s + len - 1]));
    }
}

/// Running `op` from the start (`prefix`) and from the end (`suffix`) of
/// every block `[j len, (j + 1) len)` of `values`.
fn block_scan(values: &[f64], len: usize, prefix: &mut [f64], suffix: &mut [f64], init: f64, op: impl Fn(f64, f64) -> f64) {
    for ((v, p), s) in values.chunks(len).zip(prefix.chunks_mut(len)).zip(suffix.chunks_mut(len)) {
        let mut acc = init;
        for (x, slot) in v.iter().zip(p.iter_mut()) {
            acc = op(acc, *x);
            *slot = acc;
        }
        let mut acc = init;
        for (x, slot) in v.iter().zip(s.iter_mut()).rev() {
            acc = op(acc, *x);
            *slot = acc;
        }
    }
}

/// Reusable buffers for [`covering_max`].
#[derive(Debug, Default)]
pub struct MaxScratch {
    prefix: Vec<f64>,
    suffix: Vec<f64>,
}

impl MaxScratch {
    pub fn new() -> Self {
        Self::default()
    }
}

/// For each of `m` cells, the maximum over the windows of length `len`
/// that contain it. `windows` holds the `m - len + 1` window values; cell
/// `i` is covered by the windows starting in `[i + 1 - len, i]` clipped to
/// the valid range.
///
/// A covering range has at most `len` entries, so it lies in one block of
/// length `len` or straddles two neighbours; block prefix and suffix maxima
/// answer either case with one comparison.
pub fn covering_max(windows: &[f64], len: usize, m: usize, scratch: &mut MaxScratch, out: &mut [f64]) {
    debug_assert_eq!(windows.len(), m + 1 - len);
    debug_assert_eq!(out.len(), m);
    if len == 1 {
        out.copy_from_slice(windows);
        return;
    }
    let count = windows.len();
    let MaxScratch { prefix, suffix } = scratch;
    prefix.clear();
    prefix.resize(count, 0.0);
    suffix.clear();
    suffix.resize(count, 0.0);
    block_scan(windows, len, prefix, suffix, f64::NEG_INFINITY, f64::max);

    let last = count - 1;
    let mut block = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = i.min(last);
        if hi >= block + len {
            block += len;
        }
        let lo = (i + 1).saturating_sub(len);
        *slot = if lo < block {
            suffix[lo].max(prefix[hi])
        } else if lo == block {
            prefix[hi]
        } else {
            // clipped at the right end: hi is the last window of the block
            suffix[lo]
        };
    }
}
