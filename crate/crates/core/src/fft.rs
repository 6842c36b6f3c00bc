//! 3D complex FFTs on flat row-major arrays (last axis fastest).
//!
//! `forward` maps collocation values to Fourier-series coefficients (divides
//! by n³), so a constant field lands entirely on the zero mode. `inverse`
//! synthesizes values from coefficients with no extra factor. Plans are
//! cached per size in a process-wide planner.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::{Arc, Mutex, OnceLock};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap();
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

thread_local! {
    static PERMUTE: RefCell<Vec<Complex64>> = RefCell::new(Vec::new());
    static SCRATCH: RefCell<Vec<Complex64>> = RefCell::new(Vec::new());
}

fn run_1d(fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        s.resize(fft.get_inplace_scratch_len(), Complex64::default());
        fft.process_with_scratch(buf, &mut s);
    });
}

fn fft_all_axes(buf: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(buf.len(), n * n * n);
    let fft = plan(n, inverse);
    let nn = n * n;

    // axis 3: rows are contiguous
    run_1d(&fft, buf);

    PERMUTE.with(|p| {
        let mut tmp = p.borrow_mut();
        tmp.resize(n * n * n, Complex64::default());

        // axis 2: transpose each i1-slab so i2 becomes contiguous
        for slab in buf.chunks_exact_mut(nn) {
            transpose::transpose(slab, &mut tmp[..nn], n, n);
            run_1d(&fft, &mut tmp[..nn]);
            transpose::transpose(&tmp[..nn], slab, n, n);
        }

        // axis 1: view as an n × n² matrix and transpose so i1 is contiguous
        transpose::transpose(buf, &mut tmp, nn, n);
        run_1d(&fft, &mut tmp);
        transpose::transpose(&tmp, buf, n, nn);
    });
}

/// Collocation values → Fourier coefficients.
pub fn forward(buf: &mut [Complex64], n: usize) {
    fft_all_axes(buf, n, false);
    let scale = 1.0 / (n * n * n) as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}

/// Fourier coefficients → collocation values.
pub fn inverse(buf: &mut [Complex64], n: usize) {
    fft_all_axes(buf, n, true);
}
