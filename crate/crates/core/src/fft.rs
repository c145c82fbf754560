//! Cached 3D complex-to-complex transforms built on rustfft.
//!
//! Plans are shared process-wide behind a mutex; the planned FFT objects are
//! `Send + Sync`, so transforms may run concurrently from any thread.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLAN_CACHE: Lazy<Mutex<HashMap<usize, Arc<Plans>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plans_for(n: usize) -> Arc<Plans> {
    let mut cache = PLAN_CACHE.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft(n, FftDirection::Forward),
                inverse: planner.plan_fft(n, FftDirection::Inverse),
            })
        })
        .clone()
}

/// Unnormalized 3D DFT of one `n^3` component stored with the last axis
/// contiguous. `inverse = false` computes `sum_x f(x) e^{-2 pi i k.x / n}`,
/// `inverse = true` computes `sum_k F(k) e^{+2 pi i k.x / n}`.
pub fn fft3(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n * n);
    let plans = plans_for(n);
    let fft = if inverse {
        &plans.inverse
    } else {
        &plans.forward
    };
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Axis 3 (contiguous rows).
    fft.process_with_scratch(data, &mut scratch);

    // Axes 1 and 2: gather strided pencils into a buffer, transform, scatter.
    let mut pencil = vec![Complex64::default(); n];
    let mut pencil_scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // Axis 2: stride n, pencils indexed by (i1, i3).
    for i1 in 0..n {
        for i3 in 0..n {
            let base = i1 * n * n + i3;
            for i2 in 0..n {
                pencil[i2] = data[base + i2 * n];
            }
            fft.process_with_scratch(&mut pencil, &mut pencil_scratch);
            for i2 in 0..n {
                data[base + i2 * n] = pencil[i2];
            }
        }
    }
    // Axis 1: stride n^2, pencils indexed by (i2, i3).
    let n2 = n * n;
    for i2 in 0..n {
        for i3 in 0..n {
            let base = i2 * n + i3;
            for i1 in 0..n {
                pencil[i1] = data[base + i1 * n2];
            }
            fft.process_with_scratch(&mut pencil, &mut pencil_scratch);
            for i1 in 0..n {
                data[base + i1 * n2] = pencil[i1];
            }
        }
    }
}
