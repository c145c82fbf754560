//! Periodic-box discretization.
//!
//! The physical domain is the torus `[0, L)^3` sampled on a cubic lattice of
//! `n_modes` points per axis. Retained Fourier modes are integer triples `k`
//! with each component in `[-n/2, n/2)`; the physical wavevector is
//! `k' = (2 pi / L) k`.

use serde::{Deserialize, Serialize};

use crate::error::GridError;

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Cubic periodic-box discretization: mode count per axis, box length and the
/// dealiasing rule applied to quadratic products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_modes: usize,
    box_length: f64,
    dealias_fraction: f64,
}

impl GridSpec {
    /// Grid with the default 2/3 dealiasing rule.
    pub fn new(n_modes: usize, box_length: f64) -> Result<Self, GridError> {
        Self::with_dealias(n_modes, box_length, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias(
        n_modes: usize,
        box_length: f64,
        dealias_fraction: f64,
    ) -> Result<Self, GridError> {
        if n_modes < 8 || !n_modes.is_multiple_of(2) {
            return Err(GridError::BadModeCount(n_modes));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(GridError::BadBoxLength(box_length));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(GridError::BadDealiasFraction(dealias_fraction));
        }
        Ok(Self {
            n_modes,
            box_length,
            dealias_fraction,
        })
    }

    /// Same mode count and dealias rule on a box of length `box_length`.
    pub fn rescaled_box(&self, box_length: f64) -> Result<Self, GridError> {
        Self::with_dealias(self.n_modes, box_length, self.dealias_fraction)
    }

    pub fn n(&self) -> usize {
        self.n_modes
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Number of lattice points (= number of retained modes) per component.
    pub fn point_count(&self) -> usize {
        self.n_modes * self.n_modes * self.n_modes
    }

    /// Lattice spacing `L / n`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_modes as f64
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h * h * h
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Fundamental wavenumber `2 pi / L`.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Integer frequency of storage index `i` along one axis, in `[-n/2, n/2)`.
    #[inline]
    pub fn frequency(&self, i: usize) -> i64 {
        let n = self.n_modes as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index of integer frequency `k` (must lie in `[-n/2, n/2)`).
    #[inline]
    pub fn index_of_frequency(&self, k: i64) -> usize {
        let n = self.n_modes as i64;
        debug_assert!(k >= -n / 2 && k < n / 2);
        if k >= 0 {
            k as usize
        } else {
            (k + n) as usize
        }
    }

    /// Flat index of the mode at storage indices `(i1, i2, i3)`.
    #[inline]
    pub fn mode_index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n_modes + i2) * self.n_modes + i3
    }

    /// Integer mode triple of flat index `m`.
    #[inline]
    pub fn mode_of_index(&self, m: usize) -> [i64; 3] {
        let n = self.n_modes;
        let i3 = m % n;
        let i2 = (m / n) % n;
        let i1 = m / (n * n);
        [
            self.frequency(i1),
            self.frequency(i2),
            self.frequency(i3),
        ]
    }

    /// Physical wavevector `k' = (2 pi / L) k` of flat index `m`.
    #[inline]
    pub fn wavevector(&self, m: usize) -> [f64; 3] {
        let k = self.mode_of_index(m);
        let b = self.base_wavenumber();
        [b * k[0] as f64, b * k[1] as f64, b * k[2] as f64]
    }

    /// `|k'|^2` of flat index `m`.
    #[inline]
    pub fn wavevector_sq(&self, m: usize) -> f64 {
        let w = self.wavevector(m);
        w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
    }

    /// Largest retained integer frequency under the dealias rule,
    /// `floor(dealias_fraction * n/2)`.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.dealias_fraction * (self.n_modes as f64) / 2.0).floor() as i64
    }

    /// Whether the mode at flat index `m` survives dealiasing.
    #[inline]
    pub fn mode_retained(&self, m: usize) -> bool {
        let k = self.mode_of_index(m);
        let c = self.dealias_cutoff();
        k[0].abs() <= c && k[1].abs() <= c && k[2].abs() <= c
    }

    /// Physical coordinates of the lattice point with flat index `m`.
    #[inline]
    pub fn point(&self, m: usize) -> [f64; 3] {
        let n = self.n_modes;
        let h = self.spacing();
        let i3 = m % n;
        let i2 = (m / n) % n;
        let i1 = m / (n * n);
        [i1 as f64 * h, i2 as f64 * h, i3 as f64 * h]
    }

    /// Componentwise displacement `x - c` wrapped to `[-L/2, L/2)`.
    #[inline]
    pub fn wrap_displacement(&self, x: [f64; 3], c: [f64; 3]) -> [f64; 3] {
        let l = self.box_length;
        let mut d = [0.0; 3];
        for a in 0..3 {
            let mut v = (x[a] - c[a]) % l;
            if v < -l / 2.0 {
                v += l;
            } else if v >= l / 2.0 {
                v -= l;
            }
            d[a] = v;
        }
        d
    }

    /// Periodic distance between `x` and `c`.
    #[inline]
    pub fn periodic_distance(&self, x: [f64; 3], c: [f64; 3]) -> f64 {
        let d = self.wrap_displacement(x, c);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Check that two grids agree in mode count and box length.
    pub fn check_same(&self, other: &GridSpec) -> Result<(), GridError> {
        if self.n_modes != other.n_modes {
            return Err(GridError::Mismatch(format!(
                "mode counts differ: {} vs {}",
                self.n_modes, other.n_modes
            )));
        }
        if (self.box_length - other.box_length).abs() > 1e-12 * self.box_length {
            return Err(GridError::Mismatch(format!(
                "box lengths differ: {} vs {}",
                self.box_length, other.box_length
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(GridSpec::new(7, 1.0).is_err());
        assert!(GridSpec::new(6, 1.0).is_err());
        assert!(GridSpec::new(8, 0.0).is_err());
        assert!(GridSpec::new(8, -1.0).is_err());
        assert!(GridSpec::with_dealias(8, 1.0, 0.0).is_err());
        assert!(GridSpec::with_dealias(8, 1.0, 1.5).is_err());
        assert!(GridSpec::new(8, 1.0).is_ok());
    }

    #[test]
    fn frequency_range_covers_half_open_interval() {
        let g = GridSpec::new(8, 2.0).unwrap();
        let freqs: Vec<i64> = (0..8).map(|i| g.frequency(i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.frequency(g.index_of_frequency(k)), k);
        }
    }

    #[test]
    fn wavevector_scales_with_box() {
        let g = GridSpec::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let m = g.mode_index(1, 0, 0);
        let w = g.wavevector(m);
        assert!((w[0] - 1.0).abs() < 1e-15);
        assert_eq!(g.mode_of_index(m), [1, 0, 0]);
    }

    #[test]
    fn dealias_cutoff_two_thirds() {
        let g = GridSpec::new(32, 1.0).unwrap();
        assert_eq!(g.dealias_cutoff(), 10); // floor(2/3 * 16)
    }

    #[test]
    fn wrap_displacement_takes_nearest_image() {
        let g = GridSpec::new(8, 10.0).unwrap();
        let d = g.wrap_displacement([9.5, 0.0, 0.0], [0.5, 0.0, 0.0]);
        assert!((d[0] - -1.0).abs() < 1e-12);
        assert!((g.periodic_distance([9.5, 0.0, 0.0], [0.5, 0.0, 0.0]) - 1.0).abs() < 1e-12);
    }
}
