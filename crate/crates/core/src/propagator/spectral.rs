//! Exact free evolution: `u = rψ` is odd-extended to a periodic sequence of
//! period `2 r_max` and multiplied by `e^{−iμk²T}` in Fourier space.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Dynamics, RadialField};
use crate::error::{ensure_finite, Error, Result};

/// Fraction of spectral mass in the top third of the resolved band above
/// which the result is flagged as possibly aliased.
pub const ALIASING_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FreeEvolution {
    pub field: RadialField,
    /// Spectral mass fraction with `|k| > 2/3 k_max` in the initial data.
    pub spectral_tail: f64,
    pub resolution_warning: bool,
}

/// Odd extension of `u` (with `u[0] = u[n−1] = 0`) to length `2(n−1)`.
pub(crate) fn odd_extend(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let m = 2 * (n - 1);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for i in 1..n - 1 {
        out[i] = u[i];
        out[m - i] = -u[i];
    }
    out
}

/// Angular wavenumbers of an FFT of length `m` with spacing `h`.
pub(crate) fn wavenumbers(m: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (m as f64 * h);
    (0..m)
        .map(|j| if j <= m / 2 { j as f64 * dk } else { (j as f64 - m as f64) * dk })
        .collect()
}

pub fn evolve_free(field: &RadialField, mu: f64, t: f64) -> Result<FreeEvolution> {
    let dynamics = Dynamics::new(mu)?;
    let h = field.grid().uniform_step().ok_or_else(|| {
        Error::validation("grid", "spectral free evolution needs a uniform grid")
    })?;
    let u = field.u();
    let n = u.len();
    let m = 2 * (n - 1);
    let mut buf = odd_extend(&u);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let k = wavenumbers(m, h);
    let k_max = k.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    let tail: f64 = buf
        .iter()
        .zip(&k)
        .filter(|(_, kk)| kk.abs() > 2.0 / 3.0 * k_max)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    let spectral_tail = if total > 0.0 { tail / total } else { 0.0 };
    let scale = 1.0 / m as f64;
    for (z, kk) in buf.iter_mut().zip(&k) {
        *z *= Complex64::from_polar(scale, -dynamics.mu * kk * kk * t);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[1..n - 1].copy_from_slice(&buf[1..n - 1]);
    ensure_finite(&out, "free evolution")?;
    Ok(FreeEvolution {
        field: field.from_u(&out, t, None),
        spectral_tail,
        resolution_warning: spectral_tail > ALIASING_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    fn free_gaussian(r: f64, w: f64, mu: f64, t: f64) -> Complex64 {
        let z = Complex64::new(w, 4.0 * mu * t);
        Complex64::new(1.0, 4.0 * mu * t / w).powf(-1.5) * (-(r * r) / z).exp()
    }

    #[test]
    fn identity_at_zero_time_and_unitary() {
        let g = RadialGrid::uniform(0.05, 40.0).unwrap();
        let f = RadialField::from_fn(g, |r| Complex64::new((-r * r / 3.0).exp(), 0.0), 1.0).unwrap();
        let same = evolve_free(&f, 1.0, 0.0).unwrap().field;
        for (a, b) in same.samples().iter().zip(f.samples()).skip(1) {
            assert!((a - b).norm() < 1e-14);
        }
        let later = evolve_free(&f, 1.0, 3.0).unwrap().field;
        assert!((later.norm() / f.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_closed_form() {
        let g = RadialGrid::uniform(0.05, 60.0).unwrap();
        let (w, mu, t) = (2.0, 1.0, 2.0);
        let f = RadialField::from_fn(g, |r| Complex64::new((-r * r / w).exp(), 0.0), mu).unwrap();
        let out = evolve_free(&f, mu, t).unwrap();
        assert!(!out.resolution_warning);
        let err = out
            .field
            .grid()
            .nodes()
            .iter()
            .zip(out.field.samples())
            .map(|(&r, z)| (z - free_gaussian(r, w, mu, t)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn packet_moves_at_group_velocity() {
        let g = RadialGrid::uniform(0.02, 200.0).unwrap();
        let (r0, k0, s, mu) = (40.0, 1.5, 3.0, 2.0);
        let f = RadialField::from_fn(
            g,
            |r| {
                if r == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::from_polar((-(r - r0).powi(2) / (2.0 * s * s)).exp() / r, k0 * r)
            },
            mu,
        )
        .unwrap();
        let centroid = |f: &RadialField| {
            let u = f.u();
            let grid = f.grid();
            let w = grid.weights();
            let m: f64 = u.iter().zip(&w).map(|(z, w)| z.norm_sqr() * w).sum();
            u.iter()
                .zip(&w)
                .zip(grid.nodes())
                .map(|((z, w), r)| z.norm_sqr() * w * r)
                .sum::<f64>()
                / m
        };
        let t = 10.0;
        let out = evolve_free(&f, mu, t).unwrap().field;
        let v = (centroid(&out) - centroid(&f)) / t;
        assert!((v - 2.0 * mu * k0).abs() < 1e-3 * 2.0 * mu * k0, "{v}");
    }

    #[test]
    fn under_resolved_data_is_flagged() {
        let g = RadialGrid::uniform(0.5, 40.0).unwrap();
        let f = RadialField::from_fn(g, |r| Complex64::new((-r * r / 0.3).exp(), 0.0), 1.0).unwrap();
        assert!(evolve_free(&f, 1.0, 1.0).unwrap().resolution_warning);
    }
}
