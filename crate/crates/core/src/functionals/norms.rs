//! Sobolev-type norms: the triple norm `‖ψ‖_{W^{3,1}} + ‖ψ‖_{W^{3,∞}}` of
//! sampled fields and the Λ-tables of `‖∇^m(ωψ_Λ)‖_p`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::orbital::{radial_tensor_norms, RadialProfile};
use crate::propagator::{CartesianField, RadialField};
use crate::quad::Quadrature;
use crate::scattering::ScatteringSolution;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Relative disagreement between spacings `h` and `2h` above which the
/// third derivative counts as unresolved.
pub const RICHARDSON_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TripleNormReport {
    /// `Σ_{m≤3} ‖∇^m ψ‖₁`.
    pub w31: f64,
    /// `Σ_{m≤3} ‖∇^m ψ‖_∞`.
    pub w3inf: f64,
    pub total: f64,
    /// `‖∇^m ψ‖₁` for `m = 0..=3`.
    pub l1: [f64; 4],
    /// `‖∇^m ψ‖_∞` for `m = 0..=3`.
    pub sup: [f64; 4],
}

impl TripleNormReport {
    fn from_parts(l1: [f64; 4], sup: [f64; 4]) -> Self {
        let w31 = l1.iter().sum();
        let w3inf = sup.iter().sum();
        Self {
            w31,
            w3inf,
            total: w31 + w3inf,
            l1,
            sup,
        }
    }
}

/// `[f, f', f'', f''']` at every node of a uniform grid by fourth-order
/// central differences; `f` is extended evenly through the origin and by
/// zero beyond the last node.
pub(crate) fn radial_jets(values: &[f64], h: f64) -> Vec<[f64; 4]> {
    let n = values.len() as isize;
    let at = |k: isize| -> f64 {
        let k = k.abs();
        if k < n {
            values[k as usize]
        } else {
            0.0
        }
    };
    (0..n)
        .map(|i| {
            let (m3, m2, m1, p1, p2, p3) = (at(i - 3), at(i - 2), at(i - 1), at(i + 1), at(i + 2), at(i + 3));
            let f = at(i);
            [
                f,
                (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h),
                (-p2 + 16.0 * p1 - 30.0 * f + 16.0 * m1 - m2) / (12.0 * h * h),
                (-p3 + 8.0 * p2 - 13.0 * p1 + 13.0 * m1 - 8.0 * m2 + m3) / (8.0 * h * h * h),
            ]
        })
        .collect()
}

fn radial_report(r: &[f64], weights: &[f64], re: &[f64], im: &[f64], h: f64) -> TripleNormReport {
    let jr = radial_jets(re, h);
    let ji = radial_jets(im, h);
    let mut l1 = [0.0; 4];
    let mut sup = [0.0f64; 4];
    for i in 0..r.len() {
        let a = radial_tensor_norms(r[i], &jr[i]);
        let b = radial_tensor_norms(r[i], &ji[i]);
        for m in 0..4 {
            let v = a[m].hypot(b[m]);
            l1[m] += FOUR_PI * weights[i] * v * r[i] * r[i];
            sup[m] = sup[m].max(v);
        }
    }
    TripleNormReport::from_parts(l1, sup)
}

/// Triple norm of a radial field on a uniform grid, cross-checked against
/// the same computation at twice the spacing.
pub fn triple_norm(field: &RadialField) -> Result<TripleNormReport> {
    let grid = field.grid();
    let h = grid
        .uniform_step()
        .ok_or_else(|| Error::validation("grid", "the triple norm needs a uniform grid"))?;
    let r = grid.nodes();
    let re: Vec<f64> = field.samples().iter().map(|z| z.re).collect();
    let im: Vec<f64> = field.samples().iter().map(|z| z.im).collect();
    let fine = radial_report(r, &grid.weights(), &re, &im, h);
    if r.len() >= 16 {
        let every_other = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<f64>>();
        let rc = every_other(r);
        let wc = crate::grid::RadialGrid::from_nodes(rc.clone())?.weights();
        let coarse = radial_report(&rc, &wc, &every_other(&re), &every_other(&im), 2.0 * h);
        check_richardson(&fine, &coarse)?;
    }
    Ok(fine)
}

fn check_richardson(fine: &TripleNormReport, coarse: &TripleNormReport) -> Result<()> {
    for (what, a, b) in [("W^{3,1}", fine.l1[3], coarse.l1[3]), ("W^{3,∞}", fine.sup[3], coarse.sup[3])] {
        let scale = a.abs().max(b.abs());
        if scale > 0.0 && (a - b).abs() > RICHARDSON_TOLERANCE * scale {
            return Err(Error::Resolution(format!(
                "third derivative unresolved: {what} part changes from {b:.6e} to {a:.6e} when the spacing is halved"
            )));
        }
    }
    Ok(())
}

/// Triple norm of a periodic Cartesian field, with fourth-order periodic
/// differences composed to all mixed partials.
pub fn triple_norm_cartesian(field: &CartesianField) -> Result<TripleNormReport> {
    let fine = cartesian_report(field.n(), field.spacing(), field.samples());
    let n = field.n();
    if n >= 16 {
        let half = n / 2;
        let mut coarse = Vec::with_capacity(half * half * half);
        for k in (0..n).step_by(2) {
            for j in (0..n).step_by(2) {
                for i in (0..n).step_by(2) {
                    coarse.push(field.samples()[i + n * (j + n * k)]);
                }
            }
        }
        check_richardson(&fine, &cartesian_report(half, 2.0 * field.spacing(), &coarse))?;
    }
    Ok(fine)
}

fn cartesian_report(n: usize, h: f64, data: &[Complex64]) -> TripleNormReport {
    let stride = [1, n, n * n];
    let diff = |f: &[Complex64], axis: usize| -> Vec<Complex64> {
        let s = stride[axis];
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let c = (idx / s) % n;
            let base = idx - c * s;
            let at = |d: isize| f[base + ((c as isize + d).rem_euclid(n as isize) as usize) * s];
            *o = (-at(2) + at(1) * 8.0 - at(-1) * 8.0 + at(-2)) / (12.0 * h);
        }
        out
    };
    let len = data.len();
    let mut acc = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (a, z) in acc[0].iter_mut().zip(data) {
        *a = z.norm_sqr();
    }
    for i in 0..3 {
        let di = diff(data, i);
        for (a, z) in acc[1].iter_mut().zip(&di) {
            *a += z.norm_sqr();
        }
        for j in i..3 {
            let dij = diff(&di, j);
            let mult2 = if i == j { 1.0 } else { 2.0 };
            for (a, z) in acc[2].iter_mut().zip(&dij) {
                *a += mult2 * z.norm_sqr();
            }
            for k in j..3 {
                let dijk = diff(&dij, k);
                let mult3 = match (i == j, j == k) {
                    (true, true) => 1.0,
                    (false, false) => 6.0,
                    _ => 3.0,
                };
                for (a, z) in acc[3].iter_mut().zip(&dijk) {
                    *a += mult3 * z.norm_sqr();
                }
            }
        }
    }
    let cell = h * h * h;
    let mut l1 = [0.0; 4];
    let mut sup = [0.0f64; 4];
    for m in 0..4 {
        for v in &acc[m] {
            let s = v.sqrt();
            l1[m] += cell * s;
            sup[m] = sup[m].max(s);
        }
    }
    TripleNormReport::from_parts(l1, sup)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormTable {
    pub m: usize,
    /// `f64::INFINITY` for the sup norm.
    pub p: f64,
    /// `(Λ, ‖∇^m(ωψ_Λ)‖_p)`.
    pub rows: Vec<(f64, f64)>,
    /// Largest over smallest entry.
    pub ratio: f64,
    /// `ratio ≤ 4`.
    pub uniform: bool,
}

/// Radial derivatives `[g, g', g'', g''']` of `g = ω · ψ_Λ`.
fn product_jet(sol: &ScatteringSolution, psi: &RadialProfile, r: f64) -> [f64; 4] {
    let w = sol.omega_derivatives(1, r);
    let p = psi.derivatives(r);
    [
        w[0] * p[0],
        w[1] * p[0] + w[0] * p[1],
        w[2] * p[0] + 2.0 * w[1] * p[1] + w[0] * p[2],
        w[3] * p[0] + 3.0 * w[2] * p[1] + 3.0 * w[1] * p[2] + w[0] * p[3],
    ]
}

/// `‖∇^m (ω ψ_Λ)‖_p` over `lambdas`; requires `p(m+1) > 3`, the range in
/// which the `|x|^{−1}` tail of `ω` keeps the norm bounded uniformly in `Λ`.
pub fn uniform_norm_table(
    psi: &RadialProfile,
    sol: &ScatteringSolution,
    lambdas: &[f64],
    m: usize,
    p: f64,
) -> Result<NormTable> {
    if m > 3 {
        return Err(Error::validation("m", "derivative order must be at most 3"));
    }
    if !(p >= 1.0) {
        return Err(Error::validation("p", format!("{p} must be at least 1")));
    }
    if p.is_finite() && p * (m as f64 + 1.0) <= 3.0 {
        return Err(Error::OutOfHypothesis(format!(
            "p(m+1) = {} does not exceed 3",
            p * (m as f64 + 1.0)
        )));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::validation("lambda", "need a nonempty list of positive scales"));
    }
    let range = sol.support_radius();
    let q = Quadrature {
        rel_tol: 1e-9,
        abs_floor: 0.0,
    };
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let scaled = psi.dilated(lambda);
        let extent = scaled.extent();
        let density = |r: f64| radial_tensor_norms(r, &product_jet(sol, &scaled, r))[m];
        let mut breaks = vec![0.0, range.min(extent)];
        let mut x = breaks[1];
        while 2.0 * x < extent {
            x *= 2.0;
            breaks.push(x);
        }
        breaks.push(extent);
        breaks.dedup();
        let value = if p.is_infinite() {
            let mut sup = 0.0f64;
            for w in breaks.windows(2) {
                for k in 0..=400 {
                    sup = sup.max(density(w[0] + (w[1] - w[0]) * k as f64 / 400.0));
                }
            }
            sup
        } else {
            (FOUR_PI * q.integrate_pieces(|r| density(r).powf(p) * r * r, &breaks)?).powf(1.0 / p)
        };
        rows.push((lambda, value));
    }
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
    Ok(NormTable {
        m,
        p,
        rows,
        ratio,
        uniform: ratio <= 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::potential::PotentialSpec;
    use crate::scattering::solve_default;

    fn closed_form(p: &RadialProfile) -> TripleNormReport {
        let q = Quadrature::with_rel_tol(1e-12);
        let mut l1 = [0.0; 4];
        let mut sup = [0.0f64; 4];
        for m in 0..4 {
            let f = |r: f64| radial_tensor_norms(r, &p.derivatives(r))[m];
            l1[m] = FOUR_PI * q.integrate_pieces(|r| f(r) * r * r, &[0.0, 1.0, 2.0, 4.0, 8.0]).unwrap();
            for k in 0..=80_000 {
                sup[m] = sup[m].max(f(k as f64 * 1e-4));
            }
        }
        TripleNormReport::from_parts(l1, sup)
    }

    #[test]
    fn zero_field() {
        let g = RadialGrid::uniform(0.1, 10.0).unwrap();
        let f = RadialField::from_real(g, &vec![0.0; 101], 1.0).unwrap();
        assert_eq!(triple_norm(&f).unwrap(), TripleNormReport::default());
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let p = RadialProfile::gaussian(1.0).unwrap();
        let g = RadialGrid::uniform(0.0025, 8.0).unwrap();
        let f = RadialField::from_real(g.clone(), &p.sample(&g), 1.0).unwrap();
        let got = triple_norm(&f).unwrap();
        let want = closed_form(&p);
        for m in 0..4 {
            assert!((got.l1[m] / want.l1[m] - 1.0).abs() < 1e-4, "l1 {m}: {} vs {}", got.l1[m], want.l1[m]);
            assert!((got.sup[m] / want.sup[m] - 1.0).abs() < 1e-4, "sup {m}: {} vs {}", got.sup[m], want.sup[m]);
        }
        // a pure phase leaves every norm unchanged; third differences over
        // h³ amplify rounding to about 1e-9
        let rotated = f.with_samples(f.samples().iter().map(|z| z * Complex64::from_polar(1.0, 0.7)).collect()).unwrap();
        let again = triple_norm(&rotated).unwrap();
        assert!((again.total / got.total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dilation_scaling() {
        let p = RadialProfile::gaussian(1.0).unwrap();
        let lambda = 4.0;
        let g1 = RadialGrid::uniform(0.0025, 8.0).unwrap();
        let g4 = RadialGrid::uniform(0.01, 32.0).unwrap();
        let base = triple_norm(&RadialField::from_real(g1.clone(), &p.sample(&g1), 1.0).unwrap()).unwrap();
        let pl = p.dilated(lambda);
        let big = triple_norm(&RadialField::from_real(g4.clone(), &pl.sample(&g4), 1.0).unwrap()).unwrap();
        for m in 0..4 {
            let expected = lambda.powi(3 - m as i32) * base.l1[m];
            assert!((big.l1[m] / expected - 1.0).abs() < 1e-6, "{m}");
        }
        assert!(big.w3inf <= base.w3inf);
    }

    #[test]
    fn under_resolved_third_derivative_is_rejected() {
        let p = RadialProfile::gaussian(0.05).unwrap();
        let g = RadialGrid::uniform(0.1, 8.0).unwrap();
        let f = RadialField::from_real(g.clone(), &p.sample(&g), 1.0).unwrap();
        assert!(matches!(triple_norm(&f), Err(Error::Resolution(_))));
    }

    #[test]
    fn cartesian_agrees_with_radial() {
        let p = RadialProfile::gaussian(2.0).unwrap();
        let c = CartesianField::from_fn(128, 16.0, 1.0, |x| {
            Complex64::new(p.value((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()), 0.0)
        })
        .unwrap();
        let got = triple_norm_cartesian(&c).unwrap();
        let want = closed_form(&p);
        for m in 0..4 {
            assert!((got.l1[m] / want.l1[m] - 1.0).abs() < 2e-3, "l1 {m}: {} vs {}", got.l1[m], want.l1[m]);
        }
        assert!((got.sup[0] / want.sup[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_table_gate_and_uniformity() {
        let sol = solve_default(&PotentialSpec::bump(5.0, 1.0).unwrap()).unwrap();
        let psi = RadialProfile::bump(1.0).unwrap();
        assert!(matches!(
            uniform_norm_table(&psi, &sol, &[50.0], 0, 2.0),
            Err(Error::OutOfHypothesis(_))
        ));
        let t = uniform_norm_table(&psi, &sol, &[50.0, 100.0, 200.0, 400.0], 1, 4.0).unwrap();
        assert!(t.uniform, "{t:?}");
        let s = uniform_norm_table(&psi, &sol, &[50.0, 400.0], 0, f64::INFINITY).unwrap();
        let expected = sol.omega()[0] * psi.value(0.0);
        for (_, v) in &s.rows {
            assert!((v / expected - 1.0).abs() < 1e-9, "{v} vs {expected}");
        }
    }
}
