//! Polar decomposition of a complex field into density, unwrapped phase and
//! the quantum potential, plus the residuals of the two coupled equations
//! the decomposition must satisfy along an evolution.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Field, NumericsError, AMPLITUDE_FLOOR};

/// `rho = |u|^2`, branch-continuous phase `S`, and the quantum potential
/// `Q = -(sqrt(rho))'' / sqrt(rho)` by central stencils (endpoints take the
/// adjacent interior value where the stencil does not reach).
#[derive(Debug, Clone)]
pub struct MadelungFields {
    pub rho: Field<f64>,
    pub phase: Field<f64>,
    pub quantum_potential: Field<f64>,
}

pub fn madelung_split(u: &Field<Complex64>) -> Result<MadelungFields, NumericsError> {
    let grid = u.grid;
    let n = grid.n;
    let dx = grid.dx();

    for (i, v) in u.values.iter().enumerate() {
        if v.norm() < AMPLITUDE_FLOOR {
            return Err(NumericsError::ZeroAmplitude(i));
        }
    }

    let rho: Vec<f64> = u.values.iter().map(|v| v.norm_sqr()).collect();

    // unwrap the phase along the grid; a jump above pi/2 means the phase is
    // undersampled
    let mut phase = vec![0.0; n];
    phase[0] = u.values[0].arg();
    for i in 1..n {
        let mut delta = u.values[i].arg() - u.values[i - 1].arg();
        while delta > PI {
            delta -= 2.0 * PI;
        }
        while delta < -PI {
            delta += 2.0 * PI;
        }
        if delta.abs() > PI / 2.0 {
            return Err(NumericsError::PhaseUndersampled(i - 1, i));
        }
        phase[i] = phase[i - 1] + delta;
    }

    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let mut q = vec![0.0; n];
    for i in 1..n - 1 {
        q[i] = -(sq[i + 1] - 2.0 * sq[i] + sq[i - 1]) / (dx * dx) / sq[i];
    }
    q[0] = q[1];
    q[n - 1] = q[n - 2];

    Ok(MadelungFields {
        rho: Field::new(grid, rho, (0.0, 0.0))?,
        phase: Field::new(grid, phase, (0.0, 0.0))?,
        quantum_potential: Field::new(grid, q, (0.0, 0.0))?,
    })
}

/// Max-norm residuals of the two decomposed equations along a time series:
/// the density transport `rho_t + (2 rho S_x)_x = 0` and the phase equation
/// `-S_t = S_x^2 + V + Q`. Central differences in both directions; nodes
/// where the density drops below `1e-8` are excluded (the phase is noise
/// there). Returns `(transport, phase)`.
pub fn madelung_residuals(
    series: &[Field<Complex64>],
    dt: f64,
    potential: &dyn Fn(f64, f64) -> f64,
) -> Result<(f64, f64), NumericsError> {
    if series.len() < 3 {
        return Err(NumericsError::ShapeMismatch(
            "need at least three time slices".into(),
        ));
    }
    let grid = series[0].grid;
    let n = grid.n;
    let dx = grid.dx();

    let mut fields = Vec::with_capacity(series.len());
    for s in series {
        if s.grid != grid {
            return Err(NumericsError::ShapeMismatch("series grid differs".into()));
        }
        fields.push(madelung_split(s)?);
    }

    // anchor the phase branch across slices at the first grid point
    let mut shift = vec![0.0; fields.len()];
    for k in 1..fields.len() {
        let prev = fields[k - 1].phase.values[0] + shift[k - 1];
        let cur = fields[k].phase.values[0];
        shift[k] = 2.0 * PI * ((prev - cur) / (2.0 * PI)).round();
    }

    let phase_at = |k: usize, i: usize| fields[k].phase.values[i] + shift[k];
    let density_floor = 1e-8;

    let mut transport_res = 0.0_f64;
    let mut phase_res = 0.0_f64;
    for k in 1..fields.len() - 1 {
        let t = k as f64 * dt;
        // flux = 2 rho S_x needs its own derivative, so stay two nodes in
        for i in 2..n - 2 {
            if fields[k].rho.values[i] < density_floor {
                continue;
            }
            let rho_t =
                (fields[k + 1].rho.values[i] - fields[k - 1].rho.values[i]) / (2.0 * dt);
            let flux = |kk: usize, ii: usize| {
                let sx = (phase_at(kk, ii + 1) - phase_at(kk, ii - 1)) / (2.0 * dx);
                2.0 * fields[kk].rho.values[ii] * sx
            };
            let flux_x = (flux(k, i + 1) - flux(k, i - 1)) / (2.0 * dx);
            transport_res = transport_res.max((rho_t + flux_x).abs());

            let s_t = (phase_at(k + 1, i) - phase_at(k - 1, i)) / (2.0 * dt);
            let s_x = (phase_at(k, i + 1) - phase_at(k, i - 1)) / (2.0 * dx);
            let q = fields[k].quantum_potential.values[i];
            let v = potential(grid.x(i), t);
            phase_res = phase_res.max((s_t + s_x * s_x + v + q).abs());
        }
    }
    Ok((transport_res, phase_res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;

    fn plane_wave(grid: Grid1D, k: f64, w: f64, t: f64) -> Field<Complex64> {
        Field::from_fn(
            grid,
            |x| Complex64::new(0.0, k * x - w * t).exp(),
            (
                Complex64::new(0.0, k * grid.x_min - w * t).exp(),
                Complex64::new(0.0, k * grid.x_max - w * t).exp(),
            ),
        )
        .unwrap()
    }

    #[test]
    fn plane_wave_has_unit_density_and_no_quantum_potential() {
        let grid = Grid1D::new(-5.0, 5.0, 256).unwrap();
        let u = plane_wave(grid, 2.0, 4.0, 0.0);
        let m = madelung_split(&u).unwrap();
        for (i, r) in m.rho.values.iter().enumerate() {
            assert!((r - 1.0).abs() < 1e-12);
            assert!(m.quantum_potential.values[i].abs() < 1e-10);
        }
        // S = k x up to the branch at the first point
        let dx = grid.dx();
        for w in m.phase.values.windows(2) {
            assert!((w[1] - w[0] - 2.0 * dx).abs() < 1e-10);
        }
    }

    #[test]
    fn real_positive_fields_have_zero_phase() {
        let grid = Grid1D::new(-3.0, 3.0, 64).unwrap();
        let u = Field::from_fn(
            grid,
            |x| Complex64::new((-x * x / 4.0).exp() + 0.1, 0.0),
            (Complex64::new(0.1, 0.0), Complex64::new(0.1, 0.0)),
        )
        .unwrap();
        let m = madelung_split(&u).unwrap();
        assert!(m.phase.values.iter().all(|s| s.abs() < 1e-14));
    }

    #[test]
    fn gaussian_density_quantum_potential_matches_analytic_form() {
        // rho = exp(-x^2): sqrt(rho) = exp(-x^2/2), Q = 1 - x^2
        let grid = Grid1D::new(-4.0, 4.0, 256).unwrap();
        let u = Field::from_fn(
            grid,
            |x| Complex64::new((-x * x / 2.0).exp(), 0.0),
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        );
        // amplitude underflows past |x| ~ 6.8; this domain stays above it
        let u = u.unwrap();
        let m = madelung_split(&u).unwrap();
        let dx2 = grid.dx() * grid.dx();
        let mut max_err = 0.0_f64;
        for i in 1..grid.n - 1 {
            let x = grid.x(i);
            max_err = max_err.max((m.quantum_potential.values[i] - (1.0 - x * x)).abs());
        }
        // stencil error O(dx^2); the constant reflects the quartic growth of
        // the fourth derivative near the domain edge
        assert!(max_err < 20.0 * dx2, "err {} vs dx^2 {}", max_err, dx2);

        // refine once: error drops by ~4
        let grid2 = Grid1D::new(-4.0, 4.0, 512).unwrap();
        let u2 = Field::from_fn(
            grid2,
            |x| Complex64::new((-x * x / 2.0).exp(), 0.0),
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        )
        .unwrap();
        let m2 = madelung_split(&u2).unwrap();
        let mut max_err2 = 0.0_f64;
        for i in 1..grid2.n - 1 {
            let x = grid2.x(i);
            max_err2 = max_err2.max((m2.quantum_potential.values[i] - (1.0 - x * x)).abs());
        }
        let ratio = max_err / max_err2;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {}", ratio);
    }

    #[test]
    fn zero_amplitude_is_rejected() {
        let grid = Grid1D::new(-30.0, 30.0, 64).unwrap();
        let u = Field::from_fn(
            grid,
            |x| Complex64::new((-x * x / 2.0).exp(), 0.0),
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        )
        .unwrap();
        assert!(matches!(
            madelung_split(&u),
            Err(NumericsError::ZeroAmplitude(_))
        ));
    }

    #[test]
    fn plane_wave_residuals_reproduce_dispersion_gap() {
        // V = 0: transport residual vanishes, phase residual is |w - k^2|
        let grid = Grid1D::new(-5.0, 5.0, 128).unwrap();
        let k = 2.0;
        let dt = 1e-3;
        let make = |w: f64| -> Vec<Field<Complex64>> {
            (0..6).map(|s| plane_wave(grid, k, w, s as f64 * dt)).collect()
        };
        let (tr, ph) = madelung_residuals(&make(k * k), dt, &|_, _| 0.0).unwrap();
        assert!(tr < 1e-10, "transport {}", tr);
        assert!(ph < 1e-10, "phase {}", ph);
        let off = 0.5;
        let (_, ph_off) = madelung_residuals(&make(k * k + off), dt, &|_, _| 0.0).unwrap();
        assert!((ph_off - off).abs() < 1e-8, "gap {}", ph_off);
    }
}
