//! Derived quantities of a Husimi field: peak location, moments and
//! dispersions, phase-space uncertainty, transmission probability, and
//! modality.
//!
//! All integrals are 2D trapezoids over the field's own grid. Truncation is
//! audited by extrapolating the outermost strips geometrically; edges that
//! could be pushed outwards abort when they carry weight, while the lower
//! x edge is physical once it sits within one packet width of the barrier
//! (the distribution lives on x > 0, so there is nowhere left to enlarge).

use crate::error::{Error, Result};
use crate::phys::{PhaseSpacePoint, HBAR};
use crate::transmission::HusimiField;

/// Truncation audit: estimated fraction of the distribution captured by the
/// grid, counting only edges that could still be enlarged. Gates both the
/// moments and the transmission probability. A mass gate rather than an
/// edge-value gate: time-windowed apertures give the velocity marginal
/// power-law tails whose edge values stay visible long after their mass has
/// become irrelevant.
const MASS_FRACTION_FLOOR: f64 = 0.999;

/// The lower x edge counts as physical (not enlargeable) below this many
/// packet widths.
const PHYSICAL_EDGE_SIGMA: f64 = 1.0;

/// Default relative threshold for modality counting.
pub const MODALITY_THRESHOLD: f64 = 0.1;

/// First and second moments of a normalized field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_v: f64,
    pub disp_x: f64,
    pub disp_v: f64,
}

/// Bundle of every derived quantity for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableReport {
    /// Sub-cell refined location of the global maximum.
    pub peak: PhaseSpacePoint,
    pub mean_x: f64,
    pub mean_v: f64,
    pub disp_x: f64,
    pub disp_v: f64,
    /// disp_x * m * disp_v, J s.
    pub uncertainty: f64,
    /// Same, in units of hbar.
    pub uncertainty_hbar: f64,
    /// (m/(2 pi hbar)) times the field integral; 1 for a fully transmitted
    /// unit-norm state.
    pub transmission: f64,
    /// The bare field integral, without the phase-space measure.
    pub transmission_raw: f64,
    pub n_modes: usize,
    /// Estimated fraction of the full distribution inside the grid,
    /// all four edges counted.
    pub grid_mass_fraction: f64,
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let half = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

struct FieldIntegrals {
    total: f64,
    marginal_x: Vec<f64>,
    marginal_v: Vec<f64>,
    wx: Vec<f64>,
    wv: Vec<f64>,
}

fn field_integrals(field: &HusimiField) -> FieldIntegrals {
    let wx = trapezoid_weights(&field.x_grid);
    let wv = trapezoid_weights(&field.v_grid);
    let (nx, nv) = (field.nx(), field.nv());
    let mut marginal_x = vec![0.0; nx];
    let mut marginal_v = vec![0.0; nv];
    for ix in 0..nx {
        for iv in 0..nv {
            let h = field.value(ix, iv);
            marginal_x[ix] += wv[iv] * h;
            marginal_v[iv] += wx[ix] * h;
        }
    }
    let total = marginal_x.iter().zip(&wx).map(|(m, w)| m * w).sum();
    FieldIntegrals {
        total,
        marginal_x,
        marginal_v,
        wx,
        wv,
    }
}

// Geometric extrapolation of the mass beyond one edge, from the outermost
// two marginal densities. `available` caps the extrapolation range (finite
// for the lower x edge, which ends at the barrier).
fn edge_tail(f0: f64, f1: f64, step: f64, available: f64) -> f64 {
    if f0 <= 0.0 || f1 <= 0.0 {
        return 0.0;
    }
    let ratio = f0 / f1;
    if ratio >= 1.0 {
        // not decaying: the grid cuts through the distribution; report the
        // whole available range at the edge density
        return f0 * available;
    }
    let steps_available = (available / step).min(1e6);
    f0 * step * ratio * (1.0 - ratio.powf(steps_available)) / (1.0 - ratio)
}

struct TruncationAudit {
    // (edge name, estimated outside mass, enlargeable)
    edges: [(&'static str, f64, bool); 4],
}

fn truncation_audit(field: &HusimiField, ints: &FieldIntegrals) -> TruncationAudit {
    let nx = field.nx();
    let nv = field.nv();
    let dx = field.x_grid[1] - field.x_grid[0];
    let dv = field.v_grid[1] - field.v_grid[0];
    let x_min = field.x_grid[0];
    let sigma = field.meta.spec.sigma();
    let x_low_enlargeable = x_min > PHYSICAL_EDGE_SIGMA * sigma;
    TruncationAudit {
        edges: [
            (
                "x_min",
                edge_tail(ints.marginal_x[0], ints.marginal_x[1], dx, x_min),
                x_low_enlargeable,
            ),
            (
                "x_max",
                edge_tail(
                    ints.marginal_x[nx - 1],
                    ints.marginal_x[nx - 2],
                    dx,
                    f64::INFINITY,
                ),
                true,
            ),
            (
                "v_min",
                edge_tail(ints.marginal_v[0], ints.marginal_v[1], dv, f64::INFINITY),
                true,
            ),
            (
                "v_max",
                edge_tail(
                    ints.marginal_v[nv - 1],
                    ints.marginal_v[nv - 2],
                    dv,
                    f64::INFINITY,
                ),
                true,
            ),
        ],
    }
}

/// Estimated fraction of the distribution inside the grid (all edges).
pub fn grid_mass_fraction(field: &HusimiField) -> f64 {
    let ints = field_integrals(field);
    if ints.total <= 0.0 {
        return 1.0;
    }
    let audit = truncation_audit(field, &ints);
    let outside: f64 = audit.edges.iter().map(|&(_, mass, _)| mass).sum();
    ints.total / (ints.total + outside)
}

// Audit the enlargeable edges; errors naming the worst edge when they hold
// back more than 0.1% of the estimated mass.
fn enforce_mass_capture(field: &HusimiField, ints: &FieldIntegrals) -> Result<()> {
    let audit = truncation_audit(field, ints);
    let outside_enlargeable: f64 = audit
        .edges
        .iter()
        .filter(|&&(_, _, enlargeable)| enlargeable)
        .map(|&(_, mass, _)| mass)
        .sum();
    let fraction = ints.total / (ints.total + outside_enlargeable);
    if fraction < MASS_FRACTION_FLOOR {
        let worst = audit
            .edges
            .iter()
            .filter(|&&(_, _, enlargeable)| enlargeable)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("edge list is never empty");
        return Err(Error::GridTruncation {
            edge: worst.0,
            detail: format!("captured mass fraction {fraction:.6} < {MASS_FRACTION_FLOOR}"),
        });
    }
    Ok(())
}

/// Trapezoid moments of the self-normalized field.
///
/// Errors on a zero-mass field, and when the enlargeable edges hold back
/// more than 0.1% of the estimated mass.
pub fn moments(field: &HusimiField) -> Result<Moments> {
    let ints = field_integrals(field);
    if ints.total <= 0.0 {
        return Err(Error::ZeroMassField);
    }
    enforce_mass_capture(field, &ints)?;
    let mut sx = 0.0;
    let mut sxx = 0.0;
    for (ix, &x) in field.x_grid.iter().enumerate() {
        let m = ints.wx[ix] * ints.marginal_x[ix];
        sx += x * m;
        sxx += x * x * m;
    }
    let mut sv = 0.0;
    let mut svv = 0.0;
    for (iv, &v) in field.v_grid.iter().enumerate() {
        let m = ints.wv[iv] * ints.marginal_v[iv];
        sv += v * m;
        svv += v * v * m;
    }
    let mean_x = sx / ints.total;
    let mean_v = sv / ints.total;
    Ok(Moments {
        mean_x,
        mean_v,
        disp_x: (sxx / ints.total - mean_x * mean_x).max(0.0).sqrt(),
        disp_v: (svv / ints.total - mean_v * mean_v).max(0.0).sqrt(),
    })
}

/// disp_x * m * disp_v, J s.
pub fn phase_space_uncertainty(field: &HusimiField) -> Result<f64> {
    let m = moments(field)?;
    Ok(m.disp_x * field.meta.spec.mass() * m.disp_v)
}

/// (m/(2 pi hbar)) times the field integral: the phase-space measure
/// normalizes a fully transmitted unit-norm state to probability 1
/// (coherent-state completeness). Aborts when the enlargeable edges
/// truncate the distribution.
pub fn transmission_probability(field: &HusimiField) -> Result<f64> {
    let ints = field_integrals(field);
    if ints.total > 0.0 {
        enforce_mass_capture(field, &ints)?;
    }
    Ok(field.meta.spec.mass() / (2.0 * std::f64::consts::PI * HBAR) * ints.total)
}

/// Valley-to-peak ratio above which two local maxima count as one mode: a
/// stretched single blob keeps a high saddle between its shallow humps long
/// before it actually splits into non-overlapping parts.
const MODE_PROMINENCE: f64 = 0.5;

/// Number of distinct modes above `rel_threshold` of the global maximum.
/// 8-neighborhood maxima merge when closer than 2 grid cells or when the
/// valley on the segment between them stays above half the lower peak;
/// ties on a plateau survive detection and collapse in the merge.
pub fn modality(field: &HusimiField, rel_threshold: f64) -> usize {
    let max = field.max_value();
    if max <= 0.0 {
        return 0;
    }
    let (nx, nv) = (field.nx(), field.nv());
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for ix in 0..nx {
        for iv in 0..nv {
            let h = field.value(ix, iv);
            if h < rel_threshold * max {
                continue;
            }
            let mut is_peak = true;
            'scan: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = ix as i64 + di;
                    let nj = iv as i64 + dj;
                    if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= nv as i64 {
                        continue;
                    }
                    if field.value(ni as usize, nj as usize) > h {
                        is_peak = false;
                        break 'scan;
                    }
                }
            }
            if is_peak {
                candidates.push((h, ix, iv));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut kept: Vec<(f64, usize, usize)> = Vec::new();
    for &(h, ix, iv) in &candidates {
        let merged = kept.iter().any(|&(_, kx, kv)| {
            let adjacent = (ix as i64 - kx as i64).abs() <= 2 && (iv as i64 - kv as i64).abs() <= 2;
            adjacent || segment_valley(field, (ix, iv), (kx, kv)) >= MODE_PROMINENCE * h
        });
        if !merged {
            kept.push((h, ix, iv));
        }
    }
    kept.len()
}

// Minimum field value sampled along the grid segment between two cells.
fn segment_valley(field: &HusimiField, a: (usize, usize), b: (usize, usize)) -> f64 {
    let steps = (a.0 as i64 - b.0 as i64)
        .abs()
        .max((a.1 as i64 - b.1 as i64).abs())
        .max(1) as usize;
    let mut valley = f64::INFINITY;
    for k in 0..=steps {
        let f = k as f64 / steps as f64;
        let ix = (a.0 as f64 + f * (b.0 as f64 - a.0 as f64)).round() as usize;
        let iv = (a.1 as f64 + f * (b.1 as f64 - a.1 as f64)).round() as usize;
        valley = valley.min(field.value(ix, iv));
    }
    valley
}

/// Location of the global maximum, refined to sub-cell accuracy by a
/// three-point parabola along each axis (no refinement on grid borders).
pub fn refined_peak(field: &HusimiField) -> PhaseSpacePoint {
    let (ix, iv) = field.argmax();
    let x = field.x_grid[ix] + parabolic_offset(field, ix, iv, true);
    let v = field.v_grid[iv] + parabolic_offset(field, ix, iv, false);
    PhaseSpacePoint { x, v }
}

fn parabolic_offset(field: &HusimiField, ix: usize, iv: usize, along_x: bool) -> f64 {
    let (n, i) = if along_x {
        (field.nx(), ix)
    } else {
        (field.nv(), iv)
    };
    if i == 0 || i == n - 1 {
        return 0.0;
    }
    let (prev, here, next) = if along_x {
        (
            field.value(ix - 1, iv),
            field.value(ix, iv),
            field.value(ix + 1, iv),
        )
    } else {
        (
            field.value(ix, iv - 1),
            field.value(ix, iv),
            field.value(ix, iv + 1),
        )
    };
    let denom = prev - 2.0 * here + next;
    if denom >= 0.0 {
        return 0.0;
    }
    let delta = 0.5 * (prev - next) / denom;
    let step = if along_x {
        field.x_grid[ix + 1] - field.x_grid[ix]
    } else {
        field.v_grid[iv + 1] - field.v_grid[iv]
    };
    delta.clamp(-0.5, 0.5) * step
}

/// Assembles the full report for one field.
pub fn observable_report(field: &HusimiField) -> Result<ObservableReport> {
    let m = moments(field)?;
    let uncertainty = m.disp_x * field.meta.spec.mass() * m.disp_v;
    let transmission = transmission_probability(field)?;
    let raw = transmission * 2.0 * std::f64::consts::PI * HBAR / field.meta.spec.mass();
    Ok(ObservableReport {
        peak: refined_peak(field),
        mean_x: m.mean_x,
        mean_v: m.mean_v,
        disp_x: m.disp_x,
        disp_v: m.disp_v,
        uncertainty,
        uncertainty_hbar: uncertainty / HBAR,
        transmission,
        transmission_raw: raw,
        n_modes: modality(field, MODALITY_THRESHOLD),
        grid_mass_fraction: grid_mass_fraction(field),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aperture::ApertureProtocol;
    use crate::phys::WavePacketSpec;
    use crate::quadrature::QuadratureConfig;
    use crate::transmission::{FieldKind, FieldMeta, GridSpec, HusimiField};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rb87() -> WavePacketSpec {
        WavePacketSpec::new(86.909, 30e-6, -0.15e-3, 3e-3, 0.1e-3).unwrap()
    }

    fn synthetic_field(
        nx: usize,
        nv: usize,
        f: impl Fn(f64, f64) -> f64,
        x_range: (f64, f64),
        v_range: (f64, f64),
    ) -> HusimiField {
        let spec = rb87();
        let grid = GridSpec {
            x_min: x_range.0,
            x_max: x_range.1,
            nx,
            v_min: v_range.0,
            v_max: v_range.1,
            nv,
        };
        let x_grid = grid.x_values();
        let v_grid = grid.v_values();
        let mut values = Vec::with_capacity(nx * nv);
        for &x in &x_grid {
            for &v in &v_grid {
                values.push(f(x, v));
            }
        }
        HusimiField {
            x_grid,
            v_grid,
            values,
            kind: FieldKind::Pure,
            meta: FieldMeta {
                spec,
                protocol: ApertureProtocol::Free,
                t: 0.1,
                cfg: QuadratureConfig::default(),
                grid,
            },
        }
    }

    fn gaussian_field(mx: f64, mv: f64, sx: f64, sv: f64, amp: f64) -> HusimiField {
        synthetic_field(
            201,
            201,
            |x, v| amp * (-0.5 * ((x - mx) / sx).powi(2) - 0.5 * ((v - mv) / sv).powi(2)).exp(),
            (mx - 8.0 * sx, mx + 8.0 * sx),
            (mv - 8.0 * sv, mv + 8.0 * sv),
        )
    }

    #[test]
    fn moments_recover_a_synthetic_gaussian() {
        let (mx, mv, sx, sv) = (1.6e-4, 3.05e-3, 2.9e-5, 7.3e-5);
        let field = gaussian_field(mx, mv, sx, sv, 0.87);
        let m = moments(&field).unwrap();
        assert_relative_eq!(m.mean_x, mx, max_relative = 1e-6);
        assert_relative_eq!(m.mean_v, mv, max_relative = 1e-6);
        assert_relative_eq!(m.disp_x, sx, max_relative = 1e-6);
        assert_relative_eq!(m.disp_v, sv, max_relative = 1e-6);
        // scaling the field leaves the self-normalized moments untouched
        let mut scaled = field.clone();
        for v in &mut scaled.values {
            *v *= 37.0;
        }
        let ms = moments(&scaled).unwrap();
        assert_relative_eq!(ms.disp_x, m.disp_x, max_relative = 1e-13);
        assert_relative_eq!(ms.mean_v, m.mean_v, max_relative = 1e-13);
    }

    #[test]
    fn uncertainty_and_transmission_of_a_normalized_gaussian() {
        let spec = rb87();
        let (sx, sv) = (3.0e-5, 7.5e-5);
        // amplitude chosen so (m/(2 pi hbar)) * 2 pi sx sv amp = 0.7
        let amp = 0.7 * HBAR / (spec.mass() * sx * sv);
        let field = gaussian_field(1.7e-4, 3e-3, sx, sv, amp);
        let t = transmission_probability(&field).unwrap();
        assert_relative_eq!(t, 0.7, max_relative = 1e-4);
        let u = phase_space_uncertainty(&field).unwrap();
        assert_relative_eq!(u, spec.mass() * sx * sv, max_relative = 1e-5);
        let report = observable_report(&field).unwrap();
        assert_relative_eq!(report.uncertainty_hbar, u / HBAR, max_relative = 1e-12);
        assert_relative_eq!(
            report.transmission_raw,
            t * 2.0 * std::f64::consts::PI * HBAR / spec.mass(),
            max_relative = 1e-12
        );
        assert!(report.grid_mass_fraction > 0.9999);
        assert_eq!(report.n_modes, 1);
    }

    #[test]
    fn zero_field_is_rejected_for_moments_but_transmits_nothing() {
        let field = synthetic_field(21, 21, |_, _| 0.0, (1e-4, 2e-4), (2.8e-3, 3.2e-3));
        assert!(matches!(moments(&field), Err(Error::ZeroMassField)));
        assert_eq!(transmission_probability(&field).unwrap(), 0.0);
        assert_eq!(modality(&field, 0.1), 0);
        assert_eq!(grid_mass_fraction(&field), 1.0);
    }

    #[test]
    fn truncated_field_aborts_with_an_enlargement_hint() {
        // Gaussian centered on the upper x edge: x_max is enlargeable and
        // carries half the distribution
        let field = synthetic_field(
            81,
            81,
            |x, v| (-0.5 * ((x - 4.0e-4) / 3e-5).powi(2) - 0.5 * ((v - 3e-3) / 5e-5).powi(2)).exp(),
            (1.0e-4, 4.0e-4),
            (2.7e-3, 3.3e-3),
        );
        match moments(&field) {
            Err(Error::GridTruncation { edge, .. }) => assert_eq!(edge, "x_max"),
            other => panic!("expected truncation abort, got {other:?}"),
        }
        assert!(matches!(
            transmission_probability(&field),
            Err(Error::GridTruncation { .. })
        ));
        assert!(grid_mass_fraction(&field) < 0.99);
    }

    #[test]
    fn physical_lower_edge_does_not_abort() {
        // same Gaussian but pressed against the barrier-side edge, with the
        // grid already starting below one packet width (30 um here)
        let field = synthetic_field(
            81,
            81,
            |x, v| (-0.5 * ((x - 3.0e-5) / 4e-5).powi(2) - 0.5 * ((v - 3e-3) / 5e-5).powi(2)).exp(),
            (1.5e-5, 4.0e-4),
            (2.7e-3, 3.3e-3),
        );
        // x_min = 15 um <= sigma: the edge is physical, so neither audit
        // aborts on it even though it carries weight
        assert!(moments(&field).is_ok());
        assert!(transmission_probability(&field).is_ok());
        // but the reported full-estimate mass fraction still reflects it
        assert!(grid_mass_fraction(&field) < 0.9999);
    }

    #[test]
    fn modality_counts_well_separated_lobes() {
        let two_lobes = |x: f64, v: f64| {
            let a =
                (-0.5 * ((x - 1.0e-4) / 1.5e-5).powi(2) - 0.5 * ((v - 3e-3) / 4e-5).powi(2)).exp();
            let b = (-0.5 * ((x - 2.4e-4) / 1.5e-5).powi(2) - 0.5 * ((v - 3.05e-3) / 4e-5).powi(2))
                .exp();
            a + 0.8 * b
        };
        let field = synthetic_field(121, 81, two_lobes, (2e-5, 3.4e-4), (2.6e-3, 3.4e-3));
        assert_eq!(modality(&field, 0.1), 2);
        // raising the threshold above the weaker lobe leaves one mode
        assert_eq!(modality(&field, 0.9), 1);
        // rescaling changes nothing
        let mut scaled = field.clone();
        for v in &mut scaled.values {
            *v *= 1e-7;
        }
        assert_eq!(modality(&scaled, 0.1), 2);
    }

    #[test]
    fn peak_refinement_beats_a_tenth_of_a_cell() {
        // true peak deliberately placed between grid lines
        let (mx, mv) = (1.6137e-4, 3.0212e-3);
        let field = synthetic_field(
            101,
            101,
            |x, v| (-0.5 * ((x - mx) / 2.5e-5).powi(2) - 0.5 * ((v - mv) / 6e-5).powi(2)).exp(),
            (4e-5, 3e-4),
            (2.6e-3, 3.4e-3),
        );
        let peak = refined_peak(&field);
        let dx = field.x_grid[1] - field.x_grid[0];
        let dv = field.v_grid[1] - field.v_grid[0];
        assert!(
            (peak.x - mx).abs() < 0.1 * dx,
            "x off by {:.3} cells",
            (peak.x - mx).abs() / dx
        );
        assert!(
            (peak.v - mv).abs() < 0.1 * dv,
            "v off by {:.3} cells",
            (peak.v - mv).abs() / dv
        );
    }

    #[test]
    fn uncertainty_respects_the_heisenberg_floor() {
        // tightest admissible synthetic field at the coherent-state scale:
        // sx sv m = hbar exactly
        let spec = rb87();
        let sx = spec.sigma();
        let sv = HBAR / (spec.mass() * sx);
        let field = gaussian_field(1.6e-4, 3e-3, sx, sv, 1.0);
        let u = phase_space_uncertainty(&field).unwrap();
        assert!(u >= HBAR * (1.0 - 1e-6));
        assert_abs_diff_eq!(u / HBAR, 1.0, epsilon = 1e-4);
    }
}
