//! Scalar fields over the masked grid: construction, quadrature, and the
//! distance-weighted double integral behind the energy diagnostic.
//!
//! A field stores one value per interior cell in the grid's cell order plus
//! the grid's structural id; every operation that combines fields checks the
//! ids so that values can never be mixed across incompatible grids.

use crate::error::ModelError;
use crate::grid::Grid;
use serde::{Deserialize, Serialize};

/// One Gaussian bump of a mixture: `a · exp(-|x - c|²/w²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    /// Bump center (need not lie inside the disk).
    pub center: [f64; 2],
    /// Peak amplitude `a ≥ 0`.
    pub amplitude: f64,
    /// Width `w > 0` (the `1/e` radius).
    pub width: f64,
}

/// A scalar density sampled at cell centers, in grid cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid_id: u64,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap a raw value buffer; the length must match the grid.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != grid.cell_count() {
            return Err(ModelError::FieldLengthMismatch {
                expected: grid.cell_count(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid_id: grid.id(),
            values,
        })
    }

    /// Cell values in grid order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at interior cell `k`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Structural id of the grid this field was built for.
    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    /// Check that this field belongs to `grid`.
    pub fn check_grid(&self, grid: &Grid) -> Result<(), ModelError> {
        if self.grid_id != grid.id() || self.values.len() != grid.cell_count() {
            return Err(ModelError::GridMismatch {
                left: self.grid_id,
                right: grid.id(),
            });
        }
        Ok(())
    }

    /// Check that two fields belong to the same grid.
    pub fn check_same_grid(&self, other: &Self) -> Result<(), ModelError> {
        if self.grid_id != other.grid_id || self.values.len() != other.values.len() {
            return Err(ModelError::GridMismatch {
                left: self.grid_id,
                right: other.grid_id,
            });
        }
        Ok(())
    }

    /// Build a field carrying another field's grid identity — for cellwise
    /// transforms on hot paths that hold no `&Grid`.
    pub(crate) fn like(other: &ScalarField, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), other.values.len());
        Self {
            grid_id: other.grid_id,
            values,
        }
    }

    /// Error unless every value is non-negative (NaN counts as a violation).
    /// `what` names the quantity for the error message.
    pub fn check_non_negative(&self, what: &'static str) -> Result<(), ModelError> {
        for (cell, &value) in self.values.iter().enumerate() {
            // Negated form on purpose: NaN must count as a violation.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(value >= 0.0) {
                return Err(ModelError::NegativeValue { what, cell, value });
            }
        }
        Ok(())
    }
}

/// The constant field `f ≡ c`.
pub fn constant_field(grid: &Grid, c: f64) -> Result<ScalarField, ModelError> {
    if !c.is_finite() {
        return Err(ModelError::InvalidParameter(format!(
            "constant field value must be finite (got {c})"
        )));
    }
    Ok(ScalarField {
        grid_id: grid.id(),
        values: vec![c; grid.cell_count()],
    })
}

/// A sum of Gaussian bumps evaluated at the cell centers; non-negative
/// everywhere, strictly positive wherever any amplitude is positive.
pub fn gaussian_mixture(grid: &Grid, bumps: &[GaussianBump]) -> Result<ScalarField, ModelError> {
    for b in bumps {
        if !b.width.is_finite() || b.width <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "gaussian bump width must be > 0 (got {})",
                b.width
            )));
        }
        if !b.amplitude.is_finite() || b.amplitude < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "gaussian bump amplitude must be >= 0 (got {})",
                b.amplitude
            )));
        }
        if !(b.center[0].is_finite() && b.center[1].is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "gaussian bump center must be finite (got [{}, {}])",
                b.center[0], b.center[1]
            )));
        }
    }
    let values = grid
        .cells()
        .iter()
        .map(|cell| {
            let mut v = 0.0;
            for b in bumps {
                let dx = cell.x - b.center[0];
                let dy = cell.y - b.center[1];
                v += b.amplitude * (-(dx * dx + dy * dy) / (b.width * b.width)).exp();
            }
            v
        })
        .collect();
    Ok(ScalarField {
        grid_id: grid.id(),
        values,
    })
}

/// Neumaier-compensated sum: permutation-stable to well below 1e-15 relative
/// and deterministic for a fixed iteration order.
pub(crate) fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Midpoint-rule integral `Σ_cells f · h²`, with compensated summation.
pub fn integrate(grid: &Grid, f: &ScalarField) -> Result<f64, ModelError> {
    f.check_grid(grid)?;
    Ok(neumaier_sum(f.values.iter().copied()) * grid.h() * grid.h())
}

/// The distance-weighted double integral
/// `Σ_x Σ_y |x_center − y_center| · f(x) · g(y) · h⁴`,
/// evaluated exactly in O(N²) over cell pairs.
///
/// The sum runs over unordered pairs, each contributing
/// `d · (f_p·g_q + g_p·f_q)`: because IEEE addition and multiplication are
/// commutative, swapping `f` and `g` reproduces the result bit-for-bit, and
/// the diagonal (`d = 0`) drops out exactly. Pairs where both products vanish
/// are skipped before the square root — for the energy diagnostic the two
/// integrands have disjoint supports, which halves the kernel evaluations.
/// Row partials accumulate in fixed cell order into a compensated sum, so the
/// result is deterministic (and the chunk structure is ready for a parallel
/// ordered reduction should one ever be needed).
pub fn distance_weighted_double_integral(
    grid: &Grid,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<f64, ModelError> {
    f.check_grid(grid)?;
    g.check_grid(grid)?;
    f.check_non_negative("distance-weighted integrand")?;
    g.check_non_negative("distance-weighted integrand")?;

    let cells = grid.cells();
    let fv = f.values();
    let gv = g.values();
    let n = cells.len();

    let mut sum = 0.0;
    let mut comp = 0.0;
    for p in 0..n {
        let (fp, gp) = (fv[p], gv[p]);
        if fp == 0.0 && gp == 0.0 {
            continue; // the whole row contributes exactly zero
        }
        let (xp, yp) = (cells[p].x, cells[p].y);
        let mut row = 0.0;
        for q in (p + 1)..n {
            let a = fp * gv[q];
            let b = gp * fv[q];
            if a != 0.0 || b != 0.0 {
                let dx = xp - cells[q].x;
                let dy = yp - cells[q].y;
                row += (dx * dx + dy * dy).sqrt() * (a + b);
            }
        }
        // Neumaier step over the row partial.
        let t = sum + row;
        if sum.abs() >= row.abs() {
            comp += (sum - t) + row;
        } else {
            comp += (row - t) + sum;
        }
        sum = t;
    }
    let h2 = grid.h() * grid.h();
    Ok((sum + comp) * (h2 * h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_disk_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Grid, rng: &mut ChaCha8Rng, sparsity: f64) -> ScalarField {
        let values = (0..grid.cell_count())
            .map(|_| {
                if rng.random::<f64>() < sparsity {
                    rng.random::<f64>() * 3.0
                } else {
                    0.0
                }
            })
            .collect();
        ScalarField::from_values(grid, values).unwrap()
    }

    #[test]
    fn constant_field_holds_its_value_everywhere() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let f = constant_field(&g, 1.0).unwrap();
        assert_eq!(f.values().len(), g.cell_count());
        assert!(f.values().iter().all(|&v| v == 1.0));
        assert!(constant_field(&g, f64::INFINITY).is_err());
    }

    #[test]
    fn integrating_a_constant_approximates_the_disk_area() {
        let g = build_disk_grid(1.0, 64).unwrap();
        let two = constant_field(&g, 2.0).unwrap();
        let expected = 2.0 * std::f64::consts::PI;
        let got = integrate(&g, &two).unwrap();
        assert!((got - expected).abs() / expected < 0.05, "got {got}");
        let zero = constant_field(&g, 0.0).unwrap();
        assert_eq!(integrate(&g, &zero).unwrap(), 0.0);
    }

    #[test]
    fn single_cell_indicator_integrates_to_value_times_cell_area() {
        let g = build_disk_grid(1.0, 8).unwrap();
        let mut values = vec![0.0; g.cell_count()];
        values[5] = 0.375;
        let f = ScalarField::from_values(&g, values).unwrap();
        let expected = 0.375 * g.h() * g.h();
        assert_eq!(integrate(&g, &f).unwrap(), expected);
    }

    #[test]
    fn gaussian_bump_on_a_cell_center_peaks_at_exactly_its_amplitude() {
        let g = build_disk_grid(1.0, 4).unwrap();
        // (0.25, 0.25) is the center of lattice cell (2, 2).
        let f = gaussian_mixture(
            &g,
            &[GaussianBump {
                center: [0.25, 0.25],
                amplitude: 1.0,
                width: 0.2,
            }],
        )
        .unwrap();
        let k = g.cell_at(2, 2).unwrap();
        assert_eq!(f.get(k), 1.0);
        assert!(f.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn empty_mixture_is_the_zero_field() {
        let g = build_disk_grid(1.0, 8).unwrap();
        let f = gaussian_mixture(&g, &[]).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicated_bump_doubles_the_field_bit_exactly() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let bump = GaussianBump {
            center: [0.1, -0.3],
            amplitude: 0.7,
            width: 0.25,
        };
        let single = gaussian_mixture(&g, &[bump]).unwrap();
        let double = gaussian_mixture(&g, &[bump, bump]).unwrap();
        for (s, d) in single.values().iter().zip(double.values()) {
            assert_eq!(d.to_bits(), (2.0 * s).to_bits());
        }
    }

    #[test]
    fn malformed_bumps_are_rejected() {
        let g = build_disk_grid(1.0, 8).unwrap();
        let bad_width = GaussianBump {
            center: [0.0, 0.0],
            amplitude: 1.0,
            width: 0.0,
        };
        assert!(matches!(
            gaussian_mixture(&g, &[bad_width]),
            Err(ModelError::InvalidParameter(msg)) if msg.contains("width")
        ));
        let bad_amplitude = GaussianBump {
            center: [0.0, 0.0],
            amplitude: -1.0,
            width: 0.2,
        };
        assert!(gaussian_mixture(&g, &[bad_amplitude]).is_err());
    }

    #[test]
    fn integrate_is_linear_to_machine_precision() {
        let g = build_disk_grid(1.0, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_field(&g, &mut rng, 1.0);
        let gfield = random_field(&g, &mut rng, 1.0);
        let (a, b) = (1.75, -0.4);
        let combo = ScalarField::from_values(
            &g,
            f.values()
                .iter()
                .zip(gfield.values())
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        let lhs = integrate(&g, &combo).unwrap();
        let rhs = a * integrate(&g, &f).unwrap() + b * integrate(&g, &gfield).unwrap();
        assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn double_integral_annihilates_on_a_zero_factor() {
        let g = build_disk_grid(1.0, 8).unwrap();
        let zero = constant_field(&g, 0.0).unwrap();
        let one = constant_field(&g, 1.0).unwrap();
        assert_eq!(distance_weighted_double_integral(&g, &zero, &one).unwrap(), 0.0);
        assert_eq!(distance_weighted_double_integral(&g, &one, &zero).unwrap(), 0.0);
    }

    #[test]
    fn double_integral_of_a_single_pair_is_the_closed_form() {
        let g = build_disk_grid(1.0, 8).unwrap();
        let (p, q) = (3, 20);
        let (a, b) = (1.5, 0.25);
        let mut fv = vec![0.0; g.cell_count()];
        let mut gv = vec![0.0; g.cell_count()];
        fv[p] = a;
        gv[q] = b;
        let f = ScalarField::from_values(&g, fv).unwrap();
        let gf = ScalarField::from_values(&g, gv).unwrap();
        let (cp, cq) = (g.cells()[p], g.cells()[q]);
        let d = ((cp.x - cq.x).powi(2) + (cp.y - cq.y).powi(2)).sqrt();
        let h2 = g.h() * g.h();
        let expected = d * a * b * h2 * h2;
        let got = distance_weighted_double_integral(&g, &f, &gf).unwrap();
        assert!((got - expected).abs() <= 1e-15 * expected, "{got} vs {expected}");
    }

    #[test]
    fn double_integral_is_bitwise_symmetric_in_its_arguments() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let f = random_field(&g, &mut rng, 0.4);
            let gfield = random_field(&g, &mut rng, 0.4);
            let fg = distance_weighted_double_integral(&g, &f, &gfield).unwrap();
            let gf = distance_weighted_double_integral(&g, &gfield, &f).unwrap();
            assert_eq!(fg.to_bits(), gf.to_bits());
        }
    }

    #[test]
    fn double_integral_matches_a_nested_loop_reference() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_field(&g, &mut rng, 0.3);
        let gfield = random_field(&g, &mut rng, 0.3);
        // Straightforward O(N²) reference with an independent distance
        // formula (hypot) and naive accumulation order.
        let mut reference = 0.0;
        for (p, cp) in g.cells().iter().enumerate() {
            for (q, cq) in g.cells().iter().enumerate() {
                reference +=
                    (cp.x - cq.x).hypot(cp.y - cq.y) * f.get(p) * gfield.get(q);
            }
        }
        reference *= (g.h() * g.h()) * (g.h() * g.h());
        let got = distance_weighted_double_integral(&g, &f, &gfield).unwrap();
        assert!(
            (got - reference).abs() <= 1e-12 * reference.abs().max(1e-30),
            "{got} vs {reference}"
        );
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let g1 = build_disk_grid(1.0, 8).unwrap();
        let g2 = build_disk_grid(1.0, 16).unwrap();
        let f1 = constant_field(&g1, 1.0).unwrap();
        let f2 = constant_field(&g2, 1.0).unwrap();
        assert!(matches!(
            integrate(&g2, &f1),
            Err(ModelError::GridMismatch { .. })
        ));
        assert!(distance_weighted_double_integral(&g1, &f1, &f2).is_err());
    }

    #[test]
    fn negative_integrands_are_rejected() {
        let g = build_disk_grid(1.0, 8).unwrap();
        let mut values = vec![0.0; g.cell_count()];
        values[2] = -1.0;
        let f = ScalarField::from_values(&g, values).unwrap();
        let one = constant_field(&g, 1.0).unwrap();
        assert!(matches!(
            distance_weighted_double_integral(&g, &f, &one),
            Err(ModelError::NegativeValue { cell: 2, .. })
        ));
    }
}
