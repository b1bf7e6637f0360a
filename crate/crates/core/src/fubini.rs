//! Smooth functions whose iterated integrals depend on the integration order.
//!
//! A unit-mass bump is placed on every lattice point `j` carrying a
//! coefficient `b(j)`. Supports are disjoint, so an iterated integral over a
//! box is the iterated sum of the enclosed coefficients in the same order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::builder::{Assignment, Permutation};
use crate::par::{self, Execution};
use crate::quad::{integrate, integrate_nested, QuadratureFailure};
use crate::sum::nested_sorted;

/// Support radius of the bump.
pub const BUMP_RADIUS: f64 = 0.49;

/// Per-peak quadrature is skipped on boxes with more peaks than this.
pub const DEFAULT_MAX_QUADRATURE_PEAKS: usize = 2000;

/// `A exp(-1 / (0.49 - |x|)^2)` inside the ball of radius 0.49, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFunction {
    pub n: usize,
    pub amplitude: f64,
}

fn profile(r: f64) -> f64 {
    if r >= BUMP_RADIUS {
        0.0
    } else {
        let gap = BUMP_RADIUS - r;
        (-1.0 / (gap * gap)).exp()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl BumpFunction {
    pub fn new(n: usize, amplitude: f64) -> Self {
        assert!(n >= 1 && amplitude > 0.0);
        Self { n, amplitude }
    }

    /// Amplitude chosen so that the bump integrates to one.
    pub fn normalized(n: usize, quad_tol: f64) -> Result<Self, QuadratureFailure> {
        Ok(Self::new(n, normalize_amplitude(n, quad_tol)?))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        self.amplitude * profile(norm(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 || r >= BUMP_RADIUS {
            return vec![0.0; x.len()];
        }
        let gap = BUMP_RADIUS - r;
        let radial = self.value(x) * (-2.0 / (gap * gap * gap));
        x.iter().map(|xi| radial * xi / r).collect()
    }
}

pub fn phi(bump: &BumpFunction, x: &[f64]) -> f64 {
    bump.value(x)
}

/// Surface area of the unit sphere in `ℝ^n`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => panic!("dimension must be positive"),
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// `∫ exp(-1/(0.49 - |x|)^2) dx` over the ball, by radial quadrature.
pub fn unnormalized_mass(n: usize, quad_tol: f64) -> Result<f64, QuadratureFailure> {
    assert!(quad_tol > 0.0, "quad_tol must be positive");
    let radial = integrate(|r| profile(r) * r.powi(n as i32 - 1), 0.0, BUMP_RADIUS, 0.0, 0.1 * quad_tol)?;
    Ok(sphere_area(n) * radial.value)
}

/// The amplitude `A` with `∫ φ = 1`.
pub fn normalize_amplitude(n: usize, quad_tol: f64) -> Result<f64, QuadratureFailure> {
    Ok(1.0 / unnormalized_mass(n, quad_tol)?)
}

/// Where the peaks sit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Peak `j` at the integer point `j`.
    #[default]
    Lattice,
    /// Peak `j` at `(2^-j_1, ..., 2^-j_n)` with shrunken support.
    UnitCube,
}

/// `f(x) = Σ_j b(j) φ_j(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FubiniField {
    pub n: usize,
    pub bump: BumpFunction,
    pub layout: Layout,
    pub coefficients: HashMap<Vec<u32>, f64>,
}

impl FubiniField {
    pub fn new(bump: BumpFunction, layout: Layout, coefficients: HashMap<Vec<u32>, f64>) -> Self {
        assert!(coefficients.keys().all(|j| j.len() == bump.n && j.iter().all(|&c| c >= 1)));
        Self {
            n: bump.n,
            bump,
            layout,
            coefficients,
        }
    }

    pub fn from_assignment(assignment: &Assignment, bump: BumpFunction, layout: Layout) -> Self {
        assert_eq!(assignment.n, bump.n);
        let coefficients = assignment.entries().into_iter().map(|e| (e.index, e.value)).collect();
        Self::new(bump, layout, coefficients)
    }

    pub fn peak_center(&self, j: &[u32]) -> Vec<f64> {
        match self.layout {
            Layout::Lattice => j.iter().map(|&c| c as f64).collect(),
            Layout::UnitCube => j.iter().map(|&c| (-(c as f64)).exp2()).collect(),
        }
    }

    /// Support radius of peak `j`.
    pub fn peak_radius(&self, j: &[u32]) -> f64 {
        match self.layout {
            Layout::Lattice => BUMP_RADIUS,
            Layout::UnitCube => {
                let top = j.iter().copied().max().unwrap_or(1);
                BUMP_RADIUS * (-(top as f64) - 1.0).exp2()
            }
        }
    }

    /// The only peak whose support can contain `x`.
    fn nearest_peak(&self, x: &[f64]) -> Option<Vec<u32>> {
        x.iter()
            .map(|&xi| {
                let c = match self.layout {
                    Layout::Lattice => xi.round(),
                    Layout::UnitCube if xi > 0.0 => (-xi.log2()).round(),
                    Layout::UnitCube => return None,
                };
                (c >= 1.0 && c < u32::MAX as f64).then_some(c as u32)
            })
            .collect()
    }

    /// Peaks whose supports intersect another one.
    pub fn overlapping_supports(&self) -> usize {
        let peaks: Vec<&Vec<u32>> = self.coefficients.keys().collect();
        let mut bad = 0;
        for (i, a) in peaks.iter().enumerate() {
            let (ca, ra) = (self.peak_center(a), self.peak_radius(a));
            for b in &peaks[i + 1..] {
                let (cb, rb) = (self.peak_center(b), self.peak_radius(b));
                let dist = norm(&ca.iter().zip(&cb).map(|(p, q)| p - q).collect::<Vec<_>>());
                if dist < ra + rb {
                    bad += 1;
                }
            }
        }
        bad
    }
}

/// `f(x)`: locate the unique peak whose support may contain `x` and evaluate
/// its rescaled bump.
pub fn f_eval(field: &FubiniField, x: &[f64]) -> f64 {
    let Some(j) = field.nearest_peak(x) else {
        return 0.0;
    };
    let Some(&b) = field.coefficients.get(&j) else {
        return 0.0;
    };
    let center = field.peak_center(&j);
    let scale = BUMP_RADIUS / field.peak_radius(&j);
    let local: Vec<f64> = x.iter().zip(&center).map(|(xi, ci)| (xi - ci) * scale).collect();
    b * scale.powi(field.n as i32) * field.bump.value(&local)
}

/// Per-coordinate limits `j_i <= L_i` on the enclosed peaks; `None` leaves a
/// coordinate unbounded. On the lattice this is the box `∏ [0, L_i + 1/2]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FubiniBox {
    pub limits: Vec<Option<u32>>,
}

impl FubiniBox {
    pub fn new(limits: Vec<Option<u32>>) -> Self {
        Self { limits }
    }

    /// Bounded by `limit` in the outermost integration variable of `sigma`
    /// and unbounded in the others.
    pub fn outer(sigma: &Permutation, limit: u32) -> Self {
        let mut limits = vec![None; sigma.n()];
        limits[sigma.integration_order()[0]] = Some(limit);
        Self { limits }
    }

    pub fn contains(&self, j: &[u32]) -> bool {
        j.iter().zip(&self.limits).all(|(c, l)| l.is_none_or(|l| *c <= l))
    }
}

impl std::fmt::Display for FubiniBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .limits
            .iter()
            .map(|l| l.map_or_else(|| "inf".to_string(), |v| v.to_string()))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// The iterated-sum permutation whose summation order matches the
/// integration order of `sigma`.
pub fn summation_permutation(sigma: &Permutation) -> Permutation {
    Permutation::from_summation_order(&sigma.integration_order()).expect("orders are permutations")
}

/// Both evaluations of one iterated integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IteratedIntegral {
    /// Iterated sum of enclosed coefficients.
    pub coefficient_sum: f64,
    /// Peak-by-peak quadrature, absent when the box holds too many peaks.
    pub quadrature: Option<f64>,
    pub peaks: usize,
}

/// `∫ ... ∫ f dx_σ(1) ... dx_σ(n)` over a box, with `x_σ(1)` innermost.
pub fn iterated_integral(
    field: &FubiniField,
    sigma: &Permutation,
    bounds: &FubiniBox,
    quad_tol: f64,
) -> Result<IteratedIntegral, QuadratureFailure> {
    iterated_integral_with(field, sigma, bounds, quad_tol, DEFAULT_MAX_QUADRATURE_PEAKS, Execution::default())
}

pub fn iterated_integral_with(
    field: &FubiniField,
    sigma: &Permutation,
    bounds: &FubiniBox,
    quad_tol: f64,
    max_peaks: usize,
    exec: Execution,
) -> Result<IteratedIntegral, QuadratureFailure> {
    assert_eq!(sigma.n(), field.n);
    let order = sigma.integration_order();
    let mut peaks: Vec<(Vec<u32>, &Vec<u32>, f64)> = field
        .coefficients
        .iter()
        .filter(|(j, _)| bounds.contains(j))
        .map(|(j, &b)| (order.iter().map(|&p| j[p]).collect(), j, b))
        .collect();
    peaks.sort_by(|a, b| a.0.cmp(&b.0));
    let coefficient_sum = nested_sorted(&peaks.iter().map(|(k, _, b)| (k.clone(), *b)).collect::<Vec<_>>());
    let quadrature = if peaks.len() <= max_peaks {
        let masses = par::map(exec, &peaks, |(_, j, _)| peak_integral(field, j, sigma, quad_tol));
        let mut keyed = Vec::with_capacity(peaks.len());
        for ((key, _, _), mass) in peaks.iter().zip(masses) {
            keyed.push((key.clone(), mass?));
        }
        Some(nested_sorted(&keyed))
    } else {
        None
    };
    Ok(IteratedIntegral {
        coefficient_sum,
        quadrature,
        peaks: peaks.len(),
    })
}

/// Iterated integral of `f` over the support of peak `j`, in the order of
/// `sigma`.
pub fn peak_integral(field: &FubiniField, j: &[u32], sigma: &Permutation, quad_tol: f64) -> Result<f64, QuadratureFailure> {
    let b = field.coefficients.get(j).copied().unwrap_or(0.0);
    if b == 0.0 {
        return Ok(0.0);
    }
    let center = field.peak_center(j);
    let r = field.peak_radius(j);
    let lo: Vec<f64> = center.iter().map(|c| c - r).collect();
    let hi: Vec<f64> = center.iter().map(|c| c + r).collect();
    let f = |x: &[f64]| f_eval(field, x);
    Ok(integrate_nested(&f, &lo, &hi, &sigma.integration_order(), quad_tol * b.abs())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
        let h = (b - a) / intervals as f64;
        let mut s = f(a) + f(b);
        for i in 1..intervals {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn phi_values() {
        let bump = BumpFunction::new(2, 1.0);
        assert_eq!(phi(&bump, &[0.6, 0.0]), 0.0);
        assert_eq!(phi(&bump, &[0.49, 0.0]), 0.0);
        assert!((phi(&bump, &[0.0, 0.0]) - 0.015_530_782).abs() < 1e-9);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_normalization_matches_simpson() {
        let oracle = simpson(|x| profile(x.abs()), -BUMP_RADIUS, BUMP_RADIUS, 200_000);
        let a = normalize_amplitude(1, 1e-8).unwrap();
        assert!((a * oracle - 1.0).abs() < 1e-8, "{}", a * oracle);
    }

    #[test]
    fn amplitude_is_stable_under_tolerance_changes() {
        for tol in [1e-4, 1e-6, 1e-8] {
            let a = normalize_amplitude(3, tol).unwrap();
            let b = normalize_amplitude(3, 2.0 * tol).unwrap();
            assert!(a > 0.0);
            assert!((a - b).abs() / a <= 3.0 * tol);
        }
    }

    #[test]
    fn boundary_slopes_vanish() {
        let bump = BumpFunction::new(1, 1.0);
        let mut last = f64::INFINITY;
        for h in [1e-1, 5e-2, 2e-2] {
            let slope = (bump.value(&[BUMP_RADIUS - h]) - bump.value(&[BUMP_RADIUS])) / h;
            assert!(slope.abs() < last);
            last = slope.abs();
        }
        assert!(last < 1e-20);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn gradient_matches_central_differences(r in 0.01f64..0.46, angle in 0.0f64..std::f64::consts::TAU) {
            let bump = BumpFunction::normalized(2, 1e-8).unwrap();
            let x = [r * angle.cos(), r * angle.sin()];
            let g = bump.gradient(&x);
            let h = 1e-6;
            for i in 0..2 {
                let (mut up, mut down) = (x, x);
                up[i] += h;
                down[i] -= h;
                let fd = (bump.value(&up) - bump.value(&down)) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() < 1e-5, "{} vs {}", fd, g[i]);
            }
        }
    }

    fn small_field(layout: Layout) -> FubiniField {
        let bump = BumpFunction::normalized(2, 1e-9).unwrap();
        let coefficients = [(vec![1, 1], 2.0), (vec![1, 2], -0.5), (vec![2, 1], 1.25), (vec![3, 2], -3.0)]
            .into_iter()
            .collect();
        FubiniField::new(bump, layout, coefficients)
    }

    #[test]
    fn evaluation_on_the_lattice() {
        let field = small_field(Layout::Lattice);
        assert_eq!(f_eval(&field, &[1.0, 1.0]), 2.0 * field.bump.value(&[0.0, 0.0]));
        assert_eq!(f_eval(&field, &[1.5, 1.5]), 0.0);
        assert_eq!(f_eval(&field, &[2.0, 2.0]), 0.0);
        assert_eq!(f_eval(&field, &[0.2, 0.1]), 0.0);
        assert_eq!(field.overlapping_supports(), 0);
    }

    #[test]
    fn peaks_integrate_to_their_coefficient() {
        for layout in [Layout::Lattice, Layout::UnitCube] {
            let field = small_field(layout);
            for (j, &b) in &field.coefficients {
                for sigma in Permutation::all(2) {
                    let mass = peak_integral(&field, j, &sigma, 1e-8).unwrap();
                    assert!((mass - b).abs() < 1e-6 * b.abs(), "{layout:?} {j:?}: {mass} vs {b}");
                }
            }
            assert_eq!(field.overlapping_supports(), 0);
        }
    }

    #[test]
    fn unit_cube_peaks_are_isolated() {
        let field = small_field(Layout::UnitCube);
        assert_eq!(f_eval(&field, &[0.5, 0.5]), 2.0 * (0.49f64 / field.peak_radius(&[1, 1])).powi(2) * field.bump.value(&[0.0, 0.0]));
        assert_eq!(f_eval(&field, &[0.375, 0.5]), 0.0);
        assert_eq!(f_eval(&field, &[0.0, 0.5]), 0.0);
    }

    #[test]
    fn box_integrals_reduce_to_coefficient_sums() {
        let field = small_field(Layout::Lattice);
        let id = Permutation::identity(2);
        let all = FubiniBox::new(vec![None, None]);
        let r = iterated_integral(&field, &id, &all, 1e-8).unwrap();
        assert_eq!(r.peaks, 4);
        assert!((r.coefficient_sum - (-0.25)).abs() < 1e-15);
        assert!((r.quadrature.unwrap() - r.coefficient_sum).abs() < 1e-6);
        let corner = FubiniBox::new(vec![Some(2), Some(1)]);
        let r = iterated_integral(&field, &id, &corner, 1e-8).unwrap();
        assert_eq!(r.coefficient_sum, 3.25);
        let r = iterated_integral_with(&field, &id, &all, 1e-8, 3, Execution::Sequential).unwrap();
        assert_eq!(r.quadrature, None);
    }

    #[test]
    fn outer_box_bounds_the_outermost_variable() {
        // dx_1 innermost for σ = id, so x_2 is outermost
        let b = FubiniBox::outer(&Permutation::identity(2), 4);
        assert_eq!(b.limits, vec![None, Some(4)]);
        assert_eq!(b.to_string(), "inf 4");
    }

    #[test]
    fn integration_and_summation_orders_line_up() {
        for sigma in Permutation::all(3) {
            assert_eq!(summation_permutation(&sigma).summation_order(), sigma.integration_order());
        }
        let id = Permutation::identity(2);
        assert_eq!(summation_permutation(&id), "2 1".parse().unwrap());
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let bump = BumpFunction::normalized(2, 1e-6).unwrap();
        let field = FubiniField::new(bump, Layout::Lattice, [(vec![1, 1], 0.0), (vec![2, 3], 0.0)].into_iter().collect());
        for sigma in Permutation::all(2) {
            let r = iterated_integral(&field, &sigma, &FubiniBox::new(vec![None, None]), 1e-6).unwrap();
            assert_eq!((r.coefficient_sum, r.quadrature), (0.0, Some(0.0)));
        }
    }
}
