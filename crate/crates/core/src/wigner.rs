//! Wigner quasi-probability maps via displaced parity.
//!
//! Convention: `W(α) = (2/π) Tr[ρ D(α) Π D(−α)]` with `α = x + ip`, so the
//! vacuum peaks at `2/π` and `∫ W dx dp = Tr ρ`. Since
//! `D(α) Π D(−α) = D(2α) Π`, each grid point needs one displacement, whose
//! Fock matrix elements come from the closed Laguerre form.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{ComplexMatrix, NumericSettings};

/// Largest admissible imaginary part of a grid value, relative to ‖ρ‖_F.
pub const IMAGINARY_LEAKAGE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum WignerError {
    #[error("density matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("density matrix is not Hermitian: ‖ρ − ρ†‖_F = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),
    #[error("Wigner values carry imaginary parts up to {leakage:.3e}")]
    ImaginaryLeakage { leakage: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_points: usize,
    pub p_points: usize,
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self {
            x_points: 121,
            p_points: 121,
            x_range: (-6.0, 6.0),
            p_range: (-6.0, 6.0),
        }
    }
}

impl PhaseSpaceGrid {
    pub fn new(
        x_points: usize,
        p_points: usize,
        x_range: (f64, f64),
        p_range: (f64, f64),
    ) -> Result<Self, WignerError> {
        let grid = Self {
            x_points,
            p_points,
            x_range,
            p_range,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), WignerError> {
        if self.x_points < 2 || self.p_points < 2 {
            return Err(WignerError::InvalidGrid(format!(
                "need at least 2 points per axis, got {}x{}",
                self.x_points, self.p_points
            )));
        }
        for (name, (lo, hi)) in [("x", self.x_range), ("p", self.p_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(WignerError::InvalidGrid(format!(
                    "{name} range [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        axis(self.x_range, self.x_points, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        axis(self.p_range, self.p_points, j)
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.x_points - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_range.1 - self.p_range.0) / (self.p_points - 1) as f64
    }

    /// Smallest distance from the origin to the grid boundary.
    fn inner_radius(&self) -> f64 {
        [
            -self.x_range.0,
            self.x_range.1,
            -self.p_range.0,
            self.p_range.1,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

fn axis(range: (f64, f64), points: usize, i: usize) -> f64 {
    range.0 + (range.1 - range.0) * i as f64 / (points - 1) as f64
}

#[derive(Clone, Debug)]
pub struct WignerMap {
    pub grid: PhaseSpaceGrid,
    /// `values[i * p_points + j]` is `W(x_i, p_j)`.
    pub values: Vec<f64>,
    /// Largest discarded imaginary part.
    pub max_imaginary: f64,
    /// Set when the state's extent in phase space exceeds the grid.
    pub coverage_warning: bool,
}

impl WignerMap {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.p_points + j]
    }

    /// Riemann sum `Σ W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dp()
    }

    /// `(x, p, W)` at the largest value.
    pub fn maximum(&self) -> (f64, f64, f64) {
        self.extremum(|a, b| a > b)
    }

    /// `(x, p, W)` at the smallest value.
    pub fn minimum(&self) -> (f64, f64, f64) {
        self.extremum(|a, b| a < b)
    }

    fn extremum(&self, better: impl Fn(f64, f64) -> bool) -> (f64, f64, f64) {
        let mut best = 0;
        for (k, &w) in self.values.iter().enumerate() {
            if better(w, self.values[best]) {
                best = k;
            }
        }
        let (i, j) = (best / self.grid.p_points, best % self.grid.p_points);
        (self.grid.x(i), self.grid.p(j), self.values[best])
    }

    /// Grid points in output order, `x` outer and `p` inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.grid.x_points).flat_map(move |i| {
            (0..self.grid.p_points).map(move |j| (self.grid.x(i), self.grid.p(j), self.value(i, j)))
        })
    }
}

/// Fock matrix elements `⟨m|D(β)|n⟩` of the untruncated displacement,
/// for `m, n < dim`.
///
/// For `m ≥ n`, `⟨m|D|n⟩ = √(n!/m!) β^{m−n} e^{−|β|²/2} L_n^{(m−n)}(|β|²)`,
/// and above the diagonal `β^{m−n}` becomes `(−β*)^{m−n}`. Magnitudes are assembled in log space so that large `|β|`
/// neither overflows the Laguerre factor nor underflows the Gaussian.
pub fn displacement_elements(dim: usize, beta: Complex64) -> ComplexMatrix {
    let x = beta.norm_sqr();
    let ln_r = beta.norm().ln();
    let theta = beta.arg();
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..dim).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let mut d = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        let lag = laguerre_column(dim - k, k, x);
        for n in 0..dim - k {
            let m = n + k;
            let mut ln_mag = 0.5 * (ln_fact[n] - ln_fact[m]) - 0.5 * x;
            if k > 0 {
                ln_mag += k as f64 * ln_r;
            }
            let mag = ln_mag.exp() * lag[n];
            // β^k below the diagonal, (−β*)^k above it.
            d[(m, n)] = Complex64::from_polar(mag, k as f64 * theta);
            if k > 0 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                d[(n, m)] = Complex64::from_polar(sign * mag, -(k as f64) * theta);
            }
        }
    }
    d
}

/// `L_n^{(k)}(x)` for `n < len` by the forward three-term recurrence.
fn laguerre_column(len: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(len);
    out.push(1.0);
    if len > 1 {
        out.push(1.0 + kf - x);
    }
    for j in 1..len.saturating_sub(1) {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf + kf) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Wigner function of a Hermitian `N×N` operator on `grid`.
pub fn wigner_of(
    rho: &ComplexMatrix,
    grid: &PhaseSpaceGrid,
    settings: &NumericSettings,
) -> Result<WignerMap, WignerError> {
    grid.validate()?;
    if !rho.is_square() {
        return Err(WignerError::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    let norm = rho.frobenius_norm();
    let deviation = rho.hermitian_deviation();
    if deviation > settings.hermitian_tol * norm.max(1.0) {
        return Err(WignerError::NotHermitian { deviation });
    }
    let n = rho.rows();

    let coverage_warning = check_coverage(rho, grid);

    let prefactor = 2.0 / std::f64::consts::PI;
    let mut values = Vec::with_capacity(grid.x_points * grid.p_points);
    let mut max_imaginary: f64 = 0.0;
    for i in 0..grid.x_points {
        for j in 0..grid.p_points {
            let beta = Complex64::new(2.0 * grid.x(i), 2.0 * grid.p(j));
            let d = displacement_elements(n, beta);
            // Tr[ρ D Π] = Σ_{m,k} ρ_{km} D_{mk} (−1)^k
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut col = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    col += rho[(k, m)] * d[(m, k)];
                }
                acc += sign * col;
            }
            let w = prefactor * acc;
            max_imaginary = max_imaginary.max(w.im.abs());
            values.push(w.re);
        }
    }
    if max_imaginary > IMAGINARY_LEAKAGE_TOL * norm.max(1.0) {
        return Err(WignerError::ImaginaryLeakage {
            leakage: max_imaginary,
        });
    }
    Ok(WignerMap {
        grid: *grid,
        values,
        max_imaginary,
        coverage_warning,
    })
}

/// Compares the photon-number extent `√⟨n⟩ + 2` of `|ρ|`'s diagonal with
/// the grid's inner radius.
fn check_coverage(rho: &ComplexMatrix, grid: &PhaseSpaceGrid) -> bool {
    let diag: Vec<f64> = rho.diagonal().iter().map(|z| z.re.abs()).collect();
    let total: f64 = diag.iter().sum();
    if total == 0.0 {
        return false;
    }
    let mean_n = diag.iter().enumerate().map(|(k, w)| k as f64 * w).sum::<f64>() / total;
    let extent = mean_n.sqrt() + 2.0;
    let short = extent > grid.inner_radius();
    if short {
        log::warn!(
            "phase-space grid reaches {:.2} but the state extends to about {:.2} (⟨n⟩ = {:.2})",
            grid.inner_radius(),
            extent,
            mean_n
        );
    }
    short
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, create, destroy, FockSpace};
    use crate::numerics::expm;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn settings() -> NumericSettings {
        NumericSettings::default()
    }

    fn projector(v: &crate::numerics::ComplexVector) -> ComplexMatrix {
        let n = v.dim();
        ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    fn coherent_rho(n: usize, alpha: Complex64) -> ComplexMatrix {
        projector(&coherent_state(FockSpace::new(n).unwrap(), alpha))
    }

    fn grid(points: usize, half: f64) -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(points, points, (-half, half), (-half, half)).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseSpaceGrid::new(1, 5, (-1.0, 1.0), (-1.0, 1.0)).is_err());
        assert!(PhaseSpaceGrid::new(5, 5, (1.0, 1.0), (-1.0, 1.0)).is_err());
        assert!(PhaseSpaceGrid::new(5, 5, (-1.0, 1.0), (f64::NAN, 1.0)).is_err());
        let g = PhaseSpaceGrid::default();
        assert_eq!((g.x(0), g.x(60), g.x(120)), (-6.0, 0.0, 6.0));
        assert!((g.dx() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn displacement_matches_exponential() {
        // Compare with expm(βa† − β*a) built in a much larger space.
        let big = FockSpace::new(260).unwrap();
        let a = destroy(big).into_matrix();
        let ad = create(big).into_matrix();
        for beta in [c(0.0, 0.0), c(0.3, -0.2), c(1.1, 0.7), c(-0.5, 1.4), c(3.0, -4.0), c(7.0, 4.0)] {
            let gen = &ad.scale(beta) - &a.scale(beta.conj());
            let exact = expm(&gen).unwrap();
            let d = displacement_elements(30, beta);
            for m in 0..30 {
                for n in 0..30 {
                    assert!((d[(m, n)] - exact[(m, n)]).norm() < 1e-12, "β={beta} ({m},{n}) {} {}", d[(m, n)], exact[(m, n)]);
                }
            }
        }
    }

    #[test]
    fn vacuum_peaks_at_two_over_pi() {
        let mut rho = ComplexMatrix::zeros(6, 6);
        rho[(0, 0)] = c(1.0, 0.0);
        let map = wigner_of(&rho, &grid(41, 4.0), &settings()).unwrap();
        assert!((map.value(20, 20) - 2.0 / PI).abs() < 1e-14);
        for (x, p, w) in map.points() {
            let want = 2.0 / PI * (-2.0 * (x * x + p * p)).exp();
            assert!((w - want).abs() < 1e-12);
        }
        assert!((map.integral() - 1.0).abs() < 0.02);
        assert!(!map.coverage_warning);
    }

    #[test]
    fn coherent_state_peak_and_norm() {
        let alpha0 = c(1.3, -0.8);
        let rho = coherent_rho(30, alpha0);
        let g = PhaseSpaceGrid::default();
        let map = wigner_of(&rho, &g, &settings()).unwrap();
        let (x, p, w) = map.maximum();
        assert!((x - alpha0.re).abs() <= g.dx());
        assert!((p - alpha0.im).abs() <= g.dp());
        assert!((w - 2.0 / PI).abs() < 0.05);
        assert!((map.integral() - 1.0).abs() < 0.02);
        assert!(map.max_imaginary < 1e-10);
    }

    #[test]
    fn cat_mixture_lobes_and_slow_mode_signs() {
        let (n, amp) = (30, 10f64.sqrt());
        let plus = coherent_rho(n, c(amp, 0.0));
        let minus = coherent_rho(n, c(-amp, 0.0));
        let g = PhaseSpaceGrid::default();

        let mixed = (&plus + &minus).scale_real(0.5);
        let map = wigner_of(&mixed, &g, &settings()).unwrap();
        let (x, p, _) = map.maximum();
        assert!((x.abs() - amp).abs() <= g.dx() && p.abs() <= g.dp());
        for i in 0..g.x_points {
            for j in 0..g.p_points {
                let mirrored = map.value(g.x_points - 1 - i, g.p_points - 1 - j);
                assert!((map.value(i, j) - mirrored).abs() < 1e-8);
            }
        }
        assert!((map.integral() - 1.0).abs() < 0.02);

        let slow = &plus - &minus;
        let map = wigner_of(&slow, &g, &settings()).unwrap();
        let (xmax, _, wmax) = map.maximum();
        let (xmin, _, wmin) = map.minimum();
        assert!(wmax > 0.0 && wmin < 0.0);
        assert!((xmax - amp).abs() <= g.dx());
        assert!((xmin + amp).abs() <= g.dx());
        assert!(map.integral().abs() < 0.02);
    }

    #[test]
    fn rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            wigner_of(&rect, &grid(5, 1.0), &settings()),
            Err(WignerError::NotSquare { .. })
        ));
        let mut skew = ComplexMatrix::zeros(2, 2);
        skew[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            wigner_of(&skew, &grid(5, 1.0), &settings()),
            Err(WignerError::NotHermitian { .. })
        ));
    }

    #[test]
    fn small_grid_warns_about_coverage() {
        let rho = coherent_rho(30, c(3.0, 0.0));
        let map = wigner_of(&rho, &grid(11, 1.5), &settings()).unwrap();
        assert!(map.coverage_warning);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn displacement_is_unitary_away_from_truncation(re in -1.5f64..1.5, im in -1.5f64..1.5) {
            // Rows of the infinite matrix are unit vectors; 40 columns
            // capture the first rows to rounding.
            let d = displacement_elements(40, c(re, im));
            for m in 0..5 {
                let norm: f64 = (0..40).map(|n| d[(m, n)].norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn coherent_maps_match_closed_form(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let alpha0 = c(re, im);
            let rho = coherent_rho(30, alpha0);
            // Truncation moves ⟨ψ|D Π|ψ⟩ by at most ~2‖ψ_tail‖.
            let tail = crate::fock::coherent_tail_weight(FockSpace::new(30).unwrap(), alpha0);
            let tol = 1e-10 + 4.0 / PI * 2.0 * tail.sqrt();
            let map = wigner_of(&rho, &grid(9, 3.0), &settings()).unwrap();
            for (x, p, w) in map.points() {
                let want = 2.0 / PI * (-2.0 * (c(x, p) - alpha0).norm_sqr()).exp();
                prop_assert!((w - want).abs() < tol, "({x},{p}) {w} vs {want}");
            }
        }
    }
}
