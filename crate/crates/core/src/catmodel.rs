//! Kerr Cat specifics: trace-free initial superkets, the mean-field order
//! parameter and its Landau picture.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fock::{kerr_cat_hamiltonian, FockError, FockSpace, KerrCatParams};
use crate::liouville::{vectorize, LiouvilleError, Superket};
use crate::numerics::{eig_hermitian, ComplexMatrix, ComplexVector, LinalgError, NumericSettings};

/// Default fraction of g/K that counts as entering the cat regime.
pub const ONSET_FRACTION: f64 = 0.5;

/// Trajectories whose photon number exceeds this multiple of the truncation
/// are reported as blow-ups.
pub const BLOWUP_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum CatModelError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Liouville(#[from] LiouvilleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{n_pairs} eigenstate pairs requested but only {available} exist for N = {n_levels}")]
    TooManyPairs {
        n_pairs: usize,
        available: usize,
        n_levels: usize,
    },
    #[error("n_pairs must be at least 1")]
    NoPairs,
    #[error("pair ({k}, {k_prime}) invalid for N = {n_levels}")]
    InvalidPair {
        k: usize,
        k_prime: usize,
        n_levels: usize,
    },
    #[error("{name} must be positive and finite, got {value}")]
    InvalidStep { name: &'static str, value: f64 },
    #[error("mean-field |α|² = {alpha_sq:.3e} at t = {time} exceeds {limit}; the truncation at N = {n_levels} no longer describes this trajectory")]
    BlowUp {
        time: f64,
        alpha_sq: f64,
        limit: f64,
        n_levels: usize,
    },
    #[error("mean-field fixed point did not converge (residual {residual:.3e})")]
    FixedPointNotConverged { residual: f64 },
    #[error("sampled operator vanished; cannot normalise")]
    ZeroSample,
    #[error("drive grid must sweep g at fixed κ, K and δ")]
    InconsistentGrid,
}

/// Which operators each eigenstate pair contributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerMode {
    /// `|p⟩⟨p| − |q⟩⟨q|` with `p, q` a random unitary rotation of the pair;
    /// carries coherences between the two eigenstates.
    RotatedPairs,
    /// `|ψ_k⟩⟨ψ_k| − |ψ_k′⟩⟨ψ_k′|` only.
    Populations,
}

/// Deterministic source of Hermitian, trace-free, unit-norm superkets built
/// from eigenstate pairs of the Kerr Cat Hamiltonian.
///
/// Pairs are taken from the top of the spectrum, where the cat manifold of
/// `H = δa†a − Ka†²a² + g(a†² + a²)` lives.
#[derive(Clone, Debug)]
pub struct TraceZeroSampler {
    seed: u64,
    n_pairs: usize,
    mode: SamplerMode,
    rng: ChaCha8Rng,
}

impl TraceZeroSampler {
    pub const DEFAULT_N_PAIRS: usize = 4;

    pub fn new(seed: u64, n_pairs: usize) -> Result<Self, CatModelError> {
        if n_pairs == 0 {
            return Err(CatModelError::NoPairs);
        }
        Ok(Self {
            seed,
            n_pairs,
            mode: SamplerMode::RotatedPairs,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn with_mode(mut self, mode: SamplerMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    /// Fresh sampler on seed `seed + index`, for independent tasks.
    pub fn fork(&self, index: u64) -> Self {
        let seed = self.seed.wrapping_add(index);
        Self {
            seed,
            n_pairs: self.n_pairs,
            mode: self.mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(
        &mut self,
        space: FockSpace,
        params: &KerrCatParams,
        settings: &NumericSettings,
    ) -> Result<Superket, CatModelError> {
        let n = space.n_levels();
        if 2 * self.n_pairs > n {
            return Err(CatModelError::TooManyPairs {
                n_pairs: self.n_pairs,
                available: n / 2,
                n_levels: n,
            });
        }
        let eig = eig_hermitian(kerr_cat_hamiltonian(space, params)?.matrix(), settings)?;
        let top = |k: usize| eig.eigenvectors.column(n - 1 - k);

        let mut op = ComplexMatrix::zeros(n, n);
        for j in 0..self.n_pairs {
            let (vk, vk2) = (top(2 * j), top(2 * j + 1));
            let c: f64 = self.rng.gen_range(0.0..1.0);
            let (p, q) = match self.mode {
                SamplerMode::Populations => (vk, vk2),
                SamplerMode::RotatedPairs => {
                    let theta: f64 = self.rng.gen_range(0.0..PI / 2.0);
                    let phi: f64 = self.rng.gen_range(0.0..2.0 * PI);
                    let e = Complex64::from_polar(1.0, phi);
                    let mut p = vk.scale_real(theta.cos());
                    p.axpy(e * theta.sin(), &vk2);
                    let mut q = vk.scale_real(theta.sin());
                    q.axpy(-e * theta.cos(), &vk2);
                    (p, q)
                }
            };
            add_projector_difference(&mut op, &p, &q, c);
        }
        finish(op)
    }
}

fn add_projector_difference(op: &mut ComplexMatrix, p: &ComplexVector, q: &ComplexVector, c: f64) {
    let n = op.rows();
    for i in 0..n {
        for j in 0..n {
            op[(i, j)] += c * (p[i] * p[j].conj() - q[i] * q[j].conj());
        }
    }
}

fn finish(op: ComplexMatrix) -> Result<Superket, CatModelError> {
    let herm = (&op + &op.adjoint()).scale_real(0.5);
    vectorize(&herm)?.normalized().ok_or(CatModelError::ZeroSample)
}

/// Normalised `c(|ψ_k⟩⟨ψ_k| − |ψ_k′⟩⟨ψ_k′|)` for columns of `eigenvectors`.
pub fn pair_superket(
    eigenvectors: &ComplexMatrix,
    k: usize,
    k_prime: usize,
    c: f64,
) -> Result<Superket, CatModelError> {
    let n = eigenvectors.rows();
    if k == k_prime || k >= eigenvectors.cols() || k_prime >= eigenvectors.cols() {
        return Err(CatModelError::InvalidPair {
            k,
            k_prime,
            n_levels: n,
        });
    }
    let mut op = ComplexMatrix::zeros(n, n);
    add_projector_difference(&mut op, &eigenvectors.column(k), &eigenvectors.column(k_prime), c);
    finish(op)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldState {
    pub alpha: Complex64,
    pub time: f64,
}

/// `dα/dt = i(δα + 2K|α|²α − 2gα*) − (κ/2)α`.
pub fn mean_field_rhs(s: &MeanFieldState, p: &KerrCatParams) -> Complex64 {
    let a = s.alpha;
    let i = Complex64::i();
    i * (p.delta * a + 2.0 * p.kerr * a.norm_sqr() * a - 2.0 * p.drive * a.conj())
        - 0.5 * p.kappa_1ph * a
}

/// Fixed-step RK4 from `alpha0` to `t_final`, initial and final states
/// included. The last step is shortened to land on `t_final` exactly.
pub fn mean_field_evolve(
    alpha0: Complex64,
    p: &KerrCatParams,
    t_final: f64,
    dt: f64,
    space: FockSpace,
) -> Result<Vec<MeanFieldState>, CatModelError> {
    for (name, value) in [("t_final", t_final), ("dt", dt)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(CatModelError::InvalidStep { name, value });
        }
    }
    let limit = BLOWUP_FACTOR * space.n_levels() as f64;
    let steps = (t_final / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = MeanFieldState {
        alpha: alpha0,
        time: 0.0,
    };
    out.push(s);
    let f = |a: Complex64| mean_field_rhs(&MeanFieldState { alpha: a, time: 0.0 }, p);
    for k in 0..steps {
        let h = if k + 1 == steps { t_final - s.time } else { dt };
        let a = s.alpha;
        let k1 = f(a);
        let k2 = f(a + 0.5 * h * k1);
        let k3 = f(a + 0.5 * h * k2);
        let k4 = f(a + h * k3);
        s = MeanFieldState {
            alpha: a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
            time: if k + 1 == steps { t_final } else { s.time + h },
        };
        let alpha_sq = s.alpha.norm_sqr();
        if !(alpha_sq <= limit) {
            return Err(CatModelError::BlowUp {
                time: s.time,
                alpha_sq,
                limit,
                n_levels: space.n_levels(),
            });
        }
        out.push(s);
    }
    Ok(out)
}

/// Symmetry-broken mean-field fixed point `α = r e^{iφ}`, if one exists.
///
/// Setting the rhs to zero gives `(δ + 2Kr²)² + κ²/4 = 4g²`; the branch
/// `2Kr² = √(4g² − κ²/4) − δ` is taken and the phase follows from
/// `e^{−2iφ} = (δ + 2Kr² + iκ/2)/(2g)`. The closed form is polished by
/// Newton iteration on the real 2×2 system. Returns `None` (the origin) when
/// no positive root exists.
pub fn mean_field_fixed_point(p: &KerrCatParams) -> Result<Option<Complex64>, CatModelError> {
    let disc = 4.0 * p.drive * p.drive - 0.25 * p.kappa_1ph * p.kappa_1ph;
    if p.drive <= 0.0 || disc <= 0.0 {
        return Ok(None);
    }
    let r_sq = (disc.sqrt() - p.delta) / (2.0 * p.kerr);
    if r_sq <= 0.0 {
        return Ok(None);
    }
    let rotation = Complex64::new(p.delta + 2.0 * p.kerr * r_sq, 0.5 * p.kappa_1ph) / (2.0 * p.drive);
    let phi = -0.5 * rotation.arg();
    let mut alpha = Complex64::from_polar(r_sq.sqrt(), phi);

    let f = |a: Complex64| mean_field_rhs(&MeanFieldState { alpha: a, time: 0.0 }, p);
    let scale = p.drive.abs() + p.kerr * r_sq + p.delta.abs() + p.kappa_1ph;
    for _ in 0..20 {
        let r = f(alpha);
        if r.norm() <= 1e-14 * scale * alpha.norm() {
            break;
        }
        let jac = real_jacobian(&f, alpha);
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let dx = (jac[1][1] * r.re - jac[0][1] * r.im) / det;
        let dy = (-jac[1][0] * r.re + jac[0][0] * r.im) / det;
        alpha -= Complex64::new(dx, dy);
    }
    let residual = f(alpha).norm();
    if residual > 1e-10 * scale * alpha.norm().max(1.0) {
        return Err(CatModelError::FixedPointNotConverged { residual });
    }
    Ok(Some(alpha))
}

/// Analytic Jacobian of the rhs as a map on `(Re α, Im α)`.
fn real_jacobian(f: &impl Fn(Complex64) -> Complex64, alpha: Complex64) -> [[f64; 2]; 2] {
    // The rhs is a cubic polynomial in (x, y); central differences with this
    // step are exact up to O(h²)·|α| corrections well below Newton's needs.
    let h = 1e-6 * alpha.norm().max(1.0);
    let dfx = (f(alpha + h) - f(alpha - h)) / (2.0 * h);
    let dfy = (f(alpha + Complex64::new(0.0, h)) - f(alpha - Complex64::new(0.0, h))) / (2.0 * h);
    [[dfx.re, dfy.re], [dfx.im, dfy.im]]
}

/// Mean-field steady photon number, zero below threshold.
pub fn mean_field_alpha_sq(p: &KerrCatParams) -> Result<f64, CatModelError> {
    Ok(mean_field_fixed_point(p)?.map_or(0.0, |a| a.norm_sqr()))
}

/// Drive above which the origin is linearly unstable: `√(κ²/4 + δ²)/2`.
pub fn linear_threshold(p: &KerrCatParams) -> f64 {
    (0.25 * p.kappa_1ph * p.kappa_1ph + p.delta * p.delta).sqrt() / 2.0
}

/// `F(α) = K/4 |α|⁴ − g/2 |α|²`.
pub fn landau_functional(alpha: Complex64, p: &KerrCatParams) -> f64 {
    let n = alpha.norm_sqr();
    0.25 * p.kerr * n * n - 0.5 * p.drive * n
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnsetEstimate {
    /// Smallest grid drive whose steady |α|² exceeds the fraction of g/K,
    /// `None` when the grid never enters the cat regime.
    pub onset: Option<f64>,
    /// The κ/4 rule of thumb for comparison.
    pub rule_of_thumb: f64,
}

pub fn cat_regime_onset(p_grid: &[KerrCatParams], fraction: f64) -> Result<OnsetEstimate, CatModelError> {
    let Some(first) = p_grid.first() else {
        return Err(CatModelError::InconsistentGrid);
    };
    let fixed = |q: &KerrCatParams| (q.kappa_1ph, q.kerr, q.delta);
    if p_grid.iter().any(|q| fixed(q) != fixed(first)) {
        return Err(CatModelError::InconsistentGrid);
    }
    let mut sorted: Vec<&KerrCatParams> = p_grid.iter().collect();
    sorted.sort_by(|a, b| a.drive.total_cmp(&b.drive));
    let mut onset = None;
    for q in sorted {
        let alpha_sq = mean_field_alpha_sq(q)?;
        if q.drive > 0.0 && alpha_sq > 0.0 && alpha_sq >= fraction * q.drive / q.kerr {
            onset = Some(q.drive);
            break;
        }
    }
    Ok(OnsetEstimate {
        onset,
        rule_of_thumb: first.kappa_1ph / 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{devectorize, identity_superket};
    use proptest::prelude::*;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    fn params(delta: f64, kerr: f64, drive: f64, kappa: f64) -> KerrCatParams {
        KerrCatParams {
            delta,
            kerr,
            drive,
            kappa_1ph: kappa,
        }
    }

    fn rhs(alpha: Complex64, p: &KerrCatParams) -> Complex64 {
        mean_field_rhs(&MeanFieldState { alpha, time: 0.0 }, p)
    }

    #[test]
    fn single_pair_example() {
        let s = space(4);
        let basis = ComplexMatrix::identity(4);
        let ket = pair_superket(&basis, 0, 1, 1.0).unwrap();
        let rho = devectorize(&ket);
        let r = 1.0 / 2f64.sqrt();
        assert!((rho[(0, 0)].re - r).abs() < 1e-15);
        assert!((rho[(1, 1)].re + r).abs() < 1e-15);
        assert_eq!(ket.space(), s);
        assert!(pair_superket(&basis, 1, 1, 1.0).is_err());
        assert!(pair_superket(&basis, 0, 4, 1.0).is_err());
    }

    #[test]
    fn samples_are_valid_gevp_inputs() {
        let s = space(12);
        let p = KerrCatParams::reference(0.5);
        let settings = NumericSettings::default();
        for mode in [SamplerMode::RotatedPairs, SamplerMode::Populations] {
            let mut sampler = TraceZeroSampler::new(3, 4).unwrap().with_mode(mode);
            for _ in 0..5 {
                let ket = sampler.sample(s, &p, &settings).unwrap();
                assert!(identity_superket(s).inner(&ket).norm() <= 1e-14);
                assert!((ket.norm() - 1.0).abs() < 1e-14);
                assert!(devectorize(&ket).hermitian_deviation() == 0.0);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = space(10);
        let p = KerrCatParams::reference(0.7);
        let settings = NumericSettings::default();
        let a = TraceZeroSampler::new(42, 3).unwrap().sample(s, &p, &settings).unwrap();
        let b = TraceZeroSampler::new(42, 3).unwrap().sample(s, &p, &settings).unwrap();
        assert_eq!(a, b);
        let base = TraceZeroSampler::new(40, 3).unwrap();
        let c = base.fork(2).sample(s, &p, &settings).unwrap();
        assert_eq!(a, c);
        let d = TraceZeroSampler::new(43, 3).unwrap().sample(s, &p, &settings).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn sampler_preconditions() {
        assert!(matches!(TraceZeroSampler::new(0, 0), Err(CatModelError::NoPairs)));
        let mut sampler = TraceZeroSampler::new(0, 3).unwrap();
        let err = sampler.sample(space(5), &KerrCatParams::reference(0.5), &NumericSettings::default());
        assert!(matches!(err, Err(CatModelError::TooManyPairs { available: 2, .. })));
    }

    #[test]
    fn populations_mode_has_no_eigenbasis_coherences() {
        let s = space(8);
        let p = KerrCatParams::reference(0.4);
        let settings = NumericSettings::default();
        let ket = TraceZeroSampler::new(1, 2)
            .unwrap()
            .with_mode(SamplerMode::Populations)
            .sample(s, &p, &settings)
            .unwrap();
        let eig = eig_hermitian(kerr_cat_hamiltonian(s, &p).unwrap().matrix(), &settings).unwrap();
        let v = &eig.eigenvectors;
        let in_basis = &(&v.adjoint() * &devectorize(&ket)) * v;
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(in_basis[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn origin_is_fixed() {
        let p = params(0.3, 0.05, 0.7, 1.0);
        assert_eq!(rhs(Complex64::new(0.0, 0.0), &p), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn resonant_lossless_fixed_point() {
        let p = params(0.0, 0.05, 0.5, 0.0);
        let alpha = Complex64::new((p.drive / p.kerr).sqrt(), 0.0);
        assert!(rhs(alpha, &p).norm() < 1e-12);
        let fp = mean_field_fixed_point(&p).unwrap().unwrap();
        assert!((fp.norm_sqr() - 10.0).abs() < 1e-10);
    }

    #[test]
    fn linearisation_at_origin() {
        // d/dt (x, y) = [[−κ/2, −(δ + 2g)], [δ − 2g, −κ/2]] (x, y), so the
        // growth rate is −κ/2 + √(4g² − δ²).
        let p = params(0.2, 0.05, 0.4, 1.0);
        let f = |a: Complex64| rhs(a, &p);
        let j = real_jacobian(&f, Complex64::new(0.0, 0.0));
        let want = [[-0.5, -(0.2 + 0.8)], [0.2 - 0.8, -0.5]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((j[r][c] - want[r][c]).abs() < 1e-9);
            }
        }
        let growth = -0.5 + (4.0 * 0.16f64 - 0.04).sqrt();
        assert!(growth > 0.0);
        assert!(p.drive > linear_threshold(&p));

        // A small kick grows at that rate before nonlinearity sets in.
        let traj = mean_field_evolve(Complex64::new(1e-6, 0.0), &p, 5.0, 1e-3, space(30)).unwrap();
        assert!(traj.last().unwrap().alpha.norm() > 1e-6);
        let below = params(0.2, 0.05, 0.2, 1.0);
        assert!(below.drive < linear_threshold(&below));
        let traj = mean_field_evolve(Complex64::new(1e-2, 0.0), &below, 20.0, 1e-3, space(30)).unwrap();
        assert!(traj.last().unwrap().alpha.norm() < 1e-3);
    }

    #[test]
    fn thresholds_match_closed_forms() {
        assert!((linear_threshold(&params(0.0, 0.05, 0.0, 1.0)) - 0.25).abs() < 1e-15);
        assert!((linear_threshold(&params(0.2, 0.05, 0.0, 1.0)) - 0.29f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn undriven_decay() {
        let p = params(0.3, 0.05, 0.0, 1.0);
        let traj = mean_field_evolve(Complex64::new(1.5, -0.5), &p, 40.0, 1e-2, space(30)).unwrap();
        assert!(traj.last().unwrap().alpha.norm() < 1e-6);
        assert_eq!(traj.first().unwrap().time, 0.0);
        assert_eq!(traj.last().unwrap().time, 40.0);
    }

    #[test]
    fn final_step_lands_on_t_final() {
        let p = params(0.0, 0.05, 0.3, 1.0);
        let traj = mean_field_evolve(Complex64::new(0.1, 0.0), &p, 1.05, 0.1, space(10)).unwrap();
        assert_eq!(traj.len(), 12);
        assert_eq!(traj.last().unwrap().time, 1.05);
    }

    #[test]
    fn detuning_renormalises_photon_number_and_integration_agrees() {
        let p = KerrCatParams::reference(0.6);
        let fp = mean_field_fixed_point(&p).unwrap().unwrap();
        assert!(rhs(fp, &p).norm() < 1e-12);
        let bare = p.drive / p.kerr;
        assert!((fp.norm_sqr() - bare).abs() > 1e-3);
        let traj = mean_field_evolve(Complex64::new(0.1, 0.05), &p, 200.0, 1e-3, space(30)).unwrap();
        let end = traj.last().unwrap().alpha;
        assert!((end.norm_sqr() - fp.norm_sqr()).abs() < 1e-6, "{} vs {}", end.norm_sqr(), fp.norm_sqr());
    }

    #[test]
    fn no_fixed_point_below_threshold() {
        assert_eq!(mean_field_alpha_sq(&KerrCatParams::reference(0.2)).unwrap(), 0.0);
        assert!(mean_field_alpha_sq(&KerrCatParams::reference(0.28)).unwrap() > 0.0);
        assert_eq!(mean_field_alpha_sq(&params(0.0, 0.05, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        // Negative loss is gain: |α|² = 4e^{4t} passes 50 near t = 0.63.
        let p = params(0.0, 0.05, 0.0, -4.0);
        let err = mean_field_evolve(Complex64::new(2.0, 0.0), &p, 2.0, 1e-3, space(5));
        match err {
            Err(CatModelError::BlowUp { time, limit, .. }) => {
                assert_eq!(limit, 50.0);
                assert!((time - (12.5f64).ln() / 4.0).abs() < 0.01, "{time}");
            }
            other => panic!("expected blow-up, got {:?}", other.map(|t| t.len())),
        }
        assert!(mean_field_evolve(Complex64::new(0.0, 0.0), &p, 0.0, 1e-3, space(5)).is_err());
        assert!(mean_field_evolve(Complex64::new(0.0, 0.0), &p, 1.0, -1.0, space(5)).is_err());
    }

    #[test]
    fn lossless_flow_conserves_energy() {
        // With κ = 0 the flow is dα/dt = i ∂E/∂α* for
        // E = δ|α|² + K|α|⁴ − g(α² + α*²).
        let p = params(0.1, 0.05, 0.5, 0.0);
        let energy = |a: Complex64| {
            let n = a.norm_sqr();
            p.delta * n + p.kerr * n * n - p.drive * 2.0 * (a * a).re
        };
        let traj = mean_field_evolve(Complex64::new(0.1, 0.0), &p, 50.0, 1e-3, space(30)).unwrap();
        let e0 = energy(traj[0].alpha);
        for s in traj.iter().step_by(1000) {
            assert!((energy(s.alpha) - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn landau_functional_values() {
        let p = params(0.0, 0.05, 0.5, 1.0);
        assert_eq!(landau_functional(Complex64::new(0.0, 0.0), &p), 0.0);
        let star = Complex64::new(p.cat_amplitude(), 0.0);
        let f_star = landau_functional(star, &p);
        assert!((f_star + p.drive * p.drive / (4.0 * p.kerr)).abs() < 1e-12);
        for r in [0.5, 2.0, 3.0, 3.2, 3.3, 4.0] {
            assert!(landau_functional(Complex64::new(r, 0.0), &p) >= f_star);
        }
    }

    #[test]
    fn onset_estimates() {
        let grid = |kappa: f64, gmax: f64| -> Vec<KerrCatParams> {
            (0..=400)
                .map(|k| params(0.0, 0.05, 0.05 + (gmax - 0.05) * k as f64 / 400.0, kappa))
                .collect()
        };
        let est = cat_regime_onset(&grid(1.0, 1.0), ONSET_FRACTION).unwrap();
        let onset = est.onset.unwrap();
        // √(4g² − 1/4) = g at the half-photon-number point: g = 1/√12.
        assert!((onset - 12f64.sqrt().recip()).abs() < 0.003, "{onset}");
        assert!((0.15..=0.35).contains(&onset));
        assert_eq!(est.rule_of_thumb, 0.25);

        let lossless = cat_regime_onset(&grid(0.0, 1.0), ONSET_FRACTION).unwrap();
        assert_eq!(lossless.onset, Some(0.05));

        let weak = cat_regime_onset(&grid(1.0, 0.2), ONSET_FRACTION).unwrap();
        assert_eq!(weak.onset, None);

        let mixed = vec![params(0.0, 0.05, 0.3, 1.0), params(0.1, 0.05, 0.4, 1.0)];
        assert!(cat_regime_onset(&mixed, ONSET_FRACTION).is_err());
    }

    #[test]
    fn cat_amplitude_matches_landau_minimum() {
        let p = params(0.0, 0.05, 0.5, 0.0);
        let fp = mean_field_fixed_point(&p).unwrap().unwrap();
        assert!((fp.norm() - p.cat_amplitude()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn landau_is_even(re in -5.0f64..5.0, im in -5.0f64..5.0, g in 0.0f64..2.0) {
            let p = params(0.0, 0.05, g, 1.0);
            let a = Complex64::new(re, im);
            prop_assert_eq!(landau_functional(a, &p), landau_functional(-a, &p));
        }

        #[test]
        fn trajectories_are_odd(re in -1.0f64..1.0, im in -1.0f64..1.0, g in 0.0f64..1.0, delta in -0.3f64..0.3) {
            let p = params(delta, 0.05, g, 1.0);
            let a = Complex64::new(re, im);
            let plus = mean_field_evolve(a, &p, 3.0, 1e-2, space(30)).unwrap();
            let minus = mean_field_evolve(-a, &p, 3.0, 1e-2, space(30)).unwrap();
            for (x, y) in plus.iter().zip(&minus) {
                prop_assert!((x.alpha + y.alpha).norm() < 1e-12);
            }
        }

        #[test]
        fn nonzero_fixed_point_iff_above_linear_threshold(g in 0.0f64..1.0, delta in 0.0f64..0.3, kappa in 0.2f64..2.0) {
            let p = params(delta, 0.05, g, kappa);
            let gc = linear_threshold(&p);
            prop_assume!((g - gc).abs() > 1e-9);
            let has = mean_field_alpha_sq(&p).unwrap() > 0.0;
            prop_assert_eq!(has, g > gc);
        }
    }
}
