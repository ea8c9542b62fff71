//! Spectral moments J₂ᶠ, J₄ᶠ and the stimulation parameter χ = J₄ᶠ/(J₂ᶠ)².
//!
//! The four-dimensional moment integral is reduced to the idler kernel
//!
//! ```text
//! M(ω₂, ω₂') = ∫ dω₁ F(ω₁) G(ω₁, ω₂) G*(ω₁, ω₂')
//! ```
//!
//! so that `J₂ᶠ = ∫ M(ω₂, ω₂) dω₂` and `J₄ᶠ = ∬ |M(ω₂, ω₂')|² dω₂ dω₂'`.
//! χ is then the purity of the (weighted) kernel.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{Nodes, QuadratureRule};
use crate::scalar::{two, Real};
use crate::spectra::{
    FilterProfile, FrequencyGrid, GaussianFilter, GaussianPump, JointAmplitude, PhaseMatching,
};

pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_REFINEMENT: u32 = 2;

/// Discretisation and convergence settings for a moment computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig<T> {
    /// ω₁ axis (filtered photon).
    pub signal: FrequencyGrid<T>,
    /// ω₂ axis (kernel index).
    pub idler: FrequencyGrid<T>,
    /// Pump-intensity scale `I` in `P₂ = I·J₂`. Cancels in χ.
    pub intensity: T,
    pub rule: QuadratureRule,
    /// Maximum number of grid doublings tried before giving up.
    pub refinement: u32,
    /// Relative change under doubling accepted as converged.
    pub threshold: T,
}

impl<T: Real> MomentConfig<T> {
    pub fn new(signal: FrequencyGrid<T>, idler: FrequencyGrid<T>) -> Self {
        Self {
            signal,
            idler,
            intensity: T::one(),
            rule: QuadratureRule::GaussLegendre,
            refinement: DEFAULT_REFINEMENT,
            threshold: T::lit(DEFAULT_CONVERGENCE_THRESHOLD),
        }
    }

    /// Windows derived from the supports of the filter, phase matching and
    /// pump, with `points` nodes per axis.
    pub fn auto(amplitude: &JointAmplitude<T>, filter: &FilterProfile<T>, points: usize) -> Result<Self> {
        let candidates = [filter.support(), amplitude.phasematch.signal_support()];
        let (c1, h1) = intersect_windows(candidates.iter().flatten().copied())?.ok_or_else(|| {
            Error::Precondition("signal axis is unbounded (unity filter and phase matching); supply an explicit grid".into())
        })?;
        let signal = FrequencyGrid::new(c1, h1, points)?;
        Ok(Self::new(signal, idler_window(amplitude, &signal, points)?))
    }

    /// Auto idler window for a caller-chosen signal window.
    pub fn with_signal_window(amplitude: &JointAmplitude<T>, signal: FrequencyGrid<T>) -> Result<Self> {
        Ok(Self::new(signal, idler_window(amplitude, &signal, signal.points)?))
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_refinement(mut self, refinement: u32) -> Self {
        self.refinement = refinement;
        self
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_intensity(mut self, intensity: T) -> Self {
        self.intensity = intensity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity > T::zero()) {
            return Err(domain("pump intensity scale must be positive"));
        }
        if self.refinement < 1 {
            return Err(domain("refinement must allow at least one doubling"));
        }
        if !(self.threshold > T::zero()) {
            return Err(domain("convergence threshold must be positive"));
        }
        Ok(())
    }
}

fn idler_window<T: Real>(amplitude: &JointAmplitude<T>, signal: &FrequencyGrid<T>, points: usize) -> Result<FrequencyGrid<T>> {
    let (cp, hp) = amplitude.pump.support();
    let from_pump = (cp - signal.center, hp + signal.halfwidth);
    let window = intersect_windows([Some(from_pump), amplitude.phasematch.idler_support()].into_iter().flatten())?
        .expect("pump window always present");
    FrequencyGrid::new(window.0, window.1, points)
}

fn intersect_windows<T: Real>(windows: impl Iterator<Item = (T, T)>) -> Result<Option<(T, T)>> {
    let mut acc: Option<(T, T)> = None;
    for (c, h) in windows {
        let (lo, hi) = (c - h, c + h);
        acc = Some(match acc {
            None => (lo, hi),
            Some((a, b)) => (a.max(lo), b.min(hi)),
        });
    }
    match acc {
        None => Ok(None),
        Some((lo, hi)) if hi > lo => Ok(Some(((lo + hi) / two::<T>(), (hi - lo) / two::<T>()))),
        Some(_) => Err(Error::Precondition("profile supports do not overlap".into())),
    }
}

/// Weighted idler kernel `M(ω₂, ω₂')`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    values: Vec<Complex<T>>,
    /// `max |M - M†| / (2 max |M|)` removed when symmetrising.
    pub hermiticity_correction: T,
    /// Relative change of the moments under the last grid doubling.
    pub error_estimate: T,
    pub warnings: Vec<String>,
}

impl<T: Real> KernelMatrix<T> {
    /// Kernel from explicit node values (row-major, `n × n`), made Hermitian.
    pub fn from_values(nodes: Vec<T>, weights: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        let n = nodes.len();
        if weights.len() != n || values.len() != n * n {
            return Err(domain(format!(
                "kernel shape mismatch: {n} nodes, {} weights, {} values",
                weights.len(),
                values.len()
            )));
        }
        let mut kernel = Self {
            nodes,
            weights,
            values,
            hermiticity_correction: T::zero(),
            error_estimate: T::zero(),
            warnings: Vec::new(),
        };
        kernel.enforce_hermiticity();
        Ok(kernel)
    }

    /// Single-level assembly on fixed nodes, by 1-D quadrature over ω₁ for
    /// every pair of idler nodes.
    pub fn assemble(
        amplitude: &JointAmplitude<T>,
        filter: &FilterProfile<T>,
        signal: &Nodes<T>,
        idler: &Nodes<T>,
    ) -> Result<Self> {
        let n1 = signal.len();
        // Filter-weighted quadrature weights on the ω₁ axis.
        let mut wf = Vec::with_capacity(n1);
        for (&w1, &q) in signal.points.iter().zip(&signal.weights) {
            let f = filter.intensity(w1)?;
            if f < T::zero() {
                return Err(domain("filter intensity must be nonnegative"));
            }
            wf.push(q * f);
        }
        // G sampled idler-major: row j holds G(·, ω₂_j) over the ω₁ nodes.
        let rows: Vec<(Vec<T>, Vec<T>)> = idler
            .points
            .par_iter()
            .map(|&w2| -> Result<(Vec<T>, Vec<T>)> {
                let mut re = Vec::with_capacity(n1);
                let mut im = Vec::with_capacity(n1);
                for &w1 in &signal.points {
                    let g = amplitude.eval(w1, w2)?;
                    re.push(g.re);
                    im.push(g.im);
                }
                Ok((re, im))
            })
            .collect::<Result<_>>()?;

        let values = weighted_gram(&rows, &wf);
        Self::from_values(idler.points.clone(), idler.weights.clone(), values)
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn get(&self, j: usize, k: usize) -> Complex<T> {
        self.values[j * self.dim() + k]
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    fn enforce_hermiticity(&mut self) {
        let n = self.dim();
        let mut max_dev = T::zero();
        let mut max_abs = T::zero();
        for j in 0..n {
            for k in j..n {
                let a = self.values[j * n + k];
                let b = self.values[k * n + j];
                let dev = (a - b.conj()).norm() / two::<T>();
                max_dev = max_dev.max(dev);
                max_abs = max_abs.max(a.norm()).max(b.norm());
                let sym = (a + b.conj()) / two::<T>();
                self.values[j * n + k] = sym;
                self.values[k * n + j] = sym.conj();
            }
        }
        self.hermiticity_correction = if max_abs > T::zero() { max_dev / max_abs } else { T::zero() };
    }

    /// Eigenvalues of `W^½ M W^½` in descending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let n = self.dim();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.as_f64().max(0.0).sqrt()).collect();
        let h = DMatrix::<Complex<f64>>::from_fn(n, n, |j, k| {
            let m = self.get(j, k);
            Complex::new(m.re.as_f64(), m.im.as_f64()) * (sw[j] * sw[k])
        });
        let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        eig
    }

    /// Check Hermiticity, a real nonnegative diagonal and positive
    /// semidefiniteness with eigenvalues ≥ -`eps`·trace.
    pub fn check_invariants(&self, eps: f64) -> Result<()> {
        let n = self.dim();
        let scale = self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max).as_f64();
        for j in 0..n {
            let d = self.get(j, j);
            if d.re.as_f64() < -eps * scale || d.im.abs().as_f64() > eps * scale {
                return Err(Error::Degenerate(format!("kernel diagonal entry {j} is {d}")));
            }
            for k in 0..j {
                if (self.get(j, k) - self.get(k, j).conj()).norm().as_f64() > eps * scale {
                    return Err(Error::Degenerate(format!("kernel not Hermitian at ({j}, {k})")));
                }
            }
        }
        let eig = self.spectrum();
        let trace: f64 = eig.iter().sum();
        if let Some(&min) = eig.last() {
            if min < -eps * trace.abs() {
                return Err(Error::Degenerate(format!("kernel eigenvalue {min:.3e} below -{eps:.1e}·trace")));
            }
        }
        Ok(())
    }
}

/// `out[j][k] = Σ_i w_i · row_j[i] · conj(row_k[i])` for rows stored as
/// split real/imaginary parts; row-major `n × n` result.
pub(crate) fn weighted_gram<T: Real>(rows: &[(Vec<T>, Vec<T>)], weights: &[T]) -> Vec<Complex<T>> {
    let n = rows.len();
    let len = weights.len();
    let mut values = vec![Complex::new(T::zero(), T::zero()); n * n];
    values.par_chunks_mut(n.max(1)).enumerate().for_each(|(j, out)| {
        let (ar, ai) = &rows[j];
        let awr: Vec<T> = ar.iter().zip(weights).map(|(&a, &w)| a * w).collect();
        let awi: Vec<T> = ai.iter().zip(weights).map(|(&a, &w)| a * w).collect();
        for (k, slot) in out.iter_mut().enumerate() {
            let (br, bi) = &rows[k];
            let mut sr = T::zero();
            let mut si = T::zero();
            for i in 0..len {
                sr = sr + awr[i] * br[i] + awi[i] * bi[i];
                si = si + awi[i] * br[i] - awr[i] * bi[i];
            }
            *slot = Complex::new(sr, si);
        }
    });
    values
}

/// J₂ᶠ, J₄ᶠ and χ with a convergence estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult<T> {
    pub j2f: T,
    pub j4f: T,
    /// Always `j4f / (j2f * j2f)`.
    pub chi: T,
    pub error_estimate: T,
    /// Kernel dimension (idler nodes) of the reported result.
    pub grid_points: usize,
    pub hermiticity_correction: T,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl<T: Real> MomentResult<T> {
    /// `P₂ = I·J₂ᶠ`.
    pub fn pair_probability(&self, intensity: T) -> T {
        intensity * self.j2f
    }

    /// `P₄ = ½ I² (J₂ᶠ² + J₄ᶠ)`.
    pub fn four_photon_probability(&self, intensity: T) -> T {
        intensity * intensity * (self.j2f * self.j2f + self.j4f) / two::<T>()
    }
}

/// Contract a kernel into the moments.
pub fn compute_moments<T: Real>(kernel: &KernelMatrix<T>) -> Result<MomentResult<T>> {
    let n = kernel.dim();
    let w = &kernel.weights;
    let j2f: T = (0..n).map(|j| w[j] * kernel.get(j, j).re).sum();
    if !(j2f > T::zero()) || !j2f.is_finite() {
        return Err(Error::Degenerate(format!("J2F = {j2f} is not positive")));
    }
    let j4f: T = (0..n)
        .map(|j| {
            let row: T = (0..n).map(|k| w[k] * kernel.get(j, k).norm_sqr()).sum();
            w[j] * row
        })
        .sum();
    Ok(MomentResult {
        j2f,
        j4f,
        chi: j4f / (j2f * j2f),
        error_estimate: kernel.error_estimate,
        grid_points: n,
        hermiticity_correction: kernel.hermiticity_correction,
        warnings: kernel.warnings.clone(),
    })
}

fn relative_change<T: Real>(a: &MomentResult<T>, b: &MomentResult<T>) -> T {
    let rel = |x: T, y: T| {
        let d = (x - y).abs();
        if y == T::zero() { d } else { d / y.abs() }
    };
    rel(a.j2f, b.j2f).max(rel(a.j4f, b.j4f)).max(rel(a.chi, b.chi))
}

fn support_overlap_warning<T: Real>(config: &MomentConfig<T>) -> Option<String> {
    let (s, i) = (&config.signal, &config.idler);
    if s.lo() < i.hi() && i.lo() < s.hi() {
        let msg = format!(
            "signal window [{}, {}] overlaps idler window [{}, {}]; the exchange term is neglected",
            s.lo(),
            s.hi(),
            i.lo(),
            i.hi()
        );
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    }
}

/// Build the kernel, doubling the grids until the moments change by less
/// than `config.threshold`.
pub fn build_kernel<T: Real>(
    amplitude: &JointAmplitude<T>,
    filter: &FilterProfile<T>,
    config: &MomentConfig<T>,
) -> Result<KernelMatrix<T>> {
    config.validate()?;
    let warning = support_overlap_warning(config);
    let mut previous: Option<MomentResult<T>> = None;
    let mut estimate = T::infinity();
    let mut points = config.idler.points;
    for level in 0..=config.refinement {
        let signal = config.signal.refined(level).nodes(config.rule)?;
        let idler = config.idler.refined(level).nodes(config.rule)?;
        let mut kernel = KernelMatrix::assemble(amplitude, filter, &signal, &idler)?;
        let current = compute_moments(&kernel)?;
        points = kernel.dim();
        if let Some(prev) = &previous {
            estimate = relative_change(prev, &current);
            log::debug!("kernel level {level}: {points} points, relative change {:e}", estimate.as_f64());
            if estimate <= config.threshold {
                kernel.error_estimate = estimate;
                kernel.warnings.extend(warning);
                return Ok(kernel);
            }
        }
        previous = Some(current);
    }
    Err(Error::Convergence {
        estimate: estimate.as_f64(),
        threshold: config.threshold.as_f64(),
        points,
    })
}

/// χ behind a filter: [`build_kernel`] followed by [`compute_moments`].
pub fn chi_filtered<T: Real>(
    amplitude: &JointAmplitude<T>,
    filter: &FilterProfile<T>,
    config: &MomentConfig<T>,
) -> Result<MomentResult<T>> {
    compute_moments(&build_kernel(amplitude, filter, config)?)
}

/// χ₀ = J₄/J₂² without a filter (F ≡ 1 over the signal window).
pub fn chi_unfiltered<T: Real>(amplitude: &JointAmplitude<T>, config: &MomentConfig<T>) -> Result<MomentResult<T>> {
    chi_filtered(amplitude, &FilterProfile::Unity, config)
}

/// `χ = r̃/√(1+r̃²)` for Gaussian pump and filter with unity phase matching.
pub fn chi_closed_form<T: Real>(r_tilde: T) -> Result<T> {
    if !(r_tilde > T::zero()) || r_tilde.is_nan() {
        return Err(domain(format!("r̃ must be positive, got {r_tilde}")));
    }
    if r_tilde.is_infinite() {
        return Ok(T::one());
    }
    Ok(r_tilde / T::one().hypot(r_tilde))
}

/// Intermediate widths of the Gaussian square-completion route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianIntermediates<T> {
    /// `1/Γ² = 1/Δ_F² + 1/(2Δ_p²)`.
    pub gamma: T,
    /// `1/Γ'² = 1/Γ² − Γ²/(4Δ_p⁴)`.
    pub gamma_prime: T,
    /// `ΓΓ'/Δ_F²`, equal to [`chi_closed_form`] of `Δ_p/Δ_F`.
    pub chi: T,
}

pub fn gaussian_intermediates<T: Real>(pump_width: T, filter_width: T) -> Result<GaussianIntermediates<T>> {
    if !(pump_width > T::zero()) || !(filter_width > T::zero()) {
        return Err(domain("Gaussian widths must be positive"));
    }
    let p2 = pump_width * pump_width;
    let inv_gamma2 = T::one() / (filter_width * filter_width) + T::one() / (two::<T>() * p2);
    let gamma2 = T::one() / inv_gamma2;
    let inv_gamma_prime2 = inv_gamma2 - gamma2 / (two::<T>() * two::<T>() * p2 * p2);
    let gamma = gamma2.sqrt();
    let gamma_prime = (T::one() / inv_gamma_prime2).sqrt();
    Ok(GaussianIntermediates { gamma, gamma_prime, chi: gamma * gamma_prime / (filter_width * filter_width) })
}

/// Gaussian pump and filter with unity phase matching at spectral ratio
/// `r̃ = Δ_p/Δ_F` (Δ_F = 1). Carriers are spread so the signal and idler
/// windows never overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSetup<T> {
    pub amplitude: JointAmplitude<T>,
    pub filter: FilterProfile<T>,
}

impl<T: Real> GaussianSetup<T> {
    pub fn new(r_tilde: T) -> Result<Self> {
        if !(r_tilde > T::zero()) || !r_tilde.is_finite() {
            return Err(domain(format!("r̃ must be positive, got {r_tilde}")));
        }
        let signal = T::lit(10.0) * (two::<T>() + r_tilde);
        let pump = GaussianPump::new(T::zero(), r_tilde)?;
        let amplitude = JointAmplitude::new(pump, PhaseMatching::unity(signal, -signal)?);
        let filter = GaussianFilter::new(signal, T::one())?.into();
        Ok(Self { amplitude, filter })
    }

    pub fn config(&self, points: usize) -> Result<MomentConfig<T>> {
        MomentConfig::auto(&self.amplitude, &self.filter, points)
    }

    pub fn chi(&self, points: usize) -> Result<MomentResult<T>> {
        chi_filtered(&self.amplitude, &self.filter, &self.config(points)?)
    }
}
