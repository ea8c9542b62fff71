//! Spectral profiles of the pump, the phase-matching envelope and the
//! interference filter, and the joint two-photon amplitude they compose.
//!
//! Frequencies are dimensionless: a detuning divided by a reference
//! bandwidth chosen by the caller. Physical units only appear in
//! [`coherence_time_from_filter`] and the pump-duration conversions.

use std::io::Read;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{Nodes, QuadratureRule};
use crate::scalar::{two, Real};

/// Number of canonical widths kept on each side of a Gaussian profile.
pub const DEFAULT_TRUNCATION_WIDTHS: f64 = 8.0;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative filter bandwidth above which the Gaussian-transmission
/// coherence-time formula is flagged as approximate.
pub const GAUSSIAN_FILTER_ACCURACY_LIMIT: f64 = 0.02;

/// Symmetric sampling window on one frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid<T> {
    pub center: T,
    pub halfwidth: T,
    pub points: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(center: T, halfwidth: T, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(domain(format!("grid needs at least 2 points, got {points}")));
        }
        if !(halfwidth > T::zero()) || !halfwidth.is_finite() || !center.is_finite() {
            return Err(domain(format!("grid halfwidth must be positive and finite, got {halfwidth}")));
        }
        Ok(Self { center, halfwidth, points })
    }

    pub fn lo(&self) -> T {
        self.center - self.halfwidth
    }

    pub fn hi(&self) -> T {
        self.center + self.halfwidth
    }

    pub fn nodes(&self, rule: QuadratureRule) -> Result<Nodes<T>> {
        Nodes::new(rule, self.lo(), self.hi(), self.points)
    }

    /// Same window with `points` multiplied by `2^level`.
    pub fn refined(&self, level: u32) -> Self {
        Self { points: self.points << level, ..*self }
    }

    pub fn shifted(&self, delta: T) -> Self {
        Self { center: self.center + delta, ..*self }
    }

    pub fn contains(&self, omega: T) -> bool {
        omega >= self.lo() && omega <= self.hi()
    }
}

/// How a pump width or duration passed to [`make_gaussian_pump`] is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthConvention {
    /// The σ of `g(ω) ∝ exp(-(ω-Ω)²/4σ²)`, i.e. the rms width of the
    /// spectral intensity `|g|²`. A duration in this convention is the rms
    /// width of the temporal intensity, `σ_t = 1/(2σ)`.
    AmplitudeSigma,
    /// Full width at half maximum of the intensity (spectral or temporal).
    IntensityFwhm,
}

/// Pump width input: either a spectral width or a pulse duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpWidth<T> {
    /// Spectral width in scaled frequency units.
    Spectral(T),
    /// Pulse duration in inverse scaled frequency units (fs when the
    /// reference bandwidth is 1 rad/fs).
    Duration(T),
}

/// Record of how the stored canonical width was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthConversion<T> {
    pub input: PumpWidth<T>,
    pub convention: WidthConvention,
    /// Spectral inputs: `width = factor * input`. Durations: `width = factor / input`.
    pub factor: T,
}

/// Transform-limited Gaussian pump spectrum
/// `g(ω) = sqrt(norm) (2πΔ²)^(-1/4) exp(-(ω-Ω_p)²/(4Δ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPump<T> {
    pub carrier: T,
    /// Canonical width Δ_p (see [`WidthConvention::AmplitudeSigma`]).
    pub width: T,
    /// `∫|g|² dω`.
    pub norm: T,
    pub conversion: Option<WidthConversion<T>>,
}

impl<T: Real> GaussianPump<T> {
    pub fn new(carrier: T, width: T) -> Result<Self> {
        Self::with_norm(carrier, width, T::one())
    }

    pub fn with_norm(carrier: T, width: T, norm: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(domain(format!("pump width must be positive, got {width}")));
        }
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(domain(format!("pump normalization must be positive, got {norm}")));
        }
        Ok(Self { carrier, width, norm, conversion: None })
    }

    pub fn amplitude(&self, omega: T) -> T {
        let d = omega - self.carrier;
        let var = self.width * self.width;
        let prefactor = (self.norm * self.norm / (two::<T>() * T::PI() * var)).powf(T::lit(0.25));
        prefactor * (-(d * d) / (two::<T>() * two::<T>() * var)).exp()
    }

    /// Temporal intensity FWHM of the transform-limited pulse.
    pub fn duration_fwhm(&self) -> T {
        fwhm_duration_factor::<T>() / self.width
    }
}

fn fwhm_duration_factor<T: Real>() -> T {
    // |g|² ∝ exp(-ω²/2Δ²) ⇒ temporal intensity ∝ exp(-2Δ²t²).
    (two::<T>() * T::LN_2()).sqrt()
}

fn fwhm_over_sigma<T: Real>() -> T {
    two::<T>() * (two::<T>() * T::LN_2()).sqrt()
}

/// Build a Gaussian pump from a width or a duration under an explicit convention.
pub fn make_gaussian_pump<T: Real>(
    carrier: T,
    input: PumpWidth<T>,
    convention: WidthConvention,
) -> Result<GaussianPump<T>> {
    let (value, factor, width) = match (input, convention) {
        (PumpWidth::Spectral(w), WidthConvention::AmplitudeSigma) => (w, T::one(), w),
        (PumpWidth::Spectral(w), WidthConvention::IntensityFwhm) => {
            let f = T::one() / fwhm_over_sigma::<T>();
            (w, f, f * w)
        }
        (PumpWidth::Duration(t), WidthConvention::AmplitudeSigma) => {
            let f = T::one() / two::<T>();
            (t, f, f / t)
        }
        (PumpWidth::Duration(t), WidthConvention::IntensityFwhm) => {
            let f = fwhm_duration_factor::<T>();
            (t, f, f / t)
        }
    };
    if !(value > T::zero()) || !value.is_finite() {
        return Err(domain(format!("pump width/duration must be positive, got {value}")));
    }
    let mut pump = GaussianPump::new(carrier, width)?;
    pump.conversion = Some(WidthConversion { input, convention, factor });
    Ok(pump)
}

/// Convert a canonical pump width back into the requested input form.
pub fn pump_width_as<T: Real>(pump: &GaussianPump<T>, duration: bool, convention: WidthConvention) -> T {
    match (duration, convention) {
        (false, WidthConvention::AmplitudeSigma) => pump.width,
        (false, WidthConvention::IntensityFwhm) => pump.width * fwhm_over_sigma::<T>(),
        (true, WidthConvention::AmplitudeSigma) => T::one() / (two::<T>() * pump.width),
        (true, WidthConvention::IntensityFwhm) => pump.duration_fwhm(),
    }
}

/// Gaussian interference filter with intensity
/// `F(ω) = peak · exp(-(ω-Ω₁)²/(2Δ_F²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFilter<T> {
    pub center: T,
    /// Intensity standard deviation Δ_F.
    pub width: T,
    pub peak: T,
}

impl<T: Real> GaussianFilter<T> {
    pub fn new(center: T, width: T) -> Result<Self> {
        Self::with_peak(center, width, T::one())
    }

    pub fn with_peak(center: T, width: T, peak: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(domain(format!("filter width must be positive, got {width}")));
        }
        if !(peak > T::zero() && peak <= T::one()) {
            return Err(domain(format!("peak transmission must lie in (0, 1], got {peak}")));
        }
        Ok(Self { center, width, peak })
    }

    pub fn intensity(&self, omega: T) -> T {
        let d = (omega - self.center) / self.width;
        self.peak * (-(d * d) / two::<T>()).exp()
    }
}

/// Piecewise-linear complex profile sampled on strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile<T> {
    omega: Vec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> TabulatedProfile<T> {
    pub fn new(omega: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::Table(format!(
                "{} frequencies but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.len() < 2 {
            return Err(Error::Table("need at least two samples".into()));
        }
        if !omega.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Table("omega column must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::Table("non-finite sample".into()));
        }
        Ok(Self { omega, values })
    }

    /// Read a profile from CSV with header `omega,re` or `omega,re,im`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let complex = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["omega", "re"] => false,
            ["omega", "re", "im"] => true,
            other => return Err(Error::Table(format!("unexpected header {other:?}"))),
        };
        let mut omega = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<T> {
                let text = record.get(i).unwrap_or("").trim();
                text.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Table(format!("row {}: column {i}: {e}", line + 2)))
            };
            omega.push(field(0)?);
            let re = field(1)?;
            let im = if complex { field(2)? } else { T::zero() };
            values.push(Complex::new(re, im));
        }
        Self::new(omega, values)
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn range(&self) -> (T, T) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn eval(&self, omega: T) -> Result<Complex<T>> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::OutOfRange { omega: omega.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let idx = self.omega.partition_point(|&w| w <= omega);
        if idx >= self.omega.len() {
            return Ok(self.values[self.omega.len() - 1]);
        }
        let i = idx.saturating_sub(1);
        let (w0, w1) = (self.omega[i], self.omega[i + 1]);
        let t = (omega - w0) / (w1 - w0);
        Ok(self.values[i] * (T::one() - t) + self.values[i + 1] * t)
    }

    fn support(&self) -> (T, T) {
        let (lo, hi) = self.range();
        ((lo + hi) / two::<T>(), (hi - lo) / two::<T>())
    }

    /// Intensity-weighted rms width `sqrt(<ω²> - <ω>²)` by the trapezoid rule.
    fn rms_width(&self) -> T {
        let mut m0 = T::zero();
        let mut m1 = T::zero();
        let mut m2 = T::zero();
        for i in 0..self.omega.len() - 1 {
            let h = (self.omega[i + 1] - self.omega[i]) / two::<T>();
            for j in [i, i + 1] {
                let p = self.values[j].norm_sqr() * h;
                m0 = m0 + p;
                m1 = m1 + p * self.omega[j];
                m2 = m2 + p * self.omega[j] * self.omega[j];
            }
        }
        if m0 <= T::zero() {
            return T::zero();
        }
        let mean = m1 / m0;
        (m2 / m0 - mean * mean).max(T::zero()).sqrt()
    }
}

/// Spectral amplitude of one pump pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PumpSpectrum<T> {
    Gaussian(GaussianPump<T>),
    Tabulated(TabulatedProfile<T>),
}

impl<T: Real> PumpSpectrum<T> {
    pub fn eval(&self, omega: T) -> Result<Complex<T>> {
        match self {
            PumpSpectrum::Gaussian(g) => Ok(Complex::new(g.amplitude(omega), T::zero())),
            PumpSpectrum::Tabulated(t) => t.eval(omega),
        }
    }

    /// `(center, halfwidth)` of the region where the amplitude is significant.
    pub fn support(&self) -> (T, T) {
        match self {
            PumpSpectrum::Gaussian(g) => (g.carrier, T::lit(DEFAULT_TRUNCATION_WIDTHS) * g.width),
            PumpSpectrum::Tabulated(t) => t.support(),
        }
    }

    /// Canonical spectral width Δ_p; the inverse is the pump coherence time.
    pub fn bandwidth(&self) -> T {
        match self {
            PumpSpectrum::Gaussian(g) => g.width,
            PumpSpectrum::Tabulated(t) => t.rms_width(),
        }
    }
}

impl<T> From<GaussianPump<T>> for PumpSpectrum<T> {
    fn from(g: GaussianPump<T>) -> Self {
        PumpSpectrum::Gaussian(g)
    }
}

/// Intensity transmission profile `F(ω)` placed before the detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FilterProfile<T> {
    Gaussian(GaussianFilter<T>),
    /// `F ≡ 1`; the integration window alone bounds the signal axis.
    Unity,
    /// Real intensity samples (the `re` column).
    Tabulated(TabulatedProfile<T>),
}

impl<T: Real> FilterProfile<T> {
    pub fn tabulated(profile: TabulatedProfile<T>) -> Result<Self> {
        if profile.values().iter().any(|v| v.re < T::zero() || v.im != T::zero()) {
            return Err(Error::Table("filter intensity must be real and nonnegative".into()));
        }
        Ok(FilterProfile::Tabulated(profile))
    }

    pub fn intensity(&self, omega: T) -> Result<T> {
        match self {
            FilterProfile::Gaussian(f) => Ok(f.intensity(omega)),
            FilterProfile::Unity => Ok(T::one()),
            FilterProfile::Tabulated(t) => Ok(t.eval(omega)?.re.max(T::zero())),
        }
    }

    /// Field transmission `f(ω) = sqrt(F(ω))`.
    pub fn amplitude(&self, omega: T) -> Result<T> {
        Ok(self.intensity(omega)?.sqrt())
    }

    pub fn support(&self) -> Option<(T, T)> {
        match self {
            FilterProfile::Gaussian(f) => Some((f.center, T::lit(DEFAULT_TRUNCATION_WIDTHS) * f.width)),
            FilterProfile::Unity => None,
            FilterProfile::Tabulated(t) => Some(t.support()),
        }
    }
}

impl<T> From<GaussianFilter<T>> for FilterProfile<T> {
    fn from(f: GaussianFilter<T>) -> Self {
        FilterProfile::Gaussian(f)
    }
}

/// Complex samples of Φ on a rectangular (signal × idler) grid, row-major in
/// the signal index, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchingTable<T> {
    signal: Vec<T>,
    idler: Vec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> PhaseMatchingTable<T> {
    pub fn new(signal: Vec<T>, idler: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        for (name, axis) in [("signal", &signal), ("idler", &idler)] {
            if axis.len() < 2 || !axis.windows(2).all(|w| w[1] > w[0]) {
                return Err(Error::Table(format!("{name} axis must have ≥2 strictly increasing nodes")));
            }
        }
        if values.len() != signal.len() * idler.len() {
            return Err(Error::Table(format!(
                "expected {} values, got {}",
                signal.len() * idler.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Table("non-finite phase-matching value".into()));
        }
        Ok(Self { signal, idler, values })
    }

    /// Sample `f` on the given axes.
    pub fn sample<F: FnMut(T, T) -> Complex<T>>(signal: Vec<T>, idler: Vec<T>, mut f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(signal.len() * idler.len());
        for &w1 in &signal {
            for &w2 in &idler {
                values.push(f(w1, w2));
            }
        }
        Self::new(signal, idler, values)
    }

    fn locate(axis: &[T], x: T) -> Result<(usize, T)> {
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { omega: x.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let i = axis.partition_point(|&w| w <= x).saturating_sub(1).min(axis.len() - 2);
        Ok((i, (x - axis[i]) / (axis[i + 1] - axis[i])))
    }

    pub fn eval(&self, w1: T, w2: T) -> Result<Complex<T>> {
        let (i, s) = Self::locate(&self.signal, w1)?;
        let (j, t) = Self::locate(&self.idler, w2)?;
        let n = self.idler.len();
        let v = |a: usize, b: usize| self.values[a * n + b];
        let one = T::one();
        Ok(v(i, j) * ((one - s) * (one - t))
            + v(i + 1, j) * (s * (one - t))
            + v(i, j + 1) * ((one - s) * t)
            + v(i + 1, j + 1) * (s * t))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhaseMatchingMode<T> {
    /// Φ ≡ 1.
    Unity,
    /// `exp(-(ω₁-Ω₁)²/4w₁²) · exp(-(ω₂-Ω₂)²/4w₂²)`; the idler factor is
    /// omitted when `idler_width` is `None`.
    Gaussian { signal_width: T, idler_width: Option<T> },
    Tabulated(PhaseMatchingTable<T>),
}

/// Phase-matching function Φ(ω₁, ω₂) with its signal and idler carriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatching<T> {
    pub mode: PhaseMatchingMode<T>,
    pub signal_carrier: T,
    pub idler_carrier: T,
}

impl<T: Real> PhaseMatching<T> {
    pub fn new(mode: PhaseMatchingMode<T>, signal_carrier: T, idler_carrier: T) -> Result<Self> {
        if signal_carrier == idler_carrier {
            return Err(domain("signal and idler carriers must differ (non-degenerate emission)"));
        }
        if let PhaseMatchingMode::Gaussian { signal_width, idler_width } = &mode {
            let ok = |w: T| w > T::zero() && w.is_finite();
            if !ok(*signal_width) || idler_width.is_some_and(|w| !ok(w)) {
                return Err(domain("phase-matching widths must be positive"));
            }
        }
        Ok(Self { mode, signal_carrier, idler_carrier })
    }

    pub fn unity(signal_carrier: T, idler_carrier: T) -> Result<Self> {
        Self::new(PhaseMatchingMode::Unity, signal_carrier, idler_carrier)
    }

    pub fn eval(&self, w1: T, w2: T) -> Result<Complex<T>> {
        match &self.mode {
            PhaseMatchingMode::Unity => Ok(Complex::new(T::one(), T::zero())),
            PhaseMatchingMode::Gaussian { signal_width, idler_width } => {
                let four = two::<T>() * two::<T>();
                let d1 = w1 - self.signal_carrier;
                let mut exponent = -(d1 * d1) / (four * *signal_width * *signal_width);
                if let Some(w) = idler_width {
                    let d2 = w2 - self.idler_carrier;
                    exponent = exponent - d2 * d2 / (four * *w * *w);
                }
                Ok(Complex::new(exponent.exp(), T::zero()))
            }
            PhaseMatchingMode::Tabulated(table) => table.eval(w1, w2),
        }
    }

    /// Window on the signal axis outside which Φ is negligible, if bounded.
    pub fn signal_support(&self) -> Option<(T, T)> {
        let k = T::lit(DEFAULT_TRUNCATION_WIDTHS);
        match &self.mode {
            PhaseMatchingMode::Unity => None,
            PhaseMatchingMode::Gaussian { signal_width, .. } => Some((self.signal_carrier, k * *signal_width)),
            PhaseMatchingMode::Tabulated(t) => {
                let (lo, hi) = (t.signal[0], t.signal[t.signal.len() - 1]);
                Some(((lo + hi) / two::<T>(), (hi - lo) / two::<T>()))
            }
        }
    }

    pub fn idler_support(&self) -> Option<(T, T)> {
        let k = T::lit(DEFAULT_TRUNCATION_WIDTHS);
        match &self.mode {
            PhaseMatchingMode::Unity => None,
            PhaseMatchingMode::Gaussian { idler_width, .. } => idler_width.map(|w| (self.idler_carrier, k * w)),
            PhaseMatchingMode::Tabulated(t) => {
                let (lo, hi) = (t.idler[0], t.idler[t.idler.len() - 1]);
                Some(((lo + hi) / two::<T>(), (hi - lo) / two::<T>()))
            }
        }
    }
}

/// Joint spectral amplitude `P(ω₁, ω₂) = pump(ω₁+ω₂) · Φ(ω₁, ω₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointAmplitude<T> {
    pub pump: PumpSpectrum<T>,
    pub phasematch: PhaseMatching<T>,
}

impl<T: Real> JointAmplitude<T> {
    pub fn new(pump: impl Into<PumpSpectrum<T>>, phasematch: PhaseMatching<T>) -> Self {
        Self { pump: pump.into(), phasematch }
    }

    pub fn eval(&self, w1: T, w2: T) -> Result<Complex<T>> {
        Ok(self.pump.eval(w1 + w2)? * self.phasematch.eval(w1, w2)?)
    }
}

/// Evaluate the joint amplitude at `(ω₁, ω₂)`.
pub fn eval_joint<T: Real>(amplitude: &JointAmplitude<T>, w1: T, w2: T) -> Result<Complex<T>> {
    amplitude.eval(w1, w2)
}

/// Coherence time of photons behind a Gaussian filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTime<T> {
    pub femtoseconds: T,
    /// Set when the filter is broad enough that the Gaussian-transmission
    /// assumption is known to underestimate the coherence time.
    pub approximate: bool,
}

/// `t_c = 0.44 λ² / (c Δλ)` for wavelength and FWHM bandwidth in nm, in fs.
pub fn coherence_time_from_filter<T: Real>(lambda_nm: T, bandwidth_nm: T) -> Result<CoherenceTime<T>> {
    if !(lambda_nm > T::zero()) || !(bandwidth_nm > T::zero()) || !lambda_nm.is_finite() || !bandwidth_nm.is_finite() {
        return Err(domain(format!(
            "wavelength and bandwidth must be positive, got λ={lambda_nm} nm, Δλ={bandwidth_nm} nm"
        )));
    }
    // nm²/nm = nm = 1e-9 m; divided by c in m/s gives s; ×1e15 for fs.
    let nm_over_c_in_fs = T::lit(1e-9 / SPEED_OF_LIGHT * 1e15);
    let femtoseconds = T::lit(0.44) * lambda_nm * lambda_nm / bandwidth_nm * nm_over_c_in_fs;
    let approximate = bandwidth_nm / lambda_nm > T::lit(GAUSSIAN_FILTER_ACCURACY_LIMIT);
    if approximate {
        log::warn!(
            "Gaussian filter approximation less accurate for Δλ={bandwidth_nm} nm at λ={lambda_nm} nm; coherence time may be underestimated"
        );
    }
    Ok(CoherenceTime { femtoseconds, approximate })
}

/// The ratio `r = t_c / Δt` of photon coherence time to pump duration.
pub fn coherence_ratio<T: Real>(coherence_time: T, pulse_duration: T) -> Result<T> {
    if !(coherence_time > T::zero()) || !(pulse_duration > T::zero()) {
        return Err(domain("coherence time and pulse duration must be positive"));
    }
    Ok(coherence_time / pulse_duration)
}

/// How the measured ratio `r = t_c/Δt` maps to the spectral ratio `Δ_p/Δ_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RatioConvention {
    /// `Δ_p/Δ_F = r`.
    #[default]
    SigmaRatio,
    /// Both FWHM quantities are converted to canonical widths: Δ_p from a
    /// transform-limited intensity FWHM duration and Δ_F from the filter
    /// bandwidth behind `t_c = 0.44 λ²/(cΔλ)`. Gives `Δ_p/Δ_F = r · 4 ln2 / (2π·0.44)`.
    FwhmRatio,
}

/// Spectral width ratio `Δ_p/Δ_F` corresponding to a coherence ratio `r`.
pub fn spectral_ratio<T: Real>(r: T, convention: RatioConvention) -> Result<T> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(domain(format!("ratio must be positive, got {r}")));
    }
    Ok(match convention {
        RatioConvention::SigmaRatio => r,
        RatioConvention::FwhmRatio => {
            r * two::<T>() * two::<T>() * T::LN_2() / (two::<T>() * T::PI() * T::lit(0.44))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unity_amp(width: f64) -> JointAmplitude<f64> {
        JointAmplitude::new(GaussianPump::new(0.0, width).unwrap(), PhaseMatching::unity(40.0, -40.0).unwrap())
    }

    #[test]
    fn grid_rejects_degenerate_windows() {
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        assert!(FrequencyGrid::new(0.0, 0.0, 8).is_err());
        assert!(FrequencyGrid::new(0.0, -1.0, 8).is_err());
        assert!(FrequencyGrid::<f64>::new(0.0, 1.0, 2).is_ok());
    }

    #[test]
    fn identity_convention_keeps_width() {
        let p = make_gaussian_pump(0.0, PumpWidth::Spectral(1.0), WidthConvention::AmplitudeSigma).unwrap();
        assert_eq!(p.width, 1.0);
        assert_eq!(p.conversion.unwrap().factor, 1.0);
    }

    #[test]
    fn nonpositive_pump_inputs_are_domain_errors() {
        for input in [PumpWidth::Spectral(0.0), PumpWidth::Duration(-3.0)] {
            let err = make_gaussian_pump(0.0, input, WidthConvention::IntensityFwhm).unwrap_err();
            assert!(matches!(err, Error::Domain(_)));
        }
    }

    #[test]
    fn conversions_round_trip() {
        for convention in [WidthConvention::AmplitudeSigma, WidthConvention::IntensityFwhm] {
            for x in [0.01f64, 0.7, 1.0, 250.0] {
                let p = make_gaussian_pump(0.0, PumpWidth::Duration(x), convention).unwrap();
                assert!((pump_width_as(&p, true, convention) - x).abs() < 1e-12 * x);
                let p = make_gaussian_pump(0.0, PumpWidth::Spectral(x), convention).unwrap();
                assert!((pump_width_as(&p, false, convention) - x).abs() < 1e-12 * x);
            }
        }
    }

    #[test]
    fn gaussian_pump_sum_frequency_peak() {
        let a = unity_amp(1.3);
        let peak = eval_joint(&a, 0.7, -0.7).unwrap().norm();
        for (x, y) in [(0.7, -0.5), (0.0, 0.3), (2.0, -1.0)] {
            assert!(eval_joint(&a, x, y).unwrap().norm() < peak);
        }
        assert_eq!(peak, a.pump.eval(0.0).unwrap().norm());
    }

    #[test]
    fn unity_phasematch_exchange_symmetry() {
        let a = unity_amp(0.9);
        for (x, y) in [(0.1, 0.4), (-3.0, 1.0), (5.0, -5.5)] {
            assert_eq!(eval_joint(&a, x, y).unwrap(), eval_joint(&a, y, x).unwrap());
        }
    }

    #[test]
    fn gaussian_phasematch_modulus_at_one_width() {
        let (s, i, w) = (40.0, -40.0, 0.8f64);
        let pm = PhaseMatching::new(PhaseMatchingMode::Gaussian { signal_width: w, idler_width: Some(1.7) }, s, i).unwrap();
        let pump = GaussianPump::new(0.0, 2.0).unwrap();
        let amp = JointAmplitude::new(pump, pm);
        let got = eval_joint(&amp, s + w, i).unwrap().norm();
        // Independent product of the two Gaussians.
        let pump_val = (2.0 * std::f64::consts::PI * 4.0f64).powf(-0.25) * (-(w * w) / 16.0).exp();
        let expected = pump_val * (-0.25f64).exp();
        assert!((got - expected).abs() < 1e-14 * expected);
        let ratio = got / eval_joint(&amp, s, i).unwrap().norm() / (-(w * w) / 16.0f64).exp();
        assert!((ratio - (-0.25f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_carriers_rejected() {
        assert!(PhaseMatching::<f64>::unity(1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_phasematch_out_of_range() {
        let table = PhaseMatchingTable::sample(vec![-1.0, 0.0, 1.0], vec![5.0, 6.0], |_, _| Complex::new(1.0, 0.5)).unwrap();
        let pm = PhaseMatching::new(PhaseMatchingMode::Tabulated(table), 0.0, 5.5).unwrap();
        let amp = JointAmplitude::new(GaussianPump::new(5.5, 1.0).unwrap(), pm);
        assert!(eval_joint(&amp, 0.5, 5.5).is_ok());
        assert!(matches!(eval_joint(&amp, 1.5, 5.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(eval_joint(&amp, 0.0, 7.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn bilinear_interpolation_reproduces_planes() {
        let f = |a: f64, b: f64| Complex::new(2.0 * a - b + 1.0, a + 3.0 * b);
        let table = PhaseMatchingTable::sample(vec![0.0, 0.5, 2.0], vec![-1.0, 1.0, 4.0], f).unwrap();
        for (a, b) in [(0.25, 0.0), (1.9, 3.3), (0.0, -1.0), (2.0, 4.0)] {
            let got = table.eval(a, b).unwrap();
            assert!((got - f(a, b)).norm() < 1e-12);
        }
    }

    #[test]
    fn csv_profiles() {
        let real = "omega,re\n-1,0\n0,1\n1,0\n";
        let p = TabulatedProfile::<f64>::from_csv(real.as_bytes()).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), Complex::new(0.5, 0.0));
        let cplx = "omega,re,im\n0,1,2\n2,3,4\n";
        let p = TabulatedProfile::<f64>::from_csv(cplx.as_bytes()).unwrap();
        assert_eq!(p.eval(1.0).unwrap(), Complex::new(2.0, 3.0));
        assert!(TabulatedProfile::<f64>::from_csv("omega,re\n1,0\n0,1\n".as_bytes()).is_err());
        assert!(TabulatedProfile::<f64>::from_csv("w,re\n0,1\n1,1\n".as_bytes()).is_err());
        assert!(TabulatedProfile::<f64>::from_csv("omega,re\n0,x\n1,1\n".as_bytes()).is_err());
        let neg = TabulatedProfile::<f64>::from_csv(real.replace("0,1", "0,-1").as_bytes()).unwrap();
        assert!(FilterProfile::tabulated(neg).is_err());
    }

    #[test]
    fn coherence_time_values() {
        // 0.44 · 1310² nm / 10 / c, evaluated independently: 251.869 fs.
        let ten = coherence_time_from_filter(1310.0f64, 10.0).unwrap();
        assert!((ten.femtoseconds - 251.868_911).abs() < 1e-5, "{}", ten.femtoseconds);
        assert!(!ten.approximate);
        let five = coherence_time_from_filter(1310.0f64, 5.0).unwrap();
        assert!((five.femtoseconds - 2.0 * ten.femtoseconds).abs() < 1e-12 * five.femtoseconds);
        let forty = coherence_time_from_filter(1310.0f64, 40.0).unwrap();
        assert!((forty.femtoseconds - 62.97).abs() < 0.01);
        assert!(forty.approximate);
        assert!(coherence_time_from_filter(0.0, 10.0).is_err());
        assert!(coherence_time_from_filter(1310.0, -1.0).is_err());
    }

    #[test]
    fn fwhm_ratio_convention_is_nearly_identity() {
        let k = spectral_ratio(1.0, RatioConvention::FwhmRatio).unwrap();
        assert!((k - 4.0 * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI * 0.44)).abs() < 1e-15);
        assert!((k - 1.0029).abs() < 1e-4);
        assert_eq!(spectral_ratio(2.5, RatioConvention::SigmaRatio).unwrap(), 2.5);
        assert!(spectral_ratio(0.0, RatioConvention::SigmaRatio).is_err());
    }
}
