//! Direct quadrature of the double-pulse coincidence rate.
//!
//! With `𝒫(ω, ω̃) = (1 + e^{i(ω+ω̃)τ}) G(ω, ω̃)` the filtered photon in the
//! time domain is `a(t, ω̃) = ∫ dω e^{−iωt} f(ω) 𝒫(ω, ω̃)`, and detection in
//! the window `T ± ΔT` gives the kernel
//! `Q_T(ω̃, ω̃') = ∫_{T−ΔT}^{T+ΔT} dt a(t, ω̃) a*(t, ω̃')`. The two surviving
//! rate terms are `R₁ = Tr Q_{T_c} · Tr Q_{T_d}` and
//! `R₂ = Tr(Q_{T_c} Q_{T_d})`; no phase averaging is assumed.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::moments::{weighted_gram, MomentConfig};
use crate::quadrature::{Nodes, QuadratureRule};
use crate::scalar::{two, Real};
use crate::spectra::{FilterProfile, JointAmplitude};

/// Smallest pulse separation, in pump coherence times `1/Δp`, accepted.
pub const MIN_SEPARATION_WIDTHS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStructureConfig<T> {
    /// Pulse separation τ in units of `1/Δp`.
    pub tau_widths: T,
    /// Detection half-window ΔT as a fraction of τ.
    pub window_fraction: T,
    /// Node counts; `None` sizes them from the oscillation of the phase
    /// factors across each window.
    pub signal_points: Option<usize>,
    pub idler_points: Option<usize>,
    pub time_points: Option<usize>,
}

impl<T: Real> TimeStructureConfig<T> {
    pub fn new(tau_widths: T) -> Self {
        Self { tau_widths, window_fraction: T::lit(0.25), signal_points: None, idler_points: None, time_points: None }
    }

    pub fn with_points(mut self, signal: usize, idler: usize, time: usize) -> Self {
        self.signal_points = Some(signal);
        self.idler_points = Some(idler);
        self.time_points = Some(time);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStructureReport<T> {
    pub tau: T,
    pub window: T,
    /// `R₁(T_c, T_d)`, index 0 ↔ `T = 0`, 1 ↔ `T = τ`.
    pub r1: [[T; 2]; 2],
    pub r2: [[T; 2]; 2],
    /// Total rate `R(τ/2, 0)` and `R(τ/2, τ)`.
    pub half_rate: [T; 2],
    /// `R₂(0,0) / R₁(0,0)`, the purity seen through the time windows.
    pub chi: T,
    /// `R_c / 2R_lat`
    pub ratio: T,
    /// Signal, idler and time node counts.
    pub points: [usize; 3],
}

impl<T: Real> TimeStructureReport<T> {
    pub fn peak_rate(&self) -> T {
        self.r1[0][0] + self.r2[0][0]
    }

    /// Largest relative deviation among the four `R₁` values.
    pub fn r1_spread(&self) -> T {
        let all = [self.r1[0][0], self.r1[0][1], self.r1[1][0], self.r1[1][1]];
        let hi = all.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = all.iter().copied().fold(T::infinity(), T::min);
        (hi - lo) / hi
    }

    /// `max |R₂(0,τ)|, |R₂(τ,0)|` over `R₂(0,0)`.
    pub fn r2_cross_ratio(&self) -> T {
        self.r2[0][1].abs().max(self.r2[1][0].abs()) / self.r2[0][0]
    }

    /// Rate with `T_c = τ/2` relative to the peak rate.
    pub fn half_rate_ratio(&self) -> T {
        self.half_rate[0].abs().max(self.half_rate[1].abs()) / self.peak_rate()
    }
}

fn auto_points(kappa: f64) -> usize {
    let n = (0.75 * kappa).ceil() as usize + 64;
    n.div_ceil(16) * 16
}

type Rows<T> = Vec<(Vec<T>, Vec<T>)>;

/// Rows `a(t_l, ω̃_j)` over `l` for each idler node `j`.
fn time_amplitudes<T: Real>(h: &Rows<T>, signal: &Nodes<T>, times: &Nodes<T>) -> Rows<T> {
    let n1 = signal.len();
    // E[l][i] = w_i e^{−iω_i t_l}
    let phases: Vec<(Vec<T>, Vec<T>)> = times
        .points
        .iter()
        .map(|&t| {
            let mut re = Vec::with_capacity(n1);
            let mut im = Vec::with_capacity(n1);
            for (&w, &q) in signal.points.iter().zip(&signal.weights) {
                let (s, c) = (w * t).sin_cos();
                re.push(q * c);
                im.push(-q * s);
            }
            (re, im)
        })
        .collect();
    h.par_iter()
        .map(|(hr, hi)| {
            let mut re = Vec::with_capacity(phases.len());
            let mut im = Vec::with_capacity(phases.len());
            for (er, ei) in &phases {
                let mut sr = T::zero();
                let mut si = T::zero();
                for i in 0..n1 {
                    sr = sr + er[i] * hr[i] - ei[i] * hi[i];
                    si = si + er[i] * hi[i] + ei[i] * hr[i];
                }
                re.push(sr);
                im.push(si);
            }
            (re, im)
        })
        .collect()
}

/// Numerically checks that a double pulse separated by τ produces only the
/// central and lateral terms kept in the rate formulas.
///
/// Fails with a precondition error unless `τ·Δp ≥ 10`.
pub fn verify_time_structure<T: Real>(
    amplitude: &JointAmplitude<T>,
    filter: &FilterProfile<T>,
    config: &TimeStructureConfig<T>,
) -> Result<TimeStructureReport<T>> {
    if !(config.tau_widths >= T::lit(MIN_SEPARATION_WIDTHS)) {
        return Err(Error::Precondition(format!(
            "pulse separation of {} pump coherence times is too small; need at least {MIN_SEPARATION_WIDTHS} \
             for the pulses to be well separated",
            config.tau_widths
        )));
    }
    if !(config.window_fraction > T::zero() && config.window_fraction < T::lit(0.5)) {
        return Err(domain("detection window fraction must lie in (0, 0.5)"));
    }
    let dp = amplitude.pump.bandwidth();
    if !(dp > T::zero()) {
        return Err(domain("pump bandwidth must be positive"));
    }
    let tau = config.tau_widths / dp;
    let window = config.window_fraction * tau;
    let grids = MomentConfig::auto(amplitude, filter, 2)?;

    let h1 = grids.signal.halfwidth.as_f64();
    let h2 = grids.idler.halfwidth.as_f64();
    let n1 = config.signal_points.unwrap_or_else(|| auto_points(h1 * (tau + window).as_f64()));
    let n2 = config.idler_points.unwrap_or_else(|| auto_points(h2 * tau.as_f64()));
    let nt = config.time_points.unwrap_or_else(|| auto_points(2.0 * h1 * window.as_f64()));
    let rule = QuadratureRule::GaussLegendre;
    let signal = Nodes::new(rule, grids.signal.lo(), grids.signal.hi(), n1)?;
    let idler = Nodes::new(rule, grids.idler.lo(), grids.idler.hi(), n2)?;

    let f: Vec<T> = signal.points.iter().map(|&w| filter.amplitude(w)).collect::<Result<_>>()?;
    // h[j][i] = f(ω_i) (1 + e^{i(ω_i+ω̃_j)τ}) G(ω_i, ω̃_j)
    let h: Rows<T> = idler
        .points
        .par_iter()
        .map(|&w2| -> Result<(Vec<T>, Vec<T>)> {
            let mut re = Vec::with_capacity(n1);
            let mut im = Vec::with_capacity(n1);
            for (&w1, &fi) in signal.points.iter().zip(&f) {
                let (s, c) = ((w1 + w2) * tau).sin_cos();
                let p = amplitude.eval(w1, w2)? * Complex::new(T::one() + c, s) * fi;
                re.push(p.re);
                im.push(p.im);
            }
            Ok((re, im))
        })
        .collect::<Result<_>>()?;

    let kernel = |center: T| -> Result<Vec<Complex<T>>> {
        let times = Nodes::new(rule, center - window, center + window, nt)?;
        let rows = time_amplitudes(&h, &signal, &times);
        Ok(weighted_gram(&rows, &times.weights))
    };
    let q = [kernel(T::zero())?, kernel(tau)?, kernel(tau / two::<T>())?];

    let v = &idler.weights;
    let trace = |m: &[Complex<T>]| -> T { (0..n2).map(|j| v[j] * m[j * n2 + j].re).sum() };
    let product = |a: &[Complex<T>], b: &[Complex<T>]| -> T {
        (0..n2)
            .into_par_iter()
            .map(|j| {
                let mut s = T::zero();
                for k in 0..n2 {
                    s = s + v[k] * (a[j * n2 + k] * b[k * n2 + j]).re;
                }
                v[j] * s
            })
            .collect::<Vec<T>>()
            .into_iter()
            .sum()
    };
    let s = [trace(&q[0]), trace(&q[1]), trace(&q[2])];
    let mut r1 = [[T::zero(); 2]; 2];
    let mut r2 = [[T::zero(); 2]; 2];
    for c in 0..2 {
        for d in 0..2 {
            r1[c][d] = s[c] * s[d];
            r2[c][d] = product(&q[c], &q[d]);
        }
    }
    let half_rate = [
        s[2] * s[0] + product(&q[2], &q[0]),
        s[2] * s[1] + product(&q[2], &q[1]),
    ];
    let rate = |c: usize, d: usize| r1[c][d] + r2[c][d];
    let central = rate(0, 0) + rate(1, 1);
    let lateral = (rate(0, 1) + rate(1, 0)) / two::<T>();
    Ok(TimeStructureReport {
        tau,
        window,
        r1,
        r2,
        half_rate,
        chi: r2[0][0] / r1[0][0],
        ratio: central / (two::<T>() * lateral),
        points: [n1, n2, nt],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::GaussianSetup;

    #[test]
    fn rejects_close_pulses() {
        let g = GaussianSetup::<f64>::new(1.0).unwrap();
        let err = verify_time_structure(&g.amplitude, &g.filter, &TimeStructureConfig::new(3.0)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
