use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const DEFAULT_PERIOD_NS: f64 = 13.0;
pub const DEFAULT_BIN_NS: f64 = 0.1;
/// Half-width of the integration window around each peak.
pub const DEFAULT_GATE_NS: f64 = 1.0;
/// Pulses per independently seeded batch.
pub const BATCH_PULSES: u64 = 1 << 16;

/// Which multi-pulse events enter the histogram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationMode {
    /// Drop side-peak coincidences between consecutive pulses that together
    /// hold more than two pairs. Keeps both peaks at the same (second) order
    /// in the pair probability, as in the two-pair expansion.
    #[default]
    Window,
    /// Independent pulses, every coincidence counted. `R_side` then picks up
    /// `O(P₂P₄)` terms and the ratio is biased low at large `P₂`.
    PerPulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub period_ns: f64,
    pub pulses: u64,
    pub p2: f64,
    pub chi: f64,
    /// Detection efficiency of D+ and D−.
    pub efficiency: [f64; 2],
    /// Dark-click probability per detector per gate.
    pub dark: f64,
    pub seed: u64,
    pub bin_ns: f64,
    /// Detector gate length; dark clicks are uniform inside it. Defaults to
    /// the full pulse period (free-running detectors).
    pub gate_ns: f64,
    /// Half-width of the peak integration windows.
    pub peak_window_ns: f64,
    pub truncation: TruncationMode,
}

impl ExperimentConfig {
    pub fn new(p2: f64, chi: f64, pulses: u64, seed: u64) -> Self {
        Self {
            period_ns: DEFAULT_PERIOD_NS,
            pulses,
            p2,
            chi,
            efficiency: [1.0, 1.0],
            dark: 0.0,
            seed,
            bin_ns: DEFAULT_BIN_NS,
            gate_ns: DEFAULT_PERIOD_NS,
            peak_window_ns: DEFAULT_GATE_NS,
            truncation: TruncationMode::Window,
        }
    }

    pub fn with_efficiency(mut self, eta: f64) -> Self {
        self.efficiency = [eta, eta];
        self
    }

    pub fn with_efficiencies(mut self, plus: f64, minus: f64) -> Self {
        self.efficiency = [plus, minus];
        self
    }

    pub fn with_dark(mut self, dark: f64) -> Self {
        self.dark = dark;
        self
    }

    /// Sets the period and resets the gate to span it.
    pub fn with_period(mut self, period_ns: f64) -> Self {
        self.period_ns = period_ns;
        self.gate_ns = period_ns;
        self
    }

    pub fn with_bin(mut self, bin_ns: f64) -> Self {
        self.bin_ns = bin_ns;
        self
    }

    pub fn with_gate(mut self, gate_ns: f64) -> Self {
        self.gate_ns = gate_ns;
        self
    }

    pub fn with_peak_window(mut self, half_width_ns: f64) -> Self {
        self.peak_window_ns = half_width_ns;
        self
    }

    pub fn with_truncation(mut self, truncation: TruncationMode) -> Self {
        self.truncation = truncation;
        self
    }

    /// `P₄ = (P₂²/2)(1 + χ)`
    pub fn p4(&self) -> f64 {
        0.5 * self.p2 * self.p2 * (1.0 + self.chi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulses == 0 {
            return Err(Error::EmptyRun);
        }
        if !(0.0..=1.0).contains(&self.p2) {
            return Err(domain(format!("P2 = {} outside [0, 1]", self.p2)));
        }
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(domain(format!("chi = {} outside [0, 1]", self.chi)));
        }
        if self.p2 + self.p4() > 1.0 {
            return Err(domain(format!(
                "P2 + P4 = {} exceeds 1; the two-pair truncation is invalid",
                self.p2 + self.p4()
            )));
        }
        for eta in self.efficiency {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(domain(format!("efficiency {eta} outside (0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.dark) {
            return Err(domain(format!("dark-count probability {} outside [0, 1)", self.dark)));
        }
        if !(self.bin_ns > 0.0 && self.period_ns.is_finite()) || self.period_ns < 20.0 * self.bin_ns {
            return Err(domain(format!(
                "pulse period {} ns must be much longer than the TAC bin {} ns",
                self.period_ns, self.bin_ns
            )));
        }
        if !(self.gate_ns > 0.0 && self.gate_ns <= self.period_ns) {
            return Err(domain(format!("gate {} ns must lie in (0, period]", self.gate_ns)));
        }
        if !(self.peak_window_ns > 0.0 && self.peak_window_ns < 0.5 * self.period_ns) {
            return Err(domain(format!(
                "peak window {} ns must be positive and below half the period",
                self.peak_window_ns
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center_ns: f64,
    pub counts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    pub minus: Peak,
    pub zero: Peak,
    pub plus: Peak,
}

/// START(D+) → STOP(D−) delay histogram, bins centred on multiples of the
/// bin width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TacHistogram {
    pub bin_ns: f64,
    pub period_ns: f64,
    pub counts: Vec<u64>,
    pub peaks: PeakSummary,
    /// Cross-pulse coincidences dropped by [`TruncationMode::Window`].
    pub excluded: u64,
    /// Clicks per detector.
    pub singles: [u64; 2],
    pub pulses: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Central-peak coincidences per pulse.
    pub r0: f64,
    pub rside_plus: f64,
    pub rside_minus: f64,
    /// `R₀ / R_side(+Δτ)`
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub seed: u64,
    pub pulses: u64,
}

impl TacHistogram {
    fn half(&self) -> usize {
        self.counts.len() / 2
    }

    pub fn centers(&self) -> Vec<f64> {
        let half = self.half() as f64;
        (0..self.counts.len()).map(|i| (i as f64 - half) * self.bin_ns).collect()
    }

    /// `counts.len() + 1` bin edges.
    pub fn edges(&self) -> Vec<f64> {
        let half = self.half() as f64;
        (0..=self.counts.len()).map(|i| (i as f64 - half - 0.5) * self.bin_ns).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn summary(&self) -> Result<RunSummary> {
        let n0 = self.peaks.zero.counts as f64;
        let np = self.peaks.plus.counts as f64;
        if np == 0.0 {
            return Err(Error::Degenerate("no counts in the +period side peak".into()));
        }
        let ratio = n0 / np;
        let stderr = if n0 > 0.0 { ratio * (1.0 / n0 + 1.0 / np).sqrt() } else { 1.0 / np };
        let per = |n: u64| n as f64 / self.pulses as f64;
        Ok(RunSummary {
            r0: per(self.peaks.zero.counts),
            rside_plus: per(self.peaks.plus.counts),
            rside_minus: per(self.peaks.minus.counts),
            ratio,
            ratio_stderr: stderr,
            seed: self.seed,
            pulses: self.pulses,
        })
    }

    /// `delay_ns,counts`, one row per bin centre.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["delay_ns", "counts"])?;
        for (t, c) in self.centers().into_iter().zip(&self.counts) {
            let t = (t * 1e9).round() / 1e9;
            w.write_record([format!("{t}"), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Pulse {
    pairs: u8,
    /// Click offset from the pulse time, per detector.
    click: [Option<f64>; 2],
}

struct Binning {
    bin: f64,
    half: i64,
    range: f64,
}

impl Binning {
    fn new(config: &ExperimentConfig) -> Self {
        let range = 1.5 * config.period_ns;
        let half = (range / config.bin_ns).ceil() as i64;
        Self { bin: config.bin_ns, half, range }
    }

    fn len(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    fn index(&self, delay: f64) -> Option<usize> {
        if delay.abs() > self.range {
            return None;
        }
        let i = (delay / self.bin).round() as i64 + self.half;
        (0..self.len() as i64).contains(&i).then_some(i as usize)
    }
}

struct Batch {
    counts: Vec<u64>,
    excluded: u64,
    singles: [u64; 2],
    first: Pulse,
    last: Pulse,
}

struct Tally<'a> {
    config: &'a ExperimentConfig,
    binning: &'a Binning,
    counts: Vec<u64>,
    excluded: u64,
}

impl Tally<'_> {
    /// START in `start`, STOP in the pulse `offset` periods later.
    fn pair(&mut self, start: &Pulse, stop: &Pulse, offset: i32) {
        let (Some(ts), Some(tp)) = (start.click[0], stop.click[1]) else {
            return;
        };
        if offset != 0 && self.config.truncation == TruncationMode::Window && start.pairs + stop.pairs > 2 {
            self.excluded += 1;
            return;
        }
        let delay = offset as f64 * self.config.period_ns + tp - ts;
        if let Some(i) = self.binning.index(delay) {
            self.counts[i] += 1;
        }
    }

    /// All coincidences between two consecutive pulses, both orderings.
    fn neighbours(&mut self, earlier: &Pulse, later: &Pulse) {
        self.pair(earlier, later, 1);
        self.pair(later, earlier, -1);
    }
}

fn draw_pulse(rng: &mut ChaCha8Rng, config: &ExperimentConfig, p4: f64) -> Pulse {
    let u: f64 = rng.gen();
    let pairs = if u < p4 {
        2
    } else if u < p4 + config.p2 {
        1
    } else {
        0
    };
    let mut click = [None; 2];
    for _ in 0..pairs {
        let d = rng.gen::<bool>() as usize;
        if rng.gen::<f64>() < config.efficiency[d] {
            click[d] = Some(0.0);
        }
    }
    if config.dark > 0.0 {
        for slot in &mut click {
            if rng.gen::<f64>() < config.dark {
                let t = (rng.gen::<f64>() - 0.5) * config.gate_ns;
                // threshold detector: first arrival wins
                *slot = Some(slot.map_or(t, |s: f64| s.min(t)));
            }
        }
    }
    Pulse { pairs, click }
}

fn run_batch(config: &ExperimentConfig, binning: &Binning, index: u64) -> Batch {
    let start = index * BATCH_PULSES;
    let len = BATCH_PULSES.min(config.pulses - start) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let p4 = config.p4();
    let pulses: Vec<Pulse> = (0..len).map(|_| draw_pulse(&mut rng, config, p4)).collect();

    let mut tally = Tally { config, binning, counts: vec![0; binning.len()], excluded: 0 };
    let mut singles = [0u64; 2];
    for (n, p) in pulses.iter().enumerate() {
        for (d, s) in singles.iter_mut().enumerate() {
            *s += p.click[d].is_some() as u64;
        }
        tally.pair(p, p, 0);
        if n + 1 < len {
            tally.neighbours(p, &pulses[n + 1]);
        }
    }
    Batch { counts: tally.counts, excluded: tally.excluded, singles, first: pulses[0], last: pulses[len - 1] }
}

/// Monte Carlo run of the pulsed coincidence experiment.
///
/// Batches of [`BATCH_PULSES`] pulses run in parallel, each on a ChaCha8
/// stream selected by its index, so the result depends only on the seed.
pub fn simulate_pulse_train(config: &ExperimentConfig) -> Result<TacHistogram> {
    config.validate()?;
    if config.p2 > 0.3 {
        log::warn!("P2 = {} > 0.3: six-photon events are not negligible", config.p2);
    }
    let binning = Binning::new(config);
    let n_batches = config.pulses.div_ceil(BATCH_PULSES);
    let batches: Vec<Batch> = (0..n_batches).into_par_iter().map(|b| run_batch(config, &binning, b)).collect();

    let mut tally = Tally { config, binning: &binning, counts: vec![0; binning.len()], excluded: 0 };
    let mut singles = [0u64; 2];
    for (b, batch) in batches.iter().enumerate() {
        for (acc, c) in tally.counts.iter_mut().zip(&batch.counts) {
            *acc += c;
        }
        tally.excluded += batch.excluded;
        singles[0] += batch.singles[0];
        singles[1] += batch.singles[1];
        if b > 0 {
            tally.neighbours(&batches[b - 1].last, &batch.first);
        }
    }

    let mut hist = TacHistogram {
        bin_ns: config.bin_ns,
        period_ns: config.period_ns,
        counts: tally.counts,
        peaks: PeakSummary {
            minus: Peak { center_ns: -config.period_ns, counts: 0 },
            zero: Peak { center_ns: 0.0, counts: 0 },
            plus: Peak { center_ns: config.period_ns, counts: 0 },
        },
        excluded: tally.excluded,
        singles,
        pulses: config.pulses,
        seed: config.seed,
    };
    let centers = hist.centers();
    let tol = 1e-9 * config.bin_ns;
    for peak in [&mut hist.peaks.minus, &mut hist.peaks.zero, &mut hist.peaks.plus] {
        peak.counts = centers
            .iter()
            .zip(&hist.counts)
            .filter(|(t, _)| (*t - peak.center_ns).abs() <= config.peak_window_ns + tol)
            .map(|(_, c)| c)
            .sum();
    }
    Ok(hist)
}
