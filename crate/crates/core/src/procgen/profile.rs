use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One additive component of the radius derivative `dr/dh`.
///
/// `s = h / height` is the normalised height.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileTerm {
    /// Constant slope; on its own it yields a truncated cone.
    Linear { slope: f64 },
    /// `coefficient * s^degree`.
    Polynomial { coefficient: f64, degree: u32 },
    /// Derivative of `amplitude * sin(2π·frequency·s + phase)`, so the radius
    /// oscillates by `±amplitude` meters.
    Sinusoidal { amplitude: f64, frequency: f64, phase: f64 },
}

impl ProfileTerm {
    pub fn derivative(&self, h: f64, height: f64) -> f64 {
        let s = h / height;
        match *self {
            ProfileTerm::Linear { slope } => slope,
            ProfileTerm::Polynomial { coefficient, degree } => coefficient * s.powi(degree as i32),
            ProfileTerm::Sinusoidal {
                amplitude,
                frequency,
                phase,
            } => {
                let w = 2.0 * PI * frequency;
                amplitude * w / height * (w * s + phase).cos()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Linear,
    Polynomial,
    Sinusoidal,
}

/// Radius as a function of height, sampled on evenly spaced knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileFields")]
pub struct VesselProfile {
    terms: Vec<ProfileTerm>,
    base_radius: f64,
    height: f64,
    samples: usize,
    #[serde(skip)]
    radii: Vec<f64>,
}

#[derive(Deserialize)]
struct ProfileFields {
    terms: Vec<ProfileTerm>,
    base_radius: f64,
    height: f64,
    samples: usize,
}

impl TryFrom<ProfileFields> for VesselProfile {
    type Error = Error;

    fn try_from(f: ProfileFields) -> Result<Self> {
        VesselProfile::from_terms(f.terms, f.base_radius, f.height, f.samples)
    }
}

impl VesselProfile {
    /// Integrates the summed derivative with the trapezoid rule over `samples` knots.
    pub fn from_terms(terms: Vec<ProfileTerm>, base_radius: f64, height: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidConfig(format!("profile needs at least 2 samples, got {samples}")));
        }
        if !(height > 0.0 && base_radius > 0.0 && height.is_finite() && base_radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "base radius {base_radius} and height {height} must be positive"
            )));
        }
        let mut profile = VesselProfile {
            terms,
            base_radius,
            height,
            samples,
            radii: Vec::new(),
        };
        profile.integrate();
        Ok(profile)
    }

    fn integrate(&mut self) {
        let n = self.samples;
        let dh = self.height / (n - 1) as f64;
        let mut radii = Vec::with_capacity(n);
        let mut r = self.base_radius;
        let mut prev = self.derivative(0.0);
        radii.push(r);
        for j in 1..n {
            let d = self.derivative(self.knot_height(j));
            r += 0.5 * dh * (prev + d);
            radii.push(r);
            prev = d;
        }
        self.radii = radii;
    }

    fn knot_height(&self, j: usize) -> f64 {
        if j + 1 == self.samples {
            self.height
        } else {
            self.height * j as f64 / (self.samples - 1) as f64
        }
    }

    /// `dr/dh` at height `h`.
    pub fn derivative(&self, h: f64) -> f64 {
        self.terms.iter().map(|t| t.derivative(h, self.height)).sum()
    }

    pub fn terms(&self) -> &[ProfileTerm] {
        &self.terms
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Radii at the integration knots.
    pub fn knots(&self) -> &[f64] {
        &self.radii
    }

    /// Radius at the top rim.
    pub fn rim_radius(&self) -> f64 {
        self.radii[self.samples - 1]
    }

    /// Piecewise-linear radius between knots; `h` is clamped to `[0, height]`.
    pub fn radius_at(&self, h: f64) -> f64 {
        let n = self.samples;
        let s = (h / self.height).clamp(0.0, 1.0) * (n - 1) as f64;
        let j = (s.floor() as usize).min(n - 1);
        if j == n - 1 {
            return self.radii[n - 1];
        }
        let f = s - j as f64;
        self.radii[j] + f * (self.radii[j + 1] - self.radii[j])
    }

    /// Minimum radius over `[lo, hi]` (clamped to the profile).
    pub fn min_radius_between(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.clamp(0.0, self.height);
        let hi = hi.clamp(0.0, self.height);
        let n = self.samples;
        let step = self.height / (n - 1) as f64;
        let first = (lo / step).ceil() as usize;
        let last = ((hi / step).floor() as usize).min(n - 1);
        let mut m = self.radius_at(lo).min(self.radius_at(hi));
        for j in first..=last {
            m = m.min(self.radii[j]);
        }
        m
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Closed interval `[lo, hi]` to draw from uniformly.
pub type Interval = [f64; 2];

pub(crate) fn draw(rng: &mut ChaCha8Rng, range: Interval) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..=range[1])
    }
}

pub(crate) fn check_interval(name: &str, range: Interval) -> Result<()> {
    if !(range[0].is_finite() && range[1].is_finite() && range[0] <= range[1]) {
        return Err(Error::InvalidConfig(format!("{name} range {range:?} is not a valid interval")));
    }
    Ok(())
}

/// Ranges for random profile generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub term_count: [usize; 2],
    pub term_kinds: Vec<TermKind>,
    pub linear_slope: Interval,
    pub polynomial_degrees: Vec<u32>,
    pub polynomial_coefficient: Interval,
    /// Fraction of the base radius.
    pub sinusoid_amplitude: Interval,
    /// Cycles per vessel height.
    pub sinusoid_frequency: Interval,
    pub base_radius: Interval,
    pub height: Interval,
    pub samples: usize,
    pub min_radius: f64,
    pub max_retries: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            term_count: [1, 4],
            term_kinds: vec![TermKind::Linear, TermKind::Polynomial, TermKind::Sinusoidal],
            linear_slope: [-0.5, 0.5],
            polynomial_degrees: vec![2, 3],
            polynomial_coefficient: [-0.3, 0.3],
            sinusoid_amplitude: [0.0, 0.3],
            sinusoid_frequency: [0.5, 4.0],
            base_radius: [0.02, 0.08],
            height: [0.05, 0.25],
            samples: 1024,
            min_radius: 0.005,
            max_retries: 100,
        }
    }
}

impl ProfileConfig {
    pub fn validate(&self) -> Result<()> {
        if self.term_count[0] > self.term_count[1] {
            return Err(Error::InvalidConfig(format!("term_count {:?} is not a valid range", self.term_count)));
        }
        if self.term_count[1] > 0 && self.term_kinds.is_empty() {
            return Err(Error::InvalidConfig("term_kinds is empty".into()));
        }
        if self.term_kinds.contains(&TermKind::Polynomial) && self.polynomial_degrees.is_empty() {
            return Err(Error::InvalidConfig("polynomial_degrees is empty".into()));
        }
        for (name, r) in [
            ("linear_slope", self.linear_slope),
            ("polynomial_coefficient", self.polynomial_coefficient),
            ("sinusoid_amplitude", self.sinusoid_amplitude),
            ("sinusoid_frequency", self.sinusoid_frequency),
            ("base_radius", self.base_radius),
            ("height", self.height),
        ] {
            check_interval(name, r)?;
        }
        if self.base_radius[0] <= 0.0 || self.height[0] <= 0.0 {
            return Err(Error::InvalidConfig("base_radius and height must be positive".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidConfig("samples must be at least 2".into()));
        }
        Ok(())
    }

    fn draw_term(&self, rng: &mut ChaCha8Rng, base_radius: f64) -> ProfileTerm {
        let kind = self.term_kinds[rng.random_range(0..self.term_kinds.len())];
        match kind {
            TermKind::Linear => ProfileTerm::Linear {
                slope: draw(rng, self.linear_slope),
            },
            TermKind::Polynomial => ProfileTerm::Polynomial {
                degree: self.polynomial_degrees[rng.random_range(0..self.polynomial_degrees.len())],
                coefficient: draw(rng, self.polynomial_coefficient),
            },
            TermKind::Sinusoidal => ProfileTerm::Sinusoidal {
                amplitude: draw(rng, self.sinusoid_amplitude) * base_radius,
                frequency: draw(rng, self.sinusoid_frequency),
                phase: rng.random_range(0.0..2.0 * PI),
            },
        }
    }
}

/// Random profile for `seed`; see [`generate_profile_from`].
pub fn generate_profile(seed: u64, cfg: &ProfileConfig) -> Result<VesselProfile> {
    generate_profile_from(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
}

/// Draws base radius and height once, then redraws derivative terms until the
/// radius stays above `min_radius` on every knot: one attempt plus up to
/// `max_retries` redraws.
pub fn generate_profile_from(rng: &mut ChaCha8Rng, cfg: &ProfileConfig) -> Result<VesselProfile> {
    cfg.validate()?;
    let base_radius = draw(rng, cfg.base_radius);
    let height = draw(rng, cfg.height);
    let mut lowest = f64::NAN;
    for _ in 0..=cfg.max_retries {
        let count = rng.random_range(cfg.term_count[0]..=cfg.term_count[1]);
        let terms = (0..count).map(|_| cfg.draw_term(rng, base_radius)).collect();
        let profile = VesselProfile::from_terms(terms, base_radius, height, cfg.samples)?;
        lowest = profile.min_radius();
        if lowest > cfg.min_radius {
            return Ok(profile);
        }
    }
    Err(Error::GenerationFailed {
        retries: cfg.max_retries,
        reason: format!(
            "radius fell to {lowest:.4} m (minimum {} m) with base radius {base_radius:.4} m",
            cfg.min_radius
        ),
    })
}
