//! Seeded synthetic trace generation.
//!
//! Linear-spring and sphere-on-halfspace contact models driven by
//! triangle-wave force profiles. These generators are the independent
//! ground truth against which every downstream estimator is checked:
//! a spring trace has one known stiffness, a contact trace has a known
//! closed-form force-displacement law, and noise is reproducible per seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::trace::{Channel, Trace};

/// Sphere-on-halfspace contact parameters. Moduli in kPa, radius in mm.
#[derive(Debug, Clone, Copy)]
pub struct HertzParams {
    /// Finger-pad elastic modulus, kPa.
    pub finger_modulus_kpa: f64,
    /// Stimulus sphere elastic modulus, kPa.
    pub sphere_modulus_kpa: f64,
    /// Finger Poisson ratio.
    pub nu_finger: f64,
    /// Sphere Poisson ratio. Cast elastomers behave nearly incompressibly.
    pub nu_sphere: f64,
    /// Sphere radius, mm.
    pub radius_mm: f64,
}

pub const DEFAULT_POISSON_RATIO: f64 = 0.475;

impl HertzParams {
    pub fn new(finger_modulus_kpa: f64, sphere_modulus_kpa: f64, radius_mm: f64) -> Result<Self> {
        let p = Self {
            finger_modulus_kpa,
            sphere_modulus_kpa,
            nu_finger: DEFAULT_POISSON_RATIO,
            nu_sphere: DEFAULT_POISSON_RATIO,
            radius_mm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_poisson(mut self, nu_finger: f64, nu_sphere: f64) -> Result<Self> {
        self.nu_finger = nu_finger;
        self.nu_sphere = nu_sphere;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.finger_modulus_kpa <= 0.0 || self.sphere_modulus_kpa <= 0.0 {
            return Err(Error::InvalidArgument("moduli must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.nu_finger) || !(0.0..0.5).contains(&self.nu_sphere) {
            return Err(Error::InvalidArgument(
                "Poisson ratios must lie in [0, 0.5)".into(),
            ));
        }
        if self.radius_mm <= 0.0 {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        Ok(())
    }

    /// Effective contact modulus in kPa:
    /// `1/E* = (1 - nu_f^2)/E_f + (1 - nu_s^2)/E_s`.
    pub fn effective_modulus_kpa(&self) -> f64 {
        1.0 / ((1.0 - self.nu_finger.powi(2)) / self.finger_modulus_kpa
            + (1.0 - self.nu_sphere.powi(2)) / self.sphere_modulus_kpa)
    }

    /// Indentation depth (mm) for a contact force (N).
    pub fn indentation_mm(&self, force_n: f64) -> f64 {
        if force_n <= 0.0 {
            return 0.0;
        }
        let e_star = self.effective_modulus_kpa() * 1e-3; // kPa -> N/mm^2
        (3.0 * force_n / (4.0 * e_star * self.radius_mm.sqrt())).powf(2.0 / 3.0)
    }

    /// Contact circle radius (mm) at an indentation depth (mm).
    pub fn contact_radius_mm(&self, indentation_mm: f64) -> f64 {
        (self.radius_mm * indentation_mm).max(0.0).sqrt()
    }
}

/// One generated trial: the commanded force, the resulting displacement,
/// and (for contact models) the contact circle radius per sample.
#[derive(Debug, Clone)]
pub struct SynthTrial {
    pub force: Trace,
    pub displacement: Trace,
    pub contact_radius_mm: Vec<f64>,
}

/// Triangle-wave force profile: linear rise at `rate_n_per_s` to
/// `peak_n`, then a symmetric fall back to zero. If the apex does not land
/// on the sampling grid an extra sample is inserted there, so the maximum
/// of the returned trace is exactly `peak_n`.
pub fn triangle_profile(rate_n_per_s: f64, peak_n: f64, sample_rate_hz: f64) -> Result<Trace> {
    if rate_n_per_s <= 0.0 || peak_n <= 0.0 || sample_rate_hz <= 0.0 {
        return Err(Error::InvalidArgument(
            "rate, peak, and sample rate must be positive".into(),
        ));
    }
    let t_apex = peak_n / rate_n_per_s;
    let duration = 2.0 * t_apex;
    let dt = 1.0 / sample_rate_hz;
    let steps = (duration / dt).floor() as usize;
    let mut t = Vec::with_capacity(steps + 2);
    let mut v = Vec::with_capacity(steps + 2);
    let mut apex_emitted = false;
    for i in 0..=steps {
        let ti = i as f64 * dt;
        if !apex_emitted && ti >= t_apex {
            if ti > t_apex {
                t.push(t_apex);
                v.push(peak_n);
            }
            apex_emitted = true;
        }
        t.push(ti);
        v.push(if ti <= t_apex {
            rate_n_per_s * ti
        } else {
            (2.0 * peak_n - rate_n_per_s * ti).max(0.0)
        });
    }
    if !apex_emitted {
        t.push(t_apex);
        v.push(peak_n);
    }
    Trace::new(t, v, Channel::Force)
}

fn noisy_displacement(
    clean_mm: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if noise_sigma < 0.0 {
        return Err(Error::InvalidArgument(
            "noise sigma must be non-negative".into(),
        ));
    }
    if noise_sigma == 0.0 {
        return Ok(clean_mm.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(clean_mm
        .iter()
        .map(|&d| d * (1.0 + normal.sample(&mut rng)))
        .collect())
}

/// Generates a contact trial from the closed-form sphere model. Noise is
/// multiplicative Gaussian on the displacement channel only; the force
/// profile is the commanded input and stays noise-free.
pub fn hertz_trace(
    params: &HertzParams,
    profile: &Trace,
    noise_sigma: f64,
    seed: u64,
) -> Result<SynthTrial> {
    params.validate()?;
    if profile.channel() != Channel::Force {
        return Err(Error::InvalidArgument(
            "profile must be a force trace".into(),
        ));
    }
    if profile.values().iter().any(|&f| f < 0.0) {
        return Err(Error::InvalidArgument(
            "force profile must be non-negative".into(),
        ));
    }
    let clean: Vec<f64> = profile
        .values()
        .iter()
        .map(|&f| params.indentation_mm(f))
        .collect();
    let radius: Vec<f64> = clean
        .iter()
        .map(|&d| params.contact_radius_mm(d))
        .collect();
    let noisy = noisy_displacement(&clean, noise_sigma, seed)?;
    let displacement = Trace::new(profile.times().to_vec(), noisy, Channel::Displacement)?
        .with_meta(format!(
            "hertz E_f={} E_s={} R={} sigma={} seed={}",
            params.finger_modulus_kpa,
            params.sphere_modulus_kpa,
            params.radius_mm,
            noise_sigma,
            seed
        ));
    Ok(SynthTrial {
        force: profile.clone(),
        displacement,
        contact_radius_mm: radius,
    })
}

/// Generates a linear-spring trial: displacement is `F / k` pointwise.
pub fn spring_trace(
    stiffness_n_per_mm: f64,
    profile: &Trace,
    noise_sigma: f64,
    seed: u64,
) -> Result<SynthTrial> {
    if stiffness_n_per_mm <= 0.0 {
        return Err(Error::InvalidArgument("stiffness must be positive".into()));
    }
    if profile.channel() != Channel::Force {
        return Err(Error::InvalidArgument(
            "profile must be a force trace".into(),
        ));
    }
    let clean: Vec<f64> = profile
        .values()
        .iter()
        .map(|&f| f / stiffness_n_per_mm)
        .collect();
    let noisy = noisy_displacement(&clean, noise_sigma, seed)?;
    let displacement = Trace::new(profile.times().to_vec(), noisy, Channel::Displacement)?
        .with_meta(format!(
            "spring k={stiffness_n_per_mm} sigma={noise_sigma} seed={seed}"
        ));
    Ok(SynthTrial {
        force: profile.clone(),
        displacement,
        contact_radius_mm: vec![0.0; profile.len()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn triangle_peaks_where_commanded() {
        let trace = triangle_profile(1.0, 2.0, 80.0).unwrap();
        assert_abs_diff_eq!(trace.duration(), 4.0, epsilon = 0.013);
        let (imax, &vmax) = trace
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(vmax, 2.0);
        assert_abs_diff_eq!(trace.times()[imax], 2.0, epsilon = 1e-12);

        let trace = triangle_profile(2.0, 2.0, 80.0).unwrap();
        let (imax, _) = trace
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_abs_diff_eq!(trace.times()[imax], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn triangle_max_is_exact_for_off_grid_apex() {
        let trace = triangle_profile(3.0, 2.0, 80.0).unwrap();
        let vmax = trace.values().iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(vmax, 2.0);
    }

    #[test]
    fn hertz_zero_force_zero_depth() {
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        assert_eq!(params.indentation_mm(0.0), 0.0);
        assert_eq!(params.contact_radius_mm(0.0), 0.0);
    }

    #[test]
    fn hertz_power_law() {
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        let d1 = params.indentation_mm(1.0);
        let d2 = params.indentation_mm(2.0);
        // F ~ delta^{3/2}, so doubling depth scales force by 2^{3/2}:
        // equivalently delta(2F)/delta(F) = 2^{2/3}.
        assert_relative_eq!(d2 / d1, 2f64.powf(2.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn hertz_closed_form_matches_numeric_inversion() {
        // E* = 10 kPa exactly, R = 4 mm, F = 2 N.
        let params = HertzParams {
            finger_modulus_kpa: 20.0 * (1.0 - 0.475f64.powi(2)),
            sphere_modulus_kpa: 20.0 * (1.0 - 0.475f64.powi(2)),
            nu_finger: 0.475,
            nu_sphere: 0.475,
            radius_mm: 4.0,
        };
        assert_relative_eq!(params.effective_modulus_kpa(), 10.0, max_relative = 1e-12);
        let delta = params.indentation_mm(2.0);
        let expected = (3.0f64 * 2.0 / (4.0 * 0.01 * 2.0)).powf(2.0 / 3.0);
        assert_relative_eq!(delta, expected, max_relative = 1e-12);

        // Independent oracle: bisect F(delta) = E*^ 4/3 sqrt(R) delta^{3/2} for delta.
        let force = |d: f64| 4.0 / 3.0 * 0.01 * params.radius_mm.sqrt() * d.powf(1.5);
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if force(mid) < 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(delta, 0.5 * (lo + hi), max_relative = 1e-9);
    }

    #[test]
    fn contact_area_identity() {
        let params = HertzParams::new(50.0, 90.0, 8.0).unwrap();
        let profile = triangle_profile(1.0, 2.0, 50.0).unwrap();
        let trial = hertz_trace(&params, &profile, 0.0, 0).unwrap();
        for (i, &f) in trial.force.values().iter().enumerate() {
            let d = params.indentation_mm(f);
            let a = trial.contact_radius_mm[i];
            assert_abs_diff_eq!(a * a, params.radius_mm * d, epsilon = 1e-12);
        }
    }

    #[test]
    fn spring_pointwise() {
        let profile = triangle_profile(1.0, 2.0, 40.0).unwrap();
        let trial = spring_trace(1.0, &profile, 0.0, 0).unwrap();
        assert_eq!(trial.displacement.values(), profile.values());
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let profile = triangle_profile(1.0, 2.0, 200.0).unwrap();
        let a = spring_trace(1.5, &profile, 0.02, 7).unwrap();
        let b = spring_trace(1.5, &profile, 0.02, 7).unwrap();
        assert_eq!(a.displacement.values(), b.displacement.values());
        let c = spring_trace(1.5, &profile, 0.02, 8).unwrap();
        assert_ne!(a.displacement.values(), c.displacement.values());
    }

    #[test]
    fn hertz_displacement_strictly_increasing_with_force() {
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        let forces: Vec<f64> = (1..100).map(|i| i as f64 * 0.02).collect();
        let depths: Vec<f64> = forces.iter().map(|&f| params.indentation_mm(f)).collect();
        for w in depths.windows(2) {
            assert!(w[1] > w[0]);
        }
        // Convexity of F(delta): depth increments shrink at fixed force step.
        for w in depths.windows(3) {
            assert!(w[2] - w[1] < w[1] - w[0]);
        }
    }
}
