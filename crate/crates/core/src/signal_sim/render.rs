use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{RadarConfig, SceneObject, SimError};

/// One coherent processing interval of complex baseband data.
///
/// `iq` is stored sample-major: index `(s * n_chirps + c) * n_antennas + a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFrame {
    pub n_samples: usize,
    pub n_chirps: usize,
    pub n_antennas: usize,
    #[serde(skip)]
    pub iq: Vec<Complex32>,
    pub truth: Vec<SceneObject>,
}

impl RawFrame {
    pub fn zeros(cfg: &RadarConfig) -> Self {
        Self {
            n_samples: cfg.n_samples,
            n_chirps: cfg.n_chirps,
            n_antennas: cfg.n_antennas,
            iq: vec![Complex32::new(0.0, 0.0); cfg.cube_len()],
            truth: Vec::new(),
        }
    }

    #[inline]
    pub fn index(&self, s: usize, c: usize, a: usize) -> usize {
        (s * self.n_chirps + c) * self.n_antennas + a
    }

    pub fn at(&self, s: usize, c: usize, a: usize) -> Complex32 {
        self.iq[self.index(s, c, a)]
    }

    pub fn matches(&self, cfg: &RadarConfig) -> bool {
        self.n_samples == cfg.n_samples
            && self.n_chirps == cfg.n_chirps
            && self.n_antennas == cfg.n_antennas
            && self.iq.len() == cfg.cube_len()
    }

    pub fn energy(&self) -> f64 {
        self.iq.iter().map(|z| z.norm_sqr() as f64).sum()
    }
}

/// One-way antenna power gain in dB: a cosine pattern.
pub fn antenna_gain_db(azimuth_rad: f64) -> f64 {
    10.0 * azimuth_rad.cos().max(1e-6).log10()
}

/// Received amplitude of a scatterer: radar equation with r⁻⁴ power law
/// and two-way cosine gain, referenced to a 0 dBsm target at 1 m.
pub fn echo_amplitude(rcs_dbsm: f64, range_m: f64, azimuth_rad: f64) -> f64 {
    let power_db = rcs_dbsm + 2.0 * antenna_gain_db(azimuth_rad) - 40.0 * range_m.log10();
    10f64.powf(power_db / 20.0)
}

/// Renders the noiseless echo of `objects` into a frame.
pub fn render_clean(objects: &[SceneObject], cfg: &RadarConfig) -> Result<RawFrame, SimError> {
    cfg.validate()?;
    let (ns, nc, na) = (cfg.n_samples, cfg.n_chirps, cfg.n_antennas);
    let lambda = cfg.wavelength_m();
    let t_chirp = cfg.chirp_duration_s();
    let (r_max, v_max) = (cfg.max_range_m(), cfg.max_velocity_mps());
    let mut acc = vec![Complex64::new(0.0, 0.0); cfg.cube_len()];
    let mut fast = vec![Complex64::new(0.0, 0.0); ns];
    let mut slow = vec![Complex64::new(0.0, 0.0); nc];
    let mut ant = vec![Complex64::new(0.0, 0.0); na];

    for s in objects.iter().flat_map(|o| o.scatterers.iter()) {
        if !(s.range_m > 0.0 && s.range_m < r_max)
            || s.radial_velocity_mps.abs() >= v_max
            || s.azimuth_rad.abs() >= PI / 2.0
        {
            return Err(SimError::ScattererOutOfUnambiguousRange {
                range_m: s.range_m,
                velocity_mps: s.radial_velocity_mps,
                azimuth_rad: s.azimuth_rad,
            });
        }
        let amp = echo_amplitude(s.rcs_dbsm, s.range_m, s.azimuth_rad);
        let k = cfg.range_to_bin(s.range_m);
        for (i, f) in fast.iter_mut().enumerate() {
            *f = Complex64::from_polar(1.0, 2.0 * PI * k * i as f64 / ns as f64);
        }
        let carrier = (4.0 * PI * s.range_m / lambda).rem_euclid(2.0 * PI);
        let (a_md, f_md, th) = (
            s.micro_doppler_amplitude_mps,
            s.micro_doppler_freq_hz,
            s.micro_doppler_phase_rad,
        );
        for (c, z) in slow.iter_mut().enumerate() {
            let t = c as f64 * t_chirp;
            // displacement is the integral of v0 + a·sin(2π f t + θ)
            let mut disp = s.radial_velocity_mps * t;
            if a_md > 0.0 && f_md > 0.0 {
                let w = 2.0 * PI * f_md;
                disp -= a_md / w * ((w * t + th).cos() - th.cos());
            }
            *z = Complex64::from_polar(amp, carrier + 4.0 * PI * disp / lambda);
        }
        let step = 2.0 * PI * cfg.antenna_spacing_wavelengths * s.azimuth_rad.sin();
        for (a, z) in ant.iter_mut().enumerate() {
            *z = Complex64::from_polar(1.0, step * a as f64);
        }
        for (si, f) in fast.iter().enumerate() {
            for (ci, sl) in slow.iter().enumerate() {
                let fs = f * sl;
                let base = (si * nc + ci) * na;
                for (dst, a) in acc[base..base + na].iter_mut().zip(&ant) {
                    *dst += fs * a;
                }
            }
        }
    }

    Ok(RawFrame {
        n_samples: ns,
        n_chirps: nc,
        n_antennas: na,
        iq: acc
            .into_iter()
            .map(|z| Complex32::new(z.re as f32, z.im as f32))
            .collect(),
        truth: objects.to_vec(),
    })
}

/// Renders `scene` and adds complex white Gaussian noise at the configured
/// floor.
pub fn render_frame<R: Rng + ?Sized>(
    scene: &SceneObject,
    cfg: &RadarConfig,
    rng: &mut R,
) -> Result<RawFrame, SimError> {
    render_objects(std::slice::from_ref(scene), cfg, rng)
}

/// Multi-object variant of [`render_frame`].
pub fn render_objects<R: Rng + ?Sized>(
    objects: &[SceneObject],
    cfg: &RadarConfig,
    rng: &mut R,
) -> Result<RawFrame, SimError> {
    let mut frame = render_clean(objects, cfg)?;
    add_noise(&mut frame, cfg.noise_floor_db, rng);
    Ok(frame)
}

pub(crate) fn add_noise<R: Rng + ?Sized>(frame: &mut RawFrame, noise_floor_db: f64, rng: &mut R) {
    let sigma = (10f64.powf(noise_floor_db / 10.0) / 2.0).sqrt();
    for z in frame.iq.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z += Complex32::new((re * sigma) as f32, (im * sigma) as f32);
    }
}
