use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Category;

/// One point reflector at frame time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    pub azimuth_rad: f64,
    pub rcs_dbsm: f64,
    /// Peak of the sinusoidal velocity modulation; 0 for rigid, static parts.
    pub micro_doppler_amplitude_mps: f64,
    pub micro_doppler_freq_hz: f64,
    /// Modulation phase at the start of the frame.
    #[serde(default)]
    pub micro_doppler_phase_rad: f64,
}

impl Scatterer {
    pub fn xy(&self) -> (f64, f64) {
        (
            self.range_m * self.azimuth_rad.cos(),
            self.range_m * self.azimuth_rad.sin(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub category: Category,
    pub scatterers: Vec<Scatterer>,
    pub centroid_xy_m: (f64, f64),
    pub lateral_velocity_mps: f64,
}

impl SceneObject {
    /// Largest allowed scatterer distance from the centroid.
    pub fn max_extent_m(category: Category) -> f64 {
        match category {
            Category::Car => 5.0,
            Category::Pedestrian | Category::Overridable => 1.0,
            Category::TwoWheeler => 2.0,
        }
    }

    /// Checks the per-category structural invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.scatterers.is_empty() {
            return Err("object has no scatterers".into());
        }
        let extent = Self::max_extent_m(self.category);
        let (cx, cy) = self.centroid_xy_m;
        let moving_parts = matches!(self.category, Category::Pedestrian | Category::TwoWheeler);
        for s in &self.scatterers {
            let (x, y) = s.xy();
            let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            if d > extent + 1e-9 {
                return Err(format!(
                    "scatterer {d:.2} m from centroid exceeds {extent} m"
                ));
            }
            if moving_parts && s.micro_doppler_amplitude_mps <= 0.0 {
                return Err("moving-part category without micro-Doppler".into());
            }
            if !moving_parts && s.micro_doppler_amplitude_mps != 0.0 {
                return Err("rigid category with micro-Doppler".into());
            }
            if s.azimuth_rad.abs() >= FRAC_PI_2 {
                return Err("azimuth outside the forward half plane".into());
            }
        }
        Ok(())
    }

    /// Returns a copy moved so its centroid sits at `centroid`, with radial
    /// velocities recomputed for an ego vehicle driving forward at
    /// `ego_speed_mps` and micro-Doppler phases advanced by `dt_s`.
    pub fn moved_to(&self, centroid: (f64, f64), ego_speed_mps: f64, dt_s: f64) -> SceneObject {
        let (ox, oy) = self.centroid_xy_m;
        let scatterers = self
            .scatterers
            .iter()
            .map(|s| {
                let (x, y) = s.xy();
                let (x, y) = (x - ox + centroid.0, y - oy + centroid.1);
                let range_m = x.hypot(y);
                let azimuth_rad = y.atan2(x);
                Scatterer {
                    range_m,
                    azimuth_rad,
                    radial_velocity_mps: radial_velocity(
                        azimuth_rad,
                        ego_speed_mps,
                        self.lateral_velocity_mps,
                    ),
                    micro_doppler_phase_rad: (s.micro_doppler_phase_rad
                        + 2.0 * PI * s.micro_doppler_freq_hz * dt_s)
                        .rem_euclid(2.0 * PI),
                    ..s.clone()
                }
            })
            .collect();
        SceneObject {
            category: self.category,
            scatterers,
            centroid_xy_m: centroid,
            lateral_velocity_mps: self.lateral_velocity_mps,
        }
    }
}

/// Relative radial velocity of a point seen from an ego vehicle moving
/// forward (+x); the object moves along y. Negative means closing.
pub(crate) fn radial_velocity(azimuth_rad: f64, ego_speed_mps: f64, lateral_mps: f64) -> f64 {
    -ego_speed_mps * azimuth_rad.cos() + lateral_mps * azimuth_rad.sin()
}

struct CategoryModel {
    count: (usize, usize),
    rcs_dbsm: (f64, f64),
    /// Half-length along the object's long axis and half-width across it.
    half_size: (f64, f64),
    micro_amp: (f64, f64),
    micro_freq: (f64, f64),
    lateral_speed: (f64, f64),
}

fn model(category: Category) -> CategoryModel {
    match category {
        Category::Car => CategoryModel {
            count: (5, 15),
            rcs_dbsm: (-5.0, 15.0),
            half_size: (2.3, 0.9),
            micro_amp: (0.0, 0.0),
            micro_freq: (0.0, 0.0),
            lateral_speed: (0.0, 0.0),
        },
        Category::Pedestrian => CategoryModel {
            count: (2, 5),
            rcs_dbsm: (-14.0, -4.0),
            half_size: (0.3, 0.25),
            micro_amp: (0.4, 1.4),
            micro_freq: (0.8, 1.8),
            lateral_speed: (0.6, 1.6),
        },
        Category::TwoWheeler => CategoryModel {
            count: (3, 8),
            rcs_dbsm: (-8.0, 4.0),
            half_size: (0.9, 0.25),
            micro_amp: (0.3, 1.2),
            micro_freq: (3.0, 8.0),
            lateral_speed: (1.5, 3.0),
        },
        Category::Overridable => CategoryModel {
            count: (1, 3),
            rcs_dbsm: (-25.0, -2.0),
            half_size: (0.4, 0.1),
            micro_amp: (0.0, 0.0),
            micro_freq: (0.0, 0.0),
            lateral_speed: (0.0, 0.0),
        },
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Draws a random object of `category` at a nominal position ahead of the
/// sensor, with a stationary ego vehicle.
pub fn synth_scene<R: Rng + ?Sized>(category: Category, rng: &mut R) -> SceneObject {
    let m = model(category);
    let n = rng.gen_range(m.count.0..=m.count.1);
    let centroid = (uniform(rng, (10.0, 16.0)), uniform(rng, (-1.5, 1.5)));
    // Long axis: parked cars either face the sensor or stand sideways;
    // lateral movers and ground objects lie across the driving direction.
    let heading = match category {
        Category::Car => {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                FRAC_PI_2
            }
        }
        _ => FRAC_PI_2 + uniform(rng, (-0.3, 0.3)),
    };
    let lateral = uniform(rng, m.lateral_speed) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (ch, sh) = (heading.cos(), heading.sin());
    let scatterers = (0..n)
        .map(|_| {
            let along = uniform(rng, (-m.half_size.0, m.half_size.0));
            let across = uniform(rng, (-m.half_size.1, m.half_size.1));
            let x = centroid.0 + along * ch - across * sh;
            let y = centroid.1 + along * sh + across * ch;
            let azimuth_rad = y.atan2(x);
            Scatterer {
                range_m: x.hypot(y),
                radial_velocity_mps: radial_velocity(azimuth_rad, 0.0, lateral),
                azimuth_rad,
                rcs_dbsm: uniform(rng, m.rcs_dbsm),
                micro_doppler_amplitude_mps: uniform(rng, m.micro_amp),
                micro_doppler_freq_hz: uniform(rng, m.micro_freq),
                micro_doppler_phase_rad: rng.gen_range(0.0..2.0 * PI),
            }
        })
        .collect();
    SceneObject {
        category,
        scatterers,
        centroid_xy_m: centroid,
        lateral_velocity_mps: lateral,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn overridable_seed0() {
        let o = synth_scene(Category::Overridable, &mut rng_from(0));
        assert!((1..=3).contains(&o.scatterers.len()));
        assert!(o
            .scatterers
            .iter()
            .all(|s| s.micro_doppler_amplitude_mps == 0.0));
        o.check_invariants().unwrap();
    }

    #[test]
    fn pedestrians_always_have_micro_doppler() {
        for seed in 0..50 {
            let p = synth_scene(Category::Pedestrian, &mut rng_from(seed));
            assert!(p
                .scatterers
                .iter()
                .all(|s| s.micro_doppler_amplitude_mps > 0.0));
        }
    }

    #[test]
    fn car_seed7_count() {
        let c = synth_scene(Category::Car, &mut rng_from(7));
        assert!((5..=15).contains(&c.scatterers.len()));
    }

    #[test]
    fn invariants_and_count_ranges_hold() {
        for seed in 0..200 {
            for cat in Category::ALL {
                let o = synth_scene(cat, &mut rng_from(seed));
                o.check_invariants().unwrap();
                let (lo, hi) = model(cat).count;
                assert!((lo..=hi).contains(&o.scatterers.len()));
            }
        }
    }

    #[test]
    fn mean_rcs_ordering() {
        let mut mean = [0.0; 4];
        for cat in Category::ALL {
            let mut sum = 0.0;
            let mut n = 0usize;
            for seed in 0..300 {
                for s in synth_scene(cat, &mut rng_from(seed)).scatterers {
                    sum += s.rcs_dbsm;
                    n += 1;
                }
            }
            mean[cat.index()] = sum / n as f64;
        }
        let [car, ped, tw, ovr] = mean;
        assert!(car > tw && tw >= ped && ped > ovr, "{mean:?}");
    }

    #[test]
    fn moving_preserves_shape() {
        let o = synth_scene(Category::Car, &mut rng_from(3));
        let m = o.moved_to((8.0, 1.0), 2.0, 0.1);
        m.check_invariants().unwrap();
        for (a, b) in o.scatterers.iter().zip(&m.scatterers) {
            let (ax, ay) = a.xy();
            let (bx, by) = b.xy();
            assert!(((ax - o.centroid_xy_m.0) - (bx - 8.0)).abs() < 1e-9);
            assert!(((ay - o.centroid_xy_m.1) - (by - 1.0)).abs() < 1e-9);
            assert!(b.radial_velocity_mps < 0.0);
        }
    }
}
