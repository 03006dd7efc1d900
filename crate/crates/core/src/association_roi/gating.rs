use serde::{Deserialize, Serialize};

use crate::spectra_dsp::Reflection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatingParams {
    pub gate_radius_m: f64,
    pub min_reflections: usize,
}

impl Default for GatingParams {
    fn default() -> Self {
        Self {
            gate_radius_m: 2.5,
            min_reflections: 1,
        }
    }
}

/// Assigns each reflection to its nearest anchor (Euclidean in x, y) when
/// that anchor lies within the gate; ties go to the lower anchor index.
/// Objects left with fewer than `min_reflections` get an empty list.
pub fn associate(
    reflections: &[Reflection],
    anchors: &[(f64, f64)],
    params: &GatingParams,
) -> Vec<Vec<Reflection>> {
    let mut out = vec![Vec::new(); anchors.len()];
    for r in reflections {
        let nearest = anchors
            .iter()
            .enumerate()
            .map(|(i, &(ax, ay))| (i, (r.x_m - ax).hypot(r.y_m - ay)))
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, d)) = nearest {
            if d <= params.gate_radius_m {
                out[i].push(r.clone());
            }
        }
    }
    for list in &mut out {
        if list.len() < params.min_reflections {
            list.clear();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> Reflection {
        Reflection {
            k_bin: 0,
            l_bin: 0,
            range_m: x.hypot(y),
            velocity_mps: 0.0,
            azimuth_rad: y.atan2(x),
            rcs_dbsm: 0.0,
            x_m: x,
            y_m: y,
            snr_db: 20.0,
        }
    }

    #[test]
    fn gate_discards_far_reflections() {
        let a = associate(
            &[at(10.5, 0.0), at(30.0, 0.0)],
            &[(10.0, 0.0)],
            &GatingParams::default(),
        );
        assert_eq!(a[0].len(), 1);
        assert_eq!(a[0][0].x_m, 10.5);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let p = GatingParams {
            gate_radius_m: 6.0,
            ..Default::default()
        };
        let a = associate(&[at(10.0, 5.0)], &[(10.0, 0.0), (10.0, 10.0)], &p);
        assert_eq!((a[0].len(), a[1].len()), (1, 0));
    }

    #[test]
    fn empty_input() {
        let a = associate(&[], &[(1.0, 0.0), (5.0, 0.0)], &GatingParams::default());
        assert!(a.iter().all(Vec::is_empty));
    }

    #[test]
    fn min_reflections_drops_sparse_objects() {
        let p = GatingParams {
            min_reflections: 2,
            ..Default::default()
        };
        let a = associate(
            &[at(10.2, 0.0), at(20.0, 0.0), at(20.1, 0.0)],
            &[(10.0, 0.0), (20.0, 0.0)],
            &p,
        );
        assert!(a[0].is_empty());
        assert_eq!(a[1].len(), 2);
    }
}
