use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::layout::ReceptorLayout;
use super::vec3::{self, Vec3};

/// What happens to a step that enters the receiver away from any receptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReflectionRule {
    /// Mirror the penetrating remainder of the step in the tangent plane at
    /// the entry point.
    #[default]
    Specular,
    /// Reject the step; the molecule stays where it was.
    Rollback,
}

impl std::str::FromStr for ReflectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "specular" => Ok(ReflectionRule::Specular),
            "rollback" => Ok(ReflectionRule::Rollback),
            other => Err(Error::param(
                "reflection",
                format!("expected `specular` or `rollback`, got `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for ReflectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReflectionRule::Specular => "specular",
            ReflectionRule::Rollback => "rollback",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryOutcome {
    /// The step stays outside the receiver.
    Free,
    /// The step enters through a receptor.
    Absorbed {
        /// Position along the step of the entry point, in `[0, 1]`.
        fraction: f64,
        point: Vec3,
        receptor: usize,
    },
    /// The step enters between receptors and is sent back out.
    Reflected { position: Vec3 },
}

/// Resolves the step `prev -> next` against a receiver of radius
/// `receiver_radius` centered at the origin.
///
/// The membrane test is done at the first intersection of the segment with
/// the sphere, not at `next`.
pub fn resolve_boundary(
    prev: Vec3,
    next: Vec3,
    layout: &ReceptorLayout,
    receiver_radius: f64,
    rule: ReflectionRule,
) -> Result<BoundaryOutcome> {
    let r2 = receiver_radius * receiver_radius;
    let mut c = vec3::norm_sq(prev) - r2;
    if c < -1e-9 * r2 {
        return Err(Error::Invariant(format!(
            "step starts inside the receiver at |x| = {}",
            vec3::norm(prev)
        )));
    }
    c = c.max(0.0);

    let d = vec3::sub(next, prev);
    let a = vec3::norm_sq(d);
    let b = 2.0 * vec3::dot(prev, d);
    if a == 0.0 || b >= 0.0 {
        // receding from the center for the whole step: both roots <= 0
        return Ok(BoundaryOutcome::Free);
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return Ok(BoundaryOutcome::Free);
    }
    let q = -0.5 * (b - disc.sqrt());
    let s = c / q;
    if s > 1.0 {
        return Ok(BoundaryOutcome::Free);
    }

    let raw = vec3::add(prev, vec3::scale(d, s));
    let normal = vec3::normalize(raw);
    let hit = vec3::scale(normal, receiver_radius);

    if let Some(receptor) = layout.covering_patch(normal) {
        return Ok(BoundaryOutcome::Absorbed {
            fraction: s,
            point: hit,
            receptor,
        });
    }

    let position = match rule {
        ReflectionRule::Rollback => prev,
        ReflectionRule::Specular => {
            let rest = vec3::scale(d, 1.0 - s);
            let inward = vec3::dot(rest, normal);
            let out = vec3::add(hit, vec3::sub(rest, vec3::scale(normal, 2.0 * inward)));
            // convexity keeps `out` outside; guard against rounding
            let len = vec3::norm(out);
            if len < receiver_radius {
                vec3::scale(out, receiver_radius / len)
            } else {
                out
            }
        }
    };
    Ok(BoundaryOutcome::Reflected { position })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::layout::place_receptors;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn free_step() {
        let layout = place_receptors(10, 0.1).unwrap();
        let out = resolve_boundary([0.0, 0.0, 12.0], [0.0, 3.0, 15.0], &layout, 10.0, ReflectionRule::Specular);
        assert_eq!(out.unwrap(), BoundaryOutcome::Free);
        // approaching but stopping short
        let out = resolve_boundary([0.0, 0.0, 12.0], [0.0, 0.0, 10.5], &layout, 10.0, ReflectionRule::Specular);
        assert_eq!(out.unwrap(), BoundaryOutcome::Free);
        // a line that would graze the sphere beyond the segment end
        let out = resolve_boundary([20.0, 0.0, 9.0], [15.0, 0.0, 9.0], &layout, 10.0, ReflectionRule::Specular);
        assert_eq!(out.unwrap(), BoundaryOutcome::Free);
    }

    #[test]
    fn absorbed_through_patch_center() {
        let layout = ReceptorLayout::new(vec![[0.0, 0.0, 1.0]], 0.01).unwrap();
        let out = resolve_boundary([0.0, 0.0, 11.0], [0.0, 0.0, 9.0], &layout, 10.0, ReflectionRule::Specular).unwrap();
        match out {
            BoundaryOutcome::Absorbed { fraction, point, receptor } => {
                assert!((fraction - 0.5).abs() < 1e-15);
                assert!((point[2] - 10.0).abs() < 1e-12);
                assert_eq!(receptor, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reflection_without_receptors() {
        let layout = place_receptors(0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let prev: Vec3 = loop {
                let p = [
                    rng.random_range(-11.0..11.0),
                    rng.random_range(-11.0..11.0),
                    rng.random_range(-11.0..11.0),
                ];
                if vec3::norm(p) >= 10.0 {
                    break p;
                }
            };
            let step = [
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ];
            let next = vec3::add(prev, step);
            let out = resolve_boundary(prev, next, &layout, 10.0, ReflectionRule::Specular).unwrap();
            match out {
                BoundaryOutcome::Absorbed { .. } => panic!("no receptors"),
                BoundaryOutcome::Reflected { position } => {
                    assert!(vec3::norm(position) >= 10.0 - 1e-9);
                    // specular reflection keeps the step length
                    let hit_len = vec3::norm(vec3::sub(position, prev));
                    assert!(hit_len <= vec3::norm(step) + 1e-9);
                }
                BoundaryOutcome::Free => assert!(vec3::norm(next) >= 10.0),
            }
        }
    }

    #[test]
    fn specular_mirror_on_axis() {
        let layout = place_receptors(0, 0.01).unwrap();
        let out = resolve_boundary([0.0, 0.0, 11.0], [0.0, 0.0, 9.5], &layout, 10.0, ReflectionRule::Specular).unwrap();
        match out {
            BoundaryOutcome::Reflected { position } => {
                assert!((position[2] - 10.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let out = resolve_boundary([0.0, 0.0, 11.0], [0.0, 0.0, 9.5], &layout, 10.0, ReflectionRule::Rollback).unwrap();
        assert_eq!(out, BoundaryOutcome::Reflected { position: [0.0, 0.0, 11.0] });
    }

    #[test]
    fn chord_through_sphere_enters_at_first_point() {
        let layout = ReceptorLayout::new(vec![[1.0, 0.0, 0.0]], 0.05).unwrap();
        // enters at x = 10 on the +x axis, exits on the far side
        let out = resolve_boundary([12.0, 0.0, 0.0], [-12.0, 0.0, 0.0], &layout, 10.0, ReflectionRule::Specular).unwrap();
        match out {
            BoundaryOutcome::Absorbed { fraction, .. } => assert!((fraction - 2.0 / 24.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn starting_on_surface() {
        let layout = place_receptors(0, 0.01).unwrap();
        let out = resolve_boundary([0.0, 0.0, 10.0], [0.0, 0.0, 9.0], &layout, 10.0, ReflectionRule::Specular).unwrap();
        assert!(matches!(out, BoundaryOutcome::Reflected { position } if (position[2] - 11.0).abs() < 1e-12));
        let out = resolve_boundary([0.0, 0.0, 10.0], [0.0, 1.0, 10.5], &layout, 10.0, ReflectionRule::Specular).unwrap();
        assert_eq!(out, BoundaryOutcome::Free);
    }

    #[test]
    fn inside_start_is_invariant_violation() {
        let layout = place_receptors(0, 0.01).unwrap();
        let out = resolve_boundary([0.0, 0.0, 9.0], [0.0, 0.0, 12.0], &layout, 10.0, ReflectionRule::Specular);
        assert!(matches!(out, Err(Error::Invariant(_))));
    }

    #[test]
    fn parse_rule() {
        assert_eq!("specular".parse::<ReflectionRule>().unwrap(), ReflectionRule::Specular);
        assert_eq!("rollback".parse::<ReflectionRule>().unwrap(), ReflectionRule::Rollback);
        assert!("bounce".parse::<ReflectionRule>().is_err());
    }
}
