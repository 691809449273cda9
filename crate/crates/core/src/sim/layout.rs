//! Receptor placement on the unit sphere and nearest-patch queries.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

use super::vec3::{self, Vec3};

/// `n` points on a Fibonacci spiral: `z_i = 1 - (2i + 1)/n`, longitude
/// advancing by the golden angle.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Fibonacci layout of `n` patches, each of angular radius `theta_s`.
pub fn place_receptors(n: usize, theta_s: f64) -> Result<ReceptorLayout> {
    ReceptorLayout::new(fibonacci_sphere(n), theta_s)
}

/// Patch centers with a latitude-band grid over them.
///
/// The sphere is cut into bands of equal colatitude height; each band is
/// cut into longitude sectors whose count scales with the band's widest
/// circle, so cells are close to square with a side near the mean center
/// spacing.
#[derive(Debug, Clone)]
pub struct ReceptorLayout {
    centers: Vec<Vec3>,
    theta_s: f64,
    patch_chord_sq: f64,
    bands: usize,
    band_height: f64,
    /// first cell id of each band, plus a trailing total
    band_cells: Vec<usize>,
    /// CSR offsets into `cell_members`, one per cell plus a trailing total
    cell_start: Vec<usize>,
    cell_members: Vec<u32>,
}

impl ReceptorLayout {
    /// Centers must be unit vectors within 1e-12.
    pub fn new(centers: Vec<Vec3>, theta_s: f64) -> Result<Self> {
        if !(theta_s.is_finite() && theta_s > 0.0 && theta_s <= PI) {
            return Err(Error::param("theta_s", format!("must lie in (0, pi], got {theta_s}")));
        }
        if centers.len() > u32::MAX as usize {
            return Err(Error::param("n", "too many receptors"));
        }
        if let Some(c) = centers.iter().find(|c| (vec3::norm(**c) - 1.0).abs() > 1e-12) {
            return Err(Error::param("centers", format!("{c:?} is not a unit vector")));
        }

        let n = centers.len().max(1);
        let cell = (4.0 * PI / n as f64).sqrt().min(PI);
        let bands = ((PI / cell).ceil() as usize).max(1);
        let band_height = PI / bands as f64;

        let mut band_cells = Vec::with_capacity(bands + 1);
        let mut total = 0usize;
        for j in 0..bands {
            band_cells.push(total);
            total += sectors_for_band(j, band_height, cell);
        }
        band_cells.push(total);

        let mut layout = Self {
            centers,
            theta_s,
            patch_chord_sq: vec3::chord_sq(theta_s),
            bands,
            band_height,
            band_cells,
            cell_start: Vec::new(),
            cell_members: Vec::new(),
        };

        let cell_of: Vec<usize> = layout.centers.iter().map(|c| layout.cell_of(*c)).collect();
        let mut start = vec![0usize; total + 1];
        for &c in &cell_of {
            start[c + 1] += 1;
        }
        for c in 0..total {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut members = vec![0u32; layout.centers.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            members[fill[c]] = i as u32;
            fill[c] += 1;
        }
        layout.cell_start = start;
        layout.cell_members = members;
        Ok(layout)
    }

    /// Absorbs everywhere: one patch of angular radius pi.
    pub fn full_sphere() -> Self {
        Self::new(vec![[0.0, 0.0, 1.0]], PI).expect("valid full-sphere layout")
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn theta_s(&self) -> f64 {
        self.theta_s
    }

    fn band_of(&self, theta: f64) -> usize {
        ((theta / self.band_height) as usize).min(self.bands - 1)
    }

    fn sectors(&self, band: usize) -> usize {
        self.band_cells[band + 1] - self.band_cells[band]
    }

    fn cell_of(&self, u: Vec3) -> usize {
        let (theta, phi) = spherical(u);
        let band = self.band_of(theta);
        let s = self.sectors(band);
        let k = ((phi / TAU * s as f64) as usize).min(s - 1);
        self.band_cells[band] + k
    }

    /// Calls `visit(index, chord_sq)` for every center within angle `radius`
    /// of the unit vector `u`.
    pub fn for_each_within(&self, u: Vec3, radius: f64, mut visit: impl FnMut(usize, f64)) {
        let limit = vec3::chord_sq(radius);
        let (theta, phi) = spherical(u);
        let pad = 1e-9;
        let r = radius + pad;
        let lo_theta = theta - r;
        let hi_theta = theta + r;
        let full_ring = lo_theta <= 0.0 || hi_theta >= PI;
        let half_width = if full_ring {
            PI
        } else {
            (r.sin() / theta.sin()).min(1.0).asin() + pad
        };
        let j0 = self.band_of(lo_theta.max(0.0));
        let j1 = self.band_of(hi_theta.min(PI));

        for band in j0..=j1 {
            let s = self.sectors(band);
            let width = TAU / s as f64;
            let first = self.band_cells[band];
            let (k0, count) = if full_ring || 2.0 * half_width + width >= TAU {
                (0i64, s)
            } else {
                let a = ((phi - half_width) / width).floor() as i64;
                let b = ((phi + half_width) / width).floor() as i64;
                (a, ((b - a + 1) as usize).min(s))
            };
            for off in 0..count {
                let k = (k0 + off as i64).rem_euclid(s as i64) as usize;
                let cell = first + k;
                for &m in &self.cell_members[self.cell_start[cell]..self.cell_start[cell + 1]] {
                    let d2 = vec3::dist_sq(u, self.centers[m as usize]);
                    if d2 <= limit {
                        visit(m as usize, d2);
                    }
                }
            }
        }
    }

    /// Nearest center within angle `radius`, with its squared chord.
    pub fn nearest_within(&self, u: Vec3, radius: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.for_each_within(u, radius, |i, d2| {
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some((i, d2));
            }
        });
        best
    }

    /// Index of the patch containing the unit vector `u`, if any.
    #[inline]
    pub fn covering_patch(&self, u: Vec3) -> Option<usize> {
        self.nearest_within(u, self.theta_s)
            .filter(|&(_, d2)| d2 <= self.patch_chord_sq)
            .map(|(i, _)| i)
    }

    /// Nearest center and its angular distance.
    pub fn nearest(&self, u: Vec3) -> Option<(usize, f64)> {
        if self.centers.is_empty() {
            return None;
        }
        // a hit at distance d <= r means every closer center was visited too
        let mut r = self.band_height;
        loop {
            if let Some((i, d2)) = self.nearest_within(u, r) {
                return Some((i, chord_to_angle(d2)));
            }
            r = (2.0 * r).min(PI);
        }
    }

    /// Full scan; reference for the grid queries.
    pub fn nearest_brute_force(&self, u: Vec3) -> Option<(usize, f64)> {
        self.centers
            .iter()
            .enumerate()
            .map(|(i, c)| (i, vec3::dist_sq(u, *c)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, d2)| (i, chord_to_angle(d2)))
    }

    pub fn covering_patch_brute_force(&self, u: Vec3) -> Option<usize> {
        self.nearest_brute_force(u)
            .filter(|&(i, _)| vec3::dist_sq(u, self.centers[i]) <= self.patch_chord_sq)
            .map(|(i, _)| i)
    }

    /// Smallest angular distance between two distinct centers.
    pub fn min_separation(&self) -> Option<f64> {
        if self.centers.len() < 2 {
            return None;
        }
        let mut best = f64::INFINITY;
        for (i, &c) in self.centers.iter().enumerate() {
            let mut r = self.band_height;
            loop {
                let mut local: Option<f64> = None;
                self.for_each_within(c, r, |j, d2| {
                    if j != i && local.is_none_or(|b| d2 < b) {
                        local = Some(d2);
                    }
                });
                if let Some(d2) = local {
                    best = best.min(chord_to_angle(d2));
                    break;
                }
                if r >= PI {
                    break;
                }
                r = (2.0 * r).min(PI);
            }
        }
        Some(best)
    }

    /// True if two patches intersect (centers closer than `2 theta_s`).
    pub fn has_overlap(&self) -> bool {
        let reach = 2.0 * self.theta_s;
        if reach >= PI {
            return self.centers.len() > 1;
        }
        let limit = vec3::chord_sq(reach);
        self.centers.iter().enumerate().any(|(i, &c)| {
            let mut hit = false;
            self.for_each_within(c, reach, |j, d2| hit |= j != i && d2 < limit);
            hit
        })
    }
}

fn sectors_for_band(band: usize, height: f64, cell: f64) -> usize {
    let lo = band as f64 * height;
    let hi = lo + height;
    let widest = if lo <= PI / 2.0 && hi >= PI / 2.0 {
        1.0
    } else {
        lo.sin().max(hi.sin())
    };
    ((TAU * widest / cell).ceil() as usize).max(1)
}

/// Colatitude in `[0, pi]`, longitude in `[0, 2 pi)`.
#[inline]
fn spherical(u: Vec3) -> (f64, f64) {
    let theta = u[2].clamp(-1.0, 1.0).acos();
    let mut phi = u[1].atan2(u[0]);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi = 0.0;
    }
    (theta, phi)
}

#[inline]
fn chord_to_angle(d2: f64) -> f64 {
    2.0 * (0.5 * d2.sqrt()).min(1.0).asin()
}
