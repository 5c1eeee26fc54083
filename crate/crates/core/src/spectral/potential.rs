//! Harmonic trap continued smoothly onto the periodic domain.
//!
//! A bare harmonic potential is incompatible with periodic boundaries, so
//! the radial coordinate is saturated before the box edge: the potential is
//! `V(r) = ½ m ω² R(r)²` with
//!
//! * `R(r) = r` for `r ≤ r_c` (exactly harmonic inside the trap region),
//! * `R(r) = r - w S((r - r_c)/w)` for `r_c < r < r_sat`, where
//!   `S(u) = ∫₀ᵘ s` is the integral of the quintic smoothstep
//!   `s(u) = 6u⁵ - 15u⁴ + 10u³`,
//! * `R(r) = r_c + w/2` for `r ≥ r_sat`, with `w = r_sat - r_c`.
//!
//! `R'` interpolates C²-smoothly from 1 to 0 across the blend window, so `V`
//! is constant on every point with `r ≥ r_sat = πL` — in particular on the
//! whole boundary of the box — which makes the periodic extension smooth.

use super::field::RealField3D;
use super::grid::SpectralGrid;
use std::f64::consts::PI;

/// Blend start, as a fraction of πL.
pub const SATURATION_START_FACTOR: f64 = 0.8;
/// Blend end (saturation), as a fraction of πL.
pub const SATURATION_END_FACTOR: f64 = 1.0;

/// Saturated radial coordinate R(r).
fn saturated_radius(r: f64, r_c: f64, r_sat: f64) -> f64 {
    if r <= r_c {
        r
    } else if r >= r_sat {
        r_c + 0.5 * (r_sat - r_c)
    } else {
        let w = r_sat - r_c;
        let u = (r - r_c) / w;
        // ∫ smoothstep = u⁴ (u² - 3u + 2.5)
        r - w * u.powi(4) * (u * u - 3.0 * u + 2.5)
    }
}

/// Squared saturated radius R(r)² sampled on the grid; `V = ½ m ω² trap_shape`.
pub fn trap_shape(grid: &SpectralGrid) -> RealField3D {
    let r_c = SATURATION_START_FACTOR * PI * grid.length();
    let r_sat = SATURATION_END_FACTOR * PI * grid.length();
    let r_c2 = r_c * r_c;
    RealField3D::from_fn(grid, |x, y, z| {
        let r2 = x * x + y * y + z * z;
        // Inside the harmonic region return r² as computed, with no sqrt
        // round trip, so V is bit-identical to ½mω²(x²+y²+z²) there.
        if r2 <= r_c2 {
            r2
        } else {
            let rr = saturated_radius(r2.sqrt(), r_c, r_sat);
            rr * rr
        }
    })
}

/// Trap potential `V(r) = ½ m ω² R(r)²` on the grid: exactly harmonic for
/// `r ≤ 0.8 πL`, constant for `r ≥ πL`, C² in between.
pub fn continued_potential(grid: &SpectralGrid, omega: f64, mass: f64) -> RealField3D {
    let mut v = trap_shape(grid);
    let pref = 0.5 * mass * omega * omega;
    for x in v.data_mut() {
        *x *= pref;
    }
    v
}
