//! Ground-plane geometry of the UAV beam footprint.
//!
//! Angles are measured from nadir: a user directly below the UAV sits at
//! elevation angle 0 and the horizon is at pi/2. All angles are radians.

use std::f64::consts::FRAC_PI_2;

use crate::error::{ensure, Error, Result};

pub const EDGE_TOLERANCE: f64 = 1e-12;

/// Annular sector on the ground holding the users, centred under the UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRegion {
    inner: f64,
    outer: f64,
    half_azimuth: f64,
}

impl UserRegion {
    /// `inner` and `outer` radii in metres, `half_azimuth` (half of the
    /// sector opening angle) in radians.
    pub fn new(inner: f64, outer: f64, half_azimuth: f64) -> Result<Self> {
        ensure(inner.is_finite() && inner >= 0.0, "inner radius", inner, "must be finite and >= 0")?;
        ensure(outer.is_finite() && outer > inner, "outer radius", outer, "must be finite and > inner radius")?;
        ensure(
            half_azimuth > 0.0 && half_azimuth < std::f64::consts::PI,
            "half azimuth",
            half_azimuth,
            "must lie in (0, pi)",
        )?;
        Ok(Self {
            inner,
            outer,
            half_azimuth,
        })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn half_azimuth(&self) -> f64 {
        self.half_azimuth
    }

    /// Sector area, `(L2^2 - L1^2) * half_azimuth`.
    pub fn area(&self) -> f64 {
        (self.outer * self.outer - self.inner * self.inner) * self.half_azimuth
    }
}

/// UAV altitude, boresight ground distance and vertical beamwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    altitude: f64,
    boresight: f64,
    beamwidth: f64,
}

impl BeamGeometry {
    pub fn new(altitude: f64, boresight: f64, beamwidth: f64) -> Result<Self> {
        ensure(altitude.is_finite() && altitude > 0.0, "altitude", altitude, "must be finite and > 0")?;
        ensure(
            boresight.is_finite() && boresight >= 0.0,
            "boresight distance",
            boresight,
            "must be finite and >= 0",
        )?;
        ensure(
            beamwidth > 0.0 && beamwidth < std::f64::consts::PI,
            "vertical beamwidth",
            beamwidth,
            "must lie in (0, pi)",
        )?;
        Ok(Self {
            altitude,
            boresight,
            beamwidth,
        })
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub fn boresight(&self) -> f64 {
        self.boresight
    }

    pub fn beamwidth(&self) -> f64 {
        self.beamwidth
    }

    /// Boresight angle from nadir.
    pub fn boresight_angle(&self) -> f64 {
        (self.boresight / self.altitude).atan()
    }
}

/// Radial extent `[inner, outer]` of the beam footprint. `outer` is
/// `f64::INFINITY` when the upper beam edge reaches the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiatedInterval {
    pub inner: f64,
    pub outer: f64,
}

impl RadiatedInterval {
    /// Membership with a relative slack of `EDGE_TOLERANCE` so that a user
    /// sitting exactly on an anchored edge (`L1` at `D1`, `L2` at `D2`) is
    /// not lost to rounding in the tan/atan round trip.
    pub fn contains(&self, radius: f64) -> bool {
        radius >= self.inner * (1.0 - EDGE_TOLERANCE) && radius <= self.outer * (1.0 + EDGE_TOLERANCE)
    }

    pub fn is_unbounded(&self) -> bool {
        self.outer.is_infinite()
    }
}

/// Departure angle from nadir towards a ground point at planar radius `r`.
pub fn elevation_angle(r: f64, h: f64) -> Result<f64> {
    ensure(r.is_finite() && r >= 0.0, "planar radius", r, "must be finite and >= 0")?;
    ensure(h.is_finite() && h > 0.0, "altitude", h, "must be finite and > 0")?;
    Ok((r / h).atan())
}

/// Smallest vertical beamwidth that covers the whole user region from
/// altitude `h`.
pub fn required_vertical_angle(h: f64, region: &UserRegion) -> Result<f64> {
    Ok(elevation_angle(region.outer, h)? - elevation_angle(region.inner, h)?)
}

/// Boresight angle that centres the beam on the user region,
/// `atan(L1/h) + phi_r/2`.
pub fn covering_boresight_angle(h: f64, region: &UserRegion) -> Result<f64> {
    let lo = elevation_angle(region.inner, h)?;
    let hi = elevation_angle(region.outer, h)?;
    Ok(0.5 * (lo + hi))
}

/// Extreme boresight distances `(D1, D2)` when the beam is narrower than
/// the user region: at `D1` the footprint's inner edge sits on `L1`, at
/// `D2` its outer edge sits on `L2`.
pub fn boresight_bounds(h: f64, region: &UserRegion, beamwidth: f64) -> Result<(f64, f64)> {
    ensure(
        beamwidth > 0.0 && beamwidth < std::f64::consts::PI,
        "vertical beamwidth",
        beamwidth,
        "must lie in (0, pi)",
    )?;
    let required = required_vertical_angle(h, region)?;
    if required <= beamwidth {
        return Err(Error::NoScanNeeded { required, beamwidth });
    }
    let half = 0.5 * beamwidth;
    let d1 = h * (elevation_angle(region.inner, h)? + half).tan();
    let d2 = h * (elevation_angle(region.outer, h)? - half).tan();
    Ok((d1, d2))
}

pub fn radiated_interval(beam: &BeamGeometry) -> RadiatedInterval {
    let h = beam.altitude;
    let psi = beam.boresight_angle();
    let half = 0.5 * beam.beamwidth;
    let inner = h * (psi - half).max(0.0).tan();
    let upper = psi + half;
    let outer = if upper < FRAC_PI_2 {
        h * upper.tan()
    } else {
        f64::INFINITY
    };
    RadiatedInterval { inner, outer }
}

/// Fraction of the user region's area inside the footprint of `beam`.
pub fn coverage_fraction(beam: &BeamGeometry, region: &UserRegion) -> f64 {
    interval_coverage(&radiated_interval(beam), region)
}

pub fn interval_coverage(interval: &RadiatedInterval, region: &UserRegion) -> f64 {
    let lo = interval.inner.max(region.inner);
    let hi = interval.outer.min(region.outer);
    if hi <= lo {
        return 0.0;
    }
    let frac = (hi * hi - lo * lo) / (region.outer * region.outer - region.inner * region.inner);
    frac.clamp(0.0, 1.0)
}

const COVERAGE_SEARCH_POINTS: usize = 201;

/// Best coverage fraction reachable by moving the boresight over
/// `[D1, D2]`. Returns 1 when the beam is wide enough to cover the region.
pub fn max_coverage_fraction(h: f64, region: &UserRegion, beamwidth: f64) -> Result<f64> {
    let (d1, d2) = match boresight_bounds(h, region, beamwidth) {
        Ok(bounds) => bounds,
        Err(Error::NoScanNeeded { .. }) => return Ok(1.0),
        Err(e) => return Err(e),
    };
    let mut best = 0.0_f64;
    for k in 0..COVERAGE_SEARCH_POINTS {
        let t = k as f64 / (COVERAGE_SEARCH_POINTS - 1) as f64;
        let beam = BeamGeometry::new(h, d1 + t * (d2 - d1), beamwidth)?;
        best = best.max(coverage_fraction(&beam, region));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn stadium() -> UserRegion {
        UserRegion::new(25.0, 100.0, 0.2_f64.to_radians()).unwrap()
    }

    #[test]
    fn elevation_examples() {
        assert_eq!(elevation_angle(0.0, 50.0).unwrap(), 0.0);
        assert_relative_eq!(elevation_angle(37.0, 37.0).unwrap(), FRAC_PI_4, epsilon = 1e-15);
        assert_relative_eq!(elevation_angle(100.0, 50.0).unwrap(), 1.107_148_717_794_090_5, epsilon = 1e-14);
    }

    #[test]
    fn elevation_rejects_bad_inputs() {
        assert!(elevation_angle(-1.0, 50.0).is_err());
        assert!(elevation_angle(f64::NAN, 50.0).is_err());
        assert!(elevation_angle(1.0, 0.0).is_err());
        assert!(elevation_angle(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn required_angle_examples() {
        let full = UserRegion::new(0.0, 100.0, 0.1).unwrap();
        assert_relative_eq!(required_vertical_angle(100.0, &full).unwrap(), FRAC_PI_4, epsilon = 1e-14);
        let r = stadium();
        assert_relative_eq!(
            required_vertical_angle(21.0, &r).unwrap(),
            0.491_667_630_501_642_2,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            required_vertical_angle(120.0, &r).unwrap(),
            0.489_342_887_006_935_8,
            epsilon = 1e-12
        );
        assert!(required_vertical_angle(125.0, &r).unwrap().to_degrees() < 28.0);
    }

    #[test]
    fn scanning_band_is_21_to_120() {
        let r = stadium();
        let phi_e = 28f64.to_radians();
        let band: Vec<u32> = (1..400)
            .filter(|&h| required_vertical_angle(h as f64, &r).unwrap() > phi_e)
            .collect();
        assert_eq!(band.first(), Some(&21));
        assert_eq!(band.last(), Some(&120));
        assert_eq!(band.len(), 100);
    }

    #[test]
    fn required_angle_shape() {
        let full = UserRegion::new(0.0, 100.0, 0.1).unwrap();
        let r = stadium();
        let hs: Vec<f64> = (10..=150).map(f64::from).collect();
        let a: Vec<f64> = hs.iter().map(|&h| required_vertical_angle(h, &full).unwrap()).collect();
        assert!(a.windows(2).all(|w| w[1] < w[0]));
        let b: Vec<f64> = hs.iter().map(|&h| required_vertical_angle(h, &r).unwrap()).collect();
        let (imax, _) = b
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert!(imax > 0 && imax < b.len() - 1);
        // peak of atan(L2/h) - atan(L1/h) is at h = sqrt(L1 * L2)
        assert_eq!(hs[imax], 50.0);
    }

    #[test]
    fn bounds_examples() {
        let r = stadium();
        let (d1, d2) = boresight_bounds(50.0, &r, 28f64.to_radians()).unwrap();
        assert_relative_eq!(d1, 42.802_307_003_260_9, epsilon = 1e-9);
        assert_relative_eq!(d2, 58.408_066_644_854_85, epsilon = 1e-9);
        assert!(d1 < d2);

        let (d1, d2) = boresight_bounds(50.0, &r, 1e-12).unwrap();
        assert_relative_eq!(d1, 25.0, epsilon = 1e-9);
        assert_relative_eq!(d2, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn bounds_signal_no_scan() {
        let r = stadium();
        let err = boresight_bounds(150.0, &r, 28f64.to_radians()).unwrap_err();
        assert!(matches!(err, Error::NoScanNeeded { .. }));
    }

    #[test]
    fn radiated_interval_examples() {
        let i = radiated_interval(&BeamGeometry::new(50.0, 70.0, 1e-12).unwrap());
        assert_relative_eq!(i.inner, 70.0, epsilon = 1e-9);
        assert_relative_eq!(i.outer, 70.0, epsilon = 1e-9);

        let i = radiated_interval(&BeamGeometry::new(50.0, 42.802_307_003_260_9, 28f64.to_radians()).unwrap());
        assert_relative_eq!(i.inner, 25.0, epsilon = 1e-9);
        assert_relative_eq!(i.outer, 70.266_025_942_598_94, epsilon = 1e-9);

        let i = radiated_interval(&BeamGeometry::new(10.0, 100.0, 28f64.to_radians()).unwrap());
        assert!(i.is_unbounded());
        assert!(i.contains(1e9));
    }

    #[test]
    fn inner_edge_clamps_at_nadir() {
        let i = radiated_interval(&BeamGeometry::new(50.0, 1.0, 28f64.to_radians()).unwrap());
        assert_eq!(i.inner, 0.0);
    }

    #[test]
    fn coverage_examples() {
        let r = stadium();
        let phi_e = 28f64.to_radians();
        let (d1, d2) = boresight_bounds(50.0, &r, phi_e).unwrap();
        let at_d1 = coverage_fraction(&BeamGeometry::new(50.0, d1, phi_e).unwrap(), &r);
        assert_relative_eq!(at_d1, 0.459_980_202_855_038_6, epsilon = 1e-9);
        let at_d2 = coverage_fraction(&BeamGeometry::new(50.0, d2, phi_e).unwrap(), &r);
        assert_relative_eq!(at_d2, 0.931_640_494_051_811, epsilon = 1e-9);

        let exact = RadiatedInterval { inner: 25.0, outer: 100.0 };
        assert_eq!(interval_coverage(&exact, &r), 1.0);
        let disjoint = RadiatedInterval { inner: 1.0, outer: 20.0 };
        assert_eq!(interval_coverage(&disjoint, &r), 0.0);
    }

    #[test]
    fn max_coverage_full_when_beam_is_wide() {
        let r = stadium();
        assert_eq!(max_coverage_fraction(150.0, &r, 28f64.to_radians()).unwrap(), 1.0);
        let scan = max_coverage_fraction(50.0, &r, 28f64.to_radians()).unwrap();
        assert!((0.931_640_494..1.0).contains(&scan));
    }

    #[test]
    fn covering_boresight_covers_region() {
        let r = stadium();
        let h = 140.0;
        let theta = covering_boresight_angle(h, &r).unwrap();
        let beam = BeamGeometry::new(h, h * theta.tan(), 28f64.to_radians()).unwrap();
        let i = radiated_interval(&beam);
        assert!(i.inner <= 25.0 && i.outer >= 100.0);
        assert_eq!(coverage_fraction(&beam, &r), 1.0);
    }

    #[test]
    fn region_validation() {
        assert!(UserRegion::new(-1.0, 10.0, 0.1).is_err());
        assert!(UserRegion::new(10.0, 10.0, 0.1).is_err());
        assert!(UserRegion::new(0.0, 10.0, 0.0).is_err());
        assert!(UserRegion::new(0.0, 10.0, 4.0).is_err());
        assert!(BeamGeometry::new(0.0, 1.0, 0.5).is_err());
        assert!(BeamGeometry::new(1.0, -1.0, 0.5).is_err());
        assert!(BeamGeometry::new(1.0, 1.0, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounds_round_trip(h in 5.0f64..300.0, l1 in 0.0f64..80.0, width in 10.0f64..200.0, deg in 1.0f64..40.0) {
                let region = UserRegion::new(l1, l1 + width, 0.1).unwrap();
                let phi_e = deg.to_radians();
                if let Ok((d1, d2)) = boresight_bounds(h, &region, phi_e) {
                    prop_assert!(d1 < d2);
                    let at1 = radiated_interval(&BeamGeometry::new(h, d1, phi_e).unwrap());
                    let at2 = radiated_interval(&BeamGeometry::new(h, d2, phi_e).unwrap());
                    let tol = 1e-9 * region.outer();
                    prop_assert!((at1.inner - region.inner()).abs() <= tol);
                    prop_assert!((at2.outer - region.outer()).abs() <= tol);
                }
            }

            #[test]
            fn coverage_is_a_fraction(h in 1.0f64..300.0, d in 0.0f64..400.0, deg in 0.5f64..120.0, l1 in 0.0f64..80.0) {
                let region = UserRegion::new(l1, l1 + 75.0, 0.1).unwrap();
                let beam = BeamGeometry::new(h, d, deg.to_radians()).unwrap();
                let i = radiated_interval(&beam);
                let c = coverage_fraction(&beam, &region);
                prop_assert!((0.0..=1.0).contains(&c));
                let contains = i.inner <= region.inner() && i.outer >= region.outer();
                prop_assert_eq!(c == 1.0, contains);
            }
        }
    }
}
