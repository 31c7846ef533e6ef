//! Random user drops: Poisson user count, area-uniform placement in the
//! annular sector and Rayleigh small-scale fading.
//!
//! Every drop draws from its own ChaCha8 substream. The key is derived
//! from the 64-bit master seed with `SeedableRng::seed_from_u64` and the
//! ChaCha stream id is the drop index, so a drop's realization does not
//! depend on which worker evaluates it or in which order.
//!
//! Draw order inside a drop: the user count (Poisson only), then per user
//! the radius uniform, the azimuth uniform and two standard normals for the
//! real and imaginary fading parts.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Result};
use crate::geometry::UserRegion;

/// Mean user count `(L2^2 - L1^2) * half_azimuth * density`.
pub fn mean_user_count(region: &UserRegion, density: f64) -> Result<f64> {
    ensure(density.is_finite() && density > 0.0, "user density", density, "must be finite and > 0")?;
    Ok(region.area() * density)
}

/// Random stream for drop `drop_index` under `master_seed`.
pub fn drop_rng(master_seed: u64, drop_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(drop_index);
    rng
}

/// How many users land in the region on each drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserCount {
    Poisson { mean: f64 },
    Fixed(usize),
}

/// Where users are placed radially.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Uniform over the area of the annular sector.
    Uniform,
    /// Every user at the given planar radius. The radius uniform is still
    /// drawn so the stream layout matches `Uniform`.
    FixedRadius(f64),
}

/// Mean below which the Poisson sampler uses sequential inversion.
pub const POISSON_INVERSION_LIMIT: f64 = 30.0;

/// Poisson variate: sequential CDF inversion for `mean < 30`, Hormann's
/// PTRS transformed rejection otherwise.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < POISSON_INVERSION_LIMIT {
        poisson_inversion(mean, rng)
    } else {
        poisson_ptrs(mean, rng)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        // the remaining tail mass is below f64 resolution
        if p <= 0.0 {
            break;
        }
        cdf += p;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Draws the number of users for one drop.
pub fn sample_count<R: Rng + ?Sized>(count: UserCount, rng: &mut R) -> usize {
    match count {
        UserCount::Poisson { mean } => sample_poisson(mean, rng) as usize,
        UserCount::Fixed(n) => n,
    }
}

/// One ground user as seen from the UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSample {
    /// Planar distance from the point below the UAV (m).
    pub radius: f64,
    /// Azimuth inside the sector (rad). Not used by the array gain, which
    /// only steers in elevation.
    pub azimuth: f64,
    /// Complex path gain, CN(0, 1).
    pub fading: Complex64,
    /// Departure angle from nadir (rad).
    pub elevation: f64,
    /// Slant distance to the UAV (m).
    pub distance: f64,
    /// Linear path loss. 1 until a model is attached.
    pub path_loss: f64,
}

impl UserSample {
    pub fn at(radius: f64, azimuth: f64, fading: Complex64, altitude: f64) -> Self {
        Self {
            radius,
            azimuth,
            fading,
            elevation: (radius / altitude).atan(),
            distance: altitude.hypot(radius),
            path_loss: 1.0,
        }
    }

    /// `|alpha|^2`, exponentially distributed with unit mean.
    pub fn fading_power(&self) -> f64 {
        self.fading.norm_sqr()
    }
}

pub fn sample_user<R: Rng + ?Sized>(
    region: &UserRegion,
    placement: Placement,
    altitude: f64,
    rng: &mut R,
) -> UserSample {
    let (l1, l2) = (region.inner(), region.outer());
    let u: f64 = rng.random();
    let radius = match placement {
        Placement::Uniform => (l1 * l1 + u * (l2 * l2 - l1 * l1)).sqrt(),
        Placement::FixedRadius(r) => r,
    };
    let delta = region.half_azimuth();
    let azimuth = delta * (2.0 * rng.random::<f64>() - 1.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let fading = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    UserSample::at(radius, azimuth, fading, altitude)
}

/// The users present in the region on one drop.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DropPopulation {
    pub users: Vec<UserSample>,
}

impl DropPopulation {
    pub fn count(&self) -> usize {
        self.users.len()
    }

    pub fn sample<R: Rng + ?Sized>(
        region: &UserRegion,
        count: UserCount,
        placement: Placement,
        altitude: f64,
        rng: &mut R,
    ) -> Self {
        let k = sample_count(count, rng);
        let users = (0..k)
            .map(|_| sample_user(region, placement, altitude, rng))
            .collect();
        Self { users }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stadium() -> UserRegion {
        UserRegion::new(25.0, 100.0, 0.2_f64.to_radians()).unwrap()
    }

    #[test]
    fn table_mean_user_count() {
        let mu = mean_user_count(&stadium(), 1.0).unwrap();
        assert_relative_eq!(mu, 32.724_923_474_893_68, epsilon = 1e-9);
        let mu2 = mean_user_count(&stadium(), 2.0).unwrap();
        assert_relative_eq!(mu2, 2.0 * mu, epsilon = 1e-12);
        assert!(mean_user_count(&stadium(), 0.0).is_err());
    }

    fn poisson_mean_check(mean: f64) {
        let n = 1_000_000u64;
        let mut rng = drop_rng(7, 0);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let k = sample_poisson(mean, &mut rng) as f64;
            s += k;
            s2 += k * k;
        }
        let m = s / n as f64;
        let var = (s2 - s * s / n as f64) / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((m - mean).abs() < 4.0 * se, "mean {m} vs {mean} (se {se})");
        // variance equals the mean for a Poisson law
        assert!((var - mean).abs() / mean < 0.01, "var {var} vs {mean}");
    }

    #[test]
    fn poisson_inversion_moments() {
        poisson_mean_check(5.0);
    }

    #[test]
    fn poisson_ptrs_moments() {
        poisson_mean_check(32.724_923_474_893_68);
        poisson_mean_check(400.0);
    }

    #[test]
    fn poisson_edge_cases() {
        let mut rng = drop_rng(1, 1);
        assert_eq!(sample_poisson(0.0, &mut rng), 0);
        assert_eq!(sample_count(UserCount::Fixed(46), &mut rng), 46);
    }

    #[test]
    fn users_inside_support() {
        let region = stadium();
        let mut rng = drop_rng(3, 9);
        for _ in 0..10_000 {
            let u = sample_user(&region, Placement::Uniform, 50.0, &mut rng);
            assert!(u.radius >= 25.0 && u.radius <= 100.0);
            assert!(u.azimuth.abs() <= region.half_azimuth());
            assert_relative_eq!(u.distance, (2500.0 + u.radius * u.radius).sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn area_uniform_second_moment() {
        let region = stadium();
        let n = 1_000_000;
        let mut rng = drop_rng(11, 0);
        let (mut s, mut s2) = (0.0, 0.0);
        let (mut hits, a, b) = (0u64, 40.0, 60.0);
        for _ in 0..n {
            let r = sample_user(&region, Placement::Uniform, 50.0, &mut rng).radius;
            let r2 = r * r;
            s += r2;
            s2 += r2 * r2;
            if r >= a && r <= b {
                hits += 1;
            }
        }
        let m = s / n as f64;
        let se = ((s2 / n as f64 - m * m) / n as f64).sqrt();
        let expected = (625.0 + 10_000.0) / 2.0;
        assert!((m - expected).abs() < 4.0 * se);

        let p = (b * b - a * a) / (10_000.0 - 625.0);
        let freq = hits as f64 / n as f64;
        let se_p = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se_p);
    }

    #[test]
    fn fading_power_is_unit_exponential() {
        // Kolmogorov-Smirnov against Exp(1); 1.628 / sqrt(n) is the
        // asymptotic critical value at significance 0.01.
        let n = 20_000;
        let region = stadium();
        let mut rng = drop_rng(5, 3);
        let mut x: Vec<f64> = (0..n)
            .map(|_| sample_user(&region, Placement::Uniform, 50.0, &mut rng).fading_power())
            .collect();
        x.sort_by(f64::total_cmp);
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let cdf = 1.0 - (-v).exp();
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let region = stadium();
        let count = UserCount::Poisson { mean: 32.7 };
        let a = DropPopulation::sample(&region, count, Placement::Uniform, 50.0, &mut drop_rng(42, 17));
        let b = DropPopulation::sample(&region, count, Placement::Uniform, 50.0, &mut drop_rng(42, 17));
        let c = DropPopulation::sample(&region, count, Placement::Uniform, 50.0, &mut drop_rng(42, 18));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fixed_radius_keeps_stream_layout() {
        let region = stadium();
        let count = UserCount::Fixed(5);
        let a = DropPopulation::sample(&region, count, Placement::Uniform, 50.0, &mut drop_rng(1, 2));
        let b = DropPopulation::sample(&region, count, Placement::FixedRadius(60.0), 50.0, &mut drop_rng(1, 2));
        for (x, y) in a.users.iter().zip(&b.users) {
            assert_eq!(x.fading, y.fading);
            assert_eq!(y.radius, 60.0);
        }
    }
}
