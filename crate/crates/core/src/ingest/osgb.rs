//! OSGB36 National Grid easting/northing to WGS84 latitude/longitude.
//!
//! Transverse Mercator inverse on the Airy 1830 ellipsoid, then a 7-parameter
//! Helmert shift to WGS84. Constants follow the Ordnance Survey publication
//! "A guide to coordinate systems in Great Britain".
//! Expected accuracy of the Helmert step is a few metres.

use thiserror::Error;

use super::gridref::GridRef;

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("easting {easting} / northing {northing} outside the OSGB projection domain")]
    OutOfDomain { easting: f64, northing: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Ellipsoid {
    pub a: f64,
    pub b: f64,
}

impl Ellipsoid {
    pub fn e2(&self) -> f64 {
        (self.a * self.a - self.b * self.b) / (self.a * self.a)
    }
}

pub const AIRY_1830: Ellipsoid = Ellipsoid {
    a: 6_377_563.396,
    b: 6_356_256.909,
};

pub const WGS84: Ellipsoid = Ellipsoid {
    a: 6_378_137.000,
    b: 6_356_752.314_245,
};

// National Grid projection.
pub const SCALE_CENTRAL_MERIDIAN: f64 = 0.999_601_271_7;
pub const TRUE_ORIGIN_LAT_DEG: f64 = 49.0;
pub const TRUE_ORIGIN_LON_DEG: f64 = -2.0;
pub const FALSE_EASTING: f64 = 400_000.0;
pub const FALSE_NORTHING: f64 = -100_000.0;

pub const MAX_EASTING: f64 = 700_000.0;
pub const MAX_NORTHING: f64 = 1_300_000.0;

/// OSGB36 -> WGS84 Helmert: translations in metres, rotations in arc-seconds,
/// scale in ppm.
#[derive(Debug, Clone, Copy)]
pub struct Helmert {
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
    pub rx_sec: f64,
    pub ry_sec: f64,
    pub rz_sec: f64,
    pub s_ppm: f64,
}

pub const OSGB36_TO_WGS84: Helmert = Helmert {
    tx: 446.448,
    ty: -125.157,
    tz: 542.060,
    rx_sec: 0.1502,
    ry_sec: 0.2470,
    rz_sec: 0.8421,
    s_ppm: -20.4894,
};

impl Helmert {
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let sec = std::f64::consts::PI / (180.0 * 3600.0);
        let (rx, ry, rz) = (self.rx_sec * sec, self.ry_sec * sec, self.rz_sec * sec);
        let s1 = 1.0 + self.s_ppm * 1e-6;
        let [x, y, z] = p;
        [
            self.tx + s1 * x - rz * y + ry * z,
            self.ty + rz * x + s1 * y - rx * z,
            self.tz - ry * x + rx * y + s1 * z,
        ]
    }
}

// Developed meridional arc from the true origin to latitude `phi`.
fn meridional_arc(el: &Ellipsoid, phi: f64) -> f64 {
    let n = (el.a - el.b) / (el.a + el.b);
    let (n2, n3) = (n * n, n * n * n);
    let phi0 = TRUE_ORIGIN_LAT_DEG.to_radians();
    let dp = phi - phi0;
    let sp = phi + phi0;
    el.b * SCALE_CENTRAL_MERIDIAN
        * ((1.0 + n + 1.25 * n2 + 1.25 * n3) * dp
            - (3.0 * n + 3.0 * n2 + 21.0 / 8.0 * n3) * dp.sin() * sp.cos()
            + (15.0 / 8.0 * n2 + 15.0 / 8.0 * n3) * (2.0 * dp).sin() * (2.0 * sp).cos()
            - 35.0 / 24.0 * n3 * (3.0 * dp).sin() * (3.0 * sp).cos())
}

/// Inverse transverse Mercator: grid easting/northing to latitude/longitude
/// (degrees) on the projection's own ellipsoid.
pub fn grid_to_geodetic(el: &Ellipsoid, easting: f64, northing: f64) -> (f64, f64) {
    let f0 = SCALE_CENTRAL_MERIDIAN;
    let e2 = el.e2();
    let phi0 = TRUE_ORIGIN_LAT_DEG.to_radians();
    let lambda0 = TRUE_ORIGIN_LON_DEG.to_radians();

    let mut phi = phi0 + (northing - FALSE_NORTHING) / (el.a * f0);
    let mut m = meridional_arc(el, phi);
    // Converges to sub-millimetre in a handful of iterations.
    for _ in 0..32 {
        let resid = northing - FALSE_NORTHING - m;
        if resid.abs() < 1e-5 {
            break;
        }
        phi += resid / (el.a * f0);
        m = meridional_arc(el, phi);
    }

    let sin2 = phi.sin().powi(2);
    let nu = el.a * f0 / (1.0 - e2 * sin2).sqrt();
    let rho = el.a * f0 * (1.0 - e2) / (1.0 - e2 * sin2).powf(1.5);
    let eta2 = nu / rho - 1.0;
    let t = phi.tan();
    let (t2, t4, t6) = (t * t, t.powi(4), t.powi(6));
    let sec = 1.0 / phi.cos();

    let c7 = t / (2.0 * rho * nu);
    let c8 = t / (24.0 * rho * nu.powi(3)) * (5.0 + 3.0 * t2 + eta2 - 9.0 * t2 * eta2);
    let c9 = t / (720.0 * rho * nu.powi(5)) * (61.0 + 90.0 * t2 + 45.0 * t4);
    let c10 = sec / nu;
    let c11 = sec / (6.0 * nu.powi(3)) * (nu / rho + 2.0 * t2);
    let c12 = sec / (120.0 * nu.powi(5)) * (5.0 + 28.0 * t2 + 24.0 * t4);
    let c12a = sec / (5040.0 * nu.powi(7)) * (61.0 + 662.0 * t2 + 1320.0 * t4 + 720.0 * t6);

    let de = easting - FALSE_EASTING;
    let lat = phi - c7 * de.powi(2) + c8 * de.powi(4) - c9 * de.powi(6);
    let lon = lambda0 + c10 * de - c11 * de.powi(3) + c12 * de.powi(5) - c12a * de.powi(7);
    (lat.to_degrees(), lon.to_degrees())
}

/// Geodetic latitude/longitude (degrees, height 0) to Earth-centred cartesian.
pub fn geodetic_to_cartesian(el: &Ellipsoid, lat_deg: f64, lon_deg: f64) -> [f64; 3] {
    let (phi, lambda) = (lat_deg.to_radians(), lon_deg.to_radians());
    let e2 = el.e2();
    let nu = el.a / (1.0 - e2 * phi.sin().powi(2)).sqrt();
    [
        nu * phi.cos() * lambda.cos(),
        nu * phi.cos() * lambda.sin(),
        (1.0 - e2) * nu * phi.sin(),
    ]
}

/// Earth-centred cartesian to geodetic latitude/longitude in degrees.
pub fn cartesian_to_geodetic(el: &Ellipsoid, p: [f64; 3]) -> (f64, f64) {
    let [x, y, z] = p;
    let e2 = el.e2();
    let lambda = y.atan2(x);
    let r = (x * x + y * y).sqrt();
    let mut phi = z.atan2(r * (1.0 - e2));
    for _ in 0..16 {
        let nu = el.a / (1.0 - e2 * phi.sin().powi(2)).sqrt();
        let next = (z + e2 * nu * phi.sin()).atan2(r);
        if (next - phi).abs() < 1e-14 {
            phi = next;
            break;
        }
        phi = next;
    }
    (phi.to_degrees(), lambda.to_degrees())
}

/// OSGB36 easting/northing (metres) to WGS84 latitude/longitude (degrees).
pub fn osgb36_to_wgs84(easting: f64, northing: f64) -> Result<(f64, f64), ProjectionError> {
    let in_domain = easting.is_finite()
        && northing.is_finite()
        && (0.0..=MAX_EASTING).contains(&easting)
        && (0.0..=MAX_NORTHING).contains(&northing);
    if !in_domain {
        return Err(ProjectionError::OutOfDomain { easting, northing });
    }
    let (lat, lon) = grid_to_geodetic(&AIRY_1830, easting, northing);
    let p = geodetic_to_cartesian(&AIRY_1830, lat, lon);
    let q = OSGB36_TO_WGS84.apply(p);
    Ok(cartesian_to_geodetic(&WGS84, q))
}

/// WGS84 coordinates of the centroid of a grid cell.
pub fn gridref_to_latlon(g: &GridRef) -> Result<(f64, f64), ProjectionError> {
    let (e, n) = g.centroid();
    osgb36_to_wgs84(e, n)
}
