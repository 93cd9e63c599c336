//! Simulation geometry, large-scale path gain and Rayleigh channel draws.
//!
//! Every link is drawn from its own ChaCha stream, so the realization of one
//! link does not depend on the dimensions of another. In particular,
//! changing the number of IRS elements leaves the BS, relay and user links
//! of a trial untouched.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub bs: Point,
    pub irs: Point,
    pub relay: Point,
    pub users: Vec<Point>,
}

/// Fixed node positions of the reference deployment (meters).
pub const BS_POS: Point = Point::new(0.0, 0.0);
pub const IRS_POS: Point = Point::new(100.0, 50.0);
pub const RELAY_POS: Point = Point::new(100.0, -50.0);
pub const USER_CENTER: Point = Point::new(0.0, 200.0);
pub const USER_RADIUS: f64 = 10.0;

impl Topology {
    pub fn reference(users: Vec<Point>) -> Self {
        Self {
            bs: BS_POS,
            irs: IRS_POS,
            relay: RELAY_POS,
            users,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // users may coincide with each other, but no link may have zero length
        let infra = [self.bs, self.irs, self.relay];
        for (i, a) in infra.iter().enumerate() {
            for b in infra[i + 1..].iter().chain(&self.users) {
                let d = a.distance(b);
                if !(d > 0.0) {
                    return Err(Error::NonPositiveDistance(d));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LargeScaleParams {
    pub d0: f64,
    /// κ of the BS–relay, BS–user and relay–user links.
    pub kappa_direct_and_relay: f64,
    /// κ of every link with an IRS end.
    pub kappa_irs: f64,
    /// Path-loss exponent of the BS–user link.
    pub rho_direct: f64,
    /// Path-loss exponent of IRS- and relay-aided links.
    pub rho_assisted: f64,
}

impl Default for LargeScaleParams {
    fn default() -> Self {
        Self {
            d0: 1.0,
            kappa_direct_and_relay: 1e-4,
            kappa_irs: 10f64.powf(-0.5),
            rho_direct: 3.5,
            rho_assisted: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    /// BS antennas.
    pub m: usize,
    /// Relay antennas.
    pub l: usize,
    /// IRS elements.
    pub n: usize,
    /// Users.
    pub k: usize,
}

impl Dims {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.l == 0 || self.n == 0 || self.k == 0 {
            return Err(Error::Dimension(format!(
                "all dimensions must be positive, got {self:?}"
            )));
        }
        if self.k > self.m.min(self.l) {
            return Err(Error::Dimension(format!(
                "K ≤ min(M, L) required, got K={} M={} L={}",
                self.k, self.m, self.l
            )));
        }
        Ok(())
    }
}

/// One realization of all baseband channels. User channels are stored as
/// matrices with one row per user.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// BS → relay, `L × M`.
    pub h_bs_r: CMat,
    /// BS → IRS, `N × M`.
    pub h_bs_irs: CMat,
    /// BS → users, `K × M`.
    pub h_bs_users: CMat,
    /// Relay → IRS, `N × L`.
    pub h_r_irs: CMat,
    /// Relay → users, `K × L`.
    pub h_r_users: CMat,
    /// IRS → users, `K × N`.
    pub h_irs_users: CMat,
}

impl ChannelSet {
    pub fn dims(&self) -> Dims {
        Dims {
            m: self.h_bs_r.ncols(),
            l: self.h_bs_r.nrows(),
            n: self.h_bs_irs.nrows(),
            k: self.h_bs_users.nrows(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        let shapes = [
            ("h_bs_irs", self.h_bs_irs.shape(), (d.n, d.m)),
            ("h_bs_users", self.h_bs_users.shape(), (d.k, d.m)),
            ("h_r_irs", self.h_r_irs.shape(), (d.n, d.l)),
            ("h_r_users", self.h_r_users.shape(), (d.k, d.l)),
            ("h_irs_users", self.h_irs_users.shape(), (d.k, d.n)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::Dimension(format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        Ok(())
    }

    /// FNV-1a over the bit patterns of every entry; used to check that
    /// paired trials see identical channels.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for byte in x.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for m in [
            &self.h_bs_r,
            &self.h_bs_irs,
            &self.h_bs_users,
            &self.h_r_irs,
            &self.h_r_users,
            &self.h_irs_users,
        ] {
            for z in m.iter() {
                eat(z.re);
                eat(z.im);
            }
        }
        h
    }
}

/// `κ (d / d0)^(-ρ)`
pub fn path_gain(d: f64, kappa: f64, rho: f64, d0: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveDistance(d));
    }
    if !(d0 > 0.0) {
        return Err(Error::NonPositiveDistance(d0));
    }
    Ok(kappa * (d / d0).powf(-rho))
}

/// Uniform draw of `k` points over a disk.
pub fn place_users(center: Point, radius: f64, k: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(USER_STREAM);
    (0..k)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            Point::new(center.x + r * phi.cos(), center.y + r * phi.sin())
        })
        .collect()
}

const USER_STREAM: u64 = 99;

#[derive(Clone, Copy)]
enum Link {
    BsRelay = 1,
    BsIrs = 2,
    BsUser = 3,
    RelayIrs = 4,
    RelayUser = 5,
    IrsUser = 6,
}

fn cn_matrix(rows: usize, cols: usize, seed: u64, link: Link, row_gain: impl Fn(usize) -> f64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(link as u64);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::zeros(rows, cols);
    // row-major so that growing `rows` keeps the leading rows fixed
    for r in 0..rows {
        let amp = row_gain(r).sqrt();
        for c in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(r, c)] = C64::new(re, im) * (half * amp);
        }
    }
    m
}

/// Draws every channel as `√(path gain) · CN(0, 1)`.
pub fn draw_channels(topology: &Topology, params: &LargeScaleParams, dims: Dims, seed: u64) -> Result<ChannelSet> {
    dims.validate()?;
    if topology.users.len() != dims.k {
        return Err(Error::Dimension(format!(
            "topology has {} users, dims ask for {}",
            topology.users.len(),
            dims.k
        )));
    }
    let p = params;
    let gain_relay = |a: &Point, b: &Point| path_gain(a.distance(b), p.kappa_direct_and_relay, p.rho_assisted, p.d0);
    let gain_direct = |a: &Point, b: &Point| path_gain(a.distance(b), p.kappa_direct_and_relay, p.rho_direct, p.d0);
    let gain_irs = |a: &Point, b: &Point| path_gain(a.distance(b), p.kappa_irs, p.rho_assisted, p.d0);

    let g_bs_r = gain_relay(&topology.bs, &topology.relay)?;
    let g_bs_irs = gain_irs(&topology.bs, &topology.irs)?;
    let g_r_irs = gain_irs(&topology.relay, &topology.irs)?;
    let g_bs_u: Vec<f64> = topology
        .users
        .iter()
        .map(|u| gain_direct(&topology.bs, u))
        .collect::<Result<_>>()?;
    let g_r_u: Vec<f64> = topology
        .users
        .iter()
        .map(|u| gain_relay(&topology.relay, u))
        .collect::<Result<_>>()?;
    let g_irs_u: Vec<f64> = topology
        .users
        .iter()
        .map(|u| gain_irs(&topology.irs, u))
        .collect::<Result<_>>()?;

    Ok(ChannelSet {
        h_bs_r: cn_matrix(dims.l, dims.m, seed, Link::BsRelay, |_| g_bs_r),
        h_bs_irs: cn_matrix(dims.n, dims.m, seed, Link::BsIrs, |_| g_bs_irs),
        h_bs_users: cn_matrix(dims.k, dims.m, seed, Link::BsUser, |k| g_bs_u[k]),
        h_r_irs: cn_matrix(dims.n, dims.l, seed, Link::RelayIrs, |_| g_r_irs),
        h_r_users: cn_matrix(dims.k, dims.l, seed, Link::RelayUser, |k| g_r_u[k]),
        h_irs_users: cn_matrix(dims.k, dims.n, seed, Link::IrsUser, |k| g_irs_u[k]),
    })
}

/// Users placed on the reference disk and channels drawn, both from `seed`.
pub fn draw_trial(dims: Dims, params: &LargeScaleParams, seed: u64) -> Result<(Topology, ChannelSet)> {
    let topology = Topology::reference(place_users(USER_CENTER, USER_RADIUS, dims.k, seed));
    let channels = draw_channels(&topology, params, dims, seed)?;
    Ok((topology, channels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_gain_examples() {
        assert!((path_gain(1.0, 1e-4, 2.0, 1.0).unwrap() - 1e-4).abs() < 1e-18);
        let g = path_gain(200.0, 1e-4, 3.5, 1.0).unwrap();
        assert!((g / 8.84e-13 - 1.0).abs() < 0.01, "{g:e}");
        let d = (100.0f64 * 100.0 + 50.0 * 50.0).sqrt();
        let g = path_gain(d, 10f64.powf(-0.5), 2.0, 1.0).unwrap();
        assert!((g / 2.530e-5 - 1.0).abs() < 0.01, "{g:e}");
        assert!(matches!(
            path_gain(0.0, 1.0, 2.0, 1.0),
            Err(Error::NonPositiveDistance(_))
        ));
        assert!(matches!(
            path_gain(-3.0, 1.0, 2.0, 1.0),
            Err(Error::NonPositiveDistance(_))
        ));
    }

    #[test]
    fn user_placement() {
        let c = Point::new(0.0, 200.0);
        assert!(place_users(c, 0.0, 4, 1).iter().all(|p| *p == c));
        assert_eq!(place_users(c, 10.0, 4, 5), place_users(c, 10.0, 4, 5));
        let pts = place_users(c, 10.0, 10_000, 3);
        assert!(pts.iter().all(|p| p.distance(&c) <= 10.0 + 1e-12));
        let mean = pts.iter().map(|p| p.distance(&c)).sum::<f64>() / pts.len() as f64;
        assert!((mean - 20.0 / 3.0).abs() < 0.2, "{mean}");
    }

    #[test]
    fn rejects_too_many_users() {
        let topo = Topology::reference(place_users(USER_CENTER, USER_RADIUS, 3, 0));
        let dims = Dims { m: 4, l: 2, n: 4, k: 3 };
        assert!(matches!(
            draw_channels(&topo, &LargeScaleParams::default(), dims, 0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn shapes_and_determinism() {
        let topo = Topology::reference(place_users(USER_CENTER, USER_RADIUS, 2, 0));
        let dims = Dims { m: 4, l: 2, n: 8, k: 2 };
        let a = draw_channels(&topo, &LargeScaleParams::default(), dims, 42).unwrap();
        let b = draw_channels(&topo, &LargeScaleParams::default(), dims, 42).unwrap();
        let c = draw_channels(&topo, &LargeScaleParams::default(), dims, 43).unwrap();
        a.validate().unwrap();
        assert_eq!(a.dims(), dims);
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
        assert_ne!(a.h_bs_r, c.h_bs_r);
        assert_ne!(a.checksum(), c.checksum());
    }

    #[test]
    fn entry_variance_matches_path_gain() {
        let topo = Topology::reference(place_users(USER_CENTER, USER_RADIUS, 1, 0));
        let p = LargeScaleParams::default();
        let ch = draw_channels(
            &topo,
            &p,
            Dims {
                m: 100,
                l: 1,
                n: 100,
                k: 1,
            },
            17,
        )
        .unwrap();
        let var = ch.h_bs_irs.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e4;
        let want = path_gain(BS_POS.distance(&IRS_POS), p.kappa_irs, p.rho_assisted, p.d0).unwrap();
        assert!((var / want - 1.0).abs() < 0.03, "{var:e} vs {want:e}");
    }

    #[test]
    fn non_irs_links_do_not_depend_on_irs_size() {
        let topo = Topology::reference(place_users(USER_CENTER, USER_RADIUS, 2, 0));
        let small = draw_channels(&topo, &LargeScaleParams::default(), Dims { m: 4, l: 2, n: 4, k: 2 }, 9).unwrap();
        let large = draw_channels(
            &topo,
            &LargeScaleParams::default(),
            Dims {
                m: 4,
                l: 2,
                n: 32,
                k: 2,
            },
            9,
        )
        .unwrap();
        assert_eq!(small.h_bs_r, large.h_bs_r);
        assert_eq!(small.h_bs_users, large.h_bs_users);
        assert_eq!(small.h_r_users, large.h_r_users);
        assert_eq!(small.h_bs_irs.rows(0, 4), large.h_bs_irs.rows(0, 4));
    }

    #[test]
    fn zero_radius_users_share_large_scale_gain() {
        let users = place_users(USER_CENTER, 0.0, 2, 0);
        let topo = Topology::reference(users);
        topo.validate().unwrap();
        let p = LargeScaleParams::default();
        let g: Vec<f64> = topo
            .users
            .iter()
            .map(|u| path_gain(topo.bs.distance(u), p.kappa_direct_and_relay, p.rho_direct, p.d0).unwrap())
            .collect();
        assert_eq!(g[0], g[1]);
    }
}
