//! Hexagonal cell layout, MS trajectories, path loss and link budgets.

use crate::error::{Error, Result};

/// 2-D position in the cell plane, in units of the cell radius scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Full system parameterization: cell geometry, per-BS transmit powers and
/// path-loss exponents, interferer loading rates and the noise variance.
///
/// Index 0 is the serving BS throughout; vectors of length M+1 cover the
/// serving BS plus M interferers, loading rates cover interferers only.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cell_radius: f64,
    pub bs_positions: Vec<Point>,
    pub tx_powers: Vec<f64>,
    pub pathloss_exponents: Vec<f64>,
    pub loading_rates: Vec<f64>,
    pub noise_variance: f64,
}

impl Scenario {
    pub fn new(
        cell_radius: f64,
        bs_positions: Vec<Point>,
        tx_powers: Vec<f64>,
        pathloss_exponents: Vec<f64>,
        loading_rates: Vec<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        if !(cell_radius > 0.0) {
            return Err(Error::invalid(format!("cell radius must be > 0, got {cell_radius}")));
        }
        let n = bs_positions.len();
        if n == 0 {
            return Err(Error::invalid("at least the serving BS is required"));
        }
        if tx_powers.len() != n || pathloss_exponents.len() != n {
            return Err(Error::invalid(format!(
                "tx_powers/pathloss_exponents must have length {n} (serving BS + interferers)"
            )));
        }
        if loading_rates.len() != n - 1 {
            return Err(Error::invalid(format!(
                "loading_rates must have length {} (interferers only)",
                n - 1
            )));
        }
        if tx_powers.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::invalid("all transmit powers must be > 0"));
        }
        if pathloss_exponents.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("all path-loss exponents must be > 0"));
        }
        if loading_rates.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::invalid("loading rates must lie in [0, 1]"));
        }
        if !(noise_variance >= 0.0) {
            return Err(Error::invalid("noise variance must be >= 0"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if bs_positions[i].distance(&bs_positions[j]) < 1e-12 * cell_radius {
                    return Err(Error::invalid(format!(
                        "BS positions {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Scenario {
            cell_radius,
            bs_positions,
            tx_powers,
            pathloss_exponents,
            loading_rates,
            noise_variance,
        })
    }

    /// Number of interfering base stations.
    pub fn interferer_count(&self) -> usize {
        self.bs_positions.len() - 1
    }
}

/// Per-MS-position link budget: distances, path gains and received powers.
/// Index 0 is the desired link.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    pub ms_position: Point,
    pub distances: Vec<f64>,
    pub path_gains: Vec<f64>,
    pub received_powers: Vec<f64>,
}

impl LinkBudget {
    /// Desired-signal average received power E_0.
    pub fn desired_power(&self) -> f64 {
        self.received_powers[0]
    }

    /// Interferer average received powers E_1..E_M.
    pub fn interferer_powers(&self) -> &[f64] {
        &self.received_powers[1..]
    }
}

/// Hexagonal layout: serving BS at the origin plus `rings` rings of
/// interferers at inter-site distance sqrt(3) R. Ring k holds 6k sites, so
/// the total count is 1 + 3 rings (rings + 1). The first ring sits at angles
/// 0, 60, ..., 300 degrees.
pub fn hex_layout(rings: u32, r: f64) -> Result<Vec<Point>> {
    if rings == 0 {
        return Err(Error::invalid("rings must be >= 1"));
    }
    if !(r > 0.0) {
        return Err(Error::invalid(format!("cell radius must be > 0, got {r}")));
    }
    let isd = 3.0_f64.sqrt() * r;
    let dir: Vec<Point> = (0..6)
        .map(|k| {
            let phi = std::f64::consts::PI / 3.0 * k as f64;
            Point::new(isd * phi.cos(), isd * phi.sin())
        })
        .collect();
    let mut out = vec![Point::ORIGIN];
    for ring in 1..=rings {
        let k = ring as f64;
        for side in 0..6 {
            let corner = dir[side];
            let along = dir[(side + 2) % 6];
            for step in 0..ring {
                let s = step as f64;
                out.push(Point::new(
                    k * corner.x + s * along.x,
                    k * corner.y + s * along.y,
                ));
            }
        }
    }
    Ok(out)
}

/// Distances, path gains gamma_m = d_m^-alpha_m and received powers
/// E_m = P_m gamma_m for one MS position.
pub fn link_budget(scenario: &Scenario, ms_position: Point) -> Result<LinkBudget> {
    let mut distances = Vec::with_capacity(scenario.bs_positions.len());
    for (i, bs) in scenario.bs_positions.iter().enumerate() {
        let d = ms_position.distance(bs);
        if d < 1e-9 * scenario.cell_radius {
            return Err(Error::DegenerateGeometry(format!(
                "MS position ({}, {}) coincides with BS {i}",
                ms_position.x, ms_position.y
            )));
        }
        distances.push(d);
    }
    let path_gains: Vec<f64> = distances
        .iter()
        .zip(&scenario.pathloss_exponents)
        .map(|(&d, &a)| d.powf(-a))
        .collect();
    let received_powers: Vec<f64> = path_gains
        .iter()
        .zip(&scenario.tx_powers)
        .map(|(&g, &p)| p * g)
        .collect();
    Ok(LinkBudget {
        ms_position,
        distances,
        path_gains,
        received_powers,
    })
}

/// Noise variance that puts the desired link at `edge_snr_db` when the MS sits
/// at distance R from the serving BS: sigma_N^2 = P_0 R^-alpha_0 / 10^(dB/10).
pub fn edge_snr_noise(p0: f64, r: f64, alpha0: f64, edge_snr_db: f64) -> Result<f64> {
    if !(p0 > 0.0 && r > 0.0 && alpha0 > 0.0) || !edge_snr_db.is_finite() {
        return Err(Error::invalid(
            "edge_snr_noise requires P_0 > 0, R > 0, alpha_0 > 0 and finite dB",
        ));
    }
    Ok(p0 * r.powf(-alpha0) / 10f64.powf(edge_snr_db / 10.0))
}

/// MS movement lines through the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    /// From the cell center toward the boundary midpoint shared with the
    /// nearest first-ring BS (at distance sqrt(3) R / 2, angle 0).
    TwoCellEdge,
    /// From the cell center toward the hexagon vertex shared by three cells
    /// (at distance R, angle 30 degrees).
    ThreeCellCorner,
}

impl TrajectoryKind {
    /// Unit direction of the trajectory.
    pub fn direction(&self) -> Point {
        match self {
            TrajectoryKind::TwoCellEdge => Point::new(1.0, 0.0),
            TrajectoryKind::ThreeCellCorner => {
                Point::new(3.0_f64.sqrt() / 2.0, 0.5)
            }
        }
    }

    /// Distance from the cell center to the trajectory endpoint.
    pub fn endpoint_distance(&self, r: f64) -> f64 {
        match self {
            TrajectoryKind::TwoCellEdge => 3.0_f64.sqrt() / 2.0 * r,
            TrajectoryKind::ThreeCellCorner => r,
        }
    }
}

/// Point at `fraction` in [0, 1] of the way from the cell center to the
/// trajectory endpoint.
pub fn trajectory(kind: TrajectoryKind, fraction: f64, r: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!(
            "trajectory fraction must be in [0, 1], got {fraction}"
        )));
    }
    Ok(kind
        .direction()
        .scale(fraction * kind.endpoint_distance(r)))
}

/// Point at distance `d_over_r * R` from the serving BS along the trajectory
/// direction. Unlike [`trajectory`], the coordinate here is the MS-to-BS
/// distance itself, matching the d/R sweep axes.
pub fn radial_point(kind: TrajectoryKind, d_over_r: f64, r: f64) -> Result<Point> {
    if !(d_over_r >= 0.0) {
        return Err(Error::invalid("d/R must be >= 0"));
    }
    Ok(kind.direction().scale(d_over_r * r))
}
