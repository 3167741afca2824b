//! User motion model: uncertainty-circle search points, expected per-link
//! throughput over those points, handover-discounted transferred data, and
//! the per-slot position update.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, LinkBudget};
use crate::environment::{los_link, BuildingGrid, Point3, Region};
use crate::error::{Error, Result};

/// A mobile ground user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    pub id: usize,
    /// Current position; `z` stays at the receiver height.
    pub position: Point3,
    /// Speed drawn for the current slot, m/s.
    pub speed: f64,
    pub max_speed: f64,
    /// Maximum tolerable wait t_k, seconds.
    pub deadline: f64,
    /// Wait driving the service priority; may reset when served.
    pub waited: f64,
    /// Total unserved time since the start of the run; never resets.
    /// This is the per-user delay the metrics report on.
    pub total_waited: f64,
    /// UAV that served this user in the previous slot, if any.
    pub prev_uav: Option<usize>,
}

impl UserState {
    pub fn new(id: usize, position: Point3, max_speed: f64, deadline: f64) -> Self {
        Self {
            id,
            position,
            speed: 0.0,
            max_speed,
            deadline,
            waited: 0.0,
            total_waited: 0.0,
            prev_uav: None,
        }
    }

    /// Service priority: waited time over the deadline.
    pub fn priority(&self) -> f64 {
        self.waited / self.deadline
    }
}

/// A UAV base station. `position.z` is its flight altitude.
#[derive(Debug, Clone, PartialEq)]
pub struct UavState {
    pub id: usize,
    pub position: Point3,
    /// Maximum number of users served at once (orthogonal channels).
    pub capacity: usize,
    /// Cruise speed used for relocation, m/s.
    pub cruise_speed: f64,
}

/// Search-point discretization parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityParams {
    /// Sector central angle theta; must divide 2*pi to an integer.
    pub sector_angle_rad: f64,
    /// Ring step size in meters.
    pub step_m: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            sector_angle_rad: TAU / 8.0,
            step_m: 1.0,
        }
    }
}

/// Discrete, equally probable candidate end positions inside a user's
/// uncertainty circle.
#[derive(Debug, Clone)]
pub struct SearchPointSet {
    pub points: Vec<Point3>,
    /// Probability of each point; `probability * points.len() == 1`.
    pub probability: f64,
    /// Number of sectors (rays).
    pub sectors: usize,
    /// Number of concentric rings (0 for a static user).
    pub rings: usize,
}

/// Build the ring/sector search points for one slot: `ceil(r / step)` rings
/// at radii `min(l * step, r)` crossed with `2*pi / theta` rays. A static
/// user yields its current position with probability 1.
pub fn search_points(
    user: &UserState,
    slot: f64,
    theta: f64,
    step: f64,
) -> Result<SearchPointSet> {
    if !(step > 0.0) {
        return Err(Error::invalid("search step must be positive"));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid("sector angle must be positive"));
    }
    let sectors_f = TAU / theta;
    let sectors = sectors_f.round();
    if sectors < 1.0 || (sectors_f - sectors).abs() > 1e-9 * sectors_f {
        return Err(Error::invalid(format!(
            "sector angle {theta} does not divide 2*pi to an integer"
        )));
    }
    let sectors = sectors as usize;

    let radius = user.speed * slot;
    if radius == 0.0 {
        return Ok(SearchPointSet {
            points: vec![user.position],
            probability: 1.0,
            sectors,
            rings: 0,
        });
    }

    let rings = (radius / step).ceil() as usize;
    let mut points = Vec::with_capacity(rings * sectors);
    for l in 1..=rings {
        let r = (l as f64 * step).min(radius);
        for j in 0..sectors {
            let angle = j as f64 * theta;
            points.push(Point3::new(
                user.position.x + r * angle.cos(),
                user.position.y + r * angle.sin(),
                user.position.z,
            ));
        }
    }
    Ok(SearchPointSet {
        probability: 1.0 / points.len() as f64,
        points,
        sectors,
        rings,
    })
}

/// Expected throughput of the (UAV, user) link over the search points using
/// the mean channel gain: each point contributes its LoS-gated Shannon rate
/// times the point probability. Points outside the region are reflected back
/// in, matching the realized motion.
pub fn expected_rate(
    uav: &UavState,
    pts: &SearchPointSet,
    grid: &BuildingGrid,
    params: &ChannelParams,
) -> f64 {
    expected_rate_with(&LinkBudget::new(params), &uav.position, pts, grid)
}

pub(crate) fn expected_rate_with(
    budget: &LinkBudget,
    uav_pos: &Point3,
    pts: &SearchPointSet,
    grid: &BuildingGrid,
) -> f64 {
    let region = grid.region();
    let mut sum = 0.0;
    for p in &pts.points {
        let (x, y) = region.reflect(p.x, p.y);
        let p = Point3::new(x, y, p.z);
        if los_link(uav_pos, &p, grid).unwrap_or(false) {
            sum += pts.probability * budget.throughput_bps(uav_pos.distance(&p), 1.0);
        }
    }
    sum
}

/// Expected transferred data in bits for one slot: the expected rate times
/// the slot duration less the handover penalty. The penalty applies whenever
/// the serving UAV differs from the previous slot's (a fresh connection
/// counts as a handover).
pub fn expected_data(
    uav_id: usize,
    rate_bps: f64,
    user: &UserState,
    slot: f64,
    handover: f64,
) -> Result<f64> {
    if !(handover >= 0.0) || handover >= slot {
        return Err(Error::invalid(format!(
            "handover time must satisfy 0 <= {handover} < slot {slot}"
        )));
    }
    let switches = user.prev_uav != Some(uav_id);
    let effective = if switches { slot - handover } else { slot };
    Ok(effective * rate_bps)
}

/// Everything needed to score one (user, UAV) pair for one slot.
#[derive(Debug, Clone, Copy)]
pub struct LinkParams {
    pub channel: ChannelParams,
    pub mobility: MobilityParams,
    /// Slot duration, seconds.
    pub slot: f64,
    /// Handover penalty, seconds.
    pub handover: f64,
}

/// Expected transferred data for every (user, UAV) pair, indexed
/// `[user][uav]`, in bits.
pub fn expected_data_matrix(
    users: &[UserState],
    uavs: &[UavState],
    grid: &BuildingGrid,
    lp: &LinkParams,
) -> Result<Vec<Vec<f64>>> {
    let budget = LinkBudget::new(&lp.channel);
    let mut matrix = Vec::with_capacity(users.len());
    for user in users {
        let pts = search_points(user, lp.slot, lp.mobility.sector_angle_rad, lp.mobility.step_m)?;
        let mut row = Vec::with_capacity(uavs.len());
        for uav in uavs {
            let rate = expected_rate_with(&budget, &uav.position, &pts, grid);
            row.push(expected_data(uav.id, rate, user, lp.slot, lp.handover)?);
        }
        matrix.push(row);
    }
    Ok(matrix)
}

/// Advance every user by one slot: the realized end position is a uniform
/// draw from the user's search points (reflected at the region boundary),
/// then the speed is redrawn for the next slot.
pub fn advance_users<R: Rng + ?Sized>(
    users: &mut [UserState],
    region: &Region,
    slot: f64,
    mobility: &MobilityParams,
    rng: &mut R,
) -> Result<()> {
    for user in users.iter_mut() {
        let pts = search_points(user, slot, mobility.sector_angle_rad, mobility.step_m)?;
        let pick = pts.points[rng.random_range(0..pts.points.len())];
        let (x, y) = region.reflect(pick.x, pick.y);
        user.position = Point3::new(x, y, user.position.z);
        user.speed = if user.max_speed > 0.0 {
            rng.random_range(0.0..=user.max_speed)
        } else {
            0.0
        };
    }
    Ok(())
}
