//! Priority-aware, capacity-limited, throughput-weighted K-means that
//! produces the UAV centroid targets for the next macro slot together with
//! the clustering assignment.

use rand::Rng;

use crate::environment::{BuildingGrid, Point3};
use crate::error::{Error, Result};
use crate::mobility::{
    expected_data, expected_rate_with, search_points, LinkParams, UavState, UserState,
};
use crate::channel::LinkBudget;

/// Binary user-to-UAV assignment with capacity bookkeeping. A user is served
/// by at most one UAV and a UAV serves at most its capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    serving: Vec<Option<usize>>,
    load: Vec<usize>,
    capacities: Vec<usize>,
}

impl AssignmentMatrix {
    pub fn new(num_users: usize, capacities: Vec<usize>) -> Self {
        Self {
            serving: vec![None; num_users],
            load: vec![0; capacities.len()],
            capacities,
        }
    }

    pub fn num_users(&self) -> usize {
        self.serving.len()
    }

    pub fn num_uavs(&self) -> usize {
        self.capacities.len()
    }

    /// Serving UAV of a user, if any.
    pub fn serving(&self, user: usize) -> Option<usize> {
        self.serving[user]
    }

    pub fn load(&self, uav: usize) -> usize {
        self.load[uav]
    }

    pub fn capacity(&self, uav: usize) -> usize {
        self.capacities[uav]
    }

    pub fn is_full(&self, uav: usize) -> bool {
        self.load[uav] >= self.capacities[uav]
    }

    /// Number of served users.
    pub fn num_served(&self) -> usize {
        self.serving.iter().filter(|s| s.is_some()).count()
    }

    /// Assign a user to a UAV. Panics if the user is already served or the
    /// UAV is at capacity; callers maintain those invariants by construction.
    pub fn assign(&mut self, user: usize, uav: usize) {
        assert!(self.serving[user].is_none(), "user {user} already assigned");
        assert!(!self.is_full(uav), "uav {uav} is at capacity");
        self.serving[user] = Some(uav);
        self.load[uav] += 1;
    }

    pub fn unassign(&mut self, user: usize) {
        if let Some(uav) = self.serving[user].take() {
            self.load[uav] -= 1;
        }
    }

    pub fn clear(&mut self) {
        self.serving.fill(None);
        self.load.fill(0);
    }

    /// Served `(user, uav)` pairs in user order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.serving
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s.map(|m| (k, m)))
    }
}

/// Service priority: waited time over the deadline.
pub fn priority(waited: f64, deadline: f64) -> Result<f64> {
    if !(deadline > 0.0) {
        return Err(Error::invalid("deadline must be positive"));
    }
    if !(waited >= 0.0) {
        return Err(Error::invalid("waited time must be >= 0"));
    }
    Ok(waited / deadline)
}

/// Throughput-weighted mean of member ground positions. `None` when the
/// member list is empty or all weights are zero; the caller then keeps the
/// previous centroid.
pub fn update_centroid(members: &[(Point3, f64)]) -> Option<(f64, f64)> {
    let total: f64 = members.iter().map(|(_, w)| w).sum();
    if members.is_empty() || total <= 0.0 {
        return None;
    }
    let x = members.iter().map(|(p, w)| w * p.x).sum::<f64>() / total;
    let y = members.iter().map(|(p, w)| w * p.y).sum::<f64>() / total;
    Some((x, y))
}

/// Where the clustering pass starts its centroids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterInit {
    /// Fresh uniform-random centroids each pass. Re-seeding the search every
    /// macro slot rotates coverage across LoS pockets, which is what keeps
    /// long-starved users reachable; the relocation matching absorbs the
    /// movement cost.
    #[default]
    Random,
    /// Warm start from the current UAV positions.
    Fleet,
}

/// Clustering loop controls.
#[derive(Debug, Clone, Copy)]
pub struct ClusterParams {
    pub link: LinkParams,
    /// Stop when no centroid moves farther than this, meters.
    pub tol: f64,
    pub max_iterations: usize,
    pub init: ClusterInit,
}

/// Clustering outcome: converged centroid targets (one per UAV slot, `z`
/// frozen at each UAV's current altitude), the final assignment and the
/// number of iterations used.
#[derive(Debug, Clone)]
pub struct ClusterState {
    pub centroids: Vec<Point3>,
    pub assignment: AssignmentMatrix,
    pub iterations: usize,
}

/// One clustering pass per macro slot. Users are processed once in
/// descending priority order (ties by id); each iteration greedily hands
/// every user its best free UAV by expected transferred data, assigning only
/// when the expected data is positive, then recenters each cluster on the
/// throughput-weighted mean of its members. Stops at convergence or after
/// the iteration cap.
pub fn cluster<R: Rng + ?Sized>(
    users: &[UserState],
    uavs: &[UavState],
    grid: &BuildingGrid,
    cfg: &ClusterParams,
    rng: &mut R,
) -> Result<ClusterState> {
    let budget = LinkBudget::new(&cfg.link.channel);
    let mut order: Vec<usize> = (0..users.len()).collect();
    order.sort_by(|&a, &b| {
        users[b]
            .priority()
            .partial_cmp(&users[a].priority())
            .unwrap()
            .then(users[a].id.cmp(&users[b].id))
    });

    // User positions are fixed for the whole pass; search points can be
    // computed once.
    let mut point_sets = Vec::with_capacity(users.len());
    for u in users {
        point_sets.push(search_points(
            u,
            cfg.link.slot,
            cfg.link.mobility.sector_angle_rad,
            cfg.link.mobility.step_m,
        )?);
    }

    let region = grid.region();
    let mut centroids: Vec<Point3> = match cfg.init {
        ClusterInit::Fleet => uavs.iter().map(|u| u.position).collect(),
        ClusterInit::Random => uavs
            .iter()
            .map(|u| {
                Point3::new(
                    rng.random_range(0.0..region.width),
                    rng.random_range(0.0..region.height),
                    u.position.z,
                )
            })
            .collect(),
    };
    let mut assignment =
        AssignmentMatrix::new(users.len(), uavs.iter().map(|u| u.capacity).collect());
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        assignment.clear();
        let mut free: Vec<bool> = vec![true; uavs.len()];
        let mut free_count = uavs.len();

        // Expected transferred data against the current centroids.
        let mut data = vec![vec![0.0; uavs.len()]; users.len()];
        for (k, pts) in point_sets.iter().enumerate() {
            for (m, c) in centroids.iter().enumerate() {
                let rate = expected_rate_with(&budget, c, pts, grid);
                data[k][m] = expected_data(
                    uavs[m].id,
                    rate,
                    &users[k],
                    cfg.link.slot,
                    cfg.link.handover,
                )?;
            }
        }

        for &k in &order {
            if free_count == 0 {
                break;
            }
            let mut best: Option<(usize, f64)> = None;
            for m in 0..uavs.len() {
                if !free[m] {
                    continue;
                }
                let d = data[k][m];
                match best {
                    Some((_, bd)) if d <= bd => {}
                    _ => best = Some((m, d)),
                }
            }
            let (m, d) = best.expect("free_count > 0");
            if d > 0.0 {
                assignment.assign(k, m);
            }
            if assignment.is_full(m) {
                free[m] = false;
                free_count -= 1;
            }
        }

        // Recenter each cluster; clusters with no (positively weighted)
        // members keep their centroid.
        let mut moved: f64 = 0.0;
        for m in 0..uavs.len() {
            let members: Vec<(Point3, f64)> = assignment
                .pairs()
                .filter(|&(_, uav)| uav == m)
                .map(|(k, _)| (users[k].position, data[k][m]))
                .collect();
            if let Some((x, y)) = update_centroid(&members) {
                let next = Point3::new(x, y, centroids[m].z);
                moved = moved.max(next.ground_distance(&centroids[m]));
                centroids[m] = next;
            }
        }
        if moved < cfg.tol {
            break;
        }
    }

    Ok(ClusterState {
        centroids,
        assignment,
        iterations,
    })
}

/// End-of-slot wait accounting: every unserved user accrues the slot in both
/// its priority wait and its cumulative delay; served users' priority wait
/// resets when `reset_on_service` is set.
pub fn bump_priorities(
    users: &mut [UserState],
    assignment: &AssignmentMatrix,
    slot: f64,
    reset_on_service: bool,
) {
    for (k, user) in users.iter_mut().enumerate() {
        if assignment.serving(k).is_none() {
            user.waited += slot;
            user.total_waited += slot;
        } else if reset_on_service {
            user.waited = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::environment::{generate_city, BuildingGrid, CityParams, Region};
    use crate::mobility::MobilityParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn link_params() -> LinkParams {
        LinkParams {
            channel: ChannelParams::default(),
            mobility: MobilityParams::default(),
            slot: 1.0,
            handover: 0.1,
        }
    }

    fn cluster_params() -> ClusterParams {
        ClusterParams {
            link: link_params(),
            tol: 0.1,
            max_iterations: 50,
            init: ClusterInit::Fleet,
        }
    }

    fn user(id: usize, x: f64, y: f64, waited: f64, deadline: f64) -> UserState {
        let mut u = UserState::new(id, Point3::new(x, y, 1.5), 3.0, deadline);
        u.waited = waited;
        u
    }

    fn uav(id: usize, x: f64, y: f64, capacity: usize) -> UavState {
        UavState {
            id,
            position: Point3::new(x, y, 80.0),
            capacity,
            cruise_speed: 10.0,
        }
    }

    #[test]
    fn priority_examples() {
        assert_eq!(priority(0.0, 4.0).unwrap(), 0.0);
        assert_eq!(priority(4.0, 4.0).unwrap(), 1.0);
        assert_eq!(priority(2.0, 4.0).unwrap(), 0.5);
        assert!(priority(1.0, 0.0).is_err());
    }

    #[test]
    fn centroid_examples() {
        let a = Point3::new(0.0, 0.0, 1.5);
        let b = Point3::new(2.0, 0.0, 1.5);
        assert_eq!(update_centroid(&[(a, 7.0)]), Some((0.0, 0.0)));
        assert_eq!(update_centroid(&[(a, 1.0), (b, 1.0)]), Some((1.0, 0.0)));
        let c = Point3::new(4.0, 0.0, 1.5);
        assert_eq!(update_centroid(&[(a, 1.0), (c, 3.0)]), Some((3.0, 0.0)));
        assert_eq!(update_centroid(&[]), None);
        assert_eq!(update_centroid(&[(a, 0.0), (b, 0.0)]), None);
    }

    #[test]
    fn all_nlos_leaves_everything_unassigned() {
        let region = Region::new(100.0, 100.0);
        let params = CityParams {
            density: 1.0,
            height_range_m: [300.0, 300.0],
            ..CityParams::default()
        };
        let grid = generate_city(region, &params, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let users = vec![user(0, 20.0, 20.0, 1.0, 5.0), user(1, 60.0, 60.0, 0.5, 5.0)];
        let uavs = vec![uav(0, 30.0, 30.0, 4), uav(1, 70.0, 70.0, 4)];
        let before: Vec<Point3> = uavs.iter().map(|u| u.position).collect();
        let state = cluster(&users, &uavs, &grid, &cluster_params(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(state.assignment.num_served(), 0);
        assert_eq!(state.centroids, before);
    }

    #[test]
    fn single_uav_takes_everyone_on_flat_city() {
        let region = Region::new(100.0, 100.0);
        let grid = BuildingGrid::flat(region, 10.0).unwrap();
        let users: Vec<UserState> = (0..5)
            .map(|i| user(i, 10.0 + 15.0 * i as f64, 50.0, 0.0, 5.0))
            .collect();
        let uavs = vec![uav(0, 50.0, 50.0, 10)];
        let state = cluster(&users, &uavs, &grid, &cluster_params(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(state.assignment.num_served(), 5);
    }

    #[test]
    fn capacity_one_leaves_lowest_priority_unserved() {
        let region = Region::new(100.0, 100.0);
        let grid = BuildingGrid::flat(region, 10.0).unwrap();
        // Three users with distinct priorities, two UAVs of capacity 1.
        let users = vec![
            user(0, 10.0, 50.0, 3.0, 5.0),
            user(1, 90.0, 50.0, 2.0, 5.0),
            user(2, 50.0, 10.0, 1.0, 5.0),
        ];
        let uavs = vec![uav(0, 20.0, 50.0, 1), uav(1, 80.0, 50.0, 1)];
        let state = cluster(&users, &uavs, &grid, &cluster_params(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        // Highest priority user gets its best UAV (the nearest), second gets
        // the remaining one, third is unserved.
        assert_eq!(state.assignment.serving(0), Some(0));
        assert_eq!(state.assignment.serving(1), Some(1));
        assert_eq!(state.assignment.serving(2), None);
    }

    #[test]
    fn capacity_and_uniqueness_hold_on_random_instances() {
        let region = Region::new(200.0, 200.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let grid = generate_city(region, &CityParams::default(), &mut rng).unwrap();
            let users: Vec<UserState> = (0..40)
                .map(|i| {
                    user(
                        i,
                        rng.random_range(0.0..200.0),
                        rng.random_range(0.0..200.0),
                        rng.random_range(0.0..5.0),
                        rng.random_range(2.0..10.0),
                    )
                })
                .collect();
            let uavs: Vec<UavState> = (0..4)
                .map(|m| {
                    uav(
                        m,
                        rng.random_range(0.0..200.0),
                        rng.random_range(0.0..200.0),
                        5,
                    )
                })
                .collect();
            let state = cluster(&users, &uavs, &grid, &cluster_params(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            for m in 0..uavs.len() {
                let count = state.assignment.pairs().filter(|&(_, u)| u == m).count();
                assert_eq!(count, state.assignment.load(m));
                assert!(count <= uavs[m].capacity);
            }
            assert!(state.iterations <= cluster_params().max_iterations);
            // Each centroid stays within the bounding box of its members.
            for m in 0..uavs.len() {
                let members: Vec<Point3> = state
                    .assignment
                    .pairs()
                    .filter(|&(_, u)| u == m)
                    .map(|(k, _)| users[k].position)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let (min_x, max_x) = members
                    .iter()
                    .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
                let c = state.centroids[m];
                assert!(c.x >= min_x - 1e-9 && c.x <= max_x + 1e-9);
            }
        }
    }

    #[test]
    fn processing_order_is_descending_priority() {
        let region = Region::new(100.0, 100.0);
        let grid = BuildingGrid::flat(region, 10.0).unwrap();
        // One UAV, capacity 1: only the highest-priority user is served.
        let users = vec![
            user(0, 40.0, 50.0, 1.0, 10.0),
            user(1, 60.0, 50.0, 9.0, 10.0),
            user(2, 50.0, 40.0, 5.0, 10.0),
        ];
        let uavs = vec![uav(0, 50.0, 50.0, 1)];
        let state = cluster(&users, &uavs, &grid, &cluster_params(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(state.assignment.serving(1), Some(0));
        assert_eq!(state.assignment.num_served(), 1);
    }

    #[test]
    fn bump_examples() {
        let mut users = vec![user(0, 0.0, 0.0, 0.0, 10.0), user(1, 1.0, 1.0, 0.4, 10.0)];
        let mut m = AssignmentMatrix::new(2, vec![2]);
        m.assign(0, 0);
        bump_priorities(&mut users, &m, 1.0, true);
        // Served user keeps zero wait; unserved gains slot / deadline = 0.1.
        assert_eq!(users[0].waited, 0.0);
        assert!((users[1].priority() - 0.14).abs() < 1e-12);
        assert_eq!(users[1].total_waited, 1.0);
        bump_priorities(&mut users, &m, 1.0, true);
        assert!((users[1].priority() - 0.24).abs() < 1e-12);
        assert_eq!(users[1].total_waited, 2.0);
    }

    #[test]
    fn bump_without_reset_keeps_wait() {
        let mut users = vec![user(0, 0.0, 0.0, 3.0, 10.0)];
        let mut m = AssignmentMatrix::new(1, vec![1]);
        m.assign(0, 0);
        bump_priorities(&mut users, &m, 1.0, false);
        assert_eq!(users[0].waited, 3.0);
        assert_eq!(users[0].total_waited, 0.0);
    }

    #[test]
    fn all_served_bump_changes_nothing() {
        let mut users = vec![user(0, 0.0, 0.0, 2.0, 10.0), user(1, 1.0, 1.0, 4.0, 10.0)];
        let mut m = AssignmentMatrix::new(2, vec![1, 1]);
        m.assign(0, 0);
        m.assign(1, 1);
        let before: Vec<f64> = users.iter().map(|u| u.total_waited).collect();
        bump_priorities(&mut users, &m, 1.0, false);
        let after: Vec<f64> = users.iter().map(|u| u.total_waited).collect();
        assert_eq!(before, after);
    }

    #[test]
    #[should_panic(expected = "at capacity")]
    fn assignment_matrix_enforces_capacity() {
        let mut m = AssignmentMatrix::new(3, vec![1]);
        m.assign(0, 0);
        m.assign(1, 0);
    }
    #[test]
    fn random_init_is_deterministic_per_seed_and_explores() {
        let region = Region::new(100.0, 100.0);
        let grid = BuildingGrid::flat(region, 10.0).unwrap();
        let users: Vec<UserState> = (0..6)
            .map(|i| user(i, 10.0 + 13.0 * i as f64, 55.0, 0.0, 5.0))
            .collect();
        let uavs = vec![uav(0, 1.0, 1.0, 6)];
        let params = ClusterParams {
            init: ClusterInit::Random,
            ..cluster_params()
        };
        let a = cluster(&users, &uavs, &grid, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = cluster(&users, &uavs, &grid, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.centroids, b.centroids);
        // The centroid still converges onto the served users, wherever the
        // random start landed.
        assert!(a.assignment.num_served() > 0);
        let c = a.centroids[0];
        assert!(c.x >= 10.0 - 1e-9 && c.x <= 75.0 + 1e-9);
        assert_eq!(c.z, uavs[0].position.z);
    }
}
